//! JSON report schema.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use superharm_core::superalg::{GradedExpr, OddMonomial, SuperChart};

use crate::parse::{parse_scalar, ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    /// 1-based positions in `generators`.
    pub monomial: Vec<usize>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub method: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub dim: [usize; 2],
    pub mode: String,
    pub result_terms: Vec<Term>,
    pub verdict: Option<String>,
    pub constants: Option<BTreeMap<String, String>>,
    pub generators: Vec<String>,
    pub components: Vec<Component>,
    pub checks: Vec<Check>,
}

pub fn terms_of(e: &GradedExpr) -> Vec<Term> {
    e.terms()
        .map(|(m, s)| Term {
            monomial: m.indices().map(|j| j + 1).collect(),
            coeff: s.to_string(),
        })
        .collect()
}

/// Rebuild an expression from a term list on `chart`.
pub fn expr_from_terms(terms: &[Term], chart: &Arc<SuperChart>) -> Result<GradedExpr, ParseError> {
    let mut out = GradedExpr::zero(chart);
    for t in terms {
        let gens: Vec<usize> = t.monomial.iter().map(|k| k.wrapping_sub(1)).collect();
        let (sign, mono) = OddMonomial::from_product(&gens)
            .filter(|_| gens.iter().all(|&j| j < chart.dim().1))
            .ok_or_else(|| ParseError {
                kind: ParseErrorKind::Syntax,
                line: 1,
                column: 1,
                message: format!("bad monomial {:?}", t.monomial),
            })?;
        let coeff = parse_scalar(&t.coeff, chart)?;
        out = &out + &GradedExpr::term(chart, mono, coeff).scale_int(sign);
    }
    Ok(out)
}
