//! Second-order superjet chart of `p: R^{1|1} × (M, ∧E) → (M, ∧E)`.
//!
//! Fiber coordinates are `t` (even) and `τ` (odd). A jet variable `u_I` is
//! indexed by a multi-index of base coordinates of length ≤ 2 and stands for
//! `∂_{I_k} ⋯ ∂_{I_1}(u∘σ)`, so `u_{αβ} = ∂_β ∂_α u`. Second jets are stored
//! for `α ≤ β` in base-coordinate order; `u_{βα} = (−1)^{|α||β|} u_{αβ}` and
//! `u_{αα} = 0` for odd `α`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::superalg::{Coord, GradedExpr, Parity, SuperChart};
use crate::symscalar::EvenSymbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    T,
    Tau,
}

impl Field {
    pub fn parity(self) -> Parity {
        match self {
            Field::T => Parity::Even,
            Field::Tau => Parity::Odd,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::T => "t",
            Field::Tau => "tau",
        }
    }

    pub const ALL: [Field; 2] = [Field::T, Field::Tau];
}

/// What a coordinate of the jet chart stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JetCoord {
    Base(Coord),
    Jet { field: Field, index: Vec<Coord> },
}

#[derive(Clone, Debug)]
pub struct JetChart {
    base: Arc<SuperChart>,
    chart: Arc<SuperChart>,
    info: Vec<JetCoord>,
    lookup: BTreeMap<(Field, Vec<Coord>), Coord>,
    base_pos: Vec<Coord>,
}

fn index_suffix(c: Coord) -> String {
    match c {
        Coord::Even(i) => format!("{}", i + 1),
        Coord::Odd(j) => format!("m{}", j + 1),
    }
}

/// Name of a jet variable, e.g. `t`, `tau_m1`, `t_1_m2`.
pub fn jet_name(field: Field, index: &[Coord]) -> String {
    let mut s = field.name().to_string();
    for c in index {
        s.push('_');
        s.push_str(&index_suffix(*c));
    }
    s
}

impl JetChart {
    /// Jets up to order 2 over `base`.
    pub fn new(base: &Arc<SuperChart>) -> Result<Self> {
        let base_coords: Vec<Coord> = base.coords().collect();
        let mut vars: Vec<(Field, Vec<Coord>)> = Vec::new();
        for field in Field::ALL {
            vars.push((field, vec![]));
            for &a in &base_coords {
                vars.push((field, vec![a]));
            }
            for (ka, &a) in base_coords.iter().enumerate() {
                for &b in &base_coords[ka..] {
                    if a == b && a.parity().is_odd() {
                        continue;
                    }
                    vars.push((field, vec![a, b]));
                }
            }
        }
        let mut even: Vec<EvenSymbol> = base.even().to_vec();
        let mut odd: Vec<Arc<str>> = base.odd().to_vec();
        let mut even_info: Vec<JetCoord> = (0..base.even().len()).map(|i| JetCoord::Base(Coord::Even(i))).collect();
        let mut odd_info: Vec<JetCoord> = (0..base.odd().len()).map(|j| JetCoord::Base(Coord::Odd(j))).collect();
        for (field, index) in &vars {
            let p = index.iter().fold(field.parity(), |p, c| p + c.parity());
            let name = jet_name(*field, index);
            let info = JetCoord::Jet {
                field: *field,
                index: index.clone(),
            };
            if p.is_odd() {
                odd.push(Arc::from(name));
                odd_info.push(info);
            } else {
                even.push(EvenSymbol::jet(name));
                even_info.push(info);
            }
        }
        let chart = SuperChart::new(even, odd)?;
        let mut info = even_info;
        info.extend(odd_info);
        let mut lookup = BTreeMap::new();
        for (k, ji) in info.iter().enumerate() {
            if let JetCoord::Jet { field, index } = ji {
                lookup.insert((*field, index.clone()), chart.coord_at(k));
            }
        }
        let base_pos = base_coords
            .iter()
            .map(|&c| chart.lookup(base.coord_name(c)).expect("base coordinate present"))
            .collect();
        Ok(Self {
            base: base.clone(),
            chart,
            info,
            lookup,
            base_pos,
        })
    }

    pub fn base(&self) -> &Arc<SuperChart> {
        &self.base
    }

    pub fn chart(&self) -> &Arc<SuperChart> {
        &self.chart
    }

    pub fn info(&self, c: Coord) -> &JetCoord {
        &self.info[self.chart.coord_index(c)]
    }

    /// Chart coordinate corresponding to a base coordinate.
    pub fn base_coord(&self, c: Coord) -> Coord {
        self.base_pos[self.base.coord_index(c)]
    }

    /// Resolve `u_I` to `(sign, coordinate)` after graded-symmetry
    /// normalization; `None` when the variable vanishes (odd diagonal).
    pub fn jet_coord(&self, field: Field, index: &[Coord]) -> Result<Option<(i64, Coord)>> {
        if index.len() > 2 {
            return Err(Error::JetOrder(format!(
                "jets of order {} are not in a second-order chart",
                index.len()
            )));
        }
        let mut idx = index.to_vec();
        let mut sign = 1;
        if idx.len() == 2 && self.base.coord_index(idx[0]) > self.base.coord_index(idx[1]) {
            if idx[0].parity().is_odd() && idx[1].parity().is_odd() {
                sign = -1;
            }
            idx.swap(0, 1);
        }
        if idx.len() == 2 && idx[0] == idx[1] && idx[0].parity().is_odd() {
            return Ok(None);
        }
        Ok(self.lookup.get(&(field, idx)).map(|&c| (sign, c)))
    }

    /// `u_I` as an expression on the jet chart.
    pub fn jet(&self, field: Field, index: &[Coord]) -> Result<GradedExpr> {
        Ok(match self.jet_coord(field, index)? {
            None => GradedExpr::zero(&self.chart),
            Some((sign, c)) => GradedExpr::coord(&self.chart, c).scale_int(sign),
        })
    }

    /// Order of the jet variable at a chart coordinate (0 for base and fiber).
    pub fn order(&self, c: Coord) -> usize {
        match self.info(c) {
            JetCoord::Base(_) => 0,
            JetCoord::Jet { index, .. } => index.len(),
        }
    }

    /// Highest jet order occurring in `e`.
    pub fn expr_order(&self, e: &GradedExpr) -> usize {
        self.chart
            .coords()
            .filter(|&c| self.order(c) > 0 && self.mentions(e, c))
            .map(|c| self.order(c))
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn mentions(&self, e: &GradedExpr, c: Coord) -> bool {
        match c {
            Coord::Even(i) => {
                let s = self.chart.even_symbol(i);
                e.terms().any(|(_, coeff)| {
                    coeff
                        .atoms()
                        .any(|a| matches!(a, crate::symscalar::Atom::Sym(x) if x == s))
                })
            }
            Coord::Odd(j) => e.terms().any(|(m, _)| m.contains(j)),
        }
    }

    /// Base-chart expression lifted to the jet chart.
    pub fn embed(&self, e: &GradedExpr) -> Result<GradedExpr> {
        e.transplant(&self.chart)
    }
}
