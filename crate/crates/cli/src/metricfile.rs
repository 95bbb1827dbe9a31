//! Metric declaration files.
//!
//! ```text
//! # comment
//! dim 2 2
//! metric odd from g
//! g[1,1] = 1
//! g[1,2] = x1
//! ```
//!
//! Without `g[i,j]` lines the metric is fully symbolic. Entries not listed
//! are zero; `g[i,j]` also sets `g[j,i]`.

use std::sync::Arc;

use superharm_core::sgeometry::{MetricMode, Supermetric};
use superharm_core::superalg::SuperChart;
use superharm_core::symscalar::ScalarExpr;

use crate::parse::{parse_scalar, ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub src: String,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MetricDecl {
    pub dim: Option<(usize, usize)>,
    pub odd_from_g: bool,
    pub entries: Vec<Entry>,
}

fn err(line: usize, column: usize, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
    ParseError {
        kind,
        line,
        column,
        message: message.into(),
    }
}

fn parse_index(s: &str, line: usize, column: usize) -> Result<usize, ParseError> {
    match s.trim().parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => Err(err(line, column, ParseErrorKind::Syntax, format!("bad index `{}`", s.trim()))),
    }
}

pub fn parse_metric_file(src: &str) -> Result<MetricDecl, ParseError> {
    let mut decl = MetricDecl::default();
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let text = raw.split('#').next().unwrap_or("");
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = text.len() - text.trim_start().len();
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        if words[0] == "dim" {
            if words.len() != 3 {
                return Err(err(line, indent + 1, ParseErrorKind::Syntax, "expected `dim M N`"));
            }
            let m = words[1].parse().map_err(|_| err(line, indent + 5, ParseErrorKind::Syntax, "bad dimension"))?;
            let n = words[2].parse().map_err(|_| err(line, indent + 5, ParseErrorKind::Syntax, "bad dimension"))?;
            decl.dim = Some((m, n));
        } else if words == ["metric", "odd", "from", "g"] {
            decl.odd_from_g = true;
        } else if trimmed.starts_with("g[") {
            let close = trimmed
                .find(']')
                .ok_or_else(|| err(line, indent + 1, ParseErrorKind::Syntax, "expected `g[i,j] = EXPR`"))?;
            let inside = &trimmed[2..close];
            let (a, b) = inside
                .split_once(',')
                .ok_or_else(|| err(line, indent + 3, ParseErrorKind::Syntax, "expected two indices"))?;
            let i = parse_index(a, line, indent + 3)?;
            let j = parse_index(b, line, indent + 3)?;
            let rest = &trimmed[close + 1..];
            let eq = rest
                .find('=')
                .ok_or_else(|| err(line, indent + close + 2, ParseErrorKind::Syntax, "expected `=`"))?;
            let expr = &rest[eq + 1..];
            decl.entries.push(Entry {
                i,
                j,
                src: expr.to_string(),
                line,
                column: indent + close + 1 + eq + 2,
            });
        } else {
            return Err(err(line, indent + 1, ParseErrorKind::Syntax, format!("unrecognized declaration `{trimmed}`")));
        }
    }
    if !decl.odd_from_g {
        return Err(err(1, 1, ParseErrorKind::Syntax, "missing `metric odd from g`"));
    }
    Ok(decl)
}

impl MetricDecl {
    pub fn is_explicit(&self) -> bool {
        !self.entries.is_empty()
    }

    /// The explicit `g` matrix, entries parsed on `chart`.
    pub fn g_matrix(&self, chart: &Arc<SuperChart>) -> Result<Vec<Vec<ScalarExpr>>, ParseError> {
        let m = chart.dim().0;
        let mut g = vec![vec![ScalarExpr::zero(); m]; m];
        for e in &self.entries {
            if e.i > m || e.j > m {
                return Err(err(e.line, 1, ParseErrorKind::Syntax, format!("index out of range for dimension {m}")));
            }
            let v = parse_scalar(&e.src, chart).map_err(|mut p| {
                if p.line == 1 {
                    p.column += e.column - 1;
                }
                p.line = e.line + p.line - 1;
                p
            })?;
            g[e.i - 1][e.j - 1] = v.clone();
            g[e.j - 1][e.i - 1] = v;
        }
        Ok(g)
    }

    pub fn build(&self, chart: &Arc<SuperChart>) -> Result<Supermetric, String> {
        if self.is_explicit() {
            let g = self.g_matrix(chart).map_err(|e| e.to_string())?;
            Supermetric::from_g(chart, g, MetricMode::Explicit).map_err(|e| e.to_string())
        } else {
            Supermetric::opaque(chart, true).map_err(|e| e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_declarations() {
        let d = parse_metric_file("# flat-ish\ndim 2 2\nmetric odd from g\ng[1,1] = 1\ng[2, 1] = x1\ng[2,2] = 1 + x1^2\n").unwrap();
        assert_eq!(d.dim, Some((2, 2)));
        let c = SuperChart::standard(2, 2);
        let g = d.g_matrix(&c).unwrap();
        assert_eq!(g[0][1], g[1][0]);
        assert!(d.build(&c).is_ok());
    }

    #[test]
    fn symbolic_without_entries() {
        let d = parse_metric_file("metric odd from g\n").unwrap();
        assert!(!d.is_explicit());
    }

    #[test]
    fn errors_have_lines() {
        let e = parse_metric_file("metric odd from g\nfoo bar\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_metric_file("dim 1 1\n").unwrap_err();
        assert!(e.message.contains("metric odd from g"));
        let d = parse_metric_file("metric odd from g\ng[1,1] = zz\n").unwrap();
        let e = d.g_matrix(&SuperChart::standard(1, 1)).unwrap_err();
        assert_eq!((e.line, e.column), (2, 10));
    }
}
