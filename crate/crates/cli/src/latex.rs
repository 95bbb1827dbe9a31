//! LaTeX rendering of normalized expressions.

use num_traits::{One, Signed};
use superharm_core::berezin::DENSITY_ATOM;
use superharm_core::superalg::{GradedDerivation, GradedExpr};
use superharm_core::symscalar::{Atom, FuncAtom, Monomial, Rational};

fn index_list(ix: &[u32]) -> String {
    ix.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("")
}

/// `x1 → x^{1}`, `th2 → \theta^{2}`, `tau_1_m2 → \tau_{1,-2}`.
pub fn symbol(name: &str) -> String {
    let mut parts = name.split('_');
    let head = parts.next().unwrap_or_default();
    let rest: Vec<String> = parts
        .map(|p| p.strip_prefix('m').map_or(p.to_string(), |k| format!("-{k}")))
        .collect();
    let base = match head {
        "tau" => "\\tau".to_string(),
        "rho" => "\\rho".to_string(),
        h => {
            if let Some(k) = h.strip_prefix("th").filter(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit())) {
                return format!("\\theta^{{{k}}}");
            }
            if let Some(k) = h.strip_prefix('x').filter(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit())) {
                return format!("x^{{{k}}}");
            }
            h.to_string()
        }
    };
    if rest.is_empty() {
        base
    } else {
        format!("{base}_{{{}}}", rest.join(","))
    }
}

fn func_atom(f: &FuncAtom) -> String {
    let mut s = if f.name() == DENSITY_ATOM { "\\rho".to_string() } else { f.name().to_string() };
    if !f.upper().is_empty() {
        s.push_str(&format!("^{{{}}}", index_list(f.upper())));
    }
    if !f.lower().is_empty() {
        s.push_str(&format!("_{{{}}}", index_list(f.lower())));
    }
    let mut prefix = String::new();
    for (x, n) in f.deriv() {
        for _ in 0..*n {
            prefix.push_str(&format!("\\partial_{{{}}}", symbol(x)));
        }
    }
    if prefix.is_empty() {
        s
    } else {
        format!("{prefix} {s}")
    }
}

fn monomial(m: &Monomial) -> String {
    m.factors()
        .iter()
        .map(|(a, e)| {
            let base = match a {
                Atom::Sym(s) => symbol(s.name()),
                Atom::Func(f) => func_atom(f),
            };
            let base = if matches!(a, Atom::Func(f) if f.has_derivatives()) {
                format!("({base})")
            } else {
                base
            };
            if *e == 1 {
                base
            } else if base.contains('^') {
                format!("({base})^{{{e}}}")
            } else {
                format!("{base}^{{{e}}}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn coefficient(c: &Rational, body: &str, first: bool) -> String {
    let mut s = String::new();
    if c.is_negative() {
        s.push_str(if first { "-" } else { " - " });
    } else if !first {
        s.push_str(" + ");
    }
    let mag = c.abs();
    let num = if mag.is_integer() {
        mag.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", mag.numer(), mag.denom())
    };
    if body.is_empty() {
        s.push_str(&num);
    } else if mag.is_one() {
        s.push_str(body);
    } else {
        s.push_str(&format!("{num} {body}"));
    }
    s
}

pub fn expr(e: &GradedExpr) -> String {
    let chart = e.chart();
    let mut out = String::new();
    let mut first = true;
    for (m, s) in e.terms() {
        let gens: Vec<String> = m.indices().map(|j| symbol(&chart.odd()[j])).collect();
        for (sm, c) in s.terms() {
            let mut parts = Vec::new();
            if !sm.is_one() {
                parts.push(monomial(sm));
            }
            parts.extend(gens.iter().cloned());
            out.push_str(&coefficient(c, &parts.join(" "), first));
            first = false;
        }
    }
    if first {
        out.push('0');
    }
    out
}

pub fn derivation(d: &GradedDerivation) -> String {
    let chart = d.chart();
    let parts: Vec<String> = d
        .components()
        .filter(|(_, v)| !v.is_zero())
        .map(|(c, v)| format!("\\left({}\\right)\\frac{{\\partial}}{{\\partial {}}}", expr(v), symbol(chart.coord_name(c))))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;
    use superharm_core::superalg::SuperChart;

    #[test]
    fn symbols() {
        assert_eq!(symbol("x1"), "x^{1}");
        assert_eq!(symbol("th2"), "\\theta^{2}");
        assert_eq!(symbol("tau_1_m2"), "\\tau_{1,-2}");
        assert_eq!(symbol("t_m1"), "t_{-1}");
    }

    #[test]
    fn expressions() {
        let c = SuperChart::standard(1, 1);
        let e = parse_expr("-1/2*g^[1,1]*th1 + d(rho, x1)*rho^-1", &c).unwrap();
        let s = expr(&e);
        assert!(s.contains("\\frac{1}{2} g^{11} \\theta^{1}"), "{s}");
        assert!(s.contains("\\partial_{x^{1}} \\rho"), "{s}");
        assert_eq!(expr(&GradedExpr::zero(&c)), "0");
    }
}
