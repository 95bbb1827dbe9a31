//! Gradient and Laplacian of the odd metric, and the check that the
//! Euler–Lagrange equations of `ρ·L` on a section are the two parity
//! components of `Δf = 0`.

use std::fmt;
use std::sync::Arc;

use num_traits::Signed;

use crate::berezin::{divergence_closed_with, Density};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::jets::JetChart;
use crate::sgeometry::{MetricMode, Supermetric};
use crate::superalg::{Coord, GradedDerivation, GradedExpr, Parity, SuperChart};
use crate::symscalar::{ratio, Rational};
use crate::variational::{euler_lagrange, restrict_to_section, sigma_lagrangian, SectionSubstitution};

fn require_g_form(g: &Supermetric) -> Result<()> {
    if g.parity().is_odd() && g.has_g_form() {
        Ok(())
    } else {
        Err(Error::Unsupported("needs an odd metric built from g".into()))
    }
}

/// `grad f = g^{ij}(∂f/∂θ_j)∂_{x_i} + g^{kl}(∂f/∂x_k)∂_{θ_l}`.
pub fn gradient(f: &GradedExpr, g: &Supermetric) -> Result<GradedDerivation> {
    require_g_form(g)?;
    let chart = g.chart();
    if !SuperChart::same(f.chart(), chart) {
        return Err(Error::ChartMismatch);
    }
    let m = chart.dim().0;
    let mut out = GradedDerivation::zero(chart);
    for i in 0..m {
        let mut xi = GradedExpr::zero(chart);
        let mut th = GradedExpr::zero(chart);
        for j in 0..m {
            let gij = g.g_upper(i, j)?;
            if gij.is_zero() {
                continue;
            }
            xi = &xi + &f.partial_odd(j)?.mul_scalar(&gij);
            th = &th + &f.partial_even(j)?.mul_scalar(&gij);
        }
        out.set_component(Coord::Even(i), xi);
        out.set_component(Coord::Odd(i), th);
    }
    Ok(out)
}

/// Solve `⟨grad f, ∂_α⟩ = ∂_α f` for every coordinate `α`.
pub fn gradient_from_definition(f: &GradedExpr, g: &Supermetric) -> Result<GradedDerivation> {
    let chart = g.chart();
    if !SuperChart::same(f.chart(), chart) {
        return Err(Error::ChartMismatch);
    }
    if matches!(g.mode(), MetricMode::Opaque { .. }) {
        return Err(Error::NotInvertible("gradient from the definition needs an explicit metric".into()));
    }
    let rhs = chart.coords().map(|c| f.partial(c)).collect::<Result<Vec<_>>>()?;
    g.solve_sharp(&rhs)
}

/// `Δf = Σ_p (−1)^{(p+1)|ξ|} div(grad f_p)` over the homogeneous parts `f_p`.
pub fn laplacian(f: &GradedExpr, g: &Supermetric, rho: &Density) -> Result<GradedExpr> {
    laplacian_with(f, g, rho, Parity::Even)
}

pub fn laplacian_with(f: &GradedExpr, g: &Supermetric, rho: &Density, xi: Parity) -> Result<GradedExpr> {
    let mut out = GradedExpr::zero(g.chart());
    for (p, part) in f.homogeneous_parts() {
        let d = divergence_closed_with(&gradient(&part, g)?, rho, xi)?;
        out = &out + &d.scale_int(Parity::koszul(p + Parity::Odd, xi));
    }
    Ok(out)
}

/// `(1/ρ)∂_iρ g^{ij}f_{−j} + ∂_ig^{ij} f_{−j} + g^{ij}f_{i,−j} + g^{ij}f_{−i,j}`
/// with `f_{i,−j} = ∂_{θ_j}∂_{x_i} f` and `f_{−i,j} = ∂_{x_j}∂_{θ_i} f`.
pub fn laplacian_four_term(f: &GradedExpr, g: &Supermetric, rho: &Density) -> Result<GradedExpr> {
    require_g_form(g)?;
    let chart = g.chart();
    let m = chart.dim().0;
    let mut out = GradedExpr::zero(chart);
    for i in 0..m {
        let x = chart.even_symbol(i);
        let log_rho = rho.inverse().mul(&rho.expr().diff(x)?);
        for j in 0..m {
            let gij = g.g_upper(i, j)?;
            let f_j = f.partial_odd(j)?;
            let coeff = log_rho.mul(&gij).add(&gij.diff(x)?);
            out = &out + &f_j.mul_scalar(&coeff);
            out = &out + &f.partial_even(i)?.partial_odd(j)?.mul_scalar(&gij);
            out = &out + &f.partial_odd(i)?.partial_even(j)?.mul_scalar(&gij);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of comparing one Euler–Lagrange equation with one parity part
/// of the Laplacian.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    /// `ρ^{-1}·E_u` evaluated on the generic section.
    pub restricted: GradedExpr,
    /// Matching parity part of `Δf`.
    pub laplacian: GradedExpr,
    pub constant: Option<Rational>,
    pub residual: GradedExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicReport {
    pub dim: (usize, usize),
    pub mode: MetricMode,
    pub t: Comparison,
    pub tau: Comparison,
    pub verdict: Verdict,
}

impl HarmonicReport {
    pub fn c_t(&self) -> Option<&Rational> {
        self.t.constant.as_ref()
    }

    pub fn c_tau(&self) -> Option<&Rational> {
        self.tau.constant.as_ref()
    }

    pub fn residual_t(&self) -> &GradedExpr {
        &self.t.residual
    }

    pub fn residual_tau(&self) -> &GradedExpr {
        &self.tau.residual
    }
}

/// Nonzero rationals `p/q` with `|p|, q ≤ bound`, in lowest terms, ordered by
/// height `max(|p|, q)`, then by value with positives first.
pub fn small_rationals(bound: i64) -> Vec<Rational> {
    let mut out: Vec<(i64, Rational)> = Vec::new();
    for q in 1..=bound {
        for p in 1..=bound {
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            let h = p.max(q);
            out.push((h, ratio(p, q)));
            out.push((h, ratio(-p, q)));
        }
    }
    out.sort_by(|(ha, a), (hb, b)| {
        ha.cmp(hb)
            .then(a.is_negative().cmp(&b.is_negative()))
            .then(a.abs().cmp(&b.abs()))
    });
    out.into_iter().map(|(_, r)| r).collect()
}

const CONSTANT_BOUND: i64 = 6;

fn compare(restricted: GradedExpr, laplacian: GradedExpr) -> Comparison {
    for c in small_rationals(CONSTANT_BOUND) {
        let residual = &restricted - &laplacian.scale(&c);
        if residual.is_zero() {
            return Comparison {
                restricted,
                laplacian,
                constant: Some(c),
                residual,
            };
        }
    }
    let residual = &restricted - &laplacian;
    Comparison {
        restricted,
        laplacian,
        constant: None,
        residual,
    }
}

/// Build `λ = ρ·L`, take its Euler–Lagrange equations, evaluate them on the
/// generic section `f = φ + ψ` and compare with the parity parts of `Δf`.
pub fn verify_theorem_for(g: &Supermetric, rho: &Density, exec: Exec) -> Result<HarmonicReport> {
    require_g_form(g)?;
    let base: &Arc<SuperChart> = g.chart();
    let jets = JetChart::new(base)?;
    let lambda = sigma_lagrangian(g, &jets)?.times_density(rho.expr());
    let (et, etau) = euler_lagrange(&jets, lambda.expr())?;
    let section = SectionSubstitution::generic(base);
    let lap = laplacian(&section.total(), g, rho)?;
    let side = |e: &GradedExpr, p: Parity| -> Result<Comparison> {
        let r = restrict_to_section(&jets, e, &section)?.mul_scalar(rho.inverse());
        Ok(compare(r, lap.part(p)))
    };
    let (t, tau) = exec.join(|| side(&et, Parity::Even), || side(&etau, Parity::Odd));
    let (t, tau) = (t?, tau?);
    let verdict = if t.residual.is_zero() && tau.residual.is_zero() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(HarmonicReport {
        dim: base.dim(),
        mode: g.mode(),
        t,
        tau,
        verdict,
    })
}

/// The check on `(n|n)`: opaque mode uses symbolic `g^{ij}` and `ρ`,
/// explicit mode the flat metric with `ρ = 1`.
pub fn verify_theorem(n: usize, mode: MetricMode, exec: Exec) -> Result<HarmonicReport> {
    if n == 0 {
        return Err(Error::Dimension("theorem check needs n >= 1".into()));
    }
    let chart = SuperChart::standard(n, n);
    match mode {
        MetricMode::Opaque { inverse_rule } => {
            verify_theorem_for(&Supermetric::opaque(&chart, inverse_rule)?, &Density::atom(), exec)
        }
        MetricMode::Explicit => verify_theorem_for(&Supermetric::flat(&chart)?, &Density::one(), exec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symscalar::{rat, FuncAtom, ScalarExpr};

    fn g_up(i: u32, j: u32) -> ScalarExpr {
        ScalarExpr::atom(FuncAtom::symmetric_upper("g", i, j))
    }

    #[test]
    fn gradient_examples() {
        let c = SuperChart::standard(1, 1);
        let g = Supermetric::opaque(&c, false).unwrap();
        let x1 = GradedExpr::even_coord(&c, 0);
        let th = GradedExpr::generator(&c, 0);
        let gx = gradient(&x1, &g).unwrap();
        let want = GradedDerivation::coordinate(&c, Coord::Odd(0))
            .left_mul(&GradedExpr::scalar(&c, g_up(1, 1)))
            .unwrap();
        assert_eq!(gx, want);
        let gt = gradient(&th, &g).unwrap();
        let want = GradedDerivation::coordinate(&c, Coord::Even(0))
            .left_mul(&GradedExpr::scalar(&c, g_up(1, 1)))
            .unwrap();
        assert_eq!(gt, want);
        assert!(gradient(&GradedExpr::int(&c, 5), &g).unwrap().is_zero());
    }

    #[test]
    fn gradient_by_definition_flat() {
        let c = SuperChart::standard(1, 1);
        let g = Supermetric::flat(&c).unwrap();
        let x1 = GradedExpr::even_coord(&c, 0);
        let th = GradedExpr::generator(&c, 0);
        let f = &x1 * &th;
        let want = GradedDerivation::from_components(&c, vec![x1, th]).unwrap();
        assert_eq!(gradient_from_definition(&f, &g).unwrap(), want);
        assert_eq!(gradient(&f, &g).unwrap(), want);
        assert!(gradient_from_definition(&GradedExpr::zero(&c), &g).unwrap().is_zero());
        let opaque = Supermetric::opaque(&c, true).unwrap();
        assert!(gradient_from_definition(&f, &opaque).is_err());
    }

    #[test]
    fn flat_laplacian_value() {
        let c = SuperChart::standard(1, 1);
        let g = Supermetric::flat(&c).unwrap();
        let f = &GradedExpr::even_coord(&c, 0) * &GradedExpr::generator(&c, 0);
        let rho = Density::one();
        assert_eq!(laplacian(&f, &g, &rho).unwrap(), GradedExpr::int(&c, 2));
        assert_eq!(laplacian_four_term(&f, &g, &rho).unwrap(), GradedExpr::int(&c, 2));
        assert!(laplacian(&GradedExpr::int(&c, 3), &g, &rho).unwrap().is_zero());
    }

    #[test]
    fn laplacian_of_body_only_function_vanishes() {
        let c = SuperChart::standard(2, 2);
        let g = Supermetric::opaque(&c, false).unwrap();
        let x = GradedExpr::even_coord(&c, 0);
        let f = &(&x * &x) * &GradedExpr::even_coord(&c, 1);
        assert!(laplacian(&f, &g, &Density::atom()).unwrap().is_zero());
        assert!(laplacian_four_term(&f, &g, &Density::atom()).unwrap().is_zero());
    }

    #[test]
    fn two_routes_agree_symbolically() {
        for n in 1..=2 {
            let c = SuperChart::standard(n, n);
            let g = Supermetric::opaque(&c, false).unwrap();
            let f = crate::variational::generic_superfunction(&c);
            let rho = Density::atom();
            assert_eq!(laplacian(&f, &g, &rho).unwrap(), laplacian_four_term(&f, &g, &rho).unwrap());
            assert_eq!(laplacian_with(&f, &g, &rho, Parity::Odd).unwrap(), laplacian(&f, &g, &rho).unwrap());
        }
    }

    #[test]
    fn theorem_flat_one() {
        let r = verify_theorem(1, MetricMode::Explicit, Exec::Sequential).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert_eq!(r.c_t(), Some(&rat(-1)));
        assert_eq!(r.c_tau(), Some(&rat(1)));
    }

    #[test]
    fn theorem_opaque_one() {
        let r = verify_theorem(1, MetricMode::Opaque { inverse_rule: false }, Exec::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert_eq!(r.c_t(), Some(&rat(-1)));
        assert_eq!(r.c_tau(), Some(&rat(1)));
    }

    #[test]
    fn rational_search_order() {
        let rs = small_rationals(2);
        assert_eq!(rs[0], rat(1));
        assert_eq!(rs[1], rat(-1));
        assert_eq!(rs.len(), 6);
    }
}
