//! Berezinian sections `ξ·c` in a coordinate chart, the graded Lie
//! derivative, and the Berezinian divergence.
//!
//! The Lie derivative is assembled from three rules only:
//!
//! 1. `L_X(ξ·a) = L_X(ξ)·a + (−1)^{|X||ξ|} ξ·X(a)`
//! 2. `L_{a·X}(ξ) = (−1)^{|X||ξ|} L_X(ξ·a)`
//! 3. `L_{∂_α}(ξ) = 0` for coordinate derivations.
//!
//! The generator parity `|ξ|` is a parameter of each section. It defaults to
//! even: with `|ξ|` odd the three rules stop agreeing with the closed
//! divergence formula for odd fields (see the tests).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sgeometry::Supermetric;
use crate::superalg::{Coord, GradedDerivation, GradedExpr, Parity, SuperChart};
use crate::symscalar::{Atom, FuncAtom, ScalarExpr, SymbolKind};

/// Name of the formal density atom `|G|`.
pub const DENSITY_ATOM: &str = "rho";

/// Even, invertible density depending on base coordinates only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    rho: ScalarExpr,
    inv: ScalarExpr,
}

impl Density {
    /// The formal atom `ρ` with formal partials.
    pub fn atom() -> Self {
        let rho = ScalarExpr::atom(FuncAtom::plain(DENSITY_ATOM));
        let inv = rho.inverse().expect("atoms are invertible");
        Self { rho, inv }
    }

    pub fn one() -> Self {
        Self {
            rho: ScalarExpr::one(),
            inv: ScalarExpr::one(),
        }
    }

    /// A user-supplied density. It must be a single term (so that `1/ρ`
    /// stays polynomial in atoms) and mention no jet symbols.
    pub fn from_expr(rho: ScalarExpr) -> Result<Self> {
        for a in rho.atoms() {
            if let Atom::Sym(s) = a {
                if s.kind() != SymbolKind::Coordinate {
                    return Err(Error::Unsupported(format!("density depends on `{}`", s.name())));
                }
            }
        }
        let inv = rho
            .inverse()
            .ok_or_else(|| Error::NotInvertible(format!("density `{rho}`")))?;
        Ok(Self { rho, inv })
    }

    pub fn expr(&self) -> &ScalarExpr {
        &self.rho
    }

    pub fn inverse(&self) -> &ScalarExpr {
        &self.inv
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rho.fmt(f)
    }
}

/// `ξ·coeff` where `ξ` is the coordinate generator of the Berezinian sheaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BerezinSection {
    coeff: GradedExpr,
    xi: Parity,
}

impl BerezinSection {
    pub fn new(coeff: GradedExpr) -> Self {
        Self { coeff, xi: Parity::Even }
    }

    /// `ξ` itself.
    pub fn generator(chart: &Arc<SuperChart>) -> Self {
        Self::new(GradedExpr::one(chart))
    }

    pub fn with_generator_parity(mut self, xi: Parity) -> Self {
        self.xi = xi;
        self
    }

    /// `n mod 2`, the parity of `n` odd derivative factors in `ξ`.
    pub fn odd_count_parity(chart: &SuperChart) -> Parity {
        Parity::from_bit(chart.dim().1)
    }

    pub fn chart(&self) -> &Arc<SuperChart> {
        self.coeff.chart()
    }

    pub fn coeff(&self) -> &GradedExpr {
        &self.coeff
    }

    pub fn generator_parity(&self) -> Parity {
        self.xi
    }

    /// Right action `(ξ·c)·a = ξ·(c a)`.
    pub fn scale_right(&self, a: &GradedExpr) -> Result<Self> {
        Ok(Self {
            coeff: self.coeff.gmul(a)?,
            xi: self.xi,
        })
    }

    pub fn add(&self, other: &BerezinSection) -> Result<Self> {
        if self.xi != other.xi {
            return Err(Error::Parity("Berezinian sections with different generator parity".into()));
        }
        Ok(Self {
            coeff: self.coeff.try_add(&other.coeff)?,
            xi: self.xi,
        })
    }
}

impl fmt::Display for BerezinSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi*({})", self.coeff)
    }
}

// Rule 3.
fn lie_coordinate_on_generator(chart: &Arc<SuperChart>, xi: Parity) -> BerezinSection {
    BerezinSection::new(GradedExpr::zero(chart)).with_generator_parity(xi)
}

// Rule 1 for a coordinate derivation.
fn lie_coordinate(c: Coord, s: &BerezinSection) -> Result<BerezinSection> {
    let chart = s.chart();
    let head = lie_coordinate_on_generator(chart, s.xi).scale_right(&s.coeff)?;
    let tail = s
        .coeff
        .partial(c)?
        .scale_int(Parity::koszul(c.parity(), s.xi));
    head.add(&BerezinSection::new(tail).with_generator_parity(s.xi))
}

// Rule 2 for `a·∂_α` acting on `ξ`.
fn lie_scaled_on_generator(a: &GradedExpr, c: Coord, xi: Parity) -> Result<BerezinSection> {
    let s = BerezinSection::new(a.clone()).with_generator_parity(xi);
    let inner = lie_coordinate(c, &s)?;
    Ok(BerezinSection::new(inner.coeff.scale_int(Parity::koszul(c.parity(), xi))).with_generator_parity(xi))
}

fn lie_homogeneous(x: &GradedDerivation, xp: Parity, s: &BerezinSection) -> Result<BerezinSection> {
    let chart = s.chart();
    let mut on_gen = lie_coordinate_on_generator(chart, s.xi);
    for (c, a) in x.components() {
        if !a.is_zero() {
            on_gen = on_gen.add(&lie_scaled_on_generator(a, c, s.xi)?)?;
        }
    }
    let tail = x.apply(&s.coeff)?.scale_int(Parity::koszul(xp, s.xi));
    on_gen
        .scale_right(&s.coeff)?
        .add(&BerezinSection::new(tail).with_generator_parity(s.xi))
}

/// `L_X(s)`, linear over the homogeneous parts of `X`.
pub fn lie_berezin(x: &GradedDerivation, s: &BerezinSection) -> Result<BerezinSection> {
    if !SuperChart::same(x.chart(), s.chart()) {
        return Err(Error::ChartMismatch);
    }
    let mut out = BerezinSection::new(GradedExpr::zero(s.chart())).with_generator_parity(s.xi);
    for (p, part) in x.homogeneous_parts() {
        out = out.add(&lie_homogeneous(&part, p, s)?)?;
    }
    Ok(out)
}

/// The `d` with `L_X(vol) = (−1)^{|X||ξ|} vol·d`, summed over homogeneous
/// parts of `X`.
pub fn divergence(x: &GradedDerivation, vol: &BerezinSection) -> Result<GradedExpr> {
    let inv = linalg::invert(vol.coeff())
        .ok_or_else(|| Error::NotInvertible(format!("volume coefficient `{}`", vol.coeff())))?;
    let mut out = GradedExpr::zero(vol.chart());
    for (p, part) in x.homogeneous_parts() {
        let l = lie_homogeneous(&part, p, vol)?;
        let d = inv.gmul(&l.coeff)?.scale_int(Parity::koszul(p, vol.xi));
        out = out.try_add(&d)?;
    }
    Ok(out)
}

/// `(−1)^{|X||ξ|} (1/ρ) Σ_α ∂_α(ρ X^α)` with `ξ` even.
pub fn divergence_closed(x: &GradedDerivation, rho: &Density) -> Result<GradedExpr> {
    divergence_closed_with(x, rho, Parity::Even)
}

pub fn divergence_closed_with(x: &GradedDerivation, rho: &Density, xi: Parity) -> Result<GradedExpr> {
    let chart = x.chart();
    let mut out = GradedExpr::zero(chart);
    for (p, part) in x.homogeneous_parts() {
        let mut sum = GradedExpr::zero(chart);
        for (c, a) in part.components() {
            if !a.is_zero() {
                sum = &sum + &a.mul_scalar(rho.expr()).partial(c)?;
            }
        }
        out = &out + &sum.mul_scalar(rho.inverse()).scale_int(Parity::koszul(p, xi));
    }
    Ok(out)
}

/// `ξ_G = ξ·ρ` for an odd metric.
pub fn riemannian_volume(g: &Supermetric, rho: &Density) -> Result<BerezinSection> {
    if !g.parity().is_odd() {
        return Err(Error::Unsupported("Riemannian volume of an even metric".into()));
    }
    Ok(BerezinSection::new(GradedExpr::scalar(g.chart(), rho.expr().clone())))
}
