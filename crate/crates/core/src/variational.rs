//! Total derivatives, the graded Euler–Lagrange operator, the sigma-model
//! Lagrangian and evaluation of jet expressions on sections.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{Field, JetChart, JetCoord};
use crate::sgeometry::Supermetric;
use crate::superalg::{Coord, GradedExpr, OddMonomial, Parity, ParityOf, SuperChart};
use crate::symscalar::{EvenSymbol, FuncAtom, ScalarExpr};

/// Name of the generic section's component atoms.
pub const SECTION_ATOM: &str = "f";

fn first_order(jets: &JetChart, e: &GradedExpr, what: &str) -> Result<()> {
    if !SuperChart::same(e.chart(), jets.chart()) {
        return Err(Error::ChartMismatch);
    }
    let order = jets.expr_order(e);
    if order > 1 {
        return Err(Error::JetOrder(format!("{what} contains jets of order {order}")));
    }
    Ok(())
}

fn jet_var(jets: &JetChart, field: Field, index: &[Coord]) -> Coord {
    match jets.jet_coord(field, index) {
        Ok(Some((1, c))) => c,
        _ => unreachable!("first-order jets are stored unnormalized"),
    }
}

/// `d/dx^α` on an expression of order ≤ 1:
/// `∂_α F + Σ_v d_α(v)·∂F/∂v` over jet variables `v`.
pub fn total_derivative(jets: &JetChart, e: &GradedExpr, alpha: Coord) -> Result<GradedExpr> {
    first_order(jets, e, "total derivative input")?;
    let mut out = e.partial(jets.base_coord(alpha))?;
    for field in Field::ALL {
        let mut orders: Vec<Vec<Coord>> = vec![vec![]];
        orders.extend(jets.base().coords().map(|b| vec![b]));
        for index in orders {
            let v = jet_var(jets, field, &index);
            let dv = e.partial(v)?;
            if dv.is_zero() {
                continue;
            }
            let mut longer = index.clone();
            longer.push(alpha);
            out = &out + &(&jets.jet(field, &longer)? * &dv);
        }
    }
    Ok(out)
}

/// First-order Lagrangian on a jet chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lagrangian {
    expr: GradedExpr,
}

impl Lagrangian {
    pub fn new(jets: &JetChart, expr: GradedExpr) -> Result<Self> {
        first_order(jets, &expr, "Lagrangian")?;
        Ok(Self { expr })
    }

    pub fn expr(&self) -> &GradedExpr {
        &self.expr
    }

    pub fn is_even(&self) -> bool {
        self.expr.is_zero() || self.expr.parity() == ParityOf::Homogeneous(Parity::Even)
    }

    /// `ρ·L`.
    pub fn times_density(&self, rho: &ScalarExpr) -> Self {
        Self {
            expr: self.expr.mul_scalar(rho),
        }
    }
}

/// `(E_t, E_τ)` with
/// `E_t = ∂λ/∂t − Σ_i d_i(∂λ/∂t_i) − Σ_j d_{−j}(∂λ/∂t_{−j})` and
/// `E_τ = ∂λ/∂τ − Σ_i d_i(∂λ/∂τ_i) + Σ_j d_{−j}(∂λ/∂τ_{−j})`.
pub fn euler_lagrange(jets: &JetChart, lambda: &GradedExpr) -> Result<(GradedExpr, GradedExpr)> {
    first_order(jets, lambda, "Lagrangian")?;
    let one = |field: Field| -> Result<GradedExpr> {
        let mut e = lambda.partial(jet_var(jets, field, &[]))?;
        for b in jets.base().coords() {
            let p = lambda.partial(jet_var(jets, field, &[b]))?;
            let d = total_derivative(jets, &p, b)?;
            let plus = field == Field::Tau && b.parity().is_odd();
            e = if plus { &e + &d } else { &e - &d };
        }
        Ok(e)
    };
    Ok((one(Field::T)?, one(Field::Tau)?))
}

/// `L = g^{ij}(t_{−j}τ_i + t_iτ_{−j})` for an odd metric built from `g`.
pub fn sigma_lagrangian(g: &Supermetric, jets: &JetChart) -> Result<Lagrangian> {
    if !g.parity().is_odd() || !g.has_g_form() {
        return Err(Error::Unsupported("sigma Lagrangian needs an odd metric built from g".into()));
    }
    let m = jets.base().dim().0;
    let chart = jets.chart();
    let mut l = GradedExpr::zero(chart);
    for i in 0..m {
        for j in 0..m {
            let gij = g.g_upper(i, j)?;
            if gij.is_zero() {
                continue;
            }
            let (xi, tj) = (Coord::Even(i), Coord::Odd(j));
            let pair = &(&jets.jet(Field::T, &[tj])? * &jets.jet(Field::Tau, &[xi])?)
                + &(&jets.jet(Field::T, &[xi])? * &jets.jet(Field::Tau, &[tj])?);
            l = &l + &pair.mul_scalar(&gij);
        }
    }
    Lagrangian::new(jets, l)
}

/// A section `σ` given by `φ = t∘σ` (even) and `ψ = τ∘σ` (odd).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionSubstitution {
    phi: GradedExpr,
    psi: GradedExpr,
}

impl SectionSubstitution {
    pub fn new(phi: GradedExpr, psi: GradedExpr) -> Result<Self> {
        if !SuperChart::same(phi.chart(), psi.chart()) {
            return Err(Error::ChartMismatch);
        }
        if !phi.is_zero() && phi.parity() != ParityOf::Homogeneous(Parity::Even) {
            return Err(Error::Parity("phi must be even".into()));
        }
        if !psi.is_zero() && psi.parity() != ParityOf::Homogeneous(Parity::Odd) {
            return Err(Error::Parity("psi must be odd".into()));
        }
        Ok(Self { phi, psi })
    }

    /// `f = Σ_I f_I(x) θ^I` with one atom per odd monomial, split by parity.
    pub fn generic(base: &Arc<SuperChart>) -> Self {
        let f = generic_superfunction(base);
        Self {
            phi: f.part(Parity::Even),
            psi: f.part(Parity::Odd),
        }
    }

    pub fn phi(&self) -> &GradedExpr {
        &self.phi
    }

    pub fn psi(&self) -> &GradedExpr {
        &self.psi
    }

    pub fn component(&self, field: Field) -> &GradedExpr {
        match field {
            Field::T => &self.phi,
            Field::Tau => &self.psi,
        }
    }

    /// `φ + ψ`.
    pub fn total(&self) -> GradedExpr {
        &self.phi + &self.psi
    }
}

/// Odd monomials over `n` generators in canonical order.
pub fn odd_monomials(n: usize) -> Vec<OddMonomial> {
    let mut out: Vec<OddMonomial> = (0u32..1 << n)
        .map(|mask| {
            let gens: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            OddMonomial::from_product(&gens).expect("distinct generators").1
        })
        .collect();
    out.sort();
    out
}

/// The component atom `f_I` for an odd monomial `θ^I` (1-based indices).
pub fn component_atom(m: &OddMonomial) -> FuncAtom {
    FuncAtom::new(SECTION_ATOM, vec![], m.indices().map(|j| j as u32 + 1).collect())
}

/// `Σ_I f_I(x) θ^I` with symbolic components.
pub fn generic_superfunction(base: &Arc<SuperChart>) -> GradedExpr {
    GradedExpr::from_terms(
        base,
        odd_monomials(base.dim().1)
            .into_iter()
            .map(|m| {
                let a = ScalarExpr::atom(component_atom(&m));
                (m, a)
            }),
    )
}

/// Evaluate a jet expression on a section: `u_I ↦ ∂_{I_k}⋯∂_{I_1}(u∘σ)`.
pub fn restrict_to_section(jets: &JetChart, e: &GradedExpr, s: &SectionSubstitution) -> Result<GradedExpr> {
    if !SuperChart::same(e.chart(), jets.chart()) {
        return Err(Error::ChartMismatch);
    }
    let base = jets.base();
    if !SuperChart::same(s.phi.chart(), base) {
        return Err(Error::ChartMismatch);
    }
    let chart = jets.chart();
    let mut even_map: BTreeMap<EvenSymbol, GradedExpr> = BTreeMap::new();
    let mut odd_map = Vec::with_capacity(chart.dim().1);
    for c in chart.coords() {
        let image = match jets.info(c) {
            JetCoord::Base(b) => GradedExpr::coord(base, *b),
            JetCoord::Jet { field, index } => {
                let mut v = s.component(*field).clone();
                for &a in index {
                    v = v.partial(a)?;
                }
                v
            }
        };
        match c {
            Coord::Even(i) => {
                if matches!(jets.info(c), JetCoord::Jet { .. }) {
                    even_map.insert(chart.even_symbol(i).clone(), image);
                }
            }
            Coord::Odd(_) => odd_map.push(image),
        }
    }
    e.map_coordinates(base, &even_map, &odd_map)
}
