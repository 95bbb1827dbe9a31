//! Seeded generators for randomized identity checks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::superalg::{Coord, GradedDerivation, GradedExpr, OddMonomial, Parity, SuperChart};
use crate::symscalar::{rat, Atom, FuncAtom, Monomial, ScalarExpr};
use crate::variational::odd_monomials;

/// Generator for case `case` of a batch started from `seed`.
pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ case.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// A few terms in the even coordinates and the atoms `h[1]`, `h[2]`, with
/// small integer coefficients and total degree at most 2.
pub fn scalar<R: Rng>(rng: &mut R, chart: &SuperChart) -> ScalarExpr {
    let m = chart.dim().0;
    let terms = rng.random_range(1..=3);
    let mut out = ScalarExpr::zero();
    for _ in 0..terms {
        let mut mono = Monomial::one();
        for _ in 0..rng.random_range(0..=2) {
            let pick = rng.random_range(0..m + 2);
            let atom: Atom = if pick < m {
                chart.even_symbol(pick).clone().into()
            } else {
                FuncAtom::new("h", vec![], vec![(pick - m + 1) as u32]).into()
            };
            mono = mono.shifted(&atom, 1);
        }
        let c = rng.random_range(-3..=3i64);
        out = out.add(&ScalarExpr::term(mono, rat(if c == 0 { 1 } else { c })));
    }
    out
}

/// Random superfunction; homogeneous of parity `p` when given.
pub fn graded<R: Rng>(rng: &mut R, chart: &Arc<SuperChart>, p: Option<Parity>) -> GradedExpr {
    let monos: Vec<OddMonomial> = odd_monomials(chart.dim().1)
        .into_iter()
        .filter(|m| p.is_none_or(|p| m.parity() == p))
        .collect();
    let mut out = GradedExpr::zero(chart);
    for m in monos {
        if rng.random_bool(0.6) {
            out = &out + &GradedExpr::term(chart, m, scalar(rng, chart));
        }
    }
    out
}

pub fn parity<R: Rng>(rng: &mut R) -> Parity {
    if rng.random_bool(0.5) {
        Parity::Odd
    } else {
        Parity::Even
    }
}

/// Homogeneous derivation of parity `p`: `X^α` has parity `p + |α|`.
pub fn derivation<R: Rng>(rng: &mut R, chart: &Arc<SuperChart>, p: Parity) -> GradedDerivation {
    let comps = chart
        .coords()
        .map(|c| graded(rng, chart, Some(p + c.parity())))
        .collect();
    GradedDerivation::from_components(chart, comps).expect("one component per coordinate")
}

/// Symmetric `g = L·Lᵀ` with `L` unit lower triangular and entries linear in
/// the even coordinates, so `det g = 1`.
pub fn unimodular_metric<R: Rng>(rng: &mut R, chart: &SuperChart) -> Vec<Vec<ScalarExpr>> {
    let m = chart.dim().0;
    let mut l = vec![vec![ScalarExpr::zero(); m]; m];
    for (i, row) in l.iter_mut().enumerate() {
        row[i] = ScalarExpr::one();
        for entry in row.iter_mut().take(i) {
            let mut e = ScalarExpr::int(rng.random_range(-2..=2));
            if rng.random_bool(0.5) {
                let x = chart.even_symbol(rng.random_range(0..m)).clone();
                e = e.add(&ScalarExpr::symbol(x).scale(&rat(rng.random_range(1..=2))));
            }
            *entry = e;
        }
    }
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| (0..m).fold(ScalarExpr::zero(), |acc, k| acc.add(&l[i][k].mul(&l[j][k]))))
                .collect()
        })
        .collect()
}

/// Random even or odd coordinate.
pub fn coord<R: Rng>(rng: &mut R, chart: &SuperChart) -> Coord {
    chart.coord_at(rng.random_range(0..chart.coord_count()))
}
