//! Random superfunctions exercising every atom form the parser accepts.

use std::sync::Arc;

use rand::Rng;
use superharm_core::random::graded;
use superharm_core::superalg::{GradedExpr, SuperChart};
use superharm_core::symscalar::{ratio, Atom, FuncAtom, Monomial, ScalarExpr};

fn extra_atom<R: Rng>(rng: &mut R, chart: &SuperChart) -> Atom {
    let m = chart.dim().0 as u32;
    let i = rng.random_range(1..=m);
    let j = rng.random_range(1..=m);
    let f = match rng.random_range(0..4) {
        0 => FuncAtom::symmetric_upper("g", i, j),
        1 => FuncAtom::symmetric_lower("g", i, j),
        2 => FuncAtom::plain("rho"),
        _ => FuncAtom::new("h", vec![], vec![i]),
    };
    if rng.random_bool(0.3) {
        let x = chart.even_symbol(rng.random_range(0..m as usize)).name().to_string();
        f.differentiated(&x).into()
    } else {
        f.into()
    }
}

pub fn expression<R: Rng>(rng: &mut R, chart: &Arc<SuperChart>) -> GradedExpr {
    let base = graded(rng, chart, None);
    let mut mono = Monomial::one();
    for _ in 0..rng.random_range(0..=2) {
        let a = extra_atom(rng, chart);
        mono = mono.shifted(&a, rng.random_range(-2..=2i32));
    }
    let k = ratio(rng.random_range(-5..=5i64), rng.random_range(1..=4i64));
    base.mul_scalar(&ScalarExpr::term(mono, k))
}
