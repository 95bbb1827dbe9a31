use std::sync::Arc;

use rand::Rng;
use superharm_core::berezin::{lie_berezin, BerezinSection, Density};
use superharm_core::checks::{divergence_consistency, gradient_consistency};
use superharm_core::exec::Exec;
use superharm_core::harmonic::{verify_theorem_for, Verdict};
use superharm_core::jets::{Field, JetChart};
use superharm_core::random::{case_rng, derivation, graded, parity, unimodular_metric};
use superharm_core::sgeometry::{MetricMode, Supermetric};
use superharm_core::superalg::{Coord, GradedExpr, Parity, SuperChart};
use superharm_core::variational::{euler_lagrange, restrict_to_section, total_derivative, SectionSubstitution};
use superharm_core::Error;

/// Random first-order jet expression: base coefficient times up to two jet
/// variables of order 0 or 1.
fn first_order<R: Rng>(rng: &mut R, jets: &JetChart) -> GradedExpr {
    let base = jets.base();
    let mut out = GradedExpr::zero(jets.chart());
    for _ in 0..rng.random_range(1..=3) {
        let mut term = jets.embed(&graded(rng, base, None)).unwrap();
        for _ in 0..rng.random_range(0..=2) {
            let field = if rng.random_bool(0.5) { Field::T } else { Field::Tau };
            let index: Vec<Coord> = if rng.random_bool(0.7) {
                vec![base.coord_at(rng.random_range(0..base.coord_count()))]
            } else {
                vec![]
            };
            term = &term * &jets.jet(field, &index).unwrap();
        }
        out = &out + &term;
    }
    out
}

fn random_section<R: Rng>(rng: &mut R, base: &Arc<SuperChart>) -> SectionSubstitution {
    SectionSubstitution::new(graded(rng, base, Some(Parity::Even)), graded(rng, base, Some(Parity::Odd))).unwrap()
}

#[test]
fn restriction_intertwines_total_derivatives() {
    for n in [1, 2] {
        let base = SuperChart::standard(n, n);
        let jets = JetChart::new(&base).unwrap();
        for case in 0..60 {
            let mut rng = case_rng(11, case);
            let f = first_order(&mut rng, &jets);
            let s = random_section(&mut rng, &base);
            let restricted = restrict_to_section(&jets, &f, &s).unwrap();
            for alpha in base.coords() {
                let lhs = restrict_to_section(&jets, &total_derivative(&jets, &f, alpha).unwrap(), &s).unwrap();
                let rhs = restricted.partial(alpha).unwrap();
                assert_eq!(lhs, rhs, "F = {f}, alpha = {}", base.coord_name(alpha));
            }
        }
    }
}

#[test]
fn euler_lagrange_is_linear() {
    let base = SuperChart::standard(2, 2);
    let jets = JetChart::new(&base).unwrap();
    for case in 0..40 {
        let mut rng = case_rng(12, case);
        let a = first_order(&mut rng, &jets);
        let b = first_order(&mut rng, &jets);
        let (at, atau) = euler_lagrange(&jets, &a).unwrap();
        let (bt, btau) = euler_lagrange(&jets, &b).unwrap();
        let (st, stau) = euler_lagrange(&jets, &(&a + &b)).unwrap();
        assert_eq!(st, &at + &bt);
        assert_eq!(stau, &atau + &btau);
        // constants pass through
        let three = GradedExpr::int(jets.chart(), 3);
        let (ct, _) = euler_lagrange(&jets, &(&three * &a)).unwrap();
        assert_eq!(ct, &three * &at);
    }
}

#[test]
fn null_lagrangian_along_even_directions() {
    let base = SuperChart::standard(1, 1);
    let jets = JetChart::new(&base).unwrap();
    let x = base.lookup("x1").unwrap();
    for case in 0..30 {
        let mut rng = case_rng(13, case);
        let t = jets.jet(Field::T, &[]).unwrap();
        let c = jets.embed(&graded(&mut rng, &base, Some(Parity::Even))).unwrap();
        let f = &c * &(&t * &t);
        let lambda = total_derivative(&jets, &f, x).unwrap();
        let (et, etau) = euler_lagrange(&jets, &lambda).unwrap();
        assert!(et.is_zero(), "E_t = {et} for d_x({f})");
        assert!(etau.is_zero());
    }
}

#[test]
fn null_lagrangian_along_odd_directions() {
    let base = SuperChart::standard(1, 1);
    let jets = JetChart::new(&base).unwrap();
    let th = base.lookup("th1").unwrap();
    for case in 0..30 {
        let mut rng = case_rng(16, case);
        let t = jets.jet(Field::T, &[]).unwrap();
        let tau = jets.jet(Field::Tau, &[]).unwrap();
        let c = jets.embed(&graded(&mut rng, &base, None)).unwrap();
        let f = &c * &(&t * &tau);
        let lambda = total_derivative(&jets, &f, th).unwrap();
        let (et, etau) = euler_lagrange(&jets, &lambda).unwrap();
        assert!(et.is_zero() && etau.is_zero(), "E = ({et}, {etau}) for d_th({f})");
    }
}

#[test]
fn second_order_total_derivative_is_rejected() {
    let base = SuperChart::standard(1, 1);
    let jets = JetChart::new(&base).unwrap();
    let x = base.lookup("x1").unwrap();
    let e = jets.jet(Field::T, &[x, x]).unwrap();
    assert!(matches!(total_derivative(&jets, &e, x), Err(Error::JetOrder(_))));
}

#[test]
fn lie_derivative_is_additive() {
    let base = SuperChart::standard(2, 2);
    for case in 0..50 {
        let mut rng = case_rng(14, case);
        let p = parity(&mut rng);
        let x = derivation(&mut rng, &base, p);
        let y = derivation(&mut rng, &base, p);
        let s1 = BerezinSection::new(graded(&mut rng, &base, None));
        let s2 = BerezinSection::new(graded(&mut rng, &base, None));
        let lhs = lie_berezin(&x, &s1.add(&s2).unwrap()).unwrap();
        let rhs = lie_berezin(&x, &s1).unwrap().add(&lie_berezin(&x, &s2).unwrap()).unwrap();
        assert_eq!(lhs.coeff(), rhs.coeff());
        let lhs = lie_berezin(&x.add(&y).unwrap(), &s1).unwrap();
        let rhs = lie_berezin(&x, &s1).unwrap().add(&lie_berezin(&y, &s1).unwrap()).unwrap();
        assert_eq!(lhs.coeff(), rhs.coeff());
    }
}

#[test]
fn theorem_on_random_explicit_metrics() {
    let base = SuperChart::standard(2, 2);
    for case in 0..4 {
        let g = unimodular_metric(&mut case_rng(15, case), &base);
        let metric = Supermetric::from_g(&base, g, MetricMode::Explicit).unwrap();
        let r = verify_theorem_for(&metric, &Density::one(), Exec::Parallel).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{} / {}", r.residual_t(), r.residual_tau());
    }
}

#[test]
fn execution_modes_agree() {
    for n in [1, 2] {
        assert_eq!(
            divergence_consistency(n, 40, 3, Exec::Sequential),
            divergence_consistency(n, 40, 3, Exec::Parallel)
        );
        assert_eq!(
            gradient_consistency(n, 20, 3, Exec::Sequential),
            gradient_consistency(n, 20, 3, Exec::Parallel)
        );
    }
}
