//! Randomized identity checks run in batches. Each case draws from its own
//! seeded generator, so results do not depend on the execution mode.

use std::fmt;

use crate::berezin::{divergence, divergence_closed, BerezinSection, Density};
use crate::exec::Exec;
use crate::harmonic::{gradient, gradient_from_definition};
use crate::random;
use crate::sgeometry::{MetricMode, Supermetric};
use crate::superalg::{GradedExpr, Parity, SuperChart};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckSummary {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn collect(name: impl Into<String>, results: Vec<Result<(), String>>) -> Self {
        let cases = results.len();
        let failures: Vec<String> = results.into_iter().filter_map(|r| r.err()).collect();
        Self {
            name: name.into(),
            cases,
            failures: failures.len(),
            first_failure: failures.into_iter().next(),
        }
    }
}

impl fmt::Display for CheckSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}/{} passed", self.name, self.cases - self.failures, self.cases)?;
        if let Some(e) = &self.first_failure {
            write!(f, " (first failure: {e})")?;
        }
        Ok(())
    }
}

fn run<F>(name: String, cases: usize, seed: u64, exec: Exec, case: F) -> CheckSummary
where
    F: Fn(u64) -> Result<(), String> + Sync + Send,
{
    let ids: Vec<u64> = (0..cases as u64).collect();
    CheckSummary::collect(name, exec.map(&ids, |&i| case(seed.wrapping_add(i))))
}

fn expect_eq(what: &str, a: &GradedExpr, b: &GradedExpr) -> Result<(), String> {
    if a == b {
        Ok(())
    } else {
        Err(format!("{what}: `{a}` != `{b}`"))
    }
}

/// Rules-based divergence against the closed formula, symbolic `ρ`.
pub fn divergence_consistency(n: usize, cases: usize, seed: u64, exec: Exec) -> CheckSummary {
    let chart = SuperChart::standard(n, n);
    let rho = Density::atom();
    let vol = BerezinSection::new(GradedExpr::scalar(&chart, rho.expr().clone()));
    run(format!("divergence ({n}|{n})"), cases, seed, exec, |i| {
        let mut rng = random::case_rng(seed, i);
        let p = random::parity(&mut rng);
        let x = random::derivation(&mut rng, &chart, p);
        let a = divergence(&x, &vol).map_err(|e| e.to_string())?;
        let b = divergence_closed(&x, &rho).map_err(|e| e.to_string())?;
        expect_eq(&format!("X = {x}"), &a, &b)
    })
}

/// Gradient solved from its definition against the closed form, on random
/// unimodular explicit metrics.
pub fn gradient_consistency(n: usize, cases: usize, seed: u64, exec: Exec) -> CheckSummary {
    let chart = SuperChart::standard(n, n);
    run(format!("gradient ({n}|{n})"), cases, seed, exec, |i| {
        let mut rng = random::case_rng(seed, i);
        let g = random::unimodular_metric(&mut rng, &chart);
        let g = Supermetric::from_g(&chart, g, MetricMode::Explicit).map_err(|e| e.to_string())?;
        let f = random::graded(&mut rng, &chart, None);
        let a = gradient_from_definition(&f, &g).map_err(|e| e.to_string())?;
        let b = gradient(&f, &g).map_err(|e| e.to_string())?;
        if a == b {
            Ok(())
        } else {
            Err(format!("f = {f}: `{a}` != `{b}`"))
        }
    })
}

/// `ab = (−1)^{|a||b|} ba`.
pub fn graded_commutativity(n: usize, cases: usize, seed: u64, exec: Exec) -> CheckSummary {
    let chart = SuperChart::standard(n, n);
    run(format!("graded commutativity ({n}|{n})"), cases, seed, exec, |i| {
        let mut rng = random::case_rng(seed, i);
        let (pa, pb) = (random::parity(&mut rng), random::parity(&mut rng));
        let a = random::graded(&mut rng, &chart, Some(pa));
        let b = random::graded(&mut rng, &chart, Some(pb));
        expect_eq("ab", &(&a * &b), &(&b * &a).scale_int(Parity::koszul(pa, pb)))
    })
}

/// `(ab)c = a(bc)`.
pub fn associativity(n: usize, cases: usize, seed: u64, exec: Exec) -> CheckSummary {
    let chart = SuperChart::standard(n, n);
    run(format!("associativity ({n}|{n})"), cases, seed, exec, |i| {
        let mut rng = random::case_rng(seed, i);
        let a = random::graded(&mut rng, &chart, None);
        let b = random::graded(&mut rng, &chart, None);
        let c = random::graded(&mut rng, &chart, None);
        expect_eq("(ab)c", &(&(&a * &b) * &c), &(&a * &(&b * &c)))
    })
}

/// `∂_θj ∂_θj = 0` and `∂_θi ∂_θk = −∂_θk ∂_θi`.
pub fn odd_partial_nilpotency(n: usize, cases: usize, seed: u64, exec: Exec) -> CheckSummary {
    let chart = SuperChart::standard(n, n);
    run(format!("odd partial nilpotency ({n}|{n})"), cases, seed, exec, |i| {
        let mut rng = random::case_rng(seed, i);
        let f = random::graded(&mut rng, &chart, None);
        let err = |e: crate::Error| e.to_string();
        for j in 0..n {
            let twice = f.partial_odd(j).map_err(err)?.partial_odd(j).map_err(err)?;
            expect_eq("∂θ∂θ f", &twice, &GradedExpr::zero(&chart))?;
            for k in 0..n {
                let jk = f.partial_odd(k).map_err(err)?.partial_odd(j).map_err(err)?;
                let kj = f.partial_odd(j).map_err(err)?.partial_odd(k).map_err(err)?;
                expect_eq("∂θj∂θk f", &jk, &-&kj)?;
            }
        }
        Ok(())
    })
}

/// `D(ab) = D(a)b + (−1)^{|D||a|} a D(b)`.
pub fn derivation_leibniz(n: usize, cases: usize, seed: u64, exec: Exec) -> CheckSummary {
    let chart = SuperChart::standard(n, n);
    run(format!("graded Leibniz ({n}|{n})"), cases, seed, exec, |i| {
        let mut rng = random::case_rng(seed, i);
        let pd = random::parity(&mut rng);
        let pa = random::parity(&mut rng);
        let d = random::derivation(&mut rng, &chart, pd);
        let a = random::graded(&mut rng, &chart, Some(pa));
        let b = random::graded(&mut rng, &chart, None);
        let err = |e: crate::Error| e.to_string();
        let lhs = d.apply(&(&a * &b)).map_err(err)?;
        let rhs = &(&d.apply(&a).map_err(err)? * &b)
            + &(&a * &d.apply(&b).map_err(err)?).scale_int(Parity::koszul(pd, pa));
        expect_eq("D(ab)", &lhs, &rhs)
    })
}

/// All four algebra laws on `(n|n)`.
pub fn algebra_laws(n: usize, cases: usize, seed: u64, exec: Exec) -> Vec<CheckSummary> {
    vec![
        graded_commutativity(n, cases, seed, exec),
        associativity(n, cases, seed.wrapping_add(1 << 32), exec),
        odd_partial_nilpotency(n, cases, seed.wrapping_add(2 << 32), exec),
        derivation_leibniz(n, cases, seed.wrapping_add(3 << 32), exec),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_batches_pass_in_both_modes() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            assert!(divergence_consistency(1, 10, 1, exec).passed());
            assert!(gradient_consistency(2, 10, 2, exec).passed());
            for s in algebra_laws(2, 10, 3, exec) {
                assert!(s.passed(), "{s}");
            }
        }
    }

    #[test]
    fn modes_give_identical_summaries() {
        let a = divergence_consistency(2, 8, 9, Exec::Sequential);
        let b = divergence_consistency(2, 8, 9, Exec::Parallel);
        assert_eq!(a, b);
    }
}
