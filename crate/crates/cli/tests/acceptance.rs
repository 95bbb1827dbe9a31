//! Acceptance suite. One line per criterion; exits nonzero if any fails.

mod common;

use std::process::Command as Process;
use std::time::{Duration, Instant};

use superharm_cli::parse::parse_expr;
use superharm_core::berezin::Density;
use superharm_core::checks::{algebra_laws, divergence_consistency, gradient_consistency, CheckSummary};
use superharm_core::exec::Exec;
use superharm_core::harmonic::{laplacian, laplacian_four_term, verify_theorem, Verdict};
use superharm_core::jets::JetChart;
use superharm_core::random::case_rng;
use superharm_core::sgeometry::{contract_11, pullback_sigma_q, MetricMode, Supermetric};
use superharm_core::superalg::SuperChart;
use superharm_core::symscalar::ratio;
use superharm_core::variational::{generic_superfunction, sigma_lagrangian};

const DIMS: [usize; 2] = [1, 2];
const SEED: u64 = 20_240_901;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, Box<dyn Fn() -> Outcome>);

fn summaries(list: &[CheckSummary]) -> Outcome {
    let text = list.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("; ");
    if list.iter().all(CheckSummary::passed) {
        Ok(text)
    } else {
        Err(text)
    }
}

fn supertrace_vanishes() -> Outcome {
    for n in DIMS {
        let chart = SuperChart::standard(n, n);
        let g = Supermetric::opaque(&chart, true).map_err(|e| e.to_string())?;
        let jets = JetChart::new(&chart).map_err(|e| e.to_string())?;
        let inv = g.inverse_matrix(jets.chart()).map_err(|e| e.to_string())?;
        let q = pullback_sigma_q(&jets).map_err(|e| e.to_string())?;
        let s = inv.product(&q).map_err(|e| e.to_string())?.supertrace();
        if !s.is_zero() {
            return Err(format!("({n}|{n}): Str = {s}"));
        }
    }
    Ok("Str = 0 for (1|1), (2|2)".into())
}

fn contraction_identity() -> Outcome {
    for n in DIMS {
        let chart = SuperChart::standard(n, n);
        let g = Supermetric::opaque(&chart, true).map_err(|e| e.to_string())?;
        let jets = JetChart::new(&chart).map_err(|e| e.to_string())?;
        let inv = g.inverse_matrix(jets.chart()).map_err(|e| e.to_string())?;
        let q = pullback_sigma_q(&jets).map_err(|e| e.to_string())?;
        let half = contract_11(&inv, &q).map_err(|e| e.to_string())?.scale(&ratio(1, 2));
        let l = sigma_lagrangian(&g, &jets).map_err(|e| e.to_string())?;
        let diff = &half - l.expr();
        if !diff.is_zero() {
            return Err(format!("({n}|{n}): difference {diff}"));
        }
    }
    Ok("(1/2) C(G^-1 sigma*Q) = g^ij (t_-j tau_i + t_i tau_-j) for (1|1), (2|2)".into())
}

fn laplacian_routes() -> Outcome {
    for n in DIMS {
        let chart = SuperChart::standard(n, n);
        let g = Supermetric::opaque(&chart, true).map_err(|e| e.to_string())?;
        let rho = Density::atom();
        let f = generic_superfunction(&chart);
        let a = laplacian(&f, &g, &rho).map_err(|e| e.to_string())?;
        let b = laplacian_four_term(&f, &g, &rho).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("({n}|{n}): div(grad f) - four-term = {}", &a - &b));
        }
    }
    Ok("div(grad f) = four-term formula on generic f for (1|1), (2|2)".into())
}

fn theorem() -> Outcome {
    let mut found = Vec::new();
    for n in DIMS {
        let runs: Vec<_> = (0..2)
            .map(|_| verify_theorem(n, MetricMode::Opaque { inverse_rule: true }, Exec::Parallel))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let r = &runs[0];
        let consts = (r.c_t().cloned(), r.c_tau().cloned());
        if r.verdict != Verdict::Pass {
            return Err(format!("({n}|{n}): residuals {} / {}", r.residual_t(), r.residual_tau()));
        }
        if (runs[1].c_t().cloned(), runs[1].c_tau().cloned()) != consts {
            return Err(format!("({n}|{n}): constants differ between runs"));
        }
        match consts {
            (Some(t), Some(tau)) if t != ratio(0, 1) && tau != ratio(0, 1) => {
                found.push(format!("({n}|{n}) c_t = {t}, c_tau = {tau}"))
            }
            _ => return Err(format!("({n}|{n}): missing or zero constant")),
        }
    }
    Ok(found.join("; "))
}

fn flat_value() -> Outcome {
    let chart = SuperChart::standard(1, 1);
    let g = Supermetric::flat(&chart).map_err(|e| e.to_string())?;
    let f = parse_expr("x1*th1", &chart).map_err(|e| e.to_string())?;
    let two = parse_expr("2", &chart).map_err(|e| e.to_string())?;
    let a = laplacian(&f, &g, &Density::one()).map_err(|e| e.to_string())?;
    let b = laplacian_four_term(&f, &g, &Density::one()).map_err(|e| e.to_string())?;
    if a == two && b == two {
        Ok("Δ(x1 th1) = 2 by both routes".into())
    } else {
        Err(format!("div(grad) = {a}, four-term = {b}"))
    }
}

fn cli_fidelity() -> Outcome {
    let cases = 512;
    for case in 0..cases {
        let n = 1 + (case % 2) as usize;
        let chart = SuperChart::standard(n, n);
        let e = common::expression(&mut case_rng(SEED, case), &chart);
        let text = e.to_string();
        match parse_expr(&text, &chart) {
            Ok(back) if back == e => {}
            Ok(back) => return Err(format!("`{text}` parsed to `{back}`")),
            Err(err) => return Err(format!("`{text}`: {err}")),
        }
    }
    let bin = env!("CARGO_BIN_EXE_superharm");
    let exit = |args: &[&str]| Process::new(bin).args(args).output().map(|o| (o.status.code(), String::from_utf8_lossy(&o.stdout).into_owned()));
    for d in ["1", "2"] {
        let (code, out) = exit(&["strcheck", "--dim", d, d]).map_err(|e| e.to_string())?;
        if code != Some(0) || out.trim() != "0" {
            return Err(format!("strcheck ({d}|{d}): exit {code:?}, output {out:?}"));
        }
        let (code, out) = exit(&["verify-theorem", "--dim", d, d, "--mode", "opaque"]).map_err(|e| e.to_string())?;
        if code != Some(0) || !out.starts_with("pass\n") {
            return Err(format!("verify-theorem ({d}|{d}): exit {code:?}, output {out:?}"));
        }
    }
    let (code, _) = exit(&["grad", "x1 + (", "--dim", "1", "1"]).map_err(|e| e.to_string())?;
    if code != Some(2) {
        return Err(format!("malformed input exited {code:?}"));
    }
    Ok(format!("{cases} round trips; strcheck and verify-theorem exit 0 on pass"))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("supertrace vanishing", Duration::from_secs(1), Box::new(supertrace_vanishes)),
        ("contraction identity", Duration::from_secs(1), Box::new(contraction_identity)),
        (
            "divergence consistency",
            Duration::from_secs(30),
            Box::new(|| summaries(&DIMS.map(|n| divergence_consistency(n, 200, SEED, Exec::Parallel)))),
        ),
        (
            "gradient consistency",
            Duration::from_secs(30),
            Box::new(|| summaries(&DIMS.map(|n| gradient_consistency(n, 100, SEED, Exec::Parallel)))),
        ),
        ("laplacian two routes", Duration::from_secs(10), Box::new(laplacian_routes)),
        ("theorem reproduction", Duration::from_secs(30), Box::new(theorem)),
        (
            "algebra laws",
            Duration::from_secs(30),
            Box::new(|| summaries(&DIMS.iter().flat_map(|&n| algebra_laws(n, 500, SEED, Exec::Parallel)).collect::<Vec<_>>())),
        ),
        ("flat sanity value", Duration::from_secs(10), Box::new(flat_value)),
        ("cli fidelity", Duration::from_secs(60), Box::new(cli_fidelity)),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if took <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; took {took:.2?}, limit {limit:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {}: {name} [{took:.2?}] {detail}",
            if ok { "PASS" } else { "FAIL" },
            k + 1
        );
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
