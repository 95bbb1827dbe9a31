mod common;

use proptest::prelude::*;
use superharm_cli::parse::{parse_ast, parse_expr};
use superharm_cli::report::{expr_from_terms, terms_of, Report};
use superharm_cli::session::{run, Command, OutputFormat, SessionConfig};
use superharm_core::random::case_rng;
use superharm_core::superalg::SuperChart;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn printed_expressions_parse_back(seed in any::<u64>(), n in 1usize..=2) {
        let chart = SuperChart::standard(n, n);
        let e = common::expression(&mut case_rng(seed, 0), &chart);
        let text = e.to_string();
        let back = parse_expr(&text, &chart).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn json_terms_parse_back(seed in any::<u64>()) {
        let chart = SuperChart::standard(2, 2);
        let e = common::expression(&mut case_rng(seed, 1), &chart);
        let json = serde_json::to_string(&terms_of(&e)).unwrap();
        let terms: Vec<_> = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(expr_from_terms(&terms, &chart).unwrap(), e);
    }

    #[test]
    fn garbage_never_panics(src in "[a-z0-9 ()\\[\\],+*/^-]{0,24}") {
        let chart = SuperChart::standard(2, 2);
        let _ = parse_ast(&src);
        let _ = parse_expr(&src, &chart);
    }
}

#[test]
fn json_report_round_trips() {
    let cfg = SessionConfig {
        dim: Some((2, 2)),
        output: OutputFormat::Json,
        ..SessionConfig::default()
    };
    for cmd in [
        Command::Laplacian("x1*th1*th2 + g^[1,2]*th2".into()),
        Command::VerifyTheorem,
        Command::Grad("rho*th1".into()),
    ] {
        let out = run(&cfg, &cmd);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let report: Report = serde_json::from_str(&out.stdout).unwrap();
        let again: Report = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(report, again);
        assert_eq!(report.command, cmd.name());
        assert_eq!(report.dim, [2, 2]);
    }
}

#[test]
fn laplacian_json_matches_text() {
    let chart = SuperChart::standard(2, 2);
    let base = SessionConfig {
        dim: Some((2, 2)),
        ..SessionConfig::default()
    };
    let cmd = Command::Laplacian("x2*th1 + th1*th2".into());
    let text = run(&base, &cmd);
    let json = run(
        &SessionConfig {
            output: OutputFormat::Json,
            ..base
        },
        &cmd,
    );
    let report: Report = serde_json::from_str(&json.stdout).unwrap();
    let from_json = expr_from_terms(&report.result_terms, &chart).unwrap();
    let from_text = parse_expr(text.stdout.trim(), &chart).unwrap();
    assert_eq!(from_json, from_text);
}
