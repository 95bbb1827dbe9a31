use std::io::Write;
use std::process::{Command, Output};

fn superharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superharm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn strcheck_exits_zero() {
    for d in ["1", "2"] {
        let o = superharm(&["strcheck", "--dim", d, d]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "0\n");
    }
}

#[test]
fn flat_laplacian_is_two() {
    let o = superharm(&["laplacian", "x1*th1", "--dim", "1", "1", "--metric", "flat", "--density", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "2\n");
}

#[test]
fn verify_theorem_reports_constants() {
    let o = superharm(&["verify-theorem", "--dim", "1", "1", "--mode", "opaque"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "pass\nc_t = -1\nc_tau = 1\n");
}

#[test]
fn input_errors_exit_two() {
    let o = superharm(&["grad", "x1 * (th1", "--dim", "1", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 1, column 6"), "{err}");
    assert_eq!(superharm(&["grad", "y7", "--dim", "1", "1"]).status.code(), Some(2));
    assert_eq!(superharm(&["laplacian", "th1^2"]).status.code(), Some(2));
    assert_eq!(superharm(&["strcheck", "--dim", "2", "1"]).status.code(), Some(2));
    assert_eq!(superharm(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn metric_file() {
    let path = std::env::temp_dir().join(format!("superharm-metric-{}.txt", std::process::id()));
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# explicit\ndim 2 2\nmetric odd from g\ng[1,1] = 1\ng[1,2] = x2\ng[2,2] = 1 + x2^2").unwrap();
    drop(f);
    let p = path.to_str().unwrap();
    let o = superharm(&["verify-theorem", "--metric", p, "--density", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = superharm(&["grad", "x1*th2", "--metric", p, "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"passed\": true"));
    assert_eq!(superharm(&["strcheck", "--metric", p, "--mode", "opaque"]).status.code(), Some(2));
    std::fs::remove_file(path).unwrap();
}
