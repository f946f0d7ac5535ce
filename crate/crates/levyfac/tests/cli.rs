use std::process::{Command, Output};

fn levyfac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levyfac"))
        .args(args)
        .env_remove("LEVYFAC_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_and_version() {
    let o = levyfac(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in ["verify", "exponent", "mellin", "cache"] {
        assert!(stdout(&o).contains(cmd));
    }
    let o = levyfac(&["verify", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("--identity"));
}

#[test]
fn bad_input_exits_with_2() {
    assert_eq!(levyfac(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(levyfac(&["verify"]).status.code(), Some(2));
    assert_eq!(levyfac(&["verify", "--identity", "nope"]).status.code(), Some(2));
    assert_eq!(levyfac(&["verify", "--identity", "doney", "--rho", "0.5"]).status.code(), Some(2));
    let o = levyfac(&["mellin", "eval", "pareto:rho=1.5", "--z", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(levyfac(&["mellin", "eval", "pareto:rho=0.5", "--z", "1+"]).status.code(), Some(2));
    assert_eq!(levyfac(&["exponent", "inspect", "brownian:a=1,sigma=-1"]).status.code(), Some(2));
}

#[test]
fn mellin_eval_of_half_pareto() {
    // E[P^{1/4}] = Γ(3/4)Γ(1/4)/π = √2.
    let o = levyfac(&["mellin", "eval", "pareto:rho=0.5", "--z", "1.25"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 2f64.sqrt()).abs() < 1e-13, "{v}");

    let o = levyfac(&["mellin", "eval", "pareto:rho=0.5", "--z", "1+0.5i", "--json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["im"].as_f64().unwrap().abs() < 1e-15);
}

#[test]
fn mellin_recurrence_and_inversion() {
    let o = levyfac(&["mellin", "verify-recurrence", "--closed-form", "pareto:rho=0.3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["residual"].as_f64().unwrap() <= 1e-10);

    let o = levyfac(&["mellin", "invert", "arcsine:rho=0.5", "--xgrid", "0.25:0.75:3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,f(x)"));
    for line in lines {
        let (x, f) = line.split_once(',').unwrap();
        let (x, f): (f64, f64) = (x.parse().unwrap(), f.parse().unwrap());
        let exact = 1.0 / (std::f64::consts::PI * (x * (1.0 - x)).sqrt());
        assert!((f - exact).abs() < 1e-6, "{x}: {f} vs {exact}");
    }
}

#[test]
fn exponent_commands() {
    let o = levyfac(&["exponent", "classify", "lamperti:alpha=0.8,rho=0.4", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["in_n_beta_rho"], true);
    assert!((doc["rho"].as_f64().unwrap() - 0.4).abs() < 1e-8);

    let o = levyfac(&["exponent", "tilt", "lamperti:alpha=0.8,rho=0.4", "--beta", "1", "--dual"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("matches lamperti:alpha=0.8,rho=0.6"), "{}", stdout(&o));

    let o = levyfac(&["exponent", "inspect", "brownian:a=-0.25,sigma=1", "--grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rho 0.5"), "{}", stdout(&o));
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = levyfac(&["verify", "--identity", "arcsine-link", "--rho", "0.25", "--n", "2000", "--seed", "3", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("arcsine-link"));
    let json = std::fs::read_to_string(dir.path().join("arcsine-link.json")).unwrap();
    levyfac::report::IdentityReport::from_json(&json).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("reports.csv")).unwrap();
    assert!(csv.starts_with("identity,params,test,statistic,p_value,verdict\n"));
}

#[test]
fn failing_check_exits_with_1() {
    // Eight grid steps leave a large discretization bias.
    let dir = tempfile::tempdir().unwrap();
    let o = levyfac(&[
        "verify", "--identity", "doney", "--alpha", "1", "--rho", "0.5", "--nsteps", "8", "--n", "4000", "--seed", "1",
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn config_file_with_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "identity = \"pareto-gamma\"\nn = 1000\nseed = 5\n[[runs]]\nrho = 0.3\n[[runs]]\na = 2.0\nb = 0.5\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = levyfac(&["verify", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(out.join("pareto-gamma-000.json").exists());
    assert!(out.join("pareto-gamma-001.json").exists());
    std::fs::write(&cfg, "identity = \"pareto-gamma\"\nrhoo = 0.3\n").unwrap();
    assert_eq!(levyfac(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn cache_info_and_clear() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_levyfac"))
        .args(["verify", "--identity", "main-theorem", "--rho", "0.5", "--n", "200", "--dt", "0.01", "--out-dir"])
        .arg(dir.path().join("reports"))
        .env("LEVYFAC_CACHE_DIR", d)
        .output()
        .unwrap();
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stdout(&o));
    let o = levyfac(&["cache", "info", "--dir", d]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains(" 0 batches"), "{}", stdout(&o));
    let o = levyfac(&["cache", "clear", "--dir", d]);
    assert!(stdout(&o).starts_with("removed"));
    assert!(stdout(&levyfac(&["cache", "info", "--dir", d])).contains(" 0 batches"));
    assert_eq!(levyfac(&["cache", "info"]).status.code(), Some(2));
}
