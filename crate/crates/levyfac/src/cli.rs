//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 fail or inconclusive verdict, 2 bad input, 3
//! simulation failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use levyfac_core::exponent::{self, classify, dual, find_rho, tilt, CharExponent};
use levyfac_core::mellin::{self, invert_to_density, recurrence_grid, MellinFunction};
use levyfac_core::{cx, Complex};
use serde_json::json;

use crate::cache::{Cache, CACHE_ENV};
use crate::config::{parse_method, ExperimentConfig};
use crate::harness::{self, CheckConfig, Context, Exponent, IDENTITIES};
use crate::parallel::default_workers;
use crate::report::{reports_csv, IdentityReport, Verdict};
use crate::spec::Spec;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;

/// Largest recurrence residual accepted by `mellin verify-recurrence`.
pub const RECURRENCE_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "levyfac", version, about = "Check arc-sine and Pareto factorizations of exponential functionals of Lévy processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an identity check and write JSON and CSV reports.
    Verify(VerifyArgs),
    /// Evaluate, tilt or classify a Lévy–Khintchine exponent.
    #[command(subcommand)]
    Exponent(ExponentCmd),
    /// Evaluate, invert or check registered Mellin transforms.
    #[command(subcommand)]
    Mellin(MellinCmd),
    /// Inspect or clear the sample cache.
    #[command(subcommand)]
    Cache(CacheCmd),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of main-theorem, doney, self-reciprocal, cor-s2, mellin-product,
    /// frechet, pareto-gamma, arcsine-link.
    #[arg(long)]
    pub identity: Option<String>,
    /// Exponent spec, e.g. `brownian:a=-0.25,sigma=1`.
    #[arg(long)]
    pub exponent: Option<String>,
    /// paths, oracle or direct.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// First Pareto shape (pareto-gamma).
    #[arg(long)]
    pub a: Option<f64>,
    /// Second Pareto shape (pareto-gamma).
    #[arg(long)]
    pub b: Option<f64>,
    /// Grid steps of the supremum check.
    #[arg(long)]
    pub nsteps: Option<u64>,
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML experiment manifest; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for JSON and CSV reports.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Print the JSON reports to stdout.
    #[arg(long)]
    pub json: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also run the five-seed median gate.
    #[arg(long)]
    pub gate: bool,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub stop_epsilon: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Small-jump cutoff of the compound Poisson approximation.
    #[arg(long, alias = "epsilon")]
    pub jump_epsilon: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ExponentCmd {
    /// Print the quadruplet, root and values on a real grid.
    Inspect {
        spec: String,
        /// `a:b:n` grid of real arguments.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Apply `T_β`, optionally followed by the dual.
    Tilt {
        spec: String,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        dual: bool,
        #[arg(long)]
        json: bool,
    },
    /// Membership in the classes `N`, `N_β` and `N_β(ρ)`.
    Classify {
        spec: String,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum MellinCmd {
    /// Value at a complex point, e.g. `--z 1.25` or `--z 0.5+2i`.
    Eval {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        json: bool,
    },
    /// Density by Mellin inversion as CSV `x,f(x)`.
    Invert {
        spec: String,
        /// `a:b:n` grid of positive arguments.
        #[arg(long)]
        xgrid: String,
        /// Abscissa of the inversion line; defaults to 1.
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
    },
    /// Residual of the recurrence of a registered closed form.
    VerifyRecurrence {
        #[arg(long)]
        closed_form: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheCmd {
    /// List cached batches.
    Info {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Remove cached batches.
    Clear {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(m: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_USAGE, message: m.to_string() }
}

fn simulation(m: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_SIMULATION, message: m.to_string() }
}

impl From<harness::HarnessError> for Failure {
    fn from(e: harness::HarnessError) -> Self {
        Failure { code: e.exit_code(), message: e.to_string() }
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let out = std::io::stdout();
    let mut out = out.lock();
    match run(cli.command, &mut out) {
        Ok(code) => code,
        Err(f) => {
            let _ = out.flush();
            eprintln!("error: {}", f.message);
            if f.code == EXIT_USAGE {
                eprintln!("run with --help for usage");
            }
            f.code
        }
    }
}

pub fn run(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Verify(a) => cmd_verify(a, out),
        Command::Exponent(c) => cmd_exponent(c, out),
        Command::Mellin(c) => cmd_mellin(c, out),
        Command::Cache(c) => cmd_cache(c, out),
    }
}

fn io(e: std::io::Error) -> Failure {
    simulation(format!("output: {e}"))
}

// ---------------------------------------------------------------------------
// verify

fn jobs_from(a: &VerifyArgs) -> Result<(Vec<CheckConfig>, ExperimentConfig), Failure> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p).map_err(usage)?,
        None => ExperimentConfig::default(),
    };
    if a.config.is_none() && a.identity.is_none() {
        return Err(usage(format!("verify needs --identity (one of {}) or --config", IDENTITIES.join(", "))));
    }
    if a.identity.is_some() {
        cfg.identity = a.identity.clone();
        for r in &mut cfg.runs {
            r.identity = None;
        }
    }
    if let Some(v) = a.dt {
        cfg.path.dt = Some(v);
    }
    if let Some(v) = a.stop_epsilon {
        cfg.path.stop_epsilon = Some(v);
    }
    if let Some(v) = a.max_steps {
        cfg.path.max_steps = Some(v);
    }
    if let Some(v) = a.jump_epsilon {
        cfg.path.jump_epsilon = Some(v);
    }
    let mut jobs = cfg.jobs().map_err(usage)?;
    let exponent = match &a.exponent {
        Some(s) => {
            let spec = Spec::parse(s).map_err(usage)?;
            Some(Exponent { psi: spec.exponent().map_err(usage)?, key: spec.canonical() })
        }
        None => None,
    };
    let method = a.method.as_deref().map(parse_method).transpose().map_err(usage)?;
    for j in &mut jobs {
        if let Some(id) = &a.identity {
            if !IDENTITIES.contains(&id.as_str()) {
                return Err(usage(format!("unknown identity `{id}`; expected one of {}", IDENTITIES.join(", "))));
            }
            j.identity = id.clone();
        }
        if exponent.is_some() {
            j.exponent = exponent.clone();
        }
        if let Some(m) = method {
            j.method = m;
        }
        j.alpha = a.alpha.or(j.alpha);
        j.rho = a.rho.or(j.rho);
        j.a = a.a.or(j.a);
        j.b = a.b.or(j.b);
        if let Some(v) = a.nsteps {
            j.n_steps = v;
        }
        if let Some(v) = a.n {
            j.n = v;
        }
        if let Some(v) = a.seed {
            j.seed = v;
        }
        j.gate |= a.gate;
    }
    Ok((jobs, cfg))
}

fn report_name(r: &IdentityReport, k: usize, total: usize) -> String {
    if total == 1 {
        format!("{}.json", r.identity_name)
    } else {
        format!("{}-{k:03}.json", r.identity_name)
    }
}

fn write_reports(dir: &Path, reports: &[IdentityReport]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(io)?;
    for (k, r) in reports.iter().enumerate() {
        std::fs::write(dir.join(report_name(r, k, reports.len())), r.to_canonical_json()).map_err(io)?;
    }
    let csv = reports_csv(reports).map_err(simulation)?;
    std::fs::write(dir.join("reports.csv"), csv).map_err(io)?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (jobs, cfg) = jobs_from(&a)?;
    let workers = a.workers.or(cfg.workers).unwrap_or_else(default_workers).max(1);
    let ctx = Context { workers, cache: Cache::from_env() };
    let mut reports = Vec::with_capacity(jobs.len());
    for job in &jobs {
        let r = harness::run(job, &ctx)?;
        writeln!(out, "{}", r.summary_line()).map_err(io)?;
        if a.json || cfg.output.json {
            write!(out, "{}", r.to_canonical_json()).map_err(io)?;
        }
        reports.push(r);
    }
    let dir = a.out_dir.clone().or(cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("reports"));
    write_reports(&dir, &reports)?;
    let all_pass = reports.iter().all(|r| r.verdict == Verdict::Pass);
    Ok(if all_pass { EXIT_PASS } else { EXIT_FAIL })
}

// ---------------------------------------------------------------------------
// exponent

fn parse_range(s: &str) -> Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || usage(format!("grid `{s}` is not of the form a:b:n"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !(a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    Ok((a, b, n))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            a * (1.0 - t) + b * t
        })
        .collect()
}

/// `1.5`, `-2i`, `0.5+2i`, `1e-3-4.5i`.
pub fn parse_complex(s: &str) -> Option<Complex> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(body) = t.strip_suffix('i') {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (body[..k].parse().ok()?, &body[k..]),
            None => (0.0, body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            v => v.parse().ok()?,
        };
        return Some(cx(re, im));
    }
    t.parse().ok().map(|v| cx(v, 0.0))
}

fn exponent_of(spec: &str) -> Result<(Spec, CharExponent), Failure> {
    let s = Spec::parse(spec).map_err(usage)?;
    let psi = s.exponent().map_err(usage)?;
    Ok((s, psi))
}

fn strip_json(s: (f64, f64)) -> serde_json::Value {
    let f = |v: f64| if v.is_finite() { json!(v) } else { json!(if v > 0.0 { "inf" } else { "-inf" }) };
    json!([f(s.0), f(s.1)])
}

fn core_err(e: levyfac_core::Error) -> Failure {
    match e {
        levyfac_core::Error::Domain(_)
        | levyfac_core::Error::Strip { .. }
        | levyfac_core::Error::InadmissibleTilt(_)
        | levyfac_core::Error::NoClosedForm(_)
        | levyfac_core::Error::Precondition(_) => usage(e),
        _ => simulation(e),
    }
}

fn cmd_exponent(c: ExponentCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    match c {
        ExponentCmd::Inspect { spec, grid, json: as_json } => {
            let (_, psi) = exponent_of(&spec)?;
            let (lo, hi) = psi.strip;
            let (a, b, n) = match grid {
                Some(g) => parse_range(&g)?,
                None => (lo.max(-1.0) * 0.9, hi.min(2.0) * 0.9, 11),
            };
            let root = find_rho(&psi).map_err(core_err)?;
            let mut values = Vec::new();
            for u in linspace(a, b, n) {
                let v = psi.value(cx(u, 0.0)).map_err(core_err)?;
                values.push((u, v));
            }
            if as_json {
                let doc = json!({
                    "label": psi.label,
                    "killing": psi.killing,
                    "drift": psi.drift,
                    "gaussian": psi.gaussian,
                    "strip": strip_json(psi.strip),
                    "rho": if root.rho.is_finite() { json!(root.rho) } else { json!(null) },
                    "derivative_at_zero": root.derivative_at_zero_plus,
                    "values": values.iter().map(|(u, v)| json!({"u": u, "re": v.re, "im": v.im})).collect::<Vec<_>>(),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).map_err(io)?;
            } else {
                writeln!(out, "{}", psi.label).map_err(io)?;
                writeln!(out, "killing {}  drift {}  gaussian {}", psi.killing, psi.drift, psi.gaussian).map_err(io)?;
                writeln!(out, "strip ({lo}, {hi})").map_err(io)?;
                writeln!(out, "rho {}  Psi'(0+) {}", root.rho, root.derivative_at_zero_plus).map_err(io)?;
                writeln!(out, "u,re,im").map_err(io)?;
                for (u, v) in values {
                    writeln!(out, "{u},{},{}", v.re, v.im).map_err(io)?;
                }
            }
            Ok(EXIT_PASS)
        }
        ExponentCmd::Tilt { spec, beta, dual: take_dual, json: as_json } => {
            let (s, psi) = exponent_of(&spec)?;
            let mut t = tilt(&psi, beta).map_err(core_err)?;
            if take_dual {
                t = dual(&t);
            }
            let root = find_rho(&t).map_err(core_err)?;
            // dual(T₁) of a Lamperti-stable exponent is the one with 1 - ρ.
            let mut matched = None;
            if take_dual && (beta - 1.0).abs() < 1e-12 && s.name == "lamperti" {
                let (alpha, rho) = (s.get("alpha").unwrap(), s.get("rho").unwrap());
                let target = exponent::lamperti_stable(alpha, 1.0 - rho).map_err(core_err)?;
                let (lo, hi) = (t.strip.0.max(target.strip.0), t.strip.1.min(target.strip.1));
                let mut worst: f64 = 0.0;
                for re in linspace(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), 5) {
                    for im in [-1.0, 0.0, 1.0] {
                        let z = cx(re, im);
                        let (x, y) = (t.value(z).map_err(core_err)?, target.value(z).map_err(core_err)?);
                        worst = worst.max((x - y).norm() / (1.0 + y.norm()));
                    }
                }
                matched = Some((format!("lamperti:alpha={alpha},rho={}", 1.0 - rho), worst));
            }
            if as_json {
                let doc = json!({
                    "label": t.label,
                    "beta": beta,
                    "q_beta": t.killing,
                    "drift": t.drift,
                    "gaussian": t.gaussian,
                    "strip": strip_json(t.strip),
                    "rho": if root.rho.is_finite() { json!(root.rho) } else { json!(null) },
                    "match": matched.as_ref().map(|(m, d)| json!({"exponent": m, "max_deviation": d, "matches": *d <= 1e-8})),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).map_err(io)?;
            } else {
                writeln!(out, "{}", t.label).map_err(io)?;
                writeln!(out, "q_beta {}  drift {}  gaussian {}", t.killing, t.drift, t.gaussian).map_err(io)?;
                writeln!(out, "strip ({}, {})  rho {}", t.strip.0, t.strip.1, root.rho).map_err(io)?;
                if let Some((m, d)) = &matched {
                    let verdict = if *d <= 1e-8 { "matches" } else { "does not match" };
                    writeln!(out, "{verdict} {m} (max deviation {d:.2e})").map_err(io)?;
                }
            }
            Ok(EXIT_PASS)
        }
        ExponentCmd::Classify { spec, beta, json: as_json } => {
            let (_, psi) = exponent_of(&spec)?;
            let m = classify(&psi, beta).map_err(core_err)?;
            if as_json {
                let doc = json!({
                    "label": psi.label,
                    "beta": beta,
                    "in_n": m.in_n,
                    "in_n_beta": m.in_n_beta,
                    "in_n_beta_rho": m.in_n_beta_rho,
                    "rho": if m.rho.is_finite() { json!(m.rho) } else { json!(null) },
                    "derivative_at_zero": m.derivative_at_zero_plus,
                    "tail_monotone": m.tail.monotone,
                    "pole_limit": m.pole_limit,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).map_err(io)?;
            } else {
                writeln!(out, "{}", psi.label).map_err(io)?;
                writeln!(out, "N: {}  N_{beta}: {}  N_{beta}(rho): {}", m.in_n, m.in_n_beta, m.in_n_beta_rho).map_err(io)?;
                writeln!(out, "rho {}  Psi'(0+) {}  tail monotone {}  pole limit {:.3e}", m.rho, m.derivative_at_zero_plus, m.tail.monotone, m.pole_limit)
                    .map_err(io)?;
            }
            Ok(EXIT_PASS)
        }
    }
}

// ---------------------------------------------------------------------------
// mellin

fn mellin_of(spec: &str) -> Result<MellinFunction, Failure> {
    Spec::parse(spec).map_err(usage)?.mellin().map_err(usage)
}

/// Grid for recurrence residuals inside the strip (clipped to width 2).
fn strip_grid(m: &MellinFunction) -> Vec<Complex> {
    let (lo, hi) = m.strip;
    let (a, b) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo + 2.0),
        (false, true) => (hi - 2.0, hi),
        (false, false) => (-1.0, 1.0),
    };
    recurrence_grid(a, b)
}

fn cmd_mellin(c: MellinCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    match c {
        MellinCmd::Eval { spec, z, json: as_json } => {
            let m = mellin_of(&spec)?;
            let w = parse_complex(&z).ok_or_else(|| usage(format!("cannot parse complex number `{z}`")))?;
            let v = m.at(w).map_err(core_err)?;
            if as_json {
                writeln!(out, "{}", json!({"label": m.label, "z": [w.re, w.im], "re": v.re, "im": v.im})).map_err(io)?;
            } else if v.im == 0.0 {
                writeln!(out, "{}", v.re).map_err(io)?;
            } else {
                writeln!(out, "{}{:+}i", v.re, v.im).map_err(io)?;
            }
            Ok(EXIT_PASS)
        }
        MellinCmd::Invert { spec, xgrid, c } => {
            let m = mellin_of(&spec)?;
            let (a, b, n) = parse_range(&xgrid)?;
            if !(a > 0.0 && b > 0.0) {
                return Err(usage("inversion grid must be positive"));
            }
            let c = c.unwrap_or(1.0);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x", "f(x)"]).map_err(simulation)?;
            for x in linspace(a, b, n) {
                let f = invert_to_density(&m, c, x).map_err(core_err)?;
                w.write_record([format!("{x}"), format!("{f:.15e}")]).map_err(simulation)?;
            }
            out.write_all(&w.into_inner().map_err(simulation)?).map_err(io)?;
            Ok(EXIT_PASS)
        }
        MellinCmd::VerifyRecurrence { closed_form, json: as_json } => {
            let m = mellin_of(&closed_form)?;
            let grid = strip_grid(&m);
            let r = mellin::verify_generator(&m, &grid).map_err(core_err)?;
            let ok = r <= RECURRENCE_TOL;
            if as_json {
                writeln!(out, "{}", json!({"label": m.label, "residual": r, "points": grid.len(), "pass": ok})).map_err(io)?;
            } else {
                writeln!(out, "{}: residual {r:.3e} on {} points ({})", m.label, grid.len(), if ok { "pass" } else { "fail" })
                    .map_err(io)?;
            }
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

// ---------------------------------------------------------------------------
// cache

fn cache_at(dir: Option<PathBuf>) -> Result<Cache, Failure> {
    dir.map(Cache::new)
        .or_else(Cache::from_env)
        .ok_or_else(|| usage(format!("no cache directory: pass --dir or set {CACHE_ENV}")))
}

fn cmd_cache(c: CacheCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    match c {
        CacheCmd::Info { dir } => {
            let cache = cache_at(dir)?;
            let entries = cache.entries().map_err(simulation)?;
            let total: u64 = entries.iter().map(|e| e.bytes).sum();
            writeln!(out, "{}: {} batches, {} bytes", cache.dir.display(), entries.len(), total).map_err(io)?;
            for e in entries {
                let name = e.path.file_name().unwrap_or_default().to_string_lossy().into_owned();
                match e.sidecar {
                    Some(s) => writeln!(out, "{name}  n={} seed={} flagged={}  {}", s.count, s.seed, s.flagged, s.config),
                    None => writeln!(out, "{name}  (no sidecar)"),
                }
                .map_err(io)?;
            }
            Ok(EXIT_PASS)
        }
        CacheCmd::Clear { dir } => {
            let cache = cache_at(dir)?;
            let n = cache.clear().map_err(simulation)?;
            writeln!(out, "removed {n} batches from {}", cache.dir.display()).map_err(io)?;
            Ok(EXIT_PASS)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.25"), Some(cx(1.25, 0.0)));
        assert_eq!(parse_complex("0.5+2i"), Some(cx(0.5, 2.0)));
        assert_eq!(parse_complex("-1e-3-4.5i"), Some(cx(-1e-3, -4.5)));
        assert_eq!(parse_complex("-i"), Some(cx(0.0, -1.0)));
        assert_eq!(parse_complex("2e+1i"), Some(cx(0.0, 20.0)));
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.05:0.95:19").unwrap(), (0.05, 0.95, 19));
        assert!(parse_range("1:2").is_err());
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
