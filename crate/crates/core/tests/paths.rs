use std::f64::consts::PI;

use levyfac_core::exponent::{brownian, brownian_killed, spectrally_positive, CharExponent};
use levyfac_core::laws::{arcsine_law, dufresne_law};
use levyfac_core::paths::*;
use levyfac_core::rng::{chunk_rng, sample_serial, ChunkedSampler};
use levyfac_core::stats::ks_one_sample;
use levyfac_core::{cx, Error};
use rand_chacha::ChaCha8Rng;

fn deterministic_drift(a: f64) -> CharExponent {
    CharExponent::quadruplet(0.0, a, 0.0, None).unwrap()
}

#[test]
fn killed_zero_process_is_exponential() {
    // ξ ≡ 0 killed at rate q: I = e_q exactly.
    let q = 2.0;
    let psi = brownian_killed(0.0, 0.0, q).unwrap();
    let f = exp_functional(&psi, 1e-2, PathConfig { dt: 0.05, ..PathConfig::default() }).unwrap();
    let b = sample_serial(&f, 20_000, 1).unwrap();
    assert_eq!(b.flagged, 0);
    let ks = ks_one_sample(&b.values, |x| 1.0 - (-q * x).exp()).unwrap();
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn trapezoid_error_is_second_order() {
    // ξ_t = -t gives I = 1; the trapezoid rule overshoots by about dt²/12.
    let psi = deterministic_drift(-1.0);
    let err = |dt: f64| {
        let cfg = PathConfig { dt, stop_epsilon: 1e-12, ..PathConfig::default() };
        let f = exp_functional(&psi, 1e-2, cfg).unwrap();
        let (i, flagged) = f.path(&mut chunk_rng(0, 0));
        assert!(!flagged);
        i - 1.0
    };
    let (e1, e2) = (err(2e-2), err(1e-2));
    assert!((e1 - 4e-4 / 12.0).abs() < 1e-7, "{e1:e}");
    assert!((e1 / e2 - 4.0).abs() < 0.01, "{e1:e} {e2:e}");
}

#[test]
fn stop_rule_truncation() {
    let psi = deterministic_drift(-0.5);
    let cfg = PathConfig { dt: 1e-3, stop_epsilon: 1e-3, ..PathConfig::default() };
    let f = exp_functional(&psi, 1e-2, cfg).unwrap();
    let (i, _) = f.path(&mut chunk_rng(0, 0));
    // Stops once e^{ξ} < ε |Ψ'(0)| I, so the missing mass is ε I.
    assert!((i * (1.0 + 1e-3) - 2.0).abs() < 2e-5, "{i}");
}

#[test]
fn step_limit_is_flagged() {
    let psi = deterministic_drift(-1e-3);
    let cfg = PathConfig { max_steps: 10, ..PathConfig::default() };
    let f = exp_functional(&psi, 1e-2, cfg).unwrap();
    let b = sample_serial(&f, 200, 0).unwrap();
    assert_eq!(b.flagged, 200);
    assert!(matches!(check_exhaustion(b.flagged, 200), Err(Error::StepLimit { .. })));
    assert!(check_exhaustion(1, 200).is_ok());
    assert!(check_exhaustion(3, 200).is_err());
}

#[test]
fn requires_membership_in_n() {
    let up = brownian(0.1, 1.0).unwrap();
    assert!(matches!(exp_functional(&up, 1e-2, PathConfig::default()), Err(Error::NotInN(_))));
    let cfg = PathConfig { kill_rate: 0.5, ..PathConfig::default() };
    assert!(exp_functional(&up, 1e-2, cfg).is_ok());
    let bad = PathConfig { dt: 0.0, ..PathConfig::default() };
    assert!(exp_functional(&brownian(-0.1, 1.0).unwrap(), 1e-2, bad).is_err());
}

#[test]
fn brownian_paths_match_dufresne() {
    let (a, sigma) = (-0.25, 1.0);
    let psi = brownian(a, sigma).unwrap();
    let f = exp_functional(&psi, 1e-2, PathConfig::default()).unwrap();
    let b = sample_serial(&f, 4_000, 7).unwrap();
    assert_eq!(b.flagged, 0);
    let law = dufresne_law(a, sigma).unwrap();
    let ks = ks_one_sample(&b.values, |x| law.cdf(x).unwrap()).unwrap();
    assert!(ks.p_value > 0.001, "{ks:?}");
    assert_eq!(dufresne_oracle(a, sigma).unwrap(), law);
}

#[test]
fn compound_poisson_matches_laplace_exponent() {
    // E[e^{θX_τ}] = e^{τΨ(θ)} for the spectrally positive exponent, θ < 0.
    let alpha = 0.6;
    let psi = spectrally_positive(alpha).unwrap();
    let s = make_sampler(&psi, 1e-3).unwrap();
    assert!(matches!(s, IncrementSampler::CompoundPoisson { .. }));
    let (theta, tau) = (-1.0, 0.5);
    let n = 100_000;
    let mut rng = chunk_rng(3, 0);
    let v: Vec<f64> = (0..n).map(|_| (theta * s.increment(&mut rng, tau)).exp()).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want = (tau * psi.eval(cx(theta, 0.0)).unwrap().re).exp();
    assert!((mean - want).abs() < 4.0 * (var / n as f64).sqrt() + 1e-3, "{mean} vs {want}");
}

#[test]
fn sampler_rejects_bad_cutoff() {
    let psi = spectrally_positive(0.6).unwrap();
    assert!(make_sampler(&psi, 0.0).is_err());
    assert!(make_sampler(&psi, 1.5).is_err());
    let b = make_sampler(&brownian(-0.3, 0.5).unwrap(), 0.0).unwrap();
    assert!(matches!(b, IncrementSampler::BrownianDrift { .. }));
}

#[test]
fn stable_positivity_parameter() {
    for &(alpha, rho) in &[(0.5, 0.3), (1.0, 0.5), (1.0, 0.7), (1.5, 0.4), (1.5, 0.6), (0.8, 0.9)] {
        let mut rng = chunk_rng(11, 0);
        let n = 100_000;
        let pos = (0..n).filter(|_| stable_standard(alpha, rho, &mut rng) > 0.0).count() as f64 / n as f64;
        let se = (rho * (1.0 - rho) / n as f64).sqrt();
        assert!((pos - rho).abs() < 4.0 * se, "({alpha},{rho}): {pos}");
    }
}

#[test]
fn symmetric_cauchy_increments() {
    let s = IncrementSampler::stable(1.0, 0.5).unwrap();
    let mut rng = chunk_rng(12, 0);
    let x: Vec<f64> = (0..50_000).map(|_| s.increment(&mut rng, 2.0)).collect();
    // X_2 =d 2 C.
    let ks = ks_one_sample(&x, |t| 0.5 + (t / 2.0).atan() / PI).unwrap();
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn attainable_positivity() {
    assert!(check_attainable(1.5, 0.5).is_ok());
    assert!(matches!(check_attainable(1.5, 0.2), Err(Error::UnattainableRho { .. })));
    assert!(check_attainable(0.5, 0.95).is_ok());
    assert!(check_attainable(2.0, 0.5).is_err());
    assert!(stable_supremum(1.5, 0.8, 16, false).is_err());
    assert!(stable_supremum(1.0, 0.5, 15, true).is_err());
}

fn arcsine_ratio(alpha: f64, m: &[f64], h: &[f64]) -> Vec<f64> {
    m.iter().zip(h).map(|(a, b)| a.powf(alpha) / (a.powf(alpha) + b.powf(alpha))).collect()
}

#[test]
fn supremum_ratio_is_arcsine_on_coarse_grid() {
    let (alpha, rho) = (0.7, 0.4);
    let m = sample_serial(&stable_supremum(alpha, rho, 1024, false).unwrap(), 4_000, 21).unwrap();
    let h = sample_serial(&stable_supremum(alpha, 1.0 - rho, 1024, false).unwrap(), 4_000, 22).unwrap();
    let r = arcsine_ratio(alpha, &m.values, &h.values);
    let a = arcsine_law(rho).unwrap();
    let ks = ks_one_sample(&r, |t| a.cdf(t).unwrap()).unwrap();
    assert!(ks.statistic < 0.05, "{ks:?}");
    // Every path here has a positive maximum with overwhelming probability.
    assert!(m.values.iter().all(|&v| v >= 0.0));
}

#[test]
fn coupled_supremum_pairs() {
    let s = stable_supremum(1.0, 0.5, 64, true).unwrap();
    let b = sample_serial(&s, 2_000, 5).unwrap();
    for pair in b.values.chunks(2) {
        // The coarse grid is a subset of the fine one.
        assert!(pair[1] <= pair[0] + 1e-12);
    }
}

#[test]
fn streams_are_deterministic() {
    let psi = brownian(-0.5, 1.0).unwrap();
    let f = exp_functional(&psi, 1e-2, PathConfig { dt: 1e-2, ..PathConfig::default() }).unwrap();
    let a = sample_serial(&f, 300, 9).unwrap();
    let b = sample_serial(&f, 300, 9).unwrap();
    assert_eq!(a, b);
    // A chunk depends only on (seed, chunk index).
    let mut rng: ChaCha8Rng = chunk_rng(9, 2);
    let mut out = vec![0.0; f.chunk_len()];
    f.fill(&mut rng, &mut out).unwrap();
    assert_eq!(&out[..], &a.values[128..192]);
}
