use std::f64::consts::PI;

use levyfac_core::laws::*;
use levyfac_core::quad::integrate_real;
use levyfac_core::special::{gamma_real, reg_inc_beta};
use levyfac_core::stats::{ks_one_sample, ks_two_sample, mc_mellin, sigma_distance};
use levyfac_core::{cx, Error};
use proptest::prelude::*;

fn with_pdf() -> Vec<ClosedFormLaw> {
    vec![
        gamma_law(0.4).unwrap(),
        gamma_law(3.5).unwrap(),
        arcsine_law(0.2).unwrap(),
        arcsine_law(0.5).unwrap(),
        arcsine_law(0.8).unwrap(),
        pareto_law(0.7, 1.4).unwrap(),
        pareto_std(0.3).unwrap(),
        positive_stable(0.5).unwrap(),
        frechet_law(0.4).unwrap(),
        cauchy_squared(),
        dufresne_law(-0.25, 1.0).unwrap(),
    ]
}

/// `∫ weight(x) pdf(x) dx` over the support. The arc-sine law's upper half
/// is mapped to the lower half of its mirror image so that `1 - x` is never
/// formed near the singular endpoint.
fn integrate_on_support(law: &ClosedFormLaw, weight: impl Fn(f64) -> f64 + Copy) -> f64 {
    if law.name() == "arcsine" {
        let mirror = arcsine_law(1.0 - law.params()[0]).unwrap();
        let left = integrate_real(|x| weight(x) * law.pdf(x).unwrap(), 0.0, 0.5, 1e-12).unwrap();
        let right = integrate_real(|u| weight(1.0 - u) * mirror.pdf(u).unwrap(), 0.0, 0.5, 1e-12).unwrap();
        return left + right;
    }
    let f = |x: f64| weight(x) * law.pdf(x).unwrap();
    // x = 1/y keeps slowly decaying tails inside the rule's reach.
    integrate_real(f, 0.0, 1.0, 1e-12).unwrap() + integrate_real(|y| f(1.0 / y) / (y * y), 0.0, 1.0, 1e-12).unwrap()
}

#[test]
fn densities_are_normalized() {
    for law in with_pdf() {
        let total = integrate_on_support(&law, |_| 1.0);
        assert!((total - 1.0).abs() < 1e-8, "{}: {total}", law.label());
    }
}

#[test]
fn mellin_matches_density_quadrature() {
    for law in with_pdf() {
        let (lo, hi) = law.mellin_strip();
        let (lo, hi) = (lo.max(-3.0), hi.min(4.0));
        for k in 1..=5 {
            let w = lo + (hi - lo) * k as f64 / 6.0;
            let want = law.mellin(cx(w, 0.0)).unwrap().re;
            let got = integrate_on_support(&law, |x| x.powf(w - 1.0));
            assert!((got - want).abs() < 1e-6 * want.abs().max(1.0), "{} at {w}: {got} vs {want}", law.label());
        }
    }
}

#[test]
fn cdf_is_integral_of_pdf() {
    for law in with_pdf() {
        let (_, hi) = law.support();
        for &x in &[0.05, 0.3, 0.5, 0.9, 2.0, 7.0] {
            if x >= hi {
                continue;
            }
            let f = |t: f64| law.pdf(t).unwrap();
            let int = integrate_real(f, 0.0, x, 1e-12).unwrap();
            let c = law.cdf(x).unwrap();
            assert!((int - c).abs() < 1e-8, "{} at {x}: {int} vs {c}", law.label());
        }
    }
}

#[test]
fn gamma_law_examples() {
    let g = gamma_law(2.7).unwrap();
    assert!((g.moment(1.0).unwrap() - 2.7).abs() < 1e-13);
    let e = gamma_law(1.0).unwrap();
    for &x in &[0.1, 1.0, 4.0] {
        assert!((e.pdf(x).unwrap() - (-x).exp()).abs() < 1e-15);
    }
    let x = sample(&gamma_law(0.4).unwrap(), 1_000_000, 11).unwrap();
    let est = mc_mellin(&x, cx(2.0, 0.0)).unwrap();
    assert!(sigma_distance(&est, cx(0.4, 0.0)) < 4.0, "{est:?}");
    assert!(gamma_law(0.0).is_err());
}

#[test]
fn arcsine_examples() {
    for &r in &[0.2, 0.5, 0.8] {
        let a = arcsine_law(r).unwrap();
        assert!((a.moment(1.0).unwrap() - r).abs() < 1e-13);
    }
    let h = arcsine_law(0.5).unwrap();
    for &x in &[0.1, 0.5, 0.77] {
        assert!((h.pdf(x).unwrap() - 1.0 / (PI * (x * (1.0 - x)).sqrt())).abs() < 1e-13);
    }
    assert!(matches!(arcsine_law(1.0), Err(Error::Domain(_))));
}

#[test]
fn pareto_examples() {
    let p = pareto_std(0.5).unwrap();
    assert!((p.moment(0.25).unwrap() - 2f64.sqrt()).abs() < 1e-13);
    assert!((p.moment(0.0).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(pareto_law(0.9, 2.0).unwrap().moment(1.0), Err(Error::Strip { .. })));
    assert!(pareto_law(1.5, 2.0).unwrap().moment(1.0).is_ok());
}

#[test]
fn arcsine_link_ks() {
    // (1 + P_ρ)^{-1} is arc-sine distributed.
    for (k, &r) in [0.25, 0.5, 0.75].iter().enumerate() {
        let a = arcsine_law(r).unwrap();
        let x = sample(&a, 100_000, 100 + k as u64).unwrap();
        let ks = ks_one_sample(&x, |t| reg_inc_beta(r, 1.0 - r, t).unwrap()).unwrap();
        assert!(ks.p_value > 0.01, "rho={r}: {ks:?}");
    }
}

#[test]
fn gamma_ratio_is_pareto() {
    let p = pareto_law(0.7, 1.4).unwrap();
    let x = sample(&p, 100_000, 5).unwrap();
    let ks = ks_one_sample(&x, |t| p.cdf(t).unwrap()).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
    let est = mc_mellin(&x, cx(1.3, 0.0)).unwrap();
    assert!(sigma_distance(&est, p.mellin(cx(1.3, 0.0)).unwrap()) < 4.0);
}

#[test]
fn positive_stable_mellin_and_half() {
    let alpha = 0.6;
    let s = positive_stable(alpha).unwrap();
    let x = sample(&s, 1_000_000, 21).unwrap();
    // E[S^{-α}] = Γ(2)/Γ(1+α)
    let est = mc_mellin(&x, cx(1.0 - alpha, 0.0)).unwrap();
    let want = 1.0 / gamma_real(1.0 + alpha).unwrap();
    assert!((s.moment(-alpha).unwrap() - want).abs() < 1e-13);
    assert!(sigma_distance(&est, cx(want, 0.0)) < 4.0, "{est:?} vs {want}");
    assert!((s.moment(0.0).unwrap() - 1.0).abs() < 1e-15);

    let h = positive_stable(0.5).unwrap();
    let y = sample(&h, 100_000, 22).unwrap();
    let ks = ks_one_sample(&y, |t| h.cdf(t).unwrap()).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn length_biased_mellin() {
    let (alpha, rho) = (0.6, 0.3);
    let law = length_biased_stable(alpha, 1.0 - rho).unwrap();
    assert!((law.mellin(cx(1.0, 0.0)).unwrap().re - 1.0).abs() < 1e-14);
    let x = sample(&law, 200_000, 31).unwrap();
    let w = cx(1.2, 0.0);
    let est = mc_mellin(&x, w).unwrap();
    assert!(sigma_distance(&est, law.mellin(w).unwrap()) < 4.0, "{est:?}");
    assert!(length_biased_stable(0.6, 0.0).is_err());
}

#[test]
fn length_biased_ess_reported() {
    let mut rng = levyfac_core::rng::chunk_rng(1, 0);
    let ess = length_biased_ess(0.6, 0.7, 1000, &mut rng).unwrap();
    assert!(ess > 0.01 * 1000.0 && ess <= (SIR_OVERSAMPLING * 1000) as f64);
}

#[test]
fn frechet_examples() {
    let a = 0.4;
    let f = frechet_law(a).unwrap();
    assert!((f.moment(1.0).unwrap() - gamma_real(1.0 - a).unwrap()).abs() < 1e-13);
    assert!(matches!(f.moment(1.0 / a + 0.1), Err(Error::Strip { .. })));
    let x = sample(&f, 100_000, 41).unwrap();
    let ks = ks_one_sample(&x, |t| (-t.powf(-1.0 / a)).exp()).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn cauchy_squared_examples() {
    let c = cauchy_squared();
    let p = pareto_std(0.5).unwrap();
    for &x in &[0.01, 0.5, 1.0, 3.0, 100.0] {
        assert!((c.pdf(x).unwrap() - p.pdf(x).unwrap()).abs() < 1e-14 * p.pdf(x).unwrap());
    }
    assert!((c.cdf(1.0).unwrap() - 0.5).abs() < 1e-15);
    assert!(c.mellin(cx(1.45, 0.0)).is_ok());
    assert!(c.mellin(cx(1.5, 0.0)).is_err());
    assert!(c.mellin(cx(0.5, 0.0)).is_err());
    let x = sample(&c, 100_000, 51).unwrap();
    let y = sample(&p, 100_000, 52).unwrap();
    let ks = ks_two_sample(&x, &y).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn dufresne_oracle_ratio_is_pareto() {
    let rho = 0.3;
    let i = dufresne_law(-rho / 2.0, 1.0).unwrap();
    let j = dufresne_law(-(1.0 - rho) / 2.0, 1.0).unwrap();
    let x = sample(&i, 50_000, 61).unwrap();
    let y = sample(&j, 50_000, 62).unwrap();
    let r: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a / b).collect();
    let p = pareto_std(rho).unwrap();
    let ks = ks_one_sample(&r, |t| p.cdf(t).unwrap()).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
    // a = -1/4, σ = 1 gives 2/G_{1/2}, whose mean is infinite.
    let d = dufresne_law(-0.25, 1.0).unwrap();
    assert!(d.moment(1.0).is_err());
    assert!(dufresne_law(0.1, 1.0).is_err());
}

#[test]
fn ks_calibration() {
    let u = sample(&arcsine_law(0.5).unwrap(), 100_000, 71).unwrap();
    let v: Vec<f64> = u.iter().map(|x| (x.sqrt()).asin() * 2.0 / PI).collect();
    let ks = ks_one_sample(&v, |t| t.clamp(0.0, 1.0)).unwrap();
    assert!(ks.p_value > 0.001, "{ks:?}");
    let g = sample(&gamma_law(1.0).unwrap(), 10_000, 72).unwrap();
    let normal = |t: f64| 0.5 * libm::erfc(-t / 2f64.sqrt());
    let ks = ks_one_sample(&g, normal).unwrap();
    assert!(ks.p_value < 1e-10);
}

#[test]
fn mc_mellin_examples() {
    let g = sample(&gamma_law(1.0).unwrap(), 100_000, 81).unwrap();
    let e = mc_mellin(&g, cx(2.0, 0.0)).unwrap();
    assert!(sigma_distance(&e, cx(1.0, 0.0)) < 4.0);
    let p = sample(&pareto_std(0.5).unwrap(), 400_000, 82).unwrap();
    let e = mc_mellin(&p, cx(1.25, 0.0)).unwrap();
    assert!(sigma_distance(&e, cx(2f64.sqrt(), 0.0)) < 4.0, "{e:?}");
}

#[test]
fn sampler_is_reproducible() {
    let law = pareto_std(0.3).unwrap();
    let a = sample(&law, 10_000, 3).unwrap();
    let b = sample(&law, 10_000, 3).unwrap();
    assert_eq!(a, b);
    let c = sample(&law, 10_000, 4).unwrap();
    assert_ne!(a, c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mellin_conjugate_symmetry(a in 0.1f64..3.0, b in 0.1f64..3.0, t in -5.0f64..5.0, u in 0.0f64..1.0) {
        let p = pareto_law(a, b).unwrap();
        let (lo, hi) = p.mellin_strip();
        let w = cx(lo + (hi - lo) * (0.05 + 0.9 * u), t);
        let m = p.mellin(w).unwrap();
        let n = p.mellin(w.conj()).unwrap();
        prop_assert!((m - n.conj()).norm() < 1e-12 * m.norm().max(1e-300));
    }

    #[test]
    fn mellin_is_one_at_one(a in 0.05f64..5.0, r in 0.01f64..0.99, al in 0.05f64..0.95) {
        for law in [gamma_law(a).unwrap(), arcsine_law(r).unwrap(), pareto_std(r).unwrap(),
                    positive_stable(al).unwrap(), frechet_law(al).unwrap(), length_biased_stable(al, a).unwrap()] {
            prop_assert!((law.mellin(cx(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn cdf_monotone(r in 0.01f64..0.99, x in 0.0f64..1.0, dx in 0.0f64..0.5) {
        let a = arcsine_law(r).unwrap();
        let y = (x + dx).min(1.0);
        prop_assert!(a.cdf(x).unwrap() <= a.cdf(y).unwrap() + 1e-15);
    }
}
