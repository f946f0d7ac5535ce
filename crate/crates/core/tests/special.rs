use levyfac_core::special::*;
use proptest::prelude::*;

use std::f64::consts::PI;

// log Γ on the principal branch, 20 digits from mpmath.loggamma.
const LOG_GAMMA: [((f64, f64), (f64, f64)); 9] = [
    ((3.7, 2.1), (0.78534695807382238876, 2.5830129251152622486)),
    ((-2.3, 0.7), (-1.2664294851930893798, -8.0767823667120556327)),
    ((-0.5, -3.0), (-4.9057622261983900861, 1.4261257331230842915)),
    ((0.2, 0.001), (1.5240506888985643582, -0.005288997984211242985)),
    ((-4.6, -0.2), (-3.1228281313088136282, 15.560754841765565911)),
    ((-7.3, 12.5), (-38.871233213123221319, 4.5256746687863667346)),
    ((0.3, 40.0), (-62.650686053968132692, 107.24156057988667968)),
    ((150.0, 80.0), (579.52465129781512948, 404.11226455900833893)),
    ((-1.2, 60.0), (-100.28943456811564341, 182.96693376427443867)),
];

/// Independent oracle: shift by 50 then Stirling with six correction terms.
fn shifted_stirling(z: Complex) -> Complex {
    let n = 50;
    let w = z + n as f64;
    let mut acc = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln();
    let b = [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0, -691.0 / 360360.0];
    let mut p = w;
    let w2 = w * w;
    for c in b {
        acc += c / p;
        p *= w2;
    }
    for k in 0..n {
        acc -= (z + k as f64).ln();
    }
    acc
}

#[test]
fn log_gamma_matches_frozen_values() {
    for ((x, y), (re, im)) in LOG_GAMMA {
        let got = log_gamma(cx(x, y)).unwrap();
        let want = cx(re, im);
        let err = (got - want).norm() / want.norm().max(1.0);
        assert!(err < 1e-13, "log_gamma({x}+{y}i) = {got}, want {want}, rel err {err:e}");
    }
}

#[test]
fn log_gamma_matches_stirling_in_upper_half_plane() {
    // The summed logs follow the principal branch only while Im z > 0 keeps
    // every shift in the upper half plane.
    for &(x, y) in &[(0.25, 0.5), (-3.7, 1.3), (12.0, 0.01), (-0.99, 7.0), (2.5, 30.0)] {
        let z = cx(x, y);
        let a = log_gamma(z).unwrap();
        let b = shifted_stirling(z);
        assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "{z}: {a} vs {b}");
    }
}

#[test]
fn gamma_real_known_values() {
    assert!((gamma_real(5.0).unwrap() - 24.0).abs() < 1e-12);
    assert!((gamma_real(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
    assert!((gamma_real(1.0 / 3.0).unwrap() - 2.678_938_534_707_747_6).abs() < 1e-13);
    assert!((ln_gamma(100.0).unwrap() - 359.134_205_369_575_4).abs() < 1e-11);
}

#[test]
fn rgamma_vanishes_at_poles() {
    for n in 0..6 {
        assert_eq!(rgamma(cx(-(n as f64), 0.0)).unwrap(), cx(0.0, 0.0));
    }
}

#[test]
fn envelope_dominates_gamma() {
    for &a in &[-2.5, -0.3, 0.5, 1.7, 4.0] {
        let env = stirling_envelope(a, 1.0).unwrap();
        let grid: Vec<f64> = (0..400).map(|k| (1.0f64 + 0.05 * k as f64).exp()).collect();
        assert!(env.holds_on(&grid).unwrap());
        assert!(env.exponent_rate == PI / 2.0);
    }
}

proptest! {
    #[test]
    fn recurrence_holds(x in -20.0f64..20.0, y in 0.05f64..30.0) {
        // log Γ(z+1) - log Γ(z) = log z modulo 2πi.
        let z = cx(x, y);
        let d = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        prop_assert!(d.re.abs() < 1e-11 * (1.0 + z.norm()));
        let k = (d.im / (2.0 * PI)).round();
        prop_assert!((d.im - 2.0 * PI * k).abs() < 1e-10 * (1.0 + z.norm()));
    }

    #[test]
    fn conjugate_symmetry(x in -15.0f64..15.0, y in 0.01f64..20.0) {
        let z = cx(x, y);
        let a = log_gamma(z).unwrap();
        let b = log_gamma(z.conj()).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn reflection(x in -6.0f64..6.0, y in 0.05f64..6.0) {
        // Γ(z)Γ(1-z) = π / sin(πz)
        let z = cx(x, y);
        let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
        let rhs = PI / (z * PI).sin();
        prop_assert!((lhs - rhs).norm() < 1e-11 * rhs.norm());
    }

    #[test]
    fn branch_is_continuous(x in -10.0f64..10.0, y in 0.02f64..10.0) {
        let z = cx(x, y);
        let a = log_gamma(z).unwrap();
        let b = log_gamma(z + cx(1e-6, 1e-6)).unwrap();
        prop_assert!((a - b).norm() < 1e-3);
    }

    #[test]
    fn incomplete_beta_symmetry(a in 0.1f64..8.0, b in 0.1f64..8.0, x in 0.001f64..0.999) {
        let s = reg_inc_beta(a, b, x).unwrap() + reg_inc_beta(b, a, 1.0 - x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
}
