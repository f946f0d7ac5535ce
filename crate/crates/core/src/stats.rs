//! Kolmogorov–Smirnov statistics and Monte Carlo Mellin estimates.

use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::special::Complex;

/// Smallest sample size accepted by the KS routines.
pub const MIN_KS_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi-transformed series, accurate for small λ.
        let t = -core::f64::consts::PI * core::f64::consts::PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 0..50 {
            let j = (2 * k + 1) as f64;
            let term = (j * j * t).exp();
            s += term;
            if term < 1e-18 * s {
                break;
            }
        }
        let cdf = (2.0 * core::f64::consts::PI).sqrt() / lambda * s;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    let mut sign = 1.0;
    for k in 1..100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += sign * term;
        if term < 1e-300 || term < 1e-18 * s.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Asymptotic p-value with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let sn = n_eff.sqrt();
    kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)
}

fn sorted(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("KS sample"));
    }
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// One-sample test of `x` against the continuous CDF `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(x: &[f64], cdf: F) -> Result<KsResult> {
    if x.len() < MIN_KS_SIZE {
        return Err(Error::SampleSize { got: x.len(), min: MIN_KS_SIZE });
    }
    let v = sorted(x)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &xi) in v.iter().enumerate() {
        let f = cdf(xi);
        if f.is_nan() {
            return Err(Error::NonFinite("KS reference CDF"));
        }
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult { statistic: d, p_value: ks_p_value(d, n) })
}

/// Two-sample test; ties are handled by advancing both samples together.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    for s in [x, y] {
        if s.len() < MIN_KS_SIZE {
            return Err(Error::SampleSize { got: s.len(), min: MIN_KS_SIZE });
        }
    }
    let a = sorted(x)?;
    let b = sorted(y)?;
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] <= t {
            i += 1;
        }
        while j < m && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    Ok(KsResult { statistic: d, p_value: ks_p_value(d, ne) })
}

/// Monte Carlo estimate of `E[X^{z-1}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinEstimate {
    pub estimate: Complex,
    /// Jackknife standard errors of the real and imaginary parts.
    pub se_re: f64,
    pub se_im: f64,
    /// More than half of `Σ|x^{z-1}|` comes from under 0.1% of the samples.
    pub heavy_tail: bool,
}

impl MellinEstimate {
    pub fn standard_error(&self) -> f64 {
        self.se_re.hypot(self.se_im)
    }
}

/// Sample mean of `x^{z-1}` with jackknife standard errors (which for a mean
/// coincide with `sd/√n`).
pub fn mc_mellin(samples: &[f64], z: Complex) -> Result<MellinEstimate> {
    if samples.len() < 2 {
        return Err(Error::SampleSize { got: samples.len(), min: 2 });
    }
    let n = samples.len() as f64;
    let s = z - 1.0;
    let mut vals = Vec::with_capacity(samples.len());
    for &x in samples {
        if !(x > 0.0) {
            return Err(Error::Domain(alloc::format!("Mellin estimate needs positive samples (got {x})")));
        }
        let v = (s * x.ln()).exp();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite("Mellin sample power"));
        }
        vals.push(v);
    }
    let mean = vals.iter().sum::<Complex>() / n;
    let (mut vr, mut vi) = (0.0, 0.0);
    for v in &vals {
        vr += (v.re - mean.re).powi(2);
        vi += (v.im - mean.im).powi(2);
    }
    let se_re = (vr / (n - 1.0) / n).sqrt();
    let se_im = (vi / (n - 1.0) / n).sqrt();
    let mut mags: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
    let total: f64 = mags.iter().sum();
    mags.sort_by(|a, b| b.total_cmp(a));
    let top = (samples.len() / 1000).max(1);
    let top_sum: f64 = mags[..top.min(mags.len())].iter().sum();
    let heavy_tail = samples.len() >= 1000 && top_sum > 0.5 * total;
    Ok(MellinEstimate { estimate: mean, se_re, se_im, heavy_tail })
}

/// Distance in standard errors between an estimate and a reference value.
pub fn sigma_distance(est: &MellinEstimate, reference: Complex) -> f64 {
    let se = est.standard_error();
    let d = (est.estimate - reference).norm();
    if se == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d / se
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::cx;

    #[test]
    fn kolmogorov_branches_agree() {
        // Both series at the switch point.
        let l = 1.0;
        let small = {
            let t = -core::f64::consts::PI.powi(2) / (8.0 * l * l);
            let s: f64 = (0..50).map(|k| (((2 * k + 1) as f64).powi(2) * t).exp()).sum();
            1.0 - (2.0 * core::f64::consts::PI).sqrt() / l * s
        };
        assert!((kolmogorov_q(l) - small).abs() < 1e-14);
        assert!((kolmogorov_q(0.999_999_9) - kolmogorov_q(1.000_000_1)).abs() < 1e-6);
        // Known quantile: Q(1.3581) ≈ 0.05
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn identical_samples() {
        let x: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let r = ks_two_sample(&x, &x).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn size_error() {
        let x = [1.0; 10];
        assert!(matches!(ks_one_sample(&x, |v| v), Err(Error::SampleSize { .. })));
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let x = [2.0; 50];
        let e = mc_mellin(&x, cx(3.0, 0.0)).unwrap();
        assert!((e.estimate.re - 4.0).abs() < 1e-14);
        assert_eq!(e.standard_error(), 0.0);
    }
}
