//! Closed-form positive laws: gamma, arc-sine, generalized Pareto, positive
//! stable and its length-biased versions, Fréchet, squared Cauchy and the
//! inverse-gamma law of Brownian exponential functionals.
//!
//! Mellin transforms follow `mellin(w) = E[X^{w-1}]`, so `mellin(1) = 1`;
//! [`ClosedFormLaw::moment`] gives `E[X^s] = mellin(s + 1)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::distr::Open01;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Gamma, StandardNormal};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::rng::{ChunkedSampler, Batch};
use crate::special::{
    cx, gamma_ratio, gamma_real, ln_beta, ln_gamma, log_gamma, reg_inc_beta, reg_lower_gamma, Complex,
};

/// Base draws per resampled draw for length-biased laws.
pub const SIR_OVERSAMPLING: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawKind {
    Gamma { a: f64 },
    Arcsine { rho: f64 },
    Pareto { a: f64, b: f64 },
    PositiveStable { alpha: f64 },
    /// Law of `S_γ^{-α}`: `S^{-α}` reweighted by `S^{-αγ}`.
    LengthBiasedStable { alpha: f64, gamma: f64 },
    /// `E^{-α}` with `E` standard exponential.
    Frechet { alpha: f64 },
    CauchySquared,
    /// `2 / (σ² G_ν)`, `ν = -2a/σ²`.
    Dufresne { a: f64, sigma: f64 },
}

/// A positive law with sampler and, where available, density, CDF and Mellin
/// transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormLaw {
    pub kind: LawKind,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be positive (got {v})")));
    }
    Ok(())
}

fn unit_open(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("{name} must lie in (0, 1) (got {v})")));
    }
    Ok(())
}

pub fn gamma_law(a: f64) -> Result<ClosedFormLaw> {
    positive("gamma shape", a)?;
    Ok(ClosedFormLaw { kind: LawKind::Gamma { a } })
}

pub fn arcsine_law(rho: f64) -> Result<ClosedFormLaw> {
    unit_open("rho", rho)?;
    Ok(ClosedFormLaw { kind: LawKind::Arcsine { rho } })
}

pub fn pareto_law(a: f64, b: f64) -> Result<ClosedFormLaw> {
    positive("Pareto a", a)?;
    positive("Pareto b", b)?;
    Ok(ClosedFormLaw { kind: LawKind::Pareto { a, b } })
}

/// `P_ρ = P_{ρ, 1-ρ} = G_{1-ρ} / G_ρ`.
pub fn pareto_std(rho: f64) -> Result<ClosedFormLaw> {
    unit_open("rho", rho)?;
    pareto_law(rho, 1.0 - rho)
}

pub fn positive_stable(alpha: f64) -> Result<ClosedFormLaw> {
    unit_open("alpha", alpha)?;
    Ok(ClosedFormLaw { kind: LawKind::PositiveStable { alpha } })
}

pub fn length_biased_stable(alpha: f64, gamma: f64) -> Result<ClosedFormLaw> {
    unit_open("alpha", alpha)?;
    positive("length-bias index", gamma)?;
    Ok(ClosedFormLaw { kind: LawKind::LengthBiasedStable { alpha, gamma } })
}

pub fn frechet_law(alpha: f64) -> Result<ClosedFormLaw> {
    unit_open("alpha", alpha)?;
    Ok(ClosedFormLaw { kind: LawKind::Frechet { alpha } })
}

pub fn cauchy_squared() -> ClosedFormLaw {
    ClosedFormLaw { kind: LawKind::CauchySquared }
}

/// Law of `∫_0^∞ e^{σB_t + at} dt` for `a < 0`.
pub fn dufresne_law(a: f64, sigma: f64) -> Result<ClosedFormLaw> {
    if !(a < 0.0) || !(sigma > 0.0) {
        return Err(Error::Domain(format!("Dufresne law needs a < 0 < sigma (got {a}, {sigma})")));
    }
    Ok(ClosedFormLaw { kind: LawKind::Dufresne { a, sigma } })
}

fn dufresne_nu(a: f64, sigma: f64) -> f64 {
    -2.0 * a / (sigma * sigma)
}

impl ClosedFormLaw {
    pub fn name(&self) -> &'static str {
        match self.kind {
            LawKind::Gamma { .. } => "gamma",
            LawKind::Arcsine { .. } => "arcsine",
            LawKind::Pareto { .. } => "pareto",
            LawKind::PositiveStable { .. } => "positive-stable",
            LawKind::LengthBiasedStable { .. } => "length-biased-stable",
            LawKind::Frechet { .. } => "frechet",
            LawKind::CauchySquared => "cauchy-squared",
            LawKind::Dufresne { .. } => "dufresne",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.kind {
            LawKind::Gamma { a } => vec![a],
            LawKind::Arcsine { rho } => vec![rho],
            LawKind::Pareto { a, b } => vec![a, b],
            LawKind::PositiveStable { alpha } | LawKind::Frechet { alpha } => vec![alpha],
            LawKind::LengthBiasedStable { alpha, gamma } => vec![alpha, gamma],
            LawKind::CauchySquared => vec![],
            LawKind::Dufresne { a, sigma } => vec![a, sigma],
        }
    }

    pub fn label(&self) -> String {
        let p = self.params();
        let parts: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        format!("{}({})", self.name(), parts.join(","))
    }

    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            LawKind::Arcsine { .. } => (0.0, 1.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Open interval of `Re w` on which `E[X^{w-1}]` is finite.
    pub fn mellin_strip(&self) -> (f64, f64) {
        let inf = f64::INFINITY;
        match self.kind {
            LawKind::Gamma { a } => (1.0 - a, inf),
            LawKind::Arcsine { rho } => (1.0 - rho, inf),
            LawKind::Pareto { a, b } => (1.0 - b, 1.0 + a),
            LawKind::PositiveStable { alpha } => (-inf, 1.0 + alpha),
            LawKind::LengthBiasedStable { gamma, .. } => (-gamma, inf),
            LawKind::Frechet { alpha } => (-inf, 1.0 + 1.0 / alpha),
            LawKind::CauchySquared => (0.5, 1.5),
            LawKind::Dufresne { a, sigma } => (-inf, 1.0 + dufresne_nu(a, sigma)),
        }
    }

    /// `E[X^{w-1}]`, with a strip check.
    pub fn mellin(&self, w: Complex) -> Result<Complex> {
        let (lo, hi) = self.mellin_strip();
        if !(w.re > lo && w.re < hi) {
            return Err(Error::Strip { re: w.re, lo, hi });
        }
        self.mellin_formula(w)
    }

    /// `E[X^s] = mellin(s + 1)`.
    pub fn moment(&self, s: f64) -> Result<f64> {
        self.mellin(cx(s + 1.0, 0.0)).map(|v| v.re)
    }

    /// Meromorphic continuation of the Mellin transform (no strip check).
    pub fn mellin_formula(&self, w: Complex) -> Result<Complex> {
        let s = w - 1.0;
        let lg = log_gamma;
        match self.kind {
            LawKind::Gamma { a } => Ok((lg(s + a)? - ln_gamma(a)?).exp()),
            LawKind::Arcsine { rho } => Ok(gamma_ratio(rho + s, w)? / gamma_real(rho)?),
            LawKind::Pareto { a, b } => Ok((lg(a - s)? + lg(b + s)? - ln_gamma(a)? - ln_gamma(b)?).exp()),
            LawKind::PositiveStable { alpha } => Ok(gamma_ratio(1.0 - s / alpha, 1.0 - s)?),
            LawKind::LengthBiasedStable { alpha, gamma } => {
                let c = (ln_gamma(1.0 + alpha * gamma)? - ln_gamma(1.0 + gamma)?).exp();
                Ok(c * gamma_ratio(1.0 + gamma + s, 1.0 + alpha * (gamma + s))?)
            }
            LawKind::Frechet { alpha } => Ok(lg(1.0 - alpha * s)?.exp()),
            LawKind::CauchySquared => Ok((lg(0.5 - s)? + lg(0.5 + s)?).exp() / PI),
            LawKind::Dufresne { a, sigma } => {
                let nu = dufresne_nu(a, sigma);
                let c = 2.0 / (sigma * sigma);
                Ok((s * c.ln() + lg(nu - s)? - ln_gamma(nu)?).exp())
            }
        }
    }

    pub fn pdf(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.support();
        if !(x > lo && x < hi) {
            return match self.kind {
                LawKind::PositiveStable { alpha } if alpha != 0.5 => None,
                LawKind::LengthBiasedStable { .. } => None,
                _ => Some(0.0),
            };
        }
        match self.kind {
            LawKind::Gamma { a } => Some(((a - 1.0) * x.ln() - x - ln_gamma(a).ok()?).exp()),
            LawKind::Arcsine { rho } => {
                Some((PI * rho).sin() / PI * ((rho - 1.0) * x.ln() - rho * (-x).ln_1p()).exp())
            }
            LawKind::Pareto { a, b } => {
                Some(((b - 1.0) * x.ln() - (a + b) * x.ln_1p() - ln_beta(a, b).ok()?).exp())
            }
            LawKind::PositiveStable { alpha } if alpha == 0.5 => {
                Some((-1.5 * x.ln() - 0.25 / x).exp() / (2.0 * PI.sqrt()))
            }
            LawKind::PositiveStable { .. } | LawKind::LengthBiasedStable { .. } => None,
            LawKind::Frechet { alpha } => {
                let t = x.powf(-1.0 / alpha);
                Some(t / (alpha * x) * (-t).exp())
            }
            LawKind::CauchySquared => Some(1.0 / (PI * x.sqrt() * (1.0 + x))),
            LawKind::Dufresne { a, sigma } => {
                let nu = dufresne_nu(a, sigma);
                let c = 2.0 / (sigma * sigma);
                let y = c / x;
                Some(((nu - 1.0) * y.ln() - y - ln_gamma(nu).ok()?).exp() * c / (x * x))
            }
        }
    }

    pub fn cdf(&self, x: f64) -> Option<f64> {
        if x.is_nan() {
            return None;
        }
        if x <= 0.0 {
            return match self.kind {
                LawKind::PositiveStable { alpha } if alpha != 0.5 => None,
                LawKind::LengthBiasedStable { .. } => None,
                _ => Some(0.0),
            };
        }
        match self.kind {
            LawKind::Gamma { a } => reg_lower_gamma(a, x).ok(),
            LawKind::Arcsine { rho } => reg_inc_beta(rho, 1.0 - rho, x).ok(),
            LawKind::Pareto { a, b } => {
                if x.is_infinite() {
                    return Some(1.0);
                }
                reg_inc_beta(b, a, x / (1.0 + x)).ok()
            }
            LawKind::PositiveStable { alpha } if alpha == 0.5 => Some(libm::erfc(0.5 / x.sqrt())),
            LawKind::PositiveStable { .. } | LawKind::LengthBiasedStable { .. } => None,
            LawKind::Frechet { alpha } => Some((-x.powf(-1.0 / alpha)).exp()),
            LawKind::CauchySquared => Some(2.0 / PI * x.sqrt().atan()),
            LawKind::Dufresne { a, sigma } => {
                let nu = dufresne_nu(a, sigma);
                let c = 2.0 / (sigma * sigma);
                reg_lower_gamma(nu, c / x).ok().map(|p| 1.0 - p)
            }
        }
    }

    /// Chunked sampler for this law.
    pub fn sampler(&self) -> Result<LawSampler> {
        LawSampler::new(*self)
    }
}

/// `ln G_a` without underflow for small shapes: `G_a = G_{a+1} U^{1/a}`.
#[derive(Debug, Clone, Copy)]
pub struct LnGamma {
    a: f64,
    boosted: bool,
    dist: Gamma<f64>,
}

impl LnGamma {
    pub fn new(a: f64) -> Result<Self> {
        positive("gamma shape", a)?;
        let boosted = a < 1.0;
        let shape = if boosted { a + 1.0 } else { a };
        let dist = Gamma::new(shape, 1.0).map_err(|e| Error::Domain(format!("gamma sampler: {e}")))?;
        Ok(LnGamma { a, boosted, dist })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let g: f64 = rng.sample(self.dist);
        if self.boosted {
            let u: f64 = rng.sample(Open01);
            g.ln() + u.ln() / self.a
        } else {
            g.ln()
        }
    }
}

/// `ln S` for a positive `α`-stable `S` with `E[e^{-λS}] = e^{-λ^α}`
/// (Kanter's representation).
pub fn ln_positive_stable(alpha: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = PI * rng.sample::<f64, _>(Open01);
    let e: f64 = rng.sample(Exp1);
    let a = (alpha * u).sin().ln() - (u.sin().ln()) / alpha;
    let b = ((1.0 - alpha) * u).sin().ln() - e.ln();
    a + (1.0 - alpha) / alpha * b
}

#[derive(Debug, Clone, Copy)]
enum Plan {
    Gamma(LnGamma),
    Ratio { num: LnGamma, den: LnGamma },
    Arcsine { g_rho: LnGamma, g_other: LnGamma },
    Stable(f64),
    LengthBiased { alpha: f64, gamma: f64 },
    Frechet(f64),
    CauchySquared,
    InverseGamma { ln_c: f64, g: LnGamma },
}

/// Chunked sampler for a [`ClosedFormLaw`].
#[derive(Debug, Clone, Copy)]
pub struct LawSampler {
    pub law: ClosedFormLaw,
    plan: Plan,
}

impl LawSampler {
    pub fn new(law: ClosedFormLaw) -> Result<Self> {
        let plan = match law.kind {
            LawKind::Gamma { a } => Plan::Gamma(LnGamma::new(a)?),
            LawKind::Arcsine { rho } => Plan::Arcsine { g_rho: LnGamma::new(rho)?, g_other: LnGamma::new(1.0 - rho)? },
            LawKind::Pareto { a, b } => Plan::Ratio { num: LnGamma::new(b)?, den: LnGamma::new(a)? },
            LawKind::PositiveStable { alpha } => Plan::Stable(alpha),
            LawKind::LengthBiasedStable { alpha, gamma } => Plan::LengthBiased { alpha, gamma },
            LawKind::Frechet { alpha } => Plan::Frechet(alpha),
            LawKind::CauchySquared => Plan::CauchySquared,
            LawKind::Dufresne { a, sigma } => Plan::InverseGamma {
                ln_c: (2.0 / (sigma * sigma)).ln(),
                g: LnGamma::new(dufresne_nu(a, sigma))?,
            },
        };
        Ok(LawSampler { law, plan })
    }
}

impl ChunkedSampler for LawSampler {
    fn fill(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<usize> {
        match self.plan {
            Plan::Gamma(g) => out.iter_mut().for_each(|v| *v = g.sample(rng).exp()),
            Plan::Ratio { num, den } => out.iter_mut().for_each(|v| {
                let n = num.sample(rng);
                let d = den.sample(rng);
                *v = (n - d).exp();
            }),
            Plan::Arcsine { g_rho, g_other } => out.iter_mut().for_each(|v| {
                // (1 + P_ρ)^{-1} with P_ρ = G_{1-ρ}/G_ρ
                let a = g_rho.sample(rng);
                let b = g_other.sample(rng);
                *v = 1.0 / (1.0 + (b - a).exp());
            }),
            Plan::Stable(alpha) => out.iter_mut().for_each(|v| *v = ln_positive_stable(alpha, rng).exp()),
            Plan::LengthBiased { alpha, gamma } => {
                resample_length_biased(alpha, gamma, rng, out)?;
            }
            Plan::Frechet(alpha) => out.iter_mut().for_each(|v| {
                let e: f64 = rng.sample(Exp1);
                *v = (-alpha * e.ln()).exp();
            }),
            Plan::CauchySquared => out.iter_mut().for_each(|v| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                let c = a / b;
                *v = c * c;
            }),
            Plan::InverseGamma { ln_c, g } => out.iter_mut().for_each(|v| *v = (ln_c - g.sample(rng)).exp()),
        }
        Ok(0)
    }
}

/// Effective sample size of normalized weights.
pub fn effective_sample_size(log_weights: &[f64]) -> f64 {
    let m = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut s, mut s2) = (0.0, 0.0);
    for &lw in log_weights {
        let w = (lw - m).exp();
        s += w;
        s2 += w * w;
    }
    s * s / s2
}

/// Importance resampling: `SIR_OVERSAMPLING × len` base stable draws,
/// weights `S^{-αγ}`, multinomial resampling of `S^{-α}`.
fn resample_length_biased(alpha: f64, gamma: f64, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<f64> {
    let m = out.len();
    if m == 0 {
        return Ok(0.0);
    }
    let nb = SIR_OVERSAMPLING * m;
    let mut ln_s = Vec::with_capacity(nb);
    let mut lw = Vec::with_capacity(nb);
    for _ in 0..nb {
        let l = ln_positive_stable(alpha, rng);
        ln_s.push(l);
        lw.push(-alpha * gamma * l);
    }
    let ess = effective_sample_size(&lw);
    if !(ess >= 0.01 * m as f64) {
        return Err(Error::EssCollapse { ess, n: m });
    }
    let mx = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut cum = Vec::with_capacity(nb);
    let mut acc = 0.0;
    for &w in &lw {
        acc += (w - mx).exp();
        cum.push(acc);
    }
    for v in out.iter_mut() {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cum.partition_point(|&c| c <= u).min(nb - 1);
        *v = (-alpha * ln_s[idx]).exp();
    }
    Ok(ess)
}

/// Effective sample size of one resampling chunk of `len` outputs, as drawn
/// by the sampler from the same stream.
pub fn length_biased_ess(alpha: f64, gamma: f64, len: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut out = vec![0.0; len];
    resample_length_biased(alpha, gamma, rng, &mut out)
}

/// Convenience: `n` draws of `law` on a single thread.
pub fn sample(law: &ClosedFormLaw, n: usize, seed: u64) -> Result<Vec<f64>> {
    crate::rng::sample_serial(&law.sampler()?, n, seed).map(|b: Batch| b.values)
}
