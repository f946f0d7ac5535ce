//! Monte Carlo sampling of exponential functionals `∫_0^{e_q} e^{ξ_t} dt`
//! and of suprema of stable processes on a grid.

use alloc::format;

use core::f64::consts::PI;

use rand::distr::Open01;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exponent::{CharExponent, Kind, RealFn};
use crate::laws::{self, ClosedFormLaw};
use crate::rng::ChunkedSampler;

/// Discretization of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub dt: f64,
    /// A transient path stops once `e^{ξ_t} / (|Ψ'(0⁺)| I_t)` drops below this.
    /// The residual integral is heavy-tailed when the Cramér root is small,
    /// so the default is much tighter than the mean residual suggests.
    pub stop_epsilon: f64,
    pub max_steps: u64,
    /// Killing rate `q`.
    pub kill_rate: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { dt: 1e-3, stop_epsilon: 1e-10, max_steps: 2_000_000, kill_rate: 0.0 }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.stop_epsilon > 0.0 && self.stop_epsilon < 1.0) || self.max_steps == 0 {
            return Err(Error::Domain(format!("invalid path config {self:?}")));
        }
        if !(self.kill_rate >= 0.0) {
            return Err(Error::Domain(format!("kill rate must be >= 0 (got {})", self.kill_rate)));
        }
        Ok(())
    }
}

/// Jumps of one sign with `|y| ≥ ε`, drawn by inverting the tail.
#[derive(Clone)]
pub struct JumpSide {
    pub rate: f64,
    pub cutoff: f64,
    tail: RealFn,
    inverse: Option<RealFn>,
}

impl JumpSide {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.sample(Open01);
        let v = u * self.rate;
        if let Some(inv) = &self.inverse {
            return inv(v).max(self.cutoff);
        }
        // Bisection on the monotone tail.
        let mut lo = self.cutoff;
        let mut hi = self.cutoff.max(1.0) * 2.0;
        while (self.tail)(hi) > v && hi < 1e300 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (self.tail)(mid) > v {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Increment generator of a discretized Lévy process.
#[derive(Clone)]
pub enum IncrementSampler {
    BrownianDrift { a: f64, sigma: f64 },
    /// Strictly stable increments with positivity parameter `ρ`.
    Stable { alpha: f64, rho: f64 },
    /// Jumps of size `≥ ε` as compound Poisson, smaller jumps replaced by a
    /// variance-matched Gaussian.
    CompoundPoisson {
        drift: f64,
        sigma: f64,
        epsilon: f64,
        /// `∫_{|y|<ε} y² Π(dy)`.
        gaussian_correction: f64,
        plus: Option<JumpSide>,
        minus: Option<JumpSide>,
    },
}

impl core::fmt::Debug for IncrementSampler {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            IncrementSampler::BrownianDrift { a, sigma } => write!(f, "BrownianDrift(a={a}, sigma={sigma})"),
            IncrementSampler::Stable { alpha, rho } => write!(f, "Stable(alpha={alpha}, rho={rho})"),
            IncrementSampler::CompoundPoisson { drift, sigma, epsilon, gaussian_correction, plus, minus } => write!(
                f,
                "CompoundPoisson(drift={drift}, sigma={sigma}, eps={epsilon}, corr={gaussian_correction}, rate+={}, rate-={})",
                plus.as_ref().map_or(0.0, |s| s.rate),
                minus.as_ref().map_or(0.0, |s| s.rate)
            ),
        }
    }
}

/// Builds the increment sampler of `psi` with small-jump cutoff `epsilon`.
pub fn make_sampler(psi: &CharExponent, epsilon: f64) -> Result<IncrementSampler> {
    let Some(m) = &psi.measure else {
        return Ok(IncrementSampler::BrownianDrift { a: psi.drift, sigma: psi.gaussian });
    };
    if psi.kind == Kind::Brownian {
        return Ok(IncrementSampler::BrownianDrift { a: psi.drift, sigma: psi.gaussian });
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!("jump cutoff must lie in (0, 1] (got {epsilon})")));
    }
    let mut drift = psi.drift;
    let mut corr = 0.0;
    let mut side = |has: bool, sign: f64, tail: &RealFn, inv: &Option<RealFn>| -> Result<Option<JumpSide>> {
        if !has {
            return Ok(None);
        }
        let rate = tail(epsilon);
        if !rate.is_finite() {
            return Err(Error::InfiniteRate(epsilon));
        }
        drift -= sign * m.moment(1, epsilon, 1.0, sign)?;
        corr += m.moment(2, 0.0, epsilon, sign)?;
        Ok(Some(JumpSide { rate, cutoff: epsilon, tail: tail.clone(), inverse: inv.clone() }))
    };
    let plus = side(m.has_plus, 1.0, &m.tail_plus, &m.inv_tail_plus)?;
    let minus = side(m.has_minus, -1.0, &m.tail_minus, &m.inv_tail_minus)?;
    Ok(IncrementSampler::CompoundPoisson {
        drift,
        sigma: (psi.gaussian * psi.gaussian + corr).sqrt(),
        epsilon,
        gaussian_correction: corr,
        plus,
        minus,
    })
}

/// Standard strictly stable draw with `P(X > 0) = ρ` (Zolotarev's form of
/// the Chambers–Mallows–Stuck transform). For `α = 1` this is a Cauchy
/// variable shifted by `tan(π(ρ - 1/2))`.
pub fn stable_standard(alpha: f64, rho: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.sample(Open01);
    if alpha == 1.0 {
        return (PI * (u - 0.5)).tan() + (PI * (rho - 0.5)).tan();
    }
    let v = PI * (u - 0.5);
    let w: f64 = rng.sample(Exp1);
    let theta = PI * alpha * (rho - 0.5);
    let a = (alpha * v + theta).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v - theta).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Checks that `ρ` is a positivity parameter of a strictly `α`-stable law.
pub fn check_attainable(alpha: f64, rho: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 2) (got {alpha})")));
    }
    let ok = rho > 0.0 && rho < 1.0 && (alpha <= 1.0 || (rho >= 1.0 - 1.0 / alpha - 1e-15 && rho <= 1.0 / alpha + 1e-15));
    if !ok {
        return Err(Error::UnattainableRho { alpha, rho });
    }
    Ok(())
}

impl IncrementSampler {
    pub fn stable(alpha: f64, rho: f64) -> Result<Self> {
        check_attainable(alpha, rho)?;
        Ok(IncrementSampler::Stable { alpha, rho })
    }

    /// Increment over a time span `tau`.
    pub fn increment(&self, rng: &mut ChaCha8Rng, tau: f64) -> f64 {
        match self {
            IncrementSampler::BrownianDrift { a, sigma } => {
                let g: f64 = if *sigma > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
                a * tau + sigma * tau.sqrt() * g
            }
            IncrementSampler::Stable { alpha, rho } => {
                let x = stable_standard(*alpha, *rho, rng);
                tau.powf(1.0 / alpha) * x
            }
            IncrementSampler::CompoundPoisson { drift, sigma, plus, minus, .. } => {
                let g: f64 = if *sigma > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
                let mut x = drift * tau + sigma * tau.sqrt() * g;
                for (side, sign) in [(plus, 1.0), (minus, -1.0)] {
                    if let Some(s) = side {
                        let mut clock: f64 = rng.sample::<f64, _>(Exp1) / s.rate;
                        while clock <= tau {
                            x += sign * s.draw(rng);
                            clock += rng.sample::<f64, _>(Exp1) / s.rate;
                        }
                    }
                }
                x
            }
        }
    }
}

/// Sampler of the exponential functional of one exponent.
#[derive(Clone, Debug)]
pub struct ExpFunctional {
    pub increments: IncrementSampler,
    pub config: PathConfig,
    /// `|Ψ'(0⁺)|` when the process drifts to `-∞`, else 0.
    pub mean_rate: f64,
}

/// Sets up sampling of `I_Ψ`; fails unless `Ψ ∈ N`.
pub fn exp_functional(psi: &CharExponent, epsilon: f64, config: PathConfig) -> Result<ExpFunctional> {
    config.validate()?;
    let d = psi.derivative_at_zero()?;
    let q = config.kill_rate.max(psi.killing);
    if !(q > 0.0 || d < 0.0) {
        return Err(Error::NotInN(format!("{}: no killing and Psi'(0+) = {d}", psi.label)));
    }
    let increments = make_sampler(psi, epsilon)?;
    Ok(ExpFunctional {
        increments,
        config: PathConfig { kill_rate: q, ..config },
        mean_rate: if d < 0.0 { -d } else { 0.0 },
    })
}

impl ExpFunctional {
    /// One path; the flag is set when the step limit was reached.
    pub fn path(&self, rng: &mut ChaCha8Rng) -> (f64, bool) {
        let cfg = &self.config;
        let horizon = if cfg.kill_rate > 0.0 {
            rng.sample::<f64, _>(Exp1) / cfg.kill_rate
        } else {
            f64::INFINITY
        };
        let (mut t, mut xi, mut integral, mut prev) = (0.0, 0.0, 0.0, 1.0);
        let mut steps = 0u64;
        loop {
            let tau = cfg.dt.min(horizon - t);
            if !(tau > 0.0) {
                return (integral, false);
            }
            xi += self.increments.increment(rng, tau);
            let e = xi.exp();
            integral += 0.5 * tau * (prev + e);
            prev = e;
            t += tau;
            steps += 1;
            if t >= horizon {
                return (integral, false);
            }
            if self.mean_rate > 0.0 && e < cfg.stop_epsilon * self.mean_rate * integral {
                return (integral, false);
            }
            if steps >= cfg.max_steps {
                return (integral, true);
            }
        }
    }
}

impl ChunkedSampler for ExpFunctional {
    fn fill(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<usize> {
        let mut flagged = 0;
        for v in out.iter_mut() {
            let (i, f) = self.path(rng);
            if !(i > 0.0 && i.is_finite()) {
                return Err(Error::NonFinite("exponential functional"));
            }
            *v = i;
            flagged += f as usize;
        }
        Ok(flagged)
    }

    fn chunk_len(&self) -> usize {
        64
    }
}

/// Fails when more than 1% of a batch hit the step limit.
pub fn check_exhaustion(flagged: usize, total: usize) -> Result<()> {
    if flagged * 100 > total {
        return Err(Error::StepLimit { exhausted: flagged, total });
    }
    Ok(())
}

/// Supremum over the grid `{k/n}` of a strictly stable process on `[0, 1]`.
///
/// The grid maximum underestimates the true supremum; the bias shrinks as
/// `n` grows. With `coupled = true` each path emits two values, the supremum
/// on `n` steps followed by the supremum over the even grid points of the
/// same path (i.e. on `n/2` steps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableSupremum {
    pub alpha: f64,
    pub rho: f64,
    pub n_steps: u64,
    pub coupled: bool,
}

pub fn stable_supremum(alpha: f64, rho: f64, n_steps: u64, coupled: bool) -> Result<StableSupremum> {
    check_attainable(alpha, rho)?;
    if n_steps == 0 || (coupled && n_steps % 2 == 1) {
        return Err(Error::Domain(format!("invalid step count {n_steps}")));
    }
    Ok(StableSupremum { alpha, rho, n_steps, coupled })
}

impl StableSupremum {
    fn path(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let (mut s, mut fine, mut coarse) = (0.0f64, 0.0f64, 0.0f64);
        for k in 1..=self.n_steps {
            s += stable_standard(self.alpha, self.rho, rng);
            fine = fine.max(s);
            if k % 2 == 0 {
                coarse = coarse.max(s);
            }
        }
        let scale = (self.n_steps as f64).powf(-1.0 / self.alpha);
        (fine * scale, coarse * scale)
    }
}

impl ChunkedSampler for StableSupremum {
    fn fill(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<usize> {
        if self.coupled {
            for pair in out.chunks_mut(2) {
                let (f, c) = self.path(rng);
                pair[0] = f;
                if pair.len() > 1 {
                    pair[1] = c;
                }
            }
        } else {
            for v in out.iter_mut() {
                *v = self.path(rng).0;
            }
        }
        Ok(0)
    }

    fn chunk_len(&self) -> usize {
        if self.coupled {
            64
        } else {
            32
        }
    }
}

/// Exact law `2/(σ² G_{-2a/σ²})` of `∫_0^∞ e^{σB_t + at} dt`.
pub fn dufresne_oracle(a: f64, sigma: f64) -> Result<ClosedFormLaw> {
    laws::dufresne_law(a, sigma)
}
