//! Lévy–Khintchine exponents
//!
//! `Ψ(z) = -q + a z + σ²z²/2 + ∫ (e^{zy} - 1 - zy 1_{|y|<1}) Π(dy)`
//!
//! An exponent carries its quadruplet, a functional description of the Lévy
//! measure and optionally a closed form that takes precedence over
//! quadrature. The `T_β` tilt and duality act on both representations.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{cx, gamma_ratio, gamma_real, Complex};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(Complex) -> Result<Complex> + Send + Sync>;

const QUAD_TOL: f64 = 1e-13;
/// Distance to a removable singularity below which the limit is returned.
pub const REMOVABLE_TOL: f64 = 1e-9;

/// Lévy measure given by its density on `ℝ∖{0}` and both tails.
#[derive(Clone)]
pub struct LevyMeasure {
    /// Density at `x ≠ 0` (negative `x` for negative jumps).
    pub density: RealFn,
    /// `Π̄₊(y) = Π((y, ∞))`, `y > 0`.
    pub tail_plus: RealFn,
    /// `Π̄₋(y) = Π((-∞, -y))`, `y > 0`.
    pub tail_minus: RealFn,
    pub inv_tail_plus: Option<RealFn>,
    pub inv_tail_minus: Option<RealFn>,
    /// `∫_{y>1} e^{uy} Π(dy) < ∞` for `u < barrier_plus`.
    pub barrier_plus: f64,
    /// `∫_{y<-1} e^{uy} Π(dy) < ∞` for `u > -barrier_minus`.
    pub barrier_minus: f64,
    pub has_plus: bool,
    pub has_minus: bool,
}

impl LevyMeasure {
    /// Reflection `y ↦ -y`.
    pub fn reflect(&self) -> LevyMeasure {
        let d = self.density.clone();
        LevyMeasure {
            density: Arc::new(move |y| d(-y)),
            tail_plus: self.tail_minus.clone(),
            tail_minus: self.tail_plus.clone(),
            inv_tail_plus: self.inv_tail_minus.clone(),
            inv_tail_minus: self.inv_tail_plus.clone(),
            barrier_plus: self.barrier_minus,
            barrier_minus: self.barrier_plus,
            has_plus: self.has_minus,
            has_minus: self.has_plus,
        }
    }

    /// `∫ (e^{zy} - 1 - zy 1_{|y|<1}) Π(dy)`.
    pub fn compensated_integral(&self, z: Complex) -> Result<Complex> {
        let mut total = cx(0.0, 0.0);
        if self.has_plus {
            total += half_integral(&*self.density, z, 1.0)?;
        }
        if self.has_minus {
            let d = &self.density;
            total += half_integral(&|y: f64| d(-y), -z, 1.0)?;
        }
        Ok(total)
    }

    /// `∫_{lo ≤ |y| < hi} y^k Π(dy)` on one side (`sign = ±1`).
    pub fn moment(&self, k: i32, lo: f64, hi: f64, sign: f64) -> Result<f64> {
        if !(hi > lo) {
            return Ok(0.0);
        }
        let d = &self.density;
        let dens = |y: f64| d(sign * y);
        let f = |y: f64| y.powi(k) * dens(y);
        if lo == 0.0 {
            let head = near_origin(&dens, |y| cx(y.powi(k), 0.0), cx(1.0, 0.0), k as f64, hi.min(1.0))?.re;
            let rest = if hi > 1.0 { self.moment(k, 1.0, hi, sign)? } else { 0.0 };
            return Ok(head + rest);
        }
        if hi.is_infinite() {
            quad::integrate_real(f, lo, f64::INFINITY, 1e-12)
        } else {
            quad::integrate_real(f, lo, hi, 1e-12)
        }
    }
}

/// `ln(e^t - 1)` for `t > 0` without overflow.
fn ln_exp_m1(t: f64) -> f64 {
    if t > 30.0 {
        t + (-(-t).exp()).ln_1p()
    } else {
        t.exp_m1().ln()
    }
}

/// `e^w - 1 - w` without cancellation for small `|w|`.
fn exp_m1_m_id(w: Complex) -> Complex {
    if w.norm() < 0.1 {
        let mut term = w * w * 0.5;
        let mut sum = term;
        for k in 3..20 {
            term = term * w / k as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        w.exp() - 1.0 - w
    }
}

/// Below this the density is replaced by its fitted power law.
const ORIGIN_CUT: f64 = 1e-12;

/// `∫_0^hi h(y) π(y) dy`, `hi ≤ 1`, where `h(y) ≈ c y^k` near 0 and `π` may blow up
/// like a power at the origin. The piece below [`ORIGIN_CUT`] is integrated
/// against the fitted power law `C y^{-e}`, the rest in the variable
/// `v = -ln y`, where a power singularity becomes a smooth exponential.
fn near_origin<H>(density: &dyn Fn(f64) -> f64, h: H, c: Complex, k: f64, hi: f64) -> Result<Complex>
where
    H: Fn(f64) -> Complex,
{
    let d = ORIGIN_CUT.min(0.5 * hi);
    let (p1, p2) = (density(d), density(0.5 * d));
    let mut head = cx(0.0, 0.0);
    if p1 > 0.0 && p2 > 0.0 {
        let e = (p2 / p1).ln() / core::f64::consts::LN_2;
        let big_c = p1 * d.powf(e);
        if k + 1.0 - e <= 0.0 {
            return Err(Error::Domain(format!("Levy density too singular at 0 (exponent {e})")));
        }
        head = c * (big_c * d.powf(k + 1.0 - e) / (k + 1.0 - e));
    }
    let tail = quad::tanh_sinh(
        |v| {
            let y = (-v).exp();
            let p = density(y);
            if p == 0.0 {
                return cx(0.0, 0.0);
            }
            h(y) * (p * y)
        },
        -hi.ln(),
        -d.ln(),
        QUAD_TOL,
    )?;
    Ok(head + tail.value)
}

/// `∫_0^∞ (e^{zy} - 1 - zy 1_{y<1}) π(y) dy` for a density on `(0, ∞)`.
fn half_integral(density: &dyn Fn(f64) -> f64, z: Complex, cut: f64) -> Result<Complex> {
    let near = near_origin(density, |y| exp_m1_m_id(z * y), z * z * 0.5, 2.0, cut)?;
    let f = |y: f64| {
        let p = density(y);
        if p == 0.0 {
            return cx(0.0, 0.0);
        }
        let e = z * y;
        if e.re > 700.0 {
            // e^{zy} overflows before a light tail underflows.
            return (e + p.ln()).exp() - p;
        }
        (e.exp() - 1.0) * p
    };
    if z.im.abs() < 1e-3 {
        return Ok(near + quad::exp_sinh(f, cut, QUAD_TOL)?.value);
    }
    // Oscillatory and possibly slowly decaying: a few periods at a time,
    // then exp-sinh once the segments stop contributing.
    let width = (4.0 * PI / z.im.abs()).clamp(1.0, 16.0);
    let mut a = cut;
    let mut far = cx(0.0, 0.0);
    let mut quiet = 0;
    for _ in 0..MAX_SEGMENTS {
        let floor = QUAD_TOL * (near.norm() + far.norm());
        let seg = quad::tanh_sinh_floor(|y, _| f(y), a, a + width, QUAD_TOL, floor)?.value;
        far += seg;
        a += width;
        quiet = if seg.norm() <= 1e-15 * far.norm() { quiet + 1 } else { 0 };
        if quiet >= 2 {
            break;
        }
    }
    let rest = quad::exp_sinh(f, a, QUAD_TOL)?.value;
    Ok(near + far + rest)
}

const MAX_SEGMENTS: usize = 400;

/// What an exponent was built from. Used by samplers and printers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Brownian,
    SpectrallyPositive { alpha: f64 },
    Lamperti { alpha: f64, rho: f64 },
    TiltedStable { alpha: f64, rho: f64 },
    Tilted { beta: f64 },
    Dual,
    Quadruplet,
}

/// A Lévy–Khintchine exponent.
#[derive(Clone)]
pub struct CharExponent {
    pub label: String,
    pub kind: Kind,
    pub killing: f64,
    pub drift: f64,
    pub gaussian: f64,
    pub measure: Option<LevyMeasure>,
    /// Open interval of `Re z` on which `Ψ` is analytic.
    pub strip: (f64, f64),
    pub closed_form: Option<ComplexFn>,
}

impl fmt::Debug for CharExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharExponent")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("killing", &self.killing)
            .field("drift", &self.drift)
            .field("gaussian", &self.gaussian)
            .field("has_measure", &self.measure.is_some())
            .field("strip", &self.strip)
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl CharExponent {
    /// Exponent defined by a quadruplet; evaluated by quadrature.
    pub fn quadruplet(killing: f64, drift: f64, gaussian: f64, measure: Option<LevyMeasure>) -> Result<Self> {
        if !(killing >= 0.0) || !(gaussian >= 0.0) || !drift.is_finite() {
            return Err(Error::Domain(format!(
                "quadruplet needs q >= 0, sigma >= 0, finite a (got {killing}, {gaussian}, {drift})"
            )));
        }
        let strip = match &measure {
            Some(m) => (
                if m.has_minus { -m.barrier_minus } else { f64::NEG_INFINITY },
                if m.has_plus { m.barrier_plus } else { f64::INFINITY },
            ),
            None => (f64::NEG_INFINITY, f64::INFINITY),
        };
        let kind = if measure.is_none() { Kind::Brownian } else { Kind::Quadruplet };
        Ok(CharExponent {
            label: format!("quadruplet(q={killing},a={drift},sigma={gaussian})"),
            kind,
            killing,
            drift,
            gaussian,
            measure,
            strip,
            closed_form: None,
        })
    }

    /// `Ψ(z)` with a strip check.
    pub fn eval(&self, z: Complex) -> Result<Complex> {
        let (lo, hi) = self.strip;
        if z.re < lo - 1e-12 || z.re > hi + 1e-12 {
            return Err(Error::Strip { re: z.re, lo, hi });
        }
        self.value(z)
    }

    /// `Ψ(z)` without the strip check (analytic continuation of a closed form).
    pub fn value(&self, z: Complex) -> Result<Complex> {
        let v = match &self.closed_form {
            Some(f) => f(z)?,
            None => self.eval_quadrature(z)?,
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite("exponent value"));
        }
        Ok(v)
    }

    /// Quadrature evaluation of the Lévy–Khintchine formula, ignoring any
    /// closed form.
    pub fn eval_quadrature(&self, z: Complex) -> Result<Complex> {
        let mut v = -self.killing + z * self.drift + z * z * (0.5 * self.gaussian * self.gaussian);
        if let Some(m) = &self.measure {
            v += m.compensated_integral(z)?;
        }
        Ok(v)
    }

    pub fn eval_real(&self, u: f64) -> Result<f64> {
        self.eval(cx(u, 0.0)).map(|v| v.re)
    }

    /// Upper end of the real analyticity interval.
    pub fn barrier(&self) -> f64 {
        self.strip.1
    }

    /// One-sided derivative at `0⁺` by Richardson-extrapolated differences.
    pub fn derivative_at_zero(&self) -> Result<f64> {
        let p0 = self.value(cx(0.0, 0.0))?.re;
        let d = |h: f64| -> Result<f64> { Ok((self.value(cx(h, 0.0))?.re - p0) / h) };
        let d1 = d(1e-4)?;
        let d2 = d(1e-5)?;
        Ok((10.0 * d2 - d1) / 9.0)
    }

    fn with_closed<F>(mut self, f: F) -> Self
    where
        F: Fn(Complex) -> Result<Complex> + Send + Sync + 'static,
    {
        self.closed_form = Some(Arc::new(f));
        self
    }
}

/// Mean of `f` over a circle: the value at the centre for analytic `f`.
fn circle_mean<F: Fn(Complex) -> Result<Complex>>(f: F, centre: Complex, r: f64) -> Result<Complex> {
    let n = 32;
    let mut acc = cx(0.0, 0.0);
    for k in 0..n {
        let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        acc += f(centre + Complex::from_polar(r, t))?;
    }
    Ok(acc / n as f64)
}

/// Drift making the quadrature representation agree with `closed` at `z = i`.
fn fit_drift(closed: &ComplexFn, measure: &Option<LevyMeasure>, killing: f64, gaussian: f64) -> Result<f64> {
    let i = cx(0.0, 1.0);
    let target = closed(i)?;
    let mut rest = cx(-killing - 0.5 * gaussian * gaussian, 0.0);
    if let Some(m) = measure {
        rest += m.compensated_integral(i)?;
    }
    Ok(target.im - rest.im)
}

/// Brownian motion with drift `a` and Gaussian coefficient `σ`.
pub fn brownian(a: f64, sigma: f64) -> Result<CharExponent> {
    brownian_killed(a, sigma, 0.0)
}

/// Brownian motion with drift, killed at rate `q`.
pub fn brownian_killed(a: f64, sigma: f64, q: f64) -> Result<CharExponent> {
    let mut psi = CharExponent::quadruplet(q, a, sigma, None)?;
    psi.label = if q > 0.0 {
        format!("brownian(a={a},sigma={sigma},q={q})")
    } else {
        format!("brownian(a={a},sigma={sigma})")
    };
    Ok(psi.with_closed(move |z| Ok(z * a + z * z * (0.5 * sigma * sigma) - q)))
}

fn check_alpha(alpha: f64, hi: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < hi) {
        return Err(Error::Domain(format!("alpha must lie in (0, {hi}) (got {alpha})")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1) (got {rho})")));
    }
    Ok(())
}

/// Lévy measure of the spectrally positive exponent tilted by `β`, in log
/// space: with `u = 1 - e^{-y/α}` and `c = 1/Γ(1-α)`, density
/// `c e^{(β-(1+α)/α)y} u^{-(2+α)} ((1+α)/α - βu)` and tail
/// `c e^{(β-(1+α)/α)y} u^{-(1+α)}`.
fn sp_measure(alpha: f64, beta: f64) -> Result<LevyMeasure> {
    let ln_c = -crate::special::ln_gamma(1.0 - alpha)?;
    let rate = beta - (1.0 + alpha) / alpha;
    let density: RealFn = Arc::new(move |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        let u = -(-y / alpha).exp_m1();
        let bracket = (1.0 + alpha) / alpha - beta * u;
        (ln_c + rate * y - (2.0 + alpha) * u.ln() + bracket.ln()).exp()
    });
    let tail: RealFn = Arc::new(move |y: f64| {
        if y <= 0.0 {
            return f64::INFINITY;
        }
        let u = -(-y / alpha).exp_m1();
        (ln_c + rate * y - (1.0 + alpha) * u.ln()).exp()
    });
    let zero: RealFn = Arc::new(|_| 0.0);
    Ok(LevyMeasure {
        density,
        tail_plus: tail,
        tail_minus: zero,
        inv_tail_plus: None,
        inv_tail_minus: None,
        barrier_plus: -rate,
        barrier_minus: f64::INFINITY,
        has_plus: true,
        has_minus: false,
    })
}

/// `Ψ(z) = Γ(1+α-αz) / (α Γ(-αz))`, the spectrally positive exponent whose
/// exponential functional is Fréchet distributed.
pub fn spectrally_positive(alpha: f64) -> Result<CharExponent> {
    check_alpha(alpha, 1.0)?;
    let mut measure = sp_measure(alpha, 0.0)?;
    let c = 1.0 / gamma_real(1.0 - alpha)?;
    let inv: RealFn = Arc::new(move |v: f64| {
        let r = (v / c).powf(1.0 / (alpha + 1.0));
        alpha * (1.0 / r).ln_1p()
    });
    measure.inv_tail_plus = Some(inv);
    let closed: ComplexFn = Arc::new(move |z: Complex| {
        let w = -alpha * z;
        Ok(gamma_ratio(1.0 + alpha + w, w)? / alpha)
    });
    let measure = Some(measure);
    let drift = fit_drift(&closed, &measure, 0.0, 0.0)?;
    Ok(CharExponent {
        label: format!("spectrally-positive(alpha={alpha})"),
        kind: Kind::SpectrallyPositive { alpha },
        killing: 0.0,
        drift,
        gaussian: 0.0,
        measure,
        strip: (f64::NEG_INFINITY, 1.0 + 1.0 / alpha),
        closed_form: Some(closed),
    })
}

/// Lamperti-stable exponent
/// `Ψ(z) = -Γ(1+αz)Γ(α-αz) / (Γ(1-αρ+αz)Γ(αρ-αz))`, analytic on `Re z ∈ (-1/α, 1)`.
pub fn lamperti_stable(alpha: f64, rho: f64) -> Result<CharExponent> {
    check_alpha(alpha, 2.0)?;
    check_rho(rho)?;
    if alpha * rho > 1.0 || alpha * (1.0 - rho) > 1.0 {
        return Err(Error::Domain(format!(
            "Lamperti-stable exponent needs alpha*rho <= 1 and alpha*(1-rho) <= 1 (got {alpha}, {rho})"
        )));
    }
    let g1 = gamma_real(1.0 + alpha)?;
    let c_plus = g1 * (PI * alpha * (1.0 - rho)).sin() / PI;
    let c_minus = g1 * (PI * alpha * rho).sin() / PI;
    let density: RealFn = Arc::new(move |x: f64| {
        if x > 0.0 {
            let t = x / alpha;
            ((c_plus / alpha).ln() + t - (alpha + 1.0) * ln_exp_m1(t)).exp()
        } else if x < 0.0 {
            let e = -(x / alpha).exp_m1();
            (c_minus / alpha) * (x / alpha).exp() * e.powf(-alpha - 1.0)
        } else {
            0.0
        }
    });
    let tail_plus: RealFn = Arc::new(move |y: f64| ((c_plus / alpha).ln() - alpha * ln_exp_m1(y / alpha)).exp());
    let tail_minus: RealFn =
        Arc::new(move |y: f64| (c_minus / alpha) * ((-(-y / alpha).exp_m1()).powf(-alpha) - 1.0));
    let inv_plus: RealFn = Arc::new(move |v: f64| alpha * (v * alpha / c_plus).powf(-1.0 / alpha).ln_1p());
    let inv_minus: RealFn = Arc::new(move |v: f64| {
        let t = -(-(v * alpha / c_minus).ln_1p() / alpha).exp_m1();
        -alpha * t.ln()
    });
    let measure = Some(LevyMeasure {
        density,
        tail_plus,
        tail_minus,
        inv_tail_plus: Some(inv_plus),
        inv_tail_minus: Some(inv_minus),
        barrier_plus: 1.0,
        barrier_minus: 1.0 / alpha,
        has_plus: c_plus > 0.0,
        has_minus: c_minus > 0.0,
    });
    let closed: ComplexFn = Arc::new(move |z: Complex| {
        let a = gamma_ratio(1.0 + alpha * z, 1.0 - alpha * rho + alpha * z)?;
        let b = gamma_ratio(alpha - alpha * z, alpha * rho - alpha * z)?;
        Ok(-a * b)
    });
    let killing = c_minus / alpha;
    let drift = fit_drift(&closed, &measure, killing, 0.0)?;
    Ok(CharExponent {
        label: format!("lamperti(alpha={alpha},rho={rho})"),
        kind: Kind::Lamperti { alpha, rho },
        killing,
        drift,
        gaussian: 0.0,
        measure,
        strip: (-1.0 / alpha, 1.0),
        closed_form: Some(closed),
    })
}

/// `Ψ(z) = z Γ(α-αρ+αz) / Γ(-αρ+αz)`: the dual of the spectrally positive
/// exponent tilted by `ρ + 1/α`. Spectrally negative, conservative, zero at `ρ`.
pub fn tilted_stable(alpha: f64, rho: f64) -> Result<CharExponent> {
    check_alpha(alpha, 1.0)?;
    check_rho(rho)?;
    let base = spectrally_positive(alpha)?;
    let mut psi = dual(&tilt(&base, rho + 1.0 / alpha)?);
    psi.closed_form = Some(Arc::new(move |z: Complex| {
        let a = alpha * (z - rho);
        Ok(z * gamma_ratio(alpha + a, a)?)
    }));
    psi.label = format!("tilted-stable(alpha={alpha},rho={rho})");
    psi.kind = Kind::TiltedStable { alpha, rho };
    psi.strip = (rho - 1.0, f64::INFINITY);
    psi.killing = 0.0;
    Ok(psi)
}

/// Dual exponent `z ↦ Ψ(-z)`.
pub fn dual(psi: &CharExponent) -> CharExponent {
    let inner = psi.clone();
    CharExponent {
        label: format!("dual({})", psi.label),
        kind: if psi.kind == Kind::Brownian { Kind::Brownian } else { Kind::Dual },
        killing: psi.killing,
        drift: -psi.drift,
        gaussian: psi.gaussian,
        measure: psi.measure.as_ref().map(LevyMeasure::reflect),
        strip: (-psi.strip.1, -psi.strip.0),
        closed_form: Some(Arc::new(move |z: Complex| inner.value(-z))),
    }
}

/// `lim_{u↑0} u Ψ(u + β)` extrapolated from `u ∈ {-1e-3, -1e-4, -1e-5}`
/// (quadratic through the three points, exact for Ψ analytic at β).
pub fn pole_residue_limit(psi: &CharExponent, beta: f64) -> Result<f64> {
    let us = [-1e-3, -1e-4, -1e-5];
    let mut vs = [0.0; 3];
    for (k, &u) in us.iter().enumerate() {
        vs[k] = u * psi.value(cx(u + beta, 0.0))?.re;
    }
    let mut out = 0.0;
    for j in 0..3 {
        let mut l = 1.0;
        for m in 0..3 {
            if m != j {
                l *= us[m] / (us[m] - us[j]);
            }
        }
        out += l * vs[j];
    }
    Ok(out)
}

/// Outcome of the tail-monotonicity test of `y ↦ e^{βy} Π̄₊(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMonotonicity {
    pub monotone: bool,
    /// Largest relative increase between consecutive grid points.
    pub worst_increase: f64,
    pub worst_at: f64,
}

/// Checks that `e^{βy} Π̄₊(y)` is non-increasing on a 200-point log grid over
/// `[1e-4, 50]`. Increases above `1e-10` but below `1e-7` (relative) are
/// reported as inconclusive.
pub fn tail_monotonicity(psi: &CharExponent, beta: f64) -> Result<TailMonotonicity> {
    let Some(m) = &psi.measure else {
        return Ok(TailMonotonicity { monotone: true, worst_increase: 0.0, worst_at: 0.0 });
    };
    if !m.has_plus {
        return Ok(TailMonotonicity { monotone: true, worst_increase: 0.0, worst_at: 0.0 });
    }
    let n = 200;
    let (a, b) = (1e-4f64.ln(), 50f64.ln());
    let g = |y: f64| -> f64 {
        let t = (m.tail_plus)(y);
        if t <= 0.0 {
            0.0
        } else {
            (beta * y + t.ln()).exp()
        }
    };
    let mut prev = g(1e-4);
    let mut worst = 0.0;
    let mut worst_at = 0.0;
    for k in 1..n {
        let y = (a + (b - a) * k as f64 / (n - 1) as f64).exp();
        let cur = g(y);
        if !cur.is_finite() {
            return Err(Error::NonFinite("tilted tail"));
        }
        let inc = (cur - prev) / prev.abs().max(1e-300);
        if inc > worst {
            worst = inc;
            worst_at = y;
        }
        prev = cur;
    }
    if worst > 1e-10 && worst <= 1e-7 {
        return Err(Error::InconclusiveGrid { at: worst_at, violation: worst });
    }
    Ok(TailMonotonicity { monotone: worst <= 1e-10, worst_increase: worst, worst_at })
}

/// Root data of `Ψ` on `(0, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootInfo {
    /// Largest zero on the real analyticity interval, `+∞` if none.
    pub rho: f64,
    pub derivative_at_zero_plus: f64,
    /// `Ψ(0) < 0`.
    pub killing_negative: bool,
}

/// `ρ = sup{u ∈ (0, β) : Ψ(u) = 0}` by grid bracketing and bisection.
pub fn find_rho(psi: &CharExponent) -> Result<RootInfo> {
    let d0 = psi.derivative_at_zero()?;
    let p0 = psi.value(cx(0.0, 0.0))?.re;
    let info = |rho| RootInfo { rho, derivative_at_zero_plus: d0, killing_negative: p0 < 0.0 };
    let f = |u: f64| -> Result<f64> { psi.value(cx(u, 0.0)).map(|v| v.re) };
    let hi = psi.strip.1;
    let upper = if hi.is_finite() {
        hi
    } else {
        let mut u = 1.0;
        loop {
            if f(u)? > 0.0 || u > 1e6 {
                break u * 1.5;
            }
            u *= 2.0;
        }
    };
    let us: Vec<f64> = (1..=400).map(|k| upper * k as f64 / 401.0).collect();
    let mut vals = Vec::with_capacity(us.len());
    for &u in &us {
        match f(u) {
            Ok(v) => vals.push(v),
            // Right at a barrier a user density can underflow before e^{uy}
            // overflows; the grid then stops short of the edge.
            Err(_) if hi.is_finite() && u > 0.9 * upper && vals.len() >= 3 => break,
            Err(e) => return Err(e),
        }
    }
    let n = vals.len();
    let us = &us[..n];
    for k in 1..n - 1 {
        let dd = vals[k - 1] - 2.0 * vals[k] + vals[k + 1];
        let scale = vals[k - 1].abs().max(vals[k].abs()).max(vals[k + 1].abs()).max(1.0);
        if dd < -1e-8 * scale {
            return Err(Error::NonConvex { at: us[k] });
        }
    }
    let mut bracket = None;
    for k in (0..n - 1).rev() {
        if vals[k] <= 0.0 && vals[k + 1] > 0.0 {
            bracket = Some((us[k], us[k + 1]));
            break;
        }
    }
    if bracket.is_none() && vals[n - 1] <= 0.0 && hi.is_finite() {
        // Between the last grid point and a pole at the barrier.
        let mut step = hi - us[n - 1];
        let mut lo = us[n - 1];
        for _ in 0..50 {
            step *= 0.5;
            let u = hi - step;
            match f(u) {
                Ok(v) if v > 0.0 => {
                    bracket = Some((lo, u));
                    break;
                }
                Ok(_) => lo = u,
                Err(_) => break,
            }
        }
    }
    let Some((mut a, mut b)) = bracket else {
        return Ok(info(f64::INFINITY));
    };
    if vals[0] > 0.0 && a == us[0] && f(a)? > 0.0 {
        return Ok(info(f64::INFINITY));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m)? <= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let rho = if f(a)?.abs() <= f(b)?.abs() { a } else { b };
    Ok(info(rho))
}

/// Membership in `N`, `N_β` and `N_β(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub in_n: bool,
    pub in_n_beta: bool,
    pub in_n_beta_rho: bool,
    pub rho: f64,
    pub rho_below_beta: bool,
    pub derivative_at_zero_plus: f64,
    pub tail: TailMonotonicity,
    /// `lim_{u↑0} u Ψ(u+β)`.
    pub pole_limit: f64,
}

pub fn classify(psi: &CharExponent, beta: f64) -> Result<Membership> {
    if !(beta > 0.0) || beta > psi.strip.1 + 1e-12 {
        return Err(Error::Domain(format!(
            "beta = {beta} must lie in (0, {}] for {}",
            psi.strip.1, psi.label
        )));
    }
    let root = find_rho(psi)?;
    let in_n = psi.killing > 0.0 || root.killing_negative || root.derivative_at_zero_plus < 0.0;
    let in_n_beta = in_n && psi.barrier() >= beta - 1e-12;
    let tail = tail_monotonicity(psi, beta)?;
    let pole_limit = pole_residue_limit(psi, beta)?;
    let limit_ok = pole_limit.is_finite() && pole_limit <= 1e-8;
    let in_n_beta_rho = in_n_beta && root.rho.is_finite() && tail.monotone && limit_ok;
    Ok(Membership {
        in_n,
        in_n_beta,
        in_n_beta_rho,
        rho: root.rho,
        rho_below_beta: root.rho < beta,
        derivative_at_zero_plus: root.derivative_at_zero_plus,
        tail,
        pole_limit,
    })
}

/// `T_βΨ(z) = z Ψ(z+β) / (z+β)` with the transformed Lévy measure.
pub fn tilt(psi: &CharExponent, beta: f64) -> Result<CharExponent> {
    if !(beta > 0.0) {
        return Err(Error::InadmissibleTilt(format!("beta must be positive (got {beta})")));
    }
    if psi.barrier() < beta - 1e-12 {
        return Err(Error::InadmissibleTilt(format!(
            "no exponential moments up to beta = {beta} (barrier {})",
            psi.barrier()
        )));
    }
    let tail = match tail_monotonicity(psi, beta) {
        Ok(t) => t,
        Err(e) => return Err(Error::InadmissibleTilt(e.to_string())),
    };
    if !tail.monotone {
        return Err(Error::InadmissibleTilt(format!(
            "e^(beta y) tail_plus(y) increases by {:e} near y = {}",
            tail.worst_increase, tail.worst_at
        )));
    }
    let analytic_at_beta = beta < psi.strip.1 - REMOVABLE_TOL;
    let q_beta = if analytic_at_beta {
        0.0
    } else {
        let inner = psi.clone();
        circle_mean(move |u| Ok(u * inner.value(u + beta)? / (u + beta)), cx(0.0, 0.0), 1e-3)?.re
    };
    if !(q_beta.is_finite() && q_beta <= 1e-10) {
        return Err(Error::InadmissibleTilt(format!("limit q_beta = {q_beta} is not in (-inf, 0]")));
    }
    let q_beta = q_beta.min(0.0);
    let killing = psi.killing;
    let inner = psi.clone();
    let closed: ComplexFn = Arc::new(move |z: Complex| {
        if z.norm() < REMOVABLE_TOL {
            return Ok(cx(q_beta, 0.0));
        }
        let w = z + beta;
        if w.norm() < REMOVABLE_TOL && killing == 0.0 {
            let inner = inner.clone();
            return circle_mean(move |u| Ok(u * inner.value(u + beta)? / (u + beta)), cx(-beta, 0.0), 1e-3);
        }
        Ok(z * inner.value(w)? / w)
    });
    let l = -q_beta;
    let mut measure = match psi.kind {
        Kind::SpectrallyPositive { alpha } if analytic_at_beta => Some(sp_measure(alpha, beta)?),
        _ if psi.measure.is_some() || killing > 0.0 => Some(tilt_measure(psi.measure.as_ref(), killing, beta, l)),
        _ => None,
    };
    let mut hi = psi.strip.1 - beta;
    if !analytic_at_beta {
        // β sits on a pole of Ψ: the tilted tail decays strictly faster and
        // its rate is read off numerically.
        hi = match measure.as_mut() {
            Some(m) if m.has_plus => {
                m.barrier_plus = tail_decay_rate(&*m.tail_plus);
                m.barrier_plus
            }
            _ => f64::INFINITY,
        };
    }
    // A killed Ψ makes -β a pole of T_βΨ.
    let lo = if killing > 0.0 { (psi.strip.0 - beta).max(-beta) } else { psi.strip.0 - beta };
    let drift = fit_drift(&closed, &measure, l, psi.gaussian)?;
    let kind = if measure.is_none() { Kind::Brownian } else { Kind::Tilted { beta } };
    Ok(CharExponent {
        label: format!("tilt({}, beta={beta})", psi.label),
        kind,
        killing: l,
        drift,
        gaussian: psi.gaussian,
        measure,
        strip: (lo, hi),
        closed_form: Some(closed),
    })
}

/// Exponential decay rate of a tail, from its slope where it has fallen to
/// about `1e-9` of its value at 1.
fn tail_decay_rate(tail: &dyn Fn(f64) -> f64) -> f64 {
    let t1 = tail(1.0);
    if !(t1 > 0.0) {
        return f64::INFINITY;
    }
    let mut last = 1;
    for k in 2..=200 {
        let t = tail(k as f64);
        if !(t > 1e-9 * t1) {
            break;
        }
        last = k;
    }
    if last < 5 {
        // Faster than e^{-5y}: resolve on a finer grid.
        let (a, b) = (0.5, 1.0);
        return (tail(a) / tail(b)).ln() / (b - a);
    }
    let (a, b) = ((last - 4) as f64, last as f64);
    (tail(a) / tail(b)).ln() / (b - a)
}

/// `a - b` with results below the rounding noise of the operands set to 0.
/// The operands come from `exp` of arguments of size about `y`, so their
/// rounding grows with `y`.
fn cancel(a: f64, b: f64, y: f64) -> f64 {
    let v = a - b;
    if v.abs() <= 1e-14 * (8.0 + y.abs()) * a.abs().max(b.abs()) {
        0.0
    } else {
        v
    }
}

fn scaled(log_factor: f64, v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        (log_factor + v.ln()).exp()
    }
}

/// Transformed measure: density `e^{βy}(π(y) + β(Π̄₋(|y|) + q)1_{y<0} - βΠ̄₊(y)1_{y>0})`,
/// tails `e^{βy}Π̄₊(y) - L` and `e^{-βy}(Π̄₋(y) + q)`.
///
/// For `y > 0` the density is a difference of nearly equal terms once
/// `e^{βy}π(y)` flattens out, so quadrature of the tilted exponent loses
/// digits as `Re z` approaches the new barrier.
fn tilt_measure(m: Option<&LevyMeasure>, q: f64, beta: f64, l: f64) -> LevyMeasure {
    let zero: RealFn = Arc::new(|_| 0.0);
    let (density, tail_plus, tail_minus, bp, bm, hp, hm) = match m {
        Some(m) => (
            m.density.clone(),
            m.tail_plus.clone(),
            m.tail_minus.clone(),
            m.barrier_plus,
            m.barrier_minus,
            m.has_plus,
            m.has_minus,
        ),
        None => (zero.clone(), zero.clone(), zero, f64::INFINITY, f64::INFINITY, false, false),
    };
    let (d, tp, tm) = (density.clone(), tail_plus.clone(), tail_minus.clone());
    let new_density: RealFn = Arc::new(move |y: f64| {
        if y > 0.0 {
            scaled(beta * y, cancel(d(y), beta * tp(y), y)).max(0.0)
        } else if y < 0.0 {
            scaled(beta * y, d(y) + beta * (tm(-y) + q))
        } else {
            0.0
        }
    });
    let tp2 = tail_plus.clone();
    let new_tail_plus: RealFn = Arc::new(move |y: f64| cancel(scaled(beta * y, tp2(y)), l, y).max(0.0));
    let tm2 = tail_minus.clone();
    let new_tail_minus: RealFn = Arc::new(move |y: f64| scaled(-beta * y, tm2(y) + q));
    LevyMeasure {
        density: new_density,
        tail_plus: new_tail_plus,
        tail_minus: new_tail_minus,
        inv_tail_plus: None,
        inv_tail_minus: None,
        barrier_plus: bp - beta,
        barrier_minus: if q > 0.0 { (bm + beta).min(beta) } else { bm + beta },
        has_plus: hp,
        has_minus: hm || q > 0.0,
    }
}

/// `(Ψ, Ψ̂₁, ρ)` with `Ψ̂₁ = dual(T₁Ψ)` vanishing at `1 - ρ`.
pub fn theorem_pair(psi: &CharExponent) -> Result<(CharExponent, CharExponent, f64)> {
    let m = classify(psi, 1.0)?;
    if !m.in_n_beta_rho {
        return Err(Error::Precondition(format!("{} is not in N_1(rho): {m:?}", psi.label)));
    }
    if !(m.rho > 0.0 && m.rho < 1.0) {
        return Err(Error::Precondition(format!("rho = {} must lie in (0, 1)", m.rho)));
    }
    let hat = dual(&tilt(psi, 1.0)?);
    let r = hat.value(cx(1.0 - m.rho, 0.0))?;
    if r.norm() > 1e-9 {
        return Err(Error::Precondition(format!("dual tilt does not vanish at 1 - rho: {r}")));
    }
    Ok((psi.clone(), hat, m.rho))
}

/// Witness of a failed negative-definiteness test.
#[derive(Debug, Clone, PartialEq)]
pub struct NegDefWitness {
    pub points: Vec<f64>,
    pub coefficients: Vec<Complex>,
    pub form: f64,
    pub scale: f64,
}

/// Random quadratic-form test of `Σ Φ(x_j - x_l) c_j c̄_l ≤ 0` for
/// `Φ(x) = -Ψ(-ix)` and `Σ c_j = 0`, over 100 trials.
pub fn check_negative_definite(psi: &CharExponent, k: usize, seed: u64) -> Result<core::result::Result<(), NegDefWitness>> {
    if k < 2 {
        return Err(Error::Domain(format!("negative-definiteness test needs k >= 2 (got {k})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = |x: f64| -> Result<Complex> { psi.value(cx(0.0, -x)).map(|v| -v) };
    for _ in 0..100 {
        let points: Vec<f64> = (0..k).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut coefficients: Vec<Complex> =
            (0..k).map(|_| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let mean = coefficients.iter().sum::<Complex>() / k as f64;
        for c in &mut coefficients {
            *c -= mean;
        }
        let mut form = cx(0.0, 0.0);
        let mut scale = 0.0;
        for j in 0..k {
            for l in 0..k {
                let v = phi(points[j] - points[l])?;
                let w = coefficients[j] * coefficients[l].conj();
                form += v * w;
                scale += v.norm() * w.norm();
            }
        }
        if form.re > 1e-8 * scale.max(1e-300) {
            return Ok(Err(NegDefWitness { points, coefficients, form: form.re, scale }));
        }
    }
    Ok(Ok(()))
}

/// Exponent shifted by a function: `Ψ(z) + g(z)`. Used to build corrupted
/// controls.
pub fn perturbed<F>(psi: &CharExponent, g: F) -> CharExponent
where
    F: Fn(Complex) -> Complex + Send + Sync + 'static,
{
    let inner = psi.clone();
    let mut out = psi.clone();
    out.label = format!("perturbed({})", psi.label);
    out.measure = None;
    out.closed_form = Some(Arc::new(move |z| Ok(inner.value(z)? + g(z))));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_root_and_value() {
        let psi = brownian(-0.25, 1.0).unwrap();
        assert!(psi.eval(cx(0.5, 0.0)).unwrap().norm() < 1e-15);
        let r = find_rho(&psi).unwrap();
        assert!((r.rho - 0.5).abs() < 1e-12, "{r:?}");
        assert!(!r.killing_negative);
        assert!((r.derivative_at_zero_plus + 0.25).abs() < 1e-9);
    }

    #[test]
    fn killed_linear_has_no_root() {
        let psi = brownian_killed(-1.0, 0.0, 1.0).unwrap();
        let r = find_rho(&psi).unwrap();
        assert!(r.rho.is_infinite());
        assert!(r.killing_negative);
    }

    #[test]
    fn small_argument_series() {
        let w = cx(1e-3, 2e-3);
        let direct = w.exp() - 1.0 - w;
        assert!((exp_m1_m_id(w) - direct).norm() < 1e-15);
    }
}
