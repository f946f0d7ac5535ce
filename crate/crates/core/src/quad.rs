//! Double-exponential quadrature for complex-valued integrands.
//!
//! `tanh_sinh` handles finite intervals with integrable endpoint
//! singularities, `exp_sinh` the half line `[a, ∞)`, and `fourier` the
//! slowly decaying oscillatory integrals `∫_0^∞ g(t) e^{iωt} dt` met when
//! inverting Mellin transforms that decay only algebraically.

use core::f64::consts::PI;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::special::{cx, Complex};

const MAX_LEVEL: u32 = 12;

/// Result of a quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex,
    pub error: f64,
}

/// Convergence relative to `∫|f|`, so integrals with heavy cancellation
/// stop at the rounding level of their integrand.
fn converged(new: Complex, old: Complex, l1: f64, tol: f64) -> bool {
    (new - old).norm() <= tol * l1.max(1e-300) || (new - old).norm() <= 1e-300
}

/// Out of levels: accept a result whose refinements only move at the
/// rounding level of an integrand evaluated with cancellation.
fn noise_limited(est: Complex, last: f64, l1: f64) -> Result<Estimate> {
    if last <= 1e-7 * l1 {
        Ok(Estimate { value: est, error: last })
    } else {
        Err(Error::Quadrature { estimate: est.re, error: last })
    }
}

/// `∫_a^b f` where `f(x, b - x)` receives the distance to the right endpoint
/// computed without cancellation.
pub fn tanh_sinh2<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate>
where
    F: Fn(f64, f64) -> Complex,
{
    tanh_sinh_floor(f, a, b, tol, 0.0)
}

/// [`tanh_sinh2`] that also stops once refinements move the result by less
/// than the absolute amount `floor`.
pub fn tanh_sinh_floor<F>(f: F, a: f64, b: f64, tol: f64, floor: f64) -> Result<Estimate>
where
    F: Fn(f64, f64) -> Complex,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("tanh_sinh bounds"));
    }
    if a == b {
        return Ok(Estimate { value: cx(0.0, 0.0), error: 0.0 });
    }
    let width = b - a;
    // Node at parameter t contributes w(t) f(x(t)).
    let node = |t: f64| -> Option<(f64, f64, f64)> {
        let s = 0.5 * PI * t.sinh();
        let e = (-2.0 * s.abs()).exp();
        let w = width * PI * t.cosh() * e / ((1.0 + e) * (1.0 + e));
        let d = width * e / (1.0 + e);
        if d < 1e-300 || !(w > 0.0) {
            return None;
        }
        if t < 0.0 {
            Some((a + d, b - a - d, w))
        } else {
            Some((b - d, d, w))
        }
    };
    let eval = |t: f64| -> Result<Complex> {
        match node(t) {
            Some((x, rem, w)) => {
                let v = f(x, rem);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite("tanh_sinh integrand"));
                }
                Ok(v * w)
            }
            None => Ok(cx(0.0, 0.0)),
        }
    };
    let t_max = 4.5;
    let mut h = 0.5;
    let mut sum = eval(0.0)?;
    let mut abs = sum.norm();
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        let (p, m) = (eval(t)?, eval(-t)?);
        sum += p + m;
        abs += p.norm() + m.norm();
        k += 1;
    }
    let mut est = sum * h;
    let mut last = f64::NAN;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            let (p, m) = (eval(t)?, eval(-t)?);
            sum += p + m;
            abs += p.norm() + m.norm();
            k += 2;
        }
        let next = sum * h;
        if converged(next, est, abs * h, tol) || (next - est).norm() <= floor {
            return Ok(Estimate { value: next, error: (next - est).norm() });
        }
        last = (next - est).norm();
        est = next;
    }
    noise_limited(est, last, abs * h)
}

/// `∫_a^b f(x) dx` by the tanh-sinh rule.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate>
where
    F: Fn(f64) -> Complex,
{
    tanh_sinh2(|x, _| f(x), a, b, tol)
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if b == f64::INFINITY {
        exp_sinh(|x| cx(f(x), 0.0), a, tol).map(|e| e.value.re)
    } else {
        tanh_sinh(|x| cx(f(x), 0.0), a, b, tol).map(|e| e.value.re)
    }
}

/// `∫_a^∞ f(x) dx` with the substitution `x = a + exp(π/2 sinh t)`.
pub fn exp_sinh<F>(f: F, a: f64, tol: f64) -> Result<Estimate>
where
    F: Fn(f64) -> Complex,
{
    let eval = |t: f64| -> Result<Complex> {
        let s = 0.5 * PI * t.sinh();
        let u = s.exp();
        if u < 1e-300 || u > 1e300 {
            return Ok(cx(0.0, 0.0));
        }
        let w = 0.5 * PI * t.cosh() * u;
        let v = f(a + u);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite("exp_sinh integrand"));
        }
        Ok(v * w)
    };
    let t_lo = -4.5;
    let t_hi = 4.5;
    let mut h = 0.5;
    let mut sum = cx(0.0, 0.0);
    let mut abs = 0.0;
    let mut t = t_lo;
    while t <= t_hi + 1e-12 {
        let v = eval(t)?;
        sum += v;
        abs += v.norm();
        t += h;
    }
    let mut est = sum * h;
    let mut last = f64::NAN;
    for _ in 0..MAX_LEVEL {
        let mut t = t_lo + 0.5 * h;
        while t <= t_hi {
            let v = eval(t)?;
            sum += v;
            abs += v.norm();
            t += h;
        }
        h *= 0.5;
        let next = sum * h;
        if converged(next, est, abs * h, tol) {
            return Ok(Estimate { value: next, error: (next - est).norm() });
        }
        last = (next - est).norm();
        est = next;
    }
    noise_limited(est, last, abs * h)
}

/// `∫_0^∞ f` split at `split` into a tanh-sinh and an exp-sinh part.
pub fn half_line<F>(f: F, split: f64, tol: f64) -> Result<Estimate>
where
    F: Fn(f64) -> Complex,
{
    let lo = tanh_sinh(&f, 0.0, split, tol)?;
    let hi = exp_sinh(&f, split, tol)?;
    Ok(Estimate { value: lo.value + hi.value, error: lo.error + hi.error })
}

/// Oscillation kernel for [`fourier`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Cos,
    Sin,
}

/// `∫_0^∞ g(t) k(ωt) dt` for `k ∈ {cos, sin}` and slowly decaying `g`, using
/// the Ooura–Mori double-exponential rule whose nodes approach the zeros of
/// the kernel double-exponentially.
pub fn fourier<F>(g: F, omega: f64, kernel: Kernel, h: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(omega > 0.0) || !(h > 0.0) {
        return Err(Error::Domain(alloc::format!("fourier rule needs omega, h > 0 (got {omega}, {h})")));
    }
    let m = PI / h;
    let beta = 0.25;
    let alpha = beta / (1.0 + m * (1.0 + m).ln() / (4.0 * PI)).sqrt();
    let phi = |t: f64| -> (f64, f64) {
        if t.abs() < 1e-12 {
            let d = 2.0 + alpha + beta;
            return (1.0 / d, 0.5 * (1.0 + (alpha - beta) / (d * d)) );
        }
        let u = 2.0 * t + alpha * (1.0 - (-t).exp()) + beta * (t.exp() - 1.0);
        let du = 2.0 + alpha * (-t).exp() + beta * t.exp();
        let e = (-u).exp();
        let one_m = -(-u).exp_m1();
        let p = t / one_m;
        let dp = (one_m - t * e * du) / (one_m * one_m);
        (p, dp)
    };
    let shift = match kernel {
        Kernel::Sin => 0.0,
        Kernel::Cos => -0.5,
    };
    let term = |n: i64| -> Result<f64> {
        let t = (n as f64 + shift) * h;
        let (p, dp) = phi(t);
        if !(p > 0.0) || !dp.is_finite() {
            return Ok(0.0);
        }
        let x = m * p / omega;
        let k = match kernel {
            Kernel::Sin => (m * p).sin(),
            Kernel::Cos => (m * p).cos(),
        };
        let gv = g(x);
        if !gv.is_finite() {
            return Err(Error::NonFinite("fourier integrand"));
        }
        Ok(gv * k * dp)
    };
    let mut total = 0.0;
    // Negative side: nodes crowd toward the origin.
    let mut n = 0i64;
    let mut quiet = 0;
    loop {
        let v = term(n)?;
        total += v;
        quiet = if v.abs() < 1e-17 * total.abs().max(1e-300) { quiet + 1 } else { 0 };
        n -= 1;
        if quiet >= 4 || n < -4000 {
            break;
        }
    }
    let mut n = 1i64;
    let mut quiet = 0;
    loop {
        let v = term(n)?;
        total += v;
        quiet = if v.abs() < 1e-17 * total.abs().max(1e-300) { quiet + 1 } else { 0 };
        n += 1;
        if quiet >= 4 || n > 20_000 {
            break;
        }
    }
    Ok(PI / omega * total)
}
