//! Gamma-family functions on the complex plane, incomplete beta/gamma
//! functions and the Stirling decay envelope of `|Γ(a + ib)|`.

use alloc::format;
use core::f64::consts::PI;

use num_complex::Complex64;

// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Complex argument type used throughout the crate.
pub type Complex = Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Distance below which an argument is treated as sitting on a pole.
pub const POLE_TOL: f64 = 1e-12;

const LN_PI: f64 = 1.144_729_885_849_400_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

#[inline]
pub fn cx(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// `(sin(πx), cos(πx))` with argument reduction so integers give exact zeros.
pub fn sin_cos_pi(x: f64) -> (f64, f64) {
    let r = x - 2.0 * (x * 0.5).round();
    // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return (0.0, if r == 0.0 { 1.0 } else { -1.0 });
    }
    if r.abs() == 0.5 {
        return (r.signum(), 0.0);
    }
    ((PI * r).sin(), (PI * r).cos())
}

/// Principal logarithm of `sin(πz)`, free of overflow for large `|Im z|`.
fn log_sin_pi(z: Complex) -> Complex {
    let (s, c) = sin_cos_pi(z.re);
    let t = PI * z.im;
    // |sin(π z)|² = sin²(πx) + sinh²(πy)
    let re = if t.abs() < 20.0 {
        0.5 * (s * s + t.sinh().powi(2)).ln()
    } else {
        let ln_sinh = t.abs() + (-(-2.0 * t.abs()).exp_m1() * 0.5).ln();
        ln_sinh + 0.5 * (s * s / t.sinh().powi(2)).ln_1p()
    };
    let im = (c * t.tanh()).atan2(s);
    cx(re, im)
}

fn lanczos_log_gamma(z: Complex) -> Complex {
    let z = z - 1.0;
    let mut acc = cx(LANCZOS[0], 0.0);
    for (k, &coef) in LANCZOS.iter().enumerate().skip(1) {
        acc += coef / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + acc.ln() + HALF_LN_2PI
}

/// Principal branch of `log Γ(z)`: analytic off the non-positive real axis
/// and real on the positive axis.
pub fn log_gamma(z: Complex) -> Result<Complex> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite("log_gamma argument"));
    }
    if z.im.abs() <= POLE_TOL && z.re <= 0.5 {
        let n = z.re.round();
        if n <= 0.0 && (z.re - n).abs() <= POLE_TOL {
            return Err(Error::Pole(z));
        }
    }
    if z.re >= 0.5 {
        return Ok(lanczos_log_gamma(z));
    }
    // Reflection, then move onto the continuous branch.
    let mut out = LN_PI - log_sin_pi(z) - lanczos_log_gamma(1.0 - z);
    if z.im != 0.0 {
        let k = (0.5 * z.re + 0.25).floor();
        out.im += 2.0 * PI * k * z.im.signum();
    } else {
        // Real negative axis: keep the sign of Γ in the imaginary part.
        out.im = if gamma_sign_neg(z.re) { PI } else { 0.0 };
    }
    Ok(out)
}

fn gamma_sign_neg(x: f64) -> bool {
    // Γ(x) < 0 for x in (-1, 0), (-3, -2), ...
    x < 0.0 && ((-x).floor() as i64) % 2 == 0
}

/// `Γ(z)` via `exp(log Γ(z))`.
pub fn gamma(z: Complex) -> Result<Complex> {
    log_gamma(z).map(|l| l.exp())
}

/// `1/Γ(z)`, entire: zero at the poles of Γ.
pub fn rgamma(z: Complex) -> Result<Complex> {
    match log_gamma(z) {
        Ok(l) => Ok((-l).exp()),
        Err(Error::Pole(_)) => Ok(cx(0.0, 0.0)),
        Err(e) => Err(e),
    }
}

/// `Γ(a)/Γ(b)` formed in log space so that large `|Im|` does not overflow
/// the factors; zero when `b` is a pole.
pub fn gamma_ratio(a: Complex, b: Complex) -> Result<Complex> {
    match log_gamma(b) {
        Ok(lb) => Ok((log_gamma(a)? - lb).exp()),
        Err(Error::Pole(_)) => Ok(cx(0.0, 0.0)),
        Err(e) => Err(e),
    }
}

/// Real `log |Γ(x)|`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    log_gamma(cx(x, 0.0)).map(|l| l.re)
}

/// Real `Γ(x)`.
pub fn gamma_real(x: f64) -> Result<f64> {
    gamma(cx(x, 0.0)).map(|g| g.re)
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` for positive arguments.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    ln_beta(a, b).map(f64::exp)
}

pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("beta requires a, b > 0 (got {a}, {b})")));
    }
    Ok(ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?)
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("incomplete beta requires a, b > 0 (got {a}, {b})")));
    }
    if x.is_nan() {
        return Err(Error::NonFinite("incomplete beta argument"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b)?;
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front.exp() * beta_cf(a, b, x)? / a)
    } else {
        Ok(1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x)? / b)
    }
}

/// Complementary form `1 - I_x(a, b)` evaluated as `I_{1-x}(b, a)` given `1 - x`.
pub fn reg_inc_beta_upper(a: f64, b: f64, one_minus_x: f64) -> Result<f64> {
    reg_inc_beta(b, a, one_minus_x)
}

fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::Quadrature { estimate: h, error: f64::NAN })
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("incomplete gamma requires a > 0 (got {a})")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let ln_front = a * x.ln() - x - ln_gamma(a)?;
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                return Ok(sum * ln_front.exp());
            }
        }
        Err(Error::Quadrature { estimate: sum, error: term })
    } else {
        // Lentz continued fraction for Q(a, x).
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                return Ok(1.0 - ln_front.exp() * h);
            }
        }
        Err(Error::Quadrature { estimate: h, error: f64::NAN })
    }
}

/// Envelope `scale · |b|^{a-1/2} · e^{-rate·|b|}` dominating `|Γ(a + ib)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub a: f64,
    pub scale: f64,
    pub exponent_rate: f64,
}

impl DecayEnvelope {
    pub fn bound(&self, b: f64) -> f64 {
        let b = b.abs();
        self.scale * b.powf(self.a - 0.5) * (-self.exponent_rate * b).exp()
    }

    /// Exponent of `|b|` in the polynomial factor.
    pub fn power(&self) -> f64 {
        self.a - 0.5
    }

    /// `true` when `|Γ(a+ib)|` stays below the envelope at every grid point.
    pub fn holds_on(&self, grid: &[f64]) -> Result<bool> {
        for &b in grid {
            let g = log_gamma(cx(self.a, b))?.re;
            let env = self.scale.ln() + (self.a - 0.5) * b.abs().ln() - self.exponent_rate * b.abs();
            if g > env + 1e-12 * (1.0 + env.abs()) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Stirling-type envelope for `|Γ(a+ib)|`, `|b| >= b_min`.
///
/// The constant is the supremum of `|Γ(a+ib)| |b|^{1/2-a} e^{π|b|/2}` over a
/// log grid reaching well into the asymptotic regime, where the ratio tends to
/// `sqrt(2π)`.
pub fn stirling_envelope(a: f64, b_min: f64) -> Result<DecayEnvelope> {
    if !(b_min > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("stirling envelope needs b_min > 0 (got {b_min})")));
    }
    let b_max = (b_min * 1e4).max(1e5);
    let n = 2000;
    let ratio = (b_max / b_min).ln();
    let mut best = (2.0 * PI).sqrt().ln();
    for k in 0..=n {
        let b = b_min * (ratio * k as f64 / n as f64).exp();
        let lr = log_gamma(cx(a, b))?.re - (a - 0.5) * b.ln() + 0.5 * PI * b;
        best = best.max(lr);
    }
    Ok(DecayEnvelope { a, scale: best.exp() * (1.0 + 1e-10), exponent_rate: 0.5 * PI })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn log_gamma_trivial_points() {
        assert!(log_gamma(cx(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(log_gamma(cx(2.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(cx(0.5, 0.0)).unwrap();
        assert!(close(half.re, 0.5 * PI.ln(), 1e-15));
        assert_eq!(half.im, 0.0);
    }

    #[test]
    fn poles_are_errors() {
        for n in 0..5 {
            let z = cx(-(n as f64), 0.0);
            assert!(matches!(log_gamma(z), Err(Error::Pole(_))));
        }
        assert!(matches!(log_gamma(cx(-3.0 + 5e-13, 0.0)), Err(Error::Pole(_))));
        assert!(log_gamma(cx(-3.0 + 1e-9, 0.0)).is_ok());
        assert!(matches!(log_gamma(cx(f64::NAN, 0.0)), Err(Error::NonFinite(_))));
    }

    #[test]
    fn negative_real_sign() {
        // Γ(-0.5) = -2 sqrt(pi)
        let g = gamma(cx(-0.5, 0.0)).unwrap();
        assert!(close(g.re, -2.0 * PI.sqrt(), 1e-14), "{g}");
        let g = gamma(cx(-1.5, 0.0)).unwrap();
        assert!(close(g.re, 4.0 * PI.sqrt() / 3.0, 1e-14), "{g}");
    }

    #[test]
    fn beta_values() {
        assert!(close(beta_fn(1.0, 1.0).unwrap(), 1.0, 1e-14));
        assert!(close(beta_fn(0.5, 0.5).unwrap(), PI, 1e-14));
        let rho = 0.3;
        assert!(close(beta_fn(rho, 1.0 - rho).unwrap(), PI / (PI * rho).sin(), 1e-14));
        assert!(beta_fn(0.0, 1.0).is_err());
        assert!(beta_fn(1.0, -2.0).is_err());
    }

    #[test]
    fn incomplete_beta_against_closed_forms() {
        // I_x(1, 1) = x ; I_x(1/2, 1/2) = (2/π) asin(sqrt x)
        for &x in &[0.01, 0.2, 0.5, 0.77, 0.999] {
            assert!(close(reg_inc_beta(1.0, 1.0, x).unwrap(), x, 1e-14));
            let want = 2.0 / PI * x.sqrt().asin();
            assert!(close(reg_inc_beta(0.5, 0.5, x).unwrap(), want, 1e-13));
        }
    }

    #[test]
    fn incomplete_gamma_exponential() {
        for &x in &[0.1, 1.0, 3.0, 12.0] {
            let want = -(-x).exp_m1();
            assert!(close(reg_lower_gamma(1.0, x).unwrap(), want, 1e-14));
        }
    }

    #[test]
    fn envelope_at_half_is_flat() {
        let env = stirling_envelope(0.5, 1.0).unwrap();
        assert_eq!(env.power(), 0.0);
        assert!(env.scale >= (2.0 * PI).sqrt());
    }
}
