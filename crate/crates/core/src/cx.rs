//! Complex helpers over a generic [`Real`].

use num_complex::Complex;
use num_traits::Zero;

use crate::real::Real;

pub type C<R> = Complex<R>;

pub fn c<R: Real>(re: f64, im: f64) -> C<R> {
    Complex::new(R::from_f64(re), R::from_f64(im))
}

pub fn lift<R: Real>(z: Complex<f64>) -> C<R> {
    c(z.re, z.im)
}

pub fn lower<R: Real>(z: C<R>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// Modulus, scaled so tiny or huge components do not under- or overflow.
pub fn abs<R: Real>(z: C<R>) -> R {
    let (x, y) = (z.re.abs(), z.im.abs());
    let s = x.max(y);
    if s.is_zero() {
        return s;
    }
    let (x, y) = (x / s, y / s);
    s * (x * x + y * y).sqrt()
}

pub fn arg<R: Real>(z: C<R>) -> R {
    z.im.atan2(z.re)
}

pub fn cis<R: Real>(theta: R) -> C<R> {
    let (s, co) = theta.sin_cos();
    Complex::new(co, s)
}

pub fn exp<R: Real>(z: C<R>) -> C<R> {
    cis(z.im) * z.re.exp()
}

/// Principal logarithm, argument in (-π, π].
pub fn ln<R: Real>(z: C<R>) -> C<R> {
    Complex::new(abs(z).ln(), arg(z))
}

/// Principal power `z^e` for real `e`; `0^e = 0`.
pub fn powr<R: Real>(z: C<R>, e: R) -> C<R> {
    if z.is_zero() {
        return C::zero();
    }
    exp(ln(z) * e)
}

/// Smith's complex division; safe when |b|² would under- or overflow.
pub fn div<R: Real>(a: C<R>, b: C<R>) -> C<R> {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        Complex::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        Complex::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

/// Integer power by repeated squaring (negative exponents invert).
pub fn powi<R: Real>(z: C<R>, n: i64) -> C<R> {
    let mut base = if n < 0 { C::new(R::one(), R::zero()) / z } else { z };
    let mut k = n.unsigned_abs();
    let mut acc = C::new(R::one(), R::zero());
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        k >>= 1;
    }
    acc
}

/// ω^k with ω = e^{2πi/3}.
pub fn omega_pow<R: Real>(k: i64) -> C<R> {
    let half = R::from_f64(0.5);
    let s = R::from_f64(3.0).sqrt() * half;
    match k.rem_euclid(3) {
        0 => C::new(R::one(), R::zero()),
        1 => C::new(-half, s),
        _ => C::new(-half, -s),
    }
}

/// e^{2πi·x}.
pub fn e2pi<R: Real>(x: C<R>) -> C<R> {
    let two_pi = R::pi() * R::from_f64(2.0);
    exp(C::new(-x.im * two_pi, x.re * two_pi))
}
