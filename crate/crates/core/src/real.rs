//! Floating-point precision abstraction.
//!
//! Every numerical kernel is generic over [`Real`]. Two backends ship:
//! plain `f64` and [`Dd`], a double-double with about 31 significant digits.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Num, One, Zero};
use serde::{Deserialize, Serialize};

/// Real scalar usable by the quadrature, linear algebra and theta kernels.
pub trait Real:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    /// Short name used in reports and cache keys.
    const NAME: &'static str;
    /// Unit roundoff.
    const EPS: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    /// `p / q` rounded in this precision.
    fn ratio(p: i64, q: i64) -> Self {
        Self::from_f64(p as f64) / Self::from_f64(q as f64)
    }
    fn pi() -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
    fn floor(self) -> Self;

    fn sin(self) -> Self {
        self.sin_cos().0
    }
    fn cos(self) -> Self {
        self.sin_cos().1
    }
    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
    fn round(self) -> Self {
        (self + Self::from_f64(0.5)).floor()
    }
    fn powf(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }
    fn max(self, o: Self) -> Self {
        if o > self {
            o
        } else {
            self
        }
    }
    fn min(self, o: Self) -> Self {
        if o < self {
            o
        } else {
            self
        }
    }
    /// Lossless decomposition into `f64` limbs (used by the cache).
    fn to_limbs(self) -> Vec<f64>;
    fn from_limbs(l: &[f64]) -> Option<Self>;
}

impl Real for f64 {
    const NAME: &'static str = "double";
    const EPS: f64 = f64::EPSILON / 2.0;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
    fn to_limbs(self) -> Vec<f64> {
        vec![self]
    }
    fn from_limbs(l: &[f64]) -> Option<Self> {
        match l {
            [x] => Some(*x),
            _ => None,
        }
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    const PI: Dd = Dd::new(std::f64::consts::PI, 1.2246467991473532e-16);
    const TWO_PI: Dd = Dd::new(std::f64::consts::TAU, 2.4492935982947064e-16);
    const HALF_PI: Dd = Dd::new(std::f64::consts::FRAC_PI_2, 6.123233995736766e-17);
    const LN2: Dd = Dd::new(std::f64::consts::LN_2, 2.3190468138462996e-17);

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    fn sqr(self) -> Self {
        let (p1, p2) = two_prod(self.hi, self.hi);
        let p2 = p2 + 2.0 * self.hi * self.lo + self.lo * self.lo;
        Dd::renorm(p1, p2)
    }

    fn scale(self, f: f64) -> Self {
        Dd::new(self.hi * f, self.lo * f)
    }

    fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    /// Taylor series for sine and cosine on |t| <= π/4.
    fn sin_cos_reduced(t: Dd) -> (Dd, Dd) {
        let t2 = t.sqr();
        let tol = 1e-34;
        let mut s = t;
        let mut term = t;
        let mut k = 1.0;
        loop {
            term = -(term * t2) / Dd::from_f64((k + 1.0) * (k + 2.0));
            k += 2.0;
            s += term;
            if term.hi.abs() < tol {
                break;
            }
        }
        let mut c = Dd::one();
        let mut term = Dd::one();
        let mut k = 0.0;
        loop {
            term = -(term * t2) / Dd::from_f64((k + 1.0) * (k + 2.0));
            k += 2.0;
            c += term;
            if term.hi.abs() < tol {
                break;
            }
        }
        (s, c)
    }
}

fn pow10(e: i32) -> Dd {
    let (mut p, mut base, mut n) = (Dd::one(), Dd::from_f64(10.0), e.unsigned_abs());
    while n > 0 {
        if n & 1 == 1 {
            p *= base;
        }
        base = base * base;
        n >>= 1;
    }
    if e >= 0 {
        p
    } else {
        Dd::one() / p
    }
}

/// Decimal digits of |x| as (digits, exponent of the first digit), rounded to `n` places.
fn decimal_digits(x: Dd, n: usize) -> (Vec<u8>, i32) {
    let x = x.abs();
    let mut e = x.hi.log10().floor() as i32;
    let mut y = x * pow10(-e);
    if y.hi >= 10.0 {
        y /= Dd::from_f64(10.0);
        e += 1;
    } else if y.hi < 1.0 {
        y *= Dd::from_f64(10.0);
        e -= 1;
    }
    let mut d = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let k = y.hi.floor().clamp(0.0, 9.0);
        d.push(k as u8);
        y = (y - Dd::from_f64(k)) * Dd::from_f64(10.0);
    }
    let round_up = d.pop().is_some_and(|last| last >= 5);
    if round_up {
        let mut i = n;
        loop {
            if i == 0 {
                d.insert(0, 1);
                d.pop();
                e += 1;
                break;
            }
            i -= 1;
            if d[i] == 9 {
                d[i] = 0;
            } else {
                d[i] += 1;
                break;
            }
        }
    }
    (d, e)
}

/// 32 significant digits, or as many as the precision asks for.
impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.hi == 0.0 || !self.hi.is_finite() {
            return write!(f, "{}", self.hi);
        }
        let n = f.precision().unwrap_or(32).clamp(1, 34);
        let (d, e) = decimal_digits(*self, n);
        let digits: String = d.iter().map(|k| char::from(b'0' + k)).collect();
        let sign = if self.hi < 0.0 { "-" } else if f.sign_plus() { "+" } else { "" };
        let body = if (-5..21).contains(&e) {
            if e < 0 {
                format!("0.{}{}", "0".repeat((-e - 1) as usize), digits.trim_end_matches('0'))
            } else {
                let (int, frac) = digits.split_at(((e + 1) as usize).min(n));
                let pad = "0".repeat((e + 1) as usize - int.len());
                let frac = frac.trim_end_matches('0');
                if frac.is_empty() { format!("{int}{pad}") } else { format!("{int}{pad}.{frac}") }
            }
        } else {
            let frac = digits[1..].trim_end_matches('0');
            let dot = if frac.is_empty() { "" } else { "." };
            format!("{}{dot}{frac}e{e}", &digits[..1])
        };
        write!(f, "{sign}{body}")
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            c => c,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::renorm(s1, s2 + t2)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd::new(-self.hi, -self.lo)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        Dd::renorm(p1, p2 + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd::new(q1, q2) + Dd::from_f64(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        let q = self / b;
        let n = if q < Dd::zero() { -(-q).floor() } else { q.floor() };
        self - n * b
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Dd {
            fn $m(&mut self, b: Dd) {
                *self = *self $op b;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl Zero for Dd {
    fn zero() -> Self {
        Dd::new(0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::new(1.0, 0.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix == 10 {
            s.parse()
        } else {
            // Only decimal input is meaningful here; reuse f64's error for anything else.
            "".parse::<f64>().map(Dd::from_f64)
        }
    }
}

/// Decimal literals such as `-1.25e-3`, rounded to double-double accuracy.
impl std::str::FromStr for Dd {
    type Err = std::num::ParseFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // Validates the syntax and handles inf/nan.
        let approx: f64 = s.parse()?;
        if !approx.is_finite() || approx == 0.0 {
            return Ok(Dd::from_f64(approx));
        }
        let t = s.trim();
        let (neg, t) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let (mant, exp) = match t.find(['e', 'E']) {
            Some(k) => (&t[..k], t[k + 1..].parse::<i32>().expect("validated by f64 parse")),
            None => (t, 0),
        };
        let mut v = Dd::zero();
        let mut scale = exp;
        let mut seen_point = false;
        for c in mant.chars() {
            match c {
                '.' => seen_point = true,
                d => {
                    v = v * Dd::from_f64(10.0) + Dd::from_f64(d.to_digit(10).expect("digit") as f64);
                    if seen_point {
                        scale -= 1;
                    }
                }
            }
        }
        let v = if scale >= 0 { v * pow10(scale) } else { v / pow10(-scale) };
        Ok(if neg { -v } else { v })
    }
}

impl Real for Dd {
    const NAME: &'static str = "extended";
    const EPS: f64 = 4.93e-32;

    fn from_f64(x: f64) -> Self {
        Dd::new(x, 0.0)
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn pi() -> Self {
        Dd::PI
    }

    fn sqrt(self) -> Self {
        if self.is_zero() {
            return Dd::zero();
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (s, e) = two_sum(ax, (self - Dd::from_f64(ax).sqr()).hi * (x * 0.5));
        Dd::new(s, e)
    }

    fn exp(self) -> Self {
        if self.hi <= -709.0 {
            return Dd::zero();
        }
        if self.hi >= 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.is_zero() {
            return Dd::one();
        }
        let inv_k = 1.0 / 512.0;
        let m = (self.hi / Dd::LN2.hi + 0.5).floor();
        let r = (self - Dd::LN2 * Dd::from_f64(m)).scale(inv_k);
        // s = e^r - 1 by Taylor series, then squared up nine times.
        let mut p = r.sqr();
        let mut s = r + p.scale(0.5);
        p *= r;
        let mut fact = 6.0;
        let mut t = p / Dd::from_f64(fact);
        let mut i = 3.0;
        loop {
            s += t;
            p *= r;
            i += 1.0;
            fact *= i;
            t = p / Dd::from_f64(fact);
            if t.hi.abs() <= inv_k * 1e-33 || i > 12.0 {
                break;
            }
        }
        s += t;
        for _ in 0..9 {
            s = s.scale(2.0) + s.sqr();
        }
        s += Dd::one();
        let f = 2f64.powi(m as i32);
        s.scale(f)
    }

    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from_f64(f64::NAN);
        }
        let x = Dd::from_f64(self.hi.ln());
        x + self * (-x).exp() - Dd::one()
    }

    fn sin_cos(self) -> (Self, Self) {
        if self.is_zero() {
            return (Dd::zero(), Dd::one());
        }
        if !self.hi.is_finite() {
            let nan = Dd::from_f64(f64::NAN);
            return (nan, nan);
        }
        let z = self - Dd::TWO_PI * (self / Dd::TWO_PI).round();
        let j = (z / Dd::HALF_PI).round();
        let t = z - Dd::HALF_PI * j;
        let (s, c) = Dd::sin_cos_reduced(t);
        match (j.hi as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn atan2(self, x: Self) -> Self {
        let y = self;
        if x.is_zero() && y.is_zero() {
            return Dd::zero();
        }
        if !(x.hi.is_finite() && y.hi.is_finite()) {
            return Dd::from_f64(y.hi.atan2(x.hi));
        }
        // Scale first so the squares cannot underflow.
        let m = 2f64.powi(-(x.hi.abs().max(y.hi.abs()).log2().floor() as i32));
        let (x, y) = (x.scale(m), y.scale(m));
        let r = (x.sqr() + y.sqr()).sqrt();
        let xx = x / r;
        let yy = y / r;
        let z = Dd::from_f64(y.hi.atan2(x.hi));
        let (sz, cz) = z.sin_cos();
        if xx.hi.abs() > yy.hi.abs() {
            z + (yy - sz) / cz
        } else {
            z - (xx - cz) / sz
        }
    }

    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            Dd::renorm(hi, self.lo.floor())
        } else {
            Dd::new(hi, 0.0)
        }
    }

    fn to_limbs(self) -> Vec<f64> {
        vec![self.hi, self.lo]
    }
    fn from_limbs(l: &[f64]) -> Option<Self> {
        match l {
            [h, lo] => Some(Dd::new(*h, *lo)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: Dd, want: (f64, f64), rel: f64) {
        let w = Dd::new(want.0, want.1);
        let err = ((x - w) / w).hi.abs();
        assert!(err < rel, "{x:?} vs {w:?}: rel err {err:e}");
    }

    #[test]
    fn decimal_parsing() {
        let third: Dd = "0.333333333333333333333333333333333".parse().unwrap();
        assert!(((third * Dd::from_f64(3.0)) - Dd::one()).abs().to_f64() < 1e-31);
        let x: Dd = "-1.5e-3".parse().unwrap();
        assert!((x * Dd::from_f64(1000.0) + Dd::from_f64(1.5)).abs().to_f64() < 1e-31);
        let tenth: Dd = "0.1".parse().unwrap();
        assert!((tenth * Dd::from_f64(10.0) - Dd::one()).abs().to_f64() < 1e-31);
        assert!(tenth.lo != 0.0);
        assert!("1.2.3".parse::<Dd>().is_err());
    }

    #[test]
    fn decimal_display() {
        let d = |s: &str| s.parse::<Dd>().unwrap();
        assert_eq!(d("3.50030650663307774868901743554865652").to_string(), "3.5003065066330777486890174355487");
        assert_eq!(d("0.1").to_string(), "0.1");
        assert_eq!(d("-1.5e-30").to_string(), "-1.5e-30");
        assert_eq!(d("1e25").to_string(), "1e25");
        assert_eq!(d("12345").to_string(), "12345");
        assert_eq!(d("0.000999999").to_string(), "0.000999999");
        assert_eq!(format!("{:.5}", d("2.718281828")), "2.7183");
        assert_eq!(format!("{:.3}", d("9.9996")), "10");
        assert_eq!(Dd::zero().to_string(), "0");
        let pi = Dd::PI.to_string();
        assert!(((d(&pi) - Dd::PI) / Dd::PI).abs().to_f64() < 1e-31, "{pi}");
    }

    #[test]
    fn elementary_functions_reach_double_double_accuracy() {
        let tol = 1e-30;
        close(Dd::from_f64(0.7).exp(), (2.0137527074704766, -2.0058243549764793e-16), tol);
        close(Dd::from_f64(-31.25).exp(), (2.6810038677818034e-14, -1.3268581611364822e-30), tol);
        close(Dd::from_f64(3.3).ln(), (1.1939224684724346, -5.282476628744736e-17), tol);
        close(Dd::from_f64(1e-200).ln(), (-460.51701859880916, 2.2080942657241066e-14), tol);
        close(Dd::from_f64(100.0).sin(), (-0.5063656411097588, -3.050947053792115e-18), tol);
        close(Dd::from_f64(-7.1).cos(), (0.6845466664428066, 4.56044787414428e-18), tol);
        close(Dd::from_f64(-1.2).atan2(Dd::from_f64(-0.4)), (-1.892546881191539, 6.962814559505476e-17), tol);
        close(Dd::from_f64(1e-3).atan2(Dd::one()), (0.0009999996666668668, -1.0247543344088032e-19), tol);
        close(Dd::from_f64(2.0).sqrt(), (std::f64::consts::SQRT_2, -9.667293313452913e-17), tol);
        close(Dd::from_f64(2.5).powf(Dd::ratio(1, 3)), (1.3572088082974534, -9.826954105290638e-17), tol);
    }

    #[test]
    fn arithmetic_identities() {
        let a = Dd::ratio(1, 3);
        let b = a * Dd::from_f64(3.0) - Dd::one();
        assert!(b.hi.abs() < 1e-31);
        let q = Dd::from_f64(10.0) % Dd::from_f64(3.0);
        assert_eq!(q, Dd::one());
        assert!(Dd::from_f64(2.5).floor() == Dd::from_f64(2.0));
        assert!(Dd::from_f64(-2.5).floor() == Dd::from_f64(-3.0));
    }

    #[test]
    fn limbs_round_trip() {
        let x = Dd::pi();
        assert_eq!(Dd::from_limbs(&x.to_limbs()), Some(x));
        assert_eq!(f64::from_limbs(&[1.5]), Some(1.5));
        assert_eq!(f64::from_limbs(&[1.5, 2.0]), None);
    }
}
