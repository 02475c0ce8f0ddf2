//! Theta constants with rational characteristics:
//! ϑ(τ)[α,β] = Σ_{m∈ℤ^g} e(½(m+α)τ(m+α)ᵀ + (m+α)βᵀ),  e(x) = exp(2πix).
//!
//! The sum runs over the ellipsoid ‖Lᵀ(m+α)‖ ≤ R, where πY = LLᵀ and Y = Im τ.
//! Every omitted term has modulus exp(−‖Lᵀ(m+α)‖²). The tail is bounded by
//! (g/2)(2/ρ)^g Γ(g/2, (R − ρ/2)²) with ρ the shortest nonzero vector of the
//! lattice Lᵀℤ^g, multiplied by a safety factor. The honesty test in the
//! integration suite checks this bound against halved tolerances.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::cx::{abs, e2pi, powi, C};
use crate::error::{Error, Result};
use crate::f3::{signed, F3Class};
use crate::linalg::{cholesky, Mat};
use crate::real::Real;
use crate::tree::MarkedBinaryTree;
use crate::config::Color;

/// Characteristic with entries in (1/6)ℤ, reduced mod 1 (stored as sixths in 0..6).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Characteristic {
    pub alpha: Vec<u8>,
    pub beta: Vec<u8>,
}

impl Characteristic {
    pub fn from_sixths(alpha: &[i64], beta: &[i64]) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::invalid("α and β have different lengths"));
        }
        let r = |x: &i64| x.rem_euclid(6) as u8;
        Ok(Characteristic { alpha: alpha.iter().map(r).collect(), beta: beta.iter().map(r).collect() })
    }

    pub fn genus(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha_real<R: Real>(&self) -> Vec<R> {
        self.alpha.iter().map(|&k| R::ratio(k as i64, 6)).collect()
    }

    pub fn beta_real<R: Real>(&self) -> Vec<R> {
        self.beta.iter().map(|&k| R::ratio(k as i64, 6)).collect()
    }

    /// Parses `"a1,a2,..;b1,b2,.."`, entries as integers or fractions p/q with q | 6.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(';').ok_or_else(|| Error::invalid("characteristic must look like 'a1,a2;b1,b2'"))?;
        let parse_list = |t: &str| -> Result<Vec<i64>> {
            t.split(',').map(|x| parse_sixths(x.trim())).collect()
        };
        Characteristic::from_sixths(&parse_list(a)?, &parse_list(b)?)
    }

    /// Componentwise sum mod 1.
    pub fn add(&self, o: &Characteristic) -> Characteristic {
        let add = |x: &[u8], y: &[u8]| x.iter().zip(y).map(|(a, b)| (a + b) % 6).collect();
        Characteristic { alpha: add(&self.alpha, &o.alpha), beta: add(&self.beta, &o.beta) }
    }

    /// Whether 4α·β is odd for a half-integer characteristic.
    pub fn is_odd_half(&self) -> Option<bool> {
        if self.alpha.iter().chain(&self.beta).any(|&k| k % 3 != 0) {
            return None;
        }
        let dot: u32 = self.alpha.iter().zip(&self.beta).map(|(&a, &b)| (a / 3) as u32 * (b / 3) as u32).sum();
        Some(dot % 2 == 1)
    }
}

fn parse_sixths(x: &str) -> Result<i64> {
    let bad = || Error::invalid(format!("cannot read '{x}' as a multiple of 1/6"));
    let (p, q) = match x.split_once('/') {
        Some((p, q)) => (p.trim().parse::<i64>().map_err(|_| bad())?, q.trim().parse::<i64>().map_err(|_| bad())?),
        None => (x.parse::<i64>().map_err(|_| bad())?, 1),
    };
    if q <= 0 || 6 % q != 0 {
        return Err(bad());
    }
    Ok(p * (6 / q))
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[u8]| {
            v.iter()
                .map(|&k| match k {
                    0 => "0".to_string(),
                    3 => "1/2".to_string(),
                    2 | 4 => format!("{}/3", k / 2),
                    _ => format!("{k}/6"),
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "[{};{}]", show(&self.alpha), show(&self.beta))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSettings {
    /// Absolute truncation target.
    pub eps: f64,
    /// Maximum number of lattice points.
    pub max_points: usize,
}

impl ThetaSettings {
    pub fn for_precision<R: Real>() -> Self {
        let eps = if R::EPS < 1e-20 { 1e-30 } else { 1e-16 };
        ThetaSettings { eps, max_points: 5_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct ThetaValue<R: Real> {
    pub value: C<R>,
    /// Bound on the omitted tail.
    pub bound: f64,
    pub radius: f64,
    pub points: usize,
}

/// Safety factor on the analytic tail bound.
const TAIL_SAFETY: f64 = 4.0;

fn tail_bound(g: usize, rho: f64, r: f64) -> f64 {
    if r <= rho / 2.0 {
        return f64::INFINITY;
    }
    let s = g as f64 / 2.0;
    let x = (r - rho / 2.0).powi(2);
    TAIL_SAFETY * s * (2.0 / rho).powi(g as i32) * gamma_ur(s, x) * gamma(s)
}

/// Upper-triangular U with ‖U x‖² = π xᵀ(Im τ)x.
fn lattice_factor<R: Real>(tau: &Mat<R>) -> Result<Vec<Vec<f64>>> {
    let g = tau.rows();
    let y: Vec<Vec<R>> = (0..g)
        .map(|i| (0..g).map(|j| (tau[(i, j)].im + tau[(j, i)].im) * R::from_f64(0.5) * R::pi()).collect())
        .collect();
    let l = cholesky(&y).ok_or_else(|| Error::numerical("theta", "Im τ is not positive definite"))?;
    Ok((0..g).map(|i| (0..g).map(|j| l[j][i].to_f64()).collect()).collect())
}

/// Calls `visit(m)` for all integer m with ‖U(m+α)‖² ≤ r2, in a fixed order.
fn enumerate(u: &[Vec<f64>], alpha: &[f64], r2: f64, budget: usize, visit: &mut dyn FnMut(&[i64])) -> Result<usize> {
    let g = u.len();
    let mut m = vec![0i64; g];
    let mut count = 0usize;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        u: &[Vec<f64>],
        alpha: &[f64],
        rem: f64,
        m: &mut Vec<i64>,
        count: &mut usize,
        budget: usize,
        visit: &mut dyn FnMut(&[i64]),
    ) -> bool {
        let g = u.len();
        let c: f64 = (i + 1..g).map(|j| u[i][j] * (m[j] as f64 + alpha[j])).sum();
        let d = u[i][i];
        let s = rem.max(0.0).sqrt();
        let lo = ((-c - s) / d - alpha[i]).ceil() as i64;
        let hi = ((-c + s) / d - alpha[i]).floor() as i64;
        for k in lo..=hi {
            m[i] = k;
            let t = d * (k as f64 + alpha[i]) + c;
            let r = rem - t * t;
            if r < 0.0 {
                continue;
            }
            if i == 0 {
                *count += 1;
                if *count > budget {
                    return false;
                }
                visit(m);
            } else if !rec(i - 1, u, alpha, r, m, count, budget, visit) {
                return false;
            }
        }
        true
    }
    if g == 0 {
        visit(&m);
        return Ok(1);
    }
    if !rec(g - 1, u, alpha, r2, &mut m, &mut count, budget, visit) {
        return Err(Error::numerical("theta", format!("lattice enumeration exceeded {budget} points")));
    }
    Ok(count)
}

/// Length of the shortest nonzero vector of Uℤ^g.
fn shortest_vector(u: &[Vec<f64>]) -> Result<f64> {
    let g = u.len();
    let zero = vec![0.0; g];
    let mut r2 = (0..g).map(|i| u[i][i] * u[i][i]).fold(f64::INFINITY, f64::min).max(f64::MIN_POSITIVE);
    // The first basis vector has squared length Σ_i u[i][0]², an upper bound.
    r2 = r2.max((0..g).map(|i| u[i][0] * u[i][0]).sum());
    let mut best = f64::INFINITY;
    enumerate(u, &zero, r2 * (1.0 + 1e-9), 10_000_000, &mut |m| {
        if m.iter().any(|&k| k != 0) {
            let q: f64 = (0..g).map(|i| (i..g).map(|j| u[i][j] * m[j] as f64).sum::<f64>().powi(2)).sum();
            best = best.min(q);
        }
    })?;
    Ok(best.sqrt())
}

/// Theta series with arbitrary real characteristic vectors.
pub fn theta_series<R: Real>(tau: &Mat<R>, alpha: &[R], beta: &[R], settings: &ThetaSettings) -> Result<ThetaValue<R>> {
    let g = tau.rows();
    if alpha.len() != g || beta.len() != g {
        return Err(Error::invalid(format!("characteristic has length {} but τ is {g}×{g}", alpha.len())));
    }
    let u = lattice_factor(tau)?;
    let rho = shortest_vector(&u)?;
    let mut r = rho / 2.0 + 1.0;
    while tail_bound(g, rho, r) > settings.eps {
        r += 0.25;
        if r > 1e3 {
            return Err(Error::numerical("theta", "no truncation radius meets the tolerance"));
        }
    }
    let af: Vec<f64> = alpha.iter().map(|x| x.to_f64()).collect();
    let half = R::from_f64(0.5);
    let mut sum = C::new(R::zero(), R::zero());
    let mut v = vec![R::zero(); g];
    let points = enumerate(&u, &af, r * r, settings.max_points, &mut |m| {
        for i in 0..g {
            v[i] = R::from_f64(m[i] as f64) + alpha[i];
        }
        let mut q = C::new(R::zero(), R::zero());
        for i in 0..g {
            let mut row = C::new(R::zero(), R::zero());
            for j in 0..g {
                row = row + tau[(i, j)] * v[j];
            }
            q = q + row * v[i];
        }
        let lin = (0..g).fold(R::zero(), |s, i| s + v[i] * beta[i]);
        sum = sum + e2pi(q * half + C::new(lin, R::zero()));
    })?;
    Ok(ThetaValue { value: sum, bound: tail_bound(g, rho, r), radius: r, points })
}

pub fn theta_constant<R: Real>(tau: &Mat<R>, chi: &Characteristic, settings: &ThetaSettings) -> Result<ThetaValue<R>> {
    if chi.genus() != tau.rows() {
        return Err(Error::invalid(format!("characteristic of genus {} for a {}×{} τ", chi.genus(), tau.rows(), tau.rows())));
    }
    theta_series(tau, &chi.alpha_real(), &chi.beta_real(), settings)
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicityReport {
    pub base: [f64; 2],
    /// (α shift, β shift, relative deviation of ϑ⁶)
    pub shifts: Vec<(Vec<i64>, Vec<i64>, f64)>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// ϑ[α+a, β+b]⁶ = ϑ[α,β]⁶ for integer shifts (a, b).
pub fn sixth_power_periodicity_check<R: Real>(
    tau: &Mat<R>,
    chi: &Characteristic,
    shifts: &[(Vec<i64>, Vec<i64>)],
    settings: &ThetaSettings,
) -> Result<PeriodicityReport> {
    let (a0, b0): (Vec<R>, Vec<R>) = (chi.alpha_real(), chi.beta_real());
    let base = powi(theta_series(tau, &a0, &b0, settings)?.value, 6);
    let scale = abs(base).to_f64().max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    let mut worst: f64 = 0.0;
    for (da, db) in shifts {
        let a: Vec<R> = a0.iter().zip(da).map(|(&x, &k)| x + R::from_f64(k as f64)).collect();
        let b: Vec<R> = b0.iter().zip(db).map(|(&x, &k)| x + R::from_f64(k as f64)).collect();
        let v = powi(theta_series(tau, &a, &b, settings)?.value, 6);
        let dev = abs(v - base).to_f64() / scale;
        worst = worst.max(dev);
        out.push((da.clone(), db.clone(), dev));
    }
    let tol = 10.0 * settings.eps.max(R::EPS * 64.0) / scale.min(1.0);
    Ok(PeriodicityReport { base: [base.re.to_f64(), base.im.to_f64()], shifts: out, max_deviation: worst, pass: worst <= tol.max(1e-9) })
}

/// ϱ = Σ_v ½(A_v + B_v): every entry ½.
pub fn riemann_constant(tree: &MarkedBinaryTree) -> Characteristic {
    let g = tree.genus();
    Characteristic { alpha: vec![3; g], beta: vec![3; g] }
}

/// The characteristic ϱ + Σ_v c_v(s_v/3, −s_v/3) of Λ = Σ c_v \overline{A_v},
/// with s_v = +1 for white and −1 for black v, in inner_order.
pub fn characteristic_of(tree: &MarkedBinaryTree, lambda: &F3Class) -> Result<Characteristic> {
    let c = tree.abar_basis_expand(lambda)?;
    let order = tree.inner_order();
    let mut alpha = Vec::with_capacity(c.len());
    let mut beta = Vec::with_capacity(c.len());
    for (&v, &cv) in order.iter().zip(&c) {
        let s = match tree.inner_color(v) {
            Color::White => 1,
            Color::Black => -1,
        };
        let cv = signed(cv) as i64;
        alpha.push(2 * s * cv + 3);
        beta.push(-2 * s * cv + 3);
    }
    Characteristic::from_sixths(&alpha, &beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;

    #[test]
    fn parse_and_display() {
        let chi = Characteristic::parse("5/6, 5/6; 1/6, 1/6").unwrap();
        assert_eq!(chi.alpha, vec![5, 5]);
        assert_eq!(chi.to_string(), "[5/6,5/6;1/6,1/6]");
        assert_eq!(Characteristic::parse("1/6;-1/6").unwrap().beta, vec![5]);
        assert!(Characteristic::parse("1/5;0").is_err());
        assert!(Characteristic::parse("1,2").is_err());
    }

    #[test]
    fn theta_at_i() {
        // ϑ(i)[0,0] = π^{1/4}/Γ(3/4).
        let tau: Mat<f64> = Mat::from_rows(vec![vec![c(0.0, 1.0)]]);
        let chi = Characteristic::from_sixths(&[0], &[0]).unwrap();
        let v = theta_constant(&tau, &chi, &ThetaSettings::for_precision::<f64>()).unwrap();
        assert!((v.value.re - 1.086_434_811_213_308).abs() < 1e-14, "{:?}", v.value);
        assert!(v.value.im.abs() < 1e-15);
    }

    #[test]
    fn odd_half_characteristic_vanishes() {
        let tau: Mat<f64> = Mat::from_rows(vec![vec![c(0.3, 1.1)]]);
        let chi = Characteristic::from_sixths(&[3], &[3]).unwrap();
        assert_eq!(chi.is_odd_half(), Some(true));
        let v = theta_constant(&tau, &chi, &ThetaSettings::for_precision::<f64>()).unwrap();
        assert!(abs(v.value) < 1e-14);
    }
}
