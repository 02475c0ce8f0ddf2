//! Branches of y₁ = Π(x−λ_j)^{a_j/3} and y₂ = Π(x−λ_j)^{b_j/3}.
//!
//! Along a straight segment [p, q] that avoids every λ_j, each ratio
//! (x−λ_j)/(p−λ_j) stays off the negative real axis, so
//! y(x) = y(p)·Π_j ((x−λ_j)/(p−λ_j))^{e_j/3} with principal powers is the
//! analytic continuation. No step control is needed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::BranchConfig;
use crate::cx::{exp, lift, ln, lower, C};
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Y1,
    Y2,
}

/// Exponent numerators e_j (a_j for y₁, b_j for y₂).
pub fn exponents(config: &BranchConfig, which: Which) -> Vec<u8> {
    (0..config.m())
        .map(|i| match which {
            Which::Y1 => config.a(i),
            Which::Y2 => config.b(i),
        })
        .collect()
}

/// Reference value exp(Σ (e_j/3) Log(x−λ_j)), principal factor by factor.
pub fn y_ref<R: Real>(points: &[C<R>], e: &[u8], x: C<R>) -> C<R> {
    let third = R::ratio(1, 3);
    let mut s = C::new(R::zero(), R::zero());
    for (&l, &ej) in points.iter().zip(e) {
        s = s + ln(x - l) * (third * R::from_f64(ej as f64));
    }
    exp(s)
}

/// Relative distance below which a point counts as lying on a segment.
const ON_SEGMENT: f64 = 1e-12;

fn dist_to_segment(z: Complex64, p: Complex64, q: Complex64) -> f64 {
    let d = q - p;
    let n = d.norm_sqr();
    if n == 0.0 {
        return (z - p).norm();
    }
    let u = ((z - p) * d.conj()).re / n;
    (z - (p + d * u.clamp(0.0, 1.0))).norm()
}

/// Distance from `z` to the closed segment [p, q].
pub fn segment_distance(z: Complex64, p: Complex64, q: Complex64) -> f64 {
    dist_to_segment(z, p, q)
}

/// Continues y from `p` (value `yp`) to `q` along the straight segment.
/// Fails if the segment passes through a branch point other than at `q`.
pub fn continue_segment<R: Real>(points: &[C<R>], e: &[u8], p: C<R>, yp: C<R>, q: C<R>) -> Result<C<R>> {
    let (pf, qf) = (lower(p), lower(q));
    let len = (qf - pf).norm();
    let third = R::ratio(1, 3);
    let mut s = C::new(R::zero(), R::zero());
    for (&l, &ej) in points.iter().zip(e) {
        let lf = lower(l);
        if l == q {
            // y vanishes at its own branch point.
            return Ok(C::new(R::zero(), R::zero()));
        }
        if dist_to_segment(lf, pf, qf) <= ON_SEGMENT * len.max(f64::MIN_POSITIVE) {
            return Err(Error::numerical(
                "branch_continue",
                format!("segment {pf}→{qf} passes through branch point {lf}"),
            ));
        }
        s = s + ln((q - l) / (p - l)) * (third * R::from_f64(ej as f64));
    }
    Ok(yp * exp(s))
}

/// Values of y along a polyline, starting from `start` at its first vertex.
pub fn branch_continue<R: Real>(
    config: &BranchConfig,
    which: Which,
    polyline: &[Complex64],
    start: C<R>,
) -> Result<Vec<C<R>>> {
    let pts: Vec<C<R>> = config.points().iter().map(|&z| lift(z)).collect();
    let e = exponents(config, which);
    let mut out = Vec::with_capacity(polyline.len());
    let mut y = start;
    out.push(y);
    for w in polyline.windows(2) {
        if w[0] == w[1] {
            return Err(Error::invalid("consecutive waypoints coincide"));
        }
        y = continue_segment(&pts, &e, lift(w[0]), y, lift(w[1]))?;
        out.push(y);
    }
    Ok(out)
}

/// Regular polygon approximating the circle |x − c| = r, traversed
/// anticlockwise from angle `phi0`, closed (first vertex repeated).
pub fn circle(c: Complex64, r: f64, phi0: f64, n: usize) -> Vec<Complex64> {
    (0..=n)
        .map(|k| c + Complex64::from_polar(r, phi0 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect()
}

/// Factor by which y changes after continuing around the closed polyline.
pub fn monodromy(config: &BranchConfig, which: Which, closed: &[Complex64]) -> Result<Complex64> {
    let y0 = y_ref::<f64>(config.points(), &exponents(config, which), closed[0]);
    let vals = branch_continue(config, which, closed, y0)?;
    Ok(vals[vals.len() - 1] / y0)
}
