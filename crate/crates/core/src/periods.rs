//! Holomorphic differentials, their integrals along lifted paths and the
//! period matrices P_A, P_B, τ = P_A·P_B⁻¹.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::{exponents, y_ref, Which};
use crate::config::BranchConfig;
use crate::cx::{div, exp, lift, ln, lower, omega_pow, C};
use crate::cycles::{certified_basis, LiftedCycle, LiftedPath, SymplecticBasis};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, min_eigenvalue, Mat};
use crate::quad::{tanh_sinh, QuadSettings};
use crate::real::Real;
use crate::spider::{check_base_point, find_base_point, Spider};
use crate::tree::MarkedBinaryTree;

/// η_j = (x−c₁)^{j−1}dx/y₁ for j ≤ d1, then (x−c₂)^{j−1}dx/y₂ for j ≤ d2.
/// The centers are 0 for the standard basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentialBasis {
    pub d1: usize,
    pub d2: usize,
    pub y1_center: Complex64,
    pub y2_center: Complex64,
}

impl DifferentialBasis {
    pub fn standard(config: &BranchConfig) -> Self {
        DifferentialBasis { d1: config.d1(), d2: config.d2(), y1_center: Complex64::zero(), y2_center: Complex64::zero() }
    }

    /// Basis with the y₂-forms expanded around `center`.
    pub fn shifted_y2(config: &BranchConfig, center: Complex64) -> Self {
        DifferentialBasis { y2_center: center, ..Self::standard(config) }
    }

    pub fn len(&self) -> usize {
        self.d1 + self.d2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn which(&self, f: usize) -> Which {
        if f < self.d1 {
            Which::Y1
        } else {
            Which::Y2
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodSettings {
    pub quad: QuadSettings,
    /// Seed for the base-point search and intersection jitter.
    pub seed: u64,
    /// Fixed base point; searched for when absent.
    pub base: Option<Complex64>,
    /// Verify the intersection form of the basis before integrating.
    pub certify: bool,
}

impl PeriodSettings {
    pub fn for_precision<R: Real>() -> Self {
        PeriodSettings { quad: QuadSettings::for_precision::<R>(), seed: 0, base: None, certify: true }
    }
}

/// Result of integrating every basis form along one path.
#[derive(Clone, Debug)]
pub struct PathIntegral<R: Real> {
    pub values: Vec<C<R>>,
    pub error: f64,
    /// y₁ at the end of the path (zero at a branch point).
    pub y1_end: C<R>,
}

struct Ctx<'a, R: Real> {
    pts: Vec<C<R>>,
    a: Vec<u8>,
    forms: &'a DifferentialBasis,
    settings: &'a QuadSettings,
}

const MAX_SPLIT_DEPTH: u32 = 60;

impl<R: Real> Ctx<'_, R> {
    fn new<'a>(config: &BranchConfig, forms: &'a DifferentialBasis, settings: &'a QuadSettings) -> Ctx<'a, R> {
        Ctx { pts: config.points().iter().map(|&z| lift(z)).collect(), a: config.indices().to_vec(), forms, settings }
    }

    /// ∫ over [p, q] with y₁(p) = yp. `q_branch` names the branch point at q.
    fn segment(&self, p: C<R>, yp: C<R>, q: C<R>, q_branch: Option<usize>, out: &mut [C<R>]) -> Result<f64> {
        let m = self.pts.len();
        let d = q - p;
        let third = R::ratio(1, 3);
        let pf = lower(p);
        let df = lower(d);
        let len = df.norm();
        let ptsf: Vec<Complex64> = self.pts.iter().map(|&z| lower(z)).collect();
        for (j, &l) in ptsf.iter().enumerate() {
            if Some(j) != q_branch && crate::branch::segment_distance(l, pf, pf + df) <= 1e-12 * len {
                return Err(Error::numerical("integrate_form", format!("path passes through branch point {l}")));
            }
        }
        let (c1, c2) = (lift::<R>(self.forms.y1_center), lift::<R>(self.forms.y2_center));
        let nf = self.forms.len();
        let mut err = 0.0;
        let mut stack = vec![(R::zero(), R::one(), 0u32)];
        while let Some((u0, u1, depth)) = stack.pop() {
            let h = u1 - u0;
            let (a0, a1) = (pf + df * u0.to_f64(), pf + df * u1.to_f64());
            let sublen = len * h.to_f64();
            let near = ptsf
                .iter()
                .enumerate()
                .any(|(j, &l)| Some(j) != q_branch && crate::branch::segment_distance(l, a0, a1) < self.settings.split * sublen);
            let touches_end = q_branch.is_some() && u1 == R::one();
            let q_near = q_branch.is_some() && !touches_end && {
                let l = ptsf[q_branch.unwrap()];
                crate::branch::segment_distance(l, a0, a1) < self.settings.split * sublen
            };
            if near || q_near {
                if depth >= MAX_SPLIT_DEPTH {
                    return Err(Error::numerical("integrate_form", "segment splitting exceeded its depth limit"));
                }
                let mid = (u0 + u1) * R::from_f64(0.5);
                stack.push((mid, u1, depth + 1));
                stack.push((u0, mid, depth + 1));
                continue;
            }
            // Re-anchor at the sub-segment start so that factors near a close
            // branch point are formed without cancellation.
            let start = p + d * u0;
            let y_start = if u0.is_zero() { yp } else { crate::branch::continue_segment(&self.pts, &self.a, p, yp, start)? };
            let step = d * h;
            let offs: Vec<C<R>> = self.pts.iter().map(|&l| start - l).collect();
            let w: Vec<C<R>> = offs.iter().map(|&o| div(step, o)).collect();
            let dp = offs.iter().fold(C::<R>::one(), |acc: C<R>, &o| acc * o);
            let one_minus_u0 = R::one() - u0;
            let one_minus_u1 = R::one() - u1;
            let r = tanh_sinh::<R>(nf, self.settings, |s, sc, buf| {
                let mut logsum = C::<R>::zero();
                let mut prod = C::<R>::one();
                for j in 0..m {
                    let rj = if Some(j) == q_branch {
                        C::new((one_minus_u1 + h * sc) / one_minus_u0, R::zero())
                    } else {
                        C::<R>::one() + w[j] * s
                    };
                    logsum = logsum + ln(rj) * (third * R::from_f64(self.a[j] as f64));
                    prod = prod * rj;
                }
                let y1 = y_start * exp(logsum);
                let inv_y1 = div(C::<R>::one(), y1);
                let inv_y2 = div(div(y1, prod), dp);
                let x = start + step * s;
                let mut pw = step;
                let t1 = x - c1;
                for k in 0..self.forms.d1 {
                    buf[k] = pw * inv_y1;
                    pw = pw * t1;
                }
                let t2 = x - c2;
                let mut pw = step;
                for k in 0..self.forms.d2 {
                    buf[self.forms.d1 + k] = pw * inv_y2;
                    pw = pw * t2;
                }
            })?;
            err += r.error;
            for (o, v) in out.iter_mut().zip(r.values) {
                *o = *o + v;
            }
        }
        Ok(err)
    }
}

fn branch_index(config: &BranchConfig, z: Complex64) -> Option<usize> {
    config.points().iter().position(|&l| l == z)
}

/// Integrates all basis forms along a polyline with y₁ = `y1_start` at its
/// first vertex. Only the last vertex may be a branch point.
pub fn path_integral<R: Real>(
    config: &BranchConfig,
    forms: &DifferentialBasis,
    polyline: &[Complex64],
    y1_start: C<R>,
    settings: &QuadSettings,
) -> Result<PathIntegral<R>> {
    if polyline.len() < 2 {
        return Err(Error::invalid("a path needs at least two waypoints"));
    }
    if branch_index(config, polyline[0]).is_some() {
        return Err(Error::invalid("paths must start away from the branch points"));
    }
    let ctx = Ctx::<R>::new(config, forms, settings);
    let e = exponents(config, Which::Y1);
    let mut values = vec![C::<R>::zero(); forms.len()];
    let mut err = 0.0;
    let mut y = y1_start;
    for (k, w) in polyline.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(Error::invalid("consecutive waypoints coincide"));
        }
        let qb = branch_index(config, w[1]);
        if qb.is_some() && k + 2 != polyline.len() {
            return Err(Error::invalid("only the last waypoint may be a branch point"));
        }
        let (p, q) = (lift::<R>(w[0]), lift::<R>(w[1]));
        err += ctx.segment(p, y, q, qb, &mut values)?;
        y = crate::branch::continue_segment(&ctx.pts, &e, p, y, q)?;
    }
    Ok(PathIntegral { values, error: err, y1_end: y })
}

/// ∫ η_f over a lifted path (sheet relative to the factor-wise principal branch).
pub fn integrate_form<R: Real>(
    config: &BranchConfig,
    forms: &DifferentialBasis,
    f: usize,
    path: &LiftedPath,
    settings: &QuadSettings,
) -> Result<(C<R>, f64)> {
    let pts: Vec<C<R>> = config.points().iter().map(|&z| lift(z)).collect();
    let start = lift::<R>(path.polyline[0]);
    let y1 = y_ref(&pts, &exponents(config, Which::Y1), start) * omega_pow::<R>(path.start_sheet as i64);
    let r = path_integral(config, forms, &path.polyline, y1, settings)?;
    Ok((r.values[f], r.error))
}

/// Spoke integrals G[i][f] = ∫_b^{λ_i} η_f on sheet 0.
#[derive(Clone, Debug)]
pub struct Spokes<R: Real> {
    pub base: Complex64,
    pub values: Vec<Vec<C<R>>>,
    pub error: f64,
}

pub fn spoke_integrals<R: Real>(
    config: &BranchConfig,
    forms: &DifferentialBasis,
    base: Complex64,
    settings: &QuadSettings,
) -> Result<Spokes<R>> {
    let pts: Vec<C<R>> = config.points().iter().map(|&z| lift(z)).collect();
    let y0 = y_ref(&pts, &exponents(config, Which::Y1), lift(base));
    let res: Vec<PathIntegral<R>> = (0..config.m())
        .into_par_iter()
        .map(|i| path_integral(config, forms, &[base, config.point(i)], y0, settings))
        .collect::<Result<_>>()?;
    let error = res.iter().map(|r| r.error).sum();
    Ok(Spokes { base, values: res.into_iter().map(|r| r.values).collect(), error })
}

/// Periods of a keyhole combination from spoke integrals:
/// ∫ γ_i^{(s)} η = (1 − μ)·ω^{∓s}·G[i], with μ = ω^{−a_i} (y₁) or ω^{−b_i} (y₂).
pub fn cycle_periods<R: Real>(
    config: &BranchConfig,
    forms: &DifferentialBasis,
    spokes: &[Vec<C<R>>],
    cycle: &LiftedCycle,
) -> Vec<C<R>> {
    let mut out = vec![C::<R>::zero(); forms.len()];
    for (&(i, s), &coef) in &cycle.terms {
        let k = R::from_f64(coef as f64);
        for (f, o) in out.iter_mut().enumerate() {
            let (mu, sheet) = match forms.which(f) {
                Which::Y1 => (omega_pow::<R>(-(config.a(i) as i64)), omega_pow::<R>(-(s as i64))),
                Which::Y2 => (omega_pow::<R>(-(config.b(i) as i64)), omega_pow::<R>(s as i64)),
            };
            *o = *o + (C::<R>::one() - mu) * sheet * spokes[i][f] * k;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct PeriodData<R: Real> {
    pub pa: Mat<R>,
    pub pb: Mat<R>,
    pub tau: Mat<R>,
    pub cond_b: f64,
    pub quad_error: f64,
    pub symmetry_residual: f64,
    pub min_eig_im_tau: f64,
    pub spider: Spider,
    pub basis: SymplecticBasis,
    pub forms: DifferentialBasis,
}

/// Largest acceptable relative asymmetry of τ.
pub const SYMMETRY_TOL: f64 = 1e-6;

/// P_A, P_B and τ from explicit cycle lists.
pub fn assemble<R: Real>(
    config: &BranchConfig,
    forms: &DifferentialBasis,
    spokes: &Spokes<R>,
    a: &[LiftedCycle],
    b: &[LiftedCycle],
) -> Result<(Mat<R>, Mat<R>, Mat<R>)> {
    let pa = Mat::from_rows(a.iter().map(|c| cycle_periods(config, forms, &spokes.values, c)).collect());
    let pb = Mat::from_rows(b.iter().map(|c| cycle_periods(config, forms, &spokes.values, c)).collect());
    let inv = pb
        .inverse()
        .ok_or_else(|| Error::numerical("period_matrices", "P_B is singular"))?;
    let tau = &pa * &inv;
    Ok((pa, pb, tau))
}

pub fn period_matrices<R: Real>(config: &BranchConfig, tree: &MarkedBinaryTree, settings: &PeriodSettings) -> Result<PeriodData<R>> {
    let spider = match settings.base {
        Some(b) => check_base_point(config, tree, b)?,
        None => find_base_point(config, tree, settings.seed)?,
    };
    let basis = if settings.certify {
        certified_basis(config, tree, &spider, settings.seed)?
    } else {
        crate::cycles::build_symplectic_basis(config, tree)?
    };
    let forms = DifferentialBasis::standard(config);
    let spokes = spoke_integrals::<R>(config, &forms, spider.base, &settings.quad)?;
    let (pa, pb, tau) = assemble(config, &forms, &spokes, &basis.a, &basis.b)?;
    let cond_b = pb.cond1();
    if !cond_b.is_finite() || cond_b * R::EPS.max(settings.quad.tol) > 1e-2 {
        return Err(Error::numerical("period_matrices", format!(
                "P_B is too ill-conditioned for quadrature tolerance {:.1e} (cond₁ = {cond_b:.3e})",
                settings.quad.tol
            )));
    }
    let symmetry_residual = tau.asymmetry();
    if symmetry_residual > SYMMETRY_TOL {
        return Err(Error::numerical("period_matrices", format!("τ is not symmetric (residual {symmetry_residual:.3e})")));
    }
    let im = tau.imag();
    if cholesky(&im).is_none() {
        return Err(Error::numerical("period_matrices", "Im τ is not positive definite"));
    }
    let imf: Vec<Vec<f64>> = im.iter().map(|r| r.iter().map(|x| x.to_f64()).collect()).collect();
    Ok(PeriodData {
        pa,
        pb,
        tau,
        cond_b,
        quad_error: spokes.error,
        symmetry_residual,
        min_eig_im_tau: min_eigenvalue(&imf),
        spider,
        basis,
        forms,
    })
}

/// Symmetrized τ, used downstream by the theta evaluation.
pub fn symmetrize<R: Real>(tau: &Mat<R>) -> Mat<R> {
    let half = R::from_f64(0.5);
    Mat::from_fn(tau.rows(), tau.cols(), |i, j| (tau[(i, j)] + tau[(j, i)]) * half)
}
