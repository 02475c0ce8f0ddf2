//! One-parameter families in which branch points collide, and numerical
//! checks of how periods, det P_B and theta constants behave in the limit.
//!
//! Two families are supported. A merge family moves two terminals λ_i, λ_{i+1}
//! of a cherry toward a point λ̃, λ_k(t) = λ̃ + t(λ_k − λ̃). A scale family
//! shrinks one side of an edge cut toward a center. Limits in t → 0 are taken
//! by polynomial (Richardson) extrapolation in h = t^{1/3}.

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::branch::{exponents, y_ref, Which};
use crate::config::{BranchConfig, Color};
use crate::cx::{lift, lower, powr, C};
use crate::cycles::{certified_basis, SymplecticBasis};
use crate::error::{Error, Result};
use crate::f3::F3Class;
use crate::linalg::Mat;
use crate::periods::{assemble, cycle_periods, path_integral, spoke_integrals, symmetrize, DifferentialBasis};
use crate::quad::QuadSettings;
use crate::real::Real;
use crate::spider::{check_base_point, find_base_point, find_base_point_multi, Spider};
use crate::theta::{characteristic_of, theta_constant, Characteristic, ThetaSettings};
use crate::tree::{equidistribution, Derived, MarkedBinaryTree};

/// B(1/3, 1/3) = Γ(1/3)²/Γ(2/3).
pub fn beta_one_third() -> f64 {
    gamma(1.0 / 3.0).powi(2) / gamma(2.0 / 3.0)
}

/// B*(1/3, 1/3) = (ω − 1)·B(1/3, 1/3).
pub fn beta_star() -> Complex64 {
    let omega = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    (omega - 1.0) * beta_one_third()
}

/// ϑ(ω)[1/6, −1/6]⁶ = 3^{9/4}(2π)^{−6}Γ(1/3)⁹e^{−5πi/12}.
pub fn chowla_selberg_value() -> Complex64 {
    let pi = std::f64::consts::PI;
    let modulus = 3f64.powf(9.0 / 4.0) * (2.0 * pi).powi(-6) * gamma(1.0 / 3.0).powi(9);
    Complex64::from_polar(modulus, -5.0 * pi / 12.0)
}

/// λ_k(t) = λ̃ + t(λ_k − λ̃) for k = i, i+1; other points fixed.
pub fn family_merge(config: &BranchConfig, i: usize, tilde: Complex64, t: f64) -> Result<BranchConfig> {
    if i + 1 >= config.m() {
        return Err(Error::invalid(format!("merge index {i} needs a successor among {} points", config.m())));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::invalid(format!("merge parameter t = {t} is outside (0, 1]")));
    }
    if let Some(k) = (0..config.m()).find(|&k| k != i && k != i + 1 && config.point(k) == tilde) {
        return Err(Error::invalid(format!("λ̃ coincides with branch point {k}")));
    }
    config.map_points(|k, z| if k == i || k == i + 1 { tilde + (z - tilde) * t } else { z })
}

/// λ_k(t) = t·λ_k for k in `subset`.
pub fn family_scale(config: &BranchConfig, subset: &[usize], t: Complex64) -> Result<BranchConfig> {
    family_scale_about(config, subset, Complex64::zero(), t)
}

/// λ_k(t) = c + t(λ_k − c) for k in `subset`.
pub fn family_scale_about(config: &BranchConfig, subset: &[usize], center: Complex64, t: Complex64) -> Result<BranchConfig> {
    if t == Complex64::zero() {
        return Err(Error::invalid("t = 0 collapses the scaled branch points"));
    }
    if let Some(&k) = subset.iter().find(|&&k| k >= config.m()) {
        return Err(Error::invalid(format!("subset index {k} out of range")));
    }
    config.map_points(|k, z| if subset.contains(&k) { center + (z - center) * t } else { z })
}

/// Values of a quantity along a t-sequence and its extrapolated limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limit {
    pub t: Vec<f64>,
    pub values: Vec<[f64; 2]>,
    pub extrapolated: [f64; 2],
    /// |full-stencil extrapolant − extrapolant without the largest t|.
    pub error_estimate: f64,
    /// Least-squares slope of log|value| against log t.
    pub slope: f64,
}

impl Limit {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.extrapolated[0], self.extrapolated[1])
    }
}

fn neville_at_zero(h: &[f64], v: &[Complex64]) -> Complex64 {
    let mut p = v.to_vec();
    let n = h.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i + 1] * h[i] - p[i] * h[i + k]) / (h[i] - h[i + k]);
        }
    }
    p[0]
}

/// Polynomial extrapolation to h = t^{1/3} → 0 through every sample.
pub fn extrapolate(t: &[f64], v: &[Complex64]) -> Result<Limit> {
    if t.len() != v.len() || t.len() < 2 {
        return Err(Error::invalid("extrapolation needs at least two samples"));
    }
    let mut idx: Vec<usize> = (0..t.len()).collect();
    idx.sort_by(|&a, &b| t[b].partial_cmp(&t[a]).unwrap());
    let h: Vec<f64> = idx.iter().map(|&k| t[k].cbrt()).collect();
    let vs: Vec<Complex64> = idx.iter().map(|&k| v[k]).collect();
    let full = neville_at_zero(&h, &vs);
    let reduced = neville_at_zero(&h[1..], &vs[1..]);
    let err = (full - reduced).norm();
    let scale = vs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !full.re.is_finite() || !full.im.is_finite() || err > scale {
        return Err(Error::numerical(
            "extrapolation",
            format!("sequence does not settle (estimate {err:.3e} against values of size {scale:.3e})"),
        ));
    }
    let xs: Vec<f64> = t.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = v.iter().map(|z| z.norm().max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(Limit {
        t: t.to_vec(),
        values: v.iter().map(|z| [z.re, z.im]).collect(),
        extrapolated: [full.re, full.im],
        error_estimate: err,
        slope: if sxx > 0.0 { sxy / sxx } else { 0.0 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerationSettings {
    /// Decreasing values of t in (0, 1].
    pub t_seq: Vec<f64>,
    pub quad: QuadSettings,
    pub seed: u64,
    /// Relative tolerance for period and determinant limits.
    pub tol: f64,
    /// Relative tolerance for the theta factorization.
    pub theta_tol: f64,
    pub theta: ThetaSettings,
}

impl DegenerationSettings {
    pub fn for_precision<R: Real>() -> Self {
        DegenerationSettings {
            t_seq: vec![1e-2, 1e-3, 1e-4, 1e-5],
            quad: QuadSettings::for_precision::<R>(),
            seed: 0,
            tol: 1e-3,
            theta_tol: 1e-4,
            theta: ThetaSettings::for_precision::<R>(),
        }
    }
}

/// A validated merge of terminals i, i+1 at the inner vertex p.
#[derive(Clone, Debug)]
pub struct MergeSetup {
    pub i: usize,
    pub j: usize,
    pub tilde: Complex64,
    pub p: usize,
    /// Both merged terminals are white.
    pub white: bool,
    pub merged: Derived,
    /// Σ′: λ̃ in place of λ_i, λ_{i+1}, with index a_i + a_{i+1} mod 3.
    pub limit_config: BranchConfig,
}

impl MergeSetup {
    pub fn new(config: &BranchConfig, tree: &MarkedBinaryTree, i: usize, tilde: Complex64) -> Result<Self> {
        tree.validate(config).into_result()?;
        let j = i + 1;
        if j >= config.m() {
            return Err(Error::invalid(format!("merge index {i} needs a successor among {} points", config.m())));
        }
        let p = tree
            .cherry(i, j)
            .ok_or_else(|| Error::invalid(format!("terminals {i} and {j} are not adjacent to a common inner vertex")))?;
        let (li, lj) = (tree.leaf(i), tree.leaf(j));
        let q = *tree.neighbors(p).iter().find(|&&u| u != li && u != lj).expect("trivalent");
        if tree.mark(p) != q {
            return Err(Error::invalid(format!(
                "the marked edge at the vertex of terminals {i}, {j} must point away from both"
            )));
        }
        family_merge(config, i, tilde, 1.0)?;
        let merged = tree.merge_terminals(i, j)?;
        let idx = merged.indices();
        let points = merged
            .origin
            .iter()
            .map(|o| match o {
                Some(k) => config.point(*k),
                None => tilde,
            })
            .collect();
        let limit_config = BranchConfig::new(points, idx)?;
        debug_assert_eq!(limit_config.a(merged.new_branch) as usize, (config.a(i) + config.a(j)) as usize % 3);
        Ok(MergeSetup { i, j, tilde, p, white: config.color(i) == Color::White, merged, limit_config })
    }

    /// Forms expanded around λ̃ on the side (y₂ for white, y₁ for black) whose
    /// first form blows up in the limit.
    pub fn forms(&self, config: &BranchConfig) -> DifferentialBasis {
        let f = DifferentialBasis::standard(config);
        if self.white {
            DifferentialBasis { y2_center: self.tilde, ..f }
        } else {
            DifferentialBasis { y1_center: self.tilde, ..f }
        }
    }

    /// Column of the diverging form.
    pub fn divergent_column(&self, config: &BranchConfig) -> usize {
        if self.white {
            config.d1()
        } else {
            0
        }
    }

    /// Π_{k≠i,i+1} (λ̃ − λ_k)^{−e_k} with e = b (white) or a (black).
    pub fn tilde_product(&self, config: &BranchConfig) -> Complex64 {
        let mut p = Complex64::new(1.0, 0.0);
        for k in (0..config.m()).filter(|&k| k != self.i && k != self.j) {
            let e = if self.white { config.b(k) } else { config.a(k) };
            p *= (self.tilde - config.point(k)).powi(-(e as i32));
        }
        p
    }
}

#[derive(Clone, Debug)]
pub struct FamilySample<R: Real> {
    pub t: f64,
    pub pa: Mat<R>,
    pub pb: Mat<R>,
    pub tau: Mat<R>,
}

/// Period matrices along a merge family, all with the same base point and
/// cycle combinatorics, plus the limit curve's matrices.
#[derive(Clone, Debug)]
pub struct MergeFamily<R: Real> {
    pub setup: MergeSetup,
    pub spider: Spider,
    pub basis: SymplecticBasis,
    pub forms: DifferentialBasis,
    pub samples: Vec<FamilySample<R>>,
    pub p_row: usize,
    pub dcol: usize,
    pub limit_pa: Mat<R>,
    pub limit_pb: Mat<R>,
    pub limit_tau: Mat<R>,
    /// Family row → limit row, for every row except p.
    pub row_map: Vec<Option<usize>>,
}

fn validate_t_seq(t: &[f64]) -> Result<()> {
    if t.len() < 2 {
        return Err(Error::invalid("the t-sequence needs at least two values"));
    }
    if t.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::invalid("t-sequence values must lie in (0, 1]"));
    }
    let mut s = t.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("t-sequence values must be distinct"));
    }
    Ok(())
}

fn matrices<R: Real>(
    config: &BranchConfig,
    forms: &DifferentialBasis,
    base: Complex64,
    basis: &SymplecticBasis,
    quad: &QuadSettings,
) -> Result<(Mat<R>, Mat<R>, Mat<R>)> {
    let spokes = spoke_integrals::<R>(config, forms, base, quad)?;
    assemble(config, forms, &spokes, &basis.a, &basis.b)
}

pub fn merge_family<R: Real>(
    config: &BranchConfig,
    tree: &MarkedBinaryTree,
    i: usize,
    tilde: Complex64,
    settings: &DegenerationSettings,
) -> Result<MergeFamily<R>> {
    validate_t_seq(&settings.t_seq)?;
    let setup = MergeSetup::new(config, tree, i, tilde)?;
    let t_min = settings.t_seq.iter().copied().fold(1.0, f64::min);
    // A dense grid so the base point stays admissible along the whole path.
    let mut grid: Vec<f64> = settings.t_seq.clone();
    let mut t = 1.0;
    while t > t_min {
        grid.push(t);
        t *= 10f64.powf(-0.25);
    }
    let configs: Vec<BranchConfig> = grid.iter().map(|&t| family_merge(config, i, tilde, t)).collect::<Result<_>>()?;
    let refs: Vec<&BranchConfig> = configs.iter().collect();
    let spider = find_base_point_multi(&refs, tree, settings.seed)?;
    let basis = certified_basis(config, tree, &spider, settings.seed)?;
    let forms = setup.forms(config);

    let samples: Vec<FamilySample<R>> = settings
        .t_seq
        .par_iter()
        .map(|&t| {
            let c = family_merge(config, i, tilde, t)?;
            let (pa, pb, tau) = matrices::<R>(&c, &forms, spider.base, &basis, &settings.quad)?;
            Ok(FamilySample { t, pa, pb, tau })
        })
        .collect::<Result<_>>()?;

    let lc = &setup.limit_config;
    let lt = &setup.merged.tree;
    let lspider = check_base_point(lc, lt, spider.base)
        .map_err(|e| Error::numerical("merge_family", format!("base point unusable on the limit curve: {e}")))?;
    let lbasis = certified_basis(lc, lt, &lspider, settings.seed)?;
    let (limit_pa, limit_pb, limit_tau) = matrices::<R>(lc, &setup.forms(lc), spider.base, &lbasis, &settings.quad)?;

    let p_row = basis.vertices.iter().position(|&v| v == setup.p).expect("p is an inner vertex");
    let row_map = basis
        .vertices
        .iter()
        .map(|&v| {
            if v == setup.p {
                return None;
            }
            lbasis.vertices.iter().position(|&w| lt.node_id(w) == tree.node_id(v))
        })
        .collect();
    let dcol = setup.divergent_column(config);
    Ok(MergeFamily { setup, spider, basis, forms, samples, p_row, dcol, limit_pa, limit_pb, limit_tau, row_map })
}

impl<R: Real> MergeFamily<R> {
    fn ts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    fn limit_of(&self, f: impl Fn(&FamilySample<R>) -> Complex64) -> Result<Limit> {
        let v: Vec<Complex64> = self.samples.iter().map(f).collect();
        extrapolate(&self.ts(), &v)
    }

    /// Sign of the cofactor expansion of det P_B along row p and the
    /// divergent column, including the row permutation onto the limit tree.
    pub fn cofactor_sign(&self) -> i32 {
        let perm: Vec<usize> = self.row_map.iter().filter_map(|&r| r).collect();
        let mut inv = 0;
        for a in 0..perm.len() {
            for b in a + 1..perm.len() {
                if perm[a] > perm[b] {
                    inv += 1;
                }
            }
        }
        if (self.p_row + self.dcol + inv).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    fn limit_column(&self, f: usize) -> usize {
        if f < self.dcol {
            f
        } else {
            f - 1
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormLimit {
    pub label: String,
    pub limit: Limit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodLimitReport {
    pub i: usize,
    pub tilde: [f64; 2],
    pub white: bool,
    pub base_point: [f64; 2],
    /// B_p periods of every non-diverging form, expected to vanish.
    pub vanishing: Vec<FormLimit>,
    /// Log-log slope of |∫_{B_p} η₁|, expected 1/3 when η₁ is a y₁-form.
    pub eta1_slope: Option<f64>,
    pub vanishing_pass: bool,
    /// t(λ_i − λ_{i+1})(∫_{B_p} η̃)³ for the diverging form η̃.
    pub divergent: Limit,
    /// B*(1/3,1/3)³·Π(λ̃−λ_k)^{−b_k}; none for a black merge.
    pub target: Option<[f64; 2]>,
    pub divergent_rel_error: Option<f64>,
    pub divergent_pass: Option<bool>,
    /// ∫_{B_v} η̃ for v ≠ p.
    pub finite: Vec<FormLimit>,
    pub finite_pass: bool,
    /// Largest deviation of limiting A- and B-periods (v ≠ p) from the
    /// limit curve's periods, relative to the largest limit-curve period.
    pub limit_curve_deviation: f64,
    pub limit_curve_pass: bool,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_period_limits<R: Real>(
    config: &BranchConfig,
    tree: &MarkedBinaryTree,
    i: usize,
    tilde: Complex64,
    settings: &DegenerationSettings,
) -> Result<PeriodLimitReport> {
    let fam = merge_family::<R>(config, tree, i, tilde, settings)?;
    period_limits_of(config, &fam, settings)
}

pub fn period_limits_of<R: Real>(config: &BranchConfig, fam: &MergeFamily<R>, settings: &DegenerationSettings) -> Result<PeriodLimitReport> {
    let s = &fam.setup;
    let (pr, dc) = (fam.p_row, fam.dcol);
    let n = fam.forms.len();
    let tol = settings.tol;

    let mut vanishing = Vec::new();
    for f in (0..n).filter(|&f| f != dc) {
        let lim = fam.limit_of(|x| lower(x.pb[(pr, f)]))?;
        vanishing.push(FormLimit { label: format!("eta_{}", f + 1), limit: lim });
    }
    let eta1_slope = (fam.forms.d1 > 0 && dc != 0).then(|| vanishing[0].limit.slope);
    let vanishing_pass = vanishing.iter().all(|fl| {
        let scale = fl.limit.values.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
        fl.limit.value().norm() <= tol * scale.max(1.0) && fl.limit.slope > 0.0
    }) && eta1_slope.is_none_or(|sl| (sl - 1.0 / 3.0).abs() <= 0.02);

    let gap = config.point(s.i) - config.point(s.j);
    let divergent = fam.limit_of(|x| {
        let z = lower(x.pb[(pr, dc)]);
        z * z * z * gap * x.t
    })?;
    let target = s.white.then(|| beta_star().powi(3) * s.tilde_product(config));
    let divergent_rel_error = target.map(|tg| (divergent.value() - tg).norm() / tg.norm());

    let mut finite = Vec::new();
    for (r, m) in fam.row_map.iter().enumerate() {
        if m.is_some() {
            let lim = fam.limit_of(|x| lower(x.pb[(r, dc)]))?;
            finite.push(FormLimit { label: format!("B_{} eta_{}", r, dc + 1), limit: lim });
        }
    }
    let finite_pass = finite.iter().all(|fl| fl.limit.slope > -0.1 && fl.limit.error_estimate <= tol * fl.limit.value().norm().max(1.0));

    let scale = fam.limit_pa.max_abs().max(fam.limit_pb.max_abs());
    let mut dev: f64 = 0.0;
    for (r, m) in fam.row_map.iter().enumerate() {
        let Some(lr) = *m else { continue };
        for f in (0..n).filter(|&f| f != dc) {
            let lf = fam.limit_column(f);
            for (mat, lim) in [(0, &fam.limit_pa), (1, &fam.limit_pb)] {
                let l = fam.limit_of(|x| lower(if mat == 0 { x.pa[(r, f)] } else { x.pb[(r, f)] }))?;
                dev = dev.max((l.value() - lower(lim[(lr, lf)])).norm() / scale);
            }
        }
    }
    let limit_curve_pass = dev <= tol;
    let divergent_pass = divergent_rel_error.map(|e| e <= tol);
    let pass = vanishing_pass && finite_pass && limit_curve_pass && divergent_pass.unwrap_or(true);
    Ok(PeriodLimitReport {
        i: s.i,
        tilde: [s.tilde.re, s.tilde.im],
        white: s.white,
        base_point: [fam.spider.base.re, fam.spider.base.im],
        vanishing,
        eta1_slope,
        vanishing_pass,
        divergent,
        target: target.map(|z| [z.re, z.im]),
        divergent_rel_error,
        divergent_pass,
        finite,
        finite_pass,
        limit_curve_deviation: dev,
        limit_curve_pass,
        tol,
        pass,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetLimitReport {
    /// t(λ_i − λ_{i+1})·det(P_B(Σ(t)))³.
    pub limit: Limit,
    /// det(P_B(Σ′, Γ′))³.
    pub limit_det_cubed: [f64; 2],
    /// Sign of the cofactor expansion for the library's row and column order.
    pub cofactor_sign: i32,
    /// σ·B*(1/3,1/3)³·Π(λ̃−λ_k)^{−b_k}·det(P_B(Σ′,Γ′))³; none for a black merge.
    pub target: Option<[f64; 2]>,
    /// Extrapolated value over det(P_B(Σ′,Γ′))³·Π(λ̃−λ_k)^{−e_k}, useful for black merges.
    pub normalized_limit: [f64; 2],
    pub rel_error: Option<f64>,
    pub tol: f64,
    pub pass: Option<bool>,
}

pub fn check_det_pb_limit<R: Real>(
    config: &BranchConfig,
    tree: &MarkedBinaryTree,
    i: usize,
    tilde: Complex64,
    settings: &DegenerationSettings,
) -> Result<DetLimitReport> {
    let fam = merge_family::<R>(config, tree, i, tilde, settings)?;
    det_pb_limit_of(config, &fam, settings)
}

pub fn det_pb_limit_of<R: Real>(config: &BranchConfig, fam: &MergeFamily<R>, settings: &DegenerationSettings) -> Result<DetLimitReport> {
    let s = &fam.setup;
    let gap = config.point(s.i) - config.point(s.j);
    let limit = fam.limit_of(|x| lower(x.pb.det()).powi(3) * gap * x.t)?;
    let d3 = lower(fam.limit_pb.det()).powi(3);
    let sigma = fam.cofactor_sign();
    let target = s.white.then(|| beta_star().powi(3) * s.tilde_product(config) * d3 * sigma as f64);
    let rel_error = target.map(|tg| (limit.value() - tg).norm() / tg.norm());
    let normalized = limit.value() / (d3 * s.tilde_product(config));
    Ok(DetLimitReport {
        limit,
        limit_det_cubed: [d3.re, d3.im],
        cofactor_sign: sigma,
        target: target.map(|z| [z.re, z.im]),
        normalized_limit: [normalized.re, normalized.im],
        rel_error,
        tol: settings.tol,
        pass: rel_error.map(|e| e <= settings.tol),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThetaFactorizationReport {
    pub lambda: Vec<u8>,
    pub lambda_prime: Vec<u8>,
    pub characteristic: String,
    pub characteristic_p: String,
    pub characteristic_prime: String,
    /// ϑ(τ(t))[Λ+ϱ]⁶ along the family.
    pub limit: Limit,
    pub tau_pp_limit: [f64; 2],
    /// Largest |lim τ_pj| over j ≠ p relative to |lim τ_pp|; the limit is block diagonal.
    pub tau_offdiag_limit: f64,
    /// ϑ(τ₁)[χ_p]⁶ at the extrapolated τ_pp.
    pub theta_p_sixth: [f64; 2],
    pub chowla_selberg: [f64; 2],
    /// ϑ(τ(Σ′,Γ′))[Λ′+ϱ′]⁶.
    pub theta_prime_sixth: [f64; 2],
    /// |lim − CS·ϑ′⁶| / |CS·ϑ′⁶|.
    pub rel_error: f64,
    /// |ϑ(τ₁)[χ_p]⁶ − CS| / |CS|.
    pub chowla_selberg_rel_error: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn theta_factorization_check<R: Real>(
    config: &BranchConfig,
    tree: &MarkedBinaryTree,
    lambda: &F3Class,
    i: usize,
    tilde: Complex64,
    settings: &DegenerationSettings,
) -> Result<ThetaFactorizationReport> {
    if lambda.len() != config.m() || !equidistribution(config.indices(), lambda.coeffs()).balanced {
        return Err(Error::invalid("Λ must be an equi-distributed labeling of the branch points"));
    }
    let k = lambda.coeffs();
    if i + 1 >= k.len() || k[i] == k[i + 1] {
        return Err(Error::invalid("the merged terminals must carry different labels"));
    }
    let fam = merge_family::<R>(config, tree, i, tilde, settings)?;
    theta_factorization_of(tree, lambda, &fam, settings)
}

pub fn theta_factorization_of<R: Real>(
    tree: &MarkedBinaryTree,
    lambda: &F3Class,
    fam: &MergeFamily<R>,
    settings: &DegenerationSettings,
) -> Result<ThetaFactorizationReport> {
    let s = &fam.setup;
    let chi = characteristic_of(tree, lambda)?;
    let sixth = |tau: &Mat<R>, ch: &Characteristic| -> Result<Complex64> {
        Ok(lower(theta_constant(&symmetrize(tau), ch, &settings.theta)?.value).powi(6))
    };
    let values: Vec<Complex64> = fam.samples.iter().map(|x| sixth(&x.tau, &chi)).collect::<Result<_>>()?;
    let limit = extrapolate(&fam.ts(), &values)?;

    let pr = fam.p_row;
    let chi_p = Characteristic::from_sixths(&[chi.alpha[pr] as i64], &[chi.beta[pr] as i64])?;
    let tau_pp = fam.limit_of(|x| lower(x.tau[(pr, pr)]))?;
    let mut offdiag: f64 = 0.0;
    for j in (0..fam.samples[0].tau.cols()).filter(|&j| j != pr) {
        let l = fam.limit_of(|x| lower(x.tau[(pr, j)]))?;
        offdiag = offdiag.max(l.value().norm() / tau_pp.value().norm());
    }
    let tau1: Mat<f64> = Mat::from_rows(vec![vec![tau_pp.value()]]);
    let th_p = lower(theta_constant(&tau1, &chi_p, &ThetaSettings::for_precision::<f64>())?.value).powi(6);

    let lambda_prime = tree.degenerate_class(lambda, s.i, s.j)?;
    let chi_prime = characteristic_of(&s.merged.tree, &lambda_prime)?;
    let th_prime = sixth(&fam.limit_tau, &chi_prime)?;

    let cs = chowla_selberg_value();
    let product = cs * th_prime;
    let rel_error = (limit.value() - product).norm() / product.norm();
    let cs_err = (th_p - cs).norm() / cs.norm();
    Ok(ThetaFactorizationReport {
        lambda: k_vec(lambda),
        lambda_prime: k_vec(&lambda_prime),
        characteristic: chi.to_string(),
        characteristic_p: chi_p.to_string(),
        characteristic_prime: chi_prime.to_string(),
        limit,
        tau_pp_limit: tau_pp.extrapolated,
        tau_offdiag_limit: offdiag,
        theta_p_sixth: [th_p.re, th_p.im],
        chowla_selberg: [cs.re, cs.im],
        theta_prime_sixth: [th_prime.re, th_prime.im],
        rel_error,
        chowla_selberg_rel_error: cs_err,
        tol: settings.theta_tol,
        pass: rel_error <= settings.theta_tol && cs_err <= settings.theta_tol && offdiag <= settings.tol,
    })
}

fn k_vec(l: &F3Class) -> Vec<u8> {
    l.coeffs().to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromySettings {
    /// Scale factor of the shrunk side at the start of the loop.
    pub t0: f64,
    /// Polyline vertices per full turn of the twist.
    pub samples_per_turn: usize,
    pub quad: QuadSettings,
    pub seed: u64,
    /// Bound on the relative drift after the loop.
    pub tol: f64,
}

impl MonodromySettings {
    pub fn for_precision<R: Real>() -> Self {
        MonodromySettings { t0: 0.1, samples_per_turn: 64, quad: QuadSettings::for_precision::<R>(), seed: 0, tol: 1e-6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonodromyReport {
    /// Terminals on the shrunk side of the edge.
    pub subset: Vec<usize>,
    pub center: [f64; 2],
    pub t0: f64,
    pub base_point: [f64; 2],
    /// Radii of the twist annulus around the center.
    pub r_inner: f64,
    pub r_outer: f64,
    /// Largest |P(θ) − P(0)| over P_A and P_B, relative to max |P(0)|, after
    /// t = t0·e^{3iθ}, θ: 0 → 2π.
    pub drift: f64,
    /// Same after θ: 0 → 2π/3, where the loop closes in t but not in ε.
    pub control_drift: f64,
    /// Drift of the θ = 0 transport (pure quadrature noise).
    pub identity_drift: f64,
    pub tol: f64,
    pub pass: bool,
}

/// The spoke b → z carried by the isotopy that rotates the disk |x−c| ≤ r_in by
/// φ, fixes |x−c| ≥ r_out and twists linearly in between.
/// `end` is the rotated image of `z`, passed in so it matches the branch point bit for bit.
#[allow(clippy::too_many_arguments)]
fn twisted_spoke(b: Complex64, z: Complex64, end: Complex64, c: Complex64, r_in: f64, r_out: f64, phi: f64, per_turn: usize) -> Vec<Complex64> {
    // First s with |b + s(z−b) − c| = r.
    let cross = |r: f64| {
        let (d, w) = (z - b, b - c);
        let (qa, qb, qc) = (d.norm_sqr(), 2.0 * (w.conj() * d).re, w.norm_sqr() - r * r);
        (-qb - (qb * qb - 4.0 * qa * qc).max(0.0).sqrt()) / (2.0 * qa)
    };
    let (s_out, s_in) = (cross(r_out), cross(r_in));
    let warp = |x: Complex64| {
        let rho = (x - c).norm();
        let w = ((r_out - rho) / (r_out - r_in)).clamp(0.0, 1.0);
        c + (x - c) * Complex64::from_polar(1.0, phi * w)
    };
    let n = ((per_turn as f64) * phi.abs() / std::f64::consts::TAU).ceil().max(8.0) as usize;
    let mut out = vec![b];
    for k in 0..=n {
        let s = s_out + (s_in - s_out) * k as f64 / n as f64;
        out.push(warp(b + (z - b) * s));
    }
    out.push(end);
    out
}

/// Transports P_A, P_B once around t = t0·e^{3iθ} (θ: 0 → 2π) while the side
/// of `edge` containing its white end shrinks toward its centroid, and checks
/// that the matrices return to themselves. The loop θ: 0 → 2π/3 serves as a
/// negative control.
pub fn check_trivial_monodromy<R: Real>(
    config: &BranchConfig,
    tree: &MarkedBinaryTree,
    edge: (usize, usize),
    settings: &MonodromySettings,
) -> Result<MonodromyReport> {
    tree.validate(config).into_result()?;
    let (p, q) = if tree.inner_color(edge.0) == Color::White { edge } else { (edge.1, edge.0) };
    if !tree.inner_edges().contains(&(p, q)) {
        return Err(Error::invalid("the monodromy check needs an edge between two inner vertices"));
    }
    if !(settings.t0 > 0.0 && settings.t0 < 1.0) {
        return Err(Error::invalid("t0 must lie in (0, 1)"));
    }
    let mut subset = tree.side(q, p);
    subset.sort_unstable();
    let center = subset.iter().map(|&k| config.point(k)).sum::<Complex64>() / subset.len() as f64;
    let t0 = Complex64::new(settings.t0, 0.0);
    let c0 = family_scale_about(config, &subset, center, t0)?;
    let spider = find_base_point(&c0, tree, settings.seed)?;
    let basis = certified_basis(&c0, tree, &spider, settings.seed)?;
    let b = spider.base;

    let radius = subset.iter().map(|&k| (c0.point(k) - center).norm()).fold(0.0, f64::max);
    let r_in = 1.5 * radius.max(1e-3 * c0.min_distance());
    let mut room = (b - center).norm();
    for k in (0..config.m()).filter(|k| !subset.contains(k)) {
        room = room.min((config.point(k) - center).norm());
        room = room.min(crate::branch::segment_distance(center, b, config.point(k)));
    }
    let r_out = 0.8 * room;
    if r_out < 1.5 * r_in {
        return Err(Error::numerical("monodromy", "no room for the twist annulus around the shrunk side; decrease t0"));
    }

    let forms = DifferentialBasis::standard(&c0);
    let pts0: Vec<C<R>> = c0.points().iter().map(|&z| lift(z)).collect();
    let y_b = y_ref(&pts0, &exponents(&c0, Which::Y1), lift::<R>(b));
    let transport = |phi: f64| -> Result<(Mat<R>, Mat<R>)> {
        let rot = Complex64::from_polar(1.0, phi);
        let cfg = family_scale_about(config, &subset, center, t0 * rot)?;
        // y₁(b) continued from φ = 0: each moving factor stays in a half plane.
        let mut y0 = y_b;
        for &k in &subset {
            let ratio = lift::<R>((b - cfg.point(k)) / (b - c0.point(k)));
            y0 = y0 * powr(ratio, R::ratio(config.a(k) as i64, 3));
        }
        let g: Vec<Vec<C<R>>> = (0..config.m())
            .into_par_iter()
            .map(|k| {
                let path = if subset.contains(&k) {
                    twisted_spoke(b, c0.point(k), cfg.point(k), center, r_in, r_out, phi, settings.samples_per_turn)
                } else {
                    vec![b, config.point(k)]
                };
                Ok(path_integral(&cfg, &forms, &path, y0, &settings.quad)?.values)
            })
            .collect::<Result<_>>()?;
        let pa = Mat::from_rows(basis.a.iter().map(|c| cycle_periods(&cfg, &forms, &g, c)).collect());
        let pb = Mat::from_rows(basis.b.iter().map(|c| cycle_periods(&cfg, &forms, &g, c)).collect());
        Ok((pa, pb))
    };
    let tau = std::f64::consts::TAU;
    let (pa0, pb0) = transport(0.0)?;
    let scale = pa0.max_abs().max(pb0.max_abs());
    let drift_at = |phi: f64| -> Result<f64> {
        let (pa, pb) = transport(phi)?;
        Ok(pa.sub(&pa0).max_abs().max(pb.sub(&pb0).max_abs()) / scale)
    };
    let (pa_id, pb_id) = {
        let s0 = spoke_integrals::<R>(&c0, &forms, b, &settings.quad)?;
        assemble(&c0, &forms, &s0, &basis.a, &basis.b).map(|(a, b, _)| (a, b))?
    };
    let identity_drift = pa_id.sub(&pa0).max_abs().max(pb_id.sub(&pb0).max_abs()) / scale;
    let drift = drift_at(3.0 * tau)?;
    let control_drift = drift_at(tau)?;
    Ok(MonodromyReport {
        subset,
        center: [center.re, center.im],
        t0: settings.t0,
        base_point: [b.re, b.im],
        r_inner: r_in,
        r_outer: r_out,
        drift,
        control_drift,
        identity_drift,
        tol: settings.tol,
        pass: drift <= settings.tol && identity_drift <= settings.tol && control_drift > 1e3 * settings.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex7() -> (BranchConfig, MarkedBinaryTree) {
        (BranchConfig::from_reals(&[0.0, 1.0, 2.0, 3.0], &[2, 2, 1, 1]).unwrap(), MarkedBinaryTree::example7())
    }

    #[test]
    fn merge_family_endpoints() {
        let (c, _) = ex7();
        let tilde = Complex64::new(2.5, 0.0);
        assert_eq!(family_merge(&c, 2, tilde, 1.0).unwrap(), c);
        let half = family_merge(&c, 2, tilde, 0.5).unwrap();
        assert_eq!(half.point(2), Complex64::new(2.25, 0.0));
        assert_eq!(half.point(3), Complex64::new(2.75, 0.0));
        assert!(family_merge(&c, 2, tilde, 0.0).is_err());
        assert!(family_merge(&c, 2, Complex64::new(1.0, 0.0), 0.5).is_err());
    }

    #[test]
    fn scale_family_endpoints() {
        let (c, _) = ex7();
        assert_eq!(family_scale(&c, &[0, 1], Complex64::new(1.0, 0.0)).unwrap(), c);
        assert!(family_scale(&c, &[0, 1], Complex64::zero()).is_err());
        let s = family_scale(&c, &[1], Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(s.point(1), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn limit_index_is_the_sum_mod_three() {
        let (c, t) = ex7();
        let white = MergeSetup::new(&c, &t, 2, Complex64::new(2.5, 0.0)).unwrap();
        assert_eq!(white.limit_config.indices(), &[2, 2, 2]);
        assert!(white.white);
        let black = MergeSetup::new(&c, &t, 0, Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(black.limit_config.indices(), &[1, 1, 1]);
        assert!(MergeSetup::new(&c, &t, 1, Complex64::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn neville_recovers_polynomials_in_cube_roots() {
        let t = [1e-1, 1e-2, 1e-3, 1e-4];
        let v: Vec<Complex64> = t
            .iter()
            .map(|x: &f64| {
                let h = x.cbrt();
                Complex64::new(2.0 - h + 3.0 * h * h, 0.5 * h * h * h)
            })
            .collect();
        let l = extrapolate(&t, &v).unwrap();
        assert!((l.value() - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closed_form_constants() {
        assert!((beta_one_third() - 5.299_916_250_856_349_9).abs() < 1e-13);
        let cs = chowla_selberg_value();
        assert!((cs - Complex64::new(0.354_082_601_454_479_8, -1.321_454_258_704_280_3)).norm() < 1e-13);
        // (ω − 1)³ = 3√3·i.
        let b3 = beta_star().powi(3) / beta_one_third().powi(3);
        assert!((b3 - Complex64::new(0.0, 3.0 * 3f64.sqrt())).norm() < 1e-13);
    }
}
