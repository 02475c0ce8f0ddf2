//! Lifted cycles on the covering built from keyhole loops on a spider.
//!
//! The loop γ_i^{(s)} leaves the base point b on sheet s, runs along the spoke
//! to λ_i, turns anticlockwise around it and returns to b on sheet s + a_i.
//! Every cycle here is an integer combination of such loops. Sheet k means
//! y₁(b) = ω^k·y₁ᵣₑ𝒻(b) and y₂(b) = ω^{−k}·y₂ᵣₑ𝒻(b).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::branch::{circle, continue_segment, exponents, y_ref, Which};
use crate::config::{BranchConfig, Color};
use crate::error::{Error, Result};
use crate::f3::{md3, F3Class};
use crate::spider::Spider;
use crate::tree::MarkedBinaryTree;

/// A lifted path: a polyline in the x-plane and the sheet at its first vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedPath {
    pub polyline: Vec<Complex64>,
    pub start_sheet: u8,
}

/// JSON maps need string keys, so terms travel as `[branch, sheet, coef]` triples.
mod term_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(t: &BTreeMap<(usize, u8), i64>, s: S) -> Result<S::Ok, S::Error> {
        t.iter().map(|(&(i, k), &c)| (i, k, c)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, u8), i64>, D::Error> {
        Ok(Vec::<(usize, u8, i64)>::deserialize(d)?.into_iter().map(|(i, k, c)| ((i, k), c)).collect())
    }
}

/// Formal integer combination of keyhole loops γ_i^{(s)}.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedCycle {
    pub label: String,
    /// (branch index, start sheet) → coefficient; zero coefficients are dropped.
    #[serde(with = "term_list")]
    pub terms: BTreeMap<(usize, u8), i64>,
}

impl LiftedCycle {
    pub fn new(label: impl Into<String>) -> Self {
        LiftedCycle { label: label.into(), terms: BTreeMap::new() }
    }

    pub fn gamma(i: usize, sheet: i64) -> Self {
        let mut c = LiftedCycle::new(format!("gamma_{i}^({})", md3(sheet)));
        c.add_term(i, sheet, 1);
        c
    }

    pub fn add_term(&mut self, i: usize, sheet: i64, coef: i64) {
        let key = (i, md3(sheet));
        let v = self.terms.entry(key).or_insert(0);
        *v += coef;
        if *v == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn plus(&self, o: &LiftedCycle) -> LiftedCycle {
        let mut c = self.clone();
        for (&(i, s), &k) in &o.terms {
            c.add_term(i, s as i64, k);
        }
        c
    }

    pub fn scaled(&self, k: i64) -> LiftedCycle {
        let mut c = LiftedCycle::new(self.label.clone());
        for (&(i, s), &v) in &self.terms {
            c.add_term(i, s as i64, v * k);
        }
        c
    }

    pub fn minus(&self, o: &LiftedCycle) -> LiftedCycle {
        self.plus(&o.scaled(-1))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Boundary as multiplicities of the base-point lifts b(0), b(1), b(2).
    pub fn boundary(&self, config: &BranchConfig) -> [i64; 3] {
        let mut bd = [0; 3];
        for (&(i, s), &c) in &self.terms {
            bd[md3(s as i64 + config.a(i) as i64) as usize] += c;
            bd[s as usize] -= c;
        }
        bd
    }

    pub fn is_closed(&self, config: &BranchConfig) -> bool {
        self.boundary(config) == [0; 3]
    }

    /// The pieces as explicit lifted paths on a spider (circle of radius `r`).
    pub fn paths(&self, config: &BranchConfig, spider: &Spider, r: f64) -> Vec<(LiftedPath, i64)> {
        self.terms
            .iter()
            .map(|(&(i, s), &c)| (LiftedPath { polyline: keyhole(config, spider.base, i, r), start_sheet: s }, c))
            .collect()
    }
}

/// ρ applied k times: every start sheet moves down by k.
pub fn rho(c: &LiftedCycle, k: i64) -> LiftedCycle {
    let mut out = LiftedCycle::new(c.label.clone());
    for (&(i, s), &v) in &c.terms {
        out.add_term(i, s as i64 - k, v);
    }
    out
}

/// The lift of the loop around λ_i that starts at b(1) for white and at b(2)
/// for black terminals, so ε_iγ_i always has boundary b(2) − b(1).
pub fn build_gamma(config: &BranchConfig, i: usize) -> LiftedCycle {
    LiftedCycle::gamma(i, if config.color(i) == Color::White { 1 } else { 2 })
}

/// Loop around the terminals of `block` taken in order, starting on sheet `s`.
/// Returns the chain and its end sheet.
pub fn block_loop(config: &BranchConfig, block: &[usize], s: i64) -> (LiftedCycle, i64) {
    let mut c = LiftedCycle::new("block");
    let mut sheet = s;
    for &i in block {
        c.add_term(i, sheet, 1);
        sheet += config.a(i) as i64;
    }
    (c, md3(sheet) as i64)
}

/// (1−ρ)/3 · c expressed in H(Γ, C): the coefficient of e_i is the total
/// multiplicity of loops around λ_i.
pub fn class_in_h(c: &LiftedCycle, config: &BranchConfig) -> Result<F3Class> {
    if !c.is_closed(config) {
        return Err(Error::numerical("class_in_H", format!("cycle {} is not closed", c.label)));
    }
    let mut k = vec![0i64; config.m()];
    for (&(i, _), &v) in &c.terms {
        k[i] += v;
    }
    F3Class::class(k, config.indices())
        .map_err(|e| Error::numerical("class_in_H", format!("cycle {} does not map into Ker Π: {e}", c.label)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymplecticBasis {
    /// Inner vertices in row order.
    pub vertices: Vec<usize>,
    pub a: Vec<LiftedCycle>,
    pub b: Vec<LiftedCycle>,
}

impl SymplecticBasis {
    pub fn genus(&self) -> usize {
        self.a.len()
    }

    /// A-cycles followed by B-cycles.
    pub fn all(&self) -> Vec<&LiftedCycle> {
        self.a.iter().chain(self.b.iter()).collect()
    }
}

/// A_v = γ_{B2}^{(0)} − γ_{B1}^{(0)}; B_v = ρ²A_v for white v, ρA_v for black v.
pub fn build_symplectic_basis(config: &BranchConfig, tree: &MarkedBinaryTree) -> Result<SymplecticBasis> {
    tree.validate(config).into_result()?;
    let vertices = tree.inner_order();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &v in &vertices {
        let [b1, b2, _] = tree.blocks_at(v)?;
        let (c1, _) = block_loop(config, &b1, 0);
        let (c2, _) = block_loop(config, &b2, 0);
        let name = tree.node_id(v).to_string();
        let av = c2.minus(&c1).with_label(format!("A_{name}"));
        if !av.is_closed(config) {
            return Err(Error::numerical("symplectic_basis", format!("A_{name} has boundary {:?}", av.boundary(config))));
        }
        let k = if tree.inner_color(v) == Color::White { 2 } else { 1 };
        let bv = rho(&av, k).with_label(format!("B_{name}"));
        let expected = tree.class_abar(v);
        let got = class_in_h(&av, config)?;
        if got != expected {
            return Err(Error::numerical(
                "symplectic_basis",
                format!("class of A_{name} is {:?}, expected {:?}", got.normalized(), expected.normalized()),
            ));
        }
        a.push(av);
        b.push(bv);
    }
    Ok(SymplecticBasis { vertices, a, b })
}

/// Loop around every terminal in boundary-walk order; null-homologous.
pub fn total_loop(config: &BranchConfig, tree: &MarkedBinaryTree, s: i64) -> LiftedCycle {
    block_loop(config, &tree.cyclic_order(), s).0.with_label("total")
}

/// Spoke to λ_i truncated at distance `r`, a 32-gon around λ_i, and back.
fn keyhole(config: &BranchConfig, b: Complex64, i: usize, r: f64) -> Vec<Complex64> {
    let l = config.point(i);
    let phi0 = (b - l).arg();
    let mut path = vec![b];
    path.extend(circle(l, r, phi0, 32));
    path.push(b);
    path
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    p: Complex64,
    q: Complex64,
    /// y₁ at p on sheet 0 of the piece.
    yp: Complex64,
}

fn render(config: &BranchConfig, start: Complex64, y0: Complex64, i: usize, r: f64, shift: Complex64) -> Result<Vec<Segment>> {
    let e = exponents(config, Which::Y1);
    let pts = config.points();
    let l = config.point(i) + shift;
    let phi0 = (start - l).arg();
    let mut path = vec![start];
    path.extend(circle(l, r, phi0, 32));
    path.push(start);
    let mut out = Vec::with_capacity(path.len() - 1);
    let mut y = y0;
    for w in path.windows(2) {
        out.push(Segment { p: w[0], q: w[1], yp: y });
        y = continue_segment(pts, &e, w[0], y, w[1])?;
    }
    Ok(out)
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    (a.conj() * b).im
}

/// Signed crossings between the geometric pieces of two renderings, sorted by
/// the sheet offset k with y₁(first)/y₁(second) = ω^k at the crossing.
#[derive(Clone, Debug)]
pub struct IntersectionTable {
    m: usize,
    counts: Vec<[i64; 3]>,
    pub jitter: Complex64,
    pub attempts: usize,
}

const RETRY_BUDGET: usize = 16;

impl IntersectionTable {
    pub fn new(config: &BranchConfig, spider: &Spider, seed: u64) -> Result<Self> {
        let m = config.m();
        let minpair = config.min_distance();
        let r = minpair / 8.0;
        let clearance = spider.score * minpair;
        let b = spider.base;
        let e = exponents(config, Which::Y1);
        let y0 = y_ref::<f64>(config.points(), &e, b);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first: Vec<Vec<Segment>> = (0..m).map(|i| render(config, b, y0, i, r, Complex64::new(0.0, 0.0))).collect::<Result<_>>()?;
        let mut last_err = String::new();
        for attempt in 1..=RETRY_BUDGET {
            let mag = 0.3 * r.min(clearance) * rng.gen_range(0.3..1.0);
            let delta = Complex64::from_polar(mag, rng.gen_range(0.0..std::f64::consts::TAU));
            let yd = continue_segment(config.points(), &e, b, y0, b + delta)?;
            let second: Vec<Vec<Segment>> =
                (0..m).map(|j| render(config, b + delta, yd, j, 2.0 * r, delta)).collect::<Result<_>>()?;
            match count_crossings(config, &first, &second) {
                Ok(counts) => return Ok(IntersectionTable { m, counts, jitter: delta, attempts: attempt }),
                Err(msg) => last_err = msg,
            }
        }
        Err(Error::numerical(
            "intersection",
            format!("no generic position after {RETRY_BUDGET} perturbations: {last_err}"),
        ))
    }

    /// Intersection number (c1, c2).
    pub fn pair(&self, c1: &LiftedCycle, c2: &LiftedCycle) -> i64 {
        let mut total = 0;
        for (&(i, s), &u) in &c1.terms {
            for (&(j, t), &v) in &c2.terms {
                let k = md3(t as i64 - s as i64) as usize;
                total += u * v * self.counts[i * self.m + j][k];
            }
        }
        total
    }

    pub fn matrix(&self, cycles: &[&LiftedCycle]) -> Vec<Vec<i64>> {
        cycles.iter().map(|c1| cycles.iter().map(|c2| self.pair(c1, c2)).collect()).collect()
    }
}

fn count_crossings(config: &BranchConfig, first: &[Vec<Segment>], second: &[Vec<Segment>]) -> std::result::Result<Vec<[i64; 3]>, String> {
    let m = first.len();
    let e = exponents(config, Which::Y1);
    let pts = config.points();
    let w = crate::cx::omega_pow::<f64>(1);
    let mut counts = vec![[0i64; 3]; m * m];
    const EDGE: f64 = 1e-9;
    for i in 0..m {
        for j in 0..m {
            for s1 in &first[i] {
                for s2 in &second[j] {
                    let d1 = s1.q - s1.p;
                    let d2 = s2.q - s2.p;
                    let den = cross(d1, d2);
                    let scale = d1.norm() * d2.norm();
                    let off = s2.p - s1.p;
                    if den.abs() <= 1e-12 * scale {
                        // Parallel: only a problem if collinear and overlapping.
                        if cross(d1, off).abs() <= 1e-12 * d1.norm() * off.norm().max(f64::MIN_POSITIVE) {
                            let u0 = (off * d1.conj()).re / d1.norm_sqr();
                            let u1 = ((s2.q - s1.p) * d1.conj()).re / d1.norm_sqr();
                            if u0.max(u1) >= -EDGE && u0.min(u1) <= 1.0 + EDGE {
                                return Err("collinear overlap".into());
                            }
                        }
                        continue;
                    }
                    let u = cross(off, d2) / den;
                    let v = cross(off, d1) / den;
                    if !(-EDGE..=1.0 + EDGE).contains(&u) || !(-EDGE..=1.0 + EDGE).contains(&v) {
                        continue;
                    }
                    if u.abs() < EDGE || (u - 1.0).abs() < EDGE || v.abs() < EDGE || (v - 1.0).abs() < EDGE {
                        return Err("crossing at a vertex".into());
                    }
                    let x = s1.p + d1 * u;
                    let ya = continue_segment(pts, &e, s1.p, s1.yp, x).map_err(|e| e.to_string())?;
                    let yb = continue_segment(pts, &e, s2.p, s2.yp, x).map_err(|e| e.to_string())?;
                    let ratio = ya / yb;
                    let k = (0..3).min_by(|&a, &b| {
                        (ratio - w.powi(a)).norm().partial_cmp(&(ratio - w.powi(b)).norm()).unwrap()
                    });
                    let k = k.unwrap();
                    if (ratio - w.powi(k)).norm() > 1e-6 {
                        return Err(format!("sheet ratio {ratio} is not a cube root of unity"));
                    }
                    counts[i * m + j][k as usize] += den.signum() as i64;
                }
            }
        }
    }
    Ok(counts)
}

/// Intersection matrix of (A_1..A_g, B_1..B_g) on a spider.
pub fn intersection_matrix(config: &BranchConfig, basis: &SymplecticBasis, spider: &Spider, seed: u64) -> Result<Vec<Vec<i64>>> {
    let table = IntersectionTable::new(config, spider, seed)?;
    Ok(table.matrix(&basis.all()))
}

/// The standard form with (A_v, B_w) = −δ(v, w).
pub fn standard_form(g: usize) -> Vec<Vec<i64>> {
    let mut j = vec![vec![0; 2 * g]; 2 * g];
    for v in 0..g {
        j[v][g + v] = -1;
        j[g + v][v] = 1;
    }
    j
}

/// Builds the basis and certifies it: closed cycles, classes match the tree,
/// intersection matrix equal to the standard form.
pub fn certified_basis(config: &BranchConfig, tree: &MarkedBinaryTree, spider: &Spider, seed: u64) -> Result<SymplecticBasis> {
    let basis = build_symplectic_basis(config, tree)?;
    let j = intersection_matrix(config, &basis, spider, seed)?;
    if j != standard_form(basis.genus()) {
        return Err(Error::Verification(format!("intersection matrix {j:?} is not the standard symplectic form")));
    }
    Ok(basis)
}
