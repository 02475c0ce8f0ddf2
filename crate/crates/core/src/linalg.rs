//! Dense complex matrices, small enough that textbook algorithms suffice.

use std::ops::{Index, IndexMut, Mul};

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};

use crate::cx::{abs, lift, lower, C};
use crate::real::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<R: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<R>>,
}

impl<R: Real> Mat<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C<R>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<C<R>>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C<R>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C<R>>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(C<R>) -> C<R>) -> Self {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: C<R>) -> Self {
        self.map(|z| z * s)
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(&a, &b)| a - b).collect() }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|&z| abs(z).to_f64()).fold(0.0, f64::max)
    }

    /// Max column sum of moduli.
    pub fn norm1(&self) -> f64 {
        (0..self.cols).map(|j| (0..self.rows).map(|i| abs(self[(i, j)]).to_f64()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn lower(&self) -> Mat<f64> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| lower(z)).collect() }
    }

    pub fn lift(m: &Mat<f64>) -> Self {
        Mat { rows: m.rows, cols: m.cols, data: m.data.iter().map(|&z| lift(z)).collect() }
    }

    /// Rows of `[re, im]` pairs rounded to double.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|z| [z.re.to_f64(), z.im.to_f64()]).collect()).collect()
    }

    pub fn imag(&self) -> Vec<Vec<R>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|z| z.im).collect()).collect()
    }

    /// Symmetry residual max|M − Mᵀ| relative to max|M|.
    pub fn asymmetry(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                d = d.max(abs(self[(i, j)] - self[(j, i)]).to_f64());
            }
        }
        d / self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn lu(&self) -> Option<Lu<R>> {
        assert_eq!(self.rows, self.cols, "LU of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| abs(a[(x, k)]).partial_cmp(&abs(a[(y, k)])).unwrap())?;
            if abs(a[(p, k)]).to_f64() == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / piv;
                a[(i, k)] = f;
                for j in k + 1..n {
                    let t = a[(k, j)];
                    a[(i, j)] = a[(i, j)] - f * t;
                }
            }
        }
        Some(Lu { a, perm, sign })
    }

    pub fn det(&self) -> C<R> {
        self.lu().map_or(C::zero(), |lu| lu.det())
    }

    pub fn inverse(&self) -> Option<Self> {
        self.lu().map(|lu| lu.solve(&Mat::identity(self.rows)))
    }

    /// 1-norm condition number; infinite when singular.
    pub fn cond1(&self) -> f64 {
        self.inverse().map_or(f64::INFINITY, |inv| self.norm1() * inv.norm1())
    }
}

impl Mat<f64> {
    pub fn from_c64(rows: Vec<Vec<Complex64>>) -> Self {
        Mat::from_rows(rows)
    }
}

pub struct Lu<R: Real> {
    a: Mat<R>,
    perm: Vec<usize>,
    sign: i32,
}

impl<R: Real> Lu<R> {
    pub fn det(&self) -> C<R> {
        let mut d = Complex::new(R::from_f64(self.sign as f64), R::zero());
        for i in 0..self.a.rows {
            d = d * self.a[(i, i)];
        }
        d
    }

    pub fn solve(&self, b: &Mat<R>) -> Mat<R> {
        let n = self.a.rows;
        let mut x = Mat::from_fn(n, b.cols, |i, j| b[(self.perm[i], j)]);
        for c in 0..b.cols {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s = s - self.a[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s = s - self.a[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.a[(i, i)];
            }
        }
        x
    }
}

impl<R: Real> Index<(usize, usize)> for Mat<R> {
    type Output = C<R>;
    fn index(&self, (i, j): (usize, usize)) -> &C<R> {
        &self.data[i * self.cols + j]
    }
}

impl<R: Real> IndexMut<(usize, usize)> for Mat<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<R> {
        &mut self.data[i * self.cols + j]
    }
}

impl<R: Real> Mul for &Mat<R> {
    type Output = Mat<R>;
    fn mul(self, o: &Mat<R>) -> Mat<R> {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        Mat::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(C::zero(), |s, k| s + self[(i, k)] * o[(k, j)])
        })
    }
}

/// Lower Cholesky factor of a real symmetric matrix, or `None` if it is not
/// positive definite.
pub fn cholesky<R: Real>(a: &[Vec<R>]) -> Option<Vec<Vec<R>>> {
    let n = a.len();
    let mut l = vec![vec![R::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = (a[i][j] + a[j][i]) * R::from_f64(0.5);
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s.to_f64().is_nan() || s.to_f64() <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Smallest eigenvalue of a small real symmetric matrix by Jacobi sweeps.
pub fn min_eigenvalue(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;
    use crate::real::Dd;

    #[test]
    fn inverse_and_determinant() {
        let m: Mat<Dd> = Mat::from_rows(vec![vec![c(2.0, 1.0), c(1.0, 0.0)], vec![c(0.0, 3.0), c(-1.0, 2.0)]]);
        let inv = m.inverse().unwrap();
        let id = &m * &inv;
        assert!(id.sub(&Mat::identity(2)).max_abs() < 1e-30);
        // (2+i)(−1+2i) − 3i = −4 + 0i.
        let d = m.det();
        assert!((d.re.to_f64() + 4.0).abs() < 1e-30 && d.im.to_f64().abs() < 1e-30);
    }

    #[test]
    fn cholesky_detects_indefinite() {
        assert!(cholesky(&[vec![2.0, 1.0], vec![1.0, 2.0]]).is_some());
        assert!(cholesky(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_none());
        assert!((min_eigenvalue(&[vec![2.0, 1.0], vec![1.0, 2.0]]) - 1.0).abs() < 1e-12);
    }
}
