//! Linear algebra over F₃ and terminal labelings Λ = Σ k_i e_i.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
pub fn md3(x: i64) -> u8 {
    x.rem_euclid(3) as u8
}

/// Representative in {−1, 0, 1}.
#[inline]
pub fn signed(x: u8) -> i8 {
    match x % 3 {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Π(Λ) = Σ ε_i k_i, with ε_i ≡ a_i (mod 3).
pub fn pi(a: &[u8], k: &[u8]) -> u8 {
    md3(a.iter().zip(k).map(|(&a, &k)| a as i64 * k as i64).sum())
}

/// Element of V = F₃^m, optionally flagged as a class in Ker Π / Im Diag.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct F3Class {
    coeffs: Vec<u8>,
    in_h: bool,
}

impl F3Class {
    pub fn raw(k: impl IntoIterator<Item = i64>) -> Self {
        F3Class { coeffs: k.into_iter().map(md3).collect(), in_h: false }
    }

    /// Class in H(Γ,C); fails unless Π(Λ) = 0 for the index vector `a`.
    pub fn class(k: impl IntoIterator<Item = i64>, a: &[u8]) -> Result<Self> {
        let v = F3Class::raw(k);
        if v.coeffs.len() != a.len() {
            return Err(Error::invalid(format!(
                "labeling has {} entries, configuration has {}",
                v.coeffs.len(),
                a.len()
            )));
        }
        let p = pi(a, &v.coeffs);
        if p != 0 {
            return Err(Error::invalid(format!("Π(Λ) = {p} ≠ 0, so Λ is not in Ker Π")));
        }
        Ok(F3Class { in_h: true, ..v })
    }

    pub fn zero(m: usize) -> Self {
        F3Class { coeffs: vec![0; m], in_h: true }
    }

    pub fn e(m: usize, i: usize) -> Self {
        let mut c = vec![0; m];
        c[i] = 1;
        F3Class { coeffs: c, in_h: false }
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn signed(&self) -> Vec<i8> {
        self.coeffs.iter().map(|&c| signed(c)).collect()
    }

    pub fn is_class(&self) -> bool {
        self.in_h
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn with_flag(mut self, in_h: bool) -> Self {
        self.in_h = in_h;
        self
    }

    /// Canonical representative modulo Diag: first coordinate forced to 0.
    pub fn normalized(&self) -> Vec<u8> {
        let s = self.coeffs.first().copied().unwrap_or(0);
        self.coeffs.iter().map(|&c| md3(c as i64 - s as i64)).collect()
    }

    pub fn eq_mod_diag(&self, o: &F3Class) -> bool {
        self.len() == o.len() && self.normalized() == o.normalized()
    }

    pub fn add(&self, o: &F3Class) -> F3Class {
        F3Class {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(&x, &y)| (x + y) % 3).collect(),
            in_h: self.in_h && o.in_h,
        }
    }

    pub fn scale(&self, s: i64) -> F3Class {
        F3Class {
            coeffs: self.coeffs.iter().map(|&x| md3(x as i64 * s)).collect(),
            in_h: self.in_h,
        }
    }
}

impl PartialEq for F3Class {
    fn eq(&self, o: &Self) -> bool {
        self.eq_mod_diag(o)
    }
}

/// Row-reduces `cols | rhs` over F₃ and returns one solution if consistent.
/// Free variables are set to zero.
pub fn solve(cols: &[Vec<u8>], rhs: &[u8]) -> Option<Vec<u8>> {
    let n = cols.len();
    let m = rhs.len();
    let mut a: Vec<Vec<u8>> =
        (0..m).map(|r| cols.iter().map(|c| c[r] % 3).chain([rhs[r] % 3]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m).find(|&r| a[r][col] != 0) else { continue };
        a.swap(row, p);
        // 1 and 2 are their own inverses mod 3.
        let inv = a[row][col];
        for x in a[row].iter_mut() {
            *x = (*x * inv) % 3;
        }
        for r in 0..m {
            if r != row && a[r][col] != 0 {
                let f = a[r][col];
                for c in 0..=n {
                    a[r][c] = md3(a[r][c] as i64 - (f * a[row][c]) as i64);
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    if a[row..].iter().any(|r| r[n] != 0) {
        return None;
    }
    let mut x = vec![0; n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = a[r][n];
    }
    Some(x)
}

pub fn rank(cols: &[Vec<u8>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let m = cols[0].len();
    let mut a: Vec<Vec<u8>> = (0..m).map(|r| cols.iter().map(|c| c[r] % 3).collect()).collect();
    let mut row = 0;
    for col in 0..cols.len() {
        let Some(p) = (row..m).find(|&r| a[r][col] != 0) else { continue };
        a.swap(row, p);
        let inv = a[row][col];
        for x in a[row].iter_mut() {
            *x = (*x * inv) % 3;
        }
        for r in row + 1..m {
            let f = a[r][col];
            if f != 0 {
                for c in 0..cols.len() {
                    a[r][c] = md3(a[r][c] as i64 - (f * a[row][c]) as i64);
                }
            }
        }
        row += 1;
    }
    row
}

/// All vectors of F₃^m in lexicographic order.
pub fn all_vectors(m: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..3usize.pow(m as u32)).map(move |mut n| {
        (0..m)
            .map(|_| {
                let d = (n % 3) as u8;
                n /= 3;
                d
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_mod_diag() {
        let x = F3Class::raw([1, 2, 0]);
        let y = F3Class::raw([2, 0, 1]);
        assert_eq!(x, y);
        assert_eq!(x.normalized(), vec![0, 1, 2]);
        assert_ne!(x, F3Class::raw([0, 0, 1]));
    }

    #[test]
    fn kernel_membership() {
        let a = [2, 2, 1, 1];
        assert!(F3Class::class([2, 1, 1, 2], &a).is_ok());
        assert!(F3Class::class([1, 0, 0, 0], &a).is_err());
        assert_eq!(signed(2), -1);
    }

    #[test]
    fn solve_and_rank() {
        let cols = vec![vec![1, 0, 2], vec![0, 1, 1]];
        let x = solve(&cols, &[2, 1, 2]).unwrap();
        assert_eq!(x, vec![2, 1]);
        assert!(solve(&cols, &[0, 0, 1]).is_none());
        assert_eq!(rank(&cols), 2);
        assert_eq!(rank(&[vec![1, 1], vec![2, 2]]), 1);
        assert_eq!(all_vectors(3).count(), 27);
    }
}
