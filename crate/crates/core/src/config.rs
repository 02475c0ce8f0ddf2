//! Branch configurations Σ = {λ_i} with indices a_i; the curve y³ = Π(x−λ_i)^{a_i}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    /// ε = +1 for white, −1 for black.
    pub fn sign(self) -> i64 {
        match self {
            Color::White => 1,
            Color::Black => -1,
        }
    }

    /// Branching index of a terminal of this color.
    pub fn index(self) -> u8 {
        match self {
            Color::White => 1,
            Color::Black => 2,
        }
    }

    pub fn of_index(a: u8) -> Color {
        if a == 1 {
            Color::White
        } else {
            Color::Black
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchConfig {
    points: Vec<Complex64>,
    indices: Vec<u8>,
}

impl BranchConfig {
    pub fn new(points: Vec<Complex64>, indices: Vec<u8>) -> Result<Self> {
        let m = points.len();
        if m != indices.len() {
            return Err(Error::invalid(format!("{m} points but {} indices", indices.len())));
        }
        if m < 3 {
            return Err(Error::invalid(format!("need at least 3 branch points, got {m}")));
        }
        if let Some(i) = indices.iter().position(|&a| a != 1 && a != 2) {
            return Err(Error::invalid(format!("index a_{i} = {} is not in {{1,2}}", indices[i])));
        }
        if let Some(i) = points.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!("branch point {i} is not finite")));
        }
        for i in 0..m {
            for j in i + 1..m {
                if points[i] == points[j] {
                    return Err(Error::invalid(format!("branch points {i} and {j} coincide")));
                }
            }
        }
        let s: u32 = indices.iter().map(|&a| a as u32).sum();
        if !s.is_multiple_of(3) {
            return Err(Error::invalid(format!("Σa_i = {s} is not divisible by 3")));
        }
        Ok(BranchConfig { points, indices })
    }

    pub fn from_reals(points: &[f64], indices: &[u8]) -> Result<Self> {
        BranchConfig::new(points.iter().map(|&x| Complex64::new(x, 0.0)).collect(), indices.to_vec())
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn genus(&self) -> usize {
        self.m() - 2
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Complex64 {
        self.points[i]
    }

    pub fn indices(&self) -> &[u8] {
        &self.indices
    }

    pub fn a(&self, i: usize) -> u8 {
        self.indices[i]
    }

    pub fn b(&self, i: usize) -> u8 {
        3 - self.indices[i]
    }

    pub fn color(&self, i: usize) -> Color {
        Color::of_index(self.indices[i])
    }

    /// Number of x^{j−1}dx/y₁ forms.
    pub fn d1(&self) -> usize {
        self.indices.iter().map(|&a| a as usize).sum::<usize>() / 3 - 1
    }

    /// Number of x^{j−1}dx/y₂ forms.
    pub fn d2(&self) -> usize {
        self.indices.iter().map(|&a| 3 - a as usize).sum::<usize>() / 3 - 1
    }

    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.m() {
            for j in i + 1..self.m() {
                d = d.min((self.points[i] - self.points[j]).norm());
            }
        }
        d
    }

    pub fn map_points(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Result<Self> {
        BranchConfig::new(self.points.iter().enumerate().map(|(i, &z)| f(i, z)).collect(), self.indices.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_and_form_counts() {
        let c = BranchConfig::from_reals(&[0.0, 1.0, 2.0, 3.0], &[2, 2, 1, 1]).unwrap();
        assert_eq!((c.genus(), c.d1(), c.d2()), (2, 1, 1));
        let w = BranchConfig::from_reals(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], &[1; 6]).unwrap();
        assert_eq!((w.d1(), w.d2()), (1, 3));
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(BranchConfig::from_reals(&[0.0, 1.0, 2.0], &[1, 1, 2]).is_err());
        assert!(BranchConfig::from_reals(&[0.0, 1.0, 1.0], &[1, 1, 1]).is_err());
        assert!(BranchConfig::from_reals(&[0.0, 1.0], &[1, 2]).is_err());
        assert!(BranchConfig::from_reals(&[0.0, 1.0, 2.0], &[1, 1, 3]).is_err());
    }
}
