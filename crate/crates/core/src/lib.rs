//! Cyclic triple covers y³ = Π(x−λ_i)^{a_i} of the projective line: symplectic
//! homology bases from marked binary trees, period matrices, theta constants,
//! and a numerical check of Thomae's formula with its absolute constant.

#![allow(clippy::needless_range_loop)]

pub mod branch;
pub mod config;
pub mod cx;
pub mod cycles;
pub mod degeneration;
pub mod error;
pub mod f3;
pub mod io;
pub mod linalg;
pub mod periods;
pub mod quad;
pub mod real;
pub mod selftest;
pub mod spider;
pub mod theta;
pub mod thomae;
pub mod tree;

pub use config::{BranchConfig, Color};
pub use error::{Error, Result};
pub use f3::F3Class;
pub use real::{Dd, Real};
pub use tree::MarkedBinaryTree;
