//! Exact linear algebra and subspace combinatorics over the prime field F_p.

pub mod counting;
pub mod field;
pub mod matrix;
pub mod subspace;

pub use counting::{alpha, beta, count_fd, enumerate_matrices, enumerate_subspaces, sample_fd, DEFAULT_ENUM_CAP};
pub use field::{FieldSpec, FpVector};
pub use matrix::{kernel_of_rows, rref, FpMatrix};
pub use subspace::Subspace;
