//! Exact computational laboratory for the linear Simon problem over F_p^n:
//! finite-field linear algebra and subspace counting, a state-vector
//! simulator for query algorithms, the averaged-acceptance polynomial
//! machinery with brute-force oracles, exact LP certification of the
//! degree lower bound, and classical baselines.

pub mod classical;
pub mod cli;
pub mod error;
pub mod fflinalg;
pub mod instances;
pub mod lemma1;
pub mod polymethod;
pub mod qsim;
pub mod verify;

pub use error::{Error, Result};
