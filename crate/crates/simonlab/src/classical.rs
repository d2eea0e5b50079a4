//! Classical baselines: the n-query deterministic solver for linear
//! instances (query a basis, reconstruct the matrix) and randomized
//! collision search on general instances, with an exact birthday-probability
//! oracle for calibration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fflinalg::{FieldSpec, FpMatrix, FpVector};
use crate::instances::{GeneralInstance, PromiseLabel};

/// Query f on the standard basis, rebuild the matrix, and read the label off
/// its kernel. Always exactly n queries, always correct for linear f.
pub fn basis_solve<F>(field: FieldSpec, mut oracle: F) -> Result<(PromiseLabel, usize)>
where
    F: FnMut(&[u64]) -> FpVector,
{
    let n = field.n();
    let columns: Vec<FpVector> = (0..n).map(|i| oracle(&field.unit_vector(i))).collect();
    let matrix = FpMatrix::from_columns(field, &columns)?;
    let label = match matrix.kernel().dim() {
        0 => PromiseLabel::OneToOne,
        1 => PromiseLabel::KernelP,
        _ => PromiseLabel::Unrestricted,
    };
    Ok((label, n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CollisionOutcome {
    CollisionFound { x: FpVector, x_prime: FpVector },
    NoCollision,
}

#[derive(Debug, Clone, Serialize)]
pub struct CollisionReport {
    pub outcome: CollisionOutcome,
    pub queries_used: usize,
    pub budget_clamped: bool,
}

/// Query uniformly random distinct points until a collision appears or the
/// budget runs out. A budget above 2^n is clamped (with a flag) since
/// distinct queries cannot exceed the domain.
pub fn collision_search(g: &GeneralInstance, budget: usize, seed: u64) -> CollisionReport {
    let field = g.field();
    let size = field.point_count().expect("table instances are small") as usize;
    let clamped = budget > size;
    let budget = budget.min(size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u64> = (0..size as u64).collect();
    order.shuffle(&mut rng);
    let mut seen: Vec<Option<u64>> = vec![None; size];
    for (used, &x) in order.iter().take(budget).enumerate() {
        let y = g.eval_index(x) as usize;
        if let Some(prev) = seen[y] {
            return CollisionReport {
                outcome: CollisionOutcome::CollisionFound {
                    x: field.index_to_vector(prev),
                    x_prime: field.index_to_vector(x),
                },
                queries_used: used + 1,
                budget_clamped: clamped,
            };
        }
        seen[y] = Some(x);
    }
    CollisionReport {
        outcome: CollisionOutcome::NoCollision,
        queries_used: budget,
        budget_clamped: clamped,
    }
}

/// Exact probability that `queries` distinct uniform points of {0,1}^n hit a
/// collision of a 2-to-1 function, as a dynamic program over the query count:
/// after i collision-free draws the next draw avoids a collision with
/// probability (N - 2i) / (N - i).
pub fn birthday_probability(n: usize, queries: usize) -> BigRational {
    let size = BigInt::from(1u64 << n);
    let mut no_collision = BigRational::one();
    for i in 0..queries {
        let i = BigInt::from(i);
        let avoid = &size - BigInt::from(2) * &i;
        let remaining = &size - &i;
        if avoid.sign() == num_bigint::Sign::Minus || remaining.sign() != num_bigint::Sign::Plus {
            no_collision = BigRational::from(BigInt::from(0));
            break;
        }
        no_collision *= BigRational::new(avoid, remaining);
    }
    BigRational::one() - no_collision
}
