use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::fflinalg::field::{FieldSpec, FpVector};
use crate::fflinalg::matrix::{rref, FpMatrix};
use crate::fflinalg::subspace::Subspace;

/// Default cap on the number of matrices an exhaustive enumeration may visit.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 24;

/// alpha(n, h) = prod_{i=0}^{h-1} (p^n - p^i): ordered tuples of h linearly
/// independent vectors in F_p^n.
pub fn alpha(p: u64, n: usize, h: usize) -> Result<BigUint> {
    if h > n {
        return Err(Error::Domain(format!("alpha: h = {h} exceeds n = {n}")));
    }
    let pn = BigUint::from(p).pow(n as u32);
    let mut acc = BigUint::one();
    let mut pi = BigUint::one();
    for _ in 0..h {
        acc *= &pn - &pi;
        pi *= p;
    }
    Ok(acc)
}

/// beta(n, h) = alpha(n, h) / alpha(h, h): the Gaussian binomial counting
/// h-dimensional subspaces of F_p^n.
pub fn beta(p: u64, n: usize, h: usize) -> Result<BigUint> {
    let num = alpha(p, n, h)?;
    let den = alpha(p, h, h)?;
    let (q, r) = num.div_rem(&den);
    assert!(r.is_zero(), "beta division must be exact");
    Ok(q)
}

/// |F_D| for D = p^h: linear maps on F_p^n with kernel of dimension exactly h.
pub fn count_fd(p: u64, n: usize, h: usize) -> Result<BigUint> {
    Ok(beta(p, n, h)? * alpha(p, n, n - h)?)
}

fn check_enum_cap(field: FieldSpec, cap: u64) -> Result<u64> {
    let total = field.matrix_count_big();
    if total > BigUint::from(cap) {
        return Err(Error::EnumerationTooLarge {
            required: total.to_string(),
            cap,
        });
    }
    Ok(u64::try_from(&total).unwrap())
}

/// All p^(n^2) matrices, in index order. Gated by the enumeration cap.
pub fn enumerate_matrices(
    field: FieldSpec,
    cap: u64,
) -> Result<impl Iterator<Item = FpMatrix>> {
    let total = check_enum_cap(field, cap)?;
    Ok((0..total).map(move |idx| FpMatrix::from_index(field, idx)))
}

/// All h-dimensional subspaces of F_p^n, each exactly once, by direct
/// generation of canonical RREF bases: choose pivot columns, then fill the
/// free entries. Gated by the same cap as matrix enumeration.
pub fn enumerate_subspaces(field: FieldSpec, h: usize, cap: u64) -> Result<Vec<Subspace>> {
    if h > field.n() {
        return Err(Error::Domain(format!(
            "subspace dimension {h} exceeds n = {}",
            field.n()
        )));
    }
    check_enum_cap(field, cap)?;
    let n = field.n();
    let p = field.p();
    let mut out = Vec::new();
    for pivots in combinations(n, h) {
        // free positions: (row i, col j) with j > pivots[i] and j not a pivot
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (i, &pc) in pivots.iter().enumerate() {
            for j in pc + 1..n {
                if !pivots.contains(&j) {
                    free.push((i, j));
                }
            }
        }
        let combos = p.checked_pow(free.len() as u32).expect("free-entry overflow");
        for mut idx in 0..combos {
            let mut basis = vec![vec![0u64; n]; h];
            for (i, &pc) in pivots.iter().enumerate() {
                basis[i][pc] = 1;
            }
            for &(i, j) in &free {
                basis[i][j] = idx % p;
                idx /= p;
            }
            out.push(Subspace::from_rref_basis(field, basis));
        }
    }
    Ok(out)
}

/// All size-h subsets of {0..n}, each sorted ascending, in lexicographic order.
fn combinations(n: usize, h: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(h);
    fn rec(n: usize, h: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == h {
            out.push(current.clone());
            return;
        }
        for c in start..n {
            current.push(c);
            rec(n, h, c + 1, current, out);
            current.pop();
        }
    }
    rec(n, h, 0, &mut current, &mut out);
    out
}

/// Every subspace of F_p^n of every dimension (test helper for small spaces).
pub fn all_subspaces(field: FieldSpec) -> Vec<Subspace> {
    let mut out = Vec::new();
    for h in 0..=field.n() {
        out.extend(enumerate_subspaces(field, h, DEFAULT_ENUM_CAP).unwrap());
    }
    out
}

/// Count matrices with kernel of dimension exactly h by exhaustive enumeration.
pub fn count_fd_exhaustive(field: FieldSpec, h: usize, cap: u64) -> Result<u64> {
    let n = field.n();
    let mut count = 0u64;
    for m in enumerate_matrices(field, cap)? {
        if n - m.rank() == h {
            count += 1;
        }
    }
    Ok(count)
}

fn random_vector<R: Rng>(field: FieldSpec, rng: &mut R) -> FpVector {
    (0..field.n()).map(|_| rng.gen_range(0..field.p())).collect()
}

/// Sample h vectors uniformly among ordered linearly independent tuples, by
/// rejection.
fn random_independent_tuple<R: Rng>(field: FieldSpec, h: usize, rng: &mut R) -> Vec<FpVector> {
    let mut chosen: Vec<FpVector> = Vec::with_capacity(h);
    while chosen.len() < h {
        let v = random_vector(field, rng);
        let mut trial = chosen.clone();
        trial.push(v.clone());
        if rref(field, &trial).1 == trial.len() {
            chosen.push(v);
        }
    }
    chosen
}

/// Draw a uniform element of F_D, D = p^h: uniform kernel subspace first, then
/// uniform independent images for a fixed complement basis of the kernel.
pub fn sample_fd<R: Rng>(field: FieldSpec, h: usize, rng: &mut R) -> Result<FpMatrix> {
    let n = field.n();
    if h > n {
        return Err(Error::Domain(format!("kernel dimension {h} exceeds n = {n}")));
    }
    let kernel = Subspace::from_spanning(field, &random_independent_tuple(field, h, rng));
    let complement = kernel.complement_in(&Subspace::full(field))?;
    let images = random_independent_tuple(field, n - h, rng);
    // columns of B: complement basis then kernel basis; f maps them to
    // (images, 0), so M = [images | 0] B^{-1}.
    let mut b_cols: Vec<FpVector> = complement.basis().to_vec();
    b_cols.extend(kernel.basis().iter().cloned());
    let mut img_cols: Vec<FpVector> = images;
    img_cols.extend(std::iter::repeat(field.zero_vector()).take(h));
    let b = FpMatrix::from_columns(field, &b_cols)?;
    let img = FpMatrix::from_columns(field, &img_cols)?;
    let m = img.mul(&b.inverse()?)?;
    debug_assert_eq!(m.kernel(), kernel);
    Ok(m)
}
