use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fflinalg::field::{FieldSpec, FpVector};
use crate::fflinalg::subspace::Subspace;

/// A linear map f: F_p^n -> F_p^n stored as its n x n matrix, row-major.
/// Column j is the image of the j-th standard basis vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    field: FieldSpec,
    rows: Vec<FpVector>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    p: u64,
    n: usize,
    rows: Vec<Vec<u64>>,
}

impl FpMatrix {
    pub fn from_rows(field: FieldSpec, rows: Vec<FpVector>) -> Result<Self> {
        if rows.len() != field.n() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows, expected {}",
                rows.len(),
                field.n()
            )));
        }
        for r in &rows {
            field.validate_vector(r)?;
        }
        Ok(FpMatrix { field, rows })
    }

    pub fn zero(field: FieldSpec) -> Self {
        let n = field.n();
        FpMatrix {
            field,
            rows: vec![vec![0; n]; n],
        }
    }

    pub fn identity(field: FieldSpec) -> Self {
        let n = field.n();
        let rows = (0..n).map(|i| field.unit_vector(i)).collect();
        FpMatrix { field, rows }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: FieldSpec, cols: &[FpVector]) -> Result<Self> {
        let n = field.n();
        if cols.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} columns, expected {}",
                cols.len(),
                n
            )));
        }
        let mut rows = vec![vec![0u64; n]; n];
        for (j, c) in cols.iter().enumerate() {
            field.validate_vector(c)?;
            for i in 0..n {
                rows[i][j] = c[i];
            }
        }
        Ok(FpMatrix { field, rows })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> &[FpVector] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.rows[i][j]
    }

    pub fn apply(&self, x: &[u64]) -> FpVector {
        let f = &self.field;
        self.rows.iter().map(|r| f.dot(r, x)).collect()
    }

    pub fn negate(&self) -> FpMatrix {
        let f = self.field;
        FpMatrix {
            field: f,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&c| f.neg(c)).collect())
                .collect(),
        }
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.field != other.field {
            return Err(Error::DimensionMismatch("field mismatch in mul".into()));
        }
        let f = &self.field;
        let n = f.n();
        let mut rows = vec![vec![0u64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for k in 0..n {
                    acc = (acc + self.rows[i][k] * other.rows[k][j]) % f.p();
                }
                rows[i][j] = acc;
            }
        }
        Ok(FpMatrix {
            field: self.field,
            rows,
        })
    }

    /// Gauss-Jordan inverse; errors if the matrix is singular.
    pub fn inverse(&self) -> Result<FpMatrix> {
        let f = self.field;
        let n = f.n();
        let mut a = self.rows.clone();
        let mut inv = FpMatrix::identity(f).rows;
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a[r][col] != 0)
                .ok_or_else(|| Error::Domain("matrix is singular".into()))?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let scale = f.inv(a[col][col]);
            for j in 0..n {
                a[col][j] = f.mul(a[col][j], scale);
                inv[col][j] = f.mul(inv[col][j], scale);
            }
            for r in 0..n {
                if r != col && a[r][col] != 0 {
                    let factor = a[r][col];
                    for j in 0..n {
                        a[r][j] = f.sub(a[r][j], f.mul(factor, a[col][j]));
                        inv[r][j] = f.sub(inv[r][j], f.mul(factor, inv[col][j]));
                    }
                }
            }
        }
        Ok(FpMatrix { field: f, rows: inv })
    }

    /// The kernel {x : Mx = 0}, in canonical form.
    pub fn kernel(&self) -> Subspace {
        kernel_of_rows(self.field, &self.rows)
    }

    pub fn rank(&self) -> usize {
        rref(self.field, &self.rows).1
    }

    /// Decode matrix index `idx` in [0, p^(n^2)) into a matrix, entries in
    /// row-major base-p order (entry (0,0) least significant).
    pub fn from_index(field: FieldSpec, mut idx: u64) -> FpMatrix {
        let n = field.n();
        let p = field.p();
        let mut rows = vec![vec![0u64; n]; n];
        for r in rows.iter_mut() {
            for c in r.iter_mut() {
                *c = idx % p;
                idx /= p;
            }
        }
        FpMatrix { field, rows }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.field.p(),
            "n": self.field.n(),
            "rows": self.rows,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<FpMatrix> {
        let m: MatrixJson = serde_json::from_value(value.clone())?;
        let field = FieldSpec::new(m.p, m.n)?;
        FpMatrix::from_rows(field, m.rows)
    }
}

/// Reduced row echelon form of the given rows (each of width field.n()).
/// Returns the nonzero RREF rows (pivot columns strictly increasing) and the rank.
pub fn rref(field: FieldSpec, rows: &[FpVector]) -> (Vec<FpVector>, usize) {
    let f = &field;
    let n = f.n();
    let mut work: Vec<FpVector> = rows.to_vec();
    let mut pivot_row = 0usize;
    for col in 0..n {
        let Some(r) = (pivot_row..work.len()).find(|&r| work[r][col] != 0) else {
            continue;
        };
        work.swap(pivot_row, r);
        let scale = f.inv(work[pivot_row][col]);
        for j in 0..n {
            work[pivot_row][j] = f.mul(work[pivot_row][j], scale);
        }
        for r in 0..work.len() {
            if r != pivot_row && work[r][col] != 0 {
                let factor = work[r][col];
                for j in 0..n {
                    work[r][j] = f.sub(work[r][j], f.mul(factor, work[pivot_row][j]));
                }
            }
        }
        pivot_row += 1;
        if pivot_row == work.len() {
            break;
        }
    }
    work.truncate(pivot_row);
    let rank = work.len();
    (work, rank)
}

/// Kernel of the linear map whose matrix has the given rows, i.e.
/// {x in F_p^n : row . x = 0 for every row}. Rows may be any number of
/// functionals of width field.n().
pub fn kernel_of_rows(field: FieldSpec, rows: &[FpVector]) -> Subspace {
    let f = &field;
    let n = f.n();
    let (r, rank) = rref(field, rows);
    let mut pivot_cols = Vec::with_capacity(rank);
    for row in &r {
        let col = row.iter().position(|&c| c != 0).unwrap();
        pivot_cols.push(col);
    }
    let mut basis = Vec::with_capacity(n - rank);
    for free in 0..n {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; n];
        v[free] = 1;
        for (i, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = f.neg(r[i][free]);
        }
        basis.push(v);
    }
    Subspace::from_spanning(field, &basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(p: u64, n: usize) -> FieldSpec {
        FieldSpec::new(p, n).unwrap()
    }

    #[test]
    fn rref_duplicate_rows_f2() {
        let f = fs(2, 2);
        let (basis, rank) = rref(f, &[vec![1, 1], vec![1, 1]]);
        assert_eq!(rank, 1);
        assert_eq!(basis, vec![vec![1, 1]]);
    }

    #[test]
    fn rref_identity_full_rank() {
        for n in 1..=4 {
            let f = fs(2, n);
            let id = FpMatrix::identity(f);
            let (_, rank) = rref(f, id.rows());
            assert_eq!(rank, n);
        }
    }

    #[test]
    fn rref_f3_rank_one() {
        // second row is 2x the first: 2*(1,2) = (2,4) = (2,1) mod 3
        let f = fs(3, 2);
        let (basis, rank) = rref(f, &[vec![1, 2], vec![2, 1]]);
        assert_eq!(rank, 1);
        assert_eq!(basis, vec![vec![1, 2]]);
    }

    #[test]
    fn kernel_zero_matrix_is_full_space() {
        let f = fs(2, 2);
        let k = FpMatrix::zero(f).kernel();
        assert_eq!(k.dim(), 2);
    }

    #[test]
    fn kernel_identity_is_trivial() {
        let f = fs(2, 2);
        assert_eq!(FpMatrix::identity(f).kernel().dim(), 0);
    }

    #[test]
    fn kernel_matches_exhaustive_evaluation() {
        let f = fs(2, 2);
        let m = FpMatrix::from_rows(f, vec![vec![1, 1], vec![0, 0]]).unwrap();
        let k = m.kernel();
        assert_eq!(k.dim(), 1);
        for v in f.vectors() {
            let in_kernel = f.is_zero_vector(&m.apply(&v));
            assert_eq!(k.contains(&v), in_kernel, "vector {v:?}");
        }
        assert!(k.contains(&[1, 1]));
    }

    #[test]
    fn inverse_roundtrip() {
        let f = fs(5, 3);
        let m = FpMatrix::from_rows(
            f,
            vec![vec![1, 2, 3], vec![0, 1, 4], vec![2, 0, 1]],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), FpMatrix::identity(f));
    }

    #[test]
    fn linearity_spot_check() {
        let f = fs(3, 2);
        let m = FpMatrix::from_rows(f, vec![vec![1, 2], vec![2, 2]]).unwrap();
        for x in f.vectors() {
            for y in f.vectors() {
                let lhs = m.apply(&f.add_vec(&x, &y));
                let rhs = f.add_vec(&m.apply(&x), &m.apply(&y));
                assert_eq!(lhs, rhs);
            }
        }
    }
}
