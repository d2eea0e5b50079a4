//! Simon-problem instances: linear maps with a promise label, partial
//! functions and their linear-consistency analysis, and (for the classical
//! gap demo) general truth-table instances over F_2.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fflinalg::{kernel_of_rows, FieldSpec, FpMatrix, FpVector, Subspace};

/// Which side of the promise an instance sits on. Kernel dimension >= 2 is
/// labeled Unrestricted rather than rejected, because averaging needs all of
/// F_D; deciders may refuse such inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PromiseLabel {
    OneToOne,
    KernelP,
    Unrestricted,
}

/// A linear map together with its cached kernel and promise label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearInstance {
    matrix: FpMatrix,
    kernel: Subspace,
    label: PromiseLabel,
}

impl LinearInstance {
    pub fn new(matrix: FpMatrix) -> Self {
        let kernel = matrix.kernel();
        let label = match kernel.dim() {
            0 => PromiseLabel::OneToOne,
            1 => PromiseLabel::KernelP,
            _ => PromiseLabel::Unrestricted,
        };
        LinearInstance {
            matrix,
            kernel,
            label,
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.matrix.field()
    }

    pub fn matrix(&self) -> &FpMatrix {
        &self.matrix
    }

    pub fn kernel(&self) -> &Subspace {
        &self.kernel
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn label(&self) -> PromiseLabel {
        self.label
    }

    pub fn apply(&self, x: &[u64]) -> FpVector {
        self.matrix.apply(x)
    }
}

/// A partial function s: dom(s) -> F_p^n with distinct domain points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFn {
    field: FieldSpec,
    pairs: Vec<(FpVector, FpVector)>,
}

#[derive(Serialize, Deserialize)]
struct PartialFnJson {
    p: u64,
    n: usize,
    pairs: Vec<PairJson>,
}

#[derive(Serialize, Deserialize)]
struct PairJson {
    x: Vec<u64>,
    y: Vec<u64>,
}

impl PartialFn {
    pub fn new(field: FieldSpec, pairs: Vec<(FpVector, FpVector)>) -> Result<Self> {
        for (x, y) in &pairs {
            field.validate_vector(x)?;
            field.validate_vector(y)?;
        }
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                if pairs[i].0 == pairs[j].0 {
                    return Err(Error::Domain(format!(
                        "duplicate domain point {:?}",
                        pairs[i].0
                    )));
                }
            }
        }
        Ok(PartialFn { field, pairs })
    }

    pub fn empty(field: FieldSpec) -> Self {
        PartialFn {
            field,
            pairs: Vec::new(),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn pairs(&self) -> &[(FpVector, FpVector)] {
        &self.pairs
    }

    pub fn domain_size(&self) -> usize {
        self.pairs.len()
    }

    /// Does the given linear map extend this partial function?
    pub fn extended_by(&self, m: &FpMatrix) -> bool {
        self.pairs.iter().all(|(x, y)| &m.apply(x) == y)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.field.p(),
            "n": self.field.n(),
            "pairs": self.pairs.iter().map(|(x, y)| serde_json::json!({"x": x, "y": y})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<PartialFn> {
        let s: PartialFnJson = serde_json::from_value(value.clone())?;
        let field = FieldSpec::new(s.p, s.n)?;
        PartialFn::new(field, s.pairs.into_iter().map(|p| (p.x, p.y)).collect())
    }
}

/// Outcome of the linear-consistency analysis of a partial function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Consistency {
    /// Some linear map agrees with every pair. `span` is K = span(dom(s)) in
    /// RREF, `basis_images` the induced values on its basis (row i of `span`
    /// maps to `basis_images[i]`), `kernel` is Z = ker of the induced map on K.
    Consistent {
        span: Subspace,
        basis_images: Vec<FpVector>,
        kernel: Subspace,
    },
    Inconsistent,
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Consistency::Consistent { .. })
    }
}

/// Decide whether the pairs of `s` are the restriction of some linear map.
/// Gaussian elimination on (x | y) rows, eliminating on the x part only: a
/// zero x-part with nonzero image certifies inconsistency.
pub fn linear_consistency(s: &PartialFn) -> Consistency {
    let f = s.field();
    let n = f.n();
    let mut rows: Vec<(FpVector, FpVector)> = s.pairs().to_vec();
    let mut pivot_row = 0usize;
    let mut pivot_cols: Vec<usize> = Vec::new();
    for col in 0..n {
        let Some(r) = (pivot_row..rows.len()).find(|&r| rows[r].0[col] != 0) else {
            continue;
        };
        rows.swap(pivot_row, r);
        let scale = f.inv(rows[pivot_row].0[col]);
        rows[pivot_row].0 = f.scale_vec(scale, &rows[pivot_row].0);
        rows[pivot_row].1 = f.scale_vec(scale, &rows[pivot_row].1);
        for r in 0..rows.len() {
            if r != pivot_row && rows[r].0[col] != 0 {
                let factor = rows[r].0[col];
                rows[r].0 = f.sub_vec(&rows[r].0, &f.scale_vec(factor, &rows[pivot_row].0));
                rows[r].1 = f.sub_vec(&rows[r].1, &f.scale_vec(factor, &rows[pivot_row].1));
            }
        }
        pivot_cols.push(col);
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    // rows beyond the pivots have zero x-part; a nonzero image there means no
    // linear map can agree
    for (x, y) in &rows[pivot_row..] {
        debug_assert!(f.is_zero_vector(x));
        if !f.is_zero_vector(y) {
            return Consistency::Inconsistent;
        }
    }
    rows.truncate(pivot_row);
    let span = Subspace::from_rref_basis(f, rows.iter().map(|(x, _)| x.clone()).collect());
    let basis_images: Vec<FpVector> = rows.iter().map(|(_, y)| y.clone()).collect();
    let kernel = induced_kernel(f, &span, &basis_images);
    Consistency::Consistent {
        span,
        basis_images,
        kernel,
    }
}

/// Z = {v in K : induced map sends v to 0}, where the induced map sends basis
/// row i of K to images[i].
fn induced_kernel(field: FieldSpec, span: &Subspace, images: &[FpVector]) -> Subspace {
    let k = span.dim();
    if k == 0 {
        return Subspace::zero(field);
    }
    // coefficient vectors c in F_p^k with sum_i c_i * images[i] = 0
    let coeff_field = FieldSpec::new(field.p(), k).expect("k >= 1");
    let functional_rows: Vec<FpVector> = (0..field.n())
        .map(|coord| images.iter().map(|u| u[coord]).collect())
        .collect();
    let coeff_kernel = kernel_of_rows(coeff_field, &functional_rows);
    let z_vectors: Vec<FpVector> = coeff_kernel
        .basis()
        .iter()
        .map(|c| {
            let mut v = field.zero_vector();
            for (ci, b) in c.iter().zip(span.basis()) {
                v = field.add_vec(&v, &field.scale_vec(*ci, b));
            }
            v
        })
        .collect();
    Subspace::from_spanning(field, &z_vectors)
}

/// Restrict a linear instance to the given query points (duplicates dropped).
pub fn restrict(f: &LinearInstance, queries: &[FpVector]) -> PartialFn {
    let mut pairs: Vec<(FpVector, FpVector)> = Vec::new();
    for q in queries {
        if pairs.iter().any(|(x, _)| x == q) {
            continue;
        }
        pairs.push((q.clone(), f.apply(q)));
    }
    PartialFn {
        field: f.field(),
        pairs,
    }
}

/// A general (not necessarily linear) Simon instance over {0,1}^n, stored as
/// a full truth table of point indices. Exists only for the classical-gap
/// demonstration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralInstance {
    field: FieldSpec,
    table: Vec<u64>,
    hidden_shift: Option<u64>,
}

impl GeneralInstance {
    /// Uniform random instance: a bijection when `hidden_shift` is None,
    /// otherwise a 2-to-1 function with f(x) = f(x xor s).
    pub fn random<R: Rng>(n: usize, hidden_shift: Option<&[u64]>, rng: &mut R) -> Result<Self> {
        if n > 12 {
            return Err(Error::Domain(format!("n = {n} exceeds table limit 12")));
        }
        let field = FieldSpec::new(2, n)?;
        let size = 1u64 << n;
        let mut values: Vec<u64> = (0..size).collect();
        values.shuffle(rng);
        match hidden_shift {
            None => Ok(GeneralInstance {
                field,
                table: values,
                hidden_shift: None,
            }),
            Some(s) => {
                field.validate_vector(s)?;
                let s_idx = field.vector_to_index(s);
                if s_idx == 0 {
                    return Err(Error::Domain(
                        "a 2-to-1 instance requires a nonzero hidden shift".into(),
                    ));
                }
                let mut table = vec![u64::MAX; size as usize];
                let mut next = 0usize;
                for x in 0..size {
                    if table[x as usize] == u64::MAX {
                        let img = values[next];
                        next += 1;
                        table[x as usize] = img;
                        table[(x ^ s_idx) as usize] = img;
                    }
                }
                Ok(GeneralInstance {
                    field,
                    table,
                    hidden_shift: Some(s_idx),
                })
            }
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn n(&self) -> usize {
        self.field.n()
    }

    pub fn hidden_shift(&self) -> Option<FpVector> {
        self.hidden_shift.map(|s| self.field.index_to_vector(s))
    }

    pub fn eval_index(&self, x: u64) -> u64 {
        self.table[x as usize]
    }

    pub fn eval(&self, x: &[u64]) -> FpVector {
        self.field
            .index_to_vector(self.table[self.field.vector_to_index(x) as usize])
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.table.len()];
        for &v in &self.table {
            if seen[v as usize] {
                return false;
            }
            seen[v as usize] = true;
        }
        true
    }

    pub fn to_json(&self) -> serde_json::Value {
        let f = &self.field;
        serde_json::json!({
            "n": f.n(),
            "table": self.table.iter().map(|&v| f.index_to_vector(v)).collect::<Vec<_>>(),
            "shift": self.hidden_shift.map(|s| f.index_to_vector(s)),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<GeneralInstance> {
        #[derive(Deserialize)]
        struct J {
            n: usize,
            table: Vec<Vec<u64>>,
            shift: Option<Vec<u64>>,
        }
        let j: J = serde_json::from_value(value.clone())?;
        let field = FieldSpec::new(2, j.n)?;
        if j.table.len() != 1usize << j.n {
            return Err(Error::Domain("truth table has wrong size".into()));
        }
        let mut table = Vec::with_capacity(j.table.len());
        for v in &j.table {
            field.validate_vector(v)?;
            table.push(field.vector_to_index(v));
        }
        let hidden_shift = match &j.shift {
            None => None,
            Some(s) => {
                field.validate_vector(s)?;
                Some(field.vector_to_index(s))
            }
        };
        Ok(GeneralInstance {
            field,
            table,
            hidden_shift,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fflinalg::counting::{enumerate_matrices, DEFAULT_ENUM_CAP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fs(p: u64, n: usize) -> FieldSpec {
        FieldSpec::new(p, n).unwrap()
    }

    #[test]
    fn labels_from_kernel_dimension() {
        let f = fs(2, 2);
        assert_eq!(
            LinearInstance::new(FpMatrix::identity(f)).label(),
            PromiseLabel::OneToOne
        );
        let m = FpMatrix::from_rows(f, vec![vec![1, 1], vec![0, 0]]).unwrap();
        let inst = LinearInstance::new(m);
        assert_eq!(inst.label(), PromiseLabel::KernelP);
        assert_eq!(inst.kernel_dim(), 1);
        assert_eq!(
            LinearInstance::new(FpMatrix::zero(f)).label(),
            PromiseLabel::Unrestricted
        );
    }

    #[test]
    fn empty_partial_fn_is_consistent() {
        let f = fs(2, 2);
        let s = PartialFn::empty(f);
        match linear_consistency(&s) {
            Consistency::Consistent { span, kernel, .. } => {
                assert_eq!(span.dim(), 0);
                assert_eq!(kernel.dim(), 0);
            }
            _ => panic!("empty must be consistent"),
        }
    }

    #[test]
    fn scalar_multiple_pairs() {
        let f = fs(3, 2);
        let ok = PartialFn::new(
            f,
            vec![(vec![1, 0], vec![1, 1]), (vec![2, 0], vec![2, 2])],
        )
        .unwrap();
        assert!(linear_consistency(&ok).is_consistent());
        let bad = PartialFn::new(
            f,
            vec![(vec![1, 0], vec![1, 1]), (vec![2, 0], vec![0, 1])],
        )
        .unwrap();
        assert_eq!(linear_consistency(&bad), Consistency::Inconsistent);
    }

    #[test]
    fn restrict_basics() {
        let f = fs(2, 2);
        let id = LinearInstance::new(FpMatrix::identity(f));
        assert_eq!(restrict(&id, &[]).domain_size(), 0);
        let s = restrict(&id, &[vec![1, 0]]);
        assert_eq!(s.pairs(), &[(vec![1, 0], vec![1, 0])]);
        // duplicates collapse
        let s = restrict(&id, &[vec![1, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(s.domain_size(), 2);
    }

    #[test]
    fn restriction_of_linear_is_always_consistent() {
        let f = fs(2, 2);
        for m in enumerate_matrices(f, DEFAULT_ENUM_CAP).unwrap() {
            let inst = LinearInstance::new(m);
            let queries: Vec<_> = f.vectors().collect();
            let s = restrict(&inst, &queries);
            assert!(linear_consistency(&s).is_consistent());
        }
    }

    #[test]
    fn consistency_agrees_with_matrix_bruteforce() {
        // every partial function with |dom| <= 3 at p=2, n=2, versus "does any
        // of the 16 matrices extend s?"
        let f = fs(2, 2);
        let points: Vec<FpVector> = f.vectors().collect();
        let matrices: Vec<FpMatrix> = enumerate_matrices(f, DEFAULT_ENUM_CAP).unwrap().collect();
        let mut checked = 0u32;
        for dom_mask in 0u32..16 {
            if dom_mask.count_ones() > 3 {
                continue;
            }
            let dom: Vec<&FpVector> = points
                .iter()
                .enumerate()
                .filter(|(i, _)| dom_mask >> i & 1 == 1)
                .map(|(_, v)| v)
                .collect();
            let d = dom.len();
            for img_idx in 0..4u64.pow(d as u32) {
                let mut idx = img_idx;
                let mut pairs = Vec::new();
                for x in &dom {
                    pairs.push(((*x).clone(), f.index_to_vector(idx % 4)));
                    idx /= 4;
                }
                let s = PartialFn::new(f, pairs).unwrap();
                let brute = matrices.iter().any(|m| s.extended_by(m));
                assert_eq!(linear_consistency(&s).is_consistent(), brute);
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn induced_kernel_matches_definition() {
        // s = restriction of a singular map: Z must be ker(f) cap K
        let f = fs(2, 3);
        for m in enumerate_matrices(f, DEFAULT_ENUM_CAP).unwrap() {
            let inst = LinearInstance::new(m);
            let queries: Vec<FpVector> = vec![f.unit_vector(0), f.unit_vector(2)];
            let s = restrict(&inst, &queries);
            let Consistency::Consistent { span, kernel, .. } = linear_consistency(&s) else {
                panic!("restriction must be consistent");
            };
            let expected = inst.kernel().intersect(&span).unwrap();
            assert_eq!(kernel, expected);
        }
    }

    #[test]
    fn general_instance_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GeneralInstance::random(4, None, &mut rng).unwrap();
        assert!(g.is_bijection());
    }

    #[test]
    fn general_instance_two_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = vec![1, 0, 1, 0];
        let g = GeneralInstance::random(4, Some(&s), &mut rng).unwrap();
        let f = g.field();
        let s_idx = f.vector_to_index(&s);
        let mut preimages = std::collections::HashMap::new();
        for x in 0..16u64 {
            assert_eq!(g.eval_index(x), g.eval_index(x ^ s_idx));
            preimages
                .entry(g.eval_index(x))
                .or_insert_with(Vec::new)
                .push(x);
        }
        for (_, pre) in preimages {
            assert_eq!(pre.len(), 2);
        }
    }

    #[test]
    fn general_instance_rejects_zero_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(GeneralInstance::random(3, Some(&[0, 0, 0]), &mut rng).is_err());
    }

    #[test]
    fn n1_shift_collides() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = GeneralInstance::random(1, Some(&[1]), &mut rng).unwrap();
        assert_eq!(g.eval_index(0), g.eval_index(1));
    }
}
