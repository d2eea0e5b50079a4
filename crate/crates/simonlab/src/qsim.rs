//! Exact state-vector simulation of query algorithms with the addition
//! oracle |x>|b>|w> -> |x>|b + f(x)>|w>, the Fourier transform over F_p^n,
//! and the Fourier-sampling decision procedure for the linear Simon problem.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fflinalg::{FieldSpec, FpVector, Subspace};
use crate::instances::{LinearInstance, PromiseLabel};

/// Default cap on the number of complex amplitudes a state may hold.
pub const DEFAULT_SIM_CAP: u64 = 1 << 20;

const NORM_TOL: f64 = 1e-9;
const UNITARY_TOL: f64 = 1e-9;

/// Which tensor factor a dense unitary acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Register {
    Query,
    Output,
    Work,
}

/// Amplitudes indexed by (query i in F_p^n, output b in F_p^n, workspace w in [m]).
#[derive(Debug, Clone)]
pub struct StateVector {
    field: FieldSpec,
    workspace_dim: usize,
    pn: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The initial state |0>|0>|0>.
    pub fn zero_state(field: FieldSpec, workspace_dim: usize, cap: u64) -> Result<Self> {
        if workspace_dim == 0 {
            return Err(Error::InvalidDimension("workspace_dim must be >= 1".into()));
        }
        let pn = field
            .point_count()
            .ok_or_else(|| Error::Domain("p^n overflows".into()))?;
        let total = pn
            .checked_mul(pn)
            .and_then(|t| t.checked_mul(workspace_dim as u64))
            .ok_or_else(|| Error::Domain("state dimension overflows".into()))?;
        if total > cap {
            return Err(Error::SimulatorCapExceeded {
                required: total,
                cap,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); total as usize];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            field,
            workspace_dim,
            pn: pn as usize,
            amps,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn workspace_dim(&self) -> usize {
        self.workspace_dim
    }

    #[inline]
    fn index(&self, i: usize, b: usize, w: usize) -> usize {
        (i * self.pn + b) * self.workspace_dim + w
    }

    pub fn amplitude(&self, i: usize, b: usize, w: usize) -> Complex64 {
        self.amps[self.index(i, b, w)]
    }

    pub fn set_amplitude(&mut self, i: usize, b: usize, w: usize, a: Complex64) {
        let idx = self.index(i, b, w);
        self.amps[idx] = a;
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn assert_normalized(&self) {
        debug_assert!(
            (self.norm_sq() - 1.0).abs() < NORM_TOL,
            "state norm drifted: {}",
            self.norm_sq()
        );
    }

    /// The oracle |x>|b>|w> -> |x>|b + f(x)>|w>, applied as an index
    /// permutation of the output register. Bit-exact norm preservation.
    pub fn apply_oracle(&mut self, f: &LinearInstance) -> Result<()> {
        if f.field() != self.field {
            return Err(Error::DimensionMismatch(
                "oracle field does not match state field".into(),
            ));
        }
        let field = self.field;
        let pn = self.pn;
        let m = self.workspace_dim;
        // image index of every query value
        let images: Vec<usize> = (0..pn)
            .map(|i| field.vector_to_index(&f.apply(&field.index_to_vector(i as u64))) as usize)
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for i in 0..pn {
            let fi = images[i];
            for b in 0..pn {
                let b_new = add_indices(field, b, fi);
                for w in 0..m {
                    out[(i * pn + b_new) * m + w] = self.amps[(i * pn + b) * m + w];
                }
            }
        }
        self.amps = out;
        Ok(())
    }

    /// |x> -> p^{-n/2} sum_y omega^{x.y} |y> on the query register, with
    /// omega = e^{2 pi i / p}; applied coordinate-by-coordinate.
    pub fn qft_query(&mut self) {
        self.fourier_query(false);
        self.assert_normalized();
    }

    pub fn iqft_query(&mut self) {
        self.fourier_query(true);
        self.assert_normalized();
    }

    fn fourier_query(&mut self, inverse: bool) {
        let p = self.field.p() as usize;
        let n = self.field.n();
        let m = self.workspace_dim;
        let pn = self.pn;
        let sign = if inverse { -1.0 } else { 1.0 };
        let omega: Vec<Complex64> = (0..p)
            .map(|k| {
                let theta = sign * 2.0 * std::f64::consts::PI * (k as f64) / (p as f64);
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        let scale = 1.0 / (p as f64).sqrt();
        let mut stride = 1usize; // p^coord
        for _ in 0..n {
            // walk all (i, b, w) with the current query digit factored out
            let mut scratch = vec![Complex64::new(0.0, 0.0); p];
            for i_hi in 0..pn / (stride * p) {
                for i_lo in 0..stride {
                    for b in 0..pn {
                        for w in 0..m {
                            for d in 0..p {
                                let i = i_hi * stride * p + d * stride + i_lo;
                                scratch[d] = self.amps[(i * pn + b) * m + w];
                            }
                            for y in 0..p {
                                let mut acc = Complex64::new(0.0, 0.0);
                                for x in 0..p {
                                    acc += omega[x * y % p] * scratch[x];
                                }
                                let i = i_hi * stride * p + y * stride + i_lo;
                                self.amps[(i * pn + b) * m + w] = acc * scale;
                            }
                        }
                    }
                }
            }
            stride *= p;
        }
    }

    /// Apply a dense unitary to one register; errors if the matrix is not
    /// unitary within 1e-9 or has the wrong dimension.
    pub fn apply_dense(&mut self, register: Register, matrix: &[Vec<Complex64>]) -> Result<()> {
        let dim = match register {
            Register::Query | Register::Output => self.pn,
            Register::Work => self.workspace_dim,
        };
        check_unitary(matrix, dim)?;
        let pn = self.pn;
        let m = self.workspace_dim;
        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        let index_of = |i: usize, b: usize, w: usize| (i * pn + b) * m + w;
        let (outer1, outer2): (usize, usize) = match register {
            Register::Query => (pn, m),
            Register::Output => (pn, m),
            Register::Work => (pn, pn),
        };
        for o1 in 0..outer1 {
            for o2 in 0..outer2 {
                for d in 0..dim {
                    let idx = match register {
                        Register::Query => index_of(d, o1, o2),
                        Register::Output => index_of(o1, d, o2),
                        Register::Work => index_of(o1, o2, d),
                    };
                    scratch[d] = self.amps[idx];
                }
                for r in 0..dim {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..dim {
                        acc += matrix[r][c] * scratch[c];
                    }
                    let idx = match register {
                        Register::Query => index_of(r, o1, o2),
                        Register::Output => index_of(o1, r, o2),
                        Register::Work => index_of(o1, o2, r),
                    };
                    self.amps[idx] = acc;
                }
            }
        }
        self.assert_normalized();
        Ok(())
    }

    /// Marginal measurement distribution of the query register.
    pub fn query_distribution(&self) -> Vec<f64> {
        let pn = self.pn;
        let m = self.workspace_dim;
        let mut probs = vec![0.0f64; pn];
        for i in 0..pn {
            for b in 0..pn {
                for w in 0..m {
                    probs[i] += self.amps[(i * pn + b) * m + w].norm_sqr();
                }
            }
        }
        probs
    }

    /// Probability that the output register is measured in `accept_indices`.
    pub fn acceptance_probability(&self, accept_indices: &[usize]) -> f64 {
        let pn = self.pn;
        let m = self.workspace_dim;
        let mut p = 0.0f64;
        for i in 0..pn {
            for &b in accept_indices {
                for w in 0..m {
                    p += self.amps[(i * pn + b) * m + w].norm_sqr();
                }
            }
        }
        p
    }
}

fn add_indices(field: FieldSpec, a: usize, b: usize) -> usize {
    let va = field.index_to_vector(a as u64);
    let vb = field.index_to_vector(b as u64);
    field.vector_to_index(&field.add_vec(&va, &vb)) as usize
}

fn check_unitary(matrix: &[Vec<Complex64>], dim: usize) -> Result<()> {
    if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "dense matrix must be {dim} x {dim}"
        )));
    }
    let mut max_dev = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += matrix[k][i].conj() * matrix[k][j];
            }
            let expected = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((acc - expected).norm());
        }
    }
    if max_dev > UNITARY_TOL {
        return Err(Error::NotUnitary(max_dev));
    }
    Ok(())
}

/// One circuit operation.
#[derive(Debug, Clone)]
pub enum CircuitOp {
    QftQuery,
    IqftQuery,
    Oracle,
    Dense {
        register: Register,
        matrix: Vec<Vec<Complex64>>,
    },
}

/// A T-query algorithm: an op list plus the accept set on the output register.
#[derive(Debug, Clone)]
pub struct Circuit {
    field: FieldSpec,
    workspace_dim: usize,
    ops: Vec<CircuitOp>,
    accept_set: Vec<FpVector>,
}

impl Circuit {
    pub fn new(
        field: FieldSpec,
        workspace_dim: usize,
        ops: Vec<CircuitOp>,
        accept_set: Vec<FpVector>,
    ) -> Result<Self> {
        for v in &accept_set {
            field.validate_vector(v)?;
        }
        Ok(Circuit {
            field,
            workspace_dim,
            ops,
            accept_set,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn query_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, CircuitOp::Oracle))
            .count()
    }

    /// Run on input f and return the acceptance probability P(f).
    pub fn run(&self, f: &LinearInstance, cap: u64) -> Result<f64> {
        if f.field() != self.field {
            return Err(Error::DimensionMismatch(
                "instance field does not match circuit field".into(),
            ));
        }
        let mut state = StateVector::zero_state(self.field, self.workspace_dim, cap)?;
        for op in &self.ops {
            match op {
                CircuitOp::QftQuery => state.qft_query(),
                CircuitOp::IqftQuery => state.iqft_query(),
                CircuitOp::Oracle => state.apply_oracle(f)?,
                CircuitOp::Dense { register, matrix } => state.apply_dense(*register, matrix)?,
            }
        }
        let accept_indices: Vec<usize> = self
            .accept_set
            .iter()
            .map(|v| self.field.vector_to_index(v) as usize)
            .collect();
        Ok(state.acceptance_probability(&accept_indices))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let ops: Vec<serde_json::Value> = self
            .ops
            .iter()
            .map(|op| match op {
                CircuitOp::QftQuery => serde_json::json!({"type": "qft_query"}),
                CircuitOp::IqftQuery => serde_json::json!({"type": "iqft_query"}),
                CircuitOp::Oracle => serde_json::json!({"type": "oracle"}),
                CircuitOp::Dense { register, matrix } => {
                    let re: Vec<Vec<f64>> = matrix
                        .iter()
                        .map(|r| r.iter().map(|c| c.re).collect())
                        .collect();
                    let im: Vec<Vec<f64>> = matrix
                        .iter()
                        .map(|r| r.iter().map(|c| c.im).collect())
                        .collect();
                    serde_json::json!({"type": "dense", "register": register, "matrix_re": re, "matrix_im": im})
                }
            })
            .collect();
        serde_json::json!({
            "p": self.field.p(),
            "n": self.field.n(),
            "workspace": self.workspace_dim,
            "ops": ops,
            "accept": self.accept_set,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Circuit> {
        #[derive(Deserialize)]
        struct OpJson {
            #[serde(rename = "type")]
            kind: String,
            register: Option<Register>,
            matrix_re: Option<Vec<Vec<f64>>>,
            matrix_im: Option<Vec<Vec<f64>>>,
        }
        #[derive(Deserialize)]
        struct CircuitJson {
            p: u64,
            n: usize,
            workspace: usize,
            ops: Vec<OpJson>,
            accept: Vec<Vec<u64>>,
        }
        let j: CircuitJson = serde_json::from_value(value.clone())?;
        let field = FieldSpec::new(j.p, j.n)?;
        let mut ops = Vec::new();
        for op in j.ops {
            let parsed = match op.kind.as_str() {
                "qft_query" => CircuitOp::QftQuery,
                "iqft_query" => CircuitOp::IqftQuery,
                "oracle" => CircuitOp::Oracle,
                "dense" => {
                    let register = op
                        .register
                        .ok_or_else(|| Error::Domain("dense op missing register".into()))?;
                    let re = op
                        .matrix_re
                        .ok_or_else(|| Error::Domain("dense op missing matrix_re".into()))?;
                    let im = op
                        .matrix_im
                        .ok_or_else(|| Error::Domain("dense op missing matrix_im".into()))?;
                    if re.len() != im.len() {
                        return Err(Error::Domain("matrix_re / matrix_im size mismatch".into()));
                    }
                    let matrix: Vec<Vec<Complex64>> = re
                        .iter()
                        .zip(&im)
                        .map(|(rr, ri)| {
                            rr.iter()
                                .zip(ri)
                                .map(|(&a, &b)| Complex64::new(a, b))
                                .collect()
                        })
                        .collect();
                    CircuitOp::Dense { register, matrix }
                }
                other => return Err(Error::Domain(format!("unknown op type {other:?}"))),
            };
            ops.push(parsed);
        }
        Circuit::new(field, j.workspace, ops, j.accept)
    }
}

/// The exact distribution of one Fourier-sampling round on input f: uniform
/// superposition, one oracle call, QFT, measure the query register. The
/// support is the annihilator of ker(f), uniform on it.
pub fn simon_round_distribution(f: &LinearInstance) -> Result<Vec<f64>> {
    let field = f.field();
    let mut state = StateVector::zero_state(field, 1, DEFAULT_SIM_CAP)?;
    state.qft_query();
    state.apply_oracle(f)?;
    state.qft_query();
    Ok(state.query_distribution())
}

/// Transcript of a Fourier-sampling decision run.
#[derive(Debug, Clone, Serialize)]
pub struct DecisionTranscript {
    pub samples: Vec<FpVector>,
    pub span_dim: usize,
    pub rounds: usize,
    /// Exact probability that `rounds` uniform samples from the annihilator
    /// span the whole space when the input is one-to-one (error rate on
    /// one-to-one inputs is one minus this; kernel-p inputs never err).
    pub one_to_one_success_probability: String,
}

/// Decide the promise by sampling `rounds` Fourier rounds: answer OneToOne iff
/// the samples span F_p^n. Kernel-p inputs can never span (support is a proper
/// subspace), so that side errs with probability zero.
pub fn simon_decide(
    f: &LinearInstance,
    rounds: usize,
    seed: u64,
) -> Result<(PromiseLabel, DecisionTranscript)> {
    if f.label() == PromiseLabel::Unrestricted {
        return Err(Error::PromiseViolation(
            "simon_decide requires kernel dimension 0 or 1".into(),
        ));
    }
    let field = f.field();
    let dist = simon_round_distribution(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<FpVector> = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mut u: f64 = rng.gen();
        let mut chosen = dist.len() - 1;
        for (i, &pr) in dist.iter().enumerate() {
            if u < pr {
                chosen = i;
                break;
            }
            u -= pr;
        }
        samples.push(field.index_to_vector(chosen as u64));
    }
    let span = Subspace::from_spanning(field, &samples);
    let label = if span.dim() == field.n() {
        PromiseLabel::OneToOne
    } else {
        PromiseLabel::KernelP
    };
    let transcript = DecisionTranscript {
        span_dim: span.dim(),
        rounds,
        one_to_one_success_probability: spanning_probability(field.p(), field.n(), rounds)
            .to_string(),
        samples,
    };
    Ok((label, transcript))
}

/// Exact probability that `rounds` independent uniform samples from F_p^n span
/// the whole space: prod_{i=0}^{n-1} (1 - p^{i - rounds}).
pub fn spanning_probability(p: u64, n: usize, rounds: usize) -> BigRational {
    if rounds < n {
        return BigRational::from(BigInt::from(0));
    }
    let pb = BigInt::from(p);
    let pt = pb.pow(rounds as u32);
    let mut acc = BigRational::one();
    for i in 0..n {
        let pi = pb.pow(i as u32);
        acc *= BigRational::new(&pt - pi, pt.clone());
    }
    acc
}

/// Independent check of `spanning_probability` by dynamic programming over the
/// dimension of the span after each sample.
pub fn spanning_probability_dp(p: u64, n: usize, rounds: usize) -> BigRational {
    let pb = BigInt::from(p);
    let pn = pb.pow(n as u32);
    let mut dist = vec![BigRational::from(BigInt::from(0)); n + 1];
    dist[0] = BigRational::one();
    for _ in 0..rounds {
        let mut next = vec![BigRational::from(BigInt::from(0)); n + 1];
        for (d, pr) in dist.iter().enumerate() {
            let in_span = BigRational::new(pb.pow(d as u32), pn.clone());
            let out_span = BigRational::one() - &in_span;
            next[d] += pr * in_span;
            if d < n {
                next[d + 1] += pr * out_span;
            }
        }
        dist = next;
    }
    dist[n].clone()
}

/// Default round count used by the CLI decider: errs on one-to-one inputs with
/// probability under p^{-2} * p/(p-1) <= 1/4, and never on kernel-p inputs.
pub fn default_rounds(n: usize) -> usize {
    n + 3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fflinalg::counting::{enumerate_matrices, DEFAULT_ENUM_CAP};
    use crate::fflinalg::FpMatrix;

    fn fs(p: u64, n: usize) -> FieldSpec {
        FieldSpec::new(p, n).unwrap()
    }

    fn identity_inst(field: FieldSpec) -> LinearInstance {
        LinearInstance::new(FpMatrix::identity(field))
    }

    #[test]
    fn oracle_zero_map_is_identity_on_state() {
        let f = fs(2, 2);
        let mut s = StateVector::zero_state(f, 1, DEFAULT_SIM_CAP).unwrap();
        s.qft_query();
        let before = s.amps.clone();
        s.apply_oracle(&LinearInstance::new(FpMatrix::zero(f))).unwrap();
        assert_eq!(s.amps, before);
    }

    #[test]
    fn oracle_maps_basis_states() {
        let f = fs(3, 2);
        let inst = LinearInstance::new(
            FpMatrix::from_rows(f, vec![vec![1, 2], vec![0, 1]]).unwrap(),
        );
        let pn = 9usize;
        for x in 0..pn {
            let mut s = StateVector::zero_state(f, 1, DEFAULT_SIM_CAP).unwrap();
            s.set_amplitude(0, 0, 0, Complex64::new(0.0, 0.0));
            s.set_amplitude(x, 0, 0, Complex64::new(1.0, 0.0));
            s.apply_oracle(&inst).unwrap();
            let fx = f.vector_to_index(&inst.apply(&f.index_to_vector(x as u64))) as usize;
            assert_eq!(s.amplitude(x, fx, 0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn oracle_entangles_uniform_input() {
        // p=2, n=1, f = identity: (|0>+|1>)|0>/sqrt2 -> (|00>+|11>)/sqrt2
        let f = fs(2, 1);
        let mut s = StateVector::zero_state(f, 1, DEFAULT_SIM_CAP).unwrap();
        s.qft_query();
        s.apply_oracle(&identity_inst(f)).unwrap();
        let r = 1.0 / 2.0f64.sqrt();
        assert!((s.amplitude(0, 0, 0).re - r).abs() < 1e-12);
        assert!((s.amplitude(1, 1, 0).re - r).abs() < 1e-12);
        assert!(s.amplitude(0, 1, 0).norm() < 1e-12);
        assert!(s.amplitude(1, 0, 0).norm() < 1e-12);
    }

    #[test]
    fn oracle_self_inverse_mod_p() {
        // applying with f then with -f restores the state bit-exactly; at p=2
        // the oracle is its own inverse
        let f = fs(2, 2);
        let inst = LinearInstance::new(
            FpMatrix::from_rows(f, vec![vec![1, 1], vec![0, 1]]).unwrap(),
        );
        let mut s = StateVector::zero_state(f, 2, DEFAULT_SIM_CAP).unwrap();
        s.qft_query();
        let before = s.amps.clone();
        s.apply_oracle(&inst).unwrap();
        s.apply_oracle(&inst).unwrap();
        assert_eq!(s.amps, before);

        let f3 = fs(3, 1);
        let inst3 = LinearInstance::new(FpMatrix::from_rows(f3, vec![vec![2]]).unwrap());
        let neg = LinearInstance::new(inst3.matrix().negate());
        let mut s3 = StateVector::zero_state(f3, 1, DEFAULT_SIM_CAP).unwrap();
        s3.qft_query();
        let before = s3.amps.clone();
        s3.apply_oracle(&inst3).unwrap();
        s3.apply_oracle(&neg).unwrap();
        assert_eq!(s3.amps, before);
    }

    #[test]
    fn qft_p2_n1_is_hadamard() {
        let f = fs(2, 1);
        let mut s = StateVector::zero_state(f, 1, DEFAULT_SIM_CAP).unwrap();
        s.qft_query();
        let r = 1.0 / 2.0f64.sqrt();
        assert!((s.amplitude(0, 0, 0).re - r).abs() < 1e-12);
        assert!((s.amplitude(1, 0, 0).re - r).abs() < 1e-12);
    }

    #[test]
    fn qft_p3_phases() {
        // |1> -> (|0> + w|1> + w^2|2>)/sqrt3
        let f = fs(3, 1);
        let mut s = StateVector::zero_state(f, 1, DEFAULT_SIM_CAP).unwrap();
        s.set_amplitude(0, 0, 0, Complex64::new(0.0, 0.0));
        s.set_amplitude(1, 0, 0, Complex64::new(1.0, 0.0));
        s.qft_query();
        let r = 1.0 / 3.0f64.sqrt();
        for y in 0..3usize {
            let theta = 2.0 * std::f64::consts::PI * (y as f64) / 3.0;
            let expected = Complex64::new(theta.cos(), theta.sin()) * r;
            assert!((s.amplitude(y, 0, 0) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn qft_p2_n2_is_hadamard_transform() {
        let f = fs(2, 2);
        for x in 0..4usize {
            let mut s = StateVector::zero_state(f, 1, DEFAULT_SIM_CAP).unwrap();
            s.set_amplitude(0, 0, 0, Complex64::new(0.0, 0.0));
            s.set_amplitude(x, 0, 0, Complex64::new(1.0, 0.0));
            s.qft_query();
            for y in 0..4usize {
                let dot = f.dot(&f.index_to_vector(x as u64), &f.index_to_vector(y as u64));
                let expected = if dot == 0 { 0.5 } else { -0.5 };
                assert!((s.amplitude(y, 0, 0).re - expected).abs() < 1e-12);
                assert!(s.amplitude(y, 0, 0).im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qft_iqft_identity() {
        let f = fs(5, 1);
        let mut s = StateVector::zero_state(f, 1, DEFAULT_SIM_CAP).unwrap();
        s.set_amplitude(0, 0, 0, Complex64::new(0.6, 0.0));
        s.set_amplitude(3, 0, 0, Complex64::new(0.0, 0.8));
        let before = s.amps.clone();
        s.qft_query();
        s.iqft_query();
        for (a, b) in s.amps.iter().zip(&before) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_distribution_identity_uniform() {
        let f = fs(2, 2);
        let dist = simon_round_distribution(&identity_inst(f)).unwrap();
        for &pr in &dist {
            assert!((pr - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn round_distribution_kernel_line() {
        let f = fs(2, 2);
        let m = FpMatrix::from_rows(f, vec![vec![1, 1], vec![0, 0]]).unwrap();
        let dist = simon_round_distribution(&LinearInstance::new(m)).unwrap();
        // H = span{(1,1)}, annihilator = span{(1,1)} = indices {0, 3}
        assert!((dist[0] - 0.5).abs() < 1e-9);
        assert!((dist[3] - 0.5).abs() < 1e-9);
        assert!(dist[1] < 1e-9 && dist[2] < 1e-9);
    }

    #[test]
    fn round_distribution_zero_map_is_point_mass() {
        let f = fs(2, 2);
        let dist = simon_round_distribution(&LinearInstance::new(FpMatrix::zero(f))).unwrap();
        assert!((dist[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn round_distribution_support_is_annihilator() {
        for (p, n) in [(2u64, 2usize), (3, 2)] {
            let f = fs(p, n);
            for m in enumerate_matrices(f, DEFAULT_ENUM_CAP).unwrap() {
                let inst = LinearInstance::new(m);
                let ann = inst.kernel().annihilator();
                let dist = simon_round_distribution(&inst).unwrap();
                let uniform = 1.0 / ann.size() as f64;
                for (i, &pr) in dist.iter().enumerate() {
                    let v = f.index_to_vector(i as u64);
                    if ann.contains(&v) {
                        assert!((pr - uniform).abs() < 1e-9);
                    } else {
                        assert!(pr < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn decide_kernel_p_never_wrong() {
        let f = fs(2, 3);
        let m = FpMatrix::from_rows(
            f,
            vec![vec![1, 0, 1], vec![0, 1, 0], vec![0, 0, 0]],
        )
        .unwrap();
        let inst = LinearInstance::new(m);
        assert_eq!(inst.label(), PromiseLabel::KernelP);
        for seed in 0..50 {
            let (ans, _) = simon_decide(&inst, default_rounds(3), seed).unwrap();
            assert_eq!(ans, PromiseLabel::KernelP);
        }
    }

    #[test]
    fn decide_rejects_unrestricted() {
        let f = fs(2, 2);
        let inst = LinearInstance::new(FpMatrix::zero(f));
        assert!(simon_decide(&inst, 5, 0).is_err());
    }

    #[test]
    fn decide_too_few_rounds_never_one_to_one() {
        let f = fs(2, 3);
        let inst = identity_inst(f);
        for seed in 0..20 {
            let (ans, _) = simon_decide(&inst, 2, seed).unwrap();
            assert_eq!(ans, PromiseLabel::KernelP);
        }
    }

    #[test]
    fn spanning_probability_closed_form_vs_dp() {
        for (p, n, t) in [(2u64, 2usize, 5usize), (2, 4, 7), (3, 2, 5), (2, 3, 3)] {
            assert_eq!(
                spanning_probability(p, n, t),
                spanning_probability_dp(p, n, t)
            );
        }
        // T = n+3 beats 3/4 for small n at p=2
        for n in 1..=6usize {
            let pr = spanning_probability(2, n, n + 3);
            assert!(pr > BigRational::new(BigInt::from(3), BigInt::from(4)));
        }
    }

    #[test]
    fn run_circuit_accept_everything() {
        let f = fs(2, 2);
        let all: Vec<FpVector> = f.vectors().collect();
        let c = Circuit::new(
            f,
            1,
            vec![CircuitOp::QftQuery, CircuitOp::Oracle, CircuitOp::QftQuery],
            all,
        )
        .unwrap();
        for m in enumerate_matrices(f, DEFAULT_ENUM_CAP).unwrap() {
            let p = c.run(&LinearInstance::new(m), DEFAULT_SIM_CAP).unwrap();
            assert!((p - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn run_circuit_empty_accept_and_zero_ops() {
        let f = fs(2, 2);
        let id = identity_inst(f);
        let none = Circuit::new(f, 1, vec![], vec![]).unwrap();
        assert!(none.run(&id, DEFAULT_SIM_CAP).unwrap() < 1e-12);
        let zero_accept = Circuit::new(f, 1, vec![], vec![f.zero_vector()]).unwrap();
        assert!((zero_accept.run(&id, DEFAULT_SIM_CAP).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_unitary_validation() {
        let f = fs(2, 1);
        let mut s = StateVector::zero_state(f, 1, DEFAULT_SIM_CAP).unwrap();
        let not_unitary = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        assert!(s.apply_dense(Register::Query, &not_unitary).is_err());
        let r = 1.0 / 2.0f64.sqrt();
        let hadamard = vec![
            vec![Complex64::new(r, 0.0), Complex64::new(r, 0.0)],
            vec![Complex64::new(r, 0.0), Complex64::new(-r, 0.0)],
        ];
        s.apply_dense(Register::Output, &hadamard).unwrap();
        assert!((s.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simulator_cap_enforced() {
        let f = fs(2, 2);
        assert!(matches!(
            StateVector::zero_state(f, 1, 8),
            Err(Error::SimulatorCapExceeded { .. })
        ));
    }

    #[test]
    fn circuit_json_roundtrip() {
        let f = fs(2, 2);
        let c = Circuit::new(
            f,
            1,
            vec![CircuitOp::QftQuery, CircuitOp::Oracle, CircuitOp::IqftQuery],
            vec![vec![0, 0]],
        )
        .unwrap();
        let j = c.to_json();
        let back = Circuit::from_json(&j).unwrap();
        assert_eq!(back.query_count(), 1);
        let id = identity_inst(f);
        assert!(
            (c.run(&id, DEFAULT_SIM_CAP).unwrap() - back.run(&id, DEFAULT_SIM_CAP).unwrap()).abs()
                < 1e-15
        );
    }
}
