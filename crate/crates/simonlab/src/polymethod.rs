//! Averaged-acceptance machinery: the probability Q_s(D) that a uniform
//! linear map with kernel size D extends a partial function s, computed both
//! by exhaustive counting and by the closed-form product of its three
//! factors; exact Lagrange interpolation; and the averaged acceptance Q(D)
//! of a circuit with a minimal-degree fit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fflinalg::counting::enumerate_matrices;
use crate::fflinalg::{FieldSpec, FpMatrix, Subspace};
use crate::instances::{linear_consistency, Consistency, LinearInstance, PartialFn};
use crate::qsim::Circuit;

fn pow_big(p: u64, e: usize) -> BigInt {
    BigInt::from(p).pow(e as u32)
}

/// Univariate polynomial with exact rational coefficients, lowest degree
/// first, trailing zeros stripped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        RationalPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree with the convention deg(0) = 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &RationalPoly) -> RationalPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        RationalPoly::new(out)
    }

    pub fn scale(&self, factor: &BigRational) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn mul(&self, other: &RationalPoly) -> RationalPoly {
        if self.is_zero() || other.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

/// Exact Lagrange interpolation through distinct points.
pub fn interpolate(points: &[(BigRational, BigRational)]) -> Result<RationalPoly> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].0 == points[j].0 {
                return Err(Error::Domain(format!(
                    "duplicate interpolation point {}",
                    points[i].0
                )));
            }
        }
    }
    let mut acc = RationalPoly::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        let mut basis = RationalPoly::constant(BigRational::one());
        let mut denom = BigRational::one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&RationalPoly::new(vec![-xj.clone(), BigRational::one()]));
            denom *= xi - xj;
        }
        acc = acc.add(&basis.scale(&(yi / denom)));
    }
    Ok(acc)
}

/// Part (1): the probability that a uniform h-dimensional subspace of F_p^n
/// contains a fixed z-dimensional Z, as the exact product
/// prod_{i=0}^{z-1} (p^h - p^i) / (p^n - p^i).
pub fn prob_kernel_contains(p: u64, n: usize, z: usize, h: usize) -> BigRational {
    assert!(z <= n && h <= n);
    if h < z {
        return BigRational::zero();
    }
    let mut acc = BigRational::one();
    for i in 0..z {
        acc *= BigRational::new(pow_big(p, h) - pow_big(p, i), pow_big(p, n) - pow_big(p, i));
    }
    acc
}

/// Part (2): the probability that H meets a fixed (k-z)-dimensional
/// complement Y only in 0, conditioned on Z <= H:
/// prod_{i=0}^{k-z-1} (p^{n-z} - p^{h-z+i}) / alpha(n-z, k-z).
/// Returns 0 when the avoidance event is impossible.
pub fn prob_avoids(p: u64, n: usize, k: usize, z: usize, h: usize) -> BigRational {
    assert!(z <= k && k <= n && z <= h && h <= n);
    if k == z {
        return BigRational::one();
    }
    if (h - z) + (k - z) > n - z {
        return BigRational::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k - z {
        num *= pow_big(p, n - z) - pow_big(p, h - z + i);
        den *= pow_big(p, n - z) - pow_big(p, i);
    }
    BigRational::new(num, den)
}

/// An exhaustive enumeration of all linear maps on F_p^n with their kernel
/// dimensions, grouped once so that many partial functions can be checked
/// against it cheaply.
pub struct Ensemble {
    field: FieldSpec,
    items: Vec<(FpMatrix, usize)>,
    counts: Vec<u64>, // |F_D| per kernel dimension
}

impl Ensemble {
    pub fn new(field: FieldSpec, cap: u64) -> Result<Self> {
        let n = field.n();
        let mut items = Vec::new();
        let mut counts = vec![0u64; n + 1];
        for m in enumerate_matrices(field, cap)? {
            let h = n - m.rank();
            counts[h] += 1;
            items.push((m, h));
        }
        Ok(Ensemble {
            field,
            items,
            counts,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn count_fd(&self, h: usize) -> u64 {
        self.counts[h]
    }

    /// Q_s(p^h) for every h in 0..=n by one pass over the ensemble.
    pub fn q_s_bruteforce_all(&self, s: &PartialFn) -> Vec<BigRational> {
        let n = self.field.n();
        let mut extending = vec![0u64; n + 1];
        for (m, h) in &self.items {
            if s.extended_by(m) {
                extending[*h] += 1;
            }
        }
        (0..=n)
            .map(|h| BigRational::new(BigInt::from(extending[h]), BigInt::from(self.counts[h])))
            .collect()
    }

    pub fn q_s_bruteforce(&self, s: &PartialFn, h: usize) -> BigRational {
        self.q_s_bruteforce_all(s)[h].clone()
    }

    /// Part (3) check: the conditional extension probability given
    /// {Z <= H and Y cap H = {0}} computed exactly per h; PASS iff it is the
    /// same for every h with a nonempty conditioning event.
    pub fn verify_part3(&self, s: &PartialFn) -> Result<Part3Report> {
        let Consistency::Consistent { span, kernel, .. } = linear_consistency(s) else {
            return Err(Error::Precondition(
                "verify_part3 requires a linearly consistent partial function".into(),
            ));
        };
        let y = kernel.complement_in(&span)?;
        let n = self.field.n();
        let mut rows = Vec::new();
        let mut common: Option<BigRational> = None;
        let mut pass = true;
        for h in 0..=n {
            let (event, ext) = self.condition_counts(s, &kernel, &y, h);
            let ratio = if event > 0 {
                Some(BigRational::new(BigInt::from(ext), BigInt::from(event)))
            } else {
                None
            };
            if let Some(r) = &ratio {
                match &common {
                    None => common = Some(r.clone()),
                    Some(c) if c != r => pass = false,
                    _ => {}
                }
            }
            rows.push(Part3Row {
                h,
                event_count: event,
                extension_count: ext,
                ratio: ratio.map(|r| r.to_string()),
            });
        }
        Ok(Part3Report {
            rows,
            pass,
            common_value: common.map(|c| c.to_string()),
        })
    }

    fn condition_counts(
        &self,
        s: &PartialFn,
        z: &Subspace,
        y: &Subspace,
        h: usize,
    ) -> (u64, u64) {
        let mut event = 0u64;
        let mut ext = 0u64;
        for (m, hd) in &self.items {
            if *hd != h {
                continue;
            }
            let kernel = m.kernel();
            if !kernel.contains_subspace(z).unwrap() {
                continue;
            }
            if !kernel.intersect(y).unwrap().is_zero() {
                continue;
            }
            event += 1;
            if s.extended_by(m) {
                ext += 1;
            }
        }
        (event, ext)
    }

    /// The h-independent part (3) constant, obtained by counting at the
    /// smallest h whose conditioning event is nonempty.
    pub fn part3_constant(
        &self,
        s: &PartialFn,
        z: &Subspace,
        y: &Subspace,
    ) -> Result<BigRational> {
        for h in 0..=self.field.n() {
            let (event, ext) = self.condition_counts(s, z, y, h);
            if event > 0 {
                return Ok(BigRational::new(BigInt::from(ext), BigInt::from(event)));
            }
        }
        Err(Error::Domain(
            "conditioning event empty for every kernel dimension".into(),
        ))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Part3Row {
    pub h: usize,
    pub event_count: u64,
    pub extension_count: u64,
    pub ratio: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Part3Report {
    pub rows: Vec<Part3Row>,
    pub pass: bool,
    pub common_value: Option<String>,
}

/// The closed-form route to Q_s(D): part (1) * part (2) * the part (3)
/// constant. The constant is the one quantity with no closed form; it is
/// obtained by counting once and reused for every h.
pub struct ClosedFormQs {
    field: FieldSpec,
    consistent: bool,
    span_dim: usize,
    kernel_dim: usize,
    part3: BigRational,
}

impl ClosedFormQs {
    pub fn new(ensemble: &Ensemble, s: &PartialFn) -> Result<Self> {
        let field = ensemble.field();
        if s.field() != field {
            return Err(Error::DimensionMismatch(
                "partial function field does not match ensemble".into(),
            ));
        }
        match linear_consistency(s) {
            Consistency::Inconsistent => Ok(ClosedFormQs {
                field,
                consistent: false,
                span_dim: 0,
                kernel_dim: 0,
                part3: BigRational::zero(),
            }),
            Consistency::Consistent { span, kernel, .. } => {
                let y = kernel.complement_in(&span)?;
                let part3 = ensemble.part3_constant(s, &kernel, &y)?;
                Ok(ClosedFormQs {
                    field,
                    consistent: true,
                    span_dim: span.dim(),
                    kernel_dim: kernel.dim(),
                    part3,
                })
            }
        }
    }

    pub fn span_dim(&self) -> usize {
        self.span_dim
    }

    pub fn eval(&self, h: usize) -> BigRational {
        if !self.consistent {
            return BigRational::zero();
        }
        let p = self.field.p();
        let n = self.field.n();
        let part1 = prob_kernel_contains(p, n, self.kernel_dim, h);
        if part1.is_zero() {
            return BigRational::zero();
        }
        let part2 = prob_avoids(p, n, self.span_dim, self.kernel_dim, h);
        part1 * part2 * &self.part3
    }

    pub fn eval_all(&self) -> Vec<BigRational> {
        (0..=self.field.n()).map(|h| self.eval(h)).collect()
    }
}

/// An exact Q_s table over D = p^k, k = 0..n.
#[derive(Debug, Clone)]
pub struct QTableExact {
    pub field: FieldSpec,
    pub values: Vec<BigRational>, // index k
}

impl QTableExact {
    pub fn interpolant(&self) -> Result<RationalPoly> {
        let p = self.field.p();
        let points: Vec<(BigRational, BigRational)> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| (BigRational::from(pow_big(p, k)), v.clone()))
            .collect();
        interpolate(&points)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let p = self.field.p();
        let points: Vec<serde_json::Value> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                serde_json::json!({
                    "k": k,
                    "D": pow_big(p, k).to_string(),
                    "num": v.numer().to_string(),
                    "den": v.denom().to_string(),
                })
            })
            .collect();
        serde_json::json!({"p": p, "n": self.field.n(), "points": points})
    }
}

/// Result of fitting the minimal degree to a floating Q(D) table.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeFit {
    pub degree: usize,
    pub bound: usize,
    pub pass: bool,
    /// max |residual| of the best least-squares fit, per candidate degree
    pub residuals: Vec<f64>,
}

/// Averaged acceptance probability of a circuit over F_D for every D = p^k:
/// full enumeration of F_D, compensated summation, and a minimal-degree fit
/// with tolerance 1e-6 against the 2T bound.
pub fn q_of_d(circuit: &Circuit, enum_cap: u64, sim_cap: u64) -> Result<(Vec<f64>, DegreeFit)> {
    let field = circuit.field();
    let n = field.n();
    let ensemble = Ensemble::new(field, enum_cap)?;
    let probs: Vec<(usize, f64)> = ensemble
        .items
        .par_iter()
        .map(|(m, h)| {
            circuit
                .run(&LinearInstance::new(m.clone()), sim_cap)
                .map(|p| (*h, p))
        })
        .collect::<Result<_>>()?;
    let mut sums = vec![KahanSum::default(); n + 1];
    for (h, p) in probs {
        sums[h].add(p);
    }
    let values: Vec<f64> = (0..=n)
        .map(|h| sums[h].total() / ensemble.counts[h] as f64)
        .collect();
    let points: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(k, &v)| ((field.p() as f64).powi(k as i32), v))
        .collect();
    let fit = fit_minimal_degree(&points, 2 * circuit.query_count(), 1e-6);
    Ok((values, fit))
}

#[derive(Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum
    }
}

/// Minimal degree d whose least-squares fit has max residual below `tol`,
/// with the full residual ladder reported.
pub fn fit_minimal_degree(points: &[(f64, f64)], bound: usize, tol: f64) -> DegreeFit {
    let mut residuals = Vec::new();
    let mut degree = points.len().saturating_sub(1);
    let mut found = false;
    for d in 0..points.len() {
        let r = max_residual_ls(points, d);
        residuals.push(r);
        if !found && r < tol {
            degree = d;
            found = true;
        }
    }
    DegreeFit {
        degree,
        bound,
        pass: degree <= bound && found,
        residuals,
    }
}

/// Max |residual| of the degree-d least-squares polynomial fit.
fn max_residual_ls(points: &[(f64, f64)], d: usize) -> f64 {
    let m = d + 1;
    // normal equations (V^T V) c = V^T y
    let mut a = vec![vec![0.0f64; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = points.iter().map(|(x, _)| x.powi((i + j) as i32)).sum();
        }
        a[i][m] = points.iter().map(|(x, y)| y * x.powi(i as i32)).sum();
    }
    // Gaussian elimination with partial pivoting
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        if a[col][col].abs() < 1e-300 {
            continue;
        }
        for r in 0..m {
            if r != col {
                let factor = a[r][col] / a[col][col];
                for j in col..=m {
                    a[r][j] -= factor * a[col][j];
                }
            }
        }
    }
    let coeffs: Vec<f64> = (0..m)
        .map(|i| {
            if a[i][i].abs() < 1e-300 {
                0.0
            } else {
                a[i][m] / a[i][i]
            }
        })
        .collect();
    points
        .iter()
        .map(|(x, y)| {
            let fit: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * x.powi(i as i32))
                .sum();
            (fit - y).abs()
        })
        .fold(0.0, f64::max)
}

/// All partial functions with domain size <= max_dom (test and verification
/// helper; exponential, only for small fields).
pub fn enumerate_partial_fns(field: FieldSpec, max_dom: usize) -> Vec<PartialFn> {
    let pn = field.point_count().expect("p^n overflow") as usize;
    let points: Vec<Vec<u64>> = field.vectors().collect();
    let mut out = Vec::new();
    let mut dom: Vec<usize> = Vec::new();
    fn rec(
        field: FieldSpec,
        points: &[Vec<u64>],
        pn: usize,
        max_dom: usize,
        start: usize,
        dom: &mut Vec<usize>,
        out: &mut Vec<PartialFn>,
    ) {
        // emit all image assignments for the current domain
        let d = dom.len();
        let combos = (pn as u64).pow(d as u32);
        for mut idx in 0..combos {
            let mut pairs = Vec::with_capacity(d);
            for &x in dom.iter() {
                pairs.push((points[x].clone(), points[(idx % pn as u64) as usize].clone()));
                idx /= pn as u64;
            }
            out.push(PartialFn::new(field, pairs).unwrap());
        }
        if d == max_dom {
            return;
        }
        for x in start..pn {
            dom.push(x);
            rec(field, points, pn, max_dom, x + 1, dom, out);
            dom.pop();
        }
    }
    rec(field, &points, pn, max_dom, 0, &mut dom, &mut out);
    out
}

/// The consistent subset of `enumerate_partial_fns`.
pub fn enumerate_consistent_partial_fns(field: FieldSpec, max_dom: usize) -> Vec<PartialFn> {
    enumerate_partial_fns(field, max_dom)
        .into_iter()
        .filter(|s| linear_consistency(s).is_consistent())
        .collect()
}

/// Sanity helper: sum of Q_s over all images y for a singleton domain {x}
/// must be 1 for every D (the extension events partition F_D).
pub fn singleton_partition_sums(ensemble: &Ensemble, x: &[u64]) -> Vec<BigRational> {
    let field = ensemble.field();
    let n = field.n();
    let mut sums = vec![BigRational::zero(); n + 1];
    for y in field.vectors() {
        let s = PartialFn::new(field, vec![(x.to_vec(), y)]).unwrap();
        for (h, v) in ensemble.q_s_bruteforce_all(&s).into_iter().enumerate() {
            sums[h] += v;
        }
    }
    sums
}
