//! Property suites runnable from the CLI: each check re-derives an invariant
//! from first principles (enumeration, independent formulas, Monte Carlo
//! statistics) and reports PASS/FAIL.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::fflinalg::counting::{
    alpha, beta, count_fd, count_fd_exhaustive, enumerate_matrices, enumerate_subspaces,
};
use crate::fflinalg::{FieldSpec, Subspace};
use crate::instances::{linear_consistency, LinearInstance};
use crate::polymethod::{enumerate_consistent_partial_fns, ClosedFormQs, Ensemble, QTableExact};
use crate::qsim::simon_round_distribution;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn finish(suite: &str, checks: Vec<Check>) -> SuiteReport {
    let pass = checks.iter().all(|c| c.pass);
    SuiteReport {
        suite: suite.to_string(),
        checks,
        pass,
    }
}

/// Counting identities: formula counts vs exhaustive enumeration, the
/// partition of all matrices by kernel dimension, and Gaussian-binomial
/// duality.
pub fn counting_suite(field: FieldSpec, cap: u64) -> Result<SuiteReport> {
    let p = field.p();
    let n = field.n();
    let mut checks = Vec::new();
    let mut total = BigUint::zero();
    for h in 0..=n {
        let subs = enumerate_subspaces(field, h, cap)?;
        let b = beta(p, n, h)?;
        checks.push(Check {
            name: format!("beta({n},{h}) matches RREF enumeration"),
            pass: BigUint::from(subs.len()) == b,
            detail: format!("formula {b}, enumerated {}", subs.len()),
        });
        let fd = count_fd(p, n, h)?;
        let fd_ex = count_fd_exhaustive(field, h, cap)?;
        checks.push(Check {
            name: format!("count_FD({h}) matches matrix enumeration"),
            pass: fd == BigUint::from(fd_ex),
            detail: format!("formula {fd}, enumerated {fd_ex}"),
        });
        checks.push(Check {
            name: format!("beta({n},{h}) duality"),
            pass: beta(p, n, h)? == beta(p, n, n - h)?,
            detail: String::new(),
        });
        total += fd;
    }
    let expected = field.matrix_count_big();
    checks.push(Check {
        name: "sum_h count_FD(h) = p^(n^2)".into(),
        pass: total == expected,
        detail: format!("{total} vs {expected}"),
    });
    // alpha consistency: alpha(n,h) = beta(n,h) * alpha(h,h)
    for h in 0..=n {
        let lhs = alpha(p, n, h)?;
        let rhs = beta(p, n, h)? * alpha(p, h, h)?;
        checks.push(Check {
            name: format!("alpha({n},{h}) = beta * alpha({h},{h})"),
            pass: lhs == rhs,
            detail: String::new(),
        });
    }
    Ok(finish("counting", checks))
}

/// Lemma 2 machinery: closed form = brute force for every linearly consistent
/// s with |dom| <= max_dom, the part-3 conditional is h-independent, and the
/// interpolated Q_s degree never exceeds dim(span(dom s)).
pub fn lemma2_suite(field: FieldSpec, max_dom: usize, cap: u64) -> Result<SuiteReport> {
    let ensemble = Ensemble::new(field, cap)?;
    let fns = enumerate_consistent_partial_fns(field, max_dom);
    let mut equiv_fail = 0usize;
    let mut part3_fail = 0usize;
    let mut degree_fail = 0usize;
    let mut range_fail = 0usize;
    for s in &fns {
        let brute = ensemble.q_s_bruteforce_all(s);
        let cf = ClosedFormQs::new(&ensemble, s)?;
        if cf.eval_all() != brute {
            equiv_fail += 1;
        }
        if !ensemble.verify_part3(s)?.pass {
            part3_fail += 1;
        }
        if brute
            .iter()
            .any(|v| v.is_negative() || *v > BigRational::from_integer(1.into()))
        {
            range_fail += 1;
        }
        let table = QTableExact {
            field,
            values: brute,
        };
        let poly = table.interpolant()?;
        if !poly.is_zero() && poly.degree() > cf.span_dim() {
            degree_fail += 1;
        }
    }
    let total = fns.len();
    let checks = vec![
        Check {
            name: format!("closed form = brute force over {total} consistent s"),
            pass: equiv_fail == 0,
            detail: format!("{equiv_fail} mismatches"),
        },
        Check {
            name: "part (3) conditional independent of D".into(),
            pass: part3_fail == 0,
            detail: format!("{part3_fail} failures"),
        },
        Check {
            name: "deg Q_s <= dim span(dom s)".into(),
            pass: degree_fail == 0,
            detail: format!("{degree_fail} violations"),
        },
        Check {
            name: "all Q_s values in [0,1]".into(),
            pass: range_fail == 0,
            detail: format!("{range_fail} out of range"),
        },
    ];
    Ok(finish("lemma2", checks))
}

/// Simulator laws: for every linear f, the Fourier-round support is exactly
/// the annihilator of ker(f) and uniform on it, and seeded round samples
/// match the exact distribution within 4 sigma.
pub fn qsim_suite(field: FieldSpec, cap: u64, seed: u64) -> Result<SuiteReport> {
    let mut support_fail = 0usize;
    let mut uniform_fail = 0usize;
    let mut total = 0usize;
    for m in enumerate_matrices(field, cap)? {
        let inst = LinearInstance::new(m);
        let ann = inst.kernel().annihilator();
        let dist = simon_round_distribution(&inst)?;
        let uniform = 1.0 / ann.size() as f64;
        for (i, &pr) in dist.iter().enumerate() {
            let v = field.index_to_vector(i as u64);
            if ann.contains(&v) {
                if (pr - uniform).abs() > 1e-9 {
                    uniform_fail += 1;
                }
            } else if pr > 1e-9 {
                support_fail += 1;
            }
        }
        total += 1;
    }
    let mut checks = vec![
        Check {
            name: format!("Fourier support = annihilator over {total} maps"),
            pass: support_fail == 0,
            detail: format!("{support_fail} stray amplitudes"),
        },
        Check {
            name: "uniform on the annihilator within 1e-9".into(),
            pass: uniform_fail == 0,
            detail: format!("{uniform_fail} deviations"),
        },
    ];
    // Monte Carlo consistency on one representative instance
    let inst = representative_kernel_p(field);
    let dist = simon_round_distribution(&inst)?;
    let draws = 20_000usize;
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; dist.len()];
    for _ in 0..draws {
        let mut u: f64 = rng.gen();
        let mut chosen = dist.len() - 1;
        for (i, &pr) in dist.iter().enumerate() {
            if u < pr {
                chosen = i;
                break;
            }
            u -= pr;
        }
        counts[chosen] += 1;
    }
    let mut mc_fail = 0usize;
    for (i, &pr) in dist.iter().enumerate() {
        let sigma = (draws as f64 * pr * (1.0 - pr)).sqrt();
        let dev = (counts[i] as f64 - draws as f64 * pr).abs();
        if dev > 4.0 * sigma.max(1.0) {
            mc_fail += 1;
        }
    }
    checks.push(Check {
        name: format!("{draws} seeded draws within 4 sigma of exact distribution"),
        pass: mc_fail == 0,
        detail: format!("{mc_fail} cells out of bounds"),
    });
    Ok(finish("qsim", checks))
}

fn representative_kernel_p(field: FieldSpec) -> LinearInstance {
    // diagonal map with one zero eigenvalue: kernel = span{e_n}
    let n = field.n();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut r = field.zero_vector();
        if i + 1 < n {
            r[i] = 1;
        }
        rows.push(r);
    }
    LinearInstance::new(crate::fflinalg::FpMatrix::from_rows(field, rows).unwrap())
}

/// Consistency of the linear-consistency analyzer against subspace facts:
/// restriction kernels equal ker(f) intersected with the span.
pub fn instances_suite(field: FieldSpec, cap: u64) -> Result<SuiteReport> {
    let mut fail = 0usize;
    let mut total = 0usize;
    let queries: Vec<_> = field.vectors().take(4).collect();
    for m in enumerate_matrices(field, cap)? {
        let inst = LinearInstance::new(m);
        let s = crate::instances::restrict(&inst, &queries);
        match linear_consistency(&s) {
            crate::instances::Consistency::Consistent { span, kernel, .. } => {
                let expected = inst.kernel().intersect(&span).unwrap();
                if kernel != expected {
                    fail += 1;
                }
                if !Subspace::full(field).contains_subspace(&span).unwrap() {
                    fail += 1;
                }
            }
            crate::instances::Consistency::Inconsistent => fail += 1,
        }
        total += 1;
    }
    let checks = vec![Check {
        name: format!("restriction analysis consistent over {total} maps"),
        pass: fail == 0,
        detail: format!("{fail} failures"),
    }];
    Ok(finish("instances", checks))
}

pub fn run_suites(
    names: &[&str],
    field: FieldSpec,
    cap: u64,
    seed: u64,
) -> Result<Vec<SuiteReport>> {
    let mut out = Vec::new();
    for name in names {
        let report = match *name {
            "counting" => counting_suite(field, cap)?,
            "lemma2" => lemma2_suite(field, 2, cap)?,
            "qsim" => qsim_suite(field, cap, seed)?,
            "instances" => instances_suite(field, cap)?,
            other => {
                return Err(crate::error::Error::Domain(format!(
                    "unknown suite {other:?}"
                )))
            }
        };
        out.push(report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fflinalg::counting::DEFAULT_ENUM_CAP;

    #[test]
    fn suites_pass_on_small_fields() {
        let f = FieldSpec::new(2, 2).unwrap();
        assert!(counting_suite(f, DEFAULT_ENUM_CAP).unwrap().pass);
        assert!(lemma2_suite(f, 2, DEFAULT_ENUM_CAP).unwrap().pass);
        assert!(qsim_suite(f, DEFAULT_ENUM_CAP, 7).unwrap().pass);
        assert!(instances_suite(f, DEFAULT_ENUM_CAP).unwrap().pass);
    }

    #[test]
    fn suites_pass_p3() {
        let f = FieldSpec::new(3, 2).unwrap();
        assert!(counting_suite(f, DEFAULT_ENUM_CAP).unwrap().pass);
        assert!(qsim_suite(f, DEFAULT_ENUM_CAP, 7).unwrap().pass);
    }
}
