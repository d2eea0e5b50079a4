//! Degree lower-bound certification: given the acceptance thresholds at
//! D = 1 and D = p and the box constraints at every D = p^k, search for the
//! minimal polynomial degree at which the constraint system is satisfiable.
//! Every infeasible degree gets an exact Farkas certificate; the feasible
//! degree gets an exact witness polynomial.

pub mod lp;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fflinalg::FieldSpec;
use crate::polymethod::{interpolate, RationalPoly};

/// Thresholds for the hypothesis: Q(1) >= accept_lo, Q(p) <= reject_hi, and
/// Q(p^k) in [0,1] for k = 0..n.
#[derive(Debug, Clone)]
pub struct Lemma1Instance {
    pub field: FieldSpec,
    pub accept_lo: BigRational,
    pub reject_hi: BigRational,
}

impl Lemma1Instance {
    pub fn new(field: FieldSpec) -> Self {
        Lemma1Instance {
            field,
            accept_lo: BigRational::new(BigInt::from(2), BigInt::from(3)),
            reject_hi: BigRational::new(BigInt::from(1), BigInt::from(3)),
        }
    }

    pub fn with_thresholds(
        field: FieldSpec,
        accept_lo: BigRational,
        reject_hi: BigRational,
    ) -> Result<Self> {
        if reject_hi.is_negative() || reject_hi >= accept_lo || accept_lo > BigRational::one() {
            return Err(Error::Domain(
                "thresholds must satisfy 0 <= reject_hi < accept_lo <= 1".into(),
            ));
        }
        Ok(Lemma1Instance {
            field,
            accept_lo,
            reject_hi,
        })
    }

    fn points(&self) -> Vec<BigRational> {
        let p = BigInt::from(self.field.p());
        (0..=self.field.n())
            .map(|k| BigRational::from(p.pow(k as u32)))
            .collect()
    }

    /// The inequality system A q <= b over the monomial coefficients
    /// q_0..q_d. Row order: accept at D=1, reject at D=p, then upper and
    /// lower box rows per k.
    pub fn constraint_system(&self, degree: usize) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
        let points = self.points();
        let monomials = |x: &BigRational, sign: i64| -> Vec<BigRational> {
            let s = BigRational::from(BigInt::from(sign));
            (0..=degree).map(|i| &s * pow_rat(x, i)).collect()
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        a.push(monomials(&points[0], -1)); // -Q(1) <= -accept_lo
        b.push(-self.accept_lo.clone());
        a.push(monomials(&points[1], 1)); // Q(p) <= reject_hi
        b.push(self.reject_hi.clone());
        for x in &points {
            a.push(monomials(x, 1)); // Q(p^k) <= 1
            b.push(BigRational::one());
            a.push(monomials(x, -1)); // -Q(p^k) <= 0
            b.push(BigRational::zero());
        }
        (a, b)
    }
}

fn pow_rat(x: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// One constraint of the hypothesis, evaluated exactly.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub value: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub constraints: Vec<ConstraintCheck>,
    pub pass: bool,
}

/// Evaluate Q at D = p^0..p^n and report the n+3 hypothesis constraints
/// individually.
pub fn check_hypothesis(q: &RationalPoly, inst: &Lemma1Instance) -> HypothesisReport {
    let points = inst.points();
    let mut constraints = Vec::new();
    let q1 = q.eval(&points[0]);
    constraints.push(ConstraintCheck {
        name: "Q(1) >= accept_lo".into(),
        value: q1.to_string(),
        pass: q1 >= inst.accept_lo,
    });
    let qp = q.eval(&points[1]);
    constraints.push(ConstraintCheck {
        name: format!("Q({}) <= reject_hi", points[1]),
        value: qp.to_string(),
        pass: qp <= inst.reject_hi,
    });
    for (k, x) in points.iter().enumerate() {
        let v = q.eval(x);
        constraints.push(ConstraintCheck {
            name: format!("Q(p^{k}) in [0,1]"),
            value: v.to_string(),
            pass: !v.is_negative() && v <= BigRational::one(),
        });
    }
    let pass = constraints.iter().all(|c| c.pass);
    HypothesisReport { constraints, pass }
}

/// Feasibility status of one candidate degree.
#[derive(Debug, Clone)]
pub enum DegreeStatus {
    Feasible(RationalPoly),
    Infeasible(Vec<BigRational>),
}

#[derive(Debug, Clone)]
pub struct DegreeResult {
    pub degree: usize,
    pub status: DegreeStatus,
}

#[derive(Debug, Clone)]
pub struct FeasibilitySearch {
    pub per_degree: Vec<DegreeResult>,
    pub min_feasible: Option<usize>,
}

/// Search degrees 0..=max_degree in order; stop at the first feasible one.
/// Every witness and certificate is re-verified exactly before being
/// returned.
pub fn min_feasible_degree(inst: &Lemma1Instance, max_degree: usize) -> FeasibilitySearch {
    let mut per_degree = Vec::new();
    let mut min_feasible = None;
    for d in 0..=max_degree {
        let (a, b) = inst.constraint_system(d);
        match lp::solve(&a, &b) {
            lp::Feasibility::Feasible(coeffs) => {
                let witness = RationalPoly::new(coeffs);
                assert!(
                    check_hypothesis(&witness, inst).pass,
                    "simplex returned an invalid witness at degree {d}"
                );
                per_degree.push(DegreeResult {
                    degree: d,
                    status: DegreeStatus::Feasible(witness),
                });
                min_feasible = Some(d);
                break;
            }
            lp::Feasibility::Infeasible(cert) => {
                assert!(
                    lp::verify_certificate(&a, &b, &cert),
                    "simplex returned an invalid certificate at degree {d}"
                );
                per_degree.push(DegreeResult {
                    degree: d,
                    status: DegreeStatus::Infeasible(cert),
                });
            }
        }
    }
    FeasibilitySearch {
        per_degree,
        min_feasible,
    }
}

impl FeasibilitySearch {
    /// Does the search certify deg(Q) >= n/4, i.e. was every degree d with
    /// 4d < n examined and found infeasible?
    pub fn certifies_lemma_bound(&self, n: usize) -> bool {
        (0..).take_while(|d| 4 * d < n).all(|d| {
            self.per_degree
                .iter()
                .any(|r| r.degree == d && matches!(r.status, DegreeStatus::Infeasible(_)))
        })
    }

    pub fn to_json(&self, inst: &Lemma1Instance) -> serde_json::Value {
        let n = inst.field.n();
        let per_degree: Vec<serde_json::Value> = self
            .per_degree
            .iter()
            .map(|r| match &r.status {
                DegreeStatus::Infeasible(cert) => serde_json::json!({
                    "d": r.degree,
                    "status": "infeasible",
                    "certificate": cert.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                }),
                DegreeStatus::Feasible(w) => serde_json::json!({
                    "d": r.degree,
                    "status": "feasible",
                    "witness": w.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                }),
            })
            .collect();
        serde_json::json!({
            "p": inst.field.p(),
            "n": n,
            "per_degree": per_degree,
            "min_feasible": self.min_feasible,
            "lemma_bound": "n/4",
            "pass": self.certifies_lemma_bound(n),
        })
    }
}

/// A degree-n polynomial satisfying the hypothesis outright: the interpolant
/// of (1, 1) and (p^k, 0) for k >= 1.
pub fn interpolation_witness(inst: &Lemma1Instance) -> RationalPoly {
    let points: Vec<(BigRational, BigRational)> = inst
        .points()
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let y = if k == 0 {
                BigRational::one()
            } else {
                BigRational::zero()
            };
            (x.clone(), y)
        })
        .collect();
    interpolate(&points).expect("distinct points")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(p: u64, n: usize) -> Lemma1Instance {
        Lemma1Instance::new(FieldSpec::new(p, n).unwrap())
    }

    fn half() -> RationalPoly {
        RationalPoly::constant(BigRational::new(BigInt::from(1), BigInt::from(2)))
    }

    #[test]
    fn constant_half_fails_only_accept() {
        let rep = check_hypothesis(&half(), &inst(2, 4));
        assert!(!rep.constraints[0].pass); // accept_lo
        assert!(rep.constraints[2..].iter().all(|c| c.pass)); // box
    }

    #[test]
    fn line_through_thresholds() {
        // Q = (D-1)/3 at p=2, n=2: Q(2) = 1/3 passes reject_hi, Q(1) = 0
        // fails accept_lo, Q(4) = 1 passes the box
        let q = RationalPoly::new(vec![
            BigRational::new(BigInt::from(-1), BigInt::from(3)),
            BigRational::new(BigInt::from(1), BigInt::from(3)),
        ]);
        let rep = check_hypothesis(&q, &inst(2, 2));
        assert!(!rep.constraints[0].pass);
        assert!(rep.constraints[1].pass);
        assert!(rep.constraints[2..].iter().all(|c| c.pass));
    }

    #[test]
    fn interpolation_witness_passes() {
        for n in [2usize, 4, 6] {
            let i = inst(2, n);
            let w = interpolation_witness(&i);
            assert_eq!(w.degree(), n);
            assert!(check_hypothesis(&w, &i).pass);
        }
        let i = inst(3, 3);
        assert!(check_hypothesis(&interpolation_witness(&i), &i).pass);
    }

    #[test]
    fn degree_zero_always_infeasible() {
        for (p, n) in [(2u64, 2usize), (3, 3), (5, 2)] {
            let i = inst(p, n);
            let search = min_feasible_degree(&i, 0);
            assert!(matches!(
                search.per_degree[0].status,
                DegreeStatus::Infeasible(_)
            ));
        }
    }

    #[test]
    fn degree_one_infeasible_at_n8() {
        // slope <= -1/3 between D=1 and D=2 forces Q(256) far below 0
        let i = inst(2, 8);
        let (a, b) = i.constraint_system(1);
        match lp::solve(&a, &b) {
            lp::Feasibility::Infeasible(cert) => {
                assert!(lp::verify_certificate(&a, &b, &cert));
            }
            _ => panic!("degree 1 must be infeasible at n = 8"),
        }
    }

    #[test]
    fn search_small_instance() {
        let i = inst(2, 4);
        let search = min_feasible_degree(&i, 4);
        let d = search.min_feasible.expect("degree <= n is feasible");
        assert!(d >= 1, "lower bound from the constant case");
        assert!(d <= 4);
        // monotone: everything below d infeasible, verified certificates
        for r in &search.per_degree[..search.per_degree.len() - 1] {
            assert!(matches!(r.status, DegreeStatus::Infeasible(_)));
        }
    }

    #[test]
    fn feasible_witness_carries_to_next_degree() {
        let i = inst(2, 4);
        let search = min_feasible_degree(&i, 4);
        let d = search.min_feasible.unwrap();
        let DegreeStatus::Feasible(w) = &search.per_degree.last().unwrap().status else {
            panic!()
        };
        // embed with a zero top coefficient: still satisfies the hypothesis,
        // so degree d+1 is feasible too
        assert!(check_hypothesis(w, &i).pass);
        assert!(w.degree() <= d);
        let (a, b) = i.constraint_system(d + 1);
        assert!(matches!(lp::solve(&a, &b), lp::Feasibility::Feasible(_)));
    }

    #[test]
    fn threshold_validation() {
        let f = FieldSpec::new(2, 2).unwrap();
        assert!(Lemma1Instance::with_thresholds(
            f,
            BigRational::new(BigInt::from(1), BigInt::from(3)),
            BigRational::new(BigInt::from(2), BigInt::from(3)),
        )
        .is_err());
    }
}
