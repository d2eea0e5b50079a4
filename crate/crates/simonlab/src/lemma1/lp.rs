//! Exact rational feasibility for systems of linear inequalities a . x <= b
//! with free variables, via a phase-1 simplex (Bland's rule, so deterministic
//! and terminating). Infeasible systems come with a Farkas certificate:
//! multipliers lambda >= 0 with lambda^T A = 0 and lambda^T b < 0.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Outcome of a feasibility solve for {x : A x <= b}.
#[derive(Debug, Clone)]
pub enum Feasibility {
    /// A point satisfying every inequality exactly.
    Feasible(Vec<BigRational>),
    /// Farkas multipliers, one per inequality.
    Infeasible(Vec<BigRational>),
}

/// Decide feasibility of A x <= b over the rationals, x free.
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Feasibility {
    let num_rows = a.len();
    assert_eq!(b.len(), num_rows);
    let num_vars = a.first().map_or(0, |r| r.len());
    if num_rows == 0 {
        return Feasibility::Feasible(vec![BigRational::zero(); num_vars]);
    }

    // columns: u (num_vars), w (num_vars), slacks (num_rows), artificials
    let slack_base = 2 * num_vars;
    let art_base = slack_base + num_rows;
    let negated: Vec<bool> = b.iter().map(|bi| bi.is_negative()).collect();
    let art_cols: Vec<Option<usize>> = {
        let mut next = art_base;
        negated
            .iter()
            .map(|&neg| {
                if neg {
                    let c = next;
                    next += 1;
                    Some(c)
                } else {
                    None
                }
            })
            .collect()
    };
    let num_cols = art_base + art_cols.iter().flatten().count();

    // tableau rows: [coefficients | rhs]
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(num_rows);
    let mut basis: Vec<usize> = Vec::with_capacity(num_rows);
    for i in 0..num_rows {
        let sign = if negated[i] {
            -BigRational::one()
        } else {
            BigRational::one()
        };
        let mut row = vec![BigRational::zero(); num_cols + 1];
        for j in 0..num_vars {
            row[j] = &sign * &a[i][j];
            row[num_vars + j] = -&row[j];
        }
        row[slack_base + i] = sign.clone();
        row[num_cols] = &sign * &b[i];
        if let Some(ac) = art_cols[i] {
            row[ac] = BigRational::one();
            basis.push(ac);
        } else {
            basis.push(slack_base + i);
        }
        t.push(row);
    }

    // phase-1 cost: 1 on artificials; reduced-cost row with basic columns
    // eliminated
    let mut cost = vec![BigRational::zero(); num_cols + 1];
    for ac in art_cols.iter().flatten() {
        cost[*ac] = BigRational::one();
    }
    for (i, &bcol) in basis.iter().enumerate() {
        if !cost[bcol].is_zero() {
            let factor = cost[bcol].clone();
            for j in 0..=num_cols {
                cost[j] = &cost[j] - &factor * &t[i][j];
            }
        }
    }

    loop {
        // Bland: entering column = lowest index with negative reduced cost
        let Some(enter) = (0..num_cols).find(|&j| cost[j].is_negative()) else {
            break;
        };
        // ratio test; Bland tie-break on lowest basis column index
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for i in 0..num_rows {
            if t[i][enter].is_positive() {
                let ratio = &t[i][num_cols] / &t[i][enter];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let leave = leave.expect("phase-1 objective is bounded below");
        // pivot on (leave, enter)
        let pivot = t[leave][enter].clone();
        for j in 0..=num_cols {
            t[leave][j] = &t[leave][j] / &pivot;
        }
        for i in 0..num_rows {
            if i != leave && !t[i][enter].is_zero() {
                let factor = t[i][enter].clone();
                for j in 0..=num_cols {
                    t[i][j] = &t[i][j] - &factor * &t[leave][j];
                }
            }
        }
        if !cost[enter].is_zero() {
            let factor = cost[enter].clone();
            for j in 0..=num_cols {
                cost[j] = &cost[j] - &factor * &t[leave][j];
            }
        }
        basis[leave] = enter;
    }

    // objective value = -cost[rhs]
    let objective = -cost[num_cols].clone();
    if objective.is_positive() {
        // Farkas multipliers are the final reduced costs of the slack columns
        let cert: Vec<BigRational> = (0..num_rows).map(|i| cost[slack_base + i].clone()).collect();
        debug_assert!(cert.iter().all(|c| !c.is_negative()));
        Feasibility::Infeasible(cert)
    } else {
        let mut x = vec![BigRational::zero(); num_vars];
        for (i, &bcol) in basis.iter().enumerate() {
            if bcol < num_vars {
                x[bcol] += &t[i][num_cols];
            } else if bcol < 2 * num_vars {
                x[bcol - num_vars] -= &t[i][num_cols];
            }
        }
        Feasibility::Feasible(x)
    }
}

/// Exact recombination check of a Farkas certificate for A x <= b.
pub fn verify_certificate(
    a: &[Vec<BigRational>],
    b: &[BigRational],
    cert: &[BigRational],
) -> bool {
    if cert.len() != a.len() || cert.iter().any(|c| c.is_negative()) {
        return false;
    }
    let num_vars = a.first().map_or(0, |r| r.len());
    for j in 0..num_vars {
        let combo: BigRational = a
            .iter()
            .zip(cert)
            .map(|(row, l)| &row[j] * l)
            .fold(BigRational::zero(), |acc, v| acc + v);
        if !combo.is_zero() {
            return false;
        }
    }
    let rhs: BigRational = b
        .iter()
        .zip(cert)
        .map(|(bi, l)| bi * l)
        .fold(BigRational::zero(), |acc, v| acc + v);
    rhs.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn rq(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn check(a: Vec<Vec<BigRational>>, b: Vec<BigRational>, expect_feasible: bool) {
        match solve(&a, &b) {
            Feasibility::Feasible(x) => {
                assert!(expect_feasible, "expected infeasible, got {x:?}");
                for (row, bi) in a.iter().zip(&b) {
                    let lhs: BigRational = row
                        .iter()
                        .zip(&x)
                        .map(|(c, xi)| c * xi)
                        .fold(BigRational::zero(), |acc, v| acc + v);
                    assert!(lhs <= *bi, "constraint violated: {lhs} > {bi}");
                }
            }
            Feasibility::Infeasible(cert) => {
                assert!(!expect_feasible, "expected feasible, got cert {cert:?}");
                assert!(verify_certificate(&a, &b, &cert));
            }
        }
    }

    #[test]
    fn trivially_feasible() {
        check(vec![vec![r(1)]], vec![r(5)], true);
        check(vec![vec![r(1)], vec![r(-1)]], vec![r(5), r(5)], true);
    }

    #[test]
    fn point_solution() {
        // x <= 3, -x <= -3 forces x = 3
        let a = vec![vec![r(1)], vec![r(-1)]];
        let b = vec![r(3), r(-3)];
        match solve(&a, &b) {
            Feasibility::Feasible(x) => assert_eq!(x, vec![r(3)]),
            _ => panic!(),
        }
    }

    #[test]
    fn simple_contradiction() {
        // x <= 1 and -x <= -2 (x >= 2)
        check(vec![vec![r(1)], vec![r(-1)]], vec![r(1), r(-2)], false);
    }

    #[test]
    fn constant_cannot_split_thresholds() {
        // q >= 2/3 and q <= 1/3
        check(vec![vec![r(-1)], vec![r(1)]], vec![rq(-2, 3), rq(1, 3)], false);
    }

    #[test]
    fn two_variable_systems() {
        // x + y <= 1, x >= 0, y >= 0, x + y >= 2 infeasible
        check(
            vec![
                vec![r(1), r(1)],
                vec![r(-1), r(0)],
                vec![r(0), r(-1)],
                vec![r(-1), r(-1)],
            ],
            vec![r(1), r(0), r(0), r(-2)],
            false,
        );
        // drop the last: feasible
        check(
            vec![vec![r(1), r(1)], vec![r(-1), r(0)], vec![r(0), r(-1)]],
            vec![r(1), r(0), r(0)],
            true,
        );
    }

    #[test]
    fn negative_orthant() {
        // x <= -5 is feasible for free x
        check(vec![vec![r(1)]], vec![r(-5)], true);
    }

    #[test]
    fn empty_system() {
        check(vec![], vec![], true);
    }
}
