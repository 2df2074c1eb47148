//! Exact linear programming by two-phase primal simplex.
//!
//! The tableau is kept integer-preserving: entries are big integers sharing
//! one positive denominator (the determinant of the current basis, by
//! Cramer's rule), so a pivot is two multiplications and one exact division
//! per entry with no per-entry gcd reduction.  Pivoting uses the steepest
//! reduced cost with a switch to Bland's rule after a streak of degenerate
//! pivots, which keeps the iteration count low while still guaranteeing
//! termination: cycling would need infinitely many consecutive degenerate
//! pivots, and the Bland phase provably leaves any degenerate vertex.
//! Every number is exact, so optimality, unboundedness, and infeasibility
//! verdicts are certificates rather than numerical judgements.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ratio::Rat;

/// Outcome of an exact linear program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    /// A finite optimum, with one optimal point.
    Optimal {
        /// Optimal objective value.
        value: Rat,
        /// A point attaining it (free variables reconstructed).
        point: Vec<Rat>,
    },
    /// The objective is unbounded in the optimization direction.
    Unbounded,
    /// The constraint set is empty.
    Infeasible,
}

/// Clears denominators of a rational row, returning primitive integers
/// (no sign normalization: scaling is by a positive rational only).
fn integerize(values: &[Rat]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for v in values {
        lcm = lcm.lcm(v.denom());
    }
    let mut ints: Vec<BigInt> = values.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    let mut gcd = BigInt::zero();
    for x in &ints {
        gcd = gcd.gcd(x);
    }
    if !gcd.is_zero() && !gcd.is_one() {
        for x in &mut ints {
            *x = &*x / &gcd;
        }
    }
    ints
}

/// Minimizes `objective . x` over `{x free : coeffs_i . x + const_i >= 0}`.
///
/// Each row of `rows` is `(coeffs, constant)`.  Row coefficient vectors and
/// the objective must share one length (the variable count).
#[must_use]
pub fn minimize(rows: &[(Vec<Rat>, Rat)], objective: &[Rat]) -> LpOutcome {
    let d = objective.len();
    let m = rows.len();
    for (coeffs, _) in rows {
        assert_eq!(coeffs.len(), d, "lp: row width mismatch");
    }
    if m == 0 {
        // Unconstrained: bounded only for a zero objective.
        if objective.iter().all(Zero::is_zero) {
            return LpOutcome::Optimal {
                value: Rat::zero(),
                point: vec![Rat::zero(); d],
            };
        }
        return LpOutcome::Unbounded;
    }

    // Standard form: x = u - v with u, v >= 0 and one surplus s_i >= 0 per
    // row turns  a.x >= -b  into  a.u - a.v - s = -b.  Each row is scaled
    // to primitive integers (a positive scaling, so the constraint set is
    // unchanged) and sign-flipped as needed to make every right-hand side
    // nonnegative before phase 1 artificials are appended.
    let n_real = 2 * d + m;
    let n_total = n_real + m;
    let mut mat: Vec<Vec<BigInt>> = Vec::with_capacity(m);
    let mut rhs: Vec<BigInt> = Vec::with_capacity(m);
    for (i, (coeffs, constant)) in rows.iter().enumerate() {
        let mut scaled: Vec<Rat> = coeffs.clone();
        scaled.push(constant.clone());
        let ints = integerize(&scaled);
        let target = -ints[d].clone();
        let flip = target.is_negative();
        let sign = if flip { -BigInt::one() } else { BigInt::one() };
        let mut row = vec![BigInt::zero(); n_total];
        for (j, c) in ints[..d].iter().enumerate() {
            row[j] = &sign * c;
            row[d + j] = -(&sign * c);
        }
        row[2 * d + i] = -sign.clone();
        row[n_real + i] = BigInt::one();
        mat.push(row);
        rhs.push(if flip { -target } else { target });
    }
    let mut den = BigInt::one();
    let mut basis: Vec<usize> = (0..m).map(|i| n_real + i).collect();

    // Phase 1: minimize the sum of artificials.
    let mut cost1 = vec![BigInt::zero(); n_total];
    for c in cost1.iter_mut().skip(n_real) {
        *c = BigInt::one();
    }
    if let SimplexEnd::Unbounded =
        run_simplex(&mut mat, &mut rhs, &mut den, &mut basis, &cost1, n_total)
    {
        unreachable!("phase-1 objective is bounded below by zero");
    }
    let value1: BigInt = basis
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b >= n_real)
        .map(|(i, _)| rhs[i].clone())
        .sum();
    if value1.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive remaining artificials out of the basis (their values are zero).
    let mut drop_rows: Vec<usize> = Vec::new();
    for i in 0..basis.len() {
        if basis[i] < n_real {
            continue;
        }
        match (0..n_real).find(|&j| !mat[i][j].is_zero()) {
            Some(j) => pivot(&mut mat, &mut rhs, &mut den, &mut basis, i, j),
            None => drop_rows.push(i),
        }
    }
    for &i in drop_rows.iter().rev() {
        mat.remove(i);
        rhs.remove(i);
        basis.remove(i);
    }

    // Phase 2: the real objective (scaled to integers by a positive factor
    // sigma, undone when the optimum is reported), artificials frozen out.
    let mut scaled_obj: Vec<Rat> = objective.to_vec();
    scaled_obj.push(Rat::zero());
    let obj_ints = integerize(&scaled_obj);
    let sigma = {
        // Recover the positive scale factor: ints = sigma * objective.
        match objective.iter().position(|c| !c.is_zero()) {
            Some(k) => Rat::from(obj_ints[k].clone()) / &objective[k],
            None => Rat::one(),
        }
    };
    let mut cost2 = vec![BigInt::zero(); n_total];
    for j in 0..d {
        cost2[j] = obj_ints[j].clone();
        cost2[d + j] = -obj_ints[j].clone();
    }
    if let SimplexEnd::Unbounded =
        run_simplex(&mut mat, &mut rhs, &mut den, &mut basis, &cost2, n_real)
    {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rat::zero(); d];
    for (i, &b) in basis.iter().enumerate() {
        let v = Rat::new(rhs[i].clone(), den.clone());
        if b < d {
            x[b] = &x[b] + &v;
        } else if b < 2 * d {
            x[b - d] = &x[b - d] - &v;
        }
    }
    let mut value_num = BigInt::zero();
    for (i, &b) in basis.iter().enumerate() {
        if !cost2[b].is_zero() {
            value_num += &cost2[b] * &rhs[i];
        }
    }
    let value = Rat::new(value_num, den) / sigma;
    LpOutcome::Optimal { value, point: x }
}

/// Maximizes `objective . x` (see [`minimize`]).
#[must_use]
pub fn maximize(rows: &[(Vec<Rat>, Rat)], objective: &[Rat]) -> LpOutcome {
    let negated: Vec<Rat> = objective.iter().map(|c| -c.clone()).collect();
    match minimize(rows, &negated) {
        LpOutcome::Optimal { value, point } => LpOutcome::Optimal {
            value: -value,
            point,
        },
        other => other,
    }
}

/// A feasible point of `{x : coeffs_i . x + const_i >= 0}`, if any.
#[must_use]
pub fn feasible_point(rows: &[(Vec<Rat>, Rat)], d: usize) -> Option<Vec<Rat>> {
    match minimize(rows, &vec![Rat::zero(); d]) {
        LpOutcome::Optimal { point, .. } => Some(point),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

/// Maximizes the uniform slack `t` subject to `coeffs_i . x + const_i >= t`
/// and `t <= 1`.  Returns the maximizing point and the optimal slack:
/// positive means a strictly feasible point exists, zero means feasible but
/// only on the boundary, negative certifies that the closed system is
/// infeasible.  (`None` cannot occur for finite input: relaxing by a large
/// enough negative `t` always succeeds.)
#[must_use]
pub fn max_uniform_slack(rows: &[(Vec<Rat>, Rat)], d: usize) -> Option<(Vec<Rat>, Rat)> {
    let mut extended: Vec<(Vec<Rat>, Rat)> = Vec::with_capacity(rows.len() + 1);
    for (coeffs, constant) in rows {
        let mut c = coeffs.clone();
        c.push(-Rat::one());
        extended.push((c, constant.clone()));
    }
    let mut cap = vec![Rat::zero(); d];
    cap.push(-Rat::one());
    extended.push((cap, Rat::one()));
    let mut objective = vec![Rat::zero(); d];
    objective.push(Rat::one());
    match maximize(&extended, &objective) {
        LpOutcome::Optimal { value, mut point } => {
            point.truncate(d);
            Some((point, value))
        }
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("slack is capped at one"),
    }
}

enum SimplexEnd {
    Optimal,
    Unbounded,
}

/// Runs primal simplex on an integer tableau `mat/den` whose basis columns
/// form an identity (up to the shared denominator).  Only columns below
/// `col_limit` may enter the basis.  `cost` must be integer; reduced costs
/// are maintained incrementally and share the tableau denominator, so all
/// sign tests are integer sign tests.
fn run_simplex(
    mat: &mut [Vec<BigInt>],
    rhs: &mut [BigInt],
    den: &mut BigInt,
    basis: &mut [usize],
    cost: &[BigInt],
    col_limit: usize,
) -> SimplexEnd {
    let n = mat.first().map_or(0, Vec::len);
    // cbar[j] = den * (reduced cost of column j); basic columns stay at
    // exactly zero, so no membership test is needed when scanning.
    let mut cbar: Vec<BigInt> = (0..n)
        .map(|j| {
            let mut c = &cost[j] * &*den;
            for (i, &b) in basis.iter().enumerate() {
                if !cost[b].is_zero() && !mat[i][j].is_zero() {
                    c -= &cost[b] * &mat[i][j];
                }
            }
            c
        })
        .collect();
    let mut degenerate_streak = 0usize;
    loop {
        // Entering column: steepest reduced cost, or smallest index (Bland)
        // while escaping a long degenerate streak.
        let bland = degenerate_streak > 32;
        let mut entering: Option<usize> = None;
        for j in 0..col_limit {
            if !cbar[j].is_negative() {
                continue;
            }
            match entering {
                None => {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                }
                Some(e) => {
                    if cbar[j] < cbar[e] {
                        entering = Some(j);
                    }
                }
            }
        }
        let Some(j) = entering else {
            return SimplexEnd::Optimal;
        };
        // Ratio test minimizing rhs[i]/mat[i][j] over positive entries by
        // cross-multiplication; ties broken by smallest basis index (Bland).
        let mut leaving: Option<usize> = None;
        for i in 0..mat.len() {
            if !mat[i][j].is_positive() {
                continue;
            }
            match leaving {
                Some(best) => {
                    let lhs = &rhs[i] * &mat[best][j];
                    let rhs_cmp = &rhs[best] * &mat[i][j];
                    if lhs < rhs_cmp || (lhs == rhs_cmp && basis[i] < basis[best]) {
                        leaving = Some(i);
                    }
                }
                None => leaving = Some(i),
            }
        }
        let Some(i) = leaving else {
            return SimplexEnd::Unbounded;
        };
        if rhs[i].is_zero() {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        // The reduced-cost row transforms like any other tableau row:
        // cbar'[c] = (p * cbar[c] - cbar[j] * row_i[c]) / den_old.  `pivot`
        // leaves the pivot row itself unscaled, so row_i is read after it.
        let cj = cbar[j].clone();
        let p = mat[i][j].clone();
        let den_old = den.clone();
        pivot(mat, rhs, den, basis, i, j);
        for (c, entry) in cbar.iter_mut().enumerate() {
            if mat[i][c].is_zero() && entry.is_zero() {
                continue;
            }
            let num = &p * &*entry - &cj * &mat[i][c];
            *entry = exact_div(num, &den_old);
        }
    }
}

/// Integer-preserving pivot at `(i, j)`: every other row `r` becomes
/// `(p * row_r - row_r[j] * row_i) / den` (an exact division by Cramer's
/// rule), the pivot row is kept unscaled, and the shared denominator
/// becomes the pivot element.  A negative pivot element is only legal on a
/// degenerate row (zero right-hand side) and is handled by negating the
/// pivot row first.
fn pivot(
    mat: &mut [Vec<BigInt>],
    rhs: &mut [BigInt],
    den: &mut BigInt,
    basis: &mut [usize],
    i: usize,
    j: usize,
) {
    if mat[i][j].is_negative() {
        debug_assert!(rhs[i].is_zero(), "negative pivot on a nondegenerate row");
        for x in mat[i].iter_mut() {
            *x = -x.clone();
        }
        rhs[i] = -rhs[i].clone();
    }
    let p = mat[i][j].clone();
    for r in 0..mat.len() {
        if r == i {
            continue;
        }
        let factor = mat[r][j].clone();
        if factor.is_zero() {
            for c in 0..mat[r].len() {
                if !mat[r][c].is_zero() {
                    mat[r][c] = exact_div(&p * &mat[r][c], den);
                }
            }
            if !rhs[r].is_zero() {
                rhs[r] = exact_div(&p * &rhs[r], den);
            }
        } else {
            for c in 0..mat[r].len() {
                let num = &p * &mat[r][c] - &factor * &mat[i][c];
                mat[r][c] = exact_div(num, den);
            }
            let num = &p * &rhs[r] - &factor * &rhs[i];
            rhs[r] = exact_div(num, den);
        }
    }
    *den = p;
    basis[i] = j;
}

/// Exact integer division, asserting zero remainder.
fn exact_div(num: BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_rem(den);
    debug_assert!(r.is_zero(), "integer-preserving pivot division not exact");
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{rat, ratio};

    fn row(coeffs: &[i64], constant: i64) -> (Vec<Rat>, Rat) {
        (coeffs.iter().map(|&c| rat(c)).collect(), rat(constant))
    }

    #[test]
    fn minimizes_over_a_triangle() {
        // x >= 0, y >= 0, x + y <= 4; minimize x - 2y at (0, 4).
        let rows = [row(&[1, 0], 0), row(&[0, 1], 0), row(&[-1, -1], 4)];
        let got = minimize(&rows, &[rat(1), rat(-2)]);
        match got {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, rat(-8));
                assert_eq!(point, vec![rat(0), rat(4)]);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn detects_unbounded_and_infeasible() {
        // x >= 1, minimize -x: unbounded above in x.
        let rows = [row(&[1], -1)];
        assert_eq!(minimize(&rows, &[rat(-1)]), LpOutcome::Unbounded);
        // x >= 1 and x <= 0: infeasible.
        let rows = [row(&[1], -1), row(&[-1], 0)];
        assert_eq!(minimize(&rows, &[rat(1)]), LpOutcome::Infeasible);
    }

    #[test]
    fn free_variables_go_negative_when_optimal() {
        // x <= -2, minimize x + 10 ... objective just x: x unbounded below?
        // Add x >= -5 to bound it.
        let rows = [row(&[-1], -2), row(&[1], 5)];
        let got = minimize(&rows, &[rat(1)]);
        match got {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, rat(-5));
                assert_eq!(point, vec![rat(-5)]);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn handles_fractional_data_exactly() {
        // 2x + 3y <= 1/2, x >= 0, y >= 0; maximize x/3 + y/5.
        let rows = [
            (vec![rat(-2), rat(-3)], ratio(1, 2)),
            row(&[1, 0], 0),
            row(&[0, 1], 0),
        ];
        let got = maximize(&rows, &[ratio(1, 3), ratio(1, 5)]);
        match got {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(1, 12)),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_constraints_terminate() {
        // Redundant stack of identical constraints plus equality-like pair.
        let rows = [
            row(&[1, 1], 0),
            row(&[1, 1], 0),
            row(&[-1, -1], 0),
            row(&[1, -1], 2),
            row(&[-1, 1], 2),
        ];
        let got = minimize(&rows, &[rat(1), rat(0)]);
        match got {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(-1)),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn feasibility_and_slack_helpers() {
        let rows = [row(&[1], 0), row(&[-1], 1)];
        let p = feasible_point(&rows, 1).unwrap();
        assert!(p[0] >= rat(0) && p[0] <= rat(1));
        let (point, slack) = max_uniform_slack(&rows, 1).unwrap();
        assert_eq!(slack, ratio(1, 2));
        assert_eq!(point[0], ratio(1, 2));

        let empty = [row(&[1], -1), row(&[-1], 0)];
        assert!(feasible_point(&empty, 1).is_none());
        // Infeasible systems surface as a certified negative slack.
        let (_, slack) = max_uniform_slack(&empty, 1).unwrap();
        assert_eq!(slack, ratio(-1, 2));
    }
}
