//! Exact dense linear algebra over rationals.
//!
//! Small, deterministic routines — reduced row echelon form, rank, kernel
//! bases, linear solves, and symmetric decomposition of quadratic forms —
//! used by the polyhedral and elimination machinery.  Sizes in this crate
//! stay modest (tens of rows and columns), so dense arithmetic with
//! arbitrary-precision rationals is both simple and fast enough.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::ratio::Rat;

/// Inner product of two equal-length slices.
///
/// # Panics
/// Panics if the slices differ in length.
#[must_use]
pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// Reduces `rows` to reduced row echelon form in place, drops zero rows,
/// and returns the pivot column indices (one per remaining row, ascending).
pub fn rref(rows: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let width = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(pivot_row) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot_row);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                for c in 0..width {
                    let sub = &factor * &rows[r][c];
                    rows[i][c] = &rows[i][c] - &sub;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Rank of the row set.
#[must_use]
pub fn rank(rows: &[Vec<Rat>]) -> usize {
    let mut work: Vec<Vec<Rat>> = rows.to_vec();
    rref(&mut work).len()
}

/// Basis of the right kernel `{x : A x = 0}` of the row set, where every
/// row has length `width`.  The basis vectors are produced in deterministic
/// order (one per free column, ascending).
#[must_use]
pub fn kernel_basis(rows: &[Vec<Rat>], width: usize) -> Vec<Vec<Rat>> {
    let mut work: Vec<Vec<Rat>> = rows.to_vec();
    let pivots = rref(&mut work);
    let pivot_set: Vec<bool> = {
        let mut set = vec![false; width];
        for &p in &pivots {
            set[p] = true;
        }
        set
    };
    let mut basis = Vec::new();
    for free in 0..width {
        if pivot_set[free] {
            continue;
        }
        let mut v = vec![Rat::zero(); width];
        v[free] = Rat::one();
        for (row, &p) in work.iter().zip(&pivots) {
            // Pivot variable p satisfies x_p = -sum over free columns.
            v[p] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}

/// One solution of `A x = b`, or `None` if the system is inconsistent.
///
/// Free variables are set to zero, which makes the result deterministic.
#[must_use]
pub fn solve_linear(rows: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(rows.len(), rhs.len(), "solve_linear: shape mismatch");
    let width = rows.first().map_or(0, Vec::len);
    let mut work: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut augmented = row.clone();
            augmented.push(b.clone());
            augmented
        })
        .collect();
    let pivots = rref(&mut work);
    // A pivot in the augmented column signals inconsistency.
    if pivots.last() == Some(&width) {
        return None;
    }
    let mut x = vec![Rat::zero(); width];
    for (row, &p) in work.iter().zip(&pivots) {
        x[p] = row[width].clone();
    }
    Some(x)
}

/// A term `coeff * (v . x)^2` of a symmetric decomposition.
#[derive(Clone, Debug)]
pub struct SquareTerm {
    /// Scalar weight of the squared linear form.
    pub coeff: Rat,
    /// Coefficient vector of the linear form.
    pub form: Vec<Rat>,
}

/// Decomposes a symmetric matrix `Q` as `sum_k coeff_k * form_k form_k^T`
/// by symmetric Gaussian elimination.
///
/// Zero diagonals with nonzero off-diagonal entries are handled through the
/// hyperbolic identity `2xy = ((x+y)^2 - (x-y)^2)/2`, which contributes one
/// positive and one negative term — so by Sylvester's law of inertia the
/// matrix is negative semidefinite exactly when every returned coefficient
/// is `<= 0` (and positive semidefinite when every coefficient is `>= 0`).
///
/// # Panics
/// Panics if `q` is not square and symmetric.
#[must_use]
pub fn symmetric_decompose(mut q: Vec<Vec<Rat>>) -> Vec<SquareTerm> {
    let n = q.len();
    for row in &q {
        assert_eq!(row.len(), n, "symmetric_decompose: not square");
    }
    for i in 0..n {
        for j in (i + 1)..n {
            assert_eq!(q[i][j], q[j][i], "symmetric_decompose: not symmetric");
        }
    }
    let mut terms = Vec::new();
    loop {
        let Some(i) = (0..n).find(|&i| !q[i][i].is_zero()) else {
            // All diagonals vanish; look for an off-diagonal entry.
            let mut off = None;
            'scan: for i in 0..n {
                for j in (i + 1)..n {
                    if !q[i][j].is_zero() {
                        off = Some((i, j));
                        break 'scan;
                    }
                }
            }
            let Some((i, j)) = off else {
                break; // Fully decomposed.
            };
            // The symmetric pair q[i][j] = q[j][i] = c contributes 2c x_i x_j
            // to the form, and 2 x_i x_j = ((x_i+x_j)^2 - (x_i-x_j)^2) / 2,
            // so the rank-two piece is (c/2) (pp^T - mm^T).
            let c = q[i][j].clone();
            let half_c = &c / Rat::from_integer(2.into());
            let mut plus = vec![Rat::zero(); n];
            plus[i] = Rat::one();
            plus[j] = Rat::one();
            let mut minus = vec![Rat::zero(); n];
            minus[i] = Rat::one();
            minus[j] = -Rat::one();
            for (vec_ref, coeff) in [(&plus, half_c.clone()), (&minus, -half_c.clone())] {
                for a in 0..n {
                    for b in 0..n {
                        let sub = &coeff * &vec_ref[a] * &vec_ref[b];
                        q[a][b] = &q[a][b] - &sub;
                    }
                }
            }
            terms.push(SquareTerm {
                coeff: half_c.clone(),
                form: plus,
            });
            terms.push(SquareTerm {
                coeff: -half_c,
                form: minus,
            });
            continue;
        };
        let d = q[i][i].clone();
        let form: Vec<Rat> = (0..n).map(|j| &q[i][j] / &d).collect();
        for a in 0..n {
            for b in 0..n {
                let sub = &d * &form[a] * &form[b];
                q[a][b] = &q[a][b] - &sub;
            }
        }
        terms.push(SquareTerm { coeff: d, form });
    }
    terms
}

/// Whether a symmetric decomposition certifies negative semidefiniteness.
#[must_use]
pub fn is_negative_semidefinite(terms: &[SquareTerm]) -> bool {
    terms.iter().all(|t| !t.coeff.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{rat, ratio};

    fn m(entries: &[&[i64]]) -> Vec<Vec<Rat>> {
        entries
            .iter()
            .map(|row| row.iter().map(|&x| rat(x)).collect())
            .collect()
    }

    #[test]
    fn rref_and_rank() {
        let mut a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let pivots = rref(&mut a);
        assert_eq!(pivots, vec![0, 1]);
        assert_eq!(a.len(), 2);
        assert_eq!(rank(&m(&[&[1, 2], &[3, 4]])), 2);
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn kernel_of_rank_one_map() {
        let a = m(&[&[1, 1, 1]]);
        let basis = kernel_basis(&a, 3);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(dot(&a[0], v).is_zero());
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(&[&[1, 1], &[1, -1]]);
        let x = solve_linear(&a, &[rat(3), rat(1)]).unwrap();
        assert_eq!(x, vec![rat(2), rat(1)]);
        let bad = m(&[&[1, 1], &[2, 2]]);
        assert!(solve_linear(&bad, &[rat(1), rat(3)]).is_none());
    }

    #[test]
    fn decomposes_definite_and_indefinite_forms() {
        // x^2 + 4xy + 5y^2 = (x+2y)^2 + y^2: positive definite.
        let q = m(&[&[1, 2], &[2, 5]]);
        let terms = symmetric_decompose(q);
        assert!(terms.iter().all(|t| t.coeff.is_positive()));
        assert!(!is_negative_semidefinite(&terms));

        // -(x - y)^2 expands to -x^2 + 2xy - y^2: negative semidefinite.
        let q = m(&[&[-1, 1], &[1, -1]]);
        let terms = symmetric_decompose(q);
        assert!(is_negative_semidefinite(&terms));

        // Pure cross term xy is indefinite.
        let q = vec![
            vec![rat(0), ratio(1, 2)],
            vec![ratio(1, 2), rat(0)],
        ];
        let terms = symmetric_decompose(q);
        assert!(terms.iter().any(|t| t.coeff.is_positive()));
        assert!(terms.iter().any(|t| t.coeff.is_negative()));
    }

    #[test]
    fn decomposition_reconstructs_the_matrix() {
        let q = vec![
            vec![rat(2), rat(1), rat(0)],
            vec![rat(1), rat(0), rat(3)],
            vec![rat(0), rat(3), rat(-4)],
        ];
        let terms = symmetric_decompose(q.clone());
        let n = q.len();
        let mut rebuilt = vec![vec![Rat::zero(); n]; n];
        for t in &terms {
            for a in 0..n {
                for b in 0..n {
                    let add = &t.coeff * &t.form[a] * &t.form[b];
                    rebuilt[a][b] = &rebuilt[a][b] + &add;
                }
            }
        }
        assert_eq!(rebuilt, q);
    }
}
