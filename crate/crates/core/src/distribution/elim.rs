//! Exact linear algebra over polynomials and rational functions.
//!
//! Generic rank uses Bareiss fraction-free elimination on
//! denominator-cleared rows, so intermediate entries stay polynomial and
//! every division is exact.  Membership certificates come from ordinary
//! Gauss-Jordan over the rational function field, where entry growth is
//! acceptable because those systems are small.

use crate::error::Result;
use crate::symexpr::{Polynomial, RationalExpr};
use num_rational::BigRational;
use num_traits::Zero;

/// Scale a row of rational functions to a polynomial row by multiplying
/// through by the product of its denominators.  Scaling a row by a nonzero
/// function does not change the span.
pub(crate) fn clear_denominators(row: &[RationalExpr]) -> Vec<Polynomial> {
    let mut common = Polynomial::one();
    for e in row {
        if !e.den().is_one() {
            common = &common * e.den();
        }
    }
    row.iter()
        .map(|e| {
            if common.is_one() {
                return e.num().clone();
            }
            let cof = common
                .div_exact(e.den())
                .expect("denominator divides the product of denominators");
            e.num() * &cof
        })
        .collect()
}

/// Generic rank of a polynomial matrix by Bareiss elimination.  Pivot
/// choice: among candidate rows, fewest terms first, then lowest row index,
/// which keeps intermediate swell down and is deterministic.
pub(crate) fn poly_rank(mut rows: Vec<Vec<Polynomial>>) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    let mut prev = Polynomial::one();
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let pivot_row = (rank..nrows)
            .filter(|&r| !rows[r][col].is_zero())
            .min_by_key(|&r| (rows[r][col].term_count(), r));
        let Some(p) = pivot_row else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for r in rank + 1..nrows {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut rows[r][col], Polynomial::zero());
            for c in col + 1..ncols {
                let t = &(&pivot * &rows[r][c]) - &(&factor * &rows[rank][c]);
                rows[r][c] = if prev.is_one() {
                    t
                } else {
                    t.div_exact(&prev)
                        .expect("Bareiss division is exact by the Sylvester identity")
                };
            }
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Rank of a numeric matrix by plain Gaussian elimination.
pub(crate) fn rational_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for r in rank + 1..nrows {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &pivot;
            for c in col..ncols {
                let s = &rows[rank][c] * &factor;
                rows[r][c] -= s;
            }
        }
        rank += 1;
    }
    rank
}

/// Solve `sum_j c_j gens[j] = target` over the rational function field.
/// Returns the coefficient vector with free variables set to zero, or
/// `None` when the system is inconsistent.  Gauss-Jordan on the transposed
/// generator matrix (coordinates as rows, generators as columns).
pub(crate) fn span_coefficients(
    gens: &[&[RationalExpr]],
    target: &[RationalExpr],
) -> Result<Option<Vec<RationalExpr>>> {
    let ncols = gens.len();
    let nrows = target.len();
    // aug[r] = [A_{r,0} .. A_{r,ncols-1} | b_r]
    let mut aug: Vec<Vec<RationalExpr>> = (0..nrows)
        .map(|r| {
            let mut row: Vec<RationalExpr> = gens.iter().map(|g| g[r].clone()).collect();
            row.push(target[r].clone());
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let pivot_row = (rank..nrows)
            .filter(|&r| !aug[r][col].is_zero())
            .min_by_key(|&r| (aug[r][col].term_count(), r));
        let Some(p) = pivot_row else { continue };
        aug.swap(rank, p);
        let pivot = aug[rank][col].clone();
        for c in col..=ncols {
            aug[rank][c] = aug[rank][c].div(&pivot)?;
        }
        for r in 0..nrows {
            if r == rank || aug[r][col].is_zero() {
                continue;
            }
            let factor = aug[r][col].clone();
            for c in col..=ncols {
                let s = factor.checked_mul(&aug[rank][c])?;
                aug[r][c] = &aug[r][c] - &s;
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    // consistency: a zeroed row must not demand a nonzero target component
    for row in aug.iter().skip(rank) {
        if !row[ncols].is_zero() {
            return Ok(None);
        }
    }
    let mut coeffs = vec![RationalExpr::zero(); ncols];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(r) = pivot {
            coeffs[col] = aug[*r][ncols].clone();
        }
    }
    Ok(Some(coeffs))
}
