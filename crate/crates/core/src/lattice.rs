//! Exact integer linear algebra: Smith normal form with unimodular transforms
//! and fraction-free determinants.
//!
//! Matrices are row-major `Vec<Vec<i64>>`. All arithmetic is overflow checked;
//! the weight matrices handled here are tiny, so overflow indicates a
//! malformed input rather than a precision problem.

use crate::{Error, Result};

pub type IntMatrix = Vec<Vec<i64>>;

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal, each
/// diagonal entry dividing the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    /// Invariant factors `d_0 | d_1 | …`, nonnegative; zeros trail.
    pub diagonal: Vec<i64>,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|&&d| d != 0).count()
    }
}

fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

fn checked_axpy(target: &mut [i64], src: &[i64], q: i64) -> Result<()> {
    for (t, &s) in target.iter_mut().zip(src) {
        *t = s
            .checked_mul(q)
            .and_then(|p| t.checked_sub(p))
            .ok_or(Error::Overflow)?;
    }
    Ok(())
}

struct Work {
    a: IntMatrix,
    u: IntMatrix,
    v: IntMatrix,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.u.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        for row in self.v.iter_mut() {
            row.swap(i, j);
        }
    }

    /// row_i -= q · row_j
    fn row_sub(&mut self, i: usize, j: usize, q: i64) -> Result<()> {
        let src = self.a[j].clone();
        checked_axpy(&mut self.a[i], &src, q)?;
        let src = self.u[j].clone();
        checked_axpy(&mut self.u[i], &src, q)
    }

    /// col_i -= q · col_j
    fn col_sub(&mut self, i: usize, j: usize, q: i64) -> Result<()> {
        for m in [&mut self.a, &mut self.v] {
            for row in m.iter_mut() {
                row[i] = row[j]
                    .checked_mul(q)
                    .and_then(|p| row[i].checked_sub(p))
                    .ok_or(Error::Overflow)?;
            }
        }
        Ok(())
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut().chain(self.u[i].iter_mut()) {
            *x = -*x;
        }
    }
}

/// Smith normal form of an `m × d` integer matrix.
pub fn smith_normal_form(a: &IntMatrix) -> Result<SmithForm> {
    let m = a.len();
    let d = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("ragged integer matrix".into()));
    }
    let mut w = Work {
        a: a.clone(),
        u: identity(m),
        v: identity(d),
    };
    let steps = m.min(d);
    for t in 0..steps {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let pivot = (t..m)
            .flat_map(|i| (t..d).map(move |j| (i, j)))
            .filter(|&(i, j)| w.a[i][j] != 0)
            .min_by_key(|&(i, j)| w.a[i][j].unsigned_abs());
        let Some((pi, pj)) = pivot else { break };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if w.a[i][t] != 0 {
                    let q = w.a[i][t].div_euclid(w.a[t][t]);
                    w.row_sub(i, t, q)?;
                    if w.a[i][t] != 0 {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..d {
                if w.a[t][j] != 0 {
                    let q = w.a[t][j].div_euclid(w.a[t][t]);
                    w.col_sub(j, t, q)?;
                    if w.a[t][j] != 0 {
                        dirty = true;
                    }
                }
            }
            if dirty {
                // A remainder survived: move the smallest leftover onto the pivot.
                let cand = (t..m)
                    .map(|i| (i, t))
                    .chain((t..d).map(|j| (t, j)))
                    .filter(|&(i, j)| w.a[i][j] != 0)
                    .min_by_key(|&(i, j)| w.a[i][j].unsigned_abs())
                    .expect("pivot row/column cannot be all zero");
                w.swap_rows(t, cand.0);
                w.swap_cols(t, cand.1);
                continue;
            }
            // Divisibility of the trailing block by the pivot.
            let piv = w.a[t][t];
            let bad = (t + 1..m).find(|&i| (t + 1..d).any(|j| w.a[i][j] % piv != 0));
            match bad {
                Some(i) => {
                    // row_t += row_i, then re-run the elimination.
                    w.row_sub(t, i, -1)?;
                }
                None => break,
            }
        }
        if w.a[t][t] < 0 {
            w.negate_row(t);
        }
    }
    let diagonal = (0..steps).map(|i| w.a[i][i]).collect();
    Ok(SmithForm {
        diagonal,
        u: w.u,
        v: w.v,
    })
}

/// Determinant of a square integer matrix (Bareiss fraction-free elimination).
pub fn determinant(a: &IntMatrix) -> Result<i64> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("determinant of a non-square matrix".into()));
    }
    if n == 0 {
        return Ok(1);
    }
    let mut m: Vec<Vec<i128>> = a
        .iter()
        .map(|r| r.iter().map(|&x| i128::from(x)).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j]
                    .checked_mul(m[k][k])
                    .and_then(|x| m[i][k].checked_mul(m[k][j]).and_then(|y| x.checked_sub(y)))
                    .ok_or(Error::Overflow)?;
                m[i][j] = num / prev;
            }
        }
        prev = m[k][k];
    }
    i64::try_from(sign * m[n - 1][n - 1]).map_err(|_| Error::Overflow)
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}
