//! Monomial bases of the joint isotypes `H(X)_{ν_G, kν_T}`.
//!
//! The Hardy space of `S^{2n+1}` is spanned by the monomials `z^J`, and
//! `z^J` lies in the `(ν_G, kν_T)` isotype exactly when `W_G J = ν_G` and
//! `W_T J = kν_T`. The normalized sections are `s_J = √c_J z^J` with
//! `c_J = (|J|+n)!/(πⁿ J!)`; only `ln c_J` is ever stored.
//!
//! Enumeration is exact integer arithmetic. Finiteness comes from a
//! functional `φ` with `φ·w_i ≥ gap > 0` on every `T`-weight column: then
//! `Σ_i J_i (φ·w_i) = k φ·ν_T`, which bounds every coordinate.

use crate::actions::WeightSystem;
use crate::geometry::SpherePoint;
use crate::special::ln_factorial;
use crate::{Error, Result, C64};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Slack added to floating-point coordinate bounds before flooring.
const BOUND_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentVector(pub Vec<u64>);

impl ExponentVector {
    pub fn degree(&self) -> u64 {
        self.0.iter().sum()
    }
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisEntry {
    pub j: ExponentVector,
    /// `ln c_J`.
    pub log_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotypeBasis {
    pub ws: WeightSystem,
    pub nu_g: Vec<i64>,
    pub nu_t: Vec<i64>,
    pub k: u64,
    /// Sorted lexicographically by `J`.
    pub entries: Vec<BasisEntry>,
}

impl IsotypeBasis {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn n(&self) -> usize {
        self.ws.n()
    }

    /// One line per entry, `j_0 … j_n log_c`, after `#` comment lines.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# n={} nu_G={:?} nu_T={:?} k={}", self.n(), self.nu_g, self.nu_t, self.k);
        let _ = writeln!(s, "# columns: J_0 .. J_n log_c");
        for e in &self.entries {
            for j in e.j.as_slice() {
                let _ = write!(s, "{j} ");
            }
            let _ = writeln!(s, "{:.17e}", e.log_c);
        }
        s
    }
}

/// Parses the output of [`IsotypeBasis::dump`].
pub fn parse_dump(text: &str) -> Result<Vec<BasisEntry>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| Error::InvalidArgument(format!("basis dump line {}: {what}", lineno + 1));
        let (last, js) = fields.split_last().ok_or_else(|| bad("empty"))?;
        if js.is_empty() {
            return Err(bad("missing exponents"));
        }
        let j = js
            .iter()
            .map(|t| t.parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        let log_c = last.parse::<f64>().map_err(|e| bad(&e.to_string()))?;
        out.push(BasisEntry {
            j: ExponentVector(j),
            log_c,
        });
    }
    Ok(out)
}

/// `ln((|J|+n)!/(πⁿ J!))`.
pub fn log_coefficient(j: &[u64], n: usize) -> f64 {
    let deg: u64 = j.iter().sum();
    ln_factorial(deg + n as u64) - n as f64 * PI.ln() - j.iter().map(|&x| ln_factorial(x)).sum::<f64>()
}

fn check_targets(ws: &WeightSystem, nu_g: &[i64], nu_t: &[i64]) -> Result<()> {
    if nu_g.len() != ws.d_g() {
        return Err(Error::Dimension {
            what: "nu_G",
            expected: ws.d_g(),
            found: nu_g.len(),
        });
    }
    if nu_t.len() != ws.d_t() {
        return Err(Error::Dimension {
            what: "nu_T",
            expected: ws.d_t(),
            found: nu_t.len(),
        });
    }
    Ok(())
}

/// Right-hand side `(ν_G, kν_T)` with overflow checks.
pub fn target(nu_g: &[i64], nu_t: &[i64], k: u64) -> Result<Vec<i64>> {
    let k = i64::try_from(k).map_err(|_| Error::Overflow)?;
    let mut t = nu_g.to_vec();
    for &v in nu_t {
        t.push(v.checked_mul(k).ok_or(Error::Overflow)?);
    }
    Ok(t)
}

/// Per-coordinate `φ`-values `φ·w_i` and the budget `k φ·ν_T`.
fn functional_data(ws: &WeightSystem, nu_t: &[i64], k: u64) -> (Vec<f64>, f64) {
    let phi = ws.positive_functional();
    let col: Vec<f64> = (0..=ws.n())
        .map(|i| ws.w_t().iter().zip(phi).map(|(r, p)| r[i] as f64 * p).sum())
        .collect();
    let budget = k as f64 * nu_t.iter().zip(phi).map(|(&v, p)| v as f64 * p).sum::<f64>();
    (col, budget)
}

/// Largest `|J|` any solution can have: `budget / min_i(φ·w_i)`.
pub fn degree_bound(ws: &WeightSystem, nu_t: &[i64], k: u64) -> u64 {
    let (col, budget) = functional_data(ws, nu_t, k);
    let min = col.iter().copied().fold(f64::INFINITY, f64::min);
    if budget < 0.0 {
        return 0;
    }
    (budget / min + BOUND_SLACK).floor() as u64
}

/// All `J ≥ 0` with `W_P J = (ν_G, kν_T)`, in lexicographic order.
pub fn enumerate_isotype(ws: &WeightSystem, nu_g: &[i64], nu_t: &[i64], k: u64) -> Result<Vec<ExponentVector>> {
    check_targets(ws, nu_g, nu_t)?;
    let rhs = target(nu_g, nu_t, k)?;
    let (col, budget) = functional_data(ws, nu_t, k);
    if budget < -BOUND_SLACK {
        return Ok(Vec::new());
    }
    let w_p = ws.w_p();
    let dim = ws.n() + 1;
    let last = dim - 1;
    // Row used to solve for the last coordinate directly.
    let pivot_row = w_p
        .iter()
        .position(|r| r[last] != 0)
        .ok_or(Error::PositivityViolated)?;
    let mut out = Vec::new();
    let mut j = vec![0u64; dim];
    let mut residual = rhs.clone();
    dfs(&w_p, &col, budget, 0, &mut j, &mut residual, pivot_row, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    w_p: &[Vec<i64>],
    col: &[f64],
    remaining: f64,
    i: usize,
    j: &mut Vec<u64>,
    residual: &mut Vec<i64>,
    pivot_row: usize,
    out: &mut Vec<ExponentVector>,
) -> Result<()> {
    let last = j.len() - 1;
    if i == last {
        let w = w_p[pivot_row][last];
        let r = residual[pivot_row];
        if r % w != 0 || r / w < 0 {
            return Ok(());
        }
        let jl = r / w;
        let ok = w_p
            .iter()
            .zip(residual.iter())
            .all(|(row, &res)| row[last].checked_mul(jl) == Some(res));
        if ok {
            j[last] = jl as u64;
            out.push(ExponentVector(j.clone()));
            j[last] = 0;
        }
        return Ok(());
    }
    let bound = (remaining / col[i] + BOUND_SLACK).floor().max(-1.0);
    if bound < 0.0 {
        return Ok(());
    }
    let bound = bound as u64;
    for v in 0..=bound {
        j[i] = v;
        dfs(w_p, col, remaining - v as f64 * col[i], i + 1, j, residual, pivot_row, out)?;
        // Step the residual to the next value of J_i.
        for (res, row) in residual.iter_mut().zip(w_p) {
            *res = res.checked_sub(row[i]).ok_or(Error::Overflow)?;
        }
    }
    // Restore the residual.
    let steps = i64::try_from(bound + 1).map_err(|_| Error::Overflow)?;
    for (res, row) in residual.iter_mut().zip(w_p) {
        *res = row[i]
            .checked_mul(steps)
            .and_then(|d| res.checked_add(d))
            .ok_or(Error::Overflow)?;
    }
    j[i] = 0;
    Ok(())
}

pub fn build_basis(ws: &WeightSystem, nu_g: &[i64], nu_t: &[i64], k: u64) -> Result<IsotypeBasis> {
    let n = ws.n();
    let entries = enumerate_isotype(ws, nu_g, nu_t, k)?
        .into_iter()
        .map(|j| {
            let log_c = log_coefficient(j.as_slice(), n);
            BasisEntry { j, log_c }
        })
        .collect();
    Ok(IsotypeBasis {
        ws: ws.clone(),
        nu_g: nu_g.to_vec(),
        nu_t: nu_t.to_vec(),
        k,
        entries,
    })
}

/// `ln|s_J(x)|²` (−∞ if `s_J(x) = 0`).
pub fn log_abs_sq_section(j: &[u64], log_c: f64, x: &SpherePoint) -> f64 {
    let mut acc = log_c;
    for (&e, z) in j.iter().zip(x.coords()) {
        if e == 0 {
            continue;
        }
        let r = z.norm_sqr();
        if r == 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += e as f64 * r.ln();
    }
    acc
}

/// `ln s_J(x)` as `(ln|s_J(x)|, arg s_J(x))`.
pub fn log_section(j: &[u64], log_c: f64, x: &SpherePoint) -> (f64, f64) {
    let phase: f64 = j
        .iter()
        .zip(x.coords())
        .filter(|(&e, _)| e != 0)
        .map(|(&e, z)| e as f64 * z.arg())
        .sum();
    (0.5 * log_abs_sq_section(j, log_c, x), phase)
}

/// `s_J(x) = e^{ln c_J/2} Π x_i^{J_i}`, magnitude and phase computed separately.
pub fn eval_section(j: &[u64], log_c: f64, x: &SpherePoint) -> C64 {
    let (lm, ph) = log_section(j, log_c, x);
    if lm == f64::NEG_INFINITY {
        return C64::new(0.0, 0.0);
    }
    C64::from_polar(lm.exp(), ph)
}
