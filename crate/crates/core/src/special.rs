//! Log-domain helpers shared by the basis, kernel and oracle code.

use statrs::function::gamma::ln_gamma;

/// `ln(m!)`.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 2 {
        return 0.0;
    }
    ln_gamma(m as f64 + 1.0)
}

/// `ln Σ exp(t_i)` with a single max extraction. Returns `-∞` for an empty slice.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + s.ln()
}

/// `ln(vol(S^{2n+1}) / 2π) = n ln π − ln n!`, the total `dV_X` mass.
pub fn ln_total_volume_x(n: usize) -> f64 {
    n as f64 * std::f64::consts::PI.ln() - ln_factorial(n as u64)
}
