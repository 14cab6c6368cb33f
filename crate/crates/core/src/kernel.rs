//! Evaluation of `Π̃_{ν_G,kν_T}(x, y) = Σ_J c_J x^J conj(y)^J`.
//!
//! Every term is formed in the log domain as `(ln|term|, arg term)`; the
//! largest log-magnitude is extracted once and the remaining terms are summed
//! as mantissas. On the diagonal all terms are positive so there is no
//! cancellation at all.

use crate::geometry::{hermitian, hlc_point, norm, AdaptedFrame, SpherePoint, TangentVectorX};
use crate::hardy::{log_abs_sq_section, IsotypeBasis};
use crate::special::{ln_factorial, log_sum_exp};
use crate::{Result, C64};
use std::f64::consts::PI;

/// Constant `C` in the window `‖v‖ ≤ C k^{1/9}` of the rescaled expansion.
pub const WINDOW_C: f64 = 1.0;

/// `Π̃(x, y)` as `e^{scale} · mantissa`; `scale = −∞` for an empty sum.
pub fn szego_eval_scaled(b: &IsotypeBasis, x: &SpherePoint, y: &SpherePoint) -> (f64, C64) {
    let lx: Vec<f64> = x.coords().iter().map(|z| z.norm().ln()).collect();
    let ly: Vec<f64> = y.coords().iter().map(|z| z.norm().ln()).collect();
    let ax: Vec<f64> = x.coords().iter().map(|z| z.arg()).collect();
    let ay: Vec<f64> = y.coords().iter().map(|z| z.arg()).collect();
    let terms: Vec<(f64, f64)> = b
        .entries
        .iter()
        .map(|e| {
            let mut mag = e.log_c;
            let mut ph = 0.0;
            for (i, &ji) in e.j.as_slice().iter().enumerate() {
                if ji == 0 {
                    continue;
                }
                let jf = ji as f64;
                mag += jf * (lx[i] + ly[i]);
                ph += jf * (ax[i] - ay[i]);
            }
            (mag, ph)
        })
        .filter(|(m, _)| *m > f64::NEG_INFINITY && !m.is_nan())
        .collect();
    let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, C64::new(0.0, 0.0));
    }
    let sum: C64 = terms.iter().map(|&(m, p)| C64::from_polar((m - max).exp(), p)).sum();
    (max, sum)
}

pub fn szego_eval(b: &IsotypeBasis, x: &SpherePoint, y: &SpherePoint) -> C64 {
    let (s, m) = szego_eval_scaled(b, x, y);
    if s == f64::NEG_INFINITY {
        return C64::new(0.0, 0.0);
    }
    m * s.exp()
}

/// `ln Π̃(x, x)`; `−∞` when the kernel vanishes at `x`.
pub fn szego_log_diag(b: &IsotypeBasis, x: &SpherePoint) -> f64 {
    let terms: Vec<f64> = b
        .entries
        .iter()
        .map(|e| log_abs_sq_section(e.j.as_slice(), e.log_c, x))
        .collect();
    log_sum_exp(&terms)
}

pub fn szego_diag(b: &IsotypeBasis, x: &SpherePoint) -> f64 {
    szego_log_diag(b, x).exp()
}

/// Chart point `x + (θ/√k, v/√k)`.
pub fn rescaled_point(f: &AdaptedFrame, u: &TangentVectorX, k: f64) -> Result<SpherePoint> {
    let s = k.sqrt();
    let v: Vec<C64> = u.v.iter().map(|c| c / s).collect();
    hlc_point(f, u.theta / s, &v)
}

/// `Π̃(x + u₁/√k, x + u₂/√k)` in the chart of `f`. Displacements beyond the
/// window `‖v‖ ≤ C k^{1/9}` are evaluated but logged as a warning.
pub fn szego_rescaled(
    b: &IsotypeBasis,
    f: &AdaptedFrame,
    u1: &TangentVectorX,
    u2: &TangentVectorX,
    k: f64,
) -> Result<C64> {
    let window = WINDOW_C * k.powf(1.0 / 9.0);
    for u in [u1, u2] {
        let nv = norm(&u.v);
        if nv > window {
            log::warn!("rescaled displacement |v| = {nv:.3} exceeds the window {window:.3}");
        }
    }
    let p1 = rescaled_point(f, u1, k)?;
    let p2 = rescaled_point(f, u2, k)?;
    Ok(szego_eval(b, &p1, &p2))
}

/// The full level-`k` kernel `((k+n)!/(πⁿ k!)) ⟨x, y⟩^k` of `ℂ^{n+1}`'s
/// degree-`k` polynomials.
pub fn level_kernel_closed(n: usize, k: u64, x: &SpherePoint, y: &SpherePoint) -> C64 {
    let h = hermitian(x.coords(), y.coords());
    if k == 0 {
        return C64::new((ln_factorial(n as u64) - n as f64 * PI.ln()).exp(), 0.0);
    }
    if h.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let log_mag = ln_factorial(k + n as u64) - n as f64 * PI.ln() - ln_factorial(k) + k as f64 * h.norm().ln();
    C64::from_polar(log_mag.exp(), k as f64 * h.arg())
}
