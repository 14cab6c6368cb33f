//! Predicted leading terms of the equivariant kernels, and fitting helpers.
//!
//! At `m ∈ M_{0,ν_T}` with `λ = ‖ν_T‖/‖Φ_T(m)‖` the leading terms are
//!
//! ```text
//! Π̃(x + u₁/√k, x + u₂/√k) ≈ A · (k‖ν_T‖/π)^{d_M + (1−d_P)/2}
//!     · Σ_j conj χ(p_j) e^{H(v₁^{(j)}, v₂)} · e^{−i√k(θ₂−θ₁)λ}
//! A = d_ν 2^{d_G/2} / ((√2 π)^{d_T−1} 𝒟(m) ‖Φ_T(m)‖^{d_M+1+(1−d_P)/2})
//! ```
//!
//! summed over the stabilizer `F_x = {p_j}`. The monodromy vectors are
//! `v₁^{(j)} = dμ_{p_j^{-1}}(v₁)`: with the character convention
//! `s(p·x) = conj χ(p) s(x)` this is the orientation for which the leading
//! term inherits the exact identity `Π̃(p_j·y, y') = conj χ(p_j) Π̃(y, y')`.
//! It is computed by Richardson-extrapolated finite differences of the action
//! through the chart.

use crate::actions::{character_angle, StabilizerElement, WeightSystem, MEMBERSHIP_TOL};
use crate::geometry::{hlc_point, metric, omega, to_complex, to_real, AdaptedFrame, TangentVectorX};
use crate::{Error, Result, C64};
use std::f64::consts::PI;

/// Dimension of the irreducible `G`-representation; `G` is a torus here.
pub const D_NU_G: f64 = 1.0;
/// Finite-difference step for monodromy vectors.
pub const MONODROMY_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct LeadingTerm {
    /// Everything except `k^{k_exponent}` and the stabilizer factor.
    pub amplitude: C64,
    pub k_exponent: f64,
    /// `Σ_j conj χ_{ν_P}(p_j) (…)` — the roots-of-unity factor.
    pub stabilizer_factor: C64,
    pub k: f64,
    pub description: String,
}

impl LeadingTerm {
    pub fn value(&self) -> C64 {
        self.amplitude * self.k.powf(self.k_exponent) * self.stabilizer_factor
    }
}

/// `d_M + (1 − d_P)/2`, equal to `d_M − d_P/2 + 1/2`.
pub fn diagonal_exponent(ws: &WeightSystem) -> f64 {
    ws.n() as f64 + (1.0 - ws.d_p() as f64) / 2.0
}

/// `d_M − d_P + 1`, the growth exponent of `dim H(X)_{ν_G, kν_T}`.
pub fn dim_exponent(ws: &WeightSystem) -> f64 {
    ws.n() as f64 - ws.d_p() as f64 + 1.0
}

fn l2(v: &[i64]) -> f64 {
    v.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt()
}

fn phi_t_norm(ws: &WeightSystem, f: &AdaptedFrame) -> Result<f64> {
    let n = ws.moment(&f.x).phi_t_norm();
    if n == 0.0 {
        return Err(Error::ZeroMoment);
    }
    Ok(n)
}

/// `λ_{ν_T} = ‖ν_T‖/‖Φ_T(m)‖`.
pub fn lambda_nu(ws: &WeightSystem, f: &AdaptedFrame, nu_t: &[i64]) -> Result<f64> {
    Ok(l2(nu_t) / phi_t_norm(ws, f)?)
}

fn require_on_locus(ws: &WeightSystem, f: &AdaptedFrame, nu_t: &[i64]) -> Result<()> {
    let d = ws.locus_distance(&f.x, nu_t)?;
    if d > MEMBERSHIP_TOL {
        return Err(Error::OffLocus { residual: d });
    }
    Ok(())
}

/// The exponent `H(v₁, v₂)` at the frame center, `v_l = (θ_l, v_l)`.
pub fn h_exponent(
    ws: &WeightSystem,
    f: &AdaptedFrame,
    nu_t: &[i64],
    u1: &TangentVectorX,
    u2: &TangentVectorX,
) -> Result<C64> {
    let lambda = lambda_nu(ws, f, nu_t)?;
    let phi_norm = phi_t_norm(ws, f)?;
    let eta = ws.eta_vector(f)?;
    let s1 = ws.tangent_split(f, &to_real(&u1.v))?;
    let s2 = ws.tangent_split(f, &to_real(&u2.v))?;
    let b0 = (u2.theta - u1.theta) / phi_norm;
    let eh: Vec<f64> = eta.split.h.iter().map(|x| x * b0).collect();
    let hsum: Vec<f64> = s1.h.iter().zip(&s2.h).map(|(a, b)| a + b).collect();
    let gauss: Vec<f64> = (0..s1.h.len()).map(|i| s1.h[i] - eh[i] - s2.h[i]).collect();
    let im = omega(&s1.v, &s1.t) - omega(&s2.v, &s2.t) + omega(&eh, &hsum) - omega(&s1.h, &s2.h);
    let re = -metric(&s1.t, &s1.t) - metric(&s2.t, &s2.t) - 0.5 * metric(&gauss, &gauss);
    Ok(C64::new(re, im) * lambda)
}

/// `A` in the module docs, without the `k`-power and stabilizer factor.
pub fn leading_amplitude(ws: &WeightSystem, f: &AdaptedFrame, nu_t: &[i64]) -> Result<f64> {
    let e = diagonal_exponent(ws);
    let phi = phi_t_norm(ws, f)?;
    let d = ws.script_d(f)?;
    let pre = D_NU_G * 2f64.powf(ws.d_g() as f64 / 2.0) / (2f64.sqrt() * PI).powi(ws.d_t() as i32 - 1);
    Ok(pre * (l2(nu_t) / PI).powf(e) / (d * phi.powf(ws.n() as f64 + 1.0 + (1.0 - ws.d_p() as f64) / 2.0)))
}

/// `Σ_j conj χ_{ν_P}(p_j)` over the stabilizer of `x`.
pub fn stabilizer_sum(stab: &[StabilizerElement], nu_g: &[i64], nu_t: &[i64], k: i64) -> C64 {
    // Integer multiples of 2π/N are summed exactly by rounding each phase to
    // the nearest N-th root of unity index.
    let n = stab.len() as f64;
    let sum: C64 = stab
        .iter()
        .map(|s| {
            let a = character_angle(&s.sigma, nu_g, nu_t, k);
            let idx = (a * n / (2.0 * PI)).round();
            let snapped = if (a * n / (2.0 * PI) - idx).abs() < 1e-6 { 2.0 * PI * idx / n } else { a };
            C64::from_polar(1.0, -snapped)
        })
        .sum();
    let clean = |c: f64| if c.abs() < 1e-12 { 0.0 } else { c };
    C64::new(clean(sum.re), clean(sum.im))
}

/// Leading term of `Π̃_{ν_G,kν_T}(x, x)` at `x = f.x ∈ X_{0,ν_T}`.
pub fn diagonal_leading(
    ws: &WeightSystem,
    f: &AdaptedFrame,
    nu_g: &[i64],
    nu_t: &[i64],
    k: u64,
) -> Result<LeadingTerm> {
    require_on_locus(ws, f, nu_t)?;
    let amp = leading_amplitude(ws, f, nu_t)?;
    let stab = ws.stabilizer(&f.x)?;
    let k_i = i64::try_from(k).map_err(|_| Error::Overflow)?;
    Ok(LeadingTerm {
        amplitude: C64::new(amp, 0.0),
        k_exponent: diagonal_exponent(ws),
        stabilizer_factor: stabilizer_sum(&stab, nu_g, nu_t, k_i),
        k: k as f64,
        description: format!(
            "diagonal leading term, N_x = {}, exponent d_M + (1 - d_P)/2 = {}",
            stab.len(),
            diagonal_exponent(ws)
        ),
    })
}

/// `dμ_p(v)` at the frame center, in frame coordinates, by Richardson-
/// extrapolated forward differences through the chart.
pub fn monodromy(ws: &WeightSystem, f: &AdaptedFrame, p: &[f64], v: &[C64]) -> Result<Vec<C64>> {
    let nv = crate::geometry::norm(v);
    if nv == 0.0 {
        return Ok(v.to_vec());
    }
    let diff = |h: f64| -> Result<Vec<C64>> {
        let s = h / nv;
        let w: Vec<C64> = v.iter().map(|c| c * s).collect();
        let y = ws.act(p, &hlc_point(f, 0.0, &w)?)?;
        let c = f.chart_coords(&y).ok_or(Error::NotLocallyFree)?;
        Ok(c.v.iter().map(|z| z / s).collect())
    };
    let (a, b) = (diff(MONODROMY_STEP)?, diff(MONODROMY_STEP / 2.0)?);
    Ok(a.iter().zip(&b).map(|(x, y)| (4.0 * y - x) / 3.0).collect())
}

fn inverse(p: &[f64]) -> Vec<f64> {
    p.iter().map(|x| (-x).rem_euclid(2.0 * PI)).collect()
}

/// Leading term of `Π̃(x + u₁/√k, p₀·(x + u₂/√k))`; `p0 = None` is the identity.
#[allow(clippy::too_many_arguments)]
pub fn near_diagonal_leading(
    ws: &WeightSystem,
    f: &AdaptedFrame,
    nu_g: &[i64],
    nu_t: &[i64],
    k: u64,
    u1: &TangentVectorX,
    u2: &TangentVectorX,
    p0: Option<&[f64]>,
) -> Result<C64> {
    require_on_locus(ws, f, nu_t)?;
    let kf = k as f64;
    let window = crate::kernel::WINDOW_C * kf.powf(1.0 / 9.0);
    for u in [u1, u2] {
        if crate::geometry::norm(&u.v) > window {
            log::warn!("displacement outside the k^(1/9) window");
        }
    }
    let amp = leading_amplitude(ws, f, nu_t)?;
    let lambda = lambda_nu(ws, f, nu_t)?;
    let stab = ws.stabilizer(&f.x)?;
    let k_i = i64::try_from(k).map_err(|_| Error::Overflow)?;
    let twist = match p0 {
        Some(p) => character_angle(p, nu_g, nu_t, k_i),
        None => 0.0,
    };
    let mut sum = C64::new(0.0, 0.0);
    for s in &stab {
        let v1j = monodromy(ws, f, &inverse(&s.sigma), &u1.v)?;
        let u1j = TangentVectorX { theta: u1.theta, v: v1j };
        let h = h_exponent(ws, f, nu_t, &u1j, u2)?;
        // conj χ(p_j p₀^{-1}) = e^{-i(angle(p_j) - angle(p₀))}
        let phase = -(character_angle(&s.sigma, nu_g, nu_t, k_i) - twist);
        sum += C64::from_polar(1.0, phase) * h.exp();
    }
    let fiber = C64::from_polar(1.0, -kf.sqrt() * (u2.theta - u1.theta) * lambda);
    Ok(amp * kf.powf(diagonal_exponent(ws)) * sum * fiber)
}

/// The constant `C` with `dim H(X)_{ν_G,kν_T} ≈ C (k‖ν_T‖/π)^{d_M−d_P+1}`,
/// by quadrature over the locus.
#[derive(Debug, Clone, PartialEq)]
pub struct DimPrediction {
    pub constant: f64,
    pub exponent: f64,
    /// Quadrature nodes used.
    pub nodes: usize,
}

/// `(d_ν²/(2π)^{d_T−1}) ∫_{M_{0,ν_T}} f ‖Φ_T‖^{−(d_M+2−d_P)}/𝒟 dV_M`.
pub fn locus_integral<F>(ws: &WeightSystem, nu_t: &[i64], f: F, count: usize, seed: u64) -> Result<(f64, usize)>
where
    F: Fn(&crate::geometry::SpherePoint) -> f64,
{
    let nodes = ws.locus_sample(nu_t, count, seed)?;
    let power = -(ws.n() as f64 + 2.0 - ws.d_p() as f64);
    let mut total = 0.0;
    for node in &nodes {
        let frame = crate::geometry::frame_at(&node.point);
        let phi = ws.moment(&node.point).phi_t_norm();
        let d = ws.script_d(&frame)?;
        total += node.weight * f(&node.point) * phi.powf(power) / d;
    }
    let pre = D_NU_G * D_NU_G / (2.0 * PI).powi(ws.d_t() as i32 - 1);
    Ok((pre * total, nodes.len()))
}

pub fn dim_prediction(ws: &WeightSystem, nu_t: &[i64], count: usize, seed: u64) -> Result<DimPrediction> {
    let (constant, nodes) = locus_integral(ws, nu_t, |_| 1.0, count, seed)?;
    Ok(DimPrediction {
        constant,
        exponent: dim_exponent(ws),
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            what: "fit samples",
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(LineFit {
        slope,
        intercept,
        residual: (rss / n).sqrt(),
    })
}

/// Least-squares fit of `ln|value|` against `ln k`; needs ≥ 4 positive samples.
pub fn fit_exponent(series: &[(f64, f64)]) -> Result<LineFit> {
    if series.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            got: series.len(),
        });
    }
    if let Some(&(k, v)) = series.iter().find(|(k, v)| !(*k > 0.0 && *v > 0.0)) {
        return Err(Error::InvalidArgument(format!("nonpositive sample ({k}, {v}) in exponent fit")));
    }
    let xs: Vec<f64> = series.iter().map(|(k, _)| k.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|(_, v)| v.ln()).collect();
    fit_line(&xs, &ys)
}

/// Running means `(1/i) Σ_{l<i} values[l]`.
pub fn cesaro_means(values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            acc += v;
            acc / (i + 1) as f64
        })
        .collect()
}

/// A purely transversal unit vector at the frame center: `J val(b)`
/// normalized, for the first kernel basis vector `b`.
pub fn transversal_unit(ws: &WeightSystem, f: &AdaptedFrame) -> Result<Vec<C64>> {
    let basis = ws.moment_kernel_basis(&f.x)?;
    let b = basis
        .first()
        .ok_or_else(|| Error::InvalidArgument("d_P = 1: no transversal directions".into()))?;
    let v = crate::geometry::apply_j(&ws.infinitesimal_action(b, f)?);
    let n = metric(&v, &v).sqrt();
    if n < 1e-12 {
        return Err(Error::Transversality { det: n * n });
    }
    Ok(to_complex(&v.iter().map(|x| x / n).collect::<Vec<_>>()))
}
