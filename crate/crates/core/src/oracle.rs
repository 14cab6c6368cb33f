//! Independent references: exhaustive lattice scans, exact rational kernels,
//! Monte Carlo sphere integrals, finite-difference geometry, and the closed
//! forms of the two worked examples.
//!
//! Nothing here reuses the enumeration, Smith-form, or log-domain code paths
//! of the main modules, so agreement is a genuine cross-check.

use crate::actions::WeightSystem;
use crate::geometry::{hermitian, metric, to_real, AdaptedFrame, SpherePoint};
use crate::hardy::{degree_bound, IsotypeBasis};
use crate::lattice::{determinant, IntMatrix};
use crate::special::{ln_factorial, ln_total_volume_x};
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Bit budget for exact rational arithmetic.
pub const EXACT_BITS: u64 = 4096;
/// Minimum Monte Carlo sample count.
pub const MIN_MC_SAMPLES: usize = 1000;
const MC_CHUNK: usize = 1 << 14;

// ---------------------------------------------------------------------------
// Lattice scans

fn check_bound(ws: &WeightSystem, nu_t: &[i64], k: u64, bound: u64) -> Result<()> {
    let required = degree_bound(ws, nu_t, k);
    if bound < required {
        return Err(Error::OracleBound { bound, required });
    }
    Ok(())
}

/// Visits every `J ≥ 0` with `|J| ≤ bound` (naive nested scan).
fn scan(dim: usize, bound: u64, mut visit: impl FnMut(&[u64])) {
    let mut j = vec![0u64; dim];
    loop {
        visit(&j);
        // Odometer increment restricted to |J| ≤ bound.
        let mut i = 0;
        loop {
            if i == dim {
                return;
            }
            j[i] += 1;
            if j.iter().sum::<u64>() <= bound {
                break;
            }
            j[i] = 0;
            i += 1;
        }
    }
}

fn apply(w: &IntMatrix, j: &[u64]) -> Vec<i64> {
    w.iter()
        .map(|r| r.iter().zip(j).map(|(&a, &b)| a * b as i64).sum())
        .collect()
}

/// `#{J : |J| ≤ bound, W_G J = ν_G, W_T J = kν_T}` by exhaustive scan.
pub fn brute_dim(ws: &WeightSystem, nu_g: &[i64], nu_t: &[i64], k: u64, bound: u64) -> Result<u64> {
    check_bound(ws, nu_t, k, bound)?;
    let tgt_t: Vec<i64> = nu_t.iter().map(|&v| v * k as i64).collect();
    let mut count = 0;
    scan(ws.n() + 1, bound, |j| {
        if apply(ws.w_g(), j) == nu_g && apply(ws.w_t(), j) == tgt_t {
            count += 1;
        }
    });
    Ok(count)
}

/// `brute_dim` for every `k ∈ 0..=k_max` from a single scan.
pub fn brute_dim_table(ws: &WeightSystem, nu_g: &[i64], nu_t: &[i64], k_max: u64, bound: u64) -> Result<Vec<u64>> {
    check_bound(ws, nu_t, k_max, bound)?;
    let lead = nu_t
        .iter()
        .position(|&v| v != 0)
        .ok_or_else(|| Error::InvalidArgument("nu_T must be nonzero".into()))?;
    let mut table = vec![0u64; k_max as usize + 1];
    scan(ws.n() + 1, bound, |j| {
        if apply(ws.w_g(), j) != nu_g {
            return;
        }
        let t = apply(ws.w_t(), j);
        if t[lead] % nu_t[lead] != 0 {
            return;
        }
        let k = t[lead] / nu_t[lead];
        if k < 0 || k as u64 > k_max {
            return;
        }
        if t.iter().zip(nu_t).all(|(&a, &v)| a == v * k) {
            table[k as usize] += 1;
        }
    });
    Ok(table)
}

/// Stabilizer order by scanning the grid `(2π/|det B|)ℤ^{d_P}` for a
/// nonsingular square block `B` of support weights.
pub fn stabilizer_grid_count(ws: &WeightSystem, x: &SpherePoint) -> Result<u64> {
    let support: Vec<usize> = (0..=ws.n()).filter(|&i| x.coords()[i].norm() > 1e-12).collect();
    let d_p = ws.d_p();
    let rows: IntMatrix = support.iter().map(|&i| ws.weight(i)).collect();
    // First nonsingular d_P-row subset, lexicographically.
    let mut pick: Option<i64> = None;
    let mut idx: Vec<usize> = (0..d_p).collect();
    if rows.len() >= d_p {
        loop {
            let b: IntMatrix = idx.iter().map(|&i| rows[i].clone()).collect();
            let det = determinant(&b)?;
            if det != 0 {
                pick = Some(det.abs());
                break;
            }
            // next combination
            let mut i = d_p;
            while i > 0 && idx[i - 1] == rows.len() - d_p + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for t in i..d_p {
                idx[t] = idx[t - 1] + 1;
            }
        }
    }
    let m = pick.ok_or(Error::NotLocallyFree)?;
    let total = (m as u128).pow(d_p as u32);
    if total > 1 << 24 {
        return Err(Error::StabilizerTooLarge { order: total });
    }
    let mut count = 0;
    let mut a = vec![0i64; d_p];
    for _ in 0..total {
        if rows
            .iter()
            .all(|w| w.iter().zip(&a).map(|(x, y)| x * y).sum::<i64>().rem_euclid(m) == 0)
        {
            count += 1;
        }
        for slot in a.iter_mut() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
    }
    Ok(count)
}

// ---------------------------------------------------------------------------
// Exact kernels

pub type GaussRational = Complex<BigRational>;

/// An exact kernel value `(re + i·im)·π^{−n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactValue {
    pub value: GaussRational,
    pub n: usize,
}

impl ExactValue {
    pub fn to_c64(&self) -> C64 {
        let s = PI.powi(-(self.n as i32));
        C64::new(ratio_to_f64(&self.value.re) * s, ratio_to_f64(&self.value.im) * s)
    }
}

/// `BigRational → f64` without intermediate overflow.
pub fn ratio_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let (num, den) = (q.numer(), q.denom());
    let shift = num.bits() as i64 - den.bits() as i64;
    // Bring the quotient into [2^52, 2^54) before converting.
    let scaled = if shift > 53 {
        num.clone() / (den.clone() << (shift - 53) as usize)
    } else {
        (num.clone() << (53 - shift) as usize) / den.clone()
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi((shift - 53) as i32)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn bits(q: &BigRational) -> u64 {
    q.numer().bits().max(q.denom().bits())
}

fn check_budget(q: &GaussRational) -> Result<()> {
    if bits(&q.re).max(bits(&q.im)) > EXACT_BITS {
        return Err(Error::PrecisionBudget { bits: EXACT_BITS });
    }
    Ok(())
}

fn factorial(m: u64) -> BigInt {
    (2..=m).fold(BigInt::one(), |acc, v| acc * v)
}

/// `Σ_J ((|J|+n)!/J!) Π w_i^{J_i}` with `w_i = x_i conj(y_i)` given exactly.
fn exact_sum(b: &IsotypeBasis, w: &[GaussRational]) -> Result<ExactValue> {
    let n = b.n();
    if w.len() != n + 1 {
        return Err(Error::Dimension {
            what: "exact point",
            expected: n + 1,
            found: w.len(),
        });
    }
    let mut acc = GaussRational::new(BigRational::zero(), BigRational::zero());
    for e in &b.entries {
        let j = e.j.as_slice();
        let mut coef = factorial(e.j.degree() + n as u64);
        for &ji in j {
            coef /= factorial(ji);
        }
        let mut term = GaussRational::new(BigRational::from_integer(coef), BigRational::zero());
        for (wi, &ji) in w.iter().zip(j) {
            for _ in 0..ji {
                term *= wi.clone();
                check_budget(&term)?;
            }
        }
        acc += term;
        check_budget(&acc)?;
    }
    Ok(ExactValue { value: acc, n })
}

fn norm_sq(z: &[GaussRational]) -> BigRational {
    z.iter()
        .map(|c| c.re.clone() * c.re.clone() + c.im.clone() * c.im.clone())
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `Π̃(x, y)·πⁿ` exactly, for points with Gaussian-rational coordinates on the unit sphere.
pub fn exact_kernel_small(b: &IsotypeBasis, x: &[GaussRational], y: &[GaussRational]) -> Result<ExactValue> {
    for p in [x, y] {
        if norm_sq(p) != BigRational::one() {
            return Err(Error::NotUnit {
                norm: ratio_to_f64(&norm_sq(p)).sqrt(),
            });
        }
    }
    let w: Vec<GaussRational> = x.iter().zip(y).map(|(a, c)| a * c.conj()).collect();
    exact_sum(b, &w)
}

/// `Π̃(x, x)·πⁿ` exactly, given the squared moduli `r_i = |x_i|²` (summing to 1).
pub fn exact_diag_small(b: &IsotypeBasis, r: &[BigRational]) -> Result<ExactValue> {
    let total = r.iter().fold(BigRational::zero(), |a, c| a + c);
    if total != BigRational::one() {
        return Err(Error::NotUnit {
            norm: ratio_to_f64(&total).sqrt(),
        });
    }
    let w: Vec<GaussRational> = r.iter().map(|v| GaussRational::new(v.clone(), BigRational::zero())).collect();
    exact_sum(b, &w)
}

/// `SpherePoint` from Gaussian-rational coordinates.
pub fn to_sphere_point(z: &[GaussRational]) -> Result<SpherePoint> {
    SpherePoint::normalized(z.iter().map(|c| C64::new(ratio_to_f64(&c.re), ratio_to_f64(&c.im))).collect())
}

// ---------------------------------------------------------------------------
// Closed forms of the worked examples

/// `(2b+ν+1)!/(π (b+ν)! b!)`, the single coefficient on `ℙ¹`, via `ln Γ`.
pub fn p1_coefficient(b: u64, nu_g: u64) -> f64 {
    (ln_factorial(2 * b + nu_g + 1) - PI.ln() - ln_factorial(b + nu_g) - ln_factorial(b)).exp()
}

/// The stated Stirling form `(2/√π)√b (1/y_b)^{b+ν}(1/(1−y_b))^b`, `y_b = (b+ν)/(2b+ν)`.
pub fn stirling_p1(b: u64, nu_g: u64) -> f64 {
    let (bf, nf) = (b as f64, nu_g as f64);
    let y = (bf + nf) / (2.0 * bf + nf);
    let log = (2.0 / PI.sqrt()).ln() + 0.5 * bf.ln() - (bf + nf) * y.ln() - bf * (1.0 - y).ln();
    log.exp()
}

/// Limit form `2√(b/π)` as stated for the `ℙ¹` diagonal at `|z₀| = |z₁|`.
pub fn stirling_p1_limit(b: u64) -> f64 {
    2.0 * (b as f64 / PI).sqrt()
}

/// Actual limit `2√b/π^{3/2}` of the `ℙ¹` diagonal at `|z₀| = |z₁|`.
pub fn p1_limit_corrected(b: u64) -> f64 {
    2.0 * (b as f64).sqrt() / PI.powf(1.5)
}

/// `(3c+ν₁+2ν₂+2)!/(π² (c+ν₁+ν₂)! (c+ν₂)! c!)`, via `ln Γ`.
pub fn p2_coefficient(c: u64, nu1: u64, nu2: u64) -> f64 {
    (ln_factorial(3 * c + nu1 + 2 * nu2 + 2)
        - 2.0 * PI.ln()
        - ln_factorial(c + nu1 + nu2)
        - ln_factorial(c + nu2)
        - ln_factorial(c))
    .exp()
}

/// The stated Stirling form for the `ℙ²` coefficient.
pub fn stirling_p2(c: u64, nu1: u64, nu2: u64) -> f64 {
    let (cf, a, b) = (c as f64, nu1 as f64, nu2 as f64);
    let big = 3.0 * cf + a + 2.0 * b;
    let log = (9.0 * 3f64.sqrt() * cf / (2.0 * PI.powi(3))).ln()
        + (cf + a + b) * (big / (cf + a + b)).ln()
        + (cf + b) * (big / (cf + b)).ln()
        + cf * (big / cf).ln();
    log.exp()
}

/// Limit form `(9√3 c/2π³)·3^{−(ν₁+2ν₂)}` as stated for the `ℙ²` diagonal at `|z_i|² = 1/3`.
pub fn stirling_p2_limit(c: u64, nu1: u64, nu2: u64) -> f64 {
    9.0 * 3f64.sqrt() * c as f64 / (2.0 * PI.powi(3)) * 3f64.powi(-((nu1 + 2 * nu2) as i32))
}

/// Actual limit `9√3 c/(2π³)` of the `ℙ²` diagonal at `|z_i|² = 1/3`.
pub fn p2_limit_corrected(c: u64) -> f64 {
    9.0 * 3f64.sqrt() * c as f64 / (2.0 * PI.powi(3))
}

// ---------------------------------------------------------------------------
// Monte Carlo on the sphere

/// Estimate with its standard error (for complex values, `stderr` combines
/// the real and imaginary standard errors in quadrature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: C64,
    pub stderr: f64,
}

impl McEstimate {
    /// `|value − expected| ≤ sigmas · stderr`.
    pub fn within(&self, expected: C64, sigmas: f64) -> bool {
        (self.value - expected).norm() <= sigmas * self.stderr
    }
}

/// Uniform point of `S^{2n+1}`.
pub fn sphere_sample(rng: &mut ChaCha8Rng, n: usize) -> SpherePoint {
    loop {
        let z: Vec<C64> = (0..=n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
            .collect();
        if let Ok(p) = SpherePoint::normalized(z) {
            return p;
        }
    }
}

/// `∫_{S^{2n+1}} g_m dσ/(2π)` for `m` integrands at once, uniform sampling via
/// normalized complex Gaussians. Chunk `c` uses ChaCha8 stream `c`, so the
/// result does not depend on the thread count.
pub fn mc_sphere_integrals<F>(g: F, m: usize, n: usize, samples: usize, seed: u64) -> Result<Vec<McEstimate>>
where
    F: Fn(&SpherePoint, &mut [C64]) + Sync,
{
    if samples < MIN_MC_SAMPLES {
        return Err(Error::QuadratureBudget(format!(
            "{samples} Monte Carlo samples (minimum {MIN_MC_SAMPLES})"
        )));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Vec<[f64; 4]>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut acc = vec![[0.0f64; 4]; m];
            let mut buf = vec![C64::new(0.0, 0.0); m];
            for _ in 0..count {
                let x = sphere_sample(&mut rng, n);
                g(&x, &mut buf);
                for (a, v) in acc.iter_mut().zip(&buf) {
                    a[0] += v.re;
                    a[1] += v.im;
                    a[2] += v.re * v.re;
                    a[3] += v.im * v.im;
                }
            }
            acc
        })
        .collect();
    let vol = ln_total_volume_x(n).exp();
    let nf = samples as f64;
    Ok((0..m)
        .map(|i| {
            let mut s = [0.0f64; 4];
            for p in &partial {
                for t in 0..4 {
                    s[t] += p[i][t];
                }
            }
            let mean = C64::new(s[0] / nf, s[1] / nf);
            let var_re = (s[2] / nf - mean.re * mean.re).max(0.0);
            let var_im = (s[3] / nf - mean.im * mean.im).max(0.0);
            McEstimate {
                value: mean * vol,
                stderr: vol * ((var_re + var_im) / (nf - 1.0)).sqrt(),
            }
        })
        .collect())
}

/// Single real integrand version of [`mc_sphere_integrals`]: `(estimate, stderr)`.
pub fn mc_sphere_integral<F>(g: F, n: usize, samples: usize, seed: u64) -> Result<(f64, f64)>
where
    F: Fn(&SpherePoint) -> f64 + Sync,
{
    let est = mc_sphere_integrals(|x, out| out[0] = C64::new(g(x), 0.0), 1, n, samples, seed)?;
    Ok((est[0].value.re, est[0].stderr))
}

/// `ln ∫_{S^{2n+1}} Π|z_i|^{2J_i} dσ = ln(2π^{n+1} J!/(n+|J|)!)`.
pub fn log_dirichlet_moment(j: &[u64], n: usize) -> f64 {
    let deg: u64 = j.iter().sum();
    (2.0f64).ln() + (n + 1) as f64 * PI.ln() + j.iter().map(|&v| ln_factorial(v)).sum::<f64>()
        - ln_factorial(n as u64 + deg)
}

/// `∫_{S^{2n+1}} Π|z_i|^{2J_i} dσ` (Euclidean surface measure).
pub fn dirichlet_moment(j: &[u64], n: usize) -> f64 {
    log_dirichlet_moment(j, n).exp()
}

// ---------------------------------------------------------------------------
// Finite-difference geometry

/// `𝒟(m)` from central differences of the action curves (step `h`).
pub fn script_d_fd(ws: &WeightSystem, f: &AdaptedFrame, h: f64) -> Result<f64> {
    let basis = ws.moment_kernel_basis(&f.x)?;
    let fields: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            let step = |s: f64| {
                let p: Vec<f64> = b.iter().map(|v| v * s).collect();
                ws.act(&p, &f.x)
            };
            let (a, c) = (step(h)?, step(-h)?);
            let d: Vec<C64> = a.coords().iter().zip(c.coords()).map(|(u, v)| (u - v) / (2.0 * h)).collect();
            Ok(to_real(&f.base_coords(&d)))
        })
        .collect::<Result<_>>()?;
    if fields.is_empty() {
        return Ok(1.0);
    }
    let g = DMatrix::from_fn(fields.len(), fields.len(), |i, j| metric(&fields[i], &fields[j]));
    Ok(g.determinant().max(0.0).sqrt())
}

/// Fubini–Study volume of the phase torus `{[√r₀ : √r₁ e^{iφ₁} : …]}` by a
/// midpoint rule on a `steps^n` grid, with the metric from central differences
/// of the embedding (horizontal part of `dz`).
pub fn torus_volume_fd(r: &[f64], steps: usize) -> Result<f64> {
    let n = r.len() - 1;
    let h = 1e-5;
    let cell = (2.0 * PI / steps as f64).powi(n as i32);
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    let count = steps.pow(n as u32);
    for _ in 0..count {
        let phases: Vec<f64> = std::iter::once(0.0)
            .chain(idx.iter().map(|&a| 2.0 * PI * (a as f64 + 0.5) / steps as f64))
            .collect();
        let x = SpherePoint::from_moduli_sq(r, &phases)?;
        let tangents: Vec<Vec<C64>> = (0..n)
            .map(|l| {
                let mut pp = phases.clone();
                pp[l + 1] += h;
                let a = SpherePoint::from_moduli_sq(r, &pp).unwrap();
                pp[l + 1] -= 2.0 * h;
                let c = SpherePoint::from_moduli_sq(r, &pp).unwrap();
                let mut d: Vec<C64> = a.coords().iter().zip(c.coords()).map(|(u, v)| (u - v) / (2.0 * h)).collect();
                let proj = hermitian(&d, x.coords());
                for (di, xi) in d.iter_mut().zip(x.coords()) {
                    *di -= proj * xi;
                }
                d
            })
            .collect();
        let g = DMatrix::from_fn(n, n, |i, j| hermitian(&tangents[i], &tangents[j]).re);
        total += g.determinant().max(0.0).sqrt() * cell;
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < steps {
                break;
            }
            *slot = 0;
        }
    }
    Ok(total)
}

/// Exact rational `|value|` for a real exact value, as `f64`.
pub fn exact_abs(v: &ExactValue) -> f64 {
    let re = v.value.re.abs();
    ratio_to_f64(&re) * PI.powi(-(v.n as i32))
}
