//! Berezin–Toeplitz operators `T[f] = Π̃ ∘ M_f ∘ Π̃` on a single isotype.
//!
//! Matrices are taken in the orthonormal monomial basis of the isotype,
//! `M[i][j] = ∫_X f s_i conj(s_j) dV_X`. For radial `f` (a function of
//! `r = (|z_i|²)`, hence invariant under both tori) the matrix is diagonal and
//! its entries are exact Dirichlet moments; any `f` can be assembled by Monte
//! Carlo on the sphere.

use crate::actions::WeightSystem;
use crate::asymptotics::{diagonal_exponent, lambda_nu, leading_amplitude, locus_integral, dim_exponent};
use crate::geometry::{metric, to_real, AdaptedFrame, SpherePoint};
use crate::hardy::{eval_section, log_section, IsotypeBasis};
use crate::kernel::szego_eval;
use crate::oracle::{mc_sphere_integrals, McEstimate};
use crate::special::ln_factorial;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Largest basis for which a Monte Carlo matrix is assembled.
pub const MAX_MC_DIM: usize = 64;
/// Default Monte Carlo budget.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

/// A function on `M`, pulled back to `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Constant(f64),
    /// `Σ coef · Π r_i^{e_i}` with `r_i = |z_i|²`.
    RadialPolynomial(Vec<RadialTerm>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTerm {
    pub coef: f64,
    pub exps: Vec<u32>,
}

impl Observable {
    /// `r₀ r₁ ⋯` style monomial with unit coefficient.
    pub fn monomial(exps: Vec<u32>) -> Self {
        Observable::RadialPolynomial(vec![RadialTerm { coef: 1.0, exps }])
    }

    pub fn eval_r(&self, r: &[f64]) -> f64 {
        match self {
            Observable::Constant(c) => *c,
            Observable::RadialPolynomial(terms) => terms
                .iter()
                .map(|t| t.coef * t.exps.iter().zip(r).map(|(&e, x)| x.powi(e as i32)).product::<f64>())
                .sum(),
        }
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        self.eval_r(&x.moduli_sq())
    }

    /// `Σ |coef| ≥ sup |f|` on the sphere.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Observable::Constant(c) => c.abs(),
            Observable::RadialPolynomial(terms) => terms.iter().map(|t| t.coef.abs()).sum(),
        }
    }

    pub fn is_nonnegative_coefficients(&self) -> bool {
        match self {
            Observable::Constant(c) => *c >= 0.0,
            Observable::RadialPolynomial(terms) => terms.iter().all(|t| t.coef >= 0.0),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if let Observable::RadialPolynomial(terms) = self {
            for t in terms {
                if t.exps.len() != n + 1 {
                    return Err(Error::Dimension {
                        what: "observable exponents",
                        expected: n + 1,
                        found: t.exps.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `∫_X f |s_J|² dV_X` for `‖s_J‖ = 1`, exact.
    fn diagonal_entry(&self, j: &[u64], n: usize) -> f64 {
        match self {
            Observable::Constant(c) => *c,
            Observable::RadialPolynomial(terms) => {
                let deg: u64 = j.iter().sum();
                let base = ln_factorial(deg + n as u64) - j.iter().map(|&v| ln_factorial(v)).sum::<f64>();
                terms
                    .iter()
                    .map(|t| {
                        let e: u64 = t.exps.iter().map(|&v| v as u64).sum();
                        let num: f64 = j.iter().zip(&t.exps).map(|(&a, &b)| ln_factorial(a + b as u64)).sum();
                        t.coef * (base + num - ln_factorial(deg + e + n as u64)).exp()
                    })
                    .sum()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Quadrature {
    /// Exact simplex moments; radial observables only.
    Dirichlet,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzMatrix {
    pub entries: DMatrix<C64>,
    /// Entrywise standard errors (Monte Carlo only).
    pub stderr: Option<DMatrix<f64>>,
}

impl ToeplitzMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_diagonal(&self) -> bool {
        self.stderr.is_none()
            && (0..self.dim()).all(|i| (0..self.dim()).all(|j| i == j || self.entries[(i, j)] == C64::new(0.0, 0.0)))
    }

    /// Eigenvalues (ascending) of the Hermitian matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `M[i][j] = ∫_X f s_i conj(s_j) dV_X`, Hermitian by construction.
pub fn toeplitz_matrix(b: &IsotypeBasis, f: &Observable, quad: Quadrature) -> Result<ToeplitzMatrix> {
    let n = b.n();
    f.check(n)?;
    let d = b.dim();
    match quad {
        Quadrature::Dirichlet => {
            let mut m = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
            for (i, e) in b.entries.iter().enumerate() {
                m[(i, i)] = C64::new(f.diagonal_entry(e.j.as_slice(), n), 0.0);
            }
            Ok(ToeplitzMatrix {
                entries: m,
                stderr: None,
            })
        }
        Quadrature::MonteCarlo { samples, seed } => {
            if d > MAX_MC_DIM {
                return Err(Error::QuadratureBudget(format!(
                    "Monte Carlo assembly of a {d}-dimensional matrix (limit {MAX_MC_DIM})"
                )));
            }
            let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
            // All entries share the sample points, which keeps the estimate
            // exactly Hermitian and makes f ≥ 0 give a PSD matrix.
            let est = mc_sphere_integrals(
                |z, out| {
                    let fz = f.eval(z);
                    let s: Vec<C64> = b.entries.iter().map(|e| eval_section(e.j.as_slice(), e.log_c, z)).collect();
                    for (slot, &(i, j)) in out.iter_mut().zip(&pairs) {
                        *slot = s[i] * s[j].conj() * fz;
                    }
                },
                pairs.len(),
                n,
                samples,
                seed,
            )?;
            let mut m = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
            let mut se = DMatrix::from_element(d, d, 0.0);
            for (e, &(i, j)) in est.iter().zip(&pairs) {
                let v = if i == j { C64::new(e.value.re, 0.0) } else { e.value };
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
                se[(i, j)] = e.stderr;
                se[(j, i)] = e.stderr;
            }
            Ok(ToeplitzMatrix {
                entries: m,
                stderr: Some(se),
            })
        }
    }
}

/// Matrix route: `Σ_{i,j} M[j][i] s_i(x) conj(s_j(y))`.
pub fn toeplitz_kernel_from_matrix(b: &IsotypeBasis, m: &ToeplitzMatrix, x: &SpherePoint, y: &SpherePoint) -> C64 {
    let lx: Vec<(f64, f64)> = b.entries.iter().map(|e| log_section(e.j.as_slice(), e.log_c, x)).collect();
    let ly: Vec<(f64, f64)> = b.entries.iter().map(|e| log_section(e.j.as_slice(), e.log_c, y)).collect();
    let mut terms: Vec<(f64, C64)> = Vec::new();
    for (i, &(mx, px)) in lx.iter().enumerate() {
        for (j, &(my, py)) in ly.iter().enumerate() {
            let c = m.entries[(j, i)];
            let mag = mx + my;
            if c == C64::new(0.0, 0.0) || mag == f64::NEG_INFINITY {
                continue;
            }
            terms.push((mag, c * C64::from_polar(1.0, px - py)));
        }
    }
    let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return C64::new(0.0, 0.0);
    }
    let sum: C64 = terms.iter().map(|(l, c)| c * (l - max).exp()).sum();
    sum * max.exp()
}

/// Integral route: `∫_X Π̃(x, z) f(z) Π̃(z, y) dV_X(z)` by Monte Carlo.
pub fn toeplitz_kernel_integral(
    b: &IsotypeBasis,
    f: &Observable,
    x: &SpherePoint,
    y: &SpherePoint,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    f.check(b.n())?;
    let est = mc_sphere_integrals(
        |z, out| out[0] = szego_eval(b, x, z) * szego_eval(b, z, y) * f.eval(z),
        1,
        b.n(),
        samples,
        seed,
    )?;
    Ok(est[0])
}

/// `T[f](x, y)`: Monte Carlo quadrature uses the integral route, Dirichlet the
/// exact diagonal matrix.
pub fn toeplitz_kernel(
    b: &IsotypeBasis,
    f: &Observable,
    x: &SpherePoint,
    y: &SpherePoint,
    quad: Quadrature,
) -> Result<McEstimate> {
    match quad {
        Quadrature::Dirichlet => {
            let m = toeplitz_matrix(b, f, quad)?;
            Ok(McEstimate {
                value: toeplitz_kernel_from_matrix(b, &m, x, y),
                stderr: 0.0,
            })
        }
        Quadrature::MonteCarlo { samples, seed } => toeplitz_kernel_integral(b, f, x, y, samples, seed),
    }
}

pub fn toeplitz_trace(m: &ToeplitzMatrix) -> f64 {
    (0..m.dim()).map(|i| m.entries[(i, i)].re).sum()
}

/// Predicted `Tr T[f] ≈ C (k‖ν_T‖/π)^{exponent}` with a quadrature error bar.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePrediction {
    pub constant: f64,
    pub exponent: f64,
    /// `|C(count) − C(2·count)|`.
    pub error_bar: f64,
}

/// `(d_ν²/(2π)^{d_T−1}) ∫_{X_{0,ν_T}} f ‖Φ_T‖^{−(d_M+2−d_P)}/𝒟 dV_X`.
///
/// The integrand is fiber-invariant and `dV_X` has fiber mass 1, so this is
/// the same integral over `M_{0,ν_T}`.
pub fn trace_prediction(ws: &WeightSystem, f: &Observable, nu_t: &[i64], count: usize, seed: u64) -> Result<TracePrediction> {
    f.check(ws.n())?;
    let (c1, _) = locus_integral(ws, nu_t, |x| f.eval(x), count, seed)?;
    let (c2, _) = locus_integral(ws, nu_t, |x| f.eval(x), 2 * count, seed.wrapping_add(1))?;
    Ok(TracePrediction {
        constant: c2,
        exponent: dim_exponent(ws),
        error_bar: (c1 - c2).abs(),
    })
}

/// Leading term of `T[f](x + n₁/√k, x + n₁/√k)`: the diagonal amplitude times
/// `f(m) e^{−2λ‖t₁‖²}`, `t₁` the transversal part of `n₁ ∈ T_mM` (real,
/// interleaved). Stated for trivial stabilizers; otherwise a warning is logged
/// and no roots-of-unity factor is applied.
pub fn toeplitz_near_diagonal_leading(
    ws: &WeightSystem,
    frame: &AdaptedFrame,
    f: &Observable,
    nu_t: &[i64],
    k: u64,
    n1: &[f64],
) -> Result<f64> {
    f.check(ws.n())?;
    let d = ws.locus_distance(&frame.x, nu_t)?;
    if d > crate::actions::MEMBERSHIP_TOL {
        return Err(Error::OffLocus { residual: d });
    }
    let order = ws.stabilizer(&frame.x)?.len();
    if order > 1 {
        log::warn!("stabilizer of order {order} at the point; the Toeplitz leading term assumes a trivial one");
    }
    let t = ws.tangent_split(frame, n1)?.t;
    let lambda = lambda_nu(ws, frame, nu_t)?;
    let amp = leading_amplitude(ws, frame, nu_t)?;
    Ok(amp * (k as f64).powf(diagonal_exponent(ws)) * f.eval(&frame.x) * (-2.0 * lambda * metric(&t, &t)).exp())
}

/// `n₁` from complex frame coordinates.
pub fn normal_from_complex(v: &[C64]) -> Vec<f64> {
    to_real(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{example_p1, example_p2};
    use crate::asymptotics::{near_diagonal_leading, transversal_unit};
    use crate::geometry::{frame_at, TangentVectorX};
    use crate::hardy::{build_basis, BasisEntry, ExponentVector};
    use crate::oracle::dirichlet_moment;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn center(n: usize) -> AdaptedFrame {
        frame_at(&SpherePoint::from_moduli_sq(&vec![1.0; n + 1], &vec![0.0; n + 1]).unwrap())
    }

    fn r0r1() -> Observable {
        Observable::monomial(vec![1, 1])
    }

    fn single(j: Vec<u64>) -> IsotypeBasis {
        let n = j.len() - 1;
        let log_c = crate::hardy::log_coefficient(&j, n);
        let mut b = build_basis(&example_p1(), &[1], &[1], 1).unwrap();
        b.entries = vec![BasisEntry {
            j: ExponentVector(j),
            log_c,
        }];
        b
    }

    #[test]
    fn dirichlet_entry_p1_example() {
        let b = single(vec![3, 2]);
        let m = toeplitz_matrix(&b, &Observable::monomial(vec![1, 0]), Quadrature::Dirichlet).unwrap();
        let oracle = (60.0 / PI) * dirichlet_moment(&[4, 2], 1) / (2.0 * PI);
        assert_relative_eq!(m.entries[(0, 0)].re, oracle, max_relative = 1e-13);
        assert_relative_eq!(m.entries[(0, 0)].re, 4.0 / 7.0, max_relative = 1e-13);
    }

    #[test]
    fn constant_is_identity_exactly() {
        let ws = example_p2();
        let b = build_basis(&ws, &[1, 1], &[1], 62).unwrap();
        let m = toeplitz_matrix(&b, &Observable::Constant(1.0), Quadrature::Dirichlet).unwrap();
        assert_eq!(toeplitz_trace(&m), b.dim() as f64);
        assert!(m.is_diagonal());
    }

    #[test]
    fn monte_carlo_matrix_agrees_with_dirichlet() {
        let ws = crate::actions::WeightSystem::new(1, vec![], vec![vec![1, 1]]).unwrap();
        let b = build_basis(&ws, &[], &[1], 3).unwrap();
        assert_eq!(b.dim(), 4);
        let f = Observable::RadialPolynomial(vec![
            RadialTerm { coef: 2.0, exps: vec![1, 0] },
            RadialTerm { coef: 0.5, exps: vec![1, 2] },
        ]);
        let exact = toeplitz_matrix(&b, &f, Quadrature::Dirichlet).unwrap();
        let mc = toeplitz_matrix(&b, &f, Quadrature::MonteCarlo { samples: 200_000, seed: 5 }).unwrap();
        let se = mc.stderr.as_ref().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let diff = (mc.entries[(i, j)] - exact.entries[(i, j)]).norm();
                assert!(diff <= 4.0 * se[(i, j)] + 1e-12, "({i},{j}) {diff} {}", se[(i, j)]);
                assert_eq!(mc.entries[(i, j)], mc.entries[(j, i)].conj());
            }
        }
        let ev = mc.eigenvalues();
        let norm = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(ev[0] >= -1e-10 * norm);
        assert!(norm <= f.sup_bound() + 4.0 * se.max());
    }

    #[test]
    fn constant_one_monte_carlo_is_identity_within_3_sigma() {
        let ws = crate::actions::WeightSystem::new(1, vec![], vec![vec![1, 1]]).unwrap();
        let b = build_basis(&ws, &[], &[1], 2).unwrap();
        let mc = toeplitz_matrix(&b, &Observable::Constant(1.0), Quadrature::MonteCarlo { samples: 100_000, seed: 1 }).unwrap();
        let se = mc.stderr.unwrap();
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((mc.entries[(i, j)] - expect).norm() <= 3.5 * se[(i, j)]);
            }
        }
    }

    #[test]
    fn kernel_routes_agree() {
        let ws = crate::actions::WeightSystem::new(1, vec![], vec![vec![1, 2]]).unwrap();
        let b = build_basis(&ws, &[], &[1], 6).unwrap();
        let f = r0r1();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let exact_m = toeplitz_matrix(&b, &f, Quadrature::Dirichlet).unwrap();
        for s in 0..3 {
            let x = crate::oracle::sphere_sample(&mut rng, 1);
            let y = crate::oracle::sphere_sample(&mut rng, 1);
            let exact = toeplitz_kernel_from_matrix(&b, &exact_m, &x, &y);
            let integral = toeplitz_kernel_integral(&b, &f, &x, &y, 200_000, s).unwrap();
            assert!(integral.within(exact, 3.5), "{exact} {integral:?}");
            // With shared samples the two routes are the same sum.
            let mc_m = toeplitz_matrix(&b, &f, Quadrature::MonteCarlo { samples: 4000, seed: s }).unwrap();
            let a = toeplitz_kernel_from_matrix(&b, &mc_m, &x, &y);
            let c = toeplitz_kernel_integral(&b, &f, &x, &y, 4000, s).unwrap().value;
            assert!((a - c).norm() < 1e-9 * a.norm().max(1.0), "{a} {c}");
        }
    }

    #[test]
    fn constant_kernel_is_szego() {
        let ws = example_p1();
        let b = build_basis(&ws, &[1], &[1], 31).unwrap();
        let x = center(1).x;
        let y = SpherePoint::from_moduli_sq(&[0.45, 0.55], &[0.3, -0.2]).unwrap();
        let t = toeplitz_kernel(&b, &Observable::Constant(1.0), &x, &y, Quadrature::Dirichlet).unwrap();
        let s = szego_eval(&b, &x, &y);
        assert!((t.value - s).norm() < 1e-12 * s.norm());
        let d = toeplitz_kernel(&b, &r0r1(), &x, &x, Quadrature::Dirichlet).unwrap();
        assert!(d.value.re >= 0.0 && d.value.im.abs() < 1e-12 * d.value.re);
    }

    #[test]
    fn trace_sequence_p1() {
        // k = 3b: the isotype is {(b, b)} and Tr = (b+1)²/((2b+2)(2b+3)) → 1/4.
        let ws = example_p1();
        let f = r0r1();
        let mut prev: Option<f64> = None;
        for b in [100u64, 199, 200] {
            let basis = build_basis(&ws, &[0], &[1], 3 * b).unwrap();
            let tr = toeplitz_trace(&toeplitz_matrix(&basis, &f, Quadrature::Dirichlet).unwrap());
            let bf = b as f64;
            assert_relative_eq!(tr, (bf + 1.0).powi(2) / ((2.0 * bf + 2.0) * (2.0 * bf + 3.0)), max_relative = 1e-12);
            if let Some(p) = prev {
                assert!(((tr - p) / p).abs() < 0.01);
            }
            prev = Some(tr);
        }
    }

    #[test]
    fn trace_prediction_linear_and_examples() {
        let ws = example_p1();
        let p1 = trace_prediction(&ws, &Observable::Constant(1.0), &[1], 64, 0).unwrap();
        let p3 = trace_prediction(&ws, &Observable::Constant(3.0), &[1], 64, 0).unwrap();
        assert_relative_eq!(p3.constant, 3.0 * p1.constant, max_relative = 1e-14);
        assert_relative_eq!(p1.constant, 2.0 * PI / 3.0, max_relative = 1e-12);
        let p = trace_prediction(&ws, &r0r1(), &[1], 64, 0).unwrap();
        assert_relative_eq!(p.constant, PI / 6.0, max_relative = 1e-12);
        assert!(p.error_bar < 1e-12);
    }

    #[test]
    fn near_diagonal_toeplitz_leading() {
        let ws = example_p1();
        let f = center(1);
        let t = transversal_unit(&ws, &f).unwrap();
        let lambda = 2.0 / 3.0;
        let k = 600;
        let zero = vec![0.0; 2];
        let obs = r0r1();
        let base = toeplitz_near_diagonal_leading(&ws, &f, &obs, &[1], k, &zero).unwrap();
        // f(m) = 1/4 times the diagonal amplitude.
        let amp = leading_amplitude(&ws, &f, &[1]).unwrap() * (k as f64).sqrt();
        assert_relative_eq!(base, 0.25 * amp, max_relative = 1e-14);
        let s = ((2f64).ln() / (2.0 * lambda)).sqrt();
        let half: Vec<f64> = to_real(&t).iter().map(|v| v * s).collect();
        let h = toeplitz_near_diagonal_leading(&ws, &f, &obs, &[1], k, &half).unwrap();
        assert_relative_eq!(h / base, 0.5, max_relative = 1e-12);
        // f ≡ 1 against the kernel leading term divided by its stabilizer factor.
        let u = TangentVectorX::base(t.iter().map(|c| c * 0.7).collect());
        let one = toeplitz_near_diagonal_leading(&ws, &f, &Observable::Constant(1.0), &[1], k, &to_real(&u.v)).unwrap();
        let main = near_diagonal_leading(&ws, &f, &[0], &[1], k, &u, &u, None).unwrap();
        assert_relative_eq!(one, main.re / 3.0, max_relative = 1e-8);
    }

    #[test]
    fn near_diagonal_shape_matches_exact_toeplitz() {
        let ws = example_p1();
        let f = center(1);
        let k = 1200;
        let basis = build_basis(&ws, &[0], &[1], k).unwrap();
        let m = toeplitz_matrix(&basis, &r0r1(), Quadrature::Dirichlet).unwrap();
        let t = transversal_unit(&ws, &f).unwrap();
        let zero = TangentVectorX::zero(1);
        let x0 = crate::kernel::rescaled_point(&f, &zero, k as f64).unwrap();
        let d0 = toeplitz_kernel_from_matrix(&basis, &m, &x0, &x0).re;
        let l0 = toeplitz_near_diagonal_leading(&ws, &f, &r0r1(), &[1], k, &[0.0, 0.0]).unwrap();
        for s in [0.5, 1.0, 1.5] {
            let u = TangentVectorX::base(t.iter().map(|c| c * s).collect());
            let y = crate::kernel::rescaled_point(&f, &u, k as f64).unwrap();
            let exact = toeplitz_kernel_from_matrix(&basis, &m, &y, &y).re / d0;
            let pred = toeplitz_near_diagonal_leading(&ws, &f, &r0r1(), &[1], k, &to_real(&u.v)).unwrap() / l0;
            assert!((exact / pred - 1.0).abs() < 0.03, "s={s}: {exact} {pred}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn nonnegative_observables_give_psd_diagonals(a in 0.0f64..3.0, e0 in 0u32..4, e1 in 0u32..4, k in 1u64..40) {
            let ws = example_p1();
            let b = build_basis(&ws, &[0], &[1], k).unwrap();
            let f = Observable::RadialPolynomial(vec![RadialTerm { coef: a, exps: vec![e0, e1] }]);
            let m = toeplitz_matrix(&b, &f, Quadrature::Dirichlet).unwrap();
            for i in 0..m.dim() {
                let v = m.entries[(i, i)].re;
                prop_assert!(v >= 0.0 && v <= f.sup_bound() + 1e-12);
            }
        }
    }
}
