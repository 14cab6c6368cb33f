//! Torus actions on `ℂ^{n+1}` given by integer weights, their moment maps,
//! stabilizers, and the locus `M_{0,ν_T} = Φ_P^{-1}(ℝ₊·(0, ν_T))`.
//!
//! A weight system has a `d_G × (n+1)` matrix `W_G` and a `d_T × (n+1)`
//! matrix `W_T`; `W_P` stacks them. Column `i` of `W_P` is the weight of
//! coordinate `i`, and `p ∈ ℝ^{d_P}` acts by `z_i ↦ exp(-i⟨w_i, p⟩) z_i`.
//! With this sign the moment map is `Φ_l = Σ_i W[l][i] |z_i|²` (positive
//! coefficients), and a monomial `z^J` transforms by `exp(-i⟨W_P J, p⟩)`.
//!
//! Everything on the locus depends only on `r = (|z_i|²)`, so the locus in
//! `r`-space is the polytope
//! `{r ≥ 0, Σ r = 1, W_G r = 0, W_T r ∈ ℝ₊ ν_T}` times the phase torus.

use crate::geometry::{
    apply_j, chord_to_angle, frame_at, hermitian, metric, to_real, AdaptedFrame, SpherePoint,
};
use crate::lattice::{smith_normal_form, IntMatrix};
use crate::{Error, Result, C64};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Locus membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Gram determinants below this are treated as singular.
pub const GRAM_TOL: f64 = 1e-12;
/// Largest stabilizer enumerated explicitly.
pub const MAX_STABILIZER: u128 = 1 << 20;
/// Largest `n + 1` for the active-set locus projection.
const MAX_ACTIVE_SET_DIM: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSystem {
    n: usize,
    w_g: IntMatrix,
    w_t: IntMatrix,
    functional: Vec<f64>,
    gap: f64,
}

impl WeightSystem {
    /// Validates shapes and the positivity condition `0 ∉ conv(columns of W_T)`.
    pub fn new(n: usize, w_g: IntMatrix, w_t: IntMatrix) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("projective dimension n must be >= 1".into()));
        }
        if w_t.is_empty() {
            return Err(Error::InvalidArgument("W_T needs at least one row".into()));
        }
        for (what, m) in [("W_G row", &w_g), ("W_T row", &w_t)] {
            if let Some(r) = m.iter().find(|r| r.len() != n + 1) {
                return Err(Error::Dimension {
                    what,
                    expected: n + 1,
                    found: r.len(),
                });
            }
        }
        let (functional, gap) = positive_functional(&w_t, n + 1)?;
        Ok(Self {
            n,
            w_g,
            w_t,
            functional,
            gap,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d_g(&self) -> usize {
        self.w_g.len()
    }
    pub fn d_t(&self) -> usize {
        self.w_t.len()
    }
    pub fn d_p(&self) -> usize {
        self.d_g() + self.d_t()
    }
    pub fn w_g(&self) -> &IntMatrix {
        &self.w_g
    }
    pub fn w_t(&self) -> &IntMatrix {
        &self.w_t
    }

    /// `W_P = [W_G; W_T]`.
    pub fn w_p(&self) -> IntMatrix {
        self.w_g.iter().chain(&self.w_t).cloned().collect()
    }

    /// Weight of coordinate `i` in `ℤ^{d_P}`.
    pub fn weight(&self, i: usize) -> Vec<i64> {
        self.w_g.iter().chain(&self.w_t).map(|r| r[i]).collect()
    }

    /// A functional `φ ∈ [-1,1]^{d_T}` with `φ·(column i of W_T) ≥ gap > 0`.
    pub fn positive_functional(&self) -> &[f64] {
        &self.functional
    }
    pub fn positivity_gap(&self) -> f64 {
        self.gap
    }

    /// `z_i ↦ exp(-i⟨w_i, p⟩) z_i`.
    pub fn act(&self, p: &[f64], x: &SpherePoint) -> Result<SpherePoint> {
        self.check_dp(p)?;
        let z = x
            .coords()
            .iter()
            .enumerate()
            .map(|(i, zi)| zi * C64::from_polar(1.0, -self.pairing(i, p)))
            .collect();
        Ok(SpherePoint::from_raw(z))
    }

    fn pairing(&self, i: usize, p: &[f64]) -> f64 {
        self.w_g
            .iter()
            .chain(&self.w_t)
            .zip(p)
            .map(|(r, pl)| r[i] as f64 * pl)
            .sum()
    }

    fn check_dp(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.d_p() {
            return Err(Error::Dimension {
                what: "torus element",
                expected: self.d_p(),
                found: p.len(),
            });
        }
        Ok(())
    }

    /// `Φ` from squared moduli (need not be normalized; divided by `Σ r`).
    pub fn moment_of_r(&self, r: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let total: f64 = r.iter().sum();
        let eval = |m: &IntMatrix| -> Vec<f64> {
            m.iter()
                .map(|row| row.iter().zip(r).map(|(&w, &ri)| w as f64 * ri).sum::<f64>() / total)
                .collect()
        };
        (eval(&self.w_g), eval(&self.w_t))
    }

    /// Moment map values and the kernel of `Φ_P` at `x`.
    pub fn moment(&self, x: &SpherePoint) -> MomentData {
        let (phi_g, phi_t) = self.moment_of_r(&x.moduli_sq());
        let phi_p: Vec<f64> = phi_g.iter().chain(&phi_t).copied().collect();
        let ker_basis = hyperplane_basis(&phi_p).unwrap_or_default();
        MomentData {
            phi_g,
            phi_t,
            phi_p,
            ker_basis,
            eta: None,
            script_d: None,
        }
    }

    /// Moment data including `η` and `𝒟`; requires `Φ_G(m) = 0`.
    pub fn moment_full(&self, f: &AdaptedFrame) -> Result<MomentData> {
        let mut m = self.moment(&f.x);
        m.eta = Some(self.eta_vector(f)?.eta);
        m.script_d = Some(self.script_d(f)?);
        Ok(m)
    }

    /// `ξ_M(m)`: derivative of `t ↦ act(tξ, x)` at 0, with the `ℂx` component
    /// removed, in real frame coordinates.
    pub fn infinitesimal_action(&self, xi: &[f64], f: &AdaptedFrame) -> Result<Vec<f64>> {
        self.check_dp(xi)?;
        let z = f.x.coords();
        let d: Vec<C64> = z
            .iter()
            .enumerate()
            .map(|(i, zi)| zi * C64::new(0.0, -self.pairing(i, xi)))
            .collect();
        Ok(to_real(&f.base_coords(&d)))
    }

    /// Orthonormal basis of `{ξ : ⟨Φ_P(m), ξ⟩ = 0}` (size `d_P − 1`).
    pub fn moment_kernel_basis(&self, x: &SpherePoint) -> Result<Vec<Vec<f64>>> {
        let m = self.moment(x);
        hyperplane_basis(&m.phi_p).ok_or(Error::ZeroMoment)
    }

    /// `val(b)` for each kernel basis vector.
    fn kernel_fields(&self, f: &AdaptedFrame) -> Result<Vec<Vec<f64>>> {
        self.moment_kernel_basis(&f.x)?
            .iter()
            .map(|b| self.infinitesimal_action(b, f))
            .collect()
    }

    /// `𝒟(m) = √det D`, `D_ij = g(val b_i, val b_j)` over an orthonormal basis
    /// of `Ker Φ_P(m)`.
    pub fn script_d(&self, f: &AdaptedFrame) -> Result<f64> {
        let fields = self.kernel_fields(f)?;
        script_d_of_fields(&fields)
    }

    /// `η = Φ_P/‖Φ_P‖`, which satisfies `⟨η, Φ_P⟩ = ‖Φ_T‖` on the locus, and
    /// the split of its induced vector field.
    pub fn eta_vector(&self, f: &AdaptedFrame) -> Result<EtaData> {
        let m = self.moment(&f.x);
        let g_norm = m.phi_g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if g_norm > MEMBERSHIP_TOL {
            return Err(Error::OffLocus { residual: g_norm });
        }
        let norm = m.phi_p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroMoment);
        }
        let eta: Vec<f64> = m.phi_p.iter().map(|v| v / norm).collect();
        let field = self.infinitesimal_action(&eta, f)?;
        let split = self.tangent_split(f, &field)?;
        Ok(EtaData { eta, split })
    }

    /// Orthogonal decomposition `V = V_h + V_v + V_t` with `V_m = span val(b_i)`,
    /// `N_m = J V_m` and `H_m = (V_m ⊕ N_m)^⊥`.
    pub fn tangent_split(&self, f: &AdaptedFrame, v: &[f64]) -> Result<TangentSplit> {
        let fields = self.kernel_fields(f)?;
        split_with_fields(&fields, v)
    }

    /// The finite stabilizer `F_x ⊂ P` of `x ∈ X`.
    pub fn stabilizer(&self, x: &SpherePoint) -> Result<Vec<StabilizerElement>> {
        let support: Vec<usize> = x
            .coords()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 1e-12)
            .map(|(i, _)| i)
            .collect();
        let d_p = self.d_p();
        let a: IntMatrix = support.iter().map(|&i| self.weight(i)).collect();
        let snf = smith_normal_form(&a)?;
        if snf.rank() < d_p {
            return Err(Error::NotLocallyFree);
        }
        let order: u128 = snf.diagonal.iter().map(|&d| d as u128).product();
        if order > MAX_STABILIZER {
            return Err(Error::StabilizerTooLarge { order });
        }
        // σ = 2π V τ with τ_l ∈ (1/d_l)ℤ / ℤ; V unimodular makes this a bijection.
        let mut out = Vec::with_capacity(order as usize);
        let mut idx = vec![0i64; d_p];
        loop {
            let sigma = (0..d_p)
                .map(|row| {
                    let s: f64 = (0..d_p)
                        .map(|l| snf.v[row][l] as f64 * idx[l] as f64 / snf.diagonal[l] as f64)
                        .sum();
                    2.0 * PI * s.rem_euclid(1.0)
                })
                .collect();
            out.push(StabilizerElement { sigma });
            let mut l = 0;
            loop {
                if l == d_p {
                    return Ok(out);
                }
                idx[l] += 1;
                if idx[l] < snf.diagonal[l] {
                    break;
                }
                idx[l] = 0;
                l += 1;
            }
        }
    }

    /// Equality constraints `E r = e` of the locus polytope: `Σ r = 1`,
    /// `W_G r = 0`, and `W_T r ⊥ ν_T^⊥`.
    fn locus_constraints(&self, nu_t: &[i64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
        if nu_t.len() != self.d_t() {
            return Err(Error::Dimension {
                what: "nu_T",
                expected: self.d_t(),
                found: nu_t.len(),
            });
        }
        if nu_t.iter().all(|&v| v == 0) {
            return Err(Error::InvalidArgument("nu_T must be nonzero".into()));
        }
        let dim = self.n + 1;
        let nu: Vec<f64> = nu_t.iter().map(|&v| v as f64).collect();
        let perp = hyperplane_basis(&nu).expect("nonzero nu_T");
        let mut rows: Vec<Vec<f64>> = vec![vec![1.0; dim]];
        rows.extend(self.w_g.iter().map(|r| r.iter().map(|&w| w as f64).collect()));
        for b in &perp {
            rows.push(
                (0..dim)
                    .map(|i| self.w_t.iter().zip(b).map(|(r, bl)| r[i] as f64 * bl).sum())
                    .collect(),
            );
        }
        let e = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        let mut rhs = DVector::zeros(rows.len());
        rhs[0] = 1.0;
        Ok((e, rhs))
    }

    /// Nearest point of the locus polytope to `r(x)` and the resulting
    /// distance on `X` after lifting with the phases of `x`.
    pub fn locus_projection(&self, x: &SpherePoint, nu_t: &[i64]) -> Result<LocusProjection> {
        let (e, rhs) = self.locus_constraints(nu_t)?;
        let dim = self.n + 1;
        if dim > MAX_ACTIVE_SET_DIM {
            return Err(Error::InvalidArgument(format!(
                "locus projection supports n + 1 <= {MAX_ACTIVE_SET_DIM}"
            )));
        }
        let r = DVector::from_vec(x.moduli_sq());
        let mut best: Option<(f64, DVector<f64>)> = None;
        for mask in 0u32..(1u32 << dim) {
            let zeros: Vec<usize> = (0..dim).filter(|i| mask & (1 << i) != 0).collect();
            let c = DMatrix::from_fn(e.nrows() + zeros.len(), dim, |i, j| {
                if i < e.nrows() {
                    e[(i, j)]
                } else {
                    f64::from(zeros[i - e.nrows()] == j)
                }
            });
            let mut cr = DVector::zeros(c.nrows());
            cr.rows_mut(0, rhs.len()).copy_from(&rhs);
            let Ok(pinv) = c.clone().pseudo_inverse(1e-12) else { continue };
            let rho = &r - &pinv * (&c * &r - &cr);
            if (&c * &rho - &cr).amax() > 1e-9 || rho.min() < -1e-12 {
                continue;
            }
            let d = (&rho - &r).norm();
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, rho));
            }
        }
        let Some((_, rho)) = best else {
            return Err(Error::EmptyLocus { nu_t: nu_t.to_vec() });
        };
        let rho: Vec<f64> = rho.iter().map(|v| v.max(0.0)).collect();
        let (_, phi_t) = self.moment_of_r(&rho);
        let along: f64 = phi_t.iter().zip(nu_t).map(|(p, &v)| p * v as f64).sum();
        if along <= 0.0 {
            return Err(Error::EmptyLocus { nu_t: nu_t.to_vec() });
        }
        let phases: Vec<f64> = x.coords().iter().map(|z| z.arg()).collect();
        let point = SpherePoint::from_moduli_sq(&rho, &phases)?;
        let chord = rho
            .iter()
            .zip(r.iter())
            .map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(LocusProjection {
            rho,
            point,
            distance: chord_to_angle(chord),
        })
    }

    /// Distance from `x` to its phase-preserving projection on `X_{0,ν_T}`.
    /// An upper bound on the true distance, comparable to it up to
    /// constants; zero iff `x` is on the locus.
    pub fn locus_distance(&self, x: &SpherePoint, nu_t: &[i64]) -> Result<f64> {
        Ok(self.locus_projection(x, nu_t)?.distance)
    }

    /// Projection of the barycenter `r = (1/(n+1), …)` with zero phases.
    pub fn locus_center(&self, nu_t: &[i64]) -> Result<SpherePoint> {
        let dim = self.n + 1;
        let bary = SpherePoint::from_moduli_sq(&vec![1.0; dim], &vec![0.0; dim])?;
        Ok(self.locus_projection(&bary, nu_t)?.point)
    }

    /// Quadrature nodes on `M_{0,ν_T}` with weights summing (in expectation,
    /// exactly when the polytope is a point) to its Riemannian volume.
    pub fn locus_sample(&self, nu_t: &[i64], count: usize, seed: u64) -> Result<Vec<LocusNode>> {
        if count == 0 {
            return Err(Error::QuadratureBudget("locus sample count must be positive".into()));
        }
        let (e, rhs) = self.locus_constraints(nu_t)?;
        let center = self.locus_center(nu_t)?;
        let rho0 = DVector::from_vec(center.moduli_sq());
        let null = null_space(&e);
        let n = self.n;
        let torus = (2.0 * PI).powi(n as i32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        if null.ncols() == 0 {
            // Polytope is a point: product grid over the phase torus.
            let per_axis = ((count as f64).powf(1.0 / n as f64).round() as usize).max(1);
            let total = per_axis.pow(n as u32);
            let vol = torus * angle_density(rho0.as_slice());
            let w = vol / total as f64;
            let mut nodes = Vec::with_capacity(total);
            let mut idx = vec![0usize; n];
            for _ in 0..total {
                let mut phases = vec![0.0];
                phases.extend(idx.iter().map(|&a| 2.0 * PI * a as f64 / per_axis as f64));
                nodes.push(LocusNode {
                    point: SpherePoint::from_moduli_sq(rho0.as_slice(), &phases)?,
                    weight: w,
                });
                for slot in idx.iter_mut() {
                    *slot += 1;
                    if *slot < per_axis {
                        break;
                    }
                    *slot = 0;
                }
            }
            return Ok(nodes);
        }

        // Rejection sampling in null-space coordinates over an LP bounding box.
        let _ = rhs;
        let k = null.ncols();
        let mut lo = vec![0.0; k];
        let mut hi = vec![0.0; k];
        for c in 0..k {
            for (dir, slot) in [(OptimizationDirection::Minimize, &mut lo), (OptimizationDirection::Maximize, &mut hi)] {
                let mut pb = Problem::new(dir);
                let s: Vec<_> = (0..k)
                    .map(|j| pb.add_var(f64::from(j == c), (f64::NEG_INFINITY, f64::INFINITY)))
                    .collect();
                for i in 0..=n {
                    let expr: Vec<_> = (0..k).map(|j| (s[j], null[(i, j)])).collect();
                    pb.add_constraint(expr, ComparisonOp::Ge, -rho0[i]);
                }
                let sol = pb
                    .solve()
                    .map_err(|err| Error::InvalidArgument(format!("locus bounding LP: {err}")))?;
                slot[c] = sol.objective();
            }
        }
        let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let mut nodes = Vec::new();
        for _ in 0..count {
            let s = DVector::from_iterator(k, lo.iter().zip(&hi).map(|(a, b)| rng.gen_range(*a..=*b)));
            let rho = &rho0 + &null * s;
            if rho.min() <= 0.0 {
                continue;
            }
            let inv4 = DMatrix::from_diagonal(&rho.map(|v| 0.25 / v));
            let radial = (null.transpose() * inv4 * &null).determinant().max(0.0).sqrt();
            let density = radial * torus * angle_density(rho.as_slice());
            let mut phases = vec![0.0];
            phases.extend((0..n).map(|_| rng.gen_range(0.0..2.0 * PI)));
            nodes.push(LocusNode {
                point: SpherePoint::from_moduli_sq(rho.as_slice(), &phases)?,
                weight: box_vol * density / count as f64,
            });
        }
        if nodes.is_empty() {
            return Err(Error::QuadratureBudget("no locus sample accepted".into()));
        }
        Ok(nodes)
    }
}

/// `√det` of the phase-torus block `diag(r) − r rᵀ` of the Fubini–Study
/// metric (angles of coordinates `1..=n`), which equals `√(Π r_i)`.
fn angle_density(r: &[f64]) -> f64 {
    let total: f64 = r.iter().sum();
    r.iter().map(|v| v / total).product::<f64>().sqrt()
}

/// Columns spanning `ker E`.
fn null_space(e: &DMatrix<f64>) -> DMatrix<f64> {
    let ete = e.transpose() * e;
    let eig = SymmetricEigen::new(ete);
    let scale = eig.eigenvalues.amax().max(1.0);
    let cols: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l.abs() < 1e-10 * scale)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(e.ncols(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Deterministic orthonormal basis of `a^⊥ ⊂ ℝ^d`; `None` if `a = 0`.
pub fn hyperplane_basis(a: &[f64]) -> Option<Vec<Vec<f64>>> {
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let unit: Vec<f64> = a.iter().map(|v| v / norm).collect();
    let d = a.len();
    let mut drop = 0;
    for i in 1..d {
        if unit[i].abs() > unit[drop].abs() {
            drop = i;
        }
    }
    let mut basis = vec![unit];
    for axis in (0..d).filter(|&i| i != drop) {
        let mut w = vec![0.0; d];
        w[axis] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        basis.push(w.iter().map(|v| v / nw).collect());
    }
    basis.remove(0);
    Some(basis)
}

fn gram(vs: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(vs.len(), vs.len(), |i, j| metric(&vs[i], &vs[j]))
}

pub(crate) fn script_d_of_fields(fields: &[Vec<f64>]) -> Result<f64> {
    if fields.is_empty() {
        return Ok(1.0);
    }
    let det = gram(fields).determinant();
    if det < GRAM_TOL {
        return Err(Error::Transversality { det });
    }
    Ok(det.sqrt())
}

pub(crate) fn split_with_fields(fields: &[Vec<f64>], v: &[f64]) -> Result<TangentSplit> {
    let len = v.len();
    if fields.is_empty() {
        return Ok(TangentSplit {
            h: v.to_vec(),
            v: vec![0.0; len],
            t: vec![0.0; len],
        });
    }
    let q = fields.len();
    let mut all: Vec<Vec<f64>> = fields.to_vec();
    all.extend(fields.iter().map(|f| apply_j(f)));
    let g = gram(&all);
    let det = g.determinant();
    if det < GRAM_TOL {
        return Err(Error::Transversality { det });
    }
    let rhs = DVector::from_iterator(all.len(), all.iter().map(|a| metric(a, v)));
    let coef = g
        .lu()
        .solve(&rhs)
        .ok_or(Error::Transversality { det })?;
    let combine = |range: std::ops::Range<usize>| -> Vec<f64> {
        let mut out = vec![0.0; len];
        for i in range {
            for (o, a) in out.iter_mut().zip(&all[i]) {
                *o += coef[i] * a;
            }
        }
        out
    };
    let vv = combine(0..q);
    let vt = combine(q..2 * q);
    let h = (0..len).map(|i| v[i] - vv[i] - vt[i]).collect();
    Ok(TangentSplit { h, v: vv, t: vt })
}

/// `max t` subject to `φ·c_i ≥ t`, `φ ∈ [-1,1]^{d_T}`, `t ≤ 1`.
fn positive_functional(w_t: &IntMatrix, cols: usize) -> Result<(Vec<f64>, f64)> {
    let d_t = w_t.len();
    let mut pb = Problem::new(OptimizationDirection::Maximize);
    let phi: Vec<_> = (0..d_t).map(|_| pb.add_var(0.0, (-1.0, 1.0))).collect();
    let t = pb.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for i in 0..cols {
        let mut expr: Vec<_> = phi.iter().zip(w_t).map(|(&v, r)| (v, r[i] as f64)).collect();
        expr.push((t, -1.0));
        pb.add_constraint(expr, ComparisonOp::Ge, 0.0);
    }
    let sol = pb
        .solve()
        .map_err(|e| Error::InvalidArgument(format!("positivity LP failed: {e}")))?;
    let functional: Vec<f64> = phi.iter().map(|&v| sol[v]).collect();
    // Recompute the gap from the returned φ rather than trusting `t`.
    let gap = (0..cols)
        .map(|i| functional.iter().zip(w_t).map(|(f, r)| f * r[i] as f64).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    if gap <= 1e-9 {
        return Err(Error::PositivityViolated);
    }
    Ok((functional, gap))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentData {
    pub phi_g: Vec<f64>,
    pub phi_t: Vec<f64>,
    pub phi_p: Vec<f64>,
    /// Orthonormal basis of `Φ_P(m)^⊥` (empty when `Φ_P = 0`).
    pub ker_basis: Vec<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
    pub script_d: Option<f64>,
}

impl MomentData {
    pub fn phi_t_norm(&self) -> f64 {
        self.phi_t.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Real tangent vectors (frame coordinates) split as horizontal, vertical, transversal.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSplit {
    pub h: Vec<f64>,
    pub v: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaData {
    pub eta: Vec<f64>,
    /// Split of `val(η)`; `split.h` is `η_{Mh}`.
    pub split: TangentSplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerElement {
    /// Angles `p = (γ, ϑ)` in `[0, 2π)^{d_P}`.
    pub sigma: Vec<f64>,
}

impl StabilizerElement {
    pub fn gamma(&self, d_g: usize) -> &[f64] {
        &self.sigma[..d_g]
    }
    pub fn vartheta(&self, d_g: usize) -> &[f64] {
        &self.sigma[d_g..]
    }

    /// `χ_{ν_P}(p) = exp(i(⟨ν_G, γ⟩ + k⟨ν_T, ϑ⟩))`.
    pub fn character(&self, nu_g: &[i64], nu_t: &[i64], k: i64) -> C64 {
        C64::from_polar(1.0, character_angle(&self.sigma, nu_g, nu_t, k))
    }

    /// Phase by which the element multiplies sections of the `(ν_G, kν_T)`
    /// isotype: `s(p·x) = conj(χ_{ν_P}(p)) s(x)`.
    pub fn section_phase(&self, nu_g: &[i64], nu_t: &[i64], k: i64) -> C64 {
        self.character(nu_g, nu_t, k).conj()
    }
}

/// `⟨ν_G, γ⟩ + k⟨ν_T, ϑ⟩` for `p = (γ, ϑ)`, reduced mod 2π.
pub fn character_angle(p: &[f64], nu_g: &[i64], nu_t: &[i64], k: i64) -> f64 {
    let d_g = nu_g.len();
    let a: f64 = nu_g.iter().zip(p).map(|(&v, x)| v as f64 * x).sum::<f64>()
        + nu_t.iter().zip(&p[d_g..]).map(|(&v, x)| (k * v) as f64 * x).sum::<f64>();
    a.rem_euclid(2.0 * PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocusProjection {
    /// Nearest point of the locus polytope in `r`-coordinates.
    pub rho: Vec<f64>,
    /// Its lift with the original phases.
    pub point: SpherePoint,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocusNode {
    pub point: SpherePoint,
    pub weight: f64,
}

/// The worked example on `ℙ¹`: `W_G = [1, −1]`, `W_T = [1, 2]`.
pub fn example_p1() -> WeightSystem {
    WeightSystem::new(1, vec![vec![1, -1]], vec![vec![1, 2]]).expect("valid example")
}

/// The worked example on `ℙ²`: `W_G = [[1,−1,0],[0,1,−1]]`, `W_T = [1, 2, 3]`.
pub fn example_p2() -> WeightSystem {
    WeightSystem::new(2, vec![vec![1, -1, 0], vec![0, 1, -1]], vec![vec![1, 2, 3]])
        .expect("valid example")
}

/// Frame at the locus center, the default evaluation point of the examples.
pub fn center_frame(ws: &WeightSystem, nu_t: &[i64]) -> Result<AdaptedFrame> {
    Ok(frame_at(&ws.locus_center(nu_t)?))
}

/// `⟨a, b⟩` on `ℂ^{n+1}` re-exported for callers that only import this module.
pub fn inner(a: &SpherePoint, b: &SpherePoint) -> C64 {
    hermitian(a.coords(), b.coords())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dist_sphere, norm};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag_point(n: usize) -> SpherePoint {
        SpherePoint::from_moduli_sq(&vec![1.0; n + 1], &vec![0.0; n + 1]).unwrap()
    }

    fn random_point(n: usize, rng: &mut impl Rng) -> SpherePoint {
        let z = (0..=n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        SpherePoint::normalized(z).unwrap()
    }

    #[test]
    fn positivity_check() {
        assert!(WeightSystem::new(1, vec![], vec![vec![1, 2]]).is_ok());
        assert_eq!(
            WeightSystem::new(1, vec![], vec![vec![1, -1]]).unwrap_err(),
            Error::PositivityViolated
        );
        assert_eq!(
            WeightSystem::new(2, vec![], vec![vec![1, 0, -1], vec![0, 1, -1]]).unwrap_err(),
            Error::PositivityViolated
        );
        assert_eq!(
            WeightSystem::new(1, vec![], vec![vec![0, 1]]).unwrap_err(),
            Error::PositivityViolated
        );
        let ws = WeightSystem::new(2, vec![], vec![vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
        assert!(ws.positivity_gap() > 0.0);
        assert!(matches!(
            WeightSystem::new(1, vec![vec![1]], vec![vec![1, 2]]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn action_identity_unitarity_and_cube_roots() {
        let ws = example_p1();
        let x = diag_point(1);
        assert_eq!(ws.act(&[0.0, 0.0], &x).unwrap(), x);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let y = random_point(1, &mut rng);
            let p = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            assert_abs_diff_eq!(norm(ws.act(&p, &y).unwrap().coords()), 1.0, epsilon = 1e-14);
        }
        // s = e^{iϑ} with s³ = 1 and w = 1/s: (γ, ϑ) = (−ϑ, ϑ) fixes x.
        for j in 0..3 {
            let th = 2.0 * PI * j as f64 / 3.0;
            let y = ws.act(&[-th, th], &x).unwrap();
            assert!(dist_sphere(&x, &y) < 1e-12);
        }
        let y = ws.act(&[-0.5, 0.5], &x).unwrap();
        assert!(dist_sphere(&x, &y) > 0.1);
    }

    #[test]
    fn moment_examples() {
        let p1 = example_p1();
        let m = p1.moment(&diag_point(1));
        assert_abs_diff_eq!(m.phi_g[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.phi_t[0], 1.5, epsilon = 4.0 * f64::EPSILON);
        let axis = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let m = p1.moment(&axis);
        assert_eq!((m.phi_g[0], m.phi_t[0]), (1.0, 1.0));
        let p2 = example_p2();
        let m = p2.moment(&diag_point(2));
        assert_abs_diff_eq!(m.phi_g[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.phi_g[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.phi_t[0], 2.0, epsilon = 4.0 * f64::EPSILON);
        assert_eq!(m.phi_p.len(), 3);
    }

    #[test]
    fn moment_invariance_and_convexity() {
        let ws = example_p2();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let x = random_point(2, &mut rng);
            let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let a = ws.moment(&x);
            let b = ws.moment(&ws.act(&p, &x).unwrap());
            for (u, v) in a.phi_p.iter().zip(&b.phi_p) {
                assert_abs_diff_eq!(u, v, epsilon = 1e-12);
            }
            for (l, row) in ws.w_p().iter().enumerate() {
                let lo = *row.iter().min().unwrap() as f64;
                let hi = *row.iter().max().unwrap() as f64;
                assert!(a.phi_p[l] >= lo - 1e-12 && a.phi_p[l] <= hi + 1e-12);
            }
        }
    }

    fn fd_action(ws: &WeightSystem, xi: &[f64], f: &AdaptedFrame, h: f64) -> Vec<f64> {
        let step = |s: f64| {
            let p: Vec<f64> = xi.iter().map(|v| v * s).collect();
            ws.act(&p, &f.x).unwrap()
        };
        let (a, b) = (step(h), step(-h));
        let d: Vec<C64> = a.coords().iter().zip(b.coords()).map(|(u, v)| (u - v) / (2.0 * h)).collect();
        to_real(&f.base_coords(&d))
    }

    #[test]
    fn infinitesimal_action_matches_finite_differences() {
        let ws = example_p1();
        let f = frame_at(&diag_point(1));
        let exact = ws.infinitesimal_action(&[1.0, 0.0], &f).unwrap();
        assert!(exact.iter().any(|v| v.abs() > 0.1));
        let fd = fd_action(&ws, &[1.0, 0.0], &f, 1e-4);
        for (a, b) in exact.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6);
        }
        // Equal weights on the support: pure fiber motion.
        let axis = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let v = ws.infinitesimal_action(&[0.3, 0.7], &frame_at(&axis)).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn infinitesimal_action_linear() {
        let ws = example_p2();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = frame_at(&random_point(2, &mut rng));
        let xi = [0.3, -1.0, 0.7];
        let ze = [1.1, 0.2, -0.4];
        let comb: Vec<f64> = xi.iter().zip(&ze).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let lhs = ws.infinitesimal_action(&comb, &f).unwrap();
        let a = ws.infinitesimal_action(&xi, &f).unwrap();
        let b = ws.infinitesimal_action(&ze, &f).unwrap();
        for i in 0..lhs.len() {
            assert_abs_diff_eq!(lhs[i], 2.0 * a[i] - 3.0 * b[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn kernel_basis_examples() {
        let b = example_p1().moment_kernel_basis(&diag_point(1)).unwrap();
        assert_eq!(b.len(), 1);
        assert_abs_diff_eq!(b[0][0].abs(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b[0][1], 0.0, epsilon = 1e-15);
        let ws = example_p2();
        let b = ws.moment_kernel_basis(&diag_point(2)).unwrap();
        assert_eq!(b.len(), 2);
        for v in &b {
            assert!(v[2].abs() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = random_point(2, &mut rng);
            let m = ws.moment(&x);
            for v in ws.moment_kernel_basis(&x).unwrap() {
                let dot: f64 = v.iter().zip(&m.phi_p).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn script_d_examples() {
        let ws = example_p1();
        let f = frame_at(&diag_point(1));
        assert_abs_diff_eq!(ws.script_d(&f).unwrap(), 1.0, epsilon = 1e-12);
        let ws2 = example_p2();
        let f2 = frame_at(&diag_point(2));
        assert_abs_diff_eq!(ws2.script_d(&f2).unwrap(), 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        // T only, d_T = 1: empty determinant.
        let t_only = WeightSystem::new(1, vec![], vec![vec![1, 2]]).unwrap();
        assert_eq!(t_only.script_d(&f).unwrap(), 1.0);
    }

    #[test]
    fn script_d_basis_rotation_invariance() {
        let ws = example_p2();
        let f = frame_at(&diag_point(2));
        let basis = ws.moment_kernel_basis(&f.x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let a: f64 = rng.gen_range(0.0..2.0 * PI);
            let rot: Vec<Vec<f64>> = vec![
                (0..3).map(|i| a.cos() * basis[0][i] + a.sin() * basis[1][i]).collect(),
                (0..3).map(|i| -a.sin() * basis[0][i] + a.cos() * basis[1][i]).collect(),
            ];
            let fields: Vec<Vec<f64>> =
                rot.iter().map(|b| ws.infinitesimal_action(b, &f).unwrap()).collect();
            assert_abs_diff_eq!(
                script_d_of_fields(&fields).unwrap(),
                ws.script_d(&f).unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn script_d_transversality_failure() {
        // G and T act identically: the kernel direction acts trivially on ℙ¹.
        let ws = WeightSystem::new(1, vec![vec![1, 1]], vec![vec![1, 1]]).unwrap();
        let f = frame_at(&diag_point(1));
        assert!(matches!(ws.script_d(&f), Err(Error::Transversality { .. })));
    }

    #[test]
    fn eta_examples() {
        let ws = example_p1();
        let f = frame_at(&diag_point(1));
        let e = ws.eta_vector(&f).unwrap();
        assert_abs_diff_eq!(e.eta[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eta[1], 1.0, epsilon = 1e-15);
        assert!(e.split.h.iter().all(|v| v.abs() < 1e-12));
        let ws2 = example_p2();
        let f2 = frame_at(&diag_point(2));
        let e2 = ws2.eta_vector(&f2).unwrap();
        assert_abs_diff_eq!(e2.eta[2], 1.0, epsilon = 1e-15);
        let m = ws2.moment(&f2.x);
        let dot: f64 = e2.eta.iter().zip(&m.phi_p).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(dot, m.phi_t_norm(), epsilon = 1e-10);
        let off = frame_at(&SpherePoint::from_moduli_sq(&[0.6, 0.4], &[0.0, 0.0]).unwrap());
        assert!(matches!(ws.eta_vector(&off), Err(Error::OffLocus { .. })));
    }

    #[test]
    fn tangent_split_examples() {
        let ws = example_p2();
        let f = frame_at(&diag_point(2));
        let basis = ws.moment_kernel_basis(&f.x).unwrap();
        let vb = ws.infinitesimal_action(&basis[0], &f).unwrap();
        let s = ws.tangent_split(&f, &vb).unwrap();
        for (i, &x) in vb.iter().enumerate() {
            assert_abs_diff_eq!(s.v[i], x, epsilon = 1e-12);
            assert!(s.h[i].abs() < 1e-12 && s.t[i].abs() < 1e-12);
        }
        let jb = apply_j(&vb);
        let s = ws.tangent_split(&f, &jb).unwrap();
        for (i, &x) in jb.iter().enumerate() {
            assert_abs_diff_eq!(s.t[i], x, epsilon = 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ws1 = example_p1();
        let f1 = frame_at(&diag_point(1));
        for (w, fr, dim) in [(&ws, &f, 4), (&ws1, &f1, 2)] {
            for _ in 0..20 {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let s = w.tangent_split(fr, &v).unwrap();
                let total = metric(&s.h, &s.h) + metric(&s.v, &s.v) + metric(&s.t, &s.t);
                assert_abs_diff_eq!(total, metric(&v, &v), epsilon = 1e-10);
                for (i, &x) in v.iter().enumerate() {
                    assert_abs_diff_eq!(s.h[i] + s.v[i] + s.t[i], x, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn stabilizer_p1() {
        let ws = example_p1();
        let x = diag_point(1);
        let st = ws.stabilizer(&x).unwrap();
        assert_eq!(st.len(), 3);
        for el in &st {
            assert!(dist_sphere(&x, &ws.act(&el.sigma, &x).unwrap()) < 1e-12);
            // (w, s) = (s^{-1}, s): γ = −ϑ mod 2π and s³ = 1.
            assert_abs_diff_eq!((el.sigma[0] + el.sigma[1]).rem_euclid(2.0 * PI) % (2.0 * PI), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!((3.0 * el.sigma[1] / (2.0 * PI)).round(), 3.0 * el.sigma[1] / (2.0 * PI), epsilon = 1e-12);
        }
    }

    #[test]
    fn stabilizer_p2_has_order_six() {
        let ws = example_p2();
        let x = diag_point(2);
        let st = ws.stabilizer(&x).unwrap();
        assert_eq!(st.len(), 6);
        let mut sixth: Vec<i64> = st
            .iter()
            .map(|e| (e.sigma[2] * 6.0 / (2.0 * PI)).round() as i64 % 6)
            .collect();
        sixth.sort();
        assert_eq!(sixth, vec![0, 1, 2, 3, 4, 5]);
        for el in &st {
            assert!(dist_sphere(&x, &ws.act(&el.sigma, &x).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn stabilizer_is_a_group() {
        let ws = example_p2();
        let x = diag_point(2);
        let st = ws.stabilizer(&x).unwrap();
        let contains = |s: &[f64]| {
            st.iter().any(|e| {
                e.sigma.iter().zip(s).all(|(a, b)| {
                    let d = (a - b).rem_euclid(2.0 * PI);
                    d < 1e-9 || 2.0 * PI - d < 1e-9
                })
            })
        };
        for a in &st {
            for b in &st {
                let s: Vec<f64> = a.sigma.iter().zip(&b.sigma).map(|(u, v)| u + v).collect();
                assert!(contains(&s));
            }
        }
    }

    #[test]
    fn stabilizer_not_locally_free() {
        let ws = example_p1();
        let axis = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(ws.stabilizer(&axis).unwrap_err(), Error::NotLocallyFree);
    }

    #[test]
    fn characters_sum_coherently() {
        let ws = example_p1();
        let st = ws.stabilizer(&diag_point(1)).unwrap();
        for k in 0..30 {
            let s: C64 = st.iter().map(|e| e.section_phase(&[1], &[1], k)).sum();
            let expect = if (k - 1).rem_euclid(3) == 0 { 3.0 } else { 0.0 };
            assert!((s - c(expect, 0.0)).norm() < 1e-12, "k={k}: {s}");
        }
    }

    #[test]
    fn locus_distance_examples() {
        let ws = example_p1();
        assert!(ws.locus_distance(&diag_point(1), &[1]).unwrap() < 1e-9);
        let off = SpherePoint::from_moduli_sq(&[0.6, 0.4], &[0.0, 0.0]).unwrap();
        let d = ws.locus_distance(&off, &[1]).unwrap();
        assert!(d > 0.05);
        // ν_T = −1: Φ_T > 0 everywhere, so the locus is empty.
        assert!(matches!(ws.locus_distance(&off, &[-1]), Err(Error::EmptyLocus { .. })));
        let mut prev = 0.0;
        for step in 1..20 {
            let r0 = 0.5 + 0.02 * step as f64;
            let x = SpherePoint::from_moduli_sq(&[r0, 1.0 - r0], &[0.3, -1.0]).unwrap();
            let d = ws.locus_distance(&x, &[1]).unwrap();
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn locus_distance_p2_and_invariance() {
        let ws = example_p2();
        assert!(ws.locus_distance(&diag_point(2), &[1]).unwrap() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let x = random_point(2, &mut rng);
            let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let a = ws.locus_distance(&x, &[1]).unwrap();
            let b = ws.locus_distance(&ws.act(&p, &x).unwrap(), &[1]).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn locus_center_examples() {
        let c1 = example_p1().locus_center(&[1]).unwrap();
        for r in c1.moduli_sq() {
            assert_abs_diff_eq!(r, 0.5, epsilon = 1e-14);
        }
        let c2 = example_p2().locus_center(&[1]).unwrap();
        for r in c2.moduli_sq() {
            assert_abs_diff_eq!(r, 1.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn locus_sample_volumes() {
        let p1 = example_p1().locus_sample(&[1], 64, 0).unwrap();
        let total: f64 = p1.iter().map(|n| n.weight).sum();
        assert_abs_diff_eq!(total, PI, epsilon = 1e-12);
        for n in &p1 {
            for r in n.point.moduli_sq() {
                assert_abs_diff_eq!(r, 0.5, epsilon = 1e-14);
            }
        }
        let p2 = example_p2().locus_sample(&[1], 400, 0).unwrap();
        let total: f64 = p2.iter().map(|n| n.weight).sum();
        assert_abs_diff_eq!(total, (2.0 * PI).powi(2) / 27f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn locus_sample_positive_dimensional() {
        // d_G = 0, d_T = 1, Φ_T ≡ 1: the locus is all of ℙ¹, volume π.
        let ws = WeightSystem::new(1, vec![], vec![vec![1, 1]]).unwrap();
        let nodes = ws.locus_sample(&[1], 200_000, 5).unwrap();
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        assert!((total - PI).abs() / PI < 1e-2, "{total}");
        // ℙ²: vol = π²/2.
        let ws = WeightSystem::new(2, vec![], vec![vec![1, 1, 1]]).unwrap();
        let nodes = ws.locus_sample(&[1], 400_000, 6).unwrap();
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        assert!((total - PI * PI / 2.0).abs() / (PI * PI / 2.0) < 2e-2, "{total}");
    }

    proptest! {
        #[test]
        fn moment_sum_rule(r in prop::collection::vec(0.01f64..1.0, 3)) {
            // For W = [1,1,1], Φ = 1 regardless of r.
            let ws = WeightSystem::new(2, vec![], vec![vec![1, 1, 1]]).unwrap();
            let x = SpherePoint::from_moduli_sq(&r, &[0.0; 3]).unwrap();
            prop_assert!((ws.moment(&x).phi_t[0] - 1.0).abs() < 1e-14);
        }

        #[test]
        fn distance_nonnegative_and_zero_on_locus(r0 in 0.01f64..0.99, ph in -3.0f64..3.0) {
            let ws = example_p1();
            let x = SpherePoint::from_moduli_sq(&[r0, 1.0 - r0], &[ph, 0.0]).unwrap();
            let p = ws.locus_projection(&x, &[1]).unwrap();
            prop_assert!(p.distance >= 0.0);
            prop_assert!(ws.locus_distance(&p.point, &[1]).unwrap() < 1e-9);
        }
    }
}
