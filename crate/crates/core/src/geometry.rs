//! Points and tangent vectors of `X = S^{2n+1}` over `ℙⁿ`.
//!
//! The Kähler form is normalized so that `∫_{ℙ¹} ω = π`; at the center of an
//! adapted frame it is the standard `(i/2) Σ dz_j ∧ dz̄_j`, i.e.
//! `ω(a, b) = -Im⟨a, b⟩` and `g(a, b) = ω(a, J b) = Re⟨a, b⟩`. With this
//! sign `ω(e, J e) = |e|² > 0`.
//!
//! The chart `(θ, v) ↦ e^{iθ}(x + Σ v_j e_j)/|x + Σ v_j e_j|` is the
//! normalized affine chart. It agrees with Heisenberg local coordinates to
//! second order at the center, which is all the leading-order formulas use.

use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// Tolerance on `|z| = 1`.
pub const UNIT_TOL: f64 = 1e-12;

/// `⟨a, b⟩ = Σ a_i conj(b_i)`.
pub fn hermitian(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Interleave a complex vector into `[Re, Im, Re, Im, …]`.
pub fn to_real(v: &[C64]) -> Vec<f64> {
    v.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn to_complex(v: &[f64]) -> Vec<C64> {
    v.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

/// A point of the unit circle bundle `X ⊂ ℂ^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    z: Vec<C64>,
}

impl SpherePoint {
    /// Wraps `z`, requiring `|z| = 1` within [`UNIT_TOL`].
    pub fn new(z: Vec<C64>) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::Dimension {
                what: "sphere point (need n >= 1)",
                expected: 2,
                found: z.len(),
            });
        }
        let nz = norm(&z);
        if (nz - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm: nz });
        }
        Ok(Self { z })
    }

    pub fn normalized(z: Vec<C64>) -> Result<Self> {
        let nz = norm(&z);
        if !(nz > 0.0 && nz.is_finite()) {
            return Err(Error::NotUnit { norm: nz });
        }
        Self::new(z.into_iter().map(|c| c / nz).collect())
    }

    /// The point with `|z_i|² = r_i` and `arg z_i = phases[i]`. `r` is
    /// normalized to sum to one.
    pub fn from_moduli_sq(r: &[f64], phases: &[f64]) -> Result<Self> {
        if phases.len() != r.len() {
            return Err(Error::Dimension {
                what: "phases",
                expected: r.len(),
                found: phases.len(),
            });
        }
        if r.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("negative squared modulus in {r:?}")));
        }
        let total: f64 = r.iter().sum();
        let z = r
            .iter()
            .zip(phases)
            .map(|(&ri, &ph)| C64::from_polar((ri / total).sqrt(), ph))
            .collect();
        Self::normalized(z)
    }

    pub fn coords(&self) -> &[C64] {
        &self.z
    }

    /// Projective dimension `n` (so the point lives in `ℂ^{n+1}`).
    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    pub fn moduli_sq(&self) -> Vec<f64> {
        self.z.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `e^{iθ} x`.
    pub fn rotate_fiber(&self, theta: f64) -> SpherePoint {
        let ph = C64::from_polar(1.0, theta);
        SpherePoint {
            z: self.z.iter().map(|c| c * ph).collect(),
        }
    }

    pub(crate) fn from_raw(z: Vec<C64>) -> Self {
        Self { z }
    }
}

/// Displacement `(θ, v)` in chart coordinates: `θ` along the fiber, `v ∈ ℂⁿ`
/// in frame coordinates of the base.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVectorX {
    pub theta: f64,
    pub v: Vec<C64>,
}

impl TangentVectorX {
    pub fn zero(n: usize) -> Self {
        Self {
            theta: 0.0,
            v: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn base(v: Vec<C64>) -> Self {
        Self { theta: 0.0, v }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            theta: self.theta * s,
            v: self.v.iter().map(|c| c * s).collect(),
        }
    }
}

/// A point `x` together with an orthonormal basis of `x^⊥ ⊂ ℂ^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedFrame {
    pub x: SpherePoint,
    pub e: Vec<Vec<C64>>,
}

impl AdaptedFrame {
    pub fn n(&self) -> usize {
        self.e.len()
    }

    /// Frame coordinates `⟨w, e_k⟩` of an ambient vector (the `ℂx` component drops out).
    pub fn base_coords(&self, w: &[C64]) -> Vec<C64> {
        self.e.iter().map(|ek| hermitian(w, ek)).collect()
    }

    /// `Σ v_k e_k`.
    pub fn ambient(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.x.z.len()];
        for (vk, ek) in v.iter().zip(&self.e) {
            for (o, c) in out.iter_mut().zip(ek) {
                *o += vk * c;
            }
        }
        out
    }

    /// Inverse of [`hlc_point`] near the center. `None` when `⟨y, x⟩ = 0`.
    pub fn chart_coords(&self, y: &SpherePoint) -> Option<TangentVectorX> {
        let c = hermitian(&y.z, &self.x.z);
        if c.norm() < 1e-300 {
            return None;
        }
        let w: Vec<C64> = y.z.iter().map(|yi| yi / c).collect();
        Some(TangentVectorX {
            theta: c.arg(),
            v: self.base_coords(&w),
        })
    }
}

/// Deterministic adapted frame: Gram–Schmidt of the coordinate axes against
/// `x`, dropping the axis where `|x_i|` is largest (lowest index on ties).
pub fn frame_at(x: &SpherePoint) -> AdaptedFrame {
    let dim = x.z.len();
    let mut drop = 0;
    for i in 1..dim {
        if x.z[i].norm() > x.z[drop].norm() {
            drop = i;
        }
    }
    let mut basis: Vec<Vec<C64>> = vec![x.z.clone()];
    for axis in (0..dim).filter(|&i| i != drop) {
        let mut w = vec![C64::new(0.0, 0.0); dim];
        w[axis] = C64::new(1.0, 0.0);
        // Two passes of modified Gram–Schmidt keep the Gram matrix at 1e-16.
        for _ in 0..2 {
            for b in &basis {
                let c = hermitian(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = norm(&w);
        basis.push(w.into_iter().map(|c| c / nw).collect());
    }
    basis.remove(0);
    AdaptedFrame {
        x: x.clone(),
        e: basis,
    }
}

/// `e^{iθ}(x + Σ v_j e_j)/|x + Σ v_j e_j|`, requiring `|v| < 1`.
pub fn hlc_point(f: &AdaptedFrame, theta: f64, v: &[C64]) -> Result<SpherePoint> {
    if v.len() != f.n() {
        return Err(Error::Dimension {
            what: "chart vector",
            expected: f.n(),
            found: v.len(),
        });
    }
    let nv = norm(v);
    if nv >= 1.0 {
        return Err(Error::ChartRadius { norm: nv });
    }
    if nv == 0.0 {
        return Ok(f.x.rotate_fiber(theta));
    }
    let mut w = f.ambient(v);
    for (wi, xi) in w.iter_mut().zip(&f.x.z) {
        *wi += xi;
    }
    let nw = norm(&w);
    let ph = C64::from_polar(1.0, theta) / nw;
    Ok(SpherePoint::from_raw(w.into_iter().map(|c| c * ph).collect()))
}

/// `(g, ω)` of two real tangent vectors at a frame center.
pub fn tangent_pairing(v1: &[f64], v2: &[f64]) -> (f64, f64) {
    let h = hermitian(&to_complex(v1), &to_complex(v2));
    (h.re, -h.im)
}

pub fn omega(v1: &[f64], v2: &[f64]) -> f64 {
    tangent_pairing(v1, v2).1
}

pub fn metric(v1: &[f64], v2: &[f64]) -> f64 {
    tangent_pairing(v1, v2).0
}

/// The complex structure: multiplication by `i` in frame coordinates.
pub fn apply_j(v: &[f64]) -> Vec<f64> {
    v.chunks(2).flat_map(|p| [-p[1], p[0]]).collect()
}

/// Fubini–Study distance of the projections, `arccos |⟨x, y⟩|`.
pub fn dist_proj(x: &SpherePoint, y: &SpherePoint) -> f64 {
    let c = hermitian(&x.z, &y.z).norm();
    chord_to_angle(((1.0 - c.min(1.0)) * 2.0).max(0.0).sqrt())
}

/// Great-circle distance on the sphere, `arccos Re⟨x, y⟩`.
pub fn dist_sphere(x: &SpherePoint, y: &SpherePoint) -> f64 {
    let d: f64 =
        x.z.iter().zip(&y.z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    chord_to_angle(d)
}

/// Angle subtended by a chord of the unit sphere; avoids `acos` near 1.
pub(crate) fn chord_to_angle(chord: f64) -> f64 {
    2.0 * (chord / 2.0).min(1.0).asin()
}

/// Matrix of `ω` pulled back through the chart at `v0`, by forward
/// differences of step `h` in each real chart direction.
pub fn omega_pullback(f: &AdaptedFrame, v0: &[C64], h: f64) -> Result<DMatrix<f64>> {
    let n = f.n();
    let p0 = hlc_point(f, 0.0, v0)?;
    let mut derivs = Vec::with_capacity(2 * n);
    for l in 0..2 * n {
        let mut v = v0.to_vec();
        let bump = if l % 2 == 0 { C64::new(h, 0.0) } else { C64::new(0.0, h) };
        v[l / 2] += bump;
        let p = hlc_point(f, 0.0, &v)?;
        let mut d: Vec<C64> = p.z.iter().zip(&p0.z).map(|(a, b)| (a - b) / h).collect();
        // Horizontal part at p0.
        let c = hermitian(&d, &p0.z);
        for (di, pi) in d.iter_mut().zip(&p0.z) {
            *di -= c * pi;
        }
        derivs.push(d);
    }
    Ok(DMatrix::from_fn(2 * n, 2 * n, |i, j| -hermitian(&derivs[i], &derivs[j]).im))
}

/// The standard form `(i/2) Σ dz ∧ dz̄` in interleaved real coordinates.
pub fn standard_omega(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i / 2 != j / 2 {
            0.0
        } else if i % 2 == 0 && j == i + 1 {
            1.0
        } else if i % 2 == 1 && j + 1 == i {
            -1.0
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_point(n: usize, rng: &mut impl Rng) -> SpherePoint {
        let z = (0..=n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        SpherePoint::normalized(z).unwrap()
    }

    fn random_real(len: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn assert_frame(f: &AdaptedFrame) {
        for (i, ei) in f.e.iter().enumerate() {
            assert!(hermitian(ei, f.x.coords()).norm() < 1e-12);
            for (j, ej) in f.e.iter().enumerate() {
                let g = hermitian(ei, ej);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - c(expect, 0.0)).norm() < 1e-12, "gram[{i}][{j}] = {g}");
            }
        }
    }

    #[test]
    fn rejects_non_unit() {
        assert!(matches!(
            SpherePoint::new(vec![c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::NotUnit { .. })
        ));
        assert!(SpherePoint::normalized(vec![c(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn frame_at_axis_point() {
        let x = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let f = frame_at(&x);
        assert_eq!(f.e, vec![vec![c(0.0, 0.0), c(1.0, 0.0)]]);
    }

    #[test]
    fn frame_at_diagonal_point() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = SpherePoint::new(vec![c(s, 0.0), c(s, 0.0)]).unwrap();
        let f = frame_at(&x);
        assert_frame(&f);
        assert_abs_diff_eq!(norm(&f.e[0]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn frame_at_random_seed_7() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_point(2, &mut rng);
        let f = frame_at(&x);
        assert_eq!(f.n(), 2);
        assert_frame(&f);
        // deterministic, bit for bit
        assert_eq!(frame_at(&x), f);
    }

    #[test]
    fn chart_center_and_fiber() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_point(2, &mut rng);
        let f = frame_at(&x);
        let zero = vec![c(0.0, 0.0); 2];
        assert_eq!(hlc_point(&f, 0.0, &zero).unwrap(), x);
        let p = hlc_point(&f, std::f64::consts::FRAC_PI_2, &zero).unwrap();
        for (a, b) in p.coords().iter().zip(x.coords()) {
            assert!((a - b * c(0.0, 1.0)).norm() < 1e-15);
        }
        for theta in [0.3, -2.0, 3.1] {
            assert_eq!(hlc_point(&f, theta, &zero).unwrap(), x.rotate_fiber(theta));
        }
    }

    #[test]
    fn chart_direct_normalization() {
        let x = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let f = frame_at(&x);
        let p = hlc_point(&f, 0.0, &[c(0.3, 0.0)]).unwrap();
        let s = 1.09f64.sqrt();
        assert_abs_diff_eq!(p.coords()[0].re, 1.0 / s, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coords()[1].re, 0.3 / s, epsilon = 1e-15);
    }

    #[test]
    fn chart_radius_enforced() {
        let x = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let f = frame_at(&x);
        assert!(matches!(hlc_point(&f, 0.0, &[c(1.0, 0.0)]), Err(Error::ChartRadius { .. })));
    }

    #[test]
    fn chart_inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_point(3, &mut rng);
        let f = frame_at(&x);
        let v: Vec<C64> = (0..3).map(|_| c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))).collect();
        let p = hlc_point(&f, 0.4, &v).unwrap();
        let back = f.chart_coords(&p).unwrap();
        assert_abs_diff_eq!(back.theta, 0.4, epsilon = 1e-13);
        for (a, b) in back.v.iter().zip(&v) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(tangent_pairing(&[1.0, 0.0], &[1.0, 0.0]), (1.0, 0.0));
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let (g, w) = tangent_pairing(&e1, &apply_j(&e1));
        assert_eq!((g, w), (0.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_real(6, &mut rng);
            let b = random_real(6, &mut rng);
            let (gab, wab) = tangent_pairing(&a, &b);
            let (gba, wba) = tangent_pairing(&b, &a);
            assert_abs_diff_eq!(gab, gba, epsilon = 1e-12);
            assert_abs_diff_eq!(wab, -wba, epsilon = 1e-12);
            // g(·,·) = ω(·, J·)
            assert_abs_diff_eq!(gab, omega(&a, &apply_j(&b)), epsilon = 1e-12);
        }
    }

    #[test]
    fn complex_structure() {
        assert_eq!(apply_j(&[1.0, 0.0]), vec![-0.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = random_real(4, &mut rng);
            let b = random_real(4, &mut rng);
            let jj = apply_j(&apply_j(&a));
            for (x, y) in jj.iter().zip(&a) {
                assert_eq!(*x, -*y);
            }
            assert_abs_diff_eq!(metric(&apply_j(&a), &apply_j(&b)), metric(&a, &b), epsilon = 1e-12);
        }
    }

    #[test]
    fn distances() {
        let x = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let y = SpherePoint::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(dist_proj(&x, &x), 0.0);
        assert_abs_diff_eq!(dist_proj(&x, &y), std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = random_point(2, &mut rng);
            let b = random_point(2, &mut rng);
            let d = random_point(2, &mut rng);
            assert_abs_diff_eq!(dist_proj(&a, &b), dist_proj(&b, &a), epsilon = 1e-14);
            assert!(dist_proj(&a, &d) <= dist_proj(&a, &b) + dist_proj(&b, &d) + 1e-12);
            assert!(dist_sphere(&a, &d) <= dist_sphere(&a, &b) + dist_sphere(&b, &d) + 1e-12);
            let theta: f64 = rng.gen_range(-3.0..3.0);
            assert!(dist_proj(&a, &a.rotate_fiber(theta)) < 1e-7);
            assert_abs_diff_eq!(
                dist_sphere(&a, &b),
                hermitian(a.coords(), b.coords()).re.clamp(-1.0, 1.0).acos(),
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn omega_pullback_is_standard_to_first_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = random_point(2, &mut rng);
        let f = frame_at(&x);
        let std = standard_omega(2);
        let zero = vec![c(0.0, 0.0); 2];
        let err = |eps: f64| (omega_pullback(&f, &zero, eps).unwrap() - &std).amax();
        let (e2, e3) = (err(1e-2), err(1e-3));
        assert!(e2 < 1e-2 && e3 < 1e-3, "errors {e2:e} {e3:e}");
        assert!(e3 < e2);
        // Away from the center the chart distorts ω only at second order.
        let dir: Vec<C64> = vec![c(0.6, 0.2), c(-0.3, 0.5)];
        let at = |eps: f64| {
            let v: Vec<C64> = dir.iter().map(|d| d * eps).collect();
            (omega_pullback(&f, &v, 1e-7).unwrap() - &std).amax()
        };
        let (a2, a3) = (at(1e-2), at(1e-3));
        assert!(a2 < 1e-3, "{a2:e}");
        assert!(a3 < a2 / 20.0, "{a2:e} {a3:e}");
    }
}
