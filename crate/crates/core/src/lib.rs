//! # equi-szego
//!
//! Equivariant Szegő projector kernels on the unit circle bundle
//! `X = S^{2n+1} → ℙⁿ` of the hyperplane bundle, under a pair of commuting
//! torus actions `G` and `T` given by integer weight matrices.
//!
//! The Hardy space of `X` splits into joint isotypes `H(X)_{ν_G, kν_T}`,
//! each spanned by normalized monomials `s_J = √c_J · z^J`. This crate
//! enumerates those bases exactly, evaluates the projector kernels in the
//! log domain, and compares them against the leading terms of their
//! `k → ∞` asymptotics: Gaussian decay transversal to the locus
//! `M_{0,ν_T} = Φ_P^{-1}(ℝ₊·(0, ν_T))`, polynomial growth on it, the
//! roots-of-unity oscillation coming from finite stabilizers, and the
//! corresponding statements for Berezin–Toeplitz operators.
//!
//! ## Conventions
//!
//! | Object | Convention |
//! |--------|------------|
//! | Action | `z_i ↦ exp(-i ⟨w_i, p⟩) z_i`, `w_i` the weight column of coordinate `i` |
//! | Moment map | `Φ_l(z) = Σ_i W[l][i] |z_i|²` on the unit sphere |
//! | Symplectic form | `ω(a, b) = -Im⟨a, b⟩` in frame coordinates, `∫_{ℙ¹} ω = π` |
//! | Metric | `g(a, b) = ω(a, J b) = Re⟨a, b⟩` |
//! | Volume on `X` | Euclidean surface measure of `S^{2n+1}` divided by `2π` |
//! | Characters | `χ_{ν_P}(p) = exp(i(⟨ν_G, γ⟩ + k⟨ν_T, ϑ⟩))` for `p = (γ, ϑ)` |
//!
//! Hermitian products are `⟨a, b⟩ = Σ a_i conj(b_i)`. Real tangent vectors of
//! length `2n` are interleaved `[Re v₀, Im v₀, Re v₁, Im v₁, …]`.
//!
//! ## Modules
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`geometry`] | sphere points, adapted frames, the normalized-affine chart |
//! | [`actions`] | weight systems, moment maps, stabilizers, locus projection |
//! | [`hardy`] | exact isotype enumeration and log-domain normalization |
//! | [`kernel`] | Szegő kernel evaluation (diagonal, off-diagonal, rescaled) |
//! | [`asymptotics`] | predicted leading terms and power-law fits |
//! | [`toeplitz`] | Toeplitz matrices, kernels, traces |
//! | [`oracle`] | brute-force and closed-form references |
//! | [`cli`] | config-driven experiment runner behind the `equi-szego` binary |

pub mod actions;
pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod hardy;
pub mod kernel;
pub mod lattice;
pub mod oracle;
pub mod special;
pub mod toeplitz;

pub use error::{Error, Result};

/// Double-precision complex number used throughout.
pub type C64 = num_complex::Complex64;
