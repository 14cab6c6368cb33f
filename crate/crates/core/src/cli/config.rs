//! TOML experiment configuration.
//!
//! ```toml
//! n = 1
//! w_g = [[1, -1]]
//! w_t = [[1, 2]]
//! nu_g = [1]
//! nu_t = [1]
//! k = { min = 4, max = 1201, modulus = 3, residue = 1 }
//! points = [{ name = "locus-center" }, { r = [0.6, 0.4] }]
//! observable = { terms = [{ coef = 1.0, exps = [1, 1] }] }
//! seed = 7
//! ```
//!
//! Every validation failure names the line and column of the offending value.

use crate::actions::WeightSystem;
use crate::geometry::SpherePoint;
use crate::toeplitz::{Observable, RadialTerm, DEFAULT_MC_SAMPLES};
use crate::{Error, Result, C64};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::ops::Range;
use toml::Spanned;

/// Upper limit on the number of `k` values a single run may request.
pub const MAX_K_VALUES: usize = 100_000;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Spanned<usize>,
    pub w_g: Option<Spanned<Vec<Vec<i64>>>>,
    pub w_t: Spanned<Vec<Vec<i64>>>,
    pub nu_g: Option<Spanned<Vec<i64>>>,
    pub nu_t: Spanned<Vec<i64>>,
    pub k: Spanned<KSpec>,
    pub points: Option<Spanned<Vec<PointSpec>>>,
    pub observable: Option<Spanned<ObservableSpec>>,
    pub mc_samples: Option<Spanned<usize>>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    /// Run the brute-force dimension oracle alongside `dim`.
    pub oracle: Option<bool>,
    /// Locus quadrature nodes for predictions.
    pub quadrature_nodes: Option<Spanned<usize>>,
    /// Transversal grid for `profile` and `toeplitz`.
    pub t_max: Option<Spanned<f64>>,
    pub t_steps: Option<Spanned<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KSpec {
    pub list: Option<Vec<u64>>,
    pub min: Option<u64>,
    pub max: Option<u64>,
    pub step: Option<u64>,
    pub modulus: Option<u64>,
    pub residue: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    /// `"locus-center"` or a label for the other forms.
    pub name: Option<String>,
    /// Explicit coordinates `[[re, im], …]`, normalized on load.
    pub coords: Option<Vec<[f64; 2]>>,
    /// `|z_i|²`, normalized on load, with optional phases.
    pub r: Option<Vec<f64>>,
    pub phases: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub constant: Option<f64>,
    pub terms: Option<Vec<RadialTerm>>,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub ws: WeightSystem,
    pub nu_g: Vec<i64>,
    pub nu_t: Vec<i64>,
    pub ks: Vec<u64>,
    pub points: Vec<(String, SpherePoint)>,
    pub observable: Observable,
    pub mc_samples: usize,
    pub seed: u64,
    pub output: Option<String>,
    pub oracle: bool,
    pub quadrature_nodes: usize,
    pub t_max: f64,
    pub t_steps: usize,
    /// SHA-256 of the configuration text.
    pub config_hash: String,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |p| before[p + 1..].chars().count()) + 1;
    (line, col)
}

fn at(src: &str, span: Range<usize>, msg: impl std::fmt::Display) -> Error {
    let (l, c) = line_col(src, span.start);
    Error::Config(format!("line {l}, column {c}: {msg}"))
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl ExperimentConfig {
    pub fn parse(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| match e.span() {
            Some(s) => at(src, s, e.message()),
            None => Error::Config(e.message().to_string()),
        })
    }
}

/// Parses and validates; assumption violations (e.g. `0` in the hull of the
/// `T`-weights) pass through unchanged so callers can tell them apart.
pub fn load(src: &str) -> Result<Experiment> {
    let cfg = ExperimentConfig::parse(src)?;
    let n = *cfg.n.get_ref();
    if n == 0 {
        return Err(at(src, cfg.n.span(), "n must be at least 1"));
    }
    let w_t = cfg.w_t.get_ref().clone();
    let w_g = cfg.w_g.as_ref().map(|w| w.get_ref().clone()).unwrap_or_default();
    for (w, span) in [(&w_g, cfg.w_g.as_ref().map(|s| s.span())), (&w_t, Some(cfg.w_t.span()))] {
        if let Some(row) = w.iter().find(|r| r.len() != n + 1) {
            return Err(at(
                src,
                span.unwrap_or(0..0),
                format!("weight rows must have n + 1 = {} entries, found {}", n + 1, row.len()),
            ));
        }
    }
    if w_t.is_empty() {
        return Err(at(src, cfg.w_t.span(), "w_t needs at least one row"));
    }
    let ws = WeightSystem::new(n, w_g, w_t).map_err(|e| {
        if e.is_assumption_violation() {
            e
        } else {
            at(src, cfg.w_t.span(), e)
        }
    })?;
    let nu_t = cfg.nu_t.get_ref().clone();
    if nu_t.len() != ws.d_t() {
        return Err(at(src, cfg.nu_t.span(), format!("nu_t must have {} entries", ws.d_t())));
    }
    let nu_g = cfg.nu_g.as_ref().map(|v| v.get_ref().clone()).unwrap_or_default();
    if nu_g.len() != ws.d_g() {
        let span = cfg.nu_g.as_ref().map_or(cfg.nu_t.span(), |s| s.span());
        return Err(at(src, span, format!("nu_g must have {} entries", ws.d_g())));
    }
    let ks = expand_k(cfg.k.get_ref()).map_err(|m| at(src, cfg.k.span(), m))?;
    let points = match &cfg.points {
        None => vec![("locus-center".to_string(), ws.locus_center(&nu_t)?)],
        Some(p) => p
            .get_ref()
            .iter()
            .enumerate()
            .map(|(i, spec)| resolve_point(&ws, &nu_t, spec, i).map_err(|e| relabel(src, p.span(), e)))
            .collect::<Result<Vec<_>>>()?,
    };
    let observable = match &cfg.observable {
        None => Observable::Constant(1.0),
        Some(o) => {
            let spec = o.get_ref();
            match (&spec.constant, &spec.terms) {
                (Some(c), None) => Observable::Constant(*c),
                (None, Some(t)) => {
                    if let Some(bad) = t.iter().find(|t| t.exps.len() != n + 1) {
                        return Err(at(src, o.span(), format!("observable term exponents need {} entries, found {}", n + 1, bad.exps.len())));
                    }
                    Observable::RadialPolynomial(t.clone())
                }
                _ => return Err(at(src, o.span(), "observable needs exactly one of `constant` or `terms`")),
            }
        }
    };
    let positive = |v: &Option<Spanned<usize>>, default: usize, what: &str| -> Result<usize> {
        match v {
            None => Ok(default),
            Some(s) if *s.get_ref() == 0 => Err(at(src, s.span(), format!("{what} must be positive"))),
            Some(s) => Ok(*s.get_ref()),
        }
    };
    let t_max = match &cfg.t_max {
        None => 1.5,
        Some(s) if !(s.get_ref().is_finite() && *s.get_ref() >= 0.0) => {
            return Err(at(src, s.span(), "t_max must be finite and non-negative"))
        }
        Some(s) => *s.get_ref(),
    };
    Ok(Experiment {
        ws,
        nu_g,
        nu_t,
        ks,
        points,
        observable,
        mc_samples: positive(&cfg.mc_samples, DEFAULT_MC_SAMPLES, "mc_samples")?,
        seed: cfg.seed.unwrap_or(0),
        output: cfg.output.clone(),
        oracle: cfg.oracle.unwrap_or(false),
        quadrature_nodes: positive(&cfg.quadrature_nodes, 256, "quadrature_nodes")?,
        t_max,
        t_steps: positive(&cfg.t_steps, 7, "t_steps")?,
        config_hash: sha256_hex(src),
    })
}

fn relabel(src: &str, span: Range<usize>, e: Error) -> Error {
    if e.is_assumption_violation() {
        e
    } else {
        at(src, span, e)
    }
}

fn expand_k(k: &KSpec) -> std::result::Result<Vec<u64>, String> {
    let mut out = match (&k.list, k.min, k.max) {
        (Some(list), None, None) => list.clone(),
        (None, Some(lo), Some(hi)) => {
            if lo > hi {
                return Err(format!("k.min = {lo} exceeds k.max = {hi}"));
            }
            let step = k.step.unwrap_or(1);
            if step == 0 {
                return Err("k.step must be positive".into());
            }
            let count = (hi - lo) / step + 1;
            if count as usize > MAX_K_VALUES * 64 {
                return Err(format!("k range has {count} values"));
            }
            (lo..=hi).step_by(step as usize).collect()
        }
        _ => return Err("k needs either `list` or both `min` and `max`".into()),
    };
    match (k.modulus, k.residue) {
        (None, None) => {}
        (Some(0), _) => return Err("k.modulus must be positive".into()),
        (Some(m), r) => {
            let r = r.unwrap_or(0) % m;
            out.retain(|v| v % m == r);
        }
        (None, Some(_)) => return Err("k.residue requires k.modulus".into()),
    }
    if out.is_empty() {
        return Err("k selects no values".into());
    }
    if out.len() > MAX_K_VALUES {
        return Err(format!("k selects {} values (limit {MAX_K_VALUES})", out.len()));
    }
    Ok(out)
}

fn resolve_point(ws: &WeightSystem, nu_t: &[i64], p: &PointSpec, index: usize) -> Result<(String, SpherePoint)> {
    let label = p.name.clone().unwrap_or_else(|| format!("point{index}"));
    let np = ws.n() + 1;
    match (&p.coords, &p.r) {
        (None, None) if p.name.as_deref() == Some("locus-center") => Ok((label, ws.locus_center(nu_t)?)),
        (None, None) => Err(Error::InvalidArgument(format!(
            "point {index}: give `coords`, `r`, or name = \"locus-center\""
        ))),
        (Some(c), None) => {
            if c.len() != np {
                return Err(Error::InvalidArgument(format!("point {index}: coords need {np} entries")));
            }
            let z: Vec<C64> = c.iter().map(|[re, im]| C64::new(*re, *im)).collect();
            Ok((label, SpherePoint::normalized(z)?))
        }
        (None, Some(r)) => {
            if r.len() != np || r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "point {index}: r needs {np} non-negative entries"
                )));
            }
            let total: f64 = r.iter().sum();
            if total <= 0.0 {
                return Err(Error::InvalidArgument(format!("point {index}: r sums to zero")));
            }
            let phases = p.phases.clone().unwrap_or_else(|| vec![0.0; np]);
            if phases.len() != np {
                return Err(Error::InvalidArgument(format!("point {index}: phases need {np} entries")));
            }
            let r: Vec<f64> = r.iter().map(|v| v / total).collect();
            Ok((label, SpherePoint::from_moduli_sq(&r, &phases)?))
        }
        (Some(_), Some(_)) => Err(Error::InvalidArgument(format!(
            "point {index}: `coords` and `r` are mutually exclusive"
        ))),
    }
}
