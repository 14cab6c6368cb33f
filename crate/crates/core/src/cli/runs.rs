//! The experiment runners behind each subcommand.
//!
//! Sweeps are parallel over `k`; rows are always emitted in `k` order.

use super::config::{sha256_hex, Experiment};
use super::output::{Report, Table};
use crate::actions::{example_p1, example_p2, WeightSystem};
use crate::asymptotics::{
    cesaro_means, diagonal_leading, dim_prediction, fit_exponent, fit_line, h_exponent, lambda_nu, transversal_unit,
};
use crate::geometry::{frame_at, AdaptedFrame, SpherePoint, TangentVectorX};
use crate::hardy::{build_basis, degree_bound};
use crate::kernel::{szego_diag, szego_log_diag, szego_rescaled};
use crate::oracle::{brute_dim, p1_limit_corrected, p2_limit_corrected, stirling_p1_limit, stirling_p2_limit};
use crate::toeplitz::{
    toeplitz_kernel_from_matrix, toeplitz_matrix, toeplitz_near_diagonal_leading, toeplitz_trace, trace_prediction,
    Quadrature,
};
use crate::{Error, Result, C64};
use rayon::prelude::*;
use std::f64::consts::PI;

fn header(command: &str, config_hash: &str, seed: u64, tags: &str) -> Vec<(String, String)> {
    vec![
        ("equi-szego".into(), command.into()),
        ("config-sha256".into(), config_hash.into()),
        ("seed".into(), seed.to_string()),
        ("tags".into(), tags.into()),
    ]
}

fn l2(v: &[i64]) -> f64 {
    v.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt()
}

/// `(k‖ν_T‖/π)^e`.
fn growth(nu_t: &[i64], k: u64, e: f64) -> f64 {
    (k as f64 * l2(nu_t) / PI).powf(e)
}

/// `k, dim, oracle_dim, prediction, cesaro_mean`.
pub fn run_dim_table(e: &Experiment) -> Result<Report> {
    let pred = dim_prediction(&e.ws, &e.nu_t, e.quadrature_nodes, e.seed)?;
    let rows: Vec<(u64, usize, Option<u64>)> = e
        .ks
        .par_iter()
        .map(|&k| {
            let d = build_basis(&e.ws, &e.nu_g, &e.nu_t, k)?.dim();
            let o = if e.oracle {
                Some(brute_dim(&e.ws, &e.nu_g, &e.nu_t, k, degree_bound(&e.ws, &e.nu_t, k))?)
            } else {
                None
            };
            Ok((k, d, o))
        })
        .collect::<Result<_>>()?;
    let means = cesaro_means(&rows.iter().map(|r| r.1 as f64).collect::<Vec<_>>());
    let mut t = Table::new("dim", &["k", "dim", "oracle_dim", "prediction", "cesaro_mean"]);
    t.meta("prediction_constant", pred.constant)
        .meta("prediction_exponent", pred.exponent)
        .meta("quadrature_nodes", pred.nodes);
    if let Some(bad) = rows.iter().find(|r| r.2.is_some_and(|o| o != r.1 as u64)) {
        log::error!("dimension mismatch against the oracle at k = {}", bad.0);
    }
    for ((k, d, o), m) in rows.iter().zip(means) {
        t.push(vec![(*k).into(), (*d).into(), (*o).into(), (pred.constant * growth(&e.nu_t, *k, pred.exponent)).into(), m.into()]);
    }
    Ok(Report {
        header: header("dim", &e.config_hash, e.seed, "isotype-dimension; dimension-asymptotics"),
        tables: vec![t],
    })
}

fn fit_or_nan(series: &[(f64, f64)]) -> f64 {
    fit_exponent(series).map_or(f64::NAN, |f| f.slope)
}

/// `point, k, diag_value, leading_prediction, ratio, fitted_exponent`.
pub fn run_diag_scan(e: &Experiment) -> Result<Report> {
    let mut t = Table::new(
        "diag",
        &["point", "k", "diag_value", "leading_prediction", "ratio", "fitted_exponent"],
    );
    for (label, x) in &e.points {
        let f = frame_at(x);
        let rows: Vec<(u64, f64, f64)> = e
            .ks
            .par_iter()
            .map(|&k| {
                let b = build_basis(&e.ws, &e.nu_g, &e.nu_t, k)?;
                let lead = diagonal_leading(&e.ws, &f, &e.nu_g, &e.nu_t, k)?.value().re;
                Ok((k, szego_diag(&b, x), lead))
            })
            .collect::<Result<_>>()?;
        let series: Vec<(f64, f64)> = rows.iter().filter(|r| r.1 > 0.0).map(|r| (r.0 as f64, r.1)).collect();
        let slope = fit_or_nan(&series);
        t.meta(&format!("fitted_exponent[{label}]"), slope);
        for (k, d, l) in rows {
            let ratio = if l != 0.0 { d / l } else { f64::NAN };
            t.push(vec![label.as_str().into(), k.into(), d.into(), l.into(), ratio.into(), slope.into()]);
        }
    }
    t.meta("predicted_exponent", crate::asymptotics::diagonal_exponent(&e.ws));
    Ok(Report {
        header: header("diag", &e.config_hash, e.seed, "diagonal-growth; stabilizer-oscillation"),
        tables: vec![t],
    })
}

/// `point, k, dist_to_locus, log_diag, log_ratio, fitted_decay_rate`.
///
/// `log_ratio` subtracts the log-diagonal at the nearest locus point, which
/// removes the polynomial prefactor; the fitted rate is its slope in `k`.
pub fn run_decay_scan(e: &Experiment) -> Result<Report> {
    let mut t = Table::new(
        "decay",
        &["point", "k", "dist_to_locus", "log_diag", "log_ratio", "fitted_decay_rate"],
    );
    for (label, x) in &e.points {
        let proj = e.ws.locus_projection(x, &e.nu_t)?;
        let rows: Vec<(u64, f64, f64)> = e
            .ks
            .par_iter()
            .map(|&k| {
                let b = build_basis(&e.ws, &e.nu_g, &e.nu_t, k)?;
                let ld = szego_log_diag(&b, x);
                Ok((k, ld, ld - szego_log_diag(&b, &proj.point)))
            })
            .collect::<Result<_>>()?;
        let finite: Vec<&(u64, f64, f64)> = rows.iter().filter(|r| r.1.is_finite() && r.2.is_finite()).collect();
        let ks: Vec<f64> = finite.iter().map(|r| r.0 as f64).collect();
        let rate = fit_line(&ks, &finite.iter().map(|r| r.2).collect::<Vec<_>>()).map_or(f64::NAN, |f| f.slope);
        let raw = fit_line(&ks, &finite.iter().map(|r| r.1).collect::<Vec<_>>()).map_or(f64::NAN, |f| f.slope);
        t.meta(&format!("fitted_decay_rate[{label}]"), rate);
        t.meta(&format!("raw_log_diag_slope[{label}]"), raw);
        for (k, ld, lr) in rows {
            t.push(vec![label.as_str().into(), k.into(), proj.distance.into(), ld.into(), lr.into(), rate.into()]);
        }
    }
    Ok(Report {
        header: header("decay", &e.config_hash, e.seed, "off-locus-decay"),
        tables: vec![t],
    })
}

fn t_grid(e: &Experiment) -> Vec<f64> {
    if e.t_steps == 1 {
        return vec![0.0];
    }
    (0..e.t_steps).map(|i| e.t_max * i as f64 / (e.t_steps - 1) as f64).collect()
}

fn along(t: &[C64], s: f64) -> TangentVectorX {
    TangentVectorX::base(t.iter().map(|c| c * s).collect())
}

/// `point, k, t, kernel_ratio, prediction` with `prediction = exp(Re H(t, t))`.
pub fn run_profile_scan(e: &Experiment) -> Result<Report> {
    let mut t = Table::new("profile", &["point", "k", "t", "kernel_ratio", "prediction"]);
    let grid = t_grid(e);
    for (label, x) in &e.points {
        let f = frame_at(x);
        let dir = transversal_unit(&e.ws, &f)?;
        let preds: Vec<f64> = grid
            .iter()
            .map(|&s| Ok(h_exponent(&e.ws, &f, &e.nu_t, &along(&dir, s), &along(&dir, s))?.re.exp()))
            .collect::<Result<_>>()?;
        t.meta(&format!("lambda[{label}]"), lambda_nu(&e.ws, &f, &e.nu_t)?);
        let rows: Vec<Vec<(u64, f64, f64)>> = e
            .ks
            .par_iter()
            .map(|&k| {
                let b = build_basis(&e.ws, &e.nu_g, &e.nu_t, k)?;
                let zero = TangentVectorX::zero(e.ws.n());
                let d0 = szego_rescaled(&b, &f, &zero, &zero, k as f64)?.re;
                grid.iter()
                    .map(|&s| {
                        let u = along(&dir, s);
                        let v = szego_rescaled(&b, &f, &u, &u, k as f64)?;
                        Ok((k, s, if d0 > 0.0 { v.norm() / d0 } else { f64::NAN }))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for row in rows {
            for ((k, s, r), p) in row.into_iter().zip(&preds) {
                t.push(vec![label.as_str().into(), k.into(), s.into(), r.into(), (*p).into()]);
            }
        }
    }
    Ok(Report {
        header: header("profile", &e.config_hash, e.seed, "near-diagonal-scaling; gaussian-profile"),
        tables: vec![t],
    })
}

/// Trace table `k, trace, dim, trace_prediction` and near-diagonal samples
/// `k, t, exact_ratio, predicted_ratio` at the first point.
pub fn run_toeplitz(e: &Experiment) -> Result<Report> {
    let obs = &e.observable;
    let pred = trace_prediction(&e.ws, obs, &e.nu_t, e.quadrature_nodes, e.seed)?;
    let rows: Vec<(u64, f64, usize)> = e
        .ks
        .par_iter()
        .map(|&k| {
            let b = build_basis(&e.ws, &e.nu_g, &e.nu_t, k)?;
            let m = toeplitz_matrix(&b, obs, Quadrature::Dirichlet)?;
            Ok((k, toeplitz_trace(&m), b.dim()))
        })
        .collect::<Result<_>>()?;
    let mut trace = Table::new("trace", &["k", "trace", "dim", "trace_prediction"]);
    trace
        .meta("prediction_constant", pred.constant)
        .meta("prediction_error_bar", pred.error_bar)
        .meta("prediction_exponent", pred.exponent);
    for (k, tr, d) in &rows {
        trace.push(vec![(*k).into(), (*tr).into(), (*d).into(), (pred.constant * growth(&e.nu_t, *k, pred.exponent)).into()]);
    }
    let mut near = Table::new("near_diagonal", &["k", "t", "exact_ratio", "predicted_ratio"]);
    let (label, x) = e.points.first().ok_or_else(|| Error::InvalidArgument("no points".into()))?;
    near.meta("point", label);
    let f = frame_at(x);
    let dir = transversal_unit(&e.ws, &f)?;
    let grid = t_grid(e);
    // The predicted ratio does not depend on k.
    let l0 = toeplitz_near_diagonal_leading(&e.ws, &f, obs, &e.nu_t, 1, &vec![0.0; 2 * e.ws.n()])?;
    let preds: Vec<f64> = grid
        .iter()
        .map(|&s| {
            let p = toeplitz_near_diagonal_leading(&e.ws, &f, obs, &e.nu_t, 1, &crate::geometry::to_real(&along(&dir, s).v))?;
            Ok(if l0 != 0.0 { p / l0 } else { f64::NAN })
        })
        .collect::<Result<_>>()?;
    let samples: Vec<Vec<(u64, f64, f64, f64)>> = e
        .ks
        .par_iter()
        .map(|&k| {
            let b = build_basis(&e.ws, &e.nu_g, &e.nu_t, k)?;
            let m = toeplitz_matrix(&b, obs, Quadrature::Dirichlet)?;
            let x0 = crate::kernel::rescaled_point(&f, &TangentVectorX::zero(e.ws.n()), k as f64)?;
            let d0 = toeplitz_kernel_from_matrix(&b, &m, &x0, &x0).re;
            grid.iter()
                .zip(&preds)
                .map(|(&s, &p)| {
                    let y = crate::kernel::rescaled_point(&f, &along(&dir, s), k as f64)?;
                    let ex = toeplitz_kernel_from_matrix(&b, &m, &y, &y).re;
                    Ok((k, s, if d0 != 0.0 { ex / d0 } else { f64::NAN }, p))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    for row in samples {
        for (k, s, ex, p) in row {
            near.push(vec![k.into(), s.into(), ex.into(), p.into()]);
        }
    }
    Ok(Report {
        header: header("toeplitz", &e.config_hash, e.seed, "toeplitz-trace; toeplitz-near-diagonal"),
        tables: vec![trace, near],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExampleName {
    P1,
    P2,
}

fn center(ws: &WeightSystem) -> Result<AdaptedFrame> {
    crate::actions::center_frame(ws, &[1])
}

/// End-to-end report for one of the two worked examples.
pub fn run_example(name: ExampleName, seed: u64) -> Result<Report> {
    match name {
        ExampleName::P1 => example_p1_report(seed),
        ExampleName::P2 => example_p2_report(seed),
    }
}

fn closed_form_table(
    ws: &WeightSystem,
    nu_g: &[i64],
    sizes: &[u64],
    k_of: impl Fn(u64) -> u64 + Sync,
    stated: impl Fn(u64) -> f64 + Sync,
    corrected: impl Fn(u64) -> f64 + Sync,
    size_name: &str,
) -> Result<Table> {
    let f = center(ws)?;
    let mut t = Table::new(
        "closed_form",
        &[size_name, "k", "diag", "stated_limit", "ratio_stated", "corrected_limit", "ratio_corrected"],
    );
    let rows: Vec<(u64, u64, f64)> = sizes
        .par_iter()
        .map(|&s| {
            let k = k_of(s);
            let b = build_basis(ws, nu_g, &[1], k)?;
            Ok((s, k, szego_diag(&b, &f.x)))
        })
        .collect::<Result<_>>()?;
    let errs: Vec<(f64, f64)> = rows.iter().map(|r| (r.0 as f64, (r.2 / corrected(r.0) - 1.0).abs())).collect();
    t.meta("corrected_error_slope", fit_or_nan(&errs));
    for (s, k, d) in rows {
        t.push(vec![
            s.into(),
            k.into(),
            d.into(),
            stated(s).into(),
            (d / stated(s)).into(),
            corrected(s).into(),
            (d / corrected(s)).into(),
        ]);
    }
    Ok(t)
}

fn dichotomy_table(ws: &WeightSystem, nu_g: &[i64], k_max: u64, modulus: u64) -> Result<Table> {
    let mut t = Table::new("dimension", &["k", "dim", "k_mod"]);
    t.meta("modulus", modulus);
    for k in 0..=k_max {
        let d = build_basis(ws, nu_g, &[1], k)?.dim();
        t.push(vec![k.into(), d.into(), (k % modulus).into()]);
    }
    Ok(t)
}

fn stabilizer_table(ws: &WeightSystem) -> Result<Table> {
    let f = center(ws)?;
    let stab = ws.stabilizer(&f.x)?;
    let mut t = Table::new("stabilizer", &["element", "angles"]);
    t.meta("order", stab.len()).meta("script_d", ws.script_d(&f)?).meta("lambda", lambda_nu(ws, &f, &[1])?);
    for (i, s) in stab.iter().enumerate() {
        let a: Vec<String> = s.sigma.iter().map(|v| format!("{v:.12}")).collect();
        t.push(vec![i.into(), a.join(" ").into()]);
    }
    Ok(t)
}

fn example_p1_report(seed: u64) -> Result<Report> {
    let ws = example_p1();
    let mut tables = vec![closed_form_table(
        &ws,
        &[1],
        &[25, 50, 100, 200, 400],
        |b| 3 * b + 1,
        stirling_p1_limit,
        p1_limit_corrected,
        "b",
    )?];
    // Off-locus decay at r₀ = 0.6 with ν_G = 1.
    let x = SpherePoint::from_moduli_sq(&[0.6, 0.4], &[0.0, 0.0])?;
    let proj = ws.locus_projection(&x, &[1])?;
    let bs: Vec<u64> = (100..=400).step_by(25).collect();
    let rows: Vec<(u64, f64, f64)> = bs
        .par_iter()
        .map(|&b| {
            let basis = build_basis(&ws, &[1], &[1], 3 * b + 1)?;
            let ld = szego_log_diag(&basis, &x);
            Ok((b, ld, ld - szego_log_diag(&basis, &proj.point)))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let mut decay = Table::new("decay", &["b", "k", "log_diag", "log_ratio"]);
    decay
        .meta("point_r", "0.6 0.4")
        .meta("dist_to_locus", proj.distance)
        .meta("expected_rate_per_b", -(25.0f64 / 24.0).ln())
        .meta("fitted_rate_per_b", fit_line(&xs, &rows.iter().map(|r| r.2).collect::<Vec<_>>())?.slope)
        .meta("raw_log_diag_slope_per_b", fit_line(&xs, &rows.iter().map(|r| r.1).collect::<Vec<_>>())?.slope);
    for (b, ld, lr) in rows {
        decay.push(vec![b.into(), (3 * b + 1).into(), ld.into(), lr.into()]);
    }
    tables.push(decay);
    tables.push(dichotomy_table(&ws, &[1], 30, 3)?);
    tables.push(stabilizer_table(&ws)?);
    Ok(Report {
        header: header("example p1", &sha256_hex("example p1"), seed, "worked-example-p1"),
        tables,
    })
}

fn example_p2_report(seed: u64) -> Result<Report> {
    let ws = example_p2();
    let tables = vec![
        closed_form_table(
            &ws,
            &[1, 1],
            &[25, 50, 100, 150, 200],
            |c| 6 * c + 4,
            |c| stirling_p2_limit(c, 1, 1),
            p2_limit_corrected,
            "c",
        )?,
        dichotomy_table(&ws, &[1, 1], 40, 6)?,
        stabilizer_table(&ws)?,
    ];
    Ok(Report {
        header: header("example p2", &sha256_hex("example p2"), seed, "worked-example-p2"),
        tables,
    })
}
