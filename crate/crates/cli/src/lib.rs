//! Command implementations behind the `roundrobin` binary.
//!
//! Every command renders its report to a `String`, so output is a pure
//! function of the [`RunSpec`] (thread count excluded).

pub mod format;
pub mod spec;

use roundrobin::asymptotics::{
    approx_moments, assertion_diagnostics, expanded_max_mean, gumbel_cdf, limit_cdf_order,
    norm_constants, std_normal_tail,
};
use roundrobin::exact::{
    enumerate_grid, exact_tv, lambda_n_from, single_score_pmf, tv_bound_a1, DEFAULT_N_MAX,
};
use roundrobin::model::{validate_params, ModelParams};
use roundrobin::montecarlo::{
    default_reps, empirical_tv, estimate_exceedance_histogram, estimate_pair_correlation,
    relative_error_pct, table_rows, ExceedanceHistogram, McConfig, TableRow,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::format::{num, Csv};
pub use crate::spec::{Command, Format, RunSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] roundrobin::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for usage problems, 2 for validation, capacity and i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Model(_) | CliError::Io(_) => 2,
        }
    }
}

/// Rendered output plus warnings destined for standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub warnings: Vec<String>,
}

pub fn run(spec: &RunSpec) -> Result<Report, CliError> {
    match spec.command {
        Command::Table1 => cmd_table(1, spec),
        Command::Table2 => cmd_table(2, spec),
        Command::PoissonCheck => cmd_poisson_check(spec),
        Command::CorrCheck => cmd_corr_check(spec),
        Command::Exact => cmd_exact(spec),
        Command::Asymptotics => cmd_asymptotics(spec),
    }
}

/// Runs the spec and writes the body to `--out` or standard output.
pub fn execute(spec: &RunSpec) -> Result<Report, CliError> {
    let report = run(spec)?;
    if let Some(path) = &spec.out {
        std::fs::write(path, &report.body)?;
    }
    Ok(report)
}

struct Setup {
    p: f64,
    models: Vec<ModelParams>,
    warnings: Vec<String>,
}

fn setup(spec: &RunSpec) -> Result<Setup, CliError> {
    let p = spec.resolved_p()?;
    let n_list = spec.resolved_n_list()?;
    if spec.reps == Some(0) {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if spec.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let models = n_list
        .iter()
        .map(|&n| validate_params(n, p))
        .collect::<Result<Vec<_>, _>>()?;
    let warnings = models
        .first()
        .and_then(|m| m.applicability().warning())
        .map(|w| vec![w.to_string()])
        .unwrap_or_default();
    Ok(Setup { p, models, warnings })
}

fn mc_config(spec: &RunSpec, n: usize) -> McConfig {
    McConfig::new(spec.reps.unwrap_or_else(|| default_reps(n)), spec.seed).with_workers(spec.threads)
}

fn envelope(spec: &RunSpec, s: &Setup, per_n: Vec<Value>, extra: Value) -> String {
    let covered = s.warnings.is_empty();
    let mut diagnostics = json!({
        "applicability": if covered { "covered" } else { "open" },
        "warnings": s.warnings,
    });
    if let (Value::Object(d), Value::Object(e)) = (&mut diagnostics, extra) {
        d.extend(e);
    }
    let doc = json!({
        "command": spec.command.name(),
        "params": {
            "p": s.p,
            "seed": spec.seed,
            "reps": spec.reps,
            "n": s.models.iter().map(|m| m.n()).collect::<Vec<_>>(),
            "t": spec.resolved_t_grid(),
        },
        "per_n": per_n,
        "diagnostics": diagnostics,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json values serialize");
    text.push('\n');
    text
}

fn row_json(r: &TableRow) -> Value {
    json!({
        "j": r.j,
        "n": r.n,
        "reps": r.reps,
        "E_mc": r.mc_e,
        "E_mc_se": r.se_e,
        "E_hat": r.hat_e,
        "rel_E_pct": r.rel_e_pct,
        "sd_mc": r.mc_sd,
        "sd_hat": r.hat_sd,
        "rel_sd_pct": r.rel_sd_pct,
    })
}

/// Table 1 (`kind = 1`, the maximum) or table 2 (`kind = 2`, second and
/// third largest scores).
pub fn cmd_table(kind: u8, spec: &RunSpec) -> Result<Report, CliError> {
    let s = setup(spec)?;
    let offsets: &[usize] = if kind == 1 { &[0] } else { &[1, 2] };
    let mut rows_by_n = Vec::new();
    for params in &s.models {
        rows_by_n.push(table_rows(params, offsets, &mc_config(spec, params.n()))?);
    }
    let body = match spec.format {
        Format::Csv => {
            let mut cols = vec!["n", "reps", "E_mc", "E_hat", "rel_E_pct", "sd_mc", "sd_hat", "rel_sd_pct"];
            if kind == 2 {
                cols.insert(0, "j");
            }
            let mut csv = Csv::with_header(&cols);
            for r in rows_by_n.iter().flatten() {
                let mut fields = vec![
                    r.n.to_string(),
                    r.reps.to_string(),
                    num(r.mc_e),
                    num(r.hat_e),
                    num(r.rel_e_pct),
                    num(r.mc_sd),
                    num(r.hat_sd),
                    num(r.rel_sd_pct),
                ];
                if kind == 2 {
                    fields.insert(0, r.j.to_string());
                }
                csv.row(fields);
            }
            csv.finish()
        }
        Format::Json => {
            let per_n = rows_by_n
                .iter()
                .map(|rows| {
                    json!({
                        "n": rows[0].n,
                        "reps": rows[0].reps,
                        "rows": rows.iter().map(row_json).collect::<Vec<_>>(),
                    })
                })
                .collect();
            envelope(spec, &s, per_n, json!({}))
        }
    };
    Ok(Report { body, warnings: s.warnings })
}

/// Exceedance counts versus Poisson(lambda_n) and Poisson(e^-t), with exact
/// enumeration results for small `n`.
pub fn cmd_poisson_check(spec: &RunSpec) -> Result<Report, CliError> {
    let s = setup(spec)?;
    let t_grid = spec.resolved_t_grid();
    let mut csv = Csv::with_header(&[
        "n", "t", "x", "reps", "lambda_n", "lambda_limit", "mean_S", "se_mean_S", "tv_lambda_n",
        "tv_limit", "pi1", "normal_tail", "ratio_a2", "n_pi1",
    ]);
    let mut per_n = Vec::new();
    let mut all_bounds_hold = true;
    for params in &s.models {
        let n = params.n();
        let cfg = mc_config(spec, n).with_t_grid(t_grid.clone());
        let hists = estimate_exceedance_histogram(params, &cfg)?;
        let pmf = single_score_pmf(params);
        let exact = if n <= DEFAULT_N_MAX {
            Some(enumerate_grid(params, &t_grid, DEFAULT_N_MAX)?)
        } else {
            None
        };
        let mut per_t = Vec::new();
        for (i, h) in hists.iter().enumerate() {
            let t = h.t;
            let lambda = lambda_n_from(&pmf, params, t)?;
            let limit = (-t).exp();
            // lambda_n is zero when no score can exceed the threshold
            let tv_lambda = if lambda > 0.0 { Some(empirical_tv(h, lambda)?) } else { None };
            let tv_limit = empirical_tv(h, limit)?;
            let diag = assertion_diagnostics(params, t)?;
            let exact_json = match &exact {
                Some(all) => {
                    let e = &all[i];
                    let (tv, bound) = if lambda > 0.0 {
                        (Some(exact_tv(&e.exceedance_pmf, lambda)?), Some(tv_bound_a1(lambda, e.var_w())?))
                    } else {
                        (None, None)
                    };
                    let holds = match (tv, bound) {
                        (Some(tv), Some(b)) => tv <= b + 1e-12,
                        _ => true,
                    };
                    all_bounds_hold &= holds;
                    json!({
                        "w_pmf": e.exceedance_pmf,
                        "mean_w": e.mean_w(),
                        "var_w": e.var_w(),
                        "exact_tv": tv,
                        "a1_bound": bound,
                        "bound_holds": holds,
                        "pair_exceedance": e.pair_exceedance,
                        "pi1_squared": (lambda / n as f64).powi(2),
                    })
                }
                None => Value::Null,
            };
            csv.row([
                n.to_string(),
                num(t),
                num(h.x),
                h.reps.to_string(),
                num(lambda),
                num(limit),
                num(h.mean()),
                num(h.se_mean()),
                tv_lambda.map(num).unwrap_or_default(),
                num(tv_limit),
                num(diag.pi1),
                num(diag.normal_tail),
                num(diag.ratio_a2),
                num(diag.n_pi1),
            ]);
            per_t.push(json!({
                "t": t,
                "x": h.x,
                "cutoff_half_points": h.cutoff,
                "lambda_n": lambda,
                "lambda_limit": limit,
                "histogram": dense_counts(h),
                "mean_S": h.mean(),
                "se_mean_S": h.se_mean(),
                "tv_lambda_n": tv_lambda,
                "tv_limit": tv_limit,
                "assertions": diag,
                "exact": exact_json,
            }));
        }
        per_n.push(json!({ "n": n, "reps": cfg.reps, "per_t": per_t }));
    }
    let body = match spec.format {
        Format::Csv => csv.finish(),
        Format::Json => envelope(spec, &s, per_n, json!({ "a1_bounds_hold": all_bounds_hold })),
    };
    Ok(Report { body, warnings: s.warnings })
}

/// Counts indexed by the number of exceedances.
fn dense_counts(h: &ExceedanceHistogram) -> Vec<u64> {
    let top = h.counts.keys().next_back().copied().unwrap_or(0);
    (0..=top).map(|k| h.counts.get(&k).copied().unwrap_or(0)).collect()
}

/// Correlation of the first two players' scores against `-1/(n-1)`.
pub fn cmd_corr_check(spec: &RunSpec) -> Result<Report, CliError> {
    let s = setup(spec)?;
    let mut csv = Csv::with_header(&["n", "reps", "corr_mc", "se", "target", "z"]);
    let mut per_n = Vec::new();
    for params in &s.models {
        let n = params.n();
        let est = estimate_pair_correlation(params, &mc_config(spec, n))?;
        let target = -1.0 / (n as f64 - 1.0);
        let z = if est.se_mean > 0.0 { (est.mean - target) / est.se_mean } else { 0.0 };
        let exact = if n <= DEFAULT_N_MAX {
            Some(enumerate_grid(params, &[0.0], DEFAULT_N_MAX)?[0].corr_12)
        } else {
            None
        };
        csv.row([n.to_string(), est.reps.to_string(), num(est.mean), num(est.se_mean), num(target), num(z)]);
        per_n.push(json!({
            "n": n,
            "reps": est.reps,
            "estimate": est,
            "target": target,
            "z": z,
            "exact_corr": exact,
        }));
    }
    let body = match spec.format {
        Format::Csv => csv.finish(),
        Format::Json => envelope(spec, &s, per_n, json!({})),
    };
    Ok(Report { body, warnings: s.warnings })
}

/// Exact single-score, order-statistic and exceedance laws.
pub fn cmd_exact(spec: &RunSpec) -> Result<Report, CliError> {
    let s = setup(spec)?;
    let t_grid = spec.resolved_t_grid();
    let mut csv = Csv::with_header(&["n", "t", "quantity", "index", "value"]);
    let mut per_n = Vec::new();
    for params in &s.models {
        let n = params.n();
        let summaries = enumerate_grid(params, &t_grid, DEFAULT_N_MAX)?;
        let conv = single_score_pmf(params);
        let first = &summaries[0];
        let diff = first.first_marginal.max_abs_diff(&conv);
        let scalar = |csv: &mut Csv, t: Option<f64>, name: &str, v: f64| {
            csv.row([n.to_string(), t.map(num).unwrap_or_default(), name.to_string(), String::new(), num(v)]);
        };
        scalar(&mut csv, None, "corr_12", first.corr_12);
        scalar(&mut csv, None, "marginal_max_abs_diff", diff);
        for (k, q) in conv.iter() {
            csv.row([n.to_string(), String::new(), "single_score_pmf".into(), k.to_string(), num(q)]);
        }
        for o in &first.top {
            scalar(&mut csv, None, &format!("mean_top{}", o.j), o.mean);
            scalar(&mut csv, None, &format!("sd_top{}", o.j), o.sd);
            for (k, q) in o.pmf.iter() {
                csv.row([n.to_string(), String::new(), format!("pmf_top{}", o.j), k.to_string(), num(q)]);
            }
        }
        let mut per_t = Vec::new();
        for e in &summaries {
            let lambda = lambda_n_from(&conv, params, e.t)?;
            let (tv, bound) = if lambda > 0.0 {
                (Some(exact_tv(&e.exceedance_pmf, lambda)?), Some(tv_bound_a1(lambda, e.var_w())?))
            } else {
                (None, None)
            };
            for (k, q) in e.exceedance_pmf.iter().enumerate() {
                csv.row([n.to_string(), num(e.t), "w_pmf".into(), k.to_string(), num(*q)]);
            }
            scalar(&mut csv, Some(e.t), "lambda_n", lambda);
            scalar(&mut csv, Some(e.t), "var_w", e.var_w());
            scalar(&mut csv, Some(e.t), "pair_exceedance", e.pair_exceedance);
            if let (Some(tv), Some(b)) = (tv, bound) {
                scalar(&mut csv, Some(e.t), "exact_tv", tv);
                scalar(&mut csv, Some(e.t), "a1_bound", b);
            }
            per_t.push(json!({
                "t": e.t,
                "x": e.x,
                "cutoff_half_points": e.cutoff,
                "lambda_n": lambda,
                "w_pmf": e.exceedance_pmf,
                "mean_w": e.mean_w(),
                "var_w": e.var_w(),
                "first_exceedance": e.first_exceedance,
                "pair_exceedance": e.pair_exceedance,
                "pi1_squared": (lambda / n as f64).powi(2),
                "exact_tv": tv,
                "a1_bound": bound,
            }));
        }
        per_n.push(json!({
            "n": n,
            "single_score_pmf": conv,
            "enumerated_marginal": first.first_marginal,
            "marginal_max_abs_diff": diff,
            "corr_12": first.corr_12,
            "corr_target": -1.0 / (n as f64 - 1.0),
            "top": first.top,
            "per_t": per_t,
        }));
    }
    let body = match spec.format {
        Format::Csv => csv.finish(),
        Format::Json => envelope(spec, &s, per_n, json!({ "n_max": DEFAULT_N_MAX })),
    };
    Ok(Report { body, warnings: s.warnings })
}

/// Closed-form limit objects for each `n` and `t`.
pub fn cmd_asymptotics(spec: &RunSpec) -> Result<Report, CliError> {
    let s = setup(spec)?;
    let t_grid = spec.resolved_t_grid();
    let mut csv = Csv::with_header(&["n", "quantity", "arg", "value"]);
    let mut per_n = Vec::new();
    for params in &s.models {
        let n = params.n();
        let nc = norm_constants(n)?;
        let mut row = |name: &str, arg: String, v: f64| {
            csv.row([n.to_string(), name.to_string(), arg, num(v)]);
        };
        row("a_n", String::new(), nc.a);
        row("b_n", String::new(), nc.b);
        row("E_n", String::new(), params.mean_score());
        row("sigma_n", String::new(), params.score_sd());
        let moments = (0..3i64)
            .filter(|&j| (j as usize) < n)
            .map(|j| approx_moments(j, params))
            .collect::<Result<Vec<_>, _>>()?;
        for m in &moments {
            row("E_hat", m.j.to_string(), m.e_hat);
            row("sd_hat", m.j.to_string(), m.sd_hat);
        }
        let expanded = expanded_max_mean(params);
        row("E_hat_expanded", "0".into(), expanded);
        let mut per_t = Vec::new();
        for &t in &t_grid {
            let cdf = (0..3)
                .map(|j| limit_cdf_order(j, t))
                .collect::<Result<Vec<_>, _>>()?;
            let d = assertion_diagnostics(params, t)?;
            for (j, c) in cdf.iter().enumerate() {
                row(&format!("limit_cdf_j{j}"), num(t), *c);
            }
            row("normal_tail", num(t), std_normal_tail(d.x));
            row("n_pi1", num(t), d.n_pi1);
            row("ratio_a2", num(t), d.ratio_a2);
            per_t.push(json!({
                "t": t,
                "gumbel_cdf": gumbel_cdf(t),
                "limit_cdf": cdf,
                "assertions": d,
            }));
        }
        per_n.push(json!({
            "n": n,
            "norm_constants": nc,
            "E_n": params.mean_score(),
            "sigma_n": params.score_sd(),
            "moments": moments,
            "E_hat_expanded": expanded,
            "per_t": per_t,
        }));
    }
    let body = match spec.format {
        Format::Csv => csv.finish(),
        Format::Json => envelope(spec, &s, per_n, json!({})),
    };
    Ok(Report { body, warnings: s.warnings })
}

/// Recomputes `rel_*_pct` of a row from its own values.
pub fn row_is_consistent(r: &TableRow) -> bool {
    (relative_error_pct(r.hat_e, r.mc_e) - r.rel_e_pct).abs() <= 1e-9
        && (relative_error_pct(r.hat_sd, r.mc_sd) - r.rel_sd_pct).abs() <= 1e-9
}
