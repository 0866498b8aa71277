//! Sweep execution: one labelled series per algorithm variant, evaluated at
//! every sweep point, rendered as CSV with a resolved-parameter header.

use rayon::prelude::*;

use weit_core::bounds::{compute_coefficients, compute_coefficients_mrt, rate_from_coefficient};
use weit_core::model::{dbm_to_watts, SystemParams};
use weit_core::montecarlo::{search_optimal_tau, BeamMode, LinkEnsemble, McConfig, SearchMethod};
use weit_core::tradeoff::{solve_with_coefficient, Algorithm};

use crate::spec::{ExperimentSpec, Scenario, SweepVar};
use crate::CliError;

/// One curve in the output: an algorithm plus any per-series parameter
/// override (feedback budget for fig4, estimation quality for fig5).
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub algorithm: Algorithm,
    pub bits_override: Option<u32>,
    pub rho_override: Option<f64>,
    pub mrt: bool,
}

impl Series {
    fn plain(algorithm: Algorithm) -> Series {
        Series {
            label: algorithm.to_string(),
            algorithm,
            bits_override: None,
            rho_override: None,
            mrt: false,
        }
    }
}

/// Expands the scenario into its labelled series.
pub fn series_for(spec: &ExperimentSpec) -> Vec<Series> {
    match spec.scenario {
        Scenario::Fig4 => {
            let mut series: Vec<Series> = [0u32, 2, 4]
                .iter()
                .map(|&bits| Series {
                    label: format!("UA-B{bits}"),
                    algorithm: Algorithm::Ua,
                    bits_override: Some(bits),
                    rho_override: None,
                    mrt: false,
                })
                .collect();
            series.push(Series {
                label: "UA-FULL".to_string(),
                algorithm: Algorithm::Ua,
                bits_override: None,
                rho_override: None,
                mrt: true,
            });
            series
        }
        Scenario::Fig5 => [0.5f64, 0.9, 1.0]
            .iter()
            .map(|&rho| Series {
                label: format!("UA-RHO{rho:.2}"),
                algorithm: Algorithm::Ua,
                bits_override: None,
                rho_override: Some(rho),
                mrt: false,
            })
            .collect(),
        Scenario::Fig3 | Scenario::Custom => {
            spec.algorithms.iter().copied().map(Series::plain).collect()
        }
    }
}

/// One output row.
#[derive(Debug, Clone)]
pub struct Row {
    pub sweep_value: f64,
    pub label: String,
    pub tau_star: f64,
    pub closed_form_rate: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
}

/// Runs every (sweep value, series) cell and returns the sorted rows.
pub fn evaluate(spec: &ExperimentSpec) -> Result<Vec<Row>, CliError> {
    let series = series_for(spec);
    let values = spec.range.values();
    let mut rows: Vec<Row> = values
        .par_iter()
        .map(|&value| rows_for_value(spec, &series, value))
        .collect::<Result<Vec<Vec<Row>>, CliError>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then_with(|| a.label.cmp(&b.label))
    });
    Ok(rows)
}

/// Runs the sweep and renders the CSV document.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<String, CliError> {
    let rows = evaluate(spec)?;
    Ok(render_csv(spec, &rows))
}

fn rows_for_value(
    spec: &ExperimentSpec,
    series: &[Series],
    value: f64,
) -> Result<Vec<Row>, CliError> {
    // ensembles depend only on (bits, rho, beam source), so algorithm
    // series at the same sweep point share them
    let mut cache: Vec<((u32, u64, bool), LinkEnsemble)> = Vec::new();
    let mut rows = Vec::with_capacity(series.len());

    for s in series {
        let mut params = spec.params.clone();
        if let Some(bits) = s.bits_override {
            params.feedback_bits = bits;
        }
        if let Some(rho) = s.rho_override {
            params.rho = rho;
        }
        if spec.sweep != SweepVar::Tau {
            apply_sweep(&mut params, spec.sweep, value);
        }
        params
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;

        let mut cfg = spec.mc.clone();
        if s.mrt {
            cfg.beam = BeamMode::Mrt;
        }
        let key = (params.feedback_bits, params.rho.to_bits(), s.mrt);
        if !cache.iter().any(|(k, _)| *k == key) {
            let ensemble = if params.rho < 1.0 {
                LinkEnsemble::imperfect(&params, &cfg)
            } else {
                LinkEnsemble::perfect(&params, &cfg)
            }
            .map_err(|e| CliError::config(e.to_string()))?;
            cache.push((key, ensemble));
        }
        let ensemble = &cache.iter().find(|(k, _)| *k == key).expect("just inserted").1;

        rows.push(evaluate_cell(spec, s, &params, &cfg, ensemble, value)?);
    }
    Ok(rows)
}

fn evaluate_cell(
    spec: &ExperimentSpec,
    series: &Series,
    params: &SystemParams,
    cfg: &McConfig,
    ensemble: &LinkEnsemble,
    value: f64,
) -> Result<Row, CliError> {
    let coeff = if series.mrt {
        compute_coefficients_mrt(params)
    } else {
        compute_coefficients(params)
    };
    let slot = params.slot_seconds;
    // with an imperfect estimate the operative upper bound is the
    // degraded one
    let upper_k = if params.rho < 1.0 {
        coeff.b_imperfect
    } else {
        coeff.b_upper
    };

    let (tau_star, closed_form_rate) = if spec.sweep == SweepVar::Tau {
        let k = match series.algorithm {
            Algorithm::La => coeff.d_lower,
            _ => upper_k,
        };
        (value, rate_from_coefficient(value, k, slot).expect("tau validated"))
    } else {
        match series.algorithm {
            Algorithm::Ua => {
                let tag = if params.rho < 1.0 {
                    Algorithm::UaImperfect
                } else {
                    Algorithm::Ua
                };
                let sol = solve_with_coefficient(upper_k, slot, tag);
                (sol.tau_star, sol.rate_at_tau)
            }
            Algorithm::La => {
                let sol = solve_with_coefficient(coeff.d_lower, slot, Algorithm::La);
                (sol.tau_star, sol.rate_at_tau)
            }
            Algorithm::Ea => {
                let tau = 0.5 * slot;
                let rate = rate_from_coefficient(tau, upper_k, slot).expect("midpoint in range");
                (tau, rate)
            }
            Algorithm::Oa => {
                let sol =
                    search_optimal_tau(ensemble, cfg).map_err(|e| CliError::config(e.to_string()))?;
                let reference =
                    rate_from_coefficient(sol.tau_star, upper_k, slot).expect("tau within slot");
                (sol.tau_star, reference)
            }
            Algorithm::UaImperfect => unreachable!("not a user-facing choice"),
        }
    };

    let est = ensemble
        .rate_at(tau_star)
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(Row {
        sweep_value: value,
        label: series.label.clone(),
        tau_star,
        closed_form_rate,
        mc_mean: est.mean,
        mc_se: est.std_error,
    })
}

fn apply_sweep(params: &mut SystemParams, sweep: SweepVar, value: f64) {
    match sweep {
        SweepVar::P1Dbm => params.p1_watts = dbm_to_watts(value),
        SweepVar::FeedbackBits => params.feedback_bits = value as u32,
        SweepVar::Rho => params.rho = value,
        SweepVar::Tau => {}
    }
}

fn beam_token(beam: BeamMode) -> String {
    match beam {
        BeamMode::PerDrawRvq => "per-draw-rvq".to_string(),
        BeamMode::FixedRvq(seed) => format!("fixed-rvq:{seed}"),
        BeamMode::Mrt => "mrt".to_string(),
    }
}

fn search_token(search: SearchMethod) -> &'static str {
    match search {
        SearchMethod::Grid => "grid",
        SearchMethod::GoldenSection => "golden-section",
    }
}

/// Renders the document: `#`-prefixed metadata echoing the resolved spec,
/// a header row, then one row per (sweep value, series), already sorted.
/// Every numeric field uses the shortest representation that parses back to
/// the identical value.
pub fn render_csv(spec: &ExperimentSpec, rows: &[Row]) -> String {
    use std::fmt::Write;

    let series = series_for(spec);
    let labels: Vec<&str> = series.iter().map(|s| s.label.as_str()).collect();
    let p = &spec.params;

    let mut out = String::new();
    out.push_str("# weit sweep\n");
    let _ = writeln!(
        out,
        "# scenario={} sweep={} range={}",
        spec.scenario.token(),
        spec.sweep.token(),
        spec.range
    );
    let _ = writeln!(out, "# series={}", labels.join(","));
    let _ = writeln!(
        out,
        "# nt={} feedback_bits={} eta={} p1_watts={} sigma2_watts={} slot_seconds={}",
        p.nt, p.feedback_bits, p.eta, p.p1_watts, p.sigma2_watts, p.slot_seconds
    );
    let _ = writeln!(
        out,
        "# alpha={} theta={} rho={} entry_variance={} mode={}",
        p.alpha, p.theta, p.rho, p.entry_variance, p.mode
    );
    let _ = writeln!(
        out,
        "# draws={} seed={} search={} beam={} tau_points={}",
        spec.mc.n_draws,
        spec.mc.master_seed,
        search_token(spec.mc.search),
        beam_token(spec.mc.beam),
        spec.mc.tau_grid.len()
    );
    if spec.timestamp {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(out, "# generated_at={now}");
    }
    out.push_str(
        "sweep_var,sweep_value,algorithm,tau_star_s,closed_form_rate,mc_rate_mean,mc_rate_se,mode,seed\n",
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            spec.sweep.token(),
            row.sweep_value,
            row.label,
            row.tau_star,
            row.closed_form_rate,
            row.mc_mean,
            row.mc_se,
            p.mode,
            spec.mc.master_seed
        );
    }
    out
}
