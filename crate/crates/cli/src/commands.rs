//! Subcommand definitions and dispatch.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use frog_core::criteria::{
    bmz_sum, gantert_schmidt_verdict, general_series, iid_drift_terms, k_constant, GsVerdict,
    Verdict,
};
use frog_core::model::{validate_config, DriftSpec, FrogCountSpec, LambdaSpec, ModelConfig, Scope};
use frog_core::pgf::{DistributionSpec, LogPlusMoment};
use frog_core::rng::TrialStream;
use frog_core::sim::{estimate_survival, fplus_zero_mask, run_activation, zero_site_probability};

use crate::manifest::RunManifest;
use crate::output::{fmt_f64, fmt_opt_usize, write_csv};
use crate::schema::{parse_config, parse_config_lenient};
use crate::CliError;

const DEFAULT_N_MAX: usize = 1000;
const DEFAULT_CAP: usize = 1000;
const DEFAULT_TRIALS: u64 = 1000;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "frog", version, about = "Frog-model simulator and transience criteria engine")]
pub struct Cli {
    /// Model configuration JSON document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed for reproducible runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest series rank to evaluate.
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<usize>,
    /// Rightmost site of a simulation run.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Monte Carlo trials per estimate.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Absolute tolerance for the K-constant quadrature.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Report every violated model or criteria hypothesis over the horizon.
    Validate,
    /// Evaluate the general transience series term by term.
    Criteria,
    /// Compute the drift-integral constant K of the count distribution.
    Kconst,
    /// Estimate survival-to-cap for the activation process.
    Simulate {
        /// Also write one row per trial to this path.
        #[arg(long = "per-trial")]
        per_trial: Option<PathBuf>,
    },
    /// All-awake variant: empirical unreached-site frequencies vs closed form.
    Fplus,
    /// Evaluate a parameter grid: closed-form and heuristic verdict per point.
    Sweep {
        /// Grid overlay document: {"field": "drift.c", "values": [...]}.
        #[arg(long)]
        grid: PathBuf,
    },
    /// Log-moment dichotomy for i.i.d. counts.
    GsCheck,
    /// Partial sums of the subsequence-product condition.
    Bmz {
        /// Comma-separated, strictly increasing site subsequence.
        #[arg(long)]
        nk: String,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Validate => cmd_validate(&cli),
        Cmd::Criteria => cmd_criteria(&cli),
        Cmd::Kconst => cmd_kconst(&cli),
        Cmd::Simulate { per_trial } => cmd_simulate(&cli, per_trial.clone()),
        Cmd::Fplus => cmd_fplus(&cli),
        Cmd::Sweep { grid } => cmd_sweep(&cli, grid),
        Cmd::GsCheck => cmd_gs_check(&cli),
        Cmd::Bmz { nk } => cmd_bmz(&cli, nk),
    }
}

fn load_config_text(cli: &Cli) -> Result<(String, String), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let text = fs::read_to_string(path)?;
    Ok((text, path.display().to_string()))
}

fn base_manifest(subcommand: &str, config_path: Option<&str>) -> RunManifest {
    let mut m = RunManifest::new(subcommand);
    m.config = config_path.map(str::to_string);
    m
}

fn verdict_word(v: Verdict) -> &'static str {
    // Series here all share the polarity: divergence means transient.
    match v {
        Verdict::Diverges => "transient",
        Verdict::Converges => "non-transient",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn cmd_validate(cli: &Cli) -> Result<(), CliError> {
    let (text, path) = load_config_text(cli)?;
    let cfg = parse_config_lenient(&text)?;
    let horizon = cli.n_max.unwrap_or(DEFAULT_N_MAX).max(cli.cap.unwrap_or(2));
    let report = validate_config(&cfg, horizon);

    let mut manifest = base_manifest("validate", Some(&path));
    manifest.n_max = Some(horizon);
    manifest
        .extra
        .push(("valid".into(), report.is_valid_model().to_string()));

    let rows: Vec<Vec<String>> = report
        .violations
        .iter()
        .map(|v| {
            vec![
                v.scope.to_string(),
                fmt_opt_usize(v.site),
                v.message.clone(),
            ]
        })
        .collect();
    write_csv(
        cli.out.as_deref(),
        &manifest,
        &["scope", "site", "message"],
        &rows,
    )?;

    if report.is_valid_model() {
        Ok(())
    } else {
        Err(CliError::InvalidConfig(
            report
                .violations
                .iter()
                .filter(|v| v.scope == Scope::Model)
                .map(|v| v.to_string())
                .collect(),
        ))
    }
}

fn cmd_criteria(cli: &Cli) -> Result<(), CliError> {
    let (text, path) = load_config_text(cli)?;
    let cfg = parse_config(&text)?;
    let n_max = cli.n_max.unwrap_or(DEFAULT_N_MAX).max(2);
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);

    let report = general_series(&cfg, n_max)?;

    let mut manifest = base_manifest("criteria", Some(&path));
    manifest.n_max = Some(n_max);
    manifest.tol = Some(tol);
    manifest
        .extra
        .push(("verdict".into(), report.verdict.to_string()));
    manifest
        .extra
        .push(("reading".into(), verdict_word(report.verdict).into()));
    manifest.extra.push(("note".into(), report.note.clone()));

    if let FrogCountSpec::Iid(dist) = &cfg.counts {
        manifest.extra.push((
            "log_moment_dichotomy".into(),
            gantert_schmidt_verdict(dist).to_string(),
        ));
        if matches!(cfg.drift, DriftSpec::COverLog { .. }) {
            let closed = iid_drift_terms(&cfg.drift, dist, n_max.min(256), tol)?;
            manifest
                .extra
                .push(("drift_series_closed_form".into(), verdict_word(closed.verdict).into()));
        }
    }

    let rows: Vec<Vec<String>> = report
        .rows()
        .map(|(n, term, partial, log_term)| {
            vec![
                n.to_string(),
                fmt_f64(term),
                fmt_f64(partial),
                fmt_f64(log_term),
            ]
        })
        .collect();
    write_csv(
        cli.out.as_deref(),
        &manifest,
        &["n", "term", "partial_sum", "log_term"],
        &rows,
    )?;
    Ok(())
}

/// The count distribution a distribution-level command works on: the i.i.d.
/// distribution itself, or the site-independent Poisson of a constant-mean
/// sequence.
fn scalar_dist(cfg: &ModelConfig) -> Result<DistributionSpec, CliError> {
    match &cfg.counts {
        FrogCountSpec::Iid(d) => Ok(d.clone()),
        FrogCountSpec::PoissonSeq {
            lambda: LambdaSpec::Constant { value },
        } => Ok(DistributionSpec::Poisson { lambda: *value }),
        _ => Err(CliError::Usage(
            "this subcommand needs i.i.d. counts (or a constant poisson sequence)".into(),
        )),
    }
}

fn cmd_kconst(cli: &Cli) -> Result<(), CliError> {
    let (text, path) = load_config_text(cli)?;
    let cfg = parse_config(&text)?;
    let dist = scalar_dist(&cfg)?;
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let k = k_constant(&dist, tol)?;

    let mut manifest = base_manifest("kconst", Some(&path));
    manifest.tol = Some(tol);
    write_csv(
        cli.out.as_deref(),
        &manifest,
        &["value", "abs_error_bound"],
        &[vec![fmt_f64(k.value), fmt_f64(k.abs_error_bound)]],
    )?;
    Ok(())
}

fn cmd_simulate(cli: &Cli, per_trial: Option<PathBuf>) -> Result<(), CliError> {
    let (text, path) = load_config_text(cli)?;
    let cfg = parse_config(&text)?;
    let cap = cli.cap.unwrap_or(DEFAULT_CAP).max(1);
    let trials = cli.trials.unwrap_or(DEFAULT_TRIALS).max(1);
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);

    let est = estimate_survival(&cfg, cap, trials, seed)?;

    let mut manifest = base_manifest("simulate", Some(&path));
    manifest.cap = Some(cap);
    manifest.trials = Some(trials);
    manifest.seed = Some(seed);
    if let Some(p) = &per_trial {
        manifest
            .extra
            .push(("per_trial".into(), p.display().to_string()));
    }

    write_csv(
        cli.out.as_deref(),
        &manifest,
        &[
            "cap",
            "trials",
            "survived",
            "proportion",
            "ci_low",
            "ci_high",
            "master_seed",
        ],
        &[vec![
            cap.to_string(),
            trials.to_string(),
            est.survived.to_string(),
            fmt_f64(est.proportion),
            fmt_f64(est.ci_low),
            fmt_f64(est.ci_high),
            seed.to_string(),
        ]],
    )?;

    if let Some(per_trial_path) = per_trial {
        let outcomes: Result<Vec<_>, frog_core::Error> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut stream = TrialStream::for_trial(seed, trial);
                run_activation(&cfg, cap, &mut stream)
            })
            .collect();
        let outcomes = outcomes?;
        let rows: Vec<Vec<String>> = outcomes
            .iter()
            .enumerate()
            .map(|(trial, out)| {
                vec![
                    trial.to_string(),
                    fmt_opt_usize(out.died_at),
                    out.activated_frogs.to_string(),
                    out.activated_sites.to_string(),
                ]
            })
            .collect();
        write_csv(
            Some(&per_trial_path),
            &manifest,
            &["trial", "died_at", "activated_frogs", "activated_sites"],
            &rows,
        )?;
    }
    Ok(())
}

fn cmd_fplus(cli: &Cli) -> Result<(), CliError> {
    let (text, path) = load_config_text(cli)?;
    let cfg = parse_config(&text)?;
    let cap = cli.cap.unwrap_or(DEFAULT_CAP).max(1);
    let trials = cli.trials.unwrap_or(DEFAULT_TRIALS).max(1);
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);

    // Per-site zero counts, summed order-independently across trials.
    let zeros: Result<Vec<u64>, frog_core::Error> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = TrialStream::for_trial(seed, trial);
            fplus_zero_mask(&cfg, cap, &mut stream)
                .map(|mask| mask.iter().map(|z| u64::from(*z)).collect::<Vec<u64>>())
        })
        .try_reduce(
            || vec![0u64; cap],
            |mut acc, m| {
                for (a, b) in acc.iter_mut().zip(m) {
                    *a += b;
                }
                Ok(acc)
            },
        );
    let zeros = zeros?;

    let mut manifest = base_manifest("fplus", Some(&path));
    manifest.cap = Some(cap);
    manifest.trials = Some(trials);
    manifest.seed = Some(seed);
    let mean_zero_sites = zeros.iter().sum::<u64>() as f64 / trials as f64;
    let expect_zero_sites: f64 = (1..=cap).map(|n| zero_site_probability(&cfg, n)).sum();
    manifest
        .extra
        .push(("mean_zero_sites".into(), fmt_f64(mean_zero_sites)));
    manifest
        .extra
        .push(("expected_zero_sites".into(), fmt_f64(expect_zero_sites)));

    let rows: Vec<Vec<String>> = zeros
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let n = i + 1;
            let empirical = count as f64 / trials as f64;
            let closed = zero_site_probability(&cfg, n);
            let sigma = (closed * (1.0 - closed) / trials as f64).sqrt();
            vec![
                n.to_string(),
                trials.to_string(),
                count.to_string(),
                fmt_f64(empirical),
                fmt_f64(closed),
                fmt_f64((empirical - closed).abs()),
                fmt_f64(sigma),
            ]
        })
        .collect();
    write_csv(
        cli.out.as_deref(),
        &manifest,
        &["n", "trials", "zeros", "empirical", "closed_form", "abs_diff", "sigma"],
        &rows,
    )?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridJson {
    field: String,
    values: Vec<f64>,
}

fn cmd_sweep(cli: &Cli, grid_path: &Path) -> Result<(), CliError> {
    let (text, path) = load_config_text(cli)?;
    let base = parse_config(&text)?;
    let grid: GridJson = serde_json::from_str(&fs::read_to_string(grid_path)?)
        .map_err(|e| CliError::Parse(format!("grid: {e}")))?;
    let n_max = cli.n_max.unwrap_or(DEFAULT_N_MAX).max(2);
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);

    let mut manifest = base_manifest("sweep", Some(&path));
    manifest.n_max = Some(n_max);
    manifest.tol = Some(tol);
    manifest.extra.push(("grid".into(), grid_path.display().to_string()));
    manifest.extra.push(("field".into(), grid.field.clone()));

    let mut rows = Vec::with_capacity(grid.values.len());
    for &value in &grid.values {
        let cfg = overlay(&base, &grid.field, value)?;
        let report = validate_config(&cfg, n_max);
        if !report.is_valid_model() {
            return Err(CliError::InvalidConfig(
                report.violations.iter().map(|v| v.to_string()).collect(),
            ));
        }

        let (k_col, crit_col, closed) = closed_form_verdict(&cfg, tol)?;
        let series = general_series(&cfg, n_max)?;
        rows.push(vec![
            fmt_f64(value),
            k_col,
            crit_col,
            closed,
            series.verdict.to_string(),
            fmt_f64(*series.terms.last().expect("nonempty")),
            fmt_f64(*series.partial_sums.last().expect("nonempty")),
        ]);
    }

    write_csv(
        cli.out.as_deref(),
        &manifest,
        &[
            "value",
            "k_const",
            "critical_c",
            "closed_verdict",
            "series_verdict",
            "last_term",
            "last_partial_sum",
        ],
        &rows,
    )?;
    Ok(())
}

fn overlay(base: &ModelConfig, field: &str, value: f64) -> Result<ModelConfig, CliError> {
    let mut cfg = base.clone();
    match field {
        "drift.c" => match &mut cfg.drift {
            DriftSpec::COverLog { c, .. } => *c = value,
            _ => {
                return Err(CliError::Usage(
                    "grid field drift.c needs a c_over_log drift".into(),
                ))
            }
        },
        "drift.p" => match &mut cfg.drift {
            DriftSpec::Constant { p } => *p = value,
            _ => {
                return Err(CliError::Usage(
                    "grid field drift.p needs a constant drift".into(),
                ))
            }
        },
        "p0" => cfg.p0 = value,
        other => {
            return Err(CliError::Usage(format!(
                "unsupported grid field {other:?} (supported: drift.c, drift.p, p0)"
            )))
        }
    }
    Ok(cfg)
}

/// `(K, K/4, verdict)` columns for a sweep row; `-` where no closed form
/// applies.
fn closed_form_verdict(cfg: &ModelConfig, tol: f64) -> Result<(String, String, String), CliError> {
    let FrogCountSpec::Iid(dist) = &cfg.counts else {
        return Ok(("-".into(), "-".into(), "-".into()));
    };
    match &cfg.drift {
        DriftSpec::COverLog { .. } => {
            let k = k_constant(dist, tol)?;
            // The sharp threshold evaluation lives in iid_drift_terms; a tiny
            // n_max is enough since only the closed form is read here.
            let series = iid_drift_terms(&cfg.drift, dist, 8, tol)?;
            let closed = match series.verdict {
                Verdict::Diverges => "transient",
                Verdict::Converges => "non-transient",
                Verdict::Inconclusive => "inconclusive",
            };
            Ok((fmt_f64(k.value), fmt_f64(k.value / 4.0), closed.into()))
        }
        DriftSpec::Constant { .. } => {
            // Constant drift with i.i.d. counts: the log-moment dichotomy
            // decides outright.
            let verdict = match gantert_schmidt_verdict(dist) {
                GsVerdict::Transient => "transient",
                GsVerdict::NonTransient => "non-transient",
                GsVerdict::Inconclusive => "inconclusive",
            };
            Ok(("-".into(), "-".into(), verdict.into()))
        }
        _ => Ok(("-".into(), "-".into(), "-".into())),
    }
}

fn cmd_gs_check(cli: &Cli) -> Result<(), CliError> {
    let (text, path) = load_config_text(cli)?;
    let cfg = parse_config(&text)?;
    let dist = scalar_dist(&cfg)?;

    let moment = dist.log_plus_moment(10_000_000);
    let verdict = gantert_schmidt_verdict(&dist);
    let (status, value) = match &moment {
        LogPlusMoment::Finite(v) => ("finite", fmt_f64(*v)),
        LogPlusMoment::Diverges => ("diverges", String::new()),
        LogPlusMoment::Truncated { value, .. } => ("truncated", fmt_f64(*value)),
    };

    let manifest = base_manifest("gs-check", Some(&path));
    write_csv(
        cli.out.as_deref(),
        &manifest,
        &["log_plus_moment", "value", "verdict"],
        &[vec![status.into(), value, verdict.to_string()]],
    )?;
    Ok(())
}

fn cmd_bmz(cli: &Cli, nk: &str) -> Result<(), CliError> {
    let (text, path) = load_config_text(cli)?;
    let cfg = parse_config(&text)?;
    let subseq: Vec<usize> = nk
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Usage(format!("--nk entry {s:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if subseq.len() < 2 {
        return Err(CliError::Usage("--nk needs at least two entries".into()));
    }
    let k_max = subseq.len() - 1;
    let report = bmz_sum(&cfg, &subseq, k_max)?;

    let mut manifest = base_manifest("bmz", Some(&path));
    manifest.extra.push(("nk".into(), nk.to_string()));
    manifest.extra.push(("note".into(), report.note.clone()));

    let rows: Vec<Vec<String>> = report
        .rows()
        .map(|(k, term, partial, log_term)| {
            vec![
                k.to_string(),
                subseq[k].to_string(),
                fmt_f64(term),
                fmt_f64(partial),
                fmt_f64(log_term),
            ]
        })
        .collect();
    write_csv(
        cli.out.as_deref(),
        &manifest,
        &["k", "n_k", "term", "partial_sum", "log_term"],
        &rows,
    )?;
    Ok(())
}
