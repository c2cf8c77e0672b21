//! Scenario execution: one trajectory per `(K, λ)` point, run concurrently.

use std::time::Instant;

use nhkr_core::{Error as CoreError, OperatorPair, OtocEngine, OtocRecord, SystemParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Scenario};
use crate::error::Result;

/// Run metadata kept in memory but not written to disk, so that identical
/// configs give identical bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunInfo {
    pub n_theta: usize,
    pub wall_time_s: f64,
}

/// One `(λ, t)` sample. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub hbar: f64,
    pub t: usize,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub re_c3: Option<f64>,
    pub otoc: Option<f64>,
    pub fotoc: f64,
    pub cf: f64,
    pub mean_p: f64,
    pub mean_p2: f64,
    pub norm_log: f64,
    pub c1_pred: Option<f64>,
    pub c2_pred: Option<f64>,
    pub re_c3_pred: Option<f64>,
    pub otoc_pred: Option<f64>,
    pub cf_pred: Option<f64>,
    pub p2_pred: Option<f64>,
    pub norm_log_pred: Option<f64>,
    #[serde(skip)]
    pub run: RunInfo,
}

impl ResultRow {
    pub fn from_record(scenario: Scenario, p: &SystemParams, r: &OtocRecord, run: RunInfo) -> Self {
        ResultRow {
            scenario: scenario.name().to_string(),
            k: p.k,
            lambda: p.lambda,
            epsilon: p.epsilon,
            hbar: p.hbar_eff,
            t: r.t,
            c1: r.c1,
            c2: r.c2,
            re_c3: r.re_c3,
            otoc: r.otoc,
            fotoc: r.fotoc,
            cf: r.cf,
            mean_p: r.mean_p,
            mean_p2: r.mean_p2,
            norm_log: r.norm_log,
            c1_pred: r.c1_pred,
            c2_pred: r.c2_pred,
            re_c3_pred: r.re_c3_pred,
            otoc_pred: r.otoc_pred,
            cf_pred: r.cf_pred,
            p2_pred: r.p2_pred,
            norm_log_pred: r.norm_log_pred,
            run,
        }
    }

    /// Parameters that produced this row.
    pub fn params(&self) -> SystemParams {
        SystemParams {
            k: self.k,
            lambda: self.lambda,
            hbar_eff: self.hbar,
            epsilon: self.epsilon,
            n_theta: self.run.n_theta,
            t_max: self.t,
        }
    }
}

/// Parameters of one `(K, λ)` point, with the grid sized for the last sample.
fn point_params(cfg: &ExperimentConfig, k: f64, lambda: f64, t_last: usize) -> SystemParams {
    let mut p = cfg.params;
    p.k = k;
    p.lambda = lambda;
    p.t_max = t_last;
    p.with_auto_grid()
}

/// Samples of a single point. The correlator chain runs one backward
/// evolution per sample, so samples are spread over the worker pool.
pub fn run_point(scenario: Scenario, p: &SystemParams, times: &[usize]) -> Result<Vec<ResultRow>> {
    let start = Instant::now();
    let engine = OtocEngine::new(p)?;
    let u = engine.floquet();
    let psi = u.trajectory(engine.initial_state(), times)?;

    let fotoc = times
        .par_iter()
        .zip(&psi)
        .map(|(&t, s)| nhkr_core::fotoc_of_state(s, t, p))
        .collect::<std::result::Result<Vec<_>, CoreError>>()?;

    let corr = if scenario.computes_cp() {
        let pair = OperatorPair::momentum_angle();
        let phi = u.trajectory(&engine.phi0(&pair)?, times)?;
        let c = times
            .par_iter()
            .zip(psi.par_iter().zip(&phi))
            .map(|(&t, (s, f))| engine.correlators_from_states(&pair, t, s, f))
            .collect::<std::result::Result<Vec<_>, CoreError>>()?;
        Some(c)
    } else {
        None
    };

    let run = RunInfo {
        n_theta: p.n_theta,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "{scenario}: K = {}, lambda = {}, n_theta = {}, {} samples in {:.2} s",
        p.k,
        p.lambda,
        p.n_theta,
        times.len(),
        run.wall_time_s
    );

    fotoc
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let c = corr.as_ref().map(|c| &c[i]);
            let rec = OtocRecord::new(f, c).with_predictions(p, c.is_some())?;
            Ok(ResultRow::from_record(scenario, p, &rec, run))
        })
        .collect()
}

/// Rows for every `(K, λ, t)` of the config, ordered by K, then λ, then t.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let times = cfg.times()?;
    let t_last = *times.last().unwrap_or(&0);
    let points: Vec<SystemParams> = cfg
        .ks()
        .into_iter()
        .flat_map(|k| cfg.lambdas().into_iter().map(move |l| (k, l)))
        .map(|(k, l)| point_params(cfg, k, l, t_last))
        .collect();
    // Refuse the whole run before any work if one grid is too coarse.
    for p in &points {
        p.validate_for_run()?;
    }
    let chunks = points
        .par_iter()
        .map(|p| run_point(cfg.scenario, p, &times))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}
