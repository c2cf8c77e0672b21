//! JSON experiment configuration and command-line overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nhkr_core::SystemParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "fig1_cf")]
    Fig1Cf,
    #[serde(rename = "fig1_cp")]
    Fig1Cp,
    #[serde(rename = "figS1_parts")]
    FigS1Parts,
    #[serde(rename = "lambda_sweep")]
    LambdaSweep,
    #[serde(rename = "criticality_scan")]
    CriticalityScan,
    #[serde(rename = "single_run")]
    SingleRun,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Fig1Cf,
        Scenario::Fig1Cp,
        Scenario::FigS1Parts,
        Scenario::LambdaSweep,
        Scenario::CriticalityScan,
        Scenario::SingleRun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1Cf => "fig1_cf",
            Scenario::Fig1Cp => "fig1_cp",
            Scenario::FigS1Parts => "figS1_parts",
            Scenario::LambdaSweep => "lambda_sweep",
            Scenario::CriticalityScan => "criticality_scan",
            Scenario::SingleRun => "single_run",
        }
    }

    /// Sweeps take their λ grid from the config and have no default.
    pub fn is_sweep(self) -> bool {
        matches!(self, Scenario::LambdaSweep | Scenario::CriticalityScan)
    }

    /// Whether the momentum/angle correlator chain is computed, in addition
    /// to the fidelity correlator and momentum moments.
    pub fn computes_cp(self) -> bool {
        !matches!(self, Scenario::Fig1Cf | Scenario::CriticalityScan)
    }

    /// λ values used when the config leaves `lambda_values` empty.
    pub fn default_lambdas(self, params: &SystemParams) -> Vec<f64> {
        match self {
            Scenario::Fig1Cf | Scenario::Fig1Cp => vec![0.0, 1.0, 5.0, 11.0, 15.0],
            Scenario::FigS1Parts => vec![1.0, 5.0, 8.66, 11.0, 15.0],
            Scenario::SingleRun => vec![params.lambda],
            Scenario::LambdaSweep | Scenario::CriticalityScan => Vec::new(),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                CliError::Config(format!("unknown scenario {s:?}, expected one of {}", names.join(", ")))
            })
    }
}

/// Explicit sample times or an arithmetic progression `start, start+step, …, ≤ stop`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSamples {
    List(Vec<usize>),
    Stride { start: usize, stop: usize, step: usize },
}

impl TimeSamples {
    pub fn resolve(&self) -> Result<Vec<usize>> {
        match self {
            TimeSamples::List(v) => Ok(v.clone()),
            &TimeSamples::Stride { start, stop, step } => {
                if step == 0 {
                    return Err(CliError::Config("t_samples step must be > 0".into()));
                }
                if start > stop {
                    return Err(CliError::Config(format!(
                        "t_samples start {start} exceeds stop {stop}"
                    )));
                }
                Ok((start..=stop).step_by(step).collect())
            }
        }
    }

    /// Roughly logarithmic samples over `[1, t_max]` joined with the fit
    /// window `[t_max/2, t_max]` at a step of `t_max/100`.
    pub fn default_for(t_max: usize) -> Vec<usize> {
        if t_max == 0 {
            return vec![0];
        }
        const LOG_POINTS: usize = 30;
        let top = (t_max as f64).ln();
        let mut v: Vec<usize> = (0..LOG_POINTS)
            .map(|i| (top * i as f64 / (LOG_POINTS - 1) as f64).exp().round() as usize)
            .collect();
        let step = (t_max / 100).max(1);
        v.extend((t_max / 2..=t_max).step_by(step));
        v.push(t_max);
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub params: SystemParams,
    #[serde(default)]
    pub lambda_values: Vec<f64>,
    /// Kick strengths to scan; empty means `params.K` only.
    #[serde(default)]
    pub k_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_samples: Option<TimeSamples>,
    /// Empty writes to standard output.
    #[serde(default)]
    pub output_path: String,
    /// Reserved. Every computation is deterministic.
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, params: SystemParams) -> Self {
        ExperimentConfig {
            scenario,
            params,
            lambda_values: Vec::new(),
            k_values: Vec::new(),
            t_samples: None,
            output_path: String::new(),
            seed: 0,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: invalid config: {e}", path.display())))
    }

    pub fn lambdas(&self) -> Vec<f64> {
        if self.lambda_values.is_empty() {
            self.scenario.default_lambdas(&self.params)
        } else {
            self.lambda_values.clone()
        }
    }

    pub fn ks(&self) -> Vec<f64> {
        if self.k_values.is_empty() {
            vec![self.params.k]
        } else {
            self.k_values.clone()
        }
    }

    pub fn times(&self) -> Result<Vec<usize>> {
        match &self.t_samples {
            Some(ts) => ts.resolve(),
            None => Ok(TimeSamples::default_for(self.params.t_max)),
        }
    }

    /// Structural checks. The grid rule is applied per `(K, λ)` point at run time.
    pub fn validate(&self) -> Result<()> {
        if self.scenario.is_sweep() && self.lambda_values.is_empty() {
            return Err(CliError::Config(format!(
                "scenario {} needs a non-empty lambda_values",
                self.scenario
            )));
        }
        let times = self.times()?;
        if times.is_empty() {
            return Err(CliError::Config("t_samples is empty".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!(
                "t_samples must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        let last = *times.last().unwrap_or(&0);
        if last > self.params.t_max {
            return Err(CliError::Config(format!(
                "t_samples reach {last} but t_max is {}",
                self.params.t_max
            )));
        }
        for &l in &self.lambdas() {
            if !l.is_finite() || l < 0.0 {
                return Err(CliError::Config(format!("lambda values must be finite and >= 0, got {l}")));
            }
        }
        for &k in &self.ks() {
            if !k.is_finite() {
                return Err(CliError::Config(format!("K values must be finite, got {k}")));
            }
        }
        let mut probe = self.params;
        if probe.n_theta == 0 {
            probe = probe.with_auto_grid();
        }
        probe.validate()?;
        Ok(())
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub lambdas: Option<Vec<f64>>,
    pub k: Option<f64>,
    pub epsilon: Option<f64>,
    pub t_max: Option<usize>,
    pub out: Option<String>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.scenario {
            cfg.scenario = s;
        }
        if let Some(l) = &self.lambdas {
            cfg.lambda_values = l.clone();
        }
        if let Some(k) = self.k {
            cfg.params.k = k;
            cfg.k_values.clear();
        }
        if let Some(e) = self.epsilon {
            cfg.params.epsilon = e;
        }
        if let Some(t) = self.t_max {
            cfg.params.t_max = t;
        }
        if let Some(o) = &self.out {
            cfg.output_path = o.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "scenario": "figS1_parts",
        "params": {"K": 5.0, "lambda": 1.0, "t_max": 1000},
        "t_samples": {"start": 500, "stop": 1000, "step": 10}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json_str(SAMPLE).unwrap();
        assert_eq!(cfg.scenario, Scenario::FigS1Parts);
        assert_eq!(cfg.params.n_theta, 0);
        assert_eq!(cfg.params.epsilon, nhkr_core::DEFAULT_EPSILON);
        assert_eq!(cfg.lambdas(), vec![1.0, 5.0, 8.66, 11.0, 15.0]);
        let t = cfg.times().unwrap();
        assert_eq!((t[0], t.len(), *t.last().unwrap()), (500, 51, 1000));
        cfg.validate().unwrap();
    }

    #[test]
    fn explicit_list_and_round_trip() {
        let mut cfg = ExperimentConfig::from_json_str(SAMPLE).unwrap();
        cfg.t_samples = Some(TimeSamples::List(vec![1, 2, 5]));
        let back = ExperimentConfig::from_json_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::from_json_str(SAMPLE).unwrap();
        cfg.t_samples = Some(TimeSamples::List(vec![1, 3, 3]));
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));

        cfg.t_samples = Some(TimeSamples::List(vec![1, 2000]));
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));

        let mut sweep = ExperimentConfig::from_json_str(SAMPLE).unwrap();
        sweep.scenario = Scenario::LambdaSweep;
        assert!(matches!(sweep.validate(), Err(CliError::Config(_))));
        sweep.lambda_values = vec![1.0, -2.0];
        assert!(sweep.validate().is_err());
        sweep.lambda_values = vec![1.0, 2.0];
        sweep.validate().unwrap();

        assert!(ExperimentConfig::from_json_str(r#"{"scenario": "fig2"}"#).is_err());
        assert!("fig9".parse::<Scenario>().is_err());
    }

    #[test]
    fn default_samples_cover_fit_window() {
        let t = TimeSamples::default_for(1000);
        assert_eq!(t[0], 1);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        let window: Vec<_> = t.iter().filter(|&&x| x >= 500).collect();
        assert!(window.len() >= 51);
        for k in (500..=1000).step_by(10) {
            assert!(t.contains(&k));
        }
    }

    #[test]
    fn overrides_replace_fields() {
        let mut cfg = ExperimentConfig::from_json_str(SAMPLE).unwrap();
        cfg.k_values = vec![5.0, 10.0];
        Overrides {
            scenario: Some(Scenario::SingleRun),
            lambdas: Some(vec![2.0]),
            k: Some(7.0),
            epsilon: Some(1e-4),
            t_max: Some(50),
            out: Some("x.csv".into()),
        }
        .apply(&mut cfg);
        assert_eq!(cfg.scenario, Scenario::SingleRun);
        assert_eq!(cfg.ks(), vec![7.0]);
        assert_eq!(cfg.lambdas(), vec![2.0]);
        assert_eq!((cfg.params.epsilon, cfg.params.t_max), (1e-4, 50));
        assert_eq!(cfg.output_path, "x.csv");
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
    }
}
