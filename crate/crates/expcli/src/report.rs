//! Numeric-versus-closed-form comparison of result rows.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use nhkr_core::{fit_growth_rate, lambda_critical, predict_growth_rate, GrowthRate, Observable, SystemParams};
use serde::Serialize;

use crate::scenario::ResultRow;

pub const TOL_P2: f64 = 1e-8;
/// Absolute on `ln 𝒩`, scaled by `max(1, |ln 𝒩|)`.
pub const TOL_NORM_LOG: f64 = 1e-10;
pub const TOL_CF: f64 = 1e-6;
pub const TOL_CF_SLOPE: f64 = 0.02;
pub const TOL_CP_SLOPE: f64 = 0.03;
pub const TOL_C1: f64 = 0.02;
pub const TOL_RE_C3: f64 = 0.05;
pub const TOL_HERMITIAN_CP: f64 = 1e-8;
pub const TOL_HERMITIAN_PARTS: f64 = 1e-6;
/// Sweep resolution for locating the sign change of `d Re C₃ / dt`.
pub const LAMBDA_RESOLUTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NoOracle,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NoOracle => "NO ORACLE",
            Status::Info => "info",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub scenario: String,
    #[serde(rename = "K")]
    pub k: f64,
    /// `None` for checks spanning several λ.
    pub lambda: Option<f64>,
    pub name: String,
    pub measured: Option<f64>,
    pub expected: Option<f64>,
    /// Relative unless the check name says otherwise.
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
    pub note: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn find(&self, lambda: Option<f64>, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.lambda == lambda && c.name == name)
    }

    pub fn table(&self) -> String {
        let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16} {:>5} {:>7}  {:<22} {:>14} {:>14} {:>11} {:>9}  status",
            "scenario", "K", "lambda", "check", "measured", "expected", "deviation", "tol"
        );
        for c in &self.checks {
            let lambda = c.lambda.map_or_else(|| "*".to_string(), |l| format!("{l}"));
            let _ = write!(
                s,
                "{:<16} {:>5} {:>7}  {:<22} {:>14} {:>14} {:>11} {:>9}  {}",
                c.scenario,
                c.k,
                lambda,
                c.name,
                num(c.measured),
                num(c.expected),
                c.deviation.map_or_else(|| "-".into(), |d| format!("{d:.2e}")),
                c.tolerance.map_or_else(|| "-".into(), |d| format!("{d:.0e}")),
                c.status
            );
            if !c.note.is_empty() {
                let _ = write!(s, "  ({})", c.note);
            }
            s.push('\n');
        }
        let fails = self.failures().count();
        let _ = writeln!(
            s,
            "{} checks, {} failed: {}",
            self.checks.len(),
            fails,
            if fails == 0 { "PASS" } else { "FAIL" }
        );
        s
    }
}

fn rel(measured: f64, expected: f64) -> f64 {
    (measured - expected).abs() / expected.abs().max(f64::MIN_POSITIVE)
}

struct Series<'a> {
    scenario: &'a str,
    k: f64,
    lambda: f64,
    params: SystemParams,
    rows: Vec<&'a ResultRow>,
}

impl Series<'_> {
    fn check(&self, name: &str) -> Check {
        Check {
            scenario: self.scenario.to_string(),
            k: self.k,
            lambda: Some(self.lambda),
            name: name.to_string(),
            measured: None,
            expected: None,
            deviation: None,
            tolerance: None,
            status: Status::Info,
            note: String::new(),
        }
    }

    fn t_last(&self) -> usize {
        self.rows.iter().map(|r| r.t).max().unwrap_or(0)
    }

    /// Upper half of the sampled time range, `[500, 1000]` for `t ≤ 1000`.
    fn window(&self) -> (f64, f64) {
        let t = self.t_last() as f64;
        (0.5 * t, t)
    }

    fn in_window(&self) -> impl Iterator<Item = &&ResultRow> {
        let (lo, hi) = self.window();
        self.rows.iter().filter(move |r| (r.t as f64) >= lo && (r.t as f64) <= hi)
    }

    fn slope(&self, value: impl Fn(&ResultRow) -> Option<f64>) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter_map(|r| value(r).map(|v| (r.t as f64, v)))
            .collect();
        fit_growth_rate(&pts, self.window()).ok().map(|(s, _)| s)
    }

    /// Worst relative deviation of `value` from `pred` over rows having both.
    fn pointwise(
        &self,
        name: &str,
        tol: f64,
        rows: &[&ResultRow],
        value: impl Fn(&ResultRow) -> Option<f64>,
        pred: impl Fn(&ResultRow) -> Option<f64>,
    ) -> Option<Check> {
        let worst = rows
            .iter()
            .filter_map(|r| Some((value(r)?, pred(r)?)))
            .map(|(v, p)| (rel(v, p), v, p))
            .max_by(|a, b| a.0.total_cmp(&b.0))?;
        let mut c = self.check(name);
        c.measured = Some(worst.1);
        c.expected = Some(worst.2);
        c.deviation = Some(worst.0);
        c.tolerance = Some(tol);
        c.status = if worst.0 <= tol { Status::Pass } else { Status::Fail };
        c.note = "worst sample".into();
        Some(c)
    }

    fn slope_check(&self, name: &str, measured: Option<f64>, expected: f64, tol: f64) -> Check {
        let mut c = self.check(name);
        c.expected = Some(expected);
        c.tolerance = Some(tol);
        match measured {
            Some(m) => {
                c.measured = Some(m);
                c.deviation = Some(rel(m, expected));
                c.status = if rel(m, expected) <= tol { Status::Pass } else { Status::Fail };
                let (lo, hi) = self.window();
                c.note = format!("fit over t in [{lo}, {hi}]");
            }
            None => c.note = "fewer than 3 samples in the fit window".into(),
        }
        c
    }

    fn checks(&self) -> Vec<Check> {
        if !self.params.has_oracle() {
            let mut c = self.check("closed_forms");
            c.status = Status::NoOracle;
            c.note = format!("no closed forms at hbar = {}", self.params.hbar_eff);
            return vec![c];
        }
        let all: Vec<&ResultRow> = self.rows.clone();
        let mut out = Vec::new();
        out.extend(self.pointwise("p2", TOL_P2, &all, |r| Some(r.mean_p2), |r| r.p2_pred));
        if let Some(mut c) = self.pointwise("norm_log", TOL_NORM_LOG, &all, |r| Some(r.norm_log), |r| r.norm_log_pred)
        {
            let (m, e) = (c.measured.unwrap_or(0.0), c.expected.unwrap_or(0.0));
            let d = (m - e).abs() / e.abs().max(1.0);
            c.deviation = Some(d);
            c.status = if d <= TOL_NORM_LOG { Status::Pass } else { Status::Fail };
            c.note = "absolute, scaled by max(1, |ln N|)".into();
            out.push(c);
        }
        out.extend(self.pointwise("cf", TOL_CF, &all, |r| Some(r.cf), |r| r.cf_pred));

        let has_cp = self.rows.iter().any(|r| r.otoc.is_some());
        match predict_growth_rate(Observable::Cf, &self.params) {
            Ok(GrowthRate::Finite(g)) => {
                out.push(self.slope_check("cf_slope", self.slope(|r| Some(r.cf)), g, TOL_CF_SLOPE));
            }
            _ => {
                let mut c = self.check("cf_slope");
                c.note = "lambda = 0: C_f grows quadratically, checked pointwise".into();
                out.push(c);
            }
        }
        if !has_cp {
            return out;
        }

        if self.lambda == 0.0 {
            let hermitian: Vec<&ResultRow> = all.iter().copied().filter(|r| r.t > 0).collect();
            out.extend(self.pointwise("otoc_hermitian", TOL_HERMITIAN_CP, &hermitian, |r| r.otoc, |_| {
                Some(16.0 * PI * PI)
            }));
            out.extend(self.pointwise("c1_hermitian", TOL_HERMITIAN_PARTS, &hermitian, |r| r.c1, |r| r.c1_pred));
            out.extend(self.pointwise("c2_hermitian", TOL_HERMITIAN_PARTS, &hermitian, |r| r.c2, |r| r.c2_pred));
            out.extend(self.pointwise("re_c3_hermitian", TOL_HERMITIAN_PARTS, &hermitian, |r| r.re_c3, |r| {
                r.re_c3_pred
            }));
            return out;
        }

        if let Ok(GrowthRate::Finite(g)) = predict_growth_rate(Observable::Cp, &self.params) {
            out.push(self.slope_check("cp_slope", self.slope(|r| r.otoc), g, TOL_CP_SLOPE));
        }
        let window: Vec<&ResultRow> = self.in_window().copied().collect();
        out.extend(self.pointwise("c1_saturation", TOL_C1, &window, |r| r.c1, |r| r.c1_pred));

        let (k2, l2) = (self.k * self.k, self.lambda * self.lambda);
        if (3.0 * k2 - l2).abs() < 0.1 * (3.0 * k2 + l2) {
            let mut c = self.check("re_c3_sqrt_t");
            c.note = "sqrt(t) coefficient near zero at this lambda, see re_c3_flip".into();
            out.push(c);
        } else {
            out.extend(self.pointwise(
                "re_c3_sqrt_t",
                TOL_RE_C3,
                &window,
                |r| r.re_c3.map(|v| v / (r.t as f64).sqrt()),
                |r| r.re_c3_pred.map(|v| v / (r.t as f64).sqrt()),
            ));
        }
        out
    }
}

fn sweep_check(scenario: &str, k: f64, name: &str) -> Check {
    Check {
        scenario: scenario.to_string(),
        k,
        lambda: None,
        name: name.to_string(),
        measured: None,
        expected: None,
        deviation: None,
        tolerance: None,
        status: Status::Info,
        note: String::new(),
    }
}

/// Sign change of `d Re C₃ / dt` across a λ sweep at fixed K.
fn flip_check(scenario: &str, k: f64, slopes: &[(f64, f64)]) -> Option<Check> {
    let lc = lambda_critical(k);
    let (lo, hi) = (slopes.first()?.0, slopes.last()?.0);
    if slopes.len() < 2 || !(lo < lc && lc < hi) {
        return None;
    }
    let mut c = sweep_check(scenario, k, "re_c3_flip");
    c.expected = Some(lc);
    c.tolerance = Some(LAMBDA_RESOLUTION);
    let changes: Vec<(f64, f64)> = slopes
        .windows(2)
        .filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .map(|w| (w[0].0, w[1].0))
        .collect();
    match changes.as_slice() {
        [(a, b)] => {
            let positive_below = slopes[0].1 > 0.0;
            let dist = if lc < *a {
                a - lc
            } else if lc > *b {
                lc - b
            } else {
                0.0
            };
            c.measured = Some(0.5 * (a + b));
            c.deviation = Some(dist);
            c.status = if positive_below && dist <= LAMBDA_RESOLUTION {
                Status::Pass
            } else {
                Status::Fail
            };
            c.note = format!("sign change between lambda = {a} and {b}, absolute deviation");
        }
        _ => {
            c.status = Status::Fail;
            c.note = format!("{} sign changes, expected one", changes.len());
        }
    }
    Some(c)
}

/// Location of the smallest fitted `C_f` slope across a λ sweep at fixed K.
fn minimum_check(scenario: &str, k: f64, slopes: &[(f64, f64)]) -> Option<Check> {
    if slopes.len() < 3 || !(slopes[0].0 < k && k < slopes[slopes.len() - 1].0) {
        return None;
    }
    let i = (0..slopes.len()).min_by(|&a, &b| slopes[a].1.total_cmp(&slopes[b].1))?;
    let step = |j: usize| (slopes[j + 1].0 - slopes[j].0).abs();
    let grid = match i {
        0 => step(0),
        j if j == slopes.len() - 1 => step(j - 1),
        j => step(j - 1).max(step(j)),
    };
    let mut c = sweep_check(scenario, k, "cf_slope_minimum");
    c.measured = Some(slopes[i].0);
    c.expected = Some(k);
    c.deviation = Some((slopes[i].0 - k).abs());
    c.tolerance = Some(grid);
    c.status = if (slopes[i].0 - k).abs() <= grid * (1.0 + 1e-9) {
        Status::Pass
    } else {
        Status::Fail
    };
    c.note = "argmin over lambda, absolute deviation, tolerance one grid step".into();
    Some(c)
}

/// Per-series pointwise and slope checks, then per-sweep threshold and
/// minimum checks. Off the main resonance every series is marked "no oracle".
pub fn compare_report(rows: &[ResultRow]) -> Report {
    let mut groups: BTreeMap<(String, u64, u64, u64, u64), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        let key = (
            r.scenario.clone(),
            r.k.to_bits(),
            r.epsilon.to_bits(),
            r.hbar.to_bits(),
            r.lambda.to_bits(),
        );
        groups.entry(key).or_default().push(r);
    }
    let mut series: Vec<Series> = groups
        .into_values()
        .map(|mut rows| {
            rows.sort_by_key(|r| r.t);
            let r0 = rows[0];
            let mut params = r0.params();
            params.t_max = rows.last().map_or(0, |r| r.t);
            Series {
                scenario: &r0.scenario,
                k: r0.k,
                lambda: r0.lambda,
                params,
                rows,
            }
        })
        .collect();
    series.sort_by(|a, b| {
        (a.scenario, a.k, a.params.epsilon, a.params.hbar_eff, a.lambda)
            .partial_cmp(&(b.scenario, b.k, b.params.epsilon, b.params.hbar_eff, b.lambda))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut report = Report::default();
    for s in &series {
        report.checks.extend(s.checks());
    }

    let mut sweeps: BTreeMap<(&str, u64, u64, u64), Vec<&Series>> = BTreeMap::new();
    for s in series.iter().filter(|s| s.params.has_oracle() && s.lambda > 0.0) {
        let key = (s.scenario, s.k.to_bits(), s.params.epsilon.to_bits(), s.params.hbar_eff.to_bits());
        sweeps.entry(key).or_default().push(s);
    }
    for group in sweeps.values() {
        let (scenario, k) = (group[0].scenario, group[0].k);
        let re_c3: Vec<(f64, f64)> = group
            .iter()
            .filter_map(|s| Some((s.lambda, s.slope(|r| r.re_c3)?)))
            .collect();
        report.checks.extend(flip_check(scenario, k, &re_c3));
        let cf: Vec<(f64, f64)> = group
            .iter()
            .filter_map(|s| Some((s.lambda, s.slope(|r| Some(r.cf))?)))
            .collect();
        report.checks.extend(minimum_check(scenario, k, &cf));
    }
    report
}
