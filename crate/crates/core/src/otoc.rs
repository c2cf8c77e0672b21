//! Norm-rescaled out-of-time-ordered correlators.
//!
//! For operators `A`, `B` and initial state `ψ₀` the correlator
//! `C = C₁ + C₂ − 2 Re C₃` is built from two time-reversed states,
//! `ψ_R = U†(t) A U(t) ψ₀` and `φ_R = U†(t) A U(t) B ψ₀`. Each branch is run
//! forward, hit with `A`, and run backward while its norm is tracked in log
//! scale; the correlators are then divided by the accumulated growth factors
//! `F_χ = 𝒩_χ(t)/𝒩_χ(0)` and `F_χR = 𝒩_χR(0)/𝒩̃_χ(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::floquet::FloquetOperator;
use crate::params::SystemParams;
use crate::state::{self, inner, momentum_moments, norm, to_momentum, AngleState};

/// Operators entering the correlators.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    /// `p = -iħ ∂_θ`.
    Momentum,
    /// Multiplication by the principal-branch angle.
    Angle,
    /// `e^{iεp}`.
    Displacement { epsilon: f64 },
    /// `|r⟩⟨r|` for a reference state `r`.
    Projector(AngleState),
}

/// Apply `op` to `s` and renormalize the result into its log-norm.
///
/// `p` and `e^{iεp}` act on the explicit angle factor of `s` through
/// `p θ = θ p − iħ` and `e^{iεp} θ = (θ + εħ) e^{iεp}`. Annihilated states
/// (zero projector overlap, `p` on a constant) come back as
/// [`Error::DegenerateState`].
pub fn apply_operator(op: &Operator, s: &AngleState, hbar: f64) -> Result<AngleState> {
    let mut out = match op {
        Operator::Momentum => {
            let (mut a, b, log_norm) = s.clone().into_parts();
            let p = |n: i64| Complex64::new(hbar * n as f64, 0.0);
            state::apply_momentum_diagonal(&mut a, p);
            let b = b.map(|mut b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x -= Complex64::i() * hbar * y;
                }
                state::apply_momentum_diagonal(&mut b, p);
                b
            });
            AngleState::from_parts(a, b, log_norm)
        }
        Operator::Angle => {
            let mut m = s.clone();
            m.materialize();
            AngleState::angle_times(&m)
        }
        Operator::Displacement { epsilon } => {
            let (mut a, b, log_norm) = s.clone().into_parts();
            let d = |n: i64| Complex64::from_polar(1.0, epsilon * hbar * n as f64);
            state::apply_momentum_diagonal(&mut a, d);
            let b = b.map(|mut b| {
                state::apply_momentum_diagonal(&mut b, d);
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += epsilon * hbar * y;
                }
                b
            });
            AngleState::from_parts(a, b, log_norm)
        }
        Operator::Projector(r) => {
            let (v, scale) = inner(r, s)?;
            let amps = r.values().iter().map(|x| x * v).collect();
            AngleState::from_parts(amps, None, r.log_norm() + 2.0 * scale)
        }
    };
    out.renormalize()?;
    Ok(out)
}

/// The `(A, B)` operator pair of a correlator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPair {
    pub a: Operator,
    pub b: Operator,
}

impl OperatorPair {
    /// `A = p`, `B = θ`.
    pub fn momentum_angle() -> Self {
        OperatorPair {
            a: Operator::Momentum,
            b: Operator::Angle,
        }
    }

    /// `A = e^{iεp}`, `B = |ψ₀⟩⟨ψ₀|`.
    pub fn fidelity(epsilon: f64, reference: AngleState) -> Self {
        OperatorPair {
            a: Operator::Displacement { epsilon },
            b: Operator::Projector(reference),
        }
    }

    pub fn is_momentum_angle(&self) -> bool {
        matches!((&self.a, &self.b), (Operator::Momentum, Operator::Angle))
    }
}

#[allow(non_snake_case)]
/// Log-scale norms of both branches. `n_tilde_*` and `n_*R_t0` are `-∞`
/// when `A` annihilates the branch state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormLedger {
    pub n_psi_t0: f64,
    pub n_psi_tn: f64,
    pub n_tilde_psi_tn: f64,
    pub n_psiR_t0: f64,
    pub n_phi_t0: f64,
    pub n_phi_tn: f64,
    pub n_tilde_phi_tn: f64,
    pub n_phiR_t0: f64,
}

impl NormLedger {
    /// `ln (F_ψ F_ψR)`.
    pub fn log_growth_psi(&self) -> f64 {
        self.n_psi_tn - self.n_psi_t0 + self.n_psiR_t0 - self.n_tilde_psi_tn
    }

    /// `ln (F_φ F_φR)`.
    pub fn log_growth_phi(&self) -> f64 {
        self.n_phi_tn - self.n_phi_t0 + self.n_phiR_t0 - self.n_tilde_phi_tn
    }
}

/// Rescaled correlators at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlators {
    pub t: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: Complex64,
    pub ledger: NormLedger,
}

impl Correlators {
    pub fn otoc(&self) -> f64 {
        self.c1 + self.c2 - 2.0 * self.c3.re
    }
}

/// Fidelity correlator and momentum statistics of `ψ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FotocSample {
    pub t: usize,
    /// `|⟨ψ|e^{iεp}|ψ⟩ / 𝒩|²`.
    pub fotoc: f64,
    /// `1 − fotoc`, formed without cancellation.
    pub cf_direct: f64,
    /// `ε² (⟨p²⟩ − ⟨p⟩²)`.
    pub cf_variance: f64,
    pub mean_p: f64,
    pub mean_p2: f64,
    /// `ln 𝒩(t)`.
    pub norm_log: f64,
}

struct Branch {
    n_t0: f64,
    n_tn: f64,
    n_tilde: f64,
    n_r: f64,
    reversed: Option<AngleState>,
}

/// Forward/backward correlator pipeline for one parameter set and initial state.
#[derive(Debug, Clone)]
pub struct OtocEngine {
    params: SystemParams,
    floquet: FloquetOperator,
    psi0: AngleState,
}

impl OtocEngine {
    /// Ground-state start. Parameters must pass [`SystemParams::validate_for_run`].
    pub fn new(p: &SystemParams) -> Result<Self> {
        p.validate_for_run()?;
        Self::with_initial_state(p, AngleState::ground(p.n_theta)?)
    }

    /// Arbitrary initial state on the parameter grid; the grid rule is not enforced.
    pub fn with_initial_state(p: &SystemParams, psi0: AngleState) -> Result<Self> {
        if psi0.len() != p.n_theta {
            return Err(Error::Config(format!(
                "initial state has {} points, parameters ask for {}",
                psi0.len(),
                p.n_theta
            )));
        }
        norm(&psi0)?;
        Ok(OtocEngine {
            params: *p,
            floquet: FloquetOperator::new(p)?,
            psi0,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn initial_state(&self) -> &AngleState {
        &self.psi0
    }

    pub fn floquet(&self) -> &FloquetOperator {
        &self.floquet
    }

    /// `B ψ₀`.
    pub fn phi0(&self, pair: &OperatorPair) -> Result<AngleState> {
        apply_operator(&pair.b, &self.psi0, self.params.hbar_eff)
    }

    /// Correlators at a single time.
    pub fn correlators(&self, pair: &OperatorPair, t: usize) -> Result<Correlators> {
        Ok(self.correlator_series(pair, &[t])?.remove(0))
    }

    /// Correlators at non-decreasing times from one forward run per branch.
    pub fn correlator_series(&self, pair: &OperatorPair, times: &[usize]) -> Result<Vec<Correlators>> {
        let phi0 = self.phi0(pair)?;
        let psi = self.floquet.trajectory(&self.psi0, times)?;
        let phi = self.floquet.trajectory(&phi0, times)?;
        times
            .iter()
            .zip(psi.iter().zip(&phi))
            .map(|(&t, (s, f))| self.correlators_from_states(pair, t, s, f))
            .collect()
    }

    /// Correlators given the forward states `ψ(t)` and `φ(t)`.
    pub fn correlators_from_states(
        &self,
        pair: &OperatorPair,
        t: usize,
        psi_tn: &AngleState,
        phi_tn: &AngleState,
    ) -> Result<Correlators> {
        let hbar = self.params.hbar_eff;
        let psi = self.branch(&pair.a, &self.psi0, psi_tn, t)?;
        let phi = self.branch(&pair.a, &self.phi0(pair)?, phi_tn, t)?;
        let ledger = NormLedger {
            n_psi_t0: psi.n_t0,
            n_psi_tn: psi.n_tn,
            n_tilde_psi_tn: psi.n_tilde,
            n_psiR_t0: psi.n_r,
            n_phi_t0: phi.n_t0,
            n_phi_tn: phi.n_tn,
            n_tilde_phi_tn: phi.n_tilde,
            n_phiR_t0: phi.n_r,
        };
        let b_psi_r = match &psi.reversed {
            Some(r) => nonzero(apply_operator(&pair.b, r, hbar))?,
            None => None,
        };

        let c1 = match &b_psi_r {
            Some(bpr) => (norm(bpr)? - ledger.log_growth_psi()).exp(),
            None => 0.0,
        };
        let c2 = match &phi.reversed {
            Some(r) => {
                let (v, scale) = inner(r, r)?;
                (v.re.ln() + scale - ledger.log_growth_phi()).exp()
            }
            None => 0.0,
        };
        let c3 = match (&b_psi_r, &phi.reversed) {
            (Some(bpr), Some(pr)) => {
                let (v, scale) = inner(bpr, pr)?;
                v * (scale - 0.5 * (ledger.log_growth_psi() + ledger.log_growth_phi())).exp()
            }
            _ => Complex64::new(0.0, 0.0),
        };
        for x in [c1, c2, c3.re, c3.im] {
            if !x.is_finite() {
                return Err(Error::NonFinite { step: Some(t) });
            }
        }
        Ok(Correlators { t, c1, c2, c3, ledger })
    }

    fn branch(&self, a: &Operator, start: &AngleState, at_t: &AngleState, t: usize) -> Result<Branch> {
        let n_t0 = norm(start)?;
        let n_tn = norm(at_t)?;
        let Some(tilde) = nonzero(apply_operator(a, at_t, self.params.hbar_eff))? else {
            return Ok(Branch {
                n_t0,
                n_tn,
                n_tilde: f64::NEG_INFINITY,
                n_r: f64::NEG_INFINITY,
                reversed: None,
            });
        };
        let n_tilde = norm(&tilde)?;
        let reversed = self.floquet.evolve_backward(&tilde, t)?;
        Ok(Branch {
            n_t0,
            n_tn,
            n_tilde,
            n_r: norm(&reversed)?,
            reversed: Some(reversed),
        })
    }

    /// Fidelity correlator and momentum moments at a single time.
    pub fn fotoc(&self, t: usize) -> Result<FotocSample> {
        Ok(self.fotoc_series(&[t])?.remove(0))
    }

    /// Fidelity samples at non-decreasing times from one forward run.
    pub fn fotoc_series(&self, times: &[usize]) -> Result<Vec<FotocSample>> {
        let states = self.floquet.trajectory(&self.psi0, times)?;
        times
            .iter()
            .zip(&states)
            .map(|(&t, s)| fotoc_of_state(s, t, &self.params))
            .collect()
    }
}

fn nonzero(r: Result<AngleState>) -> Result<Option<AngleState>> {
    match r {
        Ok(s) => Ok(Some(s)),
        Err(Error::DegenerateState { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Fidelity and moments of a single evolved state.
pub fn fotoc_of_state(s: &AngleState, t: usize, p: &SystemParams) -> Result<FotocSample> {
    let m = to_momentum(s)?;
    let total = m.stored_norm();
    if !total.is_finite() {
        return Err(Error::NonFinite { step: Some(t) });
    }
    if total <= 0.0 {
        return Err(Error::DegenerateState { step: Some(t) });
    }
    // ⟨e^{iεp}⟩ = 1 − a + i b with a = Σ w 2 sin²(εp/2), b = Σ w sin(εp).
    let (mut a, mut b) = (0.0, 0.0);
    for (n, z) in m.indices().zip(m.amps()) {
        let w = z.norm_sqr() / total;
        let phase = p.epsilon * p.hbar_eff * n as f64;
        a += 2.0 * w * (0.5 * phase).sin().powi(2);
        b += w * phase.sin();
    }
    let (mean_p, mean_p2) = momentum_moments(s, p.hbar_eff)?;
    Ok(FotocSample {
        t,
        fotoc: (1.0 - a).powi(2) + b * b,
        cf_direct: 2.0 * a - a * a - b * b,
        cf_variance: p.epsilon * p.epsilon * (mean_p2 - mean_p * mean_p),
        mean_p,
        mean_p2,
        norm_log: norm(s)?,
    })
}

/// Rescaled `C₁` for a ground-state start.
pub fn compute_c1(pair: &OperatorPair, p: &SystemParams, t: usize) -> Result<f64> {
    Ok(OtocEngine::new(p)?.correlators(pair, t)?.c1)
}

/// Rescaled `C₂`, evaluated as the full chain `⟨φ_R|φ_R⟩ / (F_φ F_φR)`.
pub fn compute_c2(pair: &OperatorPair, p: &SystemParams, t: usize) -> Result<f64> {
    Ok(OtocEngine::new(p)?.correlators(pair, t)?.c2)
}

/// Rescaled `C₃ = ⟨ψ_R|B|φ_R⟩ / √(F_ψ F_ψR F_φ F_φR)`.
pub fn compute_c3(pair: &OperatorPair, p: &SystemParams, t: usize) -> Result<Complex64> {
    Ok(OtocEngine::new(p)?.correlators(pair, t)?.c3)
}

/// Full record for a ground-state start, with closed-form values where they apply.
pub fn compute_otoc(pair: &OperatorPair, p: &SystemParams, t: usize) -> Result<OtocRecord> {
    let engine = OtocEngine::new(p)?;
    let corr = engine.correlators(pair, t)?;
    let f = engine.fotoc(t)?;
    OtocRecord::new(&f, Some(&corr)).with_predictions(p, pair.is_momentum_angle())
}

/// `(fotoc, cf)` with `cf` from the momentum variance.
pub fn compute_fotoc(p: &SystemParams, t: usize) -> Result<(f64, f64)> {
    let f = OtocEngine::new(p)?.fotoc(t)?;
    Ok((f.fotoc, f.cf_variance))
}

/// One time sample of numeric results and their closed-form counterparts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtocRecord {
    pub t: usize,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub re_c3: Option<f64>,
    /// Always `c1 + c2 − 2 re_c3` of the stored parts.
    pub otoc: Option<f64>,
    pub fotoc: f64,
    /// Variance form `ε² Var(p)`.
    pub cf: f64,
    /// `1 − fotoc`.
    pub cf_direct: f64,
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
}

impl OtocRecord {
    pub fn new(f: &FotocSample, corr: Option<&Correlators>) -> Self {
        let (c1, c2, re_c3) = match corr {
            Some(c) => (Some(c.c1), Some(c.c2), Some(c.c3.re)),
            None => (None, None, None),
        };
        let otoc = corr.map(|c| c.c1 + c.c2 - 2.0 * c.c3.re);
        OtocRecord {
            t: f.t,
            c1,
            c2,
            re_c3,
            otoc,
            fotoc: f.fotoc,
            cf: f.cf_variance,
            cf_direct: f.cf_direct,
            mean_p: f.mean_p,
            mean_p2: f.mean_p2,
            norm_log: f.norm_log,
            c1_pred: None,
            c2_pred: None,
            re_c3_pred: None,
            otoc_pred: None,
            cf_pred: None,
            p2_pred: None,
            norm_log_pred: None,
        }
    }

    /// Fill the closed-form columns. They stay empty off the main resonance,
    /// at `t = 0`, and for `C_p` laws outside their validity regime.
    pub fn with_predictions(mut self, p: &SystemParams, momentum_angle: bool) -> Result<Self> {
        if !p.has_oracle() || self.t == 0 {
            return Ok(self);
        }
        let t = self.t as f64;
        self.cf_pred = Some(analytic::predict_cf(p, t)?);
        self.p2_pred = Some(analytic::predict_p2(p, t)?);
        self.norm_log_pred = Some(analytic::predict_norm(p, t)?);
        if momentum_angle {
            let parts = analytic::predict_cp_parts(p, t)?;
            let cp = analytic::predict_cp(p, t)?;
            if parts.valid {
                self.c1_pred = Some(parts.c1);
                self.c2_pred = Some(parts.c2);
                self.re_c3_pred = Some(parts.re_c3);
            }
            if cp.valid {
                self.otoc_pred = Some(cp.value);
            }
        }
        Ok(self)
    }
}

/// Least-squares line `value ≈ slope·t + intercept` over points with `t` in
/// `[window.0, window.1]`.
pub fn fit_growth_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, v)| t >= window.0 && t <= window.1 && v.is_finite())
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} points in window [{}, {}], at least 3 required",
            pts.len(),
            window.0,
            window.1
        )));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let vm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - vm)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all window points share one time".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, vm - slope * tm))
}

/// Norm `π²/3` of `θ ψ₀` for the uniform ground state.
pub const ANGLE_GROUND_NORM: f64 = PI * PI / 3.0;
