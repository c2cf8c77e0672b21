//! One kicking period `U = U_f U_K` and its adjoint.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{is_resonant_hbar, SystemParams};
use crate::state::{self, AngleState, MomentumState};

/// Diagonal kick `exp[-i (K + iλ) cos θ_j / ħ]` on the angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KickOperator {
    phase_factors: Vec<Complex64>,
    adjoint_factors: Vec<Complex64>,
}

impl KickOperator {
    pub fn new(k: f64, lambda: f64, hbar: f64, n_theta: usize) -> Result<Self> {
        if hbar.is_nan() || hbar <= 0.0 {
            return Err(Error::Config(format!("hbar must be > 0, got {hbar}")));
        }
        let strength = Complex64::new(k, lambda);
        let phase_factors: Vec<Complex64> = AngleState::from_fn(n_theta, |th| {
            (-Complex64::i() * strength * th.cos() / hbar).exp()
        })?
        .amps()
        .to_vec();
        let adjoint_factors = phase_factors.iter().map(|z| z.conj()).collect();
        Ok(KickOperator {
            phase_factors,
            adjoint_factors,
        })
    }

    pub fn from_params(p: &SystemParams) -> Result<Self> {
        Self::new(p.k, p.lambda, p.hbar_eff, p.n_theta)
    }

    pub fn phase_factors(&self) -> &[Complex64] {
        &self.phase_factors
    }

    pub fn adjoint_factors(&self) -> &[Complex64] {
        &self.adjoint_factors
    }

    pub fn len(&self) -> usize {
        self.phase_factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase_factors.is_empty()
    }

    fn multiply(&self, s: &mut AngleState, adjoint: bool) -> Result<()> {
        if s.len() != self.len() {
            return Err(Error::Config(format!(
                "kick built for {} points applied to a {}-point state",
                self.len(),
                s.len()
            )));
        }
        let factors = if adjoint {
            &self.adjoint_factors
        } else {
            &self.phase_factors
        };
        let (amps, theta_part) = s.parts_mut();
        for (a, f) in amps.iter_mut().zip(factors) {
            *a *= f;
        }
        if let Some(lin) = theta_part {
            for (a, f) in lin.iter_mut().zip(factors) {
                *a *= f;
            }
        }
        s.renormalize()
    }
}

/// Free rotation `exp(-i n² ħ / 2)` over the momentum band `[-N/2, N/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeOperator {
    phase_factors: Vec<Complex64>,
    identity: bool,
}

impl FreeOperator {
    pub fn new(hbar: f64, n_theta: usize) -> Self {
        let identity = is_resonant_hbar(hbar);
        let half = n_theta as i64 / 2;
        let phase_factors = (-half..half)
            .map(|n| {
                if identity {
                    Complex64::new(1.0, 0.0)
                } else {
                    let nf = n as f64;
                    Complex64::from_polar(1.0, -nf * nf * hbar / 2.0)
                }
            })
            .collect();
        FreeOperator {
            phase_factors,
            identity,
        }
    }

    pub fn from_params(p: &SystemParams) -> Self {
        Self::new(p.hbar_eff, p.n_theta)
    }

    /// Factors in storage order `n = -N/2, …, N/2 - 1`.
    pub fn phase_factors(&self) -> &[Complex64] {
        &self.phase_factors
    }

    /// Every factor is exactly `1 + 0i` (quantum resonance).
    pub fn is_identity(&self) -> bool {
        self.identity
    }

    fn factor(&self, n: i64) -> Complex64 {
        self.phase_factors[(n + self.phase_factors.len() as i64 / 2) as usize]
    }

    fn rotate(&self, s: &mut AngleState, adjoint: bool) -> Result<()> {
        if self.identity {
            return Ok(());
        }
        if s.len() != self.phase_factors.len() {
            return Err(Error::Config(format!(
                "free operator built for {} points applied to a {}-point state",
                self.phase_factors.len(),
                s.len()
            )));
        }
        // The explicit θ factor has no periodic meaning under U_f off resonance.
        s.materialize();
        let (amps, _) = s.parts_mut();
        state::apply_momentum_diagonal(amps, |n| {
            let f = self.factor(n);
            if adjoint {
                f.conj()
            } else {
                f
            }
        });
        Ok(())
    }
}

/// Kick the state (or apply the adjoint kick) and renormalize into `log_norm`.
pub fn apply_kick(s: &AngleState, kick: &KickOperator, adjoint: bool) -> Result<AngleState> {
    let mut out = s.clone();
    kick.multiply(&mut out, adjoint)?;
    Ok(out)
}

/// Multiply momentum amplitudes by the free phases; the norm is unchanged.
pub fn apply_free(s: &MomentumState, free: &FreeOperator) -> Result<MomentumState> {
    if s.len() != free.phase_factors.len() {
        return Err(Error::Config(format!(
            "free operator built for {} points applied to a {}-point state",
            free.phase_factors.len(),
            s.len()
        )));
    }
    let mut out = s.clone();
    for (a, f) in out.amps_mut().iter_mut().zip(&free.phase_factors) {
        *a *= f;
    }
    Ok(out)
}

/// The one-period map `U = U_f U_K` (kick first) on an `n_theta`-point grid.
#[derive(Debug, Clone)]
pub struct FloquetOperator {
    kick: KickOperator,
    free: FreeOperator,
}

impl FloquetOperator {
    pub fn new(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        Ok(FloquetOperator {
            kick: KickOperator::from_params(p)?,
            free: FreeOperator::from_params(p),
        })
    }

    pub fn kick(&self) -> &KickOperator {
        &self.kick
    }

    pub fn free(&self) -> &FreeOperator {
        &self.free
    }

    pub fn len(&self) -> usize {
        self.kick.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kick.is_empty()
    }

    /// One period forward, in place; renormalizes once.
    pub fn step(&self, s: &mut AngleState) -> Result<()> {
        self.kick.multiply(s, false)?;
        self.free.rotate(s, false)
    }

    /// One period of `U† = U_K† U_f†`, in place.
    pub fn step_adjoint(&self, s: &mut AngleState) -> Result<()> {
        self.free.rotate(s, true)?;
        self.kick.multiply(s, true)
    }

    /// `U^steps s`.
    pub fn evolve(&self, s: &AngleState, steps: usize) -> Result<AngleState> {
        self.evolve_inspect(s, steps, |_, _| {})
    }

    /// `U^steps s`, handing every intermediate state (after kick `k`, 1-based)
    /// to `inspect`.
    pub fn evolve_inspect(
        &self,
        s: &AngleState,
        steps: usize,
        mut inspect: impl FnMut(usize, &AngleState),
    ) -> Result<AngleState> {
        let mut cur = s.clone();
        for k in 1..=steps {
            self.step(&mut cur).map_err(|e| e.at_step(k))?;
            inspect(k, &cur);
        }
        Ok(cur)
    }

    /// States at the requested (non-decreasing) kick counts from one forward run.
    pub fn trajectory(&self, s: &AngleState, times: &[usize]) -> Result<Vec<AngleState>> {
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("trajectory times must be non-decreasing".into()));
        }
        let mut out = Vec::with_capacity(times.len());
        let mut cur = s.clone();
        let mut t = 0;
        for &target in times {
            while t < target {
                t += 1;
                self.step(&mut cur).map_err(|e| e.at_step(t))?;
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// `(U†)^steps s`, the time reversal of `steps` periods.
    pub fn evolve_backward(&self, s: &AngleState, steps: usize) -> Result<AngleState> {
        let mut cur = s.clone();
        for k in 1..=steps {
            self.step_adjoint(&mut cur).map_err(|e| e.at_step(k))?;
        }
        Ok(cur)
    }
}

/// Forward trajectory sampled every `stride` kicks; always includes the
/// initial and final states.
pub fn evolve(
    s: &AngleState,
    p: &SystemParams,
    steps: usize,
    stride: usize,
) -> Result<Vec<AngleState>> {
    if p.n_theta != s.len() {
        return Err(Error::Config(format!(
            "state has {} points, parameters ask for {}",
            s.len(),
            p.n_theta
        )));
    }
    if !p.is_resonant() {
        log::info!("hbar = {} is off resonance: no closed-form oracle available", p.hbar_eff);
    }
    let stride = stride.max(1);
    let mut times: Vec<usize> = (0..=steps).step_by(stride).collect();
    if times.last() != Some(&steps) {
        times.push(steps);
    }
    FloquetOperator::new(p)?.trajectory(s, &times)
}

/// Time-reversed evolution `(U†)^steps s`.
pub fn evolve_backward(s: &AngleState, p: &SystemParams, steps: usize) -> Result<AngleState> {
    FloquetOperator::new(p)?.evolve_backward(s, steps)
}
