use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Effective Planck constant of the main quantum resonance.
pub const RESONANT_HBAR: f64 = 4.0 * PI;

/// Displacement used for the fidelity correlator unless configured otherwise.
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Harmonic margin added to the Bessel argument when sizing the angle grid.
const GRID_MARGIN: usize = 32;
const GRID_OVERSAMPLING: usize = 8;

/// `ħ` is a positive integer multiple of `4π`.
pub fn is_resonant_hbar(hbar: f64) -> bool {
    let ratio = hbar / RESONANT_HBAR;
    ratio >= 0.5 && (ratio - ratio.round()).abs() <= 1e-12 * ratio.max(1.0)
}

fn default_hbar() -> f64 {
    RESONANT_HBAR
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// Model constants of the kicked rotor with complex kick strength `K + iλ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Real kick strength `K`.
    #[serde(rename = "K")]
    pub k: f64,
    /// Imaginary kick strength `λ`.
    pub lambda: f64,
    #[serde(default = "default_hbar")]
    pub hbar_eff: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Number of angle grid points; `0` asks for the smallest admissible grid.
    #[serde(default)]
    pub n_theta: usize,
    pub t_max: usize,
}

impl SystemParams {
    /// Resonant parameters with the smallest grid that resolves `t_max` kicks.
    pub fn resonant(k: f64, lambda: f64, t_max: usize) -> Self {
        let mut params = SystemParams {
            k,
            lambda,
            hbar_eff: RESONANT_HBAR,
            epsilon: DEFAULT_EPSILON,
            n_theta: 0,
            t_max,
        };
        params.n_theta = params.required_n_theta();
        params
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Modulus of the complex kick strength, `|K + iλ|`.
    pub fn kick_modulus(&self) -> f64 {
        self.k.hypot(self.lambda)
    }

    /// True when `ħ` is an integer multiple of `4π`, where every free phase
    /// `exp(-i n² ħ/2)` is exactly one.
    pub fn is_resonant(&self) -> bool {
        is_resonant_hbar(self.hbar_eff)
    }

    /// True at the main resonance `ħ = 4π`, the only point with closed-form predictions.
    pub fn has_oracle(&self) -> bool {
        (self.hbar_eff / RESONANT_HBAR - 1.0).abs() <= 1e-12
    }

    /// Minimum number of grid points (before rounding up to a power of two)
    /// for `t` kicks: `8 (⌈|K+iλ| t / ħ⌉ + 32)`.
    ///
    /// After `t` kicks the harmonic content of a ground-state start is bounded
    /// by Bessel functions of argument `|K+iλ| t/ħ`, which are negligible a few
    /// dozen orders beyond the argument.
    pub fn min_grid_points(&self, t: usize) -> usize {
        let support = (self.kick_modulus() * t as f64 / self.hbar_eff).ceil() as usize;
        GRID_OVERSAMPLING * (support + GRID_MARGIN)
    }

    /// Smallest power-of-two grid satisfying [`Self::min_grid_points`] for `t_max`.
    pub fn required_n_theta(&self) -> usize {
        self.min_grid_points(self.t_max).next_power_of_two()
    }

    /// Fill in an automatic grid when `n_theta == 0`.
    pub fn with_auto_grid(mut self) -> Self {
        if self.n_theta == 0 {
            self.n_theta = self.required_n_theta();
        }
        self
    }

    /// Structural checks; the grid may still be too coarse for `t_max`.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("K", self.k),
            ("lambda", self.lambda),
            ("hbar_eff", self.hbar_eff),
            ("epsilon", self.epsilon),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if self.lambda < 0.0 {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.hbar_eff <= 0.0 {
            return Err(Error::Config(format!("hbar_eff must be > 0, got {}", self.hbar_eff)));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.epsilon > 1e-2 {
            log::warn!(
                "epsilon = {} is not small; the variance form of C_f loses accuracy",
                self.epsilon
            );
        }
        if self.n_theta < 8 || !self.n_theta.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_theta must be a power of two >= 8, got {}",
                self.n_theta
            )));
        }
        Ok(())
    }

    /// Structural checks plus the spectral-support rule for `t_max`.
    pub fn validate_for_run(&self) -> Result<()> {
        self.validate()?;
        let required = self.required_n_theta();
        if self.n_theta < required {
            return Err(Error::GridTooSmall {
                n_theta: self.n_theta,
                t_max: self.t_max,
                required,
            });
        }
        Ok(())
    }
}
