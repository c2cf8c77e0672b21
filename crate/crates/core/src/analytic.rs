//! Closed-form predictions at the main resonance `ħ = 4π` for a ground-state start.
//!
//! All formulas are written in terms of the Bessel argument `x = λt/2π`.
//! Asymptotic laws carry a validity flag that is set once `x` reaches
//! [`ASYMPTOTIC_MIN_ARG`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_i_scaled, BesselScaled};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Smallest `λt/2π` at which the large-argument laws are flagged valid.
pub const ASYMPTOTIC_MIN_ARG: f64 = 5.0;

/// Below this `λt/2π` the Bessel ratio is replaced by its small-argument limit.
pub const SMALL_ARG: f64 = 1e-6;

/// A predicted value together with whether its regime applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: f64,
    pub valid: bool,
}

/// The two correlators with linear growth laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    Cf,
    Cp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GrowthRate {
    Finite(f64),
    /// The Hermitian point, where growth is not linear and the rate is unbounded.
    Divergent,
}

impl GrowthRate {
    pub fn value(&self) -> Option<f64> {
        match *self {
            GrowthRate::Finite(g) => Some(g),
            GrowthRate::Divergent => None,
        }
    }
}

/// Predicted `C₁`, `C₂` and `Re C₃` of the momentum/angle pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpParts {
    pub c1: f64,
    pub c2: f64,
    pub re_c3: f64,
    pub valid: bool,
}

impl CpParts {
    pub fn assembled(&self) -> f64 {
        self.c1 + self.c2 - 2.0 * self.re_c3
    }
}

fn bessel_arg(p: &SystemParams, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 || t.is_infinite() {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    if p.lambda.is_nan() || p.lambda < 0.0 {
        return Err(Error::Domain(format!("lambda must be >= 0, got {}", p.lambda)));
    }
    Ok(p.lambda * t / (2.0 * PI))
}

fn k2l2(p: &SystemParams) -> f64 {
    p.k * p.k + p.lambda * p.lambda
}

/// `ln 𝒩(t) = ln I₀(λt/2π)`.
pub fn predict_norm(p: &SystemParams, t: f64) -> Result<f64> {
    let x = bessel_arg(p, t)?;
    Ok(x + bessel_i_scaled(0, x)?.ln())
}

/// `⟨p²⟩ = 2πt (I₁/I₀)(λt/2π) (K²+λ²)/λ`, with limit `t²(K²+λ²)/2` as `λt → 0`.
pub fn predict_p2(p: &SystemParams, t: f64) -> Result<f64> {
    let x = bessel_arg(p, t)?;
    if x < SMALL_ARG {
        return Ok(0.5 * t * t * k2l2(p));
    }
    let ratio = BesselScaled::at(x)?.ratio();
    Ok(2.0 * PI * t * ratio * k2l2(p) / p.lambda)
}

/// `C_f = ε² ⟨p²⟩` with the full Bessel ratio.
pub fn predict_cf(p: &SystemParams, t: f64) -> Result<f64> {
    Ok(p.epsilon * p.epsilon * predict_p2(p, t)?)
}

/// `C_p ≈ 2π³(K²+λ²)t/λ` for `λ > 0`; `16π²` at `λ = 0`.
pub fn predict_cp(p: &SystemParams, t: f64) -> Result<Prediction> {
    let x = bessel_arg(p, t)?;
    if p.lambda == 0.0 {
        return Ok(Prediction {
            value: 16.0 * PI * PI,
            valid: t > 0.0,
        });
    }
    Ok(Prediction {
        value: 2.0 * PI.powi(3) * k2l2(p) * t / p.lambda,
        valid: x >= ASYMPTOTIC_MIN_ARG,
    })
}

/// Asymptotic slope of `C_f` or `C_p`.
pub fn predict_growth_rate(which: Observable, p: &SystemParams) -> Result<GrowthRate> {
    if p.lambda.is_nan() || p.lambda < 0.0 {
        return Err(Error::Domain(format!("lambda must be >= 0, got {}", p.lambda)));
    }
    if p.lambda == 0.0 {
        return Ok(GrowthRate::Divergent);
    }
    let base = k2l2(p) / p.lambda;
    Ok(GrowthRate::Finite(match which {
        Observable::Cf => 2.0 * PI * p.epsilon * p.epsilon * base,
        Observable::Cp => 2.0 * PI.powi(3) * base,
    }))
}

/// Large-time laws for `λ > 0`; exact Hermitian forms at `λ = 0`.
///
/// At `λ = 0` every part is `(K²t²/2π) ∫θ² sin²θ dθ = K²t² (π²/6 − 1/4)`,
/// plus `ħ² = 16π²` for `C₂`.
pub fn predict_cp_parts(p: &SystemParams, t: f64) -> Result<CpParts> {
    let x = bessel_arg(p, t)?;
    let (k, l) = (p.k, p.lambda);
    if l == 0.0 {
        let q = k * k * t * t * (PI * PI / 6.0 - 0.25);
        return Ok(CpParts {
            c1: q,
            c2: q + 16.0 * PI * PI,
            re_c3: q,
            valid: t > 0.0,
        });
    }
    let s = k2l2(p);
    Ok(CpParts {
        c1: 6.0 * PI * PI * s / (l * l),
        c2: 2.0 * PI.powi(3) * s * t / l,
        re_c3: PI * PI * (3.0 * k * k - l * l) / (l * l)
            * (4.0 * PI * l * s / (3.0 * k * k + 11.0 * l * l)).sqrt()
            * t.sqrt(),
        valid: x >= ASYMPTOTIC_MIN_ARG,
    })
}

/// `λ_c = √3 K`, where the `√t` coefficient of `Re C₃` changes sign.
pub fn lambda_critical(k: f64) -> f64 {
    3f64.sqrt() * k.abs()
}
