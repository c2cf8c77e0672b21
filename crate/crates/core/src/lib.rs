//! Spectral simulation of the quantum kicked rotor with a complex kick
//! strength `K + iλ`, norm-rescaled out-of-time-ordered correlators, and the
//! closed-form laws that hold at the resonance `ħ = 4π`.

pub mod analytic;
pub mod bessel;
pub mod error;
pub mod floquet;
pub mod otoc;
pub mod params;
pub mod state;

pub use analytic::{
    lambda_critical, predict_cf, predict_cp, predict_cp_parts, predict_growth_rate, predict_norm,
    predict_p2, CpParts, GrowthRate, Observable, Prediction,
};
pub use bessel::{bessel_i_scaled, BesselScaled};
pub use error::{Error, Result};
pub use floquet::{
    apply_free, apply_kick, evolve, evolve_backward, FloquetOperator, FreeOperator, KickOperator,
};
pub use otoc::{
    apply_operator, compute_c1, compute_c2, compute_c3, compute_fotoc, compute_otoc,
    fit_growth_rate, fotoc_of_state, Correlators, FotocSample, NormLedger, Operator, OperatorPair, OtocEngine,
    OtocRecord,
};
pub use params::{SystemParams, DEFAULT_EPSILON, RESONANT_HBAR};
pub use state::{inner, momentum_moments, norm, to_angle, to_momentum, AngleState, MomentumState};
