//! Angle- and momentum-space states and the spectral map between them.
//!
//! Angle states live on the half-open grid `θ_j = -π + 2πj/N`, `j = 0..N`.
//! Momentum amplitudes use the plane-wave convention `⟨θ|n⟩ = e^{inθ}/√(2π)`
//! and are indexed by `n ∈ [-N/2, N/2)`. Both representations carry the
//! stored amplitudes together with `log_norm`: the physical state equals the
//! stored amplitudes times `exp(log_norm / 2)`, so the norm never has to be
//! formed in linear scale.

use std::borrow::Cow;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, FftPair>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

#[derive(Clone)]
struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> FftPair {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry(n)
            .or_insert_with(|| FftPair {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
            .clone()
    })
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "grid length must be a power of two >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Principal-branch angle grid `θ_j = -π + 2πj/n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| theta_at(j, n)).collect()
}

#[inline]
fn theta_at(j: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / n as f64
}

/// Quadrature weight `2π/n` of the Riemann sum on the angle grid.
#[inline]
pub fn quadrature_weight(n: usize) -> f64 {
    2.0 * PI / n as f64
}

/// Momentum index carried by FFT output slot `m`.
#[inline]
pub(crate) fn slot_momentum(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Multiply a grid function by a momentum-diagonal operator `f(n)`, in place.
pub(crate) fn apply_momentum_diagonal(values: &mut [Complex64], f: impl Fn(i64) -> Complex64) {
    let n = values.len();
    let fft = plans(n);
    fft.forward.process(values);
    let scale = 1.0 / n as f64;
    for (m, v) in values.iter_mut().enumerate() {
        *v *= f(slot_momentum(m, n)) * scale;
    }
    fft.inverse.process(values);
}

/// A wavefunction sampled on the angle grid.
///
/// Besides the periodic samples the state may carry a component multiplied by
/// the principal-branch angle itself, so that the represented function is
/// `amps_j + θ_j · theta_part_j`. Keeping the explicit `θ` factor lets the
/// momentum operator act on it through `p θ = θ p - iħ` rather than through
/// the derivative of the sawtooth's periodic extension, whose jump at `θ = ±π`
/// would otherwise leak a grid-dependent spike into every momentum moment.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleState {
    amps: Vec<Complex64>,
    theta_part: Option<Vec<Complex64>>,
    log_norm: f64,
}

impl AngleState {
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        Self::with_log_norm(amps, 0.0)
    }

    pub fn with_log_norm(amps: Vec<Complex64>, log_norm: f64) -> Result<Self> {
        check_len(amps.len())?;
        if !log_norm.is_finite() {
            return Err(Error::NonFinite { step: None });
        }
        Ok(AngleState {
            amps,
            theta_part: None,
            log_norm,
        })
    }

    /// State `f(θ_j)` sampled on an `n`-point grid.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_len(n)?;
        Self::from_amplitudes((0..n).map(|j| f(theta_at(j, n))).collect())
    }

    /// The uniform rotor ground state `1/√(2π)`, with unit norm.
    pub fn ground(n: usize) -> Result<Self> {
        let a = Complex64::new(1.0 / (2.0 * PI).sqrt(), 0.0);
        Self::from_fn(n, |_| a)
    }

    /// `θ · g` for a periodic `g` given by its stored samples.
    pub(crate) fn angle_times(periodic: &AngleState) -> Self {
        let values = periodic.values().into_owned();
        AngleState {
            amps: vec![Complex64::new(0.0, 0.0); values.len()],
            theta_part: Some(values),
            log_norm: periodic.log_norm,
        }
    }

    pub(crate) fn from_parts(
        amps: Vec<Complex64>,
        theta_part: Option<Vec<Complex64>>,
        log_norm: f64,
    ) -> Self {
        AngleState {
            amps,
            theta_part,
            log_norm,
        }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn theta_part(&self) -> Option<&[Complex64]> {
        self.theta_part.as_deref()
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<Complex64>, Option<&mut Vec<Complex64>>) {
        (&mut self.amps, self.theta_part.as_mut())
    }

    pub(crate) fn into_parts(self) -> (Vec<Complex64>, Option<Vec<Complex64>>, f64) {
        (self.amps, self.theta_part, self.log_norm)
    }

    /// Stored samples of the represented function (without `exp(log_norm/2)`).
    pub fn values(&self) -> Cow<'_, [Complex64]> {
        match &self.theta_part {
            None => Cow::Borrowed(&self.amps),
            Some(lin) => {
                let n = self.amps.len();
                Cow::Owned(
                    self.amps
                        .iter()
                        .zip(lin)
                        .enumerate()
                        .map(|(j, (a, b))| a + b * theta_at(j, n))
                        .collect(),
                )
            }
        }
    }

    /// Fold the explicit angle factor into plain samples.
    pub fn materialize(&mut self) {
        if self.theta_part.is_some() {
            self.amps = self.values().into_owned();
            self.theta_part = None;
        }
    }

    /// `(2π/N) Σ |v_j|²` over the stored samples.
    pub fn stored_norm(&self) -> f64 {
        let n = self.len();
        let sum: f64 = match &self.theta_part {
            None => self.amps.iter().map(|v| v.norm_sqr()).sum(),
            Some(lin) => self
                .amps
                .iter()
                .zip(lin)
                .enumerate()
                .map(|(j, (a, b))| (a + b * theta_at(j, n)).norm_sqr())
                .sum(),
        };
        quadrature_weight(n) * sum
    }

    /// Physical amplitude at grid point `j`, i.e. the stored value times `exp(log_norm/2)`.
    pub fn amplitude(&self, j: usize) -> Complex64 {
        let mut v = self.amps[j];
        if let Some(lin) = &self.theta_part {
            v += lin[j] * theta_at(j, self.len());
        }
        v * (0.5 * self.log_norm).exp()
    }

    /// Multiply the stored amplitudes by `factor > 0` and compensate in
    /// `log_norm`, leaving the physical state unchanged.
    pub fn rescaled(mut self, factor: f64) -> Self {
        for v in self.amps.iter_mut() {
            *v *= factor;
        }
        if let Some(lin) = self.theta_part.as_mut() {
            for v in lin.iter_mut() {
                *v *= factor;
            }
        }
        self.log_norm -= 2.0 * factor.ln();
        self
    }

    /// Move the stored norm into `log_norm` so the stored amplitudes have unit
    /// discrete norm.
    pub fn renormalize(&mut self) -> Result<()> {
        let q = self.stored_norm();
        if !q.is_finite() {
            return Err(Error::NonFinite { step: None });
        }
        if q <= 0.0 {
            return Err(Error::DegenerateState { step: None });
        }
        let s = 1.0 / q.sqrt();
        for v in self.amps.iter_mut() {
            *v = flush_subnormal(*v * s);
        }
        if let Some(lin) = self.theta_part.as_mut() {
            for v in lin.iter_mut() {
                *v = flush_subnormal(*v * s);
            }
        }
        self.log_norm += q.ln();
        Ok(())
    }
}

/// Zero out subnormal components. After renormalization they sit more than
/// 300 decades below the unit norm, and arithmetic on them is very slow.
#[inline]
fn flush_subnormal(z: Complex64) -> Complex64 {
    let f = |x: f64| if x.abs() < f64::MIN_POSITIVE { 0.0 } else { x };
    Complex64::new(f(z.re), f(z.im))
}

/// Momentum amplitudes `ψ_n`, stored for `n = -N/2, …, N/2 - 1` in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    amps: Vec<Complex64>,
    log_norm: f64,
}

impl MomentumState {
    pub fn with_log_norm(amps: Vec<Complex64>, log_norm: f64) -> Result<Self> {
        check_len(amps.len())?;
        Ok(MomentumState { amps, log_norm })
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Lowest momentum index held, `-N/2`.
    pub fn min_index(&self) -> i64 {
        -(self.amps.len() as i64 / 2)
    }

    /// Momentum indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        let lo = self.min_index();
        (0..self.amps.len() as i64).map(move |k| lo + k)
    }

    /// Amplitude of `|n⟩`, or `None` outside the stored band.
    pub fn get(&self, n: i64) -> Option<Complex64> {
        let k = n - self.min_index();
        (0..self.amps.len() as i64)
            .contains(&k)
            .then(|| self.amps[k as usize])
    }

    /// `Σ_n |ψ_n|²` over the stored amplitudes.
    pub fn stored_norm(&self) -> f64 {
        self.amps.iter().map(|v| v.norm_sqr()).sum()
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }
}

/// Expand an angle state in the momentum basis.
///
/// `ψ_n = (1/√(2π)) Σ_j w ψ(θ_j) e^{-inθ_j}` with `w = 2π/N`, so the discrete
/// Parseval identity `Σ_n |ψ_n|² = w Σ_j |ψ(θ_j)|²` holds exactly.
pub fn to_momentum(s: &AngleState) -> Result<MomentumState> {
    let n = s.len();
    check_len(n)?;
    let mut buf = s.values().into_owned();
    plans(n).forward.process(&mut buf);
    let scale = (2.0 * PI).sqrt() / n as f64;
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    for (m, v) in buf.into_iter().enumerate() {
        let idx = slot_momentum(m, n);
        // e^{-inθ_j} = (-1)^n e^{-2πinj/N} on the principal grid.
        let sign = if idx.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        amps[(idx + n as i64 / 2) as usize] = v * (sign * scale);
    }
    MomentumState::with_log_norm(amps, s.log_norm())
}

/// Resum momentum amplitudes onto the angle grid; inverse of [`to_momentum`].
pub fn to_angle(m: &MomentumState) -> Result<AngleState> {
    let n = m.len();
    check_len(n)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let scale = 1.0 / (2.0 * PI).sqrt();
    for (idx, v) in m.indices().zip(m.amps()) {
        let sign = if idx.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        buf[idx.rem_euclid(n as i64) as usize] = v * sign;
    }
    plans(n).inverse.process(&mut buf);
    for v in buf.iter_mut() {
        *v *= scale;
    }
    AngleState::with_log_norm(buf, m.log_norm())
}

/// Natural log of the state norm `⟨ψ|ψ⟩`.
pub fn norm(s: &AngleState) -> Result<f64> {
    let q = s.stored_norm();
    if !q.is_finite() {
        return Err(Error::NonFinite { step: None });
    }
    if q <= 0.0 {
        return Err(Error::DegenerateState { step: None });
    }
    Ok(s.log_norm() + q.ln())
}

/// `⟨a|b⟩` as `(value, log_scale)` with the physical overlap equal to
/// `value · exp(log_scale)`.
pub fn inner(a: &AngleState, b: &AngleState) -> Result<(Complex64, f64)> {
    if a.len() != b.len() {
        return Err(Error::Config(format!(
            "grid mismatch: {} vs {} points",
            a.len(),
            b.len()
        )));
    }
    let w = quadrature_weight(a.len());
    let (va, vb) = (a.values(), b.values());
    let s: Complex64 = va.iter().zip(vb.iter()).map(|(x, y)| x.conj() * y).sum();
    Ok((s * w, 0.5 * (a.log_norm() + b.log_norm())))
}

/// Norm-rescaled momentum moments `(⟨p⟩, ⟨p²⟩)` with `p_n = n ħ`.
pub fn momentum_moments(s: &AngleState, hbar: f64) -> Result<(f64, f64)> {
    let m = to_momentum(s)?;
    let (mut z, mut p1, mut p2) = (0.0, 0.0, 0.0);
    for (n, a) in m.indices().zip(m.amps()) {
        let w = a.norm_sqr();
        let p = n as f64 * hbar;
        z += w;
        p1 += p * w;
        p2 += p * p * w;
    }
    if !z.is_finite() {
        return Err(Error::NonFinite { step: None });
    }
    if z <= 0.0 {
        return Err(Error::DegenerateState { step: None });
    }
    Ok((p1 / z, p2 / z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_is_half_open() {
        let th = theta_grid(8);
        assert_eq!(th[0], -PI);
        assert_relative_eq!(th[7], PI - 2.0 * PI / 8.0, epsilon = 1e-15);
        assert!(th.iter().all(|&x| x < PI));
    }

    #[test]
    fn uniform_state_is_pure_zero_momentum() {
        let m = to_momentum(&AngleState::ground(64).unwrap()).unwrap();
        for (n, a) in m.indices().zip(m.amps()) {
            if n == 0 {
                assert_relative_eq!(a.re, 1.0, epsilon = 1e-14);
                assert!(a.im.abs() < 1e-14);
            } else {
                assert!(a.norm() < 1e-14, "n = {n}: {a}");
            }
        }
    }

    #[test]
    fn single_harmonic_lands_on_its_index() {
        let s = AngleState::from_fn(32, |th| c(0.0, th).exp() / (2.0 * PI).sqrt()).unwrap();
        let m = to_momentum(&s).unwrap();
        assert_relative_eq!(m.get(1).unwrap().re, 1.0, epsilon = 1e-14);
        assert!(m.get(1).unwrap().im.abs() < 1e-14);
        assert!(m.get(0).unwrap().norm() < 1e-14);
        assert!(m.get(-1).unwrap().norm() < 1e-14);
        assert_eq!(m.get(16), None);
        assert!(m.get(-16).is_some());
    }

    #[test]
    fn non_power_of_two_is_config_error() {
        assert!(matches!(
            AngleState::from_amplitudes(vec![c(1.0, 0.0); 12]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            MomentumState::with_log_norm(vec![c(1.0, 0.0); 6], 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn ground_state_has_unit_norm() {
        assert!(norm(&AngleState::ground(128).unwrap()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn zero_vector_is_degenerate() {
        let z = AngleState::from_amplitudes(vec![c(0.0, 0.0); 8]).unwrap();
        assert_eq!(norm(&z), Err(Error::DegenerateState { step: None }));
        let mut z2 = z.clone();
        assert_eq!(z2.renormalize(), Err(Error::DegenerateState { step: None }));
        assert!(momentum_moments(&z, 1.0).is_err());
    }

    #[test]
    fn renormalize_moves_scale_into_log_norm() {
        let mut s = AngleState::ground(16).unwrap().rescaled(1e3);
        assert_relative_eq!(s.stored_norm(), 1e6, max_relative = 1e-14);
        s.renormalize().unwrap();
        assert_relative_eq!(s.stored_norm(), 1.0, max_relative = 1e-14);
        assert!(s.log_norm().abs() < 1e-12);
    }

    #[test]
    fn theta_part_values_and_materialize() {
        let g = AngleState::ground(8).unwrap();
        let mut s = AngleState::angle_times(&g);
        let th = theta_grid(8);
        for (j, v) in s.values().iter().enumerate() {
            assert_relative_eq!(v.re, th[j] / (2.0 * PI).sqrt(), epsilon = 1e-15);
        }
        let before = s.values().into_owned();
        s.materialize();
        assert!(s.theta_part().is_none());
        assert_eq!(s.amps(), &before[..]);
    }

    #[test]
    fn inner_product_carries_log_scale() {
        let g = AngleState::ground(16).unwrap();
        let big = g.clone().rescaled(0.5);
        let (v, l) = inner(&g, &big).unwrap();
        assert_relative_eq!((v * l.exp()).re, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn moments_of_cosine_state() {
        // (e^{iθ} + e^{-iθ})/√(4π): ⟨p⟩ = 0, ⟨p²⟩ = ħ².
        let s = AngleState::from_fn(16, |th| c((2.0 * th.cos()) / (4.0 * PI).sqrt(), 0.0)).unwrap();
        let (p1, p2) = momentum_moments(&s, 3.0).unwrap();
        assert!(p1.abs() < 1e-13);
        assert_relative_eq!(p2, 9.0, max_relative = 1e-13);
    }

    #[test]
    fn renormalize_flushes_subnormals() {
        let mut amps = vec![Complex64::new(1.0, 0.0); 8];
        amps[3] = Complex64::new(1e-310, -2.0);
        amps[5] = Complex64::new(5e-320, 1e-300);
        let mut s = AngleState::from_amplitudes(amps).unwrap();
        s.renormalize().unwrap();
        assert_eq!(s.amps()[3].re, 0.0);
        assert_eq!(s.amps()[5].re, 0.0);
        assert!(s.amps()[5].im > 0.0);
        assert_relative_eq!(s.stored_norm(), 1.0, max_relative = 1e-14);
    }
}
