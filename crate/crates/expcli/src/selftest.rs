//! Seeded randomized invariant checks, runnable from the command line.

use nhkr_core::{
    inner, momentum_moments, norm, to_angle, to_momentum, AngleState, FloquetOperator, OperatorPair, OtocEngine,
    Result as CoreResult, SystemParams, RESONANT_HBAR,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest violation seen, in units of the property's tolerance.
    pub worst: f64,
    pub first_failure: Option<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestSummary {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }
}

fn random_amps(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if v.iter().any(|z| z.norm() > 1e-3) {
            return v;
        }
    }
}

fn random_state(rng: &mut ChaCha8Rng, min_log2: u32, max_log2: u32) -> AngleState {
    let n = 1usize << rng.gen_range(min_log2..=max_log2);
    AngleState::from_amplitudes(random_amps(rng, n)).expect("nonzero amplitudes")
}

fn smooth_state(rng: &mut ChaCha8Rng, n: usize) -> AngleState {
    let coef = random_amps(rng, 5);
    AngleState::from_fn(n, |th| {
        let mut z = Complex64::new(1.5, 0.0);
        for (m, c) in coef.iter().enumerate() {
            z += c * Complex64::from_polar(1.0, (m as f64 - 2.0) * th) * 0.3;
        }
        z
    })
    .expect("smooth state is nonzero")
}

fn random_hbar(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        RESONANT_HBAR
    } else {
        rng.gen_range(0.3..5.0)
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn toy(k: f64, lambda: f64, hbar: f64, n: usize, epsilon: f64) -> SystemParams {
    SystemParams {
        k,
        lambda,
        hbar_eff: hbar,
        epsilon,
        n_theta: n,
        t_max: 6,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// A case returns its violation ratio `error / tolerance`; above 1 is a failure.
fn property(
    name: &'static str,
    cases: usize,
    rng: &mut ChaCha8Rng,
    mut case: impl FnMut(&mut ChaCha8Rng) -> CoreResult<f64>,
) -> PropertyResult {
    let mut out = PropertyResult {
        name,
        cases,
        failures: 0,
        worst: 0.0,
        first_failure: None,
    };
    for i in 0..cases {
        let (ratio, msg) = match case(rng) {
            Ok(r) if r.is_finite() => (r, format!("case {i}: violation {r:.3} x tolerance")),
            Ok(r) => (f64::INFINITY, format!("case {i}: non-finite violation {r}")),
            Err(e) => (f64::INFINITY, format!("case {i}: {e}")),
        };
        out.worst = out.worst.max(ratio);
        if ratio > 1.0 {
            out.failures += 1;
            out.first_failure.get_or_insert(msg);
        }
    }
    out
}

/// Runs every property `cases` times from `seed`.
pub fn run_selftest(cases: usize, seed: u64) -> SelftestSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::new();

    results.push(property("parseval", cases, &mut rng, |rng| {
        let s = random_state(rng, 3, 9);
        Ok(rel(to_momentum(&s)?.stored_norm(), s.stored_norm()) / 1e-12)
    }));

    results.push(property("round_trip", cases, &mut rng, |rng| {
        let s = random_state(rng, 3, 9);
        let s = AngleState::with_log_norm(s.amps().to_vec(), rng.gen_range(-50.0..50.0))?;
        let back = to_angle(&to_momentum(&s)?)?;
        if back.log_norm() != s.log_norm() {
            return Ok(f64::INFINITY);
        }
        let scale = s.amps().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = back
            .amps()
            .iter()
            .zip(s.amps())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        Ok(err / (1e-12 * scale))
    }));

    results.push(property("floquet_adjoint", cases, &mut rng, |rng| {
        let n = 1usize << rng.gen_range(3..=7);
        let p = toy(
            rng.gen_range(0.0..6.0),
            rng.gen_range(0.0..3.0),
            random_hbar(rng),
            n,
            1e-5,
        );
        let op = FloquetOperator::new(&p)?;
        let u = AngleState::from_amplitudes(random_amps(rng, n))?;
        let v = AngleState::from_amplitudes(random_amps(rng, n))?;
        let mut uv = v.clone();
        op.step(&mut uv)?;
        let mut udag_u = u.clone();
        op.step_adjoint(&mut udag_u)?;
        let (l, ls) = inner(&u, &uv)?;
        let (r, rs) = inner(&udag_u, &v)?;
        let size = (0.5 * (norm(&u)? + norm(&uv)?)).exp();
        Ok((l * ls.exp() - r * rs.exp()).norm() / (1e-12 * size))
    }));

    results.push(property("moments_rescaling", cases, &mut rng, |rng| {
        let s = random_state(rng, 3, 8);
        let h = random_hbar(rng);
        let factor = log_uniform(rng, 1e-6, 1e6);
        let (p1, p2) = momentum_moments(&s, h)?;
        let (q1, q2) = momentum_moments(&s.clone().rescaled(factor), h)?;
        let mean = (p1 - q1).abs() / (1e-12 * p2.sqrt().max(f64::MIN_POSITIVE));
        Ok(mean.max(rel(p2, q2) / 1e-12))
    }));

    results.push(property("correlator_rescaling", cases, &mut rng, |rng| {
        let psi0 = smooth_state(rng, 32);
        let p = toy(rng.gen_range(0.0..3.0), rng.gen_range(0.0..1.5), random_hbar(rng), 32, 1e-5);
        let t = rng.gen_range(1..=4);
        let (f_psi, f_phi, f_start) = (
            log_uniform(rng, 1e-4, 1e4),
            log_uniform(rng, 1e-4, 1e4),
            log_uniform(rng, 1e-4, 1e4),
        );
        let pair = OperatorPair::momentum_angle();
        let e = OtocEngine::with_initial_state(&p, psi0.clone())?;
        let psi_t = e.floquet().evolve(&psi0, t)?;
        let phi_t = e.floquet().evolve(&e.phi0(&pair)?, t)?;
        let base = e.correlators_from_states(&pair, t, &psi_t, &phi_t)?;
        let moved = e.correlators_from_states(&pair, t, &psi_t.rescaled(f_psi), &phi_t.rescaled(f_phi))?;
        let restarted = OtocEngine::with_initial_state(&p, psi0.rescaled(f_start))?.correlators(&pair, t)?;
        let mut worst: f64 = 0.0;
        for o in [moved, restarted] {
            worst = worst
                .max(rel(base.c1, o.c1))
                .max(rel(base.c2, o.c2))
                .max((base.c3 - o.c3).norm() / base.c3.norm().max(f64::MIN_POSITIVE));
        }
        Ok(worst / 1e-12)
    }));

    results.push(property("fotoc_pair", cases, &mut rng, |rng| {
        let hermitian = rng.gen_bool(0.5);
        let lambda = if hermitian { 0.0 } else { rng.gen_range(0.0..2.0) };
        let epsilon = log_uniform(rng, 1e-4, 1e-2);
        let p = toy(rng.gen_range(0.0..6.0), lambda, random_hbar(rng), 64, epsilon);
        let g = AngleState::ground(64)?;
        let e = OtocEngine::with_initial_state(&p, g.clone())?;
        let t = rng.gen_range(0..=6);
        let c = e.correlators(&OperatorPair::fidelity(epsilon, g), t)?;
        let mut err = (c.c1 - c.c3.re).abs().max((c.c2 - 1.0).abs());
        if hermitian {
            let f = e.fotoc(t)?;
            err = err.max((c.otoc() - (1.0 - f.fotoc)).abs()).max((c.c1 - f.fotoc).abs());
        }
        Ok(err / 1e-10)
    }));

    SelftestSummary { seed, results }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_reproducible() {
        let a = run_selftest(20, 7);
        assert!(a.passed(), "{:?}", a.results);
        assert_eq!(a.results.len(), 6);
        let b = run_selftest(20, 7);
        let worst = |s: &SelftestSummary| s.results.iter().map(|r| r.worst).collect::<Vec<_>>();
        assert_eq!(worst(&a), worst(&b));
    }
}
