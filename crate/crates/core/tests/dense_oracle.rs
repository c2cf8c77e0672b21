//! Rescaled correlators on a 16-point grid against explicit dense matrices.
//!
//! A state is the pair `(a, b)` standing for `a + θ b`, stacked into a vector
//! of length `2N`. Every operator of the pipeline is an explicit `2N × 2N`
//! matrix built from sums over plane waves; no FFT is involved.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use nhkr_core::*;
use num_complex::Complex64;

const N: usize = 16;

type M = DMatrix<Complex64>;
type V = DVector<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn thetas() -> Vec<f64> {
    (0..N).map(|j| -PI + 2.0 * PI * j as f64 / N as f64).collect()
}

/// `N × N` matrix of the momentum-diagonal operator `f(n)`, `n ∈ [-N/2, N/2)`.
fn momentum_diag(f: impl Fn(i64) -> Complex64) -> M {
    let half = N as i64 / 2;
    M::from_fn(N, N, |j, k| {
        let mut s = c(0.0, 0.0);
        for n in -half..half {
            let phase = 2.0 * PI * n as f64 * (j as f64 - k as f64) / N as f64;
            s += f(n) * Complex64::from_polar(1.0, phase);
        }
        s / N as f64
    })
}

fn diag(v: &[Complex64]) -> M {
    M::from_diagonal(&V::from_column_slice(v))
}

fn blocks(tl: &M, tr: &M, bl: &M, br: &M) -> M {
    let mut m = M::zeros(2 * N, 2 * N);
    m.view_mut((0, 0), (N, N)).copy_from(tl);
    m.view_mut((0, N), (N, N)).copy_from(tr);
    m.view_mut((N, 0), (N, N)).copy_from(bl);
    m.view_mut((N, N), (N, N)).copy_from(br);
    m
}

struct Dense {
    u: M,
    u_dag: M,
    a: M,
    b: M,
    values: M,
}

fn theta_diag() -> M {
    diag(&thetas().iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
}

fn dense(p: &SystemParams, a: &Operator, b: &Operator) -> Dense {
    let th = thetas();
    let z = M::zeros(N, N);
    let id = M::identity(N, N);
    let theta = theta_diag();

    let g: Vec<Complex64> = th
        .iter()
        .map(|&x| (-Complex64::i() * c(p.k, p.lambda) * x.cos() / p.hbar_eff).exp())
        .collect();
    let g_conj: Vec<Complex64> = g.iter().map(|z| z.conj()).collect();
    let kick = blocks(&diag(&g), &z, &z, &diag(&g));
    let kick_dag = blocks(&diag(&g_conj), &z, &z, &diag(&g_conj));

    let resonant = (p.hbar_eff / RESONANT_HBAR - (p.hbar_eff / RESONANT_HBAR).round()).abs() < 1e-12;
    let (free, free_dag) = if resonant {
        (M::identity(2 * N, 2 * N), M::identity(2 * N, 2 * N))
    } else {
        let f = momentum_diag(|n| Complex64::from_polar(1.0, -(n * n) as f64 * p.hbar_eff / 2.0));
        let fd = momentum_diag(|n| Complex64::from_polar(1.0, (n * n) as f64 * p.hbar_eff / 2.0));
        // Off resonance the angle factor is folded in before rotating.
        (
            blocks(&f, &(&f * &theta), &z, &z),
            blocks(&fd, &(&fd * &theta), &z, &z),
        )
    };

    let values = {
        let mut m = M::zeros(N, 2 * N);
        m.view_mut((0, 0), (N, N)).copy_from(&id);
        m.view_mut((0, N), (N, N)).copy_from(&theta);
        m
    };

    let op = |o: &Operator| -> M {
        match o {
            Operator::Momentum => {
                let pm = momentum_diag(|n| c(p.hbar_eff * n as f64, 0.0));
                blocks(&pm, &(&id * c(0.0, -p.hbar_eff)), &z, &pm)
            }
            Operator::Displacement { epsilon } => {
                let d = momentum_diag(|n| Complex64::from_polar(1.0, epsilon * p.hbar_eff * n as f64));
                blocks(&d, &(&d * c(epsilon * p.hbar_eff, 0.0)), &z, &d)
            }
            Operator::Angle => blocks(&z, &z, &id, &theta),
            Operator::Projector(r) => {
                let rv = V::from_iterator(N, r.values().iter().map(|x| x * (0.5 * r.log_norm()).exp()));
                let w = 2.0 * PI / N as f64;
                let proj = &rv * rv.adjoint() * c(w, 0.0);
                blocks(&proj, &(&proj * &theta), &z, &z)
            }
        }
    };

    Dense {
        u: &free * &kick,
        u_dag: &kick_dag * &free_dag,
        a: op(a),
        b: op(b),
        values,
    }
}

impl Dense {
    fn inner(&self, x: &V, y: &V) -> Complex64 {
        let w = 2.0 * PI / N as f64;
        ((&self.values * x).adjoint() * (&self.values * y))[(0, 0)] * w
    }

    fn norm(&self, x: &V) -> f64 {
        self.inner(x, x).re
    }

    fn power(m: &M, t: usize) -> M {
        (0..t).fold(M::identity(2 * N, 2 * N), |acc, _| m * &acc)
    }

    /// `(C₁, C₂, C₃)` for start `ψ₀`.
    fn correlators(&self, psi0: &V, t: usize) -> (f64, f64, Complex64) {
        let ut = Self::power(&self.u, t);
        let ut_dag = Self::power(&self.u_dag, t);
        let branch = |start: &V| {
            let at_t = &ut * start;
            let tilde = &self.a * &at_t;
            let rev = &ut_dag * &tilde;
            let (n0, nt, ntil, nr) = (self.norm(start), self.norm(&at_t), self.norm(&tilde), self.norm(&rev));
            (rev, (nt / n0) * (nr / ntil))
        };
        let phi0 = &self.b * psi0;
        let (psi_r, f_psi) = branch(psi0);
        let (phi_r, f_phi) = branch(&phi0);
        let b_psi_r = &self.b * &psi_r;
        let c1 = self.norm(&b_psi_r) / f_psi;
        let c2 = self.norm(&phi_r) / f_phi;
        let c3 = self.inner(&b_psi_r, &phi_r) / (f_psi * f_phi).sqrt();
        (c1, c2, c3)
    }
}

fn check(p: SystemParams, pair: OperatorPair, psi0: AngleState) {
    let engine = OtocEngine::with_initial_state(&p, psi0.clone()).unwrap();
    let d = dense(&p, &pair.a, &pair.b);
    let mut v = V::zeros(2 * N);
    for (j, z) in psi0.values().iter().enumerate() {
        v[j] = z * (0.5 * psi0.log_norm()).exp();
    }
    for t in 0..=3 {
        let got = engine.correlators(&pair, t).unwrap();
        let (c1, c2, c3) = d.correlators(&v, t);
        let tag = format!("hbar {}, lambda {}, t {t}", p.hbar_eff, p.lambda);
        assert!((got.c1 - c1).abs() < 1e-10, "{tag}: C1 {} vs {}", got.c1, c1);
        assert!((got.c2 - c2).abs() < 1e-10, "{tag}: C2 {} vs {}", got.c2, c2);
        assert!((got.c3 - c3).norm() < 1e-10, "{tag}: C3 {} vs {}", got.c3, c3);
    }
}

fn params(k: f64, lambda: f64, hbar: f64) -> SystemParams {
    SystemParams {
        k,
        lambda,
        hbar_eff: hbar,
        epsilon: 0.05,
        n_theta: N,
        t_max: 3,
    }
}

fn smooth_start() -> AngleState {
    AngleState::from_fn(N, |th| c(1.0 + 0.3 * th.cos(), 0.2 * (2.0 * th).sin())).unwrap()
}

#[test]
fn momentum_angle_pair_at_resonance() {
    for &(k, l) in &[(1.5, 0.7), (0.8, 0.0), (2.0, 1.2)] {
        check(params(k, l, RESONANT_HBAR), OperatorPair::momentum_angle(), AngleState::ground(N).unwrap());
        check(params(k, l, RESONANT_HBAR), OperatorPair::momentum_angle(), smooth_start());
    }
}

#[test]
fn momentum_angle_pair_generic_hbar() {
    for &(k, l, h) in &[(1.5, 0.7, 1.3), (0.8, 0.0, 2.1), (1.0, 0.4, 0.9)] {
        check(params(k, l, h), OperatorPair::momentum_angle(), smooth_start());
    }
}

#[test]
fn fidelity_pair() {
    for &(k, l, h) in &[(1.5, 0.7, RESONANT_HBAR), (1.0, 0.3, 1.3), (2.0, 0.0, 0.7)] {
        let g = AngleState::ground(N).unwrap();
        let p = params(k, l, h);
        check(p, OperatorPair::fidelity(p.epsilon, g.clone()), g);
    }
}
