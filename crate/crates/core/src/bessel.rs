//! Exponentially scaled modified Bessel functions `e^{-x} I₀(x)` and `e^{-x} I₁(x)`.
//!
//! Power series below [`CROSSOVER`], Hankel asymptotic expansion above it,
//! truncated at its smallest term. Both are accurate to a few ulps on their
//! side of the crossover.

use crate::error::{Error, Result};

/// Series/asymptotic switch point. The optimally truncated asymptotic series
/// has relative error of order `e^{-2x}`, about `4·10⁻¹⁸` here.
pub const CROSSOVER: f64 = 20.0;

const MAX_TERMS: usize = 400;

/// `e^{-x} I_ν(x)` by the ascending series `Σ (x/2)^{2k+ν} / (k! (k+ν)!)`.
pub(crate) fn series_scaled(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let nu = order as f64;
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    let q = half * half;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum * (-x).exp()
}

/// `e^{-x} I_ν(x) ≈ (2πx)^{-1/2} Σ_k (-1)^k Π_{j≤k} (4ν² - (2j-1)²) / (k! (8x)^k)`.
pub(crate) fn asymptotic_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut term = 1.0_f64;
    let mut sum = term;
    for k in 1..MAX_TERMS {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

#[inline]
pub(crate) fn i0e(x: f64) -> f64 {
    if x <= CROSSOVER {
        series_scaled(0, x)
    } else {
        asymptotic_scaled(0, x)
    }
}

#[inline]
pub(crate) fn i1e(x: f64) -> f64 {
    if x <= CROSSOVER {
        series_scaled(1, x)
    } else {
        asymptotic_scaled(1, x)
    }
}

/// `e^{-x} I_order(x)` for `order ∈ {0, 1}` and `x ≥ 0`.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("Bessel argument must be >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Err(Error::Domain("Bessel argument must be finite".into()));
    }
    match order {
        0 => Ok(i0e(x)),
        1 => Ok(i1e(x)),
        _ => Err(Error::Domain(format!("only orders 0 and 1 are provided, got {order}"))),
    }
}

/// `ln I₀(x)`, finite for every finite `x ≥ 0`.
pub fn log_i0(x: f64) -> Result<f64> {
    Ok(x + bessel_i_scaled(0, x)?.ln())
}

/// Both scaled orders at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselScaled {
    pub x: f64,
    pub i0_scaled: f64,
    pub i1_scaled: f64,
}

impl BesselScaled {
    pub fn at(x: f64) -> Result<Self> {
        Ok(BesselScaled {
            x,
            i0_scaled: bessel_i_scaled(0, x)?,
            i1_scaled: bessel_i_scaled(1, x)?,
        })
    }

    /// `I₁(x) / I₀(x)`.
    pub fn ratio(&self) -> f64 {
        self.i1_scaled / self.i0_scaled
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// `(1/π) ∫₀^π e^{x(cos θ - 1)} cos(νθ) dθ` by the trapezoid rule, which is
    /// spectrally accurate for this periodic integrand.
    fn quadrature_oracle(order: u32, x: f64) -> f64 {
        let n = 4096;
        let h = PI / n as f64;
        let f = |th: f64| (x * (th.cos() - 1.0)).exp() * (order as f64 * th).cos();
        let inner: f64 = (1..n).map(|j| f(j as f64 * h)).sum();
        (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
    }

    #[test]
    fn reference_values() {
        // I₀(1) = 1.2660658777520082, I₁(1) = 0.5651591039924851.
        assert_eq!(bessel_i_scaled(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i_scaled(1, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            bessel_i_scaled(0, 1.0).unwrap(),
            1.2660658777520082 * (-1.0f64).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(bessel_i_scaled(0, 1.0).unwrap(), 0.465760, epsilon = 5e-7);
        assert_relative_eq!(bessel_i_scaled(1, 1.0).unwrap(), 0.207910, epsilon = 5e-7);
        assert_relative_eq!(
            bessel_i_scaled(1, 1.0).unwrap(),
            0.5651591039924851 * (-1.0f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn matches_quadrature_oracle() {
        for &x in &[0.01, 0.3, 1.0, 5.0, 11.9, 12.0, 19.9, 20.1, 35.0, 80.0, 150.0, 400.0] {
            for order in 0..=1 {
                let got = bessel_i_scaled(order, x).unwrap();
                let want = quadrature_oracle(order, x);
                assert_relative_eq!(got, want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn crossover_continuity() {
        for &x in &[12.0, CROSSOVER] {
            for order in 0..=1 {
                let s = series_scaled(order, x);
                let a = asymptotic_scaled(order, x);
                let tol = if x == CROSSOVER { 1e-13 } else { 1e-10 };
                assert_relative_eq!(s, a, max_relative = tol);
            }
        }
    }

    #[test]
    fn ordering_and_monotone_ratio() {
        let mut last_ratio = 0.0;
        let mut x = 0.0;
        while x <= 1000.0 {
            let b = BesselScaled::at(x).unwrap();
            if x > 0.0 {
                assert!(0.0 < b.i1_scaled && b.i1_scaled < b.i0_scaled && b.i0_scaled <= 1.0);
                // I₀² − I₁² > 0
                assert!(b.i0_scaled.powi(2) - b.i1_scaled.powi(2) > 0.0);
                assert!(b.ratio() > last_ratio, "ratio not increasing at x = {x}");
                last_ratio = b.ratio();
            }
            x += if x < 30.0 { 0.25 } else { 7.0 };
        }
        assert!(last_ratio < 1.0 && last_ratio > 0.999);
    }

    #[test]
    fn log_i0_large_argument() {
        // ln I₀(x) = x − ½ ln(2πx) + ln(1 + 1/(8x) + 9/(128x²) + 225/(3072x³) + …)
        let x = 15.0 * 1000.0 / (2.0 * PI);
        let tail = 1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x) + 225.0 / (3072.0 * x.powi(3));
        let expect = x - 0.5 * (2.0 * PI * x).ln() + tail.ln();
        assert_relative_eq!(log_i0(x).unwrap(), expect, max_relative = 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bessel_i_scaled(0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_i_scaled(0, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(bessel_i_scaled(2, 1.0), Err(Error::Domain(_))));
    }
}
