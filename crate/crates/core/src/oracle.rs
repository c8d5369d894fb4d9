//! Frequency-domain cross-checks for the time-domain estimators.
//!
//! * [`quadrature_cost`] evaluates the asymptotic ARX cost of a given
//!   `(A, B)` as the sum of a reference part and an innovation part,
//!   each a trapezoidal quadrature over the unit circle.
//! * [`monic_minimizer`] minimizes `(1/2pi) ∫ |X|^2 |Z|^2` over monic
//!   `X` of fixed degree by solving its normal equations; the exact
//!   minimizer over all power series is `1/Z` with value 1.
//! * [`power_series`] is the impulse response of a rational function by
//!   long division.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::linalg::cholesky_solve;
use crate::ltisys::{RationalTF, SystemSpec};
use crate::poly::Poly;
use crate::{Error, Result};

pub const DEFAULT_QUADRATURE_POINTS: usize = 4096;

const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostDecomposition {
    pub j_r: f64,
    pub j_e: f64,
    pub j_total: f64,
    pub quadrature_points: usize,
}

/// Uniform grid on `[0, pi]` with trapezoid weights for a real, even,
/// `2pi`-periodic integrand: `(1/2pi) ∫_{-pi}^{pi} f = sum w_j f(omega_j)`.
fn half_circle_rule(m: usize) -> Result<Vec<(f64, f64)>> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(
            "quadrature points must be even and at least 2",
        ));
    }
    let half = m / 2;
    let step = 2.0 * PI / m as f64;
    Ok((0..=half)
        .map(|j| {
            let w = if j == 0 || j == half { 1.0 } else { 2.0 } / m as f64;
            (step * j as f64, w)
        })
        .collect())
}

fn eval_checked(tf: &RationalTF, omega: f64) -> Result<Complex64> {
    let d = tf.den().eval_freq(omega);
    let scale: f64 = tf.den().coeffs().iter().map(|c| c.abs()).sum();
    if d.norm() <= POLE_TOL * scale {
        return Err(Error::PoleOnGrid { omega });
    }
    Ok(tf.num().eval_freq(omega) / d)
}

/// `J_r = (1/2pi) ∫ |A GS - B S|^2 lambda_r` and
/// `J_e = (1/2pi) ∫ |A HS + B KHS|^2 lambda_e`, which equal
/// `|AG - B|^2 |S|^2 Phi_r` and `|A + KB|^2 |HS|^2 lambda_e` for a white
/// reference.
pub fn quadrature_cost(
    a: &Poly,
    b: &Poly,
    spec: &SystemSpec,
    m: usize,
) -> Result<CostDecomposition> {
    let cl = spec.closed_loop()?;
    let rule = half_circle_rule(m)?;
    let mut j_r = 0.0;
    let mut j_e = 0.0;
    for (omega, w) in rule {
        let av = a.eval_freq(omega);
        let bv = b.eval_freq(omega);
        let r_path = av * eval_checked(&cl.gs, omega)? - bv * eval_checked(&cl.s, omega)?;
        let e_path = av * eval_checked(&cl.hs, omega)? + bv * eval_checked(&cl.khs, omega)?;
        j_r += w * r_path.norm_sqr();
        j_e += w * e_path.norm_sqr();
    }
    j_r *= spec.lambda_r;
    j_e *= spec.lambda_e;
    Ok(CostDecomposition {
        j_r,
        j_e,
        j_total: j_r + j_e,
        quadrature_points: m,
    })
}

/// First `order + 1` impulse-response coefficients of `tf`. The denominator
/// must be stable so that the series converges.
pub fn power_series(tf: &RationalTF, order: usize) -> Result<Poly> {
    let roots = tf.den().roots()?;
    if !roots.all_stable() {
        return Err(Error::UnstableExpansion);
    }
    let num = tf.num();
    let den = tf.den().coeffs();
    let mut h = vec![0.0; order + 1];
    for k in 0..=order {
        let mut acc = num.coeff(k);
        for (j, &dj) in den.iter().enumerate().skip(1).take(k) {
            acc -= dj * h[k - j];
        }
        h[k] = acc / den[0];
    }
    Ok(Poly::new(h))
}

/// Minimizes the quadrature approximation of `(1/2pi) ∫ |X|^2 |Z|^2` over
/// `X = 1 + x_1 q^-1 + ... + x_m q^-m`. Returns the minimizer and the
/// attained cost, re-evaluated by quadrature at the minimizer.
pub fn monic_minimizer(z: &RationalTF, m: usize, points: usize) -> Result<(Poly, f64)> {
    if z.num().is_zero() {
        return Err(Error::UnstableZ);
    }
    if (z.num().coeff(0) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("Z must satisfy Z(infinity) = 1"));
    }
    let stable = |p: &Poly| -> Result<bool> { Ok(p.degree() == 0 || p.roots()?.all_stable()) };
    if !stable(z.den())? || !stable(z.num())? {
        return Err(Error::UnstableZ);
    }

    let rule = half_circle_rule(points)?;
    let weights: Vec<(f64, f64)> = rule
        .iter()
        .map(|&(omega, w)| Ok((omega, w * eval_checked(z, omega)?.norm_sqr())))
        .collect::<Result<_>>()?;

    // Weighted inner products <q^-k, q^-l> = sum w |Z|^2 cos((k - l) omega).
    let corr: Vec<f64> = (0..=m)
        .map(|d| {
            weights
                .iter()
                .map(|&(omega, w)| w * (d as f64 * omega).cos())
                .sum()
        })
        .collect();
    let x = if m == 0 {
        Vec::new()
    } else {
        let mut gram = vec![0.0; m * m];
        for k in 0..m {
            for l in 0..m {
                gram[k * m + l] = corr[(k as isize - l as isize).unsigned_abs()];
            }
        }
        let rhs: Vec<f64> = (1..=m).map(|k| -corr[k]).collect();
        cholesky_solve(&gram, m, &rhs)?
    };
    let mut coeffs = vec![1.0];
    coeffs.extend_from_slice(&x);
    let x_min = Poly::new(coeffs);
    let j_min = weights
        .iter()
        .map(|&(omega, w)| w * x_min.eval_freq(omega).norm_sqr())
        .sum();
    Ok((x_min, j_min))
}
