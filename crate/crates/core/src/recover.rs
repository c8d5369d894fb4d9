//! Plant, noise model and noise variance from a high-order ARX estimate.
//!
//! With an unstable plant the ARX denominator converges to
//! `A = (1/H) F_a / F_a*`, where `F_a` holds the anti-stable plant poles and
//! `F_a*` their reflections into the unit disc. The anti-stable roots of
//! `A` therefore identify `F_a`, and
//!
//! ```text
//! G = B / A,   H = (1/A) A_a / A_a*,   lambda_e = J / prod |p_k|^2.
//! ```
//!
//! Without the `A_a / A_a*` factor the noise model magnitude is too small by
//! `1/sqrt(gain)` at every frequency and the variance too large by `gain`.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::arx::ArxEstimate;
use crate::ltisys::{FreqGrid, RationalTF, SystemSpec};
use crate::oracle::power_series;
use crate::poly::{Poly, RootClass, RootSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredModel {
    pub g_hat: RationalTF,
    /// Corrected noise model, `1 / (A_s A_a*)`.
    pub h_hat: RationalTF,
    pub lambda_hat: f64,
    /// Anti-stable factor of the estimated `A`.
    pub a_anti: Poly,
    pub a_anti_mirror: Poly,
    /// `prod |p_k|^2` over the anti-stable roots.
    pub gain: f64,
    /// `1 / A`, the noise model without the all-pass correction.
    pub h_uncorrected: RationalTF,
    pub j_hat: f64,
    /// All roots of the estimated `A`.
    pub a_roots: RootSet,
}

impl RecoveredModel {
    pub fn anti_stable_roots(&self) -> Vec<Complex64> {
        self.a_roots.of_class(RootClass::AntiStable).collect()
    }
}

pub fn recover(est: &ArxEstimate) -> Result<RecoveredModel> {
    let a_roots = est.a.roots()?;
    a_roots.check_off_circle()?;
    let g_hat = RationalTF::new(est.b.clone(), est.a.clone())?;
    let h_uncorrected = RationalTF::new(Poly::one(), est.a.clone())?;

    let anti: Vec<Complex64> = a_roots.of_class(RootClass::AntiStable).collect();
    if anti.is_empty() {
        return Ok(RecoveredModel {
            g_hat,
            h_hat: h_uncorrected.clone(),
            lambda_hat: est.j_hat,
            a_anti: Poly::one(),
            a_anti_mirror: Poly::one(),
            gain: 1.0,
            h_uncorrected,
            j_hat: est.j_hat,
            a_roots,
        });
    }

    let a_anti = Poly::from_roots(&anti)?;
    let mirrored: Vec<Complex64> = anti.iter().map(|p| p.inv()).collect();
    let a_anti_mirror = Poly::from_roots(&mirrored)?;
    let gain: f64 = anti.iter().map(|p| p.norm_sqr()).product();

    // A_a cancels exactly in root space: the corrected denominator keeps the
    // stable roots of A and swaps each anti-stable root for its reflection.
    let den_roots: Vec<Complex64> = a_roots
        .of_class(RootClass::Stable)
        .chain(mirrored.iter().copied())
        .collect();
    let h_hat = RationalTF::new(Poly::one(), Poly::from_roots(&den_roots)?)?;

    Ok(RecoveredModel {
        g_hat,
        h_hat,
        lambda_hat: est.j_hat / gain,
        a_anti,
        a_anti_mirror,
        gain,
        h_uncorrected,
        j_hat: est.j_hat,
        a_roots,
    })
}

/// Asymptotic ARX minimizers for a known system.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimizers {
    /// `(Gamma D / C) F_a / F_a*`
    pub a_bar: RationalTF,
    /// `(D / C) L / (F_s F_a*)`
    pub b_bar: RationalTF,
    /// `gain(F_a) lambda_e`
    pub j_star: f64,
    pub f_s: Poly,
    pub f_a: Poly,
    pub f_a_mirror: Poly,
}

impl Minimizers {
    /// Power-series truncation of `(a_bar, b_bar)` at `order`, packaged as
    /// an estimate with cost `j_star`.
    pub fn truncated(&self, order: usize) -> Result<ArxEstimate> {
        let a = power_series(&self.a_bar, order)?;
        let b = power_series(&self.b_bar, order)?;
        ArxEstimate::from_polys(a, b, self.j_star)
    }
}

pub fn theoretical_minimizers(spec: &SystemSpec) -> Result<Minimizers> {
    if spec
        .c
        .roots()?
        .of_class(RootClass::AntiStable)
        .next()
        .is_some()
    {
        return Err(Error::InverselyUnstableH);
    }
    spec.validate()?;
    let (f_s, f_a) = spec.f.factor_stable_antistable()?;
    let f_a_mirror = f_a.mirror()?;
    let gain = f_a.allpass_gain()?;
    let c_fa_star = spec.c.mul(&f_a_mirror);
    Ok(Minimizers {
        a_bar: RationalTF::new(spec.gamma.mul(&spec.d).mul(&f_a), c_fa_star.clone())?,
        b_bar: RationalTF::new(spec.d.mul(&spec.l), c_fa_star.mul(&f_s))?,
        j_star: gain * spec.lambda_e,
        f_s,
        f_a,
        f_a_mirror,
    })
}

/// Frequency responses of the true and recovered models on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    pub omegas: Vec<f64>,
    pub g_true: Vec<Complex64>,
    pub g_hat: Vec<Complex64>,
    pub h_true: Vec<Complex64>,
    pub h_hat: Vec<Complex64>,
    pub h_uncorrected: Vec<Complex64>,
}

pub fn db(x: Complex64) -> f64 {
    20.0 * x.norm().log10()
}

pub fn phase_deg(x: Complex64) -> f64 {
    x.arg().to_degrees()
}

fn wrap_deg(d: f64) -> f64 {
    let mut d = d % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d < -180.0 {
        d += 360.0;
    }
    d
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |m, v| m.max(v.abs()))
}

impl ModelComparison {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn mag_error_db_g(&self) -> Vec<f64> {
        self.g_hat
            .iter()
            .zip(&self.g_true)
            .map(|(a, b)| db(*a) - db(*b))
            .collect()
    }

    pub fn mag_error_db_h(&self) -> Vec<f64> {
        self.h_hat
            .iter()
            .zip(&self.h_true)
            .map(|(a, b)| db(*a) - db(*b))
            .collect()
    }

    pub fn phase_error_deg_g(&self) -> Vec<f64> {
        self.g_hat
            .iter()
            .zip(&self.g_true)
            .map(|(a, b)| wrap_deg(phase_deg(*a / *b)))
            .collect()
    }

    pub fn phase_error_deg_h(&self) -> Vec<f64> {
        self.h_hat
            .iter()
            .zip(&self.h_true)
            .map(|(a, b)| wrap_deg(phase_deg(*a / *b)))
            .collect()
    }

    pub fn max_mag_error_db_g(&self) -> f64 {
        max_abs(self.mag_error_db_g().into_iter())
    }

    pub fn max_mag_error_db_h(&self) -> f64 {
        max_abs(self.mag_error_db_h().into_iter())
    }

    pub fn max_phase_error_deg_g(&self) -> f64 {
        max_abs(self.phase_error_deg_g().into_iter())
    }

    pub fn max_phase_error_deg_h(&self) -> f64 {
        max_abs(self.phase_error_deg_h().into_iter())
    }

    /// `|H_uncorrected| / |H|` per frequency.
    pub fn uncorrected_ratio(&self) -> Vec<f64> {
        self.h_uncorrected
            .iter()
            .zip(&self.h_true)
            .map(|(a, b)| a.norm() / b.norm())
            .collect()
    }
}

pub fn compare_models(
    rec: &RecoveredModel,
    spec: &SystemSpec,
    grid: &FreqGrid,
) -> Result<ModelComparison> {
    Ok(ModelComparison {
        omegas: grid.omegas().to_vec(),
        g_true: spec.g().freq_response(grid)?,
        g_hat: rec.g_hat.freq_response(grid)?,
        h_true: spec.h().freq_response(grid)?,
        h_hat: rec.h_hat.freq_response(grid)?,
        h_uncorrected: rec.h_uncorrected.freq_response(grid)?,
    })
}
