//! Real polynomials in the delay operator `q^-1`.
//!
//! A [`Poly`] stores `[c_0, c_1, ..., c_n]` for `c_0 + c_1 q^-1 + ... + c_n q^-n`.
//! Roots are always reported in the `z` variable, i.e. as zeros of
//! `z^n P(z^-1)`, so a factor `1 - p q^-1` contributes the root `p` and
//! stability means `|p| < 1`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::eigen;
use crate::{Error, Result};

/// Half-width of the band around the unit circle treated as "on the circle".
pub const EPS_UNIT_CIRCLE: f64 = 1e-6;
/// Absolute tolerance for conjugate pairing and imaginary-residue truncation.
pub const EPS_CONJ: f64 = 1e-8;
/// Relative tolerance for re-expansion checks.
pub const EPS_RECON: f64 = 1e-6;
/// Eigenvalues closer than this are merged into one root with multiplicity.
pub const EPS_CLUSTER: f64 = 1e-6;

#[derive(Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial from coefficients, lowest delay first. Trailing
    /// zeros are trimmed; an empty or all-zero list is the zero polynomial.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![1.0] }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `q^-k`.
    pub fn delay(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Poly { coeffs: c }
    }

    /// Monic polynomial `prod (1 - p q^-1)` over `roots` (multiplicity is
    /// repetition). Complex roots must come in conjugate pairs; each pair is
    /// expanded as a real quadratic factor so the result is real by
    /// construction. A complex root without a partner within [`EPS_CONJ`]
    /// is an error.
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        let mut used = vec![false; roots.len()];
        let mut out = Poly::one();
        for i in 0..roots.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let p = roots[i];
            if p.im.abs() <= EPS_CONJ {
                out = out.mul(&Poly::new(vec![1.0, -p.re]));
                continue;
            }
            let partner = (i + 1..roots.len())
                .filter(|&j| !used[j])
                .map(|j| (j, (roots[j] - p.conj()).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            match partner {
                Some((j, d)) if d <= EPS_CONJ.max(EPS_CONJ * p.norm()) => {
                    used[j] = true;
                    let re = 0.5 * (p.re + roots[j].re);
                    let mod2 = re * re + (0.5 * (p.im - roots[j].im)).powi(2);
                    out = out.mul(&Poly::new(vec![1.0, -2.0 * re, mod2]));
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "complex root without a conjugate partner",
                    ))
                }
            }
        }
        Ok(out)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `q^-k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs[0] == 1.0
    }

    /// Index of the first nonzero coefficient (the structural delay).
    pub fn leading_delay(&self) -> usize {
        self.coeffs.iter().position(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn last_coeff(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeff(k) + other.coeff(k))
                .collect::<Vec<_>>(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeff(k) - other.coeff(k))
                .collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    /// Evaluates at `q^-1 = x`.
    pub fn eval_delay(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Evaluates on the unit circle, `z = e^{i omega}`.
    pub fn eval_freq(&self, omega: f64) -> Complex64 {
        self.eval_delay(Complex64::from_polar(1.0, -omega))
    }

    /// Evaluates `z^n P(z^-1)` at `z`, i.e. the polynomial whose zeros are
    /// the roots reported by [`Poly::roots`].
    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn eval_z_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        self.coeffs
            .iter()
            .fold((zero, zero), |(p, dp), &c| (p * z + c, dp * z + p))
    }

    /// Roots in the `z` variable, clustered into multiplicities and
    /// classified against the unit circle.
    pub fn roots(&self) -> Result<RootSet> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let k0 = self.leading_delay();
        let lead = self.coeffs[k0];
        let tail: Vec<f64> = self.coeffs[k0 + 1..].iter().map(|c| c / lead).collect();
        let mut raw = eigen::monic_roots(&tail)?;
        let reduced = Poly::new(self.coeffs[k0..].to_vec());
        let mut polished: Vec<Complex64> = raw.iter().map(|&r| reduced.polish(r)).collect();
        symmetrize(&mut raw);
        symmetrize(&mut polished);
        // Newton on each root of a tight cluster separately can undo the
        // error cancellation the eigensolver gets across the cluster.
        let monic = Poly::new(
            core::iter::once(1.0)
                .chain(tail.iter().copied())
                .collect::<Vec<_>>(),
        );
        let roots = match (
            expansion_gap(&monic, &polished),
            expansion_gap(&monic, &raw),
        ) {
            (Some(p), Some(r)) if r < p => raw,
            (None, Some(_)) => raw,
            _ => polished,
        };
        Ok(RootSet::cluster(roots))
    }

    /// A few Newton steps on `z^n P(z^-1)`, kept only while they reduce the
    /// residual.
    fn polish(&self, z0: Complex64) -> Complex64 {
        let mut z = z0;
        let (mut pz, mut dpz) = self.eval_z_with_derivative(z);
        for _ in 0..4 {
            if pz.norm() == 0.0 || dpz.norm() == 0.0 {
                break;
            }
            let step = pz / dpz;
            if step.norm() > 1e-3 * (1.0 + z.norm()) {
                break;
            }
            let cand = z - step;
            let (pc, dpc) = self.eval_z_with_derivative(cand);
            if pc.norm() >= pz.norm() {
                break;
            }
            z = cand;
            pz = pc;
            dpz = dpc;
        }
        z
    }

    /// Splits a monic polynomial into `(f_s, f_a)` with `f = f_s * f_a`, where
    /// `f_s` carries the stable roots and `f_a` the anti-stable ones.
    pub fn factor_stable_antistable(&self) -> Result<(Poly, Poly)> {
        if !self.is_monic() {
            return Err(Error::NotMonic(self.coeffs[0]));
        }
        let roots = self.roots()?;
        roots.check_off_circle()?;
        let (stable, anti): (Vec<_>, Vec<_>) = roots
            .expanded()
            .partition(|r| RootClass::of(*r) == RootClass::Stable);
        if anti.is_empty() {
            return Ok((self.clone(), Poly::one()));
        }
        if stable.is_empty() {
            return Ok((Poly::one(), self.clone()));
        }
        Ok((Poly::from_roots(&stable)?, Poly::from_roots(&anti)?))
    }

    /// The anti-stable polynomial's roots reflected into the unit disc:
    /// `prod (1 - p_k^-1 q^-1)`.
    pub fn mirror(&self) -> Result<Poly> {
        if !self.is_monic() {
            return Err(Error::NotMonic(self.coeffs[0]));
        }
        let roots = self.roots()?;
        if !roots.all_anti_stable() {
            return Err(Error::NotAntiStable);
        }
        let inv: Vec<Complex64> = roots.expanded().map(|p| p.inv()).collect();
        Poly::from_roots(&inv)
    }

    /// Squared magnitude of the all-pass ratio `f_a / mirror(f_a)`, which is
    /// `prod |p_k|^2`. For a monic polynomial of full degree the product of
    /// the roots is `(-1)^n c_n`, so this is `c_n^2`.
    pub fn allpass_gain(&self) -> Result<f64> {
        if !self.is_monic() {
            return Err(Error::NotMonic(self.coeffs[0]));
        }
        let roots = self.roots()?;
        if !roots.all_anti_stable() {
            return Err(Error::NotAntiStable);
        }
        if self.degree() == 0 {
            return Ok(1.0);
        }
        let c = self.last_coeff();
        Ok(c * c)
    }
}

/// Largest coefficient difference between `monic` and the expansion of
/// `roots`; `None` when the roots do not pair up.
fn expansion_gap(monic: &Poly, roots: &[Complex64]) -> Option<f64> {
    let back = Poly::from_roots(roots).ok()?;
    let n = monic.coeffs.len().max(back.coeffs.len());
    Some(
        (0..n)
            .map(|k| (monic.coeff(k) - back.coeff(k)).abs())
            .fold(0.0, f64::max),
    )
}

/// Forces exact conjugate symmetry on a root list from a real polynomial:
/// near-real roots become real, and complex roots are paired with their
/// nearest conjugate.
fn symmetrize(roots: &mut [Complex64]) {
    for r in roots.iter_mut() {
        if r.im.abs() <= EPS_CONJ * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
    let n = roots.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] || roots[i].im <= 0.0 {
            continue;
        }
        let target = roots[i].conj();
        let partner = (0..n)
            .filter(|&j| !done[j] && j != i && roots[j].im < 0.0)
            .min_by(|&a, &b| {
                (roots[a] - target)
                    .norm()
                    .partial_cmp(&(roots[b] - target).norm())
                    .unwrap()
            });
        if let Some(j) = partner {
            let re = 0.5 * (roots[i].re + roots[j].re);
            let im = 0.5 * (roots[i].im - roots[j].im);
            roots[i] = Complex64::new(re, im);
            roots[j] = Complex64::new(re, -im);
            done[i] = true;
            done[j] = true;
        }
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

/// Renders as `1 - 2 q^-1 + 2 q^-2`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mag = c.abs();
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match (k, mag == 1.0) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => write!(f, "q^-{k}")?,
                (_, false) => write!(f, "{mag} q^-{k}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootClass {
    Stable,
    AntiStable,
    OnCircle,
}

impl RootClass {
    pub fn of(p: Complex64) -> Self {
        let m = p.norm();
        if m < 1.0 - EPS_UNIT_CIRCLE {
            RootClass::Stable
        } else if m > 1.0 + EPS_UNIT_CIRCLE {
            RootClass::AntiStable
        } else {
            RootClass::OnCircle
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RootClass::Stable => "stable",
            RootClass::AntiStable => "antistable",
            RootClass::OnCircle => "oncircle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    pub class: RootClass,
}

/// Distinct roots with multiplicities, closed under conjugation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    roots: Vec<Root>,
}

impl RootSet {
    fn cluster(raw: Vec<Complex64>) -> Self {
        let mut roots: Vec<(Complex64, usize)> = Vec::new();
        for p in raw {
            match roots
                .iter_mut()
                .find(|(c, _)| (*c - p).norm() <= EPS_CLUSTER)
            {
                Some((c, m)) => {
                    *c = (*c * *m as f64 + p) / (*m as f64 + 1.0);
                    *m += 1;
                }
                None => roots.push((p, 1)),
            }
        }
        RootSet {
            roots: roots
                .into_iter()
                .map(|(value, multiplicity)| Root {
                    value,
                    multiplicity,
                    class: RootClass::of(value),
                })
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter()
    }

    /// Every root repeated by its multiplicity.
    pub fn expanded(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.roots
            .iter()
            .flat_map(|r| core::iter::repeat_n(r.value, r.multiplicity))
    }

    /// Number of roots counting multiplicity.
    pub fn len(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn of_class(&self, class: RootClass) -> impl Iterator<Item = Complex64> + '_ {
        self.roots
            .iter()
            .filter(move |r| r.class == class)
            .flat_map(|r| core::iter::repeat_n(r.value, r.multiplicity))
    }

    pub fn all_stable(&self) -> bool {
        self.roots.iter().all(|r| r.class == RootClass::Stable)
    }

    pub fn all_anti_stable(&self) -> bool {
        self.roots.iter().all(|r| r.class == RootClass::AntiStable)
    }

    /// Fails with the first root inside the unit-circle band.
    pub fn check_off_circle(&self) -> Result<()> {
        match self.roots.iter().find(|r| r.class == RootClass::OnCircle) {
            Some(r) => Err(Error::RootOnUnitCircle {
                re: r.value.re,
                im: r.value.im,
            }),
            None => Ok(()),
        }
    }

    pub fn to_poly(&self) -> Result<Poly> {
        Poly::from_roots(&self.expanded().collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_coeffs(p: &Poly, expected: &[f64], tol: f64) {
        assert_eq!(p.coeffs().len(), expected.len(), "{p} vs {expected:?}");
        for (a, b) in p.coeffs().iter().zip(expected) {
            assert!((a - b).abs() <= tol, "{p} vs {expected:?}");
        }
    }

    #[test]
    fn trims_trailing_zeros() {
        assert_eq!(Poly::new(vec![1.0, 2.0, 0.0, 0.0]).coeffs(), &[1.0, 2.0]);
        assert!(Poly::new(Vec::new()).is_zero());
        assert!(Poly::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn roots_of_unstable_benchmark_denominator() {
        let rs = Poly::new(vec![1.0, -2.0, 2.0]).roots().unwrap();
        assert_eq!(rs.len(), 2);
        let mut v: Vec<_> = rs.expanded().collect();
        v.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((v[0] - c(1.0, -1.0)).norm() < 1e-12);
        assert!((v[1] - c(1.0, 1.0)).norm() < 1e-12);
        assert!(rs.all_anti_stable());
    }

    #[test]
    fn tight_cluster_still_reexpands() {
        let p = Poly::from_roots(&[
            c(-0.2, 0.0),
            c(-1.4848129477287324, 0.0),
            c(-0.8626354239134266, 0.9941233202291203),
            c(-0.8626354239134266, -0.9941233202291203),
            c(-1.6398445361588048, 0.0),
            c(-0.06042218206565399, 0.19065455650055932),
            c(-0.06042218206565399, -0.19065455650055932),
            c(-1.6357031241172892, 0.0),
            c(-0.9945035234145975, 1.1861590079208575),
            c(-0.9945035234145975, -1.1861590079208575),
            c(-1.1846873555245305, 0.0),
            c(-0.5180829428485935, 0.2890015051605584),
            c(-0.5180829428485935, -0.2890015051605584),
            c(-0.723398352804505, 0.0),
            c(-1.6349530753390504, 0.08442648981153118),
            c(-1.6349530753390504, -0.08442648981153118),
        ])
        .unwrap();
        let back = p.roots().unwrap().to_poly().unwrap();
        let scale = p.coeffs().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for k in 0..=p.degree() {
            assert!(
                (p.coeff(k) - back.coeff(k)).abs() <= 1e-9 * scale,
                "{p} vs {back}"
            );
        }
    }

    #[test]
    fn roots_trivial_cases() {
        assert!(Poly::one().roots().unwrap().is_empty());
        let rs = Poly::new(vec![1.0, -0.9]).roots().unwrap();
        let v: Vec<_> = rs.expanded().collect();
        assert_eq!(v.len(), 1);
        assert!((v[0] - c(0.9, 0.0)).norm() < 1e-15);
        assert_eq!(Poly::zero().roots(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn roots_skip_leading_delay() {
        // q^-1 - 1.7 q^-2 has one root, 1.7
        let rs = Poly::new(vec![0.0, 1.0, -1.7]).roots().unwrap();
        let v: Vec<_> = rs.expanded().collect();
        assert_eq!(v.len(), 1);
        assert!((v[0] - c(1.7, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn repeated_root_is_clustered() {
        let p = Poly::new(vec![1.0, -1.0, 0.25]); // (1 - 0.5 q^-1)^2
        let rs = p.roots().unwrap();
        assert_eq!(rs.iter().count(), 1);
        let r = rs.iter().next().unwrap();
        assert_eq!(r.multiplicity, 2);
        assert!((r.value - c(0.5, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn factorization_examples() {
        let f = Poly::new(vec![1.0, -2.0, 2.0]);
        let (fs, fa) = f.factor_stable_antistable().unwrap();
        assert_eq!(fs, Poly::one());
        assert_eq!(fa, f);

        let f = Poly::new(vec![1.0, -0.9]);
        let (fs, fa) = f.factor_stable_antistable().unwrap();
        assert_eq!(fs, f);
        assert_eq!(fa, Poly::one());

        // (1 - 0.5 q^-1)(1 - 2 q^-1), expanded by hand.
        let f = Poly::new(vec![1.0, -2.5, 1.0]);
        let (fs, fa) = f.factor_stable_antistable().unwrap();
        assert_coeffs(&fs, &[1.0, -0.5], 1e-12);
        assert_coeffs(&fa, &[1.0, -2.0], 1e-12);
    }

    #[test]
    fn factorization_rejects_unit_circle_root() {
        let f = Poly::new(vec![1.0, -1.0]);
        assert!(matches!(
            f.factor_stable_antistable(),
            Err(Error::RootOnUnitCircle { .. })
        ));
        let f = Poly::new(vec![2.0, -1.0]);
        assert!(matches!(
            f.factor_stable_antistable(),
            Err(Error::NotMonic(_))
        ));
    }

    #[test]
    fn mirror_examples() {
        assert_coeffs(
            &Poly::new(vec![1.0, -2.0]).mirror().unwrap(),
            &[1.0, -0.5],
            1e-15,
        );
        // (1 - (1-i)/2 q^-1)(1 - (1+i)/2 q^-1) = 1 - q^-1 + 0.5 q^-2
        assert_coeffs(
            &Poly::new(vec![1.0, -2.0, 2.0]).mirror().unwrap(),
            &[1.0, -1.0, 0.5],
            1e-14,
        );
        assert_eq!(Poly::one().mirror().unwrap(), Poly::one());
        assert_eq!(
            Poly::new(vec![1.0, -0.5]).mirror(),
            Err(Error::NotAntiStable)
        );
    }

    #[test]
    fn allpass_gain_examples() {
        assert_eq!(Poly::new(vec![1.0, -2.0, 2.0]).allpass_gain().unwrap(), 4.0);
        assert_eq!(Poly::one().allpass_gain().unwrap(), 1.0);
        assert_eq!(Poly::new(vec![1.0, -2.0]).allpass_gain().unwrap(), 4.0);
        assert_eq!(
            Poly::new(vec![1.0, -0.5]).allpass_gain(),
            Err(Error::NotAntiStable)
        );
    }

    #[test]
    fn allpass_magnitude_matches_gain() {
        let fa = Poly::new(vec![1.0, -2.0, 2.0]);
        let m = fa.mirror().unwrap();
        for k in 0..16 {
            let w = -3.0 + 0.4 * k as f64;
            let ratio = (fa.eval_freq(w) / m.eval_freq(w)).norm();
            assert!((ratio - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplication_and_addition() {
        let p = Poly::new(vec![1.0, -0.5]).mul(&Poly::new(vec![1.0, -2.0]));
        assert_coeffs(&p, &[1.0, -2.5, 1.0], 0.0);
        assert_eq!(p.mul(&Poly::one()), p);
        assert_eq!(p.add(&Poly::zero()), p);
        assert!(p.mul(&Poly::zero()).is_zero());
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn display_format() {
        extern crate std;
        use std::string::ToString;
        assert_eq!(
            Poly::new(vec![1.0, -2.0, 2.0]).to_string(),
            "1 - 2 q^-1 + 2 q^-2"
        );
        assert_eq!(
            Poly::new(vec![0.0, 1.0, -1.7]).to_string(),
            "q^-1 - 1.7 q^-2"
        );
        assert_eq!(Poly::new(vec![-0.5]).to_string(), "-0.5");
        assert_eq!(Poly::zero().to_string(), "0");
    }
}
