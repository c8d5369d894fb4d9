//! Rational transfer functions in `q^-1`, the Box-Jenkins system under
//! feedback, and frequency response.
//!
//! The data-generating system is
//!
//! ```text
//! y_t = G(q) u_t + H(q) e_t,   G = L / (Gamma F),   H = C / (Gamma D)
//! u_t = r_t - K(q) y_t
//! ```
//!
//! which in closed loop gives `y = GS r + HS e` and `u = S r - KHS e` with
//! `S = 1 / (1 + KG)`. Nothing here ever cancels poles against zeros.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::poly::{Poly, EPS_CLUSTER};
use crate::{Error, Result};

/// Relative size below which a denominator evaluated on the unit circle is
/// treated as a pole on the grid.
const POLE_ON_GRID_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalTF {
    num: Poly,
    den: Poly,
}

impl RationalTF {
    /// Normalizes the denominator to be monic, folding the scale into the
    /// numerator.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let d0 = den.coeff(0);
        if d0 == 0.0 {
            return Err(Error::Improper);
        }
        if d0 == 1.0 {
            return Ok(RationalTF { num, den });
        }
        Ok(RationalTF {
            num: num.scale(1.0 / d0),
            den: den.scale(1.0 / d0),
        })
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalTF {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RationalTF::from_poly(Poly::one())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// Series connection; numerators and denominators are multiplied
    /// without cancellation.
    pub fn mul(&self, other: &RationalTF) -> RationalTF {
        RationalTF {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    /// All denominator roots strictly inside the unit circle. A root in the
    /// unit-circle band makes stability indeterminate and is reported as an
    /// error.
    pub fn is_stable(&self) -> Result<bool> {
        let roots = self.den.roots()?;
        roots.check_off_circle()?;
        Ok(roots.all_stable())
    }

    pub fn eval_freq(&self, omega: f64) -> Result<Complex64> {
        let d = self.den.eval_freq(omega);
        let scale = self.den.coeffs().iter().map(|c| c.abs()).sum::<f64>();
        if d.norm() <= POLE_ON_GRID_TOL * scale {
            return Err(Error::PoleOnGrid { omega });
        }
        Ok(self.num.eval_freq(omega) / d)
    }

    pub fn freq_response(&self, grid: &FreqGrid) -> Result<Vec<Complex64>> {
        grid.omegas().iter().map(|&w| self.eval_freq(w)).collect()
    }
}

/// Sensitivity `S = 1 / (1 + K G)` as
/// `den(G) den(K) / (den(G) den(K) + num(K) num(G))`, normalized monic.
pub fn sensitivity(g: &RationalTF, k: &RationalTF) -> Result<RationalTF> {
    let open = g.den.mul(&k.den);
    let char_poly = open.add(&k.num.mul(&g.num));
    if char_poly.coeff(0).abs() <= f64::EPSILON * open.coeff(0).abs() {
        return Err(Error::AlgebraicLoop);
    }
    RationalTF::new(open, char_poly)
}

/// Strictly increasing radian frequencies in `(0, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqGrid {
    omegas: Vec<f64>,
}

impl FreqGrid {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidGrid("empty"));
        }
        if omegas
            .iter()
            .any(|&w| !(w > 0.0 && w <= core::f64::consts::PI))
        {
            return Err(Error::InvalidGrid("frequencies must lie in (0, pi]"));
        }
        if omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "frequencies must be strictly increasing",
            ));
        }
        Ok(FreqGrid { omegas })
    }

    pub fn log_spaced(omega_min: f64, omega_max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(omega_min > 0.0 && omega_max > omega_min) {
            return Err(Error::InvalidGrid(
                "need points >= 2 and 0 < omega_min < omega_max",
            ));
        }
        let (lo, hi) = (omega_min.ln(), omega_max.ln());
        let step = (hi - lo) / (points - 1) as f64;
        let mut omegas: Vec<f64> = (0..points).map(|k| (lo + step * k as f64).exp()).collect();
        omegas[0] = omega_min;
        omegas[points - 1] = omega_max;
        FreqGrid::new(omegas)
    }

    pub fn linear(omega_min: f64, omega_max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(omega_min > 0.0 && omega_max > omega_min) {
            return Err(Error::InvalidGrid(
                "need points >= 2 and 0 < omega_min < omega_max",
            ));
        }
        let step = (omega_max - omega_min) / (points - 1) as f64;
        let mut omegas: Vec<f64> = (0..points).map(|k| omega_min + step * k as f64).collect();
        omegas[points - 1] = omega_max;
        FreqGrid::new(omegas)
    }

    /// 200 log-spaced points over `[1e-2, pi]`.
    pub fn default_bode() -> Self {
        FreqGrid::log_spaced(1e-2, core::f64::consts::PI, 200).expect("valid default grid")
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// The true system: polynomials `L, Gamma, F, C, D`, a controller `K`, the
/// innovation variance and the (white) reference variance.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub l: Poly,
    pub gamma: Poly,
    pub f: Poly,
    pub c: Poly,
    pub d: Poly,
    pub k: RationalTF,
    pub lambda_e: f64,
    pub lambda_r: f64,
}

impl SystemSpec {
    /// Unstable benchmark plant with a pair of poles at `1 ± i`:
    /// `G = (q^-1 - 1.7 q^-2) / (1 - 2 q^-1 + 2 q^-2)`,
    /// `H = (1 + 0.2 q^-1) / (1 - 0.9 q^-1)`, `K = 1`, unit variances.
    pub fn benchmark() -> Self {
        SystemSpec {
            l: Poly::new(alloc::vec![0.0, 1.0, -1.7]),
            gamma: Poly::one(),
            f: Poly::new(alloc::vec![1.0, -2.0, 2.0]),
            c: Poly::new(alloc::vec![1.0, 0.2]),
            d: Poly::new(alloc::vec![1.0, -0.9]),
            k: RationalTF::one(),
            lambda_e: 1.0,
            lambda_r: 1.0,
        }
    }

    /// Checks the standing assumptions: monic `Gamma, F, C, D`; stable `C, D`;
    /// no unit-circle root in `F`; `F` and `D` coprime; nonnegative variances.
    pub fn validate(&self) -> Result<()> {
        for (p, name) in [
            (&self.gamma, "Gamma must be monic"),
            (&self.f, "F must be monic"),
            (&self.c, "C must be monic"),
            (&self.d, "D must be monic"),
        ] {
            if !p.is_monic() {
                return Err(Error::InvalidSpec(name));
            }
        }
        if !(self.lambda_e >= 0.0 && self.lambda_r >= 0.0) {
            return Err(Error::InvalidSpec("variances must be nonnegative"));
        }
        if !self.c.roots()?.all_stable() {
            return Err(Error::InvalidSpec("C must be stable"));
        }
        let d_roots = self.d.roots()?;
        if !d_roots.all_stable() {
            return Err(Error::InvalidSpec("D must be stable"));
        }
        let f_roots = self.f.roots()?;
        f_roots.check_off_circle()?;
        for p in f_roots.expanded() {
            if d_roots.expanded().any(|q| (p - q).norm() < EPS_CLUSTER) {
                return Err(Error::InvalidSpec("F and D share a root"));
            }
        }
        Ok(())
    }

    pub fn g(&self) -> RationalTF {
        RationalTF {
            num: self.l.clone(),
            den: self.gamma.mul(&self.f),
        }
    }

    pub fn h(&self) -> RationalTF {
        RationalTF {
            num: self.c.clone(),
            den: self.gamma.mul(&self.d),
        }
    }

    pub fn closed_loop(&self) -> Result<ClosedLoop> {
        ClosedLoop::from_spec(self)
    }
}

/// The four closed-loop maps built directly from the system polynomials, so
/// that the open-loop poles of `G` (and `Gamma`) never appear uncancelled in
/// a denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop {
    /// `S = 1 / (1 + KG)`
    pub s: RationalTF,
    /// `G S`, reference to output.
    pub gs: RationalTF,
    /// `H S`, innovation to output.
    pub hs: RationalTF,
    /// `K H S`, innovation to input (enters with a minus sign).
    pub khs: RationalTF,
}

impl ClosedLoop {
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        let (kn, kd) = (&spec.k.num, &spec.k.den);
        let gamma_f = spec.gamma.mul(&spec.f);
        let char_poly = gamma_f.mul(kd).add(&kn.mul(&spec.l));
        let c0 = char_poly.coeff(0);
        if c0.abs() <= f64::EPSILON * kd.coeff(0).abs() {
            return Err(Error::AlgebraicLoop);
        }
        let char_poly = char_poly.scale(1.0 / c0);
        let inv = 1.0 / c0;
        let cf = spec.c.mul(&spec.f);
        let d_char = spec.d.mul(&char_poly);
        Ok(ClosedLoop {
            s: RationalTF {
                num: gamma_f.mul(kd).scale(inv),
                den: char_poly.clone(),
            },
            gs: RationalTF {
                num: spec.l.mul(kd).scale(inv),
                den: char_poly.clone(),
            },
            hs: RationalTF {
                num: cf.mul(kd).scale(inv),
                den: d_char.clone(),
            },
            khs: RationalTF {
                num: kn.mul(&cf).scale(inv),
                den: d_char,
            },
        })
    }

    pub fn paths(&self) -> [(&'static str, &RationalTF); 4] {
        [
            ("GS", &self.gs),
            ("HS", &self.hs),
            ("S", &self.s),
            ("KHS", &self.khs),
        ]
    }

    /// Fails naming the first unstable path.
    pub fn check_stable(&self) -> Result<()> {
        for (name, tf) in self.paths() {
            match tf.is_stable() {
                Ok(true) => {}
                Ok(false) | Err(Error::RootOnUnitCircle { .. }) => {
                    return Err(Error::UnstableClosedLoop { path: name })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: &Poly, b: &[f64], tol: f64) -> bool {
        a.coeffs().len() == b.len() && a.coeffs().iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn benchmark_plant_and_noise_model() {
        let spec = SystemSpec::benchmark();
        spec.validate().unwrap();
        let g = spec.g();
        assert_eq!(g.num().coeffs(), &[0.0, 1.0, -1.7]);
        assert_eq!(g.den().coeffs(), &[1.0, -2.0, 2.0]);
        let h = spec.h();
        assert_eq!(h.num().coeffs(), &[1.0, 0.2]);
        assert_eq!(h.den().coeffs(), &[1.0, -0.9]);
    }

    #[test]
    fn output_error_like_noise_model() {
        let mut spec = SystemSpec::benchmark();
        spec.d = spec.c.clone();
        let h = spec.h();
        assert_eq!(h.num(), h.den());
    }

    #[test]
    fn sensitivity_of_benchmark_with_unit_gain() {
        let spec = SystemSpec::benchmark();
        let s = sensitivity(&spec.g(), &spec.k).unwrap();
        assert!(close(s.num(), &[1.0, -2.0, 2.0], 1e-15));
        assert!(close(s.den(), &[1.0, -1.0, 0.3], 1e-15));
        let roots: Vec<_> = s.den().roots().unwrap().expanded().collect();
        for r in &roots {
            assert!((r.re - 0.5).abs() < 1e-12);
            assert!((r.im.abs() - 0.05f64.sqrt()).abs() < 1e-12);
            assert!((r.norm() - 0.3f64.sqrt()).abs() < 1e-12);
        }
        assert!(s.is_stable().unwrap());
    }

    #[test]
    fn sensitivity_trivial_cases() {
        let g = SystemSpec::benchmark().g();
        let zero = RationalTF::from_poly(Poly::zero());
        let s = sensitivity(&g, &zero).unwrap();
        assert_eq!(s.num(), s.den());
        let s = sensitivity(&zero, &RationalTF::one()).unwrap();
        assert_eq!(s, RationalTF::one());
    }

    #[test]
    fn algebraic_loop_detected() {
        // G = 1 (no delay), K = -1: 1 + KG = 0 at infinity.
        let g = RationalTF::one();
        let k = RationalTF::from_poly(Poly::constant(-1.0));
        assert_eq!(sensitivity(&g, &k), Err(Error::AlgebraicLoop));
    }

    #[test]
    fn stability_predicate() {
        let tf = RationalTF::new(Poly::one(), Poly::new(vec![1.0, -0.9])).unwrap();
        assert!(tf.is_stable().unwrap());
        let tf = RationalTF::new(Poly::one(), Poly::new(vec![1.0, -2.0, 2.0])).unwrap();
        assert!(!tf.is_stable().unwrap());
        let tf = RationalTF::new(Poly::one(), Poly::new(vec![1.0, -1.0])).unwrap();
        assert!(matches!(
            tf.is_stable(),
            Err(Error::RootOnUnitCircle { .. })
        ));
    }

    #[test]
    fn benchmark_closed_loop_is_stable_and_plant_is_not() {
        let spec = SystemSpec::benchmark();
        assert!(!spec.g().is_stable().unwrap());
        let cl = spec.closed_loop().unwrap();
        assert!(cl.gs.is_stable().unwrap());
        assert!(cl.hs.is_stable().unwrap());
        cl.check_stable().unwrap();
        assert!(close(cl.gs.num(), &[0.0, 1.0, -1.7], 0.0));
        assert!(close(cl.gs.den(), &[1.0, -1.0, 0.3], 1e-15));
    }

    #[test]
    fn non_stabilizing_controller_is_named() {
        let mut spec = SystemSpec::benchmark();
        spec.k = RationalTF::from_poly(Poly::zero());
        let cl = spec.closed_loop().unwrap();
        assert_eq!(
            cl.check_stable(),
            Err(Error::UnstableClosedLoop { path: "GS" })
        );
    }

    #[test]
    fn frequency_response_examples() {
        let h = SystemSpec::benchmark().h();
        let v = h.eval_freq(1e-9).unwrap();
        assert!((v.norm() - 12.0).abs() < 1e-6);
        let one = RationalTF::one().eval_freq(0.7).unwrap();
        assert_eq!(one, Complex64::new(1.0, 0.0));
        let fa = Poly::new(vec![1.0, -2.0, 2.0]);
        let ap = RationalTF::new(fa.clone(), fa.mirror().unwrap()).unwrap();
        for w in [0.01, 0.5, 1.0, 2.0, 3.0] {
            assert!((ap.eval_freq(w).unwrap().norm() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pole_on_grid() {
        let tf = RationalTF::new(Poly::one(), Poly::new(vec![1.0, 1.0])).unwrap();
        let grid = FreqGrid::new(vec![0.5, core::f64::consts::PI]).unwrap();
        assert!(matches!(
            tf.freq_response(&grid),
            Err(Error::PoleOnGrid { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(FreqGrid::new(vec![0.0, 1.0]).is_err());
        assert!(FreqGrid::new(vec![1.0, 1.0]).is_err());
        assert!(FreqGrid::new(vec![1.0, 4.0]).is_err());
        let g = FreqGrid::default_bode();
        assert_eq!(g.len(), 200);
        assert_eq!(g.omegas()[0], 1e-2);
        assert_eq!(g.omegas()[199], core::f64::consts::PI);
    }

    #[test]
    fn spec_validation() {
        let mut spec = SystemSpec::benchmark();
        spec.c = Poly::new(vec![1.0, 1.5]);
        assert!(spec.validate().is_err());
        let mut spec = SystemSpec::benchmark();
        spec.f = Poly::new(vec![1.0, -0.9]);
        assert_eq!(
            spec.validate(),
            Err(Error::InvalidSpec("F and D share a root"))
        );
        let mut spec = SystemSpec::benchmark();
        spec.f = Poly::new(vec![1.0, 1.0]);
        assert!(matches!(
            spec.validate(),
            Err(Error::RootOnUnitCircle { .. })
        ));
    }
}
