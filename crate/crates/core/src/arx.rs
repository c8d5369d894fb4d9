//! Least-squares ARX estimation, `A(q) y_t = B(q) u_t + e_t` with
//! `A = 1 + a_1 q^-1 + ... + a_na q^-na` and `B = b_1 q^-1 + ... + b_nb q^-nb`.
//!
//! The regression uses only samples whose lags are all observed
//! (`t >= max(n_a, n_b)`, zero-based), so there is no pre-windowing, and the
//! cost is normalized by the number of residuals `N_eff = N - max(n_a, n_b)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{lstsq, ColMatrix};
use crate::poly::Poly;
use crate::{Error, Result};

/// Regressor matrices with reciprocal condition number below this are
/// rejected as rank deficient.
pub const RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArxOrders {
    pub n_a: usize,
    pub n_b: usize,
}

impl ArxOrders {
    pub fn new(n_a: usize, n_b: usize) -> Self {
        ArxOrders { n_a, n_b }
    }

    pub fn max_lag(&self) -> usize {
        self.n_a.max(self.n_b)
    }

    pub fn params(&self) -> usize {
        self.n_a + self.n_b
    }

    /// Orders are usable on `n` samples when both are positive and the
    /// regression has more rows than unknowns.
    pub fn check(&self, n: usize) -> Result<()> {
        let ok = self.n_a >= 1
            && self.n_b >= 1
            && n > self.max_lag()
            && n - self.max_lag() > self.params();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidOrders {
                n_a: self.n_a,
                n_b: self.n_b,
                n,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArxEstimate {
    /// Monic, degree at most `n_a`.
    pub a: Poly,
    /// Zero constant term, degree at most `n_b`.
    pub b: Poly,
    /// Mean squared residual.
    pub j_hat: f64,
    pub n_eff: usize,
    pub orders: ArxOrders,
}

impl ArxEstimate {
    /// Wraps externally supplied polynomials (for example truncated
    /// theoretical minimizers) so they can be passed to recovery.
    pub fn from_polys(a: Poly, b: Poly, j_hat: f64) -> Result<Self> {
        if !a.is_monic() {
            return Err(Error::NotMonic(a.coeff(0)));
        }
        if b.coeff(0) != 0.0 {
            return Err(Error::InvalidArgument("B must have a zero constant term"));
        }
        let orders = ArxOrders::new(a.degree(), b.degree());
        Ok(ArxEstimate {
            a,
            b,
            j_hat,
            n_eff: 0,
            orders,
        })
    }

    /// `[a_1..a_na, b_1..b_nb]`.
    pub fn theta(&self) -> Vec<f64> {
        (1..=self.orders.n_a)
            .map(|k| self.a.coeff(k))
            .chain((1..=self.orders.n_b).map(|k| self.b.coeff(k)))
            .collect()
    }
}

/// Regressor column for `theta[j]`: `-y_{t-k}` for the `a_k`, `u_{t-k}` for
/// the `b_k`, over `t = start..n`.
fn regressor<'a>(
    y: &'a [f64],
    u: &'a [f64],
    orders: ArxOrders,
    j: usize,
    start: usize,
) -> impl Iterator<Item = f64> + 'a {
    let n = y.len();
    let (sig, k, sign) = if j < orders.n_a {
        (y, j + 1, -1.0)
    } else {
        (u, j - orders.n_a + 1, 1.0)
    };
    (start..n).map(move |t| sign * sig[t - k])
}

pub fn estimate_arx(y: &[f64], u: &[f64], orders: ArxOrders) -> Result<ArxEstimate> {
    if y.len() != u.len() {
        return Err(Error::LengthMismatch(y.len(), u.len()));
    }
    let n = y.len();
    orders.check(n)?;
    let start = orders.max_lag();
    let rows = n - start;
    let p = orders.params();

    let mut phi = ColMatrix::zeros(rows, p);
    for j in 0..p {
        for (dst, v) in phi
            .col_mut(j)
            .iter_mut()
            .zip(regressor(y, u, orders, j, start))
        {
            *dst = v;
        }
    }
    let sol = lstsq(phi, y[start..].to_vec(), RCOND_MIN)?;

    let mut a = vec![1.0];
    a.extend_from_slice(&sol.x[..orders.n_a]);
    let mut b = vec![0.0];
    b.extend_from_slice(&sol.x[orders.n_a..]);
    let mut est = ArxEstimate {
        a: Poly::new(a),
        b: Poly::new(b),
        j_hat: 0.0,
        n_eff: rows,
        orders,
    };
    let eps = residuals(&est, y, u)?;
    est.j_hat = eps.iter().map(|e| e * e).sum::<f64>() / rows as f64;
    Ok(est)
}

/// Prediction errors `A(q) y_t - B(q) u_t` for `t = max(n_a, n_b)..N`.
pub fn residuals(est: &ArxEstimate, y: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    if y.len() != u.len() {
        return Err(Error::LengthMismatch(y.len(), u.len()));
    }
    let start = est.orders.max_lag();
    if y.len() <= start {
        return Err(Error::InvalidOrders {
            n_a: est.orders.n_a,
            n_b: est.orders.n_b,
            n: y.len(),
        });
    }
    let a = est.a.coeffs();
    let b = est.b.coeffs();
    Ok((start..y.len())
        .map(|t| {
            let ay: f64 = a.iter().enumerate().map(|(k, ak)| ak * y[t - k]).sum();
            let bu: f64 = b
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, bk)| bk * u[t - k])
                .sum();
            ay - bu
        })
        .collect())
}
