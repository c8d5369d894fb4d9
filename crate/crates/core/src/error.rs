use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial must be monic (leading coefficient {0})")]
    NotMonic(f64),
    #[error("root {re}{im:+}i lies within the unit-circle tolerance")]
    RootOnUnitCircle { re: f64, im: f64 },
    #[error("polynomial has a root that is not anti-stable")]
    NotAntiStable,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("transfer function denominator is zero")]
    ZeroDenominator,
    #[error("transfer function is not proper (denominator has zero constant term)")]
    Improper,
    #[error("closed loop has an algebraic loop (1 + KG vanishes at infinity)")]
    AlgebraicLoop,
    #[error("transfer function has a pole on the frequency grid at omega = {omega}")]
    PoleOnGrid { omega: f64 },
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid system: {0}")]
    InvalidSpec(&'static str),
    #[error("closed-loop transfer function {path} is unstable; K is not stabilizing")]
    UnstableClosedLoop { path: &'static str },
    #[error("signal lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid ARX orders n_a = {n_a}, n_b = {n_b} for {n} samples")]
    InvalidOrders { n_a: usize, n_b: usize, n: usize },
    #[error("regressor matrix is numerically rank deficient (rcond = {rcond:e})")]
    RankDeficient { rcond: f64 },
    #[error("noise model is not inversely stable (C has anti-stable roots)")]
    InverselyUnstableH,
    #[error("Z or its inverse is not stable")]
    UnstableZ,
    #[error("power series diverges: denominator is not stable")]
    UnstableExpansion,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
