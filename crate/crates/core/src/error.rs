use thiserror::Error;

/// Numerical and domain errors raised by the library modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate tangent: |γ'(t)| = {speed:.3e} at t = {t}")]
    DegenerateTangent { t: f64, speed: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("point {point} lies on or too close to the unit circle")]
    OnUnitCircle { point: String },

    #[error("points lie on both sides of the unit circle")]
    MixedSides,

    #[error("evaluation at {at} is within {dist:.3e} of a pole")]
    NearPole { at: String, dist: f64 },

    #[error("pole {pole} lies on (or within {dist:.3e} of) the boundary curve")]
    PoleOnCurve { pole: String, dist: f64 },

    #[error("{what} did not converge (last residual {residual:.3e})")]
    NotConverged { what: String, residual: f64 },

    #[error("argument {arg} is outside the verified domain of the map")]
    OutsideDomain { arg: String },

    #[error("anchor preimage not found: {0}")]
    AnchorNotFound(String),

    #[error("arc point {0} is an endpoint: open-up preimages collide")]
    ArcEndpoint(String),

    #[error("point {0} is not on the arc")]
    NotOnArc(String),

    #[error("quadrature radius infeasible for pole {pole}: {reason}")]
    QuadratureRadius { pole: String, reason: String },

    #[error("quadrature did not settle for pole {pole} (Q vs 2Q mismatch {mismatch:.3e})")]
    QuadratureMismatch { pole: String, mismatch: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn fmt_c(z: num_complex::Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}
