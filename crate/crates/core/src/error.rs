//! Crate-wide error type. Variants are named after the contract they report.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Pairing of the two spinors is nonzero, so `u . rho = -psi` has no solution.
    #[error("spinors are not orthogonal under the Chevalley pairing: <rho,psi> = {pairing}")]
    NotPerp { pairing: String },

    /// The spinor is null, so Clifford multiplication by it is not injective.
    #[error("spinor is null; Clifford action has a kernel")]
    NullSpinor,

    /// A linear system that should have full rank did not.
    #[error("linear system is singular{}", detail_suffix(.detail))]
    SingularSystem { detail: String },

    /// Grid too coarse for the requested band.
    #[error("grid resolution {m} cannot represent band {band} without aliasing (needs m >= {needed})")]
    AliasedBand { m: usize, band: u32, needed: usize },

    /// A field required to be closed is not.
    #[error("form is not closed: d has a nonzero {monomial} component")]
    NotClosed { monomial: &'static str },

    /// Non-nullity certificate failed at a grid sample.
    #[error("quadratic form vanishes (|Q| = {value:.3e} < margin {margin:.3e}) at grid point {point:?}")]
    NullAtSample { point: [usize; 3], value: f64, margin: f64 },

    /// The degree-0 component must be a single constant mode.
    #[error("degree-0 component is not constant")]
    NonconstantRho0,

    /// Normalization needs a nonzero degree-0 component.
    #[error("degree-0 component is zero; structure admits no normalization of this kind")]
    ZeroRho0,

    /// A scale parameter that must be nonzero was zero.
    #[error("scale parameter must be nonzero")]
    ZeroScale,

    /// The cohomology vector fails the cone condition.
    #[error("class is not in the structure cone: {reason}")]
    NotInCone { reason: String },

    /// Fiberwise Hodge decomposition needs a form with zero fiber mean.
    #[error("fiber mean is nonzero; fiberwise primitive does not exist")]
    NonzeroFiberMean,

    /// The degree-(1,2) base is not adapted to a coordinate fibration.
    #[error("base is not adapted: {reason}")]
    NotAdapted { reason: String },

    /// Internal consistency failure: the corrected right-hand side was not
    /// pointwise orthogonal to the base.
    #[error("corrected potential is not pointwise orthogonal to the base")]
    NotPerpAfterR,

    /// Perturbation series residuals stopped contracting.
    #[error("series residuals do not contract: ratio {ratio:.3} at order {order}")]
    SeriesDiverging { order: usize, ratio: f64 },

    /// The deformation path left the set of non-null spinors.
    #[error("path becomes null at t = {t}: |Q| = {value:.3e} at grid point {point:?}")]
    PathNull { t: f64, value: f64, point: [usize; 3] },

    /// Flow integration produced non-finite state.
    #[error("flow integration diverged at t = {t}")]
    IntegratorDiverged { t: f64 },

    /// Band growth exceeded the configured cap.
    #[error("band {band} exceeds configured cap {cap}")]
    BandCapExceeded { band: u32, cap: u32 },

    /// Document parse/validation failure, with a JSON-pointer location.
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
}

fn detail_suffix(detail: &str) -> String {
    if detail.is_empty() {
        String::new()
    } else {
        format!(": {detail}")
    }
}

impl Error {
    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { pointer: pointer.into(), message: message.into() }
    }

    /// Process exit code the CLI maps this error to: 3 for schema errors,
    /// 4 for numerical divergence, 2 for contract violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema { .. } => 3,
            Error::SeriesDiverging { .. } | Error::PathNull { .. } | Error::IntegratorDiverged { .. } => 4,
            _ => 2,
        }
    }
}
