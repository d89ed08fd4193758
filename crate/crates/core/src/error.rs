//! Error type shared across the crate.

/// Everything that can go wrong while validating geometry or running the
/// scattering numerics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A geometry must contain at least one sphere.
    #[error("geometry contains no spheres")]
    EmptyGeometry,

    /// Sphere radius must be positive and finite.
    #[error("sphere {index} has invalid radius {radius} (must be positive and finite)")]
    BadRadius { index: usize, radius: f64 },

    /// Sphere centers must be finite coordinates.
    #[error("sphere {index} has a non-finite center coordinate")]
    BadCenter { index: usize },

    /// Spheres must be strictly separated (touching counts as overlap).
    #[error(
        "spheres {i} and {j} overlap or touch: center distance {separation} <= radius sum {radius_sum}"
    )]
    Overlap {
        i: usize,
        j: usize,
        separation: f64,
        radius_sum: f64,
    },

    /// A scalar parameter was outside its domain.
    #[error("{what} must be positive and finite, got {value}")]
    Domain { what: &'static str, value: f64 },

    /// LU elimination hit a pivot that is zero or subnormal.
    #[error("matrix is numerically singular (pivot {pivot} of {dim})")]
    SingularMatrix { pivot: usize, dim: usize },

    /// The partial-wave ladder cannot settle to the requested tolerance
    /// within its hard cap — either it ran out of room mid-flight
    /// (`last_delta` finite) or the opening truncation already exceeded the
    /// cap and no ladder step was possible (`last_delta` infinite).
    #[error(
        "partial-wave expansion cannot settle within the cap l_max = {l_max_cap} \
         (last relative change {last_delta:.3e}; geometry too close for this \
         wavenumber cutoff?)"
    )]
    NoConvergence { l_max_cap: u32, last_delta: f64 },

    /// Phase tracing ran out of refinement nodes before every step was
    /// resolved to less than half a winding.
    #[error(
        "phase refinement budget exhausted: {nodes} nodes used, \
         largest remaining step {max_step:.3e} rad"
    )]
    RefinementBudget { nodes: usize, max_step: f64 },

    /// A geometry file failed to parse.
    #[error("geometry file line {line}: {msg}")]
    GeometryParse { line: usize, msg: String },

    /// Any other invalid input.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that signal a convergence failure rather than bad
    /// input; the command-line tool maps these to a distinct exit code.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::RefinementBudget { .. } | Error::SingularMatrix { .. }
        )
    }
}
