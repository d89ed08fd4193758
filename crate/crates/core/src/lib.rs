//! Exact Casimir energies for non-overlapping spheres and sphere–plate
//! configurations with Dirichlet or Neumann boundary conditions.
//!
//! The scalar-field Casimir energy of a multi-sphere geometry is computed from
//! the log-determinant of the inverse multi-scattering matrix `M`, integrated
//! over the Wick-rotated wavenumber axis:
//!
//! ```text
//! E = (1/2π) ∫₀^∞ dκ  ln det M(iκ)
//! ```
//!
//! in units where ħ = c = 1 and lengths are measured in the user's unit `U`,
//! so energies come out in `1/U`. The matrix elements couple the partial-wave
//! channels `(sphere j, l, m)` through exact translation coefficients built
//! from modified spherical Bessel functions, Wigner 3j symbols, and spherical
//! harmonics — no proximity or dipole approximation is involved, so the result
//! is exact for any separation once the partial-wave cutoff `l_max` has
//! converged.
//!
//! On the real wavenumber axis the same determinant yields the smoothed
//! cumulative density of states `N(k) = -Im ln det M(k) / π`, which drives the
//! fermionic (finite-`k_F`) energy of the same geometries.
//!
//! Module map:
//!
//! * [`specfun`] — scaled-exponent arithmetic, spherical Bessel ladders
//!   (ordinary and modified), exact Wigner 3j symbols, spherical harmonics.
//! * [`geometry`] — sphere collections, validation, symmetry detection, and
//!   the sphere–plate mirror construction.
//! * [`mmatrix`] — assembly of the inverse multi-scattering matrix on either
//!   wavenumber axis, including the azimuthal block decomposition for
//!   collinear geometries and the half-domain (plate) factorization.
//! * [`spectral`] — LU log-determinants with sign/phase tracking, partial-wave
//!   convergence control, and phase tracing along the real axis.
//! * [`energy`] — quadrature over the Wick-rotated axis and the public energy
//!   drivers (two-sphere, sphere–plate, Neumann monopole channel, cylinder
//!   rescaling, fermionic).
//! * [`reference`] — closed-form asymptotics and series used as cross-checks.

pub mod energy;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mmatrix;
pub mod reference;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
