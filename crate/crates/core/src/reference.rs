//! Closed-form reference formulas: asymptotic series, proximity-force and
//! semiclassical approximations, s-wave/p-wave limits, integrated
//! density-of-states forms, and fermionic closed forms.
//!
//! Everything here is a pure formula — no quadrature, no matrices — used to
//! cross-check the exact determinant-based energies and exposed through the
//! CLI `reference` subcommand. Lengths are in the user's unit `U`, energies
//! in `1/U` (ħ = c = 1); the fermionic forms additionally set the fermion
//! mass to 1 so the energy scale is `k_F²/2`.
//!
//! Sphere–plate conventions: `a` is the sphere radius, `L` the
//! surface-to-surface gap, and `R = L + a` the center-to-plate distance.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which large-separation series to evaluate for the sphere–plate energy.
///
/// The coefficients are stored as exact integer rationals and converted to
/// doubles on demand; each family carries its own dimensional prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFamily {
    /// Dirichlet, all partial waves: prefactor `−a/(8πR²)`.
    DirichletAllL,
    /// Dirichlet with the s-wave removed: prefactor `−5a³/(16πR⁴)`.
    DirichletLPositive,
    /// Neumann with the (artificial) s-wave removed: prefactor
    /// `−10a³/(16πR⁴)`.
    NeumannLPositive,
}

/// Exact rational coefficients of the bracketed polynomial in `a/R`,
/// constant term first, through sixth order.
const D_ALL_L: [(i64, i64); 7] = [
    (1, 1),
    (5, 8),
    (421, 144),
    (535, 1152),
    (3_083_041, 518_400),
    (-2_741_117, 1_382_400),
    (557_222_415_727, 36_578_304_000),
];

const D_L_POSITIVE: [(i64, i64); 7] = [
    (1, 1),
    (0, 1),
    (56, 25),
    (-597, 640),
    (10_453, 1_750),
    (-16_557, 1_600),
    (394_844_679_647, 9_144_576_000),
];

const N_L_POSITIVE: [(i64, i64); 7] = [
    (1, 1),
    (0, 1),
    (63, 100),
    (597, 320),
    (-4_159, 14_000),
    (-271_437, 25_600),
    (148_355_331_834, 2_286_144_000),
];

impl SeriesFamily {
    /// The exact rational coefficients `(numerator, denominator)` of the
    /// bracket polynomial, constant term first.
    pub fn coefficients(&self) -> &'static [(i64, i64); 7] {
        match self {
            SeriesFamily::DirichletAllL => &D_ALL_L,
            SeriesFamily::DirichletLPositive => &D_L_POSITIVE,
            SeriesFamily::NeumannLPositive => &N_L_POSITIVE,
        }
    }

    /// The dimensional prefactor multiplying the bracket.
    pub fn prefactor(&self, a: f64, big_r: f64) -> f64 {
        match self {
            SeriesFamily::DirichletAllL => -a / (8.0 * PI * big_r * big_r),
            SeriesFamily::DirichletLPositive => {
                -5.0 * a.powi(3) / (16.0 * PI * big_r.powi(4))
            }
            SeriesFamily::NeumannLPositive => {
                -10.0 * a.powi(3) / (16.0 * PI * big_r.powi(4))
            }
        }
    }
}

impl FromStr for SeriesFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d_all_l" => Ok(SeriesFamily::DirichletAllL),
            "d_l_gt_0" => Ok(SeriesFamily::DirichletLPositive),
            "n_l_gt_0" => Ok(SeriesFamily::NeumannLPositive),
            other => Err(Error::InvalidInput(format!(
                "unknown series family '{other}' (expected D_all_l, D_l_gt_0, or N_l_gt_0)"
            ))),
        }
    }
}

impl std::fmt::Display for SeriesFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SeriesFamily::DirichletAllL => "D_all_l",
            SeriesFamily::DirichletLPositive => "D_l_gt_0",
            SeriesFamily::NeumannLPositive => "N_l_gt_0",
        };
        f.write_str(s)
    }
}

fn check_series_domain(a: f64, big_r: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain {
            what: "sphere radius must be positive and finite",
            value: a,
        });
    }
    if !(big_r > a) || !big_r.is_finite() {
        return Err(Error::Domain {
            what: "center-to-plate distance must exceed the sphere radius",
            value: big_r,
        });
    }
    Ok(())
}

/// Large-separation sphere–plate energy series through `(a/R)^max_order`.
///
/// Evaluates the family's bracket polynomial by Horner's rule on `a/R`,
/// keeping terms up to the requested order (clamped at 6, the highest
/// stored), times the family prefactor. `big_r` is the center-to-plate
/// distance `R = L + a`.
pub fn asymptotic_series_truncated(
    family: SeriesFamily,
    a: f64,
    big_r: f64,
    max_order: u32,
) -> Result<f64> {
    check_series_domain(a, big_r)?;
    let coeffs = family.coefficients();
    let n_terms = (max_order as usize + 1).min(coeffs.len());
    let x = a / big_r;
    let mut bracket = 0.0;
    for &(num, den) in coeffs[..n_terms].iter().rev() {
        bracket = bracket * x + (num as f64) / (den as f64);
    }
    Ok(family.prefactor(a, big_r) * bracket)
}

/// Large-separation sphere–plate energy series through sixth order in
/// `a/R`. See [`asymptotic_series_truncated`].
pub fn asymptotic_series(family: SeriesFamily, a: f64, big_r: f64) -> Result<f64> {
    asymptotic_series_truncated(family, a, big_r, 6)
}

/// Large-gap limit of the s-wave-only sphere–plate energy:
/// `−(π³a/1440L²) · (90/π⁴) · 2 / ((1 + a/L)(1 + a/2L))`.
pub fn swave_sphere_plate_asymptote(a: f64, gap: f64) -> f64 {
    let pref = -PI.powi(3) * a / (1440.0 * gap * gap);
    pref * (90.0 / PI.powi(4)) * 2.0 / ((1.0 + a / gap) * (1.0 + a / (2.0 * gap)))
}

/// Large-gap limit of the p-wave contribution:
/// `−(5π³a³/1440L⁴) · (90/π⁴)`.
pub fn pwave_asymptote(a: f64, gap: f64) -> f64 {
    -5.0 * PI.powi(3) * a.powi(3) / (1440.0 * gap.powi(4)) * (90.0 / PI.powi(4))
}

/// Leading proximity-force term `−π³a/(1440L²)` — the standard yardstick
/// the sphere–plate energies are normalized by.
pub fn pfa_leading(a: f64, gap: f64) -> f64 {
    -PI.powi(3) * a / (1440.0 * gap * gap)
}

/// Short-gap semiclassical two-bounce approximation:
/// `−(1/16π)(a/L²)(π⁴/90)[1 − (5/π² − 1/3)(L/a)]`.
///
/// Its leading term coincides with [`pfa_leading`]; the same expression
/// applies to the Neumann case. Intended for `L ≪ a`, evaluated as written.
pub fn semiclassical_sphere_plate(a: f64, gap: f64) -> f64 {
    let lead = -(a / (gap * gap)) / (16.0 * PI) * PI.powi(4) / 90.0;
    lead * (1.0 - (5.0 / (PI * PI) - 1.0 / 3.0) * (gap / a))
}

/// s-wave approximation to the integrated density-of-states difference of
/// two spheres: `(a²/πr²) sin[2(r−a)k]`.
pub fn swave_integrated_dos(k: f64, a: f64, r: f64) -> f64 {
    a * a / (PI * r * r) * (2.0 * (r - a) * k).sin()
}

/// Two-bounce semiclassical form of the same quantity:
/// `(a²/(4πr(r−2a))) sin[2(r−2a)k]` — the non-repeated periodic orbit
/// between the sphere surfaces.
pub fn semiclassical_integrated_dos(k: f64, a: f64, r: f64) -> f64 {
    a * a / (4.0 * PI * r * (r - 2.0 * a)) * (2.0 * (r - 2.0 * a) * k).sin()
}

/// Spherical Bessel `j₁(x) = sin x / x² − cos x / x`, with the small-`x`
/// series used below the cancellation threshold.
fn j1(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        x / 3.0 - x.powi(3) / 30.0
    } else {
        x.sin() / (x * x) - x.cos() / x
    }
}

/// Closed-form fermionic Casimir energy of two spheres (valid for
/// `k_F·a > 1`): `−(k_F²/2)·(a²/(2πr(r−2a)))·j₁[2(r−2a)k_F]`, fermion mass
/// set to 1.
pub fn fermionic_two_sphere(a: f64, r: f64, k_f: f64) -> f64 {
    -(k_f * k_f / 2.0) * a * a / (2.0 * PI * r * (r - 2.0 * a)) * j1(2.0 * (r - 2.0 * a) * k_f)
}

/// Closed-form fermionic Casimir energy of a sphere and a plate:
/// `−(k_F²/2)·(a/(2π(r−a)))·j₁[2(r−a)k_F]` with `r` the center-to-image
/// distance, fermion mass set to 1.
pub fn fermionic_sphere_plate(a: f64, r: f64, k_f: f64) -> f64 {
    -(k_f * k_f / 2.0) * a / (2.0 * PI * (r - a)) * j1(2.0 * (r - a) * k_f)
}

/// Casimir–Polder result for a perfectly conducting sphere above a plate,
/// with the s-wave removed: `−9a³/(16πR⁴)` at leading order.
pub fn em_casimir_polder_l_gt_0(a: f64, big_r: f64) -> f64 {
    -9.0 * a.powi(3) / (16.0 * PI * big_r.powi(4))
}
