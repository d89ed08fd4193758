//! Orthonormal spherical harmonics with the Condon–Shortley phase.
//!
//! `Y_l^m(θ,φ) = Λ_l^m(θ)·e^{imφ}` where `Λ_l^m` is the fully normalized
//! associated Legendre function including the `(−1)^m` Condon–Shortley
//! factor, so that `Y_1^1 = −√(3/8π)·sinθ·e^{iφ}` and
//! `∫|Y_l^m|² dΩ = 1`.
//!
//! The θ-part is computed with the *normalized* three-term recurrence — no
//! raw factorials appear anywhere, so the evaluation stays accurate and
//! in-range up to the largest `l` this crate ever requests (a few hundred).

use num_complex::Complex64;

/// The θ-dependent factor `Λ_l^m(θ)` of `Y_l^m = Λ_l^m(θ)·e^{imφ}` (real).
///
/// Negative `m` uses `Λ_l^{−m} = (−1)^m·Λ_l^m`. Exactly at the poles
/// (`θ == 0.0` or `θ == π` as floats, the values produced by `acos(±1)` for
/// axis-aligned directions) the closed form is used: zero for `m ≠ 0`,
/// `±√((2l+1)/4π)` for `m = 0` — this keeps the pole selection rule exact
/// instead of leaving ~1e−16 residue from `sin(π)`.
///
/// Requires `|m| ≤ l`; out-of-range `m` returns 0 (empty channel).
pub fn sph_harm_theta(l: u32, m: i32, theta: f64) -> f64 {
    let m_abs = m.unsigned_abs();
    if m_abs > l {
        return 0.0;
    }
    let pole_norm = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI)).sqrt();
    if theta == 0.0 {
        return if m == 0 { pole_norm } else { 0.0 };
    }
    if theta == std::f64::consts::PI {
        return if m == 0 {
            if l % 2 == 0 {
                pole_norm
            } else {
                -pole_norm
            }
        } else {
            0.0
        };
    }

    let (sin_t, cos_t) = theta.sin_cos();
    // Seed: Λ_m^m = (−1)^m √((2m+1)!!/(4π(2m)!!)) sin^m θ, built as a product
    // of per-step factors −sinθ·√((2j+1)/(2j)) so nothing overflows.
    let mut p_prev2 = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for j in 1..=m_abs {
        p_prev2 *= -sin_t * ((2 * j + 1) as f64 / (2 * j) as f64).sqrt();
    }
    if l == m_abs {
        return signed_for_m(p_prev2, m);
    }
    // First step up: Λ_{m+1}^m = √(2m+3)·cosθ·Λ_m^m
    let mut p_prev = ((2 * m_abs + 3) as f64).sqrt() * cos_t * p_prev2;
    for ll in (m_abs + 2)..=l {
        let ll2 = (ll * ll) as f64;
        let mm2 = (m_abs * m_abs) as f64;
        let a = ((4.0 * ll2 - 1.0) / (ll2 - mm2)).sqrt();
        let prev = (ll - 1) as f64;
        let b = ((prev * prev - mm2) / (4.0 * prev * prev - 1.0)).sqrt();
        let p_next = a * (cos_t * p_prev - b * p_prev2);
        p_prev2 = p_prev;
        p_prev = p_next;
    }
    signed_for_m(p_prev, m)
}

fn signed_for_m(lambda_abs_m: f64, m: i32) -> f64 {
    if m >= 0 || m % 2 == 0 {
        lambda_abs_m
    } else {
        -lambda_abs_m
    }
}

/// The orthonormal spherical harmonic `Y_l^m(θ, φ)`.
pub fn sph_harm(l: u32, m: i32, theta: f64, phi: f64) -> Complex64 {
    let lambda = sph_harm_theta(l, m, theta);
    let (s, c) = (m as f64 * phi).sin_cos();
    Complex64::new(lambda * c, lambda * s)
}
