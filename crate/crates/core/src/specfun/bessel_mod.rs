//! Modified spherical Bessel functions `i_l` and `k_l` with exponent scaling.
//!
//! Conventions (asserted here, relied on by the matrix assembly):
//!
//! * `i_0(x) = sinh(x)/x`, `i_l` regular at the origin;
//! * `k_0(x) = (π/2)·e^{−x}/x`, `k_l` exponentially decaying, all positive.
//!
//! With these normalizations the Wronskian-type identity
//! `i_l(x)·k_{l+1}(x) + i_{l+1}(x)·k_l(x) = π/(2x²)` holds, which the tests
//! verify across the full working domain.
//!
//! `i_l` grows like `e^x` and `k_l` like `(2l−1)!!·x^{−l−1}`, so both ladders
//! work in [`ScaledValue`] arithmetic: magnitudes like `e^{±2000}` appear
//! routinely inside matrix entries whose final size is moderate.

use crate::error::{Error, Result};
use crate::specfun::ScaledValue;

fn check_domain(x: f64, what: &'static str) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { what, value: x });
    }
    Ok(())
}

/// `i_0(x) = sinh(x)/x` as a scaled value, accurate for both tiny and huge `x`.
///
/// Written as `e^x·(−expm1(−2x))/(2x)` so the mantissa stays fully accurate
/// near `x = 0` (where `sinh(x)/x → 1`) and the `e^x` growth lives in the
/// exponent.
fn i0_scaled(x: f64) -> ScaledValue {
    ScaledValue::from_parts(-(-2.0 * x).exp_m1() / (2.0 * x), x)
}

/// `cosh(x)` as a scaled value (`= e^x·(1 + e^{−2x})/2`).
fn cosh_scaled(x: f64) -> ScaledValue {
    ScaledValue::from_parts((1.0 + (-2.0 * x).exp()) / 2.0, x)
}

/// All of `i_0(x) … i_{l_max}(x)`, exponent-scaled.
///
/// Downward recurrence (Miller's algorithm): the recurrence
/// `f_{l−1} = f_{l+1} + ((2l+1)/x)·f_l` run downward amplifies the regular
/// solution `i_l` and suppresses any admixture of `k_l`, so seeding with
/// arbitrary values far above `l_max` and normalizing by the closed-form
/// `i_0` converges to machine accuracy. The start order sits
/// `40 + 8·x^{1/3}` above both `l_max` and `x`; past the turning point
/// `l ≈ x` the contamination decays like `exp(−c·Δl^{3/2}/√x)`, and this
/// margin keeps it below 1e-14 for the whole supported domain.
///
/// `x = 0` is handled analytically: `i_l(0) = δ_{l0}`.
pub fn mod_sph_bessel_i_batch(l_max: u32, x: f64) -> Result<Vec<ScaledValue>> {
    if x == 0.0 {
        let mut out = vec![ScaledValue::ZERO; l_max as usize + 1];
        out[0] = ScaledValue::new(1.0);
        return Ok(out);
    }
    check_domain(x, "modified Bessel argument x")?;
    let start = (l_max.max(x.ceil() as u32) + 40 + (8.0 * x.cbrt()).ceil() as u32) as usize;
    let mut f = vec![ScaledValue::ZERO; start + 2];
    f[start] = ScaledValue::new(1.0);
    for l in (1..=start).rev() {
        let coeff = (2 * l + 1) as f64 / x;
        f[l - 1] = f[l + 1].add(f[l].scale(coeff));
    }
    let factor = i0_scaled(x) / f[0];
    f.truncate(l_max as usize + 1);
    for v in &mut f {
        *v = *v * factor;
    }
    // The l = 0 slot is the normalization target itself; writing the closed
    // form directly spares it the divide/multiply round-trip, whose exponent
    // cancellation (≈ e^{±300} intermediates at small x) costs ~1e-14.
    f[0] = i0_scaled(x);
    Ok(f)
}

/// All of `k_0(x) … k_{l_max}(x)`, exponent-scaled.
///
/// Upward recurrence `k_{l+1} = k_{l−1} + ((2l+1)/x)·k_l` from the closed
/// forms `k_0 = (π/2)e^{−x}/x` and `k_1 = k_0·(1 + 1/x)`. Every term is
/// positive, so the recurrence is forward-stable (no cancellation ever).
pub fn mod_sph_bessel_k_batch(l_max: u32, x: f64) -> Result<Vec<ScaledValue>> {
    check_domain(x, "modified Bessel argument x")?;
    if x < 1e-300 {
        // k_l ~ x^{-l-1} diverges; below this scale even k_0 is meaningless.
        return Err(Error::Domain {
            what: "modified Bessel argument x (k_l diverges as x → 0)",
            value: x,
        });
    }
    let k0 = ScaledValue::from_parts(std::f64::consts::FRAC_PI_2 / x, -x);
    let mut out = Vec::with_capacity(l_max as usize + 1);
    out.push(k0);
    if l_max >= 1 {
        out.push(k0.scale(1.0 + 1.0 / x));
    }
    for l in 1..l_max as usize {
        let coeff = (2 * l + 1) as f64 / x;
        let next = out[l - 1].add(out[l].scale(coeff));
        out.push(next);
    }
    Ok(out)
}

/// `i_l(x)` for a single order. Prefer the batch form in loops.
pub fn mod_sph_bessel_i(l: u32, x: f64) -> Result<ScaledValue> {
    Ok(mod_sph_bessel_i_batch(l, x)?[l as usize])
}

/// `k_l(x)` for a single order. Prefer the batch form in loops.
pub fn mod_sph_bessel_k(l: u32, x: f64) -> Result<ScaledValue> {
    Ok(mod_sph_bessel_k_batch(l, x)?[l as usize])
}

/// Riccati-type derivatives `(d/dρ)(ρ·i_l(ρ))` at `ρ = x` for `l = 0…l_max`.
///
/// Used by the Neumann boundary condition, where the scattering ratio is
/// built from `d/da (a·j_l(ka))` continued to the imaginary axis. The forms
/// `x·i_{l−1} − l·i_l` (with `(x·i_0)' = cosh x`) involve no cancellation:
/// both arrangements of the derivative are sums of same-sign dominant terms
/// (the function `ρ·i_l(ρ)` is increasing, so the derivative is positive).
pub fn riccati_i_deriv_batch(l_max: u32, x: f64) -> Result<Vec<ScaledValue>> {
    check_domain(x, "modified Bessel argument x")?;
    let i = mod_sph_bessel_i_batch(l_max, x)?;
    let mut out = Vec::with_capacity(l_max as usize + 1);
    out.push(cosh_scaled(x));
    for l in 1..=l_max as usize {
        out.push(i[l - 1].scale(x).add(i[l].scale(-(l as f64))));
    }
    Ok(out)
}

/// Riccati-type derivatives `(d/dρ)(ρ·k_l(ρ))` at `ρ = x` for `l = 0…l_max`.
///
/// Equal to `−(x·k_{l−1} + l·k_l)` with `k_{−1} = k_0`; all terms share one
/// sign (the result is always negative), so no cancellation occurs.
pub fn riccati_k_deriv_batch(l_max: u32, x: f64) -> Result<Vec<ScaledValue>> {
    let k = mod_sph_bessel_k_batch(l_max, x)?;
    let mut out = Vec::with_capacity(l_max as usize + 1);
    out.push(-k[0].scale(x));
    for l in 1..=l_max as usize {
        out.push(-(k[l - 1].scale(x).add(k[l].scale(l as f64))));
    }
    Ok(out)
}
