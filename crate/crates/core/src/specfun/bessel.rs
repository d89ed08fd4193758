//! Ordinary spherical Bessel functions `j_l`, `y_l` and the outgoing Hankel
//! function `h_l^{(1)} = j_l + i·y_l` on the positive real axis.
//!
//! These drive the real-wavenumber (fermionic) path. No exponent scaling is
//! needed: `j_l` is bounded by 1 and `y_l` stays inside `f64` range
//! throughout the supported domain (`l ≤ 50`, `x ≥ 0.01` keeps
//! `|y_l| ≲ 1e180`).

use crate::error::{Error, Result};
use num_complex::Complex64;

fn check_domain(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "spherical Bessel argument x",
            value: x,
        });
    }
    Ok(())
}

/// All of `j_0(x) … j_{l_max}(x)`.
///
/// Downward recurrence (Miller's algorithm): run
/// `f_{l−1} = ((2l+1)/x)·f_l − f_{l+1}` from a seed well above `l_max`, then
/// normalize against whichever of the closed forms `j_0 = sin x / x`,
/// `j_1 = sin x / x² − cos x / x` is larger in magnitude — they never vanish
/// simultaneously, so the normalization never divides by a near-zero.
/// Values are accumulated in scaled form internally because the unnormalized
/// downward pass can overflow `f64` long before normalization.
pub fn sph_bessel_j_batch(l_max: u32, x: f64) -> Result<Vec<f64>> {
    check_domain(x)?;
    use crate::specfun::ScaledValue;
    let start = (l_max.max(x.ceil() as u32) + 40 + (8.0 * x.cbrt()).ceil() as u32) as usize;
    let mut f = vec![ScaledValue::ZERO; start + 2];
    f[start] = ScaledValue::new(1.0);
    for l in (1..=start).rev() {
        let coeff = (2 * l + 1) as f64 / x;
        f[l - 1] = f[l].scale(coeff).add(-f[l + 1]);
    }
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let factor = if j0.abs() >= j1.abs() {
        ScaledValue::new(j0) / f[0]
    } else {
        ScaledValue::new(j1) / f[1]
    };
    Ok(f[..=l_max as usize]
        .iter()
        .map(|v| (*v * factor).to_f64())
        .collect())
}

/// All of `y_0(x) … y_{l_max}(x)`.
///
/// Upward recurrence from the closed forms `y_0 = −cos x / x`,
/// `y_1 = −cos x / x² − sin x / x`; upward is the stable direction for `y_l`
/// (its magnitude grows with `l`).
pub fn sph_bessel_y_batch(l_max: u32, x: f64) -> Result<Vec<f64>> {
    check_domain(x)?;
    let mut out = Vec::with_capacity(l_max as usize + 1);
    out.push(-x.cos() / x);
    if l_max >= 1 {
        out.push(-x.cos() / (x * x) - x.sin() / x);
    }
    for l in 1..l_max as usize {
        let next = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
        out.push(next);
    }
    Ok(out)
}

/// All of `h_0^{(1)}(x) … h_{l_max}^{(1)}(x)` with `h^{(1)} = j + i·y`.
pub fn sph_hankel1_batch(l_max: u32, x: f64) -> Result<Vec<Complex64>> {
    let j = sph_bessel_j_batch(l_max, x)?;
    let y = sph_bessel_y_batch(l_max, x)?;
    Ok(j.iter().zip(&y).map(|(&re, &im)| Complex64::new(re, im)).collect())
}

/// `h_l^{(1)}(x)` for a single order. Prefer the batch form in loops.
pub fn sph_hankel1(l: u32, x: f64) -> Result<Complex64> {
    Ok(sph_hankel1_batch(l, x)?[l as usize])
}
