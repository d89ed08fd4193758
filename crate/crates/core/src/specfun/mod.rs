//! Special functions underpinning the scattering matrix elements.
//!
//! Everything here is deterministic and pure: the same inputs always produce
//! bit-identical outputs. The modified Bessel ladders return [`ScaledValue`]s
//! because the raw function values overflow or underflow `f64` long before the
//! partial-wave cutoffs this crate needs (`k_l` grows like `(2l-1)!! / x^{l+1}`).

mod bessel;
mod bessel_mod;
mod harmonics;
mod scaled;
mod wigner;

pub use bessel::{sph_bessel_j_batch, sph_bessel_y_batch, sph_hankel1, sph_hankel1_batch};
pub use bessel_mod::{
    mod_sph_bessel_i, mod_sph_bessel_i_batch, mod_sph_bessel_k, mod_sph_bessel_k_batch,
    riccati_i_deriv_batch, riccati_k_deriv_batch,
};
pub use harmonics::{sph_harm, sph_harm_theta};
pub use scaled::ScaledValue;
pub use wigner::wigner_3j;
