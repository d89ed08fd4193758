//! General-geometry assembly of the full truncated matrix `M = 1 + A`.
//!
//! Off-diagonal sphere blocks couple every `(l, m)` channel pair through a
//! translation sum over `l''` whose angular weight involves two Wigner-3j
//! symbols and the spherical harmonic of the center-to-center direction.
//! The direction for block `(row j, col j')` is the unit vector from
//! `center_j` to `center_{j'}`; sphere-diagonal blocks are exactly the
//! identity.
//!
//! On the Wick-rotated axis the assembly works in the *real* spherical
//! harmonic basis (per `l`: sin-type channels for stored `m < 0`, cos-type
//! for `m ≥ 0`), a unitary change of basis that leaves the determinant
//! invariant and makes every entry real. Each real entry combines two
//! "magnitude parts" `P = B_{m,m'}` and `Q = B_{m,−m'}` of the complex
//! entries `B e^{iμφ}` with `cos`/`sin` factors of the azimuth.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::coupling::Kahan;
use super::two_sphere::{denominators_imag, ipow, numerators_imag, radial_real, KTrans};
use super::{BlockData, KAxis, MBlock};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::linalg::{CplxMatrix, RealMatrix};
use crate::specfun::{sph_hankel1_batch, sph_harm, sph_harm_theta, wigner_3j, ScaledValue};

/// `(-1)^n` for signed `n`.
fn neg1(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Offset of channel `(l, m)` inside one sphere's `(l_max+1)²` block:
/// channels are ordered `(l, m)` lexicographically with `m = −l…l`.
fn chan_offset(l: u32, m: i32) -> usize {
    (l * l) as usize + (l as i32 + m) as usize
}

/// The translation sum
/// `Σ_{l''} √(2l''+1) · 3j(l'',l',l;0,0,0) · 3j(l'',l',l;μ,m',−m) ·
///  k_{l''}(k₄ r) · Λ_{l''}^{μ}(θ)`
/// for signed channel labels, with `μ = m − m'`. Terms are contracted
/// against the exponent-scaled `k_{l''}` chain so the result survives the
/// enormous dynamic range of the translation factors.
fn translated_sum_imag(
    ktr: &KTrans,
    theta: f64,
    l: u32,
    m: i32,
    lp: u32,
    mp: i32,
    terms: &mut Vec<(u32, f64)>,
    scratch: &mut Vec<f64>,
) -> ScaledValue {
    let mu = m - mp;
    terms.clear();
    let mut lpp = l.abs_diff(lp).max(mu.unsigned_abs());
    if (lpp + l + lp) % 2 == 1 {
        lpp += 1;
    }
    while lpp <= l + lp {
        let t0 = wigner_3j(lpp, lp, l, 0, 0, 0);
        if t0 != 0.0 {
            let tm = wigner_3j(lpp, lp, l, mu, mp, -m);
            if tm != 0.0 {
                let lam = sph_harm_theta(lpp, mu, theta);
                if lam != 0.0 {
                    let w = f64::from(2 * lpp + 1).sqrt() * t0 * tm * lam;
                    terms.push((lpp, w));
                }
            }
        }
        lpp += 2;
    }
    match ktr.contract(terms, scratch) {
        Some((s, e)) => ScaledValue::from_parts(s, e),
        None => ScaledValue::ZERO,
    }
}

/// Full matrix `M(i k₄) = 1 + A` for an arbitrary validated geometry, in
/// the real-harmonic channel basis (all entries real; determinant equal to
/// that of the complex-basis matrix). Dimension is
/// `n_spheres · (l_max+1)²`, channels ordered as in [`super::channels`].
pub fn assemble_general_imag_k(geom: &Geometry, k4: f64, l_max: u32) -> Result<MBlock> {
    if !(k4 > 0.0) || !k4.is_finite() {
        return Err(Error::Domain {
            what: "wavenumber must be positive and finite",
            value: k4,
        });
    }
    let spheres = geom.spheres();
    let n_s = spheres.len();
    let per = ((l_max + 1) * (l_max + 1)) as usize;
    let mut out = RealMatrix::identity(n_s * per);

    let mut num = Vec::with_capacity(n_s);
    let mut den = Vec::with_capacity(n_s);
    for s in spheres {
        num.push(numerators_imag(s.bc, l_max, k4 * s.radius)?);
        den.push(denominators_imag(s.bc, l_max, k4 * s.radius)?);
    }

    let f0 = |m: i32| if m == 0 { FRAC_1_SQRT_2 } else { 1.0 };
    let mut terms: Vec<(u32, f64)> = Vec::new();
    let mut scratch: Vec<f64> = Vec::new();

    for j in 0..n_s {
        for jp in 0..n_s {
            if j == jp {
                continue;
            }
            let r = geom.separation(j, jp);
            let (theta, phi) = geom.pair_angles(j, jp);
            let ktr = KTrans::build(2 * l_max, k4 * r)?;
            let ratio2 = (spheres[j].radius / spheres[jp].radius).powi(2);
            for l in 0..=l_max {
                for ms in -(l as i32)..=(l as i32) {
                    let row = j * per + chan_offset(l, ms);
                    let row_sin = ms < 0;
                    let m = ms.abs();
                    for lp in 0..=l_max {
                        for mps in -(lp as i32)..=(lp as i32) {
                            let col = jp * per + chan_offset(lp, mps);
                            let col_sin = mps < 0;
                            let mp = mps.abs();

                            let pref = neg1(m + lp as i32)
                                * (4.0 * PI * f64::from((2 * l + 1) * (2 * lp + 1))).sqrt()
                                * ratio2;
                            let ratio = num[j][l as usize] / den[jp][lp as usize];
                            let p = ratio
                                * translated_sum_imag(
                                    &ktr, theta, l, m, lp, mp, &mut terms, &mut scratch,
                                )
                                .scale(pref);
                            let q = ratio
                                * translated_sum_imag(
                                    &ktr, theta, l, m, lp, -mp, &mut terms, &mut scratch,
                                )
                                .scale(pref);

                            let (mu, nu) = (f64::from(m - mp), f64::from(m + mp));
                            let s_p = neg1(m + mp);
                            let s_q = neg1(m);
                            let (cp, cq) = match (row_sin, col_sin) {
                                (false, false) => {
                                    (s_p * (mu * phi).cos(), s_q * (nu * phi).cos())
                                }
                                (true, true) => {
                                    (s_p * (mu * phi).cos(), -s_q * (nu * phi).cos())
                                }
                                (false, true) => {
                                    (-s_p * (mu * phi).sin(), s_q * (nu * phi).sin())
                                }
                                (true, false) => {
                                    (s_p * (mu * phi).sin(), s_q * (nu * phi).sin())
                                }
                            };
                            let ff = f0(m) * f0(mp);
                            let v = p.scale(ff * cp).add(q.scale(ff * cq)).to_f64();
                            debug_assert!(v.is_finite(), "matrix entry left the f64 range");
                            out.set(row, col, v);
                        }
                    }
                }
            }
        }
    }

    Ok(MBlock {
        m: None,
        l_min: 0,
        l_max,
        k: KAxis::Imaginary(k4),
        data: BlockData::Real(out),
    })
}

/// Full complex matrix `M(k) = 1 + A` on the physical wavenumber axis, in
/// the ordinary (complex) spherical harmonic channel basis. The phase of
/// its determinant drives the mode-counting function; keep `l_max`
/// moderate — channels far above `k·a` are closed and carry no weight.
pub fn assemble_general_real_k(geom: &Geometry, k: f64, l_max: u32) -> Result<MBlock> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain {
            what: "wavenumber must be positive and finite",
            value: k,
        });
    }
    let spheres = geom.spheres();
    let n_s = spheres.len();
    let per = ((l_max + 1) * (l_max + 1)) as usize;
    let mut out = CplxMatrix::identity(n_s * per);

    let mut num = Vec::with_capacity(n_s);
    let mut den = Vec::with_capacity(n_s);
    for s in spheres {
        let (n_j, d_j) = radial_real(s.bc, l_max, k * s.radius)?;
        num.push(n_j);
        den.push(d_j);
    }

    for j in 0..n_s {
        for jp in 0..n_s {
            if j == jp {
                continue;
            }
            let r = geom.separation(j, jp);
            let (theta, phi) = geom.pair_angles(j, jp);
            let h_trans = sph_hankel1_batch(2 * l_max, k * r)?;
            let ratio2 = (spheres[j].radius / spheres[jp].radius).powi(2);
            for l in 0..=l_max {
                for ms in -(l as i32)..=(l as i32) {
                    let row = j * per + chan_offset(l, ms);
                    for lp in 0..=l_max {
                        for mps in -(lp as i32)..=(lp as i32) {
                            let col = jp * per + chan_offset(lp, mps);
                            let mu = ms - mps;

                            let (mut acc_re, mut acc_im) = (Kahan::default(), Kahan::default());
                            let mut lpp = l.abs_diff(lp).max(mu.unsigned_abs());
                            if (lpp + l + lp) % 2 == 1 {
                                lpp += 1;
                            }
                            while lpp <= l + lp {
                                let t0 = wigner_3j(lpp, lp, l, 0, 0, 0);
                                if t0 != 0.0 {
                                    let tm = wigner_3j(lpp, lp, l, mu, mps, -ms);
                                    if tm != 0.0 {
                                        let y = sph_harm(lpp, mu, theta, phi);
                                        let term = ipow(i64::from(lpp))
                                            * h_trans[lpp as usize]
                                            * y
                                            * (f64::from(2 * lpp + 1).sqrt() * t0 * tm);
                                        acc_re.add(term.re);
                                        acc_im.add(term.im);
                                    }
                                }
                                lpp += 2;
                            }

                            let pref = ipow(2 * i64::from(ms) + i64::from(lp) - i64::from(l))
                                * ((4.0 * PI * f64::from((2 * l + 1) * (2 * lp + 1))).sqrt()
                                    * ratio2
                                    * num[j][l as usize])
                                / den[jp][lp as usize];
                            let v = pref * Complex64::new(acc_re.total(), acc_im.total());
                            out.set(row, col, v);
                        }
                    }
                }
            }
        }
    }

    Ok(MBlock {
        m: None,
        l_min: 0,
        l_max,
        k: KAxis::Real(k),
        data: BlockData::Complex(out),
    })
}
