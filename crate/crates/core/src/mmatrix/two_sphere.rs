//! Collinear two-sphere blocks.
//!
//! With both sphere centers on the z-axis the magnetic quantum number is
//! conserved, so the scattering matrix splits into independent blocks per
//! `m`, each of dimension `l_max + 1 − |m|`. This module assembles those
//! blocks directly — much cheaper than the general assembly, and the path
//! every sphere–plate and collinear-pair energy integral takes.
//!
//! On the Wick-rotated axis the radial factors are modified spherical
//! Bessel functions whose magnitudes span thousands of orders of magnitude
//! before they cancel, so every intermediate stays in exponent-scaled form
//! ([`ScaledValue`]) until the final entry, whose net scale
//! `e^{−k₄(r − a − a')}` is always representable (spheres do not overlap).

use num_complex::Complex64;

use super::coupling::{coupling_table, Kahan};
use super::{BlockData, KAxis, MBlock};
use crate::error::{Error, Result};
use crate::geometry::Bc;
use crate::linalg::{CplxMatrix, RealMatrix};
use crate::specfun::{
    mod_sph_bessel_i_batch, mod_sph_bessel_k_batch, riccati_i_deriv_batch,
    riccati_k_deriv_batch, sph_bessel_j_batch, sph_hankel1_batch, ScaledValue,
};

/// Numerator radial factors on the Wick-rotated axis: the regular solution's
/// value (Dirichlet) or the derivative of its Riccati form (Neumann) at the
/// sphere surface.
pub(super) fn numerators_imag(bc: Bc, l_max: u32, x: f64) -> Result<Vec<ScaledValue>> {
    match bc {
        Bc::Dirichlet => mod_sph_bessel_i_batch(l_max, x),
        Bc::Neumann => riccati_i_deriv_batch(l_max, x),
    }
}

/// Denominator radial factors on the Wick-rotated axis: the outgoing
/// solution's value or Riccati derivative at the sphere surface.
pub(super) fn denominators_imag(bc: Bc, l_max: u32, x: f64) -> Result<Vec<ScaledValue>> {
    match bc {
        Bc::Dirichlet => mod_sph_bessel_k_batch(l_max, x),
        Bc::Neumann => riccati_k_deriv_batch(l_max, x),
    }
}

/// Translation radial factors `k_{l''}(k₄ r)` in a form ready for stable
/// per-entry contraction.
///
/// `k_{l''}` grows monotonically in `l''`, so an entry's angular sum is
/// anchored at its own largest `l''` and every other term enters as a
/// relative factor `≤ O(1)` obtained by chaining the per-order ratios
/// `step[j] = e^{expo[j] − expo[j+1]}`. Anchoring globally instead (at the
/// largest order of the whole batch) would silently underflow the entries
/// with small `l + l'` — exactly the ones that dominate the determinant.
pub(super) struct KTrans {
    mant: Vec<f64>,
    expo: Vec<f64>,
    step: Vec<f64>,
}

impl KTrans {
    pub(super) fn build(l_sum_max: u32, x: f64) -> Result<KTrans> {
        let kv = mod_sph_bessel_k_batch(l_sum_max, x)?;
        let mant: Vec<f64> = kv.iter().map(ScaledValue::mantissa).collect();
        let expo: Vec<f64> = kv.iter().map(ScaledValue::exponent).collect();
        let step: Vec<f64> = expo
            .windows(2)
            .map(|w| (w[0] - w[1]).exp())
            .collect();
        Ok(KTrans { mant, expo, step })
    }

    /// `Σ w(l'') · k_{l''}` over the table's stored terms, returned as
    /// `(mantissa_sum, exponent)` relative to `e^{exponent}` of the largest
    /// stored order. Terms arrive ascending in `l''`; relative factors are
    /// computed walking down from the anchor, then summed smallest-first.
    pub(super) fn contract(
        &self,
        terms: &[(u32, f64)],
        scratch: &mut Vec<f64>,
    ) -> Option<(f64, f64)> {
        let &(anchor, _) = terms.last()?;
        scratch.clear();
        let mut carry = 1.0_f64;
        let mut prev = anchor;
        for &(lpp, w) in terms.iter().rev() {
            for j in lpp..prev {
                carry *= self.step[j as usize];
            }
            prev = lpp;
            scratch.push(w * self.mant[lpp as usize] * carry);
        }
        let mut acc = Kahan::default();
        for &v in scratch.iter().rev() {
            acc.add(v);
        }
        Some((acc.total(), self.expo[anchor as usize]))
    }
}

fn check_common(a: f64, r: f64, min_sep: f64, wavenumber: f64, m: i32, l_max: u32) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain {
            what: "sphere radius must be positive and finite",
            value: a,
        });
    }
    if !(r > min_sep) || !r.is_finite() {
        return Err(Error::Domain {
            what: "center separation must exceed the radius sum",
            value: r,
        });
    }
    if !(wavenumber > 0.0) || !wavenumber.is_finite() {
        return Err(Error::Domain {
            what: "wavenumber must be positive and finite",
            value: wavenumber,
        });
    }
    if m.unsigned_abs() > l_max {
        return Err(Error::Domain {
            what: "magnetic quantum number exceeds the l_max truncation",
            value: f64::from(m),
        });
    }
    Ok(())
}

/// Dense per-`m` coupling block on the Wick-rotated axis for two collinear
/// spheres that may differ in radius and boundary condition: row factors
/// from `(a_row, bc_row)`, column factors from `(a_col, bc_col)`, and
/// translation factors at separation `r`.
///
/// Entry `(l, l')` (offset by `|m|`) is
/// `√((2l+1)(2l'+1)) · num(l)/den(l') · Σ_{l''} w(l,l',l'',m) k_{l''}(k₄ r)`.
pub(crate) fn coupling_block_imag(
    a_row: f64,
    bc_row: Bc,
    a_col: f64,
    bc_col: Bc,
    r: f64,
    k4: f64,
    m: i32,
    l_max: u32,
) -> Result<RealMatrix> {
    check_common(a_row.min(a_col), r, a_row + a_col, k4, m, l_max)?;
    let m_abs = m.unsigned_abs();
    let num = numerators_imag(bc_row, l_max, k4 * a_row)?;
    let den = denominators_imag(bc_col, l_max, k4 * a_col)?;
    let table = coupling_table(m, l_max);
    let ktr = KTrans::build(2 * l_max, k4 * r)?;
    let dim = (l_max - m_abs + 1) as usize;
    let mut out = RealMatrix::zeros(dim);
    let mut scratch: Vec<f64> = Vec::with_capacity(2 * l_max as usize + 1);
    for l in m_abs..=l_max {
        for lp in m_abs..=l_max {
            let Some((s, e)) = ktr.contract(table.terms(l, lp), &mut scratch) else {
                continue;
            };
            let sv = (num[l as usize] / den[lp as usize])
                * ScaledValue::from_parts(table.pref(l, lp) * s, e);
            let v = sv.to_f64();
            debug_assert!(v.is_finite(), "coupling entry left the f64 range");
            out.set((l - m_abs) as usize, (lp - m_abs) as usize, v);
        }
    }
    Ok(out)
}

/// The bare coupling block `A^{(m)}(i k₄)` for two identical collinear
/// spheres (radius `a`, boundary condition `bc`, center separation `r`).
///
/// This is the *coupling* species of block: its diagonal is the `l = l'`
/// coupling strength, not 1. The mirror-symmetric determinants come from
/// [`halfdomain_matrices`]; the two-sphere determinant itself factorizes as
/// `det(1 − A)·det(1 + A)`.
pub fn assemble_two_sphere_mblock(
    a: f64,
    r: f64,
    k4: f64,
    m: i32,
    l_max: u32,
    bc: Bc,
) -> Result<MBlock> {
    let block = coupling_block_imag(a, bc, a, bc, r, k4, m, l_max)?;
    Ok(MBlock {
        m: Some(m),
        l_min: m.unsigned_abs(),
        l_max,
        k: KAxis::Imaginary(k4),
        data: BlockData::Real(block),
    })
}

/// The two half-domain matrices for a sphere above a plate, per `m`.
///
/// A plate at distance `L` from a sphere of radius `a` is equivalent to the
/// sphere plus its mirror image at center separation `r = 2(L + a)`; the
/// mirror parity splits the determinant. Returns `(M_D, M_N)` where
/// `M_D = 1 − A^{(m)}` belongs to the Dirichlet plate and `M_N = 1 + A^{(m)}`
/// to the Neumann plate, with `A^{(m)}` the sphere–image coupling block
/// carrying `sphere_bc` on both factors. Both are full-matrix species
/// (diagonal `1 ∓ A_ll`).
pub fn halfdomain_matrices(
    a: f64,
    r: f64,
    k4: f64,
    m: i32,
    l_max: u32,
    sphere_bc: Bc,
) -> Result<(MBlock, MBlock)> {
    let c = coupling_block_imag(a, sphere_bc, a, sphere_bc, r, k4, m, l_max)?;
    let n = c.n();
    let mut md = RealMatrix::zeros(n);
    let mut mn = RealMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            md.set(i, j, delta - c.get(i, j));
            mn.set(i, j, delta + c.get(i, j));
        }
    }
    let wrap = |data: RealMatrix| MBlock {
        m: Some(m),
        l_min: m.unsigned_abs(),
        l_max,
        k: KAxis::Imaginary(k4),
        data: BlockData::Real(data),
    };
    Ok((wrap(md), wrap(mn)))
}

/// `i^n` for any integer `n`.
pub(super) fn ipow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Real-axis radial factors at the sphere surface: regular numerators
/// (real) and outgoing denominators (complex). Neumann uses the Riccati
/// derivatives `(x j_l)' = x j_{l−1} − l j_l` (with `j_{−1} = cos x / x`)
/// and `(x h_l)' = x h_{l−1} − l h_l` (with `h_{−1} = e^{ix}/x`).
pub(super) fn radial_real(bc: Bc, l_max: u32, x: f64) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let j = sph_bessel_j_batch(l_max, x)?;
    let h = sph_hankel1_batch(l_max, x)?;
    match bc {
        Bc::Dirichlet => Ok((j, h)),
        Bc::Neumann => {
            let mut num = Vec::with_capacity(j.len());
            let mut den = Vec::with_capacity(h.len());
            for l in 0..=l_max as usize {
                let jm1 = if l == 0 { x.cos() / x } else { j[l - 1] };
                let hm1 = if l == 0 {
                    Complex64::new(0.0, x).exp() / x
                } else {
                    h[l - 1]
                };
                num.push(x * jm1 - (l as f64) * j[l]);
                den.push(x * hm1 - (l as f64) * h[l]);
            }
            Ok((num, den))
        }
    }
}

/// The full real-axis block `M^{(m)}(k) = 1 − A₁₂ A₂₁` for two identical
/// collinear spheres — the object whose determinant phase feeds the
/// mode-counting function.
///
/// `A₁₂` entries are `i^{2m+l'−l} √((2l+1)(2l'+1)) · num(l)/den(l') ·
/// Σ_{l''} w · i^{l''} h_{l''}(kr)`; `A₂₁` differs by `(−i)^{l''}` (the
/// translation direction is reversed). This is a full-matrix species block
/// with complex entries; keep `l_max` moderate (a few times `k·a`) — the
/// open channels converge quickly and very large orders have no physical
/// weight on the real axis.
pub fn two_sphere_real_k_mblock(
    a: f64,
    r: f64,
    k: f64,
    m: i32,
    l_max: u32,
    bc: Bc,
) -> Result<MBlock> {
    check_common(a, r, 2.0 * a, k, m, l_max)?;
    let m_abs = m.unsigned_abs();
    let (num, den) = radial_real(bc, l_max, k * a)?;
    let h_trans = sph_hankel1_batch(2 * l_max, k * r)?;
    let table = coupling_table(m, l_max);
    let dim = (l_max - m_abs + 1) as usize;

    let mut a12 = CplxMatrix::zeros(dim);
    let mut a21 = CplxMatrix::zeros(dim);
    for l in m_abs..=l_max {
        for lp in m_abs..=l_max {
            let (mut s12_re, mut s12_im) = (Kahan::default(), Kahan::default());
            let (mut s21_re, mut s21_im) = (Kahan::default(), Kahan::default());
            for &(lpp, w) in table.terms(l, lp) {
                let fwd = ipow(i64::from(lpp)) * h_trans[lpp as usize] * w;
                let bwd = ipow(-i64::from(lpp)) * h_trans[lpp as usize] * w;
                s12_re.add(fwd.re);
                s12_im.add(fwd.im);
                s21_re.add(bwd.re);
                s21_im.add(bwd.im);
            }
            let phase = ipow(2 * i64::from(m) + i64::from(lp) - i64::from(l));
            let front =
                phase * table.pref(l, lp) * num[l as usize] / den[lp as usize];
            let (i, j) = ((l - m_abs) as usize, (lp - m_abs) as usize);
            a12.set(i, j, front * Complex64::new(s12_re.total(), s12_im.total()));
            a21.set(i, j, front * Complex64::new(s21_re.total(), s21_im.total()));
        }
    }

    let prod = a12.mul(&a21);
    let mut mm = CplxMatrix::identity(dim);
    for i in 0..dim {
        for j in 0..dim {
            let v = mm.get(i, j) - prod.get(i, j);
            mm.set(i, j, v);
        }
    }
    Ok(MBlock {
        m: Some(m),
        l_min: m_abs,
        l_max,
        k: KAxis::Real(k),
        data: BlockData::Complex(mm),
    })
}
