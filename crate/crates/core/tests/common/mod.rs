//! Shared oracle implementations for the integration suites.
//!
//! Everything here deliberately avoids the library's internal algorithms:
//! Wigner symbols come from the factorial sum (exact machine integers where
//! they fit, compensated log-factorials above) instead of the big-rational
//! path, Legendre functions from the unnormalized recurrence with explicit
//! factorial normalization, Bessel functions from the ascending power
//! series and the finite closed form valid at complex argument, and
//! determinants from cofactor expansion instead of LU. Agreement between
//! the library and these re-derivations is evidence, not tautology.

#![allow(dead_code)] // each integration target links its own subset

use krein::geometry::{Bc, Geometry, SphereSpec};
use krein::linalg::{CplxMatrix, RealMatrix};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Deterministic generator for randomized sweeps; each test owns a seed so
/// failures replay exactly.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(−1)^n` for signed `n`.
pub fn neg1(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `i^n` for signed `n`, exact.
pub fn ipow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `n!` as an exact 128-bit integer; `n ≤ 34` keeps it in range.
fn fact_u128(n: u32) -> u128 {
    assert!(n <= 34, "exact factorial path holds only through 34!");
    (1..=u128::from(n)).product::<u128>().max(1)
}

/// `n!` as the correctly rounded double of the exact integer (`n ≤ 34`).
fn fact(n: u32) -> f64 {
    fact_u128(n) as f64
}

/// `ln n!` by compensated summation of logarithms.
pub fn ln_fact(n: u32) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for k in 2..=n {
        let x = f64::from(k).ln();
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

fn triangle_violated(l1: u32, l2: u32, l3: u32) -> bool {
    l3 > l1 + l2 || l3 < l1.abs_diff(l2)
}

/// Wigner 3j symbol from the factorial sum with exact integer factorials.
/// Requires `l1 + l2 + l3 ≤ 33` so every factorial stays within `u128`;
/// that covers every translation-sum term of a truncation `l_max ≤ 8`.
pub fn three_j(l1: u32, l2: u32, l3: u32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0
        || triangle_violated(l1, l2, l3)
        || m1.unsigned_abs() > l1
        || m2.unsigned_abs() > l2
        || m3.unsigned_abs() > l3
    {
        return 0.0;
    }
    assert!(l1 + l2 + l3 + 1 <= 34, "exact 3j path exceeded; use three_j_ln");
    let (l1i, l2i, l3i) = (l1 as i32, l2 as i32, l3 as i32);

    let delta = fact(l1 + l2 - l3) * fact((l1i - l2i + l3i) as u32)
        / fact(l1 + l2 + l3 + 1)
        * fact((-l1i + l2i + l3i) as u32);
    let norm = fact((l1i + m1) as u32)
        * fact((l1i - m1) as u32)
        * fact((l2i + m2) as u32)
        * fact((l2i - m2) as u32)
        * fact((l3i + m3) as u32)
        * fact((l3i - m3) as u32);

    // summation range keeps every factorial argument nonnegative
    let t_lo = 0.max(l2i - l3i - m1).max(l1i - l3i + m2);
    let t_hi = (l1i + l2i - l3i).min(l1i - m1).min(l2i + m2);
    let mut sum = 0.0;
    for t in t_lo..=t_hi {
        let den = fact(t as u32)
            * fact((l3i - l2i + t + m1) as u32)
            * fact((l3i - l1i + t - m2) as u32)
            * fact((l1i + l2i - l3i - t) as u32)
            * fact((l1i - m1 - t) as u32)
            * fact((l2i + m2 - t) as u32);
        sum += neg1(t) / den;
    }
    neg1(l1i - l2i - m3) * (delta * norm).sqrt() * sum
}

/// Wigner 3j symbol from the same factorial sum, but through exponent-shifted
/// log-factorials, valid for any `l` that matters here (f64 accuracy ~1e-12).
pub fn three_j_ln(l1: u32, l2: u32, l3: u32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0
        || triangle_violated(l1, l2, l3)
        || m1.unsigned_abs() > l1
        || m2.unsigned_abs() > l2
        || m3.unsigned_abs() > l3
    {
        return 0.0;
    }
    let (l1i, l2i, l3i) = (l1 as i32, l2 as i32, l3 as i32);
    let lf = |n: i32| ln_fact(n as u32);

    let ln_pref = 0.5
        * (lf(l1i + l2i - l3i) + lf(l1i - l2i + l3i) + lf(-l1i + l2i + l3i)
            - lf(l1i + l2i + l3i + 1)
            + lf(l1i + m1)
            + lf(l1i - m1)
            + lf(l2i + m2)
            + lf(l2i - m2)
            + lf(l3i + m3)
            + lf(l3i - m3));

    let t_lo = 0.max(l2i - l3i - m1).max(l1i - l3i + m2);
    let t_hi = (l1i + l2i - l3i).min(l1i - m1).min(l2i + m2);
    // exponent-shift the t-sum so the largest term is e^0
    let ln_term = |t: i32| {
        ln_pref
            - lf(t)
            - lf(l3i - l2i + t + m1)
            - lf(l3i - l1i + t - m2)
            - lf(l1i + l2i - l3i - t)
            - lf(l1i - m1 - t)
            - lf(l2i + m2 - t)
    };
    let mut ln_max = f64::NEG_INFINITY;
    for t in t_lo..=t_hi {
        ln_max = ln_max.max(ln_term(t));
    }
    let mut sum = 0.0;
    for t in t_lo..=t_hi {
        sum += neg1(t) * (ln_term(t) - ln_max).exp();
    }
    neg1(l1i - l2i - m3) * ln_max.exp() * sum
}

/// Normalized θ-part `Λ_l^m(θ)` of the spherical harmonic, Condon–Shortley
/// phase, via the unnormalized `P_l^m` recurrence and explicit factorial
/// normalization. Poles are handled exactly: only `m = 0` survives there.
pub fn lambda_lm(l: u32, m: i32, theta: f64) -> f64 {
    let ma = m.unsigned_abs();
    if ma > l {
        return 0.0;
    }
    let x = theta.cos();
    let s = theta.sin();
    let p = if theta == 0.0 || theta == PI || s == 0.0 {
        if ma != 0 {
            return 0.0;
        }
        if x > 0.0 {
            1.0
        } else {
            neg1(l as i32)
        }
    } else {
        // P_ma^ma = (−1)^ma (2ma−1)!! sin^ma θ, then upward in l
        let mut pmm = 1.0;
        for k in 1..=ma {
            pmm *= -f64::from(2 * k - 1) * s;
        }
        if l == ma {
            pmm
        } else {
            let mut p_prev = pmm;
            let mut p_cur = x * f64::from(2 * ma + 1) * pmm;
            for ll in ma + 2..=l {
                let next = (f64::from(2 * ll - 1) * x * p_cur
                    - f64::from(ll + ma - 1) * p_prev)
                    / f64::from(ll - ma);
                p_prev = p_cur;
                p_cur = next;
            }
            p_cur
        }
    };
    let norm = (f64::from(2 * l + 1) / (4.0 * PI)).sqrt()
        * (0.5 * (ln_fact(l - ma) - ln_fact(l + ma))).exp();
    let v = norm * p;
    if m < 0 && ma % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Full spherical harmonic `Y_l^m(θ, φ) = Λ_l^m(θ) e^{imφ}`.
pub fn sph_harm_oracle(l: u32, m: i32, theta: f64, phi: f64) -> Complex64 {
    let lam = lambda_lm(l, m, theta);
    let arg = f64::from(m) * phi;
    Complex64::new(lam * arg.cos(), lam * arg.sin())
}

/// Spherical Bessel `j_l(z)` by its ascending power series. Every term of
/// the series is nonnegative for purely imaginary `z`, so the sum is stable
/// there at any magnitude; on the real axis cancellation limits it to
/// `|z| ≲ 6` at full accuracy — callers choose their configs accordingly.
pub fn sph_j_series(l: u32, z: Complex64) -> Complex64 {
    // z^l / (2l+1)!! as a running product to avoid overflow staging
    let mut pref = Complex64::new(1.0, 0.0);
    for k in 1..=l {
        pref *= z / f64::from(2 * k + 1);
    }
    let zz = -0.5 * z * z;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for s in 1..400 {
        term *= zz / (f64::from(s) * f64::from(2 * l + 2 * s + 1));
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    pref * sum
}

/// Outgoing spherical Hankel `h_l^{(1)}(z)` in its finite closed form
/// `(−i)^{l+1} (e^{iz}/z) Σ_{s≤l} (i/2z)^s (l+s)!/(s!(l−s)!)` — exact for
/// every `z ≠ 0` and free of cancellation on the imaginary axis, where all
/// summands share one phase. Needs `l ≤ 17` for exact factorials.
pub fn sph_h1_closed(l: u32, z: Complex64) -> Complex64 {
    let iu = Complex64::new(0.0, 1.0);
    let step = iu / (2.0 * z);
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for s in 0..=l {
        sum += power * (fact(l + s) / (fact(s) * fact(l - s)));
        power *= step;
    }
    ipow(-(i64::from(l)) - 1) * ((iu * z).exp() / z) * sum
}

/// Riccati derivative `(z j_l(z))' = z j_{l−1}(z) − l j_l(z)`, with
/// `j_{−1}(z) = cos z / z`.
pub fn riccati_j_deriv(l: u32, z: Complex64) -> Complex64 {
    let jm1 = if l == 0 {
        z.cos() / z
    } else {
        sph_j_series(l - 1, z)
    };
    z * jm1 - f64::from(l) * sph_j_series(l, z)
}

/// Riccati derivative `(z h_l(z))' = z h_{l−1}(z) − l h_l(z)`, with
/// `h_{−1}(z) = e^{iz}/z`.
pub fn riccati_h_deriv(l: u32, z: Complex64) -> Complex64 {
    let iu = Complex64::new(0.0, 1.0);
    let hm1 = if l == 0 {
        (iu * z).exp() / z
    } else {
        sph_h1_closed(l - 1, z)
    };
    z * hm1 - f64::from(l) * sph_h1_closed(l, z)
}

/// A sphere as the oracle sees it: radius, center, boundary condition.
#[derive(Debug, Clone, Copy)]
pub struct OSphere {
    pub a: f64,
    pub c: [f64; 3],
    pub bc: Bc,
}

impl OSphere {
    pub fn new(a: f64, c: [f64; 3], bc: Bc) -> Self {
        OSphere { a, c, bc }
    }
}

/// The same spheres as a validated library geometry.
pub fn geom_from(spheres: &[OSphere]) -> Geometry {
    Geometry::new(
        spheres
            .iter()
            .map(|s| SphereSpec::new(s.a, s.c, s.bc))
            .collect(),
    )
    .expect("oracle configurations are valid by construction")
}

/// Channel offset of `(l, m)` inside one sphere's `(l_max+1)²` block,
/// channels ordered `(l, m)` lexicographically with `m = −l…l`.
pub fn off(l: u32, m: i32) -> usize {
    (l * l) as usize + (l as i32 + m) as usize
}

/// Center-to-center distance and direction angles from sphere `s` toward
/// sphere `sp`.
fn pair_direction(s: &OSphere, sp: &OSphere) -> (f64, f64, f64) {
    let d = [sp.c[0] - s.c[0], sp.c[1] - s.c[1], sp.c[2] - s.c[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let (theta, phi) = if d[0] == 0.0 && d[1] == 0.0 {
        (if d[2] >= 0.0 { 0.0 } else { PI }, 0.0)
    } else {
        ((d[2] / r).clamp(-1.0, 1.0).acos(), d[1].atan2(d[0]))
    };
    (r, theta, phi)
}

/// Literal direct evaluation of the inverse multi-scattering matrix in the
/// complex spherical-harmonic channel basis at complex wavenumber `k`
/// (either axis by choosing `k` real or purely imaginary), channels ordered
/// `(sphere, l, m)` with `m = −l…l`:
///
/// ```text
/// M = 1 + A,
/// A^{jj'}_{lm,l'm'} = i^{2m+l'−l} √(4π(2l+1)(2l'+1)) (a_j/a_{j'})²
///                     · [num_l(k a_j) / den_{l'}(k a_{j'})]
///                     · Σ_{l''} √(2l''+1) i^{l''} 3j(l'',l',l;0,0,0)
///                       · 3j(l'',l',l;m−m',m',−m)
///                       · h_{l''}(k r_{jj'}) Y_{l''}^{m−m'}(θ_{jj'}, φ_{jj'})
/// ```
///
/// with the direction taken from sphere `j` toward sphere `j'`; Dirichlet
/// radial factors are `j_l / h_{l'}`, Neumann ones the Riccati derivative
/// ratio. `with_radius_ratio: false` drops the `(a_j/a_{j'})²` factor — a
/// diagonal similarity that must leave the determinant alone.
pub fn transcription_matrix(
    spheres: &[OSphere],
    k: Complex64,
    l_max: u32,
    with_radius_ratio: bool,
) -> CplxMatrix {
    let per = ((l_max + 1) * (l_max + 1)) as usize;
    let n = spheres.len() * per;
    let mut mat = CplxMatrix::identity(n);

    for (j, s) in spheres.iter().enumerate() {
        for (jp, sp) in spheres.iter().enumerate() {
            if j == jp {
                continue;
            }
            let (r, theta, phi) = pair_direction(s, sp);
            let ratio2 = if with_radius_ratio {
                (s.a / sp.a).powi(2)
            } else {
                1.0
            };
            let h_trans: Vec<Complex64> = (0..=2 * l_max)
                .map(|lpp| sph_h1_closed(lpp, k * r))
                .collect();
            for l in 0..=l_max {
                let num = match s.bc {
                    Bc::Dirichlet => sph_j_series(l, k * s.a),
                    Bc::Neumann => riccati_j_deriv(l, k * s.a),
                };
                for m in -(l as i32)..=(l as i32) {
                    let row = j * per + off(l, m);
                    for lp in 0..=l_max {
                        let den = match sp.bc {
                            Bc::Dirichlet => sph_h1_closed(lp, k * sp.a),
                            Bc::Neumann => riccati_h_deriv(lp, k * sp.a),
                        };
                        for mp in -(lp as i32)..=(lp as i32) {
                            let col = jp * per + off(lp, mp);
                            let mu = m - mp;
                            let mut acc = Complex64::new(0.0, 0.0);
                            for lpp in l.abs_diff(lp)..=l + lp {
                                let t0 = three_j(lpp, lp, l, 0, 0, 0);
                                if t0 == 0.0 {
                                    continue;
                                }
                                let tm = three_j(lpp, lp, l, mu, mp, -m);
                                if tm == 0.0 {
                                    continue;
                                }
                                acc += ipow(i64::from(lpp))
                                    * h_trans[lpp as usize]
                                    * sph_harm_oracle(lpp, mu, theta, phi)
                                    * (f64::from(2 * lpp + 1).sqrt() * t0 * tm);
                            }
                            let pref = ipow(2 * i64::from(m) + i64::from(lp) - i64::from(l))
                                * (4.0 * PI * f64::from((2 * l + 1) * (2 * lp + 1))).sqrt()
                                * ratio2
                                * num
                                / den;
                            mat.set(row, col, pref * acc);
                        }
                    }
                }
            }
        }
    }
    mat
}

/// Unitary change to the real-harmonic channel basis (per `l`: cos-type
/// channels stored at `m ≥ 0`, sin-type at `m < 0`), returning the real
/// part of the transformed matrix together with the largest absolute
/// imaginary residue of any entry.
///
/// With `|c_0⟩ = |0⟩`, `|c_m⟩ = ((−1)^m|m⟩ + |−m⟩)/√2`,
/// `|s_m⟩ = i((−1)^m|m⟩ − |−m⟩)/√2`, the transform of an operator is
/// `R = conj(V) · M · Vᵀ` where `V[real, cplx]` holds the coefficient of the
/// complex channel in the real one.
pub fn to_real_basis(m: &CplxMatrix, n_spheres: usize, l_max: u32) -> (RealMatrix, f64) {
    let per = ((l_max + 1) * (l_max + 1)) as usize;
    let n = n_spheres * per;
    assert_eq!(m.n(), n, "matrix dimension must match the channel count");

    let iu = Complex64::new(0.0, 1.0);
    let mut v = CplxMatrix::zeros(n);
    for j in 0..n_spheres {
        let base = j * per;
        for l in 0..=l_max {
            v.set(base + off(l, 0), base + off(l, 0), Complex64::new(1.0, 0.0));
            for mm in 1..=(l as i32) {
                let sgn = neg1(mm);
                let c = FRAC_1_SQRT_2;
                let (cos_r, sin_r) = (base + off(l, mm), base + off(l, -mm));
                let (pos_c, neg_c) = (base + off(l, mm), base + off(l, -mm));
                v.set(cos_r, pos_c, Complex64::new(sgn * c, 0.0));
                v.set(cos_r, neg_c, Complex64::new(c, 0.0));
                v.set(sin_r, pos_c, iu * (sgn * c));
                v.set(sin_r, neg_c, -iu * c);
            }
        }
    }
    let v_conj = CplxMatrix::from_fn(n, |i, j| v.get(i, j).conj());
    let v_t = CplxMatrix::from_fn(n, |i, j| v.get(j, i));
    let t = v_conj.mul(m).mul(&v_t);

    let mut resid = 0.0_f64;
    let out = RealMatrix::from_fn(n, |i, j| {
        let z = t.get(i, j);
        resid = resid.max(z.im.abs());
        z.re
    });
    (out, resid)
}

/// Determinant by cofactor expansion along rows, real version (`n ≤ 8`).
pub fn cofactor_det_real(m: &RealMatrix) -> f64 {
    assert!(m.n() <= 8, "cofactor expansion is for small matrices only");
    fn rec(m: &RealMatrix, row: usize, used: u32) -> f64 {
        let n = m.n();
        if row == n {
            return 1.0;
        }
        let mut acc = 0.0;
        let mut sign = 1.0;
        for col in 0..n {
            if used & (1 << col) != 0 {
                continue;
            }
            let a = m.get(row, col);
            if a != 0.0 {
                acc += sign * a * rec(m, row + 1, used | (1 << col));
            }
            sign = -sign;
        }
        acc
    }
    rec(m, 0, 0)
}

/// Determinant by cofactor expansion along rows, complex version (`n ≤ 8`).
pub fn cofactor_det_cplx(m: &CplxMatrix) -> Complex64 {
    assert!(m.n() <= 8, "cofactor expansion is for small matrices only");
    fn rec(m: &CplxMatrix, row: usize, used: u32) -> Complex64 {
        let n = m.n();
        if row == n {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut sign = 1.0;
        for col in 0..n {
            if used & (1 << col) != 0 {
                continue;
            }
            let a = m.get(row, col);
            if a != Complex64::new(0.0, 0.0) {
                acc += sign * a * rec(m, row + 1, used | (1 << col));
            }
            sign = -sign;
        }
        acc
    }
    rec(m, 0, 0)
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs_c(m: &CplxMatrix) -> f64 {
    m.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest absolute entry of a real matrix.
pub fn max_abs_r(m: &RealMatrix) -> f64 {
    m.entries().iter().map(|x| x.abs()).fold(0.0, f64::max)
}
