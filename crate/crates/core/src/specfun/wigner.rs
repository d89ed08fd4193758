//! Wigner 3j symbols, evaluated exactly.
//!
//! The translation-coefficient sums feeding the scattering matrix alternate
//! in sign and reach angular momenta of a few hundred at small separations;
//! floating-point recurrences lose digits exactly where accuracy matters. The
//! evaluator below therefore works in exact integer arithmetic end to end:
//! the Racah single-sum is rewritten as an alternating sum of products of
//! three binomial coefficients (all integers), and the final value is
//! `sign · √(p/q)` for one exact integer ratio `p/q`, converted to `f64` with
//! explicit bit-shift scaling. Nothing ever rounds until the last step, so
//! results keep full double precision at any `l` this crate can reach.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

/// Growable shared factorial table.
fn factorial(n: usize) -> BigInt {
    static TABLE: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| RwLock::new(vec![BigInt::from(1u32)]));
    {
        let t = table.read().unwrap();
        if n < t.len() {
            return t[n].clone();
        }
    }
    let mut t = table.write().unwrap();
    while t.len() <= n {
        let next = t.last().unwrap() * BigInt::from(t.len());
        t.push(next);
    }
    t[n].clone()
}

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    factorial(n as usize) / (factorial(k as usize) * factorial((n - k) as usize))
}

/// `√(num/den)` for exact nonnegative integers, accurate to ~1 ulp.
///
/// The ratio is scaled by an even power of two so the integer quotient keeps
/// ~140 significant bits, then square-rooted in `f64` with the exponent
/// reattached — no intermediate ever overflows or becomes inf/inf.
fn big_ratio_sqrt(num: &BigInt, den: &BigInt) -> f64 {
    debug_assert!(!num.is_negative() && den.is_positive());
    if num.is_zero() {
        return 0.0;
    }
    let diff = num.bits() as i64 - den.bits() as i64;
    let mut two_s = (140 - diff).max(0);
    two_s += two_s & 1; // even shift so the √ halves it exactly
    let q: BigInt = (num << two_s as usize) / den;
    let qb = q.bits() as i64;
    let drop = (qb - 53).max(0);
    let top = (&q >> drop as usize).to_f64().expect("53-bit integer fits f64");
    // num/den = top · 2^{drop − two_s}
    let mut e = drop - two_s;
    let mantissa = if e % 2 == 0 {
        top
    } else {
        e -= 1;
        top * 2.0
    };
    mantissa.sqrt() * ((e / 2) as f64).exp2()
}

type Key = (u32, u32, u32, i32, i32, i32);

fn cache() -> &'static RwLock<HashMap<Key, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The Wigner 3j symbol `(l1 l2 l3; m1 m2 m3)`.
///
/// Returns exactly `0.0` whenever a selection rule fails: `m1+m2+m3 ≠ 0`,
/// `|m_i| > l_i`, the triangle inequality is violated, or (for the all-zero
/// `m` column) `l1+l2+l3` is odd. Results are memoized; the cache is
/// transparent and thread-safe, keeping evaluation deterministic.
pub fn wigner_3j(l1: u32, l2: u32, l3: u32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0
        || m1.unsigned_abs() > l1
        || m2.unsigned_abs() > l2
        || m3.unsigned_abs() > l3
    {
        return 0.0;
    }
    let (lo, hi) = (l1.abs_diff(l2), l1 + l2);
    if l3 < lo || l3 > hi {
        return 0.0;
    }
    if m1 == 0 && m2 == 0 && (l1 + l2 + l3) % 2 == 1 {
        return 0.0;
    }

    let key: Key = (l1, l2, l3, m1, m2, m3);
    if let Some(&v) = cache().read().unwrap().get(&key) {
        return v;
    }

    let (l1, l2, l3) = (l1 as i64, l2 as i64, l3 as i64);
    let (m1, m2, m3) = (m1 as i64, m2 as i64, m3 as i64);

    // Alternating Racah sum in all-integer binomial form:
    //   Σ_k (−1)^k · C(l1+l2−l3, k) · C(l1−l2+l3, l1−m1−k) · C(−l1+l2+l3, l2+m2−k)
    let a = l1 + l2 - l3;
    let b = l1 - m1;
    let c = l2 + m2;
    let d = l3 - l2 + m1;
    let e = l3 - l1 - m2;
    let k_min = 0.max(-d).max(-e);
    let k_max = a.min(b).min(c);
    let mut sum = BigInt::zero();
    for k in k_min..=k_max {
        let term = binomial(a, k) * binomial(l1 - l2 + l3, b - k) * binomial(-l1 + l2 + l3, c - k);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let value = if sum.is_zero() {
        0.0
    } else {
        // 3j² = sum² · Π(l_i ± m_i)! / [ (l1+l2−l3)!·(l1−l2+l3)!·(−l1+l2+l3)!·(L+1)! ]
        let num = &sum * &sum
            * factorial((l1 + m1) as usize)
            * factorial((l1 - m1) as usize)
            * factorial((l2 + m2) as usize)
            * factorial((l2 - m2) as usize)
            * factorial((l3 + m3) as usize)
            * factorial((l3 - m3) as usize);
        let den = factorial(a as usize)
            * factorial((l1 - l2 + l3) as usize)
            * factorial((-l1 + l2 + l3) as usize)
            * factorial((l1 + l2 + l3 + 1) as usize);
        let magnitude = big_ratio_sqrt(&num, &den);
        let phase_neg = (l1 - l2 - m3).rem_euclid(2) == 1;
        let sign_neg = sum.is_negative();
        if phase_neg != sign_neg {
            -magnitude
        } else {
            magnitude
        }
    };

    cache().write().unwrap().insert(key, value);
    value
}
