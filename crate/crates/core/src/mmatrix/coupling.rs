//! Cached angular coupling weights for collinear two-sphere blocks.
//!
//! At fixed magnetic quantum number `m`, every translation-matrix entry is a
//! radial sum `Σ_{l''} w^{(m)}_{l l' l''} · f_{l''}(k·r)` whose weights
//!
//! `w = (2l''+1) · 3j(l'',l',l; 0,0,0) · 3j(l'',l',l; 0,m,−m)`
//!
//! are pure angular-momentum algebra: independent of wavenumber, geometry
//! scale, and boundary condition. They are expensive (exact big-integer
//! arithmetic) but perfectly reusable, so they are computed once per
//! `(|m|, l_max)` and shared process-wide; every quadrature node then pays
//! only for radial functions and dot products.
//!
//! The table is keyed by `|m|`: negating `m` flips the sign of both lower
//! indices of the second 3j symbol, which multiplies it by
//! `(−1)^{l+l'+l''}`, and the parity selection of the first symbol forces
//! that factor to one.

use crate::specfun::wigner_3j;
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// Angular weights for all `(l, l')` pairs at fixed `|m|`.
#[derive(Debug)]
pub(crate) struct CouplingTable {
    m_abs: u32,
    l_max: u32,
    dim: usize,
    /// `√((2l+1)(2l'+1))` per `(l, l')`.
    pref: Vec<f64>,
    /// Nonzero `(l'', w)` terms per `(l, l')`, ascending in `l''`.
    terms: Vec<Vec<(u32, f64)>>,
}

impl CouplingTable {
    fn build(m_abs: u32, l_max: u32) -> Self {
        let dim = (l_max + 1 - m_abs) as usize;
        let mut pref = Vec::with_capacity(dim * dim);
        let mut terms = Vec::with_capacity(dim * dim);
        let m = m_abs as i32;
        for l in m_abs..=l_max {
            for lp in m_abs..=l_max {
                pref.push((((2 * l + 1) * (2 * lp + 1)) as f64).sqrt());
                let mut list = Vec::new();
                let lo = l.abs_diff(lp);
                let hi = l + lp;
                // parity: 3j(l'',l',l;000) vanishes unless l''+l'+l is even
                let start = if (lo + lp + l) % 2 == 0 { lo } else { lo + 1 };
                let mut lpp = start;
                while lpp <= hi {
                    let t0 = wigner_3j(lpp, lp, l, 0, 0, 0);
                    if t0 != 0.0 {
                        let tm = wigner_3j(lpp, lp, l, 0, m, -m);
                        if tm != 0.0 {
                            let w = (2 * lpp + 1) as f64 * t0 * tm;
                            list.push((lpp, w));
                        }
                    }
                    lpp += 2;
                }
                terms.push(list);
            }
        }
        Self {
            m_abs,
            l_max,
            dim,
            pref,
            terms,
        }
    }

    /// Largest `l` this table covers.
    pub(crate) fn l_max(&self) -> u32 {
        self.l_max
    }

    #[inline]
    fn idx(&self, l: u32, lp: u32) -> usize {
        debug_assert!(l >= self.m_abs && l <= self.l_max);
        debug_assert!(lp >= self.m_abs && lp <= self.l_max);
        (l - self.m_abs) as usize * self.dim + (lp - self.m_abs) as usize
    }

    /// `√((2l+1)(2l'+1))`.
    #[inline]
    pub(crate) fn pref(&self, l: u32, lp: u32) -> f64 {
        self.pref[self.idx(l, lp)]
    }

    /// The nonzero `(l'', w)` weights for `(l, l')`, ascending in `l''`.
    #[inline]
    pub(crate) fn terms(&self, l: u32, lp: u32) -> &[(u32, f64)] {
        &self.terms[self.idx(l, lp)]
    }
}

static TABLES: OnceLock<RwLock<HashMap<u32, Arc<CouplingTable>>>> = OnceLock::new();

/// Fetch (building or growing if needed) the weight table for `|m|`
/// covering at least `l_max`.
pub(crate) fn coupling_table(m: i32, l_max: u32) -> Arc<CouplingTable> {
    let m_abs = m.unsigned_abs();
    let lock = TABLES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = lock.read().expect("coupling cache poisoned").get(&m_abs) {
        if t.l_max() >= l_max {
            return Arc::clone(t);
        }
    }
    let mut map = lock.write().expect("coupling cache poisoned");
    // re-check: another thread may have grown it while we waited
    if let Some(t) = map.get(&m_abs) {
        if t.l_max() >= l_max {
            return Arc::clone(t);
        }
    }
    let built = Arc::new(CouplingTable::build(m_abs, l_max));
    map.insert(m_abs, Arc::clone(&built));
    built
}

/// Compensated accumulator (Neumaier variant) — the `l''` sums mix
/// alternating 3j signs with steeply graded magnitudes, and the plain sum
/// loses digits there. The correction term is kept in a separate register
/// rather than folded into the next addend, so a late large-magnitude
/// cancellation cannot round the accumulated correction away.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn total(&self) -> f64 {
        self.sum + self.carry
    }
}
