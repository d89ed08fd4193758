//! Composite Gauss–Legendre quadrature on the Wick-rotated axis.
//!
//! The energy integrands are smooth on `(0, k_max]` but have two distinct
//! scales: a knee near `k₄ ~ 1/L` and a flattening toward `k₄ → 0`. A
//! composite rule with panels that shrink geometrically toward zero resolves
//! both without wasting nodes, and the Gauss nodes are interior so the rule
//! never evaluates `k₄ = 0` (where individual matrix entries diverge even
//! though the integrand's limit is finite).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Quadrature plan for the Wick-rotated energy integrals, plus the knobs
/// that control partial-wave convergence at each node.
///
/// The rule is fixed by construction: `panels` Gauss–Legendre panels on
/// `(0, k_max]` whose widths shrink geometrically (ratio 2) toward zero,
/// `nodes_per_panel` nodes each. An analytic bound on the `(k_max, ∞)` tail
/// is folded into the reported quadrature error.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Upper integration limit (the tail beyond is bounded analytically).
    pub k_max: f64,
    /// Number of geometric panels on `(0, k_max]`.
    pub panels: usize,
    /// Gauss–Legendre nodes per panel.
    pub nodes_per_panel: usize,
    /// Relative tolerance used for the tail warning: a tail bound exceeding
    /// `rel_tol · |value|` raises the flag on the result.
    pub rel_tol: f64,
    /// Safety margin added to the partial-wave truncation heuristic.
    pub safety: u32,
    /// Fixed initial truncation override; `None` chooses per node from the
    /// truncation heuristic.
    pub l_max_init: Option<u32>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            k_max: 10.0,
            panels: 8,
            nodes_per_panel: 16,
            rel_tol: 1e-8,
            safety: 4,
            l_max_init: None,
        }
    }
}

impl QuadratureSpec {
    /// The default plan for a geometry whose smallest surface-to-surface
    /// gap is `gap`: `k_max = 10/gap`, beyond which the integrand has
    /// decayed by roughly `e^{−20}`.
    pub fn for_gap(gap: f64) -> Self {
        QuadratureSpec {
            k_max: 10.0 / gap,
            ..QuadratureSpec::default()
        }
    }

    /// Validate the plan's parameters.
    pub fn validate(&self) -> Result<()> {
        if !(self.k_max > 0.0) || !self.k_max.is_finite() {
            return Err(Error::Domain {
                what: "quadrature k_max must be positive and finite",
                value: self.k_max,
            });
        }
        if self.panels == 0 {
            return Err(Error::InvalidInput("quadrature needs at least one panel".into()));
        }
        if self.nodes_per_panel < 2 {
            return Err(Error::InvalidInput(
                "quadrature needs at least two nodes per panel".into(),
            ));
        }
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::Domain {
                what: "quadrature rel_tol must be positive and finite",
                value: self.rel_tol,
            });
        }
        Ok(())
    }

    /// Panel edges `[0, k_max·2^{1−p}, …, k_max/2, k_max]` — `panels + 1`
    /// ascending values starting at exactly 0 and ending at exactly `k_max`.
    pub fn panel_edges(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(self.panels + 1);
        edges.push(0.0);
        for j in 1..=self.panels {
            let scale = 2.0_f64.powi(j as i32 - self.panels as i32);
            edges.push(self.k_max * scale);
        }
        edges
    }
}

/// Gauss–Legendre nodes and weights on `(−1, 1)`, ascending nodes.
/// Computed by Newton iteration on the Legendre recurrence and cached
/// per order; the computation is deterministic, so repeated calls are
/// bit-identical.
pub(crate) fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(hit) = cache.read().expect("gauss cache poisoned").get(&n) {
        return Arc::clone(hit);
    }
    let built = Arc::new(compute_gauss_legendre(n));
    let mut map = cache.write().expect("gauss cache poisoned");
    if let Some(hit) = map.get(&n) {
        return Arc::clone(hit);
    }
    map.insert(n, Arc::clone(&built));
    built
}

/// Legendre `P_n(x)` and its derivative via the three-term recurrence.
fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P'_n from the standard derivative identity.
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in ± pairs; solve the positive half and mirror.
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess for the i-th root (descending order).
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the (i+1)-th largest root: store mirrored pair.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        // The middle root is exactly zero; fix it up to avoid -0.0.
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_and_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

/// Affine image of the reference nodes on panel `(lo, hi)`:
/// `(position, weight)` pairs, ascending positions.
pub(crate) fn panel_nodes(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(n);
    let mid = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    gl.0.iter()
        .zip(gl.1.iter())
        .map(|(&x, &w)| (mid + half * x, half * w))
        .collect()
}
