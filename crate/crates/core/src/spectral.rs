//! Convergence control for log-determinants and continuous phase tracing.
//!
//! The physics lives in matrices truncated at a finite angular momentum
//! `l_max`; this module owns the policy for choosing and adaptively growing
//! that truncation, and — on the real wavenumber axis — for extracting a
//! *continuous* phase of `det M(k)` from principal-value samples, which is
//! what turns determinants into the mode-counting function
//! `N(k) = −phase(k)/π`.

use crate::error::{Error, Result};

/// Hard ceiling on the partial-wave truncation. Beyond this the matrices
/// (and the angular-coupling tables behind them) grow too fast to be useful;
/// configurations that need more are reported as non-convergent.
pub const L_MAX_CAP: u32 = 220;

/// One log-determinant sample at fixed wavenumber and truncation, as
/// produced by an assembly-plus-factorization closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetSample {
    /// `ln |det|`.
    pub ln_abs: f64,
    /// Sign of the determinant (`±1.0`), real-axis callers may pass `1.0`.
    pub sign: f64,
    /// Conditioning proxy (max/min LU pivot magnitude over all blocks).
    pub condition: f64,
}

/// A converged log-determinant with its convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDetResult {
    /// `ln |det|` at the accepted truncation.
    pub value: f64,
    /// Sign of the determinant at the accepted truncation.
    pub sign: f64,
    /// Truncation the value was accepted at.
    pub l_max: u32,
    /// Achieved change between the last two truncations (absolute).
    pub delta: f64,
    /// Conditioning proxy reported by the final evaluation.
    pub condition_estimate: f64,
}

/// Truncation heuristic: partial waves up to `l ≈ (e/2)·k_max·a` contribute
/// at wavenumber cutoff `k_max` for a sphere of radius `a`; `safety` extra
/// waves are added on top, and the result is floored at 3 so even tiny
/// spheres keep a sensible minimum basis. The default safety margin is 2.
///
/// The result is *not* capped here — [`converged_log_det`] clamps to
/// [`L_MAX_CAP`] and reports failure if the cap binds.
pub fn choose_l_max(a: f64, k_max: f64, safety: u32) -> u32 {
    let estimate = (std::f64::consts::E / 2.0 * k_max * a).ceil();
    let estimate = if estimate.is_finite() && estimate >= 0.0 {
        estimate as u32
    } else {
        u32::MAX / 2
    };
    (estimate + safety).max(3)
}

/// Grow the truncation until the log-determinant settles.
///
/// `eval(k4, l_max)` must return the *full* log-determinant of the system at
/// that truncation (summed over symmetry blocks if applicable). The ladder
/// evaluates `l_max_init`, then `+4`, doubling the increment each step
/// (`+8`, `+16`, …), clamped at `cap`; it accepts as soon as the change
/// between consecutive evaluations satisfies
/// `|Δ| ≤ rtol·|value|` or `|Δ| ≤ 1e-15`
/// (the absolute floor covers decoupled configurations whose log-det is
/// already at roundoff). Re-invocation is bit-identical: the ladder is
/// deterministic and the closure is required to be pure.
pub fn converged_log_det(
    mut eval: impl FnMut(f64, u32) -> Result<DetSample>,
    k4: f64,
    l_max_init: u32,
    rtol: f64,
    cap: u32,
) -> Result<LogDetResult> {
    if !(rtol > 0.0) {
        return Err(Error::Domain {
            what: "relative tolerance",
            value: rtol,
        });
    }
    let l = l_max_init.min(cap);
    let mut prev = eval(k4, l)?;
    let mut prev_l = l;
    let mut increment = 4u32;
    let mut last_delta = f64::INFINITY;
    loop {
        let next_l = (prev_l.saturating_add(increment)).min(cap);
        if next_l == prev_l {
            // cap reached without the tolerance being met
            return Err(Error::NoConvergence {
                l_max_cap: cap,
                last_delta,
            });
        }
        let cur = eval(k4, next_l)?;
        let delta = (cur.ln_abs - prev.ln_abs).abs();
        last_delta = delta;
        if delta <= rtol * cur.ln_abs.abs() || delta <= 1e-15 {
            return Ok(LogDetResult {
                value: cur.ln_abs,
                sign: cur.sign,
                l_max: next_l,
                delta,
                condition_estimate: cur.condition,
            });
        }
        prev = cur;
        prev_l = next_l;
        increment = increment.saturating_mul(2);
    }
}

/// A continuous phase of `det M(k)` along an ascending real-`k` grid.
///
/// The phase is anchored to `0` at `k → 0⁺` (where the scattering
/// determinant tends to one) and unwrapped by nearest-branch tracking, with
/// the grid refined until every adjacent step is below `π/2` — half the
/// winding ambiguity, so no branch can be silently skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrace {
    /// Ascending wavenumbers (refined grid).
    pub k: Vec<f64>,
    /// Continuous unwrapped phase at each `k`.
    pub phase: Vec<f64>,
    /// Largest adjacent phase step after refinement.
    pub max_step: f64,
    /// Number of determinant evaluations spent.
    pub nodes_used: usize,
}

impl PhaseTrace {
    /// The mode-counting function `N(k) = −phase(k)/π`.
    pub fn counting_function(&self) -> Vec<f64> {
        self.phase.iter().map(|p| -p / std::f64::consts::PI).collect()
    }
}

/// Trace the continuous phase of `det M(k)` over `k_grid` (ascending,
/// positive), refining adjacent intervals whose wrapped phase difference
/// reaches `π/2` by bisection until resolved or `max_nodes` evaluations are
/// spent.
///
/// `eval(k)` returns the *principal* phase `arg det M(k) ∈ (−π, π]`; the
/// unwrapping adds the multiple of `2π` nearest to the previous sample. An
/// implicit anchor `(k=0, phase=0)` precedes the first grid point, so the
/// first point itself may be refined toward zero if the phase there is
/// already large.
pub fn phase_trace(
    mut eval: impl FnMut(f64) -> Result<f64>,
    k_grid: &[f64],
    max_nodes: usize,
) -> Result<PhaseTrace> {
    if k_grid.is_empty() || k_grid[0] <= 0.0 || k_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "phase trace grid must be ascending and positive".into(),
        ));
    }
    // (k, principal phase); the k = 0 anchor is exact and never evaluated.
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(k_grid.len() + 1);
    pts.push((0.0, 0.0));
    let mut nodes_used = 0usize;
    for &k in k_grid {
        pts.push((k, eval(k)?));
        nodes_used += 1;
    }
    const LIMIT: f64 = std::f64::consts::FRAC_PI_2;
    loop {
        // find the worst unresolved interval
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..pts.len() - 1 {
            let step = wrap_pi(pts[i + 1].1 - pts[i].1).abs();
            if step >= LIMIT {
                let is_worse = worst.map_or(true, |(_, s)| step > s);
                if is_worse {
                    worst = Some((i, step));
                }
            }
        }
        let Some((i, step)) = worst else { break };
        if nodes_used >= max_nodes {
            return Err(Error::RefinementBudget {
                nodes: nodes_used,
                max_step: step,
            });
        }
        let mid = 0.5 * (pts[i].0 + pts[i + 1].0);
        if mid <= pts[i].0 || mid >= pts[i + 1].0 {
            // interval no longer splittable in f64 — give up loudly
            return Err(Error::RefinementBudget {
                nodes: nodes_used,
                max_step: step,
            });
        }
        let ph = eval(mid)?;
        nodes_used += 1;
        pts.insert(i + 1, (mid, ph));
    }
    // sequential nearest-branch unwrap from the k = 0 anchor
    let mut k = Vec::with_capacity(pts.len());
    let mut phase = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    let mut max_step: f64 = 0.0;
    k.push(0.0);
    phase.push(0.0);
    for w in pts.windows(2) {
        let step = wrap_pi(w[1].1 - w[0].1);
        acc += step;
        max_step = max_step.max(step.abs());
        k.push(w[1].0);
        phase.push(acc);
    }
    Ok(PhaseTrace {
        k,
        phase,
        max_step,
        nodes_used,
    })
}

/// Wrap an angle difference to `(−π, π]`.
fn wrap_pi(dphi: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let w = dphi.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w - two_pi
    } else {
        w
    }
}
