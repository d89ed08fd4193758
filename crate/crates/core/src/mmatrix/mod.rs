//! Assembly of the truncated inverse multi-scattering matrix.
//!
//! The scattering description of non-overlapping spheres couples partial
//! waves `(l, m)` on each sphere through translation coefficients built from
//! spherical Bessel/Hankel radial factors and Wigner-3j angular weights. The
//! modules here produce the dense truncated matrix `M = 1 + A` in the forms
//! the energy integrals consume:
//!
//! * [`assemble_general_imag_k`] — any validated geometry, Wick-rotated axis
//!   (`k = i·k₄`): all entries real by construction (real-harmonic basis, a
//!   determinant-preserving change of basis), exponent-scaled internally so
//!   no intermediate over/underflows even at hundreds of partial waves.
//! * [`assemble_general_real_k`] — any geometry, real wavenumber, complex
//!   entries (the phase of `det M(k)` carries the mode-counting function).
//! * [`assemble_two_sphere_mblock`] / [`halfdomain_matrices`] — the fast
//!   path for two identical collinear spheres, where the matrix splits into
//!   independent blocks per magnetic quantum number `m` and each block's
//!   determinant factorizes into mirror-symmetric and antisymmetric halves.
//! * [`two_sphere_real_k_mblock`] — the per-`m` real-axis reduction used by
//!   the fermionic mode-counting integral.

mod coupling;
mod general;
mod two_sphere;

pub(crate) use coupling::Kahan;
pub(crate) use two_sphere::coupling_block_imag;
pub use general::{assemble_general_imag_k, assemble_general_real_k};
pub use two_sphere::{
    assemble_two_sphere_mblock, halfdomain_matrices, two_sphere_real_k_mblock,
};

use crate::linalg::{CplxMatrix, RealMatrix};

/// Which axis of the complex wavenumber plane a block was assembled on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KAxis {
    /// Wick-rotated axis: the stored value is `k₄ > 0`, `k = i·k₄`.
    Imaginary(f64),
    /// Physical axis: the stored value is `k > 0`.
    Real(f64),
}

/// One scattering channel: sphere `j`, total angular momentum `l`, magnetic
/// quantum number `m`.
///
/// Flattened matrices order channels lexicographically by `(j, l, m)` with
/// `m = −l…l`; the ordering is stable across runs and is what the CSV block
/// dump labels. On the Wick-rotated axis the `m`-channels are real-harmonic:
/// `m < 0` labels the `sin(|m|φ)` combination, `m ≥ 0` the `cos(mφ)` one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelIndex {
    /// Sphere index into the geometry's sphere list.
    pub j: usize,
    /// Total angular momentum, `0 ≤ l ≤ l_max`.
    pub l: u32,
    /// Magnetic quantum number, `|m| ≤ l`.
    pub m: i32,
}

impl std::fmt::Display for ChannelIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "j{}l{}m{}", self.j, self.l, self.m)
    }
}

/// The lexicographic `(j, l, m)` channel list for `n_spheres` spheres
/// truncated at `l_max`. Length is `n_spheres · (l_max+1)²`.
pub fn channels(n_spheres: usize, l_max: u32) -> Vec<ChannelIndex> {
    let per = ((l_max + 1) * (l_max + 1)) as usize;
    let mut out = Vec::with_capacity(n_spheres * per);
    for j in 0..n_spheres {
        for l in 0..=l_max {
            for m in -(l as i32)..=(l as i32) {
                out.push(ChannelIndex { j, l, m });
            }
        }
    }
    out
}

/// Dense entries of an assembled block: real on the Wick-rotated axis,
/// complex on the physical axis.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockData {
    /// Real entries (imaginary-axis assembly).
    Real(RealMatrix),
    /// Complex entries (real-axis assembly).
    Complex(CplxMatrix),
}

/// An assembled matrix block plus the indexing metadata needed to interpret
/// it.
///
/// Two species share this container: the *full* matrix `M` (general and
/// half-domain assemblies; diagonal exactly 1) and the bare two-sphere
/// coupling block `A^{(m)}` returned by [`assemble_two_sphere_mblock`]
/// (whose diagonal is the `l = l'` coupling, not 1). Each constructor
/// documents which species it returns.
#[derive(Debug, Clone, PartialEq)]
pub struct MBlock {
    /// Fixed magnetic quantum number for two-sphere reductions; `None` for
    /// general assemblies that span all `(l, m)` channels.
    pub m: Option<i32>,
    /// Smallest `l` present (`|m|` for fixed-`m` blocks, else 0).
    pub l_min: u32,
    /// Truncation used.
    pub l_max: u32,
    /// Wavenumber and axis the block was evaluated at.
    pub k: KAxis,
    /// The entries.
    pub data: BlockData,
}

impl MBlock {
    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        match &self.data {
            BlockData::Real(m) => m.n(),
            BlockData::Complex(m) => m.n(),
        }
    }

    /// Borrow the real entries; panics if the block is complex.
    pub fn as_real(&self) -> &RealMatrix {
        match &self.data {
            BlockData::Real(m) => m,
            BlockData::Complex(_) => panic!("block holds complex entries"),
        }
    }

    /// Borrow the complex entries; panics if the block is real.
    pub fn as_complex(&self) -> &CplxMatrix {
        match &self.data {
            BlockData::Complex(m) => m,
            BlockData::Real(_) => panic!("block holds real entries"),
        }
    }
}
