//! Obstacle configurations: validated sphere arrangements and the symmetry
//! detection that lets downstream code pick the fastest determinant path.
//!
//! All lengths are in one arbitrary unit `U` chosen by the caller; energies
//! downstream come out in `ħc/U` (`ħ = c = 1` internally). Every sphere's
//! local coordinate frame is aligned with the global frame, so orientation
//! dependence enters purely through the angles of the center-to-center
//! separation vectors.

use crate::error::{Error, Result};

/// Boundary condition carried by a sphere (or by the plate in the
/// sphere–plate construction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bc {
    /// Field vanishes on the surface.
    Dirichlet,
    /// Normal derivative vanishes on the surface.
    Neumann,
}

impl std::str::FromStr for Bc {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" | "d" | "dirichlet" | "Dirichlet" => Ok(Bc::Dirichlet),
            "N" | "n" | "neumann" | "Neumann" => Ok(Bc::Neumann),
            other => Err(Error::InvalidInput(format!(
                "unknown boundary condition {other:?} (expected D or N)"
            ))),
        }
    }
}

impl std::fmt::Display for Bc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bc::Dirichlet => write!(f, "D"),
            Bc::Neumann => write!(f, "N"),
        }
    }
}

/// One sphere: radius, center, boundary condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSpec {
    /// Radius, > 0.
    pub radius: f64,
    /// Center coordinates.
    pub center: [f64; 3],
    /// Boundary condition on the surface.
    pub bc: Bc,
}

impl SphereSpec {
    /// Convenience constructor.
    pub fn new(radius: f64, center: [f64; 3], bc: Bc) -> Self {
        Self { radius, center, bc }
    }
}

/// Symmetry classification used to dispatch the energy integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryTag {
    /// No exploitable symmetry — full matrix assembly.
    None,
    /// Exactly two spheres; the problem block-diagonalizes over the magnetic
    /// quantum number along the center axis. `identical` additionally allows
    /// the even/odd (mirror) factorization of each m-block determinant.
    CollinearTwoSphere {
        /// Radii equal to 1e-12 relative and boundary conditions equal.
        identical: bool,
    },
    /// Sphere in front of an infinite plate, realized as a mirror pair.
    SpherePlate,
}

/// A validated arrangement of non-overlapping spheres.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    spheres: Vec<SphereSpec>,
    symmetry: SymmetryTag,
    /// For `SpherePlate`: the boundary condition of the plate itself.
    plate_bc: Option<Bc>,
}

impl Geometry {
    /// Validate a sphere list: non-empty, positive finite radii, finite
    /// centers, strict pairwise non-overlap (touching is rejected — the
    /// scattering expansion requires an open gap between surfaces).
    pub fn new(spheres: Vec<SphereSpec>) -> Result<Self> {
        if spheres.is_empty() {
            return Err(Error::EmptyGeometry);
        }
        for (index, s) in spheres.iter().enumerate() {
            if !(s.radius > 0.0) || !s.radius.is_finite() {
                return Err(Error::BadRadius {
                    index,
                    radius: s.radius,
                });
            }
            if s.center.iter().any(|c| !c.is_finite()) {
                return Err(Error::BadCenter { index });
            }
        }
        for i in 0..spheres.len() {
            for j in (i + 1)..spheres.len() {
                let sep = dist(spheres[i].center, spheres[j].center);
                let sum = spheres[i].radius + spheres[j].radius;
                if sep <= sum {
                    return Err(Error::Overlap {
                        i,
                        j,
                        separation: sep,
                        radius_sum: sum,
                    });
                }
            }
        }
        let symmetry = classify(&spheres);
        Ok(Self {
            spheres,
            symmetry,
            plate_bc: None,
        })
    }

    /// Sphere in front of an infinite plate at surface-to-surface gap `L`,
    /// realized by the image construction: two identical spheres at
    /// center-to-center distance `r = 2(L + a)`, i.e. mirror distance
    /// `R = L + a` from sphere center to plate. `plate_bc` selects which
    /// mirror-parity sector of the doubled problem survives; `sphere_bc` is
    /// the boundary condition on the physical sphere.
    pub fn sphere_plate(a: f64, gap: f64, plate_bc: Bc, sphere_bc: Bc) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain {
                what: "sphere radius",
                value: a,
            });
        }
        if !(gap > 0.0) || !gap.is_finite() {
            return Err(Error::Domain {
                what: "sphere-plate gap",
                value: gap,
            });
        }
        let r = 2.0 * (gap + a);
        let spheres = vec![
            SphereSpec::new(a, [0.0, 0.0, 0.0], sphere_bc),
            SphereSpec::new(a, [0.0, 0.0, r], sphere_bc),
        ];
        Ok(Self {
            spheres,
            symmetry: SymmetryTag::SpherePlate,
            plate_bc: Some(plate_bc),
        })
    }

    /// The spheres, in input order.
    pub fn spheres(&self) -> &[SphereSpec] {
        &self.spheres
    }

    /// Number of spheres.
    pub fn len(&self) -> usize {
        self.spheres.len()
    }

    /// True if the geometry holds no spheres (never true after validation).
    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty()
    }

    /// Detected symmetry.
    pub fn symmetry(&self) -> SymmetryTag {
        self.symmetry
    }

    /// Plate boundary condition (sphere–plate geometries only).
    pub fn plate_bc(&self) -> Option<Bc> {
        self.plate_bc
    }

    /// Center-to-center distance between spheres `i` and `j`.
    pub fn separation(&self, i: usize, j: usize) -> f64 {
        dist(self.spheres[i].center, self.spheres[j].center)
    }

    /// Surface-to-surface gap between spheres `i` and `j`.
    pub fn gap(&self, i: usize, j: usize) -> f64 {
        self.separation(i, j) - self.spheres[i].radius - self.spheres[j].radius
    }

    /// Smallest surface-to-surface gap over all pairs (drives the default
    /// wavenumber cutoff). For a single sphere there is no pair; returns
    /// `None`.
    pub fn min_gap(&self) -> Option<f64> {
        let n = self.spheres.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let g = self.gap(i, j);
                best = Some(best.map_or(g, |b: f64| b.min(g)));
            }
        }
        best
    }

    /// Largest sphere radius.
    pub fn max_radius(&self) -> f64 {
        self.spheres
            .iter()
            .map(|s| s.radius)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Polar and azimuthal angles `(θ, φ)` of the unit vector pointing from
    /// the center of sphere `i` to the center of sphere `j`.
    ///
    /// For directions along `±z` the polar angle is exactly `0.0` or `π`
    /// (not a rounded `acos`), which downstream code relies on for the exact
    /// pole selection rule of the spherical harmonics.
    pub fn pair_angles(&self, i: usize, j: usize) -> (f64, f64) {
        let a = self.spheres[i].center;
        let b = self.spheres[j].center;
        let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let theta = if rho == 0.0 {
            if d[2] >= 0.0 {
                0.0
            } else {
                std::f64::consts::PI
            }
        } else {
            (d[2] / r).clamp(-1.0, 1.0).acos()
        };
        let phi = if rho == 0.0 { 0.0 } else { d[1].atan2(d[0]) };
        (theta, phi)
    }

    /// Parse the line-oriented geometry file format:
    ///
    /// ```text
    /// # comment
    /// sphere a=1.0 center=0,0,0 bc=D
    /// sphere a=0.5 center=0,0,4.25 bc=N
    /// ```
    ///
    /// and validate the result. Errors carry the 1-based line number.
    pub fn from_file_str(text: &str) -> Result<Self> {
        let mut spheres = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut fields = t.split_whitespace();
            let kw = fields.next().unwrap_or("");
            if kw != "sphere" {
                return Err(Error::GeometryParse {
                    line,
                    msg: format!("expected `sphere`, found {kw:?}"),
                });
            }
            let mut radius: Option<f64> = None;
            let mut center: Option<[f64; 3]> = None;
            let mut bc: Option<Bc> = None;
            for field in fields {
                let (key, val) = field.split_once('=').ok_or_else(|| Error::GeometryParse {
                    line,
                    msg: format!("field {field:?} is not key=value"),
                })?;
                match key {
                    "a" => {
                        radius = Some(val.parse::<f64>().map_err(|e| Error::GeometryParse {
                            line,
                            msg: format!("bad radius {val:?}: {e}"),
                        })?);
                    }
                    "center" => {
                        let parts: Vec<&str> = val.split(',').collect();
                        if parts.len() != 3 {
                            return Err(Error::GeometryParse {
                                line,
                                msg: format!("center needs three comma-separated values, got {val:?}"),
                            });
                        }
                        let mut c = [0.0; 3];
                        for (k, p) in parts.iter().enumerate() {
                            c[k] = p.parse::<f64>().map_err(|e| Error::GeometryParse {
                                line,
                                msg: format!("bad center coordinate {p:?}: {e}"),
                            })?;
                        }
                        center = Some(c);
                    }
                    "bc" => {
                        bc = Some(val.parse::<Bc>().map_err(|_| Error::GeometryParse {
                            line,
                            msg: format!("bad boundary condition {val:?} (expected D or N)"),
                        })?);
                    }
                    other => {
                        return Err(Error::GeometryParse {
                            line,
                            msg: format!("unknown field {other:?}"),
                        });
                    }
                }
            }
            let (radius, center, bc) = match (radius, center, bc) {
                (Some(r), Some(c), Some(b)) => (r, c, b),
                _ => {
                    return Err(Error::GeometryParse {
                        line,
                        msg: "sphere line needs a=, center=, and bc= fields".into(),
                    });
                }
            };
            spheres.push(SphereSpec::new(radius, center, bc));
        }
        Geometry::new(spheres)
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

fn classify(spheres: &[SphereSpec]) -> SymmetryTag {
    if spheres.len() != 2 {
        return SymmetryTag::None;
    }
    // Any two spheres are collinear with their center axis; the m-block
    // factorization needs nothing more. "Identical" additionally enables
    // the mirror (even/odd) split of each m-determinant.
    let (s0, s1) = (&spheres[0], &spheres[1]);
    let rel = (s0.radius - s1.radius).abs() / s0.radius.max(s1.radius);
    let identical = rel <= 1e-12 && s0.bc == s1.bc;
    SymmetryTag::CollinearTwoSphere { identical }
}
