//! Cable-tip geometry for towed arrays and fixed planar baselines.
//!
//! A towed array is parameterized by its *anchor-point vector*: the `M`
//! cable tips `t_1 .. t_M`, each constrained to the sphere of radius `L`
//! around the platform center. Cable `m` carries `N` elements at
//! `t_{m,n} = (n/N) t_m` for `n = 1..N`, so the whole array is determined
//! by the tips alone. Feasibility additionally requires a minimum tip
//! separation `D` between every cable pair to keep cables from tangling.
//!
//! Constraint checks are reported as data ([`ConstraintViolation`]) rather
//! than errors so optimizers and CLIs can decide how to react; the
//! canned [`placement`] constructors and [`upa_positions`] build the
//! baseline geometries used throughout the experiments.

use thiserror::Error;

/// Relative tolerance for feasibility checks: a tip norm may deviate from
/// `L` by `L * FEASIBILITY_REL_TOL`, and a pair distance may fall short of
/// `D` by `D * FEASIBILITY_REL_TOL`, before a violation is reported.
/// Covers retraction round-off without masking real constraint breaches.
pub const FEASIBILITY_REL_TOL: f64 = 1e-9;

/// Relative tolerance for placement self-checks on constructed tip norms.
pub const PLACEMENT_REL_TOL: f64 = 1e-12;

/// Errors from geometry construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// The array must have at least one cable and one element per cable.
    #[error("array needs at least one cable and one element per cable")]
    Empty,
    /// A scalar parameter is out of its valid range.
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// A tip coordinate is NaN or infinite.
    #[error("tip {0} has a non-finite coordinate")]
    NonFiniteTip(usize),
    /// Hybrid placement splits cables between two planes and needs an even count.
    #[error("hybrid placement requires an even cable count, got {0}")]
    HybridOddCables(usize),
    /// A canned placement violates its own constraints for these parameters.
    #[error("placement infeasible: {first} ({count} violation(s) total)")]
    InfeasiblePlacement {
        count: usize,
        first: ConstraintViolation,
    },
}

/// A single feasibility violation, reported as data.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    /// `‖t_m‖` differs from the cable length by more than the tolerance.
    CableLength {
        cable: usize,
        norm: f64,
        expected: f64,
    },
    /// Two tips are closer than the minimum separation.
    Separation {
        first: usize,
        second: usize,
        distance: f64,
        required: f64,
    },
}

impl std::fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintViolation::CableLength {
                cable,
                norm,
                expected,
            } => write!(f, "cable {cable} tip norm {norm} != cable length {expected}"),
            ConstraintViolation::Separation {
                first,
                second,
                distance,
                required,
            } => write!(
                f,
                "tips {first} and {second} are {distance} m apart, need {required} m"
            ),
        }
    }
}

/// Plain 3-vector used for positions, tips, directions, and gradients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance(self, rhs: Vec3) -> f64 {
        (self - rhs).norm()
    }

    #[inline]
    pub fn cross(self, rhs: Vec3) -> Vec3 {
        Vec3::new(
            self.y * rhs.z - self.z * rhs.y,
            self.z * rhs.x - self.x * rhs.z,
            self.x * rhs.y - self.y * rhs.x,
        )
    }

    /// Unit vector along `self`; `None` for the zero vector.
    #[inline]
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0).then(|| self / n)
    }

    /// An arbitrary unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthonormal(self) -> Vec3 {
        // Pivot on the smallest component to stay well-conditioned.
        let a = self.x.abs();
        let b = self.y.abs();
        let c = self.z.abs();
        let other = if a <= b && a <= c {
            Vec3::X
        } else if b <= c {
            Vec3::Y
        } else {
            Vec3::Z
        };
        let v = self * (other.dot(self) / self.norm_squared());
        (other - v).normalized().expect("orthogonal complement is nonzero")
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl std::ops::Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Towed-array geometry: `M` cable tips plus the shared `N`, `L`, `D`.
///
/// Construction checks only structure (counts, positive lengths, finite
/// tips); the sphere and separation constraints are reported by
/// [`ArrayGeometry::validate`] so that slightly perturbed geometries (e.g.
/// finite-difference probes) remain representable.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    tips: Vec<Vec3>,
    n_per_cable: usize,
    cable_len: f64,
    min_sep: f64,
}

impl ArrayGeometry {
    pub fn new(
        tips: Vec<Vec3>,
        n_per_cable: usize,
        cable_len: f64,
        min_sep: f64,
    ) -> Result<Self, GeometryError> {
        if tips.is_empty() || n_per_cable == 0 {
            return Err(GeometryError::Empty);
        }
        if !(cable_len.is_finite() && cable_len > 0.0) {
            return Err(GeometryError::InvalidParameter {
                name: "cable_len",
                value: cable_len,
                reason: "must be positive and finite",
            });
        }
        if !(min_sep.is_finite() && min_sep >= 0.0) {
            return Err(GeometryError::InvalidParameter {
                name: "min_sep",
                value: min_sep,
                reason: "must be non-negative and finite",
            });
        }
        if let Some(m) = tips.iter().position(|t| !t.is_finite()) {
            return Err(GeometryError::NonFiniteTip(m));
        }
        Ok(ArrayGeometry {
            tips,
            n_per_cable,
            cable_len,
            min_sep,
        })
    }

    #[inline]
    pub fn num_cables(&self) -> usize {
        self.tips.len()
    }

    #[inline]
    pub fn n_per_cable(&self) -> usize {
        self.n_per_cable
    }

    #[inline]
    pub fn num_elements(&self) -> usize {
        self.tips.len() * self.n_per_cable
    }

    #[inline]
    pub fn cable_len(&self) -> f64 {
        self.cable_len
    }

    #[inline]
    pub fn min_sep(&self) -> f64 {
        self.min_sep
    }

    #[inline]
    pub fn tips(&self) -> &[Vec3] {
        &self.tips
    }

    #[inline]
    pub fn tip(&self, cable: usize) -> Vec3 {
        self.tips[cable]
    }

    /// Copy of this geometry with cable `cable`'s tip replaced.
    pub fn with_tip(&self, cable: usize, tip: Vec3) -> Self {
        let mut g = self.clone();
        g.tips[cable] = tip;
        g
    }

    pub fn set_tip(&mut self, cable: usize, tip: Vec3) {
        self.tips[cable] = tip;
    }

    /// All `M * N` element positions in cable-major order:
    /// cable 0 at fractions `1/N .. N/N`, then cable 1, and so on.
    pub fn element_positions(&self) -> Vec<Vec3> {
        let n = self.n_per_cable;
        let mut out = Vec::with_capacity(self.num_elements());
        for tip in &self.tips {
            for k in 1..=n {
                out.push(*tip * (k as f64 / n as f64));
            }
        }
        out
    }

    /// Feasibility report: every tip on the radius-`L` sphere and every
    /// tip pair at least `D` apart, both within [`FEASIBILITY_REL_TOL`].
    /// An empty report means the geometry is feasible.
    pub fn validate(&self) -> Vec<ConstraintViolation> {
        let mut out = Vec::new();
        let len_tol = self.cable_len * FEASIBILITY_REL_TOL;
        for (m, tip) in self.tips.iter().enumerate() {
            let norm = tip.norm();
            if (norm - self.cable_len).abs() > len_tol {
                out.push(ConstraintViolation::CableLength {
                    cable: m,
                    norm,
                    expected: self.cable_len,
                });
            }
        }
        let sep_tol = self.min_sep * FEASIBILITY_REL_TOL;
        for i in 0..self.tips.len() {
            for j in (i + 1)..self.tips.len() {
                let distance = self.tips[i].distance(self.tips[j]);
                if distance < self.min_sep - sep_tol {
                    out.push(ConstraintViolation::Separation {
                        first: i,
                        second: j,
                        distance,
                        required: self.min_sep,
                    });
                }
            }
        }
        out
    }

    #[inline]
    pub fn is_feasible(&self) -> bool {
        self.validate().is_empty()
    }
}

/// Canned tip layouts used for initialization and as fixed baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// All tips in the x-O-y plane at equal angular spacing, first along +x.
    Horizontal,
    /// All tips in the x-O-z plane at equal angular spacing, first along +x.
    Vertical,
    /// Half the tips horizontal, half vertical, the vertical fan rotated by
    /// half a step so the two fans interleave away from the shared x axis.
    Hybrid,
}

/// Builds the tips for a [`Placement`] and verifies feasibility.
///
/// # Errors
///
/// [`GeometryError::HybridOddCables`] for odd `num_cables` with
/// [`Placement::Hybrid`], [`GeometryError::InfeasiblePlacement`] when the
/// requested separation cannot be met at this cable count and length, and
/// the structural errors of [`ArrayGeometry::new`].
pub fn placement(
    kind: Placement,
    num_cables: usize,
    n_per_cable: usize,
    cable_len: f64,
    min_sep: f64,
) -> Result<ArrayGeometry, GeometryError> {
    let ring = |count: usize, offset: f64, vertical: bool| -> Vec<Vec3> {
        (0..count)
            .map(|i| {
                let ang = offset + 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                if vertical {
                    Vec3::new(cable_len * ang.cos(), 0.0, cable_len * ang.sin())
                } else {
                    Vec3::new(cable_len * ang.cos(), cable_len * ang.sin(), 0.0)
                }
            })
            .collect()
    };
    let tips = match kind {
        Placement::Horizontal => ring(num_cables, 0.0, false),
        Placement::Vertical => ring(num_cables, 0.0, true),
        Placement::Hybrid => {
            if num_cables % 2 != 0 {
                return Err(GeometryError::HybridOddCables(num_cables));
            }
            let half = num_cables / 2;
            let mut tips = ring(half, 0.0, false);
            tips.extend(ring(half, std::f64::consts::PI / half as f64, true));
            tips
        }
    };
    debug_assert!(tips
        .iter()
        .all(|t| (t.norm() - cable_len).abs() <= cable_len * PLACEMENT_REL_TOL));
    let geom = ArrayGeometry::new(tips, n_per_cable, cable_len, min_sep)?;
    let violations = geom.validate();
    if let Some(first) = violations.first() {
        return Err(GeometryError::InfeasiblePlacement {
            count: violations.len(),
            first: first.clone(),
        });
    }
    Ok(geom)
}

/// A rigid array given directly by its element positions (no cables).
#[derive(Debug, Clone, PartialEq)]
pub struct FixedGeometry {
    elements: Vec<Vec3>,
}

impl FixedGeometry {
    pub fn new(elements: Vec<Vec3>) -> Result<Self, GeometryError> {
        if elements.is_empty() {
            return Err(GeometryError::Empty);
        }
        if let Some(m) = elements.iter().position(|t| !t.is_finite()) {
            return Err(GeometryError::NonFiniteTip(m));
        }
        Ok(FixedGeometry { elements })
    }

    #[inline]
    pub fn elements(&self) -> &[Vec3] {
        &self.elements
    }

    #[inline]
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }
}

/// Uniform planar array in the y-O-z plane, centered at the origin, with
/// `rows * cols` elements on a `spacing`-pitch grid. Row index moves along
/// z, column index along y.
pub fn upa_positions(rows: usize, cols: usize, spacing: f64) -> Result<FixedGeometry, GeometryError> {
    if rows == 0 || cols == 0 {
        return Err(GeometryError::Empty);
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(GeometryError::InvalidParameter {
            name: "spacing",
            value: spacing,
            reason: "must be positive and finite",
        });
    }
    let y0 = (cols as f64 - 1.0) / 2.0;
    let z0 = (rows as f64 - 1.0) / 2.0;
    let mut elements = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            elements.push(Vec3::new(
                0.0,
                (c as f64 - y0) * spacing,
                (r as f64 - z0) * spacing,
            ));
        }
    }
    FixedGeometry::new(elements)
}
