//! Randomized user/eavesdropper deployments and reproducible Monte Carlo
//! realizations.
//!
//! A [`Scenario`] bundles everything that defines a downlink study: array
//! dimensions, radio parameters, the spatial regions users and
//! eavesdroppers occupy, and the Rician factor. [`generate_realizations`]
//! draws a fixed set of [`Realization`]s from it — positions plus, under
//! Rician fading, the per-element diffuse draws. A realization stores the
//! *random primitives*, not finished channel vectors, so the same drawn
//! ensemble can be re-evaluated against any candidate array geometry
//! (common random numbers across geometries and baseline schemes); call
//! [`Realization::channel_set`] to materialize channels for a concrete
//! element layout.
//!
//! All sampling consumes the caller's RNG in a documented, fixed order,
//! so a seeded generator reproduces an ensemble bit-for-bit.

use crate::beamforming::{BeamformingError, ChannelSet};
use crate::channel::{los_channel, rician_mix, ChannelError, ComplexMatrix, ComplexVector, RadioParams};
use crate::geometry::{placement, ArrayGeometry, GeometryError, Placement, Vec3};
use rand::Rng;
use thiserror::Error;

/// Scenario construction/validation failures.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{name} = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("{entity} count is nonzero but no regions are listed")]
    NoRegions { entity: &'static str },
    #[error("{users} users + {eves} eavesdroppers exceed {elements} array elements")]
    TooManyTerminals {
        users: usize,
        eves: usize,
        elements: usize,
    },
    #[error("realization stores diffuse draws for {expected} elements, geometry has {got}")]
    DiffuseLengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Beamforming(#[from] BeamformingError),
}

/// A spatial region terminals are sampled from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionSpec {
    /// Spherical-cap cone: directions uniform over the cap of half-angle
    /// `vertex_angle_deg / 2` around `axis`, range uniform over
    /// `[min_dist, max_dist]`.
    Cone {
        axis: Vec3,
        vertex_angle_deg: f64,
        min_dist: f64,
        max_dist: f64,
    },
    /// Uniform over the surface of a sphere centered at the array.
    SphereSurface { radius: f64 },
}

impl RegionSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        match *self {
            RegionSpec::Cone {
                axis,
                vertex_angle_deg,
                min_dist,
                max_dist,
            } => {
                if (axis.norm() - 1.0).abs() > 1e-9 {
                    return Err(ScenarioError::InvalidParameter {
                        name: "axis",
                        value: axis.norm(),
                        reason: "cone axis must be a unit vector",
                    });
                }
                if !(vertex_angle_deg > 0.0 && vertex_angle_deg < 180.0) {
                    return Err(ScenarioError::InvalidParameter {
                        name: "vertex_angle_deg",
                        value: vertex_angle_deg,
                        reason: "must lie in (0, 180)",
                    });
                }
                if !(min_dist > 0.0 && min_dist.is_finite()) {
                    return Err(ScenarioError::InvalidParameter {
                        name: "min_dist",
                        value: min_dist,
                        reason: "must be positive and finite",
                    });
                }
                if !(max_dist >= min_dist && max_dist.is_finite()) {
                    return Err(ScenarioError::InvalidParameter {
                        name: "max_dist",
                        value: max_dist,
                        reason: "must be finite and at least min_dist",
                    });
                }
                Ok(())
            }
            RegionSpec::SphereSurface { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(ScenarioError::InvalidParameter {
                        name: "radius",
                        value: radius,
                        reason: "must be positive and finite",
                    });
                }
                Ok(())
            }
        }
    }

    /// Draws one position. Consumes exactly three uniform draws for a
    /// cone (cap cosine, azimuth, range) and two for a sphere surface
    /// (z, azimuth), in that order.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec3 {
        match *self {
            RegionSpec::Cone {
                axis,
                vertex_angle_deg,
                min_dist,
                max_dist,
            } => {
                let cos_half = (vertex_angle_deg.to_radians() / 2.0).cos();
                let cos_theta = 1.0 - rng.random::<f64>() * (1.0 - cos_half);
                let phi = rng.random::<f64>() * std::f64::consts::TAU;
                let dist = min_dist + rng.random::<f64>() * (max_dist - min_dist);
                let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
                let e1 = axis.any_orthonormal();
                let e2 = axis.cross(e1);
                let dir = e1 * (sin_theta * phi.cos()) + e2 * (sin_theta * phi.sin()) + axis * cos_theta;
                dir * dist
            }
            RegionSpec::SphereSurface { radius } => {
                let z = 2.0 * rng.random::<f64>() - 1.0;
                let phi = rng.random::<f64>() * std::f64::consts::TAU;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                Vec3::new(rho * phi.cos(), rho * phi.sin(), z) * radius
            }
        }
    }

    /// Membership test with a small angular/radial slack, used to assert
    /// sampled positions land where they should.
    pub fn contains(&self, p: Vec3) -> bool {
        match *self {
            RegionSpec::Cone {
                axis,
                vertex_angle_deg,
                min_dist,
                max_dist,
            } => {
                let r = p.norm();
                if !(r >= min_dist * (1.0 - 1e-12) && r <= max_dist * (1.0 + 1e-12)) {
                    return false;
                }
                let cos = axis.dot(p) / r;
                cos >= (vertex_angle_deg.to_radians() / 2.0).cos() - 1e-12
            }
            RegionSpec::SphereSurface { radius } => (p.norm() - radius).abs() <= 1e-9 * radius,
        }
    }
}

/// The three forward-looking service cones used by the default downlink:
/// axes +x, +y, and −z, each with a 10° vertex angle and ranges between
/// 100 m and 1000 m.
pub fn default_three_cones() -> Vec<RegionSpec> {
    [Vec3::X, Vec3::Y, -Vec3::Z]
        .into_iter()
        .map(|axis| RegionSpec::Cone {
            axis,
            vertex_angle_deg: 10.0,
            min_dist: 100.0,
            max_dist: 1000.0,
        })
        .collect()
}

/// Array dimensioning knobs of a scenario, sufficient to build any of the
/// cable placements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    pub num_cables: usize,
    pub n_per_cable: usize,
    pub cable_len: f64,
    pub min_sep: f64,
}

impl GeometryParams {
    pub fn num_elements(&self) -> usize {
        self.num_cables * self.n_per_cable
    }

    /// Builds the named cable placement at these dimensions.
    pub fn build(&self, scheme: Placement) -> Result<ArrayGeometry, GeometryError> {
        placement(
            scheme,
            self.num_cables,
            self.n_per_cable,
            self.cable_len,
            self.min_sep,
        )
    }
}

/// A complete downlink study definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: GeometryParams,
    pub num_users: usize,
    pub num_eves: usize,
    pub radio: RadioParams,
    pub user_regions: Vec<RegionSpec>,
    pub eve_regions: Vec<RegionSpec>,
    /// LoS-to-diffuse power ratio; `f64::INFINITY` means pure LoS.
    pub rician_factor: f64,
    /// Master seed recorded with the scenario so an experiment can be
    /// replayed; samplers themselves take an explicit RNG.
    pub seed: u64,
}

impl Scenario {
    /// The reference downlink: 8 cables x 8 elements on 4 m cables with
    /// 0.5 m tip separation, 10 users and 10 eavesdroppers in the three
    /// default cones, 10 GHz carrier, 100 W transmit power, 1 pW noise,
    /// pure LoS.
    pub fn default_downlink() -> Scenario {
        Scenario {
            geometry: GeometryParams {
                num_cables: 8,
                n_per_cable: 8,
                cable_len: 4.0,
                min_sep: 0.5,
            },
            num_users: 10,
            num_eves: 10,
            radio: RadioParams::from_carrier(1e10, 100.0, 1e-12).expect("valid defaults"),
            user_regions: default_three_cones(),
            eve_regions: default_three_cones(),
            rician_factor: f64::INFINITY,
            seed: 7,
        }
    }

    pub fn num_elements(&self) -> usize {
        self.geometry.num_elements()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (name, v) in [
            ("num_cables", self.geometry.num_cables as f64),
            ("n_per_cable", self.geometry.n_per_cable as f64),
        ] {
            if v < 1.0 {
                return Err(ScenarioError::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be at least 1",
                });
            }
        }
        if !(self.geometry.cable_len > 0.0 && self.geometry.cable_len.is_finite()) {
            return Err(ScenarioError::InvalidParameter {
                name: "cable_len",
                value: self.geometry.cable_len,
                reason: "must be positive and finite",
            });
        }
        if !(self.geometry.min_sep >= 0.0 && self.geometry.min_sep.is_finite()) {
            return Err(ScenarioError::InvalidParameter {
                name: "min_sep",
                value: self.geometry.min_sep,
                reason: "must be non-negative and finite",
            });
        }
        if self.num_users + self.num_eves > self.num_elements() {
            return Err(ScenarioError::TooManyTerminals {
                users: self.num_users,
                eves: self.num_eves,
                elements: self.num_elements(),
            });
        }
        if self.num_users > 0 && self.user_regions.is_empty() {
            return Err(ScenarioError::NoRegions { entity: "user" });
        }
        if self.num_eves > 0 && self.eve_regions.is_empty() {
            return Err(ScenarioError::NoRegions { entity: "eavesdropper" });
        }
        if !(self.rician_factor > 0.0) {
            return Err(ScenarioError::InvalidParameter {
                name: "rician_factor",
                value: self.rician_factor,
                reason: "must be positive (or infinite for pure LoS)",
            });
        }
        for region in self.user_regions.iter().chain(&self.eve_regions) {
            region.validate()?;
        }
        Ok(())
    }
}

/// One Monte Carlo draw: terminal positions plus, under Rician fading,
/// one unit-variance diffuse vector per terminal. Channels are
/// materialized per geometry with [`Realization::channel_set`].
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    user_positions: Vec<Vec3>,
    eve_positions: Vec<Vec3>,
    user_diffuse: Vec<ComplexVector>,
    eve_diffuse: Vec<ComplexVector>,
    rician_factor: f64,
    wavelength: f64,
}

impl Realization {
    pub fn user_positions(&self) -> &[Vec3] {
        &self.user_positions
    }

    pub fn eve_positions(&self) -> &[Vec3] {
        &self.eve_positions
    }

    pub fn rician_factor(&self) -> f64 {
        self.rician_factor
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Materializes the user/eavesdropper channel matrices for a concrete
    /// element layout. Under Rician fading the stored diffuse draws are
    /// reused, so evaluating two geometries differs only through the LoS
    /// component — the Monte Carlo noise is common to both.
    pub fn channel_set(&self, elements: &[Vec3]) -> Result<ChannelSet, ScenarioError> {
        let finite_k = self.rician_factor.is_finite();
        if finite_k {
            let expected = self
                .user_diffuse
                .first()
                .or(self.eve_diffuse.first())
                .map_or(elements.len(), |d| d.len());
            if expected != elements.len() {
                return Err(ScenarioError::DiffuseLengthMismatch {
                    expected,
                    got: elements.len(),
                });
            }
        }
        let column = |pos: Vec3, diffuse: Option<&ComplexVector>| -> Result<ComplexVector, ChannelError> {
            let los = los_channel(elements, pos, self.wavelength)?;
            Ok(match diffuse {
                Some(z) => rician_mix(&los, z, self.rician_factor),
                None => los,
            })
        };
        let mn = elements.len();
        let mut users = ComplexMatrix::zeros(mn, self.user_positions.len());
        for (k, &pos) in self.user_positions.iter().enumerate() {
            let h = column(pos, finite_k.then(|| &self.user_diffuse[k]))?;
            users.set_column(k, &h);
        }
        let mut eves = ComplexMatrix::zeros(mn, self.eve_positions.len());
        for (i, &pos) in self.eve_positions.iter().enumerate() {
            let g = column(pos, finite_k.then(|| &self.eve_diffuse[i]))?;
            eves.set_column(i, &g);
        }
        Ok(ChannelSet::new(users, eves)?)
    }
}

/// Region index for terminal `index` among `regions` choices: a
/// round-robin split when `count` divides evenly, otherwise one uniform
/// draw per terminal.
fn assign_region<R: Rng>(count: usize, regions: usize, index: usize, rng: &mut R) -> usize {
    if count % regions == 0 {
        index % regions
    } else {
        rng.random_range(0..regions)
    }
}

/// Draws `count` independent realizations from the scenario.
///
/// Per realization the RNG is consumed in this order: each user's region
/// choice (if the split is not even) then position draws; each
/// eavesdropper's likewise; then, only under finite `rician_factor`, each
/// user's diffuse vector followed by each eavesdropper's. Fixing the
/// order makes ensembles reproducible from the seed alone.
pub fn generate_realizations<R: Rng>(
    scenario: &Scenario,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Realization>, ScenarioError> {
    scenario.validate()?;
    let mn = scenario.num_elements();
    let finite_k = scenario.rician_factor.is_finite();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let draw_positions = |count: usize, regions: &[RegionSpec], rng: &mut R| -> Vec<Vec3> {
            (0..count)
                .map(|i| regions[assign_region(count, regions.len(), i, rng)].sample(rng))
                .collect()
        };
        let user_positions = draw_positions(scenario.num_users, &scenario.user_regions, rng);
        let eve_positions = draw_positions(scenario.num_eves, &scenario.eve_regions, rng);
        let (user_diffuse, eve_diffuse) = if finite_k {
            (
                (0..scenario.num_users)
                    .map(|_| crate::channel::draw_diffuse_unit(mn, rng))
                    .collect(),
                (0..scenario.num_eves)
                    .map(|_| crate::channel::draw_diffuse_unit(mn, rng))
                    .collect(),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        out.push(Realization {
            user_positions,
            eve_positions,
            user_diffuse,
            eve_diffuse,
            rician_factor: scenario.rician_factor,
            wavelength: scenario.radio.wavelength_m(),
        });
    }
    Ok(out)
}
