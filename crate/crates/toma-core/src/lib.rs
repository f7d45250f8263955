//! # toma-core
//!
//! Physical-layer modeling and geometry optimization for **towed movable
//! antenna (ToMA) arrays**: a spherical aerial platform of radius `L` tows
//! `M` cables, each carrying `N` antenna elements strung from the platform
//! center out to the cable tip. Steering the tips over the sphere reshapes
//! the array aperture, which in turn reshapes the spatial correlation
//! between legitimate users and eavesdroppers and therefore the rate a
//! zero-forcing (ZF) transmitter can sustain while forcing zero leakage.
//!
//! The crate provides, layer by layer:
//!
//! - [`geometry`] — cable-tip geometry on the sphere, element chains,
//!   feasibility checks, and fixed planar arrays used as baselines;
//! - [`channel`] — spherical-wavefront array responses, free-space path
//!   gains, and line-of-sight / Rician channel synthesis;
//! - [`beamforming`] — multiuser ZF with full leakage suppression, the
//!   single-user/single-eavesdropper closed form, and a maximum-ratio
//!   upper bound;
//! - [`correlation`] — exact and far-field correlation magnitudes,
//!   closed-form minimum-correlation laws for one and two cables and for
//!   the shared-direction (near-field) case, plus brute-force oracles;
//! - [`scenarios`] — randomized user/eavesdropper deployments with
//!   reproducible sampling;
//! - [`optimizer`] — Riemannian conjugate-gradient ascent of the ergodic
//!   ZF rate over the product of tip spheres, with Armijo backtracking
//!   and cable-separation constraints.
//!
//! Monte Carlo objectives and brute-force grids fan out across a rayon
//! thread pool when the default `parallel` feature is enabled; the
//! sequential fallback produces bit-identical results.
//!
//! ## Example
//!
//! ```
//! use toma_core::beamforming::{user_rate, zf_beamformer};
//! use toma_core::channel::RadioParams;
//! use toma_core::geometry::{placement, Placement};
//! use toma_core::scenarios::{generate_realizations, Scenario};
//! use rand::SeedableRng;
//!
//! let scenario = Scenario::default_downlink();
//! let radio = &scenario.radio;
//! let geom = placement(Placement::Hybrid, 8, 8, 4.0, 0.5).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let realizations = generate_realizations(&scenario, 4, &mut rng).unwrap();
//!
//! let elements = geom.element_positions();
//! let channels = realizations[0].channel_set(&elements).unwrap();
//! let out = zf_beamformer(&channels, radio.tx_power_w(), radio.noise_power_w()).unwrap();
//! assert!(out.rate > 0.0);
//! assert_eq!(out.rate, user_rate(out.wbar_fro_sq, radio.tx_power_w(), radio.noise_power_w()));
//! ```

pub mod beamforming;
pub mod channel;
pub mod correlation;
pub mod geometry;
pub mod optimizer;
pub mod parallel;
pub mod scenarios;

pub use geometry::Vec3;
