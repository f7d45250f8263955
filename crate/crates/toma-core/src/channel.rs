//! Spherical-wavefront channels between an array and aerial terminals.
//!
//! Each element at position `t` sees a terminal at `r` through the exact
//! propagation distance, so the array response is
//!
//! ```text
//! a(t_1.., r)[i] = exp(j * (2π/λ) * ‖t_i − r‖)
//! ```
//!
//! with unit magnitude per entry. A line-of-sight channel scales the
//! response by the free-space path gain `α = λ / (4π‖r‖)`; a Rician
//! channel adds an i.i.d. complex-Gaussian diffuse part of matching
//! average power. [`approx_distance`] provides the second-order distance
//! expansion used by the closed-form correlation analysis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Exact speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Column vector of complex channel/response entries, one per element.
pub type ComplexVector = DVector<Complex64>;
/// Element-by-terminal complex matrix (columns are per-terminal channels).
pub type ComplexMatrix = DMatrix<Complex64>;

/// Errors from channel evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    /// The terminal position coincides with element `index`.
    #[error("terminal coincides with element {index}")]
    DegeneratePosition { index: usize },
    /// The terminal sits at the array origin, where the path gain diverges.
    #[error("terminal at the origin has no defined path gain")]
    ZeroDistance,
    /// No elements were supplied.
    #[error("element list is empty")]
    NoElements,
    /// A scalar parameter is out of its valid range.
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// Carrier, wavelength, and power-budget parameters shared by a downlink.
///
/// Wavelength and carrier are locked together through `λ f = c`; construct
/// from whichever is given. Powers are stored in watts — unit parsing
/// (e.g. dBm) belongs to the configuration boundary, not here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    carrier_hz: f64,
    wavelength_m: f64,
    tx_power_w: f64,
    noise_power_w: f64,
}

impl RadioParams {
    pub fn from_carrier(
        carrier_hz: f64,
        tx_power_w: f64,
        noise_power_w: f64,
    ) -> Result<Self, ChannelError> {
        check_positive("carrier_hz", carrier_hz)?;
        Self::checked(carrier_hz, SPEED_OF_LIGHT / carrier_hz, tx_power_w, noise_power_w)
    }

    pub fn from_wavelength(
        wavelength_m: f64,
        tx_power_w: f64,
        noise_power_w: f64,
    ) -> Result<Self, ChannelError> {
        check_positive("wavelength_m", wavelength_m)?;
        Self::checked(SPEED_OF_LIGHT / wavelength_m, wavelength_m, tx_power_w, noise_power_w)
    }

    fn checked(
        carrier_hz: f64,
        wavelength_m: f64,
        tx_power_w: f64,
        noise_power_w: f64,
    ) -> Result<Self, ChannelError> {
        if !(tx_power_w.is_finite() && tx_power_w >= 0.0) {
            return Err(ChannelError::InvalidParameter {
                name: "tx_power_w",
                value: tx_power_w,
                reason: "must be non-negative and finite",
            });
        }
        check_positive("noise_power_w", noise_power_w)?;
        Ok(RadioParams {
            carrier_hz,
            wavelength_m,
            tx_power_w,
            noise_power_w,
        })
    }

    #[inline]
    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    #[inline]
    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_m
    }

    #[inline]
    pub fn tx_power_w(&self) -> f64 {
        self.tx_power_w
    }

    #[inline]
    pub fn noise_power_w(&self) -> f64 {
        self.noise_power_w
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ChannelError::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

/// Spherical-wave array response: unit-magnitude phase entries
/// `exp(j (2π/λ) ‖t_i − r‖)` for every element position.
///
/// # Errors
///
/// [`ChannelError::DegeneratePosition`] when `pos` coincides with an
/// element, [`ChannelError::NoElements`] for an empty element list.
pub fn array_response(
    elements: &[crate::geometry::Vec3],
    pos: crate::geometry::Vec3,
    wavelength: f64,
) -> Result<ComplexVector, ChannelError> {
    if elements.is_empty() {
        return Err(ChannelError::NoElements);
    }
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let mut out = ComplexVector::zeros(elements.len());
    for (i, el) in elements.iter().enumerate() {
        let d = el.distance(pos);
        if d == 0.0 {
            return Err(ChannelError::DegeneratePosition { index: i });
        }
        out[i] = Complex64::from_polar(1.0, k * d);
    }
    Ok(out)
}

/// Free-space path gain `α = λ / (4π‖r‖)`.
pub fn path_gain(pos: crate::geometry::Vec3, wavelength: f64) -> Result<f64, ChannelError> {
    let dist = pos.norm();
    if dist == 0.0 {
        return Err(ChannelError::ZeroDistance);
    }
    Ok(wavelength / (4.0 * std::f64::consts::PI * dist))
}

/// Line-of-sight channel `α · a(elements, pos)`.
pub fn los_channel(
    elements: &[crate::geometry::Vec3],
    pos: crate::geometry::Vec3,
    wavelength: f64,
) -> Result<ComplexVector, ChannelError> {
    let alpha = path_gain(pos, wavelength)?;
    let mut a = array_response(elements, pos, wavelength)?;
    a *= Complex64::new(alpha, 0.0);
    Ok(a)
}

/// Combines a line-of-sight channel with pre-drawn unit-variance diffuse
/// entries under Rician factor `κ`:
///
/// ```text
/// h = sqrt(κ/(1+κ)) h_los + sqrt(1/(1+κ)) α z,   z[i] ~ CN(0, 1)
/// ```
///
/// where `α` is the per-entry line-of-sight magnitude, so the diffuse part
/// carries the same average power per entry as the direct part.
/// `κ = +∞` returns the line-of-sight channel unchanged (bit for bit);
/// `κ = 0` yields a pure diffuse channel. Keeping `z` external lets a
/// Monte Carlo driver freeze one draw per realization and reuse it across
/// geometry evaluations (common random numbers).
pub fn rician_mix(
    los: &ComplexVector,
    diffuse_unit: &ComplexVector,
    rician_factor: f64,
) -> ComplexVector {
    assert!(rician_factor >= 0.0, "rician_factor must be non-negative");
    assert_eq!(los.len(), diffuse_unit.len(), "entry counts must match");
    if rician_factor.is_infinite() {
        return los.clone();
    }
    let direct = (rician_factor / (1.0 + rician_factor)).sqrt();
    let diffuse = (1.0 / (1.0 + rician_factor)).sqrt();
    ComplexVector::from_iterator(
        los.len(),
        los.iter()
            .zip(diffuse_unit.iter())
            .map(|(l, z)| l * direct + z * Complex64::new(diffuse * l.norm(), 0.0)),
    )
}

/// Draws one vector of i.i.d. `CN(0, 1)` entries (real and imaginary part
/// each `N(0, 1/2)`, drawn in that order per entry).
pub fn draw_diffuse_unit(len: usize, rng: &mut impl Rng) -> ComplexVector {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexVector::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// Rician channel with a fresh diffuse draw from `rng`.
///
/// See [`rician_mix`] for the model; `κ = +∞` skips the draw entirely and
/// returns the line-of-sight channel unchanged.
pub fn rician_channel(
    los: &ComplexVector,
    rician_factor: f64,
    rng: &mut impl Rng,
) -> ComplexVector {
    assert!(rician_factor >= 0.0, "rician_factor must be non-negative");
    if rician_factor.is_infinite() {
        return los.clone();
    }
    let z = draw_diffuse_unit(los.len(), rng);
    rician_mix(los, &z, rician_factor)
}

/// Second-order expansion of the element-terminal distance around the
/// terminal range:
///
/// ```text
/// ‖t − r‖ ≈ ‖r‖ − r̂·t + (‖t‖² − (r̂·t)²) / (2‖r‖)
/// ```
///
/// Accurate to `O(‖t‖³/‖r‖²)`; the correlation closed forms are built on
/// this expansion. `pos` must be nonzero.
pub fn approx_distance(element: crate::geometry::Vec3, pos: crate::geometry::Vec3) -> f64 {
    let range = pos.norm();
    assert!(range > 0.0, "terminal must not sit at the origin");
    let radial = element.dot(pos) / range;
    range - radial + (element.norm_squared() - radial * radial) / (2.0 * range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radio_params_lock_wavelength_to_carrier() {
        let radio = RadioParams::from_carrier(10e9, 100.0, 1e-12).unwrap();
        assert_relative_eq!(radio.wavelength_m(), 0.0299792458, max_relative = 1e-12);
        assert_relative_eq!(
            radio.wavelength_m() * radio.carrier_hz(),
            SPEED_OF_LIGHT,
            max_relative = 1e-12
        );
        let same = RadioParams::from_wavelength(radio.wavelength_m(), 100.0, 1e-12).unwrap();
        assert_relative_eq!(same.carrier_hz(), 10e9, max_relative = 1e-12);
    }

    #[test]
    fn radio_params_reject_bad_values() {
        assert!(RadioParams::from_carrier(0.0, 100.0, 1e-12).is_err());
        assert!(RadioParams::from_carrier(10e9, -1.0, 1e-12).is_err());
        assert!(RadioParams::from_carrier(10e9, 100.0, 0.0).is_err());
    }

    #[test]
    fn array_response_entries_are_unit_phasors() {
        let els = vec![Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)];
        let a = array_response(&els, Vec3::new(100.0, 30.0, -4.0), 0.03).unwrap();
        for entry in a.iter() {
            assert_relative_eq!(entry.norm(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn array_response_integer_wavelength_distance_has_zero_phase() {
        // Distance 99 m = 3300 wavelengths: the phase wraps to ~0.
        let els = vec![Vec3::new(2.0, 0.0, 0.0)];
        let a = array_response(&els, Vec3::new(101.0, 0.0, 0.0), 0.03).unwrap();
        assert!((a[0] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn array_response_rejects_degenerate_position() {
        let els = vec![Vec3::new(1.0, 0.0, 0.0)];
        assert_eq!(
            array_response(&els, Vec3::new(1.0, 0.0, 0.0), 0.03),
            Err(ChannelError::DegeneratePosition { index: 0 })
        );
    }

    #[test]
    fn path_gain_at_100m() {
        let g = path_gain(Vec3::new(100.0, 0.0, 0.0), 0.03).unwrap();
        assert_relative_eq!(g, 2.387_324_146e-5, max_relative = 1e-9);
        assert_eq!(path_gain(Vec3::ZERO, 0.03), Err(ChannelError::ZeroDistance));
    }

    #[test]
    fn los_channel_scales_response_by_path_gain() {
        let els = vec![Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)];
        let pos = Vec3::new(120.0, -40.0, 9.0);
        let h = los_channel(&els, pos, 0.03).unwrap();
        let alpha = path_gain(pos, 0.03).unwrap();
        for entry in h.iter() {
            assert_relative_eq!(entry.norm(), alpha, max_relative = 1e-12);
        }
    }

    #[test]
    fn rician_infinite_factor_is_exactly_los() {
        let els: Vec<Vec3> = (1..=8).map(|n| Vec3::new(0.5 * n as f64, 0.0, 0.0)).collect();
        let los = los_channel(&els, Vec3::new(150.0, 20.0, 5.0), 0.03).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = rician_channel(&los, f64::INFINITY, &mut rng);
        assert_eq!(h, los);
    }

    #[test]
    fn rician_mix_preserves_average_power() {
        // Mean squared magnitude of the diffuse part matches |α|² across a
        // large draw, so direct and diffuse parts carry equal per-entry power.
        let els: Vec<Vec3> = (1..=8).map(|n| Vec3::new(0.5 * n as f64, 0.0, 0.0)).collect();
        let pos = Vec3::new(150.0, 20.0, 5.0);
        let los = los_channel(&els, pos, 0.03).unwrap();
        let alpha = path_gain(pos, 0.03).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 4000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let h = rician_channel(&los, 0.0, &mut rng);
            acc += h.iter().map(|e| e.norm_sqr()).sum::<f64>() / els.len() as f64;
        }
        let mean = acc / trials as f64;
        assert_relative_eq!(mean, alpha * alpha, max_relative = 0.05);
    }

    #[test]
    fn approx_distance_matches_exact_in_far_field() {
        let t = Vec3::new(0.0, 4.0, 0.0);
        let r = Vec3::new(200.0, 0.0, 0.0);
        let approx = approx_distance(t, r);
        assert_relative_eq!(approx, 200.04, max_relative = 1e-12);
        let exact = (r - t).norm();
        // Error well under a sixteenth of a 0.03 m wavelength.
        assert!((approx - exact).abs() < 0.03 / 16.0);
        assert!((approx - exact).abs() < 5e-6);
    }
}
