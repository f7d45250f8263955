//! Correlation between user and eavesdropper array responses, exact and
//! asymptotic, with closed-form minima over cable orientations.
//!
//! The response correlation magnitude `|a_uᴴ a_e|` is the single quantity
//! that separates the secrecy-constrained zero-forcing rate from its
//! no-eavesdropper ceiling, so shaping the array to *minimize* it is the
//! whole game. Three regimes admit closed forms over the tip sphere:
//!
//! - **Far field, one cable** ([`min_corr_single_cable`]): with
//!   `Δ = r̂_u − r̂_e` and `δ = ‖Δ‖`, the correlation along a cable tip `t`
//!   depends only on `x = Δᵀt` through a Dirichlet-style kernel
//!   ([`dirichlet_single`]). Zero is reachable iff `δL ≥ λ`; otherwise the
//!   minimum sits at the fully aligned tip `t = ±L Δ/δ`.
//! - **Far field, two cables** ([`min_corr_dual_cable`]): opposite tips
//!   `t_2 = −t_1` let the two cable sums cancel; zero is reachable iff
//!   `2 ((N+1)/N) δL ≥ λ`, otherwise the minimum is
//!   `2 |cos(π (N+1) δL / (N λ))|` times the single-cable kernel.
//! - **Shared direction, near field** ([`min_corr_same_direction`]): when
//!   both terminals sit along one ray at different ranges, only the
//!   second-order wavefront curvature separates them and the correlation
//!   depends on the tip solely through the effective aperture
//!   `s = L² − (r̂ᵀt)² ∈ [0, L²]`. Within the monotone regime
//!   `|1/d_e − 1/d_u| L² < λ` the minimum is the quadratic-phase partial
//!   sum at `s = L²` (tip perpendicular to the ray); beyond it the
//!   minimum over `s` is found numerically.
//!
//! [`brute_force_min_corr`] searches orientation grids directly and is the
//! oracle the closed forms are tested against.

use crate::geometry::Vec3;
use crate::parallel;
use num_complex::Complex64;

/// Below this magnitude the Dirichlet-kernel denominator is considered
/// singular and the direct phasor sum is used instead.
pub const DIRICHLET_DENOM_TOL: f64 = 1e-9;

/// User/eavesdropper placement relative to the array, reduced to what the
/// correlation laws consume: unit directions, ranges, and the wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub dir_user: Vec3,
    pub dir_eve: Vec3,
    pub dist_user: f64,
    pub dist_eve: f64,
    pub wavelength: f64,
}

impl PairGeometry {
    /// Checks unit directions (1e-9 relative), positive ranges, and a
    /// positive wavelength.
    pub fn validate(&self) -> Result<(), String> {
        for (name, dir) in [("dir_user", self.dir_user), ("dir_eve", self.dir_eve)] {
            if (dir.norm() - 1.0).abs() > 1e-9 {
                return Err(format!("{name} is not a unit vector (norm {})", dir.norm()));
            }
        }
        for (name, d) in [
            ("dist_user", self.dist_user),
            ("dist_eve", self.dist_eve),
            ("wavelength", self.wavelength),
        ] {
            if !(d.is_finite() && d > 0.0) {
                return Err(format!("{name} must be positive and finite, got {d}"));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn user_position(&self) -> Vec3 {
        self.dir_user * self.dist_user
    }

    #[inline]
    pub fn eve_position(&self) -> Vec3 {
        self.dir_eve * self.dist_eve
    }

    /// Direction difference `Δ = r̂_u − r̂_e`.
    #[inline]
    pub fn delta(&self) -> Vec3 {
        self.dir_user - self.dir_eve
    }

    /// `δ = ‖Δ‖ = 2 sin(angle/2)`, between 0 and 2.
    #[inline]
    pub fn delta_norm(&self) -> f64 {
        self.delta().norm()
    }
}

/// Exact response correlation `|a_uᴴ a_e|` from true propagation
/// distances. Evaluated through the per-element distance *difference*, so
/// kilometer-scale ranges do not erode the millimeter-scale phase.
pub fn corr_exact(elements: &[Vec3], user_pos: Vec3, eve_pos: Vec3, wavelength: f64) -> f64 {
    debug_assert!(wavelength > 0.0);
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let mut acc = Complex64::new(0.0, 0.0);
    for el in elements {
        let du = el.distance(user_pos);
        let de = el.distance(eve_pos);
        debug_assert!(du > 0.0 && de > 0.0, "terminal coincides with an element");
        acc += Complex64::from_polar(1.0, k * (de - du));
    }
    acc.norm()
}

/// Far-field correlation over cable tips: planar wavefronts turn the
/// element phases into `(2π/λ)(Δᵀ t_{m,n})` with `t_{m,n} = (n/N) t_m`,
/// giving `|Σ_m Σ_n exp(j 2π n Δᵀt_m / (N λ))|`.
pub fn corr_far_field(
    tips: &[Vec3],
    n_per_cable: usize,
    dir_user: Vec3,
    dir_eve: Vec3,
    wavelength: f64,
) -> f64 {
    debug_assert!(wavelength > 0.0 && n_per_cable > 0);
    let delta = dir_user - dir_eve;
    let mut acc = Complex64::new(0.0, 0.0);
    for tip in tips {
        acc += cable_phasor_sum(delta.dot(*tip), n_per_cable, wavelength);
    }
    acc.norm()
}

/// One cable's far-field phasor sum `T(x) = Σ_{n=1..N} exp(j 2π n x / (N λ))`.
#[inline]
fn cable_phasor_sum(x: f64, n: usize, wavelength: f64) -> Complex64 {
    let base = 2.0 * std::f64::consts::PI * x / (n as f64 * wavelength);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..=n {
        acc += Complex64::from_polar(1.0, base * k as f64);
    }
    acc
}

/// Magnitude of the single-cable far-field sum in closed form:
///
/// ```text
/// |T(x)| = |sin(π x / λ) / sin(π x / (N λ))|
/// ```
///
/// with removable singularities where the denominator vanishes (`x` a
/// multiple of `N λ`, value `N`); those fall back to the direct sum.
/// `|T(x)| = 0` exactly at nonzero integer multiples of `λ` (excluding
/// multiples of `Nλ`).
pub fn dirichlet_single(x: f64, n: usize, wavelength: f64) -> f64 {
    debug_assert!(n > 0 && wavelength > 0.0);
    let denom = (std::f64::consts::PI * x / (n as f64 * wavelength)).sin();
    if denom.abs() < DIRICHLET_DENOM_TOL {
        return cable_phasor_sum(x, n, wavelength).norm();
    }
    ((std::f64::consts::PI * x / wavelength).sin() / denom).abs()
}

/// Which branch of a minimum-correlation law produced the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrRegime {
    /// Zero correlation is reachable; the argmin is non-unique.
    Null,
    /// Minimum pinned at the boundary of the reachable projection range
    /// (fully aligned tip, or perpendicular tip in the shared-direction
    /// case), in closed form.
    Boundary,
    /// Degenerate pair (identical directions or ranges): the correlation
    /// is constant at its maximum over all orientations.
    Degenerate,
    /// Outside the monotone regime; value from a one-dimensional numeric
    /// minimization over the effective aperture.
    Numeric,
}

/// A minimum correlation value plus the regime that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinCorr {
    pub value: f64,
    pub regime: CorrRegime,
}

/// Minimum far-field correlation over one cable tip, given the direction
/// separation `δ = ‖r̂_u − r̂_e‖`:
///
/// - `δ = 0`: constant `N` ([`CorrRegime::Degenerate`]);
/// - `δ L ≥ λ`: zero reachable ([`CorrRegime::Null`]);
/// - otherwise `|T(δL)|` at the aligned tip ([`CorrRegime::Boundary`]).
pub fn min_corr_single_cable(n_per_cable: usize, cable_len: f64, delta: f64, wavelength: f64) -> MinCorr {
    assert!(n_per_cable > 0 && cable_len > 0.0 && wavelength > 0.0);
    assert!(delta >= 0.0, "direction separation must be non-negative");
    if delta == 0.0 {
        return MinCorr {
            value: n_per_cable as f64,
            regime: CorrRegime::Degenerate,
        };
    }
    if delta * cable_len >= wavelength {
        return MinCorr {
            value: 0.0,
            regime: CorrRegime::Null,
        };
    }
    MinCorr {
        value: dirichlet_single(delta * cable_len, n_per_cable, wavelength),
        regime: CorrRegime::Boundary,
    }
}

/// A tip achieving [`min_corr_single_cable`] for concrete directions.
///
/// In the aligned regime this is `L Δ/δ`; in the null regime, a tip whose
/// projection on `Δ` is exactly one wavelength (a zero of the kernel).
/// For `δ = 0` every tip is equivalent; `L x̂` is returned.
pub fn single_cable_argmin(dir_user: Vec3, dir_eve: Vec3, cable_len: f64, wavelength: f64) -> Vec3 {
    let delta = dir_user - dir_eve;
    let d = delta.norm();
    if d == 0.0 {
        return Vec3::X * cable_len;
    }
    let aligned = delta / d;
    if d * cable_len < wavelength {
        return aligned * cable_len;
    }
    // Rotate away from alignment until Δᵀt = λ.
    let cos = wavelength / (d * cable_len);
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    (aligned * cos + aligned.any_orthonormal() * sin) * cable_len
}

/// Minimum far-field correlation over two tips (with `t_2 = −t_1` optimal):
///
/// - `δ = 0`: constant `2N` ([`CorrRegime::Degenerate`]);
/// - `2 ((N+1)/N) δL ≥ λ`: zero reachable ([`CorrRegime::Null`]);
/// - otherwise `2 |cos(π (N+1) δL / (N λ))| · |T(δL)|`
///   ([`CorrRegime::Boundary`]).
pub fn min_corr_dual_cable(n_per_cable: usize, cable_len: f64, delta: f64, wavelength: f64) -> MinCorr {
    assert!(n_per_cable > 0 && cable_len > 0.0 && wavelength > 0.0);
    assert!(delta >= 0.0, "direction separation must be non-negative");
    let n = n_per_cable as f64;
    if delta == 0.0 {
        return MinCorr {
            value: 2.0 * n,
            regime: CorrRegime::Degenerate,
        };
    }
    let dl = delta * cable_len;
    if 2.0 * ((n + 1.0) / n) * dl >= wavelength {
        return MinCorr {
            value: 0.0,
            regime: CorrRegime::Null,
        };
    }
    let envelope = (std::f64::consts::PI * (n + 1.0) * dl / (n * wavelength)).cos().abs();
    MinCorr {
        value: 2.0 * envelope * dirichlet_single(dl, n_per_cable, wavelength),
        regime: CorrRegime::Boundary,
    }
}

/// Tip pair achieving [`min_corr_dual_cable`] for concrete directions;
/// always antipodal (`t_2 = −t_1`).
pub fn dual_cable_argmin(
    dir_user: Vec3,
    dir_eve: Vec3,
    n_per_cable: usize,
    cable_len: f64,
    wavelength: f64,
) -> (Vec3, Vec3) {
    let delta = dir_user - dir_eve;
    let d = delta.norm();
    if d == 0.0 {
        let t = Vec3::X * cable_len;
        return (t, -t);
    }
    let n = n_per_cable as f64;
    let aligned = delta / d;
    let t1 = if 2.0 * ((n + 1.0) / n) * d * cable_len < wavelength {
        aligned * cable_len
    } else {
        // Projection x₁ = Nλ/(2(N+1)) puts the pair envelope cos(..) at 0.
        let cos = n * wavelength / (2.0 * (n + 1.0) * d * cable_len);
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        (aligned * cos + aligned.any_orthonormal() * sin) * cable_len
    };
    (t1, -t1)
}

/// Correlation when both terminals share one direction `r̂` at ranges
/// `d_u ≠ d_e`: linear phases cancel and only wavefront curvature
/// remains,
///
/// ```text
/// |Σ_m Σ_n exp(j (π/λ)(1/d_e − 1/d_u)(‖t_{m,n}‖² − (r̂ᵀt_{m,n})²))|.
/// ```
///
/// Replacing every element by its projection orthogonal to `r̂` leaves the
/// value unchanged.
pub fn corr_same_direction(
    tips: &[Vec3],
    n_per_cable: usize,
    dir: Vec3,
    dist_user: f64,
    dist_eve: f64,
    wavelength: f64,
) -> f64 {
    debug_assert!((dir.norm() - 1.0).abs() < 1e-6, "dir must be unit");
    debug_assert!(dist_user > 0.0 && dist_eve > 0.0);
    let coeff = std::f64::consts::PI / wavelength * (1.0 / dist_eve - 1.0 / dist_user);
    let n = n_per_cable as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for tip in tips {
        let radial = dir.dot(*tip);
        let s_tip = tip.norm_squared() - radial * radial;
        for k in 1..=n_per_cable {
            let frac = k as f64 / n;
            acc += Complex64::from_polar(1.0, coeff * frac * frac * s_tip);
        }
    }
    acc.norm()
}

/// Quadratic-phase partial sum `|Σ_{n=1..N} exp(j c n²/N² s)|` — the
/// shared-direction correlation of one cable with effective aperture `s`.
fn aperture_sum(coeff: f64, n_per_cable: usize, s: f64) -> f64 {
    let n = n_per_cable as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..=n_per_cable {
        let frac = k as f64 / n;
        acc += Complex64::from_polar(1.0, coeff * frac * frac * s);
    }
    acc.norm()
}

/// Minimum shared-direction correlation over one cable tip.
///
/// The tip enters only through `s = L² − (r̂ᵀt)²`, which sweeps `[0, L²]`
/// as the tip rotates. With `c = (π/λ)|1/d_e − 1/d_u|`:
///
/// - equal ranges: constant `N` ([`CorrRegime::Degenerate`]);
/// - `c L² < π` (equivalently `|1/d_e − 1/d_u| L² < λ`): the aperture sum
///   decreases monotonically in `s`, so the minimum is its value at
///   `s = L²`, i.e. the tip perpendicular to the ray
///   ([`CorrRegime::Boundary`]);
/// - otherwise the sum oscillates and the true minimum over `s ∈ [0, L²]`
///   is located numerically ([`CorrRegime::Numeric`]). Because the search
///   interval only grows with `L`, the minimum never increases with cable
///   length.
pub fn min_corr_same_direction(
    n_per_cable: usize,
    cable_len: f64,
    dist_user: f64,
    dist_eve: f64,
    wavelength: f64,
) -> MinCorr {
    assert!(n_per_cable > 0 && cable_len > 0.0 && wavelength > 0.0);
    assert!(dist_user > 0.0 && dist_eve > 0.0);
    if dist_user == dist_eve {
        return MinCorr {
            value: n_per_cable as f64,
            regime: CorrRegime::Degenerate,
        };
    }
    let coeff = std::f64::consts::PI / wavelength * (1.0 / dist_eve - 1.0 / dist_user).abs();
    let s_max = cable_len * cable_len;
    if coeff * s_max < std::f64::consts::PI {
        return MinCorr {
            value: aperture_sum(coeff, n_per_cable, s_max),
            regime: CorrRegime::Boundary,
        };
    }
    let (_, value) = minimize_scalar(|s| aperture_sum(coeff, n_per_cable, s), 0.0, s_max);
    MinCorr {
        value,
        regime: CorrRegime::Numeric,
    }
}

/// Grid-plus-golden-section minimizer for a smooth scalar function on
/// `[lo, hi]`. The grid (1024 points minimum, at least 16 per fastest
/// oscillation when the caller's function is a quadratic-phase sum over
/// this span) isolates the global basin; golden-section polishes it.
fn minimize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let steps: usize = 4096;
    let h = (hi - lo) / steps as f64;
    let mut best_i: usize = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..=steps {
        let v = f(lo + h * i as f64);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + h * best_i.saturating_sub(1) as f64;
    let mut b = (lo + h * (best_i + 1) as f64).min(hi);
    // Golden-section: ~1e-13 of the bracket after 60 iterations.
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x);
    if v < best_v {
        (x, v)
    } else {
        (lo + h * best_i as f64, best_v)
    }
}

/// Orientation-grid resolution per tip: `polar` colatitude samples at cell
/// centers in `(0, π)` and `azimuth` samples over `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientationGrid {
    pub polar: usize,
    pub azimuth: usize,
}

/// Result of a brute-force orientation search.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub value: f64,
    pub tips: Vec<Vec3>,
}

/// Minimizes an arbitrary correlation function over all joint tip
/// orientations by exhaustive grid search plus local refinement. This is
/// the oracle the closed forms are validated against, so it evaluates the
/// supplied function directly and assumes nothing about its structure
/// beyond smoothness (the refinement is local, so the global grid must be
/// fine enough to land in the global basin).
///
/// Cost grows as `(polar · azimuth)^M`; intended for `M ∈ {1, 2}`.
/// Ties break on the first grid point in scan order.
pub fn brute_force_min_corr<F>(
    corr: F,
    num_cables: usize,
    cable_len: f64,
    grid: OrientationGrid,
    refine_rounds: usize,
) -> BruteForceResult
where
    F: Fn(&[Vec3]) -> f64 + Sync + Send,
{
    assert!(num_cables >= 1 && grid.polar >= 2 && grid.azimuth >= 2);
    let per_tip = grid.polar * grid.azimuth;
    let combos = per_tip.pow(num_cables as u32);

    let angles_of = |idx: usize| -> (f64, f64) {
        let ti = idx / grid.azimuth;
        let pi_ = idx % grid.azimuth;
        (
            std::f64::consts::PI * (ti as f64 + 0.5) / grid.polar as f64,
            2.0 * std::f64::consts::PI * pi_ as f64 / grid.azimuth as f64,
        )
    };
    let tip_at = |theta: f64, phi: f64| -> Vec3 {
        Vec3::new(
            cable_len * theta.sin() * phi.cos(),
            cable_len * theta.sin() * phi.sin(),
            cable_len * theta.cos(),
        )
    };
    let decode = |mut combo: usize| -> Vec<(f64, f64)> {
        let mut angles = Vec::with_capacity(num_cables);
        for _ in 0..num_cables {
            angles.push(angles_of(combo % per_tip));
            combo /= per_tip;
        }
        angles
    };

    let values = parallel::map_range(combos, |combo| {
        let tips: Vec<Vec3> = decode(combo)
            .into_iter()
            .map(|(t, p)| tip_at(t, p))
            .collect();
        corr(&tips)
    });
    let (best_combo, mut best_value) = parallel::argmin(&values).expect("non-empty grid");
    let mut best_angles = decode(best_combo);

    // Local refinement: shrink a window around the incumbent per-tip
    // angles and re-grid 5 x 5 per tip jointly each round.
    let mut window = (
        std::f64::consts::PI / grid.polar as f64,
        2.0 * std::f64::consts::PI / grid.azimuth as f64,
    );
    const LOCAL: usize = 5;
    let local_combos = (LOCAL * LOCAL).pow(num_cables as u32);
    for _ in 0..refine_rounds {
        let offsets: Vec<f64> = (0..LOCAL).map(|i| i as f64 / (LOCAL - 1) as f64 - 0.5).collect();
        let candidates: Vec<Vec<(f64, f64)>> = (0..local_combos)
            .map(|mut combo| {
                (0..num_cables)
                    .map(|cable| {
                        let ti = combo % LOCAL;
                        combo /= LOCAL;
                        let pi_ = combo % LOCAL;
                        combo /= LOCAL;
                        (
                            best_angles[cable].0 + offsets[ti] * window.0,
                            best_angles[cable].1 + offsets[pi_] * window.1,
                        )
                    })
                    .collect()
            })
            .collect();
        let vals = parallel::map_collect(&candidates, |angles| {
            let tips: Vec<Vec3> = angles.iter().map(|&(t, p)| tip_at(t, p)).collect();
            corr(&tips)
        });
        if let Some((i, v)) = parallel::argmin(&vals) {
            if v < best_value {
                best_value = v;
                best_angles = candidates[i].clone();
            }
        }
        window = (window.0 * 0.4, window.1 * 0.4);
    }

    BruteForceResult {
        value: best_value,
        tips: best_angles.into_iter().map(|(t, p)| tip_at(t, p)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::array_response;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LAMBDA: f64 = 0.03;

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            );
            if v.norm() > 0.1 {
                return v.normalized().unwrap();
            }
        }
    }

    fn chain(tip: Vec3, n: usize) -> Vec<Vec3> {
        (1..=n).map(|k| tip * (k as f64 / n as f64)).collect()
    }

    #[test]
    fn dirichlet_closed_form_and_fallback_agree() {
        // Frozen: |sin(2π/3)/sin(π/12)| for x = 0.02, N = 8, λ = 0.03.
        assert_relative_eq!(dirichlet_single(0.02, 8, LAMBDA), 3.346_065_215, max_relative = 1e-9);
        // Removable singularity at x = Nλ: direct sum gives exactly N.
        assert_relative_eq!(dirichlet_single(8.0 * LAMBDA, 8, LAMBDA), 8.0, epsilon = 1e-9);
        assert_relative_eq!(dirichlet_single(0.0, 8, LAMBDA), 8.0, epsilon = 1e-12);
        // Exact zero at one wavelength.
        assert!(dirichlet_single(LAMBDA, 8, LAMBDA) < 1e-12);
        // Either side of the singularity the two routes agree.
        for x in [0.239_999, 0.240_001, 0.007, 0.11] {
            assert_relative_eq!(
                dirichlet_single(x, 8, LAMBDA),
                cable_phasor_sum(x, 8, LAMBDA).norm(),
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn corr_exact_matches_response_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let els = chain(Vec3::new(2.5, 1.1, -2.0), 8);
        let up = random_unit(&mut rng) * 400.0;
        let ep = random_unit(&mut rng) * 250.0;
        let direct = corr_exact(&els, up, ep, LAMBDA);
        let au = array_response(&els, up, LAMBDA).unwrap();
        let ae = array_response(&els, ep, LAMBDA).unwrap();
        assert_relative_eq!(direct, au.dotc(&ae).norm(), epsilon = 1e-9);
    }

    #[test]
    fn corr_far_field_reduces_to_dirichlet_per_cable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let du = random_unit(&mut rng);
        let de = random_unit(&mut rng);
        let tip = random_unit(&mut rng) * 4.0;
        let x = (du - de).dot(tip);
        assert_relative_eq!(
            corr_far_field(&[tip], 8, du, de, LAMBDA),
            dirichlet_single(x, 8, LAMBDA),
            epsilon = 1e-9
        );
    }

    #[test]
    fn corr_far_field_approximates_exact_at_long_range() {
        let th_u = 89.8_f64.to_radians();
        let th_e = 90.23_f64.to_radians();
        let du = Vec3::new(th_u.cos(), 0.0, th_u.sin());
        let de = Vec3::new(th_e.cos(), 0.0, th_e.sin());
        for l in [1.0, 2.0, 4.0] {
            let tip = Vec3::new(l, 0.0, 0.0);
            let ff = corr_far_field(&[tip], 8, du, de, LAMBDA);
            let exact = corr_exact(&chain(tip, 8), du * 1e4, de * 1e4, LAMBDA);
            assert!((ff - exact).abs() < 0.05, "L={l}: ff={ff} exact={exact}");
        }
    }

    #[test]
    fn fig3_style_point_correlations() {
        // User at 89.8°, eavesdropper at 90.23° in the x-O-z plane, 10 km
        // out: a 4 m cable along +x drives the normalized correlation to
        // ~zero while 1 m and 2 m cables stay highly correlated.
        let th_u = 89.8_f64.to_radians();
        let th_e = 90.23_f64.to_radians();
        let up = Vec3::new(th_u.cos(), 0.0, th_u.sin()) * 1e4;
        let ep = Vec3::new(th_e.cos(), 0.0, th_e.sin()) * 1e4;
        let corr_at = |l: f64| corr_exact(&chain(Vec3::new(l, 0.0, 0.0), 8), up, ep, LAMBDA);
        let c1 = corr_at(1.0);
        let c2 = corr_at(2.0);
        let c4 = corr_at(4.0);
        assert_relative_eq!(c1, 7.213, max_relative = 1e-3);
        assert_relative_eq!(c2, 5.123, max_relative = 1e-3);
        assert!(c4 < 0.15);
        assert!(c1 > c2 && c2 > c4);
    }

    #[test]
    fn single_cable_min_regimes() {
        // Degenerate: coincident directions.
        let m = min_corr_single_cable(8, 4.0, 0.0, LAMBDA);
        assert_eq!(m.regime, CorrRegime::Degenerate);
        assert_eq!(m.value, 8.0);
        // Null: δL ≥ λ.
        let m = min_corr_single_cable(8, 4.0, 0.0075, LAMBDA);
        assert_eq!(m.regime, CorrRegime::Null);
        assert_eq!(m.value, 0.0);
        // Boundary: frozen kernel value at δL = 0.02.
        let m = min_corr_single_cable(8, 1.0, 0.02, LAMBDA);
        assert_eq!(m.regime, CorrRegime::Boundary);
        assert_relative_eq!(m.value, 3.346_065_215, max_relative = 1e-9);
    }

    #[test]
    fn single_cable_argmin_achieves_the_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let du = random_unit(&mut rng);
            let de = random_unit(&mut rng);
            let delta = (du - de).norm();
            for l in [0.002, 0.01, 0.5, 4.0] {
                let tip = single_cable_argmin(du, de, l, LAMBDA);
                assert_relative_eq!(tip.norm(), l, max_relative = 1e-12);
                let expect = min_corr_single_cable(8, l, delta, LAMBDA).value;
                let got = corr_far_field(&[tip], 8, du, de, LAMBDA);
                assert!((got - expect).abs() < 1e-9 * 8.0, "l={l} got={got} expect={expect}");
            }
        }
    }

    #[test]
    fn dual_cable_min_regimes_and_frozen_value() {
        // Degenerate pair keeps both cables coherent: 2N.
        let m = min_corr_dual_cable(8, 1.0, 0.0, LAMBDA);
        assert_eq!(m.regime, CorrRegime::Degenerate);
        assert_eq!(m.value, 16.0);
        // Null as soon as 2(N+1)/N δL ≥ λ.
        let m = min_corr_dual_cable(8, 1.0, 0.014, LAMBDA);
        assert_eq!(m.regime, CorrRegime::Null);
        // Frozen boundary value for δ = 0.012, L = 1.
        let m = min_corr_dual_cable(8, 1.0, 0.012, LAMBDA);
        assert_eq!(m.regime, CorrRegime::Boundary);
        assert_relative_eq!(m.value, 1.902_113, max_relative = 1e-6);
    }

    #[test]
    fn dual_cable_argmin_achieves_the_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let du = random_unit(&mut rng);
            let de = random_unit(&mut rng);
            let delta = (du - de).norm();
            for l in [0.002, 0.3, 1.0] {
                let (t1, t2) = dual_cable_argmin(du, de, 8, l, LAMBDA);
                assert_eq!(t2, -t1);
                let expect = min_corr_dual_cable(8, l, delta, LAMBDA).value;
                let got = corr_far_field(&[t1, t2], 8, du, de, LAMBDA);
                assert!((got - expect).abs() < 1e-8 * 16.0, "l={l} got={got} expect={expect}");
            }
        }
    }

    #[test]
    fn same_direction_projection_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dir = random_unit(&mut rng);
        let tips: Vec<Vec3> = (0..3).map(|_| random_unit(&mut rng) * 4.0).collect();
        let projected: Vec<Vec3> = tips
            .iter()
            .map(|t| *t - dir * dir.dot(*t))
            .collect();
        let a = corr_same_direction(&tips, 8, dir, 200.0, 100.0, LAMBDA);
        let b = corr_same_direction(&projected, 8, dir, 200.0, 100.0, LAMBDA);
        assert_relative_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn same_direction_min_regimes_and_frozen_values() {
        // Equal ranges: curvature difference vanishes, correlation stays N.
        let m = min_corr_same_direction(8, 4.0, 150.0, 150.0, LAMBDA);
        assert_eq!(m.regime, CorrRegime::Degenerate);
        assert_eq!(m.value, 8.0);
        // Monotone regime (|1/d_e − 1/d_u| L² < λ): perpendicular tip.
        let m1 = min_corr_same_direction(8, 1.0, 200.0, 100.0, LAMBDA);
        let m2 = min_corr_same_direction(8, 2.0, 200.0, 100.0, LAMBDA);
        assert_eq!(m1.regime, CorrRegime::Boundary);
        assert_eq!(m2.regime, CorrRegime::Boundary);
        assert_relative_eq!(m1.value, 7.881_117, max_relative = 1e-6);
        assert_relative_eq!(m2.value, 6.237_450, max_relative = 1e-6);
        // Oscillatory regime: numeric minimum dips below the
        // perpendicular-tip value (frozen from an independent fine scan).
        let m4 = min_corr_same_direction(8, 4.0, 200.0, 100.0, LAMBDA);
        assert_eq!(m4.regime, CorrRegime::Numeric);
        assert_relative_eq!(m4.value, 2.019_474, max_relative = 1e-4);
        let perp4 = corr_same_direction(&[Vec3::new(4.0, 0.0, 0.0)], 8, Vec3::Z, 200.0, 100.0, LAMBDA);
        assert_relative_eq!(perp4, 2.601_128, max_relative = 1e-6);
        assert!(m4.value < perp4);
    }

    #[test]
    fn same_direction_min_bounds_random_orientations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for l in [2.0, 4.0] {
            let min = min_corr_same_direction(8, l, 200.0, 100.0, LAMBDA).value;
            for _ in 0..500 {
                let tip = random_unit(&mut rng) * l;
                let c = corr_same_direction(&[tip], 8, Vec3::Z, 200.0, 100.0, LAMBDA);
                assert!(c >= min - 1e-9, "tip correlation {c} below claimed min {min}");
            }
        }
    }

    #[test]
    fn same_direction_min_value_in_monotone_regime_matches_perpendicular_tip() {
        let min = min_corr_same_direction(8, 2.0, 200.0, 100.0, LAMBDA).value;
        let perp = corr_same_direction(&[Vec3::new(2.0, 0.0, 0.0)], 8, Vec3::Z, 200.0, 100.0, LAMBDA);
        assert_relative_eq!(min, perp, epsilon = 1e-9);
    }

    #[test]
    fn brute_force_converges_on_synthetic_objective() {
        // Distance to a buried target orientation: the grid search plus
        // refinement must localize it far below the initial grid pitch.
        let target = Vec3::new(0.3, -0.8, 0.52).normalized().unwrap() * 4.0;
        let result = brute_force_min_corr(
            |tips| tips[0].distance(target),
            1,
            4.0,
            OrientationGrid { polar: 16, azimuth: 32 },
            30,
        );
        assert!(result.value < 1e-6, "residual distance {}", result.value);
        assert!(result.tips[0].distance(target) < 1e-6);
    }

    #[test]
    fn brute_force_matches_single_cable_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let du = random_unit(&mut rng);
        let de = random_unit(&mut rng);
        let delta = (du - de).norm();
        // Pick L so that δL sits inside the aligned regime.
        let l = 0.6 * LAMBDA / delta;
        let expect = min_corr_single_cable(8, l, delta, LAMBDA).value;
        let got = brute_force_min_corr(
            |tips| corr_far_field(tips, 8, du, de, LAMBDA),
            1,
            l,
            OrientationGrid { polar: 32, azimuth: 64 },
            25,
        );
        assert_relative_eq!(got.value, expect, max_relative = 1e-6);
    }
}
