//! Zero-forcing beamforming with full eavesdropper leakage suppression.
//!
//! For user channels `H` (one column per user) and eavesdropper channels
//! `G`, the transmitter stacks `A = [H G]` and takes the first `K` columns
//! of the pseudoinverse,
//!
//! ```text
//! W̄ = A (Aᴴ A)⁻¹ [e_1 .. e_K],      W = sqrt(P) W̄ / ‖W̄‖_F,
//! ```
//!
//! which nulls every eavesdropper (`Gᴴ W = 0`) and gives every user the
//! same interference-free effective gain (`Hᴴ W = c I`). Power is split so
//! each user stream sees SNR `P / (‖W̄‖²_F σ²)`, hence the common rate
//! `log2(1 + P / (‖W̄‖²_F σ²))`.
//!
//! Because `Aᴴ W̄ = E_K`, the squared norm collapses to
//! `‖W̄‖²_F = Σ_{k≤K} (AᴴA)⁻¹_{kk}`: [`zf_wbar_norm_sq`] exploits that to
//! skip forming `W̄` inside hot Monte Carlo loops, and the full
//! [`zf_beamformer`] output is tested against it.
//!
//! The single-user/single-eavesdropper case has a projection closed form
//! ([`zf_single`]) whose inverse squared norm reduces to
//! `|α|² MN − |α|² corr² / MN` ([`inv_wnorm_closed`]) — two independent
//! routes to one number, kept side by side for cross-checking.

use crate::channel::{ComplexMatrix, ComplexVector};
use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use thiserror::Error;

/// Condition-number ceiling for the stacked Gram matrix; beyond it the
/// channel set is treated as rank deficient rather than silently solved.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative floor under which a user channel is considered colinear with
/// the eavesdropper channel in [`zf_single`].
pub const COLINEAR_REL_TOL: f64 = 1e-14;

/// Errors from beamformer construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeamformingError {
    /// More beamforming constraints than array degrees of freedom.
    #[error("{streams} constrained directions exceed {elements} elements")]
    TooManyStreams { streams: usize, elements: usize },
    /// The stacked channel matrix is numerically rank deficient.
    #[error("stacked channel matrix is rank deficient (condition {condition:.3e})")]
    RankDeficient { condition: f64 },
    /// User and eavesdropper matrices disagree on the element count.
    #[error("user channels have {users} rows but eavesdropper channels have {eves}")]
    DimensionMismatch { users: usize, eves: usize },
    /// A correlation magnitude outside `[0, MN]` was supplied.
    #[error("correlation {corr} outside [0, {max}]")]
    CorrelationOutOfRange { corr: f64, max: f64 },
    /// No user channels were supplied.
    #[error("at least one user channel is required")]
    NoUsers,
}

/// User and eavesdropper channel matrices sharing one element dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    users: ComplexMatrix,
    eves: ComplexMatrix,
}

impl ChannelSet {
    /// `users` is `MN x K` (K ≥ 1), `eves` is `MN x I` (I may be 0).
    pub fn new(users: ComplexMatrix, eves: ComplexMatrix) -> Result<Self, BeamformingError> {
        if users.ncols() == 0 {
            return Err(BeamformingError::NoUsers);
        }
        if eves.ncols() > 0 && users.nrows() != eves.nrows() {
            return Err(BeamformingError::DimensionMismatch {
                users: users.nrows(),
                eves: eves.nrows(),
            });
        }
        Ok(ChannelSet { users, eves })
    }

    #[inline]
    pub fn num_elements(&self) -> usize {
        self.users.nrows()
    }

    #[inline]
    pub fn num_users(&self) -> usize {
        self.users.ncols()
    }

    #[inline]
    pub fn num_eves(&self) -> usize {
        self.eves.ncols()
    }

    #[inline]
    pub fn users(&self) -> &ComplexMatrix {
        &self.users
    }

    #[inline]
    pub fn eves(&self) -> &ComplexMatrix {
        &self.eves
    }

    /// Stacked matrix `[H G]`, users first.
    pub fn stacked(&self) -> ComplexMatrix {
        let mut a = ComplexMatrix::zeros(self.num_elements(), self.num_users() + self.num_eves());
        a.columns_mut(0, self.num_users()).copy_from(&self.users);
        if self.num_eves() > 0 {
            a.columns_mut(self.num_users(), self.num_eves())
                .copy_from(&self.eves);
        }
        a
    }
}

/// Eigendecomposition of the stacked Gram matrix with the condition guard
/// applied; shared by the full and fast beamformer paths.
struct GramEigen {
    eigen: SymmetricEigen<Complex64, nalgebra::Dyn>,
}

impl GramEigen {
    fn new(ch: &ChannelSet) -> Result<Self, BeamformingError> {
        let streams = ch.num_users() + ch.num_eves();
        if streams > ch.num_elements() {
            return Err(BeamformingError::TooManyStreams {
                streams,
                elements: ch.num_elements(),
            });
        }
        let a = ch.stacked();
        let gram = a.ad_mul(&a);
        let eigen = SymmetricEigen::new(gram);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for &ev in eigen.eigenvalues.iter() {
            lo = lo.min(ev);
            hi = hi.max(ev);
        }
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= CONDITION_LIMIT) {
            return Err(BeamformingError::RankDeficient { condition });
        }
        Ok(GramEigen { eigen })
    }

    /// Sum of the first `k` diagonal entries of the Gram inverse:
    /// `Σ_{i<k} Σ_j |V_ij|² / λ_j`.
    fn inverse_diag_sum(&self, k: usize) -> f64 {
        let v = &self.eigen.eigenvectors;
        let mut acc = 0.0;
        for j in 0..v.ncols() {
            let lambda = self.eigen.eigenvalues[j];
            let mut col = 0.0;
            for i in 0..k {
                col += v[(i, j)].norm_sqr();
            }
            acc += col / lambda;
        }
        acc
    }

    /// `Gram⁻¹ E_k`: solve against the first `k` identity columns.
    fn inverse_leading_columns(&self, k: usize) -> ComplexMatrix {
        let v = &self.eigen.eigenvectors;
        // B = Vᴴ E_k, rows scaled by 1/λ, then back to the original basis.
        let mut b = v.rows(0, k).adjoint();
        for j in 0..b.nrows() {
            let inv = Complex64::new(1.0 / self.eigen.eigenvalues[j], 0.0);
            for c in 0..k {
                b[(j, c)] *= inv;
            }
        }
        v * b
    }
}

/// Output of [`zf_beamformer`].
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerOutput {
    /// Power-normalized precoder `W = sqrt(P) W̄ / ‖W̄‖_F`, `MN x K`.
    pub weights: ComplexMatrix,
    /// `‖W̄‖²_F` of the unnormalized precoder.
    pub wbar_fro_sq: f64,
    /// Common per-user rate `log2(1 + P / (‖W̄‖²_F σ²))` in bps/Hz.
    pub rate: f64,
}

/// Zero-forcing precoder over a channel set.
///
/// # Errors
///
/// [`BeamformingError::TooManyStreams`] when `K + I > MN`, and
/// [`BeamformingError::RankDeficient`] when the stacked Gram matrix is
/// singular or its condition number exceeds [`CONDITION_LIMIT`].
pub fn zf_beamformer(
    ch: &ChannelSet,
    tx_power: f64,
    noise_power: f64,
) -> Result<BeamformerOutput, BeamformingError> {
    let eig = GramEigen::new(ch)?;
    let y = eig.inverse_leading_columns(ch.num_users());
    let wbar = ch.stacked() * y;
    let wbar_fro_sq = wbar.norm_squared();
    let rate = user_rate(wbar_fro_sq, tx_power, noise_power);
    let weights = wbar * Complex64::new((tx_power / wbar_fro_sq).sqrt(), 0.0);
    Ok(BeamformerOutput {
        weights,
        wbar_fro_sq,
        rate,
    })
}

/// `‖W̄‖²_F` without forming `W̄`, via the Gram-inverse diagonal. Same
/// guards as [`zf_beamformer`]; used in Monte Carlo hot loops.
pub fn zf_wbar_norm_sq(ch: &ChannelSet) -> Result<f64, BeamformingError> {
    Ok(GramEigen::new(ch)?.inverse_diag_sum(ch.num_users()))
}

/// Common per-user rate `log2(1 + P / (‖W̄‖²_F σ²))` in bps/Hz.
pub fn user_rate(wbar_fro_sq: f64, tx_power: f64, noise_power: f64) -> f64 {
    debug_assert!(wbar_fro_sq > 0.0 && noise_power > 0.0 && tx_power >= 0.0);
    (1.0 + tx_power / (wbar_fro_sq * noise_power)).log2()
}

/// Single-pair zero-forcing closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct SinglePairZf {
    /// Unnormalized beamformer `(I − ggᴴ/‖g‖²) h / (hᴴ (I − ggᴴ/‖g‖²) h)`.
    pub wbar: ComplexVector,
    /// `1 / ‖w̄‖²`; zero when the channels are colinear (no secrecy
    /// direction left — a valid outcome, not an error).
    pub inv_norm_sq: f64,
}

/// Beamformer for one user and one eavesdropper: project the user channel
/// onto the eavesdropper's null space and normalize the effective gain
/// to one.
///
/// Colinear channels (projection smaller than [`COLINEAR_REL_TOL`]
/// relative to `‖h‖²`) return a zero beamformer with `inv_norm_sq = 0`.
pub fn zf_single(user: &ComplexVector, eve: &ComplexVector) -> SinglePairZf {
    assert_eq!(user.len(), eve.len(), "channel lengths must match");
    let gg = eve.norm_squared();
    assert!(gg > 0.0, "eavesdropper channel must be nonzero");
    let gh = eve.dotc(user);
    let proj = user - eve * (gh / gg);
    let denom = user.dotc(&proj).re;
    if denom <= COLINEAR_REL_TOL * user.norm_squared() {
        return SinglePairZf {
            wbar: ComplexVector::zeros(user.len()),
            inv_norm_sq: 0.0,
        };
    }
    let wbar = proj / Complex64::new(denom, 0.0);
    let inv_norm_sq = 1.0 / wbar.norm_squared();
    SinglePairZf { wbar, inv_norm_sq }
}

/// Closed form for `1 / ‖w̄‖²` of the single-pair beamformer when both
/// channels are unit-magnitude responses scaled by path gains:
///
/// ```text
/// 1 / ‖w̄‖² = |α|² MN − |α|² corr² / MN
/// ```
///
/// with `corr = |a_uᴴ a_e|` the response correlation magnitude and `α` the
/// *user's* path gain (the eavesdropper's cancels).
///
/// # Errors
///
/// [`BeamformingError::CorrelationOutOfRange`] unless
/// `0 ≤ corr ≤ MN (1 + 1e-9)`.
pub fn inv_wnorm_closed(
    path_gain: f64,
    num_elements: usize,
    corr: f64,
) -> Result<f64, BeamformingError> {
    let mn = num_elements as f64;
    if !(corr >= 0.0 && corr <= mn * (1.0 + 1e-9)) {
        return Err(BeamformingError::CorrelationOutOfRange { corr, max: mn });
    }
    let g2 = path_gain * path_gain;
    Ok((g2 * mn - g2 * corr * corr / mn).max(0.0))
}

/// Interference- and secrecy-blind upper bound: give each user its own
/// maximum-ratio beam and split power to equalize the per-user SNRs.
/// Equal SNRs under `Σ p_k = P` require `p_k ∝ 1/‖h_k‖²`, so the common
/// rate is `log2(1 + (P/σ²) / Σ_k ‖h_k‖⁻²)`. No real scheme with
/// interference or leakage constraints can beat it.
pub fn mrt_upper_bound(users: &ComplexMatrix, tx_power: f64, noise_power: f64) -> f64 {
    assert!(users.ncols() > 0, "at least one user required");
    let mut inv_gain_sum = 0.0;
    for k in 0..users.ncols() {
        let g = users.column(k).norm_squared();
        assert!(g > 0.0, "user channel must be nonzero");
        inv_gain_sum += 1.0 / g;
    }
    (1.0 + tx_power / noise_power / inv_gain_sum).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{array_response, los_channel, path_gain};
    use crate::geometry::Vec3;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LAMBDA: f64 = 0.03;

    fn chain(tip: Vec3, n: usize) -> Vec<Vec3> {
        (1..=n).map(|k| tip * (k as f64 / n as f64)).collect()
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            );
            if let Some(u) = v.normalized() {
                if v.norm() > 0.1 {
                    return u;
                }
            }
        }
    }

    fn random_channel_set(rng: &mut ChaCha8Rng, k: usize, i: usize) -> (Vec<Vec3>, ChannelSet) {
        let els = chain(Vec3::new(4.0, 0.0, 0.0), 8);
        let pos = |rng: &mut ChaCha8Rng| random_unit(rng) * (100.0 + 900.0 * rng.random::<f64>());
        let users = ComplexMatrix::from_columns(
            &(0..k)
                .map(|_| los_channel(&els, pos(rng), LAMBDA).unwrap())
                .collect::<Vec<_>>(),
        );
        let eves = if i > 0 {
            ComplexMatrix::from_columns(
                &(0..i)
                    .map(|_| los_channel(&els, pos(rng), LAMBDA).unwrap())
                    .collect::<Vec<_>>(),
            )
        } else {
            ComplexMatrix::zeros(els.len(), 0)
        };
        (els, ChannelSet::new(users, eves).unwrap())
    }

    #[test]
    fn user_rate_frozen_value_and_zero_power() {
        // MN = 64, α = 2.3873e-5, P = 100 W, σ² = 1e-12 W.
        let alpha = 2.3873e-5_f64;
        let wbar = 1.0 / (alpha * alpha * 64.0);
        assert_relative_eq!(user_rate(wbar, 100.0, 1e-12), 21.798, max_relative = 1e-4);
        assert_eq!(user_rate(wbar, 0.0, 1e-12), 0.0);
    }

    #[test]
    fn zf_beamformer_nulls_eves_and_equalizes_users() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (_els, ch) = random_channel_set(&mut rng, 3, 2);
        let p = 100.0;
        let out = zf_beamformer(&ch, p, 1e-12).unwrap();
        let leak = ch.eves().adjoint() * &out.weights;
        let max_eve_norm = (0..ch.num_eves())
            .map(|i| ch.eves().column(i).norm())
            .fold(0.0, f64::max);
        assert!(leak.iter().all(|e| e.norm() < 1e-9 * p.sqrt() * max_eve_norm));
        let eff = ch.users().adjoint() * &out.weights;
        let diag: Vec<Complex64> = (0..3).map(|k| eff[(k, k)]).collect();
        for k in 0..3 {
            for l in 0..3 {
                if k != l {
                    assert!(eff[(k, l)].norm() < 1e-9 * diag[0].norm());
                }
            }
            // Real, positive, and common across users.
            assert!(diag[k].re > 0.0);
            assert!(diag[k].im.abs() < 1e-9 * diag[k].re);
            assert_relative_eq!(diag[k].re, diag[0].re, max_relative = 1e-9);
        }
    }

    #[test]
    fn zf_fast_path_matches_full_beamformer() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (_els, ch) = random_channel_set(&mut rng, 4, 3);
            let out = zf_beamformer(&ch, 100.0, 1e-12).unwrap();
            let fast = zf_wbar_norm_sq(&ch).unwrap();
            // Algebraically identical; 1e-8 leaves headroom for the two
            // solve routes' round-off at Gram conditions up to ~1e6.
            assert_relative_eq!(out.wbar_fro_sq, fast, max_relative = 1e-8);
        }
    }

    #[test]
    fn zf_beamformer_power_is_exactly_spent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (_els, ch) = random_channel_set(&mut rng, 4, 4);
        let out = zf_beamformer(&ch, 100.0, 1e-12).unwrap();
        assert_relative_eq!(out.weights.norm_squared(), 100.0, max_relative = 1e-10);
    }

    #[test]
    fn zf_rejects_more_streams_than_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (_els, ch) = random_channel_set(&mut rng, 5, 4);
        assert_eq!(
            zf_beamformer(&ch, 100.0, 1e-12).unwrap_err(),
            BeamformingError::TooManyStreams {
                streams: 9,
                elements: 8
            }
        );
    }

    #[test]
    fn zf_rejects_duplicated_channel() {
        let els = chain(Vec3::new(4.0, 0.0, 0.0), 8);
        let h = los_channel(&els, Vec3::new(200.0, 10.0, 0.0), LAMBDA).unwrap();
        let users = ComplexMatrix::from_columns(&[h.clone(), h]);
        let ch = ChannelSet::new(users, ComplexMatrix::zeros(8, 0)).unwrap();
        assert!(matches!(
            zf_beamformer(&ch, 100.0, 1e-12),
            Err(BeamformingError::RankDeficient { .. })
        ));
    }

    #[test]
    fn zf_single_matches_general_beamformer() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (_els, ch) = random_channel_set(&mut rng, 1, 1);
        let h = ComplexVector::from_column_slice(ch.users().column(0).as_slice());
        let g = ComplexVector::from_column_slice(ch.eves().column(0).as_slice());
        let single = zf_single(&h, &g);
        // Same ‖W̄‖² through the stacked pseudoinverse route.
        let out = zf_beamformer(&ch, 100.0, 1e-12).unwrap();
        assert_relative_eq!(
            1.0 / single.inv_norm_sq,
            out.wbar_fro_sq,
            max_relative = 1e-9
        );
        // Nulling and unit effective gain.
        assert!(g.dotc(&single.wbar).norm() < 1e-12 * g.norm() * single.wbar.norm());
        let eff = h.dotc(&single.wbar);
        assert_relative_eq!(eff.re, 1.0, max_relative = 1e-9);
        assert!(eff.im.abs() < 1e-9);
    }

    #[test]
    fn zf_single_colinear_returns_zero() {
        let els = chain(Vec3::new(4.0, 0.0, 0.0), 8);
        let pos = Vec3::new(150.0, -20.0, 30.0);
        let h = los_channel(&els, pos, LAMBDA).unwrap();
        let g = &h * Complex64::new(0.5, 0.25);
        let single = zf_single(&h, &g);
        assert_eq!(single.inv_norm_sq, 0.0);
        assert!(single.wbar.iter().all(|e| *e == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn inv_norm_identity_links_both_routes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let els = chain(Vec3::new(4.0, 0.0, 0.0), 8);
        let up = random_unit(&mut rng) * 300.0;
        let ep = random_unit(&mut rng) * 700.0;
        let h = los_channel(&els, up, LAMBDA).unwrap();
        let g = los_channel(&els, ep, LAMBDA).unwrap();
        let single = zf_single(&h, &g);
        let au = array_response(&els, up, LAMBDA).unwrap();
        let ae = array_response(&els, ep, LAMBDA).unwrap();
        let corr = au.dotc(&ae).norm();
        let closed =
            inv_wnorm_closed(path_gain(up, LAMBDA).unwrap(), els.len(), corr).unwrap();
        assert_relative_eq!(single.inv_norm_sq, closed, max_relative = 1e-12);
    }

    #[test]
    fn inv_wnorm_closed_domain() {
        assert_relative_eq!(
            inv_wnorm_closed(1e-5, 64, 0.0).unwrap(),
            1e-10 * 64.0,
            max_relative = 1e-12
        );
        assert_eq!(inv_wnorm_closed(1e-5, 64, 64.0).unwrap(), 0.0);
        assert!(matches!(
            inv_wnorm_closed(1e-5, 64, 64.1),
            Err(BeamformingError::CorrelationOutOfRange { .. })
        ));
        assert!(inv_wnorm_closed(1e-5, 64, -0.1).is_err());
    }

    #[test]
    fn mrt_bound_reduces_to_snr_for_one_user() {
        let els = chain(Vec3::new(4.0, 0.0, 0.0), 8);
        let h = los_channel(&els, Vec3::new(200.0, 50.0, -10.0), LAMBDA).unwrap();
        let users = ComplexMatrix::from_columns(&[h.clone()]);
        let expect = (1.0 + 100.0 * h.norm_squared() / 1e-12).log2();
        assert_relative_eq!(mrt_upper_bound(&users, 100.0, 1e-12), expect, max_relative = 1e-12);
    }

    #[test]
    fn mrt_bound_dominates_zf_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let (_els, ch) = random_channel_set(&mut rng, 3, 3);
            let out = zf_beamformer(&ch, 100.0, 1e-12).unwrap();
            let bound = mrt_upper_bound(ch.users(), 100.0, 1e-12);
            assert!(bound >= out.rate);
        }
    }
}
