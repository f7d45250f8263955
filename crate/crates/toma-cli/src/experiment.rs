//! Experiment orchestration: expands a resolved spec into sweep cells,
//! evaluates every requested scheme per cell with common random draws,
//! and collects result rows. Per-cell failures are recorded in the row's
//! error column; only setup-level problems abort the run.

use anyhow::{anyhow, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use toma_core::correlation::{
    brute_force_min_corr, corr_far_field, corr_same_direction, min_corr_dual_cable,
    min_corr_same_direction, min_corr_single_cable, MinCorr, OrientationGrid,
};
use toma_core::geometry::{upa_positions, ArrayGeometry, Placement, Vec3};
use toma_core::optimizer::{ergodic_rate_for_elements, optimize, OptimizerParams};
use toma_core::scenarios::{generate_realizations, Realization, RegionSpec, Scenario};

use crate::config::{ExperimentKind, ExperimentSpec, Scheme};

/// One line of the results table.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub scheme: &'static str,
    pub sweep_param: &'static str,
    pub sweep_value: f64,
    pub rate_bps_hz: Option<f64>,
    pub seed: u64,
    pub runtime_s: f64,
    pub error: String,
}

pub struct RunOptions {
    pub seed: u64,
    /// Zeroes the runtime column so repeated runs are byte-identical.
    pub deterministic: bool,
}

struct Cell {
    index: usize,
    sweep_value: f64,
    /// `Err` carries the reason this cell cannot run; the row set still
    /// includes it so a sweep with one bad point completes.
    scenario: std::result::Result<Scenario, String>,
}

/// Expands the sweep axis into concrete per-cell scenarios. A cell whose
/// derived scenario fails validation is kept with the failure message.
fn derive_cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let base = &spec.scenario;
    if !spec.kind.is_sweep() {
        return vec![Cell {
            index: 0,
            sweep_value: 0.0,
            scenario: Ok(base.clone()),
        }];
    }
    spec.sweep
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let mut sc = base.clone();
            match spec.kind {
                ExperimentKind::SweepN => sc.geometry.n_per_cable = value as usize,
                ExperimentKind::SweepEves => sc.num_eves = value as usize,
                ExperimentKind::SweepMFixedBudget => {
                    // Redistribute the fixed element and cable-length
                    // budgets across the swept cable count.
                    let m = value as usize;
                    let elements = base.geometry.num_cables * base.geometry.n_per_cable;
                    let total_len = base.geometry.num_cables as f64 * base.geometry.cable_len;
                    sc.geometry.num_cables = m;
                    sc.geometry.n_per_cable = elements / m;
                    sc.geometry.cable_len = total_len / m as f64;
                }
                ExperimentKind::SweepCableLength => sc.geometry.cable_len = value,
                ExperimentKind::SweepSphereRadius => {
                    sc.user_regions = vec![RegionSpec::SphereSurface { radius: value }];
                    sc.eve_regions = vec![RegionSpec::SphereSurface { radius: value }];
                }
                ExperimentKind::SweepRician => sc.rician_factor = value,
                ExperimentKind::Convergence | ExperimentKind::AnalyzeTheorems => unreachable!(),
            }
            let scenario = sc
                .validate()
                .map(|()| sc)
                .map_err(|e| format!("sweep cell {value}: {e}"));
            Cell {
                index,
                sweep_value: value,
                scenario,
            }
        })
        .collect()
}

enum SchemeOutcome {
    Single(f64),
    /// Objective after each outer pass, keyed by iteration (0 = start).
    Trace(Vec<(usize, f64)>),
}

fn placement_elements(scenario: &Scenario, placing: Placement) -> Result<Vec<Vec3>> {
    let geom = scenario.geometry.build(placing)?;
    feasible_or_err(&geom)?;
    Ok(geom.element_positions())
}

fn feasible_or_err(geom: &ArrayGeometry) -> Result<()> {
    match geom.validate().into_iter().next() {
        None => Ok(()),
        Some(v) => Err(anyhow!("infeasible geometry: {v}")),
    }
}

fn evaluate_scheme(
    scheme: Scheme,
    scenario: &Scenario,
    optimizer: &OptimizerParams,
    reals: &[Realization],
    kind: ExperimentKind,
) -> Result<SchemeOutcome> {
    let p = scenario.radio.tx_power_w();
    let noise = scenario.radio.noise_power_w();
    let lambda = scenario.radio.wavelength_m();
    let ergodic = |elements: &[Vec3]| ergodic_rate_for_elements(elements, reals, p, noise).mean_rate;

    let rate = match scheme {
        Scheme::Horizontal => ergodic(&placement_elements(scenario, Placement::Horizontal)?),
        Scheme::Vertical => ergodic(&placement_elements(scenario, Placement::Vertical)?),
        Scheme::Hybrid => ergodic(&placement_elements(scenario, Placement::Hybrid)?),
        Scheme::FpaDense => {
            let upa = upa_positions(
                scenario.geometry.num_cables,
                scenario.geometry.n_per_cable,
                lambda / 2.0,
            )?;
            ergodic(upa.elements())
        }
        Scheme::FpaSparse => {
            let upa = upa_positions(
                scenario.geometry.num_cables,
                scenario.geometry.n_per_cable,
                2.0 * lambda,
            )?;
            ergodic(upa.elements())
        }
        Scheme::UpperBound => {
            // Power ceiling: per-user matched filtering on the hybrid
            // placement, no secrecy constraint.
            let elements = placement_elements(scenario, Placement::Hybrid)?;
            let mut acc = 0.0;
            for r in reals {
                let ch = r.channel_set(&elements)?;
                acc += toma_core::beamforming::mrt_upper_bound(ch.users(), p, noise);
            }
            acc / reals.len().max(1) as f64
        }
        Scheme::TomaOpt => {
            let start = scenario.geometry.build(Placement::Hybrid)?;
            feasible_or_err(&start)?;
            let result = optimize(&start, reals, &scenario.radio, optimizer)?;
            if kind == ExperimentKind::Convergence {
                let mut points = vec![(0, result.trace.initial_objective)];
                for (i, outer) in result.trace.outer.iter().enumerate() {
                    points.push((i + 1, outer.objective));
                }
                return Ok(SchemeOutcome::Trace(points));
            }
            result.trace.final_objective()
        }
    };
    Ok(SchemeOutcome::Single(rate))
}

/// Runs the full experiment grid. Every scheme within a cell sees the
/// identical realization ensemble (drawn once per cell from a stream
/// keyed by the cell index), so scheme comparisons are paired.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let experiment = spec.kind.as_str();
    let sweep_param = spec.kind.sweep_param();
    let mut rows = Vec::new();

    for cell in derive_cells(spec) {
        // One ensemble per cell, scheme-independent: seed fixed by the
        // run, stream keyed by the cell index.
        let prepared = cell.scenario.and_then(|sc| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(cell.index as u64);
            generate_realizations(&sc, spec.optimizer.mc_samples, &mut rng)
                .map(|reals| (sc, reals))
                .map_err(|e| e.to_string())
        });

        for &scheme in &spec.schemes {
            let started = Instant::now();
            let outcome = match &prepared {
                Ok((sc, reals)) => evaluate_scheme(scheme, sc, &spec.optimizer, reals, spec.kind),
                Err(msg) => Err(anyhow!("{msg}")),
            };
            let runtime_s = if opts.deterministic {
                0.0
            } else {
                started.elapsed().as_secs_f64()
            };
            let row = |sweep_value, rate, error| ResultRow {
                experiment,
                scheme: scheme.as_str(),
                sweep_param,
                sweep_value,
                rate_bps_hz: rate,
                seed: opts.seed,
                runtime_s,
                error,
            };
            match outcome {
                Ok(SchemeOutcome::Single(rate)) => {
                    rows.push(row(cell.sweep_value, Some(rate), String::new()));
                }
                Ok(SchemeOutcome::Trace(points)) => {
                    for (iter, rate) in points {
                        rows.push(row(iter as f64, Some(rate), String::new()));
                    }
                }
                Err(e) => rows.push(row(cell.sweep_value, None, format!("{e:#}"))),
            }
        }
    }

    rows.sort_by(|a, b| {
        let ra = Scheme::ALL.iter().position(|s| s.as_str() == a.scheme);
        let rb = Scheme::ALL.iter().position(|s| s.as_str() == b.scheme);
        ra.cmp(&rb).then(a.sweep_value.total_cmp(&b.sweep_value))
    });
    Ok(rows)
}

// ---------------------------------------------------------------------
// Closed-form vs search comparison table.
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TheoremRow {
    pub law: &'static str,
    pub n_per_cable: usize,
    pub cable_len: f64,
    pub delta: f64,
    pub wavelength: f64,
    pub closed_form: f64,
    pub search: f64,
    pub regime: String,
}

fn regime_name(law: &MinCorr) -> String {
    format!("{:?}", law.regime).to_ascii_lowercase()
}

/// Evaluates the three minimum-correlation laws on a small set of
/// parameter points and pits each against an orientation search at
/// modest grid resolution.
pub fn analyze_theorems(seed: u64) -> Vec<TheoremRow> {
    let wavelength = 0.03;
    let n = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let grid = OrientationGrid {
        polar: 48,
        azimuth: 48,
    };
    for &(delta, ratio) in &[(0.4, 0.3), (0.8, 0.75), (1.2, 1.4)] {
        let cable_len = ratio * wavelength / delta;
        let (du, de) = split_directions(delta, &mut rng);
        let law = min_corr_single_cable(n, cable_len, delta, wavelength);
        let brute = brute_force_min_corr(
            |tips| corr_far_field(tips, n, du, de, wavelength),
            1,
            cable_len,
            grid,
            20,
        );
        rows.push(TheoremRow {
            law: "single_cable",
            n_per_cable: n,
            cable_len,
            delta,
            wavelength,
            closed_form: law.value,
            search: brute.value,
            regime: regime_name(&law),
        });
    }

    let pair_grid = OrientationGrid {
        polar: 10,
        azimuth: 10,
    };
    for &(delta, ratio) in &[(0.5, 0.4), (1.0, 0.85)] {
        let nf = n as f64;
        let cable_len = ratio * nf * wavelength / (2.0 * (nf + 1.0) * delta);
        let (du, de) = split_directions(delta, &mut rng);
        let law = min_corr_dual_cable(n, cable_len, delta, wavelength);
        let brute = brute_force_min_corr(
            |tips| corr_far_field(tips, n, du, de, wavelength),
            2,
            cable_len,
            pair_grid,
            20,
        );
        rows.push(TheoremRow {
            law: "dual_cable",
            n_per_cable: n,
            cable_len,
            delta,
            wavelength,
            closed_form: law.value,
            search: brute.value,
            regime: regime_name(&law),
        });
    }

    let (dist_user, dist_eve) = (200.0, 100.0);
    for &cable_len in &[1.0, 2.0, 4.0] {
        let law = min_corr_same_direction(n, cable_len, dist_user, dist_eve, wavelength);
        let brute = brute_force_min_corr(
            |tips| corr_same_direction(tips, n, Vec3::Z, dist_user, dist_eve, wavelength),
            1,
            cable_len,
            grid,
            20,
        );
        rows.push(TheoremRow {
            law: "same_direction",
            n_per_cable: n,
            cable_len,
            delta: 0.0,
            wavelength,
            closed_form: law.value,
            search: brute.value,
            regime: regime_name(&law),
        });
    }

    rows
}

fn split_directions(delta: f64, rng: &mut ChaCha8Rng) -> (Vec3, Vec3) {
    use rand::Rng;
    let du = loop {
        let v = Vec3::new(
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
        );
        if v.norm() > 0.1 {
            break v.normalized().unwrap();
        }
    };
    let p = du.any_orthonormal();
    let q = du.cross(p);
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    let w = p * phi.cos() + q * phi.sin();
    let theta = 2.0 * (delta / 2.0).asin();
    (du, du * theta.cos() + w * theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn tiny_spec(kind_line: &str, sweep_line: &str) -> ExperimentSpec {
        let text = format!(
            "[experiment]\n{kind_line}\nschemes = [\"hybrid\", \"upper_bound\"]\n{sweep_line}\n\
             [array]\nnum_cables = 2\nn_per_cable = 2\ncable_len = 4.0\nmin_sep = 0.5\n\
             [scenario]\nnum_users = 2\nnum_eves = 1\n\
             [optimizer]\nmc_samples = 2\nouter_iters = 1\ninner_iters = 2\n"
        );
        parse_config(&text).unwrap()
    }

    #[test]
    fn fixed_budget_cells_preserve_element_and_length_totals() {
        let mut spec = tiny_spec("kind = \"sweep_m_fixed_budget\"", "sweep = [1, 2, 4]");
        spec.scenario.geometry.num_cables = 4;
        spec.scenario.geometry.n_per_cable = 4;
        spec.scenario.geometry.cable_len = 8.0;
        spec.scenario.geometry.min_sep = 0.0;
        let cells = derive_cells(&spec);
        for cell in &cells {
            let g = &cell.scenario.as_ref().unwrap().geometry;
            assert_eq!(g.num_cables * g.n_per_cable, 16);
            assert!((g.num_cables as f64 * g.cable_len - 32.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_radius_cells_replace_both_region_lists() {
        let spec = tiny_spec("kind = \"sweep_sphere_radius\"", "sweep = [150.0, 300.0]");
        let cells = derive_cells(&spec);
        let sc = cells[1].scenario.as_ref().unwrap();
        assert_eq!(
            sc.user_regions,
            vec![RegionSpec::SphereSurface { radius: 300.0 }]
        );
        assert_eq!(
            sc.eve_regions,
            vec![RegionSpec::SphereSurface { radius: 300.0 }]
        );
    }

    #[test]
    fn rows_are_paired_per_cell_and_sorted() {
        let spec = tiny_spec("kind = \"sweep_cable_length\"", "sweep = [2.0, 4.0]");
        let opts = RunOptions {
            seed: 3,
            deterministic: true,
        };
        let rows = run_experiment(&spec, &opts).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.error.is_empty()));
        assert!(rows.iter().all(|r| r.runtime_s == 0.0));
        // hybrid rows first (scheme rank), each ascending in sweep value
        assert_eq!(rows[0].scheme, "hybrid");
        assert_eq!(rows[1].scheme, "hybrid");
        assert!(rows[0].sweep_value < rows[1].sweep_value);
        assert_eq!(rows[3].scheme, "upper_bound");
        // the bound dominates the constrained rate cell by cell
        assert!(rows[2].rate_bps_hz.unwrap() >= rows[0].rate_bps_hz.unwrap());
        assert!(rows[3].rate_bps_hz.unwrap() >= rows[1].rate_bps_hz.unwrap());
    }

    #[test]
    fn convergence_traces_start_at_the_initial_objective() {
        let mut spec = tiny_spec("kind = \"convergence\"", "");
        spec.schemes = vec![crate::config::Scheme::TomaOpt];
        let opts = RunOptions {
            seed: 3,
            deterministic: true,
        };
        let rows = run_experiment(&spec, &opts).unwrap();
        assert!(rows.len() >= 2);
        assert_eq!(rows[0].sweep_param, "outer_iter");
        assert_eq!(rows[0].sweep_value, 0.0);
        for pair in rows.windows(2) {
            assert!(pair[1].rate_bps_hz.unwrap() >= pair[0].rate_bps_hz.unwrap());
        }
    }

    #[test]
    fn per_cell_failures_land_in_the_error_column() {
        // Second cell asks for 3 users + 4 eavesdroppers from 6 elements;
        // it must fail softly while the first cell still produces rates.
        let mut spec = tiny_spec("kind = \"sweep_eves\"", "sweep = [1, 4]");
        spec.schemes = vec![crate::config::Scheme::Horizontal];
        spec.scenario.num_users = 3;
        spec.scenario.geometry.num_cables = 3;
        spec.scenario.geometry.min_sep = 0.0;
        let opts = RunOptions {
            seed: 3,
            deterministic: true,
        };
        let rows = run_experiment(&spec, &opts).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            if row.sweep_value == 1.0 {
                assert!(row.error.is_empty() && row.rate_bps_hz.is_some());
            } else {
                assert!(!row.error.is_empty() && row.rate_bps_hz.is_none());
            }
        }
    }

    #[test]
    fn theorem_table_matches_search_at_modest_grids() {
        let rows = analyze_theorems(11);
        assert_eq!(rows.len(), 8);
        for row in &rows {
            let scale = row.n_per_cable as f64;
            assert!(
                (row.closed_form - row.search).abs() <= 0.02 * scale,
                "{} at L = {}: law {} vs search {}",
                row.law,
                row.cable_len,
                row.closed_form,
                row.search
            );
        }
    }
}
