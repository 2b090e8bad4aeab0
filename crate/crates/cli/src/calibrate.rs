//! Field-constant calibration: sweeps the target decay length and the
//! candidate threshold until a reference ring sits inside the target
//! distance band.
//!
//! The reference controller is the single-motif tree `(POS 1.0 x1)` run
//! against one isolated target (the scenario's first waypoint) in an
//! obstacle-free copy of the region. A sweep cell is feasible when the
//! extracted band is nonempty with all radii inside `[d_min, d_max]`;
//! among feasible cells the sweep picks the largest margin
//! `min(ring_min - d_min, d_max - ring_max)`, breaking ties toward the
//! smaller decay length, then the smaller threshold.

use std::fmt::Write as _;

use serde::Serialize;

use morphoevo_core::field::{
    build_obstacle_field, build_target_field, evaluate_tree_field, extract_pattern_band,
    FieldConfig,
};
use morphoevo_core::fitness::FitnessConfig;
use morphoevo_core::genome::GrnTree;
use morphoevo_core::geom::dist;
use morphoevo_core::scenario::Scenario;

pub const LAMBDA_GRID: [f64; 7] = [0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0];
pub const TAU_GRID: [f64; 10] =
    [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

/// One sweep cell: the reference ring it produced and whether it fits.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda_t: f64,
    pub tau: f64,
    pub pattern_size: usize,
    pub ring_min: Option<f64>,
    pub ring_max: Option<f64>,
    pub feasible: bool,
}

/// The chosen constants and the ring that justified them.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Calibration {
    pub lambda_t: f64,
    pub tau: f64,
    pub ring_min: f64,
    pub ring_max: f64,
}

/// Runs the full sweep for a scenario's region and first waypoint.
pub fn sweep(scenario: &Scenario) -> morphoevo_core::Result<(Vec<SweepRow>, Option<Calibration>)> {
    let fit = FitnessConfig::default();
    let spec = scenario.region;
    let target = scenario.trajectories[0][0];
    let reference = GrnTree::parse("(POS 1.0 x1)")?;
    let mut rows = Vec::with_capacity(LAMBDA_GRID.len() * TAU_GRID.len());
    let mut best: Option<(f64, Calibration)> = None;
    for lambda_t in LAMBDA_GRID {
        for tau in TAU_GRID {
            let cfg = FieldConfig { lambda_t, tau, ..FieldConfig::default() };
            let x1 = build_target_field(&[target], &spec, &cfg)?;
            let x2 = build_obstacle_field(&[], &spec, &cfg)?;
            let out = evaluate_tree_field(&reference, &x1, &x2)?;
            let pattern = extract_pattern_band(&out, &[], &cfg)?;
            let mut row = SweepRow {
                lambda_t,
                tau,
                pattern_size: pattern.len(),
                ring_min: None,
                ring_max: None,
                feasible: false,
            };
            if !pattern.is_empty() {
                let radii = pattern.points.iter().map(|&p| dist(p, target));
                let ring_min = radii.clone().fold(f64::INFINITY, f64::min);
                let ring_max = radii.fold(f64::NEG_INFINITY, f64::max);
                row.ring_min = Some(ring_min);
                row.ring_max = Some(ring_max);
                row.feasible = ring_min >= fit.d_min && ring_max <= fit.d_max;
                if row.feasible {
                    let margin = (ring_min - fit.d_min).min(fit.d_max - ring_max);
                    // Strict improvement keeps the first (smallest lambda,
                    // then tau) among margin ties.
                    if best.as_ref().map_or(true, |(m, _)| margin > *m) {
                        best =
                            Some((margin, Calibration { lambda_t, tau, ring_min, ring_max }));
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok((rows, best.map(|(_, c)| c)))
}

/// The annulus-radius table as CSV.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda_t,tau,pattern_size,ring_min,ring_max,feasible\n");
    for r in rows {
        let fmt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.lambda_t,
            r.tau,
            r.pattern_size,
            fmt(r.ring_min),
            fmt(r.ring_max),
            r.feasible
        )
        .expect("string write");
    }
    out
}
