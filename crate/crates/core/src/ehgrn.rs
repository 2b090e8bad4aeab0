//! Hand-designed 13-node regulatory networks, the baselines the evolved
//! trees are measured against.
//!
//! Each variant wires three two-input branches (an AND-like, an OR- or
//! AND-like, and a third gate) into a final summing sigmoid. All sigmoids
//! use unit steepness; only the thirteen thresholds differ between the two
//! variants. Like the evolved trees, the networks sense depletion: the
//! field wrapper hands them `1 - x1` and `1 - x2`.
//!
//! The closed-form output is the unique fixed point of the relaxation
//! dynamics `dy/dt = production(y) - y`; the cascade is feed-forward, so
//! iterating the production map four times from any state reaches the fixed
//! point exactly (one sweep per layer).
//!
//! The second variant's third branch exists in two wirings: the default
//! feeds it from the second depletion signal; the alternate leaves the
//! branch silent (`g3 = 0`), which frees the final gate's inhibitory input
//! to sit at its threshold midpoint.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{extract_pattern_band, FieldConfig, MorphogenField, Pattern};
use crate::motif::sig_raw;
use crate::scenario::ScenarioFields;
use crate::{Error, Result};

/// Thresholds `t1..t13` of the first channel-task network.
pub const TASK1_THETAS: [f64; 13] = [
    1.0, 0.5328, 1.0, 0.4448, 0.0, 0.934, 2.0, 1.2095, 1.6798, 1.0, 0.5385, 0.2763, 1.3445,
];

/// Thresholds `t1..t13` of the second channel-task network.
pub const TASK2_THETAS: [f64; 13] = [
    0.1438, 1.0, 0.3457, 0.8571, 0.3827, 1.0, 1.5841, 1.1972, 0.4208, 0.0, 0.0, 0.5977, 0.6777,
];

/// Which of the two hand-designed wirings to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EhGrnVariant {
    Task1,
    Task2,
}

/// A hand-designed network: a wiring variant plus its thirteen thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EhGrnModel {
    pub variant: EhGrnVariant,
    pub thetas: [f64; 13],
    /// Disable the second variant's third branch (`g3 = 0`) instead of
    /// feeding it from the second input. Ignored by the first variant.
    #[serde(default)]
    pub silent_third_branch: bool,
}

impl EhGrnModel {
    /// The first-task network with its published thresholds.
    pub fn task1() -> Self {
        Self { variant: EhGrnVariant::Task1, thetas: TASK1_THETAS, silent_third_branch: false }
    }

    /// The second-task network, third branch fed from the second input.
    pub fn task2() -> Self {
        Self { variant: EhGrnVariant::Task2, thetas: TASK2_THETAS, silent_third_branch: false }
    }

    /// The second-task network with the third branch disabled.
    pub fn task2_silent() -> Self {
        Self { silent_third_branch: true, ..Self::task2() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("network thresholds must be finite".into()));
        }
        Ok(())
    }

    /// Production terms given the current state, layout
    /// `[y1..y6, g1, g2, g3, y7, y8, y9, m]`. The first six depend only on
    /// the inputs, each later layer only on the previous one, so the steady
    /// state satisfies `production(state) == state` exactly.
    pub fn production(&self, p1: f64, p2: f64, state: &[f64; 13]) -> [f64; 13] {
        let t = &self.thetas;
        let s = |x: f64, i: usize| sig_raw(x, t[i], 1.0);
        let [y1, y2, y3, y4, y5, y6, g1, g2, g3, y7, y8, y9, _] = *state;
        match self.variant {
            EhGrnVariant::Task1 => [
                1.0 - s(p1, 0),
                1.0 - s(p2, 1),
                s(p1, 2),
                s(p2, 3),
                s(p1, 4),
                s(p2, 5),
                s(y1 * y2, 6),
                s(y3 + y4, 7),
                s(y5 * y6, 8),
                1.0 - s(g1, 9),
                s(g2, 10),
                s(g3, 11),
                s(y7 + y8 + y9, 12),
            ],
            EhGrnVariant::Task2 => [
                s(p1, 0),
                1.0 - s(p2, 1),
                s(p1, 2),
                1.0 - s(p2, 3),
                s(p1, 4),
                s(p2, 5),
                s(y1 * y2, 6),
                s(y3 * y4, 7),
                if self.silent_third_branch { 0.0 } else { s(y5 * y6, 8) },
                s(g1, 9),
                s(g2, 10),
                1.0 - s(g3, 11),
                s(y7 + y8 + y9, 12),
            ],
        }
    }

    /// Steady state of every node for depletion inputs `p1`, `p2`.
    pub fn state(&self, p1: f64, p2: f64) -> [f64; 13] {
        let mut s = [0.0; 13];
        for _ in 0..4 {
            s = self.production(p1, p2, &s);
        }
        s
    }

    /// Steady-state output morphogen for depletion inputs `p1`, `p2`.
    pub fn eval(&self, p1: f64, p2: f64) -> f64 {
        self.state(p1, p2)[12]
    }
}

/// Evaluates a network per cell, complementing both input fields the same
/// way tree evaluation does.
pub fn ehgrn_steady_field(
    model: &EhGrnModel,
    x1: &MorphogenField,
    x2: &MorphogenField,
) -> Result<MorphogenField> {
    model.validate()?;
    if x1.spec != x2.spec {
        return Err(Error::Grid("input fields on different grids".into()));
    }
    let values = x1
        .values
        .par_iter()
        .zip(x2.values.par_iter())
        .map(|(&a, &b)| model.eval(1.0 - a, 1.0 - b))
        .collect();
    Ok(MorphogenField { spec: x1.spec, values })
}

/// Runs a network over one waypoint's fields and extracts the pattern band.
/// Only the threshold fraction of `cfg` participates here; the fields were
/// built with their own decay lengths.
pub fn ehgrn_pattern(
    model: &EhGrnModel,
    fields: &ScenarioFields,
    waypoint: usize,
    cfg: &FieldConfig,
) -> Result<Pattern> {
    let target = fields.target_fields.get(waypoint).ok_or_else(|| {
        Error::Config(format!(
            "waypoint {waypoint} out of range ({} available)",
            fields.target_fields.len()
        ))
    })?;
    let steady = ehgrn_steady_field(model, target, &fields.obstacle_field)?;
    let mut pattern = extract_pattern_band(&steady, &fields.obstacle_mask, cfg)?;
    pattern.waypoint_index = waypoint;
    Ok(pattern)
}
