//! The two minimized objectives: structural complexity and pattern accuracy.
//!
//! `f1` is the tree's node count. `f2` scores the extracted pattern at each
//! waypoint with smooth penalty terms and averages over the trajectory:
//! per candidate point i and target j, `sig(d_pt, d_max, k1)` penalizes
//! points beyond the allowed band and `sig(d_min, d_pt, k2)` points inside
//! it; per point i and obstacle primitive k, `sig(d_obs_min, d_po, k3)`
//! penalizes clearance violations. Each double sum is normalized by its pair
//! count, so the target term lies in (0, 2) and the obstacle term in (0, 1).
//! The obstacle term is omitted when the scenario has no obstacles. A
//! waypoint with an empty or degenerate pattern contributes the sentinel
//! penalty 2.0, which dominates any real pattern while keeping crowding
//! arithmetic finite.
//!
//! Steepness defaults to 20 per meter: a ~0.2 m soft boundary, sharp enough
//! to separate feasible from infeasible patterns yet smooth for evolution.
//!
//! Every objective evaluation increments a shared [`EvalBudget`]; that
//! counter is the currency evolution budgets are stated in. The counter is
//! atomic so concurrent inner-loop evaluations stay linearizable.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::field::{evaluate_tree_field, extract_pattern_band, Pattern};
use crate::genome::GrnTree;
use crate::geom::{dist, Obstacle, Point};
use crate::scenario::ScenarioFields;
use crate::{Error, Result};

/// Penalty assigned to a waypoint whose pattern is empty or degenerate: the
/// supremum of the per-pair target penalty.
pub const EMPTY_PATTERN_PENALTY: f64 = 2.0;

/// Distance thresholds and penalty steepness for the accuracy objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    /// Minimum allowed point-to-target distance (m).
    pub d_min: f64,
    /// Maximum allowed point-to-target distance (m).
    pub d_max: f64,
    /// Minimum allowed point-to-obstacle clearance (m).
    pub d_obs_min: f64,
    /// Steepness of the too-far penalty (1/m).
    pub k1: f64,
    /// Steepness of the too-close penalty (1/m).
    pub k2: f64,
    /// Steepness of the obstacle-clearance penalty (1/m).
    pub k3: f64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self { d_min: 1.0, d_max: 2.0, d_obs_min: 2.0, k1: 20.0, k2: 20.0, k3: 20.0 }
    }
}

impl FitnessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min > 0.0 && self.d_min < self.d_max && self.d_obs_min > 0.0) {
            return Err(Error::Config(format!(
                "need 0 < d_min < d_max and d_obs_min > 0, got {} / {} / {}",
                self.d_min, self.d_max, self.d_obs_min
            )));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.k3 > 0.0) {
            return Err(Error::Config("penalty steepness must be positive".into()));
        }
        Ok(())
    }
}

/// The objective pair; both are minimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    /// Node count of the tree.
    pub f1: usize,
    /// Mean per-waypoint accuracy penalty.
    pub f2: f64,
}

impl Objectives {
    /// The pair as a vector for dominance and hypervolume arithmetic.
    pub fn vector(&self) -> [f64; 2] {
        [self.f1 as f64, self.f2]
    }
}

/// Shared evaluation counters. `total` counts every objective evaluation
/// including DE-internal ones; `outer` only the per-individual evaluations
/// the outer loop records. Either can serve as the budget currency.
#[derive(Debug, Default)]
pub struct EvalBudget {
    total: AtomicU64,
    outer: AtomicU64,
}

impl EvalBudget {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> u64 {
        self.total.load(Ordering::Relaxed)
    }

    pub fn outer(&self) -> u64 {
        self.outer.load(Ordering::Relaxed)
    }

    /// Counts one outer-loop individual evaluation.
    pub fn record_outer(&self) {
        self.outer.fetch_add(1, Ordering::Relaxed);
    }

    fn record_total(&self) {
        self.total.fetch_add(1, Ordering::Relaxed);
    }
}

/// `1 / (1 + exp(-k (x - threshold)))`: rises from 0 to 1 as `x` crosses
/// `threshold`, over a width set by `k`.
fn penalty_sig(x: f64, threshold: f64, k: f64) -> f64 {
    1.0 / (1.0 + (-k * (x - threshold)).exp())
}

/// Accuracy penalty of one waypoint's pattern. Empty patterns score the
/// sentinel penalty 2.0.
pub fn accuracy_at_waypoint(
    pattern: &Pattern,
    targets: &[Point],
    obstacles: &[Obstacle],
    cfg: &FitnessConfig,
) -> Result<f64> {
    cfg.validate()?;
    if targets.is_empty() {
        return Err(Error::NoTargets);
    }
    if pattern.is_empty() {
        return Ok(EMPTY_PATTERN_PENALTY);
    }
    let np = pattern.points.len() as f64;
    let mut target_term = 0.0;
    for &p in &pattern.points {
        for &t in targets {
            let d = dist(p, t);
            target_term += penalty_sig(d, cfg.d_max, cfg.k1) + penalty_sig(cfg.d_min, d, cfg.k2);
        }
    }
    let mut penalty = target_term / (np * targets.len() as f64);
    if !obstacles.is_empty() {
        let mut obstacle_term = 0.0;
        for &p in &pattern.points {
            for o in obstacles {
                obstacle_term += penalty_sig(cfg.d_obs_min, o.distance(p), cfg.k3);
            }
        }
        penalty += obstacle_term / (np * obstacles.len() as f64);
    }
    Ok(penalty)
}

/// Evaluates both objectives for a tree over all waypoints of a scenario,
/// incrementing the budget's total counter exactly once.
pub fn evaluate_objectives(
    tree: &GrnTree,
    fields: &ScenarioFields,
    cfg: &FitnessConfig,
    budget: &EvalBudget,
) -> Result<Objectives> {
    budget.record_total();
    let scenario = &fields.scenario;
    let mut sum = 0.0;
    for (i, target_field) in fields.target_fields.iter().enumerate() {
        let out = evaluate_tree_field(tree, target_field, &fields.obstacle_field)?;
        let penalty =
            match extract_pattern_band(&out, &fields.obstacle_mask, &scenario.field) {
                Ok(p) if !p.is_empty() => {
                    accuracy_at_waypoint(&p, &scenario.targets_at(i), &scenario.obstacles, cfg)?
                }
                Ok(_) | Err(Error::DegeneratePattern) => EMPTY_PATTERN_PENALTY,
                Err(e) => return Err(e),
            };
        sum += penalty;
    }
    Ok(Objectives {
        f1: tree.node_count(),
        f2: sum / fields.waypoint_count() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn one_point(p: Point) -> Pattern {
        Pattern { points: vec![p], cells: vec![(0, 0)], waypoint_index: 0 }
    }

    #[test]
    fn in_band_point_scores_near_zero() {
        // 1.5 m from the target: both terms are sig at 10 k-units past their
        // comfortable side, 2 / (1 + e^10) total.
        let got =
            accuracy_at_waypoint(&one_point((1.5, 0.0)), &[(0.0, 0.0)], &[], &Default::default())
                .unwrap();
        assert_abs_diff_eq!(got, 2.0 / (1.0 + 10f64.exp()), epsilon = 1e-18);
    }

    #[test]
    fn point_on_target_violates_d_min() {
        let got =
            accuracy_at_waypoint(&one_point((0.0, 0.0)), &[(0.0, 0.0)], &[], &Default::default())
                .unwrap();
        // Too-close term saturates toward 1; too-far term vanishes.
        assert!(got > 0.999 && got < 1.001);
    }

    #[test]
    fn point_at_d_max_scores_half() {
        let got =
            accuracy_at_waypoint(&one_point((2.0, 0.0)), &[(0.0, 0.0)], &[], &Default::default())
                .unwrap();
        let too_close = penalty_sig(1.0, 2.0, 20.0);
        assert_abs_diff_eq!(got, 0.5 + too_close, epsilon = 1e-15);
    }

    #[test]
    fn point_at_clearance_threshold_scores_half_obstacle_term() {
        let obstacles = vec![Obstacle::Rect { x0: -1.0, y0: -1.0, x1: 0.0, y1: 1.0 }];
        let cfg = FitnessConfig::default();
        // Point 2 m right of the wall, 1.5 m from the target: obstacle term
        // exactly 0.5, target term negligible.
        let got = accuracy_at_waypoint(&one_point((2.0, 0.0)), &[(3.5, 0.0)], &obstacles, &cfg)
            .unwrap();
        assert_abs_diff_eq!(got, 0.5 + 2.0 / (1.0 + 10f64.exp()), epsilon = 1e-12);
    }

    #[test]
    fn empty_pattern_scores_sentinel() {
        let empty = Pattern { points: vec![], cells: vec![], waypoint_index: 0 };
        let got = accuracy_at_waypoint(&empty, &[(0.0, 0.0)], &[], &Default::default()).unwrap();
        assert_eq!(got, EMPTY_PATTERN_PENALTY);
    }

    #[test]
    fn no_targets_is_an_error() {
        assert!(accuracy_at_waypoint(&one_point((1.0, 0.0)), &[], &[], &Default::default())
            .is_err());
    }

    #[test]
    fn config_validation() {
        let bad = FitnessConfig { d_min: 2.0, d_max: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = FitnessConfig { k3: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn objectives_over_channel() {
        let fields = ScenarioFields::new(Scenario::builtin("channel").unwrap()).unwrap();
        let budget = EvalBudget::new();
        let tree = GrnTree::parse("x1").unwrap();
        let a = evaluate_objectives(&tree, &fields, &Default::default(), &budget).unwrap();
        assert_eq!(a.f1, 1);
        assert!(a.f2.is_finite() && a.f2 >= 0.0 && a.f2 < 3.0);
        assert_eq!(budget.total(), 1);
        assert_eq!(budget.outer(), 0);
        // Determinism: a second evaluation reproduces the pair bit-for-bit.
        let b = evaluate_objectives(&tree, &fields, &Default::default(), &budget).unwrap();
        assert_eq!(a, b);
        assert_eq!(budget.total(), 2);
    }

    #[test]
    fn ring_model_beats_identity_on_channel() {
        // The published demo chain forms a clean ring; a bare terminal does
        // not. Its accuracy penalty must reflect that.
        let fields = ScenarioFields::new(Scenario::builtin("channel").unwrap()).unwrap();
        let budget = EvalBudget::new();
        let ring = GrnTree::parse("(XNOR 0.9256 (NAND 0.8393 x1 x1) x2)").unwrap();
        let bare = GrnTree::parse("x1").unwrap();
        let fr = evaluate_objectives(&ring, &fields, &Default::default(), &budget).unwrap();
        let fb = evaluate_objectives(&bare, &fields, &Default::default(), &budget).unwrap();
        assert!(fr.f2 < fb.f2, "ring {} vs bare {}", fr.f2, fb.f2);
        assert!(fr.f2 < 0.1, "ring should be near-feasible, got {}", fr.f2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn obstacle_term_grows_as_clearance_shrinks(
            d_far in 0.5f64..=3.2,
            shrink in 0.01f64..=0.4,
        ) {
            // One point, one wall, the target riding 1.5 m beyond the point
            // so the target term is the same constant on both sides: strictly
            // less clearance means a strictly larger penalty, on either side
            // of d_obs_min. (Clearance is capped at 3.2 m; far beyond the
            // threshold the term falls below f64 resolution of the total.)
            let obstacles = vec![Obstacle::Rect { x0: -1.0, y0: -5.0, x1: 0.0, y1: 5.0 }];
            let cfg = FitnessConfig::default();
            let at = |x: f64| {
                accuracy_at_waypoint(&one_point((x, 0.0)), &[(x + 1.5, 0.0)], &obstacles, &cfg)
                    .unwrap()
            };
            prop_assert!(at(d_far - shrink) > at(d_far));
        }

        #[test]
        fn penalty_is_finite_and_bounded(
            px in -5.0f64..=25.0,
            py in -5.0f64..=25.0,
            tx in 0.0f64..=20.0,
            ty in 0.0f64..=20.0,
        ) {
            let obstacles = vec![
                Obstacle::Rect { x0: 5.0, y0: 5.0, x1: 6.0, y1: 15.0 },
                Obstacle::Rect { x0: 14.0, y0: 5.0, x1: 15.0, y1: 15.0 },
            ];
            let got = accuracy_at_waypoint(
                &one_point((px, py)),
                &[(tx, ty)],
                &obstacles,
                &Default::default(),
            )
            .unwrap();
            prop_assert!(got.is_finite());
            prop_assert!(got > 0.0 && got < 3.0);
        }
    }
}
