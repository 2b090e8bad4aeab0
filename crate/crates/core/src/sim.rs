//! Runs a controller (evolved tree or hand-designed network) along a
//! scenario's trajectory and reports per-waypoint pattern metrics: sizes,
//! target and obstacle clearances, violation flags, connected components,
//! and robot-count estimates.
//!
//! An empty pattern at a waypoint marks that waypoint degenerate and the
//! run continues; its accuracy takes the worst-case penalty so the
//! aggregate matches the fitness pipeline exactly.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::ehgrn::{ehgrn_steady_field, EhGrnModel, EhGrnVariant};
use crate::field::{evaluate_tree_field, extract_pattern_band, MorphogenField, Pattern};
use crate::fitness::{accuracy_at_waypoint, FitnessConfig, EMPTY_PATTERN_PENALTY};
use crate::genome::GrnTree;
use crate::geom::{dist, Point};
use crate::scenario::ScenarioFields;
use crate::{Error, Result};

/// Either kind of controller a scenario run accepts.
#[derive(Debug, Clone, PartialEq)]
pub enum SwarmModel {
    Tree(GrnTree),
    Baseline(EhGrnModel),
}

impl SwarmModel {
    /// Steady-state output field over complemented inputs.
    pub fn steady_field(
        &self,
        x1: &MorphogenField,
        x2: &MorphogenField,
    ) -> Result<MorphogenField> {
        match self {
            SwarmModel::Tree(tree) => evaluate_tree_field(tree, x1, x2),
            SwarmModel::Baseline(model) => ehgrn_steady_field(model, x1, x2),
        }
    }

    /// Short display form: tree text or baseline name.
    pub fn describe(&self) -> String {
        match self {
            SwarmModel::Tree(tree) => tree.serialize(),
            SwarmModel::Baseline(model) => match (model.variant, model.silent_third_branch) {
                (EhGrnVariant::Task1, _) => "baseline:task1".into(),
                (EhGrnVariant::Task2, false) => "baseline:task2".into(),
                (EhGrnVariant::Task2, true) => "baseline:task2-silent".into(),
            },
        }
    }
}

/// Run-level knobs on top of the scenario's own field settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub fitness: FitnessConfig,
    /// Desired spacing between robots along the pattern boundary, meters.
    pub robot_spacing: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { fitness: FitnessConfig::default(), robot_spacing: 0.5 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.fitness.validate()?;
        if !(self.robot_spacing > 0.0 && self.robot_spacing.is_finite()) {
            return Err(Error::Config(format!(
                "robot spacing {} must be positive and finite",
                self.robot_spacing
            )));
        }
        Ok(())
    }
}

/// Distance band one target sees from the pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetDistance {
    pub min: f64,
    pub max: f64,
}

/// Metrics for one waypoint step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointReport {
    pub waypoint: usize,
    pub pattern_size: usize,
    /// The pattern came out empty; distance fields are absent.
    pub degenerate: bool,
    /// Per-target min/max distance from pattern points; empty when degenerate.
    pub target_distances: Vec<TargetDistance>,
    /// Closest approach over all targets; absent when degenerate.
    pub distance_min: Option<f64>,
    /// Farthest excursion over all targets; absent when degenerate.
    pub distance_max: Option<f64>,
    /// Minimum pattern-to-obstacle distance; absent when degenerate or
    /// the scenario has no obstacles.
    pub obstacle_distance: Option<f64>,
    pub violates_d_min: bool,
    pub violates_d_max: bool,
    pub violates_obstacle_clearance: bool,
    /// 8-connected components of the pattern; 0 when degenerate.
    pub component_count: usize,
    /// Per-waypoint fitness term (worst-case penalty when degenerate).
    pub accuracy: f64,
    /// Robots needed to populate the pattern boundary; 0 when degenerate.
    pub robot_estimate: usize,
}

/// Full trajectory run: per-waypoint metrics plus the aggregate objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    /// Display form of the controller that produced the run.
    pub model: String,
    pub waypoints: Vec<WaypointReport>,
    /// Mean per-waypoint accuracy, identical to the fitness objective.
    pub f2: f64,
    /// Candidate points per waypoint, for rendering; indices match
    /// `waypoints`.
    pub patterns: Vec<Pattern>,
}

/// Runs `model` over every waypoint of a prepared scenario.
pub fn run_model(
    model: &SwarmModel,
    fields: &ScenarioFields,
    cfg: &SimConfig,
) -> Result<RunReport> {
    cfg.validate()?;
    let scenario = &fields.scenario;
    let field_cfg = scenario.field;
    let mut waypoints = Vec::with_capacity(fields.waypoint_count());
    let mut patterns = Vec::with_capacity(fields.waypoint_count());
    let mut accuracy_sum = 0.0;
    for (wp, target_field) in fields.target_fields.iter().enumerate() {
        let steady = model.steady_field(target_field, &fields.obstacle_field)?;
        let mut pattern = match extract_pattern_band(&steady, &fields.obstacle_mask, &field_cfg)
        {
            Ok(p) => p,
            Err(Error::DegeneratePattern) => {
                Pattern { points: Vec::new(), cells: Vec::new(), waypoint_index: wp }
            }
            Err(e) => return Err(e),
        };
        pattern.waypoint_index = wp;
        let targets = scenario.targets_at(wp);
        let report = waypoint_report(wp, &pattern, &targets, fields, cfg)?;
        accuracy_sum += report.accuracy;
        waypoints.push(report);
        patterns.push(pattern);
    }
    Ok(RunReport {
        scenario: scenario.name.clone(),
        model: model.describe(),
        f2: accuracy_sum / waypoints.len() as f64,
        waypoints,
        patterns,
    })
}

fn waypoint_report(
    wp: usize,
    pattern: &Pattern,
    targets: &[Point],
    fields: &ScenarioFields,
    cfg: &SimConfig,
) -> Result<WaypointReport> {
    let scenario = &fields.scenario;
    let fit = &cfg.fitness;
    if pattern.is_empty() {
        return Ok(WaypointReport {
            waypoint: wp,
            pattern_size: 0,
            degenerate: true,
            target_distances: Vec::new(),
            distance_min: None,
            distance_max: None,
            obstacle_distance: None,
            violates_d_min: false,
            violates_d_max: false,
            violates_obstacle_clearance: false,
            component_count: 0,
            accuracy: EMPTY_PATTERN_PENALTY,
            robot_estimate: 0,
        });
    }
    let target_distances: Vec<TargetDistance> = targets
        .iter()
        .map(|&t| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &p in &pattern.points {
                let d = dist(p, t);
                lo = lo.min(d);
                hi = hi.max(d);
            }
            TargetDistance { min: lo, max: hi }
        })
        .collect();
    let distance_min = target_distances.iter().map(|t| t.min).fold(f64::INFINITY, f64::min);
    let distance_max =
        target_distances.iter().map(|t| t.max).fold(f64::NEG_INFINITY, f64::max);
    let obstacle_distance = (!scenario.obstacles.is_empty()).then(|| {
        pattern
            .points
            .iter()
            .map(|&p| {
                scenario
                    .obstacles
                    .iter()
                    .map(|o| o.distance(p))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    });
    let accuracy = accuracy_at_waypoint(pattern, targets, &scenario.obstacles, fit)?;
    Ok(WaypointReport {
        waypoint: wp,
        pattern_size: pattern.len(),
        degenerate: false,
        distance_min: Some(distance_min),
        distance_max: Some(distance_max),
        obstacle_distance,
        violates_d_min: distance_min < fit.d_min,
        violates_d_max: distance_max > fit.d_max,
        violates_obstacle_clearance: obstacle_distance.is_some_and(|d| d < fit.d_obs_min),
        component_count: component_count(pattern),
        target_distances,
        accuracy,
        robot_estimate: estimate_robot_count(
            pattern,
            scenario.region.resolution,
            cfg.robot_spacing,
        )?,
    })
}

/// Number of 8-connected components among the pattern cells.
pub fn component_count(pattern: &Pattern) -> usize {
    let cells: HashSet<(usize, usize)> = pattern.cells.iter().copied().collect();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut components = 0;
    for &start in &pattern.cells {
        if seen.contains(&start) {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen.insert(start);
        while let Some((ix, iy)) = stack.pop() {
            for dx in -1i64..=1 {
                for dy in -1i64..=1 {
                    let nx = ix as i64 + dx;
                    let ny = iy as i64 + dy;
                    if (dx == 0 && dy == 0) || nx < 0 || ny < 0 {
                        continue;
                    }
                    let n = (nx as usize, ny as usize);
                    if cells.contains(&n) && seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
        }
    }
    components
}

/// Robots needed to populate the pattern boundary at `spacing` meters
/// apart: boundary-cell count times resolution, divided by spacing,
/// rounded up (at least one).
pub fn estimate_robot_count(
    pattern: &Pattern,
    resolution: f64,
    spacing: f64,
) -> Result<usize> {
    if pattern.is_empty() {
        return Err(Error::Config("cannot size a robot swarm for an empty pattern".into()));
    }
    if !(spacing > 0.0 && resolution > 0.0) {
        return Err(Error::Config(format!(
            "resolution {resolution} and spacing {spacing} must be positive"
        )));
    }
    let cells: HashSet<(usize, usize)> = pattern.cells.iter().copied().collect();
    let boundary = pattern
        .cells
        .iter()
        .filter(|&&(ix, iy)| {
            let neighbors = [
                ix.checked_sub(1).map(|x| (x, iy)),
                Some((ix + 1, iy)),
                iy.checked_sub(1).map(|y| (ix, y)),
                Some((ix, iy + 1)),
            ];
            neighbors.iter().any(|n| n.map_or(true, |n| !cells.contains(&n)))
        })
        .count();
    Ok(((boundary as f64 * resolution / spacing).ceil() as usize).max(1))
}

/// A robot-to-point matching with its summed travel distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `(robot index, pattern point index)` pairs, sorted by robot index.
    pub pairs: Vec<(usize, usize)>,
    pub total_displacement: f64,
}

/// Matches robots to candidate points by iteratively pairing the globally
/// closest unmatched robot and point. Requires equal counts.
pub fn assign_robots(pattern: &Pattern, robots: &[Point]) -> Result<Assignment> {
    if robots.len() != pattern.points.len() {
        return Err(Error::Config(format!(
            "{} robots cannot cover {} candidate points",
            robots.len(),
            pattern.points.len()
        )));
    }
    let n = robots.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (r, &rp) in robots.iter().enumerate() {
        for (p, &pp) in pattern.points.iter().enumerate() {
            edges.push((dist(rp, pp), r, p));
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let mut robot_used = vec![false; n];
    let mut point_used = vec![false; n];
    let mut pairs = Vec::with_capacity(n);
    let mut total = 0.0;
    for (d, r, p) in edges {
        if !robot_used[r] && !point_used[p] {
            robot_used[r] = true;
            point_used[p] = true;
            pairs.push((r, p));
            total += d;
            if pairs.len() == n {
                break;
            }
        }
    }
    pairs.sort_unstable();
    Ok(Assignment { pairs, total_displacement: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use crate::fitness::{evaluate_objectives, EvalBudget};
    use crate::genome::GrnTree;
    use crate::scenario::Scenario;
    use approx::assert_abs_diff_eq;

    fn channel_fields() -> ScenarioFields {
        ScenarioFields::new(Scenario::builtin("channel").unwrap()).unwrap()
    }

    fn demo_tree() -> GrnTree {
        GrnTree::parse("(XNOR 0.9256 (NAND 0.8393 x1 x1) x2)").unwrap()
    }

    #[test]
    fn report_matches_fitness_pipeline_exactly() {
        let fields = channel_fields();
        let model = SwarmModel::Tree(demo_tree());
        let report = run_model(&model, &fields, &SimConfig::default()).unwrap();
        let budget = EvalBudget::new();
        let objectives =
            evaluate_objectives(&demo_tree(), &fields, &FitnessConfig::default(), &budget)
                .unwrap();
        assert_eq!(report.f2, objectives.f2);
        assert_eq!(report.waypoints.len(), 6);
        assert_eq!(report.patterns.len(), 6);
        for (i, wp) in report.waypoints.iter().enumerate() {
            assert_eq!(wp.waypoint, i);
            assert_eq!(wp.pattern_size, report.patterns[i].len());
            assert_eq!(report.patterns[i].waypoint_index, i);
        }
    }

    #[test]
    fn violation_flags_mirror_the_distances() {
        let fields = channel_fields();
        let report = run_model(
            &SwarmModel::Tree(demo_tree()),
            &fields,
            &SimConfig::default(),
        )
        .unwrap();
        let fit = FitnessConfig::default();
        for wp in &report.waypoints {
            assert!(!wp.degenerate);
            assert_eq!(wp.violates_d_min, wp.distance_min.unwrap() < fit.d_min);
            assert_eq!(wp.violates_d_max, wp.distance_max.unwrap() > fit.d_max);
            assert_eq!(
                wp.violates_obstacle_clearance,
                wp.obstacle_distance.unwrap() < fit.d_obs_min
            );
            assert_eq!(wp.target_distances.len(), 1);
            assert!(wp.component_count >= 1);
            assert!(wp.robot_estimate >= 1);
        }
    }

    #[test]
    fn no_pattern_point_falls_inside_an_obstacle() {
        let fields = channel_fields();
        for model in [
            SwarmModel::Tree(demo_tree()),
            SwarmModel::Baseline(crate::ehgrn::EhGrnModel::task1()),
        ] {
            let report = run_model(&model, &fields, &SimConfig::default()).unwrap();
            for pattern in &report.patterns {
                for &p in &pattern.points {
                    assert!(fields.scenario.obstacles.iter().all(|o| !o.contains(p)));
                }
            }
        }
    }

    #[test]
    fn degenerate_waypoint_is_flagged_and_the_run_continues() {
        // Without obstacles the second input field is all zeros, so a bare
        // `x2` terminal outputs a uniform field whose band is empty at
        // every waypoint: all degenerate, aggregate pinned to the penalty.
        let mut scenario = Scenario::builtin("channel").unwrap();
        scenario.obstacles.clear();
        let fields = ScenarioFields::new(scenario).unwrap();
        let model = SwarmModel::Tree(GrnTree::parse("x2").unwrap());
        let report = run_model(&model, &fields, &SimConfig::default()).unwrap();
        assert_eq!(report.waypoints.len(), 6);
        for wp in &report.waypoints {
            assert!(wp.degenerate);
            assert_eq!(wp.pattern_size, 0);
            assert_eq!(wp.accuracy, EMPTY_PATTERN_PENALTY);
            assert_eq!(wp.distance_min, None);
            assert_eq!(wp.component_count, 0);
            assert_eq!(wp.robot_estimate, 0);
            assert!(!wp.violates_d_min && !wp.violates_obstacle_clearance);
        }
        assert_eq!(report.f2, EMPTY_PATTERN_PENALTY);
    }

    #[test]
    fn mirrored_waypoints_agree_within_resolution() {
        let mut scenario = Scenario::builtin("channel").unwrap();
        scenario.trajectories = vec![vec![(2.5, 10.0), (17.5, 10.0)]];
        let fields = ScenarioFields::new(scenario).unwrap();
        let report = run_model(
            &SwarmModel::Tree(demo_tree()),
            &fields,
            &SimConfig::default(),
        )
        .unwrap();
        let res = fields.scenario.region.resolution;
        let [a, b] = &report.waypoints[..] else { panic!("two waypoints") };
        assert!(!a.degenerate && !b.degenerate);
        assert_abs_diff_eq!(
            a.distance_min.unwrap(),
            b.distance_min.unwrap(),
            epsilon = res
        );
        assert_abs_diff_eq!(
            a.distance_max.unwrap(),
            b.distance_max.unwrap(),
            epsilon = res
        );
        assert_abs_diff_eq!(
            a.obstacle_distance.unwrap(),
            b.obstacle_distance.unwrap(),
            epsilon = res
        );
        assert_eq!(a.component_count, b.component_count);
        assert!((a.pattern_size as i64 - b.pattern_size as i64).abs() <= 4);
    }

    #[test]
    fn component_count_separates_disjoint_blobs() {
        let spec = GridSpec::new(2.0, 2.0, 0.1).unwrap();
        let cells = vec![(1, 1), (2, 2), (3, 2), (10, 10)];
        let pattern = Pattern {
            points: cells.iter().map(|&(ix, iy)| spec.cell_center(ix, iy)).collect(),
            cells,
            waypoint_index: 0,
        };
        // (1,1)-(2,2)-(3,2) touch diagonally; (10,10) stands alone.
        assert_eq!(component_count(&pattern), 2);
    }

    #[test]
    fn robot_estimate_tracks_the_annulus_circumference() {
        let spec = GridSpec::new(6.0, 6.0, 0.1).unwrap();
        let center = (3.0, 3.0);
        let mut cells = Vec::new();
        for iy in 0..spec.ny() {
            for ix in 0..spec.nx() {
                let d = dist(spec.cell_center(ix, iy), center);
                if (1.45..=1.55).contains(&d) {
                    cells.push((ix, iy));
                }
            }
        }
        let pattern = Pattern {
            points: cells.iter().map(|&(ix, iy)| spec.cell_center(ix, iy)).collect(),
            cells,
            waypoint_index: 0,
        };
        let n = estimate_robot_count(&pattern, 0.1, 0.5).unwrap();
        let analytic = (2.0 * std::f64::consts::PI * 1.5 / 0.5).ceil() as i64;
        assert!((n as i64 - analytic).abs() <= 2, "estimate {n} vs {analytic}");
        // Doubling the spacing halves the count, up to rounding.
        let half = estimate_robot_count(&pattern, 0.1, 1.0).unwrap();
        assert!((half as i64 - (n as i64 + 1) / 2).abs() <= 1, "{half} vs {n}/2");
    }

    #[test]
    fn single_cell_pattern_needs_one_robot() {
        let spec = GridSpec::new(1.0, 1.0, 0.1).unwrap();
        let pattern = Pattern {
            points: vec![spec.cell_center(4, 4)],
            cells: vec![(4, 4)],
            waypoint_index: 0,
        };
        assert_eq!(estimate_robot_count(&pattern, 0.1, 0.5).unwrap(), 1);
        let empty = Pattern { points: vec![], cells: vec![], waypoint_index: 0 };
        assert!(estimate_robot_count(&empty, 0.1, 0.5).is_err());
    }

    fn toy_pattern(points: Vec<Point>) -> Pattern {
        Pattern { cells: (0..points.len()).map(|i| (i, 0)).collect(), points, waypoint_index: 0 }
    }

    #[test]
    fn assignment_on_matching_positions_is_identity() {
        let points = vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)];
        let pattern = toy_pattern(points.clone());
        let out = assign_robots(&pattern, &points).unwrap();
        assert_eq!(out.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(out.total_displacement, 0.0);
    }

    #[test]
    fn greedy_assignment_matches_the_exhaustive_answer() {
        let pattern = toy_pattern(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let robots = [(0.2, 1.0), (1.1, 1.0), (2.3, 1.0)];
        let out = assign_robots(&pattern, &robots).unwrap();
        // All six permutations, scored by max displacement.
        let perms: [[usize; 3]; 6] =
            [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let max_disp = |assign: &[usize; 3]| {
            robots
                .iter()
                .zip(assign)
                .map(|(&r, &p)| dist(r, pattern.points[p]))
                .fold(0.0f64, f64::max)
        };
        let best = perms.iter().map(max_disp).fold(f64::INFINITY, f64::min);
        let ours = out
            .pairs
            .iter()
            .map(|&(r, p)| dist(robots[r], pattern.points[p]))
            .fold(0.0f64, f64::max);
        assert_abs_diff_eq!(ours, best, epsilon = 1e-12);
        assert!(assign_robots(&pattern, &robots[..2]).is_err());
    }

    #[test]
    fn baseline_run_produces_nonempty_patterns_on_channel() {
        let fields = channel_fields();
        let report = run_model(
            &SwarmModel::Baseline(crate::ehgrn::EhGrnModel::task1()),
            &fields,
            &SimConfig::default(),
        )
        .unwrap();
        assert_eq!(report.model, "baseline:task1");
        assert!(report.waypoints.iter().any(|w| !w.degenerate));
        assert!(report.f2.is_finite());
    }
}
