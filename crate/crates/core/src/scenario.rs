//! Evaluation environments: region, obstacle geometry, target trajectories.
//!
//! A scenario bundles the rectangular region grid, obstacle primitives, one
//! ordered waypoint list per target (all targets advance in lockstep, so the
//! lists must have equal length), and the field constants used to build
//! morphogen gradients over it. Scenarios load from and save to `.scn` files
//! (TOML).
//!
//! Three environments are built in:
//! - `channel`: 20 x 20 m, two parallel walls forming a straight 9 m wide
//!   channel across the middle third, one target crossing it;
//! - `channel2`: the same geometry with a second target mirroring the first
//!   about the vertical centerline, so the two patterns meet mid-channel and
//!   separate again;
//! - `compound`: 25 x 25 m course of a 9 m channel, a 6.4 m narrow channel, a
//!   quarter-circle narrow corridor, and a T-shape stem, one target running
//!   its length.
//!
//! Widths are chosen so a [1, 2] m annulus (diameter up to 4 m) keeps 2 m of
//! wall clearance in ordinary channels but cannot in the 6.4 m narrow
//! sections, which is what stresses a controller there. Wall thickness is
//! 1 m everywhere.
//!
//! [`ScenarioFields`] precomputes the per-waypoint target fields and the
//! obstacle field/mask once; fitness evaluation reuses them for every tree.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::field::{
    build_obstacle_field, build_target_field, obstacle_mask, FieldConfig, GridSpec,
    MorphogenField,
};
use crate::geom::{Obstacle, Point};
use crate::{Error, Result};

/// Waypoint indices of the `compound` course inside its narrow and
/// quarter-circle sections (where clearance violations are expected for
/// models that cannot shrink their pattern).
pub const COMPOUND_NARROW_WAYPOINTS: [usize; 3] = [3, 4, 5];

/// An evaluation environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub region: GridSpec,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    /// One ordered waypoint list per target; equal lengths (lockstep).
    pub trajectories: Vec<Vec<Point>>,
    #[serde(default)]
    pub field: FieldConfig,
}

impl Scenario {
    /// Checks region, field constants, lockstep trajectory lengths, and that
    /// every waypoint lies inside the region and outside all obstacles.
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        self.field.validate()?;
        let n = match self.trajectories.first() {
            None => return Err(Error::Scenario("no trajectories".into())),
            Some(t) => t.len(),
        };
        if n == 0 {
            return Err(Error::Scenario("empty trajectory".into()));
        }
        for (i, t) in self.trajectories.iter().enumerate() {
            if t.len() != n {
                return Err(Error::Scenario(format!(
                    "trajectory {i} has {} waypoints, trajectory 0 has {n}",
                    t.len()
                )));
            }
            for &wp in t {
                if !self.region.contains(wp) {
                    return Err(Error::Scenario(format!(
                        "waypoint ({}, {}) outside region",
                        wp.0, wp.1
                    )));
                }
                if self.obstacles.iter().any(|o| o.contains(wp)) {
                    return Err(Error::Scenario(format!(
                        "waypoint ({}, {}) inside an obstacle",
                        wp.0, wp.1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Waypoints per trajectory.
    pub fn waypoint_count(&self) -> usize {
        self.trajectories.first().map_or(0, Vec::len)
    }

    /// The target positions at waypoint step `i`, one per trajectory.
    pub fn targets_at(&self, i: usize) -> Vec<Point> {
        self.trajectories.iter().map(|t| t[i]).collect()
    }

    /// Parses and validates a `.scn` file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let scenario: Scenario = toml::from_str(&text)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Writes the scenario as a `.scn` file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Scenario(format!("serialize: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// A bundled scenario by name: `channel`, `channel2`, or `compound`.
    pub fn builtin(name: &str) -> Option<Scenario> {
        match name {
            "channel" => Some(channel_scenario(false)),
            "channel2" => Some(channel_scenario(true)),
            "compound" => Some(compound_scenario()),
            _ => None,
        }
    }
}

const WALL_THICKNESS: f64 = 1.0;
const CHANNEL_WIDTH: f64 = 9.0;
const NARROW_WIDTH: f64 = 6.4;

fn wall(x0: f64, y0: f64, x1: f64, y1: f64) -> Obstacle {
    Obstacle::Rect { x0, y0, x1, y1 }
}

/// Two horizontal walls bounding a channel of the given width centered on
/// `y_mid`, spanning `x0..x1`.
fn channel_walls(x0: f64, x1: f64, y_mid: f64, width: f64) -> [Obstacle; 2] {
    let (lo, hi) = (y_mid - width / 2.0, y_mid + width / 2.0);
    [
        wall(x0, lo - WALL_THICKNESS, x1, lo),
        wall(x0, hi, x1, hi + WALL_THICKNESS),
    ]
}

fn channel_scenario(two_targets: bool) -> Scenario {
    let side = 20.0;
    let region = GridSpec { origin: (0.0, 0.0), width: side, height: side, resolution: 0.1 };
    let obstacles = channel_walls(side / 3.0, 2.0 * side / 3.0, 10.0, CHANNEL_WIDTH).to_vec();
    let xs = [2.5, 6.0, 8.3, 10.7, 13.0, 16.5];
    let forward: Vec<Point> = xs.iter().map(|&x| (x, 10.0)).collect();
    let mut trajectories = vec![forward];
    if two_targets {
        // Mirror about the vertical centerline: the targets meet mid-channel.
        trajectories.push(xs.iter().map(|&x| (side - x, 10.0)).collect());
    }
    Scenario {
        name: if two_targets { "channel2" } else { "channel" }.into(),
        region,
        obstacles,
        trajectories,
        field: FieldConfig::default(),
    }
}

fn compound_scenario() -> Scenario {
    let region = GridSpec { origin: (0.0, 0.0), width: 25.0, height: 25.0, resolution: 0.1 };
    // Straight sections run left to right at y = 18; the course then bends a
    // quarter circle down to a vertical T-shape stem.
    let y_mid = 18.0;
    let mut obstacles = Vec::new();
    // Ordinary channel, then the narrow channel.
    obstacles.extend(channel_walls(1.5, 8.0, y_mid, CHANNEL_WIDTH));
    obstacles.extend(channel_walls(9.0, 14.5, y_mid, NARROW_WIDTH));
    // Quarter-circle corridor: centerline radius 4.8 m around (14.5, 13.2),
    // sweeping from the narrow channel's end (top) to the stem (right).
    let center = (14.5, y_mid - 4.8);
    let half = NARROW_WIDTH / 2.0;
    let quarter = std::f64::consts::FRAC_PI_2;
    obstacles.push(Obstacle::AnnulusSegment {
        cx: center.0,
        cy: center.1,
        r0: 4.8 - half - WALL_THICKNESS,
        r1: 4.8 - half,
        a0: 0.0,
        a1: quarter,
    });
    obstacles.push(Obstacle::AnnulusSegment {
        cx: center.0,
        cy: center.1,
        r0: 4.8 + half,
        r1: 4.8 + half + WALL_THICKNESS,
        a0: 0.0,
        a1: quarter,
    });
    // T-shape stem: vertical channel at the arc's exit, left wall split to
    // leave the T's side branch open.
    let xc = center.0 + 4.8;
    let (left, right) = (xc - CHANNEL_WIDTH / 2.0, xc + CHANNEL_WIDTH / 2.0);
    obstacles.push(wall(left - WALL_THICKNESS, 10.5, left, 13.2));
    obstacles.push(wall(left - WALL_THICKNESS, 3.9, left, 6.0));
    obstacles.push(wall(right, 3.9, right + WALL_THICKNESS, 13.2));
    // Waypoints trace the course; the two arc waypoints sit on the 4.8 m
    // centerline at 35 and 75 degrees past the bend's start.
    let arc = |deg: f64| {
        let a = deg.to_radians();
        (center.0 + 4.8 * a.sin(), center.1 + 4.8 * a.cos())
    };
    let waypoints = vec![
        (2.0, y_mid),
        (5.5, y_mid),
        (9.5, y_mid),
        (12.0, y_mid),
        arc(35.0),
        arc(75.0),
        (xc, 10.5),
        (xc, 6.5),
        (xc, 1.8),
    ];
    Scenario {
        name: "compound".into(),
        region,
        obstacles,
        trajectories: vec![waypoints],
        field: FieldConfig::default(),
    }
}

/// Per-scenario precomputed morphogen inputs, shared across all tree
/// evaluations: one target field per waypoint step plus the obstacle field
/// and obstacle cell mask.
#[derive(Debug, Clone)]
pub struct ScenarioFields {
    pub scenario: Scenario,
    pub target_fields: Vec<MorphogenField>,
    pub obstacle_field: MorphogenField,
    pub obstacle_mask: Vec<bool>,
}

impl ScenarioFields {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let target_fields = (0..scenario.waypoint_count())
            .map(|i| {
                build_target_field(&scenario.targets_at(i), &scenario.region, &scenario.field)
            })
            .collect::<Result<Vec<_>>>()?;
        let obstacle_field =
            build_obstacle_field(&scenario.obstacles, &scenario.region, &scenario.field)?;
        let obstacle_mask = obstacle_mask(&scenario.obstacles, &scenario.region);
        Ok(Self { scenario, target_fields, obstacle_field, obstacle_mask })
    }

    pub fn waypoint_count(&self) -> usize {
        self.target_fields.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtins_validate() {
        for name in ["channel", "channel2", "compound"] {
            let s = Scenario::builtin(name).unwrap();
            s.validate().unwrap();
            assert_eq!(s.name, name);
        }
        assert!(Scenario::builtin("nope").is_none());
    }

    #[test]
    fn channel_geometry_is_frozen() {
        let s = Scenario::builtin("channel").unwrap();
        assert_eq!((s.region.width, s.region.height, s.region.resolution), (20.0, 20.0, 0.1));
        assert_eq!(
            s.obstacles,
            vec![
                Obstacle::Rect { x0: 20.0 / 3.0, y0: 4.5, x1: 40.0 / 3.0, y1: 5.5 },
                Obstacle::Rect { x0: 20.0 / 3.0, y0: 14.5, x1: 40.0 / 3.0, y1: 15.5 },
            ]
        );
        assert_eq!(s.trajectories.len(), 1);
        assert_eq!(
            s.trajectories[0],
            vec![(2.5, 10.0), (6.0, 10.0), (8.3, 10.0), (10.7, 10.0), (13.0, 10.0), (16.5, 10.0)]
        );
    }

    #[test]
    fn channel2_mirrors_the_first_trajectory() {
        let s = Scenario::builtin("channel2").unwrap();
        assert_eq!(s.trajectories.len(), 2);
        for (a, b) in s.trajectories[0].iter().zip(&s.trajectories[1]) {
            assert_abs_diff_eq!(a.0 + b.0, 20.0, epsilon = 1e-12);
            assert_eq!(a.1, b.1);
        }
    }

    #[test]
    fn compound_geometry_is_frozen() {
        let s = Scenario::builtin("compound").unwrap();
        assert_eq!((s.region.width, s.region.height), (25.0, 25.0));
        assert_eq!(s.obstacles.len(), 9);
        assert_eq!(s.waypoint_count(), 9);
        // The two arc waypoints sit on the corridor centerline.
        for &i in &COMPOUND_NARROW_WAYPOINTS[1..] {
            let wp = s.trajectories[0][i];
            let d = crate::geom::dist(wp, (14.5, 13.2));
            assert_abs_diff_eq!(d, 4.8, epsilon = 1e-12);
        }
        // The narrow-channel waypoint lies inside the narrow section's span.
        let wp = s.trajectories[0][COMPOUND_NARROW_WAYPOINTS[0]];
        assert!(wp.0 >= 9.0 && wp.0 <= 14.5 && wp.1 == 18.0);
        // The stem waypoints run down the T at the arc's exit column.
        assert_eq!(s.trajectories[0][8], (19.3, 1.8));
    }

    #[test]
    fn validation_rejects_bad_scenarios() {
        let mut s = Scenario::builtin("channel").unwrap();
        s.trajectories[0][2] = (25.0, 10.0); // outside region
        assert!(s.validate().is_err());

        let mut s = Scenario::builtin("channel").unwrap();
        s.trajectories[0][2] = (7.0, 5.0); // inside the lower wall
        assert!(s.validate().is_err());

        let mut s = Scenario::builtin("channel2").unwrap();
        s.trajectories[1].pop(); // lockstep violation
        assert!(s.validate().is_err());

        let mut s = Scenario::builtin("channel").unwrap();
        s.trajectories.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn scn_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["channel", "channel2", "compound"] {
            let s = Scenario::builtin(name).unwrap();
            let path = dir.path().join(format!("{name}.scn"));
            s.save(&path).unwrap();
            let loaded = Scenario::load(&path).unwrap();
            assert_eq!(loaded, s);
        }
    }

    #[test]
    fn load_reports_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.scn");
        std::fs::write(&path, "name = \"x\"\n").unwrap();
        assert!(Scenario::load(&path).is_err());
        assert!(Scenario::load(&dir.path().join("missing.scn")).is_err());
    }

    #[test]
    fn fields_precompute_per_waypoint() {
        let fields = ScenarioFields::new(Scenario::builtin("channel").unwrap()).unwrap();
        assert_eq!(fields.waypoint_count(), 6);
        let spec = fields.scenario.region;
        // Obstacle mask marks wall cells; a mid-channel cell stays clear.
        let wall_cell = spec.index(80, 50); // (8.05, 5.05) inside the lower wall
        assert!(fields.obstacle_mask[wall_cell]);
        assert_eq!(fields.obstacle_field.values[wall_cell], 1.0);
        let mid = spec.index(100, 100);
        assert!(!fields.obstacle_mask[mid]);
        // The first waypoint's field decays away from its target at (2.5, 10).
        let near = spec.index(24, 99); // cell center (2.45, 9.95)
        let far = spec.index(150, 99);
        assert!(fields.target_fields[0].values[near] > fields.target_fields[0].values[far]);
    }
}
