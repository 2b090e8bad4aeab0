//! Obstacle primitives with exact point containment and distance queries.
//!
//! Scenarios compose two primitive shapes: axis-aligned rectangles (walls,
//! corridor segments) and annulus segments (curved corridor walls). Both
//! support exact Euclidean distance to their boundary-or-interior (zero
//! inside), which the field builder and the fitness obstacle term consume
//! directly; no grid distance transform is involved, so distance values carry
//! no discretization error.

use serde::{Deserialize, Serialize};

use std::f64::consts::TAU;

/// World coordinates in meters, serialized as `[x, y]`.
pub type Point = (f64, f64);

/// Euclidean distance between two points.
pub fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Distance from `p` to the segment `ab`.
fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (abx, aby) = (b.0 - a.0, b.1 - a.1);
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.0 - a.0) * abx + (p.1 - a.1) * aby) / len2).clamp(0.0, 1.0);
    dist(p, (a.0 + t * abx, a.1 + t * aby))
}

/// An obstacle primitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Obstacle {
    /// Axis-aligned rectangle spanning `[x0, x1] x [y0, y1]`.
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    /// Annulus segment: radii `[r0, r1]` around `(cx, cy)`, swept
    /// counter-clockwise over angles `[a0, a1]` (radians).
    AnnulusSegment {
        cx: f64,
        cy: f64,
        r0: f64,
        r1: f64,
        a0: f64,
        a1: f64,
    },
}

impl Obstacle {
    /// Whether `p` lies inside (or on the boundary of) the primitive.
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Obstacle::Rect { x0, y0, x1, y1 } => {
                p.0 >= x0 && p.0 <= x1 && p.1 >= y0 && p.1 <= y1
            }
            Obstacle::AnnulusSegment { cx, cy, r0, r1, a0, a1 } => {
                let r = dist(p, (cx, cy));
                if r < r0 || r > r1 {
                    return false;
                }
                let phi = (p.1 - cy).atan2(p.0 - cx);
                a0 + (phi - a0).rem_euclid(TAU) <= a1
            }
        }
    }

    /// Exact distance from `p` to the primitive; zero inside.
    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            Obstacle::Rect { x0, y0, x1, y1 } => {
                let dx = (x0 - p.0).max(p.0 - x1).max(0.0);
                let dy = (y0 - p.1).max(p.1 - y1).max(0.0);
                dx.hypot(dy)
            }
            Obstacle::AnnulusSegment { cx, cy, r0, r1, a0, a1 } => {
                let c = (cx, cy);
                let r = dist(p, c);
                let phi = (p.1 - cy).atan2(p.0 - cx);
                if a0 + (phi - a0).rem_euclid(TAU) <= a1 {
                    // Radially in front of the arc: clamp the radius.
                    (r0 - r).max(r - r1).max(0.0)
                } else {
                    // Closest point is on one of the radial end caps.
                    let cap = |a: f64| {
                        let u = (a.cos(), a.sin());
                        point_segment_distance(
                            p,
                            (cx + r0 * u.0, cy + r0 * u.1),
                            (cx + r1 * u.0, cy + r1 * u.1),
                        )
                    };
                    cap(a0).min(cap(a1))
                }
            }
        }
    }
}

/// Distance from `p` to the nearest obstacle; `None` when `obstacles` is empty.
pub fn nearest_obstacle_distance(obstacles: &[Obstacle], p: Point) -> Option<f64> {
    obstacles
        .iter()
        .map(|o| o.distance(p))
        .min_by(|a, b| a.partial_cmp(b).expect("finite distances"))
}
