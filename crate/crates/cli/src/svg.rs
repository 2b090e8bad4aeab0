//! SVG frame rendering: one image per waypoint showing obstacles (green),
//! targets, and candidate points, with violations highlighted.
//!
//! The drawing group is flipped so world y points up while every written
//! coordinate stays a raw world value; candidate centers in the SVG match
//! the report coordinates character for character.

use std::fmt::Write as _;

use morphoevo_core::geom::{Obstacle, Point};
use morphoevo_core::scenario::Scenario;
use morphoevo_core::sim::RunReport;

const PIXELS_PER_METER: f64 = 30.0;

/// Renders the frame for `report.waypoints[index]`.
pub fn render_frame(scenario: &Scenario, report: &RunReport, index: usize) -> String {
    let wp = &report.waypoints[index];
    let pattern = &report.patterns[index];
    let targets = scenario.targets_at(index);
    let (w, h) = (scenario.region.width, scenario.region.height);
    let res = scenario.region.resolution;
    let violating =
        wp.violates_d_min || wp.violates_d_max || wp.violates_obstacle_clearance;
    let point_fill = if wp.violates_obstacle_clearance { "crimson" } else { "steelblue" };

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {w} {h}\">",
        w * PIXELS_PER_METER,
        h * PIXELS_PER_METER
    );
    let _ = writeln!(
        s,
        "  <title>{} waypoint {index}: {} points, {} component(s)</title>",
        xml_escape(&report.scenario),
        wp.pattern_size,
        wp.component_count
    );
    let _ = writeln!(s, "  <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(s, "  <g transform=\"translate(0,{h}) scale(1,-1)\">");
    for o in &scenario.obstacles {
        draw_obstacle(&mut s, o);
    }
    for &(x, y) in &pattern.points {
        let _ = writeln!(
            s,
            "    <circle cx=\"{x}\" cy=\"{y}\" r=\"{}\" fill=\"{point_fill}\"/>",
            res / 2.0
        );
    }
    for (x, y) in targets {
        let _ = writeln!(
            s,
            "    <circle cx=\"{x}\" cy=\"{y}\" r=\"0.25\" fill=\"none\" stroke=\"black\" stroke-width=\"0.06\"/>"
        );
        let _ = writeln!(s, "    <circle cx=\"{x}\" cy=\"{y}\" r=\"0.08\" fill=\"black\"/>");
    }
    s.push_str("  </g>\n");
    if violating {
        let _ = writeln!(
            s,
            "  <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"red\" stroke-width=\"0.2\" stroke-dasharray=\"0.6 0.3\"/>"
        );
    }
    s.push_str("</svg>\n");
    s
}

fn draw_obstacle(s: &mut String, o: &Obstacle) {
    match *o {
        Obstacle::Rect { x0, y0, x1, y1 } => {
            let _ = writeln!(
                s,
                "    <rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"green\" fill-opacity=\"0.55\"/>",
                x1 - x0,
                y1 - y0
            );
        }
        Obstacle::AnnulusSegment { cx, cy, r0, r1, a0, a1 } => {
            let at = |r: f64, a: f64| -> Point { (cx + r * a.cos(), cy + r * a.sin()) };
            let (is_, ie) = (at(r0, a0), at(r0, a1));
            let (os_, oe) = (at(r1, a0), at(r1, a1));
            let large = if a1 - a0 > std::f64::consts::PI { 1 } else { 0 };
            let _ = writeln!(
                s,
                "    <path d=\"M {} {} A {r0} {r0} 0 {large} 1 {} {} L {} {} A {r1} {r1} 0 {large} 0 {} {} Z\" fill=\"green\" fill-opacity=\"0.55\"/>",
                is_.0, is_.1, ie.0, ie.1, oe.0, oe.1, os_.0, os_.1
            );
        }
    }
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
