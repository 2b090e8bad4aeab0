//! GRN controllers for swarm pattern formation, evolved by multi-objective
//! genetic programming.
//!
//! A controller is a tree of gene-regulatory network motifs. Its inputs are two
//! morphogen concentration fields built from scenario geometry (targets and
//! obstacles); its output is a scalar concentration field whose iso-region band
//! is the swarm pattern: the candidate positions robots occupy around each
//! target waypoint.
//!
//! Evolution runs two nested loops: NSGA-II over tree structures, minimizing
//! (f1, f2) = (node count, pattern accuracy penalty), with a differential
//! evolution inner loop tuning each tree's per-node regulation thresholds.
//! A fixed-structure hierarchical GRN cascade is included as the comparison
//! baseline.
//!
//! Module map, bottom-up:
//! - [`motif`]: sigmoid regulation function and the ten basic motifs
//! - [`geom`]: obstacle primitives with exact distance queries
//! - [`scenario`]: regions, trajectories, bundled environments, `.scn` files
//! - [`field`]: morphogen grids, tree evaluation, pattern extraction
//! - [`genome`]: GP trees, variation operators, text serialization
//! - [`fitness`]: the two objectives and the evaluation budget counter
//! - [`de`]: differential evolution over a tree's threshold vector
//! - [`nsga2`]: the outer evolutionary loop, knee points, hypervolume
//! - [`ehgrn`]: the fixed-structure baseline cascades
//! - [`sim`]: trajectory runs, reports, robot-count estimation, assignment

pub mod de;
pub mod ehgrn;
pub mod field;
pub mod fitness;
pub mod genome;
pub mod geom;
pub mod motif;
pub mod nsga2;
pub mod scenario;
pub mod sim;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input concentration")]
    NonFinite,
    #[error("{kind} takes {expected} input(s), got {got}")]
    Arity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("time step {dt} outside stable range (0, 2)")]
    TimeStep { dt: f64 },
    #[error("grid: {0}")]
    Grid(String),
    #[error("no targets: pattern undefined")]
    NoTargets,
    #[error("degenerate pattern: output field has no positive values")]
    DegeneratePattern,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("threshold {value} outside [0, 2]")]
    Theta { value: f64 },
    #[error("tree depth {depth} outside [1, {max}]")]
    Depth { depth: usize, max: usize },
    #[error("parameter vector length {got}, tree has {expected} motif nodes")]
    ParamLen { expected: usize, got: usize },
    #[error("config: {0}")]
    Config(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
