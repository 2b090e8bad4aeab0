//! Differential evolution over a tree's threshold vector (the inner loop).
//!
//! Strategy DE/rand/1/bin with synchronous generational update: every
//! mutant's base and difference vectors come from the current generation's
//! snapshot, and greedy selection (trial kept when its objective is at most
//! the parent's) builds the next one. Out-of-bounds mutant components are
//! reflected back into the box. Member 0 of the initial population is the
//! incumbent vector when one is given, so the returned objective never
//! regresses below what the input tree already achieves; the rest initialize
//! uniformly inside the bounds.
//!
//! Cost accounting: a run evaluates the objective exactly
//! `pop_size * (generations + 1)` times (initialization plus one trial per
//! member per generation). [`de_optimize`] wires the generic minimizer to a
//! tree's thresholds; a zero-dimension tree is returned unchanged after the
//! single baseline evaluation.
//!
//! Per-member draw order (base indices, crossover point, per-dimension
//! coin flips) is fixed, so a seeded RNG reproduces runs bit-for-bit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fitness::{evaluate_objectives, EvalBudget, FitnessConfig};
use crate::genome::{GrnTree, THETA_RANGE};
use crate::scenario::ScenarioFields;
use crate::{Error, Result};

/// DE/rand/1/bin hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    pub pop_size: usize,
    /// Crossover probability.
    pub cr: f64,
    /// Differential weight.
    pub f: f64,
    /// Per-dimension search box.
    pub bounds: (f64, f64),
    /// Inner generation count; the outer loop scales this down when its
    /// evaluation budget nears exhaustion.
    pub generations: usize,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self { pop_size: 10, cr: 0.9, f: 0.5, bounds: THETA_RANGE, generations: 15 }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 4 {
            return Err(Error::Config(format!(
                "DE population {} too small; rand/1 needs 3 distinct others",
                self.pop_size
            )));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(Error::Config(format!("cr {} outside [0, 1]", self.cr)));
        }
        if !(self.f > 0.0 && self.f <= 2.0) {
            return Err(Error::Config(format!("f {} outside (0, 2]", self.f)));
        }
        if !(self.bounds.0.is_finite() && self.bounds.1.is_finite() && self.bounds.0 < self.bounds.1)
        {
            return Err(Error::Config("bounds must be a finite nonempty interval".into()));
        }
        Ok(())
    }
}

/// Reflects `v` into `[lo, hi]`.
fn reflect(mut v: f64, lo: f64, hi: f64) -> f64 {
    for _ in 0..32 {
        if v < lo {
            v = 2.0 * lo - v;
        } else if v > hi {
            v = 2.0 * hi - v;
        } else {
            return v;
        }
    }
    // Pathological magnitudes (not reachable from bounded populations with
    // f <= 2): give up reflecting and clamp.
    v.clamp(lo, hi)
}

/// A distinct random index in `0..n`, excluding everything in `taken`.
fn distinct_index(rng: &mut impl Rng, n: usize, taken: &[usize]) -> usize {
    loop {
        let i = rng.random_range(0..n);
        if !taken.contains(&i) {
            return i;
        }
    }
}

/// Minimizes `objective` over a `dim`-dimensional box. Returns the best
/// vector and its objective value.
pub fn de_minimize(
    dim: usize,
    mut objective: impl FnMut(&[f64]) -> f64,
    incumbent: Option<&[f64]>,
    cfg: &DeConfig,
    rng: &mut impl Rng,
) -> (Vec<f64>, f64) {
    let (lo, hi) = cfg.bounds;
    let mut pop: Vec<Vec<f64>> = (0..cfg.pop_size)
        .map(|i| match (i, incumbent) {
            (0, Some(v)) => v.to_vec(),
            _ => (0..dim).map(|_| rng.random_range(lo..=hi)).collect(),
        })
        .collect();
    let mut fit: Vec<f64> = pop.iter().map(|m| objective(m)).collect();

    for _ in 0..cfg.generations {
        let mut next_pop = pop.clone();
        let mut next_fit = fit.clone();
        for i in 0..cfg.pop_size {
            let r1 = distinct_index(rng, cfg.pop_size, &[i]);
            let r2 = distinct_index(rng, cfg.pop_size, &[i, r1]);
            let r3 = distinct_index(rng, cfg.pop_size, &[i, r1, r2]);
            let j_rand = rng.random_range(0..dim);
            let trial: Vec<f64> = (0..dim)
                .map(|j| {
                    let cross = rng.random::<f64>() < cfg.cr;
                    if cross || j == j_rand {
                        reflect(pop[r1][j] + cfg.f * (pop[r2][j] - pop[r3][j]), lo, hi)
                    } else {
                        pop[i][j]
                    }
                })
                .collect();
            let trial_fit = objective(&trial);
            if trial_fit <= fit[i] {
                next_pop[i] = trial;
                next_fit[i] = trial_fit;
            }
        }
        pop = next_pop;
        fit = next_fit;
    }

    let best = fit
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite objective"))
        .map(|(i, _)| i)
        .expect("nonempty population");
    (pop[best].clone(), fit[best])
}

/// Tunes a tree's thresholds against a scenario, minimizing f2 with the
/// structure frozen. Returns the tuned tree and its f2.
pub fn de_optimize(
    tree: &GrnTree,
    fields: &ScenarioFields,
    fit_cfg: &FitnessConfig,
    cfg: &DeConfig,
    budget: &EvalBudget,
    rng: &mut impl Rng,
) -> Result<(GrnTree, f64)> {
    cfg.validate()?;
    let dim = tree.motif_count();
    if dim == 0 {
        let f2 = evaluate_objectives(tree, fields, fit_cfg, budget)?.f2;
        return Ok((tree.clone(), f2));
    }
    let incumbent = tree.extract_params();
    let mut failure = None;
    let (best, best_f2) = de_minimize(
        dim,
        |thetas| {
            let result = tree
                .inject_params(thetas)
                .and_then(|t| evaluate_objectives(&t, fields, fit_cfg, budget));
            match result {
                Ok(obj) => obj.f2,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            }
        },
        Some(&incumbent),
        cfg,
        rng,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((tree.inject_params(&best)?, best_f2))
}
