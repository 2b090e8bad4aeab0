//! The outer multi-objective loop: NSGA-II survival selection over GP trees,
//! with the DE inner loop tuning each individual's thresholds.
//!
//! One evolution step generates `pop_size` offspring by binary-tournament
//! parent selection on (rank, crowding), subtree crossover (rate 1.0 by
//! default), and subtree mutation (rate 0.1), tunes every offspring with DE,
//! evaluates it, then selects the next population from parents plus offspring
//! by non-domination rank, splitting the last front by crowding distance.
//!
//! The run is budgeted in objective evaluations, not generations. At each
//! generation barrier the loop plans how many DE generations each individual
//! can afford from the remaining budget: with the inclusive counting
//! (DE-internal evaluations count) the per-individual share is
//! `remaining / pop_size`, buying `share / de_pop - 1` DE generations up to
//! the configured default, or no DE at all (a single evaluation) when the
//! share cannot cover a DE population. With outer-only counting the inner
//! loop is free and always runs at the default. The loop stops at the first
//! barrier where the counted evaluations reach the budget, so the overshoot
//! is at most one generation's worth of outer evaluations.
//!
//! Determinism: one master RNG drives initialization and variation; each
//! individual's DE run draws from its own stream derived from (seed,
//! generation, slot index). Results are bit-identical across runs and thread
//! counts.
//!
//! Progress records log, per generation, the evaluation counters, the
//! current front-0 size, and the hypervolume (reference point (32, 3)) of
//! the cumulative non-dominated archive of every individual evaluated so
//! far; that series is non-decreasing by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::de::{de_optimize, DeConfig};
use crate::fitness::{evaluate_objectives, EvalBudget, FitnessConfig, Objectives};
use crate::genome::{ramped_half_and_half, subtree_crossover, subtree_mutation, GrnTree};
use crate::scenario::ScenarioFields;
use crate::{Error, Result};

/// Reference point for hypervolume: just beyond the worst representable
/// objectives (node cap 31 < 32; penalty supremum 3).
pub const HYPERVOLUME_REF: [f64; 2] = [32.0, 3.0];

/// Which evaluation counter the budget caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BudgetCounting {
    /// Every objective evaluation counts, DE-internal ones included.
    Total,
    /// Only per-individual outer evaluations count; DE runs are free.
    Outer,
}

/// Outer-loop hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub pop_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Evaluation budget in the currency picked by `counting`.
    pub eval_budget: u64,
    pub seed: u64,
    pub counting: BudgetCounting,
    /// Ramped initialization depth buckets.
    pub init_depth: (usize, usize),
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            pop_size: 40,
            crossover_rate: 1.0,
            mutation_rate: 0.1,
            eval_budget: 4000,
            seed: 0,
            counting: BudgetCounting::Total,
            init_depth: (2, 4),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 || self.pop_size % 2 != 0 {
            return Err(Error::Config(format!(
                "population size {} must be even and at least 2",
                self.pop_size
            )));
        }
        for (name, rate) in
            [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)]
        {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!("{name} rate {rate} outside [0, 1]")));
            }
        }
        if self.eval_budget <= self.pop_size as u64 {
            return Err(Error::Config(format!(
                "budget {} must exceed the population size {}",
                self.eval_budget, self.pop_size
            )));
        }
        Ok(())
    }
}

/// A tree with its tuned objectives and NSGA-II bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub tree: GrnTree,
    pub objectives: Objectives,
    /// Non-domination front index (0 = non-dominated).
    pub rank: usize,
    /// Crowding distance within the front; boundary members get infinity.
    pub crowding: f64,
}

/// Minimization dominance: at most equal in both objectives, better in one.
pub fn dominates(a: [f64; 2], b: [f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Deb's fast non-dominated sort; returns fronts as index lists, front 0
/// first. Index order within a front follows input order.
pub fn fast_nondominated_sort(objectives: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(objectives[i], objectives[j]) {
                dominated_by[i].push(j);
            }
        }
    }
    for list in &dominated_by {
        for &j in list {
            domination_count[j] += 1;
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

/// Crowding distances for one front: per objective, boundary members get
/// infinity and interior members accumulate range-normalized neighbor gaps.
/// A zero objective range contributes nothing.
pub fn crowding_distance(objectives: &[[f64; 2]]) -> Vec<f64> {
    let n = objectives.len();
    let mut distance = vec![0.0f64; n];
    if n == 0 {
        return distance;
    }
    for obj in [0, 1] {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            objectives[a][obj].partial_cmp(&objectives[b][obj]).expect("finite objectives")
        });
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = objectives[order[n - 1]][obj] - objectives[order[0]][obj];
        if range > 0.0 {
            for w in 1..n - 1 {
                let gap = objectives[order[w + 1]][obj] - objectives[order[w - 1]][obj];
                distance[order[w]] += gap / range;
            }
        }
    }
    distance
}

/// Hypervolume dominated by a point set with respect to `reference`
/// (minimization); points outside the reference box contribute nothing.
pub fn hypervolume(points: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut inside: Vec<[f64; 2]> = points
        .iter()
        .copied()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    inside.sort_by(|a, b| a.partial_cmp(b).expect("finite objectives"));
    let mut hv = 0.0;
    let mut prev_f2 = reference[1];
    for p in inside {
        if p[1] < prev_f2 {
            hv += (reference[0] - p[0]) * (prev_f2 - p[1]);
            prev_f2 = p[1];
        }
    }
    hv
}

/// The final non-dominated set with its knee indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive {
    /// Front 0 of the final population, sorted by (f1, f2, tree text).
    pub members: Vec<Individual>,
    /// Indices into `members` of the knee points.
    pub knees: Vec<usize>,
}

/// Knee points of a front: normalize both objectives to [0, 1], draw the
/// chord through the two extreme points, and return the locally maximal
/// distances-to-chord along the f1-sorted front. A plateau yields its
/// lowest-f1 member; fronts of at most two points yield index 0.
pub fn select_knee_points(objectives: &[[f64; 2]]) -> Vec<usize> {
    let n = objectives.len();
    if n == 0 {
        return Vec::new();
    }
    if n <= 2 {
        return vec![0];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| objectives[a].partial_cmp(&objectives[b]).expect("finite"));
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in objectives {
        for o in 0..2 {
            min[o] = min[o].min(p[o]);
            max[o] = max[o].max(p[o]);
        }
    }
    let norm = |p: [f64; 2]| {
        let scale = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        [scale(p[0], min[0], max[0]), scale(p[1], min[1], max[1])]
    };
    let first = norm(objectives[order[0]]);
    let last = norm(objectives[order[n - 1]]);
    let chord = [last[0] - first[0], last[1] - first[1]];
    let chord_len = (chord[0] * chord[0] + chord[1] * chord[1]).sqrt();
    let dist: Vec<f64> = order
        .iter()
        .map(|&i| {
            let p = norm(objectives[i]);
            let cross = chord[0] * (p[1] - first[1]) - chord[1] * (p[0] - first[0]);
            if chord_len > 0.0 {
                cross.abs() / chord_len
            } else {
                0.0
            }
        })
        .collect();
    let mut knees: Vec<usize> = (0..n)
        .filter(|&k| {
            (k == 0 || dist[k] > dist[k - 1]) && (k == n - 1 || dist[k] >= dist[k + 1])
        })
        .map(|k| order[k])
        .collect();
    if knees.is_empty() {
        knees.push(order[0]);
    }
    knees
}

/// One per-generation progress record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub generation: usize,
    /// Total objective evaluations so far (DE-internal included).
    pub total_evaluations: u64,
    /// Outer per-individual evaluations so far.
    pub outer_evaluations: u64,
    /// Size of the current population's front 0.
    pub front_size: usize,
    /// Best f2 in the current population.
    pub best_f2: f64,
    /// Hypervolume of the cumulative evaluated-individual archive.
    pub hypervolume: f64,
}

/// Everything a finished evolution run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOutcome {
    pub archive: ParetoArchive,
    pub progress: Vec<ProgressRecord>,
    pub total_evaluations: u64,
    pub outer_evaluations: u64,
}

/// Cumulative non-dominated set of objective pairs.
#[derive(Debug, Default)]
struct CumulativeFront {
    points: Vec<[f64; 2]>,
}

impl CumulativeFront {
    fn insert(&mut self, p: [f64; 2]) {
        if self.points.iter().any(|&q| dominates(q, p) || q == p) {
            return;
        }
        self.points.retain(|&q| !dominates(p, q));
        self.points.push(p);
    }
}

/// How much DE each individual of the coming generation can afford.
fn plan_inner_generations(
    remaining: u64,
    pop_size: usize,
    de_cfg: &DeConfig,
    counting: BudgetCounting,
) -> Option<usize> {
    match counting {
        BudgetCounting::Outer => Some(de_cfg.generations),
        BudgetCounting::Total => {
            let share = remaining / pop_size as u64;
            let de_pop = de_cfg.pop_size as u64;
            if share >= de_pop {
                Some(((share / de_pop - 1) as usize).min(de_cfg.generations))
            } else {
                None
            }
        }
    }
}

/// DE stream for the individual at `slot` of generation `generation`:
/// independent of evaluation order and of all master-RNG consumption.
fn de_stream(seed: u64, generation: u64, slot: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&generation.to_le_bytes());
    bytes[16..24].copy_from_slice(&slot.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// Tunes (if the plan affords it) and evaluates one tree.
fn tune_and_evaluate(
    tree: GrnTree,
    fields: &ScenarioFields,
    fit_cfg: &FitnessConfig,
    de_cfg: &DeConfig,
    plan: Option<usize>,
    budget: &EvalBudget,
    rng: &mut ChaCha8Rng,
) -> Result<(GrnTree, Objectives)> {
    let out = match plan {
        None => {
            let objectives = evaluate_objectives(&tree, fields, fit_cfg, budget)?;
            (tree, objectives)
        }
        Some(generations) => {
            let cfg = DeConfig { generations, ..*de_cfg };
            let (tuned, f2) = de_optimize(&tree, fields, fit_cfg, &cfg, budget, rng)?;
            let f1 = tuned.node_count();
            (tuned, Objectives { f1, f2 })
        }
    };
    budget.record_outer();
    Ok(out)
}

/// Assigns ranks and crowding to a population in place.
fn rank_population(pop: &mut [Individual]) {
    let objs: Vec<[f64; 2]> = pop.iter().map(|i| i.objectives.vector()).collect();
    for (rank, front) in fast_nondominated_sort(&objs).into_iter().enumerate() {
        let front_objs: Vec<[f64; 2]> = front.iter().map(|&i| objs[i]).collect();
        let crowd = crowding_distance(&front_objs);
        for (k, &i) in front.iter().enumerate() {
            pop[i].rank = rank;
            pop[i].crowding = crowd[k];
        }
    }
}

/// Binary tournament on (rank, then crowding); the first drawn wins ties.
fn tournament<'a>(pop: &'a [Individual], rng: &mut impl Rng) -> &'a Individual {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    if b.rank < a.rank || (b.rank == a.rank && b.crowding > a.crowding) {
        b
    } else {
        a
    }
}

/// NSGA-II survival: keep whole fronts while they fit, split the last by
/// descending crowding (ties keep input order).
fn select_survivors(mut combined: Vec<Individual>, pop_size: usize) -> Vec<Individual> {
    rank_population(&mut combined);
    let mut order: Vec<usize> = (0..combined.len()).collect();
    order.sort_by(|&a, &b| {
        combined[a]
            .rank
            .cmp(&combined[b].rank)
            .then(
                combined[b]
                    .crowding
                    .partial_cmp(&combined[a].crowding)
                    .expect("crowding comparable"),
            )
            .then(a.cmp(&b))
    });
    order.truncate(pop_size);
    order.sort_unstable();
    let mut keep = vec![false; combined.len()];
    for &i in &order {
        keep[i] = true;
    }
    let mut survivors: Vec<Individual> = combined
        .into_iter()
        .zip(keep)
        .filter_map(|(ind, k)| k.then_some(ind))
        .collect();
    rank_population(&mut survivors);
    survivors
}

/// Runs the full outer loop against a scenario. Returns the final front 0
/// with knee indices, per-generation progress, and the evaluation counts.
pub fn evolve(
    fields: &ScenarioFields,
    cfg: &EvolutionConfig,
    de_cfg: &DeConfig,
    fit_cfg: &FitnessConfig,
) -> Result<EvolveOutcome> {
    cfg.validate()?;
    de_cfg.validate()?;
    fit_cfg.validate()?;
    let budget = EvalBudget::new();
    let used = |b: &EvalBudget| match cfg.counting {
        BudgetCounting::Total => b.total(),
        BudgetCounting::Outer => b.outer(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cumulative = CumulativeFront::default();
    let mut progress = Vec::new();

    // Initial population: ramped trees, each tuned and evaluated.
    let plan = plan_inner_generations(cfg.eval_budget, cfg.pop_size, de_cfg, cfg.counting);
    let trees = ramped_half_and_half(cfg.pop_size, cfg.init_depth, &mut rng)?;
    let mut population = Vec::with_capacity(cfg.pop_size);
    for (slot, tree) in trees.into_iter().enumerate() {
        let mut de_rng = de_stream(cfg.seed, 0, slot as u64);
        let (tree, objectives) =
            tune_and_evaluate(tree, fields, fit_cfg, de_cfg, plan, &budget, &mut de_rng)?;
        cumulative.insert(objectives.vector());
        population.push(Individual { tree, objectives, rank: 0, crowding: 0.0 });
    }
    rank_population(&mut population);
    record_progress(&mut progress, 0, &budget, &population, &cumulative);

    let mut generation = 0usize;
    while used(&budget) < cfg.eval_budget {
        generation += 1;
        let remaining = cfg.eval_budget - used(&budget);
        let plan = plan_inner_generations(remaining, cfg.pop_size, de_cfg, cfg.counting);

        let mut offspring_trees = Vec::with_capacity(cfg.pop_size);
        while offspring_trees.len() < cfg.pop_size {
            let p1 = tournament(&population, &mut rng);
            let p2 = tournament(&population, &mut rng);
            let (mut c1, mut c2) = if rng.random::<f64>() < cfg.crossover_rate {
                subtree_crossover(&p1.tree, &p2.tree, &mut rng)
            } else {
                (p1.tree.clone(), p2.tree.clone())
            };
            if rng.random::<f64>() < cfg.mutation_rate {
                c1 = subtree_mutation(&c1, &mut rng);
            }
            if rng.random::<f64>() < cfg.mutation_rate {
                c2 = subtree_mutation(&c2, &mut rng);
            }
            offspring_trees.push(c1);
            offspring_trees.push(c2);
        }

        let mut combined = population;
        for (slot, tree) in offspring_trees.into_iter().enumerate() {
            let mut de_rng = de_stream(cfg.seed, generation as u64, slot as u64);
            let (tree, objectives) =
                tune_and_evaluate(tree, fields, fit_cfg, de_cfg, plan, &budget, &mut de_rng)?;
            cumulative.insert(objectives.vector());
            combined.push(Individual { tree, objectives, rank: 0, crowding: 0.0 });
        }
        population = select_survivors(combined, cfg.pop_size);
        record_progress(&mut progress, generation, &budget, &population, &cumulative);
    }

    // Final archive: front 0 of the last population, in a canonical order.
    let mut members: Vec<Individual> =
        population.into_iter().filter(|i| i.rank == 0).collect();
    members.sort_by(|a, b| {
        a.objectives
            .f1
            .cmp(&b.objectives.f1)
            .then(a.objectives.f2.partial_cmp(&b.objectives.f2).expect("finite"))
            .then_with(|| a.tree.serialize().cmp(&b.tree.serialize()))
    });
    let knees = select_knee_points(&members.iter().map(|m| m.objectives.vector()).collect::<Vec<_>>());
    Ok(EvolveOutcome {
        archive: ParetoArchive { members, knees },
        progress,
        total_evaluations: budget.total(),
        outer_evaluations: budget.outer(),
    })
}

fn record_progress(
    progress: &mut Vec<ProgressRecord>,
    generation: usize,
    budget: &EvalBudget,
    population: &[Individual],
    cumulative: &CumulativeFront,
) {
    let front_size = population.iter().filter(|i| i.rank == 0).count();
    let best_f2 = population
        .iter()
        .map(|i| i.objectives.f2)
        .fold(f64::INFINITY, f64::min);
    progress.push(ProgressRecord {
        generation,
        total_evaluations: budget.total(),
        outer_evaluations: budget.outer(),
        front_size,
        best_f2,
        hypervolume: hypervolume(&cumulative.points, HYPERVOLUME_REF),
    });
}
