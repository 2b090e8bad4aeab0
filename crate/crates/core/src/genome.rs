//! GRN controllers encoded as typed GP trees, with initialization, variation
//! operators, and a canonical text serialization.
//!
//! A tree is the evolvable individual: terminals read one of the two morphogen
//! input channels, internal nodes are regulation motifs carrying their own
//! threshold `theta` (steepness `k` is fixed at 1). Structural bounds: depth
//! in [1, 4] with a lone terminal counting as depth 1, and node counts
//! asserted to stay in [1, 31] (the depth bound actually caps them at 15;
//! 31 is the documented contract).
//!
//! The canonical text form is prefix notation with the threshold printed
//! directly after the motif name, e.g. `(XNOR 0.9256 (NAND 0.8393 x1 x1) x2)`.
//! Thresholds are printed with Rust's shortest round-trip float formatting, so
//! `parse(serialize(t))` reproduces `t` bit-exactly.
//!
//! Variation follows standard subtree GP: uniform crossover points with
//! truncate-to-terminal repair of depth overflows (keeping the crossover rate
//! meaningful without silent retries), uniform-node subtree mutation growing a
//! replacement within the remaining depth budget, and ramped half-and-half
//! initialization cycling depth buckets with alternating full/grow methods.
//! Thresholds travel with their subtree; the DE inner loop re-tunes them
//! afterwards.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::motif::{MotifKind, ALL_MOTIFS};
use crate::{Error, Result};

/// Maximum tree depth (root level = depth 1).
pub const MAX_DEPTH: usize = 4;
/// Documented node-count cap; the depth bound keeps actual trees at or
/// below 2^MAX_DEPTH - 1 = 15 nodes, comfortably inside it.
pub const MAX_NODES: usize = (1 << (MAX_DEPTH + 1)) - 1;
/// Threshold search range.
pub const THETA_RANGE: (f64, f64) = (0.0, 2.0);

/// Input channel a terminal reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Input {
    X1,
    X2,
}

impl Input {
    pub fn name(self) -> &'static str {
        match self {
            Input::X1 => "x1",
            Input::X2 => "x2",
        }
    }
}

/// A node of a GRN tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GrnNode {
    Terminal(Input),
    Motif {
        kind: MotifKind,
        theta: f64,
        children: Vec<GrnNode>,
    },
}

impl GrnNode {
    fn depth(&self) -> usize {
        match self {
            GrnNode::Terminal(_) => 1,
            GrnNode::Motif { children, .. } => {
                1 + children.iter().map(GrnNode::depth).max().unwrap_or(0)
            }
        }
    }

    fn count(&self) -> usize {
        match self {
            GrnNode::Terminal(_) => 1,
            GrnNode::Motif { children, .. } => 1 + children.iter().map(GrnNode::count).sum::<usize>(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let GrnNode::Motif { kind, theta, children } = self {
            if children.len() != kind.arity() {
                return Err(Error::Arity {
                    kind: kind.name(),
                    expected: kind.arity(),
                    got: children.len(),
                });
            }
            if !(*theta >= THETA_RANGE.0 && *theta <= THETA_RANGE.1) {
                return Err(Error::Theta { value: *theta });
            }
            for c in children {
                c.validate()?;
            }
        }
        Ok(())
    }

    /// Bottom-up steady-state evaluation with the given terminal readings.
    pub(crate) fn eval(&self, t1: f64, t2: f64) -> f64 {
        match self {
            GrnNode::Terminal(Input::X1) => t1,
            GrnNode::Terminal(Input::X2) => t2,
            GrnNode::Motif { kind, theta, children } => {
                let mut inputs = [0.0f64; 2];
                for (i, c) in children.iter().enumerate() {
                    inputs[i] = c.eval(t1, t2);
                }
                crate::motif::response_raw(*kind, &inputs[..children.len()], *theta, 1.0)
            }
        }
    }
}

/// A validated GRN tree genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrnTree {
    root: GrnNode,
}

impl GrnTree {
    /// Wraps a root node, enforcing arity, threshold range, and the depth bound.
    pub fn new(root: GrnNode) -> Result<Self> {
        root.validate()?;
        let depth = root.depth();
        if depth > MAX_DEPTH {
            return Err(Error::Depth { depth, max: MAX_DEPTH });
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &GrnNode {
        &self.root
    }

    /// Tree depth; a lone terminal has depth 1.
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Total node count, terminals included (objective f1).
    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    /// Number of motif nodes (the DE search dimension).
    pub fn motif_count(&self) -> usize {
        self.extract_params().len()
    }

    /// Steady-state output for terminal readings `(t1, t2)`.
    pub fn eval(&self, t1: f64, t2: f64) -> f64 {
        self.root.eval(t1, t2)
    }

    /// Pre-order (root first) vector of motif thresholds.
    pub fn extract_params(&self) -> Vec<f64> {
        fn walk(n: &GrnNode, out: &mut Vec<f64>) {
            if let GrnNode::Motif { theta, children, .. } = n {
                out.push(*theta);
                children.iter().for_each(|c| walk(c, out));
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    /// Returns a copy with thresholds replaced in pre-order.
    pub fn inject_params(&self, thetas: &[f64]) -> Result<GrnTree> {
        let expected = self.motif_count();
        if thetas.len() != expected {
            return Err(Error::ParamLen { expected, got: thetas.len() });
        }
        fn walk(n: &mut GrnNode, thetas: &[f64], i: &mut usize) {
            if let GrnNode::Motif { theta, children, .. } = n {
                *theta = thetas[*i];
                *i += 1;
                children.iter_mut().for_each(|c| walk(c, thetas, i));
            }
        }
        let mut root = self.root.clone();
        let mut i = 0;
        walk(&mut root, thetas, &mut i);
        GrnTree::new(root)
    }

    /// Canonical prefix text, e.g. `(XNOR 0.9256 (NAND 0.8393 x1 x1) x2)`.
    pub fn serialize(&self) -> String {
        fn write(n: &GrnNode, out: &mut String) {
            match n {
                GrnNode::Terminal(input) => out.push_str(input.name()),
                GrnNode::Motif { kind, theta, children } => {
                    out.push('(');
                    out.push_str(kind.name());
                    out.push(' ');
                    out.push_str(&theta.to_string());
                    for c in children {
                        out.push(' ');
                        write(c, out);
                    }
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        write(&self.root, &mut out);
        out
    }

    /// Parses the canonical prefix text form.
    pub fn parse(text: &str) -> Result<GrnTree> {
        let mut p = Parser { text: text.as_bytes(), pos: 0 };
        let root = p.node()?;
        p.skip_ws();
        if p.pos != p.text.len() {
            return Err(p.err("trailing input after tree"));
        }
        GrnTree::new(root)
    }
}

impl std::fmt::Display for GrnTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.serialize())
    }
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.text.len()
            && !self.text[self.pos].is_ascii_whitespace()
            && self.text[self.pos] != b'('
            && self.text[self.pos] != b')'
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.text[start..self.pos]).unwrap_or("")
    }

    fn node(&mut self) -> Result<GrnNode> {
        self.skip_ws();
        if self.pos >= self.text.len() {
            return Err(self.err("expected a tree node"));
        }
        if self.text[self.pos] == b'(' {
            self.pos += 1;
            self.skip_ws();
            let name_pos = self.pos;
            let name = self.atom();
            let kind = MotifKind::from_name(name).ok_or(Error::Parse {
                pos: name_pos,
                msg: format!("unknown motif `{name}`"),
            })?;
            self.skip_ws();
            let theta_pos = self.pos;
            let theta_txt = self.atom();
            let theta: f64 = theta_txt.parse().map_err(|_| Error::Parse {
                pos: theta_pos,
                msg: format!("expected threshold, got `{theta_txt}`"),
            })?;
            let mut children = Vec::with_capacity(kind.arity());
            for _ in 0..kind.arity() {
                children.push(self.node()?);
            }
            self.skip_ws();
            if self.pos >= self.text.len() || self.text[self.pos] != b')' {
                return Err(self.err(format!("expected `)` closing {}", kind.name())));
            }
            self.pos += 1;
            Ok(GrnNode::Motif { kind, theta, children })
        } else {
            let pos = self.pos;
            match self.atom() {
                "x1" => Ok(GrnNode::Terminal(Input::X1)),
                "x2" => Ok(GrnNode::Terminal(Input::X2)),
                other => Err(Error::Parse {
                    pos,
                    msg: format!("expected `x1`, `x2`, or `(`, got `{other}`"),
                }),
            }
        }
    }
}

/// Growth method for random trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    /// Every branch reaches exactly the bucket depth.
    Full,
    /// Branches may terminate early.
    Grow,
}

fn random_terminal(rng: &mut impl Rng) -> GrnNode {
    if rng.random::<bool>() {
        GrnNode::Terminal(Input::X1)
    } else {
        GrnNode::Terminal(Input::X2)
    }
}

fn random_theta(rng: &mut impl Rng) -> f64 {
    rng.random_range(THETA_RANGE.0..=THETA_RANGE.1)
}

/// Grows a random subtree of depth at most (`Full`: exactly) `depth`.
fn random_node(rng: &mut impl Rng, depth: usize, method: Method) -> GrnNode {
    // Terminal when the budget is exhausted, or (grow only) by the uniform
    // function-plus-terminal draw: 2 terminals against the 10 motifs.
    let make_terminal = match method {
        _ if depth <= 1 => true,
        Method::Full => false,
        Method::Grow => rng.random_range(0..ALL_MOTIFS.len() + 2) >= ALL_MOTIFS.len(),
    };
    if make_terminal {
        return random_terminal(rng);
    }
    let kind = ALL_MOTIFS[rng.random_range(0..ALL_MOTIFS.len())];
    let children = (0..kind.arity())
        .map(|_| random_node(rng, depth - 1, method))
        .collect();
    GrnNode::Motif { kind, theta: random_theta(rng), children }
}

/// Ramped half-and-half initialization: cycles depth buckets over
/// `depth_range` and alternates full/grow within each bucket.
pub fn ramped_half_and_half(
    pop_size: usize,
    depth_range: (usize, usize),
    rng: &mut impl Rng,
) -> Result<Vec<GrnTree>> {
    let (lo, hi) = depth_range;
    if pop_size < 2 {
        return Err(Error::Config("population needs at least 2 trees".into()));
    }
    if lo < 1 || hi > MAX_DEPTH || lo > hi {
        return Err(Error::Config(format!(
            "depth range [{lo}, {hi}] outside [1, {MAX_DEPTH}]"
        )));
    }
    (0..pop_size)
        .map(|i| {
            let depth = lo + i % (hi - lo + 1);
            let method = if (i / (hi - lo + 1)) % 2 == 0 { Method::Full } else { Method::Grow };
            GrnTree::new(random_node(rng, depth, method))
        })
        .collect()
}

/// Pre-order index lookup: returns the node's depth and a mutable reference.
fn node_at_mut(root: &mut GrnNode, index: usize) -> Option<(usize, &mut GrnNode)> {
    fn walk<'a>(
        n: &'a mut GrnNode,
        depth: usize,
        index: usize,
        counter: &mut usize,
    ) -> Option<(usize, &'a mut GrnNode)> {
        if *counter == index {
            return Some((depth, n));
        }
        *counter += 1;
        if let GrnNode::Motif { children, .. } = n {
            for c in children {
                if let Some(hit) = walk(c, depth + 1, index, counter) {
                    return Some(hit);
                }
            }
        }
        None
    }
    walk(root, 1, index, &mut 0)
}

/// Swaps the subtrees at pre-order indices `ia` of `a` and `ib` of `b`.
/// An offspring whose depth would exceed the bound gets the transplanted
/// subtree truncated to a random terminal instead.
pub fn subtree_crossover_at(
    a: &GrnTree,
    b: &GrnTree,
    ia: usize,
    ib: usize,
    rng: &mut impl Rng,
) -> (GrnTree, GrnTree) {
    let mut ra = a.root.clone();
    let mut rb = b.root.clone();
    let (da, sa) = node_at_mut(&mut ra, ia).expect("index in range");
    let (db, sb) = node_at_mut(&mut rb, ib).expect("index in range");
    // Transplant only if the incoming subtree fits the host's depth budget;
    // otherwise the crossover point degenerates to a fresh terminal.
    let fits_a = da - 1 + sb.depth() <= MAX_DEPTH;
    let fits_b = db - 1 + sa.depth() <= MAX_DEPTH;
    match (fits_a, fits_b) {
        (true, true) => std::mem::swap(sa, sb),
        (true, false) => {
            *sa = sb.clone();
            *sb = random_terminal(rng);
        }
        (false, true) => {
            *sb = sa.clone();
            *sa = random_terminal(rng);
        }
        (false, false) => {
            *sa = random_terminal(rng);
            *sb = random_terminal(rng);
        }
    }
    (
        GrnTree::new(ra).expect("repair keeps the bound"),
        GrnTree::new(rb).expect("repair keeps the bound"),
    )
}

/// Subtree crossover at uniformly chosen points.
pub fn subtree_crossover(
    a: &GrnTree,
    b: &GrnTree,
    rng: &mut impl Rng,
) -> (GrnTree, GrnTree) {
    let ia = rng.random_range(0..a.node_count());
    let ib = rng.random_range(0..b.node_count());
    subtree_crossover_at(a, b, ia, ib, rng)
}

/// Replaces the node at pre-order `index` with a freshly grown random subtree
/// honoring the depth bound at that position.
pub fn subtree_mutation_at(t: &GrnTree, index: usize, rng: &mut impl Rng) -> GrnTree {
    let mut root = t.root.clone();
    let (depth, slot) = node_at_mut(&mut root, index).expect("index in range");
    let budget = MAX_DEPTH - depth + 1;
    *slot = random_node(rng, budget, Method::Grow);
    GrnTree::new(root).expect("growth honors the bound")
}

/// Subtree mutation at a uniformly chosen node.
pub fn subtree_mutation(t: &GrnTree, rng: &mut impl Rng) -> GrnTree {
    let index = rng.random_range(0..t.node_count());
    subtree_mutation_at(t, index, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) const DEMO_MODEL: &str = "(XNOR 0.9256 (NAND 0.8393 x1 x1) x2)";
    const POINT_A: &str = "(XNOR 0.7472 (ANDN 1.3072 x2 x1) x1)";
    const POINT_B: &str = "(XNOR 0.2414 (ANDN 1.5441 x2 x1) (NAND 0.0904 x1 x1))";

    #[test]
    fn published_node_counts() {
        assert_eq!(GrnTree::parse(DEMO_MODEL).unwrap().node_count(), 5);
        assert_eq!(GrnTree::parse(POINT_A).unwrap().node_count(), 5);
        assert_eq!(GrnTree::parse(POINT_B).unwrap().node_count(), 7);
        assert_eq!(GrnTree::parse("x1").unwrap().node_count(), 1);
    }

    #[test]
    fn canonical_round_trip() {
        for text in [DEMO_MODEL, POINT_A, POINT_B, "x1", "x2"] {
            let t = GrnTree::parse(text).unwrap();
            assert_eq!(t.serialize(), text);
        }
    }

    #[test]
    fn preorder_params() {
        let t = GrnTree::parse(DEMO_MODEL).unwrap();
        assert_eq!(t.extract_params(), vec![0.9256, 0.8393]);
        let t2 = t.inject_params(&[0.1, 1.9]).unwrap();
        assert_eq!(t2.extract_params(), vec![0.1, 1.9]);
        assert_eq!(t2.serialize(), "(XNOR 0.1 (NAND 1.9 x1 x1) x2)");
        assert!(GrnTree::parse("x1").unwrap().extract_params().is_empty());
        assert!(matches!(
            t.inject_params(&[0.5]),
            Err(Error::ParamLen { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn parse_rejects_malformed_input() {
        for bad in [
            "",
            "x3",
            "(XNOR 0.5 x1)",              // arity 2, one child
            "(POS 0.5 x1 x2)",            // arity 1, two children
            "(FOO 0.5 x1 x2)",            // unknown motif
            "(POS x1)",                   // missing threshold
            "(POS 0.5 x1",                // unclosed
            "(POS 0.5 x1) x2",            // trailing input
            "(POS 2.5 x1)",               // threshold out of range
            "(POS 0.1 (POS 0.1 (POS 0.1 (POS 0.1 (POS 0.1 x1)))))", // depth 5
        ] {
            assert!(GrnTree::parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn parse_reports_position() {
        match GrnTree::parse("(XNOR bad x1 x2)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn theta_survives_round_trip_at_full_precision() {
        let theta = 0.123456789012345678; // more digits than f64 holds
        let t = GrnTree::new(GrnNode::Motif {
            kind: MotifKind::Pos,
            theta,
            children: vec![GrnNode::Terminal(Input::X1)],
        })
        .unwrap();
        let back = GrnTree::parse(&t.serialize()).unwrap();
        assert_eq!(back.extract_params()[0].to_bits(), theta.to_bits());
    }

    #[test]
    fn crossover_at_roots_swaps_parents() {
        let a = GrnTree::parse(DEMO_MODEL).unwrap();
        let b = GrnTree::parse("x2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (ca, cb) = subtree_crossover_at(&a, &b, 0, 0, &mut rng);
        assert_eq!(ca, b);
        assert_eq!(cb, a);
    }

    #[test]
    fn crossover_repairs_depth_overflow() {
        // Depth-4 chains: transplanting b's root under a's deepest node would
        // make depth 7; the repair truncates to a terminal.
        let a = GrnTree::parse("(POS 0.1 (POS 0.2 (POS 0.3 x1)))").unwrap();
        let b = GrnTree::parse("(NEG 0.4 (NEG 0.5 (NEG 0.6 x2)))").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (ca, cb) = subtree_crossover_at(&a, &b, 3, 0, &mut rng); // a's leaf <-> b's root
        assert!(ca.depth() <= MAX_DEPTH);
        assert!(cb.depth() <= MAX_DEPTH);
    }

    #[test]
    fn mutation_at_leaf_with_no_budget_grows_terminal() {
        let t = GrnTree::parse("(POS 0.1 (POS 0.2 (POS 0.3 x1)))").unwrap();
        assert_eq!(t.depth(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Index 3 is the depth-4 terminal; only a terminal fits there, so the
        // structure (and node count) cannot change.
        for _ in 0..20 {
            let m = subtree_mutation_at(&t, 3, &mut rng);
            assert!(m.depth() <= MAX_DEPTH);
            assert_eq!(m.node_count(), t.node_count());
        }
    }

    #[test]
    fn ramped_population_is_deterministic_and_bounded() {
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let p1 = ramped_half_and_half(40, (1, 4), &mut r1).unwrap();
        let p2 = ramped_half_and_half(40, (1, 4), &mut r2).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p1.len(), 40);
        for t in &p1 {
            assert!((1..=MAX_DEPTH).contains(&t.depth()));
            assert!((1..=MAX_NODES).contains(&t.node_count()));
        }
        // Bucket 1 trees are single terminals.
        assert_eq!(p1[0].node_count(), 1);
        assert_eq!(p1[4].node_count(), 1);
    }

    fn arbitrary_tree(seed: u64) -> GrnTree {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = rng.random_range(1..=MAX_DEPTH);
        GrnTree::new(random_node(&mut rng, depth, Method::Grow)).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn variation_preserves_invariants(sa in 0u64..1000, sb in 0u64..1000, op_seed in 0u64..1000) {
            let a = arbitrary_tree(sa);
            let b = arbitrary_tree(sb);
            let mut rng = ChaCha8Rng::seed_from_u64(op_seed);
            let (ca, cb) = subtree_crossover(&a, &b, &mut rng);
            let m = subtree_mutation(&ca, &mut rng);
            for t in [&ca, &cb, &m] {
                prop_assert!(t.depth() >= 1 && t.depth() <= MAX_DEPTH);
                prop_assert!(t.node_count() >= 1 && t.node_count() <= MAX_NODES);
                prop_assert!(t.extract_params().iter().all(|&th| (0.0..=2.0).contains(&th)));
                // GrnTree::new re-validates arity; round-trip re-checks parseability.
                prop_assert_eq!(&GrnTree::parse(&t.serialize()).unwrap(), t);
            }
        }

        #[test]
        fn serialize_parse_round_trip(seed in 0u64..5000) {
            let t = arbitrary_tree(seed);
            let back = GrnTree::parse(&t.serialize()).unwrap();
            prop_assert_eq!(&back, &t);
            // Thresholds survive exactly, not just approximately.
            let (a, b) = (t.extract_params(), back.extract_params());
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }

        #[test]
        fn inject_extract_round_trip(seed in 0u64..1000, raw in proptest::collection::vec(0.0f64..=2.0, 0..32)) {
            let t = arbitrary_tree(seed);
            let n = t.motif_count();
            prop_assume!(raw.len() >= n);
            let v = &raw[..n];
            let injected = t.inject_params(v).unwrap();
            prop_assert_eq!(injected.extract_params(), v.to_vec());
        }
    }
}
