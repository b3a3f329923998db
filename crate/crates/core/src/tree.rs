//! Distance-based ranking tree, the weak learner shared by every ensemble.
//!
//! A node's consensus is the Borda aggregate of its targets. A split is scored
//! by the total Kendall loss of each child's targets against that child's
//! consensus. For complete rankings `1 - tau = 4 D / (n (n - 1))`, where `D`
//! counts discordant pairs, so the search works on integer discordance totals
//! computed from pairwise-preference count matrices.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ranking::{check_features, ranking_from_scores, Dataset, LabelSet, Ranking};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSubset {
    /// Every feature is a split candidate.
    All,
    /// `ceil(sqrt(d))` features drawn afresh at every split.
    RandomSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub feature_subset: FeatureSubset,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: 16, min_leaf: 3, feature_subset: FeatureSubset::All, seed: 0 }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::InvalidConfig("max_depth must be at least 1".into()));
        }
        if self.min_leaf < 1 {
            return Err(Error::InvalidConfig("min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf { consensus: Ranking },
    /// Instances with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Trained tree. Nodes are stored parent-before-child with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingTree {
    nodes: Vec<Node>,
    label_set: LabelSet,
    n_features: usize,
}

impl RankingTree {
    /// Rebuilds a tree from its node list, checking structural invariants.
    pub fn from_nodes(nodes: Vec<Node>, label_set: LabelSet, n_features: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidConfig("tree has no nodes".into()));
        }
        let mut referenced = vec![false; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Node::Leaf { consensus } => {
                    if consensus.len() != label_set.len() || !consensus.is_complete() {
                        return Err(Error::InvalidConfig(format!(
                            "node {i}: leaf consensus is not a complete ranking"
                        )));
                    }
                }
                Node::Split { feature, threshold, left, right } => {
                    if *feature >= n_features || !threshold.is_finite() {
                        return Err(Error::InvalidConfig(format!("node {i}: bad split")));
                    }
                    for &child in [left, right] {
                        if child <= i || child >= nodes.len() || referenced[child] {
                            return Err(Error::InvalidConfig(format!(
                                "node {i}: bad child index {child}"
                            )));
                        }
                        referenced[child] = true;
                    }
                }
            }
        }
        if referenced.iter().skip(1).any(|r| !r) {
            return Err(Error::InvalidConfig("tree has unreachable nodes".into()));
        }
        Ok(RankingTree { nodes, label_set, n_features })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict(&self, features: &[f64]) -> Result<&Ranking> {
        check_features(features, self.n_features, 0)?;
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { consensus } => return Ok(consensus),
                Node::Split { feature, threshold, left, right } => {
                    i = if features[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// Route `features` through the tree and return the leaf consensus.
pub fn predict_tree(tree: &RankingTree, features: &[f64]) -> Result<Ranking> {
    tree.predict(features).cloned()
}

/// Pairwise preference counts: `get(a, b)` = instances ranking `a` above `b`.
#[derive(Clone)]
struct PairCounts {
    n: usize,
    counts: Vec<u32>,
}

impl PairCounts {
    fn new(n: usize) -> Self {
        PairCounts { n, counts: vec![0; n * n] }
    }

    fn get(&self, a: usize, b: usize) -> u32 {
        self.counts[a * self.n + b]
    }

    fn add(&mut self, order: &[usize]) {
        for (p, &a) in order.iter().enumerate() {
            for &b in &order[p + 1..] {
                self.counts[a * self.n + b] += 1;
            }
        }
    }

    fn difference(&self, other: &PairCounts) -> PairCounts {
        let counts = self.counts.iter().zip(&other.counts).map(|(x, y)| x - y).collect();
        PairCounts { n: self.n, counts }
    }

    fn consensus(&self) -> Ranking {
        let scores: Vec<f64> = (0..self.n)
            .map(|a| (0..self.n).map(|b| self.get(a, b) as u64).sum::<u64>() as f64)
            .collect();
        ranking_from_scores(&scores)
    }

    /// Consensus ranking and the summed discordant-pair count against it.
    fn impurity(&self) -> (Ranking, u64) {
        let consensus = self.consensus();
        let mut total = 0u64;
        for a in 0..self.n {
            for b in a + 1..self.n {
                total += if consensus.prefers(a, b) { self.get(b, a) } else { self.get(a, b) } as u64;
            }
        }
        (consensus, total)
    }
}

struct Builder<'a> {
    data: &'a Dataset,
    orders: Vec<Vec<usize>>,
    config: TreeConfig,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Builder<'_> {
    fn counts(&self, members: &[usize]) -> PairCounts {
        let mut pc = PairCounts::new(self.data.n_labels());
        for &i in members {
            pc.add(&self.orders[i]);
        }
        pc
    }

    fn build(&mut self, members: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let totals = self.counts(&members);
        let (consensus, impurity) = totals.impurity();
        self.nodes.push(Node::Leaf { consensus });

        let instances = self.data.instances();
        let pure = members.iter().all(|&i| instances[i].target == instances[members[0]].target);
        if depth >= self.config.max_depth || pure || members.len() < 2 * self.config.min_leaf {
            return id;
        }
        let Some(best) = self.best_split(&members, &totals, impurity) else {
            return id;
        };
        let left = self.build(best.left, depth + 1);
        let right = self.build(best.right, depth + 1);
        self.nodes[id] =
            Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.data.d();
        match self.config.feature_subset {
            FeatureSubset::All => (0..d).collect(),
            FeatureSubset::RandomSqrt => {
                let k = ((d as f64).sqrt().ceil() as usize).clamp(1, d);
                let mut picked = index::sample(&mut self.rng, d, k).into_vec();
                picked.sort_unstable();
                picked
            }
        }
    }

    fn best_split(&mut self, members: &[usize], totals: &PairCounts, parent: u64) -> Option<BestSplit> {
        let instances = self.data.instances();
        let min_leaf = self.config.min_leaf;
        let mut best: Option<(usize, f64, u64, Vec<usize>, usize)> = None;
        let mut sorted = members.to_vec();
        for feature in self.candidate_features() {
            let x = |i: usize| instances[i].features[feature];
            sorted.sort_unstable_by(|&a, &b| x(a).total_cmp(&x(b)).then(a.cmp(&b)));
            let mut left = PairCounts::new(totals.n);
            for k in 1..sorted.len() {
                left.add(&self.orders[sorted[k - 1]]);
                let (lo, hi) = (x(sorted[k - 1]), x(sorted[k]));
                if lo == hi || k < min_leaf || sorted.len() - k < min_leaf {
                    continue;
                }
                let (_, li) = left.impurity();
                let (_, ri) = totals.difference(&left).impurity();
                let impurity = li + ri;
                let improves = match &best {
                    Some((_, _, b, _, _)) => impurity < *b,
                    None => impurity < parent,
                };
                if improves {
                    best = Some((feature, midpoint(lo, hi), impurity, sorted.clone(), k));
                }
            }
        }
        best.map(|(feature, threshold, _, sorted, k)| {
            let (l, r) = sorted.split_at(k);
            BestSplit { feature, threshold, left: l.to_vec(), right: r.to_vec() }
        })
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= lo && mid < hi {
        mid
    } else {
        lo
    }
}

/// Grows a ranking tree on `data` (see module docs for the split rule).
pub fn train_tree(data: &Dataset, config: &TreeConfig) -> Result<RankingTree> {
    config.validate()?;
    if data.m() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut builder = Builder {
        data,
        orders: data.instances().iter().map(|inst| inst.target.order()).collect(),
        config: *config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        nodes: Vec::new(),
    };
    builder.build((0..data.m()).collect(), 0);
    let Builder { nodes, .. } = builder;
    Ok(RankingTree { nodes, label_set: data.label_set().clone(), n_features: data.d() })
}

/// Sum of `1 - tau_b(target, consensus)` over a set of complete rankings,
/// computed directly from the definition.
pub fn kendall_impurity(targets: &[&Ranking], consensus: &Ranking) -> f64 {
    targets
        .iter()
        .map(|t| crate::metrics::instance_loss(consensus, t).expect("complete rankings"))
        .sum()
}
