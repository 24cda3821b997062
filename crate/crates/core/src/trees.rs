//! Ordered full `k`-ary trees and the Picard terms they index.
//!
//! A tree with `j` internal nodes stands for one multilinear term of the power
//! series: leaves are the free evolution `S(t)φ` and an internal node applies
//! the Duhamel operator to its children. [`PicardEvaluator`] evaluates these
//! terms on a shared DAG: identical subtrees are computed once, values at the
//! global quadrature nodes are memoised, and the integral over complete panels
//! is read from prefix sums. The remaining partial panel is re-integrated with
//! the same Gauss–Legendre rule, so the result is the plain nested quadrature
//! up to roundoff.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Accumulator, FrequencyField, Lattice, PhasePair, Truncation};
use crate::propagator::{add_kernel_terms, linear_evolve, product, DispersionKind, DuhamelPrefix};
use crate::time::{GaussLegendre, Rule, TimeField, TimeGrid};

/// Default combinatorial budget for explicit enumeration: `k·j ≤ 20`.
pub const DEFAULT_BUDGET: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TreeNode {
    Leaf,
    Internal(Vec<TreeNode>),
}

impl TreeNode {
    fn internal_count(&self) -> usize {
        match self {
            TreeNode::Leaf => 0,
            TreeNode::Internal(ch) => 1 + ch.iter().map(TreeNode::internal_count).sum::<usize>(),
        }
    }

    fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf => 1,
            TreeNode::Internal(ch) => ch.iter().map(TreeNode::leaf_count).sum(),
        }
    }

    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf => 0,
            TreeNode::Internal(ch) => 1 + ch.iter().map(TreeNode::depth).max().unwrap_or(0),
        }
    }
}

/// An ordered full `k`-ary tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KTree {
    arity: usize,
    root: TreeNode,
}

impl KTree {
    /// The single-leaf tree.
    pub fn leaf(arity: usize) -> Self {
        Self {
            arity,
            root: TreeNode::Leaf,
        }
    }

    /// Validates that every internal node has exactly `arity` children.
    pub fn new(arity: usize, root: TreeNode) -> Result<Self> {
        fn check(node: &TreeNode, k: usize) -> bool {
            match node {
                TreeNode::Leaf => true,
                TreeNode::Internal(ch) => ch.len() == k && ch.iter().all(|c| check(c, k)),
            }
        }
        if arity < 2 {
            return Err(Error::TreeSyntax(format!("arity {arity} below 2")));
        }
        if !check(&root, arity) {
            return Err(Error::TreeSyntax(format!(
                "some internal node does not have {arity} children"
            )));
        }
        Ok(Self { arity, root })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    /// Number of internal (non-terminal) nodes `j`.
    pub fn internal_count(&self) -> usize {
        self.root.internal_count()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaf_count()
    }

    pub fn node_count(&self) -> usize {
        self.internal_count() + self.leaf_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Builds the explicit order `b ≤ a` ("`b` lies below `a`") on the nodes and
    /// checks the tree axioms: partial order, comparability of nodes sharing a
    /// lower bound below a common upper bound, a maximal root, and exactly `k`
    /// children (covering elements) at every non-terminal node.
    pub fn verify_poset_axioms(&self) -> bool {
        let mut parent: Vec<Option<usize>> = Vec::new();
        fn walk(node: &TreeNode, up: Option<usize>, parent: &mut Vec<Option<usize>>) {
            let id = parent.len();
            parent.push(up);
            if let TreeNode::Internal(ch) = node {
                for c in ch {
                    walk(c, Some(id), parent);
                }
            }
        }
        walk(&self.root, None, &mut parent);
        let n = parent.len();
        let mut le = vec![vec![false; n]; n];
        for (b, row) in le.iter_mut().enumerate() {
            let mut cur = Some(b);
            while let Some(a) = cur {
                row[a] = true;
                cur = parent[a];
            }
        }
        for a in 0..n {
            if !le[a][a] {
                return false;
            }
            for b in 0..n {
                if a != b && le[a][b] && le[b][a] {
                    return false;
                }
                for c in 0..n {
                    if le[a][b] && le[b][c] && !le[a][c] {
                        return false;
                    }
                }
            }
        }
        for a4 in 0..n {
            for a1 in 0..n {
                if !le[a4][a1] {
                    continue;
                }
                for a2 in 0..n {
                    for a3 in 0..n {
                        let between = le[a4][a2] && le[a2][a1] && le[a4][a3] && le[a3][a1];
                        if between && !(le[a2][a3] || le[a3][a2]) {
                            return false;
                        }
                    }
                }
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&r| (0..n).all(|a| le[a][r])).collect();
        if roots.len() != 1 {
            return false;
        }
        for a in 0..n {
            let children = (0..n)
                .filter(|&b| {
                    b != a
                        && le[b][a]
                        && (0..n).all(|c| !(le[b][c] && le[c][a]) || c == a || c == b)
                })
                .count();
            if children != 0 && children != self.arity {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeNode::Leaf => f.write_str("*"),
            TreeNode::Internal(ch) => {
                f.write_str("(")?;
                for (i, c) in ch.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for KTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl FromStr for KTree {
    type Err = Error;

    /// Parses `*` and `(c₁ … c_k)`. A bare `*` has no arity information and is
    /// read as a binary leaf.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        fn parse(tokens: &[char], pos: &mut usize) -> Result<TreeNode> {
            match tokens.get(*pos) {
                Some('*') => {
                    *pos += 1;
                    Ok(TreeNode::Leaf)
                }
                Some('(') => {
                    *pos += 1;
                    let mut children = Vec::new();
                    while tokens.get(*pos) != Some(&')') {
                        if *pos >= tokens.len() {
                            return Err(Error::TreeSyntax("unclosed parenthesis".into()));
                        }
                        children.push(parse(tokens, pos)?);
                    }
                    *pos += 1;
                    if children.is_empty() {
                        return Err(Error::TreeSyntax("empty internal node".into()));
                    }
                    Ok(TreeNode::Internal(children))
                }
                Some(c) => Err(Error::TreeSyntax(format!("unexpected character {c:?}"))),
                None => Err(Error::TreeSyntax("unexpected end of input".into())),
            }
        }
        let root = parse(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::TreeSyntax("trailing input".into()));
        }
        let arity = match &root {
            TreeNode::Leaf => 2,
            TreeNode::Internal(ch) => ch.len(),
        };
        KTree::new(arity, root)
    }
}

/// Ordered compositions of `total` into `parts` nonnegative summands.
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All ordered full `k`-ary trees with `j` internal nodes.
pub fn enumerate_trees(k: usize, j: usize) -> Result<Vec<KTree>> {
    enumerate_trees_with_budget(k, j, DEFAULT_BUDGET)
}

pub fn enumerate_trees_with_budget(k: usize, j: usize, budget: usize) -> Result<Vec<KTree>> {
    if k < 2 {
        return Err(crate::error::invalid(format!("arity {k} below 2")));
    }
    if k * j > budget {
        return Err(Error::BudgetExceeded {
            requested: k * j,
            budget,
        });
    }
    let mut table: Vec<Vec<TreeNode>> = vec![vec![TreeNode::Leaf]];
    for size in 1..=j {
        let mut level = Vec::new();
        for comp in compositions(size - 1, k) {
            let mut partial: Vec<Vec<TreeNode>> = vec![Vec::new()];
            for &part in &comp {
                let mut next = Vec::with_capacity(partial.len() * table[part].len());
                for prefix in &partial {
                    for sub in &table[part] {
                        let mut v = prefix.clone();
                        v.push(sub.clone());
                        next.push(v);
                    }
                }
                partial = next;
            }
            level.extend(partial.into_iter().map(TreeNode::Internal));
        }
        table.push(level);
    }
    Ok(table
        .swap_remove(j)
        .into_iter()
        .map(|root| KTree { arity: k, root })
        .collect())
}

/// Fuss–Catalan number `C(kj, j)/((k−1)j + 1)`.
pub fn fuss_catalan(k: usize, j: usize) -> u128 {
    let n = (k * j) as u128;
    let mut binom: u128 = 1;
    for i in 0..j as u128 {
        binom = binom * (n - i) / (i + 1);
    }
    binom / ((k as u128 - 1) * j as u128 + 1)
}

/// `γ_k = k^k/(k−1)^{k−1}`, the growth rate of the Fuss–Catalan numbers; also a
/// uniform bound `|T(j)| ≤ γ_k^j`.
pub fn growth_rate(k: usize) -> f64 {
    let kf = k as f64;
    kf.powf(kf) / (kf - 1.0).powf(kf - 1.0)
}

/// Outcome of [`count_bound_check`].
#[derive(Clone, Debug, Serialize)]
pub struct CountBound {
    pub arity: usize,
    /// `|T(j)|` for `j = 0..=j_max`, by enumeration.
    pub counts: Vec<u128>,
    /// Smallest `C₀` with `|T(j)| ≤ C₀^j` for all `1 ≤ j ≤ j_max`.
    pub fitted_constant: f64,
    /// Whether `|T(j)| ≤ (4k)^j` holds for every computed `j`.
    pub witness_holds: bool,
}

/// Enumerates `T(j)` for `j ≤ j_max` and measures the geometric count bound.
pub fn count_bound_check(k: usize, j_max: usize) -> Result<CountBound> {
    let mut counts = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        counts.push(enumerate_trees(k, j)?.len() as u128);
    }
    let fitted_constant = counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| (c as f64).powf(1.0 / j as f64))
        .fold(1.0, f64::max);
    let witness = 4.0 * k as f64;
    let witness_holds = counts
        .iter()
        .enumerate()
        .all(|(j, &c)| c as f64 <= witness.powi(j as i32));
    Ok(CountBound {
        arity: k,
        counts,
        fitted_constant,
        witness_holds,
    })
}

/// Node handle inside a [`PicardEvaluator`].
pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum NodeKind {
    Linear,
    Duhamel(Vec<NodeId>),
    Sum(Vec<NodeId>),
}

#[derive(Debug, Default)]
struct NodeTable {
    /// Values at the global quadrature nodes.
    values: OnceLock<Vec<FrequencyField>>,
    /// Prefix sums of the integrand, for Duhamel nodes.
    prefix: OnceLock<DuhamelPrefix>,
}

/// Memoising evaluator for Picard terms of one data set.
#[derive(Debug)]
pub struct PicardEvaluator {
    data: PhasePair,
    arity: usize,
    disp: DispersionKind,
    grid: TimeGrid,
    truncation: Truncation,
    nodes: Vec<NodeKind>,
    interned: HashMap<NodeKind, NodeId>,
    tables: Vec<NodeTable>,
    xi_ids: Vec<NodeId>,
    global: Rule,
    node_index: HashMap<u64, usize>,
}

type Scratch = HashMap<(NodeId, u64), FrequencyField>;

impl PicardEvaluator {
    const LINEAR: NodeId = 0;

    pub fn new(
        data: PhasePair,
        arity: usize,
        grid: TimeGrid,
        disp: DispersionKind,
        truncation: Truncation,
    ) -> Result<Self> {
        if arity < 2 {
            return Err(crate::error::invalid(format!("power {arity} below 2")));
        }
        let global = grid.global_rule();
        let node_index = global
            .iter()
            .enumerate()
            .map(|(n, (t, _))| (t.to_bits(), n))
            .collect();
        let mut ev = Self {
            global,
            node_index,
            data,
            arity,
            disp,
            grid,
            truncation,
            nodes: Vec::new(),
            interned: HashMap::new(),
            tables: Vec::new(),
            xi_ids: Vec::new(),
        };
        let lin = ev.intern(NodeKind::Linear);
        ev.xi_ids.push(lin);
        Ok(ev)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn data(&self) -> &PhasePair {
        &self.data
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dispersion(&self) -> DispersionKind {
        self.disp
    }

    pub fn lattice(&self) -> Lattice {
        self.data.lattice()
    }

    fn intern(&mut self, kind: NodeKind) -> NodeId {
        if let Some(&id) = self.interned.get(&kind) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(kind.clone());
        self.interned.insert(kind, id);
        self.tables.push(NodeTable::default());
        id
    }

    /// Node for `Ψ(tree)`.
    pub fn tree_node(&mut self, tree: &KTree) -> Result<NodeId> {
        if tree.arity() != self.arity {
            return Err(crate::error::invalid(format!(
                "tree arity {} does not match the power {}",
                tree.arity(),
                self.arity
            )));
        }
        Ok(self.intern_subtree(tree.root()))
    }

    fn intern_subtree(&mut self, node: &TreeNode) -> NodeId {
        match node {
            TreeNode::Leaf => Self::LINEAR,
            TreeNode::Internal(ch) => {
                let ids = ch.iter().map(|c| self.intern_subtree(c)).collect();
                self.intern(NodeKind::Duhamel(ids))
            }
        }
    }

    /// Node for `Ξ_j`, built from the recursion
    /// `Ξ_j = Σ_{j₁+…+j_k = j−1} I[Ξ_{j₁}, …, Ξ_{j_k}]`, which regroups the sum
    /// over `T(j)` by the subtrees hanging off the root.
    pub fn xi_node(&mut self, j: usize) -> NodeId {
        while self.xi_ids.len() <= j {
            let level = self.xi_ids.len();
            let terms: Vec<NodeId> = compositions(level - 1, self.arity)
                .into_iter()
                .map(|comp| {
                    let ids = comp.iter().map(|&p| self.xi_ids[p]).collect();
                    self.intern(NodeKind::Duhamel(ids))
                })
                .collect();
            let id = if terms.len() == 1 {
                terms[0]
            } else {
                self.intern(NodeKind::Sum(terms))
            };
            self.xi_ids.push(id);
        }
        self.xi_ids[j]
    }

    /// Node for `U_J = Σ_{j ≤ J} Ξ_j`.
    pub fn partial_sum_node(&mut self, big_j: usize) -> NodeId {
        let ids: Vec<NodeId> = (0..=big_j).map(|j| self.xi_node(j)).collect();
        if ids.len() == 1 {
            ids[0]
        } else {
            self.intern(NodeKind::Sum(ids))
        }
    }

    /// Node for an explicit sum of other nodes.
    pub fn sum_node(&mut self, ids: Vec<NodeId>) -> NodeId {
        self.intern(NodeKind::Sum(ids))
    }

    /// Values of node `id` at every global node.
    fn values(&self, id: NodeId) -> Result<&[FrequencyField]> {
        if let Some(v) = self.tables[id].values.get() {
            return Ok(v);
        }
        let built = self.build_values(id)?;
        Ok(self.tables[id].values.get_or_init(|| built))
    }

    /// Prefix sums of a Duhamel node's integrand.
    fn prefix(&self, id: NodeId) -> Result<&DuhamelPrefix> {
        if let Some(p) = self.tables[id].prefix.get() {
            return Ok(p);
        }
        let NodeKind::Duhamel(children) = &self.nodes[id] else {
            return Err(crate::error::invalid(
                "prefix sums exist only for Duhamel nodes",
            ));
        };
        let tables = children
            .iter()
            .map(|&c| self.values(c))
            .collect::<Result<Vec<_>>>()?;
        let mut integrand = Vec::with_capacity(self.global.len());
        for n in 0..self.global.len() {
            let factors: Vec<&FrequencyField> = tables.iter().map(|t| &t[n]).collect();
            integrand.push(product(&factors, self.truncation)?);
        }
        let built = DuhamelPrefix::new(self.grid, self.disp, self.lattice(), &integrand)?;
        Ok(self.tables[id].prefix.get_or_init(|| built))
    }

    fn build_values(&self, id: NodeId) -> Result<Vec<FrequencyField>> {
        let nodes = &self.global;
        match &self.nodes[id] {
            NodeKind::Linear => Ok(nodes
                .iter()
                .map(|(t, _)| linear_evolve(&self.data, *t, self.disp))
                .collect()),
            NodeKind::Sum(children) => {
                let tables = children
                    .iter()
                    .map(|&c| self.values(c))
                    .collect::<Result<Vec<_>>>()?;
                (0..nodes.len())
                    .map(|n| {
                        tables
                            .iter()
                            .try_fold(FrequencyField::zero(self.lattice()), |acc, t| {
                                acc.add(&t[n])
                            })
                    })
                    .collect()
            }
            NodeKind::Duhamel(children) => {
                let prefix = self.prefix(id)?;
                let q = self.grid.nodes_per_panel();
                nodes
                    .iter()
                    .enumerate()
                    .map(|(n, &(tau, _))| {
                        let mut scratch = Scratch::new();
                        self.duhamel_value(children, prefix, n / q, tau, &mut scratch)
                    })
                    .collect()
            }
        }
    }

    /// Prefix over panels `< p` plus the partial panel `[b_p, t]`.
    fn duhamel_value(
        &self,
        children: &[NodeId],
        prefix: &DuhamelPrefix,
        p: usize,
        t: f64,
        scratch: &mut Scratch,
    ) -> Result<FrequencyField> {
        let base = prefix.value(p, t)?;
        let a = self.grid.breakpoint(p);
        if t <= a {
            return Ok(base);
        }
        let mut acc = Accumulator::default();
        for (tau, w) in GaussLegendre::cached(self.grid.nodes_per_panel()).mapped(a, t) {
            for &c in children {
                self.value_in(c, tau, scratch)?;
            }
            let factors: Vec<&FrequencyField> = children
                .iter()
                .map(|&c| &scratch[&(c, tau.to_bits())])
                .collect();
            let integrand = product(&factors, self.truncation)?;
            add_kernel_terms(&mut acc, self.disp, t, tau, w, &integrand);
        }
        base.add(&acc.into_field(self.lattice()))
    }

    /// Evaluates node `id` at `t` into `scratch`, reusing entries already there.
    /// Global quadrature nodes are served from the memo tables.
    fn value_in(&self, id: NodeId, t: f64, scratch: &mut Scratch) -> Result<()> {
        let key = (id, t.to_bits());
        if scratch.contains_key(&key) {
            return Ok(());
        }
        let v = if let Some(&n) = self.node_index.get(&t.to_bits()) {
            self.values(id)?[n].clone()
        } else {
            match &self.nodes[id] {
                NodeKind::Linear => linear_evolve(&self.data, t, self.disp),
                NodeKind::Sum(children) => {
                    let mut acc = FrequencyField::zero(self.lattice());
                    for &c in children {
                        self.value_in(c, t, scratch)?;
                        acc = acc.add(&scratch[&(c, t.to_bits())])?;
                    }
                    acc
                }
                NodeKind::Duhamel(children) => {
                    let prefix = self.prefix(id)?;
                    let (full, _) = self.grid.split(t);
                    self.duhamel_value(children, prefix, full, t, scratch)?
                }
            }
        };
        scratch.insert(key, v);
        Ok(())
    }

    /// Value of node `id` at time `t ∈ [0, T]`.
    pub fn value(&self, id: NodeId, t: f64) -> Result<FrequencyField> {
        if !(0.0..=self.grid.horizon()).contains(&t) {
            return Err(crate::error::invalid(format!(
                "time {t} outside [0, {}]",
                self.grid.horizon()
            )));
        }
        let mut scratch = Scratch::new();
        self.value_in(id, t, &mut scratch)?;
        Ok(scratch
            .remove(&(id, t.to_bits()))
            .expect("value was just inserted"))
    }

    /// `Ψ_φ(tree)(t)`.
    pub fn psi(&mut self, tree: &KTree, t: f64) -> Result<FrequencyField> {
        let id = self.tree_node(tree)?;
        self.value(id, t)
    }

    /// `Ξ_j(φ)(t)`.
    pub fn xi(&mut self, j: usize, t: f64) -> Result<FrequencyField> {
        let id = self.xi_node(j);
        self.value(id, t)
    }

    /// `Σ_{j ≤ J} Ξ_j(φ)(t)`.
    pub fn partial_sum(&mut self, big_j: usize, t: f64) -> Result<FrequencyField> {
        let id = self.partial_sum_node(big_j);
        self.value(id, t)
    }

    /// A time-indexed view of one node.
    pub fn node_field(&self, id: NodeId) -> NodeField<'_> {
        NodeField {
            evaluator: self,
            id,
        }
    }
}

/// Borrowed [`TimeField`] view of a node.
pub struct NodeField<'a> {
    evaluator: &'a PicardEvaluator,
    id: NodeId,
}

impl TimeField for NodeField<'_> {
    fn lattice(&self) -> Lattice {
        self.evaluator.lattice()
    }

    fn at(&self, t: f64) -> Result<FrequencyField> {
        self.evaluator.value(self.id, t)
    }
}

/// `Ψ_φ(tree)(t)` through a fresh evaluator.
pub fn evaluate_psi(
    tree: &KTree,
    phi: &PhasePair,
    t: f64,
    grid: &TimeGrid,
    disp: DispersionKind,
    truncation: Truncation,
) -> Result<FrequencyField> {
    let mut ev = PicardEvaluator::new(phi.clone(), tree.arity(), *grid, disp, truncation)?;
    ev.psi(tree, t)
}

/// `Ξ_j(φ)(t)` through a fresh evaluator.
pub fn xi_j(
    k: usize,
    j: usize,
    phi: &PhasePair,
    t: f64,
    grid: &TimeGrid,
    disp: DispersionKind,
    truncation: Truncation,
) -> Result<FrequencyField> {
    let mut ev = PicardEvaluator::new(phi.clone(), k, *grid, disp, truncation)?;
    ev.xi(j, t)
}

/// Plain nested quadrature with no memoisation: every inner integral is
/// re-evaluated by the composite rule on `[0, τ]` at each outer node. The cost
/// is exponential in the depth; it serves as the reference for the evaluator.
pub fn evaluate_psi_naive(
    node: &TreeNode,
    phi: &PhasePair,
    t: f64,
    grid: &TimeGrid,
    disp: DispersionKind,
    truncation: Truncation,
) -> Result<FrequencyField> {
    match node {
        TreeNode::Leaf => Ok(linear_evolve(phi, t, disp)),
        TreeNode::Internal(ch) => {
            let mut acc = Accumulator::default();
            for (tau, w) in grid.rule(t) {
                let mut prod: Option<FrequencyField> = None;
                for c in ch {
                    let v = evaluate_psi_naive(c, phi, tau, grid, disp, truncation)?;
                    prod = Some(match prod {
                        None => v,
                        Some(p) => p.multiply(&v, truncation)?,
                    });
                }
                add_kernel_terms(
                    &mut acc,
                    disp,
                    t,
                    tau,
                    w,
                    &prod.expect("internal nodes have children"),
                );
            }
            Ok(acc.into_field(phi.lattice()))
        }
    }
}
