//! Hierarchical mission representation.
//!
//! A mission is a rooted tree whose leaves are actions (things a robot can
//! actually do) and whose internal nodes are tasks. Every task combines its
//! children with a quality accumulation function: `AND` needs every child,
//! `XOR` needs exactly one. Precedence pairs may be attached to any two
//! nodes; at scheduling time they are expanded to the actions underneath.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::Add;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::validation::{ValidationReport, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Quality accumulation function of a task node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qaf {
    And,
    Xor,
}

impl Qaf {
    /// Outcome of a task from the outcomes of the children taking part in it:
    /// every child for `AND`, the single chosen one for `XOR`.
    pub fn accumulate(&self, selected: &[Outcome]) -> Option<Outcome> {
        match self {
            Qaf::And => Some(selected.iter().copied().sum()),
            Qaf::Xor => match selected {
                [only] => Some(*only),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Action,
    Task,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub qaf: Option<Qaf>,
    pub children: Vec<NodeId>,
}

impl Node {
    pub fn action(id: impl Into<NodeId>) -> Self {
        Self {
            id: id.into(),
            kind: NodeKind::Action,
            qaf: None,
            children: Vec::new(),
        }
    }

    pub fn task<I, S>(id: impl Into<NodeId>, qaf: Qaf, children: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<NodeId>,
    {
        Self {
            id: id.into(),
            kind: NodeKind::Task,
            qaf: Some(qaf),
            children: children.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_action(&self) -> bool {
        self.kind == NodeKind::Action
    }
}

/// Quality, duration (seconds) and cost triple of an action or a task.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Outcome {
    pub quality: f64,
    pub duration: f64,
    pub cost: f64,
}

pub type ActionOutcome = Outcome;
pub type TaskOutcome = Outcome;

impl Outcome {
    pub const ZERO: Outcome = Outcome {
        quality: 0.0,
        duration: 0.0,
        cost: 0.0,
    };

    pub const fn new(quality: f64, duration: f64, cost: f64) -> Self {
        Self {
            quality,
            duration,
            cost,
        }
    }

    /// All components finite and nonnegative.
    pub fn is_valid(&self) -> bool {
        [self.quality, self.duration, self.cost]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }

    /// Only positive quality counts as accomplished.
    pub fn is_accomplished(&self) -> bool {
        self.quality > 0.0
    }
}

impl Add for Outcome {
    type Output = Outcome;

    fn add(self, rhs: Outcome) -> Outcome {
        Outcome::new(
            self.quality + rhs.quality,
            self.duration + rhs.duration,
            self.cost + rhs.cost,
        )
    }
}

impl std::iter::Sum for Outcome {
    fn sum<I: Iterator<Item = Outcome>>(iter: I) -> Outcome {
        iter.fold(Outcome::ZERO, Add::add)
    }
}

/// A robot's capabilities and its own estimates for each action it can do.
///
/// The capability set is exactly the key set of `outcomes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotProfile {
    pub id: String,
    pub start: Point,
    /// m/s
    pub speed: f64,
    /// W, drawn while driving between actions
    pub drive_power: f64,
    #[serde(rename = "actions")]
    pub outcomes: BTreeMap<NodeId, Outcome>,
}

impl RobotProfile {
    pub fn new(id: impl Into<String>, start: Point, speed: f64, drive_power: f64) -> Self {
        Self {
            id: id.into(),
            start,
            speed,
            drive_power,
            outcomes: BTreeMap::new(),
        }
    }

    pub fn with_action(mut self, action: impl Into<NodeId>, outcome: Outcome) -> Self {
        self.outcomes.insert(action.into(), outcome);
        self
    }

    pub fn can_perform(&self, action: &NodeId) -> bool {
        self.outcomes.contains_key(action)
    }

    pub fn outcome(&self, action: &NodeId) -> Option<&Outcome> {
        self.outcomes.get(action)
    }

    pub fn capable_actions(&self) -> impl Iterator<Item = &NodeId> {
        self.outcomes.keys()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Precedence {
    pub before: NodeId,
    pub after: NodeId,
}

impl Precedence {
    pub fn new(before: impl Into<NodeId>, after: impl Into<NodeId>) -> Self {
        Self {
            before: before.into(),
            after: after.into(),
        }
    }
}

/// The mission hierarchy. Construction does not enforce the tree invariants;
/// run [`validate_tree`] before handing a tree to the planner.
#[derive(Debug, Clone)]
pub struct MissionTree {
    root: NodeId,
    nodes: Vec<Node>,
    index: HashMap<NodeId, usize>,
    precedence: Vec<Precedence>,
}

impl MissionTree {
    pub fn new(root: impl Into<NodeId>, nodes: Vec<Node>, precedence: Vec<Precedence>) -> Self {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            index.entry(n.id.clone()).or_insert(i);
        }
        Self {
            root: root.into(),
            nodes,
            index,
            precedence,
        }
    }

    pub fn root(&self) -> &NodeId {
        &self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn precedence(&self) -> &[Precedence] {
        &self.precedence
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn get(&self, id: &NodeId) -> Result<&Node> {
        self.node(id).ok_or_else(|| Error::UnknownNode(id.clone()))
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.index.contains_key(id)
    }

    pub fn is_action(&self, id: &NodeId) -> bool {
        self.node(id).is_some_and(Node::is_action)
    }

    /// Action ids in document order.
    pub fn actions(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.iter().filter(|n| n.is_action()).map(|n| &n.id)
    }

    /// Actions in the subtree rooted at `id` (the node itself if it is an
    /// action), in depth-first child order. Tolerates malformed trees.
    pub fn actions_under(&self, id: &NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur) {
                continue;
            }
            let Some(node) = self.node(cur) else { continue };
            if node.is_action() {
                out.push(node.id.clone());
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        out
    }

    /// Number of complete decompositions of the subtree at `id`, saturating.
    pub fn decomposition_count(&self, id: &NodeId) -> u128 {
        match self.node(id) {
            None => 0,
            Some(n) if n.is_action() => 1,
            Some(n) => {
                let counts = n.children.iter().map(|c| self.decomposition_count(c));
                match n.qaf {
                    Some(Qaf::Xor) => counts.fold(0u128, |a, b| a.saturating_add(b)),
                    _ => counts.fold(1u128, |a, b| a.saturating_mul(b)),
                }
            }
        }
    }
}

/// Checks every structural and precedence invariant of the tree.
pub fn validate_tree(tree: &MissionTree) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut seen = HashSet::new();
    for n in tree.nodes() {
        if !seen.insert(&n.id) {
            report.push(ViolationKind::DuplicateId, [&n.id], "");
        }
    }

    if !tree.contains(tree.root()) {
        report.push(ViolationKind::MissingRoot, [tree.root()], "");
    }

    let mut parents: HashMap<&NodeId, Vec<&NodeId>> = HashMap::new();
    for n in tree.nodes() {
        match n.kind {
            NodeKind::Action => {
                if !n.children.is_empty() {
                    report.push(ViolationKind::ActionWithChildren, [&n.id], "");
                }
                if n.qaf.is_some() {
                    report.push(ViolationKind::ActionWithQaf, [&n.id], "");
                }
            }
            NodeKind::Task => {
                if n.children.is_empty() {
                    report.push(ViolationKind::TaskWithoutChildren, [&n.id], "");
                }
                if n.qaf.is_none() {
                    report.push(ViolationKind::TaskWithoutQaf, [&n.id], "");
                }
            }
        }
        for c in &n.children {
            if !tree.contains(c) {
                report.push(
                    ViolationKind::DanglingChild,
                    [&n.id, c],
                    format!("`{}` lists unknown child `{}`", n.id, c),
                );
            } else {
                parents.entry(c).or_default().push(&n.id);
            }
        }
    }

    for (child, ps) in &parents {
        if *child == tree.root() {
            report.push(ViolationKind::RootHasParent, [*child], "");
        } else if ps.len() > 1 {
            let mut subjects = vec![*child];
            subjects.extend(ps.iter().copied());
            report.push(ViolationKind::MultipleParents, subjects, "");
        }
    }

    if tree.contains(tree.root()) {
        let mut reached = HashSet::new();
        let mut stack = vec![tree.root()];
        while let Some(cur) = stack.pop() {
            if !reached.insert(cur) {
                continue;
            }
            if let Some(n) = tree.node(cur) {
                stack.extend(n.children.iter());
            }
        }
        for n in tree.nodes() {
            if !reached.contains(&n.id) {
                report.push(ViolationKind::Unreachable, [&n.id], "");
            }
        }
    }

    let mut precedence_ok = true;
    for p in tree.precedence() {
        let missing: Vec<_> = [&p.before, &p.after]
            .into_iter()
            .filter(|id| !tree.contains(id))
            .collect();
        if !missing.is_empty() {
            precedence_ok = false;
            report.push(
                ViolationKind::DanglingPrecedence,
                [&p.before, &p.after],
                format!("unknown: {}", join(missing)),
            );
        } else if p.before == p.after {
            precedence_ok = false;
            report.push(ViolationKind::SelfPrecedence, [&p.before], "");
        }
    }

    // Cycle analysis only makes sense on a well-formed tree.
    if report.is_empty() && precedence_ok {
        let structure = TreeIndex::build(tree);
        for p in tree.precedence() {
            if structure.is_ancestor(&p.before, &p.after) || structure.is_ancestor(&p.after, &p.before) {
                report.push(ViolationKind::OverlappingPrecedence, [&p.before, &p.after], "");
            }
        }
        if report.is_empty() {
            if let Some(cycle) = find_decomposition_cycle(tree, &structure) {
                report.push(
                    ViolationKind::CyclicPrecedence,
                    cycle.iter(),
                    "actions that can be selected together wait on each other",
                );
            }
        }
    }

    report
}

fn join<'a>(ids: impl IntoIterator<Item = &'a NodeId>) -> String {
    ids.into_iter().map(NodeId::as_str).collect::<Vec<_>>().join(", ")
}

/// Parent links and XOR branch paths of a valid tree.
struct TreeIndex<'a> {
    parent: HashMap<&'a NodeId, &'a NodeId>,
    /// For each action: every XOR ancestor and the position of the child
    /// through which the action is reached.
    xor_path: HashMap<&'a NodeId, HashMap<&'a NodeId, usize>>,
}

impl<'a> TreeIndex<'a> {
    fn build(tree: &'a MissionTree) -> Self {
        let mut parent = HashMap::new();
        for n in tree.nodes() {
            for c in &n.children {
                parent.insert(c, &n.id);
            }
        }
        let mut xor_path = HashMap::new();
        for a in tree.actions() {
            let mut path = HashMap::new();
            let mut cur = a;
            while let Some(&p) = parent.get(cur) {
                let node = tree.node(p).expect("validated parent");
                if node.qaf == Some(Qaf::Xor) {
                    let pos = node.children.iter().position(|c| c == cur).expect("child of parent");
                    path.insert(p, pos);
                }
                cur = p;
            }
            xor_path.insert(a, path);
        }
        Self { parent, xor_path }
    }

    fn is_ancestor(&self, ancestor: &NodeId, node: &NodeId) -> bool {
        let mut cur = node;
        while let Some(&p) = self.parent.get(cur) {
            if p == ancestor {
                return true;
            }
            cur = p;
        }
        false
    }

    /// Two actions can be part of the same decomposition unless some XOR
    /// ancestor reaches them through different children.
    fn compatible(&self, a: &NodeId, b: &NodeId) -> bool {
        let (pa, pb) = (&self.xor_path[a], &self.xor_path[b]);
        pa.iter().all(|(x, i)| pb.get(x).is_none_or(|j| i == j))
    }
}

/// Searches for a precedence cycle whose actions can all be selected in one
/// decomposition. Cycles that straddle mutually exclusive XOR branches are
/// vacuous and ignored.
fn find_decomposition_cycle(tree: &MissionTree, structure: &TreeIndex<'_>) -> Option<Vec<NodeId>> {
    let all: BTreeSet<NodeId> = tree.actions().cloned().collect();
    let edges = induced_action_precedence(tree, &all);
    if edges.is_empty() {
        return None;
    }

    let mut graph = DiGraph::<&NodeId, ()>::new();
    let mut ix = HashMap::new();
    for a in &all {
        ix.insert(a, graph.add_node(a));
    }
    for (a, b) in &edges {
        graph.add_edge(ix[a], ix[b], ());
    }

    for scc in tarjan_scc(&graph) {
        if scc.len() < 2 {
            continue;
        }
        let members: Vec<&NodeId> = {
            let mut m: Vec<_> = scc.iter().map(|&n| graph[n]).collect();
            m.sort();
            m
        };
        let in_scc: HashSet<&NodeId> = members.iter().copied().collect();
        let succ = |v: &NodeId| -> Vec<&NodeId> {
            let mut s: Vec<&NodeId> = graph
                .neighbors(ix[v])
                .map(|n| graph[n])
                .filter(|w| in_scc.contains(w))
                .collect();
            s.sort();
            s.dedup();
            s
        };
        // Simple-cycle search rooted at each member, visiting only larger ids
        // so every cycle is found from its smallest vertex.
        for &start in &members {
            let mut path = vec![start];
            if cycle_dfs(start, start, &mut path, &succ, structure) {
                return Some(path.into_iter().cloned().collect());
            }
        }
    }
    None
}

fn cycle_dfs<'a, F>(
    start: &'a NodeId,
    cur: &'a NodeId,
    path: &mut Vec<&'a NodeId>,
    succ: &F,
    structure: &TreeIndex<'_>,
) -> bool
where
    F: Fn(&NodeId) -> Vec<&'a NodeId>,
{
    for w in succ(cur) {
        if w == start {
            return true;
        }
        if w < start || path.contains(&w) || !path.iter().all(|p| structure.compatible(p, w)) {
            continue;
        }
        path.push(w);
        if cycle_dfs(start, w, path, succ, structure) {
            return true;
        }
        path.pop();
    }
    false
}

/// Ids of the robots able to perform `action`.
pub fn robots_for_action(tree: &MissionTree, action: &NodeId, robots: &[RobotProfile]) -> Result<BTreeSet<String>> {
    let node = tree.get(action)?;
    if !node.is_action() {
        return Err(Error::NotAnAction(action.clone()));
    }
    Ok(robots
        .iter()
        .filter(|r| r.can_perform(action))
        .map(|r| r.id.clone())
        .collect())
}

/// Combines child outcomes according to the task's accumulation function.
///
/// `AND` sums quality, duration and cost over all children (a serial
/// estimate). `XOR` returns the single chosen child's outcome.
pub fn accumulate_outcome(
    tree: &MissionTree,
    task: &NodeId,
    child_outcomes: &BTreeMap<NodeId, TaskOutcome>,
    chosen: &BTreeSet<NodeId>,
) -> Result<TaskOutcome> {
    let node = tree.get(task)?;
    if node.is_action() {
        return Err(Error::NotATask(task.clone()));
    }
    let invalid = |reason: &str| Error::InvalidChoice {
        task: task.clone(),
        reason: reason.to_owned(),
    };
    if let Some(stray) = chosen.iter().find(|c| !node.children.contains(c)) {
        return Err(invalid(&format!("`{stray}` is not a child")));
    }
    let outcome_of = |c: &NodeId| {
        child_outcomes
            .get(c)
            .copied()
            .ok_or_else(|| Error::MissingChildOutcome(c.clone()))
    };
    let qaf = node.qaf.ok_or_else(|| invalid("task has no accumulation function"))?;
    match qaf {
        Qaf::And if chosen.len() != node.children.len() => Err(invalid("AND requires every child")),
        Qaf::Xor if chosen.len() != 1 => Err(invalid("XOR requires exactly one child")),
        _ => {
            let selected = node
                .children
                .iter()
                .filter(|c| chosen.contains(*c))
                .map(outcome_of)
                .collect::<Result<Vec<_>>>()?;
            Ok(qaf.accumulate(&selected).expect("selection size checked"))
        }
    }
}

/// Expands node-level precedence to pairs of selected actions.
///
/// `prec(t1, t2)` becomes `prec(x, y)` for every selected action `x` under
/// `t1` and every selected `y` under `t2`. Pairs with an unselected endpoint
/// vanish, as do self pairs.
pub fn induced_action_precedence(tree: &MissionTree, actions: &BTreeSet<NodeId>) -> BTreeSet<(NodeId, NodeId)> {
    let mut cache: HashMap<&NodeId, Vec<NodeId>> = HashMap::new();
    let mut out = BTreeSet::new();
    for p in tree.precedence() {
        for end in [&p.before, &p.after] {
            cache.entry(end).or_insert_with(|| {
                tree.actions_under(end)
                    .into_iter()
                    .filter(|a| actions.contains(a))
                    .collect()
            });
        }
        for x in &cache[&p.before] {
            for y in &cache[&p.after] {
                if x != y {
                    out.insert((x.clone(), y.clone()));
                }
            }
        }
    }
    out
}
