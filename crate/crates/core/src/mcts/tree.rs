use std::fmt::Write as _;

use crate::engine::Action;

pub type NodeId = u32;
pub const ROOT: NodeId = 0;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub action: Action,
    pub visits: u32,
    pub total: f64,
    pub child: NodeId,
}

impl Edge {
    /// Mean reward; 0 for an unvisited edge.
    pub fn value(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total / self.visits as f64
        }
    }
}

/// A decision point reached by a fixed sequence of actions. Card draws do
/// not split nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    /// Player to act here; `None` until first reached.
    pub player: Option<u8>,
    pub visits: u32,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Default for Tree {
    fn default() -> Self {
        Self::new()
    }
}

impl Tree {
    pub fn new() -> Self {
        Tree { nodes: vec![Node { player: None, visits: 0, edges: Vec::new() }] }
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &Node {
        self.node(ROOT)
    }

    pub fn edge_index(&self, id: NodeId, action: Action) -> Option<usize> {
        self.node(id).edges.iter().position(|e| e.action == action)
    }

    /// Add an edge with a fresh child; returns its index.
    pub fn add_edge(&mut self, id: NodeId, action: Action) -> usize {
        debug_assert!(self.edge_index(id, action).is_none());
        let child = self.nodes.len() as NodeId;
        self.nodes.push(Node { player: None, visits: 0, edges: Vec::new() });
        let edges = &mut self.nodes[id as usize].edges;
        edges.push(Edge { action, visits: 0, total: 0.0, child });
        edges.len() - 1
    }

    /// Add an edge pre-seeded with one visit at `prior`.
    pub fn add_seeded_edge(&mut self, id: NodeId, action: Action, prior: f64) -> usize {
        let e = self.add_edge(id, action);
        let node = self.node_mut(id);
        node.edges[e].visits = 1;
        node.edges[e].total = prior;
        node.visits += 1;
        e
    }

    /// Add `value` to every edge on `path` and to the visit count of the
    /// node each edge leaves.
    pub fn backpropagate(&mut self, path: &[(NodeId, usize)], value: f64) {
        for &(id, e) in path {
            let node = self.node_mut(id);
            node.visits += 1;
            node.edges[e].visits += 1;
            node.edges[e].total += value;
        }
    }

    /// Every reached node with the action path leading to it, depth first.
    pub fn walk(&self, mut f: impl FnMut(&[Action], &Node)) {
        let mut path = Vec::new();
        self.walk_from(ROOT, &mut path, &mut f);
    }

    fn walk_from(&self, id: NodeId, path: &mut Vec<Action>, f: &mut impl FnMut(&[Action], &Node)) {
        let node = self.node(id);
        if node.player.is_none() && node.visits == 0 {
            return;
        }
        f(path, node);
        for e in &node.edges {
            path.push(e.action);
            self.walk_from(e.child, path, f);
            path.pop();
        }
    }

    /// Node count, depth of the deepest edge and mean branching over
    /// expanded nodes.
    pub fn shape(&self) -> (usize, usize, f64) {
        let mut count = 0;
        let mut deepest = 0;
        let mut expanded = 0usize;
        let mut edges = 0usize;
        self.walk(|path, node| {
            count += 1;
            if !node.edges.is_empty() {
                deepest = deepest.max(path.len() + 1);
                expanded += 1;
                edges += node.edges.len();
            }
        });
        let branching = if expanded == 0 { 0.0 } else { edges as f64 / expanded as f64 };
        (count, deepest, branching)
    }

    /// One line per reached node:
    /// `path=<a>/<a> player=P N=n edges=<a>:<n>:<V>,...` (root path `-`).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.walk(|path, node| {
            let p = if path.is_empty() {
                "-".to_string()
            } else {
                path.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("/")
            };
            let player = node.player.map_or("?".to_string(), |p| p.to_string());
            let edges: Vec<String> =
                node.edges.iter().map(|e| format!("{}:{}:{:.6}", e.action, e.visits, e.value())).collect();
            let _ = writeln!(out, "path={p} player={player} N={} edges={}", node.visits, edges.join(","));
        });
        out
    }
}

/// Upper-confidence score of an edge under a parent with `parent_visits`.
pub fn uct_value(edge_value: f64, edge_visits: u32, parent_visits: u32, c: f64) -> f64 {
    edge_value + c * ((parent_visits as f64).ln() / edge_visits as f64).sqrt()
}

/// Best edge by UCT among those whose action is in `available`; ties go to
/// the earliest edge. Every available action must already have an edge.
pub fn uct_select(node: &Node, available: &[Action], c: f64) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, e) in node.edges.iter().enumerate() {
        if !available.contains(&e.action) {
            continue;
        }
        let j = if e.visits == 0 { f64::INFINITY } else { uct_value(e.value(), e.visits, node.visits, c) };
        if best.is_none_or(|(b, _)| j > b) {
            best = Some((j, i));
        }
    }
    best.map(|(_, i)| i)
}
