//! Open-loop information-set tree search.
//!
//! One tree is shared by all players and keyed by the sequence of actions
//! taken. Each iteration samples the searching player's hand from their
//! information set and walks the tree:
//!
//! * [`Variant::Mo`] keeps that one sample for the whole iteration, so the
//!   other players' decisions are made knowing their own cards.
//! * [`Variant::Ris`] also resamples the acting player's own hand at every
//!   other player's node, and puts the real hand back after the move. Cards
//!   that became impossible meanwhile are replaced by consistent ones.
//! * [`Variant::Predictor`] builds nodes only for the searching player; the
//!   others move by policies sampled per iteration from given weights.
//!
//! Leaves are valued by a random or policy rollout to the end of the game,
//! or (with [`Backend::LeafEval`]) by expanding every child at once with
//! learned estimates as one-visit priors and backing up the best.

pub mod tree;

use std::time::{Duration, Instant};

use arrayvec::ArrayVec;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::seq::IndexedRandom;
use rand::Rng;

pub use tree::{uct_select, uct_value, Edge, Node, NodeId, Tree, ROOT};

use crate::engine::{Action, ActionList, GameState, Hand, Outcome, PlayerView, MAX_PLAYERS};
use crate::policy::{PolicyName, Roster, ROSTER};
use crate::rules::{rule_actions, Convention, ALL_RULES};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Mo,
    Ris,
    Predictor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    RandomRollout,
    PolicyRollout(PolicyName),
    LeafEval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreePolicy {
    FullActionSpace,
    RuleConstrained,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    Iterations(u32),
    Millis(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinalSelection {
    /// Most visits; ties by value, then expansion order.
    MostVisited,
    /// Highest mean value; ties by visits, then expansion order.
    HighestValue,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub exploration: f64,
    pub budget: Budget,
    pub tree_policy: TreePolicy,
    pub backend: Backend,
    pub variant: Variant,
    pub convention: Convention,
    pub final_selection: FinalSelection,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            exploration: 0.1,
            budget: Budget::Iterations(1000),
            tree_policy: TreePolicy::RuleConstrained,
            backend: Backend::RandomRollout,
            variant: Variant::Ris,
            convention: Convention::OFF,
            final_selection: FinalSelection::MostVisited,
        }
    }
}

/// Per-seat weights over the policy roster, for the predictor variant.
/// Seats with `None` (including the searcher) are not sampled.
#[derive(Clone, Debug, Default)]
pub struct OpponentWeights {
    pub seats: [Option<[f64; 10]>; MAX_PLAYERS],
}

/// A move made inside the tree, reported to an observer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeStep {
    pub iteration: u32,
    /// Edges already taken on this iteration before this move.
    pub depth: usize,
    pub player: usize,
    pub action: Action,
    pub outcome: Outcome,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub action: Action,
    pub iterations: u32,
    pub tree: Tree,
    /// Mean over iterations of the depth of the deepest node reached.
    pub decision_depth: f64,
    pub elapsed: Duration,
    /// Slots filled without honouring knowledge during this search.
    pub relaxed_fills: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeMetrics {
    pub decision_depth: f64,
    pub node_count: usize,
    pub max_depth: usize,
    pub mean_branching: f64,
}

impl SearchResult {
    pub fn metrics(&self) -> Option<TreeMetrics> {
        if self.iterations == 0 {
            return None;
        }
        let (node_count, max_depth, mean_branching) = self.tree.shape();
        Some(TreeMetrics { decision_depth: self.decision_depth, node_count, max_depth, mean_branching })
    }

    /// Root edges in expansion order.
    pub fn root_edges(&self) -> &[Edge] {
        &self.tree.root().edges
    }
}

/// Searcher with its own random stream.
pub struct Searcher<'a, R: Rng> {
    pub config: SearchConfig,
    pub roster: &'a Roster,
    pub opponents: Option<OpponentWeights>,
    rng: R,
    observer: Option<&'a mut dyn FnMut(&TreeStep)>,
}

impl<'a, R: Rng> Searcher<'a, R> {
    pub fn new(config: SearchConfig, roster: &'a Roster, rng: R) -> Self {
        Searcher { config, roster, opponents: None, rng, observer: None }
    }

    pub fn with_opponents(mut self, weights: OpponentWeights) -> Self {
        self.opponents = Some(weights);
        self
    }

    /// Replace the predictor weights between searches.
    pub fn set_opponents(&mut self, weights: OpponentWeights) {
        self.opponents = Some(weights);
    }

    pub fn with_observer(mut self, f: &'a mut dyn FnMut(&TreeStep)) -> Self {
        self.observer = Some(f);
        self
    }

    pub fn into_rng(self) -> R {
        self.rng
    }

    /// Search from the position `root` sees and return the chosen move.
    /// At least one iteration always runs.
    pub fn search(&mut self, root: &PlayerView) -> SearchResult {
        let start = Instant::now();
        let me = root.me();
        let view = root.view();
        assert!(view.current_player() == me && !view.is_terminal(), "search needs the player to move");
        let mut tree = Tree::new();
        let mut depth_sum = 0usize;
        let mut iterations = 0u32;
        let mut relaxed = 0usize;
        let deadline = match self.config.budget {
            Budget::Millis(ms) => Some(start + Duration::from_secs_f64(ms.max(0.0) / 1000.0)),
            Budget::Iterations(_) => None,
        };
        loop {
            let done = match self.config.budget {
                Budget::Iterations(n) => iterations >= n.max(1),
                Budget::Millis(_) => iterations > 0 && Instant::now() >= deadline.expect("timed"),
            };
            if done {
                break;
            }
            let (depth, r) = self.iterate(&mut tree, root, iterations);
            depth_sum += depth;
            relaxed += r;
            iterations += 1;
        }
        let root_actions = self.available(&view, me);
        let action = final_action(tree.root(), &root_actions, self.config.final_selection);
        SearchResult {
            action,
            iterations,
            tree,
            decision_depth: depth_sum as f64 / iterations as f64,
            elapsed: start.elapsed(),
            relaxed_fills: relaxed,
        }
    }

    fn available(&mut self, view: &crate::engine::View<'_>, _player: usize) -> ActionList {
        match self.config.tree_policy {
            TreePolicy::FullActionSpace => view.legal_actions(),
            TreePolicy::RuleConstrained => {
                rule_actions(view, &ALL_RULES, self.config.convention, &mut self.rng).into_iter().map(|(a, _)| a).collect()
            }
        }
    }

    /// One iteration; returns the depth reached and the relaxed-fill count.
    fn iterate(&mut self, tree: &mut Tree, root: &PlayerView, iteration: u32) -> (usize, usize) {
        let me = root.me();
        let mut state = root.determinize(&mut self.rng).expect("information set is consistent");
        let mut relaxed = 0usize;
        let predictor = self.config.variant == Variant::Predictor;
        let policies = if predictor { self.sample_policies(state.n_players(), me) } else { [None; MAX_PLAYERS] };
        let mut node = ROOT;
        let mut path: Vec<(NodeId, usize)> = Vec::with_capacity(32);
        let mut extra_depth = 0;
        let value = loop {
            if state.is_terminal() {
                break reward(&state);
            }
            let p = state.current_player();
            if predictor && p != me {
                let a = match policies[p] {
                    Some(pol) => self.roster.act(pol, &state.view(p), &mut self.rng),
                    None => *state.legal_actions().choose(&mut self.rng).expect("legal move"),
                };
                state.step(a);
                continue;
            }
            tree.node_mut(node).player.get_or_insert(p as u8);
            // After earlier fake moves the player's hints may no longer fit
            // any deal; they then keep the cards they hold.
            let saved = if self.config.variant == Variant::Ris && p != me {
                state.redeterminize_hand(p, &mut self.rng).ok()
            } else {
                None
            };
            let avail = self.available(&state.view(p), p);
            let untried: ArrayVec<Action, 64> =
                avail.iter().copied().filter(|&a| tree.edge_index(node, a).is_none()).collect();
            if !untried.is_empty() {
                if self.config.backend == Backend::LeafEval {
                    let v = self.expand_all(tree, node, &state, p, &untried, &avail);
                    if let Some(saved) = saved {
                        state.restore_hand(p, &saved, None, &mut self.rng);
                    }
                    extra_depth = 1;
                    break v;
                }
                let a = *untried.choose(&mut self.rng).expect("non-empty");
                let e = tree.add_edge(node, a);
                relaxed += self.play(&mut state, p, a, saved, path.len(), iteration);
                path.push((node, e));
                break self.rollout(&mut state, &policies);
            }
            let e = uct_select(tree.node(node), &avail, self.config.exploration).expect("available edge");
            let a = tree.node(node).edges[e].action;
            relaxed += self.play(&mut state, p, a, saved, path.len(), iteration);
            path.push((node, e));
            node = tree.node(node).edges[e].child;
        };
        tree.backpropagate(&path, value);
        (path.len() + extra_depth, relaxed)
    }

    /// Make a move inside the tree. A re-sampled hand is swapped back for
    /// the real one before the replacement card is drawn.
    fn play(&mut self, state: &mut GameState, p: usize, a: Action, saved: Option<Hand>, depth: usize, iteration: u32) -> usize {
        let mut outcome = state.resolve(a);
        let mut relaxed = 0;
        if let Some(saved) = saved {
            state.restore_hand(p, &saved, a.slot(), &mut self.rng);
            state.remove_incompatible_cards(p);
            relaxed = state.determinize_empty_slots(p, &mut self.rng);
        }
        let drew = state.end_turn(a.slot());
        outcome.set_drew(drew);
        if let Some(obs) = self.observer.as_mut() {
            obs(&TreeStep { iteration, depth, player: p, action: a, outcome });
        }
        relaxed
    }

    fn expand_all(
        &mut self,
        tree: &mut Tree,
        node: NodeId,
        state: &GameState,
        p: usize,
        untried: &[Action],
        avail: &[Action],
    ) -> f64 {
        let view = state.view(p);
        let est = self.roster.evalfn.estimate_actions(&view, untried, self.config.convention);
        for (&a, &v) in untried.iter().zip(&est) {
            tree.add_seeded_edge(node, a, v);
        }
        let n = tree.node(node);
        n.edges.iter().filter(|e| avail.contains(&e.action)).map(|e| e.value()).fold(f64::NEG_INFINITY, f64::max)
    }

    fn rollout(&mut self, state: &mut GameState, policies: &[Option<PolicyName>; MAX_PLAYERS]) -> f64 {
        while !state.is_terminal() {
            let p = state.current_player();
            let policy = match self.config.backend {
                Backend::PolicyRollout(pol) => policies[p].or(Some(pol)),
                _ => policies[p],
            };
            let a = match policy {
                Some(pol) => self.roster.act(pol, &state.view(p), &mut self.rng),
                None => *state.legal_actions().choose(&mut self.rng).expect("legal move"),
            };
            state.step(a);
        }
        reward(state)
    }

    fn sample_policies(&mut self, n: usize, me: usize) -> [Option<PolicyName>; MAX_PLAYERS] {
        let mut out = [None; MAX_PLAYERS];
        let Some(w) = self.opponents.as_ref() else { return out };
        for (p, slot) in out.iter_mut().enumerate().take(n) {
            if p == me {
                continue;
            }
            if let Some(weights) = w.seats[p] {
                if let Ok(dist) = WeightedIndex::new(weights) {
                    *slot = Some(ROSTER[dist.sample(&mut self.rng)]);
                }
            }
        }
        out
    }
}

/// Final score scaled to [0, 1].
pub fn reward(state: &GameState) -> f64 {
    state.score() as f64 / 25.0
}

fn final_action(root: &Node, available: &[Action], rule: FinalSelection) -> Action {
    let key = |e: &Edge| match rule {
        FinalSelection::MostVisited => (e.visits as f64, e.value()),
        FinalSelection::HighestValue => (e.value(), e.visits as f64),
    };
    let mut best: Option<&Edge> = None;
    for e in root.edges.iter().filter(|e| available.contains(&e.action)) {
        if best.is_none_or(|b| key(e) > key(b)) {
            best = Some(e);
        }
    }
    best.or(root.edges.first()).map(|e| e.action).unwrap_or(available[0])
}

/// Convenience wrapper: one search with a fresh searcher.
pub fn search<R: Rng>(root: &PlayerView, config: SearchConfig, roster: &Roster, rng: R) -> SearchResult {
    Searcher::new(config, roster, rng).search(root)
}
