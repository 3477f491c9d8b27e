//! Training data from search trees, and the generation loop that turns
//! self-play search games into a new evaluator.

use rand::Rng;

use super::evalfn::{EvalFn, HIDDEN_UNITS};
use super::mlp::{train, Activation, Loss, Mlp, TrainConfig};
use crate::engine::{Action, EngineError, GameState, View};
use crate::features::{extract_state, extract_state_action, Example, Normalizer, STATE_ACTION_FEATURES, STATE_FEATURES};
use crate::learn::evalfn::RuleClassifier;
use crate::mcts::{Node, SearchConfig, Searcher, Tree};
use crate::policy::Roster;
use crate::rng::{derive_seed, rng_from_seed};
use crate::rules::{rule_actions, Convention, ALL_RULES};

/// Nodes visited fewer times than this are too noisy to learn from.
pub const MIN_VISITS: u32 = 50;

/// An example with where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub example: Example,
    pub game: u64,
    pub depth: usize,
    pub visits: u32,
}

/// One Q-example per visited edge of every node with at least
/// `min_visits` visits. The node's position is rebuilt by replaying its
/// action path on `state` (the real game at the search root), and features
/// come from the acting player's view of it. Paths that stop being legal
/// on the real deal are skipped.
pub fn harvest_q(tree: &Tree, state: &GameState, game: u64, min_visits: u32, convention: Convention) -> Vec<Record> {
    let mut out = Vec::new();
    tree.walk(|path, node| {
        if node.visits < min_visits {
            return;
        }
        let Some(here) = replay(state, path) else { return };
        if node.player.map(usize::from) != Some(here.current_player()) {
            return;
        }
        out.extend(node_examples(&here.view(here.current_player()), node, convention).into_iter().map(|example| {
            Record { example, game, depth: path.len(), visits: node.visits }
        }));
    });
    out
}

fn replay(state: &GameState, path: &[Action]) -> Option<GameState> {
    let mut s = state.clone();
    for &a in path {
        if s.is_terminal() || !s.legal_actions().contains(&a) {
            return None;
        }
        s.step(a);
    }
    (!s.is_terminal()).then_some(s)
}

fn node_examples(view: &View<'_>, node: &Node, convention: Convention) -> Vec<Example> {
    node.edges
        .iter()
        .filter(|e| e.visits > 0)
        .filter_map(|e| {
            let x = extract_state_action(view, e.action, convention).ok()?;
            Some(Example { features: x.to_vec(), target: vec![e.value()] })
        })
        .collect()
}

/// Rule-classifier example for a move actually made: the state features
/// and a multi-hot target over every rule that proposed the move. `None`
/// when no rule proposed it.
pub fn rule_example<R: Rng + ?Sized>(view: &View<'_>, chosen: Action, convention: Convention, rng: &mut R) -> Option<Example> {
    let (_, tags) = rule_actions(view, &ALL_RULES, convention, rng).into_iter().find(|&(a, _)| a == chosen)?;
    if tags == 0 {
        return None;
    }
    let target = ALL_RULES.iter().map(|r| f64::from(tags >> r.index() & 1)).collect();
    Some(Example { features: extract_state(view, convention).to_vec(), target })
}

pub(crate) fn normalized(examples: &[Example], width: usize) -> Result<(Normalizer, Vec<(Vec<f64>, Vec<f64>)>), EngineError> {
    if examples.iter().any(|e| e.features.len() != width) {
        return Err(EngineError::Parse(format!("examples must have {width} features")));
    }
    let rows: Vec<&[f64]> = examples.iter().map(|e| e.features.as_slice()).collect();
    let norm = Normalizer::fit(&rows)?;
    let data = examples
        .iter()
        .map(|e| {
            let mut x = e.features.clone();
            norm.apply(&mut x);
            (x, e.target.clone())
        })
        .collect();
    Ok((norm, data))
}

/// Fit an evaluator to Q-examples. Returns it with the per-epoch loss.
pub fn train_evalfn(examples: &[Example], cfg: &TrainConfig) -> Result<(EvalFn, Vec<f64>), EngineError> {
    let (norm, data) = normalized(examples, STATE_ACTION_FEATURES)?;
    let mut mlp = Mlp::init(STATE_ACTION_FEATURES, HIDDEN_UNITS, 1, Activation::Relu, Activation::RectifiedTanh, cfg.seed);
    // Start at the mean target so the bounded output is not stuck at zero.
    let mean = data.iter().map(|(_, y)| y[0]).sum::<f64>() / data.len() as f64;
    mlp.set_output_bias(mean.clamp(0.01, 0.99).atanh());
    let curve = train(&mut mlp, &data, cfg)?;
    Ok((EvalFn::new(mlp, norm)?, curve))
}

/// Fit the rule classifier (31 inputs, 9 outputs, cosine loss).
pub fn train_rule_classifier(examples: &[Example], cfg: &TrainConfig) -> Result<(RuleClassifier, Vec<f64>), EngineError> {
    let (normalizer, data) = normalized(examples, STATE_FEATURES)?;
    let mut mlp = Mlp::init(STATE_FEATURES, HIDDEN_UNITS, ALL_RULES.len(), Activation::Relu, Activation::RectifiedTanh, cfg.seed);
    mlp.set_output_bias(0.1);
    let cfg = TrainConfig { loss: Loss::Cosine, ..cfg.clone() };
    let curve = train(&mut mlp, &data, &cfg)?;
    Ok((RuleClassifier { mlp, normalizer }, curve))
}

/// Self-play search games that produce training data.
#[derive(Clone, Debug)]
pub struct Generation {
    pub games: usize,
    /// Player count for game `i` is `players[i % players.len()]`.
    pub players: Vec<usize>,
    pub search: SearchConfig,
    pub min_visits: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, Default)]
pub struct GenerationData {
    pub records: Vec<Record>,
    pub scores: Vec<u8>,
}

impl GenerationData {
    pub fn mean_score(&self) -> f64 {
        self.scores.iter().map(|&s| f64::from(s)).sum::<f64>() / self.scores.len().max(1) as f64
    }

    pub fn examples(&self) -> Vec<Example> {
        self.records.iter().map(|r| r.example.clone()).collect()
    }
}

/// Play one training game: every seat searches with `gen.search`, and every
/// search tree is harvested.
pub fn training_game(gen: &Generation, roster: &Roster, index: usize) -> (Vec<Record>, u8) {
    let seed = derive_seed(gen.seed, index as u64);
    let players = gen.players[index % gen.players.len()];
    let mut state = GameState::new(players, seed).expect("valid player count");
    let mut searcher = Searcher::new(gen.search, roster, rng_from_seed(derive_seed(seed, 1)));
    let mut records = Vec::new();
    while !state.is_terminal() {
        let me = state.current_player();
        let result = searcher.search(&state.player_view(me));
        records.extend(harvest_q(&result.tree, &state, index as u64, gen.min_visits, gen.search.convention));
        state.step(result.action);
    }
    (records, state.score())
}

pub fn training_games(gen: &Generation, roster: &Roster) -> GenerationData {
    let mut data = GenerationData::default();
    for i in 0..gen.games {
        let (records, score) = training_game(gen, roster, i);
        data.records.extend(records);
        data.scores.push(score);
    }
    data
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcts::{Budget, ROOT};

    #[test]
    fn only_busy_nodes_are_harvested() {
        let s = GameState::new(4, 5).unwrap();
        let mut t = Tree::new();
        t.node_mut(ROOT).player = Some(0);
        let actions = rule_actions(&s.view(0), &ALL_RULES, Convention::OFF, &mut rng_from_seed(0));
        for &(a, _) in &actions {
            let e = t.add_edge(ROOT, a);
            for _ in 0..10 {
                t.backpropagate(&[(ROOT, e)], 0.5);
            }
        }
        let n = actions.len() as u32 * 10;
        assert_eq!(harvest_q(&t, &s, 0, n, Convention::OFF).len(), actions.len());
        assert!(harvest_q(&t, &s, 0, n + 1, Convention::OFF).is_empty());
    }

    #[test]
    fn tiny_generation_trains() {
        let gen = Generation {
            games: 1,
            players: vec![3],
            search: SearchConfig { budget: Budget::Iterations(200), ..SearchConfig::default() },
            min_visits: MIN_VISITS,
            seed: 1,
        };
        let data = training_games(&gen, &Roster::untrained());
        assert!(!data.records.is_empty());
        assert!(data.records.iter().all(|r| r.visits >= MIN_VISITS));
        let cfg = TrainConfig { epochs: 2, ..TrainConfig::default() };
        let (f, curve) = train_evalfn(&data.examples(), &cfg).unwrap();
        assert_eq!(curve.len(), 2);
        let s = GameState::new(3, 9).unwrap();
        let v = f.estimate_state(&s.view(0), Convention::OFF);
        assert!((0.0..1.0).contains(&v));
    }
}
