//! Teammate identification for mixed games.
//!
//! Each teammate gets a categorical posterior over the ten roster policies.
//! After every move they make, each policy's log-likelihood grows by the log
//! probability a learned network gives to that policy having chosen the
//! move. Any single decrement is capped so one odd move cannot rule a policy
//! out.

use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::engine::{Action, EngineError, GameState, View, MAX_PLAYERS};
use crate::features::{extract_state_action, Example, Normalizer, STATE_ACTION_FEATURES};
use crate::learn::evalfn::{normalizer_text, parse_normalizer, HIDDEN_UNITS};
use crate::learn::harvest::normalized;
use crate::learn::{train, Activation, Loss, Mlp, TrainConfig};
use crate::mcts::OpponentWeights;
use crate::policy::{PolicyName, Roster, ROSTER};
use crate::rng::{derive_seed, rng_from_seed};
use crate::rules::Convention;

pub const POLICIES: usize = ROSTER.len();

/// Prior log-likelihood of every policy except the favoured one.
pub const PRIOR_LOG_LIKELIHOOD: f64 = -40.0;

/// Largest drop in log-likelihood one observation can cause: ln 10^6.
pub fn max_decrement() -> f64 {
    1e6f64.ln()
}

/// Beliefs over which roster policy one teammate is playing.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub log_likelihood: [f64; POLICIES],
}

impl Default for Posterior {
    fn default() -> Self {
        Self::prior()
    }
}

impl Posterior {
    /// Every policy at −40 except `evalFn+C`, which holds the remaining mass.
    pub fn prior() -> Self {
        let mut l = [PRIOR_LOG_LIKELIHOOD; POLICIES];
        let others = (POLICIES - 1) as f64 * PRIOR_LOG_LIKELIHOOD.exp();
        l[PolicyName::EvalFnC.index()] = (-others).ln_1p();
        Posterior { log_likelihood: l }
    }

    pub fn uniform() -> Self {
        Posterior { log_likelihood: [0.0; POLICIES] }
    }

    pub fn point_mass(policy: PolicyName) -> Self {
        let mut l = [f64::NEG_INFINITY; POLICIES];
        l[policy.index()] = 0.0;
        Posterior { log_likelihood: l }
    }

    pub fn probabilities(&self) -> [f64; POLICIES] {
        let max = self.log_likelihood.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p = self.log_likelihood.map(|l| (l - max).exp());
        let z: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= z);
        p
    }

    /// Add the log of each policy's probability of the observed move,
    /// floored at −ln 10^6.
    pub fn observe(&mut self, likelihood: &[f64; POLICIES]) {
        for (l, &p) in self.log_likelihood.iter_mut().zip(likelihood) {
            *l += p.ln().max(-max_decrement());
        }
        // Keep the numbers small; only differences matter.
        let max = self.log_likelihood.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max.is_finite() {
            self.log_likelihood.iter_mut().for_each(|l| *l -= max);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PolicyName {
        let dist = WeightedIndex::new(self.probabilities()).expect("valid distribution");
        ROSTER[dist.sample(rng)]
    }

    /// Most probable policy; the first on ties.
    pub fn top(&self) -> PolicyName {
        let p = self.probabilities();
        ROSTER[crate::learn::argmax_first(&p).expect("ten policies")]
    }
}

/// Probability of a move under each roster policy, from the 38 features of
/// the move in the mover's own view.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodNet {
    pub mlp: Mlp<f64>,
    pub normalizer: Normalizer,
}

impl LikelihoodNet {
    pub fn new(mlp: Mlp<f64>, normalizer: Normalizer) -> Result<Self, EngineError> {
        if mlp.inputs() != STATE_ACTION_FEATURES || mlp.outputs() != POLICIES || normalizer.dim() != STATE_ACTION_FEATURES {
            return Err(EngineError::Parse("likelihood net must map 38 features to 10 outputs".into()));
        }
        Ok(LikelihoodNet { mlp, normalizer })
    }

    /// Zero weights: every policy equally likely for every move.
    pub fn uniform() -> Self {
        LikelihoodNet {
            mlp: Mlp::zeros(STATE_ACTION_FEATURES, HIDDEN_UNITS, POLICIES, Activation::Relu, Activation::Softmax),
            normalizer: Normalizer::identity(STATE_ACTION_FEATURES),
        }
    }

    pub fn likelihood(&self, view: &View<'_>, action: Action) -> Result<[f64; POLICIES], EngineError> {
        let mut x = extract_state_action(view, action, Convention::OFF)?;
        self.normalizer.apply(&mut x);
        let y = self.mlp.forward(&x)?;
        let mut out = [0.0; POLICIES];
        out.copy_from_slice(&y);
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("likelihood 1\n");
        s.push_str(&normalizer_text(&self.normalizer));
        s.push_str(&self.mlp.to_text());
        s
    }

    pub fn from_text(text: &str) -> Result<Self, EngineError> {
        let mut lines = text.lines();
        if lines.next() != Some("likelihood 1") {
            return Err(EngineError::Parse("not a likelihood-net file".into()));
        }
        let normalizer = parse_normalizer(&mut lines)?;
        let mlp = Mlp::parse_lines(&mut lines)?;
        LikelihoodNet::new(mlp, normalizer)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }
}

/// One posterior per seat, updated from the real game.
#[derive(Clone, Debug)]
pub struct OpponentTracker {
    pub me: usize,
    pub posteriors: Vec<Posterior>,
}

impl OpponentTracker {
    pub fn new(players: usize, me: usize, start: Posterior) -> Self {
        OpponentTracker { me, posteriors: vec![start; players] }
    }

    /// Record `action` chosen by the player to move in `before`.
    pub fn observe(&mut self, net: &LikelihoodNet, before: &GameState, action: Action) -> Result<(), EngineError> {
        let p = before.current_player();
        if p == self.me {
            return Ok(());
        }
        let l = net.likelihood(&before.view(p), action)?;
        self.posteriors[p].observe(&l);
        Ok(())
    }

    pub fn weights(&self) -> OpponentWeights {
        let mut w = OpponentWeights::default();
        for (p, post) in self.posteriors.iter().enumerate().take(MAX_PLAYERS) {
            if p != self.me {
                w.seats[p] = Some(post.probabilities());
            }
        }
        w
    }
}

/// Labelled moves from games of 2 to 5 players where each seat plays a
/// roster policy drawn uniformly at random.
pub fn likelihood_corpus(games: usize, seed: u64, roster: &Roster) -> Vec<Example> {
    let mut out = Vec::new();
    for g in 0..games {
        let game_seed = derive_seed(seed, g as u64);
        let mut rng = rng_from_seed(derive_seed(game_seed, 1));
        let players = rng.random_range(2..=5);
        let seats: Vec<PolicyName> = (0..players).map(|_| *ROSTER.choose(&mut rng).expect("roster")).collect();
        let mut s = GameState::new(players, game_seed).expect("valid player count");
        while !s.is_terminal() {
            let p = s.current_player();
            let view = s.view(p);
            let a = roster.act(seats[p], &view, &mut rng);
            let features = extract_state_action(&view, a, Convention::OFF).expect("legal move").to_vec();
            let mut target = vec![0.0; POLICIES];
            target[seats[p].index()] = 1.0;
            out.push(Example { features, target });
            s.step(a);
        }
    }
    out
}

/// Fit the likelihood network with a softmax output and cross-entropy.
pub fn train_likelihood(examples: &[Example], cfg: &TrainConfig) -> Result<(LikelihoodNet, Vec<f64>), EngineError> {
    let (normalizer, data) = normalized(examples, STATE_ACTION_FEATURES)?;
    let mut mlp = Mlp::init(STATE_ACTION_FEATURES, HIDDEN_UNITS, POLICIES, Activation::Relu, Activation::Softmax, cfg.seed);
    let cfg = TrainConfig { loss: Loss::CrossEntropy, ..cfg.clone() };
    let curve = train(&mut mlp, &data, &cfg)?;
    Ok((LikelihoodNet::new(mlp, normalizer)?, curve))
}

/// Share of examples whose most likely policy is the labelled one.
pub fn top1_accuracy(net: &LikelihoodNet, examples: &[Example]) -> f64 {
    let hits = examples
        .iter()
        .filter(|e| {
            let mut x = e.features.clone();
            net.normalizer.apply(&mut x);
            let y = net.mlp.forward(&x).expect("fixed width");
            crate::learn::argmax_first(&y) == crate::learn::argmax_first(&e.target)
        })
        .count();
    hits as f64 / examples.len().max(1) as f64
}
