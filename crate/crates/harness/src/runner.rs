//! Plays the games of an experiment.
//!
//! Game `i` is dealt from `derive_seed(spec.seed, i)`, and every random
//! stream inside it is derived from that seed, so any game can be replayed
//! alone and worker count never changes results.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::Rng;

use ris_core::engine::{GameRecord, GameState};
use ris_core::learn::EvalFn;
use ris_core::mcts::{SearchConfig, Searcher, Variant};
use ris_core::opponent::{LikelihoodNet, OpponentTracker, Posterior};
use ris_core::policy::{PolicyName, Roster};
use ris_core::rng::{derive_seed, rng_from_seed, GameRng};

use crate::config::{AgentKind, AgentSpec, ExperimentSpec, Mode, PriorKind};
use crate::stats::{percentile, summarize, Summary};
use crate::{assets, Error};

/// Networks an experiment needs, loaded once and shared by all games.
#[derive(Clone, Debug)]
pub struct Resources {
    pub roster: Roster,
    pub likelihood: Arc<LikelihoodNet>,
}

impl Resources {
    /// Bundled networks unless the agent names its own files.
    pub fn load(agent: &AgentSpec) -> Result<Self, Error> {
        let evalfn = match &agent.evalfn {
            Some(path) => EvalFn::load(path)?,
            None => assets::evalfn(),
        };
        let likelihood = match &agent.likelihood {
            Some(path) => LikelihoodNet::load(path)?,
            None => assets::likelihood(),
        };
        Ok(Resources { roster: Roster::new(Arc::new(evalfn)), likelihood: Arc::new(likelihood) })
    }

    pub fn with_evalfn(evalfn: EvalFn) -> Self {
        Resources { roster: Roster::new(Arc::new(evalfn)), likelihood: Arc::new(assets::likelihood()) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameResult {
    pub index: usize,
    pub seed: u64,
    pub players: usize,
    pub score: u8,
    pub lives: u8,
    pub moves: usize,
    /// Seat of the agent under test in mixed games.
    pub agent_seat: Option<usize>,
    pub teammates: Vec<Option<PolicyName>>,
    /// Wall-clock milliseconds of each search made.
    pub search_ms: Vec<f64>,
    pub decision_depths: Vec<f64>,
    /// For each tracked teammate: (seat, true policy, most probable at the end).
    pub identified: Vec<(usize, PolicyName, PolicyName)>,
    pub record: GameRecord,
}

enum Seat<'a> {
    Policy(PolicyName),
    Search { searcher: Searcher<'a, GameRng>, tracker: Option<OpponentTracker> },
}

fn prior(kind: PriorKind) -> Posterior {
    match kind {
        PriorKind::Favoured => Posterior::prior(),
        PriorKind::Uniform => Posterior::uniform(),
    }
}

fn agent_seat<'a>(agent: &AgentSpec, cfg: Option<SearchConfig>, res: &'a Resources, players: usize, seat: usize, seed: u64) -> Result<Seat<'a>, Error> {
    Ok(match agent.kind {
        AgentKind::Policy => Seat::Policy(agent.policy_name()?),
        AgentKind::Search => {
            let cfg = cfg.expect("search config");
            let searcher = Searcher::new(cfg, &res.roster, rng_from_seed(derive_seed(seed, 100 + seat as u64)));
            let tracker = (cfg.variant == Variant::Predictor).then(|| OpponentTracker::new(players, seat, prior(agent.prior)));
            Seat::Search { searcher, tracker }
        }
    })
}

/// Play game `index` of `spec`.
pub fn play_game(spec: &ExperimentSpec, res: &Resources, index: usize) -> Result<GameResult, Error> {
    let seed = derive_seed(spec.seed, index as u64);
    let players = spec.players;
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let cfg = match spec.agent.kind {
        AgentKind::Search => Some(spec.agent.search_config()?),
        AgentKind::Policy => None,
    };
    let mut teammates = vec![None; players];
    let mut agent = None;
    let mut seats = Vec::with_capacity(players);
    match spec.mode {
        Mode::Mirror => {
            for p in 0..players {
                seats.push(agent_seat(&spec.agent, cfg, res, players, p, seed)?);
            }
        }
        Mode::Mixed => {
            let names: Vec<PolicyName> = spec.teammates.iter().map(|t| t.parse()).collect::<Result<_, _>>()?;
            let me = rng.random_range(0..players);
            agent = Some(me);
            for (p, slot) in teammates.iter_mut().enumerate() {
                if p == me {
                    seats.push(agent_seat(&spec.agent, cfg, res, players, p, seed)?);
                } else {
                    let pol = *names.choose(&mut rng).expect("validated teammates");
                    *slot = Some(pol);
                    seats.push(Seat::Policy(pol));
                }
            }
        }
    }

    let mut state = GameState::new(players, seed)?;
    let mut record = GameRecord::new(index as u64, seed, players);
    let mut search_ms = Vec::new();
    let mut decision_depths = Vec::new();
    while !state.is_terminal() {
        let p = state.current_player();
        let action = match &mut seats[p] {
            Seat::Policy(pol) => res.roster.act(*pol, &state.view(p), &mut rng),
            Seat::Search { searcher, tracker } => {
                if let Some(t) = tracker {
                    searcher.set_opponents(t.weights());
                }
                let view = state.player_view(p);
                let t0 = Instant::now();
                let r = searcher.search(&view);
                search_ms.push(t0.elapsed().as_secs_f64() * 1000.0);
                decision_depths.push(r.decision_depth);
                r.action
            }
        };
        for seat in seats.iter_mut() {
            if let Seat::Search { tracker: Some(t), .. } = seat {
                t.observe(&res.likelihood, &state, action)?;
            }
        }
        let outcome = state.step(action);
        record.push(p, action, outcome, &state);
    }

    let mut identified = Vec::new();
    for (p, seat) in seats.iter().enumerate() {
        if let Seat::Search { tracker: Some(t), .. } = seat {
            for (q, post) in t.posteriors.iter().enumerate() {
                if let (true, Some(truth)) = (q != p, teammates[q]) {
                    identified.push((q, truth, post.top()));
                }
            }
        }
    }
    Ok(GameResult {
        index,
        seed,
        players,
        score: state.score(),
        lives: state.lives(),
        moves: record.moves.len(),
        agent_seat: agent,
        teammates,
        search_ms,
        decision_depths,
        identified,
        record,
    })
}

#[derive(Clone, Debug)]
pub struct ResultSummary {
    pub name: String,
    pub summary: Summary,
    pub games: Vec<GameResult>,
}

impl ResultSummary {
    pub fn scores(&self) -> Vec<u8> {
        self.games.iter().map(|g| g.score).collect()
    }

    pub fn search_ms(&self) -> Vec<f64> {
        self.games.iter().flat_map(|g| g.search_ms.iter().copied()).collect()
    }

    pub fn mean_decision_depth(&self) -> Option<f64> {
        let d: Vec<f64> = self.games.iter().flat_map(|g| g.decision_depths.iter().copied()).collect();
        (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
    }

    /// Share of tracked teammates whose most probable policy at the end
    /// was the true one, optionally only for one true policy.
    pub fn identification_rate(&self, only: Option<PolicyName>) -> Option<f64> {
        let hits: Vec<bool> = self
            .games
            .iter()
            .flat_map(|g| g.identified.iter())
            .filter(|(_, truth, _)| only.is_none_or(|o| o == *truth))
            .map(|(_, truth, top)| truth == top)
            .collect();
        (!hits.is_empty()).then(|| hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}: {}", self.name, self.summary);
        let ms = self.search_ms();
        if !ms.is_empty() {
            let mean = ms.iter().sum::<f64>() / ms.len() as f64;
            let _ = writeln!(s, "  search ms: mean {mean:.2} p99 {:.2}", percentile(&ms, 0.99));
        }
        if let Some(d) = self.mean_decision_depth() {
            let _ = writeln!(s, "  decision depth: {d:.2}");
        }
        if let Some(r) = self.identification_rate(None) {
            let _ = writeln!(s, "  identification: {:.1}%", 100.0 * r);
        }
        let hist: Vec<String> = self.summary.histogram.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "  histogram: {}", hist.join(" "));
        s
    }
}

/// `f(0..n)` in index order, sharded round-robin over `workers` threads.
pub fn par_map<T: Send, F: Fn(usize) -> T + Sync>(n: usize, workers: usize, f: F) -> Vec<T> {
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let f = &f;
    let mut tagged: Vec<(usize, T)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| scope.spawn(move || (w..n).step_by(workers).map(|i| (i, f(i))).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    tagged.sort_by_key(|(i, _)| *i);
    tagged.into_iter().map(|(_, t)| t).collect()
}

/// Run every game of `spec` with `res`, sharded over `spec.workers` threads.
pub fn run_with(spec: &ExperimentSpec, res: &Resources) -> Result<ResultSummary, Error> {
    spec.validate()?;
    let games: Vec<GameResult> =
        par_map(spec.games, spec.workers, |i| play_game(spec, res, i)).into_iter().collect::<Result<_, _>>()?;
    if let Some(path) = &spec.records {
        let text: String = games.iter().map(|g| g.record.to_text()).collect();
        std::fs::write(path, text).map_err(|e| Error::Io(path.clone(), e))?;
    }
    let scores: Vec<u8> = games.iter().map(|g| g.score).collect();
    Ok(ResultSummary { name: spec.name.clone(), summary: summarize(&scores), games })
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultSummary, Error> {
    let res = Resources::load(&spec.agent)?;
    run_with(spec, &res)
}
