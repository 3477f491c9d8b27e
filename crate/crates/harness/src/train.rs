//! Training pipelines behind `train-evalfn` and `train-likelihood`.

use std::sync::Arc;
use std::time::Instant;

use ris_core::features::Example;
use ris_core::learn::{train_evalfn, training_game, EvalFn, Generation, GenerationData, TrainConfig, MIN_VISITS};
use ris_core::mcts::{Backend, Budget, SearchConfig};
use ris_core::opponent::{likelihood_corpus, top1_accuracy, train_likelihood, LikelihoodNet};
use ris_core::policy::{PolicyName, Roster};
use ris_core::rules::Convention;

use crate::config::{AgentSpec, ExperimentSpec};
use crate::runner::{par_map, run_with, Resources};
use crate::Error;

/// One generation of the evaluator: self-play search games, then a fit.
#[derive(Clone, Debug)]
pub struct GenerationSpec {
    pub games: usize,
    pub players: Vec<usize>,
    pub iterations: u32,
    pub exploration: f64,
    /// Roll out with the previous evaluator's greedy policy instead of
    /// uniformly random moves.
    pub previous: Option<EvalFn>,
    pub epochs: usize,
    pub seed: u64,
    pub workers: usize,
    /// Greedy-policy evaluation games per player count after training.
    pub eval_games: usize,
    /// Examples from earlier runs, fitted together with this generation's.
    pub extra: Vec<Example>,
    /// Epochs are raised until training makes at least this many updates.
    pub min_updates: usize,
}

impl Default for GenerationSpec {
    fn default() -> Self {
        GenerationSpec {
            games: 50,
            players: vec![5],
            iterations: 3000,
            exploration: 0.1,
            previous: None,
            epochs: 20,
            seed: 1,
            workers: 1,
            eval_games: 200,
            extra: Vec::new(),
            min_updates: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenerationOutcome {
    pub evalfn: EvalFn,
    pub data: GenerationData,
    pub epochs: usize,
    pub loss_curve: Vec<f64>,
    /// (players, greedy `evalFn+C` mean) per evaluated player count.
    pub greedy: Vec<(usize, f64)>,
}

impl GenerationSpec {
    pub fn search(&self) -> SearchConfig {
        let backend = match self.previous {
            Some(_) => Backend::PolicyRollout(PolicyName::EvalFnC),
            None => Backend::RandomRollout,
        };
        SearchConfig {
            budget: Budget::Iterations(self.iterations),
            exploration: self.exploration,
            convention: Convention::ON,
            backend,
            ..SearchConfig::default()
        }
    }
}

/// Play, harvest, fit and evaluate one generation. `log` receives progress lines.
pub fn train_generation(spec: &GenerationSpec, log: &mut dyn FnMut(&str)) -> Result<GenerationOutcome, Error> {
    if spec.games + spec.extra.len() == 0 || spec.players.iter().any(|p| !(2..=5).contains(p)) || spec.players.is_empty() {
        return Err(Error::Config("generation needs games or data, and player counts in 2..=5".into()));
    }
    let roster = Roster::new(Arc::new(spec.previous.clone().unwrap_or_else(EvalFn::zero)));
    let gen = Generation { games: spec.games, players: spec.players.clone(), search: spec.search(), min_visits: MIN_VISITS, seed: spec.seed };
    let t0 = Instant::now();
    let games = par_map(spec.games, spec.workers, |i| training_game(&gen, &roster, i));
    let mut data = GenerationData::default();
    for (records, score) in games {
        data.records.extend(records);
        data.scores.push(score);
    }
    log(&format!(
        "{} games, mean {:.2}, {} records, {:.0}s",
        spec.games,
        data.mean_score(),
        data.records.len(),
        t0.elapsed().as_secs_f64()
    ));
    let mut examples = data.examples();
    examples.extend(spec.extra.iter().cloned());
    let mut cfg = TrainConfig { epochs: spec.epochs, seed: spec.seed, ..TrainConfig::default() };
    let per_epoch = examples.len().div_ceil(cfg.batch_size).max(1);
    cfg.epochs = cfg.epochs.max(spec.min_updates.div_ceil(per_epoch));
    let (evalfn, loss_curve) = train_evalfn(&examples, &cfg)?;
    log(&format!(
        "{} examples, {} epochs, loss {:.6} -> {:.6}",
        examples.len(),
        cfg.epochs,
        loss_curve.first().unwrap_or(&f64::NAN),
        loss_curve.last().unwrap_or(&f64::NAN)
    ));
    let greedy = greedy_means(&evalfn, &spec.players, spec.eval_games, spec.seed ^ 0x9e37, spec.workers)?;
    for (p, m) in &greedy {
        log(&format!("greedy {p}p: {m:.2}"));
    }
    Ok(GenerationOutcome { evalfn, data, epochs: cfg.epochs, loss_curve, greedy })
}

/// Mean score of the greedy `evalFn+C` policy in mirror games.
pub fn greedy_means(evalfn: &EvalFn, players: &[usize], games: usize, seed: u64, workers: usize) -> Result<Vec<(usize, f64)>, Error> {
    let res = Resources::with_evalfn(evalfn.clone());
    let mut counts = players.to_vec();
    counts.sort_unstable();
    counts.dedup();
    let mut out = Vec::new();
    for p in counts {
        if games == 0 {
            break;
        }
        let spec = ExperimentSpec { players: p, games, seed, workers, agent: AgentSpec::policy("evalFn+C"), ..ExperimentSpec::default() };
        out.push((p, run_with(&spec, &res)?.summary.mean));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct LikelihoodSpec {
    pub games: usize,
    /// Games held out for the accuracy report.
    pub holdout: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LikelihoodSpec {
    fn default() -> Self {
        LikelihoodSpec { games: 2000, holdout: 200, epochs: 10, seed: 1 }
    }
}

/// Fit the policy-likelihood network on games where every seat plays a
/// random roster policy. Returns the net and its per-move held-out top-1
/// accuracy.
pub fn train_likelihood_net(spec: &LikelihoodSpec, evalfn: &EvalFn, log: &mut dyn FnMut(&str)) -> Result<(LikelihoodNet, f64), Error> {
    let roster = Roster::new(Arc::new(evalfn.clone()));
    let train = likelihood_corpus(spec.games, spec.seed, &roster);
    let test = likelihood_corpus(spec.holdout, spec.seed ^ 0x5bd1, &roster);
    log(&format!("{} training moves, {} held out", train.len(), test.len()));
    let cfg = TrainConfig { epochs: spec.epochs, seed: spec.seed, learning_rate: 1e-3, batch_size: 64, ..TrainConfig::default() };
    let (net, curve) = train_likelihood(&train, &cfg)?;
    let acc = top1_accuracy(&net, &test);
    log(&format!("loss {:.4} -> {:.4}, held-out top-1 {:.3}", curve.first().unwrap_or(&f64::NAN), curve.last().unwrap_or(&f64::NAN), acc));
    Ok((net, acc))
}
