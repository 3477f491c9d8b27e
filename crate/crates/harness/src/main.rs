use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ris_core::engine::GameState;
use ris_core::features::{feature_names, read_dataset, write_dataset};
use ris_core::learn::EvalFn;
use ris_core::mcts::Searcher;
use ris_core::rng::{derive_seed, rng_from_seed};
use ris_harness::calibrate::{calibrate, Calibration};
use ris_harness::tables::{reproduce_table, Scale, TableId, TableOptions};
use ris_harness::train::{train_generation, train_likelihood_net, GenerationSpec, LikelihoodSpec};
use ris_harness::{assets, output_dir, run_experiment, AgentSpec, Error, ExperimentSpec, Resources};

#[derive(Parser)]
#[command(name = "ris", about = "Hanabi search agents and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and print the transcript.
    Play {
        #[arg(long, default_value_t = 4)]
        players: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Agent spec file (the `[agent]` table of an experiment); defaults to a 300-iteration RIS+C search.
        #[arg(long)]
        agent: Option<PathBuf>,
    },
    /// Run an experiment file.
    Experiment {
        spec: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Rerun a published table: I, III, SOA or V.
    ReproduceTable {
        table: String,
        #[arg(long, default_value = "desk")]
        scale: String,
        #[arg(long)]
        games: Option<usize>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Train one generation of the evaluator from self-play search games.
    TrainEvalfn {
        #[arg(long, default_value_t = 50)]
        games: usize,
        /// Player counts, cycled over games.
        #[arg(long, value_delimiter = ',', default_value = "5")]
        players: Vec<usize>,
        #[arg(long, default_value_t = 3000)]
        iterations: u32,
        #[arg(long, default_value_t = 0.1)]
        exploration: f64,
        /// Previous generation; its greedy policy drives the rollouts.
        #[arg(long)]
        previous: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        /// Raise the epoch count until training makes this many updates.
        #[arg(long, default_value_t = 0)]
        min_updates: usize,
        #[arg(long, default_value_t = 200)]
        eval_games: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Example files from earlier runs to fit together with this generation's games.
        #[arg(long)]
        data: Vec<PathBuf>,
        /// Write this generation's harvested examples here.
        #[arg(long)]
        save_data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the policy-likelihood network used to identify teammates.
    TrainLikelihood {
        #[arg(long, default_value_t = 1000)]
        games: usize,
        #[arg(long, default_value_t = 200)]
        holdout: usize,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Evaluator behind the two learned roster policies; bundled by default.
        #[arg(long)]
        evalfn: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure iterations per wall-clock budget on this host.
    Calibrate {
        /// Target budgets in milliseconds.
        #[arg(long, value_delimiter = ',', default_value = "30,100")]
        target_ms: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        players: usize,
        #[arg(long, default_value_t = 20)]
        positions: usize,
        #[arg(long, default_value_t = 500)]
        probe: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_path(given: Option<PathBuf>, name: &str) -> Result<PathBuf, Error> {
    match given {
        Some(p) => Ok(p),
        None => {
            let dir = output_dir();
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io(dir.clone(), e))?;
            Ok(dir.join(name))
        }
    }
}

fn play(players: usize, seed: u64, agent: Option<PathBuf>) -> Result<(), Error> {
    let agent = match agent {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(path.clone(), e))?;
            toml::from_str::<AgentSpec>(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        None => AgentSpec::search("ris", "rules", "random", 300, true),
    };
    let spec = ExperimentSpec { players, games: 1, seed, agent: agent.clone(), ..ExperimentSpec::default() };
    spec.validate()?;
    let res = Resources::load(&agent)?;
    let mut state = GameState::new(players, derive_seed(seed, 0))?;
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let mut searcher = match agent.kind {
        ris_harness::AgentKind::Search => Some(Searcher::new(agent.search_config()?, &res.roster, rng_from_seed(derive_seed(seed, 2)))),
        ris_harness::AgentKind::Policy => None,
    };
    while !state.is_terminal() {
        let p = state.current_player();
        let action = match &mut searcher {
            Some(s) => s.search(&state.player_view(p)).action,
            None => res.roster.act(agent.policy_name()?, &state.view(p), &mut rng),
        };
        let outcome = state.step(action);
        println!("P{p}: {action}  {outcome}  [score {} hints {} lives {}]", state.score(), state.hints(), state.lives());
    }
    println!("final score {}", state.score());
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Play { players, seed, agent } => play(players, seed, agent)?,
        Command::Experiment { spec, workers } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            if let Some(w) = workers {
                spec.workers = w;
            }
            print!("{}", run_experiment(&spec)?.report());
        }
        Command::ReproduceTable { table, scale, games, workers, seed } => {
            let id: TableId = table.parse()?;
            let opts = TableOptions { scale: scale.parse::<Scale>()?, games, workers, seed };
            let res = Resources::load(&AgentSpec::default())?;
            let report = reproduce_table(id, &opts, &res)?;
            print!("{report}");
            return Ok(report.passed());
        }
        Command::TrainEvalfn {
            games,
            players,
            iterations,
            exploration,
            previous,
            epochs,
            min_updates,
            eval_games,
            seed,
            workers,
            data,
            save_data,
            out,
        } => {
            let previous = previous.map(|p| EvalFn::load(&p)).transpose()?;
            let mut extra = Vec::new();
            for path in &data {
                let file = std::fs::File::open(path).map_err(|e| Error::Io(path.clone(), e))?;
                extra.extend(read_dataset(std::io::BufReader::new(file))?.1);
            }
            let spec = GenerationSpec { games, players, iterations, exploration, previous, epochs, seed, workers, eval_games, extra, min_updates };
            let out = out_path(out, "evalfn.txt")?;
            let outcome = train_generation(&spec, &mut |l| eprintln!("{l}"))?;
            outcome.evalfn.save(&out).map_err(|e| Error::Io(out.clone(), e))?;
            if let Some(path) = save_data {
                let file = std::fs::File::create(&path).map_err(|e| Error::Io(path.clone(), e))?;
                let mut w = std::io::BufWriter::new(file);
                write_dataset(&mut w, &feature_names(true), &outcome.data.examples()).map_err(|e| Error::Io(path.clone(), e))?;
            }
            println!("training games {:.2}", outcome.data.mean_score());
            for (p, m) in outcome.greedy {
                println!("greedy {p}p {m:.2}");
            }
        }
        Command::TrainLikelihood { games, holdout, epochs, seed, evalfn, out } => {
            let evalfn = match evalfn {
                Some(p) => EvalFn::load(&p)?,
                None => assets::evalfn(),
            };
            let out = out_path(out, "likelihood.txt")?;
            let (net, acc) = train_likelihood_net(&LikelihoodSpec { games, holdout, epochs, seed }, &evalfn, &mut |l| eprintln!("{l}"))?;
            net.save(&out).map_err(|e| Error::Io(out.clone(), e))?;
            println!("held-out per-move top-1 {acc:.3}");
        }
        Command::Calibrate { target_ms, players, positions, probe, out } => {
            let res = Resources::load(&AgentSpec::default())?;
            let mut cal = Calibration::default();
            let configs = [
                ("mo-full-random", AgentSpec::search("mo", "full", "random", 1, false)),
                ("ris-full-random", AgentSpec::search("ris", "full", "random", 1, false)),
                ("ris-rules-random", AgentSpec::search("ris", "rules", "random", 1, false)),
                ("ris-rules-random-c", AgentSpec::search("ris", "rules", "random", 1, true)),
                ("ris-rules-leaf-c", AgentSpec::search("ris", "rules", "leaf", 1, true)),
            ];
            for (label, agent) in configs {
                let e = calibrate(&agent, &res.roster, label, players, positions, probe, 1)?;
                let budgets: Vec<String> = target_ms.iter().map(|&ms| format!("{ms}ms={}", e.iterations(ms))).collect();
                println!("{label}: {:.2} us/iteration  {}", e.micros_per_iteration, budgets.join(" "));
                cal.insert(e);
            }
            let out = out_path(out, "calibration.toml")?;
            cal.save(&out)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
