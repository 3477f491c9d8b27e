//! Experiment files.
//!
//! ```toml
//! name = "ris-rules-c"
//! players = 4
//! games = 200
//! seed = 1
//!
//! [agent]
//! kind = "search"
//! variant = "ris"
//! tree = "rules"
//! backend = "random"
//! iterations = 300
//! convention = true
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ris_core::mcts::{Backend, Budget, FinalSelection, SearchConfig, TreePolicy, Variant};
use ris_core::policy::PolicyName;
use ris_core::rules::Convention;

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every seat runs the same agent.
    #[default]
    Mirror,
    /// One seat runs the agent; the others play roster policies.
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    #[default]
    Policy,
    Search,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    /// −40 for every policy but `evalFn+C`.
    #[default]
    Favoured,
    Uniform,
}

/// Search budget when a file gives neither iterations nor millis.
pub const DEFAULT_ITERATIONS: u32 = 300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSpec {
    pub kind: AgentKind,
    /// Roster policy for `kind = "policy"`.
    pub policy: String,
    /// `mo`, `ris` or `predictor`.
    pub variant: String,
    /// `full` or `rules`.
    pub tree: String,
    /// `random`, `leaf`, or a roster policy name for policy rollouts.
    pub backend: String,
    pub iterations: Option<u32>,
    pub millis: Option<f64>,
    pub exploration: f64,
    pub convention: bool,
    /// `most-visited` or `highest-value`.
    pub final_selection: String,
    pub evalfn: Option<PathBuf>,
    pub likelihood: Option<PathBuf>,
    pub prior: PriorKind,
}

impl Default for AgentSpec {
    fn default() -> Self {
        AgentSpec {
            kind: AgentKind::Policy,
            policy: "vdb".into(),
            variant: "ris".into(),
            tree: "rules".into(),
            backend: "random".into(),
            iterations: None,
            millis: None,
            exploration: 0.1,
            convention: false,
            final_selection: "most-visited".into(),
            evalfn: None,
            likelihood: None,
            prior: PriorKind::Favoured,
        }
    }
}

impl AgentSpec {
    pub fn policy(name: &str) -> Self {
        AgentSpec { kind: AgentKind::Policy, policy: name.into(), ..Self::default() }
    }

    pub fn search(variant: &str, tree: &str, backend: &str, iterations: u32, convention: bool) -> Self {
        AgentSpec {
            kind: AgentKind::Search,
            variant: variant.into(),
            tree: tree.into(),
            backend: backend.into(),
            iterations: Some(iterations),
            convention,
            ..Self::default()
        }
    }

    pub fn policy_name(&self) -> Result<PolicyName, Error> {
        Ok(self.policy.parse()?)
    }

    pub fn search_config(&self) -> Result<SearchConfig, Error> {
        let variant = match self.variant.as_str() {
            "mo" => Variant::Mo,
            "ris" => Variant::Ris,
            "predictor" => Variant::Predictor,
            v => return Err(Error::Config(format!("unknown variant {v:?}"))),
        };
        let tree_policy = match self.tree.as_str() {
            "full" => TreePolicy::FullActionSpace,
            "rules" => TreePolicy::RuleConstrained,
            t => return Err(Error::Config(format!("unknown tree policy {t:?}"))),
        };
        let backend = match self.backend.as_str() {
            "random" => Backend::RandomRollout,
            "leaf" => Backend::LeafEval,
            name => Backend::PolicyRollout(name.parse().map_err(|_| Error::Config(format!("unknown backend {name:?}")))?),
        };
        let budget = match (self.iterations, self.millis) {
            (None, None) => Budget::Iterations(DEFAULT_ITERATIONS),
            (Some(n), None) if n > 0 => Budget::Iterations(n),
            (None, Some(ms)) if ms > 0.0 => Budget::Millis(ms),
            _ => return Err(Error::Config("give at most one positive budget: iterations or millis".into())),
        };
        let final_selection = match self.final_selection.as_str() {
            "most-visited" => FinalSelection::MostVisited,
            "highest-value" => FinalSelection::HighestValue,
            f => return Err(Error::Config(format!("unknown final selection {f:?}"))),
        };
        if !(self.exploration > 0.0) {
            return Err(Error::Config("exploration must be positive".into()));
        }
        let convention = if self.convention { Convention::ON } else { Convention::OFF };
        Ok(SearchConfig { exploration: self.exploration, budget, tree_policy, backend, variant, convention, final_selection })
    }

    /// Whether this agent needs a trained evaluator.
    pub fn uses_evalfn(&self) -> bool {
        match self.kind {
            AgentKind::Policy => matches!(self.policy_name(), Ok(PolicyName::EvalFn | PolicyName::EvalFnC)),
            AgentKind::Search => {
                self.backend == "leaf" || self.backend.eq_ignore_ascii_case("evalfn") || self.backend.eq_ignore_ascii_case("evalfn+c")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub players: usize,
    pub games: usize,
    pub seed: u64,
    pub mode: Mode,
    pub agent: AgentSpec,
    /// Mixed mode: teammates are drawn uniformly from these names.
    pub teammates: Vec<String>,
    /// Worker threads; results do not depend on it.
    pub workers: usize,
    /// Per-game records are written here when set.
    pub records: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            name: "experiment".into(),
            players: 4,
            games: 100,
            seed: 1,
            mode: Mode::Mirror,
            agent: AgentSpec::default(),
            teammates: Vec::new(),
            workers: 1,
            records: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if !(2..=5).contains(&self.players) {
            return Err(Error::Config(format!("{} players", self.players)));
        }
        if self.games == 0 {
            return Err(Error::Config("no games".into()));
        }
        match self.agent.kind {
            AgentKind::Policy => {
                self.agent.policy_name()?;
            }
            AgentKind::Search => {
                self.agent.search_config()?;
            }
        }
        if self.mode == Mode::Mixed {
            if self.teammates.is_empty() {
                return Err(Error::Config("mixed mode needs teammates".into()));
            }
            for t in &self.teammates {
                t.parse::<PolicyName>()?;
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }
}
