//! The ten named teammate policies: eight fixed cascades plus two greedy
//! players driven by a learned evaluator.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::engine::{Action, EngineError, View};
use crate::learn::EvalFn;
use crate::rules::policies::Baseline;
use crate::rules::{Convention, ALL_RULES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyName {
    Random,
    Cautious,
    Iggi,
    Flawed,
    Piers,
    Risky,
    Outer,
    VanDenBergh,
    EvalFn,
    EvalFnC,
}

pub const ROSTER: [PolicyName; 10] = [
    PolicyName::Random,
    PolicyName::Cautious,
    PolicyName::Iggi,
    PolicyName::Flawed,
    PolicyName::Piers,
    PolicyName::Risky,
    PolicyName::Outer,
    PolicyName::VanDenBergh,
    PolicyName::EvalFn,
    PolicyName::EvalFnC,
];

impl PolicyName {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyName::EvalFn => "evalFn",
            PolicyName::EvalFnC => "evalFn+C",
            other => other.baseline().expect("fixed policy").name(),
        }
    }

    pub fn baseline(self) -> Option<Baseline> {
        Some(match self {
            PolicyName::Random => Baseline::Random,
            PolicyName::Cautious => Baseline::Cautious,
            PolicyName::Iggi => Baseline::Iggi,
            PolicyName::Flawed => Baseline::Flawed,
            PolicyName::Piers => Baseline::Piers,
            PolicyName::Risky => Baseline::Risky,
            PolicyName::Outer => Baseline::Outer,
            PolicyName::VanDenBergh => Baseline::VanDenBergh,
            PolicyName::EvalFn | PolicyName::EvalFnC => return None,
        })
    }
}

impl fmt::Display for PolicyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyName {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ROSTER
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| EngineError::Parse(format!("unknown policy {s:?}")))
    }
}

/// Runs any roster policy. The learned ones share one evaluator.
#[derive(Clone, Debug)]
pub struct Roster {
    pub evalfn: Arc<EvalFn>,
}

impl Roster {
    pub fn new(evalfn: Arc<EvalFn>) -> Self {
        Roster { evalfn }
    }

    /// Roster whose learned policies use an untrained evaluator (they then
    /// take the first rule action).
    pub fn untrained() -> Self {
        Roster { evalfn: Arc::new(EvalFn::zero()) }
    }

    pub fn act<R: Rng + ?Sized>(&self, policy: PolicyName, view: &View<'_>, rng: &mut R) -> Action {
        match policy {
            PolicyName::EvalFn => self.evalfn.greedy(view, &ALL_RULES, Convention::OFF, rng),
            PolicyName::EvalFnC => self.evalfn.greedy(view, &ALL_RULES, Convention::ON, rng),
            other => other.baseline().expect("fixed policy").act(view, rng),
        }
    }
}
