use std::path::Path;

use rand::Rng;

use super::mlp::{Activation, Mlp, Trace};
use crate::engine::{Action, EngineError, View};
use crate::features::{
    action_block, extract_state, Normalizer, STATE_ACTION_FEATURES, STATE_FEATURES,
};
use crate::rules::{rule_actions, tag_rules, Convention, Rule, ALL_RULES};

pub const HIDDEN_UNITS: usize = 30;

/// Learned action-value estimate on the 38-feature encoding, scaled so
/// that 1 is a perfect game.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalFn {
    pub mlp: Mlp<f64>,
    pub normalizer: Normalizer,
}

impl EvalFn {
    pub fn new(mlp: Mlp<f64>, normalizer: Normalizer) -> Result<Self, EngineError> {
        if mlp.inputs() != STATE_ACTION_FEATURES || mlp.outputs() != 1 || normalizer.dim() != STATE_ACTION_FEATURES {
            return Err(EngineError::Parse("evaluator must map 38 features to one output".into()));
        }
        Ok(EvalFn { mlp, normalizer })
    }

    /// Untrained network with zero weights: every estimate is 0.
    pub fn zero() -> Self {
        EvalFn {
            mlp: Mlp::zeros(STATE_ACTION_FEATURES, HIDDEN_UNITS, 1, Activation::Relu, Activation::RectifiedTanh),
            normalizer: Normalizer::identity(STATE_ACTION_FEATURES),
        }
    }

    pub fn estimate_features(&self, raw: &[f64]) -> f64 {
        let mut x = [0.0; STATE_ACTION_FEATURES];
        x.copy_from_slice(raw);
        self.normalizer.apply(&mut x);
        let mut t = Trace::default();
        self.mlp.forward_trace(&x, &mut t).expect("fixed width");
        t.out[0]
    }

    /// Value of the position with the move block zeroed.
    pub fn estimate_state(&self, view: &View<'_>, convention: Convention) -> f64 {
        let mut x = [0.0; STATE_ACTION_FEATURES];
        x[..STATE_FEATURES].copy_from_slice(&extract_state(view, convention));
        self.estimate_features(&x)
    }

    pub fn estimate_action(&self, view: &View<'_>, action: Action, convention: Convention) -> f64 {
        self.estimate_actions(view, &[action], convention)[0]
    }

    /// Estimates for several moves of the viewer; the current-state block is
    /// computed once and shared by plays and discards.
    pub fn estimate_actions(&self, view: &View<'_>, actions: &[Action], convention: Convention) -> Vec<f64> {
        let mut here: Option<[f64; STATE_FEATURES]> = None;
        let mut x = [0.0; STATE_ACTION_FEATURES];
        actions
            .iter()
            .map(|&a| {
                if a.is_hint() {
                    let next = view.after_hint(a).expect("legal hint");
                    x[..STATE_FEATURES].copy_from_slice(&extract_state(&next.view(), convention));
                    x[STATE_FEATURES..].fill(0.0);
                } else {
                    let s = here.get_or_insert_with(|| extract_state(view, convention));
                    x[..STATE_FEATURES].copy_from_slice(s);
                    x[STATE_FEATURES..].copy_from_slice(&action_block(view, a, convention));
                }
                self.estimate_features(&x)
            })
            .collect()
    }

    /// Best-estimated move among those the rule set proposes; ties go to
    /// the earliest.
    pub fn greedy<R: Rng + ?Sized>(&self, view: &View<'_>, rules: &[Rule], convention: Convention, rng: &mut R) -> Action {
        let cands = rule_actions(view, rules, convention, rng);
        if cands.len() == 1 {
            return cands[0].0;
        }
        let acts: Vec<Action> = cands.iter().map(|(a, _)| *a).collect();
        let est = self.estimate_actions(view, &acts, convention);
        argmax_first(&est).map(|i| acts[i]).expect("rule_actions is never empty")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("evalfn 1\n");
        s.push_str(&normalizer_text(&self.normalizer));
        s.push_str(&self.mlp.to_text());
        s
    }

    pub fn from_text(text: &str) -> Result<Self, EngineError> {
        let mut lines = text.lines();
        if lines.next() != Some("evalfn 1") {
            return Err(EngineError::Parse("not an evaluator file".into()));
        }
        let normalizer = parse_normalizer(&mut lines)?;
        let mlp = Mlp::parse_lines(&mut lines)?;
        EvalFn::new(mlp, normalizer)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }
}

/// Index of the largest value; the first one on ties.
pub fn argmax_first(xs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        if best.is_none_or(|b| x > xs[b]) {
            best = Some(i);
        }
    }
    best
}

pub(crate) fn normalizer_text(n: &Normalizer) -> String {
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    format!("normalizer {}\nmean {}\nstd {}\n", n.dim(), join(&n.mean), join(&n.std))
}

pub(crate) fn parse_normalizer<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<Normalizer, EngineError> {
    let err = |m: &str| EngineError::Parse(m.to_string());
    let head = lines.next().ok_or_else(|| err("missing normalizer"))?;
    let dim: usize = head
        .strip_prefix("normalizer ")
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| err("bad normalizer line"))?;
    let mut row = |key: &str| -> Result<Vec<f64>, EngineError> {
        let line = lines.next().ok_or_else(|| err("normalizer truncated"))?;
        let rest = line.strip_prefix(key).ok_or_else(|| err("bad normalizer row"))?;
        let v: Vec<f64> =
            rest.split_whitespace().map(|t| t.parse().map_err(|_| err("bad number"))).collect::<Result<_, _>>()?;
        if v.len() != dim {
            return Err(err("normalizer width"));
        }
        Ok(v)
    };
    let mean = row("mean")?;
    let std = row("std")?;
    Ok(Normalizer { mean, std })
}

/// The other learned variant: scores each rule from the 31 state features.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleClassifier {
    pub mlp: Mlp<f64>,
    pub normalizer: Normalizer,
}

impl RuleClassifier {
    pub fn scores(&self, view: &View<'_>, convention: Convention) -> Vec<f64> {
        let mut x = extract_state(view, convention);
        self.normalizer.apply(&mut x);
        self.mlp.forward(&x).expect("fixed width")
    }

    /// Move of the highest-scoring rule among those that fire.
    pub fn act<R: Rng + ?Sized>(&self, view: &View<'_>, convention: Convention, rng: &mut R) -> Action {
        let scores = self.scores(view, convention);
        let cands = rule_actions(view, &ALL_RULES, convention, rng);
        let value = |tags| tag_rules(tags).map(|r| scores[r.index()]).fold(f64::NEG_INFINITY, f64::max);
        let vals: Vec<f64> = cands.iter().map(|&(_, t)| value(t)).collect();
        cands[argmax_first(&vals).expect("non-empty")].0
    }
}
