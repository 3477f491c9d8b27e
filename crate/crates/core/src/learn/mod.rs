//! Shallow networks, their training, and the learned evaluators built on
//! them.

pub mod evalfn;
pub mod harvest;
pub mod mlp;

pub use evalfn::{argmax_first, EvalFn, RuleClassifier, HIDDEN_UNITS};
pub use harvest::{
    harvest_q, rule_example, train_evalfn, train_rule_classifier, training_game, training_games, Generation,
    GenerationData, Record, MIN_VISITS,
};
pub use mlp::{train, Activation, Adam, Loss, Mlp, Scalar, TrainConfig, Trace};
