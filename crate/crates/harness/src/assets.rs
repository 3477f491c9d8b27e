//! Networks shipped with the binary.

use ris_core::learn::EvalFn;
use ris_core::opponent::LikelihoodNet;

pub const EVALFN: &str = include_str!("../assets/evalfn.txt");
pub const LIKELIHOOD: &str = include_str!("../assets/likelihood.txt");

/// The bundled state-action evaluator.
pub fn evalfn() -> EvalFn {
    EvalFn::from_text(EVALFN).expect("bundled evaluator parses")
}

/// The bundled policy-likelihood network.
pub fn likelihood() -> LikelihoodNet {
    LikelihoodNet::from_text(LIKELIHOOD).expect("bundled likelihood net parses")
}
