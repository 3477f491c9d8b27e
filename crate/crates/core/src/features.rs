//! Fixed-length encodings of positions and moves for the learned evaluators.
//!
//! A state vector has 11 core features followed by 4 features for each of up
//! to 5 players, starting with the viewer and continuing in turn order.
//! Absent seats are zero. A state-action vector appends 7 move features.
//!
//! Everything is computed from a [`View`], so two states in the same
//! information set encode identically.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::engine::{Action, Card, Distribution, EngineError, TableMasks, View, COLOURS, MAX_PLAYERS};
use crate::rules::{Convention, HandBeliefs};

pub const CORE_FEATURES: usize = 11;
pub const PLAYER_FEATURES: usize = 4;
pub const STATE_FEATURES: usize = CORE_FEATURES + PLAYER_FEATURES * MAX_PLAYERS;
pub const ACTION_FEATURES: usize = 7;
pub const STATE_ACTION_FEATURES: usize = STATE_FEATURES + ACTION_FEATURES;

pub type StateFeatures = [f64; STATE_FEATURES];
pub type StateActionFeatures = [f64; STATE_ACTION_FEATURES];

/// Canonical order of the core block. The last entry is not in the
/// published feature table; it fills the eleventh input the network needs.
pub const CORE_NAMES: [&str; CORE_FEATURES] = [
    "Score",
    "Information",
    "Lives",
    "Deck",
    "MovesLeft",
    "UnavailablePoints",
    "FivesOnTable",
    "FoursOnTable",
    "ThreesOnTable",
    "TwosOnTable",
    "OnesOnTable",
];

pub const PLAYER_NAMES: [&str; PLAYER_FEATURES] =
    ["MaxPlayableProb", "MaxDiscardableProb", "MaxPlayablePlusOneProb", "PlayerInfo"];

pub const ACTION_NAMES: [&str; ACTION_FEATURES] = [
    "Play",
    "PlayableProb",
    "PlayCompleteProb",
    "Discard",
    "DiscardableProb",
    "LastUsefulProb",
    "PointsForegone",
];

/// Column names of a state-action vector in canonical order.
pub fn feature_names(with_action: bool) -> Vec<String> {
    let mut out: Vec<String> = CORE_NAMES.iter().map(|s| s.to_string()).collect();
    for p in 0..MAX_PLAYERS {
        out.extend(PLAYER_NAMES.iter().map(|n| format!("P{p}{n}")));
    }
    if with_action {
        out.extend(ACTION_NAMES.iter().map(|s| s.to_string()));
    }
    out
}

pub fn extract_state(view: &View<'_>, convention: Convention) -> StateFeatures {
    let mut f = [0.0; STATE_FEATURES];
    let masks = TableMasks::from_view(view);
    let tableau = view.tableau();
    f[0] = view.score() as f64;
    f[1] = view.hints() as f64;
    f[2] = view.lives() as f64;
    f[3] = view.deck_len() as f64;
    f[4] = if view.deck_len() > 0 {
        (view.n_players() + 1) as f64
    } else {
        view.final_turns().unwrap_or(0) as f64
    };
    f[5] = masks.unavailable_points() as f64;
    for (k, value) in (1..=5u8).rev().enumerate() {
        f[6 + k] = tableau.iter().filter(|&&t| t >= value).count() as f64;
    }
    for offset in 0..view.n_players() {
        let p = view.seat_after(offset);
        let b = HandBeliefs::compute(view, p, convention, &masks);
        let base = CORE_FEATURES + offset * PLAYER_FEATURES;
        f[base] = b.max_of(&b.playable);
        f[base + 1] = b.max_of(&b.discardable);
        f[base + 2] = b.max_of(&b.plus_one);
        f[base + 3] = view
            .occupied_slots(p)
            .map(|s| view.knowledge(p, s).map_or(0, |k| k.positive_info()) as f64)
            .sum();
    }
    f
}

/// Features of `action` taken by the viewer. Hints are rolled forward and
/// leave the action block at zero; plays and discards keep the current
/// state block and describe the card.
pub fn extract_state_action(
    view: &View<'_>,
    action: Action,
    convention: Convention,
) -> Result<StateActionFeatures, EngineError> {
    if !view.is_legal(action) {
        return Err(EngineError::IllegalAction(action));
    }
    let mut out = [0.0; STATE_ACTION_FEATURES];
    if action.is_hint() {
        let next = view.after_hint(action)?;
        out[..STATE_FEATURES].copy_from_slice(&extract_state(&next.view(), convention));
    } else {
        out[..STATE_FEATURES].copy_from_slice(&extract_state(view, convention));
        out[STATE_FEATURES..].copy_from_slice(&action_block(view, action, convention));
    }
    Ok(out)
}

/// The seven move features alone. Zero for hints.
pub fn action_block(view: &View<'_>, action: Action, convention: Convention) -> [f64; ACTION_FEATURES] {
    let mut a = [0.0; ACTION_FEATURES];
    let Some(slot) = action.slot() else { return a };
    let masks = TableMasks::from_view(view);
    let me = view.me();
    let Some((d, _)) = crate::rules::slot_belief(view, me, slot as usize, convention, &masks) else {
        return a;
    };
    match action {
        Action::Play(_) => {
            a[0] = 1.0;
            a[1] = d.probability(masks.playable);
            a[2] = d.probability(masks.playable & fives_mask());
        }
        Action::Discard(_) => {
            a[3] = 1.0;
            a[4] = d.probability(masks.discardable);
            let discard = view.discard();
            a[5] = d.expect(|c| last_useful(c, &masks, discard) as u8 as f64);
            a[6] = points_foregone(&d, &masks, discard);
        }
        Action::Hint { .. } => unreachable!(),
    }
    a
}

fn fives_mask() -> u32 {
    COLOURS.iter().map(|&c| Card::new(c, 5).bit()).fold(0, |m, b| m | b)
}

/// Still needed, and no other copy survives outside the discard pile.
fn last_useful(card: Card, masks: &TableMasks, discard: &crate::engine::Census) -> bool {
    masks.discardable & card.bit() == 0 && card.copies() - discard[card.index()] == 1
}

/// Expected points made unreachable by discarding a card drawn from `d`.
pub fn points_foregone(d: &Distribution, masks: &TableMasks, discard: &crate::engine::Census) -> f64 {
    d.expect(|c| {
        if last_useful(c, masks, discard) {
            (masks.reachable[c.colour().index()] + 1 - c.value()) as f64
        } else {
            0.0
        }
    })
}

/// Per-dimension z-scoring fitted on a corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    /// Population mean and standard deviation per column.
    pub fn fit<V: AsRef<[f64]>>(corpus: &[V]) -> Result<Normalizer, EngineError> {
        let first = corpus.first().ok_or_else(|| EngineError::Parse("empty corpus".into()))?;
        let dim = first.as_ref().len();
        let n = corpus.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in corpus {
            for (m, x) in mean.iter_mut().zip(row.as_ref()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for row in corpus {
            for ((v, x), m) in var.iter_mut().zip(row.as_ref()).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        // Rounding can leave a constant column with a tiny spread.
        let std = var
            .into_iter()
            .zip(&mean)
            .map(|(v, m)| {
                let s = (v / n).sqrt();
                if s <= 1e-12 * m.abs().max(1.0) { 0.0 } else { s }
            })
            .collect();
        Ok(Normalizer { mean, std })
    }

    pub fn identity(dim: usize) -> Normalizer {
        Normalizer { mean: vec![0.0; dim], std: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Centre every column; scale only columns with non-zero spread. Apply
    /// once: the result is not meant to be normalized again.
    pub fn apply(&self, x: &mut [f64]) {
        for ((x, m), s) in x.iter_mut().zip(&self.mean).zip(&self.std) {
            *x -= m;
            if *s > 0.0 {
                *x /= s;
            }
        }
    }
}

/// A labelled feature row.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub target: Vec<f64>,
}

/// Tab-separated text: a header line of column names, then one row per
/// example. Feature columns come first, then targets (`target` for one
/// output, `target0..` for several). Numbers use Rust's shortest
/// round-trip formatting, so parsing a written file gives back identical
/// bits.
pub fn write_dataset<W: Write>(mut w: W, names: &[String], examples: &[Example]) -> std::io::Result<()> {
    let targets = examples.first().map_or(1, |e| e.target.len());
    let mut header = names.join("\t");
    if targets == 1 {
        header.push_str("\ttarget");
    } else {
        for t in 0..targets {
            let _ = write!(header, "\ttarget{t}");
        }
    }
    writeln!(w, "{header}")?;
    let mut line = String::new();
    for e in examples {
        line.clear();
        for (i, x) in e.features.iter().chain(&e.target).enumerate() {
            if i > 0 {
                line.push('\t');
            }
            let _ = write!(line, "{x:?}");
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(r: R) -> Result<(Vec<String>, Vec<Example>), EngineError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| EngineError::Parse("missing header".into()))?
        .map_err(|e| EngineError::Parse(e.to_string()))?;
    let cols: Vec<&str> = header.split('\t').collect();
    let n_targets = cols.iter().filter(|c| c.starts_with("target")).count();
    let n_features = cols.len() - n_targets;
    let names = cols[..n_features].iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(|e| EngineError::Parse(e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split('\t')
            .map(|s| s.parse::<f64>().map_err(|e| EngineError::Parse(format!("{s:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != cols.len() {
            return Err(EngineError::Parse(format!("row has {} columns, header {}", vals.len(), cols.len())));
        }
        out.push(Example { features: vals[..n_features].to_vec(), target: vals[n_features..].to_vec() });
    }
    Ok((names, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::GameState;

    #[test]
    fn fresh_four_player_core_block() {
        let s = GameState::new(4, 1).unwrap();
        let f = extract_state(&s.view(0), Convention::OFF);
        assert_eq!(&f[..CORE_FEATURES], &[0.0, 8.0, 3.0, 34.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(f[CORE_FEATURES + 4 * PLAYER_FEATURES..].iter().all(|&x| x == 0.0));
        assert_eq!(f.len(), 31);
    }

    #[test]
    fn all_fives_played() {
        let s = GameState::arranged(2, &[&[], &[]], [5; 5], &[]).unwrap();
        let f = extract_state(&s.view(0), Convention::OFF);
        assert_eq!(f[0], 25.0);
        assert_eq!(&f[6..11], &[5.0; 5]);
    }

    #[test]
    fn normalizer_edge_cases() {
        let one = Normalizer::fit(&[vec![1.0, -2.0]]).unwrap();
        assert_eq!(one.mean, vec![1.0, -2.0]);
        let mut x = vec![1.0, -2.0];
        one.apply(&mut x);
        assert_eq!(x, vec![0.0, 0.0]);
        let constant = Normalizer::fit(&[vec![3.0, 0.0], vec![3.0, 2.0]]).unwrap();
        let mut y = vec![5.0, 2.0];
        constant.apply(&mut y);
        assert_eq!(y, vec![2.0, 1.0]);
        assert!(Normalizer::fit::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn dataset_round_trip() {
        let names = feature_names(false)[..3].to_vec();
        let ex = vec![
            Example { features: vec![0.1, 1.0 / 3.0, -7.25e-12], target: vec![0.64] },
            Example { features: vec![f64::MIN_POSITIVE, 2.0, 1e300], target: vec![0.0] },
        ];
        let mut buf = Vec::new();
        write_dataset(&mut buf, &names, &ex).unwrap();
        let (n2, ex2) = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(n2, names);
        assert_eq!(ex2, ex);
        let mut buf2 = Vec::new();
        write_dataset(&mut buf2, &n2, &ex2).unwrap();
        assert_eq!(buf, buf2);
    }
}
