//! Host calibration: how many iterations fit in a wall-clock budget.
//!
//! Searches are timed at a probe iteration count on positions sampled from
//! baseline games; the mean cost per iteration then converts any target in
//! milliseconds into an iteration budget. Results are stored as TOML so
//! iteration-budget runs replay on any host.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use ris_core::engine::GameState;
use ris_core::mcts::{Budget, Searcher};
use ris_core::policy::{PolicyName, Roster};
use ris_core::rng::{derive_seed, rng_from_seed};

use crate::config::AgentSpec;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    /// Free-form configuration label, e.g. `ris-rules-random`.
    pub label: String,
    pub players: usize,
    pub probe_iterations: u32,
    pub positions: usize,
    pub micros_per_iteration: f64,
    /// Slowest single probe search, per iteration.
    pub worst_micros_per_iteration: f64,
}

impl Entry {
    /// Iterations that fit in `target_ms`; never fewer than one.
    pub fn iterations(&self, target_ms: f64) -> u32 {
        if !(target_ms > 0.0) || !(self.micros_per_iteration > 0.0) {
            return 1;
        }
        ((target_ms * 1000.0 / self.micros_per_iteration).floor() as u32).max(1)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub entries: Vec<Entry>,
}

impl Calibration {
    pub fn get(&self, label: &str, players: usize) -> Option<&Entry> {
        self.entries.iter().find(|e| e.label == label && e.players == players)
    }

    pub fn insert(&mut self, entry: Entry) {
        self.entries.retain(|e| !(e.label == entry.label && e.players == entry.players));
        self.entries.push(entry);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("calibration serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::Io(path.to_path_buf(), e))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }
}

/// Positions from Van den Bergh self-play, a few moves apart.
pub fn sample_positions(players: usize, count: usize, seed: u64) -> Vec<GameState> {
    let roster = Roster::untrained();
    let mut out = Vec::with_capacity(count);
    let mut game = 0;
    while out.len() < count {
        let gs = derive_seed(seed, game);
        game += 1;
        let mut rng = rng_from_seed(derive_seed(gs, 1));
        let mut s = GameState::new(players, gs).expect("valid player count");
        let mut moves = 0;
        while !s.is_terminal() && out.len() < count {
            if moves % 7 == 3 {
                out.push(s.clone());
            }
            let a = roster.act(PolicyName::VanDenBergh, &s.view(s.current_player()), &mut rng);
            s.step(a);
            moves += 1;
        }
    }
    out
}

/// Time `agent` on `positions` searches of `probe` iterations each.
pub fn calibrate(agent: &AgentSpec, roster: &Roster, label: &str, players: usize, positions: usize, probe: u32, seed: u64) -> Result<Entry, Error> {
    let cfg = ris_core::mcts::SearchConfig { budget: Budget::Iterations(probe.max(1)), ..agent.search_config()? };
    let states = sample_positions(players, positions.max(1), seed);
    let mut searcher = Searcher::new(cfg, roster, rng_from_seed(seed));
    let mut total = 0.0;
    let mut iterations = 0u64;
    let mut worst: f64 = 0.0;
    for s in &states {
        let view = s.player_view(s.current_player());
        let t0 = Instant::now();
        let r = searcher.search(&view);
        let us = t0.elapsed().as_secs_f64() * 1e6;
        total += us;
        iterations += u64::from(r.iterations);
        worst = worst.max(us / f64::from(r.iterations));
    }
    Ok(Entry {
        label: label.into(),
        players,
        probe_iterations: probe,
        positions: states.len(),
        micros_per_iteration: total / iterations as f64,
        worst_micros_per_iteration: worst,
    })
}
