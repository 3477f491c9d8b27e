//! Line-oriented game records.
//!
//! One `move` line per move, then one `end` line:
//!
//! ```text
//! move game=3 seed=17 players=4 index=0 player=0 action=H1:R outcome=hint:01000 score=0 lives=3 hints=7
//! end game=3 seed=17 players=4 moves=1 score=0
//! ```
//!
//! Fields are space separated `key=value` pairs in exactly this order.

use std::fmt::{self, Write as _};

use crate::engine::action::{Action, Outcome};
use crate::engine::state::GameState;
use crate::engine::EngineError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveRecord {
    pub index: u16,
    pub player: u8,
    pub action: Action,
    pub outcome: Outcome,
    pub score: u8,
    pub lives: u8,
    pub hints: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRecord {
    pub game_id: u64,
    pub seed: u64,
    pub n_players: u8,
    pub moves: Vec<MoveRecord>,
    pub final_score: u8,
}

impl GameRecord {
    pub fn new(game_id: u64, seed: u64, n_players: usize) -> Self {
        GameRecord { game_id, seed, n_players: n_players as u8, moves: Vec::new(), final_score: 0 }
    }

    /// Append the move that produced `after`.
    pub fn push(&mut self, player: usize, action: Action, outcome: Outcome, after: &GameState) {
        self.moves.push(MoveRecord {
            index: self.moves.len() as u16,
            player: player as u8,
            action,
            outcome,
            score: after.score(),
            lives: after.lives(),
            hints: after.hints(),
        });
        self.final_score = after.score();
    }

    /// Replay the moves from the deal `GameState::new(n_players, seed)` and
    /// check every outcome and counter. Returns the final state.
    pub fn replay(&self) -> Result<GameState, EngineError> {
        let mut state = GameState::new(self.n_players as usize, self.seed)?;
        for m in &self.moves {
            if state.current_player() != m.player as usize {
                return Err(EngineError::OutOfTurn { player: m.player as usize, current: state.current_player() });
            }
            let (next, outcome) = state.apply(m.action)?;
            if outcome != m.outcome || next.score() != m.score || next.lives() != m.lives || next.hints() != m.hints {
                return Err(EngineError::Parse(format!("move {} does not replay", m.index)));
            }
            state = next;
        }
        if state.score() != self.final_score {
            return Err(EngineError::Parse("final score does not replay".into()));
        }
        Ok(state)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<GameRecord, EngineError> {
        let mut header: Option<(u64, u64, u8)> = None;
        let mut moves = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut parts = line.split(' ');
            let kind = parts.next().unwrap_or_default();
            let mut fields = Fields { parts };
            let game_id: u64 = fields.take("game")?;
            let seed: u64 = fields.take("seed")?;
            let n_players: u8 = fields.take("players")?;
            match header {
                None => header = Some((game_id, seed, n_players)),
                Some(h) if h != (game_id, seed, n_players) => {
                    return Err(EngineError::Parse("mixed games in one record".into()))
                }
                Some(_) => {}
            }
            match kind {
                "move" => {
                    let index = fields.take("index")?;
                    let player = fields.take("player")?;
                    let action: Action = fields.take("action")?;
                    let outcome = Outcome::parse_for(action, fields.raw("outcome")?)?;
                    moves.push(MoveRecord {
                        index,
                        player,
                        action,
                        outcome,
                        score: fields.take("score")?,
                        lives: fields.take("lives")?,
                        hints: fields.take("hints")?,
                    });
                    fields.finish()?;
                }
                "end" => {
                    let count: usize = fields.take("moves")?;
                    let final_score = fields.take("score")?;
                    fields.finish()?;
                    if count != moves.len() {
                        return Err(EngineError::Parse(format!("end line says {count} moves, found {}", moves.len())));
                    }
                    return Ok(GameRecord { game_id, seed, n_players, moves, final_score });
                }
                other => return Err(EngineError::Parse(format!("unknown line kind {other:?}"))),
            }
        }
        Err(EngineError::Parse("missing end line".into()))
    }
}

struct Fields<'a> {
    parts: std::str::Split<'a, char>,
}

impl<'a> Fields<'a> {
    fn raw(&mut self, key: &str) -> Result<&'a str, EngineError> {
        let part = self.parts.next().ok_or_else(|| EngineError::Parse(format!("missing {key}")))?;
        part.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| EngineError::Parse(format!("expected {key}=, found {part:?}")))
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, EngineError> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| EngineError::Parse(format!("bad {key} value {raw:?}")))
    }

    fn finish(mut self) -> Result<(), EngineError> {
        match self.parts.next() {
            None => Ok(()),
            Some(extra) => Err(EngineError::Parse(format!("trailing field {extra:?}"))),
        }
    }
}

impl fmt::Display for GameRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = format!("game={} seed={} players={}", self.game_id, self.seed, self.n_players);
        let mut out = String::new();
        for m in &self.moves {
            writeln!(
                out,
                "move {head} index={} player={} action={} outcome={} score={} lives={} hints={}",
                m.index, m.player, m.action, m.outcome, m.score, m.lives, m.hints
            )?;
        }
        writeln!(out, "end {head} moves={} score={}", self.moves.len(), self.final_score)?;
        f.write_str(&out)
    }
}
