//! Line-oriented text dump of a game tree, for cross-implementation
//! diffing. One history per line:
//!
//! ```text
//! id parent action actor payload
//! ```
//!
//! where `payload` is the infoset id for decision nodes, the
//! comma-separated outcome probabilities for chance nodes, and the
//! comma-separated per-player utilities for terminals. The root's parent
//! and action are printed as `-`.

use super::*;
use std::fmt::Write;

pub fn dump_text(game: &Game) -> String {
    let mut out = String::new();
    for h in 0..game.num_histories() as HistoryId {
        match game.parent(h) {
            None => {
                let _ = write!(out, "{h} - -");
            }
            Some((p, a)) => {
                let _ = write!(out, "{h} {p} {a}");
            }
        }
        match game.actor(h) {
            Actor::Player(p) => {
                let _ = writeln!(out, " {} I{}", p, game.infoset_id(h).unwrap());
            }
            Actor::Chance => {
                let probs: Vec<String> = game.chance_probs(h).iter().map(|p| p.to_string()).collect();
                let _ = writeln!(out, " c {}", probs.join(","));
            }
            Actor::Terminal => {
                let u = &game.utils[h as usize];
                let _ = writeln!(out, " z {},{}", u[0], u[1]);
            }
        }
    }
    out
}
