//! Structural invariant checks over a built game.

use super::*;
use std::fmt;

const PROB_TOL: f64 = 1e-12;
const ZERO_SUM_TOL: f64 = 1e-12;

/// One invariant violation found by [`validate_game`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Terminal history whose payoffs do not cancel.
    NotZeroSum { history: HistoryId, sum: f64 },
    /// Chance outcome probabilities do not sum to 1.
    ChanceNotNormalized { history: HistoryId, sum: f64 },
    /// Negative chance probability.
    NegativeChanceProb { history: HistoryId, action: usize },
    /// A history in an infoset disagrees with the infoset's action count.
    ActionMismatch {
        infoset: InfosetId,
        history: HistoryId,
        expected: usize,
        found: usize,
    },
    /// Two histories in one infoset have different owner action sequences.
    ImperfectRecall {
        infoset: InfosetId,
        history_a: HistoryId,
        history_b: HistoryId,
    },
    /// Non-terminal history with no actions available.
    NoActions { history: HistoryId },
    /// A child slot was never filled.
    MissingChild { history: HistoryId, action: usize },
    /// Bounds ordering broken (should be impossible for finished games).
    BadBounds { infoset: InfosetId, action: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotZeroSum { history, sum } => {
                write!(f, "terminal {history}: payoffs sum to {sum}, expected 0")
            }
            Violation::ChanceNotNormalized { history, sum } => {
                write!(f, "chance {history}: outcome probabilities sum to {sum}")
            }
            Violation::NegativeChanceProb { history, action } => {
                write!(f, "chance {history}: outcome {action} has negative probability")
            }
            Violation::ActionMismatch {
                infoset,
                history,
                expected,
                found,
            } => write!(
                f,
                "infoset {infoset}: history {history} has {found} actions, infoset declares {expected}"
            ),
            Violation::ImperfectRecall {
                infoset,
                history_a,
                history_b,
            } => write!(
                f,
                "infoset {infoset}: histories {history_a} and {history_b} have different owner action sequences"
            ),
            Violation::NoActions { history } => {
                write!(f, "history {history}: non-terminal with no actions")
            }
            Violation::MissingChild { history, action } => {
                write!(f, "history {history}: child for action {action} missing")
            }
            Violation::BadBounds { infoset, action } => {
                write!(f, "infoset {infoset}: action {action} has L > U")
            }
        }
    }
}

/// Result of checking a game's invariants.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "- {v}")?;
            }
            Ok(())
        }
    }
}

/// Check all structural invariants: zero-sum terminals, chance
/// normalization, per-infoset action consistency, perfect recall, and
/// well-formed tree structure. Violations are collected, not raised.
pub fn validate_game(game: &Game) -> ValidationReport {
    let mut out = ValidationReport::default();

    for h in 0..game.num_histories() as HistoryId {
        match game.actor(h) {
            Actor::Terminal => {
                let u = &game.utils[h as usize];
                let sum = u[0] + u[1];
                if sum.abs() > ZERO_SUM_TOL {
                    out.violations.push(Violation::NotZeroSum { history: h, sum });
                }
            }
            Actor::Chance => {
                let probs = game.chance_probs(h);
                if probs.is_empty() {
                    out.violations.push(Violation::NoActions { history: h });
                    continue;
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > PROB_TOL {
                    out.violations
                        .push(Violation::ChanceNotNormalized { history: h, sum });
                }
                for (a, &p) in probs.iter().enumerate() {
                    if p < 0.0 {
                        out.violations
                            .push(Violation::NegativeChanceProb { history: h, action: a });
                    }
                }
                check_children(game, h, &mut out);
            }
            Actor::Player(_) => {
                if game.num_children(h) == 0 {
                    out.violations.push(Violation::NoActions { history: h });
                }
                check_children(game, h, &mut out);
            }
        }
    }

    for (iid, infoset) in game.infosets().iter().enumerate() {
        let iid = iid as InfosetId;
        let expected = infoset.num_actions();
        for &m in &infoset.members {
            let found = game.num_children(m);
            if found != expected {
                out.violations.push(Violation::ActionMismatch {
                    infoset: iid,
                    history: m,
                    expected,
                    found,
                });
            }
        }
        for (a, b) in infoset.action_bounds.iter().enumerate() {
            if b.lower > b.upper {
                out.violations.push(Violation::BadBounds { infoset: iid, action: a });
            }
        }
        // Perfect recall: every member must show the same owner-visible
        // decision sequence (infoset, action) from the root.
        if infoset.members.len() > 1 {
            let first = owner_sequence(game, infoset.members[0], infoset.owner);
            for &m in &infoset.members[1..] {
                if owner_sequence(game, m, infoset.owner) != first {
                    out.violations.push(Violation::ImperfectRecall {
                        infoset: iid,
                        history_a: infoset.members[0],
                        history_b: m,
                    });
                    break;
                }
            }
        }
    }

    out
}

fn check_children(game: &Game, h: HistoryId, out: &mut ValidationReport) {
    for (a, &c) in game.children(h).iter().enumerate() {
        if c == u32::MAX {
            out.violations.push(Violation::MissingChild { history: h, action: a });
        }
    }
}

/// The sequence of (infoset, action) pairs at which `owner` acted on the
/// path from the root down to `h` (exclusive).
fn owner_sequence(game: &Game, mut h: HistoryId, owner: Player) -> Vec<(InfosetId, usize)> {
    let mut seq = Vec::new();
    while let Some((p, a)) = game.parent(h) {
        if game.actor(p) == Actor::Player(owner) {
            seq.push((game.infoset_of[p as usize], a));
        }
        h = p;
    }
    seq.reverse();
    seq
}
