//! Extensive-form game representation.
//!
//! A [`Game`] is an immutable tree of histories plus the information-set
//! partition for each player, with payoff bounds and descendant sets
//! precomputed at build time. Games are built either by the poker
//! constructors in [`build_game`] or by hand through [`GameBuilder`].

mod builder;
mod dump;
mod poker;
#[cfg(test)]
mod tests;
mod validate;

pub use builder::{GameBuilder, NodeHandle};
pub use dump::dump_text;
pub use poker::{build_game, PokerSpec};
pub use validate::{validate_game, ValidationReport, Violation};

use std::fmt;

/// One of the two strategic players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Player::P1 => 0,
            Player::P2 => 1,
        }
    }

    #[inline]
    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }

    pub fn from_index(i: usize) -> Player {
        match i {
            0 => Player::P1,
            1 => Player::P2,
            _ => panic!("player index out of range: {i}"),
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::P1 => write!(f, "p1"),
            Player::P2 => write!(f, "p2"),
        }
    }
}

/// Who acts at a history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Actor {
    Player(Player),
    Chance,
    Terminal,
}

/// Index of a history in the game tree.
pub type HistoryId = u32;
/// Index of an information set.
pub type InfosetId = u32;

pub const NO_PARENT: u32 = u32::MAX;
pub const NO_INFOSET: u32 = u32::MAX;

/// Maximum number of actions at any decision node. Masks and scratch
/// buffers are sized for this.
pub const MAX_ACTIONS: usize = 16;

/// A label describing what an action means, for dumps and debugging.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionLabel {
    Fold,
    /// Check when unfaced, call when facing a bet.
    CheckCall,
    /// Bet when unfaced, raise when facing a bet; carries the size in chips.
    BetRaise(f64),
    /// A chance outcome, by index.
    Deal(u32),
    /// Anything else (hand-built games).
    Other(String),
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Fold => write!(f, "f"),
            ActionLabel::CheckCall => write!(f, "c"),
            ActionLabel::BetRaise(s) => write!(f, "b{s}"),
            ActionLabel::Deal(i) => write!(f, "d{i}"),
            ActionLabel::Other(s) => write!(f, "{s}"),
        }
    }
}

/// Payoff bounds over the terminals reachable from somewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    #[inline]
    pub fn range(&self) -> f64 {
        self.upper - self.lower
    }
}

/// One information set: the unit at which strategies are defined.
#[derive(Debug, Clone)]
pub struct Infoset {
    pub owner: Player,
    /// Action labels, shared by every member history.
    pub actions: Vec<ActionLabel>,
    /// Member histories in deterministic (construction) order.
    pub members: Vec<HistoryId>,
    /// Per-action payoff bounds for the owner: (L(I,a), U(I,a)).
    pub action_bounds: Vec<Bounds>,
    /// Infoset-level payoff bounds: U(I) = max_a U(I,a), L(I) = min_a L(I,a).
    pub bounds: Bounds,
    /// Per action a, the owner's infosets reachable after taking a here
    /// (all descendants, sorted by id).
    pub descendants: Vec<Vec<InfosetId>>,
    /// Per action a, opponent infosets with members both below this
    /// action and elsewhere. Empty in games where the action is observed
    /// by the opponent (all poker variants); window-average bookkeeping
    /// needs snapshots exactly for these.
    pub opp_straddlers: Vec<Vec<InfosetId>>,
    /// The owner's decision sequence leading here: (infoset, action)
    /// pairs, identical for every member under perfect recall.
    pub own_chain: Vec<(InfosetId, u16)>,
    /// Number of the owner's own decisions strictly before this infoset.
    pub own_depth: u16,
    /// Sum of chance reach over member histories; with opponent
    /// probabilities capped at 1 this bounds the opponent reach of the
    /// whole infoset.
    pub chance_reach_sum: f64,
}

impl Infoset {
    #[inline]
    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    /// Range U(I) - L(I) of payoffs reachable from this infoset.
    #[inline]
    pub fn delta(&self) -> f64 {
        self.bounds.range()
    }
}

/// Which built-in game to construct.
#[derive(Debug, Clone, PartialEq)]
pub enum GameKind {
    Kuhn,
    Leduc,
    Leduc5,
    /// A custom poker variant described explicitly.
    Poker(PokerSpec),
}

impl GameKind {
    pub fn name(&self) -> &str {
        match self {
            GameKind::Kuhn => "kuhn",
            GameKind::Leduc => "leduc",
            GameKind::Leduc5 => "leduc5",
            GameKind::Poker(_) => "poker",
        }
    }
}

impl std::str::FromStr for GameKind {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kuhn" => Ok(GameKind::Kuhn),
            "leduc" => Ok(GameKind::Leduc),
            "leduc5" => Ok(GameKind::Leduc5),
            other => Err(GameError::UnknownGame(other.to_string())),
        }
    }
}

/// Errors raised while constructing a game.
#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("unknown game `{0}` (expected kuhn, leduc, or leduc5)")]
    UnknownGame(String),
    #[error("invalid game parameters: {0}")]
    InvalidParameters(String),
    #[error("game validation failed:\n{0}")]
    Invalid(ValidationReport),
}

/// An immutable two-player zero-sum extensive-form game.
///
/// Histories are stored in flat arrays indexed by [`HistoryId`]; id 0 is
/// the root. Utilities are stored per terminal for both players so that
/// the zero-sum invariant is checkable rather than baked in.
#[derive(Debug, Clone)]
pub struct Game {
    pub(crate) kind: GameKind,
    pub(crate) actors: Vec<Actor>,
    /// (parent id, action index at parent); root has NO_PARENT.
    pub(crate) parents: Vec<(u32, u16)>,
    pub(crate) child_start: Vec<u32>,
    pub(crate) child_count: Vec<u16>,
    pub(crate) children: Vec<u32>,
    /// Chance outcome probabilities, parallel to `children` (player rows unused).
    pub(crate) chance_probs: Vec<f64>,
    pub(crate) infoset_of: Vec<u32>,
    /// Position of each player history within its infoset's member list.
    pub(crate) member_pos: Vec<u16>,
    /// Terminal utilities for both players (zeros for non-terminals).
    pub(crate) utils: Vec<[f64; 2]>,
    pub(crate) infosets: Vec<Infoset>,
    pub(crate) infosets_by_player: [Vec<InfosetId>; 2],
    /// Global payoff range Delta = max_i (max u_i - min u_i).
    pub(crate) delta: f64,
}

impl Game {
    #[inline]
    pub fn kind(&self) -> &GameKind {
        &self.kind
    }

    #[inline]
    pub fn num_histories(&self) -> usize {
        self.actors.len()
    }

    #[inline]
    pub fn num_infosets(&self) -> usize {
        self.infosets.len()
    }

    /// Total infoset-action pairs across both players: the size of one
    /// full solver array (regrets or cumulative strategy).
    pub fn total_entries(&self) -> usize {
        self.infosets.iter().map(|i| i.num_actions()).sum()
    }

    #[inline]
    pub fn actor(&self, h: HistoryId) -> Actor {
        self.actors[h as usize]
    }

    #[inline]
    pub fn is_terminal(&self, h: HistoryId) -> bool {
        matches!(self.actors[h as usize], Actor::Terminal)
    }

    #[inline]
    pub fn parent(&self, h: HistoryId) -> Option<(HistoryId, usize)> {
        let (p, a) = self.parents[h as usize];
        (p != NO_PARENT).then_some((p, a as usize))
    }

    #[inline]
    pub fn num_children(&self, h: HistoryId) -> usize {
        self.child_count[h as usize] as usize
    }

    #[inline]
    pub fn child(&self, h: HistoryId, action: usize) -> HistoryId {
        self.children[self.child_start[h as usize] as usize + action]
    }

    #[inline]
    pub fn children(&self, h: HistoryId) -> &[u32] {
        let s = self.child_start[h as usize] as usize;
        &self.children[s..s + self.child_count[h as usize] as usize]
    }

    /// Chance outcome probabilities at a chance history.
    #[inline]
    pub fn chance_probs(&self, h: HistoryId) -> &[f64] {
        debug_assert!(matches!(self.actors[h as usize], Actor::Chance));
        let s = self.child_start[h as usize] as usize;
        &self.chance_probs[s..s + self.child_count[h as usize] as usize]
    }

    #[inline]
    pub fn infoset_id(&self, h: HistoryId) -> Option<InfosetId> {
        let i = self.infoset_of[h as usize];
        (i != NO_INFOSET).then_some(i)
    }

    #[inline]
    pub fn infoset(&self, i: InfosetId) -> &Infoset {
        &self.infosets[i as usize]
    }

    #[inline]
    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    #[inline]
    pub fn player_infosets(&self, p: Player) -> &[InfosetId] {
        &self.infosets_by_player[p.index()]
    }

    /// Position of a player history inside its infoset's member list.
    #[inline]
    pub fn member_pos(&self, h: HistoryId) -> usize {
        self.member_pos[h as usize] as usize
    }

    /// Global payoff range.
    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Payoff of a terminal history for one player.
    ///
    /// Panics if `z` is not terminal: calling this on an interior history
    /// is a contract violation.
    #[inline]
    pub fn terminal_utility(&self, z: HistoryId, player: Player) -> f64 {
        assert!(
            self.is_terminal(z),
            "terminal_utility called on non-terminal history {z}"
        );
        self.utils[z as usize][player.index()]
    }

    /// Exact payoff bounds (L(I,a), U(I,a)) over all terminals reachable
    /// after taking `action` at infoset `i`. Precomputed at build time.
    pub fn payoff_bounds(&self, i: InfosetId, action: usize) -> Bounds {
        self.infosets[i as usize].action_bounds[action]
    }

    /// True if `h` lies strictly below taking `action` at some member of
    /// infoset `i` (used by tests and instrumentation).
    pub fn is_below(&self, mut h: HistoryId, i: InfosetId, action: usize) -> bool {
        while let Some((p, a)) = self.parent(h) {
            if self.infoset_of[p as usize] == i && a == action {
                return true;
            }
            h = p;
        }
        false
    }
}
