//! Two-player zero-sum extensive-form game solving with CFR and CFR+,
//! three pruning regimes (partial pruning, interval regret-based pruning,
//! total regret-based pruning with space reclamation), an exploitability
//! evaluator, and hardware-independent benchmark instrumentation.

pub mod best_response;
pub mod game;
pub mod regret;
pub mod solver;

pub use best_response::{
    compute_cbr, expected_value, exploitability, near_cbr, CbrResult, CbrScratch, NearCbrError,
    NearCbrPolicy, Profile,
};
pub use game::{
    build_game, dump_text, validate_game, ActionLabel, Actor, Bounds, Game, GameBuilder,
    GameError, GameKind, HistoryId, Infoset, InfosetId, Player, PokerSpec, ValidationReport,
    Violation,
};
pub use regret::{
    apply_regret_increment, normalize_average, potential_bound, regret_matching,
    theoretical_regret_bound,
};
pub use solver::{
    interval_window_live, partial_prune_gate, prune_duration, weighted_prefix_bound_holds, Algo,
    BestAverage, DiscardEvent, DiscardKind, PruneMode, ReachProbs, ReclaimLedger, Solver,
    SolverConfig, TouchCounter,
};
