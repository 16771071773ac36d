//! CFR / CFR+ iteration engine.
//!
//! One iteration runs one traversal per player. The traverser's regrets
//! and counterfactual-value sums are updated at its own infosets; the
//! *other* player's cumulative strategy is updated at theirs, weighted by
//! their own reach. That convention makes partial pruning exactly
//! lossless: a subtree is skipped only when the opponent-and-chance reach
//! is zero, which is precisely when every update inside it would carry
//! zero weight.
//!
//! Regret increments are buffered per infoset during a traversal and
//! applied once at the end, so the CFR+ floor acts on whole-iteration
//! increments and the opponent's next traversal sees fully updated
//! regrets (alternating updates; a flag delays the flush for simultaneous
//! updates).

mod pruning;

pub use pruning::{
    interval_window_live, partial_prune_gate, prune_duration, weighted_prefix_bound_holds,
    DiscardEvent, DiscardKind, ReachProbs, ReclaimLedger,
};

use crate::best_response::{CbrScratch, Profile};
use crate::game::{Actor, Game, HistoryId, InfosetId, Player, MAX_ACTIONS};
use crate::regret::{apply_regret_increment, regret_matching_into, theoretical_regret_bound};
use pruning::PruneRecord;
use std::collections::BinaryHeap;
use std::sync::Arc;

pub(crate) const NONE_REC: u32 = u32::MAX;

/// Which regret update rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Cfr,
    CfrPlus,
}

/// Which pruning regime to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneMode {
    /// Traverse everything.
    None,
    /// Skip subtrees the opponent reaches with probability zero.
    Partial,
    /// Partial pruning plus temporary skipping of zero-probability
    /// actions, with a catch-up traversal when a window closes.
    IntervalRbp,
    /// Partial pruning plus pruning justified against the opponent's
    /// all-time average strategy; pruned branches free their storage.
    TotalRbp,
}

impl PruneMode {
    pub fn is_rbp(self) -> bool {
        matches!(self, PruneMode::IntervalRbp | PruneMode::TotalRbp)
    }
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub algo: Algo,
    pub prune: PruneMode,
    /// Average-strategy discard threshold C (total RBP); 0 disables
    /// discarding while still freeing regrets.
    pub avg_discard_c: f64,
    /// Alternating updates by default; when set, both traversals of an
    /// iteration see the strategies from the previous iteration.
    pub simultaneous_updates: bool,
    /// Prune-start checks run only for actions with regret below
    /// `-scale * Delta(I) * sqrt(T)`. `None` disables the checks entirely
    /// (total RBP machinery stays inert).
    pub check_trigger_scale: Option<f64>,
    /// Minimum owner-traversals of an infoset between prune-start checks
    /// of the same action.
    pub check_min_visit_gap: u64,
    /// Runtime invariant assertions (regret bound sweeps, resume checks).
    pub assertions: bool,
    /// Test hook: force the partial-pruning gate on or off regardless of
    /// prune mode.
    pub partial_gate_override: Option<bool>,
    /// Count solver-side visits below these histories separately.
    pub watch_region: Option<Vec<HistoryId>>,
}

impl SolverConfig {
    pub fn new(algo: Algo, prune: PruneMode) -> Self {
        SolverConfig {
            algo,
            prune,
            avg_discard_c: 0.0,
            simultaneous_updates: false,
            check_trigger_scale: Some(1.0),
            check_min_visit_gap: 10,
            assertions: true,
            partial_gate_override: None,
            watch_region: None,
        }
    }
}

/// Per-infoset mutable solver state. Regret and cumulative-strategy
/// storage is dropped outright when a total-RBP prune frees the infoset;
/// the metrics count allocated scalar entries.
#[derive(Debug, Clone)]
pub(crate) struct InfosetState {
    pub regrets: Vec<f64>,
    pub pending: Vec<f64>,
    pub cum: Vec<f64>,
    pub cum_cfv: f64,
    /// Traversal serial of the last visit (first-visit detection).
    pub stamp: u64,
    /// Owner traversals that reached this infoset.
    pub visits: u64,
    /// Visit count at the last prune-start check, per action.
    pub last_check: Vec<u64>,
    /// Bit set = action currently pruned (live record).
    pub pruned_mask: u32,
    /// Bit set = the action's regret entry is accounted freed (record root).
    pub regret_freed_mask: u32,
    /// Bit set = the action's cumulative-strategy entry was discarded.
    pub avg_freed_mask: u32,
    /// Record index per action, `NONE_REC` when none.
    pub record: Vec<u32>,
    pub regret_alloc: bool,
    pub avg_alloc: bool,
}

impl InfosetState {
    fn new(na: usize) -> Self {
        InfosetState {
            regrets: vec![0.0; na],
            pending: vec![0.0; na],
            cum: vec![0.0; na],
            cum_cfv: 0.0,
            stamp: 0,
            visits: 0,
            last_check: vec![0; na],
            pruned_mask: 0,
            regret_freed_mask: 0,
            avg_freed_mask: 0,
            record: vec![NONE_REC; na],
            regret_alloc: true,
            avg_alloc: true,
        }
    }
}

/// Node-touch accounting: total plus an optional watched sub-region
/// (solver-side visits only; evaluation passes do not count there).
#[derive(Debug, Default)]
pub struct TouchCounter {
    pub total: u64,
    pub watched: u64,
    pub(crate) mask: Option<Vec<bool>>,
}

impl TouchCounter {
    #[inline]
    pub(crate) fn solver_hit(&mut self, h: HistoryId) {
        self.total += 1;
        if let Some(mask) = &self.mask {
            if mask[h as usize] {
                self.watched += 1;
            }
        }
    }

    /// Add `n` touches to the counter (overhead accounting).
    pub fn record_touch(&mut self, n: u64) {
        assert!(n >= 1, "record_touch requires a positive count");
        self.total += n;
    }
}

/// Exploitability snapshot kept for CFR+ best-so-far reporting.
#[derive(Debug, Clone)]
pub struct BestAverage {
    pub exploitability: f64,
    pub iteration: u64,
    pub profile: Profile,
}

/// Read-only view of one live prune record.
#[derive(Debug, Clone)]
pub struct PruneRecordInfo {
    pub infoset: InfosetId,
    pub action: usize,
    pub owner: Player,
    pub window_start: u64,
    pub chain_start: u64,
    pub expiry_hint: u64,
    pub banked: f64,
    pub avg_discarded: bool,
}

/// The iterative solver: owns all per-infoset state, prune records, and
/// cost counters for one run. Confined to one thread.
pub struct Solver {
    game: Arc<Game>,
    cfg: SolverConfig,
    /// Completed iterations.
    t: u64,
    infosets: Vec<InfosetState>,
    records: Vec<PruneRecord>,
    live_records: u64,
    /// Re-check schedule per player: (due completed-iteration, record, generation).
    heaps: [BinaryHeap<std::cmp::Reverse<(u64, u32, u32)>>; 2],
    traversal_serial: u64,
    visited: Vec<u32>,
    candidates: Vec<(u32, u8)>,
    pub counter: TouchCounter,
    pub(crate) ledger: ReclaimLedger,
    scratch: CbrScratch,
    best_average: Option<BestAverage>,
    /// Resume-time soundness checks performed and the worst slack seen.
    pub resume_checks: u64,
    partial_gate: bool,
    rbp_active: bool,
}

impl Solver {
    pub fn new(game: Arc<Game>, cfg: SolverConfig) -> Self {
        let infosets = game
            .infosets()
            .iter()
            .map(|i| InfosetState::new(i.num_actions()))
            .collect();
        let mask = cfg.watch_region.as_ref().map(|roots| {
            let mut mask = vec![false; game.num_histories()];
            for h in 0..game.num_histories() as HistoryId {
                let mut cur = h;
                'up: while let Some((p, _)) = game.parent(cur) {
                    if roots.contains(&p) {
                        mask[h as usize] = true;
                        break 'up;
                    }
                    cur = p;
                }
            }
            mask
        });
        let partial_gate = cfg
            .partial_gate_override
            .unwrap_or(cfg.prune != PruneMode::None);
        let rbp_active = cfg.prune.is_rbp();
        let scratch = CbrScratch::for_game(&game);
        Solver {
            infosets,
            records: Vec::new(),
            live_records: 0,
            heaps: [BinaryHeap::new(), BinaryHeap::new()],
            traversal_serial: 0,
            visited: Vec::new(),
            candidates: Vec::new(),
            counter: TouchCounter {
                total: 0,
                watched: 0,
                mask,
            },
            ledger: ReclaimLedger::default(),
            scratch,
            best_average: None,
            resume_checks: 0,
            partial_gate,
            rbp_active,
            t: 0,
            game,
            cfg,
        }
    }

    #[inline]
    pub fn game(&self) -> &Arc<Game> {
        &self.game
    }

    #[inline]
    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Completed iterations.
    #[inline]
    pub fn iteration(&self) -> u64 {
        self.t
    }

    pub fn ledger(&self) -> &ReclaimLedger {
        &self.ledger
    }

    pub fn live_pruned_subtrees(&self) -> u64 {
        self.live_records
    }

    /// Currently allocated scalar entries: (regret entries, cumulative
    /// strategy entries).
    pub fn memory_footprint(&self) -> (u64, u64) {
        let total = self.game.total_entries() as u64;
        (
            total - self.ledger.freed_regret_entries,
            total - self.ledger.freed_avg_entries,
        )
    }

    /// Run `n` iterations.
    pub fn run(&mut self, n: u64) {
        for _ in 0..n {
            self.run_iteration();
        }
    }

    /// One iteration: a traversal for each player plus pruning
    /// bookkeeping.
    pub fn run_iteration(&mut self) {
        let game = self.game.clone();
        let t = self.t + 1;
        if self.cfg.simultaneous_updates {
            self.begin_sweep(&game, Player::P1);
            self.begin_sweep(&game, Player::P2);
            self.traversal_serial += 1;
            self.traverse(&game, 0, Player::P1, 1.0, 1.0, 1.0);
            let visited_p1 = std::mem::take(&mut self.visited);
            self.traversal_serial += 1;
            self.traverse(&game, 0, Player::P2, 1.0, 1.0, 1.0);
            let visited_p2 = std::mem::take(&mut self.visited);
            self.visited = visited_p1;
            self.flush_visited(&game, t);
            self.visited = visited_p2;
            self.flush_visited(&game, t);
            self.process_candidates(&game, Player::P1, t);
            self.process_candidates(&game, Player::P2, t);
        } else {
            for player in [Player::P1, Player::P2] {
                self.begin_sweep(&game, player);
                self.traversal_serial += 1;
                self.traverse(&game, 0, player, 1.0, 1.0, 1.0);
                self.flush_visited(&game, t);
                self.process_candidates(&game, player, t);
            }
        }
        self.t = t;
        if self.cfg.assertions {
            let cadence = if self.game.num_infosets() <= 2048 { 1 } else { 64 };
            if self.t % cadence == 0 {
                self.assert_regret_bound();
            }
        }
    }

    /// Recursive counterfactual-value traversal for one player.
    ///
    /// Returns the expected utility of `h` for the traverser under the
    /// current profile. `pi_self` is the traverser's own reach, `pi_opp`
    /// the opponent's own reach, `pi_chance` the chance reach.
    fn traverse(
        &mut self,
        g: &Game,
        h: HistoryId,
        traverser: Player,
        pi_self: f64,
        pi_opp: f64,
        pi_chance: f64,
    ) -> f64 {
        self.counter.solver_hit(h);
        match g.actor(h) {
            Actor::Terminal => g.terminal_utility(h, traverser),
            Actor::Chance => {
                let mut v = 0.0;
                for a in 0..g.num_children(h) {
                    let p = g.chance_probs(h)[a];
                    if self.partial_gate && pi_opp * (pi_chance * p) == 0.0 {
                        continue;
                    }
                    v += p * self.traverse(g, g.child(h, a), traverser, pi_self, pi_opp, pi_chance * p);
                }
                v
            }
            Actor::Player(p) if p == traverser => {
                let iid = g.infoset_id(h).unwrap() as usize;
                debug_assert!(self.infosets[iid].regret_alloc, "traversed a freed infoset");
                let w = pi_opp * pi_chance;
                let na = g.num_children(h);

                if self.infosets[iid].stamp != self.traversal_serial {
                    self.infosets[iid].stamp = self.traversal_serial;
                    self.infosets[iid].visits += 1;
                    self.visited.push(iid as u32);
                    if self.cfg.prune == PruneMode::IntervalRbp {
                        self.maybe_start_interval_prunes(g, iid);
                    }
                }

                // Accumulate the pessimistic bound, window reach, and the
                // opponent's weighted own-reach for live records of this
                // infoset.
                let mask = self.infosets[iid].pruned_mask;
                if mask != 0 {
                    let mpos = g.member_pos(h);
                    let avg_w = match self.cfg.algo {
                        Algo::Cfr => pi_opp,
                        Algo::CfrPlus => (self.t + 1) as f64 * pi_opp,
                    };
                    let mut m = mask;
                    while m != 0 {
                        let a = m.trailing_zeros() as usize;
                        m &= m - 1;
                        let upper = g.infoset(iid as InfosetId).action_bounds[a].upper;
                        let rid = self.infosets[iid].record[a] as usize;
                        let rec = &mut self.records[rid];
                        rec.banked += w * upper;
                        if !rec.window_reach.is_empty() {
                            rec.window_reach[mpos] += w;
                        }
                        rec.span_avg_own[mpos] += avg_w;
                    }
                }

                let mut sigma = [0.0; MAX_ACTIONS];
                regret_matching_into(&self.infosets[iid].regrets, !mask, &mut sigma[..na]);

                let mut vals = [0.0; MAX_ACTIONS];
                let mut v = 0.0;
                for a in 0..na {
                    if mask & (1 << a) != 0 {
                        continue;
                    }
                    vals[a] =
                        self.traverse(g, g.child(h, a), traverser, pi_self * sigma[a], pi_opp, pi_chance);
                    v += sigma[a] * vals[a];
                }

                let state = &mut self.infosets[iid];
                state.cum_cfv += w * v;
                for a in 0..na {
                    if mask & (1 << a) == 0 {
                        state.pending[a] += w * (vals[a] - v);
                    }
                }
                v
            }
            Actor::Player(_) => {
                let iid = g.infoset_id(h).unwrap() as usize;
                let na = g.num_children(h);
                let mask = self.infosets[iid].pruned_mask;
                let mut sigma = [0.0; MAX_ACTIONS];
                regret_matching_into(&self.infosets[iid].regrets, !mask, &mut sigma[..na]);

                // First visit this traversal: accumulate the owner's
                // average strategy, weighted by their own reach (and by
                // the iteration for the linearly weighted variant).
                if self.infosets[iid].stamp != self.traversal_serial {
                    self.infosets[iid].stamp = self.traversal_serial;
                    let state = &mut self.infosets[iid];
                    if state.avg_alloc && pi_opp != 0.0 {
                        let wgt = match self.cfg.algo {
                            Algo::Cfr => pi_opp,
                            Algo::CfrPlus => (self.t + 1) as f64 * pi_opp,
                        };
                        let freed = state.avg_freed_mask;
                        for a in 0..na {
                            if freed & (1 << a) == 0 {
                                state.cum[a] += wgt * sigma[a];
                            }
                        }
                    }
                }

                let mut v = 0.0;
                for a in 0..na {
                    let po = pi_opp * sigma[a];
                    if self.partial_gate && po == 0.0 {
                        continue;
                    }
                    v += sigma[a] * self.traverse(g, g.child(h, a), traverser, pi_self, po, pi_chance);
                }
                v
            }
        }
    }

    /// Apply buffered regret increments for every infoset the last
    /// traversal visited, and collect prune-start candidates.
    ///
    /// Interval windows are only justified while regret matching would
    /// assign the pruned action zero probability on its own, which needs
    /// a live sibling with positive regret; windows whose infoset loses
    /// that property are closed here, right after the update that broke
    /// it.
    fn flush_visited(&mut self, g: &Game, t: u64) {
        let plus = self.cfg.algo == Algo::CfrPlus;
        let rbp = self.rbp_active;
        let total_mode = self.cfg.prune == PruneMode::TotalRbp;
        let interval_mode = self.cfg.prune == PruneMode::IntervalRbp;
        let trigger = self.cfg.check_trigger_scale;
        let visited = std::mem::take(&mut self.visited);
        let mut force_expire: Vec<u32> = Vec::new();
        for &iid in &visited {
            let iid = iid as usize;
            let threshold = match (total_mode, trigger) {
                (true, Some(scale)) => {
                    -scale * g.infoset(iid as InfosetId).delta() * (t as f64).sqrt()
                }
                _ => f64::NEG_INFINITY,
            };
            let state = &mut self.infosets[iid];
            let na = state.regrets.len();
            for a in 0..na {
                if state.pruned_mask & (1 << a) != 0 {
                    debug_assert_eq!(state.pending[a], 0.0);
                    continue;
                }
                let inc = std::mem::take(&mut state.pending[a]);
                let entry = apply_regret_increment(state.regrets[a], inc, plus, rbp);
                state.regrets[a] = entry;
                if entry <= threshold
                    && state.visits >= state.last_check[a] + self.cfg.check_min_visit_gap
                {
                    self.candidates.push((iid as u32, a as u8));
                }
            }
            if interval_mode && state.pruned_mask != 0 {
                let any_positive = (0..na)
                    .any(|b| state.pruned_mask & (1 << b) == 0 && state.regrets[b] > 0.0);
                if !any_positive {
                    force_expire.push(iid as u32);
                }
            }
        }
        self.visited = visited;
        self.visited.clear();

        for iid in force_expire {
            let game = self.game.clone();
            loop {
                let rid = self.infosets[iid as usize]
                    .record
                    .iter()
                    .copied()
                    .find(|&r| r != NONE_REC);
                match rid {
                    Some(rid) => self.interval_catch_up(&game, rid as usize),
                    None => break,
                }
            }
        }
    }

    /// Current strategy at an infoset (regret matching over live actions).
    pub fn current_strategy(&self, iid: InfosetId) -> Vec<f64> {
        let state = &self.infosets[iid as usize];
        let na = self.game.infoset(iid).num_actions();
        let mut out = vec![0.0; na];
        if state.regret_alloc {
            regret_matching_into(&state.regrets, !state.pruned_mask, &mut out);
        } else {
            // freed: unreachable by the owner; placeholder uniform
            out.iter_mut().for_each(|p| *p = 1.0 / na as f64);
        }
        out
    }

    /// Average strategy at one infoset: cumulative strategy normalized,
    /// uniform when the normalizer is zero.
    pub fn average_strategy(&self, iid: InfosetId) -> Vec<f64> {
        let state = &self.infosets[iid as usize];
        let na = self.game.infoset(iid).num_actions();
        let mut out = vec![0.0; na];
        if state.avg_alloc && state.cum.iter().sum::<f64>() > 0.0 {
            crate::regret::normalize_average_into(&state.cum, &mut out);
        } else {
            out.iter_mut().for_each(|p| *p = 1.0 / na as f64);
        }
        out
    }

    /// The average strategy profile for both players.
    pub fn average_profile(&self) -> Profile {
        let rows = (0..self.game.num_infosets())
            .map(|i| self.average_strategy(i as InfosetId))
            .collect();
        Profile::new(rows)
    }

    /// Average probability of one action (used by pruning and tests).
    pub(crate) fn avg_prob(&self, iid: InfosetId, action: usize) -> f64 {
        let state = &self.infosets[iid as usize];
        let na = self.game.infoset(iid).num_actions();
        if !state.avg_alloc {
            return 1.0 / na as f64;
        }
        let sum: f64 = state.cum.iter().sum();
        if sum > 0.0 {
            state.cum[action] / sum
        } else {
            1.0 / na as f64
        }
    }

    /// Exploitability of the current average profile. Touches are counted
    /// as evaluation overhead.
    pub fn evaluate_exploitability(&mut self) -> f64 {
        let game = self.game.clone();
        self.flush_open_average_replays(&game);
        let profile = self.average_profile();
        let mut touches = 0u64;
        let e = crate::best_response::exploitability_counted(
            &game,
            &profile,
            &mut self.scratch,
            &mut touches,
        );
        self.counter.total += touches;
        e
    }

    /// Exploitability plus best-so-far tracking (reported value for the
    /// linearly weighted variant, which is noisy under pruning).
    pub fn checkpoint_exploitability(&mut self) -> (f64, f64) {
        let game = self.game.clone();
        self.flush_open_average_replays(&game);
        self.run_avg_discard_sweep();
        let current = {
            let game = self.game.clone();
            let profile = self.average_profile();
            let mut touches = 0u64;
            let e = crate::best_response::exploitability_counted(
                &game,
                &profile,
                &mut self.scratch,
                &mut touches,
            );
            self.counter.total += touches;
            if self
                .best_average
                .as_ref()
                .map(|b| e < b.exploitability)
                .unwrap_or(true)
            {
                self.best_average = Some(BestAverage {
                    exploitability: e,
                    iteration: self.t,
                    profile,
                });
            }
            e
        };
        let reported = match self.cfg.algo {
            Algo::CfrPlus => self.best_average.as_ref().unwrap().exploitability,
            Algo::Cfr => current,
        };
        (current, reported)
    }

    pub fn best_average(&self) -> Option<&BestAverage> {
        self.best_average.as_ref()
    }

    /// Sum over both players' live entries of max positive regret per
    /// infoset: the regret side of the two-epsilon equilibrium bound.
    pub fn folk_regret_sum(&self) -> f64 {
        let mut sum = 0.0;
        for (iid, state) in self.infosets.iter().enumerate() {
            if !state.regret_alloc {
                continue;
            }
            let na = self.game.infoset(iid as InfosetId).num_actions();
            let mut best = 0.0f64;
            for a in 0..na {
                if state.pruned_mask & (1 << a) != 0 {
                    continue;
                }
                best = best.max(state.regrets[a]);
            }
            sum += best;
        }
        sum
    }

    /// Panic if any live regret entry exceeds the regret-matching bound.
    pub fn assert_regret_bound(&self) {
        if let Some((iid, a, r, bound)) = self.regret_bound_violation() {
            panic!(
                "regret bound violated at infoset {iid} action {a}: R={r} > {bound} at T={}",
                self.t
            );
        }
    }

    /// First live entry violating `max_a R+(I,a) <= Delta(I) sqrt(|A|) sqrt(T)`.
    pub fn regret_bound_violation(&self) -> Option<(InfosetId, usize, f64, f64)> {
        if self.t == 0 {
            return None;
        }
        for (iid, state) in self.infosets.iter().enumerate() {
            if !state.regret_alloc {
                continue;
            }
            let inf = self.game.infoset(iid as InfosetId);
            let bound = theoretical_regret_bound(inf, self.t);
            for a in 0..inf.num_actions() {
                if state.pruned_mask & (1 << a) != 0 {
                    continue;
                }
                if state.regrets[a] > bound {
                    return Some((iid as InfosetId, a, state.regrets[a], bound));
                }
            }
        }
        None
    }

    /// Direct read access for tests and bindings.
    pub fn regrets(&self, iid: InfosetId) -> Option<&[f64]> {
        let s = &self.infosets[iid as usize];
        s.regret_alloc.then_some(s.regrets.as_slice())
    }

    pub fn cumulative_strategy(&self, iid: InfosetId) -> Option<&[f64]> {
        let s = &self.infosets[iid as usize];
        s.avg_alloc.then_some(s.cum.as_slice())
    }

    pub fn cum_cfv(&self, iid: InfosetId) -> f64 {
        self.infosets[iid as usize].cum_cfv
    }

    pub fn is_pruned(&self, iid: InfosetId, action: usize) -> bool {
        self.infosets[iid as usize].pruned_mask & (1 << action) != 0
    }

    pub fn alloc_status(&self, iid: InfosetId) -> (bool, bool) {
        let s = &self.infosets[iid as usize];
        (s.regret_alloc, s.avg_alloc)
    }

    /// Summaries of the live prune records (for tests, tooling, and the
    /// bindings).
    pub fn prune_records(&self) -> Vec<PruneRecordInfo> {
        self.records
            .iter()
            .filter(|r| r.alive)
            .map(|r| PruneRecordInfo {
                infoset: r.infoset,
                action: r.action as usize,
                owner: r.owner,
                window_start: r.t0,
                chain_start: r.chain_start,
                expiry_hint: r.expiry_hint,
                banked: r.banked,
                avg_discarded: r.avg_discarded,
            })
            .collect()
    }

    /// Debug recount of freed entries; must agree with the ledger.
    pub fn recount_freed(&self) -> (u64, u64) {
        let mut regret = 0u64;
        let mut avg = 0u64;
        for (iid, s) in self.infosets.iter().enumerate() {
            let na = self.game.infoset(iid as InfosetId).num_actions() as u64;
            if s.regret_alloc {
                regret += s.regret_freed_mask.count_ones() as u64;
            } else {
                regret += na;
            }
            if s.avg_alloc {
                avg += s.avg_freed_mask.count_ones() as u64;
            } else {
                avg += na;
            }
        }
        (regret, avg)
    }

    #[allow(unused)]
    pub(crate) fn reach_probs(pi_self: f64, pi_opp: f64, pi_chance: f64) -> ReachProbs {
        ReachProbs {
            pi_self,
            pi_opp: pi_opp * pi_chance,
        }
    }

    #[cfg(test)]
    pub(crate) fn poke_cum(&mut self, iid: InfosetId, cum: Vec<f64>) {
        self.infosets[iid as usize].cum = cum;
    }
}
