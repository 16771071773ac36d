//! The three pruning regimes.
//!
//! Partial pruning is a gate inside the traversal: subtrees where the
//! opponent-and-chance reach is exactly zero contribute nothing to any
//! update, so they are skipped.
//!
//! Regret-based pruning maintains one record per pruned (infoset, action).
//! A record banks a pessimistic running value for the pruned action
//! (its value sum at the prune anchor plus, per skipped iteration, the
//! opponent reach times the action's payoff ceiling) and stays live while
//! that bank does not exceed the infoset's accumulated value. Instead of
//! re-evaluating the inequality every iteration, each record is gated
//! through a due-date heap: with per-iteration drift bounded by
//! `min(chance reach, 1) * (U(I,a) - L(I))`, a record with slack `s` is
//! provably safe for `floor(s / margin)` more iterations.
//!
//! Interval records close with a catch-up traversal: one best response in
//! the pruned branch against the strategies the opponent actually played
//! over the window (their regrets below the branch were frozen, so the
//! current strategy *is* the window average), declared as played on every
//! skipped iteration. Total records instead reset the whole branch from a
//! best response against the opponent's all-time average strategy, which
//! is why the branch's storage can be freed the moment pruning starts.

use super::{Algo, InfosetState, PruneMode, Solver, NONE_REC};
use crate::best_response::{subforest_best_response, SubtreeValues, TouchSink};
use crate::game::{Actor, Game, HistoryId, InfosetId, Player};
use crate::regret::{apply_regret_increment, regret_matching_into};
use std::cmp::Reverse;

/// Reach probabilities seen at one history during a traversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachProbs {
    /// Traverser's own contribution.
    pub pi_self: f64,
    /// Opponent-and-chance contribution.
    pub pi_opp: f64,
}

/// Partial pruning: skip the subtree iff the opponent-and-chance reach is
/// exactly zero. No epsilon: a subnormal reach still traverses.
#[inline]
pub fn partial_prune_gate(reach: &ReachProbs) -> bool {
    reach.pi_opp == 0.0
}

/// The running window inequality: pruning may continue while the banked
/// pessimistic value does not exceed the infoset's accumulated value.
#[inline]
pub fn interval_window_live(banked: f64, sum_cfv: f64) -> bool {
    banked <= sum_cfv
}

/// Guaranteed prune duration from a fresh check at iteration `t`:
/// `floor((sum_cfv - t * nbv) / (U(I,a) - L(I)))`, saturating when the
/// payoff range is zero (the regret can never rise).
pub fn prune_duration(sum_cfv: f64, t: u64, nbv_action: f64, upper_action: f64, lower_infoset: f64) -> u64 {
    let slack = sum_cfv - t as f64 * nbv_action;
    if slack < 0.0 {
        return 0;
    }
    let denom = upper_action - lower_infoset;
    if denom <= 0.0 {
        return u64::MAX >> 8;
    }
    (slack / denom).floor() as u64
}

/// Iteration-weight prefix certificate for discarding an action's
/// cumulative strategy: an action pruned since `chain_start` has average
/// weight at most `W(chain_start) / W(t)`, where `W` is the total
/// averaging weight (t for uniform weighting, t(t+1)/2 for linear).
/// Returns whether that bound is at or below `c / sqrt(t)`.
pub fn weighted_prefix_bound_holds(chain_start: u64, t: u64, c: f64, linear_weights: bool) -> bool {
    if c <= 0.0 || t == 0 {
        return false;
    }
    let w = |x: u64| -> f64 {
        if linear_weights {
            x as f64 * (x as f64 + 1.0) / 2.0
        } else {
            x as f64
        }
    };
    w(chain_start) / w(t) <= c / (t as f64).sqrt()
}

/// One pruned (infoset, action) window.
#[derive(Debug, Clone)]
pub(crate) struct PruneRecord {
    pub infoset: u32,
    pub action: u8,
    pub owner: Player,
    pub alive: bool,
    pub gen: u32,
    /// Completed-iteration anchor of the current window.
    pub t0: u64,
    /// Anchor of the first window of this unbroken prune chain.
    pub chain_start: u64,
    /// Banked pessimistic value sum for the pruned action.
    pub banked: f64,
    /// Infoset value sum at the anchor (interval catch-up baseline).
    pub cfv_snapshot: f64,
    /// Anchor plus the guaranteed duration from the last check.
    pub expiry_hint: u64,
    /// Per-iteration worst-case drift of (banked - sum_cfv).
    pub margin: f64,
    /// Opponent-and-chance reach accumulated per member over the window
    /// (interval mode only; empty for total mode).
    pub window_reach: Vec<f64>,
    /// Opponent own-reach accumulated per member over the whole prune
    /// span, carrying the averaging weight (1 per iteration, or the
    /// iteration number under linear weighting). When the span closes,
    /// the opponent's average-strategy mass inside the branch is replayed
    /// from these: their strategy was frozen in there, so the aggregate
    /// update is this reach sum times the frozen strategy.
    pub span_avg_own: Vec<f64>,
    /// Cumulative-strategy rows, at the window anchor, of opponent
    /// infosets straddling the pruned branch's boundary. Their window
    /// average is the diff against the current rows; infosets fully
    /// inside the branch are frozen, so their current strategy is already
    /// the window average.
    pub cum_snapshot: Vec<(InfosetId, Vec<f64>)>,
    pub avg_discarded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscardKind {
    /// Regret storage freed at prune start.
    RegretFree,
    /// Cumulative strategy discarded under the C threshold.
    AvgDiscard,
    /// Storage reallocated at resume.
    Realloc,
}

/// Timestamped reclamation event.
#[derive(Debug, Clone)]
pub struct DiscardEvent {
    pub iteration: u64,
    pub infoset: InfosetId,
    pub action: usize,
    pub kind: DiscardKind,
    pub entries: u64,
}

const MAX_EVENTS: usize = 65_536;

/// Running account of freed storage. Counts are exact and must match a
/// recount of the per-infoset flags at all times; the event log keeps the
/// most recent window of reclamations.
#[derive(Debug, Clone, Default)]
pub struct ReclaimLedger {
    pub freed_regret_entries: u64,
    pub freed_avg_entries: u64,
    pub total_prune_starts: u64,
    pub total_resumes: u64,
    pub total_avg_discards: u64,
    pub total_interval_starts: u64,
    pub total_catchups: u64,
    pub events: Vec<DiscardEvent>,
}

impl ReclaimLedger {
    fn push_event(&mut self, ev: DiscardEvent) {
        if self.events.len() < MAX_EVENTS {
            self.events.push(ev);
        }
    }
}

impl Solver {
    /// Pop every record due for a re-check before this iteration's
    /// traversal for `player`, extending windows whose slack still covers
    /// the worst-case drift and closing the rest.
    pub(super) fn begin_sweep(&mut self, g: &Game, player: Player) {
        let pi = player.index();
        loop {
            let Some(&Reverse((due, rid, gen))) = self.heaps[pi].peek() else {
                break;
            };
            if due > self.t {
                break;
            }
            self.heaps[pi].pop();
            let rec = &self.records[rid as usize];
            if !rec.alive || rec.gen != gen {
                continue;
            }
            let slack = self.infosets[rec.infoset as usize].cum_cfv - rec.banked;
            if rec.margin > 0.0 && slack >= rec.margin {
                let extra = (slack / rec.margin).floor() as u64;
                self.heaps[pi].push(Reverse((self.t + extra, rid, gen)));
                continue;
            }
            if rec.margin <= 0.0 {
                // zero payoff range below the action: can never expire
                continue;
            }
            match self.cfg.prune {
                PruneMode::IntervalRbp => self.interval_catch_up(g, rid as usize),
                PruneMode::TotalRbp => self.total_recheck_or_resume(g, rid as usize),
                _ => unreachable!("records exist only in regret-based pruning modes"),
            }
        }
    }

    fn alloc_record(&mut self, rec: PruneRecord) -> u32 {
        self.live_records += 1;
        if let Some(idx) = self.records.iter().position(|r| !r.alive) {
            let gen = self.records[idx].gen;
            self.records[idx] = PruneRecord { gen, ..rec };
            idx as u32
        } else {
            self.records.push(rec);
            (self.records.len() - 1) as u32
        }
    }

    fn kill_record(&mut self, rid: usize) {
        let rec = &mut self.records[rid];
        debug_assert!(rec.alive);
        rec.alive = false;
        rec.gen = rec.gen.wrapping_add(1);
        rec.window_reach = Vec::new();
        rec.span_avg_own = Vec::new();
        rec.cum_snapshot = Vec::new();
        self.live_records -= 1;
    }

    /// Interval-mode prune starts at an infoset the traverser just
    /// reached: any action whose regret is deep enough below zero that
    /// the window inequality survives at least one worst-case iteration,
    /// provided regret matching keeps a positive-regret sibling live.
    pub(super) fn maybe_start_interval_prunes(&mut self, g: &Game, iid: usize) {
        let inf = g.infoset(iid as InfosetId);
        let na = inf.num_actions();
        let reach_cap = inf.chance_reach_sum.min(1.0);
        for a in 0..na {
            let state = &self.infosets[iid];
            if state.pruned_mask & (1 << a) != 0 {
                continue;
            }
            let r = state.regrets[a];
            if r >= 0.0 {
                continue;
            }
            let margin = reach_cap * (inf.action_bounds[a].upper - inf.bounds.lower);
            if margin > 0.0 && -r < margin {
                continue;
            }
            let mask_after = state.pruned_mask | (1 << a);
            let has_positive_sibling = (0..na)
                .any(|b| b != a && mask_after & (1 << b) == 0 && state.regrets[b] > 0.0);
            if !has_positive_sibling {
                continue;
            }

            // Close any live windows strictly below this action first, so
            // their declared play never overlaps the new window.
            let below: Vec<u32> = inf.descendants[a].clone();
            for did in below {
                let recs: Vec<u32> = self.infosets[did as usize]
                    .record
                    .iter()
                    .copied()
                    .filter(|&r| r != NONE_REC)
                    .collect();
                for rid in recs {
                    self.interval_catch_up(g, rid as usize);
                }
            }

            let cum_snapshot: Vec<(InfosetId, Vec<f64>)> = inf.opp_straddlers[a]
                .iter()
                .map(|&k| (k, self.infosets[k as usize].cum.clone()))
                .collect();
            let state = &self.infosets[iid];
            let rec = PruneRecord {
                infoset: iid as u32,
                action: a as u8,
                owner: inf.owner,
                alive: true,
                gen: 0,
                t0: self.t,
                chain_start: self.t,
                banked: state.regrets[a] + state.cum_cfv,
                cfv_snapshot: state.cum_cfv,
                expiry_hint: self.t,
                margin,
                window_reach: vec![0.0; inf.members.len()],
                span_avg_own: vec![0.0; inf.members.len()],
                cum_snapshot,
                avg_discarded: false,
            };
            let slack = -state.regrets[a];
            self.ledger.total_interval_starts += 1;
            let rid = self.alloc_record(rec);
            let gen = self.records[rid as usize].gen;
            let state = &mut self.infosets[iid];
            state.pruned_mask |= 1 << a;
            state.record[a] = rid;
            if margin > 0.0 {
                let extra = (slack / margin).floor() as u64; // >= 1 by the start condition
                self.heaps[inf.owner.index()].push(Reverse((self.t + extra, rid, gen)));
            }
        }
    }

    /// Close an interval window: one best response over the pruned branch
    /// against the opponent's (frozen, hence window-average) strategy,
    /// weighted by the opponent reach accumulated over the window, and
    /// declared as played on every skipped iteration.
    pub(super) fn interval_catch_up(&mut self, g: &Game, rid: usize) {
        let rec = self.records[rid].clone();
        debug_assert!(rec.alive);
        let iid = rec.infoset as usize;
        let a = rec.action as usize;
        let inf = g.infoset(rec.infoset);

        let roots: Vec<(HistoryId, f64)> = inf
            .members
            .iter()
            .enumerate()
            .map(|(pos, &m)| (g.child(m, a), rec.window_reach[pos]))
            .collect();
        self.replay_opponent_average(g, &rec);
        let sub =
            self.subtree_best_response(g, rec.infoset, a, &roots, OppStrategy::Window(&rec.cum_snapshot));

        let plus = self.cfg.algo == Algo::CfrPlus;
        let window_cfv = self.infosets[iid].cum_cfv - rec.cfv_snapshot;
        if self.cfg.assertions {
            // The banked pessimistic sum must dominate the realized
            // best-response total, and the declared regret must stay
            // nonpositive: both follow from the window inequality.
            let pess = rec.banked - (self.infosets[iid].regrets[a] + rec.cfv_snapshot);
            let scale = 1e-9 * (1.0 + pess.abs() + sub.total.abs());
            assert!(
                sub.total <= pess + scale,
                "window catch-up at T={}: best-response total {} exceeds banked bound {}",
                self.t,
                sub.total,
                pess
            );
            let declared = self.infosets[iid].regrets[a] + sub.total - window_cfv;
            assert!(
                declared <= rec.margin + scale,
                "window catch-up at T={}: declared regret {} above margin {}",
                self.t,
                declared,
                rec.margin
            );
        }
        let state = &mut self.infosets[iid];
        state.regrets[a] =
            apply_regret_increment(state.regrets[a], sub.total - window_cfv, plus, true);
        state.pruned_mask &= !(1 << a);
        state.record[a] = NONE_REC;

        for (did, cbv, v, _) in &sub.infosets {
            let st = &mut self.infosets[*did as usize];
            debug_assert!(st.regret_alloc);
            debug_assert_eq!(st.pruned_mask, 0, "nested window survived under a closing one");
            for (b, &c) in cbv.iter().enumerate() {
                st.regrets[b] = apply_regret_increment(st.regrets[b], c - v, plus, true);
            }
            st.cum_cfv += v;
        }
        self.ledger.total_catchups += 1;
        self.kill_record(rid);
    }

    /// A total-mode record has run out of guaranteed slack: re-check the
    /// prune condition against the opponent's current average strategy
    /// and either re-anchor the window (storage stays freed) or resume
    /// the branch.
    fn total_recheck_or_resume(&mut self, g: &Game, rid: usize) {
        let rec = self.records[rid].clone();
        let iid = rec.infoset;
        let a = rec.action as usize;
        let t = self.t;
        let inf = g.infoset(iid);

        let roots = self.average_weighted_roots(g, iid, a);
        let sub = self.subtree_best_response(g, iid, a, &roots, OppStrategy::Average);
        let nbv = sub.total;
        let sum_cfv = self.infosets[iid as usize].cum_cfv;

        if t as f64 * nbv <= sum_cfv {
            let duration = prune_duration(sum_cfv, t, nbv, inf.action_bounds[a].upper, inf.bounds.lower);
            if duration >= 1 {
                let gen = self.records[rid].gen;
                let rec = &mut self.records[rid];
                rec.t0 = t;
                rec.banked = t as f64 * nbv;
                rec.expiry_hint = t.saturating_add(duration);
                let slack = sum_cfv - t as f64 * nbv;
                if rec.margin > 0.0 {
                    let extra = ((slack / rec.margin).floor() as u64).max(1);
                    self.heaps[rec.owner.index()].push(Reverse((t + extra, rid as u32, gen)));
                }
                return;
            }
        }
        self.resume_subtree(g, rid, &sub, nbv);
    }

    /// Reinstate a branch: reallocate its storage and set regrets as if
    /// the best response against the opponent's average strategy had been
    /// played on every iteration so far.
    fn resume_subtree(&mut self, _g: &Game, rid: usize, sub: &SubtreeValues, nbv_action: f64) {
        let rec = self.records[rid].clone();
        let iid = rec.infoset as usize;
        let a = rec.action as usize;
        let t = self.t as f64;

        self.replay_opponent_average(_g, &rec);

        if self.cfg.assertions {
            let sum_cfv = self.infosets[iid].cum_cfv;
            let slack = sum_cfv - self.t as f64 * nbv_action;
            assert!(
                slack >= -1e-9 * (1.0 + sum_cfv.abs()),
                "resume at T={} violates the prune-condition invariant: T*NBV={} > sum v={}",
                self.t,
                self.t as f64 * nbv_action,
                sum_cfv
            );
        }
        self.resume_checks += 1;

        for (did, cbv, v, _) in &sub.infosets {
            let did = *did as usize;
            let na = cbv.len();
            let st = &mut self.infosets[did];
            debug_assert!(!st.regret_alloc);
            st.regrets = cbv.iter().map(|&c| t * (c - v)).collect();
            st.pending = vec![0.0; na];
            st.cum_cfv = t * v;
            st.regret_alloc = true;
            self.ledger.freed_regret_entries -= na as u64;
            if !st.avg_alloc {
                st.cum = vec![0.0; na];
                st.avg_alloc = true;
                self.ledger.freed_avg_entries -= na as u64;
            }
            if st.avg_freed_mask != 0 {
                self.ledger.freed_avg_entries -= st.avg_freed_mask.count_ones() as u64;
                self.infosets[did].avg_freed_mask = 0;
            }
            debug_assert_eq!(self.infosets[did].pruned_mask, 0);
        }

        let visits = self.infosets[iid].visits;
        let state = &mut self.infosets[iid];
        state.regrets[a] = t * nbv_action - state.cum_cfv;
        state.pruned_mask &= !(1 << a);
        state.regret_freed_mask &= !(1 << a);
        state.record[a] = NONE_REC;
        state.last_check[a] = visits;
        self.ledger.freed_regret_entries -= 1;
        if rec.avg_discarded {
            state.avg_freed_mask &= !(1 << a);
            self.ledger.freed_avg_entries -= 1;
        }
        self.ledger.total_resumes += 1;
        let entries: u64 = 1 + sub.infosets.iter().map(|(_, c, _, _)| c.len() as u64).sum::<u64>();
        self.ledger.push_event(DiscardEvent {
            iteration: self.t,
            infoset: rec.infoset,
            action: a,
            kind: DiscardKind::Realloc,
            entries,
        });
        self.kill_record(rid);
    }

    /// Total-mode prune-start checks queued during the last flush.
    pub(super) fn process_candidates(&mut self, g: &Game, _player: Player, t: u64) {
        if self.candidates.is_empty() {
            return;
        }
        let mut cands = std::mem::take(&mut self.candidates);
        for &(iid, a) in &cands {
            let a = a as usize;
            let state = &self.infosets[iid as usize];
            if !state.regret_alloc || state.pruned_mask & (1 << a) != 0 {
                continue;
            }
            let na = g.infoset(iid).num_actions();
            // never prune the last live action
            if na as u32 - (state.pruned_mask | (1 << a)).count_ones() == 0 {
                continue;
            }
            let visits = state.visits;
            self.infosets[iid as usize].last_check[a] = visits;
            self.try_start_total_prune(g, iid, a, t);
        }
        cands.clear();
        self.candidates = cands;
    }

    fn try_start_total_prune(&mut self, g: &Game, iid: InfosetId, a: usize, t: u64) {
        let inf = g.infoset(iid);
        let roots = self.average_weighted_roots(g, iid, a);
        let sub = self.subtree_best_response(g, iid, a, &roots, OppStrategy::Average);
        let nbv = sub.total;
        let sum_cfv = self.infosets[iid as usize].cum_cfv;

        if t as f64 * nbv > sum_cfv {
            return;
        }
        let duration = prune_duration(sum_cfv, t, nbv, inf.action_bounds[a].upper, inf.bounds.lower);
        if duration < 1 {
            return;
        }

        let reach_cap = inf.chance_reach_sum.min(1.0);
        let margin = reach_cap * (inf.action_bounds[a].upper - inf.bounds.lower);
        let cum_snapshot: Vec<(InfosetId, Vec<f64>)> = inf.opp_straddlers[a]
            .iter()
            .map(|&k| (k, self.infosets[k as usize].cum.clone()))
            .collect();
        let rec = PruneRecord {
            infoset: iid,
            action: a as u8,
            owner: inf.owner,
            alive: true,
            gen: 0,
            t0: t,
            chain_start: t,
            banked: t as f64 * nbv,
            cfv_snapshot: self.infosets[iid as usize].cum_cfv,
            expiry_hint: t.saturating_add(duration),
            margin,
            window_reach: Vec::new(),
            span_avg_own: vec![0.0; inf.members.len()],
            cum_snapshot,
            avg_discarded: false,
        };
        let rid = self.alloc_record(rec);
        let gen = self.records[rid as usize].gen;

        // Free the branch: the root entry plus every descendant infoset.
        let mut freed = 1u64;
        let state = &mut self.infosets[iid as usize];
        state.pruned_mask |= 1 << a;
        state.regret_freed_mask |= 1 << a;
        state.record[a] = rid;
        for &did in &inf.descendants[a] {
            let did = did as usize;
            // Subsume any records rooted below: the resume reset rewrites
            // the whole branch's regrets, so only the opponent's frozen
            // average mass needs replaying before the bookkeeping goes.
            let nested: Vec<u32> = self.infosets[did]
                .record
                .iter()
                .copied()
                .filter(|&r| r != NONE_REC)
                .collect();
            for nrid in nested {
                let nrec = self.records[nrid as usize].clone();
                self.replay_opponent_average(g, &nrec);
                self.kill_record(nrid as usize);
            }
            let st = &mut self.infosets[did];
            st.pruned_mask = 0;
            st.record.iter_mut().for_each(|r| *r = NONE_REC);
            if st.regret_alloc {
                let na = st.regrets.len() as u64;
                let already = st.regret_freed_mask.count_ones() as u64;
                freed += na - already;
                self.ledger.freed_regret_entries += na - already;
                st.regret_freed_mask = 0;
                st.regrets = Vec::new();
                st.pending = Vec::new();
                st.regret_alloc = false;
            }
        }
        self.ledger.freed_regret_entries += 1;
        self.ledger.total_prune_starts += 1;
        self.ledger.push_event(DiscardEvent {
            iteration: t,
            infoset: iid,
            action: a,
            kind: DiscardKind::RegretFree,
            entries: freed,
        });

        if margin > 0.0 {
            let slack = sum_cfv - t as f64 * nbv;
            let extra = ((slack / margin).floor() as u64).max(1);
            self.heaps[inf.owner.index()].push(Reverse((t + extra, rid, gen)));
        }
    }

    /// Discard the cumulative strategy of branches whose average reach
    /// probability has fallen under `C / sqrt(T)`. Run at checkpoint
    /// cadence; the reach is computed from the stored averages along the
    /// owner's decision chain.
    pub(super) fn run_avg_discard_sweep(&mut self) {
        if self.cfg.prune != PruneMode::TotalRbp || self.cfg.avg_discard_c <= 0.0 || self.t == 0 {
            return;
        }
        let game = self.game.clone();
        let threshold = self.cfg.avg_discard_c / (self.t as f64).sqrt();
        for rid in 0..self.records.len() {
            let rec = &self.records[rid];
            if !rec.alive || rec.avg_discarded {
                continue;
            }
            let iid = rec.infoset;
            let a = rec.action as usize;
            let inf = game.infoset(iid);
            let mut reach = self.avg_prob(iid, a);
            for &(j, b) in &inf.own_chain {
                reach *= self.avg_prob(j, b as usize);
            }
            if reach > threshold {
                continue;
            }

            let t = self.t;
            let mut entries = 0u64;
            let state = &mut self.infosets[iid as usize];
            if state.avg_freed_mask & (1 << a) == 0 {
                state.cum[a] = 0.0;
                state.avg_freed_mask |= 1 << a;
                entries += 1;
            }
            for &did in &inf.descendants[a] {
                let st = &mut self.infosets[did as usize];
                if st.avg_alloc {
                    let na = st.cum.len() as u64;
                    let already = st.avg_freed_mask.count_ones() as u64;
                    entries += na - already;
                    st.avg_freed_mask = 0;
                    st.cum = Vec::new();
                    st.avg_alloc = false;
                }
            }
            self.ledger.freed_avg_entries += entries;
            self.ledger.total_avg_discards += 1;
            self.records[rid].avg_discarded = true;
            self.ledger.push_event(DiscardEvent {
                iteration: t,
                infoset: iid,
                action: a,
                kind: DiscardKind::AvgDiscard,
                entries,
            });
        }
    }

    /// Replay the opponent's average-strategy mass inside a closing
    /// branch. While the branch was pruned neither traversal entered it,
    /// so the opponent's cumulative strategy there received no updates
    /// even though their (frozen) strategy kept its own reach weight.
    /// The aggregate update per opponent infoset is the span's weighted
    /// own-reach sum times the frozen strategy; without it, the stored
    /// average stops being realization-equivalent to the play and the
    /// two-epsilon equilibrium bound breaks.
    fn replay_opponent_average(&mut self, g: &Game, rec: &PruneRecord) {
        if rec.span_avg_own.iter().all(|&w| w == 0.0) {
            return;
        }
        if rec.avg_discarded {
            // the branch's average mass was deliberately traded away
            return;
        }
        self.traversal_serial += 1;
        let inf = g.infoset(rec.infoset);
        for (pos, &m) in inf.members.iter().enumerate() {
            let w = rec.span_avg_own[pos];
            if w != 0.0 {
                self.replay_spread(g, g.child(m, rec.action as usize), w, rec.owner, &rec.cum_snapshot);
            }
        }
    }

    fn replay_spread(
        &mut self,
        g: &Game,
        h: HistoryId,
        w: f64,
        me: Player,
        snapshot: &[(InfosetId, Vec<f64>)],
    ) {
        self.counter.solver_hit(h);
        match g.actor(h) {
            Actor::Terminal => {}
            // own reach carries no chance factors and none of the branch
            // owner's action probabilities
            Actor::Chance => {
                for a in 0..g.num_children(h) {
                    self.replay_spread(g, g.child(h, a), w, me, snapshot);
                }
            }
            Actor::Player(p) if p == me => {
                for a in 0..g.num_children(h) {
                    self.replay_spread(g, g.child(h, a), w, me, snapshot);
                }
            }
            Actor::Player(_) => {
                let k = g.infoset_id(h).unwrap();
                let na = g.num_children(h);
                let mut probs = [0.0; crate::game::MAX_ACTIONS];
                let straddler = snapshot.binary_search_by_key(&k, |e| e.0).is_ok();
                if let Ok(pos) = snapshot.binary_search_by_key(&k, |e| e.0) {
                    // straddling infoset: its strategy kept evolving via
                    // outside members and its average mass kept arriving
                    // normally; use the window diff for propagation only.
                    let st = &self.infosets[k as usize];
                    let base = &snapshot[pos].1;
                    let sum: f64 = (0..na).map(|b| st.cum[b] - base[b]).sum();
                    if sum > 0.0 {
                        for b in 0..na {
                            probs[b] = (st.cum[b] - base[b]) / sum;
                        }
                    }
                } else {
                    let st = &self.infosets[k as usize];
                    regret_matching_into(&st.regrets, !st.pruned_mask, &mut probs[..na]);
                }
                if !straddler {
                    let st = &mut self.infosets[k as usize];
                    if st.avg_alloc && st.stamp != self.traversal_serial {
                        st.stamp = self.traversal_serial;
                        let freed = st.avg_freed_mask;
                        for b in 0..na {
                            if freed & (1 << b) == 0 {
                                st.cum[b] += w * probs[b];
                            }
                        }
                    }
                }
                for b in 0..na {
                    let wb = w * probs[b];
                    if wb != 0.0 {
                        self.replay_spread(g, g.child(h, b), wb, me, snapshot);
                    }
                }
            }
        }
    }

    /// Replay the opponent-average mass of every open record and reset
    /// the accumulators, re-snapshotting straddler rows so later windows
    /// diff against the flushed state. Run before anything reads the
    /// average profile (evaluation, discard gates, branch checks), so the
    /// stored averages stay realization-equivalent to the play.
    pub(super) fn flush_open_average_replays(&mut self, g: &Game) {
        for rid in 0..self.records.len() {
            if !self.records[rid].alive {
                continue;
            }
            if self.records[rid].span_avg_own.iter().all(|&w| w == 0.0) {
                continue;
            }
            let rec = self.records[rid].clone();
            self.replay_opponent_average(g, &rec);
            let ids: Vec<InfosetId> = self.records[rid].cum_snapshot.iter().map(|e| e.0).collect();
            let fresh: Vec<(InfosetId, Vec<f64>)> = ids
                .into_iter()
                .map(|k| (k, self.infosets[k as usize].cum.clone()))
                .collect();
            let r = &mut self.records[rid];
            r.span_avg_own.iter_mut().for_each(|w| *w = 0.0);
            r.cum_snapshot = fresh;
        }
    }

    /// Entry weights for a branch check: for each member of the infoset,
    /// the opponent-and-chance reach of taking `action` there under the
    /// opponent's *average* strategy. Each ancestor consulted counts as a
    /// touch.
    fn average_weighted_roots(&mut self, g: &Game, iid: InfosetId, action: usize) -> Vec<(HistoryId, f64)> {
        let inf = g.infoset(iid);
        let owner = inf.owner;
        let mut roots = Vec::with_capacity(inf.members.len());
        for &m in &inf.members {
            let mut w = 1.0;
            let mut cur = m;
            while let Some((p, pa)) = g.parent(cur) {
                self.counter.solver_hit(p);
                match g.actor(p) {
                    Actor::Chance => w *= g.chance_probs(p)[pa],
                    Actor::Player(q) if q != owner => {
                        w *= self.avg_prob(g.infoset_id(p).unwrap(), pa);
                    }
                    _ => {}
                }
                if w == 0.0 {
                    break;
                }
                cur = p;
            }
            roots.push((g.child(m, action), w));
        }
        roots
    }

    /// Best response of the branch owner over D(I,a), against either the
    /// opponent's average strategy (total mode) or their current strategy
    /// (interval catch-up).
    fn subtree_best_response(
        &mut self,
        g: &Game,
        iid: InfosetId,
        action: usize,
        roots: &[(HistoryId, f64)],
        opp_kind: OppStrategy<'_>,
    ) -> SubtreeValues {
        let inf = g.infoset(iid);
        let mut order = inf.descendants[action].clone();
        order.sort_by_key(|&i| (Reverse(g.infoset(i).own_depth), i));

        let Solver {
            infosets,
            scratch,
            counter,
            ..
        } = self;
        let infosets: &Vec<InfosetState> = infosets;
        let opp_avg = |j: InfosetId, out: &mut [f64]| {
            let st = &infosets[j as usize];
            let na = g.infoset(j).num_actions();
            if st.avg_alloc {
                let sum: f64 = st.cum.iter().sum();
                if sum > 0.0 {
                    for a in 0..na {
                        out[a] = st.cum[a] / sum;
                    }
                    return;
                }
            }
            let u = 1.0 / na as f64;
            out[..na].iter_mut().for_each(|p| *p = u);
        };
        let opp_window = |j: InfosetId, out: &mut [f64]| {
            let st = &infosets[j as usize];
            let na = g.infoset(j).num_actions();
            if let OppStrategy::Window(snapshot) = opp_kind {
                if let Ok(pos) = snapshot.binary_search_by_key(&j, |e| e.0) {
                    // straddler: window average from the cumulative diff;
                    // an all-zero diff means unreached in the window, so
                    // the branch below carries no weight at all.
                    let base = &snapshot[pos].1;
                    let diff: Vec<f64> = (0..na).map(|b| st.cum[b] - base[b]).collect();
                    let sum: f64 = diff.iter().sum();
                    if sum > 0.0 {
                        for b in 0..na {
                            out[b] = diff[b] / sum;
                        }
                    } else {
                        out[..na].iter_mut().for_each(|p| *p = 0.0);
                    }
                    return;
                }
            }
            // fully inside the branch: frozen, current strategy is exact
            regret_matching_into(&st.regrets, !st.pruned_mask, &mut out[..na]);
        };
        let opp: &dyn Fn(InfosetId, &mut [f64]) = match opp_kind {
            OppStrategy::Average => &opp_avg,
            OppStrategy::Window(_) => &opp_window,
        };

        let mut sink = TouchSink {
            total: &mut counter.total,
            watch: counter.mask.as_deref().map(|m| (m, &mut counter.watched)),
        };
        subforest_best_response(g, inf.owner, roots, &order, opp, scratch, &mut sink)
    }
}

#[derive(Clone, Copy)]
enum OppStrategy<'a> {
    Average,
    Window(&'a [(InfosetId, Vec<f64>)]),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_gate_examples() {
        assert!(partial_prune_gate(&ReachProbs { pi_self: 0.3, pi_opp: 0.0 }));
        assert!(!partial_prune_gate(&ReachProbs { pi_self: 0.3, pi_opp: 1e-300 }));
        assert!(!partial_prune_gate(&ReachProbs { pi_self: 1.0, pi_opp: 1.0 }));
    }

    #[test]
    fn prune_duration_examples() {
        // sum v = 50, T = 100, NBV = -1, range 10 -> floor(150 / 10) = 15
        assert_eq!(prune_duration(50.0, 100, -1.0, 8.0, -2.0), 15);
        // boundary: T * NBV = sum v exactly -> zero iterations
        assert_eq!(prune_duration(100.0, 100, 1.0, 8.0, -2.0), 0);
        // condition failed entirely
        assert_eq!(prune_duration(-10.0, 100, 1.0, 8.0, -2.0), 0);
        // zero payoff range saturates
        assert!(prune_duration(50.0, 100, -1.0, 3.0, 3.0) > 1 << 40);
    }

    #[test]
    fn window_inequality_linear_arithmetic() {
        // Start ten below; the pessimistic side gains 1.0 per iteration
        // while the value sum gains 0.5: the window survives exactly 20
        // more iterations.
        let mut banked = -10.0;
        let mut sum_cfv = 0.0;
        let mut lived = 0;
        loop {
            banked += 1.0;
            sum_cfv += 0.5;
            if !interval_window_live(banked, sum_cfv) {
                break;
            }
            lived += 1;
        }
        assert_eq!(lived, 20);
    }

    #[test]
    fn prefix_bound_solves_square() {
        // chain start 100, C = 0.1: permitted once T >= (100 / 0.1)^2.
        assert!(!weighted_prefix_bound_holds(100, 999_999, 0.1, false));
        assert!(weighted_prefix_bound_holds(100, 1_000_000, 0.1, false));
        // C = 0 never discards
        assert!(!weighted_prefix_bound_holds(1, u64::MAX >> 16, 0.0, false));
        // linear weighting reaches the threshold much sooner
        assert!(weighted_prefix_bound_holds(100, 3000, 0.1, true));
        assert!(!weighted_prefix_bound_holds(100, 2000, 0.1, true));
    }
}
