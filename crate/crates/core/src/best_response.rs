//! Counterfactual best responses, best-response values, and
//! exploitability.
//!
//! The core routine computes, for one player against a fixed opponent
//! strategy, the counterfactual value of every owned (infoset, action)
//! pair in a subforest, maximizing at every owned infoset — including
//! ones the player's own earlier actions would never reach. The same
//! routine serves the exploitability evaluator (rooted at the full game)
//! and the pruning module's subtree checks (rooted at the entry points of
//! a pruned branch, with arbitrary entry weights).

use crate::game::{Actor, Game, HistoryId, InfosetId, Player, MAX_ACTIONS};
use crate::regret::{normalize_average_into, potential_bound};

/// A complete behavioral strategy profile: one probability vector per
/// infoset, for both players.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    probs: Vec<Vec<f64>>,
}

impl Profile {
    pub fn new(probs: Vec<Vec<f64>>) -> Self {
        Profile { probs }
    }

    /// Uniform strategy at every infoset.
    pub fn uniform(game: &Game) -> Self {
        Profile {
            probs: game
                .infosets()
                .iter()
                .map(|i| vec![1.0 / i.num_actions() as f64; i.num_actions()])
                .collect(),
        }
    }

    /// Build from cumulative strategy rows (normalizer zero -> uniform).
    pub fn from_cumulative(game: &Game, cum: &[Vec<f64>]) -> Self {
        assert_eq!(cum.len(), game.num_infosets());
        let mut probs = Vec::with_capacity(cum.len());
        for (i, row) in cum.iter().enumerate() {
            let na = game.infoset(i as InfosetId).num_actions();
            let mut out = vec![0.0; na];
            if row.is_empty() {
                // discarded storage: treated as never played
                let u = 1.0 / na as f64;
                out.iter_mut().for_each(|p| *p = u);
            } else {
                normalize_average_into(row, &mut out);
            }
            probs.push(out);
        }
        Profile { probs }
    }

    #[inline]
    pub fn get(&self, i: InfosetId) -> &[f64] {
        &self.probs[i as usize]
    }

    pub fn set(&mut self, i: InfosetId, probs: Vec<f64>) {
        self.probs[i as usize] = probs;
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }
}

/// Result of a counterfactual best-response computation for one player.
#[derive(Debug, Clone)]
pub struct CbrResult {
    pub player: Player,
    /// Argmax action per owned infoset (indexed by infoset id; foreign
    /// infosets hold `usize::MAX`). Ties break to the lowest index.
    pub argmax: Vec<usize>,
    /// Counterfactual value of each (infoset, action), owned infosets only.
    pub cbv_action: Vec<Vec<f64>>,
    /// Counterfactual value of each owned infoset (max over actions).
    pub cbv_infoset: Vec<f64>,
    /// Root expected utility of the best response against the opponent
    /// strategy.
    pub value: f64,
}

impl CbrResult {
    /// The best response as a pure behavioral strategy, merged over a base
    /// profile for the opponent's infosets.
    pub fn as_profile(&self, game: &Game, opponent_part: &Profile) -> Profile {
        let mut probs: Vec<Vec<f64>> = opponent_part.rows().to_vec();
        for &iid in game.player_infosets(self.player) {
            let na = game.infoset(iid).num_actions();
            let mut row = vec![0.0; na];
            row[self.argmax[iid as usize]] = 1.0;
            probs[iid as usize] = row;
        }
        Profile { probs }
    }
}

/// Reusable buffers for best-response passes.
#[derive(Debug, Default)]
pub struct CbrScratch {
    reach: Vec<f64>,
    val: Vec<f64>,
    reach_epoch: Vec<u32>,
    val_epoch: Vec<u32>,
    argmax: Vec<u8>,
    epoch: u32,
}

impl CbrScratch {
    pub fn for_game(game: &Game) -> Self {
        let n = game.num_histories();
        CbrScratch {
            reach: vec![0.0; n],
            val: vec![0.0; n],
            reach_epoch: vec![0; n],
            val_epoch: vec![0; n],
            argmax: vec![0; game.num_infosets()],
            epoch: 0,
        }
    }

    fn ensure(&mut self, game: &Game) {
        if self.reach.len() != game.num_histories() || self.argmax.len() != game.num_infosets() {
            *self = CbrScratch::for_game(game);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.reach_epoch.iter_mut().for_each(|e| *e = u32::MAX);
            self.val_epoch.iter_mut().for_each(|e| *e = u32::MAX);
            self.epoch = 1;
        }
    }
}

/// Per-infoset output of a subforest best response.
#[derive(Debug, Clone)]
pub struct SubtreeValues {
    /// (infoset, per-action counterfactual value, infoset value, argmax).
    pub infosets: Vec<(InfosetId, Vec<f64>, f64, usize)>,
    /// Weighted value summed over the entry points.
    pub total: f64,
}

/// Touch accounting handle threaded through evaluation passes: a total
/// counter plus an optional watched-region counter.
pub(crate) struct TouchSink<'a> {
    pub total: &'a mut u64,
    pub watch: Option<(&'a [bool], &'a mut u64)>,
}

impl TouchSink<'_> {
    #[inline]
    fn hit(&mut self, h: HistoryId) {
        *self.total += 1;
        if let Some((mask, w)) = &mut self.watch {
            if mask[h as usize] {
                **w += 1;
            }
        }
    }
}

/// Maximizing player's values over a subforest.
///
/// `roots` are entry histories with their opponent-and-chance reach
/// weights; `order` lists the owner's infosets in the subforest, deepest
/// (by own-decision count) first; `opp` yields the opponent's strategy.
/// Every history visited bumps `touches` once per pass.
pub(crate) fn subforest_best_response(
    game: &Game,
    owner: Player,
    roots: &[(HistoryId, f64)],
    order: &[InfosetId],
    opp: &dyn Fn(InfosetId, &mut [f64]),
    scratch: &mut CbrScratch,
    sink: &mut TouchSink<'_>,
) -> SubtreeValues {
    scratch.ensure(game);
    for &(h, w) in roots {
        if w != 0.0 {
            spread_reach(game, owner, h, w, opp, scratch, sink);
        }
    }

    let mut infosets = Vec::with_capacity(order.len());
    for &iid in order {
        let inf = game.infoset(iid);
        debug_assert_eq!(inf.owner, owner);
        let na = inf.num_actions();
        let mut cbv = vec![0.0; na];
        for &m in &inf.members {
            // Members outside the subforest (or with zero reach) carry no
            // weight and are skipped entirely.
            if scratch.reach_epoch[m as usize] != scratch.epoch {
                continue;
            }
            let w = scratch.reach[m as usize];
            for (a, c) in cbv.iter_mut().enumerate() {
                *c += w * eval(game, owner, game.child(m, a), opp, scratch, sink);
            }
        }
        let mut best = 0usize;
        for a in 1..na {
            if cbv[a] > cbv[best] {
                best = a;
            }
        }
        scratch.argmax[iid as usize] = best as u8;
        let v = cbv[best];
        infosets.push((iid, cbv, v, best));
    }

    let mut total = 0.0;
    for &(h, w) in roots {
        if w != 0.0 {
            total += w * eval(game, owner, h, opp, scratch, sink);
        }
    }
    SubtreeValues { infosets, total }
}

fn spread_reach(
    game: &Game,
    owner: Player,
    h: HistoryId,
    w: f64,
    opp: &dyn Fn(InfosetId, &mut [f64]),
    scratch: &mut CbrScratch,
    sink: &mut TouchSink<'_>,
) {
    sink.hit(h);
    scratch.reach_epoch[h as usize] = scratch.epoch;
    scratch.reach[h as usize] = w;
    match game.actor(h) {
        Actor::Terminal => {}
        Actor::Chance => {
            for a in 0..game.num_children(h) {
                let p = game.chance_probs(h)[a];
                if w * p != 0.0 {
                    spread_reach(game, owner, game.child(h, a), w * p, opp, scratch, sink);
                }
            }
        }
        Actor::Player(p) if p == owner => {
            for a in 0..game.num_children(h) {
                spread_reach(game, owner, game.child(h, a), w, opp, scratch, sink);
            }
        }
        Actor::Player(_) => {
            let iid = game.infoset_id(h).unwrap();
            let mut probs = [0.0; MAX_ACTIONS];
            opp(iid, &mut probs);
            for a in 0..game.num_children(h) {
                if w * probs[a] != 0.0 {
                    spread_reach(game, owner, game.child(h, a), w * probs[a], opp, scratch, sink);
                }
            }
        }
    }
}

fn eval(
    game: &Game,
    owner: Player,
    h: HistoryId,
    opp: &dyn Fn(InfosetId, &mut [f64]),
    scratch: &mut CbrScratch,
    sink: &mut TouchSink<'_>,
) -> f64 {
    if scratch.val_epoch[h as usize] == scratch.epoch {
        return scratch.val[h as usize];
    }
    sink.hit(h);
    let v = match game.actor(h) {
        Actor::Terminal => game.terminal_utility(h, owner),
        Actor::Chance => {
            let mut v = 0.0;
            for a in 0..game.num_children(h) {
                v += game.chance_probs(h)[a] * eval(game, owner, game.child(h, a), opp, scratch, sink);
            }
            v
        }
        Actor::Player(p) if p == owner => {
            let iid = game.infoset_id(h).unwrap();
            let a = scratch.argmax[iid as usize] as usize;
            eval(game, owner, game.child(h, a), opp, scratch, sink)
        }
        Actor::Player(_) => {
            let iid = game.infoset_id(h).unwrap();
            let mut probs = [0.0; MAX_ACTIONS];
            opp(iid, &mut probs);
            let mut v = 0.0;
            for a in 0..game.num_children(h) {
                if probs[a] != 0.0 {
                    v += probs[a] * eval(game, owner, game.child(h, a), opp, scratch, sink);
                }
            }
            v
        }
    };
    scratch.val_epoch[h as usize] = scratch.epoch;
    scratch.val[h as usize] = v;
    v
}

/// Owner's infosets deepest-first: a valid processing order for
/// [`subforest_best_response`] over the whole game.
pub(crate) fn full_order(game: &Game, player: Player) -> Vec<InfosetId> {
    let mut order: Vec<InfosetId> = game.player_infosets(player).to_vec();
    order.sort_by_key(|&i| std::cmp::Reverse(game.infoset(i).own_depth));
    order
}

/// Exact counterfactual best response for `player` against the opponent
/// half of `opponent_strategy`.
///
/// Single bottom-up pass; deterministic argmax tie-break to the lowest
/// action index. The result maximizes counterfactual value at every owned
/// infoset, including infosets unreachable under the player's own play.
pub fn compute_cbr(game: &Game, opponent_strategy: &Profile, player: Player) -> CbrResult {
    let mut touches = 0u64;
    compute_cbr_counted(game, opponent_strategy, player, &mut CbrScratch::default(), &mut touches)
}

pub(crate) fn compute_cbr_counted(
    game: &Game,
    opponent_strategy: &Profile,
    player: Player,
    scratch: &mut CbrScratch,
    touches: &mut u64,
) -> CbrResult {
    let order = full_order(game, player);
    let opp = |iid: InfosetId, out: &mut [f64]| {
        let row = opponent_strategy.get(iid);
        out[..row.len()].copy_from_slice(row);
    };
    let mut sink = TouchSink {
        total: touches,
        watch: None,
    };
    let sub = subforest_best_response(game, player, &[(0, 1.0)], &order, &opp, scratch, &mut sink);

    let n = game.num_infosets();
    let mut argmax = vec![usize::MAX; n];
    let mut cbv_action = vec![Vec::new(); n];
    let mut cbv_infoset = vec![f64::NAN; n];
    for (iid, cbv, v, best) in sub.infosets {
        argmax[iid as usize] = best;
        debug_assert_eq!(v, cbv.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        cbv_action[iid as usize] = cbv;
        cbv_infoset[iid as usize] = v;
    }
    CbrResult {
        player,
        argmax,
        cbv_action,
        cbv_infoset,
        value: sub.total,
    }
}

/// Policy hook for the relaxation slot of a near counterfactual best
/// response: produces the allowed per-infoset potential `x` given the
/// iteration count. The only shipped policy is exact (`x = 0`), which
/// makes the near best response coincide with the exact one.
pub struct NearCbrPolicy {
    selector: Box<dyn Fn(&crate::game::Infoset, u64) -> f64 + Send + Sync>,
}

impl NearCbrPolicy {
    /// `x = 0` everywhere: the exact counterfactual best response.
    pub fn exact() -> Self {
        NearCbrPolicy {
            selector: Box::new(|_, _| 0.0),
        }
    }

    /// Custom relaxation rule; values are validated against the cap
    /// `Delta(I)^2 |A(I)| T` when used.
    pub fn custom(f: impl Fn(&crate::game::Infoset, u64) -> f64 + Send + Sync + 'static) -> Self {
        NearCbrPolicy { selector: Box::new(f) }
    }

    pub fn x_for(&self, infoset: &crate::game::Infoset, t: u64) -> f64 {
        (self.selector)(infoset, t)
    }
}

impl Default for NearCbrPolicy {
    fn default() -> Self {
        NearCbrPolicy::exact()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NearCbrError {
    #[error("policy produced x = {x} for infoset {infoset} outside [0, {bound}]")]
    PolicyOutOfRange { infoset: InfosetId, x: f64, bound: f64 },
}

/// Near counterfactual best response after `t` iterations.
///
/// The policy only widens the set of admissible strategies; the exact
/// best response is admissible for every valid policy, and is what this
/// returns. Policies producing a relaxation outside `[0, Delta(I)^2
/// |A(I)| t]` are rejected.
pub fn near_cbr(
    game: &Game,
    opponent_strategy: &Profile,
    player: Player,
    t: u64,
    policy: &NearCbrPolicy,
) -> Result<CbrResult, NearCbrError> {
    assert!(t >= 1, "near_cbr requires at least one completed iteration");
    for &iid in game.player_infosets(player) {
        let inf = game.infoset(iid);
        let x = policy.x_for(inf, t);
        let bound = potential_bound(inf, t);
        if !(0.0..=bound).contains(&x) {
            return Err(NearCbrError::PolicyOutOfRange { infoset: iid, x, bound });
        }
    }
    Ok(compute_cbr(game, opponent_strategy, player))
}

/// Average exploitability of a profile: the mean of the two players'
/// best-response gains. Zero exactly at a Nash equilibrium; always
/// nonnegative up to evaluation rounding.
pub fn exploitability(game: &Game, profile: &Profile) -> f64 {
    let mut touches = 0u64;
    exploitability_counted(game, profile, &mut CbrScratch::default(), &mut touches)
}

pub(crate) fn exploitability_counted(
    game: &Game,
    profile: &Profile,
    scratch: &mut CbrScratch,
    touches: &mut u64,
) -> f64 {
    let br1 = compute_cbr_counted(game, profile, Player::P1, scratch, touches).value;
    let br2 = compute_cbr_counted(game, profile, Player::P2, scratch, touches).value;
    let e = (br1 + br2) / 2.0;
    debug_assert!(e >= -1e-10, "exploitability {e} below zero");
    e
}

/// Expected utility of a full profile for one player.
pub fn expected_value(game: &Game, profile: &Profile, player: Player) -> f64 {
    fn rec(game: &Game, profile: &Profile, player: Player, h: HistoryId) -> f64 {
        match game.actor(h) {
            Actor::Terminal => game.terminal_utility(h, player),
            Actor::Chance => {
                let mut v = 0.0;
                for a in 0..game.num_children(h) {
                    v += game.chance_probs(h)[a] * rec(game, profile, player, game.child(h, a));
                }
                v
            }
            Actor::Player(_) => {
                let iid = game.infoset_id(h).unwrap();
                let probs = profile.get(iid);
                let mut v = 0.0;
                for a in 0..game.num_children(h) {
                    if probs[a] != 0.0 {
                        v += probs[a] * rec(game, profile, player, game.child(h, a));
                    }
                }
                v
            }
        }
    }
    rec(game, profile, player, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{build_game, ActionLabel, GameBuilder, GameKind, PokerSpec};

    fn one_decision_game() -> Game {
        let mut b = GameBuilder::new(GameKind::Poker(PokerSpec::kuhn()));
        let root = b.player(
            None,
            Player::P1,
            "root",
            vec![ActionLabel::Other("l".into()), ActionLabel::Other("r".into())],
        );
        b.terminal_zs(Some((root, 0)), 1.0);
        b.terminal_zs(Some((root, 1)), 0.0);
        b.finish().unwrap()
    }

    #[test]
    fn cbr_picks_single_max() {
        let g = one_decision_game();
        let cbr = compute_cbr(&g, &Profile::uniform(&g), Player::P1);
        assert_eq!(cbr.argmax[0], 0);
        assert_eq!(cbr.cbv_infoset[0], 1.0);
        assert_eq!(cbr.cbv_action[0], vec![1.0, 0.0]);
        assert_eq!(cbr.value, 1.0);
    }

    #[test]
    fn cbv_infoset_is_max_over_actions() {
        let g = build_game(&GameKind::Kuhn).unwrap();
        let cbr = compute_cbr(&g, &Profile::uniform(&g), Player::P1);
        for &iid in g.player_infosets(Player::P1) {
            let i = iid as usize;
            let max = cbr.cbv_action[i].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(cbr.cbv_infoset[i], max);
        }
    }

    #[test]
    fn cbr_matches_pure_strategy_enumeration_on_kuhn() {
        let g = build_game(&GameKind::Kuhn).unwrap();
        let uniform = Profile::uniform(&g);
        let p1_infosets = g.player_infosets(Player::P1).to_vec();
        assert_eq!(p1_infosets.len(), 6);

        // Enumerate all 2^6 pure strategies for P1, keep the best value.
        let mut best = f64::NEG_INFINITY;
        for mask in 0..64u32 {
            let mut profile = uniform.clone();
            for (k, &iid) in p1_infosets.iter().enumerate() {
                let a = ((mask >> k) & 1) as usize;
                let mut row = vec![0.0; 2];
                row[a] = 1.0;
                profile.set(iid, row);
            }
            best = best.max(expected_value(&g, &profile, Player::P1));
        }

        let cbr = compute_cbr(&g, &uniform, Player::P1);
        assert!((cbr.value - best).abs() < 1e-12, "cbr {} vs brute {best}", cbr.value);
    }

    /// The alpha-parameterized analytic equilibrium, mapped onto our
    /// action indexing (unfaced: [check, bet]; facing: [fold, call]).
    pub(crate) fn kuhn_equilibrium(game: &Game, alpha: f64) -> Profile {
        let mut profile = Profile::uniform(game);
        for (iid, inf) in game.infosets().iter().enumerate() {
            // Recover (rank, betting line) from the first member.
            let mut h = inf.members[0];
            let mut line = Vec::new();
            let mut rank = 0u32;
            while let Some((p, a)) = game.parent(h) {
                match game.actor(p) {
                    Actor::Chance => {
                        // deal index -> (p1 rank, p2 rank) in lexicographic order
                        let deals = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
                        let (r1, r2) = deals[a];
                        rank = if inf.owner == Player::P1 { r1 } else { r2 };
                    }
                    Actor::Player(_) => line.push(a),
                    Actor::Terminal => unreachable!(),
                }
                h = p;
            }
            line.reverse();
            let bet = |p: f64| vec![1.0 - p, p];
            let call = |p: f64| vec![1.0 - p, p];
            let row = match (inf.owner, line.as_slice(), rank) {
                (Player::P1, [], 0) => bet(alpha),
                (Player::P1, [], 1) => bet(0.0),
                (Player::P1, [], 2) => bet(3.0 * alpha),
                (Player::P1, [0, 1], 0) => call(0.0),
                (Player::P1, [0, 1], 1) => call(alpha + 1.0 / 3.0),
                (Player::P1, [0, 1], 2) => call(1.0),
                (Player::P2, [0], 0) => bet(1.0 / 3.0),
                (Player::P2, [0], 1) => bet(0.0),
                (Player::P2, [0], 2) => bet(1.0),
                (Player::P2, [1], 0) => call(0.0),
                (Player::P2, [1], 1) => call(1.0 / 3.0),
                (Player::P2, [1], 2) => call(1.0),
                other => panic!("unexpected infoset shape {other:?}"),
            };
            profile.set(iid as InfosetId, row);
        }
        profile
    }

    #[test]
    fn kuhn_equilibrium_has_zero_exploitability() {
        let g = build_game(&GameKind::Kuhn).unwrap();
        for alpha in [0.0, 0.2, 1.0 / 3.0] {
            let eq = kuhn_equilibrium(&g, alpha);
            let e = exploitability(&g, &eq);
            assert!(e.abs() < 1e-9, "alpha={alpha}: exploitability {e}");
            let v = expected_value(&g, &eq, Player::P1);
            assert!((v - (-1.0 / 18.0)).abs() < 1e-12, "alpha={alpha}: value {v}");
        }
    }

    #[test]
    fn uniform_leduc_profile_is_exploitable() {
        let g = build_game(&GameKind::Leduc).unwrap();
        let e = exploitability(&g, &Profile::uniform(&g));
        assert!(e > 0.1, "uniform profile should be clearly exploitable, got {e}");
    }

    #[test]
    fn exploitability_invariant_to_infoset_evaluation_order() {
        let g = build_game(&GameKind::Kuhn).unwrap();
        let profile = Profile::uniform(&g);
        let mut scratch = CbrScratch::for_game(&g);
        let mut touches = 0u64;
        let opp = |iid: InfosetId, out: &mut [f64]| {
            let row = profile.get(iid);
            out[..row.len()].copy_from_slice(row);
        };

        let mut order = full_order(&g, Player::P1);
        let mut sink = TouchSink { total: &mut touches, watch: None };
        let a = subforest_best_response(&g, Player::P1, &[(0, 1.0)], &order, &opp, &mut scratch, &mut sink);
        // Permute within equal depth: reverse the whole order of each depth class.
        order.sort_by_key(|&i| (std::cmp::Reverse(g.infoset(i).own_depth), std::cmp::Reverse(i)));
        let b = subforest_best_response(&g, Player::P1, &[(0, 1.0)], &order, &opp, &mut scratch, &mut sink);
        assert_eq!(a.total.to_bits(), b.total.to_bits());
    }

    #[test]
    fn cbr_beats_random_strategies() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for kind in [GameKind::Kuhn, GameKind::Leduc] {
            let g = build_game(&kind).unwrap();
            for _ in 0..50 {
                // random opponent profile and random candidate strategy
                let mut opp_profile = Profile::uniform(&g);
                let mut candidate = Profile::uniform(&g);
                for (iid, inf) in g.infosets().iter().enumerate() {
                    let mut row: Vec<f64> = (0..inf.num_actions()).map(|_| rng.gen::<f64>()).collect();
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|p| *p /= s);
                    opp_profile.set(iid as InfosetId, row.clone());
                    let mut row2: Vec<f64> = (0..inf.num_actions()).map(|_| rng.gen::<f64>()).collect();
                    let s2: f64 = row2.iter().sum();
                    row2.iter_mut().for_each(|p| *p /= s2);
                    candidate.set(iid as InfosetId, row2);
                }
                for player in [Player::P1, Player::P2] {
                    let cbr = compute_cbr(&g, &opp_profile, player);
                    let mut merged = opp_profile.clone();
                    for &iid in g.player_infosets(player) {
                        merged.set(iid, candidate.get(iid).to_vec());
                    }
                    let candidate_value = expected_value(&g, &merged, player);
                    assert!(
                        cbr.value >= candidate_value - 1e-10,
                        "{kind:?} {player}: cbr {} < candidate {candidate_value}",
                        cbr.value
                    );
                }
            }
        }
    }

    #[test]
    fn cbr_has_zero_counterfactual_regret() {
        // Independent route: recompute v(I,a) under the returned pure
        // strategy by direct summation over terminals.
        let g = build_game(&GameKind::Kuhn).unwrap();
        let opp_profile = kuhn_equilibrium(&g, 0.2);
        for player in [Player::P1, Player::P2] {
            let cbr = compute_cbr(&g, &opp_profile, player);
            let full = cbr.as_profile(&g, &opp_profile);

            // reach of every history split into (player's own, others)
            let n = g.num_histories();
            let mut own = vec![0.0; n];
            let mut others = vec![0.0; n];
            own[0] = 1.0;
            others[0] = 1.0;
            for h in 1..n as HistoryId {
                let (p, a) = g.parent(h).unwrap();
                let (po, pe) = (own[p as usize], others[p as usize]);
                match g.actor(p) {
                    Actor::Chance => {
                        own[h as usize] = po;
                        others[h as usize] = pe * g.chance_probs(p)[a];
                    }
                    Actor::Player(q) => {
                        let pr = full.get(g.infoset_id(p).unwrap())[a];
                        if q == player {
                            own[h as usize] = po * pr;
                            others[h as usize] = pe;
                        } else {
                            own[h as usize] = po;
                            others[h as usize] = pe * pr;
                        }
                    }
                    Actor::Terminal => unreachable!(),
                }
            }

            // v(I, a) = sum over members h and terminals z below h.a of
            // others(h) * pi(h.a -> z) * u(z); pi factor = own(z)*others(z)
            // divided by the reach at h.a, computed here by direct descent.
            for &iid in g.player_infosets(player) {
                let inf = g.infoset(iid);
                let mut v_actions = vec![0.0; inf.num_actions()];
                for &m in &inf.members {
                    for a in 0..inf.num_actions() {
                        let child = g.child(m, a);
                        v_actions[a] += others[m as usize] * descend(&g, &full, player, child);
                    }
                }
                let v_infoset: f64 = (0..inf.num_actions())
                    .map(|a| full.get(iid)[a] * v_actions[a])
                    .sum();
                for a in 0..inf.num_actions() {
                    assert!(
                        v_actions[a] <= v_infoset + 1e-10,
                        "infoset {iid} action {a}: positive counterfactual regret"
                    );
                }
            }
        }

        fn descend(g: &Game, profile: &Profile, player: Player, h: HistoryId) -> f64 {
            match g.actor(h) {
                Actor::Terminal => g.terminal_utility(h, player),
                Actor::Chance => (0..g.num_children(h))
                    .map(|a| g.chance_probs(h)[a] * descend(g, profile, player, g.child(h, a)))
                    .sum(),
                Actor::Player(_) => {
                    let probs = profile.get(g.infoset_id(h).unwrap());
                    (0..g.num_children(h))
                        .map(|a| probs[a] * descend(g, profile, player, g.child(h, a)))
                        .sum()
                }
            }
        }
    }

    #[test]
    fn near_cbr_exact_policy_matches_cbr() {
        let g = build_game(&GameKind::Kuhn).unwrap();
        let opp = Profile::uniform(&g);
        let cbr = compute_cbr(&g, &opp, Player::P1);
        let near = near_cbr(&g, &opp, Player::P1, 10, &NearCbrPolicy::exact()).unwrap();
        assert_eq!(near.value.to_bits(), cbr.value.to_bits());
        assert_eq!(near.argmax, cbr.argmax);
        for (a, b) in near.cbv_action.iter().zip(&cbr.cbv_action) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn near_cbr_rejects_out_of_range_policy() {
        let g = build_game(&GameKind::Kuhn).unwrap();
        let opp = Profile::uniform(&g);
        let policy = NearCbrPolicy::custom(|_, _| -1.0);
        assert!(near_cbr(&g, &opp, Player::P1, 10, &policy).is_err());
        // a policy at the cap is fine
        let policy = NearCbrPolicy::custom(|i, t| potential_bound(i, t));
        assert!(near_cbr(&g, &opp, Player::P1, 10, &policy).is_ok());
    }

    #[test]
    fn potential_bound_example() {
        // Delta = 4, |A| = 4, t = 25 -> 4^2 * 4 * 25 = 1600.
        let mut b = GameBuilder::new(GameKind::Poker(PokerSpec::kuhn()));
        let root = b.player(
            None,
            Player::P1,
            "root",
            (0..4).map(|k| ActionLabel::Other(format!("a{k}"))).collect(),
        );
        for (k, u) in [0.0, 4.0, 1.0, 2.0].iter().enumerate() {
            b.terminal_zs(Some((root, k)), *u);
        }
        let g = b.finish().unwrap();
        assert_eq!(potential_bound(g.infoset(0), 25), 1600.0);
        assert_eq!(crate::regret::theoretical_regret_bound(g.infoset(0), 100), 4.0 * 2.0 * 10.0);
    }
}
