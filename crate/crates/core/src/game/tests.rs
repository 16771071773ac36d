use super::*;

fn find_terminal(game: &Game, pred: impl Fn(&Game, HistoryId) -> bool) -> HistoryId {
    (0..game.num_histories() as HistoryId)
        .find(|&h| game.is_terminal(h) && pred(game, h))
        .expect("no terminal matching predicate")
}

/// Betting line of a history: the action labels below the root chance
/// node, as a compact string.
fn line_of(game: &Game, mut h: HistoryId) -> (usize, String) {
    let mut parts = Vec::new();
    let mut deal = 0;
    while let Some((p, a)) = game.parent(h) {
        match game.actor(p) {
            Actor::Chance => deal = a,
            Actor::Player(_) => {
                let label = &game.infoset(game.infoset_id(p).unwrap()).actions[a];
                parts.push(label.to_string());
            }
            Actor::Terminal => unreachable!(),
        }
        h = p;
    }
    parts.reverse();
    (deal, parts.concat())
}

fn leduc_deal_index(game: &Game, p1: u32, p2: u32, public: u32) -> usize {
    // Deals are enumerated lexicographically over feasible rank triples.
    let mut idx = 0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let mut counts = [0; 3];
                counts[a] += 1;
                counts[b] += 1;
                counts[c] += 1;
                if counts.iter().any(|&n| n > 2) {
                    continue;
                }
                if (a as u32, b as u32, c as u32) == (p1, p2, public) {
                    return idx;
                }
                idx += 1;
            }
        }
    }
    let _ = game;
    panic!("deal not found");
}

#[test]
fn build_is_deterministic() {
    for kind in [GameKind::Kuhn, GameKind::Leduc] {
        let a = build_game(&kind).unwrap();
        let b = build_game(&kind).unwrap();
        assert_eq!(dump_text(&a), dump_text(&b));
    }
}

#[test]
fn kuhn_structure() {
    let g = build_game(&GameKind::Kuhn).unwrap();
    assert_eq!(g.num_histories(), 55);
    assert_eq!(g.num_infosets(), 12);
    assert_eq!(g.total_entries(), 24);
    // Root is a chance node over the 6 ordered deals.
    assert_eq!(g.actor(0), Actor::Chance);
    assert_eq!(g.num_children(0), 6);
    for p in g.chance_probs(0) {
        assert!((p - 1.0 / 6.0).abs() < 1e-15);
    }
    // One-bet cap: every decision node has exactly two actions.
    for i in g.infosets() {
        assert_eq!(i.num_actions(), 2);
    }
}

#[test]
fn leduc_structure() {
    let g = build_game(&GameKind::Leduc).unwrap();
    assert_eq!(g.num_infosets(), 288);
    assert_eq!(g.total_entries(), 672);
    // 24 feasible rank triples at the root.
    assert_eq!(g.num_children(0), 24);
    let probs = g.chance_probs(0);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // All-distinct triples have weight 8/120, one-pair triples 4/120.
    let mut w8 = 0;
    let mut w4 = 0;
    for &p in probs {
        if (p - 8.0 / 120.0).abs() < 1e-15 {
            w8 += 1;
        } else if (p - 4.0 / 120.0).abs() < 1e-15 {
            w4 += 1;
        } else {
            panic!("unexpected deal weight {p}");
        }
    }
    assert_eq!((w8, w4), (6, 18));
    // Payoffs bounded by the maximum pot of 13 per player.
    assert_eq!(g.delta(), 26.0);
}

#[test]
fn leduc5_action_menu() {
    let g = build_game(&GameKind::Leduc5).unwrap();
    let max_round1 = g
        .infosets()
        .iter()
        .filter(|i| !i.members.iter().any(|&m| line_of(&g, m).1.contains('/')))
        .map(|i| i.num_actions())
        .max()
        .unwrap();
    // Facing a first-round bet: fold, call, and five raise sizes.
    assert_eq!(max_round1, 7);
    // Unfaced first decision: check plus five bet sizes.
    let root_infoset = g.infoset(g.infoset_id(g.child(0, 0)).unwrap());
    assert_eq!(root_infoset.num_actions(), 6);
}

#[test]
fn leduc_terminal_utilities() {
    let g = build_game(&GameKind::Leduc).unwrap();
    // Check-down both rounds: P1 K, P2 Q, public J -> P1 wins the ante.
    let deal = leduc_deal_index(&g, 2, 1, 0) ;
    let z = find_terminal(&g, |g, h| {
        let (d, line) = line_of(g, h);
        d == deal && line == "cccc"
    });
    assert_eq!(g.terminal_utility(z, Player::P1), 1.0);
    assert_eq!(g.terminal_utility(z, Player::P2), -1.0);

    // P2 folds to P1's round-1 bet: P1 wins the ante only.
    let z = find_terminal(&g, |g, h| {
        let (d, line) = line_of(g, h);
        d == deal && line == "b2f"
    });
    assert_eq!(g.terminal_utility(z, Player::P1), 1.0);

    // Both hold J, public Q, check-down: split.
    let deal = leduc_deal_index(&g, 0, 0, 1);
    let z = find_terminal(&g, |g, h| {
        let (d, line) = line_of(g, h);
        d == deal && line == "cccc"
    });
    assert_eq!(g.terminal_utility(z, Player::P1), 0.0);
    assert_eq!(g.terminal_utility(z, Player::P2), 0.0);

    // Pair with the public card beats a higher private card.
    let deal = leduc_deal_index(&g, 0, 2, 0); // P1 J, P2 K, public J
    let z = find_terminal(&g, |g, h| {
        let (d, line) = line_of(g, h);
        d == deal && line == "cccc"
    });
    assert_eq!(g.terminal_utility(z, Player::P1), 1.0);
}

#[test]
#[should_panic(expected = "non-terminal")]
fn terminal_utility_rejects_interior_history() {
    let g = build_game(&GameKind::Kuhn).unwrap();
    g.terminal_utility(0, Player::P1);
}

#[test]
fn kuhn_payoff_bounds_match_brute_force() {
    let g = build_game(&GameKind::Kuhn).unwrap();

    // Independent scan: min/max utility over all terminals below (I, a).
    let brute = |iid: InfosetId, a: usize| -> Bounds {
        let inf = g.infoset(iid);
        let owner = inf.owner;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for z in 0..g.num_histories() as HistoryId {
            if g.is_terminal(z) && g.is_below(z, iid, a) {
                let u = g.terminal_utility(z, owner);
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        Bounds { lower: lo, upper: hi }
    };

    for iid in 0..g.num_infosets() as InfosetId {
        let inf = g.infoset(iid);
        for a in 0..inf.num_actions() {
            let expect = brute(iid, a);
            let got = g.payoff_bounds(iid, a);
            assert_eq!(got.lower, expect.lower, "infoset {iid} action {a}");
            assert_eq!(got.upper, expect.upper, "infoset {iid} action {a}");
            assert!(got.lower <= got.upper);
        }
        assert_eq!(
            inf.bounds.upper,
            (0..inf.num_actions()).map(|a| inf.action_bounds[a].upper).fold(f64::NEG_INFINITY, f64::max)
        );
        assert_eq!(
            inf.bounds.lower,
            (0..inf.num_actions()).map(|a| inf.action_bounds[a].lower).fold(f64::INFINITY, f64::min)
        );
    }

    // Frozen values for the root infoset where P1 holds the lowest card:
    // betting can win at most the opponent's ante and lose the called bet.
    let jack_root = g.infoset_id(g.child(0, 0)).unwrap();
    let bet = g.payoff_bounds(jack_root, 1);
    assert_eq!((bet.lower, bet.upper), (-2.0, 1.0));
}

#[test]
fn leduc_bounds_within_max_pot_and_contain_terminals() {
    for kind in [GameKind::Kuhn, GameKind::Leduc] {
        let g = build_game(&kind).unwrap();
        for iid in 0..g.num_infosets() as InfosetId {
            let inf = g.infoset(iid);
            for a in 0..inf.num_actions() {
                let b = g.payoff_bounds(iid, a);
                assert!(b.lower >= -13.0 && b.upper <= 13.0);
                // exhaustive containment
                for z in 0..g.num_histories() as HistoryId {
                    if g.is_terminal(z) && g.is_below(z, iid, a) {
                        let u = g.terminal_utility(z, inf.owner);
                        assert!(u >= b.lower - 1e-12 && u <= b.upper + 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn built_games_validate_clean() {
    for kind in [GameKind::Kuhn, GameKind::Leduc] {
        let g = build_game(&kind).unwrap();
        let report = validate_game(&g);
        assert!(report.is_ok(), "{kind:?}: {report}");
    }
}

#[test]
fn validation_flags_zero_sum_breach() {
    let mut b = GameBuilder::new(GameKind::Poker(PokerSpec::kuhn()));
    let root = b.player(
        None,
        Player::P1,
        "root",
        vec![ActionLabel::Other("l".into()), ActionLabel::Other("r".into())],
    );
    b.terminal(Some((root, 0)), 1.0, 0.0); // sums to 1
    b.terminal(Some((root, 1)), 0.5, -0.5);
    let g = b.finish_unchecked();
    let report = validate_game(&g);
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::NotZeroSum { .. })));
}

#[test]
fn validation_flags_action_mismatch() {
    let mut b = GameBuilder::new(GameKind::Poker(PokerSpec::kuhn()));
    let root = b.chance(None, vec![0.5, 0.5]);
    // Two histories in the same infoset with different action counts.
    let n1 = b.player(
        Some((root, 0)),
        Player::P1,
        "same",
        vec![ActionLabel::Other("a".into()), ActionLabel::Other("b".into())],
    );
    let n2 = b.player(Some((root, 1)), Player::P1, "same", vec![ActionLabel::Other("a".into())]);
    b.terminal_zs(Some((n1, 0)), 1.0);
    b.terminal_zs(Some((n1, 1)), 0.0);
    b.terminal_zs(Some((n2, 0)), 1.0);
    let g = b.finish_unchecked();
    let report = validate_game(&g);
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::ActionMismatch { .. })));
}

#[test]
fn validation_flags_imperfect_recall_and_bad_chance() {
    let mut b = GameBuilder::new(GameKind::Poker(PokerSpec::kuhn()));
    let root = b.player(
        None,
        Player::P1,
        "root",
        vec![ActionLabel::Other("l".into()), ActionLabel::Other("r".into())],
    );
    // Both children in one infoset: the owner took different actions to
    // reach them, which breaks perfect recall.
    let n1 = b.player(Some((root, 0)), Player::P1, "merge", vec![ActionLabel::Other("x".into())]);
    let n2 = b.player(Some((root, 1)), Player::P1, "merge", vec![ActionLabel::Other("x".into())]);
    let c = b.chance(Some((n1, 0)), vec![0.6, 0.6]); // sums to 1.2
    b.terminal_zs(Some((c, 0)), 1.0);
    b.terminal_zs(Some((c, 1)), -1.0);
    b.terminal_zs(Some((n2, 0)), 0.0);
    let g = b.finish_unchecked();
    let report = validate_game(&g);
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::ImperfectRecall { .. })));
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::ChanceNotNormalized { .. })));
}

#[test]
fn perfect_recall_holds_in_built_games() {
    // validate_game covers this; double-check member action sets agree.
    let g = build_game(&GameKind::Leduc).unwrap();
    for inf in g.infosets() {
        for &m in &inf.members {
            assert_eq!(g.num_children(m), inf.num_actions());
        }
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let mut spec = PokerSpec::leduc();
    spec.bet_menus[0][0] = -2.0;
    assert!(matches!(
        build_game(&GameKind::Poker(spec)),
        Err(GameError::InvalidParameters(_))
    ));

    let mut spec = PokerSpec::kuhn();
    spec.ranks = 0;
    assert!(matches!(
        build_game(&GameKind::Poker(spec)),
        Err(GameError::InvalidParameters(_))
    ));

    let mut spec = PokerSpec::kuhn();
    spec.copies = 1;
    spec.ranks = 2; // cannot deal two privates and a public from 2 cards
    spec.bet_menus = vec![vec![1.0], vec![2.0]];
    assert!(matches!(
        build_game(&GameKind::Poker(spec)),
        Err(GameError::InvalidParameters(_))
    ));
}

#[test]
fn descendant_sets_are_owner_only_and_transitive() {
    let g = build_game(&GameKind::Leduc).unwrap();
    for (iid, inf) in g.infosets().iter().enumerate() {
        for (a, ds) in inf.descendants.iter().enumerate() {
            for &d in ds {
                let di = g.infoset(d);
                assert_eq!(di.owner, inf.owner);
                assert!(di.own_depth > inf.own_depth);
                // every member of the descendant lies below (I, a)
                for &m in &di.members {
                    assert!(g.is_below(m, iid as InfosetId, a));
                }
            }
        }
    }
}

#[test]
fn dump_round_trips_basic_fields() {
    let g = build_game(&GameKind::Kuhn).unwrap();
    let text = dump_text(&g);
    assert_eq!(text.lines().count(), g.num_histories());
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("0 - - c "));
}
