//! Builders for the three poker variants.
//!
//! All variants share one shape: both players ante, private cards are
//! dealt, then one or two betting rounds with a fixed bet-size menu and a
//! cap on bets per round. Two-round games reveal a single public card
//! between the rounds. Deals are collapsed into a single root chance node
//! over ordered rank tuples with combinatorial weights, which yields the
//! same distribution as dealing concrete cards in stages but with no
//! interior chance nodes.

use super::*;

/// Parameters of a poker variant.
#[derive(Debug, Clone, PartialEq)]
pub struct PokerSpec {
    /// Number of distinct ranks in the deck.
    pub ranks: u32,
    /// Copies of each rank.
    pub copies: u32,
    /// Ante posted by each player before the deal.
    pub ante: f64,
    /// Bet-size menu per round; also the raise-size menu. A raise adds its
    /// size on top of the amount needed to call.
    pub bet_menus: Vec<Vec<f64>>,
    /// Maximum bets (initial bet plus raises) per round.
    pub bet_cap: u32,
}

impl PokerSpec {
    pub fn kuhn() -> Self {
        PokerSpec {
            ranks: 3,
            copies: 1,
            ante: 1.0,
            bet_menus: vec![vec![1.0]],
            bet_cap: 1,
        }
    }

    pub fn leduc() -> Self {
        PokerSpec {
            ranks: 3,
            copies: 2,
            ante: 1.0,
            bet_menus: vec![vec![2.0], vec![4.0]],
            bet_cap: 2,
        }
    }

    pub fn leduc5() -> Self {
        PokerSpec {
            ranks: 3,
            copies: 2,
            ante: 1.0,
            bet_menus: vec![vec![0.5, 1.0, 2.0, 4.0, 8.0], vec![1.0, 2.0, 4.0, 8.0, 16.0]],
            bet_cap: 2,
        }
    }

    pub fn rounds(&self) -> usize {
        self.bet_menus.len()
    }

    fn check_params(&self) -> Result<(), GameError> {
        let bad = |msg: String| Err(GameError::InvalidParameters(msg));
        if self.ranks == 0 || self.copies == 0 {
            return bad("deck has zero cards".into());
        }
        if self.ante <= 0.0 {
            return bad(format!("ante must be positive, got {}", self.ante));
        }
        if self.bet_menus.is_empty() || self.bet_menus.len() > 2 {
            return bad(format!(
                "expected 1 or 2 betting rounds, got {}",
                self.bet_menus.len()
            ));
        }
        for menu in &self.bet_menus {
            if menu.is_empty() {
                return bad("empty bet-size menu".into());
            }
            for &s in menu {
                if s <= 0.0 || !s.is_finite() {
                    return bad(format!("non-positive bet size {s}"));
                }
            }
        }
        if self.bet_cap == 0 {
            return bad("bet cap must be at least 1".into());
        }
        let cards_needed = 2 + (self.rounds() as u32 - 1);
        if self.ranks * self.copies < cards_needed {
            return bad(format!(
                "deck of {} cards cannot deal {cards_needed}",
                self.ranks * self.copies
            ));
        }
        Ok(())
    }
}

/// Build one of the supported variants. Deterministic: the same kind
/// always yields an identical tree.
pub fn build_game(kind: &GameKind) -> Result<Game, GameError> {
    let spec = match kind {
        GameKind::Kuhn => PokerSpec::kuhn(),
        GameKind::Leduc => PokerSpec::leduc(),
        GameKind::Leduc5 => PokerSpec::leduc5(),
        GameKind::Poker(s) => s.clone(),
    };
    spec.check_params()?;
    let builder = build_poker(kind.clone(), &spec);
    builder.finish()
}

#[derive(Clone, Copy)]
struct Deal {
    p1: u32,
    p2: u32,
    public: Option<u32>,
}

/// Enumerate feasible ordered rank tuples with their probabilities.
fn enumerate_deals(spec: &PokerSpec) -> Vec<(Deal, f64)> {
    let n_cards = (spec.ranks * spec.copies) as f64;
    let with_public = spec.rounds() == 2;
    let mut deals = Vec::new();

    let weight = |ranks: &[u32]| -> f64 {
        let mut used = vec![0u32; spec.ranks as usize];
        let mut w = 1.0;
        let mut remaining = n_cards;
        for &r in ranks {
            let avail = spec.copies - used[r as usize];
            if avail == 0 {
                return 0.0;
            }
            w *= avail as f64 / remaining;
            used[r as usize] += 1;
            remaining -= 1.0;
        }
        w
    };

    for p1 in 0..spec.ranks {
        for p2 in 0..spec.ranks {
            if with_public {
                for public in 0..spec.ranks {
                    let w = weight(&[p1, p2, public]);
                    if w > 0.0 {
                        deals.push((
                            Deal {
                                p1,
                                p2,
                                public: Some(public),
                            },
                            w,
                        ));
                    }
                }
            } else {
                let w = weight(&[p1, p2]);
                if w > 0.0 {
                    deals.push((Deal { p1, p2, public: None }, w));
                }
            }
        }
    }
    deals
}

struct PokerCtx<'a> {
    spec: &'a PokerSpec,
    builder: GameBuilder,
    deal: Deal,
}

impl PokerCtx<'_> {
    fn own_rank(&self, p: Player) -> u32 {
        match p {
            Player::P1 => self.deal.p1,
            Player::P2 => self.deal.p2,
        }
    }

    fn infoset_key(&self, p: Player, round: usize, line: &str) -> String {
        let public = if round >= 1 {
            self.deal.public.map(|c| c.to_string()).unwrap_or_default()
        } else {
            String::new()
        };
        format!("{}|{}|{}", self.own_rank(p), public, line)
    }

    /// Terminal where `folder` gives up; the other player nets the
    /// folder's total contribution.
    fn fold_terminal(&mut self, parent: (NodeHandle, usize), folder: Player, contrib: [f64; 2]) {
        let u1 = match folder {
            Player::P1 => -contrib[0],
            Player::P2 => contrib[1],
        };
        self.builder.terminal_zs(Some(parent), u1);
    }

    fn showdown_terminal(&mut self, parent: (NodeHandle, usize), contrib: [f64; 2]) {
        debug_assert!((contrib[0] - contrib[1]).abs() < 1e-9);
        let d = &self.deal;
        let winner = match d.public {
            Some(public) if d.p1 == public => Some(Player::P1),
            Some(public) if d.p2 == public => Some(Player::P2),
            _ => {
                if d.p1 > d.p2 {
                    Some(Player::P1)
                } else if d.p2 > d.p1 {
                    Some(Player::P2)
                } else {
                    None
                }
            }
        };
        let u1 = match winner {
            Some(Player::P1) => contrib[1],
            Some(Player::P2) => -contrib[0],
            None => 0.0,
        };
        self.builder.terminal_zs(Some(parent), u1);
    }

    /// Called when a betting round completes with matched contributions.
    fn round_done(&mut self, parent: (NodeHandle, usize), round: usize, line: String, contrib: [f64; 2]) {
        if round + 1 < self.spec.rounds() {
            let next_line = format!("{line}/");
            self.decision(parent, round + 1, next_line, contrib, Player::P1, 0.0, 0, false);
        } else {
            self.showdown_terminal(parent, contrib);
        }
    }

    /// One betting decision. `facing` is the amount needed to call (0 when
    /// unfaced), `bets_made` counts bets and raises this round, and
    /// `checked` records whether an initial check already happened.
    #[allow(clippy::too_many_arguments)]
    fn decision(
        &mut self,
        parent: (NodeHandle, usize),
        round: usize,
        line: String,
        contrib: [f64; 2],
        to_act: Player,
        facing: f64,
        bets_made: u32,
        checked: bool,
    ) {
        let menu = &self.spec.bet_menus[round];
        let can_bet = bets_made < self.spec.bet_cap;
        let mut actions = Vec::new();
        if facing > 0.0 {
            actions.push(ActionLabel::Fold);
        }
        actions.push(ActionLabel::CheckCall);
        if can_bet {
            for &s in menu {
                actions.push(ActionLabel::BetRaise(s));
            }
        }

        let key = self.infoset_key(to_act, round, &line);
        let node = self
            .builder
            .player(Some(parent), to_act, key, actions.clone());

        let me = to_act.index();
        let opp = to_act.opponent();
        for (ai, action) in actions.iter().enumerate() {
            match action {
                ActionLabel::Fold => {
                    let new_line = format!("{line}f");
                    let _ = new_line;
                    self.fold_terminal((node, ai), to_act, contrib);
                }
                ActionLabel::CheckCall => {
                    let mut c = contrib;
                    c[me] += facing;
                    let new_line = format!("{line}c");
                    if facing > 0.0 || checked {
                        // Call, or check behind: round over.
                        self.round_done((node, ai), round, new_line, c);
                    } else {
                        // Initial check: opponent acts.
                        self.decision((node, ai), round, new_line, c, opp, 0.0, bets_made, true);
                    }
                }
                ActionLabel::BetRaise(s) => {
                    let mut c = contrib;
                    c[me] += facing + s;
                    let new_line = format!("{line}b{s}");
                    self.decision((node, ai), round, new_line, c, opp, *s, bets_made + 1, false);
                }
                _ => unreachable!(),
            }
        }
    }
}

fn build_poker(kind: GameKind, spec: &PokerSpec) -> GameBuilder {
    let deals = enumerate_deals(spec);
    let mut builder = GameBuilder::new(kind);
    let root = builder.chance(None, deals.iter().map(|(_, w)| *w).collect());

    for (di, (deal, _)) in deals.iter().enumerate() {
        let mut ctx = PokerCtx {
            spec,
            builder,
            deal: *deal,
        };
        ctx.decision(
            (root, di),
            0,
            String::new(),
            [spec.ante, spec.ante],
            Player::P1,
            0.0,
            0,
            false,
        );
        builder = ctx.builder;
    }
    builder
}
