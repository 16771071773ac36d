//! Incremental construction of game trees.
//!
//! The builder is used both by the poker constructors and by tests that
//! hand-build games (including deliberately invalid ones). Nodes are added
//! top-down; `finish` checks every game invariant, while
//! `finish_unchecked` skips validation so tests can inspect the report of
//! a broken game through [`validate_game`].

use super::validate::validate_game;
use super::*;
use std::collections::HashMap;

/// Handle to a node added to a [`GameBuilder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeHandle(pub(crate) u32);

enum ProtoNode {
    Player {
        player: Player,
        key: String,
        actions: Vec<ActionLabel>,
        children: Vec<u32>,
    },
    Chance {
        probs: Vec<f64>,
        children: Vec<u32>,
    },
    Terminal {
        utils: [f64; 2],
    },
}

/// Builds a [`Game`] node by node.
pub struct GameBuilder {
    kind: GameKind,
    nodes: Vec<ProtoNode>,
    parents: Vec<(u32, u16)>,
}

impl GameBuilder {
    pub fn new(kind: GameKind) -> Self {
        GameBuilder {
            kind,
            nodes: Vec::new(),
            parents: Vec::new(),
        }
    }

    fn push(&mut self, parent: Option<(NodeHandle, usize)>, node: ProtoNode) -> NodeHandle {
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        match parent {
            None => {
                assert_eq!(id, 0, "only the first node may be the root");
                self.parents.push((NO_PARENT, 0));
            }
            Some((p, a)) => {
                self.parents.push((p.0, a as u16));
                let slot = match &mut self.nodes[p.0 as usize] {
                    ProtoNode::Player { children, .. } => &mut children[a],
                    ProtoNode::Chance { children, .. } => &mut children[a],
                    ProtoNode::Terminal { .. } => panic!("terminal node cannot have children"),
                };
                assert_eq!(*slot, u32::MAX, "child slot {a} already filled");
                *slot = id;
            }
        }
        NodeHandle(id)
    }

    /// Add a decision node. Histories sharing `infoset_key` (per player)
    /// form one information set; they must declare identical actions.
    pub fn player(
        &mut self,
        parent: Option<(NodeHandle, usize)>,
        player: Player,
        infoset_key: impl Into<String>,
        actions: Vec<ActionLabel>,
    ) -> NodeHandle {
        assert!(
            !actions.is_empty() && actions.len() <= MAX_ACTIONS,
            "decision nodes need 1..={MAX_ACTIONS} actions"
        );
        let n = actions.len();
        self.push(
            parent,
            ProtoNode::Player {
                player,
                key: infoset_key.into(),
                actions,
                children: vec![u32::MAX; n],
            },
        )
    }

    pub fn chance(&mut self, parent: Option<(NodeHandle, usize)>, probs: Vec<f64>) -> NodeHandle {
        assert!(!probs.is_empty(), "chance nodes need at least one outcome");
        let n = probs.len();
        self.push(
            parent,
            ProtoNode::Chance {
                probs,
                children: vec![u32::MAX; n],
            },
        )
    }

    pub fn terminal(&mut self, parent: Option<(NodeHandle, usize)>, u1: f64, u2: f64) -> NodeHandle {
        self.push(parent, ProtoNode::Terminal { utils: [u1, u2] })
    }

    /// Zero-sum convenience: terminal paying `u1` to player 1 and `-u1`
    /// to player 2.
    pub fn terminal_zs(&mut self, parent: Option<(NodeHandle, usize)>, u1: f64) -> NodeHandle {
        self.terminal(parent, u1, -u1)
    }

    /// Assemble the game and run full validation.
    pub fn finish(self) -> Result<Game, GameError> {
        let game = self.finish_unchecked();
        let report = validate_game(&game);
        if report.is_ok() {
            Ok(game)
        } else {
            Err(GameError::Invalid(report))
        }
    }

    /// Assemble the game without validating invariants.
    pub fn finish_unchecked(self) -> Game {
        let n = self.nodes.len();
        let mut actors = Vec::with_capacity(n);
        let mut child_start = vec![0u32; n];
        let mut child_count = vec![0u16; n];
        let mut children = Vec::new();
        let mut chance_probs = Vec::new();
        let mut infoset_of = vec![NO_INFOSET; n];
        let mut member_pos = vec![0u16; n];
        let mut utils = vec![[0.0; 2]; n];
        let mut infosets: Vec<Infoset> = Vec::new();
        let mut infosets_by_player: [Vec<InfosetId>; 2] = [Vec::new(), Vec::new()];
        let mut key_map: HashMap<(Player, String), InfosetId> = HashMap::new();

        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                ProtoNode::Player {
                    player,
                    key,
                    actions,
                    children: ch,
                } => {
                    actors.push(Actor::Player(*player));
                    child_start[id] = children.len() as u32;
                    child_count[id] = ch.len() as u16;
                    children.extend_from_slice(ch);
                    chance_probs.extend(std::iter::repeat(0.0).take(ch.len()));
                    let iid = *key_map
                        .entry((*player, key.clone()))
                        .or_insert_with(|| {
                            let iid = infosets.len() as InfosetId;
                            infosets.push(Infoset {
                                owner: *player,
                                actions: actions.clone(),
                                members: Vec::new(),
                                action_bounds: Vec::new(),
                                bounds: Bounds {
                                    lower: f64::INFINITY,
                                    upper: f64::NEG_INFINITY,
                                },
                                descendants: Vec::new(),
                                opp_straddlers: Vec::new(),
                                own_chain: Vec::new(),
                                own_depth: 0,
                                chance_reach_sum: 0.0,
                            });
                            infosets_by_player[player.index()].push(iid);
                            iid
                        });
                    infoset_of[id] = iid;
                    member_pos[id] = infosets[iid as usize].members.len() as u16;
                    infosets[iid as usize].members.push(id as HistoryId);
                }
                ProtoNode::Chance { probs, children: ch } => {
                    actors.push(Actor::Chance);
                    child_start[id] = children.len() as u32;
                    child_count[id] = ch.len() as u16;
                    children.extend_from_slice(ch);
                    chance_probs.extend_from_slice(probs);
                }
                ProtoNode::Terminal { utils: u } => {
                    actors.push(Actor::Terminal);
                    utils[id] = *u;
                }
            }
        }

        let mut game = Game {
            kind: self.kind,
            actors,
            parents: self.parents,
            child_start,
            child_count,
            children,
            chance_probs,
            infoset_of,
            member_pos,
            utils,
            infosets,
            infosets_by_player,
            delta: 0.0,
        };
        compute_metadata(&mut game);
        game
    }
}

/// Fill in payoff bounds, descendant sets, own-action depths, chance reach
/// sums, and the global payoff range. Tolerates structurally broken games
/// (validation reports those separately).
fn compute_metadata(game: &mut Game) {
    let n = game.num_histories();

    // Per-history terminal payoff envelope for each player, bottom-up.
    // Children always have larger ids than parents (builder is top-down).
    let mut lo = vec![[f64::INFINITY; 2]; n];
    let mut hi = vec![[f64::NEG_INFINITY; 2]; n];
    for h in (0..n).rev() {
        match game.actors[h] {
            Actor::Terminal => {
                for p in 0..2 {
                    lo[h][p] = game.utils[h][p];
                    hi[h][p] = game.utils[h][p];
                }
            }
            _ => {
                let s = game.child_start[h] as usize;
                for k in 0..game.child_count[h] as usize {
                    let c = game.children[s + k] as usize;
                    if c == u32::MAX as usize {
                        continue; // unfilled slot in a broken builder graph
                    }
                    for p in 0..2 {
                        lo[h][p] = lo[h][p].min(lo[c][p]);
                        hi[h][p] = hi[h][p].max(hi[c][p]);
                    }
                }
            }
        }
    }

    // Global payoff range.
    let mut delta: f64 = 0.0;
    if n > 0 && lo[0][0].is_finite() {
        for p in 0..2 {
            delta = delta.max(hi[0][p] - lo[0][p]);
        }
    }
    game.delta = delta;

    // Chance reach and own-action depth per history, top-down.
    let mut chance_reach = vec![1.0f64; n];
    let mut own_depth = vec![[0u16; 2]; n];
    for h in 0..n {
        let (par, act) = game.parents[h];
        if par == NO_PARENT {
            continue;
        }
        let par = par as usize;
        chance_reach[h] = chance_reach[par];
        own_depth[h] = own_depth[par];
        match game.actors[par] {
            Actor::Chance => {
                chance_reach[h] *= game.chance_probs[game.child_start[par] as usize + act as usize];
            }
            Actor::Player(p) => {
                own_depth[h][p.index()] += 1;
            }
            Actor::Terminal => {}
        }
    }

    // Per-infoset metadata.
    for iid in 0..game.infosets.len() {
        let owner = game.infosets[iid].owner;
        let oi = owner.index();
        let na = game.infosets[iid].actions.len();
        let members = game.infosets[iid].members.clone();

        let mut action_bounds = vec![
            Bounds {
                lower: f64::INFINITY,
                upper: f64::NEG_INFINITY,
            };
            na
        ];
        let mut reach_sum = 0.0;
        let mut depth = 0u16;
        for (mi, &m) in members.iter().enumerate() {
            let m = m as usize;
            reach_sum += chance_reach[m];
            if mi == 0 {
                depth = own_depth[m][oi];
            }
            let s = game.child_start[m] as usize;
            for a in 0..(game.child_count[m] as usize).min(na) {
                let c = game.children[s + a] as usize;
                if c == u32::MAX as usize {
                    continue;
                }
                action_bounds[a].lower = action_bounds[a].lower.min(lo[c][oi]);
                action_bounds[a].upper = action_bounds[a].upper.max(hi[c][oi]);
            }
        }
        let bounds = Bounds {
            lower: action_bounds.iter().map(|b| b.lower).fold(f64::INFINITY, f64::min),
            upper: action_bounds
                .iter()
                .map(|b| b.upper)
                .fold(f64::NEG_INFINITY, f64::max),
        };

        // Owner decision chain from the root to this infoset, taken from
        // the first member (identical across members in perfect recall).
        let mut chain = Vec::new();
        if let Some(&m0) = members.first() {
            let mut cur = m0 as usize;
            loop {
                let (p, a) = game.parents[cur];
                if p == NO_PARENT {
                    break;
                }
                let p = p as usize;
                if game.actors[p] == Actor::Player(owner) {
                    chain.push((game.infoset_of[p], a));
                }
                cur = p;
            }
            chain.reverse();
        }

        let is = &mut game.infosets[iid];
        is.action_bounds = action_bounds;
        is.bounds = bounds;
        is.chance_reach_sum = reach_sum;
        is.own_depth = depth;
        is.own_chain = chain;
    }

    // Descendant infoset sets D(I,a): walk each decision history's parent
    // chain and register its infoset at every owner-action edge above it.
    let mut desc: Vec<Vec<Vec<InfosetId>>> = game
        .infosets
        .iter()
        .map(|i| vec![Vec::new(); i.actions.len()])
        .collect();
    for h in 0..n {
        let p = match game.actors[h] {
            Actor::Player(p) => p,
            _ => continue,
        };
        let iid = game.infoset_of[h];
        let mut cur = h;
        loop {
            let (q, a) = game.parents[cur];
            if q == NO_PARENT {
                break;
            }
            let q = q as usize;
            if game.actors[q] == Actor::Player(p) {
                desc[game.infoset_of[q] as usize][a as usize].push(iid);
            }
            cur = q;
        }
    }
    for (iid, mut per_action) in desc.into_iter().enumerate() {
        for v in per_action.iter_mut() {
            v.sort_unstable();
            v.dedup();
        }
        game.infosets[iid].descendants = std::mem::take(&mut per_action);
    }

    // Opponent infosets straddling each (infoset, action) boundary: those
    // with some but not all members below the edge.
    let mut below_counts: HashMap<(u32, u16, u32), u32> = HashMap::new();
    for h in 0..n {
        let q = match game.actors[h] {
            Actor::Player(q) => q,
            _ => continue,
        };
        let kid = game.infoset_of[h];
        let mut cur = h;
        loop {
            let (p, a) = game.parents[cur];
            if p == NO_PARENT {
                break;
            }
            let p = p as usize;
            if let Actor::Player(owner) = game.actors[p] {
                if owner != q {
                    *below_counts
                        .entry((game.infoset_of[p], a, kid))
                        .or_insert(0) += 1;
                }
            }
            cur = p;
        }
    }
    let mut straddlers: Vec<Vec<Vec<InfosetId>>> = game
        .infosets
        .iter()
        .map(|i| vec![Vec::new(); i.actions.len()])
        .collect();
    for (&(j, b, k), &count) in &below_counts {
        if (count as usize) < game.infosets[k as usize].members.len() {
            straddlers[j as usize][b as usize].push(k);
        }
    }
    for (iid, mut per_action) in straddlers.into_iter().enumerate() {
        for v in per_action.iter_mut() {
            v.sort_unstable();
        }
        game.infosets[iid].opp_straddlers = std::mem::take(&mut per_action);
    }
}
