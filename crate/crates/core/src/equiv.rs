//! Bounded game solvers for interleaving and history-preserving
//! (bi)similarity, with witness extraction and replay.
//!
//! The spoiler plays transitions of the leading side: outputs and
//! interactions enumerated from the semantics, inputs built from recipes
//! over the leading frame's saturation closed under constructors up to a
//! configured depth, plus two fresh public constants. The duplicator must
//! match the action modulo the alias bijection, pass the static-equivalence
//! gate, and for the HP variants reproduce the independence/dependence
//! split of the event relation. Bisimulation lets the spoiler change sides
//! between moves.
//!
//! A `RelatedUpToBound` verdict is not a proof of equivalence: inputs are
//! drawn from a bounded recipe pool and the exploration is depth- and
//! replication-capped.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::indep::{dep_all, indep_all, EventRelation};
use crate::procs::{canon_alpha, ExtendedProcess};
use crate::sos::{ActionLabel, Event, Transition};
use crate::terms::{
    normalize, static_equivalent, AliasBijection, Ident, Message, Saturation, Symbol, TermError,
};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RelationKind {
    ISim,
    IBisim,
    HpSim,
    HpBisim,
}

impl RelationKind {
    pub fn parse(s: &str) -> Option<RelationKind> {
        Some(match s {
            "i-sim" => RelationKind::ISim,
            "i-bisim" => RelationKind::IBisim,
            "hp-sim" => RelationKind::HpSim,
            "hp-bisim" => RelationKind::HpBisim,
            _ => return None,
        })
    }

    pub fn history_preserving(self) -> bool {
        matches!(self, RelationKind::HpSim | RelationKind::HpBisim)
    }

    pub fn symmetric(self) -> bool {
        matches!(self, RelationKind::IBisim | RelationKind::HpBisim)
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationKind::ISim => "i-sim",
            RelationKind::IBisim => "i-bisim",
            RelationKind::HpSim => "hp-sim",
            RelationKind::HpBisim => "hp-bisim",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GameConfig {
    pub relation: RelationKind,
    /// Maximum plies explored.
    pub depth: u32,
    /// Maximum constructor depth of spoiler input recipes.
    pub recipe_depth: u32,
    /// Cap on replication-unfolding transitions per side along a path.
    pub bang_cap: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GameSide {
    Left,
    Right,
}

impl fmt::Display for GameSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameSide::Left => "left",
            GameSide::Right => "right",
        })
    }
}

/// One ply of a distinguishing strategy: the side that led, the spoiler's
/// event, and the duplicator response the refutation follows (none on the
/// final, unanswerable move).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StrategyMove {
    pub leader: GameSide,
    pub event: Event,
    pub response: Option<Event>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FailureKind {
    /// The final spoiler move has no valid duplicator response.
    NoValidResponse,
    /// The pair itself fails a static equality test.
    StaticInequivalence,
}

/// A replayable spoiler strategy: the principal variation of the
/// refutation. Side switches are recorded explicitly by each move's leader.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Strategy {
    pub moves: Vec<StrategyMove>,
    pub failure: FailureKind,
}

/// A snapshot of the explored relation when no distinguishing strategy was
/// found within the bounds.
#[derive(Clone, Debug, Default)]
pub struct RelationSnapshot {
    pub pairs_explored: usize,
    /// Pretty-printed related pairs, capped to keep reports small.
    pub sample: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub enum GameVerdict {
    RelatedUpToBound(RelationSnapshot),
    Distinguished(Strategy),
}

impl GameVerdict {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, GameVerdict::Distinguished(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("strategy inapplicable: {0}")]
    StrategyInapplicable(String),
}

// ---------------------------------------------------------------------------
// Recipe pool
// ---------------------------------------------------------------------------

/// Two public constants fresh for both processes, for the spoiler to inject
/// meaningless messages.
pub fn fresh_constant_pool(a: &ExtendedProcess, b: &ExtendedProcess) -> Vec<Ident> {
    let mut used: BTreeSet<Ident> = BTreeSet::new();
    for ep in [a, b] {
        crate::procs::free_constants_process(&ep.body, &mut used);
        for (_, v) in ep.frame.iter() {
            v.free_constants(&mut used);
        }
        used.extend(ep.bound.iter().cloned());
    }
    let mut out = Vec::new();
    let mut k = 0;
    while out.len() < 2 {
        let c = Ident::new(&format!("w{k}"));
        if !used.contains(&c) {
            out.push(c);
        }
        k += 1;
    }
    out
}

/// Recipes over a saturation closed under constructors to the given depth,
/// deduplicated by value (minimal recipes win).
pub fn recipe_pool(sat: &Saturation, extra: &[Ident], depth: u32) -> Vec<Message> {
    let mut values: BTreeSet<Message> = BTreeSet::new();
    let mut pool: Vec<Message> = Vec::new();
    for (recipe, value) in &sat.entries {
        if values.insert(value.clone()) {
            pool.push(recipe.clone());
        }
    }
    for c in extra {
        let m = Message::Constant(c.clone());
        if values.insert(m.clone()) {
            pool.push(m);
        }
    }
    let mut frontier = pool.clone();
    for _ in 1..depth {
        let mut next = Vec::new();
        for sym in [Symbol::Hash, Symbol::Fst, Symbol::Snd] {
            for r in &frontier {
                let m = Message::App(sym, vec![r.clone()]);
                next.push(m);
            }
        }
        for sym in [Symbol::Pair, Symbol::Enc, Symbol::Dec, Symbol::Mac] {
            for r in &frontier {
                for s in &pool {
                    next.push(Message::App(sym, vec![r.clone(), s.clone()]));
                    next.push(Message::App(sym, vec![s.clone(), r.clone()]));
                }
            }
        }
        frontier = Vec::new();
        for m in next {
            let v = normalize(&m);
            if values.insert(v) {
                pool.push(m.clone());
                frontier.push(m);
            }
        }
    }
    pool
}

// ---------------------------------------------------------------------------
// The game
// ---------------------------------------------------------------------------

struct Game {
    cfg: GameConfig,
    /// Constants available to spoiler recipes beyond the frames' contents.
    injected: Vec<Ident>,
    memo: HashMap<MemoKey, MemoEntry>,
    /// Canonical states interned to compact ids for memo keys.
    interned: HashMap<ExtendedProcess, u32>,
    static_cache: HashMap<(crate::terms::Frame, crate::terms::Frame, Vec<(crate::terms::Alias, crate::terms::Alias)>), bool>,
    related_pairs: Vec<(String, String)>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct MemoKey {
    left: u32,
    right: u32,
    rho: Vec<(crate::terms::Alias, crate::terms::Alias)>,
    s: Option<EventRelation>,
    bang_left: u32,
    bang_right: u32,
}

#[derive(Clone)]
enum MemoEntry {
    RelatedTo(u32),
    Distinguished(Strategy),
}

#[derive(Clone)]
struct Node {
    left: ExtendedProcess,
    right: ExtendedProcess,
    rho: AliasBijection,
    s: Option<EventRelation>,
}

enum Outcome {
    Related,
    Distinguished(Strategy),
}

/// Play the bounded (bi)simulation game between `a` (left) and `b` (right).
pub fn play_game(
    a: &ExtendedProcess,
    b: &ExtendedProcess,
    cfg: &GameConfig,
) -> Result<GameVerdict, GameError> {
    if cfg.depth == 0 {
        return Err(GameError::InvalidConfig("depth must be positive".into()));
    }
    if cfg.recipe_depth == 0 {
        return Err(GameError::InvalidConfig(
            "recipe depth must be positive".into(),
        ));
    }
    let dom_a: BTreeSet<_> = a.frame.domain().cloned().collect();
    let dom_b: BTreeSet<_> = b.frame.domain().cloned().collect();
    if dom_a != dom_b {
        return Err(GameError::InvalidConfig(
            "initial frames must share their alias domain (identity bijection)".into(),
        ));
    }
    let mut game = Game {
        cfg: *cfg,
        injected: fresh_constant_pool(a, b),
        memo: HashMap::new(),
        interned: HashMap::new(),
        static_cache: HashMap::new(),
        related_pairs: Vec::new(),
    };
    let node = Node {
        left: a.clone(),
        right: b.clone(),
        rho: AliasBijection::identity_on(dom_a),
        s: cfg.relation.history_preserving().then(EventRelation::empty),
    };
    match game.search(&node, cfg.depth, cfg.bang_cap, cfg.bang_cap)? {
        Outcome::Related => {
            let mut sample = std::mem::take(&mut game.related_pairs);
            let pairs_explored = sample.len();
            sample.truncate(512);
            Ok(GameVerdict::RelatedUpToBound(RelationSnapshot {
                pairs_explored,
                sample,
            }))
        }
        Outcome::Distinguished(s) => Ok(GameVerdict::Distinguished(s)),
    }
}

/// A spoiler move: transition of the leading side.
struct SpoilerMove {
    event: Event,
    target: ExtendedProcess,
    spawning: bool,
}

impl Game {
    fn spoiler_moves(
        &self,
        ep: &ExtendedProcess,
        budget_left: u32,
    ) -> Result<Vec<SpoilerMove>, GameError> {
        let sat = crate::sos::state_saturation(ep);
        let mut out = Vec::new();
        let push = |t: Transition, out: &mut Vec<SpoilerMove>| {
            let spawning = t.bang_spawns > 0;
            if spawning && budget_left == 0 {
                return;
            }
            out.push(SpoilerMove {
                event: t.event,
                target: t.target,
                spawning,
            });
        };
        for t in ep.output_and_tau_steps_with(&sat) {
            push(t, &mut out);
        }
        let pool = recipe_pool(&sat, &self.injected, self.cfg.recipe_depth);
        let receivers = ep.enabled_input_channels();
        let mut chan_seen = BTreeSet::new();
        for chan in &pool {
            let chan_value = normalize(&ep.frame.apply(chan));
            if !receivers.contains(&chan_value) || !chan_seen.insert(chan_value) {
                continue;
            }
            for payload in &pool {
                for t in ep
                    .input_steps(chan, payload)
                    .map_err(|e| match e {
                        crate::sos::SosError::Recipe(t) => GameError::Term(t),
                        other => GameError::InvalidConfig(other.to_string()),
                    })?
                {
                    push(t, &mut out);
                }
            }
        }
        Ok(out)
    }

    /// Duplicator responses to a spoiler event, matching the action modulo
    /// the bijection (oriented from spoiler side to responder side). The
    /// replication cap never filters responses: a distinguishing verdict
    /// must not be an artifact of capping the defender.
    fn responses(
        &self,
        responder: &ExtendedProcess,
        spoiler_event: &Event,
        map: &AliasBijection,
    ) -> Result<Vec<SpoilerMove>, GameError> {
        let mut out = Vec::new();
        let push = |t: Transition, out: &mut Vec<SpoilerMove>| {
            out.push(SpoilerMove {
                event: t.event,
                target: t.target,
                spawning: t.bang_spawns > 0,
            });
        };
        match &spoiler_event.action {
            ActionLabel::Tau => {
                for t in responder.output_and_tau_steps() {
                    if t.event.action == ActionLabel::Tau {
                        push(t, &mut out);
                    }
                }
            }
            ActionLabel::Input(chan, payload) => {
                let chan = map.apply(chan);
                let payload = map.apply(payload);
                let steps = match responder.input_steps(&chan, &payload) {
                    Ok(s) => s,
                    Err(crate::sos::SosError::Recipe(TermError::UnknownAlias(_))) => Vec::new(),
                    Err(e) => return Err(GameError::InvalidConfig(e.to_string())),
                };
                for t in steps {
                    push(t, &mut out);
                }
            }
            ActionLabel::Output(chan, _) => {
                let want = normalize(&responder.frame.apply(&map.apply(chan)));
                for t in responder.output_and_tau_steps() {
                    let ActionLabel::Output(resp_chan, alias) = &t.event.action else {
                        continue;
                    };
                    if normalize(&responder.frame.apply(resp_chan)) != want {
                        continue;
                    }
                    let event = Event {
                        action: ActionLabel::Output(map.apply(chan), alias.clone()),
                        loc: t.event.loc.clone(),
                    };
                    push(
                        Transition {
                            event,
                            target: t.target,
                            bang_spawns: t.bang_spawns,
                        },
                        &mut out,
                    );
                }
            }
        }
        Ok(out)
    }

    fn intern(&mut self, ep: &ExtendedProcess) -> u32 {
        let canon = canon_alpha(ep);
        let next = self.interned.len() as u32;
        *self.interned.entry(canon).or_insert(next)
    }

    fn static_gate(&mut self, node: &Node) -> Result<bool, GameError> {
        let key = (
            node.left.frame_view(),
            node.right.frame_view(),
            node.rho
                .iter()
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect::<Vec<_>>(),
        );
        if let Some(v) = self.static_cache.get(&key) {
            return Ok(*v);
        }
        let v = static_equivalent(&key.0, &key.1, &node.rho)?;
        self.static_cache.insert(key, v);
        Ok(v)
    }

    fn search(
        &mut self,
        node: &Node,
        depth: u32,
        bang_left: u32,
        bang_right: u32,
    ) -> Result<Outcome, GameError> {
        // Static-equivalence gate: every related pair passes all equality
        // tests under the bijection.
        if !self.static_gate(node)? {
            return Ok(Outcome::Distinguished(Strategy {
                moves: Vec::new(),
                failure: FailureKind::StaticInequivalence,
            }));
        }
        if depth == 0 {
            return Ok(Outcome::Related);
        }
        let key = MemoKey {
            left: self.intern(&node.left),
            right: self.intern(&node.right),
            rho: node
                .rho
                .iter()
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect(),
            s: node.s.clone(),
            bang_left,
            bang_right,
        };
        match self.memo.get(&key) {
            Some(MemoEntry::RelatedTo(d)) if *d >= depth => return Ok(Outcome::Related),
            Some(MemoEntry::Distinguished(s)) if s.moves.len() as u32 <= depth => {
                return Ok(Outcome::Distinguished(s.clone()))
            }
            _ => {}
        }
        // Guard against revisiting along the current path: mark as related
        // at this depth while exploring; a genuine refutation overwrites.
        self.memo
            .insert(key.clone(), MemoEntry::RelatedTo(depth));

        let sides: &[GameSide] = if self.cfg.relation.symmetric() {
            &[GameSide::Left, GameSide::Right]
        } else {
            &[GameSide::Left]
        };
        for &leader in sides {
            let (lead_ep, lead_budget) = match leader {
                GameSide::Left => (&node.left, bang_left),
                GameSide::Right => (&node.right, bang_right),
            };
            for m in self.spoiler_moves(lead_ep, lead_budget)? {
                // Forced split of the event relation by the spoiler event.
                let split = match &node.s {
                    None => None,
                    Some(s) => {
                        let oriented = match leader {
                            GameSide::Left => s.clone(),
                            GameSide::Right => s.inverse(),
                        };
                        Some(oriented.partition_by_left(&m.event))
                    }
                };
                let map = match leader {
                    GameSide::Left => node.rho.clone(),
                    GameSide::Right => node.rho.inverse(),
                };
                let responder = match leader {
                    GameSide::Left => &node.right,
                    GameSide::Right => &node.left,
                };
                let mut refutations: Vec<(Event, Strategy)> = Vec::new();
                let mut survived = false;
                let responses = self.responses(responder, &m.event, &map)?;
                for r in responses {
                    // HP transfer: the response must reproduce the split.
                    if let Some((s1, s2)) = &split {
                        if !indep_all(&r.event, s1.range()) || !dep_all(&r.event, s2.range()) {
                            continue;
                        }
                    }
                    // Extend the bijection on output moves.
                    let rho2 = match (&m.event.action, &r.event.action) {
                        (ActionLabel::Output(_, a), ActionLabel::Output(_, b)) => {
                            let (from, to) = match leader {
                                GameSide::Left => (a.clone(), b.clone()),
                                GameSide::Right => (b.clone(), a.clone()),
                            };
                            match node.rho.extended(from, to) {
                                Ok(r) => r,
                                Err(_) => continue,
                            }
                        }
                        _ => node.rho.clone(),
                    };
                    let s2rel = split.as_ref().map(|(s1, _)| {
                        let mut next = match leader {
                            GameSide::Left => s1.clone(),
                            GameSide::Right => s1.inverse(),
                        };
                        let (le, re) = match leader {
                            GameSide::Left => (m.event.clone(), r.event.clone()),
                            GameSide::Right => (r.event.clone(), m.event.clone()),
                        };
                        next.insert(le, re);
                        next
                    });
                    let (next_left, next_right) = match leader {
                        GameSide::Left => (m.target.clone(), r.target.clone()),
                        GameSide::Right => (r.target.clone(), m.target.clone()),
                    };
                    let (nbl, nbr) = match leader {
                        GameSide::Left => (
                            bang_left.saturating_sub(u32::from(m.spawning)),
                            bang_right.saturating_sub(u32::from(r.spawning)),
                        ),
                        GameSide::Right => (
                            bang_left.saturating_sub(u32::from(r.spawning)),
                            bang_right.saturating_sub(u32::from(m.spawning)),
                        ),
                    };
                    let next = Node {
                        left: next_left,
                        right: next_right,
                        rho: rho2,
                        s: s2rel,
                    };
                    match self.search(&next, depth - 1, nbl, nbr)? {
                        Outcome::Related => {
                            survived = true;
                            break;
                        }
                        Outcome::Distinguished(st) => refutations.push((r.event, st)),
                    }
                }
                if !survived {
                    // Every response refuted (or none existed): the spoiler
                    // wins with this move.
                    let strategy = match refutations.into_iter().next() {
                        Some((resp, st)) => {
                            let mut moves = vec![StrategyMove {
                                leader,
                                event: m.event.clone(),
                                response: Some(resp),
                            }];
                            moves.extend(st.moves);
                            Strategy {
                                moves,
                                failure: st.failure,
                            }
                        }
                        None => Strategy {
                            moves: vec![StrategyMove {
                                leader,
                                event: m.event.clone(),
                                response: None,
                            }],
                            failure: FailureKind::NoValidResponse,
                        },
                    };
                    self.memo
                        .insert(key, MemoEntry::Distinguished(strategy.clone()));
                    return Ok(Outcome::Distinguished(strategy));
                }
            }
        }
        self.memo.insert(key, MemoEntry::RelatedTo(depth));
        self.related_pairs
            .push((node.left.to_string(), node.right.to_string()));
        Ok(Outcome::Related)
    }
}

/// Re-execute a distinguishing strategy from the given pair; true iff it
/// reproduces the duplicator's failure point.
pub fn replay_strategy(
    a: &ExtendedProcess,
    b: &ExtendedProcess,
    cfg: &GameConfig,
    strategy: &Strategy,
) -> Result<bool, GameError> {
    let dom_a: BTreeSet<_> = a.frame.domain().cloned().collect();
    let dom_b: BTreeSet<_> = b.frame.domain().cloned().collect();
    if dom_a != dom_b {
        return Err(GameError::InvalidConfig(
            "initial frames must share their alias domain".into(),
        ));
    }
    let mut node = Node {
        left: a.clone(),
        right: b.clone(),
        rho: AliasBijection::identity_on(dom_a),
        s: cfg.relation.history_preserving().then(EventRelation::empty),
    };
    let game = Game {
        cfg: *cfg,
        injected: fresh_constant_pool(a, b),
        memo: HashMap::new(),
        interned: HashMap::new(),
        static_cache: HashMap::new(),
        related_pairs: Vec::new(),
    };
    for (i, mv) in strategy.moves.iter().enumerate() {
        if !cfg.relation.symmetric() && mv.leader == GameSide::Right {
            return Err(GameError::StrategyInapplicable(
                "side switch in a similarity game".into(),
            ));
        }
        let last = i + 1 == strategy.moves.len();
        let (lead_ep, responder) = match mv.leader {
            GameSide::Left => (&node.left, &node.right),
            GameSide::Right => (&node.right, &node.left),
        };
        // The spoiler move must be enabled.
        let lead_target = lead_ep
            .step(&mv.event)
            .map_err(|e| GameError::StrategyInapplicable(e.to_string()))?;
        let map = match mv.leader {
            GameSide::Left => node.rho.clone(),
            GameSide::Right => node.rho.inverse(),
        };
        let split = node.s.as_ref().map(|s| {
            let oriented = match mv.leader {
                GameSide::Left => s.clone(),
                GameSide::Right => s.inverse(),
            };
            oriented.partition_by_left(&mv.event)
        });
        let mut valid: Vec<SpoilerMove> = Vec::new();
        for r in game.responses(responder, &mv.event, &map)? {
            if let Some((s1, s2)) = &split {
                if !indep_all(&r.event, s1.range()) || !dep_all(&r.event, s2.range()) {
                    continue;
                }
            }
            let rho2 = match (&mv.event.action, &r.event.action) {
                (ActionLabel::Output(_, x), ActionLabel::Output(_, y)) => {
                    let (from, to) = match mv.leader {
                        GameSide::Left => (x.clone(), y.clone()),
                        GameSide::Right => (y.clone(), x.clone()),
                    };
                    match node.rho.extended(from, to) {
                        Ok(r) => r,
                        Err(_) => continue,
                    }
                }
                _ => node.rho.clone(),
            };
            // Clause 3 gate on the successor pair.
            let (nl, nr) = match mv.leader {
                GameSide::Left => (lead_target.clone(), r.target.clone()),
                GameSide::Right => (r.target.clone(), lead_target.clone()),
            };
            if static_equivalent(&nl.frame_view(), &nr.frame_view(), &rho2)? {
                valid.push(SpoilerMove {
                    event: r.event,
                    target: if mv.leader == GameSide::Left { nr } else { nl },
                    spawning: false,
                });
            }
        }
        match &mv.response {
            None => {
                // Failure point claimed here: it must be the final move and
                // no valid duplicator response may exist.
                return Ok(last
                    && valid.is_empty()
                    && strategy.failure == FailureKind::NoValidResponse);
            }
            Some(resp) => {
                let Some(chosen) = valid.iter().find(|r| r.event == *resp) else {
                    return Ok(false);
                };
                // Advance the node along spoiler move and chosen response.
                let rho2 = match (&mv.event.action, &chosen.event.action) {
                    (ActionLabel::Output(_, x), ActionLabel::Output(_, y)) => {
                        let (from, to) = match mv.leader {
                            GameSide::Left => (x.clone(), y.clone()),
                            GameSide::Right => (y.clone(), x.clone()),
                        };
                        node.rho.extended(from, to).unwrap()
                    }
                    _ => node.rho.clone(),
                };
                let s2 = split.as_ref().map(|(s1, _)| {
                    let mut next = match mv.leader {
                        GameSide::Left => s1.clone(),
                        GameSide::Right => s1.inverse(),
                    };
                    let (le, re) = match mv.leader {
                        GameSide::Left => (mv.event.clone(), chosen.event.clone()),
                        GameSide::Right => (chosen.event.clone(), mv.event.clone()),
                    };
                    next.insert(le, re);
                    next
                });
                let follower_target = chosen.target.clone();
                node = match mv.leader {
                    GameSide::Left => Node {
                        left: lead_target,
                        right: follower_target,
                        rho: rho2,
                        s: s2,
                    },
                    GameSide::Right => Node {
                        left: follower_target,
                        right: lead_target,
                        rho: rho2,
                        s: s2,
                    },
                };
            }
        }
    }
    // No moves left: the strategy must have claimed static inequivalence of
    // the current pair.
    if strategy.failure == FailureKind::StaticInequivalence {
        return Ok(!static_equivalent(
            &node.left.frame_view(),
            &node.right.frame_view(),
            &node.rho,
        )?);
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procs::{parse_process, reset_fresh_names};

    fn cfg(relation: RelationKind, depth: u32) -> GameConfig {
        GameConfig {
            relation,
            depth,
            recipe_depth: 1,
            bang_cap: 4,
        }
    }

    #[test]
    fn identical_processes_related() {
        reset_fresh_names();
        let p = parse_process("out(a,a).out(a,a)").unwrap();
        for rel in [
            RelationKind::ISim,
            RelationKind::IBisim,
            RelationKind::HpSim,
            RelationKind::HpBisim,
        ] {
            let v = play_game(&p, &p, &cfg(rel, 6)).unwrap();
            assert!(!v.is_distinguished(), "{rel}");
        }
    }

    #[test]
    fn sequential_vs_parallel_outputs() {
        reset_fresh_names();
        let seq = parse_process("out(a,a).out(a,a)").unwrap();
        let par = parse_process("out(a,a) | out(a,a)").unwrap();
        // i-bisimilar, hence related under the interleaving game.
        let v = play_game(&seq, &par, &cfg(RelationKind::IBisim, 6)).unwrap();
        assert!(!v.is_distinguished());
        // Not HP-similar in either direction.
        let v = play_game(&seq, &par, &cfg(RelationKind::HpSim, 6)).unwrap();
        assert!(v.is_distinguished());
        let v = play_game(&par, &seq, &cfg(RelationKind::HpSim, 6)).unwrap();
        assert!(v.is_distinguished());
    }

    #[test]
    fn strategy_replays() {
        reset_fresh_names();
        let seq = parse_process("out(a,a).out(a,a)").unwrap();
        let par = parse_process("out(a,a) | out(a,a)").unwrap();
        let c = cfg(RelationKind::HpSim, 6);
        let v = play_game(&seq, &par, &c).unwrap();
        let GameVerdict::Distinguished(strategy) = v else {
            panic!("expected a distinguishing strategy");
        };
        assert!(replay_strategy(&seq, &par, &c, &strategy).unwrap());
    }

    #[test]
    fn empty_strategy_on_identical_processes_fails_replay() {
        reset_fresh_names();
        let p = parse_process("out(a,a)").unwrap();
        let st = Strategy {
            moves: Vec::new(),
            failure: FailureKind::StaticInequivalence,
        };
        let c = cfg(RelationKind::IBisim, 2);
        assert!(!replay_strategy(&p, &p, &c, &st).unwrap());
    }

    #[test]
    fn static_difference_is_distinguished_immediately() {
        reset_fresh_names();
        // After one output the frames differ statically: left publishes a
        // hash of a known constant, right a fresh nonce.
        let l = parse_process("out(c,h(a))").unwrap();
        let r = parse_process("new n.out(c,n)").unwrap();
        let v = play_game(&l, &r, &cfg(RelationKind::IBisim, 3)).unwrap();
        assert!(v.is_distinguished());
    }

    #[test]
    fn hp_distinguishes_prefix_from_parallel_causality() {
        reset_fresh_names();
        // a.(b|c) vs a.b|c: i-similar but not HP-similar.
        let l = parse_process("new x,y,z.(out(a,x).(out(b,y) | out(c,z)))").unwrap();
        let r = parse_process("new x,y,z.(out(a,x).out(b,y) | out(c,z))").unwrap();
        let v = play_game(&l, &r, &cfg(RelationKind::ISim, 6)).unwrap();
        assert!(!v.is_distinguished());
        let v = play_game(&l, &r, &cfg(RelationKind::HpSim, 6)).unwrap();
        assert!(v.is_distinguished());
    }

    #[test]
    fn invalid_config_rejected() {
        let p = parse_process("0").unwrap();
        let mut c = cfg(RelationKind::ISim, 0);
        assert!(play_game(&p, &p, &c).is_err());
        c.depth = 1;
        c.recipe_depth = 0;
        assert!(play_game(&p, &p, &c).is_err());
    }
}
