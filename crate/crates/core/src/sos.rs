//! The event-labelled transition engine.
//!
//! Transitions are derived from the structural operational rules for an
//! early semantics: inputs carry the attacker's recipes for channel and
//! payload, outputs bind a located alias whose prefix is the emitting
//! thread's parallel position, and internal communication records the pair
//! of locations involved (output first).
//!
//! The engine never enumerates input labels spontaneously: callers supply
//! recipes. Replication unfolds lazily, one head copy per derivation, which
//! keeps successor sets finite; deeper copies only relabel locations
//! inside the untouched replication subtree and are therefore redundant.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::procs::{
    fresh_name, subst_guarded, subst_process, ExtendedProcess, Guarded, Process,
};
use crate::terms::{
    constructive_recipe_of, eq_modulo_e, normalize, public_pool, saturate, Alias, Bits, Ident,
    Message, Saturation, TermError,
};

/// A location s[t]: the prefix records parallel positions, the branch
/// records sum choices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Location {
    pub prefix: Bits,
    pub branch: Bits,
}

impl Location {
    pub fn here() -> Self {
        Location::default()
    }

    fn prepend_prefix(&self, bit: u8) -> Self {
        Location {
            prefix: self.prefix.prepend(bit),
            branch: self.branch.clone(),
        }
    }

    fn prepend_branch(&self, bit: u8) -> Self {
        Location {
            prefix: self.prefix.clone(),
            branch: self.branch.prepend(bit),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.prefix, self.branch)
    }
}

impl fmt::Debug for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Either a single location or, for an interaction, the ordered pair with
/// the output location first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocationLabel {
    One(Location),
    Pair(Location, Location),
}

impl LocationLabel {
    fn prepend(&self, bit: u8) -> Self {
        match self {
            LocationLabel::One(l) => LocationLabel::One(l.prepend_prefix(bit)),
            LocationLabel::Pair(o, i) => {
                LocationLabel::Pair(o.prepend_prefix(bit), i.prepend_prefix(bit))
            }
        }
    }
}

impl fmt::Display for LocationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocationLabel::One(l) => write!(f, "{l}"),
            LocationLabel::Pair(o, i) => write!(f, "({o},{i})"),
        }
    }
}

impl fmt::Debug for LocationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Early action labels. Input channels and payloads are attacker recipes;
/// output channels are recipes and the payload is reachable through the
/// bound alias.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionLabel {
    Input(Message, Message),
    Output(Message, Alias),
    Tau,
}

impl ActionLabel {
    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut s = BTreeSet::new();
        match self {
            ActionLabel::Input(m, n) => {
                m.free_vars(&mut s);
                n.free_vars(&mut s);
            }
            ActionLabel::Output(m, _) => m.free_vars(&mut s),
            ActionLabel::Tau => {}
        }
        s
    }

    /// Free aliases of the label: fal(M N) = fal(M) u fal(N),
    /// fal(out M (a)) = fal(M), fal(tau) = empty. The bound alias of an
    /// output is not free in its own label.
    pub fn free_aliases(&self) -> BTreeSet<Alias> {
        let mut s = BTreeSet::new();
        match self {
            ActionLabel::Input(m, n) => {
                m.free_aliases(&mut s);
                n.free_aliases(&mut s);
            }
            ActionLabel::Output(m, _) => m.free_aliases(&mut s),
            ActionLabel::Tau => {}
        }
        s
    }

    pub fn bound_alias(&self) -> Option<&Alias> {
        match self {
            ActionLabel::Output(_, a) => Some(a),
            _ => None,
        }
    }

    pub fn is_output(&self) -> bool {
        matches!(self, ActionLabel::Output(_, _))
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Input(m, n) => write!(f, "{m} {n}"),
            ActionLabel::Output(m, a) => write!(f, "out {m} ({a})"),
            ActionLabel::Tau => write!(f, "tau"),
        }
    }
}

impl fmt::Debug for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An event: action label plus location label.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub action: ActionLabel,
    pub loc: LocationLabel,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.action, self.loc)
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A derived transition. `bang_spawns` counts the replication unfoldings in
/// the derivation; budgets cap the number of spawning transitions per path.
#[derive(Clone, Debug)]
pub struct Transition {
    pub event: Event,
    pub target: ExtendedProcess,
    pub bang_spawns: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SosError {
    #[error(transparent)]
    Recipe(#[from] TermError),
    #[error("no transition with event {0}")]
    NoSuchEvent(String),
}

// ---------------------------------------------------------------------------
// Plain-level derivation
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct OutCand {
    chan: Message,
    payload: Message,
    loc: Location,
    extruded: Vec<Ident>,
    residual: Process,
    bangs: u32,
}

#[derive(Clone)]
struct InCand {
    loc: Location,
    extruded: Vec<Ident>,
    residual: Process,
    bangs: u32,
}

#[derive(Clone)]
struct TauCand {
    loc: LocationLabel,
    extruded: Vec<Ident>,
    residual: Process,
    bangs: u32,
}

fn outputs_guarded(g: &Guarded) -> Vec<OutCand> {
    match g {
        Guarded::In(_, _, _) => Vec::new(),
        Guarded::Out(c, m, p) => vec![OutCand {
            chan: normalize(c),
            payload: normalize(m),
            loc: Location::here(),
            extruded: Vec::new(),
            residual: p.as_ref().clone(),
            bangs: 0,
        }],
        Guarded::Match(m, n, g) => {
            if eq_modulo_e(m, n) {
                outputs_guarded(g)
            } else {
                Vec::new()
            }
        }
        Guarded::Sum(l, r) => {
            let mut out: Vec<OutCand> = outputs_guarded(l)
                .into_iter()
                .map(|c| OutCand {
                    loc: c.loc.prepend_branch(0),
                    ..c
                })
                .collect();
            out.extend(outputs_guarded(r).into_iter().map(|c| OutCand {
                loc: c.loc.prepend_branch(1),
                ..c
            }));
            out
        }
        Guarded::New(x, g) => {
            let z = fresh_name(x.as_str());
            let mut map = std::collections::BTreeMap::new();
            map.insert(x.clone(), Message::Var(z.clone()));
            outputs_guarded(&subst_guarded(g, &map))
                .into_iter()
                .map(|mut c| {
                    c.extruded.insert(0, z.clone());
                    c
                })
                .collect()
        }
    }
}

fn inputs_guarded(g: &Guarded, chan_value: &Message, payload: &Message) -> Vec<InCand> {
    match g {
        Guarded::In(c, x, p) => {
            if eq_modulo_e(c, chan_value) {
                let mut map = std::collections::BTreeMap::new();
                map.insert(x.clone(), payload.clone());
                vec![InCand {
                    loc: Location::here(),
                    extruded: Vec::new(),
                    residual: subst_process(p, &map),
                    bangs: 0,
                }]
            } else {
                Vec::new()
            }
        }
        Guarded::Out(_, _, _) => Vec::new(),
        Guarded::Match(m, n, g) => {
            if eq_modulo_e(m, n) {
                inputs_guarded(g, chan_value, payload)
            } else {
                Vec::new()
            }
        }
        Guarded::Sum(l, r) => {
            let mut out: Vec<InCand> = inputs_guarded(l, chan_value, payload)
                .into_iter()
                .map(|c| InCand {
                    loc: c.loc.prepend_branch(0),
                    ..c
                })
                .collect();
            out.extend(
                inputs_guarded(r, chan_value, payload)
                    .into_iter()
                    .map(|c| InCand {
                        loc: c.loc.prepend_branch(1),
                        ..c
                    }),
            );
            out
        }
        Guarded::New(x, g) => {
            let z = fresh_name(x.as_str());
            let mut map = std::collections::BTreeMap::new();
            map.insert(x.clone(), Message::Var(z.clone()));
            inputs_guarded(&subst_guarded(g, &map), chan_value, payload)
                .into_iter()
                .map(|mut c| {
                    c.extruded.insert(0, z.clone());
                    c
                })
                .collect()
        }
    }
}

fn plain_outputs(p: &Process) -> Vec<OutCand> {
    match p {
        Process::Nil => Vec::new(),
        Process::New(x, q) => {
            let z = fresh_name(x.as_str());
            let mut map = std::collections::BTreeMap::new();
            map.insert(x.clone(), Message::Var(z.clone()));
            plain_outputs(&subst_process(q, &map))
                .into_iter()
                .map(|mut c| {
                    c.extruded.insert(0, z.clone());
                    c
                })
                .collect()
        }
        Process::Par(l, r) => {
            let mut out: Vec<OutCand> = plain_outputs(l)
                .into_iter()
                .map(|c| OutCand {
                    loc: c.loc.prepend_prefix(0),
                    residual: Process::Par(Box::new(c.residual), r.clone()),
                    ..c
                })
                .collect();
            out.extend(plain_outputs(r).into_iter().map(|c| OutCand {
                loc: c.loc.prepend_prefix(1),
                residual: Process::Par(l.clone(), Box::new(c.residual)),
                ..c
            }));
            out
        }
        Process::Bang(q) => plain_outputs(q)
            .into_iter()
            .map(|c| OutCand {
                loc: c.loc.prepend_prefix(0),
                residual: Process::Par(Box::new(c.residual), Box::new(Process::Bang(q.clone()))),
                bangs: c.bangs + 1,
                ..c
            })
            .collect(),
        Process::Match(m, n, q) => {
            if eq_modulo_e(m, n) {
                plain_outputs(q)
            } else {
                Vec::new()
            }
        }
        Process::IfElse(m, n, t, e) => {
            if eq_modulo_e(m, n) {
                plain_outputs(t)
            } else {
                plain_outputs(e)
            }
        }
        Process::Guarded(g) => outputs_guarded(g),
    }
}

fn plain_inputs(p: &Process, chan_value: &Message, payload: &Message) -> Vec<InCand> {
    match p {
        Process::Nil => Vec::new(),
        Process::New(x, q) => {
            let z = fresh_name(x.as_str());
            let mut map = std::collections::BTreeMap::new();
            map.insert(x.clone(), Message::Var(z.clone()));
            plain_inputs(&subst_process(q, &map), chan_value, payload)
                .into_iter()
                .map(|mut c| {
                    c.extruded.insert(0, z.clone());
                    c
                })
                .collect()
        }
        Process::Par(l, r) => {
            let mut out: Vec<InCand> = plain_inputs(l, chan_value, payload)
                .into_iter()
                .map(|c| InCand {
                    loc: c.loc.prepend_prefix(0),
                    residual: Process::Par(Box::new(c.residual), r.clone()),
                    ..c
                })
                .collect();
            out.extend(
                plain_inputs(r, chan_value, payload)
                    .into_iter()
                    .map(|c| InCand {
                        loc: c.loc.prepend_prefix(1),
                        residual: Process::Par(l.clone(), Box::new(c.residual)),
                        ..c
                    }),
            );
            out
        }
        Process::Bang(q) => plain_inputs(q, chan_value, payload)
            .into_iter()
            .map(|c| InCand {
                loc: c.loc.prepend_prefix(0),
                residual: Process::Par(Box::new(c.residual), Box::new(Process::Bang(q.clone()))),
                bangs: c.bangs + 1,
                ..c
            })
            .collect(),
        Process::Match(m, n, q) => {
            if eq_modulo_e(m, n) {
                plain_inputs(q, chan_value, payload)
            } else {
                Vec::new()
            }
        }
        Process::IfElse(m, n, t, e) => {
            if eq_modulo_e(m, n) {
                plain_inputs(t, chan_value, payload)
            } else {
                plain_inputs(e, chan_value, payload)
            }
        }
        Process::Guarded(g) => inputs_guarded(g, chan_value, payload),
    }
}

fn plain_taus(p: &Process) -> Vec<TauCand> {
    match p {
        Process::Nil | Process::Guarded(_) => Vec::new(),
        Process::New(x, q) => {
            let z = fresh_name(x.as_str());
            let mut map = std::collections::BTreeMap::new();
            map.insert(x.clone(), Message::Var(z.clone()));
            plain_taus(&subst_process(q, &map))
                .into_iter()
                .map(|mut c| {
                    c.extruded.insert(0, z.clone());
                    c
                })
                .collect()
        }
        Process::Par(l, r) => {
            let mut out: Vec<TauCand> = plain_taus(l)
                .into_iter()
                .map(|c| TauCand {
                    loc: c.loc.prepend(0),
                    residual: Process::Par(Box::new(c.residual), r.clone()),
                    ..c
                })
                .collect();
            out.extend(plain_taus(r).into_iter().map(|c| TauCand {
                loc: c.loc.prepend(1),
                residual: Process::Par(l.clone(), Box::new(c.residual)),
                ..c
            }));
            // Close-L: output in the left component, input in the right.
            for o in plain_outputs(l) {
                for i in plain_inputs(r, &o.chan, &o.payload) {
                    let mut extruded = o.extruded.clone();
                    extruded.extend(i.extruded.clone());
                    out.push(TauCand {
                        loc: LocationLabel::Pair(
                            o.loc.prepend_prefix(0),
                            i.loc.prepend_prefix(1),
                        ),
                        extruded,
                        residual: Process::Par(
                            Box::new(o.residual.clone()),
                            Box::new(i.residual),
                        ),
                        bangs: o.bangs + i.bangs,
                    });
                }
            }
            // Close-R: output in the right component; its location still
            // comes first in the pair.
            for o in plain_outputs(r) {
                for i in plain_inputs(l, &o.chan, &o.payload) {
                    let mut extruded = i.extruded.clone();
                    extruded.extend(o.extruded.clone());
                    out.push(TauCand {
                        loc: LocationLabel::Pair(
                            o.loc.prepend_prefix(1),
                            i.loc.prepend_prefix(0),
                        ),
                        extruded,
                        residual: Process::Par(
                            Box::new(i.residual),
                            Box::new(o.residual.clone()),
                        ),
                        bangs: o.bangs + i.bangs,
                    });
                }
            }
            out
        }
        Process::Bang(q) => {
            let mut out: Vec<TauCand> = plain_taus(q)
                .into_iter()
                .map(|c| TauCand {
                    loc: c.loc.prepend(0),
                    residual: Process::Par(
                        Box::new(c.residual),
                        Box::new(Process::Bang(q.clone())),
                    ),
                    bangs: c.bangs + 1,
                    ..c
                })
                .collect();
            // Interaction across two unfolded copies.
            for o in plain_outputs(q) {
                for i in plain_inputs(q, &o.chan, &o.payload) {
                    let mut extruded = o.extruded.clone();
                    extruded.extend(i.extruded.clone());
                    out.push(TauCand {
                        loc: LocationLabel::Pair(
                            o.loc.prepend_prefix(0),
                            i.loc.prepend_prefix(0).prepend_prefix(1),
                        ),
                        extruded,
                        residual: Process::Par(
                            Box::new(o.residual.clone()),
                            Box::new(Process::Par(
                                Box::new(i.residual),
                                Box::new(Process::Bang(q.clone())),
                            )),
                        ),
                        bangs: o.bangs + i.bangs + 2,
                    });
                }
            }
            for o in plain_outputs(q) {
                for i in plain_inputs(q, &o.chan, &o.payload) {
                    let mut extruded = i.extruded.clone();
                    extruded.extend(o.extruded.clone());
                    out.push(TauCand {
                        loc: LocationLabel::Pair(
                            o.loc.prepend_prefix(0).prepend_prefix(1),
                            i.loc.prepend_prefix(0),
                        ),
                        extruded,
                        residual: Process::Par(
                            Box::new(i.residual),
                            Box::new(Process::Par(
                                Box::new(o.residual.clone()),
                                Box::new(Process::Bang(q.clone())),
                            )),
                        ),
                        bangs: o.bangs + i.bangs + 2,
                    });
                }
            }
            out
        }
        Process::Match(m, n, q) => {
            if eq_modulo_e(m, n) {
                plain_taus(q)
            } else {
                Vec::new()
            }
        }
        Process::IfElse(m, n, t, e) => {
            if eq_modulo_e(m, n) {
                plain_taus(t)
            } else {
                plain_taus(e)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Extended-level transitions
// ---------------------------------------------------------------------------

/// Saturation of the state's frame together with the public constants of
/// frame and body: the attacker's deducible messages with minimal recipes.
pub fn state_saturation(ep: &ExtendedProcess) -> Saturation {
    let mut publics: BTreeSet<Ident> = BTreeSet::new();
    for (_, v) in ep.frame.iter() {
        v.free_constants(&mut publics);
    }
    crate::procs::free_constants_process(&ep.body, &mut publics);
    let frame = ep.frame_view();
    let pool = public_pool(&frame, &publics.into_iter().collect::<Vec<_>>());
    saturate(&frame, &pool)
}

/// Pick a fresh alias for an output fired at location prefix `s`: the
/// prefix is `s` itself and bases are numbered per thread by output count.
fn fresh_alias(ep: &ExtendedProcess, prefix: &Bits) -> Alias {
    let mut n = ep
        .frame
        .domain()
        .filter(|a| a.prefix == *prefix)
        .count()
        + 1;
    loop {
        let alias = Alias::new(prefix.clone(), format!("lam{n}").as_str());
        if !ep.frame.contains(&alias) {
            return alias;
        }
        n += 1;
    }
}

impl ExtendedProcess {
    /// All derivable transitions whose action is an output or an
    /// interaction. Outputs on channels the attacker cannot deduce a recipe
    /// for are unobservable and omitted.
    pub fn output_and_tau_steps(&self) -> Vec<Transition> {
        let sat = state_saturation(self);
        self.output_and_tau_steps_with(&sat)
    }

    pub fn output_and_tau_steps_with(&self, sat: &Saturation) -> Vec<Transition> {
        let mut out = Vec::new();
        for c in plain_outputs(&self.body) {
            let Some(chan_recipe) = constructive_recipe_of(sat, &c.chan) else {
                continue;
            };
            let alias = fresh_alias(self, &c.loc.prefix);
            let mut bound = self.bound.clone();
            bound.extend(c.extruded.iter().cloned());
            let frame = self.frame.extend(alias.clone(), c.payload.clone());
            out.push(Transition {
                event: Event {
                    action: ActionLabel::Output(chan_recipe, alias),
                    loc: LocationLabel::One(c.loc),
                },
                target: ExtendedProcess::new(bound, frame, c.residual),
                bang_spawns: c.bangs,
            });
        }
        for c in plain_taus(&self.body) {
            let mut bound = self.bound.clone();
            bound.extend(c.extruded.iter().cloned());
            out.push(Transition {
                event: Event {
                    action: ActionLabel::Tau,
                    loc: c.loc,
                },
                target: ExtendedProcess::new(bound, self.frame.clone(), c.residual),
                bang_spawns: c.bangs,
            });
        }
        out
    }

    /// All transitions labelled with the given input recipes. The recipes
    /// may mention aliases of the frame and public constants but no
    /// restricted names.
    pub fn input_steps(
        &self,
        chan_recipe: &Message,
        payload_recipe: &Message,
    ) -> Result<Vec<Transition>, SosError> {
        for recipe in [chan_recipe, payload_recipe] {
            if let Some(x) = recipe.vars().into_iter().next() {
                return Err(TermError::BoundNameInRecipe(x).into());
            }
            for a in recipe.aliases() {
                if !self.frame.contains(&a) {
                    return Err(TermError::UnknownAlias(a).into());
                }
            }
        }
        let chan_value = normalize(&self.frame.apply(chan_recipe));
        let payload_value = normalize(&self.frame.apply(payload_recipe));
        let mut out = Vec::new();
        for c in plain_inputs(&self.body, &chan_value, &payload_value) {
            let mut bound = self.bound.clone();
            bound.extend(c.extruded.iter().cloned());
            out.push(Transition {
                event: Event {
                    action: ActionLabel::Input(chan_recipe.clone(), payload_recipe.clone()),
                    loc: LocationLabel::One(c.loc),
                },
                target: ExtendedProcess::new(bound, self.frame.clone(), c.residual),
                bang_spawns: c.bangs,
            });
        }
        Ok(out)
    }

    /// The unique (up to alpha) successor reached by `event`. Event
    /// determinism is asserted: all derivations with the same event yield
    /// alpha-equal states.
    pub fn step(&self, event: &Event) -> Result<ExtendedProcess, SosError> {
        let cands: Vec<Transition> = match &event.action {
            ActionLabel::Input(m, n) => self.input_steps(m, n)?,
            _ => self.output_and_tau_steps(),
        };
        let mut hits: Vec<ExtendedProcess> = cands
            .into_iter()
            .filter(|t| t.event == *event)
            .map(|t| t.target)
            .collect();
        let Some(first) = hits.pop() else {
            return Err(SosError::NoSuchEvent(event.to_string()));
        };
        for other in &hits {
            debug_assert!(
                crate::procs::alpha_equal(&first, other),
                "event determinism violated for {event}"
            );
        }
        Ok(first)
    }

    /// Channel values of input prefixes reachable behind satisfied guards;
    /// a superset filter for recipe enumeration.
    pub fn enabled_input_channels(&self) -> BTreeSet<Message> {
        fn walk_guarded(g: &Guarded, out: &mut BTreeSet<Message>) {
            match g {
                Guarded::In(c, _, _) => {
                    out.insert(normalize(c));
                }
                Guarded::Out(_, _, _) => {}
                Guarded::Match(m, n, g) => {
                    if eq_modulo_e(m, n) {
                        walk_guarded(g, out);
                    }
                }
                Guarded::Sum(l, r) => {
                    walk_guarded(l, out);
                    walk_guarded(r, out);
                }
                Guarded::New(_, g) => walk_guarded(g, out),
            }
        }
        fn walk(p: &Process, out: &mut BTreeSet<Message>) {
            match p {
                Process::Nil => {}
                Process::New(_, q) | Process::Bang(q) => walk(q, out),
                Process::Par(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Process::Match(m, n, q) => {
                    if eq_modulo_e(m, n) {
                        walk(q, out);
                    }
                }
                Process::IfElse(m, n, t, e) => {
                    if eq_modulo_e(m, n) {
                        walk(t, out);
                    } else {
                        walk(e, out);
                    }
                }
                Process::Guarded(g) => walk_guarded(g, out),
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.body, &mut out);
        out
    }

    /// Outputs, interactions and inputs over a pool of recipes: the
    /// exploration frontier used by the state-space tools.
    pub fn explore_steps(&self, pool: &[Message]) -> Vec<Transition> {
        let mut out = self.output_and_tau_steps();
        let receivers = self.enabled_input_channels();
        let mut seen = BTreeSet::new();
        for chan in pool {
            let chan_value = normalize(&self.frame.apply(chan));
            if !receivers.contains(&chan_value) || !seen.insert(chan_value) {
                continue;
            }
            for payload in pool {
                if let Ok(steps) = self.input_steps(chan, payload) {
                    out.extend(steps);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procs::{alpha_equal, parse_process, reset_fresh_names};

    fn ex1() -> ExtendedProcess {
        parse_process("new m,n.(out(a,pair(m,n)) | in(m,x).[x = n] out(ok,ok))").unwrap()
    }

    #[test]
    fn running_example_output_step() {
        reset_fresh_names();
        let ep = ex1();
        let steps = ep.output_and_tau_steps();
        assert_eq!(steps.len(), 1);
        let t = &steps[0];
        match &t.event.action {
            ActionLabel::Output(chan, alias) => {
                assert_eq!(chan, &Message::constant("a"));
                assert_eq!(alias.prefix, Bits::from_str("0").unwrap());
            }
            other => panic!("unexpected action {other}"),
        }
        assert_eq!(t.event.loc, LocationLabel::One(Location {
            prefix: Bits::from_str("0").unwrap(),
            branch: Bits::empty(),
        }));
        // Private names never occur in the label.
        assert!(t.event.action.free_vars().is_empty());
        // The frame gained the pair under the new alias.
        assert_eq!(t.target.frame.len(), 1);
        assert_eq!(t.target.bound.len(), 2);
    }

    #[test]
    fn running_example_input_step() {
        reset_fresh_names();
        let ep = ex1();
        let after_out = &ep.output_and_tau_steps()[0].target;
        let alias = after_out.frame.domain().next().unwrap().clone();
        let chan = Message::fst(Message::Alias(alias.clone()));
        let payload = Message::snd(Message::Alias(alias));
        let steps = after_out.input_steps(&chan, &payload).unwrap();
        assert_eq!(steps.len(), 1);
        let t = &steps[0];
        assert_eq!(
            t.event.loc,
            LocationLabel::One(Location {
                prefix: Bits::from_str("1").unwrap(),
                branch: Bits::empty(),
            })
        );
        // The continuation's match succeeds: the next step is the ok output.
        let next = t.target.output_and_tau_steps();
        assert_eq!(next.len(), 1);
        match &next[0].event.action {
            ActionLabel::Output(chan, _) => assert_eq!(chan, &Message::constant("ok")),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn deadlock_has_no_steps() {
        let ep = parse_process("0").unwrap();
        assert!(ep.output_and_tau_steps().is_empty());
        assert!(ep
            .input_steps(&Message::constant("c"), &Message::constant("c"))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_parallel_outputs_have_two_locations() {
        let ep = parse_process("out(a,a) | out(a,a)").unwrap();
        let steps = ep.output_and_tau_steps();
        assert_eq!(steps.len(), 2);
        let locs: Vec<String> = steps.iter().map(|t| t.event.loc.to_string()).collect();
        assert_eq!(locs, vec!["0[]", "1[]"]);
    }

    #[test]
    fn nested_parallel_locations() {
        // Outputs at 0, 1, then 10 and 11 after the b output fires.
        let ep = parse_process("out(a,a) | out(b,b).(out(c,c) | out(d,d))").unwrap();
        let steps = ep.output_and_tau_steps();
        let locs: Vec<String> = steps.iter().map(|t| t.event.loc.to_string()).collect();
        assert_eq!(locs, vec!["0[]", "1[]"]);
        let after_b = steps[1].target.clone();
        let locs: Vec<String> = after_b
            .output_and_tau_steps()
            .iter()
            .map(|t| t.event.loc.to_string())
            .collect();
        assert_eq!(locs, vec!["0[]", "10[]", "11[]"]);
    }

    #[test]
    fn sum_branches_record_choice() {
        let ep = parse_process("out(a,a) + out(b,b)").unwrap();
        let steps = ep.output_and_tau_steps();
        let locs: Vec<String> = steps.iter().map(|t| t.event.loc.to_string()).collect();
        assert_eq!(locs, vec!["[0]", "[1]"]);
        // The unchosen branch is discarded.
        assert!(steps[0].target.body == Process::Nil);
    }

    #[test]
    fn close_keeps_output_location_first() {
        reset_fresh_names();
        let ep = parse_process("new k.(out(k,m).0 | in(k,x).0)").unwrap();
        let steps = ep.output_and_tau_steps();
        assert_eq!(steps.len(), 1, "private channel: only the interaction");
        assert_eq!(steps[0].event.loc.to_string(), "(0[],1[])");

        let ep = parse_process("new k.(in(k,x).0 | out(k,m).0)").unwrap();
        let steps = ep.output_and_tau_steps();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].event.loc.to_string(), "(1[],0[])");
    }

    #[test]
    fn output_on_private_channel_is_unobservable() {
        let ep = parse_process("new e.out(e,m)").unwrap();
        assert!(ep.output_and_tau_steps().is_empty());
    }

    #[test]
    fn output_on_extruded_channel_uses_alias_recipe() {
        reset_fresh_names();
        let ep = parse_process("new e.(out(a,e).out(e,m))").unwrap();
        let steps = ep.output_and_tau_steps();
        assert_eq!(steps.len(), 1);
        let after = steps[0].target.clone();
        let alias = after.frame.domain().next().unwrap().clone();
        let steps = after.output_and_tau_steps();
        assert_eq!(steps.len(), 1);
        match &steps[0].event.action {
            ActionLabel::Output(chan, _) => assert_eq!(chan, &Message::Alias(alias)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bang_unfolds_one_head_copy() {
        reset_fresh_names();
        let ep = parse_process("!new x.out(a,x)").unwrap();
        let steps = ep.output_and_tau_steps();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].event.loc.to_string(), "0[]");
        assert_eq!(steps[0].bang_spawns, 1);
        let next = steps[0].target.output_and_tau_steps();
        assert_eq!(next.len(), 1);
        assert_eq!(next[0].event.loc.to_string(), "10[]");
    }

    #[test]
    fn replay_any_step_is_alpha_equal() {
        reset_fresh_names();
        let ep = ex1();
        for t in ep.output_and_tau_steps() {
            let replayed = ep.step(&t.event).unwrap();
            assert!(alpha_equal(&replayed, &t.target));
        }
    }

    #[test]
    fn step_rejects_missing_event() {
        let ep = parse_process("0").unwrap();
        let bogus = Event {
            action: ActionLabel::Tau,
            loc: LocationLabel::One(Location::here()),
        };
        assert!(matches!(ep.step(&bogus), Err(SosError::NoSuchEvent(_))));
    }

    #[test]
    fn input_recipe_with_bound_name_rejected() {
        reset_fresh_names();
        let ep = ex1();
        let after = &ep.output_and_tau_steps()[0].target;
        let private = Message::Var(after.bound[0].clone());
        assert!(after.input_steps(&private, &Message::constant("x")).is_err());
    }
}
