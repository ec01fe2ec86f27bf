//! Process and extended-process syntax, parser, printer, alpha-machinery and
//! the normal-form discipline (aliases never occur inside plain processes).

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::terms::{Alias, Bits, Frame, Ident, Message, Subst, Symbol};

/// Plain processes.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Process {
    Nil,
    New(Ident, Box<Process>),
    Par(Box<Process>, Box<Process>),
    Bang(Box<Process>),
    Match(Message, Message, Box<Process>),
    IfElse(Message, Message, Box<Process>, Box<Process>),
    Guarded(Guarded),
}

/// Guarded processes: the operands of non-deterministic choice.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Guarded {
    In(Message, Ident, Box<Process>),
    Out(Message, Message, Box<Process>),
    Match(Message, Message, Box<Guarded>),
    Sum(Box<Guarded>, Box<Guarded>),
    New(Ident, Box<Guarded>),
}

/// An extended process in normal form: restriction-prefixed active
/// substitution and plain process.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExtendedProcess {
    pub bound: Vec<Ident>,
    pub frame: Subst,
    pub body: Process,
}

impl ExtendedProcess {
    pub fn new(bound: Vec<Ident>, frame: Subst, body: Process) -> Self {
        ExtendedProcess { bound, frame, body }
    }

    pub fn from_body(body: Process) -> Self {
        ExtendedProcess {
            bound: Vec::new(),
            frame: Subst::identity(),
            body,
        }
    }

    /// The static view: restricted names plus active substitution.
    pub fn frame_view(&self) -> Frame {
        Frame::new(self.bound.clone(), self.frame.clone())
    }

    pub fn is_bound(&self, x: &Ident) -> bool {
        self.bound.contains(x)
    }
}

thread_local! {
    static FRESH: Cell<u64> = const { Cell::new(0) };
}

/// Reset the fresh-name counter. Commands reset this once at startup so that
/// generated names, and hence reports, are reproducible.
pub fn reset_fresh_names() {
    FRESH.with(|c| c.set(0));
}

/// A fresh name built from a stem; the global counter guarantees it differs
/// from every name generated so far in this check.
pub fn fresh_name(stem: &str) -> Ident {
    let base: String = stem.chars().take_while(|c| *c != '\'').collect();
    let base = if base.is_empty() { "x" } else { &base };
    let n = FRESH.with(|c| {
        let v = c.get();
        c.set(v + 1);
        v
    });
    Ident::new(&format!("{base}'{n}"))
}

// ---------------------------------------------------------------------------
// Free variables and aliases
// ---------------------------------------------------------------------------

pub fn free_vars_guarded(g: &Guarded, acc: &mut BTreeSet<Ident>) {
    match g {
        Guarded::In(c, x, p) => {
            c.free_vars(acc);
            let mut inner = BTreeSet::new();
            free_vars_process(p, &mut inner);
            inner.remove(x);
            acc.extend(inner);
        }
        Guarded::Out(c, m, p) => {
            c.free_vars(acc);
            m.free_vars(acc);
            free_vars_process(p, acc);
        }
        Guarded::Match(m, n, g) => {
            m.free_vars(acc);
            n.free_vars(acc);
            free_vars_guarded(g, acc);
        }
        Guarded::Sum(l, r) => {
            free_vars_guarded(l, acc);
            free_vars_guarded(r, acc);
        }
        Guarded::New(x, g) => {
            let mut inner = BTreeSet::new();
            free_vars_guarded(g, &mut inner);
            inner.remove(x);
            acc.extend(inner);
        }
    }
}

pub fn free_vars_process(p: &Process, acc: &mut BTreeSet<Ident>) {
    match p {
        Process::Nil => {}
        Process::New(x, q) => {
            let mut inner = BTreeSet::new();
            free_vars_process(q, &mut inner);
            inner.remove(x);
            acc.extend(inner);
        }
        Process::Par(l, r) => {
            free_vars_process(l, acc);
            free_vars_process(r, acc);
        }
        Process::Bang(q) => free_vars_process(q, acc),
        Process::Match(m, n, q) => {
            m.free_vars(acc);
            n.free_vars(acc);
            free_vars_process(q, acc);
        }
        Process::IfElse(m, n, t, e) => {
            m.free_vars(acc);
            n.free_vars(acc);
            free_vars_process(t, acc);
            free_vars_process(e, acc);
        }
        Process::Guarded(g) => free_vars_guarded(g, acc),
    }
}

/// Free variables of an extended process:
/// fv(nu x.A) = fv(A) \ {x}, fv(sigma | P) = fv(ran sigma) u fv(P).
pub fn free_vars_extended(ep: &ExtendedProcess) -> BTreeSet<Ident> {
    let mut acc = BTreeSet::new();
    for (_, v) in ep.frame.iter() {
        v.free_vars(&mut acc);
    }
    free_vars_process(&ep.body, &mut acc);
    for x in &ep.bound {
        acc.remove(x);
    }
    acc
}

pub fn free_constants_process(p: &Process, acc: &mut BTreeSet<Ident>) {
    match p {
        Process::Nil => {}
        Process::New(_, q) | Process::Bang(q) => free_constants_process(q, acc),
        Process::Par(l, r) => {
            free_constants_process(l, acc);
            free_constants_process(r, acc);
        }
        Process::Match(m, n, q) => {
            m.free_constants(acc);
            n.free_constants(acc);
            free_constants_process(q, acc);
        }
        Process::IfElse(m, n, t, e) => {
            m.free_constants(acc);
            n.free_constants(acc);
            free_constants_process(t, acc);
            free_constants_process(e, acc);
        }
        Process::Guarded(g) => free_constants_guarded(g, acc),
    }
}

fn free_constants_guarded(g: &Guarded, acc: &mut BTreeSet<Ident>) {
    match g {
        Guarded::In(c, _, p) => {
            c.free_constants(acc);
            free_constants_process(p, acc);
        }
        Guarded::Out(c, m, p) => {
            c.free_constants(acc);
            m.free_constants(acc);
            free_constants_process(p, acc);
        }
        Guarded::Match(m, n, g) => {
            m.free_constants(acc);
            n.free_constants(acc);
            free_constants_guarded(g, acc);
        }
        Guarded::Sum(l, r) => {
            free_constants_guarded(l, acc);
            free_constants_guarded(r, acc);
        }
        Guarded::New(_, g) => free_constants_guarded(g, acc),
    }
}

/// First alias occurring inside a plain process, if any (normal-form check).
pub fn find_alias_in_process(p: &Process) -> Option<Alias> {
    fn in_msg(m: &Message) -> Option<Alias> {
        m.aliases().into_iter().next()
    }
    fn in_guarded(g: &Guarded) -> Option<Alias> {
        match g {
            Guarded::In(c, _, p) => in_msg(c).or_else(|| find_alias_in_process(p)),
            Guarded::Out(c, m, p) => in_msg(c)
                .or_else(|| in_msg(m))
                .or_else(|| find_alias_in_process(p)),
            Guarded::Match(m, n, g) => in_msg(m).or_else(|| in_msg(n)).or_else(|| in_guarded(g)),
            Guarded::Sum(l, r) => in_guarded(l).or_else(|| in_guarded(r)),
            Guarded::New(_, g) => in_guarded(g),
        }
    }
    match p {
        Process::Nil => None,
        Process::New(_, q) | Process::Bang(q) => find_alias_in_process(q),
        Process::Par(l, r) => find_alias_in_process(l).or_else(|| find_alias_in_process(r)),
        Process::Match(m, n, q) => in_msg(m)
            .or_else(|| in_msg(n))
            .or_else(|| find_alias_in_process(q)),
        Process::IfElse(m, n, t, e) => in_msg(m)
            .or_else(|| in_msg(n))
            .or_else(|| find_alias_in_process(t))
            .or_else(|| find_alias_in_process(e)),
        Process::Guarded(g) => in_guarded(g),
    }
}

// ---------------------------------------------------------------------------
// Capture-avoiding substitution of message variables
// ---------------------------------------------------------------------------

fn range_vars(map: &BTreeMap<Ident, Message>) -> BTreeSet<Ident> {
    let mut s = BTreeSet::new();
    for v in map.values() {
        v.free_vars(&mut s);
    }
    s
}

pub fn subst_process(p: &Process, map: &BTreeMap<Ident, Message>) -> Process {
    if map.is_empty() {
        return p.clone();
    }
    match p {
        Process::Nil => Process::Nil,
        Process::New(x, q) => {
            let (x, q, map) = rebind(x, q.as_ref(), map);
            Process::New(x, Box::new(subst_process(&q, &map)))
        }
        Process::Par(l, r) => Process::Par(
            Box::new(subst_process(l, map)),
            Box::new(subst_process(r, map)),
        ),
        Process::Bang(q) => Process::Bang(Box::new(subst_process(q, map))),
        Process::Match(m, n, q) => Process::Match(
            m.subst_vars(map),
            n.subst_vars(map),
            Box::new(subst_process(q, map)),
        ),
        Process::IfElse(m, n, t, e) => Process::IfElse(
            m.subst_vars(map),
            n.subst_vars(map),
            Box::new(subst_process(t, map)),
            Box::new(subst_process(e, map)),
        ),
        Process::Guarded(g) => Process::Guarded(subst_guarded(g, map)),
    }
}

pub fn subst_guarded(g: &Guarded, map: &BTreeMap<Ident, Message>) -> Guarded {
    match g {
        Guarded::In(c, x, p) => {
            let (x, p, map) = rebind(x, p.as_ref(), map);
            Guarded::In(c.subst_vars(&map), x, Box::new(subst_process(&p, &map)))
        }
        Guarded::Out(c, m, p) => Guarded::Out(
            c.subst_vars(map),
            m.subst_vars(map),
            Box::new(subst_process(p, map)),
        ),
        Guarded::Match(m, n, g) => Guarded::Match(
            m.subst_vars(map),
            n.subst_vars(map),
            Box::new(subst_guarded(g, map)),
        ),
        Guarded::Sum(l, r) => Guarded::Sum(
            Box::new(subst_guarded(l, map)),
            Box::new(subst_guarded(r, map)),
        ),
        Guarded::New(x, g) => {
            let (x, g, map) = rebind_guarded(x, g.as_ref(), map);
            Guarded::New(x, Box::new(subst_guarded(&g, &map)))
        }
    }
}

/// Drop the binder from the substitution and rename it when it would capture.
fn rebind(
    x: &Ident,
    body: &Process,
    map: &BTreeMap<Ident, Message>,
) -> (Ident, Process, BTreeMap<Ident, Message>) {
    let mut map = map.clone();
    map.remove(x);
    if range_vars(&map).contains(x) {
        let fresh = fresh_name(x.as_str());
        let mut rn = BTreeMap::new();
        rn.insert(x.clone(), Message::Var(fresh.clone()));
        (fresh, subst_process(body, &rn), map)
    } else {
        (x.clone(), body.clone(), map)
    }
}

fn rebind_guarded(
    x: &Ident,
    body: &Guarded,
    map: &BTreeMap<Ident, Message>,
) -> (Ident, Guarded, BTreeMap<Ident, Message>) {
    let mut map = map.clone();
    map.remove(x);
    if range_vars(&map).contains(x) {
        let fresh = fresh_name(x.as_str());
        let mut rn = BTreeMap::new();
        rn.insert(x.clone(), Message::Var(fresh.clone()));
        (fresh, subst_guarded(body, &rn), map)
    } else {
        (x.clone(), body.clone(), map)
    }
}

// ---------------------------------------------------------------------------
// Canonical renaming and the congruence quotient
// ---------------------------------------------------------------------------

struct Canon {
    map: BTreeMap<Ident, Ident>,
    next: usize,
}

impl Canon {
    fn new() -> Self {
        Canon {
            map: BTreeMap::new(),
            next: 0,
        }
    }

    fn assign(&mut self, x: &Ident) -> Ident {
        if let Some(y) = self.map.get(x) {
            return y.clone();
        }
        let y = Ident::new(&format!("v{}", self.next));
        self.next += 1;
        self.map.insert(x.clone(), y.clone());
        y
    }
}

fn canon_msg(m: &Message, c: &Canon, bound: &BTreeSet<Ident>) -> Message {
    match m {
        Message::Var(x) => {
            if let Some(y) = c.map.get(x) {
                if bound.contains(x) {
                    return Message::Var(y.clone());
                }
            }
            m.clone()
        }
        Message::Constant(_) | Message::Alias(_) => m.clone(),
        Message::App(f, args) => Message::App(
            *f,
            args.iter().map(|a| canon_msg(a, c, bound)).collect(),
        ),
    }
}

fn canon_process(p: &Process, c: &mut Canon, bound: &mut BTreeSet<Ident>) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::New(x, q) => {
            let shadow = shadow_in(c, bound, x);
            let y = c.assign(x);
            let q = canon_process(q, c, bound);
            unshadow(c, bound, x, shadow);
            Process::New(y, Box::new(q))
        }
        Process::Par(l, r) => Process::Par(
            Box::new(canon_process(l, c, bound)),
            Box::new(canon_process(r, c, bound)),
        ),
        Process::Bang(q) => Process::Bang(Box::new(canon_process(q, c, bound))),
        Process::Match(m, n, q) => Process::Match(
            canon_msg(m, c, bound),
            canon_msg(n, c, bound),
            Box::new(canon_process(q, c, bound)),
        ),
        Process::IfElse(m, n, t, e) => Process::IfElse(
            canon_msg(m, c, bound),
            canon_msg(n, c, bound),
            Box::new(canon_process(t, c, bound)),
            Box::new(canon_process(e, c, bound)),
        ),
        Process::Guarded(g) => Process::Guarded(canon_guarded(g, c, bound)),
    }
}

fn canon_guarded(g: &Guarded, c: &mut Canon, bound: &mut BTreeSet<Ident>) -> Guarded {
    match g {
        Guarded::In(ch, x, p) => {
            let ch = canon_msg(ch, c, bound);
            let shadow = shadow_in(c, bound, x);
            let y = c.assign(x);
            let p = canon_process(p, c, bound);
            unshadow(c, bound, x, shadow);
            Guarded::In(ch, y, Box::new(p))
        }
        Guarded::Out(ch, m, p) => Guarded::Out(
            canon_msg(ch, c, bound),
            canon_msg(m, c, bound),
            Box::new(canon_process(p, c, bound)),
        ),
        Guarded::Match(m, n, g) => Guarded::Match(
            canon_msg(m, c, bound),
            canon_msg(n, c, bound),
            Box::new(canon_guarded(g, c, bound)),
        ),
        Guarded::Sum(l, r) => Guarded::Sum(
            Box::new(canon_guarded(l, c, bound)),
            Box::new(canon_guarded(r, c, bound)),
        ),
        Guarded::New(x, g) => {
            let shadow = shadow_in(c, bound, x);
            let y = c.assign(x);
            let g = canon_guarded(g, c, bound);
            unshadow(c, bound, x, shadow);
            Guarded::New(y, Box::new(g))
        }
    }
}

fn shadow_in(c: &mut Canon, bound: &mut BTreeSet<Ident>, x: &Ident) -> (Option<Ident>, bool) {
    let prev = c.map.remove(x);
    let was = !bound.insert(x.clone());
    (prev, was)
}

fn unshadow(c: &mut Canon, bound: &mut BTreeSet<Ident>, x: &Ident, st: (Option<Ident>, bool)) {
    let (prev, was) = st;
    c.map.remove(x);
    if let Some(p) = prev {
        c.map.insert(x.clone(), p);
    }
    if !was {
        bound.remove(x);
    }
}

/// Canonical form up to alpha-conversion only: bound names renamed in
/// traversal order, top-level restrictions ordered by first occurrence,
/// aliases untouched.
pub fn canon_alpha(ep: &ExtendedProcess) -> ExtendedProcess {
    let mut c = Canon::new();
    let mut bound: BTreeSet<Ident> = ep.bound.iter().cloned().collect();
    // Assign canonical names to top-level bound names in occurrence order:
    // frame values first (sorted by alias), then the body.
    let mut occs: Vec<Ident> = Vec::new();
    for (_, v) in ep.frame.iter() {
        collect_var_occurrences(v, &mut occs);
    }
    let mut frame_map = BTreeMap::new();
    for (a, v) in ep.frame.iter() {
        frame_map.insert(a.clone(), v.clone());
    }
    for x in &occs {
        if bound.contains(x) {
            c.assign(x);
        }
    }
    let frame = Subst::from_map(
        frame_map
            .iter()
            .map(|(a, v)| (a.clone(), canon_msg(v, &c, &bound)))
            .collect(),
    );
    let body = canon_process(&ep.body, &mut c, &mut bound);
    let mut new_bound: Vec<(usize, Ident)> = Vec::new();
    for x in &ep.bound {
        let y = c.assign(x);
        let idx: usize = y.as_str()[1..].parse().unwrap_or(usize::MAX);
        new_bound.push((idx, y));
    }
    new_bound.sort();
    ExtendedProcess {
        bound: new_bound.into_iter().map(|(_, y)| y).collect(),
        frame,
        body,
    }
}

fn collect_var_occurrences(m: &Message, out: &mut Vec<Ident>) {
    match m {
        Message::Var(x) => out.push(x.clone()),
        Message::Constant(_) | Message::Alias(_) => {}
        Message::App(_, args) => {
            for a in args {
                collect_var_occurrences(a, out);
            }
        }
    }
}

/// Rewrite under the structural congruence used for image-finiteness:
/// permutation of adjacent restrictions, P | !P identified with !P, and
/// (when `prune_nil` is set) elimination of deadlocked parallel components.
/// Locations are not stable under these rewrites, so live exploration never
/// applies them; they serve comparison and display.
pub fn quotient_process(p: &Process, prune_nil: bool) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::New(_, _) => {
            // Gather the chain of restrictions and order by first use.
            let mut names = Vec::new();
            let mut cur = p;
            while let Process::New(x, q) = cur {
                names.push(x.clone());
                cur = q;
            }
            let body = quotient_process(cur, prune_nil);
            let mut occs = Vec::new();
            collect_process_var_occurrences(&body, &mut occs);
            let mut ordered: Vec<Ident> = Vec::new();
            for x in &occs {
                if names.contains(x) && !ordered.contains(x) {
                    ordered.push(x.clone());
                }
            }
            for x in names {
                if !ordered.contains(&x) {
                    ordered.push(x);
                }
            }
            let mut out = body;
            for x in ordered.into_iter().rev() {
                out = Process::New(x, Box::new(out));
            }
            out
        }
        Process::Par(l, r) => {
            let l = quotient_process(l, prune_nil);
            let r = quotient_process(r, prune_nil);
            if prune_nil && l == Process::Nil {
                return r;
            }
            if prune_nil && r == Process::Nil {
                return l;
            }
            if let Process::Bang(q) = &r {
                if *q.as_ref() == l {
                    return r;
                }
            }
            Process::Par(Box::new(l), Box::new(r))
        }
        Process::Bang(q) => Process::Bang(Box::new(quotient_process(q, prune_nil))),
        Process::Match(m, n, q) => Process::Match(
            m.clone(),
            n.clone(),
            Box::new(quotient_process(q, prune_nil)),
        ),
        Process::IfElse(m, n, t, e) => Process::IfElse(
            m.clone(),
            n.clone(),
            Box::new(quotient_process(t, prune_nil)),
            Box::new(quotient_process(e, prune_nil)),
        ),
        Process::Guarded(_) => p.clone(),
    }
}

fn collect_process_var_occurrences(p: &Process, out: &mut Vec<Ident>) {
    match p {
        Process::Nil => {}
        Process::New(x, q) => {
            out.push(x.clone());
            collect_process_var_occurrences(q, out);
        }
        Process::Par(l, r) => {
            collect_process_var_occurrences(l, out);
            collect_process_var_occurrences(r, out);
        }
        Process::Bang(q) => collect_process_var_occurrences(q, out),
        Process::Match(m, n, q) => {
            collect_var_occurrences(m, out);
            collect_var_occurrences(n, out);
            collect_process_var_occurrences(q, out);
        }
        Process::IfElse(m, n, t, e) => {
            collect_var_occurrences(m, out);
            collect_var_occurrences(n, out);
            collect_process_var_occurrences(t, out);
            collect_process_var_occurrences(e, out);
        }
        Process::Guarded(g) => collect_guarded_var_occurrences(g, out),
    }
}

fn collect_guarded_var_occurrences(g: &Guarded, out: &mut Vec<Ident>) {
    match g {
        Guarded::In(c, x, p) => {
            collect_var_occurrences(c, out);
            out.push(x.clone());
            collect_process_var_occurrences(p, out);
        }
        Guarded::Out(c, m, p) => {
            collect_var_occurrences(c, out);
            collect_var_occurrences(m, out);
            collect_process_var_occurrences(p, out);
        }
        Guarded::Match(m, n, g) => {
            collect_var_occurrences(m, out);
            collect_var_occurrences(n, out);
            collect_guarded_var_occurrences(g, out);
        }
        Guarded::Sum(l, r) => {
            collect_guarded_var_occurrences(l, out);
            collect_guarded_var_occurrences(r, out);
        }
        Guarded::New(x, g) => {
            out.push(x.clone());
            collect_guarded_var_occurrences(g, out);
        }
    }
}

/// Canonical form under the full congruence quotient.
pub fn canon_quotient(ep: &ExtendedProcess, prune_nil: bool) -> ExtendedProcess {
    let body = quotient_process(&ep.body, prune_nil);
    canon_alpha(&ExtendedProcess {
        bound: ep.bound.clone(),
        frame: ep.frame.clone(),
        body,
    })
}

/// Alpha-equality: equal after canonical renaming of bound names. Aliases
/// are fixed addresses and never renamed.
pub fn alpha_equal(a: &ExtendedProcess, b: &ExtendedProcess) -> bool {
    canon_alpha(a) == canon_alpha(b)
}

/// Equality under the congruence quotient (alpha, adjacent-restriction
/// permutation, bang unfolding, deadlock pruning).
pub fn congruent(a: &ExtendedProcess, b: &ExtendedProcess) -> bool {
    canon_quotient(a, true) == canon_quotient(b, true)
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

macro_rules! paren_if {
    ($f:expr, $cond:expr, $inner:expr) => {{
        if $cond {
            write!($f, "(")?;
            $inner?;
            write!($f, ")")
        } else {
            $inner
        }
    }};
}

impl Process {
    fn is_operator(&self) -> bool {
        matches!(self, Process::Par(_, _) | Process::Guarded(Guarded::Sum(_, _)))
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Nil => write!(f, "0"),
            Process::New(x, p) => {
                let mut names = vec![x.clone()];
                let mut cur = p.as_ref();
                while let Process::New(y, q) = cur {
                    names.push(y.clone());
                    cur = q;
                }
                write!(f, "new ")?;
                for (i, n) in names.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{n}")?;
                }
                write!(f, ".")?;
                paren_if!(f, cur.is_operator(), cur.fmt_prec(f))
            }
            Process::Par(l, r) => {
                paren_if!(f, l.is_operator(), l.fmt_prec(f))?;
                write!(f, " | ")?;
                // Right operand: parenthesize sums so `|` keeps lowest
                // precedence on reparse.
                paren_if!(
                    f,
                    matches!(r.as_ref(), Process::Guarded(Guarded::Sum(_, _))),
                    r.fmt_prec(f)
                )
            }
            Process::Bang(p) => {
                write!(f, "!")?;
                paren_if!(f, p.is_operator(), p.fmt_prec(f))
            }
            Process::Match(m, n, p) => {
                write!(f, "[{m} = {n}] ")?;
                paren_if!(f, p.is_operator(), p.fmt_prec(f))
            }
            Process::IfElse(m, n, t, e) => {
                write!(f, "if {m} = {n} then ")?;
                paren_if!(f, t.is_operator(), t.fmt_prec(f))?;
                write!(f, " else ")?;
                paren_if!(f, e.is_operator(), e.fmt_prec(f))
            }
            Process::Guarded(g) => g.fmt_prec(f),
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f)
    }
}

impl Guarded {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guarded::In(c, x, p) => {
                write!(f, "in({c},{x})")?;
                if **p != Process::Nil {
                    write!(f, ".")?;
                    paren_if!(f, p.is_operator(), p.fmt_prec(f))?;
                }
                Ok(())
            }
            Guarded::Out(c, m, p) => {
                write!(f, "out({c},{m})")?;
                if **p != Process::Nil {
                    write!(f, ".")?;
                    paren_if!(f, p.is_operator(), p.fmt_prec(f))?;
                }
                Ok(())
            }
            Guarded::Match(m, n, g) => {
                write!(f, "[{m} = {n}] ")?;
                paren_if!(f, matches!(g.as_ref(), Guarded::Sum(_, _)), g.fmt_prec(f))
            }
            Guarded::Sum(l, r) => {
                paren_if!(f, matches!(l.as_ref(), Guarded::Sum(_, _)), l.fmt_prec(f))?;
                write!(f, " + ")?;
                r.fmt_prec(f)
            }
            Guarded::New(x, g) => {
                write!(f, "new {x}.")?;
                paren_if!(f, matches!(g.as_ref(), Guarded::Sum(_, _)), g.fmt_prec(f))
            }
        }
    }
}

impl fmt::Display for Guarded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f)
    }
}

impl fmt::Display for ExtendedProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bound.is_empty() && self.frame.is_identity() {
            return self.body.fmt_prec(f);
        }
        if !self.bound.is_empty() {
            write!(f, "new ")?;
            for (i, n) in self.bound.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{n}")?;
            }
            write!(f, ".")?;
        }
        write!(f, "({{")?;
        for (i, (a, m)) in self.frame.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a} = {m}")?;
        }
        write!(f, "}} | ")?;
        self.body.fmt_prec(f)?;
        write!(f, ")")
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub msg: String,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Alias(Alias),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Bar,
    Plus,
    Bang,
    Eq,
    Ne,
    Imp,
    Amp,
    Tilde,
    Lt,
    Gt,
    At,
    Zero,
    One,
    Def,
    New,
    If,
    Then,
    Else,
    Let,
    In,
    Out,
    KwIn, // `in` as the keyword in `let .. in ..` is context-resolved
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

pub(crate) struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = *self.src.get(self.pos)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            msg: msg.into(),
            line: self.line,
            col: self.col,
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c == b'#' {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if c.is_ascii_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push(Token {
                    tok: Tok::Eof,
                    line,
                    col,
                });
                return Ok(out);
            };
            let tok = match c {
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'{' => {
                    self.bump();
                    Tok::LBrace
                }
                b'}' => {
                    self.bump();
                    Tok::RBrace
                }
                b'[' => {
                    self.bump();
                    Tok::LBracket
                }
                b']' => {
                    self.bump();
                    Tok::RBracket
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'|' => {
                    self.bump();
                    Tok::Bar
                }
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'!' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Ne
                    } else {
                        Tok::Bang
                    }
                }
                b'=' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Imp
                    } else {
                        Tok::Eq
                    }
                }
                b'&' => {
                    self.bump();
                    Tok::Amp
                }
                b'~' => {
                    self.bump();
                    Tok::Tilde
                }
                b'<' => {
                    self.bump();
                    Tok::Lt
                }
                b'>' => {
                    self.bump();
                    Tok::Gt
                }
                b'0' if !matches!(self.src.get(self.pos + 1), Some(c) if ident_char(*c)) => {
                    self.bump();
                    Tok::Zero
                }
                b'1' if !matches!(self.src.get(self.pos + 1), Some(c) if ident_char(*c)) => {
                    self.bump();
                    Tok::One
                }
                b'@' => {
                    // An alias literal only if a bit string followed by ':'
                    // comes next; otherwise this is the location marker of a
                    // formula modality.
                    let mut j = self.pos + 1;
                    while matches!(self.src.get(j), Some(b'0' | b'1' | b'.')) {
                        j += 1;
                    }
                    if self.src.get(j) == Some(&b':') {
                        self.bump();
                        let mut bits = String::new();
                        while self.peek() != Some(b':') {
                            match self.peek() {
                                Some(b @ (b'0' | b'1')) => {
                                    bits.push(b as char);
                                    self.bump();
                                }
                                Some(b'.') => {
                                    self.bump();
                                }
                                _ => return Err(self.err("malformed alias literal")),
                            }
                        }
                        self.bump(); // ':'
                        let base = self.ident()?;
                        Tok::Alias(Alias::new(Bits::from_str(&bits).unwrap(), base.as_str()))
                    } else {
                        self.bump();
                        Tok::At
                    }
                }
                c if ident_start(c) => {
                    let id = self.ident()?;
                    match id.as_str() {
                        "def" => Tok::Def,
                        "new" => Tok::New,
                        "if" => Tok::If,
                        "then" => Tok::Then,
                        "else" => Tok::Else,
                        "let" => Tok::Let,
                        "in" => {
                            if self.peek() == Some(b'(') {
                                Tok::In
                            } else {
                                Tok::KwIn
                            }
                        }
                        "out" => Tok::Out,
                        _ => Tok::Ident(id),
                    }
                }
                _ => return Err(self.err(format!("unexpected character '{}'", c as char))),
            };
            out.push(Token { tok, line, col });
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let mut s = String::new();
        match self.peek() {
            Some(c) if ident_start(c) => {}
            _ => return Err(self.err("expected identifier")),
        }
        while let Some(c) = self.peek() {
            if ident_char(c) {
                s.push(c as char);
                self.bump();
            } else {
                break;
            }
        }
        Ok(s)
    }
}

fn ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'\''
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Variables currently in scope (binders).
    scope: Vec<Ident>,
    /// Whether alias literals may appear in messages.
    allow_aliases: bool,
    /// When set, unbound identifiers resolve to constants only if listed
    /// here; anything else is a free variable (formula parsing). When
    /// unset, every unbound identifier is a free constant.
    free_constants: Option<Vec<Ident>>,
    defs: BTreeMap<String, (Vec<Ident>, Process)>,
}

impl Parser {
    pub(crate) fn new(src: &str, allow_aliases: bool) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: Lexer::new(src).tokens()?,
            pos: 0,
            scope: Vec::new(),
            allow_aliases,
            free_constants: None,
            defs: BTreeMap::new(),
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn push_scope(&mut self, x: Ident) {
        self.scope.push(x);
    }

    pub(crate) fn pop_scope(&mut self) {
        self.scope.pop();
    }

    pub(crate) fn set_free_resolver(&mut self, constants: Vec<Ident>) {
        self.free_constants = Some(constants);
    }

    pub(crate) fn err(&self, msg: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            msg: msg.into(),
            line: t.line,
            col: t.col,
        }
    }

    pub(crate) fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> Result<Ident, ParseError> {
        match self.bump() {
            Tok::Ident(s) => Ok(Ident::new(&s)),
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn in_scope(&self, x: &str) -> bool {
        self.scope.iter().any(|i| i.as_str() == x)
    }

    // message := ident | alias | sym '(' message,* ')'
    pub(crate) fn message(&mut self) -> Result<Message, ParseError> {
        match self.bump() {
            Tok::Alias(a) => {
                if !self.allow_aliases {
                    return Err(self.err("alias not allowed here"));
                }
                Ok(Message::Alias(a))
            }
            Tok::Ident(s) => {
                let sym = match s.as_str() {
                    "pair" => Some(Symbol::Pair),
                    "fst" => Some(Symbol::Fst),
                    "snd" => Some(Symbol::Snd),
                    "enc" => Some(Symbol::Enc),
                    "dec" => Some(Symbol::Dec),
                    "mac" => Some(Symbol::Mac),
                    "h" => Some(Symbol::Hash),
                    _ => None,
                };
                if let Some(sym) = sym {
                    if *self.peek() == Tok::LParen {
                        self.bump();
                        let mut args = vec![self.message()?];
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.message()?);
                        }
                        self.expect(Tok::RParen, "')'")?;
                        if args.len() != sym.arity() {
                            return Err(self.err(format!(
                                "{} expects {} argument(s), got {}",
                                sym.name(),
                                sym.arity(),
                                args.len()
                            )));
                        }
                        return Ok(Message::App(sym, args));
                    }
                }
                if self.in_scope(&s) {
                    Ok(Message::var(&s))
                } else if let Some(consts) = &self.free_constants {
                    if consts.iter().any(|c| c.as_str() == s) {
                        Ok(Message::constant(&s))
                    } else {
                        Ok(Message::var(&s))
                    }
                } else {
                    Ok(Message::constant(&s))
                }
            }
            _ => Err(self.err("expected message")),
        }
    }

    // proc := sum ('|' proc)?
    fn proc(&mut self) -> Result<Process, ParseError> {
        let left = self.sum()?;
        if *self.peek() == Tok::Bar {
            self.bump();
            let right = self.proc()?;
            Ok(Process::Par(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    // sum := prefix ('+' sum)?
    fn sum(&mut self) -> Result<Process, ParseError> {
        let left = self.prefix()?;
        if *self.peek() == Tok::Plus {
            self.bump();
            let right = self.sum()?;
            let lg = as_guarded(left).map_err(|k| self.err(format!("unguarded {k} in sum")))?;
            let rg = as_guarded(right).map_err(|k| self.err(format!("unguarded {k} in sum")))?;
            Ok(Process::Guarded(Guarded::Sum(Box::new(lg), Box::new(rg))))
        } else {
            Ok(left)
        }
    }

    fn prefix(&mut self) -> Result<Process, ParseError> {
        match self.peek().clone() {
            Tok::Zero => {
                self.bump();
                Ok(Process::Nil)
            }
            Tok::LParen => {
                self.bump();
                let p = self.proc()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(p)
            }
            Tok::New => {
                self.bump();
                let mut names = vec![self.ident("name after 'new'")?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    names.push(self.ident("name")?);
                }
                self.expect(Tok::Dot, "'.' after restriction")?;
                for n in &names {
                    self.scope.push(n.clone());
                }
                let body = self.prefix()?;
                for _ in &names {
                    self.scope.pop();
                }
                let mut p = body;
                for n in names.into_iter().rev() {
                    p = Process::New(n, Box::new(p));
                }
                Ok(p)
            }
            Tok::Bang => {
                self.bump();
                let p = self.prefix()?;
                Ok(Process::Bang(Box::new(p)))
            }
            Tok::LBracket => {
                self.bump();
                let m = self.message()?;
                self.expect(Tok::Eq, "'=' in match")?;
                let n = self.message()?;
                self.expect(Tok::RBracket, "']'")?;
                let p = self.prefix()?;
                Ok(Process::Match(m, n, Box::new(p)))
            }
            Tok::If => {
                self.bump();
                let m = self.message()?;
                self.expect(Tok::Eq, "'=' in condition")?;
                let n = self.message()?;
                self.expect(Tok::Then, "'then'")?;
                let t = self.prefix()?;
                self.expect(Tok::Else, "'else'")?;
                let e = self.prefix()?;
                Ok(Process::IfElse(m, n, Box::new(t), Box::new(e)))
            }
            Tok::Let => {
                self.bump();
                let x = self.ident("name after 'let'")?;
                self.expect(Tok::Eq, "'=' in let")?;
                let m = self.message()?;
                match self.bump() {
                    Tok::KwIn => {}
                    _ => return Err(self.err("expected 'in'")),
                }
                self.scope.push(x.clone());
                let p = self.prefix()?;
                self.scope.pop();
                let mut map = BTreeMap::new();
                map.insert(x, m);
                Ok(subst_process(&p, &map))
            }
            Tok::In => {
                self.bump();
                self.expect(Tok::LParen, "'(' after 'in'")?;
                let c = self.message()?;
                self.expect(Tok::Comma, "','")?;
                let x = self.ident("input variable")?;
                self.expect(Tok::RParen, "')'")?;
                let cont = self.continuation(&[x.clone()])?;
                Ok(Process::Guarded(Guarded::In(c, x, Box::new(cont))))
            }
            Tok::Out => {
                self.bump();
                self.expect(Tok::LParen, "'(' after 'out'")?;
                let c = self.message()?;
                self.expect(Tok::Comma, "','")?;
                let m = self.message()?;
                self.expect(Tok::RParen, "')'")?;
                let cont = self.continuation(&[])?;
                Ok(Process::Guarded(Guarded::Out(c, m, Box::new(cont))))
            }
            Tok::Ident(name) => {
                if *self.peek2() == Tok::LParen {
                    self.bump();
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        args.push(self.message()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.message()?);
                        }
                    }
                    self.expect(Tok::RParen, "')'")?;
                    let Some((params, body)) = self.defs.get(&name).cloned() else {
                        return Err(self.err(format!("unknown definition '{name}'")));
                    };
                    if params.len() != args.len() {
                        return Err(self.err(format!(
                            "definition '{name}' expects {} argument(s), got {}",
                            params.len(),
                            args.len()
                        )));
                    }
                    let map: BTreeMap<Ident, Message> =
                        params.into_iter().zip(args).collect();
                    Ok(subst_process(&body, &map))
                } else {
                    Err(self.err(format!("unexpected identifier '{name}' (not a process)")))
                }
            }
            _ => Err(self.err("expected process")),
        }
    }

    /// Optional `.P` continuation after a prefix; an omitted continuation is
    /// the deadlock.
    fn continuation(&mut self, binders: &[Ident]) -> Result<Process, ParseError> {
        if *self.peek() == Tok::Dot {
            self.bump();
            for b in binders {
                self.scope.push(b.clone());
            }
            let p = self.prefix()?;
            for _ in binders {
                self.scope.pop();
            }
            Ok(p)
        } else {
            Ok(Process::Nil)
        }
    }

    fn frame_block(&mut self) -> Result<Subst, ParseError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut map = BTreeMap::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let a = match self.bump() {
                    Tok::Alias(a) => a,
                    _ => return Err(self.err("expected alias in frame block")),
                };
                self.expect(Tok::Eq, "'='")?;
                let saved = self.allow_aliases;
                self.allow_aliases = false;
                let m = self.message()?;
                self.allow_aliases = saved;
                if map.insert(a, m).is_some() {
                    return Err(self.err("duplicate alias in frame"));
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "'}'")?;
        Ok(Subst::from_map(map))
    }

    /// extended := defs* ("new" names ".")* ("{" frame "}" "|")? proc
    fn extended(&mut self) -> Result<ExtendedProcess, ParseError> {
        while *self.peek() == Tok::Def {
            self.bump();
            let name = self.ident("definition name")?;
            self.expect(Tok::LParen, "'('")?;
            let mut params = Vec::new();
            if *self.peek() != Tok::RParen {
                params.push(self.ident("parameter")?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    params.push(self.ident("parameter")?);
                }
            }
            self.expect(Tok::RParen, "')'")?;
            self.expect(Tok::Eq, "'='")?;
            for p in &params {
                self.scope.push(p.clone());
            }
            let body = self.prefix()?;
            for _ in &params {
                self.scope.pop();
            }
            self.defs.insert(name.as_str().to_string(), (params, body));
        }

        // Leading restrictions followed by a frame block become the
        // top-level bound names; otherwise they belong to the body.
        let save = self.pos;
        let mut bound = Vec::new();
        while *self.peek() == Tok::New {
            self.bump();
            bound.push(self.ident("name")?);
            while *self.peek() == Tok::Comma {
                self.bump();
                bound.push(self.ident("name")?);
            }
            if self.expect(Tok::Dot, "'.'").is_err() {
                self.pos = save;
                bound.clear();
                break;
            }
        }
        let mut wrapped = false;
        if *self.peek() == Tok::LParen && *self.peek2() == Tok::LBrace {
            self.bump();
            wrapped = true;
        }
        let frame = if *self.peek() == Tok::LBrace {
            for b in &bound {
                self.scope.push(b.clone());
            }
            let f = self.frame_block()?;
            self.expect(Tok::Bar, "'|' after frame")?;
            let body = self.proc()?;
            if wrapped {
                self.expect(Tok::RParen, "')'")?;
            }
            for _ in &bound {
                self.scope.pop();
            }
            return self.finish(ExtendedProcess::new(bound, f, body));
        } else {
            self.pos = save;
            bound.clear();
            Subst::identity()
        };
        // Accept a leading `id |` for the identity frame.
        if let Tok::Ident(s) = self.peek() {
            if s == "id" && *self.peek2() == Tok::Bar {
                self.bump();
                self.bump();
            }
        }
        let body = self.proc()?;
        self.finish(ExtendedProcess::new(bound, frame, body))
    }

    fn finish(&mut self, ep: ExtendedProcess) -> Result<ExtendedProcess, ParseError> {
        if *self.peek() != Tok::Eof {
            return Err(self.err("trailing input after process"));
        }
        if let Some(a) = find_alias_in_process(&ep.body) {
            return Err(self.err(format!(
                "normal-form violation: alias {a} occurs in a plain process"
            )));
        }
        for (_, v) in ep.frame.iter() {
            if let Some(a) = v.aliases().into_iter().next() {
                return Err(self.err(format!(
                    "normal-form violation: alias {a} occurs in an active substitution range"
                )));
            }
        }
        Ok(ep)
    }
}

fn as_guarded(p: Process) -> Result<Guarded, &'static str> {
    match p {
        Process::Guarded(g) => Ok(g),
        Process::Match(m, n, q) => Ok(Guarded::Match(m, n, Box::new(as_guarded(*q)?))),
        Process::New(x, q) => Ok(Guarded::New(x, Box::new(as_guarded(*q)?))),
        Process::Nil => Err("deadlock"),
        Process::Par(_, _) => Err("parallel composition"),
        Process::Bang(_) => Err("replication"),
        Process::IfElse(_, _, _, _) => Err("conditional"),
    }
}

/// Parse an extended process from source text. `let` is desugared eagerly,
/// omitted continuations become the deadlock, and an omitted frame defaults
/// to the identity.
pub fn parse_process(src: &str) -> Result<ExtendedProcess, ParseError> {
    let mut p = Parser::new(src, true)?;
    p.extended()
}

/// Parse a message; identifiers listed in `scope` become variables, all other
/// identifiers become free constants. Aliases are permitted (recipes).
pub fn parse_message(src: &str, scope: &[Ident]) -> Result<Message, ParseError> {
    let mut p = Parser::new(src, true)?;
    p.scope = scope.to_vec();
    let m = p.message()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("trailing input after message"));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ExtendedProcess {
        parse_process(s).unwrap()
    }

    #[test]
    fn parse_running_example() {
        // The two-thread process with a private pair output and a match.
        let ep = parse("new m,n.(out(a,pair(m,n)) | in(m,x).[x = n] out(ok,ok))");
        assert!(ep.bound.is_empty());
        assert!(ep.frame.is_identity());
        match &ep.body {
            Process::New(m, inner) => {
                assert_eq!(m.as_str(), "m");
                match inner.as_ref() {
                    Process::New(n, par) => {
                        assert_eq!(n.as_str(), "n");
                        assert!(matches!(par.as_ref(), Process::Par(_, _)));
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_deadlock() {
        let ep = parse("0");
        assert_eq!(ep.body, Process::Nil);
        assert!(ep.frame.is_identity());
    }

    #[test]
    fn alias_in_plain_process_rejected() {
        let err = parse_process("out(c,@0:lam)").unwrap_err();
        assert!(err.msg.contains("normal-form violation"), "{}", err.msg);
    }

    #[test]
    fn unguarded_sum_rejected() {
        let err = parse_process("(out(c,c) | out(d,d)) + out(c,c)").unwrap_err();
        assert!(err.msg.contains("unguarded"), "{}", err.msg);
    }

    #[test]
    fn let_is_eager_substitution() {
        let ep = parse("let x = enc(a,k) in out(c,x)");
        let expect = parse("out(c,enc(a,k))");
        assert_eq!(ep, expect);
    }

    #[test]
    fn trailing_nil_inserted() {
        let ep = parse("out(c,a)");
        match &ep.body {
            Process::Guarded(Guarded::Out(_, _, p)) => assert_eq!(**p, Process::Nil),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn free_vars_of_restricted_output() {
        // fv(new x.out(x,y)) = {y} once y is a variable; here we bind y
        // outside to make it one.
        let ep = parse("new y.(new x.out(x,y))");
        match &ep.body {
            Process::New(_, inner) => {
                let mut fv = BTreeSet::new();
                free_vars_process(inner, &mut fv);
                assert_eq!(
                    fv.into_iter().collect::<Vec<_>>(),
                    vec![Ident::new("y")]
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alpha_equality_of_renamed_binder() {
        let a = parse("new x.out(c,x)");
        let b = parse("new z.out(c,z)");
        assert!(alpha_equal(&a, &b));
    }

    #[test]
    fn restriction_permutation_needs_quotient() {
        let a = parse("new x.new y.(out(c,y) | out(c,x))");
        let b = parse("new y.new x.(out(c,y) | out(c,x))");
        assert!(!alpha_equal(&a, &b));
        assert!(congruent(&a, &b));
    }

    #[test]
    fn aliases_are_fixed_addresses() {
        // Built directly: aliases never occur in parsed plain processes.
        let mk = |prefix: &str| {
            ExtendedProcess::from_body(Process::Guarded(Guarded::Out(
                Message::constant("c"),
                Message::Alias(Alias::new(Bits::from_str(prefix).unwrap(), "lam")),
                Box::new(Process::Nil),
            )))
        };
        assert!(!alpha_equal(&mk("0"), &mk("1")));
    }

    #[test]
    fn nil_pruning_only_under_quotient() {
        let a = parse("0 | out(c,c)");
        let b = parse("out(c,c)");
        assert!(!alpha_equal(&a, &b));
        assert!(congruent(&a, &b));
    }

    #[test]
    fn bang_unfold_identification() {
        let a = parse("out(c,c) | !out(c,c)");
        let b = parse("!out(c,c)");
        assert!(congruent(&a, &b));
    }

    #[test]
    fn roundtrip_on_sources() {
        for src in [
            "new m,n.(out(a,pair(m,n)) | in(m,x).[x = n] out(ok,ok))",
            "!new ke,km.!(in(d,nt).out(c,enc(pair(nt,nt),ke)) | out(c,getchallenge))",
            "new k.(in(c,x).(out(c,x) + out(d,h(x))) | if a = b then 0 else out(c,error))",
            "(in(a,x) + in(b,x)) | out(c,c).out(b,b)",
            "new x.({@0:lam = h(x)} | out(c,c))",
        ] {
            let ep = parse(src);
            let printed = ep.to_string();
            let back = parse_process(&printed)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            assert_eq!(ep, back, "round-trip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn def_expansion() {
        let src = "\
def V(c,d,k) = in(d,nt).out(c,enc(pair(nt,nt),k))
new k.( V(c,d,k) | V(c,d,k) )";
        let ep = parse(src);
        let expect =
            parse("new k.( in(d,nt).out(c,enc(pair(nt,nt),k)) | in(d,nt).out(c,enc(pair(nt,nt),k)) )");
        assert!(alpha_equal(&ep, &expect));
    }

    #[test]
    fn capture_avoiding_def_argument() {
        // The argument mentions a name also used by an inner binder; the
        // binder must be renamed, not capture the argument.
        let src = "\
def F(y) = new nt.out(c,pair(y,nt))
new nt.( F(nt) )";
        let ep = parse(src);
        let mut fv = BTreeSet::new();
        free_vars_process(&ep.body, &mut fv);
        assert!(fv.is_empty());
        // Inner output must carry two distinct names.
        fn find_out(p: &Process) -> Option<&Message> {
            match p {
                Process::New(_, q) => find_out(q),
                Process::Guarded(Guarded::Out(_, m, _)) => Some(m),
                _ => None,
            }
        }
        let payload = find_out(&ep.body).unwrap();
        if let Message::App(Symbol::Pair, args) = payload {
            assert_ne!(args[0], args[1]);
        } else {
            panic!("unexpected payload {payload}");
        }
    }
}
