//! FM and HP-FM formulas, their parser, and the model checkers.
//!
//! The diamond of FM is labelled with an action; in HP-FM it additionally
//! carries a formula-side location, and satisfaction threads a relation
//! pairing process events with formula events. At each modality the
//! relation splits into the pairs independent of the firing event and the
//! rest; the matching formula event must reproduce that split on the
//! formula side, and only the independent part survives together with the
//! new pair.
//!
//! Failure of a diamond explores every qualifying transition, with inputs
//! fixed by the formula's recipes and replication capped by the budget. A
//! capped-out branch that could still change the verdict is reported as a
//! budget error, never silently dropped.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::indep::{dep_all, indep_all, EventRelation};
use crate::procs::{canon_quotient, ExtendedProcess, ParseError, Parser, Tok};
use crate::sos::{ActionLabel, Event, Location, LocationLabel, SosError};
use crate::terms::{normalize, satisfies_equality, Bits, Ident, Message, TermError};

/// Action patterns of modalities. Output modalities bind a variable that
/// the satisfaction rules replace with the process-chosen alias.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ActionPattern {
    Tau,
    Input(Message, Message),
    OutBind(Message, Ident),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Modality {
    pub pattern: ActionPattern,
    /// Present iff the formula is HP-FM.
    pub loc: Option<LocationLabel>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula {
    True,
    Eq(Message, Message),
    And(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Diamond(Modality, Box<Formula>),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dialect {
    Fm,
    HpFm,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dialect::Fm => write!(f, "fm"),
            Dialect::HpFm => write!(f, "hpfm"),
        }
    }
}

impl Formula {
    pub fn not(phi: Formula) -> Formula {
        Formula::Not(Box::new(phi))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn diamond(m: Modality, body: Formula) -> Formula {
        Formula::Diamond(m, Box::new(body))
    }

    /// [pi]phi is sugar for ~<pi>~phi.
    pub fn boxed(m: Modality, body: Formula) -> Formula {
        Formula::not(Formula::diamond(m, Formula::not(body)))
    }

    pub fn modal_depth(&self) -> u32 {
        match self {
            Formula::True | Formula::Eq(_, _) => 0,
            Formula::And(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Not(p) => p.modal_depth(),
            Formula::Diamond(_, p) => 1 + p.modal_depth(),
        }
    }

    /// Negation applied to equality only.
    pub fn in_simulation_fragment(&self) -> bool {
        match self {
            Formula::True | Formula::Eq(_, _) => true,
            Formula::And(a, b) => a.in_simulation_fragment() && b.in_simulation_fragment(),
            Formula::Not(p) => matches!(p.as_ref(), Formula::Eq(_, _)),
            Formula::Diamond(_, p) => p.in_simulation_fragment(),
        }
    }

    /// Free variables: variables not bound by an enclosing output modality,
    /// in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Ident> {
        fn msg_vars(m: &Message, bound: &BTreeSet<Ident>, out: &mut Vec<Ident>) {
            match m {
                Message::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Message::Constant(_) | Message::Alias(_) => {}
                Message::App(_, args) => {
                    for a in args {
                        msg_vars(a, bound, out);
                    }
                }
            }
        }
        fn walk(phi: &Formula, bound: &mut BTreeSet<Ident>, out: &mut Vec<Ident>) {
            match phi {
                Formula::True => {}
                Formula::Eq(m, n) => {
                    msg_vars(m, bound, out);
                    msg_vars(n, bound, out);
                }
                Formula::And(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Not(p) => walk(p, bound, out),
                Formula::Diamond(m, p) => {
                    match &m.pattern {
                        ActionPattern::Tau => walk(p, bound, out),
                        ActionPattern::Input(c, n) => {
                            msg_vars(c, bound, out);
                            msg_vars(n, bound, out);
                            walk(p, bound, out);
                        }
                        ActionPattern::OutBind(c, x) => {
                            msg_vars(c, bound, out);
                            let added = bound.insert(x.clone());
                            walk(p, bound, out);
                            if added {
                                bound.remove(x);
                            }
                        }
                    };
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut BTreeSet::new(), &mut out);
        out
    }

    /// Substitute a message for a variable; output binders shadow.
    pub fn subst_var(&self, x: &Ident, value: &Message) -> Formula {
        let mut map = std::collections::BTreeMap::new();
        map.insert(x.clone(), value.clone());
        let sub = |m: &Message| m.subst_vars(&map);
        match self {
            Formula::True => Formula::True,
            Formula::Eq(m, n) => Formula::Eq(sub(m), sub(n)),
            Formula::And(a, b) => {
                Formula::and(a.subst_var(x, value), b.subst_var(x, value))
            }
            Formula::Not(p) => Formula::not(p.subst_var(x, value)),
            Formula::Diamond(m, p) => {
                let pattern = match &m.pattern {
                    ActionPattern::Tau => ActionPattern::Tau,
                    ActionPattern::Input(c, n) => ActionPattern::Input(sub(c), sub(n)),
                    ActionPattern::OutBind(c, y) => {
                        let c = sub(c);
                        if y == x {
                            // Shadowed below this binder.
                            return Formula::diamond(
                                Modality {
                                    pattern: ActionPattern::OutBind(c, y.clone()),
                                    loc: m.loc.clone(),
                                },
                                p.as_ref().clone(),
                            );
                        }
                        ActionPattern::OutBind(c, y.clone())
                    }
                };
                Formula::diamond(
                    Modality {
                        pattern,
                        loc: m.loc.clone(),
                    },
                    p.subst_var(x, value),
                )
            }
        }
    }

    /// Aliases occurring anywhere in the formula.
    pub fn aliases(&self) -> BTreeSet<crate::terms::Alias> {
        let mut out = BTreeSet::new();
        fn walk(phi: &Formula, out: &mut BTreeSet<crate::terms::Alias>) {
            match phi {
                Formula::True => {}
                Formula::Eq(m, n) => {
                    m.free_aliases(out);
                    n.free_aliases(out);
                }
                Formula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Formula::Not(p) => walk(p, out),
                Formula::Diamond(m, p) => {
                    match &m.pattern {
                        ActionPattern::Tau => {}
                        ActionPattern::Input(c, n) => {
                            c.free_aliases(out);
                            n.free_aliases(out);
                        }
                        ActionPattern::OutBind(c, _) => c.free_aliases(out),
                    }
                    walk(p, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Constants occurring anywhere in the formula.
    pub fn constants(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        fn walk(phi: &Formula, out: &mut BTreeSet<Ident>) {
            match phi {
                Formula::True => {}
                Formula::Eq(m, n) => {
                    m.free_constants(out);
                    n.free_constants(out);
                }
                Formula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Formula::Not(p) => walk(p, out),
                Formula::Diamond(m, p) => {
                    match &m.pattern {
                        ActionPattern::Tau => {}
                        ActionPattern::Input(c, n) => {
                            c.free_constants(out);
                            n.free_constants(out);
                        }
                        ActionPattern::OutBind(c, _) => c.free_constants(out),
                    }
                    walk(p, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Drop every location annotation, turning an HP-FM formula into its
    /// interleaving erasure.
    pub fn erase_locations(&self) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::Eq(m, n) => Formula::Eq(m.clone(), n.clone()),
            Formula::And(a, b) => Formula::and(a.erase_locations(), b.erase_locations()),
            Formula::Not(p) => Formula::not(p.erase_locations()),
            Formula::Diamond(m, p) => Formula::diamond(
                Modality {
                    pattern: m.pattern.clone(),
                    loc: None,
                },
                p.erase_locations(),
            ),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn mods(m: &Modality, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match &m.pattern {
                ActionPattern::Tau => write!(f, "tau")?,
                ActionPattern::Input(c, n) => write!(f, "{c}.{n}")?,
                ActionPattern::OutBind(c, x) => write!(f, "out {c} ({x})")?,
            }
            if let Some(loc) = &m.loc {
                write!(f, " @ ")?;
                fmt_loc(loc, f)?;
            }
            Ok(())
        }
        fn fmt_loc(u: &LocationLabel, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match u {
                LocationLabel::One(l) => {
                    for b in l.prefix.to_string().chars() {
                        write!(f, "{b}.")?;
                    }
                    write!(f, "[{}]", l.branch)
                }
                LocationLabel::Pair(a, b) => {
                    write!(f, "(")?;
                    fmt_loc(&LocationLabel::One(a.clone()), f)?;
                    write!(f, ",")?;
                    fmt_loc(&LocationLabel::One(b.clone()), f)?;
                    write!(f, ")")
                }
            }
        }
        fn atom(phi: &Formula) -> bool {
            matches!(phi, Formula::True | Formula::Eq(_, _) | Formula::Not(_))
                || matches!(phi, Formula::Diamond(_, _))
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::Eq(m, n) => write!(f, "{m} = {n}"),
            Formula::And(a, b) => {
                let wrap = |p: &Formula, f: &mut fmt::Formatter<'_>| {
                    if atom(p) {
                        write!(f, "{p}")
                    } else {
                        write!(f, "({p})")
                    }
                };
                wrap(a, f)?;
                write!(f, " & ")?;
                wrap(b, f)
            }
            Formula::Not(p) => match p.as_ref() {
                Formula::True => write!(f, "false"),
                Formula::Eq(m, n) => write!(f, "{m} != {n}"),
                Formula::Diamond(m, q) => {
                    if let Formula::Not(inner) = q.as_ref() {
                        write!(f, "[")?;
                        mods(m, f)?;
                        write!(f, "]")?;
                        if atom(inner) {
                            write!(f, "{inner}")
                        } else {
                            write!(f, "({inner})")
                        }
                    } else {
                        write!(f, "~<")
                            .and_then(|_| mods(m, f))
                            .and_then(|_| write!(f, ">"))?;
                        if atom(q) {
                            write!(f, "{q}")
                        } else {
                            write!(f, "({q})")
                        }
                    }
                }
                _ => {
                    if atom(p) {
                        write!(f, "~{p}")
                    } else {
                        write!(f, "~({p})")
                    }
                }
            },
            Formula::Diamond(m, p) => {
                write!(f, "<")?;
                mods(m, f)?;
                write!(f, ">")?;
                if atom(p) {
                    write!(f, "{p}")
                } else {
                    write!(f, "({p})")
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Parse a formula in the given dialect. Identifiers listed in `constants`
/// are free constants; all other unbound identifiers are formula variables
/// (bound by output modalities or free, to be instantiated). HP-FM requires
/// a location annotation on every modality, FM forbids them.
pub fn parse_formula_with_constants(
    src: &str,
    dialect: Dialect,
    constants: &[Ident],
) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, true)?;
    p.set_free_resolver(constants.to_vec());
    let phi = parse_or(&mut p)?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("trailing input after formula"));
    }
    validate_dialect(&phi, dialect).map_err(|msg| p.err(msg))?;
    Ok(phi)
}

/// Parse a formula using the built-in corpus constant pool.
pub fn parse_formula(src: &str, dialect: Dialect) -> Result<Formula, ParseError> {
    parse_formula_with_constants(src, dialect, &crate::corpus::public_constants())
}

fn validate_dialect(phi: &Formula, dialect: Dialect) -> Result<(), String> {
    match phi {
        Formula::True | Formula::Eq(_, _) => Ok(()),
        Formula::And(a, b) => {
            validate_dialect(a, dialect)?;
            validate_dialect(b, dialect)
        }
        Formula::Not(p) => validate_dialect(p, dialect),
        Formula::Diamond(m, p) => {
            match (dialect, &m.loc) {
                (Dialect::Fm, Some(_)) => {
                    return Err("fm modalities must not carry a location".into())
                }
                (Dialect::HpFm, None) => {
                    return Err("hpfm modalities require a location annotation".into())
                }
                _ => {}
            }
            validate_dialect(p, dialect)
        }
    }
}

fn parse_or(p: &mut Parser) -> Result<Formula, ParseError> {
    let left = parse_and(p)?;
    if *p.peek() == Tok::Bar {
        p.bump();
        let right = parse_or(p)?;
        // a | b is ~(~a & ~b)
        return Ok(Formula::not(Formula::and(
            Formula::not(left),
            Formula::not(right),
        )));
    }
    if *p.peek() == Tok::Imp {
        p.bump();
        let right = parse_or(p)?;
        return Ok(Formula::not(Formula::and(left, Formula::not(right))));
    }
    Ok(left)
}

fn parse_and(p: &mut Parser) -> Result<Formula, ParseError> {
    let left = parse_unary(p)?;
    if *p.peek() == Tok::Amp {
        p.bump();
        let right = parse_and(p)?;
        return Ok(Formula::and(left, right));
    }
    Ok(left)
}

fn parse_unary(p: &mut Parser) -> Result<Formula, ParseError> {
    match p.peek().clone() {
        Tok::Ident(s) if s == "true" => {
            p.bump();
            Ok(Formula::True)
        }
        Tok::Ident(s) if s == "false" => {
            p.bump();
            Ok(Formula::not(Formula::True))
        }
        Tok::Tilde => {
            p.bump();
            Ok(Formula::not(parse_unary(p)?))
        }
        Tok::Lt => {
            p.bump();
            let m = parse_modality(p, Tok::Gt)?;
            let body = parse_body(p, &m)?;
            Ok(Formula::diamond(m, body))
        }
        Tok::LBracket => {
            p.bump();
            let m = parse_modality(p, Tok::RBracket)?;
            let body = parse_body(p, &m)?;
            Ok(Formula::boxed(m, body))
        }
        Tok::LParen => {
            p.bump();
            let phi = parse_or(p)?;
            p.expect(Tok::RParen, "')'")?;
            Ok(phi)
        }
        _ => {
            let m = p.message()?;
            match p.bump() {
                Tok::Eq => {
                    let n = p.message()?;
                    Ok(Formula::Eq(m, n))
                }
                Tok::Ne => {
                    let n = p.message()?;
                    Ok(Formula::not(Formula::Eq(m, n)))
                }
                _ => Err(p.err("expected '=' or '!=' after message")),
            }
        }
    }
}

fn parse_modality(p: &mut Parser, close: Tok) -> Result<Modality, ParseError> {
    let pattern = match p.peek().clone() {
        Tok::Ident(s) if s == "tau" => {
            p.bump();
            ActionPattern::Tau
        }
        Tok::Out => {
            p.bump();
            let chan = p.message()?;
            p.expect(Tok::LParen, "'(' before output binder")?;
            let x = p.ident("output binder")?;
            p.expect(Tok::RParen, "')'")?;
            ActionPattern::OutBind(chan, x)
        }
        _ => {
            let chan = p.message()?;
            p.expect(Tok::Dot, "'.' between input channel and payload")?;
            let payload = p.message()?;
            ActionPattern::Input(chan, payload)
        }
    };
    let loc = if *p.peek() == Tok::At {
        p.bump();
        Some(parse_location_label(p)?)
    } else {
        None
    };
    p.expect(close, "modality terminator")?;
    Ok(Modality { pattern, loc })
}

/// Parse a modality body, with the output binder (if any) in scope.
fn parse_body(p: &mut Parser, m: &Modality) -> Result<Formula, ParseError> {
    if let ActionPattern::OutBind(_, x) = &m.pattern {
        p.push_scope(x.clone());
        let body = parse_unary(p);
        p.pop_scope();
        body
    } else {
        parse_unary(p)
    }
}

fn parse_location_label(p: &mut Parser) -> Result<LocationLabel, ParseError> {
    if *p.peek() == Tok::LParen {
        p.bump();
        let a = parse_location(p)?;
        p.expect(Tok::Comma, "','")?;
        let b = parse_location(p)?;
        p.expect(Tok::RParen, "')'")?;
        Ok(LocationLabel::Pair(a, b))
    } else {
        Ok(LocationLabel::One(parse_location(p)?))
    }
}

fn parse_location(p: &mut Parser) -> Result<Location, ParseError> {
    let mut prefix = String::new();
    loop {
        match p.peek() {
            Tok::Zero => {
                p.bump();
                prefix.push('0');
                p.expect(Tok::Dot, "'.' between location bits")?;
            }
            Tok::One => {
                p.bump();
                prefix.push('1');
                p.expect(Tok::Dot, "'.' between location bits")?;
            }
            Tok::LBracket => break,
            _ => return Err(p.err("expected location")),
        }
    }
    p.expect(Tok::LBracket, "'['")?;
    let mut branch = String::new();
    loop {
        match p.peek() {
            Tok::Zero => {
                p.bump();
                branch.push('0');
            }
            Tok::One => {
                p.bump();
                branch.push('1');
            }
            Tok::RBracket => break,
            _ => return Err(p.err("expected branch bits or ']'")),
        }
    }
    p.expect(Tok::RBracket, "']'")?;
    Ok(Location {
        prefix: Bits::from_str(&prefix).unwrap(),
        branch: Bits::from_str(&branch).unwrap(),
    })
}

/// Replace each free variable with a distinct fresh public constant not in
/// `avoid`, not among the formula's constants, and not in the corpus pool.
pub fn instantiate_free(phi: &Formula) -> Formula {
    instantiate_free_avoiding(phi, &[])
}

pub fn instantiate_free_avoiding(phi: &Formula, avoid: &[Ident]) -> Formula {
    let mut used: BTreeSet<Ident> = phi.constants();
    used.extend(avoid.iter().cloned());
    used.extend(crate::corpus::public_constants());
    let mut out = phi.clone();
    for x in phi.free_vars() {
        let mut k = 0usize;
        let fresh = loop {
            let cand = Ident::new(&format!("{}{k}", x.as_str()));
            if !used.contains(&cand) {
                break cand;
            }
            k += 1;
        };
        used.insert(fresh.clone());
        out = out.subst_var(&x, &Message::Constant(fresh));
    }
    out
}

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

/// Budget for a check: the cap on replication-unfolding transitions along
/// any explored path, and whether successor sets may be deduplicated up to
/// the structural congruence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckBudget {
    pub bang_unfold_cap: u32,
    pub congruence_quotient: bool,
}

impl CheckBudget {
    pub fn new(bang_unfold_cap: u32) -> Self {
        CheckBudget {
            bang_unfold_cap,
            congruence_quotient: true,
        }
    }

    /// Default cap: modal depth of the formula plus one.
    pub fn for_formula(phi: &Formula) -> Self {
        CheckBudget::new(phi.modal_depth() + 1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("formula has free variables (instantiate them first): {0}")]
    FreeVariables(String),
    #[error("{0} formula required")]
    Dialect(Dialect),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Result of a check. `holds` is exact for the capped semantics, where a
/// path unfolds replication at most `bang_unfold_cap` times. When
/// `truncated` is set, the cap cut an enumeration in a position that could
/// matter for the unbounded semantics; it is reported, never silent.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CheckOutcome {
    pub holds: bool,
    pub truncated: bool,
}

impl CheckOutcome {
    fn exact(holds: bool) -> Self {
        CheckOutcome {
            holds,
            truncated: false,
        }
    }
}

impl From<SosError> for CheckError {
    fn from(e: SosError) -> Self {
        match e {
            SosError::Recipe(t) => CheckError::Term(t),
            SosError::NoSuchEvent(m) => {
                CheckError::Term(TermError::BoundNameInRecipe(Ident::new(&m)))
            }
        }
    }
}

/// Check an FM formula. The formula must be closed (free variables
/// pre-instantiated via [`instantiate_free`]).
pub fn check_fm(
    ep: &ExtendedProcess,
    phi: &Formula,
    budget: &CheckBudget,
) -> Result<CheckOutcome, CheckError> {
    validate_dialect(phi, Dialect::Fm).map_err(|_| CheckError::Dialect(Dialect::Fm))?;
    reject_free(phi)?;
    sat(ep, None, phi, budget.bang_unfold_cap, budget)
}

/// Check an HP-FM formula starting from the event relation `s` (usually
/// empty): pairs of (process event, formula event).
pub fn check_hpfm(
    ep: &ExtendedProcess,
    s: &EventRelation,
    phi: &Formula,
    budget: &CheckBudget,
) -> Result<CheckOutcome, CheckError> {
    validate_dialect(phi, Dialect::HpFm).map_err(|_| CheckError::Dialect(Dialect::HpFm))?;
    reject_free(phi)?;
    debug_assert!(s.is_hygienic());
    sat(ep, Some(s.clone()), phi, budget.bang_unfold_cap, budget)
}

fn reject_free(phi: &Formula) -> Result<(), CheckError> {
    let fv = phi.free_vars();
    if fv.is_empty() {
        Ok(())
    } else {
        Err(CheckError::FreeVariables(
            fv.iter()
                .map(|x| x.as_str().to_string())
                .collect::<Vec<_>>()
                .join(", "),
        ))
    }
}

/// A transition qualifying for a modality, with the event as labelled by
/// the formula's recipes.
struct Candidate {
    event: Event,
    target: ExtendedProcess,
    spawning: bool,
    alias: Option<crate::terms::Alias>,
}

fn candidates_for(
    ep: &ExtendedProcess,
    pattern: &ActionPattern,
    body: &Formula,
) -> Result<Vec<Candidate>, CheckError> {
    let mut out = Vec::new();
    match pattern {
        ActionPattern::Tau => {
            for t in ep.output_and_tau_steps() {
                if t.event.action == ActionLabel::Tau {
                    out.push(Candidate {
                        event: t.event,
                        target: t.target,
                        spawning: t.bang_spawns > 0,
                        alias: None,
                    });
                }
            }
        }
        ActionPattern::Input(chan, payload) => {
            reject_vars(chan)?;
            reject_vars(payload)?;
            let steps = match ep.input_steps(chan, payload) {
                Ok(s) => s,
                // A recipe mentioning an alias outside the frame denotes no
                // transition at all.
                Err(SosError::Recipe(TermError::UnknownAlias(_))) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
            for t in steps {
                out.push(Candidate {
                    event: t.event,
                    target: t.target,
                    spawning: t.bang_spawns > 0,
                    alias: None,
                });
            }
        }
        ActionPattern::OutBind(chan, _) => {
            reject_vars(chan)?;
            let want = normalize(&ep.frame.apply(chan));
            let formula_aliases = body.aliases();
            for t in ep.output_and_tau_steps() {
                let ActionLabel::Output(syn_chan, alias) = &t.event.action else {
                    continue;
                };
                if normalize(&ep.frame.apply(syn_chan)) != want {
                    continue;
                }
                // The alias must be fresh for the body.
                if formula_aliases.contains(alias) {
                    continue;
                }
                out.push(Candidate {
                    event: Event {
                        action: ActionLabel::Output(chan.clone(), alias.clone()),
                        loc: t.event.loc.clone(),
                    },
                    target: t.target,
                    spawning: t.bang_spawns > 0,
                    alias: Some(alias.clone()),
                });
            }
        }
    }
    Ok(out)
}

fn reject_vars(m: &Message) -> Result<(), CheckError> {
    if let Some(x) = m.vars().into_iter().next() {
        return Err(CheckError::FreeVariables(x.as_str().to_string()));
    }
    Ok(())
}

/// Satisfaction with failure by exhaustion. The boolean is exact for the
/// capped semantics; `truncated` tracks whether the cap cut a branch that
/// could flip the unbounded verdict.
fn sat(
    ep: &ExtendedProcess,
    s: Option<EventRelation>,
    phi: &Formula,
    remaining: u32,
    budget: &CheckBudget,
) -> Result<CheckOutcome, CheckError> {
    match phi {
        Formula::True => Ok(CheckOutcome::exact(true)),
        Formula::Eq(m, n) => Ok(CheckOutcome::exact(satisfies_equality(
            &ep.frame_view(),
            m,
            n,
        )?)),
        Formula::And(a, b) => {
            let ra = sat(ep, s.clone(), a, remaining, budget)?;
            if !ra.holds && !ra.truncated {
                return Ok(ra);
            }
            let rb = sat(ep, s, b, remaining, budget)?;
            if !rb.holds && !rb.truncated {
                return Ok(rb);
            }
            Ok(CheckOutcome {
                holds: ra.holds && rb.holds,
                truncated: ra.truncated || rb.truncated,
            })
        }
        Formula::Not(p) => {
            let r = sat(ep, s, p, remaining, budget)?;
            Ok(CheckOutcome {
                holds: !r.holds,
                truncated: r.truncated,
            })
        }
        Formula::Diamond(m, body) => {
            let cands = candidates_for(ep, &m.pattern, body)?;
            let mut cut = false;
            let mut some_truncated_failure = false;
            let mut seen = std::collections::HashSet::new();
            for c in cands {
                if c.spawning && remaining == 0 {
                    cut = true;
                    continue;
                }
                let next_remaining = remaining - u32::from(c.spawning);
                // The body with the process-chosen alias substituted for
                // the output binder.
                let next_body = match (&m.pattern, &c.alias) {
                    (ActionPattern::OutBind(_, x), Some(alias)) => {
                        body.subst_var(x, &Message::Alias(alias.clone()))
                    }
                    _ => body.as_ref().clone(),
                };
                // The event-relation step for HP-FM: the forced split by
                // the process event must be reproduced on the formula side.
                let next_s = match &s {
                    None => None,
                    Some(s) => {
                        let Some(floc) = &m.loc else {
                            return Err(CheckError::Dialect(Dialect::HpFm));
                        };
                        let (s1, s2) = s.partition_by_left(&c.event);
                        let f_event = Event {
                            action: c.event.action.clone(),
                            loc: floc.clone(),
                        };
                        if !indep_all(&f_event, s1.range()) {
                            continue;
                        }
                        if !dep_all(&f_event, s2.range()) {
                            continue;
                        }
                        let mut next = s1;
                        next.insert(c.event.clone(), f_event);
                        Some(next)
                    }
                };
                // Deduplicate successors carrying identical obligations.
                // The congruence quotient is only safe when no event
                // relation is threaded: it moves locations.
                let dedup_key = if s.is_none() && budget.congruence_quotient {
                    canon_quotient(&c.target, true)
                } else {
                    crate::procs::canon_alpha(&c.target)
                };
                if !seen.insert((dedup_key, next_body.clone(), next_s.clone(), next_remaining)) {
                    continue;
                }
                let r = sat(&c.target, next_s, &next_body, next_remaining, budget)?;
                if r.holds {
                    return Ok(r);
                }
                some_truncated_failure |= r.truncated;
            }
            Ok(CheckOutcome {
                holds: false,
                truncated: cut || some_truncated_failure,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procs::{parse_process, reset_fresh_names};

    fn fm(src: &str) -> Formula {
        parse_formula(src, Dialect::Fm).unwrap()
    }

    fn hp(src: &str) -> Formula {
        parse_formula(src, Dialect::HpFm).unwrap()
    }

    fn budget(cap: u32) -> CheckBudget {
        CheckBudget::new(cap)
    }

    #[test]
    fn parse_and_print_roundtrip() {
        for src in [
            "<out a (x)><out b (y)>h(x) = y",
            "~true",
            "[d.z]<out c (v)>pair(fst(v),snd(v)) = v",
            "<tau>true & u1 != getchallenge",
        ] {
            let phi = fm(src);
            let printed = phi.to_string();
            let back = fm(&printed);
            assert_eq!(phi, back, "roundtrip failed: {src} -> {printed}");
        }
        let phi = hp("<out a (x) @ 0.[]><out c (z) @ 0.1.[]>true");
        let back = hp(&phi.to_string());
        assert_eq!(phi, back);
    }

    #[test]
    fn box_desugars_to_negations() {
        let phi = fm("[d.z]<out c (v)>true");
        match phi {
            Formula::Not(inner) => match *inner {
                Formula::Diamond(m, body) => {
                    assert!(matches!(m.pattern, ActionPattern::Input(_, _)));
                    assert!(matches!(*body, Formula::Not(_)));
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dialect_validation() {
        assert!(parse_formula("<tau @ 0.[]>true", Dialect::Fm).is_err());
        assert!(parse_formula("<tau>true", Dialect::HpFm).is_err());
    }

    #[test]
    fn simulation_fragment_classification() {
        assert!(fm("<out c (x)>(x != error & true)").in_simulation_fragment());
        assert!(!fm("[d.z]<out c (v)>true").in_simulation_fragment());
    }

    #[test]
    fn instantiate_free_names_fresh_constants() {
        let phi = fm("<d.z>z = z");
        assert_eq!(phi.free_vars(), vec![Ident::new("z")]);
        let closed = instantiate_free(&phi);
        assert!(closed.free_vars().is_empty());
        let consts = closed.constants();
        assert!(consts.contains(&Ident::new("z0")));
        // Bound variables are left alone; a closed formula is unchanged.
        let closed2 = instantiate_free(&closed);
        assert_eq!(closed, closed2);
    }

    #[test]
    fn two_outputs_commute_in_fm() {
        reset_fresh_names();
        let phi = fm("<out a (x)><out b (y)>h(x) = y");
        let p1 = parse_process("out(a,c) | out(b,h(c))").unwrap();
        let p2 = parse_process("out(b,h(c)) | out(a,c)").unwrap();
        assert!(check_fm(&p1, &phi, &budget(1)).unwrap().holds);
        assert!(check_fm(&p2, &phi, &budget(1)).unwrap().holds);
    }

    #[test]
    fn anything_satisfies_true() {
        let p = parse_process("0").unwrap();
        assert!(check_fm(&p, &fm("true"), &budget(1)).unwrap().holds);
        assert!(check_hpfm(&p, &EventRelation::empty(), &hp("true"), &budget(1)).unwrap().holds);
    }

    #[test]
    fn duality_on_small_instances() {
        reset_fresh_names();
        let p = parse_process("out(a,c) | out(b,h(c))").unwrap();
        for src in [
            "<out a (x)>true",
            "<out a (x)><out b (y)>h(x) = y",
            "<tau>true",
        ] {
            let phi = fm(src);
            let pos = check_fm(&p, &phi, &budget(2)).unwrap().holds;
            let neg = check_fm(&p, &Formula::not(phi), &budget(2)).unwrap().holds;
            assert_eq!(pos, !neg, "duality failed for {src}");
        }
    }

    #[test]
    fn hp_example_independent_locations() {
        reset_fresh_names();
        // <out a (x) @ 0.[]> <out c (z) @ 0.1.[]> true distinguishes the
        // prefixed composition from its right-associated variant.
        let phi = hp("<out a (x) @ 0.[]><out c (z) @ 0.1.[]>true");
        let yes = parse_process("new x,y,z.(out(a,x).(out(b,y) | out(c,z)))").unwrap();
        let no = parse_process("new x,y,z.(out(a,x).out(b,y) | out(c,z))").unwrap();
        assert!(check_hpfm(&yes, &EventRelation::empty(), &phi, &budget(1)).unwrap().holds);
        assert!(!check_hpfm(&no, &EventRelation::empty(), &phi, &budget(1)).unwrap().holds);
    }

    #[test]
    fn hp_sequential_replication_example() {
        reset_fresh_names();
        let phi = hp("<out a (x) @ 0.[]><out a (x') @ 0.[]>true");
        let yes = parse_process("!(new x.out(a,x).new y.out(a,y))").unwrap();
        let no = parse_process("!(new x.out(a,x))").unwrap();
        assert!(check_hpfm(&yes, &EventRelation::empty(), &phi, &budget(3)).unwrap().holds);
        assert!(!check_hpfm(&no, &EventRelation::empty(), &phi, &budget(3)).unwrap().holds);
    }

    #[test]
    fn hp_refines_fm_on_diamond_formulas() {
        reset_fresh_names();
        let phi = hp("<out a (x) @ 0.[]><out c (z) @ 0.1.[]>true");
        let yes = parse_process("new x,y,z.(out(a,x).(out(b,y) | out(c,z)))").unwrap();
        assert!(check_hpfm(&yes, &EventRelation::empty(), &phi, &budget(1)).unwrap().holds);
        assert!(check_fm(&yes, &phi.erase_locations(), &budget(1)).unwrap().holds);
    }

    #[test]
    fn budget_exceeded_is_reported() {
        reset_fresh_names();
        // Within cap 0 the unfolding output cannot be explored, and the
        // failure of the diamond cannot be concluded either.
        let p = parse_process("!out(a,a)").unwrap();
        let phi = fm("<out a (x)>true");
        let r = check_fm(&p, &phi, &budget(0)).unwrap();
        assert!(!r.holds);
        assert!(r.truncated);
        assert!(check_fm(&p, &phi, &budget(1)).unwrap().holds);
    }

    #[test]
    fn alias_indifference_under_base_renaming() {
        reset_fresh_names();
        // Satisfaction only depends on alias prefixes through independence,
        // not on bases: both processes satisfy the same formula.
        let phi = fm("<out a (x)><out b (y)>h(x) = y");
        let p = parse_process("out(a,c).out(b,h(c))").unwrap();
        assert!(check_fm(&p, &phi, &budget(1)).unwrap().holds);
    }
}
