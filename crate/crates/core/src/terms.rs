//! Messages, substitutions, the fixed equational theory, frames, equality
//! satisfaction and static equivalence.
//!
//! The signature is fixed: pairing with projections, symmetric encryption
//! with decryption, and `mac`/`h` as free constructors. The rewrite system
//! is subterm convergent, so normal forms are computed by one innermost
//! bottom-up pass and static equivalence is decided by frame saturation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned-ish identifier: cheap to clone, ordered by content.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(s: &str) -> Self {
        Ident(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident::new(s)
    }
}

/// A binary string over {0,1}, used for location prefixes, sum branches and
/// alias prefixes.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bits(Vec<u8>);

impl Bits {
    pub fn empty() -> Self {
        Bits(Vec::new())
    }

    pub fn from_str(s: &str) -> Option<Self> {
        let mut v = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => v.push(0),
                '1' => v.push(1),
                _ => return None,
            }
        }
        Some(Bits(v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// New string with `bit` prepended.
    pub fn prepend(&self, bit: u8) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(bit);
        v.extend_from_slice(&self.0);
        Bits(v)
    }

    /// True iff `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Bits) -> bool {
        self.0.len() <= other.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A located alias: an alias variable prefixed with the binary string of the
/// emitting thread's parallel position. Aliases are fixed addresses, never
/// alpha-renamed.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alias {
    pub prefix: Bits,
    pub base: Ident,
}

impl Alias {
    pub fn new(prefix: Bits, base: impl Into<Ident>) -> Self {
        Alias {
            prefix,
            base: base.into(),
        }
    }
}

impl fmt::Display for Alias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@")?;
        for (i, b) in self.prefix.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{b}")?;
        }
        if !self.prefix.is_empty() {
            write!(f, ":")?;
            return write!(f, "{}", self.base);
        }
        write!(f, ":{}", self.base)
    }
}

impl fmt::Debug for Alias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Function symbols of the fixed signature.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Symbol {
    Pair,
    Fst,
    Snd,
    Enc,
    Dec,
    Mac,
    Hash,
}

impl Symbol {
    pub fn arity(self) -> usize {
        match self {
            Symbol::Pair | Symbol::Enc | Symbol::Dec | Symbol::Mac => 2,
            Symbol::Fst | Symbol::Snd | Symbol::Hash => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Symbol::Pair => "pair",
            Symbol::Fst => "fst",
            Symbol::Snd => "snd",
            Symbol::Enc => "enc",
            Symbol::Dec => "dec",
            Symbol::Mac => "mac",
            Symbol::Hash => "h",
        }
    }

    /// Constructors are the symbols without rewrite rules consuming them at
    /// the root of the left-hand side argument position.
    pub fn is_constructor(self) -> bool {
        matches!(self, Symbol::Pair | Symbol::Enc | Symbol::Mac | Symbol::Hash)
    }
}

/// Message terms. `Var` is a binder-introduced variable (restricted name or
/// input variable); `Constant` is a free name known to the attacker.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Message {
    Var(Ident),
    Constant(Ident),
    Alias(Alias),
    App(Symbol, Vec<Message>),
}

impl Message {
    pub fn var(s: &str) -> Self {
        Message::Var(Ident::new(s))
    }

    pub fn constant(s: &str) -> Self {
        Message::Constant(Ident::new(s))
    }

    pub fn pair(a: Message, b: Message) -> Self {
        Message::App(Symbol::Pair, vec![a, b])
    }

    pub fn fst(a: Message) -> Self {
        Message::App(Symbol::Fst, vec![a])
    }

    pub fn snd(a: Message) -> Self {
        Message::App(Symbol::Snd, vec![a])
    }

    pub fn enc(m: Message, k: Message) -> Self {
        Message::App(Symbol::Enc, vec![m, k])
    }

    pub fn dec(m: Message, k: Message) -> Self {
        Message::App(Symbol::Dec, vec![m, k])
    }

    pub fn mac(m: Message, k: Message) -> Self {
        Message::App(Symbol::Mac, vec![m, k])
    }

    pub fn hash(m: Message) -> Self {
        Message::App(Symbol::Hash, vec![m])
    }

    /// Free variables (bound-name occurrences), per the recursive equations
    /// for `fv`.
    pub fn free_vars(&self, acc: &mut BTreeSet<Ident>) {
        match self {
            Message::Var(x) => {
                acc.insert(x.clone());
            }
            Message::Constant(_) | Message::Alias(_) => {}
            Message::App(_, args) => {
                for a in args {
                    a.free_vars(acc);
                }
            }
        }
    }

    /// Free aliases, per the recursive equations for `fal`.
    pub fn free_aliases(&self, acc: &mut BTreeSet<Alias>) {
        match self {
            Message::Alias(a) => {
                acc.insert(a.clone());
            }
            Message::Var(_) | Message::Constant(_) => {}
            Message::App(_, args) => {
                for a in args {
                    a.free_aliases(acc);
                }
            }
        }
    }

    /// Free constants (public names occurring in the term).
    pub fn free_constants(&self, acc: &mut BTreeSet<Ident>) {
        match self {
            Message::Constant(c) => {
                acc.insert(c.clone());
            }
            Message::Var(_) | Message::Alias(_) => {}
            Message::App(_, args) => {
                for a in args {
                    a.free_constants(acc);
                }
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Ident> {
        let mut s = BTreeSet::new();
        self.free_vars(&mut s);
        s
    }

    pub fn aliases(&self) -> BTreeSet<Alias> {
        let mut s = BTreeSet::new();
        self.free_aliases(&mut s);
        s
    }

    /// Capture-free substitution of variables by messages. Messages have no
    /// binders, so this is plain replacement.
    pub fn subst_vars(&self, map: &BTreeMap<Ident, Message>) -> Message {
        match self {
            Message::Var(x) => map.get(x).cloned().unwrap_or_else(|| self.clone()),
            Message::Constant(_) | Message::Alias(_) => self.clone(),
            Message::App(f, args) => {
                Message::App(*f, args.iter().map(|a| a.subst_vars(map)).collect())
            }
        }
    }

    /// Rename a single variable.
    pub fn rename_var(&self, from: &Ident, to: &Ident) -> Message {
        let mut m = BTreeMap::new();
        m.insert(from.clone(), Message::Var(to.clone()));
        self.subst_vars(&m)
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Var(x) => write!(f, "{x}"),
            Message::Constant(c) => write!(f, "{c}"),
            Message::Alias(a) => write!(f, "{a}"),
            Message::App(sym, args) => {
                write!(f, "{}(", sym.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The unique normal form under fst(pair(M,N)) -> M, snd(pair(M,N)) -> N and
/// dec(enc(M,K),K) -> M, applied innermost to fixpoint.
pub fn normalize(m: &Message) -> Message {
    match m {
        Message::Var(_) | Message::Constant(_) | Message::Alias(_) => m.clone(),
        Message::App(sym, args) => {
            let nargs: Vec<Message> = args.iter().map(normalize).collect();
            match sym {
                Symbol::Fst | Symbol::Snd => {
                    if let Message::App(Symbol::Pair, ps) = &nargs[0] {
                        return if *sym == Symbol::Fst {
                            ps[0].clone()
                        } else {
                            ps[1].clone()
                        };
                    }
                    Message::App(*sym, nargs)
                }
                Symbol::Dec => {
                    if let Message::App(Symbol::Enc, es) = &nargs[0] {
                        if es[1] == nargs[1] {
                            return es[0].clone();
                        }
                    }
                    Message::App(*sym, nargs)
                }
                _ => Message::App(*sym, nargs),
            }
        }
    }
}

/// Equality modulo the equational theory: syntactic equality of normal forms.
pub fn eq_modulo_e(m: &Message, n: &Message) -> bool {
    normalize(m) == normalize(n)
}

/// A substitution on located aliases; identity outside its finite domain.
/// Active substitutions additionally keep their range alias-free.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Subst(BTreeMap<Alias, Message>);

impl Subst {
    pub fn identity() -> Self {
        Subst(BTreeMap::new())
    }

    pub fn from_map(map: BTreeMap<Alias, Message>) -> Self {
        let mut s = Subst(BTreeMap::new());
        for (a, m) in map {
            if Message::Alias(a.clone()) != m {
                s.0.insert(a, m);
            }
        }
        s
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Alias> {
        self.0.keys()
    }

    pub fn get(&self, a: &Alias) -> Option<&Message> {
        self.0.get(a)
    }

    pub fn contains(&self, a: &Alias) -> bool {
        self.0.contains_key(a)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Alias, &Message)> {
        self.0.iter()
    }

    /// Extend with one binding. The alias must be fresh for the domain.
    pub fn extend(&self, a: Alias, m: Message) -> Subst {
        debug_assert!(!self.0.contains_key(&a), "alias {a} not fresh for domain");
        let mut map = self.0.clone();
        map.insert(a, m);
        Subst(map)
    }

    /// Homomorphic application, written in suffix form in the theory:
    /// `apply(s, m)` computes m s.
    pub fn apply(&self, m: &Message) -> Message {
        match m {
            Message::Alias(a) => self.0.get(a).cloned().unwrap_or_else(|| m.clone()),
            Message::Var(_) | Message::Constant(_) => m.clone(),
            Message::App(f, args) => {
                Message::App(*f, args.iter().map(|x| self.apply(x)).collect())
            }
        }
    }

    /// Composition: m (self . other) = (m self) other.
    pub fn compose(&self, other: &Subst) -> Subst {
        let mut map = BTreeMap::new();
        for (a, m) in &self.0 {
            map.insert(a.clone(), other.apply(m));
        }
        for (a, m) in &other.0 {
            map.entry(a.clone()).or_insert_with(|| m.clone());
        }
        Subst::from_map(map)
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "id");
        }
        write!(f, "{{")?;
        for (i, (a, m)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a} = {m}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The static view of an extended process: its restricted names and active
/// substitution.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Frame {
    pub bound: Vec<Ident>,
    pub subst: Subst,
}

impl Frame {
    pub fn new(bound: Vec<Ident>, subst: Subst) -> Self {
        Frame { bound, subst }
    }

    pub fn empty() -> Self {
        Frame {
            bound: Vec::new(),
            subst: Subst::identity(),
        }
    }

    fn is_bound(&self, x: &Ident) -> bool {
        self.bound.contains(x)
    }
}

/// A finite bijection between two frames' alias domains.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct AliasBijection {
    forward: BTreeMap<Alias, Alias>,
    backward: BTreeMap<Alias, Alias>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("recipe mentions bound name {0}")]
    BoundNameInRecipe(Ident),
    #[error("recipe mentions alias {0} outside the frame domain")]
    UnknownAlias(Alias),
    #[error("alias map is not a bijection between the two frame domains")]
    NotABijection,
}

impl AliasBijection {
    pub fn identity_on(dom: impl IntoIterator<Item = Alias>) -> Self {
        let mut b = AliasBijection::default();
        for a in dom {
            b.forward.insert(a.clone(), a.clone());
            b.backward.insert(a.clone(), a);
        }
        b
    }

    pub fn insert(&mut self, from: Alias, to: Alias) -> Result<(), TermError> {
        if self.forward.contains_key(&from) || self.backward.contains_key(&to) {
            return Err(TermError::NotABijection);
        }
        self.forward.insert(from.clone(), to.clone());
        self.backward.insert(to, from);
        Ok(())
    }

    /// The updated bijection rho[from -> to].
    pub fn extended(&self, from: Alias, to: Alias) -> Result<Self, TermError> {
        let mut b = self.clone();
        b.insert(from, to)?;
        Ok(b)
    }

    pub fn inverse(&self) -> Self {
        AliasBijection {
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    pub fn map(&self, a: &Alias) -> Alias {
        self.forward.get(a).cloned().unwrap_or_else(|| a.clone())
    }

    /// Apply to every alias of a message.
    pub fn apply(&self, m: &Message) -> Message {
        match m {
            Message::Alias(a) => Message::Alias(self.map(a)),
            Message::Var(_) | Message::Constant(_) => m.clone(),
            Message::App(f, args) => {
                Message::App(*f, args.iter().map(|x| self.apply(x)).collect())
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Alias, &Alias)> {
        self.forward.iter()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Check the bijection covers exactly the two domains.
    pub fn check_domains(&self, a: &Frame, b: &Frame) -> Result<(), TermError> {
        let dom_a: BTreeSet<_> = a.subst.domain().cloned().collect();
        let dom_b: BTreeSet<_> = b.subst.domain().cloned().collect();
        let fwd: BTreeSet<_> = self.forward.keys().cloned().collect();
        let img: BTreeSet<_> = self.backward.keys().cloned().collect();
        if fwd != dom_a || img != dom_b {
            return Err(TermError::NotABijection);
        }
        Ok(())
    }
}

/// Satisfaction of an equality test by a frame: the recipes may not mention
/// restricted names, and both sides must collapse to the same normal form
/// after applying the active substitution.
pub fn satisfies_equality(frame: &Frame, m: &Message, n: &Message) -> Result<bool, TermError> {
    for t in [m, n] {
        for x in t.vars() {
            if frame.is_bound(&x) {
                return Err(TermError::BoundNameInRecipe(x));
            }
        }
    }
    let lhs = frame.subst.apply(m);
    let rhs = frame.subst.apply(n);
    Ok(eq_modulo_e(&lhs, &rhs))
}

/// Saturation of a frame: every message the attacker can deduce, with one
/// minimal recipe each. Analysis adds projections of deducible pairs and
/// plaintexts of ciphertexts whose key is deducible.
#[derive(Clone, Debug)]
pub struct Saturation {
    /// recipe -> normalized value, in discovery order.
    pub entries: Vec<(Message, Message)>,
    /// normalized value -> index of its minimal (first-found) recipe.
    pub by_value: HashMap<Message, usize>,
}

impl Saturation {
    pub fn recipe_for(&self, value: &Message) -> Option<&Message> {
        self.by_value.get(value).map(|i| &self.entries[*i].0)
    }
}

/// Saturate `frame` given a pool of public atoms the attacker also knows.
pub fn saturate(frame: &Frame, public_atoms: &[Ident]) -> Saturation {
    let mut sat = Saturation {
        entries: Vec::new(),
        by_value: HashMap::new(),
    };
    let push = |sat: &mut Saturation, recipe: Message, value: Message| {
        let value = normalize(&value);
        if !sat.by_value.contains_key(&value) {
            sat.by_value.insert(value.clone(), sat.entries.len());
            sat.entries.push((recipe, value));
            true
        } else {
            false
        }
    };
    for c in public_atoms {
        let m = Message::Constant(c.clone());
        push(&mut sat, m.clone(), m);
    }
    for (a, v) in frame.subst.iter() {
        push(&mut sat, Message::Alias(a.clone()), v.clone());
    }
    // Analysis to fixpoint. Every added value is a subterm of a frame value,
    // so this terminates.
    loop {
        let mut added = false;
        for i in 0..sat.entries.len() {
            let (recipe, value) = sat.entries[i].clone();
            match &value {
                Message::App(Symbol::Pair, ps) => {
                    added |= push(&mut sat, Message::fst(recipe.clone()), ps[0].clone());
                    added |= push(&mut sat, Message::snd(recipe.clone()), ps[1].clone());
                }
                Message::App(Symbol::Enc, es) => {
                    if let Some(krec) = sat.recipe_for(&es[1]) {
                        let krec = krec.clone();
                        added |= push(&mut sat, Message::dec(recipe.clone(), krec), es[0].clone());
                    }
                }
                _ => {}
            }
        }
        if !added {
            break;
        }
    }
    sat
}

/// Constructor decomposition of a deducible value: the minimal recipe if the
/// value is directly deducible, otherwise a constructor applied to
/// decompositions of the arguments. `None` when the value is opaque.
pub fn constructive_recipe_of(sat: &Saturation, value: &Message) -> Option<Message> {
    constructive_recipe(sat, value)
}

fn constructive_recipe(sat: &Saturation, value: &Message) -> Option<Message> {
    if let Some(r) = sat.recipe_for(value) {
        return Some(r.clone());
    }
    match value {
        Message::App(sym, args) if sym.is_constructor() => {
            let mut rs = Vec::with_capacity(args.len());
            for a in args {
                rs.push(constructive_recipe(sat, a)?);
            }
            Some(Message::App(*sym, rs))
        }
        _ => None,
    }
}

/// The finite test set characterizing a saturated frame: equalities among
/// saturated recipes with equal values, plus, for each saturated recipe, its
/// constructor-shape decomposition (covers is-pair and
/// decryptable-with-deducible-key observations).
fn frame_tests(sat: &Saturation) -> Vec<(Message, Message)> {
    let mut tests = Vec::new();
    let mut groups: BTreeMap<&Message, Vec<&Message>> = BTreeMap::new();
    for (recipe, value) in &sat.entries {
        groups.entry(value).or_default().push(recipe);
    }
    for (_, recipes) in groups {
        for w in recipes.windows(2) {
            tests.push((w[0].clone(), w[1].clone()));
        }
    }
    for (recipe, value) in &sat.entries {
        if let Message::App(sym, args) = value {
            if sym.is_constructor() {
                let mut rs = Vec::with_capacity(args.len());
                let mut ok = true;
                for a in args {
                    match constructive_recipe(sat, a) {
                        Some(r) => rs.push(r),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    tests.push((recipe.clone(), Message::App(*sym, rs)));
                }
            }
        }
    }
    tests
}

fn holds_in(frame: &Frame, m: &Message, n: &Message) -> bool {
    let lhs = frame.subst.apply(m);
    let rhs = frame.subst.apply(n);
    eq_modulo_e(&lhs, &rhs)
}

/// Fresh public constants for attacker tests: two names occurring nowhere in
/// either frame.
pub fn fresh_test_constants(frames: &[&Frame]) -> Vec<Ident> {
    let mut used: BTreeSet<Ident> = BTreeSet::new();
    for f in frames {
        used.extend(f.bound.iter().cloned());
        for (_, v) in f.subst.iter() {
            v.free_constants(&mut used);
            used.extend(v.vars());
        }
    }
    let mut out = Vec::new();
    let mut k = 0usize;
    while out.len() < 2 {
        let c = Ident::new(&format!("pub{k}"));
        if !used.contains(&c) {
            out.push(c);
        }
        k += 1;
    }
    out
}

/// Public atoms relevant to a frame: free constants of its range plus the
/// two fresh test constants.
pub fn public_pool(frame: &Frame, extra: &[Ident]) -> Vec<Ident> {
    let mut set: BTreeSet<Ident> = BTreeSet::new();
    for (_, v) in frame.subst.iter() {
        v.free_constants(&mut set);
    }
    set.extend(extra.iter().cloned());
    set.into_iter().collect()
}

/// Static equivalence of two frames under an alias bijection, decided by
/// frame saturation.
pub fn static_equivalent(a: &Frame, b: &Frame, rho: &AliasBijection) -> Result<bool, TermError> {
    rho.check_domains(a, b)?;
    let fresh = fresh_test_constants(&[a, b]);
    let mut atoms = public_pool(a, &fresh);
    for c in public_pool(b, &[]) {
        if !atoms.contains(&c) {
            atoms.push(c);
        }
    }
    let sat_a = saturate(a, &atoms);
    let sat_b = saturate(b, &atoms);
    let inv = rho.inverse();
    for (m, n) in frame_tests(&sat_a) {
        debug_assert!(holds_in(a, &m, &n));
        if !holds_in(b, &rho.apply(&m), &rho.apply(&n)) {
            return Ok(false);
        }
    }
    for (m, n) in frame_tests(&sat_b) {
        debug_assert!(holds_in(b, &m, &n));
        if !holds_in(a, &inv.apply(&m), &inv.apply(&n)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Message {
        Message::constant("a")
    }
    fn b() -> Message {
        Message::constant("b")
    }
    fn k() -> Message {
        Message::constant("k")
    }

    #[test]
    fn normalize_projections_and_dec() {
        assert_eq!(normalize(&Message::fst(Message::pair(a(), b()))), a());
        assert_eq!(normalize(&Message::snd(Message::pair(a(), b()))), b());
        let m = Message::constant("m");
        assert_eq!(normalize(&Message::dec(Message::enc(m.clone(), k()), k())), m);
    }

    #[test]
    fn normalize_no_redex_is_identity() {
        let x = Message::var("x");
        assert_eq!(normalize(&x), x);
        // Wrong key keeps the decryption stuck.
        let stuck = Message::dec(
            Message::enc(Message::pair(a(), b()), k()),
            Message::constant("k2"),
        );
        assert_eq!(normalize(&stuck), stuck);
    }

    #[test]
    fn eq_modulo_e_examples() {
        assert!(eq_modulo_e(&Message::snd(Message::pair(a(), b())), &b()));
        assert!(eq_modulo_e(&a(), &a()));
        assert!(!eq_modulo_e(&Message::mac(a(), k()), &Message::mac(b(), k())));
    }

    #[test]
    fn substitution_application_and_composition() {
        let al = |p: &str, base: &str| Alias::new(Bits::from_str(p).unwrap(), base);
        let lam0 = al("0", "lam");
        let lam1 = al("1", "lam");
        let s = Subst::identity().extend(lam0.clone(), Message::pair(a(), b()));
        let m = Message::fst(Message::Alias(lam0.clone()));
        assert_eq!(s.apply(&m), Message::fst(Message::pair(a(), b())));

        // (h(0lam)) rho = h(1lam) for rho mapping between aliases.
        let rho = Subst::identity().extend(lam0.clone(), Message::Alias(lam1.clone()));
        assert_eq!(
            rho.apply(&Message::hash(Message::Alias(lam0.clone()))),
            Message::hash(Message::Alias(lam1.clone()))
        );

        // Identity on variables.
        assert_eq!(Subst::identity().apply(&Message::var("x")), Message::var("x"));

        // (m s) t = m (s . t)
        let t = Subst::identity().extend(lam1, Message::hash(a()));
        let composed = s.compose(&t);
        let via_two = t.apply(&s.apply(&m));
        assert_eq!(composed.apply(&m), via_two);
    }

    #[test]
    fn satisfaction_example_from_bisimulation_game() {
        // B = new x.( {1lam = x} . {0lam = h(x)} | 0 | 0 )
        // B |= h(1lam) = 0lam, where the test arises as (h(0lam))rho = (1lam)rho.
        let lam0 = Alias::new(Bits::from_str("0").unwrap(), "lam");
        let lam1 = Alias::new(Bits::from_str("1").unwrap(), "lam");
        let x = Message::var("x");
        let subst = Subst::identity()
            .extend(lam1.clone(), x.clone())
            .extend(lam0.clone(), Message::hash(x));
        let frame = Frame::new(vec![Ident::new("x")], subst);
        let m = Message::hash(Message::Alias(lam1));
        let n = Message::Alias(lam0);
        assert!(satisfies_equality(&frame, &m, &n).unwrap());
    }

    #[test]
    fn satisfaction_rejects_bound_names() {
        let frame = Frame::new(vec![Ident::new("k")], Subst::identity());
        let err = satisfies_equality(&frame, &Message::var("k"), &a()).unwrap_err();
        assert_eq!(err, TermError::BoundNameInRecipe(Ident::new("k")));
    }

    #[test]
    fn satisfaction_wrong_key_decryption_is_stuck() {
        // new k.({lam = enc(m,k)} | 0) does not satisfy dec(lam,k2) = m.
        let lam = Alias::new(Bits::empty(), "lam");
        let m = Message::constant("m");
        let subst = Subst::identity().extend(lam.clone(), Message::enc(m.clone(), Message::var("k")));
        let frame = Frame::new(vec![Ident::new("k")], subst);
        let test = Message::dec(Message::Alias(lam), Message::constant("k2"));
        assert!(!satisfies_equality(&frame, &test, &m).unwrap());
    }

    #[test]
    fn static_equivalence_prefix_swap() {
        // new x.{0lam=x, 1lam=h(x)} ~ new x.{1lam=x, 0lam=h(x)} under 0lam<->1lam.
        let lam0 = Alias::new(Bits::from_str("0").unwrap(), "lam");
        let lam1 = Alias::new(Bits::from_str("1").unwrap(), "lam");
        let x = Message::var("x");
        let fa = Frame::new(
            vec![Ident::new("x")],
            Subst::identity()
                .extend(lam0.clone(), x.clone())
                .extend(lam1.clone(), Message::hash(x.clone())),
        );
        let fb = Frame::new(
            vec![Ident::new("x")],
            Subst::identity()
                .extend(lam1.clone(), x.clone())
                .extend(lam0.clone(), Message::hash(x)),
        );
        let mut rho = AliasBijection::default();
        rho.insert(lam0.clone(), lam1.clone()).unwrap();
        rho.insert(lam1.clone(), lam0.clone()).unwrap();
        assert!(static_equivalent(&fa, &fb, &rho).unwrap());
        // Without the swap the frames are distinguishable: h(0lam) = 1lam
        // holds on the left only.
        let id = AliasBijection::identity_on([lam0, lam1]);
        assert!(!static_equivalent(&fa, &fb, &id).unwrap());
    }

    #[test]
    fn static_equivalence_reflexive() {
        let lam = Alias::new(Bits::empty(), "lam");
        let f = Frame::new(
            vec![Ident::new("m")],
            Subst::identity().extend(lam.clone(), Message::var("m")),
        );
        let id = AliasBijection::identity_on([lam]);
        assert!(static_equivalent(&f, &f, &id).unwrap());
    }

    #[test]
    fn static_equivalence_hash_link() {
        // new m.{l1=m, l2=h(m)}  vs  new m,n.{l1=m, l2=n}: h(l1)=l2 holds
        // only on the left.
        let l1 = Alias::new(Bits::empty(), "l1");
        let l2 = Alias::new(Bits::empty(), "l2");
        let fa = Frame::new(
            vec![Ident::new("m")],
            Subst::identity()
                .extend(l1.clone(), Message::var("m"))
                .extend(l2.clone(), Message::hash(Message::var("m"))),
        );
        let fb = Frame::new(
            vec![Ident::new("m"), Ident::new("n")],
            Subst::identity()
                .extend(l1.clone(), Message::var("m"))
                .extend(l2.clone(), Message::var("n")),
        );
        let id = AliasBijection::identity_on([l1, l2]);
        assert!(!static_equivalent(&fa, &fb, &id).unwrap());
    }

    #[test]
    fn bijection_rejects_domain_mismatch() {
        let l1 = Alias::new(Bits::empty(), "l1");
        let fa = Frame::new(
            vec![],
            Subst::identity().extend(l1.clone(), Message::constant("a")),
        );
        let fb = Frame::empty();
        let id = AliasBijection::identity_on([l1]);
        assert_eq!(
            static_equivalent(&fa, &fb, &id).unwrap_err(),
            TermError::NotABijection
        );
    }
}
