//! Structural and link independence over location labels and events.
//!
//! Two locations are structurally independent when their parallel prefixes
//! diverge (neither is a string prefix of the other); location pairs are
//! independent when all components are. Event independence additionally
//! requires that an output's bound alias is fresh for the other event's
//! label, which captures link dependence of inputs whose recipes mention
//! the alias.
//!
//! Independence is only meaningful for events enabled in the same or in
//! consecutive states; the functions here are total and callers enforce
//! that usage discipline.

use crate::sos::{Event, Location, LocationLabel};

/// A finite relation over events. In HP game states and HP-FM satisfaction
/// states the domain pairs up events of the left process (or of the process
/// being checked) with events of the right process (or of the formula);
/// the update discipline keeps both projections pairwise independent.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct EventRelation {
    pairs: Vec<(Event, Event)>,
}

impl EventRelation {
    pub fn empty() -> Self {
        EventRelation::default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Event, Event)> {
        self.pairs.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Event> {
        self.pairs.iter().map(|(l, _)| l)
    }

    pub fn range(&self) -> impl Iterator<Item = &Event> {
        self.pairs.iter().map(|(_, r)| r)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Insert keeping a canonical (sorted) order, so relations compare and
    /// hash structurally.
    pub fn insert(&mut self, left: Event, right: Event) {
        let pair = (left, right);
        match self.pairs.binary_search(&pair) {
            Ok(_) => {}
            Err(i) => self.pairs.insert(i, pair),
        }
    }

    pub fn inverse(&self) -> EventRelation {
        let mut out = EventRelation::empty();
        for (l, r) in &self.pairs {
            out.insert(r.clone(), l.clone());
        }
        out
    }

    /// Split into the pairs whose left event is independent of `e` and the
    /// rest. The split is forced: a pair is compatible with the first part
    /// iff its left event is independent of `e`.
    pub fn partition_by_left(&self, e: &Event) -> (EventRelation, EventRelation) {
        let mut indep = EventRelation::empty();
        let mut dep = EventRelation::empty();
        for (l, r) in &self.pairs {
            if event_indep(l, e) {
                indep.insert(l.clone(), r.clone());
            } else {
                dep.insert(l.clone(), r.clone());
            }
        }
        (indep, dep)
    }

    /// Both projections consist of pairwise independent events.
    pub fn is_hygienic(&self) -> bool {
        for (i, (l1, r1)) in self.pairs.iter().enumerate() {
            for (l2, r2) in &self.pairs[i + 1..] {
                if !event_indep(l1, l2) || !event_indep(r1, r2) {
                    return false;
                }
            }
        }
        true
    }
}

/// Structural independence on location labels.
pub fn struct_indep(u: &LocationLabel, v: &LocationLabel) -> bool {
    fn locs(u: &LocationLabel) -> Vec<&Location> {
        match u {
            LocationLabel::One(l) => vec![l],
            LocationLabel::Pair(a, b) => vec![a, b],
        }
    }
    locs(u).into_iter().all(|l| {
        locs(v)
            .into_iter()
            .all(|m| !l.prefix.is_prefix_of(&m.prefix) && !m.prefix.is_prefix_of(&l.prefix))
    })
}

/// Independence of events: structural independence of the locations, and
/// every bound output alias is fresh for the other event's label.
pub fn event_indep(e: &Event, f: &Event) -> bool {
    if !struct_indep(&e.loc, &f.loc) {
        return false;
    }
    if let Some(a) = e.action.bound_alias() {
        if f.action.free_aliases().contains(a) {
            return false;
        }
    }
    if let Some(a) = f.action.bound_alias() {
        if e.action.free_aliases().contains(a) {
            return false;
        }
    }
    true
}

/// True iff `e` is independent of every event in `es` (vacuously true on
/// the empty set).
pub fn indep_all<'a>(e: &Event, es: impl IntoIterator<Item = &'a Event>) -> bool {
    es.into_iter().all(|f| event_indep(e, f))
}

/// True iff `e` is independent of no event in `es` (vacuously true on the
/// empty set). Not the complement of `indep_all`.
pub fn dep_all<'a>(e: &Event, es: impl IntoIterator<Item = &'a Event>) -> bool {
    es.into_iter().all(|f| !event_indep(e, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sos::ActionLabel;
    use crate::terms::{Alias, Bits, Message};

    fn loc(prefix: &str) -> LocationLabel {
        LocationLabel::One(Location {
            prefix: Bits::from_str(prefix).unwrap(),
            branch: Bits::empty(),
        })
    }

    #[test]
    fn structural_independence_examples() {
        assert!(struct_indep(&loc("0"), &loc("1")));
        assert!(!struct_indep(&loc("1"), &loc("10")));
        assert!(struct_indep(&loc("10"), &loc("11")));
        // A location is a prefix of itself.
        assert!(!struct_indep(&loc("0"), &loc("0")));
        // Pairs are independent iff all components are.
        let pair = LocationLabel::Pair(
            Location {
                prefix: Bits::from_str("00").unwrap(),
                branch: Bits::empty(),
            },
            Location {
                prefix: Bits::from_str("01").unwrap(),
                branch: Bits::empty(),
            },
        );
        assert!(struct_indep(&pair, &loc("1")));
        assert!(!struct_indep(&pair, &loc("01")));
    }

    fn out_event(prefix: &str, chan: &str, alias_prefix: &str) -> Event {
        Event {
            action: ActionLabel::Output(
                Message::constant(chan),
                Alias::new(Bits::from_str(alias_prefix).unwrap(), "lam"),
            ),
            loc: loc(prefix),
        }
    }

    #[test]
    fn link_dependence_on_extruded_alias() {
        // The input's recipes mention the alias bound by the output:
        // structurally independent but not link independent.
        let out = out_event("0", "a", "0");
        let alias = Alias::new(Bits::from_str("0").unwrap(), "lam");
        let inp = Event {
            action: ActionLabel::Input(
                Message::fst(Message::Alias(alias.clone())),
                Message::snd(Message::Alias(alias)),
            ),
            loc: loc("1"),
        };
        assert!(struct_indep(&out.loc, &inp.loc));
        assert!(!event_indep(&out, &inp));
    }

    #[test]
    fn independent_outputs() {
        let a = out_event("0", "a", "0");
        let b = out_event("1", "ok", "1");
        assert!(event_indep(&a, &b));
        assert!(event_indep(&b, &a));
        // Never self-independent: a location is a prefix of itself.
        assert!(!event_indep(&a, &a));
    }

    #[test]
    fn vacuous_universals() {
        let e = out_event("0", "a", "0");
        assert!(indep_all(&e, []));
        assert!(dep_all(&e, []));
    }

    #[test]
    fn indep_and_dep_all_are_not_complements() {
        let e = out_event("0", "a", "0");
        let f = out_event("1", "b", "1");
        let g = out_event("00", "c", "00");
        let set = [f, g];
        // e is independent of f but dependent on g.
        assert!(!indep_all(&e, &set));
        assert!(!dep_all(&e, &set));
    }
}
