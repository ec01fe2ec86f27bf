//! Core library for `picheck`: an event-labelled semantics for the applied
//! pi-calculus with guarded choices, together with the machinery built on top
//! of it — independence of events, classical and history-preserving modal
//! logics, bounded (bi)simulation game solvers, and a built-in corpus of
//! authentication-protocol unlinkability models.
//!
//! Modules mirror the layering of the theory:
//!
//! * [`terms`] — messages, substitutions, the fixed equational theory,
//!   frames, equality satisfaction and static equivalence.
//! * [`procs`] — process syntax, parser, printer and alpha-machinery.
//! * [`sos`] — the event-labelled transition engine.
//! * [`indep`] — structural and link independence over locations and events.
//! * [`logic`] — FM and HP-FM formulas and their model checkers.
//! * [`equiv`] — bounded game solvers for i-/HP-(bi)similarity.
//! * [`corpus`] — the BAC/Feldhofer model and attack-formula library.

pub mod corpus;
pub mod equiv;
pub mod indep;
pub mod logic;
pub mod procs;
pub mod sos;
pub mod terms;

pub use procs::{ExtendedProcess, Process};
pub use sos::{ActionLabel, Event, Location, LocationLabel};
pub use terms::{Alias, Frame, Ident, Message, Subst};
