//! Engine for finitely presented monoidal opfibrations.
//!
//! Builds and certifies the tower of categories `Mod -> Mon -> base` over a
//! monoidal opfibration, extracts categories of locally trivial modules
//! relative to a pre-cotopology, and presents the Grothendieck group K0 of
//! the result by invariant factors. Everything is finite and certified by
//! enumeration: universe bounds keep the object side small, and sweeps that
//! would still explode are budgeted with deterministic sampling recorded in
//! the reports.

pub mod backend;
pub mod budget;
pub mod cat;
pub mod catops;
pub mod corpus;
pub mod errors;
pub mod fincat;
pub mod functor;
pub mod opfib;
pub mod report;
pub mod snf;
pub mod val;

pub use budget::{Budgets, RunCtx};
pub use errors::{EngineError, Result};
pub use report::{Issue, Severity, ValidationReport};
pub use val::{Mor, Obj, Val};
