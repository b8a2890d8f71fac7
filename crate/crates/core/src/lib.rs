//! Plan compiler for pre-timed traffic signal plans.
//!
//! A plan written as a phase sequence plus per-occurrence phase attributes is
//! cleansed, located in the cycle, resolved for overlaps, rendered into a
//! per-second colour table and validated:
//!
//! ```text
//! PlanIR -> cleanse -> timing -> overlay -> emit -> validate
//! ```

pub mod cleanse;
pub mod config;
pub mod diagnostic;
pub mod emit;
pub mod movement;
pub mod overlay;
pub mod plan_ir;
pub mod timing;
pub mod validate;

pub use config::IntersectionConfig;
pub use diagnostic::{Diagnostic, Severity};
pub use emit::ColorTable;
pub use movement::MovementId;
pub use plan_ir::PlanIR;
pub use timing::{CycleInterval, PlacedPhase, SplitParams};
