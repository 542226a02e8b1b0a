//! Quasi-linear sequences and the fractal graphs of their limit functions.
//!
//! The crate evaluates b-regular recurrences, the remainders `a`, `a_s` and
//! limit functions `λ`, `λ_s` (exactly at b-adic points, otherwise as
//! certified enclosures), builds nested rectangle covers of their graphs,
//! measures them, and estimates box dimensions.

/// Version of this crate, recorded in output provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod badic;
pub mod covers;
pub mod dimension;
pub mod error;
pub mod instance;
pub mod limitfn;
pub mod measure;
pub mod quasilinear;
pub mod seq;

pub use badic::{BAdicInterval, BAdicPoint};
pub use covers::{build_family, d4, verify_nesting, NestingReport, RectFamily};
pub use dimension::{box_count, box_count_table, column_osc, fit_dimension, BoxCountTable, SlopeFit};
pub use error::{Error, Result};
pub use instance::{Instance, INSTANCE_NAMES};
pub use limitfn::{CertifiedValue, CoverKind, QLProfile, StepModel, TailLaw};
pub use measure::{CoverMeasure, MdpReport, Square};
pub use quasilinear::{check_condition, check_syndetic, verify_quasilinear, ConditionReport, TSeq, Verdict};
pub use seq::{builtin, parse_spec, RecurrenceSpec, SequenceEngine, SpecError};
