//! A typed equational functional language: programs declare algebraic
//! data types and one equation per name, terms reduce by a deterministic
//! parallel one-step rule, and the laziness of the semantics is a
//! pluggable per-constructor core type. Also included: a support-system
//! analyser, a cross-semantics differential checker and a checker for
//! equational-reasoning proof scripts.

pub mod coretype;
pub mod deduction;
pub mod equations;
pub mod generate;
pub mod parse;
pub mod reducer;
pub mod signature;
pub mod term;

pub use coretype::{
    builtin_core, check_monotone, in_support, omega, parse_core_file, support_flag, trace_member,
    BottomedTerm, CoreError, CoreMode, CoreType, Flag, FlagSpec,
};
pub use deduction::{
    check_script, derive_grounded, derive_not_undefined, Context, DeductionError, Fact, RuleName,
    ScriptError, ScriptReport,
};
pub use equations::{
    instantiate, parse_program, substitute, EquationDef, EquationSystem, ProgramError,
};
pub use parse::{parse_term, ParseError};
pub use reducer::{
    differential, eval_intop, phi_step, reduce, DiffReport, Outcome, ReduceConfig, ReduceError,
    Reduction, DEFAULT_FUEL,
};
pub use signature::{
    ConstructorDecl, DataDecl, FnType, Signature, SignatureError, Type, TYPE_BOOL, TYPE_INT,
};
pub use term::{
    apply_flatten, decompose, infer_type, print_term, Decomposition, Term, TermError, TypeEnv,
};

use thiserror::Error;

/// Umbrella error for library entry points that can fail in more than one
/// stage.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Type(#[from] TermError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Script(#[from] ScriptError),
}
