//! Monotone core types and the machinery built on them: the bottoming
//! homomorphism, trace membership and support-system membership.
//!
//! A core type assigns each constructor a monotone function over the
//! two-point flag lattice (flat below natural) that decides whether the
//! constructor applied to partially undefined arguments is itself defined.
//! The eager core demands every argument, the lazy core none, and the
//! miranda core demands at least one argument on product types only.

use std::collections::HashMap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::parse::{parse_core_entries, CoreEntrySpec, ParseError};
use crate::signature::{Signature, Type};
use crate::term::{infer_type, Term, TermError, TypeEnv};

/// The two-point flag lattice. `Flat` stands for an undefined value,
/// `Natural` for a defined one; `Flat <= Natural`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    Flat,
    Natural,
}

impl Flag {
    pub fn is_natural(self) -> bool {
        self == Flag::Natural
    }
}

impl std::fmt::Display for Flag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flag::Flat => write!(f, "flat"),
            Flag::Natural => write!(f, "natural"),
        }
    }
}

/// Per-constructor flag function. Positions in `StrictIn` are 1-based.
/// `Table` is an escape hatch for arbitrary (possibly non-monotone) truth
/// tables, indexed by the bitmask of natural argument flags; it has no
/// surface syntax and exists so the monotonicity checker has something to
/// reject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlagSpec {
    StrictAll,
    StrictNone,
    StrictIn(Vec<usize>),
    AnyOf,
    Table { arity: usize, values: Vec<Flag> },
}

impl FlagSpec {
    fn eval(&self, flags: &[Flag]) -> Flag {
        match self {
            FlagSpec::StrictAll => {
                if flags.iter().all(|f| f.is_natural()) {
                    Flag::Natural
                } else {
                    Flag::Flat
                }
            }
            FlagSpec::StrictNone => Flag::Natural,
            FlagSpec::StrictIn(positions) => {
                if positions
                    .iter()
                    .all(|&i| flags.get(i - 1).is_some_and(|f| f.is_natural()))
                {
                    Flag::Natural
                } else {
                    Flag::Flat
                }
            }
            FlagSpec::AnyOf => {
                if flags.iter().any(|f| f.is_natural()) {
                    Flag::Natural
                } else {
                    Flag::Flat
                }
            }
            FlagSpec::Table { values, .. } => {
                let mut index = 0usize;
                for (i, f) in flags.iter().enumerate() {
                    if f.is_natural() {
                        index |= 1 << i;
                    }
                }
                values.get(index).copied().unwrap_or(Flag::Flat)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreMode {
    Eager,
    Lazy,
    Miranda,
    Custom,
}

impl std::fmt::Display for CoreMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoreMode::Eager => write!(f, "eager"),
            CoreMode::Lazy => write!(f, "lazy"),
            CoreMode::Miranda => write!(f, "miranda"),
            CoreMode::Custom => write!(f, "custom"),
        }
    }
}

/// A core type: one flag function per constructor. Nullary constructors
/// are natural no matter which flag function they carry; a cell with no
/// arguments has nothing undefined in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreType {
    mode: CoreMode,
    per_ctor: HashMap<String, FlagSpec>,
}

impl CoreType {
    pub fn new(mode: CoreMode, per_ctor: HashMap<String, FlagSpec>) -> CoreType {
        CoreType { mode, per_ctor }
    }

    pub fn mode(&self) -> CoreMode {
        self.mode
    }

    pub fn spec_for(&self, ctor: &str) -> &FlagSpec {
        self.per_ctor.get(ctor).unwrap_or(&FlagSpec::StrictNone)
    }

    /// Apply the constructor's flag function. Integer literals and other
    /// nullary constructors are always natural.
    pub fn flag(&self, ctor: &str, child_flags: &[Flag]) -> Flag {
        match self.per_ctor.get(ctor) {
            Some(spec @ FlagSpec::Table { .. }) => spec.eval(child_flags),
            _ if child_flags.is_empty() => Flag::Natural,
            Some(spec) => spec.eval(child_flags),
            None => Flag::Natural,
        }
    }
}

/// Is `beta` a product type: a single constructor with at least two
/// arguments, none of which is `beta` itself?
fn is_product_type(sig: &Signature, beta: &str) -> bool {
    let ctors = sig.ctors_of(beta);
    match ctors.as_slice() {
        [only] => only.arity() >= 2 && only.arg_types.iter().all(|a| a != beta),
        _ => false,
    }
}

/// The built-in cores: eager is strict in every argument, lazy in none,
/// miranda is `anyof` on product types and lazy elsewhere.
pub fn builtin_core(mode: CoreMode, sig: &Signature) -> CoreType {
    let mut per_ctor = HashMap::new();
    for c in sig.ctors() {
        let spec = match mode {
            CoreMode::Eager => FlagSpec::StrictAll,
            CoreMode::Lazy => FlagSpec::StrictNone,
            CoreMode::Miranda => {
                if is_product_type(sig, &c.result_type) {
                    FlagSpec::AnyOf
                } else {
                    FlagSpec::StrictNone
                }
            }
            CoreMode::Custom => FlagSpec::StrictNone,
        };
        per_ctor.insert(c.name.clone(), spec);
    }
    CoreType { mode, per_ctor }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("core file names unknown constructor `{0}`")]
    UnknownConstructor(String),
    #[error("core file names constructor `{0}` twice")]
    DuplicateEntry(String),
    #[error("strict position {pos} out of range for `{ctor}` (arity {arity})")]
    PositionOutOfRange {
        ctor: String,
        pos: usize,
        arity: usize,
    },
    #[error("core type is not monotone")]
    NotMonotone,
}

/// Load a custom core from its file syntax. Unlisted constructors default
/// to lazy. Non-monotone cores are rejected, though the four surface forms
/// are monotone by construction.
pub fn parse_core_file(src: &str, sig: &Signature) -> Result<CoreType, CoreError> {
    let entries = parse_core_entries(src)?;
    let mut per_ctor: HashMap<String, FlagSpec> = sig
        .ctors()
        .iter()
        .map(|c| (c.name.clone(), FlagSpec::StrictNone))
        .collect();
    let mut seen = std::collections::HashSet::new();
    for (ctor, spec) in entries {
        let decl = sig
            .ctor(&ctor)
            .ok_or_else(|| CoreError::UnknownConstructor(ctor.clone()))?;
        if !seen.insert(ctor.clone()) {
            return Err(CoreError::DuplicateEntry(ctor));
        }
        let spec = match spec {
            CoreEntrySpec::StrictAll => FlagSpec::StrictAll,
            CoreEntrySpec::StrictNone => FlagSpec::StrictNone,
            CoreEntrySpec::AnyOf => FlagSpec::AnyOf,
            CoreEntrySpec::StrictIn(positions) => {
                for &pos in &positions {
                    if pos == 0 || pos > decl.arity() {
                        return Err(CoreError::PositionOutOfRange {
                            ctor,
                            pos,
                            arity: decl.arity(),
                        });
                    }
                }
                FlagSpec::StrictIn(positions)
            }
        };
        per_ctor.insert(ctor, spec);
    }
    let core = CoreType {
        mode: CoreMode::Custom,
        per_ctor,
    };
    if !check_monotone(&core, sig) {
        return Err(CoreError::NotMonotone);
    }
    Ok(core)
}

/// Brute-force verification that every constructor's flag function is
/// monotone and natural on the all-natural input.
pub fn check_monotone(core: &CoreType, sig: &Signature) -> bool {
    for c in sig.ctors() {
        let n = c.arity();
        if n > 16 {
            // the four surface forms are monotone by construction; raw
            // tables this wide are rejected outright
            if matches!(core.spec_for(&c.name), FlagSpec::Table { .. }) {
                return false;
            }
            continue;
        }
        if let FlagSpec::Table { arity, values } = core.spec_for(&c.name) {
            if *arity != n || values.len() != 1 << n {
                return false;
            }
        }
        let flags_of = |mask: u32| -> Vec<Flag> {
            (0..n)
                .map(|i| {
                    if mask & (1 << i) != 0 {
                        Flag::Natural
                    } else {
                        Flag::Flat
                    }
                })
                .collect()
        };
        let all = (1u32 << n) - 1;
        if core.flag(&c.name, &flags_of(all)) != Flag::Natural {
            return false;
        }
        for lo in 0..=all {
            let lo_flag = core.flag(&c.name, &flags_of(lo));
            for hi in lo..=all {
                if hi & lo == lo && core.flag(&c.name, &flags_of(hi)) < lo_flag {
                    return false;
                }
            }
        }
    }
    true
}

/// A ground term extended with explicit bottoms standing for undefined
/// subvalues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BottomedTerm {
    Bottom(String),
    Int(BigInt),
    Ctor(String, Vec<BottomedTerm>),
}

impl BottomedTerm {
    pub fn is_fully_ground(&self) -> bool {
        match self {
            BottomedTerm::Bottom(_) => false,
            BottomedTerm::Int(_) => true,
            BottomedTerm::Ctor(_, children) => children.iter().all(BottomedTerm::is_fully_ground),
        }
    }
}

impl std::fmt::Display for BottomedTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BottomedTerm::Bottom(ty) => write!(f, "_|_{ty}"),
            BottomedTerm::Int(n) => write!(f, "{n}"),
            BottomedTerm::Ctor(c, children) => {
                write!(f, "{c}")?;
                for ch in children {
                    match ch {
                        BottomedTerm::Ctor(_, cs) if !cs.is_empty() => write!(f, " ({ch})")?,
                        _ => write!(f, " {ch}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

/// The bottoming homomorphism: constructors map through, everything with a
/// name or case at its root maps to the bottom of its type, ground terms
/// map to themselves.
pub fn omega(t: &Term, env: &TypeEnv, sig: &Signature) -> Result<BottomedTerm, TermError> {
    match t {
        Term::Int(n) => Ok(BottomedTerm::Int(n.clone())),
        Term::Ctor(name, args) => {
            let children = args
                .iter()
                .map(|a| omega(a, env, sig))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(BottomedTerm::Ctor(name.clone(), children))
        }
        Term::App(..) | Term::Case(..) => match infer_type(t, env, sig)? {
            Type::Ground(b) => Ok(BottomedTerm::Bottom(b)),
            Type::Fn(_) => Err(TermError::NotGroundTyped),
        },
    }
}

/// Membership flag of a bottomed ground term in the trace: bottoms are
/// flat, and a constructor node applies its flag function to the
/// children's flags.
pub fn trace_member(b: &BottomedTerm, core: &CoreType) -> Flag {
    match b {
        BottomedTerm::Bottom(_) => Flag::Flat,
        BottomedTerm::Int(_) => Flag::Natural,
        BottomedTerm::Ctor(name, children) => {
            let child_flags: Vec<Flag> = children.iter().map(|c| trace_member(c, core)).collect();
            core.flag(name, &child_flags)
        }
    }
}

/// Support-system membership, computed by the direct recursion: terms
/// without a constructor at the root are out, and a constructor node
/// applies its flag function to the children's support flags.
pub fn in_support(t: &Term, core: &CoreType) -> bool {
    support_flag(t, core).is_natural()
}

pub fn support_flag(t: &Term, core: &CoreType) -> Flag {
    match t {
        Term::Int(_) => Flag::Natural,
        Term::Ctor(name, args) => {
            let child_flags: Vec<Flag> = args.iter().map(|a| support_flag(a, core)).collect();
            core.flag(name, &child_flags)
        }
        Term::App(..) | Term::Case(..) => Flag::Flat,
    }
}
