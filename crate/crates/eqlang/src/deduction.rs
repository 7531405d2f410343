//! Checker for equational-reasoning scripts. A script declares universally
//! quantified names, assumes groundedness or definedness facts about them,
//! and then chains replacement steps:
//!
//! - R1 rewrites under any operator given already-verified equivalences
//!   for the changed argument positions,
//! - R2 unfolds an equation at arbitrary argument terms,
//! - R3 evaluates an integer operator whose operands are grounded,
//! - R4 fires a case whose constructor-rooted scrutinee is not undefined,
//! - REFL, SYM and TRANS are the structural closure of the relation.
//!
//! Groundedness is derived from literals, constructor applications of
//! grounded parts and integer operators on grounded parts; definedness
//! from groundedness or from the core type's flag function on the parts.

use std::collections::HashMap;

use thiserror::Error;

use crate::coretype::{CoreType, Flag};
use crate::equations::EquationSystem;
use crate::parse::{canonicalize, parse_script, ParseError, ScriptLine};
use crate::reducer::eval_intop;
use crate::signature::{Signature, Type};
use crate::term::{apply_flatten, infer_type, is_int_op, Term, TermError, TypeEnv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleName {
    R1,
    R2,
    R3,
    R4,
    Refl,
    Sym,
    Trans,
}

impl RuleName {
    pub fn parse(s: &str) -> Option<RuleName> {
        Some(match s {
            "R1" => RuleName::R1,
            "R2" => RuleName::R2,
            "R3" => RuleName::R3,
            "R4" => RuleName::R4,
            "REFL" => RuleName::Refl,
            "SYM" => RuleName::Sym,
            "TRANS" => RuleName::Trans,
            _ => return None,
        })
    }
}

/// What is assumed about a universally quantified name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fact {
    Grounded(Term),
    NotUndefined,
    Unknown,
}

/// The quantified names in scope and the facts assumed about them.
#[derive(Debug, Clone, Default)]
pub struct Context {
    universals: Vec<(String, String)>,
    facts: HashMap<String, Fact>,
}

impl Context {
    pub fn declare(&mut self, name: impl Into<String>, ty: impl Into<String>) {
        let name = name.into();
        self.facts.insert(name.clone(), Fact::Unknown);
        self.universals.push((name, ty.into()));
    }

    pub fn assume(&mut self, name: &str, fact: Fact) {
        self.facts.insert(name.to_string(), fact);
    }

    pub fn fact(&self, name: &str) -> &Fact {
        self.facts.get(name).unwrap_or(&Fact::Unknown)
    }

    pub fn is_universal(&self, name: &str) -> bool {
        self.universals.iter().any(|(n, _)| n == name)
    }

    pub fn universals(&self) -> &[(String, String)] {
        &self.universals
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeductionError {
    #[error("step does not have the shape of {rule}: {detail}")]
    RuleMismatch { rule: String, detail: String },
    #[error("side condition not established: {0}")]
    MissingSideCondition(String),
    #[error("right-hand side is not the required replacement")]
    SubstitutionMismatch,
    #[error("premise not previously verified: {0}")]
    UnprovedPremise(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("universal `{0}` declared twice")]
    DuplicateUniversal(String),
    #[error("universal `{0}` clashes with an equation or primitive name")]
    UniversalClashesWithGlobal(String),
    #[error("`{0}` is not a declared universal")]
    UnknownUniversal(String),
    #[error("unknown ground type `{0}`")]
    UnknownType(String),
    #[error("assumed value for `{0}` is not a ground term")]
    NotGroundValue(String),
    #[error("assumed value for `{name}` has type {got}, expected {expected}")]
    ValueTypeMismatch {
        name: String,
        expected: String,
        got: String,
    },
    #[error("claim sides have types {lhs} and {rhs}")]
    ClaimTypesDiffer { lhs: String, rhs: String },
    #[error("claim is not of ground type")]
    ClaimNotGround,
    #[error("conclusion does not follow from the verified steps")]
    ConclusionNotEstablished,
    #[error("malformed term: {0}")]
    MalformedTerm(String),
    #[error(transparent)]
    Type(#[from] TermError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {error}")]
    Check { line: usize, error: DeductionError },
}

/// Try to derive a ground value for a term: literals and ground terms are
/// their own value, constructor applications and integer operators take
/// the values of their grounded parts, universals consult the context.
pub fn derive_grounded(t: &Term, ctx: &Context) -> Option<Term> {
    match t {
        Term::Int(_) => Some(t.clone()),
        Term::Ctor(name, args) => {
            let values: Option<Vec<Term>> = args.iter().map(|a| derive_grounded(a, ctx)).collect();
            Some(Term::Ctor(name.clone(), values?))
        }
        Term::App(head, args) => {
            if args.is_empty() {
                match ctx.fact(head) {
                    Fact::Grounded(v) => Some(v.clone()),
                    _ => None,
                }
            } else if is_int_op(head) && args.len() == 2 {
                let v1 = derive_grounded(&args[0], ctx)?;
                let v2 = derive_grounded(&args[1], ctx)?;
                eval_intop(head, &v1, &v2).ok()
            } else {
                None
            }
        }
        Term::Case(..) => None,
    }
}

/// Is the term derivably not undefined: grounded terms are, and a
/// constructor application is whenever its flag function is natural on the
/// parts' derived flags.
pub fn derive_not_undefined(t: &Term, ctx: &Context, core: &CoreType) -> bool {
    if derive_grounded(t, ctx).is_some() {
        return true;
    }
    match t {
        Term::Ctor(name, args) => {
            let flags: Vec<Flag> = args
                .iter()
                .map(|a| {
                    if derive_not_undefined(a, ctx, core) {
                        Flag::Natural
                    } else {
                        Flag::Flat
                    }
                })
                .collect();
            core.flag(name, &flags) == Flag::Natural
        }
        Term::App(head, args) if args.is_empty() => {
            matches!(ctx.fact(head), Fact::NotUndefined | Fact::Grounded(_))
        }
        _ => false,
    }
}

fn established(lhs: &Term, rhs: &Term, verified: &[(Term, Term)]) -> bool {
    lhs == rhs
        || verified
            .iter()
            .any(|(a, b)| (a == lhs && b == rhs) || (a == rhs && b == lhs))
}

/// Check one equivalence step against the named rule, relative to the
/// context's facts and the equivalences verified so far.
pub fn check_equiv_step(
    rule: RuleName,
    lhs: &Term,
    rhs: &Term,
    ctx: &Context,
    system: &EquationSystem,
    core: &CoreType,
    verified: &[(Term, Term)],
) -> Result<(), DeductionError> {
    let mismatch = |rule: &str, detail: &str| DeductionError::RuleMismatch {
        rule: rule.to_string(),
        detail: detail.to_string(),
    };
    match rule {
        RuleName::Refl => {
            if lhs == rhs {
                Ok(())
            } else {
                Err(mismatch("REFL", "sides are not identical"))
            }
        }
        RuleName::Sym => {
            if verified.iter().any(|(a, b)| a == rhs && b == lhs) || lhs == rhs {
                Ok(())
            } else {
                Err(DeductionError::UnprovedPremise(format!("{rhs} == {lhs}")))
            }
        }
        RuleName::Trans => {
            let mut candidates: Vec<&Term> = Vec::new();
            for (a, b) in verified {
                if a == lhs {
                    candidates.push(b);
                }
                if b == lhs {
                    candidates.push(a);
                }
            }
            if candidates.iter().any(|mid| established(mid, rhs, verified)) {
                Ok(())
            } else {
                Err(DeductionError::UnprovedPremise(format!(
                    "no verified intermediate links {lhs} to {rhs}"
                )))
            }
        }
        RuleName::R1 => {
            let pairs: Vec<(&Term, &Term)> = match (lhs, rhs) {
                (Term::Ctor(c1, a1), Term::Ctor(c2, a2)) if c1 == c2 && a1.len() == a2.len() => {
                    a1.iter().zip(a2.iter()).collect()
                }
                (Term::App(h1, a1), Term::App(h2, a2)) if h1 == h2 && a1.len() == a2.len() => {
                    a1.iter().zip(a2.iter()).collect()
                }
                (Term::Case(s1, b1), Term::Case(s2, b2))
                    if b1.len() == b2.len()
                        && b1.iter().zip(b2.iter()).all(|((c1, _), (c2, _))| c1 == c2) =>
                {
                    std::iter::once((&**s1, &**s2))
                        .chain(b1.iter().zip(b2.iter()).map(|((_, t1), (_, t2))| (t1, t2)))
                        .collect()
                }
                _ => return Err(mismatch("R1", "sides must share the same operator")),
            };
            for (a, b) in pairs {
                if !established(a, b, verified) {
                    return Err(DeductionError::UnprovedPremise(format!("{a} == {b}")));
                }
            }
            Ok(())
        }
        RuleName::R2 => {
            let Term::App(head, args) = lhs else {
                return Err(mismatch("R2", "left side must apply an equation name"));
            };
            let Some(def) = system.get(head) else {
                return Err(mismatch("R2", "left side must apply an equation name"));
            };
            if args.len() != def.params.len() {
                return Err(mismatch("R2", "left side must be a full application"));
            }
            let unfolded = crate::equations::instantiate(def, args)?;
            if *rhs == unfolded {
                Ok(())
            } else {
                Err(DeductionError::SubstitutionMismatch)
            }
        }
        RuleName::R3 => {
            let Term::App(head, args) = lhs else {
                return Err(mismatch("R3", "left side must apply an integer operator"));
            };
            if !is_int_op(head) || args.len() != 2 {
                return Err(mismatch("R3", "left side must apply an integer operator"));
            }
            let v1 = derive_grounded(&args[0], ctx).ok_or_else(|| {
                DeductionError::MissingSideCondition(format!("{} is grounded", args[0]))
            })?;
            let v2 = derive_grounded(&args[1], ctx).ok_or_else(|| {
                DeductionError::MissingSideCondition(format!("{} is grounded", args[1]))
            })?;
            let value =
                eval_intop(head, &v1, &v2).expect("derived values are ground integer literals");
            if *rhs == value {
                Ok(())
            } else {
                Err(DeductionError::SubstitutionMismatch)
            }
        }
        RuleName::R4 => {
            let Term::Case(scrutinee, branches) = lhs else {
                return Err(mismatch("R4", "left side must be a case expression"));
            };
            let Term::Ctor(ctor, ctor_args) = &**scrutinee else {
                return Err(mismatch(
                    "R4",
                    "scrutinee must be in constructor-rooted form",
                ));
            };
            if !derive_not_undefined(scrutinee, ctx, core) {
                return Err(DeductionError::MissingSideCondition(format!(
                    "{scrutinee} is not undefined"
                )));
            }
            let Some((_, branch)) = branches.iter().find(|(c, _)| c == ctor) else {
                return Err(mismatch("R4", "scrutinee constructor has no branch"));
            };
            let fired = apply_flatten(branch, ctor_args)?;
            if *rhs == fired {
                Ok(())
            } else {
                Err(DeductionError::SubstitutionMismatch)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptReport {
    pub steps_verified: usize,
    pub conclusions: Vec<(Term, Term)>,
}

/// Check a parsed script line by line. The first failing line aborts the
/// run and is reported with its number.
pub fn check_script_lines(
    lines: &[(usize, ScriptLine)],
    system: &EquationSystem,
    sig: &Signature,
    core: &CoreType,
) -> Result<ScriptReport, ScriptError> {
    let mut ctx = Context::default();
    let mut env = system.global_env();
    let mut verified: Vec<(Term, Term)> = Vec::new();
    let mut conclusions: Vec<(Term, Term)> = Vec::new();

    let fail = |line: usize, error: DeductionError| ScriptError::Check { line, error };

    for (line, item) in lines {
        let line = *line;
        match item {
            ScriptLine::Universal { name, ty } => {
                if ctx.is_universal(name) {
                    return Err(fail(line, DeductionError::DuplicateUniversal(name.clone())));
                }
                if env.contains(name) {
                    return Err(fail(
                        line,
                        DeductionError::UniversalClashesWithGlobal(name.clone()),
                    ));
                }
                if !sig.has_type(ty) {
                    return Err(fail(line, DeductionError::UnknownType(ty.clone())));
                }
                ctx.declare(name.clone(), ty.clone());
                env.bind(name.clone(), Type::ground(ty.clone()));
            }
            ScriptLine::AssumeGrounded { name, value } => {
                let Some((_, ty)) = ctx.universals().iter().find(|(n, _)| n == name).cloned()
                else {
                    return Err(fail(line, DeductionError::UnknownUniversal(name.clone())));
                };
                let mut value = value.clone();
                canonicalize(&mut value, sig)
                    .map_err(|e| fail(line, DeductionError::MalformedTerm(e.to_string())))?;
                if !value.is_ground() {
                    return Err(fail(line, DeductionError::NotGroundValue(name.clone())));
                }
                let got = infer_type(&value, &env, sig)
                    .map_err(|e| fail(line, DeductionError::Type(e)))?;
                if got != Type::ground(ty.clone()) {
                    return Err(fail(
                        line,
                        DeductionError::ValueTypeMismatch {
                            name: name.clone(),
                            expected: ty,
                            got: got.to_string(),
                        },
                    ));
                }
                ctx.assume(name, Fact::Grounded(value));
            }
            ScriptLine::AssumeDefined { name } => {
                if !ctx.is_universal(name) {
                    return Err(fail(line, DeductionError::UnknownUniversal(name.clone())));
                }
                if !matches!(ctx.fact(name), Fact::Grounded(_)) {
                    ctx.assume(name, Fact::NotUndefined);
                }
            }
            ScriptLine::Step { rule, lhs, rhs } => {
                let rule_name = RuleName::parse(rule)
                    .ok_or_else(|| fail(line, DeductionError::UnknownRule(rule.clone())))?;
                let (lhs, rhs) = prepare_claim(lhs, rhs, &env, sig).map_err(|e| fail(line, e))?;
                check_equiv_step(rule_name, &lhs, &rhs, &ctx, system, core, &verified)
                    .map_err(|e| fail(line, e))?;
                verified.push((lhs, rhs));
            }
            ScriptLine::Conclude { lhs, rhs } => {
                let (lhs, rhs) = prepare_claim(lhs, rhs, &env, sig).map_err(|e| fail(line, e))?;
                if !in_closure(&lhs, &rhs, &verified) {
                    return Err(fail(line, DeductionError::ConclusionNotEstablished));
                }
                conclusions.push((lhs, rhs));
            }
        }
    }
    Ok(ScriptReport {
        steps_verified: verified.len(),
        conclusions,
    })
}

/// Parse and check a whole script file against a program and a core.
pub fn check_script(
    source: &str,
    system: &EquationSystem,
    sig: &Signature,
    core: &CoreType,
) -> Result<ScriptReport, ScriptError> {
    let lines = parse_script(source)?;
    check_script_lines(&lines, system, sig, core)
}

fn prepare_claim(
    lhs: &Term,
    rhs: &Term,
    env: &TypeEnv,
    sig: &Signature,
) -> Result<(Term, Term), DeductionError> {
    let mut lhs = lhs.clone();
    let mut rhs = rhs.clone();
    canonicalize(&mut lhs, sig).map_err(|e| DeductionError::MalformedTerm(e.to_string()))?;
    canonicalize(&mut rhs, sig).map_err(|e| DeductionError::MalformedTerm(e.to_string()))?;
    let lt = infer_type(&lhs, env, sig)?;
    let rt = infer_type(&rhs, env, sig)?;
    if lt != rt {
        return Err(DeductionError::ClaimTypesDiffer {
            lhs: lt.to_string(),
            rhs: rt.to_string(),
        });
    }
    if lt.as_ground().is_none() {
        return Err(DeductionError::ClaimNotGround);
    }
    Ok((lhs, rhs))
}

/// Reflexive-symmetric-transitive reachability over the verified pairs.
fn in_closure(lhs: &Term, rhs: &Term, verified: &[(Term, Term)]) -> bool {
    if lhs == rhs {
        return true;
    }
    let mut frontier = vec![lhs.clone()];
    let mut seen = vec![lhs.clone()];
    while let Some(cur) = frontier.pop() {
        for (a, b) in verified {
            for (from, to) in [(a, b), (b, a)] {
                if *from == cur && !seen.contains(to) {
                    if to == rhs {
                        return true;
                    }
                    seen.push(to.clone());
                    frontier.push(to.clone());
                }
            }
        }
    }
    false
}
