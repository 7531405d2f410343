//! Terms of the language: constructor applications, name applications,
//! case expressions and integer literals, together with type inference,
//! the unique head decomposition and application flattening.

use std::collections::HashMap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::signature::{FnType, Signature, Type, TYPE_BOOL, TYPE_INT};

/// Names and types of the primitive integer operators.
pub const INT_OPS: [&str; 7] = ["add", "sub", "mul", "eq", "neq", "le", "ge"];

pub fn int_op_type(name: &str) -> Option<Type> {
    match name {
        "add" | "sub" | "mul" => Some(Type::func(vec![Type::int(), Type::int()], TYPE_INT)),
        "eq" | "neq" | "le" | "ge" => Some(Type::func(vec![Type::int(), Type::int()], TYPE_BOOL)),
        _ => None,
    }
}

pub fn is_int_op(name: &str) -> bool {
    INT_OPS.contains(&name)
}

/// A term. Integer literals are the nullary constructors of `int`; `App`
/// heads are names (equation names, primitives or in-scope locals) applied
/// to an initial segment of their arguments; `Case` branches are kept in
/// constructor-declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Int(BigInt),
    Ctor(String, Vec<Term>),
    App(String, Vec<Term>),
    Case(Box<Term>, Vec<(String, Term)>),
}

impl Term {
    pub fn int(n: impl Into<BigInt>) -> Term {
        Term::Int(n.into())
    }

    pub fn ctor(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Ctor(name.into(), args)
    }

    pub fn app(head: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(head.into(), args)
    }

    pub fn name(name: impl Into<String>) -> Term {
        Term::App(name.into(), vec![])
    }

    pub fn case_of(scrutinee: Term, branches: Vec<(String, Term)>) -> Term {
        Term::Case(Box::new(scrutinee), branches)
    }

    pub fn truth(b: bool) -> Term {
        Term::Ctor(if b { "True" } else { "False" }.to_string(), vec![])
    }

    /// True iff the term is built solely from constructors.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Int(_) => true,
            Term::Ctor(_, args) => args.iter().all(Term::is_ground),
            Term::App(..) | Term::Case(..) => false,
        }
    }

    pub fn is_ctor_rooted(&self) -> bool {
        matches!(self, Term::Int(_) | Term::Ctor(..))
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Term::Int(n) => Some(n),
            _ => None,
        }
    }
}

/// Typing environment covering the equation names I, the primitives P and
/// any in-scope locals.
#[derive(Debug, Clone, Default)]
pub struct TypeEnv {
    bindings: HashMap<String, Type>,
}

impl TypeEnv {
    /// Environment containing just the primitives.
    pub fn primitives() -> TypeEnv {
        let mut bindings = HashMap::new();
        for op in INT_OPS {
            bindings.insert(op.to_string(), int_op_type(op).unwrap());
        }
        TypeEnv { bindings }
    }

    pub fn bind(&mut self, name: impl Into<String>, ty: Type) {
        self.bindings.insert(name.into(), ty);
    }

    pub fn with(mut self, name: impl Into<String>, ty: Type) -> TypeEnv {
        self.bind(name, ty);
        self
    }

    pub fn extended(&self, locals: &[(String, Type)]) -> TypeEnv {
        let mut env = self.clone();
        for (n, t) in locals {
            env.bind(n.clone(), t.clone());
        }
        env
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.bindings.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("unbound name `{0}`")]
    UnboundName(String),
    #[error("`{head}` takes {arity} arguments but got {got}")]
    ArityExceeded {
        head: String,
        arity: usize,
        got: usize,
    },
    #[error("constructor `{ctor}` takes {expected} arguments but got {got}")]
    CtorArityMismatch {
        ctor: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {index} of `{head}` has type {got}, expected {expected}")]
    ArgTypeMismatch {
        head: String,
        index: usize,
        expected: String,
        got: String,
    },
    #[error("case scrutinee has type {0}, which is not case-eligible")]
    CaseOnIneligibleType(String),
    #[error("case on `{ty}` is missing a branch for `{ctor}`")]
    MissingBranch { ty: String, ctor: String },
    #[error("case on `{ty}` has an extra branch for `{ctor}`")]
    ExtraBranch { ty: String, ctor: String },
    #[error("branch `{ctor}` has type {got}, expected {expected}")]
    BranchTypeMismatch {
        ctor: String,
        expected: String,
        got: String,
    },
    #[error("term of functional type where a ground-typed term is required")]
    NotGroundTyped,
    #[error("term cannot be applied to further arguments")]
    NotApplicable,
}

/// Infer the unique type of a term. Partial applications of a head with
/// argument types `[t1..tm]` to k < m arguments have type `[t(k+1)..tm] -> b`.
pub fn infer_type(t: &Term, env: &TypeEnv, sig: &Signature) -> Result<Type, TermError> {
    match t {
        Term::Int(_) => Ok(Type::int()),
        Term::Ctor(name, args) => {
            let decl = sig
                .ctor(name)
                .ok_or_else(|| TermError::UnboundName(name.clone()))?;
            if args.len() != decl.arity() {
                return Err(TermError::CtorArityMismatch {
                    ctor: name.clone(),
                    expected: decl.arity(),
                    got: args.len(),
                });
            }
            for (i, (arg, want)) in args.iter().zip(&decl.arg_types).enumerate() {
                let got = infer_type(arg, env, sig)?;
                if got != Type::ground(want.clone()) {
                    return Err(TermError::ArgTypeMismatch {
                        head: name.clone(),
                        index: i + 1,
                        expected: want.clone(),
                        got: got.to_string(),
                    });
                }
            }
            Ok(Type::ground(decl.result_type.clone()))
        }
        Term::App(head, args) => {
            let head_ty = env
                .lookup(head)
                .ok_or_else(|| TermError::UnboundName(head.clone()))?
                .clone();
            match head_ty {
                Type::Ground(b) => {
                    if args.is_empty() {
                        Ok(Type::Ground(b))
                    } else {
                        Err(TermError::ArityExceeded {
                            head: head.clone(),
                            arity: 0,
                            got: args.len(),
                        })
                    }
                }
                Type::Fn(FnType { args: want, result }) => {
                    if args.len() > want.len() {
                        return Err(TermError::ArityExceeded {
                            head: head.clone(),
                            arity: want.len(),
                            got: args.len(),
                        });
                    }
                    for (i, (arg, w)) in args.iter().zip(&want).enumerate() {
                        let got = infer_type(arg, env, sig)?;
                        if got != *w {
                            return Err(TermError::ArgTypeMismatch {
                                head: head.clone(),
                                index: i + 1,
                                expected: w.to_string(),
                                got: got.to_string(),
                            });
                        }
                    }
                    if args.len() == want.len() {
                        Ok(Type::Ground(result))
                    } else {
                        Ok(Type::Fn(FnType {
                            args: want[args.len()..].to_vec(),
                            result,
                        }))
                    }
                }
            }
        }
        Term::Case(scrutinee, branches) => {
            let scrut_ty = infer_type(scrutinee, env, sig)?;
            let theta = match scrut_ty.as_ground() {
                Some(b) if sig.is_case_eligible(b) => b.to_string(),
                _ => return Err(TermError::CaseOnIneligibleType(scrut_ty.to_string())),
            };
            let declared = sig.ctors_of(&theta);
            for decl in &declared {
                if !branches.iter().any(|(c, _)| c == &decl.name) {
                    return Err(TermError::MissingBranch {
                        ty: theta.clone(),
                        ctor: decl.name.clone(),
                    });
                }
            }
            for (c, _) in branches {
                if !declared.iter().any(|d| d.name == *c) {
                    return Err(TermError::ExtraBranch {
                        ty: theta.clone(),
                        ctor: c.clone(),
                    });
                }
            }
            let mut result: Option<String> = None;
            for (c, body) in branches {
                let decl = sig.ctor(c).expect("branch constructor checked above");
                let got = infer_type(body, env, sig)?;
                let beta = if decl.arity() == 0 {
                    match got.as_ground() {
                        Some(b) => b.to_string(),
                        None => {
                            return Err(TermError::BranchTypeMismatch {
                                ctor: c.clone(),
                                expected: "a ground type".to_string(),
                                got: got.to_string(),
                            })
                        }
                    }
                } else {
                    let want_args: Vec<Type> = decl
                        .arg_types
                        .iter()
                        .map(|a| Type::ground(a.clone()))
                        .collect();
                    match &got {
                        Type::Fn(f) if f.args == want_args => f.result.clone(),
                        _ => {
                            return Err(TermError::BranchTypeMismatch {
                                ctor: c.clone(),
                                expected: format!(
                                    "{}",
                                    Type::func(want_args, result.clone().unwrap_or_default())
                                ),
                                got: got.to_string(),
                            })
                        }
                    }
                };
                match &result {
                    None => result = Some(beta),
                    Some(b) if *b == beta => {}
                    Some(b) => {
                        return Err(TermError::BranchTypeMismatch {
                            ctor: c.clone(),
                            expected: b.clone(),
                            got: beta,
                        })
                    }
                }
            }
            Ok(Type::ground(
                result.expect("case-eligible types have constructors"),
            ))
        }
    }
}

/// The unique classification of a ground-typed term: a constructor
/// application, a full name application, a bare ground-typed name, or a
/// case expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    KTerm {
        ctor: String,
        args: Vec<Term>,
    },
    ATerm {
        head: String,
        args: Vec<Term>,
    },
    BareName(String),
    CaseTerm {
        scrutinee: Term,
        branches: Vec<(String, Term)>,
    },
}

/// Decompose a well-typed ground-typed term. Integer literals report their
/// digit string as the constructor name. Partial applications are not
/// ground-typed and are rejected.
pub fn decompose(t: &Term, env: &TypeEnv) -> Result<Decomposition, TermError> {
    match t {
        Term::Int(n) => Ok(Decomposition::KTerm {
            ctor: n.to_string(),
            args: vec![],
        }),
        Term::Ctor(name, args) => Ok(Decomposition::KTerm {
            ctor: name.clone(),
            args: args.clone(),
        }),
        Term::App(head, args) => {
            let ty = env
                .lookup(head)
                .ok_or_else(|| TermError::UnboundName(head.clone()))?;
            match ty {
                Type::Ground(_) => Ok(Decomposition::BareName(head.clone())),
                Type::Fn(f) if args.len() == f.args.len() => Ok(Decomposition::ATerm {
                    head: head.clone(),
                    args: args.clone(),
                }),
                Type::Fn(_) => Err(TermError::NotGroundTyped),
            }
        }
        Term::Case(s, branches) => Ok(Decomposition::CaseTerm {
            scrutinee: (**s).clone(),
            branches: branches.clone(),
        }),
    }
}

impl Decomposition {
    /// Rebuild the term this decomposition came from.
    pub fn reassemble(&self) -> Term {
        match self {
            Decomposition::KTerm { ctor, args } => match ctor.parse::<BigInt>() {
                Ok(n) if args.is_empty() && !ctor.starts_with(|c: char| c.is_ascii_uppercase()) => {
                    Term::Int(n)
                }
                _ => Term::Ctor(ctor.clone(), args.clone()),
            },
            Decomposition::ATerm { head, args } => Term::App(head.clone(), args.clone()),
            Decomposition::BareName(n) => Term::name(n.clone()),
            Decomposition::CaseTerm {
                scrutinee,
                branches,
            } => Term::case_of(scrutinee.clone(), branches.clone()),
        }
    }
}

/// Append arguments to a functional-typed term: applying a partial
/// application extends its argument list. Empty `extra` is the identity,
/// which also covers firing a nullary case branch.
pub fn apply_flatten(f: &Term, extra: &[Term]) -> Result<Term, TermError> {
    if extra.is_empty() {
        return Ok(f.clone());
    }
    match f {
        Term::App(head, args) => {
            let mut all = args.clone();
            all.extend(extra.iter().cloned());
            Ok(Term::App(head.clone(), all))
        }
        Term::Int(_) | Term::Ctor(..) | Term::Case(..) => Err(TermError::NotApplicable),
    }
}

/// Canonical printing: application by juxtaposition, parentheses around
/// compound arguments, case branches in declaration order.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t, false);
    out
}

fn write_term(out: &mut String, t: &Term, arg_pos: bool) {
    match t {
        Term::Int(n) => out.push_str(&n.to_string()),
        Term::Ctor(name, args) | Term::App(name, args) => {
            let compound = !args.is_empty();
            if compound && arg_pos {
                out.push('(');
            }
            out.push_str(name);
            for a in args {
                out.push(' ');
                write_term(out, a, true);
            }
            if compound && arg_pos {
                out.push(')');
            }
        }
        Term::Case(scrutinee, branches) => {
            if arg_pos {
                out.push('(');
            }
            out.push_str("case ");
            write_term(out, scrutinee, true);
            out.push_str(" of { ");
            for (i, (c, body)) in branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(c);
                out.push_str(" -> ");
                write_term(out, body, false);
            }
            out.push_str(" }");
            if arg_pos {
                out.push(')');
            }
        }
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_term(self))
    }
}
