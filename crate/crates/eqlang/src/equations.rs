//! Equation systems: one right-hand side per declared name, with the
//! substitution operator and the canonical left-hand sides (abstractors).

use std::collections::HashMap;

use thiserror::Error;

use crate::parse::{canonicalize, parse_statements, ParseError, Stmt};
use crate::signature::{DataDecl, Signature, SignatureError, Type};
use crate::term::{apply_flatten, infer_type, is_int_op, Term, TermError, TypeEnv};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationDef {
    pub name: String,
    pub declared_type: Type,
    pub params: Vec<(String, Type)>,
    pub body: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    defs: Vec<EquationDef>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Type(#[from] TermError),
    #[error("`{0}` has a signature but no definition")]
    MissingDefinition(String),
    #[error("`{0}` is defined more than once")]
    DuplicateDefinition(String),
    #[error("`{0}` has more than one signature")]
    DuplicateSignature(String),
    #[error("definition of `{0}` has no signature")]
    UnknownEquationName(String),
    #[error("`{0}` is the name of a primitive and cannot be redefined")]
    ReservedName(String),
    #[error("signature for `{0}` references undeclared type `{1}`")]
    UnknownTypeInSignature(String, String),
    #[error("`{name}` is declared with {expected} parameters but defined with {got}")]
    ParamCountMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("parameter `{param}` of `{name}` clashes with a global name")]
    ParamShadowsGlobal { name: String, param: String },
    #[error("parameter `{param}` of `{name}` is repeated")]
    DuplicateParam { name: String, param: String },
    #[error("body of `{name}` has type {got}, expected {expected}")]
    BodyTypeMismatch {
        name: String,
        expected: String,
        got: String,
    },
    #[error("a program needs at least one equation")]
    NoEquations,
}

impl EquationSystem {
    pub fn defs(&self) -> &[EquationDef] {
        &self.defs
    }

    pub fn get(&self, name: &str) -> Option<&EquationDef> {
        self.index.get(name).map(|&i| &self.defs[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Environment of the equation names plus the primitives.
    pub fn global_env(&self) -> TypeEnv {
        let mut env = TypeEnv::primitives();
        for d in &self.defs {
            env.bind(d.name.clone(), d.declared_type.clone());
        }
        env
    }

    /// The canonical left-hand side of an equation: the name applied to its
    /// own parameters, or the bare name when it has none.
    pub fn abstractor(&self, name: &str) -> Result<Term, ProgramError> {
        let def = self
            .get(name)
            .ok_or_else(|| ProgramError::UnknownEquationName(name.to_string()))?;
        Ok(Term::app(
            def.name.clone(),
            def.params
                .iter()
                .map(|(p, _)| Term::name(p.clone()))
                .collect(),
        ))
    }
}

fn check_type_known(sig: &Signature, name: &str, ty: &Type) -> Result<(), ProgramError> {
    match ty {
        Type::Ground(b) => {
            if sig.has_type(b) {
                Ok(())
            } else {
                Err(ProgramError::UnknownTypeInSignature(
                    name.to_string(),
                    b.clone(),
                ))
            }
        }
        Type::Fn(f) => {
            for a in &f.args {
                check_type_known(sig, name, a)?;
            }
            if sig.has_type(&f.result) {
                Ok(())
            } else {
                Err(ProgramError::UnknownTypeInSignature(
                    name.to_string(),
                    f.result.clone(),
                ))
            }
        }
    }
}

/// Parse and validate a whole program: data declarations first, then one
/// signature and one definition per equation name.
pub fn parse_program(source: &str) -> Result<(Signature, EquationSystem), ProgramError> {
    let stmts = parse_statements(source)?;

    let datas: Vec<DataDecl> = stmts
        .iter()
        .filter_map(|s| match s {
            Stmt::Data(d) => Some(d.clone()),
            _ => None,
        })
        .collect();
    let sig = Signature::validate(&datas)?;

    let mut order: Vec<String> = Vec::new();
    let mut declared: HashMap<String, Type> = HashMap::new();
    for s in &stmts {
        if let Stmt::Sig { name, ty } = s {
            if is_int_op(name) {
                return Err(ProgramError::ReservedName(name.clone()));
            }
            if declared.insert(name.clone(), ty.clone()).is_some() {
                return Err(ProgramError::DuplicateSignature(name.clone()));
            }
            check_type_known(&sig, name, ty)?;
            order.push(name.clone());
        }
    }

    let mut env = TypeEnv::primitives();
    for name in &order {
        env.bind(name.clone(), declared[name].clone());
    }

    let mut defs: HashMap<String, EquationDef> = HashMap::new();
    for s in &stmts {
        let Stmt::Def {
            name, params, body, ..
        } = s
        else {
            continue;
        };
        let ty = declared
            .get(name)
            .ok_or_else(|| ProgramError::UnknownEquationName(name.clone()))?;
        if defs.contains_key(name) {
            return Err(ProgramError::DuplicateDefinition(name.clone()));
        }
        let param_types: Vec<Type> = match ty {
            Type::Ground(_) => vec![],
            Type::Fn(f) => f.args.clone(),
        };
        if params.len() != param_types.len() {
            return Err(ProgramError::ParamCountMismatch {
                name: name.clone(),
                expected: param_types.len(),
                got: params.len(),
            });
        }
        let mut typed_params = Vec::new();
        for (p, t) in params.iter().zip(param_types) {
            if env.contains(p) {
                return Err(ProgramError::ParamShadowsGlobal {
                    name: name.clone(),
                    param: p.clone(),
                });
            }
            if typed_params.iter().any(|(q, _)| q == p) {
                return Err(ProgramError::DuplicateParam {
                    name: name.clone(),
                    param: p.clone(),
                });
            }
            typed_params.push((p.clone(), t));
        }
        let mut body = body.clone();
        canonicalize(&mut body, &sig)?;
        let body_env = env.extended(&typed_params);
        let got = infer_type(&body, &body_env, &sig)?;
        let expected = Type::ground(ty.result().to_string());
        if got != expected {
            return Err(ProgramError::BodyTypeMismatch {
                name: name.clone(),
                expected: expected.to_string(),
                got: got.to_string(),
            });
        }
        defs.insert(
            name.clone(),
            EquationDef {
                name: name.clone(),
                declared_type: ty.clone(),
                params: typed_params,
                body,
            },
        );
    }

    for name in &order {
        if !defs.contains_key(name) {
            return Err(ProgramError::MissingDefinition(name.clone()));
        }
    }
    if order.is_empty() {
        return Err(ProgramError::NoEquations);
    }

    let mut system = EquationSystem {
        defs: Vec::new(),
        index: HashMap::new(),
    };
    for name in order {
        let def = defs.remove(&name).expect("presence checked above");
        system.index.insert(name, system.defs.len());
        system.defs.push(def);
    }
    Ok((sig, system))
}

/// Replace each occurrence of a bound local by its term. A local in head
/// position takes its arguments with it, flattened onto whatever the
/// binding supplies.
pub fn substitute(body: &Term, bindings: &HashMap<String, Term>) -> Result<Term, TermError> {
    match body {
        Term::Int(_) => Ok(body.clone()),
        Term::Ctor(name, args) => {
            let args = args
                .iter()
                .map(|a| substitute(a, bindings))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::Ctor(name.clone(), args))
        }
        Term::App(head, args) => {
            let args = args
                .iter()
                .map(|a| substitute(a, bindings))
                .collect::<Result<Vec<_>, _>>()?;
            match bindings.get(head) {
                Some(replacement) => apply_flatten(replacement, &args),
                None => Ok(Term::App(head.clone(), args)),
            }
        }
        Term::Case(scrutinee, branches) => {
            let scrutinee = substitute(scrutinee, bindings)?;
            let branches = branches
                .iter()
                .map(|(c, b)| Ok((c.clone(), substitute(b, bindings)?)))
                .collect::<Result<Vec<_>, TermError>>()?;
            Ok(Term::case_of(scrutinee, branches))
        }
    }
}

/// Instantiate an equation's body with argument terms, one per parameter.
pub fn instantiate(def: &EquationDef, args: &[Term]) -> Result<Term, TermError> {
    debug_assert_eq!(def.params.len(), args.len());
    let bindings: HashMap<String, Term> = def
        .params
        .iter()
        .map(|(p, _)| p.clone())
        .zip(args.iter().cloned())
        .collect();
    substitute(&def.body, &bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    pub(crate) const SQS_PROGRAM: &str = "\
data nat = Zero | Succ nat ;
data pair = Pair int int ;
data list = Nil | Cons int list ;
sig revs : (int -> int) int -> list ;
def revs p n = case (eq n 0) of { True -> Nil, False -> Cons (p n) (revs p (sub n 1)) } ;
sig sq : int -> int ;
def sq n = mul n n ;
sig shunt : list list -> list ;
def shunt a b = case a of { Nil -> b, Cons -> shunx b } ;
sig shunx : list int list -> list ;
def shunx a n b = shunt b (Cons n a) ;
sig sqs : int -> list ;
def sqs n = shunt (revs sq n) Nil ;
";

    const MAP_PROGRAM: &str = "\
data list = Nil | Cons int list ;
sig map : (int -> int) list -> list ;
def map f ns = case ns of { Nil -> Nil, Cons -> mapx f } ;
sig mapx : (int -> int) int list -> list ;
def mapx f m ms = Cons (f m) (map f ms) ;
sig plus : int int -> int ;
def plus m n = add m n ;
sig hd : list -> int ;
def hd ms = case ms of { Nil -> uint, Cons -> hdx } ;
sig hdx : int list -> int ;
def hdx n ns = n ;
sig uint : int ;
def uint = uint ;
";

    #[test]
    fn accepts_the_rev_square_program() {
        let (sig, system) = parse_program(SQS_PROGRAM).unwrap();
        assert_eq!(system.defs().len(), 5);
        assert_eq!(system.get("shunt").unwrap().params.len(), 2);
        assert!(sig.ctor("Pair").is_some());
    }

    #[test]
    fn accepts_the_map_program() {
        let (_, system) = parse_program(MAP_PROGRAM).unwrap();
        assert_eq!(system.defs().len(), 6);
        assert_eq!(system.get("uint").unwrap().params.len(), 0);
    }

    #[test]
    fn missing_definition_is_reported() {
        let err = parse_program("sig f : int -> int ;").unwrap_err();
        assert_eq!(err, ProgramError::MissingDefinition("f".to_string()));
    }

    #[test]
    fn assembly_errors() {
        let err = parse_program("def f n = n ;").unwrap_err();
        assert_eq!(err, ProgramError::UnknownEquationName("f".to_string()));

        let err = parse_program("sig f : int -> int ;\ndef f n = n ;\ndef f m = m ;").unwrap_err();
        assert_eq!(err, ProgramError::DuplicateDefinition("f".to_string()));

        let err = parse_program("sig f : int -> int ;\ndef f = 3 ;").unwrap_err();
        assert!(matches!(err, ProgramError::ParamCountMismatch { .. }));

        let err = parse_program("sig add : int int -> int ;\ndef add a b = a ;").unwrap_err();
        assert_eq!(err, ProgramError::ReservedName("add".to_string()));

        let err = parse_program("sig f : int -> int ;\nsig g : int ;\ndef f f = f ;\ndef g = 1 ;")
            .unwrap_err();
        assert!(matches!(err, ProgramError::ParamShadowsGlobal { .. }));

        let err = parse_program("sig f : int -> list ;\ndef f n = n ;").unwrap_err();
        assert!(matches!(err, ProgramError::UnknownTypeInSignature(..)));

        let err = parse_program("sig f : int -> int ;\ndef f n = True ;").unwrap_err();
        assert!(matches!(err, ProgramError::BodyTypeMismatch { .. }));

        let err = parse_program("data unit = U ;").unwrap_err();
        assert_eq!(err, ProgramError::NoEquations);
    }

    #[test]
    fn substitution_replaces_locals() {
        let (sig, system) = parse_program(SQS_PROGRAM).unwrap();
        let env = system.global_env().with("n", Type::int());

        // sq's body with its parameter sent to the loose name n
        let sq = system.get("sq").unwrap();
        let got = instantiate(sq, &[Term::name("n")]).unwrap();
        assert_eq!(got, parse_term("mul n n", &env, &sig).unwrap());

        // shunx's body under a permutation of loose names
        let env = env
            .clone()
            .with("a", Type::ground("list"))
            .with("b", Type::ground("list"));
        let shunx = system.get("shunx").unwrap();
        let got = instantiate(shunx, &[Term::name("b"), Term::name("n"), Term::name("a")]).unwrap();
        assert_eq!(got, parse_term("shunt a (Cons n b)", &env, &sig).unwrap());

        // a body with no locals is untouched
        let uint_body = parse_term("sub 1 2", &env, &sig).unwrap();
        let mut bindings = HashMap::new();
        bindings.insert("z".to_string(), Term::int(9));
        assert_eq!(substitute(&uint_body, &bindings).unwrap(), uint_body);
    }

    #[test]
    fn substitution_flattens_head_positions() {
        let (sig, system) = parse_program(MAP_PROGRAM).unwrap();
        let env = system.global_env();
        let mapx = system.get("mapx").unwrap();
        let partial = parse_term("plus 1", &env, &sig).unwrap();
        let got = instantiate(
            mapx,
            &[
                partial,
                Term::int(1),
                parse_term("Cons 2 Nil", &env, &sig).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(
            got,
            parse_term("Cons (plus 1 1) (map (plus 1) (Cons 2 Nil))", &env, &sig).unwrap()
        );
    }

    #[test]
    fn substitution_preserves_types_and_identity() {
        let (sig, system) = parse_program(SQS_PROGRAM).unwrap();
        let env = system.global_env();
        for def in system.defs() {
            let body_env = env.extended(&def.params);
            let before = infer_type(&def.body, &body_env, &sig).unwrap();
            // identity bindings: each parameter to itself
            let bindings: HashMap<String, Term> = def
                .params
                .iter()
                .map(|(p, _)| (p.clone(), Term::name(p.clone())))
                .collect();
            let after = substitute(&def.body, &bindings).unwrap();
            assert_eq!(after, def.body);
            assert_eq!(infer_type(&after, &body_env, &sig).unwrap(), before);
        }
    }

    #[test]
    fn complete_bindings_close_the_term() {
        fn mentions_local(t: &Term, locals: &[&str]) -> bool {
            match t {
                Term::Int(_) => false,
                Term::Ctor(_, args) | Term::App(_, args) => {
                    let head_hit = match t {
                        Term::App(h, _) => locals.contains(&h.as_str()),
                        _ => false,
                    };
                    head_hit || args.iter().any(|a| mentions_local(a, locals))
                }
                Term::Case(s, branches) => {
                    mentions_local(s, locals)
                        || branches.iter().any(|(_, b)| mentions_local(b, locals))
                }
            }
        }
        let (sig, system) = parse_program(SQS_PROGRAM).unwrap();
        let env = system.global_env();
        let revs = system.get("revs").unwrap();
        let got =
            instantiate(revs, &[parse_term("sq", &env, &sig).unwrap(), Term::int(2)]).unwrap();
        assert!(!mentions_local(&got, &["p", "n"]));
    }

    #[test]
    fn abstractors() {
        let (_, system) = parse_program(SQS_PROGRAM).unwrap();
        assert_eq!(
            system.abstractor("shunt").unwrap(),
            Term::app("shunt", vec![Term::name("a"), Term::name("b")])
        );
        assert_eq!(
            system.abstractor("sqs").unwrap(),
            Term::app("sqs", vec![Term::name("n")])
        );
        let (_, map_system) = parse_program(MAP_PROGRAM).unwrap();
        assert_eq!(map_system.abstractor("uint").unwrap(), Term::name("uint"));
        assert!(system.abstractor("nosuch").is_err());
    }

    #[test]
    fn substitution_composes_on_disjoint_domains() {
        let (sig, system) = parse_program(SQS_PROGRAM).unwrap();
        let env = system
            .global_env()
            .with("x", Type::int())
            .with("y", Type::int());
        let body = parse_term("add x y", &env, &sig).unwrap();
        let mut b1 = HashMap::new();
        b1.insert("x".to_string(), Term::int(1));
        let mut b2 = HashMap::new();
        b2.insert("y".to_string(), Term::int(2));
        let step_wise = substitute(&substitute(&body, &b1).unwrap(), &b2).unwrap();
        let mut both = b1.clone();
        both.extend(b2.clone());
        assert_eq!(step_wise, substitute(&body, &both).unwrap());
    }
}
