//! Ground signatures: the declared ground types and their typed constructors.
//!
//! A signature is the quadruple of ground types, constructor names, argument
//! lists and result types. `int` and `bool` are built in: `int` has the
//! (infinite) family of integer literals as its constructors and `bool` has
//! `True` and `False`. A signature is only accepted when it is pervasive,
//! i.e. when closing the empty set of types under "all argument types
//! already present" reaches every declared type.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

pub const TYPE_INT: &str = "int";
pub const TYPE_BOOL: &str = "bool";

/// A raw `data` declaration as it comes out of the parser, before any
/// validation has happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDecl {
    pub name: String,
    pub ctors: Vec<(String, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructorDecl {
    pub name: String,
    pub arg_types: Vec<String>,
    pub result_type: String,
}

impl ConstructorDecl {
    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

/// A type of the language: either a ground type or a functional type
/// `L -> b` with a nonempty argument list and a ground result. Zero-argument
/// functional types are represented as the ground type itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Ground(String),
    Fn(FnType),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FnType {
    pub args: Vec<Type>,
    pub result: String,
}

impl Type {
    pub fn ground(name: impl Into<String>) -> Type {
        Type::Ground(name.into())
    }

    pub fn func(args: Vec<Type>, result: impl Into<String>) -> Type {
        assert!(
            !args.is_empty(),
            "functional type needs at least one argument"
        );
        Type::Fn(FnType {
            args,
            result: result.into(),
        })
    }

    pub fn int() -> Type {
        Type::ground(TYPE_INT)
    }

    pub fn bool() -> Type {
        Type::ground(TYPE_BOOL)
    }

    /// The ground result type: `b` itself for ground types, the result for
    /// functional types.
    pub fn result(&self) -> &str {
        match self {
            Type::Ground(b) => b,
            Type::Fn(f) => &f.result,
        }
    }

    pub fn as_ground(&self) -> Option<&str> {
        match self {
            Type::Ground(b) => Some(b),
            Type::Fn(_) => None,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Type::Ground(_) => 0,
            Type::Fn(f) => f.args.len(),
        }
    }
}

impl std::fmt::Display for Type {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Type::Ground(b) => write!(f, "{b}"),
            Type::Fn(ft) => {
                for arg in &ft.args {
                    match arg {
                        Type::Ground(b) => write!(f, "{b} ")?,
                        Type::Fn(_) => write!(f, "({arg}) ")?,
                    }
                }
                write!(f, "-> {}", ft.result)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("duplicate type declaration `{0}`")]
    DuplicateType(String),
    #[error("duplicate constructor `{0}`")]
    DuplicateConstructor(String),
    #[error("constructor `{ctor}` references undeclared type `{ty}`")]
    UnknownType { ctor: String, ty: String },
    #[error("signature is not pervasive; empty types: {}", .0.join(", "))]
    NonPervasive(Vec<String>),
}

/// A validated ground signature. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    ground_types: Vec<String>,
    ctors: Vec<ConstructorDecl>,
    ctor_index: HashMap<String, usize>,
    type_set: HashSet<String>,
}

impl Signature {
    /// Validate raw declarations against uniqueness and pervasiveness and
    /// build the full signature, builtins included.
    pub fn validate(decls: &[DataDecl]) -> Result<Signature, SignatureError> {
        let mut ground_types: Vec<String> = vec![TYPE_INT.to_string(), TYPE_BOOL.to_string()];
        let mut type_set: HashSet<String> = ground_types.iter().cloned().collect();
        for d in decls {
            if !type_set.insert(d.name.clone()) {
                return Err(SignatureError::DuplicateType(d.name.clone()));
            }
            ground_types.push(d.name.clone());
        }

        let mut ctors: Vec<ConstructorDecl> = vec![
            ConstructorDecl {
                name: "True".to_string(),
                arg_types: vec![],
                result_type: TYPE_BOOL.to_string(),
            },
            ConstructorDecl {
                name: "False".to_string(),
                arg_types: vec![],
                result_type: TYPE_BOOL.to_string(),
            },
        ];
        for d in decls {
            for (name, args) in &d.ctors {
                ctors.push(ConstructorDecl {
                    name: name.clone(),
                    arg_types: args.clone(),
                    result_type: d.name.clone(),
                });
            }
        }

        let mut ctor_index = HashMap::new();
        for (i, c) in ctors.iter().enumerate() {
            if ctor_index.insert(c.name.clone(), i).is_some() {
                return Err(SignatureError::DuplicateConstructor(c.name.clone()));
            }
            for ty in &c.arg_types {
                if !type_set.contains(ty) {
                    return Err(SignatureError::UnknownType {
                        ctor: c.name.clone(),
                        ty: ty.clone(),
                    });
                }
            }
        }

        let sig = Signature {
            ground_types,
            ctors,
            ctor_index,
            type_set,
        };
        let reached = sig.closure_from_empty();
        if reached.len() != sig.ground_types.len() {
            let missing: Vec<String> = sig
                .ground_types
                .iter()
                .filter(|t| !reached.contains(t.as_str()))
                .cloned()
                .collect();
            return Err(SignatureError::NonPervasive(missing));
        }
        Ok(sig)
    }

    /// Iterate the closure of the empty set: a type is added once some
    /// constructor of it has every argument type already in the set. The
    /// integer literals act as nullary constructors of `int`.
    pub fn closure_from_empty(&self) -> HashSet<&str> {
        let mut reached: HashSet<&str> = HashSet::new();
        reached.insert(TYPE_INT);
        loop {
            let before = reached.len();
            for c in &self.ctors {
                if c.arg_types.iter().all(|a| reached.contains(a.as_str())) {
                    reached.insert(c.result_type.as_str());
                }
            }
            if reached.len() == before {
                return reached;
            }
        }
    }

    /// The ground types eligible as case scrutinees: every type except
    /// `int`, whose constructor family is infinite.
    pub fn case_eligible_types(&self) -> Vec<&str> {
        self.ground_types
            .iter()
            .map(|t| t.as_str())
            .filter(|t| *t != TYPE_INT)
            .collect()
    }

    pub fn ground_types(&self) -> &[String] {
        &self.ground_types
    }

    pub fn has_type(&self, name: &str) -> bool {
        self.type_set.contains(name)
    }

    pub fn ctor(&self, name: &str) -> Option<&ConstructorDecl> {
        self.ctor_index.get(name).map(|&i| &self.ctors[i])
    }

    /// Index of a constructor in global declaration order. Used to
    /// canonicalise case branches.
    pub fn ctor_order(&self, name: &str) -> Option<usize> {
        self.ctor_index.get(name).copied()
    }

    pub fn ctors(&self) -> &[ConstructorDecl] {
        &self.ctors
    }

    /// Constructors of a ground type in declaration order. Empty for `int`
    /// (the literal family is not enumerable).
    pub fn ctors_of(&self, ty: &str) -> Vec<&ConstructorDecl> {
        self.ctors.iter().filter(|c| c.result_type == ty).collect()
    }

    pub fn is_case_eligible(&self, ty: &str) -> bool {
        ty != TYPE_INT && self.type_set.contains(ty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decl(name: &str, ctors: &[(&str, &[&str])]) -> DataDecl {
        DataDecl {
            name: name.to_string(),
            ctors: ctors
                .iter()
                .map(|(c, args)| (c.to_string(), args.iter().map(|s| s.to_string()).collect()))
                .collect(),
        }
    }

    /// The signature shared by the example programs: bool/nat/int/pair/list.
    pub(crate) fn example_decls() -> Vec<DataDecl> {
        vec![
            decl("nat", &[("Zero", &[]), ("Succ", &["nat"])]),
            decl("pair", &[("Pair", &["int", "int"])]),
            decl("list", &[("Nil", &[]), ("Cons", &["int", "list"])]),
        ]
    }

    #[test]
    fn example_signature_accepted() {
        let sig = Signature::validate(&example_decls()).unwrap();
        assert_eq!(sig.ground_types(), &["int", "bool", "nat", "pair", "list"]);
        assert_eq!(sig.ctor("Cons").unwrap().arg_types, vec!["int", "list"]);
        assert_eq!(sig.ctor("Pair").unwrap().result_type, "pair");
    }

    #[test]
    fn builtins_only_accepted() {
        let sig = Signature::validate(&[]).unwrap();
        assert_eq!(sig.ground_types(), &["int", "bool"]);
        assert_eq!(sig.ctors().len(), 2);
    }

    #[test]
    fn stream_is_not_pervasive() {
        let err =
            Signature::validate(&[decl("stream", &[("SCons", &["int", "stream"])])]).unwrap_err();
        assert_eq!(
            err,
            SignatureError::NonPervasive(vec!["stream".to_string()])
        );
    }

    /// Independent oracle for the pervasiveness check: enumerate every
    /// subset of the ground types, keep the closed ones, and compare the
    /// least closed superset of the empty set with the closure fixpoint.
    fn closed_subsets(types: &[&str], ctors: &[(&str, Vec<&str>, &str)]) -> Vec<Vec<String>> {
        let n = types.len();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let set: HashSet<&str> = types
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, t)| *t)
                .collect();
            let closed = ctors.iter().all(|(_, args, result)| {
                !(args.iter().all(|a| set.contains(a)) && !set.contains(result))
            });
            if closed {
                let mut v: Vec<String> = set.iter().map(|s| s.to_string()).collect();
                v.sort();
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn closure_matches_brute_force_enumeration() {
        // stream example: int/bool forced by nullary constructors, stream never reached
        let types = ["int", "bool", "stream"];
        let ctors: Vec<(&str, Vec<&str>, &str)> = vec![
            ("0", vec![], "int"),
            ("True", vec![], "bool"),
            ("False", vec![], "bool"),
            ("SCons", vec!["int", "stream"], "stream"),
        ];
        let closed = closed_subsets(&types, &ctors);
        let least = closed.iter().min_by_key(|s| s.len()).unwrap().clone();
        assert_eq!(least, vec!["bool".to_string(), "int".to_string()]);

        let sig_attempt = Signature::validate(&[decl("stream", &[("SCons", &["int", "stream"])])]);
        assert!(matches!(sig_attempt, Err(SignatureError::NonPervasive(_))));

        // and the pervasive example: the only closed subset is everything
        let types = ["int", "bool", "nat", "pair", "list"];
        let ctors: Vec<(&str, Vec<&str>, &str)> = vec![
            ("0", vec![], "int"),
            ("True", vec![], "bool"),
            ("False", vec![], "bool"),
            ("Zero", vec![], "nat"),
            ("Succ", vec!["nat"], "nat"),
            ("Pair", vec!["int", "int"], "pair"),
            ("Nil", vec![], "list"),
            ("Cons", vec!["int", "list"], "list"),
        ];
        let closed = closed_subsets(&types, &ctors);
        let least = closed.iter().min_by_key(|s| s.len()).unwrap().clone();
        assert_eq!(least.len(), 5);
    }

    #[test]
    fn mutually_recursive_declarations_accepted_in_any_order() {
        let decls = vec![
            decl(
                "even_tree",
                &[("ELeaf", &[]), ("ENode", &["odd_tree", "odd_tree"])],
            ),
            decl("odd_tree", &[("ONode", &["even_tree"])]),
        ];
        let sig = Signature::validate(&decls).unwrap();
        assert!(sig.has_type("even_tree") && sig.has_type("odd_tree"));
        let mut reversed = decls;
        reversed.reverse();
        assert!(Signature::validate(&reversed).is_ok());
    }

    #[test]
    fn rerunning_closure_reaches_all_types() {
        let sig = Signature::validate(&example_decls()).unwrap();
        let reached = sig.closure_from_empty();
        for t in sig.ground_types() {
            assert!(reached.contains(t.as_str()));
        }
    }

    #[test]
    fn case_eligible_excludes_int() {
        let sig = Signature::validate(&example_decls()).unwrap();
        assert_eq!(
            sig.case_eligible_types(),
            vec!["bool", "nat", "pair", "list"]
        );

        let sig = Signature::validate(&[]).unwrap();
        assert_eq!(sig.case_eligible_types(), vec!["bool"]);

        let sig = Signature::validate(&[decl("unit", &[("U", &[])])]).unwrap();
        assert_eq!(sig.case_eligible_types(), vec!["bool", "unit"]);
    }

    #[test]
    fn duplicate_and_unknown_declarations_rejected() {
        let err = Signature::validate(&[decl("bool", &[("T", &[])])]).unwrap_err();
        assert_eq!(err, SignatureError::DuplicateType("bool".to_string()));

        let err =
            Signature::validate(&[decl("a", &[("A", &[])]), decl("b", &[("A", &[])])]).unwrap_err();
        assert_eq!(err, SignatureError::DuplicateConstructor("A".to_string()));

        let err = Signature::validate(&[decl("a", &[("A", &["missing"])])]).unwrap_err();
        assert_eq!(
            err,
            SignatureError::UnknownType {
                ctor: "A".to_string(),
                ty: "missing".to_string()
            }
        );

        let err = Signature::validate(&[decl("a", &[("True", &[])])]).unwrap_err();
        assert_eq!(
            err,
            SignatureError::DuplicateConstructor("True".to_string())
        );
    }

    #[test]
    fn constructor_lookup_is_a_bijection() {
        let sig = Signature::validate(&example_decls()).unwrap();
        let mut seen = HashSet::new();
        for c in sig.ctors() {
            assert!(seen.insert(c.name.clone()));
            assert_eq!(sig.ctor(&c.name).unwrap(), c);
        }
        assert!(sig.ctor("Bogus").is_none());
    }

    #[test]
    fn type_display_round_trips_shape() {
        let t = Type::func(
            vec![Type::func(vec![Type::int()], "int"), Type::int()],
            "list",
        );
        assert_eq!(t.to_string(), "(int -> int) int -> list");
        assert_eq!(Type::ground("list").to_string(), "list");
    }
}
