//! Seeded random generation of well-typed terms and of terminating
//! programs, used by the differential harness and the property suites.
//!
//! Generated programs have an acyclic call graph (a definition only calls
//! earlier names), so every reduction terminates and cross-semantics runs
//! can be compared value for value.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::equations::{parse_program, EquationSystem};
use crate::signature::{Signature, Type};
use crate::term::{Term, TypeEnv};

pub struct TermGen<'a> {
    sig: &'a Signature,
    env: &'a TypeEnv,
    names: Vec<(String, Type)>,
    ranks: HashMap<String, usize>,
    rng: StdRng,
}

/// Least constructor nesting needed to build a ground term of each type,
/// computed along the pervasiveness closure.
fn type_ranks(sig: &Signature) -> HashMap<String, usize> {
    let mut ranks: HashMap<String, usize> = HashMap::new();
    ranks.insert("int".to_string(), 0);
    loop {
        let mut changed = false;
        for c in sig.ctors() {
            let arg_rank = c
                .arg_types
                .iter()
                .map(|a| ranks.get(a).copied())
                .try_fold(0usize, |acc, r| r.map(|r| acc.max(r)));
            if let Some(arg_rank) = arg_rank {
                let mine = 1 + arg_rank;
                let entry = ranks.entry(c.result_type.clone()).or_insert(usize::MAX);
                if mine < *entry {
                    *entry = mine;
                    changed = true;
                }
            }
        }
        if !changed {
            return ranks;
        }
    }
}

impl<'a> TermGen<'a> {
    pub fn new(sig: &'a Signature, env: &'a TypeEnv, names: &[(String, Type)], seed: u64) -> Self {
        TermGen {
            sig,
            env,
            names: names.to_vec(),
            ranks: type_ranks(sig),
            rng: StdRng::seed_from_u64(seed),
        }
    }

    fn rank(&self, ty: &str) -> usize {
        self.ranks.get(ty).copied().unwrap_or(usize::MAX)
    }

    /// A minimal ground term of the type, built along the pervasiveness
    /// closure so it always exists.
    pub fn min_ground(&mut self, ty: &str) -> Term {
        if ty == "int" {
            return Term::int(self.rng.random_range(-3..10));
        }
        let c = self
            .sig
            .ctors_of(ty)
            .into_iter()
            .min_by_key(|c| c.arg_types.iter().map(|a| self.rank(a)).max().unwrap_or(0))
            .expect("pervasive signatures have a constructor per type")
            .clone();
        let args = c.arg_types.iter().map(|a| self.min_ground(a)).collect();
        Term::ctor(c.name, args)
    }

    /// A random ground term (constructors and literals only).
    pub fn ground_term(&mut self, ty: &str, depth: usize) -> Term {
        if ty == "int" {
            return Term::int(self.rng.random_range(-9..100));
        }
        if depth == 0 {
            return self.min_ground(ty);
        }
        let ctors = self.sig.ctors_of(ty);
        let c = ctors[self.rng.random_range(0..ctors.len())].clone();
        let args = c
            .arg_types
            .iter()
            .map(|a| self.ground_term(a, depth - 1))
            .collect();
        Term::ctor(c.name, args)
    }

    /// Names in scope whose type ends in the wanted functional suffix: the
    /// head can be partially applied over the leading arguments to leave
    /// exactly `want` behind.
    fn functional_candidates(&self, want: &[Type], result: &str) -> Vec<(String, Vec<Type>)> {
        let mut out = Vec::new();
        for (name, ty) in &self.names {
            let Type::Fn(f) = ty else { continue };
            if f.result != result || f.args.len() < want.len() {
                continue;
            }
            let split = f.args.len() - want.len();
            if &f.args[split..] == want {
                out.push((name.clone(), f.args[..split].to_vec()));
            }
        }
        out
    }

    /// A random term of the given functional type: a name applied to an
    /// initial segment of its arguments.
    pub fn functional_term(&mut self, want: &[Type], result: &str, depth: usize) -> Option<Term> {
        let candidates = self.functional_candidates(want, result);
        if candidates.is_empty() {
            return None;
        }
        let (name, leading) = candidates[self.rng.random_range(0..candidates.len())].clone();
        let mut args = Vec::new();
        for ty in &leading {
            args.push(self.term_of(ty, depth.saturating_sub(1))?);
        }
        Some(Term::app(name, args))
    }

    /// A random well-typed term of any type in the environment.
    pub fn term_of(&mut self, ty: &Type, depth: usize) -> Option<Term> {
        match ty {
            Type::Fn(f) => self.functional_term(&f.args, &f.result, depth),
            Type::Ground(b) => Some(self.ground_typed_term(b, depth)),
        }
    }

    /// A random well-typed ground-typed term mixing constructors, name
    /// applications and case expressions.
    pub fn ground_typed_term(&mut self, ty: &str, depth: usize) -> Term {
        if depth == 0 {
            return self.ground_term(ty, 0);
        }
        match self.rng.random_range(0..10u32) {
            // plain data
            0..=3 => self.ground_term(ty, depth),
            // full application of some name with this result type, or a
            // bare ground-typed name
            4..=6 => {
                let mut pool = self.functional_candidates(&[], ty);
                for (name, t) in &self.names {
                    if *t == Type::ground(ty) {
                        pool.push((name.clone(), vec![]));
                    }
                }
                match pool {
                    c if c.is_empty() => self.ground_term(ty, depth),
                    candidates => {
                        let (name, leading) =
                            candidates[self.rng.random_range(0..candidates.len())].clone();
                        let mut args = Vec::new();
                        for t in &leading {
                            match self.term_of(t, depth - 1) {
                                Some(a) => args.push(a),
                                None => return self.ground_term(ty, depth),
                            }
                        }
                        Term::app(name, args)
                    }
                }
            }
            // constructor with generated arguments
            7..=8 => {
                if ty == "int" {
                    return self.ground_term(ty, depth);
                }
                let ctors = self.sig.ctors_of(ty);
                let c = ctors[self.rng.random_range(0..ctors.len())].clone();
                let args = c
                    .arg_types
                    .iter()
                    .map(|a| self.ground_typed_term(a, depth - 1))
                    .collect();
                Term::ctor(c.name, args)
            }
            // case expression over a random eligible scrutinee type
            _ => {
                let eligible: Vec<String> = self
                    .sig
                    .case_eligible_types()
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
                let theta = eligible[self.rng.random_range(0..eligible.len())].clone();
                let scrutinee = self.ground_typed_term(&theta, depth - 1);
                let mut branches = Vec::new();
                for c in self.sig.ctors_of(&theta) {
                    let branch = if c.arity() == 0 {
                        self.ground_typed_term(ty, depth - 1)
                    } else {
                        let want: Vec<Type> = c
                            .arg_types
                            .iter()
                            .map(|a| Type::ground(a.clone()))
                            .collect();
                        match self.functional_term(&want, ty, depth - 1) {
                            Some(t) => t,
                            None => return self.ground_term(ty, depth),
                        }
                    };
                    branches.push((c.name.clone(), branch));
                }
                Term::case_of(scrutinee, branches)
            }
        }
    }

    pub fn env(&self) -> &TypeEnv {
        self.env
    }
}

/// A generated program plus a closed start term for it.
pub struct GeneratedCase {
    pub source: String,
    pub sig: Signature,
    pub system: EquationSystem,
    pub start: Term,
}

/// Generate a random terminating program over int/bool/list: each body may
/// call primitives and strictly earlier names only, so there is no
/// recursion anywhere.
pub fn random_acyclic_case(seed: u64) -> GeneratedCase {
    let mut rng = StdRng::seed_from_u64(seed);
    let base = "data list = Nil | Cons int list ;\n";
    let (base_sig, _) = parse_program(&format!("{base}sig d0 : int ;\ndef d0 = 0 ;\n")).unwrap();

    let ground_pool = ["int", "list", "bool"];
    let n_defs = rng.random_range(2..6usize);
    let mut source = String::from(base);
    let mut names: Vec<(String, Type)> = Vec::new();
    let mut env = TypeEnv::primitives();

    for i in 0..n_defs {
        let name = format!("g{i}");
        let n_params = rng.random_range(0..3usize);
        let param_tys: Vec<Type> = (0..n_params)
            .map(|_| Type::ground(ground_pool[rng.random_range(0..2)]))
            .collect();
        let result = ground_pool[rng.random_range(0..ground_pool.len())];
        let ty = if param_tys.is_empty() {
            Type::ground(result)
        } else {
            Type::func(param_tys.clone(), result)
        };

        let params: Vec<(String, Type)> = param_tys
            .iter()
            .enumerate()
            .map(|(j, t)| (format!("p{j}"), t.clone()))
            .collect();
        let body_env = env.extended(&params);
        let mut scope = names.clone();
        scope.extend(params.clone());
        let body_seed = rng.random_range(0..u64::MAX);
        let mut tg = TermGen::new(&base_sig, &body_env, &scope, body_seed);
        let body = tg.ground_typed_term(result, 2);

        source.push_str(&format!("sig {name} : {ty} ;\n"));
        source.push_str(&format!(
            "def {name} {} = {} ;\n",
            params
                .iter()
                .map(|(p, _)| p.as_str())
                .collect::<Vec<_>>()
                .join(" "),
            body
        ));
        env.bind(name.clone(), ty.clone());
        names.push((name, ty));
    }

    let (sig, system) = parse_program(&source)
        .unwrap_or_else(|e| panic!("generated program failed to validate: {e}\n{source}"));
    let genv = system.global_env();
    let start_ty = ground_pool[rng.random_range(0..ground_pool.len())];
    let start_seed = rng.random_range(0..u64::MAX);
    let mut tg = TermGen::new(&sig, &genv, &names, start_seed);
    let start = tg.ground_typed_term(start_ty, 3);
    GeneratedCase {
        source,
        sig,
        system,
        start,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::infer_type;

    #[test]
    fn generated_cases_are_well_typed() {
        for seed in 0..50 {
            let case = random_acyclic_case(seed);
            let env = case.system.global_env();
            infer_type(&case.start, &env, &case.sig)
                .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", case.source));
        }
    }
}
