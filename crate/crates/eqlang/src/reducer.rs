//! The one-step parallel reduction defined by an equation system and a
//! support system, its iteration with divergence detection, and the
//! cross-semantics differential checker.
//!
//! One step rewrites every redex at once: full applications of equation
//! names unfold to their instantiated bodies, a case fires when its
//! scrutinee is in the support system and otherwise steps its scrutinee,
//! integer operators evaluate once both operands are literals, and
//! constructors step their arguments. Ground terms are fixed points.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use thiserror::Error;

use crate::coretype::{in_support, CoreType};
use crate::equations::{instantiate, EquationSystem};
use crate::term::{apply_flatten, is_int_op, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("integer operator `{0}` applied to a non-ground operand")]
    NotGroundOperand(String),
    #[error("unknown integer operator `{0}`")]
    UnknownOperator(String),
}

/// Evaluate a primitive integer operator on two literals. Arithmetic is
/// exact over the unbounded integers.
pub fn eval_intop(op: &str, lhs: &Term, rhs: &Term) -> Result<Term, ReduceError> {
    let (Some(a), Some(b)) = (lhs.as_int(), rhs.as_int()) else {
        return Err(ReduceError::NotGroundOperand(op.to_string()));
    };
    Ok(match op {
        "add" => Term::Int(a + b),
        "sub" => Term::Int(a - b),
        "mul" => Term::Int(a * b),
        "eq" => Term::truth(a == b),
        "neq" => Term::truth(a != b),
        "le" => Term::truth(a <= b),
        "ge" => Term::truth(a >= b),
        other => return Err(ReduceError::UnknownOperator(other.to_string())),
    })
}

/// One application of the reduction homomorphism to a closed ground-typed
/// term.
pub fn phi_step(t: &Term, system: &EquationSystem, core: &CoreType) -> Term {
    match t {
        Term::Int(_) => t.clone(),
        Term::Ctor(name, args) => Term::Ctor(
            name.clone(),
            args.iter().map(|a| phi_step(a, system, core)).collect(),
        ),
        Term::App(head, args) => {
            if let Some(def) = system.get(head) {
                // full application of an equation name: unfold unconditionally
                instantiate(def, args).expect("validated body instantiation cannot fail")
            } else if is_int_op(head) {
                let [lhs, rhs] = args.as_slice() else {
                    unreachable!("integer operators are binary for well-typed terms")
                };
                if lhs.is_ground() && rhs.is_ground() {
                    eval_intop(head, lhs, rhs).expect("ground int operands")
                } else {
                    Term::App(
                        head.clone(),
                        vec![phi_step(lhs, system, core), phi_step(rhs, system, core)],
                    )
                }
            } else {
                unreachable!("closed terms have no free locals")
            }
        }
        Term::Case(scrutinee, branches) => {
            if in_support(scrutinee, core) {
                let Term::Ctor(ctor, ctor_args) = &**scrutinee else {
                    unreachable!("support membership implies a constructor root")
                };
                let (_, branch) = branches
                    .iter()
                    .find(|(c, _)| c == ctor)
                    .expect("well-typed cases cover every constructor");
                apply_flatten(branch, ctor_args).expect("branch types match constructor arity")
            } else {
                Term::Case(
                    Box::new(phi_step(scrutinee, system, core)),
                    branches.clone(),
                )
            }
        }
    }
}

/// Result of iterating the one-step reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Reached a ground term; `steps` is the least n with the n-th iterate
    /// ground.
    Value { result: Term, steps: usize },
    /// Reached a non-ground term equal to its own successor (or, with
    /// cycle detection enabled, the entry of a longer cycle).
    Stuck { term: Term, steps: usize },
    /// Still non-ground after `fuel` steps.
    OutOfFuel { last: Term, fuel: usize },
}

impl Outcome {
    pub fn value(&self) -> Option<&Term> {
        match self {
            Outcome::Value { result, .. } => Some(result),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReduceConfig {
    pub core: CoreType,
    pub fuel: usize,
    pub record_trace: bool,
    pub detect_cycles: bool,
}

pub const DEFAULT_FUEL: usize = 100_000;

impl ReduceConfig {
    pub fn new(core: CoreType) -> ReduceConfig {
        ReduceConfig {
            core,
            fuel: DEFAULT_FUEL,
            record_trace: false,
            detect_cycles: false,
        }
    }

    pub fn with_fuel(mut self, fuel: usize) -> ReduceConfig {
        assert!(fuel >= 1);
        self.fuel = fuel;
        self
    }

    pub fn with_trace(mut self) -> ReduceConfig {
        self.record_trace = true;
        self
    }

    pub fn with_cycle_detection(mut self) -> ReduceConfig {
        self.detect_cycles = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub outcome: Outcome,
    /// Iterates 0..=last when tracing was requested.
    pub trace: Option<Vec<Term>>,
}

// Bound on the window of remembered iterates under --detect-cycles.
const CYCLE_WINDOW: usize = 4096;

/// Iterate the one-step reduction until a ground term, a fixed point or
/// fuel exhaustion.
pub fn reduce(t: &Term, system: &EquationSystem, config: &ReduceConfig) -> Reduction {
    let mut cur = t.clone();
    let mut trace = config.record_trace.then(|| vec![cur.clone()]);
    let mut seen: HashMap<Term, usize> = HashMap::new();
    let mut seen_order: VecDeque<Term> = VecDeque::new();
    let mut steps = 0usize;
    loop {
        if cur.is_ground() {
            return Reduction {
                outcome: Outcome::Value { result: cur, steps },
                trace,
            };
        }
        if steps == config.fuel {
            return Reduction {
                outcome: Outcome::OutOfFuel {
                    last: cur,
                    fuel: steps,
                },
                trace,
            };
        }
        if config.detect_cycles {
            if seen_order.len() == CYCLE_WINDOW {
                if let Some(evicted) = seen_order.pop_front() {
                    seen.remove(&evicted);
                }
            }
            seen.insert(cur.clone(), steps);
            seen_order.push_back(cur.clone());
        }
        let next = phi_step(&cur, system, &config.core);
        if next == cur {
            return Reduction {
                outcome: Outcome::Stuck { term: cur, steps },
                trace,
            };
        }
        if config.detect_cycles {
            if let Some(&entry) = seen.get(&next) {
                return Reduction {
                    outcome: Outcome::Stuck {
                        term: next,
                        steps: entry,
                    },
                    trace,
                };
            }
        }
        steps += 1;
        if let Some(tr) = trace.as_mut() {
            tr.push(next.clone());
        }
        cur = next;
    }
}

/// Per-core outcomes for one term, with the agreement verdict: a
/// violation is two cores that both reach a value and disagree on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffReport {
    pub outcomes: Vec<(String, Outcome)>,
    pub violations: Vec<(usize, usize)>,
}

impl DiffReport {
    pub fn agreed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn differential(
    t: &Term,
    system: &EquationSystem,
    cores: &[(String, CoreType)],
    fuel: usize,
) -> DiffReport {
    assert!(cores.len() >= 2, "differential needs at least two cores");
    let outcomes: Vec<(String, Outcome)> = cores
        .iter()
        .map(|(name, core)| {
            let config = ReduceConfig::new(core.clone()).with_fuel(fuel);
            (name.clone(), reduce(t, system, &config).outcome)
        })
        .collect();
    let mut violations = Vec::new();
    for i in 0..outcomes.len() {
        for j in i + 1..outcomes.len() {
            if let (Some(a), Some(b)) = (outcomes[i].1.value(), outcomes[j].1.value()) {
                if a != b {
                    violations.push((i, j));
                }
            }
        }
    }
    DiffReport {
        outcomes,
        violations,
    }
}

/// Convenience for tests and the CLI: literal integers.
pub fn int_term(n: impl Into<BigInt>) -> Term {
    Term::Int(n.into())
}
