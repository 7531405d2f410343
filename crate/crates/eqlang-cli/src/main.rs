//! Command-line front end: load a program, evaluate terms under a chosen
//! semantics, query support membership, run cross-semantics differential
//! checks and verify proof scripts.
//!
//! Exit codes: 0 value/verified/agreement, 1 stuck or proof failure,
//! 2 out of fuel, 3 validation or parse error, 4 usage error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eqlang::{
    builtin_core, check_script, differential, in_support, parse_core_file, parse_program,
    parse_term, print_term, reduce, support_flag, CoreMode, CoreType, EquationSystem, Outcome,
    ReduceConfig, Signature, Term, Type, TypeEnv, DEFAULT_FUEL,
};

#[derive(Parser)]
#[command(
    name = "eqlang",
    version,
    about = "Equational functional-language interpreter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a program and print its typed symbol table
    Check {
        /// Program file (.eq)
        program: PathBuf,
    },
    /// Evaluate a term by iterating the one-step reduction
    Eval {
        program: PathBuf,
        #[command(flatten)]
        term: TermArg,
        #[command(flatten)]
        sem: SemanticsArg,
        /// Step budget before giving up
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Print every iterate, one line per step
        #[arg(long)]
        trace: bool,
        /// Truncate trace output after this many lines
        #[arg(long)]
        max_trace: Option<usize>,
        /// Report cycles longer than one step as stuck
        #[arg(long)]
        detect_cycles: bool,
    },
    /// Report whether a term is in the support system of the semantics
    Support {
        program: PathBuf,
        #[command(flatten)]
        term: TermArg,
        #[command(flatten)]
        sem: SemanticsArg,
    },
    /// Evaluate under several semantics and compare the values reached
    Diff {
        program: PathBuf,
        #[command(flatten)]
        term: TermArg,
        /// Comma-separated list of semantics to compare
        #[arg(long, default_value = "eager,lazy")]
        semantics: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Check an equational proof script against the program
    Prove {
        program: PathBuf,
        /// Proof script (.eqp)
        script: PathBuf,
        #[command(flatten)]
        sem: SemanticsArg,
    },
}

#[derive(Args)]
struct TermArg {
    /// The term to operate on, in concrete syntax
    #[arg(long)]
    term: String,
}

#[derive(Args)]
struct SemanticsArg {
    /// `eager`, `lazy`, `miranda`, or `@file` for a custom core
    #[arg(long, default_value = "lazy")]
    semantics: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_program(path: &PathBuf) -> Result<(Signature, EquationSystem), String> {
    let src =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_program(&src).map_err(|e| e.to_string())
}

fn load_core(selector: &str, sig: &Signature) -> Result<CoreType, String> {
    match selector {
        "eager" => Ok(builtin_core(CoreMode::Eager, sig)),
        "lazy" => Ok(builtin_core(CoreMode::Lazy, sig)),
        "miranda" => Ok(builtin_core(CoreMode::Miranda, sig)),
        other => match other.strip_prefix('@') {
            Some(path) => {
                let src =
                    fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
                parse_core_file(&src, sig).map_err(|e| e.to_string())
            }
            None => Err(format!(
                "unknown semantics `{other}` (expected eager, lazy, miranda or @file)"
            )),
        },
    }
}

fn load_term(text: &str, env: &TypeEnv, sig: &Signature) -> Result<(Term, Type), String> {
    let term = parse_term(text, env, sig).map_err(|e| e.to_string())?;
    let ty = eqlang::infer_type(&term, env, sig).map_err(|e| e.to_string())?;
    if ty.as_ground().is_none() {
        return Err(format!(
            "term has functional type {ty}; only ground-typed terms reduce"
        ));
    }
    Ok((term, ty))
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Check { program } => {
            let (sig, system) = load_program(&program)?;
            for ty in sig.ground_types() {
                if ty == "int" {
                    println!("data int = <integer literals>");
                    continue;
                }
                let ctors: Vec<String> = sig
                    .ctors_of(ty)
                    .iter()
                    .map(|c| {
                        if c.arg_types.is_empty() {
                            c.name.clone()
                        } else {
                            format!("{} {}", c.name, c.arg_types.join(" "))
                        }
                    })
                    .collect();
                println!("data {ty} = {}", ctors.join(" | "));
            }
            for def in system.defs() {
                println!("sig {} : {}", def.name, def.declared_type);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            program,
            term,
            sem,
            fuel,
            trace,
            max_trace,
            detect_cycles,
        } => {
            let (sig, system) = load_program(&program)?;
            let core = load_core(&sem.semantics, &sig)?;
            let env = system.global_env();
            let (t, _) = load_term(&term.term, &env, &sig)?;
            let mut config = ReduceConfig::new(core).with_fuel(fuel.max(1));
            if trace {
                config = config.with_trace();
            }
            if detect_cycles {
                config = config.with_cycle_detection();
            }
            let r = reduce(&t, &system, &config);
            if let Some(iterates) = &r.trace {
                let limit = max_trace.unwrap_or(iterates.len());
                for (i, it) in iterates.iter().take(limit).enumerate() {
                    println!("{i}: {}", print_term(it));
                }
                if limit < iterates.len() {
                    println!("... ({} more iterates)", iterates.len() - limit);
                }
            }
            match r.outcome {
                Outcome::Value { result, steps } => {
                    if !trace {
                        println!("value: {}", print_term(&result));
                        println!("steps: {steps}");
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Outcome::Stuck { term, steps } => {
                    if !trace {
                        println!("stuck: {}", print_term(&term));
                        println!("steps: {steps}");
                    }
                    eprintln!("reduction reached a fixed point without a value");
                    Ok(ExitCode::from(1))
                }
                Outcome::OutOfFuel { last, fuel } => {
                    if !trace {
                        println!("out of fuel: {}", print_term(&last));
                        println!("steps: {fuel}");
                    }
                    eprintln!("no value after {fuel} steps");
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Support { program, term, sem } => {
            let (sig, system) = load_program(&program)?;
            let core = load_core(&sem.semantics, &sig)?;
            let env = system.global_env();
            let (t, _) = load_term(&term.term, &env, &sig)?;
            let flag = support_flag(&t, &core);
            let verdict = if in_support(&t, &core) {
                "in support"
            } else {
                "not in support"
            };
            println!("{flag} / {verdict}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Diff {
            program,
            term,
            semantics,
            fuel,
        } => {
            let (sig, system) = load_program(&program)?;
            let mut cores = Vec::new();
            for name in semantics
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
            {
                cores.push((name.to_string(), load_core(name, &sig)?));
            }
            if cores.len() < 2 {
                return Err("diff needs at least two semantics".to_string());
            }
            let env = system.global_env();
            let (t, _) = load_term(&term.term, &env, &sig)?;
            let report = differential(&t, &system, &cores, fuel.max(1));
            for (name, outcome) in &report.outcomes {
                match outcome {
                    Outcome::Value { result, steps } => {
                        println!("{name}: value {} [steps {steps}]", print_term(result))
                    }
                    Outcome::Stuck { term, steps } => {
                        println!("{name}: stuck {} [steps {steps}]", print_term(term))
                    }
                    Outcome::OutOfFuel { fuel, .. } => {
                        println!("{name}: out of fuel after {fuel} steps")
                    }
                }
            }
            if report.agreed() {
                println!("agreement: ok");
                Ok(ExitCode::SUCCESS)
            } else {
                for (i, j) in &report.violations {
                    println!(
                        "agreement: VIOLATION between {} and {}",
                        report.outcomes[*i].0, report.outcomes[*j].0
                    );
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Prove {
            program,
            script,
            sem,
        } => {
            let (sig, system) = load_program(&program)?;
            let core = load_core(&sem.semantics, &sig)?;
            let src = fs::read_to_string(&script)
                .map_err(|e| format!("cannot read {}: {e}", script.display()))?;
            match check_script(&src, &system, &sig, &core) {
                Ok(report) => {
                    println!("verified: {} steps", report.steps_verified);
                    for (lhs, rhs) in &report.conclusions {
                        println!("conclusion: {} == {}", print_term(lhs), print_term(rhs));
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(eqlang::ScriptError::Parse(e)) => Err(e.to_string()),
                Err(e) => {
                    println!("failed: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}
