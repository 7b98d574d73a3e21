use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use eitt::assignment::{Basis, Inference};
use eitt::easiness::{dd_scheme, run_construction, separator, FilterScheme, PointedTheory};
use eitt::filter::{model_laws_suite, parse_env, Interpreter};
use eitt::jtheory::{join_type_predicate, verify_j, RunConfig};
use eitt::lambda::{parse_term, Term};
use eitt::sampling;
use eitt::types::{subterm_closure, DEFAULT_UNIVERSE_CAP};
use eitt::{parse_theory, parse_theory_unchecked, parse_type, Theory, Type, TypeUniverse};

/// Workbench for easy intersection type theories and their filter models.
#[derive(Parser)]
#[command(name = "eitt", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Theory file operations.
    Theory {
        #[command(subcommand)]
        cmd: TheoryCmd,
    },
    /// Decide `A <= B`.
    Sub {
        file: PathBuf,
        lhs: String,
        rhs: String,
    },
    /// Decide whether a closed term receives a type.
    Typecheck {
        file: PathBuf,
        term: String,
        ty: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        width: usize,
        /// Print a checked derivation when one is found.
        #[arg(long)]
        cert: bool,
    },
    /// Interpret a term in the filter model.
    Interp {
        file: PathBuf,
        term: String,
        /// Bindings `x=A, y=B`.
        #[arg(long, default_value = "")]
        env: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        width: usize,
    },
    /// Extend a theory by the easiness scheme at point Z.
    Extend {
        file: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the stagewise construction up to the given stage.
    Construct {
        #[arg(long)]
        stages: usize,
        #[arg(long, value_enum, default_value_t = Pred::Join)]
        predicate: Pred,
        #[arg(long, default_value_t = 1)]
        width: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the join equations at the final stage.
    VerifyJ {
        #[arg(long, default_value_t = 4)]
        stages: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        width: usize,
    },
    /// Check the λ-model laws on random samples.
    Laws {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
    },
}

#[derive(Subcommand)]
enum TheoryCmd {
    /// Validate a theory file.
    Check { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Pred {
    Join,
}

fn load(path: &Path) -> Result<Theory> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_theory(&text)?)
}

fn universe(th: &Theory, extra: &[Type], width: usize) -> Result<TypeUniverse> {
    let mut seed = th.axiom_types();
    seed.extend(extra.iter().cloned());
    if th.owns(&separator()) {
        seed.push(separator());
    }
    Ok(subterm_closure(&seed, width, DEFAULT_UNIVERSE_CAP)?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Theory {
            cmd: TheoryCmd::Check { file },
        } => {
            let text =
                fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let report = parse_theory_unchecked(&text)?.validate();
            print!("{report}");
            if !report.to_string().ends_with('\n') {
                println!();
            }
            Ok(report.is_pass())
        }
        Cmd::Sub { file, lhs, rhs } => {
            let th = load(&file)?;
            let a = parse_type(&lhs, th.constants())?;
            let b = parse_type(&rhs, th.constants())?;
            let v = th.subtype(&a, &b)?;
            println!("{}", if v { "TRUE" } else { "FALSE" });
            Ok(v)
        }
        Cmd::Typecheck {
            file,
            term,
            ty,
            depth,
            width,
            cert,
        } => {
            let th = load(&file)?;
            let t = parse_term(&term)?;
            let a = parse_type(&ty, th.constants())?;
            let u = universe(&th, std::slice::from_ref(&a), width)?;
            let mut eng = Inference::new(&th, &u)?;
            let basis = Basis::new();
            match eng.certify(&basis, &t, &a, depth)? {
                Some(d) => {
                    eitt::assignment::verify_derivation(&th, &d)?;
                    println!("DERIVABLE");
                    if cert {
                        print!("{d}");
                    }
                    Ok(true)
                }
                None => {
                    println!("NOT DERIVABLE");
                    Ok(false)
                }
            }
        }
        Cmd::Interp {
            file,
            term,
            env,
            depth,
            width,
        } => {
            let th = Arc::new(load(&file)?);
            let t = parse_term(&term)?;
            let env = parse_env(&env, &th)?;
            let gens: Vec<Type> = env.vars().map(|x| env.get(x).generator().clone()).collect();
            let u = universe(&th, &gens, width)?;
            let f = Interpreter::new(&th, &u)?.interp(&t, &env, depth)?;
            println!("{f}");
            Ok(true)
        }
        Cmd::Extend { file, point, out } => {
            let th = load(&file)?;
            let z = parse_type(&point, th.constants())?;
            let ext = dd_scheme(&PointedTheory::new(th, z)?)?;
            match out {
                Some(p) => fs::write(&p, ext.to_string())
                    .with_context(|| format!("writing {}", p.display()))?,
                None => print!("{ext}"),
            }
            Ok(true)
        }
        Cmd::Construct {
            stages,
            predicate: Pred::Join,
            width,
            out,
        } => {
            let plan = run_construction(
                &Term::omega(),
                &FilterScheme::omega_scheme(),
                &join_type_predicate(),
                stages + 1,
                width,
            )?;
            print!("{}", plan.manifest());
            if let Some(dir) = out {
                plan.write_to(&dir)
                    .with_context(|| format!("writing {}", dir.display()))?;
            }
            Ok(true)
        }
        Cmd::VerifyJ {
            stages,
            samples,
            seed,
            depth,
            width,
        } => {
            let cfg = RunConfig {
                stages,
                samples,
                seed,
                depth,
                width_bound: width,
                ..RunConfig::default()
            };
            let report = verify_j(&cfg)?;
            print!("{report}");
            Ok(report.consistent())
        }
        Cmd::Laws {
            file,
            samples,
            seed,
            max_size,
        } => {
            let th = Arc::new(load(&file)?);
            let u = universe(&th, &[], 1)?;
            let mut rng = sampling::rng(seed);
            let mut pairs = Vec::new();
            let mut depth = 1;
            for _ in 0..samples {
                let t = sampling::random_term(&mut rng, &["x", "y"], max_size);
                let env = sampling::random_env(&mut rng, &th, &["x", "y"], &u)?;
                depth = depth.max(t.abs_depth() + 2);
                pairs.push((t, env));
            }
            let report = model_laws_suite(&th, &pairs, &u, depth)?;
            print!("{report}");
            Ok(report.all_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
