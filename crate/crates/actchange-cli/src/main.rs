//! Command-line front end.
//!
//! Exit status: 0 on success (or a positive answer for `modular`, `entail`
//! and `postulates`), 1 for a negative answer or an impossible change, 2 for
//! usage and parse errors, 3 when a size cap is exceeded and 4 when the
//! input must be modular and is not.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use actchange::contract_sem::contract_model_set;
use actchange::contract_syn::contract;
use actchange::entail::{enumerate_models, is_modular, Entailer, NonModular, OracleCaps};
use actchange::kripke::{big_model, export_dot, export_dot_set, parse_models, render_model, render_model_set, Metric, ModelSet};
use actchange::postulates::{check_postulate, fuzz_postulates, FuzzConfig, Postulate};
use actchange::revise::revise_model_set;
use actchange::syntax::{parse_formula, parse_law, parse_theory, parse_theory_with_warnings, render_bool, render_law, render_theory, Law, Signature, Theory};
use actchange::Error;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "actchange", version, about = "Contraction and revision of action theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a theory file and summarize it.
    Validate { file: PathBuf },
    /// Enumerate every model of a theory (tiny signatures only).
    Models {
        file: PathBuf,
        /// Fail when more models than this exist.
        #[arg(long, default_value_t = 4096)]
        limit: usize,
        #[arg(long)]
        dot: bool,
    },
    /// Print the big model of a theory.
    BigModel {
        file: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Check modularity and report implicit static laws.
    Modular { file: PathBuf },
    /// Decide whether the theory entails a law or a formula of modal depth one.
    Entail {
        file: PathBuf,
        #[arg(long)]
        law: String,
        /// Refuse non-modular theories instead of using the exact oracle.
        #[arg(long)]
        require_modular: bool,
    },
    /// Contract a law, syntactically (default) or on models.
    Contract {
        file: PathBuf,
        #[arg(long)]
        law: String,
        /// Contract the model set instead of the theory.
        #[arg(long)]
        semantic: bool,
        /// With --semantic, read FILE as model text instead of taking the
        /// big model of a theory.
        #[arg(long)]
        models: bool,
        #[arg(long, value_enum, default_value_t = MetricArg::Inclusion)]
        metric: MetricArg,
        /// Run the algorithms on non-modular theories, deciding entailment
        /// with the oracle.
        #[arg(long)]
        allow_non_modular: bool,
        /// Write one numbered file per result into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Revise a model set by a law.
    Revise {
        file: PathBuf,
        #[arg(long)]
        law: String,
        /// Read FILE as model text instead of taking the big model of a theory.
        #[arg(long)]
        models: bool,
        #[arg(long, value_enum, default_value_t = MetricArg::Inclusion)]
        metric: MetricArg,
        #[arg(long)]
        dot: bool,
    },
    /// Check contraction postulates on a theory, or fuzz them.
    Postulates {
        /// Theory file; not needed with --fuzz.
        file: Option<PathBuf>,
        /// Law to contract; defaults to every law of the theory.
        #[arg(long)]
        law: Option<String>,
        /// Postulates to check (repeatable); defaults to all that need no
        /// second theory.
        #[arg(long = "postulate")]
        postulates: Vec<String>,
        /// Second theory for the disjunctive and equivalences postulates.
        #[arg(long)]
        other: Option<PathBuf>,
        /// Number of random theories to check.
        #[arg(long)]
        fuzz: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        atoms: usize,
        #[arg(long, default_value_t = 1)]
        actions: usize,
        /// Also check non-modular random theories.
        #[arg(long)]
        include_non_modular: bool,
    },
    /// Render model text as Graphviz.
    ExportDot { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Inclusion,
    Cardinality,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Inclusion => Metric::Inclusion,
            MetricArg::Cardinality => Metric::Cardinality,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
    /// The reader of standard output went away; not reported.
    ClosedOutput,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<actchange::ParseError> for Failure {
    fn from(e: actchange::ParseError) -> Self {
        Failure::Lib(Error::Parse(e))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::ClosedOutput;
        }
        Failure::Io(e.to_string())
    }
}

type Run = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_theory(path: &Path) -> Result<Theory, Failure> {
    Ok(parse_theory(&read(path)?)?)
}

fn load_law(text: &str, sig: &Signature) -> Result<Law, Failure> {
    let law = parse_law(text)?;
    sig.check_law(&law)?;
    Ok(law)
}

/// The starting model set: the models in a model file, or the big model of
/// a theory.
fn load_models(path: &Path, as_models: bool) -> Result<(Signature, ModelSet), Failure> {
    if as_models {
        let (sig, models) = parse_models(&read(path)?, None)?;
        return Ok((sig, models.into_iter().collect()));
    }
    let t = load_theory(path)?;
    let m = big_model(&t)?;
    Ok((t.signature().clone(), [m].into_iter().collect()))
}

fn write_results(out_dir: &Option<PathBuf>, ext: &str, items: &[String], out: &mut dyn Write) -> Result<(), Failure> {
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (i, text) in items.iter().enumerate() {
                let path = dir.join(format!("result-{}.{ext}", i + 1));
                fs::write(&path, text)?;
                writeln!(out, "{}", path.display())?;
            }
        }
        None => {
            for (i, text) in items.iter().enumerate() {
                writeln!(out, "=== result {}", i + 1)?;
                write!(out, "{text}")?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli, out: &mut dyn Write) -> Run {
    match cli.command {
        Command::Validate { file } => {
            let parsed = parse_theory_with_warnings(&read(&file)?)?;
            for w in &parsed.warnings {
                eprintln!("warning: {w}");
            }
            let t = &parsed.theory;
            let sig = t.signature();
            writeln!(out, "atoms: {}", sig.atoms().join(", "))?;
            writeln!(out, "actions: {}", sig.actions().join(", "))?;
            writeln!(out, "static laws: {}", t.statics().len())?;
            writeln!(out, "effect laws: {}", t.effects().len())?;
            writeln!(out, "executability laws: {}", t.execs().len())?;
            Ok(true)
        }
        Command::Models { file, limit, dot } => {
            let t = load_theory(&file)?;
            let models = enumerate_models(&t, limit)?;
            if dot {
                write!(out, "{}", export_dot_set(&models, t.signature()))?;
            } else {
                write!(out, "{}", render_model_set(&models, t.signature()))?;
            }
            Ok(true)
        }
        Command::BigModel { file, dot } => {
            let t = load_theory(&file)?;
            let m = big_model(&t)?;
            if dot {
                write!(out, "{}", export_dot(&m, t.signature()))?;
            } else {
                write!(out, "{}", render_model(&m, t.signature()))?;
            }
            Ok(true)
        }
        Command::Modular { file } => {
            let t = load_theory(&file)?;
            let report = is_modular(&t)?;
            if report.modular {
                writeln!(out, "modular")?;
                return Ok(true);
            }
            writeln!(out, "not modular")?;
            writeln!(out, "implicit static law: {}", render_bool(&report.summary))?;
            writeln!(out, "failing worlds:")?;
            for (w, x) in &report.failing_worlds {
                writeln!(out, "  {} violates {}", w.display(t.signature()), render_law(&Law::Exec(x.clone())))?;
            }
            Ok(false)
        }
        Command::Entail { file, law, require_modular } => {
            let t = load_theory(&file)?;
            let policy = if require_modular { NonModular::Reject } else { NonModular::Oracle };
            let ent = Entailer::new(&t, policy)?;
            let holds = match parse_law(&law) {
                Ok(l) => ent.entails(&l)?,
                Err(_) => ent.entails_formula(&parse_formula(&law)?, OracleCaps::default())?,
            };
            writeln!(out, "{holds}")?;
            Ok(holds)
        }
        Command::Contract { file, law, semantic, models, metric, allow_non_modular, out_dir } => {
            if semantic {
                let (sig, start) = load_models(&file, models)?;
                let law = load_law(&law, &sig)?;
                let results = contract_model_set(&start, &law, metric.into(), &sig)?;
                let items: Vec<String> = results.iter().map(|s| render_model_set(s, &sig)).collect();
                if items.is_empty() {
                    writeln!(io::stderr(), "no model can be contracted")?;
                }
                write_results(&out_dir, "models", &items, out)?;
                return Ok(true);
            }
            if models {
                return Err(Failure::Lib(Error::Argument("--models requires --semantic".into())));
            }
            let t = load_theory(&file)?;
            let law = load_law(&law, t.signature())?;
            let policy = if allow_non_modular { NonModular::Oracle } else { NonModular::Reject };
            let results = contract(&t, &law, policy)?;
            let items: Vec<String> = results.iter().map(render_theory).collect();
            write_results(&out_dir, "th", &items, out)?;
            Ok(true)
        }
        Command::Revise { file, law, models, metric, dot } => {
            let (sig, start) = load_models(&file, models)?;
            let law = load_law(&law, &sig)?;
            let result = revise_model_set(&start, &law, metric.into(), &sig)?;
            if dot {
                write!(out, "{}", export_dot_set(&result, &sig))?;
            } else {
                write!(out, "{}", render_model_set(&result, &sig))?;
            }
            Ok(true)
        }
        Command::Postulates { file, law, postulates, other, fuzz, seed, atoms, actions, include_non_modular } => {
            let mut chosen = Vec::new();
            for p in &postulates {
                chosen.push(p.parse::<Postulate>()?);
            }
            if let Some(count) = fuzz {
                let mut config = FuzzConfig { seed, count, atoms, actions, modular_only: !include_non_modular, ..FuzzConfig::default() };
                if !chosen.is_empty() {
                    config.postulates = chosen;
                }
                let summary = fuzz_postulates(&config)?;
                summary.write_json_lines(out)?;
                return Ok(summary.modular_failures().is_empty());
            }
            let file = file.ok_or_else(|| Error::Argument("a theory file is required without --fuzz".into()))?;
            let t = load_theory(&file)?;
            let other = other.as_deref().map(load_theory).transpose()?;
            if chosen.is_empty() {
                chosen = Postulate::ALL.into_iter().filter(|p| *p != Postulate::Disjunctive || other.is_some()).collect();
            }
            let laws = match law {
                Some(l) => vec![load_law(&l, t.signature())?],
                None => t.laws(),
            };
            let mut all_hold = true;
            for l in &laws {
                for p in &chosen {
                    let report = check_postulate(&t, l, *p, other.as_ref())?;
                    all_hold &= report.holds;
                    let line = serde_json::json!({ "law": render_law(l), "report": report });
                    writeln!(out, "{line}")?;
                }
            }
            Ok(all_hold)
        }
        Command::ExportDot { file } => {
            let (sig, models) = parse_models(&read(&file)?, None)?;
            if models.len() == 1 {
                write!(out, "{}", export_dot(&models[0], &sig))?;
            } else {
                write!(out, "{}", export_dot_set(&models, &sig))?;
            }
            Ok(true)
        }
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::ClosedOutput => 0,
        Failure::Io(_) => 2,
        Failure::Lib(Error::Parse(_) | Error::Argument(_)) => 2,
        Failure::Lib(Error::Resource(_)) => 3,
        Failure::Lib(Error::Precondition(_)) => 4,
        Failure::Lib(Error::Impossible(_)) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let _ = out.flush();
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
                Failure::ClosedOutput => {}
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
