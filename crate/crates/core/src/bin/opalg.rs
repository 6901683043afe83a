use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use opalg::envelope::TruncationBounds;
use opalg::lab::cases::{self, Construction};
use opalg::lab::schema::{self, AlgebraRef, Kinded};
use opalg::lab::{load_tasks, run_tasks, ReportFile, Task, TaskDoc, DEFAULT_YAU_BOUND};
use opalg::linalg::Ring;
use opalg::{Error, Result};

/// Enveloping operads, push-outs of operad algebras and their counterexamples.
#[derive(Parser, Debug)]
#[command(name = "opalg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Truncation bound: cell stages for push-outs, straight leaves for enveloping operads.
    #[arg(long, global = true)]
    bound: Option<usize>,
    /// Coefficient ring: ZZ, QQ or GF(p).
    #[arg(long, global = true)]
    ring: Option<String>,
    /// Write the JSON report here, and the text report next to it.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    /// Number of consecutive agreeing windows required for stabilization.
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Largest arity of enveloping operads.
    #[arg(long, global = true)]
    arity: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check one of the bundled counterexamples.
    Verify {
        #[arg(value_parser = ["yau", "a3zero", "quasi-iso"])]
        case: String,
    },
    /// Compare enveloping operads with their closed forms.
    Crosscheck,
    /// Compute an enveloping operad, of a fixture or of an algebra in a JSON file.
    Envelope { algebra: String },
    /// Push out along a free map; without a file, the unital zero algebra along `0 -> k`.
    Pushout {
        file: Option<PathBuf>,
        /// `corrected` or `original`.
        #[arg(long, default_value = "corrected")]
        construction: String,
    },
    /// Run every task of a JSON task file.
    Run { file: PathBuf },
}

impl Opts {
    fn ring(&self, default: Ring) -> Result<Ring> {
        self.ring.as_deref().map_or(Ok(default), Ring::parse)
    }

    fn envelope_bounds(&self, b: TruncationBounds) -> TruncationBounds {
        let b = self.common(b);
        self.bound.map_or(b, |s| b.straight(s))
    }

    fn pushout_bounds(&self, b: TruncationBounds) -> TruncationBounds {
        let b = self.common(b);
        self.bound.map_or(b, |t| b.stages(t))
    }

    fn common(&self, mut b: TruncationBounds) -> TruncationBounds {
        if let Some(w) = self.window {
            b = b.window(w);
        }
        if let Some(n) = self.arity {
            b = b.arity(n);
        }
        b
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    schema::from_str(&text)
}

fn default_pushout() -> Value {
    serde_json::json!({
        "kind": "pushout",
        "id": "zero-uass",
        "algebra": "zero-uass",
        "y": { "ring": "QQ" },
        "z": { "ring": "QQ", "degrees": { "0": { "rank": 1, "labels": ["z"] } } },
        "f": {},
        "gbar": {},
    })
}

fn execute(cli: &Cli) -> Result<ReportFile> {
    let o = &cli.opts;
    let mut report = ReportFile::new();
    match &cli.command {
        Command::Verify { case } => match case.as_str() {
            "yau" => {
                let (bound, ring) = (o.bound.unwrap_or(DEFAULT_YAU_BOUND), o.ring(Ring::Rationals)?);
                report.run(|| cases::verify_yau(bound, ring));
            }
            "a3zero" => {
                let ring = o.ring(Ring::Integers)?;
                report.run(|| vec![cases::verify_a3zero(ring)]);
            }
            _ => {
                let ring = o.ring(Ring::Rationals)?;
                report.run(|| vec![cases::verify_quasi_iso(ring)]);
            }
        },
        Command::Crosscheck => {
            let bounds = o.envelope_bounds(TruncationBounds::default());
            report.run(|| cases::crosscheck(&bounds));
        }
        Command::Envelope { algebra } => {
            let ring = o.ring.as_deref().map(Ring::parse).transpose()?;
            let path = Path::new(algebra);
            let alg = if path.is_file() {
                schema::from_value::<AlgebraRef>(&read_json(path)?)?.to_algebra(ring, "$")?
            } else {
                schema::fixture_algebra(algebra, ring)?
            };
            let bounds = o.envelope_bounds(TruncationBounds::default());
            let inputs = serde_json::json!({ "algebra": algebra, "bounds": bounds });
            report.run(|| vec![cases::envelope(&format!("envelope/{}", alg.name()), &alg, &bounds, None, inputs)]);
        }
        Command::Pushout { file, construction } => {
            let mut doc = match file {
                Some(p) => read_json(p)?,
                None => default_pushout(),
            };
            let obj = doc.as_object_mut().ok_or_else(|| Error::Schema { path: "$".into(), message: "expected an object".into() })?;
            obj.insert("kind".into(), "pushout".into());
            obj.entry("construction").or_insert_with(|| construction.clone().into());
            if let Some(r) = &o.ring {
                obj.insert("ring".into(), r.clone().into());
            }
            Construction::parse(construction)?;
            let mut task = schema::from_value::<Kinded<TaskDoc>>(&doc)?.0.prepare("$", 0)?;
            task.map_bounds(|b| o.pushout_bounds(b));
            report.run(|| task.run());
        }
        Command::Run { file } => {
            let text = std::fs::read_to_string(file)?;
            let mut tasks: Vec<Task> = load_tasks(&text)?;
            for t in &mut tasks {
                t.map_bounds(|b| o.common(b));
            }
            report = run_tasks(&tasks);
        }
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // keep 2 for "not stabilized"
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    print!("{}", report.to_text());
    let out = cli.opts.json_out.clone().or_else(|| match &cli.command {
        Command::Run { file } => Some(file.with_extension("report.json")),
        _ => None,
    });
    if let Some(path) = out {
        if let Err(e) = report.write(&path) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
