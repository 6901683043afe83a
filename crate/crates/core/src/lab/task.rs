//! Task files: a list of computations with optional expectations, checked as a whole before
//! anything runs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::cases::{self, Construction};
use super::report::{ReportFile, VerificationReport};
use super::schema::{self, chain_map, parse_ring, AlgebraRef, Key, Kinded, BoundsDoc, ChainMapDoc, ComplexDoc, InvariantsDoc};
use crate::algebra::{FreeAttachment, OAlgebra};
use crate::complex::ChainComplex;
use crate::envelope::TruncationBounds;
use crate::error::{Error, Result};
use crate::linalg::Ring;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    #[serde(default)]
    pub tasks: Vec<Kinded<TaskDoc>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskDoc {
    VerifyYau {
        #[serde(default)]
        bound: Option<usize>,
        #[serde(default)]
        ring: Option<String>,
    },
    VerifyA3zero {
        #[serde(default)]
        ring: Option<String>,
    },
    VerifyQuasiIso {
        #[serde(default)]
        ring: Option<String>,
    },
    Crosscheck {
        #[serde(default)]
        bounds: BoundsDoc,
    },
    Envelope {
        #[serde(default)]
        id: Option<String>,
        algebra: AlgebraRef,
        #[serde(default)]
        ring: Option<String>,
        #[serde(default)]
        bounds: BoundsDoc,
        /// Expected invariants per arity.
        #[serde(default)]
        expect: Option<BTreeMap<Key<usize>, InvariantsDoc>>,
    },
    Pushout {
        #[serde(default)]
        id: Option<String>,
        algebra: AlgebraRef,
        #[serde(default)]
        ring: Option<String>,
        /// Source of the generating map `f: Y -> Z`.
        y: ComplexDoc,
        z: ComplexDoc,
        f: ChainMapDoc,
        /// `ḡ: Y -> A`.
        gbar: ChainMapDoc,
        #[serde(default)]
        construction: Option<String>,
        #[serde(default)]
        bounds: BoundsDoc,
        #[serde(default)]
        expect: Option<InvariantsDoc>,
    },
    Homology {
        #[serde(default)]
        id: Option<String>,
        complex: ComplexDoc,
        #[serde(default)]
        expect: Option<InvariantsDoc>,
    },
}

/// A task with every input converted and validated.
#[derive(Debug)]
pub enum Task {
    VerifyYau { bound: usize, ring: Ring },
    VerifyA3zero { ring: Ring },
    VerifyQuasiIso { ring: Ring },
    Crosscheck { bounds: TruncationBounds },
    Envelope { id: String, alg: OAlgebra, bounds: TruncationBounds, expect: Option<BTreeMap<Key<usize>, InvariantsDoc>>, inputs: Value },
    Pushout {
        id: String,
        alg: OAlgebra,
        att: FreeAttachment,
        bounds: TruncationBounds,
        construction: Construction,
        expect: Option<InvariantsDoc>,
        inputs: Value,
    },
    Homology { id: String, complex: ChainComplex, expect: Option<InvariantsDoc>, inputs: Value },
}

/// Default bound for the unital zero-algebra case.
pub const DEFAULT_YAU_BOUND: usize = 6;

fn ring_or(r: &Option<String>, default: Ring, path: &str) -> Result<Ring> {
    r.as_deref().map_or(Ok(default), |s| parse_ring(s, path))
}

fn opt_ring(r: &Option<String>, path: &str) -> Result<Option<Ring>> {
    r.as_deref().map(|s| parse_ring(s, path)).transpose()
}

impl TaskDoc {
    /// Converts the task found at JSON path `p`; `index` numbers tasks without an id.
    pub fn prepare(&self, p: &str, index: usize) -> Result<Task> {
        let p = p.to_string();
        let id = |given: &Option<String>, kind: &str| given.clone().unwrap_or_else(|| format!("{kind}#{index}"));
        let inputs = serde_json::to_value(Kinded(self)).expect("task documents serialize");
        Ok(match self {
            Self::VerifyYau { bound, ring } => Task::VerifyYau {
                bound: bound.unwrap_or(DEFAULT_YAU_BOUND),
                ring: ring_or(ring, Ring::Rationals, &format!("{p}.ring"))?,
            },
            Self::VerifyA3zero { ring } => Task::VerifyA3zero { ring: ring_or(ring, Ring::Integers, &format!("{p}.ring"))? },
            Self::VerifyQuasiIso { ring } => Task::VerifyQuasiIso { ring: ring_or(ring, Ring::Rationals, &format!("{p}.ring"))? },
            Self::Crosscheck { bounds } => Task::Crosscheck { bounds: bounds.apply(TruncationBounds::default()) },
            Self::Envelope { id: given, algebra, ring, bounds, expect } => Task::Envelope {
                id: id(given, "envelope"),
                alg: algebra.to_algebra(opt_ring(ring, &format!("{p}.ring"))?, &format!("{p}.algebra"))?,
                bounds: bounds.apply(TruncationBounds::default()),
                expect: expect.clone(),
                inputs,
            },
            Self::Pushout { id: given, algebra, ring, y, z, f, gbar, construction, bounds, expect } => {
                let alg = algebra.to_algebra(opt_ring(ring, &format!("{p}.ring"))?, &format!("{p}.algebra"))?;
                let yc = y.to_complex(&format!("{p}.y"))?;
                let zc = z.to_complex(&format!("{p}.z"))?;
                for (name, c) in [("y", &yc), ("z", &zc)] {
                    if c.ring() != alg.ring() {
                        return Err(Error::Schema {
                            path: format!("{p}.{name}.ring"),
                            message: format!("expected {}, the ring of the algebra", alg.ring()),
                        });
                    }
                }
                let fm = chain_map(f, &yc, &zc, &format!("{p}.f"))?;
                let gm = chain_map(gbar, &yc, alg.carrier(), &format!("{p}.gbar"))?;
                let construction = construction
                    .as_deref()
                    .map_or(Ok(Construction::Corrected), Construction::parse)
                    .map_err(|e| Error::Schema { path: format!("{p}.construction"), message: e.to_string() })?;
                Task::Pushout {
                    id: id(given, "pushout"),
                    att: FreeAttachment::new(fm, gm).map_err(|e| Error::Schema { path: p.clone(), message: e.to_string() })?,
                    alg,
                    bounds: bounds.apply(TruncationBounds::default()),
                    construction,
                    expect: expect.clone(),
                    inputs,
                }
            }
            Self::Homology { id: given, complex, expect } => Task::Homology {
                id: id(given, "homology"),
                complex: complex.to_complex(&format!("{p}.complex"))?,
                expect: expect.clone(),
                inputs,
            },
        })
    }
}

impl Task {
    /// Replaces the truncation bounds of tasks that have them.
    pub fn map_bounds(&mut self, f: impl Fn(TruncationBounds) -> TruncationBounds) {
        match self {
            Task::Crosscheck { bounds } | Task::Envelope { bounds, .. } | Task::Pushout { bounds, .. } => *bounds = f(*bounds),
            _ => {}
        }
    }

    pub fn run(&self) -> Vec<VerificationReport> {
        match self {
            Task::VerifyYau { bound, ring } => cases::verify_yau(*bound, *ring),
            Task::VerifyA3zero { ring } => vec![cases::verify_a3zero(*ring)],
            Task::VerifyQuasiIso { ring } => vec![cases::verify_quasi_iso(*ring)],
            Task::Crosscheck { bounds } => cases::crosscheck(bounds),
            Task::Envelope { id, alg, bounds, expect, inputs } => {
                vec![cases::envelope(id, alg, bounds, expect.as_ref(), json!({ "task": inputs, "bounds": bounds }))]
            }
            Task::Pushout { id, alg, att, bounds, construction, expect, inputs } => vec![cases::pushout(
                id,
                alg,
                att,
                bounds,
                *construction,
                expect.as_ref(),
                json!({ "task": inputs, "bounds": bounds }),
            )],
            Task::Homology { id, complex, expect, inputs } => vec![cases::homology(id, complex, expect.as_ref(), inputs.clone())],
        }
    }
}

/// Parses and validates a task file; nothing runs unless every task is well formed.
pub fn load_tasks(text: &str) -> Result<Vec<Task>> {
    let file: TaskFile = schema::from_str(text)?;
    file.tasks.iter().enumerate().map(|(i, t)| t.0.prepare(&format!("tasks[{i}]"), i)).collect()
}

pub fn run_tasks(tasks: &[Task]) -> ReportFile {
    let mut report = ReportFile::new();
    for t in tasks {
        report.run(|| t.run());
    }
    report
}

pub fn run_file(path: &Path) -> Result<ReportFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(run_tasks(&load_tasks(&text)?))
}
