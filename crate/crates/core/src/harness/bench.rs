//! Benchmark sweeps and their CSV/JSON records.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use super::gen::{gen_append, gen_cycle, gen_diamond};
use crate::engine::{Engine, Outcome, RunLimits, SolveOptions, Verdict};
use crate::program::Program;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Diamond,
    Append,
    Cycle,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Diamond => "diamond",
            Family::Append => "append",
            Family::Cycle => "cycle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Sld,
    Tabled,
    Both,
}

impl EngineChoice {
    pub fn engines(self) -> Vec<Engine> {
        match self {
            EngineChoice::Sld => vec![Engine::Sld],
            EngineChoice::Tabled => vec![Engine::Tabled],
            EngineChoice::Both => vec![Engine::Sld, Engine::Tabled],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub family: Family,
    /// Ignored for [`Family::Cycle`], whose rows are numbered by query.
    pub sizes: Vec<u64>,
    pub engine: EngineChoice,
    pub limits: RunLimits,
    pub repetitions: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("at least one size is required")]
    NoSizes,
    #[error("sizes must be positive and strictly ascending")]
    BadSizes,
    #[error("repetitions must be positive")]
    NoRepetitions,
}

/// One measurement. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub engine: String,
    pub family: String,
    pub n: u64,
    pub rep: u32,
    pub verdict: Verdict,
    pub steps: u64,
    pub unifications: u64,
    pub generator_nodes: u64,
    pub consumer_nodes: u64,
    pub resumes: u64,
    pub table_size: u64,
    pub norm_visits: u64,
    pub wall_time_ns: u64,
}

pub const CSV_HEADER: &str = "engine,family,n,rep,verdict,steps,unifications,generator_nodes,consumer_nodes,resumes,table_size,norm_visits,wall_time_ns";

impl BenchRow {
    pub fn from_outcome(engine: Engine, family: &str, n: u64, rep: u32, out: &Outcome) -> Self {
        let s = &out.stats;
        BenchRow {
            engine: engine.name().to_string(),
            family: family.to_string(),
            n,
            rep,
            verdict: out.verdict,
            steps: s.steps,
            unifications: s.unifications,
            generator_nodes: s.generator_nodes,
            consumer_nodes: s.consumer_nodes,
            resumes: s.resumes,
            table_size: s.table_size,
            norm_visits: s.norm_visits,
            wall_time_ns: s.wall_time_ns,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions == 0 {
            return Err(BenchError::NoRepetitions);
        }
        if self.family == Family::Cycle {
            return Ok(());
        }
        if self.sizes.is_empty() {
            return Err(BenchError::NoSizes);
        }
        if self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::BadSizes);
        }
        Ok(())
    }

    /// `(n, program)` cells of the sweep. Cycle queries are numbered from 1
    /// across the whole corpus.
    fn cells(&self) -> Vec<(u64, Program, usize)> {
        match self.family {
            Family::Diamond => self.sizes.iter().map(|&n| (n, gen_diamond(n), 0)).collect(),
            Family::Append => self.sizes.iter().map(|&n| (n, gen_append(n), 0)).collect(),
            Family::Cycle => {
                let mut cells = Vec::new();
                for (_, p) in gen_cycle() {
                    for q in 0..p.queries().len() {
                        cells.push((cells.len() as u64 + 1, p.clone(), q));
                    }
                }
                cells
            }
        }
    }
}

pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>, BenchError> {
    spec.validate()?;
    let opts = SolveOptions { limits: spec.limits, ..SolveOptions::default() };
    let mut rows = Vec::new();
    for (n, program, q) in spec.cells() {
        let query = &program.queries()[q];
        for engine in spec.engine.engines() {
            for rep in 0..spec.repetitions {
                let out = engine.solve(&program, query, &opts);
                rows.push(BenchRow::from_outcome(engine, spec.family.name(), n, rep, &out));
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
