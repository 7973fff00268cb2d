use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype::Genotype;
use crate::objective::{check_constraints, evaluate, ObjectiveValues};

use super::{Algorithm, OptimizerConfig, ParetoFront, Problem, RunResult};

/// Best-so-far snapshot after some number of evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub evals: u64,
    pub wl2: f64,
    pub bbox: u32,
    pub scalar: f64,
    pub millis: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub records: Vec<TraceRecord>,
}

impl EvolutionTrace {
    pub const CSV_HEADER: &'static str = "evals,wl2,bbox,scalar,millis";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.evals, r.wl2, r.bbox, r.scalar, r.millis
            )
            .unwrap();
        }
        out
    }

    pub fn best_scalar(&self) -> Option<f64> {
        self.records.last().map(|r| r.scalar)
    }

    /// First recorded evaluation count whose best scalar is at most
    /// `threshold`.
    pub fn evaluations_to(&self, threshold: f64) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.scalar <= threshold)
            .map(|r| r.evals)
    }

    pub fn is_monotone(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].evals > w[0].evals && w[1].scalar <= w[0].scalar)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Scored {
    pub genotype: Genotype,
    pub values: ObjectiveValues,
    pub scalar: f64,
}

/// Counts evaluations, keeps the best candidate and writes the trace.
pub(crate) struct Tracker<'a> {
    problem: &'a Problem<'a>,
    config: &'a OptimizerConfig,
    reduced: bool,
    evals: u64,
    best: Option<Scored>,
    trace: EvolutionTrace,
    start: Instant,
    evals_to_target: Option<u64>,
}

impl<'a> Tracker<'a> {
    pub fn new(problem: &'a Problem<'a>, config: &'a OptimizerConfig) -> Self {
        Tracker {
            problem,
            config,
            reduced: config.algorithm == Algorithm::Nsga2Reduced,
            evals: 0,
            best: None,
            trace: EvolutionTrace::default(),
            start: Instant::now(),
            evals_to_target: None,
        }
    }

    pub fn remaining(&self) -> u64 {
        self.config.max_evaluations.saturating_sub(self.evals)
    }

    pub fn stopped(&self) -> bool {
        self.remaining() == 0 || self.evals_to_target.is_some()
    }

    fn score(&self, g: &Genotype) -> Result<(ObjectiveValues, f64)> {
        let p = self.problem;
        let placement = if self.reduced {
            p.decoder.decode_reduced(&g.mapping)?
        } else {
            p.decoder.decode(g)?
        };
        if self.config.check_legality {
            let report = check_constraints(&placement, p.design, p.device, p.decoder.region());
            assert!(
                report.is_ok(),
                "decoded an illegal placement: {:?}",
                report.violations
            );
        }
        let values = evaluate(&placement, p.design)?;
        let scalar = self.config.scalarization.apply(&values);
        if !values.wl2.is_finite() || !scalar.is_finite() {
            return Err(Error::NonFinite(format!(
                "wl2 {} scalar {} after {} evaluations",
                values.wl2, scalar, self.evals
            )));
        }
        Ok((values, scalar))
    }

    fn commit(&mut self, g: &Genotype, values: ObjectiveValues, scalar: f64) -> bool {
        self.evals += 1;
        let improved = self.best.as_ref().is_none_or(|b| scalar < b.scalar);
        if improved {
            self.best = Some(Scored {
                genotype: g.clone(),
                values,
                scalar,
            });
        }
        if self.evals_to_target.is_none() && self.config.target.is_some_and(|t| scalar <= t) {
            self.evals_to_target = Some(self.evals);
        }
        improved
    }

    fn record(&mut self) {
        let Some(b) = &self.best else { return };
        if self
            .trace
            .records
            .last()
            .is_some_and(|r| r.evals == self.evals)
        {
            return;
        }
        self.trace.records.push(TraceRecord {
            evals: self.evals,
            wl2: b.values.wl2,
            bbox: b.values.max_bbox,
            scalar: b.scalar,
            millis: self.start.elapsed().as_millis() as u64,
        });
    }

    /// Evaluates one generation in parallel, commits in index order and
    /// records one trace line.
    pub fn batch(&mut self, genotypes: &[Genotype]) -> Result<Vec<(ObjectiveValues, f64)>> {
        let scored: Vec<Result<(ObjectiveValues, f64)>> =
            genotypes.par_iter().map(|g| self.score(g)).collect();
        let mut out = Vec::with_capacity(genotypes.len());
        for (g, s) in genotypes.iter().zip(scored) {
            let (values, scalar) = s?;
            self.commit(g, values, scalar);
            out.push((values, scalar));
        }
        self.record();
        Ok(out)
    }

    /// Evaluates one candidate; the trace gains a line when the best improves.
    pub fn single(&mut self, g: &Genotype) -> Result<(ObjectiveValues, f64)> {
        let (values, scalar) = self.score(g)?;
        if self.commit(g, values, scalar) {
            self.record();
        }
        Ok((values, scalar))
    }

    pub fn finish(
        mut self,
        front: Option<ParetoFront>,
        accepted_moves: Option<u64>,
    ) -> Result<RunResult> {
        self.record();
        let best = self
            .best
            .take()
            .ok_or_else(|| Error::Config("no candidate was evaluated".into()))?;
        let genotype = if self.reduced {
            self.problem.decoder.reduced_genes(&best.genotype.mapping)
        } else {
            best.genotype
        };
        log::info!(
            "{} done: {} evaluations, best scalar {}",
            self.config.algorithm,
            self.evals,
            best.scalar
        );
        Ok(RunResult {
            algorithm: self.config.algorithm,
            best: genotype,
            best_values: best.values,
            best_scalar: best.scalar,
            front,
            trace: self.trace,
            evaluations: self.evals,
            evaluations_to_target: self.evals_to_target,
            accepted_moves,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(evals: u64, scalar: f64) -> TraceRecord {
        TraceRecord {
            evals,
            wl2: scalar,
            bbox: 1,
            scalar,
            millis: 0,
        }
    }

    #[test]
    fn csv_layout() {
        let t = EvolutionTrace {
            records: vec![rec(10, 4.0)],
        };
        assert_eq!(t.to_csv(), "evals,wl2,bbox,scalar,millis\n10,4,1,4,0\n");
    }

    #[test]
    fn evaluations_to_threshold() {
        let t = EvolutionTrace {
            records: vec![rec(10, 9.0), rec(20, 5.0), rec(30, 2.0)],
        };
        assert_eq!(t.evaluations_to(5.0), Some(20));
        assert_eq!(t.evaluations_to(1.0), None);
        assert!(t.is_monotone());
    }
}
