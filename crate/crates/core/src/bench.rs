//! Seeded complexity/timing benchmark over random robot configurations.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::jacobian;
use crate::model::{JointConfig, RobotModel, TaskFrame};
use crate::search::{
    binomial, force_polytope_vertices, full_system_solve, point_sets_match, JointBox, SearchOptions,
    SearchStats, VertexSet,
};

/// Samples whose smallest singular value is below this fraction of the
/// largest are discarded and redrawn.
pub const NEAR_SINGULAR_RATIO: f64 = 1e-4;

const MAX_REDRAWS: usize = 10_000;

/// Deterministic per-trial generator: trial `i` always gets stream `i` of
/// the master seed, however the trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub struct Sample {
    pub q: JointConfig,
    pub jacobian: DMatrix<f64>,
    /// Draws rejected as near-singular before this one was accepted.
    pub rejected: usize,
}

/// Draws a configuration uniformly within the joint sampling ranges and
/// redraws until the task Jacobian is comfortably nonsingular.
pub fn sample_nonsingular(model: &RobotModel, frame: &TaskFrame, rng: &mut impl Rng) -> Result<Sample> {
    for rejected in 0..MAX_REDRAWS {
        let q: Vec<f64> = model
            .joints
            .iter()
            .map(|j| if j.q_max > j.q_min { rng.random_range(j.q_min..j.q_max) } else { j.q_min })
            .collect();
        let q = JointConfig::new(q);
        let jac = jacobian(model, &q, frame)?;
        if jac.nrows() > jac.ncols() {
            return Err(Error::Input(format!(
                "task dimension {} exceeds joint count {}",
                jac.nrows(),
                jac.ncols()
            )));
        }
        let sv = jac.clone().svd(false, false).singular_values;
        if sv.min() >= NEAR_SINGULAR_RATIO * sv.max() {
            return Ok(Sample {
                q,
                jacobian: jac,
                rejected,
            });
        }
    }
    Err(Error::Input(format!(
        "no nonsingular configuration found for '{}' after {MAX_REDRAWS} draws",
        model.name
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
        } else {
            0.0
        };
        Summary {
            mean,
            sd: var.sqrt(),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub robot: String,
    pub method: String,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub faces_total: u64,
    pub systems_solved: Summary,
    pub faces_pruned: f64,
    pub runtime_us: Summary,
    pub rejected_samples: usize,
    pub seed: u64,
}

impl BenchRecord {
    /// Copy with timing fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.runtime_us = Summary {
            mean: 0.0,
            sd: 0.0,
            max: 0.0,
        };
        r
    }

    pub const CSV_HEADER: &'static str = "robot,method,n,m,trials,faces_total,systems_solved_mean,systems_solved_sd,systems_solved_max,faces_pruned_mean,runtime_us_mean,runtime_us_sd,runtime_us_max,rejected_samples,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.robot,
            self.method,
            self.n,
            self.m,
            self.trials,
            self.faces_total,
            self.systems_solved.mean,
            self.systems_solved.sd,
            self.systems_solved.max,
            self.faces_pruned,
            self.runtime_us.mean,
            self.runtime_us.sd,
            self.runtime_us.max,
            self.rejected_samples,
            self.seed
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub trials: usize,
    pub seed: u64,
    pub frame: TaskFrame,
    /// Also run the unreduced baseline and check both agree.
    pub baseline: bool,
    pub prune: bool,
    /// Untimed runs before each timed one.
    pub warmup: usize,
    pub parallel: bool,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    /// Trials where the reduced and baseline vertex sets disagreed.
    pub mismatches: Vec<usize>,
}

struct TrialOutcome {
    stats: SearchStats,
    baseline: Option<SearchStats>,
    agree: bool,
    rejected: usize,
}

fn timed(run: impl Fn() -> Result<VertexSet>, warmup: usize) -> Result<VertexSet> {
    for _ in 0..warmup {
        run()?;
    }
    let start = Instant::now();
    let mut set = run()?;
    set.stats.runtime_ns = start.elapsed().as_nanos() as u64;
    Ok(set)
}

pub fn run_bench(model: &RobotModel, cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.trials == 0 {
        return Err(Error::Input("trials must be at least 1".into()));
    }
    let (lo, hi) = model.torque_limits();
    let bx = JointBox::new(lo, hi)?;
    let opts = SearchOptions {
        prune: cfg.prune,
        ..SearchOptions::default()
    };
    let trial = |i: usize| -> Result<TrialOutcome> {
        let mut rng = trial_rng(cfg.seed, i as u64);
        let sample = sample_nonsingular(model, &cfg.frame, &mut rng)?;
        let fast = timed(|| force_polytope_vertices(&sample.jacobian, &bx, &opts), cfg.warmup)?;
        let (baseline, agree) = if cfg.baseline {
            let slow = timed(|| full_system_solve(&sample.jacobian, &bx, &opts), cfg.warmup)?;
            let tol = 1e-9 * (1.0 + crate::search::diameter(&fast.vertices));
            (Some(slow.stats), point_sets_match(&fast.vertices, &slow.vertices, tol))
        } else {
            (None, true)
        };
        Ok(TrialOutcome {
            stats: fast.stats,
            baseline,
            agree,
            rejected: sample.rejected,
        })
    };
    let outcomes: Vec<TrialOutcome> = if cfg.parallel {
        (0..cfg.trials).into_par_iter().map(trial).collect::<Result<_>>()?
    } else {
        (0..cfg.trials).map(trial).collect::<Result<_>>()?
    };

    let n = model.dof();
    let m = cfg.frame.dim();
    let rejected = outcomes.iter().map(|o| o.rejected).sum();
    let record = |method: &str, stats: Vec<SearchStats>| {
        let solved: Vec<f64> = stats.iter().map(|s| s.systems_solved as f64).collect();
        let pruned: Vec<f64> = stats.iter().map(|s| s.faces_pruned_bounds as f64).collect();
        let us: Vec<f64> = stats.iter().map(|s| s.runtime_ns as f64 / 1e3).collect();
        BenchRecord {
            robot: model.name.clone(),
            method: method.to_string(),
            n,
            m,
            trials: cfg.trials,
            faces_total: binomial(n, m),
            systems_solved: Summary::of(&solved),
            faces_pruned: Summary::of(&pruned).mean,
            runtime_us: Summary::of(&us),
            rejected_samples: rejected,
            seed: cfg.seed,
        }
    };
    let mut records = vec![record(
        if cfg.prune { "reduced" } else { "reduced-noprune" },
        outcomes.iter().map(|o| o.stats).collect(),
    )];
    if cfg.baseline {
        records.push(record(
            "full-system",
            outcomes.iter().filter_map(|o| o.baseline).collect(),
        ));
    }
    let mismatches = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| !o.agree)
        .map(|(i, _)| i)
        .collect();
    Ok(BenchReport { records, mismatches })
}
