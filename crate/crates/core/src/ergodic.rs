//! Stationary processes on a finite ground and their uniform discrepancy
//! over a set family.
//!
//! Randomness comes from `ChaCha8Rng` (rand_chacha 0.9) seeded with
//! `seed_from_u64(seed)`; replication `r` of a batch runs with seed
//! `seed + r` (wrapping). States are ground point indices.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VcError};
use crate::space::{GroundSpace, PointSet, SetFamily};

/// Default number of grid points for the rotation process.
pub const DEFAULT_ROTATION_GRID: usize = 1024;

const STATIONARY_TOLERANCE: f64 = 1e-10;
const LAW_TOLERANCE: f64 = 1e-9;

fn default_grid() -> usize {
    DEFAULT_ROTATION_GRID
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcessKind {
    /// Independent draws from `weights`.
    Iid { weights: Vec<f64> },
    /// A chain started from `initial`, which must be stationary. When
    /// omitted it is solved for and must be unique.
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<Vec<f64>>,
    },
    /// `x_{i+1} = x_i + θ mod 1` from a uniform start, each point snapped to
    /// the nearest of `grid` equally spaced points.
    Rotation {
        theta: f64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    #[serde(flatten)]
    pub kind: ProcessKind,
    pub seed: u64,
    pub length: usize,
}

enum Sampler {
    Iid(WeightedIndex<f64>),
    Markov {
        start: WeightedIndex<f64>,
        rows: Vec<WeightedIndex<f64>>,
    },
    Rotation { theta: f64, grid: usize },
}

/// A validated process with its one-dimensional marginal.
pub struct Process {
    config: ProcessConfig,
    marginal: Vec<f64>,
    sampler: Sampler,
}

fn check_law(what: &str, law: &[f64], states: usize) -> Result<()> {
    if law.len() != states {
        return Err(VcError::Config(format!(
            "{what} has {} entries for {states} states",
            law.len()
        )));
    }
    if law.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(VcError::Config(format!("{what} has a negative or non-finite entry")));
    }
    let total: f64 = law.iter().sum();
    if (total - 1.0).abs() > LAW_TOLERANCE {
        return Err(VcError::Config(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

fn weighted(law: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(law).map_err(|e| VcError::Config(format!("unusable law: {e}")))
}

/// Unique solution of `πP = π`, `Σπ = 1`, if the linear system is regular.
pub fn stationary_law(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = transition.len();
    let mut a = DMatrix::from_fn(n, n, |i, j| transition[j][i] - if i == j { 1.0 } else { 0.0 });
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a.lu().solve(&b).ok_or_else(|| {
        VcError::Config("transition matrix has no unique stationary law; give `initial`".into())
    })?;
    Ok(pi.iter().map(|p| p.max(0.0)).collect())
}

fn stationarity_residual(transition: &[Vec<f64>], pi: &[f64]) -> f64 {
    (0..pi.len())
        .map(|j| {
            let moved: f64 = (0..pi.len()).map(|i| pi[i] * transition[i][j]).sum();
            (moved - pi[j]).abs()
        })
        .fold(0.0, f64::max)
}

impl Process {
    /// Validates `config` for a ground of `states` points.
    pub fn new(config: &ProcessConfig, states: usize) -> Result<Process> {
        if states == 0 {
            return Err(VcError::Config("process needs a nonempty ground".into()));
        }
        let (marginal, sampler) = match &config.kind {
            ProcessKind::Iid { weights } => {
                check_law("iid weights", weights, states)?;
                (weights.clone(), Sampler::Iid(weighted(weights)?))
            }
            ProcessKind::Markov {
                transition,
                initial,
            } => {
                if transition.len() != states {
                    return Err(VcError::Config(format!(
                        "transition matrix has {} rows for {states} states",
                        transition.len()
                    )));
                }
                for (i, row) in transition.iter().enumerate() {
                    check_law(&format!("transition row {i}"), row, states)?;
                }
                let pi = match initial {
                    Some(pi) => {
                        check_law("initial law", pi, states)?;
                        pi.clone()
                    }
                    None => stationary_law(transition)?,
                };
                let residual = stationarity_residual(transition, &pi);
                if residual > STATIONARY_TOLERANCE {
                    return Err(VcError::Config(format!(
                        "initial law is not stationary: max |πP − π| = {residual}"
                    )));
                }
                let rows = transition.iter().map(|r| weighted(r)).collect::<Result<_>>()?;
                let start = weighted(&pi)?;
                (pi, Sampler::Markov { start, rows })
            }
            ProcessKind::Rotation { theta, grid } => {
                if !theta.is_finite() {
                    return Err(VcError::Config(format!("rotation angle must be finite, got {theta}")));
                }
                if *grid != states {
                    return Err(VcError::Config(format!(
                        "rotation grid has {grid} points, ground has {states}"
                    )));
                }
                (
                    vec![1.0 / *grid as f64; *grid],
                    Sampler::Rotation {
                        theta: *theta,
                        grid: *grid,
                    },
                )
            }
        };
        Ok(Process {
            config: config.clone(),
            marginal,
            sampler,
        })
    }

    pub fn config(&self) -> &ProcessConfig {
        &self.config
    }

    /// Law of each `X_i`.
    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    /// The first `length` states of the path for `seed`.
    pub fn generate_with(&self, seed: u64, length: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut path = Vec::with_capacity(length);
        match &self.sampler {
            Sampler::Iid(law) => path.extend((0..length).map(|_| law.sample(&mut rng))),
            Sampler::Markov { start, rows } => {
                if length > 0 {
                    let mut state = start.sample(&mut rng);
                    path.push(state);
                    for _ in 1..length {
                        state = rows[state].sample(&mut rng);
                        path.push(state);
                    }
                }
            }
            Sampler::Rotation { theta, grid } => {
                let step = theta.rem_euclid(1.0);
                let scale = *grid as f64;
                let mut x: f64 = rng.random();
                for _ in 0..length {
                    path.push(((x * scale).round() as usize) % grid);
                    x = (x + step).fract();
                }
            }
        }
        path
    }

    pub fn generate(&self) -> Vec<usize> {
        self.generate_with(self.config.seed, self.config.length)
    }
}

/// The configured path, validated against a ground of `states` points.
pub fn generate(config: &ProcessConfig, states: usize) -> Result<Vec<usize>> {
    Ok(Process::new(config, states)?.generate())
}

/// Largest deviation `|k_C/n − P(C)|` over the family, with the first
/// member attaining it.
///
/// Each member is scored as the larger of its own deviation and its
/// complement's; these agree in exact arithmetic, and scoring both makes
/// adding complements to a family leave the result bit-for-bit unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub delta: f64,
    pub argmax: Option<usize>,
}

fn discrepancy_from_counts(family: &SetFamily, counts: &[u64], n: u64, truth: &[f64]) -> Discrepancy {
    let total = n as f64;
    let mass = |set: &PointSet, inside: bool| -> (u64, f64) {
        let mut k = 0;
        let mut p = 0.0;
        for x in 0..counts.len() {
            if set.contains(x) == inside {
                k += counts[x];
                p += truth[x];
            }
        }
        (k, p)
    };
    let mut best = Discrepancy {
        delta: 0.0,
        argmax: None,
    };
    for (j, set) in family.sets().enumerate() {
        let (k_in, p_in) = mass(set, true);
        let (k_out, p_out) = mass(set, false);
        let d = f64::max(
            (k_in as f64 / total - p_in).abs(),
            (k_out as f64 / total - p_out).abs(),
        );
        if best.argmax.is_none() || d > best.delta {
            best = Discrepancy {
                delta: d,
                argmax: Some(j),
            };
        }
    }
    best
}

fn check_truth(family: &SetFamily, truth: &[f64]) -> Result<()> {
    if truth.len() != family.ground().len() {
        return Err(VcError::Domain(format!(
            "truth law has {} entries for {} points",
            truth.len(),
            family.ground().len()
        )));
    }
    Ok(())
}

/// `Δ_n(C : X)` for the given sample and true law.
pub fn discrepancy(family: &SetFamily, sample: &[usize], truth: &[f64]) -> Result<Discrepancy> {
    check_truth(family, truth)?;
    if sample.is_empty() {
        return Err(VcError::Domain("discrepancy of an empty sample".into()));
    }
    let n = family.ground().len();
    let mut counts = vec![0u64; n];
    for &x in sample {
        if x >= n {
            return Err(VcError::Domain(format!("sample point {x} outside a ground of {n}")));
        }
        counts[x] += 1;
    }
    Ok(discrepancy_from_counts(family, &counts, sample.len() as u64, truth))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub delta_n: f64,
    pub argmax_member: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyTrace {
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
}

fn check_checkpoints(checkpoints: &[usize]) -> Result<()> {
    if checkpoints.is_empty() || checkpoints[0] == 0 {
        return Err(VcError::Domain("checkpoints must be nonempty and positive".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(VcError::Domain("checkpoints must be strictly increasing".into()));
    }
    Ok(())
}

fn trace_path(
    family: &SetFamily,
    process: &Process,
    seed: u64,
    checkpoints: &[usize],
) -> DiscrepancyTrace {
    let last = *checkpoints.last().unwrap();
    let path = process.generate_with(seed, last);
    let mut counts = vec![0u64; family.ground().len()];
    let mut seen = 0;
    let checkpoints = checkpoints
        .iter()
        .map(|&n| {
            for &x in &path[seen..n] {
                counts[x] += 1;
            }
            seen = n;
            let d = discrepancy_from_counts(family, &counts, n as u64, process.marginal());
            Checkpoint {
                n,
                delta_n: d.delta,
                argmax_member: d.argmax.map(|j| family.name(j).to_string()),
            }
        })
        .collect();
    DiscrepancyTrace { seed, checkpoints }
}

/// `Δ_n` along one path at each checkpoint; the truth is the process's
/// marginal. The path is generated to the last checkpoint, which may exceed
/// the configured length.
pub fn ulln_experiment(
    family: &SetFamily,
    config: &ProcessConfig,
    checkpoints: &[usize],
) -> Result<DiscrepancyTrace> {
    check_checkpoints(checkpoints)?;
    let process = Process::new(config, family.ground().len())?;
    Ok(trace_path(family, &process, config.seed, checkpoints))
}

/// [`ulln_experiment`] for seeds `seed, seed + 1, …`, in seed order.
pub fn replicate(
    family: &SetFamily,
    config: &ProcessConfig,
    checkpoints: &[usize],
    replications: usize,
) -> Result<Vec<DiscrepancyTrace>> {
    check_checkpoints(checkpoints)?;
    let process = Process::new(config, family.ground().len())?;
    Ok((0..replications as u64)
        .into_par_iter()
        .map(|r| trace_path(family, &process, config.seed.wrapping_add(r), checkpoints))
        .collect())
}

/// Half-open grid intervals `[a, b)` whose endpoints are multiples of
/// `step`, named `[a,b)`.
pub fn grid_intervals(ground: Arc<GroundSpace>, step: usize) -> Result<SetFamily> {
    let n = ground.len();
    if step == 0 || n % step != 0 {
        return Err(VcError::Domain(format!("step {step} does not divide a grid of {n}")));
    }
    let mut sets = Vec::new();
    for a in (0..n).step_by(step) {
        for b in ((a + step)..=n).step_by(step) {
            sets.push(crate::space::Member {
                name: format!("[{a},{b})"),
                set: PointSet::from_fn(n, |x| a <= x && x < b),
            });
        }
    }
    SetFamily::new(ground, sets)
}

/// Median of a nonempty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}
