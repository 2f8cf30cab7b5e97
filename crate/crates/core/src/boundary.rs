//! π-boundaries and the search for partitions that make every member's
//! boundary small.
//!
//! On a finite ground the singleton partition (or simply the join of every
//! member) has empty boundaries, so every family is finitely approximable
//! here. What is worth measuring is how many cells a strategy needs before
//! `sup_C μ(∂(C:π)) ≤ ε`, and the contrast between refining along the
//! member order and refining greedily.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VcError};
use crate::space::{Cell, GroundSpace, Partition, PointSet, SetFamily};

/// Union of the cells `A` with `μ(A ∩ C) > 0` and `μ(A ∩ C^c) > 0`.
pub fn pi_boundary(set: &PointSet, partition: &Partition, ground: &GroundSpace) -> Result<PointSet> {
    partition.check_ground(ground)?;
    if set.universe() != ground.len() {
        return Err(VcError::Domain("set and ground sizes differ".into()));
    }
    Ok(boundary_from_keys(
        ground,
        &partition.assignment(),
        partition.len(),
        set,
    ))
}

/// Boundary of `set` under the partition described by a point → cell map.
///
/// Positivity is decided by the presence of a positive-weight point, which
/// is exact for nonnegative weights.
fn boundary_from_keys(
    ground: &GroundSpace,
    keys: &[usize],
    cells: usize,
    set: &PointSet,
) -> PointSet {
    let mut inside = vec![false; cells];
    let mut outside = vec![false; cells];
    for (p, &c) in keys.iter().enumerate() {
        if ground.weight(p) > 0.0 {
            if set.contains(p) {
                inside[c] = true;
            } else {
                outside[c] = true;
            }
        }
    }
    PointSet::from_fn(keys.len(), |p| inside[keys[p]] && outside[keys[p]])
}

/// Boundary of one member.
#[derive(Clone, Debug, PartialEq)]
pub struct MemberBoundary {
    pub set: PointSet,
    pub measure: f64,
}

/// Per-member boundaries and their supremum.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryProfile {
    pub members: Vec<MemberBoundary>,
    pub sup: f64,
    /// First member attaining `sup`; `None` for an empty family.
    pub witness: Option<usize>,
}

fn profile_from_keys(family: &SetFamily, keys: &[usize], cells: usize) -> BoundaryProfile {
    let ground = family.ground();
    let members: Vec<MemberBoundary> = family
        .sets()
        .map(|c| {
            let set = boundary_from_keys(ground, keys, cells, c);
            let measure = ground.measure(&set);
            MemberBoundary { set, measure }
        })
        .collect();
    let mut sup = 0.0;
    let mut witness = None;
    for (i, m) in members.iter().enumerate() {
        if witness.is_none() || m.measure > sup {
            sup = m.measure;
            witness = Some(i);
        }
    }
    BoundaryProfile {
        members,
        sup,
        witness,
    }
}

pub fn boundary_profile(family: &SetFamily, partition: &Partition) -> Result<BoundaryProfile> {
    partition.check_ground(family.ground())?;
    Ok(profile_from_keys(
        family,
        &partition.assignment(),
        partition.len(),
    ))
}

/// Refinement strategy for [`approximate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// `π_n = C_1 ∨ … ∨ C_n` along the member order.
    JoinPrefix,
    /// Join whichever remaining member minimizes the resulting sup boundary.
    Greedy,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::JoinPrefix => "join-prefix",
            Strategy::Greedy => "greedy",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = VcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "join-prefix" => Ok(Strategy::JoinPrefix),
            "greedy" => Ok(Strategy::Greedy),
            other => Err(VcError::Domain(format!("unknown strategy `{other}`"))),
        }
    }
}

/// One refinement step. Step 0 is the trivial partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub joined: Option<usize>,
    pub cells: usize,
    pub sup_boundary: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproximationResult {
    pub epsilon: f64,
    pub strategy: Strategy,
    pub partition: Partition,
    /// Member indices joined, in order.
    pub joined: Vec<usize>,
    pub achieved: f64,
    pub trace: Vec<TraceStep>,
    pub success: bool,
}

/// A partition as it is built up by successive joins.
#[derive(Clone)]
struct Refinement {
    keys: Vec<usize>,
    labels: Vec<String>,
}

impl Refinement {
    fn trivial(n: usize) -> Self {
        Refinement {
            keys: vec![0; n],
            labels: if n == 0 { Vec::new() } else { vec![String::new()] },
        }
    }

    fn cells(&self) -> usize {
        self.labels.len()
    }

    /// Splits every cell by membership in `set`.
    fn refine(&self, set: &PointSet) -> Refinement {
        let mut slot: Vec<[Option<usize>; 2]> = vec![[None, None]; self.cells()];
        let mut labels = Vec::new();
        let keys = self
            .keys
            .iter()
            .enumerate()
            .map(|(p, &c)| {
                let side = set.contains(p) as usize;
                *slot[c][side].get_or_insert_with(|| {
                    let sign = if side == 1 { '+' } else { '-' };
                    labels.push(format!("{}{sign}", self.labels[c]));
                    labels.len() - 1
                })
            })
            .collect();
        Refinement { keys, labels }
    }

    fn to_partition(&self) -> Partition {
        let n = self.keys.len();
        let mut cells: Vec<Cell> = self
            .labels
            .iter()
            .map(|l| Cell {
                label: if l.is_empty() { "X".into() } else { l.clone() },
                set: PointSet::empty(n),
            })
            .collect();
        for (p, &c) in self.keys.iter().enumerate() {
            cells[c].set.insert(p);
        }
        Partition::new(n, cells).expect("refinement cells form a partition")
    }
}

/// Searches for a partition with `sup_C μ(∂(C:π)) ≤ epsilon` using at most
/// `max_cells` cells.
///
/// Running out of cells is a finding, not an error: the result then has
/// `success == false` and the trace up to the last step that fit.
/// Greedy only considers members whose join keeps the cell count within
/// budget; ties go to the lowest member index.
pub fn approximate(
    family: &SetFamily,
    epsilon: f64,
    strategy: Strategy,
    max_cells: usize,
) -> Result<ApproximationResult> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(VcError::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if max_cells < 2 {
        return Err(VcError::Domain(format!("max_cells must be at least 2, got {max_cells}")));
    }
    let ground = family.ground();
    let mut current = Refinement::trivial(ground.len());
    let mut sup = profile_from_keys(family, &current.keys, current.cells()).sup;
    let mut trace = vec![TraceStep {
        step: 0,
        joined: None,
        cells: current.cells(),
        sup_boundary: sup,
    }];
    let mut joined = Vec::new();
    let mut remaining: Vec<usize> = (0..family.len()).collect();

    while sup > epsilon && !remaining.is_empty() {
        let next = match strategy {
            Strategy::JoinPrefix => {
                let j = remaining[0];
                let refined = current.refine(family.set(j));
                if refined.cells() > max_cells {
                    None
                } else {
                    let s = profile_from_keys(family, &refined.keys, refined.cells()).sup;
                    Some((0, refined, s))
                }
            }
            Strategy::Greedy => {
                let evaluated: Vec<Option<(Refinement, f64)>> = remaining
                    .par_iter()
                    .map(|&j| {
                        let refined = current.refine(family.set(j));
                        if refined.cells() > max_cells {
                            return None;
                        }
                        let s = profile_from_keys(family, &refined.keys, refined.cells()).sup;
                        Some((refined, s))
                    })
                    .collect();
                let mut best: Option<(usize, Refinement, f64)> = None;
                for (pos, cand) in evaluated.into_iter().enumerate() {
                    if let Some((r, s)) = cand {
                        if best.as_ref().is_none_or(|(_, _, b)| s < *b) {
                            best = Some((pos, r, s));
                        }
                    }
                }
                best
            }
        };
        let Some((pos, refined, s)) = next else {
            break;
        };
        let j = remaining.remove(pos);
        joined.push(j);
        current = refined;
        sup = s;
        trace.push(TraceStep {
            step: trace.len(),
            joined: Some(j),
            cells: current.cells(),
            sup_boundary: sup,
        });
    }

    Ok(ApproximationResult {
        epsilon,
        strategy,
        partition: current.to_partition(),
        joined,
        achieved: sup,
        trace,
        success: sup <= epsilon,
    })
}
