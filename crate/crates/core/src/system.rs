//! Exact combinatorics of finite set systems: shattering, VC dimension,
//! joins, Boolean independence and the dual family.
//!
//! All searches run in increasing size and visit candidate subsets in
//! lexicographic order, so the reported witness is the lexicographically
//! first one of the largest size.

use std::collections::HashSet;
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::error::{Result, VcError};
use crate::space::{GroundSpace, Member, Partition, PointSet, SetFamily};

/// Largest target set [`shatters`] accepts.
pub const MAX_SHATTER_TARGET: usize = 30;
/// Largest number of sets a join may combine.
pub const MAX_JOIN_SETS: usize = 30;
/// Largest cap accepted by [`dual_vc_dimension`].
pub const MAX_DUAL_CAP: usize = 20;
/// Default number of candidate subsets an exhaustive search may examine.
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

/// Outcome of a dimension search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dimension {
    pub value: usize,
    /// Point indices (VC dimension) or member indices (dual VC dimension) of
    /// the lexicographically first witness of size `value`.
    pub witness: Vec<usize>,
    /// A witness of the full cap size was found, so the true dimension may
    /// be larger than `value`.
    pub reached_cap: bool,
}

/// Visits the `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(
    n: usize,
    k: usize,
    mut f: impl FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if k > n {
        return ControlFlow::Continue(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        // Rightmost position that can still advance.
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return ControlFlow::Continue(());
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

fn trace_pattern(set: &PointSet, points: &[usize]) -> u32 {
    points
        .iter()
        .enumerate()
        .filter(|(_, &p)| set.contains(p))
        .fold(0u32, |acc, (j, _)| acc | (1 << j))
}

fn shatters_points(sets: &[&PointSet], points: &[usize]) -> bool {
    let need = 1usize << points.len();
    if sets.len() < need {
        return false;
    }
    let mut seen = HashSet::with_capacity(need);
    for set in sets {
        seen.insert(trace_pattern(set, points));
        if seen.len() == need {
            return true;
        }
    }
    false
}

/// True iff `|{C ∩ target : C ∈ family}| = 2^|target|`.
///
/// Taken literally, so the empty family shatters nothing, not even `∅`.
pub fn shatters(family: &SetFamily, target: &PointSet) -> Result<bool> {
    if target.universe() != family.ground().len() {
        return Err(VcError::Domain(format!(
            "target is over {} points but the ground has {}",
            target.universe(),
            family.ground().len()
        )));
    }
    let size = target.count();
    if size > MAX_SHATTER_TARGET {
        return Err(VcError::SizeGuard {
            what: "shatter target",
            size,
            limit: MAX_SHATTER_TARGET,
        });
    }
    let points: Vec<usize> = target.ones().collect();
    let sets: Vec<&PointSet> = family.sets().collect();
    Ok(shatters_points(&sets, &points))
}

fn distinct_sets(family: &SetFamily) -> Vec<&PointSet> {
    let mut seen = HashSet::new();
    family.sets().filter(|s| seen.insert(*s)).collect()
}

fn floor_log2(x: usize) -> usize {
    if x == 0 {
        0
    } else {
        (usize::BITS - 1 - x.leading_zeros()) as usize
    }
}

/// VC dimension with the search limited to sets of size at most `cap`
/// (default: the ground size).
///
/// The empty family has dimension 0 by convention. A nonempty family always
/// shatters `∅`, so its dimension is at least 0 with the empty witness.
pub fn vc_dimension(family: &SetFamily, cap: Option<usize>, budget: u64) -> Result<Dimension> {
    let n = family.ground().len();
    let cap = cap.unwrap_or(n);
    if family.is_empty() {
        return Ok(Dimension {
            value: 0,
            witness: Vec::new(),
            reached_cap: false,
        });
    }
    let sets = distinct_sets(family);
    // Points inside every member or outside every member are never shattered.
    let candidates: Vec<usize> = (0..n)
        .filter(|&p| {
            let inside = sets.iter().filter(|s| s.contains(p)).count();
            inside > 0 && inside < sets.len()
        })
        .collect();
    let limit = cap
        .min(candidates.len())
        .min(floor_log2(sets.len()))
        .min(MAX_SHATTER_TARGET);

    let mut best = Dimension {
        value: 0,
        witness: Vec::new(),
        reached_cap: cap == 0,
    };
    let mut spent: u64 = 0;
    let mut points = Vec::with_capacity(limit);
    for k in 1..=limit {
        let mut found = None;
        let mut over_budget = false;
        let _ = for_each_combination(candidates.len(), k, |idx| {
            spent += 1;
            if spent > budget {
                over_budget = true;
                return ControlFlow::Break(());
            }
            points.clear();
            points.extend(idx.iter().map(|&i| candidates[i]));
            if shatters_points(&sets, &points) {
                found = Some(points.clone());
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        if over_budget {
            return Err(VcError::Budget {
                bound: format!("VC search examining {k}-point subsets of {n} points"),
                limit: budget,
            });
        }
        match found {
            Some(w) => {
                best = Dimension {
                    value: k,
                    witness: w,
                    reached_cap: k == cap,
                }
            }
            // Shattering is hereditary: no k-set means no larger set either.
            None => break,
        }
    }
    Ok(best)
}

fn sign_label(signature: u32, k: usize) -> String {
    if k == 0 {
        return "X".into();
    }
    (0..k)
        .map(|j| if signature & (1 << j) != 0 { '+' } else { '-' })
        .collect()
}

fn signatures(family: &SetFamily, indices: &[usize]) -> Vec<u32> {
    let n = family.ground().len();
    let mut sig = vec![0u32; n];
    for (j, &i) in indices.iter().enumerate() {
        for p in family.set(i).ones() {
            sig[p] |= 1 << j;
        }
    }
    sig
}

fn check_join_indices(family: &SetFamily, indices: &[usize]) -> Result<()> {
    if indices.len() > MAX_JOIN_SETS {
        return Err(VcError::SizeGuard {
            what: "join index list",
            size: indices.len(),
            limit: MAX_JOIN_SETS,
        });
    }
    family.check_indices(indices)
}

/// The join `A_{i_1} ∨ … ∨ A_{i_k}`: nonempty atoms of the generated field.
///
/// Cell labels are sign patterns, one character per index in the given
/// order: `+` for `A_i`, `-` for its complement. Cells are ordered by their
/// first point.
pub fn join(family: &SetFamily, indices: &[usize]) -> Result<Partition> {
    check_join_indices(family, indices)?;
    let k = indices.len();
    let sig = signatures(family, indices);
    Ok(Partition::from_keys(&sig, |&s| sign_label(s, k)))
}

/// True iff the join of the indexed members has `2^k` cells.
pub fn boolean_independent(family: &SetFamily, indices: &[usize]) -> Result<bool> {
    Ok(join(family, indices)?.len() == 1usize << indices.len())
}

fn independent_signatures(family: &SetFamily, indices: &[usize], seen: &mut Vec<bool>) -> bool {
    let need = 1usize << indices.len();
    seen.clear();
    seen.resize(need, false);
    let mut hit = 0;
    for s in signatures(family, indices) {
        let s = s as usize;
        if !seen[s] {
            seen[s] = true;
            hit += 1;
            if hit == need {
                return true;
            }
        }
    }
    false
}

/// Largest `k ≤ cap` such that some `k` members are Boolean independent.
/// `cap` defaults to `min(|family|, 20)`.
pub fn dual_vc_dimension(family: &SetFamily, cap: Option<usize>, budget: u64) -> Result<Dimension> {
    let m = family.len();
    let cap = cap.unwrap_or(m.min(MAX_DUAL_CAP));
    if cap > MAX_DUAL_CAP {
        return Err(VcError::SizeGuard {
            what: "dual VC cap",
            size: cap,
            limit: MAX_DUAL_CAP,
        });
    }
    let ground = family.ground();
    // ∅, X and repeated members never appear in an independent family of size ≥ 1.
    let mut seen_sets = HashSet::new();
    let candidates: Vec<usize> = (0..m)
        .filter(|&i| {
            let s = family.set(i);
            !s.is_empty() && s.count() < ground.len() && seen_sets.insert(s)
        })
        .collect();
    // 2^k distinct atoms need at least 2^k points.
    let limit = cap.min(candidates.len()).min(floor_log2(ground.len()));

    let mut best = Dimension {
        value: 0,
        witness: Vec::new(),
        reached_cap: cap == 0,
    };
    let mut spent: u64 = 0;
    let mut chosen = Vec::with_capacity(limit);
    let mut scratch = Vec::new();
    for k in 1..=limit {
        let mut found = None;
        let mut over_budget = false;
        let _ = for_each_combination(candidates.len(), k, |idx| {
            spent += 1;
            if spent > budget {
                over_budget = true;
                return ControlFlow::Break(());
            }
            chosen.clear();
            chosen.extend(idx.iter().map(|&i| candidates[i]));
            if independent_signatures(family, &chosen, &mut scratch) {
                found = Some(chosen.clone());
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        if over_budget {
            return Err(VcError::Budget {
                bound: format!("Boolean-independence search over {k}-member subfamilies of {m}"),
                limit: budget,
            });
        }
        match found {
            Some(w) => {
                best = Dimension {
                    value: k,
                    witness: w,
                    reached_cap: k == cap,
                }
            }
            None => break,
        }
    }
    Ok(best)
}

/// The dual family `{D_x : x ∈ X}` with `D_x = {C : x ∈ C}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFamily {
    /// Ground = the original members (uniform weights); one member per
    /// distinct `D_x`, named after its first point.
    pub family: SetFamily,
    /// Number of original points whose `D_x` equals each member.
    pub multiplicity: Vec<usize>,
    /// Those original points.
    pub points: Vec<Vec<usize>>,
}

pub fn dual_family(family: &SetFamily) -> DualFamily {
    let m = family.len();
    let ids = family.members().iter().map(|c| c.name.clone()).collect();
    let ground = Arc::new(
        GroundSpace::uniform_with_ids(ids).expect("member names are unique within a family"),
    );
    let n = family.ground().len();
    let mut duals: Vec<PointSet> = vec![PointSet::empty(m); n];
    for (j, set) in family.sets().enumerate() {
        for p in set.ones() {
            duals[p].insert(j);
        }
    }
    let mut members: Vec<Member> = Vec::new();
    let mut multiplicity = Vec::new();
    let mut points: Vec<Vec<usize>> = Vec::new();
    let mut first: std::collections::HashMap<PointSet, usize> = Default::default();
    for (p, d) in duals.into_iter().enumerate() {
        match first.get(&d) {
            Some(&slot) => {
                multiplicity[slot] += 1;
                points[slot].push(p);
            }
            None => {
                first.insert(d.clone(), members.len());
                members.push(Member {
                    name: family.ground().id(p).to_string(),
                    set: d,
                });
                multiplicity.push(1);
                points.push(vec![p]);
            }
        }
    }
    DualFamily {
        family: SetFamily::new(ground, members).expect("dual members are over the member ground"),
        multiplicity,
        points,
    }
}
