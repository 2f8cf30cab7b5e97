//! Set-class brackets: the partition construction and exact minimum covers.

use std::collections::HashMap;

use super::{BracketCover, SetBracket, WIDTH_TOLERANCE};
use crate::boundary::{approximate, Strategy};
use crate::error::{Result, VcError};
use crate::space::{Cell, Partition, PointSet, SetFamily};

/// Largest family accepted by [`bracketing_number_exact`].
pub const EXACT_MAX_MEMBERS: usize = 12;
/// Largest ground accepted by [`bracketing_number_exact`].
pub const EXACT_MAX_POINTS: usize = 10;

/// Brackets read off a partition, with the cleaned partition `π'` they were
/// read from.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionBrackets {
    pub cover: BracketCover<SetBracket>,
    pub refined: Partition,
}

/// Corollary-style cover: clean every cell of `partition` so it lies inside
/// or outside each member up to measure zero, then bracket each member `C`
/// by `C_l = ∪{B ⊆ C}` and `C_u = ∪{B : B ∩ C ≠ ∅}`.
///
/// Cells are first restricted to the positive-weight support; the
/// zero-weight points form the extra cell `B0` (omitted when empty). On the
/// support the measure-zero removals never fire, but they are applied as
/// written. Identical brackets are merged; the advertised bound is the
/// largest width.
pub fn bracket_cover_from_partition(
    family: &SetFamily,
    partition: &Partition,
) -> Result<PartitionBrackets> {
    let ground = family.ground();
    partition.check_ground(ground)?;
    let n = ground.len();
    let support = ground.support();

    let mut cells: Vec<Cell> = partition
        .cells()
        .iter()
        .map(|c| Cell {
            label: c.label.clone(),
            set: c.set.intersection(&support),
        })
        .filter(|c| !c.set.is_empty())
        .collect();
    for cell in &mut cells {
        for c in family.sets() {
            if !ground.is_positive(&cell.set.intersection(c)) {
                cell.set.difference_with(c);
            }
            if !ground.is_positive(&cell.set.difference(c)) {
                cell.set.intersect_with(c);
            }
        }
    }
    cells.retain(|c| !c.set.is_empty());
    let mut covered = PointSet::empty(n);
    for c in &cells {
        covered.union_with(&c.set);
    }
    let null = covered.complement();
    if !null.is_empty() {
        cells.insert(
            0,
            Cell {
                label: "B0".into(),
                set: null,
            },
        );
    }
    let refined = Partition::new(n, cells)
        .map_err(|e| VcError::Invariant(format!("cleaned cells are not a partition: {e}")))?;

    let mut brackets: Vec<SetBracket> = Vec::new();
    let mut index: HashMap<(PointSet, PointSet), usize> = HashMap::new();
    let mut assignment = Vec::with_capacity(family.len());
    for c in family.sets() {
        let mut lower = PointSet::empty(n);
        let mut upper = PointSet::empty(n);
        for cell in refined.cells() {
            if cell.set.is_subset(c) {
                lower.union_with(&cell.set);
            }
            if cell.set.intersects(c) {
                upper.union_with(&cell.set);
            }
        }
        let slot = *index.entry((lower.clone(), upper.clone())).or_insert_with(|| {
            brackets.push(SetBracket::new(ground, lower, upper).expect("C_l ⊆ C ⊆ C_u"));
            brackets.len() - 1
        });
        assignment.push(slot);
    }
    let epsilon = brackets.iter().map(|b| b.width).fold(0.0, f64::max);
    Ok(PartitionBrackets {
        cover: BracketCover {
            brackets,
            assignment,
            epsilon,
        },
        refined,
    })
}

/// An `epsilon`-cover of `family` through a partition found by
/// [`approximate`] with at most `max_cells` cells.
pub fn set_bracket_cover(
    family: &SetFamily,
    epsilon: f64,
    strategy: Strategy,
    max_cells: usize,
) -> Result<PartitionBrackets> {
    let found = approximate(family, epsilon, strategy, max_cells)?;
    if !found.success {
        return Err(VcError::Budget {
            bound: format!(
                "no partition within {max_cells} cells reaches boundary {epsilon} (best {})",
                found.achieved
            ),
            limit: max_cells as u64,
        });
    }
    bracket_cover_from_partition(family, &found.partition)
}

/// Minimum number of `ε`-brackets covering a small family.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketingNumber {
    pub value: usize,
    /// False when the node budget ran out; `value` is then an upper bound.
    pub optimal: bool,
    pub brackets: Vec<SetBracket>,
    pub assignment: Vec<usize>,
    pub nodes: u64,
}

struct CoverSearch<'a> {
    /// Maximal feasible groups, as member bitmasks.
    groups: &'a [u32],
    largest: u32,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    best: Vec<u32>,
    path: Vec<u32>,
}

impl CoverSearch<'_> {
    fn search(&mut self, uncovered: u32) {
        if uncovered == 0 {
            if self.path.len() < self.best.len() {
                self.best = self.path.clone();
            }
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let needed = uncovered.count_ones().div_ceil(self.largest) as usize;
        if self.path.len() + needed >= self.best.len() {
            return;
        }
        let pivot = uncovered & uncovered.wrapping_neg();
        for &g in self.groups {
            if g & pivot == 0 {
                continue;
            }
            self.path.push(g);
            self.search(uncovered & !g);
            self.path.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// Exact `N_[](ε, C, μ)` by branch and bound.
///
/// A bracket covering the members `S` can always be shrunk to
/// `[∩S, ∪S]` without growing, so the candidates are the member groups `S`
/// with `μ(∪S ∖ ∩S) ≤ ε`. Only maximal groups are branched on, pivoting on
/// the lowest uncovered member; the bound is the uncovered count over the
/// largest group size. The search starts from a greedy cover.
pub fn bracketing_number_exact(
    family: &SetFamily,
    epsilon: f64,
    budget: u64,
) -> Result<BracketingNumber> {
    let m = family.len();
    let ground = family.ground();
    if m > EXACT_MAX_MEMBERS {
        return Err(VcError::SizeGuard {
            what: "family for exact bracketing",
            size: m,
            limit: EXACT_MAX_MEMBERS,
        });
    }
    if ground.len() > EXACT_MAX_POINTS {
        return Err(VcError::SizeGuard {
            what: "ground for exact bracketing",
            size: ground.len(),
            limit: EXACT_MAX_POINTS,
        });
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(VcError::Domain(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    if m == 0 {
        return Ok(BracketingNumber {
            value: 0,
            optimal: true,
            brackets: Vec::new(),
            assignment: Vec::new(),
            nodes: 0,
        });
    }

    let n = ground.len();
    let masks = 1usize << m;
    let mut inter = vec![PointSet::full(n); masks];
    let mut union = vec![PointSet::empty(n); masks];
    let mut feasible = vec![false; masks];
    for mask in 1..masks {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        inter[mask] = inter[rest].intersection(family.set(low));
        union[mask] = union[rest].union(family.set(low));
        feasible[mask] =
            ground.measure(&union[mask].difference(&inter[mask])) <= epsilon + WIDTH_TOLERANCE;
    }
    let mut groups: Vec<u32> = (1..masks)
        .filter(|&mask| {
            feasible[mask] && (0..m).all(|j| mask & (1 << j) != 0 || !feasible[mask | (1 << j)])
        })
        .map(|mask| mask as u32)
        .collect();
    groups.sort_by_key(|g| (std::cmp::Reverse(g.count_ones()), *g));
    let largest = groups[0].count_ones();

    let all = (masks - 1) as u32;
    let mut greedy = Vec::new();
    let mut left = all;
    while left != 0 {
        let g = *groups
            .iter()
            .max_by_key(|g| ((*g & left).count_ones(), std::cmp::Reverse(**g)))
            .expect("singletons are always feasible");
        greedy.push(g);
        left &= !g;
    }
    // One more than the greedy size so the greedy cover itself is accepted.
    let mut search = CoverSearch {
        groups: &groups,
        largest,
        budget,
        nodes: 0,
        exhausted: false,
        best: greedy.clone(),
        path: Vec::new(),
    };
    search.best.push(0);
    search.search(all);
    let chosen = if search.best.len() > greedy.len() {
        greedy
    } else {
        search.best.clone()
    };

    let brackets: Vec<SetBracket> = chosen
        .iter()
        .map(|&g| {
            let g = g as usize;
            SetBracket::new(ground, inter[g].clone(), union[g].clone()).expect("∩S ⊆ ∪S")
        })
        .collect();
    let assignment = (0..m)
        .map(|j| chosen.iter().position(|g| g & (1 << j) != 0).unwrap())
        .collect();
    Ok(BracketingNumber {
        value: chosen.len(),
        optimal: !search.exhausted,
        brackets,
        assignment,
        nodes: search.nodes,
    })
}
