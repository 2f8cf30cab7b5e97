//! Finite weighted ground spaces, subsets as bit vectors, set families and
//! partitions.
//!
//! Everything else in the crate is phrased in terms of these types. A
//! [`GroundSpace`] is an ordered list of point ids with a probability weight
//! per point; subsets of it are [`PointSet`] bit vectors over the same order.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{Result, VcError};

/// Tolerance used when checking that a weight vector sums to one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// A subset of a ground space, stored as a bit vector over its point order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet(FixedBitSet);

impl PointSet {
    pub fn empty(universe: usize) -> Self {
        PointSet(FixedBitSet::with_capacity(universe))
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        PointSet(bits)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut set = Self::empty(universe);
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// Builds the set `{i : pred(i)}`.
    pub fn from_fn(universe: usize, pred: impl Fn(usize) -> bool) -> Self {
        Self::from_indices(universe, (0..universe).filter(|&i| pred(i)))
    }

    /// Size of the underlying ground, not the number of elements.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    /// Panics if `i` is outside the universe.
    pub fn insert(&mut self, i: usize) {
        self.0.insert(i);
    }

    pub fn remove(&mut self, i: usize) {
        self.0.set(i, false);
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut out = self.0.clone();
        out.union_with(&other.0);
        PointSet(out)
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut out = self.0.clone();
        out.intersect_with(&other.0);
        PointSet(out)
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        let mut out = self.0.clone();
        out.difference_with(&other.0);
        PointSet(out)
    }

    pub fn complement(&self) -> PointSet {
        let mut out = self.0.clone();
        out.toggle_range(..);
        PointSet(out)
    }

    pub fn union_with(&mut self, other: &PointSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &PointSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn difference_with(&mut self, other: &PointSet) {
        self.0.difference_with(&other.0);
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersects(&self, other: &PointSet) -> bool {
        !self.0.is_disjoint(&other.0)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

/// A finite probability space: ordered point ids with nonnegative weights
/// summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundSpace {
    ids: Vec<String>,
    weights: Vec<f64>,
    index: HashMap<String, usize>,
}

impl GroundSpace {
    /// Validates and normalizes. Weights are divided by their sum unless the
    /// sum is already one up to rounding (`1e-12`); probabilities are then
    /// kept verbatim, so dyadic inputs stay exact and reloading is lossless.
    pub fn new(ids: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if ids.len() != weights.len() {
            return Err(VcError::Domain(format!(
                "{} point ids but {} weights",
                ids.len(),
                weights.len()
            )));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(VcError::Domain(format!("duplicate point id `{id}`")));
            }
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(VcError::Domain(format!(
                "weight of point `{}` is {w}; weights must be finite and nonnegative",
                ids[i]
            )));
        }
        let mut weights = weights;
        if !ids.is_empty() {
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return Err(VcError::Domain("weights sum to zero".into()));
            }
            if (total - 1.0).abs() > 1e-12 {
                for w in &mut weights {
                    *w /= total;
                }
            }
        }
        Ok(GroundSpace {
            ids,
            weights,
            index,
        })
    }

    /// `n` points `p0..p{n-1}` with weight `1/n` each.
    pub fn uniform(n: usize) -> Self {
        let ids = (0..n).map(|i| format!("p{i}")).collect();
        let weights = vec![1.0 / n as f64; n];
        GroundSpace::new(ids, weights).expect("uniform ground is valid")
    }

    /// Like [`GroundSpace::uniform`] but with caller-chosen ids.
    pub fn uniform_with_ids(ids: Vec<String>) -> Result<Self> {
        let n = ids.len();
        GroundSpace::new(ids, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Exact weighted sum in point order.
    pub fn measure(&self, set: &PointSet) -> f64 {
        set.ones().map(|i| self.weights[i]).sum::<f64>().max(0.0)
    }

    /// `μ(set) > 0`. Zero-weight points never make a set positive.
    pub fn is_positive(&self, set: &PointSet) -> bool {
        set.ones().any(|i| self.weights[i] > 0.0)
    }

    pub fn empty_set(&self) -> PointSet {
        PointSet::empty(self.len())
    }

    pub fn full_set(&self) -> PointSet {
        PointSet::full(self.len())
    }

    /// Points of positive weight.
    pub fn support(&self) -> PointSet {
        PointSet::from_fn(self.len(), |i| self.weights[i] > 0.0)
    }

    /// Resolves point ids to a [`PointSet`].
    pub fn subset<S: AsRef<str>>(&self, ids: &[S]) -> Result<PointSet> {
        let mut set = self.empty_set();
        for id in ids {
            let id = id.as_ref();
            let i = self
                .index_of(id)
                .ok_or_else(|| VcError::Domain(format!("unknown point id `{id}`")))?;
            set.insert(i);
        }
        Ok(set)
    }

    /// Point ids of a set, in ground order.
    pub fn ids_of(&self, set: &PointSet) -> Vec<String> {
        set.ones().map(|i| self.ids[i].clone()).collect()
    }

    fn check_set(&self, set: &PointSet) -> Result<()> {
        if set.universe() != self.len() {
            return Err(VcError::Domain(format!(
                "set over a universe of {} points used with a ground of {} points",
                set.universe(),
                self.len()
            )));
        }
        Ok(())
    }
}

/// A named member of a [`SetFamily`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub name: String,
    pub set: PointSet,
}

/// An ordered, named collection of subsets of one ground space.
///
/// Member order is significant: `C_1, C_2, …` is the member order, and
/// strategies such as join-prefix refine along it.
#[derive(Clone, Debug, PartialEq)]
pub struct SetFamily {
    ground: Arc<GroundSpace>,
    members: Vec<Member>,
}

impl SetFamily {
    pub fn new(ground: Arc<GroundSpace>, members: Vec<Member>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(members.len());
        for (i, m) in members.iter().enumerate() {
            ground.check_set(&m.set)?;
            if seen.insert(m.name.as_str(), i).is_some() {
                return Err(VcError::Domain(format!("duplicate member name `{}`", m.name)));
            }
        }
        Ok(SetFamily { ground, members })
    }

    /// Members named `C1, C2, …` in order.
    pub fn from_sets<I: IntoIterator<Item = PointSet>>(
        ground: Arc<GroundSpace>,
        sets: I,
    ) -> Result<Self> {
        let members = sets
            .into_iter()
            .enumerate()
            .map(|(i, set)| Member {
                name: format!("C{}", i + 1),
                set,
            })
            .collect();
        SetFamily::new(ground, members)
    }

    pub fn ground(&self) -> &GroundSpace {
        &self.ground
    }

    pub fn ground_arc(&self) -> &Arc<GroundSpace> {
        &self.ground
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn set(&self, i: usize) -> &PointSet {
        &self.members[i].set
    }

    pub fn name(&self, i: usize) -> &str {
        &self.members[i].name
    }

    pub fn sets(&self) -> impl Iterator<Item = &PointSet> + '_ {
        self.members.iter().map(|m| &m.set)
    }

    /// The members at `indices`, in the given order.
    pub fn subfamily(&self, indices: &[usize]) -> Result<SetFamily> {
        let members = indices
            .iter()
            .map(|&i| {
                self.members
                    .get(i)
                    .cloned()
                    .ok_or_else(|| self.bad_index(i))
            })
            .collect::<Result<Vec<_>>>()?;
        SetFamily::new(self.ground.clone(), members)
    }

    /// The family followed by the complement of each member (`name^c`).
    pub fn with_complements(&self) -> SetFamily {
        let mut members = self.members.clone();
        members.extend(self.members.iter().map(|m| Member {
            name: format!("{}^c", m.name),
            set: m.set.complement(),
        }));
        SetFamily {
            ground: self.ground.clone(),
            members,
        }
    }

    pub(crate) fn check_indices(&self, indices: &[usize]) -> Result<()> {
        match indices.iter().find(|&&i| i >= self.len()) {
            Some(&i) => Err(self.bad_index(i)),
            None => Ok(()),
        }
    }

    fn bad_index(&self, i: usize) -> VcError {
        VcError::Domain(format!(
            "member index {i} out of range for a family of {} members",
            self.len()
        ))
    }
}

/// A labeled cell of a [`Partition`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub label: String,
    pub set: PointSet,
}

/// A cover of the ground by pairwise disjoint, nonempty cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    universe: usize,
    cells: Vec<Cell>,
}

impl Partition {
    pub fn new(universe: usize, cells: Vec<Cell>) -> Result<Self> {
        let mut covered = PointSet::empty(universe);
        for cell in &cells {
            if cell.set.universe() != universe {
                return Err(VcError::Domain(format!(
                    "cell `{}` is over {} points, expected {universe}",
                    cell.label,
                    cell.set.universe()
                )));
            }
            if cell.set.is_empty() {
                return Err(VcError::Domain(format!("cell `{}` is empty", cell.label)));
            }
            if covered.intersects(&cell.set) {
                return Err(VcError::Domain(format!(
                    "cell `{}` overlaps an earlier cell",
                    cell.label
                )));
            }
            covered.union_with(&cell.set);
        }
        if covered.count() != universe {
            return Err(VcError::Domain(format!(
                "cells cover {} of {universe} points",
                covered.count()
            )));
        }
        Ok(Partition { universe, cells })
    }

    /// The one-cell partition `{X}` (no cells on an empty ground).
    pub fn trivial(ground: &GroundSpace) -> Self {
        let cells = if ground.is_empty() {
            Vec::new()
        } else {
            vec![Cell {
                label: "X".into(),
                set: ground.full_set(),
            }]
        };
        Partition {
            universe: ground.len(),
            cells,
        }
    }

    /// One cell per point, labeled by point id.
    pub fn singletons(ground: &GroundSpace) -> Self {
        let cells = (0..ground.len())
            .map(|i| Cell {
                label: ground.id(i).to_string(),
                set: PointSet::from_indices(ground.len(), [i]),
            })
            .collect();
        Partition {
            universe: ground.len(),
            cells,
        }
    }

    /// Builds the partition induced by a point-to-key map; cells appear in
    /// order of their first point.
    pub fn from_keys<K: Eq + std::hash::Hash + Clone>(
        keys: &[K],
        label: impl Fn(&K) -> String,
    ) -> Self {
        let universe = keys.len();
        let mut slot: HashMap<K, usize> = HashMap::new();
        let mut cells: Vec<Cell> = Vec::new();
        for (i, key) in keys.iter().enumerate() {
            let c = *slot.entry(key.clone()).or_insert_with(|| {
                cells.push(Cell {
                    label: label(key),
                    set: PointSet::empty(universe),
                });
                cells.len() - 1
            });
            cells[c].set.insert(i);
        }
        Partition { universe, cells }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell index of every point.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.universe];
        for (c, cell) in self.cells.iter().enumerate() {
            for i in cell.set.ones() {
                out[i] = c;
            }
        }
        out
    }

    /// True when every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let owner = coarser.assignment();
        self.cells.iter().all(|cell| {
            let mut it = cell.set.ones();
            let first = it.next().map(|i| owner[i]);
            it.all(|i| Some(owner[i]) == first)
        })
    }

    /// Common refinement: the nonempty pairwise intersections.
    pub fn meet(&self, other: &Partition) -> Partition {
        let a = self.assignment();
        let b = other.assignment();
        let keys: Vec<(usize, usize)> = a.into_iter().zip(b).collect();
        Partition::from_keys(&keys, |&(x, y)| {
            format!("{}&{}", self.cells[x].label, other.cells[y].label)
        })
    }

    pub(crate) fn check_ground(&self, ground: &GroundSpace) -> Result<()> {
        if self.universe != ground.len() {
            return Err(VcError::Domain(format!(
                "partition over {} points used with a ground of {} points",
                self.universe,
                ground.len()
            )));
        }
        Ok(())
    }
}
