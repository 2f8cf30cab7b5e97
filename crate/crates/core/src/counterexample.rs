//! Disjoint consecutive intervals `C_n = [s_{n-1}, s_n)` whose prefix joins
//! never approximate the family.
//!
//! The interval picture on `[0, 1]` is materialized as `N + 1` weighted
//! atoms: atom `n` carries mass `a_n` and stands for `C_n`, and a final
//! `rest` atom carries `1 − s_N` and stands for `[s_N, 1]`. Every set in
//! play is a union of atoms, so measures are exact sums. With the default
//! dyadic masses `a_n = 2^{-(n+1)}` they are exact in binary floating point.

use std::sync::Arc;

use crate::error::{Result, VcError};
use crate::space::{GroundSpace, Member, Partition, PointSet, SetFamily};
use crate::system::join;

#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleInstance {
    pub depth: usize,
    /// `a_1, …, a_N`.
    pub masses: Vec<f64>,
    /// `s_0, …, s_N`.
    pub partial_sums: Vec<f64>,
    /// `{C_1, …, C_N}` over the `N + 1` atoms.
    pub family: SetFamily,
}

/// Default mass of the `n`-th interval (1-based).
pub fn default_mass(n: usize) -> f64 {
    0.5f64.powi(n as i32 + 1)
}

pub fn make_counterexample(depth: usize, masses: Option<&[f64]>) -> Result<CounterexampleInstance> {
    if depth == 0 {
        return Err(VcError::Domain("counterexample depth must be at least 1".into()));
    }
    let masses: Vec<f64> = match masses {
        Some(m) if m.len() != depth => {
            return Err(VcError::Domain(format!(
                "{} masses given for depth {depth}",
                m.len()
            )))
        }
        Some(m) => m.to_vec(),
        None => (1..=depth).map(default_mass).collect(),
    };
    if let Some(bad) = masses.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(VcError::Domain(format!("masses must be positive, got {bad}")));
    }
    let mut partial_sums = Vec::with_capacity(depth + 1);
    partial_sums.push(0.0);
    for a in &masses {
        partial_sums.push(partial_sums.last().unwrap() + a);
    }
    let total = partial_sums[depth];
    if total >= 1.0 {
        return Err(VcError::Domain(format!(
            "masses must sum to less than 1, got {total}"
        )));
    }

    let mut ids: Vec<String> = (1..=depth).map(|n| format!("a{n}")).collect();
    ids.push("rest".into());
    let mut weights = masses.clone();
    weights.push(1.0 - total);
    let ground = Arc::new(GroundSpace::new(ids, weights)?);
    let members = (0..depth)
        .map(|n| Member {
            name: format!("C{}", n + 1),
            set: PointSet::from_indices(depth + 1, [n]),
        })
        .collect();
    let family = SetFamily::new(ground, members)?;
    Ok(CounterexampleInstance {
        depth,
        masses,
        partial_sums,
        family,
    })
}

impl CounterexampleInstance {
    pub fn ground(&self) -> &GroundSpace {
        self.family.ground()
    }

    /// `1 − s_N`.
    pub fn remainder_weight(&self) -> f64 {
        self.ground().weight(self.depth)
    }

    /// `s = s_N`.
    pub fn total_mass(&self) -> f64 {
        self.partial_sums[self.depth]
    }

    /// `A_n`: the cell of `C_1 ∨ … ∨ C_n` standing for `[s_n, 1]`, i.e.
    /// atoms `n+1..N` together with the remainder.
    pub fn tail_cell(&self, n: usize) -> PointSet {
        PointSet::from_fn(self.depth + 1, |p| p >= n)
    }

    /// `C_1 ∨ … ∨ C_n`.
    pub fn prefix_join(&self, n: usize) -> Result<Partition> {
        if n > self.depth {
            return Err(VcError::Domain(format!(
                "prefix length {n} exceeds depth {}",
                self.depth
            )));
        }
        let indices: Vec<usize> = (0..n).collect();
        join(&self.family, &indices)
    }
}
