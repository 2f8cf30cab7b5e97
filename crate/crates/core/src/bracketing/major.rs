//! Staircase brackets built from covers of the level-set families.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{
    check_bound_and_epsilon, set_bracket_cover, BracketCover, DiscreteFunctionClass,
    FunctionBracket, PartitionBrackets,
};
use crate::boundary::Strategy;
use crate::error::{Result, VcError};

/// Largest number of levels accepted.
pub const MAX_LEVELS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct MajorCover {
    /// Brackets of width at most `2ε`.
    pub cover: BracketCover<FunctionBracket>,
    /// `K = ⌈2M/ε⌉`.
    pub k: usize,
    /// `α_1, …, α_K`.
    pub levels: Vec<f64>,
    /// `|Θ_j|` for each level.
    pub level_cover_sizes: Vec<usize>,
    /// Bound on every level-set bracket, `ε/2M`.
    pub level_epsilon: f64,
    /// `Π_j |Θ_j|`, saturating.
    pub count_bound: u128,
}

/// Smallest integer `K` with `2M/K ≤ ε`, corrected for rounding in the
/// quotient.
pub fn level_count(bound: f64, epsilon: f64) -> usize {
    let span = 2.0 * bound;
    let mut k = (span / epsilon).ceil().max(1.0) as usize;
    while k > 1 && span / (k - 1) as f64 <= epsilon {
        k -= 1;
    }
    while span / k as f64 > epsilon {
        k += 1;
    }
    k
}

/// `M − 2Mc/K`; the same expression serves as `α_c` and as a staircase
/// value, so comparisons between the two are consistent.
fn level(bound: f64, k: usize, c: usize) -> f64 {
    bound - (2.0 * bound * c as f64) / k as f64
}

/// Covers a class bounded by `M` with `2ε`-brackets.
///
/// With `c_f(x) = #{j : f(x) ≤ α_j}` the staircase `f̃ = M − 2M c_f / K`
/// satisfies `f̃ − ε ≤ f ≤ f̃`. Each level family `{L_f(α_j)}` gets an
/// `ε/2M`-cover from a partition search; with `[g^j, h^j]` the level
/// brackets assigned to `f`,
///
/// `f̃_u = M − (2M/K) Σ_j g^j`, `f̃_l = M − (2M/K) Σ_j h^j − ε`.
///
/// The lower endpoint is additionally capped by the next staircase step,
/// which equals it in exact arithmetic and keeps coverage under rounding.
/// Functions with the same level-bracket choices share a bracket.
pub fn vc_major_brackets(
    class: &DiscreteFunctionClass,
    bound: f64,
    epsilon: f64,
    strategy: Strategy,
) -> Result<MajorCover> {
    check_bound_and_epsilon(bound, epsilon)?;
    if !class.bounded_by(bound) {
        return Err(VcError::Precondition(format!("class is not bounded by M = {bound}")));
    }
    let k = level_count(bound, epsilon);
    if k > MAX_LEVELS {
        return Err(VcError::SizeGuard {
            what: "level count 2M/epsilon",
            size: k,
            limit: MAX_LEVELS,
        });
    }
    let levels: Vec<f64> = (1..=k).map(|j| level(bound, k, j)).collect();
    let level_epsilon = epsilon / (2.0 * bound);
    let max_cells = class.ground().len().max(2);

    let level_covers: Vec<PartitionBrackets> = levels
        .par_iter()
        .map(|&alpha| set_bracket_cover(&class.level_family(alpha), level_epsilon, strategy, max_cells))
        .collect::<Result<_>>()?;

    let n = class.ground().len();
    let mut brackets = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut assignment = Vec::with_capacity(class.len());
    for i in 0..class.len() {
        let signature: Vec<usize> = level_covers.iter().map(|c| c.cover.assignment[i]).collect();
        if let Some(&slot) = index.get(&signature) {
            assignment.push(slot);
            continue;
        }
        let mut lower_count = vec![0usize; n];
        let mut upper_count = vec![0usize; n];
        for (cover, &b) in level_covers.iter().zip(&signature) {
            let bracket = &cover.cover.brackets[b];
            for x in bracket.lower.ones() {
                lower_count[x] += 1;
            }
            for x in bracket.upper.ones() {
                upper_count[x] += 1;
            }
        }
        let upper = lower_count.iter().map(|&c| level(bound, k, c)).collect();
        let lower = upper_count
            .iter()
            .map(|&c| (level(bound, k, c) - epsilon).min(level(bound, k, c + 1)))
            .collect();
        brackets.push(FunctionBracket::new(class.ground(), lower, upper)?);
        index.insert(signature, brackets.len() - 1);
        assignment.push(brackets.len() - 1);
    }

    let level_cover_sizes: Vec<usize> = level_covers.iter().map(|c| c.cover.len()).collect();
    let count_bound = level_cover_sizes
        .iter()
        .fold(1u128, |acc, &s| acc.saturating_mul(s as u128));
    Ok(MajorCover {
        cover: BracketCover {
            brackets,
            assignment,
            epsilon: 2.0 * epsilon,
        },
        k,
        levels,
        level_cover_sizes,
        level_epsilon,
        count_bound,
    })
}
