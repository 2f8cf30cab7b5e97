//! Extending covers of a truncated class to the whole class.

use super::{check_bound_and_epsilon, BracketCover, DiscreteFunctionClass, FunctionBracket, WIDTH_TOLERANCE};
use crate::error::{Result, VcError};

/// Extends an `ε`-cover of `F_M = {(f ∨ −M) ∧ M}` to a `3ε`-cover of the
/// class, given `∫_{F>M} F dμ < ε`.
///
/// Each `[g, h]` is clamped to `[−M, M]` and replaced off `{F > M}` by
/// itself and on `{F > M}` by `[−F, F]`, so that pointwise
///
/// `h′ − g′ = (h − g)·1{F ≤ M} + 2F·1{F > M}`.
///
/// `cover.assignment[i]` must be the bracket of the `i`-th function
/// truncated at `M`; the output keeps the same indexing.
pub fn truncate_and_extend(
    cover: &BracketCover<FunctionBracket>,
    class: &DiscreteFunctionClass,
    bound: f64,
    epsilon: f64,
) -> Result<BracketCover<FunctionBracket>> {
    check_bound_and_epsilon(bound, epsilon)?;
    let tail = class.tail_integral(bound);
    if !(tail < epsilon) {
        return Err(VcError::Precondition(format!(
            "envelope tail ∫_{{F>M}} F dμ = {tail} is not below epsilon {epsilon}"
        )));
    }
    if cover.assignment.len() != class.len() {
        return Err(VcError::Precondition(format!(
            "cover assigns {} members, class has {}",
            cover.assignment.len(),
            class.len()
        )));
    }
    if let Some(b) = cover.brackets.iter().find(|b| b.width > epsilon + WIDTH_TOLERANCE) {
        return Err(VcError::Precondition(format!(
            "input bracket of width {} exceeds epsilon {epsilon}",
            b.width
        )));
    }
    let truncated = class.truncated(bound);
    for (f, &b) in truncated.functions().iter().zip(&cover.assignment) {
        if !cover.brackets.get(b).is_some_and(|br| br.contains(&f.values)) {
            return Err(VcError::Precondition(format!(
                "truncated `{}` is not in its assigned bracket",
                f.name
            )));
        }
    }

    let envelope = class.envelope();
    let brackets = cover
        .brackets
        .iter()
        .map(|b| {
            let (lower, upper) = envelope
                .iter()
                .zip(b.lower.iter().zip(&b.upper))
                .map(|(&big, (&g, &h))| {
                    if big > bound {
                        (-big, big)
                    } else {
                        (g.clamp(-bound, bound), h.clamp(-bound, bound))
                    }
                })
                .unzip();
            FunctionBracket::new(class.ground(), lower, upper)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BracketCover {
        brackets,
        assignment: cover.assignment.clone(),
        epsilon: 3.0 * epsilon,
    })
}
