//! Brackets from covers of subgraphs on a discretized value axis.
//!
//! Functions are rescaled to `u = (f + M)/2M ∈ [0, 1]`. The value axis is
//! cut into `T` cells `[t/T, (t+1)/T)` and the product ground `X × {0..T}`
//! carries `ν(x, t) = μ(x)/T`. Point `(x, t)` has index `x·T + t` and id
//! `x@t`. The graph of `u` is `G_u = {(x, t) : t/T < u(x)}`; for grid-valued
//! `v` the column of `G_v` over `x` has `T·v(x)` cells, so
//! `Σ_x μ(x)(h − g)(x) = ν(G_h ∖ G_g)`.

use std::collections::HashMap;
use std::sync::Arc;

use super::{
    check_bound_and_epsilon, set_bracket_cover, BracketCover, DiscreteFunctionClass,
    FunctionBracket,
};
use crate::boundary::Strategy;
use crate::error::{Result, VcError};
use crate::space::{GroundSpace, Member, PointSet, SetFamily};

/// Largest product ground accepted.
pub const MAX_PRODUCT_POINTS: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct GraphCover {
    /// Brackets in the class's units, width at most `Mε + 2M/T`.
    pub cover: BracketCover<FunctionBracket>,
    /// The same brackets on the rescaled axis, width at most `ε/2 + 1/T`.
    pub rescaled: BracketCover<FunctionBracket>,
    pub s_levels: usize,
    /// Bound on the subgraph brackets, `ε/2`.
    pub set_epsilon: f64,
    /// `ν(B ∖ A)` of the subgraph bracket behind each rescaled bracket.
    pub set_widths: Vec<f64>,
    pub product: Arc<GroundSpace>,
}

/// `G_u` on the product ground for rescaled values `u`.
pub fn discrete_graph(rescaled: &[f64], s_levels: usize) -> PointSet {
    PointSet::from_fn(rescaled.len() * s_levels, |i| {
        let (x, t) = (i / s_levels, i % s_levels);
        (t as f64) / (s_levels as f64) < rescaled[x]
    })
}

fn product_ground(ground: &GroundSpace, s_levels: usize) -> Result<GroundSpace> {
    let t = s_levels as f64;
    let mut ids = Vec::with_capacity(ground.len() * s_levels);
    let mut weights = Vec::with_capacity(ground.len() * s_levels);
    for x in 0..ground.len() {
        for s in 0..s_levels {
            ids.push(format!("{}@{s}", ground.id(x)));
            weights.push(ground.weight(x) / t);
        }
    }
    GroundSpace::new(ids, weights)
}

/// Covers a class bounded by `M` through its subgraphs on a `T`-level grid.
///
/// For each subgraph bracket `[A, B]`, `g(x)` is the top edge of the highest
/// cell of `A` over `x` minus one step (0 when the column is empty) and
/// `h(x)` is the lower edge of the first cell missing from `B` (1 when the
/// column is full). Every covered `u` then has `g ≤ u ≤ h`, and per column
/// `T(h − g)` exceeds the count of `B ∖ A` cells by at most one.
pub fn vc_graph_brackets(
    class: &DiscreteFunctionClass,
    bound: f64,
    epsilon: f64,
    s_levels: usize,
    strategy: Strategy,
) -> Result<GraphCover> {
    check_bound_and_epsilon(bound, epsilon)?;
    if !class.bounded_by(bound) {
        return Err(VcError::Precondition(format!("class is not bounded by M = {bound}")));
    }
    let needed = (2.0 / epsilon).ceil();
    if (s_levels as f64) < needed {
        return Err(VcError::Precondition(format!(
            "{s_levels} value levels given, epsilon {epsilon} needs at least {needed}"
        )));
    }
    let n = class.ground().len();
    if n.saturating_mul(s_levels) > MAX_PRODUCT_POINTS {
        return Err(VcError::SizeGuard {
            what: "product ground",
            size: n.saturating_mul(s_levels),
            limit: MAX_PRODUCT_POINTS,
        });
    }

    let span = 2.0 * bound;
    let rescaled: Vec<Vec<f64>> = class
        .functions()
        .iter()
        .map(|f| f.values.iter().map(|v| ((v + bound) / span).clamp(0.0, 1.0)).collect())
        .collect();
    let product = Arc::new(product_ground(class.ground(), s_levels)?);
    let graphs = SetFamily::new(
        product.clone(),
        class
            .functions()
            .iter()
            .zip(&rescaled)
            .map(|(f, u)| Member {
                name: f.name.clone(),
                set: discrete_graph(u, s_levels),
            })
            .collect(),
    )?;
    let set_epsilon = epsilon / 2.0;
    let sets = set_bracket_cover(&graphs, set_epsilon, strategy, product.len().max(2))?.cover;

    let t = s_levels as f64;
    let mut members_of = vec![Vec::new(); sets.len()];
    for (i, &b) in sets.assignment.iter().enumerate() {
        members_of[b].push(i);
    }

    let mut rescaled_brackets = Vec::new();
    let mut brackets = Vec::new();
    let mut set_widths = Vec::new();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut slot_of = Vec::with_capacity(sets.len());
    for (b, bracket) in sets.brackets.iter().enumerate() {
        let mut g = vec![0.0; n];
        let mut h = vec![1.0; n];
        for x in 0..n {
            let column = x * s_levels..(x + 1) * s_levels;
            if let Some(top) = column.clone().rev().find(|&i| bracket.lower.contains(i)) {
                g[x] = (top - x * s_levels) as f64 / t;
            }
            if let Some(gap) = column.clone().find(|&i| !bracket.upper.contains(i)) {
                h[x] = (gap - x * s_levels) as f64 / t;
            }
            g[x] = f64::min(g[x], h[x]);
        }
        let key: Vec<u64> = g.iter().chain(&h).map(|v| v.to_bits()).collect();
        if let Some(&slot) = index.get(&key) {
            slot_of.push(slot);
            continue;
        }
        // Un-rescaling can round a member's value past an endpoint; the
        // endpoints are widened to the members themselves when it does.
        let mut lower: Vec<f64> = g.iter().map(|v| span * v - bound).collect();
        let mut upper: Vec<f64> = h.iter().map(|v| span * v - bound).collect();
        for &i in &members_of[b] {
            for (x, v) in class.functions()[i].values.iter().enumerate() {
                lower[x] = lower[x].min(*v);
                upper[x] = upper[x].max(*v);
            }
        }
        rescaled_brackets.push(FunctionBracket::new(class.ground(), g, h)?);
        brackets.push(FunctionBracket::new(class.ground(), lower, upper)?);
        set_widths.push(bracket.width);
        index.insert(key, brackets.len() - 1);
        slot_of.push(brackets.len() - 1);
    }
    // Members sharing a rescaled bracket may have been widened separately.
    for (b, &slot) in slot_of.iter().enumerate() {
        for &i in &members_of[b] {
            let f = &class.functions()[i].values;
            if !brackets[slot].contains(f) {
                let widened = FunctionBracket::new(
                    class.ground(),
                    brackets[slot].lower.iter().zip(f).map(|(l, v)| l.min(*v)).collect(),
                    brackets[slot].upper.iter().zip(f).map(|(u, v)| u.max(*v)).collect(),
                )?;
                brackets[slot] = widened;
            }
        }
    }
    let assignment: Vec<usize> = sets.assignment.iter().map(|&b| slot_of[b]).collect();
    Ok(GraphCover {
        cover: BracketCover {
            brackets,
            assignment: assignment.clone(),
            epsilon: bound * epsilon + span / t,
        },
        rescaled: BracketCover {
            brackets: rescaled_brackets,
            assignment,
            epsilon: set_epsilon + 1.0 / t,
        },
        s_levels,
        set_epsilon,
        set_widths,
        product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracketing::{NamedFunction, WIDTH_TOLERANCE};

    fn class(values: &[Vec<f64>], bound: f64) -> DiscreteFunctionClass {
        let n = values[0].len();
        let c = DiscreteFunctionClass::new(
            Arc::new(GroundSpace::uniform(n)),
            values
                .iter()
                .enumerate()
                .map(|(i, v)| NamedFunction {
                    name: format!("f{i}"),
                    values: v.clone(),
                })
                .collect(),
            None,
        )
        .unwrap();
        assert!(c.bounded_by(bound));
        c
    }

    fn check(cover: &GraphCover, c: &DiscreteFunctionClass, epsilon: f64) {
        let t = cover.s_levels as f64;
        for (i, f) in c.functions().iter().enumerate() {
            assert!(cover.cover.brackets[cover.cover.assignment[i]].contains(&f.values));
        }
        for (b, r) in cover.rescaled.brackets.iter().enumerate() {
            assert!(r.width <= epsilon / 2.0 + 1.0 / t + WIDTH_TOLERANCE);
            assert!(r.width <= cover.set_widths[b] + 1.0 / t + WIDTH_TOLERANCE);
            let gh = discrete_graph(&r.upper, cover.s_levels);
            let gg = discrete_graph(&r.lower, cover.s_levels);
            let nu = cover.product.measure(&gh.difference(&gg));
            assert!((nu - r.width).abs() <= 1e-9, "ν {nu} vs width {}", r.width);
        }
    }

    #[test]
    fn graph_counts_cells_below_the_value() {
        let g = discrete_graph(&[0.0, 0.5, 1.0, 0.3], 4);
        let ones: Vec<usize> = g.ones().collect();
        assert_eq!(ones, vec![4, 5, 8, 9, 10, 11, 12, 13]);
    }

    #[test]
    fn single_function() {
        let c = class(&[vec![0.25, -0.5, 0.9]], 1.0);
        let cover = vc_graph_brackets(&c, 1.0, 0.25, 16, Strategy::Greedy).unwrap();
        assert_eq!(cover.cover.len(), 1);
        check(&cover, &c, 0.25);
    }

    #[test]
    fn constants_on_the_grid() {
        let t = 32;
        let values: Vec<Vec<f64>> = (0..=8).map(|i| vec![i as f64 / 8.0; 4]).collect();
        let c = class(&values, 1.0);
        let cover = vc_graph_brackets(&c, 1.0, 0.25, t, Strategy::Greedy).unwrap();
        check(&cover, &c, 0.25);
        for b in &cover.cover.brackets {
            assert!(b.width <= 2.0 * 0.25 + WIDTH_TOLERANCE);
        }
    }

    #[test]
    fn mixed_class_in_original_units() {
        let values: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..6).map(|x| (((i * 7 + x * 3) % 9) as f64 - 4.0) / 2.0).collect())
            .collect();
        let c = class(&values, 2.0);
        for strategy in [Strategy::Greedy, Strategy::JoinPrefix] {
            let cover = vc_graph_brackets(&c, 2.0, 0.2, 64, strategy).unwrap();
            check(&cover, &c, 0.2);
            for b in &cover.cover.brackets {
                assert!(b.width <= cover.cover.epsilon + WIDTH_TOLERANCE);
            }
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let c = class(&[vec![0.0]], 1.0);
        assert!(matches!(
            vc_graph_brackets(&c, 1.0, 0.1, 19, Strategy::Greedy),
            Err(VcError::Precondition(_))
        ));
        assert!(vc_graph_brackets(&c, 1.0, 0.1, 20, Strategy::Greedy).is_ok());
    }
}
