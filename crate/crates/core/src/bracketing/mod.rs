//! Constructive bracket covers.
//!
//! A bracket `[g, h]` is the set of functions `f` with `g ≤ f ≤ h`
//! pointwise; its width is `∫ (h − g) dμ`. For set classes the endpoints are
//! sets and the width is `μ(upper ∖ lower)`.
//!
//! - [`sets`]: covers read off a partition, and exact minimum cover sizes on
//!   small instances.
//! - [`major`]: level-set staircases for classes whose level-set families
//!   are VC.
//! - [`graph`]: subgraph covers on a discretized value axis.
//! - [`truncation`]: extending covers of a truncated class to an
//!   integrable envelope.

pub mod graph;
pub mod major;
pub mod sets;
pub mod truncation;

use std::sync::Arc;

use crate::boundary::Strategy;
use crate::error::{Result, VcError};
use crate::space::{GroundSpace, Member, PointSet, SetFamily};

pub use graph::{discrete_graph, vc_graph_brackets, GraphCover};
pub use major::{vc_major_brackets, MajorCover};
pub use sets::{
    bracket_cover_from_partition, bracketing_number_exact, set_bracket_cover, BracketingNumber,
    PartitionBrackets,
};
pub use truncation::truncate_and_extend;

/// Absolute tolerance for width comparisons.
pub const WIDTH_TOLERANCE: f64 = 1e-9;

/// A bracket whose endpoints are sets, `lower ⊆ upper`, with width
/// `μ(upper ∖ lower)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetBracket {
    pub lower: PointSet,
    pub upper: PointSet,
    pub width: f64,
}

impl SetBracket {
    pub fn new(ground: &GroundSpace, lower: PointSet, upper: PointSet) -> Result<Self> {
        if !lower.is_subset(&upper) {
            return Err(VcError::Domain("bracket lower set is not inside its upper set".into()));
        }
        let width = ground.measure(&upper.difference(&lower));
        Ok(SetBracket {
            lower,
            upper,
            width,
        })
    }

    pub fn contains(&self, set: &PointSet) -> bool {
        self.lower.is_subset(set) && set.is_subset(&self.upper)
    }
}

/// A bracket whose endpoints are value vectors over the ground points.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionBracket {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub width: f64,
}

impl FunctionBracket {
    pub fn new(ground: &GroundSpace, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != ground.len() || upper.len() != ground.len() {
            return Err(VcError::Domain("bracket length differs from ground size".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(VcError::Domain("bracket lower endpoint exceeds upper".into()));
        }
        let width = weighted_gap(ground, &lower, &upper);
        Ok(FunctionBracket {
            lower,
            upper,
            width,
        })
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        values.len() == self.lower.len()
            && values
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| l <= v && v <= u)
    }
}

/// `Σ_x μ(x) (upper(x) − lower(x))`.
pub(crate) fn weighted_gap(ground: &GroundSpace, lower: &[f64], upper: &[f64]) -> f64 {
    ground
        .weights()
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(w, (l, u))| w * (u - l))
        .sum()
}

/// Brackets plus the bracket index assigned to each class member.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketCover<B> {
    pub brackets: Vec<B>,
    pub assignment: Vec<usize>,
    /// Advertised bound on every bracket width.
    pub epsilon: f64,
}

impl<B> BracketCover<B> {
    pub fn len(&self) -> usize {
        self.brackets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.brackets.is_empty()
    }
}

impl BracketCover<FunctionBracket> {
    pub fn max_width(&self) -> f64 {
        self.brackets.iter().map(|b| b.width).fold(0.0, f64::max)
    }
}

/// A named value vector.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedFunction {
    pub name: String,
    pub values: Vec<f64>,
}

/// Finitely many functions on a ground, with an envelope `F ≥ |f|`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFunctionClass {
    ground: Arc<GroundSpace>,
    functions: Vec<NamedFunction>,
    envelope: Vec<f64>,
}

impl DiscreteFunctionClass {
    /// Without an explicit envelope the pointwise maximum of `|f|` is used.
    pub fn new(
        ground: Arc<GroundSpace>,
        functions: Vec<NamedFunction>,
        envelope: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = ground.len();
        let mut names = std::collections::HashSet::new();
        for f in &functions {
            if !names.insert(f.name.as_str()) {
                return Err(VcError::Domain(format!("duplicate function name `{}`", f.name)));
            }
            if f.values.len() != n {
                return Err(VcError::Domain(format!(
                    "function `{}` has {} values for {n} points",
                    f.name,
                    f.values.len()
                )));
            }
            if f.values.iter().any(|v| !v.is_finite()) {
                return Err(VcError::Domain(format!("function `{}` has a non-finite value", f.name)));
            }
        }
        let envelope = match envelope {
            Some(e) => {
                if e.len() != n {
                    return Err(VcError::Domain(format!("envelope has {} values for {n} points", e.len())));
                }
                if e.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(VcError::Domain("envelope must be finite and nonnegative".into()));
                }
                for f in &functions {
                    if let Some(x) = (0..n).find(|&x| f.values[x].abs() > e[x]) {
                        return Err(VcError::Domain(format!(
                            "envelope violated by `{}` at point `{}`",
                            f.name,
                            ground.id(x)
                        )));
                    }
                }
                e
            }
            None => (0..n)
                .map(|x| functions.iter().map(|f| f.values[x].abs()).fold(0.0, f64::max))
                .collect(),
        };
        Ok(DiscreteFunctionClass {
            ground,
            functions,
            envelope,
        })
    }

    pub fn ground(&self) -> &GroundSpace {
        &self.ground
    }

    pub fn ground_arc(&self) -> &Arc<GroundSpace> {
        &self.ground
    }

    pub fn functions(&self) -> &[NamedFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn envelope(&self) -> &[f64] {
        &self.envelope
    }

    /// Every member satisfies `|f| ≤ bound`.
    pub fn bounded_by(&self, bound: f64) -> bool {
        self.functions
            .iter()
            .all(|f| f.values.iter().all(|v| v.abs() <= bound))
    }

    /// `∫_{F > M} F dμ`.
    pub fn tail_integral(&self, bound: f64) -> f64 {
        self.envelope
            .iter()
            .zip(self.ground.weights())
            .filter(|(f, _)| **f > bound)
            .map(|(f, w)| f * w)
            .sum()
    }

    /// `F_M = {(f ∨ −M) ∧ M}` with envelope `F ∧ M`.
    pub fn truncated(&self, bound: f64) -> DiscreteFunctionClass {
        let functions = self
            .functions
            .iter()
            .map(|f| NamedFunction {
                name: f.name.clone(),
                values: f.values.iter().map(|v| v.clamp(-bound, bound)).collect(),
            })
            .collect();
        DiscreteFunctionClass {
            ground: self.ground.clone(),
            functions,
            envelope: self.envelope.iter().map(|e| e.min(bound)).collect(),
        }
    }

    /// `C_α = {L_f(α) : f}` with `L_f(α) = {x : f(x) ≤ α}`; members are named
    /// after their functions.
    pub fn level_family(&self, alpha: f64) -> SetFamily {
        let n = self.ground.len();
        let members = self
            .functions
            .iter()
            .map(|f| Member {
                name: f.name.clone(),
                set: PointSet::from_fn(n, |x| f.values[x] <= alpha),
            })
            .collect();
        SetFamily::new(self.ground.clone(), members).expect("function names are unique")
    }
}

/// Which bounded-class construction [`bracket_with_envelope`] runs before
/// extending to the envelope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionMode {
    Major,
    Graph { s_levels: usize },
}

/// An `ε`-bracket cover of the truncated class `F_M`, extended to a
/// `3ε`-cover of the whole class.
///
/// The inner level is chosen so the bounded cover is an `ε`-cover in the
/// class's own units: `ε/2` for the level-set construction, and for the
/// graph construction the level whose bound `Mδ + 2M/T` equals `ε`.
pub fn bracket_with_envelope(
    class: &DiscreteFunctionClass,
    bound: f64,
    epsilon: f64,
    mode: FunctionMode,
    strategy: Strategy,
) -> Result<BracketCover<FunctionBracket>> {
    let tail = class.tail_integral(bound);
    if !(tail < epsilon) {
        return Err(VcError::Precondition(format!(
            "envelope tail ∫_{{F>M}} F dμ = {tail} is not below epsilon {epsilon}"
        )));
    }
    let truncated = class.truncated(bound);
    let inner = match mode {
        FunctionMode::Major => vc_major_brackets(&truncated, bound, epsilon / 2.0, strategy)?.cover,
        FunctionMode::Graph { s_levels } => {
            let level = epsilon / bound - 2.0 / s_levels as f64;
            if !(level > 0.0) {
                return Err(VcError::Precondition(format!(
                    "{s_levels} value levels are too coarse for an epsilon {epsilon} cover at M = {bound}"
                )));
            }
            vc_graph_brackets(&truncated, bound, level, s_levels, strategy)?.cover
        }
    };
    truncate_and_extend(&inner, class, bound, epsilon)
}

pub(crate) fn check_bound_and_epsilon(bound: f64, epsilon: f64) -> Result<()> {
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(VcError::Domain(format!("M must be positive and finite, got {bound}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(VcError::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(values: &[&[f64]], envelope: Option<Vec<f64>>) -> Result<DiscreteFunctionClass> {
        let n = values.first().map_or(0, |v| v.len());
        DiscreteFunctionClass::new(
            Arc::new(GroundSpace::uniform(n)),
            values
                .iter()
                .enumerate()
                .map(|(i, v)| NamedFunction {
                    name: format!("f{i}"),
                    values: v.to_vec(),
                })
                .collect(),
            envelope,
        )
    }

    #[test]
    fn envelope_defaults_to_pointwise_max() {
        let c = class(&[&[0.5, -2.0], &[-1.0, 1.0]], None).unwrap();
        assert_eq!(c.envelope(), &[1.0, 2.0]);
        assert!(c.bounded_by(2.0));
        assert!(!c.bounded_by(1.5));
    }

    #[test]
    fn envelope_violations_are_rejected() {
        let err = class(&[&[0.5, -2.0]], Some(vec![1.0, 1.0])).unwrap_err();
        assert!(err.to_string().contains("envelope violated"));
        assert!(class(&[&[0.5]], Some(vec![-1.0])).is_err());
        assert!(class(&[&[f64::NAN]], None).is_err());
    }

    #[test]
    fn truncation_and_tail() {
        let c = class(&[&[0.5, 20.0], &[-3.0, 0.0]], None).unwrap();
        let t = c.truncated(1.0);
        assert_eq!(t.functions()[0].values, vec![0.5, 1.0]);
        assert_eq!(t.functions()[1].values, vec![-1.0, 0.0]);
        assert_eq!(t.envelope(), &[1.0, 1.0]);
        assert_eq!(c.tail_integral(1.0), 0.5 * 3.0 + 0.5 * 20.0);
    }

    #[test]
    fn level_sets_threshold_inclusively() {
        let c = class(&[&[0.0, 0.5, 1.0]], None).unwrap();
        assert_eq!(c.level_family(0.5).set(0), &PointSet::from_indices(3, [0, 1]));
    }

    #[test]
    fn bracket_validation() {
        let g = GroundSpace::uniform(2);
        assert!(FunctionBracket::new(&g, vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        let b = FunctionBracket::new(&g, vec![0.0, 0.0], vec![1.0, 0.5]).unwrap();
        assert_eq!(b.width, 0.75);
        assert!(b.contains(&[0.5, 0.5]));
        assert!(!b.contains(&[0.5, 0.6]));
        assert!(SetBracket::new(&g, PointSet::full(2), PointSet::empty(2)).is_err());
        let s = SetBracket::new(&g, PointSet::empty(2), PointSet::full(2)).unwrap();
        assert_eq!(s.width, 1.0);
    }
}
