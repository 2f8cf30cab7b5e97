//! Fully resolved commands and their result payloads.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boundary::{approximate, boundary_profile, Strategy};
use crate::bracketing::{
    bracket_cover_from_partition, bracket_with_envelope, bracketing_number_exact, set_bracket_cover,
    vc_graph_brackets, vc_major_brackets, BracketCover, FunctionBracket, FunctionMode, SetBracket,
};
use crate::bracketing::sets::{EXACT_MAX_MEMBERS, EXACT_MAX_POINTS};
use crate::ergodic::{median, replicate};
use crate::error::{Result, VcError};
use crate::instance::{Instance, InstanceFile};
use crate::space::{Partition, SetFamily};
use crate::system::{dual_vc_dimension, join, vc_dimension};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BracketMode {
    Sets,
    Major,
    Graph,
}

/// A command with every default filled in, embedded in its report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    Dim {
        instance: InstanceFile,
        dual: bool,
        cap: Option<usize>,
        budget: u64,
    },
    Approx {
        instance: InstanceFile,
        epsilon: f64,
        strategy: Strategy,
        max_cells: usize,
    },
    Boundary {
        instance: InstanceFile,
        partition: String,
    },
    Brackets {
        instance: InstanceFile,
        mode: BracketMode,
        epsilon: f64,
        #[serde(rename = "M")]
        bound: Option<f64>,
        s_levels: Option<usize>,
        partition: Option<String>,
        strategy: Strategy,
        exact: bool,
        budget: u64,
    },
    Ulln {
        instance: InstanceFile,
        process: String,
        checkpoints: Vec<usize>,
        seeds: usize,
    },
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Dim { .. } => "dim",
            Job::Approx { .. } => "approx",
            Job::Boundary { .. } => "boundary",
            Job::Brackets { .. } => "brackets",
            Job::Ulln { .. } => "ulln",
        }
    }
}

/// The payload, the seed it depends on, and CSV rows where the command has
/// a trace.
pub struct Outcome {
    pub results: Value,
    pub seed: Option<u64>,
    pub csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
}

/// `trivial`, `singletons`, `join:i,j,…` (member indices) or the name of an
/// instance partition.
pub fn resolve_partition(spec: &str, instance: &Instance) -> Result<Partition> {
    match spec {
        "trivial" => Ok(Partition::trivial(&instance.ground)),
        "singletons" => Ok(Partition::singletons(&instance.ground)),
        _ => {
            if let Some(list) = spec.strip_prefix("join:") {
                let indices = list
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|_| VcError::Config(format!("bad member index `{s}` in `{spec}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                join(&instance.family, &indices)
            } else {
                instance
                    .partitions
                    .get(spec)
                    .cloned()
                    .ok_or_else(|| VcError::Config(format!("unknown partition `{spec}`")))
            }
        }
    }
}

fn cells_json(partition: &Partition, family: &SetFamily) -> Value {
    let g = family.ground();
    partition
        .cells()
        .iter()
        .map(|c| json!({"label": c.label, "points": g.ids_of(&c.set)}))
        .collect()
}

fn assignment_json(family_names: &[String], assignment: &[usize]) -> Value {
    Value::Object(
        family_names
            .iter()
            .zip(assignment)
            .map(|(n, &b)| (n.clone(), json!(b)))
            .collect(),
    )
}

fn set_cover_json(cover: &BracketCover<SetBracket>, family: &SetFamily) -> Value {
    let g = family.ground();
    let names: Vec<String> = family.members().iter().map(|m| m.name.clone()).collect();
    json!({
        "advertised_bound": cover.epsilon,
        "count": cover.len(),
        "brackets": cover.brackets.iter().map(|b| json!({
            "lower": g.ids_of(&b.lower),
            "upper": g.ids_of(&b.upper),
            "width": b.width,
        })).collect::<Vec<_>>(),
        "assignment": assignment_json(&names, &cover.assignment),
    })
}

fn function_cover_json(cover: &BracketCover<FunctionBracket>, names: &[String]) -> Value {
    json!({
        "advertised_bound": cover.epsilon,
        "count": cover.len(),
        "max_width": cover.max_width(),
        "brackets": cover.brackets.iter().map(|b| json!({
            "lower": b.lower,
            "upper": b.upper,
            "width": b.width,
        })).collect::<Vec<_>>(),
        "assignment": assignment_json(names, &cover.assignment),
    })
}

pub fn run_job(job: &Job) -> Result<Outcome> {
    match job {
        Job::Dim {
            instance,
            dual,
            cap,
            budget,
        } => {
            let inst = instance.load()?;
            let f = &inst.family;
            let (kind, d, witness) = if *dual {
                let d = dual_vc_dimension(f, *cap, *budget)?;
                let w: Vec<String> = d.witness.iter().map(|&j| f.name(j).to_string()).collect();
                ("dual", d, w)
            } else {
                let d = vc_dimension(f, *cap, *budget)?;
                let w: Vec<String> = d.witness.iter().map(|&p| f.ground().id(p).to_string()).collect();
                ("vc", d, w)
            };
            Ok(Outcome {
                results: json!({
                    "kind": kind,
                    "dimension": d.value,
                    "witness": witness,
                    "reached_cap": d.reached_cap,
                    "points": f.ground().len(),
                    "members": f.len(),
                }),
                seed: None,
                csv: None,
            })
        }
        Job::Approx {
            instance,
            epsilon,
            strategy,
            max_cells,
        } => {
            let inst = instance.load()?;
            let f = &inst.family;
            let r = approximate(f, *epsilon, *strategy, *max_cells)?;
            let rows = r
                .trace
                .iter()
                .map(|t| {
                    vec![
                        t.step.to_string(),
                        t.joined.map_or(String::new(), |j| j.to_string()),
                        t.sup_boundary.to_string(),
                    ]
                })
                .collect();
            Ok(Outcome {
                results: json!({
                    "epsilon": r.epsilon,
                    "strategy": r.strategy,
                    "max_cells": max_cells,
                    "success": r.success,
                    "achieved": r.achieved,
                    "joined": r.joined.iter().map(|&j| f.name(j)).collect::<Vec<_>>(),
                    "partition": cells_json(&r.partition, f),
                    "trace": r.trace.iter().map(|t| json!({
                        "step": t.step,
                        "joined": t.joined.map(|j| f.name(j)),
                        "cells": t.cells,
                        "sup_boundary": t.sup_boundary,
                    })).collect::<Vec<_>>(),
                }),
                seed: None,
                csv: Some((vec!["step", "joined_index", "sup_boundary"], rows)),
            })
        }
        Job::Boundary {
            instance,
            partition,
        } => {
            let inst = instance.load()?;
            let f = &inst.family;
            let p = resolve_partition(partition, &inst)?;
            let prof = boundary_profile(f, &p)?;
            let rows = prof
                .members
                .iter()
                .enumerate()
                .map(|(j, m)| vec![f.name(j).to_string(), m.measure.to_string()])
                .collect();
            Ok(Outcome {
                results: json!({
                    "partition": partition,
                    "cells": cells_json(&p, f),
                    "sup": prof.sup,
                    "witness": prof.witness.map(|j| f.name(j)),
                    "members": prof.members.iter().enumerate().map(|(j, m)| json!({
                        "name": f.name(j),
                        "measure": m.measure,
                        "boundary": f.ground().ids_of(&m.set),
                    })).collect::<Vec<_>>(),
                }),
                seed: None,
                csv: Some((vec!["member", "measure"], rows)),
            })
        }
        Job::Brackets {
            instance,
            mode,
            epsilon,
            bound,
            s_levels,
            partition,
            strategy,
            exact,
            budget,
        } => run_brackets(
            &instance.load()?,
            *mode,
            *epsilon,
            *bound,
            *s_levels,
            partition.as_deref(),
            *strategy,
            *exact,
            *budget,
        ),
        Job::Ulln {
            instance,
            process,
            checkpoints,
            seeds,
        } => {
            if *seeds == 0 {
                return Err(VcError::Config("at least one seed is needed".into()));
            }
            let inst = instance.load()?;
            let config = inst
                .processes
                .get(process)
                .ok_or_else(|| VcError::Config(format!("unknown process `{process}`")))?;
            let traces = replicate(&inst.family, config, checkpoints, *seeds)?;
            let medians: Vec<Value> = checkpoints
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    let v: Vec<f64> = traces.iter().map(|t| t.checkpoints[k].delta_n).collect();
                    json!({"n": n, "median_delta_n": median(&v)})
                })
                .collect();
            let rows = traces
                .iter()
                .flat_map(|t| {
                    t.checkpoints.iter().map(|c| {
                        vec![
                            c.n.to_string(),
                            c.delta_n.to_string(),
                            c.argmax_member.clone().unwrap_or_default(),
                            t.seed.to_string(),
                        ]
                    })
                })
                .collect();
            Ok(Outcome {
                results: json!({
                    "process": process,
                    "config": config,
                    "traces": traces,
                    "medians": medians,
                }),
                seed: Some(config.seed),
                csv: Some((vec!["n", "delta_n", "argmax_member", "seed"], rows)),
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_brackets(
    inst: &Instance,
    mode: BracketMode,
    epsilon: f64,
    bound: Option<f64>,
    s_levels: Option<usize>,
    partition: Option<&str>,
    strategy: Strategy,
    exact: bool,
    budget: u64,
) -> Result<Outcome> {
    let results = match mode {
        BracketMode::Sets => {
            let f = &inst.family;
            let built = match partition {
                Some(spec) => bracket_cover_from_partition(f, &resolve_partition(spec, inst)?)?,
                None => set_bracket_cover(f, epsilon, strategy, f.ground().len().max(2))?,
            };
            let mut out = json!({
                "mode": "sets",
                "refined_cells": built.refined.len(),
                "count_bound_log2": 2 * built.refined.len(),
                "cover": set_cover_json(&built.cover, f),
            });
            if exact {
                if f.len() > EXACT_MAX_MEMBERS || f.ground().len() > EXACT_MAX_POINTS {
                    return Err(VcError::SizeGuard {
                        what: "instance for exact bracketing",
                        size: f.len().max(f.ground().len()),
                        limit: EXACT_MAX_MEMBERS.min(EXACT_MAX_POINTS),
                    });
                }
                let bn = bracketing_number_exact(f, built.cover.epsilon, budget)?;
                out["exact"] = json!({
                    "epsilon": built.cover.epsilon,
                    "value": bn.value,
                    "optimal": bn.optimal,
                    "nodes": bn.nodes,
                });
            }
            out
        }
        BracketMode::Major | BracketMode::Graph => {
            let class = inst
                .functions
                .as_ref()
                .ok_or_else(|| VcError::Config("instance has no functions".into()))?;
            let names: Vec<String> = class.functions().iter().map(|f| f.name.clone()).collect();
            let bound =
                bound.unwrap_or_else(|| class.envelope().iter().copied().fold(0.0, f64::max));
            let levels = s_levels.unwrap_or_else(|| (2.0 / epsilon).ceil().max(1.0) as usize);
            if class.bounded_by(bound) {
                if mode == BracketMode::Major {
                    let c = vc_major_brackets(class, bound, epsilon, strategy)?;
                    json!({
                        "mode": "major",
                        "M": bound,
                        "truncated": false,
                        "K": c.k,
                        "levels": c.levels,
                        "level_epsilon": c.level_epsilon,
                        "level_cover_sizes": c.level_cover_sizes,
                        "count_bound": u64::try_from(c.count_bound).unwrap_or(u64::MAX),
                        "cover": function_cover_json(&c.cover, &names),
                    })
                } else {
                    let c = vc_graph_brackets(class, bound, epsilon, levels, strategy)?;
                    json!({
                        "mode": "graph",
                        "M": bound,
                        "truncated": false,
                        "s_levels": c.s_levels,
                        "set_epsilon": c.set_epsilon,
                        "rescaled_widths": c.rescaled.brackets.iter().map(|b| b.width).collect::<Vec<_>>(),
                        "rescaled_bound": c.rescaled.epsilon,
                        "cover": function_cover_json(&c.cover, &names),
                    })
                }
            } else {
                let fm = match mode {
                    BracketMode::Major => FunctionMode::Major,
                    _ => FunctionMode::Graph { s_levels: levels },
                };
                let c = bracket_with_envelope(class, bound, epsilon, fm, strategy)?;
                json!({
                    "mode": if mode == BracketMode::Major { "major" } else { "graph" },
                    "M": bound,
                    "truncated": true,
                    "tail": class.tail_integral(bound),
                    "cover": function_cover_json(&c, &names),
                })
            }
        }
    };
    Ok(Outcome {
        results,
        seed: None,
        csv: None,
    })
}
