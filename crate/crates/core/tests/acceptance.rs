//! Acceptance checks, one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

mod common;

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{family_from_masks, ground};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use vcapprox::boundary::{boundary_profile, pi_boundary, Strategy};
use vcapprox::bracketing::{
    bracket_cover_from_partition, bracketing_number_exact, discrete_graph, set_bracket_cover,
    truncate_and_extend, vc_graph_brackets, vc_major_brackets, BracketCover, DiscreteFunctionClass,
    FunctionBracket, NamedFunction,
};
use vcapprox::counterexample::make_counterexample;
use vcapprox::ergodic::{grid_intervals, median, replicate, ProcessConfig, ProcessKind};
use vcapprox::system::{
    boolean_independent, dual_family, dual_vc_dimension, join, vc_dimension, DEFAULT_SEARCH_BUDGET,
};
use vcapprox::{GroundSpace, Partition, PointSet, SetFamily};

const TOL: f64 = 1e-9;

type Verdict = Result<String, String>;

fn random_family(rng: &mut ChaCha8Rng, max_points: usize, max_members: usize, zero_weights: bool) -> SetFamily {
    let n = rng.random_range(1..=max_points);
    let mut w: Vec<u32> = (0..n)
        .map(|_| rng.random_range(if zero_weights { 0 } else { 1 }..10))
        .collect();
    if w.iter().all(|&x| x == 0) {
        w[0] = 1;
    }
    let m = rng.random_range(0..=max_members);
    let masks: Vec<u32> = (0..m).map(|_| rng.random_range(0..1u32 << n)).collect();
    family_from_masks(ground(&w), &masks)
}

fn random_class(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> DiscreteFunctionClass {
    let n = rng.random_range(3..=8);
    let m = rng.random_range(1..=6);
    let w: Vec<u32> = (0..n).map(|_| rng.random_range(1..10)).collect();
    DiscreteFunctionClass::new(
        ground(&w),
        (0..m)
            .map(|i| NamedFunction {
                name: format!("f{i}"),
                values: (0..n).map(|_| rng.random_range(lo..=hi)).collect(),
            })
            .collect(),
        None,
    )
    .unwrap()
}

fn covers(cover: &BracketCover<FunctionBracket>, class: &DiscreteFunctionClass) -> bool {
    class
        .functions()
        .iter()
        .enumerate()
        .all(|(i, f)| cover.brackets[cover.assignment[i]].contains(&f.values))
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    if start.elapsed() > limit {
        Err(format!("took {:.1?}, limit {limit:?}", start.elapsed()))
    } else {
        Ok(())
    }
}

fn duality() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..200 {
        let f = random_family(&mut rng, 8, 12, false);
        let direct = dual_vc_dimension(&f, None, DEFAULT_SEARCH_BUDGET).map_err(|e| e.to_string())?;
        let via = vc_dimension(&dual_family(&f).family, None, DEFAULT_SEARCH_BUDGET).map_err(|e| e.to_string())?;
        if direct.value != via.value {
            return Err(format!("family {i}: dual {} vs dual-family {}", direct.value, via.value));
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("200 families agree ({:.2?})", start.elapsed()))
}

fn join_law() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut independent = 0;
    for i in 0..200 {
        let f = random_family(&mut rng, 8, 8, false);
        let idx: Vec<usize> = (0..f.len()).filter(|_| rng.random_bool(0.5)).collect();
        let cells = join(&f, &idx).map_err(|e| e.to_string())?.len();
        let ind = boolean_independent(&f, &idx).map_err(|e| e.to_string())?;
        if (cells == 1 << idx.len()) != ind {
            return Err(format!("index set {i}: {cells} cells, independent = {ind}"));
        }
        independent += ind as usize;
    }
    // Coordinate sets of {0,1}^k are independent; every subfamily of j of
    // them must join to 2^j cells.
    for k in 1..=6usize {
        let g = Arc::new(GroundSpace::uniform(1 << k));
        let coords = SetFamily::from_sets(g, (0..k).map(|b| PointSet::from_fn(1 << k, |x| x >> b & 1 == 1))).unwrap();
        for mask in 0u32..(1 << k) {
            let idx: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).collect();
            let cells = join(&coords, &idx).unwrap().len();
            if cells != 1 << idx.len() || !boolean_independent(&coords, &idx).unwrap() {
                return Err(format!("coordinates k={k} subset {mask:b}: {cells} cells"));
            }
        }
    }
    Ok(format!("200 random index sets ({independent} independent), all coordinate subfamilies up to k=6"))
}

fn remark() -> Verdict {
    let c = make_counterexample(13, None).map_err(|e| e.to_string())?;
    for n in 1..=12 {
        let g = c.prefix_join(n).map_err(|e| e.to_string())?;
        let b = pi_boundary(c.family.set(n), &g, c.ground()).map_err(|e| e.to_string())?;
        let measured = c.ground().measure(&b);
        // s_n = 1/2 − 2^{−(n+1)}, so 1 − s_n = 1/2 + 2^{−(n+1)}.
        let expected = 0.5 + 0.5f64.powi(n as i32 + 1);
        if measured != expected || measured != 1.0 - c.partial_sums[n] || !(measured > 0.5) {
            return Err(format!("n={n}: boundary {measured}, expected {expected}"));
        }
    }
    let d = vc_dimension(&c.family, None, DEFAULT_SEARCH_BUDGET).map_err(|e| e.to_string())?;
    if d.value != 1 {
        return Err(format!("dimension {}", d.value));
    }
    Ok("n = 1..12 exact, all > 1/2, dimension 1".into())
}

fn corollary() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut brackets = 0;
    for i in 0..100 {
        let f = random_family(&mut rng, 10, 10, true);
        let n = f.ground().len();
        let blocks = rng.random_range(1..=n);
        let keys: Vec<usize> = (0..n).map(|_| rng.random_range(0..blocks)).collect();
        let p = Partition::from_keys(&keys, |k| format!("B{k}"));
        let out = bracket_cover_from_partition(&f, &p).map_err(|e| e.to_string())?;
        let prof = boundary_profile(&f, &out.refined).map_err(|e| e.to_string())?;
        for (j, c) in f.sets().enumerate() {
            let b = &out.cover.brackets[out.cover.assignment[j]];
            if !(b.lower.is_subset(c) && c.is_subset(&b.upper)) {
                return Err(format!("pair {i}, member {j}: not bracketed"));
            }
            if b.width != prof.members[j].measure {
                return Err(format!("pair {i}, member {j}: width {} vs boundary {}", b.width, prof.members[j].measure));
            }
        }
        if (out.cover.len() as u128) > 1u128 << (2 * out.refined.len()).min(127) {
            return Err(format!("pair {i}: {} brackets for {} cells", out.cover.len(), out.refined.len()));
        }
        brackets += out.cover.len();
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("100 pairs, {brackets} brackets ({:.2?})", start.elapsed()))
}

fn major() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // ⌈2/ε⌉ for ε = 1/2, 1/4, 1/10.
    let expected_k = [(0.5, 4usize), (0.25, 8), (0.1, 20)];
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let class = random_class(&mut rng, -1.0, 1.0);
        for &(eps, k) in &expected_k {
            let cover = vc_major_brackets(&class, 1.0, eps, Strategy::Greedy).map_err(|e| e.to_string())?;
            if cover.k != k {
                return Err(format!("class {i}, ε={eps}: K = {}", cover.k));
            }
            for (j, &alpha) in cover.levels.iter().enumerate() {
                let want = 1.0 - (2.0 * (j + 1) as f64) / k as f64;
                if alpha != want {
                    return Err(format!("class {i}, ε={eps}: α_{} = {alpha}, expected {want}", j + 1));
                }
            }
            if !covers(&cover.cover, &class) {
                return Err(format!("class {i}, ε={eps}: member outside its bracket"));
            }
            for b in &cover.cover.brackets {
                if b.width > 2.0 * eps + TOL {
                    return Err(format!("class {i}, ε={eps}: width {}", b.width));
                }
                worst = worst.max(b.width / (2.0 * eps));
            }
        }
    }
    Ok(format!("60 covers, largest width/2ε = {worst:.3}"))
}

fn graph() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = 256;
    let step = 1.0 / t as f64;
    let mut worst_gap: f64 = 0.0;
    for i in 0..20 {
        let class = random_class(&mut rng, 0.0, 1.0);
        let eps = [0.5, 0.25, 0.1][i % 3];
        let cover = vc_graph_brackets(&class, 1.0, eps, t, Strategy::Greedy).map_err(|e| e.to_string())?;
        if !covers(&cover.cover, &class) {
            return Err(format!("class {i}: member outside its bracket"));
        }
        for b in &cover.rescaled.brackets {
            if b.width > eps + step + TOL {
                return Err(format!("class {i}: rescaled width {}", b.width));
            }
            let nu = cover
                .product
                .measure(&discrete_graph(&b.upper, t).difference(&discrete_graph(&b.lower, t)));
            let gap = (nu - b.width).abs();
            worst_gap = worst_gap.max(gap);
            if gap > step {
                return Err(format!("class {i}: Σμ(h−g) = {} but ν(G_h∖G_g) = {nu}", b.width));
            }
        }
    }
    Ok(format!("20 classes at T = {t}, largest Fubini gap {worst_gap:.1e}"))
}

fn truncation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bound = 1.0;
    for i in 0..20 {
        let base = random_class(&mut rng, -1.0, 1.0);
        let n = base.ground().len();
        // A light point carries large values, so the envelope is unbounded
        // relative to M while its tail stays small.
        let heavy = rng.random_range(0..n);
        let mut w: Vec<f64> = base.ground().weights().to_vec();
        w.iter_mut().for_each(|x| *x *= 0.95);
        w[heavy] += 0.05;
        let g = Arc::new(GroundSpace::new(base.ground().ids().to_vec(), w).unwrap());
        let functions: Vec<NamedFunction> = base
            .functions()
            .iter()
            .map(|f| {
                let mut values = f.values.clone();
                values[heavy] = rng.random_range(2.0..20.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                NamedFunction { name: f.name.clone(), values }
            })
            .collect();
        let class = DiscreteFunctionClass::new(g, functions, None).unwrap();
        let tail = class.tail_integral(bound);
        let eps = tail + 0.25;
        let truncated = class.truncated(bound);
        let inner = if i % 2 == 0 {
            vc_major_brackets(&truncated, bound, eps / 2.0, Strategy::Greedy).map(|c| c.cover)
        } else {
            set_level_graph(&truncated, bound, eps)
        }
        .map_err(|e| e.to_string())?;
        let out = truncate_and_extend(&inner, &class, bound, eps).map_err(|e| e.to_string())?;
        let env = class.envelope();
        for (b_in, b_out) in inner.brackets.iter().zip(&out.brackets) {
            for x in 0..n {
                let expected = if env[x] > bound {
                    2.0 * env[x]
                } else {
                    b_in.upper[x].clamp(-bound, bound) - b_in.lower[x].clamp(-bound, bound)
                };
                if b_out.upper[x] - b_out.lower[x] != expected {
                    return Err(format!("class {i}, point {x}: identity fails"));
                }
            }
            if b_out.width > 3.0 * eps + TOL {
                return Err(format!("class {i}: width {} > 3ε = {}", b_out.width, 3.0 * eps));
            }
        }
        if !covers(&out, &class) {
            return Err(format!("class {i}: member outside its extended bracket"));
        }
    }
    Ok("20 classes, identity exact, widths ≤ 3ε".into())
}

/// A graph cover of width at most `eps` in the class's units.
fn set_level_graph(class: &DiscreteFunctionClass, bound: f64, eps: f64) -> vcapprox::Result<BracketCover<FunctionBracket>> {
    let t = 64;
    let level = eps / bound - 2.0 / t as f64;
    vc_graph_brackets(class, bound, level, t, Strategy::Greedy).map(|c| c.cover)
}

fn exact_vs_constructive() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut instances = 0;
    let mut strict = 0;
    while instances < 40 {
        let f = random_family(&mut rng, 10, 12, false);
        if f.is_empty() {
            continue;
        }
        let mut last = usize::MAX;
        for eps in [0.1, 0.25, 0.5] {
            let constructive = set_bracket_cover(&f, eps, Strategy::Greedy, f.ground().len().max(2))
                .map_err(|e| e.to_string())?
                .cover;
            let exact = bracketing_number_exact(&f, eps, 5_000_000).map_err(|e| e.to_string())?;
            if !exact.optimal {
                return Err(format!("instance {instances}: search budget exhausted at ε={eps}"));
            }
            if exact.value > constructive.len() {
                return Err(format!(
                    "instance {instances}, ε={eps}: exact {} > constructive {}",
                    exact.value,
                    constructive.len()
                ));
            }
            if exact.value > last {
                return Err(format!("instance {instances}: exact grows with ε ({last} → {})", exact.value));
            }
            strict += (exact.value < constructive.len()) as usize;
            last = exact.value;
        }
        instances += 1;
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "{instances} instances × 3 ε, exact strictly smaller in {strict} cases ({:.2?})",
        start.elapsed()
    ))
}

fn ulln() -> Verdict {
    let start = Instant::now();
    let checkpoints = [100, 1_000, 10_000, 100_000];
    let grid = Arc::new(GroundSpace::uniform(1024));
    let intervals = grid_intervals(grid, 16).map_err(|e| e.to_string())?;
    let medians = |family: &SetFamily, kind: ProcessKind| -> Result<Vec<f64>, String> {
        let config = ProcessConfig { kind, seed: 2024, length: 100_000 };
        let traces = replicate(family, &config, &checkpoints, 20).map_err(|e| e.to_string())?;
        Ok((0..checkpoints.len())
            .map(|k| median(&traces.iter().map(|t| t.checkpoints[k].delta_n).collect::<Vec<_>>()))
            .collect())
    };
    let rotation = medians(
        &intervals,
        ProcessKind::Rotation { theta: (5f64.sqrt() - 1.0) / 2.0, grid: 1024 },
    )?;
    if rotation.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(format!("rotation medians not strictly decreasing: {rotation:?}"));
    }
    let iid = medians(&intervals, ProcessKind::Iid { weights: vec![1.0 / 1024.0; 1024] })?;
    let states = Arc::new(GroundSpace::uniform(2));
    let all_subsets = SetFamily::from_sets(states, (0..4u32).map(|m| PointSet::from_fn(2, |x| m >> x & 1 == 1))).unwrap();
    let markov = medians(
        &all_subsets,
        ProcessKind::Markov { transition: vec![vec![0.9, 0.1], vec![0.3, 0.7]], initial: None },
    )?;
    let last = |v: &[f64]| v[v.len() - 1];
    for (name, v) in [("rotation", &rotation), ("iid", &iid), ("markov", &markov)] {
        if !(last(v) <= 0.02) {
            return Err(format!("{name}: median Δ at 1e5 = {}", last(v)));
        }
    }
    within(start, Duration::from_secs(180))?;
    Ok(format!(
        "median Δ at 1e5: rotation {:.1e}, iid {:.1e}, markov {:.1e} ({:.1?})",
        last(&rotation),
        last(&iid),
        last(&markov),
        start.elapsed()
    ))
}

fn cli_results(args: &[&str], threads: &str) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_vcapprox"))
        .args(args)
        .env("VCAPPROX_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&v["results"]).unwrap())
}

fn determinism() -> Verdict {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let n = 64;
    let instance = json!({
        "points": (0..n).map(|i| json!({"id": format!("g{i}"), "weight": 1.0 / n as f64})).collect::<Vec<_>>(),
        "sets": (0..n).step_by(8).flat_map(|a| ((a + 8)..=n).step_by(8).map(move |b| (a, b)))
            .map(|(a, b)| (format!("[{a},{b})"), json!((a..b).map(|x| format!("g{x}")).collect::<Vec<_>>())))
            .collect::<serde_json::Map<_, _>>(),
        "functions": {
            "f": (0..n).map(|x| ((x * 7 % 13) as f64) / 13.0).collect::<Vec<_>>(),
            "g": (0..n).map(|x| ((x * 5 % 11) as f64) / 11.0 - 0.5).collect::<Vec<_>>(),
        },
        "processes": {
            "rot": {"kind": "rotation", "theta": 0.6180339887498949, "grid": n, "seed": 9, "length": 10000},
            "iid": {"kind": "iid", "weights": vec![1.0 / n as f64; n], "seed": 9, "length": 10000},
            "chain": {"kind": "markov", "seed": 9, "length": 10000,
                      "transition": (0..n).map(|i| (0..n).map(|j| if j == (i + 1) % n || j == i { 0.5 } else { 0.0 }).collect::<Vec<f64>>()).collect::<Vec<_>>()},
        },
    });
    let path = dir.path().join("instance.json");
    std::fs::write(&path, serde_json::to_string(&instance).unwrap()).map_err(|e| e.to_string())?;
    let p = path.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["ulln", p, "--process", "rot", "--checkpoints", "100,1000,10000", "--seeds", "8"],
        vec!["ulln", p, "--process", "iid", "--checkpoints", "100,1000,10000", "--seeds", "8"],
        vec!["ulln", p, "--process", "chain", "--checkpoints", "100,1000,10000", "--seeds", "8"],
        vec!["approx", p, "--epsilon", "0.05", "--strategy", "greedy"],
        vec!["brackets", p, "--mode", "major", "--M", "1", "--epsilon", "0.25"],
        vec!["brackets", p, "--mode", "graph", "--M", "1", "--epsilon", "0.5", "--s-levels", "8"],
        vec!["dim", p],
    ];
    for args in &commands {
        let a = cli_results(args, "1")?;
        let b = cli_results(args, "1")?;
        let c = cli_results(args, "4")?;
        if a != b || a != c {
            return Err(format!("{} payload differs between runs", args[0]));
        }
    }
    Ok(format!("{} commands identical across reruns and 1 vs 4 threads", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("duality identity", duality),
        ("join law", join_law),
        ("disjoint-interval counterexample", remark),
        ("partition bracket construction", corollary),
        ("level-set bracket construction", major),
        ("subgraph bracket construction", graph),
        ("truncation extension", truncation),
        ("exact vs constructive bracketing", exact_vs_constructive),
        ("uniform law simulation", ulln),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {reason}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
