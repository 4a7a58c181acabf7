//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Time limits are asserted in release builds only; debug builds
//! still require zero failures everywhere.
//!
//! Run with: cargo test --release --test acceptance -- --nocapture

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treeforce_core::bits::{BinaryString, SmallSet};
use treeforce_core::enumeration::{extract_enum, iterate_reduce, EnumerationStages, StrongEnumeration};
use treeforce_core::machine::ToyPrefixMachine;
use treeforce_core::scenario::Scenario;
use treeforce_core::sim::{first_split_is_six_parts, RunStatus, SimRun, Simulator};
use treeforce_core::trace::{render_trace, TraceRecord};
use treeforce_core::trees::FinTree;
use treeforce_core::verify::{abandonment_suite, fact1_suite, fact5_suite, Bounds};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("{criterion}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{criterion} failed: {detail}");
}

fn assert_time(criterion: &str, elapsed: Duration, limit_secs: u64) {
    // Debug builds report but do not enforce the wall-clock limits.
    #[cfg(not(debug_assertions))]
    assert!(
        elapsed <= Duration::from_secs(limit_secs),
        "{criterion} exceeded {limit_secs}s: {elapsed:?}"
    );
    let _ = (criterion, elapsed, limit_secs);
}

fn scenario_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

#[test]
fn criterion_1_supporter_equivalence() {
    let start = Instant::now();
    let r = fact1_suite(&Bounds::default_bounds());
    assert_time("criterion 1", start.elapsed(), 120);
    report(
        "criterion 1 (supporter construction equivalence)",
        r.passed(),
        &format!("{} cases, {} failures, {} ms", r.cases, r.failures.len(), r.millis),
    );
}

#[test]
fn criterion_2_cross_coverage() {
    let start = Instant::now();
    let r = fact5_suite(&Bounds::default_bounds());
    assert_time("criterion 2", start.elapsed(), 60);
    report(
        "criterion 2 (cross coverage)",
        r.passed(),
        &format!("{} cases, {} failures, {} ms", r.cases, r.failures.len(), r.millis),
    );
}

#[test]
fn criterion_3_abandonment_facts() {
    let start = Instant::now();
    let r = abandonment_suite(&Bounds::default_bounds());
    assert_time("criterion 3", start.elapsed(), 300);
    report(
        "criterion 3 (blocking, monotonicity, extension stability)",
        r.passed(),
        &format!("{} cases, {} failures, {} ms", r.cases, r.failures.len(), r.millis),
    );
}

#[test]
fn criterion_4_step_one_shape() {
    // The bundled scenario's first splitting, inspected right after the
    // operation (the following stem extensions legitimately consume and
    // mask ground elements).
    let sc = Scenario::load(&scenario_path("step1.toml")).unwrap();
    let q = sc.build_q().unwrap();
    let functionals = sc.build_functionals().unwrap();
    let ctx = treeforce_core::forcing::ops::EngineCtx {
        depth: sc.depth,
        a: &sc.a_pattern,
        q: &q,
        functionals: &functionals,
        budget_ri: sc.budget_ri,
        height_bound: sc.height_bound,
        search_budget: sc.search_budget,
    };
    let mut state = treeforce_core::forcing::ForcingState::initial(sc.depth);
    assert!(treeforce_core::forcing::ops::r_i_operation(&ctx, &mut state, 1).is_none());
    let rec = match treeforce_core::forcing::ops::r_ii_operation(&ctx, &mut state, 1).unwrap() {
        treeforce_core::forcing::ops::RIIOutcome::CaseII(rec) => rec,
        treeforce_core::forcing::ops::RIIOutcome::Stuck { reason, .. } => {
            panic!("splitting stuck: {reason}")
        }
    };
    let disjoint = (0..rec.vs.len())
        .all(|i| (i + 1..rec.vs.len()).all(|j| !rec.vs[i].meets(&rec.vs[j])));
    let partition_tree = state.tree.is_partition_tree(6, SmallSet::from_iter([0, 1]));
    // The full bundled run must agree on the recorded shape.
    let sim = Simulator::new(Scenario::load(&scenario_path("step1.toml")).unwrap()).unwrap();
    let run = sim.run();
    let six = first_split_is_six_parts(&run);
    report(
        "criterion 4 (opening split produces six parts)",
        rec.k_prime == 2 && rec.n == 3 && rec.new_k == 6 && disjoint && partition_tree && six,
        &format!(
            "k'={}, n={}, parts={}, disjoint={disjoint}, partition tree at horizon 2: \
             {partition_tree}, bundled trace agrees: {six}",
            rec.k_prime, rec.n, rec.new_k
        ),
    );
}

/// Independent membership oracle: decode a path against the level choices
/// directly, without consulting the tree structure.
fn level_choice_member(path: &BinaryString, choices: &[Vec<BinaryString>], width: u32) -> bool {
    if path.len() != width * choices.len() as u32 {
        return false;
    }
    for (lvl, opts) in choices.iter().enumerate() {
        let mut block = BinaryString::empty();
        for b in 0..width {
            block = block.push(path.bit(lvl as u32 * width + b));
        }
        if !opts.contains(&block) {
            return false;
        }
    }
    true
}

#[test]
fn criterion_5_homogeneous_reduction() {
    let start = Instant::now();
    let symbols: Vec<BinaryString> = (0..3u64).map(|s| BinaryString::from_raw(s, 2)).collect();
    let mut failures = 0u64;
    let mut cases = 0u64;
    for k in 1..=3u32 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1e32 + k as u64);
        for _ in 0..1000 {
            let depth = rng.gen_range(1..=8usize);
            let choices: Vec<Vec<BinaryString>> = (0..depth)
                .map(|_| {
                    let count = rng.gen_range(1..=3usize);
                    let mut opts: Vec<BinaryString> = Vec::new();
                    while opts.len() < count {
                        let s = symbols[rng.gen_range(0..3)];
                        if !opts.contains(&s) {
                            opts.push(s);
                        }
                    }
                    opts.sort();
                    opts
                })
                .collect();
            let t = FinTree::level_choice(&choices, 2).unwrap();
            let bit_depth = t.depth();
            let paths = t.paths();
            // A valid k-enumeration: one on-tree string per level plus up
            // to k-1 arbitrary strings.
            let mut values: BTreeMap<u32, Vec<BinaryString>> = BTreeMap::new();
            for n in 0..=bit_depth {
                let on_tree = paths[rng.gen_range(0..paths.len())].prefix(n);
                let mut d = vec![on_tree];
                let extra = rng.gen_range(0..k) as usize;
                for _ in 0..extra {
                    d.push(BinaryString::from_raw(rng.gen::<u64>(), n));
                }
                values.insert(n, d);
            }
            let h = StrongEnumeration::new(k, values).unwrap();
            cases += 1;
            match iterate_reduce(&t, &h) {
                Ok((path, reductions)) => {
                    if reductions > k - 1 || !level_choice_member(&path, &choices, 2) {
                        failures += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
    }
    report(
        "criterion 5 (homogeneous-tree reduction)",
        failures == 0,
        &format!("{cases} seeded trials, {failures} failures, {:?}", start.elapsed()),
    );
}

#[test]
fn criterion_6_stage_extraction() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xfac8);
    let mut failures = 0u64;
    for _ in 0..500 {
        let n = rng.gen_range(1..=6u32);
        let kprime = rng.gen_range(1..=3u32);
        let all: Vec<BinaryString> = (0..(1u64 << n)).map(|b| BinaryString::from_raw(b, n)).collect();
        // Target level: a random nonempty subset of 2^n.
        let q_n: BTreeSet<BinaryString> = loop {
            let s: BTreeSet<BinaryString> = all
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .copied()
                .collect();
            if !s.is_empty() {
                break s;
            }
        };
        // Transversal seed intersecting the target level.
        let mut rstar: BTreeSet<BinaryString> = BTreeSet::new();
        let q_vec: Vec<&BinaryString> = q_n.iter().collect();
        rstar.insert(*q_vec[rng.gen_range(0..q_vec.len())]);
        while rstar.len() < kprime as usize && rng.gen_bool(0.5) {
            rstar.insert(all[rng.gen_range(0..all.len())]);
        }
        let gen: BTreeSet<BinaryString> = all.iter().filter(|s| !rstar.contains(s)).copied().collect();
        // Down-closed noise inside the generator.
        let extra: BTreeSet<BinaryString> = gen
            .iter()
            .filter(|_| rng.gen_bool(0.3))
            .copied()
            .collect();
        let stages = EnumerationStages::new(
            true,
            vec![vec![], vec![gen.clone()], vec![gen, extra]],
        )
        .unwrap();
        match extract_enum(&stages, kprime, n, 16) {
            Ok(d) => {
                let hits = d.iter().any(|s| q_n.contains(s));
                if d.len() > kprime as usize || !hits {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    report(
        "criterion 6 (stage-based extraction)",
        failures == 0,
        &format!("500 seeded instances, {failures} failures, {:?}", start.elapsed()),
    );
}

#[test]
fn criterion_7_incompressibility_counting() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x14af7);
    let mut failures = 0u64;
    for _ in 0..1000 {
        let count = rng.gen_range(0..=16usize);
        let mut programs: BTreeMap<BinaryString, BinaryString> = BTreeMap::new();
        let mut tries = 0;
        while programs.len() < count && tries < 200 {
            tries += 1;
            let len = rng.gen_range(1..=6u32);
            let p = BinaryString::from_raw(rng.gen::<u64>(), len);
            if programs.keys().any(|q| q.is_compatible(&p)) {
                continue;
            }
            let out_len = rng.gen_range(1..=6u32);
            programs.insert(p, BinaryString::from_raw(rng.gen::<u64>(), out_len));
        }
        let m = match ToyPrefixMachine::new(programs) {
            Ok(m) => m,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        if !m.kraft_ok() {
            failures += 1;
            continue;
        }
        for n in 0..=8u32 {
            for c in 0..=4u32 {
                if m.compressible_count(c, n) > ToyPrefixMachine::counting_bound(c, n) {
                    failures += 1;
                }
            }
        }
    }
    report(
        "criterion 7 (prefix-free counting)",
        failures == 0,
        &format!("1000 seeded machines, {failures} failures, {:?}", start.elapsed()),
    );
}

fn run_scenario(name: &str) -> (SimRun, SimRun, Duration) {
    let sc = Scenario::load(&scenario_path(name)).unwrap();
    let sim = Simulator::new(sc).unwrap();
    let start = Instant::now();
    let a = sim.run();
    let elapsed = start.elapsed();
    let b = sim.run();
    (a, b, elapsed)
}

#[test]
fn criterion_8_end_to_end_determinism_and_invariants() {
    let mut all_pass = true;
    let mut details = Vec::new();
    for name in ["step1.toml", "case_i_once.toml", "target_guard.toml"] {
        let (a, b, elapsed) = run_scenario(name);
        assert_time("criterion 8", elapsed, 600);
        let identical = render_trace(&a.records) == render_trace(&b.records);
        let ok = a.status == RunStatus::Completed
            && a.steps_completed == 3
            && a.invariants_pass
            && identical;
        all_pass &= ok;
        details.push(format!(
            "{name}: status={}, invariants={}, deterministic={}, {:?}",
            a.status.label(),
            a.invariants_pass,
            identical,
            elapsed
        ));
    }
    report(
        "criterion 8 (end-to-end determinism and invariants)",
        all_pass,
        &details.join("; "),
    );
}

#[test]
fn criterion_9_case_i_loop_bound() {
    let mut all_pass = true;
    let mut details = Vec::new();
    for name in ["step1.toml", "case_i_once.toml", "target_guard.toml"] {
        let sc = Scenario::load(&scenario_path(name)).unwrap();
        let sim = Simulator::new(sc).unwrap();
        let run = sim.run();
        for r in &run.records {
            if let TraceRecord::RIDone { step, fires, fac6_bound, within_bound, .. } = r {
                if !within_bound || fires >= fac6_bound {
                    all_pass = false;
                    details.push(format!("{name}: step {step} ran {fires} >= bound {fac6_bound}"));
                }
            }
        }
    }
    if details.is_empty() {
        details.push("every case-i loop stayed strictly below (entries+1)*2k".into());
    }
    report("criterion 9 (case-i loop bound)", all_pass, &details.join("; "));
}
