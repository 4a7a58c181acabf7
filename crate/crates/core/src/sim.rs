//! Scenario-driven simulation: the step loop of the construction with
//! per-step invariant re-verification and trace emission.

use crate::error::Result;
use crate::forcing::ctree::{BranchReport, ConstructionTree};
use crate::forcing::invariants::{compute_fading, verify_step};
use crate::forcing::ops::{
    p_operation, r_i_operation, r_ii_operation, BadReason, EngineCtx, POutcome, RIIOutcome,
};
use crate::forcing::{check_fac7, ForcingState};
use crate::functionals::FunctionalFamily;
use crate::scenario::Scenario;
use crate::trace::TraceRecord;
use crate::trees::FinTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Stuck { step: u32, reason: String },
    Failed { step: u32, reason: String },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Stuck { .. } => "stuck",
            RunStatus::Failed { .. } => "failed",
        }
    }
}

#[derive(Debug)]
pub struct SimRun {
    pub records: Vec<TraceRecord>,
    pub status: RunStatus,
    pub steps_completed: u32,
    pub invariants_pass: bool,
    pub branch: Option<BranchReport>,
    pub final_state: ForcingState,
}

impl SimRun {
    pub fn pass(&self) -> bool {
        self.status == RunStatus::Completed && self.invariants_pass
    }
}

pub struct Simulator {
    pub scenario: Scenario,
    q: FinTree,
    functionals: FunctionalFamily,
}

impl Simulator {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let q = scenario.build_q()?;
        let functionals = scenario.build_functionals()?;
        Ok(Simulator { scenario, q, functionals })
    }

    pub fn run(&self) -> SimRun {
        let sc = &self.scenario;
        let ctx = EngineCtx {
            depth: sc.depth,
            a: &sc.a_pattern,
            q: &self.q,
            functionals: &self.functionals,
            budget_ri: sc.budget_ri,
            height_bound: sc.height_bound,
            search_budget: sc.search_budget,
        };
        let mut records = Vec::new();
        records.push(TraceRecord::RunHeader {
            scenario: sc.name.clone(),
            depth: sc.depth,
            steps: sc.steps,
            seed: sc.seed,
            schedule: sc.schedule.clone(),
            budget_ri: sc.budget_ri,
            height_bound: sc.height_bound,
            search_budget: sc.search_budget,
        });

        let mut state = ForcingState::initial(sc.depth);
        let mut fading = compute_fading(&state, &sc.a_pattern);
        let mut ctree = ConstructionTree::default();
        ctree.push_level(0, sc.schedule[0], &state, &fading);
        push_digest(&mut records, 0, &state);

        let mut status = RunStatus::Completed;
        let mut invariants_pass = true;
        let mut steps_completed = 0u32;

        'steps: for s in 1..=sc.steps {
            let tag = sc.schedule[(s - 1) as usize];
            records.push(TraceRecord::StepBegin { step: s, tag });
            let prev = state.clone();
            let prev_fading = fading.clone();

            // Case-i loop.
            let mut fires = 0u64;
            loop {
                if fires >= ctx.budget_ri {
                    status = RunStatus::Failed {
                        step: s,
                        reason: format!("case-i loop exceeded budget {}", ctx.budget_ri),
                    };
                    break 'steps;
                }
                match r_i_operation(&ctx, &mut state, tag) {
                    Some(f) => {
                        fires += 1;
                        records.push(TraceRecord::RI {
                            step: s,
                            part: f.part + 1,
                            side: f.side.label().into(),
                            stem_before: f.stem_before.to_string(),
                            stem_after: f.stem_after.to_string(),
                            input: f.input,
                            reason: match f.reason {
                                BadReason::Oversize => "oversize".into(),
                                BadReason::OffTarget => "off_target".into(),
                            },
                            fire_index: fires,
                            counter_after: state.parts.get(f.part).counter(tag),
                        });
                    }
                    None => break,
                }
            }
            let entries = self.functionals.halting_entries(tag);
            let fac6_bound = (entries + 1).saturating_mul(2).saturating_mul(state.k());
            let within = fires < fac6_bound;
            records.push(TraceRecord::RIDone {
                step: s,
                fires,
                fac6_bound,
                within_bound: within,
                budget_flag: false,
            });
            if !within {
                status = RunStatus::Failed {
                    step: s,
                    reason: format!("case-i loop ran {fires} times, at or beyond the bound {fac6_bound}"),
                };
                break 'steps;
            }

            // Splitting.
            match r_ii_operation(&ctx, &mut state, tag) {
                Ok(RIIOutcome::CaseII(rec)) => {
                    records.push(TraceRecord::RII {
                        step: s,
                        k_prime: rec.k_prime,
                        n: rec.n,
                        vs: rec
                            .vs
                            .iter()
                            .map(|v| v.generators().iter().map(|g| g.to_string()).collect())
                            .collect(),
                        family_height: rec.family_height,
                        new_k: rec.new_k,
                        candidates_examined: rec.candidates_examined,
                        tree_nodes: state.tree.node_count() as u64,
                    });
                }
                Ok(RIIOutcome::Stuck { reason, candidates_examined }) => {
                    records.push(TraceRecord::Stuck {
                        step: s,
                        op: "r_ii".into(),
                        reason: reason.clone(),
                        candidates_examined,
                    });
                    status = RunStatus::Stuck { step: s, reason };
                    break 'steps;
                }
                Err(e) => {
                    let reason = e.to_string();
                    records.push(TraceRecord::Stuck {
                        step: s,
                        op: "r_ii".into(),
                        reason: reason.clone(),
                        candidates_examined: 0,
                    });
                    status = RunStatus::Failed { step: s, reason };
                    break 'steps;
                }
            }

            // P-operations on each new part, child side, in index order.
            let explicit = state.explicit_part_limit();
            for c in 0..explicit {
                let side = state.parts.get(c).side;
                match p_operation(&ctx, &mut state, c, side) {
                    POutcome::Succeeded { stem, element } => {
                        records.push(TraceRecord::POp {
                            step: s,
                            part: c + 1,
                            side: side.label().into(),
                            succeeded: true,
                            stem_after: Some(stem.to_string()),
                            element: Some(element),
                        });
                    }
                    POutcome::Failed => {
                        records.push(TraceRecord::POp {
                            step: s,
                            part: c + 1,
                            side: side.label().into(),
                            succeeded: false,
                            stem_after: None,
                            element: None,
                        });
                    }
                }
            }
            if state.k() > explicit {
                // Content-free parts: the extension search has nothing to
                // draw from, so these fail wholesale.
                records.push(TraceRecord::POpsImplicit { step: s, failed: state.k() - explicit });
            }

            // Per-step bookkeeping and re-verification.
            let wit = check_fac7(&state.tree, state.k(), &sc.a_pattern);
            records.push(TraceRecord::Fac7 {
                step: s,
                part: wit.as_ref().map(|(c, _)| c + 1),
                path: wit.as_ref().map(|(_, p)| p.to_string()),
            });
            fading = compute_fading(&state, &sc.a_pattern);
            ctree.push_level(s, tag, &state, &fading);
            let v = verify_step(&prev, &state, tag, &sc.a_pattern, &prev_fading, &fading);
            invariants_pass &= v.pass();
            records.push(TraceRecord::Invariants {
                step: s,
                chain: v.chain,
                progress: v.progress,
                hereditary_fading: v.hereditary_fading,
                partition_cover: v.partition_cover,
                stems_in_pattern: v.stems_in_pattern,
                parts_avoid_stems: v.parts_avoid_stems,
                tree_nonempty: v.tree_nonempty,
                pass: v.pass(),
            });
            push_digest(&mut records, s, &state);
            steps_completed = s;
        }

        let branch = ctree.deepest_nonfading_branch();
        records.push(TraceRecord::Report {
            steps_completed,
            status: status.label().into(),
            branch_side: branch.as_ref().map(|b| b.side.label().into()),
            branch_parts: branch
                .as_ref()
                .map(|b| b.parts.iter().map(|p| p + 1).collect())
                .unwrap_or_default(),
            g_prefix: branch
                .as_ref()
                .map(|b| b.g_prefix.to_string())
                .unwrap_or_default(),
        });

        SimRun {
            records,
            status,
            steps_completed,
            invariants_pass,
            branch,
            final_state: state,
        }
    }
}

fn push_digest(records: &mut Vec<TraceRecord>, step: u32, state: &ForcingState) {
    records.push(TraceRecord::StateDigest {
        step,
        k: state.k(),
        tree_nodes: state.tree.node_count() as u64,
        tree_digest: format!("{:016x}", state.tree.digest()),
        deficit: state.deficit_horizon,
    });
}

/// `true` when the first splitting step produced exactly six parts from
/// three pairwise disjoint clopen sets (the opening decomposition shape).
pub fn first_split_is_six_parts(run: &SimRun) -> bool {
    for r in &run.records {
        if let TraceRecord::RII { step: 1, n, new_k, vs, .. } = r {
            let disjoint = {
                let sets: Vec<crate::clopen::ClopenSet> = vs
                    .iter()
                    .map(|gens| {
                        crate::clopen::ClopenSet::new(
                            gens.iter().map(|g| g.parse().unwrap()).collect(),
                        )
                        .unwrap()
                    })
                    .collect();
                (0..sets.len())
                    .all(|i| (i + 1..sets.len()).all(|j| !sets[i].meets(&sets[j])))
            };
            return *n == 3 && *new_k == 6 && disjoint;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::render_trace;

    fn trivial_scenario() -> Scenario {
        Scenario::from_toml(
            r#"
            name = "trivial"
            depth = 12
            steps = 2
            seed = 1
            a_pattern = { period = "10" }
            schedule = [1, 2]
            budget_ri = 64
            height_bound = 12
            [q]
            kind = "full"
            depth = 4
        "#,
        )
        .unwrap()
    }

    #[test]
    fn trivial_two_steps_complete_with_invariants() {
        let sim = Simulator::new(trivial_scenario()).unwrap();
        let run = sim.run();
        assert_eq!(run.status, RunStatus::Completed);
        assert!(run.invariants_pass);
        assert_eq!(run.steps_completed, 2);
        assert!(first_split_is_six_parts(&run));
        // Step 2 at a fresh tag: k' = 12, so 13 sets and 936 parts.
        let k2 = run.records.iter().find_map(|r| match r {
            TraceRecord::RII { step: 2, new_k, n, .. } => Some((*new_k, *n)),
            _ => None,
        });
        assert_eq!(k2, Some((936, 13)));
        assert_eq!(run.final_state.k(), 936);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let sim = Simulator::new(trivial_scenario()).unwrap();
        let a = render_trace(&sim.run().records);
        let b = render_trace(&sim.run().records);
        assert_eq!(a, b);
        assert!(crate::trace::verify_trace(&crate::trace::parse_trace(&a).unwrap()).is_empty());
    }

    #[test]
    fn undersized_height_bound_reports_stuck() {
        let mut sc = trivial_scenario();
        sc.height_bound = 1;
        sc.steps = 1;
        let sim = Simulator::new(sc).unwrap();
        let run = sim.run();
        match run.status {
            RunStatus::Stuck { step: 1, .. } => {}
            other => panic!("expected stuck at step 1, got {other:?}"),
        }
    }
}
