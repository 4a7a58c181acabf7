//! Line-delimited trace records: one record per operation application, plus
//! per-step invariant verdicts and state digests. Part indices and oracle
//! tags render 1-based in traces; ground elements are raw naturals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TraceRecord {
    RunHeader {
        scenario: String,
        depth: u32,
        steps: u32,
        seed: u64,
        schedule: Vec<u32>,
        budget_ri: u64,
        height_bound: u32,
        search_budget: u64,
    },
    StepBegin {
        step: u32,
        tag: u32,
    },
    RI {
        step: u32,
        part: u64,
        side: String,
        stem_before: String,
        stem_after: String,
        input: u32,
        reason: String,
        fire_index: u64,
        counter_after: (u32, u32),
    },
    RIDone {
        step: u32,
        fires: u64,
        fac6_bound: u64,
        within_bound: bool,
        budget_flag: bool,
    },
    #[serde(rename = "r_ii")]
    RII {
        step: u32,
        k_prime: u64,
        n: u64,
        vs: Vec<Vec<String>>,
        family_height: u32,
        new_k: u64,
        candidates_examined: u64,
        tree_nodes: u64,
    },
    Stuck {
        step: u32,
        op: String,
        reason: String,
        candidates_examined: u64,
    },
    POp {
        step: u32,
        part: u64,
        side: String,
        succeeded: bool,
        stem_after: Option<String>,
        element: Option<u32>,
    },
    POpsImplicit {
        step: u32,
        failed: u64,
    },
    Fac7 {
        step: u32,
        part: Option<u64>,
        path: Option<String>,
    },
    Invariants {
        step: u32,
        chain: bool,
        progress: bool,
        hereditary_fading: bool,
        partition_cover: bool,
        stems_in_pattern: bool,
        parts_avoid_stems: bool,
        tree_nonempty: bool,
        pass: bool,
    },
    StateDigest {
        step: u32,
        k: u64,
        tree_nodes: u64,
        tree_digest: String,
        deficit: u32,
    },
    Report {
        steps_completed: u32,
        status: String,
        branch_side: Option<String>,
        branch_parts: Vec<u64>,
        g_prefix: String,
    },
}

/// One JSON object per line.
pub fn render_trace(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: TraceRecord = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("trace line {}: {e}", i + 1)))?;
        out.push(r);
    }
    Ok(out)
}

/// Re-checks the invariants derivable from a trace alone and compares them
/// with the recorded verdicts: composite pass flags, the case-i loop bound,
/// stem growth along fires, and monotone part counts. Returns the list of
/// discrepancies.
pub fn verify_trace(records: &[TraceRecord]) -> Vec<String> {
    let mut problems = Vec::new();
    let mut last_k: Option<u64> = None;
    let mut fires_in_step: u64 = 0;
    for (i, r) in records.iter().enumerate() {
        match r {
            TraceRecord::StepBegin { .. } => fires_in_step = 0,
            TraceRecord::RI { stem_before, stem_after, fire_index, step, .. } => {
                fires_in_step += 1;
                if *fire_index != fires_in_step {
                    problems.push(format!("line {}: fire index out of order", i + 1));
                }
                if !stem_after.starts_with(stem_before.as_str())
                    || stem_after.len() <= stem_before.len()
                {
                    problems.push(format!(
                        "line {}: step {step} stem {stem_after} does not strictly extend {stem_before}",
                        i + 1
                    ));
                }
            }
            TraceRecord::RIDone { fires, fac6_bound, within_bound, step, .. } => {
                if *fires != fires_in_step {
                    problems.push(format!("line {}: step {step} fire count mismatch", i + 1));
                }
                if *within_bound != (fires < fac6_bound) {
                    problems.push(format!("line {}: step {step} loop-bound verdict wrong", i + 1));
                }
            }
            TraceRecord::Invariants {
                step,
                chain,
                progress,
                hereditary_fading,
                partition_cover,
                stems_in_pattern,
                parts_avoid_stems,
                tree_nonempty,
                pass,
            } => {
                let conj = *chain
                    && *progress
                    && *hereditary_fading
                    && *partition_cover
                    && *stems_in_pattern
                    && *parts_avoid_stems
                    && *tree_nonempty;
                if conj != *pass {
                    problems.push(format!(
                        "line {}: step {step} composite verdict disagrees with components",
                        i + 1
                    ));
                }
            }
            TraceRecord::StateDigest { k, .. } => {
                if let Some(prev) = last_k {
                    if *k < prev {
                        problems.push(format!("line {}: part count decreased", i + 1));
                    }
                }
                last_k = Some(*k);
            }
            _ => {}
        }
    }
    problems
}
