//! Scenario configuration: the external parameters of a simulation run.

use serde::{Deserialize, Serialize};

use crate::bits::BinaryString;
use crate::error::{Error, Result};
use crate::functionals::{Entry, FunctionalFamily, Output, ToyFunctional};
use crate::machine::ToyPrefixMachine;
use crate::pattern::BitPattern;
use crate::trees::FinTree;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub depth: u32,
    pub steps: u32,
    #[serde(default)]
    pub seed: u64,
    pub a_pattern: BitPattern,
    /// Oracle tag devoted to each step.
    pub schedule: Vec<u32>,
    pub budget_ri: u64,
    pub height_bound: u32,
    #[serde(default = "default_search_budget")]
    pub search_budget: u64,
    /// Stage budget for enumeration extraction driven from this scenario.
    #[serde(default = "default_stage_budget")]
    pub stage_budget: usize,
    pub q: QSpec,
    #[serde(default)]
    pub functionals: Vec<FunctionalSpec>,
}

fn default_search_budget() -> u64 {
    1 << 20
}

fn default_stage_budget() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QSpec {
    /// The full binary tree.
    Full { depth: u32 },
    /// Explicit pruned node set (given by its depth-length paths).
    Explicit { depth: u32, paths: Vec<BinaryString> },
    /// Homogeneous level-choice tree: allowed width-blocks per level.
    LevelChoice { width: u32, choices: Vec<Vec<BinaryString>> },
    /// Strings all of whose prefixes are c-incompressible for the given
    /// machine, truncated and pruned at the given depth.
    Incompressible { c: u32, depth: u32, programs: Vec<ProgramSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramSpec {
    pub program: BinaryString,
    pub output: BinaryString,
}

impl QSpec {
    pub fn build(&self) -> Result<FinTree> {
        match self {
            QSpec::Full { depth } => Ok(FinTree::full(*depth)),
            QSpec::Explicit { depth, paths } => {
                for p in paths {
                    if p.len() != *depth {
                        return Err(Error::Config(format!(
                            "path {p} does not have depth {depth}"
                        )));
                    }
                }
                Ok(FinTree::from_paths(*depth, paths.iter().copied()))
            }
            QSpec::LevelChoice { width, choices } => FinTree::level_choice(choices, *width),
            QSpec::Incompressible { c, depth, programs } => {
                let machine = ToyPrefixMachine::new(
                    programs.iter().map(|p| (p.program, p.output)).collect(),
                )?;
                // Grow level by level keeping incompressible prefixes, then
                // prune for full-depth extendability.
                let mut frontier = vec![BinaryString::empty()];
                for n in 1..=*depth {
                    let level: std::collections::BTreeSet<BinaryString> =
                        machine.incompressible_level(*c, n).into_iter().collect();
                    frontier = frontier
                        .into_iter()
                        .flat_map(|p| [p.push(false), p.push(true)])
                        .filter(|p| level.contains(p))
                        .collect();
                }
                Ok(FinTree::from_paths(*depth, frontier))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalSpec {
    pub tag: u32,
    pub index: u32,
    /// Enumeration-size bound; defaults to the index.
    #[serde(default)]
    pub bound: Option<u32>,
    pub entries: Vec<EntrySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntrySpec {
    pub prefix: BinaryString,
    pub input: u32,
    #[serde(default)]
    pub outputs: Option<Vec<BinaryString>>,
    #[serde(default)]
    pub big: bool,
}

impl EntrySpec {
    fn to_entry(&self) -> Result<Entry> {
        let output = match (&self.outputs, self.big) {
            (Some(_), true) => {
                return Err(Error::Config(
                    "entry cannot list outputs and be BIG at once".into(),
                ))
            }
            (Some(out), false) => Output::Set(out.clone()),
            (None, true) => Output::Oversized,
            (None, false) => {
                return Err(Error::Config(
                    "entry needs either outputs or big = true".into(),
                ))
            }
        };
        Ok(Entry { prefix: self.prefix, input: self.input, output })
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.depth < 2 || self.depth > 60 {
            return Err(Error::Config("depth must be between 2 and 60".into()));
        }
        if self.budget_ri == 0 || self.search_budget == 0 {
            return Err(Error::Config("budgets must be positive".into()));
        }
        if self.height_bound == 0 || self.height_bound > 62 {
            return Err(Error::Config("height bound must be in 1..=62".into()));
        }
        if (self.schedule.len() as u32) < self.steps {
            return Err(Error::Config(format!(
                "schedule covers {} steps but {} are configured",
                self.schedule.len(),
                self.steps
            )));
        }
        Ok(())
    }

    pub fn build_q(&self) -> Result<FinTree> {
        self.q.build()
    }

    pub fn build_functionals(&self) -> Result<FunctionalFamily> {
        let mut fam = FunctionalFamily::new();
        for spec in &self.functionals {
            let entries: Result<Vec<Entry>> = spec.entries.iter().map(|e| e.to_entry()).collect();
            let bound = spec.bound.unwrap_or(spec.index);
            fam.insert(spec.tag, spec.index, ToyFunctional::new(bound, entries?)?);
        }
        Ok(fam)
    }

    pub fn from_toml(text: &str) -> Result<Scenario> {
        let s: Scenario =
            toml::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}
