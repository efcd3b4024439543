//! Helper selection for a single-block repair.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EmsrCode;
use crate::error::{Error, Result};

/// Blocks that must be contacted to repair `failed`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompulsorySets {
    pub failed: usize,
    /// `per_coordinate[j]`: blocks using the same inner node as `failed` at
    /// coordinate `j`.
    pub per_coordinate: Vec<BTreeSet<usize>>,
    pub union: BTreeSet<usize>,
}

impl CompulsorySets {
    pub fn counts(&self) -> Vec<usize> {
        self.per_coordinate.iter().map(BTreeSet::len).collect()
    }
}

pub fn compulsory_sets(code: &EmsrCode, failed: usize) -> Result<CompulsorySets> {
    if failed >= code.blocks() {
        return Err(Error::IndexOutOfRange(format!(
            "block {failed} of {}",
            code.blocks()
        )));
    }
    let per_coordinate: Vec<BTreeSet<usize>> = (0..code.outer().length())
        .map(|k| {
            let node = code.column(failed, k);
            (0..code.blocks())
                .filter(|&i| i != failed && code.column(i, k) == node)
                .collect()
        })
        .collect();
    let union = per_coordinate.iter().flatten().copied().collect();
    Ok(CompulsorySets {
        failed,
        per_coordinate,
        union,
    })
}

/// How the non-compulsory helpers are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HelperPolicy {
    Ascending,
    SeededRandom(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HelperChoice {
    Policy(HelperPolicy),
    Explicit(BTreeSet<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairPlan {
    pub failed: usize,
    pub compulsory: CompulsorySets,
    pub contacted: BTreeSet<usize>,
    pub not_contacted: BTreeSet<usize>,
}

pub fn plan_repair(code: &EmsrCode, failed: usize, choice: &HelperChoice) -> Result<RepairPlan> {
    let compulsory = compulsory_sets(code, failed)?;
    let m = code.blocks();
    let need = code.helpers();

    let contacted: BTreeSet<usize> = match choice {
        HelperChoice::Explicit(set) => {
            if set.contains(&failed) {
                return Err(Error::BadHelperSet(format!(
                    "failed block {failed} listed as helper"
                )));
            }
            if let Some(&b) = set.iter().find(|&&b| b >= m) {
                return Err(Error::BadHelperSet(format!("helper {b} out of range")));
            }
            if let Some(&q) = compulsory.union.iter().find(|q| !set.contains(q)) {
                return Err(Error::MissingCompulsory(q));
            }
            if set.len() != need {
                return Err(Error::BadPlanSize {
                    expected: need,
                    got: set.len(),
                });
            }
            set.clone()
        }
        HelperChoice::Policy(policy) => {
            if compulsory.union.len() > need {
                return Err(Error::BadPlanSize {
                    expected: need,
                    got: compulsory.union.len(),
                });
            }
            let mut free: Vec<usize> = (0..m)
                .filter(|&i| i != failed && !compulsory.union.contains(&i))
                .collect();
            if let HelperPolicy::SeededRandom(seed) = policy {
                free.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            }
            let extra = need - compulsory.union.len();
            compulsory
                .union
                .iter()
                .copied()
                .chain(free.into_iter().take(extra))
                .collect()
        }
    };

    let not_contacted = (0..m)
        .filter(|&i| i != failed && !contacted.contains(&i))
        .collect();
    Ok(RepairPlan {
        failed,
        compulsory,
        contacted,
        not_contacted,
    })
}
