//! Executing a repair plan and accounting for its download.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EmsrCode, EmsrCodeword, RepairPlan};
use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::repair::{repair_block, HelperSource, RepairWorkspace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelperLoad {
    pub helper: usize,
    pub symbols: u64,
    /// Coordinates at which the helper's outer codeword equals the failed one.
    pub agreements: usize,
    pub within_budget: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandwidthReport {
    pub failed: usize,
    pub epsilon: f64,
    pub budget: f64,
    pub total: u64,
    pub helpers: Vec<HelperLoad>,
}

impl BandwidthReport {
    pub fn max_symbols(&self) -> u64 {
        self.helpers.iter().map(|h| h.symbols).max().unwrap_or(0)
    }

    pub fn per_helper(&self) -> BTreeMap<usize, u64> {
        self.helpers.iter().map(|h| (h.helper, h.symbols)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandwidthVerdict {
    /// Every helper stayed within the budget.
    pub pass: bool,
    pub max_symbols: u64,
    pub budget: f64,
    pub over_budget: Vec<usize>,
    /// `D / N >= 1 - epsilon / (r - 1)`.
    pub hypothesis_holds: bool,
    /// `epsilon >= r - 1`, where the hypothesis holds for any outer code.
    pub vacuous_epsilon: bool,
}

pub fn bandwidth_check(code: &EmsrCode, report: &BandwidthReport) -> BandwidthVerdict {
    let over_budget: Vec<usize> = report
        .helpers
        .iter()
        .filter(|h| !h.within_budget)
        .map(|h| h.helper)
        .collect();
    BandwidthVerdict {
        pass: over_budget.is_empty(),
        max_symbols: report.max_symbols(),
        budget: report.budget,
        over_budget,
        hypothesis_holds: code.bandwidth_hypothesis_holds(),
        vacuous_epsilon: code.epsilon() >= code.r() as f64 - 1.0,
    }
}

fn within(symbols: u64, budget: f64) -> bool {
    symbols as f64 <= budget + 1e-9
}

fn run<S: HelperSource + ?Sized>(
    code: &EmsrCode,
    source: &S,
    plan: &RepairPlan,
    record: bool,
) -> Result<(Vec<FieldElement>, BandwidthReport, Vec<RepairWorkspace>)> {
    if plan.contacted.len() != code.helpers() {
        return Err(Error::BadPlanSize {
            expected: code.helpers(),
            got: plan.contacted.len(),
        });
    }
    let out = repair_block(&code.layout(), plan.failed, &plan.contacted, source, record)?;
    let budget = code.helper_budget();
    let n = code.outer().length();
    let helpers = plan
        .contacted
        .iter()
        .map(|&h| {
            let symbols = out.trace.get(h);
            HelperLoad {
                helper: h,
                symbols,
                agreements: n - code.outer().difference_weight(h, plan.failed),
                within_budget: within(symbols, budget),
            }
        })
        .collect();
    let report = BandwidthReport {
        failed: plan.failed,
        epsilon: code.epsilon(),
        budget,
        total: out.trace.total(),
        helpers,
    };
    Ok((out.block, report, out.workspaces))
}

/// Repairs `plan.failed` reading only the planned helpers from `source`.
pub fn execute_repair<S: HelperSource + ?Sized>(
    code: &EmsrCode,
    source: &S,
    plan: &RepairPlan,
) -> Result<(Vec<FieldElement>, BandwidthReport)> {
    run(code, source, plan, false).map(|(b, r, _)| (b, r))
}

/// As [`execute_repair`], also returning the per-group intermediate values.
pub fn execute_repair_traced<S: HelperSource + ?Sized>(
    code: &EmsrCode,
    source: &S,
    plan: &RepairPlan,
) -> Result<(Vec<FieldElement>, BandwidthReport, Vec<RepairWorkspace>)> {
    run(code, source, plan, true)
}

/// Repairs a block of a stored word and checks that the completed word
/// satisfies every parity equation.
pub fn repair_codeword(
    code: &EmsrCode,
    word: &EmsrCodeword,
    plan: &RepairPlan,
) -> Result<(Vec<FieldElement>, BandwidthReport)> {
    let layout = code.layout();
    layout.check_shape(&word.blocks)?;
    let (block, report) = execute_repair(code, &word.blocks, plan)?;
    let mut completed = word.blocks.clone();
    completed[plan.failed] = block.clone();
    if !layout.satisfies_parity(&completed) {
        return Err(Error::NotACodeword);
    }
    Ok((block, report))
}
