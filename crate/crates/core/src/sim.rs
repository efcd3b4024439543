//! In-memory storage cluster for repeated single-failure repairs.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emsr::{
    bandwidth_check, execute_repair, plan_repair, EmsrCode, EmsrCodeword, EmsrParams, HelperChoice,
    HelperPolicy, InnerParams, OuterParams,
};
use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::repair::HelperSource;

/// One node per block. Failing a node wipes its shard.
#[derive(Clone, Debug)]
pub struct Cluster {
    shards: Vec<Vec<FieldElement>>,
    live: Vec<bool>,
}

impl Cluster {
    pub fn new(word: &EmsrCodeword) -> Self {
        Cluster {
            live: vec![true; word.blocks.len()],
            shards: word.blocks.clone(),
        }
    }

    pub fn nodes(&self) -> usize {
        self.shards.len()
    }

    pub fn is_live(&self, node: usize) -> bool {
        self.live.get(node).copied().unwrap_or(false)
    }

    pub fn shard(&self, node: usize) -> Option<&[FieldElement]> {
        self.is_live(node).then(|| self.shards[node].as_slice())
    }

    pub fn fail(&mut self, node: usize) -> Result<()> {
        if node >= self.nodes() {
            return Err(Error::IndexOutOfRange(format!("node {node}")));
        }
        self.shards[node]
            .iter_mut()
            .for_each(|v| *v = FieldElement::ZERO);
        self.live[node] = false;
        Ok(())
    }

    pub fn restore(&mut self, node: usize, data: Vec<FieldElement>) -> Result<()> {
        if node >= self.nodes() {
            return Err(Error::IndexOutOfRange(format!("node {node}")));
        }
        self.shards[node] = data;
        self.live[node] = true;
        Ok(())
    }
}

impl HelperSource for Cluster {
    fn read(&self, block: usize, offsets: &[usize]) -> Result<Vec<FieldElement>> {
        if block < self.nodes() && !self.live[block] {
            return Err(Error::AccessDenied(block));
        }
        self.shards.read(block, offsets)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailurePolicy {
    #[default]
    RoundRobin,
    SeededRandom,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HelperSelection {
    #[default]
    Ascending,
    SeededRandom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub inner: InnerParams,
    pub outer: OuterParams,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub failure_policy: FailurePolicy,
    #[serde(default)]
    pub helper_policy: HelperSelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
}

impl SimConfig {
    pub fn params(&self) -> EmsrParams {
        EmsrParams {
            inner: self.inner,
            outer: self.outer,
            epsilon: self.epsilon,
            modulus: self.p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub failed: usize,
    pub helpers: Vec<usize>,
    pub compulsory: usize,
    pub max_helper_symbols: u64,
    pub total_symbols: u64,
    pub budget: f64,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub trials: usize,
    pub passed: usize,
    pub budget: f64,
    pub max_helper_symbols: u64,
    pub mean_helper_symbols: f64,
    /// Compulsory-union size -> number of trials.
    pub compulsory_histogram: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub modulus: u32,
    pub trials: Vec<TrialReport>,
    pub summary: SimSummary,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

pub fn random_message(code: &EmsrCode, seed: u64) -> Vec<FieldElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = code.field().modulus() as u64;
    (0..code.message_len())
        .map(|_| code.field().elem(rng.gen_range(0..p)))
        .collect()
}

fn run_trial(
    code: &EmsrCode,
    word: &EmsrCodeword,
    config: &SimConfig,
    trial: usize,
) -> Result<TrialReport> {
    let start = Instant::now();
    let mut rng = trial_rng(config.seed, trial);
    let failed = match config.failure_policy {
        FailurePolicy::RoundRobin => trial % code.blocks(),
        FailurePolicy::SeededRandom => rng.gen_range(0..code.blocks()),
    };
    let policy = match config.helper_policy {
        HelperSelection::Ascending => HelperPolicy::Ascending,
        HelperSelection::SeededRandom => HelperPolicy::SeededRandom(rng.gen()),
    };

    let mut cluster = Cluster::new(word);
    cluster.fail(failed)?;
    let plan = plan_repair(code, failed, &HelperChoice::Policy(policy))?;
    let (block, report) = execute_repair(code, &cluster, &plan)?;
    if block != word.blocks[failed] {
        return Err(Error::SimulationFailure { trial, failed });
    }
    cluster.restore(failed, block)?;
    let verdict = bandwidth_check(code, &report);
    Ok(TrialReport {
        trial,
        failed,
        helpers: plan.contacted.iter().copied().collect(),
        compulsory: plan.compulsory.union.len(),
        max_helper_symbols: verdict.max_symbols,
        total_symbols: report.total,
        budget: report.budget,
        pass: verdict.pass,
        wall_time: start.elapsed(),
    })
}

/// Runs `config.trials` independent fail-and-repair trials on `word`.
pub fn run_trials(code: &EmsrCode, word: &EmsrCodeword, config: &SimConfig) -> Result<SimReport> {
    let trials: Vec<TrialReport> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(code, word, config, t))
        .collect::<Result<_>>()?;

    let mut histogram = BTreeMap::new();
    for t in &trials {
        *histogram.entry(t.compulsory).or_default() += 1;
    }
    let helper_count: u64 = trials.iter().map(|t| t.helpers.len() as u64).sum();
    let symbols: u64 = trials.iter().map(|t| t.total_symbols).sum();
    let summary = SimSummary {
        trials: trials.len(),
        passed: trials.iter().filter(|t| t.pass).count(),
        budget: code.helper_budget(),
        max_helper_symbols: trials
            .iter()
            .map(|t| t.max_helper_symbols)
            .max()
            .unwrap_or(0),
        mean_helper_symbols: if helper_count == 0 {
            0.0
        } else {
            symbols as f64 / helper_count as f64
        },
        compulsory_histogram: histogram,
    };
    Ok(SimReport {
        config: config.clone(),
        modulus: code.field().modulus(),
        trials,
        summary,
    })
}

/// Builds the code, encodes a seeded random message and runs the trials.
pub fn simulate(config: &SimConfig) -> Result<SimReport> {
    let code = EmsrCode::build(&config.params())?;
    let word = code.encode(&random_message(&code, config.seed))?;
    run_trials(&code, &word, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(trials: usize) -> SimConfig {
        let p = EmsrParams::desk();
        SimConfig {
            inner: p.inner,
            outer: p.outer,
            epsilon: 0.5,
            trials,
            seed: 7,
            failure_policy: FailurePolicy::RoundRobin,
            helper_policy: HelperSelection::Ascending,
            p: None,
        }
    }

    #[test]
    fn failed_node_reads_are_denied() {
        let code = EmsrCode::build(&EmsrParams::desk()).unwrap();
        let word = code.encode(&random_message(&code, 1)).unwrap();
        let mut cluster = Cluster::new(&word);
        cluster.fail(4).unwrap();
        assert!(!cluster.is_live(4));
        assert!(cluster.shard(4).is_none());
        assert_eq!(cluster.read(4, &[0]), Err(Error::AccessDenied(4)));
        assert_eq!(cluster.read(5, &[0]).unwrap(), vec![word.blocks[5][0]]);
    }

    #[test]
    fn round_robin_covers_every_block() {
        let report = simulate(&config(25)).unwrap();
        let failed: Vec<usize> = report.trials.iter().map(|t| t.failed).collect();
        assert_eq!(failed, (0..25).collect::<Vec<_>>());
        assert_eq!(report.summary.passed, 25);
        assert_eq!(report.summary.max_helper_symbols, 80);
        assert_eq!(
            report.summary.compulsory_histogram,
            BTreeMap::from([(16, 25)])
        );
    }

    #[test]
    fn reports_are_deterministic() {
        let mut c = config(12);
        c.failure_policy = FailurePolicy::SeededRandom;
        c.helper_policy = HelperSelection::SeededRandom;
        let a = serde_json::to_string(&simulate(&c).unwrap()).unwrap();
        let b = serde_json::to_string(&simulate(&c).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let text = r#"{"inner":{"n":5,"k":2,"t":3},"outer":{"q":5,"N":4,"K":2},
            "epsilon":0.5,"trials":1,"seed":0,"bogus":1}"#;
        assert!(serde_json::from_str::<SimConfig>(text).is_err());
        let ok = text.replace(r#","bogus":1"#, "");
        let c: SimConfig = serde_json::from_str(&ok).unwrap();
        assert_eq!(c.failure_policy, FailurePolicy::RoundRobin);
    }
}
