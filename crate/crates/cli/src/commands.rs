use std::collections::BTreeSet;
use std::fs;
use std::io::{ErrorKind, Write};
use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::json;

use emsr_core::emsr::{bandwidth_check, execute_repair, BandwidthReport, BandwidthVerdict};
use emsr_core::outer::{ag_plan, build_rs_outer, fw_lower_bound};
use emsr_core::repair::HelperSource;
use emsr_core::sim::{random_message, run_trials, SimReport};
use emsr_core::{
    compulsory_sets, mds_check, EmsrCode, EmsrCodeword, Error, FieldElement, HelperChoice, MdsMode,
    RepairPlan,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::shard::{frame, shard_path, unframe, ShardFile, ShardHeader, ShardSet};
use crate::{CodeArgs, Command, OuterArgs};

pub fn run(command: Command) -> CliResult<ExitCode> {
    match command {
        Command::Build { code, out } => build(&code, out.as_deref()),
        Command::Encode { file, dir, code } => encode(&file, &dir, &code),
        Command::Fail { block, dir } => fail(block, &dir),
        Command::Repair {
            block,
            dir,
            helpers,
            eps,
        } => repair(block, &dir, helpers, eps),
        Command::Decode { dir, out } => decode(&dir, &out),
        Command::VerifyMds {
            code,
            exhaustive: _,
            sample,
            seed,
        } => verify_mds(&code, sample, seed),
        Command::CountFullWeight { outer } => count_full_weight(&outer),
        Command::FwBound { genus, outer } => fw_bound(genus, &outer),
        Command::PlanAg { r, eps, u } => print(&ag_plan(r, eps, u)?),
        Command::Simulate { config, csv, json } => simulate(&config, csv, json),
    }
}

fn print<T: Serialize>(value: &T) -> CliResult<ExitCode> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::io("writing stdout")(e)),
        _ => Ok(ExitCode::SUCCESS),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(CliError::io(format!("writing {}", path.display())))
}

#[derive(Serialize)]
struct Descriptor {
    params: emsr_core::EmsrParams,
    modulus: u32,
    r: usize,
    s: usize,
    ell: usize,
    blocks: usize,
    message_blocks: usize,
    helpers: usize,
    block_len: usize,
    helper_budget: f64,
    weight_distribution: Vec<u64>,
    lambda: Vec<Vec<u32>>,
    sigma: Vec<u32>,
}

fn build(args: &CodeArgs, out: Option<&Path>) -> CliResult<ExitCode> {
    let code = EmsrCode::build(&args.params())?;
    let d = Descriptor {
        params: code.params(),
        modulus: code.field().modulus(),
        r: code.r(),
        s: code.s(),
        ell: code.ell(),
        blocks: code.blocks(),
        message_blocks: code.message_blocks(),
        helpers: code.helpers(),
        block_len: code.block_len(),
        helper_budget: code.helper_budget(),
        weight_distribution: code.outer().weight_distribution().to_vec(),
        lambda: code
            .inner()
            .lambda_table()
            .iter()
            .map(|row| row.iter().map(|v| v.value()).collect())
            .collect(),
        sigma: code.sigma().iter().map(|v| v.value()).collect(),
    };
    match out {
        Some(path) => {
            let text = serde_json::to_string_pretty(&d).expect("serializable");
            write_file(path, text.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        None => print(&d),
    }
}

fn encode(file: &Path, dir: &Path, args: &CodeArgs) -> CliResult<ExitCode> {
    let data = fs::read(file).map_err(CliError::io(format!("reading {}", file.display())))?;
    let code = EmsrCode::build(&args.params())?;
    let symbols = frame(&data, code.field().modulus(), code.message_len());
    let stripes = symbols.len() / code.message_len();

    let mut payloads = vec![Vec::with_capacity(stripes * code.block_len()); code.blocks()];
    for message in symbols.chunks(code.message_len()) {
        let word = code.encode(message)?;
        for (payload, block) in payloads.iter_mut().zip(word.blocks) {
            payload.extend(block);
        }
    }
    fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    for (i, payload) in payloads.into_iter().enumerate() {
        let shard = ShardFile {
            header: ShardHeader::for_code(&code, i, payload.len()),
            payload,
        };
        shard.write(&shard_path(dir, i))?;
    }
    print(&json!({
        "input_bytes": data.len(),
        "modulus": code.field().modulus(),
        "blocks": code.blocks(),
        "stripes": stripes,
        "symbols_per_shard": stripes * code.block_len(),
    }))
}

fn fail(block: usize, dir: &Path) -> CliResult<ExitCode> {
    let path = shard_path(dir, block);
    if !path.exists() {
        return Err(CliError::MissingShard(block));
    }
    fs::remove_file(&path).map_err(CliError::io(format!("removing {}", path.display())))?;
    print(&json!({ "failed": block, "removed": path }))
}

/// One stripe of a shard set, seen as helper storage.
struct StripeSource<'a> {
    shards: &'a [Option<ShardFile>],
    unavailable: usize,
    stripe: usize,
    block_len: usize,
}

impl HelperSource for StripeSource<'_> {
    fn read(&self, block: usize, offsets: &[usize]) -> emsr_core::Result<Vec<FieldElement>> {
        let shard = match self.shards.get(block) {
            Some(Some(s)) if block != self.unavailable => s,
            _ => return Err(Error::AccessDenied(block)),
        };
        let base = self.stripe * self.block_len;
        Ok(offsets.iter().map(|&o| shard.payload[base + o]).collect())
    }
}

/// Compulsory helpers plus the lowest-indexed available free blocks.
fn default_plan(
    code: &EmsrCode,
    failed: usize,
    present: &BTreeSet<usize>,
) -> CliResult<RepairPlan> {
    let q = compulsory_sets(code, failed)?;
    if let Some(&missing) = q.union.iter().find(|b| !present.contains(b)) {
        return Err(Error::MissingCompulsory(missing).into());
    }
    let extra = code.helpers().saturating_sub(q.union.len());
    let free: Vec<usize> = present
        .iter()
        .copied()
        .filter(|b| *b != failed && !q.union.contains(b))
        .take(extra)
        .collect();
    let set: BTreeSet<usize> = q.union.iter().copied().chain(free).collect();
    Ok(code.plan(failed, &HelperChoice::Explicit(set))?)
}

#[derive(Serialize)]
struct RepairSummary {
    failed: usize,
    stripes: usize,
    contacted: Vec<usize>,
    not_contacted: Vec<usize>,
    compulsory: Vec<usize>,
    total_all_stripes: u64,
    /// Download of a single stripe; every stripe uses the same plan.
    report: BandwidthReport,
    verdict: BandwidthVerdict,
}

fn repair(block: usize, dir: &Path, helpers: Option<Vec<usize>>, eps: f64) -> CliResult<ExitCode> {
    let set = ShardSet::load(dir)?;
    let (code, stripes) = set.code(eps)?;
    if block >= code.blocks() {
        return Err(Error::IndexOutOfRange(format!("block {block} of {}", code.blocks())).into());
    }
    let present: BTreeSet<usize> = (0..code.blocks())
        .filter(|&b| b != block && set.shards[b].is_some())
        .collect();
    let plan = match helpers {
        Some(list) => {
            let chosen: BTreeSet<usize> = list.into_iter().collect();
            if let Some(&b) = chosen
                .iter()
                .find(|&&b| b != block && b < code.blocks() && !present.contains(&b))
            {
                return Err(CliError::MissingShard(b));
            }
            code.plan(block, &HelperChoice::Explicit(chosen))?
        }
        None => default_plan(&code, block, &present)?,
    };

    let len = code.block_len();
    let mut payload = Vec::with_capacity(stripes * len);
    let mut first: Option<BandwidthReport> = None;
    let mut total = 0;
    let all_present = present.len() == code.blocks() - 1;
    for stripe in 0..stripes {
        let source = StripeSource {
            shards: &set.shards,
            unavailable: block,
            stripe,
            block_len: len,
        };
        let (repaired, report) = execute_repair(&code, &source, &plan)?;
        if all_present {
            let blocks = (0..code.blocks())
                .map(|b| match &set.shards[b] {
                    _ if b == block => repaired.clone(),
                    Some(s) => s.payload[stripe * len..(stripe + 1) * len].to_vec(),
                    None => unreachable!("all other shards present"),
                })
                .collect();
            if !code.verify(&EmsrCodeword { blocks }) {
                return Err(Error::NotACodeword.into());
            }
        }
        total += report.total;
        payload.extend(repaired);
        first.get_or_insert(report);
    }
    let report = first.expect("at least one stripe");

    let header = ShardHeader {
        block: block as u32,
        ..set.header
    };
    ShardFile { header, payload }.write(&shard_path(dir, block))?;

    let verdict = bandwidth_check(&code, &report);
    print(&RepairSummary {
        failed: block,
        stripes,
        contacted: plan.contacted.iter().copied().collect(),
        not_contacted: plan.not_contacted.iter().copied().collect(),
        compulsory: plan.compulsory.union.iter().copied().collect(),
        total_all_stripes: total,
        report,
        verdict,
    })
}

fn decode(dir: &Path, out: &Path) -> CliResult<ExitCode> {
    let set = ShardSet::load(dir)?;
    let (code, stripes) = set.code(0.5)?;
    let missing = set.shards.iter().filter(|s| s.is_none()).count();
    if missing > code.r() {
        return Err(Error::TooManyErasures {
            erased: missing,
            max: code.r(),
        }
        .into());
    }
    let len = code.block_len();
    let mut symbols = Vec::with_capacity(stripes * code.message_len());
    for stripe in 0..stripes {
        let blocks: Vec<Option<Vec<FieldElement>>> = set
            .shards
            .iter()
            .map(|s| {
                s.as_ref()
                    .map(|s| s.payload[stripe * len..(stripe + 1) * len].to_vec())
            })
            .collect();
        symbols.extend(code.decode_message(&blocks)?);
    }
    let data = unframe(&symbols, code.field().modulus())?;
    write_file(out, &data)?;
    print(&json!({ "output_bytes": data.len(), "missing_shards": missing, "stripes": stripes }))
}

fn verify_mds(args: &CodeArgs, sample: Option<usize>, seed: u64) -> CliResult<ExitCode> {
    let code = EmsrCode::build(&args.params())?;
    let mode = match sample {
        Some(count) => MdsMode::Sample { count, seed },
        None => MdsMode::Exhaustive,
    };
    let report = mds_check(&code, mode);
    let ok = report.is_mds();
    print(&json!({
        "mode": mode,
        "modulus": code.field().modulus(),
        "subsets": report.subsets,
        "matrices": report.matrices,
        "is_mds": ok,
        "violations": report.violations,
    }))?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn count_full_weight(args: &OuterArgs) -> CliResult<ExitCode> {
    let rs = build_rs_outer(args.q, args.big_n, args.big_k)?;
    print(&json!({
        "q": args.q,
        "N": args.big_n,
        "K": args.big_k,
        "weight_distribution": rs.weight_distribution(),
        "distance": rs.distance(),
        "full_weight": rs.full_weight(),
    }))
}

fn fw_bound(genus: u64, args: &OuterArgs) -> CliResult<ExitCode> {
    let bound = fw_lower_bound(args.big_n as u64, args.big_k as u64, genus, args.q as u64)?;
    let mut out =
        json!({ "N": args.big_n, "K": args.big_k, "genus": genus, "q": args.q, "bound": bound });
    if genus == 0 {
        // Genus 0 is Reed-Solomon, where the exact count is available.
        let rs = build_rs_outer(args.q, args.big_n, args.big_k)?;
        out["full_weight"] = json!(rs.full_weight());
        out["bound_holds"] = json!(bound <= rs.full_weight() as i128);
    }
    print(&out)
}

fn simulate(
    path: &Path,
    csv_path: Option<std::path::PathBuf>,
    json_path: Option<std::path::PathBuf>,
) -> CliResult<ExitCode> {
    let cfg = RunConfig::load(path)?;
    let sim = cfg.sim_config();
    let code = EmsrCode::build(&sim.params()).map_err(|e| match e {
        Error::InvalidParameters(m) => CliError::BadConfig(m),
        other => other.into(),
    })?;
    let word = code.encode(&random_message(&code, sim.seed))?;
    let report = run_trials(&code, &word, &sim)?;

    if let Some(p) = csv_path.or(cfg.output.csv) {
        write_csv(&p, &report)?;
    }
    if let Some(p) = json_path.or(cfg.output.json) {
        let text = serde_json::to_string_pretty(&report).expect("serializable");
        write_file(&p, text.as_bytes())?;
    }
    print(&json!({ "modulus": report.modulus, "summary": report.summary }))
}

fn write_csv(path: &Path, report: &SimReport) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io {
        context: format!("opening {}", path.display()),
        source: e.into(),
    })?;
    let to_io = |e: csv::Error| CliError::Io {
        context: format!("writing {}", path.display()),
        source: e.into(),
    };
    w.write_record([
        "trial",
        "failed",
        "helpers",
        "compulsory",
        "max_helper_symbols",
        "budget_symbols",
        "pass",
    ])
    .map_err(to_io)?;
    for t in &report.trials {
        w.write_record([
            t.trial.to_string(),
            t.failed.to_string(),
            t.helpers.len().to_string(),
            t.compulsory.to_string(),
            t.max_helper_symbols.to_string(),
            t.budget.to_string(),
            t.pass.to_string(),
        ])
        .map_err(to_io)?;
    }
    w.flush()
        .map_err(CliError::io(format!("writing {}", path.display())))
}
