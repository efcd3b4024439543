//! Epsilon-MSR codes: an inner MSR array code composed with an outer code
//! so that single-block repair needs almost-minimal download from every
//! helper while only a few helpers are mandatory.
//!
//! ```
//! use emsr_core::{EmsrCode, EmsrParams, HelperChoice, HelperPolicy};
//!
//! let code = EmsrCode::build(&EmsrParams::desk()).unwrap();
//! let msg = vec![code.field().elem(3); code.message_len()];
//! let word = code.encode(&msg).unwrap();
//!
//! let plan = code.plan(0, &HelperChoice::Policy(HelperPolicy::Ascending)).unwrap();
//! let (block, report) = emsr_core::execute_repair(&code, &word.blocks, &plan).unwrap();
//! assert_eq!(block, word.blocks[0]);
//! assert!(report.max_symbols() as f64 <= report.budget);
//! ```

pub mod emsr;
pub mod error;
pub mod gf;
pub mod inner;
mod layout;
pub mod outer;
pub mod repair;
pub mod sary;
pub mod sim;

pub use emsr::{
    bandwidth_check, compulsory_sets, execute_repair, execute_repair_traced, mds_check,
    plan_repair, repair_codeword, select_scalars, validate_scalars, BandwidthReport,
    BandwidthVerdict, CompulsorySets, EmsrCode, EmsrCodeword, EmsrParams, HelperChoice, HelperLoad,
    HelperPolicy, InnerParams, MdsMode, MdsReport, OuterParams, RepairPlan,
};
pub use error::{Error, Result};
pub use gf::{ff_inv, mat_rank, mat_solve, Field, FieldElement, Matrix};
pub use inner::{InnerCodeword, InnerMsrCode};
pub use outer::{
    ag_plan, build_rs_outer, full_weight_count, fw_lower_bound, OuterCode, PlanParams,
};
pub use repair::{interpolation_rows, DownloadTrace, HelperSource, RepairWorkspace};
pub use sary::{digit_replace, SAryIndex};
pub use sim::{Cluster, SimConfig, SimReport};
