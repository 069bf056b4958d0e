//! Within-Gibbs kernels, sweep schedules and chain drivers.
//!
//! Every chain owns two random streams derived from `(seed, chain)`: one for the
//! kernel and one for the schedule. Cached and naive execution draw from them in the
//! same order, so the two modes produce the same chain up to floating-point
//! rounding in the target evaluation.

mod chain;
mod gaussian;
mod mh;
mod schedule;
mod slice;
mod trace;

pub use chain::{gibbs_sweep, run_chain, ChainState, ExecutionMode, Kernel, RunConfig, SweepStats};
pub use gaussian::{exact_gaussian_gibbs_update, gaussian_conditional, run_exact_gaussian_chain};
pub use mh::mh_update;
pub use schedule::{ScheduleKind, SweepSchedule};
pub use slice::{slice_update, SliceConfig, SliceOutcome};
pub use trace::{config_hash, read_samples_csv, SampleTable, Trace, TraceStatus};
