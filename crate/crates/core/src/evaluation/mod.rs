//! Scoring and inspecting extracted models.

mod bench;
mod fidelity;
mod grid;
mod inspect;

pub use bench::{benchmark_deployment, BenchmarkReport, WARMUP_EPISODES};
pub use fidelity::{fidelity, fidelity_parallel, FidelityReport};
pub use grid::{policy_grid, GridRanges, PolicyGrid};
pub use inspect::{inspect_top_k, render_table, InspectionReport};
