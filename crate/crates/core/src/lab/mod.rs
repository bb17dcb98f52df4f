//! Instance generators, the exact repair analysis for `Sym` and `Par_k`,
//! inequality sweeps and the Monte Carlo harness.

pub mod analysis;
pub mod appendix;
pub mod harness;
pub mod instances;

pub use analysis::{analyze_par, analyze_sym, even_deviation_grid, odd_parity_prob, repair_par, repair_sym, ParReport, Repair, SymReport};
pub use appendix::{check_appendix_bounds, AppendixRanges, AppendixReport};
pub use harness::{
    derive_seed, estimate_acceptance, estimate_with, run_experiment, wilson, write_reports, Estimate, ExperimentConfig, ExperimentRow,
    RunOptions, Source, Z99,
};
pub use instances::{gen_inv, gen_par, gen_sym, generate, perturb, random_member, Family, HardInstance};
