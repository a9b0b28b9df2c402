//! Sweeps, figure presets and validation reports built on the engines.

pub mod recipes;
pub mod sweep;
pub mod validate;

pub use recipes::{apply_overrides, figure_recipe, FigureRecipe, Variant, FIGURES};
pub use sweep::{
    parse_rho_range, partial_path, run_sweep, run_sweep_to_file, SweepFailure, SweepResult, SweepRow, SweepSpec,
    CSV_HEADER,
};
pub use validate::{ks_tolerance, validate_report, KS_TOLERANCE, Arbitration, Check, Status, ValidationReport};
