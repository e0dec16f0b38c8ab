//! Characteristic solvers: the slowdown method near future timelike infinity,
//! the Picard iteration near spacelike infinity, gluing of local solutions and
//! convergence reports.

mod glue;
mod hoermander;
mod picard;
mod report;

pub use glue::{glue, glue_levels, GlueReport};
pub use hoermander::{solve_hoermander, HoermanderRun, LambdaSchedule};
pub use report::{convergence_report, log_ratios, ConvergenceReport, RunRef};
pub use picard::{leaf_energy, solve_picard, LeafSample, PatchSolution, PicardConfig, PicardRun};

/// Thresholds of the convergence and gluing checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Final λ-difference relative to the first.
    pub tol_rel: f64,
    /// Picard stopping threshold on difference energies.
    pub tol_abs: f64,
    /// L² mismatch allowed at a gluing interface.
    pub tol_glue: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_rel: 1e-2, tol_abs: 1e-8, tol_glue: 1e-6 }
    }
}
