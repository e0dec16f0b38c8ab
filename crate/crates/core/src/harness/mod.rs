//! Configuration, reference solutions, standard data and the experiment suites.

pub mod fixtures;
pub mod oracles;

pub use oracles::{
    cylinder_mode, dalembert_oracle, manufactured_oracle, oracle_data, DalembertOracle, OracleKind, OracleSolution, Profile,
};
pub mod config;
pub mod suites;

pub use config::{ConfigFile, ExperimentConfig, Model};
pub use suites::{run_experiment, Audit, SuiteReport, SUITES};
