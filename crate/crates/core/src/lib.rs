//! Input-output analysis, technology assessment, merger screening and
//! production-plan evaluation.

pub mod analysis;
pub mod engine;
pub mod io_core;
pub mod linkage;
pub mod matrix;
pub mod merger;
pub mod structure;
pub mod service;
pub mod store;
pub mod tech;

pub use engine::{evaluate, Evaluation, ProductionPlan};
pub use io_core::{leontief_inverse, load_io_table, technical_coefficients, IoTable, LeontiefInverse, TechCoefMatrix};
pub use linkage::LinkageReport;
pub use merger::{screen, HhiVerdict, MergerScenario};
pub use tech::{TechClass, TechnologyProfile};
