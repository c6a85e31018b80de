//! Table to coefficients to inverse to indices, in one call. Shared by the
//! CLI and the HTTP service so both produce identical numbers.

use serde::Serialize;

use crate::io_core::{leontief_inverse, technical_coefficients, IoError, IoTable, LeontiefInverse, TechCoefMatrix};
use crate::linkage::{LinkageReport, VThresholdRule};
use crate::structure::{StructureError, StructureOptions, StructureReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, Serialize)]
pub struct TableAnalysis {
    pub coefficients: TechCoefMatrix,
    pub inverse: LeontiefInverse,
    pub linkage: LinkageReport,
    pub structure: StructureReport,
}

pub fn analyze(
    table: &IoTable,
    v_rule: VThresholdRule,
    opts: StructureOptions,
) -> Result<TableAnalysis, AnalysisError> {
    let coefficients = technical_coefficients(table)?;
    let inverse = leontief_inverse(&coefficients)?;
    let linkage = LinkageReport::compute(&inverse, v_rule);
    let structure = StructureReport::compute(table, &coefficients, &inverse, &linkage, opts)?;
    Ok(TableAnalysis {
        coefficients,
        inverse,
        linkage,
        structure,
    })
}
