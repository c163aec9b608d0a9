//! Comparison of a fit against the generating scenario.

use crate::error::{Error, Result};
use crate::io::{FitArtifact, Stage};
use crate::simulator::{relative_error, ErrorScale, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub block: String,
    pub stage: Stage,
    pub relative_error: f64,
}

/// One row per block and stage, blocks in column order.
pub fn error_report(
    fit: &FitArtifact,
    truth: &Scenario,
    scale: ErrorScale,
) -> Result<Vec<ErrorRow>> {
    if truth.community_sizes.len() != fit.communities {
        return Err(Error::Data(format!(
            "fit has {} communities but the truth has {}",
            fit.communities,
            truth.community_sizes.len()
        )));
    }
    let mut rows = Vec::with_capacity(3 * fit.blocks.len());
    for (p, block) in fit.blocks.iter().enumerate() {
        for stage in Stage::ALL {
            let est = fit.step_function(stage, p)?;
            rows.push(ErrorRow {
                block: block.clone(),
                stage,
                relative_error: relative_error(&est, &truth.connectivity[p], scale)?,
            });
        }
    }
    Ok(rows)
}

/// CSV `block,stage,relative_error`.
pub fn report_csv(rows: &[ErrorRow]) -> String {
    let mut out = String::from("block,stage,relative_error\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.block,
            r.stage.name(),
            r.relative_error
        ));
    }
    out
}
