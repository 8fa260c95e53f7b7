use std::io::Write;

use super::session::CurvePoint;
use super::Strategy;
use crate::learn::LearnerKind;

pub const CURVE_COLUMNS: [&str; 6] = ["iteration", "labeled_count", "accuracy", "strategy", "learner", "seed"];

/// One learning curve and the run it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveGroup {
    pub strategy: Strategy,
    pub learner: LearnerKind,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

/// Writes curves as CSV, one row per point, groups in the given order.
pub fn write_curves<W: Write>(out: W, groups: &[CurveGroup]) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CURVE_COLUMNS)?;
    for g in groups {
        for p in &g.points {
            writer.write_record([
                p.iteration.to_string(),
                p.labeled_count.to_string(),
                p.accuracy.to_string(),
                g.strategy.to_string(),
                g.learner.to_string(),
                g.seed.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}
