//! Audit output: per-iteration curve CSVs and a plain-text refinement log.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use minplus::csv::write_curve;
use minplus::rat::{int, to_decimal_trim};
use minplus::PwFunction;

use crate::iterate::{delay_bounds, fixpoint_at};
use crate::types::{CurveSet, StopMode, StopRule};
use crate::Result;

/// Writes every curve of every iteration under `dir` (created if missing)
/// as `iter<m>_flow<i>.csv`, values rendered with `digits` decimals.
pub fn write_history_csv(dir: &Path, history: &[CurveSet], digits: u32) -> Result<()> {
    fs::create_dir_all(dir)?;
    for set in history {
        for (i, f) in set.curves.iter().enumerate() {
            let path = dir.join(format!("iter{}_flow{}.csv", set.iteration, i));
            let mut w = BufWriter::new(fs::File::create(path)?);
            write_curve(&mut w, f, digits)?;
        }
    }
    Ok(())
}

/// Renders a refinement history as one line per iteration, each flow's
/// delay bound in microseconds, followed by the stop decision.
pub fn refinement_log(
    arrivals: &[PwFunction],
    history: &[CurveSet],
    stop: &StopRule,
) -> Result<String> {
    let micro = int(1_000_000);
    let mut out = String::new();
    for set in history {
        let delays = delay_bounds(arrivals, set)?;
        let cols: Vec<String> = delays
            .iter()
            .enumerate()
            .map(|(i, d)| format!("flow {i} {} us", to_decimal_trim(&(d * &micro), 6)))
            .collect();
        out.push_str(&format!("iteration {}: {}\n", set.iteration, cols.join(", ")));
    }
    let decision = match fixpoint_at(history) {
        Some(m) => format!("stop: stationary after {m} iterations\n"),
        None => {
            let last = history.last().map(|s| s.iteration).unwrap_or(0);
            if stop.mode == StopMode::DelayThreshold && last < stop.max_iter {
                format!(
                    "stop: delay improvements below {} us after iteration {last}\n",
                    to_decimal_trim(&(&stop.delay_epsilon * &micro), 6)
                )
            } else {
                format!("stop: iteration cap {} reached\n", stop.max_iter)
            }
        }
    };
    out.push_str(&decision);
    Ok(out)
}
