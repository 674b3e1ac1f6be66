//! Run artifact emission: schedule JSON, trajectory CSV, event log JSON
//! lines, metrics JSON and the overview SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use assembly_core::scenario::Scenario;
use assembly_core::sim::{RunResult, SIM_DT};

use crate::svg;
use crate::CliError;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serialization failed: {e}")))
}

/// `time_s,module_id,x_m,y_m,theta_rad` rows at every tick.
pub fn trajectory_csv(result: &RunResult) -> String {
    let mut out = String::with_capacity(result.trajectory.len() * 48 + 64);
    out.push_str("time_s,module_id,x_m,y_m,theta_rad\n");
    for s in &result.trajectory {
        let t = s.tick as f64 * SIM_DT;
        let _ = writeln!(
            out,
            "{t:.6},{},{:.9},{:.9},{:.9}",
            s.module, s.pose.x, s.pose.y, s.pose.theta
        );
    }
    out
}

/// One JSON object per line: `{"t":…, "event":…, "detail":…}`.
pub fn events_jsonl(result: &RunResult) -> Result<String, CliError> {
    let mut out = String::new();
    for event in &result.events {
        let line = serde_json::to_string(event)
            .map_err(|e| CliError::Runtime(format!("event serialization failed: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Write schedule.json, trajectory.csv, events.jsonl, metrics.json and
/// run.svg into `dir` (created if missing).
pub fn emit_outputs(scenario: &Scenario, result: &RunResult, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    write_file(dir, "schedule.json", &to_json(&result.schedule)?)?;
    write_file(dir, "trajectory.csv", &trajectory_csv(result))?;
    write_file(dir, "events.jsonl", &events_jsonl(result)?)?;
    write_file(dir, "metrics.json", &to_json(&result.metrics)?)?;
    write_file(dir, "run.svg", &svg::render_run(scenario, result))?;
    Ok(())
}
