//! Report and plot-data emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use semidae::flow::Trajectory;
use semidae::periodic::Branch;

/// Relative output paths are resolved against this directory when it is set.
pub const OUT_DIR_VAR: &str = "SEMIDAE_OUT_DIR";

pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn create(path: &Path) -> Result<std::fs::File> {
    let path = resolve(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))
}

/// Pretty JSON to `out`, or to stdout.
pub fn write_report(report: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match out {
        Some(path) => create(path)?.write_all(text.as_bytes())?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    create(path)?.write_all(text.as_bytes())?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any double.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table with a mandatory header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn trajectory(traj: &Trajectory) -> Self {
        let first = traj.first();
        let header = std::iter::once("t".to_string())
            .chain((1..=first.p.len()).map(|i| format!("x{i}")))
            .chain((1..=first.q.len()).map(|i| format!("y{i}")))
            .chain(std::iter::once("residual".to_string()))
            .collect();
        let rows = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| {
                std::iter::once(*t)
                    .chain(s.p.iter().copied())
                    .chain(s.q.iter().copied())
                    .chain(std::iter::once(s.residual))
                    .map(num)
                    .collect()
            })
            .collect();
        Self { header, rows }
    }

    pub fn branch(branch: &Branch) -> Self {
        let k = branch.points.first().map_or(0, |p| p.p0.len());
        let header = ["step", "lambda"]
            .into_iter()
            .map(String::from)
            .chain((1..=k).map(|i| format!("p0_{i}")))
            .chain(["sup_norm", "shooting_residual", "termination"].map(String::from))
            .collect();
        let last = branch.points.len().saturating_sub(1);
        let rows = branch
            .points
            .iter()
            .enumerate()
            .map(|(i, bp)| {
                let tag = if i == last {
                    format!("{:?}", branch.termination)
                } else {
                    String::new()
                };
                std::iter::once(i.to_string())
                    .chain(std::iter::once(bp.lambda).chain(bp.p0.iter().copied()).map(num))
                    .chain([num(bp.sup_norm), num(bp.shooting_residual), tag])
                    .collect()
            })
            .collect();
        Self { header, rows }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}
