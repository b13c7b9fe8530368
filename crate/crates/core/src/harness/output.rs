use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One point of plot-ready output: `x,series,value,ci`, with `ci` the 95%
/// half-width or empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub x: String,
    pub series: String,
    pub value: f64,
    pub ci: Option<f64>,
}

impl PlotRow {
    pub fn new(x: impl Into<String>, series: impl Into<String>, value: f64, ci: Option<f64>) -> Self {
        Self {
            x: x.into(),
            series: series.into(),
            value,
            ci,
        }
    }

    pub fn csv(rows: &[PlotRow]) -> String {
        let mut out = String::from("x,series,value,ci\n");
        for r in rows {
            let ci = r.ci.map_or(String::new(), |c| c.to_string());
            out += &format!("{},{},{},{ci}\n", r.x, r.series, r.value);
        }
        out
    }
}

/// Writes `text`, creating parent directories.
pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
