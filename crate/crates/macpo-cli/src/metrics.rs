//! Training metrics CSV with a fixed, documented schema.

use anyhow::{anyhow, Context, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "env_steps,episodes,train_steps,mean_episode_reward,loss,\
weight_raw_mean,weight_raw_max,weight_entropy,epsilon,wall_seconds";

/// One evaluation-point row of the metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub env_steps: u64,
    pub episodes: u64,
    pub train_steps: u64,
    /// Mean total reward over the evaluation episodes at this point.
    pub mean_episode_reward: f64,
    pub loss: f64,
    pub weight_raw_mean: f64,
    pub weight_raw_max: f64,
    pub weight_entropy: f64,
    pub epsilon: f64,
    /// 0.0 in deterministic mode so byte-identical reruns stay possible.
    pub wall_seconds: f64,
}

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.env_steps,
            self.episodes,
            self.train_steps,
            self.mean_episode_reward,
            self.loss,
            self.weight_raw_mean,
            self.weight_raw_max,
            self.weight_entropy,
            self.epsilon,
            self.wall_seconds
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(anyhow!("metrics row has {} fields, expected 10", fields.len()));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| anyhow!("field {i} '{}' is not a number", fields[i]))
        };
        let int = |i: usize| -> Result<u64> {
            fields[i]
                .parse::<u64>()
                .map_err(|_| anyhow!("field {i} '{}' is not an integer", fields[i]))
        };
        Ok(Self {
            env_steps: int(0)?,
            episodes: int(1)?,
            train_steps: int(2)?,
            mean_episode_reward: num(3)?,
            loss: num(4)?,
            weight_raw_mean: num(5)?,
            weight_raw_max: num(6)?,
            weight_entropy: num(7)?,
            epsilon: num(8)?,
            wall_seconds: num(9)?,
        })
    }

    pub fn all_finite(&self) -> bool {
        [
            self.mean_episode_reward,
            self.loss,
            self.weight_raw_mean,
            self.weight_raw_max,
            self.weight_entropy,
            self.epsilon,
            self.wall_seconds,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Incrementally flushed CSV writer.
pub struct MetricsWriter {
    writer: BufWriter<File>,
    path: PathBuf,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path)
            .with_context(|| format!("creating metrics file {}", path.display()))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{CSV_HEADER}")?;
        writer.flush()?;
        Ok(Self {
            writer,
            path: path.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write_row(&mut self, row: &MetricsRow) -> Result<()> {
        writeln!(self.writer, "{}", row.to_csv_line())?;
        self.writer.flush()?;
        Ok(())
    }
}

/// Parses a metrics CSV back into rows (used by tests and `compare`).
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading metrics {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty metrics file"))?;
    if header != CSV_HEADER {
        return Err(anyhow!("unexpected metrics header: {header}"));
    }
    lines.map(MetricsRow::parse).collect()
}
