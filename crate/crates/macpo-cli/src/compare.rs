//! Scheme comparison grid: run each (scheme, seed) cell, tabulate final
//! rewards with across-seed mean and standard deviation.

use anyhow::{bail, Result};
use std::fmt::Write as _;
use std::path::Path;

use macpo_core::config::RunConfig;
use macpo_core::priority::Scheme;

use crate::train::{run_training, TrainOptions};

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub scheme: Scheme,
    pub finals: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone)]
pub struct CompareTable {
    pub seeds: Vec<u64>,
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<14}", "scheme");
        for seed in &self.seeds {
            let _ = write!(out, " {:>10}", format!("seed {seed}"));
        }
        let _ = writeln!(out, " {:>10} {:>10}", "mean", "std");
        for row in &self.rows {
            let _ = write!(out, "{:<14}", row.scheme.to_string());
            for value in &row.finals {
                let _ = write!(out, " {value:>10.3}");
            }
            let _ = writeln!(out, " {:>10.3} {:>10.3}", row.mean, row.std_dev);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme");
        for seed in &self.seeds {
            let _ = write!(out, ",seed_{seed}");
        }
        out.push_str(",mean,std\n");
        for row in &self.rows {
            let _ = write!(out, "{}", row.scheme);
            for value in &row.finals {
                let _ = write!(out, ",{value}");
            }
            let _ = writeln!(out, ",{},{}", row.mean, row.std_dev);
        }
        out
    }
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Runs every (scheme, seed) cell sequentially; each cell is internally
/// deterministic. Learning curves land in `out_dir/<scheme>_seed<seed>/`.
pub fn run_compare(
    base: &RunConfig,
    schemes: &[Scheme],
    seeds: &[u64],
    out_dir: &Path,
    opts: &TrainOptions,
) -> Result<CompareTable> {
    if schemes.is_empty() {
        bail!("compare needs at least one scheme");
    }
    if seeds.is_empty() {
        bail!("compare needs at least one seed");
    }
    let mut rows = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let mut finals = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let cfg = RunConfig {
                scheme,
                seed,
                ..base.clone()
            };
            let cell_dir = out_dir.join(format!("{scheme}_seed{seed}"));
            let outcome = run_training(&cfg, &cell_dir, opts)?;
            finals.push(outcome.final_eval_mean);
        }
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        let std_dev = sample_std(&finals, mean);
        rows.push(CompareRow {
            scheme,
            finals,
            mean,
            std_dev,
        });
    }
    let table = CompareTable {
        seeds: seeds.to_vec(),
        rows,
    };
    std::fs::write(out_dir.join("compare.csv"), table.to_csv())?;
    Ok(table)
}
