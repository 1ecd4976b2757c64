//! Raw CSV and summary JSON files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stats::Moments;
use super::{cell_id, RunRecord, SweepResult, SweepSummary};
use crate::error::{Error, Result};
use crate::reservoir::{horizon_price, TailPrior, TailRateFit};

/// One raw CSV line: one run at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub run_id: String,
    pub agent: String,
    pub env_family: String,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub d: Option<usize>,
    pub sigma: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub seed: u64,
    pub t: u64,
    pub cumulative_regret: f64,
    pub gated_override_count: u64,
    pub fresh_arm_count: u64,
}

pub fn csv_rows(runs: &[RunRecord]) -> impl Iterator<Item = CsvRow> + '_ {
    runs.iter().flat_map(|run| {
        let m = &run.meta;
        run.rows.iter().map(move |r| CsvRow {
            run_id: m.run_id.clone(),
            agent: m.agent.clone(),
            env_family: m.env_family.clone(),
            k: m.arms,
            d: m.dim,
            sigma: m.noise,
            h: m.depth,
            m: m.half_life,
            lambda: m.gate_price,
            l: m.surprisal_cap,
            seed: m.seed,
            t: r.t,
            cumulative_regret: r.cumulative_regret,
            gated_override_count: r.gated_overrides,
            fresh_arm_count: r.fresh_arms,
        })
    })
}

pub fn write_csv<W: Write>(runs: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in csv_rows(runs) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Paths of the files written for one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Writes `<name>.csv` and `<name>.summary.json` under `dir`.
pub fn write_sweep(result: &SweepResult, dir: &Path) -> Result<Written> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", result.summary.name));
    write_csv(
        &result.runs,
        std::io::BufWriter::new(fs::File::create(&csv)?),
    )?;
    let summary = dir.join(format!("{}.summary.json", result.summary.name));
    write_json(&result.summary, &summary)?;
    Ok(Written { csv, summary })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<SweepSummary> {
    Ok(serde_json::from_reader(std::io::BufReader::new(
        fs::File::open(path)?,
    ))?)
}

/// Largest absolute gap between the summary's means/standard errors and the
/// same statistics recomputed from raw rows. Errors if a summary cell or
/// checkpoint has no raw rows.
pub fn aggregation_gap(summary: &SweepSummary, rows: &[CsvRow]) -> Result<f64> {
    let mut cells: BTreeMap<(&str, u64), Moments> = BTreeMap::new();
    for row in rows {
        cells
            .entry((cell_id(&row.run_id), row.t))
            .or_default()
            .push(row.cumulative_regret);
    }
    let mut gap: f64 = 0.0;
    for s in &summary.rows {
        for (i, &t) in summary.checkpoints.iter().enumerate() {
            let m = cells
                .get(&(s.cell_id.as_str(), t))
                .ok_or_else(|| Error::Config(format!("no raw rows for {} at t={t}", s.cell_id)))?;
            if m.count != s.seeds {
                return Err(Error::Config(format!(
                    "{}: {} raw seeds, summary says {}",
                    s.cell_id, m.count, s.seeds
                )));
            }
            gap = gap
                .max((m.mean - s.mean_regret[i]).abs())
                .max((m.std_error() - s.std_error[i]).abs());
        }
    }
    Ok(gap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRateRow {
    pub horizon: u64,
    pub gap: f64,
    pub price: f64,
    pub mean_regret: f64,
    pub std_error: f64,
    pub mean_inspections: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRateSummary {
    pub prior: TailPrior,
    pub override_rate: Option<f64>,
    pub seeds: u64,
    pub surprisal_cap: f64,
    pub slope: f64,
    pub slope_std_error: f64,
    pub intercept: f64,
    pub rows: Vec<TailRateRow>,
}

impl TailRateSummary {
    pub fn new(
        fit: &TailRateFit,
        prior: TailPrior,
        override_rate: Option<f64>,
        seeds: u64,
        cap: f64,
    ) -> Result<Self> {
        let rows = fit
            .points
            .iter()
            .map(|p| {
                Ok(TailRateRow {
                    horizon: p.horizon,
                    gap: p.gap,
                    price: horizon_price(&prior, p.gap, cap)?,
                    mean_regret: p.mean_regret,
                    std_error: p.std_error,
                    mean_inspections: p.mean_inspections,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            prior,
            override_rate,
            seeds,
            surprisal_cap: cap,
            slope: fit.slope,
            slope_std_error: fit.slope_std_error,
            intercept: fit.intercept,
            rows,
        })
    }
}

/// Writes `<name>.csv` (one row per horizon) and `<name>.summary.json`.
pub fn write_tail_rate(summary: &TailRateSummary, dir: &Path, name: &str) -> Result<Written> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{name}.csv"));
    let mut w = csv::Writer::from_path(&csv)?;
    for row in &summary.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let json = dir.join(format!("{name}.summary.json"));
    write_json(summary, &json)?;
    Ok(Written { csv, summary: json })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delight::DelightConfig;
    use crate::harness::{run_sweep, AgentSpec, EnvSpec, SweepSpec};

    fn small() -> SweepResult {
        run_sweep(&SweepSpec {
            name: "io".into(),
            conditions: vec![
                EnvSpec::Bernoulli { arms: 4 },
                EnvSpec::Linear {
                    arms: 5,
                    dim: 2,
                    noise: 0.5,
                },
            ],
            agents: vec![
                AgentSpec::Delight(DelightConfig::default()),
                AgentSpec::Thompson,
            ],
            horizon: 40,
            seeds: 3,
            base_seed: 9,
            cold_start: false,
        })
        .unwrap()
    }

    #[test]
    fn csv_round_trip_and_header() {
        let result = small();
        let mut buf = Vec::new();
        write_csv(&result.runs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "run_id,agent,env_family,K,d,sigma,H,M,lambda,L,seed,t,cumulative_regret,gated_override_count,fresh_arm_count\n"
        ));
        // Labels contain commas, so run ids must be quoted.
        assert!(text.contains("\"io/c0/de[M=100,lambda=0.1,L=10]/s0\""));
        let rows = read_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, csv_rows(&result.runs).collect::<Vec<_>>());
        assert!(aggregation_gap(&result.summary, &rows).unwrap() <= 1e-12);
    }

    #[test]
    fn missing_rows_are_reported() {
        let result = small();
        let rows: Vec<CsvRow> = csv_rows(&result.runs).filter(|r| r.seed != 1).collect();
        assert!(aggregation_gap(&result.summary, &rows).is_err());
    }
}
