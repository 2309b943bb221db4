//! Sweep specs: expansion into run configs, parallel execution and the
//! CSV summary.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use anyhow::{bail, Context, Result};
use bla_core::sim::default_f;
use bla_core::{run, AdversarySpec, Algorithm, RunConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Either an explicit seed list or a count meaning `0..count`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::List(Vec::new())
    }
}

impl Seeds {
    fn values(&self) -> Vec<u64> {
        match self {
            Seeds::Count(k) => (0..*k).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub algorithms: Vec<Algorithm>,
    /// Adversary names; `"all"` stands for every built-in one.
    #[serde(default)]
    pub adversaries: Vec<String>,
    #[serde(default)]
    pub seeds: Seeds,
    /// Fixed f for every n. Defaults to `floor((n - 1) / 3)`.
    #[serde(default)]
    pub f: Option<usize>,
    /// Byzantine counts to try. Defaults to `[f]`.
    #[serde(default)]
    pub t: Option<Vec<usize>>,
    /// Runs per point. Extra runs are replays whose reports must match the
    /// first byte for byte.
    #[serde(default = "one")]
    pub repetitions: usize,
}

fn one() -> usize {
    1
}

impl SweepSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read sweep spec {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid sweep spec {}", path.display()))
    }

    fn adversary_list(&self) -> Result<Vec<AdversarySpec>> {
        let mut out = Vec::new();
        for name in &self.adversaries {
            if name == "all" {
                out.extend(AdversarySpec::builtin());
            } else {
                out.push(name.parse().with_context(|| format!("in sweep spec adversaries: {name:?}"))?);
            }
        }
        Ok(out)
    }

    /// Every point in a fixed order (n, algorithm, adversary, t, seed),
    /// duplicates dropped. Fails if any point is not a valid config.
    pub fn expand(&self) -> Result<Vec<RunConfig>> {
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        let adversaries = self.adversary_list()?;
        let seeds = self.seeds.values();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &n in &self.n {
            let f = self.f.unwrap_or_else(|| default_f(n));
            let ts = self.t.clone().unwrap_or_else(|| vec![f]);
            for &alg in &self.algorithms {
                for &adv in &adversaries {
                    for &t in &ts {
                        for &seed in &seeds {
                            if n < 3 * f + 1 {
                                bail!("n = {n} cannot tolerate f = {f}: need n >= 3f + 1");
                            }
                            if t > f {
                                bail!("t = {t} exceeds f = {f} at n = {n}");
                            }
                            let c = RunConfig::generated(n, f, t, alg, adv, seed);
                            c.validate()?;
                            if seen.insert(config_hash(&c)) {
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            bail!("sweep spec expands to no points");
        }
        Ok(out)
    }
}

/// Hex SHA-256 of the config JSON; names the report file.
pub fn config_hash(c: &RunConfig) -> String {
    hex::encode(Sha256::digest(c.to_json().as_bytes()))
}

#[derive(Debug, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub f: usize,
    pub t: usize,
    pub algorithm: String,
    pub adversary: String,
    pub seed: u64,
    pub sub_rounds: usize,
    pub envelopes: usize,
    pub all_pass: bool,
}

#[derive(Debug)]
pub struct PointResult {
    pub row: SummaryRow,
    pub report: PathBuf,
    pub failed: Vec<String>,
}

pub struct SweepOptions {
    pub fail_fast: bool,
    pub invert_verdicts: bool,
}

pub struct SweepOutcome {
    pub points: usize,
    pub results: Vec<PointResult>,
    pub summary: PathBuf,
}

impl SweepOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &PointResult> {
        self.results.iter().filter(|r| !r.row.all_pass)
    }
}

fn run_point(c: &RunConfig, reports: &Path, repetitions: usize, invert: bool) -> Result<PointResult> {
    let once = || -> Result<bla_core::RunReport> {
        let mut r = run(c)?;
        if invert {
            r.invert_verdicts();
        }
        Ok(r)
    };
    let report = once()?;
    let json = report.to_json();
    let mut failed: Vec<String> = report.failed().map(|v| v.name.clone()).collect();
    for _ in 1..repetitions {
        if once()?.to_json() != json {
            failed.push("replay_mismatch".into());
            break;
        }
    }
    let path = reports.join(format!("{}.json", config_hash(c)));
    fs::write(&path, &json).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(PointResult {
        row: SummaryRow {
            n: c.n,
            f: c.f,
            t: c.t(),
            algorithm: c.algorithm.to_string(),
            adversary: c.adversary.to_string(),
            seed: c.seed,
            sub_rounds: report.sub_rounds,
            envelopes: report.envelopes.total,
            all_pass: failed.is_empty(),
        },
        report: path,
        failed,
    })
}

/// Runs every point (in parallel) and writes `reports/<hash>.json` plus
/// `summary.csv` under `out_dir`. Rows follow expansion order. With
/// `fail_fast`, points not yet started after the first failure are skipped.
pub fn sweep(spec: &SweepSpec, out_dir: &Path, opts: &SweepOptions) -> Result<SweepOutcome> {
    let points = spec.expand()?;
    let reports = out_dir.join("reports");
    fs::create_dir_all(&reports).with_context(|| format!("cannot create {}", reports.display()))?;
    let stop = AtomicBool::new(false);
    let results: Vec<Option<PointResult>> = points
        .par_iter()
        .map(|c| {
            if opts.fail_fast && stop.load(Ordering::Relaxed) {
                return Ok(None);
            }
            let r = run_point(c, &reports, spec.repetitions, opts.invert_verdicts)?;
            if !r.row.all_pass {
                stop.store(true, Ordering::Relaxed);
            }
            Ok(Some(r))
        })
        .collect::<Result<_>>()?;
    let results: Vec<PointResult> = results.into_iter().flatten().collect();

    let summary = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary).with_context(|| format!("cannot write {}", summary.display()))?;
    for r in &results {
        w.serialize(&r.row)?;
    }
    w.flush()?;
    Ok(SweepOutcome {
        points: points.len(),
        results,
        summary,
    })
}
