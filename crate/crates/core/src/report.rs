//! End-to-end assessment and report writers.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::case::{Network, SystemTotals};
use crate::config::AssessmentConfig;
use crate::engine::{enumerate_all, Progress};
use crate::error::{Error, Result};
use crate::powerflow::solve_power_flow;
use crate::relay::{instantiate_relays, RelayType};
use crate::risk::{score, sigma_histogram, HistogramBin, RiskRecord, SigmaHistogram};

/// Share of one relay type among the critical rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeShare {
    pub relay_type: RelayType,
    pub count: usize,
    pub percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskReport {
    pub case_name: String,
    pub seed: u64,
    pub trials: usize,
    pub base_case: SystemTotals,
    /// One row per relay slot, ordered by substation then relay type.
    pub rows: Vec<RiskRecord>,
    /// Indices into `rows` whose average risk is exactly 1.
    pub critical: Vec<usize>,
    pub critical_by_type: Vec<TypeShare>,
    pub histogram: SigmaHistogram,
}

impl RiskReport {
    pub fn from_records(case_name: &str, cfg: &AssessmentConfig, base_case: SystemTotals, rows: Vec<RiskRecord>) -> Self {
        let critical: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].is_critical()).collect();
        let sigmas: Vec<f64> = rows.iter().filter(|r| r.available).map(|r| r.sigma).collect();
        let critical_by_type = type_shares(critical.iter().map(|&i| rows[i].relay_type));
        Self {
            case_name: case_name.to_string(),
            seed: cfg.seed,
            trials: cfg.trials,
            base_case,
            histogram: sigma_histogram(&sigmas),
            critical,
            critical_by_type,
            rows,
        }
    }

    pub fn critical_rows(&self) -> impl Iterator<Item = &RiskRecord> {
        self.critical.iter().map(|&i| &self.rows[i])
    }

    pub fn available_rows(&self) -> impl Iterator<Item = &RiskRecord> {
        self.rows.iter().filter(|r| r.available)
    }

    /// Most frequent relay type among critical rows; ties go to the earlier type.
    pub fn dominant_critical_type(&self) -> Option<RelayType> {
        self.critical_by_type
            .iter()
            .filter(|s| s.count > 0)
            .fold(None::<&TypeShare>, |best, s| match best {
                Some(b) if b.count >= s.count => Some(b),
                _ => Some(s),
            })
            .map(|s| s.relay_type)
    }
}

fn type_shares(types: impl Iterator<Item = RelayType>) -> Vec<TypeShare> {
    let mut counts = [0usize; 5];
    for t in types {
        counts[RelayType::ALL.iter().position(|&x| x == t).expect("known type")] += 1;
    }
    let total: usize = counts.iter().sum();
    RelayType::ALL
        .into_iter()
        .zip(counts)
        .map(|(relay_type, count)| TypeShare {
            relay_type,
            count,
            percent: if total == 0 { 0.0 } else { 100.0 * count as f64 / total as f64 },
        })
        .collect()
}

/// Runs the whole pipeline on an in-memory network.
pub fn assess_network(
    net: &Network,
    case_name: &str,
    cfg: &AssessmentConfig,
    progress: Option<Progress<'_>>,
) -> Result<RiskReport> {
    cfg.validate()?;
    let base = solve_power_flow(net, &cfg.solver)?;
    if !base.is_converged() {
        return Err(Error::BaseCaseInfeasible(format!(
            "{case_name}: power flow {} after {} iterations",
            base.status, base.iterations
        )));
    }
    let totals = SystemTotals::from_solution(net, &base);
    let relays = instantiate_relays(net, &base, &cfg.relays, cfg.flow_end)?;
    let outcomes = enumerate_all(net, &base, &relays, cfg, progress)
        .map_err(|e| if e.is_base_case_infeasible() { e } else { e.context(case_name) })?;
    let rows = score(&outcomes, cfg.seed, cfg.trials);
    Ok(RiskReport::from_records(case_name, cfg, totals, rows))
}

/// Name a case is reported under: its file stem.
pub fn case_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn run_assessment(path: impl AsRef<Path>, cfg: &AssessmentConfig) -> Result<RiskReport> {
    let path = path.as_ref();
    let net = Network::load(path)?;
    assess_network(&net, &case_name(path), cfg, None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ranking<'a> {
    pub entries: Vec<&'a RiskRecord>,
    pub breakdown: Vec<TypeShare>,
}

/// Critical rows by substation, then the remaining available rows by
/// descending average risk.
pub fn rank_critical(report: &RiskReport) -> Ranking<'_> {
    let order = |r: &RiskRecord| (r.substation, r.relay_type);
    let mut critical: Vec<&RiskRecord> = report.critical_rows().collect();
    critical.sort_by_key(|r| order(r));
    let mut rest: Vec<&RiskRecord> = report
        .available_rows()
        .filter(|r| !r.is_critical())
        .collect();
    rest.sort_by(|a, b| {
        b.r_average
            .total_cmp(&a.r_average)
            .then_with(|| order(a).cmp(&order(b)))
    });
    critical.extend(rest);
    Ranking {
        entries: critical,
        breakdown: report.critical_by_type.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "substation",
    "relay_type",
    "available",
    "pr_C",
    "pr_R",
    "pr_E",
    "severity_raw",
    "status",
    "R_C",
    "R_R",
    "R_E",
    "R_avg",
    "sigma",
    "capped",
];

pub fn write_csv<W: Write>(report: &RiskReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &report.rows {
        let status = r.status.map_or("n/a", |s| s.as_str());
        w.write_record([
            r.substation.to_string(),
            r.relay_type.to_string(),
            r.available.to_string(),
            r.pr_connectivity.to_string(),
            r.pr_random.to_string(),
            r.pr_equal.to_string(),
            r.severity.to_string(),
            status.to_string(),
            r.r_connectivity.to_string(),
            r.r_random.to_string(),
            r.r_equal.to_string(),
            r.r_average.to_string(),
            r.sigma.to_string(),
            r.capped.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_json<W: Write>(report: &RiskReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out).map_err(|e| Error::io("<json>", e))?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_start", "bin_end", "count", "fraction"])?;
    for b in bins {
        w.write_record([
            b.bin_start.to_string(),
            b.bin_end.to_string(),
            b.count.to_string(),
            b.fraction.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Writes the report and both histograms into `dir`, returning the paths.
pub fn write_outputs(report: &RiskReport, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let create = |name: &str| -> Result<(PathBuf, std::io::BufWriter<std::fs::File>)> {
        let path = dir.join(name);
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok((path, std::io::BufWriter::new(file)))
    };
    let mut written = Vec::new();
    let (path, w) = match format {
        OutputFormat::Csv => create("risk.csv")?,
        OutputFormat::Json => create("risk.json")?,
    };
    match format {
        OutputFormat::Csv => write_csv(report, w)?,
        OutputFormat::Json => write_json(report, w)?,
    }
    written.push(path);
    let (path, w) = create("sigma_buckets.csv")?;
    write_histogram_csv(&report.histogram.buckets, w)?;
    written.push(path);
    let (path, w) = create("sigma_bins.csv")?;
    write_histogram_csv(&report.histogram.bins, w)?;
    written.push(path);
    Ok(written)
}
