//! SNR sweeps and their CSV form.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Method, Scenario, Validated};
use crate::montecarlo::{estimate_sop_mc_grid, McOptions};
use crate::sop::sweep_analytic;

/// Column order of every sweep CSV.
pub const CSV_HEADER: [&str; 11] =
    ["scenario", "scheme", "sic", "user", "method", "rho_db", "value", "ci_low", "ci_high", "iterations", "seed"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: Scenario,
    pub scheme: String,
    pub sic: String,
    pub user: String,
    pub method: String,
    pub rho_db: f64,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub iterations: u64,
    pub seed: u64,
}

impl SweepRow {
    pub fn method(&self) -> Option<Method> {
        Method::from_tag(&self.method)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Orders rows by scenario, then method, then SNR (enum declaration
    /// order for the first two).
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.scenario
                .cmp(&b.scenario)
                .then(a.method().cmp(&b.method()))
                .then(a.rho_db.total_cmp(&b.rho_db))
        });
    }

    pub fn select(&self, scenario: Scenario, method: Method) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.scenario == scenario && r.method() == Some(method)).collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        // The header is written explicitly so empty results still carry it.
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        write_rows(&mut w, &self.rows)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv_str(text: &str) -> Result<SweepResult> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header != CSV_HEADER {
            return Err(Error::InvalidArgument(format!("unexpected sweep header: {}", header.join(","))));
        }
        let rows = r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(SweepResult { rows })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<SweepResult> {
        SweepResult::from_csv_str(&fs::read_to_string(path)?)
    }
}

fn write_rows<W: std::io::Write>(w: &mut csv::Writer<W>, rows: &[SweepRow]) -> Result<()> {
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// What to evaluate in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenarios: Vec<Scenario>,
    pub rho_db: Vec<f64>,
    pub methods: Vec<Method>,
    /// Iterations and seed for Monte Carlo rows.
    pub mc: McOptions,
}

/// A sweep that stopped on an engine error, with the rows finished so far.
#[derive(Debug)]
pub struct SweepFailure {
    pub partial: SweepResult,
    pub error: Error,
}

fn row(cfg: &Validated, scenario: Scenario, method: Method, rho_db: f64) -> SweepRow {
    SweepRow {
        scenario,
        scheme: cfg.scheme_label().to_owned(),
        sic: cfg.config().sic.label().to_owned(),
        user: scenario.user_label().to_owned(),
        method: method.tag().to_owned(),
        rho_db,
        value: 0.0,
        ci_low: 0.0,
        ci_high: 0.0,
        iterations: 0,
        seed: 0,
    }
}

/// Evaluates every (point, scenario, method) combination. On failure the
/// rows of all completed (scenario, method) blocks are returned.
pub fn run_sweep(cfg: &Validated, spec: &SweepSpec) -> std::result::Result<SweepResult, SweepFailure> {
    let fail = |rows: Vec<SweepRow>, error: Error| {
        let mut partial = SweepResult { rows };
        partial.sort();
        SweepFailure { partial, error }
    };
    if spec.rho_db.is_empty() || spec.scenarios.is_empty() || spec.methods.is_empty() {
        return Err(fail(Vec::new(), Error::InvalidArgument("sweep needs points, scenarios and methods".into())));
    }
    let mut rows = Vec::new();
    for &method in &spec.methods {
        if method == Method::MonteCarlo {
            continue;
        }
        for &scenario in &spec.scenarios {
            match sweep_analytic(cfg, scenario, &spec.rho_db, method) {
                Ok(values) => {
                    for (&rho, est) in spec.rho_db.iter().zip(values) {
                        rows.push(SweepRow { value: est.value, ..row(cfg, scenario, method, rho) });
                    }
                }
                Err(e) => return Err(fail(rows, e)),
            }
        }
    }
    if spec.methods.contains(&Method::MonteCarlo) {
        match estimate_sop_mc_grid(cfg, &spec.scenarios, &spec.rho_db, spec.mc) {
            Ok(grid) => {
                for (&rho, per_rho) in spec.rho_db.iter().zip(grid) {
                    for (&scenario, est) in spec.scenarios.iter().zip(per_rho) {
                        rows.push(SweepRow {
                            value: est.value,
                            ci_low: (est.value - est.ci_half_width).max(0.0),
                            ci_high: (est.value + est.ci_half_width).min(1.0),
                            iterations: est.iterations,
                            seed: est.seed,
                            ..row(cfg, scenario, Method::MonteCarlo, rho)
                        });
                    }
                }
            }
            Err(e) => return Err(fail(rows, e)),
        }
    }
    let mut out = SweepResult { rows };
    out.sort();
    Ok(out)
}

/// `<path>.partial`, where interrupted sweeps leave their rows.
pub fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Runs a sweep into `path`. On an engine error the completed rows are
/// written to `<path>.partial` and the error is returned.
pub fn run_sweep_to_file(cfg: &Validated, spec: &SweepSpec, path: &Path) -> Result<SweepResult> {
    match run_sweep(cfg, spec) {
        Ok(result) => {
            result.write_csv(path)?;
            Ok(result)
        }
        Err(SweepFailure { partial, error }) => {
            partial.write_csv(&partial_path(path))?;
            Err(error)
        }
    }
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_rho_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("invalid SNR range '{text}'; use start:stop:step or a,b,c"));
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start).ok_or_else(bad)?, num(stop).ok_or_else(bad)?, num(step).ok_or_else(bad)?);
            if step <= 0.0 || stop < start {
                return Err(bad());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| start + i as f64 * step).collect())
        }
        [list] => {
            let values: Option<Vec<f64>> = list.split(',').map(num).collect();
            values.filter(|v| !v.is_empty()).ok_or_else(bad)
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SicMode, SystemConfig};

    #[test]
    fn range_arithmetic() {
        assert_eq!(parse_rho_range("0:60:5").unwrap().len(), 13);
        assert_eq!(parse_rho_range("10,20, 30").unwrap(), vec![10.0, 20.0, 30.0]);
        assert_eq!(parse_rho_range("0:1:0.1").unwrap().len(), 11);
        for bad in ["", "a:b:c", "0:10:0", "10:0:1", "1:2"] {
            assert!(parse_rho_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exact_rows_per_scenario() {
        let cfg = SystemConfig { sic: SicMode::Perfect, ..SystemConfig::default() }.validate().unwrap();
        let spec = SweepSpec {
            scenarios: vec![Scenario::ExternalN, Scenario::Internal],
            rho_db: parse_rho_range("0:60:5").unwrap(),
            methods: vec![Method::Exact],
            mc: McOptions::new(1, 0),
        };
        let res = run_sweep(&cfg, &spec).unwrap();
        assert_eq!(res.rows.len(), 26);
        assert_eq!(res.select(Scenario::ExternalN, Method::Exact).len(), 13);
        assert!(res.rows.iter().all(|r| r.ci_low == 0.0 && r.ci_high == 0.0 && r.value.is_finite()));
        assert_eq!(res.rows[0].user, "n");
        assert_eq!(res.rows[13].user, "m_to_n");
    }

    #[test]
    fn csv_header_is_exact() {
        let text = SweepResult::default().to_csv_string().unwrap();
        assert_eq!(text.trim_end(), "scenario,scheme,sic,user,method,rho_db,value,ci_low,ci_high,iterations,seed");
    }

    #[test]
    fn csv_round_trip() {
        let cfg = SystemConfig::default().validate().unwrap();
        let spec = SweepSpec {
            scenarios: vec![Scenario::ExternalPair],
            rho_db: vec![10.0, 12.5],
            methods: vec![Method::Exact, Method::MonteCarlo],
            mc: McOptions::new(50, 4),
        };
        let res = run_sweep(&cfg, &spec).unwrap();
        let text = res.to_csv_string().unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(SweepResult::from_csv_str(&text).unwrap(), res);
    }

    #[test]
    fn empty_spec_is_rejected() {
        let cfg = SystemConfig::default().validate().unwrap();
        let spec = SweepSpec { scenarios: vec![], rho_db: vec![10.0], methods: vec![Method::Exact], mc: McOptions::new(1, 0) };
        assert!(run_sweep(&cfg, &spec).is_err());
    }

    #[test]
    fn partial_suffix() {
        assert_eq!(partial_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.partial"));
    }
}
