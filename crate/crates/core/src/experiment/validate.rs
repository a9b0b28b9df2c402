//! Cross-validation of the analytic evaluators against simulation.

use std::fmt::Write as _;

use serde::Serialize;

use crate::channel::{ChannelModel, DistributionHandle, ExponentForm, Family};
use crate::error::Result;
use crate::model::{Scenario, SystemConfig, Validated};
use crate::montecarlo::{ks_statistic, sample_sinrs, McOptions, MonteCarloEstimate, Sinr};
use crate::sop::SopEngine;

/// Largest Kolmogorov-Smirnov distance accepted for a CDF at large sample
/// sizes.
pub const KS_TOLERANCE: f64 = 0.015;

/// KS acceptance threshold for `n` samples: [`KS_TOLERANCE`], widened to the
/// 1% critical value `1.63 / sqrt(n)` for small runs.
pub fn ks_tolerance(n: u64) -> f64 {
    KS_TOLERANCE.max(1.63 / (n.max(1) as f64).sqrt())
}

/// Allowed deviation of a density's total mass from one.
pub const PDF_MASS_TOLERANCE: f64 = 1e-3;
/// Absolute floor of the analytic-vs-simulation SOP tolerance.
pub const SOP_ABS_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// Reported for information; never flagged.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn measured(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Check {
        let status = if value.is_finite() && value <= tolerance { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, value: Some(value), tolerance: Some(tolerance), detail: detail.into() }
    }

    fn with_status(name: impl Into<String>, status: Status, detail: impl Into<String>) -> Check {
        Check { name: name.into(), status, value: None, tolerance: None, detail: detail.into() }
    }
}

/// Which of several analytic forms best matches the simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Arbitration {
    pub question: String,
    pub status: Status,
    /// `(form, analytic value, |analytic - simulated|)`.
    pub candidates: Vec<(String, f64, f64)>,
    pub simulated: Option<MonteCarloEstimate>,
    pub selected: Option<String>,
    pub delta: Option<f64>,
    /// Set when the candidates differ by less than the simulation's
    /// confidence half width, so the data cannot separate them.
    pub indistinguishable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub config: SystemConfig,
    pub iterations: u64,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub arbitrations: Vec<Arbitration>,
    /// Number of failed checks.
    pub flagged: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.flagged == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let count = |st| self.checks.iter().filter(|c| c.status == st).count();
        let _ = writeln!(
            s,
            "validation: {} passed, {} failed, {} skipped, {} informational ({} drops, seed {})",
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Skipped),
            count(Status::Info),
            self.iterations,
            self.seed
        );
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
                Status::Info => "INFO",
            };
            let value = match (c.value, c.tolerance) {
                (Some(v), Some(t)) => format!(" {v:.3e} (tol {t:.1e})"),
                (Some(v), None) => format!(" {v:.3e}"),
                _ => String::new(),
            };
            let _ = writeln!(s, "  {tag} {}{value} {}", c.name, c.detail);
        }
        for a in &self.arbitrations {
            match (&a.selected, a.delta) {
                (Some(sel), Some(d)) => {
                    let note = if a.indistinguishable { ", candidates within the confidence interval" } else { "" };
                    let _ = writeln!(s, "  ARBITRATION {}: selected {sel} (|delta| {d:.3e}{note})", a.question);
                }
                _ => {
                    let _ = writeln!(s, "  ARBITRATION {}: skipped", a.question);
                }
            }
        }
        s
    }
}

fn sinr_for(family: Family) -> Sinr {
    match family {
        Family::EveExternalN => Sinr::GammaEN,
        Family::EveExternalM => Sinr::GammaEM,
        Family::EveInternal => Sinr::GammaEMN,
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.sort_by(f64::total_cmp);
    out
}

/// Picks the candidate closest to the simulation. Ties go to the earlier
/// candidate.
fn arbitrate(question: &str, candidates: Vec<(&str, f64)>, sim: MonteCarloEstimate) -> Arbitration {
    let scored: Vec<(String, f64, f64)> =
        candidates.into_iter().map(|(n, v)| (n.to_owned(), v, (v - sim.value).abs())).collect();
    let best = scored.iter().fold(&scored[0], |b, c| if c.2 < b.2 { c } else { b });
    let lo = scored.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let hi = scored.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    Arbitration {
        indistinguishable: hi - lo < sim.ci_half_width,
        question: question.to_owned(),
        status: Status::Info,
        selected: Some(best.0.clone()),
        delta: Some(best.2),
        candidates: scored,
        simulated: Some(sim),
    }
}

fn skipped_arbitration(question: &str) -> Arbitration {
    Arbitration {
        question: question.to_owned(),
        status: Status::Skipped,
        candidates: Vec::new(),
        simulated: None,
        selected: None,
        delta: None,
        indistinguishable: false,
    }
}

/// Compares every analytic distribution and SOP evaluator against `iterations`
/// simulated drops. Numerical failures become failed checks.
pub fn validate_report(cfg: &Validated, iterations: u64, seed: u64) -> ValidationReport {
    let mut checks = Vec::new();
    let mut arbitrations = Vec::new();
    let c = cfg.config();
    let has_eves = c.lambda_e > 0.0;
    let opts = McOptions::new(iterations.max(1), seed);
    let ks_tol = ks_tolerance(opts.iterations);

    let built = SopEngine::new(cfg).and_then(|e| Ok((e, sample_sinrs(cfg, opts)?)));
    let (engine, samples) = match built {
        Ok(x) => x,
        Err(e) => {
            checks.push(Check::with_status("setup", Status::Fail, e.to_string()));
            return finish(cfg, opts, checks, arbitrations);
        }
    };
    let ch: &ChannelModel = engine.channel();

    // Legitimate-user CDFs.
    let legit: [(Sinr, &dyn Fn(f64) -> f64); 2] =
        [(Sinr::GammaN, &|x| ch.cdf_gamma_n(x)), (Sinr::GammaM, &|x| ch.cdf_gamma_m(x))];
    for (which, cdf) in legit {
        let xs = sorted(samples.get(which));
        let d = ks_statistic(&xs, |x| Ok(cdf(x))).unwrap_or(f64::NAN);
        checks.push(Check::measured(format!("ks/{}", which.label()), d, ks_tol, ""));
    }

    // Eavesdropper distributions.
    let handles: [(Family, Result<DistributionHandle>); 3] = [
        (Family::EveExternalN, ch.eve_external_n().map_err(Into::into)),
        (Family::EveExternalM, ch.eve_external_m().map_err(Into::into)),
        (Family::EveInternal, ch.eve_internal().map_err(Into::into)),
    ];
    for (family, handle) in &handles {
        let label = family.label();
        if !has_eves {
            checks.push(Check::with_status(format!("ks/{label}"), Status::Skipped, "no eavesdroppers (lambda_e = 0)"));
            checks.push(Check::with_status(format!("pdf-mass/{label}"), Status::Skipped, "no eavesdroppers"));
            continue;
        }
        let h = match handle {
            Ok(h) => h,
            Err(e) => {
                checks.push(Check::with_status(format!("ks/{label}"), Status::Fail, e.to_string()));
                continue;
            }
        };
        let xs = sorted(samples.get(sinr_for(*family)));
        let detail = match (family, c.internal_eve_radius) {
            (Family::EveInternal, Some(r)) => format!("[{}] simulated on a disc of radius {r}", h.provenance),
            _ => format!("[{}]", h.provenance),
        };
        match ks_statistic(&xs, |x| Ok(h.cdf(x)?)) {
            Ok(d) => checks.push(Check::measured(format!("ks/{label}"), d, ks_tol, detail)),
            Err(e) => checks.push(Check::with_status(format!("ks/{label}"), Status::Fail, e.to_string())),
        }
        match h.expect(|_| 1.0, None, 1e-8) {
            Ok(mass) => checks.push(Check::measured(
                format!("pdf-mass/{label}"),
                (mass - 1.0).abs(),
                PDF_MASS_TOLERANCE,
                format!("integral {mass:.6}"),
            )),
            Err(e) => checks.push(Check::with_status(format!("pdf-mass/{label}"), Status::Fail, e.to_string())),
        }
    }

    // SOP, exact and asymptotic, against the same simulated drops.
    let mc: Vec<MonteCarloEstimate> = match Scenario::ALL.iter().map(|&sc| samples.estimate(cfg, sc, seed)).collect() {
        Ok(v) => v,
        Err(e) => {
            checks.push(Check::with_status("sop/simulation", Status::Fail, e.to_string()));
            return finish(cfg, opts, checks, arbitrations);
        }
    };
    for (scenario, sim) in Scenario::ALL.iter().zip(&mc) {
        let tol = SOP_ABS_TOLERANCE.max(3.0 * sim.ci_half_width);
        match engine.exact(*scenario) {
            Ok(est) => checks.push(Check::measured(
                format!("sop-exact/{scenario}"),
                (est.value - sim.value).abs(),
                tol,
                format!("analytic {:.5}, simulated {:.5} +- {:.5}", est.value, sim.value, sim.ci_half_width),
            )),
            Err(e) => checks.push(Check::with_status(format!("sop-exact/{scenario}"), Status::Fail, e.to_string())),
        }
        match engine.asymptotic(*scenario) {
            Ok(est) => checks.push(Check {
                name: format!("sop-asymptotic/{scenario}"),
                status: Status::Info,
                value: Some((est.value - sim.value).abs()),
                tolerance: None,
                detail: format!("high-SNR value {:.5}, simulated {:.5}", est.value, sim.value),
            }),
            Err(e) => checks.push(Check::with_status(format!("sop-asymptotic/{scenario}"), Status::Fail, e.to_string())),
        }
    }

    let sim_n = mc[0];
    let sim_m = mc[1];
    if !has_eves {
        arbitrations.push(skipped_arbitration("distant-user outage: truncated vs tail-corrected"));
        arbitrations.push(skipped_arbitration("field exponent, nearby user: derived vs printed"));
        arbitrations.push(skipped_arbitration("field exponent, distant user: derived vs printed"));
        checks.push(Check::with_status("ppp-truncation", Status::Skipped, "no eavesdroppers"));
        return finish(cfg, opts, checks, arbitrations);
    }

    let path = ch.default_path();
    match engine.distant_forms() {
        Ok(f) => arbitrations.push(arbitrate(
            "distant-user outage: truncated vs tail-corrected",
            vec![("corrected", f.corrected), ("truncated", f.truncated)],
            sim_m,
        )),
        Err(e) => checks.push(Check::with_status("arbitration/distant-forms", Status::Fail, e.to_string())),
    }
    let forms = engine
        .external_n_with(path, ExponentForm::Derived)
        .and_then(|d| Ok((d, engine.external_n_with(path, ExponentForm::Printed)?)));
    match forms {
        Ok((d, p)) => arbitrations.push(arbitrate(
            "field exponent, nearby user: derived vs printed",
            vec![("derived", d), ("printed", p)],
            sim_n,
        )),
        Err(e) => checks.push(Check::with_status("arbitration/exponent-n", Status::Fail, e.to_string())),
    }
    let forms = engine
        .distant_forms_with(path, ExponentForm::Derived)
        .and_then(|d| Ok((d.corrected, engine.distant_forms_with(path, ExponentForm::Printed)?.corrected)));
    match forms {
        Ok((d, p)) => arbitrations.push(arbitrate(
            "field exponent, distant user: derived vs printed",
            vec![("derived", d), ("printed", p)],
            sim_m,
        )),
        Err(e) => checks.push(Check::with_status("arbitration/exponent-m", Status::Fail, e.to_string())),
    }

    // Infinite-plane analytic field vs the finite simulated disc.
    if let Ok(h) = &handles[0].1 {
        let mut worst = 0.0f64;
        let mut failed = None;
        for p in [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
            let r = h.quantile(p).and_then(|x| Ok((h.cdf(x)? - h.cdf_truncated(x, c.r_eve)?).abs()));
            match r {
                Ok(d) => worst = worst.max(d),
                Err(e) => failed = Some(e.to_string()),
            }
        }
        checks.push(match failed {
            Some(e) => Check::with_status("ppp-truncation", Status::Fail, e),
            None => Check {
                name: "ppp-truncation".into(),
                status: Status::Info,
                value: Some(worst),
                tolerance: None,
                detail: format!("max CDF gap, unbounded field vs disc of radius {}", c.r_eve),
            },
        });
    }
    finish(cfg, opts, checks, arbitrations)
}

fn finish(cfg: &Validated, opts: McOptions, checks: Vec<Check>, arbitrations: Vec<Arbitration>) -> ValidationReport {
    let flagged = checks.iter().filter(|c| c.status == Status::Fail).count();
    ValidationReport { config: cfg.config().clone(), iterations: opts.iterations, seed: opts.seed, checks, arbitrations, flagged }
}
