//! Secrecy outage probabilities: exact, high-SNR, and diversity-order fits.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{ChannelModel, DistributionHandle, ExponentForm, Path};
use crate::error::{Error, Result};
use crate::model::{Method, Scenario, SopEstimate, Validated};

/// The distant user's outage written two ways: integrating only up to the
/// SINR `tau` beyond which outage is certain, and adding the eavesdropper
/// mass above `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistantUserForms {
    pub tau: f64,
    pub truncated: f64,
    pub tail_mass: f64,
    pub corrected: f64,
}

/// Evaluates every scenario for one validated configuration.
#[derive(Debug, Clone)]
pub struct SopEngine {
    cfg: Validated,
    ch: ChannelModel,
}

fn threshold(rate: f64, x: f64) -> f64 {
    rate.exp2() * (1.0 + x) - 1.0
}

fn pair(pn: f64, pm: f64) -> f64 {
    1.0 - (1.0 - pn) * (1.0 - pm)
}

impl SopEngine {
    pub fn new(cfg: &Validated) -> Result<SopEngine> {
        Ok(SopEngine { cfg: cfg.clone(), ch: ChannelModel::new(cfg)? })
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.ch
    }

    pub fn config(&self) -> &Validated {
        &self.cfg
    }

    fn tol(&self) -> f64 {
        self.cfg.config().quad_rel_tol
    }

    /// Largest eavesdropper SINR at which the distant user can still meet
    /// its rate: `1 / (2^R a_n) - 1`.
    pub fn tau(&self) -> f64 {
        1.0 / (self.cfg.config().r_m.exp2() * self.ch.a_n) - 1.0
    }

    fn nearby(&self, eve: &DistributionHandle, rate: f64, path: Path) -> Result<f64> {
        Ok(eve.expect(|x| self.ch.cdf_gamma_n_path(path, threshold(rate, x)), None, self.tol())?)
    }

    /// Exact SOP of the nearby user against external eavesdroppers with an
    /// explicit evaluator family and exponent convention.
    pub fn external_n_with(&self, path: Path, form: ExponentForm) -> Result<f64> {
        let eve = self.ch.eve_external_n_with(path, form)?;
        self.nearby(&eve, self.cfg.config().r_n, path)
    }

    pub fn distant_forms_with(&self, path: Path, form: ExponentForm) -> Result<DistantUserForms> {
        let rate = self.cfg.config().r_m;
        let tau = self.tau();
        let eve = self.ch.eve_external_m_with(path, form)?;
        if tau <= 0.0 {
            return Ok(DistantUserForms { tau, truncated: 0.0, tail_mass: 1.0, corrected: 1.0 });
        }
        let truncated = eve.expect(|x| self.ch.cdf_gamma_m_path(path, threshold(rate, x)), Some(tau), self.tol())?;
        let tail_mass = eve.sf(tau)?;
        Ok(DistantUserForms { tau, truncated, tail_mass, corrected: truncated + tail_mass })
    }

    pub fn distant_forms(&self) -> Result<DistantUserForms> {
        self.distant_forms_with(self.ch.default_path(), ExponentForm::Derived)
    }

    pub fn internal_with(&self, path: Path) -> Result<f64> {
        let eve = self.ch.eve_internal_with(path)?;
        self.nearby(&eve, self.cfg.config().r_mn, path)
    }

    /// Unclamped exact SOP with an explicit evaluator family.
    pub fn exact_raw_with(&self, scenario: Scenario, path: Path) -> Result<f64> {
        Ok(match scenario {
            Scenario::ExternalN => self.external_n_with(path, ExponentForm::Derived)?,
            Scenario::ExternalM => self.distant_forms_with(path, ExponentForm::Derived)?.corrected,
            Scenario::ExternalPair => pair(
                self.external_n_with(path, ExponentForm::Derived)?,
                self.distant_forms_with(path, ExponentForm::Derived)?.corrected,
            ),
            Scenario::Internal => self.internal_with(path)?,
        })
    }

    pub fn exact_raw(&self, scenario: Scenario) -> Result<f64> {
        self.exact_raw_with(scenario, self.ch.default_path())
    }

    pub fn exact(&self, scenario: Scenario) -> Result<SopEstimate> {
        Ok(SopEstimate::analytic(self.exact_raw(scenario)?, Method::Exact))
    }

    fn asymptotic_nearby(&self, eve: &DistributionHandle, rate: f64) -> Result<f64> {
        let ch = &self.ch;
        if self.cfg.config().sic.is_perfect() {
            Ok(eve.expect(|x| ch.cdf_gamma_n_leading(threshold(rate, x)), None, self.tol())?)
        } else {
            // The closure cannot propagate errors; the asymptotic CDF only
            // fails under perfect SIC, excluded above.
            Ok(eve.expect(
                |x| ch.cdf_gamma_n_asymptotic(threshold(rate, x)).unwrap_or(f64::NAN),
                None,
                self.tol(),
            )?)
        }
    }

    fn asymptotic_distant(&self) -> Result<f64> {
        let tau = self.tau();
        if tau <= 0.0 {
            return Ok(1.0);
        }
        let rate = self.cfg.config().r_m;
        let eve = self.ch.eve_external_m()?;
        let body = eve.expect(|x| self.ch.cdf_gamma_m_leading(threshold(rate, x)), Some(tau), self.tol())?;
        Ok(body + eve.sf(tau)?)
    }

    /// Unclamped high-SNR SOP. Under imperfect SIC the nearby-user terms are
    /// the residual-interference error floor; under perfect SIC they decay as
    /// `rho^{-K}` (code domain) or `rho^{-1}` (power domain).
    pub fn asymptotic_raw(&self, scenario: Scenario) -> Result<f64> {
        let c = self.cfg.config();
        Ok(match scenario {
            Scenario::ExternalN => self.asymptotic_nearby(&self.ch.eve_external_n()?, c.r_n)?,
            Scenario::ExternalM => self.asymptotic_distant()?,
            Scenario::ExternalPair => pair(
                self.asymptotic_nearby(&self.ch.eve_external_n()?, c.r_n)?,
                self.asymptotic_distant()?,
            ),
            Scenario::Internal => self.asymptotic_nearby(&self.ch.eve_internal()?, c.r_mn)?,
        })
    }

    pub fn asymptotic(&self, scenario: Scenario) -> Result<SopEstimate> {
        Ok(SopEstimate::analytic(self.asymptotic_raw(scenario)?, Method::Asymptotic))
    }
}

pub fn sop_exact(cfg: &Validated, scenario: Scenario) -> Result<SopEstimate> {
    SopEngine::new(cfg)?.exact(scenario)
}

pub fn sop_asymptotic(cfg: &Validated, scenario: Scenario) -> Result<SopEstimate> {
    SopEngine::new(cfg)?.asymptotic(scenario)
}

/// Analytic SOP at each transmit SNR, evaluated in parallel and returned in
/// grid order.
pub fn sweep_analytic(cfg: &Validated, scenario: Scenario, rho_db: &[f64], method: Method) -> Result<Vec<SopEstimate>> {
    if method == Method::MonteCarlo {
        return Err(Error::InvalidArgument("sweep_analytic handles exact and asymptotic methods only".into()));
    }
    rho_db
        .par_iter()
        .map(|&db| {
            let engine = SopEngine::new(&cfg.with_rho_db(db))?;
            match method {
                Method::Exact => engine.exact(scenario),
                _ => engine.asymptotic(scenario),
            }
        })
        .collect()
}

/// Least-squares decay exponent of the SOP over a high-SNR window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityFit {
    /// Slope of `-log10 SOP` against `log10 rho`.
    pub slope: f64,
    pub fit_range_db: (f64, f64),
    /// RMS residual of the fit in decades.
    pub residual: f64,
    /// The SOP changed by less than 5% over the top 10 dB of the window.
    pub floor_detected: bool,
    /// SOP at the top of the window when a floor is detected.
    pub floor_value: Option<f64>,
    /// The fit can be read as a diversity order.
    pub reliable: bool,
    pub points: Vec<(f64, f64)>,
}

pub const DEFAULT_DIVERSITY_GRID_DB: [f64; 5] = [35.0, 40.0, 45.0, 50.0, 55.0];
const FLOOR_VARIATION: f64 = 0.05;
const RESIDUAL_LIMIT: f64 = 0.05;

pub fn diversity_order(cfg: &Validated, scenario: Scenario, rho_grid_db: &[f64]) -> Result<DiversityFit> {
    if rho_grid_db.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "diversity fit needs at least 5 SNR points, got {}",
            rho_grid_db.len()
        )));
    }
    let lo = rho_grid_db.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rho_grid_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 20.0 {
        return Err(Error::InvalidArgument(format!("diversity fit needs a span of at least 20 dB, got {}", hi - lo)));
    }
    let mut grid: Vec<f64> = rho_grid_db.to_vec();
    grid.push(hi - 10.0);
    let values = sweep_analytic(cfg, scenario, &grid, Method::Exact)?;
    let raw: Vec<f64> = values.iter().map(SopEstimate::raw_value).collect();
    if raw.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidArgument("SOP underflowed to zero inside the fit window".into()));
    }
    let n = rho_grid_db.len();
    let points: Vec<(f64, f64)> = rho_grid_db.iter().copied().zip(raw[..n].iter().copied()).collect();
    let xs: Vec<f64> = points.iter().map(|p| p.0 / 10.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.1.log10()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let residual =
        (xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / n as f64).sqrt();

    let top_idx = (0..n).max_by(|&a, &b| rho_grid_db[a].total_cmp(&rho_grid_db[b])).unwrap_or(0);
    let top = raw[top_idx];
    let decade_below = raw[n];
    let floor_detected = ((decade_below - top) / top).abs() < FLOOR_VARIATION;
    Ok(DiversityFit {
        slope,
        fit_range_db: (lo, hi),
        residual,
        floor_detected,
        floor_value: floor_detected.then_some(top),
        reliable: floor_detected || residual < RESIDUAL_LIMIT,
        points,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
