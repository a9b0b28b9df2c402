//! Monte Carlo simulation of network drops.
//!
//! Every drop draws from its own ChaCha substreams keyed by `(seed, drop)`,
//! so results do not depend on how drops are scheduled across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{db_to_linear, Scenario, Validated};

const CHUNK: u64 = 64;
const STREAM_GEOMETRY: u64 = 0;
const STREAM_RESIDUAL: u64 = 1;
const STREAM_INTERNAL: u64 = 2;

/// One sampled drop. Fading is stored as powers `|h|^2`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkRealization {
    pub k: usize,
    pub d_n: f64,
    pub d_m: f64,
    pub h_n: Vec<f64>,
    pub h_m: Vec<f64>,
    /// Distances of the external eavesdroppers.
    pub eve_distances: Vec<f64>,
    /// `K` fading powers per eavesdropper, eavesdropper-major.
    pub eve_fading: Vec<f64>,
    /// `||h_I||^2` at the nearby user; zero under perfect SIC.
    pub residual_n: f64,
    /// `||h_Ie||^2` per eavesdropper; empty under perfect SIC.
    pub eve_residual: Vec<f64>,
    /// Separate internal eavesdropper field, when configured.
    pub internal: Option<(Vec<f64>, Vec<f64>)>,
}

impl NetworkRealization {
    pub fn eve_count(&self) -> usize {
        self.eve_distances.len()
    }
}

/// All SINRs of one drop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinrSet {
    pub gamma_n: f64,
    pub gamma_m: f64,
    pub gamma_en: f64,
    pub gamma_em: f64,
    pub gamma_emn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sinr {
    GammaN,
    GammaM,
    GammaEN,
    GammaEM,
    GammaEMN,
}

impl Sinr {
    pub const ALL: [Sinr; 5] = [Sinr::GammaN, Sinr::GammaM, Sinr::GammaEN, Sinr::GammaEM, Sinr::GammaEMN];

    pub fn label(&self) -> &'static str {
        match self {
            Sinr::GammaN => "gamma_n",
            Sinr::GammaM => "gamma_m",
            Sinr::GammaEN => "gamma_en",
            Sinr::GammaEM => "gamma_em",
            Sinr::GammaEMN => "gamma_emn",
        }
    }

    pub fn from_label(s: &str) -> Option<Sinr> {
        Sinr::ALL.into_iter().find(|v| v.label() == s)
    }

    pub fn pick(&self, s: &SinrSet) -> f64 {
        match self {
            Sinr::GammaN => s.gamma_n,
            Sinr::GammaM => s.gamma_m,
            Sinr::GammaEN => s.gamma_en,
            Sinr::GammaEM => s.gamma_em,
            Sinr::GammaEMN => s.gamma_emn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    /// Normal-approximation 95% half width, `1.96 sqrt(p(1-p)/N)`.
    pub ci_half_width: f64,
    pub iterations: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    fn from_count(hits: u64, iterations: u64, seed: u64) -> MonteCarloEstimate {
        let p = hits as f64 / iterations as f64;
        MonteCarloEstimate { value: p, ci_half_width: 1.96 * (p * (1.0 - p) / iterations as f64).sqrt(), iterations, seed }
    }
}

/// Parallelism and reproducibility settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub iterations: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl McOptions {
    pub fn new(iterations: u64, seed: u64) -> McOptions {
        McOptions { iterations, seed, workers: None }
    }

    pub fn with_workers(self, workers: usize) -> McOptions {
        McOptions { workers: Some(workers), ..self }
    }
}

fn stream(seed: u64, drop: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(drop.wrapping_mul(4).wrapping_add(lane));
    rng
}

fn exp1<R: Rng>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

fn gamma_k<R: Rng>(rng: &mut R, k: usize) -> f64 {
    (0..k).map(|_| exp1(rng)).sum::<f64>()
}

/// `1 + d^alpha` from a squared distance.
fn path_loss(d2: f64, half_alpha: f64) -> f64 {
    if half_alpha == 1.0 {
        1.0 + d2
    } else {
        1.0 + d2.powf(half_alpha)
    }
}

/// Draws a uniform point in a disc of radius `r` and returns `r^2 u`.
fn disc_d2<R: Rng>(rng: &mut R, r: f64) -> f64 {
    r * r * rng.random::<f64>()
}

fn poisson_count<R: Rng>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let n: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
    n as usize
}

/// Samples one network drop.
pub fn sample_realization(cfg: &Validated, seed: u64, drop: u64) -> NetworkRealization {
    let c = cfg.config();
    let k = c.k;
    let mut geo = stream(seed, drop, STREAM_GEOMETRY);
    let mut out = NetworkRealization { k, ..Default::default() };
    out.d_n = disc_d2(&mut geo, c.r_d1).sqrt();
    out.d_m = disc_d2(&mut geo, c.r_d2).sqrt();
    out.h_n = (0..k).map(|_| exp1(&mut geo)).collect();
    out.h_m = (0..k).map(|_| exp1(&mut geo)).collect();
    let n_eves = poisson_count(&mut geo, c.lambda_e * std::f64::consts::PI * c.r_eve * c.r_eve);
    out.eve_distances.reserve(n_eves);
    out.eve_fading.reserve(n_eves * k);
    for _ in 0..n_eves {
        out.eve_distances.push(disc_d2(&mut geo, c.r_eve).sqrt());
        for _ in 0..k {
            out.eve_fading.push(exp1(&mut geo));
        }
    }
    if !c.sic.is_perfect() {
        let d = cfg.derived();
        let mut res = stream(seed, drop, STREAM_RESIDUAL);
        out.residual_n = d.omega_i * gamma_k(&mut res, k);
        out.eve_residual = (0..n_eves).map(|_| d.omega_ie * gamma_k(&mut res, k)).collect();
    }
    if let Some(r) = c.internal_eve_radius {
        let mut int = stream(seed, drop, STREAM_INTERNAL);
        let n = poisson_count(&mut int, c.lambda_e * std::f64::consts::PI * r * r);
        let mut dist = Vec::with_capacity(n);
        let mut fading = Vec::with_capacity(n * k);
        for _ in 0..n {
            dist.push(disc_d2(&mut int, r).sqrt());
            for _ in 0..k {
                fading.push(exp1(&mut int));
            }
        }
        out.internal = Some((dist, fading));
    }
    out
}

/// Computes every SINR of a drop sampled from the same configuration.
pub fn compute_sinrs(real: &NetworkRealization, cfg: &Validated) -> SinrSet {
    let c = cfg.config();
    let d = cfg.derived();
    let half_alpha = c.alpha / 2.0;
    let k = real.k;
    let s_n = d.eta * real.h_n.iter().sum::<f64>() / path_loss(real.d_n * real.d_n, half_alpha);
    let s_m = d.eta * real.h_m.iter().sum::<f64>() / path_loss(real.d_m * real.d_m, half_alpha);
    let varpi = c.sic.varpi();
    let mut best_en = 0.0f64;
    let mut best_x = 0.0f64;
    for (e, &de) in real.eve_distances.iter().enumerate() {
        let x = d.eta * real.eve_fading[e * k..(e + 1) * k].iter().sum::<f64>() / path_loss(de * de, half_alpha);
        let z = real.eve_residual.get(e).copied().unwrap_or(0.0);
        best_en = best_en.max(d.rho_e * x * c.a_n / (varpi * d.rho_e * z + 1.0));
        best_x = best_x.max(x);
    }
    let best_internal = match &real.internal {
        None => best_x,
        Some((dist, fading)) => dist
            .iter()
            .enumerate()
            .map(|(e, &de)| d.eta * fading[e * k..(e + 1) * k].iter().sum::<f64>() / path_loss(de * de, half_alpha))
            .fold(0.0, f64::max),
    };
    let summary = DropSummary {
        s_n,
        i_n: real.residual_n,
        s_m,
        gamma_en: best_en,
        gamma_em: distant_eve_sinr(best_x, d.rho_e, c.a_m, c.a_n),
        gamma_emn: d.rho_e * c.a_n * best_internal,
    };
    summary.sinrs(d.rho, varpi, c.a_n, c.a_m)
}

fn distant_eve_sinr(x: f64, rho_e: f64, a_m: f64, a_n: f64) -> f64 {
    rho_e * a_m * x / (rho_e * a_n * x + 1.0)
}

/// The transmit-SNR-independent part of a drop.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DropSummary {
    s_n: f64,
    i_n: f64,
    s_m: f64,
    gamma_en: f64,
    gamma_em: f64,
    gamma_emn: f64,
}

impl DropSummary {
    fn sinrs(&self, rho: f64, varpi: f64, a_n: f64, a_m: f64) -> SinrSet {
        SinrSet {
            gamma_n: rho * self.s_n * a_n / (varpi * rho * self.i_n + 1.0),
            gamma_m: rho * self.s_m * a_m / (rho * self.s_m * a_n + 1.0),
            gamma_en: self.gamma_en,
            gamma_em: self.gamma_em,
            gamma_emn: self.gamma_emn,
        }
    }
}

/// Samples a drop and reduces it on the fly, without storing eavesdroppers.
/// Consumes the random streams exactly as [`sample_realization`].
fn summarize_drop(cfg: &Validated, seed: u64, drop: u64) -> DropSummary {
    let c = cfg.config();
    let d = cfg.derived();
    let k = c.k;
    let half_alpha = c.alpha / 2.0;
    let varpi = c.sic.varpi();
    let imperfect = !c.sic.is_perfect();
    let mut geo = stream(seed, drop, STREAM_GEOMETRY);
    let d2_n = disc_d2(&mut geo, c.r_d1);
    let d2_m = disc_d2(&mut geo, c.r_d2);
    let s_n = d.eta * gamma_k(&mut geo, k) / path_loss(d2_n, half_alpha);
    let s_m = d.eta * gamma_k(&mut geo, k) / path_loss(d2_m, half_alpha);
    let n_eves = poisson_count(&mut geo, c.lambda_e * std::f64::consts::PI * c.r_eve * c.r_eve);
    let mut res = imperfect.then(|| stream(seed, drop, STREAM_RESIDUAL));
    let i_n = match res.as_mut() {
        Some(r) => d.omega_i * gamma_k(r, k),
        None => 0.0,
    };
    let mut best_en = 0.0f64;
    let mut best_x = 0.0f64;
    for _ in 0..n_eves {
        let d2 = disc_d2(&mut geo, c.r_eve);
        let x = d.eta * gamma_k(&mut geo, k) / path_loss(d2, half_alpha);
        let z = match res.as_mut() {
            Some(r) => d.omega_ie * gamma_k(r, k),
            None => 0.0,
        };
        best_en = best_en.max(d.rho_e * x * c.a_n / (varpi * d.rho_e * z + 1.0));
        best_x = best_x.max(x);
    }
    let best_internal = match c.internal_eve_radius {
        None => best_x,
        Some(r) => {
            let mut int = stream(seed, drop, STREAM_INTERNAL);
            let n = poisson_count(&mut int, c.lambda_e * std::f64::consts::PI * r * r);
            let mut best = 0.0f64;
            for _ in 0..n {
                let d2 = disc_d2(&mut int, r);
                best = best.max(d.eta * gamma_k(&mut int, k) / path_loss(d2, half_alpha));
            }
            best
        }
    };
    DropSummary {
        s_n,
        i_n,
        s_m,
        gamma_en: best_en,
        gamma_em: distant_eve_sinr(best_x, d.rho_e, c.a_m, c.a_n),
        gamma_emn: d.rho_e * c.a_n * best_internal,
    }
}

fn secrecy_capacity(gamma: f64, gamma_e: f64) -> f64 {
    ((1.0 + gamma).log2() - (1.0 + gamma_e).log2()).max(0.0)
}

/// Outage indicator of a scenario for one drop at one transmit SNR.
pub fn is_outage(s: &SinrSet, cfg: &Validated, scenario: Scenario) -> bool {
    let c = cfg.config();
    let n = secrecy_capacity(s.gamma_n, s.gamma_en) < c.r_n;
    let m = secrecy_capacity(s.gamma_m, s.gamma_em) < c.r_m;
    match scenario {
        Scenario::ExternalN => n,
        Scenario::ExternalM => m,
        Scenario::ExternalPair => n || m,
        Scenario::Internal => secrecy_capacity(s.gamma_n, s.gamma_emn) < c.r_mn,
    }
}

fn run_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn chunks(iterations: u64) -> Vec<(u64, u64)> {
    (0..iterations.div_ceil(CHUNK)).map(|i| (i * CHUNK, ((i + 1) * CHUNK).min(iterations))).collect()
}

/// SOP estimates for every `(rho_db, scenario)` pair from one shared set of
/// drops; indexed `[rho][scenario]`.
pub fn estimate_sop_mc_grid(
    cfg: &Validated,
    scenarios: &[Scenario],
    rho_db: &[f64],
    opts: McOptions,
) -> Result<Vec<Vec<MonteCarloEstimate>>> {
    if opts.iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    let c = cfg.config();
    let varpi = c.sic.varpi();
    let rhos: Vec<(f64, Validated)> = rho_db.iter().map(|&db| (db_to_linear(db), cfg.with_rho_db(db))).collect();
    let width = scenarios.len();
    let counts = run_pool(opts.workers, || {
        chunks(opts.iterations)
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut hits = vec![0u64; rhos.len() * width];
                for drop in lo..hi {
                    let summary = summarize_drop(cfg, opts.seed, drop);
                    for (r, (rho, at_rho)) in rhos.iter().enumerate() {
                        let s = summary.sinrs(*rho, varpi, c.a_n, c.a_m);
                        for (j, &scenario) in scenarios.iter().enumerate() {
                            if is_outage(&s, at_rho, scenario) {
                                hits[r * width + j] += 1;
                            }
                        }
                    }
                }
                hits
            })
            .reduce(
                || vec![0u64; rhos.len() * width],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    })?;
    Ok((0..rhos.len())
        .map(|r| {
            (0..width)
                .map(|j| MonteCarloEstimate::from_count(counts[r * width + j], opts.iterations, opts.seed))
                .collect()
        })
        .collect())
}

pub fn estimate_sop_mc(cfg: &Validated, scenario: Scenario, iterations: u64, seed: u64) -> Result<MonteCarloEstimate> {
    estimate_sop_mc_with(cfg, scenario, McOptions::new(iterations, seed))
}

pub fn estimate_sop_mc_with(cfg: &Validated, scenario: Scenario, opts: McOptions) -> Result<MonteCarloEstimate> {
    let grid = estimate_sop_mc_grid(cfg, &[scenario], &[cfg.config().rho_db], opts)?;
    Ok(grid[0][0])
}

/// Per-drop SINR samples at the configured transmit SNR, in drop order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SinrSamples {
    pub gamma_n: Vec<f64>,
    pub gamma_m: Vec<f64>,
    pub gamma_en: Vec<f64>,
    pub gamma_em: Vec<f64>,
    pub gamma_emn: Vec<f64>,
}

impl SinrSamples {
    pub fn len(&self) -> usize {
        self.gamma_n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma_n.is_empty()
    }

    pub fn set(&self, i: usize) -> SinrSet {
        SinrSet {
            gamma_n: self.gamma_n[i],
            gamma_m: self.gamma_m[i],
            gamma_en: self.gamma_en[i],
            gamma_em: self.gamma_em[i],
            gamma_emn: self.gamma_emn[i],
        }
    }

    /// SOP estimate from stored drops. Matches [`estimate_sop_mc`] for the
    /// same configuration and seed.
    pub fn estimate(&self, cfg: &Validated, scenario: Scenario, seed: u64) -> Result<MonteCarloEstimate> {
        if self.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        let hits = (0..self.len()).filter(|&i| is_outage(&self.set(i), cfg, scenario)).count() as u64;
        Ok(MonteCarloEstimate::from_count(hits, self.len() as u64, seed))
    }

    pub fn get(&self, which: Sinr) -> &[f64] {
        match which {
            Sinr::GammaN => &self.gamma_n,
            Sinr::GammaM => &self.gamma_m,
            Sinr::GammaEN => &self.gamma_en,
            Sinr::GammaEM => &self.gamma_em,
            Sinr::GammaEMN => &self.gamma_emn,
        }
    }
}

pub fn sample_sinrs(cfg: &Validated, opts: McOptions) -> Result<SinrSamples> {
    let c = cfg.config();
    let d = cfg.derived();
    let varpi = c.sic.varpi();
    let sets: Vec<SinrSet> = run_pool(opts.workers, || {
        chunks(opts.iterations)
            .into_par_iter()
            .flat_map_iter(|(lo, hi)| {
                (lo..hi).map(move |drop| summarize_drop(cfg, opts.seed, drop).sinrs(d.rho, varpi, c.a_n, c.a_m))
            })
            .collect()
    })?;
    let mut out = SinrSamples::default();
    for s in sets {
        out.gamma_n.push(s.gamma_n);
        out.gamma_m.push(s.gamma_m);
        out.gamma_en.push(s.gamma_en);
        out.gamma_em.push(s.gamma_em);
        out.gamma_emn.push(s.gamma_emn);
    }
    Ok(out)
}

/// Fraction of sampled values at or below each grid point. The grid must be
/// sorted ascending.
pub fn empirical_cdf(cfg: &Validated, which: Sinr, grid: &[f64], iterations: u64, seed: u64) -> Result<Vec<f64>> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("grid must be sorted ascending".into()));
    }
    let samples = sample_sinrs(cfg, McOptions::new(iterations, seed))?;
    let mut values = samples.get(which).to_vec();
    values.sort_by(f64::total_cmp);
    Ok(ecdf_sorted(&values, grid))
}

/// Empirical CDF of already sorted samples on a grid.
pub fn ecdf_sorted(sorted: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    grid.iter().map(|&x| sorted.partition_point(|&v| v <= x) as f64 / n).collect()
}

/// Two-sided Kolmogorov-Smirnov distance between sorted samples and a CDF.
pub fn ks_statistic<F>(sorted: &[f64], mut cdf: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        // Ties (notably the atom at zero) are one step of the empirical CDF.
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x)?;
        d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    Ok(d)
}
