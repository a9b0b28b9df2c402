//! Distributions of the legitimate-user and eavesdropper SINRs.
//!
//! Legitimate users average over their disc with Chebyshev-Gauss nodes.
//! Eavesdroppers form a Poisson field; the strongest one has CDF
//! `exp(-delta pi lambda_e H(v))` where `H(v) = int_0^inf g(v(1 + t)) t^{delta-1} dt`
//! and `g(w)` is the probability that a single eavesdropper with unit path
//! loss exceeds the threshold `w`.

use crate::error::{Error, NumericalError};
use crate::model::Validated;
use crate::numerics::{
    binomial, factorial, gamma_fn, gamma_p_int, gamma_q_int, integrate_finite_with, integrate_semi_infinite_with,
    position_nodes, upper_incomplete_gamma_scaled, PositionNodes, QuadOptions,
};

/// Which family of evaluators to use: the general code-domain expressions
/// (valid for any `K`) or the single-subcarrier power-domain closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    Cd,
    Pd,
}

/// Exponent convention for the eavesdropper series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentForm {
    /// Powers `v^{i-j-delta}` with `1/i!`, as obtained by integrating the field.
    Derived,
    /// The typeset variant: `v^{i-j-delta-1}` for the nearby-user family and
    /// `1/j!` for the distant-user family.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    EveExternalN,
    EveExternalM,
    EveInternal,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::EveExternalN => "gamma_en",
            Family::EveExternalM => "gamma_em",
            Family::EveInternal => "gamma_emn",
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Argument {
    /// `v = x / phi`.
    Linear { phi: f64 },
    /// `v = x / (eta rho_e (a_m - a_n x))`, support `[0, a_m / a_n)`.
    Ceiling { eta_rho_e: f64, a_m: f64, a_n: f64 },
}

impl Argument {
    fn v(&self, x: f64) -> f64 {
        match *self {
            Argument::Linear { phi } => x / phi,
            Argument::Ceiling { eta_rho_e, a_m, a_n } => x / (eta_rho_e * (a_m - a_n * x)),
        }
    }

    fn dv(&self, x: f64) -> f64 {
        match *self {
            Argument::Linear { phi } => 1.0 / phi,
            Argument::Ceiling { eta_rho_e, a_m, a_n } => {
                let gap = a_m - a_n * x;
                a_m / (eta_rho_e * gap * gap)
            }
        }
    }

    fn ceiling(&self) -> Option<f64> {
        match *self {
            Argument::Linear { .. } => None,
            Argument::Ceiling { a_m, a_n, .. } => Some(a_m / a_n),
        }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    /// `H(v) = sum c v^p e^{-v}` over `(c, p)` pairs; no residual interference.
    Series { k: usize, terms: Vec<(f64, f64)> },
    /// Single subcarrier with exponential residual power; closed form through
    /// the scaled upper incomplete gamma. `kappa = varpi rho_e Omega_Ie`.
    PdResidual { kappa: f64 },
    /// `K` subcarriers with Gamma(K, Omega) residual power; the radial
    /// integral is evaluated numerically.
    CdResidual { k: usize, kappa: f64, g_coef: Vec<Vec<f64>>, dg_coef: Vec<f64> },
}

/// Evaluatable CDF/PDF pair of an eavesdropper SINR.
#[derive(Debug, Clone)]
pub struct DistributionHandle {
    pub family: Family,
    /// Which expression family the evaluator implements.
    pub provenance: &'static str,
    /// Upper end of the support when it is finite.
    pub support_hint: Option<f64>,
    lambda_scale: f64,
    delta: f64,
    argument: Argument,
    kernel: Kernel,
    inner_tol: f64,
}

impl DistributionHandle {
    /// Mass at zero: the whole distribution when there are no eavesdroppers.
    pub fn atom_at_zero(&self) -> f64 {
        if self.lambda_scale == 0.0 {
            1.0
        } else {
            0.0
        }
    }

    /// `(E, dE/dx)` with `F(x) = exp(-E)`.
    fn exponent(&self, x: f64, want_derivative: bool) -> Result<(f64, f64), NumericalError> {
        let v = self.argument.v(x);
        if v < 1e-250 {
            return Ok((f64::INFINITY, f64::NEG_INFINITY));
        }
        if v > 800.0 {
            // Every kernel carries e^{-v}; the field exponent has underflowed.
            return Ok((0.0, 0.0));
        }
        let (h, dh) = self.kernel_eval(v, want_derivative)?;
        let e = self.lambda_scale * h;
        let de = if want_derivative { self.lambda_scale * dh * self.argument.dv(x) } else { 0.0 };
        Ok((e, de))
    }

    fn kernel_eval(&self, v: f64, want_derivative: bool) -> Result<(f64, f64), NumericalError> {
        let delta = self.delta;
        match &self.kernel {
            Kernel::Series { terms, .. } => {
                let ev = (-v).exp();
                let mut h = 0.0;
                let mut dh = 0.0;
                for &(c, p) in terms {
                    let t = c * v.powf(p) * ev;
                    h += t;
                    dh += t * (p / v - 1.0);
                }
                Ok((h, dh))
            }
            Kernel::PdResidual { kappa } => {
                let kv = kappa * v;
                let z = v + 1.0 / kappa;
                let p = (kv + 1.0).powf(delta - 1.0) * kv.powf(-delta);
                let s = upper_incomplete_gamma_scaled(1.0 - delta, z)?;
                let g = gamma_fn(delta)? * (-v).exp();
                let h = g * p * s;
                let dh = if want_derivative {
                    let dp = p * ((delta - 1.0) * kappa / (kv + 1.0) - delta / v);
                    g * (dp * s - p * z.powf(-delta))
                } else {
                    0.0
                };
                Ok((h, dh))
            }
            Kernel::CdResidual { k, kappa, g_coef, dg_coef } => {
                // Substituting s = t^delta (s is the squared radius) gives
                // H(v) = (1/delta) int_0^inf g(v(1 + s^{1/delta})) ds.
                let (k, kappa) = (*k, *kappa);
                let opts = QuadOptions { rel_tol: self.inner_tol, abs_tol: 0.0, max_intervals: 2000 };
                let scale = v.powf(-delta);
                let inv_delta = 1.0 / delta;
                let h = integrate_semi_infinite_with(
                    |s| {
                        let q = s.powf(inv_delta);
                        let w = v * (1.0 + q);
                        Ok((-v * q).exp() * residual_tail_poly(k, kappa, g_coef, w))
                    },
                    scale,
                    opts,
                )?
                .value;
                let ev = (-v).exp();
                let dh = if want_derivative {
                    integrate_semi_infinite_with(
                        |s| {
                            let q = s.powf(inv_delta);
                            let w = v * (1.0 + q);
                            Ok((-v * q).exp() * residual_density_poly(k, kappa, dg_coef, w) * (1.0 + q))
                        },
                        scale,
                        opts,
                    )?
                    .value
                } else {
                    0.0
                };
                Ok((ev * h * inv_delta, -ev * dh * inv_delta))
            }
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64, NumericalError> {
        if self.lambda_scale == 0.0 {
            return Ok(if x >= 0.0 { 1.0 } else { 0.0 });
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        if let Some(top) = self.argument.ceiling() {
            if x >= top {
                return Ok(1.0);
            }
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        let (e, _) = self.exponent(x, false)?;
        Ok((-e).exp())
    }

    /// `1 - F(x)`, accurate when small.
    pub fn sf(&self, x: f64) -> Result<f64, NumericalError> {
        if self.lambda_scale == 0.0 || x.is_infinite() {
            return Ok(if x >= 0.0 { 0.0 } else { 1.0 });
        }
        if x <= 0.0 {
            return Ok(1.0);
        }
        if let Some(top) = self.argument.ceiling() {
            if x >= top {
                return Ok(0.0);
            }
        }
        let (e, _) = self.exponent(x, false)?;
        Ok(-(-e).exp_m1())
    }

    pub fn pdf(&self, x: f64) -> Result<f64, NumericalError> {
        if self.lambda_scale == 0.0 || x <= 0.0 || !x.is_finite() {
            return Ok(0.0);
        }
        if let Some(top) = self.argument.ceiling() {
            if x >= top {
                return Ok(0.0);
            }
        }
        let (e, de) = self.exponent(x, true)?;
        let f = (-e).exp();
        if f == 0.0 || de == 0.0 {
            return Ok(0.0);
        }
        Ok(f * -de)
    }

    /// CDF with the eavesdropper field truncated to a disc of the given
    /// radius, as in simulation. Only defined for the derived forms.
    pub fn cdf_truncated(&self, x: f64, radius: f64) -> Result<f64, NumericalError> {
        if self.lambda_scale == 0.0 {
            return Ok(1.0);
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        if let Some(top) = self.argument.ceiling() {
            if x >= top {
                return Ok(1.0);
            }
        }
        let v = self.argument.v(x);
        let delta = self.delta;
        let inv_delta = 1.0 / delta;
        let tail = |w: f64| -> f64 {
            match &self.kernel {
                Kernel::Series { k, .. } => gamma_q_int(*k, w),
                Kernel::PdResidual { kappa } => (-w).exp() / (1.0 + kappa * w),
                Kernel::CdResidual { k, kappa, g_coef, .. } => (-w).exp() * residual_tail_poly(*k, *kappa, g_coef, w),
            }
        };
        let opts = QuadOptions { rel_tol: self.inner_tol, abs_tol: 0.0, max_intervals: 2000 };
        let integrand = |s: f64| Ok(tail(v * (1.0 + s.powf(inv_delta))));
        let top = radius * radius;
        let knee = 64.0 * v.powf(-delta);
        let h = if top > knee {
            integrate_finite_with(integrand, 0.0, knee, opts)?.value + integrate_finite_with(integrand, knee, top, opts)?.value
        } else {
            integrate_finite_with(integrand, 0.0, top, opts)?.value
        };
        Ok((-self.lambda_scale * h * inv_delta).exp())
    }

    /// Smallest `x` with `F(x) >= p`, by bisection on `log x`.
    pub fn quantile(&self, p: f64) -> Result<f64, NumericalError> {
        if self.lambda_scale == 0.0 {
            return Ok(0.0);
        }
        let upper_cap = self.support_hint.map(|t| t * (1.0 - 1e-12));
        let mut hi = match self.argument {
            Argument::Linear { phi } => phi,
            Argument::Ceiling { eta_rho_e, .. } => eta_rho_e.min(upper_cap.unwrap_or(f64::MAX) * 0.5),
        };
        let mut lo = hi;
        while self.cdf(lo)? >= p && lo > 1e-300 {
            lo *= 1e-3;
        }
        while self.cdf(hi)? < p {
            let next = hi * 10.0;
            match upper_cap {
                Some(cap) if next >= cap => {
                    hi = cap;
                    break;
                }
                _ => hi = next,
            }
            if !hi.is_finite() {
                break;
            }
        }
        let (mut a, mut b) = (lo.ln(), hi.ln());
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if self.cdf(mid.exp())? < p {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-10 {
                break;
            }
        }
        Ok(b.exp())
    }

    /// `int_0^upper f(x) g(x) dx` plus the atom at zero, with quadrature in
    /// `log x` split at the median.
    pub fn expect<G>(&self, g: G, upper: Option<f64>, rel_tol: f64) -> Result<f64, NumericalError>
    where
        G: Fn(f64) -> f64,
    {
        let atom = self.atom_at_zero();
        if atom == 1.0 {
            return Ok(g(0.0));
        }
        let top = match (upper, self.support_hint) {
            (Some(u), Some(s)) => Some(u.min(s)),
            (Some(u), None) => Some(u),
            (None, s) => s,
        };
        if let Some(t) = top {
            if t <= 0.0 {
                return Ok(0.0);
            }
        }
        let median = self.quantile(0.5)?;
        let mut y0 = median.ln();
        if let Some(t) = top {
            y0 = y0.min(t.ln());
        }
        let opts = QuadOptions { rel_tol, abs_tol: 0.0, max_intervals: 4000 };
        let h = |y: f64| -> Result<f64, NumericalError> {
            let x = y.exp();
            if x == 0.0 || !x.is_finite() {
                return Ok(0.0);
            }
            if let Some(t) = top {
                if x >= t {
                    return Ok(0.0);
                }
            }
            let f = self.pdf(x)?;
            if f == 0.0 {
                return Ok(0.0);
            }
            Ok(x * f * g(x))
        };
        let left = integrate_semi_infinite_with(|s| h(y0 - s), 2.0 / self.delta, opts)?.value;
        let right = match top {
            Some(t) if t.ln() - y0 <= 0.0 => 0.0,
            Some(t) => integrate_finite_with(&h, y0, t.ln(), opts)?.value,
            None => integrate_semi_infinite_with(|s| h(y0 + s), 2.0, opts)?.value,
        };
        Ok(left + right)
    }
}

/// `e^{w} g(w)` for the Gamma(K, Omega) residual model:
/// `sum_{i<K} w^i sum_{j<=i} a_ij (1 + kappa w)^{-K-j}`.
fn residual_tail_poly(k: usize, kappa: f64, g_coef: &[Vec<f64>], w: f64) -> f64 {
    let base = 1.0 / (1.0 + kappa * w);
    let lead = base.powi(k as i32);
    let mut total = 0.0;
    let mut wi = 1.0;
    for row in g_coef.iter().take(k) {
        let mut inner = 0.0;
        let mut bj = lead;
        for &a in row {
            inner += a * bj;
            bj *= base;
        }
        total += wi * inner;
        wi *= w;
    }
    total
}

/// `-e^{w} g'(w)`: `w^{K-1} sum_{j<=K} d_j (1 + kappa w)^{-K-j}`.
fn residual_density_poly(k: usize, kappa: f64, dg_coef: &[f64], w: f64) -> f64 {
    let base = 1.0 / (1.0 + kappa * w);
    let mut bj = base.powi(k as i32);
    let mut inner = 0.0;
    for &d in dg_coef {
        inner += d * bj;
        bj *= base;
    }
    w.powi(k as i32 - 1) * inner
}

/// Precomputed per-configuration state for all distribution evaluators.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub k: usize,
    pub delta: f64,
    pub rho: f64,
    pub rho_e: f64,
    pub eta: f64,
    pub a_n: f64,
    pub a_m: f64,
    pub varpi: f64,
    pub omega_i: f64,
    pub omega_ie: f64,
    pub lambda_e: f64,
    pub rel_tol: f64,
    pub near: PositionNodes,
    pub far: PositionNodes,
}

impl ChannelModel {
    pub fn new(v: &Validated) -> Result<ChannelModel, NumericalError> {
        let c = v.config();
        let d = v.derived();
        Ok(ChannelModel {
            k: c.k,
            delta: d.delta,
            rho: d.rho,
            rho_e: d.rho_e,
            eta: d.eta,
            a_n: c.a_n,
            a_m: c.a_m,
            varpi: c.sic.varpi(),
            omega_i: d.omega_i,
            omega_ie: d.omega_ie,
            lambda_e: c.lambda_e,
            rel_tol: c.quad_rel_tol,
            near: position_nodes(c.u, c.r_d1, c.alpha)?,
            far: position_nodes(c.u, c.r_d2, c.alpha)?,
        })
    }

    pub fn default_path(&self) -> Path {
        if self.k >= 2 {
            Path::Cd
        } else {
            Path::Pd
        }
    }

    fn is_perfect(&self) -> bool {
        self.varpi == 0.0
    }

    fn inner_tol(&self) -> f64 {
        (self.rel_tol * 1e-4).max(1e-12)
    }

    /// CDF of the nearby user's SINR.
    pub fn cdf_gamma_n(&self, x: f64) -> f64 {
        self.cdf_gamma_n_path(self.default_path(), x)
    }

    /// The Chebyshev weights sum to slightly more than one, so averaged
    /// CDFs are capped at 1.
    pub fn cdf_gamma_n_path(&self, path: Path, x: f64) -> f64 {
        self.cdf_gamma_n_raw(path, x).min(1.0)
    }

    fn cdf_gamma_n_raw(&self, path: Path, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let scale = x / (self.eta * self.rho * self.a_n);
        let residual = self.varpi * self.rho * self.omega_i;
        match (path, self.is_perfect()) {
            (Path::Cd, true) => self.near.average(|c| gamma_p_int(self.k, c * scale)),
            (Path::Cd, false) => self.near.average(|c| {
                let th = c * scale;
                residual_cdf(self.k, th, th * residual)
            }),
            (Path::Pd, true) => self.near.average(|c| -(-c * scale).exp_m1()),
            (Path::Pd, false) => self.near.average(|c| {
                let th = c * scale;
                let b = th * residual;
                (-(-th).exp_m1() + b) / (1.0 + b)
            }),
        }
    }

    /// High-SNR limit of the nearby user's CDF under imperfect SIC; it no
    /// longer depends on `rho`.
    pub fn cdf_gamma_n_asymptotic(&self, x: f64) -> Result<f64, Error> {
        self.cdf_gamma_n_asymptotic_path(self.default_path(), x)
    }

    pub fn cdf_gamma_n_asymptotic_path(&self, path: Path, x: f64) -> Result<f64, Error> {
        if self.is_perfect() {
            return Err(Error::InvalidArgument(
                "the high-SNR nearby-user CDF has an error floor only under imperfect SIC; use the leading-order term for perfect SIC".into(),
            ));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        let scale = x * self.varpi * self.omega_i / (self.eta * self.a_n);
        let k = self.k;
        let f = match path {
            Path::Cd => self.near.average(|c| {
                let b = c * scale;
                let r = 1.0 / (1.0 + b);
                let lead = (b * r).powi(k as i32);
                (0..k).map(|l| binomial(l + k - 1, l) * r.powi(l as i32)).sum::<f64>() * lead
            }),
            Path::Pd => self.near.average(|c| {
                let b = c * scale;
                b / (1.0 + b)
            }),
        };
        Ok(f.min(1.0))
    }

    /// Leading high-SNR term of the nearby user's CDF under perfect SIC,
    /// `sum_u b_u theta_u^K / K!`; scales exactly as `rho^{-K}`.
    pub fn cdf_gamma_n_leading(&self, x: f64) -> f64 {
        let k = if self.default_path() == Path::Pd { 1 } else { self.k };
        let scale = x.max(0.0) / (self.eta * self.rho * self.a_n);
        (self.near.average(|c| (c * scale).powi(k as i32)) / factorial(k)).min(1.0)
    }

    /// CDF of the distant user's SINR, capped at `a_m / a_n`.
    pub fn cdf_gamma_m(&self, x: f64) -> f64 {
        self.cdf_gamma_m_path(self.default_path(), x)
    }

    pub fn cdf_gamma_m_path(&self, path: Path, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.a_m / self.a_n {
            return 1.0;
        }
        let w = x / (self.eta * self.rho * (self.a_m - self.a_n * x));
        let f = match path {
            Path::Cd => self.far.average(|c| gamma_p_int(self.k, c * w)),
            Path::Pd => self.far.average(|c| -(-c * w).exp_m1()),
        };
        f.min(1.0)
    }

    /// Leading high-SNR term of the distant user's CDF.
    pub fn cdf_gamma_m_leading(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.a_m / self.a_n {
            return 1.0;
        }
        let k = if self.default_path() == Path::Pd { 1 } else { self.k };
        let w = x / (self.eta * self.rho * (self.a_m - self.a_n * x));
        (self.far.average(|c| (c * w).powi(k as i32)) / factorial(k)).min(1.0)
    }

    fn lambda_scale(&self) -> f64 {
        self.delta * std::f64::consts::PI * self.lambda_e
    }

    fn series_terms(&self, k: usize, family: Family, form: ExponentForm) -> Result<Vec<(f64, f64)>, NumericalError> {
        let delta = self.delta;
        let mut terms = Vec::new();
        for i in 0..k {
            for j in 0..=i {
                let norm = match (form, family) {
                    (ExponentForm::Printed, Family::EveExternalM) => factorial(j),
                    _ => factorial(i),
                };
                let shift = match (form, family) {
                    (ExponentForm::Printed, Family::EveExternalN) => 1.0,
                    _ => 0.0,
                };
                let coef = binomial(i, j) * gamma_fn(j as f64 + delta)? / norm;
                terms.push((coef, i as f64 - j as f64 - delta - shift));
            }
        }
        Ok(terms)
    }

    fn residual_kernel(&self, path: Path, k: usize) -> Kernel {
        let kappa = self.varpi * self.rho_e * self.omega_ie;
        match path {
            Path::Pd => Kernel::PdResidual { kappa },
            Path::Cd => {
                let gk = factorial(k - 1);
                let g_coef = (0..k)
                    .map(|i| {
                        (0..=i)
                            .map(|j| {
                                binomial(i, j) * kappa.powi(j as i32) * factorial(k + j - 1) / (gk * factorial(i))
                            })
                            .collect()
                    })
                    .collect();
                let dg_coef = (0..=k)
                    .map(|j| binomial(k, j) * kappa.powi(j as i32) * factorial(k + j - 1) / (gk * gk))
                    .collect();
                Kernel::CdResidual { k, kappa, g_coef, dg_coef }
            }
        }
    }

    fn handle(&self, family: Family, provenance: &'static str, argument: Argument, kernel: Kernel) -> DistributionHandle {
        DistributionHandle {
            family,
            provenance,
            support_hint: argument.ceiling(),
            lambda_scale: self.lambda_scale(),
            delta: self.delta,
            argument,
            kernel,
            inner_tol: self.inner_tol(),
        }
    }

    /// Strongest external eavesdropper when the nearby user's message is
    /// targeted.
    pub fn eve_external_n(&self) -> Result<DistributionHandle, NumericalError> {
        self.eve_external_n_with(self.default_path(), ExponentForm::Derived)
    }

    pub fn eve_external_n_with(&self, path: Path, form: ExponentForm) -> Result<DistributionHandle, NumericalError> {
        let k = if path == Path::Pd { 1 } else { self.k };
        let argument = Argument::Linear { phi: self.eta * self.rho_e * self.a_n };
        let (kernel, provenance) = if self.is_perfect() || form == ExponentForm::Printed {
            let p = match (path, form) {
                (_, ExponentForm::Printed) => "eve-n/series/printed",
                (Path::Cd, _) => "eve-n/series",
                (Path::Pd, _) => "eve-n/pd-series",
            };
            (Kernel::Series { k, terms: self.series_terms(k, Family::EveExternalN, form)? }, p)
        } else {
            let p = if path == Path::Cd { "eve-n/residual-radial" } else { "eve-n/pd-residual-closed" };
            (self.residual_kernel(path, k), p)
        };
        Ok(self.handle(Family::EveExternalN, provenance, argument, kernel))
    }

    /// Strongest external eavesdropper decoding the distant user's message;
    /// support `[0, a_m / a_n)`.
    pub fn eve_external_m(&self) -> Result<DistributionHandle, NumericalError> {
        self.eve_external_m_with(self.default_path(), ExponentForm::Derived)
    }

    pub fn eve_external_m_with(&self, path: Path, form: ExponentForm) -> Result<DistributionHandle, NumericalError> {
        let k = if path == Path::Pd { 1 } else { self.k };
        let argument = Argument::Ceiling { eta_rho_e: self.eta * self.rho_e, a_m: self.a_m, a_n: self.a_n };
        let provenance = match (path, form) {
            (_, ExponentForm::Printed) => "eve-m/series/printed",
            (Path::Cd, _) => "eve-m/series",
            (Path::Pd, _) => "eve-m/pd-series",
        };
        let kernel = Kernel::Series { k, terms: self.series_terms(k, Family::EveExternalM, form)? };
        Ok(self.handle(Family::EveExternalM, provenance, argument, kernel))
    }

    /// Strongest internal eavesdropper, which cancels its own message first
    /// and so sees no residual interference.
    pub fn eve_internal(&self) -> Result<DistributionHandle, NumericalError> {
        self.eve_internal_with(self.default_path())
    }

    pub fn eve_internal_with(&self, path: Path) -> Result<DistributionHandle, NumericalError> {
        let k = if path == Path::Pd { 1 } else { self.k };
        let argument = Argument::Linear { phi: self.eta * self.rho_e * self.a_n };
        let provenance = if path == Path::Cd { "eve-internal/series" } else { "eve-internal/pd-series" };
        let kernel = Kernel::Series { k, terms: self.series_terms(k, Family::EveExternalN, ExponentForm::Derived)? };
        Ok(self.handle(Family::EveInternal, provenance, argument, kernel))
    }
}

/// `Pr(Y < th (1 + c Z))` for `Y ~ Gamma(K, 1)` and `Z ~ Gamma(K, Omega)`
/// with `b = th c Omega`. Every term is nonnegative, so the value keeps full
/// relative accuracy when it is tiny.
fn residual_cdf(k: usize, th: f64, b: f64) -> f64 {
    if b == 0.0 {
        return gamma_p_int(k, th);
    }
    let r = 1.0 / (1.0 + b);
    let mut extra = 0.0;
    for l in 0..k {
        for m in 0..k {
            let t = binomial(k - 1, m)
                * th.powi((k - 1 - m) as i32)
                * (factorial(l + m) / factorial(l))
                * (b * r).powi(m as i32 + 1)
                * r.powi(l as i32);
            extra += t;
        }
    }
    (gamma_p_int(k, th) + (-th).exp() * extra / factorial(k - 1)).min(1.0)
}

pub fn cdf_gamma_n(cfg: &Validated, x: f64) -> Result<f64, Error> {
    Ok(ChannelModel::new(cfg)?.cdf_gamma_n(x))
}

pub fn cdf_gamma_m(cfg: &Validated, x: f64) -> Result<f64, Error> {
    Ok(ChannelModel::new(cfg)?.cdf_gamma_m(x))
}

pub fn cdf_gamma_n_asymptotic(cfg: &Validated, x: f64) -> Result<f64, Error> {
    ChannelModel::new(cfg)?.cdf_gamma_n_asymptotic(x)
}

pub fn eve_external_n(cfg: &Validated) -> Result<DistributionHandle, Error> {
    Ok(ChannelModel::new(cfg)?.eve_external_n()?)
}

pub fn eve_external_m(cfg: &Validated) -> Result<DistributionHandle, Error> {
    Ok(ChannelModel::new(cfg)?.eve_external_m()?)
}

pub fn eve_internal(cfg: &Validated) -> Result<DistributionHandle, Error> {
    Ok(ChannelModel::new(cfg)?.eve_internal()?)
}
