//! System configuration, validation and the derived physical constants
//! shared by the analytic engine and the simulator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ConfigErrors};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Free-space frequency factor `(c / (4 pi f))^2`.
pub fn eta_from_carrier(carrier_hz: f64) -> Result<f64, ConfigError> {
    if !(carrier_hz > 0.0) || !carrier_hz.is_finite() {
        return Err(ConfigError::new("carrier_hz", "must be a positive finite frequency"));
    }
    let wavelength_factor = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * carrier_hz);
    Ok(wavelength_factor * wavelength_factor)
}

/// Successive interference cancellation quality at the nearby user (and at
/// the eavesdroppers, which suffer the same residual-interference level).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SicMode {
    Perfect,
    Imperfect { varpi: f64 },
}

impl SicMode {
    /// Residual interference level; zero for perfect cancellation.
    pub fn varpi(&self) -> f64 {
        match *self {
            SicMode::Perfect => 0.0,
            SicMode::Imperfect { varpi } => varpi,
        }
    }

    pub fn is_perfect(&self) -> bool {
        matches!(self, SicMode::Perfect)
    }

    pub fn label(&self) -> &'static str {
        match self {
            SicMode::Perfect => "psic",
            SicMode::Imperfect { .. } => "ipsic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// External eavesdroppers targeting the nearby (n-th) user.
    ExternalN,
    /// External eavesdroppers targeting the distant (m-th) user.
    ExternalM,
    /// Joint outage of the user pair under external eavesdropping.
    ExternalPair,
    /// The distant user wiretaps the nearby user.
    Internal,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::ExternalN,
        Scenario::ExternalM,
        Scenario::ExternalPair,
        Scenario::Internal,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Scenario::ExternalN => "external-n",
            Scenario::ExternalM => "external-m",
            Scenario::ExternalPair => "external-pair",
            Scenario::Internal => "internal",
        }
    }

    /// Column value for the `user` field of sweep output.
    pub fn user_label(&self) -> &'static str {
        match self {
            Scenario::ExternalN => "n",
            Scenario::ExternalM => "m",
            Scenario::ExternalPair => "pair",
            Scenario::Internal => "m_to_n",
        }
    }

    pub fn from_label(s: &str) -> Option<Scenario> {
        Scenario::ALL.into_iter().find(|sc| sc.label() == s)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Asymptotic,
    MonteCarlo,
}

impl Method {
    /// Short tag used in CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Asymptotic => "asymptotic",
            Method::MonteCarlo => "mc",
        }
    }

    pub fn from_tag(s: &str) -> Option<Method> {
        match s {
            "exact" => Some(Method::Exact),
            "asymptotic" | "asym" => Some(Method::Asymptotic),
            "mc" | "monte-carlo" => Some(Method::MonteCarlo),
            _ => None,
        }
    }
}

/// A secrecy outage probability produced by one of the evaluation methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SopEstimate {
    /// Probability, clamped to `[0, 1]`.
    pub value: f64,
    pub method: Method,
    /// 95% half width; zero for deterministic methods.
    pub ci_half_width: f64,
    pub iterations: u64,
    pub notes: String,
}

impl SopEstimate {
    /// Wraps an analytic value. Quadrature may overshoot 1 slightly (the
    /// Chebyshev position weights sum to marginally more than one); the
    /// clamped value is reported and the raw one kept in `notes`.
    pub fn analytic(raw: f64, method: Method) -> SopEstimate {
        let value = raw.clamp(0.0, 1.0);
        let notes = if value != raw { format!("raw={raw:e}") } else { String::new() };
        SopEstimate { value, method, ci_half_width: 0.0, iterations: 0, notes }
    }

    /// Unclamped value if it was recorded, otherwise `value`.
    pub fn raw_value(&self) -> f64 {
        self.notes
            .split_whitespace()
            .find_map(|tok| tok.strip_prefix("raw=").and_then(|v| v.parse().ok()))
            .unwrap_or(self.value)
    }
}

fn default_u() -> usize {
    15
}

fn default_quad_rel_tol() -> f64 {
    1e-6
}

/// Physical and network parameters. Field names are the JSON config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Number of subcarriers; 1 selects power-domain NOMA.
    pub k: usize,
    pub a_n: f64,
    pub a_m: f64,
    /// Transmit SNR at the legitimate users, dB.
    pub rho_db: f64,
    /// Transmit SNR at the eavesdroppers, dB.
    pub rho_e_db: f64,
    pub carrier_hz: f64,
    /// Explicit frequency factor; when absent it is derived from `carrier_hz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub alpha: f64,
    /// Eavesdropper density, points per square metre.
    pub lambda_e: f64,
    pub r_d1: f64,
    pub r_d2: f64,
    /// Radius of the simulated eavesdropper field.
    pub r_eve: f64,
    pub sic: SicMode,
    /// Total expected residual interference power at the nearby user, dB.
    pub residual_total_db: f64,
    /// Total expected residual interference power at an eavesdropper, dB.
    pub residual_total_eve_db: f64,
    pub r_n: f64,
    pub r_m: f64,
    pub r_mn: f64,
    /// Chebyshev-Gauss node count for the user-position average.
    #[serde(default = "default_u")]
    pub u: usize,
    #[serde(default = "default_quad_rel_tol")]
    pub quad_rel_tol: f64,
    /// Total user count. Informational only: all expressions are per pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_users: Option<usize>,
    /// When set, the internal eavesdropping simulation draws its own point
    /// process on a disc of this radius instead of reusing the external field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub internal_eve_radius: Option<f64>,
}

impl Default for SystemConfig {
    /// Baseline numerical-results parameters: 1 GHz carrier, 1000 m
    /// eavesdropper disc, alpha = 2, a_m = 0.8, a_n = 0.2, 0.01 BPCU rates,
    /// 2 m / 10 m user discs, rho_e = 10 dB, lambda_e = 1e-3, K = 2,
    /// ipSIC with varpi = 1 and -30 dB residual power, U = 15.
    fn default() -> Self {
        SystemConfig {
            k: 2,
            a_n: 0.2,
            a_m: 0.8,
            rho_db: 30.0,
            rho_e_db: 10.0,
            carrier_hz: 1e9,
            eta: None,
            alpha: 2.0,
            lambda_e: 1e-3,
            r_d1: 2.0,
            r_d2: 10.0,
            r_eve: 1000.0,
            sic: SicMode::Imperfect { varpi: 1.0 },
            residual_total_db: -30.0,
            residual_total_eve_db: -30.0,
            r_n: 0.01,
            r_m: 0.01,
            r_mn: 0.01,
            u: 15,
            quad_rel_tol: 1e-6,
            m_users: None,
            internal_eve_radius: None,
        }
    }
}

/// Quantities derived from a [`SystemConfig`] during validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derived {
    /// `2 / alpha`, in `(0, 1]`.
    pub delta: f64,
    pub rho: f64,
    pub rho_e: f64,
    pub eta: f64,
    /// Per-subcarrier residual interference variance at the nearby user.
    pub omega_i: f64,
    /// Per-subcarrier residual interference variance at an eavesdropper.
    pub omega_ie: f64,
}

/// A configuration whose invariants have been checked. Immutable; share it
/// freely across threads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validated {
    cfg: SystemConfig,
    derived: Derived,
}

impl Validated {
    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn derived(&self) -> &Derived {
        &self.derived
    }

    pub fn k(&self) -> usize {
        self.cfg.k
    }

    pub fn varpi(&self) -> f64 {
        self.cfg.sic.varpi()
    }

    pub fn is_code_domain(&self) -> bool {
        self.cfg.k >= 2
    }

    pub fn scheme_label(&self) -> &'static str {
        if self.is_code_domain() {
            "cd"
        } else {
            "pd"
        }
    }

    /// Target rate of a scenario's user. The pair scenario has two rates and
    /// reports the nearby user's.
    pub fn target_rate(&self, scenario: Scenario) -> f64 {
        match scenario {
            Scenario::ExternalN | Scenario::ExternalPair => self.cfg.r_n,
            Scenario::ExternalM => self.cfg.r_m,
            Scenario::Internal => self.cfg.r_mn,
        }
    }

    /// Re-validates after applying `edit` to a copy of the configuration.
    pub fn with(&self, edit: impl FnOnce(&mut SystemConfig)) -> Result<Validated, ConfigErrors> {
        let mut cfg = self.cfg.clone();
        edit(&mut cfg);
        cfg.validate()
    }

    pub fn with_rho_db(&self, rho_db: f64) -> Validated {
        let mut out = self.clone();
        out.cfg.rho_db = rho_db;
        out.derived.rho = db_to_linear(rho_db);
        out
    }
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<SystemConfig, ConfigErrors> {
        serde_json::from_str(text)
            .map_err(|e| ConfigErrors(vec![ConfigError::new("<json>", e.to_string())]))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every invariant, collecting all violations, and populates the
    /// derived constants.
    pub fn validate(&self) -> Result<Validated, ConfigErrors> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &'static str, rule: &str| {
            if !ok {
                errs.push(ConfigError::new(field, rule));
            }
        };

        check(self.k >= 1, "k", "must be at least 1");
        check(self.a_n > 0.0 && self.a_n < 1.0, "a_n", "must lie in (0, 1)");
        check(self.a_m > 0.0 && self.a_m < 1.0, "a_m", "must lie in (0, 1)");
        check((self.a_n + self.a_m - 1.0).abs() <= 1e-9, "a_m", "a_n + a_m must equal 1");
        check(self.a_m > self.a_n, "a_m", "a_m must exceed a_n");
        check(self.rho_db.is_finite(), "rho_db", "must be finite");
        check(self.rho_e_db.is_finite(), "rho_e_db", "must be finite");
        check(self.alpha.is_finite() && self.alpha >= 2.0, "alpha", "must be >= 2 so that delta = 2/alpha <= 1");
        check(self.lambda_e.is_finite() && self.lambda_e >= 0.0, "lambda_e", "must be a nonnegative density");
        check(self.r_d1.is_finite() && self.r_d1 >= 0.0, "r_d1", "must be nonnegative");
        check(self.r_d2.is_finite() && self.r_d2 > self.r_d1, "r_d2", "must exceed r_d1");
        check(self.r_eve.is_finite() && self.r_eve > self.r_d2, "r_eve", "must exceed r_d2");
        match self.sic {
            SicMode::Perfect => {}
            SicMode::Imperfect { varpi } => {
                check(varpi > 0.0 && varpi <= 1.0, "sic", "imperfect SIC level varpi must lie in (0, 1]")
            }
        }
        check(self.residual_total_db.is_finite(), "residual_total_db", "must be finite");
        check(self.residual_total_eve_db.is_finite(), "residual_total_eve_db", "must be finite");
        for (field, rate) in [("r_n", self.r_n), ("r_m", self.r_m), ("r_mn", self.r_mn)] {
            check(rate.is_finite() && rate >= 0.0, field, "target rate must be nonnegative");
        }
        // The distant user's SINR is capped at a_m/a_n; a rate at or above
        // log2(1/a_n) can never be supported.
        check(
            self.a_n <= 0.0 || self.r_m < (1.0 / self.a_n).log2(),
            "r_m",
            "must be below log2(1/a_n), the distant user's rate ceiling",
        );
        check(self.u >= 1, "u", "must be at least 1");
        check(
            self.quad_rel_tol > 0.0 && self.quad_rel_tol < 1e-1,
            "quad_rel_tol",
            "must lie in (0, 0.1)",
        );
        if let Some(r) = self.internal_eve_radius {
            check(r.is_finite() && r > 0.0, "internal_eve_radius", "must be positive");
        }
        if let Some(m) = self.m_users {
            check(m >= 2, "m_users", "must be at least 2");
        }

        let eta = match self.eta {
            Some(eta) => {
                check(eta.is_finite() && eta > 0.0, "eta", "must be positive");
                eta
            }
            None => match eta_from_carrier(self.carrier_hz) {
                Ok(eta) => eta,
                Err(e) => {
                    errs.push(e);
                    f64::NAN
                }
            },
        };

        if !errs.is_empty() {
            return Err(ConfigErrors(errs));
        }

        let k = self.k as f64;
        Ok(Validated {
            cfg: self.clone(),
            derived: Derived {
                delta: 2.0 / self.alpha,
                rho: db_to_linear(self.rho_db),
                rho_e: db_to_linear(self.rho_e_db),
                eta,
                omega_i: db_to_linear(self.residual_total_db) / k,
                omega_ie: db_to_linear(self.residual_total_eve_db) / k,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_power_split_accepted() {
        let v = SystemConfig::default().validate().unwrap();
        assert_eq!(v.config().a_n, 0.2);
        assert_eq!(v.config().a_m, 0.8);
    }

    #[test]
    fn equal_power_split_rejected() {
        let cfg = SystemConfig { a_n: 0.5, a_m: 0.5, ..Default::default() };
        let errs = cfg.validate().unwrap_err();
        assert!(errs.0.iter().any(|e| e.field == "a_m" && e.rule.contains("exceed")));
    }

    #[test]
    fn sub_quadratic_path_loss_rejected() {
        let cfg = SystemConfig { alpha: 1.5, ..Default::default() };
        let errs = cfg.validate().unwrap_err();
        assert_eq!(errs.0.len(), 1);
        assert_eq!(errs.0[0].field, "alpha");
    }

    #[test]
    fn all_violations_are_collected() {
        let cfg = SystemConfig {
            k: 0,
            alpha: 1.0,
            r_d2: 1.0,
            sic: SicMode::Imperfect { varpi: 0.0 },
            ..Default::default()
        };
        let fields: Vec<_> = cfg.validate().unwrap_err().0.into_iter().map(|e| e.field).collect();
        for f in ["k", "alpha", "r_d2", "sic"] {
            assert!(fields.contains(&f), "missing {f} in {fields:?}");
        }
    }

    #[test]
    fn eta_at_one_gigahertz() {
        let eta = eta_from_carrier(1e9).unwrap();
        let expected = (SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * 1e9)).powi(2);
        assert_eq!(eta, expected);
        assert!((eta - 5.691_434e-4).abs() < 1e-10, "{eta}");
    }

    #[test]
    fn eta_scales_inverse_square() {
        let f = 2.4e9;
        let ratio = eta_from_carrier(f).unwrap() / eta_from_carrier(2.0 * f).unwrap();
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn eta_rejects_nonpositive_frequency() {
        assert!(eta_from_carrier(0.0).is_err());
        assert!(eta_from_carrier(-1.0).is_err());
    }

    #[test]
    fn eta_override_wins() {
        let cfg = SystemConfig { eta: Some(1.0), carrier_hz: 5e9, ..Default::default() };
        assert_eq!(cfg.validate().unwrap().derived().eta, 1.0);
    }

    #[test]
    fn derived_quantities() {
        let v = SystemConfig::default().validate().unwrap();
        let d = v.derived();
        assert_eq!(d.delta, 1.0);
        assert!((d.rho - 1000.0).abs() < 1e-9);
        assert!((d.rho_e - 10.0).abs() < 1e-12);
        assert!((d.omega_i - 5e-4).abs() < 1e-15);
        assert!((d.omega_ie - 5e-4).abs() < 1e-15);
    }

    #[test]
    fn validation_is_idempotent() {
        let v = SystemConfig { alpha: 3.0, k: 3, ..Default::default() }.validate().unwrap();
        let again = v.config().validate().unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let mut value = serde_json::to_value(SystemConfig::default()).unwrap();
        value["bogus"] = serde_json::json!(1);
        assert!(SystemConfig::from_json(&value.to_string()).is_err());
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let cfg = SystemConfig::default();
        let back = SystemConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, back);

        let mut value = serde_json::to_value(&cfg).unwrap();
        value.as_object_mut().unwrap().remove("u");
        value["sic"] = serde_json::json!({"kind": "perfect"});
        let parsed = SystemConfig::from_json(&value.to_string()).unwrap();
        assert_eq!(parsed.u, 15);
        assert_eq!(parsed.sic, SicMode::Perfect);
    }

    #[test]
    fn estimate_clamps_and_keeps_raw() {
        let est = SopEstimate::analytic(1.0018, Method::Exact);
        assert_eq!(est.value, 1.0);
        assert_eq!(est.raw_value(), 1.0018);
        let est = SopEstimate::analytic(0.25, Method::Exact);
        assert!(est.notes.is_empty());
        assert_eq!(est.raw_value(), 0.25);
    }

    proptest::proptest! {
        #[test]
        fn db_round_trip(db in -200.0f64..200.0) {
            let back = linear_to_db(db_to_linear(db));
            proptest::prop_assert!((back - db).abs() <= 1e-12 * db.abs().max(1.0));
        }

        #[test]
        fn delta_unit_only_at_quadratic_loss(alpha in 2.0f64..6.0) {
            let v = SystemConfig { alpha, ..Default::default() }.validate().unwrap();
            proptest::prop_assert_eq!(v.derived().delta == 1.0, alpha == 2.0);
        }
    }
}
