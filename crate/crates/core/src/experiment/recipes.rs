//! Parameter presets that regenerate the data behind each published figure.
//!
//! A recipe is pure data: JSON overrides merged into a base configuration,
//! one set per plotted curve family, plus the sweep to run on each.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{Method, Scenario, SystemConfig, Validated};

pub const FIGURES: [&str; 9] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variant {
    /// File-name-safe label, e.g. `alpha-3`.
    pub label: String,
    pub overrides: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRecipe {
    pub name: &'static str,
    pub title: &'static str,
    /// Overrides shared by every variant.
    pub common: Map<String, Value>,
    pub variants: Vec<Variant>,
    pub scenarios: Vec<Scenario>,
    pub rho_db: Vec<f64>,
    pub methods: Vec<Method>,
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("recipe overrides are objects"),
    }
}

fn variant(label: impl Into<String>, overrides: Value) -> Variant {
    Variant { label: label.into(), overrides: obj(overrides) }
}

fn psic() -> Value {
    json!({"kind": "perfect"})
}

fn ipsic() -> Value {
    json!({"kind": "imperfect", "varpi": 1.0})
}

fn grid() -> Vec<f64> {
    (0..=12).map(|i| 5.0 * i as f64).collect()
}

const ALL_METHODS: [Method; 3] = [Method::Exact, Method::Asymptotic, Method::MonteCarlo];

/// Looks up a figure preset by name.
pub fn figure_recipe(name: &str) -> Result<FigureRecipe> {
    let both = [Scenario::ExternalN, Scenario::ExternalM];
    let r = match name {
        "fig2" => FigureRecipe {
            name: "fig2",
            title: "Nearby and distant user SOP, perfect vs imperfect SIC",
            common: obj(json!({"k": 2, "r_n": 0.01, "r_m": 0.01})),
            variants: vec![
                variant("psic", json!({"sic": psic()})),
                variant("ipsic-res-30", json!({"sic": ipsic(), "residual_total_db": -30.0, "residual_total_eve_db": -30.0})),
                variant("ipsic-res-20", json!({"sic": ipsic(), "residual_total_db": -20.0, "residual_total_eve_db": -20.0})),
            ],
            scenarios: both.to_vec(),
            rho_db: grid(),
            methods: ALL_METHODS.to_vec(),
        },
        "fig3" => FigureRecipe {
            name: "fig3",
            title: "Effect of the number of subcarriers K",
            common: obj(json!({"sic": psic()})),
            variants: [1, 2, 3].iter().map(|&k| variant(format!("k-{k}"), json!({"k": k}))).collect(),
            scenarios: both.to_vec(),
            rho_db: grid(),
            methods: ALL_METHODS.to_vec(),
        },
        "fig4" => FigureRecipe {
            name: "fig4",
            title: "Effect of the target secrecy rate",
            common: obj(json!({"sic": psic()})),
            variants: [0.01, 0.1, 0.5]
                .iter()
                .map(|&r| variant(format!("rate-{r}"), json!({"r_n": r, "r_m": r, "r_mn": r})))
                .collect(),
            scenarios: both.to_vec(),
            rho_db: grid(),
            methods: vec![Method::Exact, Method::MonteCarlo],
        },
        "fig5" => FigureRecipe {
            name: "fig5",
            title: "Effect of the path-loss exponent",
            common: obj(json!({"sic": psic()})),
            variants: [2.0, 3.0, 4.0].iter().map(|&a| variant(format!("alpha-{a}"), json!({"alpha": a}))).collect(),
            scenarios: both.to_vec(),
            rho_db: grid(),
            methods: vec![Method::Exact, Method::MonteCarlo],
        },
        "fig6" => FigureRecipe {
            name: "fig6",
            title: "Effect of the distant user's disc radius",
            common: obj(json!({"sic": psic()})),
            variants: [10.0, 15.0, 20.0].iter().map(|&r| variant(format!("r_d2-{r}"), json!({"r_d2": r}))).collect(),
            scenarios: both.to_vec(),
            rho_db: grid(),
            methods: vec![Method::Exact, Method::MonteCarlo],
        },
        "fig7" => FigureRecipe {
            name: "fig7",
            title: "Pair SOP, code domain vs power domain",
            common: Map::new(),
            variants: vec![
                variant("cd-psic", json!({"k": 2, "sic": psic()})),
                variant("pd-psic", json!({"k": 1, "sic": psic()})),
                variant("cd-ipsic", json!({"k": 2, "sic": ipsic()})),
                variant("pd-ipsic", json!({"k": 1, "sic": ipsic()})),
            ],
            scenarios: vec![Scenario::ExternalPair],
            rho_db: grid(),
            methods: ALL_METHODS.to_vec(),
        },
        "fig8" => FigureRecipe {
            name: "fig8",
            title: "Effect of the power allocation factor theta",
            common: obj(json!({"sic": psic()})),
            variants: [0.1, 0.2, 0.3]
                .iter()
                .map(|&t: &f64| variant(format!("theta-{t}"), json!({"a_n": t, "a_m": 1.0 - t})))
                .collect(),
            scenarios: both.to_vec(),
            rho_db: grid(),
            methods: vec![Method::Exact, Method::MonteCarlo],
        },
        "fig9" => FigureRecipe {
            name: "fig9",
            title: "Internal eavesdropping, residual interference level",
            common: obj(json!({"k": 2})),
            variants: vec![
                variant("psic", json!({"sic": psic()})),
                variant("ipsic-res-30", json!({"sic": ipsic(), "residual_total_db": -30.0, "residual_total_eve_db": -30.0})),
                variant("ipsic-res-20", json!({"sic": ipsic(), "residual_total_db": -20.0, "residual_total_eve_db": -20.0})),
            ],
            scenarios: vec![Scenario::Internal],
            rho_db: grid(),
            methods: ALL_METHODS.to_vec(),
        },
        "fig10" => FigureRecipe {
            name: "fig10",
            title: "Internal eavesdropping, nearby user's disc radius",
            common: obj(json!({"sic": psic()})),
            variants: [2.0, 5.0, 8.0].iter().map(|&r| variant(format!("r_d1-{r}"), json!({"r_d1": r}))).collect(),
            scenarios: vec![Scenario::Internal],
            rho_db: grid(),
            methods: vec![Method::Exact, Method::MonteCarlo],
        },
        other => {
            return Err(Error::InvalidArgument(format!("unknown figure '{other}'; expected one of {}", FIGURES.join(", "))))
        }
    };
    Ok(r)
}

/// Merges JSON overrides into a configuration. Unknown keys are rejected.
pub fn apply_overrides(base: &SystemConfig, overrides: &Map<String, Value>) -> Result<SystemConfig> {
    let mut value = serde_json::to_value(base).expect("config serializes");
    let target = value.as_object_mut().expect("config is an object");
    for (k, v) in overrides {
        target.insert(k.clone(), v.clone());
    }
    serde_json::from_value(value).map_err(|e| Error::InvalidArgument(format!("bad override: {e}")))
}

impl FigureRecipe {
    /// The validated configuration of every variant, in order.
    pub fn configs(&self, base: &SystemConfig) -> Result<Vec<(String, Validated)>> {
        let common = apply_overrides(base, &self.common)?;
        self.variants
            .iter()
            .map(|v| Ok((v.label.clone(), apply_overrides(&common, &v.overrides)?.validate()?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_resolves_and_validates() {
        for name in FIGURES {
            let r = figure_recipe(name).unwrap();
            assert_eq!(r.name, name);
            let cfgs = r.configs(&SystemConfig::default()).unwrap();
            assert!(!cfgs.is_empty());
        }
        assert!(figure_recipe("fig11").is_err());
    }

    #[test]
    fn recipes_are_pure() {
        let base = SystemConfig::default();
        let r = figure_recipe("fig8").unwrap();
        assert_eq!(r.configs(&base).unwrap(), r.configs(&base).unwrap());
    }

    #[test]
    fn figure_parameters() {
        let base = SystemConfig::default();
        let alphas: Vec<f64> = figure_recipe("fig5").unwrap().configs(&base).unwrap().iter().map(|(_, c)| c.config().alpha).collect();
        assert_eq!(alphas, vec![2.0, 3.0, 4.0]);
        for (_, c) in figure_recipe("fig8").unwrap().configs(&base).unwrap() {
            assert!((c.config().a_n + c.config().a_m - 1.0).abs() < 1e-12);
        }
        let fig2 = figure_recipe("fig2").unwrap().configs(&base).unwrap();
        assert!(fig2.iter().all(|(_, c)| c.k() == 2 && c.config().r_n == 0.01 && c.config().r_m == 0.01));
    }

    #[test]
    fn unknown_override_key_is_rejected() {
        let bad = obj(json!({"no_such_key": 1}));
        assert!(apply_overrides(&SystemConfig::default(), &bad).is_err());
    }
}
