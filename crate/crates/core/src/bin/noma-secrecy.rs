//! Command-line front end: single SOP values, sweeps, figure data,
//! validation reports and diversity fits.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use noma_secrecy::error::Error;
use noma_secrecy::experiment::{
    apply_overrides, figure_recipe, parse_rho_range, run_sweep_to_file, validate_report, SweepSpec,
};
use noma_secrecy::model::{Method, Scenario, SystemConfig, Validated};
use noma_secrecy::montecarlo::{estimate_sop_mc_with, McOptions};
use noma_secrecy::sop::{diversity_order, SopEngine};

const SEED_ENV: &str = "NOMA_SECRECY_SEED";
const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "noma-secrecy", version, about = "Secrecy outage analysis for CD/PD-NOMA")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One SOP value.
    Sop {
        #[arg(long, default_value = "external-n")]
        scenario: String,
        #[arg(long, default_value = "exact")]
        method: String,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// SOP over a range of transmit SNRs, as CSV.
    Sweep {
        /// Comma-separated scenarios, or `all`.
        #[arg(long, default_value = "all")]
        scenarios: String,
        /// `start:stop:step` in dB, or a comma-separated list.
        #[arg(long, default_value = "0:60:5")]
        rho: String,
        #[arg(long, default_value = "exact")]
        methods: String,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Data for one of the figure presets (fig2 to fig10).
    Figure {
        name: String,
        #[arg(long, default_value = "figures")]
        out_dir: PathBuf,
        /// Overrides the preset's methods.
        #[arg(long)]
        methods: Option<String>,
        /// Overrides the preset's SNR grid.
        #[arg(long)]
        rho: Option<String>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Analytic-vs-simulation report. Exits with 3 when any check fails.
    Validate {
        /// Writes the JSON report here as well as printing the summary.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// High-SNR slope fit of the SOP.
    Diversity {
        #[arg(long, default_value = "external-n")]
        scenario: String,
        #[arg(long, default_value = "35:55:5")]
        rho: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 20_000)]
    iterations: u64,
    /// Defaults to $NOMA_SECRECY_SEED, then 1.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    workers: Option<usize>,
}

impl McArgs {
    fn options(&self) -> Result<McOptions, Error> {
        let seed = match self.seed {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}='{v}' is not an unsigned integer")))?,
                Err(_) => DEFAULT_SEED,
            },
        };
        let opts = McOptions::new(self.iterations, seed);
        Ok(match self.workers {
            Some(w) => opts.with_workers(w),
            None => opts,
        })
    }
}

/// One flag per configuration key. Flags override `--config`.
#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration; keys not given keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "a_n", alias = "a-n")]
    a_n: Option<f64>,
    #[arg(long = "a_m", alias = "a-m")]
    a_m: Option<f64>,
    #[arg(long = "rho_db", alias = "rho-db")]
    rho_db: Option<f64>,
    #[arg(long = "rho_e_db", alias = "rho-e-db")]
    rho_e_db: Option<f64>,
    #[arg(long = "carrier_hz", alias = "carrier-hz")]
    carrier_hz: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "lambda_e", alias = "lambda-e")]
    lambda_e: Option<f64>,
    #[arg(long = "r_d1", alias = "r-d1")]
    r_d1: Option<f64>,
    #[arg(long = "r_d2", alias = "r-d2")]
    r_d2: Option<f64>,
    #[arg(long = "r_eve", alias = "r-eve")]
    r_eve: Option<f64>,
    /// `psic` or `ipsic`.
    #[arg(long)]
    sic: Option<String>,
    /// Residual level for imperfect SIC.
    #[arg(long)]
    varpi: Option<f64>,
    #[arg(long = "residual_total_db", alias = "residual-total-db")]
    residual_total_db: Option<f64>,
    #[arg(long = "residual_total_eve_db", alias = "residual-total-eve-db")]
    residual_total_eve_db: Option<f64>,
    #[arg(long = "r_n", alias = "r-n")]
    r_n: Option<f64>,
    #[arg(long = "r_m", alias = "r-m")]
    r_m: Option<f64>,
    #[arg(long = "r_mn", alias = "r-mn")]
    r_mn: Option<f64>,
    #[arg(long)]
    u: Option<usize>,
    #[arg(long = "quad_rel_tol", alias = "quad-rel-tol")]
    quad_rel_tol: Option<f64>,
    #[arg(long = "m_users", alias = "m-users")]
    m_users: Option<usize>,
    #[arg(long = "internal_eve_radius", alias = "internal-eve-radius")]
    internal_eve_radius: Option<f64>,
}

impl ConfigArgs {
    fn overrides(&self) -> Result<Map<String, Value>, Error> {
        let mut m = Map::new();
        let mut put = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(key.to_owned(), v);
            }
        };
        put("k", self.k.map(|v| json!(v)));
        put("a_n", self.a_n.map(|v| json!(v)));
        put("a_m", self.a_m.map(|v| json!(v)));
        put("rho_db", self.rho_db.map(|v| json!(v)));
        put("rho_e_db", self.rho_e_db.map(|v| json!(v)));
        put("carrier_hz", self.carrier_hz.map(|v| json!(v)));
        put("eta", self.eta.map(|v| json!(v)));
        put("alpha", self.alpha.map(|v| json!(v)));
        put("lambda_e", self.lambda_e.map(|v| json!(v)));
        put("r_d1", self.r_d1.map(|v| json!(v)));
        put("r_d2", self.r_d2.map(|v| json!(v)));
        put("r_eve", self.r_eve.map(|v| json!(v)));
        put("residual_total_db", self.residual_total_db.map(|v| json!(v)));
        put("residual_total_eve_db", self.residual_total_eve_db.map(|v| json!(v)));
        put("r_n", self.r_n.map(|v| json!(v)));
        put("r_m", self.r_m.map(|v| json!(v)));
        put("r_mn", self.r_mn.map(|v| json!(v)));
        put("u", self.u.map(|v| json!(v)));
        put("quad_rel_tol", self.quad_rel_tol.map(|v| json!(v)));
        put("m_users", self.m_users.map(|v| json!(v)));
        put("internal_eve_radius", self.internal_eve_radius.map(|v| json!(v)));
        let sic = match (self.sic.as_deref(), self.varpi) {
            (None, None) => None,
            (Some("psic"), None) => Some(json!({"kind": "perfect"})),
            (Some("psic"), Some(_)) => {
                return Err(Error::InvalidArgument("--varpi only applies to --sic ipsic".into()));
            }
            (Some("ipsic") | None, varpi) => Some(json!({"kind": "imperfect", "varpi": varpi.unwrap_or(1.0)})),
            (Some(other), _) => return Err(Error::InvalidArgument(format!("--sic must be psic or ipsic, not '{other}'"))),
        };
        put("sic", sic);
        Ok(m)
    }

    /// Defaults, then the config file, then flags.
    fn resolve(&self) -> Result<SystemConfig, Error> {
        let mut cfg = SystemConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(file)) => cfg = apply_overrides(&cfg, &file)?,
                Ok(_) => return Err(Error::InvalidArgument(format!("{}: expected a JSON object", path.display()))),
                Err(e) => return Err(Error::InvalidArgument(format!("{}: {e}", path.display()))),
            }
        }
        apply_overrides(&cfg, &self.overrides()?)
    }

    fn validated(&self) -> Result<Validated, Error> {
        Ok(self.resolve()?.validate()?)
    }
}

fn parse_scenario(s: &str) -> Result<Scenario, Error> {
    Scenario::from_label(s.trim()).ok_or_else(|| {
        let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.label()).collect();
        Error::InvalidArgument(format!("unknown scenario '{s}'; expected one of {}", names.join(", ")))
    })
}

fn parse_scenarios(s: &str) -> Result<Vec<Scenario>, Error> {
    if s.trim() == "all" {
        return Ok(Scenario::ALL.to_vec());
    }
    s.split(',').map(parse_scenario).collect()
}

fn parse_methods(s: &str) -> Result<Vec<Method>, Error> {
    s.split(',')
        .map(|m| {
            Method::from_tag(m.trim())
                .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{m}'; use exact, asymptotic or mc")))
        })
        .collect()
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Process exit status for a failed command.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Sop { scenario, method, mc, cfg } => {
            let cfg = cfg.validated()?;
            let scenario = parse_scenario(&scenario)?;
            let method = parse_methods(&method)?;
            let [method] = method.as_slice() else {
                return Err(Error::InvalidArgument("sop takes exactly one method".into()));
            };
            let out = match method {
                Method::MonteCarlo => {
                    let est = estimate_sop_mc_with(&cfg, scenario, mc.options()?)?;
                    json!({"scenario": scenario, "method": method.tag(), "rho_db": cfg.config().rho_db,
                           "value": est.value, "ci_half_width": est.ci_half_width,
                           "iterations": est.iterations, "seed": est.seed})
                }
                Method::Exact | Method::Asymptotic => {
                    let engine = SopEngine::new(&cfg)?;
                    let est = if *method == Method::Exact { engine.exact(scenario)? } else { engine.asymptotic(scenario)? };
                    json!({"scenario": scenario, "method": method.tag(), "rho_db": cfg.config().rho_db,
                           "value": est.value, "raw": est.raw_value()})
                }
            };
            println!("{out}");
            Ok(0)
        }
        Cmd::Sweep { scenarios, rho, methods, out, mc, cfg } => {
            let cfg = cfg.validated()?;
            let spec = SweepSpec {
                scenarios: parse_scenarios(&scenarios)?,
                rho_db: parse_rho_range(&rho)?,
                methods: parse_methods(&methods)?,
                mc: mc.options()?,
            };
            match out {
                Some(path) => {
                    let res = run_sweep_to_file(&cfg, &spec, &path)?;
                    eprintln!("wrote {} rows to {}", res.rows.len(), path.display());
                }
                None => {
                    let res = noma_secrecy::experiment::run_sweep(&cfg, &spec).map_err(|f| f.error)?;
                    print!("{}", res.to_csv_string()?);
                }
            }
            Ok(0)
        }
        Cmd::Figure { name, out_dir, methods, rho, mc, cfg } => {
            let recipe = figure_recipe(&name)?;
            let base = cfg.resolve()?;
            let methods = match methods {
                Some(m) => parse_methods(&m)?,
                None => recipe.methods.clone(),
            };
            let rho_db = match rho {
                Some(r) => parse_rho_range(&r)?,
                None => recipe.rho_db.clone(),
            };
            let spec = SweepSpec { scenarios: recipe.scenarios.clone(), rho_db, methods, mc: mc.options()? };
            fs::create_dir_all(&out_dir)?;
            let mut files = Vec::new();
            for ((label, variant_cfg), variant) in recipe.configs(&base)?.into_iter().zip(&recipe.variants) {
                let file = format!("{}_{label}.csv", recipe.name);
                let res = run_sweep_to_file(&variant_cfg, &spec, &out_dir.join(&file))?;
                eprintln!("{file}: {} rows", res.rows.len());
                files.push(json!({"file": file, "variant": label, "overrides": variant.overrides}));
            }
            let manifest = json!({"figure": recipe.name, "title": recipe.title, "common": recipe.common,
                                  "base": base, "files": files});
            write_file(&out_dir.join(format!("{}_manifest.json", recipe.name)), &serde_json::to_string_pretty(&manifest).expect("json"))?;
            Ok(0)
        }
        Cmd::Validate { json, mc, cfg } => {
            let cfg = cfg.validated()?;
            let opts = mc.options()?;
            let report = validate_report(&cfg, opts.iterations, opts.seed);
            print!("{}", report.summary());
            if let Some(path) = json {
                write_file(&path, &report.to_json())?;
            }
            Ok(if report.passed() { 0 } else { 3 })
        }
        Cmd::Diversity { scenario, rho, cfg } => {
            let cfg = cfg.validated()?;
            let fit = diversity_order(&cfg, parse_scenario(&scenario)?, &parse_rho_range(&rho)?)?;
            println!("{}", serde_json::to_string_pretty(&fit).expect("json"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors count as configuration errors; help is success.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
