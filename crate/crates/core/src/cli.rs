//! Command-line driver: run configuration, the `weights`, `psi`, `compare` and
//! `selftest` subcommands, and JSON report emission.
//!
//! Exit codes: 0 success, 2 validation, 3 precision, 4 falsification event.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::ahpairing::{ClassSpace, PairingContext, PairingError};
use crate::checks;
use crate::ddrcmp::{self, DdrError, EigenCache};
use crate::ffield::Tower;
use crate::localfield::LocalError;
use crate::psi::{self, char_json, pair_json, PsiError};
use crate::series::SeriesError;
use crate::weights::{CharData, Semisimple, SerreWeight, Setting, WeightError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("precision: {0}")]
    Precision(String),
    #[error("falsification: {0}")]
    Falsification(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Precision(_) => 3,
            CliError::Falsification(_) => 4,
        }
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<PairingError> for CliError {
    fn from(e: PairingError) -> Self {
        match e {
            PairingError::PrecisionLoss { .. }
            | PairingError::SupportTooNegative { .. }
            | PairingError::Local(LocalError::PrecisionTooLow(_))
            | PairingError::Series(SeriesError::PrecisionLoss { .. }) => CliError::Precision(e.to_string()),
            PairingError::SingularGram { .. } => CliError::Falsification(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PsiError> for CliError {
    fn from(e: PsiError) -> Self {
        match e {
            PsiError::Pairing(p) => p.into(),
            PsiError::Weight(w) => w.into(),
            PsiError::Series(SeriesError::PrecisionLoss { .. }) => CliError::Precision(e.to_string()),
            PsiError::NoVerdict(_) => CliError::Falsification(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<DdrError> for CliError {
    fn from(e: DdrError) -> Self {
        match e {
            DdrError::Psi(p) => p.into(),
            DdrError::Pairing(p) => p.into(),
            _ => CliError::Falsification(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "explicit-weights", version, about = "Explicit Serre weight subspaces and their comparison")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, default_value_t = 3)]
    pub p: u32,
    #[arg(long, global = true, default_value_t = 1)]
    pub f: usize,
    #[arg(long, global = true, default_value_t = 1)]
    pub e: usize,
    /// Serre weight as "a0,a1,.../b0,b1,..." (b defaults to 0).
    #[arg(long, global = true)]
    pub weight: Option<String>,
    /// Exponents n_τ of χ1|_I, comma separated.
    #[arg(long, global = true)]
    pub chi1: Option<String>,
    #[arg(long, global = true)]
    pub chi2: Option<String>,
    /// Unramified part of χ1 as a power of the fixed generator of E^x.
    #[arg(long, global = true, default_value_t = 0)]
    pub lambda1: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub lambda2: u64,
    /// Extra v-digits of z(v) beyond the default 2 N0 + 1 (may be negative).
    #[arg(long, global = true, default_value_t = 0, allow_hyphen_values = true)]
    pub prec: i64,
    /// Seed for the sampled checks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Root of Y^{p-1} = 1 in F_p^x lifted to ε_1 (default 1).
    #[arg(long, global = true)]
    pub root: Option<u32>,
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// W^exp(χ1 ⊕ χ2) with valid pairs, maximal profile and dim Ψ.
    Weights,
    /// The eigen-subspace Ψ_σ(χ1, χ2) of L^x ⊗ E.
    Psi,
    /// Comparison with L^DDR for one configuration, or all with --all.
    Compare {
        #[arg(long)]
        all: bool,
    },
    /// Property suites; `quick` runs (3,1), `full` adds (5,1) and (3,2).
    Selftest {
        #[arg(long, default_value = "quick")]
        level: String,
    },
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u32,
    pub f: usize,
    pub e: usize,
    pub weight: Option<SerreWeight>,
    pub chi1: Option<Vec<i64>>,
    pub chi2: Option<Vec<i64>>,
    pub lambda1: u64,
    pub lambda2: u64,
    pub extra_prec: i64,
    pub seed: u64,
    pub root: u32,
    pub jobs: usize,
}

pub fn parse_list(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| CliError::Validation(format!("bad integer {x:?} in {s:?}"))))
        .collect()
}

pub fn parse_weight(s: &str, f: usize) -> Result<SerreWeight, CliError> {
    let (a, b) = match s.split_once('/') {
        Some((a, b)) => (parse_list(a)?, parse_list(b)?),
        None => (parse_list(s)?, vec![0; f]),
    };
    if a.len() != f || b.len() != f {
        return Err(CliError::Validation(format!("weight {s:?} needs {f} entries on each side")));
    }
    Ok(SerreWeight { a, b })
}

impl RunConfig {
    pub fn from_cli(c: &Cli) -> Result<RunConfig, CliError> {
        let list = |s: &Option<String>| s.as_deref().map(parse_list).transpose();
        let cfg = RunConfig {
            p: c.p,
            f: c.f,
            e: c.e,
            weight: c.weight.as_deref().map(|w| parse_weight(w, c.f)).transpose()?,
            chi1: list(&c.chi1)?,
            chi2: list(&c.chi2)?,
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            extra_prec: c.prec,
            seed: c.seed,
            root: c.root.unwrap_or(1),
            jobs: c.jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(s: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| CliError::Validation(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let v = |m: String| Err(CliError::Validation(m));
        if !crate::ffield::is_prime(self.p as u64) || self.p < 3 || self.p > 97 {
            return v(format!("p = {} must be an odd prime below 100", self.p));
        }
        if self.f == 0 || self.f > 4 || self.e == 0 || self.e > 4 {
            return v(format!("(f, e) = ({}, {}) out of range", self.f, self.e));
        }
        if (self.p as u128).pow(self.f as u32) > 1 << 12 {
            return v("p^f too large".into());
        }
        if self.root == 0 || self.root >= self.p {
            return v(format!("root {} not in [1, p - 1]", self.root));
        }
        if self.jobs == 0 {
            return v("jobs must be positive".into());
        }
        if self.extra_prec.abs() > 1000 {
            return v("precision override out of range".into());
        }
        for c in [&self.chi1, &self.chi2].into_iter().flatten() {
            if c.len() != self.f {
                return v(format!("character needs {} exponents", self.f));
            }
        }
        if let Some(w) = &self.weight {
            Setting::new(self.p, self.f, self.e).check_weight(w)?;
        }
        Ok(())
    }

    pub fn setting(&self) -> Setting {
        Setting::new(self.p, self.f, self.e)
    }

    fn require_e1(&self, what: &str) -> Result<(), CliError> {
        if self.e != 1 {
            return Err(CliError::Validation(format!("{what} needs e = 1")));
        }
        Ok(())
    }

    fn chars(&self, t: &Tower) -> Result<(CharData, CharData), CliError> {
        let (Some(n1), Some(n2)) = (&self.chi1, &self.chi2) else {
            return Err(CliError::Validation("--chi1 and --chi2 are required".into()));
        };
        let g = t.e.primitive_element();
        let st = self.setting();
        let c1 = st.normalize_char(n1, t.e.pow(&g, self.lambda1 as u128));
        let c2 = st.normalize_char(n2, t.e.pow(&g, self.lambda2 as u128));
        Ok((c1, c2))
    }

    fn weight(&self) -> Result<&SerreWeight, CliError> {
        self.weight.as_ref().ok_or_else(|| CliError::Validation("--weight is required".into()))
    }

    fn tower(&self) -> Result<Tower, CliError> {
        Tower::new(self.p, self.f, 1).map_err(|e| CliError::Validation(e.to_string()))
    }

    fn space(&self, t: &Tower) -> Result<ClassSpace, CliError> {
        let n0 = t.n0();
        if self.extra_prec < -n0 {
            return Err(CliError::Precision(format!(
                "z(v) needs at least {} digits, {} requested",
                n0 + 1,
                2 * n0 + 1 + self.extra_prec
            )));
        }
        let ctx = PairingContext::with_extra_precision(t, self.root, self.extra_prec, 0)?;
        Ok(ClassSpace::from_context(ctx)?)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

pub fn cmd_weights(cfg: &RunConfig) -> Result<Value, CliError> {
    let t = cfg.tower()?;
    let st = cfg.setting();
    let (c1, c2) = cfg.chars(&t)?;
    let ws = st.wexp_semisimple(&Semisimple::Split(c1.clone(), c2.clone()))?;
    let entries: Vec<Value> = ws
        .iter()
        .map(|w| {
            let pairs = st.valid_pairs(w, &c1, &c2);
            let swapped = st.valid_pairs(w, &c2, &c1);
            let max = match st.max_pairs(w, &c1, &c2) {
                Ok(m) => json!({
                    "profile": m.profile,
                    "representative": pair_json(&m.representative),
                    "maximal": m.maximal.iter().map(pair_json).collect::<Vec<_>>(),
                    "greatest": m.greatest,
                }),
                Err(e) => json!({"error": e.to_string()}),
            };
            let dim = st.dim_psi(&t, w, &c1, &c2).map(|d| json!(d)).unwrap_or(Value::Null);
            json!({
                "sigma": {"a": w.a, "b": w.b},
                "valid_pairs": pairs.iter().map(pair_json).collect::<Vec<_>>(),
                "valid_pairs_swapped": swapped.iter().map(pair_json).collect::<Vec<_>>(),
                "max_pairs": max,
                "dim_psi": dim,
            })
        })
        .collect();
    Ok(json!({
        "config": cfg.to_json(),
        "chi1": char_json(&t, &c1),
        "chi2": char_json(&t, &c2),
        "weights": entries,
    }))
}

pub fn cmd_psi(cfg: &RunConfig) -> Result<Value, CliError> {
    cfg.require_e1("psi")?;
    let t = cfg.tower()?;
    let st = cfg.setting();
    let (c1, c2) = cfg.chars(&t)?;
    let (s, c1, c2) = st.twist_normalize(cfg.weight()?, &c1, &c2);
    if st.valid_pairs(&s, &c1, &c2).is_empty() {
        return Ok(json!({
            "config": cfg.to_json(),
            "sigma": {"a": s.a, "b": s.b},
            "rank": 0,
            "generators": [],
            "note": "no valid pairs; the subspace is zero",
        }));
    }
    let space = cfg.space(&t)?;
    let ps = psi::psi_subspace(&space, &st, &s, &c1, &c2)?;
    let mut v = ps.to_json(&space);
    v["config"] = cfg.to_json();
    Ok(v)
}

fn summary(t: &Tower, r: &ddrcmp::ComparisonReport) -> Value {
    json!({
        "sigma": {"a": r.psi.sigma.a, "b": r.psi.sigma.b},
        "chi1": char_json(t, &r.psi.chi1),
        "chi2": char_json(t, &r.psi.chi2),
        "dims": {"psi": r.dim_psi, "ddr": r.dim_ddr},
        "empirical_mu": r.empirical_mu,
        "j_max": r.j_max,
        "all_ok": r.verdicts.all_ok(),
        "step4_ok": r.verdicts.step4_ok,
        "index_floor_ok": r.verdicts.index_floor_ok,
    })
}

pub fn cmd_compare(cfg: &RunConfig, all: bool) -> Result<(Value, bool), CliError> {
    cfg.require_e1("compare")?;
    let t = cfg.tower()?;
    let st = cfg.setting();
    let space = cfg.space(&t)?;
    let cache = EigenCache::default();
    if !all {
        let (c1, c2) = cfg.chars(&t)?;
        let (s, c1, c2) = st.twist_normalize(cfg.weight()?, &c1, &c2);
        let r = ddrcmp::compare(&space, &st, &s, &c1, &c2, &cache)?;
        let mut v = r.to_json(&space);
        v["run"] = cfg.to_json();
        return Ok((v, r.verdicts.all_ok()));
    }
    let configs = ddrcmp::all_configs(&t, &st);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let reports: Vec<Result<ddrcmp::ComparisonReport, DdrError>> = pool.install(|| {
        configs.par_iter().map(|(s, c1, c2)| ddrcmp::compare(&space, &st, s, c1, c2, &cache)).collect()
    });
    let reports: Vec<_> = reports.into_iter().collect::<Result<_, _>>()?;
    let ok = reports.iter().all(|r| r.verdicts.all_ok());
    let v = json!({
        "run": cfg.to_json(),
        "configurations": reports.len(),
        "all_ok": ok,
        "step4_failures": reports.iter().filter(|r| !r.verdicts.step4_ok).count(),
        "index_floor_failures": reports.iter().filter(|r| !r.verdicts.index_floor_ok).count(),
        "reports": reports.iter().map(|r| summary(&t, r)).collect::<Vec<_>>(),
        "provenance": space.ctx.provenance(),
    });
    Ok((v, ok))
}

pub fn cmd_selftest(cfg: &RunConfig, level: &str) -> Result<(Value, bool), CliError> {
    let cases: &[(u32, usize)] = match level {
        "quick" => &[(3, 1)],
        "full" => &[(3, 1), (5, 1), (3, 2)],
        _ => return Err(CliError::Validation(format!("unknown level {level:?}"))),
    };
    let n = if level == "quick" { 20 } else { 50 };
    let mut suites = Vec::new();
    let mut passed = true;
    for &(p, f) in cases {
        let t = Tower::new(p, f, 1).map_err(|e| CliError::Validation(e.to_string()))?;
        let space = ClassSpace::new(&t, cfg.root.min(p - 1))?;
        let st = Setting::new(p, f, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut outcomes = vec![
            checks::pairing_laws(&space.ctx, &mut rng, n)?,
            checks::coboundary_law(&space, &mut rng, n)?,
            checks::ah_laws(&space.ctx, &mut rng, n)?,
        ];
        let (tri, verdicts) = checks::trichotomy(&space, &st, &mut rng, n)?;
        outcomes.push(tri);
        passed &= outcomes.iter().all(|o| o.passed());
        suites.push(json!({"p": p, "f": f, "outcomes": outcomes, "trichotomy_verdicts": verdicts}));
    }
    Ok((json!({"level": level, "seed": cfg.seed, "suites": suites, "passed": passed}), passed))
}

/// Runs the parsed command; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let result = (|| -> Result<(Value, bool), CliError> {
        let cfg = RunConfig::from_cli(&cli)?;
        match &cli.command {
            Command::Weights => Ok((cmd_weights(&cfg)?, true)),
            Command::Psi => Ok((cmd_psi(&cfg)?, true)),
            Command::Compare { all } => cmd_compare(&cfg, *all),
            Command::Selftest { level } => cmd_selftest(&cfg, level),
        }
    })();
    let (value, code) = match result {
        Ok((v, ok)) => (v, if ok { 0 } else { 4 }),
        Err(e) => (json!({"error": e.to_string(), "exit_code": e.exit_code()}), e.exit_code()),
    };
    let text = serde_json::to_string_pretty(&value).expect("report serializes") + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        let mut v = vec!["explicit-weights"];
        v.extend_from_slice(args);
        Cli::try_parse_from(v).unwrap()
    }

    fn cfg(args: &[&str]) -> Result<RunConfig, CliError> {
        RunConfig::from_cli(&cli(args))
    }

    #[test]
    fn weights_for_omega_plus_one() {
        let c = cfg(&["weights", "--chi1", "1", "--chi2", "0"]).unwrap();
        let v = cmd_weights(&c).unwrap();
        let ws = v["weights"].as_array().unwrap();
        assert!(ws.iter().any(|w| w["sigma"]["a"] == json!([0]) && w["sigma"]["b"] == json!([0])));
    }

    #[test]
    fn weights_allow_e2() {
        let c = cfg(&["weights", "--e", "2", "--chi1", "1", "--chi2", "0"]).unwrap();
        assert!(cmd_weights(&c).is_ok());
    }

    #[test]
    fn validation_errors() {
        assert_eq!(cfg(&["weights", "--weight", "5"]).unwrap_err().exit_code(), 2);
        assert_eq!(cfg(&["weights", "--weight", "x,1"]).unwrap_err().exit_code(), 2);
        assert_eq!(cfg(&["weights", "--p", "4"]).unwrap_err().exit_code(), 2);
        let c = cfg(&["compare", "--e", "2", "--weight", "0", "--chi1", "1", "--chi2", "0"]).unwrap();
        assert_eq!(cmd_compare(&c, false).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn psi_reports() {
        let c = cfg(&["psi", "--weight", "0", "--chi1", "1", "--chi2", "0"]).unwrap();
        assert_eq!(cmd_psi(&c).unwrap()["rank"], 1);
        let c = cfg(&["psi", "--weight", "2", "--chi1", "1", "--chi2", "0"]).unwrap();
        let v = cmd_psi(&c).unwrap();
        assert_eq!(v["degenerate"], true);
        assert_eq!(v["rank"], 2);
        let c = cfg(&["psi", "--weight", "1", "--chi1", "1", "--chi2", "0"]).unwrap();
        assert_eq!(cmd_psi(&c).unwrap()["rank"], 0);
    }

    #[test]
    fn compare_and_precision() {
        let c = cfg(&["compare", "--weight", "0", "--chi1", "1", "--chi2", "0"]).unwrap();
        let (v, ok) = cmd_compare(&c, false).unwrap();
        assert!(ok);
        assert_eq!(v["verdicts"]["span_equal"], true);
        let c = cfg(&["compare", "--weight", "0", "--chi1", "1", "--chi2", "0", "--prec", "-5"]).unwrap();
        assert_eq!(cmd_compare(&c, false).unwrap_err().exit_code(), 3);
        let c = cfg(&["psi", "--weight", "2", "--chi1", "1", "--chi2", "0", "--prec", "-3"]).unwrap();
        assert_eq!(cmd_psi(&c).unwrap_err().exit_code(), 3);
        let c = cfg(&["compare", "--weight", "0", "--chi1", "1", "--chi2", "0", "--prec", "5"]).unwrap();
        let (w, _) = cmd_compare(&c, false).unwrap();
        assert_eq!(w["matrix"], v["matrix"]);
    }

    #[test]
    fn deterministic_output() {
        let c = cfg(&["compare", "--all", "--seed", "3"]).unwrap();
        let a = serde_json::to_string(&cmd_compare(&c, true).unwrap().0).unwrap();
        let b = serde_json::to_string(&cmd_compare(&c, true).unwrap().0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn selftest_quick() {
        let c = cfg(&["selftest"]).unwrap();
        let (v, ok) = cmd_selftest(&c, "quick").unwrap();
        assert!(ok, "{v}");
    }

    #[test]
    fn config_json_round_trip() {
        let c = cfg(&["psi", "--weight", "1,0/0,0", "--f", "2", "--chi1", "1,2", "--chi2", "0,0"]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&s).unwrap(), c);
        assert!(RunConfig::from_json("{\"p\": 3}").is_err());
    }
}
