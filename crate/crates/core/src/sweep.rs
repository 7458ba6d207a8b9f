//! Seeded parameter sweeps: configuration, row generation, and emission.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::constructions::search::{minimize_deviation, SearchConfig};
use crate::constructions::signalling::nosignalling_feasibility;
use crate::error::{Error, Result};
use crate::machine::{FlipScenario, MachineModel};
use crate::report::{evaluate, Tolerances, VerificationReport};
use crate::sampling::{random_scenario, random_triple};
use crate::triple::FlipTriple;

/// Parses an angle in radians: a plain number, or a multiple of `pi` such as
/// `pi`, `-pi/2`, `3pi/4`, `0.5*pi`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || Error::Config(format!("cannot parse angle {text:?}"));
    let Some(idx) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let (head, tail) = (&s[..idx], &s[idx + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let denom = match tail {
        "" => 1.0,
        t => t
            .strip_prefix('/')
            .ok_or_else(bad)?
            .parse::<f64>()
            .map_err(|_| bad())?,
    };
    if denom == 0.0 {
        return Err(bad());
    }
    Ok(coeff * std::f64::consts::PI / denom)
}

/// Radians, written in JSON either as a number or as a `pi` expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Angle(x)),
            Raw::Text(s) => parse_angle(&s).map(Angle).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    pub a: f64,
    #[serde(default)]
    pub b: Option<f64>,
    pub c: f64,
    #[serde(default)]
    pub d: Option<f64>,
    pub theta: Angle,
}

impl TripleSpec {
    pub fn to_triple(&self) -> Result<FlipTriple> {
        let root = |x: f64| (1.0 - x * x).max(0.0).sqrt();
        FlipTriple::new(
            self.a,
            self.b.unwrap_or_else(|| root(self.a)),
            self.c,
            self.d.unwrap_or_else(|| root(self.c)),
            self.theta.0,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum TripleSource {
    Random,
    /// Fixed `a`, `c`; row `i` uses `thetas[i % thetas.len()]`.
    Grid { a: f64, c: f64, thetas: Vec<Angle> },
    /// Row `i` uses `list[i % list.len()]`.
    Explicit { list: Vec<TripleSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MachineSource {
    Random,
    Trivial,
    IdentityGram,
    /// The great-circle witness where one exists, the trivial machine otherwise.
    Witness,
    /// The machine minimizing the signalling deviation for the row's triple.
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub samples: usize,
    pub triples: TripleSource,
    pub machine: MachineSource,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Search budget for `machine: optimize`; its seed is replaced per row.
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        self.tolerances.validate()?;
        self.search.validate().map_err(|e| Error::Config(e.to_string()))?;
        match &self.triples {
            TripleSource::Random => {}
            TripleSource::Grid { a, c, thetas } => {
                if thetas.is_empty() {
                    return Err(Error::Config("grid needs at least one theta".into()));
                }
                for th in thetas {
                    FlipTriple::from_ac(*a, *c, th.0).map_err(|e| Error::Config(e.to_string()))?;
                }
            }
            TripleSource::Explicit { list } => {
                if list.is_empty() {
                    return Err(Error::Config("explicit triple list is empty".into()));
                }
                for spec in list {
                    spec.to_triple().map_err(|e| Error::Config(e.to_string()))?;
                }
            }
        }
        Ok(())
    }
}

/// Per-row generator, independent of scheduling.
pub fn row_rng(seed: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng
}

fn row_triple(cfg: &SweepConfig, row: usize, rng: &mut ChaCha8Rng) -> Result<FlipTriple> {
    match &cfg.triples {
        TripleSource::Random => Ok(random_triple(rng)),
        TripleSource::Grid { a, c, thetas } => FlipTriple::from_ac(*a, *c, thetas[row % thetas.len()].0),
        TripleSource::Explicit { list } => list[row % list.len()].to_triple(),
    }
}

fn row_scenario(cfg: &SweepConfig, row: usize) -> Result<FlipScenario> {
    let mut rng = row_rng(cfg.seed, row);
    if cfg.machine == MachineSource::Random && cfg.triples == TripleSource::Random {
        return Ok(random_scenario(&mut rng));
    }
    let triple = row_triple(cfg, row, &mut rng)?;
    let machine = match cfg.machine {
        MachineSource::Random => MachineModel::random(&mut rng),
        MachineSource::Trivial => MachineModel::trivial(),
        MachineSource::IdentityGram => MachineModel::identity_gram(),
        MachineSource::Witness => nosignalling_feasibility(&triple, cfg.tolerances.feasibility)
            .witness
            .unwrap_or_else(MachineModel::trivial),
        MachineSource::Optimize => {
            let search = SearchConfig {
                seed: rng.random(),
                ..cfg.search
            };
            minimize_deviation(&triple, &search)?.argmin
        }
    };
    FlipScenario::new(triple, machine)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: usize,
    pub report: VerificationReport,
    pub consistent: bool,
    pub failed: Vec<String>,
}

/// Evaluates every row. Rows run on the rayon pool and come back in index order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    (0..cfg.samples)
        .into_par_iter()
        .map(|index| {
            let scenario = row_scenario(cfg, index)?;
            let ev = evaluate(&scenario, &cfg.tolerances)?;
            Ok(SweepRow {
                index,
                consistent: ev.consistent(),
                failed: ev.failed_checks().iter().map(|c| c.name.clone()).collect(),
                report: ev.report,
            })
        })
        .collect()
}

pub fn render_csv(reports: &[VerificationReport]) -> String {
    let mut out = VerificationReport::csv_header();
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn render_json(reports: &[VerificationReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

pub fn render(reports: &[VerificationReport], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => render_csv(reports),
        OutputFormat::Json => render_json(reports),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub version: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub rows: usize,
    pub consistent: bool,
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_expressions() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("0.5*PI").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("two pi").is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok = r#"{"seed":1,"samples":2,"triples":{"source":"random"},"machine":"random"}"#;
        assert!(SweepConfig::from_json(ok).is_ok());
        let extra = r#"{"seed":1,"samples":2,"triples":{"source":"random"},"machine":"random","bogus":0}"#;
        assert!(SweepConfig::from_json(extra).is_err());
        let tol = r#"{"seed":1,"samples":2,"triples":{"source":"random"},"machine":"random","tolerances":{"oops":1}}"#;
        assert!(SweepConfig::from_json(tol).is_err());
        let grid = r#"{"seed":1,"samples":2,"triples":{"source":"grid","a":0.6,"c":0.8,"thetas":[0],"x":1},"machine":"random"}"#;
        assert!(SweepConfig::from_json(grid).is_err());
    }

    #[test]
    fn config_validation() {
        let zero = r#"{"seed":1,"samples":0,"triples":{"source":"random"},"machine":"random"}"#;
        assert!(SweepConfig::from_json(zero).is_err());
        let neg = r#"{"seed":1,"samples":1,"triples":{"source":"random"},"machine":"random","tolerances":{"consistency":-1}}"#;
        assert!(SweepConfig::from_json(neg).is_err());
        let grid = r#"{"seed":1,"samples":1,"triples":{"source":"grid","a":0.6,"c":0.8,"thetas":["pi/2", "pi"]},"machine":"witness"}"#;
        let cfg = SweepConfig::from_json(grid).unwrap();
        assert_eq!(cfg.triples, TripleSource::Grid {
            a: 0.6,
            c: 0.8,
            thetas: vec![Angle(PI / 2.0), Angle(PI)],
        });
    }

    #[test]
    fn rows_are_independent_of_sample_count() {
        let mk = |n: usize| SweepConfig {
            seed: 9,
            samples: n,
            triples: TripleSource::Random,
            machine: MachineSource::Random,
            tolerances: Tolerances::default(),
            search: SearchConfig::default(),
            output: None,
        };
        let short = run_sweep(&mk(3)).unwrap();
        let long = run_sweep(&mk(6)).unwrap();
        for (a, b) in short.iter().zip(&long) {
            assert_eq!(a.report, b.report);
        }
    }
}
