//! Run configuration: built-in defaults, then an optional flat `key = value`
//! file, then command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use hecke_moments::lattice::PolynomialKind;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

impl fmt::Display for OutFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        })
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Flat `key = value` configuration file; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Eigenform weight (12, 16, 18, 20, 22 or 26)
    #[arg(long, global = true)]
    pub weight: Option<u32>,

    /// Coefficient/table limit, also the largest X for moments
    #[arg(long, global = true)]
    pub limit: Option<u64>,

    /// Prime cutoff for Euler products at s = 2
    #[arg(long, global = true)]
    pub prime_bound: Option<u64>,

    /// Prime cutoff for L(1, sym² f) (default: max of limit and prime bound)
    #[arg(long, global = true)]
    pub edge_bound: Option<u64>,

    #[arg(long, value_enum, global = true)]
    pub out: Option<OutFormat>,

    #[arg(long, global = true, env = "HECKE_MOMENTS_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,

    /// Worker threads, 0 for one per core
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Directory for output files
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub weight: u32,
    pub coefficient_limit: u64,
    pub prime_bound: u64,
    pub edge_prime_bound: Option<u64>,
    pub checkpoint_start: u32,
    pub checkpoints_per_decade: u32,
    pub out: OutFormat,
    pub cache_dir: Option<PathBuf>,
    pub threads: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            weight: 12,
            coefficient_limit: 100_000,
            prime_bound: 10_000,
            edge_prime_bound: None,
            checkpoint_start: 3,
            checkpoints_per_decade: 8,
            out: OutFormat::Csv,
            cache_dir: None,
            threads: 0,
            output_dir: PathBuf::from("."),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config line {line}: bad value {value:?} for {key}")))
}

impl RunConfig {
    /// Applies `key = value` lines. Blank lines and `#` comments are skipped;
    /// unknown keys are errors.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::Usage(format!("config line {line}: expected key = value")))?;
            match key {
                "weight" => self.weight = parse_value(key, value, line)?,
                "limit" => self.coefficient_limit = parse_value(key, value, line)?,
                "prime_bound" => self.prime_bound = parse_value(key, value, line)?,
                "edge_bound" => self.edge_prime_bound = Some(parse_value(key, value, line)?),
                "checkpoint_start" => self.checkpoint_start = parse_value(key, value, line)?,
                "checkpoints_per_decade" => {
                    self.checkpoints_per_decade = parse_value(key, value, line)?
                }
                "out" => {
                    self.out = OutFormat::from_str(value, true).map_err(|_| {
                        CliError::Usage(format!("config line {line}: out must be csv or json"))
                    })?
                }
                "cache_dir" => self.cache_dir = Some(PathBuf::from(value)),
                "threads" => self.threads = parse_value(key, value, line)?,
                "output_dir" => self.output_dir = PathBuf::from(value),
                other => {
                    return Err(CliError::Usage(format!(
                        "config line {line}: unknown key {other:?}"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn resolve(args: &GlobalArgs) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = args.weight {
            cfg.weight = v;
        }
        if let Some(v) = args.limit {
            cfg.coefficient_limit = v;
        }
        if let Some(v) = args.prime_bound {
            cfg.prime_bound = v;
        }
        if let Some(v) = args.edge_bound {
            cfg.edge_prime_bound = Some(v);
        }
        if let Some(v) = args.out {
            cfg.out = v;
        }
        if let Some(v) = &args.cache_dir {
            cfg.cache_dir = Some(v.clone());
        }
        if let Some(v) = args.threads {
            cfg.threads = v;
        }
        if let Some(v) = &args.output_dir {
            cfg.output_dir = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        hecke_moments::eigenform::check_weight(self.weight)?;
        if self.coefficient_limit == 0 {
            return Err(CliError::Usage("limit must be at least 1".into()));
        }
        if self.checkpoints_per_decade == 0 {
            return Err(CliError::Usage("checkpoints_per_decade must be positive".into()));
        }
        Ok(())
    }

    /// Prime bound check for commands that evaluate Euler products.
    pub fn require_prime_bound(&self) -> Result<(), CliError> {
        if self.prime_bound < 100 {
            return Err(CliError::Usage(format!(
                "prime bound {} is below the minimum of 100",
                self.prime_bound
            )));
        }
        Ok(())
    }

    pub fn edge_bound(&self) -> u64 {
        self.edge_prime_bound
            .unwrap_or(self.coefficient_limit.max(self.prime_bound))
    }
}

pub fn parse_poly(s: &str) -> Result<PolynomialKind, String> {
    s.parse().map_err(|e: hecke_moments::Error| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# run\nweight = 16\nlimit=5000 # small\n\nout = json\n")
            .unwrap();
        assert_eq!(cfg.weight, 16);
        assert_eq!(cfg.coefficient_limit, 5000);
        assert_eq!(cfg.out, OutFormat::Json);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "weight = 16\nprime_bound = 500\n").unwrap();
        let args = GlobalArgs {
            config: Some(path),
            weight: Some(18),
            ..GlobalArgs::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.weight, 18);
        assert_eq!(cfg.prime_bound, 500);
    }

    #[test]
    fn rejects_bad_lines() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_text("colour = blue").is_err());
        assert!(cfg.apply_text("weight").is_err());
        assert!(cfg.apply_text("weight = twelve").is_err());
        assert!(cfg.apply_text("out = xml").is_err());
    }

    #[test]
    fn validation() {
        let cfg = RunConfig {
            weight: 14,
            ..RunConfig::default()
        };
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("[12, 16, 18, 20, 22, 26]"));
        let cfg = RunConfig {
            prime_bound: 99,
            ..RunConfig::default()
        };
        assert!(cfg.require_prime_bound().is_err());
        assert_eq!(RunConfig::default().edge_bound(), 100_000);
    }
}
