//! Study configuration: a flat `key = value` text file.
//!
//! ```text
//! # comments and blank lines are ignored
//! model      = uniform(a=0,b=1)   # model specification
//! r          = 2                  # distance order, r ≥ 1
//! n_grid     = 2^6..2^14          # or a list: 64,128,256
//! reps       = 1000               # replications per n, ≥ 100
//! seed       = 1                  # master seed
//! alpha      = 0.5                # normalisation exponent in (0,1); optional
//! grid_size  = 4097               # bridge grid points for continuous limits
//! limit_reps = 10000              # limit-law draws
//! out        = report.json        # output path; optional (stdout)
//! format     = json               # json | csv
//! threads    = 0                  # worker threads, 0 = all cores
//! ```
//!
//! `alpha` defaults to `1/2` for continuous models and `1/(2r)` for discrete
//! ones. `out`, `format` and `threads` do not enter the configuration hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bridge::DEFAULT_GRID_SIZE;
use crate::dist::{parse_model, Law};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(LabError::parse(format!("unknown format '{other}' (json or csv)"))),
        }
    }
}

/// Every key accepted in a configuration file, in canonical order.
pub const CONFIG_KEYS: [&str; 11] =
    ["model", "r", "n_grid", "reps", "seed", "alpha", "grid_size", "limit_reps", "out", "format", "threads"];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub model: String,
    pub r: f64,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub alpha: Option<f64>,
    pub grid_size: usize,
    pub limit_reps: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            model: "uniform(a=0,b=1)".into(),
            r: 2.0,
            n_grid: (6..=14).map(|k| 1usize << k).collect(),
            reps: 1000,
            seed: 1,
            alpha: None,
            grid_size: DEFAULT_GRID_SIZE,
            limit_reps: 10_000,
            out: None,
            format: Format::Json,
            threads: 0,
        }
    }
}

fn parse_int(key: &str, v: &str) -> Result<u64> {
    let v = v.trim();
    if let Some((base, exp)) = v.split_once('^') {
        let base: u64 = base.trim().parse().map_err(|_| bad(key, v))?;
        let exp: u32 = exp.trim().parse().map_err(|_| bad(key, v))?;
        return base.checked_pow(exp).ok_or_else(|| bad(key, v));
    }
    v.parse().map_err(|_| bad(key, v))
}

fn parse_float(key: &str, v: &str) -> Result<f64> {
    v.trim().parse().map_err(|_| bad(key, v))
}

fn bad(key: &str, v: &str) -> LabError {
    LabError::parse(format!("invalid value for '{key}': {v:?}"))
}

/// `"64,128,256"`, `"2^6..2^14"` (powers of the base) or `"100..400"`
/// (doubling from the first bound).
pub fn parse_n_grid(v: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = v.split_once("..") {
        let (a, b) = (parse_int("n_grid", lo)?, parse_int("n_grid", hi)?);
        let base = match lo.split_once('^') {
            Some((base, _)) => parse_int("n_grid", base)?,
            None => 2,
        };
        if a == 0 || base < 2 || a > b {
            return Err(bad("n_grid", v));
        }
        let mut out = Vec::new();
        let mut n = a;
        while n <= b {
            out.push(n as usize);
            n = n.checked_mul(base).ok_or_else(|| bad("n_grid", v))?;
        }
        return Ok(out);
    }
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_int("n_grid", s).map(|n| n as usize)).collect()
}

impl StudyConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "model" => self.model = value.to_string(),
            "r" => self.r = parse_float(key, value)?,
            "n_grid" => self.n_grid = parse_n_grid(value)?,
            "reps" => self.reps = parse_int(key, value)? as usize,
            "seed" => self.seed = parse_int(key, value)?,
            "alpha" => {
                self.alpha = if value.is_empty() || value == "auto" { None } else { Some(parse_float(key, value)?) }
            }
            "grid_size" => self.grid_size = parse_int(key, value)? as usize,
            "limit_reps" => self.limit_reps = parse_int(key, value)? as usize,
            "out" => self.out = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            "format" => self.format = value.parse()?,
            "threads" => self.threads = parse_int(key, value)? as usize,
            other => return Err(LabError::parse(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Parse configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = StudyConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::parse(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k, v).map_err(|e| LabError::parse(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
        StudyConfig::parse(&text)
    }

    pub fn law(&self) -> Result<Law> {
        parse_model(&self.model)
    }

    pub fn validate(&self) -> Result<()> {
        self.law()?;
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return Err(LabError::parse(format!("r must be a finite number ≥ 1, got {}", self.r)));
        }
        if self.n_grid.len() < 3 {
            return Err(LabError::parse("n_grid needs at least 3 sizes for slope fitting"));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::parse("n_grid must be strictly increasing positive sizes"));
        }
        if self.reps < 100 {
            return Err(LabError::parse(format!("reps must be at least 100, got {}", self.reps)));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(LabError::parse(format!("alpha must lie in (0,1), got {a}")));
            }
        }
        if self.grid_size < 4 {
            return Err(LabError::parse("grid_size must be at least 4"));
        }
        if self.limit_reps < 2 {
            return Err(LabError::parse("limit_reps must be at least 2"));
        }
        Ok(())
    }

    /// Normalisation exponent, defaulting by the kind of model.
    pub fn effective_alpha(&self, law: &Law) -> f64 {
        self.alpha.unwrap_or(match law {
            Law::Continuous(_) => 0.5,
            _ => 1.0 / (2.0 * self.r),
        })
    }

    /// Canonical text of the keys that determine the numbers in a report.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let grid: Vec<String> = self.n_grid.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "model={}", self.model.split_whitespace().collect::<String>());
        let _ = writeln!(s, "r={:e}", self.r);
        let _ = writeln!(s, "n_grid={}", grid.join(","));
        let _ = writeln!(s, "reps={}", self.reps);
        let _ = writeln!(s, "seed={}", self.seed);
        match self.alpha {
            Some(a) => {
                let _ = writeln!(s, "alpha={a:e}");
            }
            None => s.push_str("alpha=auto\n"),
        }
        let _ = writeln!(s, "grid_size={}", self.grid_size);
        let _ = writeln!(s, "limit_reps={}", self.limit_reps);
        s
    }

    /// SHA-256 of [`canonical`](Self::canonical), lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_n_grid("64,128, 256").unwrap(), vec![64, 128, 256]);
        assert_eq!(parse_n_grid("2^6..2^9").unwrap(), vec![64, 128, 256, 512]);
        assert_eq!(parse_n_grid("100..400").unwrap(), vec![100, 200, 400]);
        assert!(parse_n_grid("2^9..2^6").is_err());
        assert!(parse_n_grid("a,b").is_err());
    }

    #[test]
    fn parses_full_file() {
        let cfg = StudyConfig::parse(
            "# study\nmodel = bernoulli(p=0.5)\nr = 4\nn_grid = 2^6..2^10\nreps = 200\nseed = 9 # master\n\
             alpha = 0.125\ngrid_size = 1025\nlimit_reps = 500\nout = x.csv\nformat = csv\nthreads = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.r, 4.0);
        assert_eq!(cfg.n_grid.len(), 5);
        assert_eq!(cfg.alpha, Some(0.125));
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.threads, 3);
        assert_eq!(cfg.out.as_deref(), Some(Path::new("x.csv")));
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            "model = nothing()",
            "r = 0.5",
            "n_grid = 64,128",
            "n_grid = 64,64,128",
            "reps = 10",
            "alpha = 1.5",
            "colour = red",
            "just text",
            "format = xml",
        ] {
            assert!(matches!(StudyConfig::parse(bad), Err(LabError::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn hash_ignores_output_settings() {
        let a = StudyConfig::default();
        let mut b = a.clone();
        b.threads = 8;
        b.format = Format::Csv;
        b.out = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn default_alpha_by_kind() {
        let cfg = StudyConfig { r: 4.0, ..StudyConfig::default() };
        assert_eq!(cfg.effective_alpha(&parse_model("bernoulli()").unwrap()), 0.125);
        assert_eq!(cfg.effective_alpha(&parse_model("normal()").unwrap()), 0.5);
    }
}
