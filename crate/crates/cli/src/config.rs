//! Run configuration: paper-default parameters, flat `key = value` config
//! files, CLI flag overrides, and the provenance block echoed into every
//! output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use spdc3_core::dynamics::{
    Method, DEFAULT_LEAK_THRESHOLD, DEFAULT_MAX_DT, DEFAULT_NORM_TOLERANCE,
};
use spdc3_core::fock::SpaceConfig;

use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub cutoffs: [usize; 3],
    pub mode_freqs: [f64; 3],
    pub qubit_freqs: [f64; 3],
    pub rabi_couplings: [f64; 3],
    pub g0: f64,
    pub drive_freq: Option<f64>,
    pub t_final: f64,
    pub dt: f64,
    pub sample_spacing: f64,
    pub method: Method,
    pub norm_tolerance: f64,
    pub leak_threshold: f64,
    pub grid_g0: Vec<f64>,
    pub grid_t: Vec<f64>,
    pub jobs: usize,
    pub seed: u64,
    pub samples: usize,
    pub strict: bool,
    pub use_literal_p: bool,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cutoffs: [7; 3],
            mode_freqs: [1.0, 2.0, 1.0],
            qubit_freqs: [1.0, 2.0, 1.0],
            rabi_couplings: [0.01; 3],
            g0: 0.1,
            drive_freq: None,
            t_final: 25.0,
            dt: DEFAULT_MAX_DT,
            sample_spacing: 0.25,
            method: Method::Rk4,
            norm_tolerance: DEFAULT_NORM_TOLERANCE,
            leak_threshold: DEFAULT_LEAK_THRESHOLD,
            grid_g0: default_grid_g0(),
            grid_t: default_grid_t(),
            jobs: 0,
            seed: 1,
            samples: 100_000,
            strict: false,
            use_literal_p: false,
            out_dir: PathBuf::from("."),
        }
    }
}

/// g0 ∈ {0.02, 0.04, …, 0.40}, 20 points.
pub fn default_grid_g0() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.02).collect()
}

/// t ∈ {0.25, 0.50, …, 25}, 100 samples.
pub fn default_grid_t() -> Vec<f64> {
    (1..=100).map(|k| k as f64 * 0.25).collect()
}

impl RunConfig {
    pub fn space_config(&self) -> SpaceConfig {
        SpaceConfig {
            cutoffs: self.cutoffs,
            mode_freqs: self.mode_freqs,
            qubit_freqs: self.qubit_freqs,
            rabi_couplings: self.rabi_couplings,
            pump_coupling: self.g0,
            drive_override: self.drive_freq,
        }
    }

    /// Load `key = value` lines over the current values.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            message: format!("cannot read config file {}: {e}", path.display()),
        })?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
                message: format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                ),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config {
                    message: format!("{}:{}: {}", path.display(), lineno + 1, e.message()),
                })?;
        }
        Ok(())
    }

    /// Apply one `key = value` pair; keys match CLI flag names with `-`
    /// replaced by `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config {
            message: format!("bad value `{value}` for `{key}`: {what}"),
        };
        match key {
            "cutoff" => {
                let n = value
                    .parse::<usize>()
                    .map_err(|_| bad("expected integer"))?;
                self.cutoffs = [n; 3];
            }
            "cutoffs" => {
                self.cutoffs =
                    parse_triple_usize(value).ok_or_else(|| bad("expected three integers"))?
            }
            "mode_freqs" => {
                self.mode_freqs =
                    parse_triple_f64(value).ok_or_else(|| bad("expected three reals"))?
            }
            "qubit_freqs" => {
                self.qubit_freqs =
                    parse_triple_f64(value).ok_or_else(|| bad("expected three reals"))?
            }
            "rabi_couplings" => {
                self.rabi_couplings =
                    parse_triple_f64(value).ok_or_else(|| bad("expected three reals"))?
            }
            "g0" => self.g0 = value.parse().map_err(|_| bad("expected real"))?,
            "drive_freq" => {
                self.drive_freq = Some(value.parse().map_err(|_| bad("expected real"))?)
            }
            "t_final" => self.t_final = value.parse().map_err(|_| bad("expected real"))?,
            "dt" => self.dt = value.parse().map_err(|_| bad("expected real"))?,
            "sample_spacing" => {
                self.sample_spacing = value.parse().map_err(|_| bad("expected real"))?
            }
            "method" => {
                self.method = match value {
                    "a" | "rk4" => Method::Rk4,
                    "b" | "expmid" => Method::ExpMid,
                    _ => return Err(bad("expected a|b|rk4|expmid")),
                }
            }
            "norm_tolerance" => {
                self.norm_tolerance = value.parse().map_err(|_| bad("expected real"))?
            }
            "leak_threshold" => {
                self.leak_threshold = value.parse().map_err(|_| bad("expected real"))?
            }
            "grid_g0" => {
                self.grid_g0 =
                    parse_list_f64(value).ok_or_else(|| bad("expected comma-separated reals"))?
            }
            "grid_t" => {
                self.grid_t =
                    parse_list_f64(value).ok_or_else(|| bad("expected comma-separated reals"))?
            }
            "jobs" => self.jobs = value.parse().map_err(|_| bad("expected integer"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("expected integer"))?,
            "samples" => self.samples = value.parse().map_err(|_| bad("expected integer"))?,
            "strict" => {
                self.strict = parse_bool(value).ok_or_else(|| bad("expected true|false"))?
            }
            "use_literal_p" => {
                self.use_literal_p = parse_bool(value).ok_or_else(|| bad("expected true|false"))?
            }
            "out" => self.out_dir = PathBuf::from(value),
            _ => {
                return Err(CliError::Config {
                    message: format!("unknown config key `{key}`"),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.space_config()
            .validate()
            .map_err(|e| CliError::Config {
                message: format!("invalid physical configuration: {e}"),
            })?;
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(CliError::Config {
                message: "dt must be positive".into(),
            });
        }
        if !self.t_final.is_finite() || self.t_final <= 0.0 {
            return Err(CliError::Config {
                message: "t_final must be positive".into(),
            });
        }
        if !self.sample_spacing.is_finite() || self.sample_spacing <= 0.0 {
            return Err(CliError::Config {
                message: "sample_spacing must be positive".into(),
            });
        }
        check_sorted(&self.grid_g0).map_err(|m| CliError::Config {
            message: format!("grid_g0 {m}"),
        })?;
        check_sorted(&self.grid_t).map_err(|m| CliError::Config {
            message: format!("grid_t {m}"),
        })?;
        if self.grid_t.first().copied().unwrap_or(1.0) < 0.0 {
            return Err(CliError::Config {
                message: "grid_t entries must be ≥ 0".into(),
            });
        }
        Ok(())
    }

    /// Canonical provenance body: every effective value, one per line.
    pub fn provenance_body(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "method = {}", self.method.name());
        let _ = writeln!(s, "dt = {}", self.dt);
        let _ = writeln!(s, "cutoffs = {}", join_usize(&self.cutoffs));
        let _ = writeln!(s, "mode_freqs = {}", join_f64(&self.mode_freqs));
        let _ = writeln!(s, "qubit_freqs = {}", join_f64(&self.qubit_freqs));
        let _ = writeln!(s, "rabi_couplings = {}", join_f64(&self.rabi_couplings));
        let _ = writeln!(s, "g0 = {}", self.g0);
        let _ = writeln!(s, "drive_freq = {}", self.space_config().drive_freq());
        let _ = writeln!(s, "t_final = {}", self.t_final);
        let _ = writeln!(s, "sample_spacing = {}", self.sample_spacing);
        let _ = writeln!(s, "norm_tolerance = {}", self.norm_tolerance);
        let _ = writeln!(s, "leak_threshold = {}", self.leak_threshold);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "use_literal_p = {}", self.use_literal_p);
        s
    }

    /// FNV-1a hash of the provenance body plus the grid, as a hex tag for
    /// output file names.
    pub fn grid_hash(&self) -> String {
        let mut text = self.provenance_body();
        let _ = writeln!(text, "grid_g0 = {}", join_f64(&self.grid_g0));
        let _ = writeln!(text, "grid_t = {}", join_f64(&self.grid_t));
        format!("{:016x}", fnv1a64(text.as_bytes()))
    }

    /// Provenance block as CSV comment lines.
    pub fn provenance_comment(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# spdc3 provenance");
        let _ = writeln!(out, "# config_hash = {}", self.grid_hash());
        for line in self.provenance_body().lines() {
            let _ = writeln!(out, "# {line}");
        }
        out
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn check_sorted(values: &[f64]) -> Result<(), String> {
    if values.is_empty() {
        return Err("must not be empty".into());
    }
    for w in values.windows(2) {
        if w[1].partial_cmp(&w[0]) != Some(core::cmp::Ordering::Greater) {
            return Err(format!(
                "must be strictly increasing, got {} then {}",
                w[0], w[1]
            ));
        }
    }
    Ok(())
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn parse_list_f64(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|p| p.trim().parse::<f64>().ok()).collect()
}

fn parse_triple_f64(s: &str) -> Option<[f64; 3]> {
    let v = parse_list_f64(s)?;
    (v.len() == 3).then(|| [v[0], v[1], v[2]])
}

fn parse_triple_usize(s: &str) -> Option<[usize; 3]> {
    let v: Option<Vec<usize>> = s.split(',').map(|p| p.trim().parse().ok()).collect();
    let v = v?;
    (v.len() == 3).then(|| [v[0], v[1], v[2]])
}

pub fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn join_usize(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
