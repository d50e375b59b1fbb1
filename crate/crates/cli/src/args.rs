//! Flag parsing and the flags > config file > defaults merge.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "curvedcheck",
    version,
    about = "Curvature laboratory for pseudo-Riemannian metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Verb {
    /// List the built-in manifolds.
    List,
    /// Curvature tensors at each point.
    Curvature,
    /// Pointwise classification (constant, quasi-constant, conformally flat, recurrent).
    Classify,
    /// Sample tangent planes and report their degeneracy and curvature.
    Planes,
    /// Check the conformal change law for g and e^(2σ) g.
    Conformal,
    /// Ratio of sectional curvatures along planes approaching a degenerate plane.
    Limit,
    /// Run a lemma property suite.
    Lemma {
        #[arg(value_enum, ignore_case = true)]
        which: LemmaId,
    },
    /// Run a theorem property suite on the pair (g, e^(2σ) g).
    Theorem {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
    },
}

impl Verb {
    pub fn name(&self) -> String {
        match self {
            Verb::List => "list".into(),
            Verb::Curvature => "curvature".into(),
            Verb::Classify => "classify".into(),
            Verb::Planes => "planes".into(),
            Verb::Conformal => "conformal".into(),
            Verb::Limit => "limit".into(),
            Verb::Lemma { which } => format!("lemma {which:?}"),
            Verb::Theorem { which } => format!("theorem {which}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LemmaId {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Registry manifold name (see `list`).
    #[arg(long, global = true)]
    pub manifold: Option<String>,
    /// Inline metric, e.g. "dim=2; g[0][0]=1; g[1][1]=sin(x0)^2;".
    #[arg(long, global = true)]
    pub inline: Option<String>,
    /// Coordinate box "lo,hi" for every axis of an inline metric.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub domain: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Number of negative directions.
    #[arg(long, global = true)]
    pub s: Option<usize>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Hypersurface profile f(t).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub f: Option<String>,
    /// pp-wave profile h(u).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub h: Option<String>,
    /// Conformal exponent σ over x0.., ḡ = e^(2σ) g.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// Evaluation point as a comma list; repeat for several points.
    #[arg(long = "at", global = true, allow_hyphen_values = true)]
    pub at: Vec<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Sampling seed; defaults to $CURVEDCHECK_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Text file of key=value lines supplying defaults for the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Use finite-difference derivatives instead of symbolic ones.
    #[arg(long, global = true)]
    pub fd: bool,
    /// Sample count (points when no --at is given, planes per check).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Override every verdict tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Plane kind for `planes` and `limit`.
    #[arg(long, global = true, value_enum)]
    pub kind: Option<Kind>,
}

/// Fully resolved options.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Resolved {
    pub manifold: Option<String>,
    pub inline: Option<String>,
    pub domain: Option<(f64, f64)>,
    pub c: Option<f64>,
    pub s: Option<usize>,
    pub n: Option<usize>,
    pub f: Option<String>,
    pub h: Option<String>,
    pub sigma: Option<String>,
    pub at: Vec<String>,
    pub format: Format,
    pub seed: u64,
    pub fd: bool,
    pub samples: usize,
    pub tol: Option<f64>,
    pub kind: Kind,
}

pub const DEFAULT_SAMPLES: usize = 3;
pub const DEFAULT_PLANE_SAMPLES: usize = 50;

fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", no + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn typed<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("config key '{key}': cannot parse '{v}'"))
}

fn parse_domain(text: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || format!("--domain expects 'lo,hi', got '{text}'");
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    if lo >= hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

impl Opts {
    /// Merges flags over the config file over built-in defaults.
    ///
    /// `CURVEDCHECK_SEED` counts as a default: it applies when neither the flag
    /// nor the config file sets a seed.
    pub fn resolve(self) -> Result<Resolved, String> {
        let cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        const KEYS: [&str; 15] = [
            "manifold", "inline", "domain", "c", "s", "n", "f", "h", "sigma", "format", "seed", "fd", "samples", "tol",
            "kind",
        ];
        if let Some(k) = cfg.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(format!("unknown config key '{k}'"));
        }
        let text = |flag: Option<String>, key: &str| flag.or_else(|| cfg.get(key).cloned());
        let num = |key: &str| -> Result<Option<f64>, String> { cfg.get(key).map(|v| typed(key, v)).transpose() };
        let int = |key: &str| -> Result<Option<usize>, String> { cfg.get(key).map(|v| typed(key, v)).transpose() };
        let value_enum = |key: &str| -> Result<Option<String>, String> { Ok(cfg.get(key).cloned()) };

        let format = match self.format {
            Some(f) => f,
            None => match value_enum("format")? {
                Some(v) => Format::from_str(&v, true).map_err(|_| format!("config key 'format': '{v}'"))?,
                None => Format::Text,
            },
        };
        let kind = match self.kind {
            Some(k) => k,
            None => match value_enum("kind")? {
                Some(v) => Kind::from_str(&v, true).map_err(|_| format!("config key 'kind': '{v}'"))?,
                None => Kind::Weak,
            },
        };
        let fd = self.fd
            || match cfg.get("fd") {
                Some(v) => typed::<bool>("fd", v)?,
                None => false,
            };
        let env_seed = match std::env::var("CURVEDCHECK_SEED") {
            Ok(v) => Some(
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| format!("CURVEDCHECK_SEED: cannot parse '{v}'"))?,
            ),
            Err(_) => None,
        };
        let seed = match self.seed {
            Some(s) => s,
            None => cfg
                .get("seed")
                .map(|v| typed("seed", v))
                .transpose()?
                .or(env_seed)
                .unwrap_or(0),
        };
        let domain = text(self.domain, "domain").map(|d| parse_domain(&d)).transpose()?;
        let samples = self.samples.or(int("samples")?).unwrap_or(0);
        if self.samples == Some(0) {
            return Err("--samples must be positive".into());
        }
        Ok(Resolved {
            manifold: text(self.manifold, "manifold"),
            inline: text(self.inline, "inline"),
            domain,
            c: self.c.or(num("c")?),
            s: self.s.or(int("s")?),
            n: self.n.or(int("n")?),
            f: text(self.f, "f"),
            h: text(self.h, "h"),
            sigma: text(self.sigma, "sigma"),
            at: self.at,
            format,
            seed,
            fd,
            samples,
            tol: self.tol.or(num("tol")?),
            kind,
        })
    }
}

impl Resolved {
    /// Points sampled when no `--at` is given.
    pub fn point_samples(&self) -> usize {
        if self.samples == 0 {
            DEFAULT_SAMPLES
        } else {
            self.samples
        }
    }

    /// Planes per degenerate-plane check.
    pub fn plane_samples(&self) -> usize {
        if self.samples == 0 {
            DEFAULT_PLANE_SAMPLES
        } else {
            self.samples
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines_skip_comments() {
        let m = parse_config("# note\nseed = 4\n\ntol=1e-3\n").unwrap();
        assert_eq!(m["seed"], "4");
        assert_eq!(m["tol"], "1e-3");
        assert!(parse_config("seed 4").is_err());
    }

    #[test]
    fn domain_parses() {
        assert_eq!(parse_domain("-2,3").unwrap(), (-2.0, 3.0));
        assert!(parse_domain("3,-2").is_err());
        assert!(parse_domain("1").is_err());
    }
}
