//! Run configuration: an optional TOML file merged with command-line flags.
//! Flags win. Everything is validated before any solver runs.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use robin_core::asymptotics::SolverKind;
use robin_core::geometry::Domain;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Radial,
    Variational,
    Both,
}

impl SolverChoice {
    pub fn kinds(self) -> Vec<SolverKind> {
        match self {
            SolverChoice::Radial => vec![SolverKind::Radial],
            SolverChoice::Variational => vec![SolverKind::Variational],
            SolverChoice::Both => vec![SolverKind::Radial, SolverKind::Variational],
        }
    }
}

/// Parameters that may come from the file or from flags.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Domain, e.g. `interval:-1,1`, `ball:2,1`, `shell:2,1,1.5`, `rectangle:1,1`.
    #[arg(long, value_parser = parse_domain)]
    pub domain: Option<Domain>,
    /// Exponent for single solves.
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated exponents for sweeps.
    #[arg(long = "p-list", value_delimiter = ',', num_args = 1..)]
    pub p_list: Option<Vec<f64>>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Comma-separated boundary parameters.
    #[arg(long = "beta-list", value_delimiter = ',', num_args = 1..)]
    pub beta_list: Option<Vec<f64>>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    /// Gradient tolerance of the variational minimizer.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Field to check: `exact`, `constant` or a field CSV path.
    #[arg(long)]
    pub field: Option<String>,
    /// Comma-separated barrier widths for `bracket`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub eps: Option<Vec<f64>>,
    /// Dimension for `compare`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Common volume for `compare`.
    #[arg(long)]
    pub volume: Option<f64>,
    /// Inner shell radius for `compare`.
    #[arg(long)]
    pub inner: Option<f64>,
}

impl Overrides {
    /// Fills every unset field of `self` from `base`.
    fn or(self, base: Overrides) -> Overrides {
        Overrides {
            domain: self.domain.or(base.domain),
            p: self.p.or(base.p),
            p_list: self.p_list.or(base.p_list),
            beta: self.beta.or(base.beta),
            beta_list: self.beta_list.or(base.beta_list),
            resolution: self.resolution.or(base.resolution),
            solver: self.solver.or(base.solver),
            tolerance: self.tolerance.or(base.tolerance),
            max_iters: self.max_iters.or(base.max_iters),
            out: self.out.or(base.out),
            field: self.field.or(base.field),
            eps: self.eps.or(base.eps),
            n: self.n.or(base.n),
            volume: self.volume.or(base.volume),
            inner: self.inner.or(base.inner),
        }
    }
}

pub fn parse_domain(s: &str) -> Result<Domain, String> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| format!("expected kind:params, got `{s}`"))?;
    let nums = rest
        .split(',')
        .map(|t| f64::from_str(t.trim()).map_err(|e| format!("bad number `{t}`: {e}")))
        .collect::<Result<Vec<f64>, _>>()?;
    let dim = |x: f64| -> Result<usize, String> {
        if x >= 1.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(format!("dimension must be a positive integer (got {x})"))
        }
    };
    let domain = match (kind, nums.as_slice()) {
        ("interval", &[a, b]) => Domain::Interval { a, b },
        ("ball", &[n, radius]) => Domain::Ball { n: dim(n)?, radius },
        ("shell", &[n, inner, outer]) => Domain::Shell { n: dim(n)?, inner, outer },
        ("rectangle", &[width, height]) => Domain::Rectangle { width, height },
        _ => return Err(format!("unrecognized domain `{s}`")),
    };
    domain.validate().map_err(|e| e.to_string())?;
    Ok(domain)
}

/// Fully resolved configuration, echoed into every summary.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_list: Option<Vec<f64>>,
    pub resolution: usize,
    pub solver: SolverChoice,
    pub tolerance: f64,
    pub max_iters: usize,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<f64>,
}

pub const DEFAULT_RESOLUTION: usize = 400;
pub const DEFAULT_EPS: [f64; 2] = [0.2, 0.1];

pub fn load_file(path: &Path) -> Result<Overrides, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name} must be positive and finite (got {v})"))
    }
}

fn exponent(v: f64) -> Result<f64, String> {
    if v > 1.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("p must exceed 1 (got {v})"))
    }
}

fn increasing(name: &str, v: &[f64]) -> Result<(), String> {
    if v.is_empty() {
        return Err(format!("{name} is empty"));
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(format!("{name} must be strictly increasing"));
    }
    Ok(())
}

impl RunConfig {
    /// Merges flags over the file and validates what `command` needs.
    pub fn resolve(command: &'static str, flags: Overrides, file: Option<Overrides>) -> Result<Self, String> {
        let o = match file {
            Some(f) => flags.or(f),
            None => flags,
        };
        let cfg = RunConfig {
            command,
            domain: o.domain,
            p: o.p,
            p_list: o.p_list,
            beta: o.beta,
            beta_list: o.beta_list,
            resolution: o.resolution.unwrap_or(DEFAULT_RESOLUTION),
            solver: o.solver.unwrap_or(SolverChoice::Radial),
            tolerance: o.tolerance.unwrap_or(1e-10),
            max_iters: o.max_iters.unwrap_or(200_000),
            out: o.out.unwrap_or_else(|| PathBuf::from(".")),
            field: o.field,
            eps: o.eps,
            n: o.n,
            volume: o.volume,
            inner: o.inner,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(d) = &self.domain {
            d.validate().map_err(|e| e.to_string())?;
        }
        if self.resolution < 4 {
            return Err(format!("resolution must be at least 4 (got {})", self.resolution));
        }
        positive("tolerance", self.tolerance)?;
        if self.max_iters == 0 {
            return Err("max_iters must be positive".into());
        }
        if let Some(p) = self.p {
            exponent(p)?;
        }
        if let Some(ps) = &self.p_list {
            increasing("p_list", ps)?;
            for &p in ps {
                exponent(p)?;
            }
        }
        if let Some(b) = self.beta {
            positive("beta", b)?;
        }
        if let Some(bs) = &self.beta_list {
            increasing("beta_list", bs)?;
            for &b in bs {
                positive("beta", b)?;
            }
        }
        if let Some(es) = &self.eps {
            if es.is_empty() {
                return Err("eps is empty".into());
            }
            for &e in es {
                positive("eps", e)?;
            }
        }

        let need_domain = || self.domain.ok_or_else(|| format!("{} needs a domain", self.command));
        let need_p = || self.p.ok_or_else(|| format!("{} needs p", self.command));
        let need_beta = || self.beta.ok_or_else(|| format!("{} needs beta", self.command));
        match self.command {
            "solve" => {
                need_domain()?;
                need_p()?;
                need_beta()?;
            }
            "sweep" => {
                need_domain()?;
                need_beta()?;
                let ps = self.p_list.as_ref().ok_or("sweep needs p_list")?;
                if ps.len() < 3 {
                    return Err(format!("sweep needs at least 3 exponents (got {})", ps.len()));
                }
                if self.solver == SolverChoice::Both {
                    return Err("sweep runs a single solver".into());
                }
            }
            "expand" => {
                let d = need_domain()?;
                if !matches!(d, Domain::Ball { .. } | Domain::Shell { .. }) {
                    return Err("expand needs a ball or shell domain".into());
                }
                need_p()?;
                self.beta_list.as_ref().ok_or("expand needs beta_list")?;
            }
            "compare" => {
                let n = self.n.ok_or("compare needs n")?;
                if n == 0 {
                    return Err("n must be at least 1".into());
                }
                positive("volume", self.volume.ok_or("compare needs volume")?)?;
                positive("inner", self.inner.ok_or("compare needs inner")?)?;
                need_p()?;
                if self.beta.is_none() && self.beta_list.is_none() {
                    return Err("compare needs beta or beta_list".into());
                }
            }
            "check" | "bracket" => {
                need_domain()?;
                need_beta()?;
                self.field.as_deref().ok_or_else(|| format!("{} needs field", self.command))?;
            }
            other => unreachable!("unknown command {other}"),
        }
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        self.domain.expect("validated")
    }

    pub fn betas(&self) -> Vec<f64> {
        match (&self.beta_list, self.beta) {
            (Some(bs), _) => bs.clone(),
            (None, Some(b)) => vec![b],
            (None, None) => Vec::new(),
        }
    }

    pub fn eps_grid(&self) -> Vec<f64> {
        self.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec())
    }
}
