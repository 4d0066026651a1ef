//! Parsing of command inputs: distribution and policy specs, n lists.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use stopbound::{DistSpec, MaxDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bounds,
    Reference,
    Simulate,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Bounds => "bounds",
            Command::Reference => "figure2",
            Command::Simulate => "simulate",
        })
    }
}

/// Everything a bounds-style run needs, validated once up front.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub distribution: DistSpec,
    pub n_list: Vec<usize>,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl RunSpec {
    pub fn new(
        command: Command,
        distribution: DistSpec,
        n_list: Vec<usize>,
        output: Option<PathBuf>,
        seed: u64,
    ) -> Result<Self> {
        validate_n_list(&n_list)?;
        Ok(Self {
            command,
            distribution,
            n_list,
            output,
            seed,
        })
    }

    pub fn dist(&self) -> Result<MaxDistribution> {
        Ok(MaxDistribution::try_from(self.distribution.clone())?)
    }
}

pub fn validate_n_list(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        bail!("the n list is empty");
    }
    if let Some(&0) = ns.first() {
        bail!("n must be at least 1");
    }
    if let Some(w) = ns.windows(2).find(|w| w[1] <= w[0]) {
        bail!(
            "the n list must be strictly increasing, found {} then {}",
            w[0],
            w[1]
        );
    }
    Ok(())
}

/// Comma-separated items, each `k`, `a..b` (inclusive) or `a..b:step`.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if let Some((a, rest)) = item.split_once("..") {
            let (b, step) = match rest.split_once(':') {
                Some((b, st)) => (b, st.trim().parse::<usize>().context("bad range step")?),
                None => (rest, 1),
            };
            let a: usize = a
                .trim()
                .parse()
                .with_context(|| format!("bad range start in {item:?}"))?;
            let b: usize = b
                .trim()
                .parse()
                .with_context(|| format!("bad range end in {item:?}"))?;
            if step == 0 || b < a {
                bail!("empty or malformed range {item:?}");
            }
            out.extend((a..=b).step_by(step));
        } else {
            out.push(
                item.parse()
                    .with_context(|| format!("bad n value {item:?}"))?,
            );
        }
    }
    validate_n_list(&out)?;
    Ok(out)
}

/// Reads `arg` as inline JSON, or as a path to a JSON file when it does not
/// start with `{`. Parse errors carry line and column.
pub fn load_json<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let trimmed = arg.trim_start();
    let (text, origin) = if trimmed.starts_with('{') {
        (arg.to_string(), "inline JSON".to_string())
    } else {
        let path = Path::new(arg);
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {what} file {}", path.display()))?;
        (text, path.display().to_string())
    };
    serde_json::from_str(&text).map_err(|e| {
        anyhow::anyhow!(
            "invalid {what} in {origin} at line {}, column {}: {e}",
            e.line(),
            e.column()
        )
    })
}
