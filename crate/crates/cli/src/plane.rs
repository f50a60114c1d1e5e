use std::path::Path;

use anyhow::{bail, Context, Result};
use birkhoff_lab::io::bisto_from_json;
use birkhoff_lab::matrix::{BistoMatrix, PermMatrix, Tolerances};

/// One spanning matrix of a cross-section plane.
#[derive(Clone, Debug, PartialEq)]
pub enum PlaneBase {
    Perm(String),
    File(String),
}

impl PlaneBase {
    pub fn label(&self) -> String {
        match self {
            PlaneBase::Perm(s) => format!("perm:{s}"),
            PlaneBase::File(s) => format!("file:{s}"),
        }
    }

    pub fn resolve(&self, n: usize, tol: &Tolerances) -> Result<BistoMatrix> {
        match self {
            PlaneBase::Perm(s) => Ok(PermMatrix::from_cycles(n, s).with_context(|| format!("bad permutation '{s}'"))?.to_bisto()),
            PlaneBase::File(path) => {
                let text = std::fs::read_to_string(Path::new(path)).with_context(|| format!("cannot read {path}"))?;
                bisto_from_json(&text, tol).with_context(|| format!("{path} is not a bistochastic matrix"))
            }
        }
    }
}

/// Splits `perm:I,perm:12,34` or `file:a.json,file:b.json` into its two
/// bases. Commas inside a permutation are kept; a new base starts only at
/// `,perm:` or `,file:`.
pub fn parse_plane(spec: &str) -> Result<(PlaneBase, PlaneBase)> {
    let mut starts: Vec<usize> = Vec::new();
    for prefix in ["perm:", "file:"] {
        starts.extend(spec.match_indices(prefix).map(|(i, _)| i).filter(|&i| i == 0 || spec.as_bytes()[i - 1] == b','));
    }
    starts.sort_unstable();
    if starts.first() != Some(&0) {
        bail!("plane must start with 'perm:' or 'file:', got '{spec}'");
    }
    if starts.len() != 2 {
        bail!("plane needs exactly two bases like 'perm:I,perm:1234', got '{spec}'");
    }
    let first = &spec[..starts[1] - 1];
    let second = &spec[starts[1]..];
    Ok((parse_base(first)?, parse_base(second)?))
}

fn parse_base(s: &str) -> Result<PlaneBase> {
    if let Some(rest) = s.strip_prefix("perm:") {
        Ok(PlaneBase::Perm(rest.to_string()))
    } else if let Some(rest) = s.strip_prefix("file:") {
        if rest.is_empty() {
            bail!("empty file name in '{s}'");
        }
        Ok(PlaneBase::File(rest.to_string()))
    } else {
        bail!("unknown plane base '{s}'")
    }
}
