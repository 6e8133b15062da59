//! Network files, validation reports, hashing and matrix dumps.
//!
//! A network file is UTF-8 JSON:
//!
//! ```json
//! {
//!   "sites": [{"id": 0, "label": "B0", "kind": "bulk"}, ...],
//!   "bonds": [{"i": 0, "j": 1, "Jx": 1.0, "Jy": 1.0, "Jz": 0.0, "weight": 1.0}, ...],
//!   "meta": {}
//! }
//! ```
//!
//! `weight` defaults to 1 and `meta` is free-form.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinsurf_core::{Bond, Coupling, Site, SiteKind, SparseOperator, SpinNetwork};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteRecord {
    pub id: usize,
    pub label: String,
    pub kind: String,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondRecord {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "Jx")]
    pub jx: f64,
    #[serde(rename = "Jy")]
    pub jy: f64,
    #[serde(rename = "Jz")]
    pub jz: f64,
    #[serde(default = "one")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub sites: Vec<SiteRecord>,
    pub bonds: Vec<BondRecord>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub meta: serde_json::Value,
}

impl NetworkFile {
    pub fn from_network(net: &SpinNetwork, meta: serde_json::Value) -> Self {
        NetworkFile {
            sites: net
                .sites()
                .iter()
                .map(|s| SiteRecord {
                    id: s.id,
                    label: s.label.clone(),
                    kind: s.kind.as_str().to_string(),
                })
                .collect(),
            bonds: net
                .bonds()
                .iter()
                .map(|b| BondRecord {
                    i: b.i,
                    j: b.j,
                    jx: b.coupling.x,
                    jy: b.coupling.y,
                    jz: b.coupling.z,
                    weight: b.weight,
                })
                .collect(),
            meta,
        }
    }

    fn parts(&self) -> Result<(Vec<Site>, Vec<Bond>)> {
        let sites = self
            .sites
            .iter()
            .map(|s| {
                let kind = match s.kind.as_str() {
                    "bulk" => SiteKind::Bulk,
                    "surface" => SiteKind::Surface,
                    other => {
                        return Err(Error::Parse(format!(
                            "site {}: unknown kind `{other}`",
                            s.id
                        )))
                    }
                };
                Ok(Site::new(s.id, s.label.clone(), kind))
            })
            .collect::<Result<_>>()?;
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond::new(b.i, b.j, Coupling::new(b.jx, b.jy, b.jz), b.weight))
            .collect();
        Ok((sites, bonds))
    }

    pub fn to_network(&self) -> Result<SpinNetwork> {
        let (sites, bonds) = self.parts()?;
        Ok(SpinNetwork::new(sites, bonds)?)
    }
}

pub fn parse_network(text: &str) -> Result<SpinNetwork> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_network()
}

pub fn load_network(path: impl AsRef<Path>) -> Result<SpinNetwork> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network(&text)
}

pub fn network_to_json(net: &SpinNetwork, meta: serde_json::Value) -> String {
    let mut s =
        serde_json::to_string_pretty(&NetworkFile::from_network(net, meta)).expect("plain data");
    s.push('\n');
    s
}

pub fn save_network(
    net: &SpinNetwork,
    meta: serde_json::Value,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, network_to_json(net, meta)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRecord {
    pub code: String,
    pub message: String,
}

/// Machine-readable outcome of validating a network file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    pub violations: Vec<ViolationRecord>,
}

/// Validates without stopping at the first problem.
pub fn validation_report(text: &str) -> ValidationReport {
    let invalid = |parse_error, violations| ValidationReport {
        valid: false,
        parse_error,
        violations,
    };
    let file: NetworkFile = match serde_json::from_str(text) {
        Ok(f) => f,
        Err(e) => return invalid(Some(e.to_string()), Vec::new()),
    };
    let (sites, bonds) = match file.parts() {
        Ok(p) => p,
        Err(e) => return invalid(Some(e.to_string()), Vec::new()),
    };
    let violations: Vec<ViolationRecord> = SpinNetwork::check(&sites, &bonds)
        .into_iter()
        .map(|v| ViolationRecord {
            code: v.code().to_string(),
            message: v.to_string(),
        })
        .collect();
    ValidationReport {
        valid: violations.is_empty(),
        parse_error: None,
        violations,
    }
}

/// SHA-256 of the network's canonical JSON (no metadata), hex encoded.
pub fn network_hash(net: &SpinNetwork) -> String {
    let canonical = serde_json::to_vec(&NetworkFile::from_network(net, serde_json::Value::Null))
        .expect("plain data");
    hex(&Sha256::digest(canonical))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `op` in Matrix Market coordinate format (1-based, general).
pub fn write_matrix_market(op: &SparseOperator, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", op.dim(), op.dim(), op.nnz())?;
    for i in 0..op.dim() {
        let (cols, vals) = op.row(i);
        for (c, v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:e}", i + 1, c + 1, v)?;
        }
    }
    Ok(())
}
