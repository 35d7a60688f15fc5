use std::fs;
use std::path::Path;

use linkshroud::graph::manifest_entries;
use linkshroud::perturb::Mechanism;
use linkshroud::PerturbParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDigest {
    pub label: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub hash: String,
    pub mechanism: Mechanism,
    pub seed: u64,
    pub version: String,
    pub params: PerturbParams,
    pub snapshots: Vec<SnapshotDigest>,
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hashes the perturbation settings together with every snapshot's bytes.
/// Paths do not enter the hash, so moving the inputs keeps it stable.
pub fn compute(manifest: &Path, mechanism: Mechanism, params: &PerturbParams) -> Result<Provenance> {
    let mut snapshots = Vec::new();
    for path in manifest_entries(manifest)? {
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        snapshots.push(SnapshotDigest { label, sha256: sha_hex(&bytes) });
    }
    let mut h = Sha256::new();
    h.update(format!(
        "linkshroud/{VERSION}\nmechanism={mechanism}\nk={}\nm={}\ntheta={:e}\nseed={}\ninter-cluster-form={}\n",
        params.k, params.m, params.theta, params.seed, params.inter_form
    ));
    for s in &snapshots {
        h.update(format!("snapshot={}\n", s.sha256));
    }
    Ok(Provenance {
        hash: hex::encode(h.finalize()),
        mechanism,
        seed: params.seed,
        version: VERSION.to_string(),
        params: *params,
        snapshots,
    })
}

/// Digest over several upstream hashes plus extra settings.
pub fn combine<'a>(parts: impl IntoIterator<Item = &'a str>, extra: &str) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update(b"\n");
    }
    h.update(extra.as_bytes());
    hex::encode(h.finalize())
}

/// Loads `<dir>/provenance.json` and checks it against `expected`.
pub fn check(dir: &Path, expected: &Provenance) -> Result<()> {
    let path = dir.join("provenance.json");
    if !path.exists() {
        return Err(CliError::Missing(format!("{} (run `perturb` first)", path.display())));
    }
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let found: Provenance =
        serde_json::from_str(&text).map_err(|e| CliError::Missing(format!("{}: unreadable: {e}", path.display())))?;
    if found.hash != expected.hash {
        return Err(CliError::Stale { path, found: found.hash, expected: expected.hash.clone() });
    }
    Ok(())
}
