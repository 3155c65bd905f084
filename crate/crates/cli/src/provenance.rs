//! Config digests stamped into every output file.

use serde::Serialize;
use sha2::{Digest, Sha256};
use skatinfer::gamelog::Provenance;

pub const TOOL: &str = "skatinfer";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Digest of a resolved run configuration. Input files enter through their
/// content digests, so the digest names what was computed, not where from.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    sha256_hex(&serde_json::to_vec(config).expect("run configs serialize"))
}

pub fn provenance(digest: &str) -> Provenance {
    Provenance {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        config_sha256: digest.to_string(),
    }
}

/// Leading comment line for CSV outputs.
pub fn csv_comment(p: &Provenance) -> String {
    format!("# {} {} config_sha256={}\n", p.tool, p.version, p.config_sha256)
}
