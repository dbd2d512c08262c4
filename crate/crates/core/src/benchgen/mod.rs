//! Benchmark graph families and instance assembly.
//!
//! Every generator is a pure function of its configuration, seed included.

mod grid;
mod gtg;
mod instance;
pub mod random;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use grid::{grid_generate, GridConfig};
pub use gtg::{gtg_generate, GtgConfig, GTG_WEIGHT_SCALE};
pub use instance::{make_instance, make_instance_with, InstanceOptions, TARGET_RETRIES};

/// First 16 hex digits of the SHA-256 of the JSON form of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

/// One line of a batch manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub seed: u64,
    pub nodes: usize,
    pub edges: usize,
    pub config_hash: String,
}
