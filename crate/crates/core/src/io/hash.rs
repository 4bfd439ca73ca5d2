//! Content and configuration hashes.

use sha2::{Digest, Sha256};

/// SHA-256 of `"blob <len>\0" ++ bytes`, as git computes object ids in its
/// SHA-256 object format.
pub fn git_blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
