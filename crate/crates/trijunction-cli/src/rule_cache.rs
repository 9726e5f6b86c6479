//! Binary cache of the corner rule.
//!
//! Layout, all little-endian: the 8-byte magic `TJCRULE\n`, a `u32` format
//! version, then `beta_max`, `tol` (f64), `rank` (u64) and the arrays of the
//! rule in declaration order. Vectors are a `u64` length followed by f64
//! values; matrices are `u64` rows, `u64` columns and column-major f64
//! values. Floats are stored bit for bit, so a reload reproduces the rule
//! exactly.

use sha2::{Digest, Sha256};
use std::path::Path;

use nalgebra::DMatrix;
use trijunction::cornerbasis::{build_corner_rule, CornerRule};
use trijunction::quad::GaussLegendre;

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 8] = b"TJCRULE\n";
pub const VERSION: u32 = 1;

/// Rule parameters used by every command.
pub const BETA_MAX: f64 = 50.0;
pub const RULE_TOL: f64 = 1e-13;

struct Writer(Vec<u8>);

impl Writer {
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn vec(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.f64(x));
    }
    fn mat(&mut self, m: &DMatrix<f64>) {
        self.u64(m.nrows() as u64);
        self.u64(m.ncols() as u64);
        m.iter().for_each(|&x| self.f64(x));
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn corrupt(detail: impl Into<String>) -> CliError {
    CliError::new("parse", "rule_cache", detail)
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> CliResult<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| corrupt("truncated file"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn len(&mut self) -> CliResult<usize> {
        let n = self.u64()?;
        if n > (self.bytes.len() / 8) as u64 {
            return Err(corrupt(format!("length {n} exceeds the file size")));
        }
        Ok(n as usize)
    }
    fn vec(&mut self) -> CliResult<Vec<f64>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64()).collect()
    }
    fn mat(&mut self) -> CliResult<DMatrix<f64>> {
        let r = self.len()?;
        let c = self.len()?;
        let data = (0..r * c).map(|_| self.f64()).collect::<CliResult<Vec<f64>>>()?;
        Ok(DMatrix::from_vec(r, c, data))
    }
}

pub fn encode(rule: &CornerRule) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&VERSION.to_le_bytes());
    w.f64(rule.beta_max);
    w.f64(rule.tol);
    w.u64(rule.rank as u64);
    w.vec(&rule.nodes);
    w.vec(&rule.weights);
    w.mat(&rule.basis);
    w.mat(&rule.interp);
    w.f64(rule.cond_v);
    w.vec(&rule.grid_breaks);
    w.vec(&rule.grid_nodes);
    w.vec(&rule.grid_weights);
    w.mat(&rule.grid_basis);
    w.vec(&rule.panel_rule.nodes);
    w.vec(&rule.panel_rule.weights);
    w.vec(&rule.panel_rule.bary);
    w.f64(rule.max_quad_error);
    w.f64(rule.max_interp_error);
    w.0
}

pub fn decode(bytes: &[u8]) -> CliResult<CornerRule> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(corrupt("not a corner rule file"));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(corrupt(format!("format version {version}, expected {VERSION}")));
    }
    let beta_max = r.f64()?;
    let tol = r.f64()?;
    let rank = r.u64()? as usize;
    let rule = CornerRule {
        beta_max,
        tol,
        rank,
        nodes: r.vec()?,
        weights: r.vec()?,
        basis: r.mat()?,
        interp: r.mat()?,
        cond_v: r.f64()?,
        grid_breaks: r.vec()?,
        grid_nodes: r.vec()?,
        grid_weights: r.vec()?,
        grid_basis: r.mat()?,
        panel_rule: GaussLegendre { nodes: r.vec()?, weights: r.vec()?, bary: r.vec()? },
        max_quad_error: r.f64()?,
        max_interp_error: r.f64()?,
    };
    if r.pos != bytes.len() {
        return Err(corrupt("trailing bytes"));
    }
    let k = rule.nodes.len();
    let shapes_ok = rule.weights.len() == k
        && rule.basis.shape() == (k, k)
        && rule.interp.shape() == (k, k)
        && rule.grid_basis.shape() == (rule.grid_nodes.len(), k)
        && rule.grid_weights.len() == rule.grid_nodes.len();
    if !shapes_ok {
        return Err(corrupt("inconsistent array sizes"));
    }
    Ok(rule)
}

/// Lower-case hex SHA-256 of the encoded rule.
pub fn rule_hash(rule: &CornerRule) -> String {
    hex_digest(&encode(rule))
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Outcome of `ensure_rule`.
#[derive(Clone, Debug)]
pub struct CachedRule {
    pub rule: CornerRule,
    pub hash: String,
    /// False when an existing cache was reused untouched.
    pub built: bool,
}

/// Load the rule cached at `path` when it was built with the same
/// parameters; otherwise build it and write the cache.
pub fn ensure_rule(path: &Path, beta_max: f64, tol: f64) -> CliResult<CachedRule> {
    if let Ok(bytes) = std::fs::read(path) {
        if let Ok(rule) = decode(&bytes) {
            if rule.beta_max.to_bits() == beta_max.to_bits() && rule.tol.to_bits() == tol.to_bits() {
                return Ok(CachedRule { rule, hash: hex_digest(&bytes), built: false });
            }
        }
    }
    let rule = build_corner_rule(beta_max, tol)?;
    let bytes = encode(&rule);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, &bytes).map_err(|e| CliError::new("io", "rule_cache", format!("{}: {e}", path.display())))?;
    Ok(CachedRule { rule, hash: hex_digest(&bytes), built: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_and_foreign_files_are_rejected() {
        assert!(decode(b"TJCRULE\n").is_err());
        assert!(decode(b"NOTARULE\x01\0\0\0").unwrap_err().detail.contains("not a corner rule"));
        let mut bad = MAGIC.to_vec();
        bad.extend_from_slice(&9u32.to_le_bytes());
        assert!(decode(&bad).unwrap_err().detail.contains("version"));
    }
}
