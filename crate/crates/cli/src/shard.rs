//! On-disk shard format.
//!
//! ```text
//! "LMBR" | version u8 | digest [u8; 8] | q u32 | m u16 | index u16 | role u8 | alpha u16 | payload
//! ```
//!
//! Integers are little endian. The payload holds alpha field elements, each
//! as m coefficients of two bytes, constant coefficient first.

use std::fs;
use std::path::{Path, PathBuf};

use lmbr_core::{ExtField, FieldElement, LrcCode, Shard, ShardRole};

use crate::CliError;

pub const MAGIC: &[u8; 4] = b"LMBR";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 8 + 4 + 2 + 2 + 1 + 2;
pub const EXTENSION: &str = "lmbr";

pub const ROLE_LOCAL: u8 = 0;
pub const ROLE_GLOBAL: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardFile {
    pub digest: [u8; 8],
    pub q: u32,
    pub m: u16,
    pub index: u16,
    pub role: u8,
    pub alpha: u16,
    /// alpha * m coefficients, element-major.
    pub coeffs: Vec<u16>,
}

impl ShardFile {
    pub fn from_shard(shard: &Shard, field: &ExtField, digest: [u8; 8]) -> Self {
        let role = match shard.role {
            ShardRole::Local { .. } => ROLE_LOCAL,
            ShardRole::Global { .. } => ROLE_GLOBAL,
        };
        Self {
            digest,
            q: field.q(),
            m: field.m() as u16,
            index: shard.index as u16,
            role,
            alpha: shard.payload.len() as u16,
            coeffs: shard.payload.iter().flat_map(|e| e.coeffs().iter().copied()).collect(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 2 * self.coeffs.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.digest);
        out.extend_from_slice(&self.q.to_le_bytes());
        out.extend_from_slice(&self.m.to_le_bytes());
        out.extend_from_slice(&self.index.to_le_bytes());
        out.push(self.role);
        out.extend_from_slice(&self.alpha.to_le_bytes());
        for c in &self.coeffs {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        let bad = |msg: &str| CliError::Io(format!("malformed shard: {msg}"));
        if bytes.len() < HEADER_LEN {
            return Err(bad("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        if bytes[4] != VERSION {
            return Err(bad(&format!("unsupported version {}", bytes[4])));
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let mut digest = [0u8; 8];
        digest.copy_from_slice(&bytes[5..13]);
        let q = u32::from_le_bytes(bytes[13..17].try_into().expect("4 bytes"));
        let m = u16_at(17);
        let index = u16_at(19);
        let role = bytes[21];
        let alpha = u16_at(22);
        if role > ROLE_GLOBAL {
            return Err(bad(&format!("unknown role tag {role}")));
        }
        let body = &bytes[HEADER_LEN..];
        let expected = alpha as usize * m as usize * 2;
        if body.len() != expected {
            return Err(bad(&format!("payload is {} bytes, expected {expected}", body.len())));
        }
        let coeffs = body.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
        Ok(Self {
            digest,
            q,
            m,
            index,
            role,
            alpha,
            coeffs,
        })
    }

    /// Checks the header against the code and rebuilds the in-memory shard.
    pub fn to_shard(&self, code: &LrcCode, digest: [u8; 8]) -> Result<Shard, CliError> {
        if self.digest != digest {
            return Err(CliError::Refused(format!(
                "shard {} was written for a different code (digest {} != {})",
                self.index,
                hex(&self.digest),
                hex(&digest)
            )));
        }
        let field = code.field();
        if self.q != field.q() || self.m as usize != field.m() || self.alpha as usize != code.alpha() {
            return Err(CliError::Refused(format!("shard {} header does not match the code", self.index)));
        }
        let index = self.index as usize;
        let role = code
            .role(index)
            .ok_or_else(|| CliError::Refused(format!("shard index {index} out of range")))?;
        let tag = if matches!(role, ShardRole::Global { .. }) { ROLE_GLOBAL } else { ROLE_LOCAL };
        if tag != self.role {
            return Err(CliError::Refused(format!("shard {index} has the wrong role tag")));
        }
        let payload = self
            .coeffs
            .chunks_exact(field.m())
            .map(|c| element(field, c))
            .collect::<Result<Vec<FieldElement>, CliError>>()?;
        Ok(Shard { index, role, payload })
    }
}

pub fn element(field: &ExtField, coeffs: &[u16]) -> Result<FieldElement, CliError> {
    let wide: Vec<u64> = coeffs.iter().map(|&c| c as u64).collect();
    field.element(&wide).map_err(|e| CliError::Refused(format!("bad symbol: {e}")))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn shard_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("shard_{index:04}.{EXTENSION}"))
}

pub fn write_shard(path: &Path, file: &ShardFile) -> Result<(), CliError> {
    fs::write(path, file.to_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Reads every shard file in `dir`, sorted by file name.
pub fn read_dir(dir: &Path) -> Result<Vec<ShardFile>, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.extension().is_some_and(|x| x == EXTENSION));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            ShardFile::parse(&bytes)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> ShardFile {
        ShardFile {
            digest: [1, 2, 3, 4, 5, 6, 7, 8],
            q: 3,
            m: 2,
            index: 5,
            role: ROLE_GLOBAL,
            alpha: 2,
            coeffs: vec![1, 2, 0, 1],
        }
    }

    #[test]
    fn byte_layout() {
        let bytes = sample().to_bytes();
        assert_eq!(
            bytes,
            [
                b'L', b'M', b'B', b'R', 1, 1, 2, 3, 4, 5, 6, 7, 8, 3, 0, 0, 0, 2, 0, 5, 0, 1, 2, 0, 1, 0, 2, 0, 0, 0, 1, 0
            ]
        );
        assert_eq!(bytes.len(), HEADER_LEN + 8);
    }

    #[test]
    fn malformed_inputs() {
        let bytes = sample().to_bytes();
        assert!(ShardFile::parse(&bytes[..10]).is_err());
        assert!(ShardFile::parse(&bytes[..bytes.len() - 1]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(ShardFile::parse(&wrong).is_err());
        let mut version = bytes;
        version[4] = 2;
        assert!(ShardFile::parse(&version).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(digest in any::<[u8; 8]>(), q in any::<u32>(), m in 1u16..6, index in any::<u16>(),
                      role in 0u8..2, alpha in 0u16..5, seed in any::<u64>()) {
            let coeffs = (0..alpha as u64 * m as u64).map(|i| (seed.wrapping_mul(i + 1) >> 17) as u16).collect();
            let f = ShardFile { digest, q, m, index, role, alpha, coeffs };
            let bytes = f.to_bytes();
            let back = ShardFile::parse(&bytes).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(back.to_bytes(), bytes);
        }
    }
}
