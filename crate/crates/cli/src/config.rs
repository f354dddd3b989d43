//! Command-line code parameters and their resolution into a concrete code.

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use lmbr_core::{Design, FrCode, LocalCode, LrcCode, MbrCode};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    AllSymbol,
    InfoLocal,
    FrLocal,
}

impl Construction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AllSymbol => "all-symbol",
            Self::InfoLocal => "info-local",
            Self::FrLocal => "fr-local",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimConfig {
    #[arg(long, value_enum, default_value = "all-symbol", global = true)]
    pub construction: Construction,
    /// Base field characteristic.
    #[arg(long, default_value_t = 3, global = true)]
    pub q: u64,
    /// Extension degree; defaults to the outer code length.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Number of local groups.
    #[arg(long, default_value_t = 2, global = true)]
    pub t: usize,
    #[arg(long = "nl", default_value_t = 3, global = true)]
    pub n_l: usize,
    #[arg(long, default_value_t = 2, global = true)]
    pub r: usize,
    #[arg(long, default_value_t = 2, global = true)]
    pub d: usize,
    /// Global nodes (information locality); defaults to 1 for info-local.
    #[arg(long, global = true)]
    pub delta: Option<usize>,
    /// File size in F_{q^m} symbols.
    #[arg(long = "K", default_value_t = 5, global = true)]
    pub k: usize,
    #[arg(long = "kfr", default_value_t = 5, global = true)]
    pub k_fr: usize,
    /// Block design for fr-local; the Fano plane when absent.
    #[arg(long, global = true)]
    pub design_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Verification threads; 0 uses every core.
    #[arg(long, default_value_t = 0, global = true)]
    pub workers: usize,
    #[arg(long, default_value_t = 1_000_000, global = true)]
    pub pattern_cap: u128,
    #[arg(long, default_value = ".", global = true)]
    pub out_dir: PathBuf,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            construction: Construction::AllSymbol,
            q: 3,
            m: None,
            t: 2,
            n_l: 3,
            r: 2,
            d: 2,
            delta: None,
            k: 5,
            k_fr: 5,
            design_file: None,
            seed: 0,
            workers: 0,
            pattern_cap: 1_000_000,
            out_dir: PathBuf::from("."),
        }
    }
}

/// The parameters that determine the code, in a fixed order.
#[derive(Debug, Clone, Serialize)]
struct CanonicalConfig<'a> {
    construction: &'static str,
    q: u64,
    m: usize,
    t: usize,
    local: LocalSummary<'a>,
    delta: usize,
    k: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum LocalSummary<'a> {
    Mbr { n_l: usize, r: usize, d: usize },
    Fr { k_fr: usize, n_pts: usize, blocks: &'a [Vec<usize>] },
}

pub struct ResolvedCode {
    pub config: SimConfig,
    pub code: LrcCode,
    pub digest: [u8; 8],
}

impl SimConfig {
    pub fn delta(&self) -> usize {
        match self.construction {
            Construction::AllSymbol => 0,
            Construction::InfoLocal => self.delta.unwrap_or(1),
            Construction::FrLocal => self.delta.unwrap_or(0),
        }
    }

    fn design(&self) -> Result<Design, CliError> {
        match &self.design_file {
            None => Ok(Design::fano()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                Ok(Design::parse(&text)?)
            }
        }
    }

    pub fn resolve(&self) -> Result<ResolvedCode, CliError> {
        if self.construction == Construction::AllSymbol && self.delta.is_some_and(|d| d > 0) {
            return Err(CliError::Refused("all-symbol codes have no global nodes; use --construction info-local".into()));
        }
        let local = match self.construction {
            Construction::FrLocal => LocalCode::Fr(FrCode::new(self.design()?, self.k_fr, self.q)?),
            _ => LocalCode::Mbr(MbrCode::new(self.n_l, self.r, self.d, self.q)?),
        };
        let code = LrcCode::info_local(self.t, self.delta(), local, self.k, self.m)?;
        let digest = digest(self, &code);
        Ok(ResolvedCode {
            config: self.clone(),
            code,
            digest,
        })
    }
}

fn digest(cfg: &SimConfig, code: &LrcCode) -> [u8; 8] {
    let local = match code.local() {
        LocalCode::Mbr(c) => LocalSummary::Mbr {
            n_l: c.n_l(),
            r: c.r(),
            d: c.d(),
        },
        LocalCode::Fr(c) => LocalSummary::Fr {
            k_fr: c.dim(),
            n_pts: c.design().n_pts(),
            blocks: c.design().blocks(),
        },
    };
    let canonical = CanonicalConfig {
        construction: cfg.construction.as_str(),
        q: cfg.q,
        m: code.field().m(),
        t: cfg.t,
        local,
        delta: code.globals(),
        k: cfg.k,
    };
    let bytes = serde_json::to_vec(&canonical).expect("plain struct serializes");
    let hash = Sha256::digest(&bytes);
    let mut out = [0u8; 8];
    out.copy_from_slice(&hash[..8]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_the_desk_code() {
        let r = SimConfig::default().resolve().unwrap();
        assert_eq!((r.code.n(), r.code.alpha(), r.code.field().m()), (6, 2, 6));
    }

    #[test]
    fn info_local_defaults_to_one_global() {
        let cfg = SimConfig {
            construction: Construction::InfoLocal,
            ..SimConfig::default()
        };
        let r = cfg.resolve().unwrap();
        assert_eq!((r.code.n(), r.code.field().m()), (7, 8));
    }

    #[test]
    fn digest_tracks_code_parameters_only() {
        let a = SimConfig::default().resolve().unwrap();
        let b = SimConfig {
            seed: 99,
            workers: 3,
            m: Some(6),
            ..SimConfig::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(a.digest, b.digest);
        let c = SimConfig {
            k: 4,
            ..SimConfig::default()
        }
        .resolve()
        .unwrap();
        assert_ne!(a.digest, c.digest);
    }

    #[test]
    fn small_m_is_refused() {
        let cfg = SimConfig {
            m: Some(5),
            ..SimConfig::default()
        };
        let err = cfg.resolve().err().unwrap();
        assert!(err.to_string().contains("m ≥ tK_L"));
        assert_eq!(err.exit_code(), 2);
    }
}
