//! Exhaustive checks over erasure patterns and node subsets.

use itertools::Itertools;
use rayon::prelude::*;

use super::LrcCode;
use crate::error::{Error, Result};
use crate::frlocal::binomial;
use crate::galois::BaseMatrix;
use crate::linpoly::LinearizedPoly;
use crate::mbr::RankProfile;

pub const DEFAULT_PATTERN_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DminReport {
    pub dmin: usize,
    /// Smallest-index erasure pattern of size `dmin` that defeats decoding.
    pub witness: Vec<usize>,
    pub patterns_checked: u128,
}

/// Smallest number of node erasures that makes the message unrecoverable,
/// found by enumerating patterns of growing size. Refuses with
/// `CapExceeded` before a level would push the total past `cap`.
pub fn exact_dmin(code: &LrcCode, cap: u128, workers: usize) -> Result<DminReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))?;
    let n = code.n();
    let mut checked: u128 = 0;
    for e in 1..=n {
        let level = binomial(n, e);
        if checked + level > cap {
            return Err(Error::CapExceeded {
                needed: checked + level,
                cap,
            });
        }
        let patterns: Vec<Vec<usize>> = (0..n).combinations(e).collect();
        let hit = pool.install(|| {
            patterns.par_iter().position_first(|erased| {
                let kept: Vec<usize> = (0..n).filter(|i| !erased.contains(i)).collect();
                !code.decodable(&kept)
            })
        });
        match hit {
            Some(pos) => {
                return Ok(DminReport {
                    dmin: e,
                    witness: patterns[pos].clone(),
                    patterns_checked: checked + pos as u128 + 1,
                })
            }
            None => checked += level,
        }
    }
    unreachable!("erasing every node leaves rank 0 < K")
}

/// Lowest surviving rank over all patterns of `e` erasures, with the first
/// pattern attaining it.
pub fn worst_erasure(code: &LrcCode, e: usize) -> (usize, Vec<usize>) {
    let n = code.n();
    (0..n)
        .combinations(e)
        .map(|erased| {
            let kept: Vec<usize> = (0..n).filter(|i| !erased.contains(i)).collect();
            (code.rank_of(&kept), erased)
        })
        .min_by_key(|(rank, _)| *rank)
        .expect("e <= n")
}

/// F_q-rank of every union of thick columns, indexed by subset bitmask.
pub fn subset_ranks(gen: &BaseMatrix, nodes: usize, alpha: usize, q: u32) -> Vec<usize> {
    assert!(nodes < usize::BITS as usize, "too many nodes for bitmask enumeration");
    (0..1usize << nodes)
        .into_par_iter()
        .map(|mask| {
            let cols: Vec<usize> = (0..nodes)
                .filter(|i| mask >> i & 1 == 1)
                .flat_map(|i| i * alpha..(i + 1) * alpha)
                .collect();
            gen.select_cols(&cols).rank(q)
        })
        .collect()
}

/// A subset whose rank differs from what the profile predicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UraWitness {
    pub subset: Vec<usize>,
    pub rank: usize,
    pub expected: usize,
}

fn subset_of(mask: usize, nodes: usize) -> Vec<usize> {
    (0..nodes).filter(|i| mask >> i & 1 == 1).collect()
}

/// Checks rank(G_S) = a_1 + .. + a_|S| for every subset S of thick columns.
/// Returns the first mismatch in bitmask order.
pub fn check_exact_ura(gen: &BaseMatrix, nodes: usize, alpha: usize, q: u32, profile: &RankProfile) -> std::result::Result<usize, UraWitness> {
    let ranks = subset_ranks(gen, nodes, alpha, q);
    let prefix = prefix_sums(profile, nodes);
    for (mask, &rank) in ranks.iter().enumerate() {
        let expected = prefix[mask.count_ones() as usize];
        if rank != expected {
            return Err(UraWitness {
                subset: subset_of(mask, nodes),
                rank,
                expected,
            });
        }
    }
    Ok(ranks.len())
}

/// For a code with several groups: every subset of size s has rank at least
/// P(s), and some subset of each size attains it.
pub fn check_min_rank(gen: &BaseMatrix, nodes: usize, alpha: usize, q: u32, p: &[usize]) -> std::result::Result<usize, UraWitness> {
    let ranks = subset_ranks(gen, nodes, alpha, q);
    let mut min_by_size = vec![(usize::MAX, 0usize); nodes + 1];
    for (mask, &rank) in ranks.iter().enumerate() {
        let s = mask.count_ones() as usize;
        if rank < p[s] {
            return Err(UraWitness {
                subset: subset_of(mask, nodes),
                rank,
                expected: p[s],
            });
        }
        if rank < min_by_size[s].0 {
            min_by_size[s] = (rank, mask);
        }
    }
    for (s, &(rank, mask)) in min_by_size.iter().enumerate() {
        if rank != p[s] {
            return Err(UraWitness {
                subset: subset_of(mask, nodes),
                rank,
                expected: p[s],
            });
        }
    }
    Ok(ranks.len())
}

fn prefix_sums(profile: &RankProfile, nodes: usize) -> Vec<usize> {
    let mut out = vec![0];
    for s in 0..nodes {
        out.push(out[s] + profile.as_slice().get(s).copied().unwrap_or(0));
    }
    out
}

/// Evaluating f at the derived points equals encoding the outer codeword
/// with the local generators. Returns the first differing (node, column).
pub fn check_commutation(code: &LrcCode, f: &LinearizedPoly) -> Result<Option<(usize, usize)>> {
    let field = code.field();
    let msg = f.padded(field, code.k());
    if msg.len() != code.k() {
        return Err(Error::LengthMismatch {
            expected: code.k(),
            got: msg.len(),
        });
    }
    let shards = code.encode(&msg)?;
    for (shard, pts) in shards.iter().zip(code.gamma()) {
        for (col, (y, g)) in shard.payload.iter().zip(pts).enumerate() {
            if f.eval(field, g)? != *y {
                return Ok(Some((shard.index, col)));
            }
        }
    }
    Ok(None)
}
