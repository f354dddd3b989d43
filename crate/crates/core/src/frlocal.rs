//! Fractional-repetition codes built from t-designs.
//!
//! A message of K_FR symbols is first Reed-Solomon encoded into b symbols,
//! one per block of the design. Node i (point x_i) stores the symbols of
//! every block containing x_i. Repair copies symbols verbatim from other
//! holders, with no arithmetic.

use std::collections::HashMap;

use itertools::Itertools;

use crate::error::{invalid, Error, Result};
use crate::galois::{is_prime, BaseMatrix, ExtField, FieldElement};
use crate::mbr::RankProfile;

/// Largest point count for which uniform accumulation is checked exhaustively.
pub const MAX_EXHAUSTIVE_POINTS: usize = 24;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// A verified t-(n, w, lambda) design on points 1..=n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    t: usize,
    n_pts: usize,
    w: usize,
    lambda: usize,
    blocks: Vec<Vec<usize>>,
}

impl Design {
    /// Checks every t-subset of points against lambda; the first violating
    /// subset (lexicographic order) is reported.
    pub fn verify(n_pts: usize, blocks: Vec<Vec<usize>>, t: usize, lambda: usize) -> Result<Self> {
        let blocks = normalize_blocks(n_pts, blocks)?;
        let w = blocks[0].len();
        if t == 0 || t > w {
            return Err(invalid(format!("design strength t = {t} must satisfy 1 <= t <= w = {w}")));
        }
        if lambda == 0 {
            return Err(invalid("design index lambda must be positive"));
        }
        let counts = count_subsets(&blocks, t);
        for subset in (1..=n_pts).combinations(t) {
            let count = counts.get(&subset).copied().unwrap_or(0);
            if count != lambda {
                return Err(Error::DesignViolation {
                    subset,
                    count,
                    expected: lambda,
                });
            }
        }
        let design = Self {
            t,
            n_pts,
            w,
            lambda,
            blocks,
        };
        for s in 0..=t {
            design.lambda_formula(s)?;
        }
        Ok(design)
    }

    /// Parses one block per line (space-separated, 1-based points; `#` starts
    /// a comment) and keeps the largest strength t for which the blocks form
    /// a design.
    pub fn parse(text: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let block = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| invalid(format!("line {}: bad point `{tok}`", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
        }
        let n_pts = blocks.iter().flatten().copied().max().unwrap_or(0);
        Self::infer(n_pts, blocks)
    }

    /// Strongest design structure the blocks carry.
    pub fn infer(n_pts: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let normalized = normalize_blocks(n_pts, blocks)?;
        let w = normalized[0].len();
        for t in (1..=w).rev() {
            let counts = count_subsets(&normalized, t);
            let lambda = counts.get(&(1..=t).collect::<Vec<_>>()).copied().unwrap_or(0);
            if lambda == 0 {
                continue;
            }
            if let Ok(d) = Self::verify(n_pts, normalized.clone(), t, lambda) {
                return Ok(d);
            }
        }
        Err(invalid("blocks do not form a t-design for any t >= 1"))
    }

    /// The Fano plane, 2-(7, 3, 1).
    pub fn fano() -> Self {
        let blocks = vec![
            vec![1, 2, 3],
            vec![1, 4, 5],
            vec![1, 6, 7],
            vec![2, 4, 6],
            vec![2, 5, 7],
            vec![3, 4, 7],
            vec![3, 5, 6],
        ];
        Self::verify(7, blocks, 2, 1).expect("Fano plane is a 2-(7,3,1) design")
    }

    /// All w-subsets of n points, as a t-design.
    pub fn complete(n_pts: usize, w: usize, t: usize) -> Result<Self> {
        let blocks: Vec<Vec<usize>> = (1..=n_pts).combinations(w).collect();
        let lambda = binomial(n_pts - t, w - t) as usize;
        Self::verify(n_pts, blocks, t, lambda)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n_pts(&self) -> usize {
        self.n_pts
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn b(&self) -> usize {
        self.blocks.len()
    }

    /// Number of blocks containing every point of `points`.
    pub fn count_containing(&self, points: &[usize]) -> usize {
        self.blocks
            .iter()
            .filter(|b| points.iter().all(|p| b.binary_search(p).is_ok()))
            .count()
    }

    fn lambda_formula(&self, s: usize) -> Result<usize> {
        let num = self.lambda as u128 * binomial(self.n_pts - s, self.t - s);
        let den = binomial(self.w - s, self.t - s);
        if !num.is_multiple_of(den) {
            return Err(invalid(format!("lambda_{s} = {num}/{den} is not an integer")));
        }
        Ok((num / den) as usize)
    }

    /// lambda_s = lambda C(n - s, t - s) / C(w - s, t - s), confirmed against
    /// direct counts on every s-subset.
    pub fn lambda_s(&self, s: usize) -> Result<usize> {
        if s > self.t {
            return Err(invalid(format!("lambda_s needs s <= t = {}, got {s}", self.t)));
        }
        let value = self.lambda_formula(s)?;
        for subset in (1..=self.n_pts).combinations(s) {
            let count = self.count_containing(&subset);
            if count != value {
                return Err(Error::DesignViolation {
                    subset,
                    count,
                    expected: value,
                });
            }
        }
        Ok(value)
    }

    /// |N_1 u ... u N_s| for s <= t nodes, by inclusion-exclusion over lambda_j.
    pub fn union_size(&self, s: usize) -> Result<usize> {
        if s > self.t {
            return Err(invalid(format!("union sizes are uniform only up to s = t = {}", self.t)));
        }
        let mut total: i128 = 0;
        for j in 1..=s {
            let term = binomial(s, j) as i128 * self.lambda_formula(j)? as i128;
            total += if j % 2 == 1 { term } else { -term };
        }
        Ok(total as usize)
    }
}

fn normalize_blocks(n_pts: usize, blocks: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    if blocks.is_empty() {
        return Err(invalid("design has no blocks"));
    }
    let mut out = Vec::with_capacity(blocks.len());
    let w = blocks[0].len();
    for mut b in blocks {
        b.sort_unstable();
        if b.len() != w || w == 0 {
            return Err(invalid("blocks must all have the same positive size"));
        }
        if b.windows(2).any(|p| p[0] == p[1]) {
            return Err(invalid(format!("block {b:?} repeats a point")));
        }
        if b[0] == 0 || b[w - 1] > n_pts {
            return Err(invalid(format!("block {b:?} has points outside 1..={n_pts}")));
        }
        out.push(b);
    }
    if w >= n_pts {
        return Err(invalid(format!("block size w = {w} must be below the point count {n_pts}")));
    }
    Ok(out)
}

fn count_subsets(blocks: &[Vec<usize>], t: usize) -> HashMap<Vec<usize>, usize> {
    let mut counts = HashMap::new();
    for b in blocks {
        for sub in b.iter().copied().combinations(t) {
            *counts.entry(sub).or_insert(0) += 1;
        }
    }
    counts
}

/// Outcome of a repair-by-transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrRepair {
    /// Node that supplied each lost symbol, in storage order.
    pub helpers: Vec<usize>,
    pub content: Vec<FieldElement>,
    pub transferred: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrCode {
    design: Design,
    k_fr: usize,
    k_rec: usize,
    q: u32,
    /// 0-based block (symbol) indices stored by each node, ascending.
    node_symbols: Vec<Vec<usize>>,
    /// node -> helper for each of its symbols.
    repair_table: Vec<Vec<usize>>,
    profile: RankProfile,
}

impl FrCode {
    pub fn new(design: Design, k_fr: usize, q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let b = design.b();
        if (q as usize) < b {
            return Err(invalid(format!("FR code needs q >= b, got q = {q}, b = {b}")));
        }
        if k_fr == 0 || k_fr > b {
            return Err(invalid(format!("K_FR = {k_fr} outside 1..={b}")));
        }
        if b > 64 {
            return Err(invalid(format!("designs with more than 64 blocks are not supported, got {b}")));
        }
        if design.n_pts() > MAX_EXHAUSTIVE_POINTS {
            return Err(invalid(format!(
                "designs on more than {MAX_EXHAUSTIVE_POINTS} points are not supported"
            )));
        }
        // smallest k <= t with |N_1 u .. u N_{k-1}| < K_FR <= |N_1 u .. u N_k|
        let mut k_rec = None;
        for k in 1..=design.t() {
            if design.union_size(k)? >= k_fr {
                k_rec = Some(k);
                break;
            }
        }
        let k_rec = k_rec.ok_or_else(|| {
            invalid(format!(
                "no k <= t = {} has a k-node union of at least K_FR = {k_fr} symbols",
                design.t()
            ))
        })?;

        let n = design.n_pts();
        let node_symbols: Vec<Vec<usize>> = (1..=n)
            .map(|p| {
                design
                    .blocks()
                    .iter()
                    .enumerate()
                    .filter(|(_, blk)| blk.binary_search(&p).is_ok())
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        let repair_table = (0..n)
            .map(|i| {
                node_symbols[i]
                    .iter()
                    .map(|&j| {
                        (0..n)
                            .find(|&h| h != i && node_symbols[h].contains(&j))
                            .expect("blocks have at least two points")
                    })
                    .collect()
            })
            .collect();
        let profile = capped_profile(&node_symbols, k_fr)?;
        Ok(Self {
            design,
            k_fr,
            k_rec,
            q: q as u32,
            node_symbols,
            repair_table,
            profile,
        })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.design.n_pts()
    }

    /// Symbols per node, lambda_1.
    pub fn alpha(&self) -> usize {
        self.node_symbols[0].len()
    }

    pub fn dim(&self) -> usize {
        self.k_fr
    }

    pub fn k_rec(&self) -> usize {
        self.k_rec
    }

    pub fn node_symbols(&self) -> &[Vec<usize>] {
        &self.node_symbols
    }

    pub fn repair_table(&self) -> &[Vec<usize>] {
        &self.repair_table
    }

    /// Rank accumulation profile after the K_FR cap; uniformity was checked
    /// over every node subset at construction.
    pub fn profile(&self) -> RankProfile {
        self.profile.clone()
    }

    fn check_field(&self, field: &ExtField) -> Result<()> {
        if field.q() != self.q {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    /// Reed-Solomon [b, K_FR]: c_j = sum_i msg_i j^i.
    pub fn mds_encode(&self, field: &ExtField, msg: &[FieldElement]) -> Result<Vec<FieldElement>> {
        self.check_field(field)?;
        if msg.len() != self.k_fr {
            return Err(Error::LengthMismatch {
                expected: self.k_fr,
                got: msg.len(),
            });
        }
        let q = self.q as u64;
        Ok((0..self.design.b())
            .map(|j| {
                let mut acc = field.zero();
                let mut pw = 1u64;
                for u in msg {
                    field.add_scaled(&mut acc, u, pw as u32);
                    pw = pw * j as u64 % q;
                }
                acc
            })
            .collect())
    }

    pub fn encode(&self, field: &ExtField, msg: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
        let c = self.mds_encode(field, msg)?;
        Ok(self
            .node_symbols
            .iter()
            .map(|syms| syms.iter().map(|&j| c[j].clone()).collect())
            .collect())
    }

    /// Recovers the message from the distinct symbols held by `nodes`.
    pub fn reconstruct(&self, field: &ExtField, nodes: &[(usize, Vec<FieldElement>)]) -> Result<Vec<FieldElement>> {
        self.check_field(field)?;
        let mut symbols: Vec<Option<FieldElement>> = vec![None; self.design.b()];
        for (i, content) in nodes {
            let syms = self
                .node_symbols
                .get(*i)
                .ok_or_else(|| invalid(format!("node index {i} out of range")))?;
            if content.len() != syms.len() {
                return Err(Error::LengthMismatch {
                    expected: syms.len(),
                    got: content.len(),
                });
            }
            for (&j, v) in syms.iter().zip(content) {
                match &symbols[j] {
                    Some(prev) if prev != v => return Err(Error::InconsistentData { index: *i }),
                    _ => symbols[j] = Some(v.clone()),
                }
            }
        }
        let known: Vec<usize> = (0..symbols.len()).filter(|&j| symbols[j].is_some()).collect();
        if known.len() < self.k_fr {
            return Err(Error::InsufficientRank {
                rank: known.len(),
                needed: self.k_fr,
            });
        }
        let pts = &known[..self.k_fr];
        let q = self.q as u64;
        let rows: Vec<Vec<u32>> = pts
            .iter()
            .map(|&j| {
                let mut pw = 1u64;
                (0..self.k_fr)
                    .map(|_| {
                        let v = pw as u32;
                        pw = pw * j as u64 % q;
                        v
                    })
                    .collect()
            })
            .collect();
        let inv = BaseMatrix::from_rows(&rows)
            .inverse(self.q)
            .expect("Vandermonde on distinct points");
        let msg: Vec<FieldElement> = (0..self.k_fr)
            .map(|a| {
                let mut acc = field.zero();
                for (b, &j) in pts.iter().enumerate() {
                    field.add_scaled(&mut acc, symbols[j].as_ref().unwrap(), inv.get(a, b));
                }
                acc
            })
            .collect();
        // remaining symbols must agree with the decoded message
        let c = self.mds_encode(field, &msg)?;
        for &j in &known[self.k_fr..] {
            if symbols[j].as_ref() != Some(&c[j]) {
                let holder = nodes
                    .iter()
                    .find(|(i, _)| self.node_symbols[*i].contains(&j))
                    .map_or(0, |(i, _)| *i);
                return Err(Error::InconsistentData { index: holder });
            }
        }
        Ok(msg)
    }

    /// Repair by transfer: each lost symbol is copied from the table's helper
    /// when it is available, otherwise from the lowest-index available holder.
    pub fn repair(&self, failed: usize, available: &[(usize, &[FieldElement])]) -> Result<FrRepair> {
        if failed >= self.n() {
            return Err(invalid(format!("node index {failed} out of range")));
        }
        let lookup = |node: usize| available.iter().find(|(i, _)| *i == node && node != failed);
        let mut helpers = Vec::with_capacity(self.alpha());
        let mut content = Vec::with_capacity(self.alpha());
        for (pos, &j) in self.node_symbols[failed].iter().enumerate() {
            let preferred = self.repair_table[failed][pos];
            let source = lookup(preferred).or_else(|| {
                let mut holders: Vec<usize> = (0..self.n())
                    .filter(|&h| h != failed && self.node_symbols[h].contains(&j))
                    .collect();
                holders.sort_unstable();
                holders.into_iter().find_map(lookup)
            });
            let (h, stored) = source.ok_or_else(|| {
                Error::Unrepairable(format!("symbol {} of node {failed} has no surviving holder", j + 1))
            })?;
            let at = self.node_symbols[*h]
                .iter()
                .position(|&s| s == j)
                .expect("holder stores the symbol");
            if stored.len() != self.node_symbols[*h].len() {
                return Err(Error::LengthMismatch {
                    expected: self.node_symbols[*h].len(),
                    got: stored.len(),
                });
            }
            helpers.push(*h);
            content.push(stored[at].clone());
        }
        Ok(FrRepair {
            transferred: content.len(),
            helpers,
            content,
        })
    }

    /// K_FR x (n alpha) generator over F_q.
    pub fn generator(&self) -> BaseMatrix {
        let alpha = self.alpha();
        let q = self.q as u64;
        let mut g = BaseMatrix::zeros(self.k_fr, self.n() * alpha);
        for (i, syms) in self.node_symbols.iter().enumerate() {
            for (pos, &j) in syms.iter().enumerate() {
                let mut pw = 1u64;
                for row in 0..self.k_fr {
                    g.set(row, i * alpha + pos, pw as u32);
                    pw = pw * j as u64 % q;
                }
            }
        }
        g
    }
}

/// Profile from exhaustive union enumeration with the cap min(|union|, K_FR).
fn capped_profile(node_symbols: &[Vec<usize>], k_fr: usize) -> Result<RankProfile> {
    let n = node_symbols.len();
    let masks: Vec<u64> = node_symbols
        .iter()
        .map(|s| s.iter().fold(0u64, |m, &j| m | 1 << j))
        .collect();
    // per size: (value, witness subset) of the first subset seen
    let mut seen: Vec<Option<(usize, u32)>> = vec![None; n + 1];
    for subset in 0u32..(1u32 << n) {
        let size = subset.count_ones() as usize;
        let union = (0..n)
            .filter(|i| subset >> i & 1 == 1)
            .fold(0u64, |m, i| m | masks[i]);
        let capped = (union.count_ones() as usize).min(k_fr);
        match seen[size] {
            None => seen[size] = Some((capped, subset)),
            Some((v, w)) if v != capped => {
                let list = |s: u32| (0..n).filter(|i| s >> i & 1 == 1).collect::<Vec<_>>();
                let (low, high) = if v < capped { (w, subset) } else { (subset, w) };
                return Err(Error::NonUniformProfile {
                    size,
                    low: list(low),
                    high: list(high),
                });
            }
            _ => {}
        }
    }
    let rho: Vec<usize> = seen.iter().map(|s| s.map_or(0, |(v, _)| v)).collect();
    Ok(RankProfile::new((1..=n).map(|i| rho[i] - rho[i - 1]).collect()))
}
