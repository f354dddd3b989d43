//! Locally regenerating codes built in two stages.
//!
//! The K message symbols of F_{q^m} are the coefficients of a linearized
//! polynomial f. Stage one evaluates f at J = t K_L + Delta alpha points
//! theta_1..theta_J (a Gabidulin codeword). Stage two splits the first
//! t K_L evaluations into t groups and encodes each with the local code
//! (MBR or fractional repetition); any remaining evaluations are stored
//! verbatim on Delta global nodes, alpha per node.
//!
//! The local codes only use F_q coefficients, so every stored scalar equals
//! f(gamma) where gamma is the matching column of [theta_1 .. theta_J] G.
//! Decoding collects those (gamma, value) pairs and interpolates f; it works
//! exactly when the gammas reach F_q-rank K.

pub mod verify;

use std::ops::Range;

use crate::bounds::BoundContext;
use crate::error::{invalid, Error, Result};
use crate::frlocal::FrCode;
use crate::gabidulin::GabidulinCode;
use crate::galois::{BaseMatrix, ExtField, FieldElement, SpanBuilder};
use crate::mbr::{MbrCode, RankProfile};

/// The code used inside each local group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalCode {
    Mbr(MbrCode),
    Fr(FrCode),
}

impl LocalCode {
    /// Local length n_L.
    pub fn len(&self) -> usize {
        match self {
            Self::Mbr(c) => c.n_l(),
            Self::Fr(c) => c.n(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn alpha(&self) -> usize {
        match self {
            Self::Mbr(c) => c.alpha(),
            Self::Fr(c) => c.alpha(),
        }
    }

    /// Local dimension K_L.
    pub fn dim(&self) -> usize {
        match self {
            Self::Mbr(c) => c.dim(),
            Self::Fr(c) => c.dim(),
        }
    }

    pub fn q(&self) -> u32 {
        match self {
            Self::Mbr(c) => c.q(),
            Self::Fr(c) => c.q(),
        }
    }

    /// Locality r: nodes needed to rebuild the local message.
    pub fn r(&self) -> usize {
        match self {
            Self::Mbr(c) => c.r(),
            Self::Fr(c) => c.k_rec(),
        }
    }

    /// delta, from n_L = r + delta - 1.
    pub fn local_distance(&self) -> usize {
        self.len() - self.r() + 1
    }

    pub fn profile(&self) -> RankProfile {
        match self {
            Self::Mbr(c) => c.profile(),
            Self::Fr(c) => c.profile(),
        }
    }

    pub fn encode(&self, field: &ExtField, msg: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
        match self {
            Self::Mbr(c) => c.encode(field, msg),
            Self::Fr(c) => c.encode(field, msg),
        }
    }

    pub fn reconstruct(&self, field: &ExtField, nodes: &[(usize, Vec<FieldElement>)]) -> Result<Vec<FieldElement>> {
        match self {
            Self::Mbr(c) => c.reconstruct(field, nodes),
            Self::Fr(c) => c.reconstruct(field, nodes),
        }
    }

    pub fn generator(&self) -> BaseMatrix {
        match self {
            Self::Mbr(c) => c.generator(),
            Self::Fr(c) => c.generator(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShardRole {
    Local { group: usize, position: usize },
    Global { slot: usize },
}

/// One node's content: a thick column of the codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shard {
    pub index: usize,
    pub role: ShardRole,
    pub payload: Vec<FieldElement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairPath {
    /// Product-matrix repair inside the group, one symbol per helper.
    Local,
    /// Uncoded copy of stored symbols inside the group.
    Transfer,
    /// Full decode of the message and re-encode of the lost shard.
    DecodeReencode,
}

impl RepairPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Local => "local",
            Self::Transfer => "transfer",
            Self::DecodeReencode => "decode-reencode",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairReport {
    pub shard: Shard,
    pub path: RepairPath,
    /// Helper nodes, ascending.
    pub helpers: Vec<usize>,
    /// Symbols downloaded from each helper, aligned with `helpers`.
    pub per_helper: Vec<usize>,
    pub downloaded_symbols: usize,
    /// F_q multiply-accumulate operations on F_{q^m} symbols, when tracked.
    pub arithmetic_ops: Option<usize>,
    /// Why the local path was skipped, if the decode fallback was used.
    pub local_failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct LrcCode {
    local: LocalCode,
    groups: usize,
    globals: usize,
    k: usize,
    outer: GabidulinCode,
    /// Derived evaluation points, alpha per node.
    gamma: Vec<Vec<FieldElement>>,
}

impl LrcCode {
    /// All-symbol locality: t groups, no global nodes. `m` defaults to t K_L.
    pub fn all_symbol(groups: usize, local: LocalCode, k: usize, m: Option<usize>) -> Result<Self> {
        Self::build(groups, 0, local, k, m)
    }

    /// Information locality: t groups plus `globals` nodes holding raw outer
    /// symbols. `m` defaults to t K_L + Delta alpha.
    pub fn info_local(groups: usize, globals: usize, local: LocalCode, k: usize, m: Option<usize>) -> Result<Self> {
        Self::build(groups, globals, local, k, m)
    }

    fn build(groups: usize, globals: usize, local: LocalCode, k: usize, m: Option<usize>) -> Result<Self> {
        if groups == 0 {
            return Err(invalid("at least one local group (t >= 1) is required"));
        }
        let k_l = local.dim();
        let alpha = local.alpha();
        if k == 0 || k > groups * k_l {
            return Err(invalid(format!(
                "file size must satisfy 1 <= K <= tK_L = {}, got K = {k}",
                groups * k_l
            )));
        }
        let outer_len = groups * k_l + globals * alpha;
        let m = m.unwrap_or(outer_len);
        if m < outer_len {
            let rule = if globals == 0 { "m ≥ tK_L" } else { "m ≥ tK_L + Δα" };
            return Err(invalid(format!("{rule} violated: m = {m}, need at least {outer_len}")));
        }
        let field = ExtField::new(local.q() as u64, m)?;
        let outer = GabidulinCode::new(&field, outer_len, k)?;

        let g = local.generator();
        let n_l = local.len();
        let mut gamma = Vec::with_capacity(groups * n_l + globals);
        for grp in 0..groups {
            for pos in 0..n_l {
                let pts = (0..alpha)
                    .map(|c| {
                        let mut e = field.zero();
                        for s in 0..k_l {
                            field.add_scaled(&mut e, &outer.points()[grp * k_l + s], g.get(s, pos * alpha + c));
                        }
                        e
                    })
                    .collect();
                gamma.push(pts);
            }
        }
        for slot in 0..globals {
            let base = groups * k_l + slot * alpha;
            gamma.push((0..alpha).map(|c| outer.points()[base + c].clone()).collect());
        }
        Ok(Self {
            local,
            groups,
            globals,
            k,
            outer,
            gamma,
        })
    }

    pub fn local(&self) -> &LocalCode {
        &self.local
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn globals(&self) -> usize {
        self.globals
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.groups * self.local.len() + self.globals
    }

    pub fn alpha(&self) -> usize {
        self.local.alpha()
    }

    pub fn field(&self) -> &ExtField {
        self.outer.field()
    }

    pub fn outer(&self) -> &GabidulinCode {
        &self.outer
    }

    /// Derived evaluation point of every stored scalar, per node.
    pub fn gamma(&self) -> &[Vec<FieldElement>] {
        &self.gamma
    }

    pub fn role(&self, index: usize) -> Option<ShardRole> {
        let n_l = self.local.len();
        if index < self.groups * n_l {
            Some(ShardRole::Local {
                group: index / n_l,
                position: index % n_l,
            })
        } else if index < self.n() {
            Some(ShardRole::Global {
                slot: index - self.groups * n_l,
            })
        } else {
            None
        }
    }

    /// Node indices of local group `group`.
    pub fn group_nodes(&self, group: usize) -> Range<usize> {
        let n_l = self.local.len();
        group * n_l..(group + 1) * n_l
    }

    /// Outer-codeword positions feeding group `group`.
    pub fn group_outer_range(&self, group: usize) -> Range<usize> {
        let k_l = self.local.dim();
        group * k_l..(group + 1) * k_l
    }

    pub fn bound_context(&self) -> BoundContext {
        BoundContext::with_globals(self.groups, self.globals, self.alpha(), self.local.profile())
            .expect("code parameters were validated at construction")
    }

    /// Generator over F_q of the second stage: block diagonal with one local
    /// generator per group, followed by an identity block for global nodes.
    /// Rows index outer symbols; thick column i spans columns i*alpha..(i+1)*alpha.
    pub fn generator(&self) -> BaseMatrix {
        let alpha = self.alpha();
        let (k_l, n_l) = (self.local.dim(), self.local.len());
        let g = self.local.generator();
        let mut out = BaseMatrix::zeros(self.outer.len(), self.n() * alpha);
        for grp in 0..self.groups {
            for s in 0..k_l {
                for c in 0..n_l * alpha {
                    out.set(grp * k_l + s, grp * n_l * alpha + c, g.get(s, c));
                }
            }
        }
        for slot in 0..self.globals {
            for c in 0..alpha {
                let row = self.groups * k_l + slot * alpha + c;
                let col = (self.groups * n_l + slot) * alpha + c;
                out.set(row, col, 1);
            }
        }
        out
    }

    pub fn encode(&self, msg: &[FieldElement]) -> Result<Vec<Shard>> {
        let outer = self.outer.encode(msg)?;
        Ok(self.place(&outer))
    }

    /// Second stage only: split an outer codeword across the nodes.
    fn place(&self, outer: &[FieldElement]) -> Vec<Shard> {
        let field = self.field();
        let mut shards = Vec::with_capacity(self.n());
        for grp in 0..self.groups {
            let nodes = self
                .local
                .encode(field, &outer[self.group_outer_range(grp)])
                .expect("group slice has K_L symbols");
            for (pos, payload) in nodes.into_iter().enumerate() {
                shards.push(Shard {
                    index: shards.len(),
                    role: ShardRole::Local { group: grp, position: pos },
                    payload,
                });
            }
        }
        let alpha = self.alpha();
        let base = self.groups * self.local.dim();
        for slot in 0..self.globals {
            shards.push(Shard {
                index: shards.len(),
                role: ShardRole::Global { slot },
                payload: outer[base + slot * alpha..base + (slot + 1) * alpha].to_vec(),
            });
        }
        shards
    }

    fn check_shards(&self, shards: &[Shard]) -> Result<()> {
        let mut seen = vec![false; self.n()];
        for s in shards {
            if s.index >= self.n() {
                return Err(invalid(format!("shard index {} out of range", s.index)));
            }
            if seen[s.index] {
                return Err(invalid(format!("duplicate shard {}", s.index)));
            }
            seen[s.index] = true;
            if s.payload.len() != self.alpha() {
                return Err(Error::LengthMismatch {
                    expected: self.alpha(),
                    got: s.payload.len(),
                });
            }
            if s.payload.iter().any(|e| !self.field().contains(e)) {
                return Err(Error::FieldMismatch);
            }
        }
        Ok(())
    }

    /// F_q-rank of the derived points held by `nodes`.
    pub fn rank_of(&self, nodes: &[usize]) -> usize {
        let pts: Vec<FieldElement> = nodes.iter().flat_map(|&i| self.gamma[i].iter().cloned()).collect();
        self.field().rank_over_base(&pts)
    }

    /// Whether the message is recoverable from exactly these nodes.
    pub fn decodable(&self, nodes: &[usize]) -> bool {
        self.rank_of(nodes) >= self.k
    }

    /// Recovers the message from every supplied shard; surplus symbols are
    /// consistency-checked.
    pub fn decode(&self, shards: &[Shard]) -> Result<Vec<FieldElement>> {
        self.check_shards(shards)?;
        let known: Vec<(FieldElement, FieldElement)> = shards
            .iter()
            .flat_map(|s| self.gamma[s.index].iter().cloned().zip(s.payload.iter().cloned()))
            .collect();
        self.outer.erasure_decode(&known)
    }

    /// The outer symbols of one group, rebuilt from that group's shards alone.
    pub fn local_decode(&self, group: usize, shards: &[Shard]) -> Result<Vec<FieldElement>> {
        if group >= self.groups {
            return Err(invalid(format!("group {group} out of range")));
        }
        self.check_shards(shards)?;
        let nodes = self.group_nodes(group);
        let members: Vec<(usize, Vec<FieldElement>)> = shards
            .iter()
            .filter(|s| nodes.contains(&s.index))
            .map(|s| (s.index - nodes.start, s.payload.clone()))
            .collect();
        self.local.reconstruct(self.field(), &members)
    }

    /// Rebuilds shard `failed` from the available shards. Local nodes use the
    /// local code first; global nodes, and local nodes whose group cannot
    /// serve the repair, fall back to decode and re-encode.
    pub fn repair(&self, failed: usize, shards: &[Shard]) -> Result<RepairReport> {
        let role = self
            .role(failed)
            .ok_or_else(|| invalid(format!("node index {failed} out of range")))?;
        let available: Vec<&Shard> = shards.iter().filter(|s| s.index != failed).collect();
        self.check_shards(shards)?;
        let local_failure = match role {
            ShardRole::Local { group, position } => match self.repair_local(group, position, failed, &available) {
                Ok(report) => return Ok(report),
                Err(e) => Some(e.to_string()),
            },
            ShardRole::Global { .. } => None,
        };
        self.repair_by_decode(failed, &available, local_failure)
    }

    fn repair_local(&self, group: usize, position: usize, failed: usize, available: &[&Shard]) -> Result<RepairReport> {
        let field = self.field();
        let nodes = self.group_nodes(group);
        let mut members: Vec<&Shard> = available.iter().copied().filter(|s| nodes.contains(&s.index)).collect();
        members.sort_by_key(|s| s.index);
        let role = ShardRole::Local { group, position };
        match &self.local {
            LocalCode::Mbr(code) => {
                let d = code.d();
                if members.len() < d {
                    return Err(Error::Unrepairable(format!(
                        "group {group} has {} surviving nodes, repair needs d = {d}",
                        members.len()
                    )));
                }
                let helpers: Vec<&Shard> = members[..d].to_vec();
                let positions: Vec<usize> = helpers.iter().map(|s| s.index - nodes.start).collect();
                let symbols = helpers
                    .iter()
                    .map(|s| code.helper_symbol(field, &s.payload, position))
                    .collect::<Result<Vec<_>>>()?;
                let payload = code.repair(field, position, &positions, &symbols)?;
                Ok(RepairReport {
                    shard: Shard { index: failed, role, payload },
                    path: RepairPath::Local,
                    helpers: helpers.iter().map(|s| s.index).collect(),
                    per_helper: vec![code.beta(); d],
                    downloaded_symbols: d * code.beta(),
                    arithmetic_ops: Some(d * code.alpha() + d * d),
                    local_failure: None,
                })
            }
            LocalCode::Fr(code) => {
                let avail: Vec<(usize, &[FieldElement])> =
                    members.iter().map(|s| (s.index - nodes.start, s.payload.as_slice())).collect();
                let rep = code.repair(position, &avail)?;
                let mut helpers: Vec<usize> = rep.helpers.iter().map(|h| h + nodes.start).collect();
                helpers.sort_unstable();
                helpers.dedup();
                let per_helper = helpers
                    .iter()
                    .map(|h| rep.helpers.iter().filter(|&&x| x + nodes.start == *h).count())
                    .collect();
                Ok(RepairReport {
                    shard: Shard {
                        index: failed,
                        role,
                        payload: rep.content,
                    },
                    path: RepairPath::Transfer,
                    helpers,
                    per_helper,
                    downloaded_symbols: rep.transferred,
                    arithmetic_ops: Some(0),
                    local_failure: None,
                })
            }
        }
    }

    fn repair_by_decode(&self, failed: usize, available: &[&Shard], local_failure: Option<String>) -> Result<RepairReport> {
        let mut sorted: Vec<&Shard> = available.to_vec();
        sorted.sort_by_key(|s| s.index);
        // shortest ascending prefix whose derived points reach rank K
        let mut span = SpanBuilder::new(self.field());
        let mut used = Vec::new();
        for s in sorted {
            if span.rank() >= self.k {
                break;
            }
            for g in &self.gamma[s.index] {
                span.insert(g);
            }
            used.push(s.clone());
        }
        if span.rank() < self.k {
            let mut msg = format!("available shards reach rank {} < K = {}", span.rank(), self.k);
            if let Some(local) = &local_failure {
                msg = format!("{local}; decode fallback: {msg}");
            }
            return Err(Error::Unrepairable(msg));
        }
        let u = self.decode(&used)?;
        let shard = self.encode(&u)?.swap_remove(failed);
        let alpha = self.alpha();
        Ok(RepairReport {
            shard,
            path: RepairPath::DecodeReencode,
            helpers: used.iter().map(|s| s.index).collect(),
            per_helper: vec![alpha; used.len()],
            downloaded_symbols: used.len() * alpha,
            arithmetic_ops: None,
            local_failure,
        })
    }
}
