//! Partial sums of a rank accumulation profile and the bounds built on them.
//!
//! The profile (a_1, ..., a_{n_L}) of one local code is extended
//! periodically across the `groups` local codes. Global nodes, when present,
//! are appended after the local ones, each accumulating `global_alpha`.
//! Without global nodes the sequence is semi-infinite.

use crate::error::{invalid, Result};
use crate::mbr::RankProfile;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundContext {
    profile: RankProfile,
    groups: usize,
    globals: usize,
    global_alpha: usize,
}

impl BoundContext {
    /// `groups` disjoint local codes sharing `profile`, no global nodes.
    pub fn new(groups: usize, profile: RankProfile) -> Result<Self> {
        Self::with_globals(groups, 0, 0, profile)
    }

    pub fn with_globals(groups: usize, globals: usize, global_alpha: usize, profile: RankProfile) -> Result<Self> {
        if profile.is_empty() {
            return Err(invalid("empty rank profile"));
        }
        if profile.total() == 0 {
            return Err(invalid("rank profile sums to zero"));
        }
        if groups == 0 {
            return Err(invalid("at least one local group is required"));
        }
        if globals > 0 && global_alpha == 0 {
            return Err(invalid("global nodes need a positive symbol count"));
        }
        Ok(Self {
            profile,
            groups,
            globals,
            global_alpha,
        })
    }

    pub fn profile(&self) -> &RankProfile {
        &self.profile
    }

    pub fn n_l(&self) -> usize {
        self.profile.len()
    }

    pub fn k_l(&self) -> usize {
        self.profile.total()
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn globals(&self) -> usize {
        self.globals
    }

    pub fn n(&self) -> usize {
        self.groups * self.n_l() + self.globals
    }

    fn local_len(&self) -> usize {
        self.groups * self.n_l()
    }

    /// Largest file size the columns can carry: P(n).
    pub fn capacity(&self) -> usize {
        self.groups * self.k_l() + self.globals * self.global_alpha
    }

    /// P(s) within a single period, 0 <= s <= n_L.
    fn period_sum(&self, s: usize) -> usize {
        self.profile.as_slice()[..s].iter().sum()
    }

    /// P(s) = a_1 + ... + a_s.
    pub fn partial_sum(&self, s: usize) -> Result<usize> {
        if s == 0 {
            return Err(invalid("partial sums are defined for s >= 1"));
        }
        Ok(self.partial_sum_unchecked(s))
    }

    fn periodic_sum(&self, s: usize) -> usize {
        let n_l = self.n_l();
        let u1 = (s - 1) / n_l;
        let u0 = s - u1 * n_l;
        u1 * self.k_l() + self.period_sum(u0)
    }

    fn partial_sum_unchecked(&self, s: usize) -> usize {
        if s == 0 {
            return 0;
        }
        if self.globals == 0 || s <= self.local_len() {
            return self.periodic_sum(s);
        }
        let extra = (s - self.local_len()).min(self.globals);
        self.groups * self.k_l() + extra * self.global_alpha
    }

    /// Smallest s with P(s) >= nu.
    pub fn p_inv(&self, nu: usize) -> Result<usize> {
        if nu == 0 {
            return Err(invalid("P^inv is defined for nu >= 1"));
        }
        let k_l = self.k_l();
        if self.globals == 0 || nu <= self.groups * k_l {
            let v1 = (nu - 1) / k_l;
            let v0 = nu - v1 * k_l;
            let s0 = (1..=self.n_l())
                .find(|&s| self.period_sum(s) >= v0)
                .expect("v0 <= K_L is reached within one period");
            return Ok(v1 * self.n_l() + s0);
        }
        let beyond = nu - self.groups * k_l;
        let g = beyond.div_ceil(self.global_alpha);
        if g > self.globals {
            return Err(invalid(format!("nu = {nu} exceeds the capacity {}", self.capacity())));
        }
        Ok(self.local_len() + g)
    }

    fn check_file_size(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.capacity() {
            return Err(invalid(format!(
                "file size K = {k} outside 1..={}",
                self.capacity()
            )));
        }
        Ok(())
    }

    /// n - P^inv(K) + 1, the largest achievable minimum distance.
    pub fn dmin_opt(&self, k: usize) -> Result<usize> {
        self.check_file_size(k)?;
        Ok(self.n() - self.p_inv(k)? + 1)
    }

    /// P^inv through the MBR closed form: K = v1 K_L + v0 and
    /// alpha (nu - 1) - C(nu - 1, 2) < v0 <= alpha nu - C(nu, 2).
    pub fn mbr_p_inv_closed_form(&self, k: usize) -> Result<usize> {
        if k == 0 {
            return Err(invalid("P^inv is defined for nu >= 1"));
        }
        let (alpha, r) = self
            .profile
            .mbr_shape()
            .ok_or_else(|| invalid("profile is not an MBR rank accumulation profile"))?;
        let k_l = self.k_l();
        let v1 = (k - 1) / k_l;
        let v0 = k - v1 * k_l;
        let acc = |nu: usize| alpha * nu - nu * nu.saturating_sub(1) / 2;
        let nu = (1..=r)
            .find(|&nu| acc(nu - 1) < v0 && v0 <= acc(nu))
            .expect("v0 <= K_L = alpha r - C(r, 2)");
        Ok(v1 * self.n_l() + nu)
    }

    fn check_dmin(&self, d_min: usize) -> Result<()> {
        if d_min == 0 || d_min > self.n() {
            return Err(invalid(format!("d_min = {d_min} outside 1..={}", self.n())));
        }
        Ok(())
    }

    /// K <= P(n - d_min + 1), written as (ceil(s / n_L) - 1) K_L + P(l_0).
    pub fn max_file_size(&self, d_min: usize) -> Result<usize> {
        self.check_dmin(d_min)?;
        let s = self.n() - d_min + 1;
        if self.globals > 0 && s > self.local_len() {
            return Ok(self.partial_sum_unchecked(s));
        }
        let (c, l0) = self.ceil_split(s);
        Ok((c - 1) * self.k_l() + self.period_sum(l0))
    }

    /// The MBR specialisation: P(l_0) = alpha mu - C(mu, 2) with mu = min(l_0, r).
    pub fn mbr_max_file_size(&self, d_min: usize) -> Result<usize> {
        self.check_dmin(d_min)?;
        let (alpha, r) = self
            .profile
            .mbr_shape()
            .ok_or_else(|| invalid("profile is not an MBR rank accumulation profile"))?;
        let s = self.n() - d_min + 1;
        if self.globals > 0 && s > self.local_len() {
            return Ok(self.partial_sum_unchecked(s));
        }
        let (c, l0) = self.ceil_split(s);
        let mu = l0.min(r);
        Ok((c - 1) * self.k_l() + alpha * mu - mu * mu.saturating_sub(1) / 2)
    }

    fn ceil_split(&self, s: usize) -> (usize, usize) {
        let n_l = self.n_l();
        let c = s.div_ceil(n_l);
        (c, s - (c - 1) * n_l)
    }
}
