//! Product-matrix minimum-bandwidth regenerating codes with beta = 1.
//!
//! The K_L message symbols are packed into a symmetric d x d matrix
//!
//! ```text
//!     M = | S   T |      S: r x r symmetric, T: r x (d - r)
//!         | T^t 0 |
//! ```
//!
//! and node i stores psi_i^t M, where psi_i = (1, x_i, ..., x_i^{d-1}) is a
//! Vandermonde row over F_q with x_i = i. All coefficients live in F_q, so
//! encoding commutes with evaluating a linearized polynomial on the message.

use crate::error::{invalid, Error, Result};
use crate::galois::{is_prime, BaseMatrix, ExtField, FieldElement};

/// Rank accumulation profile (a_1, ..., a_n) of a code with uniform rank accumulation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankProfile(Vec<usize>);

impl RankProfile {
    pub fn new(a: Vec<usize>) -> Self {
        Self(a)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of the profile, i.e. the dimension K_L of the code.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// `Some((alpha, r))` when the profile reads alpha, alpha - 1, ..., alpha - r + 1, 0, ..., 0.
    pub fn mbr_shape(&self) -> Option<(usize, usize)> {
        let alpha = *self.0.first()?;
        let r = self.0.iter().take_while(|&&a| a > 0).count();
        let ok = self.0.iter().enumerate().all(|(j, &a)| {
            if j < r {
                a + j == alpha
            } else {
                a == 0
            }
        });
        ok.then_some((alpha, r))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MbrCode {
    n_l: usize,
    r: usize,
    d: usize,
    q: u32,
    psi: BaseMatrix,
}

impl MbrCode {
    pub fn new(n_l: usize, r: usize, d: usize, q: u64) -> Result<Self> {
        if r == 0 {
            return Err(invalid("MBR requires r >= 1"));
        }
        if r > d {
            return Err(invalid(format!("MBR requires r <= d, got r = {r}, d = {d}")));
        }
        if d + 1 > n_l {
            return Err(invalid(format!("MBR requires d <= n_L - 1, got d = {d}, n_L = {n_l}")));
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if q < n_l as u64 {
            return Err(invalid(format!("MBR requires q >= n_L, got q = {q}, n_L = {n_l}")));
        }
        let q32 = q as u32;
        let mut psi = BaseMatrix::zeros(n_l, d);
        for i in 0..n_l {
            let mut v = 1u64;
            for j in 0..d {
                psi.set(i, j, v as u32);
                v = v * i as u64 % q;
            }
        }
        Ok(Self {
            n_l,
            r,
            d,
            q: q32,
            psi,
        })
    }

    pub fn n_l(&self) -> usize {
        self.n_l
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn alpha(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> usize {
        1
    }

    /// K_L = alpha r - C(r, 2) beta.
    pub fn dim(&self) -> usize {
        self.alpha() * self.r - self.r * (self.r - 1) / 2 * self.beta()
    }

    /// Local distance delta = n_L - r + 1.
    pub fn local_distance(&self) -> usize {
        self.n_l - self.r + 1
    }

    pub fn psi(&self) -> &BaseMatrix {
        &self.psi
    }

    /// a_j = alpha - (j - 1) beta for j <= r, zero beyond.
    pub fn profile(&self) -> RankProfile {
        RankProfile::new(
            (0..self.n_l)
                .map(|j| if j < self.r { self.alpha() - j * self.beta() } else { 0 })
                .collect(),
        )
    }

    fn check_field(&self, field: &ExtField) -> Result<()> {
        if field.q() != self.q {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    /// The symmetric d x d message matrix.
    pub fn message_matrix(&self, field: &ExtField, msg: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
        self.check_field(field)?;
        if msg.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: msg.len(),
            });
        }
        let (r, d) = (self.r, self.d);
        let mut m = vec![vec![field.zero(); d]; d];
        let mut next = msg.iter();
        for i in 0..r {
            for j in i..r {
                let v = next.next().expect("length checked").clone();
                m[i][j] = v.clone();
                m[j][i] = v;
            }
        }
        for i in 0..r {
            for j in r..d {
                let v = next.next().expect("length checked").clone();
                m[i][j] = v.clone();
                m[j][i] = v;
            }
        }
        Ok(m)
    }

    pub fn encode(&self, field: &ExtField, msg: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
        let m = self.message_matrix(field, msg)?;
        Ok((0..self.n_l)
            .map(|i| {
                (0..self.d)
                    .map(|col| {
                        let mut acc = field.zero();
                        for (k, row) in m.iter().enumerate() {
                            field.add_scaled(&mut acc, &row[col], self.psi.get(i, k));
                        }
                        acc
                    })
                    .collect()
            })
            .collect())
    }

    /// Data collection from any r nodes. Extra nodes beyond the r lowest
    /// indices are ignored.
    pub fn reconstruct(&self, field: &ExtField, nodes: &[(usize, Vec<FieldElement>)]) -> Result<Vec<FieldElement>> {
        self.check_field(field)?;
        let mut picked: Vec<&(usize, Vec<FieldElement>)> = nodes.iter().collect();
        picked.sort_by_key(|(i, _)| *i);
        if picked.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("duplicate node index"));
        }
        if picked.len() < self.r {
            return Err(Error::InsufficientRank {
                rank: picked.len(),
                needed: self.r,
            });
        }
        picked.truncate(self.r);
        for (i, v) in &picked {
            if *i >= self.n_l {
                return Err(invalid(format!("node index {i} out of range")));
            }
            if v.len() != self.alpha() {
                return Err(Error::LengthMismatch {
                    expected: self.alpha(),
                    got: v.len(),
                });
            }
        }
        let (r, d) = (self.r, self.d);
        let idx: Vec<usize> = picked.iter().map(|(i, _)| *i).collect();
        let sub = self.psi.select_rows(&idx);
        let phi = sub.select_cols(&(0..r).collect::<Vec<_>>());
        let delta = sub.select_cols(&(r..d).collect::<Vec<_>>());
        let phi_inv = phi.inverse(self.q).expect("Vandermonde block with distinct seeds");

        // T = Phi^{-1} Y[:, r..d]
        let t: Vec<Vec<FieldElement>> = (0..r)
            .map(|a| {
                (r..d)
                    .map(|col| {
                        let mut acc = field.zero();
                        for (b, (_, y)) in picked.iter().enumerate() {
                            field.add_scaled(&mut acc, &y[col], phi_inv.get(a, b));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        // S = Phi^{-1} (Y[:, ..r] - Delta T^t)
        let mut rhs: Vec<Vec<FieldElement>> = picked.iter().map(|(_, y)| y[..r].to_vec()).collect();
        for (b, row) in rhs.iter_mut().enumerate() {
            for (col, entry) in row.iter_mut().enumerate() {
                for k in 0..d - r {
                    let coef = delta.get(b, k);
                    if coef != 0 {
                        field.add_scaled(entry, &t[col][k], self.q - coef);
                    }
                }
            }
        }
        let s: Vec<Vec<FieldElement>> = (0..r)
            .map(|a| {
                (0..r)
                    .map(|col| {
                        let mut acc = field.zero();
                        for (b, row) in rhs.iter().enumerate() {
                            field.add_scaled(&mut acc, &row[col], phi_inv.get(a, b));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();

        let mut msg = Vec::with_capacity(self.dim());
        for i in 0..r {
            for j in i..r {
                msg.push(s[i][j].clone());
            }
        }
        for row in &t {
            msg.extend(row.iter().cloned());
        }
        Ok(msg)
    }

    /// The single symbol a helper sends when `failed` is being repaired:
    /// its stored vector projected onto psi_failed.
    pub fn helper_symbol(&self, field: &ExtField, stored: &[FieldElement], failed: usize) -> Result<FieldElement> {
        self.check_field(field)?;
        if failed >= self.n_l {
            return Err(invalid(format!("node index {failed} out of range")));
        }
        if stored.len() != self.alpha() {
            return Err(Error::LengthMismatch {
                expected: self.alpha(),
                got: stored.len(),
            });
        }
        let mut acc = field.zero();
        for (k, s) in stored.iter().enumerate() {
            field.add_scaled(&mut acc, s, self.psi.get(failed, k));
        }
        Ok(acc)
    }

    /// Exact repair of `failed` from one symbol per helper, d helpers.
    pub fn repair(
        &self,
        field: &ExtField,
        failed: usize,
        helpers: &[usize],
        helper_symbols: &[FieldElement],
    ) -> Result<Vec<FieldElement>> {
        self.check_field(field)?;
        if failed >= self.n_l {
            return Err(invalid(format!("node index {failed} out of range")));
        }
        if helpers.len() != self.d {
            return Err(invalid(format!(
                "repair needs exactly d = {} helpers, got {}",
                self.d,
                helpers.len()
            )));
        }
        if helper_symbols.len() != helpers.len() {
            return Err(Error::LengthMismatch {
                expected: helpers.len(),
                got: helper_symbols.len(),
            });
        }
        let mut seen = vec![false; self.n_l];
        for &h in helpers {
            if h == failed {
                return Err(invalid(format!("helper {h} is the failed node")));
            }
            if h >= self.n_l || seen[h] {
                return Err(invalid(format!("invalid or duplicate helper {h}")));
            }
            seen[h] = true;
        }
        let inv = self
            .psi
            .select_rows(helpers)
            .inverse(self.q)
            .expect("any d Vandermonde rows are independent");
        // M psi_failed = Psi_rep^{-1} h; by symmetry this is the failed node's row
        Ok((0..self.d)
            .map(|a| {
                let mut acc = field.zero();
                for (b, h) in helper_symbols.iter().enumerate() {
                    field.add_scaled(&mut acc, h, inv.get(a, b));
                }
                acc
            })
            .collect())
    }

    /// K_L x (n_L alpha) generator over F_q; thick column i spans columns i*alpha .. (i+1)*alpha.
    pub fn generator(&self) -> BaseMatrix {
        let base = ExtField::new(self.q as u64, 1).expect("q checked prime");
        let k = self.dim();
        let mut g = BaseMatrix::zeros(k, self.n_l * self.alpha());
        for row in 0..k {
            let msg: Vec<_> = (0..k).map(|j| base.from_base(u64::from(j == row))).collect();
            let nodes = self.encode(&base, &msg).expect("valid message");
            for (i, node) in nodes.iter().enumerate() {
                for (j, e) in node.iter().enumerate() {
                    g.set(row, i * self.alpha() + j, e.coeffs()[0] as u32);
                }
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_msg(field: &ExtField, k: usize, rng: &mut ChaCha8Rng) -> Vec<FieldElement> {
        (0..k).map(|_| field.from_index(rng.gen_range(0..field.order()))).collect()
    }

    #[test]
    fn parameters() {
        let c = MbrCode::new(3, 2, 2, 3).unwrap();
        assert_eq!((c.alpha(), c.beta(), c.dim()), (2, 1, 3));
        let c = MbrCode::new(5, 3, 4, 7).unwrap();
        assert_eq!((c.alpha(), c.dim()), (4, 9));
        assert!(MbrCode::new(3, 2, 1, 3).is_err());
        assert!(MbrCode::new(3, 2, 3, 3).is_err());
        assert!(MbrCode::new(5, 3, 4, 3).is_err());
        assert!(MbrCode::new(3, 2, 2, 4).is_err());
    }

    #[test]
    fn file_size_identity() {
        for (n, r, d, q) in [(3, 2, 2, 3), (5, 3, 4, 7), (6, 2, 5, 7), (7, 4, 4, 7), (4, 1, 3, 5)] {
            let c = MbrCode::new(n, r, d, q).unwrap();
            assert_eq!(c.dim(), d * r - r * (r - 1) / 2);
            assert_eq!(c.profile().total(), c.dim());
        }
    }

    #[test]
    fn profiles() {
        assert_eq!(MbrCode::new(3, 2, 2, 3).unwrap().profile().as_slice(), &[2, 1, 0]);
        let p = MbrCode::new(5, 3, 4, 7).unwrap().profile();
        assert_eq!(p.as_slice(), &[4, 3, 2, 0, 0]);
        assert_eq!(p.mbr_shape(), Some((4, 3)));
        assert_eq!(RankProfile::new(vec![3, 2, 0]).mbr_shape(), Some((3, 2)));
        assert_eq!(RankProfile::new(vec![3, 1, 0]).mbr_shape(), None);
    }

    #[test]
    fn small_code_matches_direct_product() {
        let f = ExtField::new(3, 6).unwrap();
        let c = MbrCode::new(3, 2, 2, 3).unwrap();
        let msg: Vec<_> = [5u64, 77, 400].iter().map(|&n| f.from_index(n)).collect();
        let nodes = c.encode(&f, &msg).unwrap();
        // psi_i = (1, i); M = [[m1, m2], [m2, m3]]
        for (i, node) in nodes.iter().enumerate() {
            let mut c0 = msg[0].clone();
            f.add_scaled(&mut c0, &msg[1], i as u32);
            let mut c1 = msg[1].clone();
            f.add_scaled(&mut c1, &msg[2], i as u32);
            assert_eq!(node, &vec![c0, c1]);
        }
        let zero = c.encode(&f, &vec![f.zero(); 3]).unwrap();
        assert!(zero.iter().flatten().all(FieldElement::is_zero));
    }

    #[test]
    fn generator_has_full_rank_and_uniform_accumulation() {
        for (n, r, d, q) in [(3, 2, 2, 3), (5, 3, 4, 7)] {
            let c = MbrCode::new(n, r, d, q).unwrap();
            let g = c.generator();
            assert_eq!(g.rank(c.q()), c.dim());
            let prof = c.profile();
            for mask in 0u32..(1 << n) {
                let nodes: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let cols: Vec<usize> = nodes.iter().flat_map(|&i| i * d..(i + 1) * d).collect();
                let expect: usize = prof.as_slice()[..nodes.len()].iter().sum();
                assert_eq!(g.select_cols(&cols).rank(c.q()), expect, "subset {nodes:?}");
            }
        }
    }

    #[test]
    fn reconstruct_from_every_r_subset() {
        let f = ExtField::new(7, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, r, d) in [(3, 2, 2), (5, 3, 4)] {
            let c = MbrCode::new(n, r, d, 7).unwrap();
            for _ in 0..5 {
                let msg = random_msg(&f, c.dim(), &mut rng);
                let nodes = c.encode(&f, &msg).unwrap();
                let all: Vec<_> = nodes.iter().cloned().enumerate().collect();
                assert_eq!(c.reconstruct(&f, &all).unwrap(), msg);
                for subset in (0..n).combinations(r) {
                    let sel: Vec<_> = subset.iter().map(|&i| (i, nodes[i].clone())).collect();
                    assert_eq!(c.reconstruct(&f, &sel).unwrap(), msg);
                }
                assert!(c.reconstruct(&f, &all[..r - 1]).is_err());
            }
        }
    }

    #[test]
    fn repair_every_node_every_helper_set() {
        let f = ExtField::new(7, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, r, d) in [(3, 2, 2), (5, 3, 4)] {
            let c = MbrCode::new(n, r, d, 7).unwrap();
            let msg = random_msg(&f, c.dim(), &mut rng);
            let nodes = c.encode(&f, &msg).unwrap();
            for failed in 0..n {
                let others: Vec<usize> = (0..n).filter(|&i| i != failed).collect();
                for helpers in others.into_iter().combinations(d) {
                    let syms: Vec<_> = helpers
                        .iter()
                        .map(|&h| c.helper_symbol(&f, &nodes[h], failed).unwrap())
                        .collect();
                    assert_eq!(c.repair(&f, failed, &helpers, &syms).unwrap(), nodes[failed]);
                }
            }
        }
    }

    #[test]
    fn repair_argument_errors() {
        let f = ExtField::new(3, 2).unwrap();
        let c = MbrCode::new(3, 2, 2, 3).unwrap();
        let s = vec![f.zero(), f.zero()];
        assert!(c.repair(&f, 0, &[1], &s[..1]).is_err());
        assert!(c.repair(&f, 0, &[0, 1], &s).is_err());
        assert!(c.repair(&f, 0, &[1, 1], &s).is_err());
        let other = ExtField::new(5, 2).unwrap();
        assert_eq!(c.repair(&other, 0, &[1, 2], &s), Err(Error::FieldMismatch));
    }

    #[test]
    fn repair_then_reconstruct() {
        let f = ExtField::new(7, 2).unwrap();
        let c = MbrCode::new(5, 3, 4, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let msg = random_msg(&f, c.dim(), &mut rng);
        let mut nodes = c.encode(&f, &msg).unwrap();
        let helpers = [1, 2, 3, 4];
        let syms: Vec<_> = helpers.iter().map(|&h| c.helper_symbol(&f, &nodes[h], 0).unwrap()).collect();
        nodes[0] = c.repair(&f, 0, &helpers, &syms).unwrap();
        for subset in (0..5).combinations(3) {
            let sel: Vec<_> = subset.iter().map(|&i| (i, nodes[i].clone())).collect();
            assert_eq!(c.reconstruct(&f, &sel).unwrap(), msg);
        }
    }

    #[test]
    fn encoding_is_base_field_linear() {
        let f = ExtField::new(7, 2).unwrap();
        let c = MbrCode::new(5, 3, 4, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for lambda in 0..7u32 {
            let a = random_msg(&f, 9, &mut rng);
            let b = random_msg(&f, 9, &mut rng);
            let combo: Vec<_> = a
                .iter()
                .zip(&b)
                .map(|(x, y)| {
                    let mut z = y.clone();
                    f.add_scaled(&mut z, x, lambda);
                    z
                })
                .collect();
            let lhs = c.encode(&f, &combo).unwrap();
            let ea = c.encode(&f, &a).unwrap();
            let eb = c.encode(&f, &b).unwrap();
            for i in 0..5 {
                for j in 0..4 {
                    let mut z = eb[i][j].clone();
                    f.add_scaled(&mut z, &ea[i][j], lambda);
                    assert_eq!(lhs[i][j], z);
                }
            }
        }
    }
}
