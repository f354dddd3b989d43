//! Prime fields F_q and their extensions F_{q^m}.
//!
//! An element of F_{q^m} is stored as its coordinate vector over the
//! polynomial basis 1, x, ..., x^{m-1}, constant term first. The q-power
//! (Frobenius) map is F_q-linear, so every power of it is cached as an
//! m x m base-field matrix when the field is built.

pub(crate) mod matrix;
pub(crate) mod poly;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
pub use matrix::BaseMatrix;

/// Largest supported field order.
pub const FIELD_ORDER_BUDGET: u128 = 1 << 40;

/// Element of F_{q^m}: m base-field coefficients, x^0 first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    coeffs: Vec<u16>,
}

impl FieldElement {
    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
    Pow(u64),
}

struct Inner {
    q: u32,
    m: usize,
    /// Monic modulus, degree m, constant term first (length m + 1).
    modulus: Vec<u32>,
    /// `frobenius[i]` maps coordinates of a to coordinates of a^{q^i}, 0 <= i < m.
    frobenius: Vec<BaseMatrix>,
}

/// The field F_{q^m}, cheap to clone.
#[derive(Clone)]
pub struct ExtField(Arc<Inner>);

impl PartialEq for ExtField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.q == other.0.q && self.0.modulus == other.0.modulus)
    }
}

impl Eq for ExtField {}

impl fmt::Debug for ExtField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtField")
            .field("q", &self.0.q)
            .field("m", &self.0.m)
            .field("modulus", &self.0.modulus)
            .finish()
    }
}

impl ExtField {
    /// Builds F_{q^m} using the lexicographically smallest monic irreducible
    /// modulus, comparing the coefficient sequence (c_0, ..., c_{m-1}) with
    /// the constant term most significant.
    pub fn new(q: u64, m: usize) -> Result<Self> {
        if !poly::is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if m == 0 {
            return Err(Error::InvalidParameters("extension degree m must be >= 1".into()));
        }
        if q > u16::MAX as u64 {
            return Err(Error::InvalidParameters(format!(
                "q = {q} does not fit the 16-bit coefficient encoding"
            )));
        }
        let order = (q as u128).checked_pow(m as u32);
        if order.is_none_or(|o| o > FIELD_ORDER_BUDGET) {
            return Err(Error::FieldTooLarge { q, m });
        }
        let modulus = Self::search_modulus(q, m);
        Ok(Self::with_modulus_unchecked(q as u32, modulus))
    }

    /// Builds the field from an explicit monic modulus (constant term first).
    pub fn with_modulus(q: u64, modulus: &[u32]) -> Result<Self> {
        if !poly::is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if q > u16::MAX as u64 {
            return Err(Error::InvalidParameters(format!(
                "q = {q} does not fit the 16-bit coefficient encoding"
            )));
        }
        let m = modulus.len().saturating_sub(1);
        if m == 0 || modulus[m] != 1 || modulus.iter().any(|&c| c as u64 >= q) {
            return Err(Error::InvalidParameters("modulus must be monic of degree >= 1".into()));
        }
        if (q as u128).checked_pow(m as u32).is_none_or(|o| o > FIELD_ORDER_BUDGET) {
            return Err(Error::FieldTooLarge { q, m });
        }
        let p: poly::Poly = modulus.iter().map(|&c| c as u64).collect();
        if !poly::is_irreducible(&p, q) {
            return Err(Error::InvalidParameters("modulus is reducible".into()));
        }
        Ok(Self::with_modulus_unchecked(q as u32, modulus.to_vec()))
    }

    fn search_modulus(q: u64, m: usize) -> Vec<u32> {
        let total = q.pow(m as u32);
        // for m >= 2 a zero constant term means x divides f
        let start = if m >= 2 { q.pow(m as u32 - 1) } else { 0 };
        for n in start..total {
            // digit for c_{m-1} is least significant
            let mut tail = vec![0u64; m];
            let mut rest = n;
            for i in (0..m).rev() {
                tail[i] = rest % q;
                rest /= q;
            }
            let mut f = tail;
            f.push(1);
            if poly::is_irreducible(&f, q) {
                return f.into_iter().map(|c| c as u32).collect();
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    fn with_modulus_unchecked(q: u32, modulus: Vec<u32>) -> Self {
        let m = modulus.len() - 1;
        let q64 = q as u64;
        let f: poly::Poly = modulus.iter().map(|&c| c as u64).collect();
        // column j of the Frobenius matrix is (x^j)^q = (x^q)^j mod f
        let xq = poly::pow_poly_mod(&vec![0, 1], q64, &f, q64);
        let mut one = BaseMatrix::zeros(m, m);
        let mut frob = BaseMatrix::zeros(m, m);
        let mut col: poly::Poly = vec![1];
        for j in 0..m {
            one.set(j, j, 1);
            for (i, &c) in col.iter().enumerate() {
                frob.set(i, j, c as u32);
            }
            col = poly::mul_mod(&col, &xq, &f, q64);
        }
        let mut frobenius = Vec::with_capacity(m);
        frobenius.push(one);
        for i in 1..m {
            let next = frob.mul(&frobenius[i - 1], q);
            frobenius.push(next);
        }
        Self(Arc::new(Inner {
            q,
            m,
            modulus,
            frobenius,
        }))
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn m(&self) -> usize {
        self.0.m
    }

    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn order(&self) -> u64 {
        (self.0.q as u64).pow(self.0.m as u32)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            coeffs: vec![0; self.0.m],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_base(1)
    }

    /// Embeds c mod q as a constant.
    pub fn from_base(&self, c: u64) -> FieldElement {
        let mut e = self.zero();
        e.coeffs[0] = (c % self.0.q as u64) as u16;
        e
    }

    /// The basis element x^i of F_{q^m} over F_q.
    pub fn basis(&self, i: usize) -> FieldElement {
        assert!(i < self.0.m, "basis index {i} out of range");
        let mut e = self.zero();
        e.coeffs[i] = 1;
        e
    }

    /// Element from explicit coordinates, validated against q and m.
    pub fn element(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() != self.0.m || coeffs.iter().any(|&c| c >= self.0.q as u64) {
            return Err(Error::FieldMismatch);
        }
        Ok(FieldElement {
            coeffs: coeffs.iter().map(|&c| c as u16).collect(),
        })
    }

    /// Element whose coordinates are the base-q digits of `n`, x^0 least significant.
    pub fn from_index(&self, mut n: u64) -> FieldElement {
        let q = self.0.q as u64;
        let mut e = self.zero();
        for c in e.coeffs.iter_mut() {
            *c = (n % q) as u16;
            n /= q;
        }
        e
    }

    pub fn index_of(&self, a: &FieldElement) -> u64 {
        let q = self.0.q as u64;
        a.coeffs.iter().rev().fold(0, |acc, &c| acc * q + c as u64)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |n| self.from_index(n))
    }

    pub fn contains(&self, a: &FieldElement) -> bool {
        a.coeffs.len() == self.0.m && a.coeffs.iter().all(|&c| (c as u32) < self.0.q)
    }

    /// Checked arithmetic entry point.
    pub fn arith(&self, op: ArithOp, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        if !self.contains(a) || !self.contains(b) {
            return Err(Error::FieldMismatch);
        }
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
            ArithOp::Inv => self.inv(a)?,
            ArithOp::Pow(e) => self.pow(a, e),
        })
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        debug_assert_eq!(a.coeffs.len(), self.0.m);
        let q = self.0.q;
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| ((x as u32 + y as u32) % q) as u16)
            .collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let q = self.0.q;
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| ((x as u32 + q - y as u32) % q) as u16)
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let q = self.0.q;
        let coeffs = a.coeffs.iter().map(|&x| ((q - x as u32) % q) as u16).collect();
        FieldElement { coeffs }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let m = self.0.m;
        let q = self.0.q as u64;
        debug_assert_eq!(a.coeffs.len(), m);
        debug_assert_eq!(b.coeffs.len(), m);
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                prod[i + j] += x as u64 * y as u64;
            }
        }
        // x^m = -(f_0 + f_1 x + ... + f_{m-1} x^{m-1})
        let f = &self.0.modulus;
        for k in (m..2 * m - 1).rev() {
            let c = prod[k] % q;
            if c == 0 {
                continue;
            }
            for i in 0..m {
                let fi = f[i] as u64;
                if fi != 0 {
                    prod[k - m + i] += c * (q - fi);
                }
            }
        }
        FieldElement {
            coeffs: prod[..m].iter().map(|&c| (c % q) as u16).collect(),
        }
    }

    /// Product with a base-field scalar.
    pub fn scale(&self, a: &FieldElement, lambda: u32) -> FieldElement {
        let q = self.0.q as u64;
        let l = lambda as u64 % q;
        FieldElement {
            coeffs: a.coeffs.iter().map(|&c| (c as u64 * l % q) as u16).collect(),
        }
    }

    /// acc += lambda * a for a base-field scalar lambda.
    pub fn add_scaled(&self, acc: &mut FieldElement, a: &FieldElement, lambda: u32) {
        let q = self.0.q as u64;
        let l = lambda as u64 % q;
        if l == 0 {
            return;
        }
        for (x, &y) in acc.coeffs.iter_mut().zip(&a.coeffs) {
            *x = ((*x as u64 + y as u64 * l) % q) as u16;
        }
    }

    pub fn pow(&self, a: &FieldElement, mut e: u64) -> FieldElement {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let q = self.0.q as u64;
        let p: poly::Poly = a.coeffs.iter().map(|&c| c as u64).collect();
        let f: poly::Poly = self.0.modulus.iter().map(|&c| c as u64).collect();
        let inv = poly::inv_poly_mod(&p, &f, q).ok_or(Error::ZeroInverse)?;
        let mut out = self.zero();
        for (i, c) in inv.into_iter().enumerate() {
            out.coeffs[i] = c as u16;
        }
        Ok(out)
    }

    /// a^{q^i}, through the cached linear map.
    pub fn frobenius(&self, a: &FieldElement, i: usize) -> FieldElement {
        let m = self.0.m;
        let i = i % m;
        if i == 0 {
            return a.clone();
        }
        let q = self.0.q as u64;
        let mat = &self.0.frobenius[i];
        let mut out = vec![0u64; m];
        for (j, &c) in a.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += mat.get(r, j) as u64 * c as u64;
            }
        }
        FieldElement {
            coeffs: out.into_iter().map(|c| (c % q) as u16).collect(),
        }
    }

    /// m x |v| coordinate matrix of `v` over F_q.
    pub fn coordinate_matrix(&self, v: &[FieldElement]) -> BaseMatrix {
        let mut mat = BaseMatrix::zeros(self.0.m, v.len());
        for (j, e) in v.iter().enumerate() {
            for (i, &c) in e.coeffs.iter().enumerate() {
                mat.set(i, j, c as u32);
            }
        }
        mat
    }

    /// Rank over F_q of the elements of `v` viewed as vectors in F_q^m.
    pub fn rank_over_base(&self, v: &[FieldElement]) -> usize {
        if v.is_empty() {
            return 0;
        }
        self.coordinate_matrix(v).rank(self.0.q)
    }
}

/// Incremental F_q-span tracker used for greedy independent-subset selection.
pub(crate) struct SpanBuilder {
    q: u64,
    /// Echelon rows keyed by pivot column.
    rows: Vec<(usize, Vec<u64>)>,
}

impl SpanBuilder {
    pub(crate) fn new(field: &ExtField) -> Self {
        Self {
            q: field.q() as u64,
            rows: Vec::new(),
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `a` if it is independent of the current span; returns whether it was added.
    pub(crate) fn insert(&mut self, a: &FieldElement) -> bool {
        let q = self.q;
        let mut v: Vec<u64> = a.coeffs.iter().map(|&c| c as u64).collect();
        for (pivot, row) in &self.rows {
            let f = v[*pivot];
            if f != 0 {
                for (x, &y) in v.iter_mut().zip(row) {
                    *x = (*x + q - f * y % q) % q;
                }
            }
        }
        match v.iter().position(|&c| c != 0) {
            Some(p) => {
                let inv = poly::inv_mod(v[p], q);
                for x in v.iter_mut() {
                    *x = *x * inv % q;
                }
                // keep existing rows reduced against the new pivot
                for (_, row) in self.rows.iter_mut() {
                    let f = row[p];
                    if f != 0 {
                        for (x, &y) in row.iter_mut().zip(&v) {
                            *x = (*x + q - f * y % q) % q;
                        }
                    }
                }
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    poly::is_prime(n)
}
