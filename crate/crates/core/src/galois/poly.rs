//! Dense polynomials over a prime field, constant term first.
//!
//! Only what the extension-field construction needs: reduction, modular
//! multiplication and exponentiation, gcd and the Ben-Or irreducibility test.

pub(crate) type Poly = Vec<u64>;

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn inv_mod(a: u64, q: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(q));
    pow_mod(a, q - 2, q)
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

fn trim(p: &mut Poly) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn degree(p: &Poly) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

/// Remainder of `a` modulo `f`; `f` must be nonzero.
pub(crate) fn rem(a: &Poly, f: &Poly, q: u64) -> Poly {
    let df = degree(f).expect("nonzero modulus");
    let lead_inv = inv_mod(f[df], q);
    let mut r = a.clone();
    trim(&mut r);
    while let Some(dr) = degree(&r) {
        if dr < df {
            break;
        }
        let c = r[dr] * lead_inv % q;
        let shift = dr - df;
        for (i, &fc) in f.iter().enumerate().take(df + 1) {
            r[i + shift] = (r[i + shift] + q - c * fc % q) % q;
        }
        trim(&mut r);
    }
    r
}

pub(crate) fn mul(a: &Poly, b: &Poly, q: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % q;
        }
    }
    trim(&mut out);
    out
}

pub(crate) fn mul_mod(a: &Poly, b: &Poly, f: &Poly, q: u64) -> Poly {
    rem(&mul(a, b, q), f, q)
}

pub(crate) fn pow_poly_mod(base: &Poly, mut exp: u64, f: &Poly, q: u64) -> Poly {
    let mut acc: Poly = rem(&vec![1], f, q);
    let mut b = rem(base, f, q);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(&acc, &b, f, q);
        }
        b = mul_mod(&b, &b, f, q);
        exp >>= 1;
    }
    acc
}

fn sub(a: &Poly, b: &Poly, q: u64) -> Poly {
    let n = a.len().max(b.len());
    let mut out: Poly = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + q - y) % q
        })
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn gcd(a: &Poly, b: &Poly, q: u64) -> Poly {
    let mut x = a.clone();
    let mut y = b.clone();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, q);
        x = y;
        y = r;
    }
    x
}

/// Ben-Or test: `f` of degree m is irreducible iff gcd(x^{q^i} - x, f) = 1
/// for every 1 <= i <= m/2.
pub(crate) fn is_irreducible(f: &Poly, q: u64) -> bool {
    let m = match degree(f) {
        Some(d) => d,
        None => return false,
    };
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let x: Poly = vec![0, 1];
    let mut h = rem(&x, f, q);
    for _ in 1..=m / 2 {
        h = pow_poly_mod(&h, q, f, q);
        let g = gcd(&sub(&h, &x, q), f, q);
        if degree(&g).unwrap_or(0) > 0 {
            return false;
        }
    }
    true
}

/// Inverse of `a` modulo irreducible `f` via the extended Euclidean algorithm.
pub(crate) fn inv_poly_mod(a: &Poly, f: &Poly, q: u64) -> Option<Poly> {
    let mut r0 = f.clone();
    let mut r1 = rem(a, f, q);
    let mut s0: Poly = Vec::new();
    let mut s1: Poly = vec![1];
    trim(&mut r0);
    if r1.is_empty() {
        return None;
    }
    while !r1.is_empty() {
        let (quot, r) = divmod(&r0, &r1, q);
        let s = sub(&s0, &mul(&quot, &s1, q), q);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    // r0 is a nonzero constant when gcd is 1
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = inv_mod(r0[0], q);
    Some(rem(&s0.iter().map(|&x| x * c % q).collect(), f, q))
}

fn divmod(a: &Poly, b: &Poly, q: u64) -> (Poly, Poly) {
    let db = degree(b).expect("nonzero divisor");
    let lead_inv = inv_mod(b[db], q);
    let mut r = a.clone();
    trim(&mut r);
    let mut quot = vec![0u64; r.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = r[dr] * lead_inv % q;
        let shift = dr - db;
        quot[shift] = (quot[shift] + c) % q;
        for (i, &bc) in b.iter().enumerate().take(db + 1) {
            r[i + shift] = (r[i + shift] + q - c * bc % q) % q;
        }
        trim(&mut r);
    }
    trim(&mut quot);
    (quot, r)
}
