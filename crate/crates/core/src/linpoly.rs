//! Linearized polynomials f(y) = sum_i u_i y^{q^i} over F_{q^m}.
//!
//! Such an f is an F_q-linear map on F_{q^m}. When its q-degree is below m
//! it is determined by its values on any q-degree + 1 points that are
//! independent over F_q; [`interpolate`] recovers it from a Moore system.

use crate::error::{Error, Result};
use crate::galois::{ExtField, FieldElement, SpanBuilder};

/// Coefficients (u_0, ..., u_t), trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedPoly {
    coeffs: Vec<FieldElement>,
}

impl LinearizedPoly {
    pub fn new(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(FieldElement::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// q-degree; `None` for the zero polynomial.
    pub fn q_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficients padded with zeros to `len` entries.
    pub fn padded(&self, field: &ExtField, len: usize) -> Vec<FieldElement> {
        let mut out = self.coeffs.clone();
        out.resize(len.max(out.len()), field.zero());
        out
    }

    pub fn eval(&self, field: &ExtField, theta: &FieldElement) -> Result<FieldElement> {
        if !field.contains(theta) || self.coeffs.iter().any(|u| !field.contains(u)) {
            return Err(Error::FieldMismatch);
        }
        Ok(self.eval_unchecked(field, theta))
    }

    pub(crate) fn eval_unchecked(&self, field: &ExtField, theta: &FieldElement) -> FieldElement {
        let mut acc = field.zero();
        for (i, u) in self.coeffs.iter().enumerate() {
            if u.is_zero() {
                continue;
            }
            let term = field.mul(u, &field.frobenius(theta, i));
            acc = field.add(&acc, &term);
        }
        acc
    }
}

/// Recovers the unique f of q-degree <= `t` with f(points[j]) = values[j].
///
/// The first t + 1 points (by index) that are independent over F_q form the
/// Moore system; every other pair is checked against the solution.
pub fn interpolate(
    field: &ExtField,
    points: &[FieldElement],
    values: &[FieldElement],
    t: usize,
) -> Result<LinearizedPoly> {
    if points.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            got: values.len(),
        });
    }
    if points.iter().chain(values).any(|e| !field.contains(e)) {
        return Err(Error::FieldMismatch);
    }
    let needed = t + 1;
    let mut span = SpanBuilder::new(field);
    let mut chosen = Vec::with_capacity(needed);
    for (j, p) in points.iter().enumerate() {
        if chosen.len() == needed {
            break;
        }
        if span.insert(p) {
            chosen.push(j);
        }
    }
    if chosen.len() < needed {
        return Err(Error::InsufficientRank {
            rank: span.rank(),
            needed,
        });
    }

    // Moore matrix rows: (p, p^q, ..., p^{q^t}) | value
    let mut rows: Vec<Vec<FieldElement>> = chosen
        .iter()
        .map(|&j| {
            let mut row: Vec<FieldElement> =
                (0..needed).map(|i| field.frobenius(&points[j], i)).collect();
            row.push(values[j].clone());
            row
        })
        .collect();
    let coeffs = solve_in_place(field, &mut rows, needed)
        .expect("Moore matrix of independent points is nonsingular");
    let f = LinearizedPoly::new(coeffs);

    for (j, (p, v)) in points.iter().zip(values).enumerate() {
        if chosen.contains(&j) {
            continue;
        }
        if f.eval_unchecked(field, p) != *v {
            return Err(Error::InconsistentData { index: j });
        }
    }
    Ok(f)
}

/// Gauss-Jordan on an n x (n+1) augmented system over F_{q^m}.
fn solve_in_place(
    field: &ExtField,
    rows: &mut [Vec<FieldElement>],
    n: usize,
) -> Option<Vec<FieldElement>> {
    for col in 0..n {
        let pivot = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, pivot);
        let inv = field.inv(&rows[col][col]).ok()?;
        for entry in rows[col].iter_mut() {
            *entry = field.mul(entry, &inv);
        }
        for r in 0..n {
            if r == col || rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone();
            for c in col..=n {
                let delta = field.mul(&factor, &rows[col][c]);
                rows[r][c] = field.sub(&rows[r][c], &delta);
            }
        }
    }
    Some(rows.iter().map(|row| row[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn f9() -> ExtField {
        ExtField::new(3, 2).unwrap()
    }

    #[test]
    fn q_power_of_x_in_f9() {
        let f = f9();
        let p = LinearizedPoly::new(vec![f.zero(), f.one()]);
        // x^3 = -x under x^2 + 1
        assert_eq!(p.eval(&f, &f.basis(1)).unwrap(), f.element(&[0, 2]).unwrap());
    }

    #[test]
    fn degree_zero_is_scaling() {
        let f = f9();
        let u = f.from_index(5);
        let p = LinearizedPoly::new(vec![u.clone()]);
        for th in f.elements() {
            assert_eq!(p.eval(&f, &th).unwrap(), f.mul(&u, &th));
        }
    }

    #[test]
    fn canonical_form_trims() {
        let f = f9();
        let p = LinearizedPoly::new(vec![f.one(), f.zero(), f.zero()]);
        assert_eq!(p.q_degree(), Some(0));
        assert_eq!(LinearizedPoly::new(vec![f.zero()]).q_degree(), None);
    }

    #[test]
    fn identity_from_basis() {
        let f = f9();
        let pts = vec![f.one(), f.basis(1)];
        let p = interpolate(&f, &pts, &pts, 1).unwrap();
        assert_eq!(p, LinearizedPoly::new(vec![f.one()]));
    }

    #[test]
    fn dependent_points_rejected() {
        let f = f9();
        let pts = vec![f.one(), f.from_base(2)];
        let vals = vec![f.one(), f.from_base(2)];
        assert_eq!(
            interpolate(&f, &pts, &vals, 1),
            Err(Error::InsufficientRank { rank: 1, needed: 2 })
        );
    }

    #[test]
    fn surplus_inconsistency_detected() {
        let f = ExtField::new(3, 3).unwrap();
        let p = LinearizedPoly::new(vec![f.from_index(7), f.from_index(11)]);
        let pts: Vec<_> = [1u64, 3, 9, 4].iter().map(|&n| f.from_index(n)).collect();
        let mut vals: Vec<_> = pts.iter().map(|x| p.eval(&f, x).unwrap()).collect();
        assert_eq!(interpolate(&f, &pts, &vals, 1).unwrap(), p);
        vals[3] = f.add(&vals[3], &f.one());
        assert_eq!(interpolate(&f, &pts, &vals, 1), Err(Error::InconsistentData { index: 3 }));
    }

    /// Every f with q-degree <= t and every independent (t+1)-set, for small fields.
    #[test]
    fn round_trip_exhaustive_small() {
        for (q, m, t) in [(3u64, 2usize, 1usize), (2, 3, 1), (2, 3, 2), (3, 3, 1)] {
            let f = ExtField::new(q, m).unwrap();
            let all: Vec<_> = f.elements().collect();
            let nonzero: Vec<_> = all.iter().skip(1).cloned().collect();
            let point_sets: Vec<Vec<FieldElement>> = nonzero
                .iter()
                .cloned()
                .combinations(t + 1)
                .filter(|s| f.rank_over_base(s) == t + 1)
                .collect();
            // all polynomials of q-degree <= t
            for coeffs in (0..=t).map(|_| all.iter().cloned()).multi_cartesian_product() {
                let p = LinearizedPoly::new(coeffs);
                for pts in &point_sets {
                    let vals: Vec<_> = pts.iter().map(|x| p.eval(&f, x).unwrap()).collect();
                    assert_eq!(interpolate(&f, pts, &vals, t).unwrap(), p);
                }
            }
        }
    }

    #[test]
    fn linearity_over_base_scalars_exhaustive() {
        let f = ExtField::new(3, 2).unwrap();
        let all: Vec<_> = f.elements().collect();
        let p = LinearizedPoly::new(vec![f.from_index(4), f.from_index(7)]);
        for a in &all {
            for b in &all {
                for l1 in 0..3u32 {
                    for l2 in 0..3u32 {
                        let mut lhs_arg = f.scale(a, l1);
                        f.add_scaled(&mut lhs_arg, b, l2);
                        let lhs = p.eval(&f, &lhs_arg).unwrap();
                        let mut rhs = f.scale(&p.eval(&f, a).unwrap(), l1);
                        f.add_scaled(&mut rhs, &p.eval(&f, b).unwrap(), l2);
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn additive_in_argument(c in proptest::collection::vec(0u64..729, 1..5), a in 0u64..729, b in 0u64..729) {
            let f = ExtField::new(3, 6).unwrap();
            let p = LinearizedPoly::new(c.iter().map(|&n| f.from_index(n)).collect());
            let (x, y) = (f.from_index(a), f.from_index(b));
            prop_assert_eq!(
                p.eval(&f, &f.add(&x, &y)).unwrap(),
                f.add(&p.eval(&f, &x).unwrap(), &p.eval(&f, &y).unwrap())
            );
        }

        #[test]
        fn round_trip_random(c in proptest::collection::vec(0u64..6561, 1..6), shuffle in any::<u64>()) {
            let f = ExtField::new(3, 8).unwrap();
            let p = LinearizedPoly::new(c.iter().map(|&n| f.from_index(n)).collect());
            let t = c.len() - 1;
            // independent points: basis elements mixed by an invertible triangular map
            let pts: Vec<_> = (0..=t)
                .map(|i| {
                    let mut e = f.basis(i);
                    if i > 0 {
                        f.add_scaled(&mut e, &f.basis(i - 1), (shuffle >> i) as u32 % 3);
                    }
                    e
                })
                .collect();
            let vals: Vec<_> = pts.iter().map(|x| p.eval(&f, x).unwrap()).collect();
            prop_assert_eq!(interpolate(&f, &pts, &vals, t).unwrap(), p);
        }
    }
}
