//! Gabidulin codes: evaluations of a linearized polynomial at F_q-independent
//! points. Used here only as an erasure code.

use crate::error::{Error, Result};
use crate::galois::{ExtField, FieldElement};
use crate::linpoly::{interpolate, LinearizedPoly};

#[derive(Debug, Clone)]
pub struct GabidulinCode {
    field: ExtField,
    len: usize,
    dim: usize,
    points: Vec<FieldElement>,
}

impl GabidulinCode {
    /// [len, dim] code with evaluation points 1, x, ..., x^{len-1}.
    pub fn new(field: &ExtField, len: usize, dim: usize) -> Result<Self> {
        if len > field.m() {
            return Err(Error::InvalidParameters(format!(
                "Gabidulin length {len} exceeds extension degree m = {}",
                field.m()
            )));
        }
        if dim > len {
            return Err(Error::InvalidParameters(format!(
                "Gabidulin dimension {dim} exceeds length {len}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameters("Gabidulin dimension must be >= 1".into()));
        }
        let points = (0..len).map(|i| field.basis(i)).collect();
        Ok(Self {
            field: field.clone(),
            len,
            dim,
            points,
        })
    }

    pub fn field(&self) -> &ExtField {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Minimum rank distance N - K + 1.
    pub fn distance(&self) -> usize {
        self.len - self.dim + 1
    }

    pub fn points(&self) -> &[FieldElement] {
        &self.points
    }

    pub fn encode(&self, msg: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if msg.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: msg.len(),
            });
        }
        if msg.iter().any(|u| !self.field.contains(u)) {
            return Err(Error::FieldMismatch);
        }
        let f = LinearizedPoly::new(msg.to_vec());
        Ok(self
            .points
            .iter()
            .map(|th| f.eval_unchecked(&self.field, th))
            .collect())
    }

    /// Recovers the message from pairs (gamma, f(gamma)). The gammas may be
    /// any F_q-combinations of the evaluation points; their rank must reach K.
    pub fn erasure_decode(&self, known: &[(FieldElement, FieldElement)]) -> Result<Vec<FieldElement>> {
        let (points, values): (Vec<_>, Vec<_>) = known.iter().cloned().unzip();
        let f = interpolate(&self.field, &points, &values, self.dim - 1)?;
        Ok(f.padded(&self.field, self.dim))
    }
}
