//! Dense vectors, point clouds and the cosine lens projection.
//!
//! All reductions here accumulate strictly left to right, with no pairwise or
//! parallel reassociation, so identical inputs produce bit-identical outputs
//! regardless of thread count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, nonempty real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector {
    values: Vec<f64>,
}

impl Vector {
    /// Builds a vector, rejecting empty input and non-finite components.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput(
                "vector must have at least one component".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "non-finite component {} at index {i}",
                values[i]
            )));
        }
        Ok(Vector { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Euclidean norm, accumulated left to right.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc + v * v).sqrt()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Vector::new(values)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Vec<f64> {
        v.values
    }
}

fn check_dims(a: &Vector, b: &Vector, context: &str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            found: b.dim(),
            context: context.into(),
        });
    }
    Ok(())
}

/// Dot product with fixed left-to-right accumulation.
pub fn dot(a: &Vector, b: &Vector) -> Result<f64> {
    check_dims(a, b, "dot product")?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .fold(0.0, |acc, (x, y)| acc + x * y))
}

/// Cosine similarity, clamped to `[-1, 1]` to absorb rounding.
pub fn cosine_similarity(a: &Vector, b: &Vector) -> Result<f64> {
    check_dims(a, b, "cosine similarity")?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateVector {
            context: "cosine similarity is undefined for zero-norm input".into(),
        });
    }
    let raw = dot(a, b)? / (na * nb);
    Ok(raw.clamp(-1.0, 1.0))
}

/// Scales `v` to unit norm.
pub fn l2_normalize(v: &Vector) -> Result<Vector> {
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::DegenerateVector {
            context: "cannot normalize a zero-norm vector".into(),
        });
    }
    Vector::new(v.values.iter().map(|x| x / n).collect())
}

/// Componentwise `Σ cᵢ·vᵢ`, accumulated term by term in the given order.
pub fn linear_combination(terms: &[(f64, &Vector)]) -> Result<Vector> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| Error::EmptyInput("linear combination needs at least one term".into()))?;
    let dim = first.dim();
    let mut acc = vec![0.0; dim];
    for (coeff, v) in terms {
        if v.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: v.dim(),
                context: "linear combination".into(),
            });
        }
        for (slot, x) in acc.iter_mut().zip(&v.values) {
            *slot += coeff * x;
        }
    }
    Vector::new(acc)
}

/// A set of equal-dimension vectors keyed by record id.
///
/// Iteration is always in ascending id order; this is the determinism anchor
/// for everything downstream.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    dim: usize,
    points: BTreeMap<String, Vector>,
}

impl PointCloud {
    pub fn new() -> Self {
        PointCloud::default()
    }

    /// Inserts a point. The first insert fixes the cloud dimension.
    pub fn insert(&mut self, id: impl Into<String>, v: Vector) -> Result<()> {
        let id = id.into();
        if self.points.is_empty() {
            self.dim = v.dim();
        } else if v.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: v.dim(),
                context: format!("record `{id}`"),
            });
        }
        if self.points.contains_key(&id) {
            return Err(Error::DuplicateRecord(id));
        }
        self.points.insert(id, v);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Vector> {
        self.points.get(id)
    }

    /// Shared dimension; 0 when the cloud is empty.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.points.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Vector)> {
        self.points.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Cloud with every point scaled to unit norm.
    pub fn l2_normalized(&self) -> Result<PointCloud> {
        let mut out = PointCloud::new();
        for (id, v) in self.iter() {
            let unit = l2_normalize(v).map_err(|_| Error::DegenerateVector {
                context: format!("record `{id}`"),
            })?;
            out.insert(id, unit)?;
        }
        Ok(out)
    }
}

/// Scalar lens values keyed by record id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LensValues {
    values: BTreeMap<String, f64>,
}

impl LensValues {
    pub fn new() -> Self {
        LensValues::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidParam(format!(
                "non-finite lens value {value}"
            )));
        }
        let id = id.into();
        if self.values.contains_key(&id) {
            return Err(Error::DuplicateRecord(id));
        }
        self.values.insert(id, value);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.values.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// `(min, max)` over all values; `None` when empty.
    pub fn range(&self) -> Option<(f64, f64)> {
        let mut it = self.values.values();
        let first = *it.next()?;
        let mut lo = first;
        let mut hi = first;
        for &v in it {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Some((lo, hi))
    }
}

/// Projects every point onto `direction` via cosine similarity.
///
/// `direction` must be unit length within 1e-9. Values land in `[-1, 1]`.
pub fn project_lens(cloud: &PointCloud, direction: &Vector) -> Result<LensValues> {
    if (direction.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParam(format!(
            "lens direction must be unit length, got norm {}",
            direction.norm()
        )));
    }
    if !cloud.is_empty() && cloud.dim() != direction.dim() {
        return Err(Error::Dimension {
            expected: cloud.dim(),
            found: direction.dim(),
            context: "lens direction".into(),
        });
    }
    let mut lens = LensValues::new();
    for (id, point) in cloud.iter() {
        let value = cosine_similarity(point, direction).map_err(|e| match e {
            Error::DegenerateVector { .. } => Error::DegenerateVector {
                context: format!("record `{id}`"),
            },
            other => other,
        })?;
        lens.insert(id, value)?;
    }
    Ok(lens)
}
