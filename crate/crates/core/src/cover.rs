//! Overlapping interval covers of the lens image and preimage assignment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::LensValues;

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        // Rejects NaN endpoints as well, hence the negated form.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(lo < hi) {
            return Err(Error::InvalidParam(format!(
                "interval requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Resolution and gain of a uniform interval cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    /// Number of intervals (resolution).
    pub n_intervals: usize,
    /// Fraction of each interval shared with its successor (gain), in `[0, 1)`.
    pub overlap: f64,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams {
            n_intervals: 15,
            overlap: 0.4,
        }
    }
}

impl CoverParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_intervals < 1 {
            return Err(Error::InvalidParam("n_intervals must be >= 1".into()));
        }
        if !self.overlap.is_finite() || !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::InvalidParam(format!(
                "overlap must lie in [0, 1), got {}",
                self.overlap
            )));
        }
        Ok(())
    }
}

/// An ordered cover of the lens image by overlapping closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    intervals: Vec<Interval>,
    params: CoverParams,
}

impl Cover {
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn params(&self) -> &CoverParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Record ids per interval, aligned with `Cover::intervals`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimageAssignment {
    per_interval: Vec<Vec<String>>,
}

impl PreimageAssignment {
    pub fn per_interval(&self) -> &[Vec<String>] {
        &self.per_interval
    }
}

/// Padding that keeps extreme lens values inside the outermost intervals.
fn outer_pad(range: f64, anchor: f64) -> f64 {
    let mut eps = 1e-9 * range.abs().max(1.0);
    // Widen until the padding survives rounding at the anchor's magnitude.
    while anchor - eps == anchor || anchor + eps == anchor {
        eps *= 2.0;
    }
    eps
}

/// Builds a uniform-width cover of `[min, max]` of the lens values.
///
/// Interval length is `L = range / (n - (n-1)·overlap)` and consecutive left
/// endpoints are spaced `L·(1-overlap)`. The outermost endpoints get a small
/// epsilon padding; the last interval is snapped to the data maximum first.
/// A degenerate range (all values equal) yields a single padded interval.
pub fn build_uniform_cover(lens: &LensValues, params: &CoverParams) -> Result<Cover> {
    params.validate()?;
    let (min, max) = lens
        .range()
        .ok_or_else(|| Error::EmptyInput("cannot cover an empty lens image".into()))?;
    let range = max - min;
    let n = params.n_intervals;

    if range == 0.0 || n == 1 {
        let eps = outer_pad(range, min.abs().max(max.abs()));
        let interval = Interval::new(min - eps, max + eps)?;
        return Ok(Cover {
            intervals: vec![interval],
            params: *params,
        });
    }

    let g = params.overlap;
    let length = range / (n as f64 - (n as f64 - 1.0) * g);
    let step = length * (1.0 - g);
    let eps = outer_pad(range, min.abs().max(max.abs()));

    let lows: Vec<f64> = (0..n).map(|k| min + k as f64 * step).collect();
    let mut intervals = Vec::with_capacity(n);
    for k in 0..n {
        let lo = if k == 0 { min - eps } else { lows[k] };
        let mut hi = if k == n - 1 {
            max + eps
        } else {
            lows[k] + length
        };
        // Close rounding gaps so the union always covers [min, max].
        if k + 1 < n {
            hi = hi.max(lows[k + 1]);
        }
        intervals.push(Interval::new(lo, hi)?);
    }
    Ok(Cover {
        intervals,
        params: *params,
    })
}

/// Assigns each record to every interval whose closed range contains its
/// lens value. Lists come out ascending by id and duplicate-free.
pub fn assign_preimages(lens: &LensValues, cover: &Cover) -> PreimageAssignment {
    let mut per_interval = vec![Vec::new(); cover.len()];
    for (id, value) in lens.iter() {
        for (k, interval) in cover.intervals().iter().enumerate() {
            if interval.contains(value) {
                per_interval[k].push(id.to_string());
            }
        }
    }
    PreimageAssignment { per_interval }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lens_of(pairs: &[(&str, f64)]) -> LensValues {
        let mut lens = LensValues::new();
        for (id, v) in pairs {
            lens.insert(*id, *v).unwrap();
        }
        lens
    }

    #[test]
    fn four_intervals_half_overlap_on_unit_range() {
        let lens = lens_of(&[("a", 0.0), ("b", 1.0)]);
        let cover = build_uniform_cover(
            &lens,
            &CoverParams {
                n_intervals: 4,
                overlap: 0.5,
            },
        )
        .unwrap();
        let expected = [(0.0, 0.4), (0.2, 0.6), (0.4, 0.8), (0.6, 1.0)];
        assert_eq!(cover.len(), 4);
        for (iv, (lo, hi)) in cover.intervals().iter().zip(expected) {
            assert!((iv.lo - lo).abs() < 1e-8, "lo {} vs {}", iv.lo, lo);
            assert!((iv.hi - hi).abs() < 1e-8, "hi {} vs {}", iv.hi, hi);
        }
        // Consecutive intersections have length overlap * L = 0.2.
        for w in cover.intervals().windows(2) {
            let olap = w[0].hi.min(w[1].hi) - w[1].lo;
            assert!((olap - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn single_interval_covers_everything() {
        let lens = lens_of(&[("a", -2.0), ("b", 3.0)]);
        let cover = build_uniform_cover(
            &lens,
            &CoverParams {
                n_intervals: 1,
                overlap: 0.7,
            },
        )
        .unwrap();
        assert_eq!(cover.len(), 1);
        assert!(cover.intervals()[0].contains(-2.0));
        assert!(cover.intervals()[0].contains(3.0));
    }

    #[test]
    fn degenerate_range_yields_single_padded_interval() {
        let lens = lens_of(&[("a", 0.5), ("b", 0.5)]);
        let cover = build_uniform_cover(
            &lens,
            &CoverParams {
                n_intervals: 10,
                overlap: 0.3,
            },
        )
        .unwrap();
        assert_eq!(cover.len(), 1);
        assert!(cover.intervals()[0].contains(0.5));
    }

    #[test]
    fn empty_lens_is_rejected() {
        let lens = LensValues::new();
        assert!(matches!(
            build_uniform_cover(&lens, &CoverParams::default()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn assignment_brute_force_membership() {
        let range = lens_of(&[("lo", 0.0), ("hi", 1.0)]);
        let cover = build_uniform_cover(
            &range,
            &CoverParams {
                n_intervals: 4,
                overlap: 0.5,
            },
        )
        .unwrap();
        let lens = lens_of(&[("a", 0.1), ("b", 0.5)]);
        let assignment = assign_preimages(&lens, &cover);
        // Brute-force membership over all (id, interval) pairs.
        for (k, interval) in cover.intervals().iter().enumerate() {
            for (id, v) in lens.iter() {
                let listed = assignment.per_interval()[k].iter().any(|m| m == id);
                assert_eq!(listed, interval.contains(v), "id {id} interval {k}");
            }
        }
        assert_eq!(assignment.per_interval()[0], vec!["a".to_string()]);
        assert_eq!(assignment.per_interval()[1], vec!["b".to_string()]);
        assert_eq!(assignment.per_interval()[2], vec!["b".to_string()]);
        assert!(assignment.per_interval()[3].is_empty());
    }

    #[test]
    fn empty_lens_assignment_is_empty() {
        let range = lens_of(&[("lo", 0.0), ("hi", 1.0)]);
        let cover = build_uniform_cover(&range, &CoverParams::default()).unwrap();
        let assignment = assign_preimages(&LensValues::new(), &cover);
        assert!(assignment.per_interval().iter().all(Vec::is_empty));
    }

    #[test]
    fn shared_endpoint_lands_in_both_intervals() {
        let range = lens_of(&[("lo", 0.0), ("hi", 1.0)]);
        let cover = build_uniform_cover(
            &range,
            &CoverParams {
                n_intervals: 4,
                overlap: 0.5,
            },
        )
        .unwrap();
        // 0.4 is the shared endpoint of intervals 0 and 2 (and interior to 1).
        let lens = lens_of(&[("x", 0.4)]);
        let assignment = assign_preimages(&lens, &cover);
        assert!(!assignment.per_interval()[0].is_empty());
        assert!(!assignment.per_interval()[1].is_empty());
        assert!(!assignment.per_interval()[2].is_empty());
        assert!(assignment.per_interval()[3].is_empty());
    }

    #[test]
    fn params_validation() {
        assert!(CoverParams {
            n_intervals: 0,
            overlap: 0.0
        }
        .validate()
        .is_err());
        assert!(CoverParams {
            n_intervals: 3,
            overlap: 1.0
        }
        .validate()
        .is_err());
        assert!(CoverParams {
            n_intervals: 3,
            overlap: -0.1
        }
        .validate()
        .is_err());
    }
}
