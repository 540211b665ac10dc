//! Zipf popularity model of the file catalog.
//!
//! Files are identified by their popularity rank `k = 1..=F`. The request
//! probability of rank `k` is `k^-s / H(F, s)` where `H(F, s)` is the
//! generalized harmonic number. All files have unit length, so request
//! probability and byte volume coincide.

use crate::error::{Error, Result};

/// An immutable Zipf-distributed file catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    file_count: usize,
    exponent: f64,
    norm: f64,
    // cdf[k - 1] = P(rank <= k)
    cdf: Vec<f64>,
}

impl Catalog {
    /// Builds a catalog of `file_count` files with Zipf exponent `exponent`.
    ///
    /// `exponent = 0` gives uniform popularity.
    pub fn new(file_count: usize, exponent: f64) -> Result<Self> {
        if file_count == 0 {
            return Err(Error::invalid("file_count", "must be at least 1"));
        }
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::invalid(
                "exponent",
                format!("must be finite and non-negative, got {exponent}"),
            ));
        }

        let weights: Vec<f64> = (1..=file_count).map(|k| zipf_weight(k, exponent)).collect();
        let norm: f64 = weights.iter().sum();

        let mut cdf = Vec::with_capacity(file_count);
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cdf.push(acc / norm);
        }

        Ok(Catalog {
            file_count,
            exponent,
            norm,
            cdf,
        })
    }

    pub fn file_count(&self) -> usize {
        self.file_count
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// The harmonic normalizer `sum_{n=1..F} n^-s`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Request probability of the file with popularity rank `rank`.
    pub fn pmf(&self, rank: usize) -> Result<f64> {
        self.check_rank(rank, self.file_count)?;
        Ok(self.pmf_unchecked(rank))
    }

    #[inline]
    pub(crate) fn pmf_unchecked(&self, rank: usize) -> f64 {
        zipf_weight(rank, self.exponent) / self.norm
    }

    /// Total probability of ranks `from..=F`. `from = F + 1` yields an empty tail.
    pub fn tail_mass(&self, from: usize) -> Result<f64> {
        self.check_rank(from, self.file_count + 1)?;
        Ok(self.range_mass(from, self.file_count))
    }

    /// Total probability of ranks `first..=last`; empty when `first > last`.
    pub(crate) fn range_mass(&self, first: usize, last: usize) -> f64 {
        if first > last {
            return 0.0;
        }
        let weight: f64 = (first..=last).map(|k| zipf_weight(k, self.exponent)).sum();
        weight / self.norm
    }

    /// Cumulative probability `P(rank <= k)`; `cdf(0) = 0`.
    pub fn cdf(&self, rank: usize) -> Result<f64> {
        if rank == 0 {
            return Ok(0.0);
        }
        self.check_rank(rank, self.file_count)?;
        Ok(self.cdf[rank - 1])
    }

    /// Inverse-CDF sampling: the smallest rank whose cumulative probability
    /// exceeds `u`.
    pub fn sample_rank(&self, u: f64) -> Result<usize> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::invalid("u", format!("must lie in [0, 1), got {u}")));
        }
        Ok(self.sample_rank_unchecked(u))
    }

    #[inline]
    pub(crate) fn sample_rank_unchecked(&self, u: f64) -> usize {
        // Rounding can leave cdf[F-1] slightly below 1.
        let below = self.cdf.partition_point(|&c| c <= u);
        (below + 1).min(self.file_count)
    }

    fn check_rank(&self, rank: usize, max: usize) -> Result<()> {
        if rank < 1 || rank > max {
            return Err(Error::RankOutOfRange { rank, min: 1, max });
        }
        Ok(())
    }
}

#[inline]
fn zipf_weight(rank: usize, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else {
        (rank as f64).powf(-exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_norm(f: usize, s: f64) -> f64 {
        let mut acc = 0.0;
        for n in 1..=f {
            acc += 1.0 / (n as f64).powf(s);
        }
        acc
    }

    #[test]
    fn single_file_catalog() {
        let cat = Catalog::new(1, 0.8).unwrap();
        assert_eq!(cat.norm(), 1.0);
        assert_eq!(cat.pmf(1).unwrap(), 1.0);
    }

    #[test]
    fn uniform_catalog() {
        let cat = Catalog::new(4, 0.0).unwrap();
        assert_eq!(cat.norm(), 4.0);
        assert_eq!(cat.pmf(3).unwrap(), 0.25);
    }

    #[test]
    fn default_catalog_matches_direct_summation() {
        let cat = Catalog::new(500, 0.8).unwrap();
        let norm = direct_norm(500, 0.8);
        assert!((cat.norm() - norm).abs() / norm < 1e-12);
        assert!((cat.pmf(1).unwrap() - 1.0 / norm).abs() < 1e-15);
    }

    #[test]
    fn harmonic_pair() {
        let cat = Catalog::new(2, 1.0).unwrap();
        assert!((cat.pmf(1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            Catalog::new(0, 0.8),
            Err(Error::InvalidParameter {
                field: "file_count",
                ..
            })
        ));
        assert!(Catalog::new(10, -0.1).is_err());
        assert!(Catalog::new(10, f64::NAN).is_err());
        assert!(Catalog::new(10, f64::INFINITY).is_err());

        let cat = Catalog::new(10, 0.8).unwrap();
        assert!(cat.pmf(0).is_err());
        assert!(cat.pmf(11).is_err());
        assert!(cat.tail_mass(0).is_err());
        assert!(cat.tail_mass(12).is_err());
        assert!(cat.sample_rank(1.0).is_err());
        assert!(cat.sample_rank(-0.5).is_err());
    }

    #[test]
    fn tail_mass_boundaries() {
        let cat = Catalog::new(10, 0.8).unwrap();
        assert!((cat.tail_mass(1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cat.tail_mass(11).unwrap(), 0.0);

        let uniform = Catalog::new(8, 0.0).unwrap();
        assert_eq!(uniform.tail_mass(5).unwrap(), 0.5);
    }

    #[test]
    fn inverse_cdf_buckets() {
        let uniform = Catalog::new(4, 0.0).unwrap();
        assert_eq!(uniform.sample_rank(0.0).unwrap(), 1);
        assert_eq!(uniform.sample_rank(0.9).unwrap(), 4);
        // CDF(1) = 0.25 is not > 0.25, so the boundary falls in the next bucket.
        assert_eq!(uniform.sample_rank(0.25).unwrap(), 2);

        let pair = Catalog::new(2, 1.0).unwrap();
        assert_eq!(pair.sample_rank(0.5).unwrap(), 1);
        assert_eq!(pair.sample_rank(0.7).unwrap(), 2);
    }

    #[test]
    fn sample_never_exceeds_catalog() {
        let cat = Catalog::new(500, 0.8).unwrap();
        assert_eq!(cat.sample_rank(1.0 - f64::EPSILON / 2.0).unwrap(), 500);
    }
}
