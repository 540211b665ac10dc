//! Redundant + BS-specific cache placement.
//!
//! Every base station caches the `R` most popular files (the redundant set).
//! The remaining `M - R` slots of each station hold files no other station
//! caches. Ranks `R+1, R+2, ...` are dealt to `(slot, station)` pairs in
//! serpentine order: odd slots run stations `1..=N` left to right, even slots
//! run them right to left, which evens out popularity mass across stations.

use crate::error::{Error, Result};
use crate::popularity::Catalog;

/// Station count `N`, per-station cache size `M` and redundant count `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayoutParams {
    bs_count: usize,
    cache_size: usize,
    redundant_count: usize,
}

impl LayoutParams {
    pub fn new(bs_count: usize, cache_size: usize, redundant_count: usize) -> Result<Self> {
        if bs_count == 0 {
            return Err(Error::invalid("bs_count", "must be at least 1"));
        }
        if cache_size == 0 {
            return Err(Error::invalid("cache_size", "must be at least 1"));
        }
        if redundant_count > cache_size {
            return Err(Error::invalid(
                "redundant_count",
                format!("{redundant_count} exceeds cache_size {cache_size}"),
            ));
        }
        Ok(LayoutParams {
            bs_count,
            cache_size,
            redundant_count,
        })
    }

    pub fn bs_count(&self) -> usize {
        self.bs_count
    }

    pub fn cache_size(&self) -> usize {
        self.cache_size
    }

    pub fn redundant_count(&self) -> usize {
        self.redundant_count
    }

    /// Number of BS-specific slots per station, `M - R`.
    pub fn specific_slots(&self) -> usize {
        self.cache_size - self.redundant_count
    }

    /// Redundancy ratio `R / M`.
    pub fn redundancy_ratio(&self) -> f64 {
        self.redundant_count as f64 / self.cache_size as f64
    }

    /// Distinct files cached anywhere in the RAN, `R + (M - R) N`.
    pub fn distinct_count(&self) -> usize {
        self.redundant_count + self.specific_slots() * self.bs_count
    }

    /// Errors when the layout needs more distinct files than the catalog has.
    pub fn check_fits(&self, catalog: &Catalog) -> Result<()> {
        let distinct = self.distinct_count();
        if distinct > catalog.file_count() {
            return Err(Error::InfeasibleLayout {
                distinct,
                file_count: catalog.file_count(),
            });
        }
        Ok(())
    }

    /// Popularity rank stored in BS-specific slot `slot` of station `bs`
    /// (both 1-based).
    pub fn slot_rank(&self, slot: usize, bs: usize) -> Result<usize> {
        if slot < 1 || slot > self.specific_slots() {
            return Err(Error::invalid(
                "slot",
                format!("{slot} outside [1, {}]", self.specific_slots()),
            ));
        }
        self.check_bs(bs)?;
        Ok(self.slot_rank_unchecked(slot, bs))
    }

    #[inline]
    fn slot_rank_unchecked(&self, slot: usize, bs: usize) -> usize {
        let (r, n) = (self.redundant_count, self.bs_count);
        if slot % 2 == 1 {
            r + (slot - 1) * n + bs
        } else {
            r + slot * n + 1 - bs
        }
    }

    fn check_bs(&self, bs: usize) -> Result<()> {
        if bs < 1 || bs > self.bs_count {
            return Err(Error::invalid(
                "bs",
                format!("{bs} outside [1, {}]", self.bs_count),
            ));
        }
        Ok(())
    }
}

/// A materialized placement: the ordered BS-specific ranks of each station.
/// The redundant ranks `1..=R` are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheLayout {
    params: LayoutParams,
    per_bs_specific: Vec<Vec<usize>>,
}

impl CacheLayout {
    pub fn build(params: LayoutParams) -> Self {
        let per_bs_specific = (1..=params.bs_count)
            .map(|bs| {
                (1..=params.specific_slots())
                    .map(|slot| params.slot_rank_unchecked(slot, bs))
                    .collect()
            })
            .collect();
        CacheLayout {
            params,
            per_bs_specific,
        }
    }

    pub fn params(&self) -> &LayoutParams {
        &self.params
    }

    /// Specific ranks of station `bs` (1-based), in slot order.
    pub fn specific(&self, bs: usize) -> Result<&[usize]> {
        self.params.check_bs(bs)?;
        Ok(&self.per_bs_specific[bs - 1])
    }

    pub fn per_bs_specific(&self) -> &[Vec<usize>] {
        &self.per_bs_specific
    }

    /// Full cache content of station `bs`: `1..=R` followed by its specific ranks.
    pub fn cached_ranks(&self, bs: usize) -> Result<Vec<usize>> {
        let specific = self.specific(bs)?;
        Ok((1..=self.params.redundant_count)
            .chain(specific.iter().copied())
            .collect())
    }

    /// Maps each rank `1..=distinct_count` to where it is cached: `None` for
    /// redundant ranks, `Some(bs)` (1-based) for the owning station.
    /// Index 0 is unused.
    pub fn owner_table(&self) -> Vec<Option<usize>> {
        let mut owners = vec![None; self.params.distinct_count() + 1];
        for (idx, ranks) in self.per_bs_specific.iter().enumerate() {
            for &k in ranks {
                owners[k] = Some(idx + 1);
            }
        }
        owners
    }
}

/// Request probability of station `bs`'s specific files, evaluated in closed
/// form by pairing each odd slot with the following even slot.
pub fn specific_mass(bs: usize, params: &LayoutParams, catalog: &Catalog) -> Result<f64> {
    params.check_bs(bs)?;
    params.check_fits(catalog)?;
    Ok(specific_mass_unchecked(bs, params, catalog))
}

pub(crate) fn specific_mass_unchecked(bs: usize, params: &LayoutParams, catalog: &Catalog) -> f64 {
    let (r, n) = (params.redundant_count, params.bs_count);
    let f = |k: usize| catalog.pmf_unchecked(k);
    let slots = params.specific_slots();

    match slots {
        0 => 0.0,
        1 => f(r + bs),
        _ => {
            let pairs = slots / 2;
            let mut mass = 0.0;
            for t in 1..=pairs {
                mass += f(r + (2 * t - 2) * n + bs) + f(r + 2 * t * n + 1 - bs);
            }
            if slots % 2 == 1 {
                mass += f(r + (slots - 1) * n + bs);
            }
            mass
        }
    }
}

/// Sum of [`specific_mass`] over all stations.
pub fn total_specific_mass(params: &LayoutParams, catalog: &Catalog) -> Result<f64> {
    params.check_fits(catalog)?;
    Ok((1..=params.bs_count)
        .map(|bs| specific_mass_unchecked(bs, params, catalog))
        .sum())
}

/// Request probability of files cached nowhere in the RAN.
pub fn backhaul_mass(params: &LayoutParams, catalog: &Catalog) -> Result<f64> {
    params.check_fits(catalog)?;
    catalog.tail_mass(params.distinct_count() + 1)
}

/// Request probability of the redundant ranks `1..=R`.
pub fn redundant_mass(params: &LayoutParams, catalog: &Catalog) -> Result<f64> {
    params.check_fits(catalog)?;
    Ok(catalog.range_mass(1, params.redundant_count))
}
