//! Partition of the age axis by a sorted set of endpoints.
//!
//! Region `r` is the open stretch between endpoint `r-1` and endpoint `r`
//! (unbounded at both ends). An age sitting exactly on an endpoint is placed in
//! the region to its right, since ages only increase.

use crate::popcore::IntervalUnion;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AgeRegions {
    endpoints: Vec<f64>,
    reps: Vec<f64>,
}

impl AgeRegions {
    pub fn new(mut endpoints: Vec<f64>) -> Self {
        endpoints.sort_by(f64::total_cmp);
        endpoints.dedup();
        let n = endpoints.len();
        let reps = (0..=n)
            .map(|r| match (r, n) {
                (_, 0) => 0.0,
                (0, _) if endpoints[0] > 0.0 => endpoints[0] / 2.0,
                (0, _) => endpoints[0] - 1.0,
                (r, n) if r == n => endpoints[n - 1] + 1.0,
                (r, _) => 0.5 * (endpoints[r - 1] + endpoints[r]),
            })
            .collect();
        Self { endpoints, reps }
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn len(&self) -> usize {
        self.endpoints.len() + 1
    }

    pub fn region_of(&self, age: f64) -> usize {
        self.endpoints.partition_point(|&e| e <= age)
    }

    /// An age strictly inside region `r`; membership of any interval built
    /// from these endpoints is decided by it.
    pub fn representative(&self, r: usize) -> f64 {
        self.reps[r]
    }

    /// The endpoint closing region `r` on the right, if any.
    pub fn upper(&self, r: usize) -> Option<f64> {
        self.endpoints.get(r).copied()
    }

    /// Regions lying inside `support`.
    pub fn mask(&self, support: &IntervalUnion) -> Vec<bool> {
        self.reps.iter().map(|&x| support.contains(x)).collect()
    }

    /// True when every endpoint of `support` is one of ours, so region
    /// membership decides support membership.
    pub fn resolves(&self, points: impl IntoIterator<Item = f64>) -> bool {
        points.into_iter().all(|p| self.endpoints.contains(&p))
    }
}
