//! Age intervals and finite unions of them.
//!
//! Intervals are written in bracket notation, `[0,1)`, `[1,2]`, `(1.5,2]`.
//! Unions join intervals with `∪` (or an ASCII `U`), e.g. `[0,0.5) ∪ (1.5,2]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bounded age interval. Left-closed unless `closed_left` is false;
/// right-open unless `closed_right` is true.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closed_left: bool,
    pub closed_right: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, closed_right: bool) -> Result<Self> {
        Self::with_bounds(lo, hi, true, closed_right)
    }

    /// `[lo, hi)`
    pub fn half_open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, false)
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true)
    }

    pub fn with_bounds(lo: f64, hi: f64, closed_left: bool, closed_right: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidInterval(format!("non-finite bound in ({lo}, {hi})")));
        }
        if lo < 0.0 {
            return Err(Error::InvalidInterval(format!("negative lower bound {lo}")));
        }
        if lo >= hi {
            return Err(Error::InvalidInterval(format!("lo {lo} must be below hi {hi}")));
        }
        Ok(Self {
            lo,
            hi,
            closed_left,
            closed_right,
        })
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.closed_left { x >= self.lo } else { x > self.lo };
        let below = if self.closed_right { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn endpoints(&self) -> [f64; 2] {
        [self.lo, self.hi]
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, closed_left) = match self.lo.partial_cmp(&other.lo) {
            Some(std::cmp::Ordering::Greater) => (self.lo, self.closed_left),
            Some(std::cmp::Ordering::Less) => (other.lo, other.closed_left),
            _ => (self.lo, self.closed_left && other.closed_left),
        };
        let (hi, closed_right) = match self.hi.partial_cmp(&other.hi) {
            Some(std::cmp::Ordering::Less) => (self.hi, self.closed_right),
            Some(std::cmp::Ordering::Greater) => (other.hi, other.closed_right),
            _ => (self.hi, self.closed_right && other.closed_right),
        };
        // Degenerate single points carry no mass and are dropped.
        (lo < hi).then_some(Interval {
            lo,
            hi,
            closed_left,
            closed_right,
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.closed_left { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.closed_right { ']' } else { ')' }
        )
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInterval(format!("cannot parse {s:?}"));
        let mut chars = s.chars();
        let closed_left = match chars.next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad()),
        };
        let closed_right = match chars.next_back() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad()),
        };
        let body = chars.as_str();
        let (lo, hi) = body.split_once(',').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        Self::with_bounds(lo, hi, closed_left, closed_right)
    }
}

impl TryFrom<String> for Interval {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Interval> for String {
    fn from(i: Interval) -> String {
        i.to_string()
    }
}

/// A finite union of pairwise disjoint intervals, kept sorted by lower bound.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl IntervalUnion {
    pub fn new(mut parts: Vec<Interval>) -> Result<Self> {
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in parts.windows(2) {
            let touching = w[0].hi == w[1].lo && w[0].closed_right && w[1].closed_left;
            if w[0].hi > w[1].lo || touching {
                return Err(Error::InvalidInterval(format!("{} overlaps {}", w[0], w[1])));
            }
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    pub fn endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.parts.iter().flat_map(|p| p.endpoints())
    }

    pub fn intersect(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut parts = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                if let Some(c) = a.intersect(b) {
                    parts.push(c);
                }
            }
        }
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        IntervalUnion { parts }
    }
}

impl From<Interval> for IntervalUnion {
    fn from(i: Interval) -> Self {
        IntervalUnion { parts: vec![i] }
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("{}");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for IntervalUnion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "{}" {
            return Ok(Self::empty());
        }
        let parts = s.split(['∪', 'U']).map(str::parse).collect::<Result<Vec<Interval>>>()?;
        Self::new(parts)
    }
}

impl TryFrom<String> for IntervalUnion {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<IntervalUnion> for String {
    fn from(u: IntervalUnion) -> String {
        u.to_string()
    }
}

/// Checks that cells are pairwise disjoint, in any order.
pub fn check_partition(cells: &[Interval]) -> Result<()> {
    let mut sorted = cells.to_vec();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for w in sorted.windows(2) {
        let touching = w[0].hi == w[1].lo && w[0].closed_right && w[1].closed_left;
        if w[0].hi > w[1].lo || touching {
            return Err(Error::InvalidInterval(format!(
                "cells must be disjoint: {} and {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}
