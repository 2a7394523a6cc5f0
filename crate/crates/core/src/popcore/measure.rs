use serde::{Deserialize, Serialize};

use super::interval::IntervalUnion;
use super::testfn::TestFn;
use crate::error::{Error, Result};

/// The atomic age measure `A_t`: one unit mass per living individual, plus the
/// carrying capacity used to normalise it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeMeasure {
    ages: Vec<f64>,
    carrying_capacity: u32,
}

impl AgeMeasure {
    pub fn new(ages: Vec<f64>, carrying_capacity: u32) -> Result<Self> {
        if carrying_capacity == 0 {
            return Err(Error::InvalidInput("carrying capacity must be positive".into()));
        }
        if let Some(a) = ages.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::InvalidInput(format!("invalid age {a}")));
        }
        Ok(Self {
            ages,
            carrying_capacity,
        })
    }

    pub fn ages(&self) -> &[f64] {
        &self.ages
    }

    pub fn carrying_capacity(&self) -> u32 {
        self.carrying_capacity
    }

    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }

    /// `(f_t, A)`, or `(f_t, Ā) = (f_t, A) / K` when `normalized`.
    pub fn pair(&self, f: &TestFn, t: f64, normalized: bool) -> f64 {
        let raw: f64 = self.ages.iter().map(|&x| f.eval(x, t)).sum();
        if normalized {
            raw / self.carrying_capacity as f64
        } else {
            raw
        }
    }

    /// `(1_S, Ā)`
    pub fn mass(&self, support: &IntervalUnion) -> f64 {
        let n = self.ages.iter().filter(|&&x| support.contains(x)).count();
        n as f64 / self.carrying_capacity as f64
    }
}
