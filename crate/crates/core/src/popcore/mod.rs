//! Domain types: age intervals, the age measure, rate models and symbolic
//! test functions.

mod interval;
mod measure;
mod rates;
mod testfn;

pub use interval::{check_partition, Interval, IntervalUnion};
pub use measure::AgeMeasure;
pub use rates::{AgeCell, Family, PopAgeCell, RateModel};
pub use testfn::{Term, TestFn};

/// `pair(f, A, t, normalized)`: free-function form of [`AgeMeasure::pair`].
pub fn pair(f: &TestFn, population: &AgeMeasure, t: f64, normalized: bool) -> f64 {
    population.pair(f, t, normalized)
}

/// `hazards(model, A, x)`: free-function form of [`RateModel::hazards`].
pub fn hazards(model: &RateModel, population: &AgeMeasure, x: f64) -> (f64, f64) {
    model.hazards(population, x)
}
