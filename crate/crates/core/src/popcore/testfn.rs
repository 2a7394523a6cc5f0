//! Symbolic test functions `f(x, t) = Σ c · x^p · t^m · 1_S(x)`.
//!
//! The family is closed under sums, products and the partial derivatives used
//! by the evolution operator, which is what lets path integrals be evaluated
//! in closed form segment by segment.

use std::ops::{Add, Mul, Neg, Sub};

use super::interval::IntervalUnion;

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub age_power: u32,
    pub time_power: u32,
    /// `None` means the whole age axis.
    pub support: Option<IntervalUnion>,
}

impl Term {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        if let Some(s) = &self.support {
            if !s.contains(x) {
                return 0.0;
            }
        }
        self.coef * powi(x, self.age_power) * powi(t, self.time_power)
    }

    fn product(&self, other: &Term) -> Option<Term> {
        let support = match (&self.support, &other.support) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => {
                let c = a.intersect(b);
                if c.is_empty() {
                    return None;
                }
                Some(c)
            }
        };
        Some(Term {
            coef: self.coef * other.coef,
            age_power: self.age_power + other.age_power,
            time_power: self.time_power + other.time_power,
            support,
        })
    }
}

/// `0^0 = 1`, matching the convention `f_0 = x · 1_{m=0}` for `f_t = x t^m`.
fn powi(v: f64, n: u32) -> f64 {
    if n == 0 {
        1.0
    } else {
        v.powi(n as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestFn {
    pub terms: Vec<Term>,
}

impl TestFn {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coef: f64, age_power: u32, time_power: u32) -> Self {
        Self {
            terms: vec![Term {
                coef,
                age_power,
                time_power,
                support: None,
            }],
        }
    }

    /// `f = 1`
    pub fn one() -> Self {
        Self::monomial(1.0, 0, 0)
    }

    /// `f(x) = x`
    pub fn age() -> Self {
        Self::monomial(1.0, 1, 0)
    }

    /// `f(x) = x^p`
    pub fn age_pow(p: u32) -> Self {
        Self::monomial(1.0, p, 0)
    }

    /// `f_t = t^m`
    pub fn time_pow(m: u32) -> Self {
        Self::monomial(1.0, 0, m)
    }

    /// `f_t(x) = x t^m`
    pub fn age_time(m: u32) -> Self {
        Self::monomial(1.0, 1, m)
    }

    /// Indicator of a set of ages.
    pub fn indicator(support: impl Into<IntervalUnion>) -> Self {
        Self::one().restrict(&support.into())
    }

    /// Multiplies every term by `1_S`.
    pub fn restrict(mut self, support: &IntervalUnion) -> Self {
        self.terms.retain_mut(|t| {
            let s = match &t.support {
                None => support.clone(),
                Some(own) => own.intersect(support),
            };
            if s.is_empty() {
                return false;
            }
            t.support = Some(s);
            true
        });
        self
    }

    pub fn scale(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.coef *= c;
        }
        self
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(x, t)).sum()
    }

    /// `f(0, t)`, the newborn boundary value.
    pub fn at_birth(&self, t: f64) -> f64 {
        self.eval(0.0, t)
    }

    /// `∂_x f`, away from support boundaries.
    pub fn d_age(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.age_power > 0)
            .map(|t| Term {
                coef: t.coef * t.age_power as f64,
                age_power: t.age_power - 1,
                ..t.clone()
            })
            .collect();
        Self { terms }
    }

    /// `∂_t f`
    pub fn d_time(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.time_power > 0)
            .map(|t| Term {
                coef: t.coef * t.time_power as f64,
                time_power: t.time_power - 1,
                ..t.clone()
            })
            .collect();
        Self { terms }
    }

    pub fn max_age_power(&self) -> u32 {
        self.terms.iter().map(|t| t.age_power).max().unwrap_or(0)
    }

    pub fn max_time_power(&self) -> u32 {
        self.terms.iter().map(|t| t.time_power).max().unwrap_or(0)
    }

    /// Every finite endpoint of every support.
    pub fn support_endpoints(&self) -> Vec<f64> {
        self.terms
            .iter()
            .filter_map(|t| t.support.as_ref())
            .flat_map(|s| s.endpoints().collect::<Vec<_>>())
            .collect()
    }
}

impl Add for TestFn {
    type Output = TestFn;
    fn add(mut self, rhs: TestFn) -> TestFn {
        self.terms.extend(rhs.terms);
        self
    }
}

impl Sub for TestFn {
    type Output = TestFn;
    fn sub(self, rhs: TestFn) -> TestFn {
        self + (-rhs)
    }
}

impl Neg for TestFn {
    type Output = TestFn;
    fn neg(self) -> TestFn {
        self.scale(-1.0)
    }
}

impl Mul for &TestFn {
    type Output = TestFn;
    fn mul(self, rhs: &TestFn) -> TestFn {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                if let Some(t) = a.product(b) {
                    terms.push(t);
                }
            }
        }
        TestFn { terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popcore::Interval;

    #[test]
    fn eval_and_derivatives() {
        let f = TestFn::age_time(2); // x t^2
        assert_eq!(f.eval(0.5, 2.0), 2.0);
        assert_eq!(f.at_birth(3.0), 0.0);
        assert_eq!(f.d_age().eval(7.0, 2.0), 4.0);
        assert_eq!(f.d_time().eval(0.5, 2.0), 2.0);
        // f_0 = x 1_{m=0}
        assert_eq!(TestFn::age_time(0).eval(0.3, 0.0), 0.3);
        assert_eq!(TestFn::age_time(1).eval(0.3, 0.0), 0.0);
    }

    #[test]
    fn restricted_support() {
        let b = Interval::half_open(0.0, 1.0).unwrap();
        let f = TestFn::age().restrict(&b.into());
        assert_eq!(f.eval(0.5, 0.0), 0.5);
        assert_eq!(f.eval(1.5, 0.0), 0.0);
    }

    #[test]
    fn products_intersect_supports() {
        let f = TestFn::indicator(Interval::half_open(0.0, 1.0).unwrap());
        let g = TestFn::age().restrict(&Interval::closed(0.5, 2.0).unwrap().into());
        let fg = &f * &g;
        assert_eq!(fg.eval(0.7, 0.0), 0.7);
        assert_eq!(fg.eval(0.2, 0.0), 0.0);
        assert_eq!(fg.eval(1.2, 0.0), 0.0);
        let disjoint = TestFn::indicator(Interval::closed(1.0, 2.0).unwrap());
        assert!((&f * &disjoint).terms.is_empty());
    }
}
