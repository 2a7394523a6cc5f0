//! Exact time integrals of pairings along an observed path.
//!
//! The path is cut at every event and at every instant some individual's age
//! crosses an endpoint of a referenced interval. On each segment all interval
//! memberships are fixed and every age is `s - β` for a fixed birth date `β`,
//! so `(x^p 1_S, Ā_s)` is a polynomial in `s` built from power sums of the
//! birth dates. Integrals are then evaluated from antiderivatives.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::popcore::{AgeMeasure, Interval, IntervalUnion, RateModel, TestFn};
use crate::regions::AgeRegions;
use crate::sim::{EventKind, EventLog};

/// Highest age power a pairing may carry (products of two quadratic test
/// functions).
pub const MAX_AGE_POWER: u32 = 4;
const STATS: usize = MAX_AGE_POWER as usize + 1;

/// Polynomial in time, coefficients from the constant term up.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    /// `c s^m`
    pub fn monomial(c: f64, m: u32) -> Self {
        let mut v = vec![0.0; m as usize + 1];
        v[m as usize] = c;
        Poly(v)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn add_assign(&mut self, other: &Poly) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), 0.0);
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn scaled(mut self, c: f64) -> Self {
        for a in &mut self.0 {
            *a *= c;
        }
        self
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly::default();
        }
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    /// Multiplies by `s^m`.
    pub fn shifted(&self, m: u32) -> Poly {
        let mut v = vec![0.0; m as usize];
        v.extend_from_slice(&self.0);
        Poly(v)
    }

    /// `∫_a^b p(s) ds`
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let mut pa = a;
        let mut pb = b;
        let mut total = 0.0;
        for (k, &c) in self.0.iter().enumerate() {
            if c != 0.0 {
                total += c * (pb - pa) / (k as f64 + 1.0);
            }
            pa *= a;
            pb *= b;
        }
        total
    }
}

/// A path cut into segments on which every referenced membership is fixed.
#[derive(Debug, Clone)]
pub struct SegmentedPath {
    capacity: u32,
    horizon: f64,
    regions: AgeRegions,
    bounds: Vec<(f64, f64)>,
    // segment-major, then region, then [count, Σβ, Σβ², Σβ³, Σβ⁴]
    stats: Vec<f64>,
    initial: AgeMeasure,
    terminal: AgeMeasure,
}

/// Cuts `log` at every event and every crossing of an endpoint of `intervals`.
pub fn segment(log: &EventLog, intervals: &[Interval]) -> Result<SegmentedPath> {
    SegmentedPath::build(log, intervals.iter().flat_map(|i| i.endpoints()).collect())
}

/// Segments `log` so that every interval referenced by `model` is resolved.
pub fn segment_for_model(log: &EventLog, model: &RateModel) -> Result<SegmentedPath> {
    SegmentedPath::build(log, model.endpoints())
}

impl SegmentedPath {
    /// Coincident breakpoints closer than this fraction of `T` are merged.
    pub const DEDUP_TOLERANCE: f64 = 1e-12;

    pub fn build(log: &EventLog, endpoints: Vec<f64>) -> Result<Self> {
        log.validate()?;
        let regions = AgeRegions::new(endpoints);
        let nr = regions.len();
        let horizon = log.horizon;
        let tol = Self::DEDUP_TOLERANCE * horizon;

        let mut current = vec![0.0; nr * STATS];
        // subject id -> (birth date, region)
        let mut alive: HashMap<u64, (f64, usize)> = HashMap::with_capacity(log.initial_count() * 2);
        let mut heap: BinaryHeap<Reverse<(OrdF64, u64)>> = BinaryHeap::new();

        let add = |stats: &mut [f64], region: usize, beta: f64, sign: f64| {
            let base = region * STATS;
            let mut p = 1.0;
            for k in 0..STATS {
                stats[base + k] += sign * p;
                p *= beta;
            }
        };
        let schedule = |heap: &mut BinaryHeap<Reverse<(OrdF64, u64)>>, id: u64, beta: f64, region: usize| {
            if let Some(e) = regions.upper(region) {
                heap.push(Reverse((OrdF64(beta + e), id)));
            }
        };

        for (i, &a) in log.initial_ages.iter().enumerate() {
            let beta = -a;
            let r = regions.region_of(a);
            add(&mut current, r, beta, 1.0);
            alive.insert(i as u64, (beta, r));
            schedule(&mut heap, i as u64, beta, r);
        }

        let mut bounds = Vec::new();
        let mut stats = Vec::new();
        let mut seg_start = 0.0;
        let mut next_event = 0;
        loop {
            let te = log.events.get(next_event).map(|e| e.time);
            let tc = heap.peek().map(|Reverse((t, _))| t.0).filter(|&t| t < horizon);
            let (tau, crossing) = match (te, tc) {
                (None, None) => break,
                (Some(te), Some(tc)) if tc <= te => (tc, true),
                (None, Some(tc)) => (tc, true),
                (Some(te), _) => (te, false),
            };
            if tau - seg_start > tol {
                bounds.push((seg_start, tau));
                stats.extend_from_slice(&current);
                seg_start = tau;
            }
            if crossing {
                while let Some(Reverse((t, id))) = heap.peek().copied() {
                    if t.0 > tau {
                        break;
                    }
                    heap.pop();
                    // stale entries belong to individuals that have since died
                    let Some(entry) = alive.get_mut(&id) else { continue };
                    let (beta, r) = *entry;
                    add(&mut current, r, beta, -1.0);
                    add(&mut current, r + 1, beta, 1.0);
                    entry.1 = r + 1;
                    schedule(&mut heap, id, beta, r + 1);
                }
            } else {
                let e = &log.events[next_event];
                next_event += 1;
                match e.kind {
                    EventKind::Death => {
                        let (beta, r) = alive
                            .remove(&e.subject)
                            .ok_or_else(|| Error::CorruptLog(format!("death of {} who is not alive", e.subject)))?;
                        add(&mut current, r, beta, -1.0);
                    }
                    EventKind::Birth => {
                        let r = regions.region_of(0.0);
                        add(&mut current, r, e.time, 1.0);
                        alive.insert(e.subject, (e.time, r));
                        schedule(&mut heap, e.subject, e.time, r);
                    }
                }
            }
        }
        if horizon > seg_start {
            bounds.push((seg_start, horizon));
            stats.extend_from_slice(&current);
        }

        Ok(Self {
            capacity: log.carrying_capacity,
            horizon,
            regions,
            bounds,
            stats,
            initial: log.replay(0.0)?,
            terminal: log.replay(horizon)?,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn carrying_capacity(&self) -> u32 {
        self.capacity
    }

    pub fn endpoints(&self) -> &[f64] {
        self.regions.endpoints()
    }

    pub fn segment_count(&self) -> usize {
        self.bounds.len()
    }

    /// `0 = t_0 < t_1 < … < t_M = T`
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.bounds.iter().map(|b| b.0).collect();
        out.push(self.horizon);
        out
    }

    /// `A_0`
    pub fn initial(&self) -> &AgeMeasure {
        &self.initial
    }

    /// `A_T`
    pub fn terminal(&self) -> &AgeMeasure {
        &self.terminal
    }

    /// Resolves `f` against this path's regions.
    pub fn compile(&self, f: &TestFn) -> Result<CompiledFn> {
        let mut terms = Vec::with_capacity(f.terms.len());
        for t in &f.terms {
            if t.age_power > MAX_AGE_POWER {
                return Err(Error::UnsupportedFunction(format!(
                    "age power {} exceeds {MAX_AGE_POWER}",
                    t.age_power
                )));
            }
            let mask = match &t.support {
                None => vec![true; self.regions.len()],
                Some(s) => {
                    if !self.regions.resolves(s.endpoints()) {
                        return Err(Error::UnsupportedFunction(format!(
                            "support {s} has endpoints the path was not segmented at"
                        )));
                    }
                    self.regions.mask(s)
                }
            };
            terms.push(CompiledTerm {
                coef: t.coef,
                age_power: t.age_power,
                time_power: t.time_power,
                mask,
            });
        }
        Ok(CompiledFn { terms })
    }

    /// Resolves an age window against this path's regions.
    pub fn window(&self, support: &IntervalUnion) -> Result<Vec<bool>> {
        if !self.regions.resolves(support.endpoints()) {
            return Err(Error::UnsupportedFunction(format!(
                "window {support} has endpoints the path was not segmented at"
            )));
        }
        Ok(self.regions.mask(support))
    }

    pub fn segments(&self) -> impl Iterator<Item = SegmentView<'_>> + '_ {
        let stride = self.regions.len() * STATS;
        self.bounds
            .iter()
            .enumerate()
            .map(move |(i, &(start, end))| SegmentView {
                start,
                end,
                stats: &self.stats[i * stride..(i + 1) * stride],
                path: self,
            })
    }

    /// `∫_a^b p_seg(s) ds`, summing a per-segment polynomial over `[a, b]`.
    pub fn integrate_over<F>(&self, a: f64, b: f64, mut per_segment: F) -> f64
    where
        F: FnMut(&SegmentView<'_>) -> Poly,
    {
        let mut total = 0.0;
        for seg in self.segments() {
            let lo = seg.start.max(a);
            let hi = seg.end.min(b);
            if hi > lo {
                total += per_segment(&seg).integrate(lo, hi);
            }
        }
        total
    }

    /// `∫_0^T p_seg(s) ds`
    pub fn integrate<F>(&self, per_segment: F) -> f64
    where
        F: FnMut(&SegmentView<'_>) -> Poly,
    {
        self.integrate_over(0.0, self.horizon, per_segment)
    }

    fn region_hazards(
        &self,
        model: &RateModel,
        seg: &SegmentView<'_>,
        windows: &[(IntervalUnion, Vec<bool>)],
    ) -> Vec<(f64, f64)> {
        (0..self.regions.len())
            .map(|r| {
                model.hazards_given(self.regions.representative(r), |s| {
                    windows
                        .iter()
                        .find(|(w, _)| w == s)
                        .map_or(0.0, |(_, mask)| seg.mass_masked(mask))
                })
            })
            .collect()
    }

    fn model_windows(&self, model: &RateModel) -> Result<Vec<(IntervalUnion, Vec<bool>)>> {
        if !self.regions.resolves(model.endpoints()) {
            return Err(Error::UnsupportedFunction(
                "model intervals were not used to segment the path".into(),
            ));
        }
        Ok(model
            .windows()
            .into_iter()
            .map(|w| (w.clone(), self.regions.mask(w)))
            .collect())
    }
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    coef: f64,
    age_power: u32,
    time_power: u32,
    mask: Vec<bool>,
}

/// A test function resolved against the regions of one path.
#[derive(Debug, Clone)]
pub struct CompiledFn {
    terms: Vec<CompiledTerm>,
}

const BINOMIAL: [[f64; STATS]; STATS] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

/// One segment of a [`SegmentedPath`].
#[derive(Debug, Clone, Copy)]
pub struct SegmentView<'a> {
    pub start: f64,
    pub end: f64,
    stats: &'a [f64],
    path: &'a SegmentedPath,
}

impl SegmentView<'_> {
    fn k(&self) -> f64 {
        self.path.capacity as f64
    }

    /// Number of individuals in region `r` on this segment.
    pub fn region_count(&self, r: usize) -> f64 {
        self.stats[r * STATS]
    }

    /// `Σ_{i in region r} (s - β_i)^p` as a polynomial in `s` (unnormalised).
    fn region_power_poly(&self, r: usize, p: u32) -> Poly {
        let base = r * STATS;
        let p = p as usize;
        let mut coefs = vec![0.0; p + 1];
        for k in 0..=p {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            coefs[p - k] += sign * BINOMIAL[p][k] * self.stats[base + k];
        }
        Poly(coefs)
    }

    fn pair_poly_where(&self, f: &CompiledFn, region_filter: impl Fn(usize) -> bool) -> Poly {
        let mut out = Poly::default();
        for t in &f.terms {
            let mut sum = Poly::default();
            for (r, &inside) in t.mask.iter().enumerate() {
                if inside && region_filter(r) && self.region_count(r) > 0.0 {
                    sum.add_assign(&self.region_power_poly(r, t.age_power));
                }
            }
            out.add_assign(&sum.shifted(t.time_power).scaled(t.coef));
        }
        out.scaled(1.0 / self.k())
    }

    /// `(f_s, Ā_s)` on this segment, as a polynomial in `s`.
    pub fn pair_poly(&self, f: &CompiledFn) -> Poly {
        self.pair_poly_where(f, |_| true)
    }

    /// `(f_s 1_{region r}, Ā_s)`
    pub fn pair_poly_in_region(&self, f: &CompiledFn, r: usize) -> Poly {
        self.pair_poly_where(f, |q| q == r)
    }

    /// `(1_S, Ā_s)` for a resolved window mask; constant on the segment.
    pub fn mass_masked(&self, mask: &[bool]) -> f64 {
        let n: f64 = mask
            .iter()
            .enumerate()
            .filter(|(_, inside)| **inside)
            .map(|(r, _)| self.region_count(r))
            .sum();
        n / self.k()
    }

    pub fn population(&self) -> f64 {
        (0..self.path.regions.len()).map(|r| self.region_count(r)).sum::<f64>() / self.k()
    }
}

/// `∫_0^T s^m (f_s, Ā_s) ds`
pub fn int_pair(path: &SegmentedPath, f: &TestFn, m: u32) -> Result<f64> {
    let cf = path.compile(f)?;
    Ok(path.integrate(|seg| seg.pair_poly(&cf).shifted(m)))
}

/// `∫_0^T s^m (1_J, Ā_s)(f_s, Ā_s) ds`
pub fn int_product(path: &SegmentedPath, window: &IntervalUnion, f: &TestFn, m: u32) -> Result<f64> {
    let cf = path.compile(f)?;
    let mask = path.window(window)?;
    Ok(path.integrate(|seg| seg.pair_poly(&cf).shifted(m).scaled(seg.mass_masked(&mask))))
}

/// `∫_0^T s^m w(s) (f_s, Ā_s) ds` with `w = (1_J, Ā_s)` when a window is
/// given and `w = 1` otherwise.
pub fn int_weighted(path: &SegmentedPath, window: Option<&IntervalUnion>, f: &TestFn, m: u32) -> Result<f64> {
    match window {
        Some(w) => int_product(path, w, f, m),
        None => int_pair(path, f, m),
    }
}

/// `(f_t, Ā_t)` by replaying the log.
pub fn endpoint_pair(log: &EventLog, f: &TestFn, t: f64) -> Result<f64> {
    Ok(log.replay(t)?.pair(f, t, true))
}

/// Hazard-weighted integrals along the path under `model`:
/// `(∫ s^m (h_Ā f_s, Ā_s) ds, ∫ s^m f_s(0) (b_Ā, Ā_s) ds)`.
pub fn int_hazard_pair(path: &SegmentedPath, model: &RateModel, f: &TestFn, m: u32) -> Result<(f64, f64)> {
    let cf = path.compile(f)?;
    let windows = path.model_windows(model)?;
    let birth_value = TestFn {
        terms: f.terms.iter().filter(|t| t.age_power == 0).cloned().collect(),
    };
    let mut death = 0.0;
    let mut birth = 0.0;
    for seg in path.segments() {
        let rates = path.region_hazards(model, &seg, &windows);
        let mut dp = Poly::default();
        let mut births_per_capita = 0.0;
        for (r, &(h, b)) in rates.iter().enumerate() {
            if seg.region_count(r) == 0.0 {
                continue;
            }
            if h != 0.0 {
                dp.add_assign(&seg.pair_poly_in_region(&cf, r).scaled(h));
            }
            births_per_capita += b * seg.region_count(r);
        }
        death += dp.shifted(m).integrate(seg.start, seg.end);
        if births_per_capita != 0.0 {
            // f_s(0): only terms without an age factor, and only if 0 is in their support
            let f0 = time_poly_at_zero_age(&birth_value);
            birth += f0
                .shifted(m)
                .scaled(births_per_capita / seg.k())
                .integrate(seg.start, seg.end);
        }
    }
    Ok((death, birth))
}

/// `∫_0^T (∂_x f_s + ∂_t f_s - h_Ā f_s + f_s(0) b_Ā, Ā_s) ds`, the compensator
/// of `(f_t, Ā_t)` under `model`.
pub fn drift_integral(path: &SegmentedPath, model: &RateModel, f: &TestFn) -> Result<f64> {
    let transport = int_pair(path, &(f.d_age() + f.d_time()), 0)?;
    let (death, birth) = int_hazard_pair(path, model, f, 0)?;
    Ok(transport - death + birth)
}

/// `f(0, s)` as a polynomial in `s`.
fn time_poly_at_zero_age(f: &TestFn) -> Poly {
    let mut out = Poly::default();
    for t in &f.terms {
        if t.age_power == 0 && t.support.as_ref().is_none_or(|s| s.contains(0.0)) {
            out.add_assign(&Poly::monomial(t.coef, t.time_power));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Event;

    fn log(initial: Vec<f64>, k: u32, horizon: f64, events: Vec<(f64, EventKind, u64)>) -> EventLog {
        EventLog {
            initial_ages: initial,
            carrying_capacity: k,
            horizon,
            events: events
                .into_iter()
                .map(|(time, kind, subject)| Event {
                    time,
                    kind,
                    subject,
                    parent_age: None,
                })
                .collect(),
            seed: 0,
            model: None,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn breakpoint_examples() {
        let p = segment(&log(vec![0.3], 1, 2.0, vec![]), &[]).unwrap();
        assert_eq!(p.breakpoints(), vec![0.0, 2.0]);

        let p = segment(&log(vec![0.5], 1, 1.0, vec![]), &["[0,1)".parse().unwrap()]).unwrap();
        assert_eq!(p.breakpoints(), vec![0.0, 0.5, 1.0]);

        // The 0.9-year-old reaches 1.0 at s = 0.1, before its death at 0.3.
        let l = log(vec![0.2, 0.9], 2, 1.0, vec![(0.3, EventKind::Death, 1)]);
        let p = segment(&l, &["[0,1)".parse().unwrap()]).unwrap();
        let bp = p.breakpoints();
        let expect = [0.0, 0.1, 0.3, 0.8, 1.0];
        assert_eq!(bp.len(), expect.len());
        for (a, b) in bp.iter().zip(expect) {
            assert!(close(*a, b), "{bp:?}");
        }
    }

    #[test]
    fn int_pair_examples() {
        let p = segment(&log(vec![0.0], 1, 1.0, vec![]), &[]).unwrap();
        assert!(close(int_pair(&p, &TestFn::age(), 0).unwrap(), 0.5));

        let p = segment(&log(vec![0.1, 0.2, 0.3], 4, 2.0, vec![]), &[]).unwrap();
        assert!(close(int_pair(&p, &TestFn::one(), 0).unwrap(), 3.0 * 2.0 / 4.0));

        let b: Interval = "[0,1)".parse().unwrap();
        let p = segment(&log(vec![0.5], 1, 1.0, vec![]), &[b]).unwrap();
        let f = TestFn::age().restrict(&b.into());
        assert!(close(int_pair(&p, &f, 0).unwrap(), 0.375));
    }

    #[test]
    fn int_product_examples() {
        let j: IntervalUnion = "[0,1)".parse().unwrap();
        let p = segment(&log(vec![0.2], 1, 0.5, vec![]), j.parts()).unwrap();
        assert!(close(int_product(&p, &j, &TestFn::one(), 0).unwrap(), 0.5));

        let p = segment(&log(vec![0.5], 1, 1.0, vec![]), j.parts()).unwrap();
        assert!(close(int_product(&p, &j, &TestFn::age(), 0).unwrap(), 0.375));

        let far: IntervalUnion = "[5,6)".parse().unwrap();
        let p = segment(&log(vec![0.5], 1, 1.0, vec![]), far.parts()).unwrap();
        assert_eq!(int_product(&p, &far, &TestFn::age_time(2), 1).unwrap(), 0.0);
    }

    #[test]
    fn endpoint_pair_examples() {
        let l = log(vec![0.2, 0.5], 2, 1.0, vec![]);
        assert_eq!(endpoint_pair(&l, &TestFn::one(), 0.0).unwrap(), 1.0);
        assert!(close(endpoint_pair(&l, &TestFn::age(), 1.0).unwrap(), 1.35));
        assert_eq!(endpoint_pair(&l, &TestFn::age_time(1), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn unsupported_support_is_rejected() {
        let p = segment(&log(vec![0.5], 1, 1.0, vec![]), &[]).unwrap();
        let f = TestFn::indicator("[0,1)".parse::<Interval>().unwrap());
        assert!(matches!(int_pair(&p, &f, 0), Err(Error::UnsupportedFunction(_))));
        assert!(matches!(
            int_pair(&p, &TestFn::age_pow(5), 0),
            Err(Error::UnsupportedFunction(_))
        ));
    }

    #[test]
    fn hand_path_with_death() {
        // initial {0.2, 0.5}, K = 2, 0.5-year-old dies at 0.5, T = 1
        let l = log(vec![0.2, 0.5], 2, 1.0, vec![(0.5, EventKind::Death, 1)]);
        let p = segment(&l, &[]).unwrap();
        assert!(close(int_pair(&p, &TestFn::one(), 0).unwrap(), 0.75));
        assert!(close(int_pair(&p, &TestFn::age(), 0).unwrap(), 0.5375));
        // ∫ s (x, Ā): (1/2)[∫_0^1 s(0.2+s) + ∫_0^.5 s(0.5+s)]
        let expect = 0.5 * ((0.1 + 1.0 / 3.0) + (0.0625 + 0.125 / 3.0));
        assert!(close(int_pair(&p, &TestFn::age(), 1).unwrap(), expect));
    }

    #[test]
    fn poly_integration() {
        let p = Poly(vec![1.0, 2.0, 3.0]);
        assert!(close(p.integrate(0.0, 2.0), 2.0 + 4.0 + 8.0));
        assert!(close(p.mul(&Poly(vec![0.0, 1.0])).eval(2.0), 2.0 * 17.0));
    }
}
