//! Exact event-driven simulation of the age- and population-dependent
//! birth–death process.
//!
//! Between structure-change epochs (events, and the instants at which some
//! individual's age crosses an interval endpoint of the model) every hazard is
//! constant, so the total hazard is piecewise constant in time. Event times are
//! drawn by accumulating integrated hazard against one unit-exponential target
//! per event, carried across epochs; the acting individual and the event kind
//! are then chosen proportionally to hazards.

mod format;
mod log;

pub use format::fmt17;
pub use log::{Event, EventKind, EventLog};

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::popcore::RateModel;
use crate::regions::AgeRegions;

/// One stretch between consecutive epochs, with the total hazard it ran at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stretch {
    pub start: f64,
    pub end: f64,
    pub total_hazard: f64,
}

/// Simulates one path on `[0, T]` from explicit initial ages.
pub fn simulate(
    model: &RateModel,
    initial_ages: &[f64],
    carrying_capacity: u32,
    horizon: f64,
    seed: u64,
) -> Result<EventLog> {
    Kernel::new(model, initial_ages, carrying_capacity, horizon)?.run(seed, None)
}

/// As [`simulate`], also returning every constant-hazard stretch.
pub fn simulate_traced(
    model: &RateModel,
    initial_ages: &[f64],
    carrying_capacity: u32,
    horizon: f64,
    seed: u64,
) -> Result<(EventLog, Vec<Stretch>)> {
    let mut trace = Vec::new();
    let log = Kernel::new(model, initial_ages, carrying_capacity, horizon)?.run(seed, Some(&mut trace))?;
    Ok((log, trace))
}

/// The next structure-change time after `now` for a population whose ages
/// at `now` are `ages`: the first endpoint crossing, or `T` if none is sooner.
pub fn next_epoch(ages: &[f64], model: &RateModel, now: f64, horizon: f64) -> f64 {
    let endpoints = model.endpoints();
    ages.iter()
        .filter_map(|&a| endpoints.iter().copied().find(|&e| e > a).map(|e| now + (e - a)))
        .fold(horizon, f64::min)
}

const DEAD: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Individual {
    birth: f64,
    region: usize,
    slot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Crossing {
    time: f64,
    id: usize,
}

impl Eq for Crossing {}

impl Ord for Crossing {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Crossing {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Kernel<'a> {
    model: &'a RateModel,
    regions: AgeRegions,
    windows: Vec<(&'a crate::popcore::IntervalUnion, Vec<bool>)>,
    initial_ages: Vec<f64>,
    capacity: u32,
    horizon: f64,
    people: Vec<Individual>,
    members: Vec<Vec<usize>>,
    crossings: BinaryHeap<Reverse<Crossing>>,
    death_rate: Vec<f64>,
    birth_rate: Vec<f64>,
    total: f64,
}

impl<'a> Kernel<'a> {
    fn new(model: &'a RateModel, initial_ages: &[f64], capacity: u32, horizon: f64) -> Result<Self> {
        model.validate()?;
        if capacity == 0 {
            return Err(Error::InvalidInput("K must be at least 1".into()));
        }
        if initial_ages.is_empty() {
            return Err(Error::InvalidInput("initial population is empty".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidInput(format!("horizon {horizon} must be positive")));
        }
        if let Some(a) = initial_ages.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::InvalidInput(format!("invalid initial age {a}")));
        }
        let regions = AgeRegions::new(model.endpoints());
        let windows = model.windows().into_iter().map(|w| (w, regions.mask(w))).collect();
        let n_regions = regions.len();
        Ok(Self {
            model,
            regions,
            windows,
            initial_ages: initial_ages.to_vec(),
            capacity,
            horizon,
            people: Vec::with_capacity(initial_ages.len() * 2),
            members: vec![Vec::new(); n_regions],
            crossings: BinaryHeap::new(),
            death_rate: vec![0.0; n_regions],
            birth_rate: vec![0.0; n_regions],
            total: 0.0,
        })
    }

    fn enter(&mut self, birth: f64, age: f64) {
        let id = self.people.len();
        let region = self.regions.region_of(age);
        self.people.push(Individual {
            birth,
            region,
            slot: self.members[region].len(),
        });
        self.members[region].push(id);
        self.schedule(id);
    }

    fn schedule(&mut self, id: usize) {
        let p = self.people[id];
        if let Some(e) = self.regions.upper(p.region) {
            self.crossings.push(Reverse(Crossing { time: p.birth + e, id }));
        }
    }

    fn detach(&mut self, id: usize) {
        let Individual { region, slot, .. } = self.people[id];
        let list = &mut self.members[region];
        list.swap_remove(slot);
        if let Some(&moved) = list.get(slot) {
            self.people[moved].slot = slot;
        }
    }

    fn kill(&mut self, id: usize) {
        self.detach(id);
        self.people[id].region = DEAD;
    }

    fn advance_region(&mut self, id: usize) {
        self.detach(id);
        let region = self.people[id].region + 1;
        self.people[id].region = region;
        self.people[id].slot = self.members[region].len();
        self.members[region].push(id);
        self.schedule(id);
    }

    fn refresh(&mut self) {
        let k = self.capacity as f64;
        let masses: Vec<f64> = self
            .windows
            .iter()
            .map(|(_, mask)| {
                let n: usize = mask
                    .iter()
                    .zip(&self.members)
                    .filter(|(inside, _)| **inside)
                    .map(|(_, m)| m.len())
                    .sum();
                n as f64 / k
            })
            .collect();
        let mut total = 0.0;
        for r in 0..self.regions.len() {
            let (h, b) = self.model.hazards_given(self.regions.representative(r), |s| {
                self.windows
                    .iter()
                    .position(|(w, _)| *w == s)
                    .map_or(0.0, |i| masses[i])
            });
            self.death_rate[r] = h;
            self.birth_rate[r] = b;
            total += self.members[r].len() as f64 * (h + b);
        }
        self.total = total;
    }

    fn next_crossing(&self) -> Option<f64> {
        self.crossings.peek().map(|Reverse(c)| c.time)
    }

    fn run(mut self, seed: u64, mut trace: Option<&mut Vec<Stretch>>) -> Result<EventLog> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for a in self.initial_ages.clone() {
            self.enter(-a, a);
        }
        self.refresh();

        let horizon = self.horizon;
        let mut events = Vec::new();
        let mut now = 0.0;
        let mut target: f64 = rng.sample(Exp1);
        loop {
            let epoch = self.next_crossing().filter(|&t| t < horizon).unwrap_or(horizon);
            let budget = self.total * (epoch - now);
            if self.total > 0.0 && target < budget {
                let t = now + target / self.total;
                if t < epoch {
                    if let Some(tr) = trace.as_deref_mut() {
                        tr.push(Stretch {
                            start: now,
                            end: t,
                            total_hazard: self.total,
                        });
                    }
                    events.push(self.fire(t, &mut rng));
                    self.refresh();
                    now = t;
                    target = rng.sample(Exp1);
                    continue;
                }
            }
            // Epoch first: either no event before it, or a tie.
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(Stretch {
                    start: now,
                    end: epoch,
                    total_hazard: self.total,
                });
            }
            target = (target - budget).max(0.0);
            now = epoch;
            if epoch >= horizon {
                break;
            }
            while let Some(t) = self.next_crossing() {
                if t > now {
                    break;
                }
                let Reverse(c) = self.crossings.pop().expect("peeked");
                if self.people[c.id].region != DEAD {
                    self.advance_region(c.id);
                }
            }
            self.refresh();
        }

        Ok(EventLog {
            initial_ages: self.initial_ages,
            carrying_capacity: self.capacity,
            horizon,
            events,
            seed,
            model: Some(self.model.clone()),
        })
    }

    fn fire(&mut self, t: f64, rng: &mut ChaCha8Rng) -> Event {
        let u = rng.random::<f64>() * self.total;
        let mut acc = 0.0;
        let mut chosen = None;
        for r in 0..self.regions.len() {
            let w = self.members[r].len() as f64 * (self.death_rate[r] + self.birth_rate[r]);
            if w <= 0.0 {
                continue;
            }
            chosen = Some(r);
            acc += w;
            if u < acc {
                break;
            }
        }
        let r = chosen.expect("positive total hazard implies a populated region");
        let (h, b) = (self.death_rate[r], self.birth_rate[r]);
        let is_death = rng.random::<f64>() * (h + b) < h;
        let idx = rng.random_range(0..self.members[r].len());
        let actor = self.members[r][idx];
        let parent_age = t - self.people[actor].birth;
        if is_death {
            self.kill(actor);
            Event {
                time: t,
                kind: EventKind::Death,
                subject: actor as u64,
                parent_age: Some(parent_age),
            }
        } else {
            let child = self.people.len();
            self.enter(t, 0.0);
            Event {
                time: t,
                kind: EventKind::Birth,
                subject: child as u64,
                parent_age: Some(parent_age),
            }
        }
    }
}
