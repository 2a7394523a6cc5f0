use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::popcore::{AgeMeasure, RateModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Birth,
    Death,
}

impl EventKind {
    pub fn code(self) -> char {
        match self {
            EventKind::Birth => 'B',
            EventKind::Death => 'D',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    /// For a death, who dies. For a birth, the newborn's id.
    pub subject: u64,
    /// Age of the acting individual at the event (diagnostic only, not persisted).
    pub parent_age: Option<f64>,
}

/// A complete continuous-time trajectory on `[0, T]`. Individuals present at
/// time 0 carry ids `0..initial_ages.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub initial_ages: Vec<f64>,
    pub carrying_capacity: u32,
    pub horizon: f64,
    pub events: Vec<Event>,
    pub seed: u64,
    pub model: Option<RateModel>,
}

impl EventLog {
    pub fn initial_count(&self) -> usize {
        self.initial_ages.len()
    }

    pub fn births(&self) -> usize {
        self.events.iter().filter(|e| e.kind == EventKind::Birth).count()
    }

    pub fn deaths(&self) -> usize {
        self.events.len() - self.births()
    }

    /// Population count at `T`.
    pub fn final_count(&self) -> usize {
        self.initial_count() + self.births() - self.deaths()
    }

    /// Time at which the population first hits zero, if it does.
    pub fn extinction_time(&self) -> Option<f64> {
        let mut n = self.initial_count() as i64;
        if n == 0 {
            return Some(0.0);
        }
        for e in &self.events {
            n += match e.kind {
                EventKind::Birth => 1,
                EventKind::Death => -1,
            };
            if n == 0 {
                return Some(e.time);
            }
        }
        None
    }

    /// Checks time ordering and that the events can be replayed.
    pub fn validate(&self) -> Result<()> {
        if self.carrying_capacity == 0 {
            return Err(Error::CorruptLog("carrying capacity must be positive".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::CorruptLog(format!("horizon {} must be positive", self.horizon)));
        }
        let mut last = 0.0;
        for (i, e) in self.events.iter().enumerate() {
            if !(e.time > last && e.time <= self.horizon) {
                return Err(Error::CorruptLog(format!(
                    "event {i} at time {} is out of order or outside (0, T]",
                    e.time
                )));
            }
            last = e.time;
        }
        self.replay(self.horizon).map(|_| ())
    }

    /// Reconstructs `A_t`, applying every event at or before `t`.
    pub fn replay(&self, t: f64) -> Result<AgeMeasure> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::InvalidInput(format!(
                "replay time {t} outside [0, {}]",
                self.horizon
            )));
        }
        let entries = self.alive_at(t)?;
        let ages = entries.into_iter().map(|entry| entry.age_at(t)).collect();
        AgeMeasure::new(ages, self.carrying_capacity)
    }

    /// Alive individuals at `t`, in order of entry.
    pub(crate) fn alive_at(&self, t: f64) -> Result<Vec<Entry>> {
        let n0 = self.initial_ages.len();
        let mut entries: Vec<Entry> = self
            .initial_ages
            .iter()
            .enumerate()
            .map(|(i, &a)| Entry {
                id: i as u64,
                entered: 0.0,
                entry_age: a,
                alive: true,
            })
            .collect();
        let mut index: HashMap<u64, usize> = (0..n0).map(|i| (i as u64, i)).collect();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            match e.kind {
                EventKind::Death => {
                    let slot = index.get(&e.subject).copied().filter(|&s| entries[s].alive);
                    match slot {
                        Some(s) => entries[s].alive = false,
                        None => {
                            return Err(Error::CorruptLog(format!(
                                "death of individual {} at {} who is not alive",
                                e.subject, e.time
                            )))
                        }
                    }
                }
                EventKind::Birth => {
                    if index.contains_key(&e.subject) {
                        return Err(Error::CorruptLog(format!(
                            "newborn id {} at {} already used",
                            e.subject, e.time
                        )));
                    }
                    index.insert(e.subject, entries.len());
                    entries.push(Entry {
                        id: e.subject,
                        entered: e.time,
                        entry_age: 0.0,
                        alive: true,
                    });
                }
            }
        }
        entries.retain(|e| e.alive);
        Ok(entries)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    #[allow(dead_code)]
    pub id: u64,
    pub entered: f64,
    pub entry_age: f64,
    pub alive: bool,
}

impl Entry {
    pub fn age_at(&self, t: f64) -> f64 {
        self.entry_age + (t - self.entered)
    }
}
