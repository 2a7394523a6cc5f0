//! Shared test support: an independent path replay, a left-Riemann oracle
//! and random model/log generators.

#![allow(dead_code)]

use std::collections::HashMap;

use agemeasure::estimators::Design;
use agemeasure::popcore::{AgeCell, PopAgeCell};
use agemeasure::sim::EventKind;
use agemeasure::{simulate, EventLog, IntervalUnion, RateModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One individual's lifetime: `β` is the birth date, alive on `[entered, died)`.
#[derive(Debug, Clone, Copy)]
pub struct Life {
    pub beta: f64,
    pub entered: f64,
    pub died: f64,
}

/// Lifetimes rebuilt from the raw event list, without the crate's replay.
pub fn lives(log: &EventLog) -> Vec<Life> {
    let mut out: Vec<Life> = log
        .initial_ages
        .iter()
        .map(|&a| Life {
            beta: -a,
            entered: 0.0,
            died: f64::INFINITY,
        })
        .collect();
    let mut slot: HashMap<u64, usize> = (0..out.len()).map(|i| (i as u64, i)).collect();
    for e in &log.events {
        match e.kind {
            EventKind::Birth => {
                slot.insert(e.subject, out.len());
                out.push(Life {
                    beta: e.time,
                    entered: e.time,
                    died: f64::INFINITY,
                });
            }
            EventKind::Death => out[slot[&e.subject]].died = e.time,
        }
    }
    out
}

/// Ages of everyone alive at `s` (events at `s` already applied).
pub fn ages_at(lives: &[Life], s: f64, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(
        lives
            .iter()
            .filter(|l| l.entered <= s && s < l.died)
            .map(|l| s - l.beta),
    );
}

/// Left-Riemann sums `Σ_j Δt g(s_j, ages(s_j))` for a vector-valued `g`, `s_j = jΔt`.
pub fn riemann<G>(log: &EventLog, dt: f64, width: usize, mut g: G) -> Vec<f64>
where
    G: FnMut(f64, &[f64], &mut [f64]),
{
    let lives = lives(log);
    let steps = (log.horizon / dt).round() as usize;
    let mut total = vec![0.0; width];
    let mut row = vec![0.0; width];
    let mut ages = Vec::new();
    for j in 0..steps {
        let s = j as f64 * dt;
        ages_at(&lives, s, &mut ages);
        row.iter_mut().for_each(|r| *r = 0.0);
        g(s, &ages, &mut row);
        for (t, r) in total.iter_mut().zip(&row) {
            *t += dt * r;
        }
    }
    total
}

/// Independent values of both estimating systems.
#[derive(Debug)]
pub struct OracleSystems {
    pub death_matrix: Vec<Vec<f64>>,
    pub death_rhs: Vec<f64>,
    pub birth_matrix: Vec<Vec<f64>>,
    pub birth_coupling: Vec<Vec<f64>>,
    pub birth_base: Vec<f64>,
}

fn weight(window: &Option<IntervalUnion>, ages: &[f64], k: f64) -> f64 {
    match window {
        Some(j) => ages.iter().filter(|&&a| j.contains(a)).count() as f64 / k,
        None => 1.0,
    }
}

fn in_cell(cell: &Option<IntervalUnion>, a: f64) -> bool {
    cell.as_ref().is_none_or(|c| c.contains(a))
}

/// The estimating systems of `design` on `log`, with every time integral
/// replaced by a left-Riemann sum at step `dt`.
pub fn oracle_systems(log: &EventLog, design: &Design, dt: f64) -> OracleSystems {
    let k = log.carrying_capacity as f64;
    let nh = design.death.len();
    let nb = design.birth.len();
    // layout: death M (nh*nh), death transport (nh), birth M (nb*nb), coupling (nb*nh), birth transport (nb)
    let width = nh * nh + nh + nb * nb + nb * nh + nb;
    let sums = riemann(log, dt, width, |s, ages, row| {
        let mut at = 0;
        let death_x: Vec<f64> = design
            .death
            .iter()
            .map(|b| weight(&b.weight, ages, k) * ages.iter().filter(|&&a| in_cell(&b.cell, a)).sum::<f64>() / k)
            .collect();
        let death_1: Vec<f64> = design
            .death
            .iter()
            .map(|b| weight(&b.weight, ages, k) * ages.iter().filter(|&&a| in_cell(&b.cell, a)).count() as f64 / k)
            .collect();
        let birth_1: Vec<f64> = design
            .birth
            .iter()
            .map(|b| weight(&b.weight, ages, k) * ages.iter().filter(|&&a| in_cell(&b.cell, a)).count() as f64 / k)
            .collect();
        let n = ages.len() as f64 / k;
        let xsum = ages.iter().sum::<f64>() / k;
        for m in 0..nh {
            for w in &death_x {
                row[at] = s.powi(m as i32) * w;
                at += 1;
            }
        }
        // ∂_t + ∂_x of x tᵐ is m t^{m-1} x + tᵐ
        for m in 0..nh {
            let dt_term = if m == 0 {
                0.0
            } else {
                m as f64 * s.powi(m as i32 - 1) * xsum
            };
            row[at] = dt_term + s.powi(m as i32) * n;
            at += 1;
        }
        for m in 0..nb {
            for w in &birth_1 {
                row[at] = s.powi(m as i32) * w;
                at += 1;
            }
        }
        for m in 0..nb {
            for w in &death_1 {
                row[at] = s.powi(m as i32) * w;
                at += 1;
            }
        }
        for m in 0..nb {
            row[at] = if m == 0 {
                0.0
            } else {
                m as f64 * s.powi(m as i32 - 1) * n
            };
            at += 1;
        }
    });

    let lives = lives(log);
    let t = log.horizon;
    let mut a0 = Vec::new();
    let mut at = Vec::new();
    ages_at(&lives, 0.0, &mut a0);
    ages_at(&lives, t, &mut at);
    let (x0, xt) = (a0.iter().sum::<f64>() / k, at.iter().sum::<f64>() / k);
    let (n0, nt) = (a0.len() as f64 / k, at.len() as f64 / k);
    let tpow = |m: usize| t.powi(m as i32);
    let zpow = |m: usize| if m == 0 { 1.0 } else { 0.0 };

    let mut it = sums.into_iter();
    let mut take = |n: usize| (&mut it).take(n).collect::<Vec<f64>>();
    let death_matrix = (0..nh).map(|_| take(nh)).collect();
    let death_rhs = take(nh)
        .into_iter()
        .enumerate()
        .map(|(m, transport)| -(tpow(m) * xt - zpow(m) * x0 - transport))
        .collect();
    let birth_matrix = (0..nb).map(|_| take(nb)).collect();
    let birth_coupling = (0..nb).map(|_| take(nh)).collect();
    let birth_base = take(nb)
        .into_iter()
        .enumerate()
        .map(|(m, transport)| tpow(m) * nt - zpow(m) * n0 - transport)
        .collect();
    OracleSystems {
        death_matrix,
        death_rhs,
        birth_matrix,
        birth_coupling,
        birth_base,
    }
}

pub fn two_cells() -> [agemeasure::Interval; 2] {
    ["[0,1)".parse().unwrap(), "[1,2]".parse().unwrap()]
}

/// A model of a random family with random positive parameters.
pub fn random_model(rng: &mut impl Rng) -> RateModel {
    let cells = two_cells();
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    match (u(0.0, 4.0)) as u32 {
        0 => RateModel::Constant {
            h: u(0.1, 1.5),
            b: u(0.1, 1.5),
        },
        1 => RateModel::PopulationLinear {
            lambda: u(0.2, 1.5),
            j2: "[0,0.5) ∪ (1.5,2]".parse().unwrap(),
            eta: u(0.2, 1.5),
            j1: "[0.5,1.5]".parse().unwrap(),
        },
        2 => RateModel::AgePiecewise {
            cells: cells
                .iter()
                .map(|&c| AgeCell {
                    interval: c,
                    h: u(0.1, 1.5),
                    b: u(0.1, 1.5),
                })
                .collect(),
        },
        _ => RateModel::PopAgePiecewise {
            j: "[0.5,1.5]".parse().unwrap(),
            cells: cells
                .iter()
                .map(|&c| PopAgeCell {
                    interval: c,
                    alpha: u(0.2, 2.0),
                    gamma: u(0.2, 2.0),
                })
                .collect(),
        },
    }
}

/// A simulated log with `K ≤ 50`, `U[0,1)` initial ages and `T = 1`.
pub fn random_log(seed: u64) -> (RateModel, EventLog) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = random_model(&mut rng);
    let k = rng.random_range(5..=50u32);
    let ages: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
    let log = simulate(&model, &ages, k, 1.0, seed).unwrap();
    (model, log)
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
