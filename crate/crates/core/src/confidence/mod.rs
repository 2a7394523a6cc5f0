//! Martingale-CLT confidence intervals and regions.
//!
//! For the m-th test function of an estimating system, the scaled residual
//! `√K (Σ θ_i M_{mi} - v_m)` is approximately `N(0, V_m²)` with
//! `V_m² = ∫ (f_s(0)² b_Ā + h_Ā f_s², Ā_s) ds`. Both sides are linear in the
//! parameters, so every confidence statement reduces to
//!
//! ```text
//! |Σ θ_i M_{mi} - v_m| ≤ c_α √(Σ θ_i W_{mi} + o_m) / √K.
//! ```
//!
//! In [`Mode::Direct`] the variance is evaluated at the candidate parameters;
//! in [`Mode::PlugIn`] it is frozen at the estimates. Substituting estimates
//! changes the coverage probability, which is why every output carries its
//! mode label.

mod region;

pub use region::{region, region_agedep, region_popage, ConfRegion2D, Grid};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::{Design, Equations, LinearSystem, Solution};
use crate::pathfn::{int_hazard_pair, int_weighted, SegmentedPath};
use crate::popcore::{IntervalUnion, RateModel, TestFn};
use crate::sim::EventLog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Variance evaluated at the candidate parameter.
    Direct,
    /// Variance evaluated at the estimates.
    #[serde(rename = "plugin")]
    PlugIn,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Direct, Mode::PlugIn];

    pub fn label(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::PlugIn => "plugin",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(Mode::Direct),
            "plugin" | "plug-in" | "plug_in" => Ok(Mode::PlugIn),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?} (direct|plugin)"))),
        }
    }
}

/// `c_α = Φ⁻¹(1 - α/2)`.
pub fn critical_value(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(Normal::standard().inverse_cdf(1.0 - alpha / 2.0))
}

/// `⟨M^f, M^g⟩_T = ∫ (f_s(0) g_s(0) b_Ā + h_Ā f_s g_s, Ā_s) ds` with the
/// rates of `model` (typically the estimates) along the observed path.
pub fn qv_cov(log: &EventLog, f: &TestFn, g: &TestFn, model: &RateModel) -> Result<f64> {
    let mut endpoints = model.endpoints();
    endpoints.extend(f.support_endpoints());
    endpoints.extend(g.support_endpoints());
    let path = SegmentedPath::build(log, endpoints)?;
    qv_cov_on(&path, f, g, model)
}

/// [`qv_cov`] on an already segmented path.
pub fn qv_cov_on(path: &SegmentedPath, f: &TestFn, g: &TestFn, model: &RateModel) -> Result<f64> {
    let (death, birth) = int_hazard_pair(path, model, &(f * g), 0)?;
    Ok(death + birth)
}

/// The inequality data of one estimating system.
#[derive(Debug, Clone)]
pub struct CltSystem {
    pub system: LinearSystem,
    pub estimate: Vec<f64>,
    /// `V_m²(θ) = Σ_i θ_i weights[m][i] + offset[m]`
    pub weights: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
    pub carrying_capacity: f64,
}

impl CltSystem {
    /// Death system: `f = x tᵐ`, so `V_m² = Σ h_i ∫ s^{2m} w_i (x² 1_{C_i}, Ā)`.
    pub fn death(eq: &Equations, sol: &Solution) -> Result<Self> {
        let weights = variance_weights(&eq.path, &eq.design.death, TestFn::age_pow(2))?;
        let n = weights.len();
        Ok(Self {
            system: eq.death.clone(),
            estimate: sol.death.clone(),
            weights,
            offset: vec![0.0; n],
            carrying_capacity: eq.path.carrying_capacity() as f64,
        })
    }

    /// Birth system with the death estimates substituted:
    /// `V_m² = Σ b_i ∫ s^{2m} w_i (1_{C_i}, Ā) + Σ ĥ_i ∫ s^{2m} w_i (1_{C_i}, Ā)`.
    pub fn birth(eq: &Equations, sol: &Solution) -> Result<Self> {
        let weights = variance_weights(&eq.path, &eq.design.birth, TestFn::one())?;
        let death_weights = variance_weights(&eq.path, &eq.design.death, TestFn::one())?;
        let offset = death_weights
            .iter()
            .map(|row| row.iter().zip(&sol.death).map(|(w, h)| w * h).sum())
            .collect();
        Ok(Self {
            system: sol.birth_system.clone(),
            estimate: sol.birth.clone(),
            weights,
            offset,
            carrying_capacity: eq.path.carrying_capacity() as f64,
        })
    }

    pub fn variance(&self, m: usize, theta: &[f64]) -> f64 {
        self.weights[m].iter().zip(theta).map(|(w, t)| w * t).sum::<f64>() + self.offset[m]
    }

    /// `V̂_m²`
    pub fn plugin_variance(&self, m: usize) -> f64 {
        self.variance(m, &self.estimate)
    }

    /// Whether `theta` satisfies every row's inequality with critical value `c`.
    pub fn feasible(&self, theta: &[f64], c: f64, mode: Mode) -> bool {
        let residual = self.system.residual(theta);
        residual.iter().enumerate().all(|(m, r)| {
            let v2 = match mode {
                Mode::Direct => self.variance(m, theta),
                Mode::PlugIn => self.plugin_variance(m),
            };
            v2 >= 0.0 && r.abs() <= c * (v2 / self.carrying_capacity).sqrt()
        })
    }

    /// Approximate standard errors `√(Σ_m (M⁻¹)²_{im} V̂_m² / K)`.
    pub fn standard_errors(&self) -> Option<Vec<f64>> {
        let inv = self.system.inverse()?;
        let v2: Vec<f64> = (0..self.offset.len()).map(|m| self.plugin_variance(m).abs()).collect();
        Some(
            inv.iter()
                .map(|row| {
                    let s: f64 = row.iter().zip(&v2).map(|(a, v)| a * a * v).sum();
                    (s / self.carrying_capacity).sqrt()
                })
                .collect(),
        )
    }

    /// Closed-form interval for a one-parameter system.
    pub fn interval(&self, c: f64, mode: Mode) -> Result<(f64, f64)> {
        if self.system.dim() != 1 {
            return Err(Error::InvalidInput("closed-form intervals need a 1x1 system".into()));
        }
        let d = self.system.matrix[0][0];
        let theta = self.estimate[0];
        let k = self.carrying_capacity;
        match mode {
            Mode::Direct => {
                // (D u)² ≤ c²/K (W (θ̂ + u) + o)  with u = θ - θ̂
                let a = c * c * self.weights[0][0] / (k * d * d);
                let e = c * c * self.plugin_variance(0) / (k * d * d);
                let disc = a * a / 4.0 + e;
                if disc < 0.0 {
                    return Err(Error::EmptyConfidenceSet(format!(
                        "quadratic inequality for {} has no solution",
                        self.system.labels[0]
                    )));
                }
                let centre = theta + a / 2.0;
                let half = disc.sqrt();
                Ok((centre - half, centre + half))
            }
            Mode::PlugIn => {
                let v2 = self.plugin_variance(0);
                if v2 < 0.0 {
                    return Err(Error::EmptyConfidenceSet(format!(
                        "negative variance estimate for {}",
                        self.system.labels[0]
                    )));
                }
                let half = c * v2.sqrt() / (k.sqrt() * d.abs());
                Ok((theta - half, theta + half))
            }
        }
    }
}

fn variance_weights(path: &SegmentedPath, basis: &[crate::estimators::Basis], g: TestFn) -> Result<Vec<Vec<f64>>> {
    (0..basis.len() as u32)
        .map(|m| {
            basis
                .iter()
                .map(|b| {
                    let f = match &b.cell {
                        Some(cell) => g.clone().restrict(cell),
                        None => g.clone(),
                    };
                    int_weighted(path, b.weight.as_ref(), &f, 2 * m)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub parameter: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub mode: Mode,
    pub alpha: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Intervals for every parameter of a family with one death and one birth
/// parameter, from already solved equations.
pub fn intervals(eq: &Equations, sol: &Solution, alpha: f64, c: f64, mode: Mode) -> Result<Vec<ConfidenceInterval>> {
    let mut out = Vec::with_capacity(2);
    for clt in [CltSystem::death(eq, sol)?, CltSystem::birth(eq, sol)?] {
        let (lower, upper) = clt.interval(c, mode)?;
        out.push(ConfidenceInterval {
            parameter: clt.system.labels[0].clone(),
            estimate: clt.estimate[0],
            lower,
            upper,
            mode,
            alpha,
        });
    }
    Ok(out)
}

/// Intervals for `(h, b)` or `(λ, η)`, depending on `model`'s family.
pub fn ci(log: &EventLog, model: &RateModel, alpha: f64, mode: Mode) -> Result<Vec<ConfidenceInterval>> {
    let c = critical_value(alpha)?;
    let design = Design::of(model)?;
    if design.death.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "closed-form intervals are available for one-parameter hazards, not {}",
            model.family().as_str()
        )));
    }
    let eq = Equations::assemble(log, &design)?;
    let sol = eq.solve()?;
    intervals(&eq, &sol, alpha, c, mode)
}

/// Intervals for `h` and `b` under constant rates.
pub fn ci_constant(log: &EventLog, alpha: f64, mode: Mode) -> Result<(ConfidenceInterval, ConfidenceInterval)> {
    let mut v = ci(log, &RateModel::Constant { h: 0.0, b: 0.0 }, alpha, mode)?;
    let b = v.pop().expect("two intervals");
    Ok((v.pop().expect("two intervals"), b))
}

/// Intervals for `λ` and `η` under population-linear rates.
pub fn ci_popdep(
    log: &EventLog,
    j1: &IntervalUnion,
    j2: &IntervalUnion,
    alpha: f64,
    mode: Mode,
) -> Result<(ConfidenceInterval, ConfidenceInterval)> {
    let model = RateModel::PopulationLinear {
        lambda: 0.0,
        j2: j2.clone(),
        eta: 0.0,
        j1: j1.clone(),
    };
    let mut v = ci(log, &model, alpha, mode)?;
    let eta = v.pop().expect("two intervals");
    Ok((v.pop().expect("two intervals"), eta))
}
