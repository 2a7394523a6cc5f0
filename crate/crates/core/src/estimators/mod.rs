//! Rate estimators from the pre-limit estimating equations.
//!
//! Every family writes its hazards as
//! `h_Ā(x) = Σ_i θ_i w_i(Ā) 1_{C_i}(x)` with a weight `w_i` that is either
//! `1` or a window mass `(1_J, Ā)`, and likewise for `b`. For a test function
//! `f`, the identity
//!
//! ```text
//! ∫ f_s(0) (b_Ā, Ā_s) ds - ∫ (h_Ā f_s, Ā_s) ds
//!     = (f_T, Ā_T) - (f_0, Ā_0) - ∫ (∂_x f_s + ∂_t f_s, Ā_s) ds
//! ```
//!
//! is linear in the parameters. The death parameters come from the ladder
//! `f = x tᵐ` (where `f(0) = 0` removes the birth term), then the birth
//! parameters from `f = tᵐ` with the death estimates substituted.

mod linear;

pub use linear::{solve, LinearSystem, CONDITION_LIMIT, CONDITION_WARNING};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pathfn::{int_pair, int_weighted, segment_for_model, SegmentedPath};
use crate::popcore::{AgeCell, Family, Interval, IntervalUnion, PopAgeCell, RateModel, TestFn};
use crate::sim::EventLog;

/// One unknown of a hazard: `θ w(Ā) 1_C(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    /// Age cell `C`; `None` is every age.
    pub cell: Option<IntervalUnion>,
    /// Window `J` of the weight `(1_J, Ā)`; `None` is the unit weight.
    pub weight: Option<IntervalUnion>,
}

impl Basis {
    fn restrict(&self, f: TestFn) -> TestFn {
        match &self.cell {
            Some(c) => f.restrict(c),
            None => f,
        }
    }
}

/// The linear structure of a rate family.
#[derive(Debug, Clone)]
pub struct Design {
    pub model: RateModel,
    pub death: Vec<Basis>,
    pub birth: Vec<Basis>,
}

impl Design {
    /// Structure of `model`; its parameter values are ignored.
    pub fn of(model: &RateModel) -> Result<Self> {
        model.validate()?;
        let (death, birth) = match model {
            RateModel::Constant { .. } => {
                let unit = Basis {
                    cell: None,
                    weight: None,
                };
                (vec![unit.clone()], vec![unit])
            }
            RateModel::PopulationLinear { j2, j1, .. } => (
                vec![Basis {
                    cell: None,
                    weight: Some(j2.clone()),
                }],
                vec![Basis {
                    cell: None,
                    weight: Some(j1.clone()),
                }],
            ),
            RateModel::AgePiecewise { cells } => {
                let b: Vec<Basis> = cells
                    .iter()
                    .map(|c| Basis {
                        cell: Some(c.interval.into()),
                        weight: None,
                    })
                    .collect();
                (b.clone(), b)
            }
            RateModel::PopAgePiecewise { j, cells } => {
                let b: Vec<Basis> = cells
                    .iter()
                    .map(|c| Basis {
                        cell: Some(c.interval.into()),
                        weight: Some(j.clone()),
                    })
                    .collect();
                (b.clone(), b)
            }
        };
        Ok(Self {
            model: model.clone(),
            death,
            birth,
        })
    }

    pub fn family(&self) -> Family {
        self.model.family()
    }

    pub fn death_names(&self) -> Vec<String> {
        let names = self.model.parameter_names();
        names[..self.death.len()].to_vec()
    }

    pub fn birth_names(&self) -> Vec<String> {
        let names = self.model.parameter_names();
        names[self.death.len()..].to_vec()
    }
}

/// `f = x tᵐ`, the m-th test function for death parameters.
pub fn death_test_fn(m: u32) -> TestFn {
    TestFn::age_time(m)
}

/// `f = tᵐ`, the m-th test function for birth parameters.
pub fn birth_test_fn(m: u32) -> TestFn {
    TestFn::time_pow(m)
}

/// `(f_T, Ā_T) - (f_0, Ā_0) - ∫ (∂_x f + ∂_t f, Ā_s) ds`
pub fn drift_residual(path: &SegmentedPath, f: &TestFn) -> Result<f64> {
    let transport = int_pair(path, &(f.d_age() + f.d_time()), 0)?;
    let t = path.horizon();
    Ok(path.terminal().pair(f, t, true) - path.initial().pair(f, 0.0, true) - transport)
}

/// `∫ sᵐ w(Ā_s) (g 1_C, Ā_s) ds` for one basis element.
fn basis_integral(path: &SegmentedPath, basis: &Basis, g: TestFn, m: u32) -> Result<f64> {
    int_weighted(path, basis.weight.as_ref(), &basis.restrict(g), m)
}

/// Both estimating systems on one segmented path.
#[derive(Debug, Clone)]
pub struct Equations {
    pub design: Design,
    pub path: SegmentedPath,
    /// Death system: `M_{mi} = ∫ sᵐ w_i (x 1_{C_i}, Ā)`.
    pub death: LinearSystem,
    birth_matrix: Vec<Vec<f64>>,
    birth_base: Vec<f64>,
    /// `∫ sᵐ w_i (1_{C_i}, Ā)` over the death basis, one row per birth test function.
    birth_coupling: Vec<Vec<f64>>,
}

impl Equations {
    pub fn assemble(log: &EventLog, design: &Design) -> Result<Self> {
        let path = segment_for_model(log, &design.model)?;
        Self::on_path(path, design)
    }

    pub fn on_path(path: SegmentedPath, design: &Design) -> Result<Self> {
        let nh = design.death.len();
        let nb = design.birth.len();

        let mut death_matrix = Vec::with_capacity(nh);
        let mut death_rhs = Vec::with_capacity(nh);
        for m in 0..nh as u32 {
            let row = design
                .death
                .iter()
                .map(|b| basis_integral(&path, b, TestFn::age(), m))
                .collect::<Result<Vec<_>>>()?;
            death_matrix.push(row);
            death_rhs.push(-drift_residual(&path, &death_test_fn(m))?);
        }

        let mut birth_matrix = Vec::with_capacity(nb);
        let mut birth_base = Vec::with_capacity(nb);
        let mut birth_coupling = Vec::with_capacity(nb);
        for m in 0..nb as u32 {
            birth_matrix.push(
                design
                    .birth
                    .iter()
                    .map(|b| basis_integral(&path, b, TestFn::one(), m))
                    .collect::<Result<Vec<_>>>()?,
            );
            birth_coupling.push(
                design
                    .death
                    .iter()
                    .map(|b| basis_integral(&path, b, TestFn::one(), m))
                    .collect::<Result<Vec<_>>>()?,
            );
            birth_base.push(drift_residual(&path, &birth_test_fn(m))?);
        }

        check_scalar(&death_matrix, design, "death")?;
        check_scalar(&birth_matrix, design, "birth")?;
        let death = LinearSystem::new(death_matrix, death_rhs, design.death_names())?;
        Ok(Self {
            design: design.clone(),
            path,
            death,
            birth_matrix,
            birth_base,
            birth_coupling,
        })
    }

    /// Birth system with the death parameters fixed at `death_params`.
    pub fn birth_system(&self, death_params: &[f64]) -> Result<LinearSystem> {
        let rhs = self
            .birth_base
            .iter()
            .zip(&self.birth_coupling)
            .map(|(base, row)| base + row.iter().zip(death_params).map(|(c, h)| c * h).sum::<f64>())
            .collect();
        LinearSystem::new(self.birth_matrix.clone(), rhs, self.design.birth_names())
    }

    /// `∫ sᵐ w_i (1_{C_i}, Ā)` for the death basis, per birth test function.
    pub fn birth_coupling(&self) -> &[Vec<f64>] {
        &self.birth_coupling
    }

    /// Solves the death system, then the birth system.
    pub fn solve(&self) -> Result<Solution> {
        let death = solve(&self.death)?;
        let birth_system = self.birth_system(&death)?;
        let birth = solve(&birth_system)?;
        Ok(Solution {
            death,
            birth,
            birth_system,
        })
    }
}

fn check_scalar(matrix: &[Vec<f64>], design: &Design, what: &str) -> Result<()> {
    if matrix.len() == 1 && matrix[0][0] == 0.0 {
        let basis = if what == "death" {
            &design.death[0]
        } else {
            &design.birth[0]
        };
        let msg = match &basis.weight {
            Some(w) => format!("{what} denominator vanishes: window {w} is empty along the path"),
            None => format!("{what} denominator vanishes: no exposure along the path"),
        };
        return Err(Error::DegeneratePath(msg));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub death: Vec<f64>,
    pub birth: Vec<f64>,
    pub birth_system: LinearSystem,
}

/// Estimates with diagnostics and the inputs needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub family: Family,
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub death_condition: f64,
    pub birth_condition: f64,
    /// Some condition estimate lies in the warning band.
    pub ill_conditioned_warning: bool,
    /// Some estimate is negative; estimates are never clipped.
    pub negative: bool,
    pub carrying_capacity: u32,
    pub horizon: f64,
    pub seed: u64,
    pub extinction_time: Option<f64>,
}

impl EstimateReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.estimates[i])
    }

    /// The estimates as a model of the same structure.
    pub fn to_model(&self, structure: &RateModel) -> Result<RateModel> {
        structure.with_parameters(&self.estimates)
    }
}

/// Estimates every parameter of `model`'s family from `log`. The parameter
/// values in `model` are only used for its structure.
pub fn estimate(log: &EventLog, model: &RateModel) -> Result<EstimateReport> {
    let design = Design::of(model)?;
    let eq = Equations::assemble(log, &design)?;
    let sol = eq.solve()?;
    let estimates: Vec<f64> = sol.death.iter().chain(&sol.birth).copied().collect();
    Ok(EstimateReport {
        family: design.family(),
        names: model.parameter_names(),
        negative: estimates.iter().any(|&x| x < 0.0),
        estimates,
        death_condition: eq.death.condition_estimate,
        birth_condition: sol.birth_system.condition_estimate,
        ill_conditioned_warning: eq.death.warns() || sol.birth_system.warns(),
        carrying_capacity: log.carrying_capacity,
        horizon: log.horizon,
        seed: log.seed,
        extinction_time: log.extinction_time(),
    })
}

/// `(ĥ, b̂)` for constant rates.
pub fn estimate_constant(log: &EventLog) -> Result<(f64, f64)> {
    let r = estimate(log, &RateModel::Constant { h: 0.0, b: 0.0 })?;
    Ok((r.estimates[0], r.estimates[1]))
}

/// `(λ̂, η̂)` for `h = λ (1_{J2}, Ā)`, `b = η (1_{J1}, Ā)`.
pub fn estimate_popdep(log: &EventLog, j1: &IntervalUnion, j2: &IntervalUnion) -> Result<(f64, f64)> {
    let model = RateModel::PopulationLinear {
        lambda: 0.0,
        j2: j2.clone(),
        eta: 0.0,
        j1: j1.clone(),
    };
    let r = estimate(log, &model)?;
    Ok((r.estimates[0], r.estimates[1]))
}

/// `(ĥ_1..ĥ_n, b̂_1..b̂_n)` for rates piecewise constant on `cells`.
pub fn estimate_agedep(log: &EventLog, cells: &[Interval]) -> Result<(Vec<f64>, Vec<f64>)> {
    let model = RateModel::AgePiecewise {
        cells: cells
            .iter()
            .map(|&interval| AgeCell {
                interval,
                h: 0.0,
                b: 0.0,
            })
            .collect(),
    };
    let r = estimate(log, &model)?;
    let n = cells.len();
    Ok((r.estimates[..n].to_vec(), r.estimates[n..].to_vec()))
}

/// `(α̂_1..α̂_n, γ̂_1..γ̂_n)` for rates `α_i (1_J, Ā)` and `γ_i (1_J, Ā)` on `cells`.
pub fn estimate_popage(log: &EventLog, j: &IntervalUnion, cells: &[Interval]) -> Result<(Vec<f64>, Vec<f64>)> {
    let model = RateModel::PopAgePiecewise {
        j: j.clone(),
        cells: cells
            .iter()
            .map(|&interval| PopAgeCell {
                interval,
                alpha: 0.0,
                gamma: 0.0,
            })
            .collect(),
    };
    let r = estimate(log, &model)?;
    let n = cells.len();
    Ok((r.estimates[..n].to_vec(), r.estimates[n..].to_vec()))
}
