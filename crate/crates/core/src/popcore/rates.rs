//! The four rate families.
//!
//! Population dependence always goes through the normalised measure
//! `Ā = A / K`. Ages outside every cell of a piecewise model carry zero
//! hazards: such individuals neither die nor reproduce.

use serde::{Deserialize, Serialize};

use super::interval::{check_partition, Interval, IntervalUnion};
use super::measure::AgeMeasure;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeCell {
    pub interval: Interval,
    pub h: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopAgeCell {
    pub interval: Interval,
    pub alpha: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RateModel {
    Constant {
        h: f64,
        b: f64,
    },
    /// `h_A = λ (1_{J2}, Ā)`, `b_A = η (1_{J1}, Ā)`.
    PopulationLinear {
        lambda: f64,
        j2: IntervalUnion,
        eta: f64,
        j1: IntervalUnion,
    },
    AgePiecewise {
        cells: Vec<AgeCell>,
    },
    /// `h_A(x) = Σ α_i (1_J, Ā) 1_{B_i}(x)`, `b_A(x) = Σ γ_i (1_J, Ā) 1_{B_i}(x)`.
    PopAgePiecewise {
        j: IntervalUnion,
        cells: Vec<PopAgeCell>,
    },
}

/// Family tag without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Constant,
    PopulationLinear,
    AgePiecewise,
    PopAgePiecewise,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::PopulationLinear => "population_linear",
            Family::AgePiecewise => "age_piecewise",
            Family::PopAgePiecewise => "pop_age_piecewise",
        }
    }
}

impl RateModel {
    pub fn family(&self) -> Family {
        match self {
            RateModel::Constant { .. } => Family::Constant,
            RateModel::PopulationLinear { .. } => Family::PopulationLinear,
            RateModel::AgePiecewise { .. } => Family::AgePiecewise,
            RateModel::PopAgePiecewise { .. } => Family::PopAgePiecewise,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!(
                    "{name} = {v} must be finite and nonnegative"
                )))
            }
        };
        match self {
            RateModel::Constant { h, b } => {
                nonneg("h", *h)?;
                nonneg("b", *b)
            }
            RateModel::PopulationLinear { lambda, eta, .. } => {
                nonneg("lambda", *lambda)?;
                nonneg("eta", *eta)
            }
            RateModel::AgePiecewise { cells } => {
                check_partition(&cells.iter().map(|c| c.interval).collect::<Vec<_>>())?;
                for c in cells {
                    nonneg("h_i", c.h)?;
                    nonneg("b_i", c.b)?;
                }
                Ok(())
            }
            RateModel::PopAgePiecewise { cells, .. } => {
                check_partition(&cells.iter().map(|c| c.interval).collect::<Vec<_>>())?;
                for c in cells {
                    nonneg("alpha_i", c.alpha)?;
                    nonneg("gamma_i", c.gamma)?;
                }
                Ok(())
            }
        }
    }

    /// The age windows whose normalised mass enters the hazards.
    pub fn windows(&self) -> Vec<&IntervalUnion> {
        match self {
            RateModel::PopulationLinear { j1, j2, .. } => vec![j1, j2],
            RateModel::PopAgePiecewise { j, .. } => vec![j],
            _ => Vec::new(),
        }
    }

    /// The age cells of the piecewise families.
    pub fn cells(&self) -> Vec<Interval> {
        match self {
            RateModel::AgePiecewise { cells } => cells.iter().map(|c| c.interval).collect(),
            RateModel::PopAgePiecewise { cells, .. } => cells.iter().map(|c| c.interval).collect(),
            _ => Vec::new(),
        }
    }

    /// Every interval endpoint that appears anywhere in the model. Hazards of
    /// an individual can only change when its age crosses one of these.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.windows().into_iter().flat_map(|w| w.endpoints()).collect();
        out.extend(self.cells().iter().flat_map(|c| c.endpoints()));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `(h, b)` at age `x`, with `mass(S)` supplying `(1_S, Ā)`.
    pub fn hazards_given(&self, x: f64, mass: impl Fn(&IntervalUnion) -> f64) -> (f64, f64) {
        match self {
            RateModel::Constant { h, b } => (*h, *b),
            RateModel::PopulationLinear { lambda, j2, eta, j1 } => (lambda * mass(j2), eta * mass(j1)),
            RateModel::AgePiecewise { cells } => cells
                .iter()
                .find(|c| c.interval.contains(x))
                .map_or((0.0, 0.0), |c| (c.h, c.b)),
            RateModel::PopAgePiecewise { j, cells } => match cells.iter().find(|c| c.interval.contains(x)) {
                Some(c) => {
                    let w = mass(j);
                    (c.alpha * w, c.gamma * w)
                }
                None => (0.0, 0.0),
            },
        }
    }

    /// `(h_Ā(x), b_Ā(x))`
    pub fn hazards(&self, population: &AgeMeasure, x: f64) -> (f64, f64) {
        self.hazards_given(x, |s| population.mass(s))
    }

    /// Parameter names in estimator output order.
    pub fn parameter_names(&self) -> Vec<String> {
        match self {
            RateModel::Constant { .. } => vec!["h".into(), "b".into()],
            RateModel::PopulationLinear { .. } => vec!["lambda".into(), "eta".into()],
            RateModel::AgePiecewise { cells } => {
                let n = cells.len();
                (1..=n)
                    .map(|i| format!("h{i}"))
                    .chain((1..=n).map(|i| format!("b{i}")))
                    .collect()
            }
            RateModel::PopAgePiecewise { cells, .. } => {
                let n = cells.len();
                (1..=n)
                    .map(|i| format!("alpha{i}"))
                    .chain((1..=n).map(|i| format!("gamma{i}")))
                    .collect()
            }
        }
    }

    /// Parameter values, aligned with [`RateModel::parameter_names`].
    pub fn parameter_values(&self) -> Vec<f64> {
        match self {
            RateModel::Constant { h, b } => vec![*h, *b],
            RateModel::PopulationLinear { lambda, eta, .. } => vec![*lambda, *eta],
            RateModel::AgePiecewise { cells } => cells.iter().map(|c| c.h).chain(cells.iter().map(|c| c.b)).collect(),
            RateModel::PopAgePiecewise { cells, .. } => cells
                .iter()
                .map(|c| c.alpha)
                .chain(cells.iter().map(|c| c.gamma))
                .collect(),
        }
    }

    /// Same structure, parameters replaced (in [`RateModel::parameter_names`] order).
    pub fn with_parameters(&self, values: &[f64]) -> Result<RateModel> {
        let expected = self.parameter_names().len();
        if values.len() != expected {
            return Err(Error::InvalidModel(format!(
                "expected {expected} parameters, got {}",
                values.len()
            )));
        }
        Ok(match self {
            RateModel::Constant { .. } => RateModel::Constant {
                h: values[0],
                b: values[1],
            },
            RateModel::PopulationLinear { j2, j1, .. } => RateModel::PopulationLinear {
                lambda: values[0],
                j2: j2.clone(),
                eta: values[1],
                j1: j1.clone(),
            },
            RateModel::AgePiecewise { cells } => {
                let n = cells.len();
                RateModel::AgePiecewise {
                    cells: cells
                        .iter()
                        .enumerate()
                        .map(|(i, c)| AgeCell {
                            interval: c.interval,
                            h: values[i],
                            b: values[n + i],
                        })
                        .collect(),
                }
            }
            RateModel::PopAgePiecewise { j, cells } => {
                let n = cells.len();
                RateModel::PopAgePiecewise {
                    j: j.clone(),
                    cells: cells
                        .iter()
                        .enumerate()
                        .map(|(i, c)| PopAgeCell {
                            interval: c.interval,
                            alpha: values[i],
                            gamma: values[n + i],
                        })
                        .collect(),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agedep() -> RateModel {
        RateModel::AgePiecewise {
            cells: vec![
                AgeCell {
                    interval: "[0,1)".parse().unwrap(),
                    h: 0.2,
                    b: 0.1,
                },
                AgeCell {
                    interval: "[1,2]".parse().unwrap(),
                    h: 0.4,
                    b: 0.5,
                },
            ],
        }
    }

    #[test]
    fn constant_hazards() {
        let m = RateModel::Constant { h: 0.2, b: 0.4 };
        let a = AgeMeasure::new(vec![0.1, 3.0], 2).unwrap();
        assert_eq!(m.hazards(&a, 0.7), (0.2, 0.4));
    }

    #[test]
    fn population_linear_hazards() {
        let m = RateModel::PopulationLinear {
            lambda: 0.04,
            j2: "[0,0.5) ∪ (1.5,2]".parse().unwrap(),
            eta: 0.08,
            j1: "[0.5,1.5]".parse().unwrap(),
        };
        // every individual in J1, none in J2: (1_{J2}, Ā) = 0, (1_{J1}, Ā) = 1
        let a = AgeMeasure::new(vec![0.6, 1.0, 1.4], 3).unwrap();
        let (h, b) = m.hazards(&a, 0.9);
        assert_eq!(h, 0.0);
        assert!((b - 0.08).abs() < 1e-15);
    }

    #[test]
    fn ages_outside_cells_are_inert() {
        let a = AgeMeasure::new(vec![0.5], 1).unwrap();
        assert_eq!(agedep().hazards(&a, 2.5), (0.0, 0.0));
        assert_eq!(agedep().hazards(&a, 1.0), (0.4, 0.5));
        assert_eq!(agedep().hazards(&a, 0.999), (0.2, 0.1));
    }

    #[test]
    fn validation() {
        assert!(RateModel::Constant { h: -0.1, b: 0.0 }.validate().is_err());
        let overlapping = RateModel::AgePiecewise {
            cells: vec![
                AgeCell {
                    interval: "[0,1.5)".parse().unwrap(),
                    h: 0.2,
                    b: 0.1,
                },
                AgeCell {
                    interval: "[1,2]".parse().unwrap(),
                    h: 0.4,
                    b: 0.5,
                },
            ],
        };
        assert!(overlapping.validate().is_err());
        assert!(agedep().validate().is_ok());
    }

    #[test]
    fn endpoints_are_sorted_unique() {
        let m = RateModel::PopAgePiecewise {
            j: "[0.5,1.5]".parse().unwrap(),
            cells: vec![
                PopAgeCell {
                    interval: "[0,1)".parse().unwrap(),
                    alpha: 0.02,
                    gamma: 0.03,
                },
                PopAgeCell {
                    interval: "[1,2]".parse().unwrap(),
                    alpha: 0.06,
                    gamma: 0.09,
                },
            ],
        };
        assert_eq!(m.endpoints(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn serde_roundtrip_through_toml() {
        let m = agedep();
        let s = toml::to_string(&m).unwrap();
        let back: RateModel = toml::from_str(&s).unwrap();
        assert_eq!(m, back);
        let parsed: RateModel = toml::from_str(
            "family = \"population_linear\"\nlambda = 0.04\nj2 = \"[0,0.5) ∪ (1.5,2]\"\neta = 0.08\nj1 = \"[0.5,1.5]\"\n",
        )
        .unwrap();
        assert_eq!(parsed.family(), Family::PopulationLinear);
    }

    #[test]
    fn parameter_roundtrip() {
        let m = agedep();
        let v = m.parameter_values();
        assert_eq!(v, vec![0.2, 0.4, 0.1, 0.5]);
        assert_eq!(m.with_parameters(&v).unwrap(), m);
        assert_eq!(m.parameter_names(), vec!["h1", "h2", "b1", "b2"]);
    }
}
