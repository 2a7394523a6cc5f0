use serde::Serialize;

use crate::error::{Error, Result};

/// Condition estimates above this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Condition estimates at or above this are accepted but flagged.
pub const CONDITION_WARNING: f64 = 1e8;

/// Square system `M θ = v` assembled from path functionals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub labels: Vec<String>,
    /// `‖M‖∞ ‖M⁻¹‖∞`, infinite when `M` is singular.
    pub condition_estimate: f64,
}

impl LinearSystem {
    pub fn new(matrix: Vec<Vec<f64>>, rhs: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        let n = rhs.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) || labels.len() != n {
            return Err(Error::InvalidInput(format!("system must be {n}x{n} with {n} labels")));
        }
        if matrix.iter().flatten().chain(&rhs).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite system entry".into()));
        }
        let condition_estimate = match inverse(&matrix) {
            Some(inv) => norm_inf(&matrix) * norm_inf(&inv),
            None => f64::INFINITY,
        };
        Ok(Self {
            matrix,
            rhs,
            labels,
            condition_estimate,
        })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn warns(&self) -> bool {
        self.condition_estimate >= CONDITION_WARNING
    }

    /// `M θ - v`
    pub fn residual(&self, theta: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, v)| row.iter().zip(theta).map(|(a, t)| a * t).sum::<f64>() - v)
            .collect()
    }

    pub fn inverse(&self) -> Option<Vec<Vec<f64>>> {
        inverse(&self.matrix)
    }
}

/// Solves by Gaussian elimination with partial pivoting.
pub fn solve(system: &LinearSystem) -> Result<Vec<f64>> {
    let condition = system.condition_estimate;
    if !condition.is_finite() {
        return Err(Error::Singular { condition });
    }
    if condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition,
            threshold: CONDITION_LIMIT,
        });
    }
    let n = system.dim();
    let mut a: Vec<Vec<f64>> = system
        .matrix
        .iter()
        .zip(&system.rhs)
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(*v);
            r
        })
        .collect();
    eliminate(&mut a, n).ok_or(Error::Singular { condition })?;
    Ok(a.iter().map(|row| row[n]).collect())
}

/// Reduces the augmented matrix `a` (n rows, first n columns square) to
/// `[I | M⁻¹ B]`. Returns `None` on a zero pivot.
fn eliminate(a: &mut [Vec<f64>], n: usize) -> Option<()> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        let p = a[col][col];
        for x in a[col].iter_mut() {
            *x /= p;
        }
        let pivot_row = a[col].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != col && row[col] != 0.0 {
                let factor = row[col];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= factor * y;
                }
            }
        }
    }
    Some(())
}

fn inverse(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    eliminate(&mut a, n)?;
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

fn norm_inf(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sys(m: Vec<Vec<f64>>, v: Vec<f64>) -> LinearSystem {
        let labels = (0..v.len()).map(|i| format!("p{i}")).collect();
        LinearSystem::new(m, v, labels).unwrap()
    }

    #[test]
    fn examples() {
        let s = sys(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![3.0, -2.0]);
        assert_eq!(solve(&s).unwrap(), vec![3.0, -2.0]);
        assert_eq!(s.condition_estimate, 1.0);

        let s = sys(vec![vec![2.0, 0.0], vec![0.0, 4.0]], vec![1.0, 2.0]);
        assert_eq!(solve(&s).unwrap(), vec![0.5, 0.5]);

        let s = sys(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0]);
        assert!(matches!(solve(&s), Err(Error::Singular { .. })));
    }

    #[test]
    fn ill_conditioned_is_rejected() {
        let s = sys(vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]], vec![1.0, 1.0]);
        assert!(s.condition_estimate > CONDITION_LIMIT);
        assert!(matches!(solve(&s), Err(Error::IllConditioned { .. })));

        let s = sys(vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-9]], vec![1.0, 1.0]);
        assert!(s.warns());
        assert!(solve(&s).is_ok());
    }

    #[test]
    fn shape_is_checked() {
        assert!(LinearSystem::new(vec![vec![1.0]], vec![1.0, 2.0], vec!["a".into()]).is_err());
    }

    proptest! {
        #[test]
        fn residual_is_small(
            m in prop::collection::vec(-10.0f64..10.0, 9),
            v in prop::collection::vec(-10.0f64..10.0, 3),
        ) {
            let rows: Vec<Vec<f64>> = m.chunks(3).map(<[f64]>::to_vec).collect();
            let s = sys(rows, v.clone());
            prop_assume!(s.condition_estimate < 1e8);
            let x = solve(&s).unwrap();
            let scale = norm_inf(&s.matrix) * x.iter().fold(0.0f64, |a, b| a.max(b.abs()))
                + v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            for r in s.residual(&x) {
                prop_assert!(r.abs() <= 1e-9 * scale);
            }
        }
    }
}
