//! Relaxation kernels built from fixed stress directions:
//! `F(t) = B + Σ_J f_J(t)·S_J S_Jᵀ` with `f_J(t) = mass·Σ λ e^(−r t)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernel::{MatrixRelaxation, Mode};
use crate::matrix6::Matrix6;

/// One relaxation term of a direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionMode {
    pub rate: f64,
    /// Fraction of the shared mass, in `[0, 1]`.
    pub lambda: f64,
}

/// A stress direction `S_J` (Voigt) and its relaxation spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenstress {
    pub direction: [f64; 6],
    pub modes: Vec<DirectionMode>,
}

/// Up to six stress directions sharing a mass scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenstressBasis {
    pub mass: f64,
    pub directions: Vec<Eigenstress>,
}

impl EigenstressBasis {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(invalid(format!("mass must be positive (got {})", self.mass)));
        }
        if self.directions.is_empty() || self.directions.len() > 6 {
            return Err(invalid(format!(
                "basis needs between 1 and 6 directions (got {})",
                self.directions.len()
            )));
        }
        for (j, d) in self.directions.iter().enumerate() {
            if d.direction.iter().any(|x| !x.is_finite()) || d.direction.iter().all(|&x| x == 0.0) {
                return Err(invalid(format!("direction {j} must be a finite nonzero vector")));
            }
            for m in &d.modes {
                if !(m.rate.is_finite() && m.rate > 0.0) {
                    return Err(invalid(format!("rate must be positive (got {})", m.rate)));
                }
                if !(0.0..=1.0).contains(&m.lambda) {
                    return Err(invalid(format!(
                        "coefficient {} of direction {j} lies outside [0, 1]",
                        m.lambda
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `B + Σ_J mass·λ·S_J S_Jᵀ e^(−r t)`, with weights sharing a rate summed.
pub fn assemble_eigenstress(basis: &EigenstressBasis, equilibrium: Matrix6) -> Result<MatrixRelaxation> {
    basis.validate()?;
    let mut modes: Vec<Mode<Matrix6>> = Vec::new();
    for d in &basis.directions {
        let outer = Matrix6::outer(&d.direction);
        for m in &d.modes {
            if m.lambda == 0.0 {
                continue;
            }
            let w = outer * (basis.mass * m.lambda);
            match modes.iter_mut().find(|x| x.rate == m.rate) {
                Some(x) => x.weight += w,
                None => modes.push(Mode::new(m.rate, w)),
            }
        }
    }
    MatrixRelaxation::new(Matrix6::zeros(), equilibrium, modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(i: usize) -> [f64; 6] {
        let mut v = [0.0; 6];
        v[i] = 1.0;
        v
    }

    #[test]
    fn orthonormal_basis_gives_identity_weight() {
        let basis = EigenstressBasis {
            mass: 1.0,
            directions: (0..6)
                .map(|i| Eigenstress { direction: unit(i), modes: vec![DirectionMode { rate: 1.0, lambda: 1.0 }] })
                .collect(),
        };
        let k = assemble_eigenstress(&basis, Matrix6::zeros()).unwrap();
        assert_eq!(k.modes().len(), 1);
        assert_eq!(k.modes()[0].weight, Matrix6::identity());
        let t = 0.3;
        assert!((k.eval(t).unwrap() - Matrix6::identity() * (-t).exp()).norm() < 1e-15);
    }

    #[test]
    fn single_direction() {
        let basis = EigenstressBasis {
            mass: 1.0,
            directions: vec![Eigenstress { direction: unit(0), modes: vec![DirectionMode { rate: 2.0, lambda: 1.0 }] }],
        };
        let k = assemble_eigenstress(&basis, Matrix6::zeros()).unwrap();
        assert_eq!(k.modes().len(), 1);
        assert_eq!(k.modes()[0].rate, 2.0);
        assert_eq!(k.modes()[0].weight, Matrix6::outer(&unit(0)));
    }

    #[test]
    fn shared_rate_sums_to_psd() {
        let s1 = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let s2 = [1.0, -1.0, 0.5, 0.0, 0.0, 0.0];
        let basis = EigenstressBasis {
            mass: 2.0,
            directions: vec![
                Eigenstress { direction: s1, modes: vec![DirectionMode { rate: 1.0, lambda: 0.5 }] },
                Eigenstress { direction: s2, modes: vec![DirectionMode { rate: 1.0, lambda: 0.25 }] },
            ],
        };
        let k = assemble_eigenstress(&basis, Matrix6::identity()).unwrap();
        assert_eq!(k.modes().len(), 1);
        let w = k.modes()[0].weight;
        assert!(w.min_eigenvalue() >= -1e-15 * w.norm());
        assert_eq!(w.eigenvalues().iter().filter(|&&e| e > 1e-12).count(), 2);
    }

    #[test]
    fn rejects_out_of_range_lambda() {
        let basis = EigenstressBasis {
            mass: 1.0,
            directions: vec![Eigenstress { direction: unit(0), modes: vec![DirectionMode { rate: 1.0, lambda: 1.5 }] }],
        };
        assert!(assemble_eigenstress(&basis, Matrix6::zeros()).is_err());
    }
}
