//! Symmetric 6×6 matrices in Voigt (Mandel) form.
//!
//! Index `I = 0, 1, 2` stands for the normal components 11, 22, 33 and
//! `I = 3, 4, 5` for the shear components 23, 31, 12. Shear components of
//! second-order tensors carry a factor √2, so the Euclidean inner product of
//! two Voigt vectors equals the double contraction of the tensors and a
//! fourth-order tensor with major symmetry maps to a symmetric matrix.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::SymmetricEigen;

use crate::error::{invalid, Result};

pub type Dense6 = nalgebra::Matrix6<f64>;
pub type Vector6 = nalgebra::Vector6<f64>;

const UPPER_LEN: usize = 21;

/// Relative tolerance used for positive-semidefiniteness decisions.
pub const TOL_PSD: f64 = 1e-10;

#[inline]
const fn upper_index(i: usize, j: usize) -> usize {
    // row-major upper triangle, i <= j
    6 * i - i * i.saturating_sub(1) / 2 + (j - i)
}

#[inline]
fn index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    upper_index(i, j)
}

/// A real symmetric 6×6 matrix. Only the upper triangle is stored, so the
/// value is symmetric by construction.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix6 {
    upper: [f64; UPPER_LEN],
}

impl Matrix6 {
    pub const fn zeros() -> Self {
        Matrix6 { upper: [0.0; UPPER_LEN] }
    }

    pub fn identity() -> Self {
        Self::from_diagonal(&[1.0; 6])
    }

    pub fn from_diagonal(d: &[f64; 6]) -> Self {
        let mut m = Self::zeros();
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from the 21 upper-triangle entries in row-major order
    /// (11, 12, …, 16, 22, 23, …, 66).
    pub fn from_upper(upper: [f64; UPPER_LEN]) -> Self {
        Matrix6 { upper }
    }

    pub fn upper(&self) -> &[f64; UPPER_LEN] {
        &self.upper
    }

    /// Symmetric part `(M + Mᵀ)/2` of a dense matrix.
    pub fn from_dense(m: &Dense6) -> Self {
        let mut out = Self::zeros();
        for i in 0..6 {
            for j in i..6 {
                out.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        out
    }

    /// Builds from full rows. The lower triangle must agree with the upper
    /// one to within `tol` relative to the largest entry; the stored value
    /// is taken from the upper triangle.
    pub fn from_rows(rows: &[[f64; 6]; 6], tol: f64) -> Result<Self> {
        let scale = rows
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let mut out = Self::zeros();
        for i in 0..6 {
            for j in i..6 {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(invalid(format!("non-finite matrix entry at ({}, {})", i + 1, j + 1)));
                }
                if (a - b).abs() > tol * scale {
                    return Err(invalid(format!(
                        "matrix is not symmetric: entry ({}, {}) = {a} but ({}, {}) = {b}",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
                out.set(i, j, a);
            }
        }
        Ok(out)
    }

    pub fn to_rows(&self) -> [[f64; 6]; 6] {
        let mut rows = [[0.0; 6]; 6];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        rows
    }

    /// Rank-one matrix `v vᵀ`.
    pub fn outer(v: &[f64; 6]) -> Self {
        let mut out = Self::zeros();
        for i in 0..6 {
            for j in i..6 {
                out.set(i, j, v[i] * v[j]);
            }
        }
        out
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.upper[index(i, j)] = v;
    }

    pub fn to_dense(&self) -> Dense6 {
        Dense6::from_fn(|i, j| self.get(i, j))
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..6).map(|i| self.get(i, i)).sum()
    }

    /// `vᵀ M v`.
    pub fn quad_form(&self, v: &[f64; 6]) -> f64 {
        let mut acc = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                acc += v[i] * self.get(i, j) * v[j];
            }
        }
        acc
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigen(&self) -> (Vector6, Dense6) {
        let eig = SymmetricEigen::new(self.to_dense());
        let mut order: Vec<usize> = (0..6).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = Vector6::from_fn(|k, _| eig.eigenvalues[order[k]]);
        let vectors = Dense6::from_fn(|i, k| eig.eigenvectors[(i, order[k])]);
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vector6 {
        self.eigen().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0].abs().max(ev[5].abs())
    }

    pub fn is_psd(&self, rel_tol: f64) -> bool {
        self.min_eigenvalue() >= -rel_tol * self.norm()
    }

    /// Positive definite with a margin: smallest eigenvalue above
    /// `rel_tol · ‖M‖` and the matrix nonzero.
    pub fn is_positive_definite(&self, rel_tol: f64) -> bool {
        let ev = self.eigenvalues();
        let norm = ev[0].abs().max(ev[5].abs());
        norm > 0.0 && ev[0] > rel_tol * norm
    }

    /// Replaces eigenvalues in `[-tol·scale, tol·scale]` by zero. Fails when
    /// an eigenvalue is more negative than that. Returns the clipped matrix
    /// together with the smallest eigenvalue seen before clipping.
    pub fn psd_clip(&self, rel_tol: f64, scale: f64) -> Result<(Matrix6, f64)> {
        let (values, vectors) = self.eigen();
        let scale = if scale > 0.0 { scale } else { values[0].abs().max(values[5].abs()) };
        let thresh = rel_tol * scale;
        if values[0] < -thresh {
            return Err(invalid(format!(
                "matrix is not positive semidefinite: eigenvalue {:e} below -{:e}",
                values[0], thresh
            )));
        }
        if values.iter().all(|&v| v > thresh) {
            return Ok((*self, values[0]));
        }
        let mut acc = Dense6::zeros();
        for k in 0..6 {
            if values[k] > thresh {
                let col = vectors.column(k);
                acc += values[k] * col * col.transpose();
            }
        }
        Ok((Matrix6::from_dense(&acc), values[0]))
    }

    pub fn inverse(&self) -> Option<Matrix6> {
        self.to_dense().try_inverse().map(|m| Matrix6::from_dense(&m))
    }

    /// Matrix product, which is symmetric only when the factors commute; the
    /// symmetric part is returned.
    pub fn sym_product(&self, other: &Matrix6) -> Matrix6 {
        Matrix6::from_dense(&(self.to_dense() * other.to_dense()))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Builds from a fourth-order tensor with minor and major symmetries,
    /// applying the √2 shear weights.
    pub fn from_tensor4(c: &[[[[f64; 3]; 3]; 3]; 3]) -> Matrix6 {
        let mut out = Matrix6::zeros();
        for a in 0..6 {
            let (i, j) = VOIGT_PAIRS[a];
            for b in a..6 {
                let (k, l) = VOIGT_PAIRS[b];
                out.set(a, b, voigt_weight(a) * voigt_weight(b) * c[i][j][k][l]);
            }
        }
        out
    }

    pub fn to_tensor4(&self) -> [[[[f64; 3]; 3]; 3]; 3] {
        let mut c = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let (a, b) = (voigt_index(i, j), voigt_index(k, l));
                        c[i][j][k][l] = self.get(a, b) / (voigt_weight(a) * voigt_weight(b));
                    }
                }
            }
        }
        c
    }
}

/// Tensor index pairs of the six Voigt components.
pub const VOIGT_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (2, 0), (0, 1)];

/// Voigt component of the tensor index pair `(i, j)`.
pub fn voigt_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => panic!("tensor index out of range: ({i}, {j})"),
    }
}

fn voigt_weight(a: usize) -> f64 {
    if a < 3 {
        1.0
    } else {
        std::f64::consts::SQRT_2
    }
}

/// Voigt vector of a symmetric second-order tensor.
pub fn tensor2_to_voigt(t: &[[f64; 3]; 3]) -> [f64; 6] {
    let mut v = [0.0; 6];
    for (a, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
        v[a] = voigt_weight(a) * t[i][j];
    }
    v
}

pub fn voigt_to_tensor2(v: &[f64; 6]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for (a, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
        let x = v[a] / voigt_weight(a);
        t[i][j] = x;
        t[j][i] = x;
    }
    t
}

impl Default for Matrix6 {
    fn default() -> Self {
        Self::zeros()
    }
}

impl fmt::Debug for Matrix6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows().iter()).finish()
    }
}

impl fmt::Display for Matrix6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.to_rows().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6e}")).collect();
            write!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

impl Add for Matrix6 {
    type Output = Matrix6;
    fn add(mut self, rhs: Matrix6) -> Matrix6 {
        self += rhs;
        self
    }
}

impl AddAssign for Matrix6 {
    fn add_assign(&mut self, rhs: Matrix6) {
        for (a, b) in self.upper.iter_mut().zip(rhs.upper.iter()) {
            *a += b;
        }
    }
}

impl Sub for Matrix6 {
    type Output = Matrix6;
    fn sub(mut self, rhs: Matrix6) -> Matrix6 {
        for (a, b) in self.upper.iter_mut().zip(rhs.upper.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for Matrix6 {
    type Output = Matrix6;
    fn neg(mut self) -> Matrix6 {
        for a in self.upper.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul<f64> for Matrix6 {
    type Output = Matrix6;
    fn mul(mut self, rhs: f64) -> Matrix6 {
        for a in self.upper.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl Mul<Matrix6> for f64 {
    type Output = Matrix6;
    fn mul(self, rhs: Matrix6) -> Matrix6 {
        rhs * self
    }
}

impl Sum for Matrix6 {
    fn sum<I: Iterator<Item = Matrix6>>(iter: I) -> Matrix6 {
        iter.fold(Matrix6::zeros(), |acc, m| acc + m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_layout_is_row_major() {
        let mut seen = [false; UPPER_LEN];
        let mut expected = 0;
        for i in 0..6 {
            for j in i..6 {
                assert_eq!(index(i, j), expected);
                assert_eq!(index(j, i), expected);
                seen[expected] = true;
                expected += 1;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn rejects_asymmetric_rows() {
        let mut rows = Matrix6::identity().to_rows();
        rows[0][1] = 0.5;
        assert!(Matrix6::from_rows(&rows, 1e-12).is_err());
        rows[1][0] = 0.5 + 1e-14;
        let m = Matrix6::from_rows(&rows, 1e-12).unwrap();
        assert_eq!(m.get(1, 0), 0.5);
    }

    #[test]
    fn psd_clip_removes_roundoff_only() {
        let v = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let m = Matrix6::outer(&v) - Matrix6::identity() * 1e-14;
        let (clipped, before) = m.psd_clip(TOL_PSD, 1.0).unwrap();
        assert!(before < 0.0);
        assert!(clipped.min_eigenvalue() >= 0.0);
        assert!((clipped.get(0, 0) - (1.0 - 1e-14)).abs() < 1e-15);

        let bad = Matrix6::outer(&v) - Matrix6::identity() * 1e-6;
        assert!(bad.psd_clip(TOL_PSD, 1.0).is_err());
    }

    #[test]
    fn voigt_preserves_double_contraction() {
        let s = [[1.0, 0.3, -0.2], [0.3, 2.0, 0.7], [-0.2, 0.7, -1.5]];
        let e = [[0.5, -0.1, 0.4], [-0.1, 0.25, 0.9], [0.4, 0.9, 3.0]];
        let direct: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| s[i][j] * e[i][j]).sum();
        let (sv, ev) = (tensor2_to_voigt(&s), tensor2_to_voigt(&e));
        let voigt: f64 = sv.iter().zip(ev.iter()).map(|(a, b)| a * b).sum();
        assert!((direct - voigt).abs() < 1e-14);
        assert_eq!(voigt_to_tensor2(&sv), s);
    }

    #[test]
    fn isotropic_tensor_maps_to_expected_matrix() {
        // C_ijkl = λ δij δkl + μ (δik δjl + δil δjk)
        let (lambda, mu) = (2.0, 3.0);
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut c = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        c[i][j][k][l] = lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                    }
                }
            }
        }
        let m = Matrix6::from_tensor4(&c);
        assert_eq!(m.get(0, 0), lambda + 2.0 * mu);
        assert_eq!(m.get(0, 1), lambda);
        assert!((m.get(3, 3) - 2.0 * mu).abs() < 1e-14);
        assert_eq!(m.get(0, 3), 0.0);
        let back = m.to_tensor4();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert!((back[i][j][k][l] - c[i][j][k][l]).abs() < 1e-14);
                    }
                }
            }
        }
    }
}
