//! Matrix-valued CBF inversion.
//!
//! `Z(p) = C₀ + p·C₁ + Σ p·Wₖ/(p + rₖ)` with PSD coefficients is inverted
//! into Stieltjes form `A + D/p + Σ Hⱼ/(p + sⱼ)`. The zeros of `det Z` on
//! the negative axis are the eigenvalues of a symmetric pencil built from
//! low-rank factors `Wₖ = Lₖ Lₖᵀ`:
//!
//! ```text
//! A(p) = [ C₀ + ΣWₖ + p·C₁     −rₖ·Lₖ        ]
//!        [ −rₖ·Lₖᵀ              rₖ(rₖ + p)·I  ]
//! ```
//!
//! whose Schur complement onto the first block is `Z(p)`. Both `A(0)` and
//! the `p`-coefficient are PSD and `A(γ)` is positive definite for `γ > 0`
//! under the nondegeneracy condition, so the spectrum is real and is
//! computed by a Cholesky-reduced symmetric eigensolve. Each root is then
//! polished on `Z` itself and its residue is taken from the null space of
//! `Z(−s)`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, numeric, Result};
use crate::kernel::{MatrixCreep, MatrixRelaxation, Mode};
use crate::matrix6::{Dense6, Matrix6, TOL_PSD};
use crate::rational::RealPolynomial;

/// Roots closer than this (relative) are one semisimple cluster.
pub const TOL_CLUSTER: f64 = 1e-9;
/// Imaginary parts above this fraction of the spectral scale are rejected.
pub const TOL_IMAG: f64 = 1e-10;
/// Relative mismatch allowed between the two evaluations of the constant term.
pub const TOL_CROSS_CHECK: f64 = 1e-8;
/// Eigenvalues of a weight below this fraction of its norm are dropped from
/// its low-rank factor.
const TOL_RANK: f64 = 1e-13;
/// `Z(−s)` eigenvalues below this fraction of the term scale count as null.
const TOL_NULL: f64 = 1e-8;
/// Eigenvalues of the constant term below this fraction of the term scale
/// count as zero, each contributing a root at `s = 0`.
const TOL_ZERO_RANK: f64 = 1e-12;
/// Pencil eigenvalues assigned to the zero root must lie within this
/// fraction of the smallest rate.
const TOL_ZERO_ROOT: f64 = 1e-6;
/// Roots within this relative distance of a rate take their residue from
/// the pencil eigenvectors; `Z(−s)` is too large there for the null-space
/// formula.
const TOL_NEAR_POLE: f64 = 1e-4;

fn near_pole(cbf: &MatrixCbf, s: f64) -> bool {
    cbf.modes.iter().any(|m| (s - m.0).abs() <= TOL_NEAR_POLE * m.0)
}

/// `C₀ + p·C₁ + Σ p·Wₖ/(p + rₖ)` with symmetric PSD coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCbf {
    pub constant: Matrix6,
    pub slope: Matrix6,
    /// `(rate, weight)` sorted by rate.
    pub modes: Vec<(f64, Matrix6)>,
}

impl MatrixCbf {
    /// `p·R̃(p)` of a relaxation kernel.
    pub fn from_relaxation(k: &MatrixRelaxation) -> Self {
        MatrixCbf {
            constant: k.equilibrium(),
            slope: k.newtonian(),
            modes: k.modes().iter().map(|m| (m.rate, m.weight)).collect(),
        }
    }

    /// `p·[p·C̃(p)] = D + p·A + Σ p·Hⱼ/(p + sⱼ)` of a creep kernel.
    pub fn from_creep(c: &MatrixCreep) -> Self {
        MatrixCbf {
            constant: c.fluidity(),
            slope: c.instantaneous(),
            modes: c.modes().iter().map(|m| (m.rate, m.weight)).collect(),
        }
    }

    pub fn eval(&self, p: f64) -> Matrix6 {
        self.modes
            .iter()
            .fold(self.constant + self.slope * p, |acc, &(r, w)| acc + w * (p / (p + r)))
    }

    pub fn derivative(&self, p: f64) -> Matrix6 {
        self.modes.iter().fold(self.slope, |acc, &(r, w)| {
            let q = p + r;
            acc + w * (r / (q * q))
        })
    }

    /// Sum of the norms of the individual terms at `p`; the natural
    /// magnitude against which cancellation in `Z(p)` is judged.
    pub fn term_scale(&self, p: f64) -> f64 {
        self.constant.norm()
            + self.slope.norm() * p.abs()
            + self
                .modes
                .iter()
                .map(|&(r, w)| w.norm() * (p / (p + r)).abs())
                .sum::<f64>()
    }

    /// `C₀ + C₁ + Σ Wₖ`, positive definite iff `Z(p)` is invertible for `p > 0`.
    pub fn condition_matrix(&self) -> Matrix6 {
        self.modes.iter().fold(self.constant + self.slope, |acc, &(_, w)| acc + w)
    }

    pub fn check_nondegenerate(&self) -> Result<()> {
        if self.condition_matrix().is_positive_definite(TOL_PSD) {
            Ok(())
        } else {
            Err(invalid(
                "nondegeneracy condition violated: some direction has an identically vanishing kernel",
            ))
        }
    }

    pub fn max_rate(&self) -> Option<f64> {
        self.modes.last().map(|m| m.0)
    }

    /// Characteristic rate used to scale the spectral problem.
    fn spectral_scale(&self) -> f64 {
        if let Some(r) = self.max_rate() {
            return r;
        }
        let (c0, c1) = (self.constant.norm(), self.slope.norm());
        if c0 > 0.0 && c1 > 0.0 {
            c0 / c1
        } else {
            1.0
        }
    }
}

/// `A + D/p + Σ Hⱼ/(p + sⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixStieltjes {
    pub constant: Matrix6,
    pub pole_at_zero: Matrix6,
    /// `(pole, residue)` sorted by pole.
    pub modes: Vec<(f64, Matrix6)>,
    /// Smallest eigenvalue of every residue and of the constant term before
    /// PSD clipping, each relative to that matrix's norm.
    pub min_relative_eigenvalue: f64,
}

impl MatrixStieltjes {
    pub fn eval(&self, p: f64) -> Matrix6 {
        self.modes
            .iter()
            .fold(self.constant + self.pole_at_zero * (1.0 / p), |acc, &(s, h)| acc + h * (1.0 / (p + s)))
    }

    pub fn to_creep(&self) -> Result<MatrixCreep> {
        MatrixCreep::new(
            self.constant,
            self.pole_at_zero,
            self.modes.iter().map(|&(s, h)| Mode::new(s, h)).collect(),
        )
    }

    pub fn to_relaxation(&self) -> Result<MatrixRelaxation> {
        MatrixRelaxation::from_parts(
            self.constant,
            self.pole_at_zero,
            self.modes.iter().map(|&(s, h)| Mode::new(s, h)).collect(),
        )
    }
}

/// Matrix polynomial with symmetric coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    coeffs: Vec<Matrix6>,
}

impl MatrixPolynomial {
    pub fn new(mut coeffs: Vec<Matrix6>) -> Self {
        while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Matrix6::zeros());
        }
        MatrixPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Matrix6] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, p: f64) -> Matrix6 {
        self.coeffs.iter().rev().fold(Matrix6::zeros(), |acc, &c| acc * p + c)
    }

    /// Finite eigenvalues `(re, im)` of `P` from its block companion
    /// linearization `L(q) = L₀ + q·L₁` in `q = p/scale`, solved through the
    /// shift-and-invert transform `θ = 1/(q − q₀)` at a point `q₀` where
    /// `P` is invertible. Eigenvalues at infinity (`θ ≈ 0`, from a singular
    /// leading coefficient) are discarded.
    pub fn companion_eigenvalues(&self, scale: f64, shift: f64) -> Result<Vec<(f64, f64)>> {
        let m = self.degree();
        if m == 0 {
            return Ok(Vec::new());
        }
        let n = 6 * m;
        let hat: Vec<Dense6> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c.to_dense() * scale.powi(j as i32))
            .collect();
        let mut l0 = DMatrix::<f64>::zeros(n, n);
        let mut l1 = DMatrix::<f64>::zeros(n, n);
        for (blk, j) in (0..m).rev().enumerate() {
            l0.view_mut((0, 6 * blk), (6, 6)).copy_from(&hat[j]);
        }
        for blk in 1..m {
            for i in 0..6 {
                l0[(6 * blk + i, 6 * (blk - 1) + i)] = -1.0;
                l1[(6 * blk + i, 6 * blk + i)] = 1.0;
            }
        }
        l1.view_mut((0, 0), (6, 6)).copy_from(&hat[m]);
        let q0 = shift / scale;
        let shifted = &l0 + &l1 * q0;
        let lu = shifted.lu();
        let solved = lu
            .solve(&l1)
            .ok_or_else(|| numeric("companion shift point is singular"))?;
        let mtx = -solved;
        let thetas = mtx.complex_eigenvalues();
        let theta_max = thetas.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut out = Vec::new();
        for z in thetas.iter() {
            if z.norm() <= 1e-11 * theta_max {
                continue;
            }
            let inv = z.inv();
            out.push(((q0 + inv.re) * scale, inv.im * scale));
        }
        Ok(out)
    }
}

/// `P(p) = d(p)·Z(p)` with `d(p) = ∏(p + rₖ)`.
pub fn matrix_cbf_as_polynomial(cbf: &MatrixCbf) -> Result<(MatrixPolynomial, RealPolynomial)> {
    cbf.check_nondegenerate()?;
    let rates: Vec<f64> = cbf.modes.iter().map(|m| m.0).collect();
    let d = RealPolynomial::from_negated_roots(&rates);
    let mut coeffs = vec![Matrix6::zeros(); d.degree() + 2];
    for (j, &dj) in d.coeffs().iter().enumerate() {
        coeffs[j] += cbf.constant * dj;
        coeffs[j + 1] += cbf.slope * dj;
    }
    for (k, &(_, w)) in cbf.modes.iter().enumerate() {
        let others: Vec<f64> = rates
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &r)| r)
            .collect();
        let e = RealPolynomial::from_negated_roots(&others);
        for (j, &ej) in e.coeffs().iter().enumerate() {
            coeffs[j + 1] += w * ej;
        }
    }
    Ok((MatrixPolynomial::new(coeffs), d))
}

/// A (possibly repeated) root `p = −rate` of `det Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCluster {
    pub rate: f64,
    /// Orthonormal basis of the null space of `Z(−rate)`.
    pub null_basis: Vec<[f64; 6]>,
    /// Residue assembled from the pencil eigenvectors, `Σ x̂ x̂ᵀ` over the cluster.
    pub pencil_residue: Matrix6,
}

impl RootCluster {
    pub fn multiplicity(&self) -> usize {
        self.null_basis.len()
    }
}

/// Spectrum of `Z` on `(−∞, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilSpectrum {
    /// Root at `p = 0`, present when `C₀` is singular.
    pub zero: Option<RootCluster>,
    /// Roots at `p = −s < 0`, ascending in `s`.
    pub clusters: Vec<RootCluster>,
    /// Eigenvalues at infinity (directions where `C₁` vanishes).
    pub infinite: usize,
}

struct Linearization {
    a0: DMatrix<f64>,
    a1: DMatrix<f64>,
}

fn low_rank_factor(w: &Matrix6) -> Vec<[f64; 6]> {
    let (values, vectors) = w.eigen();
    let norm = values[5].abs().max(values[0].abs());
    let mut cols = Vec::new();
    for k in 0..6 {
        if values[k] > TOL_RANK * norm {
            let s = values[k].sqrt();
            let mut c = [0.0; 6];
            for i in 0..6 {
                c[i] = vectors[(i, k)] * s;
            }
            cols.push(c);
        }
    }
    cols
}

fn linearize(cbf: &MatrixCbf) -> Linearization {
    let factors: Vec<(f64, Vec<[f64; 6]>)> = cbf.modes.iter().map(|&(r, w)| (r, low_rank_factor(&w))).collect();
    let size = 6 + factors.iter().map(|f| f.1.len()).sum::<usize>();
    let mut a0 = DMatrix::<f64>::zeros(size, size);
    let mut a1 = DMatrix::<f64>::zeros(size, size);
    let e = cbf.modes.iter().fold(cbf.constant, |acc, &(_, w)| acc + w);
    a0.view_mut((0, 0), (6, 6)).copy_from(&e.to_dense());
    a1.view_mut((0, 0), (6, 6)).copy_from(&cbf.slope.to_dense());
    let mut col = 6;
    for (r, cols) in &factors {
        for c in cols {
            for i in 0..6 {
                a0[(i, col)] = -r * c[i];
                a0[(col, i)] = -r * c[i];
            }
            a0[(col, col)] = r * r;
            a1[(col, col)] = *r;
            col += 1;
        }
    }
    Linearization { a0, a1 }
}

/// Real eigenvalues `s ≥ 0` of `A₀ x = s·A₁ x` with `A₁`-normalized
/// eigenvectors, plus the count of infinite eigenvalues.
fn pencil_eigen(lin: &Linearization, gamma: f64) -> Result<(Vec<(f64, DVector<f64>)>, usize)> {
    let k = &lin.a0 + &lin.a1 * gamma;
    let chol = Cholesky::new(k).ok_or_else(|| numeric("shifted pencil is not positive definite"))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| numeric("Cholesky factor is singular"))?;
    let c = &l_inv * &lin.a1 * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let kappa_max = eig.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let mut finite = Vec::new();
    let mut infinite = 0;
    for (idx, &kappa) in eig.eigenvalues.iter().enumerate() {
        if kappa <= 1e-12 * kappa_max.max(1.0 / gamma) {
            infinite += 1;
            continue;
        }
        let y = eig.eigenvectors.column(idx);
        let x = l_inv.transpose() * y;
        let s = 1.0 / kappa - gamma;
        finite.push((s, x / kappa.sqrt()));
    }
    finite.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((finite, infinite))
}

/// Smallest-|θ| eigenpairs of the symmetric matrix `Z(p)`.
fn near_null(z: &Matrix6, count: usize) -> Vec<(f64, [f64; 6])> {
    let eig = SymmetricEigen::new(z.to_dense());
    let mut idx: Vec<usize> = (0..6).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].abs().total_cmp(&eig.eigenvalues[b].abs()));
    idx.into_iter()
        .take(count)
        .map(|k| {
            let mut v = [0.0; 6];
            for i in 0..6 {
                v[i] = eig.eigenvectors[(i, k)];
            }
            (eig.eigenvalues[k], v)
        })
        .collect()
}

/// Newton iteration on the `count` smallest eigenvalues of `Z(−s)`.
fn polish_root(cbf: &MatrixCbf, s0: f64, count: usize, lo: f64, hi: f64) -> f64 {
    let residual = |s: f64| {
        near_null(&cbf.eval(-s), count)
            .iter()
            .fold(0.0_f64, |a, (t, _)| a.max(t.abs()))
    };
    let mut s = s0;
    let mut best = residual(s);
    for _ in 0..20 {
        let p = -s;
        let pairs = near_null(&cbf.eval(p), count);
        let deriv = cbf.derivative(p);
        let step: f64 = pairs
            .iter()
            .map(|(theta, v)| theta / deriv.quad_form(v))
            .sum::<f64>()
            / count as f64;
        // p ← p − step, i.e. s ← s + step
        let cand = s + step;
        if !cand.is_finite() || cand <= lo || cand >= hi {
            break;
        }
        let r = residual(cand);
        if r >= best {
            break;
        }
        best = r;
        let done = (cand - s).abs() <= 4.0 * f64::EPSILON * s;
        s = cand;
        if done {
            break;
        }
    }
    s
}

/// Real spectrum of `Z` on `(−∞, 0]` with null spaces.
pub fn matrix_pencil_roots(cbf: &MatrixCbf) -> Result<PencilSpectrum> {
    cbf.check_nondegenerate()?;
    let gamma = cbf.spectral_scale();
    let lin = linearize(cbf);
    let (finite, infinite) = pencil_eigen(&lin, gamma)?;

    for (s, _) in &finite {
        if *s < -TOL_IMAG * gamma.max(1.0) * 1e3 {
            return Err(numeric(format!("pencil eigenvalue {s} lies on the positive axis")));
        }
    }

    // Z(0) is the constant term, so the root at zero has the multiplicity
    // of its null space; those are the smallest pencil eigenvalues.
    let mut finite = finite;
    let zero_count = cbf
        .constant
        .eigenvalues()
        .iter()
        .filter(|&&l| l <= TOL_ZERO_RANK * cbf.term_scale(gamma))
        .count();
    if zero_count > finite.len() {
        return Err(numeric("constant term is singular beyond the pencil spectrum"));
    }
    let rest = finite.split_off(zero_count);
    let zero_group = finite;
    let zero_limit = TOL_ZERO_ROOT * cbf.modes.first().map_or(gamma, |m| m.0);
    if let Some((s, _)) = zero_group.iter().find(|(s, _)| s.abs() > zero_limit) {
        return Err(numeric(format!("root expected at zero found at s = {s}")));
    }
    if let Some((s, _)) = rest.first() {
        if *s <= 0.0 {
            return Err(numeric(format!("pencil eigenvalue {s} at or beyond zero outside the zero cluster")));
        }
    }

    let abs_err = |s: f64| 1e3 * f64::EPSILON * (s + gamma) * (s + gamma) / gamma;
    let mut groups: Vec<Vec<(f64, DVector<f64>)>> = Vec::new();
    if !zero_group.is_empty() {
        groups.push(zero_group);
    }
    let first_nonzero = groups.len();
    for (s, x) in rest {
        let joins = groups.len() > first_nonzero && {
            let last = groups[groups.len() - 1].last().unwrap().0;
            (s - last).abs() <= TOL_CLUSTER * s + abs_err(s)
        };
        if joins {
            groups.last_mut().unwrap().push((s, x));
        } else {
            groups.push(vec![(s, x)]);
        }
    }

    let rates: Vec<f64> = cbf.modes.iter().map(|m| m.0).collect();
    let mut zero = None;
    let mut clusters = Vec::new();
    for (idx, g) in groups.into_iter().enumerate() {
        let k = g.len();
        let s_mean = g.iter().map(|e| e.0).sum::<f64>() / k as f64;
        let pencil_residue = Matrix6::from_dense(&g.iter().fold(Dense6::zeros(), |acc, (_, x)| {
            let v = nalgebra::Vector6::from_fn(|i, _| x[i]);
            acc + v * v.transpose()
        }));
        if k > 6 {
            return Err(numeric(format!("root cluster at s = {s_mean} has multiplicity {k} > 6")));
        }
        if idx < first_nonzero {
            let pairs = near_null(&cbf.constant, k);
            let scale = cbf.constant.norm().max(cbf.term_scale(gamma) * 1e-3);
            if pairs.iter().any(|(t, _)| t.abs() > TOL_NULL * scale) {
                return Err(numeric("zero root does not match the null space of the constant term"));
            }
            zero = Some(RootCluster {
                rate: 0.0,
                null_basis: pairs.into_iter().map(|p| p.1).collect(),
                pencil_residue,
            });
            continue;
        }
        // open interval of the negative axis between consecutive poles
        let lo = rates.iter().copied().filter(|&r| r < s_mean).fold(0.0, f64::max);
        let hi = rates.iter().copied().filter(|&r| r > s_mean).fold(f64::INFINITY, f64::min);
        let s = if near_pole(cbf, s_mean) { s_mean } else { polish_root(cbf, s_mean, k, lo, hi) };
        let z = cbf.eval(-s);
        let pairs = near_null(&z, k);
        let scale = cbf.term_scale(-s);
        if let Some((t, _)) = pairs.iter().find(|(t, _)| t.abs() > TOL_NULL * scale) {
            return Err(numeric(format!(
                "defective root cluster at s = {s}: null space smaller than multiplicity {k} (|θ| = {:e})",
                t.abs()
            )));
        }
        clusters.push(RootCluster { rate: s, null_basis: pairs.into_iter().map(|p| p.1).collect(), pencil_residue });
    }
    Ok(PencilSpectrum { zero, clusters, infinite })
}

/// `V (Vᵀ Z′(p) V)⁻¹ Vᵀ`, the residue of `Z⁻¹` at a semisimple root.
fn nullspace_residue(cbf: &MatrixCbf, p: f64, basis: &[[f64; 6]]) -> Result<Matrix6> {
    let k = basis.len();
    let v = DMatrix::<f64>::from_fn(6, k, |i, j| basis[j][i]);
    let deriv = cbf.derivative(p).to_dense();
    let m = v.transpose() * DMatrix::from_fn(6, 6, |i, j| deriv[(i, j)]) * &v;
    let m_inv = m
        .try_inverse()
        .ok_or_else(|| numeric(format!("singular derivative on the null space at p = {p}")))?;
    let h = &v * m_inv * v.transpose();
    Ok(Matrix6::from_dense(&Dense6::from_fn(|i, j| h[(i, j)])))
}

fn check_residue(h: Matrix6, what: &str, worst: &mut f64) -> Result<Matrix6> {
    let norm = h.norm();
    if norm == 0.0 {
        return Ok(h);
    }
    let (clipped, min_eig) = h
        .psd_clip(TOL_PSD, norm)
        .map_err(|e| numeric(format!("{what} residue is not PSD: {e}")))?;
    *worst = worst.min(min_eig / norm);
    Ok(clipped)
}

/// Residues of `Z⁻¹` and its constant term. The constant is obtained as
/// `S(p*) − D/p* − Σ Hⱼ/(p* + sⱼ)` with `S = Z⁻¹` solved directly at
/// `p* = 1 + 2·max(rate)`, and cross-checked at a second point.
pub fn matrix_residues(cbf: &MatrixCbf, spectrum: &PencilSpectrum) -> Result<MatrixStieltjes> {
    let mut worst = 0.0_f64;
    let pole_at_zero = match &spectrum.zero {
        Some(z) => check_residue(nullspace_residue(cbf, 0.0, &z.null_basis)?, "zero-frequency", &mut worst)?,
        None => Matrix6::zeros(),
    };
    let mut modes = Vec::with_capacity(spectrum.clusters.len());
    for c in &spectrum.clusters {
        let h = if near_pole(cbf, c.rate) { c.pencil_residue } else { nullspace_residue(cbf, -c.rate, &c.null_basis)? };
        let h = check_residue(h, "pole", &mut worst)?;
        modes.push((c.rate, h));
    }

    let constant_at = |p: f64| -> Result<(Matrix6, f64)> {
        let z = cbf.eval(p);
        let s = z
            .inverse()
            .ok_or_else(|| numeric(format!("Z({p}) is singular")))?;
        let mut scale = s.norm() + pole_at_zero.norm() / p;
        let mut a = s - pole_at_zero * (1.0 / p);
        for &(sj, h) in &modes {
            a = a - h * (1.0 / (p + sj));
            scale += h.norm() / (p + sj);
        }
        Ok((a, scale))
    };

    let max_rate = cbf.max_rate().unwrap_or(0.0);
    let p_star = 1.0 + 2.0 * max_rate;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for r in cbf.modes.iter().map(|m| m.0).chain(modes.iter().map(|m| m.0)) {
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let mut p_check = if lo.is_finite() { (lo * hi).sqrt() } else { p_star / 7.0 };
    if (p_check / p_star - 1.0).abs() < 0.5 {
        p_check = p_star / 7.0;
    }

    let (a_star, scale_star) = constant_at(p_star)?;
    let (a_check, scale_check) = constant_at(p_check)?;
    let mismatch = (a_star - a_check).norm() / scale_star.max(scale_check);
    if mismatch > TOL_CROSS_CHECK {
        return Err(numeric(format!(
            "constant term differs between p = {p_star} and p = {p_check} (relative {mismatch:e})"
        )));
    }
    // Z⁻¹(∞) vanishes on the range of the slope term: keep A on its null space
    let a_star = match spectrum.infinite {
        0 => Matrix6::zeros(),
        6 => a_star,
        k => {
            let mut proj = Dense6::zeros();
            for (_, v) in near_null(&cbf.slope, k) {
                let v = nalgebra::Vector6::from(v);
                proj += v * v.transpose();
            }
            Matrix6::from_dense(&(proj * a_star.to_dense() * proj))
        }
    };
    let a_norm = a_star.norm();
    let constant = if a_norm <= 1e-9 * scale_star {
        Matrix6::zeros()
    } else {
        let (values, _) = a_star.eigen();
        if values[0] < -1e-9 * scale_star {
            return Err(numeric(format!(
                "constant term has eigenvalue {:e} below the PSD tolerance",
                values[0]
            )));
        }
        if values[0] < 0.0 {
            worst = worst.min(values[0] / a_norm);
        }
        a_star.psd_clip(1e-9, scale_star)?.0
    };
    Ok(MatrixStieltjes { constant, pole_at_zero, modes, min_relative_eigenvalue: worst })
}

/// `Z(p)⁻¹` in Stieltjes form.
pub fn invert_matrix_cbf(cbf: &MatrixCbf) -> Result<MatrixStieltjes> {
    let spectrum = matrix_pencil_roots(cbf)?;
    matrix_residues(cbf, &spectrum)
}
