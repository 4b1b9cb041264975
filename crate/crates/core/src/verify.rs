//! Independent checks on kernels and dual pairs: structure, sampled
//! complete monotonicity, the convolution identity `(R ∗ C)(t) = t`, the
//! Laplace product and the boundary-value identities.

use std::fmt;

use serde::Serialize;

use crate::convolution::relaxation_creep_at;
use crate::duality::order_pair;
use crate::error::{Error, Result};
use crate::kernel::{Creep, Kernel, Limit, Mode, Relaxation};
use crate::matrix6::{Dense6, Matrix6, TOL_PSD};

/// Relative tolerance of the sampled sign checks.
pub const TOL_CM: f64 = 1e-9;
/// Points in the well-formedness sampling grid.
pub const WELLFORMED_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn push(&mut self, name: &str, residual: f64, tolerance: f64) {
        debug_assert!(self.get(name).is_none(), "duplicate check {name}");
        // NaN residuals fail
        let passed = residual <= tolerance;
        self.entries.push(CheckEntry { name: name.to_string(), passed, residual, tolerance });
    }

    fn push_bool(&mut self, name: &str, ok: bool) {
        self.push(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.entries.extend(other.entries);
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{:<4} {:<44} residual={:.3e} tol={:.1e}",
                if e.passed { "PASS" } else { "FAIL" },
                e.name,
                e.residual,
                e.tolerance
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Relaxation,
    Creep,
}

/// Kernel data as written, before any validation. Relaxation kernels use
/// `newtonian` and `constant` (equilibrium); creep kernels use `constant`
/// (instantaneous compliance) and `fluidity`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawKernel<T> {
    pub kind: KernelKind,
    pub newtonian: T,
    pub constant: T,
    pub fluidity: T,
    pub modes: Vec<(f64, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawAny {
    Scalar(RawKernel<f64>),
    Matrix(RawKernel<Matrix6>),
}

impl From<&Kernel> for RawAny {
    fn from(k: &Kernel) -> Self {
        fn modes<T: Copy>(m: &[Mode<T>]) -> Vec<(f64, T)> {
            m.iter().map(|m| (m.rate, m.weight)).collect()
        }
        match k {
            Kernel::ScalarRelaxation(k) => RawAny::Scalar(RawKernel {
                kind: KernelKind::Relaxation,
                newtonian: k.newtonian(),
                constant: k.equilibrium(),
                fluidity: 0.0,
                modes: modes(k.modes()),
            }),
            Kernel::ScalarCreep(c) => RawAny::Scalar(RawKernel {
                kind: KernelKind::Creep,
                newtonian: 0.0,
                constant: c.instantaneous(),
                fluidity: c.fluidity(),
                modes: modes(c.modes()),
            }),
            Kernel::MatrixRelaxation(k) => RawAny::Matrix(RawKernel {
                kind: KernelKind::Relaxation,
                newtonian: k.newtonian(),
                constant: k.equilibrium(),
                fluidity: Matrix6::zeros(),
                modes: modes(k.modes()),
            }),
            Kernel::MatrixCreep(c) => RawAny::Matrix(RawKernel {
                kind: KernelKind::Creep,
                newtonian: Matrix6::zeros(),
                constant: c.instantaneous(),
                fluidity: c.fluidity(),
                modes: modes(c.modes()),
            }),
        }
    }
}

fn to_modes<T: Copy>(m: &[(f64, T)]) -> Vec<Mode<T>> {
    m.iter().map(|&(r, w)| Mode::new(r, w)).collect()
}

impl RawAny {
    /// Validated, canonical kernel. A relaxation kernel without continuous
    /// part becomes a pure Newtonian kernel.
    pub fn to_kernel(&self) -> Result<Kernel> {
        Ok(match self {
            RawAny::Scalar(r) => match r.kind {
                KernelKind::Relaxation => {
                    Kernel::ScalarRelaxation(Relaxation::from_parts(r.newtonian, r.constant, to_modes(&r.modes))?)
                }
                KernelKind::Creep => Kernel::ScalarCreep(Creep::new(r.constant, r.fluidity, to_modes(&r.modes))?),
            },
            RawAny::Matrix(r) => match r.kind {
                KernelKind::Relaxation => {
                    Kernel::MatrixRelaxation(Relaxation::from_parts(r.newtonian, r.constant, to_modes(&r.modes))?)
                }
                KernelKind::Creep => Kernel::MatrixCreep(Creep::new(r.constant, r.fluidity, to_modes(&r.modes))?),
            },
        })
    }
}

/// Values the sampled checks can handle: reals and symmetric matrices,
/// tested through their smallest eigenvalue.
pub trait Sampled: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<f64, Output = Self> {
    fn size(&self) -> f64;
    /// Smallest eigenvalue (the value itself for reals).
    fn lowest(&self) -> f64;
    fn finite(&self) -> bool;
}

impl Sampled for f64 {
    fn size(&self) -> f64 {
        self.abs()
    }
    fn lowest(&self) -> f64 {
        *self
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl Sampled for Matrix6 {
    fn size(&self) -> f64 {
        self.norm()
    }
    fn lowest(&self) -> f64 {
        self.min_eigenvalue()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl<T: Sampled> RawKernel<T> {
    fn eval(&self, t: f64) -> T {
        match self.kind {
            KernelKind::Relaxation => self
                .modes
                .iter()
                .fold(self.constant, |acc, &(r, w)| acc + w * (-r * t).exp()),
            KernelKind::Creep => self.modes.iter().fold(self.constant + self.fluidity * t, |acc, &(r, w)| {
                acc + w * (-(-r * t).exp_m1() / r)
            }),
        }
    }

    fn max_rate(&self) -> f64 {
        self.modes.iter().map(|m| m.0).filter(|r| r.is_finite() && *r > 0.0).fold(0.0, f64::max)
    }
}

fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (ratio * i as f64).exp()).collect()
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    geometric_grid(lo, hi, n)
}

/// Worst normalized sign violation of `sign(n)·f[x₀..xₙ]` over all windows
/// and orders `0..=3`. Divided differences of a completely monotone `f`
/// satisfy `(−1)ⁿ f[x₀..xₙ] ≥ 0`; each is compared with the rounding scale
/// obtained by running the same recursion on `|f|`.
fn divided_difference_violation<T: Sampled>(xs: &[f64], fs: &[T], sign: impl Fn(usize) -> f64) -> f64 {
    let mut worst = 0.0_f64;
    let mut vals: Vec<T> = fs.to_vec();
    let mut mags: Vec<f64> = fs.iter().map(|f| f.size()).collect();
    for order in 0..=3 {
        if order > 0 {
            let mut nv = Vec::with_capacity(vals.len() - 1);
            let mut nm = Vec::with_capacity(vals.len() - 1);
            for i in 0..vals.len() - 1 {
                let h = xs[i + order] - xs[i];
                nv.push((vals[i + 1] - vals[i]) * (1.0 / h));
                nm.push((mags[i + 1] + mags[i]) / h);
            }
            vals = nv;
            mags = nm;
        }
        let s = sign(order);
        if s == 0.0 {
            continue;
        }
        for (v, m) in vals.iter().zip(&mags) {
            if *m == 0.0 {
                continue;
            }
            let low = (*v * s).lowest();
            if low < 0.0 {
                worst = worst.max(-low / m);
            }
        }
    }
    worst
}

fn structural<T: Sampled>(raw: &RawKernel<T>, report: &mut CheckReport, positive: impl Fn(&T) -> bool, nonneg: impl Fn(&T) -> f64) {
    let all_finite = raw.newtonian.finite()
        && raw.constant.finite()
        && raw.fluidity.finite()
        && raw.modes.iter().all(|(r, w)| r.is_finite() && w.finite());
    report.push_bool("finite", all_finite);
    let min_rate = raw.modes.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    report.push("rates_positive", if min_rate > 0.0 { 0.0 } else { -min_rate.min(0.0) + 1.0 }, 0.0);
    report.push_bool("rates_sorted_distinct", raw.modes.windows(2).all(|w| w[0].0 < w[1].0));
    report.push_bool("weights_positive", raw.modes.iter().all(|(_, w)| positive(w)));
    let worst_static = [raw.newtonian, raw.constant, raw.fluidity]
        .iter()
        .map(&nonneg)
        .chain(raw.modes.iter().map(|(_, w)| nonneg(w)))
        .fold(0.0, f64::max);
    report.push("coefficients_nonnegative", worst_static, TOL_PSD);
    let zero = raw.newtonian.size() == 0.0
        && raw.constant.size() == 0.0
        && raw.fluidity.size() == 0.0
        && raw.modes.iter().all(|(_, w)| w.size() == 0.0);
    report.push_bool("not_identically_zero", !zero);
}

fn sampled<T: Sampled>(raw: &RawKernel<T>, report: &mut CheckReport) {
    let r = raw.max_rate();
    let scale = if r > 0.0 { r } else { 1.0 };
    let xs = geometric_grid(1e-3 / scale, 1e3 / scale, WELLFORMED_GRID);
    let fs: Vec<T> = xs.iter().map(|&t| raw.eval(t)).collect();
    match raw.kind {
        KernelKind::Relaxation => {
            let v = divided_difference_violation(&xs, &fs, |n| if n % 2 == 0 { 1.0 } else { -1.0 });
            report.push("completely_monotone", v, TOL_CM);
        }
        KernelKind::Creep => {
            let v = divided_difference_violation(&xs, &fs, |n| match n {
                0 => 1.0,
                n if n % 2 == 1 => 1.0,
                _ => -1.0,
            });
            report.push("bernstein", v, TOL_CM);
        }
    }
}

/// Relative negativity `max(0, −λ_min/‖M‖)`.
fn psd_defect(m: &Matrix6) -> f64 {
    let n = m.norm();
    if n == 0.0 {
        0.0
    } else {
        (-m.min_eigenvalue() / n).max(0.0)
    }
}

/// Structural and sampled well-formedness of raw kernel data.
pub fn check_wellformed(raw: &RawAny) -> CheckReport {
    let mut report = CheckReport::default();
    match raw {
        RawAny::Scalar(k) => {
            structural(k, &mut report, |w| *w > 0.0, |w| (-*w).max(0.0));
            sampled(k, &mut report);
        }
        RawAny::Matrix(k) => {
            structural(k, &mut report, |w| w.norm() > 0.0 && psd_defect(w) <= TOL_PSD, psd_defect);
            let cond = k.modes.iter().fold(k.newtonian + k.constant + k.fluidity, |acc, &(_, w)| acc + w);
            let (values, _) = cond.eigen();
            let norm = values[5].abs().max(values[0].abs());
            let margin = if norm > 0.0 { values[0] / norm } else { 0.0 };
            report.push("nondegeneracy", if margin > TOL_PSD { 0.0 } else { TOL_PSD - margin }, 0.0);
            sampled(k, &mut report);
        }
    }
    report
}

/// [`check_wellformed`] on a constructed kernel.
pub fn check_kernel(k: &Kernel) -> CheckReport {
    check_wellformed(&RawAny::from(k))
}

fn pair_max_rate(r: &Kernel, c: &Kernel) -> f64 {
    let m = r.max_rate().unwrap_or(0.0).max(c.max_rate().unwrap_or(0.0));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// The 33 log-spaced times on `[1e−3, 1e3]/(max rate)` used for the
/// convolution identity.
pub fn default_time_grid(r: &Kernel, c: &Kernel) -> Vec<f64> {
    let m = pair_max_rate(r, c);
    geometric_grid(1e-3 / m, 1e3 / m, 33)
}

/// The 20 log-spaced points on `[1e−3, 1e3]·(max rate)` used for the
/// Laplace product.
pub fn default_laplace_grid(r: &Kernel, c: &Kernel) -> Vec<f64> {
    let m = pair_max_rate(r, c);
    geometric_grid(1e-3 * m, 1e3 * m, 20)
}

fn spectral_norm(m: &Dense6) -> f64 {
    m.singular_values().max()
}

/// `max |(R ∗ C)(t) − t| / max(t, t_floor)` over `grid`, with
/// `(R ∗ C)(t) = N·C(t) + (F ∗ C)(t)` in closed form and
/// `t_floor = 1e−6/(max rate)`. Matrix residuals use the spectral norm.
pub fn duality_residual(a: &Kernel, b: &Kernel, grid: &[f64]) -> Result<f64> {
    let (r, c) = order_pair(a, b)?;
    let t_floor = 1e-6 / pair_max_rate(r, c);
    let mut worst = 0.0_f64;
    match (r, c) {
        (Kernel::ScalarRelaxation(r), Kernel::ScalarCreep(c)) => {
            for &t in grid {
                let v = relaxation_creep_at(r, c, t);
                worst = worst.max((v - t).abs() / t.max(t_floor));
            }
        }
        (Kernel::MatrixRelaxation(r), Kernel::MatrixCreep(c)) => {
            for &t in grid {
                let v = relaxation_creep_at(r, c, t) - Dense6::identity() * t;
                worst = worst.max(spectral_norm(&v) / t.max(t_floor));
            }
        }
        _ => return Err(Error::Incompatible("kernel pair mismatch".into())),
    }
    Ok(worst)
}

/// `max |p·R̃(p)·p·C̃(p) − 1|` (spectral norm for matrices) over `grid`.
pub fn laplace_residual(a: &Kernel, b: &Kernel, grid: &[f64]) -> Result<f64> {
    let (r, c) = order_pair(a, b)?;
    let mut worst = 0.0_f64;
    match (r, c) {
        (Kernel::ScalarRelaxation(r), Kernel::ScalarCreep(c)) => {
            for &p in grid {
                let v = r.laplace_times_p(p)? * c.laplace_times_p(p)?;
                worst = worst.max((v - 1.0).abs());
            }
        }
        (Kernel::MatrixRelaxation(r), Kernel::MatrixCreep(c)) => {
            for &p in grid {
                let v = r.laplace_times_p(p)?.to_dense() * c.laplace_times_p(p)?.to_dense() - Dense6::identity();
                worst = worst.max(spectral_norm(&v));
            }
        }
        _ => return Err(Error::Incompatible("kernel pair mismatch".into())),
    }
    Ok(worst)
}

/// Default pair tolerances: convolution and Laplace residuals, then
/// boundary identities.
pub fn default_pair_tolerances(matrix: bool) -> (f64, f64) {
    (if matrix { 1e-7 } else { 1e-9 }, 1e-8)
}

/// Convolution and Laplace residuals plus boundary identities of a pair,
/// with entry names prefixed by `pair: `. `tol` overrides every default
/// tolerance.
pub fn check_pair(a: &Kernel, b: &Kernel, tol: Option<f64>) -> Result<CheckReport> {
    let (residual_default, limit_default) = default_pair_tolerances(a.is_matrix());
    let residual_tol = tol.unwrap_or(residual_default);
    let mut report = CheckReport::default();
    let conv = duality_residual(a, b, &default_time_grid(a, b))?;
    report.push("pair: convolution identity (R*C)(t)=t", conv, residual_tol);
    let lap = laplace_residual(a, b, &default_laplace_grid(a, b))?;
    report.push("pair: laplace product pR(p)*pC(p)=1", lap, residual_tol);
    for mut e in check_limit_identities(a, b, tol.unwrap_or(limit_default))?.entries {
        e.name = format!("pair: {}", e.name);
        report.entries.push(e);
    }
    Ok(report)
}

/// Relative threshold below which an eigenvalue counts as zero when
/// deciding which boundary clause applies.
const TOL_CASE: f64 = 1e-10;

fn is_invertible(m: &Matrix6) -> bool {
    m.is_positive_definite(1e-8)
}

fn is_vanishing(m: &Matrix6, scale: f64) -> bool {
    m.norm() <= TOL_CASE * scale
}

fn id_defect(a: &Matrix6, b: &Matrix6) -> f64 {
    spectral_norm(&(a.to_dense() * b.to_dense() - Dense6::identity()))
}

/// Boundary identities linking `R` and its dual `C`. Only the clauses
/// whose hypotheses hold are reported.
pub fn check_limit_identities(a: &Kernel, b: &Kernel, tol: f64) -> Result<CheckReport> {
    let (r, c) = order_pair(a, b)?;
    let mut rep = CheckReport::default();
    let rate = pair_max_rate(r, c);
    match (r, c) {
        (Kernel::ScalarRelaxation(r), Kernel::ScalarCreep(c)) => {
            let beta = r.newtonian();
            let lr = r.limits();
            let lc = c.limits();
            let f0 = lr.value_at_zero.finite().unwrap_or(0.0);
            let f_inf = lr.value_at_infinity.finite().unwrap_or(0.0);
            let h0 = c.instantaneous();
            let dh0 = lc.derivative_at_zero.finite().unwrap_or(f64::INFINITY);
            let b_fl = c.fluidity();
            // modulus scale making compliances dimensionless
            let modulus = f0 + beta * rate;

            if beta > 0.0 {
                rep.push("relaxation: newtonian>0 => h(0)=0", h0.abs() * modulus, tol);
                rep.push("relaxation: newtonian>0 => newtonian*h'(0)=1", (beta * dh0 - 1.0).abs(), tol);
            } else {
                rep.push("relaxation: newtonian=0 => h(0)*f(0+)=1", (h0 * f0 - 1.0).abs(), tol);
            }
            if f_inf > 0.0 {
                let h_inf = lc.value_at_infinity.finite();
                rep.push(
                    "relaxation: f_inf>0 => h(inf)*f_inf=1",
                    h_inf.map_or(f64::INFINITY, |h| (h * f_inf - 1.0).abs()),
                    tol,
                );
            } else {
                rep.push_bool("relaxation: f_inf=0 => h(inf)=inf", lc.value_at_infinity.is_infinite());
                let area = beta + r.modes().iter().map(|m| m.weight / m.rate).sum::<f64>();
                rep.push("relaxation: f_inf=0 => fluidity*integral(R)=1", (b_fl * area - 1.0).abs(), tol);
            }
            if h0 > 0.0 {
                rep.push("creep: h(0)>0 => newtonian=0", beta * rate * h0, tol);
                rep.push("creep: h(0)>0 => f(0+)=1/h(0)", (f0 * h0 - 1.0).abs(), tol);
            } else {
                rep.push("creep: h(0)=0 => newtonian=1/h'(0)", (beta * dh0 - 1.0).abs(), tol);
            }
            if b_fl > 0.0 {
                rep.push("creep: fluidity>0 => f_inf=0", f_inf / modulus, tol);
            } else {
                let h_inf = lc.value_at_infinity.finite().unwrap_or(f64::INFINITY);
                rep.push("creep: fluidity=0 => f_inf=1/h(inf)", (f_inf * h_inf - 1.0).abs(), tol);
            }
        }
        (Kernel::MatrixRelaxation(r), Kernel::MatrixCreep(c)) => {
            let n = r.newtonian();
            let lr = r.limits();
            let lc = c.limits();
            let r0 = lr.value_at_zero.finite().unwrap_or_default();
            let f_inf = r.equilibrium();
            let a0 = c.instantaneous();
            let d = c.fluidity();
            let dc0 = lc.derivative_at_zero.finite().unwrap_or_default();
            let r_scale = r0.norm() + n.norm() * rate;
            let c_scale = lc_scale(c, rate);

            if is_invertible(&n) {
                rep.push("relaxation: N>0 => C(0)=0", a0.norm() * r_scale, tol);
                rep.push("relaxation: N>0 => C'(0)=N^-1", id_defect(&dc0, &n), tol);
            }
            if is_vanishing(&n, r_scale / rate) && is_invertible(&r0) {
                rep.push("relaxation: N=0, R(0+) invertible => C(0)=R(0+)^-1", id_defect(&a0, &r0), tol);
            }
            if is_invertible(&f_inf) {
                let defect = match lc.value_at_infinity {
                    Limit::Finite(ci) => id_defect(&ci, &f_inf),
                    Limit::Infinite => f64::INFINITY,
                };
                rep.push("relaxation: F_inf invertible => C(inf)=F_inf^-1", defect, tol);
            }
            if is_invertible(&a0) {
                rep.push("creep: A invertible => R(0+)=A^-1", id_defect(&r0, &a0), tol);
                rep.push("creep: A invertible => N=0", n.norm() * rate * a0.norm(), tol);
            }
            if is_invertible(&d) {
                rep.push("creep: D>0 => R(inf)=0", f_inf.norm() * c_scale, tol);
            }
            if is_vanishing(&d, c_scale * rate) {
                if let Limit::Finite(ci) = lc.value_at_infinity {
                    if is_invertible(&ci) {
                        rep.push("creep: D=0, C(inf) invertible => R(inf)=C(inf)^-1", id_defect(&f_inf, &ci), tol);
                    }
                }
            }
        }
        _ => return Err(Error::Incompatible("kernel pair mismatch".into())),
    }
    Ok(rep)
}

/// Compliance magnitude of a matrix creep kernel.
fn lc_scale(c: &Creep<Matrix6>, rate: f64) -> f64 {
    c.instantaneous().norm() + c.fluidity().norm() / rate + c.modes().iter().map(|m| m.weight.norm() / m.rate).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::dualize;
    use crate::kernel::{ScalarCreep, ScalarRelaxation};

    fn maxwell() -> Kernel {
        Kernel::ScalarRelaxation(ScalarRelaxation::new(0.0, 0.0, vec![Mode::new(1.0, 1.0)]).unwrap())
    }

    fn sls() -> Kernel {
        Kernel::ScalarRelaxation(ScalarRelaxation::new(0.0, 1.0, vec![Mode::new(1.0, 1.0)]).unwrap())
    }

    #[test]
    fn maxwell_is_wellformed() {
        let rep = check_kernel(&maxwell());
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn negative_weight_fails_structurally() {
        let raw = RawAny::Scalar(RawKernel {
            kind: KernelKind::Relaxation,
            newtonian: 0.0,
            constant: 0.0,
            fluidity: 0.0,
            modes: vec![(1.0, -0.5)],
        });
        let rep = check_wellformed(&raw);
        assert!(!rep.get("weights_positive").unwrap().passed);
        assert!(!rep.get("completely_monotone").unwrap().passed);
    }

    #[test]
    fn slightly_indefinite_matrix_weight_fails() {
        let v = [1.0, 0.5, 0.0, 0.0, 0.0, 0.0];
        let w = Matrix6::outer(&v) - Matrix6::outer(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]) * (1e-6 * 1.25);
        let raw = RawAny::Matrix(RawKernel {
            kind: KernelKind::Relaxation,
            newtonian: Matrix6::zeros(),
            constant: Matrix6::identity(),
            fluidity: Matrix6::zeros(),
            modes: vec![(1.0, w)],
        });
        let rep = check_wellformed(&raw);
        assert!(!rep.get("weights_positive").unwrap().passed, "{rep}");
        assert!(rep.get("nondegeneracy").unwrap().passed);
    }

    #[test]
    fn creep_kernels_are_bernstein() {
        let c = Kernel::ScalarCreep(ScalarCreep::new(0.5, 0.75, vec![Mode::new(2.0, 0.25)]).unwrap());
        assert!(check_kernel(&c).passed());
        let raw = RawAny::Scalar(RawKernel {
            kind: KernelKind::Creep,
            newtonian: 0.0,
            constant: 1.0,
            fluidity: 0.0,
            modes: vec![(2.0, -0.5)],
        });
        assert!(!check_wellformed(&raw).get("bernstein").unwrap().passed);
    }

    #[test]
    fn residual_examples() {
        let m = maxwell();
        let h = Kernel::ScalarCreep(ScalarCreep::new(1.0, 1.0, vec![]).unwrap());
        let grid = default_time_grid(&m, &h);
        assert!(duality_residual(&m, &h, &grid).unwrap() < 1e-15);

        let dash = Kernel::ScalarRelaxation(ScalarRelaxation::pure_newtonian(1.0).unwrap());
        let t = Kernel::ScalarCreep(ScalarCreep::new(0.0, 1.0, vec![]).unwrap());
        assert_eq!(duality_residual(&dash, &t, &[0.1, 1.0, 10.0]).unwrap(), 0.0);

        let s = sls();
        let sd = dualize(&s).unwrap();
        assert!(duality_residual(&sd, &s, &[0.1, 1.0, 10.0]).unwrap() <= 1e-12);
        assert!(laplace_residual(&s, &sd, &default_laplace_grid(&s, &sd)).unwrap() <= 1e-14);
    }

    #[test]
    fn limit_examples() {
        for k in [sls(), maxwell(), Kernel::ScalarRelaxation(ScalarRelaxation::pure_newtonian(1.0).unwrap())] {
            let d = dualize(&k).unwrap();
            let rep = check_limit_identities(&k, &d, 1e-8).unwrap();
            assert!(rep.passed(), "{rep}");
            assert!(rep.entries.len() >= 4);
        }
        let rep = check_limit_identities(&maxwell(), &dualize(&maxwell()).unwrap(), 1e-8).unwrap();
        assert!(rep.get("relaxation: f_inf=0 => h(inf)=inf").is_some());
        assert!(rep.get("creep: fluidity>0 => f_inf=0").is_some());
    }

    #[test]
    fn wrong_pair_is_caught() {
        let s = sls();
        let wrong = Kernel::ScalarCreep(ScalarCreep::new(0.5, 0.0, vec![Mode::new(0.5, 0.3)]).unwrap());
        assert!(duality_residual(&s, &wrong, &[0.1, 1.0, 10.0]).unwrap() > 1e-3);
        assert!(!check_limit_identities(&s, &wrong, 1e-8).unwrap().passed());
        assert!(matches!(duality_residual(&s, &s, &[1.0]), Err(Error::Invalid(_))));
    }

    #[test]
    fn matrix_limits() {
        let id = Matrix6::identity();
        let k = Kernel::MatrixRelaxation(Relaxation::new(Matrix6::zeros(), id, vec![Mode::new(1.0, id)]).unwrap());
        let d = dualize(&k).unwrap();
        let rep = check_limit_identities(&k, &d, 1e-8).unwrap();
        assert!(rep.passed(), "{rep}");
        assert!(rep.get("relaxation: F_inf invertible => C(inf)=F_inf^-1").is_some());
        let dash = Kernel::MatrixRelaxation(Relaxation::pure_newtonian(id).unwrap());
        let rep = check_limit_identities(&dash, &dualize(&dash).unwrap(), 1e-8).unwrap();
        assert!(rep.passed(), "{rep}");
        assert!(rep.get("relaxation: N>0 => C'(0)=N^-1").is_some());
        assert!(rep.get("creep: D>0 => R(inf)=0").is_some());
    }
}
