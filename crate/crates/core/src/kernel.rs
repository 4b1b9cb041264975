//! Relaxation and creep kernels with discrete (Prony) spectra.
//!
//! A relaxation kernel is `R(t) = u(t)·N + F(t)` where `u` is the identity
//! operator (a Dirac term under convolution with the strain rate) and
//! `F(t) = B + Σ Gₖ e^(−rₖ t)` is completely monotone. A creep kernel is
//! `C(t) = A + t·D + Σ (Hⱼ/sⱼ)(1 − e^(−sⱼ t))`, a Bernstein function.
//! Both are generic over the coefficient type: `f64` for one-dimensional
//! materials and [`Matrix6`] for anisotropic ones.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

use crate::error::{invalid, Result};
use crate::matrix6::{Dense6, Matrix6, Vector6, TOL_PSD};

/// Rates closer than this fraction of the largest rate are merged.
pub const TOL_MERGE: f64 = 1e-12;
/// Modes lighter than this fraction of the kernel scale are dropped.
pub const TOL_DROP: f64 = 1e-14;

/// Real vector-space values: kernel coefficients, history values, products.
pub trait Linear: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign {
    fn zero() -> Self;
}

impl Linear for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Linear for Matrix6 {
    fn zero() -> Self {
        Matrix6::zeros()
    }
}

impl Linear for Dense6 {
    fn zero() -> Self {
        Dense6::zeros()
    }
}

impl Linear for Vector6 {
    fn zero() -> Self {
        Vector6::zeros()
    }
}

/// Coefficient field of a kernel: a nonnegative real or a PSD matrix.
pub trait Coefficient: Linear + Debug + PartialEq + Sum + Send + Sync + 'static {
    /// Absolute value or spectral norm.
    fn magnitude(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn is_finite(&self) -> bool;
    /// `≥ 0` for reals, PSD within [`TOL_PSD`] for matrices.
    fn is_nonnegative(&self) -> bool;
    /// Short label used in diagnostics.
    fn kind_label() -> &'static str;
}

impl Coefficient for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn is_nonnegative(&self) -> bool {
        *self >= 0.0
    }
    fn kind_label() -> &'static str {
        "scalar"
    }
}

impl Coefficient for Matrix6 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_zero(&self) -> bool {
        Matrix6::is_zero(self)
    }
    fn is_finite(&self) -> bool {
        Matrix6::is_finite(self)
    }
    fn is_nonnegative(&self) -> bool {
        self.is_psd(TOL_PSD)
    }
    fn kind_label() -> &'static str {
        "matrix6"
    }
}

/// One exponential term: `weight · e^(−rate·t)` (relaxation) or the
/// retardation term `weight/rate · (1 − e^(−rate·t))` (creep).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode<T> {
    pub rate: f64,
    pub weight: T,
}

impl<T> Mode<T> {
    pub fn new(rate: f64, weight: T) -> Self {
        Mode { rate, weight }
    }
}

/// Outcome of sorting, merging and dropping modes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CanonicalizeStats {
    pub merged: usize,
    pub dropped: usize,
}

fn validate_modes<T: Coefficient>(modes: &[Mode<T>], what: &str) -> Result<()> {
    for m in modes {
        if !m.rate.is_finite() || m.rate <= 0.0 {
            return Err(invalid(format!("rate must be positive (got {})", m.rate)));
        }
        if !m.weight.is_finite() {
            return Err(invalid(format!("{what} at rate {} is not finite", m.rate)));
        }
        if !m.weight.is_nonnegative() {
            return Err(invalid(format!("{what} at rate {} must be {}", m.rate, positivity_word::<T>())));
        }
    }
    Ok(())
}

fn positivity_word<T: Coefficient>() -> &'static str {
    if T::kind_label() == "scalar" {
        "positive"
    } else {
        "positive semidefinite"
    }
}

fn validate_field<T: Coefficient>(value: &T, what: &str) -> Result<()> {
    if !value.is_finite() {
        return Err(invalid(format!("{what} is not finite")));
    }
    if !value.is_nonnegative() {
        let word = if T::kind_label() == "scalar" { "nonnegative" } else { "positive semidefinite" };
        return Err(invalid(format!("{what} must be {word}")));
    }
    Ok(())
}

/// Sorts by rate, merges near-coincident rates and drops negligible weights.
fn canonicalize<T: Coefficient>(mut modes: Vec<Mode<T>>, scale: f64) -> (Vec<Mode<T>>, CanonicalizeStats) {
    let mut stats = CanonicalizeStats::default();
    modes.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    let max_rate = modes.last().map_or(0.0, |m| m.rate);
    let mut merged: Vec<Mode<T>> = Vec::with_capacity(modes.len());
    let mut group_mag = 0.0;
    for m in modes {
        match merged.last_mut() {
            Some(last) if m.rate - last.rate < TOL_MERGE * max_rate => {
                let mag = m.weight.magnitude();
                let total = group_mag + mag;
                if total > 0.0 {
                    last.rate = (last.rate * group_mag + m.rate * mag) / total;
                }
                last.weight += m.weight;
                group_mag = total;
                stats.merged += 1;
            }
            _ => {
                group_mag = m.weight.magnitude();
                merged.push(m);
            }
        }
    }
    let before = merged.len();
    merged.retain(|m| !m.weight.is_zero() && m.weight.magnitude() >= TOL_DROP * scale);
    stats.dropped = before - merged.len();
    (merged, stats)
}

fn check_time(t: f64, allow_zero: bool) -> Result<()> {
    if !t.is_finite() || t < 0.0 || (!allow_zero && t == 0.0) {
        let bound = if allow_zero { "nonnegative" } else { "positive" };
        return Err(invalid(format!("time must be {bound} (got {t})")));
    }
    Ok(())
}

fn check_laplace_arg(p: f64) -> Result<()> {
    if !p.is_finite() || p <= 0.0 {
        return Err(invalid(format!("Laplace variable must be positive (got {p})")));
    }
    Ok(())
}

/// A boundary value that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit<T> {
    Finite(T),
    Infinite,
}

impl<T: Copy> Limit<T> {
    pub fn finite(&self) -> Option<T> {
        match self {
            Limit::Finite(v) => Some(*v),
            Limit::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Limit::Infinite)
    }
}

/// Boundary behaviour of a kernel at `t → 0⁺` and `t → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport<T> {
    pub value_at_zero: Limit<T>,
    pub value_at_infinity: Limit<T>,
    pub derivative_at_zero: Limit<T>,
    pub derivative_at_infinity: Limit<T>,
    /// Coefficient of the Dirac (Newtonian) term; relaxation kernels only.
    pub impulse: Option<T>,
}

/// Relaxation kernel `u(t)·N + B + Σ Gₖ e^(−rₖ t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation<T> {
    newtonian: T,
    equilibrium: T,
    modes: Vec<Mode<T>>,
    pure_newtonian: bool,
    stats: CanonicalizeStats,
}

pub type ScalarRelaxation = Relaxation<f64>;
pub type MatrixRelaxation = Relaxation<Matrix6>;

impl<T: Coefficient> Relaxation<T> {
    /// Builds a canonical kernel. The continuous part must not vanish
    /// identically; use [`Relaxation::pure_newtonian`] for a bare dashpot.
    pub fn new(newtonian: T, equilibrium: T, modes: Vec<Mode<T>>) -> Result<Self> {
        let k = Self::build(newtonian, equilibrium, modes)?;
        if k.continuous_part_is_zero() {
            if k.newtonian.is_zero() {
                return Err(invalid("relaxation kernel is identically zero"));
            }
            return Err(invalid(
                "relaxation kernel has no continuous part; construct a pure Newtonian (dashpot) kernel explicitly",
            ));
        }
        Ok(k)
    }

    /// Pure Newtonian kernel `u(t)·N` (a dashpot).
    pub fn pure_newtonian(newtonian: T) -> Result<Self> {
        validate_field(&newtonian, "newtonian coefficient")?;
        if newtonian.is_zero() {
            return Err(invalid("pure Newtonian kernel needs a nonzero viscosity"));
        }
        Ok(Relaxation {
            newtonian,
            equilibrium: T::zero(),
            modes: Vec::new(),
            pure_newtonian: true,
            stats: CanonicalizeStats::default(),
        })
    }

    /// Dispatches to [`Relaxation::new`] or [`Relaxation::pure_newtonian`]
    /// depending on whether the continuous part is present.
    pub(crate) fn from_parts(newtonian: T, equilibrium: T, modes: Vec<Mode<T>>) -> Result<Self> {
        let k = Self::build(newtonian, equilibrium, modes)?;
        if k.continuous_part_is_zero() {
            return Self::pure_newtonian(k.newtonian);
        }
        Ok(k)
    }

    fn build(newtonian: T, equilibrium: T, modes: Vec<Mode<T>>) -> Result<Self> {
        validate_field(&newtonian, "newtonian coefficient")?;
        validate_field(&equilibrium, "equilibrium coefficient")?;
        validate_modes(&modes, "weight")?;
        let scale = equilibrium.magnitude() + modes.iter().map(|m| m.weight.magnitude()).sum::<f64>();
        let (modes, stats) = canonicalize(modes, scale);
        Ok(Relaxation { newtonian, equilibrium, modes, pure_newtonian: false, stats })
    }

    pub fn newtonian(&self) -> T {
        self.newtonian
    }

    pub fn equilibrium(&self) -> T {
        self.equilibrium
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn is_pure_newtonian(&self) -> bool {
        self.pure_newtonian
    }

    pub fn canonicalize_stats(&self) -> CanonicalizeStats {
        self.stats
    }

    pub fn continuous_part_is_zero(&self) -> bool {
        self.equilibrium.is_zero() && self.modes.is_empty()
    }

    pub fn max_rate(&self) -> Option<f64> {
        self.modes.last().map(|m| m.rate)
    }

    pub fn min_rate(&self) -> Option<f64> {
        self.modes.first().map(|m| m.rate)
    }

    /// Continuous part `B + Σ Gₖ e^(−rₖ t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> Result<T> {
        check_time(t, false)?;
        Ok(self.eval_continuous(t))
    }

    /// Continuous part without argument checks; `t = 0` gives `F(0⁺)`.
    pub fn eval_continuous(&self, t: f64) -> T {
        self.modes
            .iter()
            .fold(self.equilibrium, |acc, m| acc + m.weight * (-m.rate * t).exp())
    }

    /// `∫₀ᵗ F(s) ds`.
    pub fn integral(&self, t: f64) -> T {
        self.modes
            .iter()
            .fold(self.equilibrium * t, |acc, m| acc + m.weight * (-(-m.rate * t).exp_m1() / m.rate))
    }

    /// `p·R̃(p) = p·N + B + Σ p·Gₖ/(p + rₖ)`.
    pub fn laplace_times_p(&self, p: f64) -> Result<T> {
        check_laplace_arg(p)?;
        Ok(self.laplace_times_p_unchecked(p))
    }

    pub(crate) fn laplace_times_p_unchecked(&self, p: f64) -> T {
        self.modes.iter().fold(self.newtonian * p + self.equilibrium, |acc, m| {
            acc + m.weight * (p / (p + m.rate))
        })
    }

    pub fn limits(&self) -> LimitReport<T> {
        let at_zero = self.modes.iter().fold(self.equilibrium, |acc, m| acc + m.weight);
        let slope = self.modes.iter().fold(T::zero(), |acc, m| acc - m.weight * m.rate);
        LimitReport {
            value_at_zero: Limit::Finite(at_zero),
            value_at_infinity: Limit::Finite(self.equilibrium),
            derivative_at_zero: Limit::Finite(slope),
            derivative_at_infinity: Limit::Finite(T::zero()),
            impulse: Some(self.newtonian),
        }
    }

    /// Characteristic magnitude in stress units.
    pub fn scale(&self) -> f64 {
        let cont = self.equilibrium.magnitude() + self.modes.iter().map(|m| m.weight.magnitude()).sum::<f64>();
        if cont > 0.0 {
            cont
        } else {
            self.newtonian.magnitude()
        }
    }
}

impl Relaxation<Matrix6> {
    /// `N + B + Σ Gₖ`; positive definite exactly when no nonzero direction
    /// has an identically vanishing projected kernel.
    pub fn condition_matrix(&self) -> Matrix6 {
        self.modes.iter().fold(self.newtonian + self.equilibrium, |acc, m| acc + m.weight)
    }

    pub fn satisfies_nondegeneracy(&self) -> bool {
        self.condition_matrix().is_positive_definite(TOL_PSD)
    }

    /// Like [`Relaxation::new`] but also requires the nondegeneracy
    /// condition to hold.
    pub fn new_strict(newtonian: Matrix6, equilibrium: Matrix6, modes: Vec<Mode<Matrix6>>) -> Result<Self> {
        let k = Self::new(newtonian, equilibrium, modes)?;
        if !k.satisfies_nondegeneracy() {
            return Err(invalid("N + B + ΣG is not positive definite: some direction never relaxes"));
        }
        Ok(k)
    }

    /// Scalar kernel `vᵀ R(t) v`.
    pub fn project(&self, v: &[f64; 6]) -> Result<ScalarRelaxation> {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode::new(m.rate, m.weight.quad_form(v).max(0.0)))
            .filter(|m| m.weight > 0.0)
            .collect();
        ScalarRelaxation::from_parts(self.newtonian.quad_form(v).max(0.0), self.equilibrium.quad_form(v).max(0.0), modes)
    }

    /// Matrix kernel that acts as the given scalar kernel on every component.
    pub fn isotropic(k: &ScalarRelaxation) -> Result<Self> {
        let id = Matrix6::identity();
        Self::from_parts(
            id * k.newtonian,
            id * k.equilibrium,
            k.modes.iter().map(|m| Mode::new(m.rate, id * m.weight)).collect(),
        )
    }

    /// Block-diagonal kernel with one scalar kernel per Voigt component.
    pub fn diagonal(components: &[ScalarRelaxation; 6]) -> Result<Self> {
        let diag = |f: &dyn Fn(&ScalarRelaxation) -> f64| {
            let mut d = [0.0; 6];
            for (i, c) in components.iter().enumerate() {
                d[i] = f(c);
            }
            Matrix6::from_diagonal(&d)
        };
        let mut modes = Vec::new();
        for (i, c) in components.iter().enumerate() {
            for m in c.modes() {
                let mut d = [0.0; 6];
                d[i] = m.weight;
                modes.push(Mode::new(m.rate, Matrix6::from_diagonal(&d)));
            }
        }
        Self::from_parts(diag(&|c| c.newtonian), diag(&|c| c.equilibrium), modes)
    }
}

/// Creep kernel `A + t·D + Σ (Hⱼ/sⱼ)(1 − e^(−sⱼ t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Creep<T> {
    instantaneous: T,
    fluidity: T,
    modes: Vec<Mode<T>>,
    stats: CanonicalizeStats,
}

pub type ScalarCreep = Creep<f64>;
pub type MatrixCreep = Creep<Matrix6>;

impl<T: Coefficient> Creep<T> {
    pub fn new(instantaneous: T, fluidity: T, modes: Vec<Mode<T>>) -> Result<Self> {
        validate_field(&instantaneous, "instantaneous compliance")?;
        validate_field(&fluidity, "fluidity")?;
        validate_modes(&modes, "mass")?;
        let max_rate = modes.iter().fold(0.0_f64, |acc, m| acc.max(m.rate));
        let scale = fluidity.magnitude()
            + modes.iter().map(|m| m.weight.magnitude()).sum::<f64>()
            + instantaneous.magnitude() * max_rate;
        let (modes, stats) = canonicalize(modes, scale);
        if instantaneous.is_zero() && fluidity.is_zero() && modes.is_empty() {
            return Err(invalid("creep kernel is identically zero"));
        }
        Ok(Creep { instantaneous, fluidity, modes, stats })
    }

    pub fn instantaneous(&self) -> T {
        self.instantaneous
    }

    pub fn fluidity(&self) -> T {
        self.fluidity
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn canonicalize_stats(&self) -> CanonicalizeStats {
        self.stats
    }

    pub fn max_rate(&self) -> Option<f64> {
        self.modes.last().map(|m| m.rate)
    }

    pub fn min_rate(&self) -> Option<f64> {
        self.modes.first().map(|m| m.rate)
    }

    /// `C(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> Result<T> {
        check_time(t, true)?;
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> T {
        self.modes.iter().fold(self.instantaneous + self.fluidity * t, |acc, m| {
            acc + m.weight * (-(-m.rate * t).exp_m1() / m.rate)
        })
    }

    /// `C′(t) = D + Σ Hⱼ e^(−sⱼ t)`.
    pub fn derivative(&self, t: f64) -> Result<T> {
        check_time(t, true)?;
        Ok(self.modes.iter().fold(self.fluidity, |acc, m| acc + m.weight * (-m.rate * t).exp()))
    }

    /// `∫₀ᵗ C(s) ds`.
    pub fn integral(&self, t: f64) -> T {
        self.modes.iter().fold(
            self.instantaneous * t + self.fluidity * (0.5 * t * t),
            |acc, m| {
                let x = m.rate * t;
                acc + m.weight * (crate::convolution::ramp_defect(x) / (m.rate * m.rate))
            },
        )
    }

    /// `p·C̃(p) = A + D/p + Σ Hⱼ/(p + sⱼ)`.
    pub fn laplace_times_p(&self, p: f64) -> Result<T> {
        check_laplace_arg(p)?;
        Ok(self.laplace_times_p_unchecked(p))
    }

    pub(crate) fn laplace_times_p_unchecked(&self, p: f64) -> T {
        self.modes
            .iter()
            .fold(self.instantaneous + self.fluidity * (1.0 / p), |acc, m| acc + m.weight * (1.0 / (p + m.rate)))
    }

    pub fn limits(&self) -> LimitReport<T> {
        let slope0 = self.modes.iter().fold(self.fluidity, |acc, m| acc + m.weight);
        let at_infinity = if self.fluidity.is_zero() {
            Limit::Finite(
                self.modes
                    .iter()
                    .fold(self.instantaneous, |acc, m| acc + m.weight * (1.0 / m.rate)),
            )
        } else {
            Limit::Infinite
        };
        LimitReport {
            value_at_zero: Limit::Finite(self.instantaneous),
            value_at_infinity: at_infinity,
            derivative_at_zero: Limit::Finite(slope0),
            derivative_at_infinity: Limit::Finite(self.fluidity),
            impulse: None,
        }
    }

    /// Characteristic magnitude in compliance units.
    pub fn scale(&self) -> f64 {
        let retarded: f64 = self.modes.iter().map(|m| m.weight.magnitude() / m.rate).sum();
        let s = self.instantaneous.magnitude() + retarded;
        if s > 0.0 {
            s
        } else {
            self.fluidity.magnitude()
        }
    }
}

impl Creep<Matrix6> {
    /// `A + D + Σ Hⱼ`, the creep-side nondegeneracy matrix.
    pub fn condition_matrix(&self) -> Matrix6 {
        self.modes.iter().fold(self.instantaneous + self.fluidity, |acc, m| acc + m.weight)
    }

    pub fn satisfies_nondegeneracy(&self) -> bool {
        self.condition_matrix().is_positive_definite(TOL_PSD)
    }

    pub fn project(&self, v: &[f64; 6]) -> Result<ScalarCreep> {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode::new(m.rate, m.weight.quad_form(v).max(0.0)))
            .filter(|m| m.weight > 0.0)
            .collect();
        ScalarCreep::new(self.instantaneous.quad_form(v).max(0.0), self.fluidity.quad_form(v).max(0.0), modes)
    }

    pub fn isotropic(k: &ScalarCreep) -> Result<Self> {
        let id = Matrix6::identity();
        Self::new(
            id * k.instantaneous,
            id * k.fluidity,
            k.modes.iter().map(|m| Mode::new(m.rate, id * m.weight)).collect(),
        )
    }
}

/// Any of the four kernel kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    ScalarRelaxation(ScalarRelaxation),
    ScalarCreep(ScalarCreep),
    MatrixRelaxation(MatrixRelaxation),
    MatrixCreep(MatrixCreep),
}

impl Kernel {
    pub fn is_relaxation(&self) -> bool {
        matches!(self, Kernel::ScalarRelaxation(_) | Kernel::MatrixRelaxation(_))
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self, Kernel::MatrixRelaxation(_) | Kernel::MatrixCreep(_))
    }

    pub fn kind_name(&self) -> &'static str {
        if self.is_relaxation() {
            "relaxation"
        } else {
            "creep"
        }
    }

    pub fn max_rate(&self) -> Option<f64> {
        match self {
            Kernel::ScalarRelaxation(k) => k.max_rate(),
            Kernel::ScalarCreep(k) => k.max_rate(),
            Kernel::MatrixRelaxation(k) => k.max_rate(),
            Kernel::MatrixCreep(k) => k.max_rate(),
        }
    }

    pub fn canonicalize_stats(&self) -> CanonicalizeStats {
        match self {
            Kernel::ScalarRelaxation(k) => k.canonicalize_stats(),
            Kernel::ScalarCreep(k) => k.canonicalize_stats(),
            Kernel::MatrixRelaxation(k) => k.canonicalize_stats(),
            Kernel::MatrixCreep(k) => k.canonicalize_stats(),
        }
    }
}
