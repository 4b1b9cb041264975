//! Closed-form convolutions of exponential sums
//! `f(t) = c + l·t + Σ cₖ e^(−rₖ t)` on `[0, ∞)`.

use crate::kernel::{Coefficient, Creep, Linear, Relaxation};
use crate::matrix6::{Dense6, Matrix6};

/// Relative rate gap below which two exponentials are treated through the
/// `t·e^(−r t)` branch.
pub const TOL_EQUAL_RATE: f64 = 1e-8;

/// `x − 1 + e^(−x)`, accurate for small `x`.
pub fn ramp_defect(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // x²/2 − x³/6 + x⁴/24 − …
        let mut term = x * x / 2.0;
        let mut acc = term;
        for k in 3..=12 {
            term *= -x / k as f64;
            acc += term;
        }
        acc
    } else {
        x + (-x).exp_m1()
    }
}

/// `(1 − e^(−x))/x`, with value 1 at `x = 0`.
pub fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `∫₀ᵗ e^(−r(t−u)) e^(−s u) du`.
pub fn exp_exp(r: f64, s: f64, t: f64) -> f64 {
    let (hi, lo) = if r >= s { (r, s) } else { (s, r) };
    let gap = hi - lo;
    if gap < TOL_EQUAL_RATE * hi {
        // t·e^(−lo t) with a series correction in (hi − lo)·t
        let x = gap * t;
        (-lo * t).exp() * t * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0)
    } else {
        (-lo * t).exp() * t * phi1(gap * t)
    }
}

/// Coefficients that can be convolved: products of reals are reals,
/// products of symmetric matrices are general matrices.
pub trait ConvCoef: Copy {
    type Product: Linear;
    fn product(&self, rhs: &Self) -> Self::Product;
}

impl ConvCoef for f64 {
    type Product = f64;
    fn product(&self, rhs: &f64) -> f64 {
        self * rhs
    }
}

impl ConvCoef for Matrix6 {
    type Product = Dense6;
    fn product(&self, rhs: &Matrix6) -> Dense6 {
        self.to_dense() * rhs.to_dense()
    }
}

/// `constant + linear·t + Σ c·e^(−rate·t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum<T> {
    pub constant: T,
    pub linear: T,
    pub exps: Vec<(f64, T)>,
}

impl<T: Linear> ExpSum<T> {
    pub fn zero() -> Self {
        ExpSum { constant: T::zero(), linear: T::zero(), exps: Vec::new() }
    }

    pub fn eval(&self, t: f64) -> T {
        self.exps
            .iter()
            .fold(self.constant + self.linear * t, |acc, &(r, c)| acc + c * (-r * t).exp())
    }

    pub fn derivative(&self) -> Self {
        ExpSum {
            constant: self.linear,
            linear: T::zero(),
            exps: self.exps.iter().map(|&(r, c)| (r, c * -r)).collect(),
        }
    }

    /// `t ↦ self(t + delta)`; `delta ≥ 0` keeps the exponentials bounded.
    pub fn shift(&self, delta: f64) -> Self {
        ExpSum {
            constant: self.constant + self.linear * delta,
            linear: self.linear,
            exps: self.exps.iter().map(|&(r, c)| (r, c * (-r * delta).exp())).collect(),
        }
    }

    /// Antiderivative vanishing at 0. Requires `linear = 0`.
    pub fn integral(&self) -> Self {
        debug_assert!(self.exps.iter().all(|e| e.0 > 0.0));
        let mut constant = T::zero();
        let mut exps = Vec::with_capacity(self.exps.len());
        for &(r, c) in &self.exps {
            let k = c * (1.0 / r);
            constant += k;
            exps.push((r, T::zero() - k));
        }
        ExpSum { constant, linear: self.constant, exps }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|c| c * s)
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> ExpSum<U> {
        ExpSum {
            constant: f(self.constant),
            linear: f(self.linear),
            exps: self.exps.iter().map(|&(r, c)| (r, f(c))).collect(),
        }
    }

    pub fn add(&mut self, other: &ExpSum<T>) {
        self.constant += other.constant;
        self.linear += other.linear;
        self.exps.extend(other.exps.iter().copied());
    }
}

impl<T: Coefficient> ExpSum<T> {
    /// Continuous part `B + Σ Gₖ e^(−rₖ t)` of a relaxation kernel.
    pub fn from_relaxation(k: &Relaxation<T>) -> Self {
        ExpSum {
            constant: k.equilibrium(),
            linear: T::zero(),
            exps: k.modes().iter().map(|m| (m.rate, m.weight)).collect(),
        }
    }

    /// `C(t)` written as `(A + Σ Hⱼ/sⱼ) + t·D − Σ (Hⱼ/sⱼ) e^(−sⱼ t)`.
    pub fn from_creep(c: &Creep<T>) -> Self {
        let retarded = c.modes().iter().fold(T::zero(), |acc, m| acc + m.weight * (1.0 / m.rate));
        ExpSum {
            constant: c.instantaneous() + retarded,
            linear: c.fluidity(),
            exps: c
                .modes()
                .iter()
                .map(|m| (m.rate, T::zero() - m.weight * (1.0 / m.rate)))
                .collect(),
        }
    }
}

/// `∫₀ᵗ f(t − u)·g(u) du` in closed form, with the coefficient product
/// supplied by `mul`.
pub fn convolve_with<A: Copy, B: Copy, P: Linear>(
    f: &ExpSum<A>,
    g: &ExpSum<B>,
    t: f64,
    mul: impl Fn(&A, &B) -> P,
) -> P {
    let mut acc = P::zero();
    let t2 = t * t / 2.0;
    let t3 = t * t * t / 6.0;

    acc += mul(&f.constant, &g.constant) * t;
    acc += mul(&f.constant, &g.linear) * t2;
    acc += mul(&f.linear, &g.constant) * t2;
    acc += mul(&f.linear, &g.linear) * t3;

    for &(s, c) in &g.exps {
        let with_const = t * phi1(s * t);
        let with_lin = ramp_defect(s * t) / (s * s);
        acc += mul(&f.constant, &c) * with_const;
        acc += mul(&f.linear, &c) * with_lin;
    }
    for &(r, c) in &f.exps {
        let with_const = t * phi1(r * t);
        let with_lin = ramp_defect(r * t) / (r * r);
        acc += mul(&c, &g.constant) * with_const;
        acc += mul(&c, &g.linear) * with_lin;
        for &(s, d) in &g.exps {
            acc += mul(&c, &d) * exp_exp(r, s, t);
        }
    }
    acc
}

/// `(f ∗ g)(t)`; for matrix coefficients `f` multiplies from the left.
pub fn convolve_at<T: ConvCoef>(f: &ExpSum<T>, g: &ExpSum<T>, t: f64) -> T::Product {
    convolve_with(f, g, t, |a, b| a.product(b))
}

/// `φ_m(−x)` for `m = 1..=count`, where
/// `φ_m(−x) = ∫₀¹ e^(−(1−θ)x) θ^(m−1)/(m−1)! dθ` and `x ≥ 0`.
/// Taylor series while `x ≤ m + 1`, upward recurrence beyond, where it is
/// damped.
fn phi_sequence(x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut inv_fact = 1.0; // 1/(m−1)!
    for m in 1..=count {
        let prev_inv_fact = inv_fact;
        inv_fact /= m as f64; // now 1/m!
        let v = if x <= (m + 1) as f64 {
            let mut term = inv_fact;
            let mut acc = term;
            let mut j = 1;
            while term.abs() > 1e-18 * acc.abs() {
                term *= -x / (m + j) as f64;
                acc += term;
                j += 1;
            }
            acc
        } else if m == 1 {
            phi1(x)
        } else {
            (prev_inv_fact - out[m - 2]) / x
        };
        out.push(v);
    }
    out
}

/// `∫₀ᵗ e^(−r(t−u)) (1 − e^(−s u)) du` without cancellation for small `s·t`.
pub fn exp_saturating(r: f64, s: f64, t: f64) -> f64 {
    let st = s * t;
    if st >= 0.5 {
        return t * phi1(r * t) - exp_exp(r, s, t);
    }
    // t·Σ_{k≥1} (−1)^(k+1) (st)^k φ_{k+1}(−rt)
    let phis = phi_sequence(r * t, 24);
    let mut acc = 0.0;
    let mut pow = 1.0;
    for k in 1..24 {
        pow *= -st;
        let term = -pow * phis[k];
        acc += term;
        if term.abs() <= 1e-18 * acc.abs() {
            break;
        }
    }
    t * acc
}

/// `(R ∗ C)(t) = N·C(t) + ∫₀ᵗ F(t−u) C(u) du`, with the creep side kept in
/// the saturating basis `1 − e^(−s t)` so small times do not cancel.
pub fn relaxation_creep_at<T: Coefficient + ConvCoef>(r: &Relaxation<T>, c: &Creep<T>, t: f64) -> T::Product {
    let mut acc = r.newtonian().product(&c.eval_unchecked(t));
    // B ∗ C
    let mut int_c = c.instantaneous() * t + c.fluidity() * (t * t / 2.0);
    for m in c.modes() {
        int_c += m.weight * (ramp_defect(m.rate * t) / (m.rate * m.rate));
    }
    acc += r.equilibrium().product(&int_c);
    // e^(−r·) ∗ C per relaxation mode
    for g in r.modes() {
        let rt = g.rate * t;
        let mut k = c.instantaneous() * (t * phi1(rt)) + c.fluidity() * (ramp_defect(rt) / (g.rate * g.rate));
        for m in c.modes() {
            k += m.weight * (exp_saturating(g.rate, m.rate, t) / m.rate);
        }
        acc += g.weight.product(&k);
    }
    acc
}
