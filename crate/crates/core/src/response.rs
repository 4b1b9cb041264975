//! Constitutive response `σ = R ∗ ε̇` (and `ε = C ∗ σ̇`) for piecewise
//! histories, in closed form.
//!
//! A history is a sequence of segments `[tⱼ, tⱼ₊₁)`, the last one open, on
//! each of which the signal is an [`ExpSum`] in local time `τ = t − tⱼ`.
//! Piecewise-linear input is the special case without exponentials; the
//! stress produced by a relaxation kernel from such input is again of this
//! form, so it can be fed back through the dual creep kernel exactly.

use crate::convolution::{convolve_with, ExpSum};
use crate::error::{invalid, Result};
use crate::kernel::{Coefficient, Creep, Linear, Relaxation};
use crate::matrix6::{Matrix6, Vector6};

/// Kernel coefficients acting on history values.
pub trait Acts<V>: Coefficient {
    fn act(&self, v: &V) -> V;
}

impl Acts<f64> for f64 {
    fn act(&self, v: &f64) -> f64 {
        self * v
    }
}

impl Acts<Vector6> for Matrix6 {
    fn act(&self, v: &Vector6) -> Vector6 {
        self.to_dense() * v
    }
}

/// Piecewise-linear history through `(time, value)` breakpoints, starting
/// at `t = 0`. The signal is zero before `0`, so a nonzero first value is a
/// jump at `0`. After the last breakpoint the value is held.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainHistory<V> {
    times: Vec<f64>,
    values: Vec<V>,
}

impl<V: Linear> StrainHistory<V> {
    pub fn new(times: Vec<f64>, values: Vec<V>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(invalid("history needs matching, nonempty time and value lists"));
        }
        if times[0] != 0.0 {
            return Err(invalid(format!("history must start at t = 0 (got {})", times[0])));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("history times must be finite and strictly increasing"));
        }
        Ok(StrainHistory { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn to_segmented(&self) -> Segmented<V> {
        let n = self.times.len();
        let segments = (0..n)
            .map(|j| {
                let slope = if j + 1 < n {
                    (self.values[j + 1] - self.values[j]) * (1.0 / (self.times[j + 1] - self.times[j]))
                } else {
                    V::zero()
                };
                ExpSum { constant: self.values[j], linear: slope, exps: Vec::new() }
            })
            .collect();
        Segmented { times: self.times.clone(), segments, impulse: V::zero() }
    }
}

/// Piecewise exponential-sum signal, zero for `t < 0`, plus an optional
/// Dirac impulse at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmented<V> {
    pub times: Vec<f64>,
    pub segments: Vec<ExpSum<V>>,
    pub impulse: V,
}

impl<V: Linear> Segmented<V> {
    fn locate(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// Value at `t ≥ 0`, right-continuous at breakpoints.
    pub fn eval(&self, t: f64) -> V {
        let j = self.locate(t);
        self.segments[j].eval(t - self.times[j])
    }

    /// Right derivative at `t`.
    pub fn rate(&self, t: f64) -> V {
        let j = self.locate(t);
        self.segments[j].derivative().eval(t - self.times[j])
    }

    /// Jump at each breakpoint: `(time, value(t⁺) − value(t⁻))`.
    pub fn jumps(&self) -> Vec<(f64, V)> {
        let mut out = Vec::with_capacity(self.times.len());
        out.push((0.0, self.segments[0].eval(0.0)));
        for j in 1..self.times.len() {
            let before = self.segments[j - 1].eval(self.times[j] - self.times[j - 1]);
            out.push((self.times[j], self.segments[j].eval(0.0) - before));
        }
        out
    }
}

/// Sampled response.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSeries<V> {
    pub times: Vec<f64>,
    pub values: Vec<V>,
    /// Dirac impulses `(time, coefficient)` carried by the response at
    /// input jumps; they are not included in `values`.
    pub impulses: Vec<(f64, V)>,
}

fn apply_sum<K: Acts<V>, V: Linear>(k: &ExpSum<K>, v: &V) -> ExpSum<V> {
    k.map(|c| c.act(v))
}

/// `∫₀ᵗ K(t − u) dh(u) + N·ḣ(t)` at a single time, where `dh` includes the
/// jumps of `h` and the derivative of its impulse.
fn hereditary<K: Acts<V>, V: Linear>(kernel: &ExpSum<K>, dirac: &K, input: &Segmented<V>, t: f64) -> V {
    let j = input.locate(t);
    let tau = t - input.times[j];
    let act = |k: &K, v: &V| k.act(v);
    let mut acc = V::zero();
    acc += apply_sum(&kernel.derivative(), &input.impulse).eval(t);
    for (ti, dv) in input.jumps().into_iter().take(j + 1) {
        acc += apply_sum(kernel, &dv).eval(t - ti);
    }
    for i in 0..j {
        let len = input.times[i + 1] - input.times[i];
        let lag = t - input.times[i + 1];
        let g = input.segments[i].derivative();
        acc += convolve_with(&kernel.shift(lag), &g, len, act);
    }
    let g = input.segments[j].derivative();
    acc += convolve_with(kernel, &g, tau, act);
    acc += dirac.act(&input.rate(t));
    acc
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid("sample times must be finite and nonnegative"));
    }
    Ok(())
}

fn impulses<K: Acts<V>, V: Linear>(dirac: &K, input: &Segmented<V>) -> Vec<(f64, V)> {
    input.jumps().into_iter().map(|(t, dv)| (t, dirac.act(&dv))).collect()
}

/// Stress response `σ(t) = N·ε̇(t) + ∫₀ᵗ F(t − u) dε(u)` sampled at `times`.
pub fn respond<K: Acts<V>, V: Linear>(
    k: &Relaxation<K>,
    history: &Segmented<V>,
    times: &[f64],
) -> Result<ResponseSeries<V>> {
    check_times(times)?;
    let f = ExpSum::from_relaxation(k);
    let n = k.newtonian();
    Ok(ResponseSeries {
        times: times.to_vec(),
        values: times.iter().map(|&t| hereditary(&f, &n, history, t)).collect(),
        impulses: impulses(&n, history),
    })
}

/// Strain response `ε(t) = ∫₀ᵗ C(t − u) dσ(u)` sampled at `times`.
pub fn respond_creep<K: Acts<V>, V: Linear>(
    c: &Creep<K>,
    history: &Segmented<V>,
    times: &[f64],
) -> Result<ResponseSeries<V>> {
    check_times(times)?;
    let g = ExpSum::from_creep(c);
    let zero = K::zero();
    Ok(ResponseSeries {
        times: times.to_vec(),
        values: times.iter().map(|&t| hereditary(&g, &zero, history, t)).collect(),
        impulses: Vec::new(),
    })
}

/// The stress response to a piecewise-linear strain history as an exact
/// segmented signal. The Newtonian part of the initial jump becomes the
/// impulse of the result.
pub fn respond_exact<K: Acts<V>, V: Linear>(k: &Relaxation<K>, history: &StrainHistory<V>) -> Segmented<V> {
    let f = ExpSum::from_relaxation(k);
    // I(y) = ∫₀ʸ F
    let big_i = f.integral();
    let n = k.newtonian();
    let h = history.to_segmented();
    let times = &h.times;
    let eps0 = h.segments[0].constant;
    let mut segments = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        let tj = times[j];
        let mut seg = apply_sum(&f.shift(tj), &eps0);
        for i in 0..j {
            let slope = h.segments[i].linear;
            let mut part = apply_sum(&big_i.shift(tj - times[i]), &slope);
            part.add(&apply_sum(&big_i.shift(tj - times[i + 1]), &slope).scaled(-1.0));
            seg.add(&part);
        }
        let slope = h.segments[j].linear;
        seg.add(&apply_sum(&big_i, &slope));
        seg.constant += n.act(&slope);
        segments.push(seg);
    }
    Segmented { times: times.clone(), segments, impulse: n.act(&eps0) }
}
