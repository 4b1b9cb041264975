//! Scalar rational algebra for Laplace-domain duality.
//!
//! `p·f̃(p)` of a relaxation kernel is a complete Bernstein function (CBF)
//! `Z(p) = c₀ + c₁·p + Σ p·wₖ/(p + rₖ)`. Its reciprocal is a Stieltjes
//! function `a + b/p + Σ νⱼ/(p + sⱼ)`. Because `Z` is increasing on every
//! pole-free interval of the negative axis, its zeros `−sⱼ` interlace with
//! the poles `−rₖ` and each one is bracketed before it is computed.

use nalgebra::DMatrix;

use crate::error::{invalid, numeric, Result};
use crate::kernel::{Mode, ScalarCreep, ScalarRelaxation};

/// Residues more negative than this fraction of the output scale are errors.
pub const TOL_RESIDUE: f64 = 1e-12;

/// Real polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

impl RealPolynomial {
    /// Trailing (highest-degree) exact zeros are trimmed.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        RealPolynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `∏ (p + rₖ)`.
    pub fn from_negated_roots(rates: &[f64]) -> Self {
        rates
            .iter()
            .fold(Self::constant(1.0), |acc, &r| acc.mul(&Self::new(vec![r, 1.0])))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * p + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(0.0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |c: &[f64], k: usize| c.get(k).copied().unwrap_or(0.0);
        Self::new((0..n).map(|k| get(&self.coeffs, k) + get(&other.coeffs, k)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// All complex roots via the eigenvalues of the companion matrix of the
    /// polynomial in the rescaled variable `q = p/scale`.
    pub fn companion_roots(&self, scale: f64) -> Vec<(f64, f64)> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let scaled: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * scale.powi(k as i32))
            .collect();
        let lead = scaled[n];
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            m[(i, n - 1)] = -scaled[i] / lead;
        }
        m.complex_eigenvalues()
            .iter()
            .map(|z| (z.re * scale, z.im * scale))
            .collect()
    }
}

/// Complete Bernstein function `c₀ + c₁·p + Σ p·wₖ/(p + rₖ)` with a
/// discrete measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarCbf {
    pub constant: f64,
    pub slope: f64,
    /// `(rate, weight)` sorted by rate, weights positive.
    pub modes: Vec<(f64, f64)>,
}

impl ScalarCbf {
    /// `p·f̃(p)` of a relaxation kernel.
    pub fn from_relaxation(k: &ScalarRelaxation) -> Self {
        ScalarCbf {
            constant: k.equilibrium(),
            slope: k.newtonian(),
            modes: k.modes().iter().map(|m| (m.rate, m.weight)).collect(),
        }
    }

    /// `p·[p·h̃(p)] = b + a·p + Σ p·νⱼ/(p + sⱼ)` of a creep kernel.
    pub fn from_creep(c: &ScalarCreep) -> Self {
        ScalarCbf {
            constant: c.fluidity(),
            slope: c.instantaneous(),
            modes: c.modes().iter().map(|m| (m.rate, m.weight)).collect(),
        }
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.modes
            .iter()
            .fold(self.constant + self.slope * p, |acc, &(r, w)| acc + w * p / (p + r))
    }

    pub fn derivative(&self, p: f64) -> f64 {
        self.modes.iter().fold(self.slope, |acc, &(r, w)| {
            let q = p + r;
            acc + w * r / (q * q)
        })
    }

    pub fn rates(&self) -> Vec<f64> {
        self.modes.iter().map(|&(r, _)| r).collect()
    }

    /// Number of strictly negative zeros: `n − [c₀ = 0] + [c₁ > 0]`.
    pub fn expected_root_count(&self) -> usize {
        let n = self.modes.len() as isize;
        let count = n - isize::from(self.constant == 0.0) + isize::from(self.slope > 0.0);
        count.max(0) as usize
    }
}

/// Stieltjes function `a + b/p + Σ massⱼ/(p + poleⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalStieltjes {
    pub constant: f64,
    pub pole_at_zero_mass: f64,
    /// `(pole, mass)` sorted by pole.
    pub modes: Vec<(f64, f64)>,
}

impl RationalStieltjes {
    pub fn eval(&self, p: f64) -> f64 {
        self.modes
            .iter()
            .fold(self.constant + self.pole_at_zero_mass / p, |acc, &(s, m)| acc + m / (p + s))
    }

    /// Creep kernel whose `p·h̃(p)` is this function.
    pub fn to_creep(&self) -> Result<ScalarCreep> {
        ScalarCreep::new(
            self.constant,
            self.pole_at_zero_mass,
            self.modes.iter().map(|&(s, m)| Mode::new(s, m)).collect(),
        )
    }

    /// Relaxation kernel whose `p·f̃(p)` is `p` times this function.
    pub fn to_relaxation(&self) -> Result<ScalarRelaxation> {
        ScalarRelaxation::from_parts(
            self.constant,
            self.pole_at_zero_mass,
            self.modes.iter().map(|&(s, m)| Mode::new(s, m)).collect(),
        )
    }
}

/// Numerator and denominator of `Z(p) = N(p)/D(p)` with `D(p) = ∏(p + rₖ)`.
pub fn cbf_as_rational(cbf: &ScalarCbf) -> (RealPolynomial, RealPolynomial) {
    let rates = cbf.rates();
    let denominator = RealPolynomial::from_negated_roots(&rates);
    let mut numerator = RealPolynomial::new(vec![cbf.constant, cbf.slope]).mul(&denominator);
    for (k, &(_, w)) in cbf.modes.iter().enumerate() {
        let others: Vec<f64> = rates
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &r)| r)
            .collect();
        let term = RealPolynomial::from_negated_roots(&others).mul(&RealPolynomial::new(vec![0.0, w]));
        numerator = numerator.add(&term);
    }
    (numerator, denominator)
}

/// Relative bracket width at which bisection stops.
const BISECTION_REL_WIDTH: f64 = 1e-14;

/// The positive numbers `s` with `Z(−s) = 0`, ascending. Each lies in its
/// own interval of `{0, r₁, …, rₙ, ∞}`: `(0, r₁)` when `c₀ > 0`, every
/// `(rₖ, rₖ₊₁)`, and `(rₙ, ∞)` when `c₁ > 0`.
pub fn interlaced_roots(cbf: &ScalarCbf) -> Result<Vec<f64>> {
    let rates = cbf.rates();
    // g(s) = Z(−s) falls from +∞ (or c₀) to −∞ across each bracket.
    let g = |s: f64| cbf.eval(-s);

    let mut brackets: Vec<(f64, Option<f64>)> = Vec::new();
    if rates.is_empty() {
        if cbf.constant > 0.0 && cbf.slope > 0.0 {
            brackets.push((0.0, None));
        }
    } else {
        if cbf.constant > 0.0 {
            brackets.push((0.0, Some(rates[0])));
        }
        for w in rates.windows(2) {
            brackets.push((w[0], Some(w[1])));
        }
        if cbf.slope > 0.0 {
            brackets.push((*rates.last().unwrap(), None));
        }
    }

    let mut roots = Vec::with_capacity(brackets.len());
    for (lo0, hi0) in brackets {
        let hi_is_pole = hi0.is_some();
        let hi0 = match hi0 {
            Some(h) => h,
            None => {
                let mut h = if lo0 > 0.0 { 2.0 * lo0 } else { (cbf.constant / cbf.slope).max(f64::MIN_POSITIVE) * 2.0 };
                let mut guard = 0;
                while !(g(h) < 0.0) {
                    h *= 2.0;
                    guard += 1;
                    if guard > 2100 || !h.is_finite() {
                        return Err(numeric("could not bracket the largest root"));
                    }
                }
                h
            }
        };
        roots.push(bisect_bracket(&g, lo0, hi0, hi_is_pole, cbf)?);
    }
    Ok(roots)
}

fn bisect_bracket(g: &impl Fn(f64) -> f64, lo0: f64, hi0: f64, hi_is_pole: bool, cbf: &ScalarCbf) -> Result<f64> {
    let (mut lo, mut hi) = (lo0, hi0);
    let mut iterations = 0;
    while hi - lo > BISECTION_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v.is_nan() {
            return Err(numeric(format!("non-finite value while bisecting in ({lo0}, {hi0})")));
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > 4000 {
            return Err(numeric("bisection did not converge"));
        }
    }
    // A bracket that never moved off a pole means no sign change was seen.
    let touches_pole = (lo == lo0 && lo0 > 0.0) || (hi == hi0 && hi_is_pole);
    if touches_pole {
        return Err(numeric(format!(
            "no sign change in bracket ({lo0}, {hi0}); rates may be numerically coincident"
        )));
    }
    let mid = 0.5 * (lo + hi);
    // one Newton step, g′(s) = −Z′(−s)
    let slope = -cbf.derivative(-mid);
    let polished = mid - g(mid) / slope;
    if polished.is_finite() && polished > lo0 && polished < hi0 && g(polished).abs() <= g(mid).abs() {
        Ok(polished)
    } else {
        Ok(mid)
    }
}

/// Decomposes `1/Z(p)` into Stieltjes form given the zeros from
/// [`interlaced_roots`]. The residue at `−sⱼ` is `D(−sⱼ)/N′(−sⱼ)`, which
/// equals `1/Z′(−sⱼ)` and is evaluated in that form.
pub fn stieltjes_partial_fractions(cbf: &ScalarCbf, roots: &[f64]) -> Result<RationalStieltjes> {
    let total: f64 = cbf.constant + cbf.modes.iter().map(|&(_, w)| w).sum::<f64>();
    let constant = if cbf.slope > 0.0 { 0.0 } else { 1.0 / total };
    let pole_at_zero_mass = if cbf.constant == 0.0 { 1.0 / cbf.derivative(0.0) } else { 0.0 };
    let mut modes = Vec::with_capacity(roots.len());
    let mut scale = constant + pole_at_zero_mass;
    for &s in roots {
        let mass = 1.0 / cbf.derivative(-s);
        scale += mass.abs() / s;
        modes.push((s, mass));
    }
    for m in modes.iter_mut() {
        if m.1 < 0.0 {
            if m.1 < -TOL_RESIDUE * scale * m.0 {
                return Err(numeric(format!("negative residue {} at pole {}", m.1, m.0)));
            }
            m.1 = 0.0;
        }
    }
    modes.retain(|m| m.1 > 0.0);
    if !constant.is_finite() || !pole_at_zero_mass.is_finite() {
        return Err(invalid("CBF vanishes identically"));
    }
    Ok(RationalStieltjes { constant, pole_at_zero_mass, modes })
}

/// `1/Z(p)` in Stieltjes form.
pub fn invert_cbf(cbf: &ScalarCbf) -> Result<RationalStieltjes> {
    if cbf.constant == 0.0 && cbf.slope == 0.0 && cbf.modes.is_empty() {
        return Err(invalid("CBF vanishes identically"));
    }
    let roots = interlaced_roots(cbf)?;
    stieltjes_partial_fractions(cbf, &roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cbf(constant: f64, slope: f64, modes: &[(f64, f64)]) -> ScalarCbf {
        ScalarCbf { constant, slope, modes: modes.to_vec() }
    }

    #[test]
    fn numerator_denominator_examples() {
        // Maxwell: Z = p/(p+1)
        let (n, d) = cbf_as_rational(&cbf(0.0, 0.0, &[(1.0, 1.0)]));
        assert_eq!(n.coeffs(), &[0.0, 1.0]);
        assert_eq!(d.coeffs(), &[1.0, 1.0]);
        // SLS: (2p + 1)/(p + 1)
        let (n, d) = cbf_as_rational(&cbf(1.0, 0.0, &[(1.0, 1.0)]));
        assert_eq!(n.coeffs(), &[1.0, 2.0]);
        assert_eq!(d.coeffs(), &[1.0, 1.0]);
        // Dirac plus Maxwell: (p² + 2p)/(p + 1)
        let (n, d) = cbf_as_rational(&cbf(0.0, 1.0, &[(1.0, 1.0)]));
        assert_eq!(n.coeffs(), &[0.0, 2.0, 1.0]);
        assert_eq!(d.coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn numerator_degree_and_constant_term() {
        let c = cbf(0.7, 0.0, &[(0.5, 1.0), (2.0, 3.0), (9.0, 0.25)]);
        let (n, d) = cbf_as_rational(&c);
        assert_eq!(n.degree(), 3);
        assert!((n.eval(0.0) - 0.7 * 0.5 * 2.0 * 9.0).abs() < 1e-12);
        let with_dirac = cbf(0.7, 1.5, &c.modes);
        assert_eq!(cbf_as_rational(&with_dirac).0.degree(), 4);
        for &p in &[0.01, 0.3, 4.0, 100.0] {
            let direct = c.eval(p);
            assert!((n.eval(p) / d.eval(p) - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn root_examples() {
        assert_eq!(interlaced_roots(&cbf(0.0, 0.0, &[(1.0, 1.0)])).unwrap(), Vec::<f64>::new());
        let sls = interlaced_roots(&cbf(1.0, 0.0, &[(1.0, 1.0)])).unwrap();
        assert_eq!(sls.len(), 1);
        assert!((sls[0] - 0.5).abs() < 1e-15);
        let fluid = interlaced_roots(&cbf(0.0, 0.0, &[(1.0, 1.0), (3.0, 1.0)])).unwrap();
        assert_eq!(fluid.len(), 1);
        assert!((fluid[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn partial_fraction_examples() {
        let maxwell = invert_cbf(&cbf(0.0, 0.0, &[(1.0, 1.0)])).unwrap();
        assert_eq!((maxwell.constant, maxwell.pole_at_zero_mass), (1.0, 1.0));
        assert!(maxwell.modes.is_empty());

        let sls = invert_cbf(&cbf(1.0, 0.0, &[(1.0, 1.0)])).unwrap();
        assert_eq!(sls.constant, 0.5);
        assert_eq!(sls.pole_at_zero_mass, 0.0);
        assert!((sls.modes[0].0 - 0.5).abs() < 1e-15 && (sls.modes[0].1 - 0.25).abs() < 1e-15);

        let fluid = invert_cbf(&cbf(0.0, 0.0, &[(1.0, 1.0), (3.0, 1.0)])).unwrap();
        assert_eq!(fluid.constant, 0.5);
        assert!((fluid.pole_at_zero_mass - 0.75).abs() < 1e-15);
        assert!((fluid.modes[0].0 - 2.0).abs() < 1e-14 && (fluid.modes[0].1 - 0.25).abs() < 1e-14);
    }

    #[test]
    fn pure_slope_and_affine() {
        let dashpot = invert_cbf(&cbf(0.0, 2.0, &[])).unwrap();
        assert_eq!(dashpot.constant, 0.0);
        assert_eq!(dashpot.pole_at_zero_mass, 0.5);
        // Kelvin–Voigt: Z = 1 + p → 1/(p + 1)
        let kv = invert_cbf(&cbf(1.0, 1.0, &[])).unwrap();
        assert_eq!(kv.constant, 0.0);
        assert!((kv.modes[0].0 - 1.0).abs() < 1e-14 && (kv.modes[0].1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn companion_roots_of_quadratic() {
        // (p + 1)(p + 3)
        let p = RealPolynomial::from_negated_roots(&[1.0, 3.0]);
        let mut roots: Vec<f64> = p.companion_roots(3.0).iter().map(|z| z.0).collect();
        roots.sort_by(f64::total_cmp);
        assert!((roots[0] + 3.0).abs() < 1e-12 && (roots[1] + 1.0).abs() < 1e-12);
    }
}
