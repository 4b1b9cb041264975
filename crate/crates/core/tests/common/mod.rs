#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use viscodual::kernel::{Creep, Kernel, Mode, Relaxation};
use viscodual::matrix6::Matrix6;
use viscodual::verify::log_grid;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every material document in the fixture directory, as `(file name, text)`.
pub fn material_fixtures() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(fixture_dir())
        .expect("fixture dir")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with("_relaxation.json") || n.ends_with("_creep.json"))
        .map(|n| {
            let text = fixture(&n);
            (n, text)
        })
        .collect();
    out.sort();
    out
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// `n` distinct sorted rates within a ratio of `1e3`, anchored at a random
/// base rate.
pub fn random_rates<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let base = log_uniform(rng, 1e-2, 1e2);
    loop {
        let mut rates: Vec<f64> = (0..n).map(|_| base * log_uniform(rng, 1.0, 1e3)).collect();
        rates.sort_by(f64::total_cmp);
        if rates.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-6)) {
            return rates;
        }
    }
}

pub fn random_scalar_relaxation<R: Rng>(rng: &mut R) -> Relaxation<f64> {
    loop {
        let n = rng.gen_range(0..=8);
        let rates = random_rates(rng, n);
        let modes: Vec<Mode<f64>> = rates.iter().map(|&r| Mode::new(r, log_uniform(rng, 0.1, 10.0))).collect();
        let scale = rates.first().copied().unwrap_or(1.0);
        let newtonian = if rng.gen_bool(0.25) { log_uniform(rng, 0.1, 10.0) / scale } else { 0.0 };
        let equilibrium = if rng.gen_bool(0.5) { log_uniform(rng, 0.1, 10.0) } else { 0.0 };
        if n == 0 && (newtonian == 0.0 || equilibrium == 0.0) {
            continue;
        }
        if let Ok(k) = Relaxation::new(newtonian, equilibrium, modes) {
            return k;
        }
    }
}

pub fn random_scalar_creep<R: Rng>(rng: &mut R) -> Creep<f64> {
    loop {
        let n = rng.gen_range(0..=8);
        let rates = random_rates(rng, n);
        let modes: Vec<Mode<f64>> = rates.iter().map(|&r| Mode::new(r, log_uniform(rng, 0.1, 10.0))).collect();
        let scale = rates.first().copied().unwrap_or(1.0);
        let instantaneous = if rng.gen_bool(0.6) { log_uniform(rng, 0.1, 10.0) } else { 0.0 };
        let fluidity = if rng.gen_bool(0.5) { log_uniform(rng, 0.1, 10.0) * scale } else { 0.0 };
        if n == 0 && (instantaneous == 0.0 || fluidity == 0.0) {
            continue;
        }
        if let Ok(c) = Creep::new(instantaneous, fluidity, modes) {
            return c;
        }
    }
}

/// Half relaxation, half creep.
pub fn scalar_corpus<R: Rng>(rng: &mut R, count: usize) -> Vec<Kernel> {
    (0..count)
        .map(|i| {
            if i % 2 == 0 {
                Kernel::ScalarRelaxation(random_scalar_relaxation(rng))
            } else {
                Kernel::ScalarCreep(random_scalar_creep(rng))
            }
        })
        .collect()
}

/// `A·Aᵀ` with `A` a random `6×k` matrix.
pub fn random_gram<R: Rng>(rng: &mut R, scale: f64) -> Matrix6 {
    let k = rng.gen_range(1..=6);
    let cols: Vec<[f64; 6]> = (0..k)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
        .collect();
    let mut m = Matrix6::zeros();
    for c in &cols {
        m += Matrix6::outer(c);
    }
    m * scale
}

pub fn random_matrix_relaxation<R: Rng>(rng: &mut R) -> Relaxation<Matrix6> {
    loop {
        let n = rng.gen_range(1..=4);
        let rates = random_rates(rng, n);
        let modes: Vec<Mode<Matrix6>> = rates
            .iter()
            .map(|&r| {
                let s = log_uniform(rng, 0.1, 10.0);
                Mode::new(r, random_gram(rng, s))
            })
            .collect();
        let newtonian = if rng.gen_bool(0.25) { random_gram(rng, 1.0 / rates[0]) } else { Matrix6::zeros() };
        let equilibrium = if rng.gen_bool(0.5) { random_gram(rng, 1.0) } else { Matrix6::zeros() };
        if let Ok(k) = Relaxation::new_strict(newtonian, equilibrium, modes) {
            return k;
        }
    }
}

/// Largest relative coefficient discrepancy between two scalar kernels of
/// the same kind; infinite when the mode counts differ. Coefficients that
/// are zero in `a` are compared against the total magnitude of `a`.
pub fn scalar_discrepancy(a: &Kernel, b: &Kernel) -> f64 {
    let (sa, ma, sb, mb) = match (a, b) {
        (Kernel::ScalarRelaxation(x), Kernel::ScalarRelaxation(y)) => (
            [x.newtonian(), x.equilibrium()],
            x.modes().to_vec(),
            [y.newtonian(), y.equilibrium()],
            y.modes().to_vec(),
        ),
        (Kernel::ScalarCreep(x), Kernel::ScalarCreep(y)) => (
            [x.instantaneous(), x.fluidity()],
            x.modes().to_vec(),
            [y.instantaneous(), y.fluidity()],
            y.modes().to_vec(),
        ),
        _ => return f64::INFINITY,
    };
    if ma.len() != mb.len() {
        return f64::INFINITY;
    }
    let total = sa.iter().map(|x| x.abs()).sum::<f64>() + ma.iter().map(|m| m.weight).sum::<f64>();
    let rel = |x: f64, y: f64| (x - y).abs() / if x != 0.0 { x.abs() } else { total };
    let mut worst = rel(sa[0], sb[0]).max(rel(sa[1], sb[1]));
    for (p, q) in ma.iter().zip(&mb) {
        worst = worst.max(rel(p.rate, q.rate)).max(rel(p.weight, q.weight));
    }
    worst
}

/// Matrix analogue of [`scalar_discrepancy`], with each coefficient
/// difference measured in the Frobenius norm relative to the kernel scale.
pub fn matrix_discrepancy(a: &Relaxation<Matrix6>, b: &Relaxation<Matrix6>) -> f64 {
    if a.modes().len() != b.modes().len() {
        return f64::INFINITY;
    }
    let scale = a.newtonian().norm() + a.equilibrium().norm() + a.modes().iter().map(|m| m.weight.norm()).sum::<f64>();
    let mut worst = ((a.newtonian() - b.newtonian()).norm() / scale).max((a.equilibrium() - b.equilibrium()).norm() / scale);
    for (p, q) in a.modes().iter().zip(b.modes()) {
        worst = worst.max((p.rate - q.rate).abs() / p.rate);
        worst = worst.max((p.weight - q.weight).norm() / scale);
    }
    worst
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance
/// `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}

/// Coefficients are either clearly rank-deficient or clearly not (no
/// eigenvalue between 1e−12 and 1e−6 of the largest), and `p·R̃(p)` has
/// condition number at most 1e6 on `[1e−3, 1e3]·(max rate)`.
pub fn well_conditioned(k: &Relaxation<Matrix6>) -> bool {
    let clean = |w: &Matrix6| {
        let ev = w.eigenvalues();
        let top = ev.max().abs();
        top == 0.0 || ev.iter().all(|&l| l <= 1e-12 * top || l >= 1e-6 * top)
    };
    if !(clean(&k.newtonian()) && clean(&k.equilibrium()) && k.modes().iter().all(|m| clean(&m.weight))) {
        return false;
    }
    let m = k.max_rate().unwrap_or(1.0);
    log_grid(1e-3 * m, 1e3 * m, 20).into_iter().all(|p| match k.laplace_times_p(p) {
        Ok(z) => {
            let ev = z.eigenvalues();
            ev.min() > 0.0 && ev.max() <= 1e6 * ev.min()
        }
        Err(_) => false,
    })
}
