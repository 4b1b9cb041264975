//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use viscodual::convolution::{convolve_at, ExpSum};
use viscodual::duality::dualize;
use viscodual::eigenstress::assemble_eigenstress;
use viscodual::io::{parse_document, parse_eigenstress, parse_material, serialize_document, serialize_material};
use viscodual::kernel::{Kernel, ScalarCreep, ScalarRelaxation};
use viscodual::pencil::{invert_matrix_cbf, MatrixCbf};
use viscodual::rational::{cbf_as_rational, interlaced_roots, RealPolynomial, ScalarCbf};
use viscodual::verify::{
    check_limit_identities, default_laplace_grid, default_time_grid, duality_residual, laplace_residual, log_grid,
};

const SEED: u64 = 0x5eed_d0a1;

struct Line {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn coefficients(k: &Kernel) -> Vec<f64> {
    match k {
        Kernel::ScalarRelaxation(r) => {
            let mut v = vec![r.newtonian(), r.equilibrium()];
            v.extend(r.modes().iter().flat_map(|m| [m.rate, m.weight]));
            v
        }
        Kernel::ScalarCreep(c) => {
            let mut v = vec![c.instantaneous(), c.fluidity()];
            v.extend(c.modes().iter().flat_map(|m| [m.rate, m.weight]));
            v
        }
        _ => unreachable!("scalar fixtures only"),
    }
}

fn max_abs_diff(a: &Kernel, b: &Kernel) -> f64 {
    if a.kind_name() != b.kind_name() {
        return f64::INFINITY;
    }
    let (x, y) = (coefficients(a), coefficients(b));
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn closed_form_pairs() -> Line {
    let mut worst = 0.0_f64;
    let mut notes = Vec::new();
    for name in ["maxwell", "sls", "dashpot", "two_mode"] {
        let r = parse_material(&common::fixture(&format!("{name}_relaxation.json"))).unwrap();
        let c = parse_material(&common::fixture(&format!("{name}_creep.json"))).unwrap();
        let forward = dualize(&r).map(|d| max_abs_diff(&d, &c)).unwrap_or(f64::INFINITY);
        let backward = dualize(&c).map(|d| max_abs_diff(&d, &r)).unwrap_or(f64::INFINITY);
        let e = forward.max(backward);
        if e > 1e-12 {
            notes.push(format!("{name}={e:.1e}"));
        }
        worst = worst.max(e);
    }
    Line {
        id: 1,
        title: "closed-form pairs",
        passed: worst <= 1e-12,
        detail: format!("max abs coefficient error {worst:.2e} (tol 1e-12) {}", notes.join(" ")),
    }
}

struct ScalarPair {
    original: Kernel,
    dual: Kernel,
}

fn scalar_round_trip(corpus: &[Kernel]) -> (Line, Vec<ScalarPair>) {
    let ((worst, failures, pairs), elapsed) = timed(|| {
        let mut worst = 0.0_f64;
        let mut failures = 0;
        let mut pairs = Vec::new();
        for k in corpus {
            match dualize(k).and_then(|d| dualize(&d).map(|back| (d, back))) {
                Ok((d, back)) => {
                    worst = worst.max(common::scalar_discrepancy(k, &back));
                    pairs.push(ScalarPair { original: k.clone(), dual: d });
                }
                Err(_) => failures += 1,
            }
        }
        (worst, failures, pairs)
    });
    let passed = failures == 0 && worst <= 1e-8 && elapsed < Duration::from_secs(5);
    let line = Line {
        id: 2,
        title: "scalar round trip",
        passed,
        detail: format!(
            "{} kernels, max rel error {worst:.2e} (tol 1e-8), {failures} errors, {:.2}s",
            corpus.len(),
            elapsed.as_secs_f64()
        ),
    };
    (line, pairs)
}

fn convolution_identity(pairs: &[ScalarPair]) -> Line {
    let (worst, elapsed) = timed(|| {
        pairs
            .iter()
            .map(|p| {
                duality_residual(&p.original, &p.dual, &default_time_grid(&p.original, &p.dual)).unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    });
    Line {
        id: 3,
        title: "convolution identity",
        passed: worst <= 1e-9 && elapsed < Duration::from_secs(5),
        detail: format!("max |(R*C)(t)-t|/t {worst:.2e} (tol 1e-9), {:.2}s", elapsed.as_secs_f64()),
    }
}

fn laplace_product(pairs: &[ScalarPair]) -> Line {
    let worst = pairs
        .iter()
        .map(|p| {
            laplace_residual(&p.original, &p.dual, &default_laplace_grid(&p.original, &p.dual)).unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);
    Line {
        id: 4,
        title: "laplace product",
        passed: worst <= 1e-9,
        detail: format!("max |pR(p)pC(p)-1| {worst:.2e} (tol 1e-9)"),
    }
}

fn matrix_suite(rng: &mut ChaCha8Rng) -> (Line, Vec<(Kernel, Kernel)>) {
    let (result, elapsed) = timed(|| {
        let mut round = 0.0_f64;
        let mut conv = 0.0_f64;
        let mut eig = f64::INFINITY;
        let mut failures = 0;
        let mut pairs = Vec::new();
        for _ in 0..100 {
            let k = common::random_matrix_relaxation(rng);
            let spectrum = match invert_matrix_cbf(&MatrixCbf::from_relaxation(&k)) {
                Ok(s) => s,
                Err(_) => {
                    failures += 1;
                    continue;
                }
            };
            eig = eig.min(spectrum.min_relative_eigenvalue);
            let kernel = Kernel::MatrixRelaxation(k.clone());
            let outcome = dualize(&kernel).and_then(|c| dualize(&c).map(|back| (c, back)));
            match outcome {
                Ok((c, Kernel::MatrixRelaxation(back))) => {
                    round = round.max(common::matrix_discrepancy(&k, &back));
                    conv = conv.max(duality_residual(&kernel, &c, &default_time_grid(&kernel, &c)).unwrap_or(f64::INFINITY));
                    pairs.push((kernel, c));
                }
                _ => failures += 1,
            }
        }
        (round, conv, eig, failures, pairs)
    });
    let (round, conv, eig, failures, pairs) = result;
    let passed = failures == 0 && round <= 1e-6 && conv <= 1e-7 && eig >= -1e-10 && elapsed < Duration::from_secs(60);
    let line = Line {
        id: 5,
        title: "matrix suite",
        passed,
        detail: format!(
            "100 kernels, round trip {round:.2e} (tol 1e-6), convolution {conv:.2e} (tol 1e-7), \
             min residue eig/scale {eig:.2e} (tol -1e-10), {failures} errors, {:.2}s",
            elapsed.as_secs_f64()
        ),
    };
    (line, pairs)
}

fn limit_clauses(scalar: &[ScalarPair], matrix: &[(Kernel, Kernel)]) -> Line {
    let mut clauses = 0;
    let mut failed = Vec::new();
    let all = scalar.iter().map(|p| (&p.original, &p.dual)).chain(matrix.iter().map(|(a, b)| (a, b)));
    for (i, (a, b)) in all.enumerate() {
        match check_limit_identities(a, b, 1e-8) {
            Ok(report) => {
                clauses += report.entries.len();
                for f in report.failures() {
                    failed.push(format!("#{i} {} ({:.1e})", f.name, f.residual));
                }
            }
            Err(e) => failed.push(format!("#{i} {e}")),
        }
    }
    let shown: Vec<&String> = failed.iter().take(3).collect();
    Line {
        id: 6,
        title: "limit clauses",
        passed: failed.is_empty(),
        detail: format!("{clauses} clauses checked, {} failed {shown:?}", failed.len()),
    }
}

/// Checks that `roots` and `rates` alternate as the bracket structure
/// requires: one root below the first rate iff `c0 > 0`, one in every gap,
/// one above the last rate iff `c1 > 0`.
fn alternates(cbf: &ScalarCbf, roots: &[f64]) -> bool {
    let rates = cbf.rates();
    let mut expected: Vec<(f64, f64)> = Vec::new();
    if rates.is_empty() {
        if cbf.constant > 0.0 && cbf.slope > 0.0 {
            expected.push((0.0, f64::INFINITY));
        }
    } else {
        if cbf.constant > 0.0 {
            expected.push((0.0, rates[0]));
        }
        expected.extend(rates.windows(2).map(|w| (w[0], w[1])));
        if cbf.slope > 0.0 {
            expected.push((rates[rates.len() - 1], f64::INFINITY));
        }
    }
    expected.len() == roots.len() && expected.iter().zip(roots).all(|(&(lo, hi), &s)| lo < s && s < hi)
}

/// Roots of `N(p)` from the companion matrix, as positive `s = −p`, with
/// the trivial root at `p = 0` removed. Returns the largest imaginary part
/// relative to modulus alongside.
fn oracle_roots(cbf: &ScalarCbf) -> (Vec<f64>, f64) {
    let (numerator, _) = cbf_as_rational(cbf);
    let mut coeffs = numerator.coeffs().to_vec();
    while coeffs.first() == Some(&0.0) {
        coeffs.remove(0);
    }
    let poly = RealPolynomial::new(coeffs);
    let rates = cbf.rates();
    let scale = if rates.is_empty() { 1.0 } else { (rates.iter().map(|r| r.ln()).sum::<f64>() / rates.len() as f64).exp() };
    let raw = poly.companion_roots(scale);
    let imag = raw.iter().map(|&(re, im)| im.abs() / re.hypot(im)).fold(0.0, f64::max);
    let mut roots: Vec<f64> = raw.iter().map(|&(re, _)| -re).collect();
    roots.sort_by(f64::total_cmp);
    // Newton polish on the polynomial itself.
    let d = poly.derivative();
    for s in roots.iter_mut() {
        for _ in 0..3 {
            let p = -*s;
            let step = poly.eval(p) / d.eval(p);
            if step.is_finite() {
                *s += step;
            }
        }
    }
    (roots, imag)
}

fn interlacing(corpus: &[Kernel]) -> Line {
    let mut count_fail = 0;
    let mut alt_fail = 0;
    let mut worst = 0.0_f64;
    let mut worst_imag = 0.0_f64;
    for k in corpus {
        let cbf = match k {
            Kernel::ScalarRelaxation(r) => ScalarCbf::from_relaxation(r),
            Kernel::ScalarCreep(c) => ScalarCbf::from_creep(c),
            _ => continue,
        };
        let roots = match interlaced_roots(&cbf) {
            Ok(r) => r,
            Err(_) => {
                count_fail += 1;
                continue;
            }
        };
        if roots.len() != cbf.expected_root_count() {
            count_fail += 1;
        }
        if !alternates(&cbf, &roots) {
            alt_fail += 1;
        }
        let (oracle, imag) = oracle_roots(&cbf);
        worst_imag = worst_imag.max(imag);
        if oracle.len() != roots.len() {
            count_fail += 1;
            continue;
        }
        for (a, b) in roots.iter().zip(&oracle) {
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    Line {
        id: 7,
        title: "interlacing and count law",
        passed: count_fail == 0 && alt_fail == 0 && worst <= 1e-9,
        detail: format!(
            "{} kernels, {count_fail} count failures, {alt_fail} alternation failures, \
             max rel root error vs companion {worst:.2e} (tol 1e-9), max companion imag/|z| {worst_imag:.1e}",
            corpus.len()
        ),
    }
}

fn quadrature_oracle(rng: &mut ChaCha8Rng) -> Line {
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let r: ScalarRelaxation = common::random_scalar_relaxation(rng);
        let c: ScalarCreep = common::random_scalar_creep(rng);
        let f = ExpSum::from_relaxation(&r);
        let g = ExpSum::from_creep(&c);
        let m = r.max_rate().unwrap_or(1.0).max(c.max_rate().unwrap_or(1.0));
        for t in log_grid(1e-2 / m, 1e2 / m, 7) {
            let closed = convolve_at(&f, &g, t);
            let integrand = |u: f64| f.eval(t - u) * g.eval(u);
            let reference = common::adaptive_simpson(&integrand, 0.0, t, 1e-13 * closed.abs().max(t));
            worst = worst.max((closed - reference).abs() / reference.abs().max(f64::MIN_POSITIVE));
        }
    }
    Line {
        id: 8,
        title: "quadrature oracle",
        passed: worst <= 1e-6,
        detail: format!("5 kernel pairs x 7 times, max rel difference {worst:.2e} (tol 1e-6)"),
    }
}

fn io_determinism(scalar: &[Kernel], matrix: &[(Kernel, Kernel)]) -> Line {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, text) in common::material_fixtures() {
        checked += 1;
        let ok = parse_document(&text).ok().and_then(|doc| {
            let once = serialize_document(&doc);
            let again = parse_document(&once).ok()?;
            (again == doc && serialize_document(&again) == once).then_some(())
        });
        if ok.is_none() {
            failures.push(name);
        }
    }
    if let Ok((basis, eq)) = parse_eigenstress(&common::fixture("eigenstress_basis.json")) {
        checked += 1;
        let a = assemble_eigenstress(&basis, eq).map(|k| serialize_material(&Kernel::MatrixRelaxation(k)));
        let b = assemble_eigenstress(&basis, eq).map(|k| serialize_material(&Kernel::MatrixRelaxation(k)));
        let stable = matches!((&a, &b), (Ok(x), Ok(y)) if x == y && serialize_material(&parse_material(x).unwrap()) == *x);
        if !stable {
            failures.push("eigenstress_basis.json".into());
        }
    } else {
        failures.push("eigenstress_basis.json".into());
    }
    let generated = scalar.iter().chain(matrix.iter().flat_map(|(a, b)| [a, b]));
    for (i, k) in generated.enumerate() {
        checked += 1;
        let text = serialize_material(k);
        let ok = parse_material(&text).map(|back| back == *k && serialize_material(&back) == text).unwrap_or(false);
        if !ok {
            failures.push(format!("generated #{i}"));
        }
    }
    Line {
        id: 9,
        title: "io determinism",
        passed: failures.is_empty(),
        detail: format!("{checked} documents, {} unstable {:?}", failures.len(), failures.iter().take(3).collect::<Vec<_>>()),
    }
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let corpus = common::scalar_corpus(&mut rng, 500);

    let mut lines = vec![closed_form_pairs()];
    let (round, pairs) = scalar_round_trip(&corpus);
    lines.push(round);
    lines.push(convolution_identity(&pairs));
    lines.push(laplace_product(&pairs));
    let (matrix, matrix_pairs) = matrix_suite(&mut rng);
    lines.push(matrix);
    lines.push(limit_clauses(&pairs, &matrix_pairs));
    lines.push(interlacing(&corpus));
    lines.push(quadrature_oracle(&mut rng));
    let duals: Vec<Kernel> = corpus.iter().cloned().chain(pairs.iter().map(|p| p.dual.clone())).collect();
    lines.push(io_determinism(&duals, &matrix_pairs));

    for l in &lines {
        println!("criterion {} {} {}: {}", l.id, if l.passed { "PASS" } else { "FAIL" }, l.title, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("acceptance: {} of {} criteria passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
