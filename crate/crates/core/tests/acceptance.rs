//! End-to-end acceptance suite: one pass/fail line per criterion.
//!
//! Statistical checks run against fixed seeds; Monte Carlo estimates used in
//! any criterion are re-run with 1 and 8 workers and their raw counts compared
//! bit-for-bit (criterion 11).

use std::sync::Mutex;
use std::time::Instant;

use race_core::analytics::{
    bound_value, delta2_quadrature, firstk_transform, leader_conditional_product,
    ncr2_conditional_integral, near_identity_analysis, phi_power_integral, random_near_identity,
    BoundSpec,
};
use race_core::characters::CharacterTable;
use race_core::covariance::{correlation_matrix, shift_vector};
use race_core::linalg::{symmetric_eigenvalues, Lu, Matrix};
use race_core::rng::CounterRng;
use race_core::sampler::{
    mc_event_probability, DensityEstimate, EventOutcome, Model, OrderingEvent, XSampler, ZSampler,
};
use race_core::sieve::exact_log_density;
use race_core::special::{ln_phi, phi_cdf};
use race_core::zeros::ZeroSet;
use rand::Rng;
use rand_distr::StandardNormal;

/// Records MC determinism outcomes observed across the suite for criterion 11.
static DETERMINISM: Mutex<Vec<(String, bool)>> = Mutex::new(Vec::new());

/// Run an MC estimate with 1 worker and 8 workers; record whether the raw
/// counts were identical and return the single-worker estimate.
fn mc_both_worker_counts(
    label: &str,
    model: &Model,
    event: &OrderingEvent,
    samples: u64,
    seed: u64,
) -> DensityEstimate {
    let a = mc_event_probability(model, event, samples, seed, 1).expect("mc");
    let b = mc_event_probability(model, event, samples, seed, 8).expect("mc");
    let same = a.hits == b.hits && a.ties == b.ties;
    DETERMINISM
        .lock()
        .unwrap()
        .push((label.to_string(), same));
    a
}

struct Suite {
    lines: Vec<String>,
    all_pass: bool,
}

impl Suite {
    fn new() -> Self {
        Suite {
            lines: Vec::new(),
            all_pass: true,
        }
    }

    fn record(&mut self, id: u32, desc: &str, pass: bool, detail: String, started: Instant) {
        let status = if pass { "PASS" } else { "FAIL" };
        let line = format!(
            "criterion {id:2}: {status} [{:6.1}s] {desc} — {detail}",
            started.elapsed().as_secs_f64()
        );
        println!("{line}");
        self.lines.push(line);
        self.all_pass &= pass;
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn criterion_1(suite: &mut Suite) {
    let t = Instant::now();
    let samples = 10_000_000u64;
    let mut pass = true;
    let mut detail = String::new();

    // n = 4 independent, full ordering
    let s4 = ZSampler::new(&Matrix::identity(4), None).unwrap();
    let e = mc_both_worker_counts(
        "c1 full n=4 indep",
        &Model::Z(&s4),
        &OrderingEvent::FullOrdering(vec![0, 1, 2, 3]),
        samples,
        101,
    );
    pass &= within(e.value, 1.0 / 24.0, 4.0 * e.stderr);
    detail.push_str(&format!("full4 {:.6}±{:.6} ", e.value, e.stderr));

    // n = 100 independent, leader
    let s100 = ZSampler::new(&Matrix::identity(100), None).unwrap();
    let e = mc_both_worker_counts(
        "c1 leader n=100 indep",
        &Model::Z(&s100),
        &OrderingEvent::Leader(0),
        samples,
        102,
    );
    pass &= within(e.value, 0.01, 4.0 * e.stderr);
    detail.push_str(&format!("leader100 {:.6}±{:.6} ", e.value, e.stderr));

    // n = 4 equicorrelated rho = 0.3, exchangeability forces 1/24
    let mut r = Matrix::identity(4);
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                r[(i, j)] = 0.3;
            }
        }
    }
    let seq = ZSampler::new(&r, None).unwrap();
    let e = mc_both_worker_counts(
        "c1 full n=4 equicorr",
        &Model::Z(&seq),
        &OrderingEvent::FullOrdering(vec![0, 1, 2, 3]),
        samples,
        103,
    );
    pass &= within(e.value, 1.0 / 24.0, 4.0 * e.stderr);
    detail.push_str(&format!("equi4 {:.6}±{:.6}", e.value, e.stderr));

    suite.record(1, "Z-model symmetry suite (1e7 samples)", pass, detail, t);
}

fn criterion_2(suite: &mut Suite) {
    let t = Instant::now();
    let n = 50usize;
    let a = random_near_identity(n, 0.02, 20260824);
    let sampler = ZSampler::new(&a.entries, None).unwrap();
    let e = mc_both_worker_counts(
        "c2 leader n=50 weak corr",
        &Model::Z(&sampler),
        &OrderingEvent::Leader(0),
        100_000_000,
        2,
    );
    let r1_abs_sum: f64 = (1..n).map(|i| a.entries[(0, i)].abs()).sum();
    let rij_abs_sum: f64 = (1..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| a.entries[(i, j)].abs())
        .sum();
    let bound = bound_value(
        &BoundSpec::ProbLeader {
            n: n as u64,
            r1_abs_sum,
            rij_abs_sum,
        },
        1.0,
    )
    .value;
    let tol = (4.0 * e.stderr).max(10.0 * bound);
    let pass = within(e.value, 1.0 / 50.0, tol);
    suite.record(
        2,
        "weakly-correlated leader matches 1/n (1e8 samples)",
        pass,
        format!(
            "value {:.7} target 0.02 tol {tol:.2e} (stderr {:.1e}, bound {bound:.1e})",
            e.value, e.stderr
        ),
        t,
    );
}

fn criterion_3(suite: &mut Suite) {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    // One-factor correlations r_ij = r_i r_j make coordinates conditionally
    // independent given X_1, so the product formula is exact; check it
    // against direct conditional sampling.
    let rs = [0.3f64, 0.2, 0.1, -0.15, 0.25];
    let x = 0.8;
    let predicted = leader_conditional_product(&rs, x).unwrap();
    let samples = 2_000_000u64;
    let mut rng = CounterRng::new(31, 0);
    let mut hits = 0u64;
    for _ in 0..samples {
        let ok = rs.iter().all(|&r| {
            let g: f64 = rng.sample(StandardNormal);
            r * x + (1.0 - r * r).sqrt() * g < x
        });
        hits += ok as u64;
    }
    let mc = hits as f64 / samples as f64;
    let se = (mc * (1.0 - mc) / samples as f64).sqrt();
    pass &= within(mc, predicted, 4.0 * se);
    detail.push_str(&format!("leader prod {predicted:.6} mc {mc:.6}±{se:.6}; "));

    // First-k transform vs the Schur-complement conditional law on a random
    // member of M_8(1/32).
    let n = 8usize;
    let k = 3usize;
    let xs = [1.0f64, 0.5, 0.2];
    let a = random_near_identity(n, 1.0 / (4.0 * n as f64), 32);
    let tr = firstk_transform(&a.entries, k, &xs).unwrap();
    // Route A: residual correlations + thresholds from the transform.
    let res_sampler = ZSampler::new(&tr.residual_corr, None).unwrap();
    let m = n - k;
    let mut rng_a = CounterRng::new(33, 0);
    let mut scratch = vec![0.0; m];
    let mut out = vec![0.0; m];
    let mut hits_a = 0u64;
    for _ in 0..samples {
        res_sampler.sample(&mut rng_a, &mut scratch, &mut out);
        hits_a += out.iter().zip(&tr.w).all(|(v, w)| v < w) as u64;
    }
    // Route B: independent conditional covariance via LU Schur complement.
    let block = Matrix::from_fn(k, k, |i, j| a.entries[(i, j)]);
    let lu = Lu::new(&block).unwrap();
    let mut cond_mean = vec![0.0; m];
    let mut coeffs = Vec::with_capacity(m);
    for i in 0..m {
        let rhs: Vec<f64> = (0..k).map(|l| a.entries[(k + i, l)]).collect();
        let c = lu.solve(&rhs);
        cond_mean[i] = (0..k).map(|l| c[l] * xs[l]).sum();
        coeffs.push(c);
    }
    let cond_cov = Matrix::from_fn(m, m, |i, j| {
        a.entries[(k + i, k + j)]
            - (0..k).map(|l| coeffs[i][l] * a.entries[(k + j, l)]).sum::<f64>()
    });
    let cond_sampler = ZSampler::new(&cond_cov, Some(cond_mean)).unwrap();
    let mut rng_b = CounterRng::new(34, 0);
    let mut hits_b = 0u64;
    for _ in 0..samples {
        cond_sampler.sample(&mut rng_b, &mut scratch, &mut out);
        hits_b += out.iter().all(|&v| v < xs[k - 1]) as u64;
    }
    let pa = hits_a as f64 / samples as f64;
    let pb = hits_b as f64 / samples as f64;
    let se_ab = ((pa * (1.0 - pa) + pb * (1.0 - pb)) / samples as f64).sqrt();
    pass &= within(pa, pb, 4.0 * se_ab);
    detail.push_str(&format!("firstk routes {pa:.6} vs {pb:.6} ±{se_ab:.6}"));

    suite.record(3, "conditioning transforms vs conditional-MC oracles", pass, detail, t);
}

fn criterion_4(suite: &mut Suite) {
    let t = Instant::now();
    let mut pass = true;
    let mut worst_det: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    let mut worst_consistency: f64 = 0.0;
    for n in [4usize, 16, 64] {
        for trial in 0..500u64 {
            let a = random_near_identity(n, 1.0 / (2.0 * n as f64), 40_000 + trial * 3 + n as u64);
            let rep = near_identity_analysis(&a).unwrap();
            worst_det = worst_det.max(rep.det_bound_ratio);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        worst_inv = worst_inv.max(rep.inv_offdiag_ratios[(i, j)]);
                    }
                }
            }
            let prod = a.entries.mul(&rep.inv_exact);
            for i in 0..n {
                for j in 0..n {
                    let target = (i == j) as u64 as f64;
                    worst_consistency = worst_consistency.max((prod[(i, j)] - target).abs());
                }
            }
        }
    }
    pass &= worst_det <= 3.0;
    pass &= worst_inv <= 10.0;
    pass &= worst_consistency <= 1e-9;
    suite.record(
        4,
        "near-identity matrix suite (1500 matrices vs LU oracle)",
        pass,
        format!(
            "max det ratio {worst_det:.3}, max inv ratio {worst_inv:.3}, max |A A^-1 - I| {worst_consistency:.2e}"
        ),
        t,
    );
}

fn criterion_5(suite: &mut Suite) {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    for n in [2u64, 10, 100] {
        pass &= within(phi_power_integral(n, f64::NEG_INFINITY), 1.0 / n as f64, 1e-10);
    }
    detail.push_str("phi_power 1/n ok; ");

    // independence limit of the equicorrelated integral
    let v = ncr2_conditional_integral(5, 1e-8, 1.0).unwrap();
    pass &= within(v, phi_cdf(1.0).powi(5), 1e-6);

    // MC agreement: W_i = sqrt(eps) Z_0 + sqrt(1-eps) Z_i
    let (n, eps, a) = (5usize, 0.1f64, 1.0f64);
    let quad = ncr2_conditional_integral(n as u64, eps, a).unwrap();
    let samples = 2_000_000u64;
    let mut rng = CounterRng::new(51, 0);
    let mut hits = 0u64;
    for _ in 0..samples {
        let z0: f64 = rng.sample(StandardNormal);
        let common = eps.sqrt() * z0;
        let ok = (0..n).all(|_| {
            let zi: f64 = rng.sample(StandardNormal);
            common + (1.0 - eps).sqrt() * zi <= a
        });
        hits += ok as u64;
    }
    let mc = hits as f64 / samples as f64;
    let se = (mc * (1.0 - mc) / samples as f64).sqrt();
    pass &= within(mc, quad, 4.0 * se);
    detail.push_str(&format!("ncr2 quad {quad:.6} mc {mc:.6}±{se:.6}; "));

    let mut worst = 0.0f64;
    for n in [3u64, 10, 100] {
        let nf = n as f64;
        let v = delta2_quadrature(0.0, n).unwrap();
        worst = worst.max((v * nf * (nf - 1.0) - 1.0).abs());
    }
    pass &= worst <= 1e-4;
    detail.push_str(&format!("delta2 indep defect {worst:.2e}"));

    suite.record(5, "quadrature identities and MC cross-check", pass, detail, t);
}

fn criterion_6(suite: &mut Suite) {
    let t = Instant::now();
    let mut pass = true;

    let v_neg = delta2_quadrature(-0.1, 200).unwrap() * 200.0 * 199.0;
    pass &= v_neg < 1.0;
    let v_pos = delta2_quadrature(0.1, 20).unwrap();
    pass &= v_pos * 380.0 > 1.0;

    // MC oracle at n = 20, r12 = +0.1: P(Z_1 > Z_2 > rest) via FirstK(2)
    let mut r = Matrix::identity(20);
    r[(0, 1)] = 0.1;
    r[(1, 0)] = 0.1;
    let sampler = ZSampler::new(&r, None).unwrap();
    let e = mc_both_worker_counts(
        "c6 delta2 n=20 r=+0.1",
        &Model::Z(&sampler),
        &OrderingEvent::FirstK(2),
        100_000_000,
        6,
    );
    pass &= within(e.value, v_pos, 5.0 * e.stderr);

    suite.record(
        6,
        "two-coordinate bias directions (quadrature + 1e8-sample MC oracle)",
        pass,
        format!(
            "neg scaled {v_neg:.5} (<1), pos scaled {:.5} (>1), mc {:.7}±{:.7} vs quad {v_pos:.7}",
            v_pos * 380.0,
            e.value,
            e.stderr
        ),
        t,
    );
}

fn criterion_7(suite: &mut Suite) {
    let t = Instant::now();
    let q = 8u64;
    let table = CharacterTable::new(q).unwrap();
    let zs = ZeroSet::synthesize(&table, 200, 11).unwrap();
    let residues = [1u64, 3, 5, 7];
    let shifts = shift_vector(q, &residues).unwrap();
    let xs = XSampler::new(&zs, &table, &shifts, true).unwrap();
    let cm = correlation_matrix(&zs, &table, &residues).unwrap();
    let zsamp = ZSampler::from_correlation(&cm, Some(xs.means().to_vec())).unwrap();
    let event = OrderingEvent::FullOrdering(vec![0, 1, 2, 3]);
    let samples = 10_000_000u64;
    let ex = mc_both_worker_counts("c7 x-model", &Model::X(&xs), &event, samples, 7);
    let ez = mc_both_worker_counts("c7 z-model", &Model::Z(&zsamp), &event, samples, 77);
    let combined = (ex.stderr * ex.stderr + ez.stderr * ez.stderr).sqrt();
    let pass = within(ex.value, ez.value, 5.0 * combined);
    suite.record(
        7,
        "X-model vs Z-model ordering agreement (q=8, 200 zeros/char, 1e7 samples)",
        pass,
        format!(
            "x {:.6}±{:.6} z {:.6}±{:.6} diff {:.2e} tol {:.2e}",
            ex.value,
            ex.stderr,
            ez.value,
            ez.stderr,
            (ex.value - ez.value).abs(),
            5.0 * combined
        ),
        t,
    );
}

/// Per-integer scan oracle: indicator at every integer t, mass log((t+1)/t).
fn brute_force_measure(q: u64, residues: &[u64], event: &OrderingEvent, x_max: u64) -> f64 {
    let mut counts = vec![0u64; residues.len()];
    let mut values = vec![0.0f64; residues.len()];
    let mut measure = 0.0;
    for t in 2..x_max {
        if race_core::arith::is_prime(t) {
            let r = t % q;
            if let Some(i) = residues.iter().position(|&a| a == r) {
                counts[i] += 1;
            }
        }
        for (i, &c) in counts.iter().enumerate() {
            values[i] = c as f64;
        }
        if event.evaluate(&values) == EventOutcome::Holds {
            measure += ((t + 1) as f64 / t as f64).ln();
        }
    }
    measure
}

fn criterion_8(suite: &mut Suite) {
    let t = Instant::now();
    let mut pass = true;
    let mut worst = 0.0f64;

    let mut rng = CounterRng::new(808, 0);
    let qs = [3u64, 4, 5, 7, 8, 11, 12, 15, 21, 24, 30];
    for _ in 0..20 {
        let q = qs[(rng.next() % qs.len() as u64) as usize];
        let units: Vec<u64> = (1..q).filter(|&a| race_core::arith::gcd(a, q) == 1).collect();
        let n = (2 + rng.next() % 3).min(units.len() as u64) as usize;
        let mut pool = units.clone();
        for i in 0..n {
            let j = i + (rng.next() as usize) % (pool.len() - i);
            pool.swap(i, j);
        }
        pool.truncate(n);
        let event = match rng.next() % 3 {
            0 => OrderingEvent::FullOrdering({
                let mut p: Vec<usize> = (0..n).collect();
                for i in 0..n {
                    let j = i + (rng.next() as usize) % (n - i);
                    p.swap(i, j);
                }
                p
            }),
            1 => OrderingEvent::Leader((rng.next() as usize) % n),
            _ => OrderingEvent::FirstK(1 + (rng.next() as usize) % n.min(2)),
        };
        let r = exact_log_density(q, &pool, &event, 100_000).unwrap();
        let oracle = brute_force_measure(q, &pool, &event, 100_000);
        worst = worst.max((r.measure - oracle).abs());
    }
    pass &= worst <= 1e-9;

    // permutation-partition identity at n = 2
    let x = 100_000u64;
    let ab = exact_log_density(4, &[3, 1], &OrderingEvent::FullOrdering(vec![0, 1]), x).unwrap();
    let ba = exact_log_density(4, &[3, 1], &OrderingEvent::FullOrdering(vec![1, 0]), x).unwrap();
    let part = ab.measure + ba.measure + ab.tie_measure;
    pass &= (part - (x as f64 / 2.0).ln()).abs() <= 1e-9;

    // Chebyshev bias over [2, 1e7]
    let bias =
        exact_log_density(4, &[3, 1], &OrderingEvent::FullOrdering(vec![0, 1]), 10_000_000)
            .unwrap();
    pass &= bias.density > 0.9;

    suite.record(
        8,
        "sieve exactness vs per-integer oracle; partition identity; mod-4 bias",
        pass,
        format!(
            "max oracle diff {worst:.2e}, partition defect {:.2e}, bias density {:.4}",
            (part - (x as f64 / 2.0).ln()).abs(),
            bias.density
        ),
        t,
    );
}

/// Double-double (compensated two-sum) accumulator used as the extended
/// precision summation oracle.
#[derive(Clone, Copy, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn add(&mut self, v: f64) {
        let s = self.hi + v;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (v - bb);
        self.hi = s;
        self.lo += err;
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

fn m1_oracle(q: u64, a: u64, d: u64) -> f64 {
    let qf = q as f64;
    let x = (qf * qf.ln()).powi(2);
    let limit = (2.0 * x * x.ln()).floor() as u64;
    let n0 = d % q * race_core::arith::mod_inv(a % q, q) % q;
    let mut acc = DoubleDouble::default();
    let mut n = if n0 == 0 { q } else { n0 };
    while n <= limit {
        let lam = race_core::arith::von_mangoldt(n);
        if lam != 0.0 {
            acc.add(lam / n as f64 * (-(n as f64) / x).exp());
        }
        n += q;
    }
    acc.value()
}

fn m2_oracle(q: u64, a: u64, d: u64) -> f64 {
    let qf = q as f64;
    let x = (qf * qf.ln()).powi(2);
    let emax = (2.0 * x.ln()).floor() as u32;
    let mut acc = DoubleDouble::default();
    for (p, nu) in race_core::arith::factorize(q) {
        let q_rest = q / p.pow(nu);
        let lp = (p as f64).ln();
        for e in 1..=emax {
            let matches = q_rest == 1
                || a % q_rest * race_core::arith::mod_pow(p, e as u64, q_rest) % q_rest
                    == d % q_rest;
            if matches {
                acc.add(lp / ((p as f64).powi((e + nu - 1) as i32) * (p - 1) as f64));
            }
        }
    }
    acc.value()
}

fn criterion_9(suite: &mut Suite) {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    // q = 4: the single character forces r(1,3) = -1 exactly
    let table4 = CharacterTable::new(4).unwrap();
    for seed in [1u64, 2, 3] {
        let zs = ZeroSet::synthesize(&table4, 50 + seed as usize * 37, seed).unwrap();
        let cm = correlation_matrix(&zs, &table4, &[1, 3]).unwrap();
        pass &= cm.r[(0, 1)] == -1.0;
    }
    detail.push_str("q=4 r=-1 exact; ");

    // PSD of 20 random synthetic configurations
    let mut rng = CounterRng::new(909, 0);
    let qs = [5u64, 7, 8, 11, 12, 13, 15, 16, 21, 24];
    let mut min_eig = f64::INFINITY;
    for trial in 0..20u64 {
        let q = qs[(rng.next() % qs.len() as u64) as usize];
        let table = CharacterTable::new(q).unwrap();
        let units: Vec<u64> = table.units().to_vec();
        let n = (2 + rng.next() % 3).min(units.len() as u64) as usize;
        let mut pool = units;
        for i in 0..n {
            let j = i + (rng.next() as usize) % (pool.len() - i);
            pool.swap(i, j);
        }
        pool.truncate(n);
        let zs = ZeroSet::synthesize(&table, 60, 7000 + trial).unwrap();
        let cm = correlation_matrix(&zs, &table, &pool).unwrap();
        for e in symmetric_eigenvalues(&cm.r) {
            min_eig = min_eig.min(e);
        }
    }
    pass &= min_eig >= -1e-8;
    detail.push_str(&format!("min eig {min_eig:.2e}; "));

    // m1/m2/lambda vs extended-precision oracles
    let cases = [
        (3u64, 1u64, 2u64),
        (4, 1, 3),
        (5, 2, 3),
        (12, 5, 7),
        (35, 2, 9),
        (49, 3, 5),
        (50, 3, 7),
    ];
    let mut worst_rel = 0.0f64;
    for (q, a, d) in cases {
        let m1 = race_core::covariance::m1_sum(q, a, d).unwrap();
        let o1 = m1_oracle(q, a, d);
        if o1 != 0.0 {
            worst_rel = worst_rel.max(((m1 - o1) / o1).abs());
        }
        let m2 = race_core::covariance::m2_sum(q, a, d).unwrap();
        let o2 = m2_oracle(q, a, d);
        if o2 != 0.0 {
            worst_rel = worst_rel.max(((m2 - o2) / o2).abs());
        }
        let lt = race_core::covariance::lambda_term(q, a, d).unwrap();
        let m = q / race_core::arith::gcd(q, (a + q - d) % q);
        let lo = if m == 1 {
            0.0
        } else {
            race_core::arith::von_mangoldt(m) / race_core::arith::euler_phi(m) as f64
        };
        if lo != 0.0 {
            worst_rel = worst_rel.max(((lt - lo) / lo).abs());
        }
    }
    pass &= worst_rel <= 1e-10;
    detail.push_str(&format!("max m-sum rel err {worst_rel:.2e}"));

    suite.record(9, "covariance ground truths and extended-precision sums", pass, detail, t);
}

fn criterion_10(suite: &mut Suite) {
    let t = Instant::now();
    let mut pass = true;

    let v = race_core::harmonic::g_function(0.5, 3, 100.0).unwrap();
    pass &= (v - 2f64.ln() / 2.0).abs() <= 1e-12;
    let v = race_core::harmonic::g_function(0.0, 4, 1e6).unwrap();
    pass &= (v - (2f64.ln() / 2.0 + 3f64.ln() / 3.0 + 2f64.ln() / 4.0)).abs() <= 1e-12;

    let mut rng = CounterRng::new(1010, 0);
    let mut worst_ratio = 0.0f64;
    for _ in 0..20 {
        let r = 5 + (rng.next() % 26) as usize;
        let s = 5 + (rng.next() % 26) as usize;
        let big_q = 10 + rng.next() % 41;
        let x = 1e5;
        let mk = |count: usize, rng: &mut CounterRng| {
            let pts: Vec<f64> = (0..count)
                .map(|i| (i as f64 + 0.4 * rng.uniform()) / count as f64)
                .collect();
            race_core::harmonic::SpacedPoints::new(pts, x).unwrap()
        };
        let thetas = mk(r, &mut rng);
        let phis = mk(s, &mut rng);
        let rep = race_core::harmonic::pair_sum_report(&thetas, &phis, big_q, x).unwrap();
        worst_ratio = worst_ratio.max(rep.ratio);
    }
    pass &= worst_ratio <= 5.0;

    suite.record(
        10,
        "harmonic hand values and 20-configuration pair-sum ratios",
        pass,
        format!("max pair-sum ratio {worst_ratio:.3}"),
        t,
    );
}

fn criterion_11(suite: &mut Suite) {
    let t = Instant::now();
    let results = DETERMINISM.lock().unwrap();
    let pass = !results.is_empty() && results.iter().all(|(_, ok)| *ok);
    let detail = results
        .iter()
        .map(|(label, ok)| format!("{label}:{}", if *ok { "ok" } else { "MISMATCH" }))
        .collect::<Vec<_>>()
        .join(", ");
    suite.record(
        11,
        "MC determinism across worker counts (1 vs 8)",
        pass,
        detail,
        t,
    );
}

#[test]
fn acceptance_criteria() {
    // deep-tail helper referenced by several criteria must be loaded and sane
    assert!(ln_phi(-50.0) < -1000.0);
    let mut suite = Suite::new();
    criterion_1(&mut suite);
    criterion_2(&mut suite);
    criterion_3(&mut suite);
    criterion_4(&mut suite);
    criterion_5(&mut suite);
    criterion_6(&mut suite);
    criterion_7(&mut suite);
    criterion_8(&mut suite);
    criterion_9(&mut suite);
    criterion_10(&mut suite);
    criterion_11(&mut suite);
    println!("\n==== acceptance summary ====");
    for line in &suite.lines {
        println!("{line}");
    }
    assert!(suite.all_pass, "one or more acceptance criteria failed");
}
