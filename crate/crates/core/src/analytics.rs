//! Deterministic numerics: near-identity matrix analysis against the exact LU
//! oracle, Gaussian density, the Phi toolkit and quadratures, conditioning
//! transforms, error-bound evaluators, the biased tuple construction, and the
//! two-correlated-coordinate ordering quadrature.

use crate::arith::{gcd, is_prime, is_unit};
use crate::error::{RaceError, Result};
use crate::linalg::{Cholesky, Lu, Matrix};
use crate::quad;
use crate::rng::CounterRng;
use crate::special::ln_phi;

/// Symmetric matrix with unit diagonal and small off-diagonal entries.
#[derive(Clone, Debug)]
pub struct NearIdentityMatrix {
    pub entries: Matrix,
    /// max abs off-diagonal entry
    pub epsilon: f64,
}

impl NearIdentityMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(RaceError::Domain("matrix must be square".into()));
        }
        let n = entries.rows();
        for i in 0..n {
            if entries[(i, i)] != 1.0 {
                return Err(RaceError::Domain(format!(
                    "diagonal entry ({i},{i}) must be exactly 1"
                )));
            }
        }
        if entries.symmetry_defect() != 0.0 {
            return Err(RaceError::Domain("matrix must be symmetric".into()));
        }
        let epsilon = entries.max_abs_offdiag();
        Ok(NearIdentityMatrix { entries, epsilon })
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    /// Whether the hypothesis epsilon <= 1/(2n) for the quoted bounds holds.
    pub fn in_quotable_class(&self) -> bool {
        self.epsilon <= 1.0 / (2.0 * self.n() as f64)
    }
}

/// Uniform off-diagonal entries in [-eps, eps], symmetrized, unit diagonal.
pub fn random_near_identity(n: usize, eps: f64, seed: u64) -> NearIdentityMatrix {
    let mut rng = CounterRng::new(seed, 0);
    let mut m = Matrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = eps * (2.0 * rng.uniform() - 1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    NearIdentityMatrix::new(m).expect("construction is valid by design")
}

#[derive(Clone, Debug)]
pub struct NearIdentityReport {
    pub det_exact: f64,
    pub inv_exact: Matrix,
    /// |det - 1| / (eps * sum of |offdiag|); 0 when both vanish
    pub det_bound_ratio: f64,
    /// per off-diagonal entry: |inv_jk| over its predicted size; 0 on the diagonal
    pub inv_offdiag_ratios: Matrix,
}

/// Exact determinant and inverse by LU, reported against the perturbative
/// predictions for near-identity matrices.
pub fn near_identity_analysis(a: &NearIdentityMatrix) -> Result<NearIdentityReport> {
    let n = a.n();
    let m = &a.entries;
    let lu = Lu::new(m)?;
    let det_exact = lu.det();
    let inv_exact = lu.inverse();
    let offdiag_sum: f64 = {
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    s += m[(j, k)].abs();
                }
            }
        }
        s
    };
    let denom = a.epsilon * offdiag_sum;
    let det_bound_ratio = if denom == 0.0 {
        0.0
    } else {
        (det_exact - 1.0).abs() / denom
    };
    let mut ratios = Matrix::zeros(n, n);
    let eps2_sum = a.epsilon * a.epsilon * offdiag_sum;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let mut chain = 0.0;
            for i in 0..n {
                if i != j && i != k {
                    chain += m[(j, i)].abs() * m[(i, k)].abs();
                }
            }
            let denom = m[(j, k)].abs() + chain + eps2_sum;
            ratios[(j, k)] = if denom == 0.0 {
                0.0
            } else {
                inv_exact[(j, k)].abs() / denom
            };
        }
    }
    Ok(NearIdentityReport {
        det_exact,
        inv_exact,
        det_bound_ratio,
        inv_offdiag_ratios: ratios,
    })
}

/// Multivariate normal density at x for correlation matrix C, via Cholesky.
pub fn gaussian_density(c: &Matrix, x: &[f64]) -> Result<f64> {
    Ok(log_gaussian_density(c, x)?.exp())
}

pub fn log_gaussian_density(c: &Matrix, x: &[f64]) -> Result<f64> {
    let n = c.rows();
    assert_eq!(x.len(), n);
    let ch = Cholesky::new_strict(c)?;
    let y = ch.forward_solve(x); // L y = x  =>  x^T C^-1 x = |y|^2
    let quad_form: f64 = y.iter().map(|v| v * v).sum();
    Ok(-0.5 * (n as f64) * (2.0 * std::f64::consts::PI).ln() - 0.5 * ch.log_det()
        - 0.5 * quad_form)
}

/// Integral of phi(t) Phi(t)^{n-1} over (a, inf): closed form (1 - Phi(a)^n)/n.
pub fn phi_power_integral(n: u64, a: f64) -> f64 {
    assert!(n >= 1);
    let nf = n as f64;
    if a == f64::NEG_INFINITY {
        return 1.0 / nf;
    }
    // 1 - Phi(a)^n = -expm1(n ln Phi(a)), stable when Phi(a)^n is near 1 or 0
    -f64::exp_m1(nf * ln_phi(a)) / nf
}

/// P(max_i W_i <= A) for the equicorrelated family W_i = sqrt(eps) Z_0 +
/// sqrt(1-eps) Z_i: (1/sqrt(2pi)) integral of Phi((A+sqrt(eps) y)/sqrt(1-eps))^n
/// times e^{-y^2/2}.
pub fn ncr2_conditional_integral(n: u64, epsilon: f64, a: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(RaceError::Domain(format!(
            "epsilon must be in (0,1), got {epsilon}"
        )));
    }
    let nf = n as f64;
    let se = epsilon.sqrt();
    let s1e = (1.0 - epsilon).sqrt();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let f = move |y: f64| {
        let arg = (a + se * y) / s1e;
        (nf * ln_phi(arg) - 0.5 * y * y).exp() * norm
    };
    Ok(quad::integrate(f, -40.0, 40.0, 1e-11))
}

/// Product of Phi(x sqrt((1-r)/(1+r))) over the given correlations: the
/// independence approximation to P(max X_i <= x | X_1 = x).
pub fn leader_conditional_product(r1: &[f64], x: f64) -> Result<f64> {
    let mut log_sum = 0.0;
    for &r in r1 {
        if r.abs() >= 1.0 {
            return Err(RaceError::Domain(format!("|r| must be < 1, got {r}")));
        }
        log_sum += ln_phi(x * ((1.0 - r) / (1.0 + r)).sqrt());
    }
    Ok(log_sum.exp())
}

/// The first-k conditioning data: coefficients u, residual variances,
/// thresholds, and the residual correlation matrix.
#[derive(Clone, Debug)]
pub struct ConditioningTransform {
    pub k: usize,
    /// (n-k) x k coefficients u_{i,l}
    pub u: Matrix,
    /// residual variances E V_i^2
    pub v_var: Vec<f64>,
    /// thresholds (x_k - sum_l x_l u_{i,l}) / sqrt(v_var_i)
    pub w: Vec<f64>,
    /// (n-k) x (n-k) residual correlations E W_i W_j
    pub residual_corr: Matrix,
}

/// Condition coordinates 1..k of a correlation matrix on values x (decreasing).
/// The coefficients are obtained by exact solves against the leading k x k
/// block rather than any perturbative expansion.
pub fn firstk_transform(r: &Matrix, k: usize, x: &[f64]) -> Result<ConditioningTransform> {
    let n = r.rows();
    if k < 1 || k >= n {
        return Err(RaceError::Domain(format!("k={k} out of range 1..{n}")));
    }
    assert_eq!(x.len(), k);
    if x.windows(2).any(|w| w[0] < w[1]) {
        return Err(RaceError::Domain("conditioned values must be decreasing".into()));
    }
    let block = Matrix::from_fn(k, k, |i, j| r[(i, j)]);
    let lu = Lu::new(&block)?;
    let m = n - k;
    let mut u = Matrix::zeros(m, k);
    let mut v_var = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    let xk = x[k - 1];
    for i in 0..m {
        let rhs: Vec<f64> = (0..k).map(|l| r[(k + i, l)]).collect();
        let coeffs = lu.solve(&rhs);
        let mut var = 1.0;
        let mut thresh = xk;
        for l in 0..k {
            u[(i, l)] = coeffs[l];
            var -= coeffs[l] * r[(k + i, l)];
            thresh -= x[l] * coeffs[l];
        }
        if var <= 0.0 {
            return Err(RaceError::Domain(format!(
                "nonpositive residual variance {var} at coordinate {}",
                k + i
            )));
        }
        v_var.push(var);
        w.push(thresh / var.sqrt());
    }
    let mut residual_corr = Matrix::identity(m);
    for i in 0..m {
        for j in (i + 1)..m {
            let mut cov = r[(k + i, k + j)];
            for l in 0..k {
                cov -= u[(i, l)] * r[(k + j, l)];
            }
            let v = cov / (v_var[i] * v_var[j]).sqrt();
            residual_corr[(i, j)] = v;
            residual_corr[(j, i)] = v;
        }
    }
    Ok(ConditioningTransform {
        k,
        u,
        v_var,
        w,
        residual_corr,
    })
}

impl ConditioningTransform {
    /// Max |E V_i X_t| residual; exact orthogonality means ~1e-14 here.
    pub fn orthogonality_defect(&self, r: &Matrix) -> f64 {
        let k = self.k;
        let m = self.u.rows();
        let mut worst = 0.0f64;
        for i in 0..m {
            for t in 0..k {
                let mut res = r[(k + i, t)];
                for l in 0..k {
                    res -= self.u[(i, l)] * r[(l, t)];
                }
                worst = worst.max(res.abs());
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub enum BoundSpec {
    /// n^-100 + n^-1.99 sum |r_{1,i}| + n^-2.99 sum |r_{i,j}|
    ProbLeader {
        n: u64,
        r1_abs_sum: f64,
        rij_abs_sum: f64,
    },
    /// n (log n)^4 / log q
    FullRaceError { n: u64, log_q: f64 },
    /// n^4 / phi(q)^{1/8} + 1/(n log q)^{12/25}
    LeaderError { n: u64, phi_q: f64, log_q: f64 },
    /// k (log k)^6 log n / log q + 1/(n log^{1/10} q)
    FirstKError { n: u64, k: u64, log_q: f64 },
    /// exp(-c n e^{-A^2/2 + c(eps A^2 + AB + B^2)}/(A+B)) + e^{-B^2/eps}; shape only
    Ncr2 { n: u64, epsilon: f64, a: f64, b: f64 },
    /// (1/2pi) sum over pairs with E X_iX_j > E W_iW_j of
    /// (arcsin E X_iX_j - arcsin E W_iW_j) exp(-(u_i^2+u_j^2)/(2(1+rho)))
    LiShao { pairs: Vec<LiShaoPair> },
}

#[derive(Clone, Copy, Debug)]
pub struct LiShaoPair {
    pub e_xx: f64,
    pub e_ww: f64,
    pub u_i: f64,
    pub u_j: f64,
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub kind: &'static str,
    pub value: f64,
    pub constant_c: f64,
    /// set when the expression carries an unspecified Theta and only the shape
    /// is meaningful
    pub shape_only: bool,
}

/// Evaluate an error-term expression with every implicit constant replaced by
/// `constant_c`. Logs are natural.
pub fn bound_value(spec: &BoundSpec, constant_c: f64) -> BoundReport {
    let c = constant_c;
    match spec {
        BoundSpec::ProbLeader {
            n,
            r1_abs_sum,
            rij_abs_sum,
        } => {
            let nf = *n as f64;
            let value =
                c * (nf.powf(-100.0) + nf.powf(-1.99) * r1_abs_sum + nf.powf(-2.99) * rij_abs_sum);
            BoundReport {
                kind: "prob_leader",
                value,
                constant_c: c,
                shape_only: false,
            }
        }
        BoundSpec::FullRaceError { n, log_q } => {
            let nf = *n as f64;
            BoundReport {
                kind: "full_race_error",
                value: c * nf * nf.ln().powi(4) / log_q,
                constant_c: c,
                shape_only: false,
            }
        }
        BoundSpec::LeaderError { n, phi_q, log_q } => {
            let nf = *n as f64;
            BoundReport {
                kind: "leader_error",
                value: c * (nf.powi(4) / phi_q.powf(0.125) + (nf * log_q).powf(-12.0 / 25.0)),
                constant_c: c,
                shape_only: false,
            }
        }
        BoundSpec::FirstKError { n, k, log_q } => {
            let nf = *n as f64;
            let kf = *k as f64;
            BoundReport {
                kind: "firstk_error",
                value: c
                    * (kf * kf.ln().powi(6) * nf.ln() / log_q
                        + 1.0 / (nf * log_q.powf(0.1))),
                constant_c: c,
                shape_only: false,
            }
        }
        BoundSpec::Ncr2 { n, epsilon, a, b } => {
            let nf = *n as f64;
            let inner = (-0.5 * a * a + c * (epsilon * a * a + a * b + b * b)).exp();
            let value = (-c * nf * inner / (a + b)).exp() + (-b * b / epsilon).exp();
            BoundReport {
                kind: "ncr2",
                value,
                constant_c: c,
                shape_only: true,
            }
        }
        BoundSpec::LiShao { pairs } => {
            let mut sum = 0.0;
            for p in pairs {
                if p.e_xx > p.e_ww {
                    let rho = p.e_xx.abs().max(p.e_ww.abs());
                    sum += (p.e_xx.asin() - p.e_ww.asin())
                        * (-(p.u_i * p.u_i + p.u_j * p.u_j) / (2.0 * (1.0 + rho))).exp();
                }
            }
            BoundReport {
                kind: "li_shao",
                value: c * sum / (2.0 * std::f64::consts::PI),
                constant_c: c,
                shape_only: false,
            }
        }
    }
}

/// P(Z_1 > Z_2 > max of n-2 independents) when only the (1,2) correlation is
/// nonzero, by nested adaptive quadrature over the truncated plane [-8,12]^2
/// with the strict half-plane x1 > x2.
pub fn delta2_quadrature(r12: f64, n: u64) -> Result<f64> {
    if r12.abs() >= 1.0 {
        return Err(RaceError::Domain(format!("|r12| must be < 1, got {r12}")));
    }
    if n < 3 {
        return Err(RaceError::Domain(format!("need n >= 3, got {n}")));
    }
    let nf = n as f64;
    let tol = 1e-4 / (nf * (nf - 1.0));
    let (lo, hi) = (-8.0f64, 12.0f64);
    let det = 1.0 - r12 * r12;
    let log_norm = -((2.0 * std::f64::consts::PI) * det.sqrt()).ln();
    let inner_tol = tol / (4.0 * (hi - lo));
    let outer = |x2: f64| {
        let tail_weight = (nf - 2.0) * ln_phi(x2);
        if tail_weight < -745.0 {
            return 0.0;
        }
        let inner = quad::integrate(
            |x1: f64| {
                let qf = (x1 * x1 - 2.0 * r12 * x1 * x2 + x2 * x2) / (2.0 * det);
                (log_norm - qf).exp()
            },
            x2,
            hi,
            inner_tol,
        );
        inner * tail_weight.exp()
    };
    Ok(quad::integrate(outer, lo, hi, 0.5 * tol))
}

/// The tuple (1, -1, m^3, m^4, ..., m^k, smallest unused units ...) mod q,
/// with m = p1 p2 the product of the two smallest primes coprime to q.
pub fn biased_tuple(q: u64, k: usize, n: usize) -> Result<Vec<u64>> {
    if k < 2 || k > n {
        return Err(RaceError::Domain(format!("need 2 <= k <= n, got k={k} n={n}")));
    }
    let phi = crate::arith::euler_phi(q);
    if n as u64 > phi {
        return Err(RaceError::Domain(format!(
            "n={n} exceeds phi({q})={phi}"
        )));
    }
    let mut primes = (2u64..).filter(|&p| is_prime(p) && gcd(p, q) == 1);
    let p1 = primes.next().unwrap();
    let p2 = primes.next().unwrap();
    let m = p1 * p2 % q;
    let mut tuple: Vec<u64> = vec![1, q - 1];
    let mut power = crate::arith::mod_pow(m, 3, q);
    for j in 3..=k {
        if let Some(pos) = tuple.iter().position(|&t| t == power) {
            return Err(RaceError::Domain(format!(
                "construction collides: a_{j} = a_{} = {power} mod {q}",
                pos + 1
            )));
        }
        tuple.push(power);
        power = power * m % q;
    }
    let mut candidate = 2u64;
    while tuple.len() < n {
        if is_unit(candidate, q) && !tuple.contains(&candidate) {
            tuple.push(candidate);
        }
        candidate += 1;
    }
    Ok(tuple)
}

/// A with e^{0.51 A^2} = n/(k log n).
pub fn choose_a(n: u64, k: u64) -> Result<f64> {
    let nf = n as f64;
    let arg = nf / (k as f64 * nf.ln());
    if !(arg > 1.0) {
        return Err(RaceError::Domain(format!(
            "A undefined in this regime: n/(k log n) = {arg} <= 1"
        )));
    }
    Ok((arg.ln() / 0.51).sqrt())
}
