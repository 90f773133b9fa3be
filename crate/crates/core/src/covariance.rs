//! Second-order data of the race model: Var(q), B_q(a,b), the square-count
//! shifts C_q(a), the normalized correlation matrix, and the arithmetic sums
//! (von Mangoldt term, M1, M2) entering the averaged correlation estimate.

use num_complex::Complex64;

use crate::arith::{factorize, gcd, is_unit, mod_inv, mod_pow, von_mangoldt, KahanSum};
use crate::characters::CharacterTable;
use crate::error::{RaceError, Result};
use crate::linalg::Matrix;
use crate::zeros::ZeroSet;

/// C_q(a) = -1 + #{b mod q : b^2 = a mod q}.
pub fn cq_shift(q: u64, a: u64) -> Result<i64> {
    let a = a % q;
    if !is_unit(a, q) {
        return Err(RaceError::NonUnit {
            residue: a,
            modulus: q,
        });
    }
    let mut count = 0i64;
    for b in 0..q {
        if b * b % q == a {
            count += 1;
        }
    }
    Ok(count - 1)
}

#[derive(Clone, Debug)]
pub struct ShiftVector {
    pub residues: Vec<u64>,
    pub c: Vec<i64>,
}

/// C_q(a) for an n-tuple in one O(q) pass.
pub fn shift_vector(q: u64, residues: &[u64]) -> Result<ShiftVector> {
    let mut square_counts = vec![0i64; q as usize];
    for b in 0..q {
        square_counts[(b * b % q) as usize] += 1;
    }
    let mut c = Vec::with_capacity(residues.len());
    for &a in residues {
        let a = a % q;
        if !is_unit(a, q) {
            return Err(RaceError::NonUnit {
                residue: a,
                modulus: q,
            });
        }
        c.push(square_counts[a as usize] - 1);
    }
    Ok(ShiftVector {
        residues: residues.to_vec(),
        c,
    })
}

/// Var(q) = 2 sum over non-principal chi, gamma > 0 of 1/(1/4 + gamma^2),
/// truncated to the supplied data. Kahan accumulation.
pub fn var_q(zs: &ZeroSet) -> f64 {
    let mut acc = KahanSum::default();
    for block in &zs.blocks {
        for &g in &block.gammas {
            acc.add(1.0 / (0.25 + g * g));
        }
    }
    2.0 * acc.value()
}

/// B_q(a,b) = sum over chi, gamma of (chi(b/a) + chi(a/b))/(1/4 + gamma^2).
///
/// Accumulated as a complex sum; the residual imaginary part (which exact
/// conjugate pairing would cancel) is asserted small.
pub fn bq(zs: &ZeroSet, table: &CharacterTable, a: u64, b: u64) -> Result<f64> {
    let q = table.modulus();
    let (a, b) = (a % q, b % q);
    if a == b {
        return Err(RaceError::Domain(format!(
            "B_q requires distinct residues, got {a} = {b} mod {q}"
        )));
    }
    for r in [a, b] {
        if !is_unit(r, q) {
            return Err(RaceError::NonUnit {
                residue: r,
                modulus: q,
            });
        }
    }
    let mut re = KahanSum::default();
    let mut im = KahanSum::default();
    for block in &zs.blocks {
        let chi_a = table.eval(block.conrey_index, a)?;
        let chi_b = table.eval(block.conrey_index, b)?;
        // chi(b/a) + chi(a/b)
        let coeff: Complex64 = chi_b * chi_a.conj() + chi_a * chi_b.conj();
        let mut weight = KahanSum::default();
        for &g in &block.gammas {
            weight.add(1.0 / (0.25 + g * g));
        }
        re.add(coeff.re * weight.value());
        im.add(coeff.im * weight.value());
    }
    let value = re.value();
    let residual = im.value().abs();
    debug_assert!(
        residual < 1e-9 * (value.abs() + 1.0),
        "imaginary residual {residual} too large for B_{q}({a},{b})"
    );
    Ok(value)
}

#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    pub q: u64,
    pub residues: Vec<u64>,
    pub var_q: f64,
    pub r: Matrix,
    /// false when the zero data does not cover every non-principal character
    pub complete: bool,
}

pub fn correlation_matrix(
    zs: &ZeroSet,
    table: &CharacterTable,
    residues: &[u64],
) -> Result<CorrelationMatrix> {
    let q = table.modulus();
    let n = residues.len();
    for (i, &a) in residues.iter().enumerate() {
        if !is_unit(a, q) {
            return Err(RaceError::NonUnit {
                residue: a,
                modulus: q,
            });
        }
        for &b in &residues[..i] {
            if a % q == b % q {
                return Err(RaceError::Domain(format!("duplicate residue {a} mod {q}")));
            }
        }
    }
    let var = var_q(zs);
    let mut r = Matrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = bq(zs, table, residues[i], residues[j])? / var;
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(CorrelationMatrix {
        q,
        residues: residues.to_vec(),
        var_q: var,
        r,
        complete: zs.is_complete(table),
    })
}

/// Lambda(m)/phi(m) with m = q/gcd(q, a - b).
pub fn lambda_term(q: u64, a: u64, b: u64) -> Result<f64> {
    let (a, b) = (a % q, b % q);
    if a == b {
        return Err(RaceError::Domain("lambda_term requires a != b mod q".into()));
    }
    let diff = (a + q - b) % q;
    let m = q / gcd(q, diff);
    if m == 1 {
        return Ok(0.0);
    }
    Ok(von_mangoldt(m) / crate::arith::euler_phi(m) as f64)
}

const M_SUM_GUARD: u64 = 2000;

fn msum_x(q: u64) -> f64 {
    let qf = q as f64;
    (qf * qf.ln()).powi(2)
}

/// M1(q; a, d) = sum over n <= 2x log x, a n = d mod q, of Lambda(n)/n e^{-n/x},
/// with x = (q log q)^2.
pub fn m1_sum(q: u64, a: u64, d: u64) -> Result<f64> {
    if q > M_SUM_GUARD {
        return Err(RaceError::CostGuard(format!(
            "m1_sum refuses q = {q} > {M_SUM_GUARD}; the loop is O(q^2 log^3 q)"
        )));
    }
    m1_sum_unguarded(q, a, d)
}

pub fn m1_sum_unguarded(q: u64, a: u64, d: u64) -> Result<f64> {
    for r in [a % q, d % q] {
        if !is_unit(r, q) {
            return Err(RaceError::NonUnit {
                residue: r,
                modulus: q,
            });
        }
    }
    let x = msum_x(q);
    let limit = (2.0 * x * x.ln()).floor() as u64;
    let n0 = d % q * mod_inv(a % q, q) % q;
    let mut acc = KahanSum::default();
    let mut n = if n0 == 0 { q } else { n0 };
    while n <= limit {
        let lam = von_mangoldt(n);
        if lam != 0.0 {
            acc.add(lam / n as f64 * (-(n as f64) / x).exp());
        }
        n += q;
    }
    Ok(acc.value())
}

/// M2(q; a, d) = sum over p^nu || q, 1 <= e <= 2 log x with a p^e = d mod q/p^nu,
/// of log p / (p^{e+nu-1}(p-1)), with x = (q log q)^2.
pub fn m2_sum(q: u64, a: u64, d: u64) -> Result<f64> {
    if q > M_SUM_GUARD {
        return Err(RaceError::CostGuard(format!(
            "m2_sum refuses q = {q} > {M_SUM_GUARD}"
        )));
    }
    m2_sum_unguarded(q, a, d)
}

pub fn m2_sum_unguarded(q: u64, a: u64, d: u64) -> Result<f64> {
    for r in [a % q, d % q] {
        if !is_unit(r, q) {
            return Err(RaceError::NonUnit {
                residue: r,
                modulus: q,
            });
        }
    }
    let x = msum_x(q);
    let emax = (2.0 * x.ln()).floor() as u32;
    let mut acc = KahanSum::default();
    for (p, nu) in factorize(q) {
        let q_rest = q / p.pow(nu);
        let lp = (p as f64).ln();
        for e in 1..=emax {
            let matches = if q_rest == 1 {
                true
            } else {
                a % q_rest * mod_pow(p, e as u64, q_rest) % q_rest == d % q_rest
            };
            if matches {
                let denom = (p as f64).powi((e + nu - 1) as i32) * (p - 1) as f64;
                acc.add(lp / denom);
            }
        }
    }
    Ok(acc.value())
}

#[derive(Clone, Copy, Debug)]
pub struct AverageReport {
    pub sum: f64,
    pub paper_form: f64,
    pub ratio: f64,
}

/// Sum of |r_ij| over i in I, j in J (pairs with equal residue excluded),
/// against the averaged-correlation form sqrt(|I||J|) log^2(2|I||J|) / log q.
pub fn correlation_average_report(
    cm: &CorrelationMatrix,
    i_set: &[usize],
    j_set: &[usize],
) -> AverageReport {
    correlation_average_report_with_logq(cm, i_set, j_set, (cm.q as f64).ln())
}

pub fn correlation_average_report_with_logq(
    cm: &CorrelationMatrix,
    i_set: &[usize],
    j_set: &[usize],
    log_q: f64,
) -> AverageReport {
    let mut sum = 0.0;
    for &i in i_set {
        for &j in j_set {
            if cm.residues[i] != cm.residues[j] {
                sum += cm.r[(i, j)].abs();
            }
        }
    }
    let rs = (i_set.len() * j_set.len()) as f64;
    let paper_form = rs.sqrt() * (2.0 * rs).ln().powi(2) / log_q;
    AverageReport {
        sum,
        paper_form,
        ratio: sum / paper_form,
    }
}
