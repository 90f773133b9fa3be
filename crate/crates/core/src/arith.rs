//! Elementary number-theoretic utilities: gcd, modular arithmetic, factorization,
//! deterministic Miller-Rabin for u64, and the von Mangoldt function.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn is_unit(a: u64, q: u64) -> bool {
    gcd(a % q, q) == 1
}

pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, assuming gcd(a, m) = 1.
pub fn mod_inv(a: u64, m: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let quot = r / new_r;
        (t, new_t) = (new_t, t - quot * new_t);
        (r, new_r) = (new_r, r - quot * new_r);
    }
    debug_assert_eq!(r, 1, "mod_inv of non-unit");
    (t.rem_euclid(m as i128)) as u64
}

/// Trial-division factorization, returned as (prime, exponent) pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Deterministic Miller-Rabin for u64 (base set valid for all n < 3.3e24).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn integer_kth_root(n: u64, k: u32) -> u64 {
    if k == 1 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    // float estimate can be off by one in either direction
    while r > 1 && r.checked_pow(k).map_or(true, |v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).map_or(false, |v| v <= n) {
        r += 1;
    }
    r
}

/// If n = p^e for a prime p and e >= 1, returns (p, e).
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    for k in (1..=n.ilog2() + 1).rev() {
        let r = integer_kth_root(n, k);
        if r >= 2 && r.checked_pow(k) == Some(n) && is_prime(r) {
            return Some((r, k));
        }
    }
    None
}

/// Von Mangoldt function: log p if n = p^e, else 0.
pub fn von_mangoldt(n: u64) -> f64 {
    match prime_power(n) {
        Some((p, _)) => (p as f64).ln(),
        None => 0.0,
    }
}

/// Smallest primitive root modulo an odd prime power p^e.
pub fn primitive_root_odd_prime_power(p: u64, e: u32) -> u64 {
    let pe = p.pow(e);
    let phi_p = p - 1;
    let factors = factorize(phi_p);
    // primitive root mod p first
    let mut g = 0;
    for cand in 2..p {
        if factors
            .iter()
            .all(|&(f, _)| mod_pow(cand, phi_p / f, p) != 1)
        {
            g = cand;
            break;
        }
    }
    debug_assert!(g != 0);
    if e == 1 {
        return g;
    }
    // lift: g is a primitive root mod p^e unless g^(p-1) = 1 mod p^2, in which case g+p works
    if mod_pow(g, p - 1, p * p) == 1 {
        g += p;
    }
    debug_assert!(g < pe);
    g
}

/// Compensated (Kahan) accumulator for long sums of decaying terms.
#[derive(Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
