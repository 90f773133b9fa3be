//! The group of Dirichlet characters mod q with Conrey indexing.
//!
//! Characters are built from the CRT decomposition of (Z/qZ)* into cyclic
//! factors: a primitive root for each odd prime power, and {-1} x <5> for
//! 2^k with k >= 3. The Conrey index of a character is a unit n mod q; the
//! value chi_n(m) is a root of unity determined by the discrete logarithms
//! of n and m in each factor. Values are looked up from a table of roots of
//! unity of order lcm(component orders), built once at construction, so no
//! trigonometric error accumulates in hot loops.

use num_complex::Complex64;

use crate::arith::{gcd, is_unit, primitive_root_odd_prime_power};
use crate::error::{RaceError, Result};

enum Component {
    /// phi(p^e) = 1, contributes nothing (the factor 2^1).
    Trivial {
        #[allow(dead_code)]
        modulus: u64,
    },
    /// Odd prime power: cyclic of order phi(p^e), discrete logs to a primitive root.
    OddPrimePower {
        modulus: u64,
        dlog: Vec<u32>,
        ord: u64,
    },
    /// 2^2: cyclic of order 2, indexed by m mod 4.
    Four,
    /// 2^e, e >= 3: {-1} x <5>; logs[m] = (eps, a) with m = (-1)^eps 5^a.
    TwoPowerHigh {
        modulus: u64,
        logs: Vec<(u8, u32)>,
        half: u64,
    },
}

pub struct CharacterTable {
    q: u64,
    phi: u64,
    units: Vec<u64>,
    components: Vec<Component>,
    /// lcm of the component orders; every character value is a root of unity of this order
    exponent: u64,
    roots: Vec<Complex64>,
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl CharacterTable {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 {
            return Err(RaceError::ModulusTooSmall(q));
        }
        let factors = crate::arith::factorize(q);
        let mut components = Vec::new();
        let mut exponent = 1u64;
        for &(p, e) in &factors {
            if p == 2 {
                match e {
                    1 => components.push(Component::Trivial { modulus: 2 }),
                    2 => {
                        components.push(Component::Four);
                        exponent = lcm(exponent, 2);
                    }
                    _ => {
                        let modulus = 1u64 << e;
                        let half = modulus / 4; // 2^{e-2}
                        let mut logs = vec![(0u8, 0u32); modulus as usize];
                        let mut m = 1u64;
                        for a in 0..half {
                            logs[m as usize] = (0, a as u32);
                            logs[(modulus - m) as usize] = (1, a as u32);
                            m = m * 5 % modulus;
                        }
                        components.push(Component::TwoPowerHigh {
                            modulus,
                            logs,
                            half,
                        });
                        exponent = lcm(exponent, lcm(2, half));
                    }
                }
            } else {
                let pe = p.pow(e);
                let ord = pe / p * (p - 1);
                let g = primitive_root_odd_prime_power(p, e);
                let mut dlog = vec![0u32; pe as usize];
                let mut m = 1u64;
                for a in 0..ord {
                    dlog[m as usize] = a as u32;
                    m = m * g % pe;
                }
                components.push(Component::OddPrimePower {
                    modulus: pe,
                    dlog,
                    ord,
                });
                exponent = lcm(exponent, ord);
            }
        }
        let roots: Vec<Complex64> = (0..exponent)
            .map(|j| {
                let angle = 2.0 * std::f64::consts::PI * (j as f64) / (exponent as f64);
                let (s, c) = angle.sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        let units: Vec<u64> = (1..q).filter(|&a| gcd(a, q) == 1).collect();
        let phi = units.len() as u64;
        Ok(CharacterTable {
            q,
            phi,
            units,
            components,
            exponent,
            roots,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// All Conrey indices, i.e. the units mod q in increasing order. Index 1 is principal.
    pub fn conrey_indices(&self) -> &[u64] {
        &self.units
    }

    pub fn units(&self) -> &[u64] {
        &self.units
    }

    pub fn is_unit(&self, a: u64) -> bool {
        is_unit(a, self.q)
    }

    /// chi_n(m) for unit residues n, m (reduced mod q internally).
    pub fn eval(&self, conrey_index: u64, a: u64) -> Result<Complex64> {
        let n = conrey_index % self.q;
        let m = a % self.q;
        if !is_unit(n, self.q) {
            return Err(RaceError::NonUnit {
                residue: conrey_index,
                modulus: self.q,
            });
        }
        if !is_unit(m, self.q) {
            return Err(RaceError::NonUnit {
                residue: a,
                modulus: self.q,
            });
        }
        Ok(self.eval_unit(n, m))
    }

    /// As `eval` but both arguments must already be units in [0, q).
    pub fn eval_unit(&self, n: u64, m: u64) -> Complex64 {
        let mut num = 0u64; // numerator of the angle, over denominator `exponent`
        for comp in &self.components {
            match comp {
                Component::Trivial { .. } => {}
                Component::OddPrimePower { modulus, dlog, ord } => {
                    let an = dlog[(n % modulus) as usize] as u64;
                    let am = dlog[(m % modulus) as usize] as u64;
                    num = (num + (an * am % ord) * (self.exponent / ord)) % self.exponent;
                }
                Component::Four => {
                    let en = (n % 4 == 3) as u64;
                    let em = (m % 4 == 3) as u64;
                    num = (num + en * em % 2 * (self.exponent / 2)) % self.exponent;
                }
                Component::TwoPowerHigh {
                    modulus,
                    logs,
                    half,
                } => {
                    let (en, an) = logs[(n % modulus) as usize];
                    let (em, am) = logs[(m % modulus) as usize];
                    let eps = (en as u64 * em as u64) % 2;
                    num = (num + eps * (self.exponent / 2)) % self.exponent;
                    num = (num + (an as u64 * am as u64 % half) * (self.exponent / half))
                        % self.exponent;
                }
            }
        }
        self.roots[num as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn rejects_small_modulus() {
        assert!(CharacterTable::new(2).is_err());
        assert!(CharacterTable::new(0).is_err());
    }

    #[test]
    fn q3_nonprincipal() {
        let t = CharacterTable::new(3).unwrap();
        assert_eq!(t.phi(), 2);
        assert!(close(t.eval(2, 2).unwrap(), Complex64::new(-1.0, 0.0), 1e-12));
        assert!(close(t.eval(1, 2).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn q4_nonprincipal() {
        let t = CharacterTable::new(4).unwrap();
        assert!(close(t.eval(3, 1).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(t.eval(3, 3).unwrap(), Complex64::new(-1.0, 0.0), 1e-15));
        // reduction mod q
        assert!(close(t.eval(3, 7).unwrap(), Complex64::new(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn q5_conrey_2_is_quarter_turn() {
        let t = CharacterTable::new(5).unwrap();
        assert!(close(t.eval(2, 2).unwrap(), Complex64::new(0.0, 1.0), 1e-12));
        assert!(close(t.eval(2, 4).unwrap(), Complex64::new(-1.0, 0.0), 1e-12));
        assert!(close(t.eval(2, 3).unwrap(), Complex64::new(0.0, -1.0), 1e-12));
        assert!(close(t.eval(2, 1).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(t.eval(1, 3).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn non_unit_rejected() {
        let t = CharacterTable::new(10).unwrap();
        assert!(t.eval(3, 5).is_err());
        assert!(t.eval(5, 3).is_err());
    }

    #[test]
    fn principal_character_all_ones() {
        for q in [3u64, 4, 8, 12, 35, 100] {
            let t = CharacterTable::new(q).unwrap();
            for &a in t.units() {
                assert!(close(t.eval(1, a).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
            }
        }
    }

    #[test]
    fn complete_multiplicativity() {
        for q in [3u64, 4, 5, 8, 9, 12, 16, 24, 35, 45, 100] {
            let t = CharacterTable::new(q).unwrap();
            for &n in t.units() {
                for &a in t.units() {
                    for &b in t.units() {
                        let lhs = t.eval(n, a * b % q).unwrap();
                        let rhs = t.eval(n, a).unwrap() * t.eval(n, b).unwrap();
                        assert!(close(lhs, rhs, 1e-10), "q={q} n={n} a={a} b={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn row_orthogonality() {
        for q in [3u64, 4, 5, 8, 12, 21, 40] {
            let t = CharacterTable::new(q).unwrap();
            let phi = t.phi() as f64;
            for &chi in t.conrey_indices() {
                for &psi in t.conrey_indices() {
                    let mut s = Complex64::new(0.0, 0.0);
                    for &a in t.units() {
                        s += t.eval(chi, a).unwrap() * t.eval(psi, a).unwrap().conj();
                    }
                    let expect = if chi == psi { phi } else { 0.0 };
                    assert!(
                        (s - Complex64::new(expect, 0.0)).norm() < 1e-9 * phi,
                        "q={q} chi={chi} psi={psi} sum={s}"
                    );
                }
            }
        }
    }

    #[test]
    fn column_orthogonality_all_q_to_200() {
        for q in 3u64..=200 {
            let t = CharacterTable::new(q).unwrap();
            let phi = t.phi() as f64;
            for &a in t.units() {
                let mut s = Complex64::new(0.0, 0.0);
                for &chi in t.conrey_indices() {
                    s += t.eval(chi, a).unwrap();
                }
                let expect = if a == 1 { phi } else { 0.0 };
                assert!(
                    (s - Complex64::new(expect, 0.0)).norm() < 1e-8,
                    "q={q} a={a} sum={s}"
                );
            }
        }
    }

    #[test]
    fn values_on_unit_circle() {
        for q in [7u64, 8, 16, 27, 56, 360] {
            let t = CharacterTable::new(q).unwrap();
            for &n in t.units() {
                for &a in t.units() {
                    let v = t.eval(n, a).unwrap();
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn deterministic_construction() {
        let t1 = CharacterTable::new(360).unwrap();
        let t2 = CharacterTable::new(360).unwrap();
        for &n in t1.units() {
            for &a in t1.units() {
                assert_eq!(t1.eval(n, a).unwrap(), t2.eval(n, a).unwrap());
            }
        }
    }
}
