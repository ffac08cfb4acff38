//! Reduction of cyclotomic integers modulo a split prime.
//!
//! For `p ≡ 1 (mod n)` the map `ζ_n ↦ ω` (with `ω` a primitive `n`-th root of
//! unity in `F_p`) is a ring homomorphism on `p`-integral elements, so the rank
//! of a reduced matrix is a lower bound for the exact rank.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

#[derive(Clone, Debug)]
pub struct ModPrime {
    pub p: u64,
    /// Modulus of the cyclotomic field the reduction is defined on.
    pub n: u64,
    /// Primitive `n`-th root of unity modulo `p`.
    pub omega: u64,
}

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    if a % p == 0 {
        None
    } else {
        Some(pow_mod(a, p - 2, p))
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl ModPrime {
    /// A prime `p ≡ 1 (mod n)` just above `2^61 / k` style bounds, with a
    /// primitive `n`-th root of unity. `skip` selects later primes.
    pub fn for_conductor(n: u64, skip: usize) -> ModPrime {
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize), ModPrime>>> = OnceLock::new();
        let n = n.max(1);
        let cache = CACHE.get_or_init(Default::default);
        if let Some(m) = cache.lock().expect("cache").get(&(n, skip)) {
            return m.clone();
        }
        let m = Self::search(n, skip);
        cache.lock().expect("cache").insert((n, skip), m.clone());
        m
    }

    fn search(n: u64, skip: usize) -> ModPrime {
        let start = (1u64 << 61) / n;
        let mut found = 0;
        let mut k = start;
        loop {
            let p = k * n + 1;
            if is_prime(p) {
                if found == skip {
                    let factors = prime_factors(n);
                    let mut g = 2u64;
                    loop {
                        let w = pow_mod(g, (p - 1) / n, p);
                        if factors.iter().all(|&q| pow_mod(w, n / q, p) != 1) {
                            return ModPrime { p, n, omega: w };
                        }
                        g += 1;
                    }
                }
                found += 1;
            }
            k += 1;
        }
    }

    pub fn reduce_int(&self, x: &BigInt) -> u64 {
        if let Some(v) = x.to_i64() {
            return (v as i128).rem_euclid(self.p as i128) as u64;
        }
        let r = x.mod_floor(&BigInt::from(self.p));
        r.to_u64().unwrap_or(0)
    }

    /// `num/den mod p`, or `None` when `p` divides the denominator.
    pub fn reduce_ratio(&self, num: &BigInt, den: &BigInt) -> Option<u64> {
        if num.is_zero() {
            return Some(0);
        }
        let d = self.reduce_int(den);
        let di = inv_mod(d, self.p)?;
        Some(mul_mod(self.reduce_int(num), di, self.p))
    }
}

/// Rank of a dense matrix over `F_p`.
pub fn rank_mod_p(rows: usize, cols: usize, mut data: Vec<u64>, p: u64) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| data[r * cols + c] != 0) else {
            continue;
        };
        if piv != rank {
            for j in 0..cols {
                data.swap(piv * cols + j, rank * cols + j);
            }
        }
        let inv = inv_mod(data[rank * cols + c], p).expect("nonzero pivot");
        for j in c..cols {
            data[rank * cols + j] = mul_mod(data[rank * cols + j], inv, p);
        }
        for r in 0..rows {
            if r == rank {
                continue;
            }
            let f = data[r * cols + c];
            if f == 0 {
                continue;
            }
            for j in c..cols {
                let sub = mul_mod(f, data[rank * cols + j], p);
                let v = data[r * cols + j];
                data[r * cols + j] = if v >= sub { v - sub } else { v + p - sub };
            }
        }
        rank += 1;
    }
    rank
}
