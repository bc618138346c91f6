//! Number-theoretic transforms over word-sized primes p = c·2⁴⁰ + 1 < 2⁶²,
//! used to multiply integer power series modulo several primes before
//! Chinese-remainder reconstruction.

use std::sync::OnceLock;

/// Montgomery arithmetic modulo an odd p < 2⁶².
#[derive(Debug, Clone, Copy)]
pub struct Montgomery {
    p: u64,
    /// -p⁻¹ mod 2⁶⁴
    neg_inv: u64,
    /// 2¹²⁸ mod p
    r2: u64,
}

impl Montgomery {
    pub fn new(p: u64) -> Self {
        debug_assert!(p % 2 == 1 && p < 1 << 62);
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Montgomery {
            p,
            neg_inv: inv.wrapping_neg(),
            r2,
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    pub fn to_mont(&self, x: u64) -> u64 {
        self.reduce(x as u128 * self.r2 as u128)
    }

    #[inline]
    pub fn from_mont(&self, x: u64) -> u64 {
        self.reduce(x as u128)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    /// Exponentiation on Montgomery-form input.
    pub fn pow(&self, base: u64, mut e: u64) -> u64 {
        let mut acc = self.to_mont(1);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }
}

/// Plain modular helpers for one-off computations.
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
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

pub const MAX_LOG_SIZE: u32 = 40;

#[derive(Debug, Clone, Copy)]
pub struct NttPrime {
    pub p: u64,
    pub generator: u64,
    pub mont: Montgomery,
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn find_generator(p: u64) -> u64 {
    let mut factors = prime_factors((p - 1) >> MAX_LOG_SIZE);
    factors.insert(0, 2);
    (2..)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("a primitive root exists")
}

/// The first `count` primes of the form c·2⁴⁰ + 1 below 2⁶², largest first.
pub fn ntt_primes(count: usize) -> Vec<NttPrime> {
    static PRIMES: OnceLock<Vec<NttPrime>> = OnceLock::new();
    let all = PRIMES.get_or_init(|| {
        let mut found = Vec::new();
        let mut c: u64 = (1 << (62 - MAX_LOG_SIZE)) - 1;
        while found.len() < 16 && c > 0 {
            let p = (c << MAX_LOG_SIZE) + 1;
            if is_prime_u64(p) {
                found.push(NttPrime {
                    p,
                    generator: find_generator(p),
                    mont: Montgomery::new(p),
                });
            }
            c -= 1;
        }
        found
    });
    assert!(count <= all.len(), "at most {} NTT primes available", all.len());
    all[..count].to_vec()
}

fn bit_reverse_permute(a: &mut [u64]) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
}

/// In-place transform of Montgomery-form data; `a.len()` must be a power of
/// two not exceeding 2⁴⁰. The inverse includes the 1/n scaling.
pub fn transform(a: &mut [u64], prime: &NttPrime, inverse: bool) {
    let n = a.len();
    assert!(n.is_power_of_two());
    if n == 1 {
        return;
    }
    let mt = &prime.mont;
    let p = prime.p;
    bit_reverse_permute(a);
    let g = mt.to_mont(prime.generator);
    let mut len = 2;
    while len <= n {
        let mut w_len = mt.pow(g, (p - 1) / len as u64);
        if inverse {
            w_len = mt.pow(w_len, p - 2);
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = mt.to_mont(1);
        for _ in 0..half {
            twiddles.push(w);
            w = mt.mul(w, w_len);
        }
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((x, y), &tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let u = *x;
                let v = mt.mul(*y, tw);
                *x = mt.add(u, v);
                *y = mt.sub(u, v);
            }
        }
        len <<= 1;
    }
    if inverse {
        let n_inv = mt.pow(mt.to_mont(n as u64), p - 2);
        for x in a.iter_mut() {
            *x = mt.mul(*x, n_inv);
        }
    }
}

/// Product of two residue series modulo `prime`, truncated to `out_len`
/// terms. Inputs and output are in the standard (non-Montgomery) domain.
pub fn multiply_truncated(a: &[u64], b: &[u64], out_len: usize, prime: &NttPrime) -> Vec<u64> {
    let la = a.len().min(out_len);
    let lb = b.len().min(out_len);
    if la == 0 || lb == 0 {
        return vec![0; out_len];
    }
    let size = (la + lb - 1).next_power_of_two();
    let mt = &prime.mont;
    let mut fa = vec![0u64; size];
    for (dst, &x) in fa.iter_mut().zip(&a[..la]) {
        *dst = mt.to_mont(x);
    }
    let square = std::ptr::eq(a, b);
    transform(&mut fa, prime, false);
    if square {
        for x in fa.iter_mut() {
            *x = mt.mul(*x, *x);
        }
    } else {
        let mut fb = vec![0u64; size];
        for (dst, &x) in fb.iter_mut().zip(&b[..lb]) {
            *dst = mt.to_mont(x);
        }
        transform(&mut fb, prime, false);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = mt.mul(*x, *y);
        }
    }
    transform(&mut fa, prime, true);
    fa.truncate(out_len);
    fa.resize(out_len, 0);
    for x in fa.iter_mut() {
        *x = mt.from_mont(*x);
    }
    fa
}
