//! Fourier coefficients of level-one Hecke eigenforms in weights where the
//! cusp space is one-dimensional, f = Δ·E₄ⁱ·E₆ʲ.
//!
//! Raw coefficients are exact big integers; normalized eigenvalues
//! λ(n) = a(n)/n^{(k−1)/2} are stored alongside as `f64`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::MultiplicativeTables;
use crate::error::{invalid, Budget, Error, Result};
use crate::ntt::{self, NttPrime};

pub const SUPPORTED_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

/// Exponents (i, j) with f = Δ·E₄ⁱ·E₆ʲ.
fn eisenstein_exponents(weight: u32) -> Option<(u32, u32)> {
    match weight {
        12 => Some((0, 0)),
        16 => Some((1, 0)),
        18 => Some((0, 1)),
        20 => Some((2, 0)),
        22 => Some((1, 1)),
        26 => Some((2, 1)),
        _ => None,
    }
}

pub fn check_weight(weight: u32) -> Result<(u32, u32)> {
    eisenstein_exponents(weight).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "unsupported weight {weight}; supported weights are {:?}",
            SUPPORTED_WEIGHTS
        ))
    })
}

/// Jacobi's identity ∏(1−qⁿ)³ = Σ_{k≥0} (−1)ᵏ(2k+1) q^{k(k+1)/2}, as
/// (exponent, coefficient) pairs with exponent ≤ `limit`.
pub fn eta3_series(limit: u64) -> Vec<(u64, i64)> {
    let mut out = Vec::new();
    let mut k: u64 = 0;
    loop {
        let e = k * (k + 1) / 2;
        if e > limit {
            break;
        }
        let v = (2 * k + 1) as i64;
        out.push((e, if k % 2 == 0 { v } else { -v }));
        k += 1;
    }
    out
}

/// σ_k(n) for n in 0..=limit (index 0 is 0).
pub fn divisor_power_sums(limit: usize, k: u32) -> Vec<u128> {
    let mut s = vec![0u128; limit + 1];
    for d in 1..=limit {
        let dk = (d as u128).pow(k);
        for m in (d..=limit).step_by(d) {
            s[m] += dk;
        }
    }
    s
}

/// Strategy for the power-series products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientMethod {
    /// Multi-prime NTT products with Chinese-remainder reconstruction.
    Ntt,
    /// Exact big-integer products: sparse η³ passes, then dense Eisenstein
    /// products. Quadratic cost, suitable for small limits.
    Schoolbook,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenformTable {
    weight: u32,
    limit: usize,
    a: Vec<BigInt>,
    lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeligneViolation {
    pub n: usize,
    pub lambda: f64,
    pub bound: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeckeReport {
    pub pairs_checked: u64,
    pub failures: Vec<(u64, u64)>,
}

const CACHE_MAGIC: &[u8; 8] = b"HMEIGEN\0";
pub const EIGEN_CACHE_VERSION: u32 = 1;
/// Integer encoding tag: u32 LE byte length, then two's-complement LE bytes.
const ENCODING_SIGNED_LE_U32_PREFIX: u8 = 1;

pub fn delta_coefficients(limit: usize) -> Result<EigenformTable> {
    eigenform_coefficients(12, limit)
}

pub fn eigenform_coefficients(weight: u32, limit: usize) -> Result<EigenformTable> {
    eigenform_coefficients_with(weight, limit, CoefficientMethod::Ntt, &Budget::default())
}

pub fn eigenform_coefficients_with(
    weight: u32,
    limit: usize,
    method: CoefficientMethod,
    budget: &Budget,
) -> Result<EigenformTable> {
    let (e4, e6) = check_weight(weight)?;
    if limit == 0 {
        return invalid("coefficient limit must be at least 1");
    }
    Budget::check(
        "coefficient limit",
        limit as u64,
        budget.max_coefficient_limit as u64,
    )?;
    let series = match method {
        CoefficientMethod::Ntt => series_ntt(weight, limit, e4, e6)?,
        CoefficientMethod::Schoolbook => series_schoolbook(limit, e4, e6),
    };
    // a(n) is the coefficient of q^{n-1} in ∏(1-q^k)^24·E₄ⁱE₆ʲ
    let mut a = Vec::with_capacity(limit + 1);
    a.push(BigInt::zero());
    a.extend(series);
    Ok(EigenformTable::from_coefficients(weight, a))
}

fn eisenstein_scale(which: u32) -> i64 {
    if which == 4 {
        240
    } else {
        -504
    }
}

fn series_schoolbook(len: usize, e4: u32, e6: u32) -> Vec<BigInt> {
    let eta: Vec<(usize, i64)> = eta3_series(len as u64 - 1)
        .into_iter()
        .map(|(e, v)| (e as usize, v))
        .collect();
    let mut dense: Vec<BigInt> = vec![BigInt::zero(); len];
    for &(e, v) in &eta {
        dense[e] = BigInt::from(v);
    }
    for _ in 0..7 {
        let mut next = vec![BigInt::zero(); len];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = BigInt::zero();
            for &(e, v) in &eta {
                if e > i {
                    break;
                }
                acc += &dense[i - e] * v;
            }
            *slot = acc;
        }
        dense = next;
    }
    let factors = std::iter::repeat(4)
        .take(e4 as usize)
        .chain(std::iter::repeat(6).take(e6 as usize));
    for which in factors {
        let sums = divisor_power_sums(len, which - 1);
        let scale = eisenstein_scale(which);
        let mut eis = vec![BigInt::one(); len];
        for n in 1..len {
            eis[n] = BigInt::from(sums[n]) * scale;
        }
        let mut next = vec![BigInt::zero(); len];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = BigInt::zero();
            for j in 0..=i {
                acc += &dense[j] * &eis[i - j];
            }
            *slot = acc;
        }
        dense = next;
    }
    dense
}

fn signed_residue(v: i128, p: u64) -> u64 {
    v.rem_euclid(p as i128) as u64
}

/// Upper bound on |a(n)| for n ≤ limit: d(n)·n^{(k−1)/2} with d(n) ≤ 2√n.
fn coefficient_bound(weight: u32, limit: usize) -> BigUint {
    let root = BigUint::from(limit).sqrt() + 1u32;
    // 2·√limit·limit^{(k-1)/2} ≤ 2·(√limit+1)^k
    BigUint::from(2u32) * root.pow(weight)
}

fn series_ntt(weight: u32, len: usize, e4: u32, e6: u32) -> Result<Vec<BigInt>> {
    let bound = coefficient_bound(weight, len);
    // symmetric range needs M > 2·bound; one spare prime checks the result
    let needed_bits = bound.bits() + 2;
    let mut primes: Vec<NttPrime> = Vec::new();
    let mut bits = 0.0;
    while bits < needed_bits as f64 {
        primes = ntt::ntt_primes(primes.len() + 1);
        bits += (primes.last().unwrap().p as f64).log2();
    }
    primes = ntt::ntt_primes(primes.len() + 1);

    let eta = eta3_series(len as u64 - 1);
    let sigma3 = if e4 > 0 { divisor_power_sums(len, 3) } else { Vec::new() };
    let sigma5 = if e6 > 0 { divisor_power_sums(len, 5) } else { Vec::new() };

    let residues: Vec<Vec<u64>> = primes
        .par_iter()
        .map(|pr| {
            let p = pr.p;
            let mut eta_res = vec![0u64; len];
            for &(e, v) in &eta {
                eta_res[e as usize] = signed_residue(v as i128, p);
            }
            let mut series = eta_res;
            for _ in 0..3 {
                series = ntt::multiply_truncated(&series, &series, len, pr);
            }
            for (which, count) in [(4u32, e4), (6u32, e6)] {
                if count == 0 {
                    continue;
                }
                let sums = if which == 4 { &sigma3 } else { &sigma5 };
                let scale = signed_residue(eisenstein_scale(which) as i128, p);
                let mut eis = vec![1u64; len];
                for n in 1..len {
                    eis[n] = ntt::mul_mod((sums[n] % p as u128) as u64, scale, p);
                }
                for _ in 0..count {
                    series = ntt::multiply_truncated(&series, &eis, len, pr);
                }
            }
            series
        })
        .collect();

    let moduli: Vec<u64> = primes.iter().map(|pr| pr.p).collect();
    let crt = Garner::new(&moduli);
    let bound_int = BigInt::from(bound);
    let out: Vec<BigInt> = (0..len)
        .into_par_iter()
        .with_min_len(4096)
        .map(|i| {
            let r: Vec<u64> = residues.iter().map(|res| res[i]).collect();
            crt.reconstruct(&r)
        })
        .collect();
    if let Some(i) = out.iter().position(|x| x.abs() > bound_int) {
        return Err(Error::Internal(format!(
            "CRT reconstruction of coefficient {i} exceeds the coefficient bound"
        )));
    }
    Ok(out)
}

/// Mixed-radix Chinese remaindering into the symmetric range (−M/2, M/2].
struct Garner {
    moduli: Vec<u64>,
    /// inv[i][j] = m_j⁻¹ mod m_i for j < i
    inv: Vec<Vec<u64>>,
    modulus: BigUint,
    half: BigUint,
}

impl Garner {
    fn new(moduli: &[u64]) -> Self {
        let inv = (0..moduli.len())
            .map(|i| {
                (0..i)
                    .map(|j| ntt::pow_mod(moduli[j] % moduli[i], moduli[i] - 2, moduli[i]))
                    .collect()
            })
            .collect();
        let modulus = moduli
            .iter()
            .fold(BigUint::one(), |acc, &m| acc * BigUint::from(m));
        let half = &modulus >> 1;
        Garner {
            moduli: moduli.to_vec(),
            inv,
            modulus,
            half,
        }
    }

    fn reconstruct(&self, residues: &[u64]) -> BigInt {
        let k = self.moduli.len();
        let mut digits = vec![0u64; k];
        for i in 0..k {
            let m = self.moduli[i];
            let mut v = residues[i] % m;
            for j in 0..i {
                let dj = digits[j] % m;
                v = if v >= dj { v - dj } else { v + m - dj };
                v = ntt::mul_mod(v, self.inv[i][j], m);
            }
            digits[i] = v;
        }
        let mut x = BigUint::from(digits[k - 1]);
        for i in (0..k - 1).rev() {
            x = x * self.moduli[i] + digits[i];
        }
        if x > self.half {
            BigInt::from_biguint(Sign::Minus, &self.modulus - x)
        } else {
            BigInt::from_biguint(Sign::Plus, x)
        }
    }
}

impl EigenformTable {
    /// `a[0]` is ignored; `a[n]` is the n-th coefficient.
    pub fn from_coefficients(weight: u32, mut a: Vec<BigInt>) -> Self {
        if a.is_empty() {
            a.push(BigInt::zero());
        }
        a[0] = BigInt::zero();
        let limit = a.len() - 1;
        let exponent = (weight as f64 - 1.0) / 2.0;
        let lambda: Vec<f64> = a
            .par_iter()
            .enumerate()
            .map(|(n, c)| {
                if n == 0 {
                    0.0
                } else {
                    c.to_f64().unwrap_or(f64::NAN) / (n as f64).powf(exponent)
                }
            })
            .collect();
        EigenformTable {
            weight,
            limit,
            a,
            lambda,
        }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    #[inline]
    pub fn a(&self, n: usize) -> &BigInt {
        &self.a[n]
    }

    #[inline]
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n]
    }

    /// λ values with index 0 unused.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    fn check_index(&self, n: u64, what: &str) -> Result<()> {
        if n == 0 || n > self.limit as u64 {
            return invalid(format!(
                "{what} = {n} outside 1..={} of the coefficient table",
                self.limit
            ));
        }
        Ok(())
    }

    /// Hecke relation in integer form:
    /// a(m)a(n) = Σ_{d | gcd(m,n)} d^{k−1}·a(mn/d²).
    pub fn verify_hecke(&self, m: u64, n: u64) -> Result<bool> {
        self.check_index(m, "m")?;
        self.check_index(n, "n")?;
        let mn = m.checked_mul(n).unwrap_or(u64::MAX);
        self.check_index(mn, "m*n")?;
        let lhs = &self.a[m as usize] * &self.a[n as usize];
        let g = m.gcd(&n);
        let mut rhs = BigInt::zero();
        for d in (1..=g).filter(|d| g % d == 0) {
            let idx = (mn / (d * d)) as usize;
            rhs += BigInt::from(d).pow(self.weight - 1) * &self.a[idx];
        }
        Ok(lhs == rhs)
    }

    /// Checks the Hecke relation for every pair with m·n ≤ `max_product`.
    pub fn verify_hecke_all(&self, max_product: u64) -> Result<HeckeReport> {
        if max_product > self.limit as u64 {
            return invalid(format!(
                "max product {max_product} exceeds table limit {}",
                self.limit
            ));
        }
        let per_m: Vec<(u64, Vec<(u64, u64)>)> = (1..=max_product)
            .into_par_iter()
            .map(|m| {
                let mut checked = 0;
                let mut bad = Vec::new();
                for n in 1..=max_product / m {
                    checked += 1;
                    if !self.verify_hecke(m, n).unwrap_or(false) {
                        bad.push((m, n));
                    }
                }
                (checked, bad)
            })
            .collect();
        let mut report = HeckeReport {
            pairs_checked: 0,
            failures: Vec::new(),
        };
        for (c, bad) in per_m {
            report.pairs_checked += c;
            report.failures.extend(bad);
        }
        Ok(report)
    }

    /// First n ≤ `limit` with |λ(n)| > d(n)·(1 + 10⁻⁹), if any.
    pub fn deligne_violation(
        &self,
        tables: &MultiplicativeTables,
        limit: usize,
    ) -> Result<Option<DeligneViolation>> {
        if limit > self.limit || limit > tables.limit() {
            return invalid(format!(
                "Deligne scan to {limit} needs coefficient and sieve tables that large"
            ));
        }
        let found = (1..=limit).into_par_iter().find_first(|&n| {
            let bound = tables.divcount(n) as f64 * (1.0 + 1e-9);
            !(self.lambda[n].abs() <= bound)
        });
        Ok(found.map(|n| DeligneViolation {
            n,
            lambda: self.lambda[n],
            bound: tables.divcount(n),
        }))
    }

    pub fn write_cache<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&EIGEN_CACHE_VERSION.to_le_bytes())?;
        out.write_all(&self.weight.to_le_bytes())?;
        out.write_all(&(self.limit as u64).to_le_bytes())?;
        out.write_all(&[ENCODING_SIGNED_LE_U32_PREFIX])?;
        for c in &self.a[1..] {
            let bytes = c.to_signed_bytes_le();
            out.write_all(&(bytes.len() as u32).to_le_bytes())?;
            out.write_all(&bytes)?;
        }
        Ok(())
    }

    /// Reads a cache file and checks it against the expected weight and
    /// limit; any mismatch is a [`Error::Cache`].
    pub fn read_cache<R: Read>(mut input: R, weight: u32, limit: usize) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic for coefficient cache".into()));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != EIGEN_CACHE_VERSION {
            return Err(Error::Cache(format!(
                "coefficient cache version {version}, expected {EIGEN_CACHE_VERSION}"
            )));
        }
        input.read_exact(&mut word)?;
        let w = u32::from_le_bytes(word);
        let mut quad = [0u8; 8];
        input.read_exact(&mut quad)?;
        let l = u64::from_le_bytes(quad) as usize;
        if w != weight || l != limit {
            return Err(Error::Cache(format!(
                "cache holds weight {w} limit {l}, wanted weight {weight} limit {limit}"
            )));
        }
        let mut enc = [0u8; 1];
        input.read_exact(&mut enc)?;
        if enc[0] != ENCODING_SIGNED_LE_U32_PREFIX {
            return Err(Error::Cache(format!("unknown integer encoding {}", enc[0])));
        }
        let mut a = Vec::with_capacity(l + 1);
        a.push(BigInt::zero());
        let mut buf = Vec::new();
        for _ in 0..l {
            input.read_exact(&mut word)?;
            let len = u32::from_le_bytes(word) as usize;
            buf.resize(len, 0);
            input.read_exact(&mut buf)?;
            a.push(BigInt::from_signed_bytes_le(&buf));
        }
        Ok(EigenformTable::from_coefficients(w, a))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_cache(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path, weight: u32, limit: usize) -> Result<Self> {
        Self::read_cache(BufReader::new(File::open(path)?), weight, limit)
    }

    /// CSV with header `n,a,lambda`; λ is printed in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,a,lambda")?;
        for n in 1..=self.limit {
            writeln!(out, "{},{},{:?}", n, self.a[n], self.lambda[n])?;
        }
        Ok(())
    }
}
