//! Sieved elementary arithmetic: the character χ₈, the twisted divisor sum
//! σ(n) = Σ_{d|n} χ₈(d)·n/d, the square-free indicator and the divisor count.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{invalid, Budget, Error, Result};

/// Fixed-size bit array.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitArray {
    words: Vec<u64>,
    len: usize,
}

impl BitArray {
    fn zeros(len: usize) -> Self {
        BitArray {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Number of set bits with index in `lo..=hi`.
    fn count_ones(&self, lo: usize, hi: usize) -> usize {
        (lo..=hi).filter(|&i| self.get(i)).count()
    }
}

/// Real primitive character modulo 8, the Jacobi symbol (8/n).
#[inline]
pub fn chi8(n: u64) -> i8 {
    match n % 8 {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    }
}

/// Primes up to `n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Immutable sieve output for 1..=limit. Index 0 of every array is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeTables {
    limit: usize,
    chi8: Vec<i8>,
    sigma: Vec<i64>,
    squarefree: BitArray,
    divcount: Vec<u32>,
    primes: Vec<u64>,
}

const CACHE_MAGIC: &[u8; 8] = b"HMTABLES";
pub const TABLE_CACHE_VERSION: u32 = 1;

impl MultiplicativeTables {
    pub fn build(limit: usize) -> Result<Self> {
        Self::build_with_budget(limit, &Budget::default())
    }

    /// Linear sieve over 1..=limit. Every n is split as p^k·m with p its
    /// smallest prime factor; prime-power values come from a recurrence and
    /// the rest from multiplicativity.
    pub fn build_with_budget(limit: usize, budget: &Budget) -> Result<Self> {
        if limit == 0 {
            return invalid("table limit must be at least 1");
        }
        Budget::check("table limit", limit as u64, budget.max_table_limit as u64)?;

        let n1 = limit + 1;
        // smallest prime factor and the full power of it dividing n
        let mut spf = vec![0u32; n1];
        let mut spf_power = vec![0u32; n1];
        let mut primes: Vec<u64> = Vec::new();
        for n in 2..=limit {
            if spf[n] == 0 {
                spf[n] = n as u32;
                spf_power[n] = n as u32;
                primes.push(n as u64);
            }
            let p_n = spf[n] as u64;
            for &p in &primes {
                let m = p as usize * n;
                if p > p_n || m > limit {
                    break;
                }
                spf[m] = p as u32;
                spf_power[m] = if p == p_n {
                    spf_power[n] * p as u32
                } else {
                    p as u32
                };
            }
        }

        let mut chi = vec![0i8; n1];
        let mut sigma = vec![0i64; n1];
        let mut divcount = vec![0u32; n1];
        let mut squarefree = BitArray::zeros(n1);
        sigma[1] = 1;
        divcount[1] = 1;
        squarefree.set(1, true);
        for n in 1..=limit {
            chi[n] = chi8(n as u64);
        }
        for n in 2..=limit {
            let q = spf_power[n] as usize;
            let m = n / q;
            if m == 1 {
                let p = spf[n] as usize;
                let prev = n / p;
                // σ(p^k) = p·σ(p^{k-1}) + χ(p)^k
                sigma[n] = p as i64 * sigma[prev] + chi[n] as i64;
                divcount[n] = divcount[prev] + 1;
                squarefree.set(n, prev == 1);
            } else {
                sigma[n] = sigma[q] * sigma[m];
                divcount[n] = divcount[q] * divcount[m];
                let sf = squarefree.get(q) && squarefree.get(m);
                squarefree.set(n, sf);
            }
        }

        Ok(MultiplicativeTables {
            limit,
            chi8: chi,
            sigma,
            squarefree,
            divcount,
            primes,
        })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    #[inline]
    pub fn chi8(&self, n: usize) -> i8 {
        self.chi8[n]
    }

    /// σ_{1;χ₈,1}(n).
    #[inline]
    pub fn sigma(&self, n: usize) -> i64 {
        self.sigma[n]
    }

    #[inline]
    pub fn is_squarefree(&self, n: usize) -> bool {
        self.squarefree.get(n)
    }

    #[inline]
    pub fn divcount(&self, n: usize) -> u32 {
        self.divcount[n]
    }

    /// Primes up to `limit`, ascending.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn sigma_slice(&self) -> &[i64] {
        &self.sigma
    }

    pub fn divcount_slice(&self) -> &[u32] {
        &self.divcount
    }

    pub fn squarefree_count(&self, x: usize) -> usize {
        self.squarefree.count_ones(1, x.min(self.limit))
    }

    /// Binary cache: magic, format version, limit, then chi8 (i8), sigma
    /// (i64 LE), squarefree (one byte per entry), divcount (u32 LE), all for
    /// n = 1..=limit. Primes are recovered on load.
    pub fn write_cache<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&TABLE_CACHE_VERSION.to_le_bytes())?;
        out.write_all(&(self.limit as u64).to_le_bytes())?;
        let chi: Vec<u8> = self.chi8[1..].iter().map(|&c| c as u8).collect();
        out.write_all(&chi)?;
        for s in &self.sigma[1..] {
            out.write_all(&s.to_le_bytes())?;
        }
        let sf: Vec<u8> = (1..=self.limit).map(|n| self.squarefree.get(n) as u8).collect();
        out.write_all(&sf)?;
        for d in &self.divcount[1..] {
            out.write_all(&d.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic for multiplicative table".into()));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != TABLE_CACHE_VERSION {
            return Err(Error::Cache(format!(
                "table format version {version}, expected {TABLE_CACHE_VERSION}"
            )));
        }
        let mut quad = [0u8; 8];
        input.read_exact(&mut quad)?;
        let limit = u64::from_le_bytes(quad) as usize;
        if limit == 0 {
            return Err(Error::Cache("zero limit in table cache".into()));
        }

        let mut chi_raw = vec![0u8; limit];
        input.read_exact(&mut chi_raw)?;
        let mut chi = Vec::with_capacity(limit + 1);
        chi.push(0i8);
        chi.extend(chi_raw.iter().map(|&b| b as i8));

        let mut sigma = Vec::with_capacity(limit + 1);
        sigma.push(0i64);
        for _ in 0..limit {
            input.read_exact(&mut quad)?;
            sigma.push(i64::from_le_bytes(quad));
        }

        let mut sf_raw = vec![0u8; limit];
        input.read_exact(&mut sf_raw)?;
        let mut squarefree = BitArray::zeros(limit + 1);
        for (i, &b) in sf_raw.iter().enumerate() {
            squarefree.set(i + 1, b != 0);
        }

        let mut divcount = Vec::with_capacity(limit + 1);
        divcount.push(0u32);
        for _ in 0..limit {
            input.read_exact(&mut word)?;
            divcount.push(u32::from_le_bytes(word));
        }

        let primes = (2..=limit)
            .filter(|&n| divcount[n] == 2)
            .map(|n| n as u64)
            .collect();
        Ok(MultiplicativeTables {
            limit,
            chi8: chi,
            sigma,
            squarefree,
            divcount,
            primes,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_cache(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_cache(BufReader::new(File::open(path)?))
    }

    /// CSV with header `n,chi8,sigma,squarefree,divcount`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,chi8,sigma,squarefree,divcount")?;
        for n in 1..=self.limit {
            writeln!(
                out,
                "{},{},{},{},{}",
                n,
                self.chi8[n],
                self.sigma[n],
                self.squarefree.get(n) as u8,
                self.divcount[n]
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sigma_brute(n: u64) -> i64 {
        (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| chi8(d) as i64 * (n / d) as i64)
            .sum()
    }

    #[test]
    fn chi8_values() {
        assert_eq!(chi8(1), 1);
        assert_eq!(chi8(3), -1);
        assert_eq!(chi8(6), 0);
        let pattern: Vec<i8> = (1..=8).map(chi8).collect();
        assert_eq!(pattern, vec![1, 0, -1, 0, -1, 0, 1, 0]);
    }

    #[test]
    fn eratosthenes_matches_linear_sieve() {
        let t = MultiplicativeTables::build(50_000).unwrap();
        assert_eq!(primes_up_to(50_000), t.primes());
        assert!(primes_up_to(1).is_empty());
        assert_eq!(primes_up_to(2), vec![2]);
    }

    #[test]
    fn small_sigma_values() {
        let t = MultiplicativeTables::build(100).unwrap();
        assert_eq!(t.sigma(1), 1);
        assert_eq!(t.sigma(5), 4);
        assert_eq!(t.sigma(15), 8);
        assert_eq!(t.sigma(15), t.sigma(3) * t.sigma(5));
    }

    #[test]
    fn sieve_matches_divisor_loop() {
        let t = MultiplicativeTables::build(10_000).unwrap();
        for n in 1..=10_000u64 {
            assert_eq!(t.sigma(n as usize), sigma_brute(n), "sigma({n})");
            let d = (1..=n).filter(|d| n % d == 0).count() as u32;
            assert_eq!(t.divcount(n as usize), d, "d({n})");
            let sf = (2..=n).take_while(|p| p * p <= n).all(|p| n % (p * p) != 0);
            assert_eq!(t.is_squarefree(n as usize), sf, "squarefree({n})");
        }
    }

    #[test]
    fn primes_list() {
        let t = MultiplicativeTables::build(30).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn squarefree_density() {
        let t = MultiplicativeTables::build(1_000_000).unwrap();
        let ratio = t.squarefree_count(1_000_000) as f64 / 1e6;
        assert!((ratio - 0.6079).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn rejects_bad_limits() {
        assert!(matches!(
            MultiplicativeTables::build(0),
            Err(Error::InvalidArgument(_))
        ));
        let tiny = Budget {
            max_table_limit: 10,
            ..Budget::default()
        };
        assert!(matches!(
            MultiplicativeTables::build_with_budget(11, &tiny),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn cache_round_trip_and_rejection() {
        let t = MultiplicativeTables::build(500).unwrap();
        let mut buf = Vec::new();
        t.write_cache(&mut buf).unwrap();
        assert_eq!(MultiplicativeTables::read_cache(&buf[..]).unwrap(), t);

        let mut bad = buf.clone();
        bad[8] = 99;
        assert!(matches!(
            MultiplicativeTables::read_cache(&bad[..]),
            Err(Error::Cache(_))
        ));
    }

    #[test]
    fn csv_rows() {
        let t = MultiplicativeTables::build(4).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,chi8,sigma,squarefree,divcount\n1,1,1,1,1\n2,0,2,1,2\n3,-1,2,1,2\n4,0,4,0,3\n"
        );
    }

    proptest! {
        #[test]
        fn chi8_completely_multiplicative(m in 1u64..1000, n in 1u64..1000) {
            prop_assert_eq!(chi8(m * n), chi8(m) * chi8(n));
        }

        #[test]
        fn sigma_multiplicative(m in 1usize..300, n in 1usize..300) {
            static TABLES: std::sync::OnceLock<MultiplicativeTables> = std::sync::OnceLock::new();
            let t = TABLES.get_or_init(|| MultiplicativeTables::build(90_000).unwrap());
            if num_integer::gcd(m, n) == 1 {
                prop_assert_eq!(t.sigma(m * n), t.sigma(m) * t.sigma(n));
            }
        }
    }
}
