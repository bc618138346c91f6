//! The quaternary polynomials α, α₁, α₂: evaluation, point enumeration and
//! representation numbers δ₄(n) = #{x ∈ Z⁴ : poly(x) = n}.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::MultiplicativeTables;
use crate::error::{invalid, Budget, Error, Result};
use crate::ntt::{multiply_truncated, ntt_primes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolynomialKind {
    /// T(x₁) + T(x₂) + 2T(x₃) + 4T(x₄)
    Alpha,
    /// x₁² + 2x₂² + 2(x₃²+x₃) + 2(x₄²+x₄)
    Alpha1,
    /// x₁² + (x₂²+x₂) + (x₃²+x₃) + 2(x₄²+x₄)
    Alpha2,
}

/// One coordinate's contribution g(x) before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// x²
    Square,
    /// T(x) = x(x+1)/2
    Triangular,
}

impl PolynomialKind {
    pub const ALL: [PolynomialKind; 3] = [
        PolynomialKind::Alpha,
        PolynomialKind::Alpha1,
        PolynomialKind::Alpha2,
    ];

    /// (weight, shape) per coordinate, so that poly(x) = Σ wᵢ·gᵢ(xᵢ).
    pub fn terms(self) -> [(u64, Shape); 4] {
        use Shape::*;
        match self {
            PolynomialKind::Alpha => [(1, Triangular), (1, Triangular), (2, Triangular), (4, Triangular)],
            PolynomialKind::Alpha1 => [(1, Square), (2, Square), (4, Triangular), (4, Triangular)],
            PolynomialKind::Alpha2 => [(1, Square), (2, Triangular), (2, Triangular), (4, Triangular)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolynomialKind::Alpha => "alpha",
            PolynomialKind::Alpha1 => "alpha1",
            PolynomialKind::Alpha2 => "alpha2",
        }
    }
}

impl fmt::Display for PolynomialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolynomialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(PolynomialKind::Alpha),
            "alpha1" => Ok(PolynomialKind::Alpha1),
            "alpha2" => Ok(PolynomialKind::Alpha2),
            other => invalid(format!(
                "unknown polynomial {other:?}; expected alpha, alpha1 or alpha2"
            )),
        }
    }
}

fn shape_value(shape: Shape, x: i128) -> Option<i128> {
    match shape {
        Shape::Square => x.checked_mul(x),
        Shape::Triangular => x.checked_mul(x + 1).map(|v| v / 2),
    }
}

/// Exact value of the polynomial at an integer point.
pub fn poly_value(kind: PolynomialKind, x: [i64; 4]) -> Result<u64> {
    let mut total: i128 = 0;
    for ((w, shape), xi) in kind.terms().into_iter().zip(x) {
        let term = shape_value(shape, xi as i128)
            .and_then(|g| g.checked_mul(w as i128))
            .and_then(|t| total.checked_add(t));
        total = match term {
            Some(t) if t <= i64::MAX as i128 => t,
            _ => return invalid(format!("{kind} value at {x:?} overflows 63 bits")),
        };
    }
    Ok(total as u64)
}

/// Largest k ≥ 0 with k(k+1)/2 ≤ m.
fn triangular_index(m: u64) -> u64 {
    let mut k = (((8.0 * m as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while k * (k + 1) / 2 > m {
        k -= 1;
    }
    while (k + 1) * (k + 2) / 2 <= m {
        k += 1;
    }
    k
}

fn isqrt(m: u64) -> u64 {
    let mut k = (m as f64).sqrt() as u64;
    while k * k > m {
        k -= 1;
    }
    while (k + 1) * (k + 1) <= m {
        k += 1;
    }
    k
}

/// Integer range of a coordinate whose weighted term is at most `budget`.
fn coordinate_range(weight: u64, shape: Shape, budget: u64) -> (i64, i64) {
    let m = budget / weight;
    match shape {
        Shape::Square => {
            let k = isqrt(m) as i64;
            (-k, k)
        }
        Shape::Triangular => {
            let k = triangular_index(m) as i64;
            (-1 - k, k)
        }
    }
}

/// Distinct weighted values of one coordinate up to `max_value`, ascending,
/// with the number of integers taking each value. Triangular coordinates
/// take every value twice (x and −1−x); squares twice except at 0.
fn coordinate_values(weight: u64, shape: Shape, max_value: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for k in 0u64.. {
        let g = match shape {
            Shape::Square => k * k,
            Shape::Triangular => k * (k + 1) / 2,
        };
        let v = g * weight;
        if v > max_value {
            break;
        }
        let mult = if shape == Shape::Square && k == 0 { 1 } else { 2 };
        out.push((v, mult));
    }
    out
}

struct ValueLists([Vec<(u64, u64)>; 4]);

impl ValueLists {
    fn new(kind: PolynomialKind, max_value: u64) -> Self {
        let t = kind.terms();
        ValueLists(std::array::from_fn(|i| {
            coordinate_values(t[i].0, t[i].1, max_value)
        }))
    }

    /// Calls `f(value, multiplicity)` for every tuple of coordinate values
    /// whose first entry is `self.0[0][first]` and whose total is at most
    /// `max_value`.
    #[inline]
    fn walk_from(&self, first: usize, max_value: u64, f: &mut impl FnMut(u64, u64)) {
        let [l0, l1, l2, l3] = &self.0;
        let (v0, m0) = l0[first];
        for &(v1, m1) in l1 {
            let s1 = v0 + v1;
            if s1 > max_value {
                break;
            }
            let m01 = m0 * m1;
            for &(v2, m2) in l2 {
                let s2 = s1 + v2;
                if s2 > max_value {
                    break;
                }
                let m012 = m01 * m2;
                for &(v3, m3) in l3 {
                    let s3 = s2 + v3;
                    if s3 > max_value {
                        break;
                    }
                    f(s3, m012 * m3);
                }
            }
        }
    }
}

/// Runs `fold` over every weighted value tuple with total ≤ `max_value`,
/// partitioned by the first coordinate's value. Returns one accumulator per
/// partition, in ascending order of that value, independent of the thread
/// count.
pub fn fold_by_first_coordinate<T, I, F>(
    kind: PolynomialKind,
    max_value: u64,
    init: I,
    fold: F,
) -> Vec<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, u64, u64) + Sync,
{
    let lists = ValueLists::new(kind, max_value);
    (0..lists.0[0].len())
        .into_par_iter()
        .map(|i| {
            let mut acc = init();
            lists.walk_from(i, max_value, &mut |v, m| fold(&mut acc, v, m));
            acc
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepTable {
    pub kind: PolynomialKind,
    pub limit: u64,
    /// counts[n] = δ₄(kind; n) for n in 0..=limit.
    pub counts: Vec<u64>,
}

impl RepTable {
    /// Rows n, δ₄(n), σ(n+1), δ₄(n)/σ(n+1) (reduced fraction, or "inf" when
    /// σ vanishes) for n in 0..=limit.
    pub fn write_csv<W: Write>(&self, tables: &MultiplicativeTables, mut out: W) -> Result<()> {
        if (tables.limit() as u64) < self.limit + 1 {
            return invalid("sigma table too short for the representation table");
        }
        writeln!(out, "n,count,sigma,ratio")?;
        for (n, &count) in self.counts.iter().enumerate() {
            let sigma = tables.sigma(n + 1);
            let ratio = if sigma > 0 {
                let q = Ratio::new(count, sigma as u64);
                if q.is_integer() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            } else {
                "inf".to_string()
            };
            writeln!(out, "{n},{count},{sigma},{ratio}")?;
        }
        Ok(())
    }
}

pub fn rep_counts(kind: PolynomialKind, limit: u64) -> Result<RepTable> {
    rep_counts_with_budget(kind, limit, &Budget::default())
}

pub fn rep_counts_with_budget(kind: PolynomialKind, limit: u64, budget: &Budget) -> Result<RepTable> {
    Budget::check("lattice bound", limit, budget.max_lattice_bound)?;
    let lists = ValueLists::new(kind, limit);
    let len = limit as usize + 1;
    let pair = |a: &[(u64, u64)], b: &[(u64, u64)]| {
        let mut out = vec![0u64; len];
        for &(va, ma) in a {
            for &(vb, mb) in b {
                let v = va + vb;
                if v > limit {
                    break;
                }
                out[v as usize] += ma * mb;
            }
        }
        out
    };
    let [l0, l1, l2, l3] = &lists.0;
    let front = pair(l0, l1);
    let back = pair(l2, l3);
    // every count is at most 16·σ(n+1) < 2⁴⁰, far below the NTT prime
    let prime = &ntt_primes(1)[0];
    let counts = multiply_truncated(&front, &back, len, prime);
    Ok(RepTable {
        kind,
        limit,
        counts,
    })
}

/// Same counts as [`rep_counts`], by walking every tuple of coordinate
/// values instead of convolving.
pub fn rep_counts_by_enumeration(kind: PolynomialKind, limit: u64) -> Result<RepTable> {
    Budget::check("lattice bound", limit, Budget::default().max_lattice_bound)?;
    let lists = ValueLists::new(kind, limit);
    let len = limit as usize + 1;
    let counts = (0..lists.0[0].len())
        .into_par_iter()
        .fold(
            || vec![0u64; len],
            |mut acc, i| {
                lists.walk_from(i, limit, &mut |v, m| acc[v as usize] += m);
                acc
            },
        )
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(RepTable {
        kind,
        limit,
        counts,
    })
}

/// Where the proportionality δ₄(n−1) = c·σ(n) first breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepIdentityFailure {
    pub n: u64,
    pub count: u64,
    pub sigma: i64,
    /// The constant implied by the entries before `n`, if any.
    pub expected_c: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepIdentityOutcome {
    Consistent { c: Ratio<u64>, checked: u64 },
    Inconsistent(RepIdentityFailure),
}

/// Finds the single rational c with counts[n−1] = c·σ(n) for every
/// 1 ≤ n ≤ limit+1, or the first n where no such c exists.
pub fn verify_rep_identity(
    table: &RepTable,
    sigma: &MultiplicativeTables,
) -> Result<RepIdentityOutcome> {
    if table.limit < 2 {
        return invalid("representation identity needs limit ≥ 2");
    }
    if (sigma.limit() as u64) < table.limit + 1 {
        return invalid(format!(
            "sigma table to {} cannot cover n = {}",
            sigma.limit(),
            table.limit + 1
        ));
    }
    let first = table.counts[0];
    let s1 = sigma.sigma(1);
    if first == 0 || s1 <= 0 {
        return Ok(RepIdentityOutcome::Inconsistent(RepIdentityFailure {
            n: 1,
            count: first,
            sigma: s1,
            expected_c: None,
        }));
    }
    let c = Ratio::new(first, s1 as u64);
    for n in 2..=table.limit + 1 {
        let count = table.counts[n as usize - 1];
        let s = sigma.sigma(n as usize);
        let consistent = s > 0
            && count as u128 * *c.denom() as u128 == *c.numer() as u128 * s as u128;
        if !consistent {
            return Ok(RepIdentityOutcome::Inconsistent(RepIdentityFailure {
                n,
                count,
                sigma: s,
                expected_c: Some((*c.numer(), *c.denom())),
            }));
        }
    }
    Ok(RepIdentityOutcome::Consistent {
        c,
        checked: table.limit + 1,
    })
}

/// Lexicographic iterator over the points x ∈ Z⁴ with poly(x) + 1 ≤ bound,
/// yielding (poly(x), x).
#[derive(Debug, Clone)]
pub struct PointIter {
    terms: [(u64, Shape); 4],
    budget: u64,
    x: [i64; 4],
    hi: [i64; 4],
    /// partial[i] = Σ_{j<i} term_j(x_j)
    partial: [u64; 5],
    done: bool,
}

pub fn enumerate_values(kind: PolynomialKind, bound: u64) -> PointIter {
    let terms = kind.terms();
    let mut it = PointIter {
        terms,
        budget: bound.saturating_sub(1),
        x: [0; 4],
        hi: [0; 4],
        partial: [0; 5],
        done: bound == 0,
    };
    if !it.done {
        it.reset_from(0);
    }
    it
}

impl PointIter {
    fn term(&self, i: usize, x: i64) -> u64 {
        let (w, shape) = self.terms[i];
        let g = match shape {
            Shape::Square => (x * x) as u64,
            Shape::Triangular => (x * (x + 1) / 2) as u64,
        };
        w * g
    }

    /// Puts coordinates `level..` at the low end of their ranges.
    fn reset_from(&mut self, level: usize) {
        for i in level..4 {
            let (w, shape) = self.terms[i];
            let (lo, hi) = coordinate_range(w, shape, self.budget - self.partial[i]);
            self.x[i] = lo;
            self.hi[i] = hi;
            self.partial[i + 1] = self.partial[i] + self.term(i, lo);
        }
    }
}

impl Iterator for PointIter {
    type Item = (u64, [i64; 4]);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = (self.partial[4], self.x);
        // odometer step from the last coordinate
        let mut level = 4;
        loop {
            if level == 0 {
                self.done = true;
                break;
            }
            level -= 1;
            if self.x[level] < self.hi[level] {
                self.x[level] += 1;
                self.partial[level + 1] = self.partial[level] + self.term(level, self.x[level]);
                self.reset_from(level + 1);
                break;
            }
        }
        Some(item)
    }
}
