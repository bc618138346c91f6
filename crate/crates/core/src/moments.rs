//! Square-free power moments S_r(X) = Σ♭_{n ≤ X} λ(n)^r σ(n), computed from
//! the sieve tables or by summing λ(α(x)+1)^r over lattice points, and the
//! regressions used to compare them with the predicted growth.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::MultiplicativeTables;
use crate::eigenform::EigenformTable;
use crate::error::{invalid, Error, Result};
use crate::lattice::{
    fold_by_first_coordinate, rep_counts, verify_rep_identity, PolynomialKind, RepIdentityOutcome,
};
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sieve,
    Lattice,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sieve => "sieve",
            Method::Lattice => "lattice",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sieve" => Ok(Method::Sieve),
            "lattice" => Ok(Method::Lattice),
            other => invalid(format!("unknown method {other:?}; expected sieve or lattice")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSeries {
    pub r: u32,
    pub method: Method,
    pub weight: u32,
    /// The lattice constant c dividing raw lattice sums; 1 for the sieve.
    pub normalization: f64,
    /// (X, S_r(X)), strictly increasing in X. Lattice values are normalized.
    pub checkpoints: Vec<(u64, f64)>,
}

impl MomentSeries {
    pub fn window(&self, lo: u64, hi: u64) -> Vec<(u64, f64)> {
        self.checkpoints
            .iter()
            .copied()
            .filter(|&(x, _)| lo <= x && x <= hi)
            .collect()
    }

    pub fn max_x(&self) -> u64 {
        self.checkpoints.last().map_or(0, |c| c.0)
    }

    /// Columns r, method, X, S, normalization; floats in shortest
    /// round-trip form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "r,method,X,S,normalization")?;
        for (x, s) in &self.checkpoints {
            writeln!(
                out,
                "{},{},{},{:?},{:?}",
                self.r, self.method, x, s, self.normalization
            )?;
        }
        Ok(())
    }
}

/// Geometric checkpoints X = ⌈10^{start + k/per_decade}⌉ up to `max_x`, with
/// `max_x` itself appended when it is not on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointSchedule {
    pub start_exponent: u32,
    pub per_decade: u32,
    pub max_x: u64,
}

impl CheckpointSchedule {
    pub fn new(max_x: u64) -> Self {
        CheckpointSchedule {
            start_exponent: 3,
            per_decade: 8,
            max_x,
        }
    }

    pub fn points(&self) -> Vec<u64> {
        let mut out = Vec::new();
        if self.max_x == 0 {
            return out;
        }
        for k in 0u32.. {
            let e = self.start_exponent as f64 + k as f64 / self.per_decade as f64;
            let v = 10f64.powf(e);
            let x = if (v - v.round()).abs() < 1e-6 {
                v.round() as u64
            } else {
                v.ceil() as u64
            };
            if x > self.max_x {
                break;
            }
            if out.last() != Some(&x) {
                out.push(x);
            }
        }
        if out.last() != Some(&self.max_x) {
            out.push(self.max_x);
        }
        out
    }
}

fn check_checkpoints(points: &[u64]) -> Result<()> {
    if points.is_empty() || points[0] == 0 {
        return invalid("checkpoints must be non-empty and start at X ≥ 1");
    }
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("checkpoints must be strictly increasing");
    }
    Ok(())
}

fn check_coverage(x: u64, tables: &MultiplicativeTables, eigen: &EigenformTable) -> Result<()> {
    if x as usize > tables.limit() || x as usize > eigen.limit() {
        return invalid(format!(
            "X = {x} exceeds the sieve ({}) or coefficient ({}) table",
            tables.limit(),
            eigen.limit()
        ));
    }
    Ok(())
}

/// S_r(X) from the tables, summed in order with compensation.
pub fn moment_sum_sieve(
    r: u32,
    x: u64,
    tables: &MultiplicativeTables,
    eigen: &EigenformTable,
) -> Result<f64> {
    let s = moment_series_sieve(r, &[x], tables, eigen)?;
    Ok(s.checkpoints[0].1)
}

/// S_r at every checkpoint. Terms are evaluated in parallel; the prefix sum
/// runs sequentially so the output does not depend on the thread count.
pub fn moment_series_sieve(
    r: u32,
    checkpoints: &[u64],
    tables: &MultiplicativeTables,
    eigen: &EigenformTable,
) -> Result<MomentSeries> {
    if r == 0 {
        return invalid("moment order r must be at least 1");
    }
    check_checkpoints(checkpoints)?;
    let max_x = *checkpoints.last().unwrap();
    check_coverage(max_x, tables, eigen)?;
    let lambdas = eigen.lambdas();
    let sigma = tables.sigma_slice();
    let terms: Vec<f64> = (1..=max_x as usize)
        .into_par_iter()
        .map(|n| {
            if tables.is_squarefree(n) {
                lambdas[n].powi(r as i32) * sigma[n] as f64
            } else {
                0.0
            }
        })
        .collect();
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for (i, t) in terms.iter().enumerate() {
        acc.add(*t);
        let n = i as u64 + 1;
        while let Some(&&x) = next.peek() {
            if x != n {
                break;
            }
            out.push((x, acc.value()));
            next.next();
        }
    }
    Ok(MomentSeries {
        r,
        method: Method::Sieve,
        weight: eigen.weight(),
        normalization: 1.0,
        checkpoints: out,
    })
}

/// Measures c with δ₄(kind; n−1) = c·σ(n) on n ≤ min(limit, 1001).
pub fn lattice_constant(kind: PolynomialKind, tables: &MultiplicativeTables) -> Result<Ratio<u64>> {
    let limit = (tables.limit() as u64).min(1001).saturating_sub(1);
    if limit < 2 {
        return invalid("measuring the lattice constant needs a sieve table to n ≥ 3");
    }
    match verify_rep_identity(&rep_counts(kind, limit)?, tables)? {
        RepIdentityOutcome::Consistent { c, .. } => Ok(c),
        RepIdentityOutcome::Inconsistent(f) => Err(Error::Internal(format!(
            "{kind} counts are not proportional to σ: first break at n = {}",
            f.n
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeMoment {
    pub raw: f64,
    pub normalized: f64,
    pub c: Ratio<u64>,
}

/// Σ over x with α(x)+1 ≤ X and α(x)+1 square-free of λ(α(x)+1)^r, raw and
/// divided by the measured c.
pub fn moment_sum_lattice(
    r: u32,
    x: u64,
    kind: PolynomialKind,
    tables: &MultiplicativeTables,
    eigen: &EigenformTable,
) -> Result<LatticeMoment> {
    let (raw, c) = lattice_raw_series(r, &[x], kind, tables, eigen)?;
    let c_f = *c.numer() as f64 / *c.denom() as f64;
    Ok(LatticeMoment {
        raw: raw[0],
        normalized: raw[0] / c_f,
        c,
    })
}

fn lattice_raw_series(
    r: u32,
    checkpoints: &[u64],
    kind: PolynomialKind,
    tables: &MultiplicativeTables,
    eigen: &EigenformTable,
) -> Result<(Vec<f64>, Ratio<u64>)> {
    if r == 0 {
        return invalid("moment order r must be at least 1");
    }
    check_checkpoints(checkpoints)?;
    let max_x = *checkpoints.last().unwrap();
    check_coverage(max_x, tables, eigen)?;
    crate::error::Budget::check(
        "lattice bound",
        max_x,
        crate::error::Budget::default().max_lattice_bound,
    )?;
    let c = lattice_constant(kind, tables)?;
    let lambdas = eigen.lambdas();
    let buckets = checkpoints.len();
    // bucket b holds n in (checkpoints[b−1], checkpoints[b]]
    let partials = fold_by_first_coordinate(
        kind,
        max_x - 1,
        || vec![CompensatedSum::new(); buckets],
        |acc, v, mult| {
            let n = v as usize + 1;
            if tables.is_squarefree(n) {
                let b = checkpoints.partition_point(|&x| x < n as u64);
                acc[b].add(mult as f64 * lambdas[n].powi(r as i32));
            }
        },
    );
    let mut totals = vec![CompensatedSum::new(); buckets];
    for part in &partials {
        for (t, p) in totals.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    let mut running = CompensatedSum::new();
    let raw = totals
        .iter()
        .map(|t| {
            running.merge(t);
            running.value()
        })
        .collect();
    Ok((raw, c))
}

/// Lattice-side S_r at every checkpoint, divided by the measured c.
pub fn moment_series_lattice(
    r: u32,
    checkpoints: &[u64],
    kind: PolynomialKind,
    tables: &MultiplicativeTables,
    eigen: &EigenformTable,
) -> Result<MomentSeries> {
    let (raw, c) = lattice_raw_series(r, checkpoints, kind, tables, eigen)?;
    let c_f = *c.numer() as f64 / *c.denom() as f64;
    Ok(MomentSeries {
        r,
        method: Method::Lattice,
        weight: eigen.weight(),
        normalization: c_f,
        checkpoints: checkpoints
            .iter()
            .zip(raw)
            .map(|(&x, s)| (x, s / c_f))
            .collect(),
    })
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        0
    } else {
        num_integer::binomial(n, k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub r: u32,
    pub main_term: bool,
    /// Degree (1/m)·C(r,m) − 1 of P_r for r = 2m, as stated; not always an
    /// integer (r = 6 gives 17/3).
    pub d_r: Option<(i64, i64)>,
    /// Pole order of R_r at s = 2 minus one: C(2m,m)/(m+1) − 1.
    pub d_r_pole_order: Option<i64>,
    pub gamma_r: (i64, i64),
    pub gamma_r_value: f64,
    pub error_exponent: f64,
    pub notes: Vec<String>,
}

fn ratio_pair(q: Ratio<i64>) -> (i64, i64) {
    (*q.numer(), *q.denom())
}

/// Summands with 1/n at n = 0 multiply C(·, −1) = 0 and are taken as 0.
fn gamma(r: u32) -> Ratio<i64> {
    let rr = r as i64;
    let q = |a: i64, b: i64| Ratio::new(a, b);
    if r % 2 == 0 {
        let m = rr / 2;
        let mut g = q(13, 82 * m) * binom(2 * m, m - 1) + q(15, 8 * (m - 1)) * binom(2 * m, m - 2);
        let mut sum = Ratio::from_integer(0);
        for n in 1..=m - 2 {
            sum += q((2 * m - 2 * n + 1).pow(2), n) * binom(2 * m, n - 1);
        }
        g += sum * q(1, 4);
        g
    } else {
        let m = (rr - 1) / 2;
        let mut g = q(2, 3 * m) * binom(2 * m + 1, m - 1);
        let mut sum = Ratio::from_integer(0);
        for n in 1..=m - 1 {
            sum += q((2 * m + 2 - 2 * n).pow(2), n) * binom(2 * m + 1, n - 1);
        }
        g += sum * q(1, 4);
        g - q(5, 6)
    }
}

pub fn predicted_exponents(r: u32) -> Result<AsymptoticPrediction> {
    if r < 3 {
        return invalid(format!("predictions cover r ≥ 3, got r = {r}"));
    }
    let g = gamma(r);
    let g_f = *g.numer() as f64 / *g.denom() as f64;
    let mut notes = vec!["summands with 1/n at n = 0 are taken as 0".to_string()];
    let (main_term, d_r, d_pole) = if r % 2 == 0 {
        let m = r as i64 / 2;
        let d = Ratio::new(binom(r as i64, m), m) - 1;
        if !d.is_integer() {
            notes.push(format!("stated degree {d} is not an integer"));
        }
        let pole = binom(2 * m, m) / (m + 1) - 1;
        (true, Some(ratio_pair(d)), Some(pole))
    } else {
        notes.push("no main term (odd r)".to_string());
        (false, None, None)
    };
    if g_f < 0.0 {
        notes.push(format!(
            "gamma_r = {g} is negative; the error exponent then falls below 3/2"
        ));
    }
    Ok(AsymptoticPrediction {
        r,
        main_term,
        d_r,
        d_r_pole_order: d_pole,
        gamma_r: ratio_pair(g),
        gamma_r_value: g_f,
        error_exponent: 2.0 - 1.0 / (2.0 * (1.0 + g_f)),
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_std_error: f64,
    pub points: usize,
}

/// Least-squares line through (ln x, ln y).
fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let se = if points.len() > 2 { (rss / (n - 2.0)).sqrt() } else { 0.0 };
    (slope, intercept, se)
}

/// Slope of ln|S| against ln X over checkpoints with lo ≤ X ≤ hi and S ≠ 0.
pub fn growth_exponent(series: &MomentSeries, lo: u64, hi: u64) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = series
        .window(lo, hi)
        .into_iter()
        .filter(|&(_, s)| s != 0.0 && s.is_finite())
        .map(|(x, s)| ((x as f64).ln(), s.abs().ln()))
        .collect();
    if pts.len() < 5 {
        return invalid(format!(
            "growth fit needs 5 non-zero checkpoints in [{lo}, {hi}], found {}",
            pts.len()
        ));
    }
    let (slope, intercept, se) = ols(&pts);
    Ok(GrowthFit {
        slope,
        intercept,
        residual_std_error: se,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MainTermFit {
    pub c_hat: f64,
    /// Two standard errors either side of Ĉ.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Slope of ln|S − ĈX²| against ln X, when at least 5 residuals are
    /// non-zero.
    pub residual_exponent: Option<f64>,
    pub window: (u64, u64),
    pub points: usize,
}

/// Ĉ = ΣS·X² / ΣX⁴ over checkpoints in [lo, hi]; the default window is the
/// largest decade [X_max/10, X_max].
pub fn fit_main_term(series: &MomentSeries, window: Option<(u64, u64)>) -> Result<MainTermFit> {
    if series.r % 2 == 1 {
        return invalid(format!("r = {} is odd: there is no main term to fit", series.r));
    }
    let (lo, hi) = window.unwrap_or_else(|| {
        let top = series.max_x();
        (top / 10, top)
    });
    let pts = series.window(lo, hi);
    if pts.len() < 8 {
        return invalid(format!(
            "main-term fit needs 8 checkpoints in [{lo}, {hi}], found {}",
            pts.len()
        ));
    }
    let x2: Vec<f64> = pts.iter().map(|&(x, _)| (x as f64).powi(2)).collect();
    let sxx: f64 = x2.iter().map(|v| v * v).sum();
    let sxy: f64 = x2.iter().zip(&pts).map(|(v, p)| v * p.1).sum();
    let c_hat = sxy / sxx;
    let residuals: Vec<(u64, f64)> = pts
        .iter()
        .zip(&x2)
        .map(|(&(x, s), v)| (x, s - c_hat * v))
        .collect();
    let rss: f64 = residuals.iter().map(|r| r.1 * r.1).sum();
    let se = (rss / (pts.len() as f64 - 1.0) / sxx).sqrt();
    let log_res: Vec<(f64, f64)> = residuals
        .iter()
        .filter(|r| r.1 != 0.0)
        .map(|&(x, r)| ((x as f64).ln(), r.abs().ln()))
        .collect();
    let residual_exponent = (log_res.len() >= 5).then(|| ols(&log_res).0);
    Ok(MainTermFit {
        c_hat,
        ci_low: c_hat - 2.0 * se,
        ci_high: c_hat + 2.0 * se,
        residual_exponent,
        window: (lo, hi),
        points: pts.len(),
    })
}

/// Least-squares fit S(X)/X² ≈ Σ_{k ≤ degree} b_k (ln X)^k over [lo, hi].
/// Returns b_0..=b_degree.
pub fn fit_log_polynomial(series: &MomentSeries, degree: usize, lo: u64, hi: u64) -> Result<Vec<f64>> {
    let pts = series.window(lo, hi);
    if pts.len() < degree + 2 {
        return invalid(format!(
            "log-polynomial fit of degree {degree} needs {} checkpoints",
            degree + 2
        ));
    }
    let k = degree + 1;
    // normal equations, with ln X centred for conditioning
    let t0 = pts.iter().map(|p| (p.0 as f64).ln()).sum::<f64>() / pts.len() as f64;
    let mut a = vec![vec![0.0; k + 1]; k];
    for &(x, s) in &pts {
        let t = (x as f64).ln() - t0;
        let y = s / (x as f64).powi(2);
        let pw: Vec<f64> = (0..k).map(|i| t.powi(i as i32)).collect();
        for i in 0..k {
            for j in 0..k {
                a[i][j] += pw[i] * pw[j];
            }
            a[i][k] += pw[i] * y;
        }
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        if a[col][col] == 0.0 {
            return invalid("log-polynomial fit is singular");
        }
        for row in 0..k {
            if row != col {
                let f = a[row][col] / a[col][col];
                for j in col..=k {
                    a[row][j] -= f * a[col][j];
                }
            }
        }
    }
    let centred: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
    // expand Σ c_i (t − t0)^i back into powers of t
    let mut out = vec![0.0; k];
    for (i, c) in centred.iter().enumerate() {
        for j in 0..=i {
            out[j] += c * binom(i as i64, j as i64) as f64 * (-t0).powi((i - j) as i32);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenform::delta_coefficients;
    use std::sync::OnceLock;

    fn fixtures() -> &'static (MultiplicativeTables, EigenformTable) {
        static F: OnceLock<(MultiplicativeTables, EigenformTable)> = OnceLock::new();
        F.get_or_init(|| {
            (
                MultiplicativeTables::build(20_000).unwrap(),
                delta_coefficients(20_000).unwrap(),
            )
        })
    }

    fn synthetic(r: u32, f: impl Fn(f64) -> f64, max_x: u64) -> MomentSeries {
        MomentSeries {
            r,
            method: Method::Sieve,
            weight: 12,
            normalization: 1.0,
            checkpoints: CheckpointSchedule::new(max_x)
                .points()
                .into_iter()
                .map(|x| (x, f(x as f64)))
                .collect(),
        }
    }

    #[test]
    fn schedule_points() {
        let pts = CheckpointSchedule::new(1_000_000).points();
        assert_eq!(pts.len(), 25);
        assert_eq!(pts[0], 1000);
        assert_eq!(pts[8], 10_000);
        assert_eq!(pts[1], 1334);
        assert_eq!(*pts.last().unwrap(), 1_000_000);
        assert_eq!(CheckpointSchedule::new(5).points(), vec![5]);
        assert_eq!(CheckpointSchedule::new(1500).points(), vec![1000, 1334, 1500]);
        assert!(CheckpointSchedule::new(0).points().is_empty());
    }

    #[test]
    fn sieve_small_values() {
        let (t, e) = fixtures();
        for r in 1..=5 {
            assert_eq!(moment_sum_sieve(r, 1, t, e).unwrap(), 1.0);
        }
        let want = 1.0 - 48.0 / 2f64.powf(5.5);
        assert!((moment_sum_sieve(1, 2, t, e).unwrap() - want).abs() < 1e-15);
        assert!((want + 0.06066).abs() < 1e-5);
        let mut brute = 0.0;
        for n in [1usize, 2, 3, 5, 6, 7, 10] {
            brute += e.lambda(n).powi(2) * t.sigma(n) as f64;
        }
        assert!((moment_sum_sieve(2, 10, t, e).unwrap() - brute).abs() < 1e-12);
    }

    #[test]
    fn sieve_rejects_bad_input() {
        let (t, e) = fixtures();
        assert!(moment_sum_sieve(0, 10, t, e).is_err());
        assert!(moment_sum_sieve(1, 30_000, t, e).is_err());
        assert!(moment_series_sieve(1, &[10, 5], t, e).is_err());
    }

    #[test]
    fn lattice_small_values() {
        let (t, e) = fixtures();
        let one = moment_sum_lattice(3, 1, PolynomialKind::Alpha, t, e).unwrap();
        assert_eq!(one.raw, 16.0);
        assert_eq!(one.normalized, 1.0);
        assert_eq!(one.c, Ratio::from_integer(16));
        let two = moment_sum_lattice(3, 2, PolynomialKind::Alpha, t, e).unwrap();
        assert!((two.raw - (16.0 + 32.0 * e.lambda(2).powi(3))).abs() < 1e-12);
    }

    #[test]
    fn dual_path_agreement() {
        let (t, e) = fixtures();
        let pts = [1u64, 2, 10, 100, 777, 2000];
        for r in 1..=4 {
            let a = moment_series_sieve(r, &pts, t, e).unwrap();
            let b = moment_series_lattice(r, &pts, PolynomialKind::Alpha, t, e).unwrap();
            for (x, y) in a.checkpoints.iter().zip(&b.checkpoints) {
                assert_eq!(x.0, y.0);
                assert!((x.1 - y.1).abs() / x.1.abs().max(1.0) < 1e-9, "r={r} X={}", x.0);
            }
        }
    }

    #[test]
    fn csv_first_row() {
        let (t, e) = fixtures();
        let s = moment_series_sieve(1, &[1], t, e).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "r,method,X,S,normalization\n1,sieve,1,1.0,1.0\n"
        );
    }

    #[test]
    fn predictions() {
        let p4 = predicted_exponents(4).unwrap();
        assert_eq!(p4.d_r, Some((2, 1)));
        assert_eq!(p4.d_r_pole_order, Some(1));
        assert_eq!(p4.gamma_r, (719, 328));
        assert!((p4.gamma_r_value - (13.0 / 41.0 + 15.0 / 8.0)).abs() < 1e-15);
        let p3 = predicted_exponents(3).unwrap();
        assert_eq!(p3.gamma_r, (-1, 6));
        assert!((p3.error_exponent - 1.4).abs() < 1e-12);
        assert!(!p3.main_term && p3.d_r.is_none());
        let p6 = predicted_exponents(6).unwrap();
        assert_eq!(p6.d_r, Some((17, 3)));
        assert_eq!(p6.d_r_pole_order, Some(4));
        assert!(predicted_exponents(2).is_err());
    }

    #[test]
    fn gamma_hand_values() {
        // r = 6, m = 3: 13/246·C(6,2) + 15/16·C(6,1) + ¼·(25/1)·C(6,0)
        let want = Ratio::new(13 * 15, 246) + Ratio::new(15 * 6, 16) + Ratio::new(25, 4);
        assert_eq!(gamma(6), want);
        // r = 5, m = 2: 2/6·C(5,1) + ¼·(16/1)·C(5,0) − 5/6
        let want = Ratio::new(10, 6) + Ratio::new(16, 4) - Ratio::new(5, 6);
        assert_eq!(gamma(5), want);
    }

    #[test]
    fn growth_of_power_laws() {
        let s = synthetic(2, |x| x * x, 1_000_000);
        let fit = growth_exponent(&s, 10_000, 1_000_000).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
        let s = synthetic(2, |x| 3.0 * x * x + x.powf(1.6), 1_000_000);
        let fit = growth_exponent(&s, 10_000, 1_000_000).unwrap();
        assert!(fit.slope > 1.95 && fit.slope < 2.05);
        assert!(growth_exponent(&s, 10, 2000).is_err());
    }

    #[test]
    fn main_term_fits() {
        let s = synthetic(2, |x| 5.0 * x * x, 1_000_000);
        let fit = fit_main_term(&s, None).unwrap();
        assert!((fit.c_hat - 5.0).abs() < 1e-9);
        assert_eq!(fit.window, (100_000, 1_000_000));
        let noisy = synthetic(2, |x| 5.0 * x * x + 40.0 * x.powf(1.6), 1_000_000);
        let near = fit_main_term(&noisy, Some((1000, 10_000))).unwrap();
        let far = fit_main_term(&noisy, Some((100_000, 1_000_000))).unwrap();
        assert!((far.c_hat - 5.0).abs() < (near.c_hat - 5.0).abs());
        assert!(far.residual_exponent.unwrap() < 2.0);
        assert!(fit_main_term(&synthetic(3, |x| x, 1_000_000), None).is_err());
        assert!(fit_main_term(&synthetic(2, |x| x, 5000), None).is_err());
    }

    #[test]
    fn log_polynomial_recovers_coefficients() {
        let s = synthetic(4, |x| x * x * (2.0 + 0.5 * x.ln() - 0.01 * x.ln().powi(2)), 1_000_000);
        let b = fit_log_polynomial(&s, 2, 1000, 1_000_000).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-6);
        assert!((b[1] - 0.5).abs() < 1e-7);
        assert!((b[2] + 0.01).abs() < 1e-8);
    }
}
