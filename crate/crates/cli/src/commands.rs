use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hecke_moments::dirichlet::{constant_c, ConstantReport};
use hecke_moments::lattice::{rep_counts, verify_rep_identity, PolynomialKind, RepIdentityFailure, RepIdentityOutcome};
use hecke_moments::moments::{
    fit_main_term, growth_exponent, moment_series_lattice, moment_series_sieve, predicted_exponents,
    AsymptoticPrediction, CheckpointSchedule, GrowthFit, MainTermFit, Method, MomentSeries,
};
use hecke_moments::satake::{chebyshev_a, chebyshev_u_half, power_decomposition, power_decomposition_exact, SatakeLocal};
use hecke_moments::{eigenform_coefficients_with, Budget, CoefficientMethod, EigenformTable, MultiplicativeTables};
use serde::Serialize;

use crate::config::{OutFormat, RunConfig};
use crate::CliError;

fn cache_path(cfg: &RunConfig, name: &str) -> Option<PathBuf> {
    cfg.cache_dir.as_ref().map(|d| d.join(name))
}

fn store<T>(path: &Path, value: &T, save: impl Fn(&T, &Path) -> hecke_moments::Result<()>) {
    let saved = path
        .parent()
        .map_or(Ok(()), fs::create_dir_all)
        .map_err(hecke_moments::Error::from)
        .and_then(|_| save(value, path));
    if let Err(e) = saved {
        eprintln!("warning: could not write cache {}: {e}", path.display());
    }
}

/// Sieve tables to `limit`, from the cache when a valid file exists.
pub fn load_tables(cfg: &RunConfig, limit: usize) -> Result<MultiplicativeTables, CliError> {
    let path = cache_path(cfg, &format!("tables_n{limit}.bin"));
    if let Some(p) = path.as_ref().filter(|p| p.exists()) {
        match MultiplicativeTables::load(p) {
            Ok(t) if t.limit() == limit => return Ok(t),
            Ok(_) => eprintln!("warning: cache {} has the wrong limit, rebuilding", p.display()),
            Err(e) => eprintln!("warning: {e}; rebuilding {}", p.display()),
        }
    }
    let tables = MultiplicativeTables::build_with_budget(limit, &Budget::default())?;
    if let Some(p) = path {
        store(&p, &tables, |t, p| t.save(p));
    }
    Ok(tables)
}

/// Coefficients of the configured weight to `limit`, cached like the tables.
pub fn load_eigen(cfg: &RunConfig, limit: usize) -> Result<EigenformTable, CliError> {
    let path = cache_path(cfg, &format!("eigen_w{}_n{limit}.bin", cfg.weight));
    if let Some(p) = path.as_ref().filter(|p| p.exists()) {
        match EigenformTable::load(p, cfg.weight, limit) {
            Ok(t) => return Ok(t),
            Err(e) => eprintln!("warning: {e}; rebuilding {}", p.display()),
        }
    }
    let table = eigenform_coefficients_with(cfg.weight, limit, CoefficientMethod::Ntt, &Budget::default())?;
    if let Some(p) = path {
        store(&p, &table, |t, p| t.save(p));
    }
    Ok(table)
}

fn output_file(cfg: &RunConfig, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let (path, mut w) = output_file(cfg, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}

fn limit_usize(cfg: &RunConfig) -> usize {
    cfg.coefficient_limit as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct HeckeSummary {
    pub max_product: u64,
    pub pairs_checked: u64,
    pub failures: usize,
    pub first_failure: Option<(u64, u64)>,
    pub passed: bool,
}

pub fn hecke_suite(eigen: &EigenformTable, max_product: u64) -> Result<HeckeSummary, CliError> {
    let report = eigen.verify_hecke_all(max_product)?;
    Ok(HeckeSummary {
        max_product,
        pairs_checked: report.pairs_checked,
        failures: report.failures.len(),
        first_failure: report.failures.first().copied(),
        passed: report.failures.is_empty(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DeligneSummary {
    pub limit: usize,
    /// (n, λ(n), d(n)) of the first violation.
    pub violation: Option<(usize, f64, u32)>,
    pub passed: bool,
}

pub fn deligne_suite(
    eigen: &EigenformTable,
    tables: &MultiplicativeTables,
    limit: usize,
) -> Result<DeligneSummary, CliError> {
    let v = eigen.deligne_violation(tables, limit)?;
    Ok(DeligneSummary {
        limit,
        passed: v.is_none(),
        violation: v.map(|v| (v.n, v.lambda, v.bound)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ChebyshevSummary {
    pub max_ell: u32,
    pub grid_points: usize,
    pub max_identity_error: f64,
    pub endpoint_identity: bool,
    pub prime_limit: u64,
    pub primes_checked: usize,
    pub max_r: u32,
    /// From the integer form of the decomposition.
    pub max_relative_error: f64,
    /// |Σ e_n λ(p^{r−2n}) − λ(p)^r| in double precision.
    pub max_float_abs_error: f64,
    pub passed: bool,
}

const CHEBYSHEV_TOLERANCE: f64 = 1e-8;

pub fn chebyshev_suite(eigen: &EigenformTable, prime_limit: u64, max_r: u32) -> Result<ChebyshevSummary, CliError> {
    let max_ell = 12;
    let grid: Vec<f64> = (0..=400).map(|i| -2.0 + i as f64 / 100.0).collect();
    let mut max_identity_error: f64 = 0.0;
    for ell in 0..=max_ell {
        for &x in &grid {
            let sum: f64 = (0..=ell)
                .map(|j| chebyshev_a(ell, j) as f64 * chebyshev_u_half(j, x))
                .sum();
            let want = x.powi(ell as i32);
            max_identity_error = max_identity_error.max((sum - want).abs() / want.abs().max(1.0));
        }
    }
    let endpoint_identity = (0..=max_ell).all(|ell| {
        (0..=ell)
            .map(|j| chebyshev_a(ell, j) * (j + 1) as i64)
            .sum::<i64>()
            == 1i64 << ell
    });
    if (eigen.limit() as u64) < prime_limit {
        return Err(CliError::Usage(format!(
            "the decomposition check to p = {prime_limit} needs coefficients that far"
        )));
    }
    let primes = hecke_moments::arith::primes_up_to(prime_limit);
    let mut max_relative_error: f64 = 0.0;
    let mut max_float_abs_error: f64 = 0.0;
    for &p in &primes {
        let sat = SatakeLocal::new(p, eigen.lambda(p as usize))?;
        for r in 1..=max_r {
            let exact = power_decomposition_exact(r, p, eigen.a(p as usize), eigen.weight());
            max_relative_error = max_relative_error.max(exact.relative_error);
            let float = power_decomposition(r, &sat);
            max_float_abs_error = max_float_abs_error.max((float - sat.lambda_p.powi(r as i32)).abs());
        }
    }
    Ok(ChebyshevSummary {
        max_ell,
        grid_points: grid.len(),
        max_identity_error,
        endpoint_identity,
        prime_limit,
        primes_checked: primes.len(),
        max_r,
        max_relative_error,
        max_float_abs_error,
        passed: max_identity_error <= CHEBYSHEV_TOLERANCE
            && endpoint_identity
            && max_relative_error <= CHEBYSHEV_TOLERANCE,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RepIdentitySummary {
    pub poly: PolynomialKind,
    pub limit: u64,
    /// Measured constant as "a" or "a/b".
    pub c: Option<String>,
    pub inconsistencies: usize,
    pub first_failure: Option<RepIdentityFailure>,
    pub passed: bool,
}

pub fn repidentity_suite(
    poly: PolynomialKind,
    limit: u64,
    tables: &MultiplicativeTables,
) -> Result<(RepIdentitySummary, hecke_moments::RepTable), CliError> {
    let table = rep_counts(poly, limit)?;
    let summary = match verify_rep_identity(&table, tables)? {
        RepIdentityOutcome::Consistent { c, .. } => RepIdentitySummary {
            poly,
            limit,
            c: Some(c.to_string()),
            inconsistencies: 0,
            first_failure: None,
            passed: true,
        },
        RepIdentityOutcome::Inconsistent(f) => RepIdentitySummary {
            poly,
            limit,
            c: None,
            inconsistencies: 1,
            first_failure: Some(f),
            passed: false,
        },
    };
    Ok((summary, table))
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentSummary {
    pub r: u32,
    pub method: Method,
    pub poly: Option<PolynomialKind>,
    pub weight: u32,
    pub normalization: f64,
    pub max_x: u64,
    pub checkpoints: usize,
    pub growth_window: (u64, u64),
    pub growth: Option<GrowthFit>,
    pub main_term: Option<MainTermFit>,
    pub prediction: Option<AsymptoticPrediction>,
    pub notes: Vec<String>,
}

pub fn moment_summary(cfg: &RunConfig, series: &MomentSeries, poly: Option<PolynomialKind>) -> MomentSummary {
    let max_x = series.max_x();
    let lo = (10u64.pow(cfg.checkpoint_start)).max(max_x / 100).min(max_x);
    let mut notes = Vec::new();
    let growth = match growth_exponent(series, lo, max_x) {
        Ok(g) => Some(g),
        Err(e) => {
            notes.push(format!("growth exponent unavailable: {e}"));
            None
        }
    };
    let main_term = if series.r % 2 == 0 {
        match fit_main_term(series, None) {
            Ok(f) => Some(f),
            Err(e) => {
                notes.push(format!("main-term fit unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };
    let prediction = predicted_exponents(series.r).ok();
    match series.r {
        1 => notes.push("expected |S_1(X)| = O(X^{3/2+eps})".into()),
        2 => notes.push("expected S_2(X) = C X^2 + O(X^{3/2+eps})".into()),
        _ => {}
    }
    if series.r % 2 == 1 {
        notes.push("no main term (odd r)".into());
    }
    if let Some(p) = &prediction {
        notes.extend(p.notes.iter().filter(|n| !n.starts_with("no main term")).cloned());
    }
    MomentSummary {
        r: series.r,
        method: series.method,
        poly,
        weight: series.weight,
        normalization: series.normalization,
        max_x,
        checkpoints: series.checkpoints.len(),
        growth_window: (lo, max_x),
        growth,
        main_term,
        prediction,
        notes,
    }
}

pub fn checkpoints(cfg: &RunConfig) -> Vec<u64> {
    CheckpointSchedule {
        start_exponent: cfg.checkpoint_start,
        per_decade: cfg.checkpoints_per_decade,
        max_x: cfg.coefficient_limit,
    }
    .points()
}

fn fail_if(passed: bool, what: &str) -> Result<(), CliError> {
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(what.to_string()))
    }
}

pub fn eigenvalues(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let limit = limit_usize(cfg);
    let eigen = load_eigen(cfg, limit)?;
    let tables = load_tables(cfg, limit)?;
    let stem = format!("eigenvalues_w{}_n{limit}", cfg.weight);
    let path = match cfg.out {
        OutFormat::Csv => {
            let (path, mut w) = output_file(cfg, &format!("{stem}.csv"))?;
            eigen.write_csv(&mut w)?;
            w.flush()?;
            path
        }
        OutFormat::Json => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                a: String,
                lambda: f64,
            }
            #[derive(Serialize)]
            struct Doc {
                weight: u32,
                limit: usize,
                rows: Vec<Row>,
            }
            let doc = Doc {
                weight: cfg.weight,
                limit,
                rows: (1..=limit)
                    .map(|n| Row {
                        n,
                        a: eigen.a(n).to_string(),
                        lambda: eigen.lambda(n),
                    })
                    .collect(),
            };
            write_json(cfg, &format!("{stem}.json"), &doc)?
        }
    };
    writeln!(out, "wrote {}", path.display())?;
    let hecke = hecke_suite(&eigen, cfg.coefficient_limit.min(10_000))?;
    writeln!(
        out,
        "hecke: {} pairs with mn <= {}, {} failures",
        hecke.pairs_checked, hecke.max_product, hecke.failures
    )?;
    let deligne = deligne_suite(&eigen, &tables, limit)?;
    match deligne.violation {
        None => writeln!(out, "deligne: |lambda(n)| <= d(n) for n <= {limit}")?,
        Some((n, l, d)) => writeln!(out, "deligne: violated at n = {n}: |{l}| > {d}")?,
    }
    fail_if(hecke.passed && deligne.passed, "coefficient table checks failed")
}

pub fn verify(
    cfg: &RunConfig,
    target: crate::VerifyTarget,
    poly: PolynomialKind,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    use crate::VerifyTarget::*;
    let limit = limit_usize(cfg);
    match target {
        Hecke => {
            let eigen = load_eigen(cfg, limit)?;
            let s = hecke_suite(&eigen, cfg.coefficient_limit)?;
            writeln!(out, "hecke: {} pairs with mn <= {}, {} failures", s.pairs_checked, s.max_product, s.failures)?;
            if let Some((m, n)) = s.first_failure {
                writeln!(out, "first failure: m = {m}, n = {n}")?;
            }
            fail_if(s.passed, "Hecke relation")
        }
        Deligne => {
            let eigen = load_eigen(cfg, limit)?;
            let tables = load_tables(cfg, limit)?;
            let s = deligne_suite(&eigen, &tables, limit)?;
            match s.violation {
                None => writeln!(out, "deligne: no violation for n <= {limit}")?,
                Some((n, l, d)) => writeln!(out, "deligne: violated at n = {n}: |{l}| > {d}")?,
            }
            fail_if(s.passed, "Deligne bound")
        }
        Chebyshev => {
            let prime_limit = cfg.coefficient_limit.min(1000);
            let eigen = load_eigen(cfg, prime_limit as usize)?;
            let s = chebyshev_suite(&eigen, prime_limit, 10)?;
            writeln!(
                out,
                "chebyshev: l <= {}, max identity error {:e}, endpoint identity {}",
                s.max_ell,
                s.max_identity_error,
                if s.endpoint_identity { "ok" } else { "FAILED" }
            )?;
            writeln!(
                out,
                "decomposition: {} primes <= {}, r <= {}, max relative error {:e} (double precision abs error {:e})",
                s.primes_checked, s.prime_limit, s.max_r, s.max_relative_error, s.max_float_abs_error
            )?;
            fail_if(s.passed, "Chebyshev decomposition")
        }
        Repidentity => {
            let tables = load_tables(cfg, limit + 1)?;
            let (s, table) = repidentity_suite(poly, cfg.coefficient_limit, &tables)?;
            let name = format!("repidentity_{poly}_n{}.csv", cfg.coefficient_limit);
            let (path, mut w) = output_file(cfg, &name)?;
            table.write_csv(&tables, &mut w)?;
            w.flush()?;
            writeln!(out, "wrote {}", path.display())?;
            match &s.c {
                Some(c) => writeln!(out, "{poly}: c = {c}, {} inconsistencies", s.inconsistencies)?,
                None => {
                    let f = s.first_failure.as_ref().unwrap();
                    writeln!(
                        out,
                        "{poly}: inconsistent at n = {}: count {} vs sigma {}",
                        f.n, f.count, f.sigma
                    )?
                }
            }
            fail_if(s.passed, "representation identity")
        }
    }
}

pub fn moments(
    cfg: &RunConfig,
    r: u32,
    method: Method,
    poly: PolynomialKind,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if r == 0 {
        return Err(CliError::Usage("--r must be at least 1".into()));
    }
    let limit = limit_usize(cfg);
    let pts = checkpoints(cfg);
    let eigen = load_eigen(cfg, limit)?;
    let tables = load_tables(cfg, limit)?;
    let (series, poly_used) = match method {
        Method::Sieve => (moment_series_sieve(r, &pts, &tables, &eigen)?, None),
        Method::Lattice => (moment_series_lattice(r, &pts, poly, &tables, &eigen)?, Some(poly)),
    };
    let method_tag = match poly_used {
        Some(p) if p != PolynomialKind::Alpha => format!("lattice-{p}"),
        _ => method.to_string(),
    };
    let stem = format!("moments_r{r}_{method_tag}_w{}", cfg.weight);
    let summary = moment_summary(cfg, &series, poly_used);
    match cfg.out {
        OutFormat::Csv => {
            let (path, mut w) = output_file(cfg, &format!("{stem}.csv"))?;
            series.write_csv(&mut w)?;
            w.flush()?;
            writeln!(out, "wrote {}", path.display())?;
            let path = write_json(cfg, &format!("{stem}.json"), &summary)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        OutFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                summary: &'a MomentSummary,
                series: &'a MomentSeries,
            }
            let path = write_json(cfg, &format!("{stem}.json"), &Doc { summary: &summary, series: &series })?;
            writeln!(out, "wrote {}", path.display())?;
        }
    }
    let (x, s) = *series.checkpoints.last().unwrap();
    writeln!(out, "S_{r}({x}) = {s:?}")?;
    if let Some(g) = &summary.growth {
        writeln!(out, "growth exponent {:.4} (residual s.e. {:.3})", g.slope, g.residual_std_error)?;
    }
    if let Some(f) = &summary.main_term {
        writeln!(out, "main term C_hat = {:.6} [{:.6}, {:.6}]", f.c_hat, f.ci_low, f.ci_high)?;
    }
    for n in &summary.notes {
        writeln!(out, "note: {n}")?;
    }
    Ok(())
}

fn constant_report(cfg: &RunConfig) -> Result<ConstantReport, CliError> {
    cfg.require_prime_bound()?;
    let edge = cfg.edge_bound();
    let eigen = load_eigen(cfg, edge.max(cfg.prime_bound) as usize)?;
    Ok(constant_c(cfg.prime_bound, edge, &eigen)?)
}

pub fn constant(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let report = constant_report(cfg)?;
    let path = write_json(cfg, &format!("constant_w{}_P{}.json", cfg.weight, cfg.prime_bound), &report)?;
    writeln!(out, "wrote {}", path.display())?;
    for f in &report.factors {
        writeln!(
            out,
            "{}({}) = {:.10} (primes <= {}, log tail {:.2e}{})",
            f.kind,
            f.s,
            f.value,
            f.prime_bound,
            f.tail_bound,
            if f.rigorous { "" } else { ", estimated" }
        )?;
    }
    writeln!(out, "C = {:.10}, C/2 = {:.10}", report.value, report.value / 2.0)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantComparison {
    pub c_hat: f64,
    pub c: f64,
    pub c_half: f64,
    pub relative_to_c: f64,
    pub relative_to_c_half: f64,
    pub better_match: &'static str,
}

pub fn compare_constant(c_hat: f64, c: f64) -> ConstantComparison {
    let rel_c = (c_hat - c).abs() / c.abs();
    let rel_half = (c_hat - c / 2.0).abs() / (c / 2.0).abs();
    ConstantComparison {
        c_hat,
        c,
        c_half: c / 2.0,
        relative_to_c: rel_c,
        relative_to_c_half: rel_half,
        better_match: if rel_half < rel_c { "C/2" } else { "C" },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub weight: u32,
    pub limit: u64,
    pub prime_bound: u64,
    pub hecke: HeckeSummary,
    pub deligne: DeligneSummary,
    pub chebyshev: ChebyshevSummary,
    pub repidentity: RepIdentitySummary,
    pub constant: ConstantReport,
    pub moments: Vec<MomentSummary>,
    pub main_term_comparison: Option<ConstantComparison>,
    pub passed: bool,
}

pub fn report(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let limit = limit_usize(cfg);
    let eigen = load_eigen(cfg, limit)?;
    let tables = load_tables(cfg, limit + 1)?;
    let hecke = hecke_suite(&eigen, cfg.coefficient_limit.min(10_000))?;
    let deligne = deligne_suite(&eigen, &tables, limit)?;
    let prime_limit = cfg.coefficient_limit.min(1000);
    let chebyshev = chebyshev_suite(&eigen, prime_limit, 10)?;
    let (repidentity, _) = repidentity_suite(PolynomialKind::Alpha, cfg.coefficient_limit.min(10_000), &tables)?;
    let constant = constant_report(cfg)?;
    let pts = checkpoints(cfg);
    let mut moments = Vec::new();
    for r in 1..=4 {
        let series = moment_series_sieve(r, &pts, &tables, &eigen)?;
        moments.push(moment_summary(cfg, &series, None));
    }
    let main_term_comparison = moments[1]
        .main_term
        .as_ref()
        .map(|f| compare_constant(f.c_hat, constant.value));
    let passed = hecke.passed && deligne.passed && chebyshev.passed && repidentity.passed;
    let doc = Report {
        weight: cfg.weight,
        limit: cfg.coefficient_limit,
        prime_bound: cfg.prime_bound,
        hecke,
        deligne,
        chebyshev,
        repidentity,
        constant,
        moments,
        main_term_comparison,
        passed,
    };
    let path = write_json(cfg, "report.json", &doc)?;
    writeln!(out, "wrote {}", path.display())?;
    for (name, ok) in [
        ("hecke", doc.hecke.passed),
        ("deligne", doc.deligne.passed),
        ("chebyshev", doc.chebyshev.passed),
        ("repidentity", doc.repidentity.passed),
    ] {
        writeln!(out, "{name}: {}", if ok { "pass" } else { "FAIL" })?;
    }
    if let Some(c) = &doc.main_term_comparison {
        writeln!(
            out,
            "C_hat = {:.6}; C = {:.6} (off {:.2}%), C/2 = {:.6} (off {:.2}%)",
            c.c_hat,
            c.c,
            100.0 * c.relative_to_c,
            c.c_half,
            100.0 * c.relative_to_c_half
        )?;
    }
    fail_if(passed, "report suites")
}

pub fn tables(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let limit = limit_usize(cfg);
    let t = load_tables(cfg, limit)?;
    let (path, mut w) = output_file(cfg, &format!("tables_n{limit}.csv"))?;
    t.write_csv(&mut w)?;
    w.flush()?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}
