//! Acceptance suite, run without the test harness so that every check prints
//! its PASS/FAIL line. Exits non-zero when any check fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use hecke_moments::dirichlet::{constant_c, local_l_r, local_r_r, local_u_r};
use hecke_moments::lattice::PolynomialKind;
use hecke_moments::moments::{
    fit_main_term, growth_exponent, moment_series_lattice, moment_series_sieve, predicted_exponents,
    CheckpointSchedule, MomentSeries,
};
use hecke_moments::satake::SatakeLocal;
use hecke_moments::{arith::primes_up_to, delta_coefficients, EigenformTable, MultiplicativeTables};
use hecke_moments_cli::commands::{chebyshev_suite, compare_constant, deligne_suite, hecke_suite, repidentity_suite};

const MAX_X: u64 = 1_000_000;

struct Fixture {
    eigen: EigenformTable,
    tables: MultiplicativeTables,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| Fixture {
        eigen: delta_coefficients(MAX_X as usize + 1).unwrap(),
        tables: MultiplicativeTables::build(MAX_X as usize + 1).unwrap(),
    })
}

fn series(r: u32) -> &'static MomentSeries {
    static S: [OnceLock<MomentSeries>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    S[r as usize - 1].get_or_init(|| {
        let f = fixture();
        moment_series_sieve(r, &CheckpointSchedule::new(MAX_X).points(), &f.tables, &f.eigen).unwrap()
    })
}

fn report(id: u32, passed: bool, detail: String) -> bool {
    println!("criterion {id}: {} {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn criterion_1_rep_identity() -> bool {
    let start = Instant::now();
    let tables = MultiplicativeTables::build(10_001).unwrap();
    let (s, _) = repidentity_suite(PolynomialKind::Alpha, 10_000, &tables).unwrap();
    let elapsed = start.elapsed();
    let passed = s.passed && s.inconsistencies == 0 && elapsed < Duration::from_secs(60);
    report(
        1,
        passed,
        format!("c = {:?}, {} inconsistencies, {:.1?}", s.c, s.inconsistencies, elapsed),
    )
}

fn criterion_2_hecke_and_deligne() -> bool {
    let f = fixture();
    let start = Instant::now();
    let hecke = hecke_suite(&f.eigen, 10_000).unwrap();
    let deligne = deligne_suite(&f.eigen, &f.tables, MAX_X as usize).unwrap();
    let elapsed = start.elapsed();
    report(
        2,
        hecke.passed && deligne.passed && elapsed < Duration::from_secs(120),
        format!(
            "{} Hecke pairs, {} failures; Deligne to {} violation {:?}; {:.1?}",
            hecke.pairs_checked, hecke.failures, deligne.limit, deligne.violation, elapsed
        ),
    )
}

fn criterion_3_chebyshev_decomposition() -> bool {
    let s = chebyshev_suite(&fixture().eigen, 1000, 10).unwrap();
    report(
        3,
        s.passed,
        format!(
            "{} primes, r <= {}, max relative error {:e}, identity error {:e}",
            s.primes_checked, s.max_r, s.max_relative_error, s.max_identity_error
        ),
    )
}

fn criterion_4_dual_path() -> bool {
    let f = fixture();
    let xs = [100, 1000, 5000];
    let mut worst: f64 = 0.0;
    for r in 1..=6 {
        let sieve = moment_series_sieve(r, &xs, &f.tables, &f.eigen).unwrap();
        let lattice = moment_series_lattice(r, &xs, PolynomialKind::Alpha, &f.tables, &f.eigen).unwrap();
        for (a, b) in sieve.checkpoints.iter().zip(&lattice.checkpoints) {
            assert_eq!(a.0, b.0);
            worst = worst.max((a.1 - b.1).abs() / a.1.abs().max(f64::MIN_POSITIVE));
        }
    }
    report(4, worst <= 1e-6, format!("max relative difference {worst:e}"))
}

fn criterion_5_second_moment() -> bool {
    let start = Instant::now();
    let s2 = series(2);
    let slope = growth_exponent(s2, 10_000, MAX_X).unwrap().slope;
    let low = fit_main_term(s2, Some((10_000, 100_000))).unwrap().c_hat;
    let high = fit_main_term(s2, Some((100_000, MAX_X))).unwrap().c_hat;
    let drift = (high - low).abs() / high.abs();
    let c = constant_c(100_000, MAX_X, &fixture().eigen).unwrap();
    let cmp = compare_constant(high, c.value);
    let best = cmp.relative_to_c.abs().min(cmp.relative_to_c_half.abs());
    let elapsed = start.elapsed();
    let passed = (1.95..=2.05).contains(&slope)
        && low > 0.0
        && high > 0.0
        && drift < 0.10
        && best <= 0.15
        && elapsed < Duration::from_secs(600);
    report(
        5,
        passed,
        format!(
            "slope {slope:.4}, C_hat {low:.6} / {high:.6} (drift {drift:.2e}), C = {:.6}, best match {} at {best:.2e}",
            c.value, cmp.better_match
        ),
    )
}

fn criterion_6_first_moment() -> bool {
    let s1 = series(1);
    let window = s1.window(1000, MAX_X);
    let worst = window
        .iter()
        .map(|&(x, s)| s.abs().ln() / (x as f64).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let bound_ok = window.iter().all(|&(x, s)| s.abs() <= (x as f64).powf(1.6));
    let slope = growth_exponent(s1, 1000, MAX_X).unwrap().slope;
    report(
        6,
        bound_ok && slope < 1.7,
        format!("{} checkpoints, max log|S|/log X {worst:.4}, slope {slope:.4}", window.len()),
    )
}

fn criterion_7_third_moment() -> bool {
    let slope = growth_exponent(series(3), 10_000, MAX_X).unwrap().slope;
    report(7, slope < 1.9, format!("slope {slope:.4}"))
}

fn criterion_8_prediction_and_local_identity() -> bool {
    let p4 = predicted_exponents(4).unwrap();
    let mut worst: f64 = 0.0;
    let eigen = &fixture().eigen;
    for p in primes_up_to(100) {
        let s = SatakeLocal::new(p, eigen.lambda(p as usize)).unwrap();
        for r in 1..=6 {
            let prod = local_l_r(r, &s, 4).mul(&local_u_r(r, &s, 4));
            let rr = local_r_r(r, &s, 4);
            for k in 0..=4 {
                worst = worst.max((prod.coeffs[k] - rr.coeffs[k]).abs());
            }
        }
    }
    report(
        8,
        p4.d_r == Some((2, 1)) && worst <= 1e-10,
        format!("d_4 = {:?}, max coefficient difference {worst:e}", p4.d_r),
    )
}

fn run_cli(dir: &Path, threads: &str, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_hecke-moments"))
        .current_dir(dir)
        .env_remove("HECKE_MOMENTS_CACHE_DIR")
        .args(["--threads", threads, "--limit", "100000"])
        .args(args)
        .output()
        .is_ok_and(|o| o.status.success())
}

fn csv_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_9_determinism() -> bool {
    let commands: [&[&str]; 8] = [
        &["eigenvalues"],
        &["tables"],
        &["verify", "repidentity", "--limit", "10000"],
        &["moments", "--r", "1"],
        &["moments", "--r", "2"],
        &["moments", "--r", "3"],
        &["moments", "--r", "4"],
        &["moments", "--r", "2", "--method", "lattice", "--limit", "5000"],
    ];
    let runs: Vec<(&str, tempfile::TempDir)> = ["1", "1", "4", "4"]
        .into_iter()
        .map(|threads| (threads, tempfile::tempdir().unwrap()))
        .collect();
    let mut all_ran = true;
    for (threads, dir) in &runs {
        for args in commands {
            all_ran &= run_cli(dir.path(), threads, args);
        }
    }
    let reference = csv_outputs(runs[0].1.path());
    let identical = runs.iter().all(|(_, d)| csv_outputs(d.path()) == reference);
    report(
        9,
        all_ran && identical && reference.len() >= 8,
        format!("{} CSV files compared over threads 1 and 4, two runs each", reference.len()),
    )
}

fn main() {
    let checks: [fn() -> bool; 9] = [
        criterion_1_rep_identity,
        criterion_2_hecke_and_deligne,
        criterion_3_chebyshev_decomposition,
        criterion_4_dual_path,
        criterion_5_second_moment,
        criterion_6_first_moment,
        criterion_7_third_moment,
        criterion_8_prediction_and_local_identity,
        criterion_9_determinism,
    ];
    let failed = checks.iter().filter(|check| !check()).count();
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
