use hecke_moments::dirichlet::sym_local_factor;
use hecke_moments::lattice::{enumerate_values, rep_counts, verify_rep_identity, PolynomialKind, RepIdentityOutcome};
use hecke_moments::{delta_coefficients, eigenform_coefficients, MultiplicativeTables, SatakeLocal};
use num_rational::Ratio;

#[test]
fn sym1_series_reproduces_prime_power_coefficients() {
    let delta = delta_coefficients(64).unwrap();
    let s = SatakeLocal::new(2, delta.lambda(2)).unwrap();
    let f = sym_local_factor(1, &s, 4);
    for k in 0..=4 {
        let want = delta.lambda(1 << k);
        assert!((f.coeffs[k] - want).abs() < 1e-9, "k={k}");
    }
}

#[test]
fn hecke_relation_every_weight() {
    for w in [12, 16, 18, 20, 22, 26] {
        let t = eigenform_coefficients(w, 2000).unwrap();
        let report = t.verify_hecke_all(2000).unwrap();
        assert!(report.failures.is_empty(), "weight {w}: {:?}", &report.failures[..1]);
        assert!(report.pairs_checked > 10_000);
    }
}

#[test]
fn rep_identity_all_polynomials() {
    let tables = MultiplicativeTables::build(10_001).unwrap();
    let mut constants = Vec::new();
    for kind in PolynomialKind::ALL {
        let t = rep_counts(kind, 10_000).unwrap();
        match verify_rep_identity(&t, &tables).unwrap() {
            RepIdentityOutcome::Consistent { c, checked } => {
                assert_eq!(checked, 10_001);
                constants.push(c);
            }
            RepIdentityOutcome::Inconsistent(f) => panic!("{kind}: {f:?}"),
        }
    }
    assert_eq!(constants[0], Ratio::from_integer(16));
    assert!(constants.iter().all(|c| c.is_integer()));
}

#[test]
fn enumeration_prefix_counts() {
    for kind in PolynomialKind::ALL {
        let t = rep_counts(kind, 1000).unwrap();
        let mut prefix = 0;
        let mut by_value = vec![0u64; 1001];
        for (v, _) in enumerate_values(kind, 1001) {
            by_value[v as usize] += 1;
        }
        for n in 0..=1000 {
            prefix += t.counts[n];
            let seen: u64 = by_value[..=n].iter().sum();
            assert_eq!(seen, prefix);
        }
    }
}
