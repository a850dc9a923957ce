use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use persistence_core::gp_engine::cov_sech;
use persistence_core::limit_cov::{corr_c, LimitCovariance, Variant};
use persistence_core::persistence_mc::{
    estimate_persistence, negativity_block_certificate, PersistencePolicy,
};
use persistence_core::poly_model::{
    CoefficientDistribution, NormalizedEvaluator, PolynomialSample, Region, RegionParams,
    RegularlyVaryingWeight, SlowlyVarying,
};
use persistence_core::rng::StreamKey;
use persistence_core::root_count::{
    count_real_roots_sturm, sign_change_count, unit_grid, CertificationPolicy, RootCertifier,
    Verdict,
};
use persistence_core::stats::wilson_interval;

fn slowly_varying() -> impl Strategy<Value = SlowlyVarying> {
    prop_oneof![
        Just(SlowlyVarying::Constant),
        Just(SlowlyVarying::LogShifted),
        Just(SlowlyVarying::InverseLog),
    ]
}

fn int_poly(max_deg: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-20i64..=20, 1..=max_deg + 1).prop_filter("nonzero", |c| c.iter().any(|&v| v != 0))
}

fn rationals(c: &[i64]) -> Vec<BigRational> {
    c.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weight_is_positive_and_anchored(alpha in -0.99f64..5.0, l in slowly_varying(), i in 1u64..1_000_000) {
        let w = RegularlyVaryingWeight::new(alpha, l).unwrap();
        prop_assert_eq!(w.r(0), 1.0);
        prop_assert!(w.r(i) > 0.0 && w.r(i).is_finite());
    }

    #[test]
    fn regions_partition_the_line(n in 2usize..100_000, u in -50.0f64..50.0) {
        let w = RegularlyVaryingWeight::new(1.0, SlowlyVarying::Constant).unwrap();
        let ev = NormalizedEvaluator::new(n, w, RegionParams::default()).unwrap();
        let r = ev.region(u).unwrap();
        let ln_n = (n as f64).ln();
        let k = 8.0 / n as f64;
        let expect = if u.abs() <= k {
            Region::Zero
        } else if u.abs() <= 1.0 / ln_n {
            if u > 0.0 { Region::Plus1 } else { Region::Minus1 }
        } else if u > 0.0 {
            Region::Plus2
        } else {
            Region::Minus2
        };
        prop_assert_eq!(r, expect);
        prop_assert!(ev.ln_sigma_sq(u).unwrap().is_finite());
    }

    #[test]
    fn reversal_identity(c in prop::collection::vec(-10.0f64..10.0, 1..30), x in 0.05f64..3.0) {
        prop_assume!(c.iter().any(|v| *v != 0.0));
        let p = PolynomialSample::new(c.clone()).unwrap();
        let n = p.degree() as i32;
        let lhs = p.eval(x);
        let rhs = x.powi(n) * p.reversed().eval(1.0 / x);
        let scale: f64 = c.iter().enumerate().map(|(i, v)| v.abs() * x.powi(i as i32)).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn certified_count_matches_sturm(c in int_poly(12)) {
        let coeffs: Vec<f64> = c.iter().map(|&v| v as f64).collect();
        let exact = count_real_roots_sturm(&rationals(&c)).unwrap();
        let mut cert = RootCertifier::new(coeffs.len() - 1, CertificationPolicy::default());
        let has = cert.has_real_root(&coeffs).unwrap();
        prop_assert_eq!(has.verdict == Verdict::HasRealRoot, exact > 0);
        let counted = cert.count_real_roots(&coeffs).unwrap();
        prop_assert_eq!(counted.count, Some(exact));
    }

    #[test]
    fn grid_sign_changes_never_exceed_roots(c in int_poly(10)) {
        let coeffs: Vec<f64> = c.iter().map(|&v| v as f64).collect();
        let exact = count_real_roots_sturm(&rationals(&c)).unwrap();
        let p = PolynomialSample::new(coeffs).unwrap();
        let grid: Vec<f64> = (0..=400).map(|k| -10.0 + 0.05 * k as f64).collect();
        prop_assert!(sign_change_count(&p, &grid).unwrap() <= exact);
    }

    #[test]
    fn unit_grid_is_sorted_and_anchored(n in 1usize..5000) {
        let g = unit_grid(n, &CertificationPolicy::default());
        prop_assert_eq!(g[0], 0.0);
        prop_assert_eq!(*g.last().unwrap(), 1.0);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn wilson_contains_estimate(k in 0u64..1000, extra in 0u64..1000) {
        let n = k + extra;
        prop_assume!(n > 0);
        let (lo, hi) = wilson_interval(k, n, 1.96);
        let p = k as f64 / n as f64;
        prop_assert!(lo <= p && p <= hi && 0.0 <= lo && hi <= 1.0);
    }

    #[test]
    fn sech_kernel_shape(alpha in -0.99f64..6.0, tau in 0.0f64..100.0, dtau in 0.001f64..5.0) {
        let c = cov_sech(tau, alpha);
        prop_assert!(c > 0.0 && c <= 1.0);
        prop_assert_eq!(c, cov_sech(-tau, alpha));
        prop_assert!(cov_sech(tau + dtau, alpha) <= c);
    }

    #[test]
    fn correlation_in_unit_interval(alpha in 0.0f64..3.0, t1 in 0.2f64..5.0, t2 in 0.2f64..5.0) {
        let lc = LimitCovariance::new(0, 8.0, 0.3, alpha, Variant::UpperBoundH).unwrap();
        let c = corr_c(&lc, t1, t2).unwrap();
        prop_assert!(c > 0.0 && c <= 1.0);
        if (t1 - t2).abs() > 1e-3 {
            prop_assert!(c < 1.0 - 1e-9);
        }
        prop_assert!((c - corr_c(&lc, t2, t1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn certificate_never_false_when_valid(
        rho in 0.1f64..5.0,
        draws in prop::collection::vec((1.0f64..3.0, 0.0f64..1.0), 21),
        x_grid in prop::collection::vec(-20.0f64..20.0, 1..50),
    ) {
        let eta = 0.5;
        let eps = 0.05;
        let w = RegularlyVaryingWeight::new(0.0, SlowlyVarying::Constant).unwrap();
        let mut xi = Vec::with_capacity(41);
        for (k, (even, odd)) in draws.iter().enumerate() {
            xi.push(-rho * even);
            if k < 20 {
                xi.push(-eta * rho * odd);
            }
        }
        prop_assert!(negativity_block_certificate(rho, eta, eps, &w, &xi, 0..=40, &x_grid).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn estimate_invariants(n in 1usize..40, seed in any::<u64>()) {
        let w = RegularlyVaryingWeight::new(0.5, SlowlyVarying::Constant).unwrap();
        let e = estimate_persistence(n, &w, &CoefficientDistribution::rademacher(), 300, &PersistencePolicy::default(), seed).unwrap();
        prop_assert!(e.persist_count + e.unknown_count <= e.trials);
        prop_assert!(e.ci95.0 <= e.p_hat && e.p_hat <= e.ci95.1);
        if n % 2 == 1 {
            prop_assert_eq!(e.p_hat, 0.0);
        } else {
            prop_assert_eq!(e.p_hat, e.persist_count as f64 / (e.trials - e.unknown_count) as f64);
        }
    }

    #[test]
    fn streams_reproduce(seed in any::<u64>(), point in any::<u64>(), trial in any::<u64>()) {
        use rand::Rng;
        let k = StreamKey::new(seed, "prop", point);
        let a: u64 = k.rng(trial).random();
        let b: u64 = k.rng(trial).random();
        prop_assert_eq!(a, b);
    }
}
