use laurent_core::bounds::{global_constant_sum, kernel_u, mu, MU_TOTAL};
use laurent_core::coefficients::coefficients_with;
use laurent_core::geometry::Polyannulus;
use laurent_core::multiindex::{box_index_bound, box_size, shell_of, sigma, sigma_inverse};
use laurent_core::seminorms::{monomial_box_seminorm_exact, DerivativeSamples, Resolution, SeminormKind};
use laurent_core::series::{sandwich_check, FiniteIndexSet};
use laurent_core::testfns::{falling_factorial, ipow, TestFunction};
use laurent_core::{Complex64, MultiIndex};
use proptest::prelude::*;

fn exponent(n: usize, max: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-max..=max, n)
}

fn annulus() -> impl Strategy<Value = Polyannulus> {
    (0.1f64..0.9, 1.05f64..2.0).prop_map(|(r, big_r)| Polyannulus::annulus_product(&[r, r], &[big_r, 1.5]).unwrap())
}

proptest! {
    #[test]
    fn sigma_round_trips(n in 1usize..=3, j in 0usize..50_000) {
        let a = sigma(j, n);
        prop_assert_eq!(a.dim(), n);
        prop_assert_eq!(sigma_inverse(&a), j);
        prop_assert_eq!(a.linf_norm(), shell_of(j, n));
    }

    #[test]
    fn sigma_inverse_is_inside_its_box(n in 1usize..=3, a in exponent(3, 25)) {
        let a = MultiIndex::new(a[..n].to_vec());
        let j = sigma_inverse(&a);
        prop_assert!(j < box_size(a.linf_norm(), n));
        prop_assert_eq!(sigma(j, n), a);
    }

    #[test]
    fn box_index_bound_brackets(n in 1usize..=3, m in 1u64..1_000_000) {
        let m1 = box_index_bound(m, n);
        prop_assert!(box_size(m1, n) as u64 <= m);
        prop_assert!(box_size(m1 + 1, n) as u64 > m);
    }

    #[test]
    fn mu_is_symmetric_and_kernel_matches(l in -100_000i64..100_000, theta in 0.0f64..std::f64::consts::TAU) {
        prop_assert_eq!(mu(l), mu(1 - l));
        prop_assert!((kernel_u(l, theta).norm() - mu(l)).abs() <= 1e-15);
    }

    #[test]
    fn constant_sums_increase_towards_the_limit(n in 1usize..=3, k in 0u32..=4, b in 0.1f64..10.0) {
        let sums = global_constant_sum(k, b, n, 60);
        prop_assert!(sums.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(sums[60] < b * MU_TOTAL.powi(n as i32));
    }

    #[test]
    fn falling_factorial_steps(a in -30i64..30, g in 0u32..6) {
        let next = falling_factorial(a, g + 1);
        prop_assert_eq!(next, falling_factorial(a, g) * (a - g as i64) as f64);
    }

    #[test]
    fn index_sets_are_sorted_and_deduplicated(raw in prop::collection::vec(exponent(2, 6), 0..60)) {
        let set = FiniteIndexSet::new(raw.iter().cloned().map(MultiIndex::new));
        let order: Vec<usize> = set.iter().map(sigma_inverse).collect();
        prop_assert!(order.windows(2).all(|w| w[0] < w[1]));
        for a in &raw {
            prop_assert!(set.contains(&MultiIndex::new(a.clone())));
        }
    }

    #[test]
    fn nonnegative_terms_satisfy_the_prefix_sandwich(
        n in 1usize..=2,
        terms in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], 125),
    ) {
        prop_assert!(sandwich_check(&terms, n).passed());
    }

    #[test]
    fn laurent_polynomials_are_recovered(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
        radius in 0.5f64..2.0,
        extra in 0usize..4,
    ) {
        let support: Vec<i64> = (-4..=4).collect();
        let c: Vec<Complex64> = coeffs.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let eval = |z: &[Complex64]| support.iter().zip(&c).map(|(&a, c)| c * ipow(z[0], a)).sum::<Complex64>();
        let t = coefficients_with(eval, &[radius], 9 + extra, 4).unwrap();
        for (&a, c) in support.iter().zip(&c) {
            let got = t.get(&MultiIndex::new(vec![a])).unwrap();
            // DFT roundoff is relative to the largest sample, scaled back by r^-a
            prop_assert!((got - c).norm() <= 1e-14 * t.sample_max() * radius.powi(-(a as i32)));
        }
    }

    #[test]
    fn exact_monomial_seminorm_is_homogeneous(
        a in exponent(2, 6),
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
        k in 0u32..=3,
        region in annulus(),
    ) {
        let alpha = MultiIndex::new(a);
        let one = monomial_box_seminorm_exact(Complex64::new(1.0, 0.0), &alpha, &region, k).unwrap();
        let scaled = monomial_box_seminorm_exact(Complex64::new(re, im), &alpha, &region, k).unwrap();
        let lambda = Complex64::new(re, im).norm();
        prop_assert!((scaled - lambda * one).abs() <= 1e-12 * (1.0 + scaled));
    }

    #[test]
    fn sampled_monomial_seminorm_stays_below_exact(a in exponent(2, 5), k in 0u32..=2, region in annulus()) {
        let alpha = MultiIndex::new(a);
        let f = TestFunction::new("m", laurent_core::testfns::Expr::Monomial { exponent: alpha.clone() }, region.clone()).unwrap();
        let samples = DerivativeSamples::of_function(&f, &region, k, Resolution::new(6, 4)).unwrap();
        let sampled = samples.report(SeminormKind::Box, k).unwrap().value;
        let exact = monomial_box_seminorm_exact(Complex64::new(1.0, 0.0), &alpha, &region, k).unwrap();
        prop_assert!(sampled <= exact * (1.0 + 1e-12));
    }

    #[test]
    fn sampled_seminorms_obey_the_triangle_inequality(
        a in exponent(2, 4),
        b in exponent(2, 4),
        w in (-2.0f64..2.0, -2.0f64..2.0),
        k in 0u32..=2,
        region in annulus(),
    ) {
        let (fa, fb) = (MultiIndex::new(a), MultiIndex::new(b));
        let w = Complex64::new(w.0, w.1);
        let mono = |alpha: &MultiIndex, g: &[u32], z: &[Complex64]| -> Complex64 {
            alpha.entries().iter().zip(g).zip(z).map(|((&e, &g), &zj)| falling_factorial(e, g) * ipow(zj, e - g as i64)).product()
        };
        let res = Resolution::new(5, 4);
        let value = |s: DerivativeSamples| s.report(SeminormKind::Box, k).unwrap().value;
        let f = value(DerivativeSamples::from_fn(&region, k, res, |g, z| mono(&fa, g, z)));
        let g = value(DerivativeSamples::from_fn(&region, k, res, |g, z| w * mono(&fb, g, z)));
        let sum = value(DerivativeSamples::from_fn(&region, k, res, |g, z| mono(&fa, g, z) + w * mono(&fb, g, z)));
        prop_assert!(sum <= (f + g) * (1.0 + 1e-12));
        let ck = DerivativeSamples::from_fn(&region, k, res, |g, z| mono(&fa, g, z));
        prop_assert!(ck.report(SeminormKind::Ck, k).unwrap().value <= f * (1.0 + 1e-15));
    }
}
