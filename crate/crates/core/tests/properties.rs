//! Cross-module invariants, checked on random inputs.

use std::sync::OnceLock;

use clusterlab::cluster::{extract_clusters, max_cluster_size, MaxMode};
use clusterlab::exact::{
    rooted_polynomials, verify_swap_identity, JointCountPolynomials, PerimeterPolynomial,
};
use clusterlab::lattice::Window;
use clusterlab::pattern::Pattern;
use clusterlab::sampler::{sample_product_with, ProductMeasureSpec, RngPolicy};
use clusterlab::RationalTail;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn rooted() -> &'static (PerimeterPolynomial, PerimeterPolynomial) {
    static CELL: OnceLock<(PerimeterPolynomial, PerimeterPolynomial)> = OnceLock::new();
    CELL.get_or_init(|| rooted_polynomials(8, 8).unwrap())
}

fn joint() -> &'static JointCountPolynomials {
    static CELL: OnceLock<JointCountPolynomials> = OnceLock::new();
    CELL.get_or_init(|| {
        JointCountPolynomials::enumerate(
            &Pattern::vacant_site(2),
            &Pattern::occupied_site(2),
            10,
            10,
        )
        .unwrap()
    })
}

fn rational() -> impl Strategy<Value = BigRational> {
    (1i64..40, 41i64..80).prop_map(|(a, b)| BigRational::new(BigInt::from(a), BigInt::from(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn left_endpoint_identity_is_exact_in_rationals(p in rational()) {
        let (all, le) = rooted();
        let t = RationalTail::from_rooted(all, le, p);
        for n in 1..=8usize {
            let scaled = BigRational::from_integer(BigInt::from(n)) * t.c_star(n).unwrap();
            prop_assert_eq!(t.c(n).unwrap(), &scaled);
        }
    }

    #[test]
    fn swap_identity_is_exact_in_rationals(p in rational(), n in 8usize..10) {
        let chk = verify_swap_identity(joint(), n, p).unwrap();
        prop_assert_eq!(chk.max_rel_error, 0.0);
        prop_assert_eq!(chk.orphans, 0);
    }

    #[test]
    fn finite_only_never_exceeds_all(seed in any::<u64>(), p in 0.3f64..0.8, half in 2i64..8) {
        let w = Window::cube(2, 24, 2).unwrap();
        let spec = ProductMeasureSpec::bernoulli(p).unwrap();
        let c = sample_product_with(&w, &spec, &mut RngPolicy::new(seed).stream(0)).unwrap();
        let bx = Window::new(vec![12 - half; 2], vec![12 + half; 2], 2).unwrap();
        let all = max_cluster_size(&c, &bx, MaxMode::All).unwrap();
        let finite = max_cluster_size(&c, &bx, MaxMode::FiniteOnly).unwrap();
        prop_assert!(all >= finite);
        let largest = extract_clusters(&c).clusters().iter().map(|k| k.size).max().unwrap_or(0);
        prop_assert!(all <= largest);
    }

    #[test]
    fn product_samples_ignore_thread_count(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let w = Window::cube(2, 16, 2).unwrap();
        let spec = ProductMeasureSpec::bernoulli(p).unwrap();
        let policy = RngPolicy::new(seed);
        let run = || policy.par_replicates(4, |_, rng| sample_product_with(&w, &spec, rng).unwrap());
        let pooled = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(run);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        prop_assert_eq!(pooled, single);
    }
}
