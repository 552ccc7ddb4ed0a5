use klfree_core::sumset::is_sum_free;
use klfree_core::torus::{arc_k_fold, best_dilation, dilation_subset, omega, verify_omega_sum_free};
use klfree_core::{Fold, IntSet, KLParams, Rational};
use proptest::prelude::*;

const FAMILY: [(u32, u32); 5] = [(2, 1), (3, 1), (3, 2), (5, 1), (4, 2)];

#[test]
fn omega_sweep_exact() {
    for k in 2..=12 {
        for l in 1..k {
            let p = KLParams::new(k, l).unwrap();
            for t in 1..=k - l {
                let w = omega(p, t).unwrap();
                assert_eq!(w.length(), &Rational::new(1, (k + l) as i64));
                assert!(verify_omega_sum_free(p, t).unwrap(), "({k},{l}) t={t}");
                match (arc_k_fold(&w, k), arc_k_fold(&w, l)) {
                    (Fold::Arc(a), Fold::Arc(b)) => assert!(a.is_disjoint(&b)),
                    other => panic!("unexpected folds {other:?}"),
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dilation_meets_average(v in prop::collection::btree_set(1u64..=100, 1..=20), which in 0..FAMILY.len()) {
        let (k, l) = FAMILY[which];
        let p = KLParams::new(k, l).unwrap();
        let a = IntSet::new(v.into_iter().collect()).unwrap();
        let r = best_dilation(&a, p).unwrap();
        let need = a.len().div_ceil((k + l) as usize);
        prop_assert!(r.count >= need, "count {} < {}", r.count, need);
        prop_assert_eq!(r.subset.len(), r.count);
        prop_assert!(is_sum_free(&r.subset, p).unwrap());
    }

    #[test]
    fn any_dilation_subset_is_sum_free(
        v in prop::collection::btree_set(1u64..=60, 1..=15),
        num in 0i64..1000,
        which in 0..FAMILY.len(),
    ) {
        let (k, l) = FAMILY[which];
        let p = KLParams::new(k, l).unwrap();
        let a = IntSet::new(v.into_iter().collect()).unwrap();
        let x = Rational::new(num, 997);
        for t in 1..=k - l {
            let s = dilation_subset(&a, &x, &omega(p, t).unwrap());
            prop_assert!(is_sum_free(&s, p).unwrap());
        }
    }
}
