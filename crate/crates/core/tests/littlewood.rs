use klfree_core::littlewood::{
    build_blocks, build_phi, build_pq, fejer, g_series, h_diagnostics, hilbert, inner_product, invariant_ledger,
    HWeights, HSeriesSpec, DEFAULT_TERM_BUDGET,
};
use klfree_core::charfns::{CharKind, CharSpec};
use klfree_core::{IntSet, TestFunctionSpec, TrigPoly};
use num_complex::Complex64;
use proptest::prelude::*;

fn poly(coeffs: Vec<(i64, f64, f64)>) -> TrigPoly {
    TrigPoly::from_coeffs(coeffs.into_iter().map(|(n, re, im)| (n, Complex64::new(re, im))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hilbert_is_an_isometry_off_the_mean(c in prop::collection::vec((-30i64..=30, -1.0f64..1.0, -1.0f64..1.0), 1..12)) {
        let f = poly(c);
        let mean = f.coeff(0).norm_sqr();
        let h = hilbert(&f);
        prop_assert!((h.l2_norm().powi(2) - (f.l2_norm().powi(2) - mean)).abs() < 1e-12);
        prop_assert!(hilbert(&h).iter().all(|(n, v)| (v + f.coeff(n)).norm() < 1e-12));
    }

    #[test]
    fn inner_product_is_hermitian(
        a in prop::collection::vec((-20i64..=20, -1.0f64..1.0, -1.0f64..1.0), 0..10),
        b in prop::collection::vec((-20i64..=20, -1.0f64..1.0, -1.0f64..1.0), 0..10),
    ) {
        let (f, g) = (poly(a), poly(b));
        prop_assert!((inner_product(&f, &g) - inner_product(&g, &f).conj()).norm() < 1e-12);
        prop_assert!((inner_product(&f, &f).re - f.l2_norm().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn fejer_weights_in_unit_interval(m in 1u64..200) {
        let f = fejer(m).unwrap();
        prop_assert!(f.iter().all(|(_, c)| c.im == 0.0 && c.re > 0.0 && c.re <= 1.0));
        prop_assert!((f.eval(0.0).re - m as f64).abs() < 1e-9);
    }

    #[test]
    fn ledger_holds_on_random_sets(v in prop::collection::btree_set(1u64..=120, 6..=40), base in 2u64..=4, r0 in 1u64..=4) {
        let a = IntSet::new(v.into_iter().collect()).unwrap();
        prop_assume!(a.len() as u64 > base);
        let tf = build_phi(&TestFunctionSpec::new(a, r0, base, None).unwrap()).unwrap();
        let ledger = invariant_ledger(&tf).unwrap();
        for c in &ledger.checks {
            prop_assert!(c.pass, "{:?}", c);
        }
    }
}

#[test]
fn blocks_partition_in_order() {
    let a = IntSet::new((1..=50).map(|x| x * x).collect()).unwrap();
    let spec = TestFunctionSpec::new(a.clone(), 2, 3, None).unwrap();
    let blocks = build_blocks(&spec).unwrap();
    let flat: Vec<u64> = blocks.iter().flat_map(|b| b.elements.iter()).collect();
    assert_eq!(flat, a.as_slice());
    let sizes: Vec<usize> = blocks.iter().map(|b| b.elements.len()).collect();
    assert_eq!(sizes, vec![1, 3, 9, 27, 10]);
}

#[test]
fn p_support_and_q_support() {
    let spec = TestFunctionSpec::new(IntSet::range(1, 64).unwrap(), 3, 4, Some(65536)).unwrap();
    for b in build_blocks(&spec).unwrap() {
        let pq = build_pq(&b, &spec).unwrap();
        let (lo, hi) = pq.p.support().unwrap();
        assert!(lo >= b.lo as i64 && hi <= b.hi as i64);
        let (qlo, qhi) = pq.q.support().unwrap();
        assert!(qlo >= -((b.hi - b.lo) as i64) && qhi <= 0);
        assert!(pq.q_outside_mass <= 1e-6);
    }
}

#[test]
fn g_pairing_and_h_diagnostics() {
    let a = IntSet::range(1, 64).unwrap();
    let tf = build_phi(&TestFunctionSpec::new(a.clone(), 3, 4, Some(65536)).unwrap()).unwrap();
    let g = g_series(&a, &[1, 3]);
    let total = inner_product(&g, &tf.phi);
    assert!(total.re > 0.0);
    let h = HSeriesSpec::new(HWeights::Character(CharSpec::new(CharKind::Psi)), 11, 1, vec![1, 2, 3], 2000).unwrap();
    let d = h_diagnostics(&h, &tf, DEFAULT_TERM_BUDGET).unwrap();
    assert_eq!(d.proj_norms.len(), tf.blocks.len());
    assert!(d.h_phi_pairing.is_finite() && d.l1_lower_bound.is_finite());
    assert_eq!(d.gamma_pairings.len(), 3);
}
