use std::f64::consts::PI;

use klfree_core::charfns::{
    alpha, alpha_cosine_sum, beta_gamma, beta_sine_sum, char_value, phi_from_alpha, psi_from_beta, CharKind,
    CharSpec,
};
use klfree_core::trigdet::{
    chebyshev_coefficients, chebyshev_leading_fd, det_closed, det_direct, scaled_error, solve_coefficients, DetKind,
    SolveTarget,
};
use klfree_core::KLParams;
use proptest::prelude::*;

fn kl(k: u32, l: u32) -> KLParams {
    KLParams::new(k, l).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn determinants_match_closed_forms(theta in prop::collection::vec(0.01f64..PI - 0.01, 2..=8)) {
        for kind in [DetKind::A, DetKind::B] {
            let e = scaled_error(det_direct(kind, &theta).unwrap(), det_closed(kind, &theta));
            prop_assert!(e <= 1e-9, "{kind:?} n={} error {e}", theta.len());
        }
        let n = theta.len() as i32;
        let sines: f64 = theta.iter().map(|t| t.sin()).product();
        let chained = 2f64.powi(n - 1) * sines * det_direct(DetKind::B, &theta).unwrap();
        prop_assert!(scaled_error(det_direct(DetKind::A, &theta).unwrap(), chained) <= 1e-9);
    }
}

#[test]
fn chebyshev_leading_terms() {
    for n in 1..=10 {
        let lead = *chebyshev_coefficients(n).last().unwrap();
        assert_eq!(lead, 1i128 << (n - 1));
        assert!((chebyshev_leading_fd(n) - 2f64.powi(n as i32 - 1)).abs() <= 1e-6);
    }
}

#[test]
fn alpha_is_the_cosine_sum() {
    for d in [2u32, 4, 6, 8] {
        let p = kl(d + 1, 1);
        for n in 0..=2000 {
            let e = (alpha(n, p).unwrap() as f64 - alpha_cosine_sum(n, p)).abs();
            assert!(e <= 1e-9, "k-l={d} n={n}: {e}");
        }
    }
}

#[test]
fn beta_is_the_weighted_sine_sum() {
    for (k, l) in [(3, 1), (5, 1), (7, 1), (9, 1), (6, 2), (8, 4)] {
        let p = kl(k, l);
        let lambda = solve_coefficients(SolveTarget::LambdaD(p)).unwrap().coeffs;
        for n in 1..=500 {
            let (b, g) = beta_gamma(n, p).unwrap();
            assert!((b as f64 - beta_sine_sum(n, p, &lambda).unwrap()).abs() <= 1e-9, "({k},{l}) n={n}");
            let m = p.diff() as i64;
            assert_eq!(g, beta_gamma(m * n / 2, p).unwrap().0);
        }
    }
    let l51 = solve_coefficients(SolveTarget::LambdaD(kl(5, 1))).unwrap();
    assert!((l51.coeffs[0] - 0.5).abs() <= 1e-12 && (l51.coeffs[1] + 0.5).abs() <= 1e-12);
}

#[test]
fn solved_weights_reproduce_phi_and_psi() {
    for u in [2u32, 4, 6, 8] {
        let a = solve_coefficients(SolveTarget::AlphaX { u }).unwrap();
        let b = solve_coefficients(SolveTarget::BetaY { u }).unwrap();
        assert!(a.residual < 1e-12 && b.residual < 1e-12);
        for n in 1..=400u64 {
            let phi = char_value(CharSpec::with_u(CharKind::PhiU, u), n).unwrap() as f64;
            let psi = char_value(CharSpec::with_u(CharKind::PsiCapU, u), n).unwrap() as f64;
            assert!((phi_from_alpha(n, u, &a.coeffs) - phi).abs() <= 1e-9, "Φ_{u}({n})");
            assert!((psi_from_beta(n, u, &b.coeffs) - psi).abs() <= 1e-9, "Ψ_{u}({n})");
        }
    }
}
