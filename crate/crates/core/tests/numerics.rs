use coalesce_core::numerics::{integrate_01, log_beta, log_gamma, renewal_sequence, RenewalSequence};
use coalesce_core::rates::{interarrival, interarrival_tail};
use proptest::prelude::*;
use std::f64::consts::PI;

fn half_integer_coefficient(k: usize) -> f64 {
    // Γ(k+1/2) / (Γ(1/2) Γ(k+1)) = Π_{m=1..k} (m - 1/2)/m
    (1..=k).map(|m| (m as f64 - 0.5) / m as f64).product()
}

#[test]
fn log_gamma_and_log_beta_reference_values() {
    assert_eq!(log_gamma(1.0).unwrap(), 0.0);
    assert!((log_gamma(5.0).unwrap() - 3.178_053_830_347_945_6).abs() < 1e-13);
    assert!((log_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-13);
    assert!(log_beta(1.0, 1.0).unwrap().abs() < 1e-15);
    assert!((log_beta(0.5, 0.5).unwrap() - 1.144_729_885_849_400_2).abs() < 1e-13);
    assert!((log_beta(2.0, 3.0).unwrap() + 2.484_906_649_788_000_4).abs() < 1e-13);
    assert!(log_gamma(-0.5).is_err());
}

#[test]
fn quadrature_reference_integrals() {
    let r = integrate_01(|x| x, 1e-12).unwrap();
    assert!((r.value - 0.5).abs() < 1e-14);
    let r = integrate_01(|x| -x / (-x).ln_1p(), 1e-12).unwrap();
    // alternating-sum oracle at j = 2 reduces to log 2
    assert!((r.value - 2f64.ln()).abs() < 1e-11);
    let r = integrate_01(|x| 1.0 / (x * (1.0 - x)).sqrt(), 1e-10).unwrap();
    assert!((r.value - PI).abs() < 1e-7, "{r:?}");
}

#[test]
fn renewal_alpha_one_half_closed_form() {
    let u = RenewalSequence::beta(0.5, 500).unwrap();
    for k in 0..=500 {
        let want = 0.5 * (half_integer_coefficient(k) + if k == 0 { 1.0 } else { 0.0 });
        assert!((u.values()[k] - want).abs() <= 1e-12, "k={k}");
    }
    assert!((u.values()[1] - 0.25).abs() < 1e-15);
}

#[test]
fn renewal_alpha_three_halves_closed_form() {
    let u = RenewalSequence::beta(1.5, 500).unwrap();
    for k in 0..=500 {
        let want = 0.5 * (half_integer_coefficient(k) + 1.0);
        assert!((u.values()[k] - want).abs() <= 1e-12, "k={k}");
    }
    assert_eq!(u.values()[0], 1.0);
    assert!((u.values()[1] - 0.75).abs() < 1e-15);
}

#[test]
fn renewal_alpha_one_first_terms() {
    let u = RenewalSequence::beta(1.0, 2).unwrap();
    assert_eq!(u.values()[0], 1.0);
    assert!((u.values()[1] - 0.5).abs() < 1e-15);
    assert!((u.values()[2] - 5.0 / 12.0).abs() < 1e-15);
}

/// Coefficients of `1/Q` for a power series `Q` with `Q[0] != 0`.
fn series_inverse(q: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    out[0] = 1.0 / q[0];
    for k in 1..len {
        let mut acc = 0.0;
        for m in 1..=k.min(q.len() - 1) {
            acc += q[m] * out[k - m];
        }
        out[k] = -acc / q[0];
    }
    out
}

/// Renewal measure from the closed-form generating function
/// `-(α-1) y / ((1-y)^α - (1-y))`, expanded without reference to η.
fn renewal_by_series_division(alpha: f64, len: usize) -> Vec<f64> {
    if alpha == 1.0 {
        // -y / ((1-y) ln(1-y)) = 1 / ((1-y) R(y)), R = Σ_{m≥1} y^{m-1}/m
        let mut r = vec![0.0; len + 1];
        for m in 1..=len + 1 {
            r[m - 1] = 1.0 / m as f64;
        }
        // (1-y) R(y)
        let mut q = vec![0.0; len + 1];
        for k in 0..=len {
            q[k] = r[k] - if k > 0 { r[k - 1] } else { 0.0 };
        }
        return series_inverse(&q, len);
    }
    // (1-y)^α - (1-y) = y Q(y), Q[0] = 1 - α, Q[m-1] = (-1)^m C(α, m) for m >= 2
    let mut q = vec![0.0; len + 1];
    q[0] = 1.0 - alpha;
    let mut c = 1.0; // (-1)^m C(α, m)
    for m in 1..=len + 1 {
        c *= -(alpha - (m as f64 - 1.0)) / m as f64;
        if m >= 2 {
            q[m - 1] = c;
        }
    }
    series_inverse(&q, len).into_iter().map(|v| v * (1.0 - alpha)).collect()
}

#[test]
fn renewal_matches_generating_function_coefficients() {
    for &alpha in &[0.3, 0.5, 0.9, 1.0, 1.2, 1.5, 1.9] {
        let u = RenewalSequence::beta(alpha, 30).unwrap();
        let series = renewal_by_series_division(alpha, 31);
        for k in 0..=30 {
            assert!(
                (u.values()[k] - series[k]).abs() <= 1e-8,
                "alpha={alpha} k={k}: {} vs {}",
                u.values()[k],
                series[k]
            );
        }
    }
}

#[test]
fn interarrival_law_is_a_probability_measure() {
    for step in 1..8 {
        let alpha = 0.25 * step as f64;
        let mut partial = 0.0;
        let mut prev = 0.0;
        for j in 1..=100_000usize {
            partial += interarrival(alpha, j).unwrap();
            assert!(partial >= prev && partial <= 1.0 + 1e-12);
            prev = partial;
            if j % 10_000 == 0 {
                let tail = interarrival_tail(alpha, j + 1).unwrap();
                assert!((partial + tail - 1.0).abs() < 1e-12, "alpha={alpha} j={j}");
            }
        }
        // the tail decays like J^{-α}: below 1e-6 once J is near 10^{6.5/α}, which
        // only fits a machine integer for α >= 1/2
        if alpha >= 0.5 {
            let big = 10f64.powf(6.5 / alpha) as usize;
            assert!(interarrival_tail(alpha, big).unwrap() < 1e-6, "alpha={alpha}");
        } else {
            let a = interarrival_tail(alpha, 1 << 40).unwrap();
            let b = interarrival_tail(alpha, 1 << 45).unwrap();
            assert!(b < a && (b / a - 2f64.powf(-5.0 * alpha)).abs() < 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn renewal_values_are_probabilities_and_self_consistent(alpha in 0.05f64..1.95, m in 1usize..200) {
        let u = RenewalSequence::beta(alpha, m).unwrap();
        let u = u.values();
        prop_assert_eq!(u[0], 1.0);
        for k in 1..=m {
            prop_assert!(u[k] >= 0.0 && u[k] <= 1.0);
            let rhs: f64 = (1..=k).map(|j| interarrival(alpha, j).unwrap() * u[k - j]).sum();
            prop_assert!((u[k] - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn generic_renewal_is_bounded(p in 0.01f64..0.99, m in 0usize..100) {
        let s = renewal_sequence(|j| p * (1.0 - p).powi(j as i32 - 1), m);
        prop_assert_eq!(s.values().len(), m + 1);
        prop_assert!(s.values().iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn quadrature_power_law(a in -0.9f64..3.0) {
        let r = coalesce_core::numerics::integrate_01_split(|x, _| x.powf(a), 1e-10).unwrap();
        prop_assert!((r.value - 1.0 / (a + 1.0)).abs() <= 1e-10f64.max(r.abs_error_estimate) * 10.0);
    }
}
