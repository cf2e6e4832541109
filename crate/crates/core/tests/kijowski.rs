use osc_povm::meas_models::{
    kijowski_pdf, kijowski_total, no_detection_probability, two_packet_arrival_pdf, MomentumWavefunction,
    TwoPacketSpec,
};
use proptest::prelude::*;

const M: f64 = 1000.0;
const PBAR: f64 = 10.0;
const L: f64 = 1e6;
const A: f64 = 1e4;

fn classical_arrival(l: f64) -> f64 {
    l * M / PBAR
}

fn arrival_width() -> f64 {
    A * M / PBAR
}

/// Maximum of a unimodal function on [lo, hi].
fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

fn peak_time(l: f64) -> f64 {
    let psi = MomentumWavefunction::gaussian(PBAR, A, l).unwrap();
    let t0 = classical_arrival(l);
    let w = arrival_width();
    golden_max(|t| kijowski_pdf(&psi, M, t).unwrap(), t0 - 2.0 * w, t0 + 2.0 * w, 1e-4 * w)
}

#[test]
fn gaussian_is_detected_with_certainty() {
    let psi = MomentumWavefunction::gaussian(PBAR, A, L).unwrap();
    let (t0, w) = (classical_arrival(L), arrival_width());
    let total = kijowski_total(&psi, M, t0 - 12.0 * w, t0 + 12.0 * w).unwrap();
    assert!((total - 1.0).abs() < 1e-6, "{total}");
    let missed = no_detection_probability(&psi, M, t0 - 12.0 * w, t0 + 12.0 * w).unwrap();
    assert!(missed.abs() < 1e-6);
    // a window that closes before the packet arrives sees almost nothing
    let early = kijowski_total(&psi, M, 0.0, t0 - 8.0 * w).unwrap();
    assert!(early < 1e-6, "{early}");
}

#[test]
fn peak_sits_at_classical_arrival() {
    let t = peak_time(L);
    assert!((t / classical_arrival(L) - 1.0).abs() < 1e-2);
}

#[test]
fn moving_the_source_shifts_the_peak() {
    let c = 3.0 * A;
    let shift = peak_time(L + c) - peak_time(L);
    assert!((shift / (c * M / PBAR) - 1.0).abs() < 1e-2, "{shift}");
}

#[test]
fn two_packet_density_follows_leading_order_shape() {
    let spec = TwoPacketSpec::new(M, L, A, PBAR, 10.01).unwrap();
    let psi = MomentumWavefunction::two_packet(&spec).unwrap();
    let (c, s) = (spec.mean_arrival(), spec.arrival_width());
    let n = 1024;
    let h = 8.0 * s / n as f64;
    let (mut diff, mut norm) = (0.0, 0.0);
    for i in 0..=n {
        let t = c - 4.0 * s + h * i as f64;
        let exact = kijowski_pdf(&psi, M, t).unwrap();
        let approx = 2.0 * two_packet_arrival_pdf(&spec, t);
        diff += (exact - approx).powi(2);
        norm += exact * exact;
    }
    let rel = (diff / norm).sqrt();
    assert!(rel < 5e-2, "{rel}");
}

#[test]
fn fringes_are_in_phase_at_mean_arrival() {
    let spec = TwoPacketSpec::new(M, L, A, PBAR, 10.01).unwrap();
    let psi = MomentumWavefunction::two_packet(&spec).unwrap();
    let t = spec.mean_arrival();
    let half_period = std::f64::consts::PI / spec.omega();
    let bright = kijowski_pdf(&psi, M, t).unwrap();
    let dark = kijowski_pdf(&psi, M, t + half_period).unwrap();
    assert!(dark < 0.1 * bright, "{dark} vs {bright}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn density_is_nonnegative(pbar in 0.2f64..3.0, a in 0.5f64..4.0, l in 0.0f64..20.0, t in -5.0f64..60.0) {
        let psi = MomentumWavefunction::gaussian(pbar, a, l).unwrap();
        prop_assert!(kijowski_pdf(&psi, 1.0, t).unwrap() >= 0.0);
    }
}
