//! Cross-route consistency checks: every closed form against its numeric
//! counterpart, and the zeta implementations against finite differences.

use limb_core::analysis::{self, zeta, zeta_prime, Integrand};
use limb_core::estimators::{
    lim_b_lower_closed, lim_b_numeric, lim_b_upper, LimCalibration, Workload,
};
use limb_core::schedules::{LearningRateSchedule, UpdateRateSchedule};
use limb_core::thermo::ThermalEnvironment;

#[test]
fn weighted_unit_sum_is_zeta() {
    for &gamma in &[0.5, 1.0, 2.0, 5.0, 10.0] {
        let ur = UpdateRateSchedule::polynomial(gamma).unwrap();
        let s = analysis::sum_weighted(&ur, &Integrand::Unit, 1e-10).unwrap();
        let z = zeta(1.0 + gamma).unwrap();
        assert!(
            (s.value - z).abs() <= 2e-10 * z,
            "gamma={gamma}: {} vs {z}",
            s.value
        );
    }
}

#[test]
fn weighted_exponential_sum_is_geometric() {
    for &gamma in &[0.5, 1.0, 2.0] {
        let ur = UpdateRateSchedule::exponential(gamma).unwrap();
        let s = analysis::sum_weighted(&ur, &Integrand::Unit, 1e-10).unwrap();
        let closed = 1.0 / gamma.exp_m1();
        assert!((s.value - closed).abs() <= 1e-9 * closed);
    }
}

#[test]
fn zeta_prime_consistent_with_finite_differences() {
    let h = 1e-5;
    for &s in &[1.5, 2.0, 3.0, 11.0] {
        let fd = (zeta(s + h).unwrap() - zeta(s - h).unwrap()) / (2.0 * h);
        let zp = zeta_prime(s).unwrap();
        assert!(
            (fd - zp).abs() <= 1e-5 * zp.abs(),
            "s={s}: fd {fd} vs closed {zp}"
        );
    }
}

#[test]
fn lower_closed_and_upper_sandwich_numeric() {
    let env = ThermalEnvironment::default();
    let lr = LearningRateSchedule::harmonic();
    let cal = LimCalibration::Asymptotic;
    let w = Workload::with_bits("sandwich", 1e28, 1e15, 16.0).unwrap();
    for &gamma in &[2.0, 5.0, 10.0] {
        let ur = UpdateRateSchedule::polynomial(gamma).unwrap();
        let num = lim_b_numeric(&w, &lr, &ur, &env, &cal, 1e-9)
            .unwrap()
            .dynamic_kt_per_op;
        let lb = lim_b_lower_closed(&w, gamma, &env)
            .unwrap()
            .dynamic_kt_per_op;
        let ub = lim_b_upper(&w, &env).dynamic_kt_per_op;
        assert!(
            lb <= num && num <= ub,
            "gamma={gamma}: {lb} <= {num} <= {ub}"
        );
    }
}

#[test]
fn numeric_per_op_never_beats_landauer() {
    let env = ThermalEnvironment::default();
    let lr = LearningRateSchedule::harmonic();
    let cal = LimCalibration::Asymptotic;
    for &bits in &[8.0, 16.0] {
        let w = Workload::with_bits("floor", 1e28, 1e15, bits).unwrap();
        for &gamma in &[0.5, 1.0, 2.0, 5.0, 10.0] {
            let ur = UpdateRateSchedule::polynomial(gamma).unwrap();
            let num = lim_b_numeric(&w, &lr, &ur, &env, &cal, 1e-9)
                .unwrap()
                .dynamic_kt_per_op;
            assert!(
                num >= std::f64::consts::LN_2,
                "gamma={gamma} bits={bits}: {num}"
            );
        }
    }
}
