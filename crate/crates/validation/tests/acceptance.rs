use std::io::Write;
use std::sync::OnceLock;

use pme_absorb::acceptance::{run_criterion, AcceptanceOptions, Context};
use pme_absorb::config::param_preset;

fn context() -> &'static Context {
    static CTX: OnceLock<Context> = OnceLock::new();
    CTX.get_or_init(|| {
        let p = param_preset("default").unwrap();
        Context::prepare(p, AcceptanceOptions::default()).expect("shooting the presets")
    })
}

fn check(id: u8) {
    let r = run_criterion(context(), id).unwrap();
    // written straight to stderr so the verdict shows even when output is captured
    let _ = writeln!(std::io::stderr().lock(), "{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_01_shooting_convergence() {
    check(1);
}

#[test]
fn criterion_02_interface_exponent() {
    check(2);
}

#[test]
fn criterion_03_interface_amplitude() {
    check(3);
}

#[test]
fn criterion_04_phase_limits() {
    check(4);
}

#[test]
fn criterion_05_series_consistency() {
    check(5);
}

#[test]
fn criterion_06_profile_ordering() {
    check(6);
}

#[test]
fn criterion_07_interface_bounds() {
    check(7);
}

#[test]
fn criterion_08_sup_norm_and_comparison() {
    check(8);
}

#[test]
fn criterion_09_instantaneous_shrinking() {
    check(9);
}

#[test]
fn criterion_10_supersolution_residual() {
    check(10);
}

#[test]
fn criterion_11_non_extinction_and_convergence() {
    check(11);
}

#[test]
fn criterion_12_stationary_solution() {
    check(12);
}

#[test]
fn criterion_13_self_similar_invariance() {
    check(13);
}
