use std::ffi::{c_char, CString};
use std::ptr;

use pme_absorb_ffi::*;

const DEFAULT: PmeParams = PmeParams { m: 2.0, q: 0.5, sigma: 2.0, dim: 1 };

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { pme_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take(n.min(255)).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn version_is_package_version() {
    let v = unsafe { std::ffi::CStr::from_ptr(pme_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn validation_and_exponents() {
    assert_eq!(pme_params_validate(DEFAULT), PmeStatus::Ok);
    let bad = PmeParams { sigma: 0.5, ..DEFAULT };
    assert_eq!(pme_params_validate(bad), PmeStatus::OutOfRange);
    assert!(last_error().contains("sigma"), "{}", last_error());

    let mut e = PmeExponents::default();
    assert_eq!(unsafe { pme_exponents(DEFAULT, &mut e) }, PmeStatus::Ok);
    // alpha = (sigma + 2) / d, beta = (m - q) / d, d = sigma (m - 1) + 2 (q - 1) = 1
    assert!((e.alpha - 4.0).abs() < 1e-15 && (e.beta - 1.5).abs() < 1e-15, "{e:?}");
    assert_eq!(unsafe { pme_exponents(DEFAULT, ptr::null_mut()) }, PmeStatus::NullPointer);
}

#[test]
fn null_handles_are_reported() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(pme_shot_summary(ptr::null(), &mut x, ptr::null_mut(), ptr::null_mut()), PmeStatus::NullPointer);
        assert_eq!(pme_sim_advance(ptr::null_mut(), 1.0, 0.1), PmeStatus::NullPointer);
        assert_eq!(pme_shoot(DEFAULT, 0, ptr::null_mut()), PmeStatus::NullPointer);
        pme_shot_free(ptr::null_mut());
        pme_sim_free(ptr::null_mut());
    }
    assert!(last_error().contains("null"));
}

#[test]
fn shot_through_handle() {
    let mut shot = ptr::null_mut();
    unsafe {
        assert_eq!(pme_shoot(DEFAULT, 0, &mut shot), PmeStatus::Ok);
        let (mut a, mut xi0, mut w) = (0.0, 0.0, 0.0);
        assert_eq!(pme_shot_summary(shot, &mut a, &mut xi0, &mut w), PmeStatus::Ok);
        assert!((a / 203.8778 - 1.0).abs() < 1e-4, "{a}");
        assert!(xi0 > 0.0 && w < 1e-8);

        let mut len = 0;
        assert_eq!(pme_shot_len(shot, &mut len), PmeStatus::Ok);
        assert!(len > 10);
        let (mut xs, mut fs) = (vec![0.0; len], vec![0.0; len]);
        let mut written = 0;
        assert_eq!(pme_shot_samples(shot, xs.as_mut_ptr(), fs.as_mut_ptr(), len, &mut written), PmeStatus::Ok);
        assert_eq!(written, len);
        assert!(xs.windows(2).all(|p| p[1] > p[0]));
        assert!((fs[0] / a - 1.0).abs() < 1e-6);
        assert!(*xs.last().unwrap() <= xi0 * (1.0 + 1e-12));

        let mut v = -1.0;
        assert_eq!(pme_shot_self_similar(shot, 1.0, 2.0 * xi0, &mut v), PmeStatus::Ok);
        assert_eq!(v, 0.0);
        assert_eq!(pme_shot_self_similar(shot, -1.0, 0.0, &mut v), PmeStatus::InvalidArgument);
        pme_shot_free(shot);
    }
}

#[test]
fn simulation_through_handle() {
    let n = 100;
    let u0: Vec<f64> = (0..=n).map(|i| if i < 50 { 1.0 } else { 0.0 }).collect();
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(pme_sim_new(DEFAULT, 2.0, n, 0.0, u0.as_ptr(), n, &mut sim), PmeStatus::InvalidArgument);
        assert!(sim.is_null());
        assert_eq!(pme_sim_new(DEFAULT, 2.0, n, 0.0, u0.as_ptr(), n + 1, &mut sim), PmeStatus::Ok);
        assert_eq!(pme_sim_set_scheme(sim, PmeScheme::Bdf2), PmeStatus::Ok);
        let (mut t, mut sup0, mut supp0) = (0.0, 0.0, 0.0);
        assert_eq!(pme_sim_observe(sim, 1e-12, &mut t, &mut sup0, &mut supp0), PmeStatus::Ok);
        assert_eq!(pme_sim_advance(sim, 0.5, 0.01), PmeStatus::Ok);
        let (mut sup, mut supp) = (0.0, 0.0);
        assert_eq!(pme_sim_observe(sim, 1e-12, &mut t, &mut sup, &mut supp), PmeStatus::Ok);
        assert!((t - 0.5).abs() < 1e-12);
        assert!(sup < sup0 && sup > 0.0);
        let mut u = vec![0.0; n];
        assert_eq!(pme_sim_copy_u(sim, u.as_mut_ptr(), n), PmeStatus::InvalidArgument);
        let mut u = vec![0.0; n + 1];
        assert_eq!(pme_sim_copy_u(sim, u.as_mut_ptr(), n + 1), PmeStatus::Ok);
        assert!(u.iter().all(|&x| x >= 0.0) && u[n] == 0.0);
        assert_eq!(pme_sim_advance(sim, 1.0, -0.1), PmeStatus::InvalidArgument);
        pme_sim_free(sim);

        let neg = vec![-1.0; n + 1];
        assert_eq!(pme_sim_new(DEFAULT, 2.0, n, 0.0, neg.as_ptr(), n + 1, &mut sim), PmeStatus::InvalidArgument);
    }
}

#[test]
fn run_config_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "task = \"verify-profile\"\n[params]\npreset = \"critical\"\n").unwrap();
    let c = |s: &str| CString::new(s).unwrap();
    let out = dir.path().join("out");
    let status = unsafe {
        pme_run_config(c(cfg.to_str().unwrap()).as_ptr(), c("verify-profile").as_ptr(), c(out.to_str().unwrap()).as_ptr())
    };
    assert_eq!(status, PmeStatus::Ok, "{}", last_error());
    assert!(out.join("verify.json").is_file());
    let status = unsafe { pme_run_config(c(cfg.to_str().unwrap()).as_ptr(), c("bogus").as_ptr(), ptr::null()) };
    assert_eq!(status, PmeStatus::InvalidArgument);
    std::fs::write(&cfg, "[params]\nm = 0.5\n").unwrap();
    let status = unsafe { pme_run_config(c(cfg.to_str().unwrap()).as_ptr(), c("shoot").as_ptr(), ptr::null()) };
    assert_eq!(status, PmeStatus::Config, "{}", last_error());
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/pme_absorb.h")).unwrap();
    for name in [
        "PME_ABSORB_H",
        "typedef struct PmeShot PmeShot;",
        "typedef struct PmeSimulation PmeSimulation;",
        "PME_STATUS_OUT_OF_RANGE",
        "pme_shoot(",
        "pme_sim_new(",
        "pme_sim_advance(",
        "pme_last_error(",
        "pme_run_config(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
    let cc = std::process::Command::new("cc").args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-xc"]).arg(
        concat!(env!("CARGO_MANIFEST_DIR"), "/include/pme_absorb.h"),
    ).output();
    if let Ok(o) = cc {
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
}
