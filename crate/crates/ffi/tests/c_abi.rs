use std::ffi::{CStr, CString};
use std::ptr;

use pgs_core::observer::{ObserverConfig, ObserverGains, TwoStepObserver};
use pgs_ffi::*;

fn last_error() -> String {
    let p = pgs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn config(json: &str) -> *mut PgsConfig {
    let text = CString::new(json).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { pgs_config_from_json(text.as_ptr(), &mut cfg) }, PgsStatus::Ok);
    cfg
}

#[test]
fn observer_matches_core() {
    let cfg = ObserverConfig::new(ObserverGains::binomial(), 0.05, 0.2).unwrap();
    let mut reference = TwoStepObserver::new(cfg);
    reference.reset(0.3).unwrap();
    unsafe {
        let mut obs = ptr::null_mut();
        assert_eq!(pgs_observer_new(4.0, 6.0, 4.0, 1.0, 0.05, 0.2, &mut obs), PgsStatus::Ok);
        assert_eq!(pgs_observer_reset(obs, 0.3), PgsStatus::Ok);
        let mut p = PgsPrediction::default();
        let dt = 1e-3;
        for n in 1..=3000 {
            let v = 0.3 + (n as f64 * dt).sin();
            assert_eq!(pgs_observer_step(obs, v, dt, &mut p), PgsStatus::Ok);
            let r = reference.step(v, dt).unwrap();
            assert_eq!([p.value, p.d1, p.d2, p.d3], [r.value, r.d1, r.d2, r.d3]);
        }
        let mut q = PgsPrediction::default();
        assert_eq!(pgs_observer_prediction(obs, &mut q), PgsStatus::Ok);
        assert_eq!(p, q);
        pgs_observer_free(obs);
    }
}

#[test]
fn observer_rejects_bad_input() {
    unsafe {
        let mut obs = ptr::null_mut();
        assert_eq!(pgs_observer_new(0.0, 6.0, 4.0, 1.0, 0.05, 0.2, &mut obs), PgsStatus::InvalidConfig);
        assert!(obs.is_null());
        assert!(last_error().contains("Hurwitz"));
        assert_eq!(pgs_observer_new(4.0, 6.0, 4.0, 1.0, 0.05, 0.2, ptr::null_mut()), PgsStatus::NullPointer);

        assert_eq!(pgs_observer_new(4.0, 6.0, 4.0, 1.0, 0.05, 0.2, &mut obs), PgsStatus::Ok);
        assert_eq!(pgs_observer_step(obs, 0.0, 0.1, ptr::null_mut()), PgsStatus::InvalidArgument);
        assert!(last_error().contains("epsilon/4"));
        assert_eq!(pgs_observer_step(obs, f64::NAN, 1e-3, ptr::null_mut()), PgsStatus::Diverged);
        assert_eq!(pgs_observer_reset(ptr::null_mut(), 0.0), PgsStatus::NullPointer);
        pgs_observer_free(obs);
        pgs_observer_free(ptr::null_mut());
    }
}

#[test]
fn config_round_trip() {
    unsafe {
        let cfg = config(r#"{"guidance": {"nav_ratio": 3.5}}"#);
        assert_eq!(pgs_config_set_seed(cfg, 77), PgsStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(pgs_config_to_json(cfg, &mut s), PgsStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        pgs_string_free(s);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["guidance"]["nav_ratio"], 3.5);
        assert_eq!(v["seed"], 77);
        pgs_config_free(cfg);

        let mut bad = ptr::null_mut();
        let unknown = CString::new(r#"{"guidance": {"gain": 1}}"#).unwrap();
        assert_eq!(pgs_config_from_json(unknown.as_ptr(), &mut bad), PgsStatus::InvalidConfig);
        assert!(last_error().contains("gain"));
        let invalid = CString::new(r#"{"observer": {"k1": -1}}"#).unwrap();
        assert_eq!(pgs_config_from_json(invalid.as_ptr(), &mut bad), PgsStatus::InvalidConfig);
        assert!(bad.is_null());
        assert_eq!(pgs_config_from_json(ptr::null(), &mut bad), PgsStatus::NullPointer);
    }
}

#[test]
fn engagement_metrics() {
    unsafe {
        let cfg = config("{}");
        let mut m = std::mem::MaybeUninit::<PgsMetrics>::uninit();
        assert_eq!(pgs_run_engagement(cfg, m.as_mut_ptr()), PgsStatus::Ok);
        let m = m.assume_init();
        assert_eq!(m.termination, PgsTermination::ClosestApproach);
        assert!(m.miss_distance >= 0.0 && m.miss_distance < 1.0, "{m:?}");
        assert!(m.rmse_predicted < m.rmse_delayed);
        assert!(m.steps > 1000);
        pgs_config_free(cfg);

        let short = config(r#"{"engagement": {"max_time": 0.5}}"#);
        let mut m = std::mem::MaybeUninit::<PgsMetrics>::uninit();
        assert_eq!(pgs_run_engagement(short, m.as_mut_ptr()), PgsStatus::Ok);
        assert_eq!(m.assume_init().termination, PgsTermination::Timeout);
        pgs_config_free(short);
    }
}

#[test]
fn sweep_groups() {
    unsafe {
        let cfg = config(r#"{"sweep": {"delays": [0.05, 0.2], "samples_per_delay": 2}}"#);
        let mut count = 0usize;
        assert_eq!(pgs_run_sweep(cfg, 1, ptr::null_mut(), 0, &mut count), PgsStatus::BufferTooSmall);
        assert_eq!(count, 4);
        let mut groups = vec![
            PgsGroupStats {
                delay: 0.0,
                source: PgsSource::True,
                mean_miss: 0.0,
                std_miss: 0.0,
                n: 0,
                failure_count: 0,
            };
            count
        ];
        assert_eq!(pgs_run_sweep(cfg, 2, groups.as_mut_ptr(), groups.len(), &mut count), PgsStatus::Ok);
        assert_eq!(groups[0].source, PgsSource::Delayed);
        assert_eq!(groups[1].source, PgsSource::Predicted);
        assert_eq!(groups[3].delay, 0.2);
        assert!(groups.iter().all(|g| g.n == 2 && g.failure_count == 0 && g.mean_miss.is_finite()));
        pgs_config_free(cfg);
    }
}

#[test]
fn atmosphere_values() {
    unsafe {
        let mut a = PgsAtmosphere::default();
        assert_eq!(pgs_atmosphere(11_000.0, &mut a), PgsStatus::Ok);
        assert!((a.temperature - 216.65).abs() < 1e-9);
        assert_eq!(pgs_atmosphere(1e6, &mut a), PgsStatus::InvalidArgument);
        assert_eq!(pgs_atmosphere(0.0, ptr::null_mut()), PgsStatus::NullPointer);
    }
}
