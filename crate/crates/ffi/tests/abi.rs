use std::ffi::{c_void, CStr, CString};
use std::process::Command;
use std::ptr;

use levelscope_ffi::*;

fn last_error() -> String {
    let p = ls_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_events() -> *mut LsEvents {
    let cfg = CString::new("days = 10\nevents_per_day = 300\nseed = 4\n").unwrap();
    let mut events = ptr::null_mut();
    assert_eq!(unsafe { ls_events_generate(cfg.as_ptr(), &mut events) }, LsStatus::Ok);
    events
}

fn split(events: *const LsEvents) -> *mut LsDataset {
    let cfg = LsSplitConfig {
        window_length: 10,
        horizon: 10,
        alpha: 0.002,
        stride: 2,
        train_days: 7,
        test_days: 3,
        validation_fraction: 0.25,
    };
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { ls_dataset_split(events, &cfg, &mut ds) }, LsStatus::Ok);
    ds
}

#[test]
fn generate_write_parse_round_trip() {
    let events = small_events();
    let mut n = 0;
    assert_eq!(unsafe { ls_events_len(events, &mut n) }, LsStatus::Ok);
    assert_eq!(n, 3000);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("e.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ls_events_write_file(events, path.as_ptr()) }, LsStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { ls_events_parse_file(path.as_ptr(), &mut back) }, LsStatus::Ok);
    let mut m = 0;
    unsafe { ls_events_len(back, &mut m) };
    assert_eq!(m, n);
    unsafe {
        ls_events_free(events);
        ls_events_free(back);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut events = ptr::null_mut();
    let missing = CString::new("/nonexistent/events.csv").unwrap();
    assert_eq!(
        unsafe { ls_events_parse_file(missing.as_ptr(), &mut events) },
        LsStatus::IoError
    );
    assert!(last_error().contains("nonexistent"));
    assert!(events.is_null());

    assert_eq!(
        unsafe { ls_events_parse_file(ptr::null(), &mut events) },
        LsStatus::NullPointer
    );
    let bad = CString::new("bogus_key = 1").unwrap();
    assert_eq!(
        unsafe { ls_events_generate(bad.as_ptr(), &mut events) },
        LsStatus::InvalidArgument
    );
    assert!(last_error().contains("bogus_key"));

    let mut bits = 0;
    let text = CString::new("10x0000000").unwrap();
    assert_ne!(unsafe { ls_mask_parse(text.as_ptr(), &mut bits) }, LsStatus::Ok);
    // A success clears the message.
    let text = CString::new("1000000001").unwrap();
    assert_eq!(unsafe { ls_mask_parse(text.as_ptr(), &mut bits) }, LsStatus::Ok);
    assert_eq!(bits, 0b10_0000_0001);
    assert!(ls_last_error_message().is_null());
}

#[test]
fn mask_matrix_layout() {
    let t = 3;
    let mut buf = vec![-1.0; 40 * t];
    // Levels 1 and 3.
    assert_eq!(unsafe { ls_mask_matrix(0b101, t, buf.as_mut_ptr(), buf.len()) }, LsStatus::Ok);
    for r in 0..40 {
        let level = r / 4 + 1;
        let want = if level == 1 || level == 3 { 1.0 } else { 0.0 };
        assert!(buf[r * t..(r + 1) * t].iter().all(|&v| v == want), "row {r}");
    }
    assert_eq!(
        unsafe { ls_mask_matrix(0b101, t, buf.as_mut_ptr(), 40 * t - 1) },
        LsStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { ls_mask_matrix(1 << 10, t, buf.as_mut_ptr(), buf.len()) },
        LsStatus::InvalidArgument
    );
}

#[test]
fn train_evaluate_save_load() {
    let events = small_events();
    let ds = split(events);
    let (mut tr, mut va, mut te) = (0, 0, 0);
    assert_eq!(unsafe { ls_dataset_sizes(ds, &mut tr, &mut va, &mut te) }, LsStatus::Ok);
    assert!(tr > 0 && va > 0 && te > 0);

    let cfg = LsTrainConfig {
        learning_rate: 0.05,
        batch_size: 16,
        max_epochs: 2,
        early_stop_patience: 2,
        seed: 1,
    };
    let mut model = ptr::null_mut();
    let status = unsafe { ls_model_train(ds, LsBackbone::Convolutional, 0x3FF, &cfg, &mut model) };
    assert_eq!(status, LsStatus::Ok);
    let mut f1 = -1.0;
    assert_eq!(
        unsafe { ls_model_evaluate(model, ds, LsPartition::Test, 0x3FF, &mut f1) },
        LsStatus::Ok
    );
    assert!((0.0..=1.0).contains(&f1));

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.bin").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ls_model_save(model, path.as_ptr()) }, LsStatus::Ok);
    let mut loaded = ptr::null_mut();
    assert_eq!(unsafe { ls_model_load(path.as_ptr(), &mut loaded) }, LsStatus::Ok);
    let mut f1_loaded = -1.0;
    unsafe { ls_model_evaluate(loaded, ds, LsPartition::Test, 0x3FF, &mut f1_loaded) };
    assert_eq!(f1, f1_loaded);

    let bad = LsTrainConfig { batch_size: 0, ..cfg };
    let mut none = ptr::null_mut();
    assert_eq!(
        unsafe { ls_model_train(ds, LsBackbone::TemporalBilinear, 0x3FF, &bad, &mut none) },
        LsStatus::InvalidArgument
    );
    assert!(none.is_null());
    unsafe {
        ls_model_free(model);
        ls_model_free(loaded);
        ls_dataset_free(ds);
        ls_events_free(events);
        ls_model_free(ptr::null_mut());
    }
}

/// Fitness = number of mask bits agreeing with the target in `user_data`.
extern "C" fn hamming(mask: u16, user_data: *mut c_void, out: *mut f64) -> i32 {
    let target = unsafe { *(user_data as *const u16) };
    let agree = 10 - (mask ^ target).count_ones();
    unsafe { *out = f64::from(agree) / 10.0 };
    0
}

/// Additive weights, strictly decreasing with level.
extern "C" fn additive(mask: u16, _: *mut c_void, out: *mut f64) -> i32 {
    let v: f64 = (0..10).filter(|k| mask & (1 << k) != 0).map(|k| 1.0 / f64::from(k + 1)).sum();
    unsafe { *out = v };
    0
}

extern "C" fn failing(_: u16, _: *mut c_void, _: *mut f64) -> i32 {
    7
}

#[test]
fn selection_through_callbacks() {
    let mut target: u16 = 0b11;
    let cfg = LsBpsoConfig {
        swarm_size: 10,
        iterations: 50,
        c1: 2.0,
        c2: 2.0,
        v_max: 6.0,
        w_start: 0.9,
        w_end: 0.4,
        seed: 3,
    };
    let (mut mask, mut fit) = (0u16, 0.0);
    let status = unsafe {
        ls_bpso_select(
            Some(hamming),
            &mut target as *mut u16 as *mut c_void,
            &cfg,
            &mut mask,
            &mut fit,
        )
    };
    assert_eq!(status, LsStatus::Ok);
    assert_eq!(mask, target);
    assert_eq!(fit, 1.0);

    let mut removed = [0u8; 9];
    let mut last = 0u8;
    let status = unsafe {
        ls_backward_eliminate(Some(additive), ptr::null_mut(), 0, removed.as_mut_ptr(), &mut last)
    };
    assert_eq!(status, LsStatus::Ok);
    assert_eq!(removed, [10, 9, 8, 7, 6, 5, 4, 3, 2]);
    assert_eq!(last, 1);

    let status = unsafe {
        ls_backward_eliminate(Some(failing), ptr::null_mut(), 0, removed.as_mut_ptr(), &mut last)
    };
    assert_eq!(status, LsStatus::CallbackError);
    assert!(last_error().contains('7'));
    let status = unsafe { ls_bpso_select(None, ptr::null_mut(), &cfg, &mut mask, &mut fit) };
    assert_eq!(status, LsStatus::NullPointer);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/levelscope.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["ls_events_parse_file", "ls_model_train", "ls_bpso_select", "LsFitnessFn"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(&src, format!("#include \"{header}\"\nint main(void) {{ return LS_STATUS_OK; }}\n")).unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg(&src).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found, syntax check skipped"),
    }
}
