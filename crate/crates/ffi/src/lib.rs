//! C ABI for levelscope.
//!
//! Every function returns an [`LsStatus`]. On failure a description is kept
//! per thread and can be read with [`ls_last_error_message`]. Objects are
//! opaque handles created by `ls_*_new`/`ls_*_parse`-style functions and
//! released with the matching `ls_*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use levelscope::experiment::parse_pairs;
use levelscope::lob::{parse_events, split_dataset, write_events, SplitConfig, WindowSpec};
use levelscope::masking::mask_matrix;
use levelscope::predictor::{evaluate, load_params, save_params, train};
use levelscope::selection::{
    backward_eliminate, bpso_select, BpsoConfig, FitnessEvaluator, TieBreak,
};
use levelscope::synth::{generate, SynthConfig};
use levelscope::{
    BackboneKind, Dataset, Error, LevelMask, LobEvent, ModelParams, TrainConfig, FEATURES,
};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DataError = 4,
    IoError = 5,
    EvaluationError = 6,
    CallbackError = 7,
    Panic = 8,
}

/// Loaded or generated order-book events.
pub struct LsEvents(Vec<LobEvent>);

/// Normalized train/validation/test windows.
pub struct LsDataset(Dataset);

/// Trained predictor parameters.
pub struct LsModel(ModelParams);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum LsBackbone {
    TemporalBilinear = 0,
    Convolutional = 1,
}

impl From<LsBackbone> for BackboneKind {
    fn from(b: LsBackbone) -> Self {
        match b {
            LsBackbone::TemporalBilinear => BackboneKind::TemporalBilinear,
            LsBackbone::Convolutional => BackboneKind::Convolutional,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum LsPartition {
    Train = 0,
    Validation = 1,
    Test = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LsSplitConfig {
    pub window_length: usize,
    pub horizon: usize,
    pub alpha: f64,
    pub stride: usize,
    pub train_days: usize,
    pub test_days: usize,
    pub validation_fraction: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LsTrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LsBpsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub c1: f64,
    pub c2: f64,
    pub v_max: f64,
    pub w_start: f64,
    pub w_end: f64,
    pub seed: u64,
}

/// Fitness callback. Receives a level mask (bit k-1 set when level k is kept)
/// and the caller's `user_data`, writes the fitness to `out` and returns 0 on
/// success. Any other return value aborts the search.
pub type LsFitnessFn = extern "C" fn(mask: u16, user_data: *mut c_void, out: *mut f64) -> i32;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LsStatus {
    match e {
        Error::Parse { .. } | Error::Format(_) | Error::Json(_) => LsStatus::ParseError,
        Error::Validation { .. } | Error::Data(_) | Error::NoRecords(_) => LsStatus::DataError,
        Error::Io { .. } => LsStatus::IoError,
        Error::Evaluation(_) => LsStatus::EvaluationError,
        Error::Fitness { .. } => LsStatus::CallbackError,
        Error::Elimination { source, .. } | Error::Cell { source, .. } => status_of(source),
        _ => LsStatus::InvalidArgument,
    }
}

struct Fail(LsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LsStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Fail {
    Fail(LsStatus::InvalidArgument, message.into())
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LsStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn mask_arg(bits: u16) -> Result<LevelMask, Fail> {
    Ok(LevelMask::from_bits(bits)?)
}

/// Description of the last failure on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

// ------------------------------------------------------------------ events

/// Reads an event CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_events_parse_file(path: *const c_char, out: *mut *mut LsEvents) -> LsStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        let out = out_arg(out, "out")?;
        let events = parse_events(&path)?;
        *out = Box::into_raw(Box::new(LsEvents(events)));
        Ok(())
    })
}

/// Generates synthetic events from `key = value` lines (same keys as the
/// `gen-data` command; empty text gives the defaults).
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_events_generate(config: *const c_char, out: *mut *mut LsEvents) -> LsStatus {
    guard(|| {
        let text = str_arg(config, "config")?;
        let out = out_arg(out, "out")?;
        let cfg = SynthConfig::from_pairs(&parse_pairs(text)?)?;
        let events = generate(&cfg).map_err(|e| invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(LsEvents(events)));
        Ok(())
    })
}

/// # Safety
/// `events` must come from this library and `len` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_events_len(events: *const LsEvents, len: *mut usize) -> LsStatus {
    guard(|| {
        *out_arg(len, "len")? = ref_arg(events, "events")?.0.len();
        Ok(())
    })
}

/// # Safety
/// `events` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ls_events_write_file(events: *const LsEvents, path: *const c_char) -> LsStatus {
    guard(|| {
        let events = ref_arg(events, "events")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        write_events(&path, &events.0)?;
        Ok(())
    })
}

/// # Safety
/// `events` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_events_free(events: *mut LsEvents) {
    if !events.is_null() {
        drop(Box::from_raw(events));
    }
}

// ----------------------------------------------------------------- dataset

/// Builds labelled, normalized windows and splits them by trading day.
///
/// # Safety
/// All pointers must be valid; `events` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn ls_dataset_split(
    events: *const LsEvents,
    config: *const LsSplitConfig,
    out: *mut *mut LsDataset,
) -> LsStatus {
    guard(|| {
        let events = ref_arg(events, "events")?;
        let c = ref_arg(config, "config")?;
        let out = out_arg(out, "out")?;
        let split = SplitConfig {
            train_days: c.train_days,
            test_days: c.test_days,
            validation_fraction: c.validation_fraction,
            window: WindowSpec {
                length: c.window_length,
                horizon: c.horizon,
                alpha: c.alpha,
                stride: c.stride,
            },
        };
        let ds = split_dataset(&events.0, &split)?;
        *out = Box::into_raw(Box::new(LsDataset(ds)));
        Ok(())
    })
}

/// Number of windows in each partition.
///
/// # Safety
/// `dataset` must come from this library; the counts must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ls_dataset_sizes(
    dataset: *const LsDataset,
    train: *mut usize,
    validation: *mut usize,
    test: *mut usize,
) -> LsStatus {
    guard(|| {
        let ds = &ref_arg(dataset, "dataset")?.0;
        *out_arg(train, "train")? = ds.train.len();
        *out_arg(validation, "validation")? = ds.validation.len();
        *out_arg(test, "test")? = ds.test.len();
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_dataset_free(dataset: *mut LsDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

// -------------------------------------------------------------------- mask

/// Parses a ten-character 0/1 mask string (leftmost is level 1).
///
/// # Safety
/// `text` must be NUL-terminated and `bits` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_mask_parse(text: *const c_char, bits: *mut u16) -> LsStatus {
    guard(|| {
        let mask: LevelMask = str_arg(text, "text")?.parse()?;
        *out_arg(bits, "bits")? = mask.bits();
        Ok(())
    })
}

/// Writes the 40 x `t` row-major mask matrix of `bits` into `buffer`, which
/// must hold `len >= 40 * t` values.
///
/// # Safety
/// `buffer` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ls_mask_matrix(bits: u16, t: usize, buffer: *mut f64, len: usize) -> LsStatus {
    guard(|| {
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        let needed = FEATURES
            .checked_mul(t)
            .ok_or_else(|| invalid("window length overflows"))?;
        if len < needed {
            return Err(invalid(format!("buffer holds {len} values, need {needed}")));
        }
        let m = mask_matrix(mask_arg(bits)?, t)?;
        let out = std::slice::from_raw_parts_mut(buffer, needed);
        for r in 0..FEATURES {
            for c in 0..t {
                out[r * t + c] = m.matrix().get(r, c);
            }
        }
        Ok(())
    })
}

// ------------------------------------------------------------------- model

/// Trains a backbone on the training windows restricted to `mask`.
///
/// # Safety
/// All pointers must be valid; `dataset` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn ls_model_train(
    dataset: *const LsDataset,
    backbone: LsBackbone,
    mask: u16,
    config: *const LsTrainConfig,
    out: *mut *mut LsModel,
) -> LsStatus {
    guard(|| {
        let ds = &ref_arg(dataset, "dataset")?.0;
        let c = ref_arg(config, "config")?;
        let out = out_arg(out, "out")?;
        let cfg = TrainConfig {
            learning_rate: c.learning_rate,
            batch_size: c.batch_size,
            max_epochs: c.max_epochs,
            early_stop_patience: c.early_stop_patience,
            seed: c.seed,
        };
        let (params, _) = train(ds, mask_arg(mask)?, backbone.into(), &cfg)?;
        *out = Box::into_raw(Box::new(LsModel(params)));
        Ok(())
    })
}

/// Macro-F1 of `model` on one partition of `dataset` under `mask`.
///
/// # Safety
/// All pointers must be valid and come from this library.
#[no_mangle]
pub unsafe extern "C" fn ls_model_evaluate(
    model: *const LsModel,
    dataset: *const LsDataset,
    partition: LsPartition,
    mask: u16,
    macro_f1: *mut f64,
) -> LsStatus {
    guard(|| {
        let model = &ref_arg(model, "model")?.0;
        let ds = &ref_arg(dataset, "dataset")?.0;
        let out = out_arg(macro_f1, "macro_f1")?;
        let windows = match partition {
            LsPartition::Train => &ds.train,
            LsPartition::Validation => &ds.validation,
            LsPartition::Test => &ds.test,
        };
        *out = evaluate(model, windows, mask_arg(mask)?)?.macro_f1;
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ls_model_save(model: *const LsModel, path: *const c_char) -> LsStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        save_params(&path, &model.0)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_model_load(path: *const c_char, out: *mut *mut LsModel) -> LsStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        let out = out_arg(out, "out")?;
        let params = load_params(&path)?;
        *out = Box::into_raw(Box::new(LsModel(params)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_model_free(model: *mut LsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

// --------------------------------------------------------------- selection

struct Callback {
    f: LsFitnessFn,
    user_data: *mut c_void,
}

// The searches below run on a single-thread pool, so the callback is never
// entered concurrently.
unsafe impl Sync for Callback {}

impl FitnessEvaluator for Callback {
    fn evaluate(&self, mask: LevelMask) -> levelscope::Result<f64> {
        let mut value = f64::NAN;
        let rc = (self.f)(mask.bits(), self.user_data, &mut value);
        if rc != 0 {
            return Err(Error::Fitness {
                mask,
                message: format!("callback returned {rc}"),
            });
        }
        Ok(value)
    }
}

fn single_thread<T: Send>(body: impl FnOnce() -> T + Send) -> Result<T, Fail> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(body))
}

/// Binary particle swarm search over level subsets. The callback is invoked
/// from one thread at a time.
///
/// # Safety
/// `config`, `best_mask` and `best_fitness` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ls_bpso_select(
    fitness: Option<LsFitnessFn>,
    user_data: *mut c_void,
    config: *const LsBpsoConfig,
    best_mask: *mut u16,
    best_fitness: *mut f64,
) -> LsStatus {
    guard(|| {
        let f = fitness.ok_or_else(|| null("fitness"))?;
        let c = ref_arg(config, "config")?;
        let best_mask = out_arg(best_mask, "best_mask")?;
        let best_fitness = out_arg(best_fitness, "best_fitness")?;
        let cfg = BpsoConfig {
            swarm_size: c.swarm_size,
            iterations: c.iterations,
            c1: c.c1,
            c2: c.c2,
            v_max: c.v_max,
            w_start: c.w_start,
            w_end: c.w_end,
            seed: c.seed,
        };
        let cb = Callback { f, user_data };
        let (mask, state) = single_thread(|| bpso_select(&cb, &cfg))??;
        *best_mask = mask.bits();
        *best_fitness = state.global_best_fitness;
        Ok(())
    })
}

/// Backward elimination from all ten levels. `removed` receives the nine
/// removed levels in order and `final_level` the survivor. When
/// `remove_lower_on_tie` is nonzero, ties drop the lower level.
///
/// # Safety
/// `removed` must point to 9 writable bytes and `final_level` to one.
#[no_mangle]
pub unsafe extern "C" fn ls_backward_eliminate(
    fitness: Option<LsFitnessFn>,
    user_data: *mut c_void,
    remove_lower_on_tie: i32,
    removed: *mut u8,
    final_level: *mut u8,
) -> LsStatus {
    guard(|| {
        let f = fitness.ok_or_else(|| null("fitness"))?;
        if removed.is_null() {
            return Err(null("removed"));
        }
        let final_level = out_arg(final_level, "final_level")?;
        let tie = if remove_lower_on_tie != 0 {
            TieBreak::RemoveLowerLevel
        } else {
            TieBreak::RemoveHigherLevel
        };
        let cb = Callback { f, user_data };
        let trace = single_thread(|| backward_eliminate(&cb, tie))??;
        let order = trace.removal_order();
        let slots = std::slice::from_raw_parts_mut(removed, order.len());
        for (slot, level) in slots.iter_mut().zip(&order) {
            *slot = *level as u8;
        }
        *final_level = trace.final_level.unwrap_or(0) as u8;
        Ok(())
    })
}
