//! C interface to the world simulator, plan metrics and episode runner.
//!
//! Every fallible function returns a [`PbStatus`]. On anything other than
//! `PB_STATUS_OK` a message is available from [`pb_last_error`] until the next
//! failing call on the same thread. Output pointers are written only on
//! success. Objects returned through `out` pointers are owned by the caller
//! and released with the matching `*_free` function.
//!
//! # Safety
//!
//! String arguments must be null or NUL-terminated. Handles must be null or
//! live objects from this library. Output pointers must be null or valid for
//! writes. No handle may be used from two threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use planbench::bench::{make_predictor, Models};
use planbench::exec::{run_episode, ExecutionConfig, Mode, Termination};
use planbench::metrics::{edit_distance, evaluate_edh, fraction_valid};
use planbench::plan::parse_plan;
use planbench::tasks::EDHInstance;
use planbench::world::{
    apply_in_place, build_world, closest_instance, navigate_to, Action, AffordanceTable, FailureReason, ObjectId,
    ObjectType, SceneSpec, WorldState,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    NotFound = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbFailure {
    None = 0,
    InvalidPair = 1,
    PrerequisiteMissing = 2,
    NotInRange = 3,
    Occluded = 4,
    CapacityExceeded = 5,
    SurfaceRejected = 6,
    NoSuchObject = 7,
}

impl From<Option<FailureReason>> for PbFailure {
    fn from(r: Option<FailureReason>) -> Self {
        match r {
            None => PbFailure::None,
            Some(FailureReason::InvalidPair) => PbFailure::InvalidPair,
            Some(FailureReason::PrerequisiteMissing) => PbFailure::PrerequisiteMissing,
            Some(FailureReason::NotInRange) => PbFailure::NotInRange,
            Some(FailureReason::Occluded) => PbFailure::Occluded,
            Some(FailureReason::CapacityExceeded) => PbFailure::CapacityExceeded,
            Some(FailureReason::SurfaceRejected) => PbFailure::SurfaceRejected,
            Some(FailureReason::NoSuchObject) => PbFailure::NoSuchObject,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PbOutcome {
    pub success: bool,
    pub failure: PbFailure,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbMode {
    Direct = 0,
    Assisted = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbTermination {
    StopPredicted = 0,
    FailureLimit = 1,
    StepLimit = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbEpisodeSummary {
    pub success: bool,
    /// Share of goal conditions satisfied at the end.
    pub goal_fraction: f64,
    pub steps: u32,
    pub failures: u32,
    /// Type-level edit distance between attempted and reference plans.
    pub edit_distance: usize,
    pub termination: PbTermination,
}

/// Opaque world handle.
pub struct PbWorld(WorldState);

/// Opaque EDH instance handle.
pub struct PbInstance(EDHInstance);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PbStatus, String);

fn fail<T>(status: PbStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PbStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return PbStatus::Ok,
        Ok(Err(Failure(s, m))) => (s, m),
        Err(_) => (PbStatus::Panic, "internal panic".to_string()),
    };
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
    status
}

fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(PbStatus::NullPointer, format!("{what} is null"));
    }
    // SAFETY: the caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }.to_str().or_else(|_| fail(PbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn parsed<T: std::str::FromStr>(p: *const c_char, what: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    text(p, what)?.parse().or_else(|e| fail(PbStatus::InvalidArgument, format!("{what}: {e}")))
}

fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: non-null output pointers must be valid for writes.
    unsafe { p.as_mut() }.ok_or(Failure(PbStatus::NullPointer, format!("{what} is null")))
}

fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: non-null handles come from this library and are still live.
    unsafe { p.as_ref() }.ok_or(Failure(PbStatus::NullPointer, format!("{what} is null")))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the last failing call on this thread, or null. Valid until
/// the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn pb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a world from a scene description in JSON.
///
/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_world_from_scene_json(json: *const c_char, world: *mut *mut PbWorld) -> PbStatus {
    guard(|| {
        let slot = out(world, "world")?;
        let spec: SceneSpec =
            serde_json::from_str(text(json, "json")?).or_else(|e| fail(PbStatus::Parse, e.to_string()))?;
        let w = build_world(&spec).or_else(|e| fail(PbStatus::InvalidArgument, e.to_string()))?;
        *slot = Box::into_raw(Box::new(PbWorld(w)));
        Ok(())
    })
}

/// Release a world. Null is ignored.
///
/// # Safety
/// `world` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pb_world_free(world: *mut PbWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_world_clone(world: *const PbWorld, copy: *mut *mut PbWorld) -> PbStatus {
    guard(|| {
        let slot = out(copy, "copy")?;
        let w = handle(world, "world")?;
        *slot = Box::into_raw(Box::new(PbWorld(w.0.clone())));
        Ok(())
    })
}

/// Full world state as JSON; free with `pb_string_free`.
///
/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_world_to_json(world: *const PbWorld, json: *mut *mut c_char) -> PbStatus {
    guard(|| {
        let slot = out(json, "json")?;
        let w = handle(world, "world")?;
        let s = serde_json::to_string(&w.0).or_else(|e| fail(PbStatus::Panic, e.to_string()))?;
        *slot = c_string(s);
        Ok(())
    })
}

/// Apply one interaction in place. The world is unchanged when the outcome
/// reports a failure; the call itself still returns `PB_STATUS_OK`.
///
/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_world_apply(
    world: *mut PbWorld,
    action: *const c_char,
    target: *const c_char,
    outcome: *mut PbOutcome,
) -> PbStatus {
    guard(|| {
        let slot = out(outcome, "outcome")?;
        let action: Action = parsed(action, "action")?;
        let target: ObjectId = parsed(target, "target")?;
        let w = out(world, "world")?;
        let o = apply_in_place(&mut w.0, action, target);
        *slot = PbOutcome { success: o.success, failure: o.failure_reason.into() };
        Ok(())
    })
}

/// Move the agent next to `target`; writes the number of cells walked.
///
/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_world_navigate(world: *mut PbWorld, target: *const c_char, cells: *mut usize) -> PbStatus {
    guard(|| {
        let slot = out(cells, "cells")?;
        let target: ObjectId = parsed(target, "target")?;
        let w = out(world, "world")?;
        match navigate_to(&mut w.0, target) {
            Some(n) => {
                *slot = n;
                Ok(())
            }
            None => fail(PbStatus::NotFound, format!("{target} is missing or unreachable")),
        }
    })
}

/// Id of the nearest instance of a type; free with `pb_string_free`.
///
/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_world_closest(
    world: *const PbWorld,
    kind: *const c_char,
    id: *mut *mut c_char,
) -> PbStatus {
    guard(|| {
        let slot = out(id, "id")?;
        let kind: ObjectType = parsed(kind, "type")?;
        let w = handle(world, "world")?;
        match closest_instance(&w.0, kind) {
            Some(i) => {
                *slot = c_string(i.to_string());
                Ok(())
            }
            None => fail(PbStatus::NotFound, format!("no reachable {kind}")),
        }
    })
}

fn plan_arg(p: *const c_char, what: &str) -> Result<planbench::plan::Plan, Failure> {
    parse_plan(text(p, what)?).or_else(|e| fail(PbStatus::Parse, format!("{what}: {e}")))
}

/// Edit distance between two plans in the text format, compared by type
/// with Stop ignored.
///
/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_edit_distance(
    predicted: *const c_char,
    reference: *const c_char,
    distance: *mut usize,
) -> PbStatus {
    guard(|| {
        let slot = out(distance, "distance")?;
        let p = plan_arg(predicted, "predicted")?.to_type_level();
        let r = plan_arg(reference, "reference")?.to_type_level();
        *slot = edit_distance(&p, &r);
        Ok(())
    })
}

/// Share of afforded steps in a plan given in the text format.
///
/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_fraction_valid(plan: *const c_char, fraction: *mut f64) -> PbStatus {
    guard(|| {
        let slot = out(fraction, "fraction")?;
        *slot = fraction_valid(&plan_arg(plan, "plan")?, &AffordanceTable::from_catalog());
        Ok(())
    })
}

/// Load an EDH instance from its JSON file contents.
///
/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_instance_from_json(json: *const c_char, instance: *mut *mut PbInstance) -> PbStatus {
    guard(|| {
        let slot = out(instance, "instance")?;
        let inst: EDHInstance =
            serde_json::from_str(text(json, "json")?).or_else(|e| fail(PbStatus::Parse, e.to_string()))?;
        *slot = Box::into_raw(Box::new(PbInstance(inst)));
        Ok(())
    })
}

/// Release an instance. Null is ignored.
///
/// # Safety
/// `instance` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pb_instance_free(instance: *mut PbInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Run one episode with a model-free predictor (`oracle`, `coref-oracle`,
/// `baseline` or `random`) under the default limits.
///
/// # Safety
/// Arguments follow the crate-level contract.
#[no_mangle]
pub unsafe extern "C" fn pb_run_episode(
    instance: *const PbInstance,
    predictor: *const c_char,
    mode: PbMode,
    seed: u64,
    summary: *mut PbEpisodeSummary,
) -> PbStatus {
    guard(|| {
        let slot = out(summary, "summary")?;
        let inst = &handle(instance, "instance")?.0;
        let name = text(predictor, "predictor")?;
        let p = make_predictor(name, std::slice::from_ref(inst), &Models::default(), seed)
            .or_else(|e| fail(PbStatus::InvalidArgument, e.to_string()))?;
        let mode = match mode {
            PbMode::Direct => Mode::Direct,
            PbMode::Assisted => Mode::Assisted,
        };
        let run = run_episode(inst, p.as_ref(), &ExecutionConfig::new(mode));
        let (success, goal_fraction) = evaluate_edh(&run.final_world, inst);
        *slot = PbEpisodeSummary {
            success,
            goal_fraction,
            steps: run.trace.steps,
            failures: run.trace.failures,
            edit_distance: edit_distance(&run.attempted.to_type_level(), &inst.reference_plan.to_type_level()),
            termination: match run.trace.termination {
                Termination::StopPredicted => PbTermination::StopPredicted,
                Termination::FailureLimit => PbTermination::FailureLimit,
                Termination::StepLimit => PbTermination::StepLimit,
            },
        };
        Ok(())
    })
}
