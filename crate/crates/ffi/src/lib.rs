//! C ABI over `projreg`: opaque handles for the RNG, a sampler (config plus
//! momentum state) and mask draws; penalties, softmax and the bound check on
//! caller-owned buffers.
//!
//! Every fallible call returns a [`ProjregStatus`]; the message of the last
//! failure on the calling thread is available from [`projreg_last_error`].
//! Handles are not thread-safe; use one per thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use projreg::analysis::verify_bound_mc;
use projreg::numerics::{stable_softmax, Rng};
use projreg::penalty::{evaluate, PenaltyFamily, PenaltySpec};
use projreg::sampler::{
    draw_masks, IndexCounter, MaskDraw, SamplerConfig, SamplerState, ScoreMode, SelectionMode,
};
use projreg::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjregStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonFinite = 3,
    LengthMismatch = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjregScoreMode {
    MagnitudeIncreasing = 0,
    PaperLiteral = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjregSelection {
    TopK = 0,
    Sampled = 1,
    ProbabilityThreshold = 2,
    UniformThreshold = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjregPenaltyFamily {
    L1 = 0,
    L2 = 1,
    ProposedSqrt = 2,
    ProposedSquared = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjregSamplerConfig {
    pub density: f64,
    pub experiments: usize,
    pub threshold: f64,
    pub alpha: f64,
    pub score_mode: ProjregScoreMode,
    pub selection: ProjregSelection,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjregBoundReport {
    pub n: usize,
    pub threshold: f64,
    pub experiments: usize,
    pub seed: u64,
    pub mc_mean_lhs: f64,
    pub mc_std_error: f64,
    pub analytic_rhs: f64,
    pub bound_rhs_scaled: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Opaque random stream.
pub struct ProjregRng(Rng);

/// Opaque sampler: configuration plus momentum state.
pub struct ProjregSampler {
    config: SamplerConfig,
    state: SamplerState,
}

/// Opaque result of one [`projreg_sampler_draw`].
pub struct ProjregDraw(MaskDraw);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ProjregStatus {
    match e {
        Error::NonFinite { .. } => ProjregStatus::NonFinite,
        Error::LengthMismatch { .. } | Error::Dimension(_) => ProjregStatus::LengthMismatch,
        Error::Io { .. } => ProjregStatus::Internal,
        _ => ProjregStatus::InvalidArgument,
    }
}

struct Fail(ProjregStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ProjregStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, turning errors and panics into a status plus last-error text.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> ProjregStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ProjregStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            ProjregStatus::Internal
        }
    }
}

unsafe fn input<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn output<'a, T>(data: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(data, len))
}

unsafe fn handle<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn sampler_config(c: &ProjregSamplerConfig) -> SamplerConfig {
    SamplerConfig {
        density: c.density,
        experiments: c.experiments,
        threshold: c.threshold,
        alpha: c.alpha,
        score_mode: match c.score_mode {
            ProjregScoreMode::MagnitudeIncreasing => ScoreMode::MagnitudeIncreasing,
            ProjregScoreMode::PaperLiteral => ScoreMode::PaperLiteral,
        },
        selection: match c.selection {
            ProjregSelection::TopK => SelectionMode::TopK,
            ProjregSelection::Sampled => SelectionMode::Sampled,
            ProjregSelection::ProbabilityThreshold => SelectionMode::ProbabilityThreshold,
            ProjregSelection::UniformThreshold => SelectionMode::UniformThreshold,
        },
    }
}

/// Library version, static NUL-terminated string.
#[no_mangle]
pub extern "C" fn projreg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message (NUL-terminated,
/// truncated to fit) into `buf` and returns the full message length
/// excluding the terminator. `buf` may be null when `cap` is 0.
///
/// # Safety
/// `buf` must be valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn projreg_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

#[no_mangle]
pub extern "C" fn projreg_rng_new(seed: u64) -> *mut ProjregRng {
    Box::into_raw(Box::new(ProjregRng(Rng::new(seed))))
}

/// Independent child stream `stream` of `seed`.
#[no_mangle]
pub extern "C" fn projreg_rng_substream(seed: u64, stream: u64) -> *mut ProjregRng {
    Box::into_raw(Box::new(ProjregRng(Rng::with_stream(seed, stream))))
}

/// # Safety
/// `rng` must come from `projreg_rng_new`/`projreg_rng_substream` and not be
/// used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn projreg_rng_free(rng: *mut ProjregRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// # Safety
/// `rng` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn projreg_rng_next_u64(
    rng: *mut ProjregRng,
    out: *mut u64,
) -> ProjregStatus {
    guard(|| {
        let rng = handle(rng, "rng")?;
        *handle(out, "out")? = rng.0.next_u64();
        Ok(())
    })
}

/// # Safety
/// `rng` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn projreg_rng_uniform(rng: *mut ProjregRng, out: *mut f64) -> ProjregStatus {
    guard(|| {
        let rng = handle(rng, "rng")?;
        *handle(out, "out")? = rng.0.uniform();
        Ok(())
    })
}

/// Default sampler settings.
#[no_mangle]
pub extern "C" fn projreg_sampler_config_default() -> ProjregSamplerConfig {
    let d = SamplerConfig::default();
    ProjregSamplerConfig {
        density: d.density,
        experiments: d.experiments,
        threshold: d.threshold,
        alpha: d.alpha,
        score_mode: ProjregScoreMode::MagnitudeIncreasing,
        selection: ProjregSelection::Sampled,
    }
}

/// Validates `config` and creates a sampler with empty momentum state.
///
/// # Safety
/// `config` and `out` must be valid; `*out` receives the handle.
#[no_mangle]
pub unsafe extern "C" fn projreg_sampler_new(
    config: *const ProjregSamplerConfig,
    out: *mut *mut ProjregSampler,
) -> ProjregStatus {
    guard(|| {
        let config = sampler_config(config.as_ref().ok_or_else(|| null("config"))?);
        let out = handle(out, "out")?;
        config.validate()?;
        *out = Box::into_raw(Box::new(ProjregSampler {
            config,
            state: SamplerState::new(),
        }));
        Ok(())
    })
}

/// # Safety
/// `sampler` must come from `projreg_sampler_new`. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn projreg_sampler_free(sampler: *mut ProjregSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Draws `experiments` masks for `w`. With `use_momentum`, the sampler's
/// stored distribution is blended in; call [`projreg_sampler_commit`] once
/// per optimizer step to advance it.
///
/// # Safety
/// `w` must hold `n` values; handles must be valid; `*out` receives a draw
/// to release with `projreg_draw_free`.
#[no_mangle]
pub unsafe extern "C" fn projreg_sampler_draw(
    sampler: *mut ProjregSampler,
    w: *const f64,
    n: usize,
    rng: *mut ProjregRng,
    use_momentum: bool,
    out: *mut *mut ProjregDraw,
) -> ProjregStatus {
    guard(|| {
        let sampler = handle(sampler, "sampler")?;
        let w = input(w, n, "w")?;
        let rng = handle(rng, "rng")?;
        let out = handle(out, "out")?;
        let state = use_momentum.then_some(&sampler.state);
        let draw = draw_masks(w, &sampler.config, state, &mut rng.0)?;
        *out = Box::into_raw(Box::new(ProjregDraw(draw)));
        Ok(())
    })
}

/// Stores the draw's mean distribution as the sampler's previous one. A
/// uniform-threshold draw carries no distribution and leaves the state as is.
///
/// # Safety
/// Both handles must be valid.
#[no_mangle]
pub unsafe extern "C" fn projreg_sampler_commit(
    sampler: *mut ProjregSampler,
    draw: *const ProjregDraw,
) -> ProjregStatus {
    guard(|| {
        let sampler = handle(sampler, "sampler")?;
        let draw = draw.as_ref().ok_or_else(|| null("draw"))?;
        if let Some(dist) = &draw.0.distribution {
            sampler.state.commit(dist.clone())?;
        }
        Ok(())
    })
}

/// # Safety
/// `draw` must come from `projreg_sampler_draw`. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn projreg_draw_free(draw: *mut ProjregDraw) {
    if !draw.is_null() {
        drop(Box::from_raw(draw));
    }
}

/// Number of masks in the draw (0 for null).
///
/// # Safety
/// `draw` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn projreg_draw_mask_count(draw: *const ProjregDraw) -> usize {
    draw.as_ref().map_or(0, |d| d.0.masks.len())
}

/// Writes the ascending selected indices of mask `index` into `out` and
/// their number into `*len`. With a short buffer, `*len` still receives the
/// required size and `BufferTooSmall` is returned.
///
/// # Safety
/// `out` must be valid for `cap` elements; `draw` and `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn projreg_draw_mask(
    draw: *const ProjregDraw,
    index: usize,
    out: *mut usize,
    cap: usize,
    len: *mut usize,
) -> ProjregStatus {
    guard(|| {
        let draw = draw.as_ref().ok_or_else(|| null("draw"))?;
        let len = handle(len, "len")?;
        let mask = draw.0.masks.get(index).ok_or_else(|| {
            Fail(
                ProjregStatus::InvalidArgument,
                format!("mask {index} out of range ({} masks)", draw.0.masks.len()),
            )
        })?;
        let selected = mask.selected();
        *len = selected.len();
        if selected.len() > cap {
            return Err(Fail(
                ProjregStatus::BufferTooSmall,
                format!("mask needs {} slots, got {cap}", selected.len()),
            ));
        }
        output(out, selected.len(), "out")?.copy_from_slice(selected);
        Ok(())
    })
}

/// Per-coordinate selection counts over all masks; `n` must equal the
/// length of the drawn vector.
///
/// # Safety
/// `out` must be valid for `n` elements.
#[no_mangle]
pub unsafe extern "C" fn projreg_draw_counts(
    draw: *const ProjregDraw,
    out: *mut usize,
    n: usize,
) -> ProjregStatus {
    guard(|| {
        let draw = draw.as_ref().ok_or_else(|| null("draw"))?;
        let counts = draw.0.counter.counts();
        if counts.len() != n {
            return Err(Error::LengthMismatch {
                expected: counts.len(),
                found: n,
            }
            .into());
        }
        output(out, n, "out")?.copy_from_slice(counts);
        Ok(())
    })
}

/// Penalty value (and optionally gradient) of `w`. The projected families
/// need `draw` from the same `w` length; L1 and L2 ignore it (may be null).
/// `normalize` applies the counter-based weight λ/max count.
///
/// # Safety
/// `w` (and `grad` if non-null) must hold `n` values; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn projreg_penalty(
    family: ProjregPenaltyFamily,
    lambda: f64,
    normalize: bool,
    w: *const f64,
    n: usize,
    draw: *const ProjregDraw,
    value: *mut f64,
    grad: *mut f64,
) -> ProjregStatus {
    guard(|| {
        let w = input(w, n, "w")?;
        let value = handle(value, "value")?;
        let family = match family {
            ProjregPenaltyFamily::L1 => PenaltyFamily::L1,
            ProjregPenaltyFamily::L2 => PenaltyFamily::L2,
            ProjregPenaltyFamily::ProposedSqrt => PenaltyFamily::ProposedSqrt,
            ProjregPenaltyFamily::ProposedSquared => PenaltyFamily::ProposedSquared,
        };
        let spec = PenaltySpec {
            normalize_by_counter: normalize,
            ..PenaltySpec::new(family, lambda)
        };
        spec.validate()?;
        let empty = IndexCounter::new(n);
        let result = match draw.as_ref() {
            Some(d) => evaluate(w, &spec, &d.0.masks, &d.0.counter)?,
            None if family.is_projected() => return Err(null("draw")),
            None => evaluate(w, &spec, &[], &empty)?,
        };
        *value = result.value;
        if !grad.is_null() {
            output(grad, n, "grad")?.copy_from_slice(&result.gradient);
        }
        Ok(())
    })
}

/// Max-subtracted softmax of `n` scores into `out` (may alias `scores`).
///
/// # Safety
/// Both buffers must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn projreg_softmax(
    scores: *const f64,
    n: usize,
    out: *mut f64,
) -> ProjregStatus {
    guard(|| {
        let p = stable_softmax(input(scores, n, "scores")?)?;
        output(out, n, "out")?.copy_from_slice(&p);
        Ok(())
    })
}

/// Monte Carlo check of E||w⊙I||₂ ≤ √(1−T)·||w||₂ with `experiments`
/// uniform-threshold masks; `sp` only enters the scaled bound column.
///
/// # Safety
/// `w` must hold `n` values; `rng` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn projreg_verify_bound(
    w: *const f64,
    n: usize,
    threshold: f64,
    experiments: usize,
    sp: f64,
    tolerance: f64,
    rng: *mut ProjregRng,
    out: *mut ProjregBoundReport,
) -> ProjregStatus {
    guard(|| {
        let w = input(w, n, "w")?;
        let rng = handle(rng, "rng")?;
        let out = handle(out, "out")?;
        let cfg = SamplerConfig {
            density: sp,
            experiments,
            threshold,
            selection: SelectionMode::UniformThreshold,
            ..SamplerConfig::default()
        };
        let r = verify_bound_mc(w, &cfg, &mut rng.0, tolerance)?;
        *out = ProjregBoundReport {
            n: r.n,
            threshold: r.threshold,
            experiments: r.experiments,
            seed: r.seed,
            mc_mean_lhs: r.mc_mean_lhs,
            mc_std_error: r.mc_std_error,
            analytic_rhs: r.analytic_rhs,
            bound_rhs_scaled: r.bound_rhs_scaled,
            tolerance: r.tolerance,
            holds: r.holds,
        };
        Ok(())
    })
}
