//! C ABI for the starkprufer numerical laboratory.
//!
//! The reference solution is held behind an opaque handle; every function
//! returns a status code and writes results through out-pointers. Handles are
//! immutable after construction and safe to share across threads; freeing is
//! the caller's responsibility via `sp_reference_free`.

use std::os::raw::c_int;

use starkprufer::expsum::{cubic_gauss_sum, GaussSumSpec};
use starkprufer::prufer::{build_resonance_grid, initial_state, run_prufer};
use starkprufer::random::{detect_subordinate, mc_radius_exponent, CouplingFamily, CouplingSampler};
use starkprufer::special::gamma_asymptotic;
use starkprufer::{Error, ModelParams, ReferenceSolution};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidParameter = 2,
    DomainError = 3,
    ResourceLimit = 4,
    PrecisionLoss = 5,
    InternalError = 6,
}

fn status_of(e: &Error) -> SpStatus {
    match e {
        Error::InvalidParameter(_) => SpStatus::InvalidParameter,
        Error::Domain(_) => SpStatus::DomainError,
        Error::Resource(_) => SpStatus::ResourceLimit,
        Error::Precision(_) => SpStatus::PrecisionLoss,
        _ => SpStatus::InternalError,
    }
}

/// Opaque reference-solution handle.
pub struct SpReference {
    inner: ReferenceSolution,
}

fn family_of(code: c_int) -> Option<CouplingFamily> {
    match code {
        0 => Some(CouplingFamily::Gaussian),
        1 => Some(CouplingFamily::Rademacher),
        2 => Some(CouplingFamily::Uniform),
        _ => None,
    }
}

/// Airy functions: out = [Ai, Bi, Ai', Bi'] at x. Validated for
/// -1e4 <= x <= 104.
///
/// # Safety
/// `out` must point to at least 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_airy(x: f64, out: *mut f64) -> SpStatus {
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    match starkprufer::airy(x) {
        Ok(v) => {
            let out = std::slice::from_raw_parts_mut(out, 4);
            out[0] = v.ai;
            out[1] = v.bi;
            out[2] = v.ai_prime;
            out[3] = v.bi_prime;
            SpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Build a reference-solution handle for field strength F > 0, energy E and
/// coupling lambda. On success *out owns the handle.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sp_reference_new(
    field_strength: f64,
    energy: f64,
    coupling: f64,
    out: *mut *mut SpReference,
) -> SpStatus {
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    let params = match ModelParams::new(field_strength, energy, coupling) {
        Ok(p) => p,
        Err(e) => return status_of(&e),
    };
    match ReferenceSolution::new(params) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SpReference { inner }));
            SpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Build a handle with the exact rational field F = pi^2 q/(3 p), gcd(p,q)=1.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sp_reference_new_rational(
    p: u64,
    q: u64,
    energy: f64,
    coupling: f64,
    out: *mut *mut SpReference,
) -> SpStatus {
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    let params = match ModelParams::from_rational(p, q, energy, coupling) {
        Ok(p) => p,
        Err(e) => return status_of(&e),
    };
    match ReferenceSolution::new(params) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SpReference { inner }));
            SpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a handle created by one of the constructors. Null is a no-op.
///
/// # Safety
/// `handle` must have come from sp_reference_new(_rational) and not have been
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn sp_reference_free(handle: *mut SpReference) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// zeta(x) and zeta'(x): out = [Re zeta, Im zeta, Re zeta', Im zeta'].
///
/// # Safety
/// `handle` must be a live handle; `out` must hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_zeta(handle: *const SpReference, x: f64, out: *mut f64) -> SpStatus {
    let Some(r) = handle.as_ref() else {
        return SpStatus::NullArgument;
    };
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    match r.inner.zeta(x) {
        Ok((z, dz)) => {
            let out = std::slice::from_raw_parts_mut(out, 4);
            out[0] = z.re;
            out[1] = z.im;
            out[2] = dz.re;
            out[3] = dz.im;
            SpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Continuous phase data: out = [gamma, gamma', gamma''] at x.
///
/// # Safety
/// `handle` must be a live handle; `out` must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_gamma_phase(
    handle: *const SpReference,
    x: f64,
    out: *mut f64,
) -> SpStatus {
    let Some(r) = handle.as_ref() else {
        return SpStatus::NullArgument;
    };
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    match r.inner.eval_phase(x) {
        Ok(p) => {
            let out = std::slice::from_raw_parts_mut(out, 3);
            out[0] = p.gamma;
            out[1] = p.gamma1;
            out[2] = p.gamma2;
            SpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Leading asymptotics of gamma (order 0), gamma' (1) or gamma'' (2) at x > 0.
///
/// # Safety
/// `out` must be a valid double pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_gamma_asymptotic(
    field_strength: f64,
    energy: f64,
    x: f64,
    order: u8,
    out: *mut f64,
) -> SpStatus {
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    let params = match ModelParams::new(field_strength, energy, 0.0) {
        Ok(p) => p,
        Err(e) => return status_of(&e),
    };
    match gamma_asymptotic(&params, x, order) {
        Ok(v) => {
            *out = v;
            SpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Resonant point X_l (gamma'(X_l) = pi l) and sampling point x_l.
///
/// # Safety
/// `handle` must be live; `out_resonant`, `out_sampling` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sp_resonance_points(
    handle: *const SpReference,
    l: u32,
    out_resonant: *mut f64,
    out_sampling: *mut f64,
) -> SpStatus {
    let Some(r) = handle.as_ref() else {
        return SpStatus::NullArgument;
    };
    if out_resonant.is_null() || out_sampling.is_null() {
        return SpStatus::NullArgument;
    }
    match build_resonance_grid(&r.inner, l, l) {
        Ok(grid) => {
            *out_resonant = grid.resonant(l);
            *out_sampling = grid.sampling(l);
            SpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Run the exact Prufer recursion from boundary angle theta0 up to cell
/// n_max. Couplings are g_n = lambda when use_random is 0, otherwise drawn
/// from the counter-based sampler (family: 0 gaussian, 1 rademacher,
/// 2 uniform). out = [log R(n_max), eta(n_max)].
///
/// # Safety
/// `handle` must be live; `out` must hold 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_prufer_run(
    handle: *const SpReference,
    theta0: f64,
    n_max: i64,
    use_random: c_int,
    family: c_int,
    seed: u64,
    realization: u64,
    out: *mut f64,
) -> SpStatus {
    let Some(r) = handle.as_ref() else {
        return SpStatus::NullArgument;
    };
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    if !(1..=100_000_000).contains(&n_max) {
        return SpStatus::ResourceLimit;
    }
    let params = *r.inner.params();
    let init = match initial_state(&r.inner, theta0) {
        Ok(s) => s,
        Err(e) => return status_of(&e),
    };
    let sampler = family_of(family).map(|family| CouplingSampler {
        family,
        coupling: params.coupling,
        seed,
        realization,
    });
    if use_random != 0 && sampler.is_none() {
        return SpStatus::InvalidParameter;
    }
    let mut coupling = move |n: i64| {
        if use_random != 0 {
            sampler.as_ref().unwrap().coupling_at(n as u64)
        } else {
            params.coupling
        }
    };
    let traj = run_prufer(&r.inner, &mut coupling, init, n_max, &[]);
    let out = std::slice::from_raw_parts_mut(out, 2);
    out[0] = traj.final_state.log_radius;
    out[1] = traj.final_state.angle;
    SpStatus::Ok
}

/// Cubic Gauss sum w(E, lambda, q, p); with has_m nonzero the exceptional
/// form with integer index m is evaluated. out = [Re w, Im w].
///
/// # Safety
/// `out` must hold 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_cubic_gauss_sum(
    p: u64,
    q: u64,
    energy: f64,
    coupling: f64,
    has_m: c_int,
    m: i64,
    out: *mut f64,
) -> SpStatus {
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    let spec = GaussSumSpec {
        p,
        q,
        energy,
        coupling,
        m: (has_m != 0).then_some(m),
    };
    match cubic_gauss_sum(&spec) {
        Ok(w) => {
            let out = std::slice::from_raw_parts_mut(out, 2);
            out[0] = w.re;
            out[1] = w.im;
            SpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Monte Carlo estimate of the Prufer radius growth exponent
/// (theory lambda^2/(8F)). out = [mean, stderr].
///
/// # Safety
/// `handle` must be live; `out` must hold 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_mc_radius_exponent(
    handle: *const SpReference,
    family: c_int,
    seed: u64,
    n_max: i64,
    trials: u32,
    out: *mut f64,
) -> SpStatus {
    let Some(r) = handle.as_ref() else {
        return SpStatus::NullArgument;
    };
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    let Some(family) = family_of(family) else {
        return SpStatus::InvalidParameter;
    };
    match mc_radius_exponent(r.inner.params(), family, seed, n_max, trials) {
        Ok(stats) => {
            let out = std::slice::from_raw_parts_mut(out, 2);
            out[0] = stats.mean;
            out[1] = stats.stderr;
            SpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Subordinate-branch detection on one realization:
/// out = [decay_exp, generic_exp, boundary_angle]. Returns SP_DOMAIN_ERROR
/// when no contracting direction exists (e.g. lambda = 0).
///
/// # Safety
/// `handle` must be live; `out` must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_detect_subordinate(
    handle: *const SpReference,
    family: c_int,
    seed: u64,
    realization: u64,
    n_max: i64,
    out: *mut f64,
) -> SpStatus {
    let Some(r) = handle.as_ref() else {
        return SpStatus::NullArgument;
    };
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    let Some(family) = family_of(family) else {
        return SpStatus::InvalidParameter;
    };
    let sampler = CouplingSampler {
        family,
        coupling: r.inner.params().coupling,
        seed,
        realization,
    };
    match detect_subordinate(r.inner.params(), &sampler, n_max) {
        Ok(d) if d.applicable => {
            let out = std::slice::from_raw_parts_mut(out, 3);
            out[0] = d.decay_exp;
            out[1] = d.generic_exp;
            out[2] = d.boundary_angle;
            SpStatus::Ok
        }
        Ok(_) => SpStatus::DomainError,
        Err(e) => status_of(&e),
    }
}
