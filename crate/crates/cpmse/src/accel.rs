//! Nonlinear convergence acceleration of the expansion partial sums.
//!
//! The Shanks transformation
//! `S(U_l) = (U_{l+1} U_{l-1} - U_l²) / (U_{l+1} - 2 U_l + U_{l-1})`
//! is exact for geometrically approaching partial sums `U_l = U + α q^l`.
//! For large dielectric contrast the odd-order contributions are strongly
//! suppressed (they vanish for a perfect conductor), so the plain transform
//! of mixed-parity sums extrapolates poorly; the even/odd policy then
//! applies the transform to the even-order and odd-order partial sums
//! separately and adds the two branch limits. A branch with only two sums is
//! extrapolated by prepending the natural zeroth partial sum `0`, which
//! reduces to the two-term geometric limit `δ₀²/(δ₀ - δ₂)`.

use crate::{Error, Result};

/// Relative scale below which the Shanks denominator is treated as
/// degenerate (the transform is 0/0 on an exactly converged sequence).
const DEGENERATE_RELATIVE: f64 = 1e-12;

/// Result of a single Shanks step. On a degenerate (already converged or
/// non-geometric) triple the untransformed `u_next` is returned and flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShanksOutcome {
    pub value: f64,
    pub degenerate: bool,
}

/// One Shanks step on the triple `(U_{l-1}, U_l, U_{l+1})`.
pub fn shanks(u_prev: f64, u: f64, u_next: f64) -> ShanksOutcome {
    let denominator = u_next - 2.0 * u + u_prev;
    let scale = u_prev.abs().max(u.abs()).max(u_next.abs());
    if denominator.abs() <= DEGENERATE_RELATIVE * scale {
        return ShanksOutcome {
            value: u_next,
            degenerate: true,
        };
    }
    ShanksOutcome {
        value: (u_next * u_prev - u * u) / denominator,
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccelPolicy {
    Plain,
    EvenOdd,
}

/// Acceleration summary: the input partial sums, the transformed values, the
/// policy that was actually applied, the final estimate and a consistency
/// gap between the final estimate and the last partial sum, used as an
/// extrapolation-error proxy.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelerationReport {
    pub input_sums: Vec<f64>,
    pub shanks: Vec<f64>,
    pub policy: AccelPolicy,
    pub final_estimate: f64,
    pub spread: f64,
    /// Set when the requested even/odd split could not be applied (too few
    /// orders) and the plain transform was used instead, or when a
    /// degenerate triple was encountered.
    pub note: Option<String>,
}

/// Extrapolates the limit of a branch of partial sums. With three or more
/// sums, the Shanks transform of the last triple; with exactly two, the
/// prepended-zero transform (two-term geometric limit); with one, the sum
/// itself.
fn branch_limit(sums: &[f64], transformed: &mut Vec<f64>, degenerate: &mut bool) -> f64 {
    match sums.len() {
        0 => 0.0,
        1 => sums[0],
        2 => {
            let out = shanks(0.0, sums[0], sums[1]);
            *degenerate |= out.degenerate;
            transformed.push(out.value);
            out.value
        }
        n => {
            let out = shanks(sums[n - 3], sums[n - 2], sums[n - 1]);
            *degenerate |= out.degenerate;
            transformed.push(out.value);
            out.value
        }
    }
}

/// Accelerates the sequence of partial sums `U_0, U_1, ...`.
///
/// The even/odd policy activates for `epsilon1 >= policy_threshold` provided
/// partial sums through order 4 are available; otherwise it falls back to
/// the plain transform with a note. The plain transform reports `S` at every
/// admissible position; the final estimate is the last one.
pub fn accelerate(
    partials: &[f64],
    epsilon1: f64,
    policy_threshold: f64,
) -> Result<AccelerationReport> {
    if partials.len() < 3 {
        return Err(Error::TooFewPartialSums {
            needed: 3,
            got: partials.len(),
        });
    }
    let want_split = epsilon1 >= policy_threshold;
    let mut note = None;

    if want_split && partials.len() >= 5 {
        // Per-order contributions, then parity-resolved partial sums.
        let mut deltas = Vec::with_capacity(partials.len());
        let mut prev = 0.0;
        for &u in partials {
            deltas.push(u - prev);
            prev = u;
        }
        let mut even_sums = Vec::new();
        let mut odd_sums = Vec::new();
        let (mut even_acc, mut odd_acc) = (0.0, 0.0);
        for (l, &d) in deltas.iter().enumerate() {
            if l % 2 == 0 {
                even_acc += d;
                even_sums.push(even_acc);
            } else {
                odd_acc += d;
                odd_sums.push(odd_acc);
            }
        }
        let mut transformed = Vec::new();
        let mut degenerate = false;
        let even_limit = branch_limit(&even_sums, &mut transformed, &mut degenerate);
        let odd_limit = branch_limit(&odd_sums, &mut transformed, &mut degenerate);
        let final_estimate = even_limit + odd_limit;
        if degenerate {
            note = Some("degenerate Shanks denominator in a parity branch".into());
        }
        let last = *partials.last().expect("nonempty");
        return Ok(AccelerationReport {
            input_sums: partials.to_vec(),
            shanks: transformed,
            policy: AccelPolicy::EvenOdd,
            final_estimate,
            spread: (final_estimate - last).abs(),
            note,
        });
    }

    if want_split {
        note = Some(format!(
            "even/odd split requires orders through 4; got {} sums, plain fallback",
            partials.len()
        ));
    }
    let mut transformed = Vec::new();
    let mut last_outcome = None;
    for window in partials.windows(3) {
        let out = shanks(window[0], window[1], window[2]);
        transformed.push(out.value);
        last_outcome = Some(out);
    }
    let out = last_outcome.expect("len >= 3 guarantees a window");
    if out.degenerate && note.is_none() {
        note = Some("degenerate Shanks denominator; sequence already converged".into());
    }
    let last = *partials.last().expect("nonempty");
    Ok(AccelerationReport {
        input_sums: partials.to_vec(),
        shanks: transformed,
        policy: AccelPolicy::Plain,
        final_estimate: out.value,
        spread: (out.value - last).abs(),
        note,
    })
}
