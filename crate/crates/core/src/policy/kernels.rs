//! Integral skeletons shared by both receiver policies. Each policy supplies
//! its own thresholds and per-gain SNR maps; the integration is identical.
//!
//! All integrals are taken in gains normalised by their means, so the
//! quadrature tolerances apply on the probability / rate scale.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_finite, integrate_semi_infinite, QuadSpec};
use crate::special::{scaled_e1, EULER};

/// exp(-x) below this is treated as zero.
const EXP_CUTOFF: f64 = 745.0;

/// Secrecy outage conditioned on an active harvester.
///
/// `nu` is the outage boundary slope: with g_rd = y fixed, an outage occurs
/// iff g_sr * nu(y) < delta - 1. `theta1` is the positive root of `nu`.
pub(crate) fn secrecy_outage<N: Fn(f64) -> f64>(
    delta: f64,
    theta1: f64,
    nu: N,
    lambda_sr: f64,
    lambda_rd: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    if !delta.is_finite() || !theta1.is_finite() {
        return Ok(1.0);
    }
    let tail = (-theta1 / lambda_rd).exp();
    if delta == 1.0 {
        return Ok((-(-theta1 / lambda_rd).exp_m1()).clamp(0.0, 1.0));
    }
    if tail == 0.0 {
        return Ok(1.0);
    }
    let survive = outage_complement_quadrature(delta, theta1, nu, lambda_sr, lambda_rd, spec)?;
    Ok((1.0 - survive).clamp(0.0, 1.0))
}

/// (1/λ_RD) ∫_{θ1}^∞ exp(-(δ-1)/(ν(x) λ_SR) - x/λ_RD) dx, always by quadrature.
pub(crate) fn outage_complement_quadrature<N: Fn(f64) -> f64>(
    delta: f64,
    theta1: f64,
    nu: N,
    lambda_sr: f64,
    lambda_rd: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    let dm1 = delta - 1.0;
    let integrand = |u: f64| {
        let n = nu(theta1 + lambda_rd * u);
        if n > 0.0 {
            (-dm1 / (n * lambda_sr) - u).exp()
        } else if dm1 == 0.0 {
            (-u).exp()
        } else {
            0.0
        }
    };
    let tail = (-theta1 / lambda_rd).exp();
    Ok(tail * integrate_semi_infinite(integrand, 0.0, 1.0, spec)?.value)
}

/// P(γ_D,exact > γ_R | active).
///
/// The positive-rate region is g_sr > psi(g_rd) for g_rd > theta2, with
/// psi(theta3) = 0 and psi < 0 beyond theta3.
pub(crate) fn prob_positive<S: Fn(f64) -> f64>(
    theta2: f64,
    theta3: f64,
    psi: S,
    lambda_sr: f64,
    lambda_rd: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    let head = (-theta3 / lambda_rd).exp();
    let integrand = |u: f64| {
        let s = psi(lambda_rd * u);
        if s.is_finite() {
            (-s.max(0.0) / lambda_sr - u).exp()
        } else {
            0.0
        }
    };
    let body = integrate_finite(integrand, theta2 / lambda_rd, theta3 / lambda_rd, spec)?.value;
    Ok((head + body).clamp(0.0, 1.0))
}

/// E{R_sec | active} as a double integral over (g_sr, g_rd).
///
/// `rate(g_sr, g_rd)` must already include the clamp. The outer integral
/// starts at `start` (below which the rate vanishes). `lower(g_rd)` is the
/// smallest g_sr with positive rate; when `split` is given the outer range
/// is cut there, since `lower` has a singular edge at `start`.
pub(crate) fn ergodic<R, L>(
    rate: R,
    lower: L,
    start: f64,
    split: Option<f64>,
    lambda_sr: f64,
    lambda_rd: f64,
    spec: &QuadSpec,
) -> Result<f64>
where
    R: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
{
    let inner_spec = QuadSpec {
        abs_tol: spec.abs_tol * 0.1,
        rel_tol: spec.rel_tol * 0.1,
        ..*spec
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let outer = |v: f64| {
        let y = lambda_rd * v;
        let lo = lower(y).max(0.0) / lambda_sr;
        if !lo.is_finite() || lo > EXP_CUTOFF || v > EXP_CUTOFF {
            return 0.0;
        }
        let inner = integrate_semi_infinite(|u| rate(lambda_sr * u, y) * (-u).exp(), lo, 1.0, &inner_spec);
        match inner {
            Ok(r) => r.value * (-v).exp(),
            Err(e) => {
                let mut slot = failure.borrow_mut();
                if slot.is_none() {
                    *slot = Some(e);
                }
                f64::NAN
            }
        }
    };
    let v0 = start / lambda_rd;
    let total = match split {
        Some(s) if s > start => {
            let v1 = s / lambda_rd;
            let near = integrate_finite(&outer, v0, v1, spec);
            let far = integrate_semi_infinite(&outer, v1, 1.0, spec);
            near.and_then(|a| far.map(|b| a.value + b.value))
        }
        _ => integrate_semi_infinite(&outer, v0, 1.0, spec).map(|r| r.value),
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(total?.max(0.0))
}

/// (T1, T2) of the ergodic lower bound, in nats.
///
/// With γ_R = X / (Y + 1) and γ_D ≈ X Z / (Z + 1), X ~ Exp(m_x),
/// Y ~ Exp(m_y), Z ~ Exp(m_z): T1 = ln(1 + exp(E ln γ_D)) and
/// T2 = E ln(1 + γ_R).
pub(crate) fn lower_bound_terms(m_x: f64, m_y: f64, m_z: f64) -> (f64, f64) {
    let j1 = -2.0 * EULER + (m_x * m_z).ln();
    let j2 = scaled_e1_or_limit(1.0 / m_z);
    let t1 = softplus(j1 - j2);
    (t1, t2(m_x, m_y))
}

/// Ratio tolerance for the equal-means T2 branch.
pub(crate) const T2_EQUAL_RTOL: f64 = 1e-6;

pub(crate) fn t2(m_x: f64, m_y: f64) -> f64 {
    if (m_y / m_x - 1.0).abs() <= T2_EQUAL_RTOL {
        t2_equal(m_x)
    } else {
        t2_general(m_x, m_y)
    }
}

pub(crate) fn t2_general(m_x: f64, m_y: f64) -> f64 {
    m_x / (m_x - m_y) * (scaled_e1_or_limit(1.0 / m_x) - scaled_e1_or_limit(1.0 / m_y))
}

pub(crate) fn t2_equal(m_x: f64) -> f64 {
    1.0 - scaled_e1_or_limit(1.0 / m_x) / m_x
}

/// e^x E1(x), continued to its limits at 0 and ∞.
fn scaled_e1_or_limit(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else if x == 0.0 {
        f64::INFINITY
    } else {
        scaled_e1(x).unwrap_or(0.0)
    }
}

fn softplus(t: f64) -> f64 {
    if t > 36.0 {
        t + (-t).exp()
    } else {
        t.exp().ln_1p()
    }
}
