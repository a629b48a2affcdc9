//! Power splitting: the relay sends a fraction β of the received RF power to
//! the harvester and 1 − β to the information receiver.

use crate::error::Result;
use crate::policy::{kernels, RelayPolicy};
use crate::quadrature::QuadSpec;
use crate::shared::power_outage_prob;
use crate::special::{cubic_positive_root, CubicCoeffs};
use crate::types::{check_fraction, ChannelSample, PolicyKind, SystemParams};

pub fn snr_relay_ps(p: &SystemParams, beta: f64, s: ChannelSample) -> f64 {
    let rx = (1.0 - beta) * p.p_s * s.g_sr;
    rx / ((1.0 - beta) * p.p_d * s.g_rd + p.n0)
}

pub fn snr_dest_ps_exact(p: &SystemParams, beta: f64, s: ChannelSample) -> f64 {
    let received = p.p_s * s.g_sr + p.p_d * s.g_rd;
    if received == 0.0 {
        return 0.0;
    }
    let num = p.eta * beta * (1.0 - beta) * p.p_s * s.g_sr * s.g_rd;
    let den = p.eta * beta * s.g_rd * p.n0 + p.n0 * (1.0 - beta) + p.n0 * p.n0 / received;
    num / den
}

/// Destination SNR with the noise-squared term dropped.
pub fn snr_dest_ps_approx(p: &SystemParams, beta: f64, s: ChannelSample) -> f64 {
    let num = p.eta * beta * (1.0 - beta) * p.p_s * s.g_sr * s.g_rd;
    let den = p.n0 * (p.eta * beta * s.g_rd + 1.0 - beta);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Thresholds and constants of the PS closed forms at one (params, β) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsDerived {
    pub params: SystemParams,
    pub beta: f64,
    pub power: f64,
    /// 2^(2 R_th)
    pub delta: f64,
    /// Positive root of ν.
    pub theta1: f64,
    /// Smallest g_rd with any chance of positive secrecy rate.
    pub theta2_limit: f64,
    /// 𝒜 of the cubic x³ − 𝒜x − ℬ.
    pub a_coef: f64,
    /// ℬ of the cubic.
    pub b_coef: f64,
    /// Root of the cubic; ψ < 0 beyond it.
    pub theta3: f64,
    pub m_x: f64,
    pub m_y: f64,
    pub m_z: f64,
}

impl PsDerived {
    /// Requires equal powers and 0 < β < 1.
    pub fn new(p: &SystemParams, beta: f64) -> Result<Self> {
        let power = p.common_power()?;
        check_fraction("beta", beta)?;
        if beta == 0.0 || beta == 1.0 {
            return Err(crate::error::Error::invalid(
                "beta",
                "closed forms need 0 < beta < 1",
            ));
        }
        let (n0, eta) = (p.n0, p.eta);
        let delta = 2f64.powf(2.0 * p.r_th);
        let c = (delta - 1.0) / (1.0 - beta);
        let root = c.hypot(2.0 * (delta * power / (eta * beta * n0)).sqrt());
        let theta1 = (c + root) / (2.0 * power / n0);
        let a_coef = n0 / (eta * beta * power);
        let b_coef = n0 * n0 / (eta * beta * (1.0 - beta) * power * power);
        let theta3 = cubic_positive_root(CubicCoeffs::new(a_coef, b_coef)?)?;
        Ok(Self {
            params: *p,
            beta,
            power,
            delta,
            theta1,
            theta2_limit: a_coef.sqrt(),
            a_coef,
            b_coef,
            theta3,
            m_x: (1.0 - beta) * power * p.lambda_sr / n0,
            m_y: (1.0 - beta) * power * p.lambda_rd / n0,
            m_z: eta * beta * p.lambda_rd / (1.0 - beta),
        })
    }

    /// Outage iff g_sr · ν(g_rd) < δ − 1.
    pub fn nu(&self, x: f64) -> f64 {
        let (b, eta, n0, pw) = (self.beta, self.params.eta, self.params.n0, self.power);
        (1.0 - b) * (eta * b * pw * x / (n0 * (eta * b * x + 1.0 - b)) - pw * self.delta / (pw * (1.0 - b) * x + n0))
    }

    /// Positive secrecy rate (exact SNR) iff g_sr > ψ(g_rd), for g_rd > θ2.
    pub fn psi(&self, x: f64) -> f64 {
        let (b, eta, n0, pw) = (self.beta, self.params.eta, self.params.n0, self.power);
        let g = eta * b * pw * x * x - n0;
        if g <= 0.0 {
            return f64::INFINITY;
        }
        n0 * n0 / (pw * (1.0 - b) * g) - x
    }
}

fn degenerate(beta: f64) -> bool {
    beta <= 0.0 || beta >= 1.0
}

pub fn secrecy_outage_ps(p: &SystemParams, beta: f64, spec: &QuadSpec) -> Result<f64> {
    p.common_power()?;
    check_fraction("beta", beta)?;
    if degenerate(beta) {
        return Ok(1.0);
    }
    let d = PsDerived::new(p, beta)?;
    kernels::secrecy_outage(d.delta, d.theta1, |x| d.nu(x), p.lambda_sr, p.lambda_rd, spec)
}

pub fn prob_pos_secrecy_ps_exact(p: &SystemParams, beta: f64, spec: &QuadSpec) -> Result<f64> {
    let pp = power_outage_prob(p)?;
    check_fraction("beta", beta)?;
    if degenerate(beta) {
        return Ok(0.0);
    }
    let d = PsDerived::new(p, beta)?;
    let cond = kernels::prob_positive(d.theta2_limit, d.theta3, |x| d.psi(x), p.lambda_sr, p.lambda_rd, spec)?;
    Ok((1.0 - pp) * cond)
}

pub fn prob_pos_secrecy_ps_approx(p: &SystemParams, beta: f64) -> Result<f64> {
    let pp = power_outage_prob(p)?;
    check_fraction("beta", beta)?;
    if degenerate(beta) {
        return Ok(0.0);
    }
    let d = PsDerived::new(p, beta)?;
    Ok((1.0 - pp) * (-d.a_coef.sqrt() / p.lambda_rd).exp())
}

pub fn ergodic_ps_exact(p: &SystemParams, beta: f64, spec: &QuadSpec) -> Result<f64> {
    ergodic_ps(p, beta, spec, true)
}

pub fn ergodic_ps_approx(p: &SystemParams, beta: f64, spec: &QuadSpec) -> Result<f64> {
    ergodic_ps(p, beta, spec, false)
}

fn ergodic_ps(p: &SystemParams, beta: f64, spec: &QuadSpec, exact: bool) -> Result<f64> {
    let pp = power_outage_prob(p)?;
    check_fraction("beta", beta)?;
    if degenerate(beta) {
        return Ok(0.0);
    }
    let d = PsDerived::new(p, beta)?;
    let rate = |gsr: f64, grd: f64| PowerSplitting.secrecy_rate(p, beta, ChannelSample::new(gsr, grd), exact);
    let cond = if exact {
        kernels::ergodic(rate, |y| d.psi(y), d.theta2_limit, Some(d.theta3), p.lambda_sr, p.lambda_rd, spec)?
    } else {
        kernels::ergodic(rate, |_| 0.0, d.theta2_limit, None, p.lambda_sr, p.lambda_rd, spec)?
    };
    Ok((1.0 - pp) * cond)
}

pub fn ergodic_ps_lower_bound(p: &SystemParams, beta: f64) -> Result<f64> {
    let pp = power_outage_prob(p)?;
    check_fraction("beta", beta)?;
    if degenerate(beta) {
        return Ok(0.0);
    }
    let d = PsDerived::new(p, beta)?;
    let (t1, t2) = kernels::lower_bound_terms(d.m_x, d.m_y, d.m_z);
    Ok((1.0 - pp) * ((t1 - t2) / (2.0 * std::f64::consts::LN_2)).max(0.0))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PowerSplitting;

impl RelayPolicy for PowerSplitting {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Ps
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["power-splitting", "power_splitting"]
    }

    fn time_factor(&self, _beta: f64) -> f64 {
        0.5
    }

    fn snr_relay(&self, p: &SystemParams, x: f64, s: ChannelSample) -> f64 {
        snr_relay_ps(p, x, s)
    }

    fn snr_dest_exact(&self, p: &SystemParams, x: f64, s: ChannelSample) -> f64 {
        snr_dest_ps_exact(p, x, s)
    }

    fn snr_dest_approx(&self, p: &SystemParams, x: f64, s: ChannelSample) -> f64 {
        snr_dest_ps_approx(p, x, s)
    }

    fn secrecy_outage(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64> {
        secrecy_outage_ps(p, x, spec)
    }

    fn prob_positive_exact(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64> {
        prob_pos_secrecy_ps_exact(p, x, spec)
    }

    fn prob_positive_approx(&self, p: &SystemParams, x: f64) -> Result<f64> {
        prob_pos_secrecy_ps_approx(p, x)
    }

    fn ergodic_exact(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64> {
        ergodic_ps_exact(p, x, spec)
    }

    fn ergodic_approx(&self, p: &SystemParams, x: f64, spec: &QuadSpec) -> Result<f64> {
        ergodic_ps_approx(p, x, spec)
    }

    fn ergodic_lower_bound(&self, p: &SystemParams, x: f64) -> Result<f64> {
        ergodic_ps_lower_bound(p, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_semi_infinite;
    use proptest::prelude::*;

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    fn reference() -> SystemParams {
        SystemParams::reference()
    }

    #[test]
    fn relay_snr_examples() {
        let p = reference();
        let s = ChannelSample::new(0.02, 0.01);
        assert!((snr_relay_ps(&p, 0.5, s) - 0.1 / (0.05 + 1e-4)).abs() < 1e-12);
        assert!((snr_relay_ps(&p, 0.5, s) - 1.996_01).abs() < 1e-5);
        assert_eq!(snr_relay_ps(&p, 1.0, s), 0.0);
        assert_eq!(snr_relay_ps(&p, 0.5, ChannelSample::new(0.0, 0.3)), 0.0);
    }

    #[test]
    fn dest_snr_examples() {
        let p = reference();
        let lam = p.lambda_sr;
        let s = ChannelSample::new(lam, lam);
        assert_eq!(snr_dest_ps_exact(&p, 0.0, s), 0.0);
        assert_eq!(snr_dest_ps_exact(&p, 1.0, s), 0.0);
        assert_eq!(snr_dest_ps_approx(&p, 0.0, s), 0.0);
        assert_eq!(snr_dest_ps_approx(&p, 1.0, s), 0.0);
        assert_eq!(snr_dest_ps_exact(&p, 0.5, ChannelSample::new(0.0, 0.0)), 0.0);

        // hand-expanded at β = 0.5, η = 0.7, P = 10, N0 = 1e-4
        let num = 0.7 * 0.5 * 0.5 * 10.0 * lam * lam;
        let den = 0.7 * 0.5 * lam * 1e-4 + 1e-4 * 0.5 + 1e-8 / (10.0 * lam + 10.0 * lam);
        let exact = snr_dest_ps_exact(&p, 0.5, s);
        assert!(((exact - num / den) / exact).abs() < 1e-14);
        let approx = snr_dest_ps_approx(&p, 0.5, s);
        assert!(approx >= exact);
        assert!((approx - exact) / approx < 1e-3);
    }

    #[test]
    fn derived_thresholds_satisfy_their_equations() {
        let p = reference();
        for beta in [0.05, 0.3, 0.5, 0.9, 0.99] {
            for r in [0.0, 0.5, 2.0] {
                let d = PsDerived::new(&p.with_r_th(r), beta).unwrap();
                assert!(d.nu(d.theta1).abs() <= 1e-10 * p.transmit_snr());
                assert!(d.nu(d.theta1 * 1.01) > 0.0);
                assert!(d.theta3 > d.theta2_limit);
                assert!(d.psi(d.theta3).abs() <= 1e-9 * d.theta3);
                assert!(d.psi(d.theta2_limit * (1.0 + 1e-9)) > 1e3);
            }
        }
    }

    #[test]
    fn zero_rate_identity() {
        let p = reference().with_r_th(0.0);
        for beta in [0.1, 0.5, 0.9] {
            let out = secrecy_outage_ps(&p, beta, &spec()).unwrap();
            let closed = 1.0 - (-(p.n0 / (p.eta * beta * 10.0)).sqrt() / p.lambda_rd).exp();
            assert!((out - closed).abs() < 1e-12);
            // forced through the quadrature path
            let d = PsDerived::new(&p, beta).unwrap();
            let q = kernels::outage_complement_quadrature(1.0, d.theta1, |x| d.nu(x), p.lambda_sr, p.lambda_rd, &spec())
                .unwrap();
            assert!((1.0 - q - closed).abs() < 1e-9);
            let pp = power_outage_prob(&p).unwrap();
            let pos = prob_pos_secrecy_ps_approx(&p, beta).unwrap();
            assert!((out + pos / (1.0 - pp) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_splits() {
        let p = reference();
        for beta in [0.0, 1.0] {
            assert_eq!(secrecy_outage_ps(&p, beta, &spec()).unwrap(), 1.0);
            assert_eq!(prob_pos_secrecy_ps_exact(&p, beta, &spec()).unwrap(), 0.0);
            assert_eq!(prob_pos_secrecy_ps_approx(&p, beta).unwrap(), 0.0);
            assert_eq!(ergodic_ps_exact(&p, beta, &spec()).unwrap(), 0.0);
            assert_eq!(ergodic_ps_lower_bound(&p, beta).unwrap(), 0.0);
        }
        assert!(secrecy_outage_ps(&p, 1e-6, &spec()).unwrap() > 0.999);
        assert!(secrecy_outage_ps(&p, 1.5, &spec()).is_err());
        let mut q = p;
        q.p_d = 1.0;
        assert!(secrecy_outage_ps(&q, 0.5, &spec()).is_err());
    }

    #[test]
    fn literal_outage_transcription() {
        // straight from the printed integral, no normalisation or factoring
        let p = reference();
        let (pw, n0, eta) = (10.0, p.n0, p.eta);
        for beta in [0.2, 0.5, 0.8] {
            let delta: f64 = 2f64.powf(2.0 * p.r_th);
            let c = (delta - 1.0) / (1.0 - beta);
            let theta1 = (c + (c * c + 4.0 * delta * pw / (eta * beta * n0)).sqrt()) / (2.0 * pw / n0);
            let nu = |x: f64| {
                (1.0 - beta)
                    * (eta * beta * pw * x / (n0 * (eta * beta * x + 1.0 - beta)) - pw * delta / (pw * (1.0 - beta) * x + n0))
            };
            let lam_sr = p.lambda_sr;
            let lam_rd = p.lambda_rd;
            let integral = integrate_semi_infinite(
                |x: f64| {
                    let n = nu(x);
                    if n <= 0.0 {
                        0.0
                    } else {
                        (-(delta - 1.0) / (n * lam_sr) - x / lam_rd).exp()
                    }
                },
                theta1,
                lam_rd,
                &QuadSpec {
                    abs_tol: 1e-13,
                    ..spec()
                },
            )
            .unwrap()
            .value;
            let literal = 1.0 - integral / lam_rd;
            let got = secrecy_outage_ps(&p, beta, &spec()).unwrap();
            assert!((got - literal).abs() < 1e-7, "beta {beta}: {got} vs {literal}");
        }
    }

    #[test]
    fn approx_ergodic_dominates_exact_and_bound() {
        let p = reference();
        for beta in [0.3, 0.5, 0.8] {
            let ex = ergodic_ps_exact(&p, beta, &spec()).unwrap();
            let ap = ergodic_ps_approx(&p, beta, &spec()).unwrap();
            let lb = ergodic_ps_lower_bound(&p, beta).unwrap();
            assert!(ap >= ex - 1e-6, "{ap} < {ex}");
            assert!(lb <= ap + 1e-6);
            assert!(((ap - ex) / ap).abs() < 0.01);
        }
    }

    #[test]
    fn exact_and_approx_positive_probability_are_close() {
        let p = reference();
        let ex = prob_pos_secrecy_ps_exact(&p, 0.5, &spec()).unwrap();
        let ap = prob_pos_secrecy_ps_approx(&p, 0.5).unwrap();
        assert!((ex - ap).abs() < 0.01);
        assert!(ex <= ap + 1e-9);
    }

    #[test]
    fn high_power_limit_of_positive_probability() {
        let p = reference().with_power(1e6).with_eta(1.0);
        let pp = power_outage_prob(&p).unwrap();
        let v = prob_pos_secrecy_ps_exact(&p, 0.5, &spec()).unwrap();
        assert!((v - (1.0 - pp)).abs() < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn outage_nondecreasing_in_target_rate(beta in 0.05f64..0.95, r in 0.0f64..2.0, dr in 0.01f64..1.0) {
            let p = reference();
            let lo = secrecy_outage_ps(&p.with_r_th(r), beta, &spec()).unwrap();
            let hi = secrecy_outage_ps(&p.with_r_th(r + dr), beta, &spec()).unwrap();
            prop_assert!(hi >= lo - 1e-7);
            prop_assert!((0.0..=1.0).contains(&lo));
        }

        #[test]
        fn lower_bound_below_approx_ergodic(beta in 0.02f64..0.98, snr_db in 20.0f64..60.0) {
            let p = reference().with_power(1e-4 * 10f64.powf(snr_db / 10.0));
            let lb = ergodic_ps_lower_bound(&p, beta).unwrap();
            let ap = ergodic_ps_approx(&p, beta, &spec()).unwrap();
            prop_assert!(lb <= ap + 1e-6, "{} > {}", lb, ap);
        }
    }
}
