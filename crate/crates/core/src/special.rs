//! Exponential integral, incomplete gamma, Euler's constant and the depressed
//! cubic root used by the positive-secrecy-rate integrals.

use crate::error::{Error, Result};

pub const EULER: f64 = 0.577_215_664_901_532_860_61;

pub fn euler_constant() -> f64 {
    EULER
}

/// Crossover between the power series and the continued fraction.
const SERIES_LIMIT: f64 = 6.0;

/// Ei(x) for x < 0.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) || !x.is_finite() {
        return Err(Error::invalid("x", format!("Ei is only provided for finite x < 0, got {x}")));
    }
    if -x <= SERIES_LIMIT {
        Ok(ei_series(x))
    } else {
        Ok(-e1_scaled_cf(-x, CF_MAX_ITER) * x.exp())
    }
}

/// e^x E1(x) = -e^x Ei(-x) for x > 0, without overflow or underflow.
pub fn scaled_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid("x", format!("scaled E1 needs finite x > 0, got {x}")));
    }
    // the series loses relative accuracy to cancellation well before |x| = 6
    if x <= 1.0 {
        Ok(-ei_series(-x) * x.exp())
    } else {
        Ok(e1_scaled_cf(x, CF_MAX_ITER))
    }
}

pub(crate) fn ei_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in 1..400 {
        let kf = k as f64;
        term *= x / kf;
        let add = term / kf;
        // Neumaier summation keeps the alternating tail honest near |x| = 6.
        let t = sum + add;
        if sum.abs() >= add.abs() {
            comp += (sum - t) + add;
        } else {
            comp += (add - t) + sum;
        }
        sum = t;
        if add.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    EULER + x.abs().ln() + (sum + comp)
}

const CF_MAX_ITER: usize = 10_000;

/// Modified Lentz evaluation of e^x E1(x).
pub(crate) fn e1_scaled_cf(x: f64, max_iter: usize) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=max_iter {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Natural log of Gamma(a) for a > 0 (Lanczos, g = 7).
pub fn ln_gamma(a: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if a < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * a).sin()).ln() - ln_gamma(1.0 - a);
    }
    let a = a - 1.0;
    let mut s = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        s += c / (a + i as f64);
    }
    let t = a + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (a + 0.5) * t.ln() - t + s.ln()
}

/// Lower incomplete gamma Υ(a, t) = ∫_0^t x^(a-1) e^(-x) dx.
pub fn lower_incomplete_gamma(a: f64, t: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid("a", format!("must be positive, got {a}")));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t", format!("must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let gamma_a = ln_gamma(a).exp();
    if t.is_infinite() {
        return Ok(gamma_a);
    }
    let log_prefactor = a * t.ln() - t;
    if t < a + 1.0 {
        // t^a e^-t Σ t^n / (a (a+1) ... (a+n))
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..1000 {
            ap += 1.0;
            del *= t / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        Ok(sum * log_prefactor.exp())
    } else {
        // Γ(a) minus the upper tail, tail by Lentz.
        const TINY: f64 = 1e-300;
        let mut b = t + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(gamma_a - h * log_prefactor.exp())
    }
}

/// Coefficients of x³ − 𝒜x − ℬ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs {
    pub a_coef: f64,
    pub b_coef: f64,
}

impl CubicCoeffs {
    pub fn new(a_coef: f64, b_coef: f64) -> Result<Self> {
        if !(a_coef > 0.0) || !a_coef.is_finite() {
            return Err(Error::invalid("a_coef", format!("must be positive, got {a_coef}")));
        }
        if !(b_coef > 0.0) || !b_coef.is_finite() {
            return Err(Error::invalid("b_coef", format!("must be positive, got {b_coef}")));
        }
        Ok(Self { a_coef, b_coef })
    }

    pub fn eval(&self, x: f64) -> f64 {
        x * (x * x - self.a_coef) - self.b_coef
    }
}

/// The unique positive root, which always exceeds sqrt(𝒜).
pub fn cubic_positive_root(c: CubicCoeffs) -> Result<f64> {
    let c = CubicCoeffs::new(c.a_coef, c.b_coef)?;
    let (a, b) = (c.a_coef, c.b_coef);
    let p3 = a / 3.0;
    let disc = (0.5 * b).powi(2) - p3.powi(3);
    let mut x = if disc < 0.0 {
        // three real roots; the k = 0 trigonometric root is the largest
        let arg = (1.5 * b / a * (3.0 / a).sqrt()).clamp(-1.0, 1.0);
        2.0 * p3.sqrt() * (arg.acos() / 3.0).cos()
    } else {
        let u = (0.5 * b + disc.sqrt()).cbrt();
        u + p3 / u
    };
    let floor = a.sqrt();
    if !(x > floor) {
        x = floor * (1.0 + f64::EPSILON) + b.cbrt();
    }
    for _ in 0..8 {
        let f = c.eval(x);
        let df = 3.0 * x * x - a;
        if df <= 0.0 {
            break;
        }
        let next = x - f / df;
        if !(next > floor) || (next - x).abs() <= 4.0 * f64::EPSILON * x {
            if next > floor && c.eval(next).abs() < f.abs() {
                x = next;
            }
            break;
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    // mpmath, 30 digits: ei(x)
    const EI_TABLE: [(f64, f64); 12] = [
        (-1e-4, -8.633_224_704_574_705_382_1),
        (-0.01, -4.037_929_576_538_113_811_2),
        (-0.5, -0.559_773_594_776_160_811_75),
        (-1.0, -0.219_383_934_395_520_273_68),
        (-2.0, -0.048_900_510_708_061_119_567),
        (-5.0, -0.001_148_295_591_275_325_797_3),
        (-6.0, -0.000_360_082_452_162_658_659_3),
        (-6.5, -0.000_203_429_866_839_398_197_37),
        (-10.0, -4.156_968_929_685_324_277_4e-6),
        (-20.0, -9.835_525_290_649_881_690_4e-11),
        (-30.0, -3.021_552_010_688_812_544_8e-15),
        (-50.0, -3.783_264_029_550_459_018_3e-24),
    ];

    // mpmath: exp(x) * e1(x)
    const SCALED_TABLE: [(f64, f64); 12] = [
        (1e-4, 8.634_088_070_212_725_282_3),
        (0.01, 4.078_511_443_456_425_826_6),
        (0.5, 0.922_910_632_483_730_468_83),
        (1.0, 0.596_347_362_323_194_074_34),
        (2.0, 0.361_328_616_888_222_584_7),
        (5.0, 0.170_422_176_284_732_201_81),
        (6.0, 0.145_267_629_233_886_893_81),
        (6.5, 0.135_309_673_839_554_389_08),
        (10.0, 0.091_563_333_939_788_081_876),
        (20.0, 0.047_718_545_495_960_841_699),
        (30.0, 0.032_289_738_758_980_125_216),
        (50.0, 0.019_615_109_930_114_870_365),
    ];

    #[test]
    fn ei_reference_values() {
        for (x, want) in EI_TABLE {
            let got = exp_integral_ei(x).unwrap();
            assert!((got - want).abs() <= 1e-12, "Ei({x}) = {got}, want {want}");
            assert!(got < 0.0);
        }
        assert!(exp_integral_ei(-50.0).unwrap().abs() < 1e-20);
    }

    #[test]
    fn scaled_e1_reference_values() {
        for (x, want) in SCALED_TABLE {
            let got = scaled_e1(x).unwrap();
            assert!(((got - want) / want).abs() <= 1e-12, "e^x E1({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn ei_rejects_non_negative() {
        assert!(exp_integral_ei(0.0).is_err());
        assert!(exp_integral_ei(1.0).is_err());
        assert!(exp_integral_ei(f64::NAN).is_err());
        assert!(scaled_e1(0.0).is_err());
    }

    #[test]
    fn ei_series_and_cf_agree() {
        // Each representation is checked where it converges: the fraction
        // needs O(1/x) terms near 0, the alternating series cancels past ~12.
        let mut x = 1e-4f64;
        while x <= 50.0 {
            let public = exp_integral_ei(-x).unwrap();
            if x <= 12.0 {
                let s = ei_series(-x);
                assert!((s - public).abs() <= 1e-11, "x = {x}: series {s}, public {public}");
            }
            if x >= 0.05 {
                let cf = -e1_scaled_cf(x, 2_000_000) * (-x).exp();
                assert!((cf - public).abs() <= 1e-11, "x = {x}: cf {cf}, public {public}");
            }
            x *= 1.3;
        }
    }

    #[test]
    fn ei_monotone_in_magnitude() {
        let mut prev = exp_integral_ei(-1.0).unwrap();
        for i in 1..200 {
            let x = -1.0 - i as f64 * 0.25;
            let v = exp_integral_ei(x).unwrap();
            assert!(v > prev && v < 0.0);
            prev = v;
        }
    }

    #[test]
    fn euler_constant_checks() {
        assert!((euler_constant() - 0.577215).abs() < 1e-6);
        assert!(((-euler_constant()).exp() - 0.561_459_483_567).abs() < 1e-12);
        // series oracle built on the same constant
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..=200 {
            term *= -1.0 / k as f64;
            sum += term / k as f64;
        }
        assert!((euler_constant() + sum + 0.219_383_934_395_520_27).abs() < 1e-15);
    }

    #[test]
    fn lower_gamma_reference_values() {
        let cases = [
            (2.0, 1.0, 0.264_241_117_657_115_356_81),
            (2.0, 0.5, 0.090_204_010_431_049_864_594),
            (2.0, 10.0, 0.999_500_600_772_612_666_63),
            (0.5, 2.0, 1.691_806_732_945_198_336_5),
            (3.5, 1.2, 0.217_888_595_209_944_497_28),
            (1.0, 3.0, 0.950_212_931_632_136_057_02),
        ];
        for (a, t, want) in cases {
            let got = lower_incomplete_gamma(a, t).unwrap();
            assert!((got - want).abs() <= 1e-12, "Υ({a},{t}) = {got}, want {want}");
        }
        assert_eq!(lower_incomplete_gamma(2.0, 0.0).unwrap(), 0.0);
        assert!((lower_incomplete_gamma(2.0, 1e3).unwrap() - 1.0).abs() < 1e-15);
        assert!(lower_incomplete_gamma(0.0, 1.0).is_err());
        assert!(lower_incomplete_gamma(2.0, -1.0).is_err());
    }

    #[test]
    fn lower_gamma_two_matches_closed_form() {
        for i in 0..=500 {
            let t = i as f64 * 0.1;
            let closed = 1.0 - (1.0 + t) * (-t).exp();
            let got = lower_incomplete_gamma(2.0, t).unwrap();
            assert!((got - closed).abs() <= 1e-12, "t = {t}");
        }
    }

    #[test]
    fn lower_gamma_small_argument_keeps_precision() {
        let t = 7.7e-6;
        let got = lower_incomplete_gamma(2.0, t).unwrap();
        let series = t * t / 2.0 - t * t * t / 3.0;
        assert!(((got - series) / series).abs() < 1e-9);
    }

    #[test]
    fn cubic_examples() {
        let r = cubic_positive_root(CubicCoeffs::new(3.0, 2.0).unwrap()).unwrap();
        assert!((r - 2.0).abs() < 1e-14);
        let r = cubic_positive_root(CubicCoeffs::new(1.0, 1e-6).unwrap()).unwrap();
        assert!((r - 1.000_000_499_999_625).abs() < 1e-14);
        // slightly above 10^(1/3) since the 𝒜x term still contributes
        let r = cubic_positive_root(CubicCoeffs::new(0.01, 10.0).unwrap()).unwrap();
        assert!((r - 2.155_981_886_043_966).abs() < 1e-13);
        assert!(CubicCoeffs::new(0.0, 1.0).is_err());
        assert!(CubicCoeffs::new(1.0, -1.0).is_err());
    }

    fn bisect_root(c: CubicCoeffs) -> f64 {
        let mut lo = c.a_coef.sqrt();
        let mut hi = lo + c.b_coef.cbrt() + 1.0;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if c.eval(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cubic_matches_bisection_on_random_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (mut trig, mut cardano) = (0, 0);
        for _ in 0..10_000 {
            let a = 10f64.powf(rng.gen_range(-8.0..3.0));
            let b = 10f64.powf(rng.gen_range(-8.0..3.0));
            let c = CubicCoeffs::new(a, b).unwrap();
            if (0.5 * b).powi(2) < (a / 3.0).powi(3) {
                trig += 1;
            } else {
                cardano += 1;
            }
            let r = cubic_positive_root(c).unwrap();
            let oracle = bisect_root(c);
            assert!(((r - oracle) / oracle).abs() <= 1e-9, "a={a} b={b}: {r} vs {oracle}");
            assert!(r > a.sqrt());
            assert!(c.eval(r).abs() <= 1e-10 * r.powi(3).max(1.0));
        }
        assert!(trig > 1000 && cardano > 1000, "{trig} / {cardano}");
    }

    proptest! {
        #[test]
        fn cubic_residual_small(la in -8.0f64..3.0, lb in -8.0f64..3.0) {
            let c = CubicCoeffs::new(10f64.powf(la), 10f64.powf(lb)).unwrap();
            let r = cubic_positive_root(c).unwrap();
            prop_assert!(c.eval(r).abs() <= 1e-10 * r.powi(3).max(1.0));
        }

        #[test]
        fn ln_gamma_recurrence(a in 0.1f64..50.0) {
            // Γ(a+1) = a Γ(a)
            let lhs = ln_gamma(a + 1.0);
            let rhs = a.ln() + ln_gamma(a);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
