//! Log-gamma and digamma kernels.
//!
//! Every Γ-ratio elsewhere in the crate is formed as a difference of
//! [`ln_gamma`] / [`ln_gamma_complex`] values; Γ itself overflows at
//! arguments as small as 172.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex number used for moment orders and log-moments.
pub type ComplexValue = Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// ζ(k) − 1 for k = 2, 3, …, 41.
#[allow(clippy::excessive_precision)]
const ZETA_MINUS_ONE: [f64; 40] = [
    0.644_934_066_848_226_44,
    0.202_056_903_159_594_29,
    0.082_323_233_711_138_192,
    0.036_927_755_143_369_926,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_826_8,
    0.004_077_356_197_944_339_4,
    0.002_008_392_826_082_214_4,
    0.000_994_575_127_818_085_34,
    0.000_494_188_604_119_464_56,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_15,
    6.124_813_505_870_482_9e-5,
    3.058_823_630_702_049_4e-5,
    1.528_225_940_865_187_2e-5,
    7.637_197_637_899_762_3e-6,
    3.817_293_264_999_839_9e-6,
    1.908_212_716_553_938_9e-6,
    9.539_620_338_727_961_1e-7,
    4.769_329_867_878_064_6e-7,
    2.384_505_027_277_329_9e-7,
    1.192_199_259_653_110_7e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504_1e-8,
    7.450_711_789_835_429_5e-9,
    3.725_334_024_788_457_1e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_681_8e-10,
    4.656_629_065_033_784_1e-10,
    2.328_311_833_676_505_5e-10,
    1.164_155_017_270_052e-10,
    5.820_772_087_902_700_9e-11,
    2.910_385_044_497_099_7e-11,
    1.455_192_189_104_198_4e-11,
    7.275_959_835_057_481e-12,
    3.637_979_547_378_651_2e-12,
    1.818_989_650_307_065_9e-12,
    9.094_947_840_263_889_3e-13,
    4.547_473_783_042_154e-13,
];

/// B_{2k} / (2k (2k − 1)) for k = 1..=8, the Stirling-series coefficients.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// B_{2k} / (2k) for k = 1..=8, used by the digamma asymptotic series.
const DIGAMMA_ASYMP: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

const STIRLING_MIN_REAL: f64 = 13.0;
const STIRLING_MIN_MODULUS: f64 = 15.0;

/// ln Γ(1 + ε) for |ε| ≤ 1/2, by the ζ-series around 1.
fn ln_gamma_1p_small(eps: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = -eps;
    for (i, zm1) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= -eps;
        sum += zm1 * pow / k;
    }
    -eps.ln_1p() + eps * (1.0 - EULER_GAMMA) + sum
}

fn ln_gamma_1p_small_complex(eps: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = -eps;
    for (i, zm1) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= -eps;
        sum += pow * (zm1 / k);
    }
    -ln_1p_complex(eps) + eps * (1.0 - EULER_GAMMA) + sum
}

/// ln(1 + w) without loss of relative accuracy for small |w|.
pub(crate) fn ln_1p_complex(w: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    Complex64::new(re, im)
}

fn stirling_tail(z_inv: f64) -> f64 {
    let z2 = z_inv * z_inv;
    STIRLING.iter().rev().fold(0.0, |acc, c| acc * z2 + c) * z_inv
}

/// Natural logarithm of Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_1p_small(x) - x.ln()
    } else if x <= 1.5 {
        ln_gamma_1p_small(x - 1.0)
    } else if x <= 2.5 {
        let d = x - 2.0;
        ln_gamma_1p_small(d) + d.ln_1p()
    } else if x < STIRLING_MIN_REAL {
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        ln_gamma_1p_small(y - 2.0) + (y - 2.0).ln_1p() + prod.ln()
    } else {
        (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_tail(1.0 / x)
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Principal branch of ln Γ(z) for complex z.
///
/// The imaginary part is the continuous one obtained from the real axis
/// (not reduced to (−π, π]), so `exp` of the result is Γ(z) and
/// ln Γ(z̄) is the conjugate of ln Γ(z).
pub fn ln_gamma_complex(z: ComplexValue) -> Result<ComplexValue> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain(format!("ln_gamma_complex of non-finite {z}")));
    }
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(Error::pole(z.re, "Γ has a pole at non-positive integers"));
    }
    Ok(ln_gamma_c(z))
}

/// ln Γ without argument checks; callers guarantee z is not a pole.
pub(crate) fn ln_gamma_c(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re > 0.0 {
        return Complex64::new(ln_gamma_pos(z.re), 0.0);
    }
    if z.im < 0.0 {
        return ln_gamma_c(z.conj()).conj();
    }
    if z.re < 0.5 {
        // Γ(z) Γ(1 − z) = π / sin(πz)
        let w = Complex64::new(1.0 - z.re, -z.im);
        return Complex64::new(LN_PI, 0.0) - ln_sin_pi_upper(z) - ln_gamma_c(w.conj()).conj();
    }
    let d1 = z - 1.0;
    if d1.norm_sqr() <= 0.25 {
        return ln_gamma_1p_small_complex(d1);
    }
    let d2 = z - 2.0;
    if d2.norm_sqr() <= 0.25 {
        return ln_gamma_1p_small_complex(d2) + ln_1p_complex(d2);
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < STIRLING_MIN_MODULUS {
        shift += w.ln();
        w += 1.0;
    }
    stirling_complex(w) - shift
}

fn stirling_complex(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let tail = STIRLING
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * inv2 + c)
        * inv;
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + tail
}

/// ln sin(πz) for Im z ≥ 0, continued analytically from the interval (0, 1).
fn ln_sin_pi_upper(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let w = (2.0 * PI * i * z).exp();
    -i * PI * z + ln_1p_complex(-w) + Complex64::new(-LN_2, 0.5 * PI)
}

/// sin(πx) with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

/// ln|Γ(x)| and the sign of Γ(x) for any real x that is not a pole.
pub(crate) fn ln_abs_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x > 0.0 {
        return Ok((ln_gamma_pos(x), 1.0));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::pole(x, "Γ has a pole at non-positive integers"));
    }
    let s = sin_pi(x);
    let ln_abs = LN_PI - s.abs().ln() - ln_gamma_pos(1.0 - x);
    let sign = if (-x).floor() as i64 % 2 == 0 { -1.0 } else { 1.0 };
    Ok((ln_abs, sign))
}

fn digamma_asymptotic(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    let tail = DIGAMMA_ASYMP.iter().rev().fold(0.0, |acc, c| acc * inv2 + c) * inv2;
    x.ln() - 0.5 / x - tail
}

const EXACT_DIGAMMA_LIMIT: f64 = 10_000.0;

/// Digamma ψ(x) for real x > 0.
///
/// Integers and half-integers up to 10⁴ use the exact harmonic sums
/// ψ(n) = −γ + Σ_{k<n} 1/k and ψ(m + ½) = −γ − 2 ln 2 + Σ_{k≤m} 2/(2k − 1).
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("digamma needs x > 0, got {x}")));
    }
    Ok(digamma_pos(x))
}

pub(crate) fn digamma_pos(x: f64) -> f64 {
    if x <= EXACT_DIGAMMA_LIMIT && x == x.round() {
        let n = x as u64;
        let h = neumaier_sum((1..n).map(|k| 1.0 / k as f64));
        return h - EULER_GAMMA;
    }
    let twice = 2.0 * x;
    if x <= EXACT_DIGAMMA_LIMIT && twice == twice.round() {
        let m = (x - 0.5) as u64;
        let h = neumaier_sum((1..=m).map(|k| 2.0 / (2 * k - 1) as f64));
        return h - EULER_GAMMA - 2.0 * LN_2;
    }
    let mut y = x;
    let mut shift = 0.0;
    while y < 10.0 {
        shift += 1.0 / y;
        y += 1.0;
    }
    digamma_asymptotic(y) - shift
}

/// ψ(x) for any real x that is not a pole, via ψ(1 − x) − ψ(x) = π cot(πx).
pub(crate) fn digamma_any(x: f64) -> Result<f64> {
    if x > 0.0 {
        return Ok(digamma_pos(x));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::pole(x, "ψ has a pole at non-positive integers"));
    }
    let r = x.rem_euclid(1.0);
    let cot = (PI * r).cos() / (PI * r).sin();
    Ok(digamma_pos(1.0 - x) - PI * cot)
}

/// c·ψ(x), with the convention 0·ψ(0) = lim_{ε→0} ε ψ(ε) = −1.
pub fn weighted_digamma(c: f64, x: f64) -> Result<f64> {
    weighted_digamma_with(c, x, digamma_pos)
}

/// [`weighted_digamma`] with a caller-supplied ψ, used to probe how
/// coefficient formulas respond to ψ → ψ + const.
pub(crate) fn weighted_digamma_with(c: f64, x: f64, psi: impl Fn(f64) -> f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() || !c.is_finite() {
        return Err(Error::domain(format!("weighted_digamma needs x ≥ 0, got x = {x}")));
    }
    if x == 0.0 {
        return if c == 0.0 {
            Ok(-1.0)
        } else {
            Err(Error::domain(format!("c·ψ(0) diverges for c = {c}")))
        };
    }
    Ok(c * psi(x))
}

/// Neumaier-compensated sum.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated accumulator for complex sums of log-gamma terms.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct ComplexAccumulator {
    re: (f64, f64),
    im: (f64, f64),
}

impl ComplexAccumulator {
    fn add_part(part: &mut (f64, f64), v: f64) {
        let (sum, comp) = *part;
        let t = sum + v;
        let c = if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        *part = (t, comp + c);
    }

    pub fn add(&mut self, z: Complex64) {
        Self::add_part(&mut self.re, z.re);
        Self::add_part(&mut self.im, z.im);
    }

    pub fn sub(&mut self, z: Complex64) {
        self.add(-z);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from a 40-digit arbitrary-precision evaluation at the
    // exact binary value of each argument.
    #[test]
    fn ln_gamma_reference_values() {
        let cases = [
            (1.0, 0.0),
            (4.0, 6.0f64.ln()),
            (0.5, 0.572_364_942_924_700_087_07),
            (0.001, 6.907_178_885_383_853_661_7),
            (1.0001, -0.000_057_713_342_220_471_268_005),
            (1.9, -0.038_984_275_923_083_361_674),
            (2.5, 0.284_682_870_472_919_159_63),
            (7.3, 7.147_892_523_022_248_692_1),
            (100.3, 360.514_705_729_058_118_15),
            (1.0e6, 12_815_504.569_147_611_66),
        ];
        for (x, want) in cases {
            let got = ln_gamma(x).unwrap();
            if want == 0.0 {
                assert_eq!(got, 0.0);
            } else {
                assert!(rel(got, want) < 1e-13, "x = {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn ln_gamma_rejects_nonpositive() {
        assert!(matches!(ln_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(ln_gamma(-2.5), Err(Error::Domain(_))));
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn ln_gamma_complex_reference_values() {
        let cases = [
            ((0.5, 14.13), (-21.276_413_564_407_217_716, 23.293_431_450_919_401_655)),
            ((-3.7, 2.2), (-7.259_769_349_970_579_743_2, -9.940_188_451_078_549_981_9)),
            ((2.0, -30.0), (-41.102_599_951_006_979_19, -74.356_017_063_487_634_994)),
            ((1e3, 1e3), (5_466.222_521_629_902_376_1, 7_039.334_291_911_193_32)),
            ((0.9, 0.1), (0.056_803_804_543_858_719_472, -0.074_962_513_438_213_721_09)),
            ((-0.5, 1e-3), (1.265_507_656_091_603_814_9, -3.141_556_163_477_681_916_9)),
            ((-20.3, 45.0), (-149.642_603_581_806_074_07, 88.978_924_417_117_476_787)),
            ((3.0, 0.5), (0.644_085_767_938_488_244_26, 0.464_567_973_222_242_507_73)),
            ((1e5, -2e5), (910_329.458_676_399_037_84, -2_374_243.202_442_172_541_4)),
        ];
        for ((re, im), (wr, wi)) in cases {
            let got = ln_gamma_complex(Complex64::new(re, im)).unwrap();
            let want = Complex64::new(wr, wi);
            let err = (got - want).norm() / want.norm();
            assert!(err < 1e-12, "z = ({re}, {im}): {got} vs {want}");
        }
        let one = ln_gamma_complex(Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(one, Complex64::new(0.0, 0.0));
        let g = ln_gamma_complex(Complex64::new(0.5, 14.13)).unwrap().exp().norm();
        assert!(rel(g, 5.751_365_848_858_340_117e-10) < 1e-11);
    }

    #[test]
    fn ln_gamma_complex_poles() {
        for p in [0.0, -1.0, -7.0] {
            assert!(matches!(
                ln_gamma_complex(Complex64::new(p, 0.0)),
                Err(Error::Pole { .. })
            ));
        }
    }

    #[test]
    fn digamma_reference_values() {
        assert!(rel(digamma(1.0).unwrap(), -EULER_GAMMA) < 1e-15);
        assert!(rel(digamma(3.0).unwrap(), 1.5 - EULER_GAMMA) < 1e-15);
        let cases = [
            (0.5, -1.963_510_026_021_423_479_4),
            (1.4616, -0.000_031_106_251_230_341_649_658),
            (0.1, -10.423_754_940_411_076_232),
            (100.5, 4.605_174_352_581_845_211_9),
            (7.25, 1.910_453_526_883_736_028_4),
            (1e-3, -1_000.575_571_931_810_279_7),
            (30.0, 3.384_438_132_685_524_876_6),
        ];
        for (x, want) in cases {
            let got = digamma(x).unwrap();
            let tol = if x == 1.4616 { 1e-9 } else { 1e-13 };
            assert!(rel(got, want) < tol, "ψ({x}) = {got}, want {want}");
        }
        assert!(digamma(0.0).is_err());
    }

    #[test]
    fn digamma_negative_arguments_by_reflection() {
        // ψ(−½) = ψ(½) + 2
        let v = digamma_any(-0.5).unwrap();
        assert!((v - (digamma(0.5).unwrap() + 2.0)).abs() < 1e-13);
        assert!(digamma_any(-3.0).is_err());
    }

    #[test]
    fn weighted_digamma_convention() {
        assert_eq!(weighted_digamma(0.0, 0.0).unwrap(), -1.0);
        assert!((weighted_digamma(2.0, 1.0).unwrap() + 2.0 * EULER_GAMMA).abs() < 1e-15);
        assert!((weighted_digamma(1.0, 2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-15);
        assert!(matches!(weighted_digamma(1.0, 0.0), Err(Error::Domain(_))));
        assert!(weighted_digamma(1.0, -1.0).is_err());
    }

    #[test]
    fn signed_gamma_on_negative_axis() {
        let (l, s) = ln_abs_gamma_signed(-0.5).unwrap();
        assert_eq!(s, -1.0);
        assert!(rel(l.exp(), 2.0 * PI.sqrt()) < 1e-14);
        let (l, s) = ln_abs_gamma_signed(-1.5).unwrap();
        assert_eq!(s, 1.0);
        assert!(rel(l.exp(), 4.0 * PI.sqrt() / 3.0) < 1e-14);
    }

    #[test]
    fn duplication_identity() {
        // ln Γ(n/2) + ln Γ((n+1)/2) = ln √π + ln Γ(n) − (n − 1) ln 2
        for n in 1..=60 {
            let n = n as f64;
            let lhs = ln_gamma(n / 2.0).unwrap() + ln_gamma((n + 1.0) / 2.0).unwrap();
            let rhs = 0.5 * LN_PI + ln_gamma(n).unwrap() - (n - 1.0) * LN_2;
            assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs().max(1.0), "n = {n}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn ln_gamma_recurrence(x in 1e-6f64..100.0) {
            let lhs = ln_gamma(x + 1.0).unwrap() - ln_gamma(x).unwrap();
            let rhs = x.ln();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn digamma_recurrence(x in 1e-3f64..100.0) {
            let d = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            prop_assert!((d - 1.0 / x).abs() <= 1e-12 * (1.0 / x).max(1.0));
        }
    }

    proptest! {
        #[test]
        fn ln_gamma_complex_schwarz_reflection(re in -50.0f64..50.0, im in -200.0f64..200.0) {
            prop_assume!(im != 0.0);
            let z = Complex64::new(re, im);
            let a = ln_gamma_complex(z).unwrap();
            let b = ln_gamma_complex(z.conj()).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        }

        #[test]
        fn ln_gamma_complex_recurrence(re in -30.0f64..60.0, im in 0.01f64..300.0) {
            let z = Complex64::new(re, im);
            let lhs = ln_gamma_complex(z + 1.0).unwrap() - ln_gamma_complex(z).unwrap();
            let rhs = z.ln();
            // the continuous branch of ln Γ satisfies the recurrence exactly
            prop_assert!((lhs - rhs).norm() <= 1e-11 * ln_gamma_complex(z).unwrap().norm().max(1.0));
        }

        #[test]
        fn ln_gamma_complex_agrees_with_real(x in 1e-3f64..1e4) {
            let c = ln_gamma_complex(Complex64::new(x, 1e-300)).unwrap();
            let r = ln_gamma(x).unwrap();
            prop_assert!((c.re - r).abs() <= 1e-13 * r.abs().max(1e-3));
        }
    }
}
