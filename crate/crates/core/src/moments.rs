//! Exact moment functions of the determinant D and of the G-concurrence.
//!
//! Every moment is a ratio of Γ-products, evaluated in the log domain at
//! real or complex order M. The same [`GammaProduct`] description drives
//! the contour inversion and the residue expansions, so the analytic
//! continuation used there is the formula evaluated here.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::specfun::{ln_gamma_c, ln_gamma_pos, ComplexAccumulator, ComplexValue};

/// Log-domain value of a moment ⟨X^M⟩ at (possibly complex) order M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    pub log_value: ComplexValue,
    pub order: ComplexValue,
}

impl MomentValue {
    pub fn value(&self) -> ComplexValue {
        self.log_value.exp()
    }

    /// The moment as a real number; only meaningful at real order.
    pub fn real(&self) -> f64 {
        self.value().re
    }
}

/// One factor Γ(scale·M + offset)^power of a moment Γ-product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GammaFactor {
    pub scale: f64,
    pub offset: f64,
    pub power: i32,
}

impl GammaFactor {
    fn new(scale: f64, offset: f64, power: i32) -> Self {
        Self {
            scale,
            offset,
            power,
        }
    }

    pub fn argument(&self, m: f64) -> f64 {
        self.scale * m + self.offset
    }

    /// B₂(b)/(2a) with b the offset; summed with signs this is the 1/M Stirling correction.
    pub fn stirling_correction(&self) -> f64 {
        let b = self.offset;
        self.power as f64 * (b * b - b + 1.0 / 6.0) / (2.0 * self.scale)
    }
}

/// exp(ln_const + M·ln_base) · Π Γ(scale·M + offset)^power
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GammaProduct {
    pub ln_const: f64,
    pub ln_base: f64,
    pub factors: Vec<GammaFactor>,
}

impl GammaProduct {
    /// ⟨D^M⟩ under the Hilbert–Schmidt measure.
    pub fn det_hs(n: usize, beta: Beta) -> Self {
        let nf = n as f64;
        let top = hs_top(n, beta);
        let mut factors = vec![GammaFactor::new(nf, top, -1)];
        let mut ln_const = ln_gamma_pos(top);
        for j in 1..=n {
            let off = hs_offset(j, beta);
            factors.push(GammaFactor::new(1.0, off, 1));
            ln_const -= ln_gamma_pos(off);
        }
        Self {
            ln_const,
            ln_base: 0.0,
            factors,
        }
    }

    /// ⟨G^M⟩ under the Hilbert–Schmidt measure.
    pub fn g_hs(n: usize, beta: Beta) -> Self {
        let nf = n as f64;
        let top = hs_top(n, beta);
        let mut factors = vec![GammaFactor::new(1.0, top, -1)];
        let mut ln_const = ln_gamma_pos(top);
        for j in 1..=n {
            let off = hs_offset(j, beta);
            factors.push(GammaFactor::new(1.0 / nf, off, 1));
            ln_const -= ln_gamma_pos(off);
        }
        Self {
            ln_const,
            ln_base: nf.ln(),
            factors,
        }
    }

    /// ⟨G^M⟩ for an N×K bipartite system (induced measure).
    pub fn g_induced(n: usize, k: usize, beta: Beta) -> Self {
        let nf = n as f64;
        let half = induced_half(beta);
        let top = (n * k) as f64 * half;
        let mut factors = vec![GammaFactor::new(1.0, top, -1)];
        let mut ln_const = ln_gamma_pos(top);
        for j in 1..=n {
            let off = (k - n + j) as f64 * half;
            factors.push(GammaFactor::new(1.0 / nf, off, 1));
            ln_const -= ln_gamma_pos(off);
        }
        Self {
            ln_const,
            ln_base: nf.ln(),
            factors,
        }
    }

    /// ⟨D^M⟩ for an N×K bipartite system, i.e. ⟨G^{NM}⟩ / N^{NM}.
    pub fn det_induced(n: usize, k: usize, beta: Beta) -> Self {
        let nf = n as f64;
        let half = induced_half(beta);
        let top = (n * k) as f64 * half;
        let mut factors = vec![GammaFactor::new(nf, top, -1)];
        let mut ln_const = ln_gamma_pos(top);
        for j in 1..=n {
            let off = (k - n + j) as f64 * half;
            factors.push(GammaFactor::new(1.0, off, 1));
            ln_const -= ln_gamma_pos(off);
        }
        Self {
            ln_const,
            ln_base: 0.0,
            factors,
        }
    }

    /// Coefficient c1 of the 1/M correction to the log of the large-|M| form.
    pub fn stirling_c1(&self) -> f64 {
        self.factors.iter().map(GammaFactor::stirling_correction).sum()
    }

    /// Rightmost pole of the product on the real M axis.
    pub fn first_pole(&self) -> f64 {
        self.factors
            .iter()
            .filter(|f| f.power > 0)
            .map(|f| -f.offset / f.scale)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Analytic continuation of the log-moment; no domain check.
    ///
    /// Denominator factors sitting on a pole of Γ make the moment vanish,
    /// which is reported as a real part of −∞.
    pub fn ln_eval(&self, m: Complex64) -> Complex64 {
        let mut acc = ComplexAccumulator::default();
        acc.add(Complex64::new(self.ln_const, 0.0));
        acc.add(m * self.ln_base);
        for f in &self.factors {
            let z = m * f.scale + f.offset;
            if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
                if f.power < 0 {
                    return Complex64::new(f64::NEG_INFINITY, 0.0);
                }
                return Complex64::new(f64::INFINITY, 0.0);
            }
            acc.add(ln_gamma_c(z) * f.power as f64);
        }
        acc.value()
    }

    fn moment(&self, m: ComplexValue, what: &str) -> Result<MomentValue> {
        if !m.re.is_finite() || !m.im.is_finite() {
            return Err(Error::domain(format!("moment order must be finite, got {m}")));
        }
        let pole = self.first_pole();
        if m.re <= pole {
            return Err(Error::pole(
                pole,
                format!("{what} requires Re M > {pole}, got M = {m}"),
            ));
        }
        Ok(MomentValue {
            log_value: self.ln_eval(m),
            order: m,
        })
    }
}

fn hs_top(n: usize, beta: Beta) -> f64 {
    let n2 = (n * n) as f64;
    match beta {
        Beta::Complex => n2,
        Beta::Real => 0.5 * (n2 + n as f64),
    }
}

fn hs_offset(j: usize, beta: Beta) -> f64 {
    match beta {
        Beta::Complex => j as f64,
        Beta::Real => 0.5 * (j + 1) as f64,
    }
}

fn induced_half(beta: Beta) -> f64 {
    match beta {
        Beta::Complex => 1.0,
        Beta::Real => 0.5,
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("principal dimension must be ≥ 2, got {n}")));
    }
    Ok(())
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    check_n(n)?;
    if k < n {
        return Err(Error::domain(format!("ancilla dimension {k} must be ≥ n = {n}")));
    }
    Ok(())
}

/// ⟨D^M⟩ for Hilbert–Schmidt distributed N×N density matrices.
pub fn det_moment_hs(n: usize, beta: Beta, m: ComplexValue) -> Result<MomentValue> {
    check_n(n)?;
    GammaProduct::det_hs(n, beta).moment(m, "⟨D^M⟩")
}

/// ⟨G^M⟩ for Hilbert–Schmidt distributed N×N density matrices.
pub fn g_moment_hs(n: usize, beta: Beta, m: ComplexValue) -> Result<MomentValue> {
    check_n(n)?;
    GammaProduct::g_hs(n, beta).moment(m, "⟨G^M⟩")
}

/// ⟨G^M⟩ for reduced states of random pure states on an N×K system.
///
/// The first pole sits at M = −N(K−N+1) for complex states and at
/// M = −N(K−N+1)/2 for real ones.
pub fn g_moment_induced(n: usize, k: usize, beta: Beta, m: ComplexValue) -> Result<MomentValue> {
    check_nk(n, k)?;
    GammaProduct::g_induced(n, k, beta).moment(m, "⟨G^M⟩ (induced)")
}

/// ⟨D^M⟩ for reduced states of random pure states on an N×K system.
pub fn det_moment_induced(n: usize, k: usize, beta: Beta, m: ComplexValue) -> Result<MomentValue> {
    check_nk(n, k)?;
    GammaProduct::det_induced(n, k, beta).moment(m, "⟨D^M⟩ (induced)")
}

/// ln C_N^{(α,β)}, the normalisation of the α-parameterised eigenvalue density.
///
/// Moments follow as ratios: ⟨D^M⟩ = C(1)/C(1+M) and ⟨G^M⟩ = N^M C(1)/C(1+M/N).
pub fn ln_alpha_normalisation(n: usize, beta: Beta, alpha: ComplexValue) -> Complex64 {
    let nf = n as f64;
    let b = beta.as_f64();
    let mut acc = ComplexAccumulator::default();
    acc.add(ln_gamma_c(alpha * nf + b * nf * (nf - 1.0) / 2.0));
    let ln_g1 = ln_gamma_pos(1.0 + b / 2.0);
    for j in 1..=n {
        let jf = j as f64;
        acc.sub(Complex64::new(ln_gamma_pos(1.0 + jf * b / 2.0) - ln_g1, 0.0));
        acc.sub(ln_gamma_c(alpha + (jf - 1.0) * b / 2.0));
    }
    acc.value()
}

/// Exponent of 1/M in the large-|M| behaviour of ⟨D^M⟩.
pub fn stirling_exponent(n: usize, beta: Beta) -> f64 {
    let n2 = (n * n) as f64;
    match beta {
        Beta::Complex => (n2 - 1.0) / 2.0,
        Beta::Real => (n2 + n as f64 - 2.0) / 4.0,
    }
}

/// ln A_N, the prefactor of the large-|M| form of ⟨D^M⟩.
pub fn ln_stirling_prefactor(n: usize, beta: Beta) -> f64 {
    let nf = n as f64;
    let n2 = nf * nf;
    let head = 0.5 * (nf - 1.0) * (2.0 * PI).ln();
    match beta {
        Beta::Complex => {
            let prod: f64 = (1..=n).map(|j| ln_gamma_pos(j as f64)).sum();
            head + ln_gamma_pos(n2) - (n2 - 0.5) * nf.ln() - prod
        }
        Beta::Real => {
            let prod: f64 = (1..=n).map(|j| ln_gamma_pos(0.5 * (j + 1) as f64)).sum();
            head + ln_gamma_pos(0.5 * (n2 + nf)) - 0.5 * (n2 + nf - 1.0) * nf.ln() - prod
        }
    }
}

/// Large-|M| approximation A_N e^{−MN ln N} / M^p of ⟨D^M⟩ (principal power).
pub fn det_moment_stirling(n: usize, beta: Beta, m: ComplexValue) -> Result<MomentValue> {
    check_n(n)?;
    if m.norm() == 0.0 {
        return Err(Error::pole(0.0, "the Stirling form is singular at M = 0"));
    }
    let nf = n as f64;
    let log_value = Complex64::new(ln_stirling_prefactor(n, beta), 0.0)
        - m * (nf * nf.ln())
        - m.ln() * stirling_exponent(n, beta);
    Ok(MomentValue {
        log_value,
        order: m,
    })
}

/// lim_{N→∞} ⟨G^M⟩ = e^{−M}, the moments of a point mass at 1/e.
pub fn limit_moment(m: f64) -> f64 {
    (-m).exp()
}

/// Concentration point X_q = (1/e)(q/(q−1))^{q−1} of G when K/N → q > 1.
pub fn concentration_point(q: f64) -> Result<f64> {
    if !(q > 1.0) || q.is_nan() {
        return Err(Error::domain(format!(
            "concentration point is defined for q > 1, got {q}"
        )));
    }
    if q.is_infinite() {
        return Ok(1.0);
    }
    let qm1 = q - 1.0;
    // (q−1)·ln(q/(q−1)) = (q−1)·ln(1 + 1/(q−1))
    Ok((-1.0 + qm1 * (1.0 / qm1).ln_1p()).exp())
}

/// The asymptote 1/e of the HS mean G-concurrence.
pub fn limit_mean() -> f64 {
    1.0 / E
}

/// Mean and variance of G from the first two exact moments.
pub fn g_mean_variance_hs(n: usize, beta: Beta) -> Result<(f64, f64)> {
    let m1 = g_moment_hs(n, beta, Complex64::new(1.0, 0.0))?.real();
    let m2 = g_moment_hs(n, beta, Complex64::new(2.0, 0.0))?.real();
    Ok((m1, m2 - m1 * m1))
}

/// Mean and variance of G for an N×K system.
pub fn g_mean_variance_induced(n: usize, k: usize, beta: Beta) -> Result<(f64, f64)> {
    let m1 = g_moment_induced(n, k, beta, Complex64::new(1.0, 0.0))?.real();
    let m2 = g_moment_induced(n, k, beta, Complex64::new(2.0, 0.0))?.real();
    Ok((m1, m2 - m1 * m1))
}
