//! Edge expansions of the determinant density.
//!
//! Right edge: the Hankel-contour form driven by the large-|M| behaviour
//! of the moments. Left edge: residues of D^{−M−1}⟨D^M⟩ at the leftward
//! poles M = −1, −3/2, −2, … Each coefficient has a closed form in Γ and ψ;
//! the same numbers also come out of a generic residue routine working on the
//! Γ-product, which covers the special dimensions where the closed forms
//! degenerate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::moments::{ln_stirling_prefactor, GammaProduct};
use crate::specfun::{
    digamma_any, ln_abs_gamma_signed, ln_gamma_pos, weighted_digamma_with,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Right,
}

/// coeff · D^d_power · (ln D)^log_power
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeTerm {
    pub d_power: f64,
    pub log_power: u32,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeExpansion {
    pub n: usize,
    pub beta: Beta,
    pub edge: Edge,
    pub terms: Vec<EdgeTerm>,
    /// Highest D power that is complete; higher orders were dropped.
    pub complete_through: f64,
    pub truncated: bool,
}

impl EdgeExpansion {
    /// Coefficient of D^d_power (ln D)^log_power, if present.
    pub fn coeff(&self, d_power: f64, log_power: u32) -> Option<f64> {
        self.terms
            .iter()
            .find(|t| t.d_power == d_power && t.log_power == log_power)
            .map(|t| t.coeff)
    }

    /// The expansion keeping only terms up to D^max_power.
    pub fn through_order(&self, max_power: f64) -> EdgeExpansion {
        let mut e = self.clone();
        e.terms.retain(|t| t.d_power <= max_power);
        e.complete_through = e.complete_through.min(max_power);
        e
    }

    /// Largest |D| at which the first omitted order is estimated to stay
    /// below `tol` relative to the leading term.
    ///
    /// The omitted order is taken to scale like the last retained one with
    /// one more half-power of D, which is how both series proceed.
    pub fn validity_limit(&self, tol: f64) -> f64 {
        let lead = self.terms.first().map(|t| t.coeff.abs()).unwrap_or(0.0);
        let mut limit = f64::INFINITY;
        for t in self.terms.iter().filter(|t| t.d_power > 0.0 && t.coeff != 0.0) {
            // |c|·D^p·(1 + |ln D|)^l ≤ tol·lead, solved with |ln D| ≈ 10
            let scale = (lead * tol / (t.coeff.abs() * 11f64.powi(t.log_power as i32)))
                .powf(1.0 / t.d_power);
            limit = limit.min(scale);
        }
        limit
    }
}

/// Σ coeff · d^d_power · (ln d)^log_power
pub fn left_edge_eval(e: &EdgeExpansion, d: f64) -> f64 {
    let ln_d = d.ln();
    e.terms
        .iter()
        .map(|t| {
            let mut v = t.coeff;
            if t.d_power != 0.0 {
                v *= (t.d_power * ln_d).exp();
            }
            v * ln_d.powi(t.log_power as i32)
        })
        .sum()
}

/// Exponent p of the right-edge law P ∝ (−ln D − N ln N)^p / D.
pub fn right_edge_exponent(n: usize, beta: Beta) -> f64 {
    let n2 = (n * n) as f64;
    match beta {
        Beta::Complex => (n2 - 3.0) / 2.0,
        Beta::Real => (n2 + n as f64 - 6.0) / 4.0,
    }
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::domain(format!(
            "edge expansion needs n ≥ {min}, got {n}; n = 2 has the exact closed form"
        )));
    }
    Ok(())
}

/// A_N (−ln d − N ln N)^p / (d Γ(p+1)); zero beyond the support edge N^−N.
pub fn right_edge_density(n: usize, beta: Beta, d: f64) -> Result<f64> {
    check_n(n, 2)?;
    if !(d > 0.0) || d.is_nan() {
        return Err(Error::domain(format!("right edge density needs d > 0, got {d}")));
    }
    let nf = n as f64;
    let y = -d.ln() - nf * nf.ln();
    if y < 0.0 {
        return Ok(0.0);
    }
    let p = right_edge_exponent(n, beta);
    if y == 0.0 {
        return Ok(if p == 0.0 { ln_stirling_prefactor(n, beta).exp() / d } else { 0.0 });
    }
    let ln_v = ln_stirling_prefactor(n, beta) + p * y.ln() - d.ln() - ln_gamma_pos(p + 1.0);
    Ok(ln_v.exp())
}

/// Ã_N (1 − g^N)^p / g with Ã_N = N A_N / Γ(p+1).
pub fn right_edge_density_g(n: usize, beta: Beta, g: f64) -> Result<f64> {
    check_n(n, 2)?;
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::domain(format!("right edge density in G needs 0 < g ≤ 1, got {g}")));
    }
    let p = right_edge_exponent(n, beta);
    let nf = n as f64;
    let w = -(nf * g.ln()).exp_m1();
    if w == 0.0 {
        return Ok(if p == 0.0 { right_edge_prefactor_g(n, beta) } else { 0.0 });
    }
    Ok((right_edge_prefactor_g(n, beta).ln() + p * w.ln() - g.ln()).exp())
}

/// Ã_N = N A_N / Γ(p+1).
pub fn right_edge_prefactor_g(n: usize, beta: Beta) -> f64 {
    let p = right_edge_exponent(n, beta);
    (ln_stirling_prefactor(n, beta) + (n as f64).ln() - ln_gamma_pos(p + 1.0)).exp()
}

/// Right-edge window in y = −ln D − N ln N where the leading form stays
/// within `tol` relative error.
///
/// The first correction to the Hankel integral is c1·y/(p+1), with c1 the
/// 1/M coefficient of the moment's Stirling expansion.
pub fn right_edge_window(n: usize, beta: Beta, tol: f64) -> f64 {
    let c1 = GammaProduct::det_hs(n, beta).stirling_c1();
    let p = right_edge_exponent(n, beta);
    tol * (p + 1.0) / c1.abs()
}

/// ±Γ-ratio accumulated in the log domain; a pole in the denominator makes
/// the whole ratio vanish.
#[derive(Debug, Clone, Copy)]
struct SignedLog {
    ln_abs: f64,
    sign: f64,
}

impl SignedLog {
    fn one() -> Self {
        Self {
            ln_abs: 0.0,
            sign: 1.0,
        }
    }

    fn mul_gamma(mut self, x: f64) -> Self {
        let (l, s) = ln_abs_gamma_signed(x).expect("numerator Γ argument is never a pole");
        self.ln_abs += l;
        self.sign *= s;
        self
    }

    fn div_gamma(mut self, x: f64) -> Self {
        match ln_abs_gamma_signed(x) {
            Ok((l, s)) => {
                self.ln_abs -= l;
                self.sign *= s;
            }
            Err(_) => self.sign = 0.0,
        }
        self
    }

    fn scale_ln(mut self, ln_factor: f64, sign: f64) -> Self {
        self.ln_abs += ln_factor;
        self.sign *= sign;
        self
    }

    fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

/// Closed-form left-edge coefficients, with ψ injectable for the γ-shift check.
pub(crate) struct ClosedForms<F: Fn(f64) -> f64> {
    pub n: usize,
    pub psi: F,
}

impl<F: Fn(f64) -> f64> ClosedForms<F> {
    fn wpsi(&self, c: f64, x: f64) -> f64 {
        weighted_digamma_with(c, x, &self.psi).expect("coefficient of ψ(0) is zero")
    }

    /// Z^C = Γ(N²)/(Γ(N²−N)Γ(N))
    pub fn z_complex(&self) -> f64 {
        let n = self.n as f64;
        SignedLog::one()
            .mul_gamma(n * n)
            .div_gamma(n * n - n)
            .div_gamma(n)
            .value()
    }

    /// X^C = Γ(N²)/(Γ(N²−2N)Γ(N)Γ(N−1))
    pub fn x_complex(&self) -> f64 {
        let n = self.n as f64;
        SignedLog::one()
            .mul_gamma(n * n)
            .div_gamma(n * n - 2.0 * n)
            .div_gamma(n)
            .div_gamma(n - 1.0)
            .value()
    }

    pub fn x_tilde_complex(&self) -> f64 {
        let n = self.n as f64;
        let bracket = n + self.wpsi(n, n * n - 2.0 * n) - 4.0 - self.wpsi(2.0, 1.0)
            - self.wpsi(n - 2.0, n - 2.0);
        self.x_complex() * bracket
    }

    /// Z^R = 2^{N−1} Γ((N²+N)/2)/(Γ((N²−N)/2)Γ(N))
    pub fn z_real(&self) -> f64 {
        let n = self.n as f64;
        SignedLog::one()
            .scale_ln((n - 1.0) * std::f64::consts::LN_2, 1.0)
            .mul_gamma(0.5 * (n * n + n))
            .div_gamma(0.5 * (n * n - n))
            .div_gamma(n)
            .value()
    }

    /// Y^R = −√π 2^{N−1} Γ((N²+N)/2)/(Γ((N²−2N)/2)Γ((N+1)/2)Γ(N−1))
    pub fn y_real(&self) -> f64 {
        let n = self.n as f64;
        SignedLog::one()
            .scale_ln(0.5 * PI.ln() + (n - 1.0) * std::f64::consts::LN_2, -1.0)
            .mul_gamma(0.5 * (n * n + n))
            .div_gamma(0.5 * (n * n - 2.0 * n))
            .div_gamma(0.5 * (n + 1.0))
            .div_gamma(n - 1.0)
            .value()
    }

    /// X^R = −2^{2N−3} Γ((N²+N)/2)/(Γ((N²−3N)/2)Γ(N)Γ(N−2))
    pub fn x_real(&self) -> f64 {
        let n = self.n as f64;
        SignedLog::one()
            .scale_ln((2.0 * n - 3.0) * std::f64::consts::LN_2, -1.0)
            .mul_gamma(0.5 * (n * n + n))
            .div_gamma(0.5 * (n * n - 3.0 * n))
            .div_gamma(n)
            .div_gamma(n - 2.0)
            .value()
    }

    /// Valid for N > 3.
    pub fn x_tilde_real(&self) -> f64 {
        let n = self.n as f64;
        let bracket = n + self.wpsi(n, 0.5 * (n * n - 3.0 * n))
            - 8.0
            - self.wpsi(1.5, 0.5)
            - self.wpsi(2.0, 1.0)
            - self.wpsi(0.5 * (n - 3.0), 0.5 * (n - 3.0))
            - self.wpsi(0.5 * (n - 4.0), 0.5 * (n - 4.0));
        self.x_real() * bracket
    }

    /// W^R = −(√π/3) 2^{2N−3} Γ((N²+N)/2)/(Γ((N²−4N)/2)Γ((N+1)/2)Γ(N−1)Γ(N−3))
    pub fn w_real(&self) -> f64 {
        let n = self.n as f64;
        SignedLog::one()
            .scale_ln(
                0.5 * PI.ln() - 3f64.ln() + (2.0 * n - 3.0) * std::f64::consts::LN_2,
                -1.0,
            )
            .mul_gamma(0.5 * (n * n + n))
            .div_gamma(0.5 * (n * n - 4.0 * n))
            .div_gamma(0.5 * (n + 1.0))
            .div_gamma(n - 1.0)
            .div_gamma(n - 3.0)
            .value()
    }

    /// Valid for N > 4.
    pub fn w_tilde_real(&self) -> f64 {
        let n = self.n as f64;
        let bracket = n + self.wpsi(n, 0.5 * (n * n - 4.0 * n))
            - 35.0 / 3.0
            - self.wpsi(2.5, 0.5)
            - self.wpsi(2.0, 1.0)
            - self.wpsi(0.5 * (n - 4.0), 0.5 * (n - 4.0))
            - self.wpsi(0.5 * (n - 5.0), 0.5 * (n - 5.0));
        self.w_real() * bracket
    }
}

/// Residue of D^{−M−1} F(M) at the pole M0 of the Γ-product F.
///
/// Each factor Γ(aM + b)^e is expanded to first order in ε = M − M0:
/// at a pole z0 = −m it behaves as ((−1)^m/(m! a ε))^e (1 + e a ψ(m+1) ε),
/// elsewhere as Γ(z0)^e (1 + e a ψ(z0) ε). Only total pole orders 1 and 2
/// are supported; order 3 needs ψ′ and is refused.
pub(crate) fn pole_terms(
    product: &GammaProduct,
    m0: f64,
    psi: &dyn Fn(f64) -> f64,
) -> Result<Vec<EdgeTerm>> {
    let mut order = 0i32;
    let mut ln_abs = product.ln_const + m0 * product.ln_base;
    let mut sign = 1.0;
    let mut slope = product.ln_base;
    for f in &product.factors {
        let z0 = f.argument(m0);
        let e = f.power as f64;
        let zr = z0.round();
        if zr <= 0.0 && (z0 - zr).abs() < 1e-12 {
            let m = -zr;
            order += f.power;
            ln_abs -= e * (ln_gamma_pos(m + 1.0) + f.scale.ln());
            if (m as i64) % 2 == 1 && f.power % 2 != 0 {
                sign = -sign;
            }
            slope += e * f.scale * psi(m + 1.0);
        } else {
            let (l, s) = ln_abs_gamma_signed(z0)?;
            ln_abs += e * l;
            if s < 0.0 && f.power % 2 != 0 {
                sign = -sign;
            }
            slope += e * f.scale * psi(z0);
        }
    }
    let q = -(1.0 + m0);
    let c = sign * ln_abs.exp();
    match order {
        i32::MIN..=0 => Ok(vec![]),
        1 => Ok(vec![EdgeTerm {
            d_power: q,
            log_power: 0,
            coeff: c,
        }]),
        2 => Ok(vec![
            EdgeTerm {
                d_power: q,
                log_power: 1,
                coeff: -c,
            },
            EdgeTerm {
                d_power: q,
                log_power: 0,
                coeff: c * slope,
            },
        ]),
        k => Err(Error::Capability(format!(
            "pole of order {k} at M = {m0} needs polygamma of order ≥ 1"
        ))),
    }
}

fn psi_default(x: f64) -> f64 {
    digamma_any(x).expect("ψ is only evaluated off its poles")
}

fn term(d_power: f64, log_power: u32, coeff: f64) -> EdgeTerm {
    EdgeTerm {
        d_power,
        log_power,
        coeff,
    }
}

/// Left-edge series of P_N(D) for complex states.
///
/// Z + X D ln D + X̃ D for every N ≥ 3. For N = 3 the M = −3 pole is only
/// double, giving V D² ln² D (V = 0), Ṽ D² ln D and Ṽ̃ D²; for N > 3 the
/// series stops at order D.
pub fn left_edge_coeffs_complex(n: usize) -> Result<EdgeExpansion> {
    complex_with(n, &psi_default)
}

fn complex_with(n: usize, psi: &dyn Fn(f64) -> f64) -> Result<EdgeExpansion> {
    check_n(n, 3)?;
    let cf = ClosedForms { n, psi };
    let mut terms = vec![
        term(0.0, 0, cf.z_complex()),
        term(1.0, 1, cf.x_complex()),
        term(1.0, 0, cf.x_tilde_complex()),
    ];
    let (complete_through, truncated) = if n == 3 {
        let product = GammaProduct::det_hs(3, Beta::Complex);
        let res = pole_terms(&product, -3.0, psi)?;
        terms.push(term(2.0, 2, 0.0));
        terms.extend(res);
        (2.0, false)
    } else {
        (1.0, true)
    };
    Ok(EdgeExpansion {
        n,
        beta: Beta::Complex,
        edge: Edge::Left,
        terms,
        complete_through,
        truncated,
    })
}

/// Left-edge series of P_N(D) for real states, through order D^{3/2}.
///
/// Z + Y D^{1/2} + X D ln D + X̃ D + W D^{3/2} ln D + W̃ D^{3/2}. For N = 3
/// the order-D pole and for N = 3, 4 the order-D^{3/2} pole are simple, so
/// X₃ = W₃ = W₄ = 0 and X̃₃, W̃₃, W̃₄ come from the residue routine.
pub fn left_edge_coeffs_real(n: usize) -> Result<EdgeExpansion> {
    real_with(n, &psi_default)
}

fn real_with(n: usize, psi: &dyn Fn(f64) -> f64) -> Result<EdgeExpansion> {
    check_n(n, 3)?;
    let cf = ClosedForms { n, psi };
    let product = GammaProduct::det_hs(n, Beta::Real);
    let simple = |m0: f64| -> Result<f64> {
        let t = pole_terms(&product, m0, psi)?;
        debug_assert!(t.len() == 1);
        Ok(t[0].coeff)
    };
    let (x, x_tilde) = if n == 3 {
        (0.0, simple(-2.0)?)
    } else {
        (cf.x_real(), cf.x_tilde_real())
    };
    let (w, w_tilde) = if n <= 4 {
        (0.0, simple(-2.5)?)
    } else {
        (cf.w_real(), cf.w_tilde_real())
    };
    Ok(EdgeExpansion {
        n,
        beta: Beta::Real,
        edge: Edge::Left,
        terms: vec![
            term(0.0, 0, cf.z_real()),
            term(0.5, 0, cf.y_real()),
            term(1.0, 1, x),
            term(1.0, 0, x_tilde),
            term(1.5, 1, w),
            term(1.5, 0, w_tilde),
        ],
        complete_through: 1.5,
        truncated: false,
    })
}

pub fn left_edge_coeffs(n: usize, beta: Beta) -> Result<EdgeExpansion> {
    match beta {
        Beta::Complex => left_edge_coeffs_complex(n),
        Beta::Real => left_edge_coeffs_real(n),
    }
}

/// The left-edge series with every ψ replaced by ψ + shift.
///
/// The ψ terms of each coefficient carry weights summing to zero, so the
/// result equals [`left_edge_coeffs`] up to rounding for any shift; this
/// is the hook that lets callers check it.
pub fn left_edge_coeffs_psi_shifted(n: usize, beta: Beta, shift: f64) -> Result<EdgeExpansion> {
    let psi = move |x: f64| psi_default(x) + shift;
    match beta {
        Beta::Complex => complex_with(n, &psi),
        Beta::Real => real_with(n, &psi),
    }
}
