//! Monte Carlo against the exact results: histograms, goodness of fit,
//! moment tables with jackknife errors, and concentration scans.

use std::f64::consts::E;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::{left_edge_coeffs, right_edge_density};
use crate::beta::Beta;
use crate::ensembles::{map_blocks, sample_det_logs, sample_ginibre, det_log_fast, SystemSpec};
use crate::error::{Error, Result};
use crate::inverse_transform::{
    density_d_stitched, density_g_stitched, density_n2_closed, support_edge, DensityCurve,
    Inverter, Variable,
};
use crate::moments::{
    concentration_point, det_moment_hs, det_moment_induced, g_moment_hs, g_moment_induced,
};

/// Jackknife groups for moment standard errors.
pub const JACKNIFE_GROUPS: usize = 100;

/// Expected count below which χ² bins are merged.
pub const MIN_EXPECTED: f64 = 10.0;

/// Default cap on N·K in concentration scans.
pub const DEFAULT_NK_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramData {
    pub variable: Variable,
    pub spec: SystemSpec,
    pub seed: u64,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub density: Vec<f64>,
}

impl HistogramData {
    /// CSV with header `bin_left,bin_right,count,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count,density\n");
        for i in 0..self.counts.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{},{:.16e}\n",
                self.edges[i],
                self.edges[i + 1],
                self.counts[i],
                self.density[i]
            ));
        }
        out
    }

    fn from_counts(
        variable: Variable,
        spec: SystemSpec,
        seed: u64,
        edges: Vec<f64>,
        counts: Vec<u64>,
    ) -> Self {
        let total: u64 = counts.iter().sum();
        let density = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if total == 0 {
                    0.0
                } else {
                    c as f64 / (total as f64 * (edges[i + 1] - edges[i]))
                }
            })
            .collect();
        Self {
            variable,
            spec,
            seed,
            edges,
            counts,
            total,
            density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    pub ks_distance: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub max_abs_residual_sigma: f64,
}

impl FitReport {
    pub fn reduced_chi_square(&self) -> f64 {
        self.chi_square / self.dof.max(1) as f64
    }
}

fn upper_limit(variable: Variable, n: usize) -> f64 {
    match variable {
        Variable::D => support_edge(n),
        Variable::G => 1.0,
    }
}

/// Uniform histogram of D on [0, N^−N] or of G on [0, 1].
pub fn run_histogram_experiment(
    spec: &SystemSpec,
    samples: usize,
    bins: usize,
    variable: Variable,
    seed: u64,
) -> Result<HistogramData> {
    if samples < 1000 {
        return Err(Error::domain(format!("need at least 10³ samples, got {samples}")));
    }
    if bins == 0 {
        return Err(Error::domain("need at least one bin"));
    }
    let n = spec.n;
    let nf = n as f64;
    let top = upper_limit(variable, n);
    let edges: Vec<f64> = (0..=bins).map(|i| top * i as f64 / bins as f64).collect();
    let per_block = map_blocks(samples, seed, |_, rng, len| {
        let mut counts = vec![0u64; bins];
        for _ in 0..len {
            let dl = det_log_fast(&sample_ginibre(spec, rng))?;
            let v = match variable {
                Variable::D => dl.exp(),
                Variable::G => nf * (dl / nf).exp(),
            };
            // round-off can put the maximally mixed point a hair past the edge
            let idx = ((v / top) * bins as f64).floor().max(0.0) as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        Ok(counts)
    })?;
    let mut counts = vec![0u64; bins];
    for b in per_block {
        for (c, x) in counts.iter_mut().zip(b) {
            *c += x;
        }
    }
    Ok(HistogramData::from_counts(variable, *spec, seed, edges, counts))
}

/// Cumulative distribution of a curve, normalised to its own total mass.
///
/// Trapezoid in the curve's natural measure; below the first abscissa the
/// low tail is spread linearly down to 0, above the last the high tail up
/// to the support end.
pub struct CurveCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
    low: f64,
    top: f64,
}

impl CurveCdf {
    pub fn new(c: &DensityCurve) -> Self {
        let mut cdf = Vec::with_capacity(c.grid.len());
        let mut acc = c.low_tail_mass;
        cdf.push(acc);
        for i in 1..c.grid.len() {
            let (a, b) = (c.grid[i - 1], c.grid[i]);
            acc += match c.variable {
                Variable::D => 0.5 * (a * c.values[i - 1] + b * c.values[i]) * (b / a).ln(),
                Variable::G => 0.5 * (c.values[i - 1] + c.values[i]) * (b - a),
            };
            cdf.push(acc);
        }
        let total = acc + c.high_tail_mass;
        for v in cdf.iter_mut() {
            *v /= total;
        }
        Self {
            grid: c.grid.clone(),
            low: c.low_tail_mass / total,
            cdf,
            top: upper_limit(c.variable, c.n),
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        let first = self.grid[0];
        let last = *self.grid.last().unwrap();
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.top {
            return 1.0;
        }
        if t <= first {
            return self.low * t / first;
        }
        if t >= last {
            let f = *self.cdf.last().unwrap();
            return f + (1.0 - f) * (t - last) / (self.top - last);
        }
        let i = self.grid.partition_point(|&g| g <= t);
        let (a, b) = (self.grid[i - 1], self.grid[i]);
        let w = (t - a) / (b - a);
        self.cdf[i - 1] + w * (self.cdf[i] - self.cdf[i - 1])
    }
}

/// Grid for a curve to be compared with `h`: every bin split into `sub`
/// pieces, endpoints of the support dropped.
pub fn comparison_grid(h: &HistogramData, sub: usize) -> Vec<f64> {
    let mut g = Vec::new();
    for w in h.edges.windows(2) {
        for j in 0..sub {
            g.push(w[0] + (w[1] - w[0]) * j as f64 / sub as f64);
        }
    }
    g.push(*h.edges.last().unwrap());
    let top = upper_limit(h.variable, h.spec.n);
    g.retain(|&t| t > 0.0 && t < top);
    g
}

/// KS distance at the bin edges, Pearson χ² with merged sparse bins, and
/// the largest merged-bin residual in Poisson σ.
pub fn compare_density(h: &HistogramData, c: &DensityCurve) -> Result<FitReport> {
    if h.total == 0 {
        return Err(Error::Contract("histogram has no samples".into()));
    }
    if h.variable != c.variable || h.spec.n != c.n || h.spec.beta != c.beta {
        return Err(Error::Contract(format!(
            "histogram ({}, n = {}, β = {}) and curve ({}, n = {}, β = {}) describe different laws",
            h.variable, h.spec.n, h.spec.beta, c.variable, c.n, c.beta
        )));
    }
    if !h.spec.is_hilbert_schmidt() {
        return Err(Error::Contract(
            "density curves describe the Hilbert–Schmidt measure only".into(),
        ));
    }
    let cdf = CurveCdf::new(c);
    let total = h.total as f64;
    let probs: Vec<f64> = h.edges.windows(2).map(|w| cdf.at(w[1]) - cdf.at(w[0])).collect();
    let mut ks: f64 = 0.0;
    let mut seen = 0u64;
    for (i, &cnt) in h.counts.iter().enumerate() {
        seen += cnt;
        ks = ks.max((seen as f64 / total - cdf.at(h.edges[i + 1])).abs());
    }
    let (mut chi, mut groups, mut worst) = (0.0, 0usize, 0.0f64);
    let (mut o, mut e) = (0.0, 0.0);
    let mut pending: Vec<(f64, f64)> = Vec::new();
    for (i, &cnt) in h.counts.iter().enumerate() {
        o += cnt as f64;
        e += total * probs[i];
        if e >= MIN_EXPECTED {
            pending.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match pending.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => pending.push((o, e)),
        }
    }
    for (o, e) in pending {
        if e <= 0.0 {
            if o > 0.0 {
                worst = f64::INFINITY;
                chi = f64::INFINITY;
            }
            continue;
        }
        chi += (o - e) * (o - e) / e;
        worst = worst.max(((o - e) / e.sqrt()).abs());
        groups += 1;
    }
    Ok(FitReport {
        ks_distance: ks,
        chi_square: chi,
        dof: groups.saturating_sub(1),
        max_abs_residual_sigma: worst,
    })
}

/// Exact density curve matched to a histogram: closed form at N = 2,
/// stitched inversion otherwise.
pub fn reference_curve(h: &HistogramData, sub: usize) -> Result<DensityCurve> {
    let grid = comparison_grid(h, sub);
    let (n, beta) = (h.spec.n, h.spec.beta);
    match (n, h.variable) {
        (2, v) => density_n2_closed(beta, v, &grid),
        (_, Variable::D) => density_d_stitched(n, beta, &grid),
        (_, Variable::G) => density_g_stitched(n, beta, &grid),
    }
}

/// Largest |F_emp − F| over a sample, F a continuous CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub order: f64,
    pub exact: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub z_score: f64,
}

/// Exact ⟨X^m⟩ for the spec; the HS formula when K matches, induced otherwise.
pub fn exact_moment(spec: &SystemSpec, variable: Variable, m: f64) -> Result<f64> {
    if m == 0.0 {
        return Ok(1.0);
    }
    let mc = Complex64::new(m, 0.0);
    let v = match (variable, spec.is_hilbert_schmidt()) {
        (Variable::D, true) => det_moment_hs(spec.n, spec.beta, mc)?,
        (Variable::G, true) => g_moment_hs(spec.n, spec.beta, mc)?,
        (Variable::D, false) => det_moment_induced(spec.n, spec.k, spec.beta, mc)?,
        (Variable::G, false) => g_moment_induced(spec.n, spec.k, spec.beta, mc)?,
    };
    Ok(v.real())
}

/// Jackknife mean and standard error of `values` over contiguous groups.
pub fn jackknife_mean(values: &[f64], groups: usize) -> (f64, f64) {
    let n = values.len();
    let groups = groups.min(n).max(2);
    let sums: Vec<(f64, usize)> = (0..groups)
        .map(|g| {
            let (a, b) = (g * n / groups, (g + 1) * n / groups);
            (values[a..b].iter().sum(), b - a)
        })
        .collect();
    let total: f64 = sums.iter().map(|s| s.0).sum();
    let mean = total / n as f64;
    let loo: Vec<f64> = sums
        .iter()
        .map(|&(s, c)| (total - s) / (n - c) as f64)
        .collect();
    let gf = groups as f64;
    let bar = loo.iter().sum::<f64>() / gf;
    let var = (gf - 1.0) / gf * loo.iter().map(|t| (t - bar) * (t - bar)).sum::<f64>();
    (mean, var.sqrt())
}

/// Empirical moments of D or G against the exact values.
pub fn moment_check(
    spec: &SystemSpec,
    samples: usize,
    orders: &[f64],
    variable: Variable,
    seed: u64,
) -> Result<Vec<MomentRow>> {
    if let Some(&m) = orders.iter().find(|&&m| !(m >= 0.0)) {
        return Err(Error::domain(format!("moment orders must be ≥ 0, got {m}")));
    }
    if samples < JACKNIFE_GROUPS {
        return Err(Error::domain(format!(
            "need at least {JACKNIFE_GROUPS} samples for the jackknife"
        )));
    }
    let logs = sample_det_logs(spec, samples, seed)?;
    let nf = spec.n as f64;
    orders
        .iter()
        .map(|&m| {
            let exact = exact_moment(spec, variable, m)?;
            let scale = match variable {
                Variable::D => m,
                Variable::G => m / nf,
            };
            let base = match variable {
                Variable::D => 0.0,
                Variable::G => m * nf.ln(),
            };
            let xs: Vec<f64> = logs.iter().map(|l| (base + scale * l).exp()).collect();
            let (emp, se) = jackknife_mean(&xs, JACKNIFE_GROUPS);
            let diff = emp - exact;
            let z = if se > 0.0 {
                diff / se
            } else if diff.abs() <= 1e-12 * exact.abs() {
                0.0
            } else {
                f64::INFINITY
            };
            Ok(MomentRow {
                order: m,
                exact,
                empirical: emp,
                std_error: se,
                z_score: z,
            })
        })
        .collect()
}

pub fn format_moment_table(rows: &[MomentRow]) -> String {
    let mut s = format!(
        "{:>8} {:>24} {:>24} {:>12} {:>8}\n",
        "order", "exact", "empirical", "std_error", "z"
    );
    for r in rows {
        s.push_str(&format!(
            "{:>8} {:>24.16e} {:>24.16e} {:>12.4e} {:>8.3}\n",
            r.order, r.exact, r.empirical, r.std_error, r.z_score
        ));
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub j: usize,
    pub n: usize,
    pub k: usize,
    pub mean_g: f64,
    pub var_g: f64,
    pub exact_mean_g: f64,
    pub target: f64,
}

/// ℓ₁, ℓ₂ with q = ℓ₂/ℓ₁, ℓ₁ ≤ 64.
pub fn rational_ratio(q: f64) -> Result<(usize, usize)> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::domain(format!("ratio K/N must be a finite q ≥ 1, got {q}")));
    }
    for l1 in 1..=64usize {
        let l2 = q * l1 as f64;
        if (l2 - l2.round()).abs() < 1e-9 * l2 {
            return Ok((l1, l2.round() as usize));
        }
    }
    Err(Error::domain(format!(
        "q = {q} is not a ratio of integers with denominator ≤ 64"
    )))
}

/// Sample mean and variance of G along N = Jℓ₁, K = Jℓ₂.
///
/// q = 1 is the Hilbert–Schmidt family with target 1/e; q > 1 targets X_q.
pub fn concentration_scan(
    q: f64,
    j_values: &[usize],
    beta: Beta,
    samples: usize,
    seed: u64,
    nk_cap: usize,
) -> Result<Vec<ConcentrationRow>> {
    let (l1, l2) = rational_ratio(q)?;
    let target = if l1 == l2 { 1.0 / E } else { concentration_point(q)? };
    if samples < 2 {
        return Err(Error::domain("need at least two samples for a variance"));
    }
    j_values
        .iter()
        .map(|&j| {
            let n = j * l1;
            let k = if l1 == l2 { beta.hs_ancilla(n) } else { j * l2 };
            if n.saturating_mul(k) > nk_cap {
                return Err(Error::Capability(format!(
                    "N·K = {} exceeds the cap {nk_cap}",
                    n.saturating_mul(k)
                )));
            }
            let spec = SystemSpec::new(n, k, beta)?;
            let nf = n as f64;
            let gs: Vec<f64> = sample_det_logs(&spec, samples, seed)?
                .iter()
                .map(|l| nf * (l / nf).exp())
                .collect();
            let cnt = gs.len() as f64;
            let mean = gs.iter().sum::<f64>() / cnt;
            let var = gs.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (cnt - 1.0);
            Ok(ConcentrationRow {
                j,
                n,
                k,
                mean_g: mean,
                var_g: var,
                exact_mean_g: exact_moment(&spec, Variable::G, 1.0)?,
                target,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Validation suites

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# suite = {}, seed = {}", self.suite, self.seed)?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<44} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Quick,
    Full,
}

impl Suite {
    fn samples(self) -> usize {
        match self {
            Suite::Quick => 100_000,
            Suite::Full => 1_000_000,
        }
    }
}

fn check(checks: &mut Vec<Check>, name: &str, r: Result<(bool, String)>) {
    let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    checks.push(Check {
        name: name.to_string(),
        passed,
        detail,
    });
}

/// Run the harness properties at desk scale.
pub fn run_validation(suite: Suite, seed: u64) -> ValidationReport {
    let samples = suite.samples();
    let mut checks = Vec::new();

    check(&mut checks, "n=2 closed form vs inversion (both β)", (|| {
        let mut worst: f64 = 0.0;
        for beta in [Beta::Real, Beta::Complex] {
            let grid: Vec<f64> = (1..200).map(|i| 0.25 * (0.025 + 0.95 * i as f64 / 200.0)).collect();
            let inv = Inverter::new(2, beta)?;
            for &d in &grid {
                let exact = density_n2_closed(beta, Variable::D, &[d])?.values[0];
                worst = worst.max((inv.at_d(d).value - exact).abs());
            }
        }
        Ok((worst < 1e-6, format!("sup |Δ| = {worst:.2e}")))
    })());

    let orders = [1.0, 2.0, 3.0];
    for n in [2usize, 3, 4] {
        for beta in [Beta::Real, Beta::Complex] {
            let name = format!("moments of D, n={n}, β={beta}");
            check(&mut checks, &name, (|| {
                let spec = SystemSpec::hilbert_schmidt(n, beta)?;
                let rows = moment_check(&spec, samples, &orders, Variable::D, seed)?;
                let z = rows.iter().fold(0.0f64, |m, r| m.max(r.z_score.abs()));
                Ok((z < 5.0, format!("max |z| = {z:.2}")))
            })());
        }
    }

    check(&mut checks, "induced moments of G, (3,6,β=2)", (|| {
        let spec = SystemSpec::new(3, 6, Beta::Complex)?;
        let rows = moment_check(&spec, samples, &[1.0, 2.0], Variable::G, seed)?;
        let z = rows.iter().fold(0.0f64, |m, r| m.max(r.z_score.abs()));
        Ok((z < 5.0, format!("max |z| = {z:.2}")))
    })());

    check(&mut checks, "n=2 G histogram χ²", (|| {
        let spec = SystemSpec::hilbert_schmidt(2, Beta::Complex)?;
        let h = run_histogram_experiment(&spec, samples, 100, Variable::G, seed)?;
        let r = compare_density(&h, &reference_curve(&h, 4)?)?;
        let red = r.reduced_chi_square();
        Ok((
            red > 0.5 && red < 1.6 && r.max_abs_residual_sigma < 5.0,
            format!("χ²/dof = {red:.3}, max |r| = {:.2}σ", r.max_abs_residual_sigma),
        ))
    })());

    check(&mut checks, "wrong-β curve is rejected", (|| {
        let spec = SystemSpec::hilbert_schmidt(2, Beta::Complex)?;
        let h = run_histogram_experiment(&spec, samples, 100, Variable::G, seed)?;
        let mut wrong = density_n2_closed(Beta::Real, Variable::G, &comparison_grid(&h, 4))?;
        wrong.beta = Beta::Complex;
        let r = compare_density(&h, &wrong)?;
        Ok((r.reduced_chi_square() > 10.0, format!("χ²/dof = {:.1}", r.reduced_chi_square())))
    })());

    for n in [3usize, 4] {
        let name = format!("KS of G vs inverted density, n={n}, β=2");
        check(&mut checks, &name, (|| {
            let spec = SystemSpec::hilbert_schmidt(n, Beta::Complex)?;
            let h = run_histogram_experiment(&spec, samples, 200, Variable::G, seed)?;
            let r = compare_density(&h, &reference_curve(&h, 4)?)?;
            // 0.003 is the 10⁶-sample bound; smaller runs get the 1% KS critical value
            let bound = (1.63 / (samples as f64).sqrt()).max(0.003);
            Ok((r.ks_distance < bound, format!("KS = {:.2e} (bound {bound:.1e})", r.ks_distance)))
        })());
    }

    check(&mut checks, "support cutoff n ∈ {3,4}", (|| {
        let mut worst: f64 = 0.0;
        for n in [3usize, 4] {
            for beta in [Beta::Real, Beta::Complex] {
                let inv = Inverter::new(n, beta)?;
                for f in [1e-3, 1e-2, 1e-1] {
                    let d = support_edge(n) * (1.0 + f);
                    worst = worst.max(inv.support_bound(-d.ln() - n as f64 * (n as f64).ln()));
                }
            }
        }
        Ok((worst < 1e-8, format!("max bound = {worst:.1e}")))
    })());

    check(&mut checks, "left-edge series, n=3", (|| {
        let c = left_edge_coeffs(3, Beta::Complex)?;
        let r = left_edge_coeffs(3, Beta::Real)?;
        let z = c.coeff(0.0, 0).unwrap_or(f64::NAN);
        let zr = r.coeff(0.0, 0).unwrap_or(f64::NAN);
        Ok((
            (z - 168.0).abs() < 1e-10 && (zr - 120.0).abs() < 1e-10,
            format!("Z = {z}, Z^R = {zr}"),
        ))
    })());

    check(&mut checks, "right edge vanishes beyond the support", (|| {
        let v = right_edge_density(3, Beta::Complex, support_edge(3) * 1.01)?;
        Ok((v == 0.0, format!("{v}")))
    })());

    let js: &[usize] = match suite {
        Suite::Quick => &[4, 8, 16],
        Suite::Full => &[4, 8, 16, 32],
    };
    let scan_samples = samples / 20;
    for q in [1.0, 2.0] {
        let name = format!("concentration q={q}, β=2");
        check(&mut checks, &name, (|| {
            let rows = concentration_scan(q, js, Beta::Complex, scan_samples, seed, DEFAULT_NK_CAP)?;
            let gaps: Vec<f64> = rows.iter().map(|r| (r.exact_mean_g - r.target).abs()).collect();
            let mono = gaps.windows(2).all(|w| w[1] < w[0])
                && rows.windows(2).all(|w| w[1].var_g < w[0].var_g);
            let first = rows.first().map(|r| r.var_g).unwrap_or(0.0);
            let last = rows.last().map(|r| r.var_g).unwrap_or(0.0);
            Ok((
                mono && last < first / 2.0,
                format!("var {first:.2e} → {last:.2e}, gap → {:.2e}", gaps.last().unwrap_or(&0.0)),
            ))
        })());
    }

    ValidationReport {
        suite: match suite {
            Suite::Quick => "quick".into(),
            Suite::Full => "full".into(),
        },
        seed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn jackknife_of_the_mean_is_the_usual_error() {
        use rand::Rng;
        let mut rng = crate::ensembles::block_rng(5, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let (m, se) = jackknife_mean(&xs, 100);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        assert!((m - mean).abs() < 1e-14);
        // equal groups: standard error of the group means
        let gm: Vec<f64> = xs.chunks(100).map(|c| c.iter().sum::<f64>() / 100.0).collect();
        let s2 = gm.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (100.0 * 99.0);
        assert!((se / s2.sqrt() - 1.0).abs() < 1e-10);
        // and close to the i.i.d. formula
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((se / (var / n).sqrt() - 1.0).abs() < 0.3);
    }

    #[test]
    fn histogram_basics() {
        let spec = SystemSpec::hilbert_schmidt(3, Beta::Complex).unwrap();
        let h = run_histogram_experiment(&spec, 20_000, 50, Variable::D, 3).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), h.total);
        let integral: f64 = h
            .density
            .iter()
            .zip(h.edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        assert!((integral - 1.0).abs() < 1e-12);
        let again = run_histogram_experiment(&spec, 20_000, 50, Variable::D, 3).unwrap();
        assert_eq!(h, again);
        assert!(run_histogram_experiment(&spec, 999, 50, Variable::D, 3).is_err());
        let csv = h.to_csv();
        assert!(csv.starts_with("bin_left,bin_right,count,density\n"));
        assert_eq!(csv.lines().count(), 51);
    }

    #[test]
    fn no_counts_beyond_the_support() {
        // every sampled determinant lies inside the support
        let spec = SystemSpec::hilbert_schmidt(2, Beta::Real).unwrap();
        let h = run_histogram_experiment(&spec, 50_000, 40, Variable::D, 8).unwrap();
        let nf = 2f64;
        let logs = sample_det_logs(&spec, 50_000, 8).unwrap();
        assert!(logs.iter().all(|l| *l <= -nf * nf.ln() + 1e-12));
        assert_eq!(h.counts.iter().sum::<u64>(), 50_000);
    }

    #[test]
    fn fit_against_own_law_and_wrong_law() {
        let spec = SystemSpec::hilbert_schmidt(2, Beta::Complex).unwrap();
        let h = run_histogram_experiment(&spec, 1_000_000, 100, Variable::G, 17).unwrap();
        let own = reference_curve(&h, 4).unwrap();
        let r = compare_density(&h, &own).unwrap();
        assert!(r.max_abs_residual_sigma < 5.0, "{r:?}");
        let red = r.reduced_chi_square();
        assert!(red > 0.5 && red < 1.6, "{r:?}");
        let mut wrong = density_n2_closed(Beta::Real, Variable::G, &comparison_grid(&h, 4)).unwrap();
        assert!(matches!(compare_density(&h, &wrong), Err(Error::Contract(_))));
        wrong.beta = Beta::Complex;
        assert!(compare_density(&h, &wrong).unwrap().reduced_chi_square() > 10.0);
        let mut empty = h.clone();
        empty.counts.iter_mut().for_each(|c| *c = 0);
        empty.total = 0;
        assert!(matches!(compare_density(&empty, &own), Err(Error::Contract(_))));
    }

    #[test]
    fn unbinned_ks_for_n2() {
        let spec = SystemSpec::hilbert_schmidt(2, Beta::Complex).unwrap();
        let mut g: Vec<f64> = sample_det_logs(&spec, 1_000_000, 21)
            .unwrap()
            .iter()
            .map(|l| 2.0 * (l / 2.0).exp())
            .collect();
        let ks = ks_statistic(&mut g, |t| 1.0 - (1.0 - t * t).max(0.0).powf(1.5));
        assert!(ks < 0.002, "{ks}");
    }

    #[test]
    fn moment_table() {
        let spec = SystemSpec::hilbert_schmidt(2, Beta::Complex).unwrap();
        let rows = moment_check(&spec, 200_000, &[0.0, 1.0], Variable::G, 4).unwrap();
        assert_eq!(rows[0].exact, 1.0);
        assert_eq!(rows[0].empirical, 1.0);
        assert_eq!(rows[0].z_score, 0.0);
        assert!((rows[1].exact - 3.0 * PI / 16.0).abs() < 1e-15);
        assert!(rows[1].z_score.abs() < 4.0);
        let spec = SystemSpec::new(3, 6, Beta::Complex).unwrap();
        let rows = moment_check(&spec, 200_000, &[2.0], Variable::G, 4).unwrap();
        assert!(rows[0].z_score.abs() < 4.0, "{rows:?}");
        assert!(moment_check(&spec, 1000, &[-1.0], Variable::G, 4).is_err());
        assert!(format_moment_table(&rows).lines().count() == 2);
    }

    #[test]
    fn ratios_and_caps() {
        assert_eq!(rational_ratio(1.0).unwrap(), (1, 1));
        assert_eq!(rational_ratio(2.0).unwrap(), (1, 2));
        assert_eq!(rational_ratio(1.5).unwrap(), (2, 3));
        assert!(rational_ratio(0.5).is_err());
        assert!(rational_ratio(PI).is_err());
        let r = concentration_scan(2.0, &[64], Beta::Complex, 10, 1, 1000);
        assert!(matches!(r, Err(Error::Capability(_))));
    }

    #[test]
    fn concentration_trend() {
        let rows = concentration_scan(2.0, &[2, 4, 8], Beta::Complex, 4000, 6, DEFAULT_NK_CAP).unwrap();
        assert!(rows.iter().all(|r| r.var_g >= 0.0));
        assert!(rows.windows(2).all(|w| w[1].var_g < w[0].var_g));
        assert!((rows[0].target - 2.0 / E).abs() < 1e-15);
        for r in &rows {
            assert!((r.mean_g - r.exact_mean_g).abs() < 5.0 * (r.var_g / 4000.0).sqrt());
        }
        let hs = concentration_scan(1.0, &[4], Beta::Real, 100, 6, DEFAULT_NK_CAP).unwrap();
        assert_eq!(hs[0].k, 5);
        assert!((hs[0].target - 1.0 / E).abs() < 1e-16);
    }
}
