//! Random pure states on an N×K system and their Schmidt spectra.
//!
//! A Ginibre matrix A (N×K, real or complex Gaussian entries) gives the
//! reduced state ρ = AA†/Tr AA†. Sampling runs in fixed-size blocks; block b
//! of a run draws from ChaCha8 stream b of the run seed, so every block can
//! be regenerated on its own and results do not depend on the thread count.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::beta::Beta;
use crate::error::{Error, Result};

/// Samples per RNG stream.
pub const BLOCK_SIZE: usize = 1024;

/// N×K system with Dyson index β.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SystemSpec {
    pub n: usize,
    pub k: usize,
    pub beta: Beta,
}

impl SystemSpec {
    pub fn new(n: usize, k: usize, beta: Beta) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("principal dimension must be ≥ 2, got {n}")));
        }
        if k < n {
            return Err(Error::domain(format!("ancilla dimension {k} must be ≥ n = {n}")));
        }
        Ok(Self { n, k, beta })
    }

    /// The ancilla size that realises the Hilbert–Schmidt measure: K = N + 2 − β.
    pub fn hilbert_schmidt(n: usize, beta: Beta) -> Result<Self> {
        Self::new(n, beta.hs_ancilla(n), beta)
    }

    pub fn is_hilbert_schmidt(&self) -> bool {
        self.k == self.beta.hs_ancilla(self.n)
    }
}

/// Ordered Schmidt coefficients with ln D and G.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtSpectrum {
    /// Descending, non-negative, summing to 1.
    pub values: Vec<f64>,
    /// Σ ln Λ_i; −∞ when a coefficient underflows to zero.
    pub det_log: f64,
    /// N·exp(det_log / N)
    pub g: f64,
}

impl SchmidtSpectrum {
    /// Normalise, sort and derive D and G from non-negative weights.
    pub fn from_weights(mut values: Vec<f64>) -> Result<Self> {
        let total: f64 = values.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Degenerate(
                "spectrum has zero (or non-finite) trace".into(),
            ));
        }
        for v in values.iter_mut() {
            *v /= total;
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let n = values.len() as f64;
        let det_log: f64 = values.iter().map(|v| v.ln()).sum();
        let g = n * (det_log / n).exp();
        let s = Self {
            values,
            det_log,
            g,
        };
        debug_assert!(s.check().is_ok(), "{:?}", s.check());
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn det(&self) -> f64 {
        self.det_log.exp()
    }

    /// Verify the ordering, normalisation and D ≤ N^−N bounds.
    pub fn check(&self) -> Result<()> {
        let n = self.values.len() as f64;
        if self.values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Contract("spectrum is not descending".into()));
        }
        if self.values.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Contract("negative Schmidt coefficient".into()));
        }
        let s: f64 = self.values.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(Error::Contract(format!("Schmidt coefficients sum to {s}")));
        }
        if !(self.g >= 0.0 && self.g <= 1.0 + 1e-12) {
            return Err(Error::Contract(format!("G = {} outside [0, 1]", self.g)));
        }
        if self.det_log > -n * n.ln() + 1e-12 {
            return Err(Error::Contract("det exceeds N^−N".into()));
        }
        Ok(())
    }
}

/// A Ginibre draw, real or complex.
#[derive(Debug, Clone, PartialEq)]
pub enum GinibreMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl GinibreMatrix {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            GinibreMatrix::Real(a) => a.shape(),
            GinibreMatrix::Complex(a) => a.shape(),
        }
    }
}

/// n×k matrix of i.i.d. N(0,1) entries (β = 1) or entries with independent
/// N(0,1) real and imaginary parts (β = 2).
pub fn sample_ginibre<R: Rng + ?Sized>(spec: &SystemSpec, rng: &mut R) -> GinibreMatrix {
    let (n, k) = (spec.n, spec.k);
    match spec.beta {
        Beta::Real => GinibreMatrix::Real(DMatrix::from_fn(n, k, |_, _| rng.sample(StandardNormal))),
        Beta::Complex => GinibreMatrix::Complex(DMatrix::from_fn(n, k, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })),
    }
}

/// Eigenvalues within this distance below zero are round-off.
fn clip_tolerance(n: usize) -> f64 {
    1e-14f64.max(4.0 * n as f64 * f64::EPSILON)
}

/// Schmidt spectrum of AA†/Tr(AA†).
pub fn reduce_to_spectrum(a: &GinibreMatrix) -> Result<SchmidtSpectrum> {
    let (n, k) = a.shape();
    if n > k {
        return Err(Error::Contract(format!("need n ≤ k, got a {n}×{k} matrix")));
    }
    let (mut eig, trace): (Vec<f64>, f64) = match a {
        GinibreMatrix::Real(a) => {
            let gram = a * a.transpose();
            let tr = gram.trace();
            if !(tr > 0.0) {
                return Err(Error::Degenerate("zero matrix has no reduced state".into()));
            }
            ((gram / tr).symmetric_eigenvalues().iter().cloned().collect(), tr)
        }
        GinibreMatrix::Complex(a) => {
            let gram = a * a.adjoint();
            let tr = gram.trace().re;
            if !(tr > 0.0) {
                return Err(Error::Degenerate("zero matrix has no reduced state".into()));
            }
            let rho = gram.map(|z| z / tr);
            (rho.symmetric_eigenvalues().iter().cloned().collect(), tr)
        }
    };
    debug_assert!(trace > 0.0);
    let tol = clip_tolerance(n);
    for v in eig.iter_mut() {
        if *v < 0.0 && *v >= -tol {
            *v = 0.0;
        }
    }
    if eig.iter().any(|&v| v < 0.0) {
        return Err(Error::Contract(
            "Gram matrix has a clearly negative eigenvalue".into(),
        ));
    }
    SchmidtSpectrum::from_weights(eig)
}

/// ln det(AA†/Tr AA†) by Cholesky; skips the eigen-decomposition.
///
/// Returns −∞ when the Gram matrix is numerically singular.
pub fn det_log_fast(a: &GinibreMatrix) -> Result<f64> {
    let (n, _) = a.shape();
    let nf = n as f64;
    match a {
        GinibreMatrix::Real(a) => {
            let gram = a * a.transpose();
            let tr = gram.trace();
            if !(tr > 0.0) {
                return Err(Error::Degenerate("zero matrix has no reduced state".into()));
            }
            Ok(match gram.cholesky() {
                Some(c) => 2.0 * c.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>() - nf * tr.ln(),
                None => f64::NEG_INFINITY,
            })
        }
        GinibreMatrix::Complex(a) => {
            let gram = a * a.adjoint();
            let tr = gram.trace().re;
            if !(tr > 0.0) {
                return Err(Error::Degenerate("zero matrix has no reduced state".into()));
            }
            Ok(match gram.cholesky() {
                Some(c) => {
                    2.0 * c.l_dirty().diagonal().iter().map(|v| v.re.ln()).sum::<f64>() - nf * tr.ln()
                }
                None => f64::NEG_INFINITY,
            })
        }
    }
}

/// τ_k = e_k(Λ), the k-th elementary symmetric polynomial, and τ_k^{1/N}.
pub fn symmetric_monotones(s: &SchmidtSpectrum, k: usize) -> Result<(f64, f64)> {
    let n = s.n();
    if k < 2 || k > n {
        return Err(Error::domain(format!("monotone index must be in 2..={n}, got {k}")));
    }
    // e_j ← e_j + λ e_{j−1}, from the top down so each λ enters once
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &lam in &s.values {
        for j in (1..=k).rev() {
            e[j] += lam * e[j - 1];
        }
    }
    let tau = e[k];
    Ok((tau, tau.powf(1.0 / n as f64)))
}

/// RNG for block `block` of a run with seed `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn block_count(count: usize) -> usize {
    count.div_ceil(BLOCK_SIZE)
}

fn block_len(count: usize, b: usize) -> usize {
    BLOCK_SIZE.min(count - b * BLOCK_SIZE)
}

/// Run `f` on every block of a sampling run, in parallel, returning the
/// per-block results in block order.
pub fn map_blocks<T, F>(count: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng, usize) -> Result<T> + Sync,
{
    if count == 0 {
        return Err(Error::domain("sample count must be ≥ 1"));
    }
    (0..block_count(count))
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b as u64);
            f(b, &mut rng, block_len(count, b))
        })
        .collect()
}

/// `count` independent spectra, reproducible from (spec, count, seed).
pub fn sample_batch(spec: &SystemSpec, count: usize, seed: u64) -> Result<Vec<SchmidtSpectrum>> {
    let mut out: Vec<SchmidtSpectrum> = Vec::new();
    if out.try_reserve_exact(count).is_err() {
        return Err(Error::Partial {
            delivered: 0,
            requested: count,
            reason: "cannot allocate the sample buffer".into(),
        });
    }
    let blocks = map_blocks(count, seed, |_, rng, len| {
        (0..len)
            .map(|_| reduce_to_spectrum(&sample_ginibre(spec, rng)))
            .collect::<Result<Vec<_>>>()
    })?;
    for b in blocks {
        out.extend(b);
    }
    Ok(out)
}

/// ln D for `count` samples via the Cholesky path; same streams as
/// [`sample_batch`], so the values agree with its `det_log` to round-off.
pub fn sample_det_logs(spec: &SystemSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    let blocks = map_blocks(count, seed, |_, rng, len| {
        (0..len)
            .map(|_| det_log_fast(&sample_ginibre(spec, rng)))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(blocks.into_iter().flatten().collect())
}

/// CSV with header `lambda_1,…,lambda_n,det_log,g`.
pub fn write_spectra_csv<W: Write>(mut w: W, spectra: &[SchmidtSpectrum]) -> io::Result<()> {
    let n = spectra.first().map(|s| s.n()).unwrap_or(0);
    let header: Vec<String> = (1..=n).map(|i| format!("lambda_{i}")).collect();
    writeln!(w, "{},det_log,g", header.join(","))?;
    for s in spectra {
        for v in &s.values {
            write!(w, "{v:.16e},")?;
        }
        writeln!(w, "{:.16e},{:.16e}", s.det_log, s.g)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn spec_validation() {
        assert!(SystemSpec::new(1, 2, Beta::Real).is_err());
        assert!(SystemSpec::new(3, 2, Beta::Real).is_err());
        let hs = SystemSpec::hilbert_schmidt(3, Beta::Real).unwrap();
        assert_eq!(hs.k, 4);
        assert!(hs.is_hilbert_schmidt());
        assert_eq!(SystemSpec::hilbert_schmidt(3, Beta::Complex).unwrap().k, 3);
    }

    #[test]
    fn ginibre_golden_value() {
        let spec = SystemSpec::new(2, 2, Beta::Complex).unwrap();
        let mut rng = block_rng(20_240_101, 0);
        let GinibreMatrix::Complex(a) = sample_ginibre(&spec, &mut rng) else {
            panic!("complex spec gives a complex matrix");
        };
        // frozen from the first verified run
        let golden = [
            (0.3647702099899753, -0.0438736737536538),
            (-0.0211103259744753, 0.1216959752119347),
            (0.0600437225967536, 1.5913959037768781),
            (1.6447091742585074, 0.0361239160759295),
        ];
        let got: Vec<(f64, f64)> = a.iter().map(|z| (z.re, z.im)).collect();
        for (g, w) in got.iter().zip(&golden) {
            assert!((g.0 - w.0).abs() < 1e-15 && (g.1 - w.1).abs() < 1e-15, "{got:.16?}");
        }
    }

    #[test]
    fn ginibre_entry_statistics() {
        let spec = SystemSpec::new(2, 3, Beta::Complex).unwrap();
        let draws = 1_000_000 / 6 + 1;
        let (mut s1, mut s2, mut cnt) = (0.0, 0.0, 0usize);
        let mut rng = block_rng(5, 0);
        for _ in 0..draws {
            if let GinibreMatrix::Complex(a) = sample_ginibre(&spec, &mut rng) {
                for z in a.iter() {
                    s1 += z.re;
                    s2 += z.re * z.re;
                    cnt += 1;
                }
            }
        }
        let mean = s1 / cnt as f64;
        let var = s2 / cnt as f64 - mean * mean;
        let se = (1.0 / cnt as f64).sqrt();
        assert!(mean.abs() < 4.0 * se);
        // Var of the sample variance of N(0,1) is 2/cnt
        assert!((var - 1.0).abs() < 4.0 * (2.0 / cnt as f64).sqrt());
    }

    #[test]
    fn reduce_simple_matrices() {
        let id = GinibreMatrix::Real(DMatrix::identity(3, 3));
        let s = reduce_to_spectrum(&id).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert!((s.g - 1.0).abs() < 1e-14);
        let pure = GinibreMatrix::Real(DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        let s = reduce_to_spectrum(&pure).unwrap();
        assert_eq!(s.values, vec![1.0, 0.0]);
        assert_eq!(s.det(), 0.0);
        assert_eq!(s.g, 0.0);
        let zero = GinibreMatrix::Complex(DMatrix::zeros(2, 2));
        assert!(matches!(reduce_to_spectrum(&zero), Err(Error::Degenerate(_))));
        let wide = GinibreMatrix::Real(DMatrix::zeros(3, 2));
        assert!(matches!(reduce_to_spectrum(&wide), Err(Error::Contract(_))));
    }

    // Roots of det(ρ − λ) by scanning [0, 1] for sign changes and bisecting.
    fn charpoly_roots(rho: &DMatrix<Complex64>) -> Vec<f64> {
        let c = |i: usize, j: usize| rho[(i, j)];
        let det3 = |l: f64| {
            let m = |i: usize, j: usize| if i == j { c(i, j) - l } else { c(i, j) };
            (m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)))
            .re
        };
        let mut roots = vec![];
        let steps = 20_000;
        for i in 0..steps {
            let (mut a, mut b) = (i as f64 / steps as f64, (i + 1) as f64 / steps as f64);
            if det3(a).signum() == det3(b).signum() {
                continue;
            }
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if det3(a).signum() == det3(m).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        roots
    }

    #[test]
    fn eigenvalues_match_charpoly_oracle() {
        let spec = SystemSpec::new(3, 3, Beta::Complex).unwrap();
        let mut rng = block_rng(11, 3);
        for _ in 0..5 {
            let a = sample_ginibre(&spec, &mut rng);
            let s = reduce_to_spectrum(&a).unwrap();
            let GinibreMatrix::Complex(m) = &a else { unreachable!() };
            let g = m * m.adjoint();
            let tr = g.trace().re;
            let roots = charpoly_roots(&g.map(|z| z / tr));
            assert_eq!(roots.len(), 3);
            for (r, v) in roots.iter().zip(&s.values) {
                assert!((r - v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn monotones() {
        let u = SchmidtSpectrum::from_weights(vec![0.5, 0.5]).unwrap();
        let (t, _) = symmetric_monotones(&u, 2).unwrap();
        assert!((t - 0.25).abs() < 1e-16);
        let p = SchmidtSpectrum::from_weights(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        for k in 2..=4 {
            assert_eq!(symmetric_monotones(&p, k).unwrap().0, 0.0);
        }
        assert!(symmetric_monotones(&p, 1).is_err());
        assert!(symmetric_monotones(&p, 5).is_err());
        let spec = SystemSpec::new(5, 7, Beta::Real).unwrap();
        let s = reduce_to_spectrum(&sample_ginibre(&spec, &mut block_rng(1, 0))).unwrap();
        let prod: f64 = s.values.iter().product();
        let (t, root) = symmetric_monotones(&s, 5).unwrap();
        assert!(rel(t, prod) < 1e-13);
        assert!(rel(t, s.det()) < 1e-12);
        assert!(rel(root, prod.powf(0.2)) < 1e-13);
        // e_2 = (1 − Σλ²)/2 for a normalised spectrum
        let sq: f64 = s.values.iter().map(|v| v * v).sum();
        assert!(rel(symmetric_monotones(&s, 2).unwrap().0, 0.5 * (1.0 - sq)) < 1e-13);
    }

    #[test]
    fn batches_are_deterministic_and_blockwise() {
        let spec = SystemSpec::new(3, 4, Beta::Real).unwrap();
        let a = sample_batch(&spec, 3000, 9).unwrap();
        let b = sample_batch(&spec, 3000, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_batch(&spec, 3000, 10).unwrap();
        assert_ne!(a[0], c[0]);
        // a longer run shares its leading blocks
        let longer = sample_batch(&spec, 5000, 9).unwrap();
        assert_eq!(&longer[..3000], &a[..]);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| sample_batch(&spec, 3000, 9).unwrap());
        assert_eq!(single, a);
        let fast = sample_det_logs(&spec, 3000, 9).unwrap();
        for (s, f) in a.iter().zip(&fast) {
            assert!((s.det_log - f).abs() < 1e-9 * s.det_log.abs());
        }
        assert!(sample_batch(&spec, 0, 1).is_err());
    }

    #[test]
    fn mean_det_matches_exact_values() {
        for (spec, exact) in [
            (SystemSpec::new(2, 2, Beta::Complex).unwrap(), 0.1),
            (SystemSpec::new(2, 3, Beta::Real).unwrap(), 0.125),
        ] {
            let d = sample_det_logs(&spec, 1_000_000, 42).unwrap();
            let n = d.len() as f64;
            let m: f64 = d.iter().map(|v| v.exp()).sum::<f64>() / n;
            let v: f64 = d.iter().map(|x| (x.exp() - m).powi(2)).sum::<f64>() / (n - 1.0);
            assert!((m - exact).abs() < 4.0 * (v / n).sqrt(), "{m} vs {exact}");
        }
    }

    #[test]
    fn csv_dump() {
        let spec = SystemSpec::new(2, 2, Beta::Complex).unwrap();
        let s = sample_batch(&spec, 3, 1).unwrap();
        let mut buf = Vec::new();
        write_spectra_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("lambda_1,lambda_2,det_log,g"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row[0], s[0].values[0]);
        assert_eq!(row[2], s[0].det_log);
        assert_eq!(text.lines().count(), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn every_sample_is_a_valid_spectrum(n in 2usize..7, extra in 0usize..4, cplx in proptest::bool::ANY, seed in 0u64..1000) {
            let beta = if cplx { Beta::Complex } else { Beta::Real };
            let spec = SystemSpec::new(n, n + extra, beta).unwrap();
            for s in sample_batch(&spec, 50, seed).unwrap() {
                prop_assert!(s.check().is_ok());
                let nf = n as f64;
                prop_assert!(s.det_log <= -nf * nf.ln() + 1e-12);
            }
        }
    }
}
