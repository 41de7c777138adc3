use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gconc::asymptotics::{
    left_edge_coeffs, right_edge_exponent, right_edge_prefactor_g, right_edge_window, Edge,
};
use gconc::ensembles::{sample_batch, write_spectra_csv, SystemSpec};
use gconc::harness::{
    compare_density, concentration_scan, format_moment_table, moment_check, rational_ratio,
    reference_curve, run_histogram_experiment, run_validation, Suite, DEFAULT_NK_CAP,
};
use gconc::inverse_transform::{
    d_grid, density_d, density_d_right_edge, density_d_stitched, density_g, density_g_right_edge,
    density_g_stitched, density_n2_closed, g_grid, linear_grid, support_edge, DensityCurve, Variable,
    EDGE_WINDOW_TOL,
};
use gconc::moments::{
    concentration_point, det_moment_hs, det_moment_induced, g_mean_variance_hs,
    g_mean_variance_induced, g_moment_hs, g_moment_induced, limit_mean, ln_stirling_prefactor,
    MomentValue,
};
use gconc::specfun::ComplexValue;
use gconc::{Beta, Error};

mod config;

/// Environment variable that sets the worker count.
const THREADS_ENV: &str = "GCONC_THREADS";

#[derive(Parser, Debug)]
#[command(name = "gconc", version, about = "Exact and sampled statistics of the G-concurrence and det ρ of random pure states")]
struct Cli {
    /// JSON file with default flag values, keyed by long flag name.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Of {
    D,
    G,
}

impl From<Of> for Variable {
    fn from(o: Of) -> Variable {
        match o {
            Of::D => Variable::D,
            Of::G => Variable::G,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DensityMethod {
    Auto,
    Closed,
    Invert,
    Edge,
    Stitched,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Spacing {
    Auto,
    Geometric,
    Linear,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SampleMode {
    /// One row of Schmidt coefficients per sample.
    Spectra,
    /// Histogram of D or G.
    Histogram,
    /// Fit report of the histogram against the exact density.
    Fit,
    /// Empirical moments against the exact ones.
    Moments,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EdgeArg {
    Left,
    Right,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact moments ⟨D^M⟩ or ⟨G^M⟩.
    Moment {
        #[arg(long)]
        n: usize,
        /// Ancilla dimension; uses the induced measure.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = parse_beta)]
        beta: Beta,
        /// Moment order, real or complex (`2`, `-0.5`, `1+3i`, `10i`); repeatable.
        #[arg(long = "m", required = true, value_parser = parse_order, allow_hyphen_values = true)]
        m: Vec<ComplexValue>,
        #[arg(long, value_enum, default_value = "d", ignore_case = true)]
        of: Of,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Density curve P(D) or P(G) as CSV.
    Density {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_beta)]
        beta: Beta,
        #[arg(long, value_enum, default_value = "d", ignore_case = true)]
        of: Of,
        /// Number of grid points.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Grid range; defaults to the open support.
        #[arg(long, allow_negative_numbers = true)]
        lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        hi: Option<f64>,
        /// Grid spacing; `auto` is geometric for D and uniform for G.
        #[arg(long, value_enum, default_value = "auto")]
        spacing: Spacing,
        #[arg(long, value_enum, default_value = "auto")]
        method: DensityMethod,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Edge-expansion coefficients as JSON.
    EdgeCoeffs {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_beta)]
        beta: Beta,
        #[arg(long, value_enum, default_value = "left")]
        edge: EdgeArg,
    },
    /// Monte Carlo: spectra, histograms, fit reports and moment tables.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = parse_beta)]
        beta: Beta,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "spectra")]
        mode: SampleMode,
        #[arg(long, value_enum, default_value = "d", ignore_case = true)]
        of: Of,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Moment orders for `--mode moments`.
        #[arg(long = "m", default_values_t = [1.0, 2.0, 3.0], allow_negative_numbers = true)]
        m: Vec<f64>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Run the property checks; exit 0 when all pass.
    Validate {
        #[arg(long, value_enum, default_value = "quick")]
        suite: SuiteArg,
        #[arg(long, required = true)]
        seed: u64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Large-N limits: 1/e, X_q, and mean/variance tables.
    Limit {
        /// Ratio K/N; alone, prints X_q (1/e at q = 1).
        #[arg(long)]
        q: Option<f64>,
        /// Print the HS asymptote 1/e.
        #[arg(long)]
        asymptote: bool,
        /// Print the mean/variance table along N = Jℓ₁, K = Jℓ₂.
        #[arg(long)]
        table: bool,
        #[arg(long, value_parser = parse_beta, default_value = "2")]
        beta: Beta,
        #[arg(long = "j", value_delimiter = ',', default_values_t = [2usize, 4, 8, 16, 32, 64])]
        j: Vec<usize>,
        /// Add Monte Carlo columns with this many samples per row.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_NK_CAP)]
        nk_cap: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn parse_beta(s: &str) -> Result<Beta, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "real" => Ok(Beta::Real),
        "2" | "complex" => Ok(Beta::Complex),
        _ => Err(format!("β must be 1 (real) or 2 (complex), got `{s}`")),
    }
}

/// `a`, `bi`, `a+bi`, `a-bi`.
fn parse_order(s: &str) -> Result<ComplexValue, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read `{s}` as a real or complex order");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| ComplexValue::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent or leading
    let split = body
        .char_indices()
        .filter(|&(i, c)| {
            (c == '+' || c == '-') && i > 0 && !matches!(body.as_bytes()[i - 1], b'e' | b'E')
        })
        .map(|(i, _)| i)
        .next_back();
    let im_of = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        x => x.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(ComplexValue::new(re, im_of(&body[i..])?))
        }
        None => Ok(ComplexValue::new(0.0, im_of(body)?)),
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(io::Error),
    Usage(String),
    /// Checks ran but did not all pass.
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Core(Error::Contract(_)) => 2,
            Failure::Core(Error::Domain(_) | Error::Pole { .. } | Error::Degenerate(_)) => 3,
            Failure::Core(Error::Accuracy { .. }) | Failure::Checks => 4,
            Failure::Core(Error::Capability(_)) => 5,
            Failure::Core(Error::Partial { .. }) => 6,
            Failure::Io(_) => 1,
        }
    }
}

type Out = Box<dyn Write>;

fn open_output(path: &Option<PathBuf>) -> io::Result<Out> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot configure {n} threads: {e}")))
}

fn spec_of(n: usize, k: Option<usize>, beta: Beta) -> Result<SystemSpec, Error> {
    match k {
        Some(k) => SystemSpec::new(n, k, beta),
        None => SystemSpec::hilbert_schmidt(n, beta),
    }
}

fn g(x: f64) -> String {
    format!("{x:.16e}")
}

fn moment_value(n: usize, k: Option<usize>, beta: Beta, of: Of, m: ComplexValue) -> Result<MomentValue, Error> {
    match (of, k) {
        (Of::D, None) => det_moment_hs(n, beta, m),
        (Of::G, None) => g_moment_hs(n, beta, m),
        (Of::D, Some(k)) => det_moment_induced(n, k, beta, m),
        (Of::G, Some(k)) => g_moment_induced(n, k, beta, m),
    }
}

fn cmd_moment(
    out: &mut Out,
    n: usize,
    k: Option<usize>,
    beta: Beta,
    orders: &[ComplexValue],
    of: Of,
    format: Format,
) -> Result<(), Failure> {
    if let Some(k) = k {
        SystemSpec::new(n, k, beta)?;
    }
    let rows: Vec<(ComplexValue, MomentValue)> = orders
        .iter()
        .map(|&m| moment_value(n, k, beta, of, m).map(|v| (m, v)))
        .collect::<Result<_, _>>()?;
    let kdesc = k.map(|k| k.to_string()).unwrap_or_else(|| "hs".into());
    match format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(m, v)| {
                    let val = v.value();
                    json!({
                        "order": [m.re, m.im],
                        "value": [val.re, val.im],
                        "log_value": [v.log_value.re, v.log_value.im],
                    })
                })
                .collect();
            let doc = json!({"n": n, "k": kdesc, "beta": beta, "of": format!("{of:?}"), "moments": v});
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("plain JSON"))?;
        }
        Format::Csv | Format::Table => {
            writeln!(out, "# moment n={n} k={kdesc} beta={beta} of={of:?}")?;
            writeln!(out, "order_re,order_im,value_re,value_im,log_value_re,log_value_im")?;
            for (m, v) in &rows {
                let val = v.value();
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    g(m.re),
                    g(m.im),
                    g(val.re),
                    g(val.im),
                    g(v.log_value.re),
                    g(v.log_value.im)
                )?;
            }
        }
    }
    Ok(())
}

/// Default D range in y = −ln D − N ln N for geometric grids.
const DEFAULT_Y_SPAN: f64 = 30.0;

fn density_grid(
    n: usize,
    of: Of,
    count: usize,
    lo: Option<f64>,
    hi: Option<f64>,
    spacing: Spacing,
) -> Result<Vec<f64>, Failure> {
    if count < 2 {
        return Err(Failure::Usage("--grid needs at least 2 points".into()));
    }
    let top = match of {
        Of::D => support_edge(n),
        Of::G => 1.0,
    };
    let geometric = match spacing {
        Spacing::Auto => matches!(of, Of::D),
        Spacing::Geometric => true,
        Spacing::Linear => false,
    };
    if lo.is_none() && hi.is_none() {
        return Ok(match (of, geometric) {
            (Of::G, false) => g_grid(count),
            (Of::D, true) => {
                // uniform in y, both support ends excluded
                let h = DEFAULT_Y_SPAN / count as f64;
                d_grid(n, count, 0.5 * h, DEFAULT_Y_SPAN - 0.5 * h)
            }
            (_, true) => geometric_grid(top * 1e-6, top * (1.0 - 1e-9), count),
            (_, false) => {
                let h = top / (count + 1) as f64;
                (1..=count).map(|i| h * i as f64).collect()
            }
        });
    }
    let (lo, hi) = (lo.unwrap_or(0.0), hi.unwrap_or(top));
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Failure::Usage(format!("empty grid range [{lo}, {hi}]")));
    }
    if geometric {
        if lo <= 0.0 {
            return Err(Failure::Usage("geometric spacing needs --lo > 0".into()));
        }
        Ok(geometric_grid(lo, hi, count))
    } else {
        Ok(linear_grid(lo, hi, count))
    }
}

fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect();
    // keep the requested endpoints exact
    g[0] = lo;
    g[count - 1] = hi;
    g
}

fn build_density(
    n: usize,
    beta: Beta,
    of: Of,
    grid: &[f64],
    method: DensityMethod,
) -> Result<DensityCurve, Failure> {
    let var: Variable = of.into();
    let curve = match (method, of) {
        (DensityMethod::Closed, _) if n != 2 => {
            return Err(Error::Capability(format!(
                "closed form exists only for n = 2 (got {n}); use stitched, invert or edge"
            ))
            .into())
        }
        (DensityMethod::Closed, _) | (DensityMethod::Auto, _) if n == 2 => {
            density_n2_closed(beta, var, grid)?
        }
        (DensityMethod::Invert, Of::D) => density_d(n, beta, grid)?,
        (DensityMethod::Invert, Of::G) => density_g(n, beta, grid)?,
        (DensityMethod::Edge, Of::D) => density_d_right_edge(n, beta, grid)?,
        (DensityMethod::Edge, Of::G) => density_g_right_edge(n, beta, grid)?,
        (_, Of::D) => density_d_stitched(n, beta, grid)?,
        (_, Of::G) => density_g_stitched(n, beta, grid)?,
    };
    Ok(curve)
}

#[allow(clippy::too_many_arguments)]
fn cmd_density(
    out: &mut Out,
    n: usize,
    beta: Beta,
    of: Of,
    count: usize,
    lo: Option<f64>,
    hi: Option<f64>,
    spacing: Spacing,
    method: DensityMethod,
    format: Format,
) -> Result<(), Failure> {
    let grid = density_grid(n, of, count, lo, hi, spacing)?;
    let curve = build_density(n, beta, of, &grid, method)?;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&curve).expect("plain JSON"))?,
        _ => {
            writeln!(
                out,
                "# density n={n} beta={beta} of={of:?} method={} integral={} negative_mass={}",
                curve.method,
                g(curve.integral()),
                g(curve.negative_mass)
            )?;
            out.write_all(curve.to_csv().as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_edge_coeffs(out: &mut Out, n: usize, beta: Beta, edge: EdgeArg) -> Result<(), Failure> {
    let doc = match edge {
        EdgeArg::Left => serde_json::to_value(left_edge_coeffs(n, beta)?).expect("plain JSON"),
        EdgeArg::Right => {
            if n < 2 {
                return Err(Error::Domain(format!("n must be ≥ 2, got {n}")).into());
            }
            json!({
                "n": n,
                "beta": beta,
                "edge": Edge::Right,
                "exponent": right_edge_exponent(n, beta),
                "ln_prefactor": ln_stirling_prefactor(n, beta),
                "prefactor_g": right_edge_prefactor_g(n, beta),
                "window_y": right_edge_window(n, beta, EDGE_WINDOW_TOL),
                "window_tolerance": EDGE_WINDOW_TOL,
            })
        }
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("plain JSON"))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    out: &mut Out,
    spec: SystemSpec,
    count: usize,
    seed: u64,
    mode: SampleMode,
    of: Of,
    bins: usize,
    orders: &[f64],
    format: Format,
) -> Result<(), Failure> {
    let header = format!(
        "# sample n={} k={} beta={} count={count} seed={seed}",
        spec.n, spec.k, spec.beta
    );
    match mode {
        SampleMode::Spectra => {
            let spectra = sample_batch(&spec, count, seed)?;
            writeln!(out, "{header}")?;
            write_spectra_csv(&mut *out, &spectra)?;
        }
        SampleMode::Histogram => {
            let h = run_histogram_experiment(&spec, count, bins, of.into(), seed)?;
            if let Format::Json = format {
                writeln!(out, "{}", serde_json::to_string_pretty(&h).expect("plain JSON"))?;
            } else {
                writeln!(out, "{header} of={of:?} bins={bins}")?;
                out.write_all(h.to_csv().as_bytes())?;
            }
        }
        SampleMode::Fit => {
            let h = run_histogram_experiment(&spec, count, bins, of.into(), seed)?;
            let c = reference_curve(&h, 4)?;
            let r = compare_density(&h, &c)?;
            let doc = json!({
                "n": spec.n, "k": spec.k, "beta": spec.beta, "of": format!("{of:?}"),
                "samples": count, "bins": bins, "seed": seed,
                "reference": c.method.to_string(),
                "fit": r,
                "reduced_chi_square": r.reduced_chi_square(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("plain JSON"))?;
        }
        SampleMode::Moments => {
            let rows = moment_check(&spec, count, orders, of.into(), seed)?;
            match format {
                Format::Json => {
                    let doc = json!({
                        "n": spec.n, "k": spec.k, "beta": spec.beta, "of": format!("{of:?}"),
                        "samples": count, "seed": seed, "rows": rows,
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("plain JSON"))?;
                }
                Format::Csv => {
                    writeln!(out, "{header} of={of:?}")?;
                    writeln!(out, "order,exact,empirical,std_error,z_score")?;
                    for r in &rows {
                        writeln!(out, "{},{},{},{},{}", g(r.order), g(r.exact), g(r.empirical), g(r.std_error), g(r.z_score))?;
                    }
                }
                Format::Table => {
                    writeln!(out, "{header} of={of:?}")?;
                    out.write_all(format_moment_table(&rows).as_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_validate(out: &mut Out, suite: SuiteArg, seed: u64, format: Format) -> Result<(), Failure> {
    let suite = match suite {
        SuiteArg::Quick => Suite::Quick,
        SuiteArg::Full => Suite::Full,
    };
    let report = run_validation(suite, seed);
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("plain JSON"))?,
        _ => write!(out, "{report}")?,
    }
    out.flush()?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_limit(
    out: &mut Out,
    q: Option<f64>,
    asymptote: bool,
    table: bool,
    beta: Beta,
    js: &[usize],
    samples: Option<usize>,
    seed: u64,
    nk_cap: usize,
    format: Format,
) -> Result<(), Failure> {
    if asymptote {
        writeln!(out, "{}", g(limit_mean()))?;
    }
    if let (Some(q), false) = (q, table) {
        let x = if q == 1.0 { limit_mean() } else { concentration_point(q)? };
        writeln!(out, "{}", g(x))?;
    }
    if !(table || (q.is_none() && !asymptote)) {
        return Ok(());
    }
    let q = q.unwrap_or(1.0);
    let (l1, l2) = rational_ratio(q)?;
    let target = if l1 == l2 { limit_mean() } else { concentration_point(q)? };
    let mc = match samples {
        Some(s) => Some(concentration_scan(q, js, beta, s, seed, nk_cap)?),
        None => None,
    };
    let mut rows = Vec::new();
    for (i, &j) in js.iter().enumerate() {
        let n = j * l1;
        let k = if l1 == l2 { beta.hs_ancilla(n) } else { j * l2 };
        let (mean, var) = if l1 == l2 {
            g_mean_variance_hs(n, beta)?
        } else {
            g_mean_variance_induced(n, k, beta)?
        };
        rows.push((j, n, k, mean, var, mc.as_ref().map(|r| (r[i].mean_g, r[i].var_g))));
    }
    match format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(j, n, k, mean, var, mc)| {
                    json!({"j": j, "n": n, "k": k, "mean_g": mean, "var_g": var, "target": target,
                           "mc_mean_g": mc.map(|m| m.0), "mc_var_g": mc.map(|m| m.1)})
                })
                .collect();
            let doc = json!({"q": q, "beta": beta, "seed": samples.map(|_| seed), "samples": samples, "rows": v});
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("plain JSON"))?;
        }
        _ => {
            match samples {
                Some(s) => writeln!(out, "# limit q={q} beta={beta} samples={s} seed={seed}")?,
                None => writeln!(out, "# limit q={q} beta={beta}")?,
            }
            let mc_cols = if mc.is_some() { ",mc_mean_g,mc_var_g" } else { "" };
            writeln!(out, "j,n,k,mean_g,var_g,target{mc_cols}")?;
            for (j, n, k, mean, var, m) in &rows {
                write!(out, "{j},{n},{k},{},{},{}", g(*mean), g(*var), g(target))?;
                if let Some((a, b)) = m {
                    write!(out, ",{},{}", g(*a), g(*b))?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let mut out = open_output(&cli.output)?;
    match cli.cmd {
        Cmd::Moment { n, k, beta, m, of, format } => cmd_moment(&mut out, n, k, beta, &m, of, format)?,
        Cmd::Density { n, beta, of, grid, lo, hi, spacing, method, format } => {
            cmd_density(&mut out, n, beta, of, grid, lo, hi, spacing, method, format)?
        }
        Cmd::EdgeCoeffs { n, beta, edge } => cmd_edge_coeffs(&mut out, n, beta, edge)?,
        Cmd::Sample { n, k, beta, count, seed, mode, of, bins, m, format } => {
            let spec = spec_of(n, k, beta)?;
            cmd_sample(&mut out, spec, count, seed, mode, of, bins, &m, format)?
        }
        Cmd::Validate { suite, seed, format } => cmd_validate(&mut out, suite, seed, format)?,
        Cmd::Limit { q, asymptote, table, beta, j, samples, seed, nk_cap, format } => {
            cmd_limit(&mut out, q, asymptote, table, beta, &j, samples, seed, nk_cap, format)?
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // reader went away (`| head`); nothing left to report
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Checks => eprintln!("error: some checks failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
