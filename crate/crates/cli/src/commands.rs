use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use qbs_kernel::geometry::{dirac_blur, uniform_blur, BlurringDensity};
use qbs_kernel::io::{csv_header, fmt17, svg_line_chart, Series};
use qbs_kernel::kernel::{
    auto_grid, auto_grid_with_resolution, compute_kernel, empirical_moments, spectral_propagate,
    InitialCondition, SpectralOptions,
};
use qbs_kernel::pricing::{
    build_smile_with, implied_vol, price_with_kernel, pricing_kernel, skew_term_structure, OptionSide,
    OptionSpec, VolConvention,
};
use qbs_kernel::simulate::{ensemble_stats, run_particle_method, sample_oracle, ParticleConfig};
use qbs_kernel::validate::run_invariant_suite;
use qbs_kernel::{
    fit_metric_weights, lemma1_moments, lemma2_moments, triangular_blur, Error, Kernel, Params, Truncation,
    DAYS_PER_YEAR,
};
use serde::Serialize;

use crate::args::{
    BlurArg, Cli, Command, ConventionArg, FitArgs, GeneratorArg, KernelArgs, KernelMethodArg, MomentsArgs,
    PriceArgs, SideArg, SimulateArgs, SmileArgs,
};
use crate::config::{pick, FileConfig, OneOrMany};
use crate::CliError;

const DEFAULT_SIGMA: f64 = 0.2;
const DEFAULT_EPSILON: f64 = 0.01;
const KERNEL_EPSILONS: [f64; 5] = [0.0, 0.005, -0.005, 0.01, -0.01];

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    if let Some(n) = cli.threads.or(file.threads) {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let out = pick(cli.out, file.out.clone(), PathBuf::from("."));
    let out = Output::new(out)?;
    match cli.command {
        Command::Kernel(a) => kernel(a, &file, &out),
        Command::Moments(a) => moments(a, &file, &out),
        Command::FitMetric(a) => fit_metric(a, &file, &out),
        Command::Simulate(a) => simulate(a, &file, &out),
        Command::Price(a) => price(a, &file, &out),
        Command::Smile(a) => smile(a, &file, &out),
        Command::Validate => validate(),
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn write_with(&self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> qbs_kernel::Result<()>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }
}

fn one(flag: Option<f64>, file: &Option<OneOrMany>, key: &str, default: f64) -> Result<f64, CliError> {
    let file = file.clone().map(|v| v.single(key)).transpose()?;
    Ok(pick(flag, file, default))
}

fn many(flag: Option<Vec<f64>>, file: &Option<OneOrMany>, default: &[f64]) -> Vec<f64> {
    pick(flag, file.clone().map(OneOrMany::into_vec), default.to_vec())
}

fn parse_truncation(s: &str) -> Result<Truncation, CliError> {
    let t = if s.eq_ignore_ascii_case("closed") {
        Truncation::ClosedForm
    } else {
        let k = s
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("truncation must be `closed` or an integer, got `{s}`")))?;
        Truncation::Series(k)
    };
    Ok(t.validate()?)
}

fn truncation_label(t: Truncation) -> String {
    match t {
        Truncation::ClosedForm => "closed".into(),
        Truncation::Series(k) => k.to_string(),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn kernel(a: KernelArgs, file: &FileConfig, out: &Output) -> Result<(), CliError> {
    let sigma = pick(a.model.sigma, file.sigma, DEFAULT_SIGMA);
    let t = pick(a.model.t, file.t, 1.0 / DAYS_PER_YEAR);
    let epsilons = many(a.epsilon, &file.epsilon, &KERNEL_EPSILONS);
    let method = pick(a.method, file.method, KernelMethodArg::Fourier);
    let trunc = parse_truncation(&pick(a.truncation, file.truncation.clone(), "closed".into()))?;
    let filter = a.filter || file.filter.unwrap_or(false);
    let pps = a.points_per_std.or(file.points_per_std);
    if epsilons.is_empty() {
        return Err(CliError::Config("at least one epsilon is required".into()));
    }
    if pps == Some(0) {
        return Err(CliError::Config("points-per-std must be positive".into()));
    }
    if method == KernelMethodArg::Fourier && trunc != Truncation::ClosedForm {
        return Err(CliError::Config("a series truncation needs --method spectral".into()));
    }

    let mut kernels: Vec<(f64, Kernel)> = Vec::new();
    for &eps in &epsilons {
        let p = Params::new(sigma, eps, t)?;
        let grid = match pps {
            Some(n) => auto_grid_with_resolution(&p, n),
            None => auto_grid(&p),
        };
        let k = match method {
            KernelMethodArg::Fourier => compute_kernel(&p, &grid)?,
            KernelMethodArg::Spectral => {
                let init = InitialCondition::PointMass { grid, x0: 0.0 };
                spectral_propagate(&init, &p, trunc, t, SpectralOptions { filter })?
            }
        };
        let m = empirical_moments(&k, 4)?;
        println!(
            "epsilon={eps} form={:?} n={} integral={:.12} skewness={:.6} excess_kurtosis={:.6}",
            k.form,
            k.grid.n,
            k.integral(),
            m.skewness(),
            m.excess_kurtosis()
        );
        if let Some((lo, hi)) = k.meta.filtered_band {
            println!("epsilon={eps} filtered {} modes with |p| in [{lo}, {hi}]", k.meta.filtered_modes);
        }
        kernels.push((eps, k));
    }

    let mut csv = csv_header(
        &[("sigma", sigma), ("horizon", t)],
        &[
            ("epsilon", join(&epsilons)),
            ("method", format!("{method:?}").to_lowercase()),
            ("truncation", truncation_label(trunc)),
            ("filter", filter.to_string()),
            ("points-per-std", pps.map_or("auto".into(), |n| n.to_string())),
        ],
    );
    csv.push_str("\nepsilon,x,density\n");
    for (eps, k) in &kernels {
        for (i, v) in k.values.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", fmt17(*eps), fmt17(k.grid.x(i)), fmt17(*v));
        }
    }
    out.write("kernel.csv", csv.as_bytes())?;

    let series: Vec<Series> = kernels
        .iter()
        .map(|(eps, k)| {
            let sd = k.params.std_dev();
            Series {
                label: format!("eps = {eps}"),
                points: (0..k.grid.n)
                    .map(|i| (k.grid.x(i), k.values[i]))
                    .filter(|(x, _)| x.abs() <= 5.0 * sd)
                    .collect(),
            }
        })
        .collect();
    let title = format!("Kernel, sigma = {sigma}, t = {t}");
    out.write("kernel.svg", svg_line_chart(&title, "x", "density", &series).as_bytes())
}

fn moments(a: MomentsArgs, file: &FileConfig, out: &Output) -> Result<(), CliError> {
    let eps = one(a.epsilon, &file.epsilon, "epsilon", DEFAULT_EPSILON)?;
    let alpha = pick(a.alpha, file.alpha, 0.0);
    let order = pick(a.order, file.order, 8);
    if !eps.is_finite() || !alpha.is_finite() {
        return Err(CliError::Config("epsilon and alpha must be finite".into()));
    }
    let seq = if alpha == 0.0 { lemma1_moments(eps, order) } else { lemma2_moments(eps, alpha, order)? };
    let worst = seq.recurrence_residuals().iter().fold(0.0f64, |a, r| a.max(r.abs()));
    for (i, v) in seq.values.iter().enumerate() {
        println!("H_{i} = {v:e}");
    }
    println!("max recurrence residual {worst:e}");
    let header = csv_header(&[("epsilon", eps), ("alpha", alpha)], &[("order", order.to_string())]);
    out.write_with("moments.csv", |w| seq.write_csv(w, &header))
}

fn fit_metric(a: FitArgs, file: &FileConfig, out: &Output) -> Result<(), CliError> {
    let shape = pick(a.blur, file.blur, BlurArg::Triangular);
    let eps = one(a.epsilon, &file.epsilon, "epsilon", DEFAULT_EPSILON)?;
    let order = pick(a.order, file.order, 8);
    let blur: BlurringDensity = match shape {
        BlurArg::Triangular => triangular_blur(eps)?,
        BlurArg::Uniform => uniform_blur(pick(a.lo, file.lo, 0.0), pick(a.hi, file.hi, eps))?,
        BlurArg::Dirac => dirac_blur(pick(a.at, file.at, 0.0)),
    };
    let header = csv_header(
        &[("epsilon", eps)],
        &[("blur", format!("{shape:?}").to_lowercase()), ("order", order.to_string())],
    );
    match fit_metric_weights(&blur, eps, order) {
        Ok(fit) => {
            println!("max residual {:e}, pinned nodes {}", fit.max_residual(), fit.pinned);
            out.write_with("metric_fit.csv", |w| fit.write_csv(w, &header))
        }
        Err(Error::Infeasible { residuals, max_residual }) => {
            let mut csv = format!("{header}\nmoment,residual\n");
            for (i, r) in residuals.iter().enumerate() {
                let _ = writeln!(csv, "{i},{}", fmt17(*r));
            }
            out.write("metric_fit_residuals.csv", csv.as_bytes())?;
            Err(Error::Infeasible { residuals, max_residual }.into())
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct SimulationReport {
    generator: GeneratorArg,
    reference_epsilon: f64,
    stats: qbs_kernel::EnsembleStats,
    floored: usize,
}

fn simulate(a: SimulateArgs, file: &FileConfig, out: &Output) -> Result<(), CliError> {
    let sigma = pick(a.model.sigma, file.sigma, DEFAULT_SIGMA);
    let t = pick(a.model.t, file.t, 1.0 / DAYS_PER_YEAR);
    let eps = one(a.epsilon, &file.epsilon, "epsilon", DEFAULT_EPSILON)?;
    let generator = pick(a.generator, file.generator, GeneratorArg::Oracle);
    let n = pick(a.samples, file.samples, 100_000);
    let seed = pick(a.seed, file.seed, 1);
    let steps = pick(a.steps, file.steps, ParticleConfig::default().steps);
    let p = Params::new(sigma, eps, t)?;
    let (ensemble, reference_epsilon) = match generator {
        GeneratorArg::Oracle => (sample_oracle(&p, n, seed)?, eps),
        GeneratorArg::Particle => {
            let blur = if eps == 0.0 { dirac_blur(0.0) } else { triangular_blur(eps)? };
            let cfg = ParticleConfig { particles: n, steps, ..ParticleConfig::default() };
            // the McKean dynamics blur towards +epsilon, mirroring the kernel law
            (run_particle_method(&blur, sigma, t, &cfg, seed)?, -eps)
        }
    };
    let rp = p.with_epsilon(reference_epsilon)?;
    let reference = compute_kernel(&rp, &auto_grid(&rp))?;
    let stats = ensemble_stats(&ensemble, Some(&reference))?;
    println!(
        "n={} mean={:e} variance={:e} skewness={:.6} excess_kurtosis={:.6} ks={:.6}",
        stats.n,
        stats.mean,
        stats.variance,
        stats.skewness,
        stats.excess_kurtosis,
        stats.ks.unwrap_or(f64::NAN)
    );
    out.write_with("samples.csv", |w| ensemble.write_csv(w))?;
    let report = SimulationReport { generator, reference_epsilon, stats, floored: ensemble.floored };
    let mut json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    json.push(b'\n');
    out.write("stats.json", &json)
}

fn side_of(s: SideArg) -> OptionSide {
    match s {
        SideArg::Call => OptionSide::Call,
        SideArg::Put => OptionSide::Put,
    }
}

fn convention_of(c: ConventionArg) -> VolConvention {
    match c {
        ConventionArg::Normal => VolConvention::Normal,
        ConventionArg::Lognormal => VolConvention::Lognormal,
    }
}

fn price(a: PriceArgs, file: &FileConfig, out: &Output) -> Result<(), CliError> {
    let sigma = pick(a.model.sigma, file.sigma, DEFAULT_SIGMA);
    let t = pick(a.model.t, file.t, 1.0 / DAYS_PER_YEAR);
    let eps = one(a.epsilon, &file.epsilon, "epsilon", DEFAULT_EPSILON)?;
    let spot = pick(a.spot, file.spot, 1.0);
    let strikes = many(a.strikes, &file.strikes, &[spot]);
    let side = pick(a.side, file.side, SideArg::Call);
    let convention = pick(a.convention, file.convention, ConventionArg::Normal);
    let p = Params::new(sigma, eps, t)?;
    let kernel = pricing_kernel(&p)?;
    let mut csv = csv_header(
        &[("sigma", sigma), ("epsilon", eps), ("horizon", t), ("spot", spot)],
        &[
            ("side", format!("{side:?}").to_lowercase()),
            ("convention", format!("{convention:?}").to_lowercase()),
        ],
    );
    csv.push_str("\nstrike,price,implied_vol\n");
    for &strike in &strikes {
        let spec = OptionSpec { spot, strike, maturity: t, side: side_of(side) };
        let at = |e: Error| Error::AtPoint { maturity: t, strike, source: Box::new(e) };
        let v = price_with_kernel(&spec, &kernel).map_err(at)?;
        let vol = implied_vol(v, &spec, convention_of(convention)).map_err(at)?;
        println!("strike={strike} price={v:e} implied_vol={vol:.8}");
        let _ = writeln!(csv, "{},{},{}", fmt17(strike), fmt17(v), fmt17(vol));
    }
    out.write("price.csv", csv.as_bytes())
}

fn smile(a: SmileArgs, file: &FileConfig, out: &Output) -> Result<(), CliError> {
    let sigma = pick(a.sigma, file.sigma, DEFAULT_SIGMA);
    let eps = one(a.epsilon, &file.epsilon, "epsilon", DEFAULT_EPSILON)?;
    let spot = pick(a.spot, file.spot, 1.0);
    let maturities = many(a.maturities, &file.maturities, &[1.0 / DAYS_PER_YEAR, 1.0 / 52.0, 1.0 / 12.0, 1.0]);
    let default_offsets: Vec<f64> = (-4..=4).map(|i| 0.5 * i as f64).collect();
    let offsets = many(a.offsets, &file.offsets, &default_offsets);
    let convention = pick(a.convention, file.convention, ConventionArg::Normal);
    let p = Params::new(sigma, eps, 1.0)?;
    let surface = build_smile_with(&p, spot, &maturities, &offsets, convention_of(convention))?;
    out.write_with("smile.csv", |w| surface.write_csv(w))?;

    match skew_term_structure(&surface) {
        Ok(skew) => {
            let mut csv = csv_header(&[("sigma", sigma), ("epsilon", eps), ("spot", spot)], &[]);
            csv.push_str("\nmaturity,slope_per_stdev,slope_per_strike\n");
            for s in &skew {
                println!("maturity={} slope_per_stdev={:e} slope_per_strike={:e}", s.maturity, s.slope_per_stdev, s.slope_per_strike);
                let _ = writeln!(csv, "{},{},{}", fmt17(s.maturity), fmt17(s.slope_per_stdev), fmt17(s.slope_per_strike));
            }
            out.write("skew.csv", csv.as_bytes())?;
        }
        Err(e) => eprintln!("skew not computed: {e}"),
    }

    let series: Vec<Series> = surface
        .maturities
        .iter()
        .zip(&surface.vols)
        .map(|(t, vols)| Series {
            label: format!("t = {:.4}", t),
            points: surface.offsets.iter().copied().zip(vols.iter().copied()).collect(),
        })
        .collect();
    let y_label = match convention {
        ConventionArg::Normal => "normal implied vol",
        ConventionArg::Lognormal => "lognormal implied vol",
    };
    let title = format!("Smile, sigma = {sigma}, epsilon = {eps}");
    out.write("smile.svg", svg_line_chart(&title, "strike offset (sd)", y_label, &series).as_bytes())
}

fn validate() -> Result<(), CliError> {
    let checks = run_invariant_suite();
    let mut stdout = std::io::stdout().lock();
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        let _ = writeln!(stdout, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}
