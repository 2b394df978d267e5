use std::fs::File;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Args, CliError, Command, Dim, RunConfig, OUTPUT_DIR_ENV};
use crate::base_state::{mu_star_2d, mu_star_3d, BaseState};
use crate::mode_dynamics::{
    classify_multipliers, decay_from_grid, mode0_decay_check, mode_multipliers, mu_star_from_mode2, Classification,
    ModeGrid,
};
use crate::periodic_orbit::{find_periodic_radius, mean_nutrient, PeriodicRadius};
use crate::spectral::io::{read_coeffs_csv, write_coeffs_csv, CoeffEnvelope};
use crate::spectral::{evolve_boundary, BoundaryPerturbation, EvolveOptions, ShCoeffs, SphereGrid};

type CliResult<T> = std::result::Result<T, CliError>;

/// Terminal summary and the files written.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: PathBuf) -> CliResult<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.into()))?;
        text.push('\n');
        std::fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    fn coeffs(&mut self, stem: &str, coeffs: &ShCoeffs) -> CliResult<()> {
        let path = self.dir.join(format!("{stem}.csv"));
        write_coeffs_csv(File::create(&path)?, coeffs)?;
        self.files.push(path);
        self.json(&format!("{stem}.json"), &CoeffEnvelope::new(coeffs, Some(&SphereGrid::for_degree(coeffs.n_max()))))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(io),
        other => CliError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn output_dir(args: &Args, cfg: &RunConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load_config(args: &Args) -> CliResult<RunConfig> {
    let path = args.config.as_deref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(n) = args.n_scan {
        cfg.modes.n_scan = n;
    }
    if let Some(t) = args.t_end {
        cfg.evolve.t_end = t;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(dim) = args.dim {
        cfg.threshold.dim2 = dim == Dim::Two;
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// Runs the selected command.
pub fn run(args: &Args) -> CliResult<Report> {
    let cfg = load_config(args)?;
    let mut out = Output::new(output_dir(args, &cfg))?;
    let lines = match args.command {
        Command::Orbit => orbit(&cfg, &mut out)?,
        Command::Threshold => threshold(&cfg, &mut out)?,
        Command::Modes => modes(&cfg, &mut out)?,
        Command::Evolve => evolve(&cfg, &mut out)?,
    };
    Ok(Report { lines, files: out.files })
}

#[derive(Serialize)]
struct OrbitSummary {
    period: f64,
    intervals: usize,
    iterations: usize,
    periodicity_residual: f64,
    ode_residual: f64,
    min_radius: f64,
    max_radius: f64,
    mean_radius: f64,
}

impl From<&PeriodicRadius> for OrbitSummary {
    fn from(o: &PeriodicRadius) -> Self {
        Self {
            period: o.period(),
            intervals: o.intervals(),
            iterations: o.iterations(),
            periodicity_residual: o.periodicity_residual(),
            ode_residual: o.ode_residual(),
            min_radius: o.min(),
            max_radius: o.max(),
            mean_radius: o.mean(),
        }
    }
}

fn orbit(cfg: &RunConfig, out: &mut Output) -> CliResult<Vec<String>> {
    let phi = cfg.nutrient()?;
    let params = cfg.model_params(&phi)?;
    let orbit = find_periodic_radius(&params, &phi, &cfg.orbit)?;
    let rows = orbit
        .times()
        .into_iter()
        .zip(orbit.values().iter().zip(orbit.derivs()))
        .map(|(t, (r, d))| vec![num(t), num(*r), num(*d)]);
    out.csv("orbit.csv", &["t", "radius", "radius_rate"], rows)?;

    #[derive(Serialize)]
    struct Summary {
        mu: f64,
        sigma_tilde: f64,
        mean_nutrient: f64,
        orbit: OrbitSummary,
    }
    let summary = Summary {
        mu: params.mu,
        sigma_tilde: params.sigma_tilde,
        mean_nutrient: mean_nutrient(&phi),
        orbit: OrbitSummary::from(&orbit),
    };
    out.json("orbit.json", &summary)?;
    Ok(vec![format!(
        "periodic radius in [{:.6}, {:.6}], |R(T) - R(0)| = {:.2e}",
        orbit.min(),
        orbit.max(),
        orbit.periodicity_residual()
    )])
}

fn threshold(cfg: &RunConfig, out: &mut Output) -> CliResult<Vec<String>> {
    let phi = cfg.nutrient()?;
    let sigma_tilde = cfg.params.sigma_tilde;
    let opts = cfg.threshold_options();
    let three = mu_star_3d(sigma_tilde, &phi, &opts)?;
    let root = mu_star_from_mode2(sigma_tilde, &phi, &opts)?;
    let two = if cfg.threshold.dim2 { Some(mu_star_2d(sigma_tilde, &phi, &opts)?) } else { None };

    #[derive(Serialize)]
    struct Summary {
        sigma_tilde: f64,
        mean_nutrient: f64,
        mu_star_3d: f64,
        mu_star_mode2_root: f64,
        relative_gap: f64,
        mu_star_2d: Option<f64>,
        orbit_at_mu_star: OrbitSummary,
    }
    let summary = Summary {
        sigma_tilde,
        mean_nutrient: mean_nutrient(&phi),
        mu_star_3d: three.mu_star,
        mu_star_mode2_root: root,
        relative_gap: (root - three.mu_star).abs() / three.mu_star,
        mu_star_2d: two.as_ref().map(|t| t.mu_star),
        orbit_at_mu_star: OrbitSummary::from(&three.orbit),
    };
    out.json("threshold.json", &summary)?;
    let mut lines = vec![
        format!("mu* (3D) = {:.12e}", three.mu_star),
        format!("mode-2 root = {:.12e} (relative gap {:.1e})", root, summary.relative_gap),
    ];
    if let Some(t) = two {
        lines.push(format!("mu* (2D, on the 3D orbit) = {:.12e}", t.mu_star));
    }
    Ok(lines)
}

fn verdict(c: &Classification) -> String {
    match c {
        Classification::Stable => "stable (modulo translation)".into(),
        Classification::ThresholdAdjacent { n } => format!("threshold-adjacent: |Lambda_{n}| within tolerance"),
        Classification::Unstable { first_unstable_n } => format!("unstable: first unstable mode n = {first_unstable_n}"),
    }
}

fn modes(cfg: &RunConfig, out: &mut Output) -> CliResult<Vec<String>> {
    let phi = cfg.nutrient()?;
    let state = BaseState::new(cfg.model_params(&phi)?, phi, &cfg.orbit)?;
    let grid = ModeGrid::new(&state, cfg.modes.n_scan);
    let table = mode_multipliers(&grid);
    let lambdas: Vec<f64> = table.iter().map(|m| m.log_multiplier).collect();
    let class = classify_multipliers(&lambdas, &cfg.modes);
    let tol = cfg.modes.tol;
    let rows = table.iter().map(|m| {
        let status = if m.n == 1 {
            "neutral"
        } else if m.log_multiplier > tol {
            "growing"
        } else if m.log_multiplier.abs() <= tol {
            "threshold"
        } else {
            "decaying"
        };
        vec![m.n.to_string(), num(m.log_multiplier), status.to_string(), m.decay_delta.map(num).unwrap_or_default()]
    });
    out.csv("modes.csv", &["n", "log_multiplier", "status", "decay_rate"], rows)?;

    let fit = match class {
        Classification::Stable => Some(decay_from_grid(&grid, cfg.modes.n_scan)?),
        _ => None,
    };
    let mode0 = mode0_decay_check(&state, 4);

    #[derive(Serialize)]
    struct Summary {
        mu: f64,
        sigma_tilde: f64,
        n_scan: usize,
        tol: f64,
        classification: Classification,
        verdict: String,
        delta: Option<f64>,
        binding_mode: Option<usize>,
        mode0_constant: f64,
        mode0_rate: f64,
    }
    let summary = Summary {
        mu: state.params().mu,
        sigma_tilde: state.params().sigma_tilde,
        n_scan: cfg.modes.n_scan,
        tol,
        classification: class,
        verdict: verdict(&class),
        delta: fit.map(|f| f.delta),
        binding_mode: fit.map(|f| f.binding_mode),
        mode0_constant: mode0.constant,
        mode0_rate: mode0.rate,
    };
    out.json("modes.json", &summary)?;
    Ok(vec![summary.verdict])
}

fn initial_coeffs(cfg: &RunConfig) -> CliResult<ShCoeffs> {
    let e = &cfg.evolve;
    match &e.init {
        Some(path) => {
            let file = File::open(path).map_err(|err| CliError::Config(format!("cannot open {}: {err}", path.display())))?;
            let c = read_coeffs_csv(file, None).map_err(|err| CliError::Config(err.to_string()))?;
            if c.n_max() > e.n_max {
                return Err(CliError::Config(format!(
                    "initial coefficients reach degree {} beyond evolve.n_max = {}",
                    c.n_max(),
                    e.n_max
                )));
            }
            Ok(ShCoeffs::from_fn(e.n_max, |n, m| c.get(n, m)))
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok(ShCoeffs::from_fn(e.n_max, |n, _| {
                let v = rng.gen_range(-1.0..=1.0) * e.random_amplitude;
                if n <= e.random_degree {
                    v
                } else {
                    0.0
                }
            }))
        }
    }
}

fn evolve(cfg: &RunConfig, out: &mut Output) -> CliResult<Vec<String>> {
    let phi = cfg.nutrient()?;
    let state = BaseState::new(cfg.model_params(&phi)?, phi, &cfg.orbit)?;
    let e = &cfg.evolve;
    let grid = ModeGrid::new(&state, e.n_max.max(cfg.modes.n_scan));
    let class = classify_multipliers(&grid.log_multipliers(), &cfg.modes);
    if e.require_decay && class != Classification::Stable {
        return Err(CliError::NotDecaying(verdict(&class)));
    }

    let init = BoundaryPerturbation::new(initial_coeffs(cfg)?, e.epsilon)?;
    init.check_positive(state.orbit().min(), &SphereGrid::for_degree(e.n_max))?;
    out.coeffs("initial_coefficients", &init.coeffs)?;
    let opts = EvolveOptions { t_end: e.t_end, stride: cfg.orbit.steps / e.samples_per_period, epsilon: e.epsilon };
    let run = evolve_boundary(&grid, &init, None, &opts)?;

    out.csv(
        "deviation.csv",
        &["t", "deviation"],
        run.times.iter().zip(&run.deviation).map(|(t, d)| vec![num(*t), num(*d)]),
    )?;
    out.csv(
        "centers.csv",
        &["t", "a1", "a2", "a3"],
        run.times.iter().zip(&run.centers).map(|(t, a)| vec![num(*t), num(a[0]), num(a[1]), num(a[2])]),
    )?;
    let amplitude_rows = run.times.iter().zip(&run.coeffs).flat_map(|(t, c)| {
        c.iter().map(move |(n, m, v)| vec![num(*t), n.to_string(), m.to_string(), num(v)])
    });
    out.csv("amplitudes.csv", &["t", "n", "m", "value"], amplitude_rows)?;

    let d0 = run.deviation[0];
    let d_end = *run.deviation.last().expect("at least one sample");
    let ratio = if d0 > 0.0 { d_end / d0 } else { 0.0 };
    let converged = ratio < e.decay_factor;

    #[derive(Serialize)]
    struct Summary<'a> {
        mu: f64,
        classification: Classification,
        epsilon: f64,
        t_end: f64,
        samples: usize,
        seed: u64,
        initial_deviation: f64,
        final_deviation: f64,
        ratio: f64,
        decay_factor: f64,
        converged: bool,
        initial_center: [f64; 3],
        final_center: [f64; 3],
        init_source: &'a str,
    }
    let summary = Summary {
        mu: state.params().mu,
        classification: class,
        epsilon: e.epsilon,
        t_end: e.t_end,
        samples: run.times.len(),
        seed: cfg.seed,
        initial_deviation: d0,
        final_deviation: d_end,
        ratio,
        decay_factor: e.decay_factor,
        converged,
        initial_center: run.centers[0],
        final_center: *run.centers.last().expect("at least one sample"),
        init_source: if e.init.is_some() { "file" } else { "random" },
    };
    out.json("evolve.json", &summary)?;
    let line = format!("d(t_end)/d(0) = {ratio:.6e}");
    if converged {
        Ok(vec![format!("converged to translated sphere ({line})")])
    } else if e.require_decay {
        Err(CliError::NotConverged(format!("{line} is not below {}", e.decay_factor)))
    } else {
        Ok(vec![format!("not converged ({line})")])
    }
}
