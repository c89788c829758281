use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use losmap::config::{load_study, IndependenceStudy, Study};
use losmap::estimators::{EstimatorConfig, EstimatorKind, Measurement};
use losmap::geometry::{ObstacleSegment, Occluders, Point2D};
use losmap::harness::{run_experiment, sample_measurements, ExperimentConfig, Sweep};
use losmap::layout_io::{
    buildings_to_csv, clip_to_region, export_coverage_raster, fit_params, layout_raster, layout_to_csv,
    manhattan_layout, read_layout_file, read_measurements, read_points, render_raster, ManhattanSpec, RasterSpec,
};
use losmap::model::{pairwise_independence_error, sample_layout_with, QuadratureSpec, ScenarioParams};
use losmap::par::Execution;
use losmap::Error;

#[derive(Parser, Debug)]
#[command(name = "losmap", version, about = "LOS/NLOS map estimation for a single mmWave cell")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Predict LOS/NLOS at query points from labelled measurements
    Predict(PredictArgs),
    /// Render a coverage raster (ground truth or predicted)
    Map(MapArgs),
    /// Run the experiment described by a config file
    Experiment(ExperimentArgs),
    /// Run a config file's experiment over an explicit sweep
    Sweep(SweepArgs),
    /// Fit density and maximum obstacle length from a layout file
    Fit(FitArgs),
    /// Write a synthetic layout file
    LayoutGen(LayoutGenArgs),
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// Cell radius [m]
    #[arg(long, default_value_t = 150.0)]
    radius_m: f64,
    /// Obstacle density λ [m⁻²]
    #[arg(long, default_value_t = 0.0015)]
    density_per_m2: f64,
    /// Maximum obstacle length; lengths are uniform on [0, max] [m]
    #[arg(long, default_value_t = 20.0)]
    max_length_m: f64,
}

impl ScenarioArgs {
    fn params(&self) -> Result<ScenarioParams, Error> {
        ScenarioParams::uniform(self.radius_m, self.density_per_m2, self.max_length_m)
    }
}

#[derive(Args, Debug, Clone)]
struct EstimatorArgs {
    /// Estimator: MAP, MAP-Bonferroni, kN-MAP, kNN, kNS, PG or NB
    #[arg(long)]
    estimator: Option<String>,
    /// Neighbour count for kN-MAP, kNN and kNS [count]
    #[arg(long)]
    k: Option<usize>,
    /// Parzen window standard deviation [m]
    #[arg(long)]
    sigma_m: Option<f64>,
    /// Highest Bonferroni order before the exact fallback [count]
    #[arg(long)]
    max_bonferroni_order: Option<usize>,
    /// Gauss–Legendre nodes over orientation [count]
    #[arg(long, default_value_t = 64)]
    nodes_theta: usize,
}

impl EstimatorArgs {
    fn build(&self) -> Result<Option<EstimatorConfig>, Error> {
        let Some(name) = &self.estimator else { return Ok(None) };
        let kind: EstimatorKind = name.parse()?;
        let mut est = EstimatorConfig::new(kind);
        if let Some(k) = self.k {
            est.k = k;
        }
        if let Some(s) = self.sigma_m {
            est.sigma = s;
        }
        est.max_bonferroni_order = self.max_bonferroni_order;
        est.quadrature = QuadratureSpec::new(QuadratureSpec::default().nodes_l, self.nodes_theta)?;
        est.validate()?;
        Ok(Some(est))
    }
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Measurement CSV with rows `x,y,label` (label 1 = LOS) [m]
    #[arg(long)]
    measurements: Option<PathBuf>,
    /// Query CSV with rows `x,y` [m]
    #[arg(long, conflicts_with_all = ["x_m", "y_m"])]
    queries: Option<PathBuf>,
    /// Single query x coordinate [m]
    #[arg(long, requires = "y_m", allow_hyphen_values = true)]
    x_m: Option<f64>,
    /// Single query y coordinate [m]
    #[arg(long, requires = "x_m", allow_hyphen_values = true)]
    y_m: Option<f64>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Leave the time_us column empty for reproducible output
    #[arg(long)]
    no_timing: bool,
    /// Output CSV (default: stdout)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MapArgs {
    /// Layout file for ground truth; otherwise a layout is sampled with --seed
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Seed for the sampled layout and sampled measurements
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Predict with this configuration instead of drawing ground truth
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Measurement CSV; otherwise --n-measurements are sampled from the layout
    #[arg(long)]
    measurements: Option<PathBuf>,
    /// Measurements to sample when no file is given [count]
    #[arg(long, default_value_t = 10)]
    n_measurements: usize,
    /// Raster width [px]
    #[arg(long, default_value_t = 128)]
    width_px: usize,
    /// Raster height [px]
    #[arg(long, default_value_t = 128)]
    height_px: usize,
    /// Output PGM raster
    #[arg(long)]
    raster: PathBuf,
    /// Companion CSV of in-disk pixel predictions
    #[arg(long)]
    grid_csv: Option<PathBuf>,
    /// Run pixels sequentially
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment config file
    config: PathBuf,
    /// Report CSV (default: stdout)
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Per-trial log CSV
    #[arg(long)]
    trial_log: Option<PathBuf>,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of trials [count]
    #[arg(long)]
    trials: Option<usize>,
    /// Leave timing columns empty (byte-reproducible output)
    #[arg(long)]
    no_timing: bool,
    /// Run trials sequentially
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Axis {
    /// Measurement count N [count]
    Measurements,
    /// Obstacle density λ [m⁻²]
    Density,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Sweep axis
    #[arg(long, value_enum)]
    axis: Axis,
    /// Comma-separated sweep values (counts or m⁻²)
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Layout file (#segments, #endpoints or #polygons)
    layout: PathBuf,
    /// Region radius [m]
    #[arg(long, default_value_t = 150.0)]
    radius_m: f64,
    /// Obstacles counted per building [count]
    #[arg(long, default_value_t = 2)]
    obstacles_per_building: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum GenKind {
    /// Square buildings on a street grid (#polygons)
    Manhattan,
    /// Segments sampled from the Poisson model (#segments)
    Poisson,
}

#[derive(Args, Debug)]
struct LayoutGenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Manhattan)]
    kind: GenKind,
    /// Output layout file
    #[arg(long, short)]
    output: PathBuf,
    /// Building side for the street grid [m]
    #[arg(long, default_value_t = 28.6)]
    building_m: f64,
    /// Street width for the street grid [m]
    #[arg(long, default_value_t = 21.0)]
    street_m: f64,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Seed for the Poisson layout
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::Config(_)
            | Error::Parse { .. }
            | Error::GridUnachievable { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| {
        Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    }
}

fn cmd_predict(args: &PredictArgs) -> Result<(), Failure> {
    let params = args.scenario.params()?;
    let est = args
        .estimator
        .build()?
        .ok_or_else(|| usage("--estimator is required"))?;
    let data = match &args.measurements {
        Some(p) => read_measurements(p)?,
        None => Vec::new(),
    };
    let queries = match (&args.queries, args.x_m, args.y_m) {
        (Some(p), _, _) => read_points(p)?,
        (None, Some(x), Some(y)) => vec![Point2D::new(x, y)],
        _ => return Err(usage("give --queries or both --x-m and --y-m")),
    };
    let mut out = String::from("x,y,label,posterior,time_us\n");
    for q in queries {
        let start = Instant::now();
        let p = est.predict(&data, q, &params)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e6;
        let _ = write!(out, "{},{},{},", q.x, q.y, p.label());
        if let Some(post) = p.posterior {
            let _ = write!(out, "{post}");
        }
        out.push(',');
        if !args.no_timing {
            let _ = write!(out, "{elapsed:.3}");
        }
        out.push('\n');
    }
    write_output(args.output.as_deref(), &out)
}

fn cmd_map(args: &MapArgs) -> Result<(), Failure> {
    let params = args.scenario.params()?;
    let spec = RasterSpec::new(args.width_px, args.height_px, params.radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let obstacles: Vec<ObstacleSegment> = match &args.layout {
        Some(p) => clip_to_region(&read_layout_file(p)?.obstacles, params.radius),
        None => sample_layout_with(&params, &mut rng),
    };
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };

    let Some(est) = args.estimator.build()? else {
        let pixels = layout_raster(&spec, &obstacles);
        return Ok(export_coverage_raster(&args.raster, &spec, &pixels)?);
    };
    let data: Vec<Measurement> = match &args.measurements {
        Some(p) => read_measurements(p)?,
        None => sample_measurements(
            &Occluders::new(&obstacles),
            params.radius,
            args.n_measurements,
            &mut rng,
        ),
    };
    let centers: Vec<Point2D> = (0..spec.height)
        .flat_map(|row| (0..spec.width).map(move |col| (col, row)))
        .map(|(c, r)| spec.pixel_center(c, r))
        .filter(|p| p.norm() < params.radius)
        .collect();
    let predictions = execution.map_slice(&centers, |&p| est.predict(&data, p, &params));
    let predictions = predictions.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut next = predictions.iter();
    let pixels = render_raster(&spec, |_| next.next().is_some_and(|p| p.los));
    export_coverage_raster(&args.raster, &spec, &pixels)?;
    if let Some(path) = &args.grid_csv {
        let mut out = String::from("x,y,label,posterior\n");
        for (c, p) in centers.iter().zip(&predictions) {
            let _ = write!(out, "{},{},{},", c.x, c.y, p.label());
            if let Some(post) = p.posterior {
                let _ = write!(out, "{post}");
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(io_err(path))?;
    }
    Ok(())
}

fn independence_csv(study: &IndependenceStudy) -> Result<String, Failure> {
    let mut out = String::from("distance_m,theta0_rad,relative_error\n");
    for &d in &study.distances_m {
        for &t in &study.thetas_rad {
            let e = pairwise_independence_error(d, t, &study.params, &study.quadrature)?;
            let _ = writeln!(out, "{d},{t},{e}");
        }
    }
    Ok(out)
}

fn prepare(run: &RunArgs) -> Result<Study, Failure> {
    let mut study = load_study(&run.config)?;
    if let Study::Experiment(cfg) = &mut study {
        if let Some(s) = run.seed {
            cfg.master_seed = s;
        }
        if let Some(t) = run.trials {
            cfg.n_trials = t;
        }
        if run.no_timing {
            cfg.timing = false;
        }
        if run.sequential {
            cfg.execution = Execution::Sequential;
        }
        cfg.trial_log = run.trial_log.is_some();
    }
    Ok(study)
}

fn execute(run: &RunArgs, study: Study) -> Result<(), Failure> {
    match study {
        Study::Independence(s) => write_output(run.output.as_deref(), &independence_csv(&s)?),
        Study::Experiment(cfg) => run_and_write(run, &cfg),
    }
}

fn run_and_write(run: &RunArgs, cfg: &ExperimentConfig) -> Result<(), Failure> {
    let report = run_experiment(cfg)?;
    if let Some(path) = &run.trial_log {
        report.write_trial_log(path)?;
    }
    write_output(run.output.as_deref(), &report.to_csv())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let Study::Experiment(mut cfg) = prepare(&args.run)? else {
        return Err(usage("sweep needs an experiment config"));
    };
    cfg.sweep = Some(match args.axis {
        Axis::Density => Sweep::Density(args.values.clone()),
        Axis::Measurements => Sweep::Measurements(
            args.values
                .iter()
                .map(|&v| {
                    if v >= 0.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(usage(format!("measurement count `{v}` is not a whole number")))
                    }
                })
                .collect::<Result<_, _>>()?,
        ),
    });
    run_and_write(&args.run, &cfg)
}

fn cmd_fit(args: &FitArgs) -> Result<(), Failure> {
    let file = read_layout_file(&args.layout)?;
    let fit = fit_params(&file, args.radius_m, args.obstacles_per_building)?;
    println!("density_per_m2,max_length_m,avg_perimeter_m,obstacle_count");
    println!(
        "{},{},{},{}",
        fit.density, fit.max_length, fit.avg_perimeter, fit.obstacle_count
    );
    Ok(())
}

fn cmd_layout_gen(args: &LayoutGenArgs) -> Result<(), Failure> {
    let text = match args.kind {
        GenKind::Manhattan => buildings_to_csv(&manhattan_layout(&ManhattanSpec {
            radius: args.scenario.radius_m,
            building_size: args.building_m,
            street_width: args.street_m,
        })?),
        GenKind::Poisson => {
            let params = args.scenario.params()?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            layout_to_csv(&sample_layout_with(&params, &mut rng))
        }
    };
    std::fs::write(&args.output, text).map_err(io_err(&args.output))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Predict(a) => cmd_predict(a),
        Command::Map(a) => cmd_map(a),
        Command::Experiment(a) => prepare(&a.run).and_then(|s| execute(&a.run, s)),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fit(a) => cmd_fit(a),
        Command::LayoutGen(a) => cmd_layout_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
