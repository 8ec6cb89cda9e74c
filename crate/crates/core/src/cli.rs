//! Command-line front end.
//!
//! ```text
//! cpd-topo --benchmark cantilever-distributed --vc 0.3 --mu 0.89 --beta 4000 --out run1
//! cpd-topo --problem beam.toml --method simp --out run2
//! ```
//!
//! Each run writes `density.vtk`, `convergence.csv` and `summary.toml` to the
//! output directory (`--out`, or `$CPD_TOPO_OUT`). Exit status is 0 on
//! success, 1 when the optimization fails and 2 on usage errors.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgGroup, Parser, ValueEnum};
use log::{error, info};

use crate::cpd::{self, CpdConfig};
use crate::error::{Error, Result};
use crate::io::{
    default_out_dir, generate_benchmark, load_problem, write_summary, write_vtk, BenchmarkSpec,
    ConvergenceLog, Hole, RunSummary, OUT_DIR_ENV,
};
use crate::mesh::ProblemDef;
use crate::simp::{self, SimpConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Cpd,
    Simp,
}

#[derive(Debug, Parser)]
#[command(
    name = "cpd-topo",
    version,
    about = "Voxel topology optimization by canonical penalty-duality",
    arg_required_else_help = true,
    group(ArgGroup::new("input").required(true).args(["benchmark", "problem"]))
)]
pub struct Args {
    /// Built-in benchmark name.
    #[arg(long, value_name = "NAME")]
    pub benchmark: Option<String>,
    /// Problem file (TOML, schema cpd-problem/1).
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
    /// Benchmark mesh size as NX,NY,NZ.
    #[arg(long, value_delimiter = ',', value_name = "NX,NY,NZ")]
    pub dims: Option<Vec<usize>>,
    /// Target volume fraction.
    #[arg(long)]
    pub vc: Option<f64>,
    /// Volume reduction rate.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Perturbation parameter.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Inner (dual) tolerance.
    #[arg(long)]
    pub omega1: Option<f64>,
    /// Outer design-change tolerance.
    #[arg(long)]
    pub omega2: Option<f64>,
    /// Void Young's modulus.
    #[arg(long)]
    pub emin: Option<f64>,
    /// Total benchmark load.
    #[arg(long)]
    pub load: Option<f64>,
    /// Hole center and radius for cantilever-hole, as X,Y,R.
    #[arg(long, value_delimiter = ',', value_name = "X,Y,R")]
    pub hole: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "cpd")]
    pub method: Method,
    /// Output directory; defaults to $CPD_TOPO_OUT.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Outer iteration cap (CPD steps or SIMP iterations).
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long, default_value = "warn", value_parser = ["error", "warn", "info", "debug", "trace", "off"])]
    pub log_level: String,
}

/// Run the CLI on `args` (including the program name) and return the exit
/// status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() || !matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                2
            } else {
                0
            };
        }
    };
    let _ = env_logger::Builder::new()
        .parse_filters(&args.log_level)
        .format_timestamp(None)
        .try_init();

    let Some(out) = args.out.clone().or_else(default_out_dir) else {
        eprintln!("error: no output directory: pass --out DIR or set {OUT_DIR_ENV}");
        return 2;
    };
    match run(&args, out) {
        Ok(()) => 0,
        Err(e @ (Error::InvalidArgument(_) | Error::Parse { .. })) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            1
        }
    }
}

fn build_problem(args: &Args) -> Result<(ProblemDef, String, CpdConfig)> {
    let (mut problem, label, mut config) = if let Some(name) = &args.benchmark {
        let mut spec = BenchmarkSpec::new(name)?;
        if let Some(d) = &args.dims {
            let &[x, y, z] = &d[..] else {
                return Err(Error::InvalidArgument("--dims takes NX,NY,NZ".into()));
            };
            spec = spec.with_dims([x, y, z]);
        }
        if let Some(h) = &args.hole {
            let &[x, y, r] = &h[..] else {
                return Err(Error::InvalidArgument("--hole takes X,Y,R".into()));
            };
            spec = spec.with_hole(Hole {
                center: [x, y],
                radius: r,
            });
        }
        if let Some(load) = args.load {
            spec.load = load;
        }
        if let Some(vc) = args.vc {
            spec.volume_fraction = vc;
        }
        (generate_benchmark(&spec)?, name.clone(), spec.cpd_config())
    } else {
        let path = args.problem.as_ref().expect("clap enforces one input");
        if args.dims.is_some() || args.hole.is_some() || args.load.is_some() {
            return Err(Error::InvalidArgument(
                "--dims, --hole and --load apply to benchmarks only".into(),
            ));
        }
        let p = load_problem(path)?;
        (p, path.display().to_string(), CpdConfig::default())
    };
    if let Some(vc) = args.vc {
        problem.volume_fraction = vc;
    }
    if let Some(emin) = args.emin {
        problem.material = problem.material.with_min(emin);
    }
    problem.validate()?;
    config.volume_fraction = Some(problem.volume_fraction);
    if let Some(mu) = args.mu {
        config.mu = mu;
    }
    if let Some(beta) = args.beta {
        config.beta = beta;
    }
    if let Some(w) = args.omega1 {
        config.omega1 = w;
    }
    if let Some(w) = args.omega2 {
        config.omega2 = w;
    }
    if let Some(m) = args.max_outer {
        config.max_outer = m;
    }
    Ok((problem, label, config))
}

fn run(args: &Args, out: PathBuf) -> Result<()> {
    let (problem, label, config) = build_problem(args)?;
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let start = Instant::now();
    let mut log = ConvergenceLog::create(out.join("convergence.csv"))?;

    let outcome = match args.method {
        Method::Cpd => cpd::run_with(&problem, &config, |s| log.append(s))
            .map(|res| (res.density, res.compliance, res.record.len(), true)),
        Method::Simp => {
            let mut sc = SimpConfig {
                volume_fraction: Some(problem.volume_fraction),
                ..SimpConfig::default()
            };
            if let Some(m) = args.max_outer {
                sc.max_iterations = m;
            }
            simp::simp_run_with(&problem, &sc, |s| log.append(s))
                .map(|res| (res.density, res.compliance, res.record.len(), res.converged))
        }
    };
    // keep the partial log of a failed run
    log.finish()?;
    let (density, compliance, iterations, converged) = outcome?;
    write_vtk(out.join("density.vtk"), &problem.mesh, &density)?;
    let summary = RunSummary {
        method: format!("{:?}", args.method).to_lowercase(),
        problem: label,
        elements: problem.mesh.num_elements(),
        compliance,
        volume_fraction: density.iter().sum::<f64>() / density.len() as f64,
        iterations,
        seconds: start.elapsed().as_secs_f64(),
        converged,
    };
    write_summary(out.join("summary.toml"), &summary)?;
    info!("wrote results to {}", out.display());
    println!(
        "{}: compliance {:.6e}, volume fraction {:.4}, {} iterations, {:.2} s",
        summary.method, summary.compliance, summary.volume_fraction, summary.iterations, summary.seconds
    );
    Ok(())
}
