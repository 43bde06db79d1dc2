use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sensi1d::experiments::{
    convergence_csv, default_kappa_grid, dyadic, rate_summary, study_shape_l2, study_shape_sweep,
    study_state_convergence, study_topo, sweep_csv, topo_csv, Quantity, STATE_KAPPA,
};
use sensi1d::{DiscretizationMethod, ProblemData, SplineSpace};

#[derive(Parser)]
#[command(name = "sensi1d", version, about = "Shape and topological sensitivity studies for a 1D two-material problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a study and write its CSV.
    Study(StudyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyKind {
    State,
    ShapeSweep,
    ShapeL2,
    Topo,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Standard,
    Enriched,
}

impl From<Method> for DiscretizationMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Standard => DiscretizationMethod::Standard,
            Method::Enriched => DiscretizationMethod::Enriched,
        }
    }
}

#[derive(Args)]
struct StudyArgs {
    #[arg(value_enum)]
    study: StudyKind,
    #[arg(long, value_enum, default_value = "standard")]
    method: Method,
    /// Spline degree. Convergence studies run 1, 2 and 3 when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    degree: Option<u8>,
    /// Number of elements. For convergence studies, the finest level of the
    /// dyadic sequence; for topo, a single mesh.
    #[arg(long)]
    elements: Option<usize>,
    /// Interface position. For shape-sweep, evaluates this single point
    /// instead of the default grid.
    #[arg(long)]
    kappa: Option<f64>,
    /// Interior sample count of the default shape-sweep grid.
    #[arg(long, default_value_t = 199)]
    kappa_samples: usize,
    /// Cells of the kappa quadrature for shape-l2 (default 8 * elements).
    #[arg(long)]
    cells: Option<usize>,
    /// Problem data file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn degrees(arg: Option<u8>) -> Vec<usize> {
    arg.map_or_else(|| vec![1, 2, 3], |p| vec![p as usize])
}

fn levels(finest: Option<usize>, default: usize) -> Result<Vec<usize>> {
    let finest = finest.unwrap_or(default);
    if finest < 2 || !finest.is_power_of_two() {
        bail!("--elements must be a power of two >= 2 for convergence studies, got {finest}");
    }
    Ok(dyadic(2, finest))
}

fn run(args: &StudyArgs) -> Result<(String, Option<String>)> {
    let data = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ProblemData::from_config_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => ProblemData::default(),
    };
    let method = DiscretizationMethod::from(args.method);
    match args.study {
        StudyKind::State => {
            let ps = degrees(args.degree);
            let kappa = args.kappa.unwrap_or(STATE_KAPPA * data.length);
            let recs = study_state_convergence(&data, kappa, &[method], &ps, &levels(args.elements, 4096)?)?;
            let csv = convergence_csv(&recs, method, &[Quantity::L2, Quantity::H1], &ps);
            Ok((csv, Some(rate_summary(&recs))))
        }
        StudyKind::ShapeL2 => {
            let ps = degrees(args.degree);
            let recs = study_shape_l2(&data, &[method], &ps, &levels(args.elements, 256)?, args.cells)?;
            let csv = convergence_csv(&recs, method, &[Quantity::Dp, Quantity::Cp], &ps);
            Ok((csv, Some(rate_summary(&recs))))
        }
        StudyKind::ShapeSweep => {
            let p = args.degree.unwrap_or(2) as usize;
            let m = args.elements.unwrap_or(8);
            let space = SplineSpace::new(p, m, data.length)?;
            let grid = match args.kappa {
                Some(k) => vec![k],
                None => default_kappa_grid(data.length, args.kappa_samples, &space, method),
            };
            let rows = study_shape_sweep(&data, method, p, m, &grid)?;
            Ok((sweep_csv(&rows), None))
        }
        StudyKind::Topo => {
            if args.degree.is_some_and(|p| p != 1) {
                bail!("the topological study is defined for linear splines only");
            }
            let ms = args.elements.map_or_else(|| vec![4, 8, 16, 32], |m| vec![m]);
            let rows = study_topo(&data, &ms)?;
            Ok((topo_csv(&rows), None))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Study(args) = cli.command;
    let result = run(&args).and_then(|(csv, summary)| {
        match &args.out {
            Some(path) => {
                fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?
            }
            None => print!("{csv}"),
        }
        if let Some(s) = summary {
            eprint!("{s}");
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
