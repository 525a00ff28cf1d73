use std::path::{Path, PathBuf};

use antispec::classifier::classify;
use antispec::config::{Tolerances, TOL_PARAM, TOL_SYM};
use antispec::io::{self, AntiUnitaryJson, MatrixJson, ReportJson};
use antispec::models::khare_mandal::{default_samples, khare_mandal_verify, KhareMandalModel};
use antispec::models::matching::lowest_roots;
use antispec::models::planted::{build_planted, PlantedPlan};
use antispec::models::square_well::SquareWellModel;
use antispec::sweep::{self, ModelFamily, SquareWellFd, SquareWellMatching, DEFAULT_LEVELS};
use antispec::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "antispec", version, about = "Spectra of PT-like symmetric operators by representation type")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a matrix against an anti-unitary symmetry.
    Classify(ClassifyArgs),
    /// Spectrum of one built-in model at a single parameter value.
    Model(ModelArgs),
    /// Sweep the square-well coupling, optionally locating the threshold.
    Sweep(SweepArgs),
    /// Check the closed-form Khare–Mandal states.
    Verify(VerifyArgs),
    /// Build H, A and the expected report from a planted plan.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct TolArgs {
    /// Reality, proportionality and degeneracy tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Commutation residual accepted as symmetric.
    #[arg(long, default_value_t = TOL_SYM)]
    pub tol_sym: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Result<Tolerances> {
        let t = Tolerances {
            symmetry: self.tol_sym,
            ..Tolerances::uniform(self.tol)
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub symmetry: PathBuf,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    SquareWellFd,
    SquareWellMatching,
    KhareMandal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepModel {
    SquareWellFd,
    SquareWellMatching,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Square-well coupling.
    #[arg(long = "Z", alias = "z", default_value_t = 0.0, allow_negative_numbers = true)]
    pub z: f64,
    /// Interior grid points of the finite-difference well.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Number of matching-condition levels.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long = "M", alias = "m", default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub zeta: f64,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the dense finite-difference matrix.
    #[arg(long)]
    pub out_h: Option<PathBuf>,
    /// Also write the symmetry of the finite-difference matrix.
    #[arg(long)]
    pub out_a: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub model: SweepModel,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long)]
    pub steps: usize,
    /// Bisect the first interval where a complex pair appears.
    #[arg(long)]
    pub refine: bool,
    #[arg(long, default_value_t = TOL_PARAM)]
    pub tol_param: f64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Interior grid points (finite differences) or seed grid (matching).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Lowest levels watched for complex pairs.
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "M", alias = "m")]
    pub m: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub zeta: f64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub plan: PathBuf,
    /// Overrides the seed stored in the plan.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_h: PathBuf,
    #[arg(long)]
    pub out_a: PathBuf,
    #[arg(long)]
    pub out_expected: PathBuf,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SymmetryViolated { .. } => 2,
        Error::NotDiagonalizable { .. } => 3,
        Error::BracketInvalid { .. } => 4,
        Error::OutOfRegime { .. } => 5,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Classify(a) => cmd_classify(&a),
        Command::Model(a) => cmd_model(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Gen(a) => cmd_gen(&a),
    }
}

fn check_input(p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("input file not found: {}", p.display())))
    }
}

fn check_output(p: &Path) -> Result<()> {
    let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if p.file_name().is_some() && parent.is_dir() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("cannot write to {}", p.display())))
    }
}

fn summary(report: &antispec::ClassificationReport) -> String {
    format!("{} residual={:.3e}", report.multiplicities, report.commutation_residual)
}

fn cmd_classify(a: &ClassifyArgs) -> Result<()> {
    check_input(&a.input)?;
    check_input(&a.symmetry)?;
    check_output(&a.output)?;
    let tol = a.tol.tolerances()?;
    let h = io::read_matrix(&a.input)?;
    let sym = io::read_antiunitary(&a.symmetry)?;
    if h.dim() != sym.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: sym.dim(),
        });
    }
    let report = classify(&h, &sym, &tol)?;
    io::write_json(&a.output, &ReportJson::from(&report))?;
    println!("{}", summary(&report));
    Ok(())
}

fn cmd_model(a: &ModelArgs) -> Result<()> {
    check_output(&a.output)?;
    for p in [&a.out_h, &a.out_a].into_iter().flatten() {
        check_output(p)?;
    }
    let tol = a.tol.tolerances()?;
    match a.model {
        ModelKind::SquareWellFd => {
            let model = SquareWellModel::new(a.z, a.grid)?;
            let t = model.tridiagonal();
            let sym = model.symmetry();
            let report = classify(&t, &sym, &tol)?;
            if let Some(p) = &a.out_h {
                io::write_json(p, &MatrixJson::from(&t.to_dense()))?;
            }
            if let Some(p) = &a.out_a {
                io::write_json(p, &AntiUnitaryJson::from(&sym))?;
            }
            let out = json!({
                "model": "square-well-fd",
                "Z": a.z,
                "grid": a.grid,
                "report": ReportJson::from(&report),
            });
            io::write_json(&a.output, &out)?;
            println!("{}", summary(&report));
        }
        ModelKind::SquareWellMatching => {
            let sols = lowest_roots(a.z, a.levels, 24)?;
            let pairs = sols.iter().filter(|s| s.energy.im > 0.0 && s.kind.is_conjugate_pair()).count();
            let out = json!({
                "model": "square-well-matching",
                "Z": a.z,
                "states": sols,
            });
            io::write_json(&a.output, &out)?;
            println!("levels={} complex_pairs={}", sols.len(), pairs);
        }
        ModelKind::KhareMandal => {
            let model = KhareMandalModel::new(a.m, a.zeta)?;
            let states = model.states();
            let out = json!({
                "model": "khare-mandal",
                "M": a.m,
                "zeta": a.zeta,
                "states": states,
            });
            io::write_json(&a.output, &out)?;
            println!("states={}", states.len());
        }
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    if a.steps < 2 {
        return Err(Error::InvalidParameter(format!("--steps must be at least 2, got {}", a.steps)));
    }
    if a.tol_param.is_nan() || a.tol_param <= 0.0 {
        return Err(Error::InvalidParameter("--tol-param must be positive".into()));
    }
    for p in [&a.csv, &a.json].into_iter().flatten() {
        check_output(p)?;
    }
    let family: Box<dyn ModelFamily> = match a.model {
        SweepModel::SquareWellFd => {
            let mut f = SquareWellFd::new(a.grid.unwrap_or(2000))?;
            f.levels = a.levels;
            Box::new(f)
        }
        SweepModel::SquareWellMatching => {
            let mut f = SquareWellMatching {
                levels: a.levels,
                ..Default::default()
            };
            if let Some(g) = a.grid {
                f.grid = g;
            }
            Box::new(f)
        }
    };
    let mut result = sweep::sweep(family.as_ref(), a.from, a.to, a.steps)?;
    if let Some(p) = &a.csv {
        let mut buf = Vec::new();
        sweep::write_csv(&result, &mut buf)?;
        io::write_atomic(p, &buf)?;
    }
    let failed = result.points.iter().filter(|p| p.error.is_some()).count();
    if failed > 0 {
        eprintln!("warning: {failed} sweep point(s) could not be classified");
    }
    let counts: Vec<String> = result
        .points
        .iter()
        .map(|p| p.complex_pairs.map_or("?".to_string(), |c| c.to_string()))
        .collect();
    println!("complex_pairs={}", counts.join(","));
    if a.refine {
        let (lo, hi) = match result.transition {
            Some(k) => (result.param_values[k], result.param_values[k + 1]),
            None => (a.from, a.to),
        };
        let th = sweep::find_threshold(family.as_ref(), lo, hi, a.tol_param)?;
        println!("Z_c={:.12} bracket={:.3e}", th.value, th.bracket_width);
        if let Some(p) = &a.json {
            let out = json!({
                "Z_c": th.value,
                "bracket": th.bracket_width,
                "model": family.name(),
                "iterations": th.history,
            });
            io::write_json(p, &out)?;
        }
        result.threshold = Some(th);
    } else if let Some(p) = &a.json {
        io::write_json(p, &result)?;
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    check_output(&a.output)?;
    let v = khare_mandal_verify(a.m, a.zeta, &default_samples())?;
    io::write_json(&a.output, &v)?;
    println!(
        "{} eigen_residual={:.3e} symmetry_residual={:.3e}",
        v.representation,
        v.max_eigen_residual(),
        v.max_symmetry_residual()
    );
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    check_input(&a.plan)?;
    for p in [&a.out_h, &a.out_a, &a.out_expected] {
        check_output(p)?;
    }
    let mut plan: PlantedPlan = io::read_json(&a.plan)?;
    if let Some(s) = a.seed {
        plan.seed = s;
    }
    let (h, sym, expected) = build_planted(&plan)?;
    io::write_json(&a.out_h, &MatrixJson::from(&h))?;
    io::write_json(&a.out_a, &AntiUnitaryJson::from(&sym))?;
    io::write_json(&a.out_expected, &ReportJson::from(&expected))?;
    println!("{}", summary(&expected));
    Ok(())
}
