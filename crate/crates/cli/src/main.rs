//! `nhdeg` command-line front end.
//!
//! Every subcommand prints a short human summary on stdout and writes its
//! machine-readable output (JSON and CSV carrying the provenance header)
//! into the `--out` directory. Exit codes: 0 success, 1 verification
//! failure, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nhdeg::io::{csv_header_line, document, read_params_file};
use nhdeg::model::{phase_boundaries, phase_classify, Axis, Phase};
use nhdeg::obc::{ribbon_spectrum, skin_metric, RibbonBand};
use nhdeg::scan::{
    export_vector_field, find_degeneracies, scan_discriminant, DegeneracyKind, ScanOptions,
    DEFAULT_GRID,
};
use nhdeg::symmetry::symmetry_survey;
use nhdeg::theorem::{run_ensemble, EnsembleConfig, THEOREM_TOL};
use nhdeg::ModelParams;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] nhdeg::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use nhdeg::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                E::Parse { .. }
                | E::Precondition(_)
                | E::Regime { .. }
                | E::Dimension(_)
                | E::Incommensurate { .. }
                | E::UnknownSymmetry(_),
            ) => 2,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Outcome of a command that ran to completion.
enum Verdict {
    Pass,
    Fail,
}

#[derive(Parser, Debug)]
#[command(
    name = "nhdeg",
    version,
    about = "Degeneracies, symmetries and edge spectra of a non-Hermitian lattice model"
)]
struct Cli {
    /// Worker threads (default: hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify the protection theorem on an ensemble of engineered degenerate matrices.
    Theorem(TheoremArgs),
    /// Scan the Brillouin zone for degeneracies and export the discriminant field.
    Scan(ScanArgs),
    /// Check the three built-in composite symmetries.
    Symmetry(SymmetryArgs),
    /// Phase diagram over v and a g_a = g_b sweep.
    Phases(PhasesArgs),
    /// Ribbon spectrum with one open axis.
    Ribbon(RibbonArgs),
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output directory, created if missing.
    #[arg(long, default_value = "nhdeg-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ParamsArg {
    /// Parameter file of `key = value` lines (keys t, t1, v, gamma, gx, gy, ga, gb, mu_a, mu_b).
    #[arg(long)]
    params: PathBuf,
}

#[derive(Args, Debug)]
struct TheoremArgs {
    /// Smallest matrix dimension.
    #[arg(long, default_value_t = 2)]
    dim_min: usize,
    /// Largest matrix dimension.
    #[arg(long, default_value_t = 8)]
    dim_max: usize,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Base seed; trial i uses seed + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Residual bound for every relation.
    #[arg(long, default_value_t = THEOREM_TOL)]
    tol: f64,
    /// Inject a Jordan block instead of a non-defective degeneracy.
    #[arg(long)]
    defective: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    nx: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    ny: usize,
    /// Newton tolerance on |eta|.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Merge points related by the reduced-zone vector (pi, pi).
    #[arg(long)]
    fold_bz: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct SymmetryArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long, default_value_t = 64)]
    nx: usize,
    #[arg(long, default_value_t = 64)]
    ny: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct PhasesArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    v_min: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    v_max: f64,
    #[arg(long, default_value_t = 121)]
    v_steps: usize,
    /// Largest g_a = g_b of the sweep, which starts at 0.
    #[arg(long, default_value_t = 1.0)]
    g_max: f64,
    #[arg(long, default_value_t = 11)]
    g_steps: usize,
    /// Distance to a boundary counted as gapless.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct RibbonArgs {
    #[command(flatten)]
    params: ParamsArg,
    /// Open axis.
    #[arg(long, default_value = "y", value_parser = ["x", "y"])]
    axis: String,
    #[arg(long, default_value_t = 30)]
    n_cells: usize,
    #[arg(long, default_value_t = 64)]
    k_samples: usize,
    /// Also dump right eigenvectors as ribbon_vectors.csv.
    #[arg(long)]
    eigenvectors: bool,
    #[command(flatten)]
    out: OutArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<Verdict> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))?;
    }
    match cli.command {
        Command::Theorem(a) => cmd_theorem(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Symmetry(a) => cmd_symmetry(a),
        Command::Phases(a) => cmd_phases(a),
        Command::Ribbon(a) => cmd_ribbon(a),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    params: Option<&ModelParams>,
    body: &T,
) -> CliResult<PathBuf> {
    let mut text =
        serde_json::to_string_pretty(&document(params, body)).expect("documents serialize");
    text.push('\n');
    write_file(dir, name, &text)
}

fn load(params: &ParamsArg) -> CliResult<ModelParams> {
    Ok(read_params_file(&params.params)?)
}

fn cmd_theorem(a: TheoremArgs) -> CliResult<Verdict> {
    if !(a.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let cfg = EnsembleConfig {
        dims: (a.dim_min, a.dim_max),
        trials: a.trials,
        seed: a.seed,
        tol: a.tol,
        defective: a.defective,
    };
    let rep = run_ensemble(&cfg)?;
    let path = write_json(&a.out.out, "theorem.json", None, &rep)?;
    let failed = rep.trials.iter().filter(|t| !t.passed).count();
    println!(
        "theorem: {} trials, dims {}..={}, max residual {:.3e}, {failed} failed -> {}",
        rep.trials.len(),
        a.dim_min,
        a.dim_max,
        rep.max_residual,
        path.display()
    );
    match rep.first_failure {
        None => Ok(Verdict::Pass),
        Some(seed) => {
            let why = rep
                .trials
                .iter()
                .find(|t| t.seed == seed)
                .and_then(|t| t.error.clone())
                .unwrap_or_else(|| "residual bound exceeded".into());
            println!("first failing seed {seed}: {why}");
            Ok(Verdict::Fail)
        }
    }
}

fn cmd_scan(a: ScanArgs) -> CliResult<Verdict> {
    let p = load(&a.params)?;
    let opts = ScanOptions {
        nx: a.nx,
        ny: a.ny,
        tol: a.tol,
        fold: a.fold_bz,
    };
    let rep = find_degeneracies(&p, &opts)?;
    let field = scan_discriminant(&p, a.nx, a.ny)?;
    let json = write_json(&a.out.out, "degeneracies.json", Some(&p), &rep)?;
    let csv = write_file(&a.out.out, "field.csv", &export_vector_field(&field))?;
    let nd = rep.of_kind(DegeneracyKind::Nondefective);
    let def = rep.of_kind(DegeneracyKind::Defective);
    println!(
        "scan {}x{}: {} non-defective, {} defective, {} unresolved -> {}, {}",
        a.nx,
        a.ny,
        nd.len(),
        def.len(),
        rep.unresolved(),
        json.display(),
        csv.display()
    );
    for pt in &rep.points {
        println!(
            "  {:<12} k = ({:+.6}, {:+.6})  lambda0 = {:.6}",
            format!("{:?}", pt.kind).to_lowercase(),
            pt.k.kx,
            pt.k.ky,
            pt.lambda0
        );
    }
    Ok(if rep.unresolved() == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}

fn cmd_symmetry(a: SymmetryArgs) -> CliResult<Verdict> {
    let p = load(&a.params)?;
    let survey = symmetry_survey(&p, a.nx, a.ny)?;
    let path = write_json(
        &a.out.out,
        "symmetry.json",
        Some(&p),
        &serde_json::json!({ "nx": a.nx, "ny": a.ny, "reports": survey }),
    )?;
    println!(
        "symmetry survey on a {}x{} grid -> {}",
        a.nx,
        a.ny,
        path.display()
    );
    for r in &survey {
        println!(
            "  {:<20} {:<5} right {:.3e} left {:.3e}",
            r.spec,
            if r.holds { "holds" } else { "fails" },
            r.right_residual,
            r.left_residual
        );
    }
    Ok(Verdict::Pass)
}

fn phase_name(phase: Phase) -> &'static str {
    match phase {
        Phase::BandInsulator => "band_insulator",
        Phase::TopologicalInsulator => "topological_insulator",
        Phase::BoundaryGapless => "boundary_gapless",
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn cmd_phases(a: PhasesArgs) -> CliResult<Verdict> {
    if a.v_steps == 0 || a.g_steps == 0 || !(a.v_max >= a.v_min) || !(a.g_max >= 0.0) {
        return Err(CliError::Usage(
            "need v_steps, g_steps > 0, v_min <= v_max and g_max >= 0".into(),
        ));
    }
    let p = load(&a.params)?;
    let extra = [
        ("v_min", Value::from(a.v_min)),
        ("v_max", Value::from(a.v_max)),
        ("v_steps", Value::from(a.v_steps)),
        ("g_max", Value::from(a.g_max)),
        ("g_steps", Value::from(a.g_steps)),
    ];
    let mut csv = csv_header_line(&p, &extra);
    csv.push_str("\nv,ga,gb,v1,v2,phase\n");
    let mut counts = [0usize; 3];
    for g in linspace(0.0, a.g_max, a.g_steps) {
        for v in linspace(a.v_min, a.v_max, a.v_steps) {
            let q = ModelParams {
                v,
                ga: g,
                gb: g,
                ..p
            };
            let phase = phase_classify(&q, a.tol)?;
            let (v1, v2) = phase_boundaries(&q);
            counts[phase as usize] += 1;
            writeln!(csv, "{v},{g},{g},{v1},{v2},{}", phase_name(phase)).expect("string write");
        }
    }
    let path = write_file(&a.out.out, "phases.csv", &csv)?;
    println!(
        "phases: {} band insulator, {} topological insulator, {} gapless -> {}",
        counts[Phase::BandInsulator as usize],
        counts[Phase::TopologicalInsulator as usize],
        counts[Phase::BoundaryGapless as usize],
        path.display()
    );
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct RibbonSummary<'a> {
    axis: Axis,
    n_cells: usize,
    k_samples: usize,
    bands: &'a [RibbonBand],
    skin: nhdeg::obc::SkinReport,
}

fn cmd_ribbon(a: RibbonArgs) -> CliResult<Verdict> {
    let p = load(&a.params)?;
    let axis: Axis = a.axis.parse()?;
    let bands = ribbon_spectrum(&p, axis, a.n_cells, a.k_samples)?;
    let skin = skin_metric(&p, axis, a.n_cells, 0.0)?;
    let extra = [
        ("axis", serde_json::to_value(axis).expect("axis serializes")),
        ("n_cells", Value::from(a.n_cells)),
        ("k_samples", Value::from(a.k_samples)),
    ];
    let mut csv = csv_header_line(&p, &extra);
    csv.push_str("\nk,index,re_e,im_e,edge_flag\n");
    for b in &bands {
        for (i, e) in b.eigenvalues.iter().enumerate() {
            writeln!(
                csv,
                "{},{i},{},{},{}",
                b.transverse_k,
                e.re,
                e.im,
                b.edge_flags[i].as_str()
            )
            .expect("string write");
        }
    }
    let csv_path = write_file(&a.out.out, "ribbon.csv", &csv)?;
    let summary = RibbonSummary {
        axis,
        n_cells: a.n_cells,
        k_samples: a.k_samples,
        bands: &bands,
        skin,
    };
    let json_path = write_json(&a.out.out, "ribbon.json", Some(&p), &summary)?;
    if a.eigenvectors {
        let mut vcsv = csv_header_line(&p, &extra);
        vcsv.push_str("\nk,index,row,re,im\n");
        for b in &bands {
            for ((row, col), z) in b.eigenvectors.indexed_iter() {
                writeln!(vcsv, "{},{col},{row},{},{}", b.transverse_k, z.re, z.im)
                    .expect("string write");
            }
        }
        write_file(&a.out.out, "ribbon_vectors.csv", &vcsv)?;
    }
    let in_gap: Vec<usize> = bands.iter().map(|b| b.in_gap_indices().len()).collect();
    println!(
        "ribbon open {:?}, N = {}, {} momenta: in-gap counts min {} max {}, mean bulk IPR at k = 0 {:.4} (uniform {:.4}) -> {}, {}",
        axis,
        a.n_cells,
        a.k_samples,
        in_gap.iter().min().copied().unwrap_or(0),
        in_gap.iter().max().copied().unwrap_or(0),
        skin.mean_bulk_ipr,
        skin.baseline,
        csv_path.display(),
        json_path.display()
    );
    Ok(Verdict::Pass)
}
