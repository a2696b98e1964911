use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use flowmatch::costvol::{auto_k_max, build_cost_volume, SequenceSet, DEFAULT_PAD_COST};
use flowmatch::eval::{
    generate_synthetic, gps_error_stats, pr_curve, pr_svg, write_pr_csv, EvalReport, GroundTruth, SynthParams,
    Tolerance,
};
use flowmatch::features::{compute_hog, load_pgm, read_fvec, write_fvec, Descriptor, HogParams};
use flowmatch::flownet::{DEFAULT_ETA, DEFAULT_SCALE};
use flowmatch::maxflow::{min_cut_from_residual, parse_dimacs, push_relabel_max_flow};
use flowmatch::pipeline::{align_volume, Alignment};
use flowmatch::surface::{global_from_rows, read_match_csv, write_match_csv};

const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "flowmatch", version, about = "Align image sequences by minimum cut")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute HOG descriptors for a directory of PGM frames.
    Extract(ExtractArgs),
    /// Align a test sequence against one or more reference sequences.
    Align(AlignArgs),
    /// Score a match file against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic sequence set with ground truth.
    Synth(SynthArgs),
    /// Solve a DIMACS max-flow problem and print the flow value.
    Solve(SolveArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Directory of .pgm frames, ordered by file name.
    #[arg(required_unless_present = "manifest", conflicts_with = "manifest")]
    dir: Option<PathBuf>,
    /// Text file listing frame paths in order, one per line.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = flowmatch::features::DEFAULT_CELL_SIZE)]
    cell_size: usize,
    #[arg(long, default_value_t = flowmatch::features::DEFAULT_BINS)]
    bins: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long)]
    test: PathBuf,
    #[arg(long = "ref", required = true)]
    refs: Vec<PathBuf>,
    /// Maximum shift, or "auto" for half the shortest reference.
    #[arg(long, default_value = "auto")]
    kmax: String,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: i64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the flow network in DIMACS format.
    #[arg(long)]
    dump_dimacs: Option<PathBuf>,
    /// Also write the cost volume.
    #[arg(long)]
    dump_cvol: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    matches: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Cost threshold separating positive from negative matches.
    #[arg(long)]
    threshold: f64,
    #[arg(long, conflicts_with = "tp_tol_meters")]
    tp_tol_frames: Option<usize>,
    #[arg(long)]
    tp_tol_meters: Option<f64>,
    /// Thresholds of the precision-recall curve; defaults to every distinct
    /// match cost.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Distances (meters) for the GPS percentage error.
    #[arg(long, value_delimiter = ',', default_values_t = vec![7.0, 10.0, 15.0])]
    error_distances: Vec<f64>,
    /// Output directory for pr.csv, summary.txt and pr.svg.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = SynthParams::default().n_places)]
    n_places: usize,
    #[arg(long, default_value_t = SynthParams::default().n_refs)]
    n_refs: usize,
    #[arg(long, default_value_t = SynthParams::default().dim)]
    dim: usize,
    #[arg(long, default_value_t = 0.0)]
    speed_jitter: f64,
    #[arg(long, default_value_t = SynthParams::default().max_stops)]
    max_stops: usize,
    #[arg(long, default_value_t = 0)]
    desync: usize,
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    dropout_prob: f64,
}

#[derive(Args)]
struct SolveArgs {
    input: PathBuf,
}

/// Error tagged with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    err: anyhow::Error,
}

trait Classify<T> {
    fn input(self) -> Result<T, Failure>;
    fn internal(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: EXIT_INPUT, err: e.into() })
    }

    fn internal(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: EXIT_INTERNAL, err: e.into() })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => extract(a),
        Command::Align(a) => align(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
        Command::Solve(a) => solve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

/// Writes through a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(())
}

fn frame_paths(args: &ExtractArgs) -> anyhow::Result<Vec<PathBuf>> {
    if let Some(manifest) = &args.manifest {
        let text = fs::read_to_string(manifest).with_context(|| format!("cannot read {}", manifest.display()))?;
        let base = manifest.parent().unwrap_or(Path::new("."));
        return Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect());
    }
    let dir = args.dir.as_ref().expect("clap requires dir or manifest");
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    Ok(paths)
}

fn extract(args: ExtractArgs) -> Result<(), Failure> {
    let paths = frame_paths(&args).input()?;
    if paths.is_empty() {
        return Err(anyhow!("no frames")).input();
    }
    let params = HogParams { cell_size: args.cell_size, bins: args.bins };
    let mut size: Option<(usize, usize, &Path)> = None;
    let mut descs = Vec::with_capacity(paths.len());
    for path in &paths {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display())).input()?;
        let img = load_pgm(&bytes).with_context(|| format!("{}", path.display())).input()?;
        match size {
            None => size = Some((img.width(), img.height(), path)),
            Some((w, h, first)) if (w, h) != (img.width(), img.height()) => {
                return Err(anyhow!(
                    "frame sizes differ: {} is {w}x{h}, {} is {}x{}",
                    first.display(),
                    path.display(),
                    img.width(),
                    img.height()
                ))
                .input();
            }
            Some(_) => {}
        }
        descs.push(compute_hog(&img, params).with_context(|| format!("{}", path.display())).input()?);
    }
    write_atomic(&args.out, |w| Ok(write_fvec(&descs, w)?)).input()?;
    info!("{} frames, {} dimensions -> {}", descs.len(), descs[0].dim(), args.out.display());
    Ok(())
}

fn read_sequence(path: &Path) -> anyhow::Result<Vec<Descriptor>> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_fvec(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

fn resolve_k_max(arg: &str, ref_lengths: &[usize]) -> anyhow::Result<usize> {
    let bound = auto_k_max(ref_lengths);
    if arg == "auto" {
        return Ok(bound);
    }
    let k: usize = arg.parse().map_err(|_| anyhow!("--kmax must be a positive integer or \"auto\", got {arg:?}"))?;
    if k == 0 {
        bail!("--kmax must be at least 1");
    }
    if k > bound {
        warn!("k_max {k} exceeds half the shortest reference; clamped to {bound}");
        return Ok(bound);
    }
    Ok(k)
}

fn align(args: AlignArgs) -> Result<(), Failure> {
    if args.scale < 1 {
        return Err(anyhow!("--scale must be at least 1")).input();
    }
    let test = read_sequence(&args.test).input()?;
    let refs = args.refs.iter().map(|p| read_sequence(p)).collect::<anyhow::Result<Vec<_>>>().input()?;
    let seqs = SequenceSet::new(test, refs).input()?;
    let k_max = resolve_k_max(&args.kmax, &seqs.ref_lengths()).input()?;
    info!("{} test frames, {} references, k_max {k_max}, eta {}", seqs.test().len(), seqs.refs().len(), args.eta);

    let t = Instant::now();
    let volume = build_cost_volume(&seqs, k_max, DEFAULT_PAD_COST).input()?;
    let volume_time = t.elapsed();
    if let Some(path) = &args.dump_cvol {
        write_atomic(path, |w| Ok(volume.write_cvol(w)?)).input()?;
    }
    let a: Alignment = align_volume(volume, args.eta, args.scale).map_err(|e| {
        let code = if e.is_internal() { EXIT_INTERNAL } else { EXIT_INPUT };
        Failure { code, err: e.into() }
    })?;
    if let Some(path) = &args.dump_dimacs {
        write_atomic(path, |w| Ok(a.network.write_dimacs(w)?)).input()?;
    }

    // recount the cut from scratch, independent of the solver bookkeeping
    let recount = min_cut_from_residual(&a.network, &a.flow).internal()?.capacity;
    if recount != a.flow_value() {
        return Err(anyhow!("cut capacity {recount} differs from flow value {}", a.flow_value())).internal();
    }
    info!("network: {} nodes, {} arcs", a.network.node_count(), a.network.edge_count());
    info!("flow value {} (cut capacity {recount}, scale {})", a.flow_value(), args.scale);
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    info!(
        "time (ms): volume {:.1}, network {:.1}, max-flow {:.1}, cut {:.1}, surface {:.1}",
        ms(volume_time),
        ms(a.timings.network),
        ms(a.timings.maxflow),
        ms(a.timings.cut),
        ms(a.timings.surface)
    );
    let unmatched = a.global.frames.iter().filter(|f| f.is_none()).count();
    if unmatched > 0 {
        info!("{unmatched} test frames have no match");
    }
    write_atomic(&args.out, |w| Ok(write_match_csv(&a.surface, &a.global, w)?)).input()?;
    info!("matches -> {}", args.out.display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let tol = match (args.tp_tol_frames, args.tp_tol_meters) {
        (Some(f), None) => Tolerance::Frames(f),
        (None, Some(m)) if m.is_finite() && m >= 0.0 => Tolerance::Meters(m),
        (None, Some(m)) => return Err(anyhow!("--tp-tol-meters must be >= 0, got {m}")).input(),
        _ => return Err(anyhow!("one of --tp-tol-frames or --tp-tol-meters is required")).input(),
    };
    let file =
        fs::File::open(&args.matches).with_context(|| format!("cannot open {}", args.matches.display())).input()?;
    let rows = read_match_csv(BufReader::new(file)).with_context(|| args.matches.display().to_string()).input()?;
    let global = global_from_rows(&rows).with_context(|| args.matches.display().to_string()).input()?;
    let file = fs::File::open(&args.gt).with_context(|| format!("cannot open {}", args.gt.display())).input()?;
    let gt = GroundTruth::read_csv(BufReader::new(file)).with_context(|| args.gt.display().to_string()).input()?;

    let thresholds = match args.thresholds {
        Some(t) => t,
        None => {
            let mut t: Vec<f64> = global.frames.iter().flatten().map(|m| m.cost).collect();
            t.sort_by(f64::total_cmp);
            t.dedup();
            if t.is_empty() {
                t.push(args.threshold);
            }
            t
        }
    };
    let pr_points = pr_curve(&global, &gt, tol, &thresholds).input()?;
    let counts = pr_curve(&global, &gt, tol, &[args.threshold]).input()?[0].counts;
    let gps = match gt {
        GroundTruth::Gps { .. } => Some(gps_error_stats(&global, &gt, &args.error_distances).input()?),
        GroundTruth::Frames(_) => None,
    };
    let report = EvalReport { pr_points, threshold: args.threshold, counts, gps };

    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display())).input()?;
    write_atomic(&args.out.join("pr.csv"), |w| Ok(write_pr_csv(&report.pr_points, w)?)).input()?;
    let summary = report.summary();
    write_atomic(&args.out.join("summary.txt"), |w| Ok(w.write_all(summary.as_bytes())?)).input()?;
    let svg = pr_svg(&report.pr_points);
    write_atomic(&args.out.join("pr.svg"), |w| Ok(w.write_all(svg.as_bytes())?)).input()?;
    print!("{summary}");
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let params = SynthParams {
        n_places: args.n_places,
        n_refs: args.n_refs,
        dim: args.dim,
        speed_jitter: args.speed_jitter,
        max_stops: args.max_stops,
        desync: args.desync,
        noise_sigma: args.noise_sigma,
        dropout_prob: args.dropout_prob,
    };
    let set = generate_synthetic(&params, args.seed).input()?;
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display())).input()?;
    write_atomic(&args.out.join("test.fvec"), |w| Ok(write_fvec(set.sequences.test(), w)?)).input()?;
    for (i, r) in set.sequences.refs().iter().enumerate() {
        write_atomic(&args.out.join(format!("ref_{i}.fvec")), |w| Ok(write_fvec(r, w)?)).input()?;
    }
    write_atomic(&args.out.join("gt.csv"), |w| Ok(set.ground_truth.write_csv(w)?)).input()?;
    info!(
        "{} test frames, {} references of {} frames -> {}",
        set.sequences.test().len(),
        params.n_refs,
        params.ref_len(),
        args.out.display()
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let file = fs::File::open(&args.input).with_context(|| format!("cannot open {}", args.input.display())).input()?;
    let net = parse_dimacs(BufReader::new(file)).with_context(|| args.input.display().to_string()).input()?;
    let t = Instant::now();
    let res = push_relabel_max_flow(&net).internal()?;
    let cut = min_cut_from_residual(&net, &res).internal()?;
    if cut.capacity != res.flow_value {
        return Err(anyhow!("cut capacity {} differs from flow value {}", cut.capacity, res.flow_value)).internal();
    }
    info!("{} nodes, {} arcs, solved in {:.1} ms", net.node_count(), net.edge_count(), t.elapsed().as_secs_f64() * 1e3);
    println!("{}", res.flow_value);
    Ok(())
}
