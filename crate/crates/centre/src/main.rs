use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vmd_centre::analyze::{analyze, mask_file_name};
use vmd_centre::config::{parse_rgb, CentreConfig};
use vmd_centre::dataset::{gen_dataset, DatasetError, DatasetSpec};
use vmd_centre::server::{start, ServerError, ServerOptions};
use vmd_centre::trace::{trace, trajectory_tsv, TraceConfig};
use vmd_core::imaging::{parse_scene, read_sequence, write_pnm};
use vmd_core::motion::DetectorConfig;
use vmd_core::tracker::ColorReference;

#[derive(Parser)]
#[command(name = "vmd-centre", version, about = "Control centre for the surveillance rover")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the control centre service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the motion detector over a recorded sequence.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write each detector mask as a PGM into this directory.
        #[arg(long)]
        dump_masks: Option<PathBuf>,
        /// Detector settings (tau, min_ratio, persist_k, denoise).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run closed-loop colour tracing against a scene.
    Trace {
        #[arg(long)]
        scene: PathBuf,
        /// Reference colour as R,G,B.
        #[arg(long, value_parser = parse_rgb)]
        color: [u8; 3],
        #[arg(long, default_value_t = ColorReference::DEFAULT_TOLERANCE)]
        tol: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = TraceConfig::DEFAULT_MAX_STEPS)]
        max_steps: u64,
        /// Also write the per-step pose log.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Generate a synthetic SRSEQ1 sequence from a spec file.
    GenDataset {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 2,
            Failure::Config(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(m) | Failure::Config(m) => f.write_str(m),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn detector_config(path: Option<&Path>) -> Result<DetectorConfig, Failure> {
    let mut cfg = DetectorConfig::default();
    let Some(path) = path else {
        return Ok(cfg);
    };
    let text = String::from_utf8(read(path)?).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let bad = |e: vmd_centre::ConfigError| Failure::Config(format!("{}: {e}", path.display()));
    for (k, v) in vmd_centre::config::parse_pairs(&text).map_err(bad)? {
        let parse_err = |e| bad(e);
        match k.as_str() {
            "tau" => cfg.tau = vmd_centre::config::value(&k, &v).map_err(parse_err)?,
            "min_ratio" => cfg.min_ratio = vmd_centre::config::value(&k, &v).map_err(parse_err)?,
            "persist_k" => cfg.persist_k = vmd_centre::config::value(&k, &v).map_err(parse_err)?,
            "denoise" => cfg.denoise = vmd_centre::config::value(&k, &v).map_err(parse_err)?,
            _ => {}
        }
    }
    cfg.validate()
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn run_analyze(input: &Path, out: &Path, dump: Option<&Path>, config: Option<&Path>) -> Result<(), Failure> {
    let cfg = detector_config(config)?;
    let seq = read_sequence(&read(input)?).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
    let analysis = analyze(&seq, &cfg).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
    write(out, analysis.report.to_tsv())?;
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        for (seq, mask) in &analysis.masks {
            write(&dir.join(mask_file_name(*seq)), write_pnm(&mask.to_frame()))?;
        }
    }
    let s = analysis.report.summary();
    println!("frames={} alarms={}", s.frames, s.alarms);
    Ok(())
}

fn run_trace(
    scene: &Path,
    color: [u8; 3],
    tol: u32,
    out: &Path,
    max_steps: u64,
    trajectory: Option<&Path>,
) -> Result<(), Failure> {
    let text = String::from_utf8_lossy(&read(scene)?).into_owned();
    let scene_def = parse_scene(&text).map_err(|e| Failure::Config(format!("{}: {e}", scene.display())))?;
    let mut cfg = TraceConfig::new(ColorReference::new(color, tol));
    cfg.max_steps = max_steps;
    let outcome = trace(&scene_def, &cfg).map_err(|e| Failure::Config(e.to_string()))?;
    write(out, outcome.report.to_tsv())?;
    if let Some(path) = trajectory {
        write(path, trajectory_tsv(&outcome.trajectory))?;
    }
    println!(
        "steps={} termination={}",
        outcome.trajectory.len(),
        outcome.termination.name()
    );
    Ok(())
}

fn run_gen(spec: &Path, seed: u64, out: &Path) -> Result<(), Failure> {
    let text = String::from_utf8_lossy(&read(spec)?).into_owned();
    let base = spec.parent().unwrap_or(Path::new("."));
    let parsed = DatasetSpec::parse(&text, base).map_err(|e| match e {
        DatasetError::Io { .. } => Failure::Io(e.to_string()),
        other => Failure::Config(format!("{}: {other}", spec.display())),
    })?;
    let bytes = gen_dataset(&parsed, seed).map_err(|e| Failure::Config(e.to_string()))?;
    write(out, bytes)
}

fn run_serve(config: &Path) -> Result<(), Failure> {
    let cfg = CentreConfig::load(config).map_err(|e| match e {
        vmd_centre::ConfigError::Io { .. } => Failure::Io(e.to_string()),
        other => Failure::Config(format!("{}: {other}", config.display())),
    })?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    rt.block_on(async {
        let handle = start(&cfg, ServerOptions::default()).await.map_err(|e| match e {
            ServerError::Bind { .. } => Failure::Io(e.to_string()),
            ServerError::Engine(inner) => Failure::Config(inner.to_string()),
        })?;
        eprintln!(
            "listening: control {} bridge {}",
            handle.control_addr, handle.bridge_addr
        );
        let _ = tokio::signal::ctrl_c().await;
        handle.shutdown().await;
        Ok(())
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Cmd::Serve { config } => run_serve(config),
        Cmd::Analyze {
            input,
            out,
            dump_masks,
            config,
        } => run_analyze(input, out, dump_masks.as_deref(), config.as_deref()),
        Cmd::Trace {
            scene,
            color,
            tol,
            out,
            max_steps,
            trajectory,
        } => run_trace(scene, *color, *tol, out, *max_steps, trajectory.as_deref()),
        Cmd::GenDataset { spec, seed, out } => run_gen(spec, *seed, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
