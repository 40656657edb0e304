use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use facetopo::mesh::PointCloud;
use facetopo::persistence::{build_bifiltration, compute_barcode, restrict};
use facetopo::pipeline::{
    clover_points, generate_synthetic, load_dataset, render_plots, run_pipeline, BranchSel, Family, PipelineConfig,
    PipelineError, SynthOptions,
};
use facetopo::shape::{raw_srv, shape_distance, srv_inverse, Curve, CurveKind};
use facetopo::Vec3;

#[derive(Parser)]
#[command(name = "facetopo", version, about = "Topological and elastic-shape comparison of surface scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a labelled synthetic dataset with a ready-to-run config.txt.
    Synth {
        #[arg(long, default_value = "sphere-bump")]
        family: Family,
        #[arg(long, default_value_t = 8)]
        subjects: usize,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value_t = 0.6)]
        offset: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a dataset and print one line per subject.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        branch: Option<BranchSel>,
    },
    /// Run the configured branches and write all artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        branch: Option<BranchSel>,
    },
    /// Re-render SVGs from the CSV artifacts of a previous run.
    Plot {
        /// Output directory of a run; defaults to `output_dir` of `--config`.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Quick self-checks of the core algorithms.
    Test,
}

fn load_config(path: &Path, seed: Option<u64>, branch: Option<BranchSel>) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::from_file(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(b) = branch {
        cfg.branch = b;
    }
    Ok(cfg)
}

fn ingest(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let data = load_dataset(cfg)?;
    println!("{} subjects in {}", data.subjects.len(), cfg.dataset_dir.display());
    for s in &data.subjects {
        if s.path.extension().is_some_and(|e| e == "xyz") {
            let cloud = facetopo::mesh::read_xyz(&s.path).map_err(|e| PipelineError::Data(format!("{}: {e}", s.id)))?;
            println!("{}\t{}\tcloud\t{} points", s.id, s.label, cloud.len());
            continue;
        }
        let bytes = std::fs::read(&s.path).map_err(|e| PipelineError::Io { path: s.path.clone(), source: e })?;
        let mesh = facetopo::mesh::parse_stl(&bytes).map_err(|e| PipelineError::Data(format!("{}: {e}", s.id)))?;
        if let Some(lm) = data.landmarks.get(&s.id) {
            lm.validate(mesh.vertices()).map_err(|e| PipelineError::Data(format!("{}: {e}", s.id)))?;
        }
        println!("{}\t{}\tmesh\t{} vertices\t{} faces", s.id, s.label, mesh.vertex_count(), mesh.face_count());
    }
    Ok(())
}

fn self_test() -> bool {
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("{} {name}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };

    let square = vec![Vec3::zeros(), Vec3::x(), Vec3::new(1.0, 1.0, 0.0), Vec3::y()];
    let bf = build_bifiltration(&PointCloud::new(square, Some(vec![0.0; 4])).unwrap(), 2.0, 2).unwrap();
    let bc = compute_barcode(&restrict(&bf, 0.0), 1).unwrap();
    check(
        "unit square has one loop [1, sqrt 2)",
        bc.len() == 1
            && (bc.intervals()[0].birth - 1.0).abs() < 1e-12
            && (bc.intervals()[0].death - 2f64.sqrt()).abs() < 1e-12,
    );

    let long_loops = |noisy: usize| {
        let pts = clover_points(200, noisy, 7);
        let n = pts.len();
        let bf = build_bifiltration(&PointCloud::new(pts, Some(vec![0.0; n])).unwrap(), 0.6, 2).unwrap();
        let p = compute_barcode(&restrict(&bf, 0.0), 1).unwrap().persistences();
        let fifth = p.get(4).copied().unwrap_or(0.0);
        p.iter().filter(|&&x| x > 3.0 * fifth).count()
    };
    check("clean clover has 4 persistent loops", long_loops(0) == 4);
    check("clover with two filled leaves has 2", long_loops(2) == 2);

    let c = Curve::new(
        (0..256).map(|i| {
            let t = i as f64 / 255.0;
            Vec3::new(t, (3.0 * t).sin(), 0.5 * t * t)
        })
        .collect(),
        CurveKind::Open,
    )
    .unwrap();
    let back = srv_inverse(&raw_srv(&c).unwrap()).unwrap();
    let err = c.points().iter().zip(back.points()).map(|(a, b)| ((a - c.points()[0]) - b).norm()).fold(0.0, f64::max);
    check("SRV round trip", err < 1e-3);
    check("curve is at distance 0 from itself", shape_distance(&c, &c).map(|r| r.d_s < 1e-6).unwrap_or(false));
    ok
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth { family, subjects, noise, offset, seed, out } => {
            let opts = SynthOptions { family, n_subjects: subjects, noise, seed, offset };
            generate_synthetic(&opts, &out).map(|files| println!("wrote {} files to {}", files.len(), out.display()))
        }
        Command::Ingest { config, branch } => load_config(&config, None, branch).and_then(|c| ingest(&c)),
        Command::Run { config, seed, branch } => load_config(&config, seed, branch).and_then(|cfg| {
            let art = run_pipeline(&cfg)?;
            for m in &art.matrices {
                println!("{}\tp = {:.4}\tkNN accuracy = {:.3}", m.stem(), m.permutation.p_value, m.knn.accuracy);
            }
            println!("wrote {} files to {}", art.files.len() + 1, cfg.output_dir.display());
            Ok(())
        }),
        Command::Plot { dir, config } => {
            let dir = match (dir, config) {
                (Some(d), _) => Ok(d),
                (None, Some(c)) => PipelineConfig::from_file(&c).map(|c| c.output_dir),
                (None, None) => Err(PipelineError::Config("plot needs --dir or --config".into())),
            };
            dir.and_then(|d| render_plots(&d)).map(|files| println!("rendered {} SVG files", files.len()))
        }
        Command::Test => {
            return if self_test() { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
