use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use forgery_kit::cascade::{CascadeModel, DetectParams};
use forgery_kit::landmarks::LandmarkStore;
use forgery_kit::pipeline::{self, GenerationPlan};
use forgery_kit::postprocess::CorrectionPolicy;
use forgery_kit::recipes::OnlinePolicy;
use forgery_kit::schedule::{write_schedule_csv, OptimizerConfig, StageSchedule};
use forgery_kit::{Error, Result};

#[derive(Parser)]
#[command(name = "forgery-kit", version, about = "Seeded forgery-sample generation, face detection and score correction")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Index a dataset directory against its labels file.
    Scan {
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Write the index as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a generation plan.
    Generate {
        #[arg(long)]
        plan: PathBuf,
        /// Overrides the plan's master_seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        landmarks: Option<PathBuf>,
    },
    /// Apply the online augmentation chain to every image in a directory.
    Augment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        size: usize,
    },
    /// Run the Haar cascade over a directory and write a detection report.
    Detect {
        #[arg(long)]
        cascade: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 1.1)]
        scale_factor: f64,
        #[arg(long, default_value_t = 3)]
        min_neighbors: usize,
        #[arg(long, default_value_t = 30)]
        min_size: usize,
    },
    /// Correct classifier scores with detector and landmark evidence.
    Postprocess {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        landmarks: Option<PathBuf>,
        #[arg(long, default_value_t = 0.15)]
        tau: f64,
        #[arg(long, default_value_t = 0.10)]
        delta: f64,
        #[arg(long, default_value = "corrected.csv")]
        out: PathBuf,
    },
    /// Write the two-stage learning-rate table.
    Schedule {
        #[arg(long, default_value_t = 35)]
        stage1_epochs: u64,
        #[arg(long, default_value_t = 15)]
        stage2_epochs: u64,
        #[arg(long)]
        steps_per_epoch: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Scan { root, labels, out } => {
            let index = pipeline::scan_dataset(&root, &labels)?;
            for issue in &index.undecodable {
                eprintln!("undecodable: {} ({})", issue.id, issue.reason);
            }
            for id in &index.unlabeled {
                eprintln!("unlabeled: {id}");
            }
            if let Some(out) = out {
                index.write_csv(&out)?;
            }
            println!(
                "indexed={} undecodable={} unlabeled={}",
                index.len(),
                index.undecodable.len(),
                index.unlabeled.len()
            );
        }
        Cmd::Generate {
            plan,
            seed,
            out,
            workers,
            root,
            labels,
            landmarks,
        } => {
            let mut plan = GenerationPlan::load(&plan)?;
            if let Some(s) = seed {
                plan.master_seed = s;
            }
            plan.root = root.or(plan.root);
            plan.labels = labels.or(plan.labels);
            plan.landmarks = landmarks.or(plan.landmarks);
            let root = plan
                .root
                .clone()
                .ok_or_else(|| Error::Input("no dataset root (plan `root` or --root)".into()))?;
            let labels = plan
                .labels
                .clone()
                .ok_or_else(|| Error::Input("no labels file (plan `labels` or --labels)".into()))?;
            let index = pipeline::scan_dataset(&root, &labels)?;
            let store = match &plan.landmarks {
                Some(p) => LandmarkStore::load(p)?,
                None => LandmarkStore::default(),
            };
            let manifest = pipeline::execute_plan(&plan, &index, &store, &out, workers)?;
            for (recipe, n) in manifest.counts_by_recipe() {
                println!("{recipe}: {n}");
            }
            println!(
                "samples={} skips={} manifest={}",
                manifest.samples().count(),
                manifest.skips().count(),
                out.join(pipeline::MANIFEST_FILE).display()
            );
        }
        Cmd::Augment { input, out, seed, size } => {
            let policy = OnlinePolicy {
                size,
                ..OnlinePolicy::default()
            };
            let records = pipeline::run_augment(&input, &out, seed, &policy)?;
            let log = out.join("augment.jsonl");
            let text: String = records
                .iter()
                .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
                .collect();
            std::fs::write(&log, text).map_err(|e| Error::Io { path: log.clone(), source: e })?;
            println!("augmented={}", records.len());
        }
        Cmd::Detect {
            cascade,
            input,
            report,
            scale_factor,
            min_neighbors,
            min_size,
        } => {
            let model = CascadeModel::load(&cascade)?;
            let params = DetectParams {
                scale_factor,
                min_neighbors,
                min_size,
                ..DetectParams::default()
            };
            let rep = pipeline::run_detect(&input, &model, &params)?;
            rep.save(&report)?;
            let faces: usize = rep.iter().map(|(_, d)| d.len()).sum();
            println!("images={} faces={faces}", rep.len());
        }
        Cmd::Postprocess {
            scores,
            report,
            landmarks,
            tau,
            delta,
            out,
        } => {
            let policy = CorrectionPolicy::new(tau, delta)?;
            let summary = pipeline::run_postprocess(&scores, &report, landmarks.as_deref(), &policy, &out)?;
            println!("{summary}");
        }
        Cmd::Schedule {
            stage1_epochs,
            stage2_epochs,
            steps_per_epoch,
            out,
        } => {
            let f = std::fs::File::create(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            write_schedule_csv(
                std::io::BufWriter::new(f),
                &OptimizerConfig::default(),
                &StageSchedule::stage_one(stage1_epochs, steps_per_epoch),
                &StageSchedule::stage_two(stage2_epochs, steps_per_epoch),
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
