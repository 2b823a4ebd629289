use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use scenegen_core::augment::{place, SamplingSpec};
use scenegen_core::dataset::{
    load_corpus, load_scene, save_scene, synthesize, CorpusFilter, SynthRuleSet,
};
use scenegen_core::error::SceneGenError;
use scenegen_core::eval::{eval_orientation, eval_position, AblationConfig};
use scenegen_core::geometry::{OrientedBox, Thresholds};
use scenegen_core::knowledge::{format, train, FeatureSelection};
use scenegen_core::scene::{Category, SceneObject};
use scenegen_core::server;

#[derive(Parser)]
#[command(name = "scenegen", about = "Contextual scene augmentation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RulePreset {
    Position,
    Orientation,
    Combined,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalTaskArg {
    Position,
    Orientation,
}

#[derive(Subcommand)]
enum Command {
    /// Train a knowledge model from a corpus directory of scene files.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "corpus")]
        dataset_id: String,
        /// Position feature selection, e.g. "AD+S+RP".
        #[arg(long, default_value = "AD+S+RP")]
        position: String,
        /// Orientation feature selection, e.g. "F+C+RP".
        #[arg(long, default_value = "F+C+RP")]
        orientation: String,
        #[arg(long, default_value_t = 4.0)]
        min_area: f64,
        #[arg(long, default_value_t = 100.0)]
        max_area: f64,
    },
    /// Recommend and commit a placement for one category.
    Place {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        category: String,
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        /// Destination for the scene with the best pose committed;
        /// defaults to overwriting the input scene.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a heat-map document for one category.
    Heatmap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        category: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 250)]
        target_samples: usize,
    },
    /// Generate a synthetic corpus plus its ground-truth manifest.
    Synth {
        #[arg(long, value_enum, default_value_t = RulePreset::Combined)]
        rules: RulePreset,
        #[arg(long, default_value_t = 50)]
        rooms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the K-fold ablation evaluation and write report tables.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        task: EvalTaskArg,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_table: PathBuf,
        /// Directory for per-variant CDF data files (one sorted value per
        /// line).
        #[arg(long)]
        out_cdf: Option<PathBuf>,
        #[arg(long, default_value_t = 250)]
        target_samples: usize,
    },
    /// Serve the HTTP API.
    Serve {
        /// Bind address; falls back to SCENEGEN_ADDR.
        #[arg(long, env = "SCENEGEN_ADDR", default_value = "127.0.0.1:8080")]
        addr: String,
        /// Model file; falls back to SCENEGEN_MODEL.
        #[arg(long, env = "SCENEGEN_MODEL")]
        model: PathBuf,
    },
    /// Print a model's priors summary and provenance.
    ModelInfo {
        #[arg(long)]
        model: PathBuf,
    },
}

fn error_category(e: &SceneGenError) -> &'static str {
    match e {
        SceneGenError::Contract(_) => "contract",
        SceneGenError::UntrainedCategory(_) => "untrained_category",
        SceneGenError::RuleDeterminedOrientation(_) => "rule_determined_orientation",
        SceneGenError::DimensionMismatch { .. } => "dimension_mismatch",
        SceneGenError::ThresholdMismatch => "threshold_mismatch",
        SceneGenError::UnknownCategory(_) => "unknown_category",
        SceneGenError::FormatVersion { .. } => "format_version",
        SceneGenError::Checksum => "checksum",
        SceneGenError::Truncated(_) => "truncated",
        SceneGenError::NoValidCell { .. } => "no_valid_cell",
        SceneGenError::Unsatisfiable(_) => "unsatisfiable",
        SceneGenError::InvalidScene(_) => "invalid_scene",
        SceneGenError::Io(_) => "io",
        SceneGenError::Json(_) => "json",
    }
}

/// Writes via a temp sibling then renames, so failures never leave partial
/// output behind.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), SceneGenError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), SceneGenError> {
    let thresholds = Thresholds::default();
    match cli.command {
        Command::Train { corpus, out, dataset_id, position, orientation, min_area, max_area } => {
            let filter = CorpusFilter { min_area, max_area };
            let (scenes, report) = load_corpus(&corpus, &filter)?;
            for r in &report.rejects {
                eprintln!("rejected {}: {}", r.file, r.reason);
            }
            let selection = FeatureSelection {
                position: FeatureSelection::parse_position(&position)?,
                orientation: FeatureSelection::parse_orientation(&orientation)?,
            };
            let (model, training) = train(&scenes, &thresholds, &selection, &dataset_id)?;
            format::save(&model, &out)?;
            println!(
                "trained on {} scenes ({} rejected) -> {}",
                scenes.len(),
                report.rejects.len(),
                out.display()
            );
            for (category, rows) in &training.position_rows {
                let orows = training.orientation_rows.get(category).copied().unwrap_or(0);
                println!("  {category}: {rows} position rows, {orows} orientation rows");
            }
            if !training.untrained.is_empty() {
                println!("  untrained: {}", training.untrained.join(", "));
            }
            Ok(())
        }
        Command::Place { model, scene, category, top_k, out } => {
            let model = format::load(&model)?;
            let scene_path = scene;
            let scene = load_scene(&scene_path)?;
            let category = Category::from_name(&category)?;
            let mut spec = SamplingSpec::default();
            spec.top_k = top_k;
            let (rec, _) = place(&scene, category, &model, &spec, &model.thresholds, None)?;
            for (rank, pose) in rec.poses.iter().enumerate() {
                println!(
                    "#{} pos=({:.3}, {:.3}) theta={:.3} position_score={:.4} orientation_score={:.4e}",
                    rank + 1,
                    pose.position.x,
                    pose.position.y,
                    pose.theta_a,
                    pose.position_score,
                    pose.orientation_score
                );
            }
            let best = rec.poses.first().ok_or_else(|| SceneGenError::NoValidCell {
                step: 0,
                category: category.name().to_string(),
            })?;
            let geom = model.category_geometry(category);
            let mut committed = scene.clone();
            committed.objects.push(SceneObject {
                id: format!("placed-{}", category.name()),
                category,
                boxed: OrientedBox::new(
                    best.position,
                    geom.mean_center_z,
                    geom.mean_half_extents,
                    best.theta_a,
                )?,
                has_known_facing: category.is_asymmetric(),
            });
            let destination = out.unwrap_or(scene_path);
            save_scene(&committed, &destination)?;
            println!("committed best pose -> {}", destination.display());
            Ok(())
        }
        Command::Heatmap { model, scene, category, out, target_samples } => {
            let model = format::load(&model)?;
            let scene = load_scene(&scene)?;
            let category = Category::from_name(&category)?;
            let mut spec = SamplingSpec::default();
            spec.target_samples = target_samples;
            let map = scenegen_core::augment::position_heatmap(
                &scene,
                category,
                &model,
                &spec,
                &model.thresholds,
                None,
            )?;
            let doc = serde_json::json!({
                "schema_version": scenegen_core::dataset::SCHEMA_VERSION,
                "heatmap": map,
            });
            write_atomic(&out, serde_json::to_string_pretty(&doc)?.as_bytes())?;
            println!("heat map ({}x{} cells) -> {}", map.nx, map.ny, out.display());
            Ok(())
        }
        Command::Synth { rules, rooms, seed, out } => {
            let rules = match rules {
                RulePreset::Position => SynthRuleSet::position_recovery(),
                RulePreset::Orientation => SynthRuleSet::orientation_recovery(),
                RulePreset::Combined => SynthRuleSet::combined(),
            };
            let (scenes, manifest) = synthesize(&rules, rooms, seed)?;
            std::fs::create_dir_all(&out)?;
            let width = rooms.to_string().len();
            for (i, s) in scenes.iter().enumerate() {
                save_scene(s, &out.join(format!("room{i:0width$}.json")))?;
            }
            // Not named *.json so corpus loading skips it.
            write_atomic(
                &out.join("manifest.sgmf"),
                serde_json::to_string_pretty(&manifest)?.as_bytes(),
            )?;
            println!("generated {} rooms -> {}", scenes.len(), out.display());
            Ok(())
        }
        Command::Eval { corpus, task, k, seed, out_table, out_cdf, target_samples } => {
            let (scenes, _) = load_corpus(&corpus, &CorpusFilter::default())?;
            let mut config = match task {
                EvalTaskArg::Position => AblationConfig::position_default(),
                EvalTaskArg::Orientation => AblationConfig::orientation_default(),
            };
            config.k = k;
            config.seed = seed;
            config.sampling.target_samples = target_samples;
            let report = match task {
                EvalTaskArg::Position => eval_position(&scenes, &config, &thresholds)?,
                EvalTaskArg::Orientation => eval_orientation(&scenes, &config, &thresholds)?,
            };
            write_atomic(&out_table, report.table_dsv().as_bytes())?;
            println!(
                "{} samples over {} variants -> {}",
                report.samples.len(),
                config.variants.len(),
                out_table.display()
            );
            if let Some(dir) = out_cdf {
                std::fs::create_dir_all(&dir)?;
                for variant in &config.variants {
                    let data = report.cdf_data(&variant.name);
                    let text: String =
                        data.iter().map(|x| format!("{x:.9}\n")).collect();
                    let file = dir.join(format!(
                        "cdf-{}.txt",
                        variant.name.replace('+', "_").to_lowercase()
                    ));
                    write_atomic(&file, text.as_bytes())?;
                }
            }
            Ok(())
        }
        Command::Serve { addr, model } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .init();
            let model = format::load(&model)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(server::serve(&addr, model))
        }
        Command::ModelInfo { model } => {
            let model = format::load(&model)?;
            println!("dataset_id: {}", model.dataset_id);
            let t = model.thresholds;
            println!(
                "thresholds: rho={} epsilon={} phi={:.6} support_gap={} support_overlap_frac={}",
                t.rho, t.epsilon, t.phi, t.support_gap, t.support_overlap_frac
            );
            let summary = model.priors_summary();
            for category in Category::ALL {
                let Some(priors) = summary.categories.get(category.name()) else { continue };
                println!("{}:", category.name());
                println!("  position rows: {}", model.position_row_count(category));
                println!("  orientation rows: {}", model.orientation_row_count(category));
                let hist = |m: &std::collections::BTreeMap<i64, f64>| {
                    m.iter()
                        .map(|(k, v)| format!("{k}:{v:.3}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                println!("  room_position: {}", hist(&priors.room_position));
                println!("  surrounded_by: {}", hist(&priors.surrounded_by));
                println!("  facing: {}", hist(&priors.facing));
                if let Some(r) = priors.towards_center_ratio {
                    println!("  towards_center ratio: {r:.3}");
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: category={} message={e}", error_category(&e));
            ExitCode::FAILURE
        }
    }
}
