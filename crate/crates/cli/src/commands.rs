use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use abl_core::datasets::{self, Dataset, DatasetSpec, Semantics};
use abl_core::equation::Sym;
use abl_core::perception::{CorpusManifest, GlyphFamily, GlyphFamilySpec, GlyphImage};
use abl_core::trainer::{self, AbductiveModel, TrainerConfig, TrainingRun};
use serde_json::json;

use crate::manifest::Recorder;
use crate::{failed, invalid, CliError, EvalArgs, GenDataArgs, TrainArgs};

pub const RUN_MANIFEST: &str = "run.json";
pub const LOG_FILE: &str = "log.csv";
pub const ATTEMPTS_FILE: &str = "attempts.csv";
pub const ATTEMPTS_HEADER: &str = "attempt,iterations,training_accuracy,kept";
pub const EVAL_HEADER: &str = "length,n,accuracy,stderr";

/// Parses `A..B` (inclusive) or a single number.
pub fn parse_range(text: &str) -> Result<(usize, usize), CliError> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("bad number {s:?} in range {text:?}")))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let n = num(text)?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(invalid(format!("empty range {text:?}")));
    }
    Ok((lo, hi))
}

/// Comma-separated lengths and inclusive ranges, e.g. `5,7,9..13`.
pub fn parse_lengths(text: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let (lo, hi) = parse_range(part)?;
        out.extend(lo..=hi);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| invalid(format!("bad number {s:?} in list {text:?}")))
        })
        .collect()
}

fn load_dataset(dir: &Path) -> Result<Dataset, CliError> {
    datasets::load(dir).map_err(|e| invalid(format!("dataset {}: {e}", dir.display())))
}

fn load_bundle(dir: &Path) -> Result<AbductiveModel, CliError> {
    trainer::load_model(dir)
        .map(|(m, _)| m)
        .map_err(|e| invalid(format!("model {}: {e}", dir.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| failed(format!("creating {}: {e}", path.display())))
}

pub fn gen_data(args: &GenDataArgs, threads: usize) -> Result<(), CliError> {
    let mut recorder = Recorder::start("gen-data", threads);
    let semantics: Semantics = args.semantics.parse().map_err(invalid)?;
    let family: GlyphFamily = args.glyphs.parse().map_err(invalid)?;
    let mut glyphs = GlyphFamilySpec::for_family(family, args.glyph_seed.unwrap_or(args.seed));
    if let Some(sigma) = args.noise_sigma {
        glyphs.noise_sigma = sigma;
    }
    let mut spec = DatasetSpec::new(semantics, glyphs, parse_lengths(&args.lengths)?, args.per_length, args.seed);
    spec.positive_fraction = args.positive_fraction;
    spec.validate().map_err(invalid)?;

    let (dataset, truth) = datasets::generate(&spec).map_err(failed)?;
    datasets::save(&dataset, &truth, &args.out).map_err(failed)?;
    recorder.output(&args.out);
    let seeds = BTreeMap::from([
        ("seed".to_string(), spec.seed),
        ("glyph_seed".to_string(), spec.glyphs.seed),
    ]);
    recorder.finish(&args.out.join(RUN_MANIFEST), json!({ "dataset": spec }), seeds)?;
    println!("wrote {} instances to {}", dataset.len(), args.out.display());
    Ok(())
}

fn trainer_config(args: &TrainArgs) -> Result<TrainerConfig, CliError> {
    let (subsample_min, subsample_max) = parse_range(&args.subsample)?;
    let cfg = TrainerConfig {
        iterations: args.iters,
        subsample_min,
        subsample_max,
        k: args.k,
        feature_capacity: args.features,
        curriculum: parse_list(&args.curriculum)?,
        seed: args.seed,
        restarts: args.restarts,
        accept_accuracy: args.accept_accuracy,
        ..TrainerConfig::default()
    };
    cfg.validate().map_err(invalid)?;
    Ok(cfg)
}

pub fn train(args: &TrainArgs, threads: usize) -> Result<(), CliError> {
    let mut recorder = Recorder::start("train", threads);
    let cfg = trainer_config(args)?;
    let data = load_dataset(&args.data)?;
    let source = args.from.as_deref().map(load_bundle).transpose()?;
    if source.is_some() && !args.freeze_perception && !args.freeze_knowledge {
        return Err(invalid("--from needs --freeze-perception or --freeze-knowledge"));
    }

    let probe_manifest = CorpusManifest {
        spec: GlyphFamilySpec {
            seed: args.probe_seed,
            ..data.spec.glyphs.clone()
        },
        per_class: args.probe_per_class,
    };
    let (probe_images, probe_labels) = probe_manifest.render();
    let probe: Vec<(&GlyphImage, Sym)> = probe_images.iter().zip(probe_labels).collect();
    let probe = (!probe.is_empty()).then_some(probe.as_slice());

    let (mode, run) = match &source {
        Some(src) if args.freeze_perception => (
            "freeze_perception",
            trainer::transfer_perception(src.perception(), &data.instances, &cfg, probe),
        ),
        Some(src) => ("freeze_knowledge", trainer::transfer_knowledge(src, &data.instances, &cfg, probe)),
        None => ("scratch", trainer::fit(&data.instances, &cfg, probe)),
    };
    let run = run.map_err(failed)?;

    fs::create_dir_all(&args.out).map_err(failed)?;
    trainer::save_model(&run.model, &cfg, &args.out).map_err(failed)?;
    let mut log = create(&args.out.join(LOG_FILE))?;
    trainer::write_log_csv(&run.log, &mut log).map_err(failed)?;
    log.flush().map_err(failed)?;
    write_attempts(&run, &args.out.join(ATTEMPTS_FILE))?;
    recorder.output(&args.out);

    let config = json!({
        "mode": mode,
        "trainer": cfg,
        "data": args.data,
        "from": args.from,
        "probe": probe_manifest,
    });
    let seeds = BTreeMap::from([
        ("seed".to_string(), cfg.seed),
        ("probe_seed".to_string(), args.probe_seed),
        ("data_seed".to_string(), data.spec.seed),
        ("data_glyph_seed".to_string(), data.spec.glyphs.seed),
    ]);
    recorder.finish(&args.out.join(RUN_MANIFEST), config, seeds)?;

    println!("mode {mode}");
    println!(
        "attempts {} kept {} training accuracy {:.4}",
        run.attempts.len(),
        run.kept_attempt,
        run.training_accuracy()
    );
    match run.convergence_iteration() {
        Some(t) => println!("first fully consistent subsample at iteration {t}"),
        None => println!("no fully consistent subsample"),
    }
    if let Some(a) = run.final_perception_accuracy {
        println!("probe perception accuracy {a:.4}");
    }
    println!("{} features written to {}", run.model.features().len(), args.out.display());
    Ok(())
}

fn write_attempts(run: &TrainingRun, path: &Path) -> Result<(), CliError> {
    let mut out = create(path)?;
    let mut rows = vec![ATTEMPTS_HEADER.to_string()];
    for (i, a) in run.attempts.iter().enumerate() {
        let acc = a.training_accuracy.map(|x| x.to_string()).unwrap_or_default();
        rows.push(format!("{i},{},{acc},{}", a.iterations, u8::from(i == run.kept_attempt)));
    }
    writeln!(out, "{}", rows.join("\n"))
        .and_then(|_| out.flush())
        .map_err(failed)
}

pub fn eval(args: &EvalArgs, threads: usize) -> Result<(), CliError> {
    let mut recorder = Recorder::start("eval", threads);
    let model = load_bundle(&args.model)?;
    let data = load_dataset(&args.data)?;
    if data.is_empty() {
        return Err(invalid("dataset has no instances"));
    }

    let rows = model.accuracy_by_length(&data.instances);
    let total: usize = rows.iter().map(|r| r.count).sum();
    let hits: f64 = rows.iter().map(|r| r.accuracy * r.count as f64).sum();
    let overall = hits / total as f64;
    let stderr = |p: f64, n: usize| (p * (1.0 - p) / n as f64).sqrt();

    let mut out = create(&args.out)?;
    let mut text = format!("{EVAL_HEADER}\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            r.length,
            r.count,
            r.accuracy,
            stderr(r.accuracy, r.count)
        ));
    }
    text.push_str(&format!("all,{total},{overall:.6},{:.6}\n", stderr(overall, total)));
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(failed)?;
    print!("{text}");

    recorder.output(&args.out);
    let manifest_path = args.out.with_file_name(format!(
        "{}.run.json",
        args.out.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
    ));
    let config = json!({ "model": args.model, "data": args.data, "dataset": data.spec });
    let seeds = BTreeMap::from([
        ("data_seed".to_string(), data.spec.seed),
        ("data_glyph_seed".to_string(), data.spec.glyphs.seed),
    ]);
    recorder.finish(&manifest_path, config, seeds)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("5..8").unwrap(), (5, 8));
        assert_eq!(parse_range("5..=8").unwrap(), (5, 8));
        assert_eq!(parse_range("7").unwrap(), (7, 7));
        assert!(parse_range("8..5").is_err());
        assert!(parse_range("a..5").is_err());
    }

    #[test]
    fn length_lists() {
        assert_eq!(parse_lengths("5,7").unwrap(), vec![5, 7]);
        assert_eq!(parse_lengths("9..11,5").unwrap(), vec![5, 9, 10, 11]);
        assert!(parse_lengths("5,").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("5, 6,7").unwrap(), vec![5, 6, 7]);
        assert!(parse_list("5,,6").is_err());
    }
}
