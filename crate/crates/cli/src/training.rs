use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;
use tispell_core::augment::{read_records, AugmentConfig, Bucket, CorruptionRecord};
use tispell_core::config::KeyValues;
use tispell_core::fixtures;
use tispell_core::metrics::{evaluate_corpus, EvalReport, Level, MetricMode};
use tispell_neural::checkpoint::{self, TrainingState};
use tispell_neural::{
    examples_from_records, EncoderConfig, EpochStats, HeadMode, TiSpell, TrainConfig, Trainer, TrainingSource,
};

use crate::args::{SweepArgs, TrainArgs};
use crate::commands::require_seed;
use crate::io::read_lines;

const CONFIG_KEYS: &[&str] = &[
    "layers",
    "heads",
    "d_model",
    "d_ff",
    "max_len",
    "dropout",
    "head_layers",
    "head_mode",
    "learning_rate",
    "schedule",
    "warmup_steps",
    "weight_decay",
    "batch_size",
    "epochs",
    "w_c",
    "swap_loss_weight",
    "clip_norm",
    "seed",
];

/// Model and training settings: defaults, then the config file, then flags.
pub fn settings(a: &TrainArgs) -> Result<(EncoderConfig, TrainConfig)> {
    let mut enc = EncoderConfig::default();
    let mut tr = TrainConfig::default();
    let mut seed = a.seed;
    if let Some(path) = &a.config {
        let kv = KeyValues::load(path)?;
        kv.reject_unknown(CONFIG_KEYS)?;
        macro_rules! set {
            ($target:expr, $key:literal) => {
                if let Some(v) = kv.get($key)? {
                    $target = v;
                }
            };
        }
        set!(enc.layers, "layers");
        set!(enc.heads, "heads");
        set!(enc.d_model, "d_model");
        set!(enc.d_ff, "d_ff");
        set!(enc.max_len, "max_len");
        set!(enc.dropout, "dropout");
        set!(enc.head_layers, "head_layers");
        set!(enc.head_mode, "head_mode");
        set!(tr.learning_rate, "learning_rate");
        set!(tr.schedule, "schedule");
        set!(tr.warmup_steps, "warmup_steps");
        set!(tr.weight_decay, "weight_decay");
        set!(tr.batch_size, "batch_size");
        set!(tr.epochs, "epochs");
        set!(tr.w_c, "w_c");
        set!(tr.swap_loss_weight, "swap_loss_weight");
        if let Some(v) = kv.get::<f64>("clip_norm")? {
            tr.clip_norm = Some(v);
        }
        if seed.is_none() {
            seed = kv.get("seed")?;
        }
    }
    if let Some(v) = a.epochs {
        tr.epochs = v;
    }
    if let Some(v) = a.learning_rate {
        tr.learning_rate = v;
    }
    if let Some(v) = a.batch_size {
        tr.batch_size = v;
    }
    if let Some(v) = a.w_c {
        tr.w_c = v;
    }
    if a.swap_loss_weight {
        tr.swap_loss_weight = true;
    }
    if let Some(v) = a.head_layers {
        enc.head_layers = v as usize;
    }
    if a.single_head {
        enc.head_mode = HeadMode::SingleHead;
    }
    if a.no_residual {
        enc.head_mode = HeadMode::NoResidual;
    }
    tr.seed = require_seed(seed)?;
    enc.validate()?;
    tr.validate()?;
    Ok((enc, tr))
}

fn training_source(a: &TrainArgs, seed: u64) -> Result<TrainingSource> {
    if let Some(path) = &a.dataset {
        let records = read_records(path)?;
        if records.is_empty() {
            bail!("{} holds no records", path.display());
        }
        return Ok(TrainingSource::Records(records));
    }
    let path = a.corpus.as_ref().context("either --dataset or --corpus is required")?;
    let lines = read_lines(Some(path))?;
    let augment = AugmentConfig {
        mode: a.mode.parse()?,
        alphabet_override: a.fixture_alphabet.then(fixtures::alphabet),
        table_path: a.table.clone(),
        seed,
        ..AugmentConfig::default()
    };
    Ok(TrainingSource::Regenerate { lines, augment })
}

fn metrics_path(a: &TrainArgs) -> PathBuf {
    a.metrics.clone().unwrap_or_else(|| {
        let mut p = a.output.as_os_str().to_owned();
        p.push(".metrics.csv");
        PathBuf::from(p)
    })
}

fn classification_f1(report: &EvalReport, bucket: Bucket) -> Option<f64> {
    report.bucket(bucket).map(|b| b.classification.f1)
}

fn metrics_header(with_eval: bool) -> String {
    let mut h = String::from("epoch,seed,steps,loss,semi_mask,final,learning_rate");
    if with_eval {
        for b in Bucket::all() {
            let _ = write!(h, ",f1_{}", b.name());
        }
        h.push_str(",f1_overall");
    }
    h
}

fn metrics_row(stats: &EpochStats, seed: u64, report: Option<&EvalReport>) -> String {
    let mut row = format!(
        "{},{},{},{:.6},{:.6},{:.6},{:e}",
        stats.epoch, seed, stats.steps, stats.loss, stats.semi_mask, stats.final_, stats.learning_rate
    );
    if let Some(r) = report {
        for b in Bucket::all() {
            match classification_f1(r, b) {
                Some(f) => {
                    let _ = write!(row, ",{f:.6}");
                }
                None => row.push(','),
            }
        }
        let overall = r
            .level(Level::Overall, MetricMode::Classification)
            .map_or(0.0, |s| s.f1);
        let _ = write!(row, ",{overall:.6}");
    }
    row
}

fn save(path: &Path, trainer: &Trainer) -> Result<()> {
    let state = TrainingState {
        config: trainer.config.clone(),
        epochs_done: trainer.epochs_done,
        optimizer_step: trainer.optimizer.step,
    };
    checkpoint::save(path, &trainer.model, Some((&state, &trainer.optimizer)))?;
    Ok(())
}

/// Trains to the configured epoch count; returns the trainer and the last epoch's stats.
pub fn run_training(a: &TrainArgs) -> Result<(Trainer, Option<EpochStats>)> {
    let eval_records: Option<Vec<CorruptionRecord>> = a.eval_dataset.as_deref().map(read_records).transpose()?;
    let resumed = a.resume.is_some();
    let mut trainer = match &a.resume {
        Some(path) => {
            let ck = checkpoint::load(path)?;
            let (state, optimizer) = match (ck.training, ck.optimizer) {
                (Some(s), Some(o)) => (s, o),
                _ => bail!("{} carries no optimizer state to resume from", path.display()),
            };
            let mut cfg = state.config;
            if let Some(e) = a.epochs {
                cfg.epochs = e;
            }
            Trainer::resume(ck.model, cfg, optimizer, state.epochs_done)?
        }
        None => {
            let (enc, tr) = settings(a)?;
            let source = training_source(a, tr.seed)?;
            let model = TiSpell::new(enc, source.vocab()?, tr.seed)?;
            Trainer::new(model, tr)?
        }
    };
    let source = training_source(a, trainer.config.seed)?;
    info!(
        "{} head mode, vocabulary {}, {} parameters, seed {}",
        trainer.model.config.head_mode,
        trainer.model.vocab.len(),
        trainer.model.params.parameter_count(),
        trainer.config.seed
    );

    let metrics = metrics_path(a);
    let mut log = OpenOptions::new()
        .create(true)
        .write(true)
        .append(resumed)
        .truncate(!resumed)
        .open(&metrics)
        .with_context(|| format!("cannot open {}", metrics.display()))?;
    if !resumed {
        writeln!(log, "{}", metrics_header(eval_records.is_some()))?;
        save(&a.output, &trainer)?;
    }

    let mut last = None;
    let max_len = trainer.model.config.max_len;
    while trainer.epochs_done < trainer.config.epochs {
        let records = source.records(trainer.epochs_done)?;
        let examples = examples_from_records(&records, &trainer.model.vocab, max_len);
        let stats = trainer.train_epoch(&examples).with_context(|| {
            format!(
                "training aborted; {} keeps the last good checkpoint",
                a.output.display()
            )
        })?;
        let report = eval_records.as_ref().map(|r| evaluate_corpus(r, &trainer.model));
        writeln!(log, "{}", metrics_row(&stats, trainer.config.seed, report.as_ref()))?;
        log.flush()?;
        save(&a.output, &trainer)?;
        last = Some(stats);
    }
    Ok((trainer, last))
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let (trainer, _) = run_training(a)?;
    info!("wrote {} after {} epochs", a.output.display(), trainer.epochs_done);
    Ok(())
}

pub const SWEEP_HEADER: &str = "w_c,epochs,loss,semi_mask,final,f1_char,f1_syllable,f1_overall,f1_mixed";

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let eval_path = a.train.eval_dataset.as_ref().context("sweep requires --eval-dataset")?;
    let eval_records = read_records(eval_path)?;
    if a.train.resume.is_some() {
        bail!("sweep does not support --resume");
    }
    println!("{SWEEP_HEADER}");
    for &w in &a.values {
        let mut args = a.train.clone();
        args.w_c = Some(w);
        args.eval_dataset = None;
        let mut path = a.train.output.as_os_str().to_owned();
        path.push(format!(".wc{w}"));
        args.output = PathBuf::from(path);
        args.metrics = None;
        let (trainer, last) = run_training(&args)?;
        let report = evaluate_corpus(&eval_records, &trainer.model);
        let level = |l| report.level(l, MetricMode::Classification).map_or(0.0, |s| s.f1);
        let (loss, semi, fin) = last.map_or((f64::NAN, f64::NAN, f64::NAN), |s| (s.loss, s.semi_mask, s.final_));
        let row = format!(
            "{w},{},{loss:.6},{semi:.6},{fin:.6},{:.6},{:.6},{:.6},{:.6}",
            trainer.epochs_done,
            level(Level::Char),
            level(Level::Syllable),
            level(Level::Overall),
            classification_f1(&report, Bucket::Mixed).unwrap_or(0.0)
        );
        println!("{row}");
    }
    Ok(())
}
