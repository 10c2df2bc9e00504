use std::fmt::Write as _;
use std::io::Write as _;

use anyhow::{bail, Context, Result};
use log::info;
use tispell_core::augment::{parse_alphabet, read_records, synthesize_lines, AugmentConfig, Synthesizer};
use tispell_core::baselines::{FrequencyDictionary, NgramModel, DEFAULT_LAMBDAS};
use tispell_core::correct::{CorrectorRegistry, SystemArgs};
use tispell_core::fixtures::{self, Fixture, FixtureConfig};
use tispell_core::metrics::evaluate_corpus;
use tispell_core::script;
use tispell_neural::{attention_csv, TiSpell};

use crate::args::{AttentionArgs, BaselineArgs, CorrectArgs, CorruptArgs, EvalArgs, FixtureArgs, SegmentArgs};
use crate::io::{read_bytes, read_lines, utf8_lines, write_output};

/// Commands with a `--seed` must be given one explicitly when `CI` is set.
pub fn require_seed(seed: Option<u64>) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None if std::env::var_os("CI").is_some() => bail!("--seed is mandatory when CI is set"),
        None => Ok(0),
    }
}

pub fn segment_cmd_output(lines: &[&str]) -> String {
    let mut out = String::new();
    for line in lines {
        let _ = writeln!(out, "{}", script::segment(line).strings().join("\t"));
    }
    out
}

pub fn segment(a: &SegmentArgs) -> Result<()> {
    let bytes = read_bytes(a.input.as_deref())?;
    let lines = utf8_lines(&bytes)?;
    write_output(None, &segment_cmd_output(&lines))
}

pub fn corrupt(a: &CorruptArgs) -> Result<()> {
    let alphabet = match (&a.alphabet, a.fixture_alphabet) {
        (Some(s), _) => Some(parse_alphabet(s)?),
        (None, true) => Some(fixtures::alphabet()),
        (None, false) => None,
    };
    let config = AugmentConfig {
        mode: a.mode.parse()?,
        corruption_rate: a.corruption_rate,
        max_syllables: a.max_syllables,
        alphabet_override: alphabet,
        table_path: a.table.clone(),
        seed: require_seed(a.seed)?,
    };
    let synth = Synthesizer::new(config)?;
    let lines = read_lines(Some(&a.input))?;
    let mut out = String::new();
    let summary = synthesize_lines(&lines, &synth, |r| {
        out.push_str(&r.to_json_line());
        out.push('\n');
        Ok(())
    })?;
    write_output(a.output.as_deref(), &out)?;
    eprintln!("{summary}");
    Ok(())
}

pub fn fixtures(a: &FixtureArgs) -> Result<()> {
    let cfg = FixtureConfig {
        sentences: a.sentences,
        lexicon_size: a.lexicon_size,
        branching: a.branching,
        seed: a.seed,
        ..FixtureConfig::default()
    };
    let fx = Fixture::generate(&cfg)?;
    let mut out = String::new();
    for s in &fx.sentences {
        out.push_str(s);
        out.push('\n');
    }
    write_output(a.output.as_deref(), &out)?;
    info!(
        "{} sentences over {} syllables and {} characters",
        fx.sentences.len(),
        fx.lexicon.len(),
        fx.characters().len()
    );
    Ok(())
}

pub fn train_baseline(a: &BaselineArgs) -> Result<()> {
    if !(1..=2).contains(&a.max_edit_distance) {
        bail!("--max-edit-distance must be 1 or 2");
    }
    let lines = read_lines(Some(&a.corpus))?;
    let dict = FrequencyDictionary::from_sentences(lines.iter().map(String::as_str), a.max_edit_distance);
    dict.save(&a.dict)?;
    info!("dictionary: {} syllables -> {}", dict.len(), a.dict.display());
    if let Some(path) = &a.ngram {
        let model = NgramModel::train(lines.iter().map(String::as_str), &dict, a.k, DEFAULT_LAMBDAS)?;
        model.save(path)?;
        info!("trigram model -> {}", path.display());
    }
    Ok(())
}

pub fn registry() -> CorrectorRegistry {
    let mut r = CorrectorRegistry::with_builtins();
    tispell_neural::register(&mut r);
    r
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let records = read_records(&a.dataset)?;
    let args = SystemArgs {
        dict: a.artifacts.dict.clone(),
        ngram: a.artifacts.ngram.clone(),
        model: a.artifacts.model.clone(),
    };
    for p in [&args.dict, &args.ngram, &args.model].into_iter().flatten() {
        if !p.exists() {
            bail!("{} does not exist", p.display());
        }
    }
    let system = registry().build(&a.system, &args)?;
    let report = evaluate_corpus(&records, system.as_ref());
    write_output(a.output.as_deref(), &report.to_csv())?;
    eprint!("{report}");
    Ok(())
}

pub fn correct(a: &CorrectArgs) -> Result<()> {
    let model = TiSpell::load(&a.model)?;
    let lines = read_lines(a.input.as_deref())?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (i, line) in lines.iter().enumerate() {
        let c = model.correct_both(line)?;
        if c.truncated > 0 {
            eprintln!("warning: line {} truncated by {} characters", i + 1, c.truncated);
        }
        if a.show_semimask {
            writeln!(out, "{}", c.semi_mask)?;
        }
        writeln!(out, "{}", c.final_text)?;
    }
    Ok(())
}

pub fn parse_layer_head(spec: &str) -> Result<(usize, usize)> {
    let (l, h) = spec.split_once(':').context("expected LAYER:HEAD")?;
    Ok((
        l.trim().parse().context("layer is not a number")?,
        h.trim().parse().context("head is not a number")?,
    ))
}

pub fn attention(a: &AttentionArgs) -> Result<()> {
    let (layer, head) = parse_layer_head(&a.export_attention)?;
    let model = TiSpell::load(&a.model)?;
    let matrix = model.attention(&a.text, layer, head)?;
    write_output(a.output.as_deref(), &attention_csv(&matrix))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_head_parsing() {
        assert_eq!(parse_layer_head("1:0").unwrap(), (1, 0));
        assert!(parse_layer_head("1").is_err());
        assert!(parse_layer_head("a:1").is_err());
    }

    #[test]
    fn segment_output_is_tab_separated() {
        assert_eq!(segment_cmd_output(&["ཀ་ཁ", "", "ག"]), "ཀ\tཁ\n\nག\n");
    }

    #[test]
    fn registry_has_every_system() {
        assert_eq!(registry().names(), vec!["dict", "dummy", "ngram", "tispell"]);
    }
}
