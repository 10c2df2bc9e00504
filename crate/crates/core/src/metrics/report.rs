use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use super::{syllables, Confusion, CorrectionCounts, MetricMode, Scores};
use crate::augment::{Bucket, CorruptionRecord};
use crate::correct::Corrector;

#[derive(Debug, Clone, PartialEq)]
pub struct BucketReport {
    pub bucket: Bucket,
    pub sentences: usize,
    pub classification: Scores,
    pub correction: Scores,
    /// The system cannot repair this kind of corruption by construction.
    pub uncorrectable: bool,
}

impl BucketReport {
    pub fn scores(&self, mode: MetricMode) -> &Scores {
        match mode {
            MetricMode::Classification => &self.classification,
            MetricMode::Correction => &self.correction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Char,
    Syllable,
    Overall,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Char => "char-level",
            Level::Syllable => "syllable-level",
            Level::Overall => "overall",
        }
    }

    fn contains(self, b: Bucket) -> bool {
        match self {
            Level::Char => b.is_char_level(),
            Level::Syllable => b.is_syllable_level(),
            Level::Overall => true,
        }
    }
}

/// Per-bucket scores for one system. Buckets with no records are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub system: String,
    pub buckets: Vec<BucketReport>,
}

impl EvalReport {
    pub fn bucket(&self, bucket: Bucket) -> Option<&BucketReport> {
        self.buckets.iter().find(|b| b.bucket == bucket)
    }

    /// Support-weighted mean of the bucket scores within `level`.
    pub fn level(&self, level: Level, mode: MetricMode) -> Option<Scores> {
        let members: Vec<&Scores> = self
            .buckets
            .iter()
            .filter(|b| level.contains(b.bucket))
            .map(|b| b.scores(mode))
            .collect();
        let support: usize = members.iter().map(|s| s.support).sum();
        if members.is_empty() || support == 0 {
            return None;
        }
        let w = |f: fn(&Scores) -> f64| members.iter().map(|s| f(s) * s.support as f64).sum::<f64>() / support as f64;
        Some(Scores {
            precision: w(|s| s.precision),
            recall: w(|s| s.recall),
            f1: w(|s| s.f1),
            tp: members.iter().map(|s| s.tp).sum(),
            fp: members.iter().map(|s| s.fp).sum(),
            fn_: members.iter().map(|s| s.fn_).sum(),
            support,
        })
    }

    /// Rows of `(name, mode, scores)`: buckets first, then level summaries.
    pub fn rows(&self) -> Vec<(String, MetricMode, Scores)> {
        let mut rows = Vec::new();
        for mode in [MetricMode::Classification, MetricMode::Correction] {
            for b in &self.buckets {
                rows.push((b.bucket.name(), mode, *b.scores(mode)));
            }
            for level in [Level::Char, Level::Syllable, Level::Overall] {
                if let Some(s) = self.level(level, mode) {
                    rows.push((level.name().to_string(), mode, s));
                }
            }
        }
        rows
    }

    pub const CSV_HEADER: &'static str = "bucket,mode,precision,recall,f1,tp,fp,fn,support";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (name, mode, s) in self.rows() {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{},{},{},{}",
                name,
                mode.name(),
                s.precision,
                s.recall,
                s.f1,
                s.tp,
                s.fp,
                s.fn_,
                s.support
            );
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system: {}", self.system)?;
        writeln!(
            f,
            "{:<24} {:>6} | {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7}",
            "bucket", "sents", "cls-P", "cls-R", "cls-F1", "cor-P", "cor-R", "cor-F1"
        )?;
        let pct = |x: f64| format!("{:7.2}", 100.0 * x);
        for b in &self.buckets {
            if b.uncorrectable {
                writeln!(
                    f,
                    "{:<24} {:>6} | {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7}",
                    b.bucket.name(),
                    b.sentences,
                    "-",
                    "-",
                    "-",
                    "-",
                    "-",
                    "-"
                )?;
                continue;
            }
            let (c, r) = (&b.classification, &b.correction);
            writeln!(
                f,
                "{:<24} {:>6} | {} {} {} | {} {} {}",
                b.bucket.name(),
                b.sentences,
                pct(c.precision),
                pct(c.recall),
                pct(c.f1),
                pct(r.precision),
                pct(r.recall),
                pct(r.f1)
            )?;
        }
        for level in [Level::Char, Level::Syllable, Level::Overall] {
            if let (Some(c), Some(r)) = (
                self.level(level, MetricMode::Classification),
                self.level(level, MetricMode::Correction),
            ) {
                writeln!(
                    f,
                    "{:<24} {:>6} | {} {} {} | {} {} {}",
                    level.name(),
                    "",
                    pct(c.precision),
                    pct(c.recall),
                    pct(c.f1),
                    pct(r.precision),
                    pct(r.recall),
                    pct(r.f1)
                )?;
            }
        }
        Ok(())
    }
}

/// Runs `system` over every record's corrupted text and scores it per bucket.
pub fn evaluate_corpus(records: &[CorruptionRecord], system: &dyn Corrector) -> EvalReport {
    let hyps: Vec<String> = records.iter().map(|r| system.correct(&r.corrupted)).collect();
    evaluate_outputs(records, &hyps, system.name(), system.corrects_syllable_level())
}

/// Scores precomputed outputs, `hyps[i]` being the correction of `records[i]`.
pub fn evaluate_outputs(
    records: &[CorruptionRecord],
    hyps: &[String],
    system: &str,
    corrects_syllable_level: bool,
) -> EvalReport {
    assert_eq!(records.len(), hyps.len(), "one output per record");
    let mut groups: BTreeMap<Bucket, (usize, Confusion, CorrectionCounts)> = BTreeMap::new();
    for (record, hyp) in records.iter().zip(hyps) {
        let reference = syllables(&record.source);
        let src = syllables(&record.corrupted);
        let hyp = syllables(hyp);
        let entry = groups.entry(record.bucket()).or_default();
        entry.0 += 1;
        entry.1.add(&reference, &hyp);
        entry.2.add(&src, &reference, &hyp);
    }
    let buckets = Bucket::all()
        .into_iter()
        .filter_map(|bucket| {
            groups
                .remove(&bucket)
                .map(|(sentences, confusion, counts)| BucketReport {
                    bucket,
                    sentences,
                    classification: confusion.scores(),
                    correction: counts.scores(),
                    uncorrectable: !corrects_syllable_level && bucket.is_syllable_level(),
                })
        })
        .collect();
    EvalReport {
        system: system.to_string(),
        buckets,
    }
}
