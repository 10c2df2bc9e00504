use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{apply_one, mixed_corrupt, CorruptionContext, CorruptionId};
use crate::error::{Error, Result};
use crate::rng::{child_seed, Draw, Rng};
use crate::script::{is_delimiter, is_tibetan, join, segment, ScriptTable, MASK_TOKEN};

/// One synthesized example, serialized as a single JSON line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionRecord {
    pub id: String,
    pub source: String,
    pub corrupted: String,
    pub semi_mask: String,
    pub ops: Vec<CorruptionId>,
    pub seed: u64,
    #[serde(skip)]
    pub noops: Vec<CorruptionId>,
}

impl CorruptionRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn bucket(&self) -> Bucket {
        bucket_of(&self.ops)
    }
}

/// Evaluation groups: clean control, one per operator, and mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bucket {
    Clean,
    Single(CorruptionId),
    Mixed,
}

pub const BUCKETS: usize = 11;

impl Bucket {
    pub fn all() -> Vec<Bucket> {
        std::iter::once(Bucket::Clean)
            .chain(CorruptionId::ALL.into_iter().map(Bucket::Single))
            .chain(std::iter::once(Bucket::Mixed))
            .collect()
    }

    pub fn from_index(i: usize) -> Bucket {
        match i {
            0 => Bucket::Clean,
            1..=9 => Bucket::Single(CorruptionId::ALL[i - 1]),
            _ => Bucket::Mixed,
        }
    }

    pub fn name(self) -> String {
        match self {
            Bucket::Clean => "clean".into(),
            Bucket::Single(id) => id.name().into(),
            Bucket::Mixed => "mixed".into(),
        }
    }

    pub fn is_syllable_level(self) -> bool {
        matches!(self, Bucket::Single(id) if id.is_syllable_level())
    }

    pub fn is_char_level(self) -> bool {
        matches!(self, Bucket::Single(id) if !id.is_syllable_level())
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub fn bucket_of(ops: &[CorruptionId]) -> Bucket {
    match ops {
        [] => Bucket::Clean,
        [id] => Bucket::Single(*id),
        _ => Bucket::Mixed,
    }
}

/// How sentences are corrupted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// No corruption; every record is a control sentence.
    Clean,
    /// Three distinct operators per sentence.
    Mixed,
    /// The same operator for every sentence.
    Only(CorruptionId),
    /// One operator per sentence, drawn uniformly.
    Single,
    /// Line `i` goes to bucket `i mod 11` (balanced evaluation sets).
    Buckets,
    /// Each line draws one of the 11 buckets uniformly.
    Uniform,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "clean" => Mode::Clean,
            "mixed" => Mode::Mixed,
            "single" => Mode::Single,
            "buckets" => Mode::Buckets,
            "uniform" => Mode::Uniform,
            other => Mode::Only(other.parse().map_err(|_| {
                Error::Config(format!(
                    "unknown mode `{other}` (expected clean, mixed, single, buckets, uniform or an operator name)"
                ))
            })?),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Clean => f.write_str("clean"),
            Mode::Mixed => f.write_str("mixed"),
            Mode::Only(id) => f.write_str(id.name()),
            Mode::Single => f.write_str("single"),
            Mode::Buckets => f.write_str("buckets"),
            Mode::Uniform => f.write_str("uniform"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub mode: Mode,
    /// Probability that a sentence is corrupted at all.
    pub corruption_rate: f64,
    /// Lines with more syllables are skipped.
    pub max_syllables: usize,
    pub alphabet_override: Option<Vec<char>>,
    pub table_path: Option<PathBuf>,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Mixed,
            corruption_rate: 1.0,
            max_syllables: 128,
            alphabet_override: None,
            table_path: None,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.corruption_rate) {
            return Err(Error::Config(format!(
                "corruption_rate must lie in [0, 1], got {}",
                self.corruption_rate
            )));
        }
        if self.max_syllables == 0 {
            return Err(Error::Config("max_syllables must be positive".into()));
        }
        if matches!(&self.alphabet_override, Some(a) if a.is_empty()) {
            return Err(Error::Config("alphabet_override is empty".into()));
        }
        Ok(())
    }

    pub fn context(&self) -> Result<CorruptionContext> {
        let ctx = CorruptionContext::new(ScriptTable::resolve(self.table_path.as_deref())?);
        Ok(match &self.alphabet_override {
            Some(a) => ctx.with_alphabet(a.clone()),
            None => ctx,
        })
    }
}

/// Parses an alphabet given either as `U+XXXX` codepoints or as literal characters.
pub fn parse_alphabet(value: &str) -> Result<Vec<char>> {
    let tokens: Vec<&str> = value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .collect();
    let chars: Vec<char> = if !tokens.is_empty() && tokens.iter().all(|t| t.starts_with("U+") || t.starts_with("u+")) {
        tokens
            .iter()
            .map(|t| {
                u32::from_str_radix(&t[2..], 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| Error::Config(format!("bad codepoint `{t}` in alphabet")))
            })
            .collect::<Result<_>>()?
    } else {
        tokens.iter().flat_map(|t| t.chars()).collect()
    };
    if chars.iter().any(|&c| is_delimiter(c)) {
        return Err(Error::Config("alphabet contains a delimiter".into()));
    }
    Ok(chars)
}

impl AugmentConfig {
    pub fn set_alphabet(&mut self, value: &str) -> Result<()> {
        self.alphabet_override = Some(parse_alphabet(value)?);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SkipReason {
    Empty,
    NonTibetan,
    TooLong,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynthesisSummary {
    pub records: usize,
    pub clean: usize,
    pub applied: BTreeMap<CorruptionId, usize>,
    pub noops: BTreeMap<CorruptionId, usize>,
    pub skipped: BTreeMap<SkipReason, usize>,
}

impl SynthesisSummary {
    pub fn noop_total(&self) -> usize {
        self.noops.values().sum()
    }

    pub fn skipped_total(&self) -> usize {
        self.skipped.values().sum()
    }

    fn count(&mut self, record: &CorruptionRecord) {
        self.records += 1;
        if record.ops.is_empty() {
            self.clean += 1;
        }
        for id in &record.ops {
            if !record.noops.contains(id) {
                *self.applied.entry(*id).or_default() += 1;
            }
        }
        for id in &record.noops {
            *self.noops.entry(*id).or_default() += 1;
        }
    }
}

impl fmt::Display for SynthesisSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records: {} (clean: {})", self.records, self.clean)?;
        for id in CorruptionId::ALL {
            writeln!(
                f,
                "  {:<24} applied {:>7}  noop {:>5}",
                id.name(),
                self.applied.get(&id).copied().unwrap_or(0),
                self.noops.get(&id).copied().unwrap_or(0)
            )?;
        }
        write!(
            f,
            "noops: {}  skipped lines: {} (empty {}, non-Tibetan {}, too long {})",
            self.noop_total(),
            self.skipped_total(),
            self.skipped.get(&SkipReason::Empty).unwrap_or(&0),
            self.skipped.get(&SkipReason::NonTibetan).unwrap_or(&0),
            self.skipped.get(&SkipReason::TooLong).unwrap_or(&0),
        )
    }
}

/// Turns corpus lines into records. Each line draws from its own child seed,
/// so output does not depend on processing order.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    config: AugmentConfig,
    ctx: CorruptionContext,
}

impl Synthesizer {
    pub fn new(config: AugmentConfig) -> Result<Self> {
        config.validate()?;
        let ctx = config.context()?;
        Ok(Self { config, ctx })
    }

    pub fn with_context(config: AugmentConfig, ctx: CorruptionContext) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, ctx })
    }

    pub fn config(&self) -> &AugmentConfig {
        &self.config
    }

    pub fn context(&self) -> &CorruptionContext {
        &self.ctx
    }

    /// `Ok(Err(reason))` for a skipped line; `Err` only for reserved-token input.
    pub fn record(&self, line_index: usize, line: &str) -> Result<std::result::Result<CorruptionRecord, SkipReason>> {
        let text = line.trim_end_matches(['\r', '\n']);
        if text.contains(MASK_TOKEN) {
            return Err(Error::ReservedToken { line: line_index + 1 });
        }
        let seq = segment(text);
        if seq.is_empty() {
            return Ok(Err(SkipReason::Empty));
        }
        if text.chars().any(|c| !is_delimiter(c) && !is_tibetan(c)) {
            return Ok(Err(SkipReason::NonTibetan));
        }
        if seq.len() > self.config.max_syllables {
            return Ok(Err(SkipReason::TooLong));
        }

        let seed = child_seed(self.config.seed, line_index as u64);
        let mut rng = Rng::new(seed);
        let corrupt = self.config.corruption_rate >= 1.0 || rng.unit() < self.config.corruption_rate;
        let bucket = if !corrupt {
            Bucket::Clean
        } else {
            match self.config.mode {
                Mode::Clean => Bucket::Clean,
                Mode::Mixed => Bucket::Mixed,
                Mode::Only(id) => Bucket::Single(id),
                Mode::Single => Bucket::Single(CorruptionId::ALL[rng.below(CorruptionId::ALL.len())]),
                Mode::Buckets => Bucket::from_index(line_index % BUCKETS),
                Mode::Uniform => Bucket::from_index(rng.below(BUCKETS)),
            }
        };

        let clean = |noops: Vec<CorruptionId>| CorruptionRecord {
            id: format!("{:06}", line_index + 1),
            source: text.to_string(),
            corrupted: text.to_string(),
            semi_mask: text.to_string(),
            ops: Vec::new(),
            seed,
            noops,
        };
        let record = match bucket {
            Bucket::Clean => clean(Vec::new()),
            Bucket::Single(id) => {
                let out = apply_one(id, &seq, &mut rng, &self.ctx);
                if out.noop {
                    clean(vec![id])
                } else {
                    CorruptionRecord {
                        corrupted: join(&out.seq),
                        semi_mask: join(&out.semi_mask),
                        ops: vec![id],
                        ..clean(Vec::new())
                    }
                }
            }
            Bucket::Mixed => {
                let out = mixed_corrupt(&seq, &mut rng, &self.ctx);
                if out.ops.is_empty() {
                    clean(Vec::new())
                } else {
                    CorruptionRecord {
                        corrupted: join(&out.seq),
                        semi_mask: join(&out.semi_mask),
                        ops: out.ops,
                        noops: out.noops,
                        ..clean(Vec::new())
                    }
                }
            }
        };
        Ok(Ok(record))
    }
}

/// Synthesizes one record per usable line, in input order, handing each to `sink`.
pub fn synthesize_lines<I, S>(
    lines: I,
    synthesizer: &Synthesizer,
    mut sink: impl FnMut(CorruptionRecord) -> Result<()>,
) -> Result<SynthesisSummary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut summary = SynthesisSummary::default();
    for (idx, line) in lines.into_iter().enumerate() {
        match synthesizer.record(idx, line.as_ref())? {
            Ok(record) => {
                summary.count(&record);
                sink(record)?;
            }
            Err(reason) => {
                if reason != SkipReason::Empty {
                    warn!("skipping line {}: {:?}", idx + 1, reason);
                }
                *summary.skipped.entry(reason).or_default() += 1;
            }
        }
    }
    Ok(summary)
}

pub fn synthesize_dataset(
    corpus_path: &Path,
    synthesizer: &Synthesizer,
    mut sink: impl FnMut(CorruptionRecord) -> Result<()>,
) -> Result<SynthesisSummary> {
    let file = std::fs::File::open(corpus_path).map_err(|e| Error::io(corpus_path, e))?;
    let mut lines = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Format {
                what: "corpus",
                line: idx + 1,
                message: "invalid UTF-8".into(),
            },
            _ => Error::io(corpus_path, e),
        })?;
        lines.push(line);
    }
    synthesize_lines(lines, synthesizer, &mut sink)
}

/// Parses JSON-lines records; blank lines are ignored.
pub fn parse_records(text: &str) -> Result<Vec<CorruptionRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Format {
                what: "dataset",
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_records(path: &Path) -> Result<Vec<CorruptionRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records(&text)
}
