//! Character- and syllable-level corruption operators.
//!
//! Every operator performs at most one edit. When its precondition fails it
//! leaves the sentence untouched and reports a noop. Operators work on a
//! [`Work`] state that remembers which source syllables each current syllable
//! came from, so a syllable deletion can be masked at the right source
//! position even after earlier edits reordered or merged syllables.

mod dataset;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Draw;
use crate::script::{ScriptTable, Syllable, SyllableSeq};

pub use dataset::{
    bucket_of, parse_alphabet, parse_records, read_records, synthesize_dataset, synthesize_lines, AugmentConfig,
    Bucket, CorruptionRecord, Mode, SkipReason, SynthesisSummary, Synthesizer, BUCKETS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CorruptionId {
    CharDelete,
    CharInsert,
    CaseSubst,
    HomoglyphSubst,
    AdjSyllCharTranspose,
    InterSyllCharTranspose,
    SyllDelete,
    SyllTranspose,
    SyllMerge,
}

impl CorruptionId {
    pub const ALL: [CorruptionId; 9] = [
        CorruptionId::CharDelete,
        CorruptionId::CharInsert,
        CorruptionId::CaseSubst,
        CorruptionId::HomoglyphSubst,
        CorruptionId::AdjSyllCharTranspose,
        CorruptionId::InterSyllCharTranspose,
        CorruptionId::SyllDelete,
        CorruptionId::SyllTranspose,
        CorruptionId::SyllMerge,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            CorruptionId::CharDelete => "CharDelete",
            CorruptionId::CharInsert => "CharInsert",
            CorruptionId::CaseSubst => "CaseSubst",
            CorruptionId::HomoglyphSubst => "HomoglyphSubst",
            CorruptionId::AdjSyllCharTranspose => "AdjSyllCharTranspose",
            CorruptionId::InterSyllCharTranspose => "InterSyllCharTranspose",
            CorruptionId::SyllDelete => "SyllDelete",
            CorruptionId::SyllTranspose => "SyllTranspose",
            CorruptionId::SyllMerge => "SyllMerge",
        }
    }

    /// Name of the operator function implementing this corruption.
    pub fn operator_name(self) -> &'static str {
        match self {
            CorruptionId::CharDelete => "char_random_delete",
            CorruptionId::CharInsert => "char_random_insert",
            CorruptionId::CaseSubst => "char_case_substitution",
            CorruptionId::HomoglyphSubst => "char_homoglyph_substitution",
            CorruptionId::AdjSyllCharTranspose => "adjacent_syllable_char_transposition",
            CorruptionId::InterSyllCharTranspose => "inter_syllable_char_transposition",
            CorruptionId::SyllDelete => "syllable_random_delete",
            CorruptionId::SyllTranspose => "syllable_random_transposition",
            CorruptionId::SyllMerge => "syllable_random_merge",
        }
    }

    pub fn is_syllable_level(self) -> bool {
        self.code() >= 6
    }
}

impl fmt::Display for CorruptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorruptionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s) || id.operator_name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "corruption",
                name: s.to_string(),
            })
    }
}

/// Read-only inputs shared by all operators.
#[derive(Debug, Clone)]
pub struct CorruptionContext {
    pub table: ScriptTable,
    /// Characters eligible for random insertion.
    pub alphabet: Vec<char>,
}

impl CorruptionContext {
    pub fn new(table: ScriptTable) -> Self {
        let alphabet = table.alphabet();
        Self { table, alphabet }
    }

    pub fn with_alphabet(mut self, alphabet: Vec<char>) -> Self {
        self.alphabet = alphabet;
        self
    }
}

/// A sentence being corrupted, with per-syllable provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Work {
    syllables: Vec<Syllable>,
    origins: Vec<Vec<usize>>,
    masked: Vec<bool>,
    source: SyllableSeq,
}

impl Work {
    pub fn new(source: &SyllableSeq) -> Self {
        Self {
            syllables: source.items.clone(),
            origins: (0..source.len()).map(|i| vec![i]).collect(),
            masked: vec![false; source.len()],
            source: source.clone(),
        }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn corrupted(&self) -> SyllableSeq {
        SyllableSeq {
            items: self.syllables.clone(),
            trailing_delimiter: self.source.trailing_delimiter,
        }
    }

    /// The source with every deleted syllable replaced by the mask token.
    pub fn semi_mask(&self) -> SyllableSeq {
        let items = self
            .source
            .items
            .iter()
            .zip(&self.masked)
            .map(|(s, &m)| if m { Syllable::mask() } else { s.clone() })
            .collect();
        SyllableSeq {
            items,
            trailing_delimiter: self.source.trailing_delimiter,
        }
    }

    pub fn masked_positions(&self) -> Vec<usize> {
        (0..self.masked.len()).filter(|&i| self.masked[i]).collect()
    }

    fn remove(&mut self, idx: usize) {
        self.syllables.remove(idx);
        for o in self.origins.remove(idx) {
            self.masked[o] = true;
        }
    }
}

/// One corruption operator.
pub trait Corruption: Send + Sync {
    fn id(&self) -> CorruptionId;

    /// Applies one edit. Returns `false` without touching `work` when the precondition fails.
    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, ctx: &CorruptionContext) -> bool;
}

/// Picks uniformly among the indices satisfying `pred`.
fn pick_where<T>(items: &[T], rng: &mut dyn Draw, pred: impl Fn(&T) -> bool) -> Option<usize> {
    let eligible: Vec<usize> = (0..items.len()).filter(|&i| pred(&items[i])).collect();
    if eligible.is_empty() {
        None
    } else {
        Some(eligible[rng.below(eligible.len())])
    }
}

/// Two distinct indices in `0..n` (n >= 2).
fn pick_pair(n: usize, rng: &mut dyn Draw) -> (usize, usize) {
    let i = rng.below(n);
    let mut j = rng.below(n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

struct CharDelete;
struct CharInsert;
struct CaseSubst;
struct HomoglyphSubst;
struct AdjSyllCharTranspose;
struct InterSyllCharTranspose;
struct SyllDelete;
struct SyllTranspose;
struct SyllMerge;

impl Corruption for CharDelete {
    fn id(&self) -> CorruptionId {
        CorruptionId::CharDelete
    }

    // Syllables of length 1 are never chosen; removing their only character would erase the syllable.
    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, _: &CorruptionContext) -> bool {
        let Some(s) = pick_where(&work.syllables, rng, |s| s.len() >= 2) else {
            return false;
        };
        let chars = work.syllables[s].chars_mut();
        let c = rng.below(chars.len());
        chars.remove(c);
        true
    }
}

impl Corruption for CharInsert {
    fn id(&self) -> CorruptionId {
        CorruptionId::CharInsert
    }

    // Draw order: character, syllable, position.
    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, ctx: &CorruptionContext) -> bool {
        if work.is_empty() || ctx.alphabet.is_empty() {
            return false;
        }
        let ch = ctx.alphabet[rng.below(ctx.alphabet.len())];
        let s = rng.below(work.len());
        let chars = work.syllables[s].chars_mut();
        let pos = rng.below(chars.len() + 1);
        chars.insert(pos, ch);
        true
    }
}

/// Replaces one eligible character chosen by syllable, then by position within it.
fn substitute_eligible(
    work: &mut Work,
    rng: &mut dyn Draw,
    eligible: impl Fn(char) -> bool,
    replace: impl Fn(char, &mut dyn Draw) -> char,
) -> bool {
    let Some(s) = pick_where(&work.syllables, rng, |s| s.chars().iter().any(|&c| eligible(c))) else {
        return false;
    };
    let chars = work.syllables[s].chars_mut();
    let Some(p) = pick_where(chars, rng, |&c| eligible(c)) else {
        return false;
    };
    chars[p] = replace(chars[p], rng);
    true
}

impl Corruption for CaseSubst {
    fn id(&self) -> CorruptionId {
        CorruptionId::CaseSubst
    }

    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, ctx: &CorruptionContext) -> bool {
        let table = &ctx.table;
        substitute_eligible(
            work,
            rng,
            |c| table.case_counterpart(c).is_some(),
            |c, _| table.case_counterpart(c).expect("eligible"),
        )
    }
}

impl Corruption for HomoglyphSubst {
    fn id(&self) -> CorruptionId {
        CorruptionId::HomoglyphSubst
    }

    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, ctx: &CorruptionContext) -> bool {
        let table = &ctx.table;
        substitute_eligible(
            work,
            rng,
            |c| table.homoglyph_set(c).is_some(),
            |c, rng| {
                let others: Vec<char> = table
                    .homoglyph_set(c)
                    .expect("eligible")
                    .iter()
                    .copied()
                    .filter(|&o| o != c)
                    .collect();
                others[rng.below(others.len())]
            },
        )
    }
}

impl Corruption for AdjSyllCharTranspose {
    fn id(&self) -> CorruptionId {
        CorruptionId::AdjSyllCharTranspose
    }

    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, _: &CorruptionContext) -> bool {
        let Some(s) = pick_where(&work.syllables, rng, |s| s.len() > 2) else {
            return false;
        };
        let chars = work.syllables[s].chars_mut();
        let (i, j) = pick_pair(chars.len(), rng);
        chars.swap(i, j);
        true
    }
}

impl Corruption for InterSyllCharTranspose {
    fn id(&self) -> CorruptionId {
        CorruptionId::InterSyllCharTranspose
    }

    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, _: &CorruptionContext) -> bool {
        if work.len() < 2 {
            return false;
        }
        let k = rng.below(work.len() - 1);
        let i = rng.below(work.syllables[k].len());
        let j = rng.below(work.syllables[k + 1].len());
        let (left, right) = work.syllables.split_at_mut(k + 1);
        std::mem::swap(&mut left[k].chars_mut()[i], &mut right[0].chars_mut()[j]);
        true
    }
}

impl Corruption for SyllDelete {
    fn id(&self) -> CorruptionId {
        CorruptionId::SyllDelete
    }

    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, _: &CorruptionContext) -> bool {
        if work.len() < 2 {
            return false;
        }
        let idx = rng.below(work.len());
        work.remove(idx);
        true
    }
}

impl Corruption for SyllTranspose {
    fn id(&self) -> CorruptionId {
        CorruptionId::SyllTranspose
    }

    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, _: &CorruptionContext) -> bool {
        if work.len() < 2 {
            return false;
        }
        let (i, j) = pick_pair(work.len(), rng);
        work.syllables.swap(i, j);
        work.origins.swap(i, j);
        true
    }
}

impl Corruption for SyllMerge {
    fn id(&self) -> CorruptionId {
        CorruptionId::SyllMerge
    }

    fn apply(&self, work: &mut Work, rng: &mut dyn Draw, _: &CorruptionContext) -> bool {
        if work.len() < 2 {
            return false;
        }
        let idx = rng.below(work.len() - 1);
        let next = work.syllables.remove(idx + 1);
        work.syllables[idx].chars_mut().extend(next.into_chars());
        let next_origins = work.origins.remove(idx + 1);
        work.origins[idx].extend(next_origins);
        true
    }
}

/// All nine operators, addressable by id or name.
pub struct CorruptionRegistry {
    ops: Vec<Box<dyn Corruption>>,
}

impl Default for CorruptionRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl CorruptionRegistry {
    pub fn new() -> Self {
        let ops: Vec<Box<dyn Corruption>> = vec![
            Box::new(CharDelete),
            Box::new(CharInsert),
            Box::new(CaseSubst),
            Box::new(HomoglyphSubst),
            Box::new(AdjSyllCharTranspose),
            Box::new(InterSyllCharTranspose),
            Box::new(SyllDelete),
            Box::new(SyllTranspose),
            Box::new(SyllMerge),
        ];
        debug_assert!(ops.iter().enumerate().all(|(i, op)| op.id().code() == i));
        Self { ops }
    }

    pub fn get(&self, id: CorruptionId) -> &dyn Corruption {
        self.ops[id.code()].as_ref()
    }

    pub fn by_name(&self, name: &str) -> Result<&dyn Corruption> {
        Ok(self.get(name.parse()?))
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Corruption> {
        self.ops.iter().map(AsRef::as_ref)
    }
}

/// Result of a single operator on a whole sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub seq: SyllableSeq,
    pub semi_mask: SyllableSeq,
    pub noop: bool,
}

pub fn apply_one(id: CorruptionId, seq: &SyllableSeq, rng: &mut dyn Draw, ctx: &CorruptionContext) -> Applied {
    let mut work = Work::new(seq);
    let changed = CorruptionRegistry::new().get(id).apply(&mut work, rng, ctx);
    Applied {
        seq: work.corrupted(),
        semi_mask: work.semi_mask(),
        noop: !changed,
    }
}

macro_rules! operator_fns {
    ($($fn_name:ident => $id:ident),* $(,)?) => {
        $(
            pub fn $fn_name(seq: &SyllableSeq, rng: &mut dyn Draw, ctx: &CorruptionContext) -> Applied {
                apply_one(CorruptionId::$id, seq, rng, ctx)
            }
        )*
    };
}

operator_fns! {
    char_random_delete => CharDelete,
    char_random_insert => CharInsert,
    char_case_substitution => CaseSubst,
    char_homoglyph_substitution => HomoglyphSubst,
    adjacent_syllable_char_transposition => AdjSyllCharTranspose,
    inter_syllable_char_transposition => InterSyllCharTranspose,
    syllable_random_delete => SyllDelete,
    syllable_random_transposition => SyllTranspose,
    syllable_random_merge => SyllMerge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mixed {
    pub seq: SyllableSeq,
    pub semi_mask: SyllableSeq,
    /// The three drawn operators, in application order.
    pub ops: Vec<CorruptionId>,
    /// Drawn operators whose precondition failed on the evolving sentence.
    pub noops: Vec<CorruptionId>,
}

pub const MIXED_OPS: usize = 3;

/// Applies three distinct operators drawn uniformly (with rejection of repeats).
/// Sentences shorter than two syllables are returned unchanged with no ops.
pub fn mixed_corrupt(seq: &SyllableSeq, rng: &mut dyn Draw, ctx: &CorruptionContext) -> Mixed {
    if seq.len() < 2 {
        return Mixed {
            seq: seq.clone(),
            semi_mask: seq.clone(),
            ops: Vec::new(),
            noops: Vec::new(),
        };
    }
    let registry = CorruptionRegistry::new();
    let mut work = Work::new(seq);
    let mut ops = Vec::with_capacity(MIXED_OPS);
    let mut noops = Vec::new();
    while ops.len() < MIXED_OPS {
        let id = CorruptionId::ALL[rng.below(CorruptionId::ALL.len())];
        if ops.contains(&id) {
            continue;
        }
        if !registry.get(id).apply(&mut work, rng, ctx) {
            noops.push(id);
        }
        ops.push(id);
    }
    Mixed {
        seq: work.corrupted(),
        semi_mask: work.semi_mask(),
        ops,
        noops,
    }
}
