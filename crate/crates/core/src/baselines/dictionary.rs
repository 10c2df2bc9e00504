use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::osa_distance;
use crate::correct::Corrector;
use crate::error::{Error, Result};
use crate::script::{map_syllables, segment, Syllable};

const HEADER: &str = "# tispell-dict v1";

/// A lookup result, ordered best first by [`FrequencyDictionary::candidates`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub term: String,
    pub distance: usize,
    pub count: u64,
}

/// Syllable frequencies with a symmetric-delete index for bounded edit-distance lookup.
#[derive(Debug, Clone)]
pub struct FrequencyDictionary {
    counts: BTreeMap<String, u64>,
    max_edit_distance: usize,
    deletes: HashMap<String, Vec<String>>,
}

fn delete_variants(term: &str, depth: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(term.to_string());
    let mut frontier = vec![term.chars().collect::<Vec<char>>()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for chars in &frontier {
            if chars.is_empty() {
                continue;
            }
            for i in 0..chars.len() {
                let mut v = chars.clone();
                v.remove(i);
                if out.insert(v.iter().collect()) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    out
}

impl FrequencyDictionary {
    pub fn from_counts(counts: BTreeMap<String, u64>, max_edit_distance: usize) -> Self {
        let mut deletes: HashMap<String, Vec<String>> = HashMap::new();
        for term in counts.keys() {
            for v in delete_variants(term, max_edit_distance) {
                deletes.entry(v).or_default().push(term.clone());
            }
        }
        Self {
            counts,
            max_edit_distance,
            deletes,
        }
    }

    /// Counts every syllable of every sentence.
    pub fn from_sentences<'a, I>(sentences: I, max_edit_distance: usize) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts = BTreeMap::new();
        for s in sentences {
            for syl in segment(s).items {
                *counts.entry(syl.to_string()).or_insert(0) += 1;
            }
        }
        Self::from_counts(counts, max_edit_distance)
    }

    pub fn max_edit_distance(&self) -> usize {
        self.max_edit_distance
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Entries that reduce to `variant` by deleting up to the bound of characters.
    pub fn originating(&self, variant: &str) -> &[String] {
        self.deletes.get(variant).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, term: &str) -> u64 {
        self.counts.get(term).copied().unwrap_or(0)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.counts.contains_key(term)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Every entry within the edit bound, ranked by count (descending), then
    /// distance, then lexicographically.
    pub fn candidates(&self, term: &str) -> Vec<Candidate> {
        let query: Vec<char> = term.chars().collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in delete_variants(term, self.max_edit_distance) {
            let Some(origins) = self.deletes.get(&v) else {
                continue;
            };
            for origin in origins {
                if !seen.insert(origin.as_str()) {
                    continue;
                }
                let chars: Vec<char> = origin.chars().collect();
                if let Some(distance) = osa_distance(&query, &chars, self.max_edit_distance) {
                    out.push(Candidate {
                        term: origin.clone(),
                        distance,
                        count: self.counts[origin],
                    });
                }
            }
        }
        out.sort_by(|a, b| {
            b.count
                .cmp(&a.count)
                .then(a.distance.cmp(&b.distance))
                .then_with(|| a.term.cmp(&b.term))
        });
        out
    }

    /// Known syllables are kept; unknown ones become the best candidate, if any.
    pub fn correct_syllable(&self, term: &str) -> String {
        if self.contains(term) {
            return term.to_string();
        }
        self.candidates(term)
            .into_iter()
            .next()
            .map_or_else(|| term.to_string(), |c| c.term)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER} max_edit_distance={}\n", self.max_edit_distance);
        for (term, count) in &self.counts {
            let _ = writeln!(out, "{term}\t{count}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Format {
            what: "dictionary",
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let max_edit_distance = header
            .strip_prefix(HEADER)
            .and_then(|rest| rest.trim().strip_prefix("max_edit_distance="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(1, format!("bad header `{header}`")))?;
        let mut counts = BTreeMap::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (term, count) = line
                .split_once('\t')
                .ok_or_else(|| err(i + 1, "expected `syllable<TAB>count`".into()))?;
            let count: u64 = count.parse().map_err(|_| err(i + 1, format!("bad count `{count}`")))?;
            if term.parse::<Syllable>().is_err() {
                return Err(err(i + 1, format!("bad syllable `{term}`")));
            }
            if counts.insert(term.to_string(), count).is_some() {
                return Err(err(i + 1, format!("duplicate syllable `{term}`")));
            }
        }
        Ok(Self::from_counts(counts, max_edit_distance))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Builds a dictionary from a one-sentence-per-line corpus file.
pub fn dict_build(corpus: &Path, max_edit_distance: usize) -> Result<FrequencyDictionary> {
    if !(1..=2).contains(&max_edit_distance) {
        return Err(Error::Config(format!(
            "max edit distance must be 1 or 2, got {max_edit_distance}"
        )));
    }
    let text = fs::read_to_string(corpus).map_err(|e| Error::io(corpus, e))?;
    Ok(FrequencyDictionary::from_sentences(text.lines(), max_edit_distance))
}

/// Replaces each out-of-dictionary syllable by its best in-dictionary candidate.
pub fn dict_correct(text: &str, dict: &FrequencyDictionary) -> String {
    map_syllables(text, |_, s| dict.correct_syllable(s))
}

pub struct DictCorrector {
    dict: FrequencyDictionary,
}

impl DictCorrector {
    pub fn new(dict: FrequencyDictionary) -> Self {
        Self { dict }
    }

    pub fn dictionary(&self) -> &FrequencyDictionary {
        &self.dict
    }
}

impl Corrector for DictCorrector {
    fn name(&self) -> &str {
        "dict"
    }

    fn correct(&self, text: &str) -> String {
        dict_correct(text, &self.dict)
    }

    fn corrects_syllable_level(&self) -> bool {
        false
    }
}
