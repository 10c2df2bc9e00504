//! Tibetan script data: syllable segmentation and character classes.
//!
//! A sentence is a sequence of syllables separated by the tsheg (U+0F0B).
//! Shad (U+0F0D) and ASCII whitespace also separate syllables; runs of
//! delimiters collapse, and [`join`] always re-emits a single tsheg.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

pub const TSHEG: char = '\u{0F0B}';
pub const SHAD: char = '\u{0F0D}';

/// Reserved surface form of a masked syllable.
pub const MASK_TOKEN: &str = "[MASK]";

/// Environment variable naming the default script-table path.
pub const TABLE_ENV: &str = "TISPELL_TABLE";

const DEFAULT_TABLE: &str = include_str!("../data/script_table.txt");

pub fn is_delimiter(c: char) -> bool {
    c == TSHEG || c == SHAD || c.is_ascii_whitespace()
}

pub fn is_tibetan(c: char) -> bool {
    ('\u{0F00}'..='\u{0FFF}').contains(&c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharClass {
    Consonant,
    VowelSign,
    Subjoined,
    Delimiter,
    Other,
}

/// Character inventory used by the corruption operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptTable {
    consonants: BTreeSet<char>,
    vowel_signs: BTreeSet<char>,
    to_subjoined: BTreeMap<char, char>,
    to_base: BTreeMap<char, char>,
    homoglyph_sets: Vec<Vec<char>>,
    homoglyph_index: BTreeMap<char, usize>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Consonants,
    Vowels,
    Subjoined,
    Homoglyphs,
}

fn parse_codepoint(token: &str, line: usize) -> Result<char> {
    let hex = token
        .strip_prefix("U+")
        .or_else(|| token.strip_prefix("u+"))
        .ok_or_else(|| Error::TableParse {
            line,
            message: format!("expected U+XXXX, found `{token}`"),
        })?;
    u32::from_str_radix(hex, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(|| Error::TableParse {
            line,
            message: format!("invalid codepoint `{token}`"),
        })
}

impl ScriptTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled script table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Loads `path` if given, else the file named by `TISPELL_TABLE`, else the builtin table.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => match std::env::var_os(TABLE_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::builtin()),
            },
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut section = Section::Preamble;
        let mut consonants = BTreeSet::new();
        let mut vowel_signs = BTreeSet::new();
        let mut to_subjoined = BTreeMap::new();
        let mut homoglyph_sets = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if content.starts_with('[') {
                section = match content {
                    "[consonants]" => Section::Consonants,
                    "[vowels]" => Section::Vowels,
                    "[subjoined]" => Section::Subjoined,
                    "[homoglyphs]" => Section::Homoglyphs,
                    other => {
                        return Err(Error::TableParse {
                            line,
                            message: format!("unknown section {other}"),
                        })
                    }
                };
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match section {
                Section::Preamble => {
                    if let Some(("version", v)) = content.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
                        if v != "1" {
                            return Err(Error::TableParse {
                                line,
                                message: format!("unsupported table version {v}"),
                            });
                        }
                    } else {
                        return Err(Error::TableParse {
                            line,
                            message: "entry outside of any section".into(),
                        });
                    }
                }
                Section::Consonants | Section::Vowels => {
                    let target = if section == Section::Consonants {
                        &mut consonants
                    } else {
                        &mut vowel_signs
                    };
                    for t in tokens {
                        target.insert(parse_codepoint(t, line)?);
                    }
                }
                Section::Subjoined => {
                    if tokens.len() != 2 {
                        return Err(Error::TableParse {
                            line,
                            message: "expected a `base subjoined` pair".into(),
                        });
                    }
                    let base = parse_codepoint(tokens[0], line)?;
                    let sub = parse_codepoint(tokens[1], line)?;
                    if to_subjoined.insert(base, sub).is_some() {
                        return Err(Error::TableParse {
                            line,
                            message: format!("duplicate base U+{:04X}", base as u32),
                        });
                    }
                }
                Section::Homoglyphs => {
                    let set = tokens
                        .iter()
                        .map(|t| parse_codepoint(t, line))
                        .collect::<Result<Vec<_>>>()?;
                    homoglyph_sets.push(set);
                }
            }
        }

        Self::from_parts(consonants, vowel_signs, to_subjoined, homoglyph_sets)
    }

    pub fn from_parts(
        consonants: BTreeSet<char>,
        vowel_signs: BTreeSet<char>,
        to_subjoined: BTreeMap<char, char>,
        homoglyph_sets: Vec<Vec<char>>,
    ) -> Result<Self> {
        if consonants.len() != 30 {
            return Err(Error::TableInvariant(format!(
                "expected 30 consonants, found {}",
                consonants.len()
            )));
        }
        if vowel_signs.len() != 4 {
            return Err(Error::TableInvariant(format!(
                "expected 4 vowel signs, found {}",
                vowel_signs.len()
            )));
        }
        let mut to_base = BTreeMap::new();
        for (&base, &sub) in &to_subjoined {
            if to_base.insert(sub, base).is_some() {
                return Err(Error::TableInvariant(format!(
                    "subjoined form U+{:04X} has two bases",
                    sub as u32
                )));
            }
        }
        if let Some(c) = to_base.keys().find(|c| to_subjoined.contains_key(c)) {
            return Err(Error::TableInvariant(format!(
                "U+{:04X} is both a base and a subjoined form",
                *c as u32
            )));
        }
        let mut homoglyph_index = BTreeMap::new();
        for (i, set) in homoglyph_sets.iter().enumerate() {
            if set.len() < 2 {
                return Err(Error::TableInvariant(format!(
                    "homoglyph set {i} has fewer than 2 members"
                )));
            }
            for &c in set {
                if is_delimiter(c) {
                    return Err(Error::TableInvariant("delimiter inside a homoglyph set".into()));
                }
                if homoglyph_index.insert(c, i).is_some() {
                    return Err(Error::TableInvariant(format!(
                        "U+{:04X} appears in more than one homoglyph set",
                        c as u32
                    )));
                }
            }
        }
        Ok(Self {
            consonants,
            vowel_signs,
            to_subjoined,
            to_base,
            homoglyph_sets,
            homoglyph_index,
        })
    }

    pub fn consonants(&self) -> &BTreeSet<char> {
        &self.consonants
    }

    pub fn vowel_signs(&self) -> &BTreeSet<char> {
        &self.vowel_signs
    }

    pub fn homoglyph_sets(&self) -> &[Vec<char>] {
        &self.homoglyph_sets
    }

    /// Consonants followed by vowel signs, in codepoint order.
    pub fn alphabet(&self) -> Vec<char> {
        self.consonants.iter().chain(self.vowel_signs.iter()).copied().collect()
    }

    /// The other member of a base/subjoined pair.
    pub fn case_counterpart(&self, c: char) -> Option<char> {
        self.to_subjoined.get(&c).or_else(|| self.to_base.get(&c)).copied()
    }

    pub fn subjoined_pairs(&self) -> impl Iterator<Item = (char, char)> + '_ {
        self.to_subjoined.iter().map(|(&b, &s)| (b, s))
    }

    pub fn homoglyph_set(&self, c: char) -> Option<&[char]> {
        self.homoglyph_index.get(&c).map(|&i| self.homoglyph_sets[i].as_slice())
    }

    pub fn classify(&self, c: char) -> CharClass {
        if is_delimiter(c) {
            CharClass::Delimiter
        } else if self.consonants.contains(&c) {
            CharClass::Consonant
        } else if self.vowel_signs.contains(&c) {
            CharClass::VowelSign
        } else if self.to_base.contains_key(&c) {
            CharClass::Subjoined
        } else {
            CharClass::Other
        }
    }
}

/// A non-empty run of non-delimiter characters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Syllable(Vec<char>);

impl Syllable {
    /// Returns `None` for empty input or input containing a delimiter.
    pub fn new(chars: Vec<char>) -> Option<Self> {
        if chars.is_empty() || chars.iter().any(|&c| is_delimiter(c)) {
            None
        } else {
            Some(Self(chars))
        }
    }

    pub fn mask() -> Self {
        Self(MASK_TOKEN.chars().collect())
    }

    pub fn is_mask(&self) -> bool {
        self.0.iter().copied().eq(MASK_TOKEN.chars())
    }

    pub fn chars(&self) -> &[char] {
        &self.0
    }

    pub(crate) fn chars_mut(&mut self) -> &mut Vec<char> {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_chars(self) -> Vec<char> {
        self.0
    }
}

impl fmt::Display for Syllable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

impl std::str::FromStr for Syllable {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Self::new(s.chars().collect()).ok_or(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SyllableSeq {
    pub items: Vec<Syllable>,
    pub trailing_delimiter: bool,
}

impl SyllableSeq {
    pub fn new(items: Vec<Syllable>) -> Self {
        Self {
            items,
            trailing_delimiter: false,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn char_count(&self) -> usize {
        self.items.iter().map(Syllable::len).sum()
    }

    pub fn strings(&self) -> Vec<String> {
        self.items.iter().map(ToString::to_string).collect()
    }
}

/// Splits `text` into syllables on any delimiter.
pub fn segment(text: &str) -> SyllableSeq {
    let mut items = Vec::new();
    let mut current = Vec::new();
    let mut ends_with_delimiter = false;
    for c in text.chars() {
        if is_delimiter(c) {
            if !current.is_empty() {
                items.push(Syllable(std::mem::take(&mut current)));
            }
            ends_with_delimiter = true;
        } else {
            current.push(c);
            ends_with_delimiter = false;
        }
    }
    if !current.is_empty() {
        items.push(Syllable(current));
    }
    let trailing_delimiter = ends_with_delimiter && !items.is_empty();
    SyllableSeq {
        items,
        trailing_delimiter,
    }
}

/// Joins syllables with a single tsheg, restoring a trailing tsheg if one was recorded.
pub fn join(seq: &SyllableSeq) -> String {
    let mut out = String::new();
    for (i, s) in seq.items.iter().enumerate() {
        if i > 0 {
            out.push(TSHEG);
        }
        out.extend(s.chars());
    }
    if seq.trailing_delimiter && !seq.items.is_empty() {
        out.push(TSHEG);
    }
    out
}

/// Rewrites each syllable of `text` through `f(index, syllable)`, leaving every
/// delimiter exactly as it was.
pub fn map_syllables(text: &str, mut f: impl FnMut(usize, &str) -> String) -> String {
    let mut out = String::with_capacity(text.len());
    let mut index = 0;
    let mut start = None;
    for (pos, c) in text.char_indices() {
        if is_delimiter(c) {
            if let Some(s) = start.take() {
                out.push_str(&f(index, &text[s..pos]));
                index += 1;
            }
            out.push(c);
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    if let Some(s) = start {
        out.push_str(&f(index, &text[s..]));
    }
    out
}

pub fn classify_char(c: char, table: &ScriptTable) -> CharClass {
    table.classify(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syl(s: &str) -> Syllable {
        s.parse().unwrap()
    }

    #[test]
    fn map_syllables_keeps_delimiters() {
        let text = "ཀ་ཁ། ག་";
        assert_eq!(map_syllables(text, |_, s| s.to_string()), text);
        assert_eq!(map_syllables(text, |i, _| i.to_string()), "0་1། 2་");
        assert_eq!(map_syllables("", |_, s| s.to_string()), "");
    }

    #[test]
    fn empty_text_segments_to_nothing() {
        let seq = segment("");
        assert!(seq.is_empty());
        assert!(!seq.trailing_delimiter);
        assert_eq!(join(&seq), "");
    }

    #[test]
    fn two_syllables_split_on_tsheg() {
        let seq = segment("\u{0F40}\u{0F0B}\u{0F41}");
        assert_eq!(seq.items, vec![syl("\u{0F40}"), syl("\u{0F41}")]);
        assert_eq!(join(&seq), "\u{0F40}\u{0F0B}\u{0F41}");
    }

    #[test]
    fn trailing_tsheg_is_recorded() {
        let text = "ཀ་ཁ་ག་ང་ཅ་";
        let seq = segment(text);
        assert_eq!(seq.len(), 5);
        assert!(seq.trailing_delimiter);
        assert_eq!(join(&seq), text);
    }

    #[test]
    fn delimiter_runs_collapse() {
        let seq = segment("་་ཀ་ ་།ཁ།");
        assert_eq!(seq.strings(), vec!["ཀ", "ཁ"]);
        assert_eq!(join(&seq), "ཀ་ཁ་");
    }

    #[test]
    fn only_delimiters() {
        let seq = segment("་།");
        assert!(seq.is_empty());
        assert_eq!(join(&seq), "");
    }

    #[test]
    fn syllable_rejects_empty_and_delimiters() {
        assert!(Syllable::new(vec![]).is_none());
        assert!(Syllable::new(vec!['ཀ', TSHEG]).is_none());
        assert!(Syllable::mask().is_mask());
    }

    #[test]
    fn builtin_table_inventory() {
        let t = ScriptTable::builtin();
        assert_eq!(t.consonants().len(), 30);
        assert_eq!(t.vowel_signs().len(), 4);
        assert_eq!(t.alphabet().len(), 34);
        for (base, sub) in t.subjoined_pairs() {
            assert_eq!(sub as u32, base as u32 + 0x50);
            assert_eq!(t.case_counterpart(base), Some(sub));
            assert_eq!(t.case_counterpart(sub), Some(base));
        }
    }

    #[test]
    fn classify_examples() {
        let t = ScriptTable::builtin();
        assert_eq!(classify_char('\u{0F40}', &t), CharClass::Consonant);
        assert_eq!(classify_char('\u{0F72}', &t), CharClass::VowelSign);
        assert_eq!(classify_char('\u{0F0B}', &t), CharClass::Delimiter);
        assert_eq!(classify_char('\u{0F90}', &t), CharClass::Subjoined);
        assert_eq!(classify_char('a', &t), CharClass::Other);
    }

    #[test]
    fn classify_partitions_the_tibetan_block() {
        let t = ScriptTable::builtin();
        for cp in 0x0F00u32..=0x0FFF {
            let Some(c) = char::from_u32(cp) else { continue };
            let hits = [
                t.consonants().contains(&c),
                t.vowel_signs().contains(&c),
                t.case_counterpart(c).is_some() && !t.consonants().contains(&c),
                is_delimiter(c),
            ]
            .iter()
            .filter(|&&b| b)
            .count();
            assert!(hits <= 1, "U+{cp:04X} in {hits} classes");
            if hits == 0 {
                assert_eq!(t.classify(c), CharClass::Other);
            }
        }
    }

    #[test]
    fn table_rejects_overlapping_homoglyph_sets() {
        let base = ScriptTable::builtin();
        let sets = vec![vec!['ཏ', 'ཊ'], vec!['ཊ', 'ད']];
        let err = ScriptTable::from_parts(
            base.consonants.clone(),
            base.vowel_signs.clone(),
            base.to_subjoined.clone(),
            sets,
        );
        assert!(matches!(err, Err(Error::TableInvariant(_))));
    }

    #[test]
    fn table_rejects_non_injective_subjoined_map() {
        let base = ScriptTable::builtin();
        let mut map = base.to_subjoined.clone();
        map.insert('ཀ', '\u{0F91}');
        let err = ScriptTable::from_parts(base.consonants.clone(), base.vowel_signs.clone(), map, vec![]);
        assert!(matches!(err, Err(Error::TableInvariant(_))));
    }

    #[test]
    fn table_parse_errors_carry_line_numbers() {
        let err = ScriptTable::parse("version = 1\n[consonants]\nU+ZZZZ\n").unwrap_err();
        assert!(matches!(err, Error::TableParse { line: 3, .. }));
        let err = ScriptTable::parse("[bogus]\n").unwrap_err();
        assert!(matches!(err, Error::TableParse { line: 1, .. }));
    }

    #[test]
    fn table_loads_from_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.txt");
        std::fs::write(&path, DEFAULT_TABLE).unwrap();
        assert_eq!(ScriptTable::load(&path).unwrap(), ScriptTable::builtin());
        assert!(ScriptTable::load(&dir.path().join("missing")).is_err());
    }
}
