//! Character vocabulary with reserved special tokens.

use std::collections::{BTreeSet, HashMap};

use log::warn;
use serde::{Deserialize, Serialize};
use tispell_core::script::{map_syllables, segment, MASK_TOKEN, TSHEG};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const BOS: u32 = 2;
pub const EOS: u32 = 3;
pub const MASK: u32 = 4;
pub const DELIM: u32 = 5;

const SPECIALS: [&str; 6] = ["[PAD]", "[UNK]", "[BOS]", "[EOS]", MASK_TOKEN, "\u{0F0B}"];

/// Token ids for a sentence, right-padded to a fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    pub ids: Vec<u32>,
    /// Non-pad positions, `[BOS]` and `[EOS]` included.
    pub true_len: usize,
    /// Content characters dropped to fit the fixed length.
    pub truncated: usize,
    pub unknown: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<char, u32>,
}

impl From<Vec<String>> for Vocab {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .skip(SPECIALS.len())
            .filter_map(|(i, t)| {
                let mut cs = t.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Some((c, i as u32)),
                    _ => None,
                }
            })
            .collect();
        Self { tokens, index }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.tokens
    }
}

impl Vocab {
    /// Specials first, then every other character in codepoint order.
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let set: BTreeSet<char> = chars.into_iter().filter(|&c| c != TSHEG).collect();
        let tokens = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(set.into_iter().map(String::from))
            .collect::<Vec<_>>();
        Self::from(tokens)
    }

    /// Like [`Vocab::from_chars`], dropping the characters of the mask token.
    pub fn from_text_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let mut text = String::new();
        text.extend(chars);
        Self::from_texts([text.replace(MASK_TOKEN, "").as_str()])
    }

    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        Self::from_chars(
            texts
                .into_iter()
                .flat_map(|t| t.replace(MASK_TOKEN, "").chars().collect::<Vec<_>>()),
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, id: u32) -> &str {
        self.tokens.get(id as usize).map_or("[UNK]", String::as_str)
    }

    pub fn id_of(&self, c: char) -> Option<u32> {
        if c == TSHEG {
            Some(DELIM)
        } else {
            self.index.get(&c).copied()
        }
    }

    /// Ids without padding or truncation: `[BOS] chars… [EOS]`.
    pub fn encode(&self, text: &str) -> (Vec<u32>, usize) {
        let mut ids = vec![BOS];
        let mut unknown = 0;
        let mut rest = text;
        while let Some(c) = rest.chars().next() {
            if let Some(tail) = rest.strip_prefix(MASK_TOKEN) {
                ids.push(MASK);
                rest = tail;
                continue;
            }
            ids.push(self.id_of(c).unwrap_or_else(|| {
                unknown += 1;
                UNK
            }));
            rest = &rest[c.len_utf8()..];
        }
        ids.push(EOS);
        (ids, unknown)
    }

    pub fn tokenize(&self, text: &str, max_len: usize) -> TokenSeq {
        let (mut ids, unknown) = self.encode(text);
        let mut truncated = 0;
        if ids.len() > max_len {
            truncated = ids.len() - max_len;
            ids.truncate(max_len.saturating_sub(1));
            ids.push(EOS);
            warn!("input truncated by {truncated} characters to fit {max_len} positions");
        }
        let true_len = ids.len();
        ids.resize(max_len, PAD);
        TokenSeq {
            ids,
            true_len,
            truncated,
            unknown,
        }
    }

    /// Text for ids up to the first `[EOS]` or `[PAD]`; a leading `[BOS]` is
    /// skipped and each run of `[MASK]` becomes one mask token.
    pub fn decode(&self, ids: &[u32]) -> String {
        let mut out = String::new();
        let mut prev_mask = false;
        let start = usize::from(ids.first() == Some(&BOS));
        for &id in &ids[start..] {
            match id {
                EOS | PAD => break,
                BOS => {}
                MASK => {
                    if !prev_mask {
                        out.push_str(MASK_TOKEN);
                    }
                }
                DELIM => out.push(TSHEG),
                _ => out.push_str(self.token(id)),
            }
            prev_mask = id == MASK;
        }
        out
    }

    pub fn detokenize(&self, seq: &TokenSeq) -> String {
        self.decode(&seq.ids[..seq.true_len])
    }
}

/// The character-level semi-mask target: `source` with each syllable that
/// `semi_mask` marks as deleted replaced by one mask token per character, so
/// the target has exactly as many positions as the source.
pub fn expand_semi_mask(source: &str, semi_mask: &str) -> String {
    let masked: Vec<bool> = segment(semi_mask).items.iter().map(|s| s.is_mask()).collect();
    map_syllables(source, |i, s| {
        if masked.get(i).copied().unwrap_or(false) {
            MASK_TOKEN.repeat(s.chars().count())
        } else {
            s.to_string()
        }
    })
}
