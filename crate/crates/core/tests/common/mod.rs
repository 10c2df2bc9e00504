//! Test-only helpers: random sentence generation and independent
//! post-condition checks for every corruption operator.
#![allow(dead_code)]

pub mod oracles;

use std::collections::BTreeMap;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tispell_core::augment::{Applied, CorruptionContext, CorruptionId};
use tispell_core::script::{ScriptTable, Syllable, SyllableSeq, TSHEG};

/// Letters used by generated sentences: plain consonants, consonants with
/// look-alikes, subjoined forms and vowel signs.
pub const LETTERS: &[char] = &[
    'ཀ', 'ཁ', 'ག', 'ང', 'ཅ', 'ཏ', 'ཐ', 'ད', 'ན', 'ཤ', 'ར', 'ལ', 'ྐ', 'ྒ', 'ྲ', 'ྱ', 'ི', 'ུ', 'ེ', 'ོ', 'ཊ', 'ཌ',
];

pub fn generator(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_syllable(g: &mut ChaCha20Rng, max_len: usize) -> Syllable {
    let len = g.gen_range(1..=max_len);
    Syllable::new((0..len).map(|_| LETTERS[g.gen_range(0..LETTERS.len())]).collect()).unwrap()
}

pub fn random_seq(g: &mut ChaCha20Rng, max_syllables: usize, max_len: usize) -> SyllableSeq {
    let n = g.gen_range(1..=max_syllables);
    SyllableSeq {
        items: (0..n).map(|_| random_syllable(g, max_len)).collect(),
        trailing_delimiter: g.gen_bool(0.3),
    }
}

/// A sentence with single tsheg separators and an optional trailing tsheg.
pub fn random_text(g: &mut ChaCha20Rng) -> String {
    let seq = random_seq(g, 10, 5);
    let parts: Vec<String> = seq.strings();
    let mut t = parts.join(&TSHEG.to_string());
    if seq.trailing_delimiter {
        t.push(TSHEG);
    }
    t
}

fn chars(seq: &SyllableSeq) -> Vec<Vec<char>> {
    seq.items.iter().map(|s| s.chars().to_vec()).collect()
}

fn multiset<T: Ord + Clone>(items: impl IntoIterator<Item = T>) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for x in items {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

fn differing(a: &[Vec<char>], b: &[Vec<char>]) -> Vec<usize> {
    (0..a.len()).filter(|&i| a[i] != b[i]).collect()
}

/// Whether `long` is `short` with exactly one character added.
fn one_insertion(short: &[char], long: &[char]) -> Option<char> {
    if long.len() != short.len() + 1 {
        return None;
    }
    (0..long.len()).find_map(|k| {
        let mut v = long.to_vec();
        let c = v.remove(k);
        (v == short).then_some(c)
    })
}

/// Whether `b` equals `a` with two positions exchanged (or unchanged when they held equal values).
fn is_swap<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let d: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
    match d.as_slice() {
        [] => true,
        [i, j] => a[*i] == b[*j] && a[*j] == b[*i],
        _ => false,
    }
}

pub fn precondition(id: CorruptionId, src: &SyllableSeq, ctx: &CorruptionContext) -> bool {
    let t = &ctx.table;
    let any_char = |f: &dyn Fn(char) -> bool| src.items.iter().any(|s| s.chars().iter().any(|&c| f(c)));
    match id {
        CorruptionId::CharDelete => src.items.iter().any(|s| s.len() >= 2),
        CorruptionId::CharInsert => !src.items.is_empty() && !ctx.alphabet.is_empty(),
        CorruptionId::CaseSubst => any_char(&|c| t.case_counterpart(c).is_some()),
        CorruptionId::HomoglyphSubst => any_char(&|c| t.homoglyph_set(c).is_some()),
        CorruptionId::AdjSyllCharTranspose => src.items.iter().any(|s| s.len() > 2),
        _ => src.items.len() >= 2,
    }
}

/// Checks one operator result against its contract. Returns a description of the first violation.
pub fn check(id: CorruptionId, src: &SyllableSeq, out: &Applied, ctx: &CorruptionContext) -> Result<(), String> {
    let expect_applied = precondition(id, src, ctx);
    if out.noop == expect_applied {
        return Err(format!("noop flag {} but precondition {}", out.noop, expect_applied));
    }
    if out.noop {
        if &out.seq != src || &out.semi_mask != src {
            return Err("noop changed the sentence".into());
        }
        return Ok(());
    }
    if out.seq.trailing_delimiter != src.trailing_delimiter
        || out.semi_mask.trailing_delimiter != src.trailing_delimiter
    {
        return Err("trailing delimiter not preserved".into());
    }
    if id != CorruptionId::SyllDelete && &out.semi_mask != src {
        return Err("semi-mask differs from source without a deletion".into());
    }
    let a = chars(src);
    let b = chars(&out.seq);
    let t: &ScriptTable = &ctx.table;
    let same_count = || {
        if a.len() == b.len() {
            Ok(())
        } else {
            Err(format!("syllable count {} -> {}", a.len(), b.len()))
        }
    };
    match id {
        CorruptionId::CharDelete => {
            same_count()?;
            match differing(&a, &b).as_slice() {
                [i] if a[*i].len() >= 2 && one_insertion(&b[*i], &a[*i]).is_some() => Ok(()),
                d => Err(format!("char delete changed syllables {d:?}")),
            }
        }
        CorruptionId::CharInsert => {
            same_count()?;
            match differing(&a, &b).as_slice() {
                [i] => match one_insertion(&a[*i], &b[*i]) {
                    Some(c) if ctx.alphabet.contains(&c) => Ok(()),
                    other => Err(format!("bad insertion {other:?}")),
                },
                d => Err(format!("char insert changed syllables {d:?}")),
            }
        }
        CorruptionId::CaseSubst | CorruptionId::HomoglyphSubst => {
            same_count()?;
            let (a, b) = (&a, &b);
            let pos: Vec<(usize, usize)> = (0..a.len())
                .flat_map(|i| (0..a[i].len().max(b[i].len())).map(move |k| (i, k)))
                .filter(|&(i, k)| a[i].get(k) != b[i].get(k))
                .collect();
            let [(i, k)] = pos.as_slice() else {
                return Err(format!("substitution touched {} positions", pos.len()));
            };
            if a[*i].len() != b[*i].len() {
                return Err("substitution changed a syllable length".into());
            }
            let (old, new) = (a[*i][*k], b[*i][*k]);
            let ok = if id == CorruptionId::CaseSubst {
                t.case_counterpart(old) == Some(new)
            } else {
                t.homoglyph_set(old).is_some_and(|s| s.contains(&new)) && old != new
            };
            ok.then_some(())
                .ok_or_else(|| format!("{old:?} -> {new:?} is not a valid substitution"))
        }
        CorruptionId::AdjSyllCharTranspose => {
            same_count()?;
            match differing(&a, &b).as_slice() {
                [] => a
                    .iter()
                    .any(|s| s.len() > 2 && multiset(s.clone()).values().any(|&n| n > 1))
                    .then_some(())
                    .ok_or("no visible change and no repeated letters".to_string()),
                [i] if a[*i].len() > 2 && is_swap(&a[*i], &b[*i]) => Ok(()),
                d => Err(format!("transposition touched {d:?}")),
            }
        }
        CorruptionId::InterSyllCharTranspose => {
            same_count()?;
            if a.iter().zip(&b).any(|(x, y)| x.len() != y.len()) {
                return Err("syllable lengths changed".into());
            }
            let d = differing(&a, &b);
            let (a, b) = (&a, &b);
            let pos: Vec<(usize, usize)> = d
                .iter()
                .flat_map(|&i| {
                    (0..a[i].len())
                        .filter(move |&k| a[i][k] != b[i][k])
                        .map(move |k| (i, k))
                })
                .collect();
            match pos.as_slice() {
                [] => Ok(()),
                [(i, k), (j, l)] if *j == i + 1 && a[*i][*k] == b[*j][*l] && a[*j][*l] == b[*i][*k] => Ok(()),
                _ => Err(format!("not a cross-syllable swap: {pos:?}")),
            }
        }
        CorruptionId::SyllDelete => {
            if b.len() + 1 != a.len() {
                return Err("syllable delete must remove exactly one syllable".into());
            }
            let mask = Syllable::mask();
            let fits = (0..a.len()).any(|k| {
                let mut rest = a.clone();
                rest.remove(k);
                let mut semi = src.items.clone();
                semi[k] = mask.clone();
                rest == b && semi == out.semi_mask.items
            });
            fits.then_some(())
                .ok_or_else(|| "output/semi-mask are not a single consistent deletion".into())
        }
        CorruptionId::SyllTranspose => {
            same_count()?;
            is_swap(&a, &b)
                .then_some(())
                .ok_or_else(|| "not a syllable swap".into())
        }
        CorruptionId::SyllMerge => {
            if b.len() + 1 != a.len() {
                return Err("merge must reduce the syllable count by one".into());
            }
            let fits = (0..a.len() - 1).any(|k| {
                let mut merged = a.clone();
                let next = merged.remove(k + 1);
                merged[k].extend(next);
                merged == b
            });
            fits.then_some(()).ok_or_else(|| "not a merge of two neighbours".into())
        }
    }
}
