//! Independent reference computations shared by the metric and baseline tests.

use std::collections::BTreeSet;

use rand::Rng as _;

use super::{generator, LETTERS};

/// Plain Levenshtein distance, full table, no tie-breaking.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// The correction metric computed directly from its set definition, for
/// triples whose sentences all have the same length and therefore align position by position.
pub fn correction_oracle(triples: &[(Vec<String>, Vec<String>, Vec<String>)]) -> (usize, usize, usize, f64, f64) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let (mut any_needed, mut any_changed) = (false, false);
    for (s, r, h) in triples {
        let needed: BTreeSet<usize> = (0..r.len()).filter(|&i| s[i] != r[i]).collect();
        let changed: BTreeSet<usize> = (0..r.len()).filter(|&i| h[i] != s[i]).collect();
        let correct: BTreeSet<usize> = (0..r.len()).filter(|&i| h[i] == r[i]).collect();
        let t = changed.intersection(&correct).count();
        tp += t;
        fp += changed.len() - t;
        fn_ += needed.difference(&correct).count();
        any_needed |= !needed.is_empty();
        any_changed |= !changed.is_empty();
    }
    let p = if !any_needed && !any_changed {
        1.0
    } else if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let r = if !any_needed {
        1.0
    } else if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    (tp, fp, fn_, p, r)
}

pub fn substitute(g: &mut rand_chacha::ChaCha20Rng, base: &[String], rate: f64) -> Vec<String> {
    base.iter()
        .map(|t| {
            if g.gen_bool(rate) {
                ["A", "B", "C", "D"][g.gen_range(0..4)].to_string()
            } else {
                t.clone()
            }
        })
        .collect()
}

pub fn hamming(a: &[String], b: &[String]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn letter(t: &str) -> &'static str {
    match t {
        "A" => "ཀ",
        "B" => "ཁ",
        "C" => "ག",
        _ => "ང",
    }
}

pub fn osa(a: &[char], b: &[char]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let mut v = (d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]))
                .min(d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                v = v.min(d[i - 2][j - 2] + 1);
            }
            d[i][j] = v;
        }
    }
    d[a.len()][b.len()]
}

/// Five-letter syllables at pairwise distance of at least four.
pub fn spread_lexicon(n: usize, seed: u64) -> Vec<String> {
    let mut g = generator(seed);
    let mut out: Vec<Vec<char>> = Vec::new();
    while out.len() < n {
        let w: Vec<char> = (0..5).map(|_| LETTERS[g.gen_range(0..LETTERS.len())]).collect();
        if out.iter().all(|o| osa(o, &w) >= 4) {
            out.push(w);
        }
    }
    out.into_iter().map(|w| w.into_iter().collect()).collect()
}

pub fn corpus_from(lexicon: &[String], sentences: usize, seed: u64) -> Vec<String> {
    let mut g = generator(seed);
    (0..sentences)
        .map(|_| {
            let n = g.gen_range(2..7);
            (0..n)
                .map(|_| lexicon[g.gen_range(0..lexicon.len())].clone())
                .collect::<Vec<_>>()
                .join("\u{0F0B}")
        })
        .collect()
}

/// Pairs of look-alike syllables, each used in its own fixed context.
/// The look-alike forms are more frequent overall, so frequency alone
/// picks the wrong one; the surrounding syllables disambiguate.
pub struct HomoglyphFixture {
    pub corpus: Vec<String>,
    pub clean: Vec<String>,
    pub corrupted: Vec<String>,
}

pub fn homoglyph_fixture() -> HomoglyphFixture {
    let pairs = [("ཏིག", "ཊིག"), ("དུང", "ཌུང"), ("ཤོག", "ཥོག")];
    let ctx_words = [
        "ཀ", "ཁ", "ག", "ང", "ཅ", "ཆ", "ཇ", "ཉ", "པ", "ཕ", "བ", "མ", "ཙ", "ཚ", "ཛ", "ཝ", "ཞ", "ཟ",
    ];
    let mut corpus = Vec::new();
    let mut clean = Vec::new();
    let mut corrupted = Vec::new();
    for (k, (plain, lookalike)) in pairs.iter().enumerate() {
        let c = &ctx_words[k * 6..k * 6 + 6];
        let with_plain = format!("{}་{}་{}་{}", c[0], c[1], plain, c[2]);
        let with_lookalike = format!("{}་{}་{}་{}", c[3], c[4], lookalike, c[5]);
        corpus.extend(std::iter::repeat_n(with_plain.clone(), 10));
        corpus.extend(std::iter::repeat_n(with_lookalike, 25));
        clean.push(with_plain);
        corrupted.push(format!("{}་{}་{}་{}", c[0], c[1], lookalike, c[2]));
    }
    HomoglyphFixture {
        corpus,
        clean,
        corrupted,
    }
}
