//! Classical correctors: identity, symmetric-delete dictionary lookup and
//! n-gram context scoring. None of them can insert or remove syllables.

mod dictionary;
mod ngram;

pub use dictionary::{dict_build, dict_correct, Candidate, DictCorrector, FrequencyDictionary};
pub use ngram::{ngram_correct, ngram_train, NgramCorrector, NgramModel, DEFAULT_K, DEFAULT_LAMBDAS};

use crate::correct::Corrector;

/// Makes no correction at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct DummyCorrector;

pub fn dummy_correct(text: &str) -> String {
    text.to_string()
}

impl Corrector for DummyCorrector {
    fn name(&self) -> &str {
        "dummy"
    }

    fn correct(&self, text: &str) -> String {
        dummy_correct(text)
    }

    fn corrects_syllable_level(&self) -> bool {
        false
    }
}

/// Optimal-string-alignment distance (adjacent transpositions cost 1).
/// Returns `None` once the distance is known to exceed `max`.
pub fn osa_distance(a: &[char], b: &[char], max: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > max {
        return None;
    }
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let mut d = vec![0usize; (n + 1) * width];
    for i in 0..=n {
        d[i * width] = i;
    }
    for (j, cell) in d.iter_mut().take(width).enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        let mut row_min = usize::MAX;
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut v = (d[(i - 1) * width + j] + 1)
                .min(d[i * width + j - 1] + 1)
                .min(d[(i - 1) * width + j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                v = v.min(d[(i - 2) * width + j - 2] + 1);
            }
            d[i * width + j] = v;
            row_min = row_min.min(v);
        }
        if m > 0 && row_min > max {
            return None;
        }
    }
    let dist = d[n * width + m];
    (dist <= max).then_some(dist)
}
