use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::dictionary::FrequencyDictionary;
use crate::correct::Corrector;
use crate::error::{Error, Result};
use crate::script::{map_syllables, segment};

const HEADER: &str = "# tispell-ngram v1";
const BOS: &str = "<s>";
const EOS: &str = "</s>";
const UNK: &str = "<unk>";

/// Interpolation weights for trigram, bigram and unigram estimates.
pub const DEFAULT_LAMBDAS: [f64; 3] = [0.6, 0.3, 0.1];
pub const DEFAULT_K: f64 = 1e-3;

/// Interpolated add-k trigram model over syllables. Every component
/// distribution normalizes over the vocabulary plus `</s>` and `<unk>`.
#[derive(Debug, Clone)]
pub struct NgramModel {
    k: f64,
    lambdas: [f64; 3],
    ids: HashMap<String, u32>,
    words: Vec<String>,
    trigram: HashMap<[u32; 3], u64>,
    trigram_ctx: HashMap<[u32; 2], u64>,
    bigram: HashMap<[u32; 2], u64>,
    bigram_ctx: HashMap<u32, u64>,
    unigram: HashMap<u32, u64>,
    total: u64,
}

impl NgramModel {
    fn with_vocab<'a>(vocab: impl IntoIterator<Item = &'a str>, k: f64, lambdas: [f64; 3]) -> Self {
        let mut words: Vec<String> = vec![BOS.into(), EOS.into(), UNK.into()];
        let mut ids: HashMap<String, u32> = words.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        for w in vocab {
            if !ids.contains_key(w) {
                ids.insert(w.to_string(), words.len() as u32);
                words.push(w.to_string());
            }
        }
        Self {
            k,
            lambdas,
            ids,
            words,
            trigram: HashMap::new(),
            trigram_ctx: HashMap::new(),
            bigram: HashMap::new(),
            bigram_ctx: HashMap::new(),
            unigram: HashMap::new(),
            total: 0,
        }
    }

    fn add_trigram(&mut self, t: u32, u: u32, w: u32, n: u64) {
        *self.trigram.entry([t, u, w]).or_default() += n;
        *self.trigram_ctx.entry([t, u]).or_default() += n;
        *self.bigram.entry([u, w]).or_default() += n;
        *self.bigram_ctx.entry(u).or_default() += n;
        *self.unigram.entry(w).or_default() += n;
        self.total += n;
    }

    /// Trains on segmented sentences. Syllables outside `vocab` count as `<unk>`.
    pub fn train<'a, I>(sentences: I, vocab: &FrequencyDictionary, k: f64, lambdas: [f64; 3]) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        if k.is_nan() || k <= 0.0 {
            return Err(Error::Config(format!("smoothing constant must be positive, got {k}")));
        }
        if lambdas.iter().any(|l| *l < 0.0) || (lambdas.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "interpolation weights must be non-negative and sum to 1, got {lambdas:?}"
            )));
        }
        let mut m = Self::with_vocab(vocab.terms().map(|(t, _)| t), k, lambdas);
        for s in sentences {
            let ids = m.encode(&segment(s).strings());
            let bos = m.ids[BOS];
            let (mut t, mut u) = (bos, bos);
            for &w in &ids {
                m.add_trigram(t, u, w, 1);
                (t, u) = (u, w);
            }
        }
        Ok(m)
    }

    fn id(&self, w: &str) -> u32 {
        self.ids.get(w).copied().unwrap_or(self.ids[UNK])
    }

    /// Syllables to ids, with `</s>` appended.
    fn encode(&self, syllables: &[String]) -> Vec<u32> {
        let mut ids: Vec<u32> = syllables.iter().map(|s| self.id(s)).collect();
        ids.push(self.ids[EOS]);
        ids
    }

    /// Size of the predicted vocabulary (everything except `<s>`).
    pub fn vocab_size(&self) -> usize {
        self.words.len() - 1
    }

    fn prob_ids(&self, t: u32, u: u32, w: u32) -> f64 {
        let v = self.vocab_size() as f64;
        let k = self.k;
        let p3 = (*self.trigram.get(&[t, u, w]).unwrap_or(&0) as f64 + k)
            / (*self.trigram_ctx.get(&[t, u]).unwrap_or(&0) as f64 + k * v);
        let p2 = (*self.bigram.get(&[u, w]).unwrap_or(&0) as f64 + k)
            / (*self.bigram_ctx.get(&u).unwrap_or(&0) as f64 + k * v);
        let p1 = (*self.unigram.get(&w).unwrap_or(&0) as f64 + k) / (self.total as f64 + k * v);
        self.lambdas[0] * p3 + self.lambdas[1] * p2 + self.lambdas[2] * p1
    }

    /// P(word | two preceding words); `<s>` pads the start of a sentence.
    pub fn prob(&self, prev2: &str, prev1: &str, word: &str) -> f64 {
        self.prob_ids(self.id(prev2), self.id(prev1), self.id(word))
    }

    /// The predictable words: vocabulary, `</s>` and `<unk>`.
    pub fn predicted_words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().skip(1).map(String::as_str)
    }

    fn log_prob_ids(&self, ids: &[u32]) -> f64 {
        let bos = self.ids[BOS];
        let (mut t, mut u) = (bos, bos);
        let mut lp = 0.0;
        for &w in ids {
            lp += self.prob_ids(t, u, w).ln();
            (t, u) = (u, w);
        }
        lp
    }

    /// Natural-log probability of a syllable sequence including `</s>`.
    pub fn log_prob(&self, syllables: &[String]) -> f64 {
        self.log_prob_ids(&self.encode(syllables))
    }

    /// Per-token perplexity over sentences; `</s>` counts as a token.
    pub fn perplexity<'a, I>(&self, sentences: I) -> f64
    where
        I: IntoIterator<Item = &'a str>,
    {
        let (mut lp, mut n) = (0.0, 0usize);
        for s in sentences {
            let syl = segment(s).strings();
            n += syl.len() + 1;
            lp += self.log_prob(&syl);
        }
        if n == 0 {
            return 1.0;
        }
        (-lp / n as f64).exp()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{HEADER} k={} lambdas={},{},{}\n",
            self.k, self.lambdas[0], self.lambdas[1], self.lambdas[2]
        );
        let vocab: Vec<&str> = self.words.iter().skip(3).map(String::as_str).collect();
        let _ = writeln!(out, "{}", vocab.join(" "));
        let sorted: BTreeMap<[&str; 3], u64> = self
            .trigram
            .iter()
            .map(|(k, v)| (k.map(|i| self.words[i as usize].as_str()), *v))
            .collect();
        for ([t, u, w], n) in sorted {
            let _ = writeln!(out, "{t} {u} {w}\t{n}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Format {
            what: "n-gram model",
            line,
            message,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let parse_header = || -> Option<(f64, [f64; 3])> {
            let rest = header.strip_prefix(HEADER)?.trim();
            let (k, lambdas) = rest.split_once(' ')?;
            let k: f64 = k.strip_prefix("k=")?.parse().ok()?;
            let l: Vec<f64> = lambdas
                .strip_prefix("lambdas=")?
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .ok()?;
            Some((k, l.try_into().ok()?))
        };
        let (k, lambdas) = parse_header().ok_or_else(|| err(1, format!("bad header `{header}`")))?;
        let vocab = lines.next().ok_or_else(|| err(2, "missing vocabulary line".into()))?;
        let mut m = Self::with_vocab(vocab.split_whitespace(), k, lambdas);
        for (i, line) in lines.enumerate() {
            let lineno = i + 3;
            if line.is_empty() {
                continue;
            }
            let (gram, n) = line
                .split_once('\t')
                .ok_or_else(|| err(lineno, "expected `w1 w2 w3<TAB>count`".into()))?;
            let n: u64 = n.parse().map_err(|_| err(lineno, format!("bad count `{n}`")))?;
            let ids: Vec<u32> = gram
                .split(' ')
                .map(|w| {
                    m.ids
                        .get(w)
                        .copied()
                        .ok_or_else(|| err(lineno, format!("unknown word `{w}`")))
                })
                .collect::<Result<_>>()?;
            let [t, u, w]: [u32; 3] = ids.try_into().map_err(|_| err(lineno, "expected three words".into()))?;
            m.add_trigram(t, u, w, n);
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Trains on a one-sentence-per-line corpus with the dictionary as vocabulary.
pub fn ngram_train(corpus: &Path, vocab: &FrequencyDictionary, k: f64) -> Result<NgramModel> {
    let text = fs::read_to_string(corpus).map_err(|e| Error::io(corpus, e))?;
    NgramModel::train(text.lines(), vocab, k, DEFAULT_LAMBDAS)
}

/// Greedy left-to-right: each syllable becomes whichever of itself and its
/// dictionary candidates gives the most probable sentence. Ties fall back to
/// the dictionary ranking, with the original syllable winning when unchanged.
pub fn ngram_correct(text: &str, model: &NgramModel, dict: &FrequencyDictionary) -> String {
    let mut current = segment(text).strings();
    for i in 0..current.len() {
        let original = current[i].clone();
        let mut best = (model.log_prob(&current), original.clone());
        for cand in dict.candidates(&original) {
            if cand.term == original {
                continue;
            }
            current[i] = cand.term.clone();
            let lp = model.log_prob(&current);
            if lp > best.0 {
                best = (lp, cand.term);
            }
        }
        current[i] = best.1;
    }
    map_syllables(text, |i, _| current[i].clone())
}

pub struct NgramCorrector {
    model: NgramModel,
    dict: FrequencyDictionary,
}

impl NgramCorrector {
    pub fn new(model: NgramModel, dict: FrequencyDictionary) -> Self {
        Self { model, dict }
    }
}

impl Corrector for NgramCorrector {
    fn name(&self) -> &str {
        "ngram"
    }

    fn correct(&self, text: &str) -> String {
        ngram_correct(text, &self.model, &self.dict)
    }

    fn corrects_syllable_level(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORPUS: [&str; 4] = ["ཀ་ཁ་ག", "ཀ་ཁ་ག", "ཅ་ཁ་ང", "ཀ་ཁ་ག་ང"];

    fn model() -> (NgramModel, FrequencyDictionary) {
        let dict = FrequencyDictionary::from_sentences(CORPUS, 1);
        let m = NgramModel::train(CORPUS, &dict, DEFAULT_K, DEFAULT_LAMBDAS).unwrap();
        (m, dict)
    }

    #[test]
    fn distributions_normalize() {
        let (m, _) = model();
        let words: Vec<String> = std::iter::once(BOS.to_string())
            .chain(m.predicted_words().map(str::to_string))
            .collect();
        for t in &words {
            for u in &words {
                let total: f64 = m.predicted_words().map(|w| m.prob(t, u, w)).sum();
                assert!((total - 1.0).abs() < 1e-9, "context ({t}, {u}) sums to {total}");
            }
        }
    }

    #[test]
    fn seen_beats_unseen() {
        let (m, _) = model();
        assert!(m.prob(BOS, "ཀ", "ཁ") > m.prob(BOS, "ཀ", "ཅ"));
        assert!(m.prob("ཟ", "ཞ", "ཀ") > 0.0);
    }

    #[test]
    fn perplexity_is_lower_on_training_text() {
        let (m, _) = model();
        assert!(m.perplexity(CORPUS) < m.perplexity(["ག་ཅ་ཀ་ང"]));
        assert_eq!(m.perplexity(std::iter::empty()), 1.0);
    }

    #[test]
    fn context_picks_the_right_word() {
        let (m, d) = model();
        // "ཅ" is in the vocabulary; context prefers "ག" after "ཀ ཁ".
        assert_eq!(ngram_correct("ཀ་ཁ་ཅ", &m, &d), "ཀ་ཁ་ག");
        assert_eq!(ngram_correct("ཀ་ཁ་ག་", &m, &d), "ཀ་ཁ་ག་");
        assert_eq!(ngram_correct("", &m, &d), "");
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        let d = FrequencyDictionary::from_sentences(CORPUS, 1);
        assert!(NgramModel::train(CORPUS, &d, 0.0, DEFAULT_LAMBDAS).is_err());
        assert!(NgramModel::train(CORPUS, &d, 1.0, [0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let (m, _) = model();
        let back = NgramModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back.to_text(), m.to_text());
        let s: Vec<String> = ["ཀ", "ཁ", "ཅ"].map(String::from).to_vec();
        assert_eq!(back.log_prob(&s), m.log_prob(&s));
        assert!(NgramModel::from_text("nope").is_err());
    }
}
