//! Syllable-level precision, recall and F1 for correction output.
//!
//! Two scoring modes are reported side by side:
//!
//! * **classification**: every aligned reference syllable is a labelled
//!   prediction; per-class one-vs-rest scores are averaged with weights equal
//!   to each class's support among reference syllables. Syllables missing from
//!   the hypothesis are predicted as a reserved null class, and extra hypothesis
//!   syllables count as false positives of their own class. An untouched clean
//!   sentence scores exactly 1.
//! * **correction**: positions that needed a fix versus positions the system
//!   changed, scored as a detection-and-repair task.

mod align;
mod report;

use std::collections::BTreeMap;

pub use align::{align, AlignOp, Alignment, EditKind};
pub use report::{evaluate_corpus, evaluate_outputs, BucketReport, EvalReport, Level};

use crate::error::{Error, Result};
use crate::script::segment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetricMode {
    Classification,
    Correction,
}

impl MetricMode {
    pub fn name(self) -> &'static str {
        match self {
            MetricMode::Classification => "classification",
            MetricMode::Correction => "correction",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// Number of reference syllables scored.
    pub support: usize,
}

pub fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class confusion counts pooled over any number of sentences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Confusion {
    classes: BTreeMap<String, [usize; 4]>, // tp, fp, fn, support
}

impl Confusion {
    fn entry(&mut self, class: &str) -> &mut [usize; 4] {
        if !self.classes.contains_key(class) {
            self.classes.insert(class.to_string(), [0; 4]);
        }
        self.classes.get_mut(class).expect("inserted")
    }

    /// Scores one reference/hypothesis sentence pair.
    pub fn add(&mut self, reference: &[String], hyp: &[String]) {
        for op in align(reference, hyp).ops {
            let truth = op.ref_index.map(|i| reference[i].as_str());
            let pred = op.hyp_index.map(|j| hyp[j].as_str());
            if let Some(t) = truth {
                self.entry(t)[3] += 1;
            }
            match (truth, pred) {
                (Some(t), Some(p)) if t == p => self.entry(t)[0] += 1,
                _ => {
                    if let Some(t) = truth {
                        self.entry(t)[2] += 1;
                    }
                    if let Some(p) = pred {
                        self.entry(p)[1] += 1;
                    }
                }
            }
        }
    }

    pub fn class_counts(&self, class: &str) -> Option<(usize, usize, usize, usize)> {
        self.classes.get(class).map(|c| (c[0], c[1], c[2], c[3]))
    }

    /// Support-weighted mean of per-class precision, recall and F1.
    pub fn scores(&self) -> Scores {
        let mut out = Scores::default();
        let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
        for &[tp, fp, fn_, support] in self.classes.values() {
            out.tp += tp;
            out.fp += fp;
            out.fn_ += fn_;
            if support == 0 {
                continue;
            }
            out.support += support;
            let cp = ratio(tp, tp + fp);
            let cr = ratio(tp, tp + fn_);
            let w = support as f64;
            p += w * cp;
            r += w * cr;
            f += w * harmonic(cp, cr);
        }
        if out.support > 0 {
            let total = out.support as f64;
            out.precision = p / total;
            out.recall = r / total;
            out.f1 = f / total;
        }
        out
    }
}

/// Counts for the correction-mode metric, pooled over sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorrectionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub needed: usize,
    pub changed: usize,
    pub support: usize,
}

impl CorrectionCounts {
    /// Scores one (source, reference, hypothesis) triple over reference positions.
    pub fn add(&mut self, src: &[String], reference: &[String], hyp: &[String]) {
        let src_at = align(reference, src).ref_to_hyp(reference.len());
        let hyp_at = align(reference, hyp).ref_to_hyp(reference.len());
        for (i, r) in reference.iter().enumerate() {
            let s = src_at[i].map(|k| &src[k]);
            let h = hyp_at[i].map(|k| &hyp[k]);
            let needed = s != Some(r);
            let changed = h != s;
            let fixed = h == Some(r);
            self.support += 1;
            if needed {
                self.needed += 1;
                if !fixed {
                    self.fn_ += 1;
                }
            }
            if changed {
                self.changed += 1;
                if fixed {
                    self.tp += 1;
                } else {
                    self.fp += 1;
                }
            }
        }
    }

    pub fn scores(&self) -> Scores {
        let precision = if self.changed == 0 && self.needed == 0 {
            1.0
        } else {
            ratio(self.tp, self.tp + self.fp)
        };
        let recall = if self.needed == 0 {
            1.0
        } else {
            ratio(self.tp, self.tp + self.fn_)
        };
        Scores {
            precision,
            recall,
            f1: harmonic(precision, recall),
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            support: self.support,
        }
    }
}

pub fn syllables(text: &str) -> Vec<String> {
    segment(text).strings()
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: a, right: b })
    }
}

/// Classification-mode scores over parallel sentence lists.
pub fn prf_classification<S: AsRef<str>>(refs: &[S], hyps: &[S]) -> Result<Scores> {
    check_len(refs.len(), hyps.len())?;
    let mut confusion = Confusion::default();
    for (r, h) in refs.iter().zip(hyps) {
        confusion.add(&syllables(r.as_ref()), &syllables(h.as_ref()));
    }
    Ok(confusion.scores())
}

/// Correction-mode scores over parallel (source, reference, hypothesis) lists.
pub fn prf_correction<S: AsRef<str>>(srcs: &[S], refs: &[S], hyps: &[S]) -> Result<Scores> {
    check_len(srcs.len(), refs.len())?;
    check_len(refs.len(), hyps.len())?;
    let mut counts = CorrectionCounts::default();
    for ((s, r), h) in srcs.iter().zip(refs).zip(hyps) {
        counts.add(&syllables(s.as_ref()), &syllables(r.as_ref()), &syllables(h.as_ref()));
    }
    Ok(counts.scores())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn identity_scores_one() {
        let refs = ["ཀ་ཁ་ག", "ང་ཅ"];
        let s = prf_classification(&refs, &refs).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let c = prf_correction(&refs, &refs, &refs).unwrap();
        assert_eq!((c.precision, c.recall, c.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(prf_classification(&["ཀ"], &[]).is_err());
        assert!(prf_correction(&["ཀ"], &["ཀ"], &[]).is_err());
    }

    #[test]
    fn fixed_substitution_is_a_true_positive() {
        let mut c = CorrectionCounts::default();
        c.add(
            &toks(&["A", "X", "C"]),
            &toks(&["A", "B", "C"]),
            &toks(&["A", "B", "C"]),
        );
        assert_eq!((c.tp, c.fp, c.fn_), (1, 0, 0));
        assert_eq!(c.scores().f1, 1.0);
    }

    #[test]
    fn untouched_error_is_a_false_negative() {
        let mut c = CorrectionCounts::default();
        c.add(
            &toks(&["A", "X", "C"]),
            &toks(&["A", "B", "C"]),
            &toks(&["A", "X", "C"]),
        );
        assert_eq!((c.tp, c.fp, c.fn_), (0, 0, 1));
        let s = c.scores();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn spurious_change_on_clean_input() {
        let mut c = CorrectionCounts::default();
        c.add(&toks(&["A", "B"]), &toks(&["A", "B"]), &toks(&["A", "Z"]));
        assert_eq!((c.tp, c.fp, c.fn_), (0, 1, 0));
        let s = c.scores();
        assert_eq!(s.recall, 1.0);
        assert_eq!(s.precision, 0.0);
    }

    #[test]
    fn deleted_syllable_scores_zero_for_its_class() {
        let mut c = Confusion::default();
        c.add(&toks(&["A", "B", "C", "D"]), &toks(&["A", "C", "D"]));
        let s = c.scores();
        assert!((s.precision - 0.75).abs() < 1e-12);
        assert!((s.recall - 0.75).abs() < 1e-12);
        assert_eq!(c.class_counts("B"), Some((0, 0, 1, 1)));
    }

    #[test]
    fn inserted_syllable_is_a_false_positive_of_its_class() {
        let mut c = Confusion::default();
        c.add(&toks(&["A", "B"]), &toks(&["A", "A", "B"]));
        assert_eq!(c.class_counts("A"), Some((1, 1, 0, 1)));
        let s = c.scores();
        assert!((s.precision - 0.75).abs() < 1e-12);
        assert_eq!(s.recall, 1.0);
    }

    #[test]
    fn harmonic_guard() {
        assert_eq!(harmonic(0.0, 0.0), 0.0);
        assert!((harmonic(0.5, 1.0) - 2.0 / 3.0).abs() < 1e-12);
    }
}
