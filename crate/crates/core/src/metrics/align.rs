//! Minimal edit-distance alignment between two token sequences.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditKind {
    Match,
    Substitute,
    /// Reference token absent from the hypothesis.
    Delete,
    /// Hypothesis token absent from the reference.
    Insert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignOp {
    pub ref_index: Option<usize>,
    pub hyp_index: Option<usize>,
    pub kind: EditKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub ops: Vec<AlignOp>,
}

impl Alignment {
    /// Number of non-match operations (the Levenshtein distance).
    pub fn cost(&self) -> usize {
        self.ops.iter().filter(|op| op.kind != EditKind::Match).count()
    }

    /// For each reference position, the hypothesis index aligned to it (if any).
    pub fn ref_to_hyp(&self, ref_len: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; ref_len];
        for op in &self.ops {
            if let (Some(r), Some(h)) = (op.ref_index, op.hyp_index) {
                out[r] = Some(h);
            }
        }
        out
    }
}

/// Aligns `hyp` against `reference` with unit costs.
///
/// Ties are broken walking left to right, preferring match, then substitute,
/// then delete, then insert.
pub fn align<T: PartialEq>(reference: &[T], hyp: &[T]) -> Alignment {
    let (n, m) = (reference.len(), hyp.len());
    // suffix[i][j] = distance between reference[i..] and hyp[j..]
    let width = m + 1;
    let mut suffix = vec![0usize; (n + 1) * width];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            suffix[i * width + j] = if i == n {
                m - j
            } else if j == m {
                n - i
            } else {
                let diag = suffix[(i + 1) * width + j + 1] + usize::from(reference[i] != hyp[j]);
                let del = suffix[(i + 1) * width + j] + 1;
                let ins = suffix[i * width + j + 1] + 1;
                diag.min(del).min(ins)
            };
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let here = suffix[i * width + j];
        if i < n && j < m {
            let same = reference[i] == hyp[j];
            if suffix[(i + 1) * width + j + 1] + usize::from(!same) == here {
                ops.push(AlignOp {
                    ref_index: Some(i),
                    hyp_index: Some(j),
                    kind: if same { EditKind::Match } else { EditKind::Substitute },
                });
                i += 1;
                j += 1;
                continue;
            }
        }
        if i < n && suffix[(i + 1) * width + j] + 1 == here {
            ops.push(AlignOp {
                ref_index: Some(i),
                hyp_index: None,
                kind: EditKind::Delete,
            });
            i += 1;
        } else {
            ops.push(AlignOp {
                ref_index: None,
                hyp_index: Some(j),
                kind: EditKind::Insert,
            });
            j += 1;
        }
    }
    Alignment { ops }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EditKind::*;

    fn kinds(a: &Alignment) -> Vec<EditKind> {
        a.ops.iter().map(|o| o.kind).collect()
    }

    #[test]
    fn identical() {
        let a = align(&["A", "B"], &["A", "B"]);
        assert_eq!(kinds(&a), vec![Match, Match]);
        assert_eq!(a.cost(), 0);
    }

    #[test]
    fn single_deletion() {
        let a = align(&["A", "B", "C"], &["A", "C"]);
        assert_eq!(kinds(&a), vec![Match, Delete, Match]);
        assert_eq!(a.ref_to_hyp(3), vec![Some(0), None, Some(1)]);
    }

    #[test]
    fn insertion_and_empty_sides() {
        assert_eq!(kinds(&align(&["A"], &["X", "A"])), vec![Insert, Match]);
        assert_eq!(kinds(&align::<&str>(&[], &["X"])), vec![Insert]);
        assert_eq!(kinds(&align::<&str>(&["X"], &[])), vec![Delete]);
        assert!(align::<&str>(&[], &[]).ops.is_empty());
    }

    #[test]
    fn substitution_preferred_over_indel_pair() {
        assert_eq!(kinds(&align(&["A", "B"], &["X", "A"])), vec![Substitute, Substitute]);
    }

    #[test]
    fn indices_are_monotone() {
        let a = align(&["A", "B", "C", "D"], &["B", "X", "D", "E"]);
        let refs: Vec<usize> = a.ops.iter().filter_map(|o| o.ref_index).collect();
        let hyps: Vec<usize> = a.ops.iter().filter_map(|o| o.hyp_index).collect();
        assert_eq!(refs, vec![0, 1, 2, 3]);
        assert_eq!(hyps, vec![0, 1, 2, 3]);
    }
}
