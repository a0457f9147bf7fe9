//! Word error rate from a minimum-edit-distance alignment.

use crate::error::{Error, Result};

/// Case-normalized token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSequence {
    pub tokens: Vec<String>,
}

impl WordSequence {
    /// Tokenize on whitespace, uppercase-fold, and strip leading/trailing
    /// punctuation from each token.
    pub fn from_text(text: &str) -> Self {
        let tokens = text
            .split_whitespace()
            .map(|t| {
                t.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                    .to_uppercase()
            })
            .filter(|t| !t.is_empty())
            .collect();
        WordSequence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WerBreakdown {
    pub wer: f64,
    pub n_sub: usize,
    pub n_del: usize,
    pub n_ins: usize,
    pub n_ref: usize,
}

/// WER = (substitutions + deletions + insertions) / reference length, from a
/// unit-cost alignment. Among cost-equal alignments the backtrace prefers
/// substitution over insertion over deletion.
pub fn compute_wer(reference: &WordSequence, hypothesis: &WordSequence) -> Result<WerBreakdown> {
    if reference.is_empty() {
        return Err(Error::InvalidArgument("empty reference transcript".into()));
    }
    let r = &reference.tokens;
    let h = &hypothesis.tokens;
    let (nr, nh) = (r.len(), h.len());

    let mut d = vec![vec![0usize; nh + 1]; nr + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=nr {
        for j in 1..=nh {
            let sub = d[i - 1][j - 1] + usize::from(r[i - 1] != h[j - 1]);
            let ins = d[i][j - 1] + 1;
            let del = d[i - 1][j] + 1;
            d[i][j] = sub.min(ins).min(del);
        }
    }

    let (mut n_sub, mut n_del, mut n_ins) = (0usize, 0usize, 0usize);
    let (mut i, mut j) = (nr, nh);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + usize::from(r[i - 1] != h[j - 1]) {
            if r[i - 1] != h[j - 1] {
                n_sub += 1;
            }
            i -= 1;
            j -= 1;
        } else if j > 0 && d[i][j] == d[i][j - 1] + 1 {
            n_ins += 1;
            j -= 1;
        } else {
            n_del += 1;
            i -= 1;
        }
    }

    Ok(WerBreakdown {
        wer: (n_sub + n_del + n_ins) as f64 / nr as f64,
        n_sub,
        n_del,
        n_ins,
        n_ref: nr,
    })
}

/// Corpus-level WER: total errors over total reference words across pairs.
pub fn corpus_wer(pairs: &[(WordSequence, WordSequence)]) -> Result<WerBreakdown> {
    let mut total = WerBreakdown {
        wer: 0.0,
        n_sub: 0,
        n_del: 0,
        n_ins: 0,
        n_ref: 0,
    };
    for (reference, hypothesis) in pairs {
        let b = compute_wer(reference, hypothesis)?;
        total.n_sub += b.n_sub;
        total.n_del += b.n_del;
        total.n_ins += b.n_ins;
        total.n_ref += b.n_ref;
    }
    if total.n_ref == 0 {
        return Err(Error::InvalidArgument("no reference words".into()));
    }
    total.wer = (total.n_sub + total.n_del + total.n_ins) as f64 / total.n_ref as f64;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(text: &str) -> WordSequence {
        WordSequence::from_text(text)
    }

    #[test]
    fn identical_sequences_have_zero_wer() {
        let b = compute_wer(&seq("the cat sat"), &seq("the cat sat")).unwrap();
        assert_eq!(b.wer, 0.0);
        assert_eq!((b.n_sub, b.n_del, b.n_ins), (0, 0, 0));
    }

    #[test]
    fn substitution_plus_insertion() {
        let b = compute_wer(&seq("the cat sat"), &seq("the bat sat on")).unwrap();
        assert_eq!((b.n_sub, b.n_del, b.n_ins), (1, 0, 1));
        assert!((b.wer - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_hypothesis_is_all_deletions() {
        let b = compute_wer(&seq("a b"), &seq("")).unwrap();
        assert_eq!((b.n_sub, b.n_del, b.n_ins), (0, 2, 0));
        assert_eq!(b.wer, 1.0);
    }

    #[test]
    fn empty_reference_is_an_error() {
        assert!(compute_wer(&seq(""), &seq("a")).is_err());
    }

    #[test]
    fn wer_can_exceed_one() {
        let b = compute_wer(&seq("a"), &seq("x y z")).unwrap();
        assert!(b.wer > 1.0);
    }

    #[test]
    fn normalization_folds_case_and_punctuation() {
        let b = compute_wer(&seq("The cat, sat."), &seq("THE CAT SAT")).unwrap();
        assert_eq!(b.wer, 0.0);
    }

    #[test]
    fn corpus_wer_weights_by_reference_length() {
        let pairs = vec![
            (seq("a b c d"), seq("a b c d")), // 0 errors, 4 words
            (seq("x"), seq("y")),             // 1 error, 1 word
        ];
        let b = corpus_wer(&pairs).unwrap();
        assert!((b.wer - 0.2).abs() < 1e-12);
    }

    /// Independent edit-distance oracle: plain Wagner-Fischer on counts only.
    fn oracle_distance(r: &[&str], h: &[&str]) -> usize {
        let mut prev: Vec<usize> = (0..=h.len()).collect();
        for i in 1..=r.len() {
            let mut cur = vec![i; h.len() + 1];
            for j in 1..=h.len() {
                let sub = prev[j - 1] + usize::from(r[i - 1] != h[j - 1]);
                cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
            }
            prev = cur;
        }
        prev[h.len()]
    }

    #[test]
    fn matches_oracle_on_short_sequences() {
        let alphabet = ["A", "B", "C"];
        let mut state: u64 = 17;
        let mut next = |bound: usize| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 33) as usize % bound
        };
        for _ in 0..2000 {
            let rl = 1 + next(8);
            let hl = next(9);
            let r: Vec<&str> = (0..rl).map(|_| alphabet[next(3)]).collect();
            let h: Vec<&str> = (0..hl).map(|_| alphabet[next(3)]).collect();
            let reference = WordSequence {
                tokens: r.iter().map(|s| s.to_string()).collect(),
            };
            let hypothesis = WordSequence {
                tokens: h.iter().map(|s| s.to_string()).collect(),
            };
            let b = compute_wer(&reference, &hypothesis).unwrap();
            assert_eq!(b.n_sub + b.n_del + b.n_ins, oracle_distance(&r, &h));
        }
    }
}
