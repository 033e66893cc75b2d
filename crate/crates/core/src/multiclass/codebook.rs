/// `+1` for non-negative values, `-1` otherwise.
pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// One-hot codebook: row `c` is `+1` at position `c` and `-1` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeBook {
    k: usize,
}

impl CodeBook {
    pub fn new(k: usize) -> Self {
        Self { k }
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    /// Row of class `c` (1-based).
    pub fn row(&self, c: usize) -> Vec<f64> {
        (1..=self.k)
            .map(|i| if i == c { 1.0 } else { -1.0 })
            .collect()
    }

    /// Hinge distance `Σᵢ max(0, 1 − b̂ᵢ·b_c[i])` to row `c`.
    pub fn loss(&self, responses: &[f64], c: usize) -> f64 {
        responses
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let code = if i + 1 == c { 1.0 } else { -1.0 };
                (1.0 - r * code).max(0.0)
            })
            .sum()
    }
}

/// Class (1-based) whose row is nearest to `responses`; the lowest index
/// wins ties.
pub fn decode(responses: &[f64], book: &CodeBook) -> usize {
    let mut best = (1, f64::INFINITY);
    for c in 1..=book.classes() {
        let l = book.loss(responses, c);
        if l < best.1 {
            best = (c, l);
        }
    }
    best.0
}

/// Most frequent label, lowest label on ties. `None` for no votes.
pub fn majority_vote(predictions: &[usize]) -> Option<usize> {
    let max_label = *predictions.iter().max()?;
    let mut counts = vec![0usize; max_label + 1];
    for &p in predictions {
        counts[p] += 1;
    }
    let top = *counts.iter().max()?;
    counts.iter().position(|&c| c == top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_classifier_claims_pattern() {
        assert_eq!(decode(&[-1.0, 1.0, -1.0], &CodeBook::new(3)), 2);
    }

    #[test]
    fn ties_go_to_lowest_class() {
        let book = CodeBook::new(3);
        // rows 1 and 2 both score 2, row 3 scores 4
        assert_eq!(book.loss(&[1.0, 1.0, -1.0], 1), 2.0);
        assert_eq!(book.loss(&[1.0, 1.0, -1.0], 2), 2.0);
        assert_eq!(decode(&[1.0, 1.0, -1.0], &book), 1);
        assert_eq!(decode(&[-1.0, -1.0, -1.0], &book), 1);
    }

    #[test]
    fn one_hot_decodes_exhaustively() {
        for k in 1..=12 {
            let book = CodeBook::new(k);
            for c in 1..=k {
                assert_eq!(decode(&book.row(c), &book), c);
            }
        }
    }

    #[test]
    fn rows_are_distinct_one_hot() {
        let book = CodeBook::new(6);
        for c in 1..=6 {
            let r = book.row(c);
            assert_eq!(r.iter().filter(|&&v| v == 1.0).count(), 1);
            for o in (c + 1)..=6 {
                assert_ne!(r, book.row(o));
            }
        }
    }

    #[test]
    fn votes() {
        assert_eq!(majority_vote(&[1, 1, 2]), Some(1));
        assert_eq!(majority_vote(&[1, 2]), Some(1));
        assert_eq!(majority_vote(&[3, 3, 3]), Some(3));
        assert_eq!(majority_vote(&[2, 3, 3, 2]), Some(2));
        assert_eq!(majority_vote(&[]), None);
        assert_eq!(sign(0.0), 1.0);
    }
}
