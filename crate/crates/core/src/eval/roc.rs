use alloc::vec::Vec;

use super::{check, EvalError};

/// One operating point: predict positive when `score >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct YoudenPoint {
    pub threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy: f64,
}

impl YoudenPoint {
    pub fn youden(&self) -> f64 {
        self.sensitivity + self.specificity - 1.0
    }
}

/// Groups of tied scores in descending order: `(score, positives, negatives)`.
fn descending_groups(scores: &[f64], labels: &[bool]) -> Vec<(f64, usize, usize)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    for i in order {
        let s = scores[i];
        match groups.last_mut() {
            Some(g) if g.0 == s => {}
            _ => groups.push((s, 0, 0)),
        }
        let g = groups.last_mut().unwrap();
        if labels[i] {
            g.1 += 1;
        } else {
            g.2 += 1;
        }
    }
    groups
}

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs where the
/// positive scores higher, ties counting one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    let (pos, neg) = check(scores, labels)?;
    // Twice the U statistic, accumulated in integers so the result equals
    // a pairwise count exactly.
    let mut twice_u: u128 = 0;
    let mut neg_below: u128 = 0;
    for &(_, p, n) in descending_groups(scores, labels).iter().rev() {
        twice_u += p as u128 * (2 * neg_below + n as u128);
        neg_below += n as u128;
    }
    Ok(twice_u as f64 / (2 * pos as u128 * neg as u128) as f64)
}

/// ROC curve at every distinct score, in descending threshold order.
pub fn roc_points(scores: &[f64], labels: &[bool]) -> Result<Vec<RocPoint>, EvalError> {
    let (pos, neg) = check(scores, labels)?;
    let (mut tp, mut fp) = (0usize, 0usize);
    Ok(descending_groups(scores, labels)
        .into_iter()
        .map(|(threshold, p, n)| {
            tp += p;
            fp += n;
            RocPoint {
                threshold,
                fpr: fp as f64 / neg as f64,
                tpr: tp as f64 / pos as f64,
            }
        })
        .collect())
}

/// Threshold maximizing sensitivity + specificity − 1 over the observed
/// scores. Ties go to the higher specificity, then the lower threshold.
pub fn youden_point(scores: &[f64], labels: &[bool]) -> Result<YoudenPoint, EvalError> {
    let (pos, neg) = check(scores, labels)?;
    let (mut tp, mut fp) = (0usize, 0usize);
    // (J + 1) * pos * neg, exact in integers.
    let mut best: Option<(u128, usize, usize, f64)> = None;
    for (threshold, p, n) in descending_groups(scores, labels) {
        tp += p;
        fp += n;
        let j = tp as u128 * neg as u128 + (neg - fp) as u128 * pos as u128;
        let better = match best {
            None => true,
            Some((bj, _, bfp, _)) => j > bj || (j == bj && fp <= bfp),
        };
        if better {
            best = Some((j, tp, fp, threshold));
        }
    }
    let (_, tp, fp, threshold) = best.expect("at least one group");
    let tn = neg - fp;
    Ok(YoudenPoint {
        threshold,
        sensitivity: tp as f64 / pos as f64,
        specificity: tn as f64 / neg as f64,
        accuracy: (tp + tn) as f64 / (pos + neg) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn pairwise(scores: &[f64], labels: &[bool]) -> f64 {
        let (mut twice, mut pairs) = (0u64, 0u64);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] && !labels[j] {
                    pairs += 1;
                    if scores[i] > scores[j] {
                        twice += 2;
                    } else if scores[i] == scores[j] {
                        twice += 1;
                    }
                }
            }
        }
        twice as f64 / (2 * pairs) as f64
    }

    #[test]
    fn four_point_example() {
        let s = [0.1, 0.4, 0.35, 0.8];
        let l = [false, false, true, true];
        assert_eq!(roc_auc(&s, &l).unwrap(), 0.75);
        let y = youden_point(&s, &l).unwrap();
        assert_eq!(y.threshold, 0.8);
        assert_eq!((y.sensitivity, y.specificity), (0.5, 1.0));
        assert_eq!(y.youden(), 0.5);
        assert_eq!(y.accuracy, 0.75);
    }

    #[test]
    fn perfect_and_tied_scores() {
        let l = [false, false, true, true];
        assert_eq!(roc_auc(&[1.0, 2.0, 3.0, 4.0], &l).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.3; 4], &l).unwrap(), 0.5);
        let y = youden_point(&[1.0, 2.0, 3.0, 4.0], &l).unwrap();
        assert_eq!((y.sensitivity, y.specificity, y.accuracy), (1.0, 1.0, 1.0));
        assert_eq!(y.threshold, 3.0);
    }

    #[test]
    fn single_class_and_mismatch_are_errors() {
        assert_eq!(roc_auc(&[0.1, 0.2], &[true, true]), Err(EvalError::SingleClass));
        assert!(matches!(
            youden_point(&[0.1], &[true, false]),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert_eq!(roc_auc(&[f64::NAN, 0.2], &[true, false]), Err(EvalError::NonFinite));
    }

    #[test]
    fn roc_curve_ends_at_one_one() {
        let s = [0.1, 0.4, 0.35, 0.8, 0.4];
        let l = [false, false, true, true, true];
        let pts = roc_points(&s, &l).unwrap();
        assert_eq!(pts.len(), 4);
        let last = pts.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        assert!(pts.windows(2).all(|w| w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr));
    }

    fn labeled() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..60).prop_flat_map(|n| {
            (
                proptest::collection::vec(prop_oneof![(-5i32..5).prop_map(f64::from), -5.0f64..5.0], n),
                proptest::collection::vec(any::<bool>(), n),
            )
                .prop_map(|(s, mut l)| {
                    l[0] = true;
                    l[1] = false;
                    (s, l)
                })
        })
    }

    proptest! {
        #[test]
        fn auc_equals_pairwise_count((s, l) in labeled()) {
            prop_assert_eq!(roc_auc(&s, &l).unwrap(), pairwise(&s, &l));
        }

        #[test]
        fn auc_invariant_under_monotone_maps((s, l) in labeled()) {
            let t: Vec<f64> = s.iter().map(|x| libm::exp(*x) * 3.0 - 1.0).collect();
            prop_assert_eq!(roc_auc(&s, &l).unwrap(), roc_auc(&t, &l).unwrap());
        }

        #[test]
        fn negated_scores_complement((s, l) in labeled()) {
            let neg: Vec<f64> = s.iter().map(|x| -x).collect();
            let sum = roc_auc(&s, &l).unwrap() + roc_auc(&neg, &l).unwrap();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        #[test]
        fn youden_is_the_scan_maximum((s, l) in labeled()) {
            let y = youden_point(&s, &l).unwrap();
            let pos = l.iter().filter(|&&b| b).count() as f64;
            let neg = l.len() as f64 - pos;
            for &t in &s {
                let tp = s.iter().zip(&l).filter(|(x, &b)| b && **x >= t).count() as f64;
                let tn = s.iter().zip(&l).filter(|(x, &b)| !b && **x < t).count() as f64;
                prop_assert!(tp / pos + tn / neg - 1.0 <= y.youden() + 1e-12);
            }
        }
    }

    #[test]
    fn points_have_no_duplicated_thresholds() {
        let pts = roc_points(&[0.5, 0.5, 0.2], &[true, false, false]).unwrap();
        assert_eq!(
            pts,
            vec![
                RocPoint {
                    threshold: 0.5,
                    fpr: 0.5,
                    tpr: 1.0
                },
                RocPoint {
                    threshold: 0.2,
                    fpr: 1.0,
                    tpr: 1.0
                },
            ]
        );
    }
}
