use serde::{Deserialize, Serialize};

use crate::error::{Result, VadError};

/// ROC curve from a threshold sweep over every distinct score.
///
/// Point `i` classifies `score >= thresholds[i]` as speech; point 0 is the
/// `(0, 0)` corner with an infinite threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub thresholds: Vec<f64>,
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    pub auc: f64,
}

fn class_counts(scores: &[f64], labels: &[u8]) -> Result<(u64, u64)> {
    if scores.len() != labels.len() {
        return Err(VadError::Alignment(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(VadError::Data("NaN score".into()));
    }
    let mut pos = 0u64;
    for &l in labels {
        match l {
            0 => {}
            1 => pos += 1,
            other => return Err(VadError::Data(format!("label {other} is not 0 or 1"))),
        }
    }
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(VadError::UndefinedAuc(format!(
            "{pos} positive and {neg} negative frames; both classes are required"
        )));
    }
    Ok((pos, neg))
}

/// Sorted-sweep ROC. Equal scores form a single step, which gives ties half
/// credit in the trapezoidal area.
pub fn roc(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    let (pos, neg) = class_counts(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut thresholds = vec![f64::INFINITY];
    let mut fpr = vec![0.0];
    let mut tpr = vec![0.0];
    // Twice the area, in units of one (positive, negative) pair.
    let mut doubled_area: u128 = 0;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        let (tp_prev, fp_prev) = (tp, fp);
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        doubled_area += u128::from(fp - fp_prev) * u128::from(tp + tp_prev);
        thresholds.push(threshold);
        fpr.push(fp as f64 / neg as f64);
        tpr.push(tp as f64 / pos as f64);
    }
    let auc = doubled_area as f64 / (2 * u128::from(pos) * u128::from(neg)) as f64;
    Ok(RocCurve { thresholds, fpr, tpr, auc })
}

/// Area under the ROC curve without materializing it.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    roc(scores, labels).map(|c| c.auc)
}

/// Brute-force Mann-Whitney AUC: every (positive, negative) pair, ties count half.
pub fn auc_pairwise_oracle(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let positives: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l == 1).map(|(&s, _)| s).collect();
    let negatives: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l == 0).map(|(&s, _)| s).collect();
    let mut doubled: u128 = 0;
    for &p in &positives {
        for &n in &negatives {
            if p > n {
                doubled += 2;
            } else if p == n {
                doubled += 1;
            }
        }
    }
    Ok(doubled as f64 / (2 * u128::from(pos) * u128::from(neg)) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_case() {
        let s = [0.1, 0.4, 0.35, 0.8];
        let l = [0, 0, 1, 1];
        assert_eq!(roc(&s, &l).unwrap().auc, 0.75);
        assert_eq!(auc_pairwise_oracle(&s, &l).unwrap(), 0.75);
    }

    #[test]
    fn edge_cases() {
        assert_eq!(auc(&[0.2, 0.9], &[0, 1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5; 6], &[0, 1, 0, 1, 1, 0]).unwrap(), 0.5);
        assert_eq!(auc_pairwise_oracle(&[0.5; 6], &[0, 1, 0, 1, 1, 0]).unwrap(), 0.5);
        assert!(matches!(auc(&[0.1, 0.2], &[1, 1]), Err(VadError::UndefinedAuc(_))));
        assert!(matches!(auc_pairwise_oracle(&[0.1], &[0]), Err(VadError::UndefinedAuc(_))));
        assert!(auc(&[0.1, f64::NAN], &[0, 1]).is_err());
        assert!(auc(&[0.1, 0.2], &[0, 2]).is_err());
    }

    #[test]
    fn curve_shape() {
        let c = roc(&[0.9, 0.9, 0.3, 0.1, 0.5], &[1, 0, 1, 0, 1]).unwrap();
        assert_eq!((c.fpr[0], c.tpr[0]), (0.0, 0.0));
        assert_eq!((*c.fpr.last().unwrap(), *c.tpr.last().unwrap()), (1.0, 1.0));
        assert!(c.thresholds.windows(2).all(|w| w[0] > w[1]));
        assert!(c.fpr.windows(2).all(|w| w[0] <= w[1]));
        assert!(c.tpr.windows(2).all(|w| w[0] <= w[1]));
        let trapezoid: f64 = (1..c.fpr.len())
            .map(|i| (c.fpr[i] - c.fpr[i - 1]) * (c.tpr[i] + c.tpr[i - 1]) / 2.0)
            .sum();
        assert!((trapezoid - c.auc).abs() < 1e-12);
    }

    #[test]
    fn random_scores_are_near_chance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s: Vec<f64> = (0..100_000).map(|_| rng.gen()).collect();
        let l: Vec<u8> = (0..100_000).map(|_| rng.gen_range(0..2)).collect();
        assert!((auc(&s, &l).unwrap() - 0.5).abs() < 0.02);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
        (2usize..200).prop_flat_map(|n| {
            (
                prop::collection::vec((0u8..12).prop_map(|q| f64::from(q) / 11.0), n),
                prop::collection::vec(0u8..2, n),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn sweep_matches_pairwise((s, mut l) in instance()) {
            l[0] = 0;
            l[1] = 1;
            let a = roc(&s, &l).unwrap().auc;
            let b = auc_pairwise_oracle(&s, &l).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn inverted_labels_complement((s, mut l) in instance()) {
            l[0] = 0;
            l[1] = 1;
            let inv: Vec<u8> = l.iter().map(|&x| 1 - x).collect();
            let a = auc(&s, &l).unwrap();
            prop_assert!((a + auc(&s, &inv).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn monotone_transform_invariant((s, mut l) in instance()) {
            l[0] = 0;
            l[1] = 1;
            let t: Vec<f64> = s.iter().map(|x| (3.0 * x).exp() - 7.0).collect();
            prop_assert_eq!(auc(&s, &l).unwrap(), auc(&t, &l).unwrap());
        }
    }
}
