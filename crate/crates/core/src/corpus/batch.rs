use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;

use crate::corpus::{Condition, Utterance};
use crate::error::{Result, VadError};

/// Distinct `(noise_type, snr)` cells present in `pool`, in report order.
pub fn conditions(pool: &[Utterance]) -> Vec<Condition> {
    pool.iter().map(Utterance::condition).collect::<BTreeSet<_>>().into_iter().collect()
}

/// Joins utterances end to end. Trailing partial frames are dropped from each
/// part so labels stay aligned with samples.
pub fn concatenate<'a>(parts: impl IntoIterator<Item = &'a Utterance>) -> Result<Utterance> {
    let mut iter = parts.into_iter().peekable();
    let first = iter.peek().ok_or_else(|| VadError::Data("nothing to concatenate".into()))?;
    let (fs, condition) = (first.fs, first.condition());
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for u in iter {
        if u.fs != fs || u.condition() != condition {
            return Err(VadError::Data("concatenated files must share fs, noise type and SNR".into()));
        }
        samples.extend_from_slice(&u.samples[..u.frames() * u.hop()]);
        labels.extend_from_slice(&u.vad_labels);
    }
    Utterance::new(samples, fs, labels, condition.noise_type, condition.snr)
}

/// Draws `count` distinct files of `condition` and concatenates them in draw order.
pub fn concat_batch<R: Rng + ?Sized>(
    pool: &[Utterance],
    condition: Condition,
    count: usize,
    rng: &mut R,
) -> Result<Utterance> {
    let matching: Vec<&Utterance> = pool.iter().filter(|u| u.condition() == condition).collect();
    if count == 0 || matching.len() < count {
        return Err(VadError::Data(format!(
            "need {count} files for noise type {} at {} but the pool has {}",
            condition.noise_type,
            condition.snr,
            matching.len()
        )));
    }
    let picks = sample(rng, matching.len(), count);
    concatenate(picks.iter().map(|i| matching[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Snr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn file(tag: f64, frames: usize, speech: usize) -> Utterance {
        let mut labels = vec![0u8; frames];
        labels[..speech].iter_mut().for_each(|l| *l = 1);
        Utterance::new(vec![tag; frames * 80], 8000, labels, 2, Snr::Db(5.0)).unwrap()
    }

    #[test]
    fn ten_one_second_files() {
        let pool: Vec<Utterance> = (0..12).map(|i| file(i as f64, 100, 30 + i)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cond = pool[0].condition();
        let batch = concat_batch(&pool, cond, 10, &mut rng).unwrap();
        assert_eq!(batch.samples.len(), 80_000);
        assert_eq!(batch.frames(), 1000);

        // Labels are the concatenation of the drawn files in draw order.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let order = sample(&mut rng, 12, 10);
        let expected: Vec<u8> = order.iter().flat_map(|i| pool[i].vad_labels.clone()).collect();
        assert_eq!(batch.vad_labels, expected);
        let first_tag = batch.samples[0] as usize;
        assert_eq!(first_tag, order.index(0));
        let drawn: BTreeSet<usize> = order.iter().collect();
        assert_eq!(drawn.len(), 10);
    }

    #[test]
    fn count_one_is_identity() {
        let pool = vec![file(0.5, 50, 20)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(concat_batch(&pool, pool[0].condition(), 1, &mut rng).unwrap(), pool[0]);
    }

    #[test]
    fn insufficient_pool() {
        let pool = vec![file(0.5, 50, 20); 3];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(concat_batch(&pool, pool[0].condition(), 4, &mut rng), Err(VadError::Data(_))));
        let other = Condition {
            noise_type: 1,
            snr: Snr::Db(5.0),
        };
        assert!(concat_batch(&pool, other, 1, &mut rng).is_err());
    }

    #[test]
    fn speech_fraction_is_weighted_mean() {
        let parts = [file(0.0, 100, 80), file(0.0, 300, 30)];
        let joined = concatenate(parts.iter()).unwrap();
        assert!((joined.speech_fraction() - 110.0 / 400.0).abs() < 1e-15);
    }
}
