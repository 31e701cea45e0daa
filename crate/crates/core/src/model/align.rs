use crate::error::{Result, VadError};

/// Trims per-10 ms labels to `num_frames`, dropping half the surplus at each
/// end. An odd surplus loses its extra frame at the end.
pub fn frame_label_alignment<T: Clone>(num_frames: usize, labels: &[T]) -> Result<Vec<T>> {
    if num_frames > labels.len() {
        return Err(VadError::Alignment(format!(
            "{num_frames} network frames but only {} labels",
            labels.len()
        )));
    }
    let surplus = labels.len() - num_frames;
    let front = surplus / 2;
    Ok(labels[front..front + num_frames].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_odd_trims() {
        let labels: Vec<usize> = (0..100).collect();
        let even = frame_label_alignment(96, &labels).unwrap();
        assert_eq!(even.first(), Some(&2));
        assert_eq!(even.last(), Some(&97));
        let odd = frame_label_alignment(95, &labels).unwrap();
        assert_eq!(odd.first(), Some(&2));
        assert_eq!(odd.last(), Some(&96));
        assert_eq!(frame_label_alignment(100, &labels).unwrap(), labels);
        assert!(frame_label_alignment(101, &labels).is_err());
    }
}
