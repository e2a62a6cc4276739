//! Volume of a union of closed axis-parallel boxes.

use super::boxes::KBox;
use crate::error::{Error, Result};
use crate::scalar::{sort_values, Scalar};

/// Volume of the union of `boxes`, all of dimension `dim`.
///
/// One dimension is an interval union after sorting. Higher dimensions sweep
/// the last coordinate: between consecutive box boundaries the cross-section
/// is fixed, so each slab contributes its width times the measure of the
/// active boxes projected onto the remaining coordinates.
pub fn klee_measure<T: Scalar>(boxes: &[KBox<T>], dim: usize) -> Result<T> {
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    for b in boxes {
        if b.lo.len() != dim || b.hi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.lo.len().max(b.hi.len()),
            });
        }
    }
    let refs: Vec<&KBox<T>> = boxes.iter().collect();
    Ok(measure(&refs, dim))
}

fn measure<T: Scalar>(boxes: &[&KBox<T>], dim: usize) -> T {
    if boxes.is_empty() {
        return T::zero();
    }
    let axis = dim - 1;
    if dim == 1 {
        let mut spans: Vec<(&T, &T)> = boxes.iter().map(|b| (&b.lo[0], &b.hi[0])).collect();
        spans.sort_by(|a, b| a.0.cmp_value(b.0));
        let mut total = T::zero();
        let (mut lo, mut hi) = (spans[0].0.clone(), spans[0].1.clone());
        for (a, b) in spans.into_iter().skip(1) {
            if *a > hi {
                total = total + (hi - lo);
                lo = a.clone();
                hi = b.clone();
            } else if *b > hi {
                hi = b.clone();
            }
        }
        return total + (hi - lo);
    }
    let mut cuts: Vec<T> = boxes
        .iter()
        .flat_map(|b| [b.lo[axis].clone(), b.hi[axis].clone()])
        .collect();
    sort_values(&mut cuts);
    cuts.dedup();
    let mut total = T::zero();
    for slab in cuts.windows(2) {
        let width = slab[1].clone() - slab[0].clone();
        let active: Vec<&KBox<T>> = boxes
            .iter()
            .copied()
            .filter(|b| b.lo[axis] <= slab[0] && b.hi[axis] >= slab[1])
            .collect();
        if !active.is_empty() {
            total = total + width * measure(&active, axis);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(lo: &[f64], hi: &[f64]) -> KBox<f64> {
        KBox::new(lo.to_vec(), hi.to_vec()).unwrap()
    }

    #[test]
    fn overlapping_rectangles() {
        let boxes = [b(&[0.0, 0.0], &[1.0, 1.0]), b(&[0.5, 0.0], &[1.5, 1.0])];
        assert_eq!(klee_measure(&boxes, 2).unwrap(), 1.5);
    }

    #[test]
    fn single_box_is_its_volume() {
        let one = [b(&[0.0, 1.0, 2.0], &[2.0, 1.5, 5.0])];
        assert_eq!(klee_measure(&one, 3).unwrap(), 3.0);
        assert_eq!(klee_measure::<f64>(&[], 2).unwrap(), 0.0);
    }

    #[test]
    fn interval_union() {
        let boxes = [b(&[0.0], &[1.0]), b(&[2.0], &[3.0]), b(&[0.5], &[2.5]), b(&[4.0], &[4.0])];
        assert_eq!(klee_measure(&boxes, 1).unwrap(), 3.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let boxes = [b(&[0.0, 0.0], &[1.0, 1.0]), b(&[0.0], &[1.0])];
        assert_eq!(
            klee_measure(&boxes, 2),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
        assert!(KBox::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }
}
