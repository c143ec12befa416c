use super::index::for_each_nearest;
use super::point::Point3;
use crate::error::{Error, Result};

/// Normalization of the bidirectional Chamfer distance.
///
/// `Sum` adds raw directed sums (used inside the optimization losses);
/// `Mean` divides each directed sum by its set size first (used by the
/// evaluation metrics so values are comparable across point counts).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChamferMode {
    Sum,
    Mean,
}

fn directed_sum_and_max(from: &[Point3], to: &[Point3]) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for_each_nearest(from, to, |_, _, d| {
        sum += d;
        if d > max {
            max = d;
        }
    })?;
    Ok((sum, max))
}

/// Bidirectional Chamfer distance between two nonempty point sets.
pub fn chamfer_distance(a: &[Point3], b: &[Point3], mode: ChamferMode) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("chamfer_distance: empty point set"));
    }
    let (ab, _) = directed_sum_and_max(a, b)?;
    let (ba, _) = directed_sum_and_max(b, a)?;
    Ok(match mode {
        ChamferMode::Sum => ab + ba,
        ChamferMode::Mean => ab / a.len() as f64 + ba / b.len() as f64,
    })
}

/// Symmetric Hausdorff distance between two nonempty point sets.
pub fn hausdorff_distance(a: &[Point3], b: &[Point3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("hausdorff_distance: empty point set"));
    }
    let (_, ab) = directed_sum_and_max(a, b)?;
    let (_, ba) = directed_sum_and_max(b, a)?;
    Ok(ab.max(ba))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[[f64; 3]]) -> Vec<Point3> {
        v.iter().map(|&p| Point3::from_array(p)).collect()
    }

    fn brute_directed(from: &[Point3], to: &[Point3]) -> (f64, f64) {
        let mut sum = 0.0;
        let mut max = 0.0f64;
        for p in from {
            let mut m = f64::INFINITY;
            for q in to {
                m = m.min(p.distance(*q));
            }
            sum += m;
            max = max.max(m);
        }
        (sum, max)
    }

    #[test]
    fn chamfer_identity_and_hand_cases() {
        let a = pts(&[[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]]);
        assert_eq!(chamfer_distance(&a, &a, ChamferMode::Sum).unwrap(), 0.0);
        assert_eq!(chamfer_distance(&a, &a, ChamferMode::Mean).unwrap(), 0.0);

        let a = pts(&[[0.0, 0.0, 0.0]]);
        let b = pts(&[[1.0, 0.0, 0.0]]);
        assert!((chamfer_distance(&a, &b, ChamferMode::Sum).unwrap() - 2.0).abs() < 1e-15);

        let b = pts(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        // directed a->b: 1; directed b->a: 1 + 1
        assert!((chamfer_distance(&a, &b, ChamferMode::Sum).unwrap() - 3.0).abs() < 1e-15);
        // mean: 1/1 + 2/2
        assert!((chamfer_distance(&a, &b, ChamferMode::Mean).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hausdorff_hand_cases() {
        let a = pts(&[[0.0, 0.0, 0.0]]);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let b = pts(&[[1.0, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        assert!((hausdorff_distance(&a, &b).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_sets_rejected() {
        let a = pts(&[[0.0, 0.0, 0.0]]);
        assert!(chamfer_distance(&a, &[], ChamferMode::Sum).is_err());
        assert!(chamfer_distance(&[], &a, ChamferMode::Sum).is_err());
        assert!(hausdorff_distance(&a, &[]).is_err());
    }

    proptest! {
        #[test]
        fn prop_metrics_match_brute_force_and_axioms(
            av in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 1..40),
            bv in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 1..40),
        ) {
            let a: Vec<Point3> = av.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
            let b: Vec<Point3> = bv.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();

            let (sab, mab) = brute_directed(&a, &b);
            let (sba, mba) = brute_directed(&b, &a);

            let cd_sum = chamfer_distance(&a, &b, ChamferMode::Sum).unwrap();
            let cd_mean = chamfer_distance(&a, &b, ChamferMode::Mean).unwrap();
            let hd = hausdorff_distance(&a, &b).unwrap();

            prop_assert!((cd_sum - (sab + sba)).abs() < 1e-12);
            prop_assert!((cd_mean - (sab / a.len() as f64 + sba / b.len() as f64)).abs() < 1e-12);
            prop_assert!((hd - mab.max(mba)).abs() < 1e-12);

            // symmetry is exact: both orders visit the same distance values
            prop_assert_eq!(cd_sum, chamfer_distance(&b, &a, ChamferMode::Sum).unwrap());
            prop_assert_eq!(hd, hausdorff_distance(&b, &a).unwrap());

            // directed-component sanity: the max dominates the mean
            prop_assert!(hd >= cd_mean / 2.0 - 1e-12);
        }

        #[test]
        fn prop_rigid_motion_invariance(
            av in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 1..30),
            bv in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 1..30),
            angle in 0.0f64..std::f64::consts::TAU,
            t in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0),
        ) {
            let rot = |p: Point3| {
                let (s, c) = angle.sin_cos();
                Point3::new(
                    c * p.x - s * p.y + t.0,
                    s * p.x + c * p.y + t.1,
                    p.z + t.2,
                )
            };
            let a: Vec<Point3> = av.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
            let b: Vec<Point3> = bv.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
            let ar: Vec<Point3> = a.iter().map(|&p| rot(p)).collect();
            let br: Vec<Point3> = b.iter().map(|&p| rot(p)).collect();

            let cd = chamfer_distance(&a, &b, ChamferMode::Mean).unwrap();
            let cdr = chamfer_distance(&ar, &br, ChamferMode::Mean).unwrap();
            let scale = cd.abs().max(1.0);
            prop_assert!((cd - cdr).abs() / scale < 1e-9);

            let hd = hausdorff_distance(&a, &b).unwrap();
            let hdr = hausdorff_distance(&ar, &br).unwrap();
            let scale = hd.abs().max(1.0);
            prop_assert!((hd - hdr).abs() / scale < 1e-9);
        }
    }
}
