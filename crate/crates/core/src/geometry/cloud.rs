use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::point::{Aabb, Point3};
use crate::error::{Error, Result};

/// An unordered set of surface samples.
///
/// Coordinates are validated finite on construction. Size constraints are
/// contextual: the skeletonization pipeline rejects clouds smaller than 4
/// points, but the geometric operations accept any nonempty set.
#[derive(Clone, Debug)]
pub struct PointCloud {
    points: Vec<Point3>,
    source: Option<String>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        Ok(Self {
            points,
            source: None,
        })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounding_box(&self) -> Option<Aabb> {
        Aabb::from_points(&self.points)
    }

    /// New cloud holding the points at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<PointCloud> {
        let mut points = Vec::with_capacity(indices.len());
        for &i in indices {
            let p = self
                .points
                .get(i)
                .ok_or_else(|| Error::invalid(format!("subset index {i} out of range")))?;
            points.push(*p);
        }
        PointCloud::new(points)
    }
}

/// Greedy farthest point sampling.
///
/// The first pick is drawn uniformly from the cloud using `seed`; every
/// subsequent pick maximizes the minimum distance to the points already
/// chosen, breaking ties toward the lowest index. Returns the chosen indices
/// in pick order.
pub fn farthest_point_sample(cloud: &PointCloud, count: usize, seed: u64) -> Result<Vec<usize>> {
    let n = cloud.len();
    if count > n {
        return Err(Error::invalid(format!(
            "requested {count} samples from a cloud of {n} points"
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }

    let points = cloud.points();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let first = rng.random_range(0..n);

    let mut picked = Vec::with_capacity(count);
    picked.push(first);

    // min squared distance from each point to the picked set
    let mut min_d2: Vec<f64> = points
        .iter()
        .map(|p| p.distance_squared(points[first]))
        .collect();

    while picked.len() < count {
        let mut best = 0usize;
        let mut best_d2 = f64::NEG_INFINITY;
        for (i, &d2) in min_d2.iter().enumerate() {
            if d2 > best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        picked.push(best);
        let bp = points[best];
        for (i, d2) in min_d2.iter_mut().enumerate() {
            let nd = points[i].distance_squared(bp);
            if nd < *d2 {
                *d2 = nd;
            }
        }
    }
    Ok(picked)
}
