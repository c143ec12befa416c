use std::collections::BTreeSet;

use super::point::{Aabb, Point3};
use crate::error::{Error, Result};

/// A skeletal sphere: an interior point together with the radius of the
/// locally inscribed ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkeletalSphere {
    pub center: Point3,
    pub radius: f64,
}

impl SkeletalSphere {
    pub fn new(center: Point3, radius: f64) -> Result<Self> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(Error::invalid("sphere center/radius must be finite"));
        }
        if radius < 0.0 {
            return Err(Error::invalid(format!("negative sphere radius {radius}")));
        }
        Ok(Self { center, radius })
    }
}

/// The eight unit directions (±η, ±η, ±η) with 3η² = 1, in a fixed order
/// (signs enumerate as binary: +++, ++-, +-+, ...).
pub fn cube_corner_directions() -> [Point3; 8] {
    let eta = 1.0 / 3f64.sqrt();
    let mut dirs = [Point3::ORIGIN; 8];
    for (k, d) in dirs.iter_mut().enumerate() {
        let sx = if k & 4 == 0 { eta } else { -eta };
        let sy = if k & 2 == 0 { eta } else { -eta };
        let sz = if k & 1 == 0 { eta } else { -eta };
        *d = Point3::new(sx, sy, sz);
    }
    dirs
}

/// Eight surface points of `s`, one along each cube-corner direction.
pub fn sample_sphere_surface(s: &SkeletalSphere) -> [Point3; 8] {
    let mut out = [Point3::ORIGIN; 8];
    for (t, v) in out.iter_mut().zip(cube_corner_directions()) {
        *t = s.center + v * s.radius;
    }
    out
}

/// A skeletal mesh: spheres plus the edges and triangle faces connecting
/// them. Intentionally non-manifold — curve segments (edges in no face) and
/// sheets (triangles) coexist.
///
/// Canonical storage: edges are `(i, j)` with `i < j`, sorted and
/// deduplicated; faces are sorted triples, sorted and deduplicated; every
/// face's three edges are present in the edge list.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletalMesh {
    spheres: Vec<SkeletalSphere>,
    edges: Vec<(usize, usize)>,
    faces: Vec<(usize, usize, usize)>,
}

impl SkeletalMesh {
    /// Build a mesh, canonicalizing edge/face order and validating indices.
    pub fn new(
        spheres: Vec<SkeletalSphere>,
        edges: Vec<(usize, usize)>,
        faces: Vec<(usize, usize, usize)>,
    ) -> Result<Self> {
        let n = spheres.len();

        let mut edge_set = BTreeSet::new();
        for &(a, b) in &edges {
            if a == b {
                return Err(Error::invalid(format!("self-loop edge ({a}, {b})")));
            }
            if a >= n || b >= n {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            edge_set.insert((a.min(b), a.max(b)));
        }

        let mut face_set = BTreeSet::new();
        for &(a, b, c) in &faces {
            if a == b || b == c || a == c {
                return Err(Error::invalid(format!("degenerate face ({a}, {b}, {c})")));
            }
            if a >= n || b >= n || c >= n {
                return Err(Error::invalid(format!(
                    "face ({a}, {b}, {c}) out of range for {n} vertices"
                )));
            }
            let mut t = [a, b, c];
            t.sort_unstable();
            for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                if !edge_set.contains(&(u, v)) {
                    return Err(Error::invalid(format!(
                        "face ({a}, {b}, {c}) references missing edge ({u}, {v})"
                    )));
                }
            }
            face_set.insert((t[0], t[1], t[2]));
        }

        Ok(Self {
            spheres,
            edges: edge_set.into_iter().collect(),
            faces: face_set.into_iter().collect(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.spheres.len()
    }

    pub fn spheres(&self) -> &[SkeletalSphere] {
        &self.spheres
    }

    pub fn centers(&self) -> Vec<Point3> {
        self.spheres.iter().map(|s| s.center).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.spheres.iter().map(|s| s.radius).collect()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn faces(&self) -> &[(usize, usize, usize)] {
        &self.faces
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Replace all radii, keeping centers and connectivity.
    pub fn set_radii(&mut self, radii: &[f64]) -> Result<()> {
        if radii.len() != self.spheres.len() {
            return Err(Error::dims(format!(
                "{} radii for {} spheres",
                radii.len(),
                self.spheres.len()
            )));
        }
        for (s, &r) in self.spheres.iter_mut().zip(radii) {
            *s = SkeletalSphere::new(s.center, r)?;
        }
        Ok(())
    }

    /// Number of faces each edge belongs to, aligned with `edges()`.
    pub fn edge_face_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.edges.len()];
        for &(a, b, c) in &self.faces {
            for (u, v) in [(a, b), (b, c), (a, c)] {
                if let Ok(k) = self.edges.binary_search(&(u, v)) {
                    counts[k] += 1;
                }
            }
        }
        counts
    }

    /// Bounding box of the union of all spheres (centers expanded by radii).
    pub fn bounding_box(&self) -> Option<Aabb> {
        let mut it = self.spheres.iter();
        let first = it.next()?;
        let r = first.radius;
        let mut bb = Aabb {
            min: first.center - Point3::new(r, r, r),
            max: first.center + Point3::new(r, r, r),
        };
        for s in it {
            let r = s.radius;
            bb.expand(s.center - Point3::new(r, r, r));
            bb.expand(s.center + Point3::new(r, r, r));
        }
        Some(bb)
    }
}
