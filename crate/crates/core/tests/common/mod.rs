//! Shared analytic shape samplers for integration tests. All samplers are
//! seeded and draw points uniformly by surface area.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use skelmesh::geometry::{Point3, PointCloud};
use std::f64::consts::TAU;

pub fn unit_sphere_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let pts = (0..n).map(|_| random_unit(&mut rng)).collect();
    PointCloud::new(pts).unwrap()
}

fn random_unit(rng: &mut ChaCha20Rng) -> Point3 {
    loop {
        let p = Point3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n2 = p.norm_squared();
        if n2 > 1e-6 && n2 <= 1.0 {
            return p / n2.sqrt();
        }
    }
}

/// Capsule around the x-axis segment [axis_a, axis_b] with the given radius.
pub struct Capsule {
    pub a: Point3,
    pub b: Point3,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Point3, b: Point3, radius: f64) -> Self {
        Self { a, b, radius }
    }

    /// Distance from `p` to the capsule surface.
    pub fn surface_distance(&self, p: Point3) -> f64 {
        (skelmesh::geometry::point_segment_distance(p, self.a, self.b) - self.radius).abs()
    }

    /// Area-uniform surface samples: cylinder barrel plus two hemispherical
    /// caps, weighted by area.
    pub fn sample_surface(&self, n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let len = (self.b - self.a).norm();
        let axis = (self.b - self.a) / len;
        // any frame orthogonal to the axis
        let helper = if axis.x.abs() < 0.9 {
            Point3::new(1.0, 0.0, 0.0)
        } else {
            Point3::new(0.0, 1.0, 0.0)
        };
        let u = axis.cross(helper).normalized().unwrap();
        let v = axis.cross(u);

        let barrel_area = TAU * self.radius * len;
        let caps_area = 2.0 * TAU * self.radius * self.radius; // 4πr²
        let total = barrel_area + caps_area;

        let pts = (0..n)
            .map(|_| {
                if rng.random_range(0.0..total) < barrel_area {
                    let t = rng.random_range(0.0..1.0);
                    let phi = rng.random_range(0.0..TAU);
                    let ring = u * phi.cos() + v * phi.sin();
                    self.a + (self.b - self.a) * t + ring * self.radius
                } else {
                    let dir = random_unit(&mut rng);
                    if dir.dot(axis) >= 0.0 {
                        self.b + dir * self.radius
                    } else {
                        self.a + dir * self.radius
                    }
                }
            })
            .collect();
        PointCloud::new(pts).unwrap()
    }
}

/// Torus around the z-axis: ring radius `major`, tube radius `minor`.
pub fn torus_cloud(major: f64, minor: f64, n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let u = rng.random_range(0.0..TAU);
        let v = rng.random_range(0.0..TAU);
        // area element is proportional to (major + minor cos v)
        let accept = (major + minor * v.cos()) / (major + minor);
        if rng.random_range(0.0..1.0) > accept {
            continue;
        }
        let ring = major + minor * v.cos();
        pts.push(Point3::new(
            ring * u.cos(),
            ring * u.sin(),
            minor * v.sin(),
        ));
    }
    PointCloud::new(pts).unwrap()
}

/// Axis-aligned box surface centered at the origin, area-uniform samples.
pub fn box_cloud(size: [f64; 3], n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let [sx, sy, sz] = size;
    let areas = [sy * sz, sy * sz, sx * sz, sx * sz, sx * sy, sx * sy];
    let total: f64 = areas.iter().sum();
    let pts = (0..n)
        .map(|_| {
            let mut pick = rng.random_range(0.0..total);
            let mut face = 0;
            for (i, a) in areas.iter().enumerate() {
                if pick < *a {
                    face = i;
                    break;
                }
                pick -= a;
            }
            let r1 = rng.random_range(-0.5..0.5);
            let r2 = rng.random_range(-0.5..0.5);
            match face {
                0 => Point3::new(-sx / 2.0, r1 * sy, r2 * sz),
                1 => Point3::new(sx / 2.0, r1 * sy, r2 * sz),
                2 => Point3::new(r1 * sx, -sy / 2.0, r2 * sz),
                3 => Point3::new(r1 * sx, sy / 2.0, r2 * sz),
                4 => Point3::new(r1 * sx, r2 * sy, -sz / 2.0),
                _ => Point3::new(r1 * sx, r2 * sy, sz / 2.0),
            }
        })
        .collect();
    PointCloud::new(pts).unwrap()
}

/// Dense area-uniform samples of a capsule surface, for use as a reference
/// set in Chamfer comparisons.
pub fn capsule_reference(c: &Capsule, n: usize, seed: u64) -> PointCloud {
    c.sample_surface(n, seed)
}
