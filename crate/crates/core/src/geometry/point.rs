use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// A point (or vector) in 3D, f64 throughout.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    #[inline]
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance_squared(self, other: Point3) -> f64 {
        (self - other).norm_squared()
    }

    #[inline]
    pub fn distance(self, other: Point3) -> f64 {
        self.distance_squared(other).sqrt()
    }

    /// Unit vector in the same direction, or None for a (near-)zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        if n > 0.0 {
            Some(self / n)
        } else {
            None
        }
    }

    #[inline]
    pub fn lerp(self, other: Point3, t: f64) -> Point3 {
        self * (1.0 - t) + other * t
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl Add for Point3 {
    type Output = Point3;
    #[inline]
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Point3 {
    #[inline]
    fn add_assign(&mut self, o: Point3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Point3 {
    type Output = Point3;
    #[inline]
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    #[inline]
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    #[inline]
    fn div(self, s: f64) -> Point3 {
        Point3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    #[inline]
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    /// Bounding box of a nonempty point slice.
    pub fn from_points(points: &[Point3]) -> Option<Aabb> {
        let first = *points.first()?;
        let mut bb = Aabb {
            min: first,
            max: first,
        };
        for &p in &points[1..] {
            bb.expand(p);
        }
        Some(bb)
    }

    pub fn expand(&mut self, p: Point3) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.min.z = self.min.z.min(p.z);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
        self.max.z = self.max.z.max(p.z);
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    /// True if `p` lies inside, with a symmetric slack on every face.
    pub fn contains_with_tolerance(&self, p: Point3, tol: f64) -> bool {
        p.x >= self.min.x - tol
            && p.x <= self.max.x + tol
            && p.y >= self.min.y - tol
            && p.y <= self.max.y + tol
            && p.z >= self.min.z - tol
            && p.z <= self.max.z + tol
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point3, a: Point3, b: Point3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Distance from `p` to the triangle `(a, b, c)`, degenerate triangles included.
///
/// Region-based closest-point computation: project onto the triangle plane and
/// classify against the edge Voronoi regions.
pub fn point_triangle_distance(p: Point3, a: Point3, b: Point3, c: Point3) -> f64 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;

    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return p.distance(a);
    }

    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return p.distance(b);
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let denom = d1 - d3;
        if denom > 0.0 {
            let t = d1 / denom;
            return p.distance(a + ab * t);
        }
        return p.distance(a);
    }

    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return p.distance(c);
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let denom = d2 - d6;
        if denom > 0.0 {
            let t = d2 / denom;
            return p.distance(a + ac * t);
        }
        return p.distance(a);
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let denom = (d4 - d3) + (d5 - d6);
        if denom > 0.0 {
            let t = (d4 - d3) / denom;
            return p.distance(b + (c - b) * t);
        }
        return p.distance(b);
    }

    let denom = va + vb + vc;
    if denom.abs() <= f64::MIN_POSITIVE {
        // Degenerate (collinear) triangle: fall back to the nearest edge.
        return point_segment_distance(p, a, b)
            .min(point_segment_distance(p, b, c))
            .min(point_segment_distance(p, a, c));
    }
    let v = vb / denom;
    let w = vc / denom;
    p.distance(a + ab * v + ac * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_basics() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(2.0, 0.0, 0.0);
        assert_eq!(point_segment_distance(Point3::new(1.0, 1.0, 0.0), a, b), 1.0);
        assert_eq!(point_segment_distance(Point3::new(-1.0, 0.0, 0.0), a, b), 1.0);
        assert_eq!(point_segment_distance(Point3::new(3.0, 0.0, 0.0), a, b), 1.0);
        // zero-length segment
        assert_eq!(
            point_segment_distance(Point3::new(0.0, 2.0, 0.0), a, a),
            2.0
        );
    }

    #[test]
    fn triangle_distance_regions() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1.0, 0.0, 0.0);
        let c = Point3::new(0.0, 1.0, 0.0);
        // above the interior
        assert!((point_triangle_distance(Point3::new(0.2, 0.2, 0.5), a, b, c) - 0.5).abs() < 1e-12);
        // vertex region
        assert!(
            (point_triangle_distance(Point3::new(-1.0, -1.0, 0.0), a, b, c) - 2f64.sqrt()).abs()
                < 1e-12
        );
        // edge region (beyond the ab edge)
        assert!((point_triangle_distance(Point3::new(0.5, -1.0, 0.0), a, b, c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_distance_matches_dense_sampling() {
        // Independent check: minimum distance over a fine barycentric lattice.
        let a = Point3::new(0.3, -0.2, 0.1);
        let b = Point3::new(1.4, 0.8, -0.5);
        let c = Point3::new(-0.6, 1.1, 0.9);
        let queries = [
            Point3::new(0.0, 0.0, 2.0),
            Point3::new(2.0, 2.0, 0.0),
            Point3::new(-1.0, 0.5, 0.0),
            Point3::new(0.4, 0.5, 0.1),
        ];
        let n = 400usize;
        for q in queries {
            let fast = point_triangle_distance(q, a, b, c);
            let mut sampled = f64::INFINITY;
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let u = i as f64 / n as f64;
                    let v = j as f64 / n as f64;
                    let w = 1.0 - u - v;
                    let x = a * u + b * v + c * w;
                    sampled = sampled.min(q.distance(x));
                }
            }
            // the lattice minimum is an upper bound on the true distance
            assert!(fast <= sampled + 1e-12);
            assert!(sampled - fast < 2e-2, "fast {fast} vs sampled {sampled}");
        }
    }

    #[test]
    fn degenerate_triangle_falls_back_to_edges() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1.0, 0.0, 0.0);
        let c = Point3::new(2.0, 0.0, 0.0); // collinear
        let q = Point3::new(1.0, 1.0, 0.0);
        assert!((point_triangle_distance(q, a, b, c) - 1.0).abs() < 1e-12);
    }
}
