use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use super::point::{Aabb, Point3};
use crate::error::{Error, Result};

/// Multiplicative mixer for grid-cell keys; the default SipHash shows up in
/// profiles because cell lookups sit on the optimizer's hot path.
#[derive(Default)]
pub struct CellHasher(u64);

impl Hasher for CellHasher {
    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            let v = u64::from_le_bytes(buf);
            let mut x = self.0 ^ v.wrapping_mul(0x9e37_79b9_7f4a_7c15);
            x ^= x >> 30;
            x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
            x ^= x >> 27;
            self.0 = x;
        }
    }

    fn finish(&self) -> u64 {
        let mut x = self.0;
        x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^= x >> 31;
        x
    }
}

type CellMap = HashMap<[i64; 3], Vec<u32>, BuildHasherDefault<CellHasher>>;

/// Exact nearest neighbor by linear scan; ties break toward the lowest index.
pub fn nearest_neighbor(query: Point3, target: &[Point3]) -> Result<(usize, f64)> {
    if target.is_empty() {
        return Err(Error::invalid("nearest_neighbor: empty target set"));
    }
    let mut best = 0usize;
    let mut best_d2 = query.distance_squared(target[0]);
    for (i, p) in target.iter().enumerate().skip(1) {
        let d2 = query.distance_squared(*p);
        if d2 < best_d2 {
            best_d2 = d2;
            best = i;
        }
    }
    Ok((best, best_d2.sqrt()))
}

/// Uniform-grid spatial index over an immutable point set.
///
/// Exact: queries return the same (index, distance) pair as a linear scan,
/// including the lowest-index tie rule. Build once, query from any thread.
pub struct NeighborGrid {
    points: Vec<Point3>,
    origin: Point3,
    cell: f64,
    cells: CellMap,
    lo: [i64; 3],
    hi: [i64; 3],
}

impl NeighborGrid {
    pub fn build(points: &[Point3]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("NeighborGrid: empty point set"));
        }
        let bb = Aabb::from_points(points).unwrap();
        let diag = bb.diagonal();
        let mut cell = diag / (points.len() as f64).cbrt();
        if !cell.is_finite() || cell <= 0.0 {
            cell = 1.0; // all points coincide; a single cell suffices
        }

        let origin = bb.min;
        let mut grid = Self {
            points: points.to_vec(),
            origin,
            cell,
            cells: CellMap::default(),
            lo: [i64::MAX; 3],
            hi: [i64::MIN; 3],
        };
        for (i, p) in points.iter().enumerate() {
            let key = grid.cell_of(*p);
            for a in 0..3 {
                grid.lo[a] = grid.lo[a].min(key[a]);
                grid.hi[a] = grid.hi[a].max(key[a]);
            }
            grid.cells.entry(key).or_default().push(i as u32);
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    fn cell_of(&self, p: Point3) -> [i64; 3] {
        [
            ((p.x - self.origin.x) / self.cell).floor() as i64,
            ((p.y - self.origin.y) / self.cell).floor() as i64,
            ((p.z - self.origin.z) / self.cell).floor() as i64,
        ]
    }

    /// Index and distance of the nearest stored point.
    pub fn nearest(&self, query: Point3) -> (usize, f64) {
        let qc = self.cell_of(query);

        // furthest ring that can contain any occupied cell
        let mut max_ring = 0i64;
        for a in 0..3 {
            max_ring = max_ring.max((qc[a] - self.lo[a]).abs());
            max_ring = max_ring.max((qc[a] - self.hi[a]).abs());
        }

        let mut best: Option<(u32, f64)> = None;
        let mut ring = 0i64;
        loop {
            // every point in ring k lies at distance >= (k-1) * cell from the
            // query, so once that bound strictly exceeds the best distance no
            // later ring can win or tie
            if let Some((_, d2)) = best {
                let floor = (ring - 1).max(0) as f64 * self.cell;
                if floor * floor > d2 {
                    break;
                }
            }
            if ring > max_ring {
                break;
            }
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        let key = [qc[0] + dx, qc[1] + dy, qc[2] + dz];
                        let Some(bucket) = self.cells.get(&key) else {
                            continue;
                        };
                        for &i in bucket {
                            let d2 = query.distance_squared(self.points[i as usize]);
                            let better = match best {
                                None => true,
                                Some((bi, bd2)) => d2 < bd2 || (d2 == bd2 && i < bi),
                            };
                            if better {
                                best = Some((i, d2));
                            }
                        }
                    }
                }
            }
            ring += 1;
        }

        let (i, d2) = best.expect("grid holds at least one point");
        (i as usize, d2.sqrt())
    }
}

/// Calls `visit(from_index, nearest_target_index, distance)` for every point
/// of `from`, using a grid for large target sets and a scan otherwise.
pub(crate) fn for_each_nearest(
    from: &[Point3],
    to: &[Point3],
    mut visit: impl FnMut(usize, usize, f64),
) -> Result<()> {
    if to.is_empty() {
        return Err(Error::invalid("nearest-neighbor query against an empty set"));
    }
    const GRID_THRESHOLD: usize = 48;
    if to.len() >= GRID_THRESHOLD && from.len() >= 8 {
        let grid = NeighborGrid::build(to)?;
        for (qi, q) in from.iter().enumerate() {
            let (ti, d) = grid.nearest(*q);
            visit(qi, ti, d);
        }
    } else {
        for (qi, q) in from.iter().enumerate() {
            let (ti, d) = nearest_neighbor(*q, to)?;
            visit(qi, ti, d);
        }
    }
    Ok(())
}
