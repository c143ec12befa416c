//! Geometric foundations: points, clouds, skeletal spheres and meshes,
//! exact nearest-neighbor queries, and point-set distances.

mod cloud;
mod index;
mod metrics;
mod point;
mod skeletal;

pub use cloud::{farthest_point_sample, PointCloud};
pub use index::{nearest_neighbor, NeighborGrid};
pub(crate) use index::for_each_nearest;
pub use metrics::{chamfer_distance, hausdorff_distance, ChamferMode};
pub use point::{point_segment_distance, point_triangle_distance, Aabb, Point3};
pub use skeletal::{cube_corner_directions, sample_sphere_surface, SkeletalMesh, SkeletalSphere};
