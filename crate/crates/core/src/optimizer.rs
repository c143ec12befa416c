//! Skeletal sphere prediction by direct per-shape optimization.
//!
//! A logit matrix over (sampled input point, skeletal point) pairs is pushed
//! through a per-column softmax to produce convex-combination weights; the
//! weights map the sampled points to skeletal centers and their closest
//! distances to radii. Three losses drive the fit — a Chamfer term between
//! sphere-surface samples and the input cloud, a point-to-sphere residual
//! term, and a radius reward — and Adam descends their analytic gradient.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    cube_corner_directions, for_each_nearest, sample_sphere_surface, Aabb, NeighborGrid,
    Point3, PointCloud, SkeletalSphere,
};
use crate::geometry::farthest_point_sample;

/// How the point-to-sphere residuals enter the loss.
///
/// `Signed` keeps raw (possibly negative) residuals; `Squared` squares each
/// residual, which removes the reward for over-inflated radii.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResidualMode {
    #[default]
    Signed,
    Squared,
}

#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    /// Number of skeletal spheres (N).
    pub skeletal_count: usize,
    /// Working-set size K' drawn by farthest point sampling.
    pub downsample_count: usize,
    /// Weight of the point-to-sphere loss.
    pub lambda1: f64,
    /// Weight of the radius regularizer.
    pub lambda2: f64,
    /// Warm-up iterations minimizing only the Chamfer distance between
    /// skeletal points and the cloud (spreads the points over the shape).
    pub pretrain_iters: usize,
    /// Iterations on the full loss.
    pub main_iters: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    pub residual_mode: ResidualMode,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            skeletal_count: 100,
            downsample_count: 512,
            lambda1: 0.3,
            lambda2: 0.4,
            pretrain_iters: 500,
            main_iters: 1500,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            residual_mode: ResidualMode::Signed,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.skeletal_count < 2 {
            return Err(Error::invalid("skeletal_count must be at least 2"));
        }
        if self.downsample_count < self.skeletal_count {
            return Err(Error::invalid(format!(
                "downsample_count ({}) must be at least skeletal_count ({})",
                self.downsample_count, self.skeletal_count
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("adam_epsilon", self.adam_epsilon),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Unconstrained parameters, shape K'×N; rows index sampled input points,
/// columns index skeletal points.
#[derive(Clone, Debug)]
pub struct WeightLogits(Array2<f64>);

impl WeightLogits {
    pub fn new(m: Array2<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("logits must be finite"));
        }
        Ok(Self(m))
    }

    /// Seeded init: i.i.d. uniform on (-scale, scale). A near-zero start
    /// makes the weights near-uniform, so every skeletal point begins near
    /// the centroid of the sampled cloud.
    pub fn init(rows: usize, cols: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Self(Array2::from_shape_fn((rows, cols), |_| {
            rng.random_range(-scale..scale)
        }))
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn as_array_mut(&mut self) -> &mut Array2<f64> {
        &mut self.0
    }
}

/// Column-stochastic convex-combination weights, shape K'×N.
#[derive(Clone, Debug)]
pub struct WeightMatrix(Array2<f64>);

impl WeightMatrix {
    /// Validates entries in [0, 1] and column sums within 1e-6 of 1.
    pub fn new(m: Array2<f64>) -> Result<Self> {
        if m.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::invalid("weights must lie in [0, 1]"));
        }
        for (j, col) in m.columns().into_iter().enumerate() {
            let s: f64 = col.sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!(
                    "column {j} sums to {s}, not 1"
                )));
            }
        }
        Ok(Self(m))
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }
}

/// Per-column numerically stable softmax over the row (sampled-point) axis.
pub fn softmax_weights(logits: &WeightLogits) -> WeightMatrix {
    let src = logits.as_array();
    let mut out = src.clone();
    for mut col in out.columns_mut() {
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in col.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in col.iter_mut() {
            *v /= sum;
        }
    }
    WeightMatrix(out)
}

/// Skeletal centers as convex combinations of the sampled points.
pub fn skeletal_points(w: &WeightMatrix, sampled: &PointCloud) -> Result<Vec<Point3>> {
    if w.rows() != sampled.len() {
        return Err(Error::dims(format!(
            "weight matrix has {} rows but the sampled cloud has {} points",
            w.rows(),
            sampled.len()
        )));
    }
    let pts = sampled.points();
    let m = w.as_array();
    let mut centers = vec![Point3::ORIGIN; w.cols()];
    for (c, col) in centers.iter_mut().zip(m.columns()) {
        let mut acc = Point3::ORIGIN;
        for (&wij, &p) in col.iter().zip(pts) {
            acc += p * wij;
        }
        *c = acc;
    }
    Ok(centers)
}

/// Distance from each sampled point to its nearest skeletal center.
pub fn closest_distances(sampled: &PointCloud, centers: &[Point3]) -> Result<Vec<f64>> {
    if centers.is_empty() {
        return Err(Error::invalid("closest_distances: empty center set"));
    }
    let mut d = vec![0.0; sampled.len()];
    for_each_nearest(sampled.points(), centers, |i, _, dist| d[i] = dist)?;
    Ok(d)
}

/// Radii as the same convex combinations applied to the closest distances.
pub fn radii(w: &WeightMatrix, distances: &[f64]) -> Result<Vec<f64>> {
    if w.rows() != distances.len() {
        return Err(Error::dims(format!(
            "weight matrix has {} rows but {} distances were given",
            w.rows(),
            distances.len()
        )));
    }
    let m = w.as_array();
    Ok(m.columns()
        .into_iter()
        .map(|col| col.iter().zip(distances).map(|(&w, &d)| w * d).sum())
        .collect())
}

/// Sum-form Chamfer distance between the 8 surface samples of every sphere
/// and the input cloud.
pub fn sampling_loss(spheres: &[SkeletalSphere], cloud: &PointCloud) -> Result<f64> {
    if spheres.is_empty() {
        return Err(Error::invalid("sampling_loss: no spheres"));
    }
    let mut samples = Vec::with_capacity(spheres.len() * 8);
    for s in spheres {
        samples.extend(sample_sphere_surface(s));
    }
    crate::geometry::chamfer_distance(
        &samples,
        cloud.points(),
        crate::geometry::ChamferMode::Sum,
    )
}

/// Bidirectional point-to-sphere residual loss.
pub fn point_to_sphere_loss(
    cloud: &PointCloud,
    centers: &[Point3],
    radii: &[f64],
    mode: ResidualMode,
) -> Result<f64> {
    if centers.len() != radii.len() {
        return Err(Error::dims(format!(
            "{} centers, {} radii",
            centers.len(),
            radii.len()
        )));
    }
    if cloud.is_empty() {
        return Err(Error::invalid("point_to_sphere_loss: empty cloud"));
    }
    let shape = |r: f64| match mode {
        ResidualMode::Signed => r,
        ResidualMode::Squared => r * r,
    };
    let mut loss = 0.0;
    for_each_nearest(cloud.points(), centers, |_, j, d| {
        loss += shape(d - radii[j]);
    })?;
    for_each_nearest(centers, cloud.points(), |j, _, d| {
        loss += shape(d - radii[j]);
    })?;
    Ok(loss)
}

/// Negative sum of radii; rewards larger inscribed spheres.
pub fn radius_regularizer(radii: &[f64]) -> f64 {
    -radii.iter().sum::<f64>()
}

/// The three loss terms and their weighted total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown {
    pub sampling: f64,
    pub point_to_sphere: f64,
    pub radius: f64,
    pub total: f64,
}

/// Which phase of `optimize` produced a history record. Pretrain records
/// carry the center-to-cloud Chamfer loss in `sampling` with the other
/// terms zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Pretrain,
    Main,
}

#[derive(Clone, Copy, Debug)]
pub struct LossRecord {
    pub phase: Phase,
    pub breakdown: LossBreakdown,
}

/// Everything `optimize` produces: the final weights, spheres, the sampled
/// working set (with its indices into the input cloud), and the loss history.
#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub weights: WeightMatrix,
    pub spheres: Vec<SkeletalSphere>,
    pub sampled_indices: Vec<usize>,
    pub sampled: PointCloud,
    pub history: Vec<LossRecord>,
}

// ---------------------------------------------------------------------------
// forward/backward machinery

struct Forward {
    w: Array2<f64>,
    centers: Vec<Point3>,
    dvec: Vec<f64>,
    sampled_to_center: Vec<usize>,
    radii: Vec<f64>,
    samples: Vec<Point3>,
    cloud_to_sample: Vec<usize>,
    sample_to_cloud: Vec<usize>,
    cloud_to_center: Vec<usize>,
    center_to_cloud: Vec<usize>,
    breakdown: LossBreakdown,
}

fn centers_from_weights(w: &Array2<f64>, sampled: &[Point3]) -> Vec<Point3> {
    let mut centers = vec![Point3::ORIGIN; w.ncols()];
    for (c, col) in centers.iter_mut().zip(w.columns()) {
        let mut acc = Point3::ORIGIN;
        for (&wij, &p) in col.iter().zip(sampled) {
            acc += p * wij;
        }
        *c = acc;
    }
    centers
}

fn nearest_each(from: &[Point3], to: &[Point3]) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut idx = vec![0usize; from.len()];
    let mut dist = vec![0.0; from.len()];
    for_each_nearest(from, to, |i, j, d| {
        idx[i] = j;
        dist[i] = d;
    })?;
    Ok((idx, dist))
}

fn nearest_each_grid(from: &[Point3], grid: &NeighborGrid) -> (Vec<usize>, Vec<f64>) {
    let mut idx = vec![0usize; from.len()];
    let mut dist = vec![0.0; from.len()];
    for (i, p) in from.iter().enumerate() {
        let (j, d) = grid.nearest(*p);
        idx[i] = j;
        dist[i] = d;
    }
    (idx, dist)
}

fn forward(
    logits: &WeightLogits,
    cloud: &[Point3],
    cloud_grid: Option<&NeighborGrid>,
    sampled: &[Point3],
    config: &OptimizerConfig,
) -> Result<Forward> {
    if logits.as_array().nrows() != sampled.len() {
        return Err(Error::dims(format!(
            "logit matrix has {} rows but the sampled cloud has {} points",
            logits.as_array().nrows(),
            sampled.len()
        )));
    }
    let w = softmax_weights(logits).0;
    let centers = centers_from_weights(&w, sampled);

    let (sampled_to_center, dvec) = nearest_each(sampled, &centers)?;
    let r: Vec<f64> = w
        .columns()
        .into_iter()
        .map(|col| col.iter().zip(&dvec).map(|(&w, &d)| w * d).sum())
        .collect();

    let dirs = cube_corner_directions();
    let mut samples = Vec::with_capacity(centers.len() * 8);
    for (c, rad) in centers.iter().zip(&r) {
        for v in dirs {
            samples.push(*c + v * *rad);
        }
    }

    let (cloud_to_sample, d_cs) = nearest_each(cloud, &samples)?;
    let (sample_to_cloud, d_sc) = match cloud_grid {
        Some(g) => nearest_each_grid(&samples, g),
        None => nearest_each(&samples, cloud)?,
    };
    // Each directed term is normalized by its own cardinality. Summed terms
    // would let the cloud-sized sums swamp the radius reward and the
    // per-sphere inscription terms by orders of magnitude, and the balance
    // weights are calibrated for per-point scale.
    let inv_k = 1.0 / cloud.len() as f64;
    let inv_s = 1.0 / samples.len() as f64;
    let inv_n = 1.0 / centers.len() as f64;
    let sampling: f64 =
        d_cs.iter().sum::<f64>() * inv_k + d_sc.iter().sum::<f64>() * inv_s;

    let (cloud_to_center, d_cc) = nearest_each(cloud, &centers)?;
    let (center_to_cloud, d_ccl) = match cloud_grid {
        Some(g) => nearest_each_grid(&centers, g),
        None => nearest_each(&centers, cloud)?,
    };
    let shape = |x: f64| match config.residual_mode {
        ResidualMode::Signed => x,
        ResidualMode::Squared => x * x,
    };
    let mut p2s = 0.0;
    for (i, &j) in cloud_to_center.iter().enumerate() {
        p2s += shape(d_cc[i] - r[j]) * inv_k;
    }
    for (j, &d) in d_ccl.iter().enumerate() {
        p2s += shape(d - r[j]) * inv_n;
    }

    let reg = -r.iter().sum::<f64>() * inv_n;
    let total = sampling + config.lambda1 * p2s + config.lambda2 * reg;

    Ok(Forward {
        w,
        centers,
        dvec,
        sampled_to_center,
        radii: r,
        samples,
        cloud_to_sample,
        sample_to_cloud,
        cloud_to_center,
        center_to_cloud,
        breakdown: LossBreakdown {
            sampling,
            point_to_sphere: p2s,
            radius: reg,
            total,
        },
    })
}

/// Push center/radius cotangents back to the logits through the weight
/// matrix and the per-column softmax.
fn backprop_to_logits(
    w: &Array2<f64>,
    sampled: &[Point3],
    dvec: &[f64],
    g_c: &[Point3],
    g_r: &[f64],
) -> Array2<f64> {
    let (kp, n) = w.dim();
    let mut g_w = Array2::<f64>::zeros((kp, n));
    for i in 0..kp {
        let p = sampled[i];
        let di = dvec[i];
        for j in 0..n {
            g_w[[i, j]] = p.dot(g_c[j]) + di * g_r[j];
        }
    }
    // softmax Jacobian, column by column
    let mut g_theta = Array2::<f64>::zeros((kp, n));
    for j in 0..n {
        let mut inner = 0.0;
        for i in 0..kp {
            inner += w[[i, j]] * g_w[[i, j]];
        }
        for i in 0..kp {
            g_theta[[i, j]] = w[[i, j]] * (g_w[[i, j]] - inner);
        }
    }
    g_theta
}

fn gradient_from_forward(
    fwd: &Forward,
    cloud: &[Point3],
    sampled: &[Point3],
    config: &OptimizerConfig,
) -> Array2<f64> {
    let n = fwd.centers.len();
    let dirs = cube_corner_directions();
    let mut g_c = vec![Point3::ORIGIN; n];
    let mut g_r = vec![0.0; n];

    let inv_k = 1.0 / cloud.len() as f64;
    let inv_s = 1.0 / fwd.samples.len() as f64;
    let inv_n = 1.0 / n as f64;

    // sampling loss, cloud -> nearest sphere sample
    for (pi, &si) in fwd.cloud_to_sample.iter().enumerate() {
        let t = fwd.samples[si];
        let p = cloud[pi];
        let d = t.distance(p);
        if d > 0.0 {
            let u = (t - p) / d * inv_k;
            let j = si / 8;
            g_c[j] += u;
            g_r[j] += u.dot(dirs[si % 8]);
        }
    }
    // sampling loss, sphere sample -> nearest cloud point
    for (si, &pi) in fwd.sample_to_cloud.iter().enumerate() {
        let t = fwd.samples[si];
        let p = cloud[pi];
        let d = t.distance(p);
        if d > 0.0 {
            let u = (t - p) / d * inv_s;
            let j = si / 8;
            g_c[j] += u;
            g_r[j] += u.dot(dirs[si % 8]);
        }
    }

    // point-to-sphere residuals, both directions
    let l1 = config.lambda1;
    let chain = |res: f64| match config.residual_mode {
        ResidualMode::Signed => l1,
        ResidualMode::Squared => l1 * 2.0 * res,
    };
    for (pi, &j) in fwd.cloud_to_center.iter().enumerate() {
        let c = fwd.centers[j];
        let p = cloud[pi];
        let d = c.distance(p);
        let s = chain(d - fwd.radii[j]) * inv_k;
        if d > 0.0 {
            g_c[j] += (c - p) / d * s;
        }
        g_r[j] -= s;
    }
    for (j, &pi) in fwd.center_to_cloud.iter().enumerate() {
        let c = fwd.centers[j];
        let p = cloud[pi];
        let d = c.distance(p);
        let s = chain(d - fwd.radii[j]) * inv_n;
        if d > 0.0 {
            g_c[j] += (c - p) / d * s;
        }
        g_r[j] -= s;
    }

    // radius regularizer
    for g in g_r.iter_mut() {
        *g -= config.lambda2 * inv_n;
    }

    // radii feed back into the centers: R = WᵀD with D[i] the distance from
    // sampled point i to its (frozen) nearest center, so every radius
    // cotangent pushes that center along the closest-distance direction
    for (i, &j) in fwd.sampled_to_center.iter().enumerate() {
        let d = fwd.dvec[i];
        if d > 0.0 {
            let g_d: f64 = (0..n).map(|jj| fwd.w[[i, jj]] * g_r[jj]).sum();
            g_c[j] += (fwd.centers[j] - sampled[i]) / d * g_d;
        }
    }

    backprop_to_logits(&fwd.w, sampled, &fwd.dvec, &g_c, &g_r)
}

/// Composite loss at `logits`: sampling + λ1·point-to-sphere + λ2·radius,
/// with every directed term normalized by its own point count (the breakdown
/// fields carry the normalized values, so the total recomposes exactly).
pub fn total_loss(
    logits: &WeightLogits,
    cloud: &PointCloud,
    sampled: &PointCloud,
    config: &OptimizerConfig,
) -> Result<LossBreakdown> {
    config.validate()?;
    let fwd = forward(logits, cloud.points(), None, sampled.points(), config)?;
    Ok(fwd.breakdown)
}

/// Analytic gradient of the total loss with respect to the logits.
///
/// Every nearest-assignment index set is held fixed at the current iterate
/// (the standard subgradient treatment of the piecewise-smooth min terms);
/// the gradient then flows through the selected distance terms, the softmax,
/// the center map, the closest-distance vector, and the radius map. This is
/// exactly the gradient of the function a [`FrozenObjective`] captured at
/// the same iterate evaluates.
pub fn loss_gradient(
    logits: &WeightLogits,
    cloud: &PointCloud,
    sampled: &PointCloud,
    config: &OptimizerConfig,
) -> Result<Array2<f64>> {
    config.validate()?;
    let fwd = forward(logits, cloud.points(), None, sampled.points(), config)?;
    Ok(gradient_from_forward(
        &fwd,
        cloud.points(),
        sampled.points(),
        config,
    ))
}

/// The smooth surrogate obtained by freezing, at a reference iterate, every
/// nearest-neighbor assignment index (but not the distances themselves).
/// `loss_gradient` computes the exact gradient of this function, so finite
/// differences of [`FrozenObjective::value`] validate it.
pub struct FrozenObjective {
    cloud: Vec<Point3>,
    sampled: Vec<Point3>,
    sampled_to_center: Vec<usize>,
    cloud_to_sample: Vec<usize>,
    sample_to_cloud: Vec<usize>,
    cloud_to_center: Vec<usize>,
    center_to_cloud: Vec<usize>,
    lambda1: f64,
    lambda2: f64,
    mode: ResidualMode,
}

impl FrozenObjective {
    pub fn capture(
        logits: &WeightLogits,
        cloud: &PointCloud,
        sampled: &PointCloud,
        config: &OptimizerConfig,
    ) -> Result<Self> {
        config.validate()?;
        let fwd = forward(logits, cloud.points(), None, sampled.points(), config)?;
        Ok(Self {
            cloud: cloud.points().to_vec(),
            sampled: sampled.points().to_vec(),
            sampled_to_center: fwd.sampled_to_center,
            cloud_to_sample: fwd.cloud_to_sample,
            sample_to_cloud: fwd.sample_to_cloud,
            cloud_to_center: fwd.cloud_to_center,
            center_to_cloud: fwd.center_to_cloud,
            lambda1: config.lambda1,
            lambda2: config.lambda2,
            mode: fwd_mode(config),
        })
    }

    pub fn value(&self, logits: &WeightLogits) -> Result<f64> {
        if logits.as_array().nrows() != self.sampled.len() {
            return Err(Error::dims("logit rows do not match the captured cloud"));
        }
        let w = softmax_weights(logits).0;
        let centers = centers_from_weights(&w, &self.sampled);
        let dvec: Vec<f64> = self
            .sampled_to_center
            .iter()
            .enumerate()
            .map(|(i, &j)| self.sampled[i].distance(centers[j]))
            .collect();
        let r: Vec<f64> = w
            .columns()
            .into_iter()
            .map(|col| col.iter().zip(&dvec).map(|(&w, &d)| w * d).sum())
            .collect();

        let dirs = cube_corner_directions();
        let sample_at = |si: usize| centers[si / 8] + dirs[si % 8] * r[si / 8];

        let inv_k = 1.0 / self.cloud.len() as f64;
        let inv_s = 1.0 / self.sample_to_cloud.len() as f64;
        let inv_n = 1.0 / centers.len() as f64;

        let mut sampling = 0.0;
        for (pi, &si) in self.cloud_to_sample.iter().enumerate() {
            sampling += self.cloud[pi].distance(sample_at(si)) * inv_k;
        }
        for (si, &pi) in self.sample_to_cloud.iter().enumerate() {
            sampling += sample_at(si).distance(self.cloud[pi]) * inv_s;
        }

        let shape = |x: f64| match self.mode {
            ResidualMode::Signed => x,
            ResidualMode::Squared => x * x,
        };
        let mut p2s = 0.0;
        for (pi, &j) in self.cloud_to_center.iter().enumerate() {
            p2s += shape(self.cloud[pi].distance(centers[j]) - r[j]) * inv_k;
        }
        for (j, &pi) in self.center_to_cloud.iter().enumerate() {
            p2s += shape(centers[j].distance(self.cloud[pi]) - r[j]) * inv_n;
        }

        let reg = -r.iter().sum::<f64>() * inv_n;
        Ok(sampling + self.lambda1 * p2s + self.lambda2 * reg)
    }
}

fn fwd_mode(config: &OptimizerConfig) -> ResidualMode {
    config.residual_mode
}

/// Central finite differences of a frozen objective; the independent oracle
/// for `loss_gradient`.
pub fn finite_difference_gradient(
    frozen: &FrozenObjective,
    logits: &WeightLogits,
    step: f64,
) -> Result<Array2<f64>> {
    let base = logits.as_array();
    let mut grad = Array2::<f64>::zeros(base.dim());
    let mut work = base.clone();
    for i in 0..base.nrows() {
        for j in 0..base.ncols() {
            let orig = work[[i, j]];
            work[[i, j]] = orig + step;
            let up = frozen.value(&WeightLogits(work.clone()))?;
            work[[i, j]] = orig - step;
            let down = frozen.value(&WeightLogits(work.clone()))?;
            work[[i, j]] = orig;
            grad[[i, j]] = (up - down) / (2.0 * step);
        }
    }
    Ok(grad)
}

// ---------------------------------------------------------------------------
// Adam

struct Adam {
    m: Array2<f64>,
    v: Array2<f64>,
    t: u32,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    fn new(shape: (usize, usize), config: &OptimizerConfig) -> Self {
        Self {
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
            t: 0,
            lr: config.learning_rate,
            beta1: config.beta1,
            beta2: config.beta2,
            eps: config.adam_epsilon,
        }
    }

    fn step(&mut self, params: &mut Array2<f64>, grad: &Array2<f64>) {
        self.t += 1;
        let b1 = self.beta1;
        let b2 = self.beta2;
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        for ((th, m), (v, g)) in params
            .iter_mut()
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut().zip(grad.iter()))
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let mhat = *m / c1;
            let vhat = *v / c2;
            *th -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

// ---------------------------------------------------------------------------
// main optimization loop

fn check_iterate(w: &Array2<f64>, centers: &[Point3], r: &[f64], dvec: &[f64], bb: &Aabb) -> Result<()> {
    for (j, col) in w.columns().into_iter().enumerate() {
        let s: f64 = col.sum();
        if (s - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "optimization diverged: weight column {j} sums to {s}"
            )));
        }
    }
    let tol = 1e-9 * (1.0 + bb.diagonal());
    if let Some(c) = centers
        .iter()
        .find(|c| !bb.contains_with_tolerance(**c, tol))
    {
        return Err(Error::invalid(format!(
            "optimization diverged: center {c:?} escaped the sampled bounding box"
        )));
    }
    let dmax = dvec.iter().cloned().fold(0.0f64, f64::max);
    if let Some(&bad) = r.iter().find(|&&x| !((-tol..=dmax + tol).contains(&x))) {
        return Err(Error::invalid(format!(
            "optimization diverged: radius {bad} outside [0, max distance {dmax}]"
        )));
    }
    Ok(())
}

/// Two-phase fit: Chamfer-only warm-up, then the full loss, Adam throughout.
/// Deterministic given the seed.
pub fn optimize(cloud: &PointCloud, config: &OptimizerConfig) -> Result<OptimizeOutcome> {
    config.validate()?;
    if cloud.len() < config.downsample_count {
        return Err(Error::invalid(format!(
            "cloud has {} points; at least downsample_count={} are required",
            cloud.len(),
            config.downsample_count
        )));
    }

    let kp = config.downsample_count;
    let n = config.skeletal_count;

    let sampled_indices = farthest_point_sample(cloud, kp, config.seed)?;
    let sampled = cloud.subset(&sampled_indices)?;
    let sampled_pts = sampled.points().to_vec();
    let bb = sampled.bounding_box().expect("nonempty sampled cloud");

    let cloud_pts = cloud.points();
    let cloud_grid = if cloud_pts.len() >= 192 {
        Some(NeighborGrid::build(cloud_pts)?)
    } else {
        None
    };

    let mut logits = WeightLogits::init(kp, n, 1e-2, config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut adam = Adam::new((kp, n), config);
    let mut history = Vec::with_capacity(config.pretrain_iters + config.main_iters);

    // phase 1: spread the skeletal points with the plain Chamfer distance
    // between centers and the full cloud
    for _ in 0..config.pretrain_iters {
        let w = softmax_weights(&logits).0;
        let centers = centers_from_weights(&w, &sampled_pts);

        let (center_to_cloud, d_cc) = match &cloud_grid {
            Some(g) => nearest_each_grid(&centers, g),
            None => nearest_each(&centers, cloud_pts)?,
        };
        let (cloud_to_center, d_pc) = nearest_each(cloud_pts, &centers)?;
        let inv_n = 1.0 / n as f64;
        let inv_k = 1.0 / cloud_pts.len() as f64;
        let cd: f64 = d_cc.iter().sum::<f64>() * inv_n + d_pc.iter().sum::<f64>() * inv_k;

        let mut g_c = vec![Point3::ORIGIN; n];
        for (j, &pi) in center_to_cloud.iter().enumerate() {
            let d = centers[j].distance(cloud_pts[pi]);
            if d > 0.0 {
                g_c[j] += (centers[j] - cloud_pts[pi]) / d * inv_n;
            }
        }
        for (pi, &j) in cloud_to_center.iter().enumerate() {
            let d = centers[j].distance(cloud_pts[pi]);
            if d > 0.0 {
                g_c[j] += (centers[j] - cloud_pts[pi]) / d * inv_k;
            }
        }
        let g_r = vec![0.0; n];
        let dvec_zero = vec![0.0; kp];
        let grad = backprop_to_logits(&w, &sampled_pts, &dvec_zero, &g_c, &g_r);

        history.push(LossRecord {
            phase: Phase::Pretrain,
            breakdown: LossBreakdown {
                sampling: cd,
                point_to_sphere: 0.0,
                radius: 0.0,
                total: cd,
            },
        });

        adam.step(logits.as_array_mut(), &grad);

        let w = softmax_weights(&logits).0;
        let centers = centers_from_weights(&w, &sampled_pts);
        let (_, dvec) = nearest_each(&sampled_pts, &centers)?;
        let r: Vec<f64> = w
            .columns()
            .into_iter()
            .map(|col| col.iter().zip(&dvec).map(|(&w, &d)| w * d).sum())
            .collect();
        check_iterate(&w, &centers, &r, &dvec, &bb)?;
    }

    // phase 2: full loss
    for _ in 0..config.main_iters {
        let fwd = forward(
            &logits,
            cloud_pts,
            cloud_grid.as_ref(),
            &sampled_pts,
            config,
        )?;
        let grad = gradient_from_forward(&fwd, cloud_pts, &sampled_pts, config);
        history.push(LossRecord {
            phase: Phase::Main,
            breakdown: fwd.breakdown,
        });
        adam.step(logits.as_array_mut(), &grad);

        let w = softmax_weights(&logits).0;
        let centers = centers_from_weights(&w, &sampled_pts);
        let (_, dvec) = nearest_each(&sampled_pts, &centers)?;
        let r: Vec<f64> = w
            .columns()
            .into_iter()
            .map(|col| col.iter().zip(&dvec).map(|(&w, &d)| w * d).sum())
            .collect();
        check_iterate(&w, &centers, &r, &dvec, &bb)?;
    }

    // final state
    let fwd = forward(
        &logits,
        cloud_pts,
        cloud_grid.as_ref(),
        &sampled_pts,
        config,
    )?;
    let spheres = fwd
        .centers
        .iter()
        .zip(&fwd.radii)
        .map(|(&c, &r)| SkeletalSphere::new(c, r.max(0.0)))
        .collect::<Result<Vec<_>>>()?;

    Ok(OptimizeOutcome {
        weights: WeightMatrix(fwd.w),
        spheres,
        sampled_indices,
        sampled,
        history,
    })
}
