//! Set-valued iterated function systems on the plane: Hutchinson steps,
//! forward and backward set trajectories, the discrete Hausdorff distance and
//! the planar maps `w_i(x, y) = (l_i(x), F_i(x, y))` induced by an RB operator.
//!
//! Compact sets are finite point clouds. Iterating the Hutchinson operator
//! multiplies the point count by the number of maps, so clouds are thinned to
//! one point per cell of a raster laid over their bounds.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rb_operator::RbOperator;
use crate::real::Real;
use crate::trajectory::{invariant_ball_radius, uniform_grid, OperatorSchedule, SampledFunction};

pub type Point<T> = [T; 2];

/// Default thinning raster, cells per side.
pub const DEFAULT_RASTER: usize = 1024;

/// Axis-aligned bounding rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds<T> {
    pub min: Point<T>,
    pub max: Point<T>,
}

impl<T: Real> Bounds<T> {
    pub fn of(points: &[Point<T>]) -> Option<Self> {
        let first = *points.first()?;
        let mut b = Bounds {
            min: first,
            max: first,
        };
        for p in &points[1..] {
            for d in 0..2 {
                b.min[d] = b.min[d].min(p[d]);
                b.max[d] = b.max[d].max(p[d]);
            }
        }
        Some(b)
    }

    pub fn union(&self, other: &Self) -> Self {
        Bounds {
            min: [self.min[0].min(other.min[0]), self.min[1].min(other.min[1])],
            max: [self.max[0].max(other.max[0]), self.max[1].max(other.max[1])],
        }
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        (0..2).all(|d| p[d] >= self.min[d] && p[d] <= self.max[d])
    }
}

/// Nonempty finite point set standing in for a compact subset of the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud2D<T> {
    points: Vec<Point<T>>,
    bounds: Bounds<T>,
}

impl<T: Real> PointCloud2D<T> {
    pub fn new(points: Vec<Point<T>>) -> Result<Self> {
        if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::Structural("point cloud with non-finite point".into()));
        }
        let bounds = Bounds::of(&points)
            .ok_or_else(|| Error::domain("point cloud", 0.0, "at least one point"))?;
        Ok(PointCloud2D { points, bounds })
    }

    /// Graph `{(x, g(x))}` of a sampled function.
    pub fn from_graph(g: &SampledFunction<T>) -> Result<Self> {
        Self::new(g.points().map(|(x, y)| [x, y]).collect())
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn bounds(&self) -> Bounds<T> {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps the first point in each cell of a `cells x cells` raster over the
    /// cloud's bounds.
    pub fn thinned(&self, cells: usize) -> Self {
        let raster = Raster::new(cells, cells, self.bounds);
        let mut seen = vec![false; cells * cells];
        let points = self
            .points
            .iter()
            .filter(|p| {
                let (i, j) = raster.cell(p);
                !std::mem::replace(&mut seen[j * cells + i], true)
            })
            .copied()
            .collect();
        PointCloud2D {
            points,
            bounds: self.bounds,
        }
    }
}

/// Distance on the plane: Euclidean, or `|dx| + θ|dy|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric<T> {
    Euclidean,
    Theta(T),
}

impl<T: Real> Metric<T> {
    #[inline]
    pub fn dist(&self, a: &Point<T>, b: &Point<T>) -> T {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        match *self {
            Metric::Euclidean => dx.hypot(dy),
            Metric::Theta(t) => dx.abs() + t * dy.abs(),
        }
    }

    /// Lower bound on the distance between points whose offsets reach at
    /// least `sx` horizontally or `sy` vertically.
    fn separation(&self, sx: T, sy: T) -> T {
        match *self {
            Metric::Euclidean => sx.min(sy),
            Metric::Theta(t) => sx.min(t * sy),
        }
    }
}

/// A planar contraction.
#[derive(Clone, Debug)]
pub enum PlanarMap<T> {
    Affine2D {
        matrix: [[T; 2]; 2],
        translation: [T; 2],
    },
    /// `(x, y) -> (l_i(x), F_i(x, y))` for branch `branch` of `op`; `x_lipschitz`
    /// bounds the Lipschitz constant of `F_i` in `x`.
    RbInduced {
        op: Arc<RbOperator<T>>,
        branch: usize,
        x_lipschitz: T,
    },
}

impl<T: Real> PlanarMap<T> {
    #[inline]
    pub fn apply(&self, p: &Point<T>) -> Point<T> {
        match self {
            PlanarMap::Affine2D {
                matrix: m,
                translation: t,
            } => [
                m[0][0] * p[0] + m[0][1] * p[1] + t[0],
                m[1][0] * p[0] + m[1][1] * p[1] + t[1],
            ],
            PlanarMap::RbInduced { op, branch, .. } => {
                [op.partition().branch(*branch).apply(p[0]), op.branch_value(*branch, p[0], p[1])]
            }
        }
    }

    /// Abscissae on which the map is defined (`[0,1]` for induced maps).
    pub fn domain_x(&self) -> Option<(T, T)> {
        match self {
            PlanarMap::Affine2D { .. } => None,
            PlanarMap::RbInduced { .. } => Some((T::zero(), T::one())),
        }
    }

    /// Lipschitz constant in the given metric (an upper bound for induced
    /// maps, valid for ordinates inside the operator's invariant ball).
    pub fn lipschitz(&self, metric: &Metric<T>) -> T {
        match (self, metric) {
            (PlanarMap::Affine2D { matrix, .. }, Metric::Euclidean) => spectral_norm(matrix),
            (PlanarMap::Affine2D { matrix: m, .. }, Metric::Theta(t)) => {
                // Operator norm of diag(1, t) M diag(1, 1/t) in the l1 norm.
                let c0 = m[0][0].abs() + *t * m[1][0].abs();
                let c1 = m[0][1].abs() / *t + m[1][1].abs();
                c0.max(c1)
            }
            (
                PlanarMap::RbInduced {
                    op,
                    branch,
                    x_lipschitz,
                },
                metric,
            ) => {
                let a = op.partition().branch(*branch).slope().abs();
                let s = op.scaling_sups()[*branch];
                match metric {
                    Metric::Theta(t) => (a + *t * *x_lipschitz).max(s),
                    Metric::Euclidean => (a * a + *x_lipschitz * *x_lipschitz + s * s).sqrt(),
                }
            }
        }
    }
}

fn spectral_norm<T: Real>(m: &[[T; 2]; 2]) -> T {
    // Largest eigenvalue of M^T M.
    let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let d = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let half_tr = (a + d) / T::lit(2.0);
    let disc = (((a - d) / T::lit(2.0)).powi(2) + b * b).sqrt();
    (half_tr + disc).max(T::zero()).sqrt()
}

/// Finite family of planar contractions, with per-map Lipschitz constants in
/// the family's metric.
#[derive(Clone, Debug)]
pub struct SetIfs<T> {
    maps: Vec<PlanarMap<T>>,
    lipschitz: Vec<T>,
    metric: Metric<T>,
}

impl<T: Real> SetIfs<T> {
    pub fn new(maps: Vec<PlanarMap<T>>, metric: Metric<T>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::Structural(format!(
                "an IFS needs at least 2 maps, got {}",
                maps.len()
            )));
        }
        let lipschitz: Vec<T> = maps.iter().map(|m| m.lipschitz(&metric)).collect();
        if lipschitz.iter().any(|l| !l.is_finite()) {
            return Err(Error::Unsupported("map with unbounded Lipschitz constant".into()));
        }
        Ok(SetIfs {
            maps,
            lipschitz,
            metric,
        })
    }

    /// Affine maps under the Euclidean metric.
    pub fn affine(maps: Vec<([[T; 2]; 2], [T; 2])>) -> Result<Self> {
        Self::new(
            maps.into_iter()
                .map(|(matrix, translation)| PlanarMap::Affine2D {
                    matrix,
                    translation,
                })
                .collect(),
            Metric::Euclidean,
        )
    }

    pub fn maps(&self) -> &[PlanarMap<T>] {
        &self.maps
    }

    pub fn map_lipschitz(&self) -> &[T] {
        &self.lipschitz
    }

    pub fn metric(&self) -> Metric<T> {
        self.metric
    }

    /// `θ` when the family uses the weighted product metric.
    pub fn theta(&self) -> Option<T> {
        match self.metric {
            Metric::Theta(t) => Some(t),
            Metric::Euclidean => None,
        }
    }

    /// `max_i Lip(w_i)`.
    pub fn lipschitz(&self) -> T {
        self.lipschitz.iter().copied().fold(T::zero(), T::max)
    }

    /// Same maps measured in another metric.
    pub fn with_metric(&self, metric: Metric<T>) -> Result<Self> {
        Self::new(self.maps.clone(), metric)
    }
}

/// IFS `w_i(x, y) = (l_i(x), F_i(x, y))` of an RB operator in the metric
/// `d_θ = d_X + θ d_Y`, `θ = (1 - a) / (2L)`, where `a` is the largest branch
/// slope and `L` bounds the `x`-Lipschitz constants of the `F_i` over the
/// invariant ball. When `L = 0` every `θ > 0` works and `θ = 1` is used.
pub fn ifs_from_rb<T: Real>(op: Arc<RbOperator<T>>) -> Result<SetIfs<T>> {
    let single = OperatorSchedule::stationary(Arc::clone(&op), 1, crate::func::ScalarFunc::zero())?;
    let vertical = invariant_ball_radius(&single)?;
    let l = op.x_lipschitz(vertical);
    if !l.is_finite() {
        return Err(Error::Unsupported(
            "x-Lipschitz bound of the branch maps is not finite".into(),
        ));
    }
    let a = op.partition().max_slope();
    let theta = if l > T::zero() {
        (T::one() - a) / (T::lit(2.0) * l)
    } else {
        T::one()
    };
    let maps = (0..op.branch_count())
        .map(|branch| PlanarMap::RbInduced {
            op: Arc::clone(&op),
            branch,
            x_lipschitz: l,
        })
        .collect();
    SetIfs::new(maps, Metric::Theta(theta))
}

/// Induced families of levels `1..=depth` of a schedule.
pub fn schedule_families<T: Real>(sched: &OperatorSchedule<T>, depth: usize) -> Result<Vec<SetIfs<T>>> {
    if depth == 0 || depth > sched.depth() {
        return Err(Error::Structural(format!(
            "family depth {depth} outside 1..={}",
            sched.depth()
        )));
    }
    (1..=depth).map(|k| ifs_from_rb(sched.level_shared(k))).collect()
}

/// Smallest `θ` among the families (Euclidean when none uses `d_θ`), under
/// which every induced family stays contractive.
pub fn common_metric<T: Real>(families: &[SetIfs<T>]) -> Metric<T> {
    families
        .iter()
        .filter_map(SetIfs::theta)
        .reduce(T::min)
        .map_or(Metric::Euclidean, Metric::Theta)
}

/// `∪_i w_i(A)` with every image kept.
pub fn hutchinson_step_raw<T: Real>(ifs: &SetIfs<T>, a: &PointCloud2D<T>) -> PointCloud2D<T> {
    let mut out = Vec::with_capacity(a.len() * ifs.maps.len());
    for m in &ifs.maps {
        out.extend(a.points().iter().map(|p| m.apply(p)));
    }
    PointCloud2D::new(out).expect("images of a nonempty finite cloud")
}

/// `∪_i w_i(A)` thinned on a `raster x raster` grid.
pub fn hutchinson_step<T: Real>(ifs: &SetIfs<T>, a: &PointCloud2D<T>, raster: usize) -> PointCloud2D<T> {
    hutchinson_step_raw(ifs, a).thinned(raster)
}

/// `F^steps(A_0)`, the pre-fractal of rank `steps`.
pub fn attractor_stationary<T: Real>(
    ifs: &SetIfs<T>,
    a0: &PointCloud2D<T>,
    steps: usize,
    raster: usize,
) -> Result<PointCloud2D<T>> {
    if steps == 0 {
        return Err(Error::Structural("attractor iteration needs steps >= 1".into()));
    }
    if let Some((i, &l)) = ifs
        .lipschitz
        .iter()
        .enumerate()
        .find(|(_, &l)| !(l < T::one()))
    {
        return Err(Error::ContractionViolation {
            branch: i,
            sup: l.as_f64(),
        });
    }
    let mut a = a0.clone();
    for _ in 0..steps {
        a = hutchinson_step(ifs, &a, raster);
    }
    Ok(a)
}

/// Result of a backward set trajectory.
#[derive(Clone, Debug)]
pub struct SetTrajectory<T> {
    pub cloud: PointCloud2D<T>,
    /// `Σ_{k<=m} Π_{j<=k} Lip(F_j)` for `m = 1..=K`.
    pub partial_sums: Vec<T>,
}

/// `F_1 ∘ F_2 ∘ … ∘ F_K (A_0)`: `F_K` is applied first.
pub fn backward_set_trajectory<T: Real>(
    families: &[SetIfs<T>],
    a0: &PointCloud2D<T>,
    raster: usize,
) -> Result<SetTrajectory<T>> {
    if families.is_empty() {
        return Err(Error::Structural("backward trajectory needs at least one IFS".into()));
    }
    let mut a = a0.clone();
    for f in families.iter().rev() {
        a = hutchinson_step(f, &a, raster);
    }
    let mut prod = T::one();
    let mut acc = T::zero();
    let partial_sums = families
        .iter()
        .map(|f| {
            prod = prod * f.lipschitz();
            acc = acc + prod;
            acc
        })
        .collect();
    Ok(SetTrajectory {
        cloud: a,
        partial_sums,
    })
}

/// Uniform-grid index over a point set for nearest-neighbour queries.
struct CellIndex<'a, T> {
    pts: &'a [Point<T>],
    origin: Point<T>,
    cell: Point<T>,
    dims: [usize; 2],
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl<'a, T: Real> CellIndex<'a, T> {
    fn new(pts: &'a [Point<T>]) -> Self {
        let b = Bounds::of(pts).expect("nonempty");
        let per_side = ((pts.len() as f64).sqrt().ceil() as usize).clamp(1, 2048);
        let mut dims = [1usize; 2];
        let mut cell = [T::one(); 2];
        for d in 0..2 {
            let ext = b.max[d] - b.min[d];
            if ext > T::zero() {
                dims[d] = per_side;
                cell[d] = ext / T::from_usize_lossy(per_side);
            }
        }
        let key = |p: &Point<T>| -> usize {
            let c = |d: usize| -> usize {
                if dims[d] == 1 {
                    0
                } else {
                    ((p[d] - b.min[d]) / cell[d])
                        .floor()
                        .to_usize()
                        .unwrap_or(0)
                        .min(dims[d] - 1)
                }
            };
            c(1) * dims[0] + c(0)
        };
        let ncell = dims[0] * dims[1];
        let mut counts = vec![0usize; ncell + 1];
        for p in pts {
            counts[key(p) + 1] += 1;
        }
        for i in 0..ncell {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut order = vec![0usize; pts.len()];
        for (i, p) in pts.iter().enumerate() {
            let k = key(p);
            order[fill[k]] = i;
            fill[k] += 1;
        }
        CellIndex {
            pts,
            origin: b.min,
            cell,
            dims,
            starts: counts,
            order,
        }
    }

    fn coord(&self, v: T, d: usize) -> i64 {
        if self.dims[d] == 1 {
            return 0;
        }
        let c = ((v - self.origin[d]) / self.cell[d]).floor();
        let c = c.max(T::zero()).min(T::from_usize_lossy(self.dims[d] - 1));
        c.to_i64().unwrap_or(0)
    }

    fn nearest(&self, q: &Point<T>, metric: &Metric<T>) -> T {
        let (cx, cy) = (self.coord(q[0], 0), self.coord(q[1], 1));
        let step_x = if self.dims[0] > 1 { self.cell[0] } else { T::infinity() };
        let step_y = if self.dims[1] > 1 { self.cell[1] } else { T::infinity() };
        let max_ring = self.dims[0].max(self.dims[1]) as i64;
        let mut best = T::infinity();
        for ring in 0..=max_ring {
            for j in (cy - ring)..=(cy + ring) {
                if j < 0 || j >= self.dims[1] as i64 {
                    continue;
                }
                let edge_row = j == cy - ring || j == cy + ring;
                let mut i = cx - ring;
                while i <= cx + ring {
                    if i >= 0 && i < self.dims[0] as i64 {
                        let c = j as usize * self.dims[0] + i as usize;
                        for &pi in &self.order[self.starts[c]..self.starts[c + 1]] {
                            best = best.min(metric.dist(q, &self.pts[pi]));
                        }
                    }
                    i += if edge_row || ring == 0 { 1 } else { 2 * ring };
                }
            }
            let r = T::from_usize_lossy(ring as usize);
            let bound = metric.separation(step_x * r, step_y * r);
            if best <= bound {
                break;
            }
        }
        best
    }
}

fn directed<T: Real>(a: &[Point<T>], b: &CellIndex<'_, T>, metric: &Metric<T>) -> T {
    a.iter()
        .map(|p| b.nearest(p, metric))
        .fold(T::zero(), T::max)
}

/// Exact Hausdorff distance between finite point sets.
pub fn hausdorff_points<T: Real>(a: &[Point<T>], b: &[Point<T>], metric: Metric<T>) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("Hausdorff distance", 0.0, "nonempty point sets"));
    }
    let ia = CellIndex::new(a);
    let ib = CellIndex::new(b);
    Ok(directed(a, &ib, &metric).max(directed(b, &ia, &metric)))
}

/// Euclidean Hausdorff distance between clouds.
pub fn hausdorff_distance<T: Real>(a: &PointCloud2D<T>, b: &PointCloud2D<T>) -> Result<T> {
    hausdorff_points(a.points(), b.points(), Metric::Euclidean)
}

pub fn hausdorff_distance_in<T: Real>(
    a: &PointCloud2D<T>,
    b: &PointCloud2D<T>,
    metric: Metric<T>,
) -> Result<T> {
    hausdorff_points(a.points(), b.points(), metric)
}

/// Occupancy grid over a rectangle; row 0 is the top (largest `y`).
#[derive(Clone, Debug, PartialEq)]
pub struct Raster<T> {
    pub width: usize,
    pub height: usize,
    pub bounds: Bounds<T>,
    cells: Vec<bool>,
}

impl<T: Real> Raster<T> {
    pub fn new(width: usize, height: usize, bounds: Bounds<T>) -> Self {
        Raster {
            width,
            height,
            bounds,
            cells: vec![false; width * height],
        }
    }

    /// `(column, row)` of the cell holding `p`; points outside are clamped.
    pub fn cell(&self, p: &Point<T>) -> (usize, usize) {
        let idx = |v: T, lo: T, hi: T, n: usize| -> usize {
            if hi <= lo {
                return 0;
            }
            let t = ((v - lo) / (hi - lo) * T::from_usize_lossy(n)).floor();
            t.max(T::zero()).to_usize().unwrap_or(0).min(n - 1)
        };
        let col = idx(p[0], self.bounds.min[0], self.bounds.max[0], self.width);
        let up = idx(p[1], self.bounds.min[1], self.bounds.max[1], self.height);
        (col, self.height - 1 - up)
    }

    pub fn set(&mut self, col: usize, row: usize) {
        self.cells[row * self.width + col] = true;
    }

    pub fn is_set(&self, col: usize, row: usize) -> bool {
        self.cells[row * self.width + col]
    }

    pub fn plot_points(&mut self, pts: &[Point<T>]) {
        for p in pts {
            let (c, r) = self.cell(p);
            self.set(c, r);
        }
    }

    /// Joins consecutive points with one-cell-wide digital lines.
    pub fn plot_polyline(&mut self, pts: &[Point<T>]) {
        let mut prev: Option<(usize, usize)> = None;
        for p in pts {
            let cur = self.cell(p);
            match prev {
                Some(a) => self.line(a, cur),
                None => self.set(cur.0, cur.1),
            }
            prev = Some(cur);
        }
    }

    fn line(&mut self, a: (usize, usize), b: (usize, usize)) {
        let (mut x0, mut y0) = (a.0 as i64, a.1 as i64);
        let (x1, y1) = (b.0 as i64, b.1 as i64);
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.set(x0 as usize, y0 as usize);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    /// Occupied cells as points in cell units.
    pub fn occupied(&self) -> Vec<Point<T>> {
        let mut out = Vec::new();
        for r in 0..self.height {
            for c in 0..self.width {
                if self.is_set(c, r) {
                    out.push([T::from_usize_lossy(c), T::from_usize_lossy(r)]);
                }
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }
}

/// Hausdorff distance, in raster cells, between the rasterized graph of a
/// sampled function (consecutive samples joined) and a cloud, both on a
/// `cells x cells` raster over their joint bounds.
pub fn graph_cloud_cell_distance<T: Real>(
    graph: &SampledFunction<T>,
    cloud: &PointCloud2D<T>,
    cells: usize,
) -> Result<T> {
    let gpts: Vec<Point<T>> = graph.points().map(|(x, y)| [x, y]).collect();
    let gb = Bounds::of(&gpts).ok_or_else(|| Error::domain("graph", 0.0, "nonempty"))?;
    let bounds = gb.union(&cloud.bounds());
    let mut rg = Raster::new(cells, cells, bounds);
    rg.plot_polyline(&gpts);
    let mut rc = Raster::new(cells, cells, bounds);
    rc.plot_points(cloud.points());
    hausdorff_points(&rg.occupied(), &rc.occupied(), Metric::Euclidean)
}

/// Graph samples for [`graph_attractor_distance`]; dense enough that joining
/// consecutive samples traces Hölder-1/2 graphs to within a cell at 512 cells.
pub const GRAPH_SAMPLES: usize = (1 << 18) + 1;
const SEED_SAMPLES: usize = 257;
const ATTRACTOR_THINNING: usize = 2048;

/// Cell distance between the rasterized graph of `Ψ_steps(f₀)` and the set
/// trajectory of the induced families started from the graph of `f₀`
/// (the pre-fractal `F^steps(G(f₀))` for stationary schedules).
pub fn graph_attractor_distance<T: Real>(sched: &OperatorSchedule<T>, steps: usize, cells: usize) -> Result<T> {
    let sched = sched.truncated(steps)?;
    let graph = sched.sample_backward(&uniform_grid(GRAPH_SAMPLES))?;
    let f0 = SampledFunction::from_fn(uniform_grid(SEED_SAMPLES), |x| sched.initial().value(x))?;
    let a0 = PointCloud2D::from_graph(&f0)?;
    let cloud = if sched.is_stationary() {
        attractor_stationary(&ifs_from_rb(sched.level_shared(1))?, &a0, steps, ATTRACTOR_THINNING)?
    } else {
        backward_set_trajectory(&schedule_families(&sched, steps)?, &a0, ATTRACTOR_THINNING)?.cloud
    };
    graph_cloud_cell_distance(&graph, &cloud, cells)
}

/// Outcome of [`invariant_ball_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallCheck<T> {
    /// Largest Lipschitz constant among the maps.
    pub mu: T,
    /// `max_k d(T_k(q), q)`.
    pub offset: T,
    /// `M / (1 - mu)`, infinite when `mu >= 1`.
    pub implied_radius: T,
    /// Largest `d(T_k(p), q)` over the probes.
    pub max_image_distance: T,
    /// `d(T_k(p), q) <= mu d(p, q) + M` held at every probe.
    pub inequality_holds: bool,
    /// Every probe image landed in the trial ball.
    pub ball_invariant: bool,
}

const BALL_PROBES: usize = 256;

/// Empirical check of `d(T_k(p), q) <= mu d(p, q) + M` on the boundary and
/// centre of the trial ball `B_r(q)`, together with the radius `M / (1 - mu)`
/// it implies. Probes outside a map's domain are skipped for that map.
pub fn invariant_ball_check<T: Real>(
    maps: &[PlanarMap<T>],
    metric: Metric<T>,
    center: Point<T>,
    radius: T,
) -> Result<BallCheck<T>> {
    if !(radius > T::zero()) {
        return Err(Error::domain("ball check", radius.as_f64(), "radius > 0"));
    }
    if maps.is_empty() {
        return Err(Error::Structural("ball check needs at least one map".into()));
    }
    let mu = maps
        .iter()
        .map(|m| m.lipschitz(&metric))
        .fold(T::zero(), T::max);
    let offset = maps
        .iter()
        .map(|m| metric.dist(&m.apply(&center), &center))
        .fold(T::zero(), T::max);
    let implied_radius = if mu < T::one() {
        offset / (T::one() - mu)
    } else {
        T::infinity()
    };

    let mut probes = vec![center];
    for k in 0..BALL_PROBES {
        let ang = T::lit(std::f64::consts::TAU) * T::from_usize_lossy(k) / T::from_usize_lossy(BALL_PROBES);
        let (s, c) = ang.sin_cos();
        let dir = match metric {
            Metric::Euclidean => [c, s],
            // Boundary of |dx| + θ|dy| = 1.
            Metric::Theta(t) => {
                let n = c.abs() + t * s.abs();
                [c / n, s / n]
            }
        };
        probes.push([center[0] + radius * dir[0], center[1] + radius * dir[1]]);
    }

    let tol = T::lit(1e-12) * (T::one() + radius + offset);
    let mut max_image = T::zero();
    let mut inequality_holds = true;
    let mut ball_invariant = true;
    for m in maps {
        for p in &probes {
            if let Some((lo, hi)) = m.domain_x() {
                if p[0] < lo || p[0] > hi {
                    continue;
                }
            }
            let d = metric.dist(&m.apply(p), &center);
            max_image = max_image.max(d);
            if d > mu * metric.dist(p, &center) + offset + tol {
                inequality_holds = false;
            }
            if d > radius + tol {
                ball_invariant = false;
            }
        }
    }
    Ok(BallCheck {
        mu,
        offset,
        implied_radius,
        max_image_distance: max_image,
        inequality_holds,
        ball_invariant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, Named};
    use crate::func::ScalarFunc;
    use proptest::prelude::*;

    fn cloud(p: &[(f64, f64)]) -> PointCloud2D<f64> {
        PointCloud2D::new(p.iter().map(|&(x, y)| [x, y]).collect()).unwrap()
    }

    fn dyadic_line() -> SetIfs<f64> {
        SetIfs::affine(vec![
            ([[0.5, 0.0], [0.0, 0.0]], [0.0, 0.0]),
            ([[0.5, 0.0], [0.0, 0.0]], [0.5, 0.0]),
        ])
        .unwrap()
    }

    fn named(n: Named) -> Arc<RbOperator<f64>> {
        Arc::new(catalog::make_named(n).operator)
    }

    fn brute(a: &[Point<f64>], b: &[Point<f64>], m: Metric<f64>) -> f64 {
        let dir = |a: &[Point<f64>], b: &[Point<f64>]| {
            a.iter()
                .map(|p| b.iter().map(|q| m.dist(p, q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        dir(a, b).max(dir(b, a))
    }

    #[test]
    fn hutchinson_examples() {
        let a = cloud(&[(0.0, 0.0), (1.0, 0.0)]);
        let s = hutchinson_step(&dyadic_line(), &a, DEFAULT_RASTER);
        let mut xs: Vec<f64> = s.points().iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);

        let fix = SetIfs::affine(vec![
            ([[0.5, 0.0], [0.0, 0.5]], [0.1, 0.1]),
            ([[0.25, 0.0], [0.0, 0.25]], [0.15, 0.15]),
        ])
        .unwrap();
        let p = cloud(&[(0.2, 0.2)]);
        assert_eq!(hutchinson_step(&fix, &p, DEFAULT_RASTER).points(), &[[0.2, 0.2]]);

        let half = [[0.5, 0.0], [0.0, 0.5]];
        let sierp = SetIfs::affine(vec![
            (half, [0.0, 0.0]),
            (half, [0.5, 0.0]),
            (half, [0.25, 0.5]),
        ])
        .unwrap();
        let tri = cloud(&[(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)]);
        assert_eq!(hutchinson_step_raw(&sierp, &tri).len(), 9);
        assert_eq!(hutchinson_step(&sierp, &tri, DEFAULT_RASTER).len(), 6);
    }

    #[test]
    fn attractor_examples() {
        let a0 = cloud(&[(0.3, 0.0)]);
        let a = attractor_stationary(&dyadic_line(), &a0, 20, DEFAULT_RASTER).unwrap();
        let line: Vec<Point<f64>> = uniform_grid::<f64>(1025).into_iter().map(|x| [x, 0.0]).collect();
        assert!(hausdorff_points(a.points(), &line, Metric::Euclidean).unwrap() <= 2.0 / 1024.0);

        let one = attractor_stationary(&dyadic_line(), &a0, 1, DEFAULT_RASTER).unwrap();
        assert_eq!(one, hutchinson_step(&dyadic_line(), &a0, DEFAULT_RASTER));
        assert!(attractor_stationary(&dyadic_line(), &a0, 0, DEFAULT_RASTER).is_err());

        let expanding = SetIfs::affine(vec![
            ([[1.5, 0.0], [0.0, 0.5]], [0.0, 0.0]),
            ([[0.5, 0.0], [0.0, 0.5]], [0.5, 0.0]),
        ])
        .unwrap();
        assert!(matches!(
            attractor_stationary(&expanding, &a0, 3, DEFAULT_RASTER),
            Err(Error::ContractionViolation { branch: 0, .. })
        ));
    }

    #[test]
    fn quadratic_attractor_is_its_graph() {
        let op = named(Named::Quadratic);
        let ifs = ifs_from_rb(op).unwrap();
        let a0 = cloud(&[(0.0, 0.0), (1.0, 0.0)]);
        let a = attractor_stationary(&ifs, &a0, 20, 2048).unwrap();
        let g = SampledFunction::from_fn(uniform_grid(4097), |x| 4.0 * x * (1.0 - x)).unwrap();
        let d = hausdorff_distance(&a, &PointCloud2D::from_graph(&g).unwrap()).unwrap();
        assert!(d < 2e-3, "{d}");
    }

    #[test]
    fn backward_examples() {
        let ifs = ifs_from_rb(named(Named::Casino)).unwrap();
        let a0 = cloud(&[(0.0, 0.0), (1.0, 1.0)]);
        let same = backward_set_trajectory(&vec![ifs.clone(); 8], &a0, DEFAULT_RASTER).unwrap();
        assert_eq!(same.cloud, attractor_stationary(&ifs, &a0, 8, DEFAULT_RASTER).unwrap());
        assert!(same.partial_sums.windows(2).all(|w| w[0] <= w[1]));
        let one = backward_set_trajectory(&[ifs.clone()], &a0, DEFAULT_RASTER).unwrap();
        assert_eq!(one.cloud, hutchinson_step(&ifs, &a0, DEFAULT_RASTER));
        assert!(backward_set_trajectory::<f64>(&[], &a0, DEFAULT_RASTER).is_err());
    }

    #[test]
    fn hybrid_set_trajectory_tracks_function_trajectory() {
        let sched = catalog::hybrid_takagi_quadratic(3).unwrap();
        let fams = schedule_families(&sched, sched.depth()).unwrap();
        let g0 = SampledFunction::from_fn(uniform_grid(257), |_| 0.0).unwrap();
        let traj = backward_set_trajectory(&fams, &PointCloud2D::from_graph(&g0).unwrap(), 2048).unwrap();
        let g = sched.sample_backward(&uniform_grid(8193)).unwrap();
        let cells = graph_cloud_cell_distance(&g, &traj.cloud, 512).unwrap();
        assert!(cells <= 2.0, "{cells}");
    }

    #[test]
    fn hausdorff_examples() {
        let a = cloud(&[(0.0, 0.0)]);
        let b = cloud(&[(1.0, 0.0)]);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let c = cloud(&[(0.0, 0.0), (1.0, 0.0)]);
        let d = cloud(&[(0.5, 0.0)]);
        assert_eq!(hausdorff_distance(&c, &d).unwrap(), 0.5);
        assert!(hausdorff_points::<f64>(&[], &[[0.0, 0.0]], Metric::Euclidean).is_err());
        assert!(PointCloud2D::<f64>::new(vec![]).is_err());
        let t = hausdorff_distance_in(&c, &cloud(&[(0.0, 1.0)]), Metric::Theta(0.25)).unwrap();
        assert_eq!(t, 1.25);
    }

    #[test]
    fn ifs_from_rb_examples() {
        let q = ifs_from_rb(named(Named::Quadratic)).unwrap();
        assert_eq!(q.maps().len(), 2);
        assert_eq!(q.theta(), Some(0.25));
        assert!(q.lipschitz() < 1.0);
        let k = ifs_from_rb(named(Named::Kiesswetter)).unwrap();
        assert_eq!(k.maps().len(), 4);
        match &k.maps()[0] {
            PlanarMap::RbInduced { op, .. } => assert_eq!(op.partition().max_slope(), 0.25),
            _ => unreachable!(),
        }
        let flat = crate::rb_operator::RbOperator::build_interp(
            crate::func::Partition::halves(),
            vec![ScalarFunc::zero(), ScalarFunc::zero()],
            ScalarFunc::Polynomial(vec![0.0, 0.0, 1.0]),
        )
        .unwrap();
        let f = ifs_from_rb(Arc::new(flat)).unwrap();
        for y in [-3.0, 0.0, 5.0] {
            assert_eq!(f.maps()[1].apply(&[0.5, y]), [0.75, 0.5625]);
        }
    }

    #[test]
    fn ball_check_examples() {
        let half = PlanarMap::Affine2D {
            matrix: [[0.5, 0.0], [0.0, 0.0]],
            translation: [0.0, 0.0],
        };
        let r = invariant_ball_check(&[half], Metric::Euclidean, [0.0, 0.0], 1.0).unwrap();
        assert_eq!((r.mu, r.offset, r.implied_radius), (0.5, 0.0, 0.0));
        assert!(r.inequality_holds && r.ball_invariant);

        let d = dyadic_line();
        let r = invariant_ball_check(d.maps(), Metric::Euclidean, [0.0, 0.0], 1.0).unwrap();
        assert_eq!((r.mu, r.offset, r.implied_radius), (0.5, 0.5, 1.0));
        assert!(r.inequality_holds && r.ball_invariant);
        let small = invariant_ball_check(d.maps(), Metric::Euclidean, [0.0, 0.0], 0.5).unwrap();
        assert!(!small.ball_invariant);

        let op = named(Named::Quadratic);
        let q = ifs_from_rb(op.clone()).unwrap();
        let r = invariant_ball_check(q.maps(), q.metric(), [0.0, 0.0], 3.0).unwrap();
        assert!(r.implied_radius.is_finite());
        assert!(r.inequality_holds && r.ball_invariant);
        let sched =
            OperatorSchedule::stationary(op, 20, ScalarFunc::zero()).unwrap();
        let rf = invariant_ball_radius(&sched).unwrap();
        let theta = q.theta().unwrap();
        // Graphs inside the sup-norm ball sit inside the d_θ ball.
        assert!(1.0 + theta * rf <= r.implied_radius);
        for (x, y) in sched.sample_backward(&uniform_grid(513)).unwrap().points() {
            assert!(q.metric().dist(&[x, y], &[0.0, 0.0]) <= r.implied_radius);
        }
    }

    #[test]
    fn graph_image_identity() {
        let op = named(Named::Takagi);
        let ifs = ifs_from_rb(op.clone()).unwrap();
        let g = SampledFunction::from_fn(uniform_grid(257), |x: f64| (7.0 * x).sin() - x).unwrap();
        let gi = g.interpolant().unwrap();
        let graph = PointCloud2D::from_graph(&g).unwrap();
        for (i, w) in ifs.maps().iter().enumerate() {
            for p in graph.points() {
                let img = w.apply(p);
                if op.partition().locate(img[0]).unwrap() != i {
                    continue;
                }
                let tg = op.apply_pointwise(|t| gi.value(t), img[0]).unwrap();
                assert!((img[1] - tg).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn contraction_of_hutchinson_step() {
        let half = [[0.5, 0.1], [0.0, 0.4]];
        let ifs = SetIfs::affine(vec![(half, [0.0, 0.0]), (half, [0.5, 0.3]), ([[0.3, 0.0], [0.2, 0.3]], [0.1, 0.6])]).unwrap();
        let lip = ifs.lipschitz();
        assert!(lip < 1.0);
        let mut seed = 1u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let a = PointCloud2D::new((0..40).map(|_| [next(), next()]).collect()).unwrap();
            let b = PointCloud2D::new((0..30).map(|_| [next(), next()]).collect()).unwrap();
            let h0 = hausdorff_distance(&a, &b).unwrap();
            let fa = hutchinson_step_raw(&ifs, &a);
            let fb = hutchinson_step_raw(&ifs, &b);
            assert!(hausdorff_distance(&fa, &fb).unwrap() <= lip * h0 + 1e-12);
        }
    }

    #[test]
    fn raster_cells() {
        let b = Bounds {
            min: [0.0, 0.0],
            max: [1.0, 1.0],
        };
        let mut r = Raster::new(4, 4, b);
        assert_eq!(r.cell(&[0.0, 0.0]), (0, 3));
        assert_eq!(r.cell(&[1.0, 1.0]), (3, 0));
        r.plot_polyline(&[[0.0, 0.0], [1.0, 1.0]]);
        assert_eq!(r.count(), 4);
    }

    fn pts() -> impl Strategy<Value = Vec<Point<f64>>> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| [x, y]), 1..60)
    }

    proptest! {
        #[test]
        fn grid_search_matches_brute_force(a in pts(), b in pts(), theta in 0.05f64..3.0) {
            for m in [Metric::Euclidean, Metric::Theta(theta)] {
                let fast = hausdorff_points(&a, &b, m).unwrap();
                prop_assert_eq!(fast, brute(&a, &b, m));
            }
        }

        #[test]
        fn hausdorff_is_a_metric(a in pts(), b in pts(), c in pts()) {
            let m = Metric::Euclidean;
            let ab = hausdorff_points(&a, &b, m).unwrap();
            prop_assert_eq!(ab, hausdorff_points(&b, &a, m).unwrap());
            prop_assert_eq!(hausdorff_points(&a, &a, m).unwrap(), 0.0);
            let ac = hausdorff_points(&a, &c, m).unwrap();
            let cb = hausdorff_points(&c, &b, m).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
        }
    }
}
