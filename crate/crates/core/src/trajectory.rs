//! Backward trajectories `Ψ_K(f₀) = T_1 ∘ T_2 ∘ … ∘ T_K (f₀)` evaluated
//! exactly at single points, plus convergence diagnostics.
//!
//! Evaluating `Ψ_K(f₀)(x)` only needs `f₀` at one point: descend through the
//! levels recording branch and preimage, then fold the branch maps back up.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::func::{check_unit, ScalarFunc};
use crate::rb_operator::{OperatorForm, RbOperator};
use crate::real::Real;

/// Default uniform probe grid size.
pub const DEFAULT_PROBE_POINTS: usize = 513;
/// Default accuracy target for [`default_depth`].
pub const DEFAULT_TARGET: f64 = 1e-9;
/// Successive distances below this many machine epsilons are left out of rate fits.
const RATE_FIT_FLOOR_EPS: f64 = 1e2;

/// Finite operator sequence `T_1, …, T_K` stored as repeated blocks, with an
/// initial function `f₀`.
#[derive(Clone, Debug)]
pub struct OperatorSchedule<T> {
    blocks: Vec<(Arc<RbOperator<T>>, usize)>,
    initial: ScalarFunc<T>,
    levels: Vec<usize>,
    lipschitz: T,
}

impl<T: Real> OperatorSchedule<T> {
    pub fn new(blocks: Vec<(Arc<RbOperator<T>>, usize)>, initial: ScalarFunc<T>) -> Result<Self> {
        initial.validate()?;
        if blocks.is_empty() {
            return Err(Error::Structural("schedule needs at least one block".into()));
        }
        if let Some(pos) = blocks.iter().position(|b| b.1 == 0) {
            return Err(Error::Structural(format!("block {pos} has repeat count 0")));
        }
        let mut levels = Vec::new();
        let mut lipschitz = T::zero();
        for (b, (op, n)) in blocks.iter().enumerate() {
            levels.extend(std::iter::repeat(b).take(*n));
            lipschitz = lipschitz.max(op.lipschitz_sup());
        }
        if !(lipschitz < T::one()) {
            return Err(Error::ContractionViolation {
                branch: 0,
                sup: lipschitz.as_f64(),
            });
        }
        Ok(OperatorSchedule {
            blocks,
            initial,
            levels,
            lipschitz,
        })
    }

    /// `T, T, …, T` (`depth` times).
    pub fn stationary(op: Arc<RbOperator<T>>, depth: usize, initial: ScalarFunc<T>) -> Result<Self> {
        Self::new(vec![(op, depth)], initial)
    }

    /// Repeats the block pattern until `depth` levels exist, truncating the
    /// final block.
    pub fn periodic(
        pattern: &[(Arc<RbOperator<T>>, usize)],
        depth: usize,
        initial: ScalarFunc<T>,
    ) -> Result<Self> {
        if pattern.is_empty() || pattern.iter().any(|b| b.1 == 0) || depth == 0 {
            return Err(Error::Structural(
                "periodic schedule needs a non-empty pattern of positive repeats and depth >= 1"
                    .into(),
            ));
        }
        let mut blocks = Vec::new();
        let mut left = depth;
        for (op, n) in pattern.iter().cycle() {
            if left == 0 {
                break;
            }
            let take = (*n).min(left);
            blocks.push((Arc::clone(op), take));
            left -= take;
        }
        Self::new(blocks, initial)
    }

    /// Same operators with another initial function.
    pub fn with_initial(&self, initial: ScalarFunc<T>) -> Result<Self> {
        Self::new(self.blocks.clone(), initial)
    }

    /// First `depth` levels of this schedule.
    pub fn truncated(&self, depth: usize) -> Result<Self> {
        self.check_depth(depth)?;
        let mut blocks = Vec::new();
        let mut left = depth;
        for (op, n) in &self.blocks {
            if left == 0 {
                break;
            }
            let take = (*n).min(left);
            blocks.push((Arc::clone(op), take));
            left -= take;
        }
        Self::new(blocks, self.initial.clone())
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn blocks(&self) -> &[(Arc<RbOperator<T>>, usize)] {
        &self.blocks
    }

    pub fn initial(&self) -> &ScalarFunc<T> {
        &self.initial
    }

    /// Uniform contraction bound `s = max_k Lip(T_k)`.
    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    /// Operator at level `k` (1-based, as in `T_1 … T_K`).
    pub fn level(&self, k: usize) -> &RbOperator<T> {
        &self.blocks[self.levels[k - 1]].0
    }

    /// Shared handle to the operator at level `k`.
    pub fn level_shared(&self, k: usize) -> Arc<RbOperator<T>> {
        Arc::clone(&self.blocks[self.levels[k - 1]].0)
    }

    /// True when every level is the same operator.
    pub fn is_stationary(&self) -> bool {
        let first = &self.blocks[0].0;
        self.blocks
            .iter()
            .all(|(op, _)| Arc::ptr_eq(op, first) || **op == **first)
    }

    fn check_depth(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.depth() {
            return Err(Error::Structural(format!(
                "truncation depth {k} outside 1..={}",
                self.depth()
            )));
        }
        Ok(())
    }

    /// `Ψ_K(f₀)(x)` at full depth.
    pub fn eval_backward(&self, x: T) -> Result<T> {
        self.eval_truncated(x, self.depth())
    }

    /// `Ψ_k(f₀)(x)` for `1 <= k <= depth`.
    pub fn eval_truncated(&self, x: T, k: usize) -> Result<T> {
        check_unit("backward trajectory", x)?;
        self.check_depth(k)?;
        Ok(self.eval_with(x, k, &mut Vec::with_capacity(k)))
    }

    fn eval_with(&self, x: T, k: usize, path: &mut Vec<(usize, T, T)>) -> T {
        path.clear();
        let mut xk = x;
        for lvl in 1..=k {
            let (i, y) = self.level(lvl).descend(xk);
            path.push((i, xk, y));
            xk = y;
        }
        let mut v = self.initial.value(xk);
        for (lvl, &(i, xx, y)) in path.iter().enumerate().rev() {
            v = self.level(lvl + 1).level_value(i, xx, y, v);
        }
        v
    }

    /// `Ψ_K(f₀)` sampled at full depth.
    pub fn sample_backward(&self, grid: &[T]) -> Result<SampledFunction<T>> {
        self.sample_truncated(grid, self.depth())
    }

    pub fn sample_truncated(&self, grid: &[T], k: usize) -> Result<SampledFunction<T>> {
        self.check_depth(k)?;
        check_grid(grid)?;
        let mut path = Vec::with_capacity(k);
        let values = grid.iter().map(|&x| self.eval_with(x, k, &mut path)).collect();
        Ok(SampledFunction {
            grid: grid.to_vec(),
            values,
        })
    }

    /// `Σ_{k=1}^{m} Π_{j<=k} Lip(T_j)` for `m = 1..=depth`.
    pub fn summability_partial_sums(&self) -> Vec<T> {
        let mut prod = T::one();
        let mut acc = T::zero();
        (1..=self.depth())
            .map(|k| {
                prod = prod * self.level(k).lipschitz_sup();
                acc = acc + prod;
                acc
            })
            .collect()
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Structural("empty grid".into()));
    }
    for &x in grid {
        check_unit("grid point", x)?;
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Structural("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `n` equally spaced points from 0 to 1 inclusive.
pub fn uniform_grid<T: Real>(n: usize) -> Vec<T> {
    assert!(n >= 2, "uniform grid needs at least two points");
    let d = T::from_usize_lossy(n - 1);
    (0..n).map(|j| T::from_usize_lossy(j) / d).collect()
}

/// Discrete view of a function: values on a strictly increasing grid in `[0,1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction<T> {
    grid: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> SampledFunction<T> {
    pub fn new(grid: Vec<T>, values: Vec<T>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Structural(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        check_grid(&grid)?;
        Ok(SampledFunction { grid, values })
    }

    /// Samples any function on the grid.
    pub fn from_fn<F: Fn(T) -> T>(grid: Vec<T>, f: F) -> Result<Self> {
        check_grid(&grid)?;
        let values = grid.iter().map(|&x| f(x)).collect();
        Ok(SampledFunction { grid, values })
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.grid.iter().copied().zip(self.values.iter().copied())
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }

    /// Max absolute difference; grids must match.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.grid != other.grid {
            return Err(Error::Structural("sampled functions on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max))
    }

    /// Piecewise-linear interpolant of the samples (grid must span `[0,1]`).
    pub fn interpolant(&self) -> Result<ScalarFunc<T>> {
        ScalarFunc::piecewise_linear(self.points().collect())
    }
}

/// `T^k(f₀)(x)` by direct repeated application of one operator.
pub fn eval_forward_stationary<T: Real>(
    op: &RbOperator<T>,
    initial: &ScalarFunc<T>,
    k: usize,
    x: T,
) -> Result<T> {
    check_unit("forward iterate", x)?;
    if k == 0 {
        return Err(Error::Structural("forward iterate needs k >= 1".into()));
    }
    fn rec<T: Real>(op: &RbOperator<T>, f0: &ScalarFunc<T>, k: usize, x: T) -> T {
        if k == 0 {
            return f0.value(x);
        }
        let (i, y) = op.descend(x);
        op.level_value(i, x, y, rec(op, f0, k - 1, y))
    }
    Ok(rec(op, initial, k, x))
}

/// Radius of a sup-norm ball around 0 mapped into itself by every level:
/// `(max‖f‖ + s·max‖b‖)/(1-s)` for interpolation operators, `M/(1-s)` with
/// `M = max sup|q_i|` for general ones.
pub fn invariant_ball_radius<T: Real>(sched: &OperatorSchedule<T>) -> Result<T> {
    let s = sched.lipschitz();
    if !(s < T::one()) {
        return Err(Error::ContractionViolation {
            branch: 0,
            sup: s.as_f64(),
        });
    }
    let mut seed_sup = None::<T>;
    let mut base_sup = T::zero();
    let mut offset_sup = T::zero();
    for (op, _) in sched.blocks() {
        match op.form() {
            OperatorForm::Interp { seed, base } => {
                seed_sup = Some(seed_sup.unwrap_or_else(T::zero).max(seed.sup_abs()));
                base_sup = base_sup.max(base.sup_abs());
            }
            OperatorForm::General { .. } => offset_sup = offset_sup.max(op.offset_bound()),
        }
    }
    let m = match seed_sup {
        Some(fs) => offset_sup.max(fs + s * base_sup),
        None => offset_sup,
    };
    Ok(m / (T::one() - s))
}

/// Smallest `K` whose a-priori tail `2 r s^K / (1-s)` is below `target`.
pub fn default_depth<T: Real>(s: T, r: T, target: T) -> usize {
    if s <= T::zero() || r <= T::zero() {
        return 1;
    }
    let k = ((target * (T::one() - s) / (T::lit(2.0) * r)).ln() / s.ln()).ceil();
    k.to_usize().unwrap_or(1).max(1)
}

/// Upper bound on `‖Ψ_K(f₀) - f*‖_∞` for `f₀` in the invariant ball.
pub fn tail_bound<T: Real>(s: T, r: T, k: usize) -> T {
    T::lit(2.0) * r * s.powi(k as i32)
}

/// Decay table of successive truncations.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport<T> {
    pub depths: Vec<usize>,
    /// `d_K = sup |Ψ_{K+1}(f₀) - Ψ_K(f₀)|` on the probe grid.
    pub distances: Vec<T>,
    /// `exp` of the least-squares slope of `ln d_K` against `K`.
    pub fitted_rate: Option<T>,
    pub uniform_bound: T,
    /// `s / (1 - s)`.
    pub summability_bound: T,
    /// Partial sums at each probed depth.
    pub partial_sums: Vec<T>,
    pub radius: T,
    /// Largest `‖Ψ_K(f₀)‖_∞` over the probed depths.
    pub max_sup_norm: T,
    /// A-priori distance to the limit at each probed depth.
    pub tail_bounds: Vec<T>,
}

impl<T: Real> ConvergenceReport<T> {
    pub fn within_ball(&self, tol: T) -> bool {
        self.max_sup_norm <= self.radius + tol
    }
}

/// Least-squares geometric rate from `(K, d_K)` pairs, ignoring values at the
/// floating point floor.
pub fn fit_geometric_rate<T: Real>(depths: &[usize], distances: &[T]) -> Option<T> {
    let floor = T::lit(RATE_FIT_FLOOR_EPS) * T::epsilon();
    let pts: Vec<(T, T)> = depths
        .iter()
        .zip(distances)
        .filter(|(_, &d)| d > floor)
        .map(|(&k, &d)| (T::from_usize_lossy(k), d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let sxy = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.1 - my));
    let sxx = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.0 - mx));
    Some((sxy / sxx).exp())
}

pub fn convergence_report<T: Real>(
    sched: &OperatorSchedule<T>,
    grid: &[T],
    depths: &[usize],
) -> Result<ConvergenceReport<T>> {
    if depths.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "convergence report needs at least 2 depths, got {}",
            depths.len()
        )));
    }
    if depths[0] == 0 || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Structural(
            "depths must be positive and strictly increasing".into(),
        ));
    }
    let last = *depths.last().unwrap();
    if last + 1 > sched.depth() {
        return Err(Error::InsufficientData(format!(
            "depth {} needed but schedule has {}",
            last + 1,
            sched.depth()
        )));
    }
    let s = sched.lipschitz();
    let radius = invariant_ball_radius(sched)?;
    let sums = sched.summability_partial_sums();
    let mut distances = Vec::with_capacity(depths.len());
    let mut max_sup = T::zero();
    for &k in depths {
        let a = sched.sample_truncated(grid, k)?;
        let b = sched.sample_truncated(grid, k + 1)?;
        max_sup = max_sup.max(a.sup_norm()).max(b.sup_norm());
        distances.push(a.sup_distance(&b)?);
    }
    Ok(ConvergenceReport {
        depths: depths.to_vec(),
        fitted_rate: fit_geometric_rate(depths, &distances),
        distances,
        uniform_bound: s,
        summability_bound: s / (T::one() - s),
        partial_sums: depths.iter().map(|&k| sums[k - 1]).collect(),
        radius,
        max_sup_norm: max_sup,
        tail_bounds: depths.iter().map(|&k| tail_bound(s, radius, k)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, Named};
    use crate::func::Partition;

    fn named(n: Named) -> Arc<RbOperator<f64>> {
        Arc::new(catalog::make_named(n).operator)
    }

    fn square_interp() -> Arc<RbOperator<f64>> {
        Arc::new(catalog::square_interp_operator())
    }

    #[test]
    fn backward_examples() {
        let t = OperatorSchedule::stationary(named(Named::Takagi), 40, ScalarFunc::zero()).unwrap();
        assert!((t.eval_backward(0.5).unwrap() - 1.0).abs() <= 1e-9);
        let q =
            OperatorSchedule::stationary(named(Named::Quadratic), 20, ScalarFunc::zero()).unwrap();
        assert!((q.eval_backward(0.5).unwrap() - 1.0).abs() <= 1e-9);
        assert!(q.eval_backward(1.5).is_err());

        let op = square_interp();
        let base = match op.form() {
            OperatorForm::Interp { base, .. } => base.clone(),
            _ => unreachable!(),
        };
        let s = OperatorSchedule::stationary(op.clone(), 1, base).unwrap();
        for (x, y) in op.interpolation_nodes().unwrap().knots {
            assert_eq!(s.eval_backward(x).unwrap(), y);
        }
    }

    #[test]
    fn zero_depth_is_rejected() {
        assert!(OperatorSchedule::stationary(named(Named::Takagi), 0, ScalarFunc::zero()).is_err());
        let t = OperatorSchedule::stationary(named(Named::Takagi), 3, ScalarFunc::zero()).unwrap();
        assert!(t.eval_truncated(0.2, 0).is_err());
        assert!(t.eval_truncated(0.2, 4).is_err());
    }

    #[test]
    fn sample_examples() {
        let q =
            OperatorSchedule::stationary(named(Named::Quadratic), 20, ScalarFunc::zero()).unwrap();
        let s = q.sample_backward(&uniform_grid(1025)).unwrap();
        let err = s
            .points()
            .map(|(x, v)| (v - 4.0 * x * (1.0 - x)).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-9, "{err}");

        let h = catalog::hybrid_takagi_quadratic(3).unwrap();
        assert_eq!(h.depth(), 30);
        let s = h.sample_backward(&uniform_grid(513)).unwrap();
        assert!(s.values().iter().all(|v| v.is_finite()));
        assert!(s.sup_norm() <= invariant_ball_radius(&h).unwrap());
        assert!(q.sample_backward(&[0.5, 0.25]).is_err());
    }

    #[test]
    fn forward_examples() {
        let t = named(Named::Takagi);
        let c = named(Named::Casino);
        let zero = ScalarFunc::zero();
        assert_eq!(eval_forward_stationary(&t, &zero, 1, 0.25).unwrap(), 0.5);
        assert_eq!(eval_forward_stationary(&c, &zero, 2, 1.0).unwrap(), 0.9375);
        let sched = OperatorSchedule::stationary(c.clone(), 12, ScalarFunc::identity()).unwrap();
        for j in 0..100 {
            let x = (j as f64 * 0.618_033_988_75).fract();
            let fwd = eval_forward_stationary(&c, &ScalarFunc::identity(), 12, x).unwrap();
            assert_eq!(fwd, sched.eval_backward(x).unwrap());
        }
    }

    #[test]
    fn report_examples() {
        let t = OperatorSchedule::stationary(named(Named::Takagi), 41, ScalarFunc::zero()).unwrap();
        let depths: Vec<usize> = (1..=8).map(|j| 5 * j).collect();
        let grid = uniform_grid(1001);
        let r = convergence_report(&t, &grid, &depths).unwrap();
        assert!(r.fitted_rate.unwrap() <= 0.55);
        assert!((r.summability_bound - 1.0).abs() <= 1e-12);
        assert!(r.partial_sums.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.within_ball(1e-12));

        let kc = catalog::hybrid_kiesswetter_casino(5).unwrap();
        let r = convergence_report(&kc, &grid, &depths).unwrap();
        assert!(r.fitted_rate.unwrap() <= 0.80);
        assert!((r.summability_bound - 3.0).abs() <= 1e-12);

        assert!(matches!(
            convergence_report(&t, &grid, &[5]),
            Err(Error::InsufficientData(_))
        ));
        assert!(convergence_report(&t, &grid, &[5, 41]).is_err());
    }

    #[test]
    fn radius_examples() {
        let q =
            OperatorSchedule::stationary(named(Named::Quadratic), 5, ScalarFunc::zero()).unwrap();
        assert!((invariant_ball_radius(&q).unwrap() - 4.0 / 3.0).abs() < 1e-15);

        let s = OperatorSchedule::stationary(square_interp(), 5, ScalarFunc::zero()).unwrap();
        assert!((invariant_ball_radius(&s).unwrap() - 13.0 / 7.0).abs() < 1e-14);

        let flat = RbOperator::build_general(
            Partition::halves(),
            vec![ScalarFunc::zero(), ScalarFunc::zero()],
            vec![ScalarFunc::constant(0.5), ScalarFunc::constant(-2.0)],
        )
        .unwrap();
        let f = OperatorSchedule::stationary(Arc::new(flat), 3, ScalarFunc::zero()).unwrap();
        assert_eq!(invariant_ball_radius(&f).unwrap(), 2.0);
    }

    #[test]
    fn default_depth_meets_target() {
        for (s, r) in [(0.5f64, 2.0f64), (0.25, 4.0 / 3.0), (0.75, 2.0)] {
            let k = default_depth(s, r, 1e-9);
            assert!(2.0 * r * s.powi(k as i32) / (1.0 - s) <= 1e-9);
            assert!(2.0 * r * s.powi(k as i32 - 1) / (1.0 - s) > 1e-9);
        }
        assert_eq!(default_depth(0.0, 1.0, 1e-9), 1);
    }

    #[test]
    fn truncation_is_cauchy_for_stationary_schedules() {
        let grid = uniform_grid(DEFAULT_PROBE_POINTS);
        for n in catalog::ALL_NAMED {
            let op = named(n);
            let f0 = catalog::default_initial(n);
            let s = op.lipschitz_sup();
            let sched = OperatorSchedule::stationary(op, 36, f0).unwrap();
            let mut prev = None;
            for k in 5..=35 {
                let a = sched.sample_truncated(&grid, k).unwrap();
                let b = sched.sample_truncated(&grid, k + 1).unwrap();
                let d = a.sup_distance(&b).unwrap();
                if let Some(p) = prev {
                    assert!(d <= s * p * (1.0 + 1e-6), "{n:?} K={k}: {d} > {s}*{p}");
                }
                prev = Some(d);
            }
        }
    }

    #[test]
    fn self_referential_residual() {
        let grid = uniform_grid::<f64>(DEFAULT_PROBE_POINTS);
        for n in catalog::ALL_NAMED {
            let op = named(n);
            let f0 = catalog::default_initial(n);
            let sched = OperatorSchedule::stationary(op.clone(), 21, f0).unwrap();
            let r = invariant_ball_radius(&sched).unwrap();
            let s = op.lipschitz_sup();
            for k in [5usize, 10, 20] {
                for &x in &grid {
                    let tk = op
                        .apply_pointwise(|y| sched.eval_truncated(y, k).unwrap(), x)
                        .unwrap();
                    let next = sched.eval_truncated(x, k + 1).unwrap();
                    assert!((tk - next).abs() <= 1e-12);
                    let cur = sched.eval_truncated(x, k).unwrap();
                    assert!((tk - cur).abs() <= 2.0 * r * s.powi(k as i32));
                }
            }
        }
    }

    #[test]
    fn interpolation_and_endpoints_persist() {
        let op = square_interp();
        let knots = op.interpolation_nodes().unwrap().knots;
        for f0 in [
            ScalarFunc::Polynomial(vec![0.0, 0.0, 1.0]),
            ScalarFunc::identity(),
            ScalarFunc::piecewise_linear(vec![(0.0, 0.0), (0.3, -2.0), (1.0, 1.0)]).unwrap(),
        ] {
            let sched = OperatorSchedule::stationary(op.clone(), 20, f0).unwrap();
            for k in 1..=20 {
                for &(x, y) in &knots {
                    assert!((sched.eval_truncated(x, k).unwrap() - y).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn ball_invariance_for_catalog_schedules() {
        let grid = uniform_grid(DEFAULT_PROBE_POINTS);
        for sched in catalog::catalog_schedules(40).unwrap() {
            let r = invariant_ball_radius(&sched.schedule).unwrap();
            assert!(sched.schedule.initial().sup_abs() <= r);
            for k in 1..=40 {
                let s = sched.schedule.sample_truncated(&grid, k).unwrap();
                assert!(s.sup_norm() <= r + 1e-12, "{} K={k}", sched.name);
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let op: RbOperator<f32> = catalog::make_named_generic(Named::Quadratic).operator;
        let sched = OperatorSchedule::stationary(Arc::new(op), 12, ScalarFunc::zero()).unwrap();
        for x in uniform_grid::<f32>(33) {
            let v = sched.eval_backward(x).unwrap();
            assert!((v - 4.0 * x * (1.0 - x)).abs() < 1e-5);
        }
    }
}
