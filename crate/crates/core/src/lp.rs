//! Contraction analysis in `L^p([0,1])`, `0 < p <= ∞`.
//!
//! For `p >= 1` the metric is `ρ_p(g, h) = ‖g - h‖_p`; for `p < 1` it is
//! `∫|g - h|^p` without the root. Integrals use the composite trapezoid rule.
//!
//! Substituting `x = l_i(y)` on each branch gives
//! `∫|Tg - Th|^p = Σ_i |a_i| ∫|S_i|^p |g - h|^p`, so
//! `(Σ_i |a_i| ‖S_i‖_∞^p)^{1/p}` (no root for `p < 1`) bounds the Lipschitz
//! constant of `T`. This is the `rigorous` value of a [`GammaReport`]. The
//! `literal` value weights `‖S_i‖_p^p` by the Lipschitz constant of
//! `D l_i^{-1}`, which is zero for affine branches.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rb_operator::RbOperator;
use crate::real::Real;
use crate::trajectory::{uniform_grid, OperatorSchedule, SampledFunction};

/// Grid size for quadrature and probe functions.
pub const LP_GRID_POINTS: usize = 2049;
/// Knots of the random piecewise-linear probe functions.
pub const PROBE_KNOTS: usize = 33;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Exponent `p` in `(0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> PNorm<T> {
    pub fn new(p: T) -> Result<Self> {
        if p.is_infinite() && p > T::zero() {
            return Ok(PNorm::Infinity);
        }
        if !(p > T::zero()) {
            return Err(Error::domain("p", p.as_f64(), "p > 0"));
        }
        Ok(PNorm::Finite(p))
    }

    pub fn value(&self) -> T {
        match self {
            PNorm::Finite(p) => *p,
            PNorm::Infinity => T::infinity(),
        }
    }

    fn takes_root(&self) -> bool {
        matches!(self, PNorm::Finite(p) if *p >= T::one())
    }
}

impl<T: Real> fmt::Display for PNorm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Infinity => f.write_str("inf"),
        }
    }
}

impl<T: Real> FromStr for PNorm<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(PNorm::Infinity),
            t => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| Error::domain("p", f64::NAN, format!("a number or \"inf\", got {t:?}")))?;
                PNorm::new(T::lit(p))
            }
        }
    }
}

fn trapezoid<T: Real>(grid: &[T], vals: impl Iterator<Item = T>) -> T {
    let mut acc = T::zero();
    let mut prev: Option<(T, T)> = None;
    for (&x, v) in grid.iter().zip(vals) {
        if let Some((px, pv)) = prev {
            acc = acc + (x - px) * (pv + v) / T::lit(2.0);
        }
        prev = Some((x, v));
    }
    acc
}

/// `∫|d|^p` (`p` finite) or `max|d|` over a grid.
fn integral_power<T: Real>(grid: &[T], diff: &[T], p: PNorm<T>) -> T {
    match p {
        PNorm::Infinity => diff.iter().map(|d| d.abs()).fold(T::zero(), T::max),
        PNorm::Finite(e) => trapezoid(grid, diff.iter().map(|&d| abs_pow(d, e))),
    }
}

fn finish<T: Real>(raw: T, p: PNorm<T>) -> T {
    match p {
        PNorm::Finite(e) if p.takes_root() => raw.powf(T::one() / e),
        _ => raw,
    }
}

/// `ρ_p(g, h)` by composite trapezoid quadrature on the shared grid.
pub fn rho_p<T: Real>(g: &SampledFunction<T>, h: &SampledFunction<T>, p: PNorm<T>) -> Result<T> {
    if g.grid() != h.grid() {
        return Err(Error::Structural("ρ_p needs identical grids".into()));
    }
    let diff: Vec<T> = g.values().iter().zip(h.values()).map(|(a, b)| *a - *b).collect();
    Ok(finish(integral_power(g.grid(), &diff, p), p))
}

/// Contraction constants of one operator in `ρ_p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaReport<T> {
    pub p: PNorm<T>,
    pub literal: T,
    pub rigorous: T,
    /// Largest observed ratio `ρ_p(Tg, Th) / ρ_p(g, h)`.
    pub empirical: T,
    /// `rigorous < 1`.
    pub contraction: bool,
    /// The literal constant is below the observed ratio.
    pub literal_understates: bool,
}

/// Literal and change-of-variables constants (no sampling).
pub fn gamma_bounds<T: Real>(op: &RbOperator<T>, p: PNorm<T>) -> (T, T) {
    let sups = op.scaling_sups();
    match p {
        PNorm::Infinity => {
            let s = sups.iter().copied().fold(T::zero(), T::max);
            (s, s)
        }
        PNorm::Finite(e) => {
            let grid = uniform_grid::<T>(LP_GRID_POINTS);
            // Lipschitz constant of D l_i^{-1}: zero for affine l_i.
            let l_inv_deriv_lip = T::zero();
            let literal: T = op
                .scalings()
                .iter()
                .map(|s| {
                    let vals: Vec<T> = grid.iter().map(|&y| s.value(y)).collect();
                    integral_power(&grid, &vals, p) * l_inv_deriv_lip
                })
                .fold(T::zero(), |a, b| a + b);
            let rigorous = op
                .partition()
                .branches()
                .iter()
                .zip(sups)
                .map(|(l, s)| l.slope().abs() * s.powf(e))
                .fold(T::zero(), |a, b| a + b);
            (finish(literal, p), finish(rigorous, p))
        }
    }
}

/// [`GammaReport`] with [`DEFAULT_TRIALS`] probe pairs from [`DEFAULT_SEED`].
pub fn gamma_p<T: Real>(op: &RbOperator<T>, p: PNorm<T>) -> GammaReport<T> {
    gamma_p_with(op, p, DEFAULT_TRIALS, DEFAULT_SEED).expect("trials >= 1")
}

pub fn gamma_p_with<T: Real>(op: &RbOperator<T>, p: PNorm<T>, trials: usize, seed: u64) -> Result<GammaReport<T>> {
    let (literal, rigorous) = gamma_bounds(op, p);
    let empirical = empirical_lipschitz(op, p, trials, seed)?;
    let tol = T::lit(1e-9);
    Ok(GammaReport {
        p,
        literal,
        rigorous,
        empirical,
        contraction: rigorous < T::one(),
        literal_understates: literal + tol < empirical,
    })
}

/// `|d|^p` with exact shortcuts for common exponents.
#[inline]
fn abs_pow<T: Real>(d: T, e: T) -> T {
    let a = d.abs();
    if e == T::one() {
        a
    } else if e == T::lit(2.0) {
        a * a
    } else if e == T::lit(0.5) {
        a.sqrt()
    } else {
        a.powf(e)
    }
}

/// `(Tg)(l_i(y_j)) = offset[i][j] + gain[i][j] * g(y_j)` on the probe grid.
struct BranchTable<T> {
    offset: Vec<Vec<T>>,
    gain: Vec<Vec<T>>,
    slopes: Vec<T>,
}

impl<T: Real> BranchTable<T> {
    fn new(op: &RbOperator<T>, grid: &[T]) -> Self {
        let n = op.branch_count();
        let mut offset = Vec::with_capacity(n);
        let mut gain = Vec::with_capacity(n);
        for i in 0..n {
            let o: Vec<T> = grid.iter().map(|&y| op.branch_value(i, y, T::zero())).collect();
            let g = grid
                .iter()
                .zip(&o)
                .map(|(&y, &o)| op.branch_value(i, y, T::one()) - o)
                .collect();
            offset.push(o);
            gain.push(g);
        }
        BranchTable {
            offset,
            gain,
            slopes: op.partition().branches().iter().map(|l| l.slope().abs()).collect(),
        }
    }

    /// `ρ_p(Tg, Th)` with `Tg`, `Th` sampled on the images `l_i(grid)` of the
    /// probe grid, using each branch's own value at shared endpoints.
    fn image_rho(&self, grid: &[T], g: &[T], h: &[T], p: PNorm<T>) -> T {
        let mut raw = T::zero();
        for ((o, k), &a) in self.offset.iter().zip(&self.gain).zip(&self.slopes) {
            let tg = |j: usize, v: T| o[j] + k[j] * v;
            let part = match p {
                PNorm::Infinity => (0..grid.len())
                    .map(|j| (tg(j, g[j]) - tg(j, h[j])).abs())
                    .fold(T::zero(), T::max),
                PNorm::Finite(e) => {
                    let mut acc = T::zero();
                    let mut prev = abs_pow(tg(0, g[0]) - tg(0, h[0]), e);
                    for j in 1..grid.len() {
                        let cur = abs_pow(tg(j, g[j]) - tg(j, h[j]), e);
                        acc = acc + (grid[j] - grid[j - 1]) * (prev + cur) / T::lit(2.0);
                        prev = cur;
                    }
                    acc
                }
            };
            raw = match p {
                PNorm::Infinity => raw.max(part),
                PNorm::Finite(_) => raw + a * part,
            };
        }
        finish(raw, p)
    }
}

fn random_pl<T: Real>(rng: &mut ChaCha8Rng, grid: &[T]) -> Vec<T> {
    let knots: Vec<f64> = (0..PROBE_KNOTS).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let last = (PROBE_KNOTS - 1) as f64;
    grid.iter()
        .map(|&x| {
            let t = x.as_f64() * last;
            let k = (t.floor() as usize).min(PROBE_KNOTS - 2);
            let w = t - k as f64;
            T::lit(knots[k] * (1.0 - w) + knots[k + 1] * w)
        })
        .collect()
}

/// Tent of height 1 on `[lo, hi]`.
fn bump<T: Real>(grid: &[T], lo: T, hi: T) -> Vec<T> {
    let mid = (lo + hi) / T::lit(2.0);
    let half = (hi - lo) / T::lit(2.0);
    grid.iter()
        .map(|&x| (T::one() - (x - mid).abs() / half).max(T::zero()))
        .collect()
}

/// Largest `ρ_p(Tg, Th) / ρ_p(g, h)` over `trials` random piecewise-linear
/// pairs plus deterministic pairs: a constant difference, tents on each
/// branch image and tents around the maximizers of each `|S_i|`. A lower
/// bound for the Lipschitz constant of `T` in `ρ_p`.
pub fn empirical_lipschitz<T: Real>(op: &RbOperator<T>, p: PNorm<T>, trials: usize, seed: u64) -> Result<T> {
    if trials == 0 {
        return Err(Error::domain("empirical Lipschitz", 0.0, "trials >= 1"));
    }
    let grid = uniform_grid::<T>(LP_GRID_POINTS);
    let zero = vec![T::zero(); grid.len()];
    let mut pairs: Vec<(Vec<T>, Vec<T>)> = vec![(vec![T::one(); grid.len()], zero.clone())];
    let width = T::lit(1.0 / 16.0);
    for l in op.partition().branches() {
        let (lo, hi) = l.image();
        pairs.push((bump(&grid, lo, hi), zero.clone()));
    }
    for s in op.scalings() {
        let (mut best, mut at) = (T::neg_infinity(), T::zero());
        for &y in &grid {
            let v = s.value(y).abs();
            if v > best {
                best = v;
                at = y;
            }
        }
        pairs.push((bump(&grid, at - width, at + width), zero.clone()));
    }

    let table = BranchTable::new(op, &grid);
    let mut diff = vec![T::zero(); grid.len()];
    let mut ratio = |g: &[T], h: &[T]| -> Option<T> {
        for (d, (a, b)) in diff.iter_mut().zip(g.iter().zip(h)) {
            *d = *a - *b;
        }
        let den = finish(integral_power(&grid, &diff, p), p);
        (den > T::zero()).then(|| table.image_rho(&grid, g, h, p) / den)
    };

    let mut best = T::zero();
    for (g, h) in &pairs {
        if let Some(r) = ratio(g, h) {
            best = best.max(r);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let g = random_pl(&mut rng, &grid);
        let h = random_pl(&mut rng, &grid);
        if let Some(r) = ratio(&g, &h) {
            best = best.max(r);
        }
    }
    Ok(best)
}

/// Outcome of [`lp_condition_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct LpConditionReport<T> {
    pub p: PNorm<T>,
    pub m: T,
    /// Largest `ρ_p(q_i, 0)` over all levels and branches (for `p = ∞`, the
    /// certified bound on `sup |q_i|`).
    pub q_max: T,
    /// Largest rigorous `γ_p` over all levels.
    pub gamma: T,
    pub q_condition: bool,
    pub gamma_condition: bool,
    /// `M / (1 - γ_p)` when both conditions hold.
    pub radius: Option<T>,
}

impl<T: Real> LpConditionReport<T> {
    pub fn passes(&self) -> bool {
        self.q_condition && self.gamma_condition
    }
}

/// Checks `ρ_p(q_i, 0) < M` for every branch offset and `γ_p < 1` for every
/// level, and reports the radius `M / (1 - γ_p)` of the invariant ball.
pub fn lp_condition_check<T: Real>(sched: &OperatorSchedule<T>, p: PNorm<T>, m: T) -> Result<LpConditionReport<T>> {
    if !(m > T::zero()) {
        return Err(Error::domain("M", m.as_f64(), "M > 0"));
    }
    let grid = uniform_grid::<T>(LP_GRID_POINTS);
    let mut q_max = T::zero();
    let mut gamma = T::zero();
    for (op, _) in sched.blocks() {
        gamma = gamma.max(gamma_bounds(op, p).1);
        let q = match p {
            PNorm::Infinity => op.offset_bound(),
            PNorm::Finite(_) => (0..op.branch_count())
                .map(|i| {
                    let vals: Vec<T> = grid.iter().map(|&y| op.q_value(i, y)).collect();
                    finish(integral_power(&grid, &vals, p), p)
                })
                .fold(T::zero(), T::max),
        };
        q_max = q_max.max(q);
    }
    let q_condition = q_max < m;
    let gamma_condition = gamma < T::one();
    Ok(LpConditionReport {
        p,
        m,
        q_max,
        gamma,
        q_condition,
        gamma_condition,
        radius: (q_condition && gamma_condition).then(|| m / (T::one() - gamma)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, Named, ALL_NAMED};
    use crate::func::{Partition, ScalarFunc};
    use crate::trajectory::fit_geometric_rate;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn ps() -> [PNorm<f64>; 4] {
        [PNorm::Finite(0.5), PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Infinity]
    }

    fn sampled(vals: Vec<f64>) -> SampledFunction<f64> {
        SampledFunction::new(uniform_grid(vals.len()), vals).unwrap()
    }

    fn named(n: Named) -> RbOperator<f64> {
        catalog::make_named(n).operator
    }

    #[test]
    fn rho_examples() {
        let one = sampled(vec![1.0; 101]);
        let zero = sampled(vec![0.0; 101]);
        assert_eq!(rho_p(&one, &one, PNorm::Finite(2.0)).unwrap(), 0.0);
        assert!((rho_p(&one, &zero, PNorm::Finite(2.0)).unwrap() - 1.0).abs() < 1e-14);
        assert!((rho_p(&one, &zero, PNorm::Finite(0.5)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(rho_p(&one, &zero, PNorm::Infinity).unwrap(), 1.0);
        assert!(rho_p(&one, &sampled(vec![0.0; 11]), PNorm::Infinity).is_err());
    }

    #[test]
    fn pnorm_parsing() {
        assert_eq!("inf".parse::<PNorm<f64>>().unwrap(), PNorm::Infinity);
        assert_eq!("0.5".parse::<PNorm<f64>>().unwrap(), PNorm::Finite(0.5));
        assert!("0".parse::<PNorm<f64>>().is_err());
        assert!("-2".parse::<PNorm<f64>>().is_err());
        assert!("x".parse::<PNorm<f64>>().is_err());
        assert_eq!(PNorm::new(f64::INFINITY).unwrap(), PNorm::Infinity);
    }

    #[test]
    fn gamma_examples() {
        let casino = gamma_p(&named(Named::Casino), PNorm::Infinity);
        assert_eq!(casino.literal, 0.75);
        let quad = gamma_bounds(&named(Named::Quadratic), PNorm::Finite(2.0));
        assert!((quad.1 - 0.25).abs() < 1e-15);
        let flat = RbOperator::build_general(
            Partition::halves(),
            vec![ScalarFunc::zero(), ScalarFunc::zero()],
            vec![ScalarFunc::identity(), ScalarFunc::constant(1.0)],
        )
        .unwrap();
        for p in ps() {
            let r = gamma_p_with(&flat, p, 10, 1).unwrap();
            assert_eq!((r.literal, r.rigorous, r.empirical), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn takagi_sup_factor_is_attained() {
        let e = empirical_lipschitz(&named(Named::Takagi), PNorm::Infinity, 1000, DEFAULT_SEED).unwrap();
        assert!(e > 0.49 && e <= 0.5 + 1e-12, "{e}");
        assert!(empirical_lipschitz(&named(Named::Takagi), PNorm::Infinity, 0, 1).is_err());
    }

    #[test]
    fn soundness_and_sup_consistency() {
        let mut ops: Vec<RbOperator<f64>> = ALL_NAMED.iter().map(|&n| named(n)).collect();
        ops.push(catalog::square_interp_operator());
        for op in &ops {
            let inf = gamma_bounds(op, PNorm::Infinity);
            assert!((inf.0 - op.lipschitz_sup()).abs() <= 1e-12);
            for p in ps() {
                let r = gamma_p_with(op, p, 200, 7).unwrap();
                assert!(r.empirical <= r.rigorous + 1e-9, "{p}: {r:?}");
                assert!(r.contraction);
            }
        }
    }

    #[test]
    fn literal_constant_is_flagged_for_affine_branches() {
        let r = gamma_p_with(&named(Named::Casino), PNorm::Finite(2.0), 20, 3).unwrap();
        assert_eq!(r.literal, 0.0);
        assert!(r.literal_understates);
    }

    #[test]
    fn condition_examples() {
        let quad = Arc::new(named(Named::Quadratic));
        let sched = OperatorSchedule::stationary(quad, 20, ScalarFunc::zero()).unwrap();
        let r = lp_condition_check(&sched, PNorm::Infinity, 2.0).unwrap();
        assert!(r.passes());
        assert!((r.radius.unwrap() - 8.0 / 3.0).abs() < 1e-14);

        let small = lp_condition_check(&sched, PNorm::Finite(1.0), 0.25).unwrap();
        assert!(!small.q_condition && small.radius.is_none());
        assert!(lp_condition_check(&sched, PNorm::Infinity, 0.0).is_err());
    }

    #[test]
    fn sup_norm_one_is_rejected_before_any_check() {
        let err = RbOperator::build_general(
            Partition::halves(),
            vec![ScalarFunc::constant(1.0f64), ScalarFunc::constant(0.5)],
            vec![ScalarFunc::zero(), ScalarFunc::zero()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::ContractionViolation { branch: 0, .. }));

        let near = RbOperator::build_general(
            Partition::halves(),
            vec![ScalarFunc::constant(0.999f64), ScalarFunc::constant(0.5)],
            vec![ScalarFunc::zero(), ScalarFunc::zero()],
        )
        .unwrap();
        let sched = OperatorSchedule::stationary(Arc::new(near), 3, ScalarFunc::zero()).unwrap();
        let inf = lp_condition_check(&sched, PNorm::Infinity, 1.0).unwrap();
        assert!(inf.passes());
        assert!((inf.gamma - 0.999).abs() < 1e-15);
        assert!((inf.radius.unwrap() - 1000.0).abs() < 1e-9);
        // (√0.999 + √0.5) / 2 without a root for p < 1.
        let half = lp_condition_check(&sched, PNorm::Finite(0.5), 1.0).unwrap();
        assert!((half.gamma - (0.999f64.sqrt() + 0.5f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rho_distances_decay_at_gamma() {
        let grid = uniform_grid::<f64>(LP_GRID_POINTS);
        let depths: Vec<usize> = (2..=10).collect();
        for name in [Named::Quadratic, Named::Casino, Named::Kiesswetter] {
            let op = Arc::new(named(name));
            let sched =
                OperatorSchedule::stationary(op.clone(), 11, catalog::default_initial(name)).unwrap();
            for p in ps() {
                let check = lp_condition_check(&sched, p, 10.0).unwrap();
                assert!(check.passes());
                let ds: Vec<f64> = depths
                    .iter()
                    .map(|&k| {
                        let a = sched.sample_truncated(&grid, k).unwrap();
                        let b = sched.sample_truncated(&grid, k + 1).unwrap();
                        rho_p(&b, &a, p).unwrap()
                    })
                    .collect();
                let rate = fit_geometric_rate(&depths, &ds).unwrap();
                assert!(rate <= check.gamma + 0.05, "{name} {p}: {rate} vs {}", check.gamma);
            }
        }
    }

    fn vals() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-3.0f64..3.0, 65)
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in vals(), b in vals(), c in vals(), pi in 0usize..4) {
            let p = ps()[pi];
            let (a, b, c) = (sampled(a), sampled(b), sampled(c));
            let ab = rho_p(&a, &b, p).unwrap();
            let ac = rho_p(&a, &c, p).unwrap();
            let cb = rho_p(&c, &b, p).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
        }
    }
}
