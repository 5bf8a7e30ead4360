//! Scalar functions on `[0,1]`, affine contractions and partitions of the unit
//! interval.
//!
//! Everything here is immutable after construction. Branch indices are
//! zero-based throughout the crate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Grid used when exact polynomial extremum isolation is not available.
const FALLBACK_GRID: usize = 4097;
/// Added to grid maxima so the reported value stays an upper bound.
const FALLBACK_MARGIN: f64 = 1e-9;
/// Above this degree extremum isolation is not attempted.
const MAX_ISOLATION_DEGREE: usize = 48;

#[inline]
pub(crate) fn check_unit<T: Real>(context: &'static str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::domain(context, x.as_f64(), "[0, 1]"))
    }
}

/// Affine map `x -> slope * x + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap1D<T> {
    slope: T,
    offset: T,
}

impl<T: Real> AffineMap1D<T> {
    /// Injective contraction of `[0,1]` into itself.
    pub fn new(slope: T, offset: T) -> Result<Self> {
        let m = Self::raw(slope, offset);
        if !(slope.is_finite() && offset.is_finite()) {
            return Err(Error::Structural("affine map with non-finite data".into()));
        }
        if slope == T::zero() || slope.abs() >= T::one() {
            return Err(Error::Structural(format!(
                "affine slope {} is not a contraction factor in (0, 1)",
                slope
            )));
        }
        let (lo, hi) = m.image();
        if lo < T::zero() || hi > T::one() {
            return Err(Error::Structural(format!(
                "affine image [{lo}, {hi}] is not contained in [0, 1]"
            )));
        }
        Ok(m)
    }

    /// Unvalidated map, for feeding [`partition_validate`] arbitrary data.
    pub fn raw(slope: T, offset: T) -> Self {
        AffineMap1D { slope, offset }
    }

    #[inline]
    pub fn slope(&self) -> T {
        self.slope
    }

    #[inline]
    pub fn offset(&self) -> T {
        self.offset
    }

    #[inline]
    pub fn apply(&self, x: T) -> T {
        self.slope * x + self.offset
    }

    /// Image of `[0,1]`, as `(low, high)`.
    pub fn image(&self) -> (T, T) {
        let a = self.offset;
        let b = self.slope + self.offset;
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Preimage of `y`, which must lie in the image of `[0,1]`.
    pub fn invert(&self, y: T) -> Result<T> {
        let (lo, hi) = self.image();
        if !(y >= lo && y <= hi) {
            return Err(Error::domain(
                "affine inverse",
                y.as_f64(),
                format!("branch image [{lo}, {hi}]"),
            ));
        }
        Ok(self.invert_unchecked(y))
    }

    /// Preimage clamped to `[0,1]`; rounding may otherwise leave it an ulp outside.
    #[inline]
    pub(crate) fn invert_unchecked(&self, y: T) -> T {
        ((y - self.offset) / self.slope).max(T::zero()).min(T::one())
    }
}

/// A single defect found by [`partition_validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    TooFewBranches { count: usize },
    NonContraction { branch: usize, slope: f64 },
    OutsideUnitInterval { branch: usize, low: f64, high: f64 },
    Unordered { branch: usize },
    CoverGap { start: f64, end: f64 },
    InteriorOverlap { first: usize, second: usize, start: f64, end: f64 },
    Normalization { branch: usize, endpoint: f64, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewBranches { count } => {
                write!(f, "a partition needs at least 2 branches, got {count}")
            }
            Violation::NonContraction { branch, slope } => {
                write!(f, "branch {branch}: slope {slope} is not in (0, 1)")
            }
            Violation::OutsideUnitInterval { branch, low, high } => {
                write!(f, "branch {branch}: image [{low}, {high}] leaves [0, 1]")
            }
            Violation::Unordered { branch } => {
                write!(f, "branch {branch} starts left of its predecessor")
            }
            Violation::CoverGap { start, end } => write!(f, "cover gap on ({start}, {end})"),
            Violation::InteriorOverlap {
                first,
                second,
                start,
                end,
            } => write!(
                f,
                "branches {first} and {second} overlap on ({start}, {end})"
            ),
            Violation::Normalization {
                branch,
                endpoint,
                value,
            } => write!(
                f,
                "branch {branch}: image endpoint should be {endpoint}, found {value}"
            ),
        }
    }
}

/// Checks that the maps partition `[0,1]`: contained images covering the
/// interval with disjoint interiors, increasing order, `l_1(0) = 0` and
/// `l_n(1) = 1`. Comparisons are exact.
pub fn partition_validate<T: Real>(maps: &[AffineMap1D<T>]) -> Vec<Violation> {
    let mut out = Vec::new();
    if maps.len() < 2 {
        out.push(Violation::TooFewBranches { count: maps.len() });
    }
    for (i, m) in maps.iter().enumerate() {
        let a = m.slope();
        if !(a.is_finite() && a > T::zero() && a < T::one()) {
            out.push(Violation::NonContraction {
                branch: i,
                slope: a.as_f64(),
            });
        }
        let (lo, hi) = m.image();
        if !(lo >= T::zero() && hi <= T::one()) {
            out.push(Violation::OutsideUnitInterval {
                branch: i,
                low: lo.as_f64(),
                high: hi.as_f64(),
            });
        }
    }
    for i in 1..maps.len() {
        if maps[i].image().0 < maps[i - 1].image().0 {
            out.push(Violation::Unordered { branch: i });
        }
    }
    if let Some(first) = maps.first() {
        if first.apply(T::zero()) != T::zero() {
            out.push(Violation::Normalization {
                branch: 0,
                endpoint: 0.0,
                value: first.apply(T::zero()).as_f64(),
            });
        }
    }
    if let Some(last) = maps.last() {
        if last.apply(T::one()) != T::one() {
            out.push(Violation::Normalization {
                branch: maps.len() - 1,
                endpoint: 1.0,
                value: last.apply(T::one()).as_f64(),
            });
        }
    }

    let mut order: Vec<usize> = (0..maps.len()).collect();
    order.sort_by(|&i, &j| {
        maps[i]
            .image()
            .0
            .partial_cmp(&maps[j].image().0)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut reach = T::zero();
    for &i in &order {
        let (lo, hi) = maps[i].image();
        if lo > reach {
            out.push(Violation::CoverGap {
                start: reach.as_f64(),
                end: lo.as_f64(),
            });
        }
        reach = reach.max(hi);
    }
    if reach < T::one() {
        out.push(Violation::CoverGap {
            start: reach.as_f64(),
            end: 1.0,
        });
    }
    for (pi, &i) in order.iter().enumerate() {
        for &j in &order[pi + 1..] {
            let (li, hi) = maps[i].image();
            let (lj, hj) = maps[j].image();
            let start = li.max(lj);
            let end = hi.min(hj);
            if start < end {
                out.push(Violation::InteriorOverlap {
                    first: i.min(j),
                    second: i.max(j),
                    start: start.as_f64(),
                    end: end.as_f64(),
                });
            }
        }
    }
    out
}

/// Ordered affine branches partitioning `[0,1]`.
///
/// Branch `i` owns the half-open interval `[l_i(0), l_i(1))`; the last branch
/// also owns `x = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition<T> {
    branches: Vec<AffineMap1D<T>>,
}

impl<T: Real> Partition<T> {
    pub fn new(branches: Vec<AffineMap1D<T>>) -> Result<Self> {
        let violations = partition_validate(&branches);
        if violations.is_empty() {
            Ok(Partition { branches })
        } else {
            Err(Error::InvalidPartition(violations))
        }
    }

    /// `n` equal branches `l_i(x) = (x + i) / n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPartition(vec![Violation::TooFewBranches {
                count: n,
            }]));
        }
        let nn = T::from_usize_lossy(n);
        let knot = |i: usize| T::from_usize_lossy(i) / nn;
        // Slopes taken as knot differences so that l_i(1) == l_{i+1}(0) exactly.
        let branches = (0..n)
            .map(|i| AffineMap1D::new(knot(i + 1) - knot(i), knot(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(branches)
    }

    pub fn halves() -> Self {
        Self::uniform(2).expect("halves")
    }

    pub fn quarters() -> Self {
        Self::uniform(4).expect("quarters")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    #[inline]
    pub fn branch(&self, i: usize) -> &AffineMap1D<T> {
        &self.branches[i]
    }

    pub fn branches(&self) -> &[AffineMap1D<T>] {
        &self.branches
    }

    /// Largest branch contraction factor.
    pub fn max_slope(&self) -> T {
        self.branches
            .iter()
            .map(|b| b.slope().abs())
            .fold(T::zero(), T::max)
    }

    /// `0 = x_0 < x_1 < ... < x_n = 1` with `x_j = l_j(1)`.
    pub fn knots(&self) -> Vec<T> {
        let mut k = Vec::with_capacity(self.len() + 1);
        k.push(T::zero());
        k.extend(self.branches.iter().map(|b| b.apply(T::one())));
        k
    }

    /// Index of the branch whose half-open image contains `x`.
    pub fn locate(&self, x: T) -> Result<usize> {
        check_unit("partition locate", x)?;
        Ok(self.locate_unchecked(x))
    }

    #[inline]
    pub(crate) fn locate_unchecked(&self, x: T) -> usize {
        let idx = self.branches.partition_point(|b| b.offset() <= x);
        idx.saturating_sub(1)
    }
}

/// Named closed-form functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Zero,
    Identity,
    /// `4x(1-x)`
    Quadratic,
}

/// Evaluable real function on `[0,1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFunc<T> {
    Constant(T),
    /// Coefficients in ascending degree.
    Polynomial(Vec<T>),
    /// Knots `(x_j, y_j)` with `x_0 = 0 < ... < x_last = 1`.
    PiecewiseLinear(Vec<(T, T)>),
    Builtin(Builtin),
}

impl<T: Real> ScalarFunc<T> {
    pub fn zero() -> Self {
        ScalarFunc::Builtin(Builtin::Zero)
    }

    pub fn identity() -> Self {
        ScalarFunc::Builtin(Builtin::Identity)
    }

    pub fn quadratic() -> Self {
        ScalarFunc::Builtin(Builtin::Quadratic)
    }

    pub fn constant(v: T) -> Self {
        ScalarFunc::Constant(v)
    }

    pub fn polynomial(coeffs: Vec<T>) -> Result<Self> {
        let f = ScalarFunc::Polynomial(coeffs);
        f.validate()?;
        Ok(f)
    }

    pub fn piecewise_linear(knots: Vec<(T, T)>) -> Result<Self> {
        let f = ScalarFunc::PiecewiseLinear(knots);
        f.validate()?;
        Ok(f)
    }

    /// Affine function through `(0, f(0))` and `(1, f(1))`.
    pub fn chord_of(f: &ScalarFunc<T>) -> Self {
        let f0 = f.value(T::zero());
        let f1 = f.value(T::one());
        ScalarFunc::Polynomial(vec![f0, f1 - f0])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarFunc::Constant(v) if !v.is_finite() => {
                Err(Error::Structural("non-finite constant".into()))
            }
            ScalarFunc::Polynomial(c) if c.is_empty() || c.iter().any(|v| !v.is_finite()) => Err(
                Error::Structural("polynomial needs finite coefficients".into()),
            ),
            ScalarFunc::PiecewiseLinear(k) => {
                if k.len() < 2 {
                    return Err(Error::Structural(
                        "piecewise-linear function needs at least 2 knots".into(),
                    ));
                }
                if k[0].0 != T::zero() || k[k.len() - 1].0 != T::one() {
                    return Err(Error::Structural(
                        "piecewise-linear knots must span [0, 1] exactly".into(),
                    ));
                }
                if k.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return Err(Error::Structural(
                        "piecewise-linear knots must be strictly increasing".into(),
                    ));
                }
                if k.iter().any(|&(_, y)| !y.is_finite()) {
                    return Err(Error::Structural("non-finite knot value".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Value at `x`, rejecting points outside `[0,1]`.
    pub fn eval(&self, x: T) -> Result<T> {
        check_unit("function evaluation", x)?;
        Ok(self.value(x))
    }

    /// Value at `x` without the domain check.
    pub fn value(&self, x: T) -> T {
        match self {
            ScalarFunc::Constant(v) => *v,
            ScalarFunc::Polynomial(c) => horner(c, x),
            ScalarFunc::PiecewiseLinear(k) => pl_value(k, x),
            ScalarFunc::Builtin(Builtin::Zero) => T::zero(),
            ScalarFunc::Builtin(Builtin::Identity) => x,
            ScalarFunc::Builtin(Builtin::Quadratic) => T::lit(4.0) * x * (T::one() - x),
        }
    }

    /// Ascending coefficients when the function is a polynomial.
    pub fn polynomial_coefficients(&self) -> Option<Vec<T>> {
        match self {
            ScalarFunc::Constant(v) => Some(vec![*v]),
            ScalarFunc::Polynomial(c) => Some(c.clone()),
            ScalarFunc::PiecewiseLinear(_) => None,
            ScalarFunc::Builtin(Builtin::Zero) => Some(vec![T::zero()]),
            ScalarFunc::Builtin(Builtin::Identity) => Some(vec![T::zero(), T::one()]),
            ScalarFunc::Builtin(Builtin::Quadratic) => {
                Some(vec![T::zero(), T::lit(4.0), T::lit(-4.0)])
            }
        }
    }

    /// `Some(v)` when the function is constant.
    pub fn as_constant(&self) -> Option<T> {
        let c = self.polynomial_coefficients()?;
        let (head, tail) = c.split_first()?;
        tail.iter().all(|v| v.is_zero()).then_some(*head)
    }

    /// `sup_{[0,1]} |f|`.
    pub fn sup_abs(&self) -> T {
        match self {
            ScalarFunc::PiecewiseLinear(k) => k.iter().map(|p| p.1.abs()).fold(T::zero(), T::max),
            _ => poly_sup_abs(&self.polynomial_coefficients().unwrap_or_default()),
        }
    }

    /// Lipschitz constant on `[0,1]` (sup of |f'| for polynomials).
    pub fn lipschitz(&self) -> T {
        match self {
            ScalarFunc::PiecewiseLinear(k) => k
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(T::zero(), T::max),
            _ => {
                let c = self.polynomial_coefficients().unwrap_or_default();
                poly_sup_abs(&derivative(&c))
            }
        }
    }
}

#[inline]
fn horner<T: Real>(c: &[T], x: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, &v| acc * x + v)
}

fn pl_value<T: Real>(k: &[(T, T)], x: T) -> T {
    let j = k.partition_point(|p| p.0 <= x);
    if j == 0 {
        return k[0].1;
    }
    if j >= k.len() {
        return k[k.len() - 1].1;
    }
    let (x0, y0) = k[j - 1];
    if x == x0 {
        return y0;
    }
    let (x1, y1) = k[j];
    y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
}

fn derivative<T: Real>(c: &[T]) -> Vec<T> {
    if c.len() <= 1 {
        return vec![T::zero()];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &v)| v * T::from_usize_lossy(i))
        .collect()
}

fn trim<T: Real>(c: &[T]) -> &[T] {
    let mut n = c.len();
    while n > 1 && c[n - 1].is_zero() {
        n -= 1;
    }
    &c[..n]
}

/// Sorted roots of the polynomial strictly inside `(lo, hi)`.
///
/// Roots of `p'` split the interval into monotone pieces, each holding at most
/// one root of `p`, found by bisection. `None` when the data is unusable.
pub(crate) fn poly_roots_in<T: Real>(c: &[T], lo: T, hi: T) -> Option<Vec<T>> {
    let c = trim(c);
    if c.iter().any(|v| !v.is_finite()) || c.len() > MAX_ISOLATION_DEGREE + 1 {
        return None;
    }
    match c.len() {
        0 | 1 => Some(Vec::new()),
        2 => {
            let r = -c[0] / c[1];
            Some(if r > lo && r < hi { vec![r] } else { Vec::new() })
        }
        _ => {
            let crit = poly_roots_in(&derivative(c), lo, hi)?;
            let mut pts = Vec::with_capacity(crit.len() + 2);
            pts.push(lo);
            pts.extend(crit);
            pts.push(hi);
            let mut roots = Vec::new();
            for w in pts.windows(2) {
                let (mut u, mut v) = (w[0], w[1]);
                let (pu, pv) = (horner(c, u), horner(c, v));
                if pv.is_zero() {
                    if v < hi {
                        roots.push(v);
                    }
                    continue;
                }
                if pu.is_zero() || pu.signum() == pv.signum() {
                    continue;
                }
                let su = pu.signum();
                for _ in 0..256 {
                    let m = (u + v) / T::lit(2.0);
                    if m <= u || m >= v {
                        break;
                    }
                    let pm = horner(c, m);
                    if pm.is_zero() {
                        u = m;
                        v = m;
                        break;
                    }
                    if pm.signum() == su {
                        u = m;
                    } else {
                        v = m;
                    }
                }
                roots.push((u + v) / T::lit(2.0));
            }
            roots.dedup();
            Some(roots)
        }
    }
}

/// `sup_{[0,1]} |p|` from values at the endpoints and at the critical points.
pub(crate) fn poly_sup_abs<T: Real>(c: &[T]) -> T {
    if c.is_empty() {
        return T::zero();
    }
    match poly_roots_in(&derivative(c), T::zero(), T::one()) {
        Some(crit) => crit
            .into_iter()
            .chain([T::zero(), T::one()])
            .map(|x| horner(c, x).abs())
            .fold(T::zero(), T::max),
        None => {
            let n = FALLBACK_GRID - 1;
            let m = (0..=n)
                .map(|j| horner(c, T::from_usize_lossy(j) / T::from_usize_lossy(n)).abs())
                .fold(T::zero(), T::max);
            m + T::lit(FALLBACK_MARGIN)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(a: f64, c: f64) -> AffineMap1D<f64> {
        AffineMap1D::raw(a, c)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ScalarFunc::<f64>::quadratic().eval(0.5).unwrap(), 1.0);
        assert_eq!(ScalarFunc::constant(0.0).eval(0.3).unwrap(), 0.0);
        assert_eq!(ScalarFunc::Polynomial(vec![0.0, 1.0]).eval(0.25).unwrap(), 0.25);
        assert!(matches!(
            ScalarFunc::<f64>::identity().eval(1.5),
            Err(Error::Domain { .. })
        ));
        assert!(ScalarFunc::<f64>::identity().eval(f64::NAN).is_err());
    }

    #[test]
    fn piecewise_linear_interpolates() {
        let f = ScalarFunc::piecewise_linear(vec![(0.0, 1.0), (0.25, -1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(f.value(0.125), 0.0);
        assert_eq!(f.value(0.25), -1.0);
        assert_eq!(f.value(1.0), 2.0);
        assert_eq!(f.sup_abs(), 2.0);
        assert_eq!(f.lipschitz(), 8.0);
        assert!(ScalarFunc::piecewise_linear(vec![(0.0, 0.0), (0.5, 0.0)]).is_err());
        assert!(ScalarFunc::piecewise_linear(vec![(0.0, 0.0), (0.5, 0.0), (0.5, 1.0), (1.0, 0.0)])
            .is_err());
    }

    #[test]
    fn affine_examples() {
        assert_eq!(m(0.5, 0.0).apply(1.0), 0.5);
        assert_eq!(m(0.5, 0.5).apply(1.0), 1.0);
        assert_eq!(m(0.25, 0.75).apply(0.0), 0.75);
        assert_eq!(m(0.5, 0.5).invert(0.75).unwrap(), 0.5);
        assert_eq!(m(0.5, 0.0).invert(0.5).unwrap(), 1.0);
        let l = m(0.25, 0.25);
        let y = l.invert(0.5).unwrap();
        assert_eq!(y, 1.0);
        assert_eq!(l.apply(y), 0.5);
        assert!(m(0.5, 0.0).invert(0.75).is_err());
    }

    #[test]
    fn affine_new_rejects_bad_maps() {
        assert!(AffineMap1D::new(1.0, 0.0).is_err());
        assert!(AffineMap1D::new(0.0, 0.0).is_err());
        assert!(AffineMap1D::new(0.5, 0.6).is_err());
        assert!(AffineMap1D::new(-0.5, 0.5).is_ok());
    }

    #[test]
    fn locate_examples() {
        let h = Partition::<f64>::halves();
        assert_eq!(h.locate(0.49).unwrap(), 0);
        assert_eq!(h.locate(0.5).unwrap(), 1);
        assert_eq!(Partition::<f64>::quarters().locate(1.0).unwrap(), 3);
        assert_eq!(h.locate(0.0).unwrap(), 0);
        assert!(h.locate(-0.1).is_err());
    }

    #[test]
    fn validate_examples() {
        assert!(partition_validate(&[m(0.5, 0.0), m(0.5, 0.5)]).is_empty());

        let v = partition_validate(&[m(0.5, 0.0), m(0.5, 0.4)]);
        assert!(v.contains(&Violation::CoverGap {
            start: 0.9,
            end: 1.0
        }));

        let v = partition_validate(&[m(0.6, 0.0), m(0.6, 0.4)]);
        assert_eq!(
            v,
            vec![Violation::InteriorOverlap {
                first: 0,
                second: 1,
                start: 0.4,
                end: 0.6
            }]
        );

        let v = partition_validate(&[m(0.5, 0.5), m(0.5, 0.0)]);
        assert!(v.contains(&Violation::Unordered { branch: 1 }));
        let v = partition_validate(&[m(1.0, 0.0)]);
        assert!(v.contains(&Violation::TooFewBranches { count: 1 }));
        assert!(v.contains(&Violation::NonContraction {
            branch: 0,
            slope: 1.0
        }));
    }

    #[test]
    fn uniform_partitions_are_exact() {
        for n in 2..40 {
            let p = Partition::<f64>::uniform(n).unwrap();
            assert_eq!(p.len(), n);
            let k = p.knots();
            assert_eq!(k[0], 0.0);
            assert_eq!(k[n], 1.0);
        }
        assert!(Partition::<f32>::uniform(7).is_ok());
    }

    #[test]
    fn polynomial_sup_norm() {
        // 4x(1-x) peaks at 1/2.
        assert_eq!(ScalarFunc::<f64>::quadratic().sup_abs(), 1.0);
        assert_eq!(ScalarFunc::<f64>::quadratic().lipschitz(), 4.0);
        // x^3 - x has interior extremum at 1/sqrt(3).
        let p = ScalarFunc::Polynomial(vec![0.0, -1.0, 0.0, 1.0]);
        let expect = 2.0 / (3.0 * 3f64.sqrt());
        assert!((p.sup_abs() - expect).abs() < 1e-15);
        // Degree 6 with several interior extrema against a dense grid.
        let c = vec![0.1, -3.0, 20.0, -55.0, 70.0, -42.0, 9.5];
        let exact = poly_sup_abs(&c);
        let grid = (0..=100_000)
            .map(|j| horner(&c, j as f64 / 100_000.0).abs())
            .fold(0.0, f64::max);
        assert!(exact >= grid - 1e-12 && exact - grid < 1e-8);
    }

    #[test]
    fn polynomial_sup_falls_back_on_high_degree() {
        let mut c = vec![0.0; 60];
        c[59] = 1.0;
        let s = poly_sup_abs(&c);
        assert!(s >= 1.0 && s <= 1.0 + 2e-9);
    }

    #[test]
    fn f32_evaluation() {
        let f = ScalarFunc::<f32>::quadratic();
        assert_eq!(f.eval(0.5f32).unwrap(), 1.0f32);
    }

    fn halves_like() -> impl Strategy<Value = Vec<(f64, f64)>> {
        (2usize..6).prop_map(|n| {
            let p = Partition::<f64>::uniform(n).unwrap();
            p.branches().iter().map(|b| (b.slope(), b.offset())).collect()
        })
    }

    proptest! {
        #[test]
        fn locate_then_invert_roundtrips(n in 2usize..9, x in 0.0f64..=1.0) {
            let p = Partition::<f64>::uniform(n).unwrap();
            let i = p.locate(x).unwrap();
            let b = p.branch(i);
            let y = b.invert(x).unwrap();
            prop_assert!((b.apply(y) - x).abs() <= 1e-14);
        }

        #[test]
        fn perturbed_partitions_are_flagged(
            base in halves_like(),
            which in 0usize..6,
            da in -1e-3f64..1e-3,
            dc in -1e-3f64..1e-3,
        ) {
            let mut maps: Vec<_> = base.iter().map(|&(a, c)| AffineMap1D::raw(a, c)).collect();
            prop_assert!(partition_validate(&maps).is_empty());
            let i = which % maps.len();
            let (a, c) = base[i];
            maps[i] = AffineMap1D::raw(a + da, c + dc);
            let perturbed = maps[i] != AffineMap1D::raw(a, c);
            prop_assert_eq!(partition_validate(&maps).is_empty(), !perturbed);
        }

        #[test]
        fn pl_knots_are_exact(ys in proptest::collection::vec(-5.0f64..5.0, 2..12)) {
            let n = ys.len() - 1;
            let knots: Vec<(f64, f64)> = ys
                .iter()
                .enumerate()
                .map(|(j, &y)| (j as f64 / n as f64, y))
                .collect();
            let f = ScalarFunc::piecewise_linear(knots.clone()).unwrap();
            for (x, y) in knots {
                prop_assert_eq!(f.value(x), y);
            }
        }
    }
}
