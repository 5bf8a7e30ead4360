//! Read-Bajraktarević operators of the affine-in-`y` form
//! `T g (x) = q_i(y) + S_i(y) g(y)`, `y = l_i^{-1}(x)` on the branch of `x`,
//! and their interpolation variant
//! `T g (x) = f(x) + S_i(y) (g(y) - b(y))`.
//!
//! All branch data (`q_i`, `S_i`) is stored in branch-local coordinates `y`.

use crate::error::{Error, Result};
use crate::func::{check_unit, Partition, ScalarFunc};
use crate::real::Real;

/// Allowed endpoint mismatch between seed and base.
pub const BASE_ENDPOINT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorForm<T> {
    /// Free offsets `q_i`. `endpoints` optionally declares `(g(0), g(1))` of the
    /// admissible inputs, which continuity checks need.
    General {
        qs: Vec<ScalarFunc<T>>,
        endpoints: Option<(T, T)>,
    },
    /// Seed `f` and base `b`, inducing `q_i = f∘l_i - S_i·b`.
    Interp {
        seed: ScalarFunc<T>,
        base: ScalarFunc<T>,
    },
}

/// One level of a schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct RbOperator<T> {
    partition: Partition<T>,
    scalings: Vec<ScalarFunc<T>>,
    form: OperatorForm<T>,
    scaling_sups: Vec<T>,
    lipschitz: T,
}

/// Mismatch of the one-sided limits of `T g` at an interior knot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JoinupDefect<T> {
    pub knot: T,
    pub left: T,
    pub right: T,
    pub defect: T,
}

/// Points interpolated by every image of an interpolation-form operator.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationNodes<T> {
    pub knots: Vec<(T, T)>,
}

fn check_scalings<T: Real>(p: &Partition<T>, s: &[ScalarFunc<T>]) -> Result<Vec<T>> {
    if s.len() != p.len() {
        return Err(Error::Structural(format!(
            "{} scaling functions for {} branches",
            s.len(),
            p.len()
        )));
    }
    let mut sups = Vec::with_capacity(s.len());
    for (i, f) in s.iter().enumerate() {
        f.validate()?;
        let sup = f.sup_abs();
        if !(sup < T::one()) {
            return Err(Error::ContractionViolation {
                branch: i,
                sup: sup.as_f64(),
            });
        }
        sups.push(sup);
    }
    Ok(sups)
}

impl<T: Real> RbOperator<T> {
    /// Operator with free offsets `q_i`.
    pub fn build_general(
        partition: Partition<T>,
        scalings: Vec<ScalarFunc<T>>,
        qs: Vec<ScalarFunc<T>>,
    ) -> Result<Self> {
        if qs.len() != partition.len() {
            return Err(Error::Structural(format!(
                "{} offset functions for {} branches",
                qs.len(),
                partition.len()
            )));
        }
        for q in &qs {
            q.validate()?;
        }
        let scaling_sups = check_scalings(&partition, &scalings)?;
        let lipschitz = scaling_sups.iter().copied().fold(T::zero(), T::max);
        Ok(RbOperator {
            partition,
            scalings,
            form: OperatorForm::General {
                qs,
                endpoints: None,
            },
            scaling_sups,
            lipschitz,
        })
    }

    /// Interpolation operator with seed `f` and base the chord of `f`.
    pub fn build_interp(
        partition: Partition<T>,
        scalings: Vec<ScalarFunc<T>>,
        seed: ScalarFunc<T>,
    ) -> Result<Self> {
        seed.validate()?;
        let base = ScalarFunc::chord_of(&seed);
        Self::build_interp_with_base(partition, scalings, seed, base)
    }

    /// Interpolation operator with an explicit base, which must agree with
    /// the seed at 0 and 1.
    pub fn build_interp_with_base(
        partition: Partition<T>,
        scalings: Vec<ScalarFunc<T>>,
        seed: ScalarFunc<T>,
        base: ScalarFunc<T>,
    ) -> Result<Self> {
        seed.validate()?;
        base.validate()?;
        let tol = T::lit(BASE_ENDPOINT_TOL);
        for x in [T::zero(), T::one()] {
            if (seed.value(x) - base.value(x)).abs() > tol {
                return Err(Error::Structural(format!(
                    "base and seed differ at x = {x}"
                )));
            }
        }
        let scaling_sups = check_scalings(&partition, &scalings)?;
        let lipschitz = scaling_sups.iter().copied().fold(T::zero(), T::max);
        Ok(RbOperator {
            partition,
            scalings,
            form: OperatorForm::Interp { seed, base },
            scaling_sups,
            lipschitz,
        })
    }

    /// Declares `(g(0), g(1))` for a general-form operator.
    pub fn with_endpoints(mut self, g0: T, g1: T) -> Result<Self> {
        match &mut self.form {
            OperatorForm::General { endpoints, .. } => {
                *endpoints = Some((g0, g1));
                Ok(self)
            }
            OperatorForm::Interp { .. } => Err(Error::UnsupportedForm(
                "interpolation operators derive endpoints from their seed",
            )),
        }
    }

    pub fn partition(&self) -> &Partition<T> {
        &self.partition
    }

    pub fn scalings(&self) -> &[ScalarFunc<T>] {
        &self.scalings
    }

    pub fn form(&self) -> &OperatorForm<T> {
        &self.form
    }

    pub fn branch_count(&self) -> usize {
        self.partition.len()
    }

    pub fn is_interp(&self) -> bool {
        matches!(self.form, OperatorForm::Interp { .. })
    }

    /// `max_i sup |S_i|`, the sup-norm Lipschitz constant.
    pub fn lipschitz_sup(&self) -> T {
        self.lipschitz
    }

    pub fn scaling_sups(&self) -> &[T] {
        &self.scaling_sups
    }

    /// `(g(0), g(1))` shared by admissible inputs, when known.
    pub fn endpoint_values(&self) -> Option<(T, T)> {
        match &self.form {
            OperatorForm::General { endpoints, .. } => *endpoints,
            OperatorForm::Interp { seed, .. } => Some((seed.value(T::zero()), seed.value(T::one()))),
        }
    }

    /// Offset `q_i(y)`; for interpolation operators `f(l_i y) - S_i(y) b(y)`.
    pub fn q_value(&self, i: usize, y: T) -> T {
        match &self.form {
            OperatorForm::General { qs, .. } => qs[i].value(y),
            OperatorForm::Interp { seed, base } => {
                seed.value(self.partition.branch(i).apply(y)) - self.scalings[i].value(y) * base.value(y)
            }
        }
    }

    /// `F_i(y, v)`: the branch-`i` output at `l_i(y)` given `g(y) = v`.
    pub fn branch_value(&self, i: usize, y: T, v: T) -> T {
        let x = self.partition.branch(i).apply(y);
        self.level_value(i, x, y, v)
    }

    /// As [`Self::branch_value`] with `x = l_i(y)` already known.
    #[inline]
    pub(crate) fn level_value(&self, i: usize, x: T, y: T, v: T) -> T {
        let s = self.scalings[i].value(y);
        match &self.form {
            OperatorForm::General { qs, .. } => qs[i].value(y) + s * v,
            OperatorForm::Interp { seed, base } => seed.value(x) + s * (v - base.value(y)),
        }
    }

    /// Branch index and preimage for `x` in `[0,1]`.
    #[inline]
    pub(crate) fn descend(&self, x: T) -> (usize, T) {
        let i = self.partition.locate_unchecked(x);
        (i, self.partition.branch(i).invert_unchecked(x))
    }

    /// `(T g)(x)`.
    pub fn apply_pointwise<G: Fn(T) -> T>(&self, g: G, x: T) -> Result<T> {
        check_unit("operator application", x)?;
        let (i, y) = self.descend(x);
        Ok(self.level_value(i, x, y, g(y)))
    }

    /// Exact one-sided limits of `T g` at each interior knot for any continuous
    /// `g` with the operator's endpoint values.
    pub fn joinup_check(&self) -> Result<Vec<JoinupDefect<T>>> {
        let (g0, g1) = self.endpoint_values().ok_or(Error::ContinuityUndecidable)?;
        Ok(self.joinup_from_endpoints(g0, g1))
    }

    /// Join-up defects computed from a concrete continuous probe `g`.
    pub fn joinup_check_with<G: Fn(T) -> T>(&self, g: G) -> Vec<JoinupDefect<T>> {
        self.joinup_from_endpoints(g(T::zero()), g(T::one()))
    }

    fn joinup_from_endpoints(&self, g0: T, g1: T) -> Vec<JoinupDefect<T>> {
        (0..self.branch_count() - 1)
            .map(|i| {
                let left = self.branch_value(i, T::one(), g1);
                let right = self.branch_value(i + 1, T::zero(), g0);
                JoinupDefect {
                    knot: self.partition.branch(i).apply(T::one()),
                    left,
                    right,
                    defect: (left - right).abs(),
                }
            })
            .collect()
    }

    /// Numerical one-sided limits of `T g` at the interior knots, extrapolated
    /// linearly from the offsets `delta` and `2 delta`.
    pub fn probe_joinup<G: Fn(T) -> T>(&self, g: G, delta: T) -> Vec<JoinupDefect<T>> {
        let two = T::lit(2.0);
        let eval = |x: T| {
            let (i, y) = self.descend(x);
            self.level_value(i, x, y, g(y))
        };
        self.partition.knots()[1..self.branch_count()]
            .iter()
            .map(|&k| {
                let left = two * eval(k - delta) - eval(k - two * delta);
                let right = two * eval(k + delta) - eval(k + two * delta);
                JoinupDefect {
                    knot: k,
                    left,
                    right,
                    defect: (left - right).abs(),
                }
            })
            .collect()
    }

    /// `{(x_j, f(x_j))}` at the partition knots.
    pub fn interpolation_nodes(&self) -> Result<InterpolationNodes<T>> {
        match &self.form {
            OperatorForm::Interp { seed, .. } => Ok(InterpolationNodes {
                knots: self
                    .partition
                    .knots()
                    .into_iter()
                    .map(|x| (x, seed.value(x)))
                    .collect(),
            }),
            OperatorForm::General { .. } => Err(Error::UnsupportedForm(
                "interpolation nodes need a seed function",
            )),
        }
    }

    /// Bound `M` on `sup |q_i|`: exact per branch for general operators,
    /// `‖f‖ + s‖b‖` for interpolation operators.
    pub fn offset_bound(&self) -> T {
        match &self.form {
            OperatorForm::General { qs, .. } => {
                qs.iter().map(ScalarFunc::sup_abs).fold(T::zero(), T::max)
            }
            OperatorForm::Interp { seed, base } => {
                seed.sup_abs() + self.lipschitz * base.sup_abs()
            }
        }
    }

    /// Uniform bound `L` on the Lipschitz constant of `F_i(·, v)` for
    /// `|v| <= vertical`.
    pub fn x_lipschitz(&self, vertical: T) -> T {
        (0..self.branch_count())
            .map(|i| {
                let s = &self.scalings[i];
                let q_lip = match &self.form {
                    OperatorForm::General { qs, .. } => qs[i].lipschitz(),
                    OperatorForm::Interp { seed, base } => {
                        self.partition.branch(i).slope().abs() * seed.lipschitz()
                            + s.lipschitz() * base.sup_abs()
                            + self.scaling_sups[i] * base.lipschitz()
                    }
                };
                q_lip + s.lipschitz() * vertical
            })
            .fold(T::zero(), T::max)
    }
}
