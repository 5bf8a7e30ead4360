//! Named operators (Takagi, quadratic, Kiesswetter, Casino), the alternating
//! schedules built from them, and a digit-expansion oracle for their fixed
//! points.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{check_unit, Partition, ScalarFunc};
use crate::rb_operator::{OperatorForm, RbOperator};
use crate::real::Real;
use crate::trajectory::OperatorSchedule;

/// Levels per block in the alternating schedules.
pub const ALTERNATING_BLOCK: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Named {
    Takagi,
    Quadratic,
    Kiesswetter,
    Casino,
}

pub const ALL_NAMED: [Named; 4] = [Named::Takagi, Named::Quadratic, Named::Kiesswetter, Named::Casino];

impl Named {
    pub fn as_str(self) -> &'static str {
        match self {
            Named::Takagi => "takagi",
            Named::Quadratic => "quadratic",
            Named::Kiesswetter => "kiesswetter",
            Named::Casino => "casino",
        }
    }
}

impl fmt::Display for Named {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Named {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL_NAMED
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown operator name `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedOperator<T> {
    pub name: Named,
    pub operator: RbOperator<T>,
}

fn lin<T: Real>(c0: f64, c1: f64) -> ScalarFunc<T> {
    ScalarFunc::Polynomial(vec![T::lit(c0), T::lit(c1)])
}

fn cst<T: Real>(v: f64) -> ScalarFunc<T> {
    ScalarFunc::Constant(T::lit(v))
}

/// Branch data in local coordinates `y = l_i^{-1}(x)`:
///
/// * takagi: `2x + f(2x)/2`, `2 - 2x + f(2x-1)/2`, i.e. `q = [y, 1-y]`, `S = 1/2`
/// * quadratic: the same offsets with `S = 1/4`; fixed point `4x(1-x)`
/// * kiesswetter: four quarters, `S = [-1/2, 1/2, 1/2, 1/2]`, `q = [0, -1/2, 0, 1/2]`
/// * casino: halves, `S = [3/4, 1/4]`, `q = [0, 3/4]`
///
/// Each operator also declares the endpoint values of its fixed point so that
/// continuity can be checked.
pub fn make_named_generic<T: Real>(name: Named) -> NamedOperator<T> {
    let built = match name {
        Named::Takagi | Named::Quadratic => {
            let s = if name == Named::Takagi { 0.5 } else { 0.25 };
            RbOperator::build_general(
                Partition::halves(),
                vec![cst(s), cst(s)],
                vec![lin(0.0, 1.0), lin(1.0, -1.0)],
            )
            .and_then(|op| op.with_endpoints(T::zero(), T::zero()))
        }
        Named::Kiesswetter => RbOperator::build_general(
            Partition::quarters(),
            vec![cst(-0.5), cst(0.5), cst(0.5), cst(0.5)],
            vec![cst(0.0), cst(-0.5), cst(0.0), cst(0.5)],
        )
        .and_then(|op| op.with_endpoints(T::zero(), T::one())),
        Named::Casino => RbOperator::build_general(
            Partition::halves(),
            vec![cst(0.75), cst(0.25)],
            vec![cst(0.0), cst(0.75)],
        )
        .and_then(|op| op.with_endpoints(T::zero(), T::one())),
    };
    NamedOperator {
        name,
        operator: built.expect("catalog operator data is valid"),
    }
}

pub fn make_named(name: Named) -> NamedOperator<f64> {
    make_named_generic(name)
}

/// Initial function used with each operator: `0` for takagi and quadratic,
/// `x` for kiesswetter and casino.
pub fn default_initial<T: Real>(name: Named) -> ScalarFunc<T> {
    match name {
        Named::Takagi | Named::Quadratic => ScalarFunc::zero(),
        Named::Kiesswetter | Named::Casino => ScalarFunc::identity(),
    }
}

/// Interpolation operator with seed `x^2`, two halves and `S = 0.3`.
pub fn square_interp_operator<T: Real>() -> RbOperator<T> {
    RbOperator::build_interp(
        Partition::halves(),
        vec![cst(0.3), cst(0.3)],
        ScalarFunc::Polynomial(vec![T::zero(), T::zero(), T::one()]),
    )
    .expect("valid interpolation operator")
}

/// `T_i = A` for `2b(j-1) < i <= 2bj - b`, `B` otherwise, with block length `b`,
/// over `periods` periods.
pub fn make_alternating_with_block<T: Real>(
    first: Arc<RbOperator<T>>,
    second: Arc<RbOperator<T>>,
    block: usize,
    periods: usize,
    initial: ScalarFunc<T>,
) -> Result<OperatorSchedule<T>> {
    if periods == 0 || block == 0 {
        return Err(Error::Structural(
            "alternating schedule needs at least one period and a positive block".into(),
        ));
    }
    let blocks = (0..periods)
        .flat_map(|_| [(Arc::clone(&first), block), (Arc::clone(&second), block)])
        .collect();
    OperatorSchedule::new(blocks, initial)
}

/// Alternating schedule of depth `10 * periods`, five levels of each operator.
pub fn make_alternating<T: Real>(
    first: Arc<RbOperator<T>>,
    second: Arc<RbOperator<T>>,
    periods: usize,
    initial: ScalarFunc<T>,
) -> Result<OperatorSchedule<T>> {
    make_alternating_with_block(first, second, ALTERNATING_BLOCK, periods, initial)
}

/// Takagi/quadratic hybrid started from `f₀ = 0`.
pub fn hybrid_takagi_quadratic(periods: usize) -> Result<OperatorSchedule<f64>> {
    make_alternating(
        Arc::new(make_named(Named::Takagi).operator),
        Arc::new(make_named(Named::Quadratic).operator),
        periods,
        ScalarFunc::zero(),
    )
}

/// Kiesswetter/Casino hybrid started from `f₀(x) = x`.
pub fn hybrid_kiesswetter_casino(periods: usize) -> Result<OperatorSchedule<f64>> {
    make_alternating(
        Arc::new(make_named(Named::Kiesswetter).operator),
        Arc::new(make_named(Named::Casino).operator),
        periods,
        ScalarFunc::identity(),
    )
}

#[derive(Clone, Debug)]
pub struct CatalogSchedule {
    pub name: String,
    pub schedule: OperatorSchedule<f64>,
}

/// Every catalog configuration at the given depth: the four stationary
/// schedules, both hybrids and the square interpolation schedule started from
/// its seed and from its base.
pub fn catalog_schedules(depth: usize) -> Result<Vec<CatalogSchedule>> {
    let mut out = Vec::new();
    for n in ALL_NAMED {
        out.push(CatalogSchedule {
            name: n.to_string(),
            schedule: OperatorSchedule::stationary(
                Arc::new(make_named(n).operator),
                depth,
                default_initial(n),
            )?,
        });
    }
    let periods = depth.div_ceil(2 * ALTERNATING_BLOCK);
    out.push(CatalogSchedule {
        name: "takagi-quadratic".into(),
        schedule: hybrid_takagi_quadratic(periods)?.truncated(depth)?,
    });
    out.push(CatalogSchedule {
        name: "kiesswetter-casino".into(),
        schedule: hybrid_kiesswetter_casino(periods)?.truncated(depth)?,
    });
    let sq = Arc::new(square_interp_operator::<f64>());
    if let OperatorForm::Interp { seed, base } = sq.form() {
        out.push(CatalogSchedule {
            name: "square-interp-seed".into(),
            schedule: OperatorSchedule::stationary(sq.clone(), depth, seed.clone())?,
        });
        out.push(CatalogSchedule {
            name: "square-interp-base".into(),
            schedule: OperatorSchedule::stationary(sq.clone(), depth, base.clone())?,
        });
    }
    Ok(out)
}

/// Truncated digit expansion with its a-priori error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue<T> {
    pub value: T,
    pub error_bound: T,
}

/// Fixed point `f*(x) = Σ_{m=1}^{N} (Π_{j<m} S_{d_j}) q_{d_m}(σ^m x)` where `d_m`
/// is the `m`-th base-`n` digit of `x` and `σ` the digit shift.
///
/// Needs a uniform partition, constant scalings and affine offsets.
pub fn digit_oracle<T: Real>(op: &RbOperator<T>, x: T, terms: usize) -> Result<OracleValue<T>> {
    check_unit("digit oracle", x)?;
    let n = op.branch_count();
    let unsupported = |why: &str| Error::Unsupported(format!("digit oracle: {why}"));
    if *op.partition() != Partition::uniform(n)? {
        return Err(unsupported("partition is not uniform"));
    }
    let qs = match op.form() {
        OperatorForm::General { qs, .. } => qs,
        OperatorForm::Interp { .. } => return Err(unsupported("interpolation form")),
    };
    let scales = op
        .scalings()
        .iter()
        .map(|s| s.as_constant().ok_or_else(|| unsupported("non-constant scaling")))
        .collect::<Result<Vec<T>>>()?;
    let offsets = qs
        .iter()
        .map(|q| match q.polynomial_coefficients() {
            Some(c) if c.iter().skip(2).all(|v| v.is_zero()) => {
                Ok((c[0], c.get(1).copied().unwrap_or_else(T::zero)))
            }
            _ => Err(unsupported("offset is not affine")),
        })
        .collect::<Result<Vec<(T, T)>>>()?;

    let base = T::from_usize_lossy(n);
    let mut prod = T::one();
    let mut acc = T::zero();
    let mut xm = x;
    for _ in 0..terms {
        let scaled = base * xm;
        let d = scaled.floor().to_usize().unwrap_or(0).min(n - 1);
        xm = (scaled - T::from_usize_lossy(d)).max(T::zero()).min(T::one());
        let (c0, c1) = offsets[d];
        acc = acc + prod * (c0 + c1 * xm);
        prod = prod * scales[d];
    }
    let s = op.lipschitz_sup();
    let radius = op.offset_bound() / (T::one() - s);
    Ok(OracleValue {
        value: acc,
        error_bound: s.powi(terms as i32) * radius,
    })
}
