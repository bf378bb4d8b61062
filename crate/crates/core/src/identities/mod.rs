//! Ramanujan's five false theta identities and the registry of proof steps.

use std::fmt;
use std::str::FromStr;

use num_traits::One;

use crate::error::{Error, Result};
use crate::monomial::Monomial;
use crate::pochhammer::Param;
use crate::series::{Coeff, QSeries, Report, Scale, ScaledMono};

mod steps;

pub use steps::{
    check_step, phi_instances, step_sides, steps, PhiInstance, StepKind, StepParams, StepSpec,
};

/// One of the five identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityId {
    I1_1,
    I1_2,
    I1_3,
    I1_4,
    I1_5,
}

impl IdentityId {
    pub const ALL: [IdentityId; 5] = [
        IdentityId::I1_1,
        IdentityId::I1_2,
        IdentityId::I1_3,
        IdentityId::I1_4,
        IdentityId::I1_5,
    ];

    pub fn label(self) -> &'static str {
        match self {
            IdentityId::I1_1 => "1.1",
            IdentityId::I1_2 => "1.2",
            IdentityId::I1_3 => "1.3",
            IdentityId::I1_4 => "1.4",
            IdentityId::I1_5 => "1.5",
        }
    }

    /// Multiplier `s` of the right side `sum (-1)^n q^(s n(n+1)/2)`.
    pub fn theta_multiplier(self) -> u32 {
        match self {
            IdentityId::I1_1 => 1,
            IdentityId::I1_2 => 2,
            IdentityId::I1_3 => 3,
            IdentityId::I1_4 => 4,
            IdentityId::I1_5 => 6,
        }
    }

    /// Human-readable left-hand summand.
    pub fn summand(self) -> &'static str {
        match self {
            IdentityId::I1_1 => "(-1)^n (q;q^2)_n q^(n(n+1)) / (-q;q)_(2n+1)",
            IdentityId::I1_2 => "(q;q^2)_n^2 q^n / (-q;q)_(2n+1)",
            IdentityId::I1_3 => "(q;q^2)_n q^n / (-q;q)_(2n+1)",
            IdentityId::I1_4 => "(q;-q)_(2n) q^n / (-q;q)_(2n+1)",
            IdentityId::I1_5 => "(q;-q)_n (-q^2;q^2)_n q^n / (-q;q)_(2n+1)",
        }
    }

    /// Factors that turn summand `n` into summand `n + 1`.
    fn step(self, n: i64) -> RatioStep {
        let q = Monomial::q;
        // (-q;q)_(2n+1) -> (-q;q)_(2n+3)
        let div = vec![-q(2 * n + 2), -q(2 * n + 3)];
        let (mul, factor) = match self {
            IdentityId::I1_1 => (vec![q(2 * n + 1)], -q(2 * n + 2)),
            IdentityId::I1_2 => (vec![q(2 * n + 1), q(2 * n + 1)], q(1)),
            IdentityId::I1_3 => (vec![q(2 * n + 1)], q(1)),
            // (q;-q)_(2n) gains 1 - q(-q)^(2n) and 1 - q(-q)^(2n+1)
            IdentityId::I1_4 => (vec![q(2 * n + 1), -q(2 * n + 2)], q(1)),
            IdentityId::I1_5 => {
                let alt = Monomial::q(1) * Monomial::neg_q(1).pow(n);
                (vec![alt, -q(2 * n + 2)], q(1))
            }
        };
        RatioStep { mul, div, factor }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.label() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// `sum_{n >= 0} (-1)^n q^(s n(n+1)/2)` to whole order `order`.
pub fn false_theta(s: u32, scale: Scale, order: i64) -> QSeries {
    let t = scale.units(order);
    let d = scale.denom() as i64;
    let mut terms = Vec::new();
    for n in 0i64.. {
        let e = s as i64 * n * (n + 1) / 2 * d;
        if e > t {
            break;
        }
        let c = if n % 2 == 0 { 1 } else { -1 };
        terms.push((e, Coeff::from_integer(c.into())));
    }
    QSeries::from_terms(scale, t, terms)
}

/// Summand `n + 1 = summand n * prod(1 - mul) / prod(1 - div) * factor`.
#[derive(Debug, Clone)]
pub(crate) struct RatioStep {
    pub mul: Vec<Monomial>,
    pub div: Vec<Monomial>,
    pub factor: Monomial,
}

/// Sums `first + ...` where each summand follows from the previous one by a
/// [`RatioStep`]. Every binomial must have nonnegative exponent and every
/// step factor a positive one, so summand `n` has valuation exactly its
/// accumulated shift and the sum can stop at the first shift above `t`.
pub(crate) fn ratio_sum(
    scale: Scale,
    t: i64,
    first: RatioStep,
    mut step: impl FnMut(i64) -> RatioStep,
) -> Result<QSeries> {
    // summand 0 = prod(1 - mul)/prod(1 - div) * factor of `first`
    let mut scalar = Coeff::one();
    let mut shift = 0i64;
    let mut unit = QSeries::one(scale, t);
    let mut acc = QSeries::zero(scale, t);
    let mut pending = Some(first);
    let mut n = 0i64;
    while let Some(st) = pending.take() {
        let f = ScaledMono::from_monomial(st.factor, scale)?;
        if n > 0 && f.exp <= 0 {
            return Err(Error::NotEvaluable(format!(
                "summand ratio factor {} must have a positive exponent",
                st.factor
            )));
        }
        shift += f.exp;
        if f.neg {
            scalar = -scalar;
        }
        if shift > t {
            break;
        }
        let order = t - shift;
        unit = unit.clip(order);
        for m in &st.mul {
            let x = ScaledMono::from_monomial(*m, scale)?;
            match x.exp {
                e if e > 0 => {
                    if e <= order {
                        unit = unit.mul_binomial_scaled(x);
                    }
                }
                0 if x.neg => scalar *= Coeff::from_integer(2.into()),
                0 => return Ok(acc),
                _ => return Err(Error::NotEvaluable(format!("factor (1 - {m}) has negative exponent"))),
            }
        }
        for m in &st.div {
            let x = ScaledMono::from_monomial(*m, scale)?;
            match x.exp {
                e if e > 0 => {
                    if e <= order {
                        unit = unit.div_binomial_scaled(x)?;
                    }
                }
                0 if x.neg => scalar /= Coeff::from_integer(2.into()),
                0 => return Err(Error::DivisionByZero(format!("denominator (1 - {m}) vanishes"))),
                _ => return Err(Error::NotEvaluable(format!("factor (1 - {m}) has negative exponent"))),
            }
        }
        acc = acc.add(&unit.scalar_mul(&scalar).shift(shift))?;
        pending = Some(step(n));
        n += 1;
    }
    Ok(acc)
}

/// Direct summation of the displayed left-hand side to whole order `order`.
pub fn lhs_series(id: IdentityId, scale: Scale, order: i64) -> Result<QSeries> {
    let first = RatioStep {
        mul: vec![],
        div: vec![Monomial::neg_q(1)],
        factor: Monomial::ONE,
    };
    ratio_sum(scale, scale.units(order), first, |n| id.step(n))
}

/// Compares the left side with `false_theta(s)` up to whole order `order`.
pub fn verify_identity(id: IdentityId, scale: Scale, order: i64) -> Result<Report> {
    let lhs = lhs_series(id, scale, order)?;
    let rhs = false_theta(id.theta_multiplier(), scale, order);
    lhs.equal_to_order(&rhs, scale.units(order))
}

/// The two sides of an identity, for fault injection.
pub fn identity_sides(id: IdentityId, scale: Scale, order: i64) -> Result<crate::series::Sides> {
    Ok(crate::series::Sides::new(
        lhs_series(id, scale, order)?,
        false_theta(id.theta_multiplier(), scale, order),
        scale.units(order),
    ))
}

/// Shorthand used by the step registry.
pub(crate) fn mono(s: &str) -> Monomial {
    s.parse().expect("static monomial literal")
}

pub(crate) fn param(s: &str) -> Param {
    s.parse().expect("static parameter literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn s2() -> Scale {
        Scale::default()
    }

    #[test]
    fn false_theta_examples() {
        let s = false_theta(1, s2(), 10);
        assert_eq!(s.render(), "1 - 1*q^1 + 1*q^3 - 1*q^6 + 1*q^10");
        assert_eq!(false_theta(2, s2(), 12).render(), "1 - 1*q^2 + 1*q^6 - 1*q^12");
        assert_eq!(false_theta(6, s2(), 6).render(), "1 - 1*q^6");
    }

    #[test]
    fn lhs_small_coefficients() {
        let l = lhs_series(IdentityId::I1_1, s2(), 4).unwrap();
        assert!(l.coeff(4).is_zero());
        let l = lhs_series(IdentityId::I1_2, s2(), 4).unwrap();
        assert_eq!(l.coeff(0), Coeff::one());
        let l = lhs_series(IdentityId::I1_4, s2(), 12).unwrap();
        assert_eq!(l, false_theta(4, s2(), 12));
    }

    #[test]
    fn identities_hold_at_moderate_order() {
        for id in IdentityId::ALL {
            let r = verify_identity(id, s2(), 60).unwrap();
            assert!(r.equal, "{id}: {r}");
        }
        assert!(verify_identity(IdentityId::I1_3, s2(), 0).unwrap().equal);
    }
}
