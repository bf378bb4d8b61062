//! q-Pochhammer products over monomial arguments and monomial bases.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::monomial::Monomial;
use crate::series::{Coeff, QSeries, Scale, ScaledMono};

/// A Pochhammer or hypergeometric parameter: a monomial or the literal `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Zero,
    Mono(Monomial),
}

impl Param {
    pub fn q(e: i64) -> Self {
        Param::Mono(Monomial::q(e))
    }

    pub fn neg_q(e: i64) -> Self {
        Param::Mono(Monomial::neg_q(e))
    }

    pub fn monomial(&self) -> Option<Monomial> {
        match self {
            Param::Zero => None,
            Param::Mono(m) => Some(*m),
        }
    }

    /// `self * m`, with `0 * m = 0`.
    pub fn times(&self, m: Monomial) -> Param {
        match self {
            Param::Zero => Param::Zero,
            Param::Mono(a) => Param::Mono(*a * m),
        }
    }
}

impl From<Monomial> for Param {
    fn from(m: Monomial) -> Self {
        Param::Mono(m)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Zero => f.write_str("0"),
            Param::Mono(m) => m.fmt(f),
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "0" {
            Ok(Param::Zero)
        } else {
            s.parse().map(Param::Mono)
        }
    }
}

/// `(1 - x)` rewritten as `scalar * q^shift * (1 - y)` with `y` of positive
/// exponent, so that every series factor is a unit with constant term 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SplitFactor {
    /// One of 0, 2, +1, -1.
    pub scalar: i64,
    pub shift: i64,
    pub unit: Option<ScaledMono>,
}

impl SplitFactor {
    pub fn of(x: ScaledMono) -> Self {
        match x.exp.signum() {
            1 => SplitFactor {
                scalar: 1,
                shift: 0,
                unit: Some(x),
            },
            -1 => SplitFactor {
                // 1 - x = (-x)(1 - 1/x)
                scalar: if x.neg { 1 } else { -1 },
                shift: x.exp,
                unit: Some(x.recip()),
            },
            _ => SplitFactor {
                scalar: if x.neg { 2 } else { 0 },
                shift: 0,
                unit: None,
            },
        }
    }

    /// Valuation contribution of `(1 - x)`: `min(0, e(x))`.
    pub fn valuation(x: ScaledMono) -> i64 {
        x.exp.min(0)
    }
}

/// Exact product `prod (1 - x_i)` clipped at `trunc`.
pub(crate) fn binomial_product(scale: Scale, factors: &[ScaledMono], trunc: i64) -> QSeries {
    let mut scalar = Coeff::from_integer(1.into());
    let mut shift = 0i64;
    let mut units = Vec::with_capacity(factors.len());
    for &x in factors {
        let sf = SplitFactor::of(x);
        if sf.scalar == 0 {
            return QSeries::zero(scale, trunc);
        }
        scalar *= Coeff::from_integer(sf.scalar.into());
        shift += sf.shift;
        units.extend(sf.unit);
    }
    let order = trunc - shift;
    if order < 0 {
        return QSeries::zero(scale, trunc);
    }
    // dense integer coefficients, each factor applied in place from the top
    let mut dense = vec![BigInt::zero(); order as usize + 1];
    dense[0] = BigInt::one();
    let mut degree = 0usize;
    for y in units {
        if y.exp > order {
            continue;
        }
        let step = y.exp as usize;
        degree = (degree + step).min(order as usize);
        for i in (step..=degree).rev() {
            if dense[i - step].is_zero() {
                continue;
            }
            let (lo, hi) = dense.split_at_mut(i);
            if y.neg {
                hi[0] += &lo[i - step];
            } else {
                hi[0] -= &lo[i - step];
            }
        }
    }
    let terms: Vec<(i64, Coeff)> = dense
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64, Coeff::from_integer(c)))
        .collect();
    QSeries::from_terms(scale, order, terms).scalar_mul(&scalar).shift(shift)
}

fn factor_list(a: Monomial, base: Monomial, n: usize, scale: Scale) -> Result<Vec<ScaledMono>> {
    (0..n)
        .map(|k| ScaledMono::from_monomial(a * base.pow(k as i64), scale))
        .collect()
}

/// Finite product `(a; base)_n = (1 - a)(1 - a*base)...(1 - a*base^(n-1))`,
/// exact below `trunc` (the result is a Laurent polynomial).
pub fn poch(a: Param, base: Monomial, n: usize, scale: Scale, trunc: i64) -> Result<QSeries> {
    match a {
        Param::Zero => Ok(QSeries::one(scale, trunc)),
        Param::Mono(a) => Ok(binomial_product(scale, &factor_list(a, base, n, scale)?, trunc)),
    }
}

fn infinite_factors(a: Monomial, base: Monomial, scale: Scale, trunc: i64) -> Result<Vec<ScaledMono>> {
    let b = ScaledMono::from_monomial(base, scale)?;
    if b.exp <= 0 {
        return Err(Error::NotEvaluable(format!(
            "infinite product with base {base} needs a positive base exponent"
        )));
    }
    let a0 = ScaledMono::from_monomial(a, scale)?;
    let mut factors = Vec::new();
    let mut head_shift = 0;
    let mut k = 0i64;
    loop {
        let x = a * base.pow(k);
        let e = a0.exp + k * b.exp;
        if e > 0 && e > trunc - head_shift {
            break;
        }
        head_shift += e.min(0);
        factors.push(ScaledMono {
            neg: x.is_negative(),
            exp: e,
        });
        k += 1;
    }
    Ok(factors)
}

/// Infinite product `(a; base)_inf` truncated at `trunc`. Factors with
/// nonpositive exponent are multiplied in exactly; a factor `(1 - 1)` makes
/// the whole product zero.
pub fn poch_inf(a: Monomial, base: Monomial, scale: Scale, trunc: i64) -> Result<QSeries> {
    let factors = infinite_factors(a, base, scale, trunc)?;
    Ok(binomial_product(scale, &factors, trunc))
}

/// Exact valuation of `(a; base)_inf`, `None` when the product vanishes.
pub fn poch_inf_valuation(a: Monomial, base: Monomial, scale: Scale) -> Result<Option<i64>> {
    let b = ScaledMono::from_monomial(base, scale)?;
    if b.exp <= 0 {
        return Err(Error::NotEvaluable(format!(
            "infinite product with base {base} needs a positive base exponent"
        )));
    }
    let mut x = ScaledMono::from_monomial(a, scale)?;
    let mut v = 0;
    while x.exp <= 0 {
        if x.exp == 0 && !x.neg {
            return Ok(None);
        }
        v += x.exp;
        x.exp += b.exp;
        x.neg ^= base.is_negative();
    }
    Ok(Some(v))
}

/// `lim_{x -> 0} (c/x; base)_n x^n = (-1)^n c^n base^(n(n-1)/2)` as a
/// one-term series.
pub fn poch_limit(c: Monomial, base: Monomial, n: usize, scale: Scale, trunc: i64) -> Result<QSeries> {
    QSeries::monomial(scale, poch_limit_monomial(c, base, n), trunc)
}

/// The monomial value of [`poch_limit`].
pub fn poch_limit_monomial(c: Monomial, base: Monomial, n: usize) -> Monomial {
    let n = n as i64;
    let m = c.pow(n) * base.pow(n * (n - 1) / 2);
    if n % 2 == 1 {
        -m
    } else {
        m
    }
}

/// `(a; base)_n` where the factor list contains `(1 - 1)`, i.e. `a = base^-k`
/// for some `k < n`.
pub fn poch_vanishes(a: Param, base: Monomial, n: usize) -> bool {
    match a {
        Param::Zero => false,
        Param::Mono(a) => a.as_base_power(base).is_some_and(|k| (k as usize) < n),
    }
}

/// `(a1, ..., ar; base)_n`.
pub fn poch_many(params: &[Param], base: Monomial, n: usize, scale: Scale, trunc: i64) -> Result<QSeries> {
    let mut factors = Vec::new();
    for p in params {
        if let Param::Mono(a) = p {
            factors.extend(factor_list(*a, base, n, scale)?);
        }
    }
    Ok(binomial_product(scale, &factors, trunc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2() -> Scale {
        Scale::default()
    }

    fn ints(trunc: i64, terms: &[(i64, i64)]) -> QSeries {
        let scaled: Vec<(i64, i64)> = terms.iter().map(|&(e, c)| (2 * e, c)).collect();
        QSeries::from_ints(s2(), 2 * trunc, &scaled)
    }

    #[test]
    fn finite_products() {
        let p = poch(Param::q(1), Monomial::q(2), 2, s2(), 40).unwrap();
        assert_eq!(p, ints(20, &[(0, 1), (1, -1), (3, -1), (4, 1)]));
        let p = poch(Param::q(1), Monomial::neg_q(1), 2, s2(), 40).unwrap();
        assert_eq!(p, ints(20, &[(0, 1), (1, -1), (2, 1), (3, -1)]));
        let p = poch(Param::Zero, Monomial::q(1), 5, s2(), 40).unwrap();
        assert_eq!(p, ints(20, &[(0, 1)]));
        let p = poch(Param::q(3), Monomial::q(1), 0, s2(), 40).unwrap();
        assert_eq!(p, ints(20, &[(0, 1)]));
    }

    #[test]
    fn laurent_products_are_exact() {
        // (q^-2; q)_3 = (1 - q^-2)(1 - q^-1)(1 - 1) = 0
        let p = poch(Param::q(-2), Monomial::q(1), 3, s2(), 10).unwrap();
        assert!(p.is_zero());
        // (q^-1; q)_1 = 1 - q^-1
        let p = poch(Param::q(-1), Monomial::q(1), 1, s2(), 10).unwrap();
        assert_eq!(p, ints(5, &[(-1, -1), (0, 1)]));
        // (-1; q)_2 = 2 (1 + q)
        let p = poch(Param::neg_q(0), Monomial::q(1), 2, s2(), 10).unwrap();
        assert_eq!(p, ints(5, &[(0, 2), (1, 2)]));
    }

    #[test]
    fn euler_product() {
        let p = poch_inf(Monomial::q(1), Monomial::q(1), s2(), 24).unwrap();
        assert_eq!(
            p,
            ints(12, &[(0, 1), (1, -1), (2, -1), (5, 1), (7, 1), (12, -1)])
        );
        let p = poch_inf(Monomial::neg_q(1), Monomial::q(1), s2(), 8).unwrap();
        assert_eq!(p, ints(4, &[(0, 1), (1, 1), (2, 1), (3, 2), (4, 2)]));
    }

    #[test]
    fn vanishing_infinite_product() {
        // (q^(1-n); q^2)_inf with n = 3 contains 1 - q^0
        let p = poch_inf(Monomial::q(-2), Monomial::q(2), s2(), 40).unwrap();
        assert!(p.is_zero());
        assert_eq!(poch_inf_valuation(Monomial::q(-2), Monomial::q(2), s2()).unwrap(), None);
        // (q^-1; q^2)_inf = (1 - q^-1) * ..., valuation -1
        assert_eq!(
            poch_inf_valuation(Monomial::q(-1), Monomial::q(2), s2()).unwrap(),
            Some(-2)
        );
        assert!(poch_inf(Monomial::q(1), Monomial::q(0), s2(), 10).is_err());
    }

    #[test]
    fn laurent_head_keeps_tail() {
        // (q^-3; q)_inf: head (1-q^-3)(1-q^-2)(1-q^-1) has valuation -6, so
        // tail factors up to q^(T+6) matter at order T.
        let t = 10;
        let p = poch_inf(Monomial::q(-3), Monomial::q(1), s2(), 2 * t).unwrap();
        assert!(p.is_zero(), "contains 1 - q^0");
        let p = poch_inf(Monomial::neg_q(-3), Monomial::q(1), s2(), 2 * t).unwrap();
        // compare against an explicit finite product with plenty of factors
        let head = poch(Param::neg_q(-3), Monomial::q(1), 30, s2(), 2 * t).unwrap();
        assert!(p.equal_to_order(&head, 2 * t).unwrap().equal);
    }

    #[test]
    fn limits() {
        let l = poch_limit(Monomial::q(2), Monomial::q(2), 1, s2(), 40).unwrap();
        assert_eq!(l, ints(20, &[(2, -1)]));
        let l = poch_limit(Monomial::q(2), Monomial::q(2), 2, s2(), 40).unwrap();
        assert_eq!(l, ints(20, &[(6, 1)]));
        let l = poch_limit(Monomial::q(5), Monomial::neg_q(1), 0, s2(), 40).unwrap();
        assert_eq!(l, ints(20, &[(0, 1)]));
    }

    #[test]
    fn zero_param_parsing() {
        assert_eq!("0".parse::<Param>().unwrap(), Param::Zero);
        assert_eq!("-q^2".parse::<Param>().unwrap(), Param::neg_q(2));
        assert!(!Coeff::from_integer(2.into()).is_zero());
    }
}
