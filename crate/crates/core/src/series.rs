//! Sparse truncated Laurent series in `q` with exact rational coefficients.
//!
//! Exponents are stored as integers in units of `1/D`, where `D` is the
//! [`Scale`] shared by every value in one computation. A series carries an
//! inclusive truncation order: it is exact at every exponent `<= trunc` and
//! asserts nothing above.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::monomial::Monomial;

pub type Coeff = BigRational;

/// Global exponent denominator `D`. All exponents are multiples of `1/D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scale(u32);

impl Scale {
    pub const MAX_DENOM: u32 = 4;

    pub fn new(denom: u32) -> Result<Self> {
        if (1..=Self::MAX_DENOM).contains(&denom) {
            Ok(Scale(denom))
        } else {
            Err(Error::BadScale(denom))
        }
    }

    pub fn denom(self) -> u32 {
        self.0
    }

    /// Whole-`q` order `n` in scaled units.
    pub fn units(self, order: i64) -> i64 {
        order * self.0 as i64
    }

    /// Scaled exponent back to a reduced rational.
    pub fn to_ratio(self, scaled: i64) -> Ratio<i64> {
        Ratio::new(scaled, self.0 as i64)
    }

    pub fn is_even(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

impl Default for Scale {
    fn default() -> Self {
        Scale(2)
    }
}

/// Monomial already converted to scaled units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ScaledMono {
    pub neg: bool,
    pub exp: i64,
}

impl ScaledMono {
    pub fn from_monomial(m: Monomial, scale: Scale) -> Result<Self> {
        Ok(ScaledMono {
            neg: m.is_negative(),
            exp: m.scaled_exp(scale)?,
        })
    }

    pub fn recip(self) -> Self {
        ScaledMono {
            neg: self.neg,
            exp: -self.exp,
        }
    }
}

/// Result of comparing two series up to an order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub scale: Scale,
    pub equal: bool,
    /// Inclusive order compared, in units of `1/D`.
    pub checked_order: i64,
    pub first_mismatch: Option<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    /// Exponent in units of `1/D`.
    pub exp: i64,
    pub lhs: Coeff,
    pub rhs: Coeff,
}

impl Report {
    pub fn equal(scale: Scale, checked_order: i64) -> Self {
        Report {
            scale,
            equal: true,
            checked_order,
            first_mismatch: None,
        }
    }

    /// Folds several reports of one check: the first mismatch wins, the
    /// checked order is the smallest one that was actually compared.
    pub fn combine(reports: impl IntoIterator<Item = Report>) -> Option<Report> {
        let mut acc: Option<Report> = None;
        for r in reports {
            acc = Some(match acc {
                None => r,
                Some(a) if !a.equal => a,
                Some(_) if !r.equal => r,
                Some(a) => Report {
                    checked_order: a.checked_order.min(r.checked_order),
                    ..a
                },
            });
        }
        acc
    }

    pub fn checked_order_q(&self) -> Ratio<i64> {
        self.scale.to_ratio(self.checked_order)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_mismatch {
            None => write!(f, "equal to O(q^{})", self.checked_order_q()),
            Some(m) => write!(
                f,
                "mismatch at q^{}: lhs {} vs rhs {}",
                self.scale.to_ratio(m.exp),
                m.lhs,
                m.rhs
            ),
        }
    }
}

/// The two independently built sides of one displayed equality.
#[derive(Debug, Clone)]
pub struct Sides {
    pub lhs: QSeries,
    pub rhs: QSeries,
    /// Comparison order in units of `1/D`.
    pub order: i64,
}

impl Sides {
    pub fn new(lhs: QSeries, rhs: QSeries, order: i64) -> Self {
        Sides { lhs, rhs, order }
    }

    pub fn compare(&self) -> Result<Report> {
        self.lhs.equal_to_order(&self.rhs, self.order)
    }

    /// Bumps one coefficient of the left side.
    pub fn tampered(self) -> Self {
        Sides {
            lhs: self.lhs.tampered(),
            ..self
        }
    }
}

/// Compares every pair; with `tamper` the first pair's left side is
/// corrupted first (mutation testing).
pub fn compare_all(sides: Vec<Sides>, tamper: bool) -> Result<Report> {
    let mut reports = Vec::with_capacity(sides.len());
    for (i, s) in sides.into_iter().enumerate() {
        let s = if tamper && i == 0 { s.tampered() } else { s };
        reports.push(s.compare()?);
    }
    Report::combine(reports).ok_or_else(|| Error::InvalidParam("nothing to compare".into()))
}

/// A truncated Laurent series. Canonical: no zero coefficients, every stored
/// exponent is `<= trunc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    scale: Scale,
    trunc: i64,
    terms: BTreeMap<i64, Coeff>,
}

impl QSeries {
    pub fn zero(scale: Scale, trunc: i64) -> Self {
        QSeries {
            scale,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(scale: Scale, trunc: i64) -> Self {
        Self::constant(scale, Coeff::one(), trunc)
    }

    pub fn constant(scale: Scale, c: Coeff, trunc: i64) -> Self {
        Self::from_terms(scale, trunc, [(0, c)])
    }

    /// Builds a series from `(scaled exponent, coefficient)` pairs. Repeated
    /// exponents are summed; terms above `trunc` are dropped.
    pub fn from_terms(
        scale: Scale,
        trunc: i64,
        terms: impl IntoIterator<Item = (i64, Coeff)>,
    ) -> Self {
        let mut map: BTreeMap<i64, Coeff> = BTreeMap::new();
        for (e, c) in terms {
            if e <= trunc {
                *map.entry(e).or_insert_with(Coeff::zero) += c;
            }
        }
        map.retain(|_, c| !c.is_zero());
        QSeries {
            scale,
            trunc,
            terms: map,
        }
    }

    /// Integer-coefficient convenience constructor.
    pub fn from_ints(scale: Scale, trunc: i64, terms: &[(i64, i64)]) -> Self {
        Self::from_terms(
            scale,
            trunc,
            terms.iter().map(|&(e, c)| (e, Coeff::from_integer(c.into()))),
        )
    }

    /// `sign * q^exp` as a one-term series; empty when `exp > trunc`.
    pub fn monomial(scale: Scale, m: Monomial, trunc: i64) -> Result<Self> {
        let sm = ScaledMono::from_monomial(m, scale)?;
        Ok(Self::scaled_monomial(scale, sm, Coeff::one(), trunc))
    }

    pub(crate) fn scaled_monomial(scale: Scale, m: ScaledMono, c: Coeff, trunc: i64) -> Self {
        let c = if m.neg { -c } else { c };
        Self::from_terms(scale, trunc, [(m.exp, c)])
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// Inclusive truncation order in units of `1/D`.
    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Highest stored exponent.
    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Valuation, or `trunc + 1` for a series that is zero to its order.
    fn effective_valuation(&self) -> i64 {
        self.valuation().unwrap_or(self.trunc + 1)
    }

    pub fn coeff(&self, exp: i64) -> Coeff {
        self.terms.get(&exp).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Coeff)> + '_ {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    /// Drops everything above `trunc` (never raises the order).
    pub fn clip(mut self, trunc: i64) -> Self {
        if trunc < self.trunc {
            self.terms.split_off(&(trunc + 1));
            self.trunc = trunc;
        }
        self
    }

    fn check_scale(&self, other: &QSeries) -> Result<()> {
        if self.scale == other.scale {
            Ok(())
        } else {
            Err(Error::ScaleMismatch {
                left: self.scale.denom(),
                right: other.scale.denom(),
            })
        }
    }

    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        self.check_scale(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut terms: BTreeMap<i64, Coeff> = self.terms.range(..=trunc).map(|(&e, c)| (e, c.clone())).collect();
        for (&e, c) in other.terms.range(..=trunc) {
            let slot = terms.entry(e).or_insert_with(Coeff::zero);
            *slot += c;
            if slot.is_zero() {
                terms.remove(&e);
            }
        }
        Ok(QSeries {
            scale: self.scale,
            trunc,
            terms,
        })
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QSeries {
        QSeries {
            scale: self.scale,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }

    pub fn scalar_mul(&self, c: &Coeff) -> QSeries {
        if c.is_zero() {
            return QSeries::zero(self.scale, self.trunc);
        }
        if c.is_one() {
            return self.clone();
        }
        QSeries {
            scale: self.scale,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(&e, v)| (e, v * c)).collect(),
        }
    }

    /// Multiplies by `q^shift` (scaled units); the order moves with it.
    pub fn shift(&self, shift: i64) -> QSeries {
        QSeries {
            scale: self.scale,
            trunc: self.trunc + shift,
            terms: self.terms.iter().map(|(&e, c)| (e + shift, c.clone())).collect(),
        }
    }

    pub fn mul_monomial(&self, m: Monomial) -> Result<QSeries> {
        let sm = ScaledMono::from_monomial(m, self.scale)?;
        let s = self.shift(sm.exp);
        Ok(if sm.neg { s.neg() } else { s })
    }

    /// Cauchy product. The result is exact up to
    /// `min(a.trunc + val(b), b.trunc + val(a))`.
    pub fn mul(&self, other: &QSeries) -> Result<QSeries> {
        self.check_scale(other)?;
        let va = self.effective_valuation();
        let vb = other.effective_valuation();
        let trunc = (self.trunc + vb).min(other.trunc + va);
        if self.is_zero() || other.is_zero() {
            return Ok(QSeries::zero(self.scale, trunc));
        }
        let hi = trunc.min(self.degree().unwrap() + other.degree().unwrap());
        let lo = va + vb;
        if hi < lo {
            return Ok(QSeries::zero(self.scale, trunc));
        }
        // integer convolution over a common denominator, reduced once per slot
        let (la, a_terms) = self.integer_terms();
        let (lb, b_terms) = other.integer_terms();
        let mut acc = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (ea, ca) in &a_terms {
            if ea + vb > hi {
                break;
            }
            for (eb, cb) in &b_terms {
                let e = ea + eb;
                if e > hi {
                    break;
                }
                acc[(e - lo) as usize] += ca * cb;
            }
        }
        Ok(QSeries::from_dense_int(self.scale, trunc, lo, acc, &(la * lb)))
    }

    /// Least common denominator `L` and the integer numerators `L * c`.
    fn integer_terms(&self) -> (BigInt, Vec<(i64, BigInt)>) {
        let l = self.terms.values().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let terms = self
            .terms
            .iter()
            .map(|(&e, c)| (e, c.numer() * (&l / c.denom())))
            .collect();
        (l, terms)
    }

    fn from_dense_int(scale: Scale, trunc: i64, lo: i64, dense: Vec<BigInt>, denom: &BigInt) -> QSeries {
        let terms = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let c = if denom.is_one() { Coeff::from_integer(c) } else { Coeff::new(c, denom.clone()) };
                (lo + i as i64, c)
            })
            .filter(|(e, _)| *e <= trunc)
            .collect();
        QSeries { scale, trunc, terms }
    }

    fn from_dense(scale: Scale, trunc: i64, lo: i64, dense: Vec<Coeff>) -> QSeries {
        let terms = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (lo + i as i64, c))
            .filter(|(e, _)| *e <= trunc)
            .collect();
        QSeries { scale, trunc, terms }
    }

    /// Multiplies by the binomial `(1 - m)`.
    pub fn mul_binomial(&self, m: Monomial) -> Result<QSeries> {
        let sm = ScaledMono::from_monomial(m, self.scale)?;
        Ok(self.mul_binomial_scaled(sm))
    }

    pub(crate) fn mul_binomial_scaled(&self, m: ScaledMono) -> QSeries {
        if m.exp == 0 {
            // (1 - m) is the constant 0 or 2
            return if m.neg {
                self.scalar_mul(&Coeff::from_integer(2.into()))
            } else {
                QSeries::zero(self.scale, self.trunc)
            };
        }
        let trunc = self.trunc + m.exp.min(0);
        let mut terms: BTreeMap<i64, Coeff> = self.terms.range(..=trunc).map(|(&e, c)| (e, c.clone())).collect();
        for (&e, c) in self.terms.range(..=trunc - m.exp) {
            let t = e + m.exp;
            let slot = terms.entry(t).or_insert_with(Coeff::zero);
            if m.neg {
                *slot += c;
            } else {
                *slot -= c;
            }
            if slot.is_zero() {
                terms.remove(&t);
            }
        }
        QSeries {
            scale: self.scale,
            trunc,
            terms,
        }
    }

    /// Divides by the binomial `(1 - m)`.
    pub fn div_binomial(&self, m: Monomial) -> Result<QSeries> {
        let sm = ScaledMono::from_monomial(m, self.scale)?;
        self.div_binomial_scaled(sm)
    }

    pub(crate) fn div_binomial_scaled(&self, m: ScaledMono) -> Result<QSeries> {
        if m.exp == 0 {
            if !m.neg {
                return Err(Error::DivisionByZero("factor (1 - q^0)".into()));
            }
            return Ok(self.scalar_mul(&Ratio::new(BigInt::one(), BigInt::from(2))));
        }
        if m.exp < 0 {
            // 1 - m = (-m)(1 - 1/m)
            let inner = self.div_binomial_scaled(m.recip())?;
            let s = inner.shift(-m.exp);
            return Ok(if m.neg { s } else { s.neg() });
        }
        let Some(lo) = self.valuation() else {
            return Ok(self.clone());
        };
        let step = m.exp as usize;
        let (l, ints) = self.integer_terms();
        let mut dense = vec![BigInt::zero(); (self.trunc - lo + 1) as usize];
        for (e, c) in ints {
            dense[(e - lo) as usize] = c;
        }
        for i in step..dense.len() {
            if dense[i - step].is_zero() {
                continue;
            }
            let prev = dense[i - step].clone();
            if m.neg {
                dense[i] -= prev;
            } else {
                dense[i] += prev;
            }
        }
        Ok(QSeries::from_dense_int(self.scale, self.trunc, lo, dense, &l))
    }

    /// Multiplicative inverse. For `s = c q^v (1 + u)` the result is exact up
    /// to `trunc - 2v`.
    pub fn invert(&self) -> Result<QSeries> {
        let Some(v) = self.valuation() else {
            return Err(Error::DivisionByZero("inverting the zero series".into()));
        };
        let c0 = self.terms[&v].clone();
        let inv_c0 = c0.recip();
        let trunc = self.trunc - 2 * v;
        let len = (self.trunc - v + 1) as usize;
        let u: Vec<(usize, Coeff)> = self
            .terms()
            .skip(1)
            .map(|(e, c)| ((e - v) as usize, c * &inv_c0))
            .filter(|(j, _)| *j < len)
            .collect();
        let w = if u.iter().all(|(_, c)| c.is_integer()) {
            // the common case: integral unit series, so stay in integers
            let u: Vec<(usize, BigInt)> = u.into_iter().map(|(j, c)| (j, c.to_integer())).collect();
            let mut w = vec![BigInt::zero(); len];
            w[0] = BigInt::one();
            for k in 1..len {
                let mut acc = BigInt::zero();
                for (j, uj) in &u {
                    if *j > k {
                        break;
                    }
                    let wk = &w[k - j];
                    if !wk.is_zero() {
                        acc -= uj * wk;
                    }
                }
                w[k] = acc;
            }
            w.into_iter().map(Coeff::from_integer).collect()
        } else {
            let mut w: Vec<Coeff> = vec![Coeff::zero(); len];
            w[0] = Coeff::one();
            for k in 1..len {
                let mut acc = Coeff::zero();
                for (j, uj) in &u {
                    if *j > k {
                        break;
                    }
                    let wk = &w[k - j];
                    if !wk.is_zero() {
                        acc -= uj * wk;
                    }
                }
                w[k] = acc;
            }
            w
        };
        let out = QSeries::from_dense(self.scale, trunc + v, 0, w);
        Ok(out.scalar_mul(&inv_c0).shift(-v))
    }

    /// Quotient `self / other` via [`QSeries::invert`].
    pub fn div(&self, other: &QSeries) -> Result<QSeries> {
        self.mul(&other.invert()?)
    }

    /// Replaces `q` by `q^k`.
    pub fn substitute_power(&self, k: u32) -> QSeries {
        let k = k.max(1) as i64;
        QSeries {
            scale: self.scale,
            trunc: self.trunc * k,
            terms: self.terms.iter().map(|(&e, c)| (e * k, c.clone())).collect(),
        }
    }

    /// Replaces `q` by `-q`. Only defined when every exponent is an integer.
    pub fn negate_base(&self) -> Result<QSeries> {
        let d = self.scale.denom() as i64;
        let mut terms = BTreeMap::new();
        for (e, c) in self.terms() {
            if e % d != 0 {
                let r = Ratio::new(e, d);
                return Err(Error::NonIntegerExponent {
                    num: *r.numer(),
                    den: *r.denom(),
                });
            }
            let c = if (e / d).rem_euclid(2) == 1 { -c } else { c.clone() };
            terms.insert(e, c);
        }
        Ok(QSeries {
            scale: self.scale,
            trunc: self.trunc,
            terms,
        })
    }

    /// Compares coefficients at every exponent `<= order` (scaled units).
    pub fn equal_to_order(&self, other: &QSeries, order: i64) -> Result<Report> {
        self.check_scale(other)?;
        let available = self.trunc.min(other.trunc);
        if order > available {
            return Err(Error::OrderTooHigh {
                requested: order,
                available,
            });
        }
        let mut a = self.terms.range(..=order).peekable();
        let mut b = other.terms.range(..=order).peekable();
        let zero = Coeff::zero();
        loop {
            let (e, lhs, rhs) = match (a.peek(), b.peek()) {
                (None, None) => return Ok(Report::equal(self.scale, order)),
                (Some((&ea, ca)), Some((&eb, cb))) => {
                    if ea < eb {
                        (ea, *ca, &zero)
                    } else if eb < ea {
                        (eb, &zero, *cb)
                    } else {
                        if ca == cb {
                            a.next();
                            b.next();
                            continue;
                        }
                        (ea, *ca, *cb)
                    }
                }
                (Some((&ea, ca)), None) => (ea, *ca, &zero),
                (None, Some((&eb, cb))) => (eb, &zero, *cb),
            };
            return Ok(Report {
                scale: self.scale,
                equal: false,
                checked_order: order,
                first_mismatch: Some(Mismatch {
                    exp: e,
                    lhs: lhs.clone(),
                    rhs: rhs.clone(),
                }),
            });
        }
    }

    /// Copy with one coefficient bumped by 1 (mutation testing).
    pub fn tampered(&self) -> QSeries {
        let e = match self.valuation() {
            Some(v) => v,
            None => self.trunc.min(0),
        };
        let mut out = self.clone();
        let slot = out.terms.entry(e).or_insert_with(Coeff::zero);
        *slot += Coeff::one();
        if slot.is_zero() {
            out.terms.remove(&e);
        }
        out
    }

    /// Renders terms in ascending order as `c*q^(p/r)`, e.g. `1 - 1*q^1 + 1*q^3`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, (e, c)) in self.terms().enumerate() {
            let (neg, mag) = if c.is_negative() { (true, -c) } else { (false, c.clone()) };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&mag.to_string());
            if e != 0 {
                let r = self.scale.to_ratio(e);
                if r.is_integer() {
                    out.push_str(&format!("*q^{}", r.numer()));
                } else {
                    out.push_str(&format!("*q^({}/{})", r.numer(), r.denom()));
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Dense integer power series `1 + ...` in scaled units, exact through
/// `order`. Used for the unit parts of products and summands, which always
/// have integer coefficients, so no rational reduction is needed until the
/// final conversion.
#[derive(Debug, Clone)]
pub(crate) struct IntUnit {
    coeffs: Vec<BigInt>,
}

impl IntUnit {
    pub fn one(order: i64) -> Self {
        let mut coeffs = vec![BigInt::zero(); order.max(-1).saturating_add(1) as usize];
        if let Some(c) = coeffs.first_mut() {
            *c = BigInt::one();
        }
        IntUnit { coeffs }
    }

    pub fn order(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn clip(mut self, order: i64) -> Self {
        self.coeffs.truncate(order.max(-1).saturating_add(1) as usize);
        self
    }

    /// Multiplies by `(1 - y)`, `y.exp > 0`.
    pub fn mul_binomial(&mut self, y: ScaledMono) {
        let step = y.exp as usize;
        debug_assert!(step > 0);
        for i in (step..self.coeffs.len()).rev() {
            if self.coeffs[i - step].is_zero() {
                continue;
            }
            let (lo, hi) = self.coeffs.split_at_mut(i);
            if y.neg {
                hi[0] += &lo[i - step];
            } else {
                hi[0] -= &lo[i - step];
            }
        }
    }

    /// Divides by `(1 - y)`, `y.exp > 0`.
    pub fn div_binomial(&mut self, y: ScaledMono) {
        let step = y.exp as usize;
        debug_assert!(step > 0);
        for i in step..self.coeffs.len() {
            if self.coeffs[i - step].is_zero() {
                continue;
            }
            let (lo, hi) = self.coeffs.split_at_mut(i);
            if y.neg {
                hi[0] -= &lo[i - step];
            } else {
                hi[0] += &lo[i - step];
            }
        }
    }

    /// `scalar * q^shift * self` as a series truncated at `shift + order`.
    pub fn to_series(&self, scale: Scale, scalar: &Coeff, shift: i64) -> QSeries {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (shift + i as i64, Coeff::from_integer(c.clone()) * scalar))
            .collect();
        QSeries {
            scale,
            trunc: shift + self.order(),
            terms,
        }
    }
}

/// Sum of `scalar_k * q^shift_k * unit_k`, truncated at `trunc`, accumulated
/// in integers over the common denominator of the scalars.
pub(crate) fn sum_scaled_units<'a>(
    scale: Scale,
    trunc: i64,
    pieces: impl IntoIterator<Item = (&'a Coeff, i64, &'a IntUnit)>,
) -> QSeries {
    let pieces: Vec<_> = pieces.into_iter().filter(|(c, s, _)| !c.is_zero() && *s <= trunc).collect();
    let Some(lo) = pieces.iter().map(|p| p.1).min() else {
        return QSeries::zero(scale, trunc);
    };
    let l = pieces.iter().fold(BigInt::one(), |l, (c, _, _)| l.lcm(c.denom()));
    let mut acc = vec![BigInt::zero(); (trunc - lo + 1) as usize];
    for (c, shift, unit) in pieces {
        let m = c.numer() * (&l / c.denom());
        let base = (shift - lo) as usize;
        for (i, u) in unit.coeffs.iter().enumerate() {
            let Some(slot) = acc.get_mut(base + i) else { break };
            if !u.is_zero() {
                *slot += &m * u;
            }
        }
    }
    QSeries::from_dense_int(scale, trunc, lo, acc, &l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2() -> Scale {
        Scale::default()
    }

    /// Integer-exponent series at scale 2.
    fn ser(trunc: i64, terms: &[(i64, i64)]) -> QSeries {
        let scaled: Vec<(i64, i64)> = terms.iter().map(|&(e, c)| (2 * e, c)).collect();
        QSeries::from_ints(s2(), 2 * trunc, &scaled)
    }

    #[test]
    fn monomial_constructor() {
        let s = QSeries::monomial(s2(), Monomial::q(3), 20).unwrap();
        assert_eq!(s, ser(10, &[(3, 1)]));
        let s = QSeries::monomial(s2(), Monomial::neg_q_frac(1, 2), 20).unwrap();
        assert_eq!(s.coeff(1), Coeff::from_integer((-1).into()));
        let s = QSeries::monomial(s2(), Monomial::ONE, 20).unwrap();
        assert_eq!(s, ser(10, &[(0, 1)]));
        let s = QSeries::monomial(s2(), Monomial::q(30), 20).unwrap();
        assert!(s.is_zero());
        assert!(QSeries::monomial(Scale::new(1).unwrap(), Monomial::q_frac(1, 2), 5).is_err());
    }

    #[test]
    fn add_cancels() {
        let a = ser(10, &[(1, 1)]);
        assert!(a.add(&a.neg()).unwrap().is_zero());
        let a = ser(10, &[(0, 1), (1, -1), (2, 1)]);
        let b = ser(10, &[(1, 1), (2, -1)]);
        assert_eq!(a.add(&b).unwrap(), ser(10, &[(0, 1)]));
        let c = QSeries::zero(Scale::new(1).unwrap(), 3);
        assert!(matches!(a.add(&c), Err(Error::ScaleMismatch { .. })));
    }

    #[test]
    fn mul_examples() {
        let a = ser(10, &[(0, 1), (1, -1)]);
        let b = ser(10, &[(0, 1), (1, 1)]);
        assert_eq!(a.mul(&b).unwrap(), ser(10, &[(0, 1), (2, -1)]));

        let p = ser(20, &[(0, 1), (1, 1)])
            .mul(&ser(20, &[(0, 1), (2, 1)]))
            .unwrap()
            .mul(&ser(20, &[(0, 1), (3, 1)]))
            .unwrap();
        // brute-force expansion over the 8 subsets of {1, 2, 3}
        let mut expect = [0i64; 7];
        for mask in 0..8u32 {
            let e: usize = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).sum();
            expect[e] += 1;
        }
        let want: Vec<(i64, i64)> = expect.iter().enumerate().map(|(e, &c)| (e as i64, c)).collect();
        assert_eq!(p, ser(20, &want));
        assert_eq!(expect, [1, 1, 1, 2, 1, 1, 1]);

        let inv = ser(10, &[(-1, 1)]);
        let r = inv.mul(&ser(10, &[(1, 1), (2, 1)])).unwrap();
        assert_eq!(r.coeff(0), Coeff::one());
        assert_eq!(r.coeff(2), Coeff::one());
        assert_eq!(r.len(), 2);
        // q^-1 lowers the sound order of the other factor
        assert_eq!(r.trunc(), 2 * 10 - 2);
    }

    #[test]
    fn geometric_division() {
        let one = ser(10, &[(0, 1)]);
        let g = one.div_binomial(Monomial::q(1)).unwrap();
        assert_eq!(g, ser(10, &(0..=10).map(|e| (e, 1)).collect::<Vec<_>>()));
        let g = one.div_binomial(Monomial::neg_q(1)).unwrap();
        let alt: Vec<(i64, i64)> = (0..=10).map(|e| (e, if e % 2 == 0 { 1 } else { -1 })).collect();
        assert_eq!(g, ser(10, &alt));

        let g = one.div_binomial(Monomial::q(-1)).unwrap();
        for e in 1..=10 {
            assert_eq!(g.coeff(2 * e), Coeff::from_integer((-1).into()));
        }
        assert!(g.coeff(0).is_zero());
        let back = g.mul_binomial(Monomial::q(-1)).unwrap();
        assert!(back.equal_to_order(&one, 20).unwrap().equal);

        let half = one.div_binomial(Monomial::neg_q(0)).unwrap();
        assert_eq!(half.coeff(0), Ratio::new(1.into(), 2.into()));
        assert!(one.div_binomial(Monomial::ONE).is_err());
    }

    #[test]
    fn inversion() {
        let s = ser(20, &[(0, 1), (2, -1)]);
        let even: Vec<(i64, i64)> = (0..=10).map(|e| (2 * e, 1)).collect();
        assert_eq!(s.invert().unwrap(), ser(20, &even));

        let two = ser(20, &[(0, 2)]);
        assert_eq!(two.invert().unwrap().coeff(0), Ratio::new(1.into(), 2.into()));

        let s = ser(20, &[(0, 1), (1, 1), (2, 1)]);
        let inv = s.invert().unwrap();
        let back = inv.mul(&s).unwrap();
        assert!(back.equal_to_order(&ser(20, &[(0, 1)]), 40).unwrap().equal);
        // 1/(1+q+q^2) = (1-q)/(1-q^3)
        let pattern = [1, -1, 0, 1, -1, 0, 1];
        for (e, c) in pattern.iter().enumerate() {
            assert_eq!(inv.coeff(2 * e as i64), Coeff::from_integer((*c).into()));
        }
        assert!(QSeries::zero(s2(), 10).invert().is_err());

        // shifted input: q^2 (1 + q)
        let s = ser(12, &[(2, 1), (3, 1)]);
        let inv = s.invert().unwrap();
        assert_eq!(inv.valuation(), Some(-4));
        assert_eq!(inv.trunc(), 24 - 8);
    }

    #[test]
    fn substitution_and_parity() {
        let s = ser(5, &[(1, 1), (3, 1)]);
        let t = s.substitute_power(2);
        assert_eq!(t.coeff(4), Coeff::one());
        assert_eq!(t.coeff(12), Coeff::one());
        assert_eq!(t.trunc(), 20);

        let s = ser(5, &[(0, 1), (1, -1), (2, 1)]);
        assert_eq!(s.negate_base().unwrap(), ser(5, &[(0, 1), (1, 1), (2, 1)]));
        let even = ser(10, &[(0, 1), (6, -1)]);
        assert_eq!(even.negate_base().unwrap(), even);
        let half = QSeries::from_ints(s2(), 10, &[(1, 1)]);
        assert!(matches!(half.negate_base(), Err(Error::NonIntegerExponent { num: 1, den: 2 })));
    }

    #[test]
    fn comparison() {
        let g = ser(10, &[(0, 1)]).div_binomial(Monomial::q(1)).unwrap();
        assert!(g.equal_to_order(&ser(2, &[(0, 1), (1, 1), (2, 1)]), 4).unwrap().equal);
        let one = ser(10, &[(0, 1)]);
        let other = ser(10, &[(0, 1), (5, 1)]);
        assert!(one.equal_to_order(&other, 8).unwrap().equal);
        let r = one.equal_to_order(&other, 10).unwrap();
        assert!(!r.equal);
        let m = r.first_mismatch.unwrap();
        assert_eq!((m.exp, m.lhs, m.rhs), (10, Coeff::zero(), Coeff::one()));
        assert!(matches!(one.equal_to_order(&other, 21), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn rendering() {
        assert_eq!(ser(5, &[(0, 1), (1, -1), (3, 1)]).render(), "1 - 1*q^1 + 1*q^3");
        assert_eq!(QSeries::from_ints(s2(), 10, &[(-3, -2)]).render(), "-2*q^(-3/2)");
        assert_eq!(QSeries::zero(s2(), 4).render(), "0");
    }
}
