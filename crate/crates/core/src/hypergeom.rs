//! Basic hypergeometric sums with monomial parameters.
//!
//! Every term is kept as `scalar * q^shift * unit`, where `unit` is a series
//! with constant term 1 built only from binomials `(1 - y)` with `e(y) > 0`.
//! A factor `(1 - x)` with `e(x) < 0` is rewritten as `(-x)(1 - 1/x)` before
//! it touches a series. Consequently each term only has to be expanded over
//! the window between its own valuation and the target order, even when the
//! Laurent intermediates (upper parameters `q^-n`) reach very negative
//! exponents.

use num_traits::One;

use crate::error::{Error, Result};
use crate::monomial::Monomial;
use crate::pochhammer::{poch_inf, poch_inf_valuation, poch_many, Param, SplitFactor};
use crate::series::{sum_scaled_units, Coeff, IntUnit, QSeries, Scale, ScaledMono};

/// Safety valve on the number of terms a single sum may plan.
const MAX_TERMS: usize = 200_000;

/// `r+1 phi r (upper; lower; base, arg)` truncated at `trunc` (units of `1/D`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiSpec {
    pub upper: Vec<Param>,
    pub lower: Vec<Param>,
    pub base: Monomial,
    pub arg: Monomial,
    pub scale: Scale,
    pub trunc: i64,
}

impl PhiSpec {
    pub fn new(upper: Vec<Param>, lower: Vec<Param>, base: Monomial, arg: Monomial, scale: Scale, trunc: i64) -> Self {
        PhiSpec {
            upper,
            lower,
            base,
            arg,
            scale,
            trunc,
        }
    }

    /// The same series as a general term-ratio sum.
    pub fn as_sum(&self) -> TermSum {
        phi_as_sum(&self.upper, &self.lower, self.base, self.arg)
    }
}

/// `(base; base)_k` joins the denominator.
pub fn phi_as_sum(upper: &[Param], lower: &[Param], base: Monomial, arg: Monomial) -> TermSum {
    let mut lower = lower.to_vec();
    lower.push(Param::Mono(base));
    TermSum {
        upper: upper.to_vec(),
        lower,
        base,
        arg,
        quad: 0,
    }
}

/// `sum_k prod (upper; base)_k / prod (lower; base)_k * arg^k * base^(quad * k(k-1)/2)`.
///
/// Unlike [`PhiSpec`] there is no implicit `(base; base)_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSum {
    pub upper: Vec<Param>,
    pub lower: Vec<Param>,
    pub base: Monomial,
    pub arg: Monomial,
    pub quad: u32,
}

/// Smallest `n` with some upper parameter equal to `base^-n`.
pub fn detect_terminating(spec: &PhiSpec) -> Option<usize> {
    terminating_index(&spec.upper, spec.base)
}

fn terminating_index(upper: &[Param], base: Monomial) -> Option<usize> {
    upper
        .iter()
        .filter_map(|p| p.monomial())
        .filter_map(|m| m.as_base_power(base))
        .min()
        .map(|n| n as usize)
}

/// Factors that turn term `k - 1` into term `k`.
#[derive(Debug, Clone)]
pub(crate) struct Transition {
    pub mul: Vec<ScaledMono>,
    pub div: Vec<ScaledMono>,
}

#[derive(Debug, Clone)]
pub(crate) struct PlannedTerm {
    pub scalar: Coeff,
    pub shift: i64,
    /// `None` for term 0.
    pub from_prev: Option<Transition>,
}

/// Walks the terms of a [`TermSum`] computing scalars and valuations only.
pub(crate) struct TermWalker {
    upper: Vec<Monomial>,
    lower: Vec<Monomial>,
    base: Monomial,
    base_exp: i64,
    arg: ScaledMono,
    quad: i64,
    scale: Scale,
    k: usize,
    scalar: Coeff,
    shift: i64,
    /// Past this index every parameter factor has nonnegative exponent.
    settle: usize,
    dead: bool,
}

impl TermWalker {
    pub fn new(sum: &TermSum, scale: Scale) -> Result<Self> {
        let base_exp = sum.base.scaled_exp(scale)?;
        if base_exp <= 0 {
            return Err(Error::NotEvaluable(format!(
                "base {} must have a positive exponent",
                sum.base
            )));
        }
        let upper: Vec<Monomial> = sum.upper.iter().filter_map(|p| p.monomial()).collect();
        let lower: Vec<Monomial> = sum.lower.iter().filter_map(|p| p.monomial()).collect();
        let mut settle = 0usize;
        for m in upper.iter().chain(&lower) {
            let e = m.scaled_exp(scale)?;
            if e < 0 {
                settle = settle.max(((-e + base_exp - 1) / base_exp) as usize);
            }
        }
        Ok(TermWalker {
            upper,
            lower,
            base: sum.base,
            base_exp,
            arg: ScaledMono::from_monomial(sum.arg, scale)?,
            quad: sum.quad as i64,
            scale,
            k: 0,
            scalar: Coeff::one(),
            shift: 0,
            settle,
            dead: false,
        })
    }

    pub fn index(&self) -> usize {
        self.k
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn settle_index(&self) -> usize {
        self.settle
    }

    /// Valuation increment from term `k` to `k + 1` once `k >= settle_index`.
    pub fn settled_slope(&self, k: usize) -> i64 {
        self.arg.exp + self.quad * k as i64 * self.base_exp
    }

    /// Moves to term `k + 1`. Returns `None` when that term (and every later
    /// one) vanishes because of an upper factor `(1 - 1)`.
    pub fn advance(&mut self) -> Result<Option<Transition>> {
        if self.dead {
            return Ok(None);
        }
        let k = self.k as i64;
        let bk = self.base.pow(k);
        let mut tr = Transition {
            mul: Vec::with_capacity(self.upper.len()),
            div: Vec::with_capacity(self.lower.len()),
        };
        let mut scalar = Coeff::one();
        let mut shift = 0i64;
        for a in &self.upper {
            let x = ScaledMono::from_monomial(*a * bk, self.scale)?;
            let sf = SplitFactor::of(x);
            if sf.scalar == 0 {
                self.dead = true;
                return Ok(None);
            }
            scalar *= Coeff::from_integer(sf.scalar.into());
            shift += sf.shift;
            tr.mul.extend(sf.unit);
        }
        for b in &self.lower {
            let x = ScaledMono::from_monomial(*b * bk, self.scale)?;
            let sf = SplitFactor::of(x);
            if sf.scalar == 0 {
                return Err(Error::DivisionByZero(format!(
                    "denominator factor (1 - {}) vanishes at index {}",
                    *b * bk,
                    k
                )));
            }
            scalar /= Coeff::from_integer(sf.scalar.into());
            shift -= sf.shift;
            tr.div.extend(sf.unit);
        }
        if self.arg.neg {
            scalar = -scalar;
        }
        shift += self.arg.exp;
        if self.quad > 0 {
            let m = ScaledMono::from_monomial(bk.pow(self.quad), self.scale)?;
            if m.neg {
                scalar = -scalar;
            }
            shift += m.exp;
        }
        self.scalar *= scalar;
        self.shift += shift;
        self.k += 1;
        Ok(Some(tr))
    }

    pub fn planned(&self, from_prev: Option<Transition>) -> PlannedTerm {
        PlannedTerm {
            scalar: self.scalar.clone(),
            shift: self.shift,
            from_prev,
        }
    }
}

/// Every term of `sum` that can reach exponents `<= order`.
pub(crate) fn plan_sum(sum: &TermSum, scale: Scale, order: i64) -> Result<Vec<PlannedTerm>> {
    let mut w = TermWalker::new(sum, scale)?;
    let terminates = terminating_index(&sum.upper, sum.base).is_some();
    if !terminates && sum.quad == 0 && w.arg.exp <= 0 {
        return Err(Error::NotEvaluable(format!(
            "nonterminating series with argument exponent {} <= 0 is formally divergent",
            scale.to_ratio(w.arg.exp)
        )));
    }
    let mut terms = vec![w.planned(None)];
    loop {
        let k = w.index();
        if !terminates && k >= w.settle_index() && w.settled_slope(k) > 0 && w.shift() > order {
            // valuations only grow from here on
            terms.pop();
            break;
        }
        if terms.len() > MAX_TERMS {
            return Err(Error::NotEvaluable("term budget exhausted".into()));
        }
        match w.advance()? {
            None => break,
            Some(tr) => terms.push(w.planned(Some(tr))),
        }
    }
    Ok(terms)
}

/// Computes `sum scalar_k q^shift_k unit_k` where term `k` is needed to
/// `orders[k]` (its contribution is clipped there).
pub(crate) fn sum_planned(terms: &[PlannedTerm], scale: Scale, order: i64) -> QSeries {
    let needs: Vec<i64> = terms.iter().map(|t| order - t.shift).collect();
    let units = expand_units(terms, &needs);
    sum_scaled_units(
        scale,
        order,
        terms
            .iter()
            .zip(&units)
            .filter_map(|(t, u)| u.as_ref().map(|u| (&t.scalar, t.shift, u))),
    )
}

/// Expands the unit factor of each term to `needs[k]`; `None` where nothing
/// at or below the target is required.
pub(crate) fn expand_units(terms: &[PlannedTerm], needs: &[i64]) -> Vec<Option<IntUnit>> {
    // a unit must be carried far enough for every later term that uses it
    let mut carry = vec![i64::MIN; terms.len()];
    let mut run = i64::MIN;
    for k in (0..terms.len()).rev() {
        run = run.max(needs[k]);
        carry[k] = run;
    }
    let mut out = vec![None; terms.len()];
    let mut unit: Option<IntUnit> = None;
    for (k, t) in terms.iter().enumerate() {
        let order = carry[k];
        if order < 0 {
            break;
        }
        let u = match (&t.from_prev, unit.take()) {
            (Some(tr), Some(prev)) => {
                let mut u = prev.clip(order);
                for y in tr.mul.iter().filter(|y| y.exp <= order) {
                    u.mul_binomial(*y);
                }
                for y in tr.div.iter().filter(|y| y.exp <= order) {
                    u.div_binomial(*y);
                }
                u
            }
            _ => IntUnit::one(order),
        };
        if needs[k] >= 0 {
            out[k] = Some(u.clone().clip(needs[k]));
        }
        unit = Some(u);
    }
    out
}

/// Exact truncated value of a general term-ratio sum.
pub fn eval_sum(sum: &TermSum, scale: Scale, order: i64) -> Result<QSeries> {
    let terms = plan_sum(sum, scale, order)?;
    Ok(sum_planned(&terms, scale, order))
}

/// Lower bound on the valuation of `sum`, valid at any order `<= order`.
pub fn sum_valuation_bound(sum: &TermSum, scale: Scale, order: i64) -> Result<i64> {
    let terms = plan_sum(sum, scale, order)?;
    Ok(terms.iter().map(|t| t.shift).min().unwrap_or(order + 1))
}

/// Evaluates `r+1 phi r` per its defining sum.
pub fn eval_phi(spec: &PhiSpec) -> Result<QSeries> {
    if spec.upper.len() != spec.lower.len() + 1 {
        return Err(Error::InvalidParam(format!(
            "phi needs |upper| = |lower| + 1, got {} and {}",
            spec.upper.len(),
            spec.lower.len()
        )));
    }
    eval_sum(&spec.as_sum(), spec.scale, spec.trunc)
}

/// One factor of a [`product`].
#[derive(Debug, Clone)]
pub enum Factor {
    Sum(TermSum),
    Phi { upper: Vec<Param>, lower: Vec<Param>, base: Monomial, arg: Monomial },
    PochInf(Monomial, Monomial),
    InvPochInf(Monomial, Monomial),
    Poch(Vec<Param>, Monomial, usize),
    InvPoch(Vec<Param>, Monomial, usize),
    Mono(Monomial),
    /// `(1 - m)`.
    Binomial(Monomial),
    /// `1 / (1 - m)`.
    InvBinomial(Monomial),
    Series(QSeries),
}

impl Factor {
    pub fn phi(upper: Vec<Param>, lower: Vec<Param>, base: Monomial, arg: Monomial) -> Self {
        Factor::Phi { upper, lower, base, arg }
    }

    fn as_sum(&self) -> Option<TermSum> {
        match self {
            Factor::Sum(s) => Some(s.clone()),
            Factor::Phi { upper, lower, base, arg } => Some(phi_as_sum(upper, lower, *base, *arg)),
            _ => None,
        }
    }

    /// `Ok(None)` means the factor is identically zero.
    fn valuation_bound(&self, scale: Scale, order: i64) -> Result<Option<i64>> {
        if let Some(sum) = self.as_sum() {
            return sum_valuation_bound(&sum, scale, order).map(Some);
        }
        Ok(match self {
            Factor::PochInf(a, b) => poch_inf_valuation(*a, *b, scale)?,
            Factor::InvPochInf(a, b) => match poch_inf_valuation(*a, *b, scale)? {
                Some(v) => Some(-v),
                None => {
                    return Err(Error::DivisionByZero(format!("({a}; {b})_inf vanishes")));
                }
            },
            Factor::Poch(ps, b, n) | Factor::InvPoch(ps, b, n) => {
                let mut v = 0;
                for p in ps {
                    if crate::pochhammer::poch_vanishes(*p, *b, *n) {
                        if matches!(self, Factor::InvPoch(..)) {
                            return Err(Error::DivisionByZero(format!("({p}; {b})_{n} vanishes")));
                        }
                        return Ok(None);
                    }
                    if let Param::Mono(a) = p {
                        for k in 0..*n {
                            v += ScaledMono::from_monomial(*a * b.pow(k as i64), scale)?.exp.min(0);
                        }
                    }
                }
                Some(if matches!(self, Factor::InvPoch(..)) { -v } else { v })
            }
            Factor::Mono(m) => Some(m.scaled_exp(scale)?),
            Factor::Binomial(m) => {
                if m.is_one() {
                    None
                } else {
                    Some(m.scaled_exp(scale)?.min(0))
                }
            }
            Factor::InvBinomial(m) => {
                if m.is_one() {
                    return Err(Error::DivisionByZero("1 / (1 - 1)".into()));
                }
                Some(-m.scaled_exp(scale)?.min(0))
            }
            Factor::Series(s) => s.valuation().or(Some(s.trunc() + 1)),
            Factor::Sum(_) | Factor::Phi { .. } => unreachable!(),
        })
    }

    /// Evaluates the factor so that it is exact at least up to `order`.
    fn eval(&self, scale: Scale, order: i64, valuation: i64) -> Result<QSeries> {
        if let Some(sum) = self.as_sum() {
            return eval_sum(&sum, scale, order);
        }
        match self {
            Factor::PochInf(a, b) => poch_inf(*a, *b, scale, order),
            Factor::InvPochInf(a, b) => {
                // valuation here is -v(product); invert loses 2v of order
                poch_inf(*a, *b, scale, order - 2 * valuation)?.invert()
            }
            Factor::Poch(ps, b, n) => poch_many(ps, *b, *n, scale, order),
            Factor::InvPoch(ps, b, n) => poch_many(ps, *b, *n, scale, order - 2 * valuation)?.invert(),
            Factor::Mono(m) => QSeries::monomial(scale, *m, order),
            Factor::Binomial(m) => QSeries::one(scale, order - m.scaled_exp(scale)?.min(0)).mul_binomial(*m),
            Factor::InvBinomial(m) => {
                QSeries::one(scale, order + m.scaled_exp(scale)?.min(0)).div_binomial(*m)
            }
            Factor::Series(s) => {
                if s.trunc() < order {
                    return Err(Error::OrderTooHigh {
                        requested: order,
                        available: s.trunc(),
                    });
                }
                Ok(s.clone())
            }
            Factor::Sum(_) | Factor::Phi { .. } => unreachable!(),
        }
    }
}

/// Product of factors, exact up to `order`. Each factor is evaluated to the
/// order required by the valuation bounds of all the others.
pub fn product(factors: &[Factor], scale: Scale, order: i64) -> Result<QSeries> {
    let mut bounds = Vec::with_capacity(factors.len());
    for f in factors {
        match f.valuation_bound(scale, order)? {
            Some(v) => bounds.push(v),
            None => return Ok(QSeries::zero(scale, order)),
        }
    }
    let total: i64 = bounds.iter().sum();
    let mut acc: Option<QSeries> = None;
    for (f, &v) in factors.iter().zip(&bounds) {
        let need = order - (total - v);
        let s = f.eval(scale, need, v)?;
        acc = Some(match acc {
            None => s,
            Some(a) => a.mul(&s)?,
        });
    }
    let out = acc.unwrap_or_else(|| QSeries::one(scale, order));
    if out.trunc() < order {
        return Err(Error::OrderTooHigh {
            requested: order,
            available: out.trunc(),
        });
    }
    Ok(out.clip(order))
}

/// Lower bound on the valuation of a product of factors; `None` when some
/// factor vanishes identically.
pub fn product_valuation_bound(factors: &[Factor], scale: Scale, order: i64) -> Result<Option<i64>> {
    let mut total = 0;
    for f in factors {
        match f.valuation_bound(scale, order)? {
            Some(v) => total += v,
            None => return Ok(None),
        }
    }
    Ok(Some(total))
}

/// Sum of already-built pieces, all exact to `order`.
pub fn sum_of(pieces: impl IntoIterator<Item = QSeries>, scale: Scale, order: i64) -> Result<QSeries> {
    let mut acc = QSeries::zero(scale, order);
    for p in pieces {
        acc = acc.add(&p)?;
    }
    if acc.trunc() < order {
        return Err(Error::OrderTooHigh {
            requested: order,
            available: acc.trunc(),
        });
    }
    Ok(acc)
}
