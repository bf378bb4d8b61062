//! Signed monomials `±q^r` with rational exponent.
//!
//! Every parameter that appears in the false theta computations is of this
//! shape, so products and quotients such as `aq/bc` stay exact and never go
//! through series division.

use std::fmt;
use std::ops::{Div, Mul, Neg};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::series::Scale;

/// `sign * q^exp` with `sign` in {+1, -1}. Never the zero value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    neg: bool,
    exp: Ratio<i64>,
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        neg: false,
        exp: Ratio::new_raw(0, 1),
    };

    pub fn new(negative: bool, exp: Ratio<i64>) -> Self {
        Monomial { neg: negative, exp }
    }

    /// `q^e`.
    pub fn q(e: i64) -> Self {
        Monomial::new(false, Ratio::from_integer(e))
    }

    /// `q^(num/den)`.
    pub fn q_frac(num: i64, den: i64) -> Self {
        Monomial::new(false, Ratio::new(num, den))
    }

    /// `-q^e`.
    pub fn neg_q(e: i64) -> Self {
        Monomial::new(true, Ratio::from_integer(e))
    }

    /// `-q^(num/den)`.
    pub fn neg_q_frac(num: i64, den: i64) -> Self {
        Monomial::new(true, Ratio::new(num, den))
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    /// +1 or -1.
    pub fn sign(&self) -> i64 {
        if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn exp(&self) -> Ratio<i64> {
        self.exp
    }

    pub fn is_one(&self) -> bool {
        !self.neg && self.exp.is_zero()
    }

    pub fn pow(self, k: i64) -> Self {
        Monomial {
            neg: self.neg && k.rem_euclid(2) == 1,
            exp: self.exp * k,
        }
    }

    pub fn recip(self) -> Self {
        Monomial {
            neg: self.neg,
            exp: -self.exp,
        }
    }

    /// Exponent in units of `1/D`.
    pub fn scaled_exp(&self, scale: Scale) -> Result<i64> {
        let e = self.exp * scale.denom() as i64;
        if e.is_integer() {
            Ok(e.to_integer())
        } else {
            Err(Error::NotRepresentable {
                exp: self.exp.to_string(),
                scale: scale.denom(),
            })
        }
    }

    /// `base^k` is `+1` for some `k >= 0` (the terminating condition of a
    /// Pochhammer product `(self; base)`): returns that `k`.
    pub fn as_base_power(&self, base: Monomial) -> Option<i64> {
        if base.exp.is_zero() {
            return None;
        }
        let k = -self.exp / base.exp;
        if !k.is_integer() || k.is_negative() {
            return None;
        }
        let k = k.to_integer();
        (base.pow(-k) == *self).then_some(k)
    }
}

impl Mul for Monomial {
    type Output = Monomial;

    fn mul(self, rhs: Monomial) -> Monomial {
        Monomial {
            neg: self.neg ^ rhs.neg,
            exp: self.exp + rhs.exp,
        }
    }
}

impl Div for Monomial {
    type Output = Monomial;

    fn div(self, rhs: Monomial) -> Monomial {
        Monomial {
            neg: self.neg ^ rhs.neg,
            exp: self.exp - rhs.exp,
        }
    }
}

impl Neg for Monomial {
    type Output = Monomial;

    fn neg(self) -> Monomial {
        Monomial {
            neg: !self.neg,
            exp: self.exp,
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.neg { "-" } else { "" };
        if self.exp.is_zero() {
            write!(f, "{sign}1")
        } else if self.exp.is_one() {
            write!(f, "{sign}q")
        } else if self.exp.is_integer() {
            write!(f, "{sign}q^{}", self.exp.numer())
        } else {
            write!(f, "{sign}q^({}/{})", self.exp.numer(), self.exp.denom())
        }
    }
}

impl FromStr for Monomial {
    type Err = Error;

    /// Accepts `1`, `-1`, `q`, `-q`, `q^3`, `-q^-2`, `q^(3/2)`, `-q^(-1/2)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParam(format!("cannot parse monomial {s:?}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(&t)),
        };
        if body == "1" {
            return Ok(Monomial::new(neg, Ratio::zero()));
        }
        let rest = body.strip_prefix('q').ok_or_else(bad)?;
        if rest.is_empty() {
            return Ok(Monomial::new(neg, Ratio::one()));
        }
        let rest = rest.strip_prefix('^').ok_or_else(bad)?;
        let rest = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(rest);
        let exp = match rest.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.parse().map_err(|_| bad())?;
                let d: i64 = d.parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Ratio::new(n, d)
            }
            None => Ratio::from_integer(rest.parse().map_err(|_| bad())?),
        };
        Ok(Monomial::new(neg, exp))
    }
}
