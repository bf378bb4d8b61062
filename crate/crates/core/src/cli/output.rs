//! Exact output records: every number is an integer or an integer pair.

use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::series::{Coeff, QSeries, Report};

/// Arbitrary-size integer rendered as a bare JSON number.
fn big(n: &num_bigint::BigInt) -> Number {
    Number::from_str(&n.to_string()).expect("integers are valid JSON numbers")
}

fn small(n: i64) -> Number {
    Number::from(n)
}

/// `[numerator, denominator]` of an exact rational.
pub type Pair = [Number; 2];

fn pair(c: &Coeff) -> Pair {
    [big(c.numer()), big(c.denom())]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchRecord {
    pub exp_num: Number,
    pub exp_den: Number,
    pub lhs: Pair,
    pub rhs: Pair,
}

/// One verified subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub subject: String,
    pub order: Number,
    pub equal: bool,
    pub first_mismatch: Option<MismatchRecord>,
    pub elapsed_ms: Number,
}

impl OutputRecord {
    pub fn new(subject: &str, order: i64, report: &Report, elapsed_ms: u128) -> Self {
        let first_mismatch = report.first_mismatch.as_ref().map(|m| {
            let e = report.scale.to_ratio(m.exp);
            MismatchRecord {
                exp_num: small(*e.numer()),
                exp_den: small(*e.denom()),
                lhs: pair(&m.lhs),
                rhs: pair(&m.rhs),
            }
        });
        OutputRecord {
            subject: subject.to_string(),
            order: small(order),
            equal: report.equal,
            first_mismatch,
            elapsed_ms: Number::from(elapsed_ms as u64),
        }
    }

    pub fn render_text(&self) -> String {
        let status = match &self.first_mismatch {
            None => "equal".to_string(),
            Some(m) => format!(
                "MISMATCH at q^({}/{}): lhs {}/{} vs rhs {}/{}",
                m.exp_num, m.exp_den, m.lhs[0], m.lhs[1], m.rhs[0], m.rhs[1]
            ),
        };
        format!("{:<6} order {:<5} {} ({} ms)", self.subject, self.order, status, self.elapsed_ms)
    }
}

/// Compact JSON array of records.
pub fn render_json(records: &[OutputRecord]) -> String {
    serde_json::to_string(records).expect("records serialize")
}

/// One row of a coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub exp_num: Number,
    pub exp_den: Number,
    pub coef_num: Number,
    pub coef_den: Number,
}

pub fn coeff_rows(s: &QSeries) -> Vec<CoeffRow> {
    s.terms()
        .map(|(e, c)| {
            let r: Ratio<i64> = s.scale().to_ratio(e);
            CoeffRow {
                exp_num: small(*r.numer()),
                exp_den: small(*r.denom()),
                coef_num: big(c.numer()),
                coef_den: big(c.denom()),
            }
        })
        .collect()
}

pub const CSV_HEADER: &str = "exp_num,exp_den,coef_num,coef_den";

pub fn render_csv(s: &QSeries) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in coeff_rows(s) {
        out.push_str(&format!("{},{},{},{}\n", r.exp_num, r.exp_den, r.coef_num, r.coef_den));
    }
    out
}

pub fn render_rows_json(s: &QSeries) -> String {
    serde_json::to_string(&coeff_rows(s)).expect("rows serialize")
}
