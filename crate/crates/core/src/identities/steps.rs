//! Registry of the intermediate equalities used to derive the five
//! identities. Each step builds every displayed expression independently and
//! compares neighbouring expressions.
//!
//! Steps with a free symbol `a` are checked on the monomial grid `a = q^j`
//! and, where the derivation sends `a -> 0`, through the closed-form
//! Pochhammer limit.

use crate::error::{Error, Result};
use crate::hypergeom::{eval_phi, eval_sum, product, product_valuation_bound, Factor, PhiSpec, TermSum};
use crate::monomial::Monomial;
use crate::pochhammer::{poch, poch_limit_monomial, Param};
use crate::series::{compare_all, QSeries, Report, Scale, Sides};
use crate::transforms::{bailey_daum_sides, euler_sides, liu_worked_instances, reversal_sides, Transform, TransformInstance};

use super::{false_theta, lhs_series, mono, param, ratio_sum, IdentityId, RatioStep};

/// Parameters shared by every step check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepParams {
    pub scale: Scale,
    /// Whole-`q` comparison order for series steps (and the window above the
    /// leading term for closed forms).
    pub order: i64,
    /// Largest `n` for the `n`-indexed closed forms.
    pub n_max: usize,
}

impl StepParams {
    fn t(&self) -> i64 {
        self.scale.units(self.order)
    }
}

impl Default for StepParams {
    fn default() -> Self {
        StepParams {
            scale: Scale::default(),
            order: 100,
            n_max: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Equality of whole series, compared to the configured order.
    Series,
    /// A family indexed by `n`, checked for every `n <= n_max`.
    ClosedForm,
    /// A specialisation of one of the six transforms.
    Instance,
    /// Outside the formal model; never evaluated.
    Excluded(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepSpec {
    pub label: &'static str,
    pub kind: StepKind,
    pub summary: &'static str,
}

impl StepSpec {
    pub fn is_excluded(&self) -> bool {
        matches!(self.kind, StepKind::Excluded(_))
    }
}

const DIVERGENT: &str = "formal divergence: the 2phi1 argument -q^(-2n) has nonpositive exponent, so the terms have unboundedly negative valuation; the terminating consequence is checked as step 3.12";

const STEPS: [StepSpec; 28] = [
    StepSpec { label: "3.1", kind: StepKind::Series, summary: "left sum as a -> 0 limit of a 3φ2" },
    StepSpec { label: "3.2", kind: StepKind::Instance, summary: "Liu expansion, base q^2, a = q^j" },
    StepSpec { label: "3.3", kind: StepKind::Series, summary: "limit expansion and collapse to a theta difference" },
    StepSpec { label: "3.4", kind: StepKind::Series, summary: "second left sum as a 3φ2" },
    StepSpec { label: "3.5", kind: StepKind::Instance, summary: "Liu expansion with a-dependent parameters" },
    StepSpec { label: "3.6", kind: StepKind::ClosedForm, summary: "closed-form 3φ2 with free a" },
    StepSpec { label: "3.7", kind: StepKind::Series, summary: "third left sum as a 3φ2" },
    StepSpec { label: "3.8", kind: StepKind::Series, summary: "Liu expansion with beta = 0 and its simplification" },
    StepSpec { label: "3.9", kind: StepKind::ClosedForm, summary: "terminating 2φ1 to 3φ2 reversal, base q^2" },
    StepSpec { label: "3.10", kind: StepKind::Excluded(DIVERGENT), summary: "Heine transformation with argument -q^(-2n)" },
    StepSpec { label: "3.11", kind: StepKind::Excluded(DIVERGENT), summary: "Bailey-Daum summation with argument -q^(-2n)" },
    StepSpec { label: "3.12", kind: StepKind::ClosedForm, summary: "closed-form terminating 2φ1" },
    StepSpec { label: "3.13", kind: StepKind::ClosedForm, summary: "closed-form 3φ2" },
    StepSpec { label: "3.14", kind: StepKind::Series, summary: "3φ2 equals the s = 3 false theta series" },
    StepSpec { label: "3.15", kind: StepKind::Series, summary: "fourth left sum rewritten as a 2φ1" },
    StepSpec { label: "3.16", kind: StepKind::Series, summary: "2φ1 to quadratic sum to a -> 0 limit" },
    StepSpec { label: "3.17", kind: StepKind::Instance, summary: "Liu expansion, base q^2, beta = -q^2" },
    StepSpec { label: "3.18", kind: StepKind::Series, summary: "a -> 0 limit of the Liu expansion" },
    StepSpec { label: "3.19", kind: StepKind::ClosedForm, summary: "closed-form balanced 3φ2" },
    StepSpec { label: "3.20", kind: StepKind::Series, summary: "limit equals (1 - q^2) times a false theta series" },
    StepSpec { label: "3.21", kind: StepKind::Series, summary: "fifth left sum simplified" },
    StepSpec { label: "3.22", kind: StepKind::Series, summary: "sum at -q as a 3φ2 with half-integer parameters" },
    StepSpec { label: "3.23", kind: StepKind::Series, summary: "Liu expansion in base q and its simplification" },
    StepSpec { label: "3.24", kind: StepKind::ClosedForm, summary: "terminating 2φ1 to 3φ2 reversal, base q" },
    StepSpec { label: "3.25", kind: StepKind::ClosedForm, summary: "Bailey-Daum family, zero for odd n" },
    StepSpec { label: "3.26", kind: StepKind::ClosedForm, summary: "infinite products collapsed to a finite form" },
    StepSpec { label: "3.27", kind: StepKind::ClosedForm, summary: "closed-form 3φ2 with odd/even cases" },
    StepSpec { label: "3.28", kind: StepKind::Series, summary: "even-index sum equals the s = 6 false theta series" },
];

/// Every step, in registry order.
pub fn steps() -> &'static [StepSpec] {
    &STEPS
}

fn lookup(label: &str) -> Result<&'static StepSpec> {
    STEPS
        .iter()
        .find(|s| s.label == label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))
}

/// All pairs of expressions a step asserts equal.
pub fn step_sides(label: &str, p: &StepParams) -> Result<Vec<Sides>> {
    let spec = lookup(label)?;
    if let StepKind::Excluded(reason) = spec.kind {
        return Err(Error::Excluded {
            label: label.to_string(),
            reason: reason.to_string(),
        });
    }
    let b = Builder { p: *p, t: p.t() };
    match label {
        "3.1" => b.step_3_1(),
        "3.2" => b.liu_instances("3.2["),
        "3.3" => b.step_3_3(),
        "3.4" => b.step_3_4(),
        "3.5" => b.step_3_5(),
        "3.6" => b.step_3_6(),
        "3.7" => b.step_3_7(),
        "3.8" => b.step_3_8(),
        "3.9" => b.step_3_9(),
        "3.12" => b.step_3_12(),
        "3.13" => b.step_3_13(),
        "3.14" => b.step_3_14(),
        "3.15" => b.step_3_15(),
        "3.16" => b.step_3_16(),
        "3.17" => b.liu_instances("3.17["),
        "3.18" => b.step_3_18(),
        "3.19" => b.step_3_19(),
        "3.20" => b.step_3_20(),
        "3.21" => b.step_3_21(),
        "3.22" => b.step_3_22(),
        "3.23" => b.step_3_23(),
        "3.24" => b.step_3_24(),
        "3.25" => b.step_3_25(),
        "3.26" => b.step_3_26(),
        "3.27" => b.step_3_27(),
        "3.28" => b.step_3_28(),
        _ => unreachable!("registry and dispatch agree"),
    }
}

/// Checks every equality of one step.
pub fn check_step(label: &str, p: &StepParams) -> Result<Report> {
    compare_all(step_sides(label, p)?, false)
}

fn q(e: i64) -> Monomial {
    Monomial::q(e)
}

fn sign(n: i64) -> Monomial {
    if n % 2 == 0 {
        Monomial::ONE
    } else {
        -Monomial::ONE
    }
}

fn phi(upper: &[Param], lower: &[Param], base: Monomial, arg: Monomial) -> Factor {
    Factor::phi(upper.to_vec(), lower.to_vec(), base, arg)
}

fn p(m: Monomial) -> Param {
    Param::Mono(m)
}

struct Builder {
    p: StepParams,
    t: i64,
}

impl Builder {
    fn scale(&self) -> Scale {
        self.p.scale
    }

    fn d(&self) -> i64 {
        self.p.scale.denom() as i64
    }

    fn prod(&self, factors: &[Factor]) -> Result<QSeries> {
        product(factors, self.scale(), self.t)
    }

    fn prod_at(&self, factors: &[Factor], t: i64) -> Result<QSeries> {
        product(factors, self.scale(), t)
    }

    /// Comparison order for a closed form with the given right side: the
    /// configured window above its leading exponent.
    fn closed_order(&self, rhs: &[Factor]) -> Result<i64> {
        let v = product_valuation_bound(rhs, self.scale(), self.t)?.unwrap_or(0);
        Ok(self.t + v.max(0))
    }

    /// `sum_n prod(term(n))` where `bound(n)` (scaled units) is a lower bound
    /// on the valuation of term `n`, nondecreasing once it exceeds `t`.
    fn term_sum(
        &self,
        t: i64,
        bound: impl Fn(i64) -> i64,
        term: impl Fn(i64) -> Vec<Factor>,
    ) -> Result<QSeries> {
        let mut acc = QSeries::zero(self.scale(), t);
        for n in 0i64.. {
            if bound(n) > t {
                break;
            }
            acc = acc.add(&self.prod_at(&term(n), t)?)?;
        }
        Ok(acc)
    }

    /// `sum_n sign_n q^(e_n)` over the increasing exponents `e_n`.
    fn lacunary(&self, term: impl Fn(i64) -> (Monomial, Monomial)) -> Result<QSeries> {
        let mut acc = QSeries::zero(self.scale(), self.t);
        for n in 0i64.. {
            let (sgn, m) = term(n);
            if m.scaled_exp(self.scale())? > self.t {
                break;
            }
            acc = acc.add(&QSeries::monomial(self.scale(), sgn * m, self.t)?)?;
        }
        Ok(acc)
    }

    fn theta(&self, s: u32) -> QSeries {
        false_theta(s, self.scale(), self.p.order)
    }

    fn lhs(&self, id: IdentityId) -> Result<QSeries> {
        lhs_series(id, self.scale(), self.p.order)
    }

    fn sides(&self, lhs: QSeries, rhs: QSeries) -> Sides {
        Sides::new(lhs, rhs, self.t)
    }

    fn n_range(&self) -> std::ops::RangeInclusive<i64> {
        0..=self.p.n_max as i64
    }

    fn liu_instances(&self, prefix: &str) -> Result<Vec<Sides>> {
        liu_worked_instances(self.p.order)
            .into_iter()
            .filter(|(label, _)| label.starts_with(prefix))
            .map(|(_, inst)| inst.sides(self.scale()))
            .collect()
    }

    /// `sum (-1)^n (q;q^2)_n q^(n(n+1)) / (-q^2, -q^3; q^2)_n`.
    fn sum_3_1(&self) -> Result<QSeries> {
        let sum = TermSum {
            upper: vec![param("q")],
            lower: vec![param("-q^2"), param("-q^3")],
            base: q(2),
            arg: mono("-q^2"),
            quad: 1,
        };
        eval_sum(&sum, self.scale(), self.t)
    }

    fn step_3_1(&self) -> Result<Vec<Sides>> {
        let lhs = self.sum_3_1()?;
        let d = self.d();
        // lim_{a->0} 3phi2(q, q^2, q^2/a; -q^2, -q^3; q^2, a) term by term
        let limit = self.term_sum(
            self.t,
            |n| d * (n * n + n),
            |n| {
                let n_ = n as usize;
                vec![
                    Factor::Poch(vec![param("q"), param("q^2")], q(2), n_),
                    Factor::Mono(poch_limit_monomial(q(2), q(2), n_)),
                    Factor::InvPoch(vec![param("q^2"), param("-q^2"), param("-q^3")], q(2), n_),
                ]
            },
        )?;
        let over = self.prod(&[Factor::Series(lhs.clone()), Factor::InvBinomial(mono("-q"))])?;
        Ok(vec![
            self.sides(lhs, limit),
            self.sides(self.lhs(IdentityId::I1_1)?, over),
        ])
    }

    fn step_3_3(&self) -> Result<Vec<Sides>> {
        let d = self.d();
        let lhs = self.sum_3_1()?;
        let expanded = self.term_sum(
            self.t,
            |n| d * (n * n + n),
            |n| {
                vec![
                    Factor::Binomial(q(4 * n + 2)),
                    Factor::Mono(q(2 * n * n)),
                    phi(&[p(q(-2 * n)), p(q(2 * n + 2)), param("q")], &[param("-q^2"), param("-q^3")], q(2), q(2)),
                ]
            },
        )?;
        let theta_pieces = self.term_sum(
            self.t,
            |n| d * (2 * n * n + n),
            |n| vec![Factor::Binomial(q(2 * n + 1)), Factor::Mono(q(2 * n * n + n))],
        )?;
        let scaled = self.prod(&[Factor::Binomial(mono("-q")), Factor::Series(theta_pieces.clone())])?;
        let first = self.lacunary(|n| (Monomial::ONE, q(2 * n * n + n)))?;
        let second = self.lacunary(|n| (Monomial::ONE, q((2 * n + 1) * (n + 1))))?;
        let difference = first.sub(&second)?;
        Ok(vec![
            self.sides(lhs, expanded.clone()),
            self.sides(expanded, scaled),
            self.sides(theta_pieces, difference.clone()),
            self.sides(difference, self.theta(1)),
        ])
    }

    fn phi_3_4(&self) -> Factor {
        phi(&[param("q^2"), param("q"), param("q")], &[param("-q^2"), param("-q^3")], q(2), q(1))
    }

    fn step_3_4(&self) -> Result<Vec<Sides>> {
        let rhs = self.prod(&[Factor::InvBinomial(mono("-q")), self.phi_3_4()])?;
        Ok(vec![self.sides(self.lhs(IdentityId::I1_2)?, rhs)])
    }

    fn step_3_5(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        // a = q^2 makes alpha = q^2/a = 1, where (1 - alpha) vanishes
        for j in [-2i64, -1, 0, 1, 3] {
            let inst = TransformInstance::new(Transform::Liu, q(2), self.p.order)
                .with("alpha", q(2 - j))
                .with("a", q(j + 1))
                .with("b", Monomial::ONE)
                .with("beta", q(j + 1))
                .with("c", mono("-q^2"))
                .with("d", mono("-q^3"));
            out.push(inst.sides(self.scale())?);
        }
        // a = 1 with the closed form of the inner sum substituted
        let d = self.d();
        let prefactored = self.prod(&[
            Factor::PochInf(q(4), q(2)),
            Factor::PochInf(q(1), q(2)),
            Factor::InvPochInf(q(3), q(2)),
            Factor::InvPochInf(q(2), q(2)),
            self.phi_3_4(),
        ])?;
        let substituted = self.term_sum(
            self.t,
            |n| d * (n * n + n),
            |n| {
                let n_ = n as usize;
                vec![
                    Factor::Binomial(q(4 * n + 2)),
                    Factor::InvBinomial(q(2)),
                    Factor::Poch(
                        vec![param("q^2"), param("q"), param("q^2"), param("-q"), param("-q^2")],
                        q(2),
                        n_,
                    ),
                    Factor::InvPoch(
                        vec![param("q^2"), param("q^3"), param("q^2"), param("-q^2"), param("-q^3")],
                        q(2),
                        n_,
                    ),
                    Factor::Mono(sign(n) * q(n * n + n)),
                ]
            },
        )?;
        out.push(self.sides(prefactored, substituted.clone()));
        out.push(self.sides(substituted, self.theta(2)));
        Ok(out)
    }

    fn step_3_6(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        for j in -2i64..=3 {
            for n in self.n_range() {
                let n_ = n as usize;
                let rhs = [
                    Factor::Poch(vec![p(-q(1 - j)), p(-q(2 - j))], q(2), n_),
                    Factor::InvPoch(vec![param("-q^2"), param("-q^3")], q(2), n_),
                    Factor::Mono(q((j + 1) * n)),
                ];
                let t = self.closed_order(&rhs)?;
                let lhs = eval_phi(&PhiSpec::new(
                    vec![p(q(-2 * n)), p(q(2 + 2 * n - j)), p(q(j + 1))],
                    vec![param("-q^2"), param("-q^3")],
                    q(2),
                    q(2),
                    self.scale(),
                    t,
                ))?;
                out.push(Sides::new(lhs, self.prod_at(&rhs, t)?, t));
            }
        }
        Ok(out)
    }

    fn phi_3_7(&self) -> Factor {
        phi(&[param("q^2"), param("q"), Param::Zero], &[param("-q^2"), param("-q^3")], q(2), q(1))
    }

    fn step_3_7(&self) -> Result<Vec<Sides>> {
        let rhs = self.prod(&[Factor::InvBinomial(mono("-q")), self.phi_3_7()])?;
        Ok(vec![self.sides(self.lhs(IdentityId::I1_3)?, rhs)])
    }

    fn inner_3_8(n: i64) -> Factor {
        phi(&[p(q(-2 * n)), p(q(2 * n + 2)), Param::Zero], &[param("-q^2"), param("-q^3")], q(2), q(2))
    }

    fn step_3_8(&self) -> Result<Vec<Sides>> {
        let liu = self.liu_instances("3.8")?;
        let expansion = liu[0].rhs.clone();
        let d = self.d();
        let collapsed = self.term_sum(
            self.t,
            |n| d * n,
            |n| {
                vec![
                    Factor::Mono(sign(n) * q(n * n)),
                    Factor::Binomial(-q(2 * n + 1)),
                    Factor::InvBinomial(mono("-q")),
                    Self::inner_3_8(n),
                ]
            },
        )?;
        let mut out = liu;
        out.push(self.sides(expansion, collapsed));
        Ok(out)
    }

    fn step_3_9(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        for n in self.n_range() {
            let n_ = n as usize;
            out.push(reversal_sides(
                n_,
                q(2 * n + 2),
                mono("-q^2"),
                mono("-q^3"),
                q(2),
                self.scale(),
                self.p.order,
            )?);
            let lhs = eval_phi(&PhiSpec::new(
                vec![p(q(-2 * n)), p(-q(-2 * n))],
                vec![param("-q^2")],
                q(2),
                -q(2 * n + 1),
                self.scale(),
                self.t,
            ))?;
            let rhs = self.prod(&[
                Factor::Mono(q(-n * (n + 2))),
                Factor::Poch(vec![param("-q^3")], q(2), n_),
                Self::inner_3_8(n),
            ])?;
            out.push(self.sides(lhs, rhs));
        }
        Ok(out)
    }

    fn step_3_12(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        for n in self.n_range() {
            let lhs = eval_phi(&PhiSpec::new(
                vec![p(q(-2 * n)), p(-q(-2 * n))],
                vec![param("-q^2")],
                q(2),
                -q(2 * n + 1),
                self.scale(),
                self.t,
            ))?;
            let rhs = self.prod(&[
                Factor::Mono(q(-n * (n + 1) / 2)),
                Factor::Poch(vec![param("-q")], q(2), n as usize),
            ])?;
            out.push(self.sides(lhs, rhs));
        }
        Ok(out)
    }

    fn step_3_13(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        for n in self.n_range() {
            let rhs = [
                Factor::Binomial(mono("-q")),
                Factor::Mono(q((n * n + 3 * n) / 2)),
                Factor::InvBinomial(-q(2 * n + 1)),
            ];
            let t = self.closed_order(&rhs)?;
            let lhs = self.prod_at(&[Self::inner_3_8(n)], t)?;
            out.push(Sides::new(lhs, self.prod_at(&rhs, t)?, t));
        }
        Ok(out)
    }

    fn step_3_14(&self) -> Result<Vec<Sides>> {
        let d = self.d();
        let over = self.prod(&[Factor::InvBinomial(mono("-q")), self.phi_3_7()])?;
        let prefactored = self.prod(&[
            Factor::PochInf(q(4), q(2)),
            Factor::PochInf(q(1), q(2)),
            Factor::InvPochInf(q(2), q(2)),
            Factor::InvPochInf(q(3), q(2)),
            self.phi_3_7(),
        ])?;
        let substituted = self.term_sum(
            self.t,
            |n| d * (n * n + (n * n + 3 * n) / 2),
            |n| {
                vec![
                    Factor::Mono(sign(n) * q(n * n)),
                    Factor::Binomial(-q(2 * n + 1)),
                    Factor::InvBinomial(mono("-q")),
                    Factor::Binomial(mono("-q")),
                    Factor::Mono(q((n * n + 3 * n) / 2)),
                    Factor::InvBinomial(-q(2 * n + 1)),
                ]
            },
        )?;
        Ok(vec![
            self.sides(prefactored, substituted.clone()),
            self.sides(substituted, self.theta(3)),
            self.sides(over, self.theta(3)),
        ])
    }

    fn step_3_15(&self) -> Result<Vec<Sides>> {
        let s = self.scale();
        let first = || RatioStep {
            mul: vec![],
            div: vec![],
            factor: Monomial::ONE,
        };
        let expanded = ratio_sum(s, self.t, first(), |n| RatioStep {
            mul: vec![q(2 * n + 1), -q(2 * n + 2)],
            div: vec![-q(2 * n + 2), -q(2 * n + 3)],
            factor: q(1),
        })?;
        let cancelled = ratio_sum(s, self.t, first(), |n| RatioStep {
            mul: vec![q(2 * n + 1)],
            div: vec![-q(2 * n + 3)],
            factor: q(1),
        })?;
        let inv = Factor::InvBinomial(mono("-q"));
        let e2 = self.prod(&[inv.clone(), Factor::Series(expanded)])?;
        let e3 = self.prod(&[inv.clone(), Factor::Series(cancelled)])?;
        let e4 = self.prod(&[inv, phi(&[param("q^2"), param("q")], &[param("-q^3")], q(2), q(1))])?;
        let mut out = vec![
            self.sides(self.lhs(IdentityId::I1_4)?, e2.clone()),
            self.sides(e2, e3.clone()),
            self.sides(e3, e4),
        ];
        // (q;-q)_(2n) = (q;q^2)_n (-q^2;q^2)_n as polynomials
        for n in self.n_range() {
            let n_ = n as usize;
            let top = s.units(n * (2 * n + 1) + 1);
            let alt = poch(param("q"), mono("-q"), 2 * n_, s, top)?;
            let split = poch(param("q"), q(2), n_, s, top)?.mul(&poch(param("-q^2"), q(2), n_, s, top)?)?;
            out.push(Sides::new(alt, split, top));
        }
        Ok(out)
    }

    /// `lim_{a->0} 3phi2(q^2/a, q^2, -q^2; -q^3, q^3; q^2, a)` term by term.
    fn limit_3_16(&self) -> Result<QSeries> {
        let d = self.d();
        self.term_sum(
            self.t,
            |n| d * (n * n + n),
            |n| {
                let n_ = n as usize;
                vec![
                    Factor::Mono(poch_limit_monomial(q(2), q(2), n_)),
                    Factor::Poch(vec![param("q^2"), param("-q^2")], q(2), n_),
                    Factor::InvPoch(vec![param("q^2"), param("-q^3"), param("q^3")], q(2), n_),
                ]
            },
        )
    }

    fn step_3_16(&self) -> Result<Vec<Sides>> {
        let d = self.d();
        let euler = euler_sides(q(2), q(1), mono("-q^3"), q(1), q(2), self.scale(), self.p.order)?;
        let quad = TermSum {
            upper: vec![param("-q^2")],
            lower: vec![param("-q^3"), param("q^3")],
            base: q(2),
            arg: mono("-q^2"),
            quad: 1,
        };
        let inv = Factor::InvBinomial(q(1));
        let e3 = self.prod(&[inv.clone(), Factor::Sum(quad)])?;
        let via_limit = self.term_sum(
            self.t,
            |n| d * (n * n + n),
            |n| {
                let n_ = n as usize;
                vec![
                    Factor::Poch(vec![param("-q^2")], q(2), n_),
                    Factor::InvPoch(vec![param("-q^3"), param("q^3")], q(2), n_),
                    Factor::Mono(poch_limit_monomial(q(2), q(2), n_)),
                ]
            },
        )?;
        let e4 = self.prod(&[inv.clone(), Factor::Series(via_limit)])?;
        let e5 = self.prod(&[inv, Factor::Series(self.limit_3_16()?)])?;
        let e2 = euler.rhs.clone();
        Ok(vec![
            euler,
            self.sides(e2, e3.clone()),
            self.sides(e3, e4.clone()),
            self.sides(e4, e5),
        ])
    }

    fn step_3_18(&self) -> Result<Vec<Sides>> {
        let d = self.d();
        let expanded = self.term_sum(
            self.t,
            |n| d * (n * n + n),
            |n| {
                vec![
                    Factor::Binomial(q(4 * n + 2)),
                    Factor::Mono(q(2 * n * n)),
                    phi(
                        &[p(q(-2 * n)), p(q(2 * n + 2)), param("-q^2")],
                        &[param("-q^3"), param("q^3")],
                        q(2),
                        q(2),
                    ),
                ]
            },
        )?;
        Ok(vec![self.sides(self.limit_3_16()?, expanded)])
    }

    fn step_3_19(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        for n in self.n_range() {
            let n_ = n as usize;
            let balanced = [
                Factor::Poch(vec![param("-q"), param("q")], q(2), n_),
                Factor::InvPoch(vec![param("-q^3"), param("q^3")], q(2), n_),
                Factor::Mono(mono("-q^2").pow(n)),
            ];
            let simple = [
                Factor::Binomial(q(2)),
                Factor::InvBinomial(q(4 * n + 2)),
                Factor::Mono(sign(n) * q(2 * n)),
            ];
            let t = self.closed_order(&simple)?;
            let lhs = eval_phi(&PhiSpec::new(
                vec![p(q(-2 * n)), p(q(2 * n + 2)), param("-q^2")],
                vec![param("-q^3"), param("q^3")],
                q(2),
                q(2),
                self.scale(),
                t,
            ))?;
            let mid = self.prod_at(&balanced, t)?;
            out.push(Sides::new(lhs, mid.clone(), t));
            out.push(Sides::new(mid, self.prod_at(&simple, t)?, t));
        }
        Ok(out)
    }

    fn step_3_20(&self) -> Result<Vec<Sides>> {
        let limit = self.limit_3_16()?;
        let rhs = self.prod(&[Factor::Binomial(q(2)), Factor::Series(self.theta(4))])?;
        let assembled = self.prod(&[
            Factor::InvBinomial(mono("-q")),
            Factor::InvBinomial(q(1)),
            Factor::Series(limit.clone()),
        ])?;
        Ok(vec![
            self.sides(limit, rhs),
            self.sides(self.lhs(IdentityId::I1_4)?, assembled),
        ])
    }

    /// `sum (q;-q)_n q^n / (-q^3;q^2)_n`.
    fn sum_3_21(&self) -> Result<QSeries> {
        let first = RatioStep {
            mul: vec![],
            div: vec![],
            factor: Monomial::ONE,
        };
        ratio_sum(self.scale(), self.t, first, |n| RatioStep {
            mul: vec![q(1) * mono("-q").pow(n)],
            div: vec![-q(2 * n + 3)],
            factor: q(1),
        })
    }

    fn step_3_21(&self) -> Result<Vec<Sides>> {
        let rhs = self.prod(&[Factor::InvBinomial(mono("-q")), Factor::Series(self.sum_3_21()?)])?;
        let mut out = vec![self.sides(self.lhs(IdentityId::I1_5)?, rhs)];
        for n in 0..=15usize {
            let lhs = self.prod(&[
                Factor::Poch(vec![param("-q^2")], q(2), n),
                Factor::InvPoch(vec![param("-q")], q(1), 2 * n + 1),
            ])?;
            let rhs = self.prod(&[
                Factor::InvBinomial(mono("-q")),
                Factor::InvPoch(vec![param("-q^3")], q(2), n),
            ])?;
            out.push(self.sides(lhs, rhs));
        }
        Ok(out)
    }

    /// `sum (-q;q)_n (-q)^n / (q^3;q^2)_n`.
    fn sum_3_22(&self) -> Result<QSeries> {
        let first = RatioStep {
            mul: vec![],
            div: vec![],
            factor: Monomial::ONE,
        };
        ratio_sum(self.scale(), self.t, first, |n| RatioStep {
            mul: vec![-q(n + 1)],
            div: vec![q(2 * n + 3)],
            factor: mono("-q"),
        })
    }

    fn step_3_22(&self) -> Result<Vec<Sides>> {
        let f1 = self.sum_3_22()?;
        let first = RatioStep {
            mul: vec![],
            div: vec![],
            factor: Monomial::ONE,
        };
        let f2 = ratio_sum(self.scale(), self.t, first, |n| RatioStep {
            mul: vec![-q(n + 1)],
            div: vec![Monomial::q_frac(2 * n + 3, 2), Monomial::neg_q_frac(2 * n + 3, 2)],
            factor: mono("-q"),
        })?;
        let f3 = self.prod(&[phi(
            &[param("q"), param("-q"), Param::Zero],
            &[param("q^(3/2)"), param("-q^(3/2)")],
            q(1),
            mono("-q"),
        )])?;
        let flipped = self.sum_3_21()?.negate_base()?;
        Ok(vec![
            self.sides(flipped, f1.clone()),
            self.sides(f1, f2.clone()),
            self.sides(f2, f3),
        ])
    }

    fn inner_3_23(n: i64) -> Factor {
        phi(
            &[p(q(-n)), p(q(n + 2)), Param::Zero],
            &[param("q^(3/2)"), param("-q^(3/2)")],
            q(1),
            q(1),
        )
    }

    fn step_3_23(&self) -> Result<Vec<Sides>> {
        let liu = self.liu_instances("3.23")?;
        let expansion = liu[0].rhs.clone();
        let d = self.d();
        let collapsed = self.term_sum(
            self.t,
            |n| d * n,
            |n| {
                vec![
                    Factor::Binomial(q(n + 1)),
                    Factor::InvBinomial(q(1)),
                    Factor::Mono(q(n * (n + 1) / 2)),
                    Self::inner_3_23(n),
                ]
            },
        )?;
        let mut out = liu;
        out.push(self.sides(expansion, collapsed));
        Ok(out)
    }

    fn phi_3_24(&self, n: i64) -> Result<QSeries> {
        eval_phi(&PhiSpec::new(
            vec![p(q(-n)), p(Monomial::q_frac(-2 * n - 1, 2))],
            vec![param("q^(3/2)")],
            q(1),
            Monomial::neg_q_frac(2 * n + 3, 2),
            self.scale(),
            self.t,
        ))
    }

    fn step_3_24(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        for n in self.n_range() {
            let n_ = n as usize;
            out.push(reversal_sides(
                n_,
                q(n + 2),
                mono("q^(3/2)"),
                mono("-q^(3/2)"),
                q(1),
                self.scale(),
                self.p.order,
            )?);
            let poch_e = Factor::Poch(vec![param("-q^(3/2)")], q(1), n_);
            let middle = self.prod(&[
                Factor::Mono(sign(n) * q(-n * (n - 1) / 2) * mono("-q^(3/2)").pow(-n)),
                poch_e.clone(),
                Self::inner_3_23(n),
            ])?;
            let collected = self.prod(&[
                Factor::Mono(Monomial::q_frac(-n * (n + 2), 2)),
                poch_e,
                Self::inner_3_23(n),
            ])?;
            out.push(self.sides(self.phi_3_24(n)?, middle.clone()));
            out.push(self.sides(middle, collected));
        }
        Ok(out)
    }

    fn products_3_25(n: i64) -> Vec<Factor> {
        vec![
            Factor::PochInf(mono("-q"), q(1)),
            Factor::PochInf(q(1 - n), q(2)),
            Factor::PochInf(q(n + 3), q(2)),
            Factor::InvPochInf(mono("q^(3/2)"), q(1)),
            Factor::InvPochInf(Monomial::neg_q_frac(2 * n + 3, 2), q(1)),
        ]
    }

    fn step_3_25(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        for n in self.n_range() {
            let s = bailey_daum_sides(q(-n), Monomial::q_frac(-2 * n - 1, 2), q(1), self.scale(), self.p.order)?;
            let zero = QSeries::zero(self.scale(), self.t);
            let lhs = s.lhs.clone();
            out.push(s);
            out.push(self.sides(self.phi_3_24(n)?, self.prod(&Self::products_3_25(n))?));
            if n % 2 == 1 {
                out.push(self.sides(lhs, zero));
            }
        }
        Ok(out)
    }

    fn step_3_26(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        for n in self.n_range() {
            let products = self.prod(&Self::products_3_25(n))?;
            let finite = if n % 2 == 1 {
                // (q^(1-n); q^2)_inf contains the factor (1 - 1)
                QSeries::zero(self.scale(), self.t)
            } else {
                self.prod(&[
                    Factor::Binomial(q(1)),
                    Factor::Mono(sign(n / 2) * q(-n * n / 4)),
                    Factor::Poch(vec![param("-q^(3/2)")], q(1), n as usize),
                    Factor::InvBinomial(q(n + 1)),
                ])?
            };
            out.push(self.sides(products, finite));
        }
        Ok(out)
    }

    fn step_3_27(&self) -> Result<Vec<Sides>> {
        let mut out = Vec::new();
        for n in self.n_range() {
            let sides = if n % 2 == 1 {
                let lhs = self.prod(&[Self::inner_3_23(n)])?;
                self.sides(lhs, QSeries::zero(self.scale(), self.t))
            } else {
                let rhs = [
                    Factor::Binomial(q(1)),
                    Factor::InvBinomial(q(n + 1)),
                    Factor::Mono(sign(n / 2) * q(n * n / 4 + n)),
                ];
                let t = self.closed_order(&rhs)?;
                Sides::new(self.prod_at(&[Self::inner_3_23(n)], t)?, self.prod_at(&rhs, t)?, t)
            };
            out.push(sides);
        }
        Ok(out)
    }

    fn step_3_28(&self) -> Result<Vec<Sides>> {
        let g1 = self.prod(&[Factor::InvBinomial(q(1)), Factor::Series(self.sum_3_22()?)])?;
        // sum over even n = 2m of (-1)^(n/2) q^(3n^2/4 + 3n/2)
        let g2 = self.lacunary(|m| {
            let n = 2 * m;
            (sign(m), q(3 * n * n / 4 + 3 * n / 2))
        })?;
        let g3 = self.theta(6);
        let flipped = g3.negate_base()?;
        let back = self
            .prod(&[Factor::Binomial(q(1)), Factor::Series(g2.clone())])?
            .negate_base()?;
        let lhs_15 = self.prod(&[Factor::InvBinomial(mono("-q")), Factor::Series(back)])?;
        Ok(vec![
            self.sides(g1, g2.clone()),
            self.sides(g2, g3.clone()),
            self.sides(flipped, g3),
            self.sides(self.lhs(IdentityId::I1_5)?, lhs_15),
        ])
    }
}

/// A hypergeometric series that appears in one of the steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiInstance {
    pub label: String,
    pub upper: Vec<Param>,
    pub lower: Vec<Param>,
    pub base: Monomial,
    pub arg: Monomial,
}

impl PhiInstance {
    fn new(label: String, upper: Vec<Param>, lower: Vec<Param>, base: Monomial, arg: Monomial) -> Self {
        PhiInstance {
            label,
            upper,
            lower,
            base,
            arg,
        }
    }

    pub fn spec(&self, scale: Scale, trunc: i64) -> PhiSpec {
        PhiSpec::new(self.upper.clone(), self.lower.clone(), self.base, self.arg, scale, trunc)
    }
}

/// Every `phi` series written in the steps, with `n <= n_max` and the free
/// symbol `a` on the grid `q^j`.
pub fn phi_instances(n_max: usize) -> Vec<PhiInstance> {
    let mut out = Vec::new();
    let q2 = q(2);
    let pair = |a: &str, b: &str| vec![param(a), param(b)];
    out.push(PhiInstance::new("3.4".into(), vec![param("q^2"), param("q"), param("q")], pair("-q^2", "-q^3"), q2, q(1)));
    out.push(PhiInstance::new("3.7".into(), vec![param("q^2"), param("q"), Param::Zero], pair("-q^2", "-q^3"), q2, q(1)));
    out.push(PhiInstance::new("3.15".into(), vec![param("q^2"), param("q")], vec![param("-q^3")], q2, q(1)));
    out.push(PhiInstance::new(
        "3.22".into(),
        vec![param("q"), param("-q"), Param::Zero],
        pair("q^(3/2)", "-q^(3/2)"),
        q(1),
        mono("-q"),
    ));
    for j in 1..=3 {
        out.push(PhiInstance::new(
            format!("3.2[a=q^{j}]"),
            vec![p(q(2 - j)), param("q^2"), param("q")],
            pair("-q^2", "-q^3"),
            q2,
            q(j),
        ));
        out.push(PhiInstance::new(
            format!("3.17[a=q^{j}]"),
            vec![p(q(2 - j)), param("q^2"), param("-q^2")],
            pair("-q^3", "q^3"),
            q2,
            q(j),
        ));
    }
    for j in [-2i64, -1, 0, 1, 3] {
        out.push(PhiInstance::new(
            format!("3.5[a=q^{j}]"),
            vec![p(q(1 - j)), param("q^2"), p(q(j + 1))],
            pair("-q^2", "-q^3"),
            q2,
            q(1),
        ));
    }
    for n in 0..=n_max as i64 {
        for j in -2i64..=3 {
            out.push(PhiInstance::new(
                format!("3.6[a=q^{j},n={n}]"),
                vec![p(q(-2 * n)), p(q(2 + 2 * n - j)), p(q(j + 1))],
                pair("-q^2", "-q^3"),
                q2,
                q2,
            ));
        }
        out.push(PhiInstance::new(
            format!("3.3[n={n}]"),
            vec![p(q(-2 * n)), p(q(2 * n + 2)), param("q")],
            pair("-q^2", "-q^3"),
            q2,
            q2,
        ));
        out.push(PhiInstance::new(
            format!("3.13[n={n}]"),
            vec![p(q(-2 * n)), p(q(2 * n + 2)), Param::Zero],
            pair("-q^2", "-q^3"),
            q2,
            q2,
        ));
        out.push(PhiInstance::new(
            format!("3.12[n={n}]"),
            vec![p(q(-2 * n)), p(-q(-2 * n))],
            vec![param("-q^2")],
            q2,
            -q(2 * n + 1),
        ));
        out.push(PhiInstance::new(
            format!("3.19[n={n}]"),
            vec![p(q(-2 * n)), p(q(2 * n + 2)), param("-q^2")],
            pair("-q^3", "q^3"),
            q2,
            q2,
        ));
        out.push(PhiInstance::new(
            format!("3.27[n={n}]"),
            vec![p(q(-n)), p(q(n + 2)), Param::Zero],
            pair("q^(3/2)", "-q^(3/2)"),
            q(1),
            q(1),
        ));
        out.push(PhiInstance::new(
            format!("3.24[n={n}]"),
            vec![p(q(-n)), p(Monomial::q_frac(-2 * n - 1, 2))],
            vec![param("q^(3/2)")],
            q(1),
            Monomial::neg_q_frac(2 * n + 3, 2),
        ));
    }
    out
}
