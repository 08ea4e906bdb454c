//! Exact noncommutative operator polynomials.
//!
//! An [`OpExpr`] is a finite sum of generator words with [`ParamScalar`]
//! coefficients. Words are kept in normal order: whenever an adjacent pair
//! `g_j g_i` with `i < j` has an entry in the context's commutation table it is
//! rewritten as `g_i g_j - [g_i, g_j]`. Pairs without a table entry are free
//! and never reordered, so a context with an empty table is the free algebra
//! on its generators.
//!
//! Coefficients are polynomials (with integer, possibly negative, exponents)
//! in the central symbols `hbar, theta, tau, m, g` over the complex rationals.
//! Nothing here is ever rounded, so equality is exact.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("operands live in different algebras ({left} vs {right})")]
    ContextMismatch { left: String, right: String },
    #[error("`{name}` is not a generator of {context}")]
    UnknownGenerator { name: String, context: String },
    #[error("substitution has no image for generator `{0}`")]
    MissingImage(String),
    #[error("generator `{0}` is not self-adjoint")]
    NotSelfAdjoint(String),
    #[error("commutator [{left}, {right}] in {context} must only involve generators ordered before `{right}`")]
    NonLoweringRelation {
        left: String,
        right: String,
        context: String,
    },
}

/// Central symbols a coefficient may depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Hbar,
    Theta,
    Tau,
    Mass,
    Gravity,
}

impl Param {
    pub const ALL: [Param; 5] = [
        Param::Hbar,
        Param::Theta,
        Param::Tau,
        Param::Mass,
        Param::Gravity,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Param::Hbar => "hbar",
            Param::Theta => "theta",
            Param::Tau => "tau",
            Param::Mass => "m",
            Param::Gravity => "g",
        }
    }
}

/// Exponents of `hbar, theta, tau, m, g`, in that order.
pub type Exponents = [i32; 5];

/// Exact complex rational.
pub type Coeff = Complex<BigRational>;

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A coefficient: sum of complex rationals times monomials in the parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ParamScalar {
    terms: BTreeMap<Exponents, Coeff>,
}

impl ParamScalar {
    pub fn zero() -> Self {
        ParamScalar::default()
    }

    pub fn one() -> Self {
        ParamScalar::rational(1, 1)
    }

    pub fn from_coeff(c: Coeff) -> Self {
        let mut s = ParamScalar::zero();
        s.accumulate([0; 5], c);
        s
    }

    /// `num/den` (real).
    pub fn rational(num: i64, den: i64) -> Self {
        ParamScalar::from_coeff(Complex::new(rational(num, den), BigRational::zero()))
    }

    /// `i * num/den`.
    pub fn imag(num: i64, den: i64) -> Self {
        ParamScalar::from_coeff(Complex::new(BigRational::zero(), rational(num, den)))
    }

    pub fn i() -> Self {
        ParamScalar::imag(1, 1)
    }

    pub fn param(p: Param) -> Self {
        ParamScalar::one().times(p, 1)
    }

    /// Multiplies every term by `p^exp`.
    pub fn times(mut self, p: Param, exp: i32) -> Self {
        let terms = std::mem::take(&mut self.terms);
        for (mut e, c) in terms {
            e[p.index()] += exp;
            self.accumulate(e, c);
        }
        self
    }

    fn accumulate(&mut self, exps: Exponents, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&[0; 5])
                .is_some_and(|c| c.re.is_one() && c.im.is_zero())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Coeff)> {
        self.terms.iter()
    }

    /// Complex conjugate. Parameters are real.
    pub fn conj(&self) -> Self {
        ParamScalar {
            terms: self.terms.iter().map(|(e, c)| (*e, c.conj())).collect(),
        }
    }

    /// Highest exponent of `p` over all terms (0 for the zero scalar).
    pub fn degree(&self, p: Param) -> i32 {
        self.terms.keys().map(|e| e[p.index()]).max().unwrap_or(0)
    }

    pub fn truncate(&self, t: &Truncation) -> Self {
        ParamScalar {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| t.keeps(e))
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    /// Numeric value for the given parameter values (`hbar, theta, tau, m, g`).
    pub fn evaluate(&self, values: &[f64; 5]) -> Complex<f64> {
        self.terms
            .iter()
            .map(|(e, c)| {
                let weight: f64 = e.iter().zip(values).map(|(&k, &v)| v.powi(k)).product();
                Complex::new(to_f64(&c.re) * weight, to_f64(&c.im) * weight)
            })
            .sum()
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Add for &ParamScalar {
    type Output = ParamScalar;
    fn add(self, rhs: &ParamScalar) -> ParamScalar {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.accumulate(*e, c.clone());
        }
        out
    }
}

impl Add for ParamScalar {
    type Output = ParamScalar;
    fn add(self, rhs: ParamScalar) -> ParamScalar {
        &self + &rhs
    }
}

impl AddAssign<&ParamScalar> for ParamScalar {
    fn add_assign(&mut self, rhs: &ParamScalar) {
        for (e, c) in &rhs.terms {
            self.accumulate(*e, c.clone());
        }
    }
}

impl Neg for &ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        ParamScalar {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl Neg for ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        -&self
    }
}

impl Sub for &ParamScalar {
    type Output = ParamScalar;
    fn sub(self, rhs: &ParamScalar) -> ParamScalar {
        self + &(-rhs)
    }
}

impl Sub for ParamScalar {
    type Output = ParamScalar;
    fn sub(self, rhs: ParamScalar) -> ParamScalar {
        &self - &rhs
    }
}

impl Mul for &ParamScalar {
    type Output = ParamScalar;
    fn mul(self, rhs: &ParamScalar) -> ParamScalar {
        let mut out = ParamScalar::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = *ea;
                for (k, x) in e.iter_mut().zip(eb) {
                    *k += x;
                }
                out.accumulate(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl Mul for ParamScalar {
    type Output = ParamScalar;
    fn mul(self, rhs: ParamScalar) -> ParamScalar {
        &self * &rhs
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Formats a single coefficient times its parameter monomial, e.g. `-1/2*i*hbar^-1*theta`.
fn fmt_scalar_term(exps: &Exponents, c: &Coeff) -> String {
    let params: Vec<String> = Param::ALL
        .iter()
        .filter(|p| exps[p.index()] != 0)
        .map(|p| match exps[p.index()] {
            1 => p.symbol().to_string(),
            k => format!("{}^{}", p.symbol(), k),
        })
        .collect();
    let params = params.join("*");

    let number = if c.im.is_zero() {
        fmt_rational(&c.re)
    } else if c.re.is_zero() {
        match (c.im.is_one(), (-c.im.clone()).is_one()) {
            (true, _) => "i".to_string(),
            (_, true) => "-i".to_string(),
            _ => format!("{}*i", fmt_rational(&c.im)),
        }
    } else {
        let sign = if c.im.is_negative() { "-" } else { "+" };
        format!(
            "({}{}{}*i)",
            fmt_rational(&c.re),
            sign,
            fmt_rational(&c.im.abs())
        )
    };

    if params.is_empty() {
        number
    } else if number == "1" {
        params
    } else if number == "-1" {
        format!("-{params}")
    } else {
        format!("{number}*{params}")
    }
}

fn join_signed(parts: impl Iterator<Item = String>) -> String {
    let mut out = String::new();
    for (k, part) in parts.enumerate() {
        if k == 0 {
            out.push_str(&part);
        } else if let Some(rest) = part.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&part);
        }
    }
    out
}

impl fmt::Display for ParamScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        f.write_str(&join_signed(
            self.terms.iter().map(|(e, c)| fmt_scalar_term(e, c)),
        ))
    }
}

/// Caps on parameter degrees. A term survives only if every cap holds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Truncation {
    caps: Vec<(Param, i32)>,
    joint: Vec<(Vec<Param>, i32)>,
}

impl Truncation {
    /// No caps: truncation is the identity.
    pub fn none() -> Self {
        Truncation::default()
    }

    /// Keep terms with `deg_p <= max`. `max = 0` sets `p` to zero.
    pub fn cap(mut self, p: Param, max: i32) -> Self {
        self.caps.push((p, max));
        self
    }

    /// Keep terms whose summed degree in `params` is at most `max`.
    pub fn joint(mut self, params: &[Param], max: i32) -> Self {
        self.joint.push((params.to_vec(), max));
        self
    }

    /// Joint first order in `theta` and `tau`.
    pub fn first_order_deformation() -> Self {
        Truncation::none().joint(&[Param::Theta, Param::Tau], 1)
    }

    pub fn keeps(&self, exps: &Exponents) -> bool {
        self.caps.iter().all(|(p, max)| exps[p.index()] <= *max)
            && self
                .joint
                .iter()
                .all(|(ps, max)| ps.iter().map(|p| exps[p.index()]).sum::<i32>() <= *max)
    }
}

type Word = Vec<u8>;
type Terms = BTreeMap<Word, ParamScalar>;

fn accumulate_term(terms: &mut Terms, word: Word, s: ParamScalar) {
    if s.is_zero() {
        return;
    }
    match terms.entry(word) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(s);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get() + &s;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

/// Generators, their commutation table and adjoint behaviour.
#[derive(Debug, PartialEq, Eq)]
pub struct AlgebraContext {
    name: String,
    generators: Vec<String>,
    /// `(i, j)` with `i < j` maps to `[g_i, g_j]`.
    relations: BTreeMap<(u8, u8), Terms>,
    self_adjoint: Vec<bool>,
}

impl AlgebraContext {
    /// A free algebra: no commutation relations yet, all generators self-adjoint.
    pub fn free(name: &str, generators: &[&str]) -> Self {
        assert!(generators.len() < u8::MAX as usize);
        AlgebraContext {
            name: name.to_string(),
            generators: generators.iter().map(|g| g.to_string()).collect(),
            relations: BTreeMap::new(),
            self_adjoint: vec![true; generators.len()],
        }
    }

    /// Declares `[left, right] = value` where `left` precedes `right`.
    ///
    /// `value` is a list of (coefficient, word) pairs. Every letter in it must
    /// precede `right` in canonical order, which is what makes rewriting terminate.
    pub fn with_relation(
        mut self,
        left: &str,
        right: &str,
        value: &[(ParamScalar, &[&str])],
    ) -> Result<Self, AlgebraError> {
        let i = self.index_of(left)?;
        let j = self.index_of(right)?;
        let (lo, hi, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
        let mut terms = Terms::new();
        for (s, word) in value {
            let w = word
                .iter()
                .map(|g| self.index_of(g))
                .collect::<Result<Word, _>>()?;
            if w.iter().any(|&g| g >= hi) {
                return Err(AlgebraError::NonLoweringRelation {
                    left: self.generators[lo as usize].clone(),
                    right: self.generators[hi as usize].clone(),
                    context: self.name.clone(),
                });
            }
            let s = if sign < 0 { -s } else { s.clone() };
            accumulate_term(&mut terms, w, s);
        }
        self.relations.insert((lo, hi), terms);
        Ok(self)
    }

    pub fn with_non_self_adjoint(mut self, generator: &str) -> Result<Self, AlgebraError> {
        let i = self.index_of(generator)?;
        self.self_adjoint[i as usize] = false;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn is_self_adjoint(&self, generator: &str) -> bool {
        self.index_of(generator)
            .map(|i| self.self_adjoint[i as usize])
            .unwrap_or(false)
    }

    fn index_of(&self, name: &str) -> Result<u8, AlgebraError> {
        self.generators
            .iter()
            .position(|g| g == name)
            .map(|i| i as u8)
            .ok_or_else(|| AlgebraError::UnknownGenerator {
                name: name.to_string(),
                context: self.name.clone(),
            })
    }

    /// Rewrites a word into normal order.
    fn normal_order(&self, word: &[u8], memo: &mut HashMap<Word, Terms>) -> Terms {
        if let Some(hit) = memo.get(word) {
            return hit.clone();
        }
        let swap_at = word
            .windows(2)
            .position(|pair| pair[0] > pair[1] && self.relations.contains_key(&(pair[1], pair[0])));
        let result = match swap_at {
            None => {
                let mut t = Terms::new();
                t.insert(word.to_vec(), ParamScalar::one());
                t
            }
            Some(p) => {
                let (hi, lo) = (word[p], word[p + 1]);
                let mut swapped = word.to_vec();
                swapped.swap(p, p + 1);
                let mut out = self.normal_order(&swapped, memo);
                // g_hi g_lo = g_lo g_hi - [g_lo, g_hi]
                for (w, s) in &self.relations[&(lo, hi)] {
                    let mut replaced = word[..p].to_vec();
                    replaced.extend_from_slice(w);
                    replaced.extend_from_slice(&word[p + 2..]);
                    for (w2, s2) in self.normal_order(&replaced, memo) {
                        accumulate_term(&mut out, w2, -(s * &s2));
                    }
                }
                out
            }
        };
        memo.insert(word.to_vec(), result.clone());
        result
    }
}

fn same_context(a: &Arc<AlgebraContext>, b: &Arc<AlgebraContext>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn mismatch(a: &AlgebraContext, b: &AlgebraContext) -> AlgebraError {
    AlgebraError::ContextMismatch {
        left: a.name.clone(),
        right: b.name.clone(),
    }
}

/// Canonical Heisenberg algebra on `x_s, y_s, p_xs, p_ys`.
pub fn heisenberg() -> Arc<AlgebraContext> {
    static CTX: OnceLock<Arc<AlgebraContext>> = OnceLock::new();
    CTX.get_or_init(|| {
        let ih = ParamScalar::i().times(Param::Hbar, 1);
        Arc::new(
            commuting_except(
                AlgebraContext::free("HEISENBERG", &["x_s", "y_s", "p_xs", "p_ys"]),
                &[("x_s", "p_xs", ih.clone()), ("y_s", "p_ys", ih)],
            )
            .expect("built-in algebra"),
        )
    })
    .clone()
}

/// Flat noncommutative algebra on `x0, y0, p_x0, p_y0` with `[x0, y0] = i theta`.
pub fn flat_nc() -> Arc<AlgebraContext> {
    static CTX: OnceLock<Arc<AlgebraContext>> = OnceLock::new();
    CTX.get_or_init(|| {
        let ih = ParamScalar::i().times(Param::Hbar, 1);
        let itheta = ParamScalar::i().times(Param::Theta, 1);
        Arc::new(
            commuting_except(
                AlgebraContext::free("FLAT_NC", &["x0", "y0", "p_x0", "p_y0"]),
                &[
                    ("x0", "y0", itheta),
                    ("x0", "p_x0", ih.clone()),
                    ("y0", "p_y0", ih),
                ],
            )
            .expect("built-in algebra"),
        )
    })
    .clone()
}

/// Free algebra on the deformed variables `x, y, p_x, p_y`.
///
/// Their brackets are not constant, so they are not imposed as rewrite rules;
/// expressions here are only ever mapped into a concrete representation.
pub fn deformed_symbols() -> Arc<AlgebraContext> {
    static CTX: OnceLock<Arc<AlgebraContext>> = OnceLock::new();
    CTX.get_or_init(|| Arc::new(AlgebraContext::free("POSDEP", &["x", "y", "p_x", "p_y"])))
        .clone()
}

/// Every pair commutes except the listed constant brackets.
fn commuting_except(
    mut ctx: AlgebraContext,
    nonzero: &[(&str, &str, ParamScalar)],
) -> Result<AlgebraContext, AlgebraError> {
    let names = ctx.generators.clone();
    for (a, left) in names.iter().enumerate() {
        for right in &names[a + 1..] {
            let value = nonzero
                .iter()
                .find(|(l, r, _)| l == left && r == right)
                .map(|(_, _, s)| s.clone());
            ctx = match value {
                Some(s) => ctx.with_relation(left, right, &[(s, &[])])?,
                None => ctx.with_relation(left, right, &[])?,
            };
        }
    }
    Ok(ctx)
}

/// Normal-ordered operator polynomial.
#[derive(Debug, Clone)]
pub struct OpExpr {
    ctx: Arc<AlgebraContext>,
    terms: Terms,
}

impl PartialEq for OpExpr {
    fn eq(&self, other: &Self) -> bool {
        same_context(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for OpExpr {}

impl OpExpr {
    pub fn zero(ctx: &Arc<AlgebraContext>) -> Self {
        OpExpr {
            ctx: ctx.clone(),
            terms: Terms::new(),
        }
    }

    pub fn scalar(ctx: &Arc<AlgebraContext>, s: ParamScalar) -> Self {
        let mut terms = Terms::new();
        accumulate_term(&mut terms, Vec::new(), s);
        OpExpr {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn one(ctx: &Arc<AlgebraContext>) -> Self {
        OpExpr::scalar(ctx, ParamScalar::one())
    }

    pub fn generator(ctx: &Arc<AlgebraContext>, name: &str) -> Result<Self, AlgebraError> {
        OpExpr::word(ctx, ParamScalar::one(), &[name])
    }

    /// `s * g_1 g_2 ... g_n`, normal-ordered.
    pub fn word(
        ctx: &Arc<AlgebraContext>,
        s: ParamScalar,
        letters: &[&str],
    ) -> Result<Self, AlgebraError> {
        let w = letters
            .iter()
            .map(|g| ctx.index_of(g))
            .collect::<Result<Word, _>>()?;
        let mut memo = HashMap::new();
        let mut terms = Terms::new();
        for (w2, s2) in ctx.normal_order(&w, &mut memo) {
            accumulate_term(&mut terms, w2, &s * &s2);
        }
        Ok(OpExpr {
            ctx: ctx.clone(),
            terms,
        })
    }

    /// Sum of `(coefficient, word)` terms, each normal-ordered.
    pub fn sum_of_words(
        ctx: &Arc<AlgebraContext>,
        parts: &[(ParamScalar, &[&str])],
    ) -> Result<Self, AlgebraError> {
        let mut out = OpExpr::zero(ctx);
        for (s, letters) in parts {
            out = out.add(&OpExpr::word(ctx, s.clone(), letters)?)?;
        }
        Ok(out)
    }

    pub fn context(&self) -> &Arc<AlgebraContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of distinct monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Monomials as generator-name lists with their coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<&str>, &ParamScalar)> {
        self.terms.iter().map(|(w, s)| {
            (
                w.iter()
                    .map(|&g| self.ctx.generators[g as usize].as_str())
                    .collect(),
                s,
            )
        })
    }

    /// Coefficient of the given (already normal-ordered) monomial.
    pub fn coefficient(&self, letters: &[&str]) -> Result<ParamScalar, AlgebraError> {
        let w = letters
            .iter()
            .map(|g| self.ctx.index_of(g))
            .collect::<Result<Word, _>>()?;
        Ok(self.terms.get(&w).cloned().unwrap_or_default())
    }

    fn check(&self, other: &OpExpr) -> Result<(), AlgebraError> {
        if same_context(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(mismatch(&self.ctx, &other.ctx))
        }
    }

    pub fn add(&self, other: &OpExpr) -> Result<OpExpr, AlgebraError> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (w, s) in &other.terms {
            accumulate_term(&mut terms, w.clone(), s.clone());
        }
        Ok(OpExpr {
            ctx: self.ctx.clone(),
            terms,
        })
    }

    pub fn sub(&self, other: &OpExpr) -> Result<OpExpr, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> OpExpr {
        self.scale(&ParamScalar::rational(-1, 1))
    }

    pub fn scale(&self, s: &ParamScalar) -> OpExpr {
        let mut terms = Terms::new();
        for (w, c) in &self.terms {
            accumulate_term(&mut terms, w.clone(), c * s);
        }
        OpExpr {
            ctx: self.ctx.clone(),
            terms,
        }
    }

    pub fn mul(&self, other: &OpExpr) -> Result<OpExpr, AlgebraError> {
        self.check(other)?;
        let mut memo = HashMap::new();
        let mut terms = Terms::new();
        for (wa, sa) in &self.terms {
            for (wb, sb) in &other.terms {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                let s = sa * sb;
                for (w2, s2) in self.ctx.normal_order(&w, &mut memo) {
                    accumulate_term(&mut terms, w2, &s * &s2);
                }
            }
        }
        Ok(OpExpr {
            ctx: self.ctx.clone(),
            terms,
        })
    }

    pub fn pow(&self, n: u32) -> OpExpr {
        let mut out = OpExpr::one(&self.ctx);
        for _ in 0..n {
            out = out.mul(self).expect("same context");
        }
        out
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &OpExpr) -> Result<OpExpr, AlgebraError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Hermitian adjoint: conjugate coefficients, reverse words, re-normal-order.
    pub fn adjoint(&self) -> Result<OpExpr, AlgebraError> {
        let mut memo = HashMap::new();
        let mut terms = Terms::new();
        for (w, s) in &self.terms {
            if let Some(&g) = w.iter().find(|&&g| !self.ctx.self_adjoint[g as usize]) {
                return Err(AlgebraError::NotSelfAdjoint(
                    self.ctx.generators[g as usize].clone(),
                ));
            }
            let reversed: Word = w.iter().rev().copied().collect();
            let conj = s.conj();
            for (w2, s2) in self.ctx.normal_order(&reversed, &mut memo) {
                accumulate_term(&mut terms, w2, &conj * &s2);
            }
        }
        Ok(OpExpr {
            ctx: self.ctx.clone(),
            terms,
        })
    }

    pub fn truncate(&self, t: &Truncation) -> OpExpr {
        let mut terms = Terms::new();
        for (w, s) in &self.terms {
            accumulate_term(&mut terms, w.clone(), s.truncate(t));
        }
        OpExpr {
            ctx: self.ctx.clone(),
            terms,
        }
    }

    /// Drops every monomial containing `generator`.
    pub fn without_generator(&self, generator: &str) -> Result<OpExpr, AlgebraError> {
        let g = self.ctx.index_of(generator)?;
        Ok(OpExpr {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| !w.contains(&g))
                .map(|(w, s)| (w.clone(), s.clone()))
                .collect(),
        })
    }

    /// Homomorphic image under `generator -> image`, multiplied out in `target`.
    ///
    /// Letters are replaced in place, so the word order of each monomial is kept.
    pub fn substitute(
        &self,
        target: &Arc<AlgebraContext>,
        images: &BTreeMap<String, OpExpr>,
    ) -> Result<OpExpr, AlgebraError> {
        let mut resolved: Vec<Option<&OpExpr>> = vec![None; self.ctx.generators.len()];
        for (name, image) in images {
            if !same_context(&image.ctx, target) {
                return Err(mismatch(target, &image.ctx));
            }
            if let Ok(i) = self.ctx.index_of(name) {
                resolved[i as usize] = Some(image);
            }
        }

        let mut out = OpExpr::zero(target);
        for (w, s) in &self.terms {
            let mut product = OpExpr::scalar(target, s.clone());
            for &g in w {
                let image = resolved[g as usize].ok_or_else(|| {
                    AlgebraError::MissingImage(self.ctx.generators[g as usize].clone())
                })?;
                product = product.mul(image)?;
            }
            out = out.add(&product)?;
        }
        Ok(out)
    }
}

fn fmt_word(ctx: &AlgebraContext, w: &[u8]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut k = 0;
    while k < w.len() {
        let mut run = 1;
        while k + run < w.len() && w[k + run] == w[k] {
            run += 1;
        }
        let name = &ctx.generators[w[k] as usize];
        parts.push(if run == 1 {
            name.clone()
        } else {
            format!("{name}^{run}")
        });
        k += run;
    }
    parts.join("*")
}

impl fmt::Display for OpExpr {
    /// Terms ordered by word length, then word; each as `coefficient*monomial`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut entries: Vec<(&Word, &ParamScalar)> = self.terms.iter().collect();
        entries.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        let parts = entries.into_iter().map(|(w, s)| {
            if w.is_empty() {
                return s.to_string();
            }
            let mono = fmt_word(&self.ctx, w);
            if s.is_one() {
                mono
            } else if s.len() == 1 {
                let c = s.to_string();
                if c == "-1" {
                    format!("-{mono}")
                } else {
                    format!("{c}*{mono}")
                }
            } else {
                format!("({s})*{mono}")
            }
        });
        f.write_str(&join_signed(parts))
    }
}
