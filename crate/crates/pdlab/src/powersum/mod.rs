//! A commutative algebra of power-sum observables and the diffusion
//! generator acting on it.
//!
//! The observable `phi_k` maps a ranked weight vector to `sum_i w_i^k`;
//! `phi_1` is identically one and is normalized away. Polynomials in the
//! `phi_k` are closed under the generator: applying it to a product of power
//! sums returns another such polynomial one degree lower plus a diagonal
//! term. This module implements that action, stationary expectations of
//! arbitrary monomials, the induced Dirichlet form, a small parser for
//! polynomial expressions, and (in the submodules) the spectral picture and
//! the closed-form mean flow of single power sums.

mod coeff;
pub mod ode;
pub mod spectrum;

pub use coeff::Coeff;
#[cfg(any(test, feature = "exact-rational"))]
pub use coeff::ratio;
pub use ode::moment_flow;
pub use spectrum::{decay_rate, degree_basis, generator_matrix, spectrum, SpectrumLine};

use crate::core::{tol, PdParams, RankedWeights};
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// Product of power sums `phi_{k_1} * ... * phi_{k_r}`, stored as the
/// decreasing list of orders `k_i >= 2`. The empty product is the constant 1;
/// order-1 factors are dropped on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Monomial {
    orders: Vec<u32>,
}

impl Monomial {
    pub fn new(mut orders: Vec<u32>) -> Result<Self> {
        if orders.iter().any(|&k| k == 0) {
            return Err(Error::Domain("power-sum order must be at least 1".into()));
        }
        orders.retain(|&k| k >= 2);
        orders.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Monomial { orders })
    }

    /// The constant monomial 1.
    pub fn one() -> Self {
        Monomial { orders: Vec::new() }
    }

    /// The single power sum `phi_k`.
    pub fn phi(k: u32) -> Result<Self> {
        Monomial::new(vec![k])
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// Total degree `sum_i k_i`.
    pub fn degree(&self) -> u32 {
        self.orders.iter().sum()
    }

    /// Number of power-sum factors.
    pub fn factors(&self) -> usize {
        self.orders.len()
    }

    pub fn is_constant(&self) -> bool {
        self.orders.is_empty()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut orders = self.orders.clone();
        orders.extend_from_slice(&other.orders);
        orders.sort_unstable_by(|a, b| b.cmp(a));
        Monomial { orders }
    }

    pub fn evaluate(&self, x: &RankedWeights) -> f64 {
        self.orders.iter().map(|&k| x.power_sum(k)).product()
    }
}

/// Polynomial in the power sums with coefficients in `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSumPoly<C: Coeff = f64> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> PowerSumPoly<C> {
    pub fn zero() -> Self {
        PowerSumPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: C) -> Self {
        let mut p = Self::zero();
        p.accumulate(Monomial::one(), c);
        p
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let mut p = Self::zero();
        p.accumulate(m, c);
        p
    }

    pub fn phi(k: u32) -> Result<Self> {
        Ok(Self::monomial(Monomial::phi(k)?, C::one()))
    }

    fn accumulate(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing = existing.add(&c);
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c.neg());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.accumulate(ma.times(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (m, coeff) in &self.terms {
            out.accumulate(m.clone(), coeff.mul(c));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest total degree over the terms.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Coefficient of a monomial (zero when absent).
    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }
}

impl PowerSumPoly<f64> {
    pub fn evaluate(&self, x: &RankedWeights) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c * m.evaluate(x))
            .sum()
    }
}

impl std::fmt::Display for PowerSumPoly<f64> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<(&Monomial, &f64)> = self.terms.iter().collect();
        ordered.sort_by(|a, b| {
            b.0.degree()
                .cmp(&a.0.degree())
                .then_with(|| b.0.orders().cmp(a.0.orders()))
        });
        for (i, (m, c)) in ordered.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if **c < 0.0 {
                    write!(f, "-")?;
                }
            } else if **c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit_coeff = (mag - 1.0).abs() < 1e-15;
            if m.is_constant() {
                write!(f, "{mag}")?;
            } else {
                if !unit_coeff {
                    write!(f, "{mag}*")?;
                }
                for (j, k) in m.orders().iter().enumerate() {
                    if j > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "phi{k}")?;
                }
            }
        }
        Ok(())
    }
}

/// Action of the diffusion generator on a power-sum polynomial, with the
/// parameters supplied as coefficients so the computation stays inside `C`.
///
/// On a monomial with orders `m_1, ..., m_r` and total degree `m`:
/// each factor `phi_{m_i}` can lose a unit of order with coefficient
/// `m_i (m_i - 1 - alpha) / 2`, each pair merges into `phi_{m_i + m_j - 1}`
/// with coefficient `m_i m_j`, and the monomial itself is damped by
/// `m (m - 1 + theta) / 2`.
pub fn generator_apply_in<C: Coeff>(
    alpha: &C,
    theta: &C,
    poly: &PowerSumPoly<C>,
) -> PowerSumPoly<C> {
    let two = C::from_int(2);
    let mut out = PowerSumPoly::zero();
    for (mono, coeff) in poly.terms() {
        let orders = mono.orders();
        if orders.is_empty() {
            continue; // constants are harmonic
        }
        let m_total = mono.degree();
        // order-drop terms
        for (i, &mi) in orders.iter().enumerate() {
            let c = C::from_int(i64::from(mi))
                .mul(&C::from_int(i64::from(mi) - 1).sub(alpha))
                .div(&two);
            if c.is_zero() {
                continue;
            }
            let mut new_orders: Vec<u32> = Vec::with_capacity(orders.len());
            for (j, &mj) in orders.iter().enumerate() {
                if j == i {
                    new_orders.push(mj - 1);
                } else {
                    new_orders.push(mj);
                }
            }
            let target = Monomial::new(new_orders).expect("orders stay positive");
            out.accumulate(target, coeff.mul(&c));
        }
        // pair-merge terms
        for i in 0..orders.len() {
            for j in (i + 1)..orders.len() {
                let c = C::from_int(i64::from(orders[i]) * i64::from(orders[j]));
                let mut new_orders: Vec<u32> = Vec::with_capacity(orders.len() - 1);
                for (l, &ml) in orders.iter().enumerate() {
                    if l == i {
                        new_orders.push(orders[i] + orders[j] - 1);
                    } else if l != j {
                        new_orders.push(ml);
                    }
                }
                let target = Monomial::new(new_orders).expect("orders stay positive");
                out.accumulate(target, coeff.mul(&c));
            }
        }
        // diagonal damping
        let damp = C::from_int(i64::from(m_total))
            .mul(&C::from_int(i64::from(m_total) - 1).add(theta))
            .div(&two);
        out.accumulate(mono.clone(), coeff.mul(&damp).neg());
    }
    out
}

/// [`generator_apply_in`] with `f64` coefficients taken from `params`.
pub fn generator_apply(params: &PdParams, poly: &PowerSumPoly<f64>) -> PowerSumPoly<f64> {
    generator_apply_in(&params.alpha(), &params.theta(), poly)
}

fn check_monomial_capacity(mono: &Monomial) -> Result<()> {
    if mono.factors() > tol::MAX_FACTORS {
        return Err(Error::Capacity(format!(
            "monomial has {} factors (max {})",
            mono.factors(),
            tol::MAX_FACTORS
        )));
    }
    if mono.degree() > tol::MAX_TOTAL_DEGREE {
        return Err(Error::Capacity(format!(
            "monomial degree {} exceeds {}",
            mono.degree(),
            tol::MAX_TOTAL_DEGREE
        )));
    }
    Ok(())
}

/// Visit every set partition of `{0, ..., k-1}` as a block-assignment vector
/// in restricted growth form.
fn for_each_set_partition<F: FnMut(&[usize], usize)>(k: usize, f: &mut F) {
    fn rec<F: FnMut(&[usize], usize)>(assign: &mut Vec<usize>, used: usize, k: usize, f: &mut F) {
        if assign.len() == k {
            f(assign, used);
            return;
        }
        for b in 0..=used {
            assign.push(b);
            rec(assign, used.max(b + 1), k, f);
            assign.pop();
        }
    }
    let mut assign = Vec::with_capacity(k);
    rec(&mut assign, 0, k, f);
}

fn ascending_in<C: Coeff>(x: &C, n: u32) -> C {
    let mut acc = C::one();
    for i in 0..n {
        acc = acc.mul(&x.add(&C::from_int(i64::from(i))));
    }
    acc
}

/// Stationary expectation of a single monomial, staying inside `C`.
///
/// Summing over set partitions of the factor set: a block `B` with combined
/// order `n_B` contributes `(1 - alpha)_(n_B - 1)`, a partition into `l`
/// blocks carries `prod_{j=1}^{l-1} (theta + j alpha)`, and the whole sum is
/// divided by `(theta + 1)_(N - 1)` where `N` is the total degree.
pub fn monomial_expectation_in<C: Coeff>(
    alpha: &C,
    theta: &C,
    mono: &Monomial,
) -> Result<C> {
    if mono.is_constant() {
        return Ok(C::one());
    }
    check_monomial_capacity(mono)?;
    let orders = mono.orders();
    let k = orders.len();
    let n_total = mono.degree();
    let one_minus_alpha = C::one().sub(alpha);
    let mut numerator = C::zero();
    for_each_set_partition(k, &mut |assign, blocks| {
        let mut block_order = vec![0u32; blocks];
        for (i, &b) in assign.iter().enumerate() {
            block_order[b] += orders[i];
        }
        let mut w = C::one();
        for j in 1..blocks {
            w = w.mul(&theta.add(&alpha.mul(&C::from_int(j as i64))));
        }
        for &nb in &block_order {
            w = w.mul(&ascending_in(&one_minus_alpha, nb - 1));
        }
        numerator = numerator.add(&w);
    });
    let denom = ascending_in(&theta.add(&C::one()), n_total - 1);
    Ok(numerator.div(&denom))
}

/// Stationary expectation of a power-sum polynomial.
pub fn pd_expectation(params: &PdParams, poly: &PowerSumPoly<f64>) -> Result<f64> {
    let alpha = params.alpha();
    let theta = params.theta();
    let mut acc = 0.0;
    for (mono, coeff) in poly.terms() {
        acc += coeff * monomial_expectation_in(&alpha, &theta, mono)?;
    }
    Ok(acc)
}

/// Absolute stationary mean of the generator applied to `poly`; identically
/// zero in exact arithmetic.
pub fn stationary_mean_residual(params: &PdParams, poly: &PowerSumPoly<f64>) -> Result<f64> {
    Ok(pd_expectation(params, &generator_apply(params, poly))?.abs())
}

/// Dirichlet form `E(u, v) = -E[(Au) v]` at stationarity.
pub fn dirichlet_form(
    params: &PdParams,
    u: &PowerSumPoly<f64>,
    v: &PowerSumPoly<f64>,
) -> Result<f64> {
    Ok(-pd_expectation(params, &generator_apply(params, u).mul(v))?)
}

/// Dirichlet energy between two single power sums in closed form:
/// `(m k / 2) (E[phi_{m+k-1}] - E[phi_m phi_k])`.
pub fn energy_between_powers(params: &PdParams, m: u32, k: u32) -> Result<f64> {
    if m < 2 || k < 2 {
        return Err(Error::Domain("orders must be at least 2".into()));
    }
    let cross = monomial_expectation_in(
        &params.alpha(),
        &params.theta(),
        &Monomial::phi(m + k - 1)?,
    )?;
    let product = monomial_expectation_in(
        &params.alpha(),
        &params.theta(),
        &Monomial::new(vec![m, k])?,
    )?;
    Ok(0.5 * f64::from(m) * f64::from(k) * (cross - product))
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Phi(u32),
    Plus,
    Minus,
    Star,
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' {
            tokens.push(Token::Plus);
            i += 1;
        } else if c == '-' {
            tokens.push(Token::Minus);
            i += 1;
        } else if c == '*' {
            tokens.push(Token::Star);
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || chars[i] == 'e'
                    || chars[i] == 'E'
                    || ((chars[i] == '+' || chars[i] == '-')
                        && matches!(chars[i - 1], 'e' | 'E')))
            {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| Error::Parse(format!("invalid number '{text}'")))?;
            tokens.push(Token::Number(value));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let order = word
                .strip_prefix("phi")
                .and_then(|rest| rest.parse::<u32>().ok())
                .ok_or_else(|| Error::Parse(format!("unknown symbol '{word}'")))?;
            if order == 0 {
                return Err(Error::Parse("phi0 is not a valid power sum".into()));
            }
            tokens.push(Token::Phi(order));
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(tokens)
}

/// Parse a polynomial expression such as `3*phi2*phi3 - phi4 + 1`.
///
/// Grammar: signed terms joined by `+` or `-`; each term is a `*`-separated
/// product of numbers and `phiK` symbols with `K >= 1` (`phi1` is the
/// constant one).
pub fn parse_poly(input: &str) -> Result<PowerSumPoly<f64>> {
    let tokens = tokenize(input)?;
    if tokens.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut poly = PowerSumPoly::zero();
    let mut i = 0;
    loop {
        // optional sign chain before a term
        let mut sign = 1.0;
        while i < tokens.len() && matches!(tokens[i], Token::Plus | Token::Minus) {
            if tokens[i] == Token::Minus {
                sign = -sign;
            }
            i += 1;
        }
        if i >= tokens.len() {
            return Err(Error::Parse("expression ends with an operator".into()));
        }
        // product of factors
        let mut coeff = sign;
        let mut orders: Vec<u32> = Vec::new();
        loop {
            match tokens[i] {
                Token::Number(v) => coeff *= v,
                Token::Phi(k) => orders.push(k),
                _ => return Err(Error::Parse("expected a number or phiK".into())),
            }
            i += 1;
            if i < tokens.len() && tokens[i] == Token::Star {
                i += 1;
                if i >= tokens.len() {
                    return Err(Error::Parse("expression ends with an operator".into()));
                }
            } else {
                break;
            }
        }
        poly = poly.add(&PowerSumPoly::monomial(Monomial::new(orders)?, coeff));
        if i >= tokens.len() {
            break;
        }
        match tokens[i] {
            Token::Plus | Token::Minus => {} // consumed at loop head
            _ => return Err(Error::Parse("expected '+' or '-' between terms".into())),
        }
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn tp(alpha: f64, theta: f64) -> PdParams {
        PdParams::new_two_param(alpha, theta).unwrap()
    }

    fn phi(k: u32) -> PowerSumPoly<f64> {
        PowerSumPoly::phi(k).unwrap()
    }

    #[test]
    fn monomial_normalization() {
        let m = Monomial::new(vec![2, 5, 1, 3, 1]).unwrap();
        assert_eq!(m.orders(), &[5, 3, 2]);
        assert_eq!(m.degree(), 10);
        assert_eq!(m.factors(), 3);
        assert!(Monomial::new(vec![0]).is_err());
        assert!(Monomial::new(vec![1, 1]).unwrap().is_constant());
    }

    #[test]
    fn poly_arithmetic() {
        let p = phi(2).add(&phi(3).scale(&2.0));
        let q = p.mul(&phi(2));
        let m22 = Monomial::new(vec![2, 2]).unwrap();
        let m32 = Monomial::new(vec![3, 2]).unwrap();
        assert_eq!(q.coefficient(&m22), 1.0);
        assert_eq!(q.coefficient(&m32), 2.0);
        assert!(p.sub(&p).is_zero());
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn evaluate_on_weights() {
        let x = RankedWeights::new(vec![0.5, 0.3, 0.2], 0.0).unwrap();
        let p = parse_poly("phi2 + 2*phi3 - 1").unwrap();
        let expect = 0.38 + 2.0 * 0.16 - 1.0;
        assert!((p.evaluate(&x) - expect).abs() < 1e-15);
    }

    #[test]
    fn generator_on_pair_coincidence() {
        // A phi2 = (1 - alpha) - (1 + theta) phi2
        for params in [tp(0.5, 0.5), tp(0.0, 2.0), tp(0.7, 0.0)] {
            let out = generator_apply(&params, &phi(2));
            assert_eq!(out.num_terms(), 2);
            let c0 = out.coefficient(&Monomial::one());
            let c2 = out.coefficient(&Monomial::phi(2).unwrap());
            assert!((c0 - (1.0 - params.alpha())).abs() < 1e-14);
            assert!((c2 + (1.0 + params.theta())).abs() < 1e-14);
        }
    }

    #[test]
    fn generator_on_product_hand_value() {
        let params = tp(0.3, 1.2);
        let (a, t) = (0.3, 1.2);
        let input = PowerSumPoly::monomial(Monomial::new(vec![3, 2]).unwrap(), 1.0);
        let out = generator_apply(&params, &input);
        assert_eq!(out.num_terms(), 4);
        let c22 = out.coefficient(&Monomial::new(vec![2, 2]).unwrap());
        assert!((c22 - 3.0 * (2.0 - a) / 2.0).abs() < 1e-14);
        let c3 = out.coefficient(&Monomial::phi(3).unwrap());
        assert!((c3 - (1.0 - a)).abs() < 1e-14);
        let c4 = out.coefficient(&Monomial::phi(4).unwrap());
        assert!((c4 - 6.0).abs() < 1e-14);
        let c32 = out.coefficient(&Monomial::new(vec![3, 2]).unwrap());
        assert!((c32 + 5.0 * (4.0 + t) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn generator_kills_constants() {
        let params = tp(0.4, 0.6);
        let out = generator_apply(&params, &PowerSumPoly::constant(3.5));
        assert!(out.is_zero());
    }

    #[test]
    fn single_power_expectations() {
        // E[phi_m] = (1 - alpha)_(m-1) / (1 + theta)_(m-1)
        for params in [tp(0.5, 0.5), tp(0.0, 1.0), tp(0.3, 0.0)] {
            let (a, t) = (params.alpha(), params.theta());
            for m in 2u32..=6 {
                let expect = crate::core::ascending_factorial(1.0 - a, m - 1)
                    / crate::core::ascending_factorial(1.0 + t, m - 1);
                let got = pd_expectation(&params, &phi(m)).unwrap();
                assert!((got - expect).abs() < 1e-13, "{params} m = {m}");
            }
        }
        let got = pd_expectation(&tp(0.5, 0.5), &phi(2)).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn product_expectation_hand_value() {
        // E[phi2^2] at (0, 1): one-block 6/24 plus two-block 1/24
        let p = phi(2).mul(&phi(2));
        let got = pd_expectation(&tp(0.0, 1.0), &p).unwrap();
        assert!((got - 7.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn expectation_via_sample_partitions() {
        // E[phi_2^a phi_3^b] agrees with enumerating sample partitions:
        // a two-sample coincidence has probability E[phi_2], etc. Cross-check
        // E[phi_2 phi_3] against sum over partitions of 5 of the probability
        // that specified groups coincide, done directly with a small mixture.
        let params = tp(0.4, 0.8);
        let (a, t) = (0.4, 0.8);
        // direct formula: blocks {2},{3} and {2,3}
        let expect = ((t + a)
            * crate::core::ascending_factorial(1.0 - a, 1)
            * crate::core::ascending_factorial(1.0 - a, 2)
            + crate::core::ascending_factorial(1.0 - a, 4))
            / crate::core::ascending_factorial(1.0 + t, 4);
        let got = pd_expectation(
            &params,
            &PowerSumPoly::monomial(Monomial::new(vec![3, 2]).unwrap(), 1.0),
        )
        .unwrap();
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn stationary_mean_vanishes() {
        let polys = [
            parse_poly("phi2").unwrap(),
            parse_poly("phi2*phi2 - phi3").unwrap(),
            parse_poly("phi4*phi2 + 2*phi3 - 0.25").unwrap(),
            parse_poly("phi2*phi2*phi2").unwrap(),
        ];
        for params in [tp(0.5, 0.5), tp(0.0, 1.0), tp(0.3, 0.0), tp(0.8, -0.4)] {
            for p in &polys {
                let r = stationary_mean_residual(&params, p).unwrap();
                assert!(r < 1e-12, "{params}: residual {r}");
            }
        }
    }

    #[test]
    fn stationary_mean_vanishes_exactly_in_rationals() {
        let alpha = ratio(1, 2);
        let theta = ratio(1, 3);
        let p: PowerSumPoly<BigRational> = PowerSumPoly::monomial(
            Monomial::new(vec![3, 2]).unwrap(),
            ratio(1, 1),
        )
        .add(&PowerSumPoly::monomial(
            Monomial::new(vec![2, 2]).unwrap(),
            ratio(-2, 5),
        ));
        let image = generator_apply_in(&alpha, &theta, &p);
        let mut mean = <BigRational as Coeff>::zero();
        for (mono, c) in image.terms() {
            let e = monomial_expectation_in(&alpha, &theta, mono).unwrap();
            mean = mean.add(&c.mul(&e));
        }
        assert!(mean.is_zero());
    }

    #[test]
    fn dirichlet_form_properties() {
        let params = tp(0.5, 0.5);
        let u = parse_poly("phi2 + 0.5*phi3").unwrap();
        let v = parse_poly("phi2*phi2 - 2").unwrap();
        let euv = dirichlet_form(&params, &u, &v).unwrap();
        let evu = dirichlet_form(&params, &v, &u).unwrap();
        assert!((euv - evu).abs() < 1e-12);
        // energies are nonnegative, constants carry none
        assert!(dirichlet_form(&params, &u, &u).unwrap() > 0.0);
        let c = PowerSumPoly::constant(4.0);
        assert!(dirichlet_form(&params, &c, &c).unwrap().abs() < 1e-14);
    }

    #[test]
    fn energy_closed_form_matches_form() {
        for params in [tp(0.5, 0.5), tp(0.0, 1.0), tp(0.2, 2.0)] {
            for (m, k) in [(2u32, 2u32), (2, 3), (3, 4)] {
                let via_form =
                    dirichlet_form(&params, &phi(m), &phi(k)).unwrap();
                let closed = energy_between_powers(&params, m, k).unwrap();
                assert!(
                    (via_form - closed).abs() < 1e-12,
                    "{params} ({m}, {k}): {via_form} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn capacity_guards() {
        let wide = Monomial::new(vec![2; tol::MAX_FACTORS + 1]).unwrap();
        assert!(matches!(
            monomial_expectation_in(&0.5f64, &0.5f64, &wide),
            Err(Error::Capacity(_))
        ));
        let deep = Monomial::new(vec![tol::MAX_TOTAL_DEGREE + 1]).unwrap();
        assert!(matches!(
            monomial_expectation_in(&0.5f64, &0.5f64, &deep),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn parser_accepts_reference_forms() {
        let p = parse_poly("3*phi2*phi3 - phi4 + 1").unwrap();
        assert_eq!(p.coefficient(&Monomial::new(vec![3, 2]).unwrap()), 3.0);
        assert_eq!(p.coefficient(&Monomial::phi(4).unwrap()), -1.0);
        assert_eq!(p.coefficient(&Monomial::one()), 1.0);
        // phi1 is the constant one
        let q = parse_poly("2*phi1 + phi2").unwrap();
        assert_eq!(q.coefficient(&Monomial::one()), 2.0);
        // signs and scientific notation
        let r = parse_poly("-phi2 + 2.5e-1").unwrap();
        assert_eq!(r.coefficient(&Monomial::phi(2).unwrap()), -1.0);
        assert_eq!(r.coefficient(&Monomial::one()), 0.25);
        // products of numbers collapse
        let s = parse_poly("2*3*phi2").unwrap();
        assert_eq!(s.coefficient(&Monomial::phi(2).unwrap()), 6.0);
    }

    #[test]
    fn parser_rejects_malformed_input() {
        for bad in [
            "", "phi", "phi0", "foo2", "phi2 +", "+ * phi2", "phi2 * * phi3",
            "(phi2)", "phi2 3", "1..5", "phi2 & phi3",
        ] {
            assert!(parse_poly(bad).is_err(), "should reject '{bad}'");
        }
    }

    #[test]
    fn display_round_trips() {
        for text in ["3*phi2*phi3 - phi4 + 1", "phi2", "-2*phi2*phi2 + 0.5"] {
            let p = parse_poly(text).unwrap();
            let q = parse_poly(&p.to_string()).unwrap();
            assert_eq!(p, q, "via '{}'", p);
        }
    }

    proptest! {
        #[test]
        fn random_polys_have_zero_stationary_mean(
            orders in proptest::collection::vec(2u32..6, 1..4),
            coeff in -3i32..3,
            alpha in 0.0f64..0.9,
            dtheta in 0.05f64..2.0,
        ) {
            let params = tp(alpha, -alpha + dtheta);
            let mono = Monomial::new(orders).unwrap();
            let p = PowerSumPoly::monomial(mono, f64::from(coeff) + 0.5);
            let r = stationary_mean_residual(&params, &p).unwrap();
            prop_assert!(r < 1e-11, "residual {r}");
        }

        #[test]
        fn display_parse_round_trip(
            coeffs in proptest::collection::vec(-5i32..6, 1..4),
        ) {
            let mut p = PowerSumPoly::zero();
            let shapes: [&[u32]; 4] = [&[2], &[3, 2], &[4], &[2, 2, 2]];
            for (i, &c) in coeffs.iter().enumerate() {
                if c != 0 {
                    p = p.add(&PowerSumPoly::monomial(
                        Monomial::new(shapes[i % shapes.len()].to_vec()).unwrap(),
                        f64::from(c),
                    ));
                }
            }
            if !p.is_zero() {
                let q = parse_poly(&p.to_string()).unwrap();
                prop_assert_eq!(p, q);
            }
        }
    }
}
