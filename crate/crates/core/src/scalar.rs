//! Exact scalars.
//!
//! [`LaurentScalar`] is a Laurent polynomial in `t = q^{1/3}` with rational
//! coefficients. [`CycloScalar`] is an element of `Q(zeta)` with
//! `zeta = exp(i pi / 3n)`, the image of `t` under evaluation at `q = exp(i pi / n)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_rat(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Input(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Laurent polynomial in `t = q^{1/3}` over the rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentScalar {
    coeffs: BTreeMap<i64, BigRational>,
}

impl LaurentScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, rat(1))
    }

    pub fn from_int(n: i64) -> Self {
        Self::monomial(0, rat(n))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::monomial(0, r)
    }

    /// `c * t^e`.
    pub fn monomial(e: i64, c: BigRational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(e, c);
        }
        Self { coeffs }
    }

    /// `t^e`, i.e. `q^{e/3}`.
    pub fn t_pow(e: i64) -> Self {
        Self::monomial(e, rat(1))
    }

    /// `q^e`.
    pub fn q_pow(e: i64) -> Self {
        Self::t_pow(3 * e)
    }

    pub fn delta() -> Self {
        qint(2)
    }

    pub fn alpha() -> Self {
        qint(3)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, e: i64) -> BigRational {
        self.coeffs.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Substitute `t -> 1/t`.
    pub fn conjugate(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, c * r)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Inverse, defined only for monomials.
    pub fn monomial_inverse(&self) -> Option<Self> {
        if self.coeffs.len() != 1 {
            return None;
        }
        let (e, c) = self.coeffs.iter().next()?;
        Some(Self::monomial(-e, c.recip()))
    }

    /// `self / d` when the quotient is again a Laurent polynomial.
    pub fn div_exact(&self, d: &LaurentScalar) -> Option<LaurentScalar> {
        if d.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut quot = LaurentScalar::zero();
        let (&dlo, _) = d.coeffs.iter().next()?;
        let (&dhi, dlead) = d.coeffs.iter().next_back()?;
        while let Some((&rhi, rlead)) = rem.coeffs.iter().next_back() {
            let (&rlo, _) = rem.coeffs.iter().next()?;
            if rhi - rlo < dhi - dlo {
                return None;
            }
            let term = LaurentScalar::monomial(rhi - dhi, rlead / dlead);
            rem = &rem - &(&term * d);
            quot = quot + term;
        }
        Some(quot)
    }

    /// Value under `t -> exp(i pi / 3n)`.
    pub fn eval_complex(&self, n: u32) -> Complex64 {
        let theta = std::f64::consts::PI / (3.0 * n as f64);
        self.coeffs
            .iter()
            .map(|(e, c)| Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), theta * *e as f64))
            .sum()
    }

    fn add_term(&mut self, e: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m: serde_json::Map<String, serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(e, c)| (e.to_string(), serde_json::Value::String(rat_to_string(c))))
            .collect();
        serde_json::json!({ "laurent": m })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let m = v
            .get("laurent")
            .and_then(|m| m.as_object())
            .ok_or_else(|| Error::Input("expected {\"laurent\": {...}}".into()))?;
        let mut out = Self::zero();
        for (e, c) in m {
            let e: i64 = e
                .parse()
                .map_err(|_| Error::Input(format!("bad exponent `{e}`")))?;
            let c = match c {
                serde_json::Value::String(s) => parse_rat(s)?,
                serde_json::Value::Number(n) => rat(n
                    .as_i64()
                    .ok_or_else(|| Error::Input(format!("bad coefficient {n}")))?),
                other => return Err(Error::Input(format!("bad coefficient {other}"))),
            };
            out.add_term(e, c);
        }
        Ok(out)
    }
}

impl fmt::Debug for LaurentScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LaurentScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.coeffs {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let unit = a.is_one();
            if *e == 0 {
                write!(f, "{a}")?;
            } else {
                if !unit {
                    write!(f, "{a}*")?;
                }
                write!(f, "t^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for LaurentScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Self::from_json(&v).map_err(serde::de::Error::custom)
    }
}

impl<'a> Add<&'a LaurentScalar> for &'a LaurentScalar {
    type Output = LaurentScalar;
    fn add(self, rhs: &LaurentScalar) -> LaurentScalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LaurentScalar {
    type Output = LaurentScalar;
    fn add(mut self, rhs: LaurentScalar) -> LaurentScalar {
        self += &rhs;
        self
    }
}

impl AddAssign<&LaurentScalar> for LaurentScalar {
    fn add_assign(&mut self, rhs: &LaurentScalar) {
        for (e, c) in &rhs.coeffs {
            self.add_term(*e, c.clone());
        }
    }
}

impl<'a> Sub<&'a LaurentScalar> for &'a LaurentScalar {
    type Output = LaurentScalar;
    fn sub(self, rhs: &LaurentScalar) -> LaurentScalar {
        let mut out = self.clone();
        for (e, c) in &rhs.coeffs {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Sub for LaurentScalar {
    type Output = LaurentScalar;
    fn sub(self, rhs: LaurentScalar) -> LaurentScalar {
        &self - &rhs
    }
}

impl Neg for &LaurentScalar {
    type Output = LaurentScalar;
    fn neg(self) -> LaurentScalar {
        LaurentScalar {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl Neg for LaurentScalar {
    type Output = LaurentScalar;
    fn neg(self) -> LaurentScalar {
        -&self
    }
}

impl<'a> Mul<&'a LaurentScalar> for &'a LaurentScalar {
    type Output = LaurentScalar;
    fn mul(self, rhs: &LaurentScalar) -> LaurentScalar {
        let mut out = LaurentScalar::zero();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &rhs.coeffs {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Mul for LaurentScalar {
    type Output = LaurentScalar;
    fn mul(self, rhs: LaurentScalar) -> LaurentScalar {
        &self * &rhs
    }
}

/// Quantum integer `[m] = (q^m - q^-m) / (q - q^-1)`.
pub fn qint(m: i64) -> LaurentScalar {
    let sign = if m < 0 { -1 } else { 1 };
    let m = m.abs();
    let mut out = LaurentScalar::zero();
    // [m] = q^{m-1} + q^{m-3} + ... + q^{1-m}
    let mut k = m - 1;
    while k >= 1 - m && m > 0 {
        out.add_term(3 * k, rat(sign));
        k -= 2;
    }
    out
}

/// Formal quotient `num / den` of Laurent scalars, compared by cross-multiplication.
#[derive(Clone, Debug)]
pub struct LaurentFraction {
    pub num: LaurentScalar,
    pub den: LaurentScalar,
}

impl LaurentFraction {
    pub fn new(num: LaurentScalar, den: LaurentScalar) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self { num, den }
    }

    pub fn eval_complex(&self, n: u32) -> Complex64 {
        self.num.eval_complex(n) / self.den.eval_complex(n)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.num * &other.num, &self.den * &other.den)
    }
}

impl PartialEq for LaurentFraction {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl fmt::Display for LaurentFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic field

type Poly = Vec<BigInt>;

fn poly_trim(p: &mut Poly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// Exact division of monic-divisor integer polynomials.
fn poly_div_exact(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut q = vec![BigInt::zero(); r.len().saturating_sub(db)];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &lead;
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    debug_assert!(r.iter().all(|c| c.is_zero()));
    q
}

fn cyclotomic_uncached(n: u32) -> Poly {
    // x^n - 1 = prod_{d | n} Phi_d
    let mut p: Poly = vec![BigInt::zero(); n as usize + 1];
    p[0] = BigInt::from(-1);
    p[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = poly_div_exact(&p, &cyclotomic(d));
        }
    }
    poly_trim(&mut p);
    p
}

/// The `n`-th cyclotomic polynomial, low degree first.
pub fn cyclotomic(n: u32) -> Arc<Poly> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Poly>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let p = Arc::new(cyclotomic_uncached(n));
    cache.lock().unwrap().insert(n, p.clone());
    p
}

/// Element of `Q(zeta_{6n})` in the power basis `1, zeta, ..., zeta^{d-1}`, `d = phi(6n)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloScalar {
    n: u32,
    coeffs: Vec<BigRational>,
}

impl CycloScalar {
    pub fn zero(n: u32) -> Self {
        let d = cyclotomic(6 * n).len() - 1;
        Self { n, coeffs: vec![BigRational::zero(); d] }
    }

    pub fn one(n: u32) -> Self {
        Self::from_rational(n, rat(1))
    }

    pub fn from_rational(n: u32, r: BigRational) -> Self {
        let mut out = Self::zero(n);
        out.coeffs[0] = r;
        out
    }

    /// `zeta^e` for any integer `e`.
    pub fn zeta_pow(n: u32, e: i64) -> Self {
        let m = 6 * n as i64;
        let e = e.rem_euclid(m) as usize;
        let mut p = vec![BigRational::zero(); e + 1];
        p[e] = rat(1);
        Self::reduce(n, p)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    fn reduce(n: u32, mut p: Vec<BigRational>) -> Self {
        let phi = cyclotomic(6 * n);
        let d = phi.len() - 1;
        // phi is monic
        for i in (d..p.len()).rev() {
            let c = std::mem::take(&mut p[i]);
            if c.is_zero() {
                continue;
            }
            for (j, pj) in phi.iter().enumerate().take(d) {
                if !pj.is_zero() {
                    p[i - d + j] -= &c * BigRational::from_integer(pj.clone());
                }
            }
        }
        p.resize(d, BigRational::zero());
        Self { n, coeffs: p }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.n, other.n, "cyclotomic scalars at different roots");
    }

    /// Complex conjugation, `zeta -> zeta^{-1}`.
    pub fn conjugate(&self) -> Self {
        let m = 6 * self.n as usize;
        let mut p = vec![BigRational::zero(); m];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                p[(m - k) % m] += c;
            }
        }
        Self::reduce(self.n, p)
    }

    pub fn to_complex(&self) -> Complex64 {
        let theta = std::f64::consts::PI / (3.0 * self.n as f64);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), theta * k as f64))
            .sum()
    }

    /// Multiplicative inverse by the extended Euclidean algorithm modulo the cyclotomic polynomial.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let phi: Vec<BigRational> = cyclotomic(6 * self.n)
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let mut a = self.coeffs.clone();
        rtrim(&mut a);
        // invariant: r0 = s0 * self (mod phi), r1 = s1 * self (mod phi)
        let (mut r0, mut r1) = (phi, a);
        let (mut s0, mut s1) = (Vec::<BigRational>::new(), vec![rat(1)]);
        while r1.len() != 1 {
            if r1.is_empty() {
                return None;
            }
            let (q, r) = rpoly_divmod(&r0, &r1);
            let s2 = rpoly_sub(&s0, &rpoly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        let c = r1[0].recip();
        let s: Vec<BigRational> = s1.iter().map(|x| x * &c).collect();
        Some(Self::reduce(self.n, s))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "cyclo": {
            "n": self.n,
            "coeffs": self.coeffs.iter().map(rat_to_string).collect::<Vec<_>>(),
        }})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let c = v
            .get("cyclo")
            .ok_or_else(|| Error::Input("expected {\"cyclo\": {...}}".into()))?;
        let n = c
            .get("n")
            .and_then(|n| n.as_u64())
            .ok_or_else(|| Error::Input("cyclo.n missing".into()))? as u32;
        if n < 1 {
            return Err(Error::Input("cyclo.n must be positive".into()));
        }
        let coeffs = c
            .get("coeffs")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::Input("cyclo.coeffs missing".into()))?;
        let p = coeffs
            .iter()
            .map(|x| {
                x.as_str()
                    .ok_or_else(|| Error::Input("coefficient must be a string".into()))
                    .and_then(parse_rat)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::reduce(n, p))
    }
}

fn rtrim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn rpoly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    rtrim(&mut out);
    out
}

fn rpoly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    rtrim(&mut out);
    out
}

fn rpoly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    rtrim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &lead;
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[i + j] -= &c * bj;
            }
        }
        q[i] = c;
    }
    rtrim(&mut r);
    rtrim(&mut q);
    (q, r)
}

impl fmt::Debug for CycloScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycloScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.to_complex();
        write!(f, "{:.12}{:+.12}i [n={}]", z.re, z.im, self.n)
    }
}

impl<'a> Add<&'a CycloScalar> for &'a CycloScalar {
    type Output = CycloScalar;
    fn add(self, rhs: &CycloScalar) -> CycloScalar {
        self.check(rhs);
        CycloScalar {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CycloScalar> for &'a CycloScalar {
    type Output = CycloScalar;
    fn sub(self, rhs: &CycloScalar) -> CycloScalar {
        self.check(rhs);
        CycloScalar {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CycloScalar {
    type Output = CycloScalar;
    fn neg(self) -> CycloScalar {
        CycloScalar {
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| -a.clone()).collect(),
        }
    }
}

impl<'a> Mul<&'a CycloScalar> for &'a CycloScalar {
    type Output = CycloScalar;
    fn mul(self, rhs: &CycloScalar) -> CycloScalar {
        self.check(rhs);
        let mut p = rpoly_mul(&self.coeffs, &rhs.coeffs);
        if p.is_empty() {
            p.push(BigRational::zero());
        }
        CycloScalar::reduce(self.n, p)
    }
}

impl Serialize for CycloScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycloScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Self::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Evaluate at `q = exp(i pi / n)`, sending `t` to `zeta_{6n}`.
pub fn eval_at_root(x: &LaurentScalar, n: u32) -> Result<CycloScalar> {
    if n < 4 {
        return Err(Error::Domain(format!("root order n = {n} is below 4")));
    }
    let m = 6 * n as i64;
    let mut p = vec![BigRational::zero(); m as usize];
    for (e, c) in x.terms() {
        p[e.rem_euclid(m) as usize] += c;
    }
    Ok(CycloScalar::reduce(n, p))
}

pub fn is_zero(x: &CycloScalar) -> bool {
    x.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division() {
        let a = &qint(3) * &qint(2);
        assert_eq!(a.div_exact(&qint(2)), Some(qint(3)));
        assert_eq!(qint(3).div_exact(&qint(2)), None);
    }

    #[test]
    fn qint_small_values() {
        assert!(qint(0).is_zero());
        assert_eq!(qint(1), LaurentScalar::one());
        assert_eq!(qint(3), &(&qint(2) * &qint(2)) - &LaurentScalar::one());
        assert_eq!(qint(-2), -qint(2));
    }

    #[test]
    fn cyclotomic_degrees() {
        assert_eq!(cyclotomic(1).len() - 1, 1);
        assert_eq!(cyclotomic(12).len() - 1, 4);
        assert_eq!(cyclotomic(30).len() - 1, 8);
        // Phi_6 = x^2 - x + 1
        let p6: Vec<i64> = cyclotomic(6).iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(p6, vec![1, -1, 1]);
    }

    #[test]
    fn root_evaluation() {
        let d = eval_at_root(&qint(2), 6).unwrap();
        assert!((d.to_complex() - Complex64::new(3f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!(eval_at_root(&qint(6), 6).unwrap().is_zero());
        assert!(!eval_at_root(&qint(1), 7).unwrap().is_zero());
        assert!(eval_at_root(&qint(2), 3).is_err());
    }

    #[test]
    fn inverse_of_alpha() {
        for n in 4..9 {
            let a = eval_at_root(&qint(3), n).unwrap();
            let inv = a.inverse().unwrap();
            assert_eq!(&a * &inv, CycloScalar::one(n));
        }
    }

    #[test]
    fn json_round_trip() {
        let x = &qint(3) + &LaurentScalar::monomial(-7, BigRational::new(2.into(), 5.into()));
        let v = x.to_json();
        assert_eq!(LaurentScalar::from_json(&v).unwrap(), x);
        let c = eval_at_root(&x, 5).unwrap();
        assert_eq!(CycloScalar::from_json(&c.to_json()).unwrap(), c);
    }
}
