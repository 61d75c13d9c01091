//! Web sums and the planar-algebra operations on them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rewrite::{enumerate_basis, Normalizer};
use crate::scalar::{eval_at_root, qint, CycloScalar, LaurentFraction, LaurentScalar};
use crate::web::{braid_boundary, compose, join_adjacent, star, tensor, CanonicalKey, End, RawEdge, RawEnd, SignString, VertexKind, Web};

/// Formal linear combination of webs.
#[derive(Clone, Debug, Default)]
pub struct WebSum {
    terms: Vec<(LaurentScalar, Web)>,
}

impl WebSum {
    pub fn zero() -> Self {
        WebSum { terms: vec![] }
    }

    pub fn from_web(w: Web) -> Self {
        WebSum { terms: vec![(LaurentScalar::one(), w)] }
    }

    pub fn from_terms(terms: Vec<(LaurentScalar, Web)>) -> Self {
        WebSum { terms }
    }

    pub fn terms(&self) -> &[(LaurentScalar, Web)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(LaurentScalar, Web)> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.is_zero())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common boundary of the terms, if there are any and they agree.
    pub fn boundary(&self) -> Option<(&SignString, usize)> {
        let (_, w0) = self.terms.first()?;
        self.terms
            .iter()
            .all(|(_, w)| w.boundary == w0.boundary && w.top == w0.top)
            .then_some((&w0.boundary, w0.top))
    }

    pub fn push(&mut self, c: LaurentScalar, w: Web) {
        if !c.is_zero() {
            self.terms.push((c, w));
        }
    }

    /// Combine terms with equal keys and drop zeros; sorted by key.
    pub fn merge(self) -> Result<WebSum> {
        let mut acc: BTreeMap<CanonicalKey, (LaurentScalar, Web)> = BTreeMap::new();
        for (c, w) in self.terms {
            let k = w.canonical_key()?;
            match acc.get_mut(&k) {
                Some(e) => e.0 += &c,
                None => {
                    acc.insert(k, (c, w));
                }
            }
        }
        Ok(WebSum { terms: acc.into_values().filter(|(c, _)| !c.is_zero()).collect() })
    }

    /// Coefficients keyed by web, after merging.
    pub fn key_map(&self) -> Result<BTreeMap<CanonicalKey, LaurentScalar>> {
        let mut acc: BTreeMap<CanonicalKey, LaurentScalar> = BTreeMap::new();
        for (c, w) in &self.terms {
            *acc.entry(w.canonical_key()?).or_insert_with(LaurentScalar::zero) += c;
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(acc)
    }

    pub fn scale(&self, c: &LaurentScalar) -> WebSum {
        WebSum { terms: self.terms.iter().map(|(d, w)| (c * d, w.clone())).filter(|(d, _)| !d.is_zero()).collect() }
    }

    pub fn add(&self, other: &WebSum) -> WebSum {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        WebSum { terms }
    }

    pub fn sub(&self, other: &WebSum) -> WebSum {
        self.add(&other.scale(&-LaurentScalar::one()))
    }

    /// Coefficient of the web with key `k` (after merging).
    pub fn coeff_of(&self, k: &CanonicalKey) -> Result<LaurentScalar> {
        let mut c = LaurentScalar::zero();
        for (d, w) in &self.terms {
            if &w.canonical_key()? == k {
                c += d;
            }
        }
        Ok(c)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.terms.iter().map(|(c, w)| json!({"coeff": c.to_json(), "web": w.to_json()})).collect())
    }

    pub fn from_json(v: &Value) -> Result<WebSum> {
        match v {
            Value::Array(items) => {
                let mut terms = Vec::new();
                for it in items {
                    let c = it.get("coeff").ok_or_else(|| Error::Input("web sum term without coeff".into()))?;
                    let w = it.get("web").ok_or_else(|| Error::Input("web sum term without web".into()))?;
                    terms.push((LaurentScalar::from_json(c)?, Web::from_json(w)?));
                }
                Ok(WebSum { terms })
            }
            Value::Object(_) => Ok(WebSum::from_web(Web::from_json(v)?)),
            _ => Err(Error::Input("expected a web or a list of {coeff, web}".into())),
        }
    }
}

/// Equal as linear combinations of isotopy classes. Sums with crossings compare term by term.
impl PartialEq for WebSum {
    fn eq(&self, other: &Self) -> bool {
        match (self.key_map(), other.key_map()) {
            (Ok(a), Ok(b)) => a == b,
            _ => self.terms == other.terms,
        }
    }
}

/// `a` stacked on top of `b`, normalized.
pub fn mult(a: &WebSum, b: &WebSum) -> Result<WebSum> {
    mult_with(&mut Normalizer::new(), a, b)
}

pub fn mult_with(nz: &mut Normalizer, a: &WebSum, b: &WebSum) -> Result<WebSum> {
    let mut out = WebSum::zero();
    for (c, x) in a.terms() {
        for (d, y) in b.terms() {
            out.push(c * d, compose(x, y)?);
        }
    }
    nz.normalize(&expand_crossings(&out)?)
}

/// Product of several factors, left to right.
pub fn mult_all(nz: &mut Normalizer, factors: &[WebSum]) -> Result<WebSum> {
    let mut it = factors.iter();
    let first = it.next().ok_or_else(|| Error::Input("empty product".into()))?;
    let mut acc = nz.normalize(&expand_crossings(first)?)?;
    for f in it {
        acc = mult_with(nz, &acc, f)?;
    }
    Ok(acc)
}

/// Add `m - n` downward strands on the right of an element of `V_n`.
pub fn include(x: &WebSum, m: usize) -> Result<WebSum> {
    let mut out = WebSum::zero();
    for (c, w) in x.terms() {
        if w.top != w.bottom() {
            return Err(Error::Pattern("include needs a square web".into()));
        }
        let n = w.top;
        if m < n {
            return Err(Error::Input(format!("cannot include V_{n} into V_{m}")));
        }
        out.push(c.clone(), tensor(w, &Web::identity_web(m - n)));
    }
    Ok(out)
}

/// Replace the first crossing of `w` by its two smoothings.
fn expand_one(w: &Web, v: usize) -> Result<Vec<(LaurentScalar, Web)>> {
    let inc = w.incidence()?;
    let ins: Vec<bool> = inc.slots[v].iter().map(|&(_, from)| !from).collect();
    let a = (0..4)
        .find(|&a| ins[a] && ins[(a + 1) % 4])
        .ok_or_else(|| Error::invalid("orientation", format!("crossing {v} is not oriented consistently")))?;
    let s = |k: usize| (a + k) % 4;
    let (kinds, mut raw) = w.cut(&[v], &[], &|_, slot| slot);
    let positive = w.vertices[v] == VertexKind::XPos;
    let (cs, ct) = if positive {
        (LaurentScalar::t_pow(2), -LaurentScalar::t_pow(-1))
    } else {
        (LaurentScalar::t_pow(-2), -LaurentScalar::t_pow(1))
    };
    let rebuild = |kinds: Vec<VertexKind>, raw: &[RawEdge], joins: &[(usize, usize)]| -> Result<Web> {
        let (edges, loops) = crate::web::resolve(raw, joins)?;
        Ok(Web { boundary: w.boundary.clone(), top: w.top, vertices: kinds, edges, loops: w.loops + loops })
    };
    let smooth = rebuild(kinds.clone(), &raw, &[(s(1), s(2)), (s(3), s(0))])?;
    // sink on the two incoming legs, source on the two outgoing legs
    let (sink, source) = (kinds.len(), kinds.len() + 1);
    let mut k2 = kinds;
    k2.push(VertexKind::Sink);
    k2.push(VertexKind::Source);
    let slot = |v, s| RawEnd::Real(End::Slot(v, s));
    raw.push(RawEdge { from: RawEnd::Stub(4), to: slot(sink, 0) });
    raw.push(RawEdge { from: RawEnd::Stub(5), to: slot(sink, 1) });
    raw.push(RawEdge { from: slot(source, 0), to: RawEnd::Stub(6) });
    raw.push(RawEdge { from: slot(source, 1), to: RawEnd::Stub(7) });
    raw.push(RawEdge { from: slot(source, 2), to: slot(sink, 2) });
    let fused = rebuild(k2, &raw, &[(s(0), 4), (s(1), 5), (6, s(2)), (7, s(3))])?;
    Ok(vec![(cs, smooth), (ct, fused)])
}

/// Expand every crossing by the braiding relation. The result is crossing-free but not normalized.
pub fn expand_crossings(x: &WebSum) -> Result<WebSum> {
    let mut out = WebSum::zero();
    let mut stack: Vec<(LaurentScalar, Web)> = x.terms().to_vec();
    while let Some((c, w)) = stack.pop() {
        match w.vertices.iter().position(|k| k.is_crossing()) {
            None => out.push(c, w),
            Some(v) => {
                for (d, u) in expand_one(&w, v)? {
                    stack.push((&c * &d, u));
                }
            }
        }
    }
    Ok(out)
}

/// Expand crossings and normalize.
pub fn resolve_sum(x: &WebSum) -> Result<WebSum> {
    crate::rewrite::normalize(&expand_crossings(x)?)
}

fn check_square(w: &Web) -> Result<()> {
    let top = w.top_row();
    let bottom = w.bottom_row();
    if top.len() != bottom.len() || top.iter().zip(&bottom).any(|(a, b)| *a != b.flip()) {
        return Err(Error::Pattern(format!(
            "trace needs a web with bottom row opposite to its top row, got {}/{}",
            SignString(top),
            SignString(bottom)
        )));
    }
    Ok(())
}

fn close_right(w: &Web) -> Result<Web> {
    check_square(w)?;
    let mut w = w.clone();
    while w.nb() > 0 {
        w = join_adjacent(&w, w.top - 1)?;
    }
    Ok(w)
}

fn close_left(w: &Web) -> Result<Web> {
    check_square(w)?;
    let mut w = w.clone();
    while w.nb() > 0 {
        let n = w.nb();
        w = join_adjacent(&w, n - 1)?;
    }
    Ok(w)
}

fn closed_sum(nz: &mut Normalizer, x: &WebSum, close: fn(&Web) -> Result<Web>) -> Result<LaurentScalar> {
    let mut closed = WebSum::zero();
    for (c, w) in x.terms() {
        closed.push(c.clone(), close(w)?);
    }
    let mut total = LaurentScalar::zero();
    for (c, w) in expand_crossings(&closed)?.terms() {
        total += &(c * &nz.evaluate_closed(w)?);
    }
    Ok(total)
}

/// Unnormalized trace `Tr`, closing strings round the right-hand side.
pub fn trace_right(x: &WebSum) -> Result<LaurentScalar> {
    closed_sum(&mut Normalizer::new(), x, close_right)
}

/// Unnormalized trace closing strings round the left-hand side.
pub fn trace_left(x: &WebSum) -> Result<LaurentScalar> {
    closed_sum(&mut Normalizer::new(), x, close_left)
}

pub fn trace_right_with(nz: &mut Normalizer, x: &WebSum) -> Result<LaurentScalar> {
    closed_sum(nz, x, close_right)
}

/// Number of top points of the terms of `x`.
fn width(x: &WebSum) -> Result<usize> {
    match x.boundary() {
        Some((_, top)) => Ok(top),
        None if x.is_empty() => Ok(0),
        None => Err(Error::Pattern("terms have different boundaries".into())),
    }
}

/// `tr = alpha^-m Tr`, so that `tr(1_m) = 1`.
pub fn normalized_trace(x: &WebSum) -> Result<LaurentFraction> {
    let m = width(x)?;
    Ok(LaurentFraction::new(trace_right(x)?, qint(3).pow(m as u32)))
}

/// Reflection with conjugated coefficients.
pub fn star_sum(x: &WebSum) -> WebSum {
    WebSum::from_terms(x.terms().iter().map(|(c, w)| (c.conjugate(), star(w))).collect())
}

/// `<a, b> = tr(b* a)` at `q = exp(i pi / n)`.
pub fn inner_product(a: &WebSum, b: &WebSum, n: u32) -> Result<CycloScalar> {
    inner_product_with(&mut Normalizer::new(), a, b, n)
}

pub fn inner_product_with(nz: &mut Normalizer, a: &WebSum, b: &WebSum, n: u32) -> Result<CycloScalar> {
    if let (Some(ba), Some(bb)) = (a.boundary(), b.boundary()) {
        if ba != bb {
            return Err(Error::Pattern("inner product of elements with different boundaries".into()));
        }
    }
    let m = width(a)?.max(width(b)?);
    let prod = mult_with(nz, &star_sum(b), a)?;
    let tr = trace_right_with(nz, &prod)?;
    let den = eval_at_root(&qint(3).pow(m as u32), n)?
        .inverse()
        .ok_or_else(|| Error::Domain(format!("alpha vanishes at n = {n}")))?;
    Ok(&eval_at_root(&tr, n)? * &den)
}

/// Gram matrix of the non-elliptic basis with boundary `sigma`.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub basis: Vec<Web>,
    pub entries: Vec<Vec<CycloScalar>>,
    pub n: u32,
}

/// Value of the closed web obtained by gluing `a` to the reflection of `b` along all boundary points.
fn pairing(nz: &mut Normalizer, a: &Web, b: &Web) -> Result<LaurentScalar> {
    let a = a.clone().with_top(a.nb());
    let bs = star(&b.clone().with_top(b.nb()));
    nz.evaluate_closed(&compose(&bs, &a)?)
}

/// Entries are `<S, T>` normalized by `alpha^-(|sigma|/2)`, rounded down for odd lengths.
pub fn gram(sigma: &SignString, n: u32) -> Result<GramMatrix> {
    if n < 4 {
        return Err(Error::Domain(format!("root order n = {n} is below 4")));
    }
    let basis = enumerate_basis(sigma)?;
    let scale = eval_at_root(&qint(3).pow((sigma.len() / 2) as u32), n)?
        .inverse()
        .ok_or_else(|| Error::Domain("alpha vanishes".into()))?;
    let k = basis.len();
    let rows: Vec<Vec<LaurentScalar>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut nz = Normalizer::new();
            (0..k).map(|j| pairing(&mut nz, &basis[i], &basis[j])).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let entries = rows
        .iter()
        .map(|r| r.iter().map(|x| Ok(&eval_at_root(x, n)? * &scale)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(GramMatrix { basis, entries, n })
}

impl GramMatrix {
    pub fn is_hermitian(&self) -> bool {
        let k = self.entries.len();
        (0..k).all(|i| (0..k).all(|j| self.entries[i][j] == self.entries[j][i].conjugate()))
    }

    pub fn rank(&self) -> usize {
        rank(self.entries.clone())
    }
}

/// Rank by Bareiss elimination over the cyclotomic field.
pub fn rank(mut m: Vec<Vec<CycloScalar>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let n = m[0].first().map(|x| x.n()).unwrap_or(4);
    let mut prev = CycloScalar::one(n);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let prev_inv = prev.inverse().expect("nonzero pivot");
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &(&m[r][c] * &m[i][j]) - &(&m[i][c] * &m[r][j]);
                m[i][j] = &v * &prev_inv;
            }
            m[i][c] = CycloScalar::zero(n);
        }
        prev = m[r][c].clone();
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Dimension of the quotient by zero-length vectors.
pub fn quotient_dim(sigma: &SignString, n: u32) -> Result<usize> {
    Ok(gram(sigma, n)?.rank())
}

// -- boundary reshuffles between the (i, j) rectangles -------------------------

fn check_ij(x: &WebSum, i: usize, j: usize) -> Result<()> {
    let want = SignString::ij(i, j);
    for (_, w) in x.terms() {
        if w.boundary != want || w.top != i + j {
            return Err(Error::Pattern(format!("element is not in the ({i},{j}) space (boundary {})", w.boundary)));
        }
    }
    Ok(())
}

/// Crossing chirality on the top edge; the bottom edge uses the opposite one and the corner a positive one.
const TOP_POSITIVE: bool = false;

/// Swaps for `phi`: the alternating block absorbs the corner, listing positions `(j+2k-1, j+2k)`.
fn phi_swaps(i_src: usize, j_tgt: usize, top: usize) -> Vec<(usize, bool)> {
    (1..=i_src)
        .map(|k| {
            let p = j_tgt + 2 * k - 1;
            let sign = if p + 1 == top {
                true
            } else if p + 1 < top {
                TOP_POSITIVE
            } else {
                !TOP_POSITIVE
            };
            (p, sign)
        })
        .collect()
}

/// Swaps for `omega`: the last through string passes to the right of the alternating strings,
/// keeping to one side of the diagram.
fn omega_swaps(i: usize, j: usize) -> Vec<(usize, bool)> {
    let mut signs = SignString::ij(i, j).0;
    let top = i + j;
    let positions = (j - 1..j + i - 1).chain((j + i..j + 2 * i).rev());
    positions
        .map(|p| {
            let same = signs[p] == signs[p + 1];
            signs.swap(p, p + 1);
            (p, if p + 1 < top { same } else { !same })
        })
        .collect()
}

fn reshuffle(x: &WebSum, mut swaps: Vec<(usize, bool)>, forward: bool) -> Result<WebSum> {
    if !forward {
        swaps.reverse();
        for s in &mut swaps {
            s.1 = !s.1;
        }
    }
    let mut out = WebSum::zero();
    for (c, w) in x.terms() {
        let mut w = w.clone();
        for &(p, positive) in &swaps {
            w = braid_boundary(&w, p, positive)?;
        }
        out.push(c.clone(), w);
    }
    resolve_sum(&out)
}

/// Map from the `(2l+1, j)` space to the `(2l+2, j-1)` space.
pub fn phi_map(x: &WebSum, i: usize, j: usize) -> Result<WebSum> {
    if i.is_multiple_of(2) || j == 0 {
        return Err(Error::Pattern(format!("phi needs odd i and j >= 1, got ({i},{j})")));
    }
    check_ij(x, i, j)?;
    reshuffle(x, phi_swaps(i, j - 1, i + j), true)
}

/// Map from the `(2l, j)` space to the `(2l+1, j-1)` space.
pub fn omega_map(x: &WebSum, i: usize, j: usize) -> Result<WebSum> {
    if i % 2 == 1 || j == 0 {
        return Err(Error::Pattern(format!("omega needs even i and j >= 1, got ({i},{j})")));
    }
    check_ij(x, i, j)?;
    reshuffle(x, omega_swaps(i, j), true)
}

/// Inverse of `phi_map`, from the `(2l+2, j)` space.
pub fn phi_inverse(x: &WebSum, i: usize, j: usize) -> Result<WebSum> {
    if i % 2 == 1 || i == 0 {
        return Err(Error::Pattern(format!("phi inverse needs even i >= 2, got ({i},{j})")));
    }
    check_ij(x, i, j)?;
    reshuffle(x, phi_swaps(i - 1, j, i + j), false)
}

/// Inverse of `omega_map`, from the `(2l+1, j)` space.
pub fn omega_inverse(x: &WebSum, i: usize, j: usize) -> Result<WebSum> {
    if i.is_multiple_of(2) {
        return Err(Error::Pattern(format!("omega inverse needs odd i, got ({i},{j})")));
    }
    check_ij(x, i, j)?;
    reshuffle(x, omega_swaps(i - 1, j + 1), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(m: usize, i: usize) -> WebSum {
        WebSum::from_web(Web::w_web(m, i).unwrap())
    }

    #[test]
    fn w_squared() {
        let x = mult(&w(3, 1), &w(3, 1)).unwrap();
        assert_eq!(x, w(3, 1).scale(&qint(2)).merge().unwrap());
    }

    #[test]
    fn trace_values() {
        assert_eq!(trace_right(&WebSum::from_web(Web::identity_web(3))).unwrap(), qint(3).pow(3));
        let t = normalized_trace(&w(3, 2)).unwrap();
        assert_eq!(t, LaurentFraction::new(qint(2), qint(3)));
    }

    #[test]
    fn positive_kink() {
        let x = Web::crossing(true);
        let kink = join_adjacent(&x, 1).unwrap();
        let r = resolve_sum(&WebSum::from_web(kink)).unwrap();
        assert_eq!(r, WebSum::from_web(Web::identity_web(1)).scale(&LaurentScalar::t_pow(8)).merge().unwrap());
    }
}
