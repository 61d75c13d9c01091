//! Generators of the web algebras and words in them.
//!
//! In `V_m` the letters are `w_i` and `f_i = w_i w_{i+1} w_i - w_i`. In the
//! rectangle spaces `P_{i,j}` (with `j` through strings on the left and `i`
//! alternating strings on the right) they are `W_{-k}`, the cup-caps `f_l` on the
//! alternating strings and the hexagon `f_l^(3)`.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::algebra::{mult_with, WebSum};
use crate::error::{Error, Result};
use crate::rewrite::{enumerate_basis, Normalizer};
use crate::scalar::LaurentScalar;
use crate::web::{compose, tensor, CanonicalKey, Edge, End, Sign, SignString, VertexKind, Web};

/// The algebra a word lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// `V_m`: `m` downward strings.
    V(usize),
    /// `P_{i,j}`.
    Ptl(usize, usize),
}

impl Space {
    pub fn top_row(&self) -> Vec<Sign> {
        match *self {
            Space::V(m) => vec![Sign::Minus; m],
            Space::Ptl(i, j) => SignString::ij(i, j).0[..i + j].to_vec(),
        }
    }

    pub fn boundary(&self) -> SignString {
        match *self {
            Space::V(m) => SignString::tl(m),
            Space::Ptl(i, j) => SignString::ij(i, j),
        }
    }

    pub fn width(&self) -> usize {
        self.top_row().len()
    }

    pub fn identity(&self) -> Web {
        Web::identity_on(&self.top_row())
    }

    /// Letters generating the algebra, without the unit.
    pub fn generators(&self) -> Vec<Letter> {
        match *self {
            Space::V(m) => (1..m).map(Letter::W).collect(),
            Space::Ptl(i, j) => {
                // W_0 needs an alternating string to its right
                let mut g: Vec<Letter> = (usize::from(i == 0)..j).map(Letter::W).collect();
                g.extend((1..i).map(Letter::F));
                g
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    One,
    /// `w_i` in `V_m`, `W_{-k}` in `P_{i,j}`.
    W(usize),
    F(usize),
    F3(usize),
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::One => write!(f, "1"),
            Letter::W(k) => write!(f, "w{k}"),
            Letter::F(k) => write!(f, "f{k}"),
            Letter::F3(k) => write!(f, "g{k}"),
        }
    }
}

impl std::str::FromStr for Letter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Letter> {
        let bad = || Error::Input(format!("bad letter `{s}`"));
        if s == "1" {
            return Ok(Letter::One);
        }
        let (head, idx) = s.split_at(1.min(s.len()));
        let k: usize = idx.parse().map_err(|_| bad())?;
        match head {
            "w" => Ok(Letter::W(k)),
            "f" => Ok(Letter::F(k)),
            "g" => Ok(Letter::F3(k)),
            _ => Err(bad()),
        }
    }
}

/// Identity strings around a piece inserted at columns `c..` (0-based).
fn insert_piece(top: &[Sign], c: usize, width: usize, piece: &Web) -> Web {
    tensor(&tensor(&Web::identity_on(&top[..c]), piece), &Web::identity_on(&top[c + width..]))
}

/// Cup above a cap on two adjacent strings with the given top signs.
pub fn cupcap_piece(top: [Sign; 2]) -> Web {
    debug_assert_eq!(top[0], top[1].flip());
    compose(&Web::cup_piece(top[0]), &Web::cap_piece(top[0].flip())).expect("arcs stack")
}

/// Hexagon with one leg to each of six alternating boundary points, three on top.
pub fn hexagon_piece(top: [Sign; 3]) -> Web {
    let mut boundary = top.to_vec();
    boundary.extend(top.iter().rev().map(|s| s.flip()));
    let kinds: Vec<VertexKind> = boundary
        .iter()
        .map(|s| if *s == Sign::Minus { VertexKind::Sink } else { VertexKind::Source })
        .collect();
    let mut edges = Vec::new();
    for k in 0..6 {
        let (b, v) = (End::Boundary(k), End::Slot(k, 0));
        edges.push(if boundary[k] == Sign::Minus { Edge { from: b, to: v } } else { Edge { from: v, to: b } });
        let next = (k + 1) % 6;
        let (a, c) = (End::Slot(k, 1), End::Slot(next, 2));
        edges.push(if kinds[k] == VertexKind::Source { Edge { from: a, to: c } } else { Edge { from: c, to: a } });
    }
    Web { boundary: SignString(boundary), top: 3, vertices: kinds, edges, loops: 0 }
}

/// Web of a single letter.
pub fn letter_web(space: Space, letter: Letter) -> Result<Web> {
    let top = space.top_row();
    let n = top.len();
    let range = |what: &str| Error::Index(format!("{what} out of range in {space:?}"));
    match (space, letter) {
        (_, Letter::One) => Ok(space.identity()),
        (Space::V(m), Letter::W(i)) => Web::w_web(m, i),
        (Space::V(m), Letter::F(i)) => Web::f_web(m, i),
        (Space::Ptl(i, j), Letter::W(k)) => {
            // columns j-k, j-k+1 (1-based)
            if k >= j || (i == 0 && k == 0) {
                return Err(range(&format!("W_-{k}")));
            }
            Ok(insert_piece(&top, j - k - 1, 2, &Web::w_piece()))
        }
        (Space::Ptl(i, j), Letter::F(l)) => {
            if l == 0 || l + 1 > i {
                return Err(range(&format!("f_{l}")));
            }
            let c = j + l - 1;
            Ok(insert_piece(&top, c, 2, &cupcap_piece([top[c], top[c + 1]])))
        }
        (Space::Ptl(i, j), Letter::F3(l)) => {
            if l == 0 || l + 2 > i {
                return Err(range(&format!("f_{l}^(3)")));
            }
            let c = j + l - 1;
            Ok(insert_piece(&top, c, 3, &hexagon_piece([top[c], top[c + 1], top[c + 2]])))
        }
        (Space::V(_), Letter::F3(_)) => Err(Error::Input("hexagon letters need alternating strings".into())),
    }
    .and_then(|w| {
        if w.nb() != 2 * n {
            Err(Error::Pattern("letter web has the wrong width".into()))
        } else {
            Ok(w)
        }
    })
}

/// Linear combination of words in the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorWord {
    pub space: Space,
    pub terms: Vec<(LaurentScalar, Vec<Letter>)>,
}

impl GeneratorWord {
    pub fn new(space: Space) -> Self {
        GeneratorWord { space, terms: vec![] }
    }

    pub fn word(space: Space, letters: &[Letter]) -> Self {
        GeneratorWord { space, terms: vec![(LaurentScalar::one(), letters.to_vec())] }
    }

    pub fn plus(mut self, c: LaurentScalar, letters: &[Letter]) -> Self {
        self.terms.push((c, letters.to_vec()));
        self
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(c, w)| json!({"coeff": c.to_json(), "letters": w.iter().map(|l| l.to_string()).collect::<Vec<_>>()}))
                .collect(),
        )
    }
}

impl fmt::Display for GeneratorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, w)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for l in w {
                write!(f, " {l}")?;
            }
        }
        Ok(())
    }
}

pub fn evaluate(word: &GeneratorWord) -> Result<WebSum> {
    evaluate_with(&mut Normalizer::new(), word)
}

pub fn evaluate_with(nz: &mut Normalizer, word: &GeneratorWord) -> Result<WebSum> {
    let mut out = WebSum::zero();
    for (c, letters) in &word.terms {
        let mut acc = WebSum::from_web(word.space.identity());
        for l in letters {
            acc = mult_with(nz, &acc, &WebSum::from_web(letter_web(word.space, *l)?))?;
        }
        out = out.add(&acc.scale(c));
    }
    nz.normalize(&out)
}

/// Coordinates of a normalized sum in a keyed basis.
fn coords(x: &WebSum, index: &BTreeMap<CanonicalKey, usize>) -> Result<Vec<LaurentScalar>> {
    let mut v = vec![LaurentScalar::zero(); index.len()];
    for (k, c) in x.key_map()? {
        let i = *index.get(&k).ok_or_else(|| Error::Solver(format!("web {k} is not a basis web")))?;
        v[i] = c;
    }
    Ok(v)
}

/// Row echelon state for incremental rank over the Laurent ring.
struct Echelon {
    rows: Vec<(usize, Vec<LaurentScalar>)>,
}

impl Echelon {
    /// Reduce `v` against the stored rows; stores it and returns true if independent.
    fn insert(&mut self, mut v: Vec<LaurentScalar>) -> bool {
        for (p, r) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let (a, b) = (r[*p].clone(), v[*p].clone());
            for k in 0..v.len() {
                v[k] = &(&a * &v[k]) - &(&b * &r[k]);
            }
            primitive(&mut v);
        }
        match v.iter().position(|c| !c.is_zero()) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

/// Divide out a common monomial content to keep entries small.
fn primitive(v: &mut [LaurentScalar]) {
    let Some(first) = v.iter().find(|c| !c.is_zero()) else { return };
    let g = first.clone();
    if v.iter().all(|c| c.is_zero() || c.div_exact(&g).is_some()) && g.terms().count() > 0 {
        for c in v.iter_mut() {
            if !c.is_zero() {
                *c = c.div_exact(&g).expect("checked");
            }
        }
    }
}

/// Solve `a c = b` exactly, with `a` square and invertible (columns are the unknowns).
pub fn solve_laurent(a: &[Vec<LaurentScalar>], b: &[LaurentScalar]) -> Result<Vec<LaurentScalar>> {
    let n = a.len();
    let mut m: Vec<Vec<LaurentScalar>> = (0..n)
        .map(|i| {
            let mut r = a[i].clone();
            r.push(b[i].clone());
            r
        })
        .collect();
    let mut prev = LaurentScalar::one();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero()).ok_or_else(|| Error::Solver("singular system".into()))?;
        m.swap(c, p);
        for i in c + 1..n {
            for j in c + 1..=n {
                let v = &(&m[c][c] * &m[i][j]) - &(&m[i][c] * &m[c][j]);
                m[i][j] = v.div_exact(&prev).ok_or_else(|| Error::Solver("inexact elimination step".into()))?;
            }
            m[i][c] = LaurentScalar::zero();
        }
        prev = m[c][c].clone();
    }
    let mut x = vec![LaurentScalar::zero(); n];
    for i in (0..n).rev() {
        let mut r = m[i][n].clone();
        for j in i + 1..n {
            r = &r - &(&m[i][j] * &x[j]);
        }
        x[i] = r
            .div_exact(&m[i][i])
            .ok_or_else(|| Error::Solver("solution has coefficients outside the Laurent ring".into()))?;
    }
    Ok(x)
}

/// Words spanning `space`, found breadth first by right multiplication, with their evaluations.
pub fn spanning_words(nz: &mut Normalizer, space: Space, letters: &[Letter]) -> Result<(Vec<Web>, Vec<(Vec<Letter>, WebSum)>)> {
    let basis: Vec<Web> = enumerate_basis(&space.boundary())?.into_iter().map(|w| w.with_top(space.width())).collect();
    let index: BTreeMap<CanonicalKey, usize> =
        basis.iter().enumerate().map(|(i, w)| (w.canonical_key().expect("basis key"), i)).collect();
    let mut ech = Echelon { rows: vec![] };
    let mut kept: Vec<(Vec<Letter>, WebSum)> = Vec::new();
    let one = nz.normalize(&WebSum::from_web(space.identity()))?;
    ech.insert(coords(&one, &index)?);
    kept.push((vec![], one));
    let mut frontier = vec![0usize];
    while !frontier.is_empty() && kept.len() < basis.len() {
        let mut next = Vec::new();
        for &f in &frontier {
            for l in letters {
                let (word, val) = kept[f].clone();
                let prod = mult_with(nz, &val, &WebSum::from_web(letter_web(space, *l)?))?;
                if ech.insert(coords(&prod, &index)?) {
                    let mut w = word;
                    w.push(*l);
                    kept.push((w, prod));
                    next.push(kept.len() - 1);
                    if kept.len() == basis.len() {
                        break;
                    }
                }
            }
        }
        frontier = next;
    }
    Ok((basis, kept))
}

/// Express `x` as a combination of words in the generators of `space`.
pub fn decompose(x: &WebSum, space: Space) -> Result<GeneratorWord> {
    decompose_over(x, space, &space.generators())
}

/// Express `x` using words in the given letters.
pub fn decompose_over(x: &WebSum, space: Space, letters: &[Letter]) -> Result<GeneratorWord> {
    let mut nz = Normalizer::new();
    let x = nz.normalize(&crate::algebra::expand_crossings(x)?)?;
    let (basis, words) = spanning_words(&mut nz, space, letters)?;
    if words.len() < basis.len() {
        return Err(Error::Solver(format!(
            "the letters span only {} of {} dimensions",
            words.len(),
            basis.len()
        )));
    }
    let index: BTreeMap<CanonicalKey, usize> =
        basis.iter().enumerate().map(|(i, w)| (w.canonical_key().expect("basis key"), i)).collect();
    let cols: Vec<Vec<LaurentScalar>> = words.iter().map(|(_, v)| coords(v, &index)).collect::<Result<_>>()?;
    let n = basis.len();
    let a: Vec<Vec<LaurentScalar>> = (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
    let b = coords(&x, &index)?;
    let c = solve_laurent(&a, &b)?;
    let mut out = GeneratorWord::new(space);
    for (coef, (word, _)) in c.into_iter().zip(words) {
        if !coef.is_zero() {
            let letters = if word.is_empty() { vec![Letter::One] } else { word };
            out.terms.push((coef, letters));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::qint;

    #[test]
    fn letters_validate() {
        for space in [Space::V(4), Space::Ptl(3, 0), Space::Ptl(2, 1), Space::Ptl(1, 2), Space::Ptl(3, 1)] {
            for l in space.generators() {
                letter_web(space, l).unwrap().validate().unwrap();
            }
        }
        letter_web(Space::Ptl(3, 0), Letter::F3(1)).unwrap().validate().unwrap();
    }

    #[test]
    fn f_is_www_minus_w() {
        let s = Space::V(3);
        let lhs = evaluate(&GeneratorWord::word(s, &[Letter::F(1)])).unwrap();
        let rhs = evaluate(
            &GeneratorWord::word(s, &[Letter::W(1), Letter::W(2), Letter::W(1)]).plus(-LaurentScalar::one(), &[Letter::W(1)]),
        )
        .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cupcap_squares_to_alpha() {
        let s = Space::Ptl(2, 0);
        let f = evaluate(&GeneratorWord::word(s, &[Letter::F(1)])).unwrap();
        let ff = evaluate(&GeneratorWord::word(s, &[Letter::F(1), Letter::F(1)])).unwrap();
        assert_eq!(ff, f.scale(&qint(3)));
    }
}
