//! Reduction to the non-elliptic basis.
//!
//! Closed loops evaluate to `alpha = [3]`, digons to `delta = [2]` times a strand,
//! and a square to the sum of its two planar reconnections.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::WebSum;
use crate::error::{Error, Result};
use crate::scalar::{qint, LaurentScalar};
use crate::web::{CanonicalKey, Edge, End, Incidence, Sign, SignString, VertexKind, Web};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RedexKind {
    Loop,
    Digon,
    Square,
}

/// An elliptic site. Vertices are listed in order around the face; empty for a loop.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Redex {
    pub kind: RedexKind,
    pub vertices: Vec<usize>,
}

/// Vertex of `face` that is not a trivalent vertex, if any; otherwise the vertex list.
fn face_vertices(w: &Web, map: &crate::web::DartMap, face: &[usize]) -> Option<Vec<usize>> {
    let nb = w.nb();
    let mut vs = Vec::with_capacity(face.len());
    for &d in face {
        if map.is_arc(d) {
            return None;
        }
        let node = map.node[d];
        if node < nb || w.vertices[node - nb].is_crossing() {
            return None;
        }
        vs.push(node - nb);
    }
    let distinct: BTreeSet<_> = vs.iter().collect();
    (distinct.len() == vs.len()).then_some(vs)
}

fn all_sites(w: &Web, inc: &Incidence) -> Vec<Redex> {
    sites_with_faces(w, inc).into_iter().map(|(r, _)| r).collect()
}

/// Elliptic sites with the edges of their face.
fn sites_with_faces(w: &Web, inc: &Incidence) -> Vec<(Redex, Vec<usize>)> {
    let mut out = Vec::new();
    if w.loops > 0 {
        out.push((Redex { kind: RedexKind::Loop, vertices: vec![] }, vec![]));
    }
    let map = w.dart_map(inc);
    for face in map.faces() {
        let kind = match face.len() {
            2 => RedexKind::Digon,
            4 => RedexKind::Square,
            _ => continue,
        };
        if let Some(vs) = face_vertices(w, &map, &face) {
            out.push((Redex { kind, vertices: vs }, face.iter().map(|d| d / 2).collect()));
        }
    }
    out
}

fn canonical_site(r: &Redex) -> (RedexKind, Vec<usize>) {
    let mut v = r.vertices.clone();
    v.sort_unstable();
    (r.kind, v)
}

fn require_planar(w: &Web) -> Result<Incidence> {
    if w.has_crossings() {
        return Err(Error::Domain("rewriting requires a crossing-free web".into()));
    }
    w.incidence()
}

/// Every elliptic site of `w`.
pub fn find_all_redexes(w: &Web) -> Result<Vec<Redex>> {
    let inc = require_planar(w)?;
    let mut sites = all_sites(w, &inc);
    sites.sort_by_key(canonical_site);
    Ok(sites)
}

/// Lowest elliptic site, or `None` when `w` is a basis web.
pub fn find_redex(w: &Web) -> Result<Option<Redex>> {
    Ok(find_all_redexes(w)?.into_iter().next())
}

pub fn is_non_elliptic(w: &Web) -> Result<bool> {
    Ok(find_redex(w)?.is_none())
}

/// Rewrite one elliptic site.
pub fn apply(w: &Web, r: &Redex) -> Result<Vec<(LaurentScalar, Web)>> {
    let inc = require_planar(w)?;
    let bad_site = || Error::Input(format!("{r:?} is not a redex of this web"));
    if r.kind == RedexKind::Loop {
        if w.loops == 0 {
            return Err(bad_site());
        }
        let mut out = w.clone();
        out.loops -= 1;
        return Ok(vec![(qint(3), out)]);
    }
    let want = canonical_site(r);
    let (found, inner) = sites_with_faces(w, &inc)
        .into_iter()
        .find(|(s, _)| canonical_site(s) == want)
        .ok_or_else(bad_site)?;
    // face order, so that consecutive entries are joined by a side
    let site = &found.vertices;
    let stub = |v: usize, _s: usize| -> usize { site.iter().position(|x| *x == v).expect("site vertex") };
    let (kinds, raw) = w.cut(site, &inner, &stub);
    let pairings: Vec<(LaurentScalar, Vec<(usize, usize)>)> = match r.kind {
        RedexKind::Digon => vec![(qint(2), vec![(0, 1)])],
        RedexKind::Square => vec![
            (LaurentScalar::one(), vec![(0, 1), (2, 3)]),
            (LaurentScalar::one(), vec![(1, 2), (3, 0)]),
        ],
        RedexKind::Loop => unreachable!(),
    };
    let mut out = Vec::new();
    for (c, joins) in pairings {
        let (edges, loops) = crate::web::resolve(&raw, &joins)?;
        out.push((
            c,
            Web { boundary: w.boundary.clone(), top: w.top, vertices: kinds.clone(), edges, loops: w.loops + loops },
        ));
    }
    Ok(out)
}

/// Removes closed components, returning their vertex-set webs.
fn split_closed(w: &Web) -> Result<(Web, Vec<Web>)> {
    let inc = w.incidence()?;
    let (_, closed) = w.components(&inc);
    if closed.is_empty() {
        return Ok((w.clone(), vec![]));
    }
    let pieces: Vec<Web> = closed.iter().map(|m| w.extract_closed(&inc, m)).collect();
    let removed: Vec<usize> = closed.concat();
    let dropped: Vec<usize> = w
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e.from, End::Slot(v, _) if removed.contains(&v)))
        .map(|(i, _)| i)
        .collect();
    let (kinds, raw) = w.cut(&removed, &dropped, &|_, _| unreachable!());
    let (edges, loops) = crate::web::resolve(&raw, &[])?;
    Ok((Web { boundary: w.boundary.clone(), top: w.top, vertices: kinds, edges, loops: w.loops + loops }, pieces))
}

/// Normalizer with memoized results for open webs and closed components.
pub struct Normalizer {
    alpha: LaurentScalar,
    open: HashMap<CanonicalKey, Vec<(LaurentScalar, Web)>>,
    closed: HashMap<CanonicalKey, LaurentScalar>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer { alpha: qint(3), open: HashMap::new(), closed: HashMap::new() }
    }
}

impl Normalizer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loop value must satisfy `alpha = delta^2 - 1`; the degenerate value 0 is rejected.
    pub fn with_loop_value(alpha: LaurentScalar) -> Result<Self> {
        if alpha.is_zero() {
            return Err(Error::Domain("loop value alpha = 0 is not supported".into()));
        }
        if alpha != qint(3) {
            return Err(Error::Domain(format!("loop value must be delta^2 - 1, got {alpha}")));
        }
        Ok(Self::default())
    }

    /// Value of a closed web.
    pub fn evaluate_closed(&mut self, w: &Web) -> Result<LaurentScalar> {
        if w.nb() != 0 {
            return Err(Error::Input("evaluate_closed needs an empty boundary".into()));
        }
        Ok(self.reduce(w)?.into_iter().fold(LaurentScalar::zero(), |acc, (c, _)| acc + c))
    }

    /// Normalized terms of a single web, unmerged only across distinct keys.
    pub fn reduce(&mut self, w: &Web) -> Result<Vec<(LaurentScalar, Web)>> {
        if w.has_crossings() {
            return Err(Error::Domain("normalize requires crossing-free webs".into()));
        }
        let mut scale = self.alpha.pow(w.loops as u32);
        let mut w = w.clone();
        w.loops = 0;
        let (open, pieces) = split_closed(&w)?;
        for p in pieces {
            scale = &scale * &self.closed_value(&p)?;
        }
        if scale.is_zero() {
            return Ok(vec![]);
        }
        let terms = self.reduce_open(&open)?;
        Ok(terms.into_iter().map(|(c, t)| (&c * &scale, t)).collect())
    }

    fn closed_value(&mut self, p: &Web) -> Result<LaurentScalar> {
        let key = p.canonical_key()?;
        if let Some(v) = self.closed.get(&key) {
            return Ok(v.clone());
        }
        let r = find_redex(p)?.ok_or_else(|| Error::Input("closed web without an elliptic face".into()))?;
        let mut total = LaurentScalar::zero();
        for (c, t) in apply(p, &r)? {
            let sub = self.reduce(&t)?;
            for (d, _) in sub {
                total = total + &c * &d;
            }
        }
        self.closed.insert(key, total.clone());
        Ok(total)
    }

    /// `w` has no loops and no closed components.
    fn reduce_open(&mut self, w: &Web) -> Result<Vec<(LaurentScalar, Web)>> {
        let key = w.canonical_key()?;
        if let Some(v) = self.open.get(&key) {
            return Ok(v.clone());
        }
        let out = match find_redex(w)? {
            None => vec![(LaurentScalar::one(), w.clone())],
            Some(r) => {
                let mut acc: BTreeMap<CanonicalKey, (LaurentScalar, Web)> = BTreeMap::new();
                for (c, t) in apply(w, &r)? {
                    for (d, u) in self.reduce(&t)? {
                        let k = u.canonical_key()?;
                        let coeff = &c * &d;
                        match acc.get_mut(&k) {
                            Some(entry) => entry.0 += &coeff,
                            None => {
                                acc.insert(k, (coeff, u));
                            }
                        }
                    }
                }
                acc.into_values().filter(|(c, _)| !c.is_zero()).collect()
            }
        };
        self.open.insert(key, out.clone());
        Ok(out)
    }

    pub fn normalize(&mut self, x: &WebSum) -> Result<WebSum> {
        let mut out = WebSum::zero();
        for (c, w) in x.terms() {
            for (d, u) in self.reduce(w)? {
                out.push(c * &d, u);
            }
        }
        out.merge()
    }
}

/// Normalize with a fresh memo.
pub fn normalize(x: &WebSum) -> Result<WebSum> {
    Normalizer::new().normalize(x)
}

pub fn normalize_web(w: &Web) -> Result<WebSum> {
    normalize(&WebSum::from_web(w.clone()))
}

/// Normalize choosing redexes uniformly at random and without memoization.
pub fn normalize_random<R: Rng>(x: &WebSum, rng: &mut R) -> Result<WebSum> {
    let mut out = WebSum::zero();
    let mut stack: Vec<(LaurentScalar, Web)> = x.terms().to_vec();
    while let Some((c, w)) = stack.pop() {
        let sites = find_all_redexes(&w)?;
        match sites.choose(rng) {
            None => out.push(c, w),
            Some(r) => {
                for (d, u) in apply(&w, r)? {
                    stack.push((&c * &d, u));
                }
            }
        }
    }
    out.merge()
}

/// Default bound on the number of webs held in one enumeration layer.
pub const DEFAULT_FRONTIER_CAP: usize = 250_000;

#[derive(Clone, Copy, Debug)]
enum Growth {
    Arc(usize, Sign),
    Y(usize, Sign),
    H(usize, Sign),
}

/// Smaller boundaries from which `sigma` grows by one arc, Y or H at positions `k, k+1`.
fn predecessors(sigma: &[Sign]) -> Vec<(Growth, Vec<Sign>)> {
    let mut out = Vec::new();
    for k in 0..sigma.len().saturating_sub(1) {
        let (a, b) = (sigma[k], sigma[k + 1]);
        if a != b {
            let mut s = sigma[..k].to_vec();
            s.extend_from_slice(&sigma[k + 2..]);
            out.push((Growth::Arc(k, a), s));
            let mut s = sigma.to_vec();
            s[k] = a.flip();
            s[k + 1] = b.flip();
            out.push((Growth::H(k, a), s));
        } else {
            let mut s = sigma[..k].to_vec();
            s.push(a.flip());
            s.extend_from_slice(&sigma[k + 2..]);
            out.push((Growth::Y(k, a), s));
        }
    }
    out
}

fn oriented(a: End, a_is_tail: bool, b: End) -> Edge {
    if a_is_tail {
        Edge { from: a, to: b }
    } else {
        Edge { from: b, to: a }
    }
}

fn grow(w: &Web, g: Growth) -> Web {
    let nb = w.nb();
    let mut boundary = w.boundary.0.clone();
    let mut vertices = w.vertices.clone();
    let nv = vertices.len();
    let (remap, new_edges): (Box<dyn Fn(usize) -> End>, Vec<Edge>) = match g {
        Growth::Arc(k, s) => {
            boundary.splice(k..k, [s, s.flip()]);
            let e = oriented(End::Boundary(k), s == Sign::Minus, End::Boundary(k + 1));
            (Box::new(move |b| End::Boundary(if b < k { b } else { b + 2 })), vec![e])
        }
        Growth::Y(k, s) => {
            boundary.splice(k..k + 1, [s, s]);
            let kind = if s == Sign::Minus { VertexKind::Sink } else { VertexKind::Source };
            vertices.push(kind);
            let tail = s == Sign::Minus;
            let edges = vec![
                oriented(End::Boundary(k), tail, End::Slot(nv, 1)),
                oriented(End::Boundary(k + 1), tail, End::Slot(nv, 2)),
            ];
            (
                Box::new(move |b| {
                    if b < k {
                        End::Boundary(b)
                    } else if b == k {
                        End::Slot(nv, 0)
                    } else {
                        End::Boundary(b + 1)
                    }
                }),
                edges,
            )
        }
        Growth::H(k, s) => {
            boundary[k] = s;
            boundary[k + 1] = s.flip();
            let (ku, kv) = if s == Sign::Minus {
                (VertexKind::Sink, VertexKind::Source)
            } else {
                (VertexKind::Source, VertexKind::Sink)
            };
            vertices.push(ku);
            vertices.push(kv);
            let (u, v) = (nv, nv + 1);
            let tail = s == Sign::Minus;
            let edges = vec![
                oriented(End::Boundary(k), tail, End::Slot(u, 1)),
                // sink u receives from source v, or source u feeds sink v
                oriented(End::Slot(v, 1), tail, End::Slot(u, 2)),
                oriented(End::Boundary(k + 1), !tail, End::Slot(v, 2)),
            ];
            (
                Box::new(move |b| {
                    if b == k {
                        End::Slot(u, 0)
                    } else if b == k + 1 {
                        End::Slot(v, 0)
                    } else {
                        End::Boundary(b)
                    }
                }),
                edges,
            )
        }
    };
    let map = |e: End| match e {
        End::Boundary(b) => remap(b),
        s => s,
    };
    let mut edges: Vec<Edge> = w.edges.iter().map(|e| Edge { from: map(e.from), to: map(e.to) }).collect();
    edges.extend(new_edges);
    let _ = nb;
    let n = boundary.len();
    Web { boundary: SignString(boundary), top: n, vertices, edges, loops: 0 }
}

/// All non-elliptic webs with boundary `sigma`, read with every point on the top edge.
pub fn enumerate_basis(sigma: &SignString) -> Result<Vec<Web>> {
    enumerate_basis_capped(sigma, DEFAULT_FRONTIER_CAP)
}

pub fn enumerate_basis_capped(sigma: &SignString, cap: usize) -> Result<Vec<Web>> {
    if !sigma.is_closable() {
        return Ok(vec![]);
    }
    // closure of boundaries that can appear
    let mut closure: BTreeSet<Vec<Sign>> = BTreeSet::new();
    let mut todo = vec![sigma.0.clone()];
    while let Some(s) = todo.pop() {
        if !closure.insert(s.clone()) {
            continue;
        }
        for (_, p) in predecessors(&s) {
            if !closure.contains(&p) {
                todo.push(p);
            }
        }
    }
    // order by length so arc predecessors within a layer are ready first
    let mut order: Vec<Vec<Sign>> = closure.into_iter().collect();
    order.sort_by_key(|s| s.len());
    let preds: HashMap<Vec<Sign>, Vec<(Growth, Vec<Sign>)>> =
        order.iter().map(|s| (s.clone(), predecessors(s))).collect();

    // layers[v][sigma] = basis webs with v trivalent vertices
    let mut layers: Vec<HashMap<Vec<Sign>, Vec<Web>>> = Vec::new();
    let mut result = Vec::new();
    let mut v = 0usize;
    loop {
        let mut layer: HashMap<Vec<Sign>, Vec<Web>> = HashMap::new();
        let mut total = 0usize;
        for s in &order {
            let mut found: BTreeMap<CanonicalKey, Web> = BTreeMap::new();
            if s.is_empty() {
                if v == 0 {
                    found.insert(Web::empty().canonical_key()?, Web::empty());
                }
            } else {
                for (g, p) in &preds[s] {
                    let source = match g {
                        Growth::Arc(..) => layer.get(p),
                        Growth::Y(..) => v.checked_sub(1).and_then(|u| layers[u].get(p)),
                        Growth::H(..) => v.checked_sub(2).and_then(|u| layers[u].get(p)),
                    };
                    for w in source.into_iter().flatten() {
                        let grown = grow(w, *g);
                        if !is_non_elliptic(&grown)? {
                            continue;
                        }
                        let key = grown.canonical_key()?;
                        found.entry(key).or_insert(grown);
                    }
                }
            }
            total += found.len();
            if total > cap {
                return Err(Error::FrontierCap { cap, sigma: sigma.to_string() });
            }
            layer.insert(s.clone(), found.into_values().collect());
        }
        if let Some(ws) = layer.get(&sigma.0) {
            result.extend(ws.iter().cloned());
        }
        let empty = total == 0;
        layers.push(layer);
        if empty && v > 0 && layers[v - 1].values().all(|x| x.is_empty()) {
            break;
        }
        v += 1;
    }
    Ok(result)
}

/// `dim` of the web space with boundary `sigma`.
pub fn basis_count(sigma: &SignString) -> Result<usize> {
    Ok(enumerate_basis(sigma)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::web::compose;

    #[test]
    fn identity_is_basis() {
        for m in 0..5 {
            assert!(find_redex(&Web::identity_web(m)).unwrap().is_none());
        }
    }

    #[test]
    fn w_squared_is_delta_w() {
        let w = Web::w_web(2, 1).unwrap();
        let ww = compose(&w, &w).unwrap();
        let r = find_redex(&ww).unwrap().unwrap();
        assert_eq!(r.kind, RedexKind::Digon);
        let out = apply(&ww, &r).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, qint(2));
        assert_eq!(out[0].1.canonical_key().unwrap(), w.canonical_key().unwrap());
    }

    #[test]
    fn loop_gives_alpha() {
        let mut w = Web::empty();
        w.loops = 1;
        let out = apply(&w, &find_redex(&w).unwrap().unwrap()).unwrap();
        assert_eq!(out, vec![(qint(3), Web::empty())]);
    }

    #[test]
    fn theta_value() {
        let mut n = Normalizer::new();
        // a source above a sink joined by three parallel edges
        let closed = compose(
            &Web::star_piece(0, 3, VertexKind::Source),
            &Web::star_piece(3, 0, VertexKind::Sink),
        )
        .unwrap();
        assert_eq!(n.evaluate_closed(&closed).unwrap(), &qint(2) * &qint(3));
    }

    #[test]
    fn alpha_zero_rejected() {
        assert!(Normalizer::with_loop_value(LaurentScalar::zero()).is_err());
        assert!(Normalizer::with_loop_value(qint(3)).is_ok());
    }

    #[test]
    fn tl_two_basis() {
        let b = enumerate_basis(&SignString::tl(2)).unwrap();
        assert_eq!(b.len(), 2);
    }
}
