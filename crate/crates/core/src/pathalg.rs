//! The path-algebra double complex on a fusion graph, and the presenting map
//! from strip words to matrices over path spaces.
//!
//! A path of sign string `σ` starts at `∗` and takes one step per sign: a `-`
//! step follows an edge forwards, a `+` step follows an edge backwards (an edge
//! of the reverse graph). The level `(i,j)` uses `j` forward steps followed by
//! `i` steps alternating `-`, `+`, ... . Operators map the path space of a
//! strip's bottom edge to that of its top edge; rows index top paths.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{boltzmann_u, qnum, Boltzmann, CellSystem, FusionGraph, PfData};
use crate::web::Sign;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Sign string of the level `(i,j)`.
pub fn level_signs(i: usize, j: usize) -> Vec<Sign> {
    let mut v = vec![Sign::Minus; j];
    v.extend((0..i).map(|k| if k % 2 == 0 { Sign::Minus } else { Sign::Plus }));
    v
}

fn signs_str(s: &[Sign]) -> String {
    s.iter().map(|x| x.as_char()).collect()
}

/// All paths from `∗` with a given sign string.
#[derive(Debug)]
pub struct PathSpace {
    pub signs: Vec<Sign>,
    pub paths: Vec<Vec<usize>>,
    pub ends: Vec<usize>,
    index: HashMap<Vec<usize>, usize>,
}

impl PathSpace {
    pub fn new(g: &FusionGraph, signs: &[Sign]) -> Self {
        let mut frontier: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), g.star)];
        for &s in signs {
            let mut next = Vec::new();
            for (p, v) in &frontier {
                let steps: Vec<(usize, usize)> = match s {
                    Sign::Minus => g.out_edges(*v).iter().map(|&e| (e, g.range(e))).collect(),
                    Sign::Plus => g.in_edges(*v).iter().map(|&e| (e, g.source(e))).collect(),
                };
                for (e, w) in steps {
                    let mut q = p.clone();
                    q.push(e);
                    next.push((q, w));
                }
            }
            frontier = next;
        }
        let (paths, ends): (Vec<_>, Vec<_>) = frontier.into_iter().unzip();
        let index = paths.iter().enumerate().map(|(k, p)| (p.clone(), k)).collect();
        PathSpace { signs: signs.to_vec(), paths, ends, index }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn find(&self, p: &[usize]) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Vertex reached after the first `k` steps of path `p`.
    pub fn vertex_after(&self, g: &FusionGraph, p: &[usize], k: usize) -> usize {
        if k == 0 {
            return g.star;
        }
        match self.signs[k - 1] {
            Sign::Minus => g.range(p[k - 1]),
            Sign::Plus => g.source(p[k - 1]),
        }
    }

    /// Number of path pairs with common end: the dimension of the algebra.
    pub fn algebra_dim(&self) -> usize {
        let mut count: HashMap<usize, usize> = HashMap::new();
        for &v in &self.ends {
            *count.entry(v).or_default() += 1;
        }
        count.values().map(|c| c * c).sum()
    }
}

/// `dim B_{i,j}` from the colour blocks of the adjacency matrix:
/// `(ΛΛᵀ)_{∗∗}` with `Λ = Δ01 Δ12 Δ20 ... (j factors)` followed by `i`
/// factors alternating `Δ_{c,c+1}` and its transpose, `c = j mod 3`.
pub fn dims(g: &FusionGraph, i: usize, j: usize) -> Result<u64> {
    let classes = g.colour_classes()?;
    let star_colour = g.vertices[g.star].colour.unwrap_or(0) as usize;
    let blocks = g.colour_blocks(&classes);
    let star_pos = classes[star_colour].iter().position(|&v| v == g.star).expect("star in its class");
    let mut lambda = DMatrix::<f64>::identity(classes[star_colour].len(), classes[star_colour].len());
    let mut c = star_colour;
    for _ in 0..j {
        lambda *= &blocks[c];
        c = (c + 1) % 3;
    }
    for k in 0..i {
        lambda = if k % 2 == 0 { lambda * &blocks[c] } else { lambda * blocks[c].transpose() };
    }
    let gram = &lambda * lambda.transpose();
    Ok(gram[(star_pos, star_pos)].round() as u64)
}

/// `dim B_{i,j}` by enumerating paths.
pub fn dims_enumerated(g: &FusionGraph, i: usize, j: usize) -> u64 {
    PathSpace::new(g, &level_signs(i, j)).algebra_dim() as u64
}

/// Graph, Perron-Frobenius data and cells: everything the path side needs.
pub struct PathModel {
    pub graph: FusionGraph,
    pub pf: PfData,
    pub cells: CellSystem,
    pub hecke: Boltzmann,
    spaces: Mutex<HashMap<Vec<Sign>, Arc<PathSpace>>>,
}

impl PathModel {
    pub fn new(graph: FusionGraph, pf: PfData, cells: CellSystem) -> Self {
        let hecke = boltzmann_u(&graph, &pf.phi, &cells);
        PathModel { graph, pf, cells, hecke, spaces: Mutex::new(HashMap::new()) }
    }

    /// `A^(n)` with numerically solved cells.
    pub fn build_a(n: u32, seed: u64) -> Result<Self> {
        let g = FusionGraph::build_a(n)?;
        let pf = crate::graph::pf_eigen(&g)?;
        let (cells, _) = crate::graph::solve_cells(&g, &pf, 1e-11, seed)?;
        Ok(PathModel::new(g, pf, cells))
    }

    pub fn with_cells(&self, cells: CellSystem) -> Self {
        PathModel::new(self.graph.clone(), self.pf.clone(), cells)
    }

    pub fn n(&self) -> u32 {
        self.graph.n
    }

    pub fn alpha(&self) -> f64 {
        qnum(3, self.n())
    }

    pub fn delta(&self) -> f64 {
        qnum(2, self.n())
    }

    /// `q^{e/3}` at `q = e^{iπ/n}`.
    pub fn t_pow(&self, e: i32) -> C {
        C::from_polar(1.0, f64::from(e) * std::f64::consts::PI / (3.0 * f64::from(self.n())))
    }

    fn phi(&self, v: usize) -> f64 {
        self.pf.phi[v]
    }

    pub fn space(&self, signs: &[Sign]) -> Arc<PathSpace> {
        let mut cache = self.spaces.lock().expect("space cache");
        cache
            .entry(signs.to_vec())
            .or_insert_with(|| Arc::new(PathSpace::new(&self.graph, signs)))
            .clone()
    }

    pub fn level(&self, i: usize, j: usize) -> Arc<PathSpace> {
        self.space(&level_signs(i, j))
    }

    /// Start and end vertex of step `k` of a path in `space`.
    fn step(&self, space: &PathSpace, p: &[usize], k: usize) -> (usize, usize) {
        let e = p[k];
        match space.signs[k] {
            Sign::Minus => (self.graph.source(e), self.graph.range(e)),
            Sign::Plus => (self.graph.range(e), self.graph.source(e)),
        }
    }
}

/// A linear map from the path space of `bottom` to that of `top`.
#[derive(Clone, Debug)]
pub struct PathOp {
    pub top: Arc<PathSpace>,
    pub bottom: Arc<PathSpace>,
    pub m: DMatrix<C>,
}

impl PathOp {
    pub fn zero(top: Arc<PathSpace>, bottom: Arc<PathSpace>) -> Self {
        let m = DMatrix::zeros(top.len(), bottom.len());
        PathOp { top, bottom, m }
    }

    pub fn identity(space: Arc<PathSpace>) -> Self {
        let m = DMatrix::identity(space.len(), space.len());
        PathOp { top: space.clone(), bottom: space, m }
    }

    /// Matrix unit `(p1, p2)`.
    pub fn unit(space: Arc<PathSpace>, p1: usize, p2: usize) -> Self {
        let mut x = PathOp::zero(space.clone(), space);
        x.m[(p1, p2)] = C::new(1.0, 0.0);
        x
    }

    /// Random element supported on pairs of paths with a common end.
    pub fn random(space: Arc<PathSpace>, rng: &mut impl Rng) -> Self {
        let mut x = PathOp::zero(space.clone(), space.clone());
        for a in 0..space.len() {
            for b in 0..space.len() {
                if space.ends[a] == space.ends[b] {
                    x.m[(a, b)] = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
        }
        x
    }

    pub fn is_square(&self) -> bool {
        self.top.signs == self.bottom.signs
    }

    pub fn mul(&self, other: &PathOp) -> Result<PathOp> {
        if self.bottom.signs != other.top.signs {
            return Err(Error::Input(format!(
                "cannot compose: {} below {}",
                signs_str(&other.top.signs),
                signs_str(&self.bottom.signs)
            )));
        }
        Ok(PathOp { top: self.top.clone(), bottom: other.bottom.clone(), m: &self.m * &other.m })
    }

    fn same_shape(&self, other: &PathOp) -> Result<()> {
        if self.top.signs != other.top.signs || self.bottom.signs != other.bottom.signs {
            return Err(Error::Input("operators live on different path spaces".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &PathOp) -> Result<PathOp> {
        self.same_shape(other)?;
        Ok(PathOp { top: self.top.clone(), bottom: self.bottom.clone(), m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &PathOp) -> Result<PathOp> {
        self.same_shape(other)?;
        Ok(PathOp { top: self.top.clone(), bottom: self.bottom.clone(), m: &self.m - &other.m })
    }

    pub fn scale(&self, c: C) -> PathOp {
        PathOp { top: self.top.clone(), bottom: self.bottom.clone(), m: &self.m * c }
    }

    pub fn adjoint(&self) -> PathOp {
        PathOp { top: self.bottom.clone(), bottom: self.top.clone(), m: self.m.adjoint() }
    }

    /// Largest entry of `self - other`.
    pub fn distance(&self, other: &PathOp) -> Result<f64> {
        self.same_shape(other)?;
        Ok((&self.m - &other.m).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn norm_max(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `x ⊗ 1` on paths extended by `extra` further steps.
    pub fn extend_right(&self, model: &PathModel, extra: &[Sign]) -> Result<PathOp> {
        if !self.is_square() {
            return Err(Error::Input("only square operators extend".into()));
        }
        let mut signs = self.top.signs.clone();
        signs.extend_from_slice(extra);
        let big = model.space(&signs);
        let k = self.top.signs.len();
        let mut out = PathOp::zero(big.clone(), big.clone());
        for (b, p) in big.paths.iter().enumerate() {
            let col = self.top.find(&p[..k]).expect("prefix is a path");
            for row in 0..self.top.len() {
                let v = self.m[(row, col)];
                if v == ZERO {
                    continue;
                }
                let mut q = self.top.paths[row].clone();
                q.extend_from_slice(&p[k..]);
                if let Some(a) = big.find(&q) {
                    out.m[(a, b)] += v;
                }
            }
        }
        Ok(out)
    }

    /// `Σ_σ x_{σσ} [3]^{-k} φ_{r(σ)}` for a square operator on `k`-step paths.
    pub fn trace(&self, model: &PathModel) -> C {
        let k = self.top.signs.len() as i32;
        let scale = model.alpha().powi(-k);
        (0..self.top.len()).map(|a| self.m[(a, a)] * model.phi(self.top.ends[a]) * scale).sum()
    }

    /// Entries pairing paths with different ends.
    pub fn off_block(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.top.len() {
            for b in 0..self.bottom.len() {
                if self.top.ends[a] != self.bottom.ends[b] {
                    worst = worst.max(self.m[(a, b)].norm());
                }
            }
        }
        worst
    }

    /// Nonzero entries as `{p1, p2, re, im}` with paths written as vertex ids.
    pub fn to_json(&self, model: &PathModel) -> serde_json::Value {
        let g = &model.graph;
        let walk = |space: &PathSpace, p: &[usize]| -> Vec<String> {
            (0..=p.len()).map(|k| g.vertices[space.vertex_after(g, p, k)].id.clone()).collect()
        };
        let mut terms = Vec::new();
        for a in 0..self.top.len() {
            for b in 0..self.bottom.len() {
                let v = self.m[(a, b)];
                if v.norm() > 1e-14 {
                    terms.push(serde_json::json!({
                        "p1": walk(&self.top, &self.top.paths[a]),
                        "p2": walk(&self.bottom, &self.bottom.paths[b]),
                        "re": v.re,
                        "im": v.im,
                    }));
                }
            }
        }
        serde_json::json!({ "top": signs_str(&self.top.signs), "bottom": signs_str(&self.bottom.signs), "terms": terms })
    }

    /// Reads an element of the path algebra on `signs` from `{p1, p2, re, im}` terms.
    pub fn from_json(model: &PathModel, signs: &[Sign], v: &serde_json::Value) -> Result<PathOp> {
        let space = model.space(signs);
        let mut x = PathOp::zero(space.clone(), space.clone());
        let terms = v
            .get("terms")
            .unwrap_or(v)
            .as_array()
            .ok_or_else(|| Error::Input("element must be a list of terms".into()))?;
        for t in terms {
            let re = t["re"].as_f64().unwrap_or(0.0);
            let im = t["im"].as_f64().unwrap_or(0.0);
            let a = path_from_ids(model, &space, &t["p1"])?;
            let b = path_from_ids(model, &space, &t["p2"])?;
            x.m[(a, b)] += C::new(re, im);
        }
        Ok(x)
    }
}

fn path_from_ids(model: &PathModel, space: &PathSpace, v: &serde_json::Value) -> Result<usize> {
    let g = &model.graph;
    let ids = v.as_array().ok_or_else(|| Error::Input("path must be a list of vertex ids".into()))?;
    let verts = ids
        .iter()
        .map(|x| {
            let id = x.as_str().ok_or_else(|| Error::Input("vertex id must be a string".into()))?;
            g.vertex_index(id).ok_or_else(|| Error::Input(format!("unknown vertex {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if verts.len() != space.signs.len() + 1 || verts[0] != g.star {
        return Err(Error::Input("path must start at the star and match the level".into()));
    }
    let mut edges = Vec::new();
    for (k, w) in verts.windows(2).enumerate() {
        let cands: Vec<usize> = match space.signs[k] {
            Sign::Minus => g.out_edges(w[0]).iter().copied().filter(|&e| g.range(e) == w[1]).collect(),
            Sign::Plus => g.in_edges(w[0]).iter().copied().filter(|&e| g.source(e) == w[1]).collect(),
        };
        match cands.as_slice() {
            [e] => edges.push(*e),
            [] => return Err(Error::Input(format!("no edge between {} and {}", g.vertices[w[0]].id, g.vertices[w[1]].id))),
            _ => return Err(Error::Input("parallel edges make vertex paths ambiguous".into())),
        }
    }
    space.find(&edges).ok_or_else(|| Error::Input("path not in space".into()))
}

/// `U_{-k}` in `B_{i,j}`: the Hecke weights on steps `j-k`, `j-k+1` (1-based).
pub fn make_u(model: &PathModel, i: usize, j: usize, k: usize) -> Result<PathOp> {
    if k >= j || (i == 0 && k == 0) {
        return Err(Error::Index(format!("U_-{k} needs 0 <= k < j and a step to its right, at level ({i},{j})")));
    }
    let space = model.level(i, j);
    Ok(local_two_step(&space, j - k - 1, |a, b| model.hecke.get(b.0, b.1, a.0, a.1)))
}

/// Operator acting on steps `c`, `c+1` (0-based) through `f(row pair, column pair)`.
fn local_two_step(space: &Arc<PathSpace>, c: usize, f: impl Fn((usize, usize), (usize, usize)) -> C) -> PathOp {
    let mut x = PathOp::zero(space.clone(), space.clone());
    let mut groups: HashMap<(Vec<usize>, Vec<usize>), Vec<usize>> = HashMap::new();
    for (k, p) in space.paths.iter().enumerate() {
        groups.entry((p[..c].to_vec(), p[c + 2..].to_vec())).or_default().push(k);
    }
    for members in groups.values() {
        for &a in members {
            for &b in members {
                let pa = &space.paths[a];
                let pb = &space.paths[b];
                x.m[(a, b)] = f((pa[c], pa[c + 1]), (pb[c], pb[c + 1]));
            }
        }
    }
    x
}

/// Jones projection `e_l` in `B_{i,j}`, on vertical steps `l`, `l+1`.
pub fn make_e(model: &PathModel, i: usize, j: usize, l: usize) -> Result<PathOp> {
    if l == 0 || l + 1 > i {
        return Err(Error::Index(format!("e_{l} needs 1 <= l <= i-1, at level ({i},{j})")));
    }
    let space = model.level(i, j);
    let c = j + l - 1;
    let mut x = PathOp::zero(space.clone(), space.clone());
    for (a, pa) in space.paths.iter().enumerate() {
        if pa[c] != pa[c + 1] {
            continue;
        }
        for (b, pb) in space.paths.iter().enumerate() {
            if pb[c] != pb[c + 1] || pa[..c] != pb[..c] || pa[c + 2..] != pb[c + 2..] {
                continue;
            }
            let v = space.vertex_after(&model.graph, pa, c);
            let ra = space.vertex_after(&model.graph, pa, c + 1);
            let rb = space.vertex_after(&model.graph, pb, c + 1);
            let coeff = (model.phi(ra) * model.phi(rb)).sqrt() / model.phi(v) / model.alpha();
            x.m[(a, b)] = C::new(coeff, 0.0);
        }
    }
    Ok(x)
}

/// Connection tensor of one parity, keyed by the edges `[ρ1, ρ2, ρ3, ρ4]` of
/// a square with `ρ1` on top, `ρ2` on the right, `ρ3` on the left and `ρ4`
/// at the bottom. For odd parity the vertical edges are traversed backwards.
#[derive(Clone, Debug)]
pub struct Connection {
    pub odd: bool,
    pub x: HashMap<[usize; 4], C>,
}

/// Corner vertices `(a, b, c, d)` (top-left, top-right, bottom-left,
/// bottom-right) of the square spanned by four edges.
fn square_corners(g: &FusionGraph, odd: bool, r: [usize; 4]) -> (usize, usize, usize, usize) {
    let a = g.source(r[0]);
    let b = g.range(r[0]);
    let c = g.source(r[3]);
    let d = g.range(r[3]);
    let _ = odd;
    (a, b, c, d)
}

impl Connection {
    pub fn get(&self, r1: usize, r2: usize, r3: usize, r4: usize) -> C {
        self.x.get(&[r1, r2, r3, r4]).copied().unwrap_or_default()
    }

    /// Edges `(ρ1, ρ2)` of top-right paths from `a` to `d`.
    fn top_right(&self, g: &FusionGraph, a: usize, d: usize) -> Vec<(usize, usize)> {
        if self.odd {
            let mut out = Vec::new();
            for &r1 in g.out_edges(a) {
                for &r2 in g.out_edges(d) {
                    if g.range(r2) == g.range(r1) {
                        out.push((r1, r2));
                    }
                }
            }
            out
        } else {
            g.two_paths(a, d)
        }
    }

    /// Edges `(ρ3, ρ4)` of left-bottom paths from `a` to `d`.
    fn left_bottom(&self, g: &FusionGraph, a: usize, d: usize) -> Vec<(usize, usize)> {
        if self.odd {
            let mut out = Vec::new();
            for &r3 in g.in_edges(a) {
                for &r4 in g.out_edges(g.source(r3)) {
                    if g.range(r4) == d {
                        out.push((r3, r4));
                    }
                }
            }
            out
        } else {
            g.two_paths(a, d)
        }
    }

    /// `max |X X† - 1|` over all corner pairs.
    pub fn unitarity_residual(&self, g: &FusionGraph) -> f64 {
        let nv = g.num_vertices();
        let mut worst: f64 = 0.0;
        for a in 0..nv {
            for d in 0..nv {
                let rows = self.top_right(g, a, d);
                let cols = self.left_bottom(g, a, d);
                for &(r1, r2) in &rows {
                    for &(s1, s2) in &rows {
                        let v: C = cols
                            .iter()
                            .map(|&(r3, r4)| self.get(r1, r2, r3, r4) * self.get(s1, s2, r3, r4).conj())
                            .sum();
                        let target = if (r1, r2) == (s1, s2) { 1.0 } else { 0.0 };
                        worst = worst.max((v - target).norm());
                    }
                }
            }
        }
        worst
    }

    /// Residual of the commuting-square identity
    /// `Σ_{σ2,σ4} φ_{r(σ2)} √(φ_{s(σ3)} φ_{s(σ3')}) / (φ_{s(σ2)} φ_{s(σ4)})
    ///  X^{σ1σ2}_{σ3σ4} conj X^{σ1'σ2}_{σ3'σ4} = δ δ`,
    /// with `s` and `r` read along the direction of travel of each step.
    pub fn commuting_square_residual(&self, g: &FusionGraph, phi: &[f64]) -> f64 {
        let mut by_bc: HashMap<(usize, usize), Vec<[usize; 4]>> = HashMap::new();
        for k in self.x.keys() {
            let (_, b, c, _) = square_corners(g, self.odd, *k);
            by_bc.entry((b, c)).or_default().push(*k);
        }
        let mut worst: f64 = 0.0;
        let (nv, _) = (g.num_vertices(), ());
        for b in 0..nv {
            for c in 0..nv {
                let squares = by_bc.get(&(b, c)).cloned().unwrap_or_default();
                let mut tops: Vec<(usize, usize)> = squares.iter().map(|k| (k[0], k[2])).collect();
                tops.sort_unstable();
                tops.dedup();
                for &(s1, s3) in &tops {
                    for &(t1, t3) in &tops {
                        let mut acc = ZERO;
                        for k in &squares {
                            if k[0] != s1 || k[2] != s3 {
                                continue;
                            }
                            let (s2, s4) = (k[1], k[3]);
                            let (_, _, _, d) = square_corners(g, self.odd, *k);
                            let (a, a2) = (g.source(s1), g.source(t1));
                            let weight = phi[d] * (phi[a] * phi[a2]).sqrt() / (phi[b] * phi[c]);
                            acc += self.get(s1, s2, s3, s4) * self.get(t1, s2, t3, s4).conj() * weight;
                        }
                        let target = if s1 == t1 && s3 == t3 { 1.0 } else { 0.0 };
                        worst = worst.max((acc - target).norm());
                    }
                }
            }
        }
        worst
    }
}

/// The connection of the square between rows `i` and `i+1`, for `i` of the given parity.
pub fn connection(model: &PathModel, odd: bool) -> Connection {
    let g = &model.graph;
    let t2 = model.t_pow(2);
    let tm1 = model.t_pow(-1);
    let nv = g.num_vertices();
    let mut even = HashMap::new();
    for a in 0..nv {
        for d in 0..nv {
            let paths = g.two_paths(a, d);
            for &(r1, r2) in &paths {
                for &(r3, r4) in &paths {
                    let delta = if (r1, r2) == (r3, r4) { t2 } else { ZERO };
                    even.insert([r1, r2, r3, r4], delta - tm1 * model.hecke.get(r1, r2, r3, r4));
                }
            }
        }
    }
    if !odd {
        return Connection { odd, x: even };
    }
    let phi = &model.pf.phi;
    let mut x = HashMap::new();
    for (&[r4, r2, r3, r1], &v) in &even {
        // square with ρ4 on top, ρ2 right, ρ3 left, ρ1 bottom, all forward
        let ratio = (phi[g.source(r3)] * phi[g.range(r2)] / (phi[g.range(r3)] * phi[g.source(r2)])).sqrt();
        x.insert([r1, r2, r3, r4], v.conj() * ratio);
    }
    Connection { odd, x }
}

/// One token of a strip word. Positions are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strip {
    /// Arc with both ends on the top edge at `i`, `i+1`.
    Cup(usize),
    /// Arc with both ends on the bottom edge at `i`, `i+1`; the sign is that of point `i`.
    Cap(usize, Sign),
    /// Sink with two top legs at `i`, `i+1`.
    ForkIn(usize),
    /// Sink with its single top leg at `i`.
    ForkInInv(usize),
    /// Source with two top legs at `i`, `i+1`.
    ForkOut(usize),
    /// Source with its single top leg at `i`.
    ForkOutInv(usize),
    /// Labelled rectangle with strings passing on either side.
    Rect { label: usize, left: usize, right: usize },
    /// Positive crossing of the strings at `i`, `i+1`.
    Cross(usize),
    /// Negative crossing of the strings at `i`, `i+1`.
    CrossInv(usize),
}

impl fmt::Display for Strip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Strip::Cup(i) => write!(f, "CUP({i})"),
            Strip::Cap(i, s) => write!(f, "CAP({i},{})", s.as_char()),
            Strip::ForkIn(i) => write!(f, "FORK_IN({i})"),
            Strip::ForkInInv(i) => write!(f, "FORK_IN_INV({i})"),
            Strip::ForkOut(i) => write!(f, "FORK_OUT({i})"),
            Strip::ForkOutInv(i) => write!(f, "FORK_OUT_INV({i})"),
            Strip::Rect { label, left, right } => write!(f, "RECT({label},{left},{right})"),
            Strip::Cross(i) => write!(f, "CROSS({i})"),
            Strip::CrossInv(i) => write!(f, "CROSS_INV({i})"),
        }
    }
}

impl FromStr for Strip {
    type Err = Error;
    fn from_str(s: &str) -> Result<Strip> {
        let bad = || Error::Input(format!("bad strip token `{s}`"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = &s[..open];
        let args: Vec<&str> = s[open + 1..s.len() - 1].split(',').map(str::trim).collect();
        let num = |k: usize| -> Result<usize> { args.get(k).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let pos = || -> Result<usize> {
            let p = num(0)?;
            if p == 0 {
                return Err(Error::Input(format!("positions are 1-based in `{s}`")));
            }
            Ok(p)
        };
        Ok(match name {
            "CUP" => Strip::Cup(pos()?),
            "CAP" => {
                let sign = match args.get(1).copied() {
                    None | Some("-") => Sign::Minus,
                    Some("+") => Sign::Plus,
                    _ => return Err(bad()),
                };
                Strip::Cap(pos()?, sign)
            }
            "FORK_IN" => Strip::ForkIn(pos()?),
            "FORK_IN_INV" => Strip::ForkInInv(pos()?),
            "FORK_OUT" => Strip::ForkOut(pos()?),
            "FORK_OUT_INV" => Strip::ForkOutInv(pos()?),
            "RECT" => Strip::Rect { label: num(0)?, left: num(1)?, right: num(2)? },
            "CROSS" => Strip::Cross(pos()?),
            "CROSS_INV" => Strip::CrossInv(pos()?),
            _ => return Err(bad()),
        })
    }
}

impl Strip {
    /// Signs along the bottom edge, given those along the top edge.
    pub fn bottom(&self, top: &[Sign], labels: &[PathOp]) -> Result<Vec<Sign>> {
        use Sign::{Minus, Plus};
        let bad = |why: &str| Error::Input(format!("{self} below `{}`: {why}", signs_str(top)));
        let at = |i: usize| -> Result<Sign> { top.get(i).copied().ok_or_else(|| bad("position out of range")) };
        let mut out = top.to_vec();
        match *self {
            Strip::Cup(i) => {
                if at(i - 1)? == at(i)? {
                    return Err(bad("arc ends need opposite signs"));
                }
                out.drain(i - 1..=i);
            }
            Strip::Cap(i, s) => {
                if i > top.len() + 1 {
                    return Err(bad("position out of range"));
                }
                out.splice(i - 1..i - 1, [s, s.flip()]);
            }
            Strip::ForkIn(i) | Strip::ForkOut(i) => {
                let want = if matches!(self, Strip::ForkIn(_)) { Minus } else { Plus };
                if at(i - 1)? != want || at(i)? != want {
                    return Err(bad("fork legs have the wrong orientation"));
                }
                out.splice(i - 1..=i, [want.flip()]);
            }
            Strip::ForkInInv(i) | Strip::ForkOutInv(i) => {
                let want = if matches!(self, Strip::ForkInInv(_)) { Minus } else { Plus };
                if at(i - 1)? != want {
                    return Err(bad("fork leg has the wrong orientation"));
                }
                out.splice(i - 1..i, [want.flip(), want.flip()]);
            }
            Strip::Rect { label, left, right } => {
                let x = labels.get(label).ok_or_else(|| bad("no such label"))?;
                let k = x.top.signs.len();
                if !x.is_square() || left + k + right != top.len() || top[left..left + k] != x.top.signs[..] {
                    return Err(bad("label signature does not match"));
                }
            }
            Strip::Cross(i) | Strip::CrossInv(i) => {
                at(i)?;
                out.swap(i - 1, i);
            }
        }
        Ok(out)
    }
}

/// A vertical stack of strips, listed from the top.
#[derive(Clone, Debug, PartialEq)]
pub struct StripWord {
    pub top: Vec<Sign>,
    pub strips: Vec<Strip>,
}

impl StripWord {
    pub fn new(top: Vec<Sign>, strips: Vec<Strip>) -> Self {
        StripWord { top, strips }
    }

    pub fn interfaces(&self, labels: &[PathOp]) -> Result<Vec<Vec<Sign>>> {
        let mut out = vec![self.top.clone()];
        for s in &self.strips {
            let next = s.bottom(out.last().expect("nonempty"), labels)?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let top: crate::web::SignString =
            v["top"].as_str().ok_or_else(|| Error::Input("strip word needs a `top` sign string".into()))?.parse()?;
        let strips = v["strips"]
            .as_array()
            .ok_or_else(|| Error::Input("strip word needs a `strips` list".into()))?
            .iter()
            .map(|t| t.as_str().ok_or_else(|| Error::Input("strip tokens are strings".into()))?.parse())
            .collect::<Result<Vec<Strip>>>()?;
        Ok(StripWord { top: top.0, strips })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "top": signs_str(&self.top),
            "strips": self.strips.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        })
    }

    /// Stacks `other` below `self`.
    pub fn then(mut self, other: &StripWord) -> Self {
        self.strips.extend_from_slice(&other.strips);
        self
    }

    /// `W_{-k}` at level `(i,j)`.
    pub fn w(i: usize, j: usize, k: usize) -> Result<Self> {
        if k >= j || (i == 0 && k == 0) {
            return Err(Error::Index(format!("W_-{k} at level ({i},{j})")));
        }
        let c = j - k;
        Ok(StripWord::new(level_signs(i, j), vec![Strip::ForkIn(c), Strip::ForkOutInv(c)]))
    }

    /// `f_l` (the cup-cap on vertical strings `l`, `l+1`) at level `(i,j)`.
    pub fn f(i: usize, j: usize, l: usize) -> Result<Self> {
        if l == 0 || l + 1 > i {
            return Err(Error::Index(format!("f_{l} at level ({i},{j})")));
        }
        let top = level_signs(i, j);
        let c = j + l;
        let s = top[c - 1];
        Ok(StripWord::new(top, vec![Strip::Cup(c), Strip::Cap(c, s)]))
    }

    /// The hexagon `f^(3)_m` on vertical strings `m`, `m+1`, `m+2` at level `(i,j)`.
    pub fn f3(i: usize, j: usize, m: usize) -> Result<Self> {
        if m == 0 || m + 2 > i {
            return Err(Error::Index(format!("f^(3)_{m} at level ({i},{j})")));
        }
        let top = level_signs(i, j);
        let c = j + m;
        let strips = if top[c - 1] == Sign::Minus {
            vec![
                Strip::ForkInInv(c),
                Strip::ForkOut(c + 1),
                Strip::ForkIn(c + 1),
                Strip::ForkOutInv(c),
                Strip::ForkOutInv(c + 2),
                Strip::ForkIn(c + 1),
            ]
        } else {
            vec![
                Strip::ForkOutInv(c),
                Strip::ForkIn(c + 1),
                Strip::ForkOut(c + 1),
                Strip::ForkInInv(c),
                Strip::ForkInInv(c + 2),
                Strip::ForkOut(c + 1),
            ]
        };
        Ok(StripWord::new(top, strips))
    }

    /// Closure of label 0 (with top signs `signs`) by strings round the right.
    pub fn closure(signs: &[Sign]) -> Self {
        let k = signs.len();
        let mut strips: Vec<Strip> = (1..=k).map(|p| Strip::Cap(p, signs[p - 1])).collect();
        strips.push(Strip::Rect { label: 0, left: 0, right: k });
        strips.extend((1..=k).rev().map(Strip::Cup));
        StripWord::new(Vec::new(), strips)
    }

    /// Closes the last string of label 0 round the right.
    pub fn right_expectation(signs: &[Sign]) -> Result<Self> {
        let k = signs.len();
        if k == 0 {
            return Err(Error::Input("nothing to close".into()));
        }
        let strips = vec![Strip::Cap(k, signs[k - 1]), Strip::Rect { label: 0, left: 0, right: 1 }, Strip::Cup(k)];
        Ok(StripWord::new(signs[..k - 1].to_vec(), strips))
    }

    /// Label 0 with `extra` strings added on its right.
    pub fn include_right(signs: &[Sign], extra: &[Sign]) -> Self {
        let mut top = signs.to_vec();
        top.extend_from_slice(extra);
        StripWord::new(top, vec![Strip::Rect { label: 0, left: 0, right: extra.len() }])
    }
}

/// Sparse vector over a path space.
type Vector = HashMap<usize, C>;

fn add_to(v: &mut Vector, k: usize, c: C) {
    *v.entry(k).or_insert(ZERO) += c;
}

/// Evaluates a strip word: the product of its strip matrices, top to bottom.
pub fn present_z(model: &PathModel, word: &StripWord, labels: &[PathOp]) -> Result<PathOp> {
    let sigs = word.interfaces(labels)?;
    let top = model.space(&sigs[0]);
    let bottom = model.space(sigs.last().expect("nonempty"));
    let mut out = PathOp::zero(top, bottom.clone());
    for b in 0..bottom.len() {
        let v = Vector::from([(b, C::new(1.0, 0.0))]);
        let col = apply_word(model, &word.strips, &sigs, labels, v)?;
        for (a, c) in col {
            out.m[(a, b)] += c;
        }
    }
    Ok(out)
}

/// Applies strips (with precomputed interfaces) to a vector on the bottom space.
fn apply_word(model: &PathModel, strips: &[Strip], sigs: &[Vec<Sign>], labels: &[PathOp], mut v: Vector) -> Result<Vector> {
    for (k, s) in strips.iter().enumerate().rev() {
        v = apply_strip(model, s, &sigs[k], &sigs[k + 1], labels, &v)?;
    }
    Ok(v)
}

fn apply_sub_word(model: &PathModel, top: &[Sign], strips: &[Strip], labels: &[PathOp], v: Vector) -> Result<Vector> {
    let word = StripWord::new(top.to_vec(), strips.to_vec());
    let sigs = word.interfaces(labels)?;
    apply_word(model, strips, &sigs, labels, v)
}

/// Smoothings `(S, T)` of a crossing at 0-based position `c` whose top signs are `(a, b)`:
/// `S` is the orientation-compatible smoothing and `T` the sink/source one.
fn crossing_smoothings(a: Sign, b: Sign, c: usize) -> (Vec<Strip>, Vec<Strip>) {
    use Sign::{Minus, Plus};
    let p = c + 1;
    match (a, b) {
        (Minus, Minus) => (vec![], vec![Strip::ForkIn(p), Strip::ForkOutInv(p)]),
        (Plus, Plus) => (vec![], vec![Strip::ForkOut(p), Strip::ForkInInv(p)]),
        (Minus, Plus) => (vec![Strip::Cup(p), Strip::Cap(p, Plus)], vec![Strip::ForkInInv(p), Strip::ForkOut(p + 1)]),
        (Plus, Minus) => (vec![Strip::Cup(p), Strip::Cap(p, Minus)], vec![Strip::ForkInInv(p + 1), Strip::ForkOut(p)]),
    }
}

fn apply_strip(model: &PathModel, strip: &Strip, top: &[Sign], bottom: &[Sign], labels: &[PathOp], v: &Vector) -> Result<Vector> {
    let g = &model.graph;
    let ts = model.space(top);
    let bs = model.space(bottom);
    let mut out = Vector::new();
    let emit = |q: Vec<usize>, c: C, out: &mut Vector| {
        if let Some(a) = ts.find(&q) {
            add_to(out, a, c);
        }
    };
    match *strip {
        Strip::Cross(i) | Strip::CrossInv(i) => {
            let positive = matches!(strip, Strip::Cross(_));
            let (s, t) = crossing_smoothings(top[i - 1], top[i], i - 1);
            let (cs, ct) = if positive {
                (model.t_pow(2), -model.t_pow(-1))
            } else {
                (model.t_pow(-2), -model.t_pow(1))
            };
            let vs = apply_sub_word(model, top, &s, labels, v.clone())?;
            let vt = apply_sub_word(model, top, &t, labels, v.clone())?;
            for (k, c) in vs {
                add_to(&mut out, k, c * cs);
            }
            for (k, c) in vt {
                add_to(&mut out, k, c * ct);
            }
            return Ok(out);
        }
        Strip::Rect { label, left, .. } if left > 0 => {
            return apply_rect_left(model, labels, label, left, top, v);
        }
        _ => {}
    }
    for (&b, &coeff) in v {
        if coeff == ZERO {
            continue;
        }
        let p = &bs.paths[b];
        match *strip {
            Strip::Cup(i) => {
                let c = i - 1;
                let vtx = bs.vertex_after(g, p, c);
                let steps: Vec<(usize, usize)> = match top[c] {
                    Sign::Minus => g.out_edges(vtx).iter().map(|&e| (e, g.range(e))).collect(),
                    Sign::Plus => g.in_edges(vtx).iter().map(|&e| (e, g.source(e))).collect(),
                };
                for (e, w) in steps {
                    let mut q = p[..c].to_vec();
                    q.extend([e, e]);
                    q.extend_from_slice(&p[c..]);
                    emit(q, coeff * (model.phi(w) / model.phi(vtx)).sqrt(), &mut out);
                }
            }
            Strip::Cap(i, _) => {
                let c = i - 1;
                if p[c] != p[c + 1] {
                    continue;
                }
                let (vtx, w) = model.step(&bs, p, c);
                let mut q = p[..c].to_vec();
                q.extend_from_slice(&p[c + 2..]);
                emit(q, coeff * (model.phi(w) / model.phi(vtx)).sqrt(), &mut out);
            }
            Strip::ForkIn(i) => {
                // bottom step goes backwards along λ from v to w
                let c = i - 1;
                let lam = p[c];
                let (v0, w) = model.step(&bs, p, c);
                let norm = 1.0 / (model.phi(v0) * model.phi(w)).sqrt();
                for (a, b2) in g.two_paths(v0, w) {
                    let cell = model.cells.w(lam, a, b2);
                    if cell != ZERO {
                        let mut q = p[..c].to_vec();
                        q.extend([a, b2]);
                        q.extend_from_slice(&p[c + 1..]);
                        emit(q, coeff * cell * norm, &mut out);
                    }
                }
            }
            Strip::ForkOut(i) => {
                // bottom step e: v -> w; top steps go backwards along p: x -> v and q: w -> x
                let c = i - 1;
                let e = p[c];
                let (v0, w) = model.step(&bs, p, c);
                let norm = 1.0 / (model.phi(v0) * model.phi(w)).sqrt();
                for &qe in g.out_edges(w) {
                    let x = g.range(qe);
                    for &pe in g.out_edges(x).iter().filter(|&&pe| g.range(pe) == v0) {
                        let cell = model.cells.w(e, qe, pe).conj();
                        if cell != ZERO {
                            let mut q = p[..c].to_vec();
                            q.extend([pe, qe]);
                            q.extend_from_slice(&p[c + 1..]);
                            emit(q, coeff * cell * norm, &mut out);
                        }
                    }
                }
            }
            Strip::ForkInInv(i) => {
                // bottom steps go backwards along p1: z -> v and p2: w -> z; top step a: v -> w
                let c = i - 1;
                let (p1, p2) = (p[c], p[c + 1]);
                let v0 = bs.vertex_after(g, p, c);
                let w = bs.vertex_after(g, p, c + 2);
                let norm = 1.0 / (model.phi(v0) * model.phi(w)).sqrt();
                for &a in g.out_edges(v0).iter().filter(|&&a| g.range(a) == w) {
                    let cell = model.cells.w(a, p2, p1);
                    if cell != ZERO {
                        let mut q = p[..c].to_vec();
                        q.push(a);
                        q.extend_from_slice(&p[c + 2..]);
                        emit(q, coeff * cell * norm, &mut out);
                    }
                }
            }
            Strip::ForkOutInv(i) => {
                // bottom steps c: v -> y and f: y -> w; top step backwards along p: w -> v
                let c = i - 1;
                let (ce, fe) = (p[c], p[c + 1]);
                let v0 = bs.vertex_after(g, p, c);
                let w = bs.vertex_after(g, p, c + 2);
                let norm = 1.0 / (model.phi(v0) * model.phi(w)).sqrt();
                for &pe in g.out_edges(w).iter().filter(|&&pe| g.range(pe) == v0) {
                    let cell = model.cells.w(ce, fe, pe).conj();
                    if cell != ZERO {
                        let mut q = p[..c].to_vec();
                        q.push(pe);
                        q.extend_from_slice(&p[c + 2..]);
                        emit(q, coeff * cell * norm, &mut out);
                    }
                }
            }
            Strip::Rect { label, .. } => {
                let x = &labels[label];
                let k = x.top.signs.len();
                let Some(col) = x.bottom.find(&p[..k]) else { continue };
                for row in 0..x.top.len() {
                    let val = x.m[(row, col)];
                    if val == ZERO {
                        continue;
                    }
                    let mut q = x.top.paths[row].clone();
                    q.extend_from_slice(&p[k..]);
                    emit(q, coeff * val, &mut out);
                }
            }
            Strip::Cross(_) | Strip::CrossInv(_) => unreachable!("handled above"),
        }
    }
    Ok(out)
}

/// A rectangle with strings on its left: the strings are carried across to
/// the right by crossings, the label acts, and inverse crossings bring them back.
fn apply_rect_left(model: &PathModel, labels: &[PathOp], label: usize, left: usize, top: &[Sign], v: &Vector) -> Result<Vector> {
    let k = labels[label].top.signs.len();
    // crossings taking the interface `μ τ ρ` (bottom) to `τ μ ρ` (top), listed top first
    let mut carry = Vec::new();
    for s in (0..left).rev() {
        for c in s..s + k {
            carry.push(c + 1);
        }
    }
    let mut moved = top[left..left + k].to_vec();
    moved.extend_from_slice(&top[..left]);
    moved.extend_from_slice(&top[left + k..]);
    let down: Vec<Strip> = carry.iter().rev().map(|&c| Strip::Cross(c)).collect();
    let up: Vec<Strip> = carry.iter().map(|&c| Strip::CrossInv(c)).collect();
    // bring the left strings to the right: a word from `moved` (top) down to `top` (bottom)
    let w1 = apply_sub_word(model, &moved, &down, labels, v.clone())?;
    let rect = [Strip::Rect { label, left: 0, right: top.len() - k }];
    let w2 = apply_sub_word(model, &moved, &rect, labels, w1)?;
    apply_sub_word(model, top, &up, labels, w2)
}

/// Local unitary on steps `c`, `c+1` turning a vertical-then-horizontal pair
/// into a horizontal-then-vertical pair through the connection.
fn transport_step(model: &PathModel, conn: &Connection, from: &PathSpace, to: &PathSpace, c: usize, v: &Vector) -> Vector {
    let g = &model.graph;
    let mut out = Vector::new();
    for (&b, &coeff) in v {
        let p = &from.paths[b];
        let (r3, r4) = (p[c], p[c + 1]);
        let a = from.vertex_after(g, p, c);
        let d = from.vertex_after(g, p, c + 2);
        for (r1, r2) in conn.top_right(g, a, d) {
            let x = conn.get(r1, r2, r3, r4);
            if x == ZERO {
                continue;
            }
            let mut q = p[..c].to_vec();
            q.extend([r1, r2]);
            q.extend_from_slice(&p[c + 2..]);
            if let Some(k) = to.find(&q) {
                add_to(&mut out, k, coeff * x);
            }
        }
    }
    out
}

/// Basis change through the last column of squares: an element on `H^j V^{i+1} H`
/// paths is rewritten on `H^{j+1} V^{i+1}` paths, i.e. as an element of `B_{i+1,j+1}`.
pub fn basis_change(model: &PathModel, x: &PathOp, i: usize, j: usize) -> Result<PathOp> {
    let mut from_signs = level_signs(i + 1, j);
    from_signs.push(Sign::Minus);
    if x.top.signs != from_signs || !x.is_square() {
        return Err(Error::Input(format!("basis change expects an operator on `{}`", signs_str(&from_signs))));
    }
    let to = model.level(i + 1, j + 1);
    let t = basis_change_matrix(model, i, j, &x.top, &to);
    Ok(PathOp { top: to.clone(), bottom: to, m: &t * &x.m * t.adjoint() })
}

/// Inverse of [`basis_change`].
pub fn basis_change_inverse(model: &PathModel, y: &PathOp, i: usize, j: usize) -> Result<PathOp> {
    let mut from_signs = level_signs(i + 1, j);
    from_signs.push(Sign::Minus);
    let from = model.space(&from_signs);
    let to = model.level(i + 1, j + 1);
    if y.top.signs != to.signs {
        return Err(Error::Input("basis change inverse expects an element of the next level".into()));
    }
    let t = basis_change_matrix(model, i, j, &from, &to);
    Ok(PathOp { top: from.clone(), bottom: from, m: t.adjoint() * &y.m * &t })
}

fn basis_change_matrix(model: &PathModel, i: usize, j: usize, from: &PathSpace, to: &PathSpace) -> DMatrix<C> {
    let conns = [connection(model, false), connection(model, true)];
    let vert = level_signs(i + 1, 0);
    // the extra horizontal step moves left past one vertical step at a time
    let stage = |within: usize| -> Vec<Sign> {
        let mut s = vec![Sign::Minus; j];
        s.extend_from_slice(&vert[..within]);
        s.push(Sign::Minus);
        s.extend_from_slice(&vert[within..]);
        s
    };
    let mut t = DMatrix::identity(from.len(), from.len());
    let mut current = model.space(&stage(i + 1));
    debug_assert_eq!(current.signs, from.signs);
    for m in (0..=i).rev() {
        let next = if m == 0 { model.space(&to.signs) } else { model.space(&stage(m)) };
        let mut step = DMatrix::zeros(next.len(), current.len());
        for b in 0..current.len() {
            let img = transport_step(model, &conns[m % 2], &current, &next, j + m, &Vector::from([(b, C::new(1.0, 0.0))]));
            for (a, x) in img {
                step[(a, b)] = x;
            }
        }
        t = step * t;
        current = next;
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatEntry {
    pub vertical: usize,
    pub horizontal: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatReport {
    pub vmax: usize,
    pub hmax: usize,
    pub max_residual: f64,
    pub entries: Vec<FlatEntry>,
}

/// Transports every matrix unit of `B_{k,0}` into the horizontal-first basis
/// of `B_{k,l}` and measures how far it is from commuting with `B_{0,l}`.
pub fn flatness_check(model: &PathModel, vmax: usize, hmax: usize) -> FlatReport {
    use rayon::prelude::*;
    let conns = [connection(model, false), connection(model, true)];
    let pairs: Vec<(usize, usize)> = (1..=vmax).flat_map(|k| (1..=hmax).map(move |l| (k, l))).collect();
    let entries: Vec<FlatEntry> = pairs
        .par_iter()
        .map(|&(k, l)| FlatEntry { vertical: k, horizontal: l, residual: flat_residual(model, &conns, k, l) })
        .collect();
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    FlatReport { vmax, hmax, max_residual, entries }
}

fn flat_residual(model: &PathModel, conns: &[Connection; 2], k: usize, l: usize) -> f64 {
    let vert = level_signs(k, 0);
    // signs once `h` horizontal steps sit in front and the next one sits after `within` vertical steps
    let stage = |h: usize, within: usize| -> Vec<Sign> {
        let mut s = vec![Sign::Minus; h];
        s.extend_from_slice(&vert[..within]);
        s.push(Sign::Minus);
        s.extend_from_slice(&vert[within..]);
        s.extend(std::iter::repeat_n(Sign::Minus, l - h - 1));
        s
    };
    let mut start = vert.clone();
    start.extend(std::iter::repeat_n(Sign::Minus, l));
    let vspace = model.space(&vert);
    let start_space = model.space(&start);
    let final_space = model.level(k, l);

    // local position of every path inside its endpoint block
    let block_of = |space: &PathSpace| -> Vec<usize> {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        space
            .ends
            .iter()
            .map(|&w| {
                let c = seen.entry(w).or_insert(0);
                *c += 1;
                *c - 1
            })
            .collect()
    };
    let start_pos = block_of(&start_space);
    let mut blocks: HashMap<usize, DMatrix<C>> = HashMap::new();
    for (b, &w) in start_space.ends.iter().enumerate() {
        let size = start_space.ends.iter().filter(|&&x| x == w).count();
        let m = blocks.entry(w).or_insert_with(|| DMatrix::zeros(size, size));
        m[(start_pos[b], start_pos[b])] = C::new(1.0, 0.0);
    }
    // rows of each block follow the current stage's paths; apply the local unitaries
    let mut current = start_space.clone();
    for h in 0..l {
        for m in (0..k).rev() {
            let from = model.space(&stage(h, m + 1));
            let to = model.space(&stage(h, m));
            debug_assert_eq!(from.signs, current.signs);
            let from_pos = block_of(&from);
            let to_pos = block_of(&to);
            let mut next: HashMap<usize, DMatrix<C>> =
                blocks.iter().map(|(&w, b)| (w, DMatrix::zeros(b.nrows(), b.ncols()))).collect();
            for r in 0..from.len() {
                let w = from.ends[r];
                let src = &blocks[&w];
                let img = transport_step(model, &conns[m % 2], &from, &to, h + m, &Vector::from([(r, C::new(1.0, 0.0))]));
                let dst = next.get_mut(&w).expect("block");
                for (t, x) in img {
                    let row = src.row(from_pos[r]) * x;
                    let mut target = dst.row_mut(to_pos[t]);
                    target += row;
                }
            }
            blocks = next;
            current = to;
        }
    }
    debug_assert_eq!(current.signs, final_space.signs);
    let final_pos = block_of(&final_space);

    // interned horizontal prefixes μ and vertical tails ζ of the final paths, per block
    let mut mu_ids: HashMap<&[usize], usize> = HashMap::new();
    let mut zeta_ids: HashMap<&[usize], usize> = HashMap::new();
    let mut block_rows: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for (r, p) in final_space.paths.iter().enumerate() {
        let nm = mu_ids.len();
        let mu = *mu_ids.entry(&p[..l]).or_insert(nm);
        let nz = zeta_ids.len();
        let zeta = *zeta_ids.entry(&p[l..]).or_insert(nz);
        let rows = block_rows.entry(final_space.ends[r]).or_default();
        debug_assert_eq!(rows.len(), final_pos[r]);
        rows.push((mu, zeta));
    }

    // start columns grouped by vertical prefix, keyed by their horizontal tail
    let mut by_prefix: Vec<HashMap<&[usize], usize>> = vec![HashMap::new(); vspace.len()];
    for (b, p) in start_space.paths.iter().enumerate() {
        let a = vspace.find(&p[..k]).expect("prefix");
        by_prefix[a].insert(&p[k..], b);
    }
    let mut worst: f64 = 0.0;
    for a in 0..vspace.len() {
        for a2 in 0..vspace.len() {
            if vspace.ends[a] != vspace.ends[a2] {
                continue;
            }
            // image of |a><a2| ⊗ 1, block by block
            let mut pairs: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
            for (tail, &b) in &by_prefix[a] {
                let b2 = by_prefix[a2][tail];
                pairs.entry(start_space.ends[b]).or_default().push((start_pos[b], start_pos[b2]));
            }
            for (w, cols) in pairs {
                let t = &blocks[&w];
                let left = DMatrix::from_fn(t.nrows(), cols.len(), |r, c| t[(r, cols[c].0)]);
                let right = DMatrix::from_fn(t.nrows(), cols.len(), |r, c| t[(r, cols[c].1)]);
                let e = &left * right.adjoint();
                let rows = &block_rows[&w];
                // must equal δ_{μμ'} F(ζ, ζ'), with F independent of μ
                let mut reference: HashMap<(usize, usize), C> = HashMap::new();
                for (r, &(mu, zeta)) in rows.iter().enumerate() {
                    for (c, &(mu2, zeta2)) in rows.iter().enumerate() {
                        let val = e[(r, c)];
                        if mu != mu2 {
                            worst = worst.max(val.norm());
                            continue;
                        }
                        match reference.get(&(zeta, zeta2)) {
                            Some(&refv) => worst = worst.max((val - refv).norm()),
                            None => {
                                reference.insert((zeta, zeta2), val);
                            }
                        }
                    }
                }
            }
        }
    }
    worst
}
