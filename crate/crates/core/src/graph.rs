//! SU(3) fusion graphs, Perron-Frobenius data and Ocneanu cells.
//!
//! Edges are directed. A path in the reverse graph is written as a sequence of
//! edges of the original graph traversed backwards, so every quantity here is
//! keyed by edges of the original graph only.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantum integer `[m]` at `q = e^{iπ/n}`.
pub fn qnum(m: i64, n: u32) -> f64 {
    let h = PI / f64::from(n);
    (m as f64 * h).sin() / h.sin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colour: Option<u8>,
}

#[derive(Clone, Debug)]
pub struct FusionGraph {
    pub name: String,
    pub n: u32,
    pub vertices: Vec<GraphVertex>,
    /// `(source, range)` pairs; parallel edges are allowed.
    pub edges: Vec<(usize, usize)>,
    pub star: usize,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    #[serde(default)]
    name: Option<String>,
    vertices: Vec<GraphVertex>,
    edges: Vec<(String, String)>,
    star: String,
    n: u32,
}

impl FusionGraph {
    pub fn new(
        name: impl Into<String>,
        n: u32,
        vertices: Vec<GraphVertex>,
        edges: Vec<(usize, usize)>,
        star: usize,
    ) -> Result<Self> {
        let nv = vertices.len();
        if star >= nv {
            return Err(Error::Input(format!("star index {star} out of range")));
        }
        let mut out = vec![Vec::new(); nv];
        let mut inc = vec![Vec::new(); nv];
        for (e, &(s, r)) in edges.iter().enumerate() {
            if s >= nv || r >= nv {
                return Err(Error::Input(format!("edge {e} has an endpoint out of range")));
            }
            out[s].push(e);
            inc[r].push(e);
        }
        for (e, &(s, r)) in edges.iter().enumerate() {
            if let (Some(a), Some(b)) = (vertices[s].colour, vertices[r].colour) {
                if (a + 1) % 3 != b % 3 {
                    return Err(Error::Input(format!(
                        "edge {e} goes from colour {a} to colour {b}"
                    )));
                }
            }
        }
        Ok(FusionGraph { name: name.into(), n, vertices, edges, star, out, inc })
    }

    /// The graph `A^(n)`: dominant weights `(a,b)` with `a+b <= n-3`.
    pub fn build_a(n: u32) -> Result<Self> {
        if n < 4 {
            return Err(Error::Domain(format!("A^(n) needs n >= 4, got {n}")));
        }
        let top = (n - 3) as i64;
        let mut weights = Vec::new();
        for s in 0..=top {
            for a in (0..=s).rev() {
                weights.push((a, s - a));
            }
        }
        let index: HashMap<(i64, i64), usize> =
            weights.iter().enumerate().map(|(k, &w)| (w, k)).collect();
        let vertices = weights
            .iter()
            .map(|&(a, b)| GraphVertex {
                id: format!("({a},{b})"),
                colour: Some((a - b).rem_euclid(3) as u8),
            })
            .collect();
        let mut edges = Vec::new();
        for (k, &(a, b)) in weights.iter().enumerate() {
            for (da, db) in [(1, 0), (-1, 1), (0, -1)] {
                if let Some(&t) = index.get(&(a + da, b + db)) {
                    edges.push((k, t));
                }
            }
        }
        FusionGraph::new(format!("A({n})"), n, vertices, edges, 0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GraphJson = serde_json::from_str(text)?;
        let index: HashMap<&str, usize> =
            g.vertices.iter().enumerate().map(|(k, v)| (v.id.as_str(), k)).collect();
        let look = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::Input(format!("unknown vertex id {id:?}")))
        };
        let edges = g
            .edges
            .iter()
            .map(|(s, r)| Ok((look(s)?, look(r)?)))
            .collect::<Result<Vec<_>>>()?;
        let star = look(&g.star)?;
        let name = g.name.clone().unwrap_or_else(|| "graph".into());
        FusionGraph::new(name, g.n, g.vertices, edges, star)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let id = |k: usize| self.vertices[k].id.clone();
        serde_json::to_value(GraphJson {
            name: Some(self.name.clone()),
            vertices: self.vertices.clone(),
            edges: self.edges.iter().map(|&(s, r)| (id(s), id(r))).collect(),
            star: id(self.star),
            n: self.n,
        })
        .expect("graph serializes")
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn source(&self, e: usize) -> usize {
        self.edges[e].0
    }

    pub fn range(&self, e: usize) -> usize {
        self.edges[e].1
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let nv = self.num_vertices();
        let mut m = DMatrix::zeros(nv, nv);
        for &(s, r) in &self.edges {
            m[(s, r)] += 1.0;
        }
        m
    }

    pub fn is_normal(&self) -> bool {
        let d = self.adjacency();
        let t = d.transpose();
        (&d * &t - &t * &d).amax() == 0.0
    }

    pub fn is_three_coloured(&self) -> bool {
        self.vertices.iter().all(|v| v.colour.is_some())
    }

    /// Undirected distance from `∗` to the farthest vertex of the subgraph
    /// spanned by vertices whose colour passes `keep`.
    pub fn depth_within(&self, keep: impl Fn(Option<u8>) -> bool) -> usize {
        let nv = self.num_vertices();
        let mut dist = vec![usize::MAX; nv];
        if !keep(self.vertices[self.star].colour) {
            return 0;
        }
        dist[self.star] = 0;
        let mut queue = std::collections::VecDeque::from([self.star]);
        while let Some(v) = queue.pop_front() {
            let nbrs = self.out[v]
                .iter()
                .map(|&e| self.range(e))
                .chain(self.inc[v].iter().map(|&e| self.source(e)));
            for w in nbrs.collect::<Vec<_>>() {
                if dist[w] == usize::MAX && keep(self.vertices[w].colour) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist.into_iter().filter(|&d| d != usize::MAX).max().unwrap_or(0)
    }

    /// Undirected depth of the whole graph from `∗`.
    pub fn depth(&self) -> usize {
        self.depth_within(|_| true)
    }

    /// Depth of the part spanned by colours 0 and 1.
    pub fn depth01(&self) -> usize {
        self.depth_within(|c| matches!(c, Some(0) | Some(1)))
    }

    /// Vertices of each colour, in vertex order.
    pub fn colour_classes(&self) -> Result<[Vec<usize>; 3]> {
        let mut classes: [Vec<usize>; 3] = Default::default();
        for (k, v) in self.vertices.iter().enumerate() {
            let c = v.colour.ok_or_else(|| Error::Input(format!("vertex {} has no colour", v.id)))?;
            classes[usize::from(c % 3)].push(k);
        }
        Ok(classes)
    }

    /// Blocks `(Δ01, Δ12, Δ20)` of the adjacency matrix for the given orders
    /// of the three colour classes.
    pub fn colour_blocks(&self, order: &[Vec<usize>; 3]) -> [DMatrix<f64>; 3] {
        let d = self.adjacency();
        let block = |a: &Vec<usize>, b: &Vec<usize>| {
            DMatrix::from_fn(a.len(), b.len(), |r, c| d[(a[r], b[c])])
        };
        [block(&order[0], &order[1]), block(&order[1], &order[2]), block(&order[2], &order[0])]
    }

    /// Closed loops of length three, each listed once as `[e1, e2, e3]` with
    /// `r(e1) = s(e2)`, `r(e2) = s(e3)`, `r(e3) = s(e1)` and the smallest edge first.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut tris = Vec::new();
        for e1 in 0..self.edges.len() {
            for &e2 in &self.out[self.range(e1)] {
                for &e3 in &self.out[self.range(e2)] {
                    if self.range(e3) == self.source(e1) && e1 < e2 && e1 < e3 {
                        tris.push([e1, e2, e3]);
                    }
                }
            }
        }
        tris
    }

    /// Edge paths of length two from `u` to `w`.
    pub fn two_paths(&self, u: usize, w: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &a in &self.out[u] {
            for &b in &self.out[self.range(a)] {
                if self.range(b) == w {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PfData {
    pub eigenvalue: f64,
    pub phi: Vec<f64>,
    pub residual: f64,
}

/// Perron-Frobenius eigenvector, normalized so that `φ_∗ = 1`.
///
/// Uses the symmetric eigensolver on `Δ + Δᵀ`, which has the same
/// Perron-Frobenius vector as `Δ` when `Δ` is normal; the result is then
/// checked against `Δ` itself.
pub fn pf_eigen(g: &FusionGraph) -> Result<PfData> {
    let d = g.adjacency();
    let sym = &d + d.transpose();
    let eig = SymmetricEigen::new(sym);
    let (top, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Solver("empty graph".into()))?;
    let mut v: DVector<f64> = eig.eigenvectors.column(top).into_owned();
    if v[g.star] < 0.0 {
        v = -v;
    }
    if v.iter().any(|&x| x <= 0.0) {
        return Err(Error::Solver("Perron-Frobenius vector is not positive".into()));
    }
    v /= v[g.star];
    let lambda = (&d * &v).dot(&v) / v.dot(&v);
    let residual = (&d * &v - &v * lambda).amax();
    if residual > 1e-10 {
        return Err(Error::Solver(format!(
            "eigen-residual {residual:e}: adjacency matrix is not normal"
        )));
    }
    Ok(PfData { eigenvalue: lambda, phi: v.iter().copied().collect(), residual })
}

/// An assignment of a complex weight to every triangle of a graph.
#[derive(Clone, Debug)]
pub struct CellSystem {
    pub triangles: Vec<[usize; 3]>,
    pub values: Vec<Complex64>,
    index: HashMap<[usize; 3], usize>,
}

impl CellSystem {
    pub fn new(triangles: Vec<[usize; 3]>, values: Vec<Complex64>) -> Self {
        let index = triangles.iter().enumerate().map(|(k, &t)| (t, k)).collect();
        CellSystem { triangles, values, index }
    }

    /// `W` of the closed loop `e1 e2 e3` in any rotation; zero if it is not a triangle.
    pub fn w(&self, e1: usize, e2: usize, e3: usize) -> Complex64 {
        let key = if e1 < e2 && e1 < e3 {
            [e1, e2, e3]
        } else if e2 < e3 {
            [e2, e3, e1]
        } else {
            [e3, e1, e2]
        };
        self.index.get(&key).map_or(Complex64::new(0.0, 0.0), |&k| self.values[k])
    }

    /// Multiplies each cell by the phases of its three edges.
    pub fn rephase(&self, edge_phase: &[f64]) -> CellSystem {
        let values = self
            .triangles
            .iter()
            .zip(&self.values)
            .map(|(t, &v)| v * Complex64::from_polar(1.0, t.iter().map(|&e| edge_phase[e]).sum()))
            .collect();
        CellSystem::new(self.triangles.clone(), values)
    }

    pub fn to_json(&self, g: &FusionGraph) -> serde_json::Value {
        let cells: Vec<_> = self
            .triangles
            .iter()
            .zip(&self.values)
            .map(|(t, v)| {
                let ids: Vec<&str> = t.iter().map(|&e| g.vertices[g.source(e)].id.as_str()).collect();
                serde_json::json!({ "loop": ids, "edges": t, "re": v.re, "im": v.im })
            })
            .collect();
        serde_json::Value::Array(cells)
    }

    /// Reads the list written by [`CellSystem::to_json`], bare or under a
    /// `cells` key. Each loop is given by its three vertex ids; the `edges`
    /// field is ignored.
    pub fn from_json(g: &FusionGraph, v: &serde_json::Value) -> Result<CellSystem> {
        let items = v.get("cells").unwrap_or(v).as_array().ok_or_else(|| Error::Input("cells must be a list".into()))?;
        let tris = g.triangles();
        let mut values = vec![Complex64::new(0.0, 0.0); tris.len()];
        let index: HashMap<[usize; 3], usize> = tris.iter().enumerate().map(|(k, &t)| (t, k)).collect();
        for item in items {
            let ids = item["loop"].as_array().ok_or_else(|| Error::Input("cell needs a `loop` of three vertex ids".into()))?;
            if ids.len() != 3 {
                return Err(Error::Input("cell loops have three vertices".into()));
            }
            let verts = ids
                .iter()
                .map(|x| {
                    let id = x.as_str().unwrap_or_default();
                    g.vertex_index(id).ok_or_else(|| Error::Input(format!("unknown vertex `{id}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut edges = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (verts[k], verts[(k + 1) % 3]);
                edges[k] = *g
                    .out_edges(a)
                    .iter()
                    .find(|&&e| g.range(e) == b)
                    .ok_or_else(|| Error::Input(format!("no edge {} -> {}", g.vertices[a].id, g.vertices[b].id)))?;
            }
            let start = (0..3).min_by_key(|&k| edges[k]).expect("three edges");
            let key = [edges[start], edges[(start + 1) % 3], edges[(start + 2) % 3]];
            let k = *index.get(&key).ok_or_else(|| Error::Input("cell loop is not a triangle".into()))?;
            values[k] = Complex64::new(item["re"].as_f64().unwrap_or(0.0), item["im"].as_f64().unwrap_or(0.0));
        }
        Ok(CellSystem::new(tris, values))
    }
}

/// Residual vectors of the two frame equations.
pub struct FrameResiduals {
    pub type_one: Vec<Complex64>,
    pub type_two: Vec<Complex64>,
}

impl FrameResiduals {
    pub fn max_type_one(&self) -> f64 {
        self.type_one.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_type_two(&self) -> f64 {
        self.type_two.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.max_type_one().max(self.max_type_two())
    }
}

/// Evaluates both frame equations.
///
/// Type I: for edges `λ, λ'` with common endpoints,
/// `Σ W(λρ₃ρ₄) conj W(λ'ρ₃ρ₄) = [2] φ_{s(λ)} φ_{r(λ)} δ_{λλ'}`.
///
/// Type II: for edges `a: u→x`, `b: w→x`, `c: u→y`, `d: w→y`,
/// `Σ W(a p₂ p₁) conj W(e b p₂) conj W(c f p₁) W(f e d) / (φ_u φ_z φ_w √(φ_x φ_y))
///  = δ_{ac}δ_{bd} + δ_{ab}δ_{cd} √(φ_x φ_y)/φ_u`,
/// summed over `z` and edges `p₁: z→u`, `p₂: x→z`, `e: z→w`, `f: y→z`.
pub fn frame_residuals(g: &FusionGraph, phi: &[f64], cells: &CellSystem) -> FrameResiduals {
    let d2 = qnum(2, g.n);
    let zero = Complex64::new(0.0, 0.0);
    let mut type_one = Vec::new();
    for (l, &(s, r)) in g.edges.iter().enumerate() {
        for &l2 in &g.out[s] {
            if g.range(l2) != r || l2 < l {
                continue;
            }
            let mut acc = zero;
            for (p, q) in g.two_paths(r, s) {
                acc += cells.w(l, p, q) * cells.w(l2, p, q).conj();
            }
            if l == l2 {
                acc -= d2 * phi[s] * phi[r];
            }
            type_one.push(acc);
        }
    }
    let nv = g.num_vertices();
    let mut type_two = Vec::new();
    for u in 0..nv {
        for w in 0..nv {
            let tops: Vec<(usize, usize)> = g.out[u]
                .iter()
                .flat_map(|&a| g.inc[g.range(a)].iter().filter(|&&b| g.source(b) == w).map(move |&b| (a, b)))
                .collect();
            for &(a, b) in &tops {
                let x = g.range(a);
                for &(c, dd) in &tops {
                    let y = g.range(c);
                    let mut acc = zero;
                    for &p2 in &g.out[x] {
                        let z = g.range(p2);
                        let scale = 1.0 / (phi[u] * phi[z] * phi[w] * (phi[x] * phi[y]).sqrt());
                        for &p1 in g.out[z].iter().filter(|&&p| g.range(p) == u) {
                            let left = cells.w(a, p2, p1);
                            if left == zero {
                                continue;
                            }
                            for &e in g.out[z].iter().filter(|&&e| g.range(e) == w) {
                                let top = left * cells.w(e, b, p2).conj();
                                if top == zero {
                                    continue;
                                }
                                for &f in g.inc[z].iter().filter(|&&f| g.source(f) == y) {
                                    acc += top * cells.w(c, f, p1).conj() * cells.w(f, e, dd) * scale;
                                }
                            }
                        }
                    }
                    if a == c && b == dd {
                        acc -= 1.0;
                    }
                    if a == b && c == dd {
                        acc -= (phi[x] * phi[y]).sqrt() / phi[u];
                    }
                    type_two.push(acc);
                }
            }
        }
    }
    FrameResiduals { type_one, type_two }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub restarts: usize,
    pub iterations: usize,
    pub type_one: f64,
    pub type_two: f64,
}

fn unpack(theta: &[f64]) -> Vec<Complex64> {
    theta.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

fn residual_vector(g: &FusionGraph, phi: &[f64], tris: &[[usize; 3]], theta: &[f64]) -> DVector<f64> {
    let cells = CellSystem::new(tris.to_vec(), unpack(theta));
    let r = frame_residuals(g, phi, &cells);
    let flat: Vec<f64> =
        r.type_one.iter().chain(&r.type_two).flat_map(|z| [z.re, z.im]).collect();
    DVector::from_vec(flat)
}

/// Levenberg-Marquardt from one starting point; returns the parameters,
/// the final maximum residual and the iteration count.
fn levenberg_marquardt(
    g: &FusionGraph,
    phi: &[f64],
    tris: &[[usize; 3]],
    mut theta: Vec<f64>,
    tol: f64,
) -> (Vec<f64>, f64, usize) {
    let np = theta.len();
    let mut r = residual_vector(g, phi, tris, &theta);
    let mut mu = 1e-3;
    let h = 1e-7;
    for it in 0..200 {
        let worst = r.amax();
        if worst < tol {
            return (theta, worst, it);
        }
        let mut jac = DMatrix::zeros(r.len(), np);
        for p in 0..np {
            let mut plus = theta.clone();
            let mut minus = theta.clone();
            plus[p] += h;
            minus[p] -= h;
            let col = (residual_vector(g, phi, tris, &plus) - residual_vector(g, phi, tris, &minus)) / (2.0 * h);
            jac.set_column(p, &col);
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        let cost = r.norm_squared();
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += mu * (1.0 + jtj[(k, k)]);
            }
            let Some(chol) = a.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            let rt = residual_vector(g, phi, tris, &trial);
            if rt.norm_squared() < cost {
                theta = trial;
                r = rt;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            return (theta, r.amax(), it);
        }
    }
    let worst = r.amax();
    (theta, worst, 200)
}

/// Solves the frame equations numerically, trying seeded random starting
/// points in parallel until one reaches `tol`.
pub fn solve_cells(g: &FusionGraph, pf: &PfData, tol: f64, seed: u64) -> Result<(CellSystem, SolveReport)> {
    let tris = g.triangles();
    if tris.is_empty() {
        let cells = CellSystem::new(Vec::new(), Vec::new());
        let r = frame_residuals(g, &pf.phi, &cells);
        let report = SolveReport { restarts: 0, iterations: 0, type_one: r.max_type_one(), type_two: r.max_type_two() };
        return Ok((cells, report));
    }
    let batch = 8;
    for round in 0..4u64 {
        let results: Vec<_> = (0..batch)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(round * batch + k));
                let theta: Vec<f64> = tris
                    .iter()
                    .flat_map(|t| {
                        let scale: f64 = t.iter().map(|&e| pf.phi[g.source(e)]).product::<f64>().powf(1.0 / 3.0);
                        [scale * rng.gen_range(0.2..1.5), scale * rng.gen_range(-0.5..0.5)]
                    })
                    .collect();
                levenberg_marquardt(g, &pf.phi, &tris, theta, tol)
            })
            .collect();
        if let Some((k, (theta, _, iters))) =
            results.into_iter().enumerate().find(|(_, r)| r.1 < tol)
        {
            let cells = CellSystem::new(tris.clone(), unpack(&theta));
            let r = frame_residuals(g, &pf.phi, &cells);
            let report = SolveReport {
                restarts: (round * batch) as usize + k + 1,
                iterations: iters,
                type_one: r.max_type_one(),
                type_two: r.max_type_two(),
            };
            return Ok((cells, report));
        }
    }
    Err(Error::Solver(format!("no cell system reached residual {tol:e} on {}", g.name)))
}

/// The Hecke representation weights `𝒰^{ρ₁ρ₂}_{ρ₃ρ₄}`, stored for pairs of
/// two-step paths with common endpoints.
#[derive(Clone, Debug)]
pub struct Boltzmann {
    entries: HashMap<[usize; 4], Complex64>,
}

impl Boltzmann {
    pub fn get(&self, r1: usize, r2: usize, r3: usize, r4: usize) -> Complex64 {
        self.entries.get(&[r1, r2, r3, r4]).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn boltzmann_u(g: &FusionGraph, phi: &[f64], cells: &CellSystem) -> Boltzmann {
    let mut entries = HashMap::new();
    let nv = g.num_vertices();
    for u in 0..nv {
        for w in 0..nv {
            let paths = g.two_paths(u, w);
            let lambdas: Vec<usize> = g.out[w].iter().copied().filter(|&l| g.range(l) == u).collect();
            for &(r1, r2) in &paths {
                for &(r3, r4) in &paths {
                    let v: Complex64 = lambdas
                        .iter()
                        .map(|&l| cells.w(l, r3, r4) * cells.w(l, r1, r2).conj())
                        .sum::<Complex64>()
                        / (phi[u] * phi[w]);
                    entries.insert([r1, r2, r3, r4], v);
                }
            }
        }
    }
    Boltzmann { entries }
}
