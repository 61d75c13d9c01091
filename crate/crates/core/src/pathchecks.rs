//! Numerical suites on the path side: relations among `U` and `e`, the
//! connection axioms, flatness, and the images of webs under `Z`.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::algebra::normalized_trace;
use crate::error::{Error, Result};
use crate::graph::{qnum, CellSystem};
use crate::hecke::{spanning_words, Letter, Space};
use crate::pathalg::{
    connection, dims, dims_enumerated, flatness_check, level_signs, make_e, make_u, present_z, FlatReport, PathModel,
    PathOp, StripWord,
};
use crate::report::{timed, Check};
use crate::rewrite::Normalizer;
use crate::web::Sign;

type C = Complex64;

pub const TOL: f64 = 1e-10;

fn r(x: f64) -> C {
    C::new(x, 0.0)
}

fn close(id: String, f: impl FnOnce() -> Result<f64>) -> Check {
    timed(id, || -> Result<(bool, String)> {
        let d = f()?;
        Ok((d < TOL, format!("residual {d:.3e}")))
    })
}

/// `w_i` of `V_m` as an operator on `B_{0,m}`.
fn u_col(model: &PathModel, m: usize, i: usize) -> Result<PathOp> {
    make_u(model, 0, m, m - i)
}

fn prod(factors: &[&PathOp]) -> Result<PathOp> {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = out.mul(f)?;
    }
    Ok(out)
}

/// Hecke relations and the SU(3) condition for the `U` in `B_{0,m}`.
pub fn hecke(model: &PathModel, m: usize) -> Vec<Check> {
    let d = model.delta();
    let mut out = Vec::new();
    for i in 1..m {
        out.push(close(format!("path.hecke.H1.m{m}.i{i}"), || {
            let u = u_col(model, m, i)?;
            u.mul(&u)?.distance(&u.scale(r(d)))
        }));
        for j in i + 2..m {
            out.push(close(format!("path.hecke.H2.m{m}.i{i}.j{j}"), || {
                let (a, b) = (u_col(model, m, i)?, u_col(model, m, j)?);
                a.mul(&b)?.distance(&b.mul(&a)?)
            }));
        }
        if i + 1 < m {
            out.push(close(format!("path.hecke.H3.m{m}.i{i}"), || {
                let (a, b) = (u_col(model, m, i)?, u_col(model, m, i + 1)?);
                let lhs = prod(&[&a, &b, &a])?.sub(&a)?;
                let rhs = prod(&[&b, &a, &b])?.sub(&b)?;
                lhs.distance(&rhs)
            }));
        }
        if i + 2 < m {
            out.push(close(format!("path.su3.m{m}.i{i}"), || {
                let (a, b, c) = (u_col(model, m, i)?, u_col(model, m, i + 1)?, u_col(model, m, i + 2)?);
                let left = a.sub(&prod(&[&c, &b, &a])?)?.add(&b)?;
                let right = prod(&[&b, &c, &b])?.sub(&b)?;
                Ok(left.mul(&right)?.norm_max())
            }));
        }
    }
    out
}

/// Jones relations for the `e_l` in `B_{i,0}`, and their traces.
pub fn jones(model: &PathModel, i: usize) -> Vec<Check> {
    let a = model.alpha();
    let mut out = Vec::new();
    for l in 1..i {
        out.push(close(format!("path.jones.idempotent.i{i}.l{l}"), || {
            let e = make_e(model, i, 0, l)?;
            Ok(e.mul(&e)?.distance(&e)?.max(e.distance(&e.adjoint())?))
        }));
        if l + 1 < i {
            out.push(close(format!("path.jones.braid.i{i}.l{l}"), || {
                let (e, f) = (make_e(model, i, 0, l)?, make_e(model, i, 0, l + 1)?);
                let x = prod(&[&e, &f, &e])?.distance(&e.scale(r(a.powi(-2))))?;
                let y = prod(&[&f, &e, &f])?.distance(&f.scale(r(a.powi(-2))))?;
                Ok(x.max(y))
            }));
        }
        for k in l + 2..i {
            out.push(close(format!("path.jones.far.i{i}.l{l}.k{k}"), || {
                let (e, f) = (make_e(model, i, 0, l)?, make_e(model, i, 0, k)?);
                e.mul(&f)?.distance(&f.mul(&e)?)
            }));
        }
        out.push(close(format!("path.jones.trace.i{i}.l{l}"), || {
            Ok((make_e(model, i, 0, l)?.trace(model) - a.powi(-2)).norm())
        }));
    }
    out
}

/// `Z(W_{-k}) = U_{-k}` and `Z(f_l) = α e_l` for every level with `i + j <= max`.
pub fn generators(model: &PathModel, max: usize) -> Vec<Check> {
    let a = model.alpha();
    let mut out = Vec::new();
    for total in 1..=max {
        for i in 0..=total {
            let j = total - i;
            for k in usize::from(i == 0)..j {
                out.push(close(format!("path.Z_W.i{i}.j{j}.k{k}"), || {
                    present_z(model, &StripWord::w(i, j, k)?, &[])?.distance(&make_u(model, i, j, k)?)
                }));
            }
            for l in 1..i {
                out.push(close(format!("path.Z_f.i{i}.j{j}.l{l}"), || {
                    let e = make_e(model, i, j, l)?.scale(r(a));
                    present_z(model, &StripWord::f(i, j, l)?, &[])?.distance(&e)
                }));
            }
        }
    }
    out
}

/// Closing a labelled rectangle gives `[3]^k tr`, and closing its last
/// string gives the trace-preserving conditional expectation.
pub fn trace_and_expectation(model: &PathModel, trials: usize, seed: u64) -> Vec<Check> {
    let a = model.alpha();
    let levels = [(1usize, 1usize), (2, 1), (3, 0), (2, 2), (1, 3), (4, 0)];
    let mut out = Vec::new();
    for (i, j) in levels {
        let space = model.level(i, j);
        let k = space.signs.len();
        out.push(close(format!("path.closure_trace.i{i}.j{j}"), || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let word = StripWord::closure(&space.signs);
            let mut worst: f64 = 0.0;
            for _ in 0..trials {
                let x = PathOp::random(space.clone(), &mut rng);
                let z = present_z(model, &word, std::slice::from_ref(&x))?;
                worst = worst.max((z.m[(0, 0)] * a.powi(-(k as i32)) - x.trace(model)).norm());
            }
            Ok(worst)
        }));
        out.push(close(format!("path.expectation.i{i}.j{j}"), || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let word = StripWord::right_expectation(&space.signs)?;
            let small = model.space(&space.signs[..k - 1]);
            let last = &space.signs[k - 1..];
            let ex = |y: &PathOp| -> Result<PathOp> { Ok(present_z(model, &word, std::slice::from_ref(y))?.scale(r(1.0 / a))) };
            let mut worst: f64 = 0.0;
            for _ in 0..trials {
                let x = PathOp::random(space.clone(), &mut rng);
                let p = PathOp::random(small.clone(), &mut rng);
                let q = PathOp::random(small.clone(), &mut rng);
                let (pe, qe) = (p.extend_right(model, last)?, q.extend_right(model, last)?);
                let lhs = ex(&prod(&[&pe, &x, &qe])?)?;
                let rhs = prod(&[&p, &ex(&x)?, &q])?;
                worst = worst.max(lhs.distance(&rhs)?);
                // tr(E(x) y) = tr(x y) for y in the smaller algebra
                worst = worst.max((ex(&x)?.mul(&p)?.trace(model) - x.mul(&pe)?.trace(model)).norm());
            }
            Ok(worst)
        }));
    }
    out
}

/// Unitarity and the commuting-square identity for both parities, and the
/// even connection read off from a crossing.
pub fn connection_suite(model: &PathModel) -> Vec<Check> {
    let g = &model.graph;
    let n = model.n();
    let mut out = Vec::new();
    for odd in [false, true] {
        let parity = if odd { "odd" } else { "even" };
        let conn = connection(model, odd);
        out.push(close(format!("connection.unitarity.{parity}.n{n}"), || Ok(conn.unitarity_residual(g))));
        out.push(close(format!("connection.commuting_square.{parity}.n{n}"), || {
            Ok(conn.commuting_square_residual(g, &model.pf.phi))
        }));
    }
    out.push(close(format!("connection.crossing.n{n}"), || {
        let word = StripWord::new(vec![Sign::Minus, Sign::Minus], vec!["CROSS(1)".parse()?]);
        let x = present_z(model, &word, &[])?;
        let conn = connection(model, false);
        let mut worst: f64 = 0.0;
        for (a, pa) in x.top.paths.iter().enumerate() {
            for (b, pb) in x.bottom.paths.iter().enumerate() {
                worst = worst.max((x.m[(a, b)] - conn.get(pa[0], pa[1], pb[0], pb[1])).norm());
            }
        }
        Ok(worst)
    }));
    out
}

/// The flatness bounds `2 d_01` and `2 (d + 3)`.
pub fn flat_bounds(model: &PathModel) -> (usize, usize) {
    (2 * model.graph.depth01(), 2 * (model.graph.depth() + 3))
}

/// Cells with one value scaled by `1.05`: a connection that must not be flat.
pub fn perturbed(model: &PathModel) -> PathModel {
    let mut values = model.cells.values.clone();
    if let Some(v) = values.first_mut() {
        *v *= 1.05;
    }
    model.with_cells(CellSystem::new(model.cells.triangles.clone(), values))
}

/// Flatness within the standard bounds, with the perturbed control.
pub fn flatness_suite(model: &PathModel) -> (Vec<Check>, FlatReport, FlatReport) {
    let (vmax, hmax) = flat_bounds(model);
    flatness_suite_with(model, vmax, hmax)
}

pub fn flatness_suite_with(model: &PathModel, vmax: usize, hmax: usize) -> (Vec<Check>, FlatReport, FlatReport) {
    let n = model.n();
    let start = Instant::now();
    let report = flatness_check(model, vmax, hmax);
    let flat = Check {
        id: format!("flatness.n{n}.v{vmax}.h{hmax}"),
        status: status(report.max_residual < 1e-8),
        detail: format!("max residual {:.3e}", report.max_residual),
        runtime_ms: start.elapsed().as_millis(),
    };
    let start = Instant::now();
    let control = flatness_check(&perturbed(model), vmax, hmax);
    // a single path per level leaves nothing to detect
    let trivial = (1..=vmax).all(|k| (1..=hmax).all(|l| model.level(k, l).len() <= 1));
    let ctrl = Check {
        id: format!("flatness.control.n{n}"),
        status: status(trivial || control.max_residual > 1e-4),
        detail: if trivial {
            "every path space is one-dimensional; no perturbation is visible".into()
        } else {
            format!("perturbed max residual {:.3e}", control.max_residual)
        },
        runtime_ms: start.elapsed().as_millis(),
    };
    (vec![flat, ctrl], report, control)
}

fn status(ok: bool) -> crate::report::Status {
    if ok {
        crate::report::Status::Pass
    } else {
        crate::report::Status::Fail
    }
}

/// `Z` of the hexagon `f_1^(3)` in `B_{3,0}`.
pub fn hexagon_image(model: &PathModel) -> Result<PathOp> {
    present_z(model, &StripWord::f3(3, 0, 1)?, &[])
}

/// Path of `B_{3,0}` through the given vertex ids.
fn path_by_ids(model: &PathModel, x: &PathOp, ids: &[&str]) -> Result<usize> {
    let g = &model.graph;
    x.top
        .paths
        .iter()
        .position(|p| (0..=3).all(|s| g.vertices[x.top.vertex_after(g, p, s)].id == ids[s]))
        .ok_or_else(|| Error::Input(format!("no path {ids:?}")))
}

/// Entries of `Z(f_1^(3))` on `A^(n)`, `n >= 6`, against the closed forms.
/// Off-diagonal entries are compared in modulus, as they depend on the gauge of the cells.
pub fn hexagon_entries(model: &PathModel) -> Result<Vec<(String, C, f64)>> {
    let n = model.n();
    let q = |k| qnum(k, n);
    let h = hexagon_image(model)?;
    let p1 = path_by_ids(model, &h, &["(0,0)", "(1,0)", "(0,0)", "(1,0)"])?;
    let p2 = path_by_ids(model, &h, &["(0,0)", "(1,0)", "(1,1)", "(1,0)"])?;
    let p3 = path_by_ids(model, &h, &["(0,0)", "(1,0)", "(1,1)", "(0,2)"])?;
    let p4 = path_by_ids(model, &h, &["(0,0)", "(1,0)", "(1,1)", "(2,1)"])?;
    let expect = [
        ("p1,p1", p1, p1, q(2).powi(3) / q(3)),
        ("p1,p2", p1, p2, (q(2).powi(3) * q(4)).sqrt() / q(3)),
        ("p2,p1", p2, p1, (q(2).powi(3) * q(4)).sqrt() / q(3)),
        ("p2,p2", p2, p2, q(4) / q(3)),
        ("p3,p3", p3, p3, q(2)),
        ("p4,p4", p4, p4, 0.0),
    ];
    let mut out: Vec<(String, C, f64)> = expect.iter().map(|&(name, a, b, v)| (name.to_string(), h.m[(a, b)], v)).collect();
    let listed: Vec<(usize, usize)> = expect.iter().map(|e| (e.1, e.2)).collect();
    let mut rest: f64 = 0.0;
    for a in 0..h.top.len() {
        for b in 0..h.top.len() {
            if !listed.contains(&(a, b)) {
                rest = rest.max(h.m[(a, b)].norm());
            }
        }
    }
    out.push(("others".into(), r(rest), 0.0));
    Ok(out)
}

/// `Z(f_1^(3))` in terms of the images `αe_l` of the cup-caps `f_l`:
/// `α1 - f_1 - f_2 + α f_1 f_2 + α f_2 f_1`, which is the form it takes on `A^(5)`.
pub fn hexagon_formula(model: &PathModel) -> Result<PathOp> {
    let a = model.alpha();
    let f1 = make_e(model, 3, 0, 1)?.scale(r(a));
    let f2 = make_e(model, 3, 0, 2)?.scale(r(a));
    let one = PathOp::identity(model.level(3, 0));
    one.scale(r(a)).sub(&f1)?.sub(&f2)?.add(&f1.mul(&f2)?.scale(r(a)))?.add(&f2.mul(&f1)?.scale(r(a)))
}

pub fn hexagon_suite(model: &PathModel) -> Vec<Check> {
    let n = model.n();
    if n == 5 {
        return vec![close("hexagon.formula.n5".into(), || hexagon_image(model)?.distance(&hexagon_formula(model)?))];
    }
    if n < 6 {
        return vec![];
    }
    vec![close(format!("hexagon.entries.n{n}"), || {
        let mut worst: f64 = 0.0;
        for (name, got, want) in hexagon_entries(model)? {
            let d = if name.starts_with("p1,p2") || name.starts_with("p2,p1") { (got.norm() - want).abs() } else { (got - want).norm() };
            worst = worst.max(d);
        }
        Ok(worst)
    })]
}

/// Strip word of a generator letter at level `(i,j)`.
pub fn letter_word(i: usize, j: usize, letter: Letter) -> Result<StripWord> {
    match letter {
        Letter::One => Ok(StripWord::new(level_signs(i, j), vec![])),
        Letter::W(k) => StripWord::w(i, j, k),
        Letter::F(l) => StripWord::f(i, j, l),
        Letter::F3(l) => StripWord::f3(i, j, l),
    }
}

/// `Z` of a word in the generators of `P_{i,j}`.
pub fn z_of_word(model: &PathModel, i: usize, j: usize, letters: &[Letter]) -> Result<PathOp> {
    let mut out = PathOp::identity(model.level(i, j));
    for l in letters {
        out = out.mul(&present_z(model, &letter_word(i, j, *l)?, &[])?)?;
    }
    Ok(out)
}

/// Numerical rank of a set of operators on one space.
pub fn op_rank(ops: &[PathOp]) -> usize {
    if ops.is_empty() {
        return 0;
    }
    let cols = ops[0].m.len();
    let stacked = DMatrix::from_fn(ops.len(), cols, |a, b| ops[a].m.as_slice()[b]);
    let sv = stacked.svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-8 * top.max(1.0)).count()
}

/// Words spanning `P_{i,j}` map onto `B_{i,j}`, with web traces equal to path traces.
pub fn ptl_iso(model: &PathModel, i: usize, j: usize) -> Vec<Check> {
    let n = model.n();
    let mut out = Vec::new();
    let spanned = (|| -> Result<_> {
        let space = Space::Ptl(i, j);
        let mut letters = space.generators();
        letters.extend((1..i.saturating_sub(1)).map(Letter::F3));
        let mut nz = Normalizer::new();
        let (_, words) = spanning_words(&mut nz, space, &letters)?;
        let mut imgs = Vec::new();
        let mut worst: f64 = 0.0;
        for (w, val) in &words {
            let z = z_of_word(model, i, j, w)?;
            let web_tr = normalized_trace(val)?.eval_complex(n);
            worst = worst.max((web_tr - z.trace(model)).norm());
            imgs.push(z);
        }
        Ok((imgs, worst))
    })();
    match spanned {
        Ok((imgs, worst)) => {
            out.push(timed(format!("ptl_iso.rank.n{n}.i{i}.j{j}"), || -> Result<(bool, String)> {
                let rank = op_rank(&imgs);
                let d = dims(&model.graph, i, j)? as usize;
                Ok((rank == d, format!("rank {rank} of {} word images, dim B = {d}", imgs.len())))
            }));
            out.push(timed(format!("ptl_iso.trace.n{n}.i{i}.j{j}"), || -> Result<(bool, String)> {
                Ok((worst < TOL, format!("residual {worst:.3e}")))
            }));
        }
        Err(e) => out.push(timed(format!("ptl_iso.n{n}.i{i}.j{j}"), || -> Result<(bool, String)> { Err(e) })),
    }
    out
}

/// Block formula against enumeration.
pub fn dims_suite(model: &PathModel, max: usize) -> Vec<Check> {
    let n = model.n();
    let mut out = Vec::new();
    for total in 0..=max {
        for i in 0..=total {
            let j = total - i;
            out.push(timed(format!("dims.n{n}.i{i}.j{j}"), || -> Result<(bool, String)> {
                let a = dims(&model.graph, i, j)?;
                let b = dims_enumerated(&model.graph, i, j);
                Ok((a == b, format!("{a}")))
            }));
        }
    }
    out
}

/// Path-side suites addressable by name.
pub fn by_name(model: &PathModel, name: &str, m: usize, trials: usize, seed: u64) -> Result<Vec<Check>> {
    Ok(match name {
        "hecke" => hecke(model, m),
        "su3" => hecke(model, m).into_iter().filter(|c| c.id.starts_with("path.su3")).collect(),
        "jones" => jones(model, m),
        "generators" => generators(model, m),
        "trace" => trace_and_expectation(model, trials, seed),
        "connection" => connection_suite(model),
        "flat" => flatness_suite(model).0,
        "hexagon" => hexagon_suite(model),
        "ptl" => (1..=m).flat_map(|t| (0..=t).map(move |i| (i, t - i))).flat_map(|(i, j)| ptl_iso(model, i, j)).collect(),
        "dims" => dims_suite(model, m),
        _ => return Err(Error::Input(format!("unknown path suite `{name}`; expected one of {}", PATH_SUITES.join(", ")))),
    })
}

pub const PATH_SUITES: &[&str] = &["hecke", "su3", "jones", "generators", "trace", "connection", "flat", "hexagon", "ptl", "dims"];

/// Element of `B_{i,j}` in the JSON form written by the command line.
pub fn op_json(model: &PathModel, x: &PathOp) -> serde_json::Value {
    json!({ "n": model.n(), "element": x.to_json(model) })
}
