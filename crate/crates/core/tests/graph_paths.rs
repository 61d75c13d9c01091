use std::f64::consts::PI;

use a2planar::graph::{frame_residuals, pf_eigen, solve_cells, CellSystem, FusionGraph};
use a2planar::pathalg::{
    basis_change, basis_change_inverse, connection, dims, dims_enumerated, flatness_check, level_signs, present_z,
    PathModel, PathOp, Strip, StripWord,
};
use a2planar::Sign;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(m: i64, n: u32) -> f64 {
    (m as f64 * PI / n as f64).sin() / (PI / n as f64).sin()
}

fn model(n: u32) -> &'static PathModel {
    use std::sync::OnceLock;
    static MODELS: OnceLock<Vec<PathModel>> = OnceLock::new();
    &MODELS.get_or_init(|| (4..=6).map(|n| PathModel::build_a(n, 7).unwrap()).collect())[(n - 4) as usize]
}

fn signs(s: &str) -> Vec<Sign> {
    s.chars().map(|c| if c == '+' { Sign::Plus } else { Sign::Minus }).collect()
}

#[test]
fn perron_frobenius_matches_quantum_dimensions() {
    for n in 4..=9 {
        let g = FusionGraph::build_a(n).unwrap();
        let pf = pf_eigen(&g).unwrap();
        assert!((pf.eigenvalue - q(3, n)).abs() < 1e-10);
        for (k, v) in g.vertices.iter().enumerate() {
            let (a, b) = v.id.trim_matches(|c| c == '(' || c == ')').split_once(',').unwrap();
            let (a, b): (i64, i64) = (a.parse().unwrap(), b.parse().unwrap());
            let want = q(a + 1, n) * q(b + 1, n) * q(a + b + 2, n) / q(2, n);
            assert!((pf.phi[k] - want).abs() < 1e-9, "n={n} vertex {}", v.id);
        }
    }
}

#[test]
fn solved_cells_satisfy_frame_equations_in_every_gauge() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 4..=7 {
        let g = FusionGraph::build_a(n).unwrap();
        let pf = pf_eigen(&g).unwrap();
        let (cells, _) = solve_cells(&g, &pf, 1e-11, 1).unwrap();
        assert!(frame_residuals(&g, &pf.phi, &cells).max() < 1e-9, "n={n}");
        let phases: Vec<f64> = (0..g.edges.len()).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let moved = cells.rephase(&phases);
        assert!(frame_residuals(&g, &pf.phi, &moved).max() < 1e-9, "n={n} after rephasing");
        // a cell system that is off by a scalar is not a solution
        let scaled = CellSystem::new(cells.triangles.clone(), cells.values.iter().map(|z| z * 1.1).collect());
        assert!(frame_residuals(&g, &pf.phi, &scaled).max() > 1e-3);
    }
}

#[test]
fn connection_is_unitary_and_gauge_covariant() {
    let m = model(5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let phases: Vec<f64> = (0..m.graph.edges.len()).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    let other = m.with_cells(m.cells.rephase(&phases));
    for model in [m, &other] {
        for odd in [false, true] {
            let c = connection(model, odd);
            assert!(c.unitarity_residual(&model.graph) < 1e-10);
            assert!(c.commuting_square_residual(&model.graph, &model.pf.phi) < 1e-10);
        }
    }
    // the Hecke generators move by a diagonal unitary, so their spectrum and trace stay put
    let a = present_z(m, &StripWord::w(0, 3, 1).unwrap(), &[]).unwrap();
    let b = present_z(&other, &StripWord::w(0, 3, 1).unwrap(), &[]).unwrap();
    assert!((a.trace(m) - b.trace(&other)).norm() < 1e-10);
    assert!((a.mul(&a).unwrap().trace(m) - b.mul(&b).unwrap().trace(&other)).norm() < 1e-10);
}

#[test]
fn json_round_trips() {
    let m = model(5);
    let g = FusionGraph::from_json(&m.graph.to_json().to_string()).unwrap();
    assert_eq!(g.edges, m.graph.edges);
    let cells = CellSystem::from_json(&g, &m.cells.to_json(&g)).unwrap();
    for (t, v) in m.cells.triangles.iter().zip(&m.cells.values) {
        assert!((cells.w(t[0], t[1], t[2]) - v).norm() < 1e-14);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = PathOp::random(m.level(2, 1), &mut rng);
    let back = PathOp::from_json(m, &level_signs(2, 1), &x.to_json(m)).unwrap();
    assert!(back.distance(&x).unwrap() < 1e-14);
    let w = StripWord::f3(3, 1, 1).unwrap();
    let again = StripWord::from_json(&w.to_json()).unwrap();
    assert_eq!(again.strips, w.strips);
    assert_eq!(again.top, w.top);
}

#[test]
fn dimension_formula_matches_enumeration() {
    for n in 4..=7 {
        let g = FusionGraph::build_a(n).unwrap();
        for i in 0..=4 {
            for j in 0..=4 {
                assert_eq!(dims(&g, i, j).unwrap(), dims_enumerated(&g, i, j), "n={n} i={i} j={j}");
            }
        }
    }
}

#[test]
fn operator_algebra() {
    let m = model(6);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (i, j) in [(0, 3), (2, 1), (1, 2), (3, 0)] {
        let s = m.level(i, j);
        let (a, b) = (PathOp::random(s.clone(), &mut rng), PathOp::random(s.clone(), &mut rng));
        let ab = a.mul(&b).unwrap();
        assert!((ab.trace(m) - b.mul(&a).unwrap().trace(m)).norm() < 1e-10);
        assert!(ab.adjoint().distance(&b.adjoint().mul(&a.adjoint()).unwrap()).unwrap() < 1e-12);
        assert!((PathOp::identity(s.clone()).trace(m) - C::new(1.0, 0.0)).norm() < 1e-10);
        assert!(a.off_block() < 1e-15);
    }
}

#[test]
fn isotopy_and_braid_moves() {
    let m = model(5);
    let z = |top: &str, strips: &[&str]| {
        let word = StripWord::new(signs(top), strips.iter().map(|s| s.parse().unwrap()).collect());
        present_z(m, &word, &[]).unwrap()
    };
    for top in ["-", "+"] {
        let id = PathOp::identity(m.space(&signs(top)));
        let flip = if top == "-" { "+" } else { "-" };
        let snake = z(top, &[&format!("CAP(2,{flip})"), "CUP(1)"]);
        assert!(snake.distance(&id).unwrap() < 1e-10, "zigzag on {top}");
        let other = z(top, &[&format!("CAP(1,{top})"), "CUP(2)"]);
        assert!(other.distance(&id).unwrap() < 1e-10, "reverse zigzag on {top}");
    }
    for top in ["--", "-+", "+-"] {
        let id = PathOp::identity(m.space(&signs(top)));
        let r2 = z(top, &["CROSS(1)", "CROSS_INV(1)"]);
        assert!(r2.distance(&id).unwrap() < 1e-10, "R2 on {top}");
    }
    let r3a = z("---", &["CROSS(1)", "CROSS(2)", "CROSS(1)"]);
    let r3b = z("---", &["CROSS(2)", "CROSS(1)", "CROSS(2)"]);
    assert!(r3a.distance(&r3b).unwrap() < 1e-10);
    // a closed loop is worth [3]
    let circle = z("", &["CAP(1,-)", "CUP(1)"]);
    assert!((circle.m[(0, 0)] - C::new(m.alpha(), 0.0)).norm() < 1e-10);
}

#[test]
fn basis_change_is_a_trace_preserving_isomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (n, i, j) in [(5, 0, 0), (5, 0, 1), (5, 1, 0), (5, 1, 1), (5, 2, 0), (6, 2, 1), (6, 3, 0), (6, 3, 1)] {
        let m = model(n);
        let mut s = level_signs(i + 1, j);
        s.push(Sign::Minus);
        let space = m.space(&s);
        let (x, y) = (PathOp::random(space.clone(), &mut rng), PathOp::random(space, &mut rng));
        let bx = basis_change(m, &x, i, j).unwrap();
        let by = basis_change(m, &y, i, j).unwrap();
        let bxy = basis_change(m, &x.mul(&y).unwrap(), i, j).unwrap();
        assert!(bxy.distance(&bx.mul(&by).unwrap()).unwrap() < 1e-10, "i={i} j={j}");
        assert!((bx.trace(m) - x.trace(m)).norm() < 1e-10);
        assert!((bx.adjoint().mul(&bx).unwrap().trace(m) - x.adjoint().mul(&x).unwrap().trace(m)).norm() < 1e-10);
        assert!(basis_change_inverse(m, &bx, i, j).unwrap().distance(&x).unwrap() < 1e-10);
    }
}

#[test]
fn small_flatness_window() {
    let r = flatness_check(model(5), 2, 4);
    assert_eq!(r.entries.len(), 8);
    assert!(r.max_residual < 1e-9, "{}", r.max_residual);
}

fn strip() -> impl Strategy<Value = Strip> {
    let pos = 1usize..9;
    prop_oneof![
        pos.clone().prop_map(Strip::Cup),
        (pos.clone(), any::<bool>()).prop_map(|(i, p)| Strip::Cap(i, if p { Sign::Plus } else { Sign::Minus })),
        pos.clone().prop_map(Strip::ForkIn),
        pos.clone().prop_map(Strip::ForkInInv),
        pos.clone().prop_map(Strip::ForkOut),
        pos.clone().prop_map(Strip::ForkOutInv),
        (0usize..4, 0usize..5, 0usize..5).prop_map(|(label, left, right)| Strip::Rect { label, left, right }),
        pos.clone().prop_map(Strip::Cross),
        pos.prop_map(Strip::CrossInv),
    ]
}

proptest! {
    #[test]
    fn strip_tokens_round_trip(s in strip()) {
        prop_assert_eq!(s.to_string().parse::<Strip>().unwrap(), s);
    }

    #[test]
    fn malformed_tokens_are_rejected(s in "[A-Z_]{0,8}(\\([0-9,+-]{0,4}\\))?") {
        if let Ok(t) = s.parse::<Strip>() {
            prop_assert_eq!(t.to_string().parse::<Strip>().unwrap(), t);
        }
    }
}

#[test]
fn zero_positions_are_rejected() {
    assert!("CUP(0)".parse::<Strip>().is_err());
    assert!("CAP(1,x)".parse::<Strip>().is_err());
    assert!("LOOP(1)".parse::<Strip>().is_err());
}
