//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use a2planar::algebra::quotient_dim;
use a2planar::pathalg::{PathModel, PathSpace};
use a2planar::pathchecks;
use a2planar::report::Check;
use a2planar::rewrite::enumerate_basis;
use a2planar::{suites, Sign, SignString};

/// Walks in the dominant chamber from 0 back to 0, with weights bounded by
/// `a + b <= bound` when given.
fn walk_count(sigma: &[Sign], bound: Option<i32>) -> u64 {
    let steps = [(1i32, 0i32), (-1, 1), (0, -1)];
    let mut cur: HashMap<(i32, i32), u64> = HashMap::from([((0, 0), 1)]);
    for s in sigma {
        let mut next = HashMap::new();
        for (&(a, b), &c) in &cur {
            for &(da, db) in &steps {
                let (da, db) = if *s == Sign::Minus { (da, db) } else { (-da, -db) };
                let (x, y) = (a + da, b + db);
                if x >= 0 && y >= 0 && bound.is_none_or(|k| x + y <= k) {
                    *next.entry((x, y)).or_insert(0) += c;
                }
            }
        }
        cur = next;
    }
    cur.get(&(0, 0)).copied().unwrap_or(0)
}

struct Line {
    ok: bool,
    detail: String,
}

fn from_checks(checks: Vec<Check>) -> Line {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed()).map(|c| format!("{} ({})", c.id, c.detail)).collect();
    if failed.is_empty() {
        Line { ok: !checks.is_empty(), detail: format!("{} checks", checks.len()) }
    } else {
        Line { ok: false, detail: format!("{} of {} failed: {}", failed.len(), checks.len(), failed.join("; ")) }
    }
}

fn models() -> Vec<PathModel> {
    (4..=7).map(|n| PathModel::build_a(n, 0).expect("cells for A(n)")).collect()
}

fn main() -> ExitCode {
    let models = models();
    let criteria: Vec<(&str, Box<dyn Fn() -> Line>)> = vec![
        ("confluence of normal forms", Box::new(|| {
            let start = Instant::now();
            let mut line = from_checks(suites::confluence(1000, 5, 0));
            let secs = start.elapsed().as_secs_f64();
            line.detail = format!("{}, {secs:.1} s", line.detail);
            line.ok &= secs < 60.0;
            line
        })),
        ("B1 = delta^2 E by both routes", Box::new(|| from_checks(suites::lemma()))),
        ("non-elliptic counts 1, 2, 6, 23, 103", Box::new(|| {
            let want = [1u64, 2, 6, 23, 103];
            let mut got = Vec::new();
            let mut ok = true;
            for (m, &w) in (1..=5).zip(&want) {
                let sigma = SignString::tl(m);
                let count = enumerate_basis(&sigma).map(|b| b.len() as u64).unwrap_or(0);
                ok &= count == w && walk_count(&sigma.0, None) == w;
                got.push(count);
            }
            Line { ok, detail: format!("{got:?}") }
        })),
        ("Hecke, SU(3) and f relations", Box::new(|| {
            let mut checks = Vec::new();
            for m in 2..=5 {
                checks.extend(suites::hecke(m));
                checks.extend(suites::su3(m));
            }
            for m in 3..=6 {
                checks.extend(suites::frel(m));
            }
            from_checks(checks)
        })),
        ("Markov trace", Box::new(|| from_checks(suites::markov(100, 0)))),
        ("root-of-unity quotient of -^3 +^3", Box::new(|| {
            let sigma: SignString = "---+++".parse().expect("sign string");
            let mut ok = true;
            let mut parts = Vec::new();
            for n in 5..=8u32 {
                let q = quotient_dim(&sigma, n).unwrap_or(usize::MAX);
                let want = if n == 5 { 5 } else { 6 };
                let g = a2planar::graph::FusionGraph::build_a(n).expect("A(n)");
                let space = PathSpace::new(&g, &sigma.0);
                let closed = space.ends.iter().filter(|&&v| v == g.star).count();
                let oracle = walk_count(&sigma.0, Some(n as i32 - 3)) as usize;
                ok &= q == want && closed == want && oracle == want;
                parts.push(format!("n={n}: {q}"));
            }
            Line { ok, detail: parts.join(", ") }
        })),
        ("connection unitarity and commuting square, n = 4..7", Box::new(|| {
            from_checks(models.iter().flat_map(pathchecks::connection_suite).collect())
        })),
        ("flatness on A(4), A(5) with perturbed control", Box::new(|| {
            from_checks(models[..2].iter().flat_map(|m| pathchecks::flatness_suite(m).0).collect())
        })),
        ("Z(W_-k) = U_-k, Z(f_l) = alpha e_l, closure trace, expectation", Box::new(|| {
            let mut checks = Vec::new();
            for m in &models {
                checks.extend(pathchecks::generators(m, 4));
                checks.extend(pathchecks::trace_and_expectation(m, 20, 0));
            }
            from_checks(checks)
        })),
        ("hexagon matrix at n = 7 and n = 5", Box::new(|| {
            from_checks([pathchecks::hexagon_suite(&models[3]), pathchecks::hexagon_suite(&models[1])].concat())
        })),
    ];
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let line = run();
        all &= line.ok;
        println!(
            "criterion {:>2}: {}  {name}: {} [{:.1} s]",
            k + 1,
            if line.ok { "PASS" } else { "FAIL" },
            line.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
