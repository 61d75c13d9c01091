//! Relation suites on the web side. Every identity is an exact equality of
//! normal forms over the Laurent ring, apart from the Gram ranks, which are
//! exact over the cyclotomic field.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    expand_crossings, gram, include, inner_product_with, mult_with, normalized_trace, omega_inverse, omega_map,
    phi_inverse, phi_map, rank, star_sum, trace_left, trace_right_with, WebSum,
};
use crate::error::{Error, Result};
use crate::hecke::{decompose_over, spanning_words, evaluate_with, letter_web, GeneratorWord, Letter, Space};
use crate::report::{timed, Check};
use crate::rewrite::{apply, enumerate_basis, find_all_redexes, normalize_random, Normalizer, RedexKind};
use crate::scalar::{qint, LaurentFraction, LaurentScalar};
use crate::web::{compose, join_adjacent, star, tensor, Sign, SignString, VertexKind, Web};

use Letter::{F, F3, W};

fn lit(k: i64) -> LaurentScalar {
    LaurentScalar::from_int(k)
}

fn delta() -> LaurentScalar {
    qint(2)
}

fn alpha() -> LaurentScalar {
    qint(3)
}

/// Normalized value of a linear combination of words.
fn ev(nz: &mut Normalizer, space: Space, terms: &[(LaurentScalar, &[Letter])]) -> Result<WebSum> {
    let mut g = GeneratorWord::new(space);
    for (c, w) in terms {
        g = g.plus(c.clone(), w);
    }
    evaluate_with(nz, &g)
}

fn word(nz: &mut Normalizer, space: Space, letters: &[Letter]) -> Result<WebSum> {
    ev(nz, space, &[(LaurentScalar::one(), letters)])
}

fn compare(nz: &mut Normalizer, lhs: &WebSum, rhs: &WebSum) -> Result<(bool, String)> {
    let diff = nz.normalize(&lhs.sub(rhs))?;
    if diff.is_zero() {
        Ok((true, "exact".into()))
    } else {
        let shown: Vec<String> = diff.terms().iter().take(3).map(|(c, w)| format!("({c}) {}", w.boundary)).collect();
        Ok((false, format!("difference has {} terms: {}", diff.len(), shown.join(" + "))))
    }
}

fn eq_check(nz: &mut Normalizer, id: String, lhs: impl FnOnce(&mut Normalizer) -> Result<WebSum>, rhs: impl FnOnce(&mut Normalizer) -> Result<WebSum>) -> Check {
    timed(id, || -> Result<(bool, String)> {
        let l = lhs(nz)?;
        let r = rhs(nz)?;
        compare(nz, &l, &r)
    })
}

/// H1-H3 in `V_m`.
pub fn hecke(m: usize) -> Vec<Check> {
    let mut nz = Normalizer::new();
    let s = Space::V(m);
    let mut out = Vec::new();
    for i in 1..m {
        out.push(eq_check(&mut nz, format!("hecke.H1.m{m}.i{i}"), |nz| word(nz, s, &[W(i), W(i)]), |nz| {
            ev(nz, s, &[(delta(), &[W(i)])])
        }));
        for j in i + 2..m {
            out.push(eq_check(&mut nz, format!("hecke.H2.m{m}.i{i}.j{j}"), |nz| word(nz, s, &[W(i), W(j)]), |nz| {
                word(nz, s, &[W(j), W(i)])
            }));
        }
        if i + 1 < m {
            out.push(eq_check(
                &mut nz,
                format!("hecke.H3.m{m}.i{i}"),
                |nz| ev(nz, s, &[(lit(1), &[W(i), W(i + 1), W(i)]), (lit(-1), &[W(i)])]),
                |nz| ev(nz, s, &[(lit(1), &[W(i + 1), W(i), W(i + 1)]), (lit(-1), &[W(i + 1)])]),
            ));
        }
    }
    out
}

/// `(w_i - w_{i+2} w_{i+1} w_i + w_{i+1})(w_{i+1} w_{i+2} w_{i+1} - w_{i+1}) = 0` in `V_m`.
pub fn su3(m: usize) -> Vec<Check> {
    let mut nz = Normalizer::new();
    let s = Space::V(m);
    (1..m.saturating_sub(2))
        .map(|i| {
            eq_check(
                &mut nz,
                format!("su3.m{m}.i{i}"),
                |nz| {
                    let a = ev(nz, s, &[(lit(1), &[W(i)]), (lit(-1), &[W(i + 2), W(i + 1), W(i)]), (lit(1), &[W(i + 1)])])?;
                    let b = ev(nz, s, &[(lit(1), &[W(i + 1), W(i + 2), W(i + 1)]), (lit(-1), &[W(i + 1)])])?;
                    mult_with(nz, &a, &b)
                },
                |_| Ok(WebSum::zero()),
            )
        })
        .collect()
}

/// Products of `f_i` with its neighbours in `V_m`.
pub fn frel(m: usize) -> Vec<Check> {
    let mut nz = Normalizer::new();
    let s = Space::V(m);
    let nf = m.saturating_sub(2);
    let mut out = Vec::new();
    for i in 1..=nf {
        for j in [i.wrapping_sub(1), i + 1] {
            if j >= 1 && j <= nf {
                out.push(eq_check(&mut nz, format!("frel.m{m}.f{i}f{j}f{i}"), |nz| word(nz, s, &[F(i), F(j), F(i)]), |nz| {
                    ev(nz, s, &[(delta().pow(2), &[F(i)])])
                }));
            }
        }
        if i + 2 <= nf {
            out.push(eq_check(&mut nz, format!("frel.m{m}.f{i}f{}f{i}", i + 2), |nz| word(nz, s, &[F(i), F(i + 2), F(i)]), |nz| {
                ev(nz, s, &[(delta(), &[F(i), W(i + 3)])])
            }));
        }
        if i >= 3 {
            out.push(eq_check(&mut nz, format!("frel.m{m}.f{i}f{}f{i}", i - 2), |nz| word(nz, s, &[F(i), F(i - 2), F(i)]), |nz| {
                ev(nz, s, &[(delta(), &[F(i), W(i - 2)])])
            }));
        }
    }
    out
}

/// Random element of `V_k`: a few words in the `w_i` with small coefficients.
pub fn random_element<R: Rng>(nz: &mut Normalizer, k: usize, rng: &mut R) -> Result<WebSum> {
    let s = Space::V(k);
    let mut g = GeneratorWord::new(s);
    for _ in 0..rng.gen_range(1..=3) {
        let len = if k < 2 { 0 } else { rng.gen_range(0..=4) };
        let letters: Vec<Letter> = (0..len).map(|_| W(rng.gen_range(1..k))).collect();
        let c = LaurentScalar::from_int(rng.gen_range(1..=3)) * LaurentScalar::q_pow(rng.gen_range(-2..=2));
        g = g.plus(c, &letters);
    }
    evaluate_with(nz, &g)
}

/// Markov property of the trace plus its normalization values.
pub fn markov(trials: usize, seed: u64) -> Vec<Check> {
    let mut nz = Normalizer::new();
    let mut out = Vec::new();
    for m in 1..=5 {
        out.push(timed(format!("markov.tr_identity.m{m}"), || -> Result<(bool, String)> {
            let t = normalized_trace(&WebSum::from_web(Web::identity_web(m)))?;
            Ok((t == LaurentFraction::new(lit(1), lit(1)), format!("tr = {} / {}", t.num, t.den)))
        }));
        for i in 1..m {
            out.push(timed(format!("markov.tr_W.m{m}.i{i}"), || -> Result<(bool, String)> {
                let t = normalized_trace(&WebSum::from_web(Web::w_web(m, i)?))?;
                Ok((t == LaurentFraction::new(delta(), alpha()), format!("tr = {} / {}", t.num, t.den)))
            }));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.push(timed(format!("markov.random.trials{trials}"), || -> Result<(bool, String)> {
        for t in 0..trials {
            let k = 1 + t % 4;
            let x = random_element(&mut nz, k, &mut rng)?;
            // tr_{k+1}(W_k x) = delta/alpha tr_k(x)  <=>  Tr_{k+1}(W_k x) = delta Tr_k(x)
            let wx = mult_with(&mut nz, &WebSum::from_web(Web::w_web(k + 1, k)?), &include(&x, k + 1)?)?;
            let lhs = trace_right_with(&mut nz, &wx)?;
            let rhs = &delta() * &trace_right_with(&mut nz, &x)?;
            if lhs != rhs {
                return Ok((false, format!("trial {t} (k = {k}): {lhs} vs {rhs}")));
            }
        }
        Ok((true, format!("{trials} random elements")))
    }));
    out
}

fn resolved(nz: &mut Normalizer, w: &Web) -> Result<WebSum> {
    nz.normalize(&expand_crossings(&WebSum::from_web(w.clone()))?)
}

fn stack(pieces: &[Web]) -> Result<Web> {
    let mut acc = pieces[0].clone();
    for p in &pieces[1..] {
        acc = compose(&acc, p)?;
    }
    Ok(acc)
}

fn web_eq(nz: &mut Normalizer, id: String, a: Result<Web>, b: Result<Web>) -> Check {
    timed(id, || -> Result<(bool, String)> {
        let (a, b) = (resolved(nz, &a?)?, resolved(nz, &b?)?);
        compare(nz, &a, &b)
    })
}

/// Crossing whose left top strand passes over the other one.
fn over(left_over: bool, top: [Sign; 2]) -> Web {
    Web::crossing_piece((top[0] == top[1]) == left_over, top)
}

/// A string with top sign `x` slid across a trivalent vertex of `kind`, over or under.
fn vertex_slide(kind: VertexKind, x: Sign, on_top: bool) -> Result<(Web, Web)> {
    let leg = if kind == VertexKind::Sink { Sign::Minus } else { Sign::Plus };
    let id = |s: &[Sign]| Web::identity_on(s);
    let y = Web::star_piece(2, 1, kind);
    // string crosses the two legs from the left
    let c1 = over(on_top, [x, leg]);
    let after1 = c1.bottom_row();
    let a1 = tensor(&c1, &id(&[leg]));
    let a2 = tensor(&id(&[after1[0].flip()]), &over(on_top, [after1[1].flip(), leg]));
    let a3 = tensor(&y, &id(&[x]));
    // or crosses the stem
    let b1 = tensor(&id(&[x]), &y);
    let b2 = over(on_top, [x, leg.flip()]);
    Ok((stack(&[a1, a2, a3])?, compose(&b1, &b2)?))
}

/// Reidemeister moves, vertex naturality and kinks.
pub fn braid() -> Vec<Check> {
    use Sign::{Minus, Plus};
    let mut nz = Normalizer::new();
    let mut out = Vec::new();
    for positive in [true, false] {
        let tag = if positive { "pos" } else { "neg" };
        let kink = join_adjacent(&Web::crossing(positive), 1);
        let want = if positive { 8 } else { -8 };
        out.push(timed(format!("braid.kink.{tag}"), || -> Result<(bool, String)> {
            let r = resolved(&mut nz, &kink?)?;
            let e = WebSum::from_web(Web::identity_web(1)).scale(&LaurentScalar::t_pow(want));
            compare(&mut nz, &r, &e)
        }));
        out.push(web_eq(
            &mut nz,
            format!("braid.R2.parallel.{tag}"),
            compose(&Web::crossing(positive), &Web::crossing(!positive)),
            Ok(Web::identity_web(2)),
        ));
        let c = Web::crossing_piece(positive, [Minus, Plus]);
        let back = c.bottom_row().iter().map(|s| s.flip()).collect::<Vec<_>>();
        out.push(web_eq(
            &mut nz,
            format!("braid.R2.antiparallel.{tag}"),
            compose(&c, &Web::crossing_piece(!positive, [back[0], back[1]])),
            Ok(Web::identity_on(&[Minus, Plus])),
        ));
        let x1 = tensor(&Web::crossing(positive), &Web::identity_web(1));
        let x2 = tensor(&Web::identity_web(1), &Web::crossing(positive));
        out.push(web_eq(
            &mut nz,
            format!("braid.R3.{tag}"),
            stack(&[x1.clone(), x2.clone(), x1.clone()]),
            stack(&[x2.clone(), x1, x2]),
        ));
        for kind in [VertexKind::Sink, VertexKind::Source] {
            for x in [Minus, Plus] {
                let (a, b) = match vertex_slide(kind, x, positive) {
                    Ok((a, b)) => (Ok(a), Ok(b)),
                    Err(e) => (Err(e), Err(Error::Pattern("vertex slide".into()))),
                };
                let side = if positive { "over" } else { "under" };
                out.push(web_eq(&mut nz, format!("braid.vertex.{kind:?}.{}.{side}", x.as_char()), a, b));
            }
        }
    }
    out
}

fn signs_up_to(len: usize) -> Vec<SignString> {
    let mut out = vec![];
    for l in 1..=len {
        for bits in 0..1u32 << l {
            out.push(SignString((0..l).map(|k| if bits >> k & 1 == 1 { Sign::Plus } else { Sign::Minus }).collect()));
        }
    }
    out
}

/// Left and right traces agree on every basis web of each `sigma sigma*` space.
pub fn spherical(max_len: usize) -> Vec<Check> {
    let mut nz = Normalizer::new();
    signs_up_to(max_len)
        .into_iter()
        .map(|sigma| {
            timed(format!("spherical.{sigma}"), || -> Result<(bool, String)> {
                let n = sigma.len();
                let mut full = sigma.0.clone();
                full.extend(sigma.star().0);
                let basis = enumerate_basis(&SignString(full))?;
                for w in &basis {
                    let x = WebSum::from_web(w.clone().with_top(n));
                    let (l, r) = (trace_left(&x)?, trace_right_with(&mut nz, &x)?);
                    if l != r {
                        return Ok((false, format!("left {l} vs right {r}")));
                    }
                }
                Ok((true, format!("{} basis webs", basis.len())))
            })
        })
        .collect()
}

/// Random crossing-free web with at most `max_vertices` trivalent vertices and at least one redex.
pub fn random_elliptic_web<R: Rng>(rng: &mut R, max_vertices: usize) -> Result<Web> {
    loop {
        let space = match rng.gen_range(0..3) {
            0 => Space::V(rng.gen_range(2..=5)),
            1 => Space::Ptl(rng.gen_range(2..=4), rng.gen_range(0..=1)),
            _ => Space::Ptl(rng.gen_range(1..=2), rng.gen_range(1..=2)),
        };
        let mut letters = space.generators();
        if let Space::Ptl(i, _) = space {
            letters.extend((1..i.saturating_sub(1)).map(F3));
        }
        if letters.is_empty() {
            continue;
        }
        let mut w = space.identity();
        while let Some(l) = letters.choose(rng) {
            let piece = letter_web(space, *l)?;
            if w.num_trivalent() + piece.num_trivalent() > max_vertices {
                break;
            }
            w = compose(&w, &piece)?;
            if rng.gen_bool(0.2) {
                break;
            }
        }
        // close some strings round the right
        while w.top > 0 && rng.gen_bool(0.3) {
            w = join_adjacent(&w, w.top - 1)?;
        }
        if !find_all_redexes(&w)?.is_empty() {
            return Ok(w);
        }
    }
}

/// Normal forms are independent of the order in which redexes are contracted.
pub fn confluence(trials: usize, orders: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![timed(format!("confluence.trials{trials}.orders{orders}"), || -> Result<(bool, String)> {
        let mut nz = Normalizer::new();
        for t in 0..trials {
            let w = random_elliptic_web(&mut rng, 12)?;
            let x = WebSum::from_web(w);
            let reference = nz.normalize(&x)?;
            for o in 0..orders {
                let other = normalize_random(&x, &mut rng)?;
                if other != reference {
                    return Ok((false, format!("trial {t}, order {o}: {} vs {} terms", other.len(), reference.len())));
                }
            }
        }
        Ok((true, format!("{trials} webs agree under {orders} random orders")))
    })]
}

/// `normalize(x*) = normalize(x)*` on random webs.
pub fn star_compat(trials: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![timed(format!("star.trials{trials}"), || -> Result<(bool, String)> {
        let mut nz = Normalizer::new();
        for t in 0..trials {
            let w = random_elliptic_web(&mut rng, 10)?;
            let a = nz.normalize(&WebSum::from_web(star(&w)))?;
            let b = star_sum(&nz.normalize(&WebSum::from_web(w))?);
            if !compare(&mut nz, &a, &b)?.0 {
                return Ok((false, format!("trial {t}")));
            }
        }
        Ok((true, format!("{trials} random webs")))
    })]
}

/// `B_1 = W_1 W_2 E` in `V_3`, reduced by two digons or by the square first.
pub fn lemma() -> Vec<Check> {
    let mut nz = Normalizer::new();
    let b1 = || -> Result<Web> { stack(&[Web::w_web(3, 1)?, Web::w_web(3, 2)?, Web::f_web(3, 1)?]) };
    let e = || -> Result<WebSum> { Ok(WebSum::from_web(Web::f_web(3, 1)?)) };
    let mut out = vec![timed("lemma.delta_squared", || -> Result<(bool, String)> {
        let d2 = delta().pow(2);
        let rhs = &lit(1) + &alpha();
        Ok((d2 == rhs, format!("delta^2 = {d2}")))
    })];
    out.push(eq_check(&mut nz, "lemma.B1.normal_form".into(), |nz| nz.normalize(&WebSum::from_web(b1()?)), |_| {
        Ok(e()?.scale(&delta().pow(2)))
    }));
    out.push(eq_check(
        &mut nz,
        "lemma.B1.square_first".into(),
        |nz| {
            let w = b1()?;
            let sq = find_all_redexes(&w)?
                .into_iter()
                .find(|r| r.kind == RedexKind::Square)
                .ok_or_else(|| Error::Pattern("B1 has no square".into()))?;
            let mut sum = WebSum::zero();
            for (c, u) in apply(&w, &sq)? {
                sum.push(c, u);
            }
            nz.normalize(&sum)
        },
        |_| Ok(e()?.scale(&(&lit(1) + &alpha()))),
    ));
    out.push(timed("lemma.closed_E", || -> Result<(bool, String)> {
        let t = trace_right_with(&mut nz, &e()?)?;
        Ok((t == &alpha() * &delta(), format!("{t}")))
    }));
    out
}

/// Relations of the hexagon `f_1^(3)` in the `(m, 0)` space, with `f_l = alpha^-1` cup-cap and
/// denominators cleared, and its position relative to TL at `n`.
pub fn f13(m: usize, n: u32) -> Vec<Check> {
    let mut nz = Normalizer::new();
    let s = Space::Ptl(m, 0);
    let d = delta();
    let mut out = Vec::new();
    if m < 3 {
        return out;
    }
    for l in 1..=m - 2 {
        let (g, c1, c2) = (F3(l), F(l), F(l + 1));
        // (f3)^2 = delta f3 + alpha (f1 + f2) + alpha^2 (f1 f2 + f2 f1)
        out.push(eq_check(&mut nz, format!("f13.m{m}.l{l}.square"), |nz| word(nz, s, &[g, g]), |nz| {
            ev(nz, s, &[(d.clone(), &[g]), (lit(1), &[c1]), (lit(1), &[c2]), (lit(1), &[c1, c2]), (lit(1), &[c2, c1])])
        }));
        // f1 f3 = delta f1 + delta alpha f1 f2, and its mirror
        for (a, b) in [(c1, c2), (c2, c1)] {
            out.push(eq_check(&mut nz, format!("f13.m{m}.l{l}.{a}{g}"), |nz| word(nz, s, &[a, g]), |nz| {
                ev(nz, s, &[(d.clone(), &[a]), (d.clone(), &[a, b])])
            }));
            // f g f = delta^3 alpha^-1 f
            out.push(eq_check(&mut nz, format!("f13.m{m}.l{l}.{a}{g}{a}"), |nz| word(nz, s, &[a, g, a]), |nz| {
                ev(nz, s, &[(d.pow(3), &[a])])
            }));
            // g f g = delta^2 (f1 + f2) + delta^2 alpha (f1 f2 + f2 f1)
            let d2 = d.pow(2);
            out.push(eq_check(&mut nz, format!("f13.m{m}.l{l}.{g}{a}{g}"), |nz| word(nz, s, &[g, a, g]), |nz| {
                ev(nz, s, &[(d2.clone(), &[c1]), (d2.clone(), &[c2]), (d2.clone(), &[c1, c2]), (d2.clone(), &[c2, c1])])
            }));
        }
    }
    out.push(timed(format!("f13.m{m}.n{n}.tl_span"), || -> Result<(bool, String)> {
        let (r_tl, r_all) = hexagon_in_tl(m, n)?;
        let place = if r_tl == r_all { "inside" } else { "independent of" };
        Ok((true, format!("rank TL = {r_tl}, with hexagon = {r_all}: hexagon {place} TL modulo null vectors")))
    }));
    out
}

/// Whether `f_1^(3)` lies in the span of TL words modulo null vectors at `n`.
pub fn hexagon_in_tl(m: usize, n: u32) -> Result<(usize, usize)> {
    let mut nz = Normalizer::new();
    let s = Space::Ptl(m, 0);
    let tl: Vec<Letter> = (1..m).map(F).collect();
    let (_, words) = spanning_words(&mut nz, s, &tl)?;
    let mut elems: Vec<WebSum> = words.into_iter().map(|(_, x)| x).collect();
    let r_tl = gram_rank(&mut nz, &elems, n)?;
    elems.push(word(&mut nz, s, &[F3(1)])?);
    Ok((r_tl, gram_rank(&mut nz, &elems, n)?))
}

fn gram_rank(nz: &mut Normalizer, elems: &[WebSum], n: u32) -> Result<usize> {
    let mut g = Vec::new();
    for a in elems {
        let mut row = Vec::new();
        for b in elems {
            row.push(inner_product_with(nz, a, b, n)?);
        }
        g.push(row);
    }
    Ok(rank(g))
}

/// Identities of the reshuffle maps between rectangle spaces.
pub fn ptl() -> Vec<Check> {
    let mut nz = Normalizer::new();
    let t = LaurentScalar::t_pow;
    let mut out = Vec::new();
    for (i, j) in [(1, 2), (2, 1), (3, 0)] {
        out.push(timed(format!("ptl.basis_count.{i}{j}"), || -> Result<(bool, String)> {
            let c = enumerate_basis(&SignString::ij(i, j))?.len();
            Ok((c == 6, format!("{c}")))
        }));
    }
    let (p12, p21, p30) = (Space::Ptl(1, 2), Space::Ptl(2, 1), Space::Ptl(3, 0));
    out.push(eq_check(&mut nz, "ptl.phi_W-1".into(), |nz| phi_map(&word(nz, p12, &[W(1)])?, 1, 2), |nz| {
        ev(nz, p21, &[(t(8), &[W(0)])])
    }));
    out.push(eq_check(&mut nz, "ptl.phi_W0".into(), |nz| phi_map(&word(nz, p12, &[W(0)])?, 1, 2), |nz| {
        ev(nz, p21, &[(t(5), &[]), (-t(-1), &[F(1)])])
    }));
    // f = alpha^-1 cup-cap: omega(W_0) = g - q f1 f2 - q^-1 f2 f1 with f_l f_l' = alpha^-2 c c'
    out.push(eq_check(&mut nz, "ptl.omega_W0".into(), |nz| omega_map(&word(nz, p21, &[W(0)])?, 2, 1), |nz| {
        ev(nz, p30, &[(lit(1), &[F3(1)]), (-t(3), &[F(1), F(2)]), (-t(-3), &[F(2), F(1)])])
    }));
    out.push(eq_check(&mut nz, "ptl.omega_f1".into(), |nz| omega_map(&word(nz, p21, &[F(1)])?, 2, 1), |nz| {
        word(nz, p30, &[F(1)])
    }));
    out.push(eq_check(
        &mut nz,
        "ptl.omega_f2".into(),
        |nz| {
            let x = ev(nz, p21, &[(lit(1), &[F(1)]), (-t(3), &[W(0), F(1)]), (-t(-3), &[F(1), W(0)]), (lit(1), &[W(0), F(1), W(0)])])?;
            omega_map(&x, 2, 1)
        },
        |nz| word(nz, p30, &[F(2)]),
    ));
    for (i, j) in [(1, 1), (1, 2), (1, 3), (3, 1), (2, 1), (2, 2)] {
        out.push(round_trip(&mut nz, i, j));
    }
    for (i, j) in [(1, 2), (2, 1)] {
        out.push(timed(format!("ptl.inner_product.{i}{j}"), || -> Result<(bool, String)> {
            let basis = enumerate_basis(&SignString::ij(i, j))?;
            let elems: Vec<WebSum> = basis.into_iter().map(|w| WebSum::from_web(w.with_top(i + j))).collect();
            let map = |x: &WebSum| if i % 2 == 1 { phi_map(x, i, j) } else { omega_map(x, i, j) };
            for a in &elems {
                for b in &elems {
                    let before = pairing_tr(&mut nz, a, b)?;
                    let after = pairing_tr(&mut nz, &map(a)?, &map(b)?)?;
                    if before != after {
                        return Ok((false, format!("{before} vs {after}")));
                    }
                }
            }
            Ok((true, format!("{} basis webs", elems.len())))
        }));
    }
    out.push(timed("ptl.generation.21", || -> Result<(bool, String)> {
        let basis = enumerate_basis(&SignString::ij(2, 1))?;
        for w in basis {
            decompose_over(&WebSum::from_web(w.with_top(3)), p21, &[W(0), F(1)])?;
        }
        Ok((true, "every basis web is a combination of words in 1, W_0, f_1".into()))
    }));
    out
}

/// Reports whether each rectangle space with `i + j <= max` is spanned by words in `W_-k`, `f_l`, `f_l^(3)`.
pub fn ptl_generation(max: usize) -> Vec<(usize, usize, bool)> {
    let mut out = Vec::new();
    for total in 1..=max {
        for i in 0..=total {
            let j = total - i;
            let s = Space::Ptl(i, j);
            let mut letters = s.generators();
            letters.extend((1..i.saturating_sub(1)).map(F3));
            let ok = enumerate_basis(&SignString::ij(i, j))
                .map(|b| b.into_iter().all(|w| decompose_over(&WebSum::from_web(w.with_top(total)), s, &letters).is_ok()))
                .unwrap_or(false);
            out.push((i, j, ok));
        }
    }
    out
}

fn pairing_tr(nz: &mut Normalizer, a: &WebSum, b: &WebSum) -> Result<LaurentScalar> {
    let p = mult_with(nz, &star_sum(b), a)?;
    trace_right_with(nz, &p)
}

fn round_trip(nz: &mut Normalizer, i: usize, j: usize) -> Check {
    timed(format!("ptl.round_trip.{i}{j}"), || -> Result<(bool, String)> {
        let basis = enumerate_basis(&SignString::ij(i, j))?;
        for w in &basis {
            let x = nz.normalize(&WebSum::from_web(w.clone().with_top(i + j)))?;
            let y = if i % 2 == 1 { phi_map(&x, i, j)? } else { omega_map(&x, i, j)? };
            let back = if (i + 1).is_multiple_of(2) { phi_inverse(&y, i + 1, j - 1)? } else { omega_inverse(&y, i + 1, j - 1)? };
            let (ok, detail) = compare(nz, &back, &x)?;
            if !ok {
                return Ok((false, detail));
            }
        }
        Ok((true, format!("{} basis webs", basis.len())))
    })
}

/// Exact Gram ranks of `sigma` at the given roots.
pub fn gram_ranks(sigma: &SignString, ns: &[u32]) -> Result<Vec<(u32, usize)>> {
    ns.iter().map(|&n| Ok((n, gram(sigma, n)?.rank()))).collect()
}

/// Suites addressable by name from the command line.
pub fn by_name(name: &str, m: usize, trials: usize, seed: u64) -> Result<Vec<Check>> {
    Ok(match name {
        "hecke" => hecke(m),
        "su3" => su3(m),
        "frel" => frel(m),
        "markov" => markov(trials, seed),
        "braid" => braid(),
        "spherical" => spherical(m.min(3)),
        "star" => star_compat(trials, seed),
        "confluence" => confluence(trials, 5, seed),
        "lemma" => lemma(),
        "f13" => f13(m, 7),
        "ptl" => ptl(),
        _ => return Err(Error::Input(format!("unknown suite `{name}`"))),
    })
}

pub const SUITE_NAMES: &[&str] = &["hecke", "su3", "frel", "markov", "braid", "spherical", "star", "confluence", "lemma", "f13", "ptl"];
