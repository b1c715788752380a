//! Acceptance matrix: one line per criterion with its verdict and runtime.
//! Exits nonzero when any criterion fails or exceeds its time budget.

use std::time::{Duration, Instant};

use mpqg::cartan::{
    cocycle_realization, make_small_realization, make_split_realization, make_standard_realization,
    random_antisymmetric, random_cocycle, random_mp_matrix, random_twist, solve_cocycle_equiv, solve_twist_equiv, split_stability,
    twist_realization, CartanDatum, MpMatrix, TwistMatrix,
};
use mpqg::linalg::{s_agrees, s_identity, s_mul, s_scale, s_sub, s_zero};
use mpqg::liebialg::{build_mplba, check_bialgebra, compare_tables, lie_cocycle_deform, lie_twist_deform};
use mpqg::quea::{UContext, UOptions};
use mpqg::report::Report;
use mpqg::semiclassical::LimitContext;
use mpqg::series::rat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ORD: i32 = 6;

fn data() -> Vec<CartanDatum> {
    vec![CartanDatum::a1(), CartanDatum::a1xa1(), CartanDatum::a2(), CartanDatum::b2()]
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A context over a random ħ-perturbed matrix with a constant antisymmetric part.
fn context(c: &CartanDatum, n: i32, seed: u64) -> UContext {
    let p = random_mp_matrix(&mut rng(seed), c, n + 3, true);
    let r = make_standard_realization(&p);
    UContext::new(&p, &r, UOptions::new(n)).expect("context")
}

/// Tally of checks and the first failure seen.
struct Outcome {
    ok: bool,
    detail: String,
    checks: usize,
}

impl Outcome {
    fn new() -> Self {
        Outcome { ok: true, detail: String::new(), checks: 0 }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.ok {
            self.ok = false;
            self.detail = what();
        }
    }

    fn report(&mut self, r: &Report) {
        self.checks += r.checks.len();
        if !r.passed() && self.ok {
            self.ok = false;
            let f = &r.failures()[0];
            self.detail = format!("{} [{}]: {} ({})", r.theorem, r.cartan, f.name, f.witness);
        }
    }
}

fn c1_realizations() -> Outcome {
    let mut out = Outcome::new();
    let mut g = rng(101);
    for c in data() {
        for _ in 0..5 {
            let p = random_mp_matrix(&mut g, &c, ORD, true);
            let n = c.n();
            let mut rs = vec![("standard", Ok(make_standard_realization(&p)))];
            // P_s is invertible for the finite types, so rank(P_s) = n
            rs.push(("split", make_split_realization(&p, 2 * n)));
            rs.push(("small", make_small_realization(&p, n)));
            for (kind, r) in rs {
                match r {
                    Ok(r) => {
                        let res = r.satisfies_axioms(&p, ORD);
                        out.expect(res.is_ok(), || format!("{} {kind}: {}", c.label(), res.unwrap_err()));
                    }
                    Err(e) => out.expect(false, || format!("{} {kind}: {e}", c.label())),
                }
            }
        }
    }
    out
}

fn c2_solvers() -> Outcome {
    let mut out = Outcome::new();
    let mut g = rng(202);
    for c in data() {
        for _ in 0..20 {
            let p = random_mp_matrix(&mut g, &c, ORD, true);
            let q = random_mp_matrix(&mut g, &c, ORD, true);
            let r = make_standard_realization(&p);
            match solve_twist_equiv(&p, &q, &r).and_then(|phi| twist_realization(&p, &r, &phi)) {
                Ok((pt, _)) => out.expect(s_agrees(&pt.p, &q.p, ORD), || format!("{}: P_phi != P'", c.label())),
                Err(e) => out.expect(false, || format!("{} twist solver: {e}", c.label())),
            }
            match solve_cocycle_equiv(&p, &q, &r).and_then(|chi| cocycle_realization(&p, &r, &chi)) {
                Ok((pc, _)) => out.expect(s_agrees(&pc.p, &q.p, ORD), || format!("{}: P_(chi) != P'", c.label())),
                Err(e) => out.expect(false, || format!("{} cocycle solver: {e}", c.label())),
            }
        }
    }
    out
}

fn c3_split_stability() -> Outcome {
    let mut out = Outcome::new();
    let mut g = rng(303);
    for c in data() {
        let n = c.n();
        for p in [MpMatrix::canonical(&c, ORD), random_mp_matrix(&mut g, &c, ORD, true)] {
            let r = make_standard_realization(&p);
            let (m, inv) = split_stability(&p, &r, &TwistMatrix::zero(2 * n, ORD)).expect("split minimal");
            out.expect(inv && m == s_identity(n, ORD), || format!("{}: Phi = 0 does not give I", c.label()));
            let vphi = random_antisymmetric(&mut g, n, ORD, true);
            let mut phi = s_zero(2 * n, 2 * n, ORD);
            for i in 0..n {
                for j in 0..n {
                    phi[i][n + j] = vphi[i][j].clone();
                    phi[n + i][j] = vphi[i][j].clone();
                }
            }
            let (m, _) = split_stability(&p, &r, &TwistMatrix::new(phi).expect("antisymmetric")).expect("split minimal");
            let want = s_sub(&s_identity(n, ORD), &s_scale(&s_mul(&p.p_a(), &vphi), &rat(2)));
            out.expect(s_agrees(&m, &want, ORD), || format!("{}: M != I - 2 P_a phi", c.label()));
            if p == MpMatrix::canonical(&c, ORD) {
                out.expect(s_agrees(&m, &s_identity(n, ORD), ORD), || format!("{}: P = DA does not give I", c.label()));
            }
        }
    }
    out
}

fn c4_lie_axioms() -> Outcome {
    let mut out = Outcome::new();
    for (c, want) in data().into_iter().zip([1, 2, 3, 4]) {
        let p = MpMatrix::canonical(&c, ORD);
        let r = make_standard_realization(&p).reduce();
        let g = build_mplba(&c, &p.reduce(), &r, c.default_bound()).expect("mplba");
        out.expect(g.basis.m() == want, || format!("{}: dim n+ = {}, want {want}", c.label(), g.basis.m()));
        let bad = check_bialgebra(&g);
        out.expect(bad.is_empty(), || format!("{}: {}", c.label(), bad[0]));
    }
    out
}

fn c5_lie_deformations() -> Outcome {
    let mut out = Outcome::new();
    let mut g = rng(505);
    for c in data() {
        for _ in 0..5 {
            let p = random_mp_matrix(&mut g, &c, ORD, true);
            let r = make_standard_realization(&p);
            let lie = build_mplba(&c, &p.reduce(), &r.reduce(), c.default_bound()).expect("mplba");
            let phi = random_twist(&mut g, r.t, ORD, true);
            let (pt, rt) = twist_realization(&p, &r, &phi).expect("twist");
            let direct = build_mplba(&c, &pt.reduce(), &rt.reduce(), c.default_bound()).expect("mplba");
            let bad = compare_tables(&lie_twist_deform(&lie, &phi.reduce()), &direct, false);
            out.expect(bad.is_empty(), || format!("{} twist: {}", c.label(), bad[0]));
            let chi = random_cocycle(&mut g, &r, ORD, true);
            let (pc, rc) = cocycle_realization(&p, &r, &chi).expect("cocycle");
            let direct = build_mplba(&c, &pc.reduce(), &rc.reduce(), c.default_bound()).expect("mplba");
            let bad = compare_tables(&lie_cocycle_deform(&lie, &chi.reduce()), &direct, false);
            out.expect(bad.is_empty(), || format!("{} cocycle: {}", c.label(), bad[0]));
        }
    }
    out
}

fn c6_hopf() -> Outcome {
    let mut out = Outcome::new();
    for (c, n) in data().into_iter().zip([4, 4, 3, 3]) {
        let u = context(&c, n, 606);
        out.report(&u.hopf_axiom_suite());
        for i in 0..u.n() {
            for j in 0..u.n() {
                if i != j {
                    out.report(&u.serre_skewprimitive_check(i, j));
                }
            }
        }
    }
    out
}

fn c7_twist() -> Outcome {
    let mut out = Outcome::new();
    let mut g = rng(707);
    for c in data() {
        let u = context(&c, 3, 707);
        for _ in 0..3 {
            let phi = random_twist(&mut g, u.t(), u.order() + 3, true);
            out.report(&u.verify_twist_theorem(&phi));
        }
    }
    out
}

fn c8_cocycle() -> Outcome {
    let mut out = Outcome::new();
    let mut g = rng(808);
    for c in data() {
        let u = context(&c, 3, 808);
        for _ in 0..3 {
            let chi = random_cocycle(&mut g, &u.r, u.order() + 3, true);
            out.report(&u.verify_cocycle_theorem(&chi));
            out.report(&u.cocycle_lemma_checks(&chi, 3));
        }
    }
    out
}

fn c9_pairing() -> Outcome {
    let mut out = Outcome::new();
    for c in data() {
        let u = context(&c, 3, 909);
        out.report(&u.pairing_check());
        out.report(&u.double_relations_check());
    }
    out
}

fn c10_rep() -> Outcome {
    let mut out = Outcome::new();
    let u = context(&CartanDatum::a2(), 3, 1010);
    out.report(&u.rep_oracle_check(4, 1010));
    out
}

fn c11_limit() -> Outcome {
    let mut out = Outcome::new();
    for c in data() {
        let perturbed = random_mp_matrix(&mut rng(1111), &c, 6, false);
        for p in [MpMatrix::canonical(&c, 6), perturbed] {
            let r = make_standard_realization(&p);
            let u = UContext::new(&p, &r, UOptions::new(3)).expect("context");
            match LimitContext::new(&u) {
                Ok(lc) => out.report(&lc.check_limit()),
                Err(e) => out.expect(false, || format!("{}: {e}", c.label())),
            }
        }
    }
    out
}

fn c12_squares() -> Outcome {
    let mut out = Outcome::new();
    let mut g = rng(1212);
    for c in data() {
        let u = context(&c, 3, 1212);
        let lc = match LimitContext::new(&u) {
            Ok(lc) => lc,
            Err(e) => {
                out.expect(false, || format!("{}: {e}", c.label()));
                continue;
            }
        };
        for _ in 0..3 {
            out.report(&lc.check_square_twist(&random_twist(&mut g, u.t(), u.order() + 3, true)));
            out.report(&lc.check_square_cocycle(&random_cocycle(&mut g, &u.r, u.order() + 3, true)));
        }
    }
    out
}

fn c13_confluence() -> Outcome {
    let mut out = Outcome::new();
    for c in data() {
        let u = context(&c, 3, 1313);
        out.report(&u.confluence_check(200, 5, 1313));
        out.report(&u.associativity_check(100, 3, 1314));
    }
    out
}

fn main() {
    type Criterion = (u32, &'static str, Option<u64>, fn() -> Outcome);
    let criteria: [Criterion; 13] = [
        (1, "realization axioms", Some(1), c1_realizations),
        (2, "equivalence solvers", Some(1), c2_solvers),
        (3, "split-stability matrix", None, c3_split_stability),
        (4, "Lie bialgebra axioms", Some(5), c4_lie_axioms),
        (5, "toral deformations of the Lie bialgebra", None, c5_lie_deformations),
        (6, "Hopf axioms and Serre skew-primitivity", Some(60), c6_hopf),
        (7, "stability under toral twists", Some(120), c7_twist),
        (8, "stability under toral 2-cocycles", Some(60), c8_cocycle),
        (9, "skew pairing, radical and double", Some(30), c9_pairing),
        (10, "representation oracle", Some(60), c10_rep),
        (11, "semiclassical limit", None, c11_limit),
        (12, "deformation commutes with specialization", Some(120), c12_squares),
        (13, "confluence and associativity", Some(60), c13_confluence),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, name, budget, run) in criteria {
        if !filter.is_empty() && !filter.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|s| elapsed < Duration::from_secs(s));
        let ok = out.ok && in_time;
        if !ok {
            failed += 1;
        }
        let budget_txt = budget.map(|s| format!(" (limit {s}s)")).unwrap_or_default();
        let mut line = format!(
            "criterion {k:>2} {}: {name}; {} checks in {:.2}s{budget_txt}",
            if ok { "PASS" } else { "FAIL" },
            out.checks,
            elapsed.as_secs_f64()
        );
        if !out.ok {
            line.push_str(&format!("; {}", out.detail));
        } else if !in_time {
            line.push_str("; over the time limit");
        }
        println!("{line}");
    }
    println!("acceptance: {failed} failing criteria");
    if failed > 0 {
        std::process::exit(1);
    }
}
