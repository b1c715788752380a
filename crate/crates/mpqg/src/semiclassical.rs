//! Specialization at ħ = 0: the semiclassical cobracket, the comparison of
//! U mod ħ with the Lie bialgebra of (P̄, R̄), and the two squares saying
//! that toral deformations commute with specialization.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::json;
use thiserror::Error;

use crate::cartan::{cocycle_realization, CartanError, CocycleForm, TwistMatrix};
use crate::liebialg::{
    build_mplba, compare_tables, lie_cocycle_deform, lie_twist_deform, lvec_axpy, tensor_add_term, LieError, LieWord, LVec,
    MpLbA, Part, Tensor2,
};
use crate::quea::hopf::{t_flip, t_sub, UTensor};
use crate::quea::{Mono, QueaError, UContext, UElem};
use crate::report::Report;
use crate::series::Rational;

#[derive(Debug, Error)]
pub enum LimitError {
    #[error(transparent)]
    Quea(#[from] QueaError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error("the semiclassical limit needs truncation order at least 2, got {0}")]
    OrderTooSmall(i32),
    #[error("not liftable: {0}")]
    NotLiftable(String),
}

/// An element of U mod ħ in the normal-monomial basis.
pub type Classical = BTreeMap<Mono, Rational>;

/// Constant term of every coefficient; fails if a negative power of ħ is present.
pub fn mod_hbar(x: &UElem) -> Result<Classical, LimitError> {
    let mut out = Classical::new();
    for (m, c) in &x.terms {
        if c.valuation().is_some_and(|v| v < 0) {
            return Err(QueaError::LaurentLeak(format!("coefficient of {m:?}")).into());
        }
        let c0 = c.coeff(0);
        if !c0.is_zero() {
            out.insert(m.clone(), c0);
        }
    }
    Ok(out)
}

fn axpy(acc: &mut Classical, c: &Rational, v: &Classical) {
    for (m, d) in v {
        let e = acc.entry(m.clone()).or_insert_with(Rational::zero);
        *e += c * d;
        if e.is_zero() {
            acc.remove(m);
        }
    }
}

/// Echelon form of the images ι(k), used to read classical elements back in
/// the Lie basis.
#[derive(Debug, Clone)]
struct Span {
    rows: Vec<(Mono, Classical, LVec)>,
}

impl Span {
    fn new(images: &[Classical]) -> Result<Self, LimitError> {
        let mut span = Span { rows: Vec::new() };
        for (k, v) in images.iter().enumerate() {
            let (rest, combo) = span.reduce(v);
            let mut combo: LVec = combo.into_iter().map(|(a, c)| (a, -c)).collect();
            lvec_axpy(&mut combo, &Rational::one(), &LVec::from([(k, Rational::one())]));
            let Some((pivot, _)) = rest.iter().next_back() else {
                return Err(LimitError::NotLiftable(format!("image of basis element {k} is dependent on earlier ones")));
            };
            span.rows.push((pivot.clone(), rest.clone(), combo));
        }
        Ok(span)
    }

    /// Returns the remainder and the combination of basis elements removed.
    fn reduce(&self, v: &Classical) -> (Classical, LVec) {
        let mut rest = v.clone();
        let mut combo = LVec::new();
        for (pivot, row, rc) in &self.rows {
            if let Some(c) = rest.get(pivot).cloned() {
                let s = c / &row[pivot];
                axpy(&mut rest, &-s.clone(), row);
                lvec_axpy(&mut combo, &s, rc);
            }
        }
        (rest, combo)
    }

    fn decompose(&self, v: &Classical) -> Option<LVec> {
        let (rest, combo) = self.reduce(v);
        rest.is_empty().then_some(combo)
    }
}

/// A context of U paired with the Lie bialgebra of its reduction mod ħ.
pub struct LimitContext<'a> {
    pub u: &'a UContext,
    pub g: MpLbA,
    /// ι(k): the basis element k as an iterated commutator in U.
    pub iota: Vec<UElem>,
    span: Span,
}

fn word_elem(u: &UContext, w: &LieWord, positive: bool) -> UElem {
    match w {
        LieWord::Gen(i) => {
            if positive {
                u.e(*i)
            } else {
                u.f(*i)
            }
        }
        LieWord::Br(a, b) => u.commutator(&word_elem(u, a, positive), &word_elem(u, b, positive)),
    }
}

impl<'a> LimitContext<'a> {
    pub fn new(u: &'a UContext) -> Result<Self, LimitError> {
        if u.order() < 2 {
            return Err(LimitError::OrderTooSmall(u.order()));
        }
        let g = build_mplba(&u.cartan, &u.p.reduce(), &u.r.reduce(), u.cartan.default_bound())?;
        let iota: Vec<UElem> = (0..g.dim())
            .map(|k| match g.basis.part(k) {
                (Part::Neg, j) => word_elem(u, &g.basis.nil[j].word, false),
                (Part::H, h) => u.h(h),
                (Part::Pos, j) => word_elem(u, &g.basis.nil[j].word, true),
            })
            .collect();
        let images = iota.iter().map(mod_hbar).collect::<Result<Vec<_>, _>>()?;
        let span = Span::new(&images)?;
        Ok(LimitContext { u, g, iota, span })
    }

    /// Reads x mod ħ as an element of the Lie algebra.
    pub fn classical_part(&self, x: &UElem) -> Result<LVec, LimitError> {
        let c = mod_hbar(x)?;
        self.span.decompose(&c).ok_or_else(|| LimitError::NotLiftable(format!("{} is not in the Lie part mod hbar", x)))
    }

    /// Reads the ħ¹ coefficient of an antisymmetric tensor in g ⊗ g.
    fn tensor_at_order_one(&self, d: &UTensor) -> Result<Tensor2, LimitError> {
        // regroup by right leg, decompose the left legs
        let mut by_right: BTreeMap<Mono, Classical> = BTreeMap::new();
        for (legs, c) in d {
            if c.valuation().is_some_and(|v| v < 1) {
                return Err(LimitError::NotLiftable(format!(
                    "Delta - Delta^op does not vanish mod hbar on {:?}",
                    legs
                )));
            }
            let c1 = c.coeff(1);
            if !c1.is_zero() {
                by_right.entry(legs[1].clone()).or_default().insert(legs[0].clone(), c1);
            }
        }
        let mut by_left: BTreeMap<usize, Classical> = BTreeMap::new();
        for (right, left) in by_right {
            let v = self
                .span
                .decompose(&left)
                .ok_or_else(|| LimitError::NotLiftable("left tensor leg outside the Lie part".into()))?;
            for (a, c) in v {
                let e = by_left.entry(a).or_default().entry(right.clone()).or_insert_with(Rational::zero);
                *e += c;
            }
        }
        let mut out = Tensor2::new();
        for (a, right) in by_left {
            let right: Classical = right.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            let v = self
                .span
                .decompose(&right)
                .ok_or_else(|| LimitError::NotLiftable("right tensor leg outside the Lie part".into()))?;
            for (b, c) in v {
                tensor_add_term(&mut out, (a, b), c);
            }
        }
        Ok(out)
    }

    /// (Δ(x) − Δ^op(x))/ħ mod ħ in the basis of g ⊗ g.
    pub fn semiclassical_cobracket(&self, x: &UElem) -> Result<Tensor2, LimitError> {
        self.classical_part(x)?;
        let d = self.u.coproduct(x);
        self.tensor_at_order_one(&t_sub(&d, &t_flip(&d)))
    }

    /// Same for a coproduct supplied by the caller, e.g. a twisted one.
    pub fn cobracket_of(&self, x: &UElem, coproduct: &UTensor) -> Result<Tensor2, LimitError> {
        self.classical_part(x)?;
        self.tensor_at_order_one(&t_sub(coproduct, &t_flip(coproduct)))
    }

    fn generator_indices(&self) -> Vec<(String, usize)> {
        let b = &self.g.basis;
        let n = self.u.n();
        (0..n)
            .map(|i| (format!("E{}", i + 1), b.e(i)))
            .chain((0..n).map(|i| (format!("F{}", i + 1), b.f(i))))
            .chain((0..b.t).map(|h| (b.label(b.h(h)), b.h(h))))
            .collect()
    }

    /// Compares U mod ħ with the tables of g; `g` is normally `self.g`.
    pub fn check_limit_against(&self, g: &MpLbA) -> Report {
        let u = self.u;
        let mut rep = Report::new("semiclassical limit of the quantized algebra", &u.cartan.label())
            .with_parameters(json!({"order": u.order(), "dim": g.dim(), "bound_too_small": g.bound_too_small}));
        let label = |k: usize| g.basis.label(k);
        // cobrackets on the whole basis, generators named first
        for (name, k) in self.generator_indices() {
            match self.semiclassical_cobracket(&self.iota[k]) {
                Ok(t) => {
                    let ok = t == g.cobracket[k];
                    let w = if ok { String::new() } else { format!("{} vs {}", g.render_tensor(&t), g.render_tensor(&g.cobracket[k])) };
                    rep.check(format!("cobracket of {name}"), ok, w);
                }
                Err(e) => rep.check(format!("cobracket of {name}"), false, e.to_string()),
            }
        }
        let mut bad = Vec::new();
        for k in 0..g.dim() {
            match self.semiclassical_cobracket(&self.iota[k]) {
                Ok(t) if t == g.cobracket[k] => {}
                Ok(t) => bad.push(format!("{}: {}", label(k), g.render_tensor(&t))),
                Err(e) => bad.push(format!("{}: {e}", label(k))),
            }
        }
        rep.check("cobracket on every basis element", bad.is_empty(), bad.join("; "));
        // the defining relations mod ħ, in bracket form on the basis
        let mut bad = Vec::new();
        for a in 0..g.dim() {
            for b in 0..g.dim() {
                let c = u.commutator(&self.iota[a], &self.iota[b]);
                match self.classical_part(&c) {
                    Ok(v) if v == g.bracket[a][b] => {}
                    Ok(v) => bad.push(format!("[{}, {}] = {}", label(a), label(b), g.render_vec(&v))),
                    Err(e) => bad.push(format!("[{}, {}]: {e}", label(a), label(b))),
                }
            }
        }
        rep.check("commutators mod hbar match the bracket table", bad.is_empty(), bad.into_iter().take(3).collect::<Vec<_>>().join("; "));
        for i in 0..u.n() {
            let name = format!("E{0}F{0} relation reduces to (T+{0} + T-{0})/(2d)", i + 1);
            let want = g.bracket[g.basis.e(i)][g.basis.f(i)].clone();
            match self.classical_part(&u.ktilde_elem(i)) {
                Ok(v) => {
                    let w = if v == want { String::new() } else { g.render_vec(&v) };
                    rep.check(name, v == want, w);
                }
                Err(e) => rep.check(name, false, e.to_string()),
            }
        }
        // classical Serre relations: (ad E_i)^{1−a_ij} E_j vanishes mod ħ
        for i in 0..u.n() {
            for j in 0..u.n() {
                if i == j {
                    continue;
                }
                let m = (1 - u.cartan.a[i][j]) as usize;
                for positive in [true, false] {
                    let (xi, xj) = if positive { (u.e(i), u.e(j)) } else { (u.f(i), u.f(j)) };
                    let (mut x, mut v) = (xj, g.unit(if positive { g.basis.e(j) } else { g.basis.f(j) }));
                    let gi = g.unit(if positive { g.basis.e(i) } else { g.basis.f(i) });
                    for _ in 0..m {
                        x = u.commutator(&xi, &x);
                        v = g.br(&gi, &v);
                    }
                    let ok = mod_hbar(&x).map(|c| c.is_empty()).unwrap_or(false) && v.is_empty();
                    let letter = if positive { "E" } else { "F" };
                    rep.check(format!("classical Serre relation ({letter}{}, {letter}{})", i + 1, j + 1), ok, "");
                }
            }
        }
        rep
    }

    pub fn check_limit(&self) -> Report {
        self.check_limit_against(&self.g)
    }

    /// Deform by a toral twist then specialize, versus specialize then deform.
    pub fn check_square_twist(&self, phi: &TwistMatrix) -> Report {
        let u = self.u;
        let mut rep = Report::new("twisting commutes with specialization", &u.cartan.label())
            .with_parameters(json!({"order": u.order(), "phi": serde_json::to_value(&phi.phi).unwrap()}));
        let tg = match u.twisted_generators(phi) {
            Ok(t) => t,
            Err(e) => {
                rep.check("twisted realization", false, e.to_string());
                return rep;
            }
        };
        let b = &self.g.basis;
        let mut gens: Vec<(usize, UElem)> = Vec::new();
        for i in 0..u.n() {
            gens.push((b.e(i), tg.e[i].clone()));
            gens.push((b.f(i), tg.f[i].clone()));
        }
        for h in 0..b.t {
            gens.push((b.h(h), u.h(h)));
        }
        let mut path = self.g.clone();
        for (k, x) in &gens {
            match self.cobracket_of(x, &u.twisted_coproduct(x, phi)) {
                Ok(t) => path.cobracket[*k] = t,
                Err(e) => {
                    rep.check(format!("cobracket of twisted {}", b.label(*k)), false, e.to_string());
                    return rep;
                }
            }
        }
        if let Err(e) = self.fill_brackets(&mut path, &gens, |a, b| Ok(u.commutator(a, b))) {
            rep.check("brackets of twisted generators", false, e.to_string());
            return rep;
        }
        let theta = phi.reduce();
        let lie = lie_twist_deform(&self.g, &theta);
        let bad = compare_tables(&path, &lie, true);
        rep.check("deform then specialize equals the Lie twist by the reduced matrix", bad.is_empty(), bad.join("; "));
        match build_mplba(&u.cartan, &tg.p.reduce(), &tg.realization.reduce(), self.g.degree_bound) {
            Ok(direct) => {
                let bad = compare_tables(&path, &direct, true);
                rep.check("deform then specialize equals the algebra of the twisted data", bad.is_empty(), bad.join("; "));
            }
            Err(e) => rep.check("algebra of the twisted data", false, e.to_string()),
        }
        rep
    }

    /// Deform by a toral 2-cocycle then specialize, versus specialize then deform.
    pub fn check_square_cocycle(&self, chi: &CocycleForm) -> Report {
        let u = self.u;
        let mut rep = Report::new("cocycle deformation commutes with specialization", &u.cartan.label())
            .with_parameters(json!({"order": u.order(), "chi": serde_json::to_value(&chi.x).unwrap()}));
        let (pc, rc) = match cocycle_realization(&u.p, &u.r, chi) {
            Ok(x) => x,
            Err(e) => {
                rep.check("deformed realization", false, e.to_string());
                return rep;
            }
        };
        let gens: Vec<(usize, UElem)> = self.generator_indices().into_iter().map(|(_, k)| (k, self.iota[k].clone())).collect();
        let mut path = self.g.clone();
        // the coproduct is not deformed
        for (k, x) in &gens {
            match self.semiclassical_cobracket(x) {
                Ok(t) => path.cobracket[*k] = t,
                Err(e) => {
                    rep.check(format!("cobracket of {}", self.g.basis.label(*k)), false, e.to_string());
                    return rep;
                }
            }
        }
        let deformed = |a: &UElem, b: &UElem| -> Result<UElem, LimitError> {
            Ok(u.deformed_mul(a, b, chi)?.sub(&u.deformed_mul(b, a, chi)?))
        };
        if let Err(e) = self.fill_brackets(&mut path, &gens, deformed) {
            rep.check("deformed commutators of generators", false, e.to_string());
            return rep;
        }
        let lie = lie_cocycle_deform(&self.g, &chi.reduce());
        let bad = compare_tables(&path, &lie, true);
        rep.check("deform then specialize equals the Lie cocycle deformation", bad.is_empty(), bad.join("; "));
        match build_mplba(&u.cartan, &pc.reduce(), &rc.reduce(), self.g.degree_bound) {
            Ok(direct) => {
                let bad = compare_tables(&path, &direct, true);
                rep.check("deform then specialize equals the algebra of the deformed data", bad.is_empty(), bad.join("; "));
            }
            Err(e) => rep.check("algebra of the deformed data", false, e.to_string()),
        }
        rep
    }

    fn fill_brackets<F>(&self, table: &mut MpLbA, gens: &[(usize, UElem)], bracket: F) -> Result<(), LimitError>
    where
        F: Fn(&UElem, &UElem) -> Result<UElem, LimitError>,
    {
        for (a, x) in gens {
            for (b, y) in gens {
                table.bracket[*a][*b] = self.classical_part(&bracket(x, y)?)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{make_standard_realization, random_cocycle, random_mp_matrix, random_twist, CartanDatum, MpMatrix};
    use crate::quea::UOptions;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn context(c: &CartanDatum, n: i32, seed: Option<u64>) -> UContext {
        let p = match seed {
            None => MpMatrix::canonical(c, n + 3),
            Some(s) => random_mp_matrix(&mut ChaCha8Rng::seed_from_u64(s), c, n + 3, false),
        };
        let r = make_standard_realization(&p);
        UContext::new(&p, &r, UOptions::new(n)).unwrap()
    }

    #[test]
    fn sl2_cobrackets() {
        let u = context(&CartanDatum::a1(), 2, None);
        let lc = LimitContext::new(&u).unwrap();
        assert!(lc.semiclassical_cobracket(&u.h(0)).unwrap().is_empty());
        let b = &lc.g.basis;
        let te = lc.semiclassical_cobracket(&u.e(0)).unwrap();
        let tplus = &lc.g.r.tplus[0];
        let mut want = Tensor2::new();
        for (h, c) in tplus.iter().enumerate() {
            tensor_add_term(&mut want, (b.h(h), b.e(0)), c.clone());
            tensor_add_term(&mut want, (b.e(0), b.h(h)), -c.clone());
        }
        assert_eq!(te, want);
    }

    #[test]
    fn limit_a2_canonical_and_perturbed() {
        for seed in [None, Some(3)] {
            let u = context(&CartanDatum::a2(), 2, seed);
            let lc = LimitContext::new(&u).unwrap();
            let rep = lc.check_limit();
            assert!(rep.passed(), "{}", rep.to_text());
        }
    }

    #[test]
    fn flipped_cobracket_is_reported() {
        let u = context(&CartanDatum::a1(), 2, None);
        let lc = LimitContext::new(&u).unwrap();
        let mut g = lc.g.clone();
        let e = g.basis.e(0);
        g.cobracket[e] = g.cobracket[e].iter().map(|(k, c)| (*k, -c.clone())).collect();
        let rep = lc.check_limit_against(&g);
        assert!(rep.failures().iter().any(|c| c.name == "cobracket of E1"), "{}", rep.to_text());
    }

    #[test]
    fn non_lie_element_is_rejected() {
        let u = context(&CartanDatum::a1(), 2, None);
        let lc = LimitContext::new(&u).unwrap();
        let x = u.mul(&u.e(0), &u.e(0));
        assert!(matches!(lc.semiclassical_cobracket(&x), Err(LimitError::NotLiftable(_))));
    }

    #[test]
    fn order_one_is_refused() {
        let u = context(&CartanDatum::a1(), 1, None);
        assert!(matches!(LimitContext::new(&u), Err(LimitError::OrderTooSmall(1))));
    }

    #[test]
    fn squares_a2() {
        let u = context(&CartanDatum::a2(), 2, Some(5));
        let lc = LimitContext::new(&u).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi = random_twist(&mut rng, u.t(), u.order(), true);
        let rep = lc.check_square_twist(&phi);
        assert!(rep.passed(), "{}", rep.to_text());
        let chi = random_cocycle(&mut rng, &u.r, u.order(), true);
        let rep = lc.check_square_cocycle(&chi);
        assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn limit_does_not_depend_on_the_order() {
        let u2 = context(&CartanDatum::a2(), 2, Some(7));
        let u3 = u2.with_options(UOptions::new(3)).unwrap();
        let (l2, l3) = (LimitContext::new(&u2).unwrap(), LimitContext::new(&u3).unwrap());
        for k in 0..l2.g.dim() {
            assert_eq!(l2.semiclassical_cobracket(&l2.iota[k]).unwrap(), l3.semiclassical_cobracket(&l3.iota[k]).unwrap());
        }
    }
}
