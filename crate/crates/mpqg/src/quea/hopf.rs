//! Coproduct, counit and antipode of U, and checks of the Hopf axioms.

use std::collections::BTreeMap;
use std::rc::Rc;

use super::{add_coeff, binomial, Gen, HMono, Mono, UContext, UElem, TL};
use crate::report::Report;

/// Element of a tensor power of U; keys are tuples of normal monomials.
pub type UTensor = BTreeMap<Vec<Mono>, TL>;

/// All vectors of `n` non-negative integers summing to `total`.
pub fn compositions(n: usize, total: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(n - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn t_add(acc: &mut UTensor, x: &UTensor, c: &TL) {
    for (k, v) in x {
        add_coeff(acc, k, &(v * c));
    }
}

pub fn t_sub(a: &UTensor, b: &UTensor) -> UTensor {
    let mut out = a.clone();
    for (k, v) in b {
        add_coeff(&mut out, k, &-v);
    }
    out
}

pub fn t_vanishes_to(a: &UTensor, n: i32) -> bool {
    a.values().all(|c| c.vanishes_to(n))
}

pub fn t_agrees(a: &UTensor, b: &UTensor, n: i32) -> bool {
    t_vanishes_to(&t_sub(a, b), n)
}

/// x_1 ⊗ x_2 ⊗ … as a tensor.
pub fn t_pure(xs: &[&UElem]) -> UTensor {
    let mut acc: UTensor = BTreeMap::from([(vec![], TL::one(i32::MAX / 4))]);
    for x in xs {
        let mut next = UTensor::new();
        for (k, c) in &acc {
            for (m, d) in &x.terms {
                let mut key = k.clone();
                key.push(m.clone());
                add_coeff(&mut next, &key, &(c * d));
            }
        }
        acc = next;
    }
    acc
}

/// Swaps the two legs of a 2-tensor.
pub fn t_flip(a: &UTensor) -> UTensor {
    a.iter().map(|(k, c)| (vec![k[1].clone(), k[0].clone()], c.clone())).collect()
}

/// Renders a tensor as `(c)*(m1 ⊗ m2) + …`.
pub fn t_render(a: &UTensor) -> String {
    if a.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = a
        .iter()
        .map(|(k, c)| {
            let legs: Vec<String> = k.iter().map(|m| m.to_string()).collect();
            format!("({c})*({})", legs.join(" ⊗ "))
        })
        .collect();
    parts.join(" + ")
}

impl UContext {
    /// Componentwise product in a tensor power of U.
    pub fn t_mul(&self, a: &UTensor, b: &UTensor) -> UTensor {
        let mut out = UTensor::new();
        for (ka, ca) in a {
            let Some(va) = ca.valuation() else { continue };
            for (kb, cb) in b {
                assert_eq!(ka.len(), kb.len(), "tensor arity mismatch");
                let Some(vb) = cb.valuation() else { continue };
                // the product coefficient is known only to this order
                if va + vb > (ca.order() + vb).min(cb.order() + va) {
                    continue;
                }
                let mut partial: UTensor = BTreeMap::from([(vec![], ca * cb)]);
                for (x, y) in ka.iter().zip(kb) {
                    let prod = self.mul_mono(x, y);
                    let mut next = UTensor::new();
                    for (k, c) in &partial {
                        for (m, d) in &prod.terms {
                            let mut key = k.clone();
                            key.push(m.clone());
                            add_coeff(&mut next, &key, &(c * d));
                        }
                    }
                    partial = next;
                }
                t_add(&mut out, &partial, &TL::one(self.w()));
            }
        }
        out
    }

    /// Multiplies the legs of a tensor together.
    pub fn t_contract(&self, a: &UTensor) -> UElem {
        let mut out = UElem::zero();
        for (k, c) in a {
            let mut acc = self.one();
            for m in k {
                acc = self.mul(&acc, &UElem::from_mono(m.clone(), TL::one(self.w())));
            }
            out.add_scaled(&acc, c);
        }
        out
    }

    /// Applies a linear map to leg `leg`, which may widen the tensor.
    pub fn t_map_leg<F: FnMut(&Mono) -> UTensor>(&self, a: &UTensor, leg: usize, mut f: F) -> UTensor {
        let mut out = UTensor::new();
        for (k, c) in a {
            let img = f(&k[leg]);
            for (ik, ic) in &img {
                let mut key = k[..leg].to_vec();
                key.extend(ik.iter().cloned());
                key.extend(k[leg + 1..].iter().cloned());
                add_coeff(&mut out, &key, &(c * ic));
            }
        }
        out
    }

    fn as_tensor1(x: &UElem) -> UTensor {
        x.terms.iter().map(|(m, c)| (vec![m.clone()], c.clone())).collect()
    }

    fn mono_elem(&self, m: Mono) -> UElem {
        UElem::from_mono(m, TL::one(self.w()))
    }

    /// e^{ħT_i^+} (sign +1) or e^{−ħT_i^-} (sign −1), and their inverses.
    pub fn k_plus(&self, i: usize, inverse: bool) -> UElem {
        let v: Vec<TL> = self.tplus(i).iter().map(|x| if inverse { -x } else { x.clone() }).collect();
        self.exp_h(&v)
    }

    pub fn k_minus(&self, i: usize, inverse: bool) -> UElem {
        let v: Vec<TL> = self.tminus(i).iter().map(|x| if inverse { x.clone() } else { -x }).collect();
        self.exp_h(&v)
    }

    /// Δ on a single generator.
    pub fn coproduct_gen(&self, g: Gen) -> UTensor {
        let one = self.one();
        match g {
            Gen::E(i) => {
                let e = self.e(i);
                let mut t = t_pure(&[&e, &one]);
                t_add(&mut t, &t_pure(&[&self.k_plus(i, false), &e]), &TL::one(self.w()));
                t
            }
            Gen::F(i) => {
                let f = self.f(i);
                let mut t = t_pure(&[&f, &self.k_minus(i, false)]);
                t_add(&mut t, &t_pure(&[&one, &f]), &TL::one(self.w()));
                t
            }
            Gen::H(g) => {
                let h = self.h(g);
                let mut t = t_pure(&[&h, &one]);
                t_add(&mut t, &t_pure(&[&one, &h]), &TL::one(self.w()));
                t
            }
        }
    }

    fn coproduct_h(&self, c: &HMono) -> UTensor {
        let mut out = UTensor::new();
        let t = self.t();
        let mut stack: Vec<(HMono, HMono, crate::series::Rational)> = vec![(vec![0; t], vec![0; t], num_traits::One::one())];
        for g in 0..t {
            let mut next = Vec::new();
            for (l, r, coef) in &stack {
                for a in 0..=c[g] {
                    let mut l2 = l.clone();
                    let mut r2 = r.clone();
                    l2[g] = a;
                    r2[g] = c[g] - a;
                    next.push((l2, r2, coef * binomial(c[g], a)));
                }
            }
            stack = next;
        }
        for (l, r, coef) in stack {
            let ml = Mono { f: vec![], h: l, e: vec![] };
            let mr = Mono { f: vec![], h: r, e: vec![] };
            add_coeff(&mut out, &vec![ml, mr], &TL::constant(coef, self.w()));
        }
        out
    }

    /// Δ on a normal monomial, memoized; pure words recurse on their last letter.
    pub fn coproduct_mono(&self, m: &Mono) -> Rc<UTensor> {
        if let Some(v) = self.caches.borrow().coproduct.get(m) {
            return v.clone();
        }
        let t = self.t();
        let res = if m.is_one() {
            t_pure(&[&self.one(), &self.one()])
        } else if m.is_toral() {
            self.coproduct_h(&m.h)
        } else if m.e.is_empty() && m.h.iter().all(|&x| x == 0) {
            let (last, rest) = m.f.split_last().unwrap();
            let prefix = Mono { f: rest.to_vec(), h: vec![0; t], e: vec![] };
            self.t_mul(&self.coproduct_mono(&prefix), &self.coproduct_gen(Gen::F(*last as usize)))
        } else if m.f.is_empty() && m.h.iter().all(|&x| x == 0) {
            let (last, rest) = m.e.split_last().unwrap();
            let prefix = Mono { f: vec![], h: vec![0; t], e: rest.to_vec() };
            self.t_mul(&self.coproduct_mono(&prefix), &self.coproduct_gen(Gen::E(*last as usize)))
        } else {
            let fm = Mono { f: m.f.clone(), h: vec![0; t], e: vec![] };
            let hm = Mono { f: vec![], h: m.h.clone(), e: vec![] };
            let em = Mono { f: vec![], h: vec![0; t], e: m.e.clone() };
            let fh = self.t_mul(&self.coproduct_mono(&fm), &self.coproduct_mono(&hm));
            self.t_mul(&fh, &self.coproduct_mono(&em))
        };
        let rc = Rc::new(res);
        self.caches.borrow_mut().coproduct.insert(m.clone(), rc.clone());
        rc
    }

    pub fn coproduct(&self, x: &UElem) -> UTensor {
        let mut out = UTensor::new();
        for (m, c) in &x.terms {
            t_add(&mut out, &self.coproduct_mono(m), c);
        }
        out
    }

    /// ε: the coefficient of the empty monomial.
    pub fn counit(&self, x: &UElem) -> TL {
        x.terms.get(&Mono::one(self.t())).cloned().unwrap_or_else(|| TL::zero(self.w()))
    }

    /// S on a normal monomial (anti-multiplicative), memoized.
    pub fn antipode_mono(&self, m: &Mono) -> Rc<UElem> {
        if let Some(v) = self.caches.borrow().antipode.get(m) {
            return v.clone();
        }
        let t = self.t();
        let mut acc = self.one();
        // S(F h E) = S(E) S(h) S(F), and S reverses words
        for &i in m.e.iter().rev() {
            let s = self.mul(&self.k_plus(i as usize, true), &self.e(i as usize)).neg();
            acc = self.mul(&acc, &s);
        }
        if !m.h.iter().all(|&x| x == 0) {
            let sign = if m.h_degree().is_multiple_of(2) { 1 } else { -1 };
            let hm = self.mono_elem(Mono { f: vec![], h: m.h.clone(), e: vec![] }).scale_q(&crate::series::rat(sign));
            acc = self.mul(&acc, &hm);
        }
        for &i in m.f.iter().rev() {
            let s = self.mul(&self.f(i as usize), &self.k_minus(i as usize, true)).neg();
            acc = self.mul(&acc, &s);
        }
        let _ = t;
        let rc = Rc::new(acc);
        self.caches.borrow_mut().antipode.insert(m.clone(), rc.clone());
        rc
    }

    pub fn antipode(&self, x: &UElem) -> UElem {
        let mut out = UElem::zero();
        for (m, c) in &x.terms {
            out.add_scaled(&self.antipode_mono(m), c);
        }
        out
    }

    /// (Δ⊗id)Δ and (id⊗Δ)Δ of x.
    pub fn coassociativity_sides(&self, x: &UElem) -> (UTensor, UTensor) {
        let d = self.coproduct(x);
        let l = self.t_map_leg(&d, 0, |m| (*self.coproduct_mono(m)).clone());
        let r = self.t_map_leg(&d, 1, |m| (*self.coproduct_mono(m)).clone());
        (l, r)
    }

    /// Checks every Hopf axiom on one element.
    pub fn check_hopf_axioms_on(&self, name: &str, x: &UElem, report: &mut Report) {
        let n = self.order();
        let (l, r) = self.coassociativity_sides(x);
        report.check(format!("coassociativity {name}"), t_agrees(&l, &r, n), t_render(&t_sub(&l, &r)));
        let d = self.coproduct(x);
        let eps = |m: &Mono| -> UTensor {
            let e = self.counit(&self.mono_elem(m.clone()));
            if e.is_zero() {
                UTensor::new()
            } else {
                BTreeMap::from([(vec![], e)])
            }
        };
        let left = Self::as_tensor1(x);
        let c1 = self.t_map_leg(&d, 0, eps);
        let c2 = self.t_map_leg(&d, 1, eps);
        report.check(format!("counit left {name}"), t_agrees(&c1, &left, n), t_render(&t_sub(&c1, &left)));
        report.check(format!("counit right {name}"), t_agrees(&c2, &left, n), t_render(&t_sub(&c2, &left)));
        let target = self.scalar(self.counit(x));
        let s_leg = |leg: usize| {
            let mapped = self.t_map_leg(&d, leg, |m| Self::as_tensor1(&self.antipode_mono(m)));
            self.t_contract(&mapped)
        };
        let a1 = s_leg(0);
        let a2 = s_leg(1);
        report.check(format!("antipode left {name}"), a1.agrees_to(&target, n), a1.sub(&target).to_string());
        report.check(format!("antipode right {name}"), a2.agrees_to(&target, n), a2.sub(&target).to_string());
    }

    /// All generators, as (name, element).
    pub fn generators(&self) -> Vec<(String, Gen)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            out.push((Gen::E(i).to_string(), Gen::E(i)));
            out.push((Gen::F(i).to_string(), Gen::F(i)));
        }
        for g in 0..self.t() {
            out.push((Gen::H(g).to_string(), Gen::H(g)));
        }
        out
    }

    /// Hopf axioms on all generators and all products of two generators.
    pub fn hopf_axiom_suite(&self) -> Report {
        let mut rep = Report::new("Hopf structure", &self.cartan.label());
        let gens = self.generators();
        for (name, g) in &gens {
            self.check_hopf_axioms_on(name, &self.gen(*g), &mut rep);
        }
        for (n1, g1) in &gens {
            for (n2, g2) in &gens {
                self.check_hopf_axioms_on(&format!("{n1}*{n2}"), &self.word(&[*g1, *g2]), &mut rep);
            }
        }
        // Δ is multiplicative on the generators that were multiplied above
        for (n1, g1) in &gens {
            for (n2, g2) in &gens {
                let lhs = self.coproduct(&self.word(&[*g1, *g2]));
                let rhs = self.t_mul(&self.coproduct_gen(*g1), &self.coproduct_gen(*g2));
                rep.check(format!("multiplicativity {n1}*{n2}"), t_agrees(&lhs, &rhs, self.order()), t_render(&t_sub(&lhs, &rhs)));
            }
        }
        rep
    }

    /// Skew-primitivity of the Serre elements for the pair (i, j), computed
    /// in the free algebra where the Serre relations are not imposed.
    pub fn serre_skewprimitive_check(&self, i: usize, j: usize) -> Report {
        let mut rep = Report::new("Serre elements are skew-primitive", &self.cartan.label());
        let free = self.with_options(super::UOptions { serre: false, ..self.opts }).expect("same data");
        let m = self.cartan.serre_degree(i, j) as i64;
        let n = self.order();
        let scale = |v: &[TL], s: i64| -> Vec<TL> { v.iter().map(|x| x.scale(&crate::series::rat(s))).collect() };
        let add = |a: &[TL], b: &[TL]| -> Vec<TL> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
        let one = free.one();
        let e = free.serre_elem(i, j, true);
        let kp = free.exp_h(&add(&scale(free.tplus(i), m), free.tplus(j)));
        let mut expect = t_pure(&[&e, &one]);
        t_add(&mut expect, &t_pure(&[&kp, &e]), &TL::one(free.w()));
        let got = free.coproduct(&e);
        rep.check(format!("E-Serre ({},{})", i + 1, j + 1), t_agrees(&got, &expect, n), t_render(&t_sub(&got, &expect)));
        let f = free.serre_elem(i, j, false);
        let km = free.exp_h(&scale(&add(&scale(free.tminus(i), m), free.tminus(j)), -1));
        let mut expect = t_pure(&[&f, &km]);
        t_add(&mut expect, &t_pure(&[&one, &f]), &TL::one(free.w()));
        let got = free.coproduct(&f);
        rep.check(format!("F-Serre ({},{})", i + 1, j + 1), t_agrees(&got, &expect, n), t_render(&t_sub(&got, &expect)));
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::CartanDatum;
    use crate::quea::tests::ctx;

    #[test]
    fn coproduct_of_h_is_primitive() {
        let u = ctx(&CartanDatum::a1(), 3, true);
        let d = u.coproduct(&u.h(0));
        let mut expect = t_pure(&[&u.h(0), &u.one()]);
        t_add(&mut expect, &t_pure(&[&u.one(), &u.h(0)]), &TL::one(u.w()));
        assert!(t_agrees(&d, &expect, 3));
        assert!(u.counit(&u.e(0)).is_zero());
        assert!(u.counit(&u.one()).agrees_to(&TL::one(3), 3));
    }

    #[test]
    fn antipode_kills_e() {
        let u = ctx(&CartanDatum::a1(), 3, true);
        let mut rep = Report::new("t", "A1");
        u.check_hopf_axioms_on("E1", &u.e(0), &mut rep);
        u.check_hopf_axioms_on("E1*F1", &u.word(&[Gen::E(0), Gen::F(0)]), &mut rep);
        assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn serre_elements_are_skew_primitive() {
        for c in [CartanDatum::a1xa1(), CartanDatum::a2()] {
            let u = ctx(&c, 3, true);
            for (i, j) in [(0, 1), (1, 0)] {
                let rep = u.serre_skewprimitive_check(i, j);
                assert!(rep.passed(), "{}", rep.to_text());
            }
        }
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(2, 3).len(), 4);
        assert_eq!(compositions(3, 2).len(), 6);
    }
}
