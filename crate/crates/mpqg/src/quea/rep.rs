//! The two tensor-algebra representations of the algebra without Serre
//! relations, used as an independent oracle for the rewriting engine.
//!
//! On v_J = v_{j_1} ⋯ v_{j_r} the lowering representation acts by
//! F_i.v_J = v_{(i,J)}, T.v_J = (λ(T) − α_J(T)) v_J and
//! E_i.v_J = Σ_{j_ℓ = i} (q^{λ(T_i^+) − α_{J_ℓ}(T_i^+)} − q^{−λ(T_i^-) + α_{J_ℓ}(T_i^-)})/(q_i − q_i^{-1}) v_{Ĵ_ℓ},
//! where J_ℓ is the tail after position ℓ. The raising representation swaps
//! the roles of E and F.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{lift, Gen, HMono, UContext, UElem, TL};
use crate::report::Report;
use crate::series::exp_hbar;

pub type RepVector = BTreeMap<Vec<u8>, TL>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepKind {
    /// F_i prepends i.
    Lowering,
    /// E_i prepends i.
    Raising,
}

pub struct TensorRep<'a> {
    u: &'a UContext,
    /// λ(H_g) for each basis element of h.
    lambda: Vec<TL>,
    kind: RepKind,
}

fn add_into(acc: &mut RepVector, j: Vec<u8>, c: TL) {
    if c.is_zero() {
        return;
    }
    let e = acc.entry(j.clone()).or_insert_with(|| TL::zero(c.order()));
    *e += &c;
    if e.is_zero() {
        acc.remove(&j);
    }
}

pub fn basis_vector(j: &[u8], order: i32) -> RepVector {
    let mut v = RepVector::new();
    v.insert(j.to_vec(), TL::one(order));
    v
}

pub fn rep_sub(a: &RepVector, b: &RepVector) -> RepVector {
    let mut out = a.clone();
    for (k, c) in b {
        add_into(&mut out, k.clone(), -c.clone());
    }
    out
}

pub fn rep_vanishes_to(a: &RepVector, n: i32) -> bool {
    a.values().all(|c| c.vanishes_to(n))
}

impl<'a> TensorRep<'a> {
    pub fn new(u: &'a UContext, lambda: Vec<TL>, kind: RepKind) -> Self {
        let w1 = u.w() + 1;
        TensorRep { u, lambda: lambda.iter().map(|c| lift(c, w1)).collect(), kind }
    }

    fn sign(&self) -> i64 {
        match self.kind {
            RepKind::Lowering => -1,
            RepKind::Raising => 1,
        }
    }

    /// λ(T) for T = Σ t_g H_g.
    fn lam(&self, t: &[TL]) -> TL {
        let mut acc = TL::zero(self.u.w() + 1);
        for (c, l) in t.iter().zip(&self.lambda) {
            acc += &(c * l);
        }
        acc
    }

    /// α_J(T).
    fn alpha_word(&self, j: &[u8], t: &[TL]) -> TL {
        let mut acc = TL::zero(self.u.w() + 1);
        for &x in j {
            for (g, c) in t.iter().enumerate() {
                acc += &(c * &lift(&self.u.alpha(x as usize, g), self.u.w() + 1));
            }
        }
        acc
    }

    /// Eigenvalue of H_g on v_J.
    fn h_eigen(&self, g: usize, j: &[u8]) -> TL {
        let mut e = vec![TL::zero(self.u.w() + 1); self.u.t()];
        e[g] = TL::one(self.u.w() + 1);
        let a = self.alpha_word(j, &e);
        (&self.lambda[g] + &a.scale(&crate::series::rat(self.sign()))).truncate(self.u.w())
    }

    /// Coefficient of the annihilating generator at position ℓ with tail `tail`.
    fn ladder_coeff(&self, i: usize, tail: &[u8]) -> TL {
        let u = self.u;
        let tp = u.tplus(i).to_vec();
        let tm = u.tminus(i).to_vec();
        let (num_a, num_b) = match self.kind {
            RepKind::Lowering => (
                exp_hbar(&(&self.lam(&tp) - &self.alpha_word(tail, &tp))),
                exp_hbar(&(&self.alpha_word(tail, &tm) - &self.lam(&tm))),
            ),
            RepKind::Raising => (
                exp_hbar(&-(&self.lam(&tm) + &self.alpha_word(tail, &tm))),
                exp_hbar(&(&self.lam(&tp) + &self.alpha_word(tail, &tp))),
            ),
        };
        let num = (&num_a - &num_b).div_h(1).expect("numerator has valuation one");
        (&num * &u.kunit(i)).truncate(u.w())
    }

    pub fn apply_gen(&self, g: Gen, v: &RepVector) -> RepVector {
        let mut out = RepVector::new();
        for (j, c) in v {
            match (g, self.kind) {
                (Gen::H(h), _) => add_into(&mut out, j.clone(), c * &self.h_eigen(h, j)),
                (Gen::F(i), RepKind::Lowering) | (Gen::E(i), RepKind::Raising) => {
                    let mut j2 = vec![i as u8];
                    j2.extend_from_slice(j);
                    add_into(&mut out, j2, c.clone());
                }
                (Gen::E(i), RepKind::Lowering) | (Gen::F(i), RepKind::Raising) => {
                    for l in 0..j.len() {
                        if j[l] as usize != i {
                            continue;
                        }
                        let mut hat = j[..l].to_vec();
                        hat.extend_from_slice(&j[l + 1..]);
                        add_into(&mut out, hat, c * &self.ladder_coeff(i, &j[l + 1..]));
                    }
                }
            }
        }
        out
    }

    fn apply_h_mono(&self, h: &HMono, v: &RepVector) -> RepVector {
        let mut out = RepVector::new();
        for (j, c) in v {
            let mut s = c.clone();
            for (g, &k) in h.iter().enumerate() {
                if k > 0 {
                    s = &s * &self.h_eigen(g, j).pow(k);
                }
            }
            add_into(&mut out, j.clone(), s);
        }
        out
    }

    /// x.v for an element in normal form F-word · h-monomial · E-word.
    pub fn apply(&self, x: &UElem, v: &RepVector) -> RepVector {
        let mut out = RepVector::new();
        for (m, c) in &x.terms {
            let mut w = v.clone();
            for &i in m.e.iter().rev() {
                w = self.apply_gen(Gen::E(i as usize), &w);
            }
            w = self.apply_h_mono(&m.h, &w);
            for &i in m.f.iter().rev() {
                w = self.apply_gen(Gen::F(i as usize), &w);
            }
            for (j, d) in w {
                add_into(&mut out, j, &d * c);
            }
        }
        out
    }

    /// Applies a generator word, rightmost letter first.
    pub fn apply_word(&self, word: &[Gen], v: &RepVector) -> RepVector {
        let mut w = v.clone();
        for &g in word.iter().rev() {
            w = self.apply_gen(g, &w);
        }
        w
    }
}

fn index_words(n: usize, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for i in 0..n as u8 {
                let mut w2: Vec<u8> = w.clone();
                w2.push(i);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

impl UContext {
    /// A fixed generic weight with small rational values.
    pub fn sample_weight(&self, seed: u64) -> Vec<TL> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.t())
            .map(|_| TL::monomial(crate::series::ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3)), 0, self.w()))
            .collect()
    }

    /// Checks every non-Serre defining relation on all v_J with |J| ≤ `max_len`
    /// in both tensor representations, and compares the engine's products in
    /// the Serre-free algebra with composed actions.
    pub fn rep_oracle_check(&self, max_len: usize, seed: u64) -> Report {
        let mut rep = Report::new("tensor representation oracle", &self.cartan.label())
            .with_parameters(json!({"max_len": max_len, "seed": seed, "order": self.order()}));
        let free = match self.with_options(super::UOptions { serre: false, ..self.opts }) {
            Ok(f) => f,
            Err(e) => {
                rep.check("free context", false, e.to_string());
                return rep;
            }
        };
        let lambda = self.sample_weight(seed);
        let ord = self.order();
        let gens: Vec<Gen> = self.generators().into_iter().map(|(_, g)| g).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let random_words: Vec<(Vec<Gen>, Vec<Gen>)> = (0..12)
            .map(|_| {
                let la = rng.gen_range(1..=3);
                let lb = rng.gen_range(1..=3);
                let a = (0..la).map(|_| gens[rng.gen_range(0..gens.len())]).collect();
                let b = (0..lb).map(|_| gens[rng.gen_range(0..gens.len())]).collect();
                (a, b)
            })
            .collect();
        for kind in [RepKind::Lowering, RepKind::Raising] {
            let tag = match kind {
                RepKind::Lowering => "lowering",
                RepKind::Raising => "raising",
            };
            let rho = TensorRep::new(&free, lambda.clone(), kind);
            let mut bad: BTreeMap<String, String> = BTreeMap::new();
            let mut note = |name: String, ok: bool, j: &[u8]| {
                if !ok {
                    bad.entry(name).or_insert_with(|| format!("v_{j:?}"));
                } else {
                    bad.entry(name).or_default();
                }
            };
            for j in index_words(self.n(), max_len) {
                let v = basis_vector(&j, self.w());
                for g in 0..self.t() {
                    for k in 0..self.t() {
                        let d = rep_sub(&rho.apply_word(&[Gen::H(g), Gen::H(k)], &v), &rho.apply_word(&[Gen::H(k), Gen::H(g)], &v));
                        note(format!("{tag}: [H{},H{}] = 0", g + 1, k + 1), rep_vanishes_to(&d, ord), &j);
                    }
                    for i in 0..self.n() {
                        let a = free.alpha(i, g);
                        for (x, s) in [(Gen::E(i), 1i64), (Gen::F(i), -1)] {
                            let lhs = rep_sub(&rho.apply_word(&[Gen::H(g), x], &v), &rho.apply_word(&[x, Gen::H(g)], &v));
                            let xv = rho.apply_gen(x, &v);
                            let rhs: RepVector =
                                xv.into_iter().map(|(k, c)| (k, &c * &a.scale(&crate::series::rat(s)))).collect();
                            let name = match x {
                                Gen::E(_) => format!("{tag}: [H{},E{}]", g + 1, i + 1),
                                _ => format!("{tag}: [H{},F{}]", g + 1, i + 1),
                            };
                            note(name, rep_vanishes_to(&rep_sub(&lhs, &rhs), ord), &j);
                        }
                    }
                }
                for i in 0..self.n() {
                    for k in 0..self.n() {
                        let lhs = rep_sub(&rho.apply_word(&[Gen::E(i), Gen::F(k)], &v), &rho.apply_word(&[Gen::F(k), Gen::E(i)], &v));
                        let rhs = if i == k { rho.apply(&free.ktilde_elem(i), &v) } else { RepVector::new() };
                        note(format!("{tag}: [E{},F{}]", i + 1, k + 1), rep_vanishes_to(&rep_sub(&lhs, &rhs), ord), &j);
                    }
                }
                if j.len() <= 2 {
                    for (a, b) in &random_words {
                        let prod = free.mul(&free.word(a), &free.word(b));
                        let lhs = rho.apply(&prod, &v);
                        let mut ab = a.clone();
                        ab.extend_from_slice(b);
                        let rhs = rho.apply_word(&ab, &v);
                        note(format!("{tag}: engine products"), rep_vanishes_to(&rep_sub(&lhs, &rhs), ord), &j);
                    }
                }
            }
            for (name, witness) in bad {
                rep.check(name, witness.is_empty(), witness);
            }
        }
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::CartanDatum;
    use crate::quea::tests::ctx;

    #[test]
    fn basic_actions() {
        let u = ctx(&CartanDatum::a2(), 3, true);
        let rho = TensorRep::new(&u, u.sample_weight(1), RepKind::Lowering);
        let v0 = basis_vector(&[], u.w());
        assert!(rho.apply_gen(Gen::E(0), &v0).is_empty());
        assert_eq!(rho.apply_gen(Gen::F(1), &v0), basis_vector(&[1], u.w()));
    }

    #[test]
    fn a2_oracle() {
        let u = ctx(&CartanDatum::a2(), 3, true);
        let rep = u.rep_oracle_check(4, 3);
        assert!(rep.passed(), "{}", rep.to_text());
        assert!(rep.checks.len() > 40);
    }
}
