//! Toral twists F_Φ = exp((ħ/2) Σ φ_gk H_g ⊗ H_k) and the twisted Hopf
//! structure, with the check that the twisted generators present the
//! algebra attached to the deformed data (P_Φ, R_Φ).

use std::collections::BTreeMap;

use serde_json::json;

use super::hopf::{t_add, t_agrees, t_pure, t_render, t_sub, UTensor};
use super::{lift, serre_terms_for, Gen, Mono, UContext, UElem, TL};
use crate::cartan::{twist_realization, CartanError, MpMatrix, Realization, TwistMatrix};
use crate::linalg::SMat;
use crate::report::Report;
use crate::series::ratio;

/// Deliberate corruption used to show that the checks have teeth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistFault {
    None,
    /// Uses K_ℓ^{-1} in place of K_ℓ in the closed form of Δ^Φ(E_ℓ).
    FlipK,
}

/// The generators of the twisted presentation and the deformed data.
#[derive(Debug, Clone)]
pub struct TwistedGenerators {
    pub e: Vec<UElem>,
    pub f: Vec<UElem>,
    /// Coordinates (in the h-basis) of the deformed coroots.
    pub tplus: SMat,
    pub tminus: SMat,
    pub k: Vec<UElem>,
    pub l: Vec<UElem>,
    pub k_inv: Vec<UElem>,
    pub l_inv: Vec<UElem>,
    pub p: MpMatrix,
    pub realization: Realization,
}

fn t_truncate(a: &UTensor, n: i32) -> UTensor {
    a.iter().map(|(k, c)| (k.clone(), c.truncate(n))).filter(|(_, c)| !c.is_zero()).collect()
}

impl UContext {
    /// exp of a tensor of positive ħ-valuation, truncated at order N (no
    /// division by ħ is involved, so the guard digits are not needed).
    pub fn t_exp(&self, x: &UTensor) -> UTensor {
        let arity = x.keys().next().map_or(2, |k| k.len());
        let ones: Vec<UElem> = (0..arity).map(|_| self.one()).collect();
        let refs: Vec<&UElem> = ones.iter().collect();
        let mut out = t_truncate(&t_pure(&refs), self.order());
        let mut power = out.clone();
        let mut k = 1i64;
        loop {
            power = t_truncate(&self.t_mul(&power, x), self.order());
            power = power.into_iter().map(|(m, c)| (m, c.scale(&ratio(1, k)))).collect();
            if power.is_empty() {
                break;
            }
            t_add(&mut out, &power, &TL::one(self.order()));
            k += 1;
        }
        out
    }

    /// The tensor (ħ/2) Σ φ_gk H_g ⊗ H_k.
    fn twist_exponent(&self, phi: &TwistMatrix) -> UTensor {
        let t = self.t();
        let mut out = UTensor::new();
        for g in 0..t {
            for k in 0..t {
                let c = lift(&phi.phi[g][k], self.order()).mul_h(1).scale(&ratio(1, 2)).truncate(self.order());
                if c.is_zero() {
                    continue;
                }
                let mut a = Mono::one(t);
                a.h[g] = 1;
                let mut b = Mono::one(t);
                b.h[k] = 1;
                super::add_coeff(&mut out, &vec![a, b], &c);
            }
        }
        out
    }

    /// F_Φ.
    pub fn twist_element(&self, phi: &TwistMatrix) -> UTensor {
        self.t_exp(&self.twist_exponent(phi))
    }

    /// Δ^Φ(x) = F_Φ Δ(x) F_Φ^{-1}, computed as exp(ad X)Δ(x) with
    /// F_Φ = exp(X); this avoids multiplying out the full exponentials.
    pub fn twisted_coproduct(&self, x: &UElem, phi: &TwistMatrix) -> UTensor {
        let xt = self.twist_exponent(phi);
        let n = self.order();
        let mut out = t_truncate(&self.coproduct(x), n);
        let mut term = out.clone();
        let mut k = 1i64;
        loop {
            let c = t_sub(&self.t_mul(&xt, &term), &self.t_mul(&term, &xt));
            term = t_truncate(&c, n).into_iter().map(|(m, c)| (m, c.scale(&ratio(1, k)))).collect();
            if term.is_empty() {
                break;
            }
            t_add(&mut out, &term, &TL::one(n));
            k += 1;
        }
        out
    }

    /// U = m(id⊗S)(F_Φ) and V = m(S⊗id)(F_Φ^{-1}).
    fn twist_antipode_factors(&self, phi: &TwistMatrix) -> (UElem, UElem) {
        let f = self.twist_element(phi);
        let finv = self.twist_element(&phi.neg());
        let s = |m: &Mono| -> UTensor {
            self.antipode_mono(m).terms.iter().map(|(k, c)| (vec![k.clone()], c.clone())).collect()
        };
        let u = self.t_contract(&self.t_map_leg(&f, 1, s));
        let v = self.t_contract(&self.t_map_leg(&finv, 0, s));
        (u, v)
    }

    /// S^Φ(x) = U S(x) U^{-1}.
    pub fn twisted_antipode(&self, x: &UElem, phi: &TwistMatrix) -> UElem {
        let (u, v) = self.twist_antipode_factors(phi);
        self.mul(&self.mul(&u, &self.antipode(x)), &v)
    }

    /// exp((ħ/2) Σ_g,k α_ℓ(H_g) c_gk H_k) with c = Φ or Φ^T.
    fn twist_factor(&self, phi: &TwistMatrix, l: usize, transpose: bool, sign: i64) -> UElem {
        let t = self.t();
        let v: Vec<TL> = (0..t)
            .map(|k| {
                let mut acc = TL::zero(self.w() + 1);
                for g in 0..t {
                    let c = if transpose { &phi.phi[k][g] } else { &phi.phi[g][k] };
                    acc += &(&self.alpha(l, g) * &lift(c, self.w() + 1));
                }
                acc.scale(&ratio(sign, 2))
            })
            .collect();
        self.exp_h(&v)
    }

    pub fn twisted_generators(&self, phi: &TwistMatrix) -> Result<TwistedGenerators, CartanError> {
        let (p, realization) = twist_realization(&self.p, &self.r, phi)?;
        let n = self.n();
        let l: Vec<UElem> = (0..n).map(|i| self.twist_factor(phi, i, false, 1)).collect();
        let l_inv: Vec<UElem> = (0..n).map(|i| self.twist_factor(phi, i, false, -1)).collect();
        let k: Vec<UElem> = (0..n).map(|i| self.twist_factor(phi, i, true, 1)).collect();
        let k_inv: Vec<UElem> = (0..n).map(|i| self.twist_factor(phi, i, true, -1)).collect();
        // everything here is free of ħ-divisions, so order N suffices
        let n_ord = self.order();
        let trunc = |v: Vec<UElem>| -> Vec<UElem> { v.into_iter().map(|x| x.truncate(n_ord)).collect() };
        let (l, l_inv, k, k_inv) = (trunc(l), trunc(l_inv), trunc(k), trunc(k_inv));
        let e = (0..n).map(|i| self.mul(&l_inv[i], &self.e(i))).collect();
        let f = (0..n).map(|i| self.mul(&self.f(i), &k[i])).collect();
        Ok(TwistedGenerators {
            e,
            f,
            tplus: realization.tplus.clone(),
            tminus: realization.tminus.clone(),
            k,
            l,
            k_inv,
            l_inv,
            p,
            realization,
        })
    }

    pub fn verify_twist_theorem(&self, phi: &TwistMatrix) -> Report {
        self.verify_twist_theorem_with(phi, TwistFault::None)
    }

    /// Checks that (E^Φ, F^Φ, h) satisfy the relations and Hopf formulas of
    /// the algebra built from (P_Φ, R_Φ), under the twisted coproduct and
    /// antipode, together with the twist-cocycle identity of F_Φ.
    pub fn verify_twist_theorem_with(&self, phi: &TwistMatrix, fault: TwistFault) -> Report {
        let params = json!({"phi": serde_json::to_value(&phi.phi).unwrap()});
        let mut rep = Report::new("stability under toral twists", &self.cartan.label()).with_parameters(params);
        let tg = match self.twisted_generators(phi) {
            Ok(x) => x,
            Err(e) => {
                rep.check("deformed data", false, e.to_string());
                return rep;
            }
        };
        let n = self.n();
        let t = self.t();
        let ord = self.order();
        let one = self.one();
        let w = self.w();

        // twist element itself
        let f = self.twist_element(phi);
        let finv = self.twist_element(&phi.neg());
        let id2 = t_pure(&[&one, &one]);
        let prod = self.t_mul(&f, &finv);
        rep.check("F F^-1 = 1", t_agrees(&prod, &id2, ord), t_render(&t_sub(&prod, &id2)));
        let eps = |m: &Mono| -> UTensor {
            if m.is_one() {
                BTreeMap::from([(vec![], TL::one(w))])
            } else {
                UTensor::new()
            }
        };
        let id1: UTensor = BTreeMap::from([(vec![Mono::one(t)], TL::one(w))]);
        let l = self.t_map_leg(&f, 0, eps);
        let r = self.t_map_leg(&f, 1, eps);
        rep.check("counit normalization", t_agrees(&l, &id1, ord) && t_agrees(&r, &id1, ord), "");
        let delta = |m: &Mono| (*self.coproduct_mono(m)).clone();
        let lift_left = |x: &UTensor| -> UTensor {
            x.iter().map(|(k, c)| (vec![k[0].clone(), k[1].clone(), Mono::one(t)], c.clone())).collect()
        };
        let lift_right = |x: &UTensor| -> UTensor {
            x.iter().map(|(k, c)| (vec![Mono::one(t), k[0].clone(), k[1].clone()], c.clone())).collect()
        };
        let lhs = self.t_mul(&lift_left(&f), &self.t_map_leg(&f, 0, delta));
        let rhs = self.t_mul(&lift_right(&f), &self.t_map_leg(&f, 1, delta));
        rep.check("twist cocycle identity", t_agrees(&lhs, &rhs, ord), t_render(&t_sub(&lhs, &rhs)));

        // exponentials of the deformed coroots
        let ktw = |i: usize| -> UElem { self.mul(&tg.k[i], &tg.l_inv[i]) };
        for i in 0..n {
            let lhs = self.exp_h(&tg.tplus[i]);
            let rhs = self.mul(&self.k_plus(i, false), &ktw(i));
            rep.check(format!("exp(hT+_{}) deformed", i + 1), lhs.agrees_to(&rhs, ord), lhs.sub(&rhs).to_string());
            let minus: Vec<TL> = tg.tminus[i].iter().map(|x| -x).collect();
            let lhs = self.exp_h(&minus);
            let rhs = self.mul(&self.k_minus(i, false), &ktw(i));
            rep.check(format!("exp(-hT-_{}) deformed", i + 1), lhs.agrees_to(&rhs, ord), lhs.sub(&rhs).to_string());
        }

        // relations of the deformed algebra
        let amat = &tg.realization.amat;
        for g in 0..t {
            let h = self.h(g);
            for j in 0..n {
                let a = lift(&amat[j][g], w);
                let lhs = self.commutator(&h, &tg.e[j]);
                let rhs = tg.e[j].scale(&a);
                rep.check(format!("[H{},E{}^phi]", g + 1, j + 1), lhs.agrees_to(&rhs, ord), lhs.sub(&rhs).to_string());
                let lhs = self.commutator(&h, &tg.f[j]);
                let rhs = tg.f[j].scale(&-a);
                rep.check(format!("[H{},F{}^phi]", g + 1, j + 1), lhs.agrees_to(&rhs, ord), lhs.sub(&rhs).to_string());
            }
        }
        for i in 0..n {
            for j in 0..n {
                let lhs = self.commutator(&tg.e[i], &tg.f[j]);
                let rhs = if i == j { self.ef_rhs(i, &tg.tplus[i], &tg.tminus[i]) } else { UElem::zero() };
                rep.check(format!("[E{}^phi,F{}^phi]", i + 1, j + 1), lhs.agrees_to(&rhs, ord), lhs.sub(&rhs).to_string());
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for (positive, gens) in [(true, &tg.e), (false, &tg.f)] {
                    let terms = serre_terms_for(&self.cartan, &tg.p.p, i, j, w, positive);
                    let mut acc = UElem::zero();
                    for (word, c) in &terms {
                        let factors: Vec<&UElem> = word.iter().map(|&x| &gens[x as usize]).collect();
                        acc.add_scaled(&self.mul_all(&factors), c);
                    }
                    let tag = if positive { "E" } else { "F" };
                    rep.check(format!("{tag}-Serre ({},{}) with q^phi", i + 1, j + 1), acc.vanishes_to(ord), acc.to_string());
                }
            }
        }

        // Hopf structure
        let (u, v) = self.twist_antipode_factors(phi);
        let uv = self.mul(&u, &v);
        rep.check("antipode conjugator invertible", uv.agrees_to(&one, ord), uv.sub(&one).to_string());
        for g in 0..t {
            let h = self.h(g);
            let got = self.twisted_coproduct(&h, phi);
            let mut want = t_pure(&[&h, &one]);
            t_add(&mut want, &t_pure(&[&one, &h]), &TL::one(w));
            rep.check(format!("twisted coproduct H{}", g + 1), t_agrees(&got, &want, ord), t_render(&t_sub(&got, &want)));
        }
        for i in 0..n {
            let e = self.e(i);
            let fi = self.f(i);
            let kk = match fault {
                TwistFault::None => &tg.k[i],
                TwistFault::FlipK => &tg.k_inv[i],
            };
            let got = self.twisted_coproduct(&e, phi);
            let mut want = t_pure(&[&e, &tg.l[i]]);
            t_add(&mut want, &t_pure(&[&self.mul(&self.k_plus(i, false), kk), &e]), &TL::one(w));
            rep.check(format!("twisted coproduct E{} closed form", i + 1), t_agrees(&got, &want, ord), t_render(&t_sub(&got, &want)));
            let got = self.twisted_coproduct(&fi, phi);
            let mut want = t_pure(&[&fi, &self.mul(&self.k_minus(i, false), &tg.l_inv[i])]);
            t_add(&mut want, &t_pure(&[&tg.k_inv[i], &fi]), &TL::one(w));
            rep.check(format!("twisted coproduct F{} closed form", i + 1), t_agrees(&got, &want, ord), t_render(&t_sub(&got, &want)));

            // deformed generators are skew-primitive for the deformed coroots
            let ep = self.exp_h(&tg.tplus[i]);
            let got = self.twisted_coproduct(&tg.e[i], phi);
            let mut want = t_pure(&[&tg.e[i], &one]);
            t_add(&mut want, &t_pure(&[&ep, &tg.e[i]]), &TL::one(w));
            rep.check(format!("twisted coproduct E{}^phi", i + 1), t_agrees(&got, &want, ord), t_render(&t_sub(&got, &want)));
            let minus: Vec<TL> = tg.tminus[i].iter().map(|x| -x).collect();
            let em = self.exp_h(&minus);
            let got = self.twisted_coproduct(&tg.f[i], phi);
            let mut want = t_pure(&[&tg.f[i], &em]);
            t_add(&mut want, &t_pure(&[&one, &tg.f[i]]), &TL::one(w));
            rep.check(format!("twisted coproduct F{}^phi", i + 1), t_agrees(&got, &want, ord), t_render(&t_sub(&got, &want)));

            // antipode
            let got = self.twisted_antipode(&e, phi);
            let want = self.mul_all(&[&self.k_plus(i, true), &tg.k_inv[i], &e, &tg.l_inv[i]]).neg();
            rep.check(format!("twisted antipode E{} closed form", i + 1), got.agrees_to(&want, ord), got.sub(&want).to_string());
            let got = self.twisted_antipode(&tg.e[i], phi);
            let neg_tp: Vec<TL> = tg.tplus[i].iter().map(|x| -x).collect();
            let want = self.mul(&self.exp_h(&neg_tp), &tg.e[i]).neg();
            rep.check(format!("twisted antipode E{}^phi", i + 1), got.agrees_to(&want, ord), got.sub(&want).to_string());
            let got = self.twisted_antipode(&tg.f[i], phi);
            let want = self.mul(&tg.f[i], &self.exp_h(&tg.tminus[i])).neg();
            rep.check(format!("twisted antipode F{}^phi", i + 1), got.agrees_to(&want, ord), got.sub(&want).to_string());
            rep.check(
                format!("counit E{}^phi, F{}^phi", i + 1, i + 1),
                self.counit(&tg.e[i]).vanishes_to(ord) && self.counit(&tg.f[i]).vanishes_to(ord),
                "",
            );
        }
        rep
    }

    /// Δ^{Φ+Φ′} = (Φ′-twist of Δ^Φ) on generators.
    pub fn twist_functoriality(&self, phi: &TwistMatrix, phi2: &TwistMatrix) -> Report {
        let mut rep = Report::new("composition of toral twists", &self.cartan.label());
        let sum = phi.add(phi2);
        let f2 = self.twist_element(phi2);
        let f2inv = self.twist_element(&phi2.neg());
        for (name, g) in self.generators() {
            if matches!(g, Gen::H(_)) {
                continue;
            }
            let x = self.gen(g);
            let direct = self.twisted_coproduct(&x, &sum);
            let iterated = self.t_mul(&self.t_mul(&f2, &self.twisted_coproduct(&x, phi)), &f2inv);
            rep.check(format!("twist of twist on {name}"), t_agrees(&direct, &iterated, self.order()), t_render(&t_sub(&direct, &iterated)));
        }
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{random_twist, CartanDatum};
    use crate::quea::tests::ctx;
    use crate::series::rat;
    use rand::SeedableRng;

    #[test]
    fn zero_twist_is_trivial() {
        let u = ctx(&CartanDatum::a1(), 3, true);
        let phi = TwistMatrix::zero(u.t(), 6);
        let f = u.twist_element(&phi);
        assert!(t_agrees(&f, &t_pure(&[&u.one(), &u.one()]), 3));
        let tg = u.twisted_generators(&phi).unwrap();
        assert!(tg.e[0].agrees_to(&u.e(0), 3));
    }

    #[test]
    fn a1_constant_twist() {
        let u = ctx(&CartanDatum::a1(), 4, true);
        let mut phi = TwistMatrix::zero(2, 7);
        phi.phi[0][1] = TL::constant(rat(3), 7);
        phi.phi[1][0] = TL::constant(rat(-3), 7);
        let rep = u.verify_twist_theorem(&phi);
        assert!(rep.passed(), "{}", rep.to_text());
        let bad = u.verify_twist_theorem_with(&phi, TwistFault::FlipK);
        assert!(bad.failures().iter().any(|c| c.name.contains("twisted coproduct E1 closed form")));
    }

    #[test]
    fn a2_random_twist() {
        let u = ctx(&CartanDatum::a2(), 3, true);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let phi = random_twist(&mut rng, u.t(), 6, true);
        let rep = u.verify_twist_theorem(&phi);
        assert!(rep.passed(), "{}", rep.to_text());
        let phi2 = random_twist(&mut rng, u.t(), 6, false);
        assert!(u.twist_functoriality(&phi, &phi2).passed());
    }
}
