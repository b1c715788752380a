//! Rewriting of arbitrary generator words by the oriented rules, independent
//! of the multiplication routine, plus the confluence and associativity
//! suites built on it.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::serre::{build_rewrite_system, RewriteSystem, Strategy};
use super::{add_coeff, Gen, Mono, UContext, UElem, TL};
use crate::report::Report;

pub type GenWord = Vec<Gen>;
pub type WordComb = BTreeMap<GenWord, TL>;

/// A redex: either an adjacent pair at `pos`, or a Serre rule `rule` on the
/// E-run (`positive`) or F-run starting at `pos`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Redex {
    Pair(usize),
    Serre { pos: usize, positive: bool, rule: usize },
}

fn redexes(sys: &RewriteSystem, w: &[Gen]) -> Vec<Redex> {
    let mut out = Vec::new();
    for s in 0..w.len().saturating_sub(1) {
        let hit = match (w[s], w[s + 1]) {
            (Gen::H(a), Gen::H(b)) => a > b,
            (Gen::E(_), Gen::H(_)) | (Gen::H(_), Gen::F(_)) | (Gen::E(_), Gen::F(_)) => true,
            _ => false,
        };
        if hit {
            out.push(Redex::Pair(s));
        }
    }
    for positive in [true, false] {
        for (k, r) in sys.rules(positive).iter().enumerate() {
            let len = r.lhs.len();
            if len > w.len() {
                continue;
            }
            for s in 0..=w.len() - len {
                let matches = w[s..s + len].iter().zip(&r.lhs).all(|(g, &x)| match (g, positive) {
                    (Gen::E(i), true) | (Gen::F(i), false) => *i == x as usize,
                    _ => false,
                });
                if matches {
                    out.push(Redex::Serre { pos: s, positive, rule: k });
                }
            }
        }
    }
    out.sort();
    out
}

fn splice(w: &[Gen], pos: usize, len: usize, mid: &[Gen]) -> GenWord {
    let mut out = w[..pos].to_vec();
    out.extend_from_slice(mid);
    out.extend_from_slice(&w[pos + len..]);
    out
}

fn h_word(h: &[u32]) -> GenWord {
    h.iter().enumerate().flat_map(|(g, &c)| std::iter::repeat_n(Gen::H(g), c as usize)).collect()
}

impl UContext {
    /// One rewriting step of `w` at `r`, as a combination.
    fn rewrite_step(&self, sys: &RewriteSystem, w: &[Gen], r: Redex) -> Vec<(GenWord, TL)> {
        let one = TL::one(self.w());
        match r {
            Redex::Pair(s) => match (w[s], w[s + 1]) {
                (Gen::H(a), Gen::H(b)) => vec![(splice(w, s, 2, &[Gen::H(b), Gen::H(a)]), one)],
                // E_j H = H E_j − α_j(H) E_j
                (Gen::E(j), Gen::H(g)) => vec![
                    (splice(w, s, 2, &[Gen::H(g), Gen::E(j)]), one),
                    (splice(w, s, 2, &[Gen::E(j)]), -self.alpha(j, g).truncate(self.w())),
                ],
                // H F_j = F_j H − α_j(H) F_j
                (Gen::H(g), Gen::F(j)) => vec![
                    (splice(w, s, 2, &[Gen::F(j), Gen::H(g)]), one),
                    (splice(w, s, 2, &[Gen::F(j)]), -self.alpha(j, g).truncate(self.w())),
                ],
                // E_i F_j = F_j E_i + δ_ij K̃_i
                (Gen::E(i), Gen::F(j)) => {
                    let mut out = vec![(splice(w, s, 2, &[Gen::F(j), Gen::E(i)]), one)];
                    if i == j {
                        for (m, c) in &self.ktilde_elem(i).terms {
                            out.push((splice(w, s, 2, &h_word(&m.h)), c.clone()));
                        }
                    }
                    out
                }
                _ => unreachable!("not a redex"),
            },
            Redex::Serre { pos, positive, rule } => {
                let r = &sys.rules(positive)[rule];
                r.rhs
                    .iter()
                    .map(|(v, c)| {
                        let mid: GenWord = v.iter().map(|&x| if positive { Gen::E(x as usize) } else { Gen::F(x as usize) }).collect();
                        (splice(w, pos, r.lhs.len(), &mid), c.clone())
                    })
                    .collect()
            }
        }
    }

    /// Rewrites until no rule applies. `Leftmost` always takes the first redex
    /// of the smallest reducible word; `Random` picks word and redex at random.
    pub fn rewrite_words<R: Rng>(&self, sys: &RewriteSystem, start: &WordComb, strategy: Strategy, rng: &mut R) -> WordComb {
        let mut cur = start.clone();
        loop {
            let reducible: Vec<(GenWord, Vec<Redex>)> = match strategy {
                Strategy::Random(_) => cur
                    .keys()
                    .map(|w| (w.clone(), redexes(sys, w)))
                    .filter(|(_, r)| !r.is_empty())
                    .collect(),
                _ => cur.keys().map(|w| (w.clone(), redexes(sys, w))).find(|(_, r)| !r.is_empty()).into_iter().collect(),
            };
            let Some((w, rs)) = reducible.choose(rng).cloned() else { return cur };
            let r = match strategy {
                Strategy::Leftmost => rs[0],
                Strategy::Rightmost => *rs.last().unwrap(),
                Strategy::Random(_) => *rs.choose(rng).unwrap(),
            };
            let c = cur.remove(&w).unwrap();
            for (v, d) in self.rewrite_step(sys, &w, r) {
                let x = (&c * &d).truncate(self.w());
                add_coeff(&mut cur, &v, &x);
            }
            cur.retain(|_, c| !c.is_zero());
        }
    }

    /// Reads a fully rewritten combination as an element.
    pub fn words_to_elem(&self, comb: &WordComb) -> UElem {
        let mut out = UElem::zero();
        for (w, c) in comb {
            let mut m = Mono::one(self.t());
            for g in w {
                match *g {
                    Gen::F(i) => m.f.push(i as u8),
                    Gen::H(h) => m.h[h] += 1,
                    Gen::E(i) => m.e.push(i as u8),
                }
            }
            out.add_term(&m, c);
        }
        out
    }

    fn random_word(&self, rng: &mut ChaCha8Rng, max_len: usize) -> GenWord {
        let gens: Vec<Gen> = self.generators().into_iter().map(|(_, g)| g).collect();
        let len = rng.gen_range(1..=max_len);
        (0..len).map(|_| *gens.choose(rng).unwrap()).collect()
    }

    /// Random words rewritten by the leftmost and by a random strategy must
    /// agree with each other and with the engine's normal form.
    pub fn confluence_check(&self, words: usize, max_len: usize, seed: u64) -> Report {
        let mut rep = Report::new("confluence of the rewriting system", &self.cartan.label())
            .with_parameters(json!({"words": words, "max_len": max_len, "seed": seed, "order": self.order()}));
        let bound = self.cartan.default_bound().max(max_len);
        let sys = match build_rewrite_system(self, bound) {
            Ok(s) => s,
            Err(e) => {
                rep.check("completion", false, e.to_string());
                return rep;
            }
        };
        rep.check(format!("critical pairs resolved ({})", sys.critical_pairs), true, "");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut disagree, mut off_engine) = (Vec::new(), Vec::new());
        for k in 0..words {
            let w = self.random_word(&mut rng, max_len);
            let start = WordComb::from([(w.clone(), TL::one(self.w()))]);
            let mut r1 = ChaCha8Rng::seed_from_u64(seed ^ k as u64);
            let a = self.rewrite_words(&sys, &start, Strategy::Leftmost, &mut r1);
            let b = self.rewrite_words(&sys, &start, Strategy::Random(seed ^ k as u64), &mut r1);
            let (ea, eb) = (self.words_to_elem(&a), self.words_to_elem(&b));
            let show = || w.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("*");
            if !ea.agrees_to(&eb, self.order()) {
                disagree.push(show());
            }
            if !ea.agrees_to(&self.word(&w), self.order()) {
                off_engine.push(show());
            }
        }
        let first = |v: &[String]| v.iter().take(3).cloned().collect::<Vec<_>>().join("; ");
        rep.check(format!("two strategies agree on {words} words"), disagree.is_empty(), first(&disagree));
        rep.check(format!("rewriting matches the engine on {words} words"), off_engine.is_empty(), first(&off_engine));
        rep
    }

    /// (ab)c = a(bc) on random triples of short words.
    pub fn associativity_check(&self, triples: usize, max_len: usize, seed: u64) -> Report {
        let mut rep = Report::new("associativity of the normal-form product", &self.cartan.label())
            .with_parameters(json!({"triples": triples, "max_len": max_len, "seed": seed, "order": self.order()}));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = Vec::new();
        for _ in 0..triples {
            let (a, b, c) = (
                self.word(&self.random_word(&mut rng, max_len)),
                self.word(&self.random_word(&mut rng, max_len)),
                self.word(&self.random_word(&mut rng, max_len)),
            );
            let l = self.mul(&self.mul(&a, &b), &c);
            let r = self.mul(&a, &self.mul(&b, &c));
            if !l.agrees_to(&r, self.order()) {
                bad.push(format!("({a})({b})({c})"));
            }
        }
        rep.check(format!("{triples} random triples"), bad.is_empty(), bad.into_iter().next().unwrap_or_default());
        rep
    }
}

#[cfg(test)]
mod tests {
    use crate::cartan::CartanDatum;
    use crate::quea::tests::ctx;

    #[test]
    fn a2_confluence_and_associativity() {
        let u = ctx(&CartanDatum::a2(), 3, true);
        let rep = u.confluence_check(40, 5, 1);
        assert!(rep.passed(), "{}", rep.to_text());
        let rep = u.associativity_check(20, 3, 2);
        assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn b2_confluence() {
        let u = ctx(&CartanDatum::b2(), 3, true);
        let rep = u.confluence_check(30, 5, 5);
        assert!(rep.passed(), "{}", rep.to_text());
    }
}
