//! Normal forms of pure E- (or F-) words modulo the quantum Serre relations.
//!
//! For each multidegree the span of all two-sided multiples u·S·v of Serre
//! elements is put in reduced row echelon form over k[[ħ]]/(ħ^(W+1)), with
//! columns ordered so that the lexicographically smallest word leads. Only
//! unit pivots are used; if a nonzero row survives without a unit pivot the
//! construction fails loudly. Non-pivot words are the normal words, and the
//! minimal pivot words give the rewrite rules.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{QueaError, UContext, Word, TL};

/// Row echelon data of one multidegree.
#[derive(Debug, Clone)]
pub struct SerreSlice {
    pub words: Vec<Word>,
    /// Normal form of each pivot word in terms of normal words.
    pub reductions: HashMap<Word, Vec<(Word, TL)>>,
}

impl SerreSlice {
    pub fn normal_form(&self, w: &[u8], order: i32) -> Vec<(Word, TL)> {
        match self.reductions.get(w) {
            Some(v) => v.clone(),
            None => vec![(w.to_vec(), TL::one(order))],
        }
    }

    pub fn is_normal(&self, w: &[u8]) -> bool {
        !self.reductions.contains_key(w)
    }
}

/// All words with the given letter counts, sorted.
pub fn words_of_degree(deg: &[usize]) -> Vec<Word> {
    let total: usize = deg.iter().sum();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(total);
    let mut left = deg.to_vec();
    fn rec(left: &mut Vec<usize>, cur: &mut Word, total: usize, out: &mut Vec<Word>) {
        if cur.len() == total {
            out.push(cur.clone());
            return;
        }
        for i in 0..left.len() {
            if left[i] > 0 {
                left[i] -= 1;
                cur.push(i as u8);
                rec(left, cur, total, out);
                cur.pop();
                left[i] += 1;
            }
        }
    }
    rec(&mut left, &mut cur, total, &mut out);
    out
}

impl UContext {
    pub fn serre_slice(&self, deg: &[usize], positive: bool) -> Result<Rc<SerreSlice>, QueaError> {
        let key = (positive, deg.to_vec());
        if let Some(s) = self.caches.borrow().slices.get(&key) {
            return Ok(s.clone());
        }
        let slice = Rc::new(self.build_slice(deg, positive)?);
        self.caches.borrow_mut().slices.insert(key, slice.clone());
        Ok(slice)
    }

    fn build_slice(&self, deg: &[usize], positive: bool) -> Result<SerreSlice, QueaError> {
        let w = self.w();
        let words = words_of_degree(deg);
        let col: HashMap<Word, usize> = words.iter().enumerate().map(|(k, x)| (x.clone(), k)).collect();
        let ncols = words.len();
        let mut rows: Vec<Vec<TL>> = Vec::new();
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let terms = self.serre_terms(i, j, positive);
                let sdeg = self.weight(&terms[0].0);
                if sdeg.iter().zip(deg).any(|(a, b)| a > b) {
                    continue;
                }
                let rest: Vec<usize> = deg.iter().zip(&sdeg).map(|(a, b)| a - b).collect();
                for x in words_of_degree(&rest) {
                    for split in 0..=x.len() {
                        let mut row = vec![TL::zero(w); ncols];
                        for (sw, c) in &terms {
                            let mut full = x[..split].to_vec();
                            full.extend_from_slice(sw);
                            full.extend_from_slice(&x[split..]);
                            row[col[&full]] += c;
                        }
                        rows.push(row);
                    }
                }
            }
        }
        let mut rank = 0;
        let mut pivots: Vec<usize> = Vec::new();
        for c in 0..ncols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][c].is_unit()) else { continue };
            rows.swap(rank, p);
            let inv = rows[rank][c].inverse()?;
            for x in rows[rank].iter_mut() {
                *x = &*x * &inv;
            }
            let prow = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == rank || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for k in 0..ncols {
                    if !prow[k].is_zero() {
                        row[k] -= &(&f * &prow[k]);
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
        if let Some(bad) = rows[rank..].iter().find(|r| r.iter().any(|x| !x.is_zero())) {
            let k = bad.iter().position(|x| !x.is_zero()).unwrap();
            return Err(QueaError::CompletionIncomplete {
                deg: deg.to_vec(),
                detail: format!("no unit pivot for word {:?}", words[k]),
            });
        }
        let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
        let mut reductions = HashMap::new();
        for (r, &c) in pivots.iter().enumerate() {
            let mut nf = Vec::new();
            for k in 0..ncols {
                if pivot_set.contains(&k) || rows[r][k].is_zero() {
                    continue;
                }
                nf.push((words[k].clone(), -&rows[r][k]));
            }
            reductions.insert(words[c].clone(), nf);
        }
        Ok(SerreSlice { words, reductions })
    }

    /// Normal form of a combination of pure words (by table lookup).
    pub fn words_nf(&self, comb: &BTreeMap<Word, TL>, positive: bool) -> BTreeMap<Word, TL> {
        let mut out = BTreeMap::new();
        for (w, c) in comb {
            for (v, d) in self.word_nf(w, positive).iter() {
                super::add_coeff(&mut out, v, &(c * d));
            }
        }
        out
    }
}

/// Kinds of oriented rules in the full system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RuleKind {
    /// H_a H_b → H_b H_a for a > b.
    HReorder,
    /// E_j H → H E_j − α_j(H) E_j.
    HPastE,
    /// H F_j → F_j H − α_j(H) F_j.
    HPastF,
    /// E_i F_j → F_j E_i + δ_ij K̃_i.
    EFStraighten,
    /// Leading Serre word → combination of normal words.
    Serre,
}

/// A rewrite rule on pure words.
#[derive(Debug, Clone)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: Vec<(Word, TL)>,
}

/// The oriented rules; the Serre part is explicit (separately for E- and
/// F-words), the other kinds are implemented by the multiplication routine.
#[derive(Debug, Clone)]
pub struct RewriteSystem {
    pub kinds: Vec<RuleKind>,
    pub e_rules: Vec<Rule>,
    pub f_rules: Vec<Rule>,
    pub bound: usize,
    pub critical_pairs: usize,
}

/// Rule application order used by [`RewriteSystem::rewrite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
    Random(u64),
}

fn factor_positions(w: &[u8], lhs: &[u8]) -> Vec<usize> {
    if lhs.len() > w.len() {
        return vec![];
    }
    (0..=w.len() - lhs.len()).filter(|&s| &w[s..s + lhs.len()] == lhs).collect()
}

impl RewriteSystem {
    pub fn rules(&self, positive: bool) -> &[Rule] {
        if positive {
            &self.e_rules
        } else {
            &self.f_rules
        }
    }

    /// Rewrites a combination of E-words (`positive`) or F-words until no
    /// rule applies.
    pub fn rewrite<R: Rng>(&self, start: &BTreeMap<Word, TL>, positive: bool, strategy: Strategy, rng: &mut R) -> BTreeMap<Word, TL> {
        let rules = self.rules(positive);
        let mut cur = start.clone();
        loop {
            // find a reducible word
            let mut target = None;
            for w in cur.keys() {
                let mut hits = Vec::new();
                for (k, r) in rules.iter().enumerate() {
                    for s in factor_positions(w, &r.lhs) {
                        hits.push((s, k));
                    }
                }
                if hits.is_empty() {
                    continue;
                }
                hits.sort();
                let pick = match strategy {
                    Strategy::Leftmost => hits[0],
                    Strategy::Rightmost => *hits.last().unwrap(),
                    Strategy::Random(_) => *hits.choose(rng).unwrap(),
                };
                target = Some((w.clone(), pick));
                if !matches!(strategy, Strategy::Random(_)) {
                    break;
                }
                if rng.gen_bool(0.5) {
                    break;
                }
            }
            let Some((w, (s, k))) = target else { return cur };
            let c = cur.remove(&w).unwrap();
            let rule = &rules[k];
            for (v, d) in &rule.rhs {
                let mut nw = w[..s].to_vec();
                nw.extend_from_slice(v);
                nw.extend_from_slice(&w[s + rule.lhs.len()..]);
                super::add_coeff(&mut cur, &nw, &(&c * d));
            }
        }
    }
}

/// Collects the Serre rules up to total degree `bound` and resolves every
/// critical pair (overlap of two left-hand sides) within the bound.
pub fn build_rewrite_system(ctx: &UContext, bound: usize) -> Result<RewriteSystem, QueaError> {
    let n = ctx.n();
    let mut kinds = vec![RuleKind::HReorder, RuleKind::HPastE, RuleKind::HPastF, RuleKind::EFStraighten];
    let mut sys = RewriteSystem { kinds: vec![], e_rules: vec![], f_rules: vec![], bound, critical_pairs: 0 };
    if ctx.serre_enabled() && n > 1 {
        kinds.push(RuleKind::Serre);
        sys.e_rules = collect_rules(ctx, bound, true)?;
        sys.f_rules = collect_rules(ctx, bound, false)?;
    }
    sys.kinds = kinds;
    let mut rng = rand::rngs::mock::StepRng::new(0, 1);
    let mut checked = 0;
    for positive in [true, false] {
        let rules = sys.rules(positive);
        for a in rules {
            for b in rules {
                let (la, lb) = (&a.lhs, &b.lhs);
                for k in 1..la.len().min(lb.len()) {
                    if la[la.len() - k..] != lb[..k] || la.len() + lb.len() - k > bound {
                        continue;
                    }
                    let mut w = la.clone();
                    w.extend_from_slice(&lb[k..]);
                    let start = BTreeMap::from([(w.clone(), TL::one(ctx.w()))]);
                    // reduce at the first rule, resp. the second, then finish
                    let first = apply_at(a, &start, 0);
                    let second = apply_at(b, &start, la.len() - k);
                    let r1 = sys.rewrite(&first, positive, Strategy::Leftmost, &mut rng);
                    let r2 = sys.rewrite(&second, positive, Strategy::Leftmost, &mut rng);
                    checked += 1;
                    if !same(&r1, &r2) {
                        return Err(QueaError::CompletionIncomplete {
                            deg: ctx.weight(&w),
                            detail: format!("critical pair on word {w:?} ({}) does not resolve", if positive { "E" } else { "F" }),
                        });
                    }
                }
            }
        }
    }
    sys.critical_pairs = checked;
    Ok(sys)
}

/// Minimal reducible words (no proper reducible factor) with their normal forms.
fn collect_rules(ctx: &UContext, bound: usize, positive: bool) -> Result<Vec<Rule>, QueaError> {
    let mut rules = Vec::new();
    for total in 2..=bound {
        for deg in super::hopf::compositions(ctx.n(), total) {
            let slice = ctx.serre_slice(&deg, positive)?;
            let mut lhs: Vec<&Word> = slice.reductions.keys().collect();
            lhs.sort();
            for w in lhs {
                let mut reducible_factor = false;
                for len in 2..w.len() {
                    for s in 0..=w.len() - len {
                        let f = &w[s..s + len];
                        if !ctx.serre_slice(&ctx.weight(f), positive)?.is_normal(f) {
                            reducible_factor = true;
                        }
                    }
                }
                if !reducible_factor {
                    rules.push(Rule { lhs: w.clone(), rhs: slice.reductions[w].clone() });
                }
            }
        }
    }
    Ok(rules)
}

fn apply_at(rule: &Rule, start: &BTreeMap<Word, TL>, pos: usize) -> BTreeMap<Word, TL> {
    let mut out = BTreeMap::new();
    for (w, c) in start {
        for (v, d) in &rule.rhs {
            let mut nw = w[..pos].to_vec();
            nw.extend_from_slice(v);
            nw.extend_from_slice(&w[pos + rule.lhs.len()..]);
            super::add_coeff(&mut out, &nw, &(c * d));
        }
    }
    out
}

/// Equality of two word combinations, exact at every known coefficient.
pub fn same(a: &BTreeMap<Word, TL>, b: &BTreeMap<Word, TL>) -> bool {
    let keys: BTreeSet<&Word> = a.keys().chain(b.keys()).collect();
    keys.into_iter().all(|k| match (a.get(k), b.get(k)) {
        (Some(x), Some(y)) => (x - y).is_zero(),
        (Some(x), None) | (None, Some(x)) => x.is_zero(),
        (None, None) => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::CartanDatum;
    use crate::quea::tests::ctx;
    use rand::SeedableRng;

    #[test]
    fn a1_has_no_serre_rules() {
        let u = ctx(&CartanDatum::a1(), 3, true);
        let sys = build_rewrite_system(&u, 4).unwrap();
        assert!(sys.e_rules.is_empty() && sys.f_rules.is_empty());
    }

    #[test]
    fn a1xa1_reorders_commuting_generators() {
        let u = ctx(&CartanDatum::a1xa1(), 3, true);
        let sys = build_rewrite_system(&u, 4).unwrap();
        assert_eq!(sys.e_rules.len(), 1);
        assert_eq!(sys.e_rules[0].lhs, vec![0, 1]);
        assert_eq!(sys.e_rules[0].rhs.len(), 1);
        assert_eq!(sys.e_rules[0].rhs[0].0, vec![1, 0]);
    }

    #[test]
    fn a2_and_b2_rules_agree_with_tables() {
        for c in [CartanDatum::a2(), CartanDatum::b2()] {
            let u = ctx(&c, 3, true);
            let sys = build_rewrite_system(&u, 5).unwrap();
            assert!(sys.critical_pairs > 0 || c.n() == 1);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
            for _ in 0..50 {
                let len = rng.gen_range(2..=5);
                let w: Word = (0..len).map(|_| rng.gen_range(0..2u8)).collect();
                let start = BTreeMap::from([(w.clone(), TL::one(u.w()))]);
                for positive in [true, false] {
                    let l = sys.rewrite(&start, positive, Strategy::Leftmost, &mut rng);
                    let r = sys.rewrite(&start, positive, Strategy::Rightmost, &mut rng);
                    let t = u.words_nf(&start, positive);
                    assert!(same(&l, &r) && same(&l, &t), "{w:?}");
                }
            }
        }
    }
}
