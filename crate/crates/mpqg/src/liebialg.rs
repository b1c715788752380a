//! Multiparameter Lie bialgebras over the rationals.
//!
//! The nilpotent parts n_± are built inside the free associative algebra one
//! multidegree at a time: left-normed brackets are kept greedily when they are
//! independent modulo the Lie ideal generated by the Serre elements. The
//! mixed brackets [n_+, n_-] come from Jacobi recursion on the stored
//! bracketing words, and the cobracket is extended from the generators by the
//! cocycle rule.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cartan::{CartanDatum, ReducedRealization};
use crate::linalg::QMat;
use crate::series::{rat, ratio, rational_to_string, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("degree bound must be at least 1")]
    BadBound,
    #[error("bracket outside the Lie span at degree {0:?} (internal inconsistency)")]
    JacobiFailure(Vec<usize>),
    #[error("realization has {got} roots, expected {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("pairing needs letters of the form T+i/Ei and T-i/Fi")]
    BadPairingArgument,
}

/// Sparse vector over the basis of a Lie algebra.
pub type LVec = BTreeMap<usize, Rational>;
/// Sparse element of g ⊗ g.
pub type Tensor2 = BTreeMap<(usize, usize), Rational>;

pub fn lvec_axpy(acc: &mut LVec, c: &Rational, v: &LVec) {
    for (k, x) in v {
        let e = acc.entry(*k).or_insert_with(Rational::zero);
        *e += c * x;
        if e.is_zero() {
            acc.remove(k);
        }
    }
}

pub fn tensor_add_term(t: &mut Tensor2, key: (usize, usize), c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = t.entry(key).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        t.remove(&key);
    }
}

/// Bracketing word in the generators, left-normed by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LieWord {
    Gen(usize),
    Br(Box<LieWord>, Box<LieWord>),
}

impl LieWord {
    /// Nested arrays of generator names, e.g. `[["E1","E2"],"E2"]`.
    pub fn to_json(&self, prefix: &str) -> Value {
        match self {
            LieWord::Gen(i) => json!(format!("{prefix}{}", i + 1)),
            LieWord::Br(a, b) => json!([a.to_json(prefix), b.to_json(prefix)]),
        }
    }

    pub fn render(&self, prefix: &str) -> String {
        match self {
            LieWord::Gen(i) => format!("{prefix}{}", i + 1),
            LieWord::Br(a, b) => format!("[{},{}]", a.render(prefix), b.render(prefix)),
        }
    }

    pub fn letters(&self) -> Vec<usize> {
        match self {
            LieWord::Gen(i) => vec![*i],
            LieWord::Br(a, b) => {
                let mut v = a.letters();
                v.extend(b.letters());
                v
            }
        }
    }
}

type APoly = BTreeMap<Vec<u8>, Rational>;

fn apoly_add(acc: &mut APoly, c: &Rational, p: &APoly) {
    for (w, x) in p {
        let e = acc.entry(w.clone()).or_insert_with(Rational::zero);
        *e += c * x;
        if e.is_zero() {
            acc.remove(w);
        }
    }
}

fn apoly_commutator(a: &APoly, b: &APoly) -> APoly {
    let mut out = APoly::new();
    for (u, x) in a {
        for (v, y) in b {
            let mut uv = u.clone();
            uv.extend(v);
            let mut vu = v.clone();
            vu.extend(u);
            apoly_add(&mut out, &(x * y), &APoly::from([(uv, Rational::one())]));
            apoly_add(&mut out, &-(x * y), &APoly::from([(vu, Rational::one())]));
        }
    }
    out
}

fn gen_poly(i: usize) -> APoly {
    APoly::from([(vec![i as u8], Rational::one())])
}

/// (ad x_i)^m (x_j) in the free associative algebra.
fn serre_poly(i: usize, j: usize, m: usize) -> APoly {
    let mut p = gen_poly(j);
    for _ in 0..m {
        p = apoly_commutator(&gen_poly(i), &p);
    }
    p
}

/// Echelon basis of a subspace of the free associative algebra (one
/// multidegree), with optional tracking of how rows combine tagged inputs.
#[derive(Default, Clone)]
struct Echelon {
    rows: Vec<(Vec<u8>, APoly, LVec)>,
}

impl Echelon {
    /// Reduces `p` (with tag combination `tag`) against the stored rows.
    fn reduce(&self, mut p: APoly, mut tag: LVec) -> (APoly, LVec) {
        for (lead, row, rtag) in &self.rows {
            if let Some(c) = p.get(lead).cloned() {
                apoly_add(&mut p, &-c.clone(), row);
                lvec_axpy(&mut tag, &-c, rtag);
            }
        }
        (p, tag)
    }

    /// Inserts `p` if independent; returns whether it was.
    fn insert(&mut self, p: APoly, tag: LVec) -> bool {
        let (p, tag) = self.reduce(p, tag);
        let Some((lead, c)) = p.iter().next_back().map(|(w, c)| (w.clone(), c.clone())) else {
            return false;
        };
        let inv = c.recip();
        let p: APoly = p.into_iter().map(|(w, x)| (w, x * &inv)).collect();
        let tag: LVec = tag.into_iter().map(|(k, x)| (k, x * &inv)).collect();
        // keep rows fully reduced against the new pivot
        for (_, row, rtag) in self.rows.iter_mut() {
            if let Some(c) = row.get(&lead).cloned() {
                apoly_add(row, &-c.clone(), &p);
                lvec_axpy(rtag, &-c, &tag);
            }
        }
        self.rows.push((lead, p, tag));
        true
    }
}

/// One basis element of n_+ (or, by symmetry, n_-).
#[derive(Debug, Clone)]
pub struct NilElem {
    pub degree: Vec<usize>,
    pub word: LieWord,
    /// `Some((parent, i))` when the element is `[parent, E_i]`.
    pub parent: Option<(usize, usize)>,
}

/// Graded basis and structure constants of n_+.
#[derive(Debug, Clone)]
pub struct Nilpotent {
    pub elems: Vec<NilElem>,
    pub table: HashMap<(usize, usize), LVec>,
    /// Set when the slice just above the bound is nonzero.
    pub bound_too_small: bool,
    pub bound: usize,
}

fn multidegrees(n: usize, total: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in multidegrees(n - 1, total - first) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

struct NilBuilder<'a> {
    cartan: &'a CartanDatum,
    ideal: HashMap<Vec<usize>, Vec<APoly>>,
    ideal_ech: HashMap<Vec<usize>, Echelon>,
}

impl NilBuilder<'_> {
    fn ideal_gens(&mut self, deg: &[usize]) -> Vec<APoly> {
        if let Some(v) = self.ideal.get(deg) {
            return v.clone();
        }
        let n = self.cartan.n();
        let mut gens = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let m = self.cartan.serre_degree(i, j);
                let mut sd = vec![0; n];
                sd[i] += m;
                sd[j] += 1;
                if sd == deg {
                    gens.push(serre_poly(i, j, m));
                }
            }
        }
        for i in 0..n {
            if deg[i] == 0 {
                continue;
            }
            let mut lower = deg.to_vec();
            lower[i] -= 1;
            if lower.iter().sum::<usize>() == 0 {
                continue;
            }
            for g in self.ideal_gens(&lower) {
                gens.push(apoly_commutator(&gen_poly(i), &g));
            }
        }
        // keep only an independent spanning set
        let mut ech = Echelon::default();
        let mut kept = Vec::new();
        for g in gens {
            if ech.insert(g.clone(), LVec::new()) {
                kept.push(g);
            }
        }
        self.ideal.insert(deg.to_vec(), kept.clone());
        self.ideal_ech.insert(deg.to_vec(), ech);
        kept
    }

    fn ideal_echelon(&mut self, deg: &[usize]) -> Echelon {
        self.ideal_gens(deg);
        self.ideal_ech[deg].clone()
    }
}

/// Builds n_+ up to total degree `bound`.
pub fn build_nilpotent(cartan: &CartanDatum, bound: usize) -> Result<Nilpotent, LieError> {
    if bound == 0 {
        return Err(LieError::BadBound);
    }
    let n = cartan.n();
    let mut b = NilBuilder { cartan, ideal: HashMap::new(), ideal_ech: HashMap::new() };
    let mut elems: Vec<NilElem> = Vec::new();
    let mut polys: Vec<APoly> = Vec::new();
    let mut by_degree: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let mut bound_too_small = false;
    for total in 1..=bound + 1 {
        for deg in multidegrees(n, total) {
            let mut ech = b.ideal_echelon(&deg);
            let mut found = Vec::new();
            if total == 1 {
                let i = deg.iter().position(|&x| x == 1).unwrap();
                found.push((gen_poly(i), LieWord::Gen(i), None));
            } else {
                for i in (0..n).rev() {
                    if deg[i] == 0 {
                        continue;
                    }
                    let mut lower = deg.clone();
                    lower[i] -= 1;
                    for &k in by_degree.get(&lower).map(|v| v.as_slice()).unwrap_or(&[]) {
                        let p = apoly_commutator(&polys[k], &gen_poly(i));
                        let word = LieWord::Br(Box::new(elems[k].word.clone()), Box::new(LieWord::Gen(i)));
                        found.push((p, word, Some((k, i))));
                    }
                }
            }
            for (p, word, parent) in found {
                if ech.insert(p.clone(), LVec::new()) {
                    if total > bound {
                        bound_too_small = true;
                        break;
                    }
                    by_degree.entry(deg.clone()).or_default().push(elems.len());
                    elems.push(NilElem { degree: deg.clone(), word, parent });
                    polys.push(p);
                }
            }
        }
    }
    // structure constants
    let mut slices: HashMap<Vec<usize>, Echelon> = HashMap::new();
    let mut table = HashMap::new();
    for a in 0..elems.len() {
        for c in 0..elems.len() {
            let deg: Vec<usize> = elems[a].degree.iter().zip(&elems[c].degree).map(|(x, y)| x + y).collect();
            if deg.iter().sum::<usize>() > bound {
                continue;
            }
            let ech = slices.entry(deg.clone()).or_insert_with(|| {
                let mut e = b.ideal_echelon(&deg);
                for &k in by_degree.get(&deg).map(|v| v.as_slice()).unwrap_or(&[]) {
                    e.insert(polys[k].clone(), LVec::from([(k, Rational::one())]));
                }
                e
            });
            let p = apoly_commutator(&polys[a], &polys[c]);
            let (rest, tag) = ech.reduce(p, LVec::new());
            if !rest.is_empty() {
                return Err(LieError::JacobiFailure(deg));
            }
            // p = Σ(-tag) · rows, i.e. coefficients are the negated tag
            let v: LVec = tag.into_iter().map(|(k, x)| (k, -x)).collect();
            if !v.is_empty() {
                table.insert((a, c), v);
            }
        }
    }
    Ok(Nilpotent { elems, table, bound_too_small, bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Part {
    Neg,
    H,
    Pos,
}

/// Basis of g: (n_- | h | n_+).
#[derive(Debug, Clone)]
pub struct LieBasis {
    pub nil: Vec<NilElem>,
    pub t: usize,
    pub h_labels: Vec<String>,
}

impl LieBasis {
    pub fn m(&self) -> usize {
        self.nil.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.m() + self.t
    }

    pub fn part(&self, k: usize) -> (Part, usize) {
        let m = self.m();
        if k < m {
            (Part::Neg, k)
        } else if k < m + self.t {
            (Part::H, k - m)
        } else {
            (Part::Pos, k - m - self.t)
        }
    }

    pub fn neg(&self, k: usize) -> usize {
        k
    }

    pub fn h(&self, g: usize) -> usize {
        self.m() + g
    }

    pub fn pos(&self, k: usize) -> usize {
        self.m() + self.t + k
    }

    /// Index of the generator E_i.
    pub fn e(&self, i: usize) -> usize {
        self.pos(self.simple(i))
    }

    /// Index of the generator F_i.
    pub fn f(&self, i: usize) -> usize {
        self.neg(self.simple(i))
    }

    fn simple(&self, i: usize) -> usize {
        self.nil.iter().position(|e| e.word == LieWord::Gen(i)).expect("generator present")
    }

    pub fn label(&self, k: usize) -> String {
        match self.part(k) {
            (Part::Neg, j) => self.nil[j].word.render("F"),
            (Part::H, g) => self.h_labels[g].clone(),
            (Part::Pos, j) => self.nil[j].word.render("E"),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut out = Vec::new();
        for k in 0..self.dim() {
            let v = match self.part(k) {
                (Part::Neg, j) => {
                    json!({"part": "neg", "word": self.nil[j].word.to_json("F"), "root": self.nil[j].degree.iter().map(|x| -(*x as i64)).collect::<Vec<_>>()})
                }
                (Part::H, g) => json!({"part": "h", "word": self.h_labels[g]}),
                (Part::Pos, j) => {
                    json!({"part": "pos", "word": self.nil[j].word.to_json("E"), "root": self.nil[j].degree})
                }
            };
            out.push(v);
        }
        Value::Array(out)
    }
}

/// Multiparameter Lie bialgebra with explicit structure constants.
#[derive(Debug, Clone)]
pub struct MpLbA {
    pub basis: LieBasis,
    pub cartan: CartanDatum,
    pub bracket: Vec<Vec<LVec>>,
    pub cobracket: Vec<Tensor2>,
    pub p: QMat,
    pub r: ReducedRealization,
    pub degree_bound: usize,
    pub bound_too_small: bool,
}

struct MixedBuilder<'a> {
    basis: &'a LieBasis,
    nil: &'a Nilpotent,
    r: &'a ReducedRealization,
    cartan: &'a CartanDatum,
    memo: HashMap<(usize, usize), LVec>,
}

impl MixedBuilder<'_> {
    fn root_on(&self, deg: &[usize], g: usize) -> Rational {
        deg.iter().enumerate().fold(Rational::zero(), |acc, (i, m)| acc + rat(*m as i64) * &self.r.amat[i][g])
    }

    fn br(&mut self, a: usize, b: usize) -> LVec {
        if let Some(v) = self.memo.get(&(a, b)) {
            return v.clone();
        }
        let v = self.compute(a, b);
        self.memo.insert((a, b), v.clone());
        v
    }

    fn br_vec(&mut self, a: usize, v: &LVec) -> LVec {
        let mut out = LVec::new();
        for (k, c) in v {
            let w = self.br(a, *k);
            lvec_axpy(&mut out, c, &w);
        }
        out
    }

    fn vec_br(&mut self, v: &LVec, b: usize) -> LVec {
        let mut out = LVec::new();
        for (k, c) in v {
            let w = self.br(*k, b);
            lvec_axpy(&mut out, c, &w);
        }
        out
    }

    fn compute(&mut self, a: usize, b: usize) -> LVec {
        let basis = self.basis;
        let map_nil = |v: &LVec, f: &dyn Fn(usize) -> usize| -> LVec { v.iter().map(|(k, c)| (f(*k), c.clone())).collect() };
        let single = |k: usize, c: Rational| -> LVec {
            if c.is_zero() {
                LVec::new()
            } else {
                LVec::from([(k, c)])
            }
        };
        match (basis.part(a), basis.part(b)) {
            ((Part::Pos, x), (Part::Pos, y)) => {
                self.nil.table.get(&(x, y)).map(|v| map_nil(v, &|k| basis.pos(k))).unwrap_or_default()
            }
            ((Part::Neg, x), (Part::Neg, y)) => {
                self.nil.table.get(&(x, y)).map(|v| map_nil(v, &|k| basis.neg(k))).unwrap_or_default()
            }
            ((Part::H, _), (Part::H, _)) => LVec::new(),
            ((Part::H, g), (Part::Pos, y)) => single(b, self.root_on(&self.nil.elems[y].degree, g)),
            ((Part::H, g), (Part::Neg, y)) => single(b, -self.root_on(&self.nil.elems[y].degree, g)),
            ((Part::Pos, y), (Part::H, g)) => single(a, -self.root_on(&self.nil.elems[y].degree, g)),
            ((Part::Neg, y), (Part::H, g)) => single(a, self.root_on(&self.nil.elems[y].degree, g)),
            ((Part::Pos, x), (Part::Neg, y)) => self.pos_neg(x, y),
            ((Part::Neg, y), (Part::Pos, x)) => self.pos_neg(x, y).into_iter().map(|(k, c)| (k, -c)).collect(),
        }
    }

    /// [x_a, y_b] for a ∈ n_+ and b ∈ n_- by Jacobi recursion.
    fn pos_neg(&mut self, a: usize, b: usize) -> LVec {
        let basis = self.basis;
        let ea = &self.nil.elems[a];
        let eb = &self.nil.elems[b];
        match (ea.parent, eb.parent) {
            (None, None) => {
                let (LieWord::Gen(i), LieWord::Gen(j)) = (&ea.word, &eb.word) else { unreachable!() };
                if i != j {
                    return LVec::new();
                }
                // (T_i^+ + T_i^-)/(2 d_i)
                let scale = ratio(1, 2 * self.cartan.d[*i]);
                let mut v = LVec::new();
                for g in 0..self.r.t {
                    let c = (&self.r.tplus[*i][g] + &self.r.tminus[*i][g]) * &scale;
                    if !c.is_zero() {
                        v.insert(basis.h(g), c);
                    }
                }
                v
            }
            (None, Some((bp, j))) => {
                // [E_i,[y',F_j]] = [[E_i,y'],F_j] + [y',[E_i,F_j]]
                let ei = basis.pos(a);
                let fj = basis.neg(self.simple_index(j));
                let yp = basis.neg(bp);
                let v1 = self.br(ei, yp);
                let mut out = self.vec_br(&v1, fj);
                let v2 = self.br(ei, fj);
                let w = self.br_vec(yp, &v2);
                lvec_axpy(&mut out, &Rational::one(), &w);
                out
            }
            (Some((ap, i)), _) => {
                // [[x',E_i],y] = [x',[E_i,y]] − [E_i,[x',y]]
                let xp = basis.pos(ap);
                let ei = basis.pos(self.simple_index(i));
                let y = basis.neg(b);
                let w1 = self.br(ei, y);
                let mut out = self.br_vec(xp, &w1);
                let w2 = self.br(xp, y);
                let w = self.br_vec(ei, &w2);
                lvec_axpy(&mut out, &-Rational::one(), &w);
                out
            }
        }
    }

    fn simple_index(&self, i: usize) -> usize {
        self.nil.elems.iter().position(|e| e.word == LieWord::Gen(i)).unwrap()
    }
}

impl MpLbA {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn n(&self) -> usize {
        self.cartan.n()
    }

    /// Bracket of two vectors.
    pub fn br(&self, x: &LVec, y: &LVec) -> LVec {
        let mut out = LVec::new();
        for (a, c) in x {
            for (b, d) in y {
                lvec_axpy(&mut out, &(c * d), &self.bracket[*a][*b]);
            }
        }
        out
    }

    pub fn unit(&self, k: usize) -> LVec {
        LVec::from([(k, Rational::one())])
    }

    /// h-vector of a coroot or any vector of h̄ given in the h-basis.
    pub fn h_vec(&self, v: &[Rational]) -> LVec {
        v.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| (self.basis.h(g), c.clone()))
            .collect()
    }

    /// ad_x on a tensor.
    pub fn ad_tensor(&self, x: &LVec, t: &Tensor2) -> Tensor2 {
        let mut out = Tensor2::new();
        for ((u, v), c) in t {
            let bu = self.br(x, &self.unit(*u));
            for (k, d) in &bu {
                tensor_add_term(&mut out, (*k, *v), c * d);
            }
            let bv = self.br(x, &self.unit(*v));
            for (k, d) in &bv {
                tensor_add_term(&mut out, (*u, *k), c * d);
            }
        }
        out
    }

    pub fn cobracket_vec(&self, x: &LVec) -> Tensor2 {
        let mut out = Tensor2::new();
        for (a, c) in x {
            for (key, d) in &self.cobracket[*a] {
                tensor_add_term(&mut out, *key, c * d);
            }
        }
        out
    }

    /// Renders a tensor for diagnostics.
    pub fn render_tensor(&self, t: &Tensor2) -> String {
        if t.is_empty() {
            return "0".into();
        }
        t.iter()
            .map(|((u, v), c)| format!("{}*{}(x){}", rational_to_string(c), self.basis.label(*u), self.basis.label(*v)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn render_vec(&self, v: &LVec) -> String {
        if v.is_empty() {
            return "0".into();
        }
        v.iter().map(|(k, c)| format!("{}*{}", rational_to_string(c), self.basis.label(*k))).collect::<Vec<_>>().join(" + ")
    }

    /// Structure constants as JSON.
    pub fn to_json(&self) -> Value {
        let vec_json = |v: &LVec| -> Value {
            Value::Object(v.iter().map(|(k, c)| (k.to_string(), json!(rational_to_string(c)))).collect())
        };
        let mut br = Vec::new();
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                if !self.bracket[a][b].is_empty() {
                    br.push(json!({"x": a, "y": b, "value": vec_json(&self.bracket[a][b])}));
                }
            }
        }
        let co: Vec<Value> = self
            .cobracket
            .iter()
            .map(|t| {
                Value::Array(t.iter().map(|((u, v), c)| json!([u, v, rational_to_string(c)])).collect())
            })
            .collect();
        json!({"basis": self.basis.to_json(), "bracket": br, "cobracket": co, "degree_bound": self.degree_bound, "bound_too_small": self.bound_too_small})
    }
}

/// Assembles the Lie bialgebra of (P̄, R̄) up to the given degree bound.
pub fn build_mplba(
    cartan: &CartanDatum,
    p: &QMat,
    r: &ReducedRealization,
    bound: usize,
) -> Result<MpLbA, LieError> {
    let n = cartan.n();
    if r.amat.len() != n {
        return Err(LieError::DimensionMismatch { got: r.amat.len(), want: n });
    }
    let nil = build_nilpotent(cartan, bound)?;
    let basis = LieBasis { nil: nil.elems.clone(), t: r.t, h_labels: r.labels.clone() };
    let dim = basis.dim();
    let mut mb = MixedBuilder { basis: &basis, nil: &nil, r, cartan, memo: HashMap::new() };
    let mut bracket = vec![vec![LVec::new(); dim]; dim];
    for a in 0..dim {
        for b in 0..dim {
            bracket[a][b] = mb.br(a, b);
        }
    }
    let mut g = MpLbA {
        basis,
        cartan: cartan.clone(),
        bracket,
        cobracket: vec![Tensor2::new(); dim],
        p: p.clone(),
        r: r.clone(),
        degree_bound: bound,
        bound_too_small: nil.bound_too_small,
    };
    // cobracket on generators: δ(E_i) = T_i^+⊗E_i − E_i⊗T_i^+, δ(F_i) = T_i^-⊗F_i − F_i⊗T_i^-
    let m = g.basis.m();
    for k in 0..m {
        let elem = g.basis.nil[k].clone();
        for (part_index, tvec) in [(g.basis.pos(k), &r.tplus), (g.basis.neg(k), &r.tminus)] {
            let t = match elem.parent {
                None => {
                    let LieWord::Gen(i) = elem.word else { unreachable!() };
                    let mut t = Tensor2::new();
                    for (gi, c) in tvec[i].iter().enumerate() {
                        tensor_add_term(&mut t, (g.basis.h(gi), part_index), c.clone());
                        tensor_add_term(&mut t, (part_index, g.basis.h(gi)), -c.clone());
                    }
                    t
                }
                Some((parent, i)) => {
                    // δ([x,y]) = ad_x δ(y) − ad_y δ(x) with x = parent, y = generator
                    let (xp, yi) = if part_index >= g.basis.m() + g.basis.t {
                        (g.basis.pos(parent), g.basis.e(i))
                    } else {
                        (g.basis.neg(parent), g.basis.f(i))
                    };
                    let mut t = g.ad_tensor(&g.unit(xp), &g.cobracket[yi].clone());
                    let t2 = g.ad_tensor(&g.unit(yi), &g.cobracket[xp].clone());
                    for (key, c) in t2 {
                        tensor_add_term(&mut t, key, -c);
                    }
                    t
                }
            };
            g.cobracket[part_index] = t;
        }
    }
    Ok(g)
}

fn tensor_is_zero(t: &Tensor2) -> bool {
    t.is_empty()
}

/// Lists every violated Lie bialgebra identity on the basis.
pub fn check_bialgebra(g: &MpLbA) -> Vec<String> {
    let dim = g.dim();
    let label = |k: usize| g.basis.label(k);
    let mut bad = Vec::new();
    for a in 0..dim {
        for b in a..dim {
            let mut s = g.bracket[a][b].clone();
            lvec_axpy(&mut s, &Rational::one(), &g.bracket[b][a]);
            if !s.is_empty() {
                bad.push(format!("antisymmetry fails on ({}, {})", label(a), label(b)));
            }
        }
    }
    for a in 0..dim {
        for b in a + 1..dim {
            for c in b + 1..dim {
                let (ua, ub, uc) = (g.unit(a), g.unit(b), g.unit(c));
                let mut s = g.br(&ua, &g.bracket[b][c]);
                lvec_axpy(&mut s, &Rational::one(), &g.br(&ub, &g.bracket[c][a]));
                lvec_axpy(&mut s, &Rational::one(), &g.br(&uc, &g.bracket[a][b]));
                if !s.is_empty() {
                    bad.push(format!("Jacobi fails on ({}, {}, {})", label(a), label(b), label(c)));
                }
            }
        }
    }
    for a in 0..dim {
        let d = &g.cobracket[a];
        let mut s = d.clone();
        for ((u, v), c) in d {
            tensor_add_term(&mut s, (*v, *u), c.clone());
        }
        if !tensor_is_zero(&s) {
            bad.push(format!("cobracket not antisymmetric on {}", label(a)));
        }
        // co-Jacobi: cyclic sum of (δ⊗id)δ vanishes
        let mut cyc: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
        for ((u, v), c) in d {
            for ((x, y), e) in &g.cobracket[*u] {
                let w = c * e;
                for key in [(*x, *y, *v), (*v, *x, *y), (*y, *v, *x)] {
                    let ent = cyc.entry(key).or_insert_with(Rational::zero);
                    *ent += &w;
                }
            }
        }
        if cyc.values().any(|x| !x.is_zero()) {
            bad.push(format!("co-Jacobi fails on {}", label(a)));
        }
    }
    for a in 0..dim {
        for b in a + 1..dim {
            let (ua, ub) = (g.unit(a), g.unit(b));
            let lhs = g.cobracket_vec(&g.bracket[a][b]);
            let mut rhs = g.ad_tensor(&ua, &g.cobracket[b]);
            for (k, c) in g.ad_tensor(&ub, &g.cobracket[a]) {
                tensor_add_term(&mut rhs, k, -c);
            }
            let mut diff = lhs;
            for (k, c) in rhs {
                tensor_add_term(&mut diff, k, -c);
            }
            if !diff.is_empty() {
                bad.push(format!("cocycle compatibility fails on ({}, {})", label(a), label(b)));
            }
        }
    }
    bad
}

/// Cobracket twisted by j_Θ = Σ θ_gk H_g ⊗ H_k: δ(x) − ad_x(j_Θ).
pub fn lie_twist_deform(g: &MpLbA, theta: &QMat) -> MpLbA {
    let mut j = Tensor2::new();
    for (gi, row) in theta.iter().enumerate() {
        for (k, c) in row.iter().enumerate() {
            tensor_add_term(&mut j, (g.basis.h(gi), g.basis.h(k)), c.clone());
        }
    }
    let mut out = g.clone();
    for a in 0..g.dim() {
        let adj = g.ad_tensor(&g.unit(a), &j);
        for (k, c) in adj {
            tensor_add_term(&mut out.cobracket[a], k, -c);
        }
    }
    out
}

/// Bracket deformed by χ_g = χ̄∘(π_h⊗π_h):
/// [x,y] + χ_g(x_[1], y) x_[2] − χ_g(y_[1], x) y_[2].
pub fn lie_cocycle_deform(g: &MpLbA, chi: &QMat) -> MpLbA {
    let chi_g = |u: usize, v: usize| -> Rational {
        match (g.basis.part(u), g.basis.part(v)) {
            ((Part::H, a), (Part::H, b)) => chi[a][b].clone(),
            _ => Rational::zero(),
        }
    };
    let mut out = g.clone();
    for a in 0..g.dim() {
        for b in 0..g.dim() {
            let mut v = g.bracket[a][b].clone();
            for ((u, w), c) in &g.cobracket[a] {
                let s = chi_g(*u, b);
                if !s.is_zero() {
                    lvec_axpy(&mut v, &(c * s), &g.unit(*w));
                }
            }
            for ((u, w), c) in &g.cobracket[b] {
                let s = chi_g(*u, a);
                if !s.is_zero() {
                    lvec_axpy(&mut v, &-(c * s), &g.unit(*w));
                }
            }
            out.bracket[a][b] = v;
        }
    }
    out
}

/// Compares bracket and cobracket tables entry by entry; returns mismatches.
pub fn compare_tables(x: &MpLbA, y: &MpLbA, generators_only: bool) -> Vec<String> {
    let mut bad = Vec::new();
    if x.dim() != y.dim() {
        return vec![format!("dimensions differ: {} vs {}", x.dim(), y.dim())];
    }
    let gens: Vec<usize> = if generators_only {
        let n = x.n();
        (0..n)
            .map(|i| x.basis.e(i))
            .chain((0..n).map(|i| x.basis.f(i)))
            .chain((0..x.basis.t).map(|g| x.basis.h(g)))
            .collect()
    } else {
        (0..x.dim()).collect()
    };
    for &a in &gens {
        if x.cobracket[a] != y.cobracket[a] {
            bad.push(format!(
                "cobracket of {}: {} vs {}",
                x.basis.label(a),
                x.render_tensor(&x.cobracket[a]),
                y.render_tensor(&y.cobracket[a])
            ));
        }
        for &b in &gens {
            if x.bracket[a][b] != y.bracket[a][b] {
                bad.push(format!(
                    "bracket [{}, {}]: {} vs {}",
                    x.basis.label(a),
                    x.basis.label(b),
                    x.render_vec(&x.bracket[a][b]),
                    y.render_vec(&y.bracket[a][b])
                ));
            }
        }
    }
    bad
}

/// Letters of the pre-Borel free Lie algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    TPlus(usize),
    E(usize),
    TMinus(usize),
    F(usize),
}

/// Element of a free Lie algebra written as a bracket tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    L(Letter),
    B(Box<Tree>, Box<Tree>),
}

impl Tree {
    pub fn br(a: Tree, b: Tree) -> Tree {
        Tree::B(Box::new(a), Box::new(b))
    }

    pub fn left_normed(letters: &[Letter]) -> Tree {
        let mut t = Tree::L(letters[0]);
        for l in &letters[1..] {
            t = Tree::br(t, Tree::L(*l));
        }
        t
    }

    /// (ad x_i)^m (x_j).
    pub fn serre(xi: Letter, xj: Letter, m: usize) -> Tree {
        let mut t = Tree::L(xj);
        for _ in 0..m {
            t = Tree::br(Tree::L(xi), t);
        }
        t
    }
}

/// Linear combination of trees.
pub type TreeComb = Vec<(Rational, Tree)>;
type TreeTensor = Vec<(Rational, Tree, Tree)>;

/// The Lie bialgebra pairing between the positive and negative pre-Borel
/// free Lie algebras, built from the generator values
/// ⟨T_i^+, T_j^-⟩ = p_ij and ⟨E_i, F_j⟩ = δ_ij/(2d_i).
///
/// The positive side carries δ(E_i) = −(T_i^+⊗E_i − E_i⊗T_i^+), the negative
/// side δ(F_i) = T_i^-⊗F_i − F_i⊗T_i^-; the recursions are
/// ⟨[a,b], y⟩ = ⟨a⊗b, δ(y)⟩ and ⟨x, [c,d]⟩ = ⟨δ(x), c⊗d⟩.
pub struct LiePairing {
    p: QMat,
    d: Vec<i64>,
    memo: HashMap<(Tree, Tree), Rational>,
}

impl LiePairing {
    pub fn new(cartan: &CartanDatum, p: &QMat) -> Self {
        LiePairing { p: p.clone(), d: cartan.d.clone(), memo: HashMap::new() }
    }

    fn letter_cobracket(l: Letter) -> TreeTensor {
        match l {
            Letter::E(i) => vec![
                (rat(-1), Tree::L(Letter::TPlus(i)), Tree::L(l)),
                (rat(1), Tree::L(l), Tree::L(Letter::TPlus(i))),
            ],
            Letter::F(i) => vec![
                (rat(1), Tree::L(Letter::TMinus(i)), Tree::L(l)),
                (rat(-1), Tree::L(l), Tree::L(Letter::TMinus(i))),
            ],
            _ => vec![],
        }
    }

    /// Cobracket in the free Lie algebra by the cocycle rule.
    fn cobracket(t: &Tree) -> TreeTensor {
        match t {
            Tree::L(l) => Self::letter_cobracket(*l),
            Tree::B(x, y) => {
                let mut out = TreeTensor::new();
                // ad_x δ(y) − ad_y δ(x)
                for (c, u, v) in Self::cobracket(y) {
                    out.push((c.clone(), Tree::br((**x).clone(), u.clone()), v.clone()));
                    out.push((c, u, Tree::br((**x).clone(), v)));
                }
                for (c, u, v) in Self::cobracket(x) {
                    out.push((-c.clone(), Tree::br((**y).clone(), u.clone()), v.clone()));
                    out.push((-c, u, Tree::br((**y).clone(), v)));
                }
                out
            }
        }
    }

    fn letters(&self, x: Letter, y: Letter) -> Result<Rational, LieError> {
        Ok(match (x, y) {
            (Letter::TPlus(i), Letter::TMinus(j)) => self.p[i][j].clone(),
            (Letter::E(i), Letter::F(j)) => {
                if i == j {
                    ratio(1, 2 * self.d[i])
                } else {
                    Rational::zero()
                }
            }
            (Letter::TPlus(_), Letter::F(_)) | (Letter::E(_), Letter::TMinus(_)) => Rational::zero(),
            _ => return Err(LieError::BadPairingArgument),
        })
    }

    pub fn pair(&mut self, x: &Tree, y: &Tree) -> Result<Rational, LieError> {
        if let Some(v) = self.memo.get(&(x.clone(), y.clone())) {
            return Ok(v.clone());
        }
        let v = match (x, y) {
            (Tree::L(a), Tree::L(b)) => self.letters(*a, *b)?,
            (Tree::B(a, b), _) => {
                let mut acc = Rational::zero();
                for (c, u, v) in Self::cobracket(y) {
                    let pu = self.pair(a, &u)?;
                    if pu.is_zero() {
                        continue;
                    }
                    acc += c * pu * self.pair(b, &v)?;
                }
                acc
            }
            (Tree::L(_), Tree::B(c, d)) => {
                let mut acc = Rational::zero();
                for (k, u, v) in Self::cobracket(x) {
                    let pu = self.pair(&u, c)?;
                    if pu.is_zero() {
                        continue;
                    }
                    acc += k * pu * self.pair(&v, d)?;
                }
                acc
            }
        };
        self.memo.insert((x.clone(), y.clone()), v.clone());
        Ok(v)
    }

    pub fn pair_comb(&mut self, x: &TreeComb, y: &TreeComb) -> Result<Rational, LieError> {
        let mut acc = Rational::zero();
        for (a, s) in x {
            for (b, t) in y {
                acc += a * b * self.pair(s, t)?;
            }
        }
        Ok(acc)
    }
}

/// All left-normed brackets of length `1..=max_len` over the given letters.
pub fn left_normed_words(alphabet: &[Letter], max_len: usize) -> Vec<Tree> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Letter>> = alphabet.iter().map(|l| vec![*l]).collect();
    for _ in 0..max_len {
        for w in &frontier {
            out.push(Tree::left_normed(w));
        }
        let mut next = Vec::new();
        for w in &frontier {
            for l in alphabet {
                let mut v = w.clone();
                v.push(*l);
                next.push(v);
            }
        }
        frontier = next;
    }
    out
}

/// Generators of the ideals l_± that must lie in the radicals of the pairing.
pub fn radical_generators(cartan: &CartanDatum, r: &ReducedRealization, positive: bool) -> Vec<(String, TreeComb)> {
    let n = cartan.n();
    type LetterOf = fn(usize) -> Letter;
    let (t, x, sign, tname, xname): (LetterOf, LetterOf, i64, &str, &str) = if positive {
        (Letter::TPlus, Letter::E, -1, "T+", "E")
    } else {
        (Letter::TMinus, Letter::F, 1, "T-", "F")
    };
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            out.push((format!("[{tname}{},{tname}{}]", i + 1, j + 1), vec![(rat(1), Tree::br(Tree::L(t(i)), Tree::L(t(j))))]));
            // [T_i^+, E_j] − α_j(T_i^+) E_j, resp. [T_i^-, F_j] + α_j(T_i^-) F_j
            let coroot = if positive { &r.tplus[i] } else { &r.tminus[i] };
            let alpha: Rational = r.amat[j].iter().zip(coroot).map(|(a, b)| a * b).sum();
            out.push((
                format!("{xname}({tname}{},{xname}{})", i + 1, j + 1),
                vec![(rat(1), Tree::br(Tree::L(t(i)), Tree::L(x(j)))), (alpha * rat(sign), Tree::L(x(j)))],
            ));
            if i != j {
                let m = cartan.serre_degree(i, j);
                out.push((format!("serre({xname}{},{xname}{})", i + 1, j + 1), vec![(rat(1), Tree::serre(x(i), x(j), m))]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{make_standard_realization, MpMatrix};

    fn algebra(c: &CartanDatum) -> MpLbA {
        let p = MpMatrix::canonical(c, 3);
        let r = make_standard_realization(&p);
        build_mplba(c, &p.reduce(), &r.reduce(), c.default_bound()).unwrap()
    }

    #[test]
    fn nilpotent_dimensions() {
        assert_eq!(build_nilpotent(&CartanDatum::a1(), 3).unwrap().elems.len(), 1);
        let a2 = build_nilpotent(&CartanDatum::a2(), 3).unwrap();
        let degs: Vec<Vec<usize>> = a2.elems.iter().map(|e| e.degree.clone()).collect();
        assert_eq!(degs, vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(build_nilpotent(&CartanDatum::b2(), 4).unwrap().elems.len(), 4);
        assert_eq!(build_nilpotent(&CartanDatum::a1xa1(), 2).unwrap().elems.len(), 2);
        assert!(build_nilpotent(&CartanDatum::b2(), 2).unwrap().bound_too_small);
        assert!(!build_nilpotent(&CartanDatum::b2(), 3).unwrap().bound_too_small);
    }

    #[test]
    fn sl2_cobracket_on_e() {
        let g = algebra(&CartanDatum::a1());
        let e = g.basis.e(0);
        let tp = g.basis.h(0);
        let want = Tensor2::from([((tp, e), rat(1)), ((e, tp), rat(-1))]);
        assert_eq!(g.cobracket[e], want);
        // [E, F] = (T+ + T-)/2
        let f = g.basis.f(0);
        let want = LVec::from([(g.basis.h(0), ratio(1, 2)), (g.basis.h(1), ratio(1, 2))]);
        assert_eq!(g.bracket[e][f], want);
    }

    #[test]
    fn bialgebra_axioms_hold() {
        for c in [CartanDatum::a1(), CartanDatum::a1xa1(), CartanDatum::a2(), CartanDatum::b2()] {
            let g = algebra(&c);
            assert_eq!(check_bialgebra(&g), Vec::<String>::new(), "{}", c.label());
        }
    }

    #[test]
    fn perturbed_table_is_caught() {
        let mut g = algebra(&CartanDatum::a2());
        let (e1, e2) = (g.basis.e(0), g.basis.e(1));
        let v = g.bracket[e1][e2].clone();
        let mut w = v.clone();
        lvec_axpy(&mut w, &rat(1), &v);
        g.bracket[e1][e2] = w;
        assert!(!check_bialgebra(&g).is_empty());
    }

    #[test]
    fn toral_deformations_match_deformed_data() {
        use crate::cartan::{cocycle_realization, random_cocycle, random_mp_matrix, random_twist, twist_realization};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for c in [CartanDatum::a1(), CartanDatum::a2(), CartanDatum::b2()] {
            let p = random_mp_matrix(&mut rng, &c, 2, true);
            let r = make_standard_realization(&p);
            let bound = c.default_bound();
            let g = build_mplba(&c, &p.reduce(), &r.reduce(), bound).unwrap();

            let phi = random_twist(&mut rng, r.t, 2, true);
            let (pt, rt) = twist_realization(&p, &r, &phi).unwrap();
            let twisted = lie_twist_deform(&g, &phi.reduce());
            let direct = build_mplba(&c, &pt.reduce(), &rt.reduce(), bound).unwrap();
            assert_eq!(compare_tables(&twisted, &direct, false), Vec::<String>::new());
            assert!(check_bialgebra(&twisted).is_empty());

            let chi = random_cocycle(&mut rng, &r, 2, true);
            let (pc, rc) = cocycle_realization(&p, &r, &chi).unwrap();
            let deformed = lie_cocycle_deform(&g, &chi.reduce());
            let direct = build_mplba(&c, &pc.reduce(), &rc.reduce(), bound).unwrap();
            assert_eq!(compare_tables(&deformed, &direct, false), Vec::<String>::new());
            assert!(check_bialgebra(&deformed).is_empty());
        }
    }

    #[test]
    fn serre_elements_lie_in_the_radical() {
        for c in [CartanDatum::a2(), CartanDatum::b2()] {
            let p = MpMatrix::canonical(&c, 2);
            let r = make_standard_realization(&p).reduce();
            let mut pr = LiePairing::new(&c, &p.reduce());
            let n = c.n();
            let neg: Vec<Letter> = (0..n).flat_map(|i| [Letter::TMinus(i), Letter::F(i)]).collect();
            let pos: Vec<Letter> = (0..n).flat_map(|i| [Letter::TPlus(i), Letter::E(i)]).collect();
            let neg_words = left_normed_words(&neg, 3);
            let pos_words = left_normed_words(&pos, 3);
            for (name, x) in radical_generators(&c, &r, true) {
                for y in &neg_words {
                    let v = pr.pair_comb(&x, &vec![(rat(1), y.clone())]).unwrap();
                    assert!(v.is_zero(), "{name} against {y:?}");
                }
            }
            for (name, y) in radical_generators(&c, &r, false) {
                for x in &pos_words {
                    let v = pr.pair_comb(&vec![(rat(1), x.clone())], &y).unwrap();
                    assert!(v.is_zero(), "{name} against {x:?}");
                }
            }
        }
    }

    #[test]
    fn json_export_names_words() {
        let g = algebra(&CartanDatum::a2());
        let v = g.to_json();
        let words: Vec<String> = v["basis"].as_array().unwrap().iter().map(|b| b["word"].to_string()).collect();
        assert!(words.contains(&r#"["E1","E2"]"#.to_string()));
        assert!(words.contains(&r#"["F1","F2"]"#.to_string()));
    }

    #[test]
    fn pairing_values() {
        let c = CartanDatum::a2();
        let p = MpMatrix::canonical(&c, 3).reduce();
        let mut pr = LiePairing::new(&c, &p);
        let e = |i| Tree::L(Letter::E(i));
        let f = |i| Tree::L(Letter::F(i));
        assert_eq!(pr.pair(&Tree::L(Letter::TPlus(0)), &f(1)).unwrap(), rat(0));
        assert_eq!(pr.pair(&e(0), &f(0)).unwrap(), ratio(1, 2));
        // ⟨[E1,E2],[F2,F1]⟩ = −(p12 + p21)/4 = 1/2
        let x = Tree::br(e(0), e(1));
        let y = Tree::br(f(1), f(0));
        assert_eq!(pr.pair(&x, &y).unwrap(), ratio(1, 2));
        assert_eq!(pr.pair(&x, &Tree::br(f(0), f(1))).unwrap(), ratio(-1, 2));
    }
}
