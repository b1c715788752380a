//! Cartan data, multiparameter matrices of Cartan type and their
//! realizations, together with twist and 2-cocycle deformations of
//! realizations and the solvers that relate two matrices with the same
//! symmetric part.

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::*;
use crate::series::{rat, ratio, Rational, TruncLaurent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CartanError {
    #[error("not a generalized Cartan matrix: {0}")]
    NotCartanMatrix(String),
    #[error("Cartan matrix is not symmetrizable")]
    NotSymmetrizable,
    #[error("P is not of Cartan type at ({i},{j})")]
    NotCartanType { i: usize, j: usize },
    #[error("realization rank {got} is below the required {need}")]
    RankTooSmall { need: usize, got: usize },
    #[error("antisymmetric part is not in the row space of the symmetric part")]
    SmallObstruction,
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("realization is not split minimal")]
    NotSplitMinimal,
    #[error("form does not vanish on the S_i: {0}")]
    AltSViolated(String),
    #[error("symmetric parts differ")]
    SymmetricPartMismatch,
    #[error("realization is not straight")]
    NotStraight,
    #[error("realization is not split")]
    NotSplit,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Generalized Cartan matrix with its symmetrizing diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartanDatum {
    pub a: Vec<Vec<i64>>,
    pub d: Vec<i64>,
}

impl CartanDatum {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a1() -> Self {
        symmetrize(&[vec![2]]).unwrap()
    }

    pub fn a1xa1() -> Self {
        symmetrize(&[vec![2, 0], vec![0, 2]]).unwrap()
    }

    pub fn a2() -> Self {
        symmetrize(&[vec![2, -1], vec![-1, 2]]).unwrap()
    }

    pub fn b2() -> Self {
        symmetrize(&[vec![2, -2], vec![-1, 2]]).unwrap()
    }

    /// Looks up one of the named data `A1`, `A1xA1`, `A2`, `B2`.
    pub fn named(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "A1" => Some(Self::a1()),
            "A1XA1" | "A1A1" => Some(Self::a1xa1()),
            "A2" => Some(Self::a2()),
            "B2" => Some(Self::b2()),
            _ => None,
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        for name in ["A1", "A1xA1", "A2", "B2"] {
            if Self::named(name).as_ref() == Some(self) {
                return name.to_string();
            }
        }
        format!("{:?}", self.a)
    }

    /// The symmetric matrix DA.
    pub fn da(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.d[i] * self.a[i][j]).collect()).collect()
    }

    /// `1 - a_ij`, the length of the Serre relation minus one.
    pub fn serre_degree(&self, i: usize, j: usize) -> usize {
        (1 - self.a[i][j]) as usize
    }

    /// Default Lie degree bound: height of the highest root for the named
    /// finite types, one more than the rank otherwise.
    pub fn default_bound(&self) -> usize {
        match self.label().as_str() {
            "A1" | "A1xA1" => 1,
            "A2" => 2,
            "B2" => 3,
            _ => self.n() + 1,
        }
    }
}

/// Finds the minimal pairwise-coprime symmetrizer of a generalized Cartan matrix.
pub fn symmetrize(a: &[Vec<i64>]) -> Result<CartanDatum, CartanError> {
    let n = a.len();
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(CartanError::NotCartanMatrix("matrix is not square".into()));
        }
        if row[i] != 2 {
            return Err(CartanError::NotCartanMatrix(format!("a_{0}{0} != 2", i + 1)));
        }
        for j in 0..n {
            if i != j && (row[j] > 0 || (row[j] == 0) != (a[j][i] == 0)) {
                return Err(CartanError::NotCartanMatrix(format!("bad off-diagonal entry at ({},{})", i + 1, j + 1)));
            }
        }
    }
    let mut d: Vec<Option<Rational>> = vec![None; n];
    for root in 0..n {
        if d[root].is_some() {
            continue;
        }
        let mut component = vec![root];
        d[root] = Some(Rational::one());
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if i == j || a[i][j] == 0 {
                    continue;
                }
                // d_i a_ij = d_j a_ji
                let dj = d[i].clone().unwrap() * rat(a[i][j]) / rat(a[j][i]);
                match &d[j] {
                    None => {
                        d[j] = Some(dj);
                        component.push(j);
                        stack.push(j);
                    }
                    Some(old) if *old != dj => return Err(CartanError::NotSymmetrizable),
                    Some(_) => {}
                }
            }
        }
        let lcm = component.iter().fold(num_bigint::BigInt::one(), |acc, &i| acc.lcm(d[i].as_ref().unwrap().denom()));
        let scaled: Vec<num_bigint::BigInt> =
            component.iter().map(|&i| (d[i].clone().unwrap() * Rational::from_integer(lcm.clone())).to_integer()).collect();
        let g = scaled.iter().fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(x));
        for (&i, x) in component.iter().zip(&scaled) {
            d[i] = Some(Rational::from_integer(x / &g));
        }
    }
    let d: Vec<i64> = d.into_iter().map(|x| x.unwrap().to_integer().try_into().unwrap()).collect();
    for i in 0..n {
        for j in 0..n {
            if d[i] * a[i][j] != d[j] * a[j][i] {
                return Err(CartanError::NotSymmetrizable);
            }
        }
    }
    Ok(CartanDatum { a: a.to_vec(), d })
}

/// Multiparameter matrix P of Cartan type: P + P^T = 2DA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpMatrix {
    pub p: SMat,
    pub cartan: CartanDatum,
}

impl MpMatrix {
    pub fn n(&self) -> usize {
        self.cartan.n()
    }

    pub fn order(&self) -> i32 {
        self.p.iter().flatten().map(|x| x.order()).min().unwrap_or(0)
    }

    /// The canonical choice P = DA.
    pub fn canonical(cartan: &CartanDatum, order: i32) -> Self {
        let p = cartan
            .da()
            .iter()
            .map(|r| r.iter().map(|x| TruncLaurent::from_int(*x, order)).collect())
            .collect();
        MpMatrix { p, cartan: cartan.clone() }
    }

    pub fn p_s(&self) -> SMat {
        s_scale(&s_add(&self.p, &s_transpose(&self.p)), &ratio(1, 2))
    }

    pub fn p_a(&self) -> SMat {
        s_scale(&s_sub(&self.p, &s_transpose(&self.p)), &ratio(1, 2))
    }

    /// Reduction modulo ħ.
    pub fn reduce(&self) -> QMat {
        const_part(&self.p)
    }

    pub fn with_p(&self, p: SMat) -> Result<Self, CartanError> {
        check_cartan_type(&p, &self.cartan)
    }
}

/// Validates P + P^T = 2DA exactly.
pub fn check_cartan_type(p: &SMat, cartan: &CartanDatum) -> Result<MpMatrix, CartanError> {
    let n = cartan.n();
    if p.len() != n || p.iter().any(|r| r.len() != n) {
        return Err(CartanError::DimensionMismatch(format!("P must be {n}x{n}")));
    }
    let da = cartan.da();
    for i in 0..n {
        for j in 0..n {
            let sum = &p[i][j] + &p[j][i];
            let want = TruncLaurent::from_int(2 * da[i][j], sum.order());
            if sum != want {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                return Err(CartanError::NotCartanType { i: a + 1, j: b + 1 });
            }
        }
    }
    Ok(MpMatrix { p: p.to_vec(), cartan: cartan.clone() })
}

/// Certified classification flags of a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Flags {
    pub straight: bool,
    pub small: bool,
    pub split: bool,
    pub minimal: bool,
}

/// A realization of P: a free module h of rank t with coroots T_i^± and roots α_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub t: usize,
    pub labels: Vec<String>,
    /// Rows are the coroots T_i^+ in the h-basis.
    pub tplus: SMat,
    /// Rows are the coroots T_i^- in the h-basis.
    pub tminus: SMat,
    /// Row j holds α_j(H_g), the matrix 𝔄.
    pub amat: SMat,
    #[serde(default)]
    pub flags: Flags,
}

impl Realization {
    pub fn n(&self) -> usize {
        self.amat.len()
    }

    pub fn order(&self) -> i32 {
        self.amat.iter().chain(&self.tplus).chain(&self.tminus).flatten().map(|x| x.order()).min().unwrap_or(0)
    }

    /// α_j evaluated on a vector of h.
    pub fn alpha(&self, j: usize, v: &SVec) -> TruncLaurent {
        s_dot(&self.amat[j], v)
    }

    pub fn s(&self, i: usize) -> SVec {
        self.tplus[i].iter().zip(&self.tminus[i]).map(|(a, b)| (a + b).scale(&ratio(1, 2))).collect()
    }

    pub fn lambda(&self, i: usize) -> SVec {
        self.tplus[i].iter().zip(&self.tminus[i]).map(|(a, b)| (a - b).scale(&ratio(1, 2))).collect()
    }

    pub fn s_rows(&self) -> SMat {
        (0..self.n()).map(|i| self.s(i)).collect()
    }

    /// The 2n × t matrix with rows T_1^+..T_n^+, T_1^-..T_n^-.
    pub fn t_rows(&self) -> SMat {
        self.tplus.iter().chain(&self.tminus).cloned().collect()
    }

    /// Reduction modulo ħ of all data.
    pub fn reduce(&self) -> ReducedRealization {
        ReducedRealization {
            t: self.t,
            labels: self.labels.clone(),
            tplus: const_part(&self.tplus),
            tminus: const_part(&self.tminus),
            amat: const_part(&self.amat),
        }
    }

    /// Checks α_j(T_i^+) = p_ij and α_j(T_i^-) = p_ji exactly to order `n`,
    /// and independence of the S_i modulo ħ.
    pub fn satisfies_axioms(&self, p: &MpMatrix, n: i32) -> Result<(), String> {
        let k = self.n();
        for i in 0..k {
            for j in 0..k {
                let plus = self.alpha(j, &self.tplus[i]);
                if !plus.agrees_to(&p.p[i][j], n) {
                    return Err(format!("alpha_{}(T+_{}) = {} but p = {}", j + 1, i + 1, plus, p.p[i][j]));
                }
                let minus = self.alpha(j, &self.tminus[i]);
                if !minus.agrees_to(&p.p[j][i], n) {
                    return Err(format!("alpha_{}(T-_{}) = {} but p = {}", j + 1, i + 1, minus, p.p[j][i]));
                }
            }
        }
        if s_rank(&self.s_rows()) != k {
            return Err("S_i are dependent modulo hbar".into());
        }
        Ok(())
    }
}

/// Realization data reduced modulo ħ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRealization {
    pub t: usize,
    pub labels: Vec<String>,
    #[serde(with = "crate::series::qmat_serde")]
    pub tplus: QMat,
    #[serde(with = "crate::series::qmat_serde")]
    pub tminus: QMat,
    #[serde(with = "crate::series::qmat_serde")]
    pub amat: QMat,
}

fn lex_first_invertible_block(ps: &QMat, r: usize) -> Vec<usize> {
    let n = ps.len();
    let mut subset: Vec<usize> = (0..r).collect();
    loop {
        let block: QMat = subset.iter().map(|&i| subset.iter().map(|&j| ps[i][j].clone()).collect()).collect();
        if q_rank(&block) == r {
            return subset;
        }
        // next r-subset in lexicographic order
        let mut k = r;
        loop {
            if k == 0 {
                return subset;
            }
            k -= 1;
            if subset[k] < n - r + k {
                subset[k] += 1;
                for m in k + 1..r {
                    subset[m] = subset[m - 1] + 1;
                }
                break;
            }
        }
    }
}

fn h_labels(t: usize) -> Vec<String> {
    (1..=t).map(|g| format!("H{g}")).collect()
}

/// Straight split realization of rank `ell`, built from the matrix whose
/// rows are the S_i and Λ_i.
pub fn make_split_realization(p: &MpMatrix, ell: usize) -> Result<Realization, CartanError> {
    let n = p.n();
    let order = p.order();
    let ps = const_part(&p.p_s());
    let r = q_rank(&ps);
    let need = 3 * n - r;
    if ell < need {
        return Err(CartanError::RankTooSmall { need, got: ell });
    }
    let jset = lex_first_invertible_block(&ps, r);
    let kset: Vec<usize> = (0..n).filter(|i| !jset.contains(i)).collect();
    let position: Vec<usize> = {
        let seq: Vec<usize> = jset.iter().chain(&kset).copied().collect();
        (0..n).map(|i| seq.iter().position(|&x| x == i).unwrap()).collect()
    };
    let pa = p.p_a();
    let psm = p.p_s();
    let mut s_rows = s_zero(n, ell, order);
    let mut l_rows = s_zero(n, ell, order);
    for i in 0..n {
        for j in 0..n {
            s_rows[i][j] = psm[i][j].clone();
            l_rows[i][j] = pa[i][j].clone();
        }
        l_rows[i][2 * n - r + position[i]] = TruncLaurent::one(order);
    }
    for (m, &k) in kset.iter().enumerate() {
        s_rows[k][n + m] = TruncLaurent::one(order);
    }
    let mut amat = s_zero(n, ell, order);
    for (j, row) in amat.iter_mut().enumerate() {
        row[j] = TruncLaurent::one(order);
    }
    let tplus = s_add(&s_rows, &l_rows);
    let tminus = s_sub(&s_rows, &l_rows);
    let mut real = Realization { t: ell, labels: h_labels(ell), tplus, tminus, amat, flags: Flags::default() };
    real.flags = classify(&real);
    Ok(real)
}

/// Split minimal realization with h-basis {T_1^+..T_n^+, T_1^-..T_n^-}.
pub fn make_standard_realization(p: &MpMatrix) -> Realization {
    let n = p.n();
    let order = p.order();
    let t = 2 * n;
    let tplus: SMat = (0..n).map(|i| unit_vector(t, i, order)).collect();
    let tminus: SMat = (0..n).map(|i| unit_vector(t, n + i, order)).collect();
    let amat: SMat = (0..n)
        .map(|j| (0..n).map(|i| p.p[i][j].clone()).chain((0..n).map(|i| p.p[j][i].clone())).collect())
        .collect();
    let labels = (1..=n).map(|i| format!("T+{i}")).chain((1..=n).map(|i| format!("T-{i}"))).collect();
    let mut real = Realization { t, labels, tplus, tminus, amat, flags: Flags::default() };
    real.flags = classify(&real);
    real
}

/// Straight small realization: Λ_i lies in the span of the S_j.
pub fn make_small_realization(p: &MpMatrix, ell: usize) -> Result<Realization, CartanError> {
    let n = p.n();
    let order = p.order();
    let ps_q = const_part(&p.p_s());
    let r = q_rank(&ps_q);
    let need = 2 * n - r;
    if ell < need {
        return Err(CartanError::RankTooSmall { need, got: ell });
    }
    let jset = lex_first_invertible_block(&ps_q, r);
    let kset: Vec<usize> = (0..n).filter(|i| !jset.contains(i)).collect();
    let ps = p.p_s();
    let pa = p.p_a();
    // C with C[:,J] = P_a[:,J] · P_s[J,J]^{-1} and zero elsewhere.
    let block: SMat = jset.iter().map(|&a| jset.iter().map(|&b| ps[a][b].clone()).collect()).collect();
    let block_inv = s_inverse(&block).ok_or(CartanError::SmallObstruction)?;
    let pa_j: SMat = (0..n).map(|i| jset.iter().map(|&b| pa[i][b].clone()).collect()).collect();
    let cj = s_mul(&pa_j, &block_inv);
    let mut c = s_zero(n, n, order);
    for i in 0..n {
        for (m, &b) in jset.iter().enumerate() {
            c[i][b] = cj[i][m].clone();
        }
    }
    if !s_agrees(&s_mul(&c, &ps), &pa, order) {
        return Err(CartanError::SmallObstruction);
    }
    let mut s_rows = s_zero(n, ell, order);
    for i in 0..n {
        for j in 0..n {
            s_rows[i][j] = ps[i][j].clone();
        }
    }
    for (m, &k) in kset.iter().enumerate() {
        s_rows[k][n + m] = TruncLaurent::one(order);
    }
    let l_rows = s_mul(&c, &s_rows);
    let mut amat = s_zero(n, ell, order);
    for (j, row) in amat.iter_mut().enumerate() {
        row[j] = TruncLaurent::one(order);
    }
    let tplus = s_add(&s_rows, &l_rows);
    let tminus = s_sub(&s_rows, &l_rows);
    let mut real = Realization { t: ell, labels: h_labels(ell), tplus, tminus, amat, flags: Flags::default() };
    real.flags = classify(&real);
    Ok(real)
}

/// Recomputes the four classification flags.
pub fn classify(r: &Realization) -> Flags {
    let n = r.n();
    let straight = s_rank(&r.amat) == n;
    let trows = r.t_rows();
    let trank = s_rank(&trows);
    let split = trank == 2 * n;
    let minimal = trank == r.t;
    let small = {
        let s_rows = r.s_rows();
        if s_rank(&s_rows) < n {
            false
        } else {
            let extra = complete_to_basis(&s_rows, r.t);
            let mut basis = s_rows.clone();
            basis.extend(extra.iter().map(|&g| unit_vector(r.t, g, r.order())));
            (0..n).all(|i| match s_solve_row(&basis, &r.lambda(i)) {
                Some(coords) => coords[n..].iter().all(|x| x.is_zero()),
                None => false,
            })
        }
    };
    Flags { straight, small, split, minimal }
}

/// Antisymmetric t × t twist matrix Φ on the h-basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistMatrix {
    pub phi: SMat,
}

impl TwistMatrix {
    pub fn new(phi: SMat) -> Result<Self, CartanError> {
        if !s_is_antisymmetric(&phi) {
            return Err(CartanError::NotAntisymmetric);
        }
        Ok(TwistMatrix { phi })
    }

    pub fn zero(t: usize, order: i32) -> Self {
        TwistMatrix { phi: s_zero(t, t, order) }
    }

    pub fn t(&self) -> usize {
        self.phi.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        TwistMatrix { phi: s_add(&self.phi, &other.phi) }
    }

    pub fn neg(&self) -> Self {
        TwistMatrix { phi: s_neg(&self.phi) }
    }

    pub fn reduce(&self) -> QMat {
        const_part(&self.phi)
    }
}

/// Twist deformation: P_Φ = P − 𝔄Φ𝔄^T, T^±_Φ = T^± ∓ (𝔄Φ) rows.
pub fn twist_realization(
    p: &MpMatrix,
    r: &Realization,
    phi: &TwistMatrix,
) -> Result<(MpMatrix, Realization), CartanError> {
    if phi.t() != r.t || !s_is_antisymmetric(&phi.phi) {
        return Err(CartanError::NotAntisymmetric);
    }
    let aphi = s_mul(&r.amat, &phi.phi);
    let corr = s_mul(&aphi, &s_transpose(&r.amat));
    let pphi = check_cartan_type(&s_sub(&p.p, &corr), &p.cartan)?;
    // Σ_{g,k} α_ℓ(H_g) φ_kg H_k has k-th coordinate (𝔄Φ^T)_{ℓk} = −(𝔄Φ)_{ℓk}.
    let tplus = s_sub(&r.tplus, &aphi);
    let tminus = s_add(&r.tminus, &aphi);
    let mut out = Realization { tplus, tminus, ..r.clone() };
    out.flags = classify(&out);
    Ok((pphi, out))
}

/// The split-stability matrix M = I − P^T(Φ^{++} − Φ^{+−}) − P(Φ^{−+} − Φ^{−−}),
/// with Φ written in the basis of coroots, and whether it is invertible.
pub fn split_stability(p: &MpMatrix, r: &Realization, phi: &TwistMatrix) -> Result<(SMat, bool), CartanError> {
    let n = r.n();
    if r.t != 2 * n || s_rank(&r.t_rows()) != 2 * n {
        return Err(CartanError::NotSplitMinimal);
    }
    if phi.t() != r.t || !s_is_antisymmetric(&phi.phi) {
        return Err(CartanError::NotAntisymmetric);
    }
    // B has the coroots as columns; Φ_T = B^{-1} Φ B^{-T}.
    let b = s_transpose(&r.t_rows());
    let binv = s_inverse(&b).ok_or(CartanError::NotSplitMinimal)?;
    let phi_t = s_mul(&s_mul(&binv, &phi.phi), &s_transpose(&binv));
    let block = |ro: usize, co: usize| -> SMat {
        (0..n).map(|i| (0..n).map(|j| phi_t[ro + i][co + j].clone()).collect()).collect()
    };
    let (pp, pm, mp, mm) = (block(0, 0), block(0, n), block(n, 0), block(n, n));
    let order = p.order();
    let m = s_sub(
        &s_sub(&s_identity(n, order), &s_mul(&s_transpose(&p.p), &s_sub(&pp, &pm))),
        &s_mul(&p.p, &s_sub(&mp, &mm)),
    );
    let invertible = s_rank(&m) == n;
    Ok((m, invertible))
}

/// Antisymmetric bilinear form χ on h, given by its matrix on the h-basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleForm {
    pub x: SMat,
}

impl CocycleForm {
    pub fn zero(t: usize, order: i32) -> Self {
        CocycleForm { x: s_zero(t, t, order) }
    }

    pub fn t(&self) -> usize {
        self.x.len()
    }

    pub fn eval(&self, u: &SVec, v: &SVec) -> TruncLaurent {
        s_dot(u, &s_mat_vec(&self.x, v))
    }

    /// χ̊_ij = χ(T_i^+, T_j^+).
    pub fn xring(&self, r: &Realization) -> SMat {
        let n = r.n();
        (0..n).map(|i| (0..n).map(|j| self.eval(&r.tplus[i], &r.tplus[j])).collect()).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        CocycleForm { x: s_add(&self.x, &other.x) }
    }

    pub fn reduce(&self) -> QMat {
        const_part(&self.x)
    }

    /// Checks antisymmetry and χ(S_i, −) = 0.
    pub fn check_alt_s(&self, r: &Realization) -> Result<(), CartanError> {
        if self.t() != r.t || !s_is_antisymmetric(&self.x) {
            return Err(CartanError::AltSViolated("not antisymmetric".into()));
        }
        for i in 0..r.n() {
            let v = s_mat_vec(&self.x, &r.s(i));
            if v.iter().any(|c| !c.is_zero()) {
                return Err(CartanError::AltSViolated(format!("chi(-, S_{}) != 0", i + 1)));
            }
        }
        Ok(())
    }
}

/// 2-cocycle deformation: P_(χ) = P + χ̊, α_i^{(χ)} = α_i + χ(−, T_i^+).
pub fn cocycle_realization(
    p: &MpMatrix,
    r: &Realization,
    chi: &CocycleForm,
) -> Result<(MpMatrix, Realization), CartanError> {
    chi.check_alt_s(r)?;
    let pchi = check_cartan_type(&s_add(&p.p, &chi.xring(r)), &p.cartan)?;
    let n = r.n();
    let mut amat = r.amat.clone();
    for (i, row) in amat.iter_mut().enumerate().take(n) {
        let plus = s_mat_vec(&chi.x, &r.tplus[i]);
        let minus = s_mat_vec(&chi.x, &r.tminus[i]);
        for g in 0..r.t {
            debug_assert!((&plus[g] + &minus[g]).is_zero());
            row[g] = &row[g] + &plus[g];
        }
    }
    let mut out = Realization { amat, ..r.clone() };
    out.flags = classify(&out);
    Ok((pchi, out))
}

fn check_same_symmetric(p: &MpMatrix, q: &MpMatrix) -> Result<SMat, CartanError> {
    if p.n() != q.n() {
        return Err(CartanError::DimensionMismatch("matrices of different size".into()));
    }
    let lam = s_sub(&q.p, &p.p);
    if !s_is_antisymmetric(&lam) {
        return Err(CartanError::SymmetricPartMismatch);
    }
    Ok(lam)
}

/// Φ with P_Φ = P′ on a straight realization: Φ is zero outside the first
/// column block G of 𝔄 that is invertible, where it equals −G^{-1}ΛG^{-T}
/// with Λ = P′ − P.
pub fn solve_twist_equiv(p: &MpMatrix, q: &MpMatrix, r: &Realization) -> Result<TwistMatrix, CartanError> {
    let lam = check_same_symmetric(p, q)?;
    let n = r.n();
    let order = p.order().min(q.order());
    let cols = lex_first_invertible_block_cols(&const_part(&r.amat), n).ok_or(CartanError::NotStraight)?;
    let g: SMat = (0..n).map(|j| cols.iter().map(|&c| r.amat[j][c].clone()).collect()).collect();
    let ginv = s_inverse(&g).ok_or(CartanError::NotStraight)?;
    let psi = s_neg(&s_mul(&s_mul(&ginv, &lam), &s_transpose(&ginv)));
    let mut phi = s_zero(r.t, r.t, order);
    for (a, &ca) in cols.iter().enumerate() {
        for (b, &cb) in cols.iter().enumerate() {
            phi[ca][cb] = psi[a][b].clone();
        }
    }
    TwistMatrix::new(phi)
}

fn lex_first_invertible_block_cols(amat: &QMat, n: usize) -> Option<Vec<usize>> {
    let t = amat.first().map_or(0, |r| r.len());
    if t < n || q_rank(amat) < n {
        return None;
    }
    // greedy left-to-right column selection gives the lexicographically first basis
    let mut chosen: Vec<usize> = Vec::new();
    for c in 0..t {
        let mut cand = chosen.clone();
        cand.push(c);
        let sub: QMat = amat.iter().map(|row| cand.iter().map(|&k| row[k].clone()).collect()).collect();
        if q_rank(&sub) == cand.len() {
            chosen = cand;
            if chosen.len() == n {
                return Some(chosen);
            }
        }
    }
    None
}

/// χ with P_(χ) = P′ on a split realization, zero on a fixed complement of
/// the coroots.
pub fn solve_cocycle_equiv(p: &MpMatrix, q: &MpMatrix, r: &Realization) -> Result<CocycleForm, CartanError> {
    let lam = check_same_symmetric(p, q)?;
    let n = r.n();
    let t = r.t;
    let order = p.order().min(q.order());
    let trows = r.t_rows();
    if s_rank(&trows) != 2 * n {
        return Err(CartanError::NotSplit);
    }
    let extra = complete_to_basis(&trows, t);
    let mut basis = trows.clone();
    basis.extend(extra.iter().map(|&g| unit_vector(t, g, order)));
    // χ on the basis {T^+, T^-, Y}.
    let mut xb = s_zero(t, t, order);
    for i in 0..n {
        for j in 0..n {
            xb[i][j] = lam[i][j].clone();
            xb[n + i][j] = -&lam[i][j];
            xb[i][n + j] = -&lam[i][j];
            xb[n + i][n + j] = lam[i][j].clone();
        }
    }
    // basis rows are the vectors, so B (columns) = basis^T; X_H = B^{-T} X_B B^{-1}.
    let bcols = s_transpose(&basis);
    let binv = s_inverse(&bcols).ok_or(CartanError::NotSplit)?;
    let x = s_mul(&s_mul(&s_transpose(&binv), &xb), &binv);
    let chi = CocycleForm { x };
    chi.check_alt_s(r)?;
    Ok(chi)
}

/// Random small rational in [-k, k] with denominator up to 3.
pub fn random_rational<R: Rng>(rng: &mut R, k: i64) -> Rational {
    let den = rng.gen_range(1..=3);
    ratio(rng.gen_range(-k * den..=k * den), den)
}

/// Random series `c0 + c1 ħ`.
pub fn random_series<R: Rng>(rng: &mut R, order: i32, with_constant: bool) -> TruncLaurent {
    let c0 = if with_constant { random_rational(rng, 2) } else { Rational::zero() };
    TruncLaurent::from_terms([(0, c0), (1, random_rational(rng, 2))], order)
}

/// Random antisymmetric k × k series matrix.
pub fn random_antisymmetric<R: Rng>(rng: &mut R, k: usize, order: i32, with_constant: bool) -> SMat {
    let mut m = s_zero(k, k, order);
    for i in 0..k {
        for j in i + 1..k {
            let x = random_series(rng, order, with_constant);
            m[j][i] = -&x;
            m[i][j] = x;
        }
    }
    m
}

/// Random Cartan-type matrix DA + (antisymmetric), with an optional
/// constant antisymmetric part.
pub fn random_mp_matrix<R: Rng>(rng: &mut R, cartan: &CartanDatum, order: i32, with_constant: bool) -> MpMatrix {
    let base = MpMatrix::canonical(cartan, order);
    let lam = random_antisymmetric(rng, cartan.n(), order, with_constant);
    check_cartan_type(&s_add(&base.p, &lam), cartan).expect("symmetric part unchanged")
}

pub fn random_twist<R: Rng>(rng: &mut R, t: usize, order: i32, with_constant: bool) -> TwistMatrix {
    TwistMatrix { phi: random_antisymmetric(rng, t, order, with_constant) }
}

/// Random form vanishing on the S_i: random on a complement of span{S_i}.
pub fn random_cocycle<R: Rng>(rng: &mut R, r: &Realization, order: i32, with_constant: bool) -> CocycleForm {
    let n = r.n();
    let t = r.t;
    let s_rows = r.s_rows();
    let extra = complete_to_basis(&s_rows, t);
    let mut basis = s_rows;
    basis.extend(extra.iter().map(|&g| unit_vector(t, g, order)));
    let k = t - n;
    let small = random_antisymmetric(rng, k, order, with_constant);
    let mut xb = s_zero(t, t, order);
    for a in 0..k {
        for b in 0..k {
            xb[n + a][n + b] = small[a][b].clone();
        }
    }
    let bcols = s_transpose(&basis);
    let binv = s_inverse(&bcols).expect("completed basis");
    CocycleForm { x: s_mul(&s_mul(&s_transpose(&binv), &xb), &binv) }
}

/// Kernel vectors (mod ħ) of the linear map h → h' given by a matrix whose
/// rows are images of the h-basis vectors.
pub fn kernel_mod_h(map_rows: &QMat) -> QMat {
    // kernel of v ↦ v · M
    let t = map_rows.len();
    let cols = map_rows.first().map_or(0, |r| r.len());
    let mut mt: QMat = (0..cols).map(|j| (0..t).map(|i| map_rows[i][j].clone()).collect()).collect();
    let piv = q_echelon(&mut mt);
    let free: Vec<usize> = (0..t).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); t];
            v[f] = Rational::one();
            for (row, &pc) in piv.iter().enumerate() {
                v[pc] = -mt[row][f].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const N: i32 = 4;

    fn s(c: &[(i32, i64)]) -> TruncLaurent {
        TruncLaurent::from_terms(c.iter().map(|(e, x)| (*e, rat(*x))), N)
    }

    fn data() -> Vec<CartanDatum> {
        vec![CartanDatum::a1(), CartanDatum::a1xa1(), CartanDatum::a2(), CartanDatum::b2()]
    }

    #[test]
    fn symmetrizers() {
        assert_eq!(symmetrize(&[vec![2]]).unwrap().d, vec![1]);
        assert_eq!(CartanDatum::a2().d, vec![1, 1]);
        assert_eq!(CartanDatum::b2().d, vec![1, 2]);
        let g2 = symmetrize(&[vec![2, -1], vec![-3, 2]]).unwrap();
        assert_eq!(g2.d, vec![3, 1]);
        assert!(matches!(symmetrize(&[vec![2, 1], vec![-1, 2]]), Err(CartanError::NotCartanMatrix(_))));
        // a cycle with inconsistent ratios
        let bad = vec![vec![2, -1, -1], vec![-2, 2, -1], vec![-1, -1, 2]];
        assert_eq!(symmetrize(&bad), Err(CartanError::NotSymmetrizable));
    }

    #[test]
    fn cartan_type_check() {
        let a2 = CartanDatum::a2();
        let ok = vec![vec![s(&[(0, 2)]), s(&[(0, -1), (1, 1)])], vec![s(&[(0, -1), (1, -1)]), s(&[(0, 2)])]];
        let p = check_cartan_type(&ok, &a2).unwrap();
        assert_eq!(p.p_a()[0][1], s(&[(1, 1)]));
        let bad = vec![vec![s(&[(0, 2)]), s(&[])], vec![s(&[(0, -1)]), s(&[(0, 2)])]];
        assert_eq!(check_cartan_type(&bad, &a2), Err(CartanError::NotCartanType { i: 1, j: 2 }));
    }

    #[test]
    fn sl2_split_and_standard() {
        let p = MpMatrix::canonical(&CartanDatum::a1(), N);
        let r = make_split_realization(&p, 2).unwrap();
        assert_eq!(r.t, 2);
        assert_eq!(r.s(0), vec![s(&[(0, 2)]), s(&[])]);
        assert_eq!(r.lambda(0), vec![s(&[]), s(&[(0, 1)])]);
        assert!(r.flags.straight && r.flags.split);
        r.satisfies_axioms(&p, N).unwrap();
        assert_eq!(make_split_realization(&p, 1), Err(CartanError::RankTooSmall { need: 2, got: 1 }));
        let st = make_standard_realization(&p);
        assert_eq!(st.amat, vec![vec![s(&[(0, 2)]), s(&[(0, 2)])]]);
        assert!(st.flags.split && st.flags.minimal);
    }

    #[test]
    fn a2_realizations() {
        let a2 = CartanDatum::a2();
        let p = MpMatrix::canonical(&a2, N);
        let r = make_split_realization(&p, 4).unwrap();
        assert!(r.flags.straight && r.flags.split && r.flags.minimal);
        let st = make_standard_realization(&p);
        assert!(st.flags.straight);
        let kac = make_small_realization(&p, 2).unwrap();
        assert!(kac.flags.straight && kac.flags.small);
        assert!(kac.lambda(0).iter().all(|x| x.is_zero()));
        let q = vec![vec![s(&[(0, 2)]), s(&[(0, -1), (1, 1)])], vec![s(&[(0, -1), (1, -1)]), s(&[(0, 2)])]];
        let q = check_cartan_type(&q, &a2).unwrap();
        let sm = make_small_realization(&q, 2).unwrap();
        assert_eq!(sm.t, 2);
        sm.satisfies_axioms(&q, N).unwrap();
        assert!(sm.flags.small);
    }

    #[test]
    fn small_obstruction() {
        // A1xA1 has invertible P_s, so use a degenerate symmetric part instead.
        let aff = symmetrize(&[vec![2, -2], vec![-2, 2]]).unwrap();
        let mut p = MpMatrix::canonical(&aff, N);
        p.p[0][1] = s(&[(0, -2), (1, 1)]);
        p.p[1][0] = s(&[(0, -2), (1, -1)]);
        let p = check_cartan_type(&p.p, &aff).unwrap();
        assert_eq!(make_small_realization(&p, 3), Err(CartanError::SmallObstruction));
    }

    #[test]
    fn twist_of_rank_one_keeps_p() {
        let p = MpMatrix::canonical(&CartanDatum::a1(), N);
        let r = make_standard_realization(&p);
        let phi = TwistMatrix::new(vec![vec![s(&[]), s(&[(0, 3)])], vec![s(&[(0, -3)]), s(&[])]]).unwrap();
        let (pphi, rphi) = twist_realization(&p, &r, &phi).unwrap();
        assert_eq!(pphi.p, p.p);
        assert_ne!(rphi.tplus, r.tplus);
        rphi.satisfies_axioms(&pphi, N).unwrap();
        assert_eq!(rphi.s(0), r.s(0));
    }

    #[test]
    fn stability_matrix_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for c in data() {
            let n = c.n();
            let p = random_mp_matrix(&mut rng, &c, N, true);
            let r = make_standard_realization(&p);
            let (m, inv) = split_stability(&p, &r, &TwistMatrix::zero(2 * n, N)).unwrap();
            assert!(inv);
            assert_eq!(m, s_identity(n, N));
            let vphi = random_antisymmetric(&mut rng, n, N, true);
            let mut phi = s_zero(2 * n, 2 * n, N);
            for i in 0..n {
                for j in 0..n {
                    phi[i][n + j] = vphi[i][j].clone();
                    phi[n + i][j] = vphi[i][j].clone();
                }
            }
            let (m, _) = split_stability(&p, &r, &TwistMatrix::new(phi).unwrap()).unwrap();
            let want = s_sub(&s_identity(n, N), &s_scale(&s_mul(&p.p_a(), &vphi), &rat(2)));
            assert!(s_agrees(&m, &want, N));
        }
    }

    #[test]
    fn kernel_of_projection_is_killed_by_roots() {
        // standard (rank 4) onto the Kac realization (rank 2) of DA for A2:
        // T_i^± ↦ S_i, so the kernel is spanned by T_i^+ − T_i^-.
        let p = MpMatrix::canonical(&CartanDatum::a2(), N);
        let st = make_standard_realization(&p);
        let kac = make_small_realization(&p, 2).unwrap();
        let map: QMat = const_part(&kac.tplus).into_iter().chain(const_part(&kac.tminus)).collect();
        let ker = kernel_mod_h(&map);
        assert_eq!(ker.len(), 2);
        let a = const_part(&st.amat);
        for v in ker {
            for row in &a {
                let val: Rational = row.iter().zip(&v).map(|(x, y)| x * y).sum();
                assert!(val.is_zero());
            }
        }
    }
}
