//! End-to-end values of the engine checked against closed forms expanded
//! independently (by hand and with a computer algebra system).

use mpqg::cartan::{make_standard_realization, CartanDatum, MpMatrix};
use mpqg::liebialg::tensor_add_term;
use mpqg::liebialg::Tensor2;
use mpqg::quea::{UContext, UOptions};
use mpqg::semiclassical::LimitContext;
use mpqg::series::{ratio, TruncLaurent};

fn a1(n: i32) -> UContext {
    let p = MpMatrix::canonical(&CartanDatum::a1(), n + 3);
    let r = make_standard_realization(&p);
    UContext::new(&p, &r, UOptions::new(n)).unwrap()
}

#[test]
fn quantum_unit_expansions() {
    // ħ/(q − q^{-1}) with q = e^{dħ}
    let u = a1(4);
    let k = u.kunit(0);
    assert_eq!(k.coeff(0), ratio(1, 2));
    assert_eq!(k.coeff(1), ratio(0, 1));
    assert_eq!(k.coeff(2), ratio(-1, 12));
    assert_eq!(k.coeff(4), ratio(7, 720));
    let p = MpMatrix::canonical(&CartanDatum::b2(), 7);
    let b2 = UContext::new(&p, &make_standard_realization(&p), UOptions::new(4)).unwrap();
    let k = b2.kunit(1);
    assert_eq!(k.coeff(0), ratio(1, 4));
    assert_eq!(k.coeff(2), ratio(-1, 6));
    assert_eq!(k.coeff(4), ratio(7, 90));
}

#[test]
fn ef_commutator_expansion() {
    // (e^{ħa} − e^{−ħb})/(q − q^{-1}) = (a+b)/2 + ħ(a² − b²)/4 + ħ²(a³ + b³ − a − b)/12 + …
    let u = a1(2);
    let lhs = u.eval_str("E1*F1 - F1*E1").unwrap();
    let rhs = u
        .eval_str("1/2*(T+1 + T-1) + hbar*1/4*(T+1^2 - T-1^2) + hbar^2*1/12*(T+1^3 + T-1^3 - T+1 - T-1)")
        .unwrap();
    assert!(lhs.agrees_to(&rhs, 2), "{lhs}\nvs\n{rhs}");
}

#[test]
fn h_moves_past_e_by_the_root() {
    // [H, E_1] = α_1(H) E_1 with α_1(T_1^+) = p_11 = 2
    let u = a1(2);
    let c = u.eval_str("T+1*E1 - E1*T+1").unwrap();
    let want = u.eval_str("2*E1").unwrap();
    assert!(c.agrees_to(&want, 2));
}

#[test]
fn semiclassical_cobracket_of_f() {
    // Δ(F) = F⊗e^{−ħT^-} + 1⊗F to first order: δ(F) = T^-⊗F − F⊗T^-
    let u = a1(2);
    let lc = LimitContext::new(&u).unwrap();
    let b = &lc.g.basis;
    let tm = b.h(1);
    let mut want = Tensor2::new();
    tensor_add_term(&mut want, (tm, b.f(0)), ratio(1, 1));
    tensor_add_term(&mut want, (b.f(0), tm), ratio(-1, 1));
    assert_eq!(lc.semiclassical_cobracket(&u.f(0)).unwrap(), want);
}

#[test]
fn twisted_generators_reduce_to_the_originals() {
    use mpqg::cartan::TwistMatrix;
    let u = a1(2);
    let c = TruncLaurent::from_int(3, 5);
    let phi = TwistMatrix::new(vec![vec![TruncLaurent::zero(5), c.clone()], vec![-&c, TruncLaurent::zero(5)]]).unwrap();
    let tg = u.twisted_generators(&phi).unwrap();
    let lc = LimitContext::new(&u).unwrap();
    assert_eq!(lc.classical_part(&tg.e[0]).unwrap(), lc.g.unit(lc.g.basis.e(0)));
    let rep = lc.check_square_twist(&phi);
    assert!(rep.passed(), "{}", rep.to_text());
}
