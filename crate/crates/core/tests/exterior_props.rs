//! Algebraic identities of the dense form representation.

use nrgeom::exterior::{binomial, lorentzian, lowered_basis1, Form};
use proptest::prelude::*;

fn form(n: usize, p: usize) -> impl Strategy<Value = Form<f64>> {
    prop::collection::vec(-2.0..2.0f64, binomial(n, p)).prop_map(move |c| Form::from_components(n, p, c))
}

/// Dimension, two degrees `p, q` with `p + q <= n`, and an index.
fn shape() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (3usize..=5).prop_flat_map(|n| (Just(n), 0..=n)).prop_flat_map(|(n, p)| (Just(n), Just(p), 0..=n - p, 0..n))
}

fn pair() -> impl Strategy<Value = (usize, Form<f64>, Form<f64>)> {
    shape().prop_flat_map(|(n, p, q, k)| (Just(k), form(n, p), form(n, q)))
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

proptest! {
    #[test]
    fn wedge_is_graded_commutative((_, a, b) in pair()) {
        let s = sign(a.degree() * b.degree());
        prop_assert!((&a.wedge(&b) - &b.wedge(&a).scale(s)).max_abs() <= 1e-12);
    }

    #[test]
    fn interior_is_an_antiderivation((k, a, b) in pair()) {
        prop_assume!(a.degree() > 0 && b.degree() > 0);
        let mut rhs = a.interior(k).wedge(&b);
        rhs.axpy(sign(a.degree()), &a.wedge(&b.interior(k)));
        prop_assert!((&a.wedge(&b).interior(k) - &rhs).max_abs() <= 1e-12);
    }

    #[test]
    fn hodge_of_wedge_with_coframe((k, a, _) in pair()) {
        prop_assume!(a.degree() < a.dim());
        let eta = lorentzian(a.dim());
        let ea: Form<f64> = lowered_basis1(a.dim(), &eta, k);
        prop_assert!((&a.wedge(&ea).hodge(&eta) - &a.hodge(&eta).interior(k)).max_abs() <= 1e-12);
    }

    #[test]
    fn hodge_pairing_is_symmetric((a, b) in (3usize..=5)
        .prop_flat_map(|n| (Just(n), 0..=n))
        .prop_flat_map(|(n, p)| (form(n, p), form(n, p))))
    {
        let eta = lorentzian(a.dim());
        prop_assert!((&a.wedge(&b.hodge(&eta)) - &b.wedge(&a.hodge(&eta))).max_abs() <= 1e-12);
    }
}
