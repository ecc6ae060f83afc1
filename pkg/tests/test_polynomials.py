import numpy as np
import pytest

from invset.polynomials import (
    HomogeneousPolynomial,
    evaluate,
    gradient,
    monomial_basis,
    power_of_linear_form,
    pullback,
)

from _properties import euler_and_fd_suite, random_homogeneous


def test_monomial_basis_count_and_order():
    basis = monomial_basis(3, 4)
    # graded-lex over a fixed degree, C(4+2, 2) monomials
    assert len(basis) == 15
    mons = list(basis)
    assert mons[0] == (4, 0, 0)
    assert mons[-1] == (0, 0, 4)
    assert mons == sorted(mons, reverse=True)
    for k, e in enumerate(mons):
        assert basis.index[e] == k


def test_monomial_basis_rejects_bad_degree():
    with pytest.raises(ValueError):
        monomial_basis(2, -1)


def test_polynomial_rejects_wrong_degree_monomial():
    with pytest.raises(ValueError):
        HomogeneousPolynomial(2, 3, {(2, 0): 1.0})


def test_evaluate_known_values():
    p = HomogeneousPolynomial(2, 2, {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 3.0})
    assert evaluate(p, np.array([1.0, 1.0])) == pytest.approx(6.0, abs=1e-14)
    assert evaluate(p, np.array([2.0, 0.0])) == pytest.approx(4.0, abs=1e-14)


def test_euler_identity_and_finite_differences():
    failures = euler_and_fd_suite(num_cases=40)
    assert not failures, "\n".join(failures)


def test_pullback_functoriality(rng):
    p = random_homogeneous(rng, 2, 4)
    M = rng.normal(size=(2, 3))
    N = rng.normal(size=(3, 2))
    once = pullback(pullback(p, M), N)
    direct = pullback(p, M @ N)
    exponents = set(once.coefficients) | set(direct.coefficients)
    for e in exponents:
        assert once.coefficient(e) == pytest.approx(direct.coefficient(e),
                                                    rel=1e-12, abs=1e-12)


def test_pullback_matches_evaluation(rng):
    p = random_homogeneous(rng, 3, 6)
    M = rng.normal(size=(3, 2))
    q = pullback(p, M)
    for _ in range(20):
        z = rng.normal(size=2)
        lhs = evaluate(q, z)
        rhs = evaluate(p, M @ z)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_power_of_linear_form(rng):
    a = rng.normal(size=3)
    p = power_of_linear_form(a, 4)
    assert p.degree == 4
    for _ in range(10):
        y = rng.normal(size=3)
        assert evaluate(p, y) == pytest.approx(float(a @ y) ** 4, rel=1e-12)


def test_product_matches_pointwise(rng):
    p = random_homogeneous(rng, 3, 2)
    q = random_homogeneous(rng, 3, 3)
    prod = p.mul(q)
    assert prod.degree == 5
    for _ in range(10):
        y = rng.normal(size=3)
        assert evaluate(prod, y) == pytest.approx(
            evaluate(p, y) * evaluate(q, y), rel=1e-12, abs=1e-12)


def test_scale_and_add(rng):
    p = random_homogeneous(rng, 2, 4)
    q = random_homogeneous(rng, 2, 4)
    y = rng.normal(size=2)
    assert evaluate(p.scale(2.5), y) == pytest.approx(2.5 * evaluate(p, y),
                                                      rel=1e-12)
    assert evaluate(p.add(q), y) == pytest.approx(
        evaluate(p, y) + evaluate(q, y), rel=1e-12, abs=1e-12)


def test_gradient_partials(rng):
    p = random_homogeneous(rng, 3, 4)
    parts = gradient(p)
    assert len(parts) == 3
    assert all(dp.degree == 3 for dp in parts)
    y = rng.normal(size=3)
    # each partial is (k-1)-homogeneous
    for dp in parts:
        assert evaluate(dp, 2.0 * y) == pytest.approx(
            2.0 ** 3 * evaluate(dp, y), rel=1e-10)
