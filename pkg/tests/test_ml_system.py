import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mldegree.core import (
    Coefficient,
    DataVector,
    PolynomialSystem,
    SparsePolynomial,
    partial_derivative,
    sample_generic_system,
)
from mldegree.families import random_model_supports
from mldegree.mixed_volume import mixed_volume_ie
from mldegree.ml_system import (
    build_ml_system,
    hat,
    lambda_rescale,
    ml_degree_mixed_volume,
    rescale_for_simplex_constraint,
    shear_matrix,
    shear_polytopes,
)
from mldegree.polytope import LatticePolytope, newton_polytope

U = DataVector.from_exact(["0.7", "1.3"])


@st.composite
def models(draw, max_n=3, max_k=2):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, min(n, max_k)))
    seed = draw(st.integers(0, 2**32 - 1))
    supports = random_model_supports(np.random.default_rng(seed), n, k)
    return sample_generic_system(supports, seed)


def terms(f):
    return {a: c.exact for a, c in f.terms.items()}


def test_example_likelihood_equations(example_system):
    ml = build_ml_system(example_system, U)
    l1, l2, f = ml.equations
    assert terms(l1) == {(0, 0, 0): (U.exact[0], 0), (4, 0, 1): (-8, 0)}
    assert terms(l2) == {(0, 0, 0): (U.exact[1], 0), (0, 3, 1): (-9, 0)}
    assert terms(f) == {(4, 0, 0): (2, 0), (0, 3, 0): (3, 0), (0, 0, 0): (-5, 0)}
    assert ml.n == 2 and ml.k == 1 and ml.dim == 3
    assert ml.variable_names() == ["x1", "x2", "lambda1"]


def test_univariate_likelihood_equation():
    F = PolynomialSystem((SparsePolynomial.from_dict(1, {(1,): 1, (0,): -3}),), 1)
    ml = build_ml_system(F, DataVector.from_exact(["2"]))
    assert terms(ml.equations[0]) == {(0, 0): (2, 0), (1, 1): (-1, 0)}


def test_hat_polytopes_coincide(example_system):
    ml = build_ml_system(hat(example_system), U)
    expected = {(5, 1, 1), (1, 4, 1), (1, 1, 1), (0, 0, 0)}
    assert ml.newton_polytopes()[0].vertex_set() == expected
    assert ml.newton_polytopes()[1].vertex_set() == expected


def test_data_length_is_checked(example_system):
    with pytest.raises(ValueError):
        build_ml_system(example_system, DataVector((1.0,)))


def test_ml_degree_examples(example_system):
    assert ml_degree_mixed_volume(example_system, U) == 12
    assert ml_degree_mixed_volume(hat(example_system), U) == 12
    line = PolynomialSystem((SparsePolynomial.from_dict(1, {(1,): 1, (0,): -1}),), 1)
    assert ml_degree_mixed_volume(line) == 1


def test_more_equations_than_variables_gives_zero(caplog):
    F = sample_generic_system([[(1,), (0,)], [(2,), (0,)]], 0)
    with caplog.at_level(logging.WARNING):
        assert ml_degree_mixed_volume(F) == 0
    assert "generically empty" in caplog.text


@given(models())
def test_every_likelihood_equation_has_data_constant_and_linear_multipliers(F):
    u = DataVector(tuple(np.linspace(0.6, 1.4, F.n)))
    ml = build_ml_system(F, u)
    assert len(ml.equations) == F.n + F.k
    for i, g in enumerate(ml.likelihood_equations):
        assert g.coefficient((0,) * ml.dim) == u.values[i]
        assert all(sum(a[F.n:]) == 1 for a in g.support if any(a))
    for g in ml.model_equations:
        assert all(not any(a[F.n:]) for a in g.support)


@given(models())
def test_hat_systems_share_the_likelihood_polytope(F):
    Fh = hat(F)
    ml = build_ml_system(Fh, DataVector((1.0,) * F.n))
    polys = ml.newton_polytopes()[: F.n]
    pts = [(0,) * ml.dim]
    for j, f in enumerate(Fh):
        for v in newton_polytope(f).vertices:
            pts.append(tuple(v) + tuple(int(c == j) for c in range(F.k)))
    expected = LatticePolytope(tuple(pts))
    assert all(P == expected for P in polys)


@given(models())
def test_derivative_keeps_newton_polytope_in_hat_form(F):
    for f in hat(F):
        for i in range(F.n):
            g = partial_derivative(f, i + 1).shift(tuple(int(c == i) for c in range(F.n)))
            assert newton_polytope(g) == newton_polytope(f)


@given(models())
def test_mixed_volume_survives_the_hat_transform(F):
    assert ml_degree_mixed_volume(F, method="ie") == ml_degree_mixed_volume(hat(F), method="ie")


@given(models(), st.integers(0, 1000))
def test_mixed_volume_depends_only_on_supports(F, seed):
    G = sample_generic_system(F.supports, seed)
    assert ml_degree_mixed_volume(F, seed=seed) == ml_degree_mixed_volume(G, seed=seed + 1)


@given(st.integers(1, 4), st.integers(1, 3), st.data())
def test_lambda_rescale_round_trip(n, k, data):
    pts = data.draw(st.lists(st.complex_numbers(min_magnitude=0.1, max_magnitude=10), min_size=n + k,
                             max_size=n + k))
    p = np.array(pts)
    back = lambda_rescale(lambda_rescale(p, n, "forward"), n, "inverse")
    assert np.allclose(back, p, rtol=1e-12)
    assert np.allclose(lambda_rescale(p, n, "forward")[:n], p[:n])


def test_lambda_rescale_edge_cases():
    p = np.array([1, 1, 2 + 1j])
    assert np.allclose(lambda_rescale(p, 2), p)
    with pytest.raises(ValueError):
        lambda_rescale(np.array([0, 1, 1]), 2)
    with pytest.raises(ValueError):
        lambda_rescale(p, 2, "sideways")


def test_shear_of_example(example_system):
    phi = shear_matrix(2, 1)
    assert phi == [[1, 0, 1], [0, 1, 1], [0, 0, 1]]
    ml = build_ml_system(example_system, U)
    sheared = shear_polytopes(ml)
    assert sheared[0].vertex_set() == {(0, 0, 0), (5, 1, 1)}
    hat_p = LatticePolytope(((5, 1, 1), (1, 4, 1), (1, 1, 1), (0, 0, 0)))
    assert hat_p.contains_polytope(sheared[0])
    assert LatticePolytope(((0, 0, 0),)).transform(phi).vertex_set() == {(0, 0, 0)}
    assert mixed_volume_ie(sheared) == mixed_volume_ie(ml.newton_polytopes()) == 12


@given(models())
def test_sheared_polytopes_sit_inside_hat_polytopes(F):
    u = DataVector((1.0,) * F.n)
    ml, mlh = build_ml_system(F, u), build_ml_system(hat(F), u)
    sheared = shear_polytopes(ml)
    for P, Q in zip(sheared[: F.n], mlh.newton_polytopes()[: F.n]):
        assert Q.contains_polytope(P)
    assert mixed_volume_ie(sheared) == mixed_volume_ie(ml.newton_polytopes())


def test_simplex_constraint_rescaling():
    F = PolynomialSystem((SparsePolynomial.from_dict(2, {(1, 0): 1, (0, 1): 1, (0, 0): -1}),), 2)
    G = rescale_for_simplex_constraint(F, seed=3)
    assert G.supports == F.supports
    assert G[0].coefficient((0, 0)) == -1
    assert abs(abs(G[0].coefficient((1, 0))) - 1) < 1e-12
    assert ml_degree_mixed_volume(G) == ml_degree_mixed_volume(F)


@given(models(), st.integers(0, 100))
def test_rescaling_preserves_supports_and_degree(F, seed):
    G = rescale_for_simplex_constraint(F, seed)
    assert G.supports == F.supports
    assert ml_degree_mixed_volume(G, method="ie") == ml_degree_mixed_volume(F, method="ie")


def test_coefficients_stay_exact_for_exact_input(example_system):
    ml = build_ml_system(example_system, U)
    assert all(g.is_exact for g in ml.equations)
    assert isinstance(ml.equations[0].terms[(4, 0, 1)], Coefficient)
