import json
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mldegree.core import DataVector, sample_data_vector, sample_generic_system
from mldegree.faces import (
    Case,
    case3_kernel_certificate,
    classify_face,
    initial_ml_system,
    likelihood_polytope,
    reconstruct_face,
    scan_weight_vectors,
)
from mldegree.families import random_model_supports
from mldegree.ml_system import build_ml_system, hat
from mldegree.polytope import exposed_face, face_value

U = DataVector.from_exact(["0.7", "1.3"])


@pytest.fixture(scope="module")
def hat_ml(example_system):
    return build_ml_system(hat(example_system), U)


def random_hat_ml(seed, n=None, k=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(1, 4))
    k = k or int(rng.integers(1, min(n, 2) + 1))
    F = hat(sample_generic_system(random_model_supports(rng, n, k), seed))
    return build_ml_system(F, sample_data_vector(n, seed))


def oracle_case(ml, w):
    """Case read off the exposed face of the shared polytope, by brute force over its points."""
    pts = list(ml.equations[0].terms)
    dots = [sum(x * y for x, y in zip(w, p)) for p in pts]
    low = min(dots)
    face = {p for p, v in zip(pts, dots) if v == low}
    origin = (0,) * ml.dim
    if face == {origin}:
        return Case.ORIGIN
    return Case.MIXED if origin in face else Case.PURE


@pytest.mark.parametrize("w, case, gamma", [
    ((-3, 14, 3), Case.ORIGIN, None),
    ((-3, -4, 3), Case.PURE, -16),
    ((-3, 12, 3), Case.MIXED, 0),
])
def test_example_weights(hat_ml, w, case, gamma):
    fc = classify_face(hat_ml, w)
    assert fc.case == case and fc.gamma == gamma
    assert fc.t == (0 if case == Case.ORIGIN else 1)
    assert reconstruct_face(hat_ml, fc) == exposed_face(likelihood_polytope(hat_ml), w).face_vertices


def test_example_certificate(hat_ml):
    # val of (-3, 12) over {(5,1), (1,4), (1,1)} is min(-3, 45, 9) = -3
    cert = case3_kernel_certificate(hat_ml, (-3, 12, 3))
    assert cert.vector == (-3, 12, 3)
    assert cert.matrix == ((5,), (1,), (1,))
    assert cert.matrix_shape == (3, 1)
    assert cert.verify()


def test_rejections(example_system, hat_ml):
    with pytest.raises(ValueError):
        classify_face(build_ml_system(example_system, U), (-3, 12, 3))
    with pytest.raises(ValueError):
        classify_face(hat_ml, (0, 0, 0))
    with pytest.raises(ValueError):
        classify_face(hat_ml, (1, 2))
    with pytest.raises(ValueError):
        case3_kernel_certificate(hat_ml, (-3, 14, 3))
    with pytest.raises(ValueError):
        initial_ml_system(hat_ml, (0, 0, 0))


def test_zero_a_part_is_routed_without_certificate():
    ml = random_hat_ml(11, n=2, k=2)
    w = (0, 0, 0, 1)
    assert classify_face(ml, w).case == Case.MIXED
    with pytest.raises(ValueError, match="a = 0"):
        case3_kernel_certificate(ml, w)


def test_initial_systems_of_example(hat_ml):
    init = initial_ml_system(hat_ml, (-3, 14, 3))
    assert init[0].support == [(0, 0, 0)] and init[0].coefficient((0, 0, 0)) == U.values[0]
    assert init[1].support == [(0, 0, 0)] and init[1].coefficient((0, 0, 0)) == U.values[1]
    init = initial_ml_system(hat_ml, (0, 0, 1))
    assert [g.support for g in init[:2]] == [[(0, 0, 0)], [(0, 0, 0)]]


@given(st.integers(0, 2**32 - 1), st.data())
def test_trichotomy_is_total_and_consistent(seed, data):
    ml = random_hat_ml(seed)
    w = data.draw(st.tuples(*[st.integers(-5, 5)] * ml.dim))
    if not any(w):
        return
    fc = classify_face(ml, w)
    assert fc.case == oracle_case(ml, w)
    assert reconstruct_face(ml, fc) == exposed_face(likelihood_polytope(ml), w).face_vertices
    if fc.case == Case.ORIGIN:
        assert all(g > 0 for g in fc.values)
    else:
        assert fc.gamma == min(fc.values) and (fc.gamma < 0) == (fc.case == Case.PURE)


@given(st.integers(0, 2**32 - 1), st.data())
def test_initial_supports_are_sub_supports(seed, data):
    ml = random_hat_ml(seed)
    w = data.draw(st.tuples(*[st.integers(-4, 4)] * ml.dim))
    if not any(w):
        return
    for g, h in zip(initial_ml_system(ml, w), ml.equations):
        assert set(g.support) <= set(h.support) and g.support


@given(st.integers(0, 2**32 - 1))
def test_positive_multiplier_weights_keep_only_data(seed):
    ml = random_hat_ml(seed)
    w = (0,) * ml.n + (1,) * ml.k
    for i, g in enumerate(initial_ml_system(ml, w)[: ml.n]):
        assert g.support == [(0,) * ml.dim]
        assert g.coefficient((0,) * ml.dim) == ml.u.values[i]


def case3_weight(ml, rng):
    """A weight built to land in the mixed case, with a random active set."""
    while True:
        a = tuple(int(x) for x in rng.integers(-4, 5, size=ml.n))
        if any(a):
            break
    active = [j for j in range(ml.k) if rng.random() < 0.6] or [int(rng.integers(ml.k))]
    b = tuple(-face_value(f.terms, a) + (0 if j in active else int(rng.integers(1, 4)))
              for j, f in enumerate(ml.source))
    return a + b, tuple(active)


def test_random_case3_certificates():
    rng = np.random.default_rng(2024)
    for trial in range(100):
        ml = random_hat_ml(int(rng.integers(2**32)))
        w, active = case3_weight(ml, rng)
        fc = classify_face(ml, w)
        assert fc.case == Case.MIXED and fc.active == active
        cert = case3_kernel_certificate(ml, w)
        assert cert.verify()
        A = np.array(cert.matrix, dtype=object)
        assert cert.matrix_shape == (ml.n + len(active), A.shape[1])
        assert not np.any(np.array(cert.vector, dtype=object) @ A)
        assert any(cert.vector[: ml.n])


def test_data_pairing_with_certificate_is_nonzero():
    rng = np.random.default_rng(7)
    for trial in range(200):
        ml = random_hat_ml(int(rng.integers(2**32)))
        w, _ = case3_weight(ml, rng)
        a = np.array(case3_kernel_certificate(ml, w).vector[: ml.n], dtype=float)
        u = np.array(sample_data_vector(ml.n, int(rng.integers(2**32))).values)
        assert abs(a @ u) > 1e-9


def test_radius_three_scan(hat_ml):
    res = scan_weight_vectors(hat_ml, 3)
    expected = {1: 0, 2: 0, 3: 0}
    for w in product(range(-3, 4), repeat=3):
        if any(w):
            expected[int(oracle_case(hat_ml, w))] += 1
    assert res.counts == expected
    assert sum(res.counts.values()) == 7**3 - 1
    assert res.unclassified == 0 and res.inconsistent == []
    assert res.certificates_verified + res.certificates_routed == expected[3]
    data = json.loads(json.dumps(res.to_dict()))
    assert len(data["rows"]) == 7**3 - 1
    for row in data["rows"]:
        assert {"w", "case", "t", "gamma"} <= set(row)
        assert row["case"] in (1, 2, 3)
    with pytest.raises(ValueError):
        scan_weight_vectors(hat_ml, 0)


def test_scan_reaches_example_weights(hat_ml):
    for w, case in [((-3, 14, 3), 1), ((-3, -4, 3), 2), ((-3, 12, 3), 3)]:
        assert classify_face(hat_ml, w).case == case == oracle_case(hat_ml, w)
