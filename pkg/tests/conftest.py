"""Shared brute-force oracles and hypothesis strategies.

Every oracle here works point by point over the cube with plain Python
products, independent of the transform kernels under test.
"""
import numpy as np
import pytest
from hypothesis import settings, strategies as st

from ptfreg.poly import MultilinearPolynomial, Restriction, random_polynomial

settings.register_profile("ptfreg", max_examples=40, deadline=None)
settings.load_profile("ptfreg")


def all_points(n):
    """Points in table order: bit i of the index set means x_{i+1} = -1."""
    return [tuple(-1 if (b >> i) & 1 else 1 for i in range(n)) for b in range(1 << n)]


def brute_eval(p, x):
    total = 0.0
    for mask, c in p.coeffs.items():
        prod = 1
        for i in range(p.n):
            if (mask >> i) & 1:
                prod *= x[i]
        total += c * prod
    return total


def brute_table(p):
    return np.array([brute_eval(p, x) for x in all_points(p.n)])


def brute_coefficients(values, n):
    """``E[f chi_S]`` by direct averaging, as a dense vector over masks."""
    pts = all_points(n)
    out = np.zeros(1 << n)
    for S in range(1 << n):
        acc = 0.0
        for v, x in zip(values, pts):
            chi = 1
            for i in range(n):
                if (S >> i) & 1:
                    chi *= x[i]
            acc += v * chi
        out[S] = acc / len(pts)
    return out


def brute_influences(p):
    """``Inf_i = E[((p(x) - p(x with x_i flipped)) / 2)^2]``: the derivative route."""
    pts = all_points(p.n)
    table = {x: brute_eval(p, x) for x in pts}
    out = np.zeros(p.n)
    for i in range(p.n):
        acc = 0.0
        for x in pts:
            y = list(x)
            y[i] = -y[i]
            acc += ((table[x] - table[tuple(y)]) / 2) ** 2
        out[i] = acc / len(pts)
    return out


def brute_sign_distance(p, q):
    return float(np.mean((brute_table(p) >= 0) != (brute_table(q) >= 0)))


def maj3():
    return MultilinearPolynomial.from_terms(
        3, [((1,), 0.5), ((2,), 0.5), ((3,), 0.5), ((1, 2, 3), -0.5)])


def majority9():
    return MultilinearPolynomial.linear([1 / 3] * 9)


@st.composite
def polynomials(draw, max_n=6, max_d=3, include_constant=True):
    n = draw(st.integers(1, max_n))
    d = draw(st.integers(1, min(max_d, n)))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_polynomial(n, d, seed, include_constant=include_constant)


@st.composite
def restrictions(draw, n):
    k = draw(st.integers(0, n))
    variables = draw(st.permutations(range(1, n + 1)))[:k]
    values = draw(st.lists(st.sampled_from([-1, 1]), min_size=k, max_size=k))
    return Restriction(tuple(zip(variables, values)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Lines recorded by the acceptance suite, echoed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
