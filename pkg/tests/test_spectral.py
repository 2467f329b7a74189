"""Rayleigh-Ritz eigenvalue computations against the model cases, a
finite-difference Sturm-Liouville oracle and Riemann-grid integrals."""

import numpy as np
import pytest

from oracles import (
    box_midpoint_integral,
    interval_midpoint_integral,
    sturm_liouville_lambda1,
)
from toriceig import (
    MultiPoly,
    build_quadrature,
    dilation,
    example_polytope,
    guillemin,
    lambda1_invariant,
    quadratic_perturbed,
    rayleigh_quotient,
    sweep_dilation,
    sweep_uc,
)
from toriceig.spectral import TrialFunction, ZeroDenominator

interval01 = example_polytope("interval01")
intervalC = example_polytope("intervalC")
simplex2 = example_polytope("simplex2")
square = example_polytope("square")

x_1d = MultiPoly.coordinate(1, 0)


def uc_H(c):
    return lambda t: 1.0 / (1.0 / (2 * t * (1 - t)) + c)


def dilation_H_intervalC(s):
    def H(t):
        L = np.array([1.0 + t, 1.0 - t])
        Ls = L + (s - 1.0)
        G = 0.5 * np.sum(1.0 / L - 1.0 / (s * Ls))
        return 1.0 / G

    return H


class TestRayleighQuotient:
    def test_interval_coordinate_gives_4(self):
        Q = build_quadrature(interval01, 3, 3)
        assert rayleigh_quotient(guillemin(interval01), x_1d, Q) == pytest.approx(
            4.0, rel=1e-10
        )

    def test_uc_quotient_decreases_in_c(self):
        Q = build_quadrature(interval01, 3, 3)
        vals = [
            rayleigh_quotient(quadratic_perturbed(interval01, 0, c), x_1d, Q)
            for c in (0.5, 1, 5, 50)
        ]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_grid_oracle_interval(self):
        # symmetric polytope, f = x: compare with a Riemann-sum evaluation
        u = guillemin(intervalC)
        Q = build_quadrature(intervalC, 3, 3)
        lib = rayleigh_quotient(u, x_1d, Q)
        num = interval_midpoint_integral(lambda p: 1.0 - p[0] ** 2, -1, 1, 20000)
        den = interval_midpoint_integral(lambda p: p[0] ** 2, -1, 1, 20000)
        assert lib == pytest.approx(num / den, rel=1e-6)

    def test_grid_oracle_square(self):
        sq_centered = example_polytope("square").translated((0.5, 0.5))
        u = guillemin(sq_centered)
        Q = build_quadrature(sq_centered, 3, 3)
        f = MultiPoly.coordinate(2, 0)
        lib = rayleigh_quotient(u, f, Q)

        def H00(pts):
            # product metric: H = diag(1/2 - 2 x_i^2 ... ) on [-1/2, 1/2]^2
            L1, L2 = 0.5 + pts[:, 0], 0.5 - pts[:, 0]
            return 1.0 / (0.5 * (1 / L1 + 1 / L2))

        num = box_midpoint_integral(H00, (-0.5, -0.5), (0.5, 0.5), cells_per_axis=1500)
        den = box_midpoint_integral(
            lambda p: p[:, 0] ** 2, (-0.5, -0.5), (0.5, 0.5), cells_per_axis=1500
        )
        assert lib == pytest.approx(num / den, rel=1e-6)

    def test_constant_rejected(self):
        Q = build_quadrature(interval01, 2, 1)
        with pytest.raises(ZeroDenominator):
            rayleigh_quotient(guillemin(interval01), MultiPoly.constant(1, 2.0), Q)


class TestLambda1:
    @pytest.mark.parametrize("degree", [1, 2, 4])
    def test_interval_guillemin(self, degree):
        Q = build_quadrature(interval01, 3, 3)
        result = lambda1_invariant(guillemin(interval01), degree, Q)
        assert result.lambda1T == pytest.approx(4.0, abs=1e-6)

    @pytest.mark.parametrize("degree", [1, 3, 4])
    def test_simplex_guillemin(self, degree):
        Q = build_quadrature(simplex2, 3, 2)
        result = lambda1_invariant(guillemin(simplex2), degree, Q)
        assert result.lambda1T == pytest.approx(6.0, abs=5e-3)

    def test_result_invariants(self):
        Q = build_quadrature(simplex2, 3, 2)
        u = guillemin(simplex2)
        result = lambda1_invariant(u, 5, Q)
        assert result.lambda1T > 0
        assert np.all(np.diff(result.eigenvalues) >= -1e-9)
        quotient = rayleigh_quotient(u, result.eigenfunction(), Q)
        assert quotient == pytest.approx(result.lambda1T, rel=1e-8)

    @pytest.mark.parametrize(
        "make_u,P",
        [
            (lambda P: guillemin(P), interval01),
            (lambda P: quadratic_perturbed(P, 0, 3.0), interval01),
            (lambda P: guillemin(P), simplex2),
        ],
    )
    def test_degree_monotonicity(self, make_u, P):
        Q = build_quadrature(P, 3, 2)
        u = make_u(P)
        values = [lambda1_invariant(u, d, Q).lambda1T for d in (2, 3, 4, 5)]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-10

    def test_determinism(self):
        Q = build_quadrature(simplex2, 3, 2)
        u = guillemin(simplex2)
        r1 = lambda1_invariant(u, 4, Q)
        r2 = lambda1_invariant(u, 4, Q)
        assert r1.lambda1T == r2.lambda1T
        assert r1.eigvec.tobytes() == r2.eigvec.tobytes()

    def test_mismatched_quadrature_rejected(self):
        Q = build_quadrature(interval01, 2, 1)
        with pytest.raises(ValueError):
            lambda1_invariant(guillemin(intervalC), 3, Q)

    def test_rank_deficient_mass_drops_basis(self):
        # 2 nodes cannot support 6 monomials; the pivoted factorization must
        # drop the dependent directions and still return a bound
        Q = build_quadrature(interval01, 1, 0)
        result = lambda1_invariant(guillemin(interval01), 6, Q)
        assert result.basis_size <= len(Q)
        assert result.lambda1T > 0


class TestOracleEquivalence:
    @pytest.mark.parametrize("c", [0.0, 1.0, 10.0])
    def test_uc_family_interval(self, c):
        Q = build_quadrature(interval01, 3, 3)
        u = guillemin(interval01) if c == 0 else quadratic_perturbed(interval01, 0, c)
        ritz = lambda1_invariant(u, 6, Q).lambda1T
        oracle = sturm_liouville_lambda1(uc_H(c), 0.0, 1.0, 2000)
        assert ritz == pytest.approx(oracle, rel=1e-3)

    @pytest.mark.parametrize("s", [1.5, 2.0])
    def test_dilation_family_intervalC(self, s):
        Q = build_quadrature(intervalC, 3, 3)
        u = dilation(intervalC, s)
        ritz = lambda1_invariant(u, 6, Q).lambda1T
        oracle = sturm_liouville_lambda1(dilation_H_intervalC(s), -1.0, 1.0, 2000)
        assert ritz == pytest.approx(oracle, rel=1e-3)


class TestStiffnessDomination:
    @pytest.mark.parametrize("s", [1.01, 2.0, 10.0])
    def test_dilation_energy_dominates_guillemin(self, s):
        # same f, same quadrature: integral H^s(df, df) >= integral H_0(df, df)
        Q = build_quadrature(intervalC, 3, 2)
        u0 = guillemin(intervalC)
        us = dilation(intervalC, s)
        rng = np.random.default_rng(11)
        exponents = [(1,), (2,), (3,), (4,)]
        for _ in range(6):
            f = TrialFunction(rng.normal(size=4), exponents, [0.0], [1.0])
            q_s = rayleigh_quotient(us, f, Q)
            q_0 = rayleigh_quotient(u0, f, Q)
            assert q_s >= q_0 - 1e-9 * max(1.0, abs(q_0))


class TestSweeps:
    def test_uc_sweep_decreasing_and_small_tail(self):
        result = sweep_uc(interval01, 0, [0, 1, 10, 100, 1000], degree=6)
        lams = [lam for _, lam in result.rows]
        assert all(b < a - 1e-8 for a, b in zip(lams, lams[1:]))
        assert lams[0] == pytest.approx(4.0, abs=1e-4)
        assert lams[-1] < 0.05
        assert result.trend_violations == ()

    def test_uc_c0_equals_guillemin(self):
        Q = build_quadrature(interval01, 3, 2)
        result = sweep_uc(interval01, 0, [0.0], degree=4, Q=Q)
        direct = lambda1_invariant(guillemin(interval01), 4, Q).lambda1T
        assert result.rows[0][1] == direct

    def test_dilation_sweep_grows_and_dominates(self):
        result = sweep_dilation(intervalC, [2, 1.5, 1.1, 1.01], degree=6)
        lams = [lam for _, lam in result.rows]
        base = lambda1_invariant(
            guillemin(intervalC), 6, build_quadrature(intervalC, 3, 2)
        ).lambda1T
        assert all(lam >= base - 1e-6 for lam in lams)
        assert lams[-1] > 5 * lams[0]
        assert result.trend_violations == ()

    def test_dilation_large_s_near_guillemin(self):
        result = sweep_dilation(intervalC, [1000.0], degree=6)
        base = lambda1_invariant(
            guillemin(intervalC), 6, build_quadrature(intervalC, 3, 2)
        ).lambda1T
        assert result.rows[0][1] == pytest.approx(base, rel=0.05)

    def test_square_dilation_increasing(self):
        sq_centered = square.translated((0.5, 0.5))
        result = sweep_dilation(sq_centered, [2, 1.2, 1.05], degree=5, depth=2)
        lams = [lam for _, lam in result.rows]
        assert lams[0] < lams[1] < lams[2]

    def test_csv_deterministic(self):
        a = sweep_uc(interval01, 0, [0, 1, 10], degree=4).to_csv()
        b = sweep_uc(interval01, 0, [0, 1, 10], degree=4).to_csv()
        assert a == b
        assert a.splitlines()[0] == "param,lambda1T,degree,quad_nodes"

    def test_bad_lists_rejected(self):
        with pytest.raises(ValueError):
            sweep_uc(interval01, 0, [10, 1], degree=3)
        with pytest.raises(ValueError):
            sweep_dilation(intervalC, [1.01, 1.5], degree=3)
        with pytest.raises(ValueError):
            sweep_dilation(intervalC, [2.0, 1.0], degree=3)
