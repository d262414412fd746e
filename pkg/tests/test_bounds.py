import numpy as np
import pytest

from qest.bounds import (
    RotWeight,
    SingularOutcomeError,
    UnsupportedDimError,
    anisotropy,
    c_opt_closed,
    c_tomo_closed,
    classical_fisher,
    gm_lower_bound,
    hat_fisher,
    indicatrix_points,
    lu_estimator,
    min_trace_unit_trace,
    optimal_measurement,
    qcr_min_trace,
    qfi_rot_weight,
    rot_weight,
    tomo_excess,
    tomo_excess_forms,
    tomography_fisher,
    tomography_weight,
    weight_from_fisher,
)
from qest.linalg import psd_sqrt
from qest.measurements import (
    Povm,
    outcome_distribution,
    pvm_from_observable,
    qubit_tomography_povm,
    random_povm,
)
from qest.states import ModelDerivatives, PAULIS, SIGMA_3, qubit_qfi, qubit_slds

X0 = np.array([0.55, 0.55, 0.55])
TOMO = qubit_tomography_povm()


def random_point(rng, rmax=0.9):
    x = rng.standard_normal(3)
    return x * (rng.random() * rmax / np.linalg.norm(x))


def random_weight(rng):
    a = rng.standard_normal((3, 3))
    return a @ a.T + np.diag(rng.uniform(0.1, 1.0, size=3))


class TestClassicalFisher:
    def test_tomography_closed_form(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = random_point(rng)
            g = classical_fisher(qubit_slds(x), TOMO)
            assert np.max(np.abs(g - tomography_fisher(x))) <= 1e-12

    def test_single_pvm_at_origin(self):
        g = classical_fisher(qubit_slds([0, 0, 0]), pvm_from_observable(SIGMA_3))
        assert np.allclose(g, np.diag([0.0, 0.0, 1.0]), atol=1e-12)

    def test_unit_trace_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = random_point(rng)
            g = classical_fisher(qubit_slds(x), TOMO)
            val = np.trace(np.linalg.inv(qubit_qfi(x)) @ g)
            assert val == pytest.approx(1.0, abs=1e-10)

    def test_singular_outcome_raises(self):
        # measuring sigma_3 on its eigenstate rho = diag(1-eps, eps) is fine,
        # but a zero-probability outcome with nonzero derivative is not
        derivs = qubit_slds([0.0, 0.0, 0.0])
        zero_op = np.zeros((2, 2), dtype=complex)
        povm = Povm(dim=2, labels=("a", "b"), ops=np.array([np.eye(2), zero_op]))
        bad = ModelDerivatives(rho=derivs.rho, partials=derivs.partials,
                               slds=derivs.slds)
        # replace the zero element by one with nonzero derivative but zero prob:
        # rho = |0><0|, element |1><1| has p = 0 but d(p)/dx1 != 0
        rho = np.diag([1.0, 0.0]).astype(complex)
        proj1 = np.diag([0.0, 1.0]).astype(complex)
        povm = Povm(dim=2, labels=("0", "1"),
                    ops=np.array([np.eye(2) - proj1, proj1]))
        pure = ModelDerivatives(rho=rho, partials=bad.partials, slds=bad.slds)
        with pytest.raises(SingularOutcomeError):
            classical_fisher(pure, povm)


class TestHatFisher:
    def test_identity_case(self):
        j = qubit_qfi([0.3, 0.1, 0.2])
        assert np.allclose(hat_fisher(j, j, np.eye(3)), np.eye(3), atol=1e-10)

    def test_tomography_at_origin(self):
        g = classical_fisher(qubit_slds([0, 0, 0]), TOMO)
        ghat = hat_fisher(g, np.eye(3), np.eye(3))
        assert np.allclose(ghat, np.eye(3) / 3, atol=1e-12)
        assert np.trace(ghat) <= 2 - 1 + 1e-12


class TestQcrMinTrace:
    def test_origin_identity_weight(self):
        sol = qcr_min_trace(np.eye(3), np.eye(3), hilbert_dim=2)
        assert sol.bound == pytest.approx(9.0)
        assert np.allclose(sol.fisher_target, np.eye(3) / 3)
        assert sol.attainable

    def test_fisher_weight_gives_nine(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            j = qubit_qfi(random_point(rng))
            assert qcr_min_trace(j, j).bound == pytest.approx(9.0, abs=1e-10)

    def test_axis_point_identity_weight(self):
        j = qubit_qfi([0, 0, 0.5])
        expected = (2 + np.sqrt(0.75)) ** 2
        assert qcr_min_trace(j, np.eye(3)).bound == pytest.approx(expected, abs=1e-12)


class TestOptimalMeasurement:
    def test_origin_identity_recovers_tomography(self):
        derivs = qubit_slds([0, 0, 0])
        sol = optimal_measurement(derivs, np.eye(3), np.eye(3))
        assert np.allclose(sol.probs, [1 / 3, 1 / 3, 1 / 3])
        rho = np.eye(2) / 2
        assert np.allclose(sorted(outcome_distribution(rho, sol.measurement)),
                           np.full(6, 1 / 6))

    def test_reference_point_special_weight(self):
        derivs = qubit_slds(X0)
        j = qubit_qfi(X0)
        h = tomography_weight(X0)
        sol = optimal_measurement(derivs, j, h)
        tomo_value = np.trace(h @ np.linalg.inv(tomography_fisher(X0)))
        assert sol.bound == pytest.approx(tomo_value, abs=1e-8)
        g = classical_fisher(derivs, sol.measurement)
        assert np.max(np.abs(g - sol.fisher_target)) <= 1e-8

    def test_fisher_target_attained_randomly(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            x = random_point(rng)
            h = random_weight(rng)
            derivs = qubit_slds(x)
            sol = optimal_measurement(derivs, qubit_qfi(x), h)
            g = classical_fisher(derivs, sol.measurement)
            assert np.max(np.abs(g - sol.fisher_target)) <= 1e-8

    def test_submodels(self):
        # restricting to fewer parameters still attains the target
        rng = np.random.default_rng(4)
        x = random_point(rng)
        full = qubit_slds(x)
        for d in (1, 2):
            derivs = ModelDerivatives(rho=full.rho, partials=full.partials[:d],
                                      slds=full.slds[:d])
            j = qubit_qfi(x)[:d, :d]
            a = rng.standard_normal((d, d))
            h = a @ a.T + np.eye(d)
            sol = optimal_measurement(derivs, j, h)
            g = classical_fisher(derivs, sol.measurement)
            assert np.max(np.abs(g - sol.fisher_target)) <= 1e-8

    def test_rejects_higher_dimension(self):
        from qest.measurements import mub_bases
        from qest.states import mub_derivatives
        fam = mub_bases(3)
        coords = np.zeros((4, 2))
        coords[0, 0] = 0.1
        derivs = mub_derivatives(coords, fam)
        from qest.states import model_qfi
        j = model_qfi(derivs)
        with pytest.raises(UnsupportedDimError):
            optimal_measurement(derivs, j, np.eye(8))


class TestLuEstimator:
    def test_covariance_inverts_fisher_at_origin(self):
        derivs = qubit_slds([0, 0, 0])
        est = lu_estimator(np.zeros(3), derivs, TOMO)
        probs = outcome_distribution(derivs.rho, TOMO)
        mean = probs @ est
        assert np.allclose(mean, np.zeros(3), atol=1e-12)
        cov = (est.T * probs) @ est - np.outer(mean, mean)
        assert np.max(np.abs(cov - 3 * np.eye(3))) <= 1e-8

    def test_covariance_general(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            x = random_point(rng)
            derivs = qubit_slds(x)
            g = classical_fisher(derivs, TOMO)
            est = lu_estimator(x, derivs, TOMO, g)
            probs = outcome_distribution(derivs.rho, TOMO)
            mean = probs @ est
            assert np.allclose(mean, x, atol=1e-10)
            cov = (est.T * probs) @ est - np.outer(mean, mean)
            assert np.max(np.abs(cov - np.linalg.inv(g))) <= 1e-8

    def test_single_parameter_variance(self):
        x = np.array([0.0, 0.0, 0.5])
        full = qubit_slds(x)
        derivs = ModelDerivatives(rho=full.rho, partials=full.partials[2:],
                                  slds=full.slds[2:])
        pvm = pvm_from_observable(SIGMA_3)
        g = classical_fisher(derivs, pvm)
        est = lu_estimator(x[2:], derivs, pvm, g)
        probs = outcome_distribution(full.rho, pvm)
        mean = float(probs @ est[:, 0])
        var = float(probs @ (est[:, 0] - mean) ** 2)
        assert var == pytest.approx(0.75, abs=1e-10)


class TestTomographyWeight:
    def test_identity_at_origin(self):
        assert np.allclose(tomography_weight([0, 0, 0]), np.eye(3))

    def test_axis_point(self):
        assert np.allclose(tomography_weight([0.5, 0, 0]),
                           np.diag([1 / 0.75, 1.0, 1.0]))

    def test_reference_entry(self):
        h = tomography_weight(X0)
        assert h[0, 1] == pytest.approx(-0.3025 / 0.6975 ** 2)

    def test_proof_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            x = random_point(rng)
            g = tomography_fisher(x)
            jinv = np.linalg.inv(qubit_qfi(x))
            assert np.max(np.abs(tomography_weight(x) - 9 * g @ jinv @ g)) <= 1e-9


class TestWeightFromFisher:
    def test_tomography_fisher_is_feasible(self):
        x = np.array([0.2, -0.1, 0.4])
        w, feasible = weight_from_fisher(tomography_fisher(x), qubit_qfi(x), k=9.0)
        assert feasible
        assert np.max(np.abs(w - tomography_weight(x))) <= 1e-9

    def test_third_of_fisher_matrix(self):
        x = np.array([0.3, 0.2, -0.1])
        j = qubit_qfi(x)
        w, feasible = weight_from_fisher(j / 3, j, k=9.0)
        assert feasible
        assert np.max(np.abs(w - j)) <= 1e-10

    def test_fisher_matrix_itself_infeasible(self):
        j = qubit_qfi([0.1, 0.1, 0.1])
        _, feasible = weight_from_fisher(j, j)
        assert not feasible


class TestRotationalWeights:
    def test_identity_values(self):
        w = RotWeight(1.0, 1.0)
        assert np.allclose(rot_weight(w, [0.3, 0.2, 0.1]), np.eye(3))

    def test_qfi_values_reproduce_fisher(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            x = random_point(rng)
            r = np.linalg.norm(x)
            assert np.max(np.abs(rot_weight(qfi_rot_weight(r), x) - qubit_qfi(x))) <= 1e-10

    def test_rotation_invariance(self):
        rng = np.random.default_rng(8)
        w = RotWeight(0.7, 2.3)
        x = random_point(rng)
        for _ in range(20):
            u = np.linalg.qr(rng.standard_normal((3, 3)))[0]
            assert np.max(np.abs(u.T @ rot_weight(w, u @ x) @ u
                                 - rot_weight(w, x))) <= 1e-10

    def test_eigenvalues(self):
        w = RotWeight(0.5, 2.0)
        h = rot_weight(w, [0.0, 0.6, 0.0])
        assert np.allclose(sorted(np.linalg.eigvalsh(h)), [0.5, 0.5, 2.0])


class TestClosedForms:
    def test_c_opt_trivial(self):
        assert c_opt_closed(RotWeight(1, 1), 0.0) == pytest.approx(9.0)

    def test_c_opt_fisher_weight_constant(self):
        for r in np.arange(0.0, 0.996, 0.05):
            assert c_opt_closed(qfi_rot_weight(r), r) == pytest.approx(9.0, abs=1e-10)

    def test_limits_near_boundary(self):
        r = 1.0 - 1e-8
        v = np.ones(3) / np.sqrt(3)
        assert 4.0 <= c_opt_closed(RotWeight(1, 1), r) <= 4.01
        assert 5.99 <= c_tomo_closed(RotWeight(1, 1), r * v) <= 6.01

    def test_anisotropy_axis_and_diagonal(self):
        assert anisotropy([0.0, 0.7, 0.0]) == pytest.approx(0.0)
        assert anisotropy([0.4, 0.4, 0.4]) == pytest.approx(2 / 3)
        assert anisotropy([0.4, -0.4, 0.4]) == pytest.approx(2 / 3)

    def test_excess_identities(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            x = random_point(rng, rmax=0.95)
            w = RotWeight(float(rng.uniform(0.1, 3)), float(rng.uniform(0.1, 3)))
            excess = tomo_excess(w, x)
            f1, f2 = tomo_excess_forms(w, x)
            assert excess >= -1e-10
            assert f1 == pytest.approx(f2, abs=1e-8)
            assert f1 == pytest.approx(excess, abs=1e-8)

    def test_excess_fisher_weight_diagonal_direction(self):
        r = 0.8
        x = r * np.ones(3) / np.sqrt(3)
        w = qfi_rot_weight(r)
        assert tomo_excess(w, x) == pytest.approx(2 * r ** 4 / (1 - r ** 2), abs=1e-8)

    def test_matches_bound_any_direction(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            x = random_point(rng, rmax=0.95)
            r = np.linalg.norm(x)
            w = RotWeight(float(rng.uniform(0.2, 2)), float(rng.uniform(0.2, 2)))
            h = rot_weight(w, x)
            assert c_opt_closed(w, r) == pytest.approx(
                qcr_min_trace(qubit_qfi(x), h).bound, abs=1e-8)
            assert c_tomo_closed(w, x) == pytest.approx(
                float(np.trace(h @ np.linalg.inv(tomography_fisher(x)))), abs=1e-8)


class TestGmLowerBound:
    def test_qubit_equals_min_trace(self):
        j = qubit_qfi([0.2, 0.3, -0.1])
        h = np.diag([1.0, 2.0, 3.0])
        assert gm_lower_bound(j, h, 2) == pytest.approx(qcr_min_trace(j, h).bound)

    def test_dim3_fisher_weight(self):
        j = np.eye(8) * 2.0
        assert gm_lower_bound(j, j, 3) == pytest.approx(32.0)

    def test_random_povms_respect_bound(self):
        rng = np.random.default_rng(11)
        x = np.array([0.2, 0.1, 0.3])
        derivs = qubit_slds(x)
        j = qubit_qfi(x)
        h = random_weight(rng)
        bound = gm_lower_bound(j, h, 2)
        for _ in range(30):
            povm = random_povm(2, int(rng.integers(4, 8)), rng)
            g = classical_fisher(derivs, povm)
            if np.linalg.eigvalsh(g)[0] < 1e-9:
                continue
            assert np.trace(h @ np.linalg.inv(g)) >= bound - 1e-8

    def test_random_povms_respect_bound_higher_dims(self):
        from qest.measurements import mub_bases
        from qest.states import model_qfi, mub_derivatives
        rng = np.random.default_rng(12)
        for q in (3, 4):
            fam = mub_bases(q)
            coords = rng.uniform(-0.03, 0.03, size=(q + 1, q - 1))
            derivs = mub_derivatives(coords, fam)
            j = model_qfi(derivs)
            d = j.shape[0]
            a = rng.standard_normal((d, d))
            h = a @ a.T + 0.5 * np.eye(d)
            bound = gm_lower_bound(j, h, q)
            checked = 0
            while checked < 12:
                povm = random_povm(q, int(rng.integers(d + 2, 2 * d + 2)), rng)
                g = classical_fisher(derivs, povm)
                if np.linalg.eigvalsh(g)[0] < 1e-8:
                    continue
                checked += 1
                assert np.trace(h @ np.linalg.inv(g)) >= bound - 1e-6


class TestIndicatrix:
    def test_identity_unit_circle(self):
        pts = indicatrix_points(np.eye(3), plane=(0, 1), n=64)
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)

    def test_diagonal_semi_axes(self):
        pts = indicatrix_points(np.diag([4.0, 1.0, 1.0]), plane=(0, 1), n=4)
        # phi = 0 is the first axis: radius 1/2; phi = pi/2: radius 1
        assert pts[0] == pytest.approx([0.5, 0.0], abs=1e-12)
        assert pts[1] == pytest.approx([0.0, 1.0], abs=1e-12)

    def test_points_satisfy_quadratic_form(self):
        h = tomography_weight([0.5, 0.5, 0.0])
        pts = indicatrix_points(h, plane=(0, 1), n=100)
        for v in pts:
            full = np.array([v[0], v[1], 0.0])
            assert full @ h @ full == pytest.approx(1.0, abs=1e-10)

    def test_tomography_weight_tilted(self):
        # off the axes the locus is an ellipse whose axes are rotated
        h = tomography_weight([0.5, 0.5, 0.0])
        block = h[:2, :2]
        _, vecs = np.linalg.eigh(block)
        principal = vecs[:, 0]
        angle = np.arctan2(principal[1], principal[0]) % (np.pi / 2)
        assert min(angle, np.pi / 2 - angle) > 0.1


class TestUnitTraceMinimum:
    def test_matches_closed_form(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            d = int(rng.integers(2, 4))
            q = np.linalg.qr(rng.standard_normal((d, d)))[0]
            s = q @ np.diag(rng.uniform(0.3, 2.5, size=d)) @ q.T
            s = (s + s.T) / 2
            numeric, g = min_trace_unit_trace(s)
            closed = float(np.trace(psd_sqrt(s))) ** 2
            assert numeric == pytest.approx(closed, abs=1e-5)
            expected_g = psd_sqrt(s) / np.trace(psd_sqrt(s))
            assert np.max(np.abs(g - expected_g)) <= 1e-3
