import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opfree.algebra import BlockMatrix, cond_exp_n, extended_reshape, op_norm
from opfree.cumulants import Word, moment_fn_pi
from opfree.limits import DiagonalProfile, MixedWord
from opfree.matmodel import (
    EntryModel,
    ExactMoment,
    FiniteDiagonal,
    PureMomentOracle,
    SweepRow,
    convergence_sweep,
    cpm_rhs_unnormalized,
    decay_violations,
    empirical_mixed_moment,
    entry_expectation,
    exact_moment,
    realize_diagonal,
    sample_matrix,
    trial_rng,
    tuple_expectation,
    verify_matrix_cpm,
)
from opfree.partitions import enumerate_class, has_property_p, kreweras

from _oracles import exhaustive_moment, quadrature_moment, random_complex, random_herm

TRIVIAL = FiniteDiagonal(DiagonalProfile.trivial(1))


def scalar_models(kind="circle", symbols=("1", "2")):
    return {s: EntryModel.scalar(s, kind) for s in symbols}


def k2_setting(rng, kind="circle"):
    models = {
        "1": EntryModel("1", (random_herm(rng, 2), random_herm(rng, 2)), kind),
        "2": EntryModel("2", (random_herm(rng, 2),), kind),
    }
    prof = DiagonalProfile([0.5, 0.5], {"a": [random_herm(rng, 2), random_herm(rng, 2)]}, dim=2)
    return models, FiniteDiagonal(prof)


def rel_err(a, b):
    return op_norm(a - b) / max(1.0, op_norm(b))


# -- entry models --------------------------------------------------------


@pytest.mark.parametrize("kind", ["circle", "gaussian_hermitian"])
def test_pure_moments_match_quadrature(kind):
    oracle = PureMomentOracle.for_kind(kind)
    assert oracle("+") == 0 and oracle("+-") == 1 and oracle("-+") == 1
    for p in range(5):
        for q in range(5):
            pattern = "+" * p + "-" * q
            assert oracle(pattern) == pytest.approx(quadrature_moment(kind, False, p, q), abs=1e-12)
        assert oracle("+" * p, diagonal=True) == pytest.approx(quadrature_moment(kind, True, p, 0), abs=1e-12)


def test_entry_model_validation(rng):
    with pytest.raises(ValueError):
        EntryModel("1", (random_complex(rng, 2),))
    with pytest.raises(ValueError):
        EntryModel("1", (np.eye(1),), "uniform")
    with pytest.raises(ValueError):
        EntryModel("1", ())
    lam = random_herm(rng, 2)
    model = EntryModel("1", (lam, 2 * lam))
    b = random_complex(rng, 2)
    assert np.allclose(model.eta(b), lam @ b @ lam + 4 * lam @ b @ lam)
    assert model.norm_bound(3) == pytest.approx((3 * op_norm(lam)) ** 3)
    assert EntryModel("1", (lam,), "gaussian_hermitian").norm_bound(3) is None


@pytest.mark.parametrize("kind", ["circle", "gaussian_hermitian"])
def test_sample_is_selfadjoint(rng, kind):
    model = EntryModel("1", (random_herm(rng, 2), random_herm(rng, 2)), kind)
    y = sample_matrix(model, 7, rng)
    assert y.is_selfadjoint(0.0)
    a = extended_reshape(y, 7)
    assert a.is_selfadjoint(0.0)


def test_sample_reproducible():
    model = EntryModel.scalar("1")
    assert np.array_equal(sample_matrix(model, 5, 3).data, sample_matrix(model, 5, 3).data)
    assert np.array_equal(sample_matrix(model, 5, trial_rng(1, 2, 0)).data, sample_matrix(model, 5, trial_rng(1, 2, 0)).data)
    assert not np.array_equal(sample_matrix(model, 5, trial_rng(1, 2, 0)).data, sample_matrix(model, 5, trial_rng(1, 2, 1)).data)


def test_circle_entries_are_bounded(rng):
    y = sample_matrix(EntryModel.scalar("1", "circle"), 12, rng)
    assert np.allclose(np.abs(y.data) * math.sqrt(12), 1.0)


def test_sample_mean_of_trace(rng):
    n, trials = 50, 1000
    model = EntryModel.scalar("1", "gaussian_hermitian")
    vals = [cond_exp_n(sample_matrix(model, n, rng))[0, 0] for _ in range(trials)]
    assert abs(np.mean(vals)) < 3 * 4 / math.sqrt(trials * n)


def test_sample_second_moment_is_eta(rng):
    n, trials = 20, 400
    model = EntryModel("1", (random_herm(rng, 2),), "circle")
    b = random_herm(rng, 2)
    B = BlockMatrix.scalar(b, n)
    vals = np.array([cond_exp_n(y @ B @ y) for y in (sample_matrix(model, n, rng) for _ in range(trials))])
    mean, se = vals.mean(0), vals.std(0, ddof=1) / math.sqrt(trials)
    assert np.all(np.abs(mean - model.eta(b)) <= 3 * se + 1e-12 + 2.0 / n)


# -- diagonal realization ------------------------------------------------


def test_realize_diagonal_examples(rng):
    f = random_herm(rng, 2)
    single = FiniteDiagonal(DiagonalProfile([1.0], {"t": [f]}, dim=2))
    assert np.array_equal(realize_diagonal(single, "t", 3).data, np.kron(np.eye(3), f))
    b1, b2 = random_herm(rng, 2), random_herm(rng, 2)
    two = FiniteDiagonal(DiagonalProfile([0.5, 0.5], {"t": [b1, b2]}, dim=2))
    d = realize_diagonal(two, "t", 4)
    for i, b in enumerate([b1, b1, b2, b2]):
        assert np.array_equal(d.block(i, i), b)
    with pytest.raises(ValueError):
        realize_diagonal(FiniteDiagonal(DiagonalProfile([0.2, 0.3, 0.5], {}, dim=1)), None, 2)


@given(st.integers(0, 2**32 - 1), st.integers(3, 60))
def test_realized_diagonal_mean_bound(seed, n):
    rng = np.random.default_rng(seed)
    w = rng.random(3) + 0.1
    vals = [random_herm(rng, 2) for _ in range(3)]
    prof = DiagonalProfile(w / w.sum(), {"t": vals}, dim=2)
    d = FiniteDiagonal(prof)
    assert sum(d.step_sizes(n)) == n
    dev = op_norm(cond_exp_n(realize_diagonal(d, "t", n)) - prof.mean(prof.step_values("t")))
    assert dev <= max(op_norm(v) for v in vals) * 3 / n + 1e-12


# -- exact engine --------------------------------------------------------


def test_exact_small_values():
    for kind in ("circle", "gaussian_hermitian"):
        models = scalar_models(kind)
        for n in (1, 2, 5, 9):
            assert exact_moment(MixedWord.alternating(["1", "1"]), models, TRIVIAL, n)[0, 0] == pytest.approx(1.0)
    gue, circ = scalar_models("gaussian_hermitian"), scalar_models("circle")
    y4 = MixedWord.alternating(["1"] * 4)
    for n in (3, 4, 10):
        assert exact_moment(y4, gue, TRIVIAL, n)[0, 0] == pytest.approx(2 + 1 / n**2)
        assert exact_moment(y4, circ, TRIVIAL, n)[0, 0] == pytest.approx(2 - 1 / n)
        mixed = exact_moment(MixedWord.alternating(["1", "2", "1", "2"]), gue, TRIVIAL, n)[0, 0]
        assert mixed == pytest.approx(1 / n**2)


@pytest.mark.parametrize("kind", ["circle", "gaussian_hermitian"])
@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_exact_matches_exhaustive_k2(rng, kind, m):
    models, diag = k2_setting(rng, kind)
    syms = tuple(rng.choice(["1", "2"], size=m))
    dg = tuple(rng.choice(["a", None]) for _ in range(m + 1))
    w = MixedWord(dg, syms, [random_complex(rng, 2) / 2 for _ in range(2 * m + 2)])
    engine = ExactMoment(w, models, diag)
    for n in (2, 3):
        assert rel_err(engine.at(n), exhaustive_moment(w, models, diag, n)) < 1e-12


def test_exact_is_zero_off_property_p(rng):
    models, diag = k2_setting(rng)
    for m in (2, 3, 4):
        w = MixedWord(("a",) * (m + 1), ("1",) * m, [random_complex(rng, 2) for _ in range(2 * m + 2)])
        engine = ExactMoment(w, models, diag)
        for sigma in enumerate_class(m + 1, "closed"):
            if not has_property_p(sigma):
                assert np.all(engine.sigma_contribution(sigma, 6) == 0)
        # and the property-P kernels reassemble the moment
        total = sum(engine.sigma_contribution(s, 6) for s in engine.kernels())
        assert rel_err(total, engine.at(6)) < 1e-13


def test_exact_engine_errors():
    models = scalar_models()
    with pytest.raises(ValueError):
        ExactMoment(MixedWord.alternating(["1"] * 10), models, TRIVIAL)
    with pytest.raises(KeyError):
        ExactMoment(MixedWord.alternating(["3", "3"]), models, TRIVIAL)
    with pytest.raises(ValueError):
        ExactMoment(MixedWord.alternating(["1", "1"]), models, TRIVIAL, law="free")


@pytest.mark.parametrize("m", [2, 4, 6])
def test_recursive_moment_factorization(rng, m):
    k, n = 2, 2 * m + 2
    models, diag = k2_setting(rng)
    for pi in enumerate_class(m, "nc_pair"):
        sigma = kreweras(pi, "OK")
        idx = list(sigma.labels)
        syms = tuple(rng.choice(["1", "2"], size=m))
        w = MixedWord((None,) * (m + 1), syms, [random_complex(rng, k) for _ in range(2 * m + 2)])
        direct = tuple_expectation(idx, w, models, diag, n)
        entries = tuple((idx[p], idx[p + 1], syms[p]) for p in range(m))
        c = w.full_constants(k)
        merged = [c[0] @ c[1]] + [c[2 * p + 2] @ c[2 * p + 3] for p in range(m)]
        oracle = lambda letters, consts: entry_expectation(letters, consts, models, n)  # noqa: E731
        nested = moment_fn_pi(pi, Word(entries, merged), oracle)
        assert rel_err(nested, direct) < 1e-12


@pytest.mark.parametrize("m", [2, 4, 6])
def test_boolean_nonvanishing_filter(m):
    models = scalar_models(symbols=("1",))
    w = MixedWord.alternating(["1"] * m)
    for pi in enumerate_class(m, "nc_pair"):
        idx = list(kreweras(pi, "OK").labels)
        val = tuple_expectation(idx, w, models, TRIVIAL, m + 2, law="boolean")[0, 0]
        if pi.is_interval():
            assert val != 0
        else:
            assert val == 0


def test_boolean_exact_engine_limit():
    models = scalar_models()
    for r in (1, 2, 3):
        w = MixedWord.alternating(["1"] * (2 * r))
        assert exact_moment(w, models, TRIVIAL, 50, law="boolean")[0, 0] == pytest.approx(1.0)
    w = MixedWord.alternating(["1", "2", "2", "1"])
    # the separated outer letters form runs of length one
    assert all(exact_moment(w, models, TRIVIAL, n, law="boolean")[0, 0] == 0 for n in (8, 16, 32))


# -- Monte Carlo ---------------------------------------------------------


def test_empirical_first_moment_and_d_only(rng):
    models = scalar_models()
    mean, se = empirical_mixed_moment(MixedWord.alternating(["1"]), models, TRIVIAL, 20, 200, 1)
    assert np.all(np.abs(mean) <= 3 * np.abs(se) + 1e-12)
    prof = DiagonalProfile([0.5, 0.5], {"a": [np.eye(1), 3 * np.eye(1)]})
    mean, se = empirical_mixed_moment(MixedWord(("a",), ()), models, FiniteDiagonal(prof), 10, 5, 0)
    assert mean[0, 0] == pytest.approx(2.0) and np.all(se == 0)
    with pytest.raises(ValueError):
        empirical_mixed_moment(MixedWord.alternating(["1"]), models, TRIVIAL, 4, 1, 0)


def test_empirical_fourth_moment():
    n = 100
    mean, se = empirical_mixed_moment(MixedWord.alternating(["1"] * 4), scalar_models(), TRIVIAL, n, 2000, 7)
    assert abs(mean[0, 0] - 2) < 3 * abs(se[0, 0]) + 10 / n


def test_empirical_is_replayable():
    w = MixedWord.alternating(["1", "2", "2", "1"])
    a = empirical_mixed_moment(w, scalar_models(), TRIVIAL, 8, 10, 3)
    b = empirical_mixed_moment(w, scalar_models(), TRIVIAL, 8, 10, 3)
    assert np.array_equal(a[0], b[0])


@settings(max_examples=8)
@given(st.integers(0, 2**32 - 1))
def test_empirical_matches_exact_statistically(seed):
    rng = np.random.default_rng(seed)
    models, diag = k2_setting(rng)
    w = MixedWord(("a", None, "a"), ("1", "1"), [random_complex(rng, 2) for _ in range(6)])
    mean, se = empirical_mixed_moment(w, models, diag, 12, 400, seed)
    ref = exact_moment(w, models, diag, 12)
    z = np.maximum(np.abs((mean - ref).real) / np.maximum(se.real, 1e-15),
                   np.abs((mean - ref).imag) / np.maximum(se.imag, 1e-15))
    assert np.all(z < 5)


# -- sweeps --------------------------------------------------------------


def test_convergence_sweep_modes():
    models = scalar_models()
    w = MixedWord.alternating(["1"] * 4)
    rows = convergence_sweep(w, models, TRIVIAL, [8, 16, 32], "exact")
    assert [r.n for r in rows] == [8, 16, 32]
    assert rows[0].deviation_norm == pytest.approx(1 / 8)
    assert not decay_violations(rows)
    both = convergence_sweep(w, models, TRIVIAL, [8, 16], "both", trials=5)
    assert len(both) == 4 and {r.mode for r in both} == {"exact", "mc"}
    assert all(r.stderr_norm > 0 for r in both if r.mode == "mc")
    with pytest.raises(ValueError):
        convergence_sweep(w, models, TRIVIAL, [16, 8])
    with pytest.raises(ValueError):
        convergence_sweep(w, models, TRIVIAL, [8], "mc", law="boolean")


def test_decay_violations():
    rows = [SweepRow("a", 8, "exact", 1.0, 0, 0), SweepRow("a", 16, "exact", 0.9, 0, 0),
            SweepRow("b", 8, "exact", 1e-13, 0, 0), SweepRow("b", 16, "exact", 1e-13, 0, 0),
            SweepRow("c", 8, "mc", 1.0, 0, 0), SweepRow("c", 16, "mc", 2.0, 0, 0)]
    assert decay_violations(rows) == [("a", 8, 16, 1.0, 0.9)]


def test_d_only_sweep_respects_remainder_bound():
    prof = DiagonalProfile([1 / 3, 2 / 3], {"a": [np.eye(1), -np.eye(1)]})
    diag = FiniteDiagonal(prof)
    rows = convergence_sweep(MixedWord(("a",), ()), scalar_models(), diag, [8, 16, 32, 64])
    for r in rows:
        assert r.deviation_norm <= 2 / r.n + 1e-12


# -- extended model ------------------------------------------------------


@pytest.mark.parametrize("N,K", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_matrix_cpm(rng, N, K):
    model = EntryModel("1", (random_herm(rng, 2), random_herm(rng, 2)))
    b = rng.standard_normal((N, N, 2, 2)) + 1j * rng.standard_normal((N, N, 2, 2))
    _, expected, dev = verify_matrix_cpm(model, N, K, b)
    assert dev < 1e-12
    # the unnormalized trace overshoots by exactly N
    assert np.allclose(cpm_rhs_unnormalized(model, N, K, b).data, N * expected.data)


def test_matrix_cpm_special_inputs(rng):
    model = EntryModel.scalar("1")
    N, K = 3, 2
    eye = BlockMatrix.identity(N, 1)
    computed, expected, dev = verify_matrix_cpm(model, N, K, eye)
    assert dev < 1e-12 and np.allclose(expected.data, np.eye(N) / K)
    off = rng.standard_normal((N, N, 1, 1)).astype(complex)
    off[np.arange(N), np.arange(N)] = 0
    computed, expected, dev = verify_matrix_cpm(model, N, K, off)
    assert np.allclose(expected.data, 0) and dev < 1e-12


def test_matrix_cpm_against_sampling(rng):
    # E_{N,1}[A(0,1) b A(1,0)] estimated from samples of the size-KN model
    model, N, K, trials = EntryModel.scalar("1"), 2, 2, 3000
    b = rng.standard_normal((N, N, 1, 1)) + 0j
    bf = BlockMatrix.from_blocks(b).data
    acc = np.zeros((N, N), dtype=complex)
    for _ in range(trials):
        a = extended_reshape(sample_matrix(model, N * K, rng), N)
        acc += a.block(0, 1) @ bf @ a.block(1, 0)
    _, expected, _ = verify_matrix_cpm(model, N, K, b)
    assert np.allclose(acc / trials, expected.data, atol=0.05)


def test_tuple_expectation_length_check():
    with pytest.raises(ValueError):
        tuple_expectation([0, 1], MixedWord.alternating(["1", "1"]), scalar_models(), TRIVIAL, 3)


def test_exhaustive_oracle_sanity():
    # the test-side oracle agrees with hand values for Y^2 and Y^4
    models = scalar_models("gaussian_hermitian")
    assert exhaustive_moment(MixedWord.alternating(["1", "1"]), models, TRIVIAL, 3)[0, 0] == pytest.approx(1)
    assert exhaustive_moment(MixedWord.alternating(["1"] * 4), models, TRIVIAL, 3)[0, 0] == pytest.approx(2 + 1 / 9)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("m", range(5))
def test_blockwise_trace_matches_dense_product(rng, k, m):
    from opfree.matmodel.montecarlo import _word_trace

    n = 5
    Ys = [random_complex(rng, n * k) for _ in range(m)]
    V = [rng.standard_normal((n, k, k)) + 0j for _ in range(m + 1)]

    def flat(v):
        return BlockMatrix.from_blocks(np.einsum("iab,ij->ijab", v, np.eye(n))).data

    prod = flat(V[0])
    for Y, v in zip(Ys, V[1:]):
        prod = prod @ Y @ flat(v)
    assert np.allclose(_word_trace(V, Ys, n, k), cond_exp_n(BlockMatrix(prod, k)), atol=1e-12)
