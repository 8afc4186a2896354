import numpy as np
import pytest
from hypothesis import given, strategies as st

from dagcompact.instances import make_instance, oracle_adjoint
from dagcompact.state_dagger import (
    check_state_dagger,
    check_state_dagger_dual,
    codomain_side,
    conjugate_transpose,
    derive_dagger,
    derive_global_dagger,
    dual_independence,
    plain_transpose,
    standard_duals,
)
from dagcompact.theory import I, Morphism, Sampler, SystemObject, compose, standard_dual, tensor, transformed_dual

seeds = st.integers(0, 2**32 - 1)
Q = SystemObject.of(2)


def twisted_duals(inst, theta):
    def duals(a):
        phases = np.exp(1j * theta * np.arange(a.dim))
        q = inst.embed(np.diag(phases), a.dual(), a.dual())
        q_inv = inst.embed(np.diag(phases.conj()), a.dual(), a.dual())
        return transformed_dual(standard_dual(a, inst), q, q_inv, inst)

    return duals


def permuted_duals(inst, seed):
    rng = np.random.default_rng(seed)
    cache = {}

    def duals(a):
        if a not in cache:
            q = inst.sample_invertible(a.dual(), rng)
            cache[a] = transformed_dual(standard_dual(a, inst), q, oracle_adjoint(inst, q), inst)
        return cache[a]

    return duals


@pytest.mark.parametrize("tag", ["matc", "matr", "rel", "cpm-c"])
def test_conjugate_transpose_is_a_state_dagger(tag):
    inst = make_instance(tag)
    rep = check_state_dagger(conjugate_transpose(inst), inst, Sampler(inst, (1, 2, 3), 25, seed=3))
    assert rep.passed
    if tag == "rel":
        assert rep.max_residual == 0


def test_plain_transpose_satisfies_state_dagger_laws(matc):
    # the laws never force antilinearity: the transpose passes them over C as well
    sd = plain_transpose(matc)
    assert check_state_dagger(sd, matc, Sampler(matc, (1, 2, 3), 25, seed=3)).passed
    one = SystemObject.of(1)
    psi = matc.embed([[1j]], I, one)
    phi = matc.embed([[1]], I, one)
    lhs = sd(compose(sd(phi), psi))
    rhs = compose(sd(psi), phi)
    assert matc.eq(lhs, rhs) and lhs.data[0, 0] == 1j


def test_state_dagger_dual_examples(matc, rel):
    sd = conjugate_transpose(matc)
    assert check_state_dagger_dual(sd, standard_dual(Q, matc), matc)
    d = standard_dual(Q, matc)
    cup = matc.embed(np.array([[1], [0], [0], [np.exp(0.4j)]]), I, Q.dual() @ Q)
    bad = type(d)(d.obj, d.dual, cup, d.cap)
    assert not check_state_dagger_dual(sd, bad, matc)
    assert check_state_dagger_dual(conjugate_transpose(rel), standard_dual(Q, rel), rel)


def test_twisted_duals_separate_transpose_from_adjoint(matc):
    duals = twisted_duals(matc, 0.9)
    d = duals(SystemObject.of(3))
    assert check_state_dagger_dual(conjugate_transpose(matc), d, matc)
    assert not check_state_dagger_dual(plain_transpose(matc), d, matc)


def test_derive_dagger_examples(matc, rel):
    sd = conjugate_transpose(matc)
    duals = standard_duals(matc)
    assert matc.eq(derive_dagger(matc.id(Q), sd, duals, matc), matc.id(Q))
    f = matc.embed([[0, 1], [0, 0]], Q, Q)
    assert np.array_equal(derive_dagger(f, sd, duals, matc).data, [[0, 0], [1, 0]])
    # a1 -> b2 and a2 -> b2
    r = rel.embed([[False, False], [True, True]], Q, Q)
    got = derive_dagger(r, conjugate_transpose(rel), standard_duals(rel), rel)
    assert got.data.tolist() == [[False, True], [False, True]]


@pytest.mark.parametrize("tag,dims", [("matc", (1, 2, 3)), ("rel", (1, 2)), ("cpm-c", (1, 2))])
def test_derive_global_dagger_matches_oracle(tag, dims):
    inst = make_instance(tag)
    sd = conjugate_transpose(inst)
    _, rep = derive_global_dagger(sd, standard_duals(inst), inst, Sampler(inst, dims, 20, seed=1), lambda f: oracle_adjoint(inst, f))
    assert rep.passed
    assert rep.get("oracle").cases > 0


def test_cpm_state_dagger_is_expectation(cpmc, rng):
    rho = cpmc.sample_state(Q, rng)
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    r = rho.data.reshape(2, 2)
    eff = conjugate_transpose(cpmc)(rho)
    assert abs((eff.data @ x.reshape(-1))[0] - np.trace(r @ x)) < 1e-12


def test_twisted_duals_break_transpose_derivation(matc):
    sd = plain_transpose(matc)
    s = Sampler(matc, (2, 3), 10, seed=4)
    _, rep = derive_global_dagger(sd, twisted_duals(matc, 0.9), matc, s)
    assert rep.get("state_dagger_duals").status == "fail"
    assert rep.get("state_dagger_duals").counterexample is not None


def test_codomain_side(matc, rng):
    sd = conjugate_transpose(matc)
    duals = standard_duals(matc)
    f = matc.sample_morphism(Q, SystemObject.of(3), rng)
    lhs, rhs = codomain_side(f, derive_dagger(f, sd, duals, matc), sd, duals(f.cod), matc)
    assert matc.eq(lhs, rhs)


def test_non_state_rejected(matc):
    with pytest.raises(ValueError):
        conjugate_transpose(matc)(matc.id(Q))


@given(seeds, st.sampled_from(["matc", "matr", "rel", "cpm-c"]))
def test_dual_choice_independence(seed, tag):
    inst = make_instance(tag)
    s = Sampler(inst, (1, 2, 3) if tag != "cpm-c" else (1, 2), 5, seed)
    rep = dual_independence(conjugate_transpose(inst), standard_duals(inst), permuted_duals(inst, seed), inst, list(s.morphisms()))
    assert rep.passed


@given(seeds, st.sampled_from(["matc", "cpm-r"]))
def test_derived_dagger_is_a_dagger(seed, tag):
    inst = make_instance(tag)
    sd = conjugate_transpose(inst)
    duals = standard_duals(inst)
    dg = lambda f: derive_dagger(f, sd, duals, inst)  # noqa: E731
    rng = np.random.default_rng(seed)
    a, b, c = (SystemObject.of(int(d)) for d in rng.integers(1, 3, size=3))
    f, g = inst.sample_morphism(a, b, rng), inst.sample_morphism(b, c, rng)
    h = inst.sample_morphism(c, a, rng)
    assert inst.eq(dg(dg(f)), f)
    assert inst.eq(dg(compose(g, f)), compose(dg(f), dg(g)))
    assert inst.eq(dg(tensor(f, h)), tensor(dg(f), dg(h)))
    psi = inst.sample_state(a, rng)
    assert inst.eq(dg(psi), sd(psi))
    sw = inst.swap(a, b)
    assert inst.eq(dg(sw), inst.swap(b, a))


def test_counterexample_round_trip_re_fails(matc):
    # a failing report's serialized witnesses still fail when the law is recomputed
    from dagcompact.report import load_reports, reports_to_json
    from dagcompact.state_dagger import state_dagger_dual_residual

    sd = plain_transpose(matc)
    duals = twisted_duals(matc, 0.9)
    _, rep = derive_global_dagger(sd, duals, matc, Sampler(matc, (2,), 3, seed=0))
    back = load_reports(reports_to_json([rep]))[0]
    cex = back.get("state_dagger_duals").counterexample["morphisms"]
    cup, cap = Morphism.from_dict(cex["cup"]), Morphism.from_dict(cex["cap"])
    d = type(duals(Q))(Q, Q.dual(), cup, cap)
    assert not check_state_dagger_dual(sd, d, matc)
    assert state_dagger_dual_residual(sd, d, matc) > 0.1
