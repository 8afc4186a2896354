import numpy as np
import pytest
from hypothesis import given, strategies as st

from dagcompact.axioms import (
    ReconstructionError,
    check_cp_axiom,
    check_cp_state_dagger,
    check_identity_tomography,
    check_pure_closure,
    check_normalisation,
    check_pre_duals,
    check_pure_composition,
    check_purification,
    check_sharpness,
    extended_sharp,
    is_pure,
    is_trivial,
    normalize,
    operator_space_dim,
    partial_inner,
    pip,
    pre_dual,
    pure_state_spanning_set,
    reconstruct_dagger_compact,
    sharp_effect,
    spanning_rank,
    stinespring,
)
from dagcompact.dilation import transport
from dagcompact.instances import density_matrix, make_instance, superop_from_choi
from dagcompact.numeric import ScalarKind, Tolerance
from dagcompact.state_dagger import conjugate_transpose, plain_transpose
from dagcompact.theory import I, Sampler, SystemObject, compose, discard_factors, tensor

seeds = st.integers(0, 2**32 - 1)
Q = SystemObject.of(2)
ONE = SystemObject.of(1)
X = np.array([[0, 1], [1, 0]])


def cp_sides(inst, f, g, a, b):
    fm, gm = inst.embed(f, a, b), inst.embed(g, a, b)
    lhs = inst.eq(compose(inst.discard(b), fm), compose(inst.discard(b), gm))
    rhs = np.allclose(np.conj(f.T) @ f, np.conj(g.T) @ g, atol=1e-9)
    return lhs, rhs


def test_normalize_examples(cpmc, rel):
    r, s = normalize(cpmc.state_from_density(np.diag([2.0, 0.0]), Q), cpmc)
    assert r == pytest.approx(2) and cpmc.eq(s, cpmc.state_from_density(np.diag([1.0, 0.0]), Q))
    rho = cpmc.state_from_density(np.diag([0.25, 0.75]), Q)
    r, s = normalize(rho, cpmc)
    assert r == pytest.approx(1) and cpmc.eq(s, rho)
    st_ = rel.embed([[True], [False], [True]], I, SystemObject.of(3))
    assert normalize(st_, rel) == (True, st_)
    assert normalize(cpmc.zero(I, Q), cpmc) == (0.0, None)


def test_is_pure_examples(cpmc):
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    verdict = is_pure(cpmc.embed(h, Q, Q), cpmc)
    assert verdict.pure and verdict.witness is not None
    depol = superop_from_choi(np.eye(4) / 2, Q, Q, ScalarKind.COMPLEX)
    verdict = is_pure(depol, cpmc)
    assert not verdict.pure
    assert verdict.witness.cod == Q @ SystemObject.of(4)
    assert is_pure(cpmc.zero(Q, Q), cpmc).pure


def test_stinespring_dilates(cpmc, rel, rng):
    f = cpmc.sample_morphism(Q, SystemObject.of(3), rng)
    g, e = stinespring(f, cpmc)
    mixed_out = compose(g, cpmc.mixed(Q))
    got = discard_factors(mixed_out, [1], cpmc)
    assert cpmc.eq(got, compose(f, cpmc.mixed(Q)))
    r = rel.embed([[True, False], [True, True]], Q, Q)
    g, e = stinespring(r, rel)
    assert e.dim == 3


@pytest.mark.parametrize("tag", ["cpm-c", "cpm-r", "rel"])
def test_axiom_checks_pass(tag):
    inst = make_instance(tag)
    s = lambda: Sampler(inst, (1, 2, 3), 25, seed=8)  # noqa: E731
    for check in (check_normalisation, check_pure_closure, check_sharpness, check_pure_composition):
        rep = check(inst, s())
        assert rep.passed, rep.to_markdown()


def test_sharp_effect_examples(cpmc):
    e = sharp_effect(cpmc.embed([[1], [0]], I, Q), cpmc)
    assert np.allclose(e.data, [[1, 0, 0, 0]])
    e = sharp_effect(cpmc.embed([[1], [1]] / np.sqrt(2), I, Q), cpmc)
    assert np.allclose(e.data, [[0.5, 0.5, 0.5, 0.5]])
    assert cpmc.eq(sharp_effect(cpmc.id(I), cpmc), cpmc.id(I))
    assert np.allclose(sharp_effect(cpmc.embed([[1]], I, ONE), cpmc).data, [[1]])
    with pytest.raises(ValueError):
        sharp_effect(cpmc.state_from_density(np.diag([2.0, 0.0]), Q), cpmc)
    with pytest.raises(ValueError):
        sharp_effect(cpmc.mixed(Q).scaled(0.5), cpmc)


def test_extended_sharp_examples(cpmc):
    assert cpmc.is_zero(extended_sharp(cpmc.zero(I, Q), cpmc))
    e = extended_sharp(cpmc.embed([[np.sqrt(2)], [0]], I, Q), cpmc)
    assert np.allclose(e.data, [[2, 0, 0, 0]])
    psi = cpmc.embed([[0.6], [0.8j]], I, Q)
    assert cpmc.eq(extended_sharp(psi, cpmc), sharp_effect(psi, cpmc))


def test_pure_composition_examples(cpmc, rng):
    bell = cpmc.embed(np.array([[1], [0], [0], [1]]) / np.sqrt(2), I, Q @ Q)
    zero = cpmc.embed([[1], [0]], I, Q)
    got = partial_inner(bell, zero, Q, cpmc)
    assert np.allclose(density_matrix(got), np.diag([0.5, 0.0]))
    assert is_pure(got, cpmc).pure
    chi = cpmc.sample_pure_causal_state(Q, rng)
    xi = cpmc.sample_pure_causal_state(SystemObject.of(3), rng)
    assert cpmc.eq(partial_inner(tensor(chi, xi), xi, Q, cpmc), chi)
    one = cpmc.embed([[0], [1]], I, Q)
    zz = cpmc.embed([[1], [0], [0], [0]], I, Q @ Q)
    assert cpmc.is_zero(partial_inner(zz, one, Q, cpmc))


def test_pre_dual_examples(cpmc):
    assert np.allclose(pre_dual(ONE, cpmc).data, [[1]])
    omega = pre_dual(Q, cpmc)
    assert cpmc.eq(discard_factors(omega, [1], cpmc), cpmc.mixed(Q))
    assert cpmc.eq(discard_factors(omega, [0], cpmc), cpmc.mixed(Q.dual()))
    assert compose(cpmc.discard(Q @ Q.dual()), omega).value() == pytest.approx(2)


def test_identity_tomography_examples(cpmc, cpmr):
    assert check_identity_tomography(cpmc, cpmc.id(Q))
    assert not check_identity_tomography(cpmc, cpmc.embed(X, Q, Q))
    assert len(pure_state_spanning_set(Q, cpmr)) == 3
    assert spanning_rank(Q, cpmr) == 3 == operator_space_dim(Q, cpmr)
    for d in (1, 2, 3, 4):
        a = SystemObject.of(d)
        assert spanning_rank(a, cpmc) == d * d
        assert spanning_rank(a, cpmr) == d * (d + 1) // 2


def test_identity_tomography_rejects_non_endomorphism(cpmc):
    with pytest.raises(ValueError):
        check_identity_tomography(cpmc, cpmc.zero(Q, ONE))


@pytest.mark.parametrize("tag", ["cpm-c", "cpm-r"])
def test_pre_duals_and_purification_checks(tag):
    inst = make_instance(tag)
    objs = [SystemObject.of(d) for d in (1, 2, 3, 4)]
    assert check_pre_duals(inst, objs).passed
    assert check_purification(inst, Sampler(inst, (1, 2, 3, 4), 30, seed=1)).passed


def test_cp_axiom_examples(cpmc, rng):
    one = np.eye(2)
    assert cp_sides(cpmc, one, X, Q, Q) == (True, True)
    assert cp_sides(cpmc, one, np.diag([1.0, 0.0]), Q, Q) == (False, False)
    f = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    u, _ = cpmc.sample_unitary(Q, rng)
    assert cp_sides(cpmc, f, u @ f, Q, Q) == (True, True)


def test_cp_axiom_check(cpmc, cpmr):
    for inst in (cpmc, cpmr):
        rep = check_cp_axiom(inst, Sampler(inst, (2, 3), 30, seed=2))
        assert rep.passed
        assert rep.get("positive_cases").cases == 10 and rep.get("negative_cases").cases == 20


def test_cp_state_dagger_examples(cpmc):
    sd = conjugate_transpose(cpmc)
    bell = cpmc.embed(np.array([[1], [0], [0], [1]]) / np.sqrt(2), I, Q @ Q)
    flipped = transport(bell, X, Q, cpmc)
    assert cpmc.eq(discard_factors(bell, [1], cpmc), discard_factors(flipped, [1], cpmc))
    assert cpmc.eq(pip(bell, Q, sd), pip(flipped, Q, sd))
    s00 = cpmc.embed([[1], [0], [0], [0]], I, Q @ Q)
    s10 = cpmc.embed([[0], [0], [1], [0]], I, Q @ Q)
    assert not cpmc.eq(discard_factors(s00, [1], cpmc), discard_factors(s10, [1], cpmc))
    assert not cpmc.eq(pip(s00, Q, sd), pip(s10, Q, sd))


def test_cp_state_dagger_check_and_negative_control(cpmc):
    s = lambda: Sampler(cpmc, (2, 3), 30, seed=4)  # noqa: E731
    assert check_cp_state_dagger(conjugate_transpose(cpmc), cpmc, s()).passed
    rep = check_cp_state_dagger(plain_transpose(cpmc), cpmc, s())
    bad = rep.get("marginal_iff_pip")
    assert bad.status == "fail" and bad.counterexample is not None
    assert set(bad.counterexample["morphisms"]) == {"psi", "phi"}


def test_is_trivial_examples(cpmc, rel):
    assert is_trivial(I, cpmc)
    assert not is_trivial(Q, cpmc)
    assert is_trivial(ONE, rel)
    assert not is_trivial(Q, rel)


def test_reconstruction_small(cpmc):
    res = reconstruct_dagger_compact(cpmc, dims=(2,), cases=8, seed=0)
    assert res.passed and res.residual < 1e-9
    f = cpmc.sample_morphism(Q, Q, np.random.default_rng(0))
    assert cpmc.eq(res.dagger(f), cpmc.morphism(np.conj(f.data).T, Q, Q))


def test_reconstruction_dimension_one(cpmr):
    res = reconstruct_dagger_compact(cpmr, dims=(1,), cases=5, seed=0, tensor_dims=(1,))
    assert res.passed
    s = cpmr.scalar_embed(3.0)
    assert cpmr.eq(res.dagger(s), s)


def test_reconstruction_reports_failing_stage():
    strict = make_instance("cpm-c", Tolerance(0.0, 0.0))
    with pytest.raises(ReconstructionError) as info:
        reconstruct_dagger_compact(strict, dims=(2,), cases=5)
    err = info.value
    assert err.result.reports and not err.result.reports[-1].passed
    assert err.result.dagger is None


def test_reconstruction_rejects_non_cpm(matc):
    with pytest.raises(TypeError):
        reconstruct_dagger_compact(matc, dims=(2,), cases=2)


@given(seeds, st.sampled_from(["cpm-c", "cpm-r"]))
def test_normalisation_unique(seed, tag):
    inst = make_instance(tag)
    rng = np.random.default_rng(seed)
    a = SystemObject.of(int(rng.integers(1, 4)))
    sigma = inst.sample_state(a, rng)
    r = float(rng.uniform(0.1, 5))
    r2, s2 = normalize(sigma.scaled(r), inst)
    assert r2 == pytest.approx(r) and inst.eq(s2, sigma)


@given(seeds, st.sampled_from(["cpm-c", "cpm-r"]))
def test_sharp_effect_composite_is_one(seed, tag):
    inst = make_instance(tag)
    rng = np.random.default_rng(seed)
    a = SystemObject.of(int(rng.integers(1, 5)))
    psi = inst.sample_pure_causal_state(a, rng)
    e = sharp_effect(psi, inst)
    assert abs(compose(e, psi).value() - 1) < 1e-10
    assert inst.eq(compose(e, inst.mixed(a)), inst.id(I))
