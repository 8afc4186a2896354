import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dagcompact.axioms import sharp_effect
from dagcompact.instances import make_instance, oracle_adjoint
from dagcompact.kernels import (
    check_kernel_composition,
    check_kernel_universal,
    check_predual_from_purification,
    check_pure_exclusion,
    check_sharp_from_kernels,
    check_split_kernels,
    check_zero_propagation,
    cokernel,
    kernel,
    pure_exclusion_witness,
    same_subobject,
    sharp_from_kernels,
)
from dagcompact.theory import I, Sampler, SystemObject, compose

seeds = st.integers(0, 2**32 - 1)
Q = SystemObject.of(2)


def brute_kernel_points(f):
    """Largest subset of the domain that f sends nowhere, by subset enumeration."""
    best = ()
    for r in range(f.dom.dim + 1):
        for s in itertools.combinations(range(f.dom.dim), r):
            if not f.data[:, list(s)].any():
                best = s
    return set(best)


def test_rel_kernel_example(rel):
    f = rel.embed([[True, False], [False, False]], Q, Q)  # a1 -> b1
    kp = kernel(f, rel)
    assert kp.carrier.dim == 1 and kp.inclusion.data[:, 0].tolist() == [False, True]
    assert check_kernel_universal(f, kp, rel).passed


def test_cpm_kernel_example(cpmc):
    f = cpmc.embed(np.diag([1.0, 0.0]), Q, Q)
    kp = kernel(f, cpmc)
    assert kp.carrier.dim == 1
    assert np.allclose(np.abs(kp.basis[:, 0]), [0, 1])
    assert check_kernel_universal(f, kp, cpmc, Sampler(cpmc, (1, 2, 3), 15)).passed


def test_empty_kernel(cpmc, rel):
    u, lift = cpmc.sample_unitary(Q, np.random.default_rng(0))
    kp = kernel(lift, cpmc)
    assert kp.empty and kp.carrier.dim == 1 and cpmc.is_zero(kp.inclusion)
    assert check_kernel_universal(lift, kp, cpmc, Sampler(cpmc, (1, 2), 10)).passed
    kp = kernel(rel.id(Q), rel)
    assert kp.empty and check_kernel_universal(rel.id(Q), kp, rel).passed


def test_cokernel_example(cpmc, rel):
    f = cpmc.embed(np.array([[1.0], [0.0]]), SystemObject.of(1), Q)
    ck = cokernel(f, cpmc)
    assert np.allclose(np.abs(ck.basis[:, 0]), [0, 1])
    assert cpmc.is_zero(compose(ck.partner, f))
    r = rel.embed([[True], [False], [False]], SystemObject.of(1), SystemObject.of(3))
    ck = cokernel(r, rel)
    assert ck.carrier.dim == 2 and rel.is_zero(compose(ck.partner, r))


def test_kernels_need_rel_or_cpm(matc):
    with pytest.raises(TypeError):
        kernel(matc.id(Q), matc)
    with pytest.raises(TypeError):
        cokernel(matc.id(Q), matc)


def test_rel_kernels_match_brute_force(rel):
    for da in (1, 2, 3):
        for db in (1, 2, 3):
            a, b = SystemObject.of(da), SystemObject.of(db)
            for f in rel.enumerate_morphisms(a, b):
                kp = kernel(f, rel)
                got = set() if kp.empty else set(np.nonzero(kp.inclusion.data)[0])
                assert got == brute_kernel_points(f)


def test_pure_exclusion_examples(cpmc, rel):
    e = pure_exclusion_witness(cpmc.embed([[1], [0]], I, Q), cpmc)
    assert np.allclose(e.data, [[0, 0, 0, 1]])
    e = pure_exclusion_witness(rel.embed([[True], [False]], I, Q), rel)
    assert e.data.tolist() == [[False, True]]
    with pytest.raises(ValueError):
        pure_exclusion_witness(cpmc.embed([[1]], I, SystemObject.of(1)), cpmc)


def test_sharp_from_kernels_examples(cpmc):
    for w in ([[1], [0]], [[1 / np.sqrt(2)], [1 / np.sqrt(2)]]):
        psi = cpmc.embed(w, I, Q)
        assert cpmc.eq(sharp_from_kernels(psi, cpmc), sharp_effect(psi, cpmc))
    one = cpmc.embed([[1]], I, SystemObject.of(1))
    assert np.allclose(sharp_from_kernels(one, cpmc).data, [[1]])


@pytest.mark.parametrize("tag", ["rel", "cpm-c", "cpm-r"])
def test_kernel_checks_pass(tag):
    inst = make_instance(tag)
    s = lambda: Sampler(inst, (1, 2, 3), 30, seed=9)  # noqa: E731
    for check in (check_split_kernels, check_sharp_from_kernels, check_pure_exclusion, check_kernel_composition, check_zero_propagation):
        rep = check(inst, s())
        assert rep.passed, rep.to_markdown()
    if tag != "rel":
        assert check_predual_from_purification(inst, [SystemObject.of(d) for d in (1, 2, 3)]).passed


@given(seeds, st.sampled_from(["cpm-c", "cpm-r"]))
def test_split_law_and_support_projector(seed, tag):
    inst = make_instance(tag)
    rng = np.random.default_rng(seed)
    a, b = (SystemObject.of(int(d)) for d in rng.integers(1, 4, size=2))
    r = int(rng.integers(0, a.dim))
    q = np.linalg.qr(rng.normal(size=(a.dim, a.dim)))[0][:, :r]
    f = compose(inst.sample_cp(a, b, rng), inst.embed(q @ q.T, a, a))
    kp = kernel(f, inst)
    assert inst.is_zero(compose(f, kp.inclusion))
    if kp.empty:
        return
    split = compose(kp.partner, kp.inclusion)
    assert np.abs(split.data - inst.id(kp.carrier).data).max() < 1e-10
    p = compose(kp.inclusion, kp.partner)
    assert inst.eq(compose(p, p), p)
    assert inst.eq(oracle_adjoint(inst, p), p)
    assert inst.eq(compose(p, kp.inclusion), kp.inclusion)


@given(seeds, st.sampled_from(["rel", "cpm-c"]))
def test_image_idempotence(seed, tag):
    inst = make_instance(tag)
    rng = np.random.default_rng(seed)
    a, b = (SystemObject.of(int(d)) for d in rng.integers(1, 4, size=2))
    if tag == "rel":
        f = inst.morphism(rng.random((b.dim, a.dim)) < 0.4, a, b)
    else:
        f = compose(inst.sample_cp(a, b, rng), inst.embed(np.diag(rng.integers(0, 2, a.dim)), a, a))
    kp = kernel(f, inst)
    if kp.empty:
        return
    again = kernel(cokernel(kp.inclusion, inst).partner, inst)
    assert same_subobject(again, kp, inst)


@given(seeds, st.sampled_from(["cpm-c", "cpm-r"]), st.integers(1, 4))
def test_sharp_from_kernels_agrees(seed, tag, d):
    inst = make_instance(tag)
    psi = inst.sample_pure_causal_state(SystemObject.of(d), np.random.default_rng(seed))
    assert inst.eq(sharp_from_kernels(psi, inst), sharp_effect(psi, inst))
