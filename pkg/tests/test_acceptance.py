"""Acceptance criteria, each at its stated tolerance, printing one PASS/FAIL line."""
import time

import numpy as np
import pytest

from dagcompact.axioms import (
    check_cp_axiom,
    check_cp_state_dagger,
    check_purification,
    check_sharpness,
    operator_space_dim,
    pre_dual_marginals,
    reconstruct_dagger_compact,
    spanning_rank,
)
from dagcompact.cli import main
from dagcompact.dilation import cpm_purification, extend_state_dagger
from dagcompact.instances import make_instance, oracle_adjoint
from dagcompact.kernels import (
    check_kernel_universal,
    check_sharp_from_kernels,
    check_split_kernels,
    check_zero_propagation,
    kernel,
)
from dagcompact.state_dagger import (
    conjugate_transpose,
    derive_global_dagger,
    dual_independence,
    plain_transpose,
    standard_duals,
)
from dagcompact.theory import Sampler, SystemObject, transformed_dual


@pytest.fixture
def announce(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail

    return emit


def oracle(inst):
    return lambda f: oracle_adjoint(inst, f)


def permuted_duals(inst, seed):
    rng = np.random.default_rng(seed)
    cache = {}

    def duals(a):
        if a not in cache:
            q = inst.sample_invertible(a.dual(), rng)
            base = standard_duals(inst)(a)
            cache[a] = transformed_dual(base, q, oracle_adjoint(inst, q), inst)
        return cache[a]

    return duals


def test_criterion_1_oracle_equivalence(announce):
    t0 = time.perf_counter()
    matc = make_instance("matc")
    _, rep_c = derive_global_dagger(conjugate_transpose(matc), standard_duals(matc), matc,
                                    Sampler(matc, (2, 3, 4, 5, 6), 200, seed=11), oracle(matc))
    res_c = rep_c.get("oracle").max_residual
    rel = make_instance("rel")
    _, rep_r = derive_global_dagger(conjugate_transpose(rel), standard_duals(rel), rel,
                                    Sampler(rel, (1, 2, 3), 1, seed=11), oracle(rel))
    orc = rep_r.get("oracle")
    elapsed = time.perf_counter() - t0
    ok = (rep_c.passed and rep_c.get("oracle").cases == 200 and res_c < 1e-9
          and rep_r.passed and orc.cases == 682 and orc.max_residual == 0 and elapsed < 10)
    announce(1, ok, f"Mat_C residual {res_c:.2e} over {rep_c.get('oracle').cases} morphisms; "
                    f"Rel exact over {orc.cases} relations; {elapsed:.1f} s (limit 10 s)")


def test_criterion_2_dual_choice_independence(announce):
    worst, lines = 0.0, []
    ok = True
    for tag in ("rel", "matc", "matr", "cpm-c", "cpm-r"):
        inst = make_instance(tag)
        dims = (1, 2, 3) if tag.startswith("cpm") else (1, 2, 3, 4)
        ms = list(Sampler(inst, dims, 100, seed=21).morphisms())
        rep = dual_independence(conjugate_transpose(inst), standard_duals(inst), permuted_duals(inst, 21), inst, ms, 21)
        c = rep.get("dual_choice")
        ok &= rep.passed and c.cases == 100 and c.max_residual < 1e-9
        worst = max(worst, c.max_residual)
        lines.append(tag)
    announce(2, ok, f"100 cases on each of {', '.join(lines)}; worst residual {worst:.2e}")


def test_criterion_3_extended_state_dagger(announce):
    t0 = time.perf_counter()
    inst = make_instance("cpm-c")
    ext = extend_state_dagger(conjugate_transpose(inst), cpm_purification(inst))
    _, rep = derive_global_dagger(ext, standard_duals(inst), inst, Sampler(inst, (2, 3, 4), 200, seed=31),
                                  oracle(inst), "extended", tensor_dims=(1, 2))
    elapsed = time.perf_counter() - t0
    c = rep.get("oracle")
    ok = rep.passed and c.cases == 200 and c.max_residual < 1e-9 and elapsed < 30
    failing = ", ".join(f.name for f in rep.failures()) or "none"
    announce(3, ok, f"oracle residual {c.max_residual:.2e} over {c.cases} channels; failing checks: {failing}; "
                    f"{elapsed:.1f} s (limit 30 s)")


def test_criterion_4_cp_conditions(announce):
    details, ok = [], True
    for tag in ("cpm-c", "cpm-r"):
        inst = make_instance(tag)
        ax = check_cp_axiom(inst, Sampler(inst, (2, 3, 4), 500, seed=41))
        sd = check_cp_state_dagger(conjugate_transpose(inst), inst, Sampler(inst, (2, 3, 4), 500, seed=41))
        ok &= ax.passed and sd.passed and ax.get("equivalence").cases == 500 and sd.get("marginal_iff_pip").cases == 500
        details.append(f"{tag}: axiom {ax.get('equivalence').cases} cases, state dagger {sd.get('marginal_iff_pip').cases} cases")
    inst = make_instance("cpm-c")
    neg = check_cp_state_dagger(plain_transpose(inst), inst, Sampler(inst, (2, 3, 4), 500, seed=41))
    caught = [c for c in neg.failures() if c.counterexample is not None]
    ok &= bool(caught)
    details.append(f"transpose control caught by {', '.join(c.name for c in caught) or 'nothing'}")
    announce(4, ok, "; ".join(details))


def test_criterion_5_axiom_suite(announce):
    details, ok = [], True
    dims = (1, 2, 3, 4)
    for tag in ("cpm-c", "cpm-r"):
        inst = make_instance(tag)
        pur = check_purification(inst, Sampler(inst, dims, 200, seed=51))
        sh = check_sharpness(inst, Sampler(inst, dims, 500, seed=51))
        marg = pur.get("marginal").max_residual
        conn = max(pur.get("connecting_unitary").max_residual, pur.get("transport").max_residual)
        comp = sh.get("composite").max_residual
        probes = min(sh.get("unique_effect").cases, sh.get("unique_state").cases)
        pre = max(max(pre_dual_marginals(SystemObject.of(d), inst)) for d in dims)
        ranks = all(spanning_rank(SystemObject.of(d), inst) == operator_space_dim(SystemObject.of(d), inst) for d in dims)
        ok &= (pur.passed and sh.passed and marg < 1e-10 and conn < 1e-9 and comp < 1e-10
               and probes >= 500 and pre < 1e-10 and ranks)
        details.append(f"{tag}: marginal {marg:.1e}, connecting {conn:.1e}, sharp {comp:.1e}, "
                       f"{probes} probes, pre-dual {pre:.1e}, Gram ranks {'full' if ranks else 'deficient'}")
    announce(5, ok, "; ".join(details))


def test_criterion_6_reconstruction(announce):
    t0 = time.perf_counter()
    details, ok = [], True
    for tag in ("cpm-c", "cpm-r"):
        res = reconstruct_dagger_compact(make_instance(tag), dims=(2, 3), cases=200, seed=61, abort=False)
        pre = next(r for r in res.reports if r.suite.endswith("pre-duals"))
        v_res = pre.get("snake_identity").max_residual
        ok &= res.passed and v_res < 1e-9 and res.residual < 1e-9
        details.append(f"{tag}: {len(res.reports)} stage reports pass={res.passed}, |V-id| {v_res:.1e}, oracle {res.residual:.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    announce(6, ok, "; ".join(details) + f"; {elapsed:.1f} s (limit 60 s)")


def test_criterion_7_kernels(announce):
    rel = make_instance("rel")
    n_rel, rel_ok = 0, True
    for da in (1, 2, 3):
        for db in (1, 2, 3):
            for f in rel.enumerate_morphisms(SystemObject.of(da), SystemObject.of(db)):
                rel_ok &= check_kernel_universal(f, kernel(f, rel), rel, xdims=(1, 2, 3)).passed
                n_rel += 1
    details, ok = [f"Rel universal property over {n_rel} relations"], rel_ok and n_rel == 682
    zr = check_zero_propagation(rel, Sampler(rel, (1, 2, 3), 1, seed=71))
    ok &= zr.passed
    for tag in ("cpm-c", "cpm-r"):
        inst = make_instance(tag)
        split = check_split_kernels(inst, Sampler(inst, (1, 2, 3, 4), 100, seed=71)).get("split")
        sharp = check_sharp_from_kernels(inst, Sampler(inst, (1, 2, 3, 4), 100, seed=71)).get("agrees_with_sharp")
        zc = check_zero_propagation(inst, Sampler(inst, (1, 2, 3), 200, seed=71))
        ok &= (split.status == "pass" and split.max_residual < 1e-10 and sharp.status == "pass"
               and sharp.cases >= 100 and sharp.max_residual < 1e-9 and zc.passed)
        details.append(f"{tag}: split {split.max_residual:.1e}, sharp {sharp.max_residual:.1e} on {sharp.cases}, zero propagation {zc.passed}")
    details.append(f"Rel zero propagation {zr.passed}")
    announce(7, ok, "; ".join(details))


def test_criterion_8_determinism(announce, tmp_path):
    args = ["--instance", "cpm-c", "--suite", "all", "--seed", "81"]
    codes = [main(args + ["--out", str(tmp_path / f"run{i}.json")]) for i in (1, 2)]
    a, b = ((tmp_path / f"run{i}.json").read_bytes() for i in (1, 2))
    announce(8, a == b and codes == [0, 0], f"two runs, {len(a)} bytes each, identical={a == b}, exit codes {codes}")
