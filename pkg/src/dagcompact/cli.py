"""``verify``: run the law checkers on one instance and write a report."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Callable

from .axioms import (
    ReconstructionError,
    check_cp_axiom,
    check_cp_state_dagger,
    check_pure_closure,
    check_normalisation,
    check_pre_duals,
    check_pure_composition,
    check_purification,
    check_sharpness,
    reconstruct_dagger_compact,
)
from .dilation import check_dag_resp_state, cpm_purification, extend_state_dagger
from .instances import INSTANCE_TAGS, make_instance, oracle_adjoint
from .kernels import (
    check_kernel_composition,
    check_kernel_universal,
    check_predual_from_purification,
    check_pure_exclusion,
    check_sharp_from_kernels,
    check_split_kernels,
    check_zero_propagation,
    kernel,
)
from .numeric import ScalarKind, Tolerance
from .report import Check, VerificationReport, emit_report
from .state_dagger import (
    check_state_dagger,
    conjugate_transpose,
    derive_global_dagger,
    dual_independence,
    plain_transpose,
    standard_duals,
)
from .theory import Sampler, SystemObject, check_monoidal_laws, transformed_dual

SUITES = ("statedagger", "dilation", "cpm", "axioms", "kernels")
CPM_ONLY = {"dilation", "cpm", "axioms"}


@dataclass(frozen=True)
class RunConfig:
    instance: str = "cpm-c"
    max_dim: int = 3
    cases: int = 100
    seed: int = 0
    tol: float = 1e-9
    suite: str = "all"
    report: str = "json"
    out: str | None = None

    def validate(self) -> None:
        if self.instance not in INSTANCE_TAGS:
            raise ValueError(f"unknown instance {self.instance!r}")
        if self.suite not in SUITES + ("all",):
            raise ValueError(f"unknown suite {self.suite!r}")
        if self.max_dim < 1:
            raise ValueError("--max-dim must be at least 1")
        if self.cases < 1:
            raise ValueError("--cases must be at least 1")
        if self.tol <= 0 and self.instance != "rel":
            raise ValueError("--tol must be positive for float instances")
        if self.report not in ("json", "md"):
            raise ValueError(f"unknown report format {self.report!r}")

    @property
    def dims(self) -> list[int]:
        return list(range(1, self.max_dim + 1))


def applicable(suite: str, tag: str) -> bool:
    if suite in CPM_ONLY:
        return tag.startswith("cpm")
    if suite == "kernels":
        return tag == "rel" or tag.startswith("cpm")
    return True


def _sampler(inst, cfg: RunConfig, dims=None, pure: bool = False) -> Sampler:
    return Sampler(inst, cfg.dims if dims is None else dims, cfg.cases, cfg.seed, pure=pure)


def _oracle(inst):
    return lambda f: oracle_adjoint(inst, f)


def _permuted_duals(inst, seed: int):
    base = standard_duals(inst)
    cache = {}

    def duals(a: SystemObject):
        if a not in cache:
            rng_sampler = Sampler(inst, [a.dim], 1, seed + a.dim)
            q = rng_sampler.invertible(a.dual())
            q_inv = oracle_adjoint(inst, q)
            cache[a] = transformed_dual(base(a), q, q_inv, inst)
        return cache[a]

    return duals


def suite_statedagger(inst, cfg: RunConfig) -> list[VerificationReport]:
    sd = conjugate_transpose(inst)
    out = [check_monoidal_laws(inst, _sampler(inst, cfg)), check_state_dagger(sd, inst, _sampler(inst, cfg))]
    _, rep = derive_global_dagger(sd, standard_duals(inst), inst, _sampler(inst, cfg), _oracle(inst), tensor_dims=[1, 2])
    out.append(rep)
    ms = list(_sampler(inst, cfg).morphisms())
    out.append(dual_independence(sd, standard_duals(inst), _permuted_duals(inst, cfg.seed), inst, ms, cfg.seed))
    return out


def suite_dilation(inst, cfg: RunConfig) -> list[VerificationReport]:
    sd = conjugate_transpose(inst)
    ds = cpm_purification(inst)
    ext = extend_state_dagger(sd, ds)
    out = [check_purification(inst, _sampler(inst, cfg)), check_dag_resp_state(sd, ds, _sampler(inst, cfg))]
    out.append(check_state_dagger(ext, inst, _sampler(inst, cfg, dims=[1, 2])))
    _, rep = derive_global_dagger(ext, standard_duals(inst), inst, _sampler(inst, cfg), _oracle(inst), "extended", [1, 2])
    out.append(rep)
    return out


def suite_cpm(inst, cfg: RunConfig) -> list[VerificationReport]:
    out = [check_cp_axiom(inst, _sampler(inst, cfg)), check_cp_state_dagger(conjugate_transpose(inst), inst, _sampler(inst, cfg))]
    ctrl = VerificationReport("negative-control", inst.tag, cfg.seed, inst.tol)
    ch = Check("transpose_caught", "the unconjugated transpose is rejected by the CP state dagger checks")
    if inst.scalar is ScalarKind.COMPLEX and cfg.max_dim >= 2:
        rep = check_cp_state_dagger(plain_transpose(inst), inst, _sampler(inst, cfg, dims=[d for d in cfg.dims if d >= 2]))
        ch.record(not rep.passed, note="transpose passed every case" if rep.passed else "")
    else:
        ch.skip("transpose is the dagger over the reals")
    ctrl.add(ch)
    out.append(ctrl)
    return out


def suite_axioms(inst, cfg: RunConfig) -> list[VerificationReport]:
    objs = [SystemObject.of(d) for d in cfg.dims]
    out = [
        check_normalisation(inst, _sampler(inst, cfg)),
        check_pure_closure(inst, _sampler(inst, cfg)),
        check_sharpness(inst, _sampler(inst, cfg)),
        check_pure_composition(inst, _sampler(inst, cfg)),
        check_pre_duals(inst, objs, cfg.seed),
    ]
    dims = [d for d in cfg.dims if d >= 2][:2] or [1]
    try:
        res = reconstruct_dagger_compact(inst, dims, cfg.cases, cfg.seed)
    except ReconstructionError as err:
        res = err.result
    # the axiom stage repeats the checks above on fewer dimensions
    out.extend(r for r in res.reports if not r.suite.startswith("axioms:"))
    return out


def suite_kernels(inst, cfg: RunConfig) -> list[VerificationReport]:
    s = lambda: _sampler(inst, cfg)  # noqa: E731
    out = [check_split_kernels(inst, s()), check_sharp_from_kernels(inst, s()), check_pure_exclusion(inst, s())]
    out.append(check_kernel_composition(inst, s()))
    out.append(check_zero_propagation(inst, s()))
    uni = VerificationReport("kernel-universal", inst.tag, cfg.seed, inst.tol)
    if inst.scalar is ScalarKind.BOOLEAN:
        small = [d for d in cfg.dims if d <= 3]
        for da in small:
            for db in small:
                for f in inst.enumerate_morphisms(SystemObject.of(da), SystemObject.of(db)):
                    uni.extend(check_kernel_universal(f, kernel(f, inst), inst, xdims=small), prefix=f"{da}x{db}.")
        uni.checks = _merge(uni.checks)
    else:
        sm = s()
        for f in sm.morphisms(min(cfg.cases, 50)):
            uni.extend(check_kernel_universal(f, kernel(f, inst), inst, Sampler(inst, cfg.dims, 5, cfg.seed)))
        uni.checks = _merge(uni.checks)
        out.append(check_predual_from_purification(inst, [SystemObject.of(d) for d in cfg.dims], cfg.seed))
    out.append(uni)
    return out


def _merge(checks):
    """Fold repeated check names into one record each (first counterexample kept)."""
    from .report import FAIL, PASS, SKIP, CheckResult

    merged: dict[str, CheckResult] = {}
    for c in checks:
        key = c.name.split(".")[-1]
        m = merged.get(key)
        if m is None:
            merged[key] = CheckResult(key, c.law, c.status, c.cases, c.max_residual, c.counterexample)
            continue
        m.cases += c.cases
        m.max_residual = max(m.max_residual, c.max_residual)
        if c.status == FAIL and m.status != FAIL:
            m.status, m.counterexample = FAIL, c.counterexample
        elif m.status == SKIP and c.status == PASS:
            m.status = PASS
    return list(merged.values())


RUNNERS: dict[str, Callable] = {
    "statedagger": suite_statedagger,
    "dilation": suite_dilation,
    "cpm": suite_cpm,
    "axioms": suite_axioms,
    "kernels": suite_kernels,
}


def run_reports(cfg: RunConfig) -> list[VerificationReport]:
    cfg.validate()
    inst = make_instance(cfg.instance, Tolerance(cfg.tol, cfg.tol))
    suites = [s for s in SUITES if applicable(s, cfg.instance)] if cfg.suite == "all" else [cfg.suite]
    reports = []
    for name in suites:
        if not applicable(name, cfg.instance):
            raise ValueError(f"suite {name!r} does not apply to instance {cfg.instance!r}")
        for rep in RUNNERS[name](inst, cfg):
            rep.suite = f"{name}/{rep.suite}"
            reports.append(rep)
    return reports


def run(cfg: RunConfig) -> int:
    """Run the configured suites; 0 when everything passes, 1 on any failure, 2 on bad usage."""
    try:
        reports = run_reports(cfg)
    except ValueError as err:
        print(f"verify: error: {err}", file=sys.stderr)
        return 2
    try:
        text = emit_report(reports, cfg.report, cfg.out)
    except OSError as err:
        print(f"verify: error: cannot write report: {err}", file=sys.stderr)
        return 2
    if cfg.out is None:
        sys.stdout.write(text)
    failed = [f"{r.suite}:{c.name}" for r in reports for c in r.failures()]
    total = sum(len(r.checks) for r in reports)
    print(f"{total - len(failed)}/{total} checks passed" + (f"; failing: {', '.join(failed)}" if failed else ""), file=sys.stderr)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="verify", description="Check dagger compact laws on a finite instance.")
    p.add_argument("--instance", choices=INSTANCE_TAGS, default="cpm-c")
    p.add_argument("--max-dim", type=int, default=3)
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--report", choices=("json", "md"), default="json")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(args.instance, args.max_dim, args.cases, args.seed, args.tol, args.suite, args.report, args.out)
    try:
        cfg.validate()
    except ValueError as err:
        parser.print_usage(sys.stderr)
        print(f"verify: error: {err}", file=sys.stderr)
        return 2
    if not applicable(cfg.suite, cfg.instance) and cfg.suite != "all":
        parser.print_usage(sys.stderr)
        need = "a CPM instance" if cfg.suite in CPM_ONLY else "rel or a CPM instance"
        print(f"verify: error: suite {cfg.suite!r} requires {need}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
