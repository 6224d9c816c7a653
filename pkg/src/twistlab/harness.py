"""Verification suites over instance grids, with text and line-record reports."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
import yaml

from .base import bounds_report, exp_ranges, is_base_G, theorem_b2_conditions
from .dist import dist_bounds, dist_exact
from .group import ENUM_LIMIT, Unknown
from .primitive import balanced_subgroups, block_oracle, primitivity_check
from .prob import q_montecarlo, qbound_form, qbound_sharp, verify_conjcent
from .specio import SpecError, resolve_instance
from .structure import prime_order_class_reps
from .twisted import TwistData, all_vectors

SUITES = ("action-laws", "fix-counts", "conjcent", "primitivity", "base-bounds", "dist-bounds",
          "prob-bounds", "balanced", "theorem-QP", "theorem-pyber", "theorem-exp")

ANCHORS = {
    "action-laws": "P acts on B by automorphisms through the cocycle",
    "fix-counts": "fixed vectors of x counted by holonomy fixed points",
    "conjcent": "conjugacy classes and centralizers of P-elements in G",
    "primitivity": "primitivity criterion for twisted wreath products",
    "base-bounds": "base size bounds via distinguishing partitions",
    "dist-bounds": "distinguishing number bounds for transitive groups",
    "prob-bounds": "probability that a random b-tuple is not a base",
    "balanced": "balanced subgroups and the minimal twisted reduction",
    "theorem-QP": "quasiprimitive twisted wreath products have base size two",
    "theorem-pyber": "b(G) within a small constant of the order bound",
    "theorem-exp": "base size of blow-ups H wr K",
}

DEFAULT_INSTANCES = [
    "trivial-phi(A5,S2)",
    "trivial-phi(A5,C3)",
    "trivial-phi(PSL27,S2)",
    "nonfaithful(5,S2)",
    "diagonal(A5)",
    "almost-simple(6)",
    "almost-simple(7)",
    "blowup(diagonal(A5),S2)",
    "blowup(trivial-phi(A5,C3),S2)",
]

DEFAULT_SEED = 20240601


@dataclass
class Row:
    suite: str
    instance: str
    check: str
    status: str
    values: dict = field(default_factory=dict)
    anchor: str = ""
    repro: str = ""

    def record(self) -> dict:
        return {"suite": self.suite, "instance": self.instance, "check": self.check, "status": self.status,
                "values": self.values, "anchor": self.anchor, "repro": self.repro}


@dataclass
class Config:
    suites: list
    instances: list
    seed: int = DEFAULT_SEED
    budget: int = 100_000
    trials: int = 10_000
    law_samples: int = 10_000
    threads: int = 1


def parse_config(obj: Any, where: str = "config") -> Config:
    if not isinstance(obj, dict):
        raise SpecError(where, "expected a mapping")
    suites = obj.get("suites", list(SUITES))
    if not isinstance(suites, list):
        raise SpecError(f"{where}.suites", "must be a list")
    for i, s in enumerate(suites):
        if s not in SUITES:
            raise SpecError(f"{where}.suites[{i}]", f"unknown suite {s!r}")
    instances = obj.get("instances", DEFAULT_INSTANCES)
    if not isinstance(instances, list) or not all(isinstance(x, str) for x in instances):
        raise SpecError(f"{where}.instances", "must be a list of names or spec paths")
    kw = {}
    for key in ("seed", "budget", "trials", "law_samples", "threads"):
        if key in obj:
            if not isinstance(obj[key], int):
                raise SpecError(f"{where}.{key}", "must be an integer")
            kw[key] = obj[key]
    return Config(list(suites), list(instances), **kw)


def load_config(path: str) -> Config:
    with open(path) as fh:
        try:
            obj = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise SpecError(path, f"YAML error: {exc}") from None
    return parse_config(obj, path)


# -- shared per-instance computations -----------------------------------

class Context:
    """Caches results that several suites share for one instance."""

    def __init__(self, D: TwistData, cfg: Config):
        self.D = D
        self.cfg = cfg
        self._cache: dict[str, Any] = {}

    def get(self, key: str, fn: Callable[[], Any]) -> Any:
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def primitive(self) -> tuple[Optional[bool], str]:
        return self.get("primitive", lambda: primitive_verdict(self.D))

    def bounds(self):
        return self.get("bounds", lambda: bounds_report(self.D, primitive=self.primitive()[0],
                                                         budget=self.cfg.budget, seed=self.cfg.seed))


def primitive_verdict(D: TwistData) -> tuple[Optional[bool], str]:
    """Verdict from the criterion, falling back to the blow-up inheritance rule."""
    res = primitivity_check(D)
    if res.primitive is not None:
        return res.primitive, f"criterion (failing condition: {res.failing_condition})"
    H = getattr(D, "blowup_of", None)
    if H is not None:
        v, how = primitive_verdict(H)
        return v, f"inherited from H ({how})"
    return None, "; ".join(res.notes)


# -- suites --------------------------------------------------------------

def suite_action_laws(ctx: Context) -> list[Row]:
    D, n = ctx.D, ctx.cfg.law_samples
    rng = np.random.default_rng(ctx.cfg.seed)
    rows = []
    bad_act = bad_coc = bad_assoc = 0
    for _ in range(n):
        x, y = D.P.uniform_random(rng), D.P.uniform_random(rng)
        f = rng.integers(0, D.T.size, size=D.k)
        if not np.array_equal(D.act_P(D.act_P(f, x), y), D.act_P(f, x * y)):
            bad_act += 1
        i = int(rng.integers(D.k))
        if D.cocycle(x * y, i) != D.cocycle(x, i) * D.cocycle(y, x(i)):
            bad_coc += 1
    from .twisted import GElement
    for _ in range(min(n, 1000)):
        g = [GElement(rng.integers(0, D.T.size, size=D.k), D.P.uniform_random(rng)) for _ in range(3)]
        l = D.g_mul(D.g_mul(g[0], g[1]), g[2])
        r = D.g_mul(g[0], D.g_mul(g[1], g[2]))
        if not (np.array_equal(l.b, r.b) and l.p == r.p):
            bad_assoc += 1
    for check, bad, total in (("action homomorphism", bad_act, n), ("cocycle identity", bad_coc, n),
                              ("associativity in G", bad_assoc, min(n, 1000))):
        rows.append(Row("action-laws", D.name, check, "pass" if bad == 0 else "fail",
                        {"samples": total, "failures": bad}))
    return rows


def brute_fix_count(D: TwistData, x) -> int:
    vecs = all_vectors(D)
    total = 0
    for lo in range(0, vecs.shape[0], 200_000):
        F = vecs[lo:lo + 200_000]
        img, auts = D.x_data(x)
        res = np.empty_like(F)
        res[:, img] = auts[np.arange(D.k)[None, :], F]
        total += int((res == F).all(axis=1).sum())
    return total


def suite_fix_counts(ctx: Context) -> list[Row]:
    D = ctx.D
    rows = []
    try:
        reps = [c.rep for c in prime_order_class_reps(D.P)]
    except Unknown:
        reps = list(D.P.gens)
    for x in reps[:8]:
        fc = D.fix_count(x)
        if D.B_size() <= ENUM_LIMIT:
            other, how = brute_fix_count(D, x), "enumeration of B"
        elif fc <= 300_000:
            other, how = sum(1 for _ in D.fix_elements(x)), "listing of fixed vectors"
        else:
            other, how = None, "formula only"
        status = "unknown" if other is None else ("pass" if other == fc else "fail")
        rows.append(Row("fix-counts", D.name, f"fix({x})", status, {"holonomy": fc, "check": other, "via": how}))
    return rows


def suite_conjcent(ctx: Context) -> list[Row]:
    D = ctx.D
    rows = []
    for x in D.P.gens[:3]:
        r = verify_conjcent(D, x, seed=ctx.cfg.seed)
        ok = r.conj_in_P and r.centralizer_order and r.centralizer_set is not False
        rows.append(Row("conjcent", D.name, f"x = {x}", "pass" if ok else "fail",
                        {"brute": r.brute, "conj_in_P": r.conj_in_P, "centralizer_set": r.centralizer_set,
                         "centralizer_order": r.centralizer_order, **{k: v for k, v in r.detail.items()}}))
    return rows


def suite_primitivity(ctx: Context) -> list[Row]:
    D = ctx.D
    verdict, how = ctx.primitive()
    vals: dict = {"verdict": verdict, "method": how}
    status = "unknown" if verdict is None else "pass"
    if D.B_size() <= ENUM_LIMIT:
        oracle, block = block_oracle(D)
        vals["oracle"] = oracle
        vals["block_size"] = None if block is None else int(len(block))
        status = "pass" if oracle == verdict else "fail"
    return [Row("primitivity", D.name, "criterion vs block oracle", status, vals)]


def suite_base_bounds(ctx: Context) -> list[Row]:
    D = ctx.D
    rep = ctx.bounds()
    vals = {"lower": rep.lower, "upper": rep.upper, "exact": rep.exact, "provenance": rep.provenance}
    if rep.witness is not None:
        ok = is_base_G(D, rep.witness)
        vals["witness_size"] = len(rep.witness)
        status = "pass" if ok and rep.lower <= len(rep.witness) else "fail"
    else:
        status = "unknown"
    if rep.exact is not None and rep.upper is not None and not rep.lower <= rep.exact <= rep.upper:
        status = "fail"
    return [Row("base-bounds", D.name, "lower <= b <= upper, witness verified", status, vals)]


def suite_dist_bounds(ctx: Context) -> list[Row]:
    D = ctx.D
    try:
        res = ctx.get("dist", lambda: dist_exact(D.P, D.k, seed=ctx.cfg.seed))
    except Unknown as exc:
        return [Row("dist-bounds", D.name, "sandwich", "unknown", {"reason": str(exc)})]
    if res.d is None or not res.proven:
        return [Row("dist-bounds", D.name, "sandwich", "unknown", {"d": res.d, "lower": res.lower})]
    b = dist_bounds(D.P, D.k, res.d)
    status = "pass" if b.sandwich else "fail"
    return [Row("dist-bounds", D.name, "|G| < d^n <= 48^n |G|", status,
                {"d": res.d, "order": b.order, "degree": b.degree, "summary": b.summary})]


def suite_prob_bounds(ctx: Context) -> list[Row]:
    D = ctx.D
    try:
        form, sharp = qbound_form(D, 2), qbound_sharp(D, 2)
    except Unknown as exc:
        return [Row("prob-bounds", D.name, "sharp <= form", "unknown", {"reason": str(exc)})]
    est = q_montecarlo(D, 2, trials=ctx.cfg.trials, seed=ctx.cfg.seed, with_bounds=False)
    ok = sharp <= form
    if est.exact:
        ok = ok and est.mc_estimate <= sharp
    else:
        ok = ok and est.mc_interval[0] <= float(sharp)
    vals = {"form": str(form), "sharp": str(sharp), "estimate": str(est.mc_estimate), "exact": est.exact,
            "interval": list(est.mc_interval), "trials": est.mc_trials}
    return [Row("prob-bounds", D.name, "Q(G,2) <= sharp <= form", "pass" if ok else "fail", vals)]


def suite_balanced(ctx: Context) -> list[Row]:
    D = ctx.D
    bal = balanced_subgroups(D)
    orders = sorted(b.group.order() for b in bal)
    vals = {"balanced_orders": orders, "minimal_twisted": len(bal) == 1 and orders[-1] == D.P.order()}
    ok = True
    if D.faithful_top:
        ok = ok and D.P.order() in orders
    verdict, _ = ctx.primitive()
    q_bal = D.Q.order() in orders
    vals["Q_balanced"] = q_bal
    if verdict is True:
        ok = ok and not q_bal
    return [Row("balanced", D.name, "P balanced; Q balanced only if imprimitive", "pass" if ok else "fail", vals)]


def suite_theorem_qp(ctx: Context) -> list[Row]:
    D = ctx.D
    if not D.faithful_top:
        return [Row("theorem-QP", D.name, "b = 2 conditions", "unknown", {"reason": "core_P(Q) != 1"})]
    res = theorem_b2_conditions(D, budget=ctx.cfg.budget, seed=ctx.cfg.seed)
    vals = {"conditions": res.conditions, "sum_test": res.sum_test, "any_holds": res.any_holds}
    if not res.any_holds:
        return [Row("theorem-QP", D.name, "b = 2 conditions", "unknown", vals)]
    ok = res.witness is not None and is_base_G(D, res.witness)
    vals["witness_size"] = None if res.witness is None else len(res.witness)
    return [Row("theorem-QP", D.name, "some condition holds and a base of size 2 exists",
                "pass" if ok else "fail", vals)]


def suite_theorem_pyber(ctx: Context) -> list[Row]:
    D = ctx.D
    rep = ctx.bounds()
    vals = {"epsilon": rep.epsilon, "delta": rep.delta, "checks": rep.checks}
    if rep.epsilon is None or rep.delta is None:
        return [Row("theorem-pyber", D.name, "epsilon/delta ranges", "unknown", vals)]
    ok = all(rep.checks.values())
    return [Row("theorem-pyber", D.name, "order inequalities and epsilon/delta ranges", "pass" if ok else "fail", vals)]


def suite_theorem_exp(ctx: Context) -> list[Row]:
    D = ctx.D
    K = getattr(D, "blowup_K", None)
    if K is None:
        return []
    rep = ctx.bounds()
    if rep.exact is None:
        return [Row("theorem-exp", D.name, "blow-up ranges", "unknown", {})]
    dK = dist_exact(K, seed=ctx.cfg.seed).d
    r = exp_ranges(D, rep, dK)
    check = "epsilon in {0,1}, delta in {1,2}, epsilon+1 <= delta" if r["strong"] else "epsilon <= delta in {0,1,2}"
    return [Row("theorem-exp", D.name, check,
                "pass" if r["exp_range"] else "fail", {**r, "d_K": dK, "b": rep.exact})]


SUITE_FUNCS = {
    "action-laws": suite_action_laws,
    "fix-counts": suite_fix_counts,
    "conjcent": suite_conjcent,
    "primitivity": suite_primitivity,
    "base-bounds": suite_base_bounds,
    "dist-bounds": suite_dist_bounds,
    "prob-bounds": suite_prob_bounds,
    "balanced": suite_balanced,
    "theorem-QP": suite_theorem_qp,
    "theorem-pyber": suite_theorem_pyber,
    "theorem-exp": suite_theorem_exp,
}


def _run_instance(name: str, cfg: Config) -> list[Row]:
    rows = []
    try:
        D = resolve_instance(name, cfg.seed)
    except Exception as exc:  # build failures become rows, not crashes
        D = None
        rows = [Row(s, name, "build", "fail", {"error": str(exc)}) for s in cfg.suites]
    if D is not None:
        D.name = name
        ctx = Context(D, cfg)
        for s in cfg.suites:
            t0 = time.perf_counter()
            try:
                out = SUITE_FUNCS[s](ctx)
            except Unknown as exc:
                out = [Row(s, name, "run", "unknown", {"reason": str(exc)})]
            for r in out:
                r.values["seconds"] = round(time.perf_counter() - t0, 3)
            rows.extend(out)
    for r in rows:
        r.instance = name
        r.anchor = ANCHORS[r.suite]
        if r.status == "fail":
            r.repro = f"twistlab verify --suite {r.suite} --instance '{name}' --seed {cfg.seed}"
    return rows


def run_suite(cfg: Config) -> list[Row]:
    workers = max(1, cfg.threads)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda n: _run_instance(n, cfg), cfg.instances))
    else:
        parts = [_run_instance(n, cfg) for n in cfg.instances]
    rows = [r for p in parts for r in p]
    order = {s: i for i, s in enumerate(SUITES)}
    rows.sort(key=lambda r: (order[r.suite], r.instance))
    return rows


def _short(v: Any, width: int = 60) -> str:
    s = json.dumps(v, default=str, sort_keys=True)
    return s if len(s) <= width else s[:width - 3] + "..."


def format_table(rows: list[Row]) -> str:
    head = ("suite", "instance", "check", "status", "values")
    cells = [head] + [(r.suite, r.instance, r.check, r.status,
                       _short({k: v for k, v in r.values.items() if k != "seconds"})) for r in rows]
    widths = [max(len(str(c[i])) for c in cells) for i in range(4)]
    lines = []
    for c in cells:
        lines.append("  ".join(str(c[i]).ljust(widths[i]) for i in range(4)) + "  " + str(c[4]))
    return "\n".join(lines)


def format_records(rows: list[Row]) -> str:
    return "\n".join(json.dumps(r.record(), default=str, sort_keys=True) for r in rows)


def exit_status(rows: list[Row]) -> int:
    return 1 if any(r.status == "fail" for r in rows) else 0


def default_threads() -> int:
    env = os.environ.get("TWISTLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
