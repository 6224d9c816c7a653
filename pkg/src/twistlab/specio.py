"""Spec files (YAML) for groups, simple-group tables and twisted wreath data.

Points are 1-based in files. A twisted wreath spec looks like

    kind: twist
    name: example
    T: A5
    P: {degree: 2, generators: ["(1 2)"]}
    phi: trivial            # or conjugation, or a list of {q: "...", aut: [...]}

with aut given as 1-based images of the elements of T in table order.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Any, Union

import numpy as np
import yaml

from .group import PermGroup
from .grouptable import GroupTable, named_table
from .perm import Perm, format_cycles, parse_perm
from .twisted import TwistData, TwistError, build


class SpecError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}" if path else msg)
        self.path = path


_NAMED_GROUP = re.compile(r"^([SACD])(\d+)$")


def named_group(name: str) -> PermGroup:
    m = _NAMED_GROUP.match(name.strip().upper())
    if not m:
        raise ValueError(f"unknown named group {name!r}")
    kind, n = m.group(1), int(m.group(2))
    make = {"S": PermGroup.symmetric, "A": PermGroup.alternating,
            "C": PermGroup.cyclic, "D": PermGroup.dihedral}[kind]
    G = make(n)
    G.name = f"{kind}{n}"
    return G


# -- parse ---------------------------------------------------------------

def parse_group(obj: Any, path: str = "group") -> PermGroup:
    if isinstance(obj, str):
        try:
            return named_group(obj)
        except ValueError as exc:
            raise SpecError(path, str(exc)) from None
    if not isinstance(obj, dict):
        raise SpecError(path, "expected a group name or a mapping with degree and generators")
    if "degree" not in obj:
        raise SpecError(f"{path}.degree", "missing")
    n = obj["degree"]
    if not isinstance(n, int) or n < 1:
        raise SpecError(f"{path}.degree", "must be a positive integer")
    gens = obj.get("generators", [])
    if not isinstance(gens, list):
        raise SpecError(f"{path}.generators", "must be a list")
    perms = []
    for i, s in enumerate(gens):
        try:
            perms.append(parse_perm(str(s), n))
        except ValueError as exc:
            raise SpecError(f"{path}.generators[{i}]", str(exc)) from None
    return PermGroup(perms, n, name=str(obj.get("name", "")))


def parse_table(obj: Any, path: str = "T") -> GroupTable:
    if isinstance(obj, str):
        try:
            return named_table(obj)
        except ValueError as exc:
            raise SpecError(path, str(exc)) from None
    G = parse_group(obj, path)
    return GroupTable.from_perm_group(G, name=G.name)


def _parse_phi(obj: Any, T: GroupTable, P: PermGroup, path: str = "phi"):
    if isinstance(obj, str):
        if obj not in ("trivial", "conjugation"):
            raise SpecError(path, f"unknown rule {obj!r}")
        return obj
    if not isinstance(obj, list):
        raise SpecError(path, "expected trivial, conjugation or a list of pairs")
    pairs = []
    for i, item in enumerate(obj):
        p = f"{path}[{i}]"
        if not isinstance(item, dict) or "q" not in item or "aut" not in item:
            raise SpecError(p, "expected a mapping with q and aut")
        try:
            q = parse_perm(str(item["q"]), P.degree)
        except ValueError as exc:
            raise SpecError(f"{p}.q", str(exc)) from None
        aut = np.asarray(item["aut"], dtype=np.int64) - 1
        if aut.shape != (T.size,):
            raise SpecError(f"{p}.aut", f"expected {T.size} images")
        pairs.append((q, aut))
    return pairs


def parse_twist(obj: Any, path: str = "") -> TwistData:
    if not isinstance(obj, dict):
        raise SpecError(path, "expected a mapping")
    for key in ("T", "P", "phi"):
        if key not in obj:
            raise SpecError(f"{path}{key}", "missing")
    T = parse_table(obj["T"], f"{path}T")
    P = parse_group(obj["P"], f"{path}P")
    phi = _parse_phi(obj["phi"], T, P, f"{path}phi")
    k = obj.get("k")
    if k is not None and not isinstance(k, int):
        raise SpecError(f"{path}k", "must be an integer")
    try:
        D = build(T, P, phi, k=k, name=str(obj.get("name", "")), seed=int(obj.get("seed", 0)))
    except TwistError as exc:
        raise SpecError(f"{path}phi" if "phi" in str(exc) or "normal" in str(exc) else path.rstrip("."),
                        str(exc)) from None
    D.meta.setdefault("T_spec", obj["T"])
    return D


def parse_spec(obj: Any) -> Union[TwistData, PermGroup, GroupTable]:
    if not isinstance(obj, dict):
        raise SpecError("", "spec must be a mapping")
    kind = obj.get("kind", "twist")
    body = {k: v for k, v in obj.items() if k != "kind"}
    if kind == "twist":
        return parse_twist(body)
    if kind == "group":
        return parse_group(body, "group")
    if kind == "table":
        return parse_table(body.get("group", body.get("name")), "table")
    raise SpecError("kind", f"unknown kind {kind!r}")


def load(path: Union[str, Path]):
    text = Path(path).read_text()
    try:
        obj = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpecError(str(path), f"YAML error: {exc}") from None
    return parse_spec(obj)


def parse_specs(paths: list[Union[str, Path]]) -> list:
    return [load(p) for p in paths]


# -- serialize -----------------------------------------------------------

def group_obj(G: PermGroup) -> dict:
    out = {"degree": G.degree, "generators": [format_cycles(g) for g in G.gens]}
    if G.name:
        out["name"] = G.name
    return out


def table_obj(T: GroupTable) -> Any:
    try:
        if T.name and named_table(T.name).size == T.size:
            return T.name
    except ValueError:
        pass
    if T.perms is None:
        raise SpecError("T", "table has neither a built-in name nor a permutation form")
    n = int(T.perms.shape[1])
    G = PermGroup([Perm(T.perms[g]) for g in T.generators()], n)
    return group_obj(G)


def twist_obj(D: TwistData) -> dict:
    T_spec = D.meta.get("T_spec")
    return {
        "kind": "twist",
        "name": D.name,
        "T": T_spec if T_spec is not None else table_obj(D.T),
        "P": group_obj(D.P),
        "k": D.k,
        "phi": [{"q": format_cycles(q), "aut": (np.asarray(a) + 1).tolist()}
                for q, a in zip(D.q_gens, D.phi_gens)],
        "seed": D.seed,
    }


def serialize(x) -> str:
    if isinstance(x, TwistData):
        obj = twist_obj(x)
    elif isinstance(x, PermGroup):
        obj = {"kind": "group", **group_obj(x)}
    elif isinstance(x, GroupTable):
        obj = {"kind": "table", "group": table_obj(x)}
    else:
        raise TypeError(f"cannot serialize {type(x).__name__}")
    return yaml.safe_dump(obj, sort_keys=False, default_flow_style=None, width=10_000)


def parse_text(text: str):
    return parse_spec(yaml.safe_load(text))


def same_object(a, b) -> bool:
    """Structural equality used by the round-trip property."""
    if isinstance(a, TwistData) and isinstance(b, TwistData):
        return (a.k == b.k and np.array_equal(a.T.mul, b.T.mul) and a.P.same_as(b.P)
                and all(np.array_equal(a.phi(q), b.phi(q)) for q in a.Q.gens + b.Q.gens))
    if isinstance(a, PermGroup) and isinstance(b, PermGroup):
        return a.degree == b.degree and a.same_as(b)
    if isinstance(a, GroupTable) and isinstance(b, GroupTable):
        return np.array_equal(a.mul, b.mul)
    return False


# -- built-in instance names --------------------------------------------

def _split_args(s: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def resolve_instance(name: str, seed: int = 0) -> TwistData:
    """Built-in instance names such as trivial-phi(A5,C3) or blowup(diagonal(A5),S2)."""
    from . import constructions as C

    m = re.match(r"^([a-z-]+)\((.*)\)$", name.strip())
    if not m:
        if Path(name).exists():
            D = load(name)
            if not isinstance(D, TwistData):
                raise SpecError(name, "not a twisted wreath spec")
            return D
        raise SpecError(name, "unknown instance")
    fam, args = m.group(1), _split_args(m.group(2))
    try:
        if fam == "trivial-phi":
            return C.family_trivial_phi(named_table(args[0]), named_group(args[1]), name=name, seed=seed)
        if fam == "nonfaithful":
            return C.family_nonfaithful_top(int(args[0]), named_group(args[1]), seed=seed)
        if fam == "diagonal":
            return C.family_diagonal(named_table(args[0]), seed=seed)
        if fam == "almost-simple":
            return C.family_almost_simple_Sk(int(args[0]), seed=seed)
        if fam == "blowup":
            return C.family_blowup(resolve_instance(args[0], seed), named_group(args[1]), seed=seed)
    except (IndexError, ValueError) as exc:
        raise SpecError(name, str(exc)) from None
    raise SpecError(name, f"unknown family {fam!r}")
