"""Brute-force references used to verify the decoders.

Nothing here is clever on purpose: every function enumerates local
configurations or whole codewords directly, so it shares no code path with
the forward/backward kernels it checks.
"""

from __future__ import annotations

from itertools import product
from typing import NamedTuple

import numpy as np

from .channel import IntrinsicInfo
from .code import Code, CodeError, enumerate_codewords, is_tree
from .gf import Field


class OracleError(ValueError):
    pass


ENUM_LIMIT = 2**20


def local_configurations(labels, target: int, a: int, gf: Field) -> np.ndarray:
    """All completions of a check with position ``target`` fixed to ``a``.

    Returns an array (count, d) of assignments satisfying
    ``sum_j h_j a_j = 0``.
    """
    labels = [int(h) for h in labels]
    d = len(labels)
    if gf.q ** (d - 1) > ENUM_LIMIT:
        raise OracleError(f"{gf.q}^{d - 1} configurations exceed the enumeration limit")
    rows = []
    for rest in product(range(gf.q), repeat=d - 1):
        cfg = list(rest[:target]) + [a] + list(rest[target:])
        acc = 0
        for h, s in zip(labels, cfg):
            acc ^= gf.mul(h, s)
        if acc == 0:
            rows.append(cfg)
    return np.array(rows, dtype=np.int64).reshape(-1, d)


def brute_check_row(rule: str, alpha, labels, target: int, gf: Field, p: float | None = None) -> np.ndarray:
    """Check-node output row towards ``target`` by exhaustive enumeration.

    ``rule`` is one of ``"min_sum"``, ``"p_norm"`` (needs ``p``), ``"min_max"``
    or ``"sum_product"``. Sum-product results are not renormalized.

    All ``q^(d-1)`` completions are laid out as a grid over every position
    except one dependent position ``k != target``, whose symbol is solved
    from the parity constraint. The aggregate is then reduced over every
    axis but the target's.
    """
    alpha = np.asarray(alpha, dtype=float)
    labels = [int(h) for h in labels]
    d, q = alpha.shape
    if d < 2:
        raise OracleError("check degree must be >= 2")
    if q ** (d - 1) > ENUM_LIMIT:
        raise OracleError(f"{q}^{d - 1} configurations exceed the enumeration limit")
    if rule not in ("min_sum", "min_max", "p_norm", "sum_product"):
        raise OracleError(f"unknown rule {rule!r}")
    if rule == "p_norm" and p is None:
        raise OracleError("p_norm needs p")
    k = (target + 1) % d
    free = [i for i in range(d) if i != k]
    shape = (q,) * len(free)
    axes = {}
    for ax, i in enumerate(free):
        s = [1] * len(free)
        s[ax] = q
        axes[i] = np.arange(q).reshape(s)
    acc = np.zeros([1] * len(free), dtype=np.int64)
    for i in free:
        acc = acc ^ gf.mul_table[labels[i], axes[i]]
    dep = gf.mul_table[gf.inv_table[labels[k]], acc]
    terms = [alpha[i, axes[i]] for i in free if i != target] + [alpha[k, dep]]
    if rule == "min_sum" or (rule == "p_norm" and p == 1):
        agg = sum(terms)
    elif rule == "min_max" or (rule == "p_norm" and np.isinf(p)):
        agg = terms[0]
        for t in terms[1:]:
            agg = np.maximum(agg, t)
    elif rule == "p_norm":
        agg = sum(t**p for t in terms) ** (1.0 / p)
    else:
        agg = terms[0]
        for t in terms[1:]:
            agg = agg * t
    agg = np.broadcast_to(agg, shape)
    keep = free.index(target)
    other_axes = tuple(ax for ax in range(len(free)) if ax != keep)
    if rule == "sum_product":
        return agg.sum(axis=other_axes) if other_axes else agg.copy()
    return agg.min(axis=other_axes) if other_axes else agg.copy()


def brute_check_node(rule: str, alpha, labels, target: int, a: int, gf: Field, p: float | None = None) -> float:
    """Single entry ``beta_target(a)`` of :func:`brute_check_row`."""
    return float(brute_check_row(rule, alpha, labels, target, gf, p)[a])


def brute_min_max_step(f1, f2, h: int, h1: int, h2: int, gf: Field, delta1=None, delta2=None) -> np.ndarray:
    """``min over h1 a' + h2 a'' = h a of max(f1(a'), f2(a''))`` over all pairs
    (or only pairs from ``delta1 x delta2``); ``inf`` where none exists."""
    d1 = range(gf.q) if delta1 is None else delta1
    d2 = range(gf.q) if delta2 is None else delta2
    out = np.full(gf.q, np.inf)
    for a in range(gf.q):
        ha = gf.mul(h, a)
        for x in d1:
            for y in d2:
                if gf.mul(h1, x) ^ gf.mul(h2, y) == ha:
                    out[a] = min(out[a], max(f1[x], f2[y]))
    return out


def ml_decode(code: Code, info: IntrinsicInfo, limit: int = 100_000) -> np.ndarray:
    """Codeword minimizing the total a-priori metric; ties to the
    lexicographically smallest codeword."""
    words = _codewords(code, limit)
    cost = info.gamma[np.arange(code.N), words].sum(axis=1)
    return words[int(np.argmin(cost))]


def _codewords(code, limit):
    try:
        return enumerate_codewords(code, limit)
    except CodeError as exc:
        raise OracleError(str(exc)) from None


class TreeLimit(NamedTuple):
    min_sum: np.ndarray  # min over codewords with x_n = a of total metric
    min_sum_0: np.ndarray  # the same minus the best codeword vanishing around n


def neighbourhood(code: Code, n: int) -> list[int]:
    """Variables sharing a check with ``n``, ``n`` included."""
    out = {n}
    for m in code.var_adjacency[n]:
        out.update(v for v, _ in code.check_rows[m])
    return sorted(out)


def tree_aposteriori_oracle(code: Code, info: IntrinsicInfo, n: int, limit: int = 100_000) -> TreeLimit:
    """Limits of the a-posteriori row at node ``n`` on a cycle-free graph.

    ``min_sum`` is the Min-Sum limit and ``min_sum_0`` the Min-Sum_0 limit,
    both evaluated with the metric rows of ``info`` as given.
    """
    if not is_tree(code):
        raise OracleError("Tanner graph is not a tree")
    words = _codewords(code, limit)
    cost = info.gamma[np.arange(code.N), words].sum(axis=1)
    first = np.full(code.q, np.inf)
    for a in range(code.q):
        sel = words[:, n] == a
        if sel.any():
            first[a] = cost[sel].min()
    near = neighbourhood(code, n)
    zero_near = ~words[:, near].any(axis=1)
    return TreeLimit(first, first - cost[zero_near].min())


class PigeonholeReport(NamedTuple):
    ok: bool
    witnesses: dict  # a -> (a', a'')
    violations: list


def verify_pigeonhole(gf: Field, h: int, h1: int, h2: int, delta1, delta2) -> PigeonholeReport:
    """For each symbol a look for a' in delta1, a'' in delta2 with
    ``h a = h1 a' + h2 a''``."""
    if 0 in (h, h1, h2):
        raise OracleError("coefficients must be nonzero")
    d1 = np.asarray(list(delta1), dtype=np.int64)
    d2 = np.asarray(list(delta2), dtype=np.int64)
    mul = gf.mul_table
    sums = (mul[h1, d1][:, None] ^ mul[h2, d2][None, :]).ravel()
    witnesses = {}
    violations = []
    for a in range(gf.q):
        hits = np.flatnonzero(sums == mul[h, a])
        if hits.size:
            i, j = divmod(int(hits[0]), len(d2))
            witnesses[a] = (int(d1[i]), int(d2[j]))
        else:
            violations.append(a)
    return PigeonholeReport(not violations, witnesses, violations)
