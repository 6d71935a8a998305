"""Check-node kernels.

Every rule is computed the same way. Incoming rows are first relabelled,
``g_j(x) = alpha_j(h_j^-1 x)``, so the parity constraint becomes
``x_1 + ... + x_d = 0`` (XOR). A two-operand step is then an XOR-convolution
in some semiring::

    (f1 * f2)(x) = reduce_y  f1(y) (x) f2(x ^ y)

with (min, +) for Min-Sum and the p-norms (in the p-th power domain),
(min, max) for Min-Max and (+, x) for Sum-Product. Forward/backward passes
give every leave-one-out aggregate in 3(d - 2) steps, and the outgoing row
for neighbour ``j`` is read back as ``beta_j(a) = excl_j(h_j a)``.

Kernels work on batches: arrays shaped ``(C, d, q)`` hold ``C`` checks of a
common degree ``d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from ..gf import Field


class CheckNodeError(ValueError):
    pass


@dataclass
class OpCounter:
    """Running totals of arithmetic operations.

    ``pairs`` counts (a', a'') candidate pairs examined by two-operand steps;
    it is the quantity the selective Min-Max implementation reduces.
    ``history`` holds cumulative snapshots, one per decoding iteration.
    """

    additions: int = 0
    comparisons: int = 0
    multiplications: int = 0
    pairs: int = 0
    history: list = field(default_factory=list)

    def add(self, additions=0, comparisons=0, multiplications=0, pairs=0):
        self.additions += int(additions)
        self.comparisons += int(comparisons)
        self.multiplications += int(multiplications)
        self.pairs += int(pairs)

    def snapshot(self) -> dict:
        return {
            "additions": self.additions,
            "comparisons": self.comparisons,
            "multiplications": self.multiplications,
            "pairs": self.pairs,
        }

    def mark_iteration(self):
        self.history.append(self.snapshot())

    def per_iteration(self) -> list[dict]:
        prev = dict.fromkeys(("additions", "comparisons", "multiplications", "pairs"), 0)
        out = []
        for snap in self.history:
            out.append({k: snap[k] - prev[k] for k in snap})
            prev = snap
        return out


@lru_cache(maxsize=None)
def xor_index(q: int) -> np.ndarray:
    """``X[x, y] = x ^ y``; ``f[:, X]`` lays out ``f(x ^ y)`` for every (x, y)."""
    e = np.arange(q)
    X = e[:, None] ^ e[None, :]
    X.setflags(write=False)
    return X


# ---------------------------------------------------------------------------
# Two-operand steps
# ---------------------------------------------------------------------------


def minsum_step(f1, f2, counter=None):
    q = f1.shape[-1]
    out = (f1[:, None, :] + f2[:, xor_index(q)]).min(axis=-1)
    if counter is not None:
        n = f1.shape[0]
        counter.add(additions=n * q * q, comparisons=n * q * (q - 1), pairs=n * q * q)
    return out


def minmax_step(f1, f2, counter=None):
    q = f1.shape[-1]
    out = np.maximum(f1[:, None, :], f2[:, xor_index(q)]).min(axis=-1)
    if counter is not None:
        n = f1.shape[0]
        counter.add(comparisons=n * (q * q + q * (q - 1)), pairs=n * q * q)
    return out


def sumprod_step(f1, f2, counter=None):
    q = f1.shape[-1]
    out = (f1[:, None, :] * f2[:, xor_index(q)]).sum(axis=-1)
    s = out.sum(axis=-1, keepdims=True)
    if not (s > 0).all():
        raise CheckNodeError("probability row vanished during convolution (underflow)")
    out /= s
    if counter is not None:
        n = f1.shape[0]
        counter.add(additions=n * (q * (q - 1) + q - 1), multiplications=n * (q * q + q), pairs=n * q * q)
    return out


class SelectiveSets(NamedTuple):
    mask1: np.ndarray  # (C, q) membership of a' in Delta'
    mask2: np.ndarray  # (C, q) membership of a'' in Delta''
    bucket1: np.ndarray
    bucket2: np.ndarray
    threshold: np.ndarray  # (C,) last bucket index t taken


def selective_sets(f1, f2, cot: float) -> SelectiveSets:
    """Bucket the two operands by integer part and pick Delta', Delta''.

    Buckets ``k = floor(f)`` for ``k < cot`` are accumulated in increasing
    order until the two subsets hold at least q + 1 symbols together, or
    until the last bucket ``cot - 1``. Values at or above ``cot`` never
    participate.
    """
    q = f1.shape[-1]
    k1 = np.floor(f1)
    k2 = np.floor(f2)
    ok1 = f1 < cot
    ok2 = f2 < cot
    keys = np.concatenate([np.where(ok1, k1, np.inf), np.where(ok2, k2, np.inf)], axis=-1)
    t = np.partition(keys, q, axis=-1)[:, q]
    mask1 = ok1 & (k1 <= t[:, None])
    mask2 = ok2 & (k2 <= t[:, None])
    return SelectiveSets(mask1, mask2, k1, k2, t)


def selective_minmax_step(f1, f2, cot: float, counter=None, sets: SelectiveSets | None = None):
    """Min-max step restricted to Delta' x Delta''.

    Symbols with no admissible pair saturate at ``cot``. Counting follows
    the bucket rule: a max is only evaluated for pairs from equal buckets,
    otherwise the higher bucket wins without a comparison.
    """
    q = f1.shape[-1]
    X = xor_index(q)
    if sets is None:
        sets = selective_sets(f1, f2, cot)
    adm = sets.mask1[:, None, :] & sets.mask2[:, X]
    big = np.maximum(f1[:, None, :], f2[:, X])
    out = np.where(adm, big, np.inf).min(axis=-1)
    out = np.where(np.isfinite(out), out, cot)
    if counter is not None:
        per_a = adm.sum(axis=-1)
        same = adm & (sets.bucket1[:, None, :] == sets.bucket2[:, X])
        tcap = np.where(np.isfinite(sets.threshold), sets.threshold, cot - 1)
        counter.add(
            comparisons=same.sum() + np.maximum(per_a - 1, 0).sum() + (tcap + 1).sum(),
            pairs=adm.sum(),
        )
    return out


# ---------------------------------------------------------------------------
# Forward / backward
# ---------------------------------------------------------------------------


def forward_backward(G: np.ndarray, step: Callable) -> np.ndarray:
    """Leave-one-out semiring aggregates along axis 1 of ``G`` (C, d, q)."""
    C, d, q = G.shape
    if d < 2:
        raise CheckNodeError(f"check degree {d} < 2")
    out = np.empty_like(G)
    if d == 2:
        out[:, 0] = G[:, 1]
        out[:, 1] = G[:, 0]
        return out
    F = [G[:, 0]]
    for i in range(1, d - 1):
        F.append(step(F[-1], G[:, i]))
    B = [None] * d
    B[d - 1] = G[:, d - 1]
    for i in range(d - 2, 0, -1):
        B[i] = step(G[:, i], B[i + 1])
    out[:, 0] = B[1]
    out[:, d - 1] = F[d - 2]
    for i in range(1, d - 1):
        out[:, i] = step(F[i - 1], B[i + 1])
    return out


def absorb_index(labels, gf: Field) -> np.ndarray:
    """Gather index turning ``alpha_j(a)`` into ``g_j(x) = alpha_j(h_j^-1 x)``."""
    return gf.mul_table[gf.inv_table[np.asarray(labels)]]


def release_index(labels, gf: Field) -> np.ndarray:
    """Gather index turning ``excl_j(x)`` into ``beta_j(a) = excl_j(h_j a)``."""
    return gf.mul_table[np.asarray(labels)]


def _batched(alpha, labels, gf: Field, step, pre=None, post=None):
    alpha = np.asarray(alpha, dtype=float)
    labels = np.asarray(labels)
    single = alpha.ndim == 2
    if single:
        alpha, labels = alpha[None], labels[None]
    if alpha.shape[-1] != gf.q:
        raise CheckNodeError(f"rows have length {alpha.shape[-1]}, field has q = {gf.q}")
    if (labels == 0).any():
        raise CheckNodeError("check labels must be nonzero")
    G = np.take_along_axis(alpha, absorb_index(labels, gf), axis=-1)
    if pre is not None:
        G = pre(G)
    excl = forward_backward(G, step)
    if post is not None:
        excl = post(excl)
    beta = np.take_along_axis(excl, release_index(labels, gf), axis=-1)
    return beta[0] if single else beta


def _require_nonnegative(alpha):
    if (np.asarray(alpha) < 0).any():
        raise CheckNodeError("messages must be nonnegative for this rule")


# ---------------------------------------------------------------------------
# Public per-rule kernels. ``alpha`` holds one incoming row per neighbour,
# shape (d, q) or batched (C, d, q); the result has the same shape and row j
# is the message sent back to neighbour j.
# ---------------------------------------------------------------------------


def check_node_min_sum(alpha, labels, gf: Field, counter=None):
    return _batched(alpha, labels, gf, lambda a, b: minsum_step(a, b, counter))


def check_node_min_max_standard(alpha, labels, gf: Field, counter=None):
    _require_nonnegative(alpha)
    return _batched(alpha, labels, gf, lambda a, b: minmax_step(a, b, counter))


def check_node_min_max_selective(alpha, labels, gf: Field, cot: float, counter=None):
    if not cot >= 2:
        raise CheckNodeError(f"cut-off threshold must be >= 2, got {cot}")
    _require_nonnegative(alpha)
    return _batched(alpha, labels, gf, lambda a, b: selective_minmax_step(a, b, cot, counter))


def check_node_p_norm(alpha, labels, gf: Field, p: float, counter=None):
    """Min over completing configurations of the p-norm of incoming values.

    Evaluated as Min-Sum on ``alpha**p`` with the p-th root taken at the end.
    ``p = inf`` is Min-Max.
    """
    if not p >= 1:
        raise CheckNodeError(f"p must be >= 1, got {p}")
    _require_nonnegative(alpha)
    if np.isinf(p):
        return check_node_min_max_standard(alpha, labels, gf, counter)
    if p == 1:
        return check_node_min_sum(alpha, labels, gf, counter)

    def pre(G):
        if counter is not None:
            counter.add(multiplications=G.size)
        return G**p

    def post(E):
        if counter is not None:
            counter.add(multiplications=E.size)
        return E ** (1.0 / p)

    return _batched(alpha, labels, gf, lambda a, b: minsum_step(a, b, counter), pre, post)


def check_node_sum_product(alpha, labels, gf: Field, counter=None):
    """Probability-domain check node; rows in and out sum to one."""
    a = np.asarray(alpha, dtype=float)
    if (a < 0).any() or not np.allclose(a.sum(axis=-1), 1.0, atol=1e-9):
        raise CheckNodeError("sum-product rows must be nonnegative and sum to 1")
    return _batched(a, labels, gf, lambda x, y: sumprod_step(x, y, counter))


# ---------------------------------------------------------------------------
# Labelled single step, as used when reasoning about one building block.
# ---------------------------------------------------------------------------


class StepReport(NamedTuple):
    values: np.ndarray
    delta1: list
    delta2: list
    pairs: int
    comparisons: int


def min_max_step_selective(f1, f2, h: int, h1: int, h2: int, gf: Field, cot: float = np.inf) -> StepReport:
    """``f(a) = min over h1 a' + h2 a'' = h a of max(f1(a'), f2(a''))``, selectively.

    Returns the values together with the chosen subsets (as symbol lists)
    and the number of pair evaluations and comparisons spent.
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    g1 = f1[absorb_index(h1, gf)][None]
    g2 = f2[absorb_index(h2, gf)][None]
    sets = selective_sets(g1, g2, cot)
    counter = OpCounter()
    out = selective_minmax_step(g1, g2, cot, counter, sets)[0]
    values = out[release_index(h, gf)]
    # masks are over relabelled symbols x = h1 a'; map back to a'
    d1 = sorted(int(gf.mul_table[gf.inv_table[h1], x]) for x in np.flatnonzero(sets.mask1[0]))
    d2 = sorted(int(gf.mul_table[gf.inv_table[h2], x]) for x in np.flatnonzero(sets.mask2[0]))
    return StepReport(values, d1, d2, counter.pairs, counter.comparisons)
