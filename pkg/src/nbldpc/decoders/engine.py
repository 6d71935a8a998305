"""Flooding-schedule message passing for non-binary LDPC codes."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

from ..channel import Convention, IntrinsicInfo, to_probabilities
from ..code import Code, syndrome
from .checknode import (
    OpCounter,
    absorb_index,
    forward_backward,
    minmax_step,
    minsum_step,
    release_index,
    selective_minmax_step,
    sumprod_step,
)


class DecoderError(ValueError):
    pass


class Rule(str, Enum):
    SUM_PRODUCT = "sp"
    MIN_SUM = "ms"
    MIN_SUM_0 = "ms0"
    MIN_SUM_STAR = "mss"
    P_NORM = "pnorm"
    EUCLIDEAN = "euclid"
    MIN_MAX_STANDARD = "minmax"
    MIN_MAX_SELECTIVE = "minmax-sel"


CONVENTION = {
    Rule.SUM_PRODUCT: Convention.LOGPROB,
    Rule.MIN_SUM: Convention.LOGPROB,
    Rule.MIN_SUM_0: Convention.ZERO_REF,
}


def convention_for(rule: Rule) -> Convention:
    return CONVENTION.get(Rule(rule), Convention.STAR_REF)


@dataclass
class DecoderConfig:
    """Decoder selection and its knobs.

    ``ai`` and ``cot`` only matter for ``MIN_MAX_SELECTIVE``; ``ai=None``
    skips the a-priori rescaling. ``normalize=False`` runs plain Min-Sum
    without re-referencing messages, which is only sensible for a few
    iterations on small graphs.
    """

    rule: Rule = Rule.MIN_MAX_STANDARD
    p: float | None = None
    max_iterations: int = 200
    ai: float | None = 12.0
    cot: float = 31.0
    early_stop: bool = True
    normalize: bool = True

    def __post_init__(self):
        self.rule = Rule(self.rule)
        if self.rule is Rule.EUCLIDEAN:
            self.p = 2.0
        if self.rule is Rule.P_NORM:
            if self.p is None or not self.p >= 1:
                raise DecoderError(f"p-norm decoding needs p >= 1, got {self.p}")
        if self.rule is Rule.MIN_MAX_SELECTIVE:
            if not self.cot >= 2:
                raise DecoderError(f"cot must be >= 2, got {self.cot}")
            if self.ai is not None and not self.ai > 0:
                raise DecoderError(f"ai must be positive, got {self.ai}")
        if self.max_iterations < 1:
            raise DecoderError("max_iterations must be >= 1")

    @property
    def name(self) -> str:
        if self.rule is Rule.P_NORM:
            return f"pnorm:{self.p:g}"
        return self.rule.value

    @classmethod
    def from_name(cls, name: str, **kw) -> "DecoderConfig":
        """Build from a CLI name such as ``minmax-sel`` or ``pnorm:3``."""
        if name.startswith("pnorm:"):
            try:
                p = float(name.split(":", 1)[1])
            except ValueError:
                raise DecoderError(f"bad p-norm spec {name!r}") from None
            return cls(rule=Rule.P_NORM, p=p, **kw)
        try:
            rule = Rule(name)
        except ValueError:
            choices = ", ".join(r.value for r in Rule if r is not Rule.P_NORM)
            raise DecoderError(f"unknown decoder {name!r}; choose from {choices}, pnorm:P") from None
        if rule is Rule.P_NORM:
            raise DecoderError("use pnorm:P to give the norm order")
        return cls(rule=rule, **kw)


@dataclass
class DecodeResult:
    hard_decision: np.ndarray
    a_posteriori: np.ndarray
    iterations_used: int
    converged: bool
    ops: OpCounter
    trace: list = field(default_factory=list)


def hard_decision(row, rule: Rule = Rule.MIN_SUM) -> int:
    """Most likely symbol; ties go to the smallest symbol."""
    row = np.asarray(row)
    return int(np.argmax(row) if Rule(rule) is Rule.SUM_PRODUCT else np.argmin(row))


def a_posteriori_order(row, rule: Rule = Rule.MIN_SUM, tol: float = 1e-9) -> np.ndarray:
    """Symbols sorted most-likely first.

    Values closer than ``tol`` to their sorted predecessor share a tie group;
    inside a group the smaller symbol comes first.
    """
    key = np.asarray(row, dtype=float)
    if Rule(rule) is Rule.SUM_PRODUCT:
        key = -key
    order = np.argsort(key, kind="stable")
    vals = key[order]
    group = np.concatenate([[0], np.cumsum(np.diff(vals) > tol)])
    return order[np.lexsort((order, group))]


def normalize_intrinsic_ai(info: IntrinsicInfo, ai: float) -> IntrinsicInfo:
    """Scale STAR_REF a-priori rows so that their grand mean equals ``ai``."""
    if info.convention is not Convention.STAR_REF:
        raise DecoderError("AI normalization applies to STAR_REF a-priori information")
    mean = float(info.gamma.mean())
    if not mean > 0:
        raise DecoderError("a-priori information is identically zero")
    return info.scaled(ai / mean)


def reference_rows(x: np.ndarray, convention: Convention) -> np.ndarray:
    if convention is Convention.ZERO_REF:
        return x - x[:, :1]
    return x - x.min(axis=1, keepdims=True)


def variable_node_update(gamma_row, betas, convention, normalize: bool = True):
    """Outgoing messages and a-posteriori row of one variable node.

    Args:
        gamma_row: a-priori row (length q).
        betas: incoming check messages, shape (k, q).
        convention: referencing of outgoing messages.

    Returns:
        ``(alphas, a_posteriori)`` with ``alphas`` of shape (k, q).
    """
    gamma_row = np.asarray(gamma_row, dtype=float)
    betas = np.asarray(betas, dtype=float).reshape(-1, gamma_row.size)
    post = gamma_row + betas.sum(axis=0)
    alphas = post[None, :] - betas
    if normalize and len(alphas):
        alphas = reference_rows(alphas, Convention(convention))
    return alphas, post


class _Group:
    """Checks of one degree, packed for batched kernels."""

    def __init__(self, code: Code, checks):
        self.edges = np.stack([code.check_edges[m] for m in checks])
        labels = code.edge_label[self.edges]
        self.absorb = absorb_index(labels, code.field)
        self.release = release_index(labels, code.field)


class Decoder:
    """Reusable decoder bound to one code and one configuration."""

    def __init__(self, code: Code, config: DecoderConfig):
        self.code = code
        self.config = config
        self.q = code.q
        by_deg: dict[int, list[int]] = {}
        for m in range(code.M):
            by_deg.setdefault(len(code.check_rows[m]), []).append(m)
        self.groups = [_Group(code, ms) for _, ms in sorted(by_deg.items())]
        self.var_edge = sp.csr_matrix(
            (np.ones(code.E), (code.edge_var, np.arange(code.E))), shape=(code.N, code.E)
        )

    # -- check nodes -------------------------------------------------------

    def _step(self, counter):
        rule = self.config.rule
        if rule is Rule.SUM_PRODUCT:
            return lambda a, b: sumprod_step(a, b, counter)
        if rule is Rule.MIN_MAX_STANDARD or (rule is Rule.P_NORM and np.isinf(self.config.p)):
            return lambda a, b: minmax_step(a, b, counter)
        if rule is Rule.MIN_MAX_SELECTIVE:
            cot = self.config.cot
            return lambda a, b: selective_minmax_step(a, b, cot, counter)
        return lambda a, b: minsum_step(a, b, counter)

    def check_update(self, alpha: np.ndarray, counter: OpCounter) -> np.ndarray:
        cfg = self.config
        p = cfg.p if cfg.rule in (Rule.P_NORM, Rule.EUCLIDEAN) else None
        powered = p is not None and np.isfinite(p) and p != 1
        step = self._step(counter)
        beta = np.empty_like(alpha)
        for g in self.groups:
            G = np.take_along_axis(alpha[g.edges], g.absorb, axis=-1)
            if powered:
                G = G**p
                counter.add(multiplications=G.size)
            X = forward_backward(G, step)
            if powered:
                X = X ** (1.0 / p)
                counter.add(multiplications=X.size)
            beta[g.edges] = np.take_along_axis(X, g.release, axis=-1)
        return beta

    # -- main loop ---------------------------------------------------------

    def prepare(self, info: IntrinsicInfo) -> np.ndarray:
        cfg = self.config
        want = convention_for(cfg.rule)
        if info.convention is not want:
            raise DecoderError(f"{cfg.name} expects {want.value} a-priori information, got {info.convention.value}")
        if info.gamma.shape != (self.code.N, self.q):
            raise DecoderError(f"a-priori shape {info.gamma.shape} does not match ({self.code.N}, {self.q})")
        if cfg.rule is Rule.MIN_MAX_SELECTIVE and cfg.ai is not None:
            info = normalize_intrinsic_ai(info, cfg.ai)
        return info.gamma.astype(float, copy=True)

    def decode(self, info: IntrinsicInfo, trace: bool = False) -> DecodeResult:
        cfg = self.config
        code = self.code
        q = self.q
        N, E = code.N, code.E
        gamma = self.prepare(info)
        counter = OpCounter()
        sum_product = cfg.rule is Rule.SUM_PRODUCT
        selective = cfg.rule is Rule.MIN_MAX_SELECTIVE
        conv = convention_for(cfg.rule)
        history = []

        if sum_product:
            # work with log-probabilities, exchange probabilities
            prior = to_probabilities(IntrinsicInfo(gamma, conv))
            log_prior = np.log(np.maximum(prior, 1e-300))
            alpha = prior[code.edge_var]
        else:
            alpha = gamma[code.edge_var].copy()
            if selective:
                alpha = np.minimum(alpha, cfg.cot)

        vdeg = code.var_degrees
        it = 0
        for it in range(1, cfg.max_iterations + 1):
            beta = self.check_update(alpha, counter)

            if sum_product:
                logb = np.log(np.maximum(beta, 1e-300))
                logpost = log_prior + self.var_edge @ logb
                la = logpost[code.edge_var] - logb
                la -= la.max(axis=1, keepdims=True)
                alpha = np.exp(la)
                alpha /= alpha.sum(axis=1, keepdims=True)
                post = np.exp(logpost - logpost.max(axis=1, keepdims=True))
                post /= post.sum(axis=1, keepdims=True)
                hard = post.argmax(axis=1)
                counter.add(
                    multiplications=q * (vdeg.sum() + 2 * E + N),
                    additions=q * (E + N),
                    comparisons=(q - 1) * N,
                )
            else:
                post = gamma + self.var_edge @ beta
                alpha = post[code.edge_var] - beta
                counter.add(additions=q * (vdeg.sum() + E))
                if cfg.normalize:
                    alpha = reference_rows(alpha, conv)
                    if conv is Convention.ZERO_REF:
                        counter.add(additions=q * E)
                    else:
                        counter.add(additions=q * E, comparisons=(q - 1) * E)
                if selective:
                    alpha = np.minimum(alpha, cfg.cot)
                    counter.add(comparisons=q * E)
                hard = post.argmin(axis=1)
                counter.add(comparisons=(q - 1) * N)

            counter.mark_iteration()
            if trace:
                history.append(post.copy())
            if cfg.early_stop and not syndrome(code, hard).any():
                break

        converged = not syndrome(code, hard).any()
        return DecodeResult(hard, post, it, converged, counter, history)


def decode(code: Code, info: IntrinsicInfo, config: DecoderConfig, trace: bool = False) -> DecodeResult:
    return Decoder(code, config).decode(info, trace=trace)
