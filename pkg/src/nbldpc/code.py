"""Non-binary LDPC codes as labelled Tanner graphs.

A :class:`Code` is stored row-wise: for each check node the ordered list of
``(variable index, label)`` pairs. Edge arrays (``edge_var``, ``edge_check``,
``edge_label``) are derived once and enumerate edges check by check, which is
the layout the decoders use for their message arrays.

The NBALIST text format::

    N M q
    dv_max dc_max
    <N variable-node degrees>
    <M check-node degrees>
    <M rows of "n1 h1 n2 h2 ...", 1-based variable indices, labels in [1, q)>

``#`` starts a comment. :func:`serialize_code_file` appends a comment naming
the primitive polynomial of the field.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from itertools import product

import numpy as np

from .gf import Field, FieldError, field_from_q


class CodeError(ValueError):
    """Invalid code structure or an impossible construction request."""


class ParseError(CodeError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class Code:
    """Sparse q-ary parity-check matrix.

    Args:
        N: number of variable nodes.
        field: the Galois field of the code.
        check_rows: one sequence of ``(n, h)`` pairs per check node, with
            0-based variable indices and nonzero labels.
    """

    def __init__(self, N: int, field: Field, check_rows):
        self.N = int(N)
        self.field = field
        rows = []
        for m, row in enumerate(check_rows):
            row = sorted((int(n), int(h)) for n, h in row)
            rows.append(tuple(row))
        self.check_rows = tuple(rows)
        self.M = len(rows)
        self._validate()

        self.edge_check = np.array([m for m, row in enumerate(rows) for _ in row], dtype=np.int64)
        self.edge_var = np.array([n for row in rows for n, _ in row], dtype=np.int64)
        self.edge_label = np.array([h for row in rows for _, h in row], dtype=np.int64)
        self.E = len(self.edge_var)
        starts = np.cumsum([0] + [len(r) for r in rows])
        self.check_edges = [np.arange(starts[m], starts[m + 1]) for m in range(self.M)]
        order = np.argsort(self.edge_var, kind="stable")
        var_deg = np.bincount(self.edge_var, minlength=self.N)
        vstarts = np.concatenate([[0], np.cumsum(var_deg)])
        self.var_edges = [order[vstarts[n] : vstarts[n + 1]] for n in range(self.N)]
        self.var_adjacency = tuple(tuple(int(self.edge_check[e]) for e in self.var_edges[n]) for n in range(self.N))
        self.var_degrees = var_deg
        self.check_degrees = np.array([len(r) for r in rows], dtype=np.int64)

    def _validate(self):
        q = self.field.q
        seen_var = np.zeros(self.N, dtype=bool)
        for m, row in enumerate(self.check_rows):
            if len(row) < 2:
                raise CodeError(f"check {m} has degree {len(row)} < 2")
            vars_ = [n for n, _ in row]
            if len(set(vars_)) != len(vars_):
                raise CodeError(f"check {m} connects to a variable twice")
            for n, h in row:
                if not 0 <= n < self.N:
                    raise CodeError(f"check {m}: variable index {n} out of range")
                if not 0 < h < q:
                    raise CodeError(f"check {m}: label {h} is not a nonzero element of GF({q})")
                seen_var[n] = True
        if not seen_var.all():
            raise CodeError(f"variable {int(np.argmin(seen_var))} has degree 0")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def H(self) -> np.ndarray:
        """Dense ``M x N`` parity-check matrix."""
        H = np.zeros((self.M, self.N), dtype=np.int64)
        H[self.edge_check, self.edge_var] = self.edge_label
        return H

    def __eq__(self, other):
        return (
            isinstance(other, Code)
            and self.N == other.N
            and self.field == other.field
            and self.check_rows == other.check_rows
        )

    def __repr__(self):
        return f"Code(N={self.N}, M={self.M}, q={self.q}, E={self.E})"

    def design_rate(self) -> float:
        return 1.0 - self.M / self.N


# ---------------------------------------------------------------------------
# NBALIST
# ---------------------------------------------------------------------------

_POLY_RE = re.compile(r"#\s*primitive polynomial\s+(0x[0-9a-fA-F]+)")


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def normalize_code_text(text: str) -> str:
    """Drop comments and blank lines and collapse runs of whitespace."""
    lines = [" ".join(_strip(l).split()) for l in text.splitlines()]
    return "\n".join(l for l in lines if l) + "\n"


def parse_code_file(text: str) -> Code:
    """Parse NBALIST text into a :class:`Code`.

    Raises:
        ParseError: on any structural problem, naming the offending line.
    """
    content = []
    poly = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        mpoly = _POLY_RE.search(raw)
        if mpoly:
            poly = (lineno, int(mpoly.group(1), 16))
        body = _strip(raw)
        if body:
            content.append((lineno, body))

    def ints(lineno, body, what):
        try:
            return [int(tok) for tok in body.split()]
        except ValueError:
            raise ParseError(lineno, f"non-integer token in {what}") from None

    if len(content) < 4:
        raise ParseError(content[-1][0] if content else 1, "truncated header")
    lineno, body = content[0]
    head = ints(lineno, body, "header")
    if len(head) != 3:
        raise ParseError(lineno, "header must be 'N M q'")
    N, M, q = head
    if N < 1 or M < 1:
        raise ParseError(lineno, "N and M must be positive")
    try:
        gf = field_from_q(q)
    except FieldError as exc:
        raise ParseError(lineno, str(exc)) from None
    if poly is not None and poly[1] != gf.primitive_poly:
        raise ParseError(poly[0], f"primitive polynomial {poly[1]:#x} differs from {gf.primitive_poly:#x}")

    lineno, body = content[1]
    maxes = ints(lineno, body, "max degrees")
    if len(maxes) != 2:
        raise ParseError(lineno, "expected 'dv_max dc_max'")
    lineno_v, body = content[2]
    vdeg = ints(lineno_v, body, "variable degrees")
    if len(vdeg) != N:
        raise ParseError(lineno_v, f"expected {N} variable degrees, got {len(vdeg)}")
    lineno_c, body = content[3]
    cdeg = ints(lineno_c, body, "check degrees")
    if len(cdeg) != M:
        raise ParseError(lineno_c, f"expected {M} check degrees, got {len(cdeg)}")
    if max(vdeg) != maxes[0] or max(cdeg) != maxes[1]:
        raise ParseError(lineno, "max degrees disagree with the degree lists")

    rows_text = content[4:]
    if len(rows_text) != M:
        where = rows_text[M][0] if len(rows_text) > M else (rows_text[-1][0] if rows_text else lineno_c)
        raise ParseError(where, f"expected {M} check rows, got {len(rows_text)}")
    rows = []
    counts = np.zeros(N, dtype=np.int64)
    for m, (lineno, body) in enumerate(rows_text):
        vals = ints(lineno, body, "check row")
        if len(vals) % 2:
            raise ParseError(lineno, "check row must hold (index, label) pairs")
        pairs = list(zip(vals[0::2], vals[1::2]))
        if len(pairs) != cdeg[m]:
            raise ParseError(lineno, f"check {m + 1} has {len(pairs)} entries, declared degree {cdeg[m]}")
        seen = set()
        row = []
        for n, h in pairs:
            if not 1 <= n <= N:
                raise ParseError(lineno, f"variable index {n} out of range 1..{N}")
            if h == 0:
                raise ParseError(lineno, "zero label")
            if not 0 < h < q:
                raise ParseError(lineno, f"label {h} out of range 1..{q - 1}")
            if n in seen:
                raise ParseError(lineno, f"duplicate variable index {n}")
            seen.add(n)
            counts[n - 1] += 1
            row.append((n - 1, h))
        rows.append(row)
    if not np.array_equal(counts, vdeg):
        bad = int(np.flatnonzero(counts != np.asarray(vdeg))[0])
        raise ParseError(lineno_v, f"variable {bad + 1} declared degree {vdeg[bad]}, found {counts[bad]}")
    try:
        return Code(N, gf, rows)
    except CodeError as exc:
        raise ParseError(rows_text[0][0], str(exc)) from None


def serialize_code_file(code: Code) -> str:
    lines = [
        f"{code.N} {code.M} {code.q}",
        f"{int(code.var_degrees.max())} {int(code.check_degrees.max())}",
        " ".join(str(int(d)) for d in code.var_degrees),
        " ".join(str(int(d)) for d in code.check_degrees),
    ]
    for row in code.check_rows:
        lines.append(" ".join(f"{n + 1} {h}" for n, h in row))
    lines.append(f"# primitive polynomial {code.field.primitive_poly:#x}")
    return "\n".join(lines) + "\n"


def load_code(path) -> Code:
    with open(path) as fh:
        return parse_code_file(fh.read())


def save_code(code: Code, path):
    with open(path, "w") as fh:
        fh.write(serialize_code_file(code))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def random_regular_code(N: int, dv: int, dc: int, field: Field, seed: int = 0, max_tries: int = 1000) -> Code:
    """(dv, dc)-regular code from a seeded random socket permutation.

    Permutations that put two edges between the same pair of nodes are
    rejected and redrawn. Labels are uniform over the nonzero elements.
    """
    if dc < 2 or dv < 1:
        raise CodeError("need dv >= 1 and dc >= 2")
    if (N * dv) % dc:
        raise CodeError(f"N*dv = {N * dv} is not divisible by dc = {dc}")
    M = N * dv // dc
    if dc > N:
        raise CodeError("check degree exceeds the number of variables")
    rng = np.random.default_rng(seed)
    sockets = np.repeat(np.arange(N), dv)
    for _ in range(max_tries):
        perm = rng.permutation(sockets).reshape(M, dc)
        if all(len(set(r)) == dc for r in perm.tolist()):
            break
    else:
        raise CodeError(f"no multi-edge-free graph after {max_tries} attempts")
    labels = rng.integers(1, field.q, size=(M, dc))
    rows = [list(zip(perm[m].tolist(), labels[m].tolist())) for m in range(M)]
    return Code(N, field, rows)


def random_tree_code(n_vars: int, field: Field, seed: int = 0, max_check_degree: int = 3, max_depth: int | None = None) -> Code:
    """Random cycle-free Tanner graph.

    Grows from a root variable: each new check hangs off an existing
    variable and brings 1..max_check_degree-1 fresh variables. ``max_depth``
    bounds the number of check layers below the root.
    """
    if n_vars < 2:
        raise CodeError("a tree code needs at least two variables")
    rng = np.random.default_rng(seed)
    depth = [0]
    rows = []
    while len(depth) < n_vars:
        open_vars = [v for v, d in enumerate(depth) if max_depth is None or d < max_depth]
        if not open_vars:
            break
        v = int(rng.choice(open_vars))
        k = int(rng.integers(1, max_check_degree))
        k = min(k, n_vars - len(depth))
        new = list(range(len(depth), len(depth) + k))
        depth.extend([depth[v] + 1] * k)
        members = [v] + new
        labels = rng.integers(1, field.q, size=len(members))
        rows.append(list(zip(members, labels.tolist())))
    return Code(len(depth), field, rows)


def is_tree(code: Code) -> bool:
    """True iff the Tanner graph is connected and cycle-free."""
    if code.E != code.N + code.M - 1:
        return False
    return len(_var_distances(code, 0)) == code.N


def _var_distances(code: Code, start: int) -> dict[int, int]:
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for m in code.var_adjacency[v]:
                for u, _ in code.check_rows[m]:
                    if u not in dist:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
        frontier = nxt
    return dist


def var_diameter(code: Code) -> int:
    """Largest variable-to-variable distance, counted in checks crossed."""
    return max(max(_var_distances(code, v).values()) for v in range(code.N))


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------


def syndrome(code: Code, word) -> np.ndarray:
    word = np.asarray(word, dtype=np.int64)
    if word.shape != (code.N,):
        raise CodeError(f"word length {word.shape} does not match N = {code.N}")
    if word.min(initial=0) < 0 or word.max(initial=0) >= code.q:
        raise CodeError("word contains symbols outside the field")
    terms = code.field.mul_table[code.edge_label, word[code.edge_var]]
    out = np.zeros(code.M, dtype=np.int64)
    np.bitwise_xor.at(out, code.edge_check, terms)
    return out


def is_codeword(code: Code, word) -> bool:
    return not syndrome(code, word).any()


@dataclass
class Systematic:
    """Reduced row echelon form of H over GF(q).

    Row ``r`` of ``R`` reads ``x[pivots[r]] + sum_f R[r, f] x[f] = 0`` over
    the free columns, so ``x[pivots[r]] = sum_f R[r, f] x[f]`` in
    characteristic two. ``permutation`` lists pivot columns then free ones.
    """

    rank: int
    pivots: np.ndarray
    free: np.ndarray
    R: np.ndarray
    permutation: np.ndarray = dc_field(init=False)

    def __post_init__(self):
        self.permutation = np.concatenate([self.pivots, self.free])


def row_reduce(code: Code) -> Systematic:
    """Gauss-Jordan elimination, pivoting on the first nonzero entry."""
    gf = code.field
    A = code.H.copy()
    M, N = A.shape
    pivots = []
    r = 0
    for col in range(N):
        if r == M:
            break
        nz = np.flatnonzero(A[r:, col])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r] = gf.mul_table[gf.inv_table[A[r, col]], A[r]]
        for i in np.flatnonzero(A[:, col]):
            if i != r:
                A[i] ^= gf.mul_table[A[i, col], A[r]]
        pivots.append(col)
        r += 1
    pivots = np.array(pivots, dtype=np.int64)
    free = np.setdiff1d(np.arange(N), pivots)
    return Systematic(rank=r, pivots=pivots, free=free, R=A[:r][:, free])


class Encoder:
    """Maps ``K = N - rank`` information symbols onto a codeword.

    Information symbols occupy the free columns of the echelon form.
    """

    def __init__(self, code: Code):
        self.code = code
        self.sys = row_reduce(code)
        self.K = code.N - self.sys.rank

    @property
    def info_positions(self) -> np.ndarray:
        return self.sys.free

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.int64)
        single = info.ndim == 1
        info = np.atleast_2d(info)
        if info.shape[1] != self.K:
            raise CodeError(f"expected {self.K} information symbols, got {info.shape[1]}")
        out = np.zeros((info.shape[0], self.code.N), dtype=np.int64)
        out[:, self.sys.free] = info
        if self.sys.rank and self.K:
            prods = self.code.field.mul_table[self.sys.R[None, :, :], info[:, None, :]]
            out[:, self.sys.pivots] = np.bitwise_xor.reduce(prods, axis=2)
        return out[0] if single else out


def count_codewords(code: Code) -> int:
    return code.q ** (code.N - row_reduce(code).rank)


def enumerate_codewords(code: Code, limit: int = 100_000) -> np.ndarray:
    """All codewords, one per row, in lexicographic order.

    Raises:
        CodeError: if the code has more than ``limit`` codewords.
    """
    enc = Encoder(code)
    count = code.q**enc.K
    if count > limit:
        raise CodeError(f"code has {count} codewords, above the limit of {limit}")
    if enc.K == 0:
        return np.zeros((1, code.N), dtype=np.int64)
    info = np.array(list(product(range(code.q), repeat=enc.K)), dtype=np.int64)
    words = enc.encode(info)
    order = np.lexsort(words.T[::-1])
    return words[order]
