"""Monte Carlo BER/FER and operation-count sweeps.

Every frame draws its randomness from ``SeedSequence([seed, snr_index,
frame_index])``, so results do not depend on how frames are spread over
worker processes. Frames are scored in index order and the sweep at one SNR
stops at the first frame where either ``max_frames`` or ``max_frame_errors``
is reached.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, field, fields

import numpy as np

from .channel import ModulationScheme, awgn, check_cardinality, ebno_to_sigma, get_scheme, intrinsic, modulate
from .code import Code, Encoder, load_code, random_regular_code
from .decoders import Decoder, DecoderConfig, convention_for
from .gf import field_from_q

log = logging.getLogger(__name__)

BLOCK = 16  # frames per work unit; fixed so the partition never depends on workers


class SimError(ValueError):
    pass


@dataclass
class SimConfig:
    code: Code
    decoder: DecoderConfig
    modulation: str = "qam16"
    ebno_db: list = field(default_factory=lambda: [3.0])
    max_frames: int = 1000
    max_frame_errors: int = 100
    seed: int = 0
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if not len(self.ebno_db):
            raise SimError("need at least one Eb/N0 point")
        if self.max_frames < 1:
            raise SimError("max_frames must be >= 1")
        if self.max_frame_errors < 1:
            raise SimError("max_frame_errors must be >= 1")
        if self.workers < 1:
            raise SimError("workers must be >= 1")
        check_cardinality(get_scheme(self.modulation), self.code.q)


@dataclass
class SimRecord:
    ebno_db: float
    decoder: str
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    avg_iterations: float
    additions_per_bit: float
    comparisons_per_bit: float
    multiplications_per_bit: float


@dataclass
class FrameOutcome:
    bit_errors: int
    frame_error: bool
    iterations: int
    additions: int
    comparisons: int
    multiplications: int
    hard_decision: np.ndarray | None = None


class Link:
    """Encoder, modulator, channel and decoder for one code/decoder pair."""

    def __init__(self, code: Code, decoder: DecoderConfig, modulation: str, seed: int = 0):
        self.code = code
        self.config = decoder
        self.scheme: ModulationScheme = get_scheme(modulation)
        check_cardinality(self.scheme, code.q)
        self.encoder = Encoder(code)
        if self.encoder.K < code.N - code.M:
            log.warning("H is rank deficient: K = %d > N - M = %d", self.encoder.K, code.N - code.M)
        if self.encoder.K == 0:
            raise SimError("code has no information symbols")
        self.rate = self.encoder.K / code.N
        self.decoder = Decoder(code, decoder)
        self.seed = seed

    def sigma(self, ebno_db: float) -> float:
        return ebno_to_sigma(ebno_db, self.rate, self.scheme.bits_per_symbol)

    def draw(self, sigma: float, snr_index: int, frame_index: int):
        """Random information symbols, their codeword and the noisy observation."""
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, snr_index, frame_index]))
        info = rng.integers(0, self.code.q, size=self.encoder.K)
        word = self.encoder.encode(info)
        y = awgn(modulate(word, self.scheme), sigma, rng)
        return info, word, y

    def run_frame(self, sigma: float, snr_index: int, frame_index: int, keep_hard: bool = False) -> FrameOutcome:
        info, word, y = self.draw(sigma, snr_index, frame_index)
        prior = intrinsic(y, sigma, self.scheme, convention_for(self.config.rule))
        res = self.decoder.decode(prior)
        est = res.hard_decision[self.encoder.info_positions]
        bit_errors = int(sum(bin(int(v)).count("1") for v in est ^ info))
        return FrameOutcome(
            bit_errors,
            bool((res.hard_decision != word).any()),
            res.iterations_used,
            res.ops.additions,
            res.ops.comparisons,
            res.ops.multiplications,
            res.hard_decision if keep_hard else None,
        )


_WORKER_LINK: Link | None = None


def _init_worker(code, decoder, modulation, seed):
    global _WORKER_LINK
    _WORKER_LINK = Link(code, decoder, modulation, seed)


def _run_block(args):
    sigma, snr_index, start, stop = args
    return [_WORKER_LINK.run_frame(sigma, snr_index, f) for f in range(start, stop)]


def _blocks(max_frames):
    for start in range(0, max_frames, BLOCK):
        yield start, min(start + BLOCK, max_frames)


def _accumulate(outcomes, max_frame_errors):
    """Take outcomes in frame order up to the stopping frame."""
    taken = []
    errors = 0
    for o in outcomes:
        taken.append(o)
        errors += o.frame_error
        if errors >= max_frame_errors:
            return taken, True
    return taken, False


def _record(ebno, name, outcomes, K, p) -> SimRecord:
    frames = len(outcomes)
    bits = frames * K * p
    be = sum(o.bit_errors for o in outcomes)
    fe = sum(o.frame_error for o in outcomes)
    return SimRecord(
        ebno_db=float(ebno),
        decoder=name,
        frames=frames,
        bit_errors=be,
        frame_errors=fe,
        ber=be / bits,
        fer=fe / frames,
        avg_iterations=sum(o.iterations for o in outcomes) / frames,
        additions_per_bit=sum(o.additions for o in outcomes) / bits,
        comparisons_per_bit=sum(o.comparisons for o in outcomes) / bits,
        multiplications_per_bit=sum(o.multiplications for o in outcomes) / bits,
    )


def run_sweep(config: SimConfig) -> list[SimRecord]:
    link = Link(config.code, config.decoder, config.modulation, config.seed)
    records = []
    pool = None
    if config.workers > 1:
        pool = ProcessPoolExecutor(
            config.workers,
            initializer=_init_worker,
            initargs=(config.code, config.decoder, config.modulation, config.seed),
        )
    try:
        for snr_index, ebno in enumerate(config.ebno_db):
            sigma = link.sigma(ebno)
            outcomes: list[FrameOutcome] = []
            if pool is None:
                stream = (link.run_frame(sigma, snr_index, f) for f in range(config.max_frames))
                outcomes, _ = _accumulate(stream, config.max_frame_errors)
            else:
                jobs = [(sigma, snr_index, a, b) for a, b in _blocks(config.max_frames)]
                done = False
                errors_so_far = 0
                # submit in waves so a reached stop rule does not queue the whole sweep
                wave = 4 * config.workers
                for i in range(0, len(jobs), wave):
                    for block in pool.map(_run_block, jobs[i : i + wave]):
                        taken, done = _accumulate(block, config.max_frame_errors - errors_so_far)
                        outcomes.extend(taken)
                        errors_so_far += sum(o.frame_error for o in taken)
                        if done:
                            break
                    if done:
                        break
            rec = _record(ebno, config.decoder.name, outcomes, link.encoder.K, config.code.field.p)
            log.info("Eb/N0 %.2f dB: %d frames, FER %.3g, BER %.3g", ebno, rec.frames, rec.fer, rec.ber)
            records.append(rec)
    finally:
        if pool is not None:
            pool.shutdown()
    return records


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

CSV_FIELDS = [f.name for f in fields(SimRecord)]


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def emit_csv(records) -> str:
    lines = [",".join(CSV_FIELDS)]
    for r in records:
        lines.append(",".join(_fmt(v) for v in astuple(r)))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[SimRecord]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for row in reader:
        vals = {}
        for f in fields(SimRecord):
            raw = row[f.name]
            vals[f.name] = raw if f.type in ("str", str) else (int(raw) if f.type in ("int", int) else float(raw))
        out.append(SimRecord(**vals))
    return out


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def parse_ebno(spec: str) -> list[float]:
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            a, b, step = map(float, parts)
            if step <= 0 or b < a:
                raise SimError(f"bad Eb/N0 range {spec!r}")
            n = int(np.floor((b - a) / step + 1e-9)) + 1
            return [round(a + i * step, 10) for i in range(n)]
    except ValueError:
        pass
    raise SimError(f"Eb/N0 must be 'X' or 'A:B:STEP', got {spec!r}")


def parse_gen(spec: str) -> Code:
    try:
        vals = [int(v) for v in spec.split(",")]
    except ValueError:
        raise SimError(f"--gen expects N,dv,dc,q[,seed], got {spec!r}") from None
    if len(vals) not in (4, 5):
        raise SimError(f"--gen expects N,dv,dc,q[,seed], got {spec!r}")
    N, dv, dc, q = vals[:4]
    seed = vals[4] if len(vals) == 5 else 0
    return random_regular_code(N, dv, dc, field_from_q(q), seed=seed)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nbldpc-sim", description="Monte Carlo simulation of non-binary LDPC decoders")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--code", metavar="PATH", help="NBALIST code file")
    src.add_argument("--gen", metavar="N,dv,dc,q", help="random regular code (optional 5th field: seed)")
    ap.add_argument("--decoder", default="minmax", help="sp, ms, ms0, mss, pnorm:P, euclid, minmax, minmax-sel")
    ap.add_argument("--mod", default="qam16", choices=["bpsk", "qam16"])
    ap.add_argument("--ebno", default="3", help="X or A:B:STEP in dB")
    ap.add_argument("--frames", type=int, default=1000)
    ap.add_argument("--max-fe", type=int, default=100)
    ap.add_argument("--iters", type=int, default=200)
    ap.add_argument("--ai", type=float, default=12.0)
    ap.add_argument("--cot", type=float, default=31.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", metavar="PATH", help="CSV output (default: stdout)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        code = load_code(args.code) if args.code else parse_gen(args.gen)
        dec = DecoderConfig.from_name(args.decoder, max_iterations=args.iters, ai=args.ai, cot=args.cot)
        cfg = SimConfig(
            code=code,
            decoder=dec,
            modulation=args.mod,
            ebno_db=parse_ebno(args.ebno),
            max_frames=args.frames,
            max_frame_errors=args.max_fe,
            seed=args.seed,
            workers=args.workers,
            out=args.out,
        )
        records = run_sweep(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = emit_csv(records)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0
