"""Benchmark harness: sequential vs pipelined totals over a size sweep.

Per-block encryption and decryption durations are wall-clock measured on
real ciphertext blocks; transmission durations come from the link model
priced on the actual wire sizes.  Totals are then evaluated through the
exact pipeline recurrences, and medians over repeated runs are reported.
"""

from __future__ import annotations

import csv
import gc
import random
import statistics
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from . import pipeline, scheme, wire
from .pipeline import LinkModel, StageTimes
from .policy import AccessTree, parse_policy
from .scheme import DecryptionState, EncryptionContext, PublicKey, SecretKey


def synthetic_policy(levels: int, leaves: int) -> Tuple[str, List[str]]:
    """Benchmark topology: a chain of OR gates, each holding a bundle of
    leaf attributes plus the next gate.

    Returns the policy text and a minimal "spread" attribute set holding
    one leaf per gate, which unlocks every level as its successor block
    arrives (the pipelined-decryption friendly key).
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if levels == 1:
        if leaves != 1:
            raise ValueError("a depth-1 policy holds exactly one leaf")
        return "bench:0001", ["bench:0001"]
    gates = levels - 1
    if leaves < gates:
        raise ValueError(f"need at least {gates} leaves for {levels} levels")
    per_gate = [leaves // gates] * gates
    for i in range(leaves % gates):
        per_gate[i] += 1
    names = iter(f"bench:{i + 1:04d}" for i in range(leaves))
    bundles = [[next(names) for _ in range(count)] for count in per_gate]
    spread_key = [bundle[0] for bundle in bundles]

    text = "(" + " OR ".join(bundles[-1]) + ")"
    for bundle in reversed(bundles[:-1]):
        text = "(" + " OR ".join(bundle) + " OR " + text + ")"
    return text, spread_key


def _median(values: Sequence[float]) -> float:
    return statistics.median(values)


@dataclass(frozen=True)
class BenchRow:
    size: int
    enc_seq: float
    enc_pipe: float
    enc_delta: float
    dec_seq: float
    dec_pipe: float
    dec_delta: float
    max_block_enc: float         # slowest single-block encryption (median)
    min_block_tx: float          # fastest single-block transmission


@dataclass(frozen=True)
class BenchReport:
    levels: int
    leaves: int
    runs: int
    rows: Tuple[BenchRow, ...]

    def __post_init__(self):
        sizes = [r.size for r in self.rows]
        if sizes != sorted(set(sizes)):
            raise ValueError("sizes must be strictly increasing")

    _FIELDS = ["size_bytes", "enc_tx_sequential_s", "enc_tx_pipelined_s",
               "enc_tx_delta_s", "tx_dec_sequential_s", "tx_dec_pipelined_s",
               "tx_dec_delta_s", "max_block_enc_s", "min_block_tx_s"]

    def _values(self, row: BenchRow):
        return [row.size, row.enc_seq, row.enc_pipe, row.enc_delta,
                row.dec_seq, row.dec_pipe, row.dec_delta,
                row.max_block_enc, row.min_block_tx]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self._FIELDS)
            for row in self.rows:
                w.writerow([f"{v:.9f}" if isinstance(v, float) else v
                            for v in self._values(row)])

    def write_dat(self, path) -> None:
        """Gnuplot-style data file: comment header, space-separated columns."""
        with open(path, "w") as fh:
            fh.write("# " + " ".join(self._FIELDS) + "\n")
            for row in self.rows:
                fh.write(" ".join(f"{v:.9f}" if isinstance(v, float) else str(v)
                                  for v in self._values(row)) + "\n")


def measure_stage_times(message: bytes, tree: AccessTree, pk: PublicKey,
                        ctx: EncryptionContext, sk: SecretKey, link: LinkModel,
                        rng: random.Random) -> StageTimes:
    """One full measured pass: encrypt (timed per block), price the wire
    bytes on the link, decrypt in arrival order (timed per block)."""
    clock = time.perf_counter
    enc_times: List[float] = []
    tx_times: List[float] = []
    dec_times: List[float] = []
    encoded: List[bytes] = []

    gen = scheme.encrypt_message(message, tree, pk, ctx, rng)
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        while True:
            t0 = clock()
            try:
                ctb = next(gen)
            except StopIteration:
                break
            data = wire.encode_ctb(ctb, "bench")
            enc_times.append(clock() - t0)
            tx_times.append(link.transmit_seconds(len(data)))
            encoded.append(data)

        state = DecryptionState(sk)
        for i, data in enumerate(encoded):
            t0 = clock()
            ctb, _ = wire.decode_ctb(data)
            state.add_block(ctb)
            if i == len(encoded) - 1:
                out = scheme.assemble_message(state, sk)
            dec_times.append(clock() - t0)
    finally:
        if gc_was_enabled:
            gc.enable()
    if out != message:
        raise RuntimeError("benchmark round trip mismatch")
    return StageTimes(enc_times, tx_times, dec_times)


def run_bench(sizes: Sequence[int], levels: int, leaves: int, link: LinkModel,
              runs: int = 5, seed: Optional[int] = None, warmup: bool = True,
              policy_text: Optional[str] = None,
              key_attrs: Optional[Sequence[str]] = None) -> BenchReport:
    """Sweep message sizes; report median sequential and pipelined totals
    for both protocol sides."""
    rng = random.Random(seed)
    if policy_text is None:
        policy_text, spread = synthetic_policy(levels, leaves)
        key_attrs = key_attrs or spread
    tree = parse_policy(policy_text)
    pk, mk = scheme.setup(rng)
    ctx = scheme.encryption_context(mk)
    sk = scheme.keygen(pk, mk, key_attrs, rng)

    messages = {size: random.Random(rng.randrange(2 ** 32)).randbytes(size)
                for size in sizes}
    if warmup:
        # warm hash and comb caches and the allocator at full buffer size
        measure_stage_times(messages[max(sizes)], tree, pk, ctx, sk, link, rng)

    # run-major order: each run sweeps every size back to back, so bursts of
    # machine noise land on all sizes of a run rather than skewing one size
    by_size = {size: [] for size in sizes}
    for _ in range(runs):
        for size in sizes:
            by_size[size].append(
                measure_stage_times(messages[size], tree, pk, ctx, sk, link, rng))

    rows = []
    for size in sizes:
        samples = by_size[size]
        # representative stage times: per-block medians across the runs, so a
        # scheduler spike hitting one block of one run cannot skew the totals
        n = samples[0].n
        med = StageTimes(
            [_median([t.enc[i] for t in samples]) for i in range(n)],
            [_median([t.tx[i] for t in samples]) for i in range(n)],
            [_median([t.dec[i] for t in samples]) for i in range(n)],
        )
        enc_sched = pipeline.pipelined_total_enc(med)
        dec_sched = pipeline.pipelined_total_dec(med)
        rows.append(BenchRow(
            size=size,
            enc_seq=enc_sched.total_sequential,
            enc_pipe=enc_sched.total_pipelined,
            enc_delta=enc_sched.delta_t,
            dec_seq=dec_sched.total_sequential,
            dec_pipe=dec_sched.total_pipelined,
            dec_delta=dec_sched.delta_t,
            max_block_enc=max(med.enc),
            min_block_tx=min(med.tx),
        ))
    return BenchReport(levels=levels, leaves=leaves, runs=runs, rows=tuple(rows))
