import csv
import time

import pytest
from hypothesis import given, settings, strategies as st

from lcws import pipeline as pl
from lcws.errors import PipelineStageError
from lcws.pipeline import LinkModel, StageTimes


def test_stage_times_validation():
    with pytest.raises(ValueError):
        StageTimes([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        StageTimes([-1.0], [1.0])
    assert StageTimes([1, 2], [3, 4]).n == 2


def test_sequential_totals():
    t = StageTimes([1, 1, 1, 1], [2, 2, 2, 2], [0.5] * 4)
    assert pl.sequential_total_enc(t) == 12
    assert pl.sequential_total_dec(t) == 10
    assert pl.sequential_total_enc(StageTimes([5], [3])) == 8
    assert pl.sequential_total_enc(StageTimes([0, 0], [0, 0])) == 0


def test_pipelined_enc_transmit_bound():
    # transmit dominates: total collapses to first encryption plus all transmit
    r = pl.pipelined_total_enc(StageTimes([1, 1, 1, 1], [2, 2, 2, 2]))
    assert r.total_pipelined == 9
    assert r.delta_t == 3


def test_pipelined_enc_compute_bound():
    r = pl.pipelined_total_enc(StageTimes([2, 2, 2], [1, 1, 1]))
    assert r.total_pipelined == 7
    assert r.delta_t == 2


def test_pipelined_single_block_no_overlap():
    r = pl.pipelined_total_enc(StageTimes([5], [3]))
    assert r.total_pipelined == 8
    assert r.delta_t == 0


def test_pipelined_dec_both_regimes():
    assert pl.pipelined_total_dec(StageTimes([0] * 4, [2] * 4, [1] * 4)).total_pipelined == 9
    assert pl.pipelined_total_dec(StageTimes([0] * 3, [1] * 3, [2] * 3)).total_pipelined == 7
    assert pl.pipelined_total_dec(StageTimes([0] * 3, [2] * 3, [0] * 3)).total_pipelined == 6


def test_delta_t_sides():
    t = StageTimes([1, 1, 1, 1], [2, 2, 2, 2], [1, 1, 1, 1])
    assert pl.delta_t(t, pl.ENC) == 3
    assert pl.delta_t(t, pl.DEC) == 3
    with pytest.raises(ValueError):
        pl.delta_t(t, "sideways")


def test_uniform_closed_forms():
    for n in range(1, 33):
        for a, b in [(0.5, 2.0), (2.0, 0.5), (1.0, 1.0)]:
            t = StageTimes([a] * n, [b] * n)
            total = pl.pipelined_total_enc(t).total_pipelined
            if b >= a:
                assert total == a + sum(t.tx)
            if a >= b:
                assert total == sum(t.enc) + b


def test_schedule_rows_nondecreasing():
    r = pl.pipelined_total_enc(StageTimes([1, 3, 0.5], [2, 0.5, 4]))
    for prev, cur in zip(r.rows, r.rows[1:]):
        assert cur.enc_end >= prev.enc_end
        assert cur.tx_end >= prev.tx_end


float_list = st.lists(
    st.floats(min_value=0.0, max_value=50.0, allow_nan=False, width=32),
    min_size=1, max_size=12,
)


@settings(max_examples=100, deadline=None)
@given(enc=float_list, tx=float_list)
def test_pipelined_never_exceeds_sequential(enc, tx):
    n = min(len(enc), len(tx))
    t = StageTimes(enc[:n], tx[:n])
    r = pl.pipelined_total_enc(t)
    assert r.total_pipelined <= pl.sequential_total_enc(t) + 1e-9


@settings(max_examples=60, deadline=None)
@given(enc=float_list, tx=float_list, bump=st.floats(min_value=0.01, max_value=10.0),
       data=st.data())
def test_pipelined_monotone_in_each_duration(enc, tx, bump, data):
    n = min(len(enc), len(tx))
    t = StageTimes(enc[:n], tx[:n])
    base = pl.pipelined_total_enc(t).total_pipelined
    i = data.draw(st.integers(min_value=0, max_value=n - 1))
    grown_enc = list(t.enc)
    grown_enc[i] += bump
    assert pl.pipelined_total_enc(StageTimes(grown_enc, t.tx)).total_pipelined >= base
    grown_tx = list(t.tx)
    grown_tx[i] += bump
    assert pl.pipelined_total_enc(StageTimes(t.enc, grown_tx)).total_pipelined >= base


def test_strict_gain_for_positive_durations():
    t = StageTimes([0.3, 0.7, 0.2], [0.4, 0.1, 0.9])
    assert pl.delta_t(t, pl.ENC) > 0


@settings(max_examples=80, deadline=None)
@given(enc=float_list, tx=float_list, dec=float_list)
def test_simulation_matches_recurrence_exactly(enc, tx, dec):
    n = min(len(enc), len(tx), len(dec))
    t = StageTimes(enc[:n], tx[:n], dec[:n])
    for side in (pl.ENC, pl.DEC):
        analytic = pl.pipelined_total_enc(t) if side == pl.ENC else pl.pipelined_total_dec(t)
        simulated = pl.simulate_schedule(t, side)
        assert simulated.total_pipelined == analytic.total_pipelined
        for ra, rs in zip(analytic.rows, simulated.rows):
            assert (ra.enc_start, ra.enc_end, ra.tx_start, ra.tx_end,
                    ra.dec_start, ra.dec_end) == \
                   (rs.enc_start, rs.enc_end, rs.tx_start, rs.tx_end,
                    rs.dec_start, rs.dec_end)


def test_link_model():
    link = LinkModel(bandwidth=1000.0, latency=0.5)
    assert link.transmit_seconds(2000) == 2.5
    with pytest.raises(ValueError):
        LinkModel(bandwidth=0)
    jittery = LinkModel(bandwidth=1000.0, jitter=0.1, jitter_seed=3)
    rng = jittery.make_rng()
    vals = {jittery.transmit_seconds(1000, rng) for _ in range(4)}
    assert len(vals) > 1
    assert all(0.9 <= v <= 1.1 for v in vals)


def test_csv_export(tmp_path):
    r = pl.pipelined_total_enc(StageTimes([1, 2], [3, 4]))
    out = tmp_path / "sched.csv"
    r.write_csv(out)
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["block", "enc_start", "enc_end", "tx_start", "tx_end",
                       "dec_start", "dec_end"]
    assert len(rows) == 3
    assert rows[1][5] == rows[1][6] == ""          # dec columns empty on enc side


# ---------------------------------------------------------------------------
# real executor
# ---------------------------------------------------------------------------

def _sleep_work(duration):
    def work(index, item):
        time.sleep(duration)
        return item
    return work


def test_run_pipeline_serial_matches_sequential_model():
    link = LinkModel(bandwidth=1.0e6, latency=0.04)
    payloads = [b"y" * 20000] * 4                  # tx = 0.06s per block
    res = pl.run_pipeline(payloads, link, pl.ENC, _sleep_work(0.02), overlap=False)
    assert abs(res.total_pipelined - res.total_sequential) / res.total_sequential < 0.05


def test_run_pipeline_overlap_beats_serial():
    link = LinkModel(bandwidth=1.0e6, latency=0.04)
    payloads = [b"y" * 20000] * 4
    fast = pl.run_pipeline(payloads, link, pl.ENC, _sleep_work(0.02), overlap=True)
    slow = pl.run_pipeline(payloads, link, pl.ENC, _sleep_work(0.02), overlap=False)
    assert fast.total_pipelined <= slow.total_pipelined


def test_run_pipeline_throttled_matches_closed_form():
    # transmit far dominates: wall clock approaches ET_1 + TT_M
    link = LinkModel(bandwidth=1.0e6, latency=0.05)
    payloads = [b"y" * 10000] * 5                  # tx = 0.06s per block
    res = pl.run_pipeline(payloads, link, pl.ENC, _sleep_work(0.005))
    measured = pl._measured_stage_times(res.rows, pl.ENC)
    closed_form = measured.enc[0] + sum(measured.tx)
    assert abs(res.total_pipelined - closed_form) / closed_form < 0.10


def test_run_pipeline_decrypt_side():
    link = LinkModel(bandwidth=1.0e6, latency=0.03)
    payloads = [b"y" * 10000] * 4
    res = pl.run_pipeline(payloads, link, pl.DEC, _sleep_work(0.01))
    assert all(r.dec_end >= r.tx_end for r in res.rows)
    assert res.total_pipelined < res.total_sequential


def test_run_pipeline_stage_failure_carries_block_index():
    link = LinkModel(bandwidth=1.0e6)

    def explode(index, item):
        if index == 3:
            raise RuntimeError("boom")
        return item

    with pytest.raises(PipelineStageError) as exc:
        pl.run_pipeline([b"x"] * 5, link, pl.ENC, explode)
    assert exc.value.block_index == 3


def test_single_block_policy_has_zero_delta():
    from lcws import bench as bench_mod
    link = LinkModel(bandwidth=2.0e6, latency=0.05)
    report = bench_mod.run_bench([4096], levels=1, leaves=1, link=link,
                                 runs=1, seed=4, warmup=False)
    row = report.rows[0]
    assert row.enc_delta == 0.0
    assert row.dec_delta == 0.0


def test_run_pipeline_decrypt_stage_failure_does_not_deadlock():
    link = LinkModel(bandwidth=1.0e8)

    def explode(index, item):
        if index == 2:
            raise RuntimeError("dec boom")

    with pytest.raises(PipelineStageError) as exc:
        pl.run_pipeline([b"x" * 10] * 12, link, pl.DEC, explode, queue_capacity=1)
    assert exc.value.block_index == 2
