"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line shown in the pytest terminal summary.
Seeds are fixed up front; tolerances are the stated ones.
"""
import itertools
import time

import numpy as np
import pytest

from chaoscodes.codes import CodeSpec, encode_batch
from chaoscodes.decoder import grid_oracle_batch, ml_decode_batch
from chaoscodes.digital import ConvCodeSpec, DigitalSpec, PamSpec, QuantizerSpec, conv_encode, pam_modulate, viterbi_decode_batch
from chaoscodes.harness import SimulationConfig, run_genie, run_sweep, snr_gain
from chaoscodes.maps import tent_forward, tent_inverse

from conftest import ACCEPTANCE_LINES

SEED = 2026
FAMILIES = [
    CodeSpec("tent", 11),
    CodeSpec("tent-turbo", 6, puncture_systematic=True),
    CodeSpec("baker", 3),
    CodeSpec("baker-turbo", 3),
]
FLOOR_3BIT = QuantizerSpec(3).delta ** 2 / 12
FLOOR_6BIT = QuantizerSpec(6).delta ** 2 / 12


def report(num: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] C{num}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


def test_c1_inverse_roundtrip():
    t0 = time.perf_counter()
    y = np.random.default_rng(SEED).uniform(-1, 1, 100_000)
    err = max(np.abs(tent_forward(tent_inverse(y, s)) - y).max() for s in (1, -1))
    elapsed = time.perf_counter() - t0
    report(1, err <= 1e-12 and elapsed < 1.0, f"inverse roundtrip max err {err:.2e} (<= 1e-12), {elapsed:.3f} s (< 1 s)")


def test_c2_noiseless_identity():
    rng = np.random.default_rng(SEED)
    worst = {}
    for spec in FAMILIES:
        src = rng.uniform(-1, 1, (1000, spec.k))
        est, _, _ = ml_decode_batch(spec, encode_batch(spec, src))
        worst[spec.system_id] = float(np.abs(est - src).max())
    ok = all(v < 1e-9 for v in worst.values())
    report(2, ok, "noiseless decode max err " + ", ".join(f"{k}={v:.1e}" for k, v in worst.items()) + " (< 1e-9)")


def test_c3_ml_vs_grid_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    sigma2 = 0.05
    notes, ok = [], True
    for spec in FAMILIES:
        step = 1e-4 if spec.k == 1 else 1e-3
        src = rng.uniform(-1, 1, (100, spec.k))
        R = encode_batch(spec, src) + np.sqrt(sigma2) * rng.standard_normal((100, spec.length))
        est, rss, _ = ml_decode_batch(spec, R)
        gest, grss = grid_oracle_batch(spec, R, step)
        ll_viol = int(np.sum(-rss / (2 * sigma2) < -grss / (2 * sigma2) - 1e-9))
        far = int(np.sum(np.abs(est - gest).max(axis=1) > 2 * step + 1e-12))
        ok &= ll_viol == 0 and far == 0
        notes.append(f"{spec.system_id}: ll<oracle {ll_viol}/100, >2 steps {far}/100")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report(3, ok, "; ".join(notes) + f"; {elapsed:.1f} s (< 60 s)")


def test_c4_genie_bound():
    t0 = time.perf_counter()
    spec = CodeSpec("tent", 6)
    from chaoscodes.channel import avg_symbol_energy

    snr = 10 * np.log10(avg_symbol_energy(spec) / 0.01)
    row = run_genie(SimulationConfig(spec, (snr,), 10_000, SEED)).rows[0]
    elapsed = time.perf_counter() - t0
    ok = abs(row.sigma2 - 0.01) < 1e-12 and row.mse <= 3.125e-4 and elapsed < 10
    report(4, ok, f"genie MSE {row.mse:.3e} at sigma2={row.sigma2:.4g} (<= 3.125e-4), {elapsed:.1f} s (< 10 s)")


@pytest.fixture(scope="module")
def fig2():
    snr = tuple(float(s) for s in range(0, 21))
    tent = run_sweep(SimulationConfig(CodeSpec("tent", 11), snr, 10_000, SEED))
    turbo = run_sweep(SimulationConfig(CodeSpec("tent-turbo", 6, puncture_systematic=True), snr, 10_000, SEED))
    return tent, turbo


def test_c5_fig2_ordering_and_gain(fig2):
    tent, turbo = fig2
    ordered = bool(np.all(turbo.mse < tent.mse))
    gain = snr_gain(turbo.snr, turbo.mse, tent.snr, tent.mse)
    ok = ordered and gain >= 5.0
    report(5, ok, f"rate 1/11, 0-20 dB: turbo < tent at all points: {ordered}; "
                  f"largest SNR gain at equal MSE {gain:.2f} dB (>= 5 dB)")


@pytest.fixture(scope="module")
def fig5():
    snr = tuple(float(s) for s in range(0, 41))
    return {
        "analog": run_sweep(SimulationConfig(CodeSpec("baker-turbo", 3), snr, 10_000, SEED)),
        "q3": run_sweep(SimulationConfig(DigitalSpec(3, 2), snr, 10_000, SEED)),
        "q6": run_sweep(SimulationConfig(DigitalSpec(6, 4), snr, 10_000, SEED)),
    }


def test_c6_quantization_floor():
    q3 = run_sweep(SimulationConfig(DigitalSpec(3, 2), (25.0,), 10_000, SEED)).rows[0].mse
    q6 = run_sweep(SimulationConfig(DigitalSpec(6, 4), (30.0,), 10_000, SEED)).rows[0].mse
    e3, e6 = abs(q3 / FLOOR_3BIT - 1), abs(q6 / FLOOR_6BIT - 1)
    ok = e3 <= 0.05 and e6 <= 0.05
    report(6, ok, f"3-bit @25 dB MSE {q3:.4e} vs {FLOOR_3BIT:.4e} ({e3:.1%}); "
                  f"6-bit @30 dB MSE {q6:.4e} vs {FLOOR_6BIT:.4e} ({e6:.1%}) (within 5%)")


def test_c7_fig5_analog_vs_digital(fig5):
    analog, q3, q6 = fig5["analog"], fig5["q3"], fig5["q6"]
    snr = analog.snr
    at_floor = q3.mse <= 1.05 * FLOOR_3BIT
    onset_idx = next(i for i in range(len(snr)) if at_floor[i:].all())
    onset = snr[onset_idx]
    beats = analog.mse[onset_idx:] < q3.mse[onset_idx:]
    losing = snr[onset_idx:][~beats]
    decreasing = bool(np.all(np.diff(analog.mse) < 0))
    below_q6 = analog.mse[-1] < min(FLOOR_6BIT, q6.mse[-1])
    no_floor = analog.mse[-11] / analog.mse[-1] >= 5.0
    ok = bool(beats.all()) and decreasing and below_q6 and no_floor
    report(7, ok, f"3-bit floor onset {onset:g} dB; baker turbo below 3-bit baseline from onset: {bool(beats.all())}"
                  f" (loses at {losing.tolist()} dB); strictly decreasing: {decreasing}; "
                  f"at {snr[-1]:g} dB MSE {analog.mse[-1]:.2e} < 6-bit floor {FLOOR_6BIT:.2e}: {bool(below_q6)}; "
                  f"drop over last 10 dB x{analog.mse[-11] / analog.mse[-1]:.1f} (>= 5)")


def test_c8_determinism(tmp_path):
    from chaoscodes.cli import main

    same = True
    for system in (CodeSpec("tent-turbo", 6, puncture_systematic=True), CodeSpec("baker-turbo", 3), DigitalSpec(3, 2, frame=500)):
        texts = {run_sweep(SimulationConfig(system, (0.0, 5.0, 10.0), 3000, SEED, threads=t)).csv_text(wall=False)
                 for t in (1, 2, 4, 8)}
        same &= len(texts) == 1
    outs = []
    for t in ("1", "4"):
        path = tmp_path / f"run{t}.csv"
        assert main(["simulate", "--code", "baker", "--n", "3", "--trials", "2000", "--snr-stop", "6",
                     "--snr-step", "3", "--seed", str(SEED), "--threads", t, "--out", str(path)]) == 0
        outs.append(b"\n".join(line.rsplit(b",", 1)[0] for line in path.read_bytes().splitlines()))
    same &= outs[0] == outs[1]
    report(8, same, "CSV identical (wall_seconds excluded) across 1/2/4/8 threads and via CLI: " + str(same))


def test_c9_viterbi_exact():
    n = 10
    sigma2 = 0.1
    msgs = np.array(list(itertools.product((0, 1), repeat=n)))
    rng = np.random.default_rng(SEED)
    mismatches = {}
    for order in (2, 4):
        p = PamSpec(order)
        book = np.stack([pam_modulate(conv_encode(m), p) for m in msgs])
        R = book + np.sqrt(sigma2) * rng.standard_normal(book.shape)
        d = ((R * R).sum(1)[:, None] - 2 * R @ book.T + (book * book).sum(1)[None, :])
        ml = msgs[np.argmin(d, axis=1)]
        vit = viterbi_decode_batch(R, ConvCodeSpec(), p)
        mismatches[order] = int(np.any(vit != ml, axis=1).sum())
    ok = all(v == 0 for v in mismatches.values())
    report(9, ok, "Viterbi vs exhaustive ML over all 1024 10-bit messages at sigma2=0.1: "
                  + ", ".join(f"{o}-PAM mismatches {m}" for o, m in mismatches.items()))
