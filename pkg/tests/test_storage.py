import json

import numpy as np
import pytest

from gridopt import NonuniformSignal, NonuniformSignal2D, Spectrum2D
from gridopt.storage import (
    config_digest,
    read_kernel_json,
    read_signal2d_csv,
    read_signal_csv,
    read_target_csv,
    write_kernel_json,
    write_manifest,
    write_signal_csv,
    write_spectrum2d_csv,
)

from _util import random_kernel


def test_kernel_json_round_trip(tmp_path):
    kernel = random_kernel(2, 8, np.random.default_rng(0))
    path = tmp_path / "k.json"
    write_kernel_json(path, kernel)
    back = read_kernel_json(path)
    assert back.W == kernel.W and back.D == kernel.D
    assert np.array_equal(back.samples, kernel.samples)


def test_kernel_json_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"W": 1, "D": 4}))
    with pytest.raises(ValueError):
        read_kernel_json(path)
    path.write_text("{")
    with pytest.raises(ValueError):
        read_kernel_json(path)


def test_signal_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    signal = NonuniformSignal(
        rng.normal(size=9) + 1j * rng.normal(size=9), rng.uniform(0, 9, 9)
    )
    path = tmp_path / "s.csv"
    write_signal_csv(path, signal)
    back = read_signal_csv(path)
    assert np.array_equal(back.times, signal.times)
    assert np.array_equal(back.amplitudes, signal.amplitudes)


def test_signal_csv_header_check(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_signal_csv(path)


def test_signal2d_csv(tmp_path):
    path = tmp_path / "s2.csv"
    path.write_text("tx,ty,u_re,u_im\n0.5,1.5,1,0\n2,3,0,-1\n")
    sig = read_signal2d_csv(path)
    assert isinstance(sig, NonuniformSignal2D)
    assert np.array_equal(sig.times_x, [0.5, 2.0])
    assert np.array_equal(sig.amplitudes, [1.0, -1.0j])


def test_target_csv(tmp_path):
    path = tmp_path / "eta.csv"
    path.write_text("x,eta\n-0.5,0.01\n0,1e-06\n0.25,0.01\n")
    x, eta = read_target_csv(path)
    assert np.array_equal(x, [-0.5, 0.0, 0.25])
    assert eta[1] == 1e-6


def test_spectrum2d_csv(tmp_path):
    rng = np.random.default_rng(2)
    spec = Spectrum2D(3, rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    path = tmp_path / "y2.csv"
    write_spectrum2d_csv(path, spec, gamma=2.0)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "3,2"
    assert len(lines) == 4
    first = [float(v) for v in lines[1].split(",")]
    assert len(first) == 6
    assert first[0] == spec.values[0, 0].real and first[1] == spec.values[0, 0].imag


def test_manifest_digest_is_stable(tmp_path):
    config = {"W": 2, "seed": 3, "gamma": 1.0}
    digest = config_digest(config)
    assert digest == config_digest(dict(reversed(list(config.items()))))
    path = tmp_path / "meta.json"
    manifest = write_manifest(path, "bench", config, 3, ["a.csv"])
    stored = json.loads(path.read_text())
    assert stored == manifest
    assert stored["config_hash"] == digest
    assert stored["output_paths"] == ["a.csv"]
