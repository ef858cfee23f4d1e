"""On-disk formats: kernel JSON, CSV reports and run manifests.

All floating-point CSV fields are written with 17 significant digits so
round-tripping is lossless and reruns are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .error_shape import DeapodizationTable, ErrorShape
from .nufft import NonuniformSignal, NonuniformSignal2D, Spectrum, Spectrum2D
from .slepian import KernelTable

__all__ = [
    "write_kernel_json",
    "read_kernel_json",
    "write_lambda_csv",
    "write_h_csv",
    "write_spectrum_csv",
    "write_spectrum2d_csv",
    "write_signal_csv",
    "read_signal_csv",
    "read_signal2d_csv",
    "read_target_csv",
    "write_trace_csv",
    "write_mae_csv",
    "write_summary_csv",
    "write_error_map_csv",
    "config_digest",
    "write_manifest",
]


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_kernel_json(path, kernel: KernelTable) -> None:
    Path(path).write_text(json.dumps(kernel.as_dict()) + "\n")


def read_kernel_json(path) -> KernelTable:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"corrupt kernel JSON {path}: {exc}") from exc
    return KernelTable.from_dict(data)


def _write_columns(path, header: list, columns: list) -> None:
    columns = [np.asarray(col) for col in columns]
    rows = columns[0].size
    if any(col.size != rows for col in columns):
        raise ValueError("CSV columns must have equal length")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(_fmt(col[i]) for col in columns) + "\n")


def write_lambda_csv(path, shape: ErrorShape) -> None:
    _write_columns(path, ["x", "lambda"], [shape.x, shape.values])


def write_h_csv(path, table: DeapodizationTable) -> None:
    _write_columns(
        path, ["x", "h_re", "h_im"], [table.x, table.values.real, table.values.imag]
    )


def write_spectrum_csv(path, spectrum: Spectrum) -> None:
    _write_columns(
        path,
        ["x", "y_re", "y_im"],
        [spectrum.x, spectrum.values.real, spectrum.values.imag],
    )


def write_spectrum2d_csv(path, spectrum: Spectrum2D, gamma: float) -> None:
    """Row-major M x M complex pairs under a one-line ``M,gamma`` header."""
    with open(path, "w", newline="") as fh:
        fh.write(f"{spectrum.M},{_fmt(gamma)}\n")
        for row in spectrum.values:
            fh.write(",".join(f"{_fmt(v.real)},{_fmt(v.imag)}" for v in row) + "\n")


def write_signal_csv(path, signal: NonuniformSignal) -> None:
    _write_columns(
        path,
        ["t", "u_re", "u_im"],
        [signal.times, signal.amplitudes.real, signal.amplitudes.imag],
    )


def _read_table(path, expected_header: list) -> np.ndarray:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or [c.strip() for c in lines[0].split(",")] != expected_header:
        raise ValueError(f"{path}: expected header {','.join(expected_header)}")
    try:
        data = np.array(
            [[float(cell) for cell in line.split(",")] for line in lines[1:]]
        )
    except ValueError as exc:
        raise ValueError(f"{path}: malformed numeric row: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(expected_header):
        raise ValueError(f"{path}: expected {len(expected_header)} columns")
    return data


def read_signal_csv(path) -> NonuniformSignal:
    data = _read_table(path, ["t", "u_re", "u_im"])
    return NonuniformSignal(amplitudes=data[:, 1] + 1j * data[:, 2], times=data[:, 0])


def read_signal2d_csv(path) -> NonuniformSignal2D:
    data = _read_table(path, ["tx", "ty", "u_re", "u_im"])
    return NonuniformSignal2D(
        amplitudes=data[:, 2] + 1j * data[:, 3],
        times_x=data[:, 0],
        times_y=data[:, 1],
    )


def read_target_csv(path) -> tuple:
    data = _read_table(path, ["x", "eta"])
    return data[:, 0], data[:, 1]


def write_trace_csv(path, trace: list) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("eval,objective\n")
        for evals, value in trace:
            fh.write(f"{int(evals)},{_fmt(value)}\n")


def write_mae_csv(path, x_grid, mae_per_method: dict, order: list) -> None:
    _write_columns(
        path, ["x"] + list(order), [x_grid] + [mae_per_method[name] for name in order]
    )


def write_summary_csv(path, weighted: dict, order: list) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("method,weighted_l1\n")
        for name in order:
            fh.write(f"{name},{_fmt(weighted[name])}\n")


def write_error_map_csv(path, log_map: np.ndarray) -> None:
    log_map = np.asarray(log_map, dtype=float)
    with open(path, "w", newline="") as fh:
        for row in log_map:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def config_digest(config: dict) -> str:
    """SHA-256 of the canonical JSON serialisation of a resolved config."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(path, command: str, config: dict, seed: int, output_paths: list) -> dict:
    """Run manifest; written before the listed outputs are finalised.

    ``output_paths`` should be relative to the manifest's directory so reruns
    into different directories stay byte-identical.
    """
    manifest = {
        "command": command,
        "config_hash": config_digest(config),
        "seed": int(seed),
        "tool_version": __version__,
        "output_paths": [str(p) for p in output_paths],
        "resolved_config": config,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
