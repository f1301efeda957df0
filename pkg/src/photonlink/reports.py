"""Plot-ready CSV tables and flat/structured run reports.

Column names and order are part of the stable interface; float cells use
shortest round-trip repr so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from typing import Mapping

from .link import ExperimentReport

__all__ = [
    "format_cell",
    "write_bin_sweep_csv",
    "write_coded_ber_csv",
    "format_key_value_report",
    "write_report",
]

BIN_SWEEP_COLUMNS = ("bin", "n_symbols", "i_max_bits", "hit_prob", "mi_rlow_bits", "mi_rhigh_bits")
CODED_BER_COLUMNS = ("ber_in", "ber_out", "frames", "converged_frac")


def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))  # shortest round-trip, numpy scalars included
    return str(value)


def _write_table(path_or_file, columns, rows) -> None:
    def _write(f):
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(format_cell(v) for v in row) + "\n")

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as f:
            _write(f)


def write_bin_sweep_csv(path_or_file, report: ExperimentReport) -> None:
    rows = [
        (r["bin_size"], r["n_symbols"], r["i_max_bits"], r["hit_prob"],
         r["mi_rlow_bits"], r["mi_rhigh_bits"])
        for r in report.records
    ]
    _write_table(path_or_file, BIN_SWEEP_COLUMNS, rows)


def write_coded_ber_csv(path_or_file, report: ExperimentReport) -> None:
    rows = [
        (r["ber_in"], r["ber_out"], r["frames"], r["converged_frac"])
        for r in report.records
    ]
    _write_table(path_or_file, CODED_BER_COLUMNS, rows)


def format_key_value_report(values: Mapping[str, object]) -> str:
    """Flat key=value lines, one per entry, in the given order."""
    return "".join(f"{key}={format_cell(value)}\n" for key, value in values.items())


def write_report(out_dir, stem: str, values: Mapping[str, object], parameters: dict) -> None:
    """Write <stem>.txt (flat key=value) and <stem>.json (structured) to out_dir."""
    from pathlib import Path

    out = Path(out_dir)
    (out / f"{stem}.txt").write_text(format_key_value_report(values))
    payload = {"parameters": parameters, "results": dict(values)}
    (out / f"{stem}.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
