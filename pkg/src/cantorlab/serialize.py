"""Deterministic CSV/JSON serialization for all artifact records.

Numbers are written as decimal strings produced by gmpy2's shortest exact
representation, so re-parsing at the same bit precision reproduces every
value bit for bit.  JSON is emitted with sorted keys and a fixed layout;
identical inputs yield identical bytes.
"""

from __future__ import annotations

import json
import os
import tempfile

from gmpy2 import mpfr

from .bigfloat import from_decimal, to_decimal
from .coeffs import CrossValidationReport
from .diagnostics import APScanReport, ConjectureReport, WidomSeries
from .errors import DomainError
from .jacobi import JacobiCoeffs
from .measures import DiscreteMeasure
from .potential import CapacityEstimate, GreenValue


def jsonable(obj):
    """Recursively convert a record payload to JSON-ready plain data."""
    if isinstance(obj, mpfr):
        return to_decimal(obj)
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise DomainError(f"cannot serialize {type(obj).__name__}")


def dumps_json(payload: dict) -> str:
    return json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- JacobiCoeffs ---------------------------------------------------------


def coeffs_to_csv(coeffs: JacobiCoeffs) -> str:
    lines = ["n,a,b"]
    for n in range(coeffs.length):
        lines.append(f"{n + 1},{to_decimal(coeffs.a[n])},{to_decimal(coeffs.b[n])}")
    return "\n".join(lines) + "\n"


def coeffs_from_csv(text: str, precision_bits: int, provenance: str) -> JacobiCoeffs:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "n,a,b":
        raise DomainError("coefficient CSV must start with the header 'n,a,b'")
    a, b = [], []
    for expected, line in enumerate(lines[1:], start=1):
        n_str, a_str, b_str = line.split(",")
        if int(n_str) != expected:
            raise DomainError(f"coefficient rows out of order at n = {n_str}")
        a.append(from_decimal(a_str, precision_bits))
        b.append(from_decimal(b_str, precision_bits))
    return JacobiCoeffs(tuple(a), tuple(b), precision_bits, provenance)


def coeffs_to_json(coeffs: JacobiCoeffs) -> str:
    return dumps_json(
        {
            "length": coeffs.length,
            "precision_bits": coeffs.precision_bits,
            "provenance": coeffs.provenance,
            "a": list(coeffs.a),
            "b": list(coeffs.b),
        }
    )


def coeffs_from_json(text: str) -> JacobiCoeffs:
    doc = json.loads(text)
    p = int(doc["precision_bits"])
    a = tuple(from_decimal(s, p) for s in doc["a"])
    b = tuple(from_decimal(s, p) for s in doc["b"])
    coeffs = JacobiCoeffs(a, b, p, doc["provenance"])
    if coeffs.length != int(doc["length"]):
        raise DomainError("length field disagrees with the stored sequences")
    return coeffs


# --- measures -------------------------------------------------------------


def measure_to_csv(measure: DiscreteMeasure) -> str:
    lines = ["position,weight"]
    for x, w in zip(measure.positions, measure.weights):
        lines.append(f"{to_decimal(x)},{to_decimal(w)}")
    return "\n".join(lines) + "\n"


def measure_from_csv(text: str, precision_bits: int) -> DiscreteMeasure:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "position,weight":
        raise DomainError("measure CSV must start with the header 'position,weight'")
    pos, wts = [], []
    for line in lines[1:]:
        x_str, w_str = line.split(",")
        pos.append(from_decimal(x_str, precision_bits))
        wts.append(from_decimal(w_str, precision_bits))
    return DiscreteMeasure(tuple(pos), tuple(wts), precision_bits)


# --- series and grids -----------------------------------------------------


def widom_to_csv(series: WidomSeries) -> str:
    lines = ["n,W_n"]
    for n, w in enumerate(series.values, start=1):
        lines.append(f"{n},{to_decimal(w)}")
    return "\n".join(lines) + "\n"


def regularity_to_csv(values) -> str:
    lines = ["n,g_n"]
    for n, g in enumerate(values, start=1):
        lines.append(f"{n},{to_decimal(g)}")
    return "\n".join(lines) + "\n"


def grid_to_csv(rows) -> str:
    """rows: iterable of (re_z, im_z, value, uncertainty) mpfr tuples."""
    lines = ["re_z,im_z,value,uncertainty"]
    for re_z, im_z, value, uncertainty in rows:
        lines.append(
            f"{to_decimal(re_z)},{to_decimal(im_z)},"
            f"{to_decimal(value)},{to_decimal(uncertainty)}"
        )
    return "\n".join(lines) + "\n"


# --- report records -------------------------------------------------------


def crossval_to_json(report: CrossValidationReport) -> str:
    return dumps_json(
        {
            "n_compared": report.n_compared,
            "max_abs_dev_a": report.max_abs_dev_a,
            "max_abs_dev_b": report.max_abs_dev_b,
            "first_divergence_index": report.first_divergence_index,
        }
    )


def capacity_to_json(est: CapacityEstimate) -> str:
    return dumps_json(
        {"value": est.value, "method": est.method, "uncertainty": est.uncertainty}
    )


def apscan_payload(report: APScanReport) -> dict:
    return {
        "epsilon": report.epsilon,
        "window_length": report.window_length,
        "tail_start": report.tail_start,
        "scan_bound": report.scan_bound,
        "almost_periods": list(report.almost_periods),
        "max_gap": report.max_gap,
        "declared_L": report.declared_L,
        "relatively_dense": report.relatively_dense,
        "min_deviation": report.min_deviation,
    }


def apscan_reports_to_json(reports, inputs: dict) -> str:
    return dumps_json(
        {"inputs": inputs, "scans": [apscan_payload(r) for r in reports]}
    )


def conjecture_to_json(report: ConjectureReport) -> str:
    return dumps_json(
        {
            "target": report.target,
            "inputs": report.inputs_summary,
            "findings": report.findings,
            "verdict": report.verdict,
            "criterion": report.criterion,
        }
    )


def green_grid_rows(points, values: list[GreenValue]):
    rows = []
    for z, gv in zip(points, values):
        rows.append((z.real, z.imag, gv.value, gv.uncertainty))
    return rows
