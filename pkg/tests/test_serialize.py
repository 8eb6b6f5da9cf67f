import json
import os

import gmpy2
import jsonschema
import pytest
from hypothesis import given, settings, strategies as st

import cantorlab as cl
from cantorlab import serialize as ser
from cantorlab.bigfloat import mpf, workprec
from cantorlab.errors import DomainError
from cantorlab.potential import CapacityEstimate


def _artifact_validator(def_name):
    import importlib.resources as res

    schema = json.loads(
        res.files("cantorlab").joinpath("schemas/artifacts.schema.json").read_text()
    )
    return jsonschema.Draft202012Validator({**schema, "$ref": f"#/$defs/{def_name}"})


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=53, max_value=300),
    st.lists(
        st.tuples(
            st.floats(min_value=1e-3, max_value=1e3),
            st.floats(min_value=-1e3, max_value=1e3),
        ),
        min_size=1,
        max_size=12,
    ),
)
def test_coeffs_roundtrip_bit_exact(bits, pairs):
    with workprec(bits):
        a = tuple(gmpy2.sqrt(mpf(x)) for x, _ in pairs)
        b = tuple(mpf(y) / 3 for _, y in pairs)
    co = cl.JacobiCoeffs(a, b, bits, "synthetic")
    via_csv = ser.coeffs_from_csv(ser.coeffs_to_csv(co), bits, "synthetic")
    assert via_csv.a == co.a and via_csv.b == co.b
    via_json = ser.coeffs_from_json(ser.coeffs_to_json(co))
    assert via_json.a == co.a and via_json.b == co.b
    assert via_json.precision_bits == bits


def test_coeffs_csv_header_enforced():
    with pytest.raises(DomainError):
        ser.coeffs_from_csv("x,y\n1,2,3\n", 64, "synthetic")


def test_coeffs_json_validates_against_schema(julia3_exact_64):
    doc = json.loads(ser.coeffs_to_json(julia3_exact_64))
    _artifact_validator("coeffs").validate(doc)


def test_measure_roundtrip(orbit14):
    text = ser.measure_to_csv(orbit14)
    back = ser.measure_from_csv(text, 256)
    assert back.positions == orbit14.positions
    assert back.weights == orbit14.weights


def test_widom_and_regularity_csv_shapes(julia3_exact_64):
    cap = CapacityEstimate(mpf(1, 256), "robin-recursion", mpf(0, 256))
    series = cl.widom_series(julia3_exact_64, cap, 4)
    lines = ser.widom_to_csv(series).splitlines()
    assert lines[0] == "n,W_n" and len(lines) == 5
    g = cl.regularity_index(julia3_exact_64, 4)
    lines = ser.regularity_to_csv(g).splitlines()
    assert lines[0] == "n,g_n" and len(lines) == 5


def test_grid_csv_shape():
    with workprec(128):
        rows = [(mpf(1), mpf(2), mpf("0.5"), mpf("1e-9"))]
    lines = ser.grid_to_csv(rows).splitlines()
    assert lines[0] == "re_z,im_z,value,uncertainty"
    assert lines[1].startswith("1.0,2.0,0.5,")


def test_crossval_json_schema(julia3_exact_64):
    report = cl.cross_validate(julia3_exact_64, julia3_exact_64, 8, "1e-10")
    doc = json.loads(ser.crossval_to_json(report))
    _artifact_validator("crossval").validate(doc)
    assert doc["first_divergence_index"] is None


def test_capacity_json_schema():
    est = CapacityEstimate(mpf("0.25", 128), "coefficient-extrapolation", mpf("1e-3", 128))
    doc = json.loads(ser.capacity_to_json(est))
    _artifact_validator("capacity").validate(doc)


def test_apscan_json_schema(julia3_exact_10k):
    reports = [cl.ap_scan(julia3_exact_10k, "0.1", 128, 256, k_max=512)]
    doc = json.loads(ser.apscan_reports_to_json(reports, {"n_coeffs": 10240}))
    _artifact_validator("apscan").validate(doc)


def test_conjecture_json_schema(julia3_exact_64):
    report = cl.conjecture_report("julia-identities", coeffs=julia3_exact_64, c=3)
    doc = json.loads(ser.conjecture_to_json(report))
    _artifact_validator("conjecture").validate(doc)
    assert doc["verdict"] == "consistent"


def test_json_output_is_deterministic(julia3_exact_64):
    a = ser.coeffs_to_json(julia3_exact_64)
    b = ser.coeffs_to_json(julia3_exact_64)
    assert a == b


def test_atomic_write(tmp_path):
    target = tmp_path / "out.txt"
    ser.atomic_write_text(str(target), "payload")
    assert target.read_text() == "payload"
    # no temp droppings
    assert os.listdir(tmp_path) == ["out.txt"]
