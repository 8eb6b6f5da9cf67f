import json
import os

import jsonschema
import pytest

from cantorlab import cli
from cantorlab.errors import ConfigError


def _julia_doc(**overrides):
    doc = {
        "measure": {"kind": "quadratic-julia", "c": "3"},
        "level": 10,
        "n_coeffs": 16,
        "precision_bits": 256,
        "routes": ["exact", "lanczos"],
        "diagnostics": ["identities"],
    }
    doc.update(overrides)
    return doc


# --- config validation -------------------------------------------------------


def test_config_rejects_c_below_two(tmp_path):
    doc = _julia_doc(measure={"kind": "quadratic-julia", "c": "1.5"})
    with pytest.raises(ConfigError, match="c must exceed 2"):
        cli.config_from_dict(doc, output_dir=str(tmp_path))


def test_config_schema_rejects_unknown_fields(tmp_path):
    doc = _julia_doc(surprise=1)
    with pytest.raises(ConfigError, match="schema violation"):
        cli.config_from_dict(doc, output_dir=str(tmp_path))


def test_config_exact_route_needs_quadratic(tmp_path):
    doc = {
        "measure": {"kind": "cantor"},
        "level": 8,
        "n_coeffs": 4,
        "routes": ["exact"],
        "diagnostics": [],
    }
    with pytest.raises(ConfigError, match="exact route"):
        cli.config_from_dict(doc, output_dir=str(tmp_path))


def test_config_trust_rule_enforced(tmp_path):
    doc = _julia_doc(level=10, n_coeffs=64, routes=["lanczos"])
    with pytest.raises(ConfigError, match="trusted prefix"):
        cli.config_from_dict(doc, output_dir=str(tmp_path))
    doc["untrusted"] = True
    cfg = cli.config_from_dict(doc, output_dir=str(tmp_path))
    assert cfg.untrusted


def test_config_requires_level_for_lanczos(tmp_path):
    doc = _julia_doc(routes=["lanczos"])
    del doc["level"]
    with pytest.raises(ConfigError, match="level"):
        cli.config_from_dict(doc, output_dir=str(tmp_path))


def test_config_gamma_range_checked(tmp_path):
    doc = {
        "measure": {"kind": "gamma-julia", "gamma_constant": "0.5", "gamma_count": 8},
        "level": 8,
        "n_coeffs": 4,
        "routes": ["lanczos"],
        "diagnostics": [],
    }
    with pytest.raises(ConfigError, match="gamma"):
        cli.config_from_dict(doc, output_dir=str(tmp_path))


# --- full runs ---------------------------------------------------------------


def _manifest(path):
    with open(os.path.join(path, "manifest.json")) as fh:
        return json.load(fh)


_SCHEMA_BY_PREFIX = [
    ("manifest.json", "manifest"),
    ("measure_spec.json", "measure_spec"),
    ("capacity.json", "capacity"),
    ("apscan.json", "apscan"),
    ("dos.json", "dos"),
    ("identities.json", "identities"),
    ("coeffs_", "coeffs"),
    ("crossval_", "crossval"),
    ("report_", "conjecture"),
]


def _validate_all_artifacts(path):
    """Every emitted JSON artifact must validate against its shipped schema."""
    import importlib.resources as res

    schema = json.loads(
        res.files("cantorlab").joinpath("schemas/artifacts.schema.json").read_text()
    )
    checked = 0
    for name in os.listdir(path):
        if not name.endswith(".json"):
            continue
        def_name = next(
            (d for prefix, d in _SCHEMA_BY_PREFIX if name.startswith(prefix)), None
        )
        assert def_name is not None, f"no schema mapped for {name}"
        with open(os.path.join(path, name)) as fh:
            doc = json.load(fh)
        jsonschema.Draft202012Validator(
            {**schema, "$ref": f"#/$defs/{def_name}"}
        ).validate(doc)
        checked += 1
    return checked


def _validate_manifest(doc):
    import importlib.resources as res

    schema = json.loads(
        res.files("cantorlab").joinpath("schemas/artifacts.schema.json").read_text()
    )
    jsonschema.Draft202012Validator(
        {**schema, "$ref": "#/$defs/manifest"}
    ).validate(doc)


def test_run_julia_experiment(tmp_path):
    out = str(tmp_path / "exp")
    doc = _julia_doc(
        level=12,
        n_coeffs=64,
        diagnostics=["identities", "widom", "report"],
    )
    cfg = cli.config_from_dict(doc, output_dir=out)
    assert cli.run(cfg) == cli.EXIT_OK
    manifest = _manifest(out)
    _validate_manifest(manifest)
    assert manifest["status"] == "ok"
    expected = {
        "measure_spec.json",
        "coeffs_exact.csv",
        "coeffs_exact.json",
        "coeffs_lanczos.csv",
        "coeffs_lanczos.json",
        "crossval_exact_vs_lanczos.json",
        "capacity.json",
        "widom.csv",
        "identities.json",
        "report_julia-identities.json",
    }
    assert expected == set(manifest["files"])
    with open(os.path.join(out, "crossval_exact_vs_lanczos.json")) as fh:
        crossval = json.load(fh)
    assert crossval["first_divergence_index"] is None
    assert float(crossval["max_abs_dev_a"]) <= 1e-8
    with open(os.path.join(out, "report_julia-identities.json")) as fh:
        report = json.load(fh)
    assert report["verdict"] == "consistent"
    assert report["inputs"]["measure"]["kind"] == "quadratic-julia"
    assert _validate_all_artifacts(out) == 8
    # manifest completeness: everything on disk is listed with a digest
    on_disk = set(os.listdir(out)) - {"manifest.json"}
    assert on_disk == set(manifest["files"])


def test_run_green_lyapunov_and_dos(tmp_path):
    out = str(tmp_path / "green")
    doc = {
        "measure": {"kind": "quadratic-julia", "c": "3"},
        "level": 10,
        "n_coeffs": 256,
        "precision_bits": 256,
        "routes": ["exact"],
        "diagnostics": ["green-lyapunov", "dos"],
        "grid": [["1", "1"], ["0", "2"]],
        "green_levels": 12,
        "lyapunov_n": 256,
        "dos_orders": [16, 32],
        "threads": 2,
    }
    cfg = cli.config_from_dict(doc, output_dir=out)
    assert cli.run(cfg) == cli.EXIT_OK
    manifest = _manifest(out)
    assert {
        "green.csv",
        "lyapunov.csv",
        "dos.json",
        "dos_n16.csv",
        "dos_n32.csv",
        "reference_measure.csv",
    } <= set(manifest["files"])
    _validate_all_artifacts(out)
    green_lines = open(os.path.join(out, "green.csv")).read().splitlines()
    lyap_lines = open(os.path.join(out, "lyapunov.csv")).read().splitlines()
    assert green_lines[0] == "re_z,im_z,value,uncertainty"
    assert len(green_lines) == len(lyap_lines) == 3
    # the two columns agree to the finite-n tolerance on exterior points
    for gl, ll in zip(green_lines[1:], lyap_lines[1:]):
        g_val = float(gl.split(",")[2])
        l_val = float(ll.split(",")[2])
        assert abs(g_val - l_val) < 5e-3
    with open(os.path.join(out, "dos.json")) as fh:
        dos_doc = json.load(fh)
    assert float(dos_doc["ks_distances"]["16"]) > float(
        dos_doc["ks_distances"]["32"]
    )


def test_run_cantor_fast_pipeline(tmp_path):
    out = str(tmp_path / "cantor")
    doc = {
        "measure": {"kind": "cantor"},
        "level": 15,
        "n_coeffs": 512,
        "precision_bits": 53,
        "routes": ["lanczos"],
        "diagnostics": ["regularity", "apscan", "capacity"],
        "windows": [32],
        "tails": [64, 128],
    }
    cfg = cli.config_from_dict(doc, output_dir=out)
    assert cli.run(cfg) == cli.EXIT_OK
    manifest = _manifest(out)
    assert manifest["status"] == "ok"
    assert {"regularity.csv", "apscan.json", "capacity.json"} <= set(manifest["files"])
    _validate_all_artifacts(out)
    with open(os.path.join(out, "apscan.json")) as fh:
        scans = json.load(fh)
    assert scans["inputs"]["measure"]["kind"] == "cantor"


def test_run_is_deterministic(tmp_path):
    doc = _julia_doc(diagnostics=["identities", "widom"])
    out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
    assert cli.run(cli.config_from_dict(doc, output_dir=out_a)) == 0
    assert cli.run(cli.config_from_dict(doc, output_dir=out_b)) == 0
    files_a = _manifest(out_a)["files"]
    files_b = _manifest(out_b)["files"]
    assert files_a == files_b
    for name in files_a:
        with open(os.path.join(out_a, name), "rb") as fa:
            with open(os.path.join(out_b, name), "rb") as fb:
                assert fa.read() == fb.read()


def test_run_resource_cap_exit_code(tmp_path):
    doc = _julia_doc(level=23, n_coeffs=16, routes=["lanczos"])
    cfg = cli.config_from_dict(doc, output_dir=str(tmp_path / "r"))
    assert cli.run(cfg) == cli.EXIT_RESOURCE
    manifest = _manifest(str(tmp_path / "r"))
    assert manifest["status"] == "failed"
    assert "error" in manifest


def test_run_numerical_failure_partial_manifest(tmp_path):
    # two maps sharing one fixed point produce coincident atoms at every
    # level; the Lanczos route rejects the tie after the measure is built
    doc = {
        "measure": {
            "kind": "ifs",
            "maps": [
                {"ratio": "0.5", "offset": "0"},
                {"ratio": "0.5", "offset": "0"},
            ],
            "weights": ["0.5", "0.5"],
        },
        "level": 6,
        "n_coeffs": 1,
        "precision_bits": 128,
        "routes": ["lanczos"],
        "diagnostics": [],
    }
    out = str(tmp_path / "bad")
    cfg = cli.config_from_dict(doc, output_dir=out)
    assert cli.run(cfg) == cli.EXIT_NUMERICAL
    manifest = _manifest(out)
    assert manifest["status"] == "failed"
    assert "measure_spec.json" in manifest["files"]


# --- main() entry point ------------------------------------------------------


def test_main_run_subcommand(tmp_path):
    config_path = tmp_path / "cfg.json"
    config_path.write_text(json.dumps(_julia_doc()))
    code = cli.main(
        ["run", "--config", str(config_path), "--output-dir", str(tmp_path / "out")]
    )
    assert code == 0
    assert os.path.exists(tmp_path / "out" / "identities.json")


def test_main_config_error_exit_code(tmp_path):
    config_path = tmp_path / "cfg.json"
    config_path.write_text(json.dumps(_julia_doc(measure={"kind": "quadratic-julia", "c": "1.5"})))
    code = cli.main(
        ["run", "--config", str(config_path), "--output-dir", str(tmp_path / "out")]
    )
    assert code == cli.EXIT_CONFIG


def test_main_coeffs_subcommand(tmp_path):
    code = cli.main(
        [
            "coeffs",
            "--kind",
            "quadratic-julia",
            "--c",
            "3",
            "--n",
            "8",
            "--output-dir",
            str(tmp_path / "cc"),
        ]
    )
    assert code == 0
    assert os.path.exists(tmp_path / "cc" / "coeffs_exact.csv")


def test_main_widom_gamma_subcommand(tmp_path):
    code = cli.main(
        [
            "widom",
            "--kind",
            "gamma-julia",
            "--gamma-constant",
            "0.125",
            "--gamma-count",
            "16",
            "--level",
            "10",
            "--n",
            "16",
            "--precision-bits",
            "128",
            "--output-dir",
            str(tmp_path / "wg"),
        ]
    )
    assert code == 0
    assert os.path.exists(tmp_path / "wg" / "widom.csv")
    assert os.path.exists(tmp_path / "wg" / "capacity.json")


def test_env_var_precision(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_PRECISION, "128")
    doc = _julia_doc()
    del doc["precision_bits"]
    doc["diagnostics"] = []
    cfg = cli.config_from_dict(doc, output_dir=str(tmp_path))
    assert cfg.precision_bits == 128
