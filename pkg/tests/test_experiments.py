from __future__ import annotations

import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacunary_su11.errors import InvalidInputError
from lacunary_su11.experiments import (
    KINDS,
    CoefficientSpec,
    ExperimentConfig,
    generate_coefficients,
    generate_lacunary,
    indicator_tail,
    load_config,
    run_experiment,
    set_energy_inequality,
    tail_increment,
    theorem1_experiment,
    theorem2_experiment,
    theorem3_experiment,
    trend_check,
    window_ladder,
)
from lacunary_su11.metric import c_p


def test_generate_lacunary_examples():
    assert generate_lacunary(2, 5).frequencies == (1, 2, 4, 8, 16)
    assert generate_lacunary(3, 4).frequencies == (1, 3, 9, 27)
    assert generate_lacunary(2.5, 4).frequencies == (1, 3, 8, 20)
    assert generate_lacunary(2, 3, "custom-list", [1, 5, 11]).frequencies == (1, 5, 11)
    with pytest.raises(InvalidInputError):
        generate_lacunary(2, 3, "custom-list", [1, 3, 5])
    with pytest.raises(InvalidInputError):
        generate_lacunary(2, 0)
    with pytest.raises(InvalidInputError):
        generate_lacunary(2, 3, "spiral")


def test_generate_coefficients_examples():
    z = generate_coefficients(CoefficientSpec("zero"), 4)
    assert np.all(z.A == 1) and np.all(z.B == 0) and z.l2
    g = generate_coefficients(CoefficientSpec("geometric-decay", c=0.75, ratio=0.5, seed=1), 6)
    assert np.allclose(np.abs(g.B), 0.75 * 2.0 ** -np.arange(6), rtol=1e-15) and g.l2
    c = generate_coefficients(CoefficientSpec("constant", c=0.5), 3)
    assert np.allclose(np.abs(c.B), 0.5) and not c.l2
    real = generate_coefficients(CoefficientSpec("constant", c=0.5, phases="zero"), 3)
    assert np.all(real.B == 0.5)


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        CoefficientSpec("sawtooth")
    with pytest.raises(InvalidInputError):
        CoefficientSpec("constant", c=-1)
    with pytest.raises(InvalidInputError):
        CoefficientSpec("constant", phases="sometimes")
    with pytest.raises(InvalidInputError):
        CoefficientSpec("constant", seed=2 ** 64)


def test_generation_deterministic_and_prefix_stable():
    spec = CoefficientSpec("random-phase-l2", c=0.5, seed=99)
    a = generate_coefficients(spec, 10)
    b = generate_coefficients(spec, 20)
    assert np.array_equal(a.B, b.B[:10])
    other = generate_coefficients(CoefficientSpec("random-phase-l2", c=0.5, seed=100), 10)
    assert not np.array_equal(a.B, other.B)


specs = st.one_of(
    st.builds(CoefficientSpec, st.sampled_from(["zero", "constant", "random-phase-l2", "random-phase-divergent"]),
              c=st.floats(0.01, 3)),
    st.builds(CoefficientSpec, st.just("geometric-decay"), c=st.floats(0.01, 3), ratio=st.floats(0.0, 0.9999)),
    st.builds(CoefficientSpec, st.just("geometric-decay"), c=st.floats(0.01, 3), ratio=st.floats(1.0, 1.5)),
    # the dyadic trend test resolves power laws with beta outside (1/2, 0.53)
    st.builds(CoefficientSpec, st.just("power-decay"), c=st.floats(0.01, 3),
              beta=st.one_of(st.floats(0, 0.5), st.floats(0.53, 4))),
)


@settings(max_examples=80, deadline=None)
@given(specs)
def test_l2_flag_matches_trend_check(spec):
    assert trend_check(spec) == spec.is_l2


def test_window_ladder():
    assert window_ladder(20, 8, 2)[0] == (0, 8) and window_ladder(20, 8, 2)[-1] == (12, 20)
    assert window_ladder(5, 8, 2) == [(0, 5)]


def _cfg(theorem, spec, **kw):
    return ExperimentConfig(theorem, spec, **kw)


def test_theorem1_zero_coefficients():
    r = theorem1_experiment(_cfg(1, CoefficientSpec("zero"), n_max=10, p_list=(1.0, 3.0)))
    assert all(row["d_p"] == 0 for row in r.rows)
    assert r.summary["cauchy_trend_d1"] == "yes"


def test_theorem1_rows_satisfy_bound_audit():
    cfg = _cfg(1, CoefficientSpec("random-phase-divergent", c=0.6, seed=5), n_max=12, p_list=(0.5, 1.0, 2.5, 4.0))
    r = theorem1_experiment(cfg)
    assert r.summary["audit_ok"]
    for row in r.rows:
        if row["p"] > 2:
            assert row["d_p"] ** row["p"] <= row["expm1_S"] * c_p(row["p"]) * (1 + 1e-6)


def test_theorem1_trend_separation_small():
    good = theorem1_experiment(_cfg(1, CoefficientSpec("geometric-decay", c=0.75, ratio=0.25, seed=1), n_max=16))
    bad = theorem1_experiment(_cfg(1, CoefficientSpec("constant", c=0.5, seed=1), n_max=16))
    assert good.summary["cauchy_trend_d1"] == "yes"
    assert bad.summary["cauchy_trend_d1"] == "no"


def test_theorem1_rejects_small_q():
    with pytest.raises(InvalidInputError):
        theorem1_experiment(_cfg(1, CoefficientSpec("zero"), q=1.5))


def test_theorem2_zero_and_oracle():
    r = theorem2_experiment(_cfg(2, CoefficientSpec("zero"), n_max=6, samples=8))
    assert all(row["rho_prev"] == 0 for row in r.pointwise)
    assert r.summary["converged_fraction"] == 1.0
    spec = CoefficientSpec("geometric-decay", c=0.75, ratio=0.25, seed=4)
    cfg = _cfg(2, spec, n_max=12, samples=16)
    r = theorem2_experiment(cfg)
    tails = tail_increment(generate_coefficients(spec, 12), generate_lacunary(2, 12), 12, 8,
                           spec.torus_samples(16))
    assert r.summary["max_tail"] == pytest.approx(float(np.max(tails)), rel=1e-9)
    assert r.summary["role"] == "theorem"


def test_theorem2_control_marked():
    r = theorem2_experiment(_cfg(2, CoefficientSpec("constant", c=0.5, seed=2), n_max=10, samples=32))
    assert r.summary["role"] == "control" and r.summary["converged_fraction"] < 0.01


def test_theorem3_examples():
    r = theorem3_experiment(_cfg(3, CoefficientSpec("constant", c=0.75, seed=3), q=3, n_max=12, samples=128))
    assert r.summary["converged_fraction"] <= 0.01
    assert r.summary["inequality_ok"] and r.summary["role"] == "theorem"
    control = theorem3_experiment(_cfg(3, CoefficientSpec("geometric-decay", c=0.75, ratio=0.05, seed=3),
                                       q=3, n_max=12, samples=128, window=4))
    assert control.summary["role"] == "control" and control.summary["converged_fraction"] > 0.9
    with pytest.raises(InvalidInputError):
        theorem3_experiment(_cfg(3, CoefficientSpec("zero"), q=3))
    with pytest.raises(InvalidInputError):
        theorem3_experiment(_cfg(3, CoefficientSpec("constant"), q=2))


def test_set_energy_inequality_holds_for_several_families():
    for spec in (CoefficientSpec("constant", c=0.75, seed=8), CoefficientSpec("random-phase-divergent", c=1, seed=8),
                 CoefficientSpec("power-decay", c=0.9, beta=0.3, seed=8)):
        coeffs = generate_coefficients(spec, 10)
        rows = set_energy_inequality(coeffs, generate_lacunary(3, 10), 3, 10)
        assert all(r["ok"] for r in rows)
        assert all(r["lhs"] <= r["integral"] + r["cross_term"] * (1 + 1e-9) for r in rows)


def test_indicator_tail_parseval():
    mask = np.zeros(64, bool)
    mask[:16] = True
    assert indicator_tail(mask, 0) == pytest.approx(0.25)
    assert indicator_tail(mask, 1) == pytest.approx(0.25 - 0.25 ** 2)


def test_determinism_and_threads():
    spec = CoefficientSpec("random-phase-l2", c=0.7, seed=11)
    one = theorem1_experiment(_cfg(1, spec, n_max=12, p_list=(1.0, 3.0), threads=1)).to_json()
    four = theorem1_experiment(_cfg(1, spec, n_max=12, p_list=(1.0, 3.0), threads=4)).to_json()
    assert one == four
    a = theorem2_experiment(_cfg(2, spec, n_max=10, samples=20, threads=3)).to_json()
    b = theorem2_experiment(_cfg(2, spec, n_max=10, samples=20, threads=1)).to_json()
    assert a == b


def test_config_parsing(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[experiment]\ntheorem = 1\nq = 5/2\nn_max = 9\np = 1, 4\n\n"
                    "[coefficients]\nkind = power-decay\nc = 0.5\nbeta = 0.8\nseed = 3\n")
    cfg = load_config(path)
    assert cfg.q == 2.5 and cfg.n_max == 9 and cfg.p_list == (1.0, 4.0)
    assert cfg.spec == CoefficientSpec("power-decay", c=0.5, beta=0.8, seed=3)
    r = run_experiment(cfg)
    assert r.config["q"] == "5/2"


@pytest.mark.parametrize("text", [
    "[experiment]\ntheorem = 1\nbogus = 2\n",
    "[experiment]\ntheorem = 1\n[coefficients]\nshape = 2\n",
    "[experiment]\ntheorem = 1\n[extra]\nx = 1\n",
    "[experiment]\nq = 2\n",
    "[experiment]\ntheorem = 4\n",
    "[experiment]\ntheorem = 1\nn_max = ten\n",
    "[coefficients]\nkind = zero\n",
    "not an ini file",
])
def test_config_rejects_bad_input(tmp_path, text):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(InvalidInputError):
        load_config(path)


def test_missing_config():
    with pytest.raises(InvalidInputError):
        load_config("/nonexistent/config.ini")


def test_report_files(tmp_path):
    r = theorem3_experiment(_cfg(3, CoefficientSpec("constant", c=0.75, seed=3), q=3, n_max=8, samples=4))
    paths = r.write(tmp_path, stem="t3")
    names = sorted(p.name for p in paths)
    assert names == ["t3.json", "t3_inequality.csv", "t3_pointwise.csv"]
    doc = json.loads((tmp_path / "t3.json").read_text())
    assert doc["schema"] == "v1" and doc["config"]["coefficients"]["seed"] == 3
    with open(tmp_path / "t3_pointwise.csv") as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("# ") and '"seed": 3' in lines[0]
    rows = list(csv.reader(lines[1:]))
    assert rows[0] == ["t", "N", "abs_a", "abs_b", "rho_prev"]
    assert len(rows) == 1 + 4 * 8
    assert float(rows[1][0]) == doc["pointwise"][0]["t"]


def test_kinds_listed():
    assert set(KINDS) == {"zero", "constant", "geometric-decay", "power-decay", "random-phase-l2",
                          "random-phase-divergent"}
