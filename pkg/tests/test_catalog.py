import json
import math
from pathlib import Path

import numpy as np
import pytest

from qfi_lab import catalog, fields
from qfi_lab.errors import BadParams
from qfi_lab.integrals import evaluate, flow_derivative, independence_rank, poisson_bracket
from qfi_lab.verification import BRACKET_TOL, FLOW_TOL

from conftest import ALL_ENTRIES, annulus_points, states_for

ROOT = Path(__file__).resolve().parents[1]
SUPER = {"V1a", "V1b", "V2a", "V3a", "V3b", "Vs1", "Vs2", "Vs3", "Vs4", "V271", "V272", "V273", "V274"}


def assert_same(u, w):
    for a, b in zip(u, w):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_registry_size():
    assert len(ALL_ENTRIES) == 24
    assert len(set(ALL_ENTRIES)) == 24


def test_classifications(entries):
    for name, e in entries.items():
        assert e.classification in catalog.CLASSIFICATIONS
        expected = "superintegrable" if name in SUPER else ("LFI-only" if name == "V3" else "integrable")
        assert e.classification == expected, name


def test_every_entry_has_hamiltonian_first(entries):
    for e in entries.values():
        assert e.fis[0].name == "H"
        assert set(e.independent) <= set(e.fi_names)
        if e.commuting:
            assert set(e.commuting) <= set(e.fi_names)


def test_vs1_instance():
    e = catalog.instantiate("Vs1", {"k": 1, "b": 1, "c": 1})
    assert set(e.fi_names) == {"H", "Is1a", "Is1b", "Is1c"}


def test_v274_instance():
    e = catalog.instantiate("V274", {"lambda": 2, "c1": 0, "c2": 0, "k1": 1, "k2": 1})
    assert set(e.fi_names) == {"H", "I71a", "I71b", "I73a", "I73b"}
    for s in states_for(e.potential, 10, seed=4):
        for I in e.fis:
            assert abs(flow_derivative(I, e.potential, s)) <= FLOW_TOL * (1 + abs(evaluate(I, s)))


def test_v21_zero_function():
    e = catalog.instantiate("V21", {"F1": "zero"})
    assert "I11" in e.fi_names
    for s in states_for(e.potential, 10, seed=1):
        assert abs(flow_derivative(e.fi("I11"), e.potential, s)) <= FLOW_TOL * (1 + abs(evaluate(e.fi("I11"), s)))


@pytest.mark.parametrize("k", [0.2, 1.0, -0.7])
def test_v21b_reduces_to_v21a(k):
    pot_b, I_b = catalog.v21b(k, "0.5*square")
    a = catalog.instantiate("V21a", {"k": k / 2, "ell": 0.5, "F2": "0.5*square"})
    for x, y in annulus_points(pot_b, 50, seed=2):
        assert_same(fields.evaluate(pot_b, x, y), fields.evaluate(a.potential, x, y))
    for s in states_for(pot_b, 10, seed=3):
        assert abs(flow_derivative(I_b, pot_b, s)) <= FLOW_TOL * (1 + abs(evaluate(I_b, s)))


def test_v24b_is_v24_swapped(entries):
    a, b = entries["V24"].potential, entries["V24b"].potential
    for x, y in annulus_points(a, 50, seed=5):
        vb, gb, hb = fields.evaluate(b, x, y)
        va, ga, ha = fields.evaluate(a, y, x)
        assert_same((vb, gb, hb), (va, ga[::-1], ha[::-1, ::-1]))


@pytest.mark.parametrize("name", ALL_ENTRIES)
def test_flow_derivative_vanishes(entries, name):
    e = entries[name]
    for s in states_for(e.potential, 100, seed=11):
        for I in e.fis:
            assert abs(flow_derivative(I, e.potential, s)) <= FLOW_TOL * (1 + abs(evaluate(I, s))), I.name


@pytest.mark.parametrize("name", ALL_ENTRIES)
def test_bracket_identities(entries, name):
    e = entries[name]
    fis = e.fi_map
    for s in states_for(e.potential, 20, seed=12):
        for b in e.bracket_identities:
            assert abs(b.error(fis, s)) <= BRACKET_TOL, b.describe()


@pytest.mark.parametrize("name", ALL_ENTRIES)
def test_rank_and_commuting_pair(entries, name):
    e = entries[name]
    states = states_for(e.potential, 20, seed=13)
    rank = independence_rank([e.fi_map[n] for n in e.independent], states)
    if e.classification == "superintegrable":
        assert rank == 3
    else:
        assert rank >= 2
    if e.classification != "LFI-only":
        F, G = (e.fi_map[n] for n in e.commuting)
        assert max(abs(poisson_bracket(F, G, s)) for s in states) <= BRACKET_TOL


@pytest.mark.parametrize("name", ALL_ENTRIES)
def test_reference_ics_off_singular_set(entries, name):
    e = entries[name]
    s = e.reference_ics
    assert e.potential.singular_distance(s.x, s.y) >= 0.3
    assert math.hypot(s.vx, s.vy) <= 2.0


def test_unknown_entry_and_params():
    with pytest.raises(BadParams):
        catalog.instantiate("V99")
    with pytest.raises(BadParams):
        catalog.instantiate("Vs1", {"nope": 1})
    with pytest.raises(BadParams):
        catalog.instantiate("V274", {"lambda": 0})


def test_non_finite_param_rejected():
    with pytest.raises(BadParams):
        catalog.instantiate("Vs1", {"k": float("nan")})


def test_list_entries_schema():
    rows = catalog.list_entries()
    assert [r[0] for r in rows] == ALL_ENTRIES
    for _, cls, schema in rows:
        assert cls in catalog.CLASSIFICATIONS
        assert all("name" in p for p in schema)


def test_manifest_matches_file():
    man = catalog.manifest()
    assert man["schema_version"] == 1
    assert [r["name"] for r in man["entries"]] == ALL_ENTRIES
    path = ROOT / "catalog.json"
    assert path.exists(), "regenerate with: qfi-lab list --out catalog.json"
    assert json.loads(path.read_text()) == json.loads(json.dumps(man))


def test_manifest_is_deterministic():
    assert json.dumps(catalog.manifest()) == json.dumps(catalog.manifest())


def test_registry_shared_across_threads():
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(4) as ex:
        out = list(ex.map(lambda n: catalog.instantiate(n).fi_names, ALL_ENTRIES * 2))
    assert out[:24] == out[24:]
    assert np.all([len(x) >= 2 for x in out])
