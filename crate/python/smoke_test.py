"""Smoke test for the compiled `forge` extension.

Run after `pip install --no-build-isolation -e crates/python`.
"""

import json
import pathlib
import tempfile

import forge

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"


def main() -> None:
    p = forge.parse_name("propan-2-ol")
    assert p.heavy_atoms == 4, p
    assert p.tokens[0] == ("prop", "AlkaneStem"), p.tokens
    assert p.difficulty == "Easy"
    assert forge.graphs_equivalent(p.notation, "OC(C)C")
    assert p.metadata_xml == forge.metadata_xml("propan-2-ol")

    assert forge.classify_difficulty("c1ccc2ccccc2c1") == "Medium"
    assert forge.count_heavy_atoms("CC(=O)O") == 4
    assert forge.canonical_form("OCC") == forge.canonical_form("CCO")
    assert forge.filter_candidate(None, "CCO") == "MissingName"
    assert forge.filter_candidate("propan-1-ol", "CC(O)C") == "StructureMismatch"
    assert forge.filter_candidate("ethanol", "OCC") is None
    assert "- IUPAC Name: ethanol" in forge.assemble_prompt("ethanol", "CCO")
    assert forge.parse_llm_output(
        "<description>x</description><non_hydrogen_atom_count>3</non_hydrogen_atom_count>"
    ) == ("x", 3)
    try:
        forge.parse_name("bicyclo[2.2.1]heptane")
    except ValueError as e:
        assert "von Baeyer" in str(e)
    else:
        raise AssertionError("unsupported name parsed")

    with tempfile.TemporaryDirectory() as tmp:
        script = (FIXTURES / "mock_script.tsv").read_text()
        report = json.loads(forge.run_mock_pipeline(str(FIXTURES / "candidates.jsonl"), tmp, script))
        assert report["accepted"] == 96 and report["atomMatchPassed"] == 92, report

    store = forge.ValidationStore()
    store.add_task("s1", "A three-carbon alcohol.", "Easy", "CC(O)C")
    store.run_mock_llm_validation(["CCCO", "CCCO", "CCCO"])
    assert store.state("s1") == "AwaitingHuman"
    view = json.loads(store.claim("s1", "alice"))
    assert view["remaining"] == 3 and "CC(O)C" not in json.dumps(view)
    assert store.submit_attempt("s1", "alice", "CCCO") == (False, 2, "AwaitingHuman")
    assert store.submit_attempt("s1", "alice", "OC(C)C") == (True, 1, "HumanPassed")
    assert json.loads(store.report())["overall"]["humanPassed"] == 1
    print("python smoke test passed")


if __name__ == "__main__":
    main()
