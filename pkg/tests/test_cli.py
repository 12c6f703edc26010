"""Command-line verbs, exit codes, and matrix file formats."""

import json

import numpy as np
import pytest

from caustyk.causobj import cup_state
from caustyk.cli import main
from caustyk.cpmaps import ChoiMap
from caustyk.errors import InconsistencyError, ShapeMismatchError
from caustyk.io import (choi_from_json, complex_to_json, json_to_complex,
                        load_choi, load_matrix, load_pair, pair_from_json,
                        save_choi, save_matrix, save_pair)
from caustyk.sampling import (random_cptp, random_decomp_pair, rng_from,
                              rotate_pair)
from caustyk.signalling import recompose


@pytest.fixture
def rng():
    return rng_from(7_2026)


def run(capsys, *argv):
    """Invoke the entry point and parse whatever JSON it printed."""
    code = main(list(argv))
    out = capsys.readouterr().out
    doc = json.loads(out) if out.strip().startswith("{") else out
    return code, doc


def identity_choi() -> ChoiMap:
    return ChoiMap((2,), (2,), cup_state(2).astype(complex))


def swap_choi() -> ChoiMap:
    sw = np.eye(4)[:, [0, 2, 1, 3]]
    big = np.kron(sw, np.eye(4))
    return ChoiMap((2, 2), (2, 2),
                   (big @ cup_state(4) @ big.conj().T).astype(complex))


def wire_comb_choi() -> ChoiMap:
    """Two independent identity wires, party layout (a_out,b_out,a_in,b_in)."""
    j = np.kron(cup_state(2), cup_state(2)).reshape((2,) * 8)
    j = j.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)
    return ChoiMap((2, 2), (2, 2), j.astype(complex))


def inconsistent_comb_choi() -> ChoiMap:
    """Passes the one-way marginal test but is not positive."""
    base = wire_comb_choi().J
    q = np.zeros((8, 8))
    q[0, 0] = 1.0
    p = np.kron(q, np.diag([1.0, -1.0])).reshape((2,) * 8)
    # kron row order (a_out, a_in, b_in, b_out) -> (a_out, b_out, a_in, b_in)
    p = p.transpose(0, 3, 1, 2, 4, 7, 5, 6).reshape(16, 16)
    return ChoiMap((2, 2), (2, 2), base + 0.3 * p, validate=False)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

class TestMatrixIO:
    def test_complex_json_round_trip(self, rng):
        m = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
        back = json_to_complex(complex_to_json(m))
        assert np.array_equal(back, m)

    def test_bad_entries_rejected(self):
        with pytest.raises(ShapeMismatchError):
            json_to_complex([[1.0, 2.0], [3.0, 4.0]])

    def test_json_file_round_trip(self, tmp_path, rng):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        path = tmp_path / "m.json"
        save_matrix(str(path), m)
        assert np.allclose(load_matrix(str(path)), m)

    def test_bare_list_accepted(self, tmp_path):
        path = tmp_path / "bare.json"
        path.write_text(json.dumps([[[1.0, 0.0], [0.0, -2.0]],
                                    [[0.0, 2.0], [3.0, 0.0]]]))
        m = load_matrix(str(path))
        assert m[0, 1] == -2j and m[1, 0] == 2j

    def test_raw_round_trip(self, tmp_path, rng):
        m = rng.normal(size=(2, 6)) + 1j * rng.normal(size=(2, 6))
        path = tmp_path / "m.raw"
        save_matrix(str(path), m, fmt="raw")
        meta = json.loads((tmp_path / "m.raw.dims").read_text())
        assert meta["shape"] == [2, 6]
        assert np.array_equal(load_matrix(str(path), fmt="raw"), m)

    def test_raw_missing_sidecar(self, tmp_path):
        path = tmp_path / "m.raw"
        path.write_bytes(b"\0" * 64)
        with pytest.raises(FileNotFoundError):
            load_matrix(str(path), fmt="raw")

    def test_raw_size_mismatch(self, tmp_path):
        path = tmp_path / "m.raw"
        save_matrix(str(path), np.eye(2, dtype=complex), fmt="raw")
        (tmp_path / "m.raw.dims").write_text(json.dumps({"shape": [3, 3]}))
        with pytest.raises(ShapeMismatchError):
            load_matrix(str(path), fmt="raw")


class TestChoiIO:
    def test_json_round_trip(self, tmp_path, rng):
        cm = random_cptp(rng, 2, 3)
        cm = ChoiMap((3,), (2,), cm.J)
        path = tmp_path / "c.json"
        save_choi(str(path), cm)
        back = load_choi(str(path))
        assert back.in_dims == (2,) and back.out_dims == (3,)
        assert np.allclose(back.J, cm.J)

    def test_raw_round_trip(self, tmp_path):
        cm = swap_choi()
        path = tmp_path / "c.raw"
        save_choi(str(path), cm, fmt="raw")
        meta = json.loads((tmp_path / "c.raw.dims").read_text())
        assert meta["in_dims"] == [2, 2] and meta["out_dims"] == [2, 2]
        back = load_choi(str(path), fmt="raw")
        assert np.allclose(back.J, cm.J)

    def test_validation_is_opt_in(self):
        doc = {"in_dims": [2], "out_dims": [2],
               "J": complex_to_json(-np.eye(4))}
        cm = choi_from_json(doc)
        assert cm.d_in == 2
        with pytest.raises(InconsistencyError):
            choi_from_json(doc, validate=True)


class TestPairIO:
    def test_round_trip(self, tmp_path, rng):
        pair = random_decomp_pair(rng, 2, 2)
        path = tmp_path / "p.json"
        save_pair(str(path), pair)
        back = load_pair(str(path))
        assert back.z_dim == pair.z_dim
        assert np.allclose(back.rho.J, pair.rho.J)
        assert np.allclose(back.sigma.J, pair.sigma.J)
        assert np.allclose(recompose(back).J, recompose(pair).J)


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

class TestTypeinfo:
    def test_first_order_scalars(self, capsys):
        code, doc = run(capsys, "typeinfo", "FO(2)")
        assert code == 0
        assert doc["dim"] == 2
        assert doc["first_order"] is True
        assert doc["alpha"] == pytest.approx(0.5)
        assert doc["flat_lambda"] == pytest.approx(0.5)

    def test_channel_hom(self, capsys):
        code, doc = run(capsys, "typeinfo", "[FO(2),FO(2)]")
        assert code == 0
        assert doc["state_rank"] == 12
        assert doc["first_order"] is False
        assert doc["factor_dims"] == [2, 2]

    def test_composite_factors(self, capsys):
        code, doc = run(capsys, "typeinfo", "FO(2)*FO(3)")
        assert code == 0
        assert doc["factor_dims"] == [2, 3]
        assert doc["type"] == "FO(2)*FO(3)"


class TestMember:
    def test_channel_name_is_member(self, capsys, tmp_path):
        path = tmp_path / "st.json"
        save_matrix(str(path), cup_state(2).astype(complex))
        code, doc = run(capsys, "member", "[FO(2),FO(2)]", str(path))
        assert code == 0 and doc["verdict"] is True

    def test_wrong_normalization(self, capsys, tmp_path):
        path = tmp_path / "st.json"
        save_matrix(str(path), (cup_state(2) / 2).astype(complex))
        code, doc = run(capsys, "member", "[FO(2),FO(2)]", str(path))
        assert code == 1 and doc["verdict"] is False
        assert doc["affine_distance"] > 0.1

    def test_non_hermitian(self, capsys, tmp_path):
        m = np.eye(4, dtype=complex)
        m[0, 1] = 1.0
        path = tmp_path / "st.json"
        save_matrix(str(path), m)
        code, doc = run(capsys, "member", "[FO(2),FO(2)]", str(path))
        assert code == 1 and doc["reason"] == "not_hermitian"

    def test_raw_format(self, capsys, tmp_path):
        path = tmp_path / "st.raw"
        save_matrix(str(path), cup_state(2).astype(complex), fmt="raw")
        code, doc = run(capsys, "member", "[FO(2),FO(2)]", str(path),
                        "--format", "raw")
        assert code == 0 and doc["verdict"] is True

    def test_exit_mirrors_verdict(self, capsys, tmp_path, rng):
        for i in range(4):
            m = np.asarray(random_cptp(rng, 2, 2).J)
            if i % 2:
                m = m / 3.0
            path = tmp_path / f"st{i}.json"
            save_matrix(str(path), m)
            code, doc = run(capsys, "member", "[FO(2),FO(2)]", str(path))
            assert code == (0 if doc["verdict"] else 1)


class TestMorphism:
    def test_identity_channel(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), identity_choi())
        code, doc = run(capsys, "morphism", "FO(2)", "FO(2)", str(path))
        assert code == 0 and doc["verdict"] is True

    def test_not_completely_positive(self, capsys, tmp_path):
        sw = np.eye(4)[:, [0, 2, 1, 3]].astype(complex)
        path = tmp_path / "c.json"
        save_choi(str(path), ChoiMap((2,), (2,), sw, validate=False))
        code, doc = run(capsys, "morphism", "FO(2)", "FO(2)", str(path))
        assert code == 1 and doc["reason"] == "cp"

    def test_affine_defect(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), ChoiMap((2,), (2,),
                                     cup_state(2).astype(complex) / 2))
        code, doc = run(capsys, "morphism", "FO(2)", "FO(2)", str(path))
        assert code == 1 and doc["reason"] == "affine"

    def test_non_hermitian(self, capsys, tmp_path):
        j = cup_state(2).astype(complex)
        j[0, 1] += 0.5
        path = tmp_path / "c.json"
        save_choi(str(path), ChoiMap((2,), (2,), j, validate=False))
        code, doc = run(capsys, "morphism", "FO(2)", "FO(2)", str(path))
        assert code == 1 and doc["reason"] == "hermiticity"


HOMS = "[FO(2),FO(2)]"


class TestSignalling:
    def test_product_channel(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), wire_comb_choi())
        for op in ("*", "<", "@"):
            code, doc = run(capsys, "signalling", f"{HOMS}{op}{HOMS}", str(path))
            assert code == 0 and doc["classification"] == "both"

    def test_swap_rejected_where_type_forbids(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), swap_choi())
        code, doc = run(capsys, "signalling", f"{HOMS}*{HOMS}", str(path))
        assert code == 1 and doc["classification"] == "two_way"
        code, doc = run(capsys, "signalling", f"{HOMS}<{HOMS}", str(path))
        assert code == 1
        code, doc = run(capsys, "signalling", f"{HOMS}@{HOMS}", str(path))
        assert code == 0 and doc["verdict"] is True

    def test_exit_mirrors_verdict(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), swap_choi())
        for op in ("*", "<", "@"):
            code, doc = run(capsys, "signalling", f"{HOMS}{op}{HOMS}", str(path))
            assert code == (0 if doc["verdict"] else 1)

    def test_entangled_state_parties(self, capsys, tmp_path):
        # no inputs anywhere: entanglement alone never signals
        path = tmp_path / "c.json"
        save_choi(str(path), ChoiMap((2, 2), (1,),
                                     (cup_state(2) / 2).astype(complex)))
        code, doc = run(capsys, "signalling", "FO(2)*FO(2)", str(path))
        assert code == 0 and doc["classification"] == "both"

    def test_non_channel_input(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), ChoiMap((2, 2), (2, 2),
                                     np.eye(16, dtype=complex) * 0.1,
                                     validate=False))
        code, doc = run(capsys, "signalling", f"{HOMS}*{HOMS}", str(path))
        assert code == 1 and doc["classification"] == "not_a_channel"

    def test_needs_two_parties(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), identity_choi())
        code, _ = run(capsys, "signalling", "FO(2)", str(path))
        assert code == 2

    def test_party_must_be_first_order_or_hom(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), swap_choi())
        code, _ = run(capsys, "signalling", f"{HOMS}^*{HOMS}", str(path))
        assert code == 2

    def test_wrong_size_file(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), identity_choi())
        code, _ = run(capsys, "signalling", f"{HOMS}*{HOMS}", str(path))
        assert code == 2


class TestDecompose:
    def test_one_way_round_trip(self, capsys, tmp_path, rng):
        pair = random_decomp_pair(rng, 2, 2)
        cm = recompose(pair)
        path = tmp_path / "c.json"
        save_choi(str(path), cm)
        code, doc = run(capsys, "decompose", f"{HOMS}<{HOMS}", str(path))
        assert code == 0 and doc["verdict"] is True
        assert doc["z_dim"] >= 1
        back = recompose(pair_from_json(doc["pair"]))
        assert np.linalg.norm(back.J - cm.J) < 1e-8

    def test_two_way_rejected(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), swap_choi())
        code, doc = run(capsys, "decompose", f"{HOMS}<{HOMS}", str(path))
        assert code == 1 and doc["reason"] == "not_one_way"
        assert doc["residual"] > 0.1

    def test_inconsistent_input_exits_three(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), inconsistent_comb_choi())
        code = main(["decompose", f"{HOMS}<{HOMS}", str(path)])
        captured = capsys.readouterr()
        assert code == 3
        assert "inconsisten" in captured.err

    def test_wrong_composite_kind(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        save_choi(str(path), wire_comb_choi())
        code, _ = run(capsys, "decompose", f"{HOMS}*{HOMS}", str(path))
        assert code == 2


class TestEquiv:
    def test_rotated_pair(self, capsys, tmp_path, rng):
        p1 = random_decomp_pair(rng, 2, 2)
        p2 = rotate_pair(p1, rng)
        f1, f2 = tmp_path / "p1.json", tmp_path / "p2.json"
        save_pair(str(f1), p1)
        save_pair(str(f2), p2)
        code, doc = run(capsys, "equiv", str(f1), str(f2))
        assert code == 0 and doc["verdict"] is True

    def test_certificate_steps(self, capsys, tmp_path, rng):
        p1 = random_decomp_pair(rng, 2, 2)
        p2 = rotate_pair(p1, rng)
        f1, f2 = tmp_path / "p1.json", tmp_path / "p2.json"
        save_pair(str(f1), p1)
        save_pair(str(f2), p2)
        code, doc = run(capsys, "equiv", str(f1), str(f2), "--certificate")
        assert code == 0
        cert = doc["certificate"]
        assert cert["ok"] is True
        assert cert["steps"]
        for step in cert["steps"]:
            assert step["kind"] in ("isometry", "coarse", "discard", "permute",
                                    "unitary", "pad", "rotate", "slide")
            assert step["residual"] <= 1e-7
            ch = choi_from_json(step["channel"])
            assert ch.d_in >= 1

    def test_unrelated_pairs(self, capsys, tmp_path, rng):
        p1 = random_decomp_pair(rng, 2, 2)
        p2 = random_decomp_pair(rng, 2, 2)
        f1, f2 = tmp_path / "p1.json", tmp_path / "p2.json"
        save_pair(str(f1), p1)
        save_pair(str(f2), p2)
        code, doc = run(capsys, "equiv", str(f1), str(f2))
        assert code == 1 and doc["verdict"] is False


LAW_NAMES = {
    "functor_identity", "functor_compose", "naturality_square",
    "strength_square", "lax_tensor_member", "lax_tensor_natural",
    "lax_tensor_unit", "seq_roundtrip", "interchange", "injectivity",
    "unit_cells", "faithfulness", "fullness_roundtrip",
    "fullness_rejects_noncp",
}


class TestLaws:
    def test_one_trial_each(self, capsys):
        code = main(["laws", "--budget", "1", "--seed", "5"])
        out = capsys.readouterr().out
        assert code == 0
        records = [json.loads(line) for line in out.splitlines() if line]
        assert {r["law"] for r in records} == LAW_NAMES
        for r in records:
            assert r["pass"] is True
            assert set(r) >= {"law", "seed", "instance", "pass", "residual"}

    def test_zero_budget(self, capsys):
        code = main(["laws", "--budget", "0"])
        assert code == 0
        assert capsys.readouterr().out == ""

    def test_unknown_budget(self, capsys):
        code = main(["laws", "--budget", "nope"])
        assert code == 2
        assert "budget" in capsys.readouterr().err


class TestReconstruct:
    def write_script(self, tmp_path, doc):
        path = tmp_path / "probe.json"
        path.write_text(json.dumps(doc))
        return str(path)

    def identity_payload(self):
        return {"in_dims": [2], "out_dims": [2],
                "J": complex_to_json(cup_state(2))}

    def test_scripted_morphism_recovered(self, capsys, tmp_path):
        script = self.write_script(
            tmp_path, {"mode": "morphism", "choi": self.identity_payload()})
        code, doc = run(capsys, "reconstruct", "FO(2)", "FO(2)",
                        "--probe-script", script, "--seed", "3")
        assert code == 0 and doc["status"] == "ok"
        assert doc["residual"] <= 1e-8
        got = json_to_complex(doc["morphism"]["J"])
        assert np.linalg.norm(got - cup_state(2)) < 1e-8

    def test_transpose_box_flagged(self, capsys, tmp_path):
        script = self.write_script(tmp_path, {"mode": "transpose"})
        code, doc = run(capsys, "reconstruct", "FO(2)", "FO(2)",
                        "--probe-script", script, "--seed", "3")
        assert code == 1 and doc["status"] == "not_in_image"
        assert doc["counterexample"]["kind"] == "cp"

    def test_constant_box_flagged(self, capsys, tmp_path):
        script = self.write_script(tmp_path, {"mode": "constant"})
        code, doc = run(capsys, "reconstruct", "FO(2)", "FO(2)",
                        "--probe-script", script, "--seed", "3")
        assert code == 1 and doc["status"] == "not_natural"

    def test_boundary_skew_flagged(self, capsys, tmp_path):
        script = self.write_script(
            tmp_path, {"mode": "boundary_skew",
                       "choi": self.identity_payload(), "mix": 0.1})
        code, doc = run(capsys, "reconstruct", "FO(2)", "FO(2)",
                        "--probe-script", script, "--seed", "3")
        assert code == 1 and doc["status"] == "not_natural"

    def test_payload_dims_checked(self, capsys, tmp_path):
        script = self.write_script(
            tmp_path, {"mode": "morphism", "choi": self.identity_payload()})
        code, _ = run(capsys, "reconstruct", "FO(3)", "FO(3)",
                      "--probe-script", script)
        assert code == 2

    def test_unknown_mode(self, capsys, tmp_path):
        script = self.write_script(tmp_path, {"mode": "wat"})
        code, _ = run(capsys, "reconstruct", "FO(2)", "FO(2)",
                      "--probe-script", script)
        assert code == 2


class TestUsage:
    def test_type_syntax_error(self, capsys, tmp_path):
        code = main(["typeinfo", "FO(2"])
        err = capsys.readouterr().err
        assert code == 2
        assert "position" in err

    def test_zero_dimension(self, capsys):
        code = main(["typeinfo", "FO(0)"])
        assert code == 2

    def test_missing_file(self, capsys):
        code = main(["member", "FO(2)", "/nonexistent/m.json"])
        assert code == 2

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{not json")
        code = main(["member", "FO(2)", str(path)])
        assert code == 2

    def test_no_arguments(self, capsys):
        assert main([]) == 2

    def test_help(self, capsys):
        assert main(["--help"]) == 0

    def test_unknown_verb(self, capsys):
        assert main(["transmogrify"]) == 2
