import json
from fractions import Fraction

import numpy as np
import pytest

from mbrep import cli, fileio
from mbrep._exact import exact_coefficient
from mbrep.errors import ValidationError
from mbrep.multrep import MultVector, RepSpace
from mbrep.system import compatibility_residual, spherical_system, validate
from mbrep.vfree import psl2z_datum, vf_validate
from mbrep.words import Alphabet, Word, sphere

from helpers import random_system, random_vector

A2 = Alphabet.rank(2)


class TestSystemFiles:
    def test_roundtrip_random_system(self, tmp_path):
        rng = np.random.default_rng(2)
        space, _ = random_system(rng)
        path = tmp_path / "sys.json"
        fileio.save_system(str(path), space.system, space.forms)
        loaded, forms, exact = fileio.load_system(str(path))
        assert exact is None
        assert validate(loaded) == []
        assert loaded.dims == space.system.dims
        for b in range(4):
            for a in range(4):
                assert np.allclose(loaded.map(b, a), space.system.map(b, a))
        for a in range(4):
            assert np.allclose(forms[a], space.forms[a])

    def test_builtin_spherical(self):
        path = cli._resolve("builtin:spherical2")
        system, forms, _ = fileio.load_system(path)
        assert validate(system) == []
        assert compatibility_residual(system, forms) <= 1e-12

    def test_omitted_maps_are_zero(self, tmp_path):
        doc = {
            "alphabet": ["a", "A", "b", "B"],
            "involution": [["a", "A"], ["b", "B"]],
            "dims": {"a": 1, "A": 1, "b": 1, "B": 1},
            "maps": {"a|b": [[0.5]]},
        }
        path = tmp_path / "sparse.json"
        path.write_text(json.dumps(doc))
        system, forms, _ = fileio.load_system(str(path))
        assert forms is None
        assert np.abs(system.map(0, 3)).max() == 0
        assert system.map(0, 2)[0, 0] == 0.5

    def test_bad_map_key_rejected(self, tmp_path):
        doc = {
            "alphabet": ["a", "A", "b", "B"],
            "involution": [["a", "A"], ["b", "B"]],
            "dims": {"a": 1, "A": 1, "b": 1, "B": 1},
            "maps": {"ab": [[0.5]]},
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError):
            fileio.load_system(str(path))

    def test_complex_entries(self, tmp_path):
        doc = {
            "alphabet": ["a", "A", "b", "B"],
            "involution": [["a", "A"], ["b", "B"]],
            "dims": {"a": 1, "A": 1, "b": 1, "B": 1},
            "maps": {"a|b": [[[0.5, -0.25]]]},
        }
        path = tmp_path / "cplx.json"
        path.write_text(json.dumps(doc))
        system, _, _ = fileio.load_system(str(path))
        assert system.map(0, 2)[0, 0] == 0.5 - 0.25j

    def test_exact_builtin(self):
        path = cli._resolve("builtin:spherical2-exact")
        system, forms, exact = fileio.load_system(path)
        assert exact is not None
        assert exact.compatibility_holds()
        f = fileio.load_exact_vector(cli._resolve("builtin:seed-a"), exact)
        val = exact_coefficient(Word.parse(A2, "a"), f, f)
        assert val.square().as_fraction() == Fraction(1, 3)


class TestVectorFiles:
    def test_roundtrip(self, tmp_path, spherical_space):
        rng = np.random.default_rng(5)
        v = random_vector(spherical_space, rng, depth=2)
        path = tmp_path / "vec.json"
        fileio.save_vector(str(path), v)
        loaded = fileio.load_vector(str(path), spherical_space)
        assert loaded.depth == v.depth
        assert loaded.values.keys() == v.values.keys()
        for k in v.values:
            assert np.allclose(loaded.values[k], v.values[k])

    def test_dimension_mismatch_rejected(self, tmp_path, spherical_space):
        path = tmp_path / "vec.json"
        path.write_text(json.dumps({"depth": 1, "values": {"a": [1.0, 2.0]}}))
        with pytest.raises(ValidationError):
            fileio.load_vector(str(path), spherical_space)


class TestVFDatumFiles:
    def test_psl2z_roundtrip(self, tmp_path):
        datum = psl2z_datum()
        grp = datum.group
        doc = {
            "name": "psl2z-copy",
            "factors": list(grp.orders),
            "generators": list(grp.names),
            "transversal": [grp.format(t) for t in datum.transversal],
            "free_basis": [grp.format(datum.basis_elements[0]),
                           grp.format(datum.basis_elements[2])],
            "table": {
                f"{grp.format(datum.transversal[t])}|{grp.names[f]}":
                    [grp.format(datum.transversal[t2]), str(word)]
                for (t, f), (word, t2) in datum.table.items()
            },
        }
        path = tmp_path / "datum.json"
        path.write_text(json.dumps(doc))
        loaded = fileio.load_vf_datum(str(path))
        assert vf_validate(loaded) == []
        assert loaded.name == "psl2z-copy"


class TestCli:
    def test_normalize_writes_reloadable_file(self, tmp_path, capsys):
        out = tmp_path / "norm.json"
        code = cli.main(["normalize", "--input", cli._resolve("builtin:spherical2-unscaled"),
                         "--output", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "spectral_radius=3" in text
        system, forms, _ = fileio.load_system(str(out))
        assert validate(system) == []
        assert compatibility_residual(system, forms) <= 1e-9

    def test_normalize_degenerate_exit(self, tmp_path, capsys):
        doc = {
            "alphabet": ["a", "A", "b", "B"],
            "involution": [["a", "A"], ["b", "B"]],
            "dims": {"a": 1, "A": 1, "b": 1, "B": 1},
            "maps": {},
        }
        path = tmp_path / "zero.json"
        path.write_text(json.dumps(doc))
        assert cli.main(["normalize", "--input", str(path)]) == cli.EXIT_MATH

    def test_normalize_invalid_exit(self, tmp_path):
        path = tmp_path / "broken.json"
        doc = {
            "alphabet": ["a", "A", "b", "B"],
            "involution": [["a", "A"], ["b", "B"]],
            "dims": {"a": 0, "A": 1, "b": 1, "B": 1},
            "maps": {},
        }
        path.write_text(json.dumps(doc))
        assert cli.main(["normalize", "--input", str(path)]) == cli.EXIT_VALIDATION

    def test_coefficients_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "c1.csv", tmp_path / "c2.csv"
        args = ["coefficients", "--system", "builtin:spherical2",
                "--vector", "builtin:seed-a", "--words", "e,a,ab,B",
                "--backend", "both"]
        assert cli.main(args + ["--output", str(out1)]) == 0
        assert cli.main(args + ["--output", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_coefficients_empty_word_list(self, tmp_path):
        out = tmp_path / "empty.csv"
        code = cli.main(["coefficients", "--system", "builtin:spherical2",
                         "--vector", "builtin:seed-a", "--words", "",
                         "--output", str(out)])
        assert code == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines == ["word,re,im,backend,depth"]

    def test_coefficients_threads_match_serial(self, tmp_path):
        serial, threaded = tmp_path / "s.csv", tmp_path / "t.csv"
        args = ["coefficients", "--system", "builtin:spherical2",
                "--vector", "builtin:seed-a", "--words", "e,a,ab,aB,bb"]
        assert cli.main(args + ["--output", str(serial)]) == 0
        assert cli.main(args + ["--threads", "4", "--output", str(threaded)]) == 0
        assert serial.read_bytes() == threaded.read_bytes()

    def test_cap_exit_code(self):
        code = cli.main(["coefficients", "--system", "builtin:spherical2",
                         "--vector", "builtin:seed-a", "--words", "ab",
                         "--backend", "brute", "--cap", "10"])
        assert code == cli.EXIT_CAP

    def test_induce_reports_dims(self, tmp_path, capsys):
        out = tmp_path / "ind.json"
        code = cli.main(["induce", "--system", "builtin:spherical3",
                         "--quotient", cli._resolve("builtin:index2-quotient"),
                         "--trials", "3", "--output", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "(4, 4, 2, 2)" in text
        system, forms, _ = fileio.load_system(str(out))
        assert validate(system) == []
        assert compatibility_residual(system, forms) <= 1e-9

    def test_herz_pass(self, tmp_path):
        out = tmp_path / "herz.csv"
        code = cli.main(["herz", "--system", "builtin:spherical2",
                         "--vector", "builtin:seed-a", "--radius", "2",
                         "--output", str(out)])
        assert code == 0
        body = out.read_text()
        assert "FAIL" not in body
        assert "# failures=0" in body

    def test_vf_induce(self, tmp_path):
        out = tmp_path / "vf.csv"
        code = cli.main(["vf-induce", "--datum", "psl2z",
                         "--system", "builtin:spherical2",
                         "--vector", "builtin:seed-a", "--radius", "2",
                         "--output", str(out)])
        assert code == 0
        assert "gram_min_eigenvalue" in out.read_text()

    def test_demo_uniform(self, tmp_path):
        out = tmp_path / "demo.csv"
        code = cli.main(["demo-no-hc", "--word", "ab", "--max-power", "3",
                         "--uniform-rank", "2", "--output", str(out)])
        assert code == 0
        rows = [l for l in out.read_text().splitlines() if not (l.startswith("#") or l.startswith("n,"))]
        phis = [float(r.split(",")[2]) for r in rows]
        assert all(p < 1 for p in phis)

    def test_decompose_command(self, tmp_path, capsys):
        # build a reducible two-block file, then split it from the CLI
        import sys

        sys.path.insert(0, "tests")
        from test_system import two_block_system

        system, forms = two_block_system()
        path = tmp_path / "blocks.json"
        fileio.save_system(str(path), system, forms)
        code = cli.main(["decompose", "--input", str(path),
                         "--output", str(tmp_path / "comp.json")])
        assert code == 0
        assert "components=2" in capsys.readouterr().out
        for k in range(2):
            comp, cf, _ = fileio.load_system(str(tmp_path / f"comp-{k}.json"))
            assert validate(comp) == []

    def test_selftest(self):
        assert cli.main(["selftest"]) == 0
