import subprocess
import sys

import pytest

from lexenum.cli import main
from lexenum.lex import reduce_disjoint_transpositions
from lexenum.io import InstanceError, format_instance, parse_instance
from lexenum.model import Extensional, NotEqual, UnaryIn

ALLDIFF4 = "csp ad4\nvars 4\n" + "".join(f"dom {i} 1 4\n" for i in range(1, 5)) + "alldiff 1 2 3 4\n"
ADJ4 = ALLDIFF4 + "sym 2 1 3 4\nsym 1 3 2 4\nsym 1 2 4 3\n"


def write(tmp_path, text, name="inst.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


class TestParse:
    def test_alldiff_expands(self):
        csp = parse_instance("vars 3\ndom 1 0 2\ndom 2 0 2\ndom 3 0 2\nalldiff 1 2 3\n")
        assert csp.constraints == [NotEqual(0, 1), NotEqual(0, 2), NotEqual(1, 2)]

    def test_sym_image(self):
        csp = parse_instance("vars 3\n" + "".join(f"dom {i} 0 1\n" for i in (1, 2, 3)) + "sym 2 1 3\n")
        assert csp.symmetries[0].image == (1, 0, 2)

    def test_ext_lex_order_comments(self):
        text = """# demo
csp t
vars 3
dom 1 0 1
dom 2 0 1
dom 3 0 2   # wider
ext 2 1 3 ; 0 0 ; 1 2
unary 2 1
lex 1 1 <= 2
order 3 1 2
"""
        csp = parse_instance(text)
        assert csp.name == "t"
        assert csp.constraints[0] == Extensional((0, 2), [(0, 0), (1, 2)])
        assert isinstance(csp.constraints[1], UnaryIn)
        assert (csp.lex_constraints[0].lhs, csp.lex_constraints[0].rhs) == ((0,), (1,))
        assert csp.order == [2, 0, 1]

    @pytest.mark.parametrize("text, message, line", [
        ("dom 1 0 1\n", "before vars", 1),
        ("vars 2\ndom 1 0 1\ndom 2 3 1\n", "empty domain", 3),
        ("vars 2\ndom 1 0 1\ndom 2 0 1\nneq 1 5\n", "out of range", 4),
        ("vars 2\ndom 1 0 1\ndom 2 0 1\next 2 1 2 ; 0 0 1\n", "arity mismatch", 4),
        ("vars 2\ndom 1 0 1\ndom 2 0 1\nsym 1 1\n", "not a permutation", 4),
        ("vars 2\ndom 1 0 1\ndom 2 0 1\nlex 1 1 2\n", "<=", 4),
        ("vars 2\ndom 1 0 1\ndom 2 0 1\nfoo 1\n", "unknown directive", 4),
    ])
    def test_errors(self, text, message, line):
        with pytest.raises(InstanceError, match=message) as info:
            parse_instance(text)
        assert info.value.line == line

    def test_missing_domain(self):
        with pytest.raises(InstanceError):
            parse_instance("vars 2\ndom 1 0 1\n")

    @pytest.mark.parametrize("text", [
        ALLDIFF4,
        ADJ4 + "order 4 3 2 1\n",
        "vars 3\ndom 1 0 1\ndom 2 0 1\ndom 3 0 2\next 2 1 3 ; 0 0 ; 1 2\nunary 2 1\nlex 2 1 2 <= 3 3\n",
        "vars 2\ndom 1 0 1\ndom 2 0 1\next 1 1\nlex 0 <=\n",
    ])
    def test_round_trip(self, text):
        first = parse_instance(text)
        again = parse_instance(format_instance(first))
        assert again == first
        assert format_instance(again) == format_instance(first)


class TestCli:
    def test_enumerate_unconstrained(self, tmp_path, capsys):
        code, out, _ = run(capsys, "enumerate", write(tmp_path, "vars 1\ndom 1 0 1\n"))
        assert code == 0 and out == "0\n1\n"

    def test_enumerate_zero_solutions(self, tmp_path, capsys):
        f = write(tmp_path, "vars 3\n" + "".join(f"dom {i} 1 2\n" for i in (1, 2, 3)) + "alldiff 1 2 3\n")
        code, out, _ = run(capsys, "enumerate", f)
        assert code == 0 and out == ""

    def test_enumerate_sym_alldiff(self, tmp_path, capsys):
        code, out, _ = run(capsys, "enumerate-sym", write(tmp_path, ADJ4), "--oracle", "alldiff")
        assert code == 0 and out == "1 2 3 4\n"

    def test_enumerate_sym_no_syms(self, tmp_path, capsys):
        code, out, _ = run(capsys, "enumerate-sym", write(tmp_path, ALLDIFF4), "--oracle", "alldiff")
        assert code == 0 and len(out.splitlines()) == 24

    def test_three_cycle_rejected(self, tmp_path, capsys):
        code, _, err = run(capsys, "enumerate-sym", write(tmp_path, ALLDIFF4 + "sym 2 3 1 4\n"))
        assert code == 2 and "not an involution" in err and "line 8" in err

    def test_non_symmetry_rejected(self, tmp_path, capsys):
        text = "vars 3\n" + "".join(f"dom {i} 0 1\n" for i in (1, 2, 3)) + "neq 1 2\nsym 3 2 1\n"
        code, _, err = run(capsys, "enumerate-sym", write(tmp_path, text))
        assert code == 2 and "not a variable symmetry" in err

    def test_alldiff_oracle_mismatch(self, tmp_path, capsys):
        text = "vars 3\n" + "".join(f"dom {i} 0 2\n" for i in (1, 2, 3)) + "neq 1 2\nneq 2 3\n"
        code, _, err = run(capsys, "enumerate-sym", write(tmp_path, text), "--oracle", "alldiff")
        assert code == 2 and "alldiff oracle" in err

    def test_bad_input_exit_code(self, tmp_path, capsys):
        code, _, err = run(capsys, "enumerate", write(tmp_path, "vars 1\ndom 1 2 1\n"))
        assert code == 2 and "line 2" in err
        code, _, _ = run(capsys, "enumerate", str(tmp_path / "missing.txt"))
        assert code == 2

    def test_budget_exit_code(self, tmp_path, capsys):
        code, _, err = run(capsys, "enumerate", write(tmp_path, ALLDIFF4), "--node-budget", "3")
        assert code == 1 and "budget" in err

    def test_reduce(self, tmp_path, capsys):
        three = "vars 3\n" + "".join(f"dom {i} 0 1\n" for i in (1, 2, 3))
        code, out, _ = run(capsys, "reduce", write(tmp_path, three + "sym 2 1 3\nsym 1 2 3\n"))
        assert code == 0 and out == "lex 1 1 <= 2\nlex 0 <=\n"
        four = "vars 4\n" + "".join(f"dom {i} 0 1\n" for i in range(1, 5))
        _, out, _ = run(capsys, "reduce", write(tmp_path, four + "sym 3 4 1 2\n"))
        assert out == "lex 2 1 2 <= 3 4\n"

    def test_reduce_output_round_trips(self, tmp_path, capsys):
        _, out, _ = run(capsys, "reduce", write(tmp_path, ADJ4))
        csp = parse_instance(ALLDIFF4 + out)
        assert csp.lex_constraints == [reduce_disjoint_transpositions(s) for s in parse_instance(ADJ4).symmetries]

    def test_orbits(self, tmp_path, capsys):
        ad3 = "vars 3\n" + "".join(f"dom {i} 1 3\n" for i in (1, 2, 3)) + "alldiff 1 2 3\n"
        code, out, _ = run(capsys, "orbits", write(tmp_path, ad3 + "sym 2 1 3\nsym 1 3 2\n"))
        assert code == 0 and out == "1 orbit: size 6\n"
        _, out, _ = run(capsys, "orbits", write(tmp_path, ad3 + "sym 2 1 3\n"))
        assert out == "3 orbits: sizes 2, 2, 2\n"

    def test_orbits_space_cap(self, tmp_path, capsys):
        code, _, err = run(capsys, "orbits", write(tmp_path, ALLDIFF4), "--space-cap", "10")
        assert code == 1 and "exceeds cap" in err

    def test_bench(self, tmp_path, capsys):
        text = "vars 6\n" + "".join(f"dom {i} 1 6\n" for i in range(1, 7)) + "alldiff 1 2 3 4 5 6\n"
        for i in range(1, 6):
            img = list(range(1, 7))
            img[i - 1], img[i] = img[i], img[i - 1]
            text += "sym " + " ".join(map(str, img)) + "\n"
        code, out, _ = run(capsys, "bench", write(tmp_path, text), "--oracle", "alldiff")
        assert code == 0
        rows = {line.split()[0]: line.split() for line in out.splitlines()}
        assert rows["lexleader"][1] == "1"
        assert rows["generate-and-test"][1:3] == ["1", "720"]

    def test_check(self, tmp_path, capsys):
        four = "vars 4\n" + "".join(f"dom {i} 0 1\n" for i in range(1, 5))
        code, out, _ = run(capsys, "check", write(tmp_path, four + "lex 2 1 2 <= 3 4\nlex 2 2 1 <= 3 4\n"))
        assert code == 1
        assert "lex 2 1 2 <= 3 4: in LEX" in out
        assert "lex 2 2 1 <= 3 4: NOT in LEX" in out
        code, out, _ = run(capsys, "check", write(tmp_path, ADJ4))
        assert code == 0 and out.count("in LEX; symmetry") == 3

    def test_metrics_csv(self, tmp_path, capsys):
        csv = tmp_path / "m.csv"
        code, out, _ = run(capsys, "enumerate-sym", write(tmp_path, ALLDIFF4), "--metrics-out", str(csv))
        rows = csv.read_text().strip().splitlines()
        assert code == 0 and len(rows) == 1 + len(out.splitlines()) + 1
        assert rows[0].startswith("gap_index,nodes")

    def test_order_flag_changes_print_sequence(self, tmp_path, capsys):
        text = "vars 2\ndom 1 0 1\ndom 2 5 5\n"
        _, out, _ = run(capsys, "enumerate", write(tmp_path, text), "--order", "2", "1")
        assert out == "5 0\n5 1\n"

    def test_deterministic_and_module_entry_point(self, tmp_path):
        f = write(tmp_path, ALLDIFF4 + "sym 2 1 3 4\n")
        runs = [subprocess.run([sys.executable, "-m", "lexenum", "enumerate-sym", f],
                               capture_output=True, text=True, check=True).stdout for _ in range(2)]
        assert runs[0] == runs[1] and len(runs[0].splitlines()) == 12
