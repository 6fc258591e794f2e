import io
import json
import statistics

import pytest

from dynfo.bench import far_pair_query, run_bench
from dynfo.cli import Session, UsageError, main, parse_schema, parse_stream, preprocess, run_command
from dynfo.database import UpdateCmd
from dynfo.instrument import measure
from dynfo.logic import ParseError, parse_query
from dynfo.workloads import DEFAULT_SCHEMA, path_facts

SCHEMA_TEXT = "(schema (E 2) (P 1))"
QUERY_TEXT = """(type pair (elems 1 2) (centres 1 2) (tuples) (radius 0))
(query (x y) (sphere pair (x y)))"""


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue().splitlines()


def session(stream_text=""):
    schema = parse_schema(SCHEMA_TEXT)
    return preprocess(schema, 2, parse_query(QUERY_TEXT, schema), parse_stream(stream_text, schema))


def test_count_on_empty_session():
    assert run_command(session(), "count") == ["0"]


def test_scripted_session():
    s = session("+ E 1 2\n+ E 2 3\n")
    assert run_command(s, "count") == ["2"]
    assert run_command(s, "enumerate") == ["1 3", "3 1", "#done"]
    assert run_command(s, "test 1 3") == ["member"]
    assert run_command(s, "test 1 2") == ["nonmember"]
    assert run_command(s, "update - E 2 3") == ["applied"]
    assert run_command(s, "check") == ["OK"]
    assert run_command(s, "# just a comment") == []
    with pytest.raises(UsageError):
        run_command(s, "test 1")
    with pytest.raises(UsageError):
        run_command(s, "frobnicate")


def test_one_line_stream_equals_one_update():
    schema = parse_schema(SCHEMA_TEXT)
    query = parse_query(QUERY_TEXT, schema)
    a = preprocess(schema, 2, query, parse_stream("+ E 4 5", schema))
    b = Session(schema, 2, query)
    b.update(UpdateCmd.insert("E", 4, 5))
    assert a.backend.to_state() == b.backend.to_state()


def test_rejected_lines_are_reported():
    schema = parse_schema(SCHEMA_TEXT)
    log = io.StringIO()
    preprocess(schema, 2, parse_query(QUERY_TEXT, schema),
               parse_stream("+ E 1 2\n+ E 1 3\n# note\n+ E 1 4\n", schema), log=log)
    assert log.getvalue().startswith("line 4: rejected by the degree bound")


def test_stream_parse_errors_name_the_line():
    schema = parse_schema(SCHEMA_TEXT)
    for text in ("+ E 1", "* E 1 2", "+ Q 1", "+ E 1 x"):
        with pytest.raises(ParseError, match="line 2"):
            parse_stream("+ E 1 2\n" + text, schema)
    with pytest.raises(ParseError):
        parse_schema("(schema (E two))")


def test_main_modes(files):
    schema, query = files("schema.txt", SCHEMA_TEXT), files("q.txt", QUERY_TEXT)
    stream = files("s.txt", "+ E 1 2\n+ E 2 3\n")
    base = ["--schema", schema, "--query", query, "--stream", stream]
    assert run(base + ["--mode", "count"]) == (0, ["2"])
    assert run(base + ["--mode", "enum"]) == (0, ["1 3", "3 1", "#done"])
    assert run(base + ["--mode", "test", "--tuple", "3", "1"]) == (0, ["member"])
    assert run(base + ["--mode", "check", "--random-updates", "200", "--seed", "4"]) == (0, ["OK"])
    assert run(base + ["--oracle-only", "--mode", "count"]) == (0, ["2"])
    script = files("cmds.txt", "count\nupdate + E 5 6\ncount\n")
    assert run(base + ["--commands", script]) == run(base + ["--commands", script, "--oracle-only"])
    assert run(base + ["--commands", script]) == (0, ["2", "applied", "14"])


def test_first_order_query_needs_the_oracle(files):
    schema = files("schema.txt", SCHEMA_TEXT)
    query = files("q.txt", "(query (x) (exists y (E x y)))")
    stream = files("s.txt", "+ E 1 2\n")
    assert run(["--schema", schema, "--query", query, "--stream", stream])[0] == 1
    assert run(["--schema", schema, "--query", query, "--stream", stream, "--oracle-only"]) == (0, ["1"])


def test_exit_codes(files):
    schema = files("schema.txt", SCHEMA_TEXT)
    assert run(["--schema", schema])[0] == 1
    assert run(["--schema", schema, "--query", files("bad.txt", "(query (x) (Q x))")])[0] == 2
    assert run(["--schema", schema, "--query", files("q.txt", QUERY_TEXT),
                "--stream", files("s.txt", "+ E 1")])[0] == 2
    assert run(["--schema", schema, "--query", "/nonexistent/q.txt"])[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["--no-such-flag"], io.StringIO())
    assert exc.value.code == 1


def test_bench_mode_is_deterministic():
    argv = ["--mode", "bench", "--sizes", "200,400", "--seed", "3"]
    first, second = run(argv), run(argv)
    assert first == second and first[0] == 0
    rows = json.loads(first[1][0])
    assert [row["size"] for row in rows] == [200, 400]
    assert run(["--mode", "bench", "--sizes", ""]) == (0, ["[]"])
    assert run_bench([]) == []
    assert run(["--mode", "bench", "--generator", "star"])[0] == 1


def test_preprocessing_cost_grows_linearly():
    schema = DEFAULT_SCHEMA
    query = far_pair_query(0)
    lengths, costs = [], []
    for n in (100, 200, 400, 600, 800, 1000):
        stream = [(i, UpdateCmd.insert(rel, *args)) for i, (rel, args) in enumerate(path_facts(n, 3), 1)]
        with measure() as m:
            preprocess(schema, 2, query, stream)
        lengths.append(len(stream))
        costs.append(m.ops)
    assert statistics.correlation(lengths, costs) ** 2 >= 0.99
