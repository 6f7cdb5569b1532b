import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mg1split import gen_example_1a, gen_example_1b, is_qbd, load_matrix, load_model, save_matrix, save_model
from mg1split.exceptions import ParseError, ValidationError
from mg1split.problems import dumps_blocks, loads_blocks


def test_example_1a_n2():
    m = gen_example_1a(2, 0.1)
    np.testing.assert_allclose(m.A_minus1, [[0.1, 0.3], [0.3, 0.1]], atol=1e-16)
    np.testing.assert_allclose(m.A0, [[0.0, 0.3], [0.3, 0.0]], atol=1e-16)
    np.testing.assert_array_equal(m.A0, m.A1)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 60), delta=st.floats(1e-6, 0.999))
def test_example_1a_stochastic(n, delta):
    m = gen_example_1a(n, delta)
    assert is_qbd(m)
    assert np.max(np.abs(m.total().sum(axis=1) - 1.0)) <= 1e-15


@pytest.mark.parametrize("n, delta", [(1, 0.1), (3, 0.0), (3, 1.0)])
def test_example_1a_preconditions(n, delta):
    with pytest.raises(ValueError):
        gen_example_1a(n, delta)


@settings(max_examples=30, deadline=None)
@given(p=st.floats(0.01, 0.6), q=st.integers(1, 60))
def test_example_1b_tail_bound(p, q):
    m = gen_example_1b(p, q)
    dev = np.max(np.abs(m.total().sum(axis=1) - 1.0))
    assert dev <= 2 * p ** (q + 2) / (1 - p) + 1e-15


def test_example_1b_structure():
    m = gen_example_1b(0.3, 5)
    assert m.q == 5
    np.testing.assert_allclose(m.block(0), 0.3 * m.A_minus1)
    np.testing.assert_allclose(m.block(3), 0.3**4 * m.A_minus1)


@pytest.mark.parametrize("p", [0.0, 0.61])
def test_example_1b_preconditions(p):
    with pytest.raises(ValueError):
        gen_example_1b(p)


@pytest.mark.parametrize("model", [gen_example_1a(4, 0.01), gen_example_1a(9, 0.37), gen_example_1b(0.3), gen_example_1b(0.5, 40)])
def test_round_trip(tmp_path, model):
    path = tmp_path / "m.txt"
    save_model(model, path, comment="two\nlines")
    assert load_model(path) == model


def test_matrix_round_trip(tmp_path):
    X = np.random.default_rng(0).random((3, 3))
    save_matrix(X, tmp_path / "g.txt")
    np.testing.assert_array_equal(load_matrix(tmp_path / "g.txt"), X)
    assert dumps_blocks([X]).splitlines()[0] == "3 -1"


def test_comments_and_blank_lines():
    blocks = loads_blocks("# hi\n\n1 0\n# A_{-1}\n0.5\n\n0.5\n")
    assert [b[0, 0] for b in blocks] == [0.5, 0.5]


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("1 1\n0.4\n0.3\n", 3),  # wrong block count
        ("2 0\n0.1 0.2\n0.3\n0.1 0.1\n0.1 0.1\n", 3),  # short row
        ("1 0\n0.5\nabc\n", 3),
        ("1\n0.5\n", 1),
        ("x y\n", 1),
        ("1 0\n0.5\nnan\n", 3),
    ],
)
def test_parse_errors(text, lineno):
    with pytest.raises(ParseError) as info:
        loads_blocks(text)
    assert info.value.lineno == lineno
    assert str(info.value).startswith(f"line {lineno}:")


def test_empty_file():
    with pytest.raises(ParseError):
        loads_blocks("# nothing\n")


def test_negative_entry_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 1\n0.5\n-0.1\n0.6\n")
    with pytest.raises(ValidationError) as info:
        load_model(path)
    assert [i.kind for i in info.value.issues] == ["negative_entry"]
    assert load_model(path, check=False).A0[0, 0] == -0.1


def test_single_block_is_not_a_model(tmp_path):
    path = tmp_path / "g.txt"
    save_matrix(np.eye(2), path)
    with pytest.raises(ParseError):
        load_model(path)
