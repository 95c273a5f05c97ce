import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from butson.bmatrix import (
    ExponentMatrix,
    GridParseError,
    Permute,
    Scale,
    VerificationReport,
    conj_transpose,
    dephase,
    dumps_document,
    equivalence_move,
    format_grid,
    fourier,
    from_document,
    inner_product,
    load_matrix,
    loads_document,
    parse_grid,
    to_document,
    verify_bh,
)
from butson.cyclo import cyc_is_zero
from butson.fixtures import W19, W19_SHA256, grid_sha256, named

from oracles import float_inner, float_is_hadamard


def test_fixture_checksum(w19):
    assert grid_sha256(w19) == W19_SHA256
    assert w19.shape == (19, 19) and w19.q == 6
    assert named("@W19") == w19
    with pytest.raises(KeyError):
        named("@nope")


def test_inner_product_examples(w19):
    self_ip = inner_product(w19, 4, 4)
    assert self_ip.coeffs == (19, 0, 0, 0, 0, 0)
    assert cyc_is_zero(inner_product(w19, 0, 1))
    M = ExponentMatrix(2, [[0, 0], [0, 1]])
    ip = inner_product(M, 0, 1)
    assert ip.coeffs == (1, 1) and cyc_is_zero(ip)
    with pytest.raises(IndexError):
        inner_product(M, 0, 2)


def test_w19_is_bh(w19):
    r = verify_bh(w19)
    assert r.is_hadamard and r.order == 19 and r.q == 6
    assert r.violations == [] and r.column_violations == []
    assert bool(float_is_hadamard(w19.array, 6))


@pytest.mark.parametrize("n", range(2, 9))
def test_fourier(n):
    assert verify_bh(fourier(n)).is_hadamard


def test_perturbed_w19_reports_exactly_the_broken_pairs(w19):
    bad = w19.with_entry(0, 0, 4)
    r = verify_bh(bad)
    assert not r.is_hadamard
    expected = [(0, k) for k in range(1, 19) if abs(float_inner(bad.array, 6, 0, k)) > 1e-9]
    assert [(i, k) for i, k, _ in r.violations] == expected
    assert len(expected) == 18
    for i, k, res in r.violations:
        assert abs(complex(res) - float_inner(bad.array, 6, i, k)) < 1e-9


def test_verify_rejects_non_square():
    with pytest.raises(ValueError):
        verify_bh(ExponentMatrix(6, [[0, 1, 2]]))


def test_entries_validated():
    with pytest.raises(ValueError):
        ExponentMatrix(6, [[0, 6]])
    with pytest.raises(ValueError):
        ExponentMatrix(6, [[-1]])


def test_dephase(w19):
    D = dephase(w19)
    assert not D.array[0].any() and not D.array[:, 0].any()
    assert dephase(D) == D
    assert verify_bh(D).is_hadamard


def test_moves_on_w19(w19):
    swapped = equivalence_move(w19, Permute(0, (1, 0) + tuple(range(2, 19))))
    assert verify_bh(swapped).is_hadamard
    scaled = equivalence_move(w19, Scale(1, 3, 2))
    assert np.array_equal(scaled.array[:, 3], (w19.array[:, 3] + 2) % 6)
    assert verify_bh(scaled).is_hadamard
    assert equivalence_move(w19, Permute(1, tuple(range(19)))) == w19
    with pytest.raises(ValueError):
        equivalence_move(w19, Permute(0, (0, 0) + tuple(range(2, 19))))
    with pytest.raises(IndexError):
        equivalence_move(w19, Scale(0, 19, 1))


def test_conj_transpose():
    M = ExponentMatrix(6, [[1]])
    assert conj_transpose(M).tolist() == [[5]]
    Z = ExponentMatrix(6, np.zeros((6, 7), dtype=int))
    assert conj_transpose(Z) == ExponentMatrix(6, np.zeros((7, 6), dtype=int))


def square_matrices(max_n=6, max_q=7):
    return st.tuples(st.integers(1, max_n), st.integers(2, max_q)).flatmap(
        lambda nq: st.lists(
            st.lists(st.integers(0, nq[1] - 1), min_size=nq[0], max_size=nq[0]),
            min_size=nq[0], max_size=nq[0],
        ).map(lambda rows: ExponentMatrix(nq[1], rows))
    )


def bh_like():
    # mix known BH matrices in so the properties are exercised on both outcomes
    return st.one_of(square_matrices(), st.integers(2, 8).map(fourier))


@settings(max_examples=150, deadline=None)
@given(bh_like())
def test_dephase_and_adjoint_preserve_status(M):
    status = verify_bh(M).is_hadamard
    assert verify_bh(dephase(M)).is_hadamard == status
    assert verify_bh(conj_transpose(M)).is_hadamard == status
    assert conj_transpose(conj_transpose(M)) == M
    assert dephase(dephase(M)) == dephase(M)


@settings(max_examples=150, deadline=None)
@given(bh_like(), st.data())
def test_moves_preserve_status(M, data):
    n = M.n_rows
    axis = data.draw(st.integers(0, 1))
    if data.draw(st.booleans()):
        move = Permute(axis, tuple(data.draw(st.permutations(range(n)))))
    else:
        move = Scale(axis, data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, M.q - 1)))
    assert verify_bh(equivalence_move(M, move)).is_hadamard == verify_bh(M).is_hadamard


@settings(max_examples=150, deadline=None)
@given(square_matrices())
def test_rows_and_columns_agree(M):
    r = verify_bh(M)
    assert bool(r.violations) == bool(r.column_violations)
    assert r.is_hadamard == bool(float_is_hadamard(M.array, M.q))


def test_paper_layout_parses(w19):
    latex = []
    for k, row in enumerate(w19.tolist()):
        cells = [str(x) for x in row]
        latex.append(" " + " & ".join(cells[:6]) + " & " + " & ".join(cells[6:12])
                     + " & " + " & ".join(cells[12:]) + " \\\\")
        if k in (5, 11):
            latex.append(" \\hline")
    assert parse_grid("\n".join(latex), q=6) == w19
    assert parse_grid(W19) == w19


def test_grid_round_trip(w19):
    assert parse_grid(format_grid(w19)) == w19
    rect = ExponentMatrix(6, [[0, 1, 2], [3, 4, 5]])
    assert format_grid(rect).splitlines()[0] == "q 6 n 2 m 3"
    assert parse_grid(format_grid(rect)) == rect


@pytest.mark.parametrize("text, line", [
    ("q 6 n 2\n0 1\n2\n", 3),
    ("q 6 n 2\n0 1\n2 x\n", 3),
    ("q 6 n 2\n0 1\n2 7\n", 3),
    ("0 1\n", None),
])
def test_grid_errors(text, line):
    with pytest.raises(GridParseError) as exc:
        parse_grid(text)
    assert exc.value.line == line


def test_grid_error_has_column():
    with pytest.raises(GridParseError) as exc:
        parse_grid("q 6 n 2\n0 1\n2 9\n")
    assert (exc.value.line, exc.value.column) == (3, 3)


def test_header_size_mismatch():
    with pytest.raises(GridParseError):
        parse_grid("q 6 n 3\n0 1\n2 3\n")


def test_document_round_trip(w19):
    text = dumps_document(w19)
    assert loads_document(text) == w19
    assert dumps_document(loads_document(text)) == text
    doc = json.loads(text)
    assert doc == to_document(w19)
    assert list(doc) == ["format_version", "q", "n_rows", "n_cols", "rows"]
    assert from_document(doc) == w19
    assert load_matrix(text) == w19
    with pytest.raises(ValueError):
        from_document(dict(doc, format_version=2))


def test_report_json_round_trip(w19):
    r = verify_bh(w19.with_entry(3, 7, 0))
    back = VerificationReport.from_json(json.loads(json.dumps(r.to_json())))
    assert back == r
    assert r.to_json()["format_version"] == 1
