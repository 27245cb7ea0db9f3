import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compass_ft.code_model import (
    CellColor,
    CodeError,
    Coloring,
    CompassCode,
    PauliString,
    StabilizerStrip,
    build_code,
    code_distance_bruteforce,
    elongated_coloring,
    gf2_rank,
    validate,
)

R, B, K = CellColor.RED, CellColor.BLUE, CellColor.BLANK


def test_elongated_ell2_is_checkerboard():
    c = elongated_coloring(5, 2)
    assert c.rows() == ["RBRB", "BRBR", "RBRB", "BRBR"]
    assert c.fully_colored


def test_elongated_ell1_is_all_red():
    assert elongated_coloring(3, 1).rows() == ["RR", "RR"]


def test_elongated_large_modulus_marks_diagonal_only():
    assert elongated_coloring(4, 5).rows() == ["RBB", "BRB", "BBR"]


def test_elongated_dual_swaps_colors():
    assert elongated_coloring(4, 3, dual=True) == elongated_coloring(4, 3).dual()
    assert elongated_coloring(4, 3, dual=True).rows() == ["BRR", "RBR", "RRB"]


@pytest.mark.parametrize("n,ell", [(1, 2), (3, 0), (5, -1)])
def test_elongated_rejects_bad_arguments(n, ell):
    with pytest.raises(CodeError):
        elongated_coloring(n, ell)


def test_coloring_rejects_wrong_grid():
    with pytest.raises(CodeError):
        Coloring(3, ((R, R),))
    with pytest.raises(CodeError):
        Coloring.from_rows(["RX", "RR"])


def test_red_cells_cut_x_strips():
    # two red cells in the second column cut that X strip into three pieces
    rows = ["BBBB", "BRBB", "BBBB", "BRBB"]
    code = build_code(Coloring.from_rows(rows))
    col2 = [s for s in code.x_stabilizers if s.pair == 2]
    assert [(s.lo, s.hi) for s in col2] == [(1, 2), (3, 4), (5, 5)]
    assert sorted(col2[0].support()) == [(1, 2), (1, 3), (2, 2), (2, 3)]
    assert sorted(col2[2].support()) == [(5, 2), (5, 3)]


def test_checkerboard_n3_stabilizers():
    code = build_code(elongated_coloring(3, 2))
    weights = sorted(s.weight for s in code.stabilizers())
    assert weights == [2, 2, 2, 2, 4, 4, 4, 4]
    assert validate(code).independent_generators == 8


def test_shor_n3():
    code = build_code(elongated_coloring(3, 1))
    # all red: every X strip cut at every row, Z strips uncut
    assert all(s.weight == 2 for s in code.x_stabilizers)
    assert all(s.weight == 6 for s in code.z_stabilizers)
    assert validate(code).independent_generators == 8


def test_bacon_shor_strips():
    n = 5
    code = build_code(Coloring.uniform(n, K))
    assert len(code.x_stabilizers) == n - 1 and len(code.z_stabilizers) == n - 1
    assert all(s.lo == 1 and s.hi == n for s in code.stabilizers())
    rep = validate(code)
    assert rep.ok and rep.independent_generators == 2 * (n - 1)
    assert len(code.residual_gauge) == 2 * (n - 1) ** 2


def test_logicals():
    code = build_code(elongated_coloring(4, 3))
    assert code.logical_z.z_support == frozenset((1, j) for j in range(1, 5))
    assert code.logical_x.x_support == frozenset((i, 1) for i in range(1, 5))
    assert not code.logical_x.commutes_with(code.logical_z)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_surface_code_weights(n):
    code = build_code(elongated_coloring(n, 2))
    assert {s.weight for s in code.stabilizers()} <= {2, 4}


def test_validate_elongated_counts():
    assert validate(build_code(elongated_coloring(5, 2))).independent_generators == 24
    assert validate(build_code(elongated_coloring(4, 3))).independent_generators == 15


colorings = st.integers(2, 6).flatmap(
    lambda n: st.lists(
        st.lists(st.sampled_from([R, B, K]), min_size=n - 1, max_size=n - 1),
        min_size=n - 1, max_size=n - 1,
    ).map(lambda rows: Coloring(n, tuple(tuple(r) for r in rows)))
)


@settings(max_examples=60, deadline=None)
@given(colorings)
def test_rank_drops_by_one_per_blank_cell(coloring):
    code = build_code(coloring)
    rep = validate(code)
    blanks = sum(c is K for row in coloring.cells for c in row)
    assert rep.ok
    assert rep.independent_generators == coloring.n ** 2 - 1 - blanks


@settings(max_examples=30, deadline=None)
@given(colorings)
def test_json_round_trip(coloring):
    code = build_code(coloring)
    again = CompassCode.from_json(json.loads(code.dumps()))
    assert again == code


def test_json_rejects_mismatched_stabilizers():
    d = build_code(elongated_coloring(3, 2)).to_json()
    d["stabilizers"] = d["stabilizers"][:-1]
    with pytest.raises(CodeError):
        CompassCode.from_json(d)


def test_strip_json_round_trip():
    s = StabilizerStrip("X", 2, 1, 3)
    assert StabilizerStrip.from_json(s.to_json()) == s
    with pytest.raises(CodeError):
        StabilizerStrip("Y", 1, 1, 2)


def test_pauli_commutation():
    a = PauliString.x([(1, 1), (1, 2)])
    b = PauliString.z([(1, 1)])
    c = PauliString.z([(1, 1), (1, 2)])
    assert not a.commutes_with(b)
    assert a.commutes_with(c)


def test_gf2_rank():
    assert gf2_rank([0b11, 0b01, 0b10]) == 2
    assert gf2_rank([]) == 0


def test_distance_small():
    assert code_distance_bruteforce(build_code(elongated_coloring(3, 2)), "Z") == 3
    assert code_distance_bruteforce(build_code(Coloring.uniform(3, K)), "X") == 3


def test_distance_rejects_large_or_partial():
    with pytest.raises(CodeError):
        code_distance_bruteforce(build_code(elongated_coloring(6, 2)), "Z")
    with pytest.raises(CodeError):
        code_distance_bruteforce(build_code(Coloring.from_rows(["R.", "BB"])), "Z")
