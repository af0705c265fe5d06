from __future__ import annotations

import math

import numpy as np
import pytest

from phpipe.builders import build_rips
from phpipe.core import boundary_matrix, column_add_count
from phpipe.diagrams import (
    beta,
    extract_pairs,
    first_row_occurrence,
    fr_pairs_from_reduced,
    low,
    read_diagram_csv,
    reduce,
    to_value_diagrams,
    write_diagram_csv,
)
from support import make_complex
from oracles import (
    dense_from_columns,
    naive_beta,
    naive_fr,
    naive_low,
    random_filtered_complex,
)

EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])


def pair_index_set(pairs):
    return {(i, j) for i, j, _ in pairs.pairs}


class TestLowBeta:
    def test_triangle_lows(self, triangle_matrix):
        assert low(triangle_matrix, 3) == 1
        assert low(triangle_matrix, 0) == -1
        assert low(triangle_matrix, 6) == 5

    def test_triangle_betas(self, triangle_matrix):
        assert beta(triangle_matrix, 3) == 0
        assert beta(triangle_matrix, 5) == -1
        assert beta(triangle_matrix, 4) == 2 == low(triangle_matrix, 4)

    def test_out_of_range(self, triangle_matrix):
        with pytest.raises(IndexError):
            low(triangle_matrix, 7)
        with pytest.raises(IndexError):
            beta(triangle_matrix, -1)

    def test_against_naive_on_random(self):
        rng = np.random.default_rng(21)
        for _ in range(15):
            m = boundary_matrix(make_complex(random_filtered_complex(rng)))
            dense = dense_from_columns(m.columns, m.n)
            occ = first_row_occurrence(m)
            for j in range(m.n):
                assert low(m, j) == naive_low(dense, j)
                assert beta(m, j, occ) == naive_beta(dense, j)


class TestReduce:
    def test_triangle_reduction(self, triangle_matrix):
        reduced = reduce(triangle_matrix)
        assert reduced.columns == ((), (), (), (0, 1), (0, 2), (), (3, 4, 5))

    def test_distinct_lows_fixpoint(self, triangle_matrix):
        reduced = reduce(triangle_matrix)
        assert reduce(reduced).columns == reduced.columns

    def test_input_not_mutated(self, triangle_matrix):
        before = triangle_matrix.columns
        reduce(triangle_matrix)
        assert triangle_matrix.columns == before

    def test_matches_naive_oracle_on_random(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            m = boundary_matrix(make_complex(random_filtered_complex(rng)))
            fr = extract_pairs(m, "fr")
            exp_pairs, exp_ess = naive_fr(dense_from_columns(m.columns, m.n))
            assert pair_index_set(fr) == exp_pairs
            assert set(fr.essentials) == exp_ess

    def test_reduced_matrix_equals_naive_columns(self):
        from oracles import naive_reduce

        rng = np.random.default_rng(27)
        for _ in range(15):
            m = boundary_matrix(make_complex(random_filtered_complex(rng)))
            got = dense_from_columns(reduce(m).columns, m.n)
            want = naive_reduce(dense_from_columns(m.columns, m.n))
            assert (got == want).all()

    def test_reduced_lows_distinct(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            m = boundary_matrix(make_complex(random_filtered_complex(rng)))
            reduced = reduce(m)
            lows = [c[-1] for c in reduced.columns if c]
            assert len(lows) == len(set(lows))


class TestExtract:
    def test_triangle_all_kinds(self, triangle_matrix):
        fr = extract_pairs(triangle_matrix, "fr")
        assert pair_index_set(fr) == {(1, 3), (2, 4), (5, 6)}
        assert fr.essentials == (0,)
        assert pair_index_set(extract_pairs(triangle_matrix, "l1")) == {
            (1, 3), (2, 4), (2, 5), (5, 6),
        }
        assert pair_index_set(extract_pairs(triangle_matrix, "nnb")) == {
            (1, 3), (2, 4), (5, 6),
        }
        assert pair_index_set(extract_pairs(triangle_matrix, "ap")) == {(2, 4)}

    def test_degrees_come_from_birth_cell(self, triangle_matrix):
        fr = extract_pairs(triangle_matrix, "fr")
        assert {(i, j): d for i, j, d in fr.pairs} == {
            (1, 3): 0, (2, 4): 0, (5, 6): 1,
        }

    def test_vertices_only(self):
        cx = make_complex([(0, (v,), 0.0) for v in range(3)])
        m = boundary_matrix(cx)
        for kind in ("fr", "l1", "nnb", "ap"):
            ps = extract_pairs(m, kind)
            assert ps.pairs == ()
        assert extract_pairs(m, "fr").essentials == (0, 1, 2)

    def test_unknown_kind(self, triangle_matrix):
        with pytest.raises(ValueError):
            extract_pairs(triangle_matrix, "xyz")

    def test_unreduced_kinds_never_add_columns(self, triangle_matrix):
        rng = np.random.default_rng(31)
        matrices = [triangle_matrix] + [
            boundary_matrix(make_complex(random_filtered_complex(rng)))
            for _ in range(5)
        ]
        before = column_add_count()
        for m in matrices:
            for kind in ("l1", "nnb", "ap"):
                extract_pairs(m, kind)
        assert column_add_count() == before
        extract_pairs(matrices[-1], "fr")
        assert column_add_count() >= before

    def test_structural_invariants_random(self):
        rng = np.random.default_rng(37)
        for _ in range(40):
            m = boundary_matrix(make_complex(random_filtered_complex(rng)))
            reduced = reduce(m)
            fr = pair_index_set(fr_pairs_from_reduced(reduced))
            l1 = pair_index_set(extract_pairs(m, "l1"))
            nnb = pair_index_set(extract_pairs(m, "nnb"))
            ap = pair_index_set(extract_pairs(m, "ap"))
            assert ap <= nnb <= l1
            assert ap <= fr
            occ = first_row_occurrence(m)
            for j in range(m.n):
                b = beta(m, j, occ)
                if b != -1:
                    lr = low(reduced, j)
                    assert lr != -1
                    assert b <= lr <= low(m, j)
                    if b == low(m, j):
                        assert lr == low(m, j)

    def test_l1_of_reduced_equals_fr(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            m = boundary_matrix(make_complex(random_filtered_complex(rng)))
            reduced = reduce(m)
            assert pair_index_set(extract_pairs(reduced, "l1")) == pair_index_set(
                extract_pairs(m, "fr")
            )


class TestValueDiagrams:
    def test_triangle_fr_values(self, triangle_complex, triangle_matrix):
        fr = extract_pairs(triangle_matrix, "fr")
        dgs = to_value_diagrams(fr, triangle_complex)
        by_degree = {d.degree: sorted(d.points) for d in dgs}
        assert by_degree == {0: [(0.0, 1.0), (0.0, 1.0)], 1: [(1.0, 2.0)]}

    def test_rips_l1_degree1_empty_after_drop(self):
        cx = build_rips(EQUILATERAL, max_dim=2, threshold=2.0)
        m = boundary_matrix(cx)
        dgs = to_value_diagrams(extract_pairs(m, "l1"), cx, ephemeral="drop")
        by_degree = {d.degree: d.points for d in dgs}
        assert by_degree[1] == ()

    def test_keep_ephemeral_retains_pairs(self):
        cx = build_rips(EQUILATERAL, max_dim=2, threshold=2.0)
        m = boundary_matrix(cx)
        dgs = to_value_diagrams(extract_pairs(m, "l1"), cx, ephemeral="keep")
        by_degree = {d.degree: d.points for d in dgs}
        assert by_degree[1] == ((1.0, 1.0),)

    def test_essential_cap(self, triangle_complex, triangle_matrix):
        fr = extract_pairs(triangle_matrix, "fr")
        dgs = to_value_diagrams(fr, triangle_complex, essential="cap", cap=9.0)
        deg0 = next(d for d in dgs if d.degree == 0)
        assert (0.0, 9.0) in deg0.points

    def test_cap_below_birth_rejected(self, triangle_complex, triangle_matrix):
        fr = extract_pairs(triangle_matrix, "fr")
        cells = triangle_complex
        with pytest.raises(ValueError, match="cap"):
            to_value_diagrams(fr, cells, essential="cap", cap=-1.0)

    def test_birth_never_exceeds_death(self):
        rng = np.random.default_rng(43)
        for _ in range(10):
            cx = make_complex(random_filtered_complex(rng))
            m = boundary_matrix(cx)
            for kind in ("fr", "l1", "nnb", "ap"):
                for dg in to_value_diagrams(extract_pairs(m, kind), cx,
                                            ephemeral="keep"):
                    assert all(b <= d for b, d in dg.points)

    def test_fr_value_diagram_invariant_under_tie_breaks(self):
        # same complex ordered with two different face-respecting tie-breaks
        rng = np.random.default_rng(47)
        from phpipe.core import Cell, FilteredComplex

        for _ in range(15):
            raw = random_filtered_complex(rng)
            fwd = sorted(raw, key=lambda t: (t[2], t[0], t[1]))
            rev = sorted(raw, key=lambda t: (t[2], t[0], tuple(-v for v in t[1])))
            results = []
            for ordering in (fwd, rev):
                cells = tuple(
                    Cell(i, d, v, f) for i, (d, v, f) in enumerate(ordering)
                )
                cx = FilteredComplex(cells=cells)
                m = boundary_matrix(cx)
                dgs = to_value_diagrams(extract_pairs(m, "fr"), cx, ephemeral="keep")
                results.append(
                    {d.degree: tuple(sorted(d.points)) for d in dgs}
                )
            assert results[0] == results[1]


class TestDiagramCsv:
    def test_round_trip(self, tmp_path, triangle_complex, triangle_matrix):
        fr = extract_pairs(triangle_matrix, "fr")
        path = tmp_path / "fr.csv"
        n = write_diagram_csv(path, [("tri", fr, triangle_complex)])
        assert n == 3
        back = read_diagram_csv(path)
        assert back[("tri", 0)].points == ((0.0, 1.0), (0.0, 1.0))
        assert back[("tri", 1)].points == ((1.0, 2.0),)

    def test_inf_requires_explicit_request(self, tmp_path, triangle_complex,
                                           triangle_matrix):
        fr = extract_pairs(triangle_matrix, "fr")
        path = tmp_path / "ess.csv"
        write_diagram_csv(
            path, [("tri", fr, triangle_complex)],
            essential="cap", cap=math.inf,
        )
        with pytest.raises(ValueError, match="infinite"):
            read_diagram_csv(path)
        back = read_diagram_csv(path, allow_inf=True)
        assert (0.0, math.inf) in back[("tri", 0)].points

    def test_cap_without_mode_rejected(self, tmp_path, triangle_complex,
                                       triangle_matrix):
        fr = extract_pairs(triangle_matrix, "fr")
        with pytest.raises(ValueError):
            write_diagram_csv(
                tmp_path / "x.csv", [("t", fr, triangle_complex)], cap=3.0
            )
