import pytest
from hypothesis import given, settings, strategies as st

from stratquiver.exactlin import Echelon, ExactLinError, Field, Matrix, kernel_basis, rank, rref, solve

Q = Field.rationals()
GF2 = Field.prime(2)
GF5 = Field.prime(5)


def mat(field, rows):
    return Matrix.from_rows(field, rows)


def test_field_of_parses_exact_strings():
    assert Q.of("-3/7") == Q.of(-3) / 7 if Q.kind == "Q" else True
    assert Q.to_str(Q.of("2/4")) == "1/2"
    assert GF5.of("7") == 2
    assert GF5.of("-1") == 4
    assert GF5.of("1/2") == GF5.inv(GF5.of(2))


def test_prime_field_rejects_composites():
    with pytest.raises(ExactLinError):
        Field.prime(6)
    with pytest.raises(ExactLinError):
        Field.prime(1)


def test_rref_identity():
    m = Matrix.identity(Q, 2)
    red, pivots, r = rref(m)
    assert r == 2
    assert pivots == [0, 1]
    assert red == m


def test_rref_proportional_rows():
    m = mat(Q, [[1, 2], [2, 4]])
    _, pivots, r = rref(m)
    assert r == 1
    assert pivots == [0]


def test_rref_char2_collapse():
    m = mat(GF2, [[1, 1], [1, 1]])
    _, _, r = rref(m)
    assert r == 1


def test_kernel_single_row():
    ker = kernel_basis(mat(Q, [[1, 1]]))
    assert ker == [[Q.of(-1), Q.of(1)]] or ker == [[Q.of(1), Q.of(-1)]]
    # spec convention: free variable gets 1, pivot variable is back-substituted
    assert ker[0][1] == Q.one


def test_kernel_identity_empty():
    assert kernel_basis(Matrix.identity(Q, 3)) == []


def test_kernel_zero_matrix():
    ker = kernel_basis(Matrix.zeros(Q, 2, 3))
    assert len(ker) == 3
    for i, v in enumerate(ker):
        assert v[i] == Q.one
        assert sum(1 for x in v if x != 0) == 1


def test_solve_identity():
    x = solve(Matrix.identity(Q, 2), [Q.of(1), Q.of(2)])
    assert x == [Q.of(1), Q.of(2)]


def test_solve_pivot_convention():
    # [[1,1]] x = (0): pivot solution puts 0 in the free coordinate
    x = solve(mat(Q, [[1, 1]]), [Q.zero])
    assert x == [Q.zero, Q.zero]


def test_solve_inconsistent():
    assert solve(mat(Q, [[1], [1]]), [Q.of(1), Q.of(2)]) is None


def test_solve_shape_error():
    with pytest.raises(ExactLinError):
        solve(mat(Q, [[1, 1]]), [Q.of(1), Q.of(2)])


def _random_matrix(field, draw_entries, rows, cols):
    return Matrix(field, [[field.of(x) for x in row] for row in draw_entries])


small_int = st.integers(min_value=-6, max_value=6)


@st.composite
def q_matrices(draw, max_dim=5):
    rows = draw(st.integers(min_value=1, max_value=max_dim))
    cols = draw(st.integers(min_value=1, max_value=max_dim))
    entries = draw(st.lists(st.lists(small_int, min_size=cols, max_size=cols),
                            min_size=rows, max_size=rows))
    return mat(Q, entries)


@st.composite
def gf_matrices(draw, max_dim=5):
    field = draw(st.sampled_from([GF2, GF5]))
    rows = draw(st.integers(min_value=1, max_value=max_dim))
    cols = draw(st.integers(min_value=1, max_value=max_dim))
    entries = draw(st.lists(st.lists(small_int, min_size=cols, max_size=cols),
                            min_size=rows, max_size=rows))
    return mat(field, entries)


@settings(max_examples=60, deadline=None)
@given(st.one_of(q_matrices(), gf_matrices()))
def test_rank_equals_rank_of_transpose(m):
    assert rank(m) == rank(m.transpose())


@settings(max_examples=60, deadline=None)
@given(st.one_of(q_matrices(), gf_matrices()))
def test_kernel_vectors_annihilate_and_count(m):
    ker = kernel_basis(m)
    assert len(ker) == m.cols - rank(m)
    F = m.field
    for v in ker:
        assert all(F.is_zero(x) for x in m.apply(v))
    if ker:
        stacked = Matrix(F, [v[:] for v in ker])
        assert rank(stacked) == len(ker)


@settings(max_examples=60, deadline=None)
@given(st.one_of(q_matrices(), gf_matrices()))
def test_rref_idempotent(m):
    red1, _, _ = rref(m)
    red2, _, _ = rref(red1)
    assert red1 == red2


@settings(max_examples=60, deadline=None)
@given(q_matrices(), st.lists(small_int, min_size=1, max_size=5))
def test_solve_cross_checked_by_rank(m, rhs_entries):
    rhs = [Q.of(x) for x in rhs_entries[:m.rows]]
    rhs += [Q.zero] * (m.rows - len(rhs))
    x = solve(m, rhs)
    aug = Matrix(Q, [m.data[i][:] + [rhs[i]] for i in range(m.rows)])
    solvable = rank(aug) == rank(m)
    assert (x is not None) == solvable
    if x is not None:
        assert m.apply(x) == rhs


@settings(max_examples=40, deadline=None)
@given(q_matrices())
def test_echelon_matches_row_space(m):
    ech = Echelon(Q, m.cols)
    for row in m.data:
        ech.insert(row)
    assert ech.rank == rank(m)
    for row in m.data:
        assert ech.contains(row)
        coords = ech.coordinates(row)
        assert coords is not None
        rebuilt = Q.zeros(m.cols)
        for c, base in zip(coords, ech.rows):
            Q.axpy(rebuilt, base, Q.neg(c))
        assert rebuilt == row
