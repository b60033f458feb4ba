import math

import numpy as np
import pytest

from wavebem1d.mesh import (
    LateralMesh,
    paper_nonuniform_initial,
    refine,
    satisfies_slice_shift,
    shifted_pair_mesh,
    slice_count,
    strand_index,
    uniform_mesh,
)


def test_uniform_mesh_breaks():
    m = uniform_mesh(3.0, 6.0, 4)
    for s in ("left", "right"):
        np.testing.assert_allclose(m.breaks(s), [0, 1.5, 3, 4.5, 6], rtol=0, atol=0)
    assert m.total_elements == 8


def test_uniform_mesh_single_element():
    m = uniform_mesh(3.0, 3.0, 1)
    assert m.left_breaks.tolist() == [0.0, 3.0]
    assert slice_count(3.0, 3.0).n == 1


def test_uniform_mesh_rejects_bad_count():
    with pytest.raises(ValueError):
        uniform_mesh(3.0, 6.0, 0)
    with pytest.raises(ValueError):
        uniform_mesh(3.0, 6.0, 2.5)


@pytest.mark.parametrize(
    "L, T, n, last",
    [(3.0, 6.0, 2, (3.0, 6.0)), (3.0, 3.0, 1, (0.0, 3.0)), (3.0, 2 * math.pi, 3, (6.0, 2 * math.pi))],
)
def test_slice_count(L, T, n, last):
    ts = slice_count(L, T)
    assert ts.n == n
    assert ts.slices[-1] == pytest.approx(last)
    assert ts.edges[0] == 0.0


def test_slice_count_rejects_nonpositive():
    with pytest.raises(ValueError):
        slice_count(0.0, 1.0)


def test_mesh_validation():
    with pytest.raises(ValueError):
        LateralMesh(3.0, 6.0, [0.0, 2.0, 1.0, 6.0], [0.0, 6.0])
    with pytest.raises(ValueError):
        LateralMesh(3.0, 6.0, [0.0, 5.0], [0.0, 6.0])
    with pytest.raises(ValueError):
        LateralMesh(-1.0, 6.0, [0.0, 6.0], [0.0, 6.0])
    with pytest.raises(ValueError):
        strand_index("middle")


def test_mesh_is_immutable():
    m = uniform_mesh(3.0, 6.0, 4)
    with pytest.raises(ValueError):
        m.left_breaks[1] = 0.3


def test_json_round_trip():
    m = shifted_pair_mesh(3.0, 2, [1.0], [2.0])
    back = LateralMesh.from_json(m.to_json())
    assert back == m
    assert np.array_equal(back.right_breaks, m.right_breaks)


def test_uniform_meshes_satisfy_shift():
    for n in (1, 2, 3):
        for N in (1, 4, 7):
            assert satisfies_slice_shift(uniform_mesh(3.0, n * 3.0, N * n))


def test_uniform_mesh_misaligned_with_slices_fails():
    # 5 elements on (0, 6): breakpoint 1.2 has no partner 4.2 on the other strand
    assert not satisfies_slice_shift(uniform_mesh(3.0, 6.0, 5))


def test_shifted_pair_distinct_seeds():
    m = shifted_pair_mesh(3.0, 2, [1.0], [2.0])
    assert m.left_breaks.tolist() == [0.0, 1.0, 3.0, 5.0, 6.0]
    assert m.right_breaks.tolist() == [0.0, 2.0, 3.0, 4.0, 6.0]
    assert satisfies_slice_shift(m, tol=0.0)


def test_shifted_pair_single_slice_equals_seeds():
    m = shifted_pair_mesh(3.0, 1, [0.5, 2.0], [1.0])
    assert m.left_breaks.tolist() == [0.0, 0.5, 2.0, 3.0]
    assert m.right_breaks.tolist() == [0.0, 1.0, 3.0]


def test_shifted_pair_identical_seeds_passes():
    m = shifted_pair_mesh(3.0, 3, [0.7, 1.9], [0.7, 1.9])
    assert satisfies_slice_shift(m, tol=0.0)
    assert np.array_equal(m.left_breaks, m.right_breaks)


def test_shifted_pair_rejects_bad_seed():
    with pytest.raises(ValueError):
        shifted_pair_mesh(3.0, 2, [2.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        shifted_pair_mesh(3.0, 2, [4.0], [1.0])
    with pytest.raises(ValueError):
        shifted_pair_mesh(3.0, 0, [1.0], [1.0])


def test_paper_nonuniform_initial():
    m = paper_nonuniform_initial()
    assert (m.L, m.T) == (3.0, 2 * math.pi)
    np.testing.assert_allclose(np.diff(m.left_breaks), 2 * math.pi / 40)
    np.testing.assert_allclose(np.diff(m.right_breaks), 2 * math.pi / 24)
    assert not satisfies_slice_shift(m)
    r = refine(m)
    assert (r.n_elements(0), r.n_elements(1)) == (80, 48)
    assert not satisfies_slice_shift(r)


def test_refine_uniform():
    r = refine(uniform_mesh(3.0, 6.0, 4))
    assert np.array_equal(r.left_breaks, uniform_mesh(3.0, 6.0, 8).left_breaks)
    assert r.h == uniform_mesh(3.0, 6.0, 4).h / 2


def test_refine_preserves_shift_property():
    m = shifted_pair_mesh(3.0, 3, [0.4, 2.2], [1.3])
    assert satisfies_slice_shift(refine(refine(m)))
