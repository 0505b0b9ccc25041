import numpy as np
import pytest
from scipy import ndimage

from ewpfista.core import GridError
from ewpfista.edges import detect_tv, tv_gradient
from ewpfista.phantoms import boundary_map, piecewise_labels, piecewise_phantom, shepp_logan


def test_shepp_logan_basics():
    p = shepp_logan(128)
    assert p.shape == (128, 128)
    assert p.data[0, 0] == 0 and p.data[-1, -1] == 0
    assert not p.data.imag.any()
    assert p.data.real.min() >= 0 and p.data.real.max() <= 1
    assert p == shepp_logan(128)
    assert len(np.unique(p.data.real)) >= 5
    with pytest.raises(GridError):
        shepp_logan(8)


def test_shepp_logan_phase_keeps_magnitude():
    a, b = shepp_logan(64), shepp_logan(64, phase=True)
    assert np.allclose(np.abs(b.data), a.data.real, atol=1e-14)
    assert b.data.imag.any()


def test_single_rectangle_perimeter():
    labels = np.zeros((16, 16), int)
    labels[4:10, 3:12] = 1
    edges = boundary_map(labels)
    inner = np.zeros((16, 16), bool)
    inner[5:9, 4:11] = True
    expect = (labels == 1) & ~inner
    assert np.array_equal(edges, expect)


def test_two_region_phantom_is_one_shape_outline():
    for seed in range(6):
        labels, vals = piecewise_labels(64, 2, seed, kinds=("rect",))
        img, edges = piecewise_phantom(64, 2, seed, kinds=("rect",))
        rows, cols = np.nonzero(labels)
        r0, r1, c0, c1 = rows.min(), rows.max(), cols.min(), cols.max()
        expect = np.zeros((64, 64))
        expect[r0:r1 + 1, [c0, c1]] = 1
        expect[[r0, r1], c0:c1 + 1] = 1
        assert np.array_equal(edges.data, expect)
        assert vals.tolist() == [0.0, 0.5]


def test_piecewise_invariants():
    img, edges = piecewise_phantom(128, 6, 7)
    labels, vals = piecewise_labels(128, 6, 7)
    assert np.array_equal(img.data.real, vals[labels])
    assert len(set(vals)) == 6 and vals[0] == 0
    assert set(np.unique(edges.data)) <= {0.0, 1.0}
    a, b = piecewise_phantom(128, 6, 7)
    assert a == img and b == edges
    assert piecewise_phantom(128, 6, 8)[0] != img


@pytest.mark.parametrize("seed", range(5))
def test_tv_fires_only_next_to_oracle_edges(seed):
    img, edges = piecewise_phantom(96, 5, seed)
    grown = ndimage.maximum_filter(edges.data, size=3, mode="wrap")
    assert not tv_gradient(img.data.real)[grown == 0].any()
    # and every oracle pixel has TV activity within one pixel
    near = ndimage.maximum_filter(detect_tv(img.data.real).data > 0, size=3, mode="wrap")
    assert near[edges.data == 1].all()


def test_piecewise_validation():
    with pytest.raises(ValueError):
        piecewise_phantom(64, 1, 0)
    with pytest.raises(ValueError):
        piecewise_phantom(64, 3, 0, kinds=("triangle",))
