"""One mode per element, identical half-wave dipoles 0.4 apart, N = 2..5."""

import numpy as np
import pytest

from ccm import ArrayLayout, WireDipole, assemble_array, couple_n, isolated_modes

# (N, mode index) -> display-normalized coupling matrix, columns in our order
ONE_TO_ONE = {
    (2, 0): [
        [1000, 1000],
        [1000, -1000],
    ],
    (2, 1): [
        [1000, 1000],
        [1000, -1000],
    ],
    (2, 2): [
        [1000, 1000],
        [1000, -1000],
    ],
    (2, 3): [
        [1000, 1000],
        [1000, -1000],
    ],
    (3, 0): [
        [626.36, 1000, 1000],
        [1000, 0, -999.18],
        [626.36, -1000, 1000],
    ],
    (3, 1): [
        [503.09, 1000, -987.32],
        [1000, 0, 1000],
        [503.09, -1000, -987.32],
    ],
    (3, 2): [
        [610.49, -1000, -818.8],
        [1000, 0, 1000],
        [610.49, 1000, -818.8],
    ],
    (3, 3): [
        [661.25, 1000, -756.13],
        [1000, 0, 1000],
        [661.25, -1000, -756.13],
    ],
    (4, 0): [
        [486.89, -1000, 1000, 957.85],
        [1000, -708.45, -419.55, -1000],
        [1000, 708.45, -419.55, 1000],
        [486.89, 1000, 1000, -957.85],
    ],
    (4, 1): [
        [-1000, 22.52, 1000, 810.3],
        [-814.32, 1000, -29.08, -1000],
        [814.32, 1000, -29.08, 1000],
        [1000, 22.52, 1000, -810.3],
    ],
    (4, 2): [
        [424.04, -1000, 1000, -678.29],
        [1000, -678.39, -424.28, 1000],
        [1000, 678.39, -424.28, -1000],
        [424.04, 1000, 1000, 678.29],
    ],
    (4, 3): [
        [565.01, 1000, 1000, 670.61],
        [1000, 670.63, -565.02, -1000],
        [1000, -670.63, -565.02, 1000],
        [565.01, -1000, 1000, -670.61],
    ],
    (5, 0): [
        [385.73, 757.92, 1000, -1000, 859.61],
        [807.35, 1000, 130.36, 620.33, -938.14],
        [1000, 0, -916.18, 0, 1000],
        [807.35, -1000, 130.36, -620.33, -938.14],
        [385.73, -757.92, 1000, 1000, 859.61],
    ],
    (5, 1): [
        [-646.62, -532.28, 752.92, 1000, 639.83],
        [96.9, -1000, 1000, -537.45, -870.54],
        [1000, 0, 772.66, 0, 1000],
        [96.9, 1000, 1000, 537.45, -870.54],
        [-646.62, 532.28, 752.92, -1000, 639.83],
    ],
    (5, 2): [
        [-872.36, 124.84, 1000, -1000, 562.1],
        [-1000, 670.49, 287.32, 872.52, -850.47],
        [0, 1000, -635.67, 0, 1000],
        [1000, 670.49, 287.32, -872.52, -850.47],
        [872.36, 124.84, 1000, 1000, 562.1],
    ],
    (5, 3): [
        [349.61, 1000, 1000, 925.23, 651.63],
        [809.84, 925.21, 176.77, -1000, -898.73],
        [1000, 0, -985.58, 0, 1000],
        [809.84, -925.21, 176.77, 1000, -898.73],
        [349.61, -1000, 1000, -925.23, 651.63],
    ],
}


def one_to_one(n, mode):
    dipoles = tuple(WireDipole(0.5, x_position=0.4 * i) for i in range(n))
    blocks = assemble_array(ArrayLayout(dipoles))
    iso = [isolated_modes(z.real, z.imag, mode + 1).select([mode]) for z in blocks.self_blocks]
    return couple_n(iso, blocks)


@pytest.mark.parametrize("n,mode", sorted(ONE_TO_ONE))
class TestOneToOne:
    def test_matches_reference(self, n, mode):
        ref = np.array(ONE_TO_ONE[n, mode], dtype=float)
        d = one_to_one(n, mode).coupling.display_m
        peak = np.argmax(np.abs(ref), axis=0)
        cols = np.arange(n)
        d = d * np.sign(d[peak, cols] * ref[peak, cols])
        # mesh-level agreement: 1% of the column peak
        assert np.max(np.abs(d - ref)) < 10, np.round(d, 2)

    def test_mirror_symmetry(self, n, mode):
        d = one_to_one(n, mode).coupling.display_m
        assert np.allclose(np.abs(d), np.abs(d[::-1]), atol=1e-6)
        assert np.all(np.max(np.abs(d), axis=0) == 1000)
