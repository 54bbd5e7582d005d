import numpy as np
import pytest

from ccm import ModeSet, WireDipole, assemble_self, isolated_modes, modal_excitation, modal_solve
from ccm.errors import DimensionMismatch, KTooLarge, SingularModalPower
from ccm.mom import delta_gap, self_impedance


def modes_for(length, k, segments=None, check=True):
    r, x = assemble_self(WireDipole(length, segments=segments))
    return r, x, isolated_modes(r, x, k, check=check)


class TestIsolatedEigenvalues:
    def test_half_wave(self, half_wave_modes):
        lam = half_wave_modes.lambdas
        assert 0.3 <= lam[0] <= 1.1
        assert np.all(lam[1:4] < 0)

    def test_short_dipole(self):
        lam = modes_for(0.3, 2)[2].lambdas
        assert np.all(lam < 0) and abs(lam[0]) < abs(lam[1])

    def test_long_dipole(self):
        assert modes_for(0.7, 1)[2].lambdas[0] > 0

    def test_magnitude_ladder(self, half_wave_modes):
        # each higher mode is one to three decades more reactive
        ratios = np.abs(half_wave_modes.lambdas[1:] / half_wave_modes.lambdas[:-1])
        assert np.all(ratios > 10)

    def test_first_mode_even_second_odd(self, half_wave_modes):
        cur = half_wave_modes.currents
        assert np.allclose(cur[:, 0], cur[::-1, 0], atol=1e-10)
        assert np.allclose(cur[:, 1], -cur[::-1, 1], atol=1e-10)

    def test_fourth_mode_changes_sign_somewhere(self):
        signs = {np.sign(modes_for(length, 4)[2].lambdas[3])
                 for length in np.linspace(0.25, 0.55, 13)}
        assert signs == {-1.0, 1.0}


class TestModeSetInvariants:
    @pytest.mark.parametrize("length,k", [(0.3, 4), (0.5, 4), (0.7, 6), (1.0, 8)])
    def test_no_violations(self, length, k):
        r, _, m = modes_for(length, k)
        assert m.violations(r) == []
        assert np.all(np.diff(np.abs(m.lambdas)) >= 0)
        assert np.all(m.p_r > 0)
        assert np.allclose(m.p_x, m.lambdas * m.p_r, rtol=1e-8, atol=0)

    def test_orthogonality_refinement(self):
        # the defect is rounding noise and does not rise above its floor as the mesh is refined
        defects = []
        for segments in (15, 31, 61, 121):
            r, _, m = modes_for(0.5, 4, segments)
            defects.append(m.orthogonality_defect(r))
        assert max(defects) < 1e-8
        for prev, cur in zip(defects, defects[1:]):
            assert cur <= max(prev, 1e-10)

    def test_immutable(self, half_wave_modes):
        with pytest.raises(ValueError):
            half_wave_modes.lambdas[0] = 0.0

    def test_select(self, half_wave_modes):
        s = half_wave_modes.select([1])
        assert s.k == 1 and s.lambdas[0] == half_wave_modes.lambdas[1]
        with pytest.raises(KTooLarge):
            half_wave_modes.select([4])

    @pytest.mark.parametrize("k", [0, 31])
    def test_k_out_of_range(self, half_wave, k):
        _, z = half_wave
        with pytest.raises(KTooLarge):
            isolated_modes(z.real, z.imag, k)

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            ModeSet(np.ones(2), np.ones((3, 3)), np.ones(2), np.ones(2))


class TestExcitation:
    def test_zero(self, half_wave_modes):
        assert np.array_equal(modal_excitation(half_wave_modes, np.zeros(30)), np.zeros(4))

    def test_delta_gap_skips_odd_modes(self, half_wave, half_wave_modes):
        d, _ = half_wave
        e = modal_excitation(half_wave_modes, delta_gap(d))
        assert np.all(np.abs(e[[1, 3]]) <= 1e-10 * np.max(np.abs(e)))
        assert np.all(np.abs(e[[0, 2]]) > 0)

    def test_radiated_field_of_first_mode(self, half_wave, half_wave_modes):
        _, z = half_wave
        m = half_wave_modes
        r = z.real + m.shift * np.eye(30)
        e = modal_excitation(m, r @ m.currents[:, 0])
        assert e[0].real == pytest.approx(m.p_r[0], rel=1e-12)
        assert np.all(np.abs(e[1:]) <= 1e-8 * np.sqrt(m.p_r[0] * m.p_r[1:]))

    def test_dimension(self, half_wave_modes):
        with pytest.raises(DimensionMismatch):
            modal_excitation(half_wave_modes, np.zeros(29))


class TestModalSolve:
    def test_zero(self, half_wave_modes):
        s = modal_solve(half_wave_modes, np.zeros(30))
        assert not np.any(s.alpha) and not np.any(s.current)

    def test_weights_identity(self, half_wave, half_wave_modes):
        d, _ = half_wave
        m = half_wave_modes
        s = modal_solve(m, delta_gap(d))
        assert np.allclose(s.alpha * m.p_r * (1 + 1j * m.lambdas), s.excitation, rtol=1e-10, atol=0)
        assert np.allclose(s.current, m.currents @ s.alpha, rtol=0, atol=1e-12)

    def test_full_space_matches_direct_solve(self):
        d = WireDipole(0.5, segments=15)
        z = self_impedance(d)
        m = isolated_modes(z.real, z.imag, 14, check=False)
        v = delta_gap(d)
        # modes are taken against R plus the recorded shift
        direct = np.linalg.solve(z + m.shift * np.eye(14), v)
        s = modal_solve(m, v)
        assert np.linalg.norm(s.current - direct) <= 1e-8 * np.linalg.norm(direct)

    def test_one_mode_near_resonance(self, half_wave, half_wave_modes):
        d, _ = half_wave
        v = delta_gap(d)
        one = modal_solve(half_wave_modes.select([0]), v).current
        four = modal_solve(half_wave_modes, v).current
        assert np.linalg.norm(one - four) / np.linalg.norm(four) < 0.1

    def test_singular_power(self):
        m = ModeSet(np.zeros(1), np.ones((2, 1)), np.zeros(1), np.zeros(1))
        with pytest.raises(SingularModalPower):
            modal_solve(m, np.ones(2))
