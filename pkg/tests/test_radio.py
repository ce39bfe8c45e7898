import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skyslice.admission import Pairing
from skyslice.airspace import Vec3, azimuth, distance
from skyslice.errors import ContractViolation, DegenerateGeometryError, DomainError
from skyslice.radio import (
    RadioParams,
    achievable_rate,
    beam_gain,
    effective_gain,
    link_budget,
    max_beam_gain,
    optimal_beamwidth,
    serving_gain,
    sinr,
)


# literal transcriptions used as oracles ---------------------------------------

def eq4_gain(phi, phi_3db, v_beam, s_beam):
    return 16 / (6.76 * phi_3db) * math.exp(-4 * math.log(2) * phi**2 / phi_3db**2) * v_beam * s_beam


def eq7_gain(phi):
    return 16 / (6.76 * phi * math.sqrt(8 * math.log(2) * math.e))


def eq3_rate(v_band, s_band, p_i, h_ii, interferers, noise, g, d):
    return v_band * s_band * math.log2(1 + p_i * h_ii / (sum(p * h for p, h in interferers) + noise)) * g / d**2


# ---------------------------------------------------------------------------------


def test_max_gain_at_unit_azimuth():
    assert max_beam_gain(1.0) == pytest.approx(0.6097, abs=1e-4)
    assert max_beam_gain(1.0) == pytest.approx(16 / (6.76 * math.sqrt(8 * math.log(2) * math.e)), rel=1e-15)


def test_doubling_phi_halves_gain():
    for phi in (0.05, 0.3, 1.2):
        assert max_beam_gain(2 * phi) == pytest.approx(max_beam_gain(phi) / 2, rel=1e-14)


@pytest.mark.parametrize("phi", [0.0, -0.1])
def test_max_gain_domain(phi):
    with pytest.raises(DomainError):
        max_beam_gain(phi)


def test_effective_gain_examples():
    assert effective_gain(1.0, 0.0, 1.0) == 0.0
    assert effective_gain(1.0, 1.0, 1.0) == pytest.approx(0.6097, abs=1e-4)
    assert effective_gain(0.7, 0.5, 1.0) == pytest.approx(0.5 * effective_gain(0.7, 1.0, 1.0), rel=1e-15)
    with pytest.raises(ContractViolation):
        effective_gain(1.0, 1.5, 1.0)


def test_beam_gain_matches_literal_pattern():
    rng = np.random.default_rng(3)
    for phi, width, v in zip(rng.uniform(0.01, 1.5, 1000), rng.uniform(0.01, 2.0, 1000), rng.uniform(0, 1, 1000)):
        assert beam_gain(phi, width) * v == pytest.approx(eq4_gain(phi, width, v, 1.0), rel=1e-12, abs=1e-300)


def test_peak_gain_matches_closed_form():
    rng = np.random.default_rng(4)
    for phi in rng.uniform(1e-3, 3.0, 1000):
        assert max_beam_gain(phi) == pytest.approx(eq7_gain(phi), rel=1e-12)


def random_geometry(rng):
    ev = Vec3(*rng.uniform(-3000, 3000, 2), rng.choice([100.0, 200.0]))
    bs = Vec3(*rng.uniform(-3000, 3000, 2), 0.0)
    return ev, bs


def test_beamwidth_scan_attains_the_peak_gain():
    """Scanning the rate over the beamwidth finds the closed-form peak gain."""
    rng = np.random.default_rng(20)
    widths_rel = np.geomspace(0.2, 20.0, 200_001)
    step = widths_rel[1] / widths_rel[0] - 1.0
    for _ in range(20):
        ev, bs = random_geometry(rng)
        phi, d = azimuth(ev, bs), distance(ev, bs)
        widths = widths_rel * phi
        gains = 16 / (6.76 * widths) * np.exp(-4 * math.log(2) * phi**2 / widths**2)
        rates = 0.5 * 100 * math.log2(1 + 1e3) * gains / d**2
        k = int(np.argmax(rates))
        assert 0 < k < len(widths) - 1
        best_gain = gains[k]
        assert best_gain <= max_beam_gain(phi) * (1 + 1e-12)
        assert best_gain == pytest.approx(max_beam_gain(phi), rel=step**2)
        assert widths[k] == pytest.approx(optimal_beamwidth(phi), rel=step)


def test_rate_is_stationary_at_the_optimal_beamwidth():
    rng = np.random.default_rng(21)
    for _ in range(20):
        ev, bs = random_geometry(rng)
        phi, d = azimuth(ev, bs), distance(ev, bs)
        w0 = optimal_beamwidth(phi)

        def rate(width):
            return achievable_rate(0.4, 100.0, 1e4, beam_gain(phi, width), d)

        h = 1e-5 * w0
        slope = (rate(w0 + h) - rate(w0 - h)) / (2 * h)
        assert abs(slope * w0 / rate(w0)) < 1e-6


def test_serving_gain_floors_the_azimuth():
    params = RadioParams(beamwidth_3db=0.2)
    floor = 0.2 / math.sqrt(8 * math.log(2))
    assert params.min_azimuth == pytest.approx(floor)
    assert serving_gain(1e-6, 1.0, 1.0, params) == pytest.approx(max_beam_gain(floor))
    assert serving_gain(0.5, 1.0, 1.0, params) == pytest.approx(max_beam_gain(0.5))


def test_single_link_sinr():
    params = RadioParams(tx_power=0.1, noise_power=1e-9)
    assert sinr(0, 0, [(0, 0)], params) == pytest.approx(1e8)


def test_noise_dominated_limit():
    assert sinr(0, 0, [(0, 0)], RadioParams(noise_power=1e12)) < 1e-12


def test_symmetric_interferers_see_equal_sinr():
    params = RadioParams()
    links = [Pairing(0, 0, 0, 1.0), Pairing(1, 1, 1, 1.0)]
    assert sinr(0, 0, links, params) == sinr(1, 1, links, params)
    assert sinr(0, 0, links, params) == pytest.approx(0.1 / (0.1 + 1e-9))


def test_same_bs_links_do_not_interfere():
    params = RadioParams()
    assert sinr(0, 0, [(0, 0), (1, 0)], params) == sinr(0, 0, [(0, 0)], params)


def test_sinr_matches_literal_quotient_with_per_link_gains():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        n, m = rng.integers(2, 7), rng.integers(2, 4)
        bs_of = rng.integers(0, m, n)
        powers = {i: float(p) for i, p in enumerate(rng.uniform(0.01, 1.0, n))}
        h = {(i, j): float(rng.exponential()) + 1e-3 for i in range(n) for j in range(m)}
        noise = float(rng.uniform(1e-10, 1e-6))
        params = RadioParams(noise_power=noise, tx_power_by_evtol=powers, channel_gain_sq=h)
        links = [(i, int(bs_of[i])) for i in range(n)]
        i = int(rng.integers(n))
        j = int(bs_of[i])
        interf = [(powers[k], h[(k, j)]) for k in range(n) if bs_of[k] != j]
        oracle = powers[i] * h[(i, j)] / (sum(p * g for p, g in interf) + noise)
        assert sinr(i, j, links, params) == pytest.approx(oracle, rel=1e-12)


@given(st.floats(1e-3, 1e3))
def test_sinr_invariant_to_common_power_scale(c):
    base = RadioParams(tx_power=0.1, noise_power=1e-6, tx_power_by_evtol={1: 0.3})
    scaled = RadioParams(tx_power=0.1 * c, noise_power=1e-6 * c, tx_power_by_evtol={1: 0.3 * c})
    links = [(0, 0), (1, 1), (2, 1)]
    assert sinr(0, 0, links, scaled) == pytest.approx(sinr(0, 0, links, base), rel=1e-12)


def test_rate_examples():
    assert achievable_rate(0.0, 100.0, 10.0, 1.0, 50.0) == 0.0
    r1 = achievable_rate(0.3, 100.0, 10.0, 1.0, 50.0)
    assert achievable_rate(0.3, 100.0, 10.0, 1.0, 100.0) == pytest.approx(r1 / 4, rel=1e-15)
    with pytest.raises(DegenerateGeometryError):
        achievable_rate(0.3, 100.0, 10.0, 1.0, 0.0)


def test_rate_matches_literal_transcription():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        v_band, v_beam = rng.uniform(0, 1, 2)
        phi, d = rng.uniform(0.05, 1.5), rng.uniform(10, 5000)
        p_i, h_ii, noise = rng.uniform(0.01, 1), rng.exponential(), rng.uniform(1e-10, 1e-6)
        interf = list(zip(rng.uniform(0.01, 1, 3), rng.exponential(size=3)))
        q = p_i * h_ii / (sum(p * h for p, h in interf) + noise)
        g = effective_gain(phi, v_beam, 1.0)
        oracle = eq3_rate(v_band, 100.0, p_i, h_ii, interf, noise, eq7_gain(phi) * v_beam, d)
        assert achievable_rate(v_band, 100.0, q, g, d) == pytest.approx(oracle, rel=1e-12, abs=1e-300)


def test_reference_distance_rescales_the_path_loss():
    assert achievable_rate(0.5, 100.0, 3.0, 0.2, 2000.0, 1000.0) == pytest.approx(
        achievable_rate(0.5, 100.0, 3.0, 0.2, 2000.0) * 1000.0**2, rel=1e-14
    )


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1e6), st.floats(1, 1e4), st.floats(0, 1), st.floats(0, 1))
def test_rate_monotonicity(v_band, v_beam, q, d, bump_a, bump_b):
    params = RadioParams()
    base = link_budget(v_band, 100.0, v_beam, 1.0, q, 0.6, d, params).rate
    more_band = link_budget(min(1.0, v_band + bump_a), 100.0, v_beam, 1.0, q, 0.6, d, params).rate
    more_beam = link_budget(v_band, 100.0, min(1.0, v_beam + bump_b), 1.0, q, 0.6, d, params).rate
    more_sinr = link_budget(v_band, 100.0, v_beam, 1.0, q * 2 + 1, 0.6, d, params).rate
    farther = link_budget(v_band, 100.0, v_beam, 1.0, q, 0.6, d * 1.5, params).rate
    assert more_band >= base and more_beam >= base and more_sinr >= base
    assert farther <= base


def test_params_validation():
    with pytest.raises(DomainError):
        RadioParams(tx_power=0.0)
    with pytest.raises(DomainError):
        RadioParams(channel="nakagami")
    with pytest.raises(DomainError):
        RadioParams(channel_gain_sq={(0, 0): 0.0})
