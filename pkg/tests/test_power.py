import numpy as np
import pytest

from urllcbeam import (
    draw_urllc_target,
    gamma_max,
    sinr,
    solve_power,
    tpm_directions,
    zf_directions,
)
from urllcbeam.channel import sample_rician
from urllcbeam.precoders import DirectionMatrix
from urllcbeam.power import cross_gains

from conftest import random_channels


def sinr_by_hand(channel, precoder, user, noise_power):
    """Independent direct-summation reference for the SINR formula."""
    signal = abs(sum(channel[m].conjugate() * precoder[m, user] for m in range(len(channel)))) ** 2
    interference = 0.0
    for i in range(precoder.shape[1]):
        if i == user:
            continue
        interference += abs(
            sum(channel[m].conjugate() * precoder[m, i] for m in range(len(channel)))
        ) ** 2
    return signal / (interference + noise_power)


def test_sinr_single_column_unity():
    h = np.array([1.0 + 0j])
    w = np.array([[1.0 + 0j]])
    assert sinr(h, w, 0, noise_power=1.0) == pytest.approx(1.0)


def test_sinr_nulled_interference():
    h = np.array([1.0, 0.0], dtype=complex)
    w = np.zeros((2, 2), dtype=complex)
    p0 = 2.5
    w[:, 0] = np.sqrt(p0) * np.array([1.0, 0.0])
    w[:, 1] = np.array([0.0, 1.0])  # orthogonal to h: no interference seen
    sigma2 = 0.3
    assert sinr(h, w, 0, sigma2) == pytest.approx(p0 * np.linalg.norm(h) ** 2 / sigma2)


def test_sinr_matches_direct_summation(gen):
    for _ in range(25):
        h = random_channels(gen, 6, 1)[:, 0]
        w = random_channels(gen, 6, 4)
        sigma2 = float(10 ** gen.uniform(-3, 0))
        for k in range(4):
            assert sinr(h, w, k, sigma2) == pytest.approx(
                sinr_by_hand(h, w, k, sigma2), rel=1e-12
            )


def test_gamma_max_examples(gen):
    sigma2 = 0.8
    p_max = 4.0
    h = np.array([np.sqrt(sigma2 / p_max)], dtype=complex)
    assert gamma_max(h, p_max, sigma2) == pytest.approx(1.0)
    assert gamma_max(h, 2 * p_max, sigma2) == pytest.approx(2.0)


def test_gamma_max_expected_scale(gen):
    psi = 500.0 ** (-3.5)
    p_max = 10 ** 4.7
    sigma2 = 10 ** (-10.4)
    m = 8
    values = [
        gamma_max(sample_rician(psi, 0.0, m, gen), p_max, sigma2) for _ in range(4000)
    ]
    expected = p_max * psi * m / sigma2
    assert np.mean(values) == pytest.approx(expected, rel=0.05)


def test_target_floor_value():
    # 0.1 bits/s/Hz supports a linear ratio of 2**0.1 - 1 ~ -11.44 dB
    floor = 2.0 ** 0.1 - 1.0
    assert floor == pytest.approx(0.0718, abs=5e-5)
    assert 10 * np.log10(floor) == pytest.approx(-11.44, abs=0.005)


def test_draw_containment_and_mean(gen):
    lo, hi = 1.0, 3.0
    draws = np.array([draw_urllc_target(lo, hi, gen) for _ in range(200_000)])
    assert draws.min() >= lo and draws.max() <= hi
    assert draws.mean() == pytest.approx(2.0, abs=0.01)
    tight = draw_urllc_target(5.0, 5.0 + 1e-9, gen)
    assert 5.0 <= tight <= 5.0 + 1e-9
    with pytest.raises(ValueError, match="infeasible even alone"):
        draw_urllc_target(2.0, 1.5, gen)


def test_draw_log_domain(gen):
    draws = np.array(
        [draw_urllc_target(1e-2, 1e2, gen, log_domain=True) for _ in range(50_000)]
    )
    assert np.log10(draws).mean() == pytest.approx(0.0, abs=0.02)


def test_solve_power_decoupled_users():
    h = np.eye(3, dtype=complex)
    d = zf_directions(h)
    sigma2 = 0.2
    gamma = np.array([1.0, 2.0, 4.0])
    alloc = solve_power(h, d, gamma, sigma2, p_max=10.0)
    assert np.allclose(alloc.powers_mw, gamma * sigma2, rtol=1e-12)
    assert alloc.feasible


def test_zf_closed_form_agrees_with_general_solve(gen):
    sigma2 = 1e-10
    for _ in range(100):
        h = random_channels(gen, 8, 5, scale=1e-4)
        d = zf_directions(h)
        gamma = 10 ** gen.uniform(-1, 2, size=5)
        closed = solve_power(h.T, d, gamma, sigma2, 1e9)
        general_dirs = DirectionMatrix(matrix=d.matrix, kind=d.kind, column_norms=None)
        general = solve_power(h.T, general_dirs, gamma, sigma2, 1e9)
        assert np.allclose(closed.powers_mw, general.powers_mw, rtol=1e-9)


@pytest.mark.parametrize("kind", ["zf", "tpm"])
def test_solution_reproduces_targets(gen, kind):
    sigma2 = 1e-9
    for _ in range(30):
        h = random_channels(gen, 8, 4, scale=1e-3)
        gamma = 10 ** gen.uniform(-1, 1.5, size=4)
        if kind == "zf":
            d = zf_directions(h)
        else:
            d = tpm_directions(h, gamma, sigma2)
        eval_channels = h.T
        alloc = solve_power(eval_channels, d, gamma, sigma2, p_max=np.inf)
        assert alloc.feasible
        w = d.matrix * np.sqrt(alloc.powers_mw)
        for k in range(4):
            assert sinr(eval_channels[k], w, k, sigma2) == pytest.approx(
                gamma[k], rel=1e-8
            )


def test_negative_power_flags_infeasible():
    # strong cross-gains make the target system unsatisfiable with positive powers
    channels = np.array([[1.0, np.sqrt(10.0)], [np.sqrt(10.0), 1.0]], dtype=complex)
    directions = DirectionMatrix(matrix=np.eye(2, dtype=complex), kind="tpm")
    alloc = solve_power(channels, directions, np.array([1.0, 1.0]), 1.0, p_max=100.0)
    assert not alloc.feasible
    assert np.all(alloc.powers_mw < 0)


def test_budget_violation_flags_infeasible():
    h = np.eye(2, dtype=complex)
    d = zf_directions(h)
    alloc = solve_power(h, d, np.array([5.0, 5.0]), 1.0, p_max=9.0)
    assert not alloc.feasible
    assert alloc.total_mw == pytest.approx(10.0)


def test_zf_power_monotone_in_target(gen):
    h = random_channels(gen, 6, 3)
    d = zf_directions(h)
    sigma2 = 0.5
    low = solve_power(h.T, d, np.array([1.0, 1.0, 1.0]), sigma2, np.inf)
    high = solve_power(h.T, d, np.array([2.0, 1.0, 1.0]), sigma2, np.inf)
    assert high.powers_mw[0] > low.powers_mw[0]
    assert high.powers_mw[0] == pytest.approx(2 * low.powers_mw[0], rel=1e-12)


def test_cross_gains_table(gen):
    h = random_channels(gen, 5, 3)
    d = zf_directions(h)
    table = cross_gains(h.T, d.matrix)
    for k in range(3):
        for i in range(3):
            assert table[k, i] == pytest.approx(
                abs(np.vdot(h[:, k], d.matrix[:, i])) ** 2, rel=1e-12
            )
