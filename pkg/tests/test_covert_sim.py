import itertools
import math

import numpy as np
import pytest

from covertq import channels as chn
from covertq import covert_sim as cs
from covertq import divergences as dv
from covertq import operators as op
from covertq.errors import BudgetExceededError, IndexOutOfRangeError


def excitation_quadruple(gamma=0.25):
    return chn.build_covert_channel(
        chn.stinespring_from_kraus(chn.excitation_channel(gamma))
    )


def dense_average(cb, quad):
    """Straightforward dense reference for the warden's average state."""
    states = [quad.omega0, quad.omega1]
    dim = 2**cb.n
    out = np.zeros((dim, dim), dtype=complex)
    for m in range(cb.m_size):
        for l in range(cb.l_size):
            prod = states[cb.words[m, l, 0]]
            for b in cb.words[m, l, 1:]:
                prod = np.kron(prod, states[b])
            out += prod
    return out / (cb.m_size * cb.l_size)


def test_sample_codebook_determinism():
    cfg = cs.SimConfig(n=8, gamma=1.0, alpha=0.25, m_size=4, l_size=4, seed=42)
    cb1 = cs.sample_codebook(cfg)
    cb2 = cs.sample_codebook(cfg)
    assert np.array_equal(cb1.words, cb2.words)
    other = cs.sample_codebook(cfg, sample_index=1)
    assert not np.array_equal(cb1.words, other.words)


def test_sample_codebook_degenerate():
    zeros = cs.sample_codebook(cs.SimConfig(n=6, gamma=0.0, m_size=2, l_size=2, alpha=0.0))
    assert not zeros.words.any()
    ones = cs.sample_codebook(cs.SimConfig(n=6, gamma=0.0, m_size=2, l_size=2, alpha=1.0))
    assert ones.words.all()


def test_otp_encode():
    cfg = cs.SimConfig(n=4, gamma=0.5, m_size=2, l_size=4, seed=1)
    cb = cs.sample_codebook(cfg)
    assert np.array_equal(cs.otp_encode(1, 2, 0, cb), cb.word(1, 2))
    assert np.array_equal(cs.otp_encode(1, 3, 2, cb), cb.word(1, 1))  # wraps mod 4
    with pytest.raises(IndexOutOfRangeError):
        cs.otp_encode(0, 0, 4, cb)


def test_otp_uniform_key_average():
    # averaging over a uniform key yields the bin state regardless of m2
    cfg = cs.SimConfig(n=3, gamma=0.5, m_size=2, l_size=4, seed=3)
    cb = cs.sample_codebook(cfg)
    quad = excitation_quadruple()
    for m in range(2):
        bin_state = cs.willie_bin_state(cb, quad, m)
        for m2 in range(4):
            avg = np.zeros_like(bin_state)
            for k in range(4):
                word = cs.otp_encode(m, m2, k, cb)
                avg += cs.product_state(word, quad.omega0, quad.omega1)
            np.testing.assert_allclose(avg / 4, bin_state, atol=1e-12)


def test_willie_average_trivial_cases():
    quad = excitation_quadruple()
    cb = cs.Codebook(3, 1, 1, np.zeros((1, 1, 3), dtype=np.uint8))
    np.testing.assert_allclose(
        cs.willie_average_state(cb, quad), op.tensor_power(quad.omega0, 3), atol=1e-12
    )
    words = np.array([[[0, 0]], [[1, 1]]], dtype=np.uint8)
    cb2 = cs.Codebook(2, 2, 1, words)
    expected = 0.5 * (
        np.kron(quad.omega0, quad.omega0) + np.kron(quad.omega1, quad.omega1)
    )
    np.testing.assert_allclose(cs.willie_average_state(cb2, quad), expected, atol=1e-12)


def test_willie_average_full_population():
    # all 2^n strings equally weighted give the n-fold uniform mixture
    quad = excitation_quadruple()
    n = 3
    words = np.array([[list(w)] for w in itertools.product([0, 1], repeat=n)], dtype=np.uint8)
    cb = cs.Codebook(n, 2**n, 1, words)
    mixed = chn.mixed_output(quad, 0.5)
    np.testing.assert_allclose(
        cs.willie_average_state(cb, quad), op.tensor_power(mixed, n), atol=1e-12
    )


def test_commuting_fast_path_matches_dense():
    quad = excitation_quadruple()
    for seed in range(5):
        cfg = cs.SimConfig(n=6, gamma=0.6, m_size=4, l_size=2, seed=seed)
        cb = cs.sample_codebook(cfg)
        np.testing.assert_allclose(
            cs.willie_average_state(cb, quad), dense_average(cb, quad), atol=1e-10
        )


def test_willie_average_is_density():
    quad = excitation_quadruple()
    cfg = cs.SimConfig(n=6, gamma=0.6, m_size=4, l_size=4, seed=9)
    cb = cs.sample_codebook(cfg)
    avg = cs.willie_average_state(cb, quad)
    assert np.trace(avg).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(avg).min() > -1e-9


def test_willie_bin_state():
    quad = excitation_quadruple()
    words = np.array([[[0, 1], [1, 0]]], dtype=np.uint8)
    cb = cs.Codebook(2, 1, 2, words)
    expected = 0.5 * (
        np.kron(quad.omega0, quad.omega1) + np.kron(quad.omega1, quad.omega0)
    )
    np.testing.assert_allclose(cs.willie_bin_state(cb, quad, 0), expected, atol=1e-12)
    with pytest.raises(IndexOutOfRangeError):
        cs.willie_bin_state(cb, quad, 1)


def test_budget():
    quad = excitation_quadruple()
    cb = cs.Codebook(40, 1, 1, np.zeros((1, 1, 40), dtype=np.uint8))
    with pytest.raises(BudgetExceededError):
        cs.willie_average_state(cb, quad)


def test_covertness_report_all_zero():
    quad = excitation_quadruple()
    cfg = cs.SimConfig(n=4, gamma=0.5, m_size=2, l_size=2, seed=0, alpha=0.25)
    cb = cs.Codebook(4, 2, 2, np.zeros((2, 2, 4), dtype=np.uint8))
    rep = cs.covertness_report(cb, quad, cfg)
    assert rep.dCovert == pytest.approx(0.0, abs=1e-9)
    assert rep.helstromError == pytest.approx(0.5, abs=1e-9)


def test_covertness_report_identities():
    quad = excitation_quadruple()
    cfg = cs.SimConfig(n=6, gamma=0.25 * math.sqrt(6), m_size=4, l_size=4, seed=42)
    cb = cs.sample_codebook(cfg)
    rep = cs.covertness_report(cb, quad, cfg)
    avg = cs.willie_average_state(cb, quad)
    ref = op.tensor_power(quad.omega0, 6)
    # Helstrom identity
    assert rep.helstromError == pytest.approx(dv.helstrom_error(avg, ref), abs=1e-12)
    assert rep.helstromError >= rep.pinskerLowerBound - 1e-12
    # Pinsker on the covertness pair
    assert 0.5 * op.trace_norm(avg - ref) <= math.sqrt(0.5 * rep.dCovert) + 1e-12
    # additivity of the reference divergence
    mixed = chn.mixed_output(quad, cfg.alpha)
    assert rep.dReference == pytest.approx(
        dv.qre(op.tensor_power(mixed, 6), ref), abs=1e-9
    )


def test_secrecy_report():
    quad = excitation_quadruple()
    cfg = cs.SimConfig(n=4, gamma=0.5, m_size=2, l_size=1, seed=0, alpha=0.25)
    cb = cs.Codebook(4, 2, 1, np.zeros((2, 1, 4), dtype=np.uint8))
    rep = cs.secrecy_report(cb, quad, cfg)
    mixed = op.tensor_power(chn.mixed_output(quad, 0.25), 4)
    expected = op.trace_norm(op.tensor_power(quad.omega0, 4) - mixed)
    for d in rep.perBinDistances:
        assert d == pytest.approx(expected, abs=1e-10)
    assert rep.averageLeakage == pytest.approx(np.mean(rep.perBinDistances))


def test_resolvability_alpha_zero():
    quad = excitation_quadruple()
    cfg = cs.SimConfig(n=5, gamma=0.0, m_size=4, l_size=1, seed=0, samples=3, alpha=0.0)
    mean, rhs, holds = cs.resolvability_experiment(cfg, quad)
    assert mean == pytest.approx(0.0, abs=1e-12)
    assert holds


def test_resolvability_bound_holds():
    quad = excitation_quadruple()
    cfg = cs.SimConfig(n=6, gamma=1.0, alpha=0.25, m_size=16, l_size=1, seed=7, samples=30)
    mean, rhs, holds = cs.resolvability_experiment(cfg, quad)
    assert holds
    assert mean > 0.0


def test_sqrt_decoder_single_codeword():
    quad = excitation_quadruple()
    cfg = cs.SimConfig(n=4, gamma=0.5, m_size=1, l_size=1, seed=0, a_threshold=0.1)
    cb = cs.Codebook(4, 1, 1, np.array([[[0, 1, 0, 1]]], dtype=np.uint8))
    rep = cs.sqrt_measurement_decoder(cb, quad, cfg)
    # with one codeword S = Pi so Upsilon = Pi
    elements, _ = cs.square_root_povm([cb.words[0, 0]], quad.sigma0, quad.sigma1, 0.1)
    sig = cs.product_state(cb.words[0, 0], quad.sigma0, quad.sigma1)
    expected = 1.0 - np.trace(elements[0] @ sig).real
    assert rep.perMessageError[(0, 0)] == pytest.approx(expected, abs=1e-12)


def test_sqrt_decoder_identical_codewords():
    quad = excitation_quadruple()
    word = np.array([0, 1, 1, 0], dtype=np.uint8)
    elements, _ = cs.square_root_povm([word, word], quad.sigma0, quad.sigma1, 0.05)
    single, _ = cs.square_root_povm([word], quad.sigma0, quad.sigma1, 0.05)
    np.testing.assert_allclose(elements[0], 0.5 * single[0], atol=1e-10)
    np.testing.assert_allclose(elements[1], 0.5 * single[0], atol=1e-10)


def test_sqrt_povm_is_valid_measurement():
    quad = excitation_quadruple()
    rng = np.random.default_rng(11)
    words = rng.integers(0, 2, size=(4, 5)).astype(np.uint8)
    elements, abstain = cs.square_root_povm(list(words), quad.sigma0, quad.sigma1, 0.2)
    total = sum(elements) + abstain
    np.testing.assert_allclose(total, np.eye(2**5), atol=1e-9)
    for e in elements + [abstain]:
        assert np.linalg.eigvalsh((e + e.conj().T) / 2).min() > -1e-9


def test_covertness_scaling():
    quad = excitation_quadruple(0.25)
    values, target = cs.covertness_scaling(quad, 0.7, [16, 64, 144])
    assert target == pytest.approx(0.5 * 0.7**2 * (1.0 / 3.0), abs=1e-12)
    devs = [abs(v - target) / target for _, v in values]
    assert devs[0] > devs[1] > devs[2]
    assert devs[-1] < 0.05
