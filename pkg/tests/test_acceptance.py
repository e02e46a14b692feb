"""End-to-end acceptance checks, one per headline claim of the toolkit.

Each test prints a single ``CRITERION k: PASS/FAIL`` line (visible under
``pytest -s`` or on failure) and asserts the same condition, including its
wall-clock budget.  Oracles used for cross-checking are implemented locally
and independently of the library code under test.
"""

import itertools
import math
import time
from dataclasses import replace
from functools import reduce

import numpy as np

from covertq import capacities as cap
from covertq import channels as chn
from covertq import covert_sim as cs
from covertq import divergences as dv
from covertq import eg_toy as eg
from covertq import operators as op


def _finish(k: int, ok: bool, detail: str, elapsed: float, limit: float) -> None:
    ok = ok and elapsed < limit
    status = "PASS" if ok else "FAIL"
    print(f"CRITERION {k}: {status} ({detail}; {elapsed:.2f}s / limit {limit:.0f}s)")
    assert ok, f"criterion {k}: {detail}, elapsed {elapsed:.2f}s (limit {limit}s)"


def random_density(rng, d, full_rank=True):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    if full_rank:
        rho = 0.9 * rho + 0.1 * np.eye(d) / d
    return rho


def test_criterion_1_capacity_curve():
    start = time.perf_counter()
    ok = True
    worst = 0.0
    for gamma in np.arange(0.01, 0.995, 0.01):
        gamma = float(round(gamma, 2))
        V = chn.stinespring_from_kraus(chn.excitation_channel(gamma))
        pipeline = cap.covert_eg_capacity(V)
        if gamma < 0.5:
            closed = math.log((1.0 - gamma) / gamma) * math.sqrt(2.0 * (1.0 - gamma) / gamma)
        else:
            closed = 0.0
        worst = max(worst, abs(pipeline - closed))
        ok = ok and abs(pipeline - closed) <= 1e-9
    spot = {
        0.1: 9.322001,  # published to 6 decimals; exact value is ln(9) sqrt(18)
        0.25: 2.691035,
        0.5: 0.0,
    }
    for gamma, target in spot.items():
        V = chn.stinespring_from_kraus(chn.excitation_channel(gamma))
        ok = ok and abs(cap.covert_eg_capacity(V) - target) <= 1e-4
    elapsed = time.perf_counter() - start
    _finish(1, ok, f"99-point curve max |dev| = {worst:.2e}", elapsed, 2.0)


def test_criterion_2_chi_square_curvature():
    start = time.perf_counter()
    rng = np.random.default_rng(20260823)
    ok = True
    worst_rel = 0.0
    worst_ratio = 0.0
    pairs = [(random_density(rng, 2), random_density(rng, 2)) for _ in range(50)]
    pairs += [(random_density(rng, 3), random_density(rng, 3)) for _ in range(20)]
    for rho, sig in pairs:
        chi2 = dv.chi_square(rho, sig)

        def d_alpha(a):
            return dv.qre(a * rho + (1 - a) * sig, sig)

        def second(h):
            return (d_alpha(h) - 2 * d_alpha(0.0) + d_alpha(-h)) / h**2

        rich = (4 * second(5e-4) - second(1e-3)) / 3
        rel = abs(rich - chi2) / chi2
        worst_rel = max(worst_rel, rel)
        ok = ok and rel < 1e-4
        # cubic-order remainder of the quadratic expansion stays bounded
        remainders = {
            a: abs(d_alpha(a) - 0.5 * a**2 * chi2) / a**3 for a in (0.1, 0.05, 0.025)
        }
        bound = 3.0 * remainders[0.1] + 1e-3
        worst_ratio = max(worst_ratio, remainders[0.05] / bound, remainders[0.025] / bound)
        ok = ok and remainders[0.05] <= bound and remainders[0.025] <= bound
    elapsed = time.perf_counter() - start
    _finish(
        2,
        ok,
        f"70 pairs, max FD rel err = {worst_rel:.2e}, max remainder ratio = {worst_ratio:.2f}",
        elapsed,
        10.0,
    )


def test_criterion_3_cross_identities():
    start = time.perf_counter()
    V = chn.stinespring_from_kraus(chn.excitation_channel(0.25))
    r = cap.capacity_report(V)
    # independent scalar oracles for the excitation channel at gamma = 1/4
    d_bob = math.log(4.0)
    d_willie = math.log(4.0 / 3.0)
    chi2 = 1.0 / 3.0
    denom = math.sqrt(0.5 * chi2)
    ok = abs(r.dBob - d_bob) <= 1e-12
    ok = ok and abs(r.dWillie - d_willie) <= 1e-12
    ok = ok and abs(r.chi2Willie - chi2) <= 1e-12
    ok = ok and abs(r.cSKey - d_bob / denom) <= 1e-6
    ok = ok and r.cS == r.cEG
    ok = ok and abs(r.cS - (d_bob - d_willie) / denom) <= 1e-6
    ok = ok and abs(r.lKeyMin - d_willie / denom) <= 1e-6
    # published 6-decimal values
    for value, printed in ((r.cSKey, 3.395715), (r.cS, 2.691035), (r.lKeyMin, 0.704672)):
        ok = ok and abs(value - printed) <= 1e-4
    elapsed = time.perf_counter() - start
    _finish(3, ok, f"cSKey={r.cSKey:.7f} cS={r.cS:.7f} lKeyMin={r.lKeyMin:.7f}", elapsed, 1.0)


def test_criterion_4_resolvability():
    start = time.perf_counter()
    quad = chn.build_covert_channel(chn.stinespring_from_kraus(chn.excitation_channel(0.25)))
    means = []
    ok = True
    for k_total in (16, 64, 256):
        cfg = cs.SimConfig(
            n=8, gamma=0.25, alpha=0.25, m_size=k_total, l_size=1, seed=0, samples=200
        )
        mean, rhs, holds = cs.resolvability_experiment(cfg, quad)
        means.append(mean)
        ok = ok and holds
    ok = ok and means[0] > means[1] > means[2]
    elapsed = time.perf_counter() - start
    detail = "means " + ", ".join(f"{m:.4f}" for m in means)
    _finish(4, ok, detail, elapsed, 120.0)


def test_criterion_5_covertness_scaling():
    start = time.perf_counter()
    quad = chn.build_covert_channel(chn.stinespring_from_kraus(chn.excitation_channel(0.25)))
    ns = [16, 25, 36, 49, 64, 81, 100, 121, 144]
    values, target = cs.covertness_scaling(quad, 0.7, ns)
    devs = [abs(v - target) / target for _, v in values]
    ok = all(a > b for a, b in zip(devs, devs[1:])) and devs[-1] < 0.05
    elapsed = time.perf_counter() - start
    _finish(5, ok, f"rel dev at n=144: {devs[-1]:.4f}", elapsed, 1.0)


def _oracle_decoder_errors(words, sigma0, sigma1, a_threshold):
    """Monolithic dense square-root-measurement decoder, written from scratch.

    Builds the n-fold reference, its eigenspace pinching, the per-word
    threshold projectors, and the normalized POVM purely with eigh/kron.
    """
    n = len(words[0])
    ref = reduce(np.kron, [sigma0] * n)
    vals, vecs = np.linalg.eigh(ref)
    # group reference eigenvalues into clusters and form pinching projectors
    order = np.argsort(vals)
    groups, current = [], [order[0]]
    for idx in order[1:]:
        if abs(vals[idx] - vals[current[-1]]) <= 1e-10:
            current.append(idx)
        else:
            groups.append(current)
            current = [idx]
    groups.append(current)
    pinch_projs = [vecs[:, g] @ vecs[:, g].conj().T for g in groups]
    scale = math.exp(a_threshold)
    states = []
    projectors = []
    for w in words:
        sig = reduce(np.kron, [(sigma0, sigma1)[int(b)] for b in w])
        states.append(sig)
        pinched = sum(p @ sig @ p for p in pinch_projs)
        diff = pinched - scale * ref
        dvals, dvecs = np.linalg.eigh((diff + diff.conj().T) / 2)
        keep = dvecs[:, dvals >= -1e-10]
        projectors.append(keep @ keep.conj().T)
    s_total = sum(projectors)
    svals, svecs = np.linalg.eigh(s_total)
    inv_root = np.where(svals > 1e-10, 1.0 / np.sqrt(np.clip(svals, 1e-300, None)), 0.0)
    s_inv_half = (svecs * inv_root) @ svecs.conj().T
    errors = []
    for proj, sig in zip(projectors, states):
        p_ok = np.trace(s_inv_half @ proj @ s_inv_half @ sig).real
        errors.append(min(max(1.0 - p_ok, 0.0), 1.0))
    return errors


def test_criterion_6_decoder_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    ok = True
    worst = 0.0
    for i in range(10):
        gamma = float(rng.uniform(0.15, 0.45))
        m_size = int(rng.choice([2, 4]))
        l_size = int(rng.choice([1, 2]))
        quad = chn.build_covert_channel(
            chn.stinespring_from_kraus(chn.excitation_channel(gamma))
        )
        cfg = cs.SimConfig(n=6, gamma=gamma, m_size=m_size, l_size=l_size, seed=i)
        cb = cs.sample_codebook(cfg)
        report = cs.sqrt_measurement_decoder(cb, quad, cfg)
        a = 0.5 * cfg.alpha * cfg.n * dv.qre(quad.sigma1, quad.sigma0)
        flat_words = [cb.words[m, l] for m in range(m_size) for l in range(l_size)]
        oracle = _oracle_decoder_errors(flat_words, quad.sigma0, quad.sigma1, a)
        lib = [report.perMessageError[(m, l)] for m in range(m_size) for l in range(l_size)]
        dev = max(abs(x - y) for x, y in zip(lib, oracle))
        worst = max(worst, dev)
        ok = ok and dev <= 1e-9
        # covertness-report identities on the same instance
        rep = cs.covertness_report(cb, quad, cfg)
        avg = cs.willie_average_state(cb, quad)
        ref = op.tensor_power(quad.omega0, cfg.n)
        td = op.trace_norm(avg - ref)
        ok = ok and abs(rep.helstromError - 0.5 * (1.0 - 0.5 * td)) <= 1e-12
        ok = ok and 0.5 * td <= math.sqrt(0.5 * rep.dCovert) + 1e-12
    elapsed = time.perf_counter() - start
    _finish(6, ok, f"10 instances, max |error dev| = {worst:.2e}", elapsed, 60.0)


def _oracle_protocol_state(code, V, povm, abstain):
    """Monolithic encoder-channel-decoder composition as explicit matrices."""
    T, L, n = code.T, code.l_size, code.n
    dB, dW = V.out_dim_b, V.out_dim_w
    dBn, dWn = dB**n, dW**n
    # entangled preparation and codeword superpositions on (R, M, A^n)
    state = np.zeros((T, T, 2**n), dtype=complex)
    for m in range(T):
        vec = np.zeros(2**n, dtype=complex)
        for l in range(L):
            idx = int("".join(str(int(b)) for b in code.words[m, l]), 2)
            vec[idx] += np.exp(1j * code.encode_phases[m, l])
        state[m, m] = vec / math.sqrt(T * L)
    # n channel uses, then sort the interleaved (B1 W1 ... Bn Wn) registers
    Vn = reduce(np.kron, [V.V] * n)
    out = state.reshape(T * T, 2**n) @ Vn.T
    tens = out.reshape((T, T) + (dB, dW) * n)
    perm = [0, 1] + [2 + 2 * i for i in range(n)] + [3 + 2 * i for i in range(n)]
    tens = np.transpose(tens, perm).reshape(T, T, dBn, dWn)
    # coherent decoder B^n -> B^n (x) Mhat (x) Lhat with abstain folded in
    elements = [np.asarray(e, dtype=complex) for e in povm]
    if abstain is not None:
        elements[0] = elements[0] + abstain
    D = np.zeros((dBn, T * L, dBn), dtype=complex)
    for k, e in enumerate(elements):
        evals, evecs = np.linalg.eigh((e + e.conj().T) / 2)
        root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
        D[:, k, :] = root
    res = np.tensordot(tens, D.reshape(dBn * T * L, dBn), axes=([2], [1]))
    res = res.reshape(T, T, dWn, dBn, T, L)
    return np.transpose(res, (0, 1, 3, 2, 4, 5))


def test_criterion_7_eg_protocol():
    start = time.perf_counter()
    ok = True
    # (a) noiseless channel, disjoint codewords: perfect EPR pair
    code = eg.default_demo_code()
    V0 = eg.noiseless_isometry()
    flat = [w for m in range(code.T) for w in code.words[m]]
    povm0, abstain0 = eg.exact_string_povm(flat)
    rep0 = eg.eg_report(code, V0, povm0, abstain0, mode="self-target")
    ok = ok and abs(rep0.fidelity - 1.0) <= 1e-9
    ok = ok and rep0.traceDistanceGHZ <= 1e-6
    # (b) generic noisy instance vs the monolithic composition oracle
    gamma = 0.1
    V = chn.stinespring_from_kraus(chn.excitation_channel(gamma))
    quad = chn.build_covert_channel(V)
    alpha = float(np.mean(code.words))
    a = 0.5 * alpha * code.n * dv.qre(quad.sigma1, quad.sigma0)
    povm, abstain = cs.square_root_povm(flat, quad.sigma0, quad.sigma1, a)
    tau = eg.protocol_state(code, V, povm, abstain)
    oracle = _oracle_protocol_state(code, V, povm, abstain)
    state_dev = float(np.max(np.abs(tau - oracle)))
    ok = ok and state_dev <= 1e-9
    # (c) Uhlmann overlap attains the root fidelity on 20 random pairs
    rng = np.random.default_rng(7)
    worst_uhlmann = 0.0
    for _ in range(20):
        dA, dB2, dC = 3, 3, 4
        psi = rng.normal(size=dA * dB2) + 1j * rng.normal(size=dA * dB2)
        psi /= np.linalg.norm(psi)
        theta = rng.normal(size=dA * dC) + 1j * rng.normal(size=dA * dC)
        theta /= np.linalg.norm(theta)
        W = eg.uhlmann_isometry(psi, (dA, dB2), theta, (dA, dC))
        psi_mat = psi.reshape(dA, dB2)
        theta_mat = theta.reshape(dA, dC)
        overlap = np.trace(theta_mat.conj().T @ psi_mat @ W.T)
        fid = op.fidelity(psi_mat @ psi_mat.conj().T, theta_mat @ theta_mat.conj().T)
        worst_uhlmann = max(worst_uhlmann, abs(abs(overlap) ** 2 - fid))
    ok = ok and worst_uhlmann <= 1e-9
    # (d) warden marginal is invariant under per-message constant phases
    base = eg.willie_marginal(code, V, povm, abstain)
    shifted_code = replace(
        code, encode_phases=np.array([[0.7, 0.7], [-1.3, -1.3]])
    )
    shifted = eg.willie_marginal(shifted_code, V, povm, abstain)
    phase_dev = float(np.max(np.abs(shifted - base)))
    ok = ok and phase_dev <= 1e-12
    # diagnostic only: arbitrary per-(m, l) phases do move the marginal
    arb_code = replace(code, encode_phases=np.array([[0.0, 0.9], [0.4, -0.2]]))
    arb_dev = float(np.max(np.abs(eg.willie_marginal(arb_code, V, povm, abstain) - base)))
    elapsed = time.perf_counter() - start
    detail = (
        f"fid={rep0.fidelity:.9f}, oracle dev={state_dev:.2e}, "
        f"uhlmann dev={worst_uhlmann:.2e}, per-m phase dev={phase_dev:.2e} "
        f"(arbitrary-phase sensitivity {arb_dev:.2e})"
    )
    _finish(7, ok, detail, elapsed, 60.0)


def test_criterion_8_anti_degradability():
    start = time.perf_counter()
    ok = True
    for gamma in (0.5, 0.6, 0.75, 0.9):
        r = cap.capacity_report(chn.stinespring_from_kraus(chn.excitation_channel(gamma)))
        ok = ok and r.dBob <= r.dWillie + 1e-12
        ok = ok and r.cEG == 0.0
    elapsed = time.perf_counter() - start
    _finish(8, ok, "cEG identically zero for gamma in {0.5, 0.6, 0.75, 0.9}", elapsed, 1.0)
