"""Monte-Carlo study of the covert coding scheme at exact desk scale.

Random Bernoulli codebooks, the warden's exact n-fold average state,
covertness / secrecy / resolvability metrics, and the square-root-measurement
decoder, all on dense matrices of dimension at most a configurable cap.

Randomness uses the counter-based Philox generator keyed by
``(seed, sample_index)``; within one codebook the bits are drawn in a fixed
row-major (message, bin-index, position) order, so identical configurations
reproduce bitwise-identical codebooks regardless of scheduling.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import divergences as dv
from . import operators as op
from .channels import BinaryCovertChannel, mixed_output
from .errors import BudgetExceededError, IndexOutOfRangeError, InvalidParameterError
from .operators import DEFAULT_TOL, Tolerances

#: Fallback cap on the dense Hilbert-space dimension.
DEFAULT_MAX_DENSE_DIM = 4096


def max_dense_dim() -> int:
    """Dense-dimension budget; the COVERTQ_MAX_DENSE_DIM env var overrides."""
    raw = os.environ.get("COVERTQ_MAX_DENSE_DIM")
    return int(raw) if raw else DEFAULT_MAX_DENSE_DIM


def check_budget(dim: int) -> None:
    cap = max_dense_dim()
    if dim > cap:
        raise BudgetExceededError(f"dense dimension {dim} exceeds budget {cap}")


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation campaign.

    ``alpha`` is derived as gamma / sqrt(n) unless given explicitly; it is the
    Bernoulli weight of the non-innocent symbol.  ``a_threshold`` tunes the
    decoder's pinched-threshold projectors and defaults to
    alpha * n * D(sigma1||sigma0) / 2 when left as None.
    """

    n: int
    gamma: float
    m_size: int
    l_size: int
    seed: int = 0
    samples: int = 1
    alpha: float | None = None
    s_grid: tuple[float, ...] = (-1.0, -0.5, -0.25, -0.1, -0.05)
    beta_grid: tuple[float, ...] | None = None
    a_threshold: float | None = None

    def __post_init__(self):
        if self.n < 1 or self.m_size < 1 or self.l_size < 1:
            raise InvalidParameterError("n, m_size, l_size must be positive")
        if self.alpha is None:
            object.__setattr__(self, "alpha", self.gamma / math.sqrt(self.n))
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidParameterError(f"alpha = {self.alpha} outside [0, 1]")


@dataclass(frozen=True)
class Codebook:
    """Binary codewords indexed by (message m, bin/key index l)."""

    n: int
    m_size: int
    l_size: int
    words: np.ndarray  # uint8 array of shape (m_size, l_size, n)

    def word(self, m: int, l: int) -> np.ndarray:
        if not (0 <= m < self.m_size and 0 <= l < self.l_size):
            raise IndexOutOfRangeError(f"codeword index ({m}, {l}) out of range")
        return self.words[m, l]


@dataclass(frozen=True)
class CovertnessReport:
    dCovert: float
    dReference: float
    traceDistToMixed: float
    helstromError: float
    pinskerLowerBound: float
    resolvabilityRhs: float


@dataclass(frozen=True)
class SecrecyReport:
    perBinDistances: tuple[float, ...]
    averageLeakage: float


@dataclass(frozen=True)
class DecoderReport:
    perMessageError: dict
    averageError: float
    maxError: float


def sample_codebook(cfg: SimConfig, sample_index: int = 0) -> Codebook:
    """Draw a Bernoulli(alpha) codebook, deterministically in (seed, index)."""
    key = np.array([cfg.seed, sample_index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    draws = rng.random((cfg.m_size, cfg.l_size, cfg.n))
    words = (draws < cfg.alpha).astype(np.uint8)
    return Codebook(cfg.n, cfg.m_size, cfg.l_size, words)


def otp_encode(m: int, m2: int, k: int, cb: Codebook) -> np.ndarray:
    """One-time-pad encoding: the word at (m, (m2 + k) mod l_size)."""
    if not 0 <= k < cb.l_size:
        raise IndexOutOfRangeError(f"key index {k} outside [0, {cb.l_size})")
    if not (0 <= m < cb.m_size and 0 <= m2 < cb.l_size):
        raise IndexOutOfRangeError("message index out of range")
    return cb.word(m, (m2 + k) % cb.l_size)


def product_state(word, state0, state1) -> np.ndarray:
    """Tensor product with the factor chosen per bit of ``word``."""
    states = (np.asarray(state0, dtype=complex), np.asarray(state1, dtype=complex))
    out = states[int(word[0])]
    for bit in word[1:]:
        out = np.kron(out, states[int(bit)])
    return out


def _commuting_basis(ch: BinaryCovertChannel, tol: Tolerances):
    """Shared eigenbasis of (omega0, omega1) if they commute, else None.

    Returns (U, p0, p1) with omega_x = U diag(p_x) U^dag.
    """
    w0 = np.asarray(ch.omega0, dtype=complex)
    w1 = np.asarray(ch.omega1, dtype=complex)
    if np.max(np.abs(w0 @ w1 - w1 @ w0)) > tol.herm:
        return None
    # diagonalize omega0, then omega1 inside its degenerate blocks
    sd = op.spectral_decompose(w0, tol)
    cols = []
    p0 = []
    p1 = []
    for lam, proj in zip(sd.eigenvalues, sd.projectors):
        vals, vecs = np.linalg.eigh(proj @ w1 @ proj + (np.eye(w0.shape[0]) - proj))
        for mu, vec in zip(vals, vecs.T):
            if np.linalg.norm(proj @ vec - vec) < 1e-8:
                cols.append(vec)
                p0.append(lam)
                p1.append(mu.real)
    U = np.column_stack(cols)
    return U, np.array(p0), np.array(p1)


def _diag_word(word, p0, p1) -> np.ndarray:
    out = (p0, p1)[int(word[0])]
    for bit in word[1:]:
        out = np.kron(out, (p0, p1)[int(bit)])
    return out


def willie_average_state(cb: Codebook, ch: BinaryCovertChannel, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Warden's exact average state over all (m, l) codewords.

    When the two warden outputs commute, the state is assembled from the
    classical distribution over joint eigenvalue strings and returned diagonal
    in the shared eigenbasis; otherwise a dense tensor-product average is
    formed.  Either way the dense dimension must fit the budget.
    """
    dim = ch.omega0.shape[0] ** cb.n
    check_budget(dim)
    basis = _commuting_basis(ch, tol)
    if basis is not None:
        U, p0, p1 = basis
        diag = np.zeros(dim)
        for m in range(cb.m_size):
            for l in range(cb.l_size):
                diag += _diag_word(cb.words[m, l], p0, p1)
        diag /= cb.m_size * cb.l_size
        Un = op.tensor_power(U, cb.n) if cb.n > 1 else U
        return (Un * diag) @ Un.conj().T
    out = np.zeros((dim, dim), dtype=complex)
    for m in range(cb.m_size):
        for l in range(cb.l_size):
            out += product_state(cb.words[m, l], ch.omega0, ch.omega1)
    return out / (cb.m_size * cb.l_size)


def willie_bin_state(cb: Codebook, ch: BinaryCovertChannel, m: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Warden's state conditioned on message m, averaged over the bin index."""
    if not 0 <= m < cb.m_size:
        raise IndexOutOfRangeError(f"message index {m} outside [0, {cb.m_size})")
    dim = ch.omega0.shape[0] ** cb.n
    check_budget(dim)
    out = np.zeros((dim, dim), dtype=complex)
    for l in range(cb.l_size):
        out += product_state(cb.words[m, l], ch.omega0, ch.omega1)
    return out / cb.l_size


def _default_beta_grid(cfg: SimConfig, ch: BinaryCovertChannel, tol: Tolerances) -> np.ndarray:
    center = cfg.alpha * cfg.n * dv.qre(ch.omega1, ch.omega0, tol)
    if center <= 0.0:
        center = 1.0
    return np.geomspace(0.1 * center, 10.0 * center, 21)


def resolvability_rhs(cfg: SimConfig, ch: BinaryCovertChannel, tol: Tolerances = DEFAULT_TOL) -> float:
    """Grid-minimized soft-covering bound on the expected trace distance.

    min over (s, beta) of 2 sqrt(exp(beta s + n phi(s, alpha))) +
    sqrt(e^beta nu / K) with nu the distinct-eigenvalue count of the n-fold
    reference and K the number of codewords.
    """
    ensemble = dv.CqEnsemble(
        np.array([1.0 - cfg.alpha, cfg.alpha]), (ch.omega0, ch.omega1)
    )
    nu = dv.distinct_eigenvalue_count(mixed_output(ch, cfg.alpha), cfg.n, tol)
    k_total = cfg.m_size * cfg.l_size
    betas = np.asarray(cfg.beta_grid) if cfg.beta_grid is not None else _default_beta_grid(cfg, ch, tol)
    best = math.inf
    for s in cfg.s_grid:
        phi_s = dv.phi(s, ensemble, tol)
        for beta in betas:
            first = 2.0 * math.sqrt(math.exp(beta * s + cfg.n * phi_s))
            second = math.sqrt(math.exp(beta) * nu / k_total)
            best = min(best, first + second)
    return best


def resolvability_samples(cfg: SimConfig, ch: BinaryCovertChannel, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Trace distance of the codebook-average state to the mixed reference,
    for ``cfg.samples`` independently seeded codebooks."""
    target_single = mixed_output(ch, cfg.alpha)
    basis = _commuting_basis(ch, tol)
    distances = np.empty(cfg.samples)
    if basis is not None:
        _, p0, p1 = basis
        p_alpha = (1.0 - cfg.alpha) * p0 + cfg.alpha * p1
        target_diag = p_alpha.copy()
        for _ in range(cfg.n - 1):
            target_diag = np.kron(target_diag, p_alpha)
        for i in range(cfg.samples):
            cb = sample_codebook(cfg, sample_index=i)
            diag = np.zeros(target_diag.size)
            for m in range(cb.m_size):
                for l in range(cb.l_size):
                    diag += _diag_word(cb.words[m, l], p0, p1)
            diag /= cb.m_size * cb.l_size
            distances[i] = float(np.sum(np.abs(diag - target_diag)))
        return distances
    target = op.tensor_power(target_single, cfg.n)
    for i in range(cfg.samples):
        cb = sample_codebook(cfg, sample_index=i)
        distances[i] = op.trace_norm(willie_average_state(cb, ch, tol) - target)
    return distances


def resolvability_experiment(cfg: SimConfig, ch: BinaryCovertChannel, tol: Tolerances = DEFAULT_TOL):
    """Compare the Monte-Carlo mean trace distance against the bound.

    Returns
    -------
    (empirical_mean, rhs, holds) : tuple
        ``holds`` is True when the mean does not exceed the bound by more
        than three standard errors of the mean.
    """
    distances = resolvability_samples(cfg, ch, tol)
    mean = float(distances.mean())
    se = float(distances.std(ddof=1) / math.sqrt(len(distances))) if len(distances) > 1 else 0.0
    rhs = resolvability_rhs(cfg, ch, tol)
    return mean, rhs, mean <= rhs + 3.0 * se


def covertness_report(cb: Codebook, ch: BinaryCovertChannel, cfg: SimConfig, tol: Tolerances = DEFAULT_TOL) -> CovertnessReport:
    """Covertness metrics of one codebook against the innocent reference."""
    avg = willie_average_state(cb, ch, tol)
    ref0 = op.tensor_power(ch.omega0, cb.n)
    mixed = op.tensor_power(mixed_output(ch, cfg.alpha), cb.n)
    d_covert = dv.qre(avg, ref0, tol)
    d_reference = cb.n * dv.qre(mixed_output(ch, cfg.alpha), ch.omega0, tol)
    pinsker_lb = 0.5 * (1.0 - math.sqrt(0.5 * d_covert)) if math.isfinite(d_covert) else 0.0
    return CovertnessReport(
        dCovert=d_covert,
        dReference=d_reference,
        traceDistToMixed=op.trace_norm(avg - mixed),
        helstromError=dv.helstrom_error(avg, ref0, tol),
        pinskerLowerBound=pinsker_lb,
        resolvabilityRhs=resolvability_rhs(cfg, ch, tol),
    )


def secrecy_report(cb: Codebook, ch: BinaryCovertChannel, cfg: SimConfig, tol: Tolerances = DEFAULT_TOL) -> SecrecyReport:
    """Per-bin trace distances to the mixed reference and their mean."""
    mixed = op.tensor_power(mixed_output(ch, cfg.alpha), cb.n)
    dists = tuple(
        op.trace_norm(willie_bin_state(cb, ch, m, tol) - mixed)
        for m in range(cb.m_size)
    )
    return SecrecyReport(perBinDistances=dists, averageLeakage=float(np.mean(dists)))


def square_root_povm(words, sigma0, sigma1, a_threshold: float, tol: Tolerances = DEFAULT_TOL):
    """Square-root measurement from pinched-threshold codeword projectors.

    For each classical word c the projector Pi_c is the nonnegative eigenspace
    of pinch(sigma_c; sigma0^{(x)n}) - e^a sigma0^{(x)n}.  With S = sum Pi_c,
    the POVM elements are Upsilon_c = S^{-1/2} Pi_c S^{-1/2} using the
    pseudo-inverse square root on the support of S; the remainder I - sum
    Upsilon is the abstain outcome.

    Returns
    -------
    (elements, abstain) : (list of ndarray, ndarray)
    """
    words = [np.asarray(w) for w in words]
    n = len(words[0])
    ref = product_state([0] * n, sigma0, sigma1)
    scale = math.exp(a_threshold)
    projectors = []
    for w in words:
        sig = product_state(w, sigma0, sigma1)
        pinched = op.pinching(sig, ref, tol)
        projectors.append(op.nonneg_eigenspace_projector(pinched - scale * ref, tol))
    s_total = sum(projectors)
    vals, vecs = np.linalg.eigh(s_total)
    inv_sqrt = np.where(vals > tol.support, 1.0 / np.sqrt(np.where(vals > tol.support, vals, 1.0)), 0.0)
    s_inv_half = (vecs * inv_sqrt) @ vecs.conj().T
    elements = [s_inv_half @ p @ s_inv_half for p in projectors]
    abstain = np.eye(ref.shape[0]) - sum(elements)
    return elements, abstain


def sqrt_measurement_decoder(cb: Codebook, ch: BinaryCovertChannel, cfg: SimConfig, tol: Tolerances = DEFAULT_TOL) -> DecoderReport:
    """Error probabilities of the square-root measurement on Bob's outputs."""
    dim = ch.sigma0.shape[0] ** cb.n
    check_budget(dim)
    a = cfg.a_threshold
    if a is None:
        a = 0.5 * cfg.alpha * cfg.n * dv.qre(ch.sigma1, ch.sigma0, tol)
    words = [cb.words[m, l] for m in range(cb.m_size) for l in range(cb.l_size)]
    elements, _ = square_root_povm(words, ch.sigma0, ch.sigma1, a, tol)
    errors = {}
    idx = 0
    for m in range(cb.m_size):
        for l in range(cb.l_size):
            sig = product_state(cb.words[m, l], ch.sigma0, ch.sigma1)
            p_ok = np.trace(elements[idx] @ sig).real
            errors[(m, l)] = float(min(max(1.0 - p_ok, 0.0), 1.0))
            idx += 1
    vals = list(errors.values())
    return DecoderReport(
        perMessageError=errors,
        averageError=float(np.mean(vals)),
        maxError=float(np.max(vals)),
    )


def covertness_scaling(ch: BinaryCovertChannel, gamma: float, ns, tol: Tolerances = DEFAULT_TOL):
    """Scaled single-copy divergence n * D(omega_{gamma/sqrt(n)} || omega0)
    against its quadratic limit gamma^2 chi^2(omega1||omega0) / 2.

    Returns
    -------
    (values, target) : (list of (n, value), float)
    """
    target = 0.5 * gamma**2 * dv.chi_square(ch.omega1, ch.omega0, tol)
    values = []
    for n in ns:
        alpha = gamma / math.sqrt(n)
        values.append((int(n), n * dv.qre(mixed_output(ch, alpha), ch.omega0, tol)))
    return values, target
