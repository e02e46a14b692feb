"""Covert-communication rate formulas evaluated from a binary covert channel.

Every rate has the form (difference of relative entropies) divided by
sqrt(chi^2(omega1||omega0)/2), where the chi-square divergence is the
curvature of the warden's detection statistic.  All values are in nats.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from . import divergences as dv
from .channels import BinaryCovertChannel, StinespringIsometry, build_covert_channel
from .errors import InvalidParameterError, SingularReferenceError
from .operators import DEFAULT_TOL, Tolerances


@dataclass(frozen=True)
class CapacityReport:
    """All closed-form rates for one binary covert channel, in nats."""

    dBob: float
    dWillie: float
    chi2Willie: float
    denom: float
    cSKey: float
    cS: float
    cEG: float
    lKeyMin: float
    lKeyNoSecrecy: float
    antiDegradedFlag: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _positive_gap(a: float, b: float) -> float:
    """Positive part of a - b, snapping roundoff-scale gaps to exact zero."""
    gap = a - b
    if gap <= 1e-12 * max(1.0, abs(a), abs(b)):
        return 0.0
    return gap


def _denominator(ch: BinaryCovertChannel, tol: Tolerances) -> float:
    chi2 = dv.chi_square(ch.omega1, ch.omega0, tol)
    if chi2 <= 0.0:
        raise SingularReferenceError("chi-square of warden outputs vanished")
    return math.sqrt(0.5 * chi2)


def covert_secrecy_capacity_keyed(ch: BinaryCovertChannel, tol: Tolerances = DEFAULT_TOL) -> float:
    """Key-assisted covert secrecy capacity D(sigma1||sigma0) / sqrt(chi^2/2)."""
    return dv.qre(ch.sigma1, ch.sigma0, tol) / _denominator(ch, tol)


def covert_secrecy_capacity_unassisted(ch: BinaryCovertChannel, tol: Tolerances = DEFAULT_TOL) -> float:
    """Unassisted covert secrecy capacity: positive part of the divergence gap
    [D(sigma1||sigma0) - D(omega1||omega0)]_+ over sqrt(chi^2/2)."""
    gap = _positive_gap(dv.qre(ch.sigma1, ch.sigma0, tol), dv.qre(ch.omega1, ch.omega0, tol))
    return gap / _denominator(ch, tol)


def covert_eg_capacity(V: StinespringIsometry, tol: Tolerances = DEFAULT_TOL) -> float:
    """Covert entanglement-generation capacity of the channel dilated by V.

    Coincides with the unassisted covert secrecy capacity of the induced
    binary quadruple.
    """
    return covert_secrecy_capacity_unassisted(build_covert_channel(V, tol), tol)


def minimal_key_rate(ch: BinaryCovertChannel, tol: Tolerances = DEFAULT_TOL) -> float:
    """Asymptotic key rate D(omega1||omega0) / sqrt(chi^2/2) that suffices
    for secrecy in the key-assisted scheme."""
    return dv.qre(ch.omega1, ch.omega0, tol) / _denominator(ch, tol)


def key_rate_without_secrecy(ch: BinaryCovertChannel, tol: Tolerances = DEFAULT_TOL) -> float:
    """Key rate needed for covertness alone:
    [D(omega1||omega0) - D(sigma1||sigma0)]_+ over sqrt(chi^2/2)."""
    gap = _positive_gap(dv.qre(ch.omega1, ch.omega0, tol), dv.qre(ch.sigma1, ch.sigma0, tol))
    return gap / _denominator(ch, tol)


def excitation_capacity_closed_form(gamma: float) -> float:
    """Closed-form covert capacity of the excitation channel.

    log((1-gamma)/gamma) * sqrt(2(1-gamma)/gamma) for gamma < 1/2, else 0.
    """
    if not 0.0 < gamma <= 1.0:
        raise InvalidParameterError(f"gamma must lie in (0, 1], got {gamma}")
    if gamma >= 0.5:
        return 0.0
    return math.log((1.0 - gamma) / gamma) * math.sqrt(2.0 * (1.0 - gamma) / gamma)


def capacity_report_from_quadruple(ch: BinaryCovertChannel, tol: Tolerances = DEFAULT_TOL) -> CapacityReport:
    """Evaluate every rate formula on one quadruple."""
    d_bob = dv.qre(ch.sigma1, ch.sigma0, tol)
    d_willie = dv.qre(ch.omega1, ch.omega0, tol)
    chi2 = dv.chi_square(ch.omega1, ch.omega0, tol)
    if chi2 <= 0.0:
        raise SingularReferenceError("chi-square of warden outputs vanished")
    denom = math.sqrt(0.5 * chi2)
    c_s = _positive_gap(d_bob, d_willie) / denom
    return CapacityReport(
        dBob=d_bob,
        dWillie=d_willie,
        chi2Willie=chi2,
        denom=denom,
        cSKey=d_bob / denom,
        cS=c_s,
        cEG=c_s,
        lKeyMin=d_willie / denom,
        lKeyNoSecrecy=_positive_gap(d_willie, d_bob) / denom,
        antiDegradedFlag=c_s == 0.0,
    )


def capacity_report(V: StinespringIsometry, tol: Tolerances = DEFAULT_TOL) -> CapacityReport:
    """Capacity report for the binary covert channel induced by V."""
    return capacity_report_from_quadruple(build_covert_channel(V, tol), tol)
