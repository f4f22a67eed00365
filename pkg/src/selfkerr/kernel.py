"""Closed-form scattering amplitudes for a mirror-folded chain of cross-Kerr sites.

A chiral waveguide couples sequentially to ``n_sites`` interaction sites and is
retroreflected by a mirror at the far end, so the field traverses the chain
twice (2 * n_sites cavity passes in total).  Each site holds two cavity modes,
one for each propagation direction, coupled by a cross-Kerr interaction of
strength ``chi``; every mode decays into the waveguide at rate ``gamma`` and is
resonant at frequency ``delta``.

Notation used throughout (frequencies in the rotating frame of the drive):

* ``Gamma(w) = gamma/2 + 1j*(delta - w)``, the complex cavity response.
* ``gbar(w) = conj(Gamma(w)) / Gamma(w)``, the unit-modulus single-pass phase
  a photon picks up at one cavity.
* Single-photon transmission through the folded chain:
  ``t(w) = gbar(w)**(2*n_sites)``.

Two-photon scattering is ``S = S0 + 1j*T`` where ``S0`` is the product of
single-photon transmissions and the connected part ``T`` conserves total
frequency: ``T = C(w1, w2, n1, n2) * delta(w1 + w2 - n1 - n2)`` with incoming
frequencies ``n1, n2`` and outgoing ``w1, w2``.  The kernels ``C`` implemented
here all share the prefactor ::

    -(gamma**2 / (2*pi)) * chi/(1 + 1j*chi/(Gamma(w1) + Gamma(w2)))
        / (Gamma(n2)*Gamma(n1)*Gamma(w2)*Gamma(w1))

and differ only in a polynomial in the ``gbar`` phases whose degree grows with
the chain length.  Because every ``gbar`` lies on the unit circle, integer
powers are evaluated by angle multiplication, which is exact in modulus and
avoids the error growth of repeated complex multiplication.

The hard-interaction limit ``chi -> INFINITE`` replaces the interaction factor
``chi/(1 + 1j*chi/(Gamma+Gamma))`` by its limit ``-1j*(Gamma(w1)+Gamma(w2))``
and is handled on a dedicated code path; no large finite number is ever
substituted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "INFINITE",
    "ChainParams",
    "is_infinite_chi",
    "gamma_shift",
    "phase_factor",
    "single_photon_transmission",
    "kernel_one_site",
    "kernel_two_site",
    "kernel_n_sum",
    "kernel_n_closed",
    "kernel_cross_kerr",
    "kernel_single_cavity_reference",
    "kernel_infinite_chi",
    "continuum_kernel",
    "ideal_phase",
]

INFINITE = math.inf
"""Distinguished interaction strength for the hard-Kerr limit."""

def is_infinite_chi(chi: float) -> bool:
    """Return True when ``chi`` is the distinguished hard-interaction value."""
    return math.isinf(chi)


@dataclass(frozen=True)
class ChainParams:
    """Physical parameters of the mirror-folded cross-Kerr chain.

    Attributes
    ----------
    gamma : float
        Cavity decay rate into the waveguide, > 0.  The default of 1 means all
        frequencies and rates are expressed in units of ``gamma``.
    delta : float
        Common resonance frequency of every cavity mode.
    chi : float
        Cross-Kerr interaction strength, >= 0.  Pass ``INFINITE`` for the
        hard-interaction limit.
    n_sites : int
        Number of interaction sites, >= 1.  The mirror folds the chain, so the
        field makes ``2 * n_sites`` cavity passes.
    """

    gamma: float = 1.0
    delta: float = 0.0
    chi: float = 1.0
    n_sites: int = 1

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.chi >= 0:
            raise ValueError(f"chi must be nonnegative or INFINITE, got {self.chi}")
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be at least 1, got {self.n_sites}")


def gamma_shift(params: ChainParams, omega):
    """Complex cavity response ``Gamma(omega) = gamma/2 + 1j*(delta - omega)``.

    Parameters
    ----------
    params : ChainParams
    omega : float or ndarray
        Frequency (rotating frame, same units as ``gamma``).

    Returns
    -------
    complex or ndarray
    """
    return params.gamma / 2 + 1j * (params.delta - np.asarray(omega))


def _phase_angle(params: ChainParams, omega):
    """Argument of ``phase_factor``; real, in (-pi, pi)."""
    # gbar = conj(Gamma)/Gamma has argument -2*arg(Gamma).
    return -2.0 * np.arctan2(params.delta - np.asarray(omega), params.gamma / 2)


def phase_factor(params: ChainParams, omega):
    """Unit-modulus single-pass phase ``gbar(omega) = conj(Gamma)/Gamma``.

    Satisfies ``gbar = gamma/Gamma - 1`` identically.

    Parameters
    ----------
    params : ChainParams
    omega : float or ndarray

    Returns
    -------
    complex or ndarray
        Value on the unit circle.
    """
    return np.exp(1j * _phase_angle(params, omega))


def single_photon_transmission(params: ChainParams, omega):
    """Transmission ``t(omega) = gbar(omega)**(2*n_sites)`` through the folded chain.

    Exactly unit modulus for every frequency; evaluated by angle
    multiplication so the modulus stays 1 to machine precision for any
    chain length.
    """
    return np.exp(1j * (2 * params.n_sites) * _phase_angle(params, omega))


def ideal_phase(chi: float, gamma: float = 1.0) -> float:
    """Conditional phase ``2*arctan(chi/gamma)`` written on a resonant photon pair.

    Two simultaneous resonant photons acquire this extra phase relative to two
    photons passing one at a time.  ``chi = INFINITE`` gives exactly ``pi``.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if not chi >= 0:
        raise ValueError(f"chi must be nonnegative or INFINITE, got {chi}")
    return 2.0 * math.atan(chi / gamma)


def _interaction_factor_gg(params: ChainParams, gg):
    """Interaction factor as a function of ``gg = Gamma(w1) + Gamma(w2)``."""
    if is_infinite_chi(params.chi):
        return -1j * gg
    return params.chi / (1.0 + 1j * params.chi / gg)


def _interaction_factor(params: ChainParams, omega1, omega2):
    """Shared factor ``chi/(1 + 1j*chi/(Gamma(w1)+Gamma(w2)))``.

    For ``chi = INFINITE`` this returns the analytic limit
    ``-1j*(Gamma(w1)+Gamma(w2))``.
    """
    gg = gamma_shift(params, omega1) + gamma_shift(params, omega2)
    return _interaction_factor_gg(params, gg)


def _assemble(params, omega1, omega2, nu1, nu2, structure):
    """Prefactor times the chain-length-dependent phase polynomial."""
    denom = (
        gamma_shift(params, nu2)
        * gamma_shift(params, nu1)
        * gamma_shift(params, omega2)
        * gamma_shift(params, omega1)
    )
    factor = _interaction_factor(params, omega1, omega2)
    return -(params.gamma**2 / (2.0 * np.pi)) * factor / denom * structure


def _require_finite_chi(params: ChainParams, name: str) -> None:
    if is_infinite_chi(params.chi):
        raise ValueError(
            f"{name} requires finite chi; use kernel_infinite_chi for the hard limit"
        )


def _geometric_bracket(angle_x, angle_y, power: int):
    """Evaluate ``(x**k - y**k) / (x - y)`` for unit-modulus ``x``, ``y``.

    With ``x = exp(1j*angle_x)`` and ``y = exp(1j*angle_y)`` the ratio reduces
    to the Dirichlet form ``sin(k*d/2) / sin(d/2) * exp(1j*(k-1)*m)`` where
    ``d = angle_x - angle_y`` and ``m = (angle_x + angle_y) / 2``.  Unlike the
    literal difference quotient this stays accurate to a few ulps arbitrarily
    close to the degenerate manifold x == y, because both sines are functions
    of the same ``d`` and their ratio is well conditioned in it.  Exactly on
    the manifold the analytic limit (value ``k`` at d = 0) is substituted.
    """
    d = np.asarray(angle_x) - np.asarray(angle_y)
    m = 0.5 * (np.asarray(angle_x) + np.asarray(angle_y))
    s = np.sin(0.5 * d)
    degenerate = s == 0.0
    ratio = np.sin(0.5 * power * d) / np.where(degenerate, 1.0, s)
    # L'Hopital continuation; cos(d/2) is +-1 wherever sin(d/2) vanishes
    limit = power * np.cos(0.5 * power * d) / np.where(degenerate, np.cos(0.5 * d), 1.0)
    return np.where(degenerate, limit, ratio) * np.exp(1j * (power - 1) * m)


def _structure_one_site(params, omega1, omega2, nu1, nu2):
    w1 = phase_factor(params, omega1)
    w2 = phase_factor(params, omega2)
    v1 = phase_factor(params, nu1)
    v2 = phase_factor(params, nu2)
    return (v1 + v2) * (w1 + w2)


def _structure_two_site(params, omega1, omega2, nu1, nu2):
    aw1 = _phase_angle(params, omega1)
    aw2 = _phase_angle(params, omega2)
    av1 = _phase_angle(params, nu1)
    av2 = _phase_angle(params, nu2)

    def p(angle, k):
        return np.exp(1j * k * np.asarray(angle))

    cubic = (p(av1, 3) + p(av2, 3)) * (p(aw1, 3) + p(aw2, 3))
    product = (
        p(av1 + av2 + aw1 + aw2, 1)
        * (p(av1, 1) + p(av2, 1))
        * (p(aw1, 1) + p(aw2, 1))
    )
    return cubic + product


def _structure_n_sum(params, omega1, omega2, nu1, nu2):
    n = params.n_sites
    aw1 = _phase_angle(params, omega1)
    aw2 = _phase_angle(params, omega2)
    av1 = _phase_angle(params, nu1)
    av2 = _phase_angle(params, nu2)
    base = aw1 + aw2 + av1 + av2
    total = 0.0
    for j in range(1, n + 1):
        k = 2 * j - 1
        term = (
            np.exp(1j * (n - j) * np.asarray(base))
            * (np.exp(1j * k * np.asarray(aw1)) + np.exp(1j * k * np.asarray(aw2)))
            * (np.exp(1j * k * np.asarray(av1)) + np.exp(1j * k * np.asarray(av2)))
        )
        total = total + term
    return total


def _structure_n_closed(params, omega1, omega2, nu1, nu2):
    n = params.n_sites
    aw1 = _phase_angle(params, omega1)
    aw2 = _phase_angle(params, omega2)
    av1 = _phase_angle(params, nu1)
    av2 = _phase_angle(params, nu2)
    # Pairing each outgoing phase with one incoming phase resums the site sum
    # into two geometric brackets related by nu1 <-> nu2.
    first = _geometric_bracket(aw2 + av2, aw1 + av1, 2 * n)
    second = _geometric_bracket(aw2 + av1, aw1 + av2, 2 * n)
    return first + second


def _structure_cross_kerr(params, omega1, omega2, nu1, nu2):
    n = params.n_sites
    aw1 = _phase_angle(params, omega1)
    aw2 = _phase_angle(params, omega2)
    av1 = _phase_angle(params, nu1)
    av2 = _phase_angle(params, nu2)
    return _geometric_bracket(aw2 + av2, aw1 + av1, n)


def _structure_single_cavity(params, omega1, omega2, nu1, nu2):
    shape = np.broadcast_shapes(
        np.shape(omega1), np.shape(omega2), np.shape(nu1), np.shape(nu2)
    )
    return np.ones(shape) if shape else 1.0


_STRUCTURES = {
    "one_site": _structure_one_site,
    "two_site": _structure_two_site,
    "n_sum": _structure_n_sum,
    "n_closed": _structure_n_closed,
    "cross_kerr": _structure_cross_kerr,
    "single_cavity_reference": _structure_single_cavity,
}


def kernel_one_site(params: ChainParams, omega1, omega2, nu1, nu2):
    """Connected two-photon kernel for a single mirror-folded site.

    Parameters
    ----------
    params : ChainParams
        ``params.chi`` must be finite; ``params.n_sites`` is ignored (the
        structure is fixed to one site).
    omega1, omega2 : float or ndarray
        Outgoing frequencies.
    nu1, nu2 : float or ndarray
        Incoming frequencies.

    Returns
    -------
    complex or ndarray
        Kernel value; the connected scattering amplitude is
        ``1j * C * delta(omega1 + omega2 - nu1 - nu2)``.
    """
    _require_finite_chi(params, "kernel_one_site")
    structure = _structure_one_site(params, omega1, omega2, nu1, nu2)
    return _assemble(params, omega1, omega2, nu1, nu2, structure)


def kernel_two_site(params: ChainParams, omega1, omega2, nu1, nu2):
    """Connected two-photon kernel for two mirror-folded sites.

    Same conventions as `kernel_one_site`; ``params.n_sites`` is ignored.
    """
    _require_finite_chi(params, "kernel_two_site")
    structure = _structure_two_site(params, omega1, omega2, nu1, nu2)
    return _assemble(params, omega1, omega2, nu1, nu2, structure)


def kernel_n_sum(params: ChainParams, omega1, omega2, nu1, nu2):
    """Connected kernel for ``params.n_sites`` sites as an explicit site sum.

    Costs O(n_sites) per evaluation.  `kernel_n_closed` resums the same
    expression in closed form; the two agree to better than 1e-12 relative
    error and the sum form exists as an independent cross-check.
    """
    _require_finite_chi(params, "kernel_n_sum")
    structure = _structure_n_sum(params, omega1, omega2, nu1, nu2)
    return _assemble(params, omega1, omega2, nu1, nu2, structure)


def kernel_n_closed(params: ChainParams, omega1, omega2, nu1, nu2):
    """Connected kernel for ``params.n_sites`` sites in closed geometric form.

    The site sum telescopes into two geometric ratios; degenerate phase
    combinations (coincident bases within 1e-12) are evaluated by their
    analytic limit, so the kernel is finite and continuous everywhere,
    including the fully degenerate point ``omega1 = omega2 = nu1 = nu2``.

    Parameters
    ----------
    params : ChainParams
        ``params.chi`` must be finite.
    omega1, omega2, nu1, nu2 : float or ndarray
        Outgoing and incoming frequencies; energy conservation
        ``omega1 + omega2 = nu1 + nu2`` is the caller's responsibility (the
        kernel multiplies a frequency delta function in the S-matrix).

    Returns
    -------
    complex or ndarray
    """
    _require_finite_chi(params, "kernel_n_closed")
    structure = _structure_n_closed(params, omega1, omega2, nu1, nu2)
    return _assemble(params, omega1, omega2, nu1, nu2, structure)


def kernel_cross_kerr(params: ChainParams, omega1, omega2, nu1, nu2):
    """Connected kernel of the unfolded cross-Kerr chain (no mirror).

    A chain of ``params.n_sites`` cross-Kerr sites traversed once.  Unlike the
    mirror-folded kernels this expression is not symmetric under exchanging
    the incoming frequencies ``nu1 <-> nu2`` on its own; the folded chain of n
    sites equals the sum of this kernel at ``2*n`` sites and its nu-swapped
    partner::

        kernel_n_closed(n) = kernel_cross_kerr(2*n) + kernel_cross_kerr(2*n, nu-swapped)
    """
    _require_finite_chi(params, "kernel_cross_kerr")
    structure = _structure_cross_kerr(params, omega1, omega2, nu1, nu2)
    return _assemble(params, omega1, omega2, nu1, nu2, structure)


def kernel_single_cavity_reference(params: ChainParams, omega1, omega2, nu1, nu2):
    """Connected kernel of a single two-sided self-Kerr cavity.

    Reference medium against which the chain's effective self-Kerr response is
    compared.  Equals the shared prefactor with trivial structure, so ::

        kernel_one_site / kernel_single_cavity_reference
            == (gbar(nu1) + gbar(nu2)) * (gbar(omega1) + gbar(omega2))

    and on resonance the one-site kernel is 4 times this reference.
    """
    _require_finite_chi(params, "kernel_single_cavity_reference")
    structure = _structure_single_cavity(params, omega1, omega2, nu1, nu2)
    return _assemble(params, omega1, omega2, nu1, nu2, structure)


def kernel_infinite_chi(
    params: ChainParams, omega1, omega2, nu1, nu2, which: str = "n_closed"
):
    """Hard-interaction limit of any of the chain kernels.

    The interaction factor ``chi/(1 + 1j*chi/(Gamma(w1)+Gamma(w2)))`` is
    replaced by its exact ``chi -> INFINITE`` limit
    ``-1j*(Gamma(w1)+Gamma(w2))``; the value of ``params.chi`` is not used.

    Parameters
    ----------
    params : ChainParams
    omega1, omega2, nu1, nu2 : float or ndarray
    which : str
        One of ``"one_site"``, ``"two_site"``, ``"n_sum"``, ``"n_closed"``,
        ``"cross_kerr"``, ``"single_cavity_reference"``.

    Returns
    -------
    complex or ndarray
        Finite for all frequency arguments.
    """
    try:
        structure_fn = _STRUCTURES[which]
    except KeyError:
        raise ValueError(
            f"unknown kernel {which!r}; expected one of {sorted(_STRUCTURES)}"
        ) from None
    structure = structure_fn(params, omega1, omega2, nu1, nu2)
    denom = (
        gamma_shift(params, nu2)
        * gamma_shift(params, nu1)
        * gamma_shift(params, omega2)
        * gamma_shift(params, omega1)
    )
    gg = gamma_shift(params, omega1) + gamma_shift(params, omega2)
    return -(params.gamma**2 / (2.0 * np.pi)) * (-1j * gg) / denom * structure


def continuum_kernel(params: ChainParams, omega1, omega2):
    """Frequency-diagonal pair amplitude of the continuum self-Kerr medium.

    In the many-site limit the chain acts on a narrowband photon pair as a
    frequency-diagonal medium; this is the multiplicative amplitude it applies
    at outgoing frequencies ``(omega1, omega2)``::

        B = 1 - 1j*(gamma**3/8) * chi/(1 + 1j*chi/(Gamma(w1)+Gamma(w2)))
                / |Gamma(w1)*Gamma(w2)|**2

    On resonance ``B = (gamma - 1j*chi)/(gamma + 1j*chi) = exp(-1j*Phi)`` with
    ``Phi = ideal_phase(chi, gamma)``; ``chi = INFINITE`` gives exactly -1.
    """
    g1 = gamma_shift(params, omega1)
    g2 = gamma_shift(params, omega2)
    factor = _interaction_factor(params, omega1, omega2)
    return 1.0 - 1j * (params.gamma**3 / 8.0) * factor / np.abs(g1 * g2) ** 2
