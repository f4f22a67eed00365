"""Time-domain oracle: cascade equations, collision model, kernel extraction."""

import math

import numpy as np
import pytest
import scipy.linalg

from selfkerr import (
    INFINITE,
    ChainParams,
    GaussianPacket,
    SimConfig,
    build_chain_equations,
    compare_to_analytic,
    numeric_single_photon,
    numeric_two_photon,
    single_photon_transmission,
)
from selfkerr.oracle import (
    _expm_apply,
    _expm_taylor,
    _pair_basis,
    _second_quantize,
    _shaped_coupling,
)


def test_equations_one_site():
    eqs = build_chain_equations(ChainParams(gamma=1.0, delta=0.0, chi=1.0, n_sites=1))
    # two modes: forward pass a1, backward pass b1, with b1 fed by a1
    want_drift = np.array([[-0.5, 0.0], [-1.0, -0.5]])
    assert np.array_equal(eqs.drift, want_drift)
    assert np.array_equal(eqs.drive, [-1.0, -1.0])
    assert np.array_equal(eqs.output_row, [1.0, 1.0])
    assert eqs.feedthrough == 1.0
    assert eqs.nonlinear_pairs == ((0, 1),)


def test_equations_two_site_cascade():
    g = 0.8
    eqs = build_chain_equations(ChainParams(gamma=g, delta=0.3, chi=1.0, n_sites=2))
    # cascade order a1, a2, b2, b1: the last mode is fed by all three others
    assert eqs.drift.shape == (4, 4)
    assert np.allclose(np.diag(eqs.drift), -(g / 2 + 0.3j))
    assert np.allclose(eqs.drift[3, :3], -g)
    assert np.allclose(np.triu(eqs.drift, 1), 0.0)
    assert np.allclose(eqs.drive, -math.sqrt(g))
    # sites pair the k-th forward mode with the k-th backward mode
    assert eqs.nonlinear_pairs == ((0, 3), (1, 2))


def test_equations_lossless_cascade_identity():
    # a passive chiral network decays only through its collective output:
    # drift + drift^dag must equal -(output column) (output row)
    for n in range(1, 6):
        eqs = build_chain_equations(ChainParams(gamma=1.3, delta=-0.2, n_sites=n))
        lhs = eqs.drift + eqs.drift.conj().T
        rhs = -np.outer(eqs.output_row, eqs.output_row)
        assert np.max(np.abs(lhs - rhs)) < 1e-14


def test_equations_reject_infinite_chi():
    with pytest.raises(ValueError):
        build_chain_equations(ChainParams(chi=INFINITE))


def test_single_photon_solve_matches_closed_form():
    rng = np.random.default_rng(41)
    for n in range(1, 5):
        p = ChainParams(gamma=1.1, delta=0.2, chi=0.9, n_sites=n)
        eqs = build_chain_equations(p)
        for omega in 2.0 * rng.standard_normal(10):
            got = numeric_single_photon(p, eqs, omega)
            want = single_photon_transmission(p, omega)
            assert abs(got - want) < 1e-10


def test_single_photon_special_values():
    p = ChainParams(n_sites=2)
    eqs = build_chain_equations(p)
    assert numeric_single_photon(p, eqs, 0.0) == pytest.approx(1.0, abs=1e-12)
    p1 = ChainParams(n_sites=1)
    eqs1 = build_chain_equations(p1)
    assert numeric_single_photon(p1, eqs1, 0.5) == pytest.approx(-1.0, abs=1e-12)


def test_expm_helpers_match_scipy():
    rng = np.random.default_rng(43)
    for dim, scale in ((4, 0.3), (9, 2.5)):
        a = scale * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        want = scipy.linalg.expm(a)
        assert np.max(np.abs(_expm_taylor(a) - want)) < 1e-12 * np.max(np.abs(want))
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        assert np.max(np.abs(_expm_apply(a, v) - want @ v)) < 1e-12 * np.max(np.abs(want @ v))


def test_second_quantize_matches_tensor_construction():
    # independent reference: lift theta to the symmetric subspace of the
    # two-fold tensor product with explicit orthonormal basis vectors
    rng = np.random.default_rng(47)
    n = 4
    theta = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    pairs, index = _pair_basis(n)
    got = _second_quantize(theta, pairs, index)

    basis = np.zeros((n * n, len(pairs)), dtype=complex)
    for col, (i, j) in enumerate(pairs):
        vec = np.zeros((n, n), dtype=complex)
        if i == j:
            vec[i, i] = 1.0
        else:
            vec[i, j] = vec[j, i] = 1.0 / _SQRT2
        basis[:, col] = vec.ravel()
    eye = np.eye(n)
    lifted = np.kron(theta, eye) + np.kron(eye, theta)
    want = basis.conj().T @ lifted @ basis
    assert np.max(np.abs(got - want)) < 1e-12


_SQRT2 = math.sqrt(2.0)


def test_shaped_coupling_emits_gaussian_envelope():
    # a cavity decaying at g(t) emits amplitude g(t)*sqrt(rest(t)), which
    # must reproduce the target envelope until the coupling is cut
    sigma, t0 = 0.2, 25.0
    times = np.linspace(0.0, 80.0, 4001)
    g = _shaped_coupling(GaussianPacket(bandwidth=sigma), times, t0)
    rest = 0.5 * np.array([math.erfc(_SQRT2 * sigma * (t - t0)) for t in times])
    env = (2.0 * sigma**2 / math.pi) ** 0.25 * np.exp(-(sigma**2) * (times - t0) ** 2)
    open_mask = rest > 1e-12
    emitted = g * np.sqrt(rest)
    assert np.max(np.abs(emitted[open_mask] - env[open_mask])) < 1e-12
    assert np.all(g[~open_mask] == 0.0)


def test_two_photon_guards():
    pk = GaussianPacket(bandwidth=0.1)
    p5 = ChainParams(chi=1.0, n_sites=5)
    with pytest.raises(ValueError):
        numeric_two_photon(p5, build_chain_equations(ChainParams(chi=1.0, n_sites=4)), pk)
    p1 = ChainParams(chi=1.0, n_sites=1)
    with pytest.raises(ValueError):
        numeric_two_photon(p1, build_chain_equations(p1), GaussianPacket(bandwidth=0.3))


def test_zero_chi_interaction_floor():
    # with the interaction off, the connected part must cancel exactly
    # against the product of single-photon runs of the same pipeline
    p = ChainParams(chi=0.0, n_sites=1)
    eqs = build_chain_equations(p)
    pk = GaussianPacket(bandwidth=0.15)
    cfg = SimConfig(dt=0.04, n_freq=9, check_convergence=False)
    res = numeric_two_photon(p, eqs, pk, cfg)
    assert res.samples
    assert max(abs(s.value) for s in res.samples) < 1e-8
    assert not res.converged
    assert all(math.isinf(s.error_estimate) for s in res.samples)


def test_single_spectrum_first_order_in_dt():
    # the stepping scheme carries a global O(dt) error; halving dt must
    # roughly halve the single-photon spectral error
    p = ChainParams(chi=1.0, n_sites=1)
    eqs = build_chain_equations(p)
    pk = GaussianPacket(bandwidth=0.15)

    def spectrum_error(dt):
        cfg = SimConfig(dt=dt, n_freq=9, check_convergence=False)
        res = numeric_two_photon(p, eqs, pk, cfg)
        t = single_photon_transmission(p, res.freqs)
        xi = pk.amplitude(res.freqs)
        want = t * xi
        return np.max(np.abs(res.single_spectrum - want)) / np.max(np.abs(want))

    e_coarse = spectrum_error(0.08)
    e_fine = spectrum_error(0.04)
    assert e_fine < e_coarse
    assert 1.4 < e_coarse / e_fine < 2.8


def test_converged_run_invariants_and_kernel_match():
    # full ladder at one site: unitary stepping, two photons out, and the
    # extracted kernel agrees with the closed form
    p = ChainParams(chi=1.0, n_sites=1)
    eqs = build_chain_equations(p)
    pk = GaussianPacket(bandwidth=0.1)
    cfg = SimConfig(dt=0.02, n_freq=9)
    res = numeric_two_photon(p, eqs, pk, cfg)
    assert res.norm_drift < 1e-6
    assert res.residual_excitation < 1e-8
    assert res.output_photon_number == pytest.approx(2.0, abs=1e-6)
    assert res.converged
    assert res.max_error_estimate <= cfg.tolerance
    # energy-conserving sample labels
    for s in res.samples:
        assert s.nu1 + s.nu2 == pytest.approx(s.omega1 + s.omega2, abs=1e-12)
        assert s.error_estimate > 0.0
    assert compare_to_analytic(p, pk, res) < 1e-3


def test_detuned_packet_single_spectrum():
    # carrier off resonance exercises the source phase bookkeeping; the
    # emitted spectrum must sit at the carrier with the right transmission
    p = ChainParams(chi=1.0, n_sites=1, delta=0.0)
    eqs = build_chain_equations(p)
    pk = GaussianPacket(bandwidth=0.15, center_detuning=0.4)
    cfg = SimConfig(dt=0.02, n_freq=9, check_convergence=False)
    res = numeric_two_photon(p, eqs, pk, cfg)
    assert res.freqs[len(res.freqs) // 2] == pytest.approx(0.4)
    t = single_photon_transmission(p, res.freqs)
    want = t * pk.amplitude(res.freqs)
    err = np.max(np.abs(res.single_spectrum - want)) / np.max(np.abs(want))
    assert err < 5e-3


def test_compare_requires_samples():
    p = ChainParams(chi=1.0, n_sites=1)
    pk = GaussianPacket(bandwidth=0.1)
    from selfkerr import TwoPhotonSimResult

    empty = TwoPhotonSimResult(
        freqs=np.array([0.0]), amplitude=np.zeros((1, 1)), product_amplitude=np.zeros((1, 1)),
        single_spectrum=np.zeros(1), samples=[], converged=False, dt=0.01,
        max_error_estimate=float("inf"), convergence_order=float("nan"),
        norm_drift=0.0, residual_excitation=0.0, output_photon_number=0.0,
    )
    with pytest.raises(ValueError):
        compare_to_analytic(p, pk, empty)
