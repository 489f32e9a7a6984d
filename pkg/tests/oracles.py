"""Independent brute-force references the library is checked against.

Everything here is deliberately naive: dense matrices assembled from the
spin-model bookkeeping directly, and a fixed-step RK4 integrator for
i dpsi/dt = H psi.  None of it shares code with the package's banded or
spectral paths.
"""
import numpy as np


def dense_hamiltonian(field, J=1.0, site_shift=None, coupling_shift=None, nnn=0.0):
    """Single-excitation matrix from explicit Sz bookkeeping: the state
    with the excitation at site i has Sz = +1/2 there and -1/2 elsewhere."""
    h = np.asarray(field, dtype=float).copy()
    if site_shift is not None:
        h = h + site_shift
    N = h.size
    H = np.zeros((N, N))
    for i in range(N):
        sz = np.full(N, -0.5)
        sz[i] = 0.5
        H[i, i] = -np.dot(h, sz)
    for i in range(N - 1):
        Ji = J if coupling_shift is None else J + coupling_shift[i]
        H[i, i + 1] = H[i + 1, i] = -0.5 * Ji
    for i in range(N - 2):
        if nnn != 0.0:
            H[i, i + 2] = H[i + 2, i] = -0.5 * nnn
    return H


def rk4_evolve(H, psi0, t_total, dt=1e-4):
    """Fixed-step RK4 for the Schroedinger equation with constant H."""
    steps = int(round(t_total / dt))
    assert abs(steps * dt - t_total) < 1e-9, "t_total must be a multiple of dt"
    A = -1j * np.asarray(H, dtype=complex)
    psi = np.asarray(psi0, dtype=complex).copy()
    for _ in range(steps):
        k1 = A @ psi
        k2 = A @ (psi + 0.5 * dt * k1)
        k3 = A @ (psi + 0.5 * dt * k2)
        k4 = A @ (psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


def rk4_evolve_piecewise(dense_for_interval, psi0, n_intervals, tau, dt=1e-4):
    """RK4 across piecewise-constant intervals [k tau, (k+1) tau)."""
    psi = np.asarray(psi0, dtype=complex).copy()
    for k in range(n_intervals):
        psi = rk4_evolve(dense_for_interval(k), psi, tau, dt)
    return psi
