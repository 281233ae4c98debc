"""Dense-matrix reference computations, independent of the sparse package code.

Polarization optics here starts from textbook Cartesian Jones matrices in the
(H, V) basis and is converted to the circular basis through
L = (H - iV)/sqrt2, R = (H + iV)/sqrt2, the convention under which
|H> = (|L> + |R>)/sqrt2 and |theta> = (e^{i theta}|L> + e^{-i theta}|R>)/sqrt2.
"""
import itertools
import math

import numpy as np

M_MAX = 6
OAMS = np.arange(-M_MAX, M_MAX + 1)
N_OAM = OAMS.size

# columns: L, R expressed in (H, V)
CIRC_IN_LIN = np.array([[1, 1], [-1j, 1j]]) / np.sqrt(2)
LIN_TO_CIRC = CIRC_IN_LIN.conj().T


def to_circular(jones_hv):
    return LIN_TO_CIRC @ jones_hv @ CIRC_IN_LIN


def jones_hwp(alpha):
    c, s = np.cos(2 * alpha), np.sin(2 * alpha)
    return np.array([[c, s], [s, -c]], dtype=complex)


def jones_polarizer(alpha):
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c * c, c * s], [c * s, s * s]], dtype=complex)


def linear_hv(theta):
    return np.array([np.cos(theta), np.sin(theta)], dtype=complex)


def oam_index(m):
    return int(m) + M_MAX


def oam_vec(m):
    v = np.zeros(N_OAM, dtype=complex)
    v[oam_index(m)] = 1
    return v


def spin_vec(name):
    if name in ("L", "R"):
        return np.eye(2, dtype=complex)[0 if name == "L" else 1]
    angle = {"H": 0.0, "V": math.pi / 2, "D": math.pi / 4, "A": -math.pi / 4}[name]
    return LIN_TO_CIRC @ linear_hv(angle)


def joint(spin, oam):
    return np.kron(spin, oam)


def qplate_matrix(q=1):
    """|L,m> -> |R,m+2q>, |R,m> -> |L,m-2q>; columns that leave the window are dropped."""
    dim = 2 * N_OAM
    U = np.zeros((dim, dim), dtype=complex)
    for m in OAMS:
        for s_in, s_out, shift in ((0, 1, 2 * q), (1, 0, -2 * q)):
            m2 = m + shift
            if abs(m2) <= M_MAX:
                U[s_out * N_OAM + oam_index(m2), s_in * N_OAM + oam_index(m)] = 1
    return U


def spin_op(mat2):
    return np.kron(mat2, np.eye(N_OAM))


def orientation_oam(chi):
    return (np.exp(2j * chi) * oam_vec(2) + np.exp(-2j * chi) * oam_vec(-2)) / np.sqrt(2)


def hologram_matrix(chi):
    """|0><chi| on OAM, spin untouched."""
    return np.kron(np.eye(2), np.outer(oam_vec(0), orientation_oam(chi).conj()))


def smf_matrix():
    P = np.zeros((N_OAM, N_OAM))
    P[oam_index(0), oam_index(0)] = 1
    return np.kron(np.eye(2), P)


def dense_single(state):
    v = np.zeros(2 * N_OAM, dtype=complex)
    for lab, a in state.amplitudes.items():
        v[int(lab.spin) * N_OAM + oam_index(lab.oam)] = a
    return v


def dense_pair(pair):
    d = 2 * N_OAM
    v = np.zeros(d * d, dtype=complex)
    for (la, lb), a in pair.amplitudes.items():
        ia = int(la.spin) * N_OAM + oam_index(la.oam)
        ib = int(lb.spin) * N_OAM + oam_index(lb.oam)
        v[ia * d + ib] = a
    return v


def single_photon_probability(theta, chi):
    """HWP(theta/2) + polarizer(0) + hologram + fiber on the q-plate output of |H,0>."""
    psi = qplate_matrix() @ joint(spin_vec("H"), oam_vec(0))
    analyzer = spin_op(to_circular(jones_polarizer(0.0) @ jones_hwp(theta / 2)))
    out = smf_matrix() @ hologram_matrix(chi) @ analyzer @ psi
    return float(np.vdot(out, out).real)


def spdc_dense(coeffs):
    """sum_m c_|m| |H,m>|H,-m>, normalized; brute-force double loop."""
    d = 2 * N_OAM
    v = np.zeros(d * d, dtype=complex)
    h = spin_vec("H")
    for m in OAMS:
        k = abs(m)
        c = coeffs[k] if k < len(coeffs) else 0.0
        v += c * np.kron(joint(h, oam_vec(m)), joint(h, oam_vec(-m)))
    return v / np.linalg.norm(v)


def reduced_oam_populations_dense(v):
    d = 2 * N_OAM
    rho_a = np.einsum("ij,kj->ik", v.reshape(d, d), v.reshape(d, d).conj())
    diag = np.real(np.diag(rho_a)).reshape(2, N_OAM).sum(axis=0)
    return {int(m): float(p) for m, p in zip(OAMS, diag) if p > 1e-15}


def chsh_ideal(chi, visibility=1.0, theta=0.0, theta_p=math.pi / 4, offset=math.pi / 8):
    """S from E = V cos(2(theta - 2 chi)) evaluated directly by trigonometry."""
    E = lambda t, c: visibility * math.cos(2 * (t - 2 * c))
    chi_p = chi + offset
    return abs(E(theta, chi) - E(theta, chi_p) + E(theta_p, chi) + E(theta_p, chi_p))


def grid_pairs(xs, ys):
    return list(itertools.product(xs, ys))
