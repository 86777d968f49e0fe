"""Independent reference values for the unit tests.

Builds every model from scratch with NumPy in row-major vectorization
(the library uses column stacking) and solves kernels by SVD, so agreement
with the C++ results is not an artifact of shared code. Run it and copy the
printed values into the tests when the models change.
"""
import numpy as np

HBAR = 1.054571817e-34
KB = 1.380649e-23
TWO_PI = 2 * np.pi


def mhz(f):
    return TWO_PI * f * 1e6


def ghz(f):
    return TWO_PI * f * 1e9


def bose(t, w):
    return 1.0 / np.expm1(HBAR * w / (KB * t))


OMEGA, G, ALPHA = ghz(5.866), mhz(560.1), mhz(-133)
GS, GA, GPHI = mhz(2.87), mhz(2.83), mhz(0.94)
WS, WA = OMEGA + G, OMEGA - G


def lowering(d):
    return np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)


def liouvillian(h, jumps):
    # Row-major: vec(A X B) = (A kron B^T) vec(X).
    d = h.shape[0]
    i = np.eye(d)
    l = -1j * (np.kron(h, i) - np.kron(i, h.T))
    for rate, x in jumps:
        xdx = x.conj().T @ x
        l += rate * (np.kron(x, x.conj()) - 0.5 * np.kron(xdx, i) - 0.5 * np.kron(i, xdx.T))
    return l


def kernel(l):
    d = int(round(np.sqrt(l.shape[0])))
    _, _, vh = np.linalg.svd(l)
    rho = vh[-1].conj().reshape(d, d)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def apply(l, rho):
    d = rho.shape[0]
    return (l @ rho.reshape(-1)).reshape(d, d)


def mode_ops(levels):
    a = lowering(levels)
    i = np.eye(levels)
    return np.kron(a, i), np.kron(i, a)


def thermal_currents(n_s, n_a, gphi=GPHI, g=G):
    s, a = mode_ops(3)
    h = (OMEGA + g) * s.conj().T @ s + (OMEGA - g) * a.conj().T @ a
    ex = s.conj().T @ a + a.conj().T @ s
    chans = {
        "S": [(GS * (n_s + 1), s), (GS * n_s, s.conj().T)],
        "A": [(GA * (n_a + 1), a), (GA * n_a, a.conj().T)],
        "PHI": [(0.5 * gphi, ex)],
    }
    total = liouvillian(h, sum(chans.values(), []))
    rho = kernel(total)
    zero = np.zeros_like(h)
    out = {}
    for name, jumps in chans.items():
        lc = liouvillian(zero, jumps)
        out[name] = -HBAR * np.trace(h @ apply(lc, rho)).real
    return out


def linearized(n_s, n_a, gphi=GPHI, g=G):
    k = GA * GS * gphi / (GS * gphi + GA * (2 * GS + gphi))
    dn = n_a - n_s
    return HBAR * dn * k * (g + OMEGA), HBAR * dn * k * (g - OMEGA), -2 * g * HBAR * dn * k


def site_eigen():
    b = lowering(3)
    i = np.eye(3)
    s1, s2 = np.kron(b, i), np.kron(i, b)
    h = OMEGA * (s1.conj().T @ s1 + s2.conj().T @ s2)
    h += G * (s1.conj().T @ s2 + s2.conj().T @ s1)
    for x in (s1, s2):
        xd = x.conj().T
        h += 0.5 * ALPHA * xd @ xd @ x @ x
    return np.sort(np.linalg.eigvalsh(h)) / ghz(1)


def driven_na(gphi, rabi):
    s, a = mode_ops(2)
    ex = s.conj().T @ a + a.conj().T @ s
    h = (WA - WS) * a.conj().T @ a + 0.5 * rabi * (s + s.conj().T)
    rho = kernel(liouvillian(h, [(GS, s), (GA, a), (0.5 * gphi, ex)]))
    return np.trace(a.conj().T @ a @ rho).real, np.trace(s.conj().T @ s @ rho).real


def main():
    n_s, n_a = bose(0.177, WS), bose(0.039, WA)
    print(f"n_s(177 mK) = {n_s:.15g}")
    print(f"n_a(39 mK)  = {n_a:.15g}")
    full = thermal_currents(n_s, n_a)
    print("full currents aW:", {k: f"{v * 1e18:.12g}" for k, v in full.items()})
    print("linearized aW:", [f"{v * 1e18:.12g}" for v in linearized(n_s, n_a)])
    for n in (0.01, 0.03, 0.05):
        f = thermal_currents(n, 0.0)
        lin = linearized(n, 0.0)
        print(f"n_s={n}: full J_s {f['S'] * 1e18:.12g}  lin {lin[0] * 1e18:.12g}")
    print("site eigen GHz:", [f"{v:.9f}" for v in site_eigen()[:6]])
    k_inf = GA * GS / (GS + GA)
    print(f"K saturation / 2pi MHz = {k_inf / mhz(1):.12g}")
    for gphi_mhz in (0.1, 1.0, 10.0):
        na, ns = driven_na(mhz(gphi_mhz), mhz(1.47))
        j_a = HBAR * WA * GA * na
        print(f"driven gphi={gphi_mhz} MHz: <n_a>={na:.12g} <n_s>={ns:.12g} J_a={j_a * 1e18:.12g} aW")
    gamma, gprime = mhz(2.83), mhz(0.097)
    print(f"r(resonance, Omega->0) = {1 - 2 * gamma / (gamma + gprime):.12g}")


if __name__ == "__main__":
    main()
