"""Independent numpy oracle: exact excited-block spectrum vs second-order formulas."""
import numpy as np

def ops():
    sz = np.diag([0.5, -0.5]); sx = np.array([[0, .5], [.5, 0]]); sy = np.array([[0, -.5j], [.5j, 0]])
    r = 1 / np.sqrt(2)
    ez = np.diag([1., 0, -1]); ex = r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    ey = r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]])
    return (sx, sy, sz), (ex, ey, ez)

def excited(wn, wnp, we, A, Ap, D):
    (sx, sy, sz), (ex, ey, ez) = ops()
    I2, I3 = np.eye(2), np.eye(3)
    k = lambda e, a, b: np.kron(np.kron(e, a), b)
    H = -wn * k(I3, sz, I2) - wnp * k(I3, I2, sz) + we * k(ez, I2, I2) + D * k(ez @ ez, I2, I2)
    for s, e in zip((sx, sy, sz), (ex, ey, ez)):
        H = H + A * k(e, s, I2) + Ap * k(e, I2, s)
    return H

def perturbative(wn, we, A, D):
    ap = A**2 / (2 * (-D + we + wn)); am = A**2 / (2 * (D + we + wn)); a0 = ap - am
    eps = {-1: wn - A + 2 * am, 0: wn + 2 * ap, 1: wn + A}
    dl = {-1: -2 * am, 0: -2 * a0, 1: 2 * ap}
    E = []
    for j in (-1, 0, 1):
        E2 = -j * we + abs(j) * D; E3 = E2 - dl[j]; E1 = E3 - eps[j]; E4 = E2 + eps[j]
        E += [E1, E2, E3, E4]
    return np.array(E), ap, am, a0

# Quoted MHz values enter as angular frequencies 2πν (rad/µs).
wn, we, A, D = (2 * np.pi * v for v in (3.7, 9600., 2.5, -296.))
ex = np.linalg.eigvalsh(excited(wn, wn, we, A, A, D))
pt, ap, am, a0 = perturbative(wn, we, A, D)
print("a+ a- a0", ap, am, a0, "ratio", ap / abs(a0))
dev = np.abs(np.sort(ex) - np.sort(pt))
print("max dev", dev.max(), "in |a0| units", dev.max() / abs(a0))
print(np.sort(ex) - np.sort(pt))
