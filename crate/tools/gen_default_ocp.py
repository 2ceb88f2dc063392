"""Regenerates the default half-cell OCP tables shipped in crates/core/data.

Graphite: Chen et al. (2020) LG M50 anode fit, evaluated on [0, 1].
NMC: Chen et al. (2020) NMC811 cathode fit, evaluated on x = 0.25 + 0.70 * y
so that y in [0, 1] spans the cathode's cycling window.

These are generic defaults, not measurements of any specific cell.
"""
import numpy as np

N = 201


def graphite(x):
    return (1.9793 * np.exp(-39.3631 * x) + 0.2482
            - 0.0909 * np.tanh(29.8538 * (x - 0.1234))
            - 0.04478 * np.tanh(14.9159 * (x - 0.2769))
            - 0.0205 * np.tanh(30.4444 * (x - 0.6103)))


def nmc(y):
    x = 0.25 + 0.70 * y
    return (-0.8090 * x + 4.4875
            - 0.0428 * np.tanh(18.5138 * (x - 0.5542))
            - 17.7326 * np.tanh(15.7890 * (x - 0.3117))
            + 17.5842 * np.tanh(15.9308 * (x - 0.3120)))


def write(path, f):
    s = np.linspace(0.0, 1.0, N)
    u = f(s)
    assert np.all(np.diff(u) < 0)
    with open(path, "w") as fh:
        fh.write("stoichiometry,potential_v\n")
        for a, b in zip(s, u):
            fh.write(f"{a:.6f},{float(b)!r}\n")


write("crates/core/data/graphite_default.csv", graphite)
write("crates/core/data/nmc_default.csv", nmc)
