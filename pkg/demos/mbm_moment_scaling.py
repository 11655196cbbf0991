"""Moment scaling of the multifractal Brownian analog.

Simulate the preset at dyadic times, fit log E|X(t)|^q against log t and
compare the slopes with tau(q) = -psi(q). Also shows that the second moment
is exactly linear in t, as for Brownian motion, while the other moments bend.

Run:  python demos/mbm_moment_scaling.py [sigma] [n_paths]
"""
import sys

import numpy as np

from lmfractal import fit_scaling_function, mbm_analog_preset, run_chunked, sample_lmf

sigma = float(sys.argv[1]) if len(sys.argv) > 1 else 0.5
n_paths = int(sys.argv[2]) if len(sys.argv) > 2 else 100_000

model = mbm_analog_preset(sigma)
print(f"levy part:      {model.levy}")
print(f"stationary:     {model.stationary}")
print(f"psi(2) = {model.levy.laplace_exponent(2.0):.3f}  (so E X(t)^2 = t)")

times = 2.0 ** -np.arange(8, -1, -1)
values = run_chunked(lambda rng, m: sample_lmf(model, times, rng, m).path.values,
                     n_paths, 2024, "demo-mbm")

qs = np.array([0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
rep = fit_scaling_function(times, values, qs, reference=lambda q: -model.levy.laplace_exponent(q))

print(f"\n{n_paths} paths, t = 2^-8 .. 1")
print("   q   tau_hat     se   tau(q)  q/2 (Brownian)")
for q, s, se, ref in zip(rep.qs, rep.slopes, rep.ses, rep.reference):
    print(f"{q:4.1f}  {s:8.4f}  {se:6.4f}  {ref:7.4f}  {q / 2:7.4f}")

# the departure from q/2 is the multifractal signature; it vanishes at q = 2
curv = rep.slopes - rep.qs / 2
print("\ntau_hat(q) - q/2:", np.round(curv, 4))
print("E X(t)^2 / t:", np.round(np.mean(values ** 2, axis=0) / times, 3))
