"""Network coding end to end on paper: encode, corrupt, decode.

Shows the XOR mapping, a linear combination with a binary matrix, the
three matrix designs, and both destination decoders.
"""
import numpy as np

from plnc_sim import (decode_joint, decode_with_direct, design_G_mmse,
                      design_G_random, detect_ncs, enumerate_invertible_binary,
                      linear_encode, select_G_mmse, symbol_to_bit, xor_decode,
                      xor_encode)
from plnc_sim.network_coding import design_G_ml_for_channel
from plnc_sim.signal_model import complex_gaussian

rng = np.random.default_rng(5)

print("== XOR mapping ==")
bits = np.array([1, 0])
ncs = xor_encode(bits)
print(f"relay bits {bits} -> xor symbol {ncs:+.0f}")
recovered = xor_decode(np.array([ncs]), np.array([[1.0], [1.0]]), target=0)
print(f"destination recovers user 0 bit: {symbol_to_bit(float(recovered[0]))}")

print("\n== linear combination ==")
G = np.array([[1.0, 1.0], [1.0, 0.0]])
b = np.array([1.0, -1.0])
print(f"user symbols {b}, matrix columns give "
      f"[{linear_encode(G, b, 0):+.0f}, {linear_encode(G, b, 1):+.0f}]")
z = (G.T @ b).astype(complex)
print(f"joint solve recovers {decode_joint(G, z, np.ones(2))}")
est = detect_ncs(G, z, np.ones(2))
print(f"direct-aided (using the other user's direct estimate) recovers "
      f"{[float(decode_with_direct(G, est, b, target=k)) for k in (0, 1)]}")

print("\n== the candidate pool and the three designs ==")
pool = enumerate_invertible_binary(2)
print(f"{len(pool)} invertible binary 2x2 matrices out of 16")

sigma2 = 0.1
h = complex_gaussian(rng, (2, 16))
w = h / (sigma2 + np.sum(np.abs(h) ** 2, axis=1))[:, None]
training = np.where(rng.standard_normal((2, 100)) >= 0, 1.0, -1.0)

g_rand = design_G_random(2, rng)
print(f"random draw:\n{g_rand.entries}")

g_ml = design_G_ml_for_channel(h, w, training, sigma2, rng)
print(f"exhaustive search on a 100-symbol calibration block:\n{g_ml.entries}")

flips = np.array([[0.2, 1e-3], [1e-3, 1e-3]])   # user 0 badly detected at relay 0
g_mmse, scores = select_G_mmse(h, w, sigma2, flip_probs=flips)
print(f"statistics-based pick (knows relay 0 misdetects user 0):\n{g_mmse.entries}")
print(f"predicted chain error per candidate: {scores.round(4)}")

dec = design_G_mmse(h, w, g_mmse, sigma2)
print(f"closed-form decode refinement matrix:\n{dec.entries.round(3)}")
