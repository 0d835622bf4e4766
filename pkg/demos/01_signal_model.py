"""Walkthrough of the chip-rate signal model.

Builds the codebook and a fading realization for the default scenario,
then synthesizes both transmission phases and checks the received
energy against the link budget.
"""
import numpy as np

from plnc_sim import (SystemConfig, draw_channel, generate_codebook,
                      synthesize_first_phase, synthesize_second_phase)

cfg = SystemConfig(snr_db=10.0, rng_seed=1)
print(f"scenario: K={cfg.num_users} users, L={cfg.num_relays} relays, "
      f"N={cfg.spreading_gain} chips/symbol, sigma2={cfg.noise_var:.3f}")

book = generate_codebook(cfg)
print(f"codebook: {book.codes.shape[0]} user codes + "
      f"{book.ncs_codes.shape[0]} group codes, all unit norm "
      f"(max deviation {abs(np.linalg.norm(book.codes, axis=1) - 1).max():.1e})")

rng = np.random.default_rng(2)
state = draw_channel(cfg, book, [0, 0, 1, 1, 2, 2], rng)
print(f"fading draw: |h_sd| = {np.abs(state.h_sd).round(2)}")

# one packet of BPSK symbols for everyone
P = 2000
symbols = np.where(rng.standard_normal((cfg.num_users, P)) >= 0, 1.0, -1.0)
y_sd, y_sr = synthesize_first_phase(symbols, state, cfg.noise_var, rng,
                                    relays=[0, 1])
print(f"first phase: destination sees {y_sd.samples.shape}, "
      f"relays 0/1 see {y_sr[0].samples.shape}")

# received energy must match the sum of link gains (unit-norm codes)
measured = np.mean(np.sum(np.abs(y_sd.samples) ** 2, axis=0))
expected = np.sum(np.abs(state.h_sd) ** 2) + cfg.spreading_gain * cfg.noise_var
print(f"destination energy/symbol: measured {measured:.3f}, "
      f"budget {expected:.3f}")

# second phase: the pair's network-coded symbols ride the group code
ncs = np.array([[1.0], [-1.0]])
y_rd = synthesize_second_phase(ncs, state, [0, 1], cfg.noise_var, rng)
print(f"second phase: superposed pair transmission -> {y_rd.samples.shape}")
