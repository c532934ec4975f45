"""Pilot-based SNR sensing: estimator spread, the variance bound and the
bias-corrected attenuation estimate, by Monte Carlo."""

import numpy as np

from leoisac.sense import (
    attenuation_corrected,
    attenuation_naive,
    crb,
    mle_snr_from_stats,
    sample_pilot_statistics,
)

rng = np.random.default_rng(7)
gamma, trials = 10.0, 20_000
print(f"SNR {gamma:g} (linear), {trials} trials per pilot length")
print(f"{'L_p':>6} {'mean':>8} {'MSE':>10} {'3g/L':>10} {'(2g+g^2)/L':>11}")
for e in range(6, 15, 2):
    L = 2**e
    s, q = sample_pilot_statistics(np.full(trials, gamma), L, rng)
    est, _ = mle_snr_from_stats(s, q, L)
    print(f"{L:6d} {est.mean():8.3f} {np.mean((est - gamma) ** 2):10.5f} {crb(gamma, L):10.5f} "
          f"{(2 * gamma + gamma**2) / L:11.5f}")

A, g, L = 2.0, 4.0, 64
s, q = sample_pilot_statistics(np.full(100_000, g), L, rng)
est, _ = mle_snr_from_stats(s, q, L)
print(f"\nattenuation A = {A:g} seen at SNR {g:g} with L_p = {L}:")
print(f"  naive inverse     mean {attenuation_naive(est, g * A).mean():.4f}")
print(f"  bias-corrected    mean {attenuation_corrected(est, g * A, L).mean():.4f}")
