"""RAKE and linear MMSE receive filters plus the BPSK slicer."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .config import ReceiverKind


@dataclass
class ReceiveFilter:
    weights: np.ndarray          # (N,) complex
    kind: ReceiverKind
    target: tuple = ()           # link identity, e.g. ("sr", user, relay)

    def __post_init__(self):
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("filter weights must be finite")


def rake_filter(h_eff, target=()) -> ReceiveFilter:
    """Matched filter: weights equal the effective signature vector."""
    h = np.asarray(h_eff, dtype=np.complex128)
    if not np.any(h):
        raise ValueError("degenerate channel: effective vector is zero")
    return ReceiveFilter(weights=h.copy(), kind=ReceiverKind.RAKE, target=target)


def mmse_filter(all_h_eff, target_index, sigma2, target=()) -> ReceiveFilter:
    """Linear MMSE filter (sum_k h_k h_k^H + sigma2 I)^-1 h_target.

    all_h_eff holds the effective vectors of every stream present on
    this hop, one per row.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    H = np.atleast_2d(np.asarray(all_h_eff, dtype=np.complex128))
    n = H.shape[1]
    cov = H.T @ H.conj() + sigma2 * np.eye(n)
    cov = 0.5 * (cov + cov.conj().T)
    try:
        factor = cho_factor(cov, lower=True)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("hop covariance is not positive definite") from exc
    w = cho_solve(factor, H[target_index])
    return ReceiveFilter(weights=w, kind=ReceiverKind.MMSE, target=target)


def filter_output(filt, received):
    """Inner product w^H y; y may be a single (N,) symbol or an (N, P)
    packet, giving a scalar or a length-P vector."""
    w = filt.weights if isinstance(filt, ReceiveFilter) else np.asarray(filt)
    y = received.samples if hasattr(received, "samples") else np.asarray(received)
    if w.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: filter {w.shape[0]}, signal {y.shape[0]}")
    return np.tensordot(w.conj(), y, axes=(0, 0))


def hard_decision(soft):
    """BPSK slicer: +1 when Re(x) >= 0 else -1 (ties resolve to +1)."""
    arr = np.asarray(soft)
    out = np.where(arr.real >= 0.0, 1.0, -1.0)
    return float(out) if out.ndim == 0 else out


def _mmse_bank(H, sigma2):
    """Solve (H^T conj(H) + sigma2 I) W = H^T for all rows of H at once.

    H is (S, N): one effective vector per stream sharing the hop.
    Returns (S, N) filters.
    """
    n = H.shape[1]
    cov = H.T @ H.conj() + sigma2 * np.eye(n)
    cov = 0.5 * (cov + cov.conj().T)
    factor = cho_factor(cov, lower=True)
    return cho_solve(factor, H.T).T


def source_relay_filter_bank(state, sigma2, kind: ReceiverKind):
    """Filters for every (user, relay) link of the first hop, (K, L, N).

    The MMSE covariance at a relay sums over all K users observed
    there, so one factorization per relay serves all its users.
    """
    K, L, N = state.h_eff_sr.shape
    if kind == ReceiverKind.RAKE:
        return state.h_eff_sr.copy()
    W = np.empty((K, L, N), dtype=np.complex128)
    for l in range(L):
        W[:, l, :] = _mmse_bank(state.h_eff_sr[:, l, :], sigma2)
    return W


def source_dest_filter_bank(state, sigma2, kind: ReceiverKind):
    """Direct-link filters for every user at the destination, (K, N)."""
    if kind == ReceiverKind.RAKE:
        return state.h_eff_sd.copy()
    return _mmse_bank(state.h_eff_sd, sigma2)


def relay_dest_filter_bank(state, sigma2, kind: ReceiverKind):
    """Second-hop filters, one per relay NCS stream, (L, N).

    The protocol schedules one relay stream per sub-slot, so each MMSE
    covariance contains that stream plus noise only.
    """
    L, N = state.h_eff_rd.shape
    if kind == ReceiverKind.RAKE:
        return state.h_eff_rd.copy()
    W = np.empty((L, N), dtype=np.complex128)
    for l in range(L):
        h = state.h_eff_rd[l]
        # rank-one covariance: (h h^H + s I)^-1 h = h / (s + ||h||^2)
        W[l] = h / (sigma2 + np.vdot(h, h).real)
    return W


def effective_gains(filters, h_eff):
    """w^H h for matching rows of two (S, N) arrays -> (S,) complex."""
    return np.sum(filters.conj() * h_eff, axis=-1)


def detection_error_probs(users, relays, state, filters_sr, sigma2):
    """Per-(user, relay) BPSK detection error probability at the relays,
    from the post-filter SINR with residual interference treated as
    Gaussian.  Returns an (m_users, m_relays) matrix."""
    from scipy.special import erfc
    out = np.empty((len(users), len(relays)))
    for col, r in enumerate(relays):
        cross = filters_sr[users, r, :].conj() @ state.h_eff_sr[:, r, :].T
        power = np.abs(cross) ** 2                       # (m, K)
        noise = sigma2 * np.sum(np.abs(filters_sr[users, r, :]) ** 2, axis=1)
        for row, k in enumerate(users):
            signal = power[row, k]
            interference = power[row].sum() - signal
            gamma = signal / (interference + noise[row])
            out[row, col] = 0.5 * erfc(np.sqrt(gamma))
    return out
