"""XOR and linear physical-layer network coding.

Covers the bit/symbol mappings, NCS generation at the relays, the three
coding-matrix designs (random binary, exhaustive search, closed-form
MMSE) and both destination decoders (joint system solve and
direct-link-aided cancellation).

Matrix convention: entry [k, l] of an encoder weights user k of the
group in the combination transmitted by relay l, so the stacked NCS
vector is G^T b for user symbols b.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.special import erfc

from .config import Role, Scheme
from .receivers import hard_decision
from .signal_model import complex_gaussian


def _qfunc(x):
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2.0))


@dataclass(frozen=True)
class GroupAssignment:
    """One sub transmission group: m users served by m relays."""

    users: tuple
    relays: tuple

    def __post_init__(self):
        if len(set(self.users)) != len(self.users):
            raise ValueError("duplicate user index in group")
        if len(set(self.relays)) != len(self.relays):
            raise ValueError("duplicate relay index in group")


def make_group_assignments(config, rng):
    """Randomly partition users and relays into groups of m."""
    m = config.group_size
    users = rng.permutation(config.num_users)
    relays = rng.permutation(config.num_relays)
    return [GroupAssignment(users=tuple(int(u) for u in users[g * m:(g + 1) * m]),
                            relays=tuple(int(r) for r in relays[g * m:(g + 1) * m]))
            for g in range(config.num_groups)]


@dataclass
class CodingMatrix:
    """m x m coding matrix with its provenance.

    Encoders are binary {0,1} and invertible over the reals; decoders
    (the MMSE refinement matrix) are unconstrained complex/real.
    """

    entries: np.ndarray
    design: Scheme
    role: Role
    fallback: bool = False   # MMSE decoder fell back to plain inversion

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.complex128 if
                                  self.role == Role.DECODER else np.float64)
        if self.role == Role.ENCODER:
            if not np.all(np.isin(self.entries, (0.0, 1.0))):
                raise ValueError("encoder entries must be binary {0,1}")
            if abs(np.linalg.det(self.entries)) <= 1e-9:
                raise ValueError("encoder matrix must be invertible")
        elif not np.all(np.isfinite(self.entries)):
            raise ValueError("decoder entries must be finite")


def bit_to_symbol(c):
    """BPSK map b = 1 - 2c."""
    return 1.0 - 2.0 * np.asarray(c, dtype=np.float64) if np.ndim(c) else 1.0 - 2.0 * c


def symbol_to_bit(b):
    """Inverse map c = (1 - b) / 2."""
    arr = (1.0 - np.asarray(b, dtype=np.float64)) / 2.0
    return arr.astype(np.int64) if arr.ndim else int(arr)


def xor_encode(bits):
    """Modulo-2 sum of the detected bits at one relay, mapped to +-1.

    bits has shape (m,) or (m, P); the reduction runs over axis 0.
    """
    arr = np.asarray(bits, dtype=np.int64)
    return bit_to_symbol(np.bitwise_xor.reduce(arr, axis=0))


def linear_encode(G, detected_symbols, relay_pos):
    """Column relay_pos of G applied to one relay's detected symbols."""
    g = G.entries if isinstance(G, CodingMatrix) else np.asarray(G, dtype=np.float64)
    b = np.asarray(detected_symbols, dtype=np.float64)
    return np.tensordot(g[:, relay_pos], b, axes=(0, 0))


def encode_ncs(G, detected_by_relay):
    """NCS packet for the whole pair: relay l combines its own
    detections with column l.  detected_by_relay is (m, m, P) indexed
    [relay, user, symbol]; returns (m, P)."""
    g = G.entries if isinstance(G, CodingMatrix) else np.asarray(G, dtype=np.float64)
    det = np.asarray(detected_by_relay, dtype=np.float64)
    return np.einsum("kl,lkp->lp", g, det)


@lru_cache(maxsize=None)
def enumerate_invertible_binary(m):
    """All invertible m x m binary matrices in a fixed lexicographic
    order of their flattened entries (6 matrices for m = 2)."""
    out = []
    for bits in product((0.0, 1.0), repeat=m * m):
        cand = np.array(bits).reshape(m, m)
        if abs(np.linalg.det(cand)) > 1e-9:
            cand.setflags(write=False)
            out.append(cand)
    return tuple(out)


def design_G_random(m, rng) -> CodingMatrix:
    """Uniform draw over the invertible binary matrices by rejection."""
    while True:
        cand = rng.integers(0, 2, size=(m, m)).astype(np.float64)
        if abs(np.linalg.det(cand)) > 1e-9:
            return CodingMatrix(entries=cand, design=Scheme.RANDOM, role=Role.ENCODER)


# ---------------------------------------------------------------------------
# exhaustive (training-based) design
# ---------------------------------------------------------------------------

def ml_calibration_outputs(h_eff_pair, filters_pair, training_symbols,
                           sigma2, rng):
    """Filter outputs a calibration block would produce under each
    candidate encoder.

    The known training symbols are encoded with every candidate and
    sent through the current pair channel; the same noise draw is
    shared by all candidates so the comparison is deterministic given
    the stream.  Returns (gains, outputs) with outputs shaped
    (n_candidates, m, T).
    """
    training = np.asarray(training_symbols, dtype=np.float64)
    if training.ndim != 2 or training.shape[1] == 0:
        raise ValueError("calibration block must be a non-empty (m, T) array")
    m, T = training.shape
    gains = np.sum(np.asarray(filters_pair).conj() * np.asarray(h_eff_pair), axis=1)
    noise_power = sigma2 * np.sum(np.abs(np.asarray(filters_pair)) ** 2, axis=1)
    eta = complex_gaussian(rng, (m, T)) * np.sqrt(noise_power)[:, None]
    candidates = enumerate_invertible_binary(m)
    outputs = np.empty((len(candidates), m, T), dtype=np.complex128)
    for j, cand in enumerate(candidates):
        ncs = cand.T @ training
        outputs[j] = gains[:, None] * ncs + eta
    return gains, outputs


def argmin_with_ties(costs, rtol=1e-9, atol=1e-12):
    """Lowest index among all costs tied with the minimum.

    Candidates whose costs agree up to floating-point evaluation order
    (permutation encoders produce mathematically identical costs) must
    resolve deterministically, so anything within tolerance of the
    minimum counts as tied.
    """
    costs = np.asarray(costs, dtype=np.float64)
    low = costs.min()
    return int(np.flatnonzero(costs <= low + atol + rtol * abs(low))[0])


def design_G_ml(outputs_by_candidate, gains, training_symbols):
    """Exhaustive search over the invertible binary candidates.

    Each candidate decodes its own calibration outputs and is scored
    by the squared distance between the recovered and the known
    training symbols, summed over the block; ties break to the lowest
    candidate index.  Returns (matrix, per-candidate costs).
    """
    training = np.asarray(training_symbols, dtype=np.float64)
    if training.ndim != 2 or training.shape[1] == 0:
        raise ValueError("calibration block must be a non-empty (m, T) array")
    m = training.shape[0]
    candidates = enumerate_invertible_binary(m)
    z = np.asarray(outputs_by_candidate)
    if z.shape[0] != len(candidates):
        raise ValueError(f"expected outputs for {len(candidates)} candidates")
    costs = np.empty(len(candidates))
    norm = z / np.asarray(gains)[None, :, None]
    for j, cand in enumerate(candidates):
        recovered = np.linalg.solve(cand.T, norm[j])
        costs[j] = np.sum(np.abs(training - recovered) ** 2)
    best = argmin_with_ties(costs)
    G = CodingMatrix(entries=candidates[best].copy(), design=Scheme.ML,
                     role=Role.ENCODER)
    return G, costs


def design_G_ml_for_channel(h_eff_pair, filters_pair, training_symbols,
                            sigma2, rng) -> CodingMatrix:
    """Convenience wrapper: simulate the calibration block, then search."""
    gains, outputs = ml_calibration_outputs(h_eff_pair, filters_pair,
                                            training_symbols, sigma2, rng)
    G, _ = design_G_ml(outputs, gains, training_symbols)
    return G


# ---------------------------------------------------------------------------
# closed-form MMSE design
# ---------------------------------------------------------------------------

def _second_order_stats(G, h_eff_pair, filters_pair, sigma2,
                        symbol_variances=None, literal_cross_terms=False):
    """Model second-order statistics of (true NCS, filter outputs).

    With z_j = w_j^H (h_j b_j + n_j) and independent noise across the
    relay sub-slots:
        P_ab[k, j] = E[b_k conj(z_j)] = C[k, j] conj(mu_j)
        R_b[j, i]  = mu_j conj(mu_i) C[j, i] + delta_ji sigma2 ||w_j||^2
    where C = G^T diag(user symbol variances) G is the NCS correlation
    induced by the shared user symbols and mu_j = w_j^H h_j.

    literal_cross_terms reproduces the squared-entry variant of the
    cross-correlation sum for comparison runs.
    """
    g = G.entries if isinstance(G, CodingMatrix) else np.asarray(G, dtype=np.float64)
    m = g.shape[0]
    sig = np.ones(m) if symbol_variances is None else np.asarray(symbol_variances, float)
    mu = np.sum(np.asarray(filters_pair).conj() * np.asarray(h_eff_pair), axis=1)
    wnorm2 = np.sum(np.abs(np.asarray(filters_pair)) ** 2, axis=1)
    if literal_cross_terms:
        col_weight = (g * g * sig[:, None]).sum(axis=0)
        C = np.tile(col_weight[:, None], (1, m))
    else:
        C = g.T @ (sig[:, None] * g)
    P_ab = C * mu.conj()[None, :]
    R_b = (mu[:, None] * mu.conj()[None, :]) * C + sigma2 * np.diag(wnorm2)
    return mu, C, P_ab, R_b


def design_G_mmse(h_eff_pair, filters_pair, encoder, sigma2,
                  symbol_variances=None, literal_cross_terms=False) -> CodingMatrix:
    """Closed-form MMSE refinement matrix P_ab R_b^-1 for the NCS
    estimate at the destination; used in place of plain inversion.

    Falls back to plain gain normalization (diag(1/mu)) with the
    fallback flag set if R_b is numerically singular.
    """
    mu, _, P_ab, R_b = _second_order_stats(G=encoder, h_eff_pair=h_eff_pair,
                                           filters_pair=filters_pair, sigma2=sigma2,
                                           symbol_variances=symbol_variances,
                                           literal_cross_terms=literal_cross_terms)
    try:
        if np.linalg.cond(R_b) > 1e12:
            raise np.linalg.LinAlgError("ill conditioned")
        entries = np.linalg.solve(R_b.conj().T, P_ab.conj().T).conj().T
        fallback = False
    except np.linalg.LinAlgError:
        entries = np.diag(1.0 / mu)
        fallback = True
    return CodingMatrix(entries=entries, design=Scheme.MMSE_DESIGN,
                        role=Role.DECODER, fallback=fallback)


def predicted_user_mse(encoder, h_eff_pair, filters_pair, sigma2,
                       symbol_variances=None):
    """Closed-form end-to-end MSE on the user symbols for one encoder
    candidate when its MMSE refinement is followed by the system solve.

    With x = T Gt z, T = (G^T)^-1, Gt = P_ab R_b^-1:
        E||b - x||^2 = m - 2 Re tr(T Gt D G^T) + tr(T Gt R_b Gt^H T^H)
    where D = diag(mu).
    """
    g = encoder.entries if isinstance(encoder, CodingMatrix) else np.asarray(encoder, float)
    m = g.shape[0]
    mu, _, P_ab, R_b = _second_order_stats(g, h_eff_pair, filters_pair, sigma2,
                                           symbol_variances)
    Gt = np.linalg.solve(R_b.conj().T, P_ab.conj().T).conj().T
    T = np.linalg.inv(g.T)
    TG = T @ Gt
    cross = np.trace(TG @ (mu[:, None] * g.T)).real
    quad = np.trace(TG @ R_b @ TG.conj().T).real
    return float(m - 2.0 * cross + quad)


@lru_cache(maxsize=None)
def _flip_masks(m):
    """All 2^(m*m) relay-detection error patterns, shape (n, m, m)
    indexed [pattern, user, relay]."""
    return np.array(list(product((0, 1), repeat=m * m)),
                    dtype=np.float64).reshape(-1, m, m)


@lru_cache(maxsize=None)
def _data_patterns(m):
    """All 2^m user symbol patterns, shape (m, n)."""
    return np.array(list(product((-1.0, 1.0), repeat=m))).T


def predicted_chain_error(encoder, h_eff_pair, filters_pair, sigma2,
                          flip_probs=None, symbol_variances=None):
    """Closed-form error probability of the full decode chain for one
    encoder candidate.

    Averages the per-user slicer error over all data patterns and all
    relay-detection error patterns, the latter weighted by the given
    per-(user, relay) detection error probabilities.  This is what lets
    the statistics-based design account for interference and noise on
    both hops, which a pilot-calibrated search cannot see.
    """
    g = encoder.entries if isinstance(encoder, CodingMatrix) else np.asarray(encoder, float)
    m = g.shape[0]
    p = np.zeros((m, m)) if flip_probs is None else np.asarray(flip_probs, float)
    mu = np.sum(np.asarray(filters_pair).conj() * np.asarray(h_eff_pair), axis=1)
    noise_var = sigma2 * np.sum(np.abs(np.asarray(filters_pair)) ** 2, axis=1)
    decoder = design_G_mmse(h_eff_pair, filters_pair, g, sigma2,
                            symbol_variances=symbol_variances)
    A = np.linalg.inv(g.T).astype(np.complex128) @ decoder.entries
    per_user_noise = (np.abs(A) ** 2 @ noise_var).real
    sigma_real = np.sqrt(np.maximum(per_user_noise / 2.0, 1e-300))

    masks = _flip_masks(m)                      # (n_masks, m, m)
    weights = np.prod(np.where(masks > 0, p[None], 1.0 - p[None]), axis=(1, 2))
    B = _data_patterns(m)                       # (m, n_pat)
    signs = 1.0 - 2.0 * masks                   # detection flip multipliers
    detected = B[None, :, None, :] * signs[:, :, :, None]   # (n_masks, m_u, m_r, n_pat)
    ncs = np.einsum("kl,nklp->nlp", g, detected)            # (n_masks, m, n_pat)
    mean = np.einsum("ul,nlp->nup", A @ np.diag(mu), ncs).real
    err = _qfunc(B[None, :, :] * mean / sigma_real[None, :, None])
    return float(np.einsum("n,nup->", weights, err) / (m * B.shape[1]))


def select_G_mmse(h_eff_pair, filters_pair, sigma2, symbol_variances=None,
                  flip_probs=None):
    """Pick the binary encoder minimizing the predicted end-to-end error
    of the refined decode chain; ties break to the lowest candidate
    index."""
    m = np.asarray(h_eff_pair).shape[0]
    candidates = enumerate_invertible_binary(m)
    scores = np.array([predicted_chain_error(cand, h_eff_pair, filters_pair,
                                             sigma2, flip_probs,
                                             symbol_variances)
                       for cand in candidates])
    best = argmin_with_ties(scores)
    G = CodingMatrix(entries=candidates[best].copy(), design=Scheme.MMSE_DESIGN,
                     role=Role.ENCODER)
    return G, scores


# ---------------------------------------------------------------------------
# destination decoding
# ---------------------------------------------------------------------------

def decode_joint(encoder, filter_outputs, gains, decoder=None):
    """Recover the m user symbols from the m relay-stream filter outputs.

    Without a decoder matrix the outputs are gain-normalized and the
    G^T-structured system is solved directly; with an MMSE decoder the
    refinement is applied first.  filter_outputs has shape (m,) or
    (m, P).
    """
    g = encoder.entries if isinstance(encoder, CodingMatrix) else np.asarray(encoder, float)
    z = np.asarray(filter_outputs, dtype=np.complex128)
    flat = z.ndim == 1
    z = z[:, None] if flat else z
    if decoder is not None:
        d = decoder.entries if isinstance(decoder, CodingMatrix) else np.asarray(decoder)
        refined = d @ z
    else:
        refined = z / np.asarray(gains)[:, None]
    symbols = hard_decision(np.linalg.solve(g.T.astype(np.complex128), refined))
    return symbols[:, 0] if flat else symbols


def ncs_levels(G, relay_pos):
    """Admissible noiseless NCS values for one relay's combination."""
    g = G.entries if isinstance(G, CodingMatrix) else np.asarray(G, dtype=np.float64)
    m = g.shape[0]
    vals = sorted({float(g[:, relay_pos] @ np.array(pattern))
                   for pattern in product((-1.0, 1.0), repeat=m)})
    return np.array(vals)


def slice_to_levels(x, levels):
    """Nearest admissible value; ties go to the lower level."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    idx = np.argmin(np.abs(arr[..., None] - levels[None, :]), axis=-1)
    out = levels[idx]
    return out if np.ndim(x) else float(out[0])


def detect_ncs(encoder, filter_outputs, gains, decoder=None):
    """Per-relay discrete NCS estimates: gain-normalize (or MMSE-refine),
    then slice each stream to its admissible level set."""
    g = encoder.entries if isinstance(encoder, CodingMatrix) else np.asarray(encoder, float)
    z = np.asarray(filter_outputs, dtype=np.complex128)
    flat = z.ndim == 1
    z = z[:, None] if flat else z
    if decoder is not None:
        d = decoder.entries if isinstance(decoder, CodingMatrix) else np.asarray(decoder)
        soft = (d @ z).real
    else:
        soft = (z / np.asarray(gains)[:, None]).real
    est = np.empty_like(soft)
    for l in range(g.shape[1]):
        est[l] = slice_to_levels(soft[l], ncs_levels(g, l))
    return est[:, 0] if flat else est


def decode_with_direct(encoder, ncs_estimates, direct_estimates, target,
                       relay_pos=None):
    """Cancel the other users of the group via their stored direct-link
    estimates, then divide by the target's coefficient and slice.

    ncs_estimates and direct_estimates have shape (m,) or (m, P).  If
    the chosen relay's coefficient for the target user is zero, another
    relay of the pair with a nonzero coefficient is used instead.
    """
    g = encoder.entries if isinstance(encoder, CodingMatrix) else np.asarray(encoder, float)
    m = g.shape[0]
    if relay_pos is None or g[target, relay_pos] == 0.0:
        usable = np.flatnonzero(g[target, :])
        if usable.size == 0:
            raise ValueError("no relay carries the target user (singular encoder)")
        relay_pos = int(usable[0])
    ncs = np.asarray(ncs_estimates, dtype=np.float64)
    direct = np.asarray(direct_estimates, dtype=np.float64)
    others = [j for j in range(m) if j != target]
    cancelled = ncs[relay_pos] - sum(g[j, relay_pos] * direct[j] for j in others)
    return hard_decision(cancelled / g[target, relay_pos])


def xor_decode(ncs_symbol, direct_symbols, target):
    """Target bit = NCS bit xor the other users' direct-link bits."""
    ncs_bits = symbol_to_bit(np.asarray(ncs_symbol, dtype=np.float64))
    direct_bits = symbol_to_bit(np.asarray(direct_symbols, dtype=np.float64))
    m = direct_bits.shape[0]
    acc = np.asarray(ncs_bits, dtype=np.int64)
    for j in range(m):
        if j != target:
            acc = np.bitwise_xor(acc, direct_bits[j])
    return bit_to_symbol(acc)
