"""Relay buffers and the two-mode slot state machine.

Each slot draws a fresh block-fading channel, computes the SINR table
over the candidate pairs and both hops, then executes the best feasible
action: reception (sources to relays, encode, push) or transmission
(pop, relays to destination, decode).  Infeasible entries are excluded
and selection repeats; an exhausted table idles the slot.

Half duplex is enforced by construction: one action per slot,
system-wide.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import network_coding as nc
from . import receivers as rx
from . import relay_selection as rs
from . import signal_model as sm
from .config import DecoderKind, Hop, PairMode, ReceiverKind, Scheme, SystemConfig


@dataclass
class PairPacket:
    """One buffered transaction: the pair's encoded NCS streams plus the
    bookkeeping needed to decode and score them later."""

    uid: int
    group_id: int
    users: tuple
    relays: tuple
    scheme: Scheme
    encoder: object            # CodingMatrix or None for XOR
    ncs: np.ndarray            # (m, P) real
    true_symbols: np.ndarray   # (m, P) ground truth, never enters the signal path
    created_slot: int


class RelayBuffer:
    """FIFO queue of encoded packets at one relay, capacity J."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("buffer capacity must be >= 1")
        self.capacity = capacity
        self._queue = deque()

    @property
    def occupancy(self):
        return len(self._queue)

    def push(self, packet):
        if self.occupancy >= self.capacity:
            raise RuntimeError("push into a full relay buffer")
        self._queue.append(packet)

    def pop(self):
        if not self._queue:
            raise RuntimeError("pop from an empty relay buffer")
        return self._queue.popleft()

    def peek(self):
        return self._queue[0] if self._queue else None


class BufferBank:
    """The L relay buffers with the paired push/pop discipline: both
    relays of a pair store and release a packet together."""

    def __init__(self, num_relays, capacity):
        self.buffers = [RelayBuffer(capacity) for _ in range(num_relays)]

    def occupancies(self):
        return tuple(b.occupancy for b in self.buffers)

    def can_receive(self, relays):
        return all(self.buffers[r].occupancy < self.buffers[r].capacity
                   for r in relays)

    def can_transmit(self, relays):
        heads = [self.buffers[r].peek() for r in relays]
        if any(h is None for h in heads):
            return False
        # heads must be the same packet so the pair decodes jointly
        return all(h is heads[0] for h in heads)

    def push_pair(self, relays, packet):
        if not self.can_receive(relays):
            raise RuntimeError("pair reception with a full buffer")
        for r in relays:
            self.buffers[r].push(packet)

    def pop_pair(self, relays):
        if not self.can_transmit(relays):
            raise RuntimeError("pair transmission without an aligned packet")
        packet = self.buffers[relays[0]].pop()
        for r in relays[1:]:
            self.buffers[r].pop()
        return packet


def can_receive(bank: BufferBank, relays):
    """True iff every buffer of the pair has occupancy below capacity."""
    return bank.can_receive(relays)


def can_transmit(bank: BufferBank, relays):
    """True iff every buffer of the pair holds the pair's next packet."""
    return bank.can_transmit(relays)


class DestinationBuffer:
    """Direct-link detected symbols awaiting PLNC decoding, one FIFO per
    relay pair so estimates stay aligned with the pair's packets."""

    def __init__(self):
        self._queues = {}

    def push(self, key, direct_symbols):
        self._queues.setdefault(key, deque()).append(direct_symbols)

    def pop(self, key):
        return self._queues[key].popleft()

    def pending(self, key):
        return len(self._queues.get(key, ()))


def decide_action(table: rs.SinrTable, bank: BufferBank):
    """Max-SINR selection with exclusion-based re-selection until a
    feasible entry is found.

    Returns (entry_or_None, n_reselections); None means every entry was
    infeasible and the slot idles.
    """
    excluded = set()
    reselections = 0
    while True:
        entry = rs.select_best(table, excluded)
        if entry is None:
            return None, reselections
        if entry.hop == Hop.RELAY_DEST and bank.can_transmit(entry.relays):
            return entry, reselections
        if entry.hop == Hop.SOURCE_RELAY and bank.can_receive(entry.relays):
            return entry, reselections
        excluded.add(entry.key)
        reselections += 1


@dataclass
class SlotOutcome:
    slot: int
    action: str                 # "receive" | "transmit" | "idle"
    pair_id: int = -1
    relays: tuple = ()
    hop: str = ""
    sinr: float = float("nan")
    occupancy_before: tuple = ()
    occupancy_after: tuple = ()
    reselections: int = 0
    decoded_bits: int = 0
    bit_errors: int = 0
    note: str = ""


TRACE_FIELDS = ("slot", "action", "pair_id", "relays", "hop", "sinr",
                "occupancy_before", "occupancy_after", "reselections",
                "decoded_bits", "bit_errors", "note")


def trace_row(outcome: SlotOutcome):
    return [outcome.slot, outcome.action, outcome.pair_id,
            "|".join(str(r) for r in outcome.relays), outcome.hop,
            f"{outcome.sinr:.6g}" if np.isfinite(outcome.sinr) else "",
            "|".join(str(o) for o in outcome.occupancy_before),
            "|".join(str(o) for o in outcome.occupancy_after),
            outcome.reselections, outcome.decoded_bits, outcome.bit_errors,
            outcome.note]


class SlotMachine:
    """Sequential slot-level simulator for one Monte-Carlo trial.

    With buffers disabled the machine degenerates to fixed two-phase
    relaying: groups are served round-robin and every reception slot is
    immediately followed by the paired transmission slot.
    """

    def __init__(self, config: SystemConfig, rng, collect_trace=False):
        self.config = config
        self.rng = rng
        self.codebook = sm.generate_codebook(config)
        setup_rng = np.random.default_rng([int(config.rng_seed) & 0xFFFFFFFFFFFFFFFF,
                                           0x6E0])
        self.groups = nc.make_group_assignments(config, setup_rng)
        self.relay_group_ids = np.zeros(config.num_relays, dtype=int)
        for g, grp in enumerate(self.groups):
            for r in grp.relays:
                self.relay_group_ids[r] = g
        self.candidates = rs.candidate_pairs(self.groups, config.num_relays,
                                             config.pair_mode)
        self.bank = BufferBank(config.num_relays, config.buffer_size)
        self.dest = DestinationBuffer()
        self.collect_trace = collect_trace
        self.trace = []
        self.slot = 0
        self.bit_errors = 0
        self.bits_decoded = 0
        self.packets_pushed = 0
        self.packets_decoded = 0
        self.idle_slots = 0
        self.receive_slots = 0
        self.transmit_slots = 0
        self._uid = 0
        self._decoded_uids = set()
        self._rr_group = 0       # round-robin pointer (unbuffered / all-pairs)
        self._pending_pair = None

    # -- per-slot physics -------------------------------------------------

    def _group_for_entry(self, entry):
        if self.config.pair_mode == PairMode.FIXED_GROUPS:
            return entry.pair_id
        g = self._rr_group
        self._rr_group = (self._rr_group + 1) % self.config.num_groups
        return g

    def _rd_rows(self, state, relays, group_id):
        """Relay-destination effective vectors on the packet group's
        NCS code (equals state.h_eff_rd rows in fixed-group mode)."""
        code = self.codebook.ncs_codes[group_id]
        return state.h_rd[list(relays)][:, None] * code[None, :]

    def _rd_filters(self, rows, sigma2):
        if self.config.receiver == ReceiverKind.RAKE:
            return rows.copy()
        norms = np.sum(np.abs(rows) ** 2, axis=1)
        return rows / (sigma2 + norms)[:, None]

    def _choose_encoder(self, state, users, relays, filters_sr, rng):
        cfg = self.config
        scheme = cfg.nc_design
        if scheme == Scheme.XOR:
            return None
        if scheme == Scheme.RANDOM:
            return nc.design_G_random(cfg.group_size, rng)
        sigma2 = cfg.noise_var
        rows = state.h_eff_rd[list(relays)]
        filters = self._rd_filters(rows, sigma2)
        if scheme == Scheme.ML:
            training = rx.hard_decision(rng.standard_normal((cfg.group_size,
                                                             cfg.ml_training_len)))
            return nc.design_G_ml_for_channel(rows, filters, training, sigma2, rng)
        if scheme == Scheme.MMSE_DESIGN:
            flips = rx.detection_error_probs(users, relays, state, filters_sr,
                                             sigma2)
            encoder, _ = nc.select_G_mmse(rows, filters, sigma2,
                                          flip_probs=flips)
            return encoder
        raise ValueError(f"unknown scheme {scheme}")

    def _receive(self, state, entry, group_id):
        """First phase: all sources transmit, the selected pair detects
        and buffers its group, the destination stores direct estimates."""
        cfg = self.config
        sigma2 = cfg.noise_var
        group = self.groups[group_id]
        users = list(group.users)
        relays = entry.relays
        m, P = cfg.group_size, cfg.packet_length

        symbols = rx.hard_decision(self.rng.standard_normal((cfg.num_users, P)))
        y_sd, y_sr = sm.synthesize_first_phase(symbols, state, sigma2, self.rng,
                                               relays=relays)

        filters_sr = rx.source_relay_filter_bank(state, sigma2, cfg.receiver)
        detected = np.empty((m, m, P))
        for pos, r in enumerate(relays):
            W = filters_sr[users, r, :]                      # (m, N)
            soft = W.conj() @ y_sr[pos].samples              # (m, P)
            detected[pos] = rx.hard_decision(soft)

        filters_sd = rx.source_dest_filter_bank(state, sigma2, cfg.receiver)
        direct = rx.hard_decision(filters_sd[users].conj() @ y_sd.samples)

        encoder = self._choose_encoder(state, users, relays, filters_sr, self.rng)
        if cfg.nc_design == Scheme.XOR:
            ncs = np.stack([nc.xor_encode(nc.symbol_to_bit(detected[pos]))
                            for pos in range(m)])
        else:
            ncs = nc.encode_ncs(encoder, detected)

        packet = PairPacket(uid=self._uid, group_id=group_id, users=tuple(users),
                            relays=tuple(relays), scheme=cfg.nc_design,
                            encoder=encoder, ncs=ncs,
                            true_symbols=symbols[users, :].copy(),
                            created_slot=self.slot)
        self._uid += 1
        self.bank.push_pair(relays, packet)
        self.dest.push(tuple(relays), direct)
        self.packets_pushed += 1

    def _transmit(self, state, relays):
        """Second phase: pop the pair's oldest packet, send the NCS
        streams, decode at the destination and score against the truth."""
        cfg = self.config
        sigma2 = cfg.noise_var
        packet = self.bank.pop_pair(relays)
        direct = self.dest.pop(tuple(relays))
        m, P = cfg.group_size, cfg.packet_length
        rows = self._rd_rows(state, packet.relays, packet.group_id)

        if packet.scheme == Scheme.XOR:
            # both relays carry the same code and (nominally) the same
            # symbol: the streams superpose on the combined channel
            y = sm.synthesize_second_phase(packet.ncs, state, packet.relays,
                                           sigma2, self.rng, h_eff=rows)
            combined = rows.sum(axis=0)
            note = ""
            if np.vdot(combined, combined).real < 1e-30:
                combined = self.codebook.ncs_codes[packet.group_id].astype(complex)
                note = "degenerate combined channel"
            w = self._rd_filters(combined[None, :], sigma2)[0]
            ncs_hat = rx.hard_decision(np.conj(w) @ y.samples)
            decoded = np.stack([nc.xor_decode(ncs_hat, direct, k) for k in range(m)])
        else:
            # one sub-slot per relay stream, independent noise each
            filters = self._rd_filters(rows, sigma2)
            gains = rx.effective_gains(filters, rows)
            z = np.empty((m, P), dtype=np.complex128)
            for pos in range(m):
                y = sm.synthesize_second_phase(packet.ncs[pos:pos + 1], state,
                                               packet.relays[pos:pos + 1],
                                               sigma2, self.rng,
                                               h_eff=rows[pos:pos + 1])
                z[pos] = np.conj(filters[pos]) @ y.samples
            decoder = None
            if packet.scheme == Scheme.MMSE_DESIGN:
                decoder = nc.design_G_mmse(rows, filters, packet.encoder, sigma2)
            if cfg.decoder == DecoderKind.JOINT:
                decoded = nc.decode_joint(packet.encoder, z, gains, decoder)
            else:
                ncs_est = nc.detect_ncs(packet.encoder, z, gains, decoder)
                decoded = np.stack([nc.decode_with_direct(packet.encoder, ncs_est,
                                                          direct, k)
                                    for k in range(m)])
            note = "mmse fallback" if decoder is not None and decoder.fallback else ""

        if packet.uid in self._decoded_uids:
            raise RuntimeError("packet scored twice")
        self._decoded_uids.add(packet.uid)
        errors = int(np.sum(decoded != packet.true_symbols))
        bits = m * P
        self.bit_errors += errors
        self.bits_decoded += bits
        self.packets_decoded += 1
        return errors, bits, note

    # -- slot drivers ------------------------------------------------------

    def advance(self) -> SlotOutcome:
        outcome = (self._advance_buffered() if self.config.buffers_enabled
                   else self._advance_unbuffered())
        self.slot += 1
        if self.collect_trace:
            self.trace.append(outcome)
        return outcome

    def _advance_buffered(self):
        cfg = self.config
        sigma2 = cfg.noise_var
        state = sm.draw_channel(cfg, self.codebook, self.relay_group_ids, self.rng)
        filters_sr = rx.source_relay_filter_bank(state, sigma2, cfg.receiver)
        filters_rd = rx.relay_dest_filter_bank(state, sigma2, cfg.receiver)
        table = rs.build_sinr_table(state, filters_sr, filters_rd, sigma2,
                                    self.candidates)
        occ_before = self.bank.occupancies()
        entry, reselections = decide_action(table, self.bank)
        if entry is None:
            self.idle_slots += 1
            return SlotOutcome(slot=self.slot, action="idle",
                               occupancy_before=occ_before,
                               occupancy_after=occ_before,
                               reselections=reselections)
        if entry.hop == Hop.SOURCE_RELAY:
            group_id = self._group_for_entry(entry)
            self._receive(state, entry, group_id)
            self.receive_slots += 1
            return SlotOutcome(slot=self.slot, action="receive",
                               pair_id=entry.pair_id, relays=entry.relays,
                               hop=entry.hop.value, sinr=entry.sinr,
                               occupancy_before=occ_before,
                               occupancy_after=self.bank.occupancies(),
                               reselections=reselections)
        errors, bits, note = self._transmit(state, entry.relays)
        self.transmit_slots += 1
        return SlotOutcome(slot=self.slot, action="transmit",
                           pair_id=entry.pair_id, relays=entry.relays,
                           hop=entry.hop.value, sinr=entry.sinr,
                           occupancy_before=occ_before,
                           occupancy_after=self.bank.occupancies(),
                           reselections=reselections, decoded_bits=bits,
                           bit_errors=errors, note=note)

    def _advance_unbuffered(self):
        cfg = self.config
        state = sm.draw_channel(cfg, self.codebook, self.relay_group_ids, self.rng)
        occ_before = self.bank.occupancies()
        if self._pending_pair is None:
            group_id = self._rr_group
            self._rr_group = (self._rr_group + 1) % cfg.num_groups
            relays = self.groups[group_id].relays
            entry = rs.SinrEntry(pair_id=group_id, relays=relays,
                                 hop=Hop.SOURCE_RELAY, sinr=0.0)
            self._receive(state, entry, group_id)
            self._pending_pair = relays
            self.receive_slots += 1
            return SlotOutcome(slot=self.slot, action="receive",
                               pair_id=group_id, relays=relays,
                               hop=Hop.SOURCE_RELAY.value,
                               occupancy_before=occ_before,
                               occupancy_after=self.bank.occupancies())
        relays = self._pending_pair
        self._pending_pair = None
        errors, bits, note = self._transmit(state, relays)
        self.transmit_slots += 1
        return SlotOutcome(slot=self.slot, action="transmit",
                           relays=relays, hop=Hop.RELAY_DEST.value,
                           occupancy_before=occ_before,
                           occupancy_after=self.bank.occupancies(),
                           decoded_bits=bits, bit_errors=errors, note=note)

    def run_until(self, n_packets, max_slots=None):
        """Advance slots until n_packets have been decoded (with a
        generous slot cap so pathological configs cannot spin forever)."""
        if max_slots is None:
            max_slots = 16 * n_packets + 64
        while self.packets_decoded < n_packets and self.slot < max_slots:
            self.advance()
        if self.packets_decoded > self.packets_pushed:
            raise RuntimeError("decoded more packets than were pushed")
        return self
