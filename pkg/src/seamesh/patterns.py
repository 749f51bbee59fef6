"""Transmission-pattern enumeration and sampling.

A pattern is a set of directed links transmitting simultaneously with
chosen power levels. Feasibility requires node-disjoint links (single
radio, which also enforces half-duplex) and per-link SINR above the
admission threshold under full in-pattern interference.

Both feasibility conditions are hereditary downward: removing a link never
breaks node-disjointness and never lowers anyone's SINR. Enumeration
exploits this with depth-first extension and prefix pruning, which is
exact, not heuristic.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .channel import capacity_bps, gain_matrix, pathloss_db


@dataclass(frozen=True)
class TransmissionPattern:
    id: int
    active: tuple  # ((link_id, power_w), ...) sorted by link id
    cap_bps: dict  # link id -> bits/s under in-pattern interference
    power_w: float  # radiated + circuit total

    def link_ids(self):
        return tuple(l for l, _ in self.active)


def _admitted_sinr(gain, noise_w, thr_linear, tx, rx, power):
    """Linear SINR per active link, or None if any link falls below the
    admission threshold."""
    out = np.empty(len(tx))
    kern.pattern_sinr(gain, noise_w, tx, rx, power, out)
    if np.all(out >= thr_linear):
        return out
    return None


def _finish(radio, active, sinr):
    caps = {l: float(capacity_bps(sv, radio.bandwidth_hz))
            for (l, _), sv in zip(active, sinr)}
    total = sum(p for _, p in active) + radio.circuit_power_w * len(active)
    return active, caps, total


def enumerate_patterns(s, links, max_links=14):
    """Every feasible pattern over ``links``, canonically ordered.

    Exhaustive: link subsets cross power assignments from the nonzero
    levels. Guarded by max_links because the search space is exponential;
    larger link sets go through sample_patterns.
    """
    if len(links) > max_links:
        raise ValueError(
            f"{len(links)} links exceeds the exhaustive cap {max_links}; "
            "use sample_patterns")
    radio = s.radio
    gain = gain_matrix(s.positions(), radio)
    noise = radio.noise_power_w()
    thr = 10.0 ** (radio.sinr_min_db / 10.0)
    levels = radio.nonzero_power_levels()
    by_id = {l.id: l for l in links}
    ids = sorted(by_id)

    found = []

    def extend(active, used_nodes, start):
        k = len(active)
        tx = np.empty(k + 1, dtype=np.int64)
        rx = np.empty(k + 1, dtype=np.int64)
        pw = np.empty(k + 1)
        for a, (lid, p) in enumerate(active):
            tx[a], rx[a], pw[a] = by_id[lid].tx, by_id[lid].rx, p
        for pos in range(start, len(ids)):
            link = by_id[ids[pos]]
            if link.tx in used_nodes or link.rx in used_nodes:
                continue
            tx[k], rx[k] = link.tx, link.rx
            for p in levels:
                pw[k] = p
                cand = active + ((link.id, p),)
                sinr = _admitted_sinr(gain, noise, thr, tx, rx, pw)
                if sinr is None:
                    continue  # supersets of cand only lose SINR
                found.append(_finish(radio, cand, sinr))
                extend(cand, used_nodes | {link.tx, link.rx}, pos + 1)

    extend((), frozenset(), 0)
    found.sort(key=lambda t: t[0])
    return [TransmissionPattern(i, a, c, tw) for i, (a, c, tw) in enumerate(found)]


def sample_patterns(s, links, n, seed):
    """All feasible max-power singletons plus up to n - |singletons|
    distinct maximal patterns from randomized greedy insertion."""
    if n < len(links):
        raise ValueError("n must cover at least one singleton per link")
    radio = s.radio
    gain = gain_matrix(s.positions(), radio)
    noise = radio.noise_power_w()
    thr = 10.0 ** (radio.sinr_min_db / 10.0)
    levels = radio.nonzero_power_levels()
    p_max = max(levels)
    by_id = {l.id: l for l in links}
    ids = sorted(by_id)

    found = {}
    for lid in ids:
        link = by_id[lid]
        tx = np.array([link.tx], dtype=np.int64)
        rx = np.array([link.rx], dtype=np.int64)
        pw = np.array([p_max])
        sinr = _admitted_sinr(gain, noise, thr, tx, rx, pw)
        if sinr is not None:
            active = ((lid, p_max),)
            found[active] = _finish(radio, active, sinr)
    n_singletons = len(found)

    rng = np.random.default_rng(seed)
    budget = max(n - n_singletons, 0)
    attempts = 0
    while len(found) - n_singletons < budget and attempts < 20 * budget:
        attempts += 1
        chosen = []
        used = set()
        for idx in rng.permutation(len(ids)):
            link = by_id[ids[idx]]
            if link.tx in used or link.rx in used:
                continue
            pref = levels[int(rng.integers(len(levels)))]
            trial = [pref] + [q for q in sorted(levels, reverse=True) if q != pref]
            tx = np.array([by_id[l].tx for l, _ in chosen] + [link.tx], dtype=np.int64)
            rx = np.array([by_id[l].rx for l, _ in chosen] + [link.rx], dtype=np.int64)
            for p in trial:
                pw = np.array([q for _, q in chosen] + [p])
                if _admitted_sinr(gain, noise, thr, tx, rx, pw) is not None:
                    chosen.append((link.id, p))
                    used |= {link.tx, link.rx}
                    break
        active = tuple(sorted(chosen))
        if len(active) >= 2 and active not in found:
            tx = np.array([by_id[l].tx for l, _ in active], dtype=np.int64)
            rx = np.array([by_id[l].rx for l, _ in active], dtype=np.int64)
            pw = np.array([p for _, p in active])
            sinr = _admitted_sinr(gain, noise, thr, tx, rx, pw)
            found[active] = _finish(radio, active, sinr)

    items = sorted(found.values(), key=lambda t: t[0])
    return [TransmissionPattern(i, a, c, tw) for i, (a, c, tw) in enumerate(items)]


def validate_pattern(s, links, pattern):
    """Independent invariant re-check via scalar arithmetic.

    Deliberately shares no code with the construction path: pathloss per
    pair through pathloss_db, interference summed in a plain loop.
    Returns a list of violation strings, empty when valid.
    """
    radio = s.radio
    by_id = {l.id: l for l in links}
    pos = s.positions()
    problems = []

    nodes_seen = {}
    for lid, p in pattern.active:
        if lid not in by_id:
            problems.append(f"unknown link {lid}")
            continue
        if p not in radio.nonzero_power_levels():
            problems.append(f"link {lid} power {p} not a configured level")
        link = by_id[lid]
        for node in (link.tx, link.rx):
            if node in nodes_seen:
                problems.append(f"node {node} in links {nodes_seen[node]} and {lid}")
            nodes_seen[node] = lid
    txs = {by_id[l].tx for l, _ in pattern.active if l in by_id}
    rxs = {by_id[l].rx for l, _ in pattern.active if l in by_id}
    if txs & rxs:
        problems.append(f"half-duplex violation at nodes {sorted(txs & rxs)}")

    noise = radio.noise_power_w()
    for lid, p in pattern.active:
        if lid not in by_id:
            continue
        link = by_id[lid]
        d = max(float(np.hypot(*(pos[link.tx] - pos[link.rx]))), 1.0)
        sig = p * 10.0 ** (-pathloss_db(d, radio) / 10.0)
        interf = 0.0
        for olid, op in pattern.active:
            if olid == lid or olid not in by_id:
                continue
            other = by_id[olid]
            di = max(float(np.hypot(*(pos[other.tx] - pos[link.rx]))), 1.0)
            interf += op * 10.0 ** (-pathloss_db(di, radio) / 10.0)
        sinr_db = 10.0 * np.log10(sig / (noise + interf))
        if sinr_db < radio.sinr_min_db - 1e-9:
            problems.append(f"link {lid} sinr {sinr_db:.3f} dB below admission")
        cap = radio.bandwidth_hz * np.log2(1.0 + sig / (noise + interf))
        have = pattern.cap_bps.get(lid, 0.0)
        if abs(cap - have) > 1e-6 * max(cap, 1.0):
            problems.append(f"link {lid} capacity mismatch {have} vs {cap}")

    expect = sum(p for _, p in pattern.active)
    expect += radio.circuit_power_w * len(pattern.active)
    if abs(expect - pattern.power_w) > 1e-9:
        problems.append(f"total power {pattern.power_w} != {expect}")
    return problems


def patterns_to_json(patterns):
    docs = []
    for p in patterns:
        docs.append({
            "active": [[int(l), float(w)] for l, w in p.active],
            "cap_bps": {str(l): float(c) for l, c in sorted(p.cap_bps.items())},
            "power_w": float(p.power_w),
        })
    return json.dumps(docs, indent=None, separators=(", ", ": "))


def patterns_from_json(text):
    docs = json.loads(text)
    out = []
    for i, d in enumerate(docs):
        active = tuple(sorted((int(l), float(w)) for l, w in d["active"]))
        caps = {int(k): float(v) for k, v in d["cap_bps"].items()}
        out.append(TransmissionPattern(i, active, caps, float(d["power_w"])))
    return out
