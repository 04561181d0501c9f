"""Shared construction helpers and independent oracles for the test suite.

Everything here recomputes quantities through a different arithmetic path
than the library (explicit index walks, linear-domain products, series
expansions) so tests compare two independent derivations.
"""

import itertools
from math import erf, exp, log2, pi, sqrt

import numpy as np

from treecost import PureState, RootedTree, root_and_relabel


def line_edges(n):
    return [(i, i + 1) for i in range(1, n)]


def line_tree(n, dims=None, root=1):
    if dims is None:
        dims = {i: 2 for i in range(1, n + 1)}
    elif not isinstance(dims, dict):
        dims = {i: d for i, d in zip(range(1, n + 1), dims)}
    return root_and_relabel(line_edges(n), dims, root)


def star_tree(n, center_dim=2, leaf_dim=2):
    dims = {1: center_dim}
    dims.update({i: leaf_dim for i in range(2, n + 1)})
    return root_and_relabel([(1, i) for i in range(2, n + 1)], dims, 1)


def random_tree(rng, n, dim_choices=(2,), root=None):
    """Uniform random attachment tree on n parties with a random root."""
    edges = [(int(rng.integers(1, v)), v) for v in range(2, n + 1)]
    dims = {v: int(rng.choice(dim_choices)) for v in range(1, n + 1)}
    if root is None:
        root = int(rng.integers(1, n + 1))
    return root_and_relabel(edges, dims, root)


def random_pure_state(rng, dims):
    total = int(np.prod(dims))
    amps = rng.normal(size=total) + 1j * rng.normal(size=total)
    return PureState(amps / np.linalg.norm(amps), tuple(dims))


def skewed_pure_state(rng, dims, decay=3.0):
    """Random state with geometrically decaying amplitude envelope, so cut
    spectra are far from flat and waterline truncation actually bites."""
    total = int(np.prod(dims))
    envelope = np.exp(-decay * np.arange(total) / total)
    amps = envelope * (rng.normal(size=total) + 1j * rng.normal(size=total))
    return PureState(amps / np.linalg.norm(amps), tuple(dims))


def reachability_split(n_parties, edge_pairs, cut_pair):
    """Partition party ids by BFS reachability after deleting one edge.

    Returns (component of cut_pair[1], the rest) as sorted lists.  Pure
    adjacency walk, no tree structure assumed beyond connectivity.
    """
    adj = {i: set() for i in range(1, n_parties + 1)}
    for a, b in edge_pairs:
        if {a, b} == set(cut_pair):
            continue
        adj[a].add(b)
        adj[b].add(a)
    seen = {cut_pair[1]}
    frontier = [cut_pair[1]]
    while frontier:
        v = frontier.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    side = sorted(seen)
    rest = sorted(set(range(1, n_parties + 1)) - seen)
    return side, rest


def cut_matrix(amps, dims, front_parties):
    """Reshape a flat state into the (front, rest) cut matrix by explicit
    index arithmetic; parties are 1-based, party 1 most significant."""
    n = len(dims)
    front = sorted(front_parties)
    rest = [p for p in range(1, n + 1) if p not in front]
    rows = int(np.prod([dims[p - 1] for p in front]))
    cols = int(np.prod([dims[p - 1] for p in rest]))
    mat = np.zeros((rows, cols), dtype=complex)
    for idx, value in enumerate(amps):
        digits = []
        rem = idx
        for d in reversed(dims):
            digits.append(rem % d)
            rem //= d
        digits.reverse()
        r = 0
        for p in front:
            r = r * dims[p - 1] + digits[p - 1]
        c = 0
        for p in rest:
            c = c * dims[p - 1] + digits[p - 1]
        mat[r, c] = value
    return mat


def cut_rank(amps, dims, front_parties, tol=1e-9):
    sing = np.linalg.svd(cut_matrix(amps, dims, front_parties), compute_uv=False)
    if sing[0] == 0.0:
        return 0
    return int(np.sum(sing > tol * sing[0]))


def partial_trace_walk(amps, dims, keep):
    """Dense partial trace by explicit double index walk."""
    n = len(dims)
    keep = sorted(keep)
    drop = [p for p in range(1, n + 1) if p not in keep]
    dk = int(np.prod([dims[p - 1] for p in keep]))
    rho = np.zeros((dk, dk), dtype=complex)

    def decode(idx):
        digits = []
        rem = idx
        for d in reversed(dims):
            digits.append(rem % d)
            rem //= d
        digits.reverse()
        return digits

    for i, vi in enumerate(amps):
        if vi == 0:
            continue
        di = decode(i)
        for j, vj in enumerate(amps):
            dj = decode(j)
            if any(di[p - 1] != dj[p - 1] for p in drop):
                continue
            r = 0
            c = 0
            for p in keep:
                r = r * dims[p - 1] + di[p - 1]
                c = c * dims[p - 1] + dj[p - 1]
            rho[r, c] += vi * np.conj(vj)
    return rho


def brute_waterline_bits(probs, n, eps):
    """Waterline exponent over the raw n-fold product distribution.

    Builds every product weight explicitly in linear arithmetic, sorts,
    then solves sum_j max(0, mu_j - t) = 1 - eps by a direct scan.  No type
    classes, no logs until the final bit conversion.
    """
    probs = np.asarray(probs, dtype=float)
    prods = probs.copy()
    for _ in range(n - 1):
        prods = np.multiply.outer(prods, probs).ravel()
    prods = np.sort(prods)[::-1]
    target = 1.0 - eps
    csum = np.cumsum(prods)
    for k in range(len(prods)):
        lower = prods[k + 1] if k + 1 < len(prods) else 0.0
        if csum[k] - (k + 1) * lower >= target:
            t = (csum[k] - target) / (k + 1)
            return -log2(t)
    raise AssertionError("mass accounting failed")


def series_normal_cdf(x):
    """Standard normal CDF via the error function; the library path goes
    through erfc with halved argument, this one through erf directly."""
    return 0.5 * (1.0 + erf(x / sqrt(2.0)))


def series_inverse_cdf(p, lo=-40.0, hi=40.0):
    """Bisection inverse of series_normal_cdf, for cross-checking."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if series_normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def entropy_longdouble(probs):
    p = np.asarray(probs, dtype=np.longdouble)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def std_log_longdouble(probs):
    p = np.asarray(probs, dtype=np.longdouble)
    p = p[p > 0]
    mean = -(p * np.log2(p)).sum()
    second = (p * np.log2(p) ** 2).sum()
    return float(np.sqrt(max(np.longdouble(0), second - mean * mean)))


def product_block_amps(amps, dims, n):
    """n-copy block amplitudes in party-major order with copy 1 most
    significant inside each party register, by explicit index decoding."""
    amps = np.asarray(amps)
    n_parties = len(dims)
    block_dims = [d**n for d in dims]
    total = int(np.prod(block_dims))
    out = np.zeros(total, dtype=complex)
    for idx in range(total):
        rem = idx
        regs = []
        for bd in reversed(block_dims):
            regs.append(rem % bd)
            rem //= bd
        regs.reverse()
        copy_indices = []
        for c in range(n):
            flat = 0
            for p in range(n_parties):
                reg = regs[p]
                shift = dims[p] ** (n - 1 - c)
                digit = (reg // shift) % dims[p]
                flat = flat * dims[p] + digit
            copy_indices.append(flat)
        value = 1.0 + 0j
        for flat in copy_indices:
            value *= amps[flat]
        out[idx] = value
    return out


def all_transcript_outcomes(transcripts):
    return {tuple(sorted(tr.outcomes.items())) for tr in transcripts}
