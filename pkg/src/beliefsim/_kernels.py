"""Compiled numerical kernels.

Everything here is numba-jitted and operates on plain arrays so the hot
simulation loop runs at machine speed and releases the GIL. The same
functions are called one at a time by the object-level API in
:mod:`beliefsim.dynamics`, which keeps the two execution paths bit-identical:
they share the arithmetic and the random draw sequence by construction.

Random generator: xoshiro256++ over an explicit uint64[4] state array.
Gaussians use Box-Muller and always consume exactly two uniforms, so the
draw count per simulation step is constant.
"""

import numpy as np
from numba import njit

_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U19 = np.uint64(19)
_U23 = np.uint64(23)
_U41 = np.uint64(41)
_U45 = np.uint64(45)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
_TWO_PI = 6.283185307179586


@njit(cache=True, nogil=True)
def rng_next(state):
    """Advance xoshiro256++ by one step and return a uint64."""
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    tmp = s0 + s3
    result = ((tmp << _U23) | (tmp >> _U41)) + s0
    t = s1 << _U17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << _U45) | (s3 >> _U19)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True, nogil=True)
def rng_uniform(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return float(rng_next(state) >> _U11) * _INV53


@njit(cache=True, nogil=True)
def rng_randint(state, n):
    """Uniform integer in {0, ..., n-1}."""
    v = int(rng_uniform(state) * n)
    if v >= n:  # guard against rounding at the top of the range
        v = n - 1
    return v


@njit(cache=True, nogil=True)
def rng_normal(state, mean, sigma):
    """Gaussian draw via Box-Muller. Always consumes two uniforms."""
    u1 = 1.0 - rng_uniform(state)  # (0, 1], keeps the log finite
    u2 = rng_uniform(state)
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)
    return mean + sigma * z


@njit(cache=True, nogil=True)
def apply_clipped(weights, fixed, x, y, delta):
    """Add delta to edge (x, y) symmetrically, clipping to [-1, 1].

    Fixed edges are left untouched. Returns (resulting weight, was_fixed).
    """
    if fixed[x, y]:
        return weights[x, y], True
    v = weights[x, y] + delta
    if v > 1.0:
        v = 1.0
    elif v < -1.0:
        v = -1.0
    weights[x, y] = v
    weights[y, x] = v
    return v, False


@njit(cache=True, nogil=True)
def grad_edge(weights, n, x, y):
    """Partial derivative of mean triad energy with respect to edge (x, y).

    Equals -(1/T) * sum_z w[x,z] * w[y,z] over the other triad corners z,
    where T = C(n, 3) is the total triad count. The zero diagonal makes the
    z = x and z = y terms vanish, so the plain dot product is the sum.
    """
    s = 0.0
    for z in range(n):
        s += weights[x, z] * weights[y, z]
    t_count = n * (n - 1) * (n - 2) / 6.0
    return -s / t_count


@njit(cache=True, nogil=True)
def walk_dest_probs(weights, n, source, excluded, out):
    """Exact destination distribution of a non-backtracking two-step walk.

    Step one leaves `source` for a mid node with probability proportional to
    |w(source, mid)|. Step two leaves mid for a destination with probability
    proportional to |w(mid, dest)|, never returning straight to `source`.
    Destinations flagged in `excluded` get probability zero and the rest is
    renormalized by the caller via the returned total mass.

    If no walk mass survives (all-zero incident weights, or everything
    reachable is excluded), falls back to uniform over the non-excluded,
    non-source concepts. Returns (total_mass, used_fallback); total_mass of
    zero means there was no eligible destination at all.
    """
    for d in range(n):
        out[d] = 0.0
    total1 = 0.0
    for m in range(n):
        if m != source:
            total1 += abs(weights[source, m])
    if total1 > 0.0:
        for m in range(n):
            if m == source:
                continue
            w1 = abs(weights[source, m])
            if w1 == 0.0:
                continue
            denom = 0.0
            for d in range(n):
                if d != m and d != source:
                    denom += abs(weights[m, d])
            if denom == 0.0:
                continue
            scale = w1 / (total1 * denom)
            for d in range(n):
                if d != m and d != source:
                    out[d] += scale * abs(weights[m, d])
    for d in range(n):
        if excluded[d] != 0:
            out[d] = 0.0
    total = 0.0
    for d in range(n):
        total += out[d]
    if total > 0.0:
        return total, False
    count = 0.0
    for d in range(n):
        if excluded[d] == 0 and d != source:
            out[d] = 1.0
            count += 1.0
    return count, True


@njit(cache=True, nogil=True)
def sample_categorical(state, probs, n, total):
    """Sample an index proportional to probs[:n]. Consumes one uniform."""
    u = rng_uniform(state) * total
    acc = 0.0
    last = -1
    for d in range(n):
        p = probs[d]
        if p > 0.0:
            acc += p
            last = d
            if u < acc:
                return d
    return last  # float rounding at the tail; fall back to the last live bin


@njit(cache=True, nogil=True)
def run_steps(weights, fixed, n_concepts, nbr_indptr, nbr_ids,
              tab_indptr, tab_sx, tab_sy, tab_rx, tab_ry,
              alpha, beta, sigma, reinforcing, n_steps, state,
              probs_buf, mask_buf):
    """Advance the whole population by n_steps simulation steps in place.

    Per step: pick a receiver uniformly and a sender among its neighbors,
    transmit one randomly chosen translatable sender belief (Gaussian around
    the social-influence mean), then let the receiver adjust one adjacent
    belief, picked by a two-step weighted walk, down its dissonance gradient.

    The draw sequence per step is fixed (receiver, sender, belief row,
    social noise x2, endpoint bit, walk destination, coherence noise x2) and
    matches the single-step API in beliefsim.dynamics exactly.
    """
    n_agents = n_concepts.shape[0]
    for _ in range(n_steps):
        i = rng_randint(state, n_agents)
        base = nbr_indptr[i]
        deg = nbr_indptr[i + 1] - base
        e = base + rng_randint(state, deg)
        j = nbr_ids[e]

        t0 = tab_indptr[e]
        row = t0 + rng_randint(state, tab_indptr[e + 1] - t0)
        sx = tab_sx[row]
        sy = tab_sy[row]
        rx = tab_rx[row]
        ry = tab_ry[row]

        w_i = weights[i]
        f_i = fixed[i]
        n_i = n_concepts[i]

        b_sender = weights[j, sx, sy]
        if reinforcing:
            mean_f = alpha * b_sender
        else:
            mean_f = alpha * (b_sender - w_i[rx, ry])
        delta_f = rng_normal(state, mean_f, sigma)
        apply_clipped(w_i, f_i, rx, ry, delta_f)

        if rng_randint(state, 2) == 0:
            src = rx
            other = ry
        else:
            src = ry
            other = rx
        mask_buf[src] = 1
        mask_buf[other] = 1
        total, _ = walk_dest_probs(w_i, n_i, src, mask_buf, probs_buf)
        dest = sample_categorical(state, probs_buf, n_i, total)
        mask_buf[src] = 0
        mask_buf[other] = 0
        if dest < 0:  # no eligible destination; impossible for n >= 4
            continue

        grad = grad_edge(w_i, n_i, src, dest)
        delta_g = rng_normal(state, -beta * grad, sigma)
        apply_clipped(w_i, f_i, src, dest, delta_g)


@njit(cache=True, nogil=True)
def sample_walk_dest(state, weights, n, source, excluded, max_tries):
    """Sample one literal non-backtracking two-step walk destination.

    Independent of walk_dest_probs: the two steps are simulated one at a
    time and walks ending on an excluded destination are rejected whole,
    which realizes the same conditional distribution. Returns -1 when no
    walk completed within max_tries (degenerate configuration).
    """
    for _ in range(max_tries):
        total1 = 0.0
        for m in range(n):
            if m != source:
                total1 += abs(weights[source, m])
        if total1 == 0.0:
            return -1
        u = rng_uniform(state) * total1
        acc = 0.0
        mid = -1
        for m in range(n):
            if m == source:
                continue
            w1 = abs(weights[source, m])
            if w1 > 0.0:
                acc += w1
                mid = m
                if u < acc:
                    break
        if mid < 0:
            return -1
        total2 = 0.0
        for d in range(n):
            if d != mid and d != source:
                total2 += abs(weights[mid, d])
        if total2 == 0.0:
            continue  # dead-end mid, restart the walk
        u2 = rng_uniform(state) * total2
        acc2 = 0.0
        dest = -1
        for d in range(n):
            if d == mid or d == source:
                continue
            w2 = abs(weights[mid, d])
            if w2 > 0.0:
                acc2 += w2
                dest = d
                if u2 < acc2:
                    break
        if dest < 0:
            continue
        if excluded[dest] != 0:
            continue  # rejected: condition on landing outside the excluded set
        return dest
    return -1


@njit(cache=True, nogil=True)
def walk_dest_counts(state, weights, n, source, excluded, n_samples, max_tries, counts):
    """Histogram n_samples literal walk destinations into counts[:n]."""
    for d in range(n):
        counts[d] = 0
    for _ in range(n_samples):
        dest = sample_walk_dest(state, weights, n, source, excluded, max_tries)
        if dest < 0:
            return False
        counts[dest] += 1
    return True
