"""Numba kernels shared by the ring container and the dynamics.

State layout (all numpy arrays, mutated in place):
  colors      uint8, 1 = green, 0 = red
  gc          int64, number of green nodes in the closed neighbourhood
  status      int8, 0 happy, 1 unhappy without hope, 2 hopeful
  unh / hop   swap-remove index sets: items[:size] are members, pos[x] is the
              slot of x or -1
  sizes       int64[2], sizes of the unhappy and hopeful sets
"""

import numpy as np
from numba import njit

HAPPY = 0
HOPELESS = 1
HOPEFUL = 2

# run loop exit codes
EXIT_FINISHED = 0
EXIT_CAP = 1
EXIT_BUFFER = 2


@njit(cache=True, inline="always")
def eval_status(color, g, W, need_g, need_r):
    if color == 1:
        if g >= need_g:
            return HAPPY
        if W - g + 1 >= need_r:
            return HOPEFUL
        return HOPELESS
    if W - g >= need_r:
        return HAPPY
    if g + 1 >= need_g:
        return HOPEFUL
    return HOPELESS


@njit(cache=True, inline="always")
def _set_add(items, pos, sizes, which, x):
    k = sizes[which]
    items[k] = x
    pos[x] = k
    sizes[which] = k + 1


@njit(cache=True, inline="always")
def _set_remove(items, pos, sizes, which, x):
    k = sizes[which] - 1
    i = pos[x]
    last = items[k]
    items[i] = last
    pos[last] = i
    pos[x] = -1
    sizes[which] = k


@njit(cache=True)
def transition(x, old, new, status, unh_items, unh_pos, hop_items, hop_pos, sizes):
    """Move x between the index sets after its status changed from old to new."""
    if old == HAPPY:
        _set_add(unh_items, unh_pos, sizes, 0, x)
    elif new == HAPPY:
        _set_remove(unh_items, unh_pos, sizes, 0, x)
    if old == HOPEFUL:
        _set_remove(hop_items, hop_pos, sizes, 1, x)
    elif new == HOPEFUL:
        _set_add(hop_items, hop_pos, sizes, 1, x)
    status[x] = new


@njit(cache=True)
def green_counts(colors, w):
    n = colors.shape[0]
    gc = np.empty(n, dtype=np.int64)
    s = 0
    for k in range(-w, w + 1):
        s += colors[k % n]
    for x in range(n):
        gc[x] = s
        s += colors[(x + w + 1) % n]
        s -= colors[(x - w) % n]
    return gc


@njit(cache=True)
def rebuild_sets(colors, gc, status, unh_items, unh_pos, hop_items, hop_pos, sizes,
                 W, need_g, need_r):
    n = colors.shape[0]
    sizes[0] = 0
    sizes[1] = 0
    for x in range(n):
        unh_pos[x] = -1
        hop_pos[x] = -1
        st = eval_status(colors[x], gc[x], W, need_g, need_r)
        status[x] = st
        if st != HAPPY:
            _set_add(unh_items, unh_pos, sizes, 0, x)
        if st == HOPEFUL:
            _set_add(hop_items, hop_pos, sizes, 1, x)


@njit(cache=True)
def flip(x, colors, gc, status, unh_items, unh_pos, hop_items, hop_pos, sizes,
         w, need_g, need_r):
    n = colors.shape[0]
    W = 2 * w + 1
    c = colors[x] ^ 1
    colors[x] = c
    d = 1 if c == 1 else -1
    for k in range(-w, w + 1):
        y = x + k
        if y < 0:
            y += n
        elif y >= n:
            y -= n
        gc[y] += d
        # checking before calling keeps the common no-change path tight
        new = eval_status(colors[y], gc[y], W, need_g, need_r)
        if new != status[y]:
            transition(y, status[y], new, status, unh_items, unh_pos, hop_items, hop_pos,
                       sizes)


@njit(cache=True, nogil=True)
def run_sequential(colors, gc, status, unh_items, unh_pos, hop_items, hop_pos, sizes,
                   w, need_g, need_r, mode, eps, rng, t, max_steps,
                   ev_time, ev_node, ev_color, ev_pre, record, changed, n_changed):
    """Run selective (mode 0), incremental (1) or perturbed (2) steps.

    Returns (t, events written, n_changed, exit code). Stops early with
    EXIT_BUFFER when the event buffers are full.
    """
    n = colors.shape[0]
    cap = ev_time.shape[0]
    ne = 0
    while t < max_steps:
        if mode == 0:
            k = sizes[1]
            if k == 0:
                return t, ne, n_changed, EXIT_FINISHED
            if record and ne == cap:
                return t, ne, n_changed, EXIT_BUFFER
            x = hop_items[rng.integers(0, k)]
        elif mode == 1:
            k = sizes[0]
            if k == 0:
                return t, ne, n_changed, EXIT_FINISHED
            if record and ne == cap:
                return t, ne, n_changed, EXIT_BUFFER
            x = unh_items[rng.integers(0, k)]
        else:
            if record and ne == cap:
                return t, ne, n_changed, EXIT_BUFFER
            if rng.random() < eps:
                x = rng.integers(0, n)
            else:
                k = sizes[0]
                if k == 0:
                    t += 1
                    continue
                x = unh_items[rng.integers(0, k)]
        t += 1
        pre = gc[x]
        flip(x, colors, gc, status, unh_items, unh_pos, hop_items, hop_pos, sizes,
             w, need_g, need_r)
        if record:
            ev_time[ne] = t
            ev_node[ne] = x
            ev_color[ne] = colors[x]
            ev_pre[ne] = pre
            ne += 1
        if changed[x] == 0:
            changed[x] = 1
            n_changed += 1
    return t, ne, n_changed, EXIT_CAP


@njit(cache=True, nogil=True)
def sync_step(colors, gc, status, unh_items, unh_pos, hop_items, hop_pos, sizes,
              w, need_g, need_r, buf, zob_a, zob_b, hashes, changed):
    """Flip every unhappy node at once. Returns (flipped, newly changed)."""
    n = colors.shape[0]
    W = 2 * w + 1
    k = sizes[0]
    if k == 0:
        return 0, 0
    fresh = 0
    for i in range(k):
        x = unh_items[i]
        buf[i] = x
        colors[x] ^= 1
        hashes[0] ^= zob_a[x]
        hashes[1] ^= zob_b[x]
        if changed[x] == 0:
            changed[x] = 1
            fresh += 1
    if k * W > 4 * n:
        # dense round: recount every window and rebuild the sets
        s = 0
        for j in range(-w, w + 1):
            s += colors[j % n]
        for x in range(n):
            gc[x] = s
            s += colors[(x + w + 1) % n]
            s -= colors[(x - w) % n]
        rebuild_sets(colors, gc, status, unh_items, unh_pos, hop_items, hop_pos, sizes,
                     W, need_g, need_r)
        return k, fresh
    for i in range(k):
        x = buf[i]
        d = 1 if colors[x] == 1 else -1
        for j in range(-w, w + 1):
            y = (x + j) % n
            gc[y] += d
    for i in range(k):
        x = buf[i]
        for j in range(-w, w + 1):
            y = (x + j) % n
            new = eval_status(colors[y], gc[y], W, need_g, need_r)
            if new != status[y]:
                transition(y, status[y], new, status, unh_items, unh_pos, hop_items,
                           hop_pos, sizes)
    return k, fresh
