"""Vectorised numpy kernels over packed walker arrays.

Every function mutates ``walkers`` (int64, shape (K, W, 4)) in place and
returns a status code; 0 means success.  The compiled module exposes the
same functions with the same signatures.
"""

import numpy as np

COLOR, DEPTH, BRANCH, PHASE = 0, 1, 2, 3
EMPTY, RED, BLUE = 0, 1, 2
FORWARD, AT_CELL, BACKWARD = 0, 1, 2

OK = 0
ERR_PHASE = 1
ERR_DEPTH = 2
ERR_BLUE_INPUT = 3
ERR_MULTI_SWITCH = 4


def controlled_negate(walkers, ctrl, targets, active_color):
    if len(targets) == 0 or walkers.shape[0] == 0:
        return OK
    hit = walkers[:, ctrl, COLOR] == active_color
    if not hit.any():
        return OK
    sub = walkers[hit][:, targets, COLOR]
    walkers[np.ix_(hit, targets, [COLOR])] = np.where(sub == EMPTY, EMPTY, 3 - sub)[..., None]
    return OK


def scatter(walkers, n):
    if walkers.size == 0:
        return OK
    if np.any(walkers[:, :, PHASE] != FORWARD):
        return ERR_PHASE
    depth = walkers[:, :, DEPTH].copy()
    if np.any(depth > n):
        return ERR_DEPTH
    color = walkers[:, :, COLOR].copy()
    br = walkers[:, :, BRANCH].copy()
    walkers[:, :, BRANCH] = np.where(color == RED, 2 * br - 1, np.where(color == BLUE, 2 * br, 0))
    walkers[:, :, COLOR] = np.where(color == BLUE, RED, color)
    walkers[:, :, DEPTH] = depth + 1
    walkers[:, :, PHASE] = np.where(depth + 1 == n + 1, AT_CELL, FORWARD)
    return OK


def scatter_inverse(walkers, n):
    if walkers.size == 0:
        return OK
    if np.any(walkers[:, :, PHASE] == FORWARD):
        return ERR_PHASE
    depth = walkers[:, :, DEPTH].copy()
    if np.any(depth < 2):
        return ERR_DEPTH
    color = walkers[:, :, COLOR].copy()
    if np.any(color == BLUE):
        return ERR_BLUE_INPUT
    br = walkers[:, :, BRANCH].copy()
    even = (br % 2) == 0
    red = color == RED
    walkers[:, :, COLOR] = np.where(red & even, BLUE, color)
    walkers[:, :, BRANCH] = np.where(red, (br + 1) // 2, 0)
    walkers[:, :, DEPTH] = depth - 1
    walkers[:, :, PHASE] = BACKWARD
    return OK


def _local_copy(walkers, rows, target, cell, bit):
    """Swap Red@cell <-> Empty on ``target`` where the memory bit is 0."""
    col = walkers[rows, target, COLOR]
    br = walkers[rows, target, BRANCH]
    zero = bit == 0
    to_empty = zero & (col == RED) & (br == cell + 1)
    to_red = zero & (col == EMPTY)
    new_col = np.where(to_empty, EMPTY, np.where(to_red, RED, col))
    new_br = np.where(to_empty, 0, np.where(to_red, cell + 1, br))
    walkers[rows, target, COLOR] = new_col
    walkers[rows, target, BRANCH] = new_br


def controlled_copy(walkers, ctrls, targets, bits, n):
    """For each j, a red ``ctrls[j]`` at cell a copies ``bits[a, j]`` into ``targets[j]``."""
    if walkers.shape[0] == 0:
        return OK
    for j in range(len(targets)):
        c = ctrls[j]
        t = targets[j]
        if np.any(walkers[:, c, PHASE] != AT_CELL) or np.any(walkers[:, t, PHASE] != AT_CELL):
            return ERR_PHASE
        rows = np.flatnonzero(walkers[:, c, COLOR] == RED)
        if rows.size == 0:
            continue
        cell = walkers[rows, c, BRANCH] - 1
        _local_copy(walkers, rows, t, cell, bits[cell, j])
    return OK


def switch_toggle(walkers, switches, trigger):
    if walkers.shape[0] == 0:
        return OK
    if np.any(walkers[:, trigger, PHASE] != AT_CELL):
        return ERR_PHASE
    rows = np.flatnonzero(walkers[:, trigger, COLOR] == RED)
    cells = walkers[rows, trigger, BRANCH] - 1
    switches[rows, cells] ^= 1
    return OK


def switch_copy(walkers, switches, targets, bits):
    if walkers.shape[0] == 0:
        return OK
    on = switches.sum(axis=1)
    if np.any(on > 1):
        return ERR_MULTI_SWITCH
    if np.any(walkers[:, targets, PHASE] != AT_CELL):
        return ERR_PHASE
    rows = np.flatnonzero(on == 1)
    if rows.size == 0:
        return OK
    cell = np.argmax(switches[rows], axis=1).astype(np.int64)
    for j in range(len(targets)):
        _local_copy(walkers, rows, targets[j], cell, bits[cell, j])
    return OK
