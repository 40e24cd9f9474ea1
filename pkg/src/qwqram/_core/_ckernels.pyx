# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled walker kernels; same contract as ``_pykernels``."""

cdef enum:
    COLOR = 0
    DEPTH = 1
    BRANCH = 2
    PHASE = 3

cdef enum:
    EMPTY = 0
    RED = 1
    BLUE = 2

cdef enum:
    FORWARD = 0
    AT_CELL = 1
    BACKWARD = 2

cdef enum:
    OK = 0
    ERR_PHASE = 1
    ERR_DEPTH = 2
    ERR_BLUE_INPUT = 3
    ERR_MULTI_SWITCH = 4


def controlled_negate(long long[:, :, ::1] walkers, Py_ssize_t ctrl,
                      long long[::1] targets, long long active_color):
    cdef Py_ssize_t k, i, t
    cdef long long c
    with nogil:
        for k in range(walkers.shape[0]):
            if walkers[k, ctrl, COLOR] != active_color:
                continue
            for i in range(targets.shape[0]):
                t = targets[i]
                c = walkers[k, t, COLOR]
                if c != EMPTY:
                    walkers[k, t, COLOR] = 3 - c
    return OK


cdef int _scatter_check(long long[:, :, ::1] walkers, long long n) noexcept nogil:
    # whole-array checks in a fixed order, so the status matches the numpy kernel
    cdef Py_ssize_t k, w
    for k in range(walkers.shape[0]):
        for w in range(walkers.shape[1]):
            if walkers[k, w, PHASE] != FORWARD:
                return ERR_PHASE
    for k in range(walkers.shape[0]):
        for w in range(walkers.shape[1]):
            if walkers[k, w, DEPTH] > n:
                return ERR_DEPTH
    return OK


def scatter(long long[:, :, ::1] walkers, long long n):
    cdef Py_ssize_t k, w
    cdef long long c, d
    cdef int status
    with nogil:
        status = _scatter_check(walkers, n)
        if status == OK:
            for k in range(walkers.shape[0]):
                for w in range(walkers.shape[1]):
                    c = walkers[k, w, COLOR]
                    if c == RED:
                        walkers[k, w, BRANCH] = 2 * walkers[k, w, BRANCH] - 1
                    elif c == BLUE:
                        walkers[k, w, BRANCH] = 2 * walkers[k, w, BRANCH]
                        walkers[k, w, COLOR] = RED
                    else:
                        walkers[k, w, BRANCH] = 0
                    d = walkers[k, w, DEPTH] + 1
                    walkers[k, w, DEPTH] = d
                    walkers[k, w, PHASE] = AT_CELL if d == n + 1 else FORWARD
    return status


cdef int _scatter_inverse_check(long long[:, :, ::1] walkers) noexcept nogil:
    cdef Py_ssize_t k, w
    for k in range(walkers.shape[0]):
        for w in range(walkers.shape[1]):
            if walkers[k, w, PHASE] == FORWARD:
                return ERR_PHASE
    for k in range(walkers.shape[0]):
        for w in range(walkers.shape[1]):
            if walkers[k, w, DEPTH] < 2:
                return ERR_DEPTH
    for k in range(walkers.shape[0]):
        for w in range(walkers.shape[1]):
            if walkers[k, w, COLOR] == BLUE:
                return ERR_BLUE_INPUT
    return OK


def scatter_inverse(long long[:, :, ::1] walkers, long long n):
    cdef Py_ssize_t k, w
    cdef long long l
    cdef int status
    with nogil:
        status = _scatter_inverse_check(walkers)
        if status == OK:
            for k in range(walkers.shape[0]):
                for w in range(walkers.shape[1]):
                    if walkers[k, w, COLOR] == RED:
                        l = walkers[k, w, BRANCH]
                        if l % 2 == 0:
                            walkers[k, w, COLOR] = BLUE
                        walkers[k, w, BRANCH] = (l + 1) // 2
                    else:
                        walkers[k, w, BRANCH] = 0
                    walkers[k, w, DEPTH] -= 1
                    walkers[k, w, PHASE] = BACKWARD
    return status


cdef inline void _local_copy(long long[:, :, ::1] walkers, Py_ssize_t k, Py_ssize_t t,
                             long long cell, unsigned char bit) noexcept nogil:
    if bit != 0:
        return
    cdef long long c = walkers[k, t, COLOR]
    if c == RED and walkers[k, t, BRANCH] == cell + 1:
        walkers[k, t, COLOR] = EMPTY
        walkers[k, t, BRANCH] = 0
    elif c == EMPTY:
        walkers[k, t, COLOR] = RED
        walkers[k, t, BRANCH] = cell + 1


cdef int _controlled_copy(long long[:, :, ::1] walkers, long long[::1] ctrls, long long[::1] targets,
                          const unsigned char[:, ::1] bits) noexcept nogil:
    cdef Py_ssize_t k, j, c, t
    cdef long long cell
    for k in range(walkers.shape[0]):
        for j in range(targets.shape[0]):
            c = ctrls[j]
            t = targets[j]
            if walkers[k, c, PHASE] != AT_CELL or walkers[k, t, PHASE] != AT_CELL:
                return ERR_PHASE
    for k in range(walkers.shape[0]):
        for j in range(targets.shape[0]):
            c = ctrls[j]
            if walkers[k, c, COLOR] != RED:
                continue
            cell = walkers[k, c, BRANCH] - 1
            _local_copy(walkers, k, targets[j], cell, bits[cell, j])
    return OK


def controlled_copy(long long[:, :, ::1] walkers, long long[::1] ctrls, long long[::1] targets,
                    const unsigned char[:, ::1] bits, long long n):
    cdef int status
    with nogil:
        status = _controlled_copy(walkers, ctrls, targets, bits)
    return status


cdef int _switch_toggle(long long[:, :, ::1] walkers, unsigned char[:, ::1] switches,
                        Py_ssize_t trigger) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(walkers.shape[0]):
        if walkers[k, trigger, PHASE] != AT_CELL:
            return ERR_PHASE
    for k in range(walkers.shape[0]):
        if walkers[k, trigger, COLOR] == RED:
            switches[k, walkers[k, trigger, BRANCH] - 1] ^= 1
    return OK


def switch_toggle(long long[:, :, ::1] walkers, unsigned char[:, ::1] switches, Py_ssize_t trigger):
    cdef int status
    with nogil:
        status = _switch_toggle(walkers, switches, trigger)
    return status


cdef int _switch_copy(long long[:, :, ::1] walkers, const unsigned char[:, ::1] switches,
                      long long[::1] targets, const unsigned char[:, ::1] bits) noexcept nogil:
    cdef Py_ssize_t k, j, a
    cdef long long cell
    cdef int count
    for k in range(walkers.shape[0]):
        count = 0
        for a in range(switches.shape[1]):
            count += switches[k, a]
        if count > 1:
            return ERR_MULTI_SWITCH
    for k in range(walkers.shape[0]):
        for j in range(targets.shape[0]):
            if walkers[k, targets[j], PHASE] != AT_CELL:
                return ERR_PHASE
    for k in range(walkers.shape[0]):
        cell = -1
        for a in range(switches.shape[1]):
            if switches[k, a]:
                cell = a
        if cell < 0:
            continue
        for j in range(targets.shape[0]):
            _local_copy(walkers, k, targets[j], cell, bits[cell, j])
    return OK


def switch_copy(long long[:, :, ::1] walkers, const unsigned char[:, ::1] switches,
                long long[::1] targets, const unsigned char[:, ::1] bits):
    cdef int status
    with nogil:
        status = _switch_copy(walkers, switches, targets, bits)
    return status
