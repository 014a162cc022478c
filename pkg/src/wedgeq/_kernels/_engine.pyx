# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled FIFO queue kernel.

Same contract as wedgeq._kernels.pure.simulate_fifo: a single-server FIFO
merge of the external arrival stream with the (departure-ordered, hence
time-sorted) spawned-rework stream.  One sequential pass, no event heap.
"""

import numpy as np

IMPL = "cython"


def simulate_fifo(double[::1] arrivals, double[::1] services,
                  unsigned char[::1] spawn_mask, double[::1] rework_services):
    cdef Py_ssize_t n = arrivals.shape[0]
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t n_spawn = 0
    for i in range(n):
        if spawn_mask[i]:
            n_spawn += 1

    waits_arr = np.zeros(n, dtype=np.float64)
    chain_arr = np.zeros(n, dtype=np.float64)
    rq_entry_arr = np.empty(n_spawn, dtype=np.float64)
    rq_service_arr = np.empty(n_spawn, dtype=np.float64)
    rq_parent_arr = np.empty(n_spawn, dtype=np.intp)
    rework_waits_arr = np.empty(n_spawn, dtype=np.float64)

    cdef double[::1] waits = waits_arr
    cdef double[::1] chain = chain_arr
    cdef double[::1] rq_entry = rq_entry_arr
    cdef double[::1] rq_service = rq_service_arr
    cdef Py_ssize_t[::1] rq_parent = rq_parent_arr
    cdef double[::1] rework_waits = rework_waits_arr

    cdef Py_ssize_t head = 0
    cdef Py_ssize_t tail = 0
    cdef double now = 0.0
    cdef double busy = 0.0
    cdef double entry, service, start, depart

    i = 0
    while i < n or head < tail:
        if i < n and (head == tail or arrivals[i] <= rq_entry[head]):
            entry = arrivals[i]
            service = services[i]
            start = entry if entry > now else now
            depart = start + service
            waits[i] = start - entry
            chain[i] = depart
            if spawn_mask[i]:
                rq_entry[tail] = depart
                rq_service[tail] = rework_services[i]
                rq_parent[tail] = i
                tail += 1
            i += 1
        else:
            entry = rq_entry[head]
            service = rq_service[head]
            start = entry if entry > now else now
            depart = start + service
            rework_waits[head] = start - entry
            chain[rq_parent[head]] = depart
            head += 1
        busy += service
        now = depart

    return waits_arr, chain_arr, rework_waits_arr, now, busy
