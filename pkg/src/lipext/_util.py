"""Worker-pool helpers for the blocked kernels.

LIPEXT_THREADS caps the number of worker threads (0 or unset means auto).
All parallel work in this package is over disjoint output blocks combined in
a fixed order, so results do not depend on the worker count or schedule.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("LIPEXT_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        return os.cpu_count() or 1
    return cap


def map_blocks(fn, blocks):
    """Apply fn to each block, threaded when allowed.

    Results are returned in block order regardless of completion order.
    """
    blocks = list(blocks)
    workers = min(worker_count(), len(blocks))
    if workers <= 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))
