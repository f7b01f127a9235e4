"""Hot loops behind a backend switch (see :mod:`nkcollab._accel`)."""

from .._accel import BACKEND

if BACKEND == "numba":
    from ._nb import (
        best_neighbor_sources,
        bfs_distance_sums,
        conformity_sources,
        fitness_batch,
        global_best_flips,
        local_best_flips,
        locus_indices,
        shared_local_flips,
        unit_max_flow,
    )
else:
    from ._np import (
        best_neighbor_sources,
        bfs_distance_sums,
        conformity_sources,
        fitness_batch,
        global_best_flips,
        local_best_flips,
        locus_indices,
        shared_local_flips,
        unit_max_flow,
    )

__all__ = [
    "BACKEND",
    "best_neighbor_sources",
    "bfs_distance_sums",
    "conformity_sources",
    "fitness_batch",
    "global_best_flips",
    "local_best_flips",
    "locus_indices",
    "shared_local_flips",
    "unit_max_flow",
]
