"""Kernel backend selection: compiled extension when available, else pure Python.

The two implementations are interchangeable; ``TRANSITVULN_BACKEND`` (auto,
compiled, python) or :func:`set_backend` pins one explicitly.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _speedups as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _pykernels}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def _resolve(name: str):
    if name == "auto":
        name = "compiled" if "compiled" in _BACKENDS else "python"
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown kernel backend {name!r}; available: {available_backends()}"
        )
    return name


_active_name = _resolve(os.environ.get("TRANSITVULN_BACKEND", "auto"))


def backend_name() -> str:
    return _active_name


def set_backend(name: str) -> str:
    """Switch the active backend; returns the previous one."""
    global _active_name
    previous = _active_name
    _active_name = _resolve(name)
    return previous


def lex_dijkstra(n_exp, indptr, nbr, w_time, w_tc, w_tt, sources):
    return _BACKENDS[_active_name].lex_dijkstra(
        n_exp, indptr, nbr, w_time, w_tc, w_tt, sources
    )


def first_loopless(
    n_stations,
    origin,
    exp_station,
    st_ptr,
    st_exp,
    dist_time,
    dist_tc,
    dist_tt,
    pred_ptr,
    pred_flat,
    budget,
):
    return _BACKENDS[_active_name].first_loopless(
        n_stations,
        origin,
        exp_station,
        st_ptr,
        st_exp,
        dist_time,
        dist_tc,
        dist_tt,
        pred_ptr,
        pred_flat,
        budget,
    )
