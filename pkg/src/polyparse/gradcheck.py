"""Central finite-difference checks for analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .autodiff import Tensor


@dataclass
class GradMismatch:
    name: str
    index: tuple
    analytic: float
    numeric: float
    rel_error: float


def relative_error(a: float, n: float, floor: float = 1e-8) -> float:
    return abs(a - n) / max(abs(a) + abs(n), floor)


def numeric_grad(f: Callable[[], float], arr: np.ndarray, index: tuple, eps: float = 1e-5) -> float:
    old = arr[index]
    arr[index] = old + eps
    up = f()
    arr[index] = old - eps
    down = f()
    arr[index] = old
    return (up - down) / (2 * eps)


def check_gradients(
    f: Callable[[], float],
    params: Mapping[str, Tensor],
    analytic: Mapping[str, np.ndarray],
    *,
    eps: float = 1e-5,
    tol: float = 1e-4,
    atol: float = 1e-9,
    per_tensor: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[int, list[GradMismatch]]:
    """Compare ``analytic`` gradients against central differences of ``f``.

    ``f`` must recompute the scalar loss from the current parameter values.
    With ``per_tensor`` set, only that many entries per tensor are checked:
    the largest-magnitude analytic entries plus random others.  Returns the
    number of entries checked and the list of mismatches above ``tol``.
    Differences below ``atol`` are round-off in the difference quotient and
    never count as mismatches.
    """
    rng = rng or np.random.default_rng(0)
    bad: list[GradMismatch] = []
    checked = 0
    for name, p in params.items():
        g = analytic[name]
        flat = np.arange(p.value.size)
        if per_tensor is not None and p.value.size > per_tensor:
            top = np.argsort(-np.abs(g).reshape(-1))[: per_tensor // 2]
            rest = rng.choice(np.setdiff1d(flat, top), per_tensor - len(top), replace=False)
            flat = np.concatenate([top, rest])
        for k in flat:
            idx = np.unravel_index(int(k), p.value.shape)
            num = numeric_grad(f, p.value, idx, eps)
            ana = float(g[idx])
            checked += 1
            err = relative_error(ana, num)
            if err > tol and abs(ana - num) > atol:
                bad.append(GradMismatch(name, idx, ana, num, err))
    return checked, bad
