"""Shared test utilities: finite-difference oracles and acceptance reporting."""

import numpy as np

# one line per acceptance criterion, printed by the terminal-summary hook
ACCEPTANCE_LINES = []


def record_criterion(num: int, desc: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    line = f"criterion {num:2d} {status} - {desc}"
    if detail:
        line += f" [{detail}]"
    ACCEPTANCE_LINES.append((num, line))
    return ok


def central_diff(f, x, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of scalar ``f`` at flat point ``x``.

    Independent derivative route used to cross-check every analytic
    gradient in the package.
    """
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g.reshape(x.shape)


def rel_err(got, want) -> float:
    got = np.asarray(got, dtype=float).ravel()
    want = np.asarray(want, dtype=float).ravel()
    scale = np.linalg.norm(want)
    if scale == 0.0:
        return float(np.linalg.norm(got - want))
    return float(np.linalg.norm(got - want) / scale)
