"""Hot kernels with a compiled implementation and a numpy fallback.

The compiled extension ``_fockkernel`` is used when it was built; setting
``TRIMERHEAT_KERNEL=python`` forces the fallback.  ``BACKEND`` names the
active choice.
"""

from __future__ import annotations

import itertools
import os
from functools import cached_property

import numpy as np

try:
    from . import _fockkernel as _compiled
except ImportError:  # extension not built
    _compiled = None

if os.environ.get("TRIMERHEAT_KERNEL", "").lower() == "python":
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


class SectorBasis:
    """Three-mode number basis ``0 <= n_l <= n_max`` grouped by total number.

    A density matrix commuting with the total number is stored as the
    concatenation of its row-major diagonal blocks (one per sector).
    """

    n_modes = 3

    def __init__(self, n_max: int):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        self.n_max = n_max
        states = sorted(itertools.product(range(n_max + 1), repeat=3), key=lambda s: (sum(s), s))
        self.occ = np.array(states, dtype=np.int64)
        self.n_states = len(states)
        totals = self.occ.sum(axis=1)
        n_sec = 3 * n_max + 1
        self.sector_dim = np.bincount(totals, minlength=n_sec).astype(np.int64)
        self.sector_start = np.concatenate([[0], np.cumsum(self.sector_dim)[:-1]]).astype(np.int64)
        self.block_offset = np.concatenate([[0], np.cumsum(self.sector_dim**2)[:-1]]).astype(np.int64)
        self.size = int(np.sum(self.sector_dim**2))
        self.sector = totals.astype(np.int64)
        self.local = np.arange(self.n_states) - self.sector_start[self.sector]

        lookup = -np.ones((n_max + 1,) * 3, dtype=np.int64)
        lookup[tuple(self.occ.T)] = np.arange(self.n_states)
        self._lookup = lookup

        def find(shift):
            t = self.occ + shift
            ok = np.all((t >= 0) & (t <= n_max), axis=1)
            idx = np.full(self.n_states, -1, dtype=np.int64)
            idx[ok] = lookup[tuple(t[ok].T)]
            return idx

        eye = np.eye(3, dtype=np.int64)
        self.up = np.stack([find(eye[l]) for l in range(3)])
        self.down = np.stack([find(-eye[l]) for l in range(3)])
        # hop_idx[a, b, s] = index of s - e_a + e_b, the ket that a_a^dag a_b maps onto s
        self.hop_idx = -np.ones((3, 3, self.n_states), dtype=np.int64)
        self.hop_amp = np.zeros((3, 3, self.n_states))
        for a in range(3):
            for b in range(3):
                if a == b:
                    continue
                idx = find(eye[b] - eye[a])
                self.hop_idx[a, b] = idx
                amp = np.sqrt(self.occ[:, a] * (self.occ[:, b] + 1.0))
                self.hop_amp[a, b] = np.where(idx >= 0, amp, 0.0)

    def position(self, s, sp):
        """Packed offset of element ``(s, sp)``; both states must share a sector."""
        s = np.asarray(s)
        sp = np.asarray(sp)
        sec = self.sector[s]
        return self.block_offset[sec] + self.local[s] * self.sector_dim[sec] + self.local[sp]

    @cached_property
    def elements(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column state of every packed element, in packed order."""
        rows, cols = [], []
        for N, d in enumerate(self.sector_dim):
            st = self.sector_start[N]
            r, c = np.divmod(np.arange(d * d), d)
            rows.append(st + r)
            cols.append(st + c)
        return np.concatenate(rows), np.concatenate(cols)

    @cached_property
    def diagonal_positions(self) -> np.ndarray:
        s = np.arange(self.n_states)
        return self.position(s, s)

    def blocks(self, rho):
        """Split a packed vector into square sector blocks (views)."""
        out = []
        for N, d in enumerate(self.sector_dim):
            off = self.block_offset[N]
            out.append(rho[off : off + d * d].reshape(d, d))
        return out


class _GatherTables:
    """The stencil as ``T`` gather terms: ``L(rho)[k] = diag[k] rho[k] + sum_t coef[k, t] rho[src[k, t]]``.

    Out-of-range neighbours get coefficient 0 and point at ``k`` itself.
    """

    def __init__(self, basis: SectorBasis, h, loss, gain):
        b = basis
        s, sp = b.elements
        srcs, coefs = [], []

        def add(src, ok, coef):
            srcs.append(np.where(ok, src, np.arange(b.size)).astype(np.int64))
            coefs.append(np.where(ok, coef, 0.0).astype(complex))

        diag = np.zeros(b.size)
        for a in range(3):
            for c in range(3):
                if a == c or h[a, c] == 0:
                    continue
                k = b.hop_idx[a, c, s]
                ok = k >= 0
                add(b.position(np.where(ok, k, s), sp), ok, -1j * h[a, c] * b.hop_amp[a, c, s])
                k = b.hop_idx[c, a, sp]
                ok = k >= 0
                add(b.position(s, np.where(ok, k, sp)), ok, 1j * h[a, c] * b.hop_amp[c, a, sp])
        for l in range(3):
            nl, npl = b.occ[s, l], b.occ[sp, l]
            if loss[l] != 0:
                u, v = b.up[l, s], b.up[l, sp]
                ok = (u >= 0) & (v >= 0)
                add(b.position(np.where(ok, u, s), np.where(ok, v, sp)), ok, loss[l] * np.sqrt((nl + 1.0) * (npl + 1.0)))
                diag += 0.5 * loss[l] * (nl + npl)
            if gain[l] != 0:
                u, v = b.down[l, s], b.down[l, sp]
                ok = (u >= 0) & (v >= 0)
                add(b.position(np.where(ok, u, s), np.where(ok, v, sp)), ok, gain[l] * np.sqrt(nl * npl * 1.0))
                # a a^dag acts as n + 1 below the cutoff and as 0 on the top level
                f = np.where(nl < b.n_max, nl + 1.0, 0.0) + np.where(npl < b.n_max, npl + 1.0, 0.0)
                diag += 0.5 * gain[l] * f
        self.diag = np.ascontiguousarray(-diag)
        if srcs:
            self.src = np.ascontiguousarray(np.stack(srcs, axis=1))
            self.coef = np.ascontiguousarray(np.stack(coefs, axis=1))
        else:
            self.src = np.zeros((b.size, 0), dtype=np.int64)
            self.coef = np.zeros((b.size, 0), dtype=complex)

    def python(self, rho, out=None):
        res = self.diag * rho
        for t in range(self.src.shape[1]):
            res += self.coef[:, t] * rho[self.src[:, t]]
        if out is not None:
            out[:] = res
            return out
        return res


class LindbladRHS:
    """Callable ``rho -> L(rho)`` on a :class:`SectorBasis` packed vector.

    ``h`` is the 3x3 hopping matrix (diagonal ignored: it commutes with every
    sector block); ``loss`` and ``gain`` are the per-site rates of the
    ``a_l`` and ``a_l^dag`` jump operators.
    """

    def __init__(self, basis: SectorBasis, h, loss, gain, backend: str | None = None):
        backend = backend or BACKEND
        if backend not in available_backends():
            raise ValueError(f"kernel backend {backend!r} is not available")
        self.basis = basis
        self.backend = backend
        h = np.array(h, dtype=complex)
        np.fill_diagonal(h, 0.0)
        self.h = h
        self.loss = np.asarray(loss, dtype=float)
        self.gain = np.asarray(gain, dtype=float)
        self.tables = _GatherTables(basis, h, self.loss, self.gain)

    def __call__(self, rho, out=None):
        rho = np.ascontiguousarray(rho, dtype=complex)
        if self.backend == "python":
            return self.tables.python(rho, out)
        if out is None:
            out = np.empty_like(rho)
        t = self.tables
        _compiled.gather_rhs(rho, out, t.diag, t.src, t.coef)
        return out
