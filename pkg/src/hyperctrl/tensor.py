"""Sparse supersymmetric tensors and the multilinear primitives built on them.

A tensor of order k and dimension n is stored as a map from sorted index
multisets (``patterns``) to a scalar: every index tuple realizing a stored
pattern carries that per-tuple coefficient, and every other entry is zero.
Supersymmetry therefore holds by construction. Tensor-vector products are
evaluated matrix-free by walking the stored patterns and enumerating, for
each pivot index, the distinct arrangements of the remaining pattern
elements; the arrangement tables are precomputed once per tensor and the
contraction over them runs in a fused kernel (JIT-compiled when numba is
available, plain numpy otherwise).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _HAVE_NUMBA = False

# Dense materialization is a testing aid only; refuse anything that would
# allocate more than this many entries.
MAX_DENSE_ENTRIES = 10**6


class BlowupError(RuntimeError):
    """Raised when an integrated trajectory leaves the finite range.

    Carries the last finite sample so callers can inspect how far the
    integration got before the polynomial field blew up.
    """

    def __init__(self, time: float, state: np.ndarray):
        super().__init__(
            f"state became non-finite after t={time:.6g}; "
            "the polynomial drift has finite-time blow-up"
        )
        self.last_time = time
        self.last_state = state


@dataclass
class _Kernel:
    """Precomputed arrangement tables for the contraction kernels.

    One row per (pattern, pivot, arrangement): ``rows`` holds the output
    index, ``slots[l]`` the node feeding slot l, ``coefs`` the per-tuple
    coefficient.
    """

    rows: np.ndarray   # (R,) 0-based output row, ascending
    slots: np.ndarray  # (k-1, R) 0-based node index per slot
    coefs: np.ndarray  # (R,)


if _HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _fused_1(basis, ms, slots, coefs, rows, out):
        for r in range(coefs.shape[0]):
            j = rows[r]
            w = coefs[r]
            y0 = slots[0, r]
            for c in range(ms.shape[1]):
                out[j, c] += w * basis[y0, ms[0, c]]

    @numba.njit(cache=True, nogil=True)
    def _fused_2(basis, ms, slots, coefs, rows, out):
        for r in range(coefs.shape[0]):
            j = rows[r]
            w = coefs[r]
            y0 = slots[0, r]
            y1 = slots[1, r]
            for c in range(ms.shape[1]):
                out[j, c] += w * basis[y0, ms[0, c]] * basis[y1, ms[1, c]]

    @numba.njit(cache=True, nogil=True)
    def _fused_3(basis, ms, slots, coefs, rows, out):
        for r in range(coefs.shape[0]):
            j = rows[r]
            w = coefs[r]
            y0 = slots[0, r]
            y1 = slots[1, r]
            y2 = slots[2, r]
            for c in range(ms.shape[1]):
                out[j, c] += (
                    w
                    * basis[y0, ms[0, c]]
                    * basis[y1, ms[1, c]]
                    * basis[y2, ms[2, c]]
                )

    @numba.njit(cache=True, nogil=True)
    def _fused_4(basis, ms, slots, coefs, rows, out):
        for r in range(coefs.shape[0]):
            j = rows[r]
            w = coefs[r]
            y0 = slots[0, r]
            y1 = slots[1, r]
            y2 = slots[2, r]
            y3 = slots[3, r]
            for c in range(ms.shape[1]):
                out[j, c] += (
                    w
                    * basis[y0, ms[0, c]]
                    * basis[y1, ms[1, c]]
                    * basis[y2, ms[2, c]]
                    * basis[y3, ms[3, c]]
                )

    @numba.njit(cache=True, nogil=True)
    def _fused_5(basis, ms, slots, coefs, rows, out):
        for r in range(coefs.shape[0]):
            j = rows[r]
            w = coefs[r]
            y0 = slots[0, r]
            y1 = slots[1, r]
            y2 = slots[2, r]
            y3 = slots[3, r]
            y4 = slots[4, r]
            for c in range(ms.shape[1]):
                out[j, c] += (
                    w
                    * basis[y0, ms[0, c]]
                    * basis[y1, ms[1, c]]
                    * basis[y2, ms[2, c]]
                    * basis[y3, ms[3, c]]
                    * basis[y4, ms[4, c]]
                )

    @numba.njit(cache=True, nogil=True)
    def _fused_any(basis, ms, slots, coefs, rows, out):
        L = slots.shape[0]
        for r in range(coefs.shape[0]):
            j = rows[r]
            w = coefs[r]
            for c in range(ms.shape[1]):
                p = w
                for l in range(L):
                    p *= basis[slots[l, r], ms[l, c]]
                out[j, c] += p

    _FUSED = {1: _fused_1, 2: _fused_2, 3: _fused_3, 4: _fused_4, 5: _fused_5}


def _apply_multisets_ref(
    kernel: _Kernel, basis: np.ndarray, ms: np.ndarray, out: np.ndarray
):
    """Pure-numpy reference for the fused kernels (also the fallback)."""
    L = kernel.slots.shape[0]
    prod = basis[:, ms[0]][kernel.slots[0], :]
    for l in range(1, L):
        prod *= basis[:, ms[l]][kernel.slots[l], :]
    prod *= kernel.coefs[:, None]
    starts = np.flatnonzero(np.r_[True, kernel.rows[1:] != kernel.rows[:-1]])
    out[kernel.rows[starts]] += np.add.reduceat(prod, starts, axis=0)


def _apply_multisets(
    tensor: "AdjacencyTensor", basis: np.ndarray, ms: np.ndarray
) -> np.ndarray:
    """Contract the tensor against columns of ``basis`` selected by ``ms``.

    ``ms`` has shape (k-1, q); result column c is the tensor applied to the
    basis columns ms[0, c], ..., ms[k-2, c].
    """
    n = tensor.dim
    q = ms.shape[1]
    out = np.zeros((n, q))
    kern = tensor.kernel()
    if kern.coefs.size == 0 or q == 0:
        return out
    basis = np.ascontiguousarray(basis, dtype=np.float64)
    ms = np.ascontiguousarray(ms, dtype=np.intp)
    if _HAVE_NUMBA:
        L = kern.slots.shape[0]
        fused = _FUSED.get(L, _fused_any)
        fused(basis, ms, kern.slots, kern.coefs, kern.rows, out)
    else:
        _apply_multisets_ref(kern, basis, ms, out)
    return out


@dataclass(frozen=True)
class AdjacencyTensor:
    """Order-k, dimension-n supersymmetric tensor in pattern-sparse form.

    ``entries`` maps a sorted index multiset (1-based node indices, length k)
    to the coefficient carried by every index tuple realizing that multiset.
    ``order`` and ``dim`` are immutable after construction.
    """

    order: int
    dim: int
    entries: dict
    _kernel: _Kernel | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"tensor order must be >= 2, got {self.order}")
        if self.dim < 1:
            raise ValueError(f"tensor dimension must be >= 1, got {self.dim}")
        for pattern, value in self.entries.items():
            if len(pattern) != self.order:
                raise ValueError(
                    f"pattern {pattern} has length {len(pattern)}, expected {self.order}"
                )
            if tuple(sorted(pattern)) != tuple(pattern):
                raise ValueError(f"pattern {pattern} is not sorted")
            if not all(1 <= j <= self.dim for j in pattern):
                raise ValueError(f"pattern {pattern} has indices outside [1, {self.dim}]")
            if not math.isfinite(value):
                raise ValueError(f"pattern {pattern} carries non-finite weight {value!r}")

    def entry(self, indices: Sequence[int]) -> float:
        """Tensor entry at an index tuple; invariant under index permutation."""
        if len(indices) != self.order:
            raise ValueError(
                f"expected {self.order} indices for an order-{self.order} tensor, "
                f"got {len(indices)}"
            )
        return self.entries.get(tuple(sorted(indices)), 0.0)

    def kernel(self) -> _Kernel:
        if self._kernel is None:
            object.__setattr__(self, "_kernel", _build_kernel(self))
        return self._kernel


def _build_kernel(tensor: AdjacencyTensor) -> _Kernel:
    k = tensor.order
    rows: list[int] = []
    coefs: list[float] = []
    slot_idx: list[list[int]] = [[] for _ in range(k - 1)]
    for pattern in sorted(tensor.entries):
        coef = tensor.entries[pattern]
        for pivot in sorted(set(pattern)):
            rest = list(pattern)
            rest.remove(pivot)
            for sigma in sorted(set(itertools.permutations(rest))):
                rows.append(pivot - 1)
                coefs.append(coef)
                for slot, node in enumerate(sigma):
                    slot_idx[slot].append(node - 1)
    row_arr = np.asarray(rows, dtype=np.intp)
    order = np.argsort(row_arr, kind="stable")
    return _Kernel(
        rows=np.ascontiguousarray(row_arr[order]),
        slots=np.ascontiguousarray(
            np.asarray(slot_idx, dtype=np.intp).reshape(k - 1, -1)[:, order]
        ),
        coefs=np.ascontiguousarray(np.asarray(coefs, dtype=np.float64)[order]),
    )


def ttv_multi_cols(tensor: AdjacencyTensor, mats: Sequence[np.ndarray]) -> np.ndarray:
    """Apply the tensor to k-1 column stacks at once.

    ``mats`` holds k-1 arrays of shape (n, q); column c of the result is the
    tensor applied to the c-th column of each stack. Equivalent to q calls
    of :func:`ttv_multi` with shared arrangement tables.
    """
    k, n = tensor.order, tensor.dim
    if len(mats) != k - 1:
        raise ValueError(
            f"expected {k - 1} column stacks for an order-{k} tensor, got {len(mats)}"
        )
    mats = [np.asarray(m, dtype=np.float64) for m in mats]
    q = mats[0].shape[1] if mats[0].ndim == 2 else -1
    for pos, m in enumerate(mats):
        if m.ndim != 2 or m.shape != (n, q):
            raise ValueError(
                f"column stack at position {pos} has shape {m.shape}, expected ({n}, {q})"
            )
    stacked = np.hstack(mats) if mats else np.zeros((n, 0))
    ms = np.vstack([np.arange(q, dtype=np.intp) + l * q for l in range(k - 1)])
    return _apply_multisets(tensor, stacked, ms)


def ttv_multi(tensor: AdjacencyTensor, vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Contract the tensor with k-1 vectors, returning a length-n vector.

    Component j of the result sums tensor entries with first index j against
    the product of the supplied vectors over the remaining indices.

    Raises:
        ValueError: wrong vector count for the tensor order, or a vector
            whose length differs from the tensor dimension.
    """
    k, n = tensor.order, tensor.dim
    if len(vectors) != k - 1:
        raise ValueError(
            f"expected {k - 1} vectors for an order-{k} tensor, got {len(vectors)}"
        )
    cols = []
    for pos, v in enumerate(vectors):
        arr = np.asarray(v, dtype=np.float64)
        if arr.shape != (n,):
            raise ValueError(
                f"vector at position {pos} has shape {arr.shape}, expected ({n},)"
            )
        cols.append(arr)
    basis = np.column_stack(cols)
    ms = np.arange(k - 1, dtype=np.intp).reshape(k - 1, 1)
    return _apply_multisets(tensor, basis, ms)[:, 0]


def drift(tensor: AdjacencyTensor, x: np.ndarray) -> np.ndarray:
    """Evaluate the homogeneous degree-(k-1) drift field at state x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (tensor.dim,):
        raise ValueError(f"state has shape {x.shape}, expected ({tensor.dim},)")
    basis = x.reshape(-1, 1)
    ms = np.zeros((tensor.order - 1, 1), dtype=np.intp)
    return _apply_multisets(tensor, basis, ms)[:, 0]


def dense_tensor(tensor: AdjacencyTensor) -> np.ndarray:
    """Materialize the full n^k array. Testing aid, not a production path."""
    n, k = tensor.dim, tensor.order
    if n**k > MAX_DENSE_ENTRIES:
        raise ValueError(
            f"dense materialization of {n}^{k} entries exceeds the "
            f"{MAX_DENSE_ENTRIES} guard"
        )
    dense = np.zeros((n,) * k)
    for pattern, coef in tensor.entries.items():
        for tup in set(itertools.permutations(pattern)):
            dense[tuple(j - 1 for j in tup)] = coef
    return dense


@dataclass(frozen=True)
class ControlMatrix:
    """Control attachment points: column j of B is the basis vector e_nodes[j].

    All input channels act with unit scale; the controllability rank is
    invariant under nonzero column rescaling, so nothing is lost.
    """

    nodes: tuple

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(int(j) for j in self.nodes))
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"control nodes must be distinct, got {self.nodes}")
        if any(j < 1 for j in self.nodes):
            raise ValueError(f"control nodes must be >= 1, got {self.nodes}")

    @property
    def m(self) -> int:
        return len(self.nodes)

    def matrix(self, n: int) -> np.ndarray:
        """Dense n x m matrix of standard basis columns."""
        if any(j > n for j in self.nodes):
            raise ValueError(f"control nodes {self.nodes} exceed dimension {n}")
        mat = np.zeros((n, len(self.nodes)))
        for col, j in enumerate(self.nodes):
            mat[j - 1, col] = 1.0
        return mat


@dataclass(frozen=True)
class InputSchedule:
    """Piecewise-constant input signal over [0, T].

    ``times`` are strictly increasing breakpoints starting at 0; row i of
    ``values`` holds from times[i] until the next breakpoint.
    """

    times: tuple
    values: np.ndarray

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if len(times) == 0:
            raise ValueError("schedule needs at least one breakpoint")
        if times[0] != 0.0:
            raise ValueError(f"first breakpoint must be t=0, got {times[0]}")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("breakpoint times must be strictly increasing")
        if values.shape[0] != len(times):
            raise ValueError(
                f"{len(times)} breakpoints but {values.shape[0]} value rows"
            )
        if not np.isfinite(values).all():
            raise ValueError("schedule values must be finite")

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    @classmethod
    def constant(cls, u: Sequence[float]) -> "InputSchedule":
        return cls((0.0,), np.asarray(u, dtype=np.float64).reshape(1, -1))

    def value_at(self, t: float) -> np.ndarray:
        idx = 0
        for i, brk in enumerate(self.times):
            if brk <= t:
                idx = i
            else:
                break
        return self.values[idx]


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the controlled dynamics."""

    times: np.ndarray
    states: np.ndarray  # len(times) x n

    def __iter__(self):
        return ((t, x) for t, x in zip(self.times, self.states))

    def final(self) -> np.ndarray:
        return self.states[-1]


def simulate(
    tensor: AdjacencyTensor,
    controls: ControlMatrix,
    x0: np.ndarray,
    schedule: InputSchedule | None = None,
    T: float = 1.0,
    dt: float = 1e-3,
) -> Trajectory:
    """Integrate dx/dt = (drift at x) + B u(t) with classical fixed-step RK4.

    The input is piecewise constant per ``schedule`` (zero when omitted).
    The final sample lands exactly at t=T; the last step is shortened when
    T/dt is not integral.

    Raises:
        BlowupError: the state left the finite range; the exception carries
            the last finite sample and its time.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T}")
    x = np.asarray(x0, dtype=np.float64).copy()
    if x.shape != (tensor.dim,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({tensor.dim},)")
    if not np.isfinite(x).all():
        raise ValueError("x0 must be finite")
    B = controls.matrix(tensor.dim)
    if schedule is None and controls.m:
        schedule = InputSchedule.constant(np.zeros(controls.m))
    if schedule is not None and schedule.channels != controls.m:
        raise ValueError(
            f"schedule has {schedule.channels} channels but B has {controls.m} columns"
        )

    def field_at(t: float, state: np.ndarray) -> np.ndarray:
        out = drift(tensor, state)
        if controls.m:
            out = out + B @ schedule.value_at(t)
        return out

    times = [0.0]
    states = [x.copy()]
    t = 0.0
    while t < T - 1e-12:
        h = min(dt, T - t)
        k1 = field_at(t, x)
        k2 = field_at(t + h / 2, x + (h / 2) * k1)
        k3 = field_at(t + h / 2, x + (h / 2) * k2)
        k4 = field_at(t + h, x + h * k3)
        x_next = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(x_next).all():
            raise BlowupError(t, x)
        t += h
        x = x_next
        times.append(t)
        states.append(x.copy())
    return Trajectory(np.asarray(times), np.asarray(states))
