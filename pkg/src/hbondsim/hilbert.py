"""Finite Hilbert-space basis for the hydrogen-bond model.

Basis states are labelled tensor products |d> |p> |n>:

* ``d`` is the intermolecular distance label: 2 broken, 1 critical,
  0 close (bond possible), -1 stable bond;
* ``p`` is the proton level (0 ground, 1 excited);
* ``n`` is the phonon occupation number, 0 <= n <= n_max.

Two enumeration modes exist.  The ``restricted`` mode keeps only the
physically reachable states (a stable bond requires a ground-state proton,
separated molecules require an excited proton, and an excited proton caps
the phonon count one below n_max); at n_max = 1 this is the seven-state
space the model is built on.  The ``full`` mode enumerates the complete
tensor product and serves as a validation oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

DISTANCE_LABELS = (-1, 0, 1, 2)
PROTON_LABELS = (0, 1)
BASIS_MODES = ("restricted", "full")


class BasisState(NamedTuple):
    d: int
    p: int
    n: int

    def label(self) -> str:
        """Column label used in CSV output, e.g. ``d-1_p0_n0``."""
        return f"d{self.d}_p{self.p}_n{self.n}"

    def ket(self) -> str:
        return f"|{self.d},{self.p},{self.n}>"


def is_valid_state(s: BasisState, mode: str, n_max: int) -> bool:
    """Whether ``s`` belongs to the basis of the given mode and phonon cap."""
    if s.d not in DISTANCE_LABELS or s.p not in PROTON_LABELS:
        return False
    if not (0 <= s.n <= n_max):
        return False
    if mode == "full":
        return True
    # Restricted mode: the reachable-state pattern.
    if s.d == -1 and s.p != 0:
        return False
    if s.d in (1, 2) and s.p != 1:
        return False
    if s.p == 1 and s.n > n_max - 1:
        return False
    return True


@dataclass(frozen=True)
class Basis:
    """Ordered basis with a state -> index bijection.

    Ordering is descending lexicographic on (d, p, n), which reproduces the
    canonical seven-state listing at n_max = 1 and is stable across runs.
    Instances are immutable and safe to share between workers.
    """

    mode: str
    n_max: int
    states: tuple[BasisState, ...]
    index: dict[BasisState, int] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def state_index(self, s: BasisState | tuple) -> Optional[int]:
        """Index of ``s`` in this basis, or None if absent."""
        return self.index.get(BasisState(*s))

    def labels(self) -> list[str]:
        return [s.label() for s in self.states]

    def mask(self, predicate) -> list[bool]:
        """Boolean per basis state; used to build projectors and readouts."""
        return [bool(predicate(s)) for s in self.states]


def build_basis(mode: str, n_max: int) -> Basis:
    """Enumerate the basis for the given mode with phonon numbers up to n_max."""
    if mode not in BASIS_MODES:
        raise ValueError(f"mode must be one of {BASIS_MODES}, got {mode!r}")
    min_n = 1 if mode == "restricted" else 0
    if not isinstance(n_max, int) or n_max < min_n:
        raise ValueError(f"n_max must be an integer >= {min_n} in {mode} mode, got {n_max!r}")

    states = [
        BasisState(d, p, n)
        for d in DISTANCE_LABELS
        for p in PROTON_LABELS
        for n in range(n_max + 1)
        if is_valid_state(BasisState(d, p, n), mode, n_max)
    ]
    states.sort(key=lambda s: (-s.d, -s.p, -s.n))
    index = {s: i for i, s in enumerate(states)}
    return Basis(mode=mode, n_max=n_max, states=tuple(states), index=index)


def state_index(basis: Basis, s: BasisState | tuple) -> Optional[int]:
    """Functional alias for :meth:`Basis.state_index`."""
    return basis.state_index(s)


def parse_state(value: Iterable[int]) -> BasisState:
    """Build a BasisState from any (d, p, n) triple, validating field ranges."""
    triple = tuple(int(v) for v in value)
    if len(triple) != 3:
        raise ValueError(f"state must be a (d, p, n) triple, got {value!r}")
    s = BasisState(*triple)
    if s.d not in DISTANCE_LABELS:
        raise ValueError(f"distance label d must be in {DISTANCE_LABELS}, got {s.d}")
    if s.p not in PROTON_LABELS:
        raise ValueError(f"proton label p must be in {PROTON_LABELS}, got {s.p}")
    if s.n < 0:
        raise ValueError(f"phonon count n must be non-negative, got {s.n}")
    return s
