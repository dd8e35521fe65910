"""Concrete oscillator networks: rings, periodic lattices and custom couplings.

Sites of a lattice are linearized row-major, so site (i0, i1, ..., i_{d-1})
of a lattice with extents (L0, ..., L_{d-1}) has index
``np.ravel_multi_index((i0, ..., i_{d-1}), extents)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NotTranslationInvariant
from .spectral import check_coupling_matrix

VARIANTS = ("ring", "lattice", "custom")


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Description of an oscillator network.

    ``omega_w`` is the spring to the wall, ``omega_n`` the spring between
    nearest neighbours. For ``custom`` only ``matrix`` is used.
    """

    variant: str
    n: Optional[int] = None
    d: int = 1
    extent: tuple = ()
    omega_w: float = 0.0
    omega_n: float = 0.0
    periodic: bool = True
    matrix: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown model variant {self.variant!r}")
        if self.variant == "custom":
            if self.matrix is None:
                raise ValueError("custom model needs a matrix")
            object.__setattr__(self, "matrix", check_coupling_matrix(self.matrix))
            object.__setattr__(self, "n", self.matrix.shape[0])
            return
        if self.omega_w < 0 or self.omega_n < 0:
            raise ValueError("spring frequencies must be non-negative")
        if self.omega_w == 0 and self.omega_n == 0:
            raise ValueError("omega_w and omega_n cannot both vanish")
        if self.variant == "ring":
            if self.n is None or self.n < 1:
                raise ValueError("ring needs n >= 1")
            object.__setattr__(self, "d", 1)
            object.__setattr__(self, "extent", (int(self.n),))
            object.__setattr__(self, "periodic", True)
        else:
            ext = tuple(int(e) for e in self.extent)
            if self.d < 1 or len(ext) != self.d or min(ext) < 1:
                raise ValueError(f"lattice of dimension {self.d} needs {self.d} positive extents, got {ext}")
            object.__setattr__(self, "extent", ext)
            object.__setattr__(self, "n", int(np.prod(ext)))

    @classmethod
    def ring(cls, n: int, omega_w: float, omega_n: float) -> "ModelSpec":
        return cls("ring", n=n, omega_w=omega_w, omega_n=omega_n)

    @classmethod
    def lattice(cls, extent, omega_w: float, omega_n: float, periodic: bool = True) -> "ModelSpec":
        extent = tuple(extent)
        return cls("lattice", d=len(extent), extent=extent, omega_w=omega_w,
                   omega_n=omega_n, periodic=periodic)

    @classmethod
    def custom(cls, matrix) -> "ModelSpec":
        return cls("custom", matrix=np.asarray(matrix, dtype=float))

    @classmethod
    def from_nu(cls, extent, nu: float, omega0: float = 1.0, periodic: bool = True) -> "ModelSpec":
        """Build a ring (one extent) or lattice from omega_0 and the coupling ratio nu."""
        extent = (extent,) if np.isscalar(extent) else tuple(extent)
        d = len(extent)
        if not 0 <= nu <= 1 / (2 * d) + 1e-15:
            raise ValueError(f"nu must lie in [0, 1/(2d)] = [0, {1 / (2 * d)}]")
        w02 = omega0**2
        omega_n = math.sqrt(nu * w02)
        omega_w = math.sqrt(max(0.0, w02 * (1 - 2 * d * nu)))
        if d == 1 and periodic:
            return cls.ring(extent[0], omega_w, omega_n)
        return cls.lattice(extent, omega_w, omega_n, periodic)

    @property
    def translation_invariant(self) -> bool:
        return self.variant == "ring" or (self.variant == "lattice" and self.periodic)

    @property
    def omega0_sq(self) -> float:
        return self.omega_w**2 + 2 * self.d * self.omega_n**2

    @property
    def nu(self) -> float:
        return self.omega_n**2 / self.omega0_sq

    @property
    def critical(self) -> bool:
        """True at maximal coupling nu = 1/(2d), where a zero mode appears."""
        return self.variant != "custom" and self.omega_w == 0

    def to_dict(self) -> dict:
        if self.variant == "custom":
            return {"variant": "custom", "matrix": self.matrix.tolist()}
        if self.variant == "ring":
            return {"variant": "ring", "n": self.n, "omega_w": self.omega_w, "omega_n": self.omega_n}
        return {"variant": "lattice", "d": self.d, "extent": list(self.extent),
                "omega_w": self.omega_w, "omega_n": self.omega_n, "periodic": self.periodic}

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        """Parse the JSON model document.

        Ring and lattice documents give either ``omega_w``/``omega_n`` or
        ``nu`` (with optional ``omega0``, default 1).
        """
        doc = dict(doc)
        variant = doc.pop("variant", None)
        if variant == "custom":
            return cls.custom(doc["matrix"])
        if variant == "ring":
            n = int(doc["n"])
            if "nu" in doc:
                return cls.from_nu(n, float(doc["nu"]), float(doc.get("omega0", 1.0)))
            return cls.ring(n, float(doc["omega_w"]), float(doc["omega_n"]))
        if variant == "lattice":
            extent = tuple(int(e) for e in doc["extent"])
            if "d" in doc and int(doc["d"]) != len(extent):
                raise ValueError("lattice 'd' does not match the length of 'extent'")
            periodic = bool(doc.get("periodic", True))
            if "nu" in doc:
                return cls.from_nu(extent, float(doc["nu"]), float(doc.get("omega0", 1.0)), periodic)
            return cls.lattice(extent, float(doc["omega_w"]), float(doc["omega_n"]), periodic)
        raise ValueError(f"unknown model variant {variant!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_dict(json.loads(text))


def build_omega_squared(m: ModelSpec) -> np.ndarray:
    """Assemble the coupling matrix Omega^2.

    Periodic models use omega_0^2 on the diagonal and -omega_n^2 for each
    neighbour (repeated neighbours, as on a ring of two sites, accumulate).
    Open lattices keep only the springs that exist: the diagonal of site j is
    omega_w^2 + deg(j) omega_n^2.
    """
    if m.variant == "custom":
        return m.matrix.copy()
    ext = m.extent
    n = m.n
    w2n = m.omega_n**2
    out = np.zeros((n, n))
    for j in range(n):
        site = np.unravel_index(j, ext)
        deg = 0
        for axis in range(m.d):
            for step in (1, -1):
                nb = list(site)
                nb[axis] += step
                if m.periodic:
                    nb[axis] %= ext[axis]
                elif not 0 <= nb[axis] < ext[axis]:
                    continue
                out[j, np.ravel_multi_index(nb, ext)] -= w2n
                deg += 1
        out[j, j] += m.omega_w**2 + deg * w2n
    return out


def dispersion(m: ModelSpec, k) -> np.ndarray:
    """omega(k)^2 = omega_0^2 [1 - 2 nu sum_i cos(2 pi k_i)].

    ``k`` has trailing axis of length d (a scalar is accepted for d = 1).
    """
    if not m.translation_invariant:
        raise NotTranslationInvariant(f"{m.variant} model (periodic={m.periodic}) has no dispersion relation")
    k = np.asarray(k, dtype=float)
    if m.d == 1 and (k.ndim == 0 or k.shape[-1] != 1):
        k = k[..., None]
    if k.shape[-1] != m.d:
        raise ValueError(f"k must have trailing dimension {m.d}")
    # omega_w^2 + omega_n^2 sum_i (2 - 2 cos 2 pi k_i): exact zero at k = 0 when omega_w = 0
    return m.omega_w**2 + 2 * m.omega_n**2 * np.sum(1 - np.cos(2 * np.pi * k), axis=-1)


def reciprocal_grid(m: ModelSpec) -> np.ndarray:
    """Discrete wave vectors j/L on which a finite periodic model is diagonal."""
    axes = [np.arange(L) / L for L in m.extent]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)
