"""Finite-dimensional *-algebras with a faithful state and automorphism group.

An algebra is a direct sum of full matrix blocks ``⊕_k M_{n_k}``. The
canonical basis consists of the matrix units of every block, ordered
block-major then row-major; all coordinate conventions downstream (GNS
spaces, joining matrices) refer to this ordering.

An automorphism is stored in the normal form ``a ↦ u · perm(a) · u*`` where
``perm`` permutes blocks of equal size and ``u`` is a block-diagonal unitary.
Every *-automorphism of a finite direct sum of matrix blocks is of this form.
The permutation uses the pull convention: output block ``k`` reads input
block ``perm[k]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidSystemError,
    StructureError,
)

VALIDATION_TOL = 1e-9
FAITHFULNESS_MIN_EIG = 1e-12


def _as_complex(m) -> np.ndarray:
    return np.asarray(m, dtype=complex)


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


@dataclass(frozen=True)
class BlockStructure:
    """Shape of ``⊕_k M_{n_k}``; total dimension is the sum of squares."""

    block_sizes: tuple[int, ...]

    def __post_init__(self):
        if len(self.block_sizes) == 0:
            raise StructureError("block structure needs at least one block")
        for k, n in enumerate(self.block_sizes):
            if not isinstance(n, int) or n < 1:
                raise StructureError(f"block {k} has invalid size {n!r}")
        object.__setattr__(self, "block_sizes", tuple(self.block_sizes))

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    @property
    def dimension(self) -> int:
        return sum(n * n for n in self.block_sizes)

    @property
    def matrix_size(self) -> int:
        """Side length of the block-diagonal matrix embedding."""
        return sum(self.block_sizes)

    def offsets(self) -> list[int]:
        offs, acc = [], 0
        for n in self.block_sizes:
            offs.append(acc)
            acc += n * n
        return offs

    def basis_index(self, block: int, row: int, col: int) -> int:
        n = self.block_sizes[block]
        return self.offsets()[block] + row * n + col

    def basis_address(self, i: int) -> tuple[int, int, int]:
        """Inverse of basis_index: canonical index -> (block, row, col)."""
        for k, (off, n) in enumerate(zip(self.offsets(), self.block_sizes)):
            if i < off + n * n:
                r, c = divmod(i - off, n)
                return k, r, c
        raise IndexError(f"basis index {i} out of range")

    def adjoint_index(self, i: int) -> int:
        """Index of the adjoint of basis element i (matrix-unit transpose)."""
        k, r, c = self.basis_address(i)
        return self.basis_index(k, c, r)

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.zeros((n, n), dtype=complex) for n in self.block_sizes])

    def identity(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.eye(n, dtype=complex) for n in self.block_sizes])

    def basis_element(self, i: int) -> "AlgebraElement":
        k, r, c = self.basis_address(i)
        a = self.zero()
        a.blocks[k][r, c] = 1.0
        return a

    def coords(self, a: "AlgebraElement") -> np.ndarray:
        """Coordinates in the canonical matrix-unit basis (length ``dimension``)."""
        return np.concatenate([b.reshape(-1) for b in a.blocks])

    def from_coords(self, v) -> "AlgebraElement":
        v = _as_complex(v).reshape(-1)
        if v.size != self.dimension:
            raise DimensionMismatchError(
                f"coordinate vector has length {v.size}, expected {self.dimension}")
        blocks, pos = [], 0
        for n in self.block_sizes:
            blocks.append(v[pos:pos + n * n].reshape(n, n).copy())
            pos += n * n
        return AlgebraElement(self, blocks)

    def from_block_matrix(self, m, tol: float = VALIDATION_TOL) -> "AlgebraElement":
        """Slice a block-diagonal matrix into blocks; off-block mass is an error."""
        m = _as_complex(m)
        size = self.matrix_size
        if m.shape != (size, size):
            raise StructureError(f"matrix shape {m.shape} does not match blocks {self.block_sizes}")
        blocks, pos = [], 0
        for n in self.block_sizes:
            blocks.append(m[pos:pos + n, pos:pos + n].copy())
            pos += n
        rebuilt = _block_diag([b for b in blocks], size)
        off = operator_norm(m - rebuilt)
        if off > tol:
            raise StructureError(f"matrix has off-block entries of norm {off:.3e}")
        return AlgebraElement(self, blocks)


def _block_diag(blocks, size):
    out = np.zeros((size, size), dtype=complex)
    pos = 0
    for b in blocks:
        n = b.shape[0]
        out[pos:pos + n, pos:pos + n] = b
        pos += n
    return out


@dataclass
class AlgebraElement:
    """Element of ``⊕_k M_{n_k}``, stored blockwise. Treated as immutable."""

    structure: BlockStructure
    blocks: list[np.ndarray]

    def __post_init__(self):
        if len(self.blocks) != self.structure.num_blocks:
            raise StructureError("block count mismatch")
        fixed = []
        for k, (b, n) in enumerate(zip(self.blocks, self.structure.block_sizes)):
            b = _as_complex(b)
            if b.shape != (n, n):
                raise StructureError(f"block {k} has shape {b.shape}, expected ({n}, {n})")
            fixed.append(b)
        self.blocks = fixed

    def _check_same(self, other: "AlgebraElement"):
        if self.structure.block_sizes != other.structure.block_sizes:
            raise DimensionMismatchError(
                f"block structures differ: {self.structure.block_sizes} vs "
                f"{other.structure.block_sizes}")

    def __add__(self, other):
        self._check_same(other)
        return AlgebraElement(self.structure, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check_same(other)
        return AlgebraElement(self.structure, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement(self.structure, [-b for b in self.blocks])

    def __rmul__(self, scalar):
        return AlgebraElement(self.structure, [complex(scalar) * b for b in self.blocks])

    def __matmul__(self, other):
        self._check_same(other)
        return AlgebraElement(self.structure, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.structure, [b.conj().T for b in self.blocks])

    def coords(self) -> np.ndarray:
        return self.structure.coords(self)

    def transpose(self) -> "AlgebraElement":
        return AlgebraElement(self.structure, [b.T.copy() for b in self.blocks])

    def norm(self) -> float:
        """Operator norm: max over blocks of the largest singular value."""
        return max(operator_norm(b) for b in self.blocks)

    def block_matrix(self) -> np.ndarray:
        return _block_diag(self.blocks, self.structure.matrix_size)

    def isclose(self, other, tol=1e-10) -> bool:
        self._check_same(other)
        return (self - other).norm() <= tol


@dataclass
class FaithfulState:
    """State ``a ↦ trace(ρ a)`` given by a block-diagonal density ρ.

    Faithful means ρ is strictly positive definite; normalization is
    ``trace(ρ) = 1`` over the whole block-diagonal matrix.
    """

    structure: BlockStructure
    density: list[np.ndarray]

    def __post_init__(self):
        if len(self.density) != self.structure.num_blocks:
            raise StructureError("density block count mismatch")
        fixed = []
        for k, (b, n) in enumerate(zip(self.density, self.structure.block_sizes)):
            b = _as_complex(b)
            if b.shape != (n, n):
                raise StructureError(f"density block {k} has shape {b.shape}, expected ({n}, {n})")
            fixed.append(b)
        self.density = fixed

    def value(self, a: AlgebraElement) -> complex:
        if a.structure.block_sizes != self.structure.block_sizes:
            raise DimensionMismatchError("state and element block structures differ")
        return complex(sum(np.trace(r @ b) for r, b in zip(self.density, a.blocks)))

    def density_element(self) -> AlgebraElement:
        return AlgebraElement(self.structure, [b.copy() for b in self.density])

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh((b + b.conj().T) / 2).min()) for b in self.density)

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.density))

    def hermiticity_residual(self) -> float:
        return max(operator_norm(b - b.conj().T) for b in self.density)


def uniform_state(structure: BlockStructure) -> FaithfulState:
    """Normalized multiple of the identity in every block (tracial)."""
    size = structure.matrix_size
    return FaithfulState(
        structure, [np.eye(n, dtype=complex) / size for n in structure.block_sizes])


@dataclass
class Automorphism:
    """Normal form ``a ↦ u · perm(a) · u*``; output block k reads input block perm[k]."""

    structure: BlockStructure
    block_perm: tuple[int, ...]
    conjugator: list[np.ndarray]

    def __post_init__(self):
        sizes = self.structure.block_sizes
        m = len(sizes)
        perm = tuple(self.block_perm)
        if sorted(perm) != list(range(m)):
            raise StructureError(f"block_perm {perm} is not a permutation of 0..{m - 1}")
        for k in range(m):
            if sizes[perm[k]] != sizes[k]:
                raise StructureError(
                    f"block_perm maps block {perm[k]} (size {sizes[perm[k]]}) onto "
                    f"block {k} (size {sizes[k]})")
        object.__setattr__(self, "block_perm", perm)
        fixed = []
        for k, (u, n) in enumerate(zip(self.conjugator, sizes)):
            u = _as_complex(u)
            if u.shape != (n, n):
                raise StructureError(f"conjugator block {k} has shape {u.shape}, expected ({n}, {n})")
            fixed.append(u)
        self.conjugator = fixed

    def apply(self, a: AlgebraElement) -> AlgebraElement:
        if a.structure.block_sizes != self.structure.block_sizes:
            raise DimensionMismatchError("automorphism and element block structures differ")
        blocks = [
            u @ a.blocks[p] @ u.conj().T
            for u, p in zip(self.conjugator, self.block_perm)
        ]
        return AlgebraElement(self.structure, blocks)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other: (self.compose(other)).apply(a) == self.apply(other.apply(a))."""
        perm = tuple(other.block_perm[p] for p in self.block_perm)
        conj = [
            self.conjugator[k] @ other.conjugator[self.block_perm[k]]
            for k in range(self.structure.num_blocks)
        ]
        return Automorphism(self.structure, perm, conj)

    def inverse(self) -> "Automorphism":
        m = self.structure.num_blocks
        inv_perm = [0] * m
        for k, p in enumerate(self.block_perm):
            inv_perm[p] = k
        conj = [self.conjugator[inv_perm[j]].conj().T for j in range(m)]
        return Automorphism(self.structure, tuple(inv_perm), conj)

    def power(self, n: int) -> "Automorphism":
        base = self if n >= 0 else self.inverse()
        out = identity_automorphism(self.structure)
        for _ in range(abs(n)):
            out = base.compose(out)
        return out

    def unitarity_residual(self) -> float:
        return max(
            operator_norm(u.conj().T @ u - np.eye(u.shape[0]))
            for u in self.conjugator
        )


def identity_automorphism(structure: BlockStructure) -> Automorphism:
    return Automorphism(
        structure,
        tuple(range(structure.num_blocks)),
        [np.eye(n, dtype=complex) for n in structure.block_sizes],
    )


@dataclass(frozen=True)
class GroupDescriptor:
    """Acting group: Z (one generator), Z^k (k commuting generators), or Z_m.

    Folner sets used for averages: boxes {1..N} for Z, cubes {1..N}^k for
    Z^k, and the whole group for Z_m.
    """

    kind: str
    k: int = 1
    m: int | None = None

    def __post_init__(self):
        if self.kind not in ("Z", "Zk", "Zm"):
            raise StructureError(f"unknown group kind {self.kind!r}")
        if self.kind == "Zk" and self.k < 1:
            raise StructureError("Zk needs k >= 1")
        if self.kind == "Zm" and (self.m is None or self.m < 1):
            raise StructureError("Zm needs m >= 1")

    @property
    def num_generators(self) -> int:
        return self.k if self.kind == "Zk" else 1

    @property
    def is_abelian(self) -> bool:
        return True

    @property
    def is_finite(self) -> bool:
        return self.kind == "Zm"

    def folner_elements(self, n: int):
        """Group elements of the n-th Folner set, as exponent tuples."""
        if n < 1:
            raise ValueError("Folner index must be >= 1")
        if self.kind == "Z":
            return [(j,) for j in range(1, n + 1)]
        if self.kind == "Zk":
            return [tuple(t) for t in itertools.product(range(1, n + 1), repeat=self.k)]
        return [(j,) for j in range(self.m)]


@dataclass
class FiniteSystem:
    """A finite-dimensional dynamical system: algebra, state, group, generators."""

    structure: BlockStructure
    state: FaithfulState
    group: GroupDescriptor
    generators: list[Automorphism]

    def __post_init__(self):
        if len(self.generators) != self.group.num_generators:
            raise StructureError(
                f"group {self.group.kind} expects {self.group.num_generators} generators, "
                f"got {len(self.generators)}")

    @property
    def dimension(self) -> int:
        return self.structure.dimension

    def element_automorphism(self, g: tuple[int, ...]) -> Automorphism:
        """Automorphism of a group element given as exponents of the generators.

        Evaluated as the ordered product of generator powers; generators of
        Z^k are validated to commute so the order is immaterial.
        """
        if len(g) != len(self.generators):
            raise DimensionMismatchError("group element arity mismatch")
        out = identity_automorphism(self.structure)
        for gen, e in zip(self.generators, g):
            out = out.compose(gen.power(e))
        return out


@dataclass
class Violation:
    kind: str
    where: str
    residual: float

    def __str__(self):
        return f"{self.kind} at {self.where}: residual {self.residual:.3e}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def max_residual(self, kind: str | None = None) -> float:
        vs = [v.residual for v in self.violations if kind is None or v.kind == kind]
        return max(vs, default=0.0)

    def __str__(self):
        if self.valid:
            return "valid"
        return "; ".join(str(v) for v in self.violations)


def validate_system(sys: FiniteSystem, tol: float = VALIDATION_TOL) -> ValidationReport:
    """Check every defining invariant, collecting residuals of the failures.

    Reported kinds: state_hermiticity, state_trace, faithfulness, unitarity,
    invariance, multiplicativity, adjoint, unital, commutation (Z^k),
    generator_order (Z_m). Structural problems (wrong shapes) raise instead.
    """
    report = ValidationReport()
    st = sys.state
    basis = [sys.structure.basis_element(i) for i in range(sys.dimension)]

    herm = st.hermiticity_residual()
    if herm > tol:
        report.violations.append(Violation("state_hermiticity", "density", herm))
    tr_dev = abs(st.trace() - 1.0)
    if tr_dev > tol:
        report.violations.append(Violation("state_trace", "density", tr_dev))
    min_eig = st.min_eigenvalue()
    if min_eig <= FAITHFULNESS_MIN_EIG:
        report.violations.append(Violation("faithfulness", "density", -min_eig))

    for gi, gen in enumerate(sys.generators):
        ur = gen.unitarity_residual()
        if ur > tol:
            report.violations.append(Violation("unitarity", f"generator {gi}", ur))
        for i, e in enumerate(basis):
            r = abs(st.value(gen.apply(e)) - st.value(e))
            if r > tol:
                report.violations.append(
                    Violation("invariance", f"generator {gi}, basis {i}", r))
        # Ad-form automorphisms are multiplicative and *-preserving by
        # construction; re-verify numerically so a corrupted conjugator
        # cannot pass silently.
        images = [gen.apply(e) for e in basis]
        worst_mult = 0.0
        for i, j in itertools.product(range(sys.dimension), repeat=2):
            lhs = gen.apply(basis[i] @ basis[j])
            worst_mult = max(worst_mult, (lhs - images[i] @ images[j]).norm())
        if worst_mult > tol:
            report.violations.append(Violation("multiplicativity", f"generator {gi}", worst_mult))
        worst_adj = max(
            (gen.apply(basis[i].adjoint()) - images[i].adjoint()).norm()
            for i in range(sys.dimension)
        )
        if worst_adj > tol:
            report.violations.append(Violation("adjoint", f"generator {gi}", worst_adj))
        unital = (gen.apply(sys.structure.identity()) - sys.structure.identity()).norm()
        if unital > tol:
            report.violations.append(Violation("unital", f"generator {gi}", unital))

    if sys.group.kind == "Zk":
        for a_idx, b_idx in itertools.combinations(range(len(sys.generators)), 2):
            ga, gb = sys.generators[a_idx], sys.generators[b_idx]
            worst = max(
                (ga.apply(gb.apply(e)) - gb.apply(ga.apply(e))).norm() for e in basis
            )
            if worst > tol:
                report.violations.append(
                    Violation("commutation", f"generators {a_idx},{b_idx}", worst))
    if sys.group.kind == "Zm":
        powm = sys.generators[0].power(sys.group.m)
        worst = max((powm.apply(e) - e).norm() for e in basis)
        if worst > tol:
            report.violations.append(
                Violation("generator_order", f"order {sys.group.m}", worst))
    return report


def require_valid(sys: FiniteSystem, tol: float = VALIDATION_TOL) -> None:
    report = validate_system(sys, tol)
    if not report.valid:
        raise InvalidSystemError(report)


def state_eval(state: FaithfulState, a: AlgebraElement) -> complex:
    """Evaluate trace(ρ a). Linear; returns 1 on the identity."""
    return state.value(a)


def apply_automorphism(alpha: Automorphism, a: AlgebraElement) -> AlgebraElement:
    """Apply u · perm(a) · u*."""
    return alpha.apply(a)


def cyclic_rotation_system(points: int, state_weights=None) -> FiniteSystem:
    """Rotation on `points` one-dimensional blocks, acting by e_i -> e_{i+1}.

    The group descriptor is Z so the same system feeds graph joinings and
    correlation scans. With no weights the state is uniform (the invariant
    choice); explicit weights are handy for building invalid systems in tests.
    """
    structure = BlockStructure(tuple([1] * points))
    if state_weights is None:
        state = uniform_state(structure)
    else:
        if len(state_weights) != points:
            raise StructureError("weight count mismatch")
        state = FaithfulState(
            structure, [np.array([[w]], dtype=complex) for w in state_weights])
    perm = tuple((k - 1) % points for k in range(points))
    gen = Automorphism(structure, perm, [np.eye(1, dtype=complex)] * points)
    return FiniteSystem(structure, state, GroupDescriptor("Z"), [gen])


def identity_system(block_sizes, group: GroupDescriptor | None = None) -> FiniteSystem:
    """System whose every group element acts as the identity map."""
    structure = BlockStructure(tuple(block_sizes))
    group = group or GroupDescriptor("Z")
    gens = [identity_automorphism(structure) for _ in range(group.num_generators)]
    return FiniteSystem(structure, uniform_state(structure), group, gens)


def single_block_system(unitary, density=None, group: GroupDescriptor | None = None,
                        generators=None) -> FiniteSystem:
    """One full matrix block M_n with Ad(u) dynamics.

    `unitary` may be a single matrix (one generator) or a list of matrices.
    Density defaults to the trace state.
    """
    mats = unitary if isinstance(unitary, (list, tuple)) else [unitary]
    mats = [_as_complex(u) for u in mats]
    n = mats[0].shape[0]
    structure = BlockStructure((n,))
    if density is None:
        state = uniform_state(structure)
    else:
        state = FaithfulState(structure, [_as_complex(density)])
    if group is None:
        group = GroupDescriptor("Z") if len(mats) == 1 else GroupDescriptor("Zk", k=len(mats))
    if generators is not None:
        gens = generators
    else:
        gens = [Automorphism(structure, (0,), [u]) for u in mats]
    return FiniteSystem(structure, state, group, gens)
