"""GNS construction, unitary dynamics, point spectrum, and classification.

The GNS space of (A, μ) is A itself with inner product ⟨a, b⟩ = μ(a* b),
antilinear in the first argument. Coordinates are always with respect to the
canonical matrix-unit basis, so the inner product is the Gram matrix
G_ij = μ(e_i* e_j). A Cholesky factor C with G = C* C converts to
orthonormal coordinates where standard numpy eigensolvers apply.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    AlgebraElement,
    Automorphism,
    FiniteSystem,
    require_valid,
)
from .errors import (
    AmbiguousEigenvalueError,
    NcjoinError,
    NonProjectionError,
    NonScalarError,
    NonUnitaryError,
    NotInSpectrumError,
    UnsupportedGroupError,
)

EIG_CLUSTER_TOL = 1e-8
NULLSPACE_TOL = 1e-8
DEFAULT_SIGMA_SAMPLES = (0.1, 0.7, 1.3)


@dataclass
class GnsSpace:
    """Inner-product space carrying the left representation of the algebra.

    gram[i, j] = μ(e_i* e_j); left_rep[i] is the matrix of left
    multiplication by e_i in canonical coordinates; cyclic_vector is γ(1).
    onb_factor is the upper-triangular C with gram = C* C.
    """

    system: FiniteSystem
    dimension: int
    gram: np.ndarray
    left_rep: list[np.ndarray]
    cyclic_vector: np.ndarray
    onb_factor: np.ndarray
    onb_factor_inv: np.ndarray

    def gamma(self, a: AlgebraElement) -> np.ndarray:
        return a.coords()

    def element(self, coords) -> AlgebraElement:
        return self.system.structure.from_coords(coords)

    def inner(self, x, y) -> complex:
        return complex(np.asarray(x).conj() @ self.gram @ np.asarray(y))

    def norm(self, x) -> float:
        return math.sqrt(max(self.inner(x, x).real, 0.0))

    def to_onb(self, x) -> np.ndarray:
        return self.onb_factor @ np.asarray(x, dtype=complex)

    def from_onb(self, x) -> np.ndarray:
        return self.onb_factor_inv @ np.asarray(x, dtype=complex)

    def left_rep_of(self, a: AlgebraElement) -> np.ndarray:
        coords = a.coords()
        out = np.zeros((self.dimension, self.dimension), dtype=complex)
        for c, L in zip(coords, self.left_rep):
            if c != 0:
                out += c * L
        return out

    def left_rep_onb(self, a: AlgebraElement) -> np.ndarray:
        return self.onb_factor @ self.left_rep_of(a) @ self.onb_factor_inv


@dataclass
class UnitaryRep:
    """One matrix per generator, acting on canonical GNS coordinates."""

    matrices: list[np.ndarray]
    onb_matrices: list[np.ndarray]

    def of_element(self, g: tuple[int, ...], onb: bool = False) -> np.ndarray:
        mats = self.onb_matrices if onb else self.matrices
        d = mats[0].shape[0]
        out = np.eye(d, dtype=complex)
        for U, e in zip(mats, g):
            if e >= 0:
                out = out @ np.linalg.matrix_power(U, e)
            else:
                out = out @ np.linalg.matrix_power(U.conj().T if onb else np.linalg.inv(U), -e)
        return out


def gns_construct(sys: FiniteSystem) -> tuple[GnsSpace, UnitaryRep]:
    """Build the GNS data and the unitaries U_g γ(a) = γ(α_g(a))."""
    require_valid(sys)
    struct = sys.structure
    d = struct.dimension
    rho = sys.state.density

    gram = np.zeros((d, d), dtype=complex)
    for i in range(d):
        ki, ri, ci = struct.basis_address(i)
        for j in range(d):
            kj, rj, cj = struct.basis_address(j)
            if ki == kj and ri == rj:
                # e_i* e_j = E_{c_i c_j}, so μ(e_i* e_j) = ρ[c_j, c_i]
                gram[i, j] = rho[ki][cj, ci]

    left = [np.zeros((d, d), dtype=complex) for _ in range(d)]
    for i in range(d):
        ki, ri, ci = struct.basis_address(i)
        for j in range(d):
            kj, rj, cj = struct.basis_address(j)
            if ki == kj and ci == rj:
                left[i][struct.basis_index(ki, ri, cj), j] = 1.0

    chol_lower = np.linalg.cholesky(gram)
    onb = chol_lower.conj().T
    onb_inv = np.linalg.inv(onb)

    space = GnsSpace(
        system=sys,
        dimension=d,
        gram=gram,
        left_rep=left,
        cyclic_vector=struct.identity().coords(),
        onb_factor=onb,
        onb_factor_inv=onb_inv,
    )

    mats = []
    for gen in sys.generators:
        U = np.column_stack([gen.apply(struct.basis_element(j)).coords() for j in range(d)])
        mats.append(U)
    rep = UnitaryRep(matrices=mats, onb_matrices=[onb @ U @ onb_inv for U in mats])
    return space, rep


def _null_space(m: np.ndarray, tol: float = NULLSPACE_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the null space, via SVD."""
    if m.size == 0:
        return np.zeros((m.shape[1], 0), dtype=complex)
    _, s, vh = np.linalg.svd(m)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def _cluster_values(values, tol):
    """Group complex values into clusters of diameter ~tol; returns means."""
    reps: list[complex] = []
    for v in sorted(values, key=lambda z: (round(z.real, 12), round(z.imag, 12))):
        for i, r in enumerate(reps):
            if abs(v - r) < tol:
                break
        else:
            reps.append(complex(v))
    return reps


def _fix_phase(col: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Make the first coordinate of magnitude > tol real positive."""
    for entry in col:
        if abs(entry) > tol:
            return col * (abs(entry) / entry)
    return col


def _joint_eigenspaces(onb_unitaries: list[np.ndarray]):
    """Iterated eigenspace refinement for a family of unitaries.

    Returns a list of (character tuple, orthonormal basis columns) covering
    exactly the joint eigenvectors. The unitaries need not commute; a vector
    survives refinement by U only if it is an honest eigenvector of U, which
    is detected through modulus-one eigenvalues of the compression of U to
    the current subspace.
    """
    d = onb_unitaries[0].shape[0]
    spaces: list[tuple[tuple[complex, ...], np.ndarray]] = [((), np.eye(d, dtype=complex))]
    for U in onb_unitaries:
        refined = []
        for chars, B in spaces:
            comp = B.conj().T @ U @ B
            cands = [v for v in np.linalg.eigvals(comp) if abs(abs(v) - 1.0) < 1e-6]
            for v in _cluster_values(cands, EIG_CLUSTER_TOL):
                ns = _null_space(U @ B - v * B)
                if ns.shape[1] == 0:
                    continue
                Bv = B @ ns
                # polish the eigenvalue with a Rayleigh quotient
                chi = complex(np.mean(np.diagonal(Bv.conj().T @ U @ Bv)))
                chi /= abs(chi)
                refined.append((chars + (chi,), Bv))
        spaces = refined
    return spaces


@dataclass
class PointSpectrumEntry:
    eigenvalue: tuple[complex, ...]
    multiplicity: int
    eigenvectors: np.ndarray  # canonical GNS coordinates, Gram-orthonormal columns


def point_spectrum(sys: FiniteSystem) -> list[PointSpectrumEntry]:
    """Joint eigenvalues of the GNS unitaries, with eigenspaces.

    Entries are sorted lexicographically by (Re, Im) of each generator
    coordinate. Eigenvector phases are fixed by making the first nonzero
    canonical coordinate real positive.
    """
    space, rep = gns_construct(sys)
    leaves = _joint_eigenspaces(rep.onb_matrices)
    entries = []
    for chars, B in leaves:
        cols = []
        for j in range(B.shape[1]):
            cols.append(_fix_phase(space.from_onb(B[:, j])))
        entries.append(PointSpectrumEntry(
            eigenvalue=tuple(chars),
            multiplicity=B.shape[1],
            eigenvectors=np.column_stack(cols),
        ))
    entries.sort(key=lambda e: tuple(
        (round(v.real, 10), round(v.imag, 10)) for v in e.eigenvalue))
    return entries


def point_spectrum_overlap(entries_a, entries_b, tol: float = EIG_CLUSTER_TOL):
    """Character tuples occurring in both spectra (compared within tol)."""
    common = []
    for ea in entries_a:
        for eb in entries_b:
            if len(ea.eigenvalue) == len(eb.eigenvalue) and all(
                    abs(x - y) < tol for x, y in zip(ea.eigenvalue, eb.eigenvalue)):
                common.append(ea.eigenvalue)
                break
    return common


def fixed_point_algebra(sys: FiniteSystem) -> list[AlgebraElement]:
    """Gram-orthonormal basis of {a : α_g(a) = a for all generators}.

    The first basis element is the identity (its μ-norm is 1). The span is
    closed under adjoints since every α_g is *-preserving.
    """
    space, rep = gns_construct(sys)
    d = space.dimension
    stacked = np.vstack([U - np.eye(d) for U in rep.onb_matrices])
    ns = _null_space(stacked)
    omega_on = space.to_onb(space.cyclic_vector)
    # rotate the fixed-space basis so it starts with γ(1)
    cols = [omega_on]
    for j in range(ns.shape[1]):
        v = ns[:, j]
        for c in cols:
            v = v - c * (c.conj() @ v)
        n = np.linalg.norm(v)
        if n > 1e-10:
            cols.append(v / n)
    basis = np.column_stack(cols)
    return [space.element(space.from_onb(basis[:, j])) for j in range(basis.shape[1])]


@dataclass
class Classification:
    ergodic: bool
    weakly_mixing: bool
    discrete_spectrum: bool
    compact: bool
    fixed_algebra_dimension: int
    h0_dimension: int
    notes: tuple[str, ...] = ()


def classify_finite(sys: FiniteSystem) -> Classification:
    """Classify by fixed-point dimension and the span of joint eigenvectors.

    In finite dimension every orbit closure is compact, so the compactness
    flag is always true. All supported group descriptors are abelian, so
    discrete spectrum and compactness must agree; the joint eigenvectors of
    commuting unitaries span everything and h0 equals the full dimension.
    """
    spec = point_spectrum(sys)
    h0 = sum(e.multiplicity for e in spec)
    fixed = fixed_point_algebra(sys)
    fixed_dim = len(fixed)
    trivial = [e for e in spec if all(abs(v - 1.0) < EIG_CLUSTER_TOL for v in e.eigenvalue)]
    trivial_mult = sum(e.multiplicity for e in trivial)
    if trivial_mult != fixed_dim:
        raise NcjoinError(
            f"fixed-space dimension {fixed_dim} disagrees with trivial-character "
            f"multiplicity {trivial_mult}")
    d = sys.dimension
    if h0 != d:
        raise NcjoinError(
            f"joint eigenvectors span dimension {h0} < {d} for an abelian action; "
            "eigenspace refinement is incomplete")
    notes = (
        "finite dimension: compact is automatic (every bounded orbit is totally bounded)",
        "abelian action: discrete spectrum equals compactness, both hold",
    )
    return Classification(
        ergodic=(fixed_dim == 1),
        weakly_mixing=(h0 == 1),
        discrete_spectrum=(h0 == d),
        compact=True,
        fixed_algebra_dimension=fixed_dim,
        h0_dimension=h0,
        notes=notes,
    )


def compactness_net(sys: FiniteSystem, eps: float = 0.1, cap: int = 512) -> list[int]:
    """Greedy eps-net sizes for the orbits of the basis vectors.

    Exercises total boundedness directly instead of quoting the
    finite-dimension shortcut. Orbits are enumerated over a symmetric window
    of group elements (all of them for Z_m) and points farther than eps from
    the net extend it.
    """
    space, rep = gns_construct(sys)
    d = space.dimension
    group = sys.group
    if group.kind == "Zm":
        exponents = [(j,) for j in range(group.m)]
    elif group.kind == "Z":
        exponents = [(j,) for j in range(-cap // 2, cap // 2 + 1)]
    else:
        side = max(2, int(round(cap ** (1.0 / group.k))))
        rng = range(-side, side + 1)
        exponents = [tuple(t) for t in itertools.product(rng, repeat=group.k)]
    sizes = []
    for i in range(d):
        x = space.to_onb(np.eye(d)[:, i])
        net: list[np.ndarray] = []
        for g in exponents:
            y = rep.of_element(g, onb=True) @ x
            if all(np.linalg.norm(y - z) > eps for z in net):
                net.append(y)
        sizes.append(len(net))
    return sizes


@dataclass
class CesaroResult:
    value: complex
    deviation: float
    bound: float
    ergodic: bool


def cesaro_correlation(sys: FiniteSystem, x, y, n: int) -> CesaroResult:
    """Average ⟨U_g x, y⟩ over the n-th Folner set.

    deviation is the distance to ⟨x, Ω⟩⟨Ω, y⟩, the ergodic limit; bound is
    the generic remainder estimate (2/n)·‖x‖‖y‖ reported alongside. A
    non-ergodic system is allowed but flagged, since the limit need not be
    the rank-one value there.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    space, rep = gns_construct(sys)
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    elements = sys.group.folner_elements(n)
    total = 0.0 + 0.0j
    for g in elements:
        Ug = rep.of_element(g)
        total += space.inner(Ug @ x, y)
    value = total / len(elements)
    omega = space.cyclic_vector
    limit = space.inner(x, omega) * space.inner(omega, y)
    deviation = abs(value - limit)
    bound = 2.0 / n * space.norm(x) * space.norm(y)
    ergodic = classify_finite(sys).ergodic
    return CesaroResult(value=value, deviation=deviation, bound=bound, ergodic=ergodic)


@dataclass
class MirrorSystem:
    """Commutant picture of a system inside its own GNS space.

    commutant_basis spans π(A)'; the mirror state is μ̃(X) = ⟨Ω, XΩ⟩ and the
    mirror dynamics conjugates by the GNS unitaries. promoted realizes the
    same data as an ordinary system on the original block structure: the
    commutant consists of right multiplications R_b, and the *-preserving
    identification sends the promoted basis element f to
    R_{ρ^{1/2} transpose(f) ρ^{-1/2}} (the modular conjugation composed with
    the adjoint of the left action). promoted has density transpose(ρ) and
    conjugators conj(u); the ρ^{1/2} twist is invisible for tracial states.
    """

    source: FiniteSystem
    commutant_basis: list[np.ndarray]
    state_values: np.ndarray
    promoted: FiniteSystem
    _space: GnsSpace
    _rep: UnitaryRep

    def automorphism_image(self, gen_index: int, X: np.ndarray) -> np.ndarray:
        U = self._rep.matrices[gen_index]
        return U @ X @ np.linalg.inv(U)

    def state_of(self, X: np.ndarray) -> complex:
        omega = self._space.cyclic_vector
        return self._space.inner(omega, X @ omega)

    def right_mult_matrix(self, b: AlgebraElement) -> np.ndarray:
        """Matrix of x ↦ x·b in canonical GNS coordinates."""
        struct = self.source.structure
        d = struct.dimension
        out = np.zeros((d, d), dtype=complex)
        for j in range(d):
            ej = struct.basis_element(j)
            out[:, j] = (ej @ b).coords()
        return out

    def promoted_image(self, f: AlgebraElement) -> np.ndarray:
        """Commutant operator carrying a promoted element.

        f ↦ R_{ρ^{1/2} transpose(f) ρ^{-1/2}}; this is the composition of
        the modular conjugation with the adjoint of the left action and is a
        unital *-isomorphism onto the commutant.
        """
        rho_half = _density_power(self.source, 0.5)
        rho_mhalf = _density_power(self.source, -0.5)
        return self.right_mult_matrix(rho_half @ f.transpose() @ rho_mhalf)


def mirror_system(sys: FiniteSystem) -> MirrorSystem:
    """Commutant of the left representation, with state and dynamics.

    The commutant is computed by solving [X, π(e_i)] = 0 over the canonical
    basis; its dimension equals the algebra dimension.
    """
    space, rep = gns_construct(sys)
    d = space.dimension
    rows = []
    ident = np.eye(d, dtype=complex)
    for L in space.left_rep:
        # vec(XL - LX) = (L^T ⊗ I - I ⊗ L) vec(X), row-major vec
        rows.append(np.kron(ident, L) - np.kron(L.T, ident))
    ns = _null_space(np.vstack(rows))
    basis = [ns[:, j].reshape(d, d) for j in range(ns.shape[1])]
    if len(basis) != d:
        raise NcjoinError(f"commutant dimension {len(basis)} != algebra dimension {d}")

    struct = sys.structure
    density_t = [b.T.copy() for b in sys.state.density]
    from .algebra import FaithfulState  # local import to avoid cycle noise

    promoted_state = FaithfulState(struct, density_t)
    promoted_gens = [
        Automorphism(struct, gen.block_perm, [u.conj() for u in gen.conjugator])
        for gen in sys.generators
    ]
    promoted = FiniteSystem(struct, promoted_state, sys.group, promoted_gens)

    m = MirrorSystem(
        source=sys,
        commutant_basis=basis,
        state_values=np.array([0j] * len(basis)),
        promoted=promoted,
        _space=space,
        _rep=rep,
    )
    m.state_values = np.array([m.state_of(X) for X in basis])
    return m


def eigenoperator(sys: FiniteSystem, chi) -> AlgebraElement:
    """Unitary u with α_g(u) = χ(g) u, for a multiplicity-one eigenvalue.

    u*u is scalar whenever the system is ergodic; the returned u is the
    normalization u/‖u‖ and is verified unitary. Raises NotInSpectrumError,
    AmbiguousEigenvalueError, or NonScalarError (the latter signals a
    non-ergodic system).
    """
    if isinstance(chi, (int, float, complex)):
        chi = (complex(chi),)
    chi = tuple(complex(v) for v in chi)
    spec = point_spectrum(sys)
    match = None
    for entry in spec:
        if len(entry.eigenvalue) == len(chi) and all(
                abs(a - b) < 1e-6 for a, b in zip(entry.eigenvalue, chi)):
            match = entry
            break
    if match is None:
        raise NotInSpectrumError(f"{chi} is not in the point spectrum")
    if match.multiplicity != 1:
        raise AmbiguousEigenvalueError(
            f"{chi} has multiplicity {match.multiplicity}; eigenoperator is ambiguous")
    u0 = sys.structure.from_coords(match.eigenvectors[:, 0])
    p = u0.adjoint() @ u0
    scale = complex(sys.state.value(p))
    ident = sys.structure.identity()
    if (p - scale * ident).norm() > 1e-8 * max(1.0, abs(scale)):
        raise NonScalarError("u*u is not scalar; the system is not ergodic")
    if scale.real <= 0:
        raise NonScalarError("u*u is a nonpositive scalar; eigenvector is degenerate")
    u = (1.0 / math.sqrt(scale.real)) * u0
    if (u @ u.adjoint() - ident).norm() > 1e-8:
        raise NonScalarError("uu* is not the identity; the system is not ergodic")
    return u


def spectral_atoms(u: AlgebraElement, cluster_tol: float = EIG_CLUSTER_TOL,
                   unitary_tol: float = 1e-8):
    """Spectral decomposition of a unitary element: [(value, projector), ...].

    Eigenvalues closer than cluster_tol count as one atom. Projectors are
    Hermitian idempotents obtained blockwise; degenerate clusters are
    re-orthonormalized.
    """
    ident = u.structure.identity()
    if (u.adjoint() @ u - ident).norm() > unitary_tol:
        raise NonUnitaryError("element is not unitary within tolerance")
    all_vals = []
    per_block = []
    for b in u.blocks:
        vals, vecs = np.linalg.eig(b)
        per_block.append((vals, vecs))
        all_vals.extend(vals)
    atoms = _cluster_values(all_vals, cluster_tol)
    out = []
    for v in atoms:
        blocks = []
        for (vals, vecs), n in zip(per_block, [blk.shape[0] for blk in u.blocks]):
            sel = [j for j in range(len(vals)) if abs(vals[j] - v) < cluster_tol]
            if not sel:
                blocks.append(np.zeros((n, n), dtype=complex))
                continue
            cols = vecs[:, sel]
            q, _ = np.linalg.qr(cols)
            blocks.append(q @ q.conj().T)
        out.append((v, AlgebraElement(u.structure, blocks)))
    return out


def spectral_interval_projection(sys: FiniteSystem, u: AlgebraElement,
                                 theta1: float, theta2: float) -> AlgebraElement:
    """Sum of the spectral projections of u with argument in (theta1, theta2].

    Arguments of unitary eigenvalues live in (-pi, pi], so theta1 = -pi is
    allowed and acts as an open endpoint; partitions of the full circle can
    therefore start at -pi.
    """
    if not (-math.pi <= theta1 < theta2 <= math.pi):
        raise ValueError("need -pi <= theta1 < theta2 <= pi")
    proj = u.structure.zero()
    for v, p in spectral_atoms(u):
        arg = math.atan2(v.imag, v.real)
        if theta1 < arg <= theta2:
            proj = proj + p
    return proj


@dataclass
class SpectralCovarianceReport:
    atom_residual: float
    grid_commutation_residual: float
    atoms: int


def verify_spectral_covariance(sys: FiniteSystem, u: AlgebraElement, chi: complex,
                               n: int, grid: int = 12) -> SpectralCovarianceReport:
    """Residuals of α^n E({v}) = E({χ^n v}) and of interval-projection commutation.

    Requires a Z action with α(u) = χ u already established; that
    precondition is re-checked. The grid part partitions (-π, π] into `grid`
    half-open cells and reports max ‖P α^n(P) - α^n(P) P‖ over the cells.
    """
    if sys.group.kind != "Z":
        raise UnsupportedGroupError("spectral covariance check needs a Z action")
    chi = complex(chi)
    alpha = sys.generators[0]
    if (alpha.apply(u) - chi * u).norm() > 1e-8:
        raise NcjoinError("precondition failed: alpha(u) != chi * u")
    alpha_n = alpha.power(n)
    atoms = spectral_atoms(u)
    atom_res = 0.0
    for v, proj in atoms:
        # α^n composed with the spectral measure rotates atoms by χ^{-n}:
        # matching coefficients in α^n(u) = χ^n u gives α^n(E({v})) = E({χ^{-n} v}).
        target = chi ** (-n) * v
        best = min(atoms, key=lambda a: abs(a[0] - target))
        atom_res = max(atom_res, (alpha_n.apply(proj) - best[1]).norm())
    grid_res = 0.0
    for j in range(grid):
        t1 = -math.pi + 2 * math.pi * j / grid
        t2 = -math.pi + 2 * math.pi * (j + 1) / grid
        P = spectral_interval_projection(sys, u, t1, t2)
        Q = alpha_n.apply(P)
        grid_res = max(grid_res, (P @ Q - Q @ P).norm())
    return SpectralCovarianceReport(
        atom_residual=atom_res,
        grid_commutation_residual=grid_res,
        atoms=len(atoms),
    )


@dataclass
class ModularData:
    """Modular objects of (A, μ) in canonical GNS coordinates.

    delta_matrix is the linear map a ↦ ρ a ρ^{-1}; the conjugation acts
    antilinearly as x ↦ conj_matrix · conj(x) and realizes
    a ↦ ρ^{1/2} a* ρ^{-1/2}. For block-scalar (tracial) densities the
    modular operator is the identity and J reduces to the adjoint.
    """

    system: FiniteSystem
    delta_matrix: np.ndarray
    conj_matrix: np.ndarray

    def apply_conjugation(self, coords) -> np.ndarray:
        return self.conj_matrix @ np.asarray(coords, dtype=complex).conj()

    def sigma(self, t: float, a: AlgebraElement) -> AlgebraElement:
        rho_it = _density_power(self.system, 1j * t)
        rho_mit = _density_power(self.system, -1j * t)
        return rho_it @ a @ rho_mit


def _density_power(sys: FiniteSystem, z: complex) -> AlgebraElement:
    blocks = []
    for b in sys.state.density:
        vals, vecs = np.linalg.eigh((b + b.conj().T) / 2)
        blocks.append(vecs @ np.diag(np.exp(z * np.log(vals))) @ vecs.conj().T)
    return AlgebraElement(sys.structure, blocks)


def modular_data(sys: FiniteSystem) -> ModularData:
    require_valid(sys)
    struct = sys.structure
    d = struct.dimension
    rho = sys.state.density_element()
    rho_inv = _density_power(sys, -1)
    rho_half = _density_power(sys, 0.5)
    rho_mhalf = _density_power(sys, -0.5)
    delta = np.zeros((d, d), dtype=complex)
    conj = np.zeros((d, d), dtype=complex)
    for j in range(d):
        e = struct.basis_element(j)
        delta[:, j] = (rho @ e @ rho_inv).coords()
        conj[:, j] = (rho_half @ e.adjoint() @ rho_mhalf).coords()
    return ModularData(system=sys, delta_matrix=delta, conj_matrix=conj)


@dataclass
class ModularInvarianceResult:
    sigma_residual: float
    conjugation_vector_residual: float
    t_samples: tuple[float, ...]


def modular_invariance_check(sys: FiniteSystem, P: AlgebraElement,
                             t_samples=DEFAULT_SIGMA_SAMPLES) -> ModularInvarianceResult:
    """max_t ‖σ_t(P) - P‖ for a projection P, plus the J P Ω = P Ω residual."""
    ident_res = max((P @ P - P).norm(), (P.adjoint() - P).norm())
    if ident_res > 1e-8:
        raise NonProjectionError(f"P is not a projection (residual {ident_res:.3e})")
    md = modular_data(sys)
    space, _ = gns_construct(sys)
    res = max((md.sigma(t, P) - P).norm() for t in t_samples)
    jp = md.apply_conjugation(P.coords())
    vec_res = space.norm(jp - P.coords())
    return ModularInvarianceResult(
        sigma_residual=res,
        conjugation_vector_residual=vec_res,
        t_samples=tuple(t_samples),
    )


def asymptotic_abelianness_profile(sys: FiniteSystem, a: AlgebraElement,
                                   b: AlgebraElement, n_max: int) -> list[float]:
    """Averages (1/|Λ_n|) Σ_{g in Λ_n} ‖[a, α_g(b)]‖ for n = 1..n_max.

    The norm is the operator norm, exact via singular values. Folner boxes
    follow the group descriptor.
    """
    require_valid(sys)
    group = sys.group

    def commutator_norm(g):
        bg = sys.element_automorphism(g).apply(b)
        return (a @ bg - bg @ a).norm()

    out = []
    if group.kind == "Z":
        cache = []
        cur = b
        gen = sys.generators[0]
        for _ in range(n_max):
            cur = gen.apply(cur)
            cache.append((a @ cur - cur @ a).norm())
        acc = 0.0
        for n in range(1, n_max + 1):
            acc += cache[n - 1]
            out.append(acc / n)
    else:
        for n in range(1, n_max + 1):
            elems = group.folner_elements(n)
            out.append(sum(commutator_norm(g) for g in elems) / len(elems))
    return out
