import numpy as np
import pytest

from ncjoin import corpus
from ncjoin.algebra import (
    AlgebraElement,
    BlockStructure,
    FiniteSystem,
    GroupDescriptor,
    Automorphism,
    identity_system,
    single_block_system,
    uniform_state,
)
from ncjoin.errors import (
    AmbiguousEigenvalueError,
    NonProjectionError,
    NonScalarError,
    NotInSpectrumError,
)
from ncjoin.gns import (
    asymptotic_abelianness_profile,
    cesaro_correlation,
    classify_finite,
    compactness_net,
    eigenoperator,
    fixed_point_algebra,
    gns_construct,
    mirror_system,
    modular_data,
    modular_invariance_check,
    point_spectrum,
    point_spectrum_overlap,
    spectral_interval_projection,
    verify_spectral_covariance,
)

OMEGA3 = np.exp(2j * np.pi / 3)


# ---------------------------------------------------------------------------
# construction


def test_gns_c3_rotation(c3):
    space, rep = gns_construct(c3)
    assert space.dimension == 3
    assert np.allclose(space.gram, np.eye(3) / 3)
    assert np.allclose(rep.matrices[0], np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]]))
    assert np.allclose(space.cyclic_vector, np.ones(3))


def test_gns_m2_trace_state():
    m2 = single_block_system(np.eye(2))
    space, rep = gns_construct(m2)
    assert space.dimension == 4
    assert np.allclose(space.gram, np.eye(4) / 2)
    assert np.allclose(rep.matrices[0], np.eye(4))


def test_unitaries_fix_cyclic_vector():
    for name in corpus.FINITE_SYSTEMS:
        sysd = corpus.system(name)
        space, rep = gns_construct(sysd)
        for U in rep.matrices:
            assert np.allclose(U @ space.cyclic_vector, space.cyclic_vector)


def test_gram_unitarity_invariant():
    for name in corpus.FINITE_SYSTEMS:
        sysd = corpus.system(name)
        space, rep = gns_construct(sysd)
        for U in rep.matrices:
            res = np.linalg.norm(U.conj().T @ space.gram @ U - space.gram, 2)
            assert res < 1e-9, name


def test_left_rep_reproduces_products(c3, gibbs):
    for sysd in (c3, gibbs):
        space, _ = gns_construct(sysd)
        for i in range(sysd.dimension):
            for j in range(sysd.dimension):
                ei = sysd.structure.basis_element(i)
                ej = sysd.structure.basis_element(j)
                lhs = space.left_rep[i] @ space.gamma(ej)
                assert np.allclose(lhs, space.gamma(ei @ ej))


def test_gram_matches_state_inner_products(gibbs):
    space, _ = gns_construct(gibbs)
    for i in range(gibbs.dimension):
        for j in range(gibbs.dimension):
            ei = gibbs.structure.basis_element(i)
            ej = gibbs.structure.basis_element(j)
            assert space.gram[i, j] == pytest.approx(
                complex(gibbs.state.value(ei.adjoint() @ ej)))


# ---------------------------------------------------------------------------
# classification and spectrum


def test_classify_c5(c5):
    cls = classify_finite(c5)
    assert cls.ergodic
    assert cls.fixed_algebra_dimension == 1
    assert cls.h0_dimension == 5
    assert not cls.weakly_mixing
    assert cls.compact and cls.discrete_spectrum


def test_classify_pauli(pauli):
    cls = classify_finite(pauli)
    assert cls.ergodic
    assert cls.h0_dimension == 4
    spec = point_spectrum(pauli)
    chars = {tuple(int(round(v.real)) for v in e.eigenvalue) for e in spec}
    assert chars == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    assert all(e.multiplicity == 1 for e in spec)


def test_classify_trivial_system():
    cls = classify_finite(identity_system([1]))
    assert cls.ergodic and cls.weakly_mixing


def test_finite_dimension_facts_on_corpus():
    for name in corpus.FINITE_SYSTEMS:
        sysd = corpus.system(name)
        cls = classify_finite(sysd)
        assert cls.compact and cls.discrete_spectrum
        assert cls.weakly_mixing == (sysd.dimension == 1)
        assert cls.h0_dimension == sysd.dimension


def test_point_spectrum_c2(c2):
    spec = point_spectrum(c2)
    vals = sorted(round(e.eigenvalue[0].real) for e in spec)
    assert vals == [-1, 1]
    assert all(e.multiplicity == 1 for e in spec)


def test_point_spectrum_c3_cube_roots(c3):
    spec = point_spectrum(c3)
    got = sorted((round(v.real, 8), round(v.imag, 8))
                 for e in spec for v in e.eigenvalue)
    want = sorted((round(w.real, 8), round(w.imag, 8))
                  for w in (1, OMEGA3, OMEGA3 ** 2))
    assert got == want


def test_point_spectrum_identity_system(id3):
    spec = point_spectrum(id3)
    assert len(spec) == 1
    assert spec[0].multiplicity == 3
    assert abs(spec[0].eigenvalue[0] - 1) < 1e-12


def test_eigen_residual_invariant():
    for name in corpus.FINITE_SYSTEMS:
        sysd = corpus.system(name)
        space, rep = gns_construct(sysd)
        for entry in point_spectrum(sysd):
            for col in range(entry.eigenvectors.shape[1]):
                x = entry.eigenvectors[:, col]
                for U, chi in zip(rep.matrices, entry.eigenvalue):
                    assert space.norm(U @ x - chi * x) < 1e-8


def test_eigenvectors_gram_orthonormal(c5):
    space, _ = gns_construct(c5)
    spec = point_spectrum(c5)
    vecs = np.column_stack([e.eigenvectors for e in spec])
    g = vecs.conj().T @ space.gram @ vecs
    assert np.allclose(g, np.eye(vecs.shape[1]), atol=1e-9)


def test_trivial_character_matches_fixed_space():
    for name in corpus.FINITE_SYSTEMS:
        sysd = corpus.system(name)
        spec = point_spectrum(sysd)
        triv = sum(e.multiplicity for e in spec
                   if all(abs(v - 1) < 1e-8 for v in e.eigenvalue))
        assert triv == len(fixed_point_algebra(sysd))


def test_point_spectrum_overlap(c2, c3):
    common = point_spectrum_overlap(point_spectrum(c2), point_spectrum(c3))
    assert len(common) == 1
    assert abs(common[0][0] - 1) < 1e-10


# ---------------------------------------------------------------------------
# fixed point algebra


def test_fixed_point_algebra_examples(c3, id3):
    assert len(fixed_point_algebra(c3)) == 1
    assert len(fixed_point_algebra(id3)) == 3
    m2 = single_block_system(np.diag([1, 1j]))
    basis = fixed_point_algebra(m2)
    assert len(basis) == 2
    assert np.allclose(basis[0].blocks[0], np.eye(2))
    for b in basis:
        assert np.allclose(b.blocks[0], np.diag(np.diagonal(b.blocks[0])))


def test_fixed_point_algebra_adjoint_closed(pauli):
    basis = fixed_point_algebra(pauli)
    space, _ = gns_construct(pauli)
    mat = np.column_stack([space.to_onb(b.coords()) for b in basis])
    for b in basis:
        v = space.to_onb(b.adjoint().coords())
        proj = mat @ (mat.conj().T @ v)
        assert np.linalg.norm(proj - v) < 1e-10


# ---------------------------------------------------------------------------
# Cesaro averages


def test_cesaro_c3_exact_period(c3):
    space, _ = gns_construct(c3)
    e0 = np.eye(3)[:, 0]
    res = cesaro_correlation(c3, e0, e0, 3)
    assert res.value == pytest.approx(1 / 9)
    assert res.deviation < 1e-12


def test_cesaro_omega_fixed(c5):
    space, _ = gns_construct(c5)
    res = cesaro_correlation(c5, space.cyclic_vector, space.cyclic_vector, 7)
    assert res.value == pytest.approx(1.0)
    assert res.deviation < 1e-12


def test_cesaro_partial_period_bound(c3):
    e0 = np.eye(3)[:, 0]
    res = cesaro_correlation(c3, e0, e0, 4)
    assert res.deviation <= res.bound
    assert res.bound == pytest.approx((2 / 4) * (1 / 3))


def test_cesaro_multiple_of_period_invariant():
    for name, period in (("c2", 2), ("c3", 3), ("c5", 5)):
        sysd = corpus.system(name)
        space, _ = gns_construct(sysd)
        rng = np.random.default_rng(7)
        x = rng.normal(size=sysd.dimension) + 1j * rng.normal(size=sysd.dimension)
        y = rng.normal(size=sysd.dimension) + 1j * rng.normal(size=sysd.dimension)
        for k in (1, 2, 4):
            res = cesaro_correlation(sysd, x, y, period * k)
            assert res.deviation < 1e-9


# ---------------------------------------------------------------------------
# mirror systems


def test_mirror_commutative_is_itself(c3):
    m = mirror_system(c3)
    assert len(m.commutant_basis) == 3


def test_mirror_m2_dimension():
    m = mirror_system(single_block_system(np.eye(2)))
    assert len(m.commutant_basis) == 4


def test_mirror_invariants(gibbs):
    m = mirror_system(gibbs)
    space, rep = gns_construct(gibbs)
    ident = gibbs.structure.identity()
    # commutation with every left representative
    for Xc in m.commutant_basis:
        for L in space.left_rep:
            assert np.linalg.norm(Xc @ L - L @ Xc) < 1e-9
    # mirror state is unital and invariant under the mirror dynamics
    assert m.state_of(np.eye(4, dtype=complex)) == pytest.approx(1.0)
    for Xc in m.commutant_basis:
        moved = m.automorphism_image(0, Xc)
        assert m.state_of(moved) == pytest.approx(complex(m.state_of(Xc)))
    # promoted system embeds into the commutant through the twisted map
    def gram_adjoint(x):
        g = space.gram
        return np.linalg.solve(g, x.conj().T @ g)

    for j in range(gibbs.dimension):
        f = gibbs.structure.basis_element(j)
        R = m.promoted_image(f)
        for L in space.left_rep:
            assert np.linalg.norm(R @ L - L @ R) < 1e-12
        assert m.state_of(R) == pytest.approx(complex(m.promoted.state.value(f)))
        # star preservation under the Gram adjoint
        assert np.linalg.norm(m.promoted_image(f.adjoint()) - gram_adjoint(R)) < 1e-10
        # equivariance: mirror dynamics matches the promoted dynamics
        moved = m.automorphism_image(0, R)
        assert np.linalg.norm(
            moved - m.promoted_image(m.promoted.generators[0].apply(f))) < 1e-10
    # multiplicativity of the promoted embedding
    f1 = gibbs.structure.from_coords([0.2, 1j, -0.4, 0.9])
    f2 = gibbs.structure.from_coords([1.0, 0.5, 0.5j, -2.0])
    assert np.linalg.norm(
        m.promoted_image(f1 @ f2) - m.promoted_image(f1) @ m.promoted_image(f2)) < 1e-10


def test_mirror_promoted_valid_for_corpus():
    from ncjoin.algebra import validate_system

    for name in corpus.FINITE_SYSTEMS:
        m = mirror_system(corpus.system(name))
        assert validate_system(m.promoted).valid, name


# ---------------------------------------------------------------------------
# eigenoperators and spectral projections


def test_eigenoperator_c3(c3):
    u = eigenoperator(c3, np.conj(OMEGA3))
    got = np.array([b[0, 0] for b in u.blocks])
    assert np.allclose(got, [1, OMEGA3, OMEGA3 ** 2])


def test_eigenoperator_pauli_sign_pair(pauli):
    u = eigenoperator(pauli, (1, -1))
    assert np.allclose(u.blocks[0], np.array([[0, 1], [1, 0]]))


def test_eigenoperator_trivial_character(c5):
    u = eigenoperator(c5, 1.0)
    assert np.allclose(u.coords(), c5.structure.identity().coords())


def test_eigenoperator_errors(c3, id3):
    with pytest.raises(NotInSpectrumError):
        eigenoperator(c3, 1j)
    with pytest.raises(AmbiguousEigenvalueError):
        eigenoperator(id3, 1.0)
    # a reducible system: swap of two points plus a fixed point; the
    # eigenvalue -1 is simple but its eigenoperator has non-scalar u*u
    s = BlockStructure((1, 1, 1))
    gen = Automorphism(s, (1, 0, 2), [np.eye(1, dtype=complex)] * 3)
    sysd = FiniteSystem(s, uniform_state(s), GroupDescriptor("Z"), [gen])
    with pytest.raises(NonScalarError):
        eigenoperator(sysd, -1.0)


def test_eigenoperator_invariants_across_spectra(c3, c5, pauli):
    for sysd in (c3, c5, pauli):
        ident = sysd.structure.identity()
        for entry in point_spectrum(sysd):
            if entry.multiplicity != 1:
                continue
            u = eigenoperator(sysd, entry.eigenvalue)
            assert (u.adjoint() @ u - ident).norm() < 1e-8
            for gen, chi in zip(sysd.generators, entry.eigenvalue):
                assert (gen.apply(u) - chi * u).norm() < 1e-8


def test_spectral_interval_projection_examples(c3):
    u = eigenoperator(c3, np.conj(OMEGA3))
    p_mid = spectral_interval_projection(c3, u, 0.0, np.pi)
    assert np.allclose([b[0, 0] for b in p_mid.blocks], [0, 1, 0])
    p_all = spectral_interval_projection(c3, u, -np.pi, np.pi)
    assert p_all.isclose(c3.structure.identity())
    p_none = spectral_interval_projection(c3, u, 2.2, 2.5)
    assert p_none.norm() < 1e-12


def test_spectral_projection_idempotent_and_partition(c3, pauli):
    for sysd, chi in ((c3, np.conj(OMEGA3)), (pauli, (1, -1))):
        u = eigenoperator(sysd, chi)
        total = sysd.structure.zero()
        for k in range(12):
            t1 = -np.pi + 2 * np.pi * k / 12
            t2 = -np.pi + 2 * np.pi * (k + 1) / 12
            P = spectral_interval_projection(sysd, u, t1, t2)
            assert (P @ P - P).norm() < 1e-10
            assert (P.adjoint() - P).norm() < 1e-10
            total = total + P
        assert (total - sysd.structure.identity()).norm() < 1e-9


def test_spectral_covariance_residuals(c3):
    u = eigenoperator(c3, np.conj(OMEGA3))
    for n in range(1, 7):
        rep = verify_spectral_covariance(c3, u, np.conj(OMEGA3), n)
        assert rep.atom_residual < 1e-10
        assert rep.grid_commutation_residual < 1e-12
    rep3 = verify_spectral_covariance(c3, u, np.conj(OMEGA3), 3)
    assert rep3.atom_residual < 1e-12   # alpha^3 is the identity


def test_spectral_covariance_trivial_atom(c3):
    u = eigenoperator(c3, 1.0)
    rep = verify_spectral_covariance(c3, u, 1.0, 1)
    assert rep.atoms == 1
    assert rep.atom_residual < 1e-12


# ---------------------------------------------------------------------------
# modular data


def test_modular_tracial_cases(pauli):
    md = modular_data(pauli)
    assert np.allclose(md.delta_matrix, np.eye(4))
    for i in range(4):
        e = pauli.structure.basis_element(i)
        jvec = md.apply_conjugation(e.coords())
        assert np.allclose(jvec, e.adjoint().coords())


def test_modular_gibbs_spectrum(gibbs):
    md = modular_data(gibbs)
    vals = sorted(np.linalg.eigvals(md.delta_matrix).real)
    assert np.allclose(vals, [0.5, 1.0, 1.0, 2.0])


def test_modular_invariants(gibbs):
    md = modular_data(gibbs)
    space, _ = gns_construct(gibbs)
    rng = np.random.default_rng(3)
    x = rng.normal(size=4) + 1j * rng.normal(size=4)
    # antiunitary involution fixing the cyclic vector
    assert np.allclose(md.apply_conjugation(md.apply_conjugation(x)), x)
    assert np.allclose(md.apply_conjugation(space.cyclic_vector), space.cyclic_vector)
    # positivity of the modular operator in the GNS inner product
    onb_delta = space.onb_factor @ md.delta_matrix @ space.onb_factor_inv
    evals = np.linalg.eigvalsh((onb_delta + onb_delta.conj().T) / 2)
    assert evals.min() > 0
    # J Delta^{1/2} realizes the adjoint
    dhalf = space.onb_factor_inv @ _matrix_sqrt(onb_delta) @ space.onb_factor
    a = gibbs.structure.from_coords(x)
    svec = md.apply_conjugation(dhalf @ a.coords())
    assert np.allclose(svec, a.adjoint().coords())
    # sigma_t fixes the unit and preserves the state
    for t in (0.1, 0.7, 1.3):
        assert md.sigma(t, gibbs.structure.identity()).isclose(gibbs.structure.identity())
        b = gibbs.structure.from_coords(rng.normal(size=4) + 1j * rng.normal(size=4))
        assert complex(gibbs.state.value(md.sigma(t, b))) == pytest.approx(
            complex(gibbs.state.value(b)))


def _matrix_sqrt(m):
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def test_modular_invariance_check(gibbs, pauli):
    s = gibbs.structure
    diag = AlgebraElement(s, [np.diag([1.0, 0.0]).astype(complex)])
    res = modular_invariance_check(gibbs, diag)
    assert res.sigma_residual < 1e-10
    assert res.conjugation_vector_residual < 1e-10

    skew = AlgebraElement(s, [np.full((2, 2), 0.5, dtype=complex)])
    res2 = modular_invariance_check(gibbs, skew)
    assert res2.sigma_residual > 0.1

    tr = modular_invariance_check(pauli, AlgebraElement(
        pauli.structure, [np.diag([1.0, 0.0]).astype(complex)]))
    assert tr.sigma_residual < 1e-12

    with pytest.raises(NonProjectionError):
        modular_invariance_check(gibbs, AlgebraElement(
            s, [np.array([[1.0, 0.5], [0.0, 0.0]], dtype=complex)]))


# ---------------------------------------------------------------------------
# abelianness profile and compactness net


def test_abelianness_profile_commutative(c3):
    a = c3.structure.basis_element(0)
    b = c3.structure.basis_element(1)
    assert max(asymptotic_abelianness_profile(c3, a, b, 6)) < 1e-14


def test_abelianness_profile_pauli(pauli):
    s = pauli.structure
    x = AlgebraElement(s, [np.array([[0, 1], [1, 0]], dtype=complex)])
    z = AlgebraElement(s, [np.array([[1, 0], [0, -1]], dtype=complex)])
    prof = asymptotic_abelianness_profile(pauli, x, z, 4)
    assert np.allclose(prof, 2.0)
    unit_prof = asymptotic_abelianness_profile(pauli, x, s.identity(), 4)
    assert max(unit_prof) < 1e-14


def test_compactness_net_sizes(c3, id3):
    assert compactness_net(c3, 0.1) == [3, 3, 3]
    assert compactness_net(id3, 0.1) == [1, 1, 1]


# ---------------------------------------------------------------------------
# systems off the corpus: non-diagonal density, twisted block swap


def _nondiagonal_density_system():
    rho = np.array([[0.6, 0.1 + 0.05j], [0.1 - 0.05j, 0.4]])
    vals, vecs = np.linalg.eigh(rho)
    u = vecs @ np.diag([1, 1j]) @ vecs.conj().T
    s = BlockStructure((2,))
    from ncjoin.algebra import FaithfulState

    return FiniteSystem(s, FaithfulState(s, [rho]), GroupDescriptor("Z"),
                        [Automorphism(s, (0,), [u])]), vals


def test_nondiagonal_density_pipeline():
    from ncjoin.algebra import validate_system

    sysd, rho_eigs = _nondiagonal_density_system()
    assert validate_system(sysd).valid
    cls = classify_finite(sysd)
    assert cls.h0_dimension == 4
    assert cls.fixed_algebra_dimension == 2
    md = modular_data(sysd)
    got = sorted(np.linalg.eigvals(md.delta_matrix).real)
    lo, hi = rho_eigs
    assert np.allclose(got, sorted([1.0, 1.0, lo / hi, hi / lo]))
    space, rep = gns_construct(sysd)
    for U in rep.matrices:
        assert np.linalg.norm(U.conj().T @ space.gram @ U - space.gram, 2) < 1e-9


def test_twisted_block_swap_degenerate_spectrum():
    s = BlockStructure((2, 2))
    w = np.array([[0, 1], [1, 0]], dtype=complex)
    gen = Automorphism(s, (1, 0), [w, np.eye(2, dtype=complex)])
    sysd = FiniteSystem(s, uniform_state(s), GroupDescriptor("Z"), [gen])
    cls = classify_finite(sysd)
    assert cls.h0_dimension == 8
    assert cls.fixed_algebra_dimension == 2
    spec = point_spectrum(sysd)
    assert sorted(e.multiplicity for e in spec) == [2, 2, 2, 2]
    chars = sorted(np.round(e.eigenvalue[0], 8) for e in spec
                   for _ in range(e.multiplicity))
    assert len(chars) == 8
    space, rep = gns_construct(sysd)
    for entry in spec:
        for col in range(entry.eigenvectors.shape[1]):
            x = entry.eigenvectors[:, col]
            chi = entry.eigenvalue[0]
            assert space.norm(rep.matrices[0] @ x - chi * x) < 1e-8
