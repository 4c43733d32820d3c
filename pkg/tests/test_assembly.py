import numpy as np
import pytest
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss

from harmrec import build_lshape_mesh, extract_boundary
from harmrec.assembly import (
    BoundaryOperators,
    assemble_boundary_operators,
    assemble_interior_load,
    assemble_stiffness,
    evaluate_fe,
    fe_h1_norm,
    h1_error,
    nonsmooth_solution,
    smooth_solution,
)
from harmrec.linalg import DualVector, PrimalVector, eig_sym_dense
from harmrec.mesh import BoundaryMesh


def quadrature_element_stiffness():
    """Oracle: integrate grad(phi_a).grad(phi_b) on the unit square (3x3 Gauss)."""
    t, w = leggauss(3)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    K = np.zeros((4, 4))
    for xi, wx in zip(t, w):
        for eta, wy in zip(t, w):
            grads = np.array(
                [
                    [-(1 - eta), -(1 - xi)],
                    [(1 - eta), -xi],
                    [eta, xi],
                    [-eta, (1 - xi)],
                ]
            )
            K += wx * wy * grads @ grads.T
    return K


def element_mass(h):
    return h * h / 36.0 * np.array(
        [[4.0, 2, 1, 2], [2, 4, 2, 1], [1, 2, 4, 2], [2, 1, 2, 4]]
    )


def assemble_full_mass(mesh):
    """Independent volume mass matrix used as a load oracle."""
    Me = element_mass(mesh.cell_size)
    rows = mesh.cells[:, [0, 1, 2, 3] * 4].ravel()
    cols = mesh.cells[:, [0] * 4 + [1] * 4 + [2] * 4 + [3] * 4].ravel()
    data = np.tile(Me.ravel(order="F"), mesh.n_cells)
    return sp.coo_matrix((data, (rows, cols)), shape=(mesh.n_nodes,) * 2).tocsr()


def test_element_stiffness_matches_quadrature_oracle(blocks2):
    K_oracle = quadrature_element_stiffness()
    assert K_oracle[0, 0] == pytest.approx(2.0 / 3.0, abs=1e-14)
    from harmrec.assembly import _Q1_STIFFNESS

    assert np.allclose(_Q1_STIFFNESS, K_oracle, atol=1e-14)


def test_constants_in_discrete_kernel(mesh2, blocks2):
    r = blocks2.interior @ np.ones(mesh2.n_interior) + blocks2.coupling @ np.ones(
        mesh2.n_boundary
    )
    assert np.abs(r).max() < 1e-14


def test_interior_block_size_n1():
    mesh = build_lshape_mesh(1)
    blocks = assemble_stiffness(mesh)
    assert blocks.interior.shape == (5, 5)
    assert blocks.coupling.shape == (5, 16)


def test_stiffness_exactly_symmetric(blocks3):
    diff = blocks3.interior - blocks3.interior.T
    assert abs(diff).max() == 0.0


def test_boundary_operator_identities(bmesh2, ops2):
    ones = np.ones(ops2.n_nodes)
    assert np.abs(ops2.stiffness @ ones).max() == 0.0
    assert ones @ (ops2.mass @ ones) == pytest.approx(8.0, rel=1e-14)


def test_smallest_generalized_eigenvalue_is_one(ops2):
    tau, V = eig_sym_dense(ops2.shifted(1.0, 1.0), ops2.mass)
    assert tau[0] == pytest.approx(1.0, abs=1e-12)
    v1 = V[:, 0]
    assert np.abs(v1 - v1.mean()).max() < 1e-10  # constant eigenvector


def test_boundary_assembly_commutes_with_cyclic_shift(mesh3, bmesh3, ops3):
    shift = 5
    nb = bmesh3.n_nodes
    rolled = np.roll(bmesh3.boundary_dofs, -shift)
    g2b = np.full(mesh3.n_nodes, -1, dtype=np.int64)
    g2b[rolled] = np.arange(nb)
    shifted_mesh = BoundaryMesh(
        boundary_dofs=rolled,
        edge_lengths=np.roll(bmesh3.edge_lengths, -shift),
        global_to_boundary=g2b,
    )
    ops_shifted = assemble_boundary_operators(shifted_mesh)
    perm = (np.arange(nb) - shift) % nb  # old index -> new index
    P = sp.coo_matrix((np.ones(nb), (perm, np.arange(nb))), shape=(nb, nb)).tocsr()
    assert abs(P @ ops3.mass @ P.T - ops_shifted.mass).max() == 0.0
    assert abs(P @ ops3.stiffness @ P.T - ops_shifted.stiffness).max() == 0.0


def test_zero_load():
    mesh = build_lshape_mesh(1)
    load = assemble_interior_load(mesh, lambda x, y: np.zeros_like(x))
    assert load.space == "interior"
    assert np.all(load.values == 0.0)


def test_unit_load_entries_are_h_squared():
    mesh = build_lshape_mesh(1)
    load = assemble_interior_load(mesh, lambda x, y: np.ones_like(x))
    assert np.allclose(load.values, 0.25, atol=1e-14)


def test_hat_function_load_is_mass_column(mesh2):
    M = assemble_full_mass(mesh2)
    j = 7
    coeffs = np.zeros(mesh2.n_nodes)
    coeffs[j] = 1.0
    hat = PrimalVector(values=coeffs)

    def f(x, y):
        return evaluate_fe(mesh2, hat, np.column_stack([x.ravel(), y.ravel()])).reshape(x.shape)

    load = assemble_interior_load(mesh2, f, order=4)
    expected = np.asarray(M[:, j].todense()).ravel()[: mesh2.n_interior]
    assert np.allclose(load.values, expected, atol=1e-14)


def test_h1_norms_match_references():
    mesh = build_lshape_mesh(6)
    for sol in (smooth_solution(), nonsmooth_solution()):
        coords = mesh.node_coords
        interp = PrimalVector(values=sol.value(coords[:, 0], coords[:, 1]))
        _, norm = h1_error(mesh, interp, sol)
        assert norm == pytest.approx(sol.h1_norm_reference, rel=5e-3)


def test_interpolant_error_small_at_n6():
    mesh = build_lshape_mesh(6)
    sol = smooth_solution()
    interp = PrimalVector(values=sol.value(mesh.node_coords[:, 0], mesh.node_coords[:, 1]))
    err, norm = h1_error(mesh, interp, sol)
    assert err < 0.01 * norm


def test_interpolant_convergence_rate():
    sol = smooth_solution()
    errs = []
    for n in range(2, 6):
        mesh = build_lshape_mesh(n)
        interp = PrimalVector(values=sol.value(mesh.node_coords[:, 0], mesh.node_coords[:, 1]))
        err, _ = h1_error(mesh, interp, sol)
        errs.append(err)
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert (rates >= 0.9).all()


def test_builtin_solutions_are_harmonic_symbolically():
    sympy = pytest.importorskip("sympy")
    x, y = sympy.symbols("x y", real=True)
    u1 = sympy.exp(x) * sympy.cos(y)
    assert sympy.simplify(sympy.diff(u1, x, 2) + sympy.diff(u1, y, 2)) == 0
    r, th = sympy.symbols("r theta", positive=True)
    u2 = r ** sympy.Rational(2, 3) * sympy.sin(2 * th / 3)
    lap = sympy.diff(u2, r, 2) + sympy.diff(u2, r) / r + sympy.diff(u2, th, 2) / r**2
    assert sympy.simplify(lap) == 0


def test_nonsmooth_branch_vanishes_on_reentrant_edges():
    sol = nonsmooth_solution()
    xs = np.linspace(0.01, 0.99, 13)
    assert np.abs(sol.value(xs, np.zeros_like(xs))).max() < 1e-14
    assert np.abs(sol.value(np.zeros_like(xs), -xs)).max() < 1e-14
    # continuity across the negative-y axis approach
    left = sol.value(np.full(5, -1e-9), -xs[:5])
    edge = sol.value(np.zeros(5), -xs[:5])
    assert np.abs(left - edge).max() < 1e-6


def test_evaluate_fe_reproduces_nodal_values(mesh2, rng):
    coeffs = rng.standard_normal(mesh2.n_nodes)
    vals = evaluate_fe(mesh2, PrimalVector(values=coeffs), mesh2.node_coords)
    assert np.allclose(vals, coeffs, atol=1e-13)


def test_evaluate_fe_on_reentrant_edge(mesh2):
    coeffs = mesh2.node_coords[:, 0] + 2.0 * mesh2.node_coords[:, 1]
    pts = np.array([[0.0, -0.3], [0.4, 0.0], [0.0, 0.0], [1.0, 1.0]])
    vals = evaluate_fe(mesh2, PrimalVector(values=coeffs), pts)
    assert np.allclose(vals, pts[:, 0] + 2.0 * pts[:, 1], atol=1e-13)


def test_evaluate_fe_rejects_outside_point(mesh2):
    with pytest.raises(ValueError):
        evaluate_fe(mesh2, PrimalVector(values=np.zeros(mesh2.n_nodes)), [[0.5, -0.5]])


def test_fe_h1_norm_matches_h1_error_trick(mesh2, rng):
    coeffs = rng.standard_normal(mesh2.n_nodes)
    v = PrimalVector(values=coeffs)
    norm = fe_h1_norm(mesh2, v)
    zero = smooth_solution()
    zero = type(zero)(
        value=lambda x, y: np.zeros_like(x),
        gradient=lambda x, y: (np.zeros_like(x), np.zeros_like(y)),
        h1_norm_reference=0.0,
    )
    err, _ = h1_error(mesh2, v, zero)
    assert norm == pytest.approx(err, rel=1e-13)
