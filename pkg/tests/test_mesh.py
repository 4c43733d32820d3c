import numpy as np
import pytest

from harmrec import BoundaryMesh, QuadMesh, build_lshape_mesh, extract_boundary, point_in_domain


def enumerate_grid_counts(n):
    """Independent enumeration oracle for node/boundary counts."""
    side = 2 ** (n + 1)
    h = 2.0 ** (-n)
    nodes = boundary = 0
    for i in range(side + 1):
        for j in range(side + 1):
            x, y = -1.0 + i * h, -1.0 + j * h
            if x > 0.0 and y < 0.0:
                continue
            nodes += 1
            on_outer = abs(x) == 1.0 or abs(y) == 1.0
            on_reentrant = (x == 0.0 and y <= 0.0) or (y == 0.0 and x >= 0.0)
            if on_outer or on_reentrant:
                boundary += 1
    return nodes, boundary


@pytest.mark.parametrize("n", range(1, 7))
def test_counts_match_closed_forms(n):
    mesh = build_lshape_mesh(n)
    assert mesh.n_cells == 3 * 4**n
    assert mesh.n_nodes == (2 ** (n + 1) + 1) ** 2 - 4**n
    assert mesh.n_boundary == 8 * 2**n
    assert mesh.n_interior + mesh.n_boundary == mesh.n_nodes


@pytest.mark.parametrize("n", [1, 2, 3])
def test_counts_match_enumeration(n):
    mesh = build_lshape_mesh(n)
    nodes, boundary = enumerate_grid_counts(n)
    assert mesh.n_nodes == nodes
    assert mesh.n_boundary == boundary


def test_paper_table_sizes():
    m2 = build_lshape_mesh(2)
    assert (m2.n_cells, m2.n_nodes) == (48, 65)
    assert (m2.n_boundary, m2.n_interior) == (32, 33)
    m6 = build_lshape_mesh(6)
    assert (m6.n_cells, m6.n_nodes) == (12288, 12545)


def test_rejects_nonpositive_level():
    with pytest.raises(ValueError):
        build_lshape_mesh(0)
    with pytest.raises(ValueError):
        build_lshape_mesh(-3)


def test_nodes_inside_closure(mesh3):
    x, y = mesh3.node_coords[:, 0], mesh3.node_coords[:, 1]
    assert (np.abs(x) <= 1.0).all() and (np.abs(y) <= 1.0).all()
    assert not ((x > 0.0) & (y < 0.0)).any()


def test_cells_are_squares(mesh2):
    h = mesh2.cell_size
    for cell in mesh2.cells[::7]:
        quad = mesh2.node_coords[cell]
        assert quad[1, 0] - quad[0, 0] == pytest.approx(h)
        assert quad[3, 1] - quad[0, 1] == pytest.approx(h)
        assert np.allclose(quad[2], quad[0] + [h, h])


def test_point_in_domain_examples():
    assert not point_in_domain(1.0 / 3.0, -1.0 / 3.0)
    assert not point_in_domain(0.0, 0.0)
    assert point_in_domain(-0.5, 0.5)
    # reentrant edges and outer boundary are excluded from the open set
    assert not point_in_domain(0.5, 0.0)
    assert not point_in_domain(1.0, 0.5)


def test_boundary_cycle_structure(mesh2, bmesh2):
    assert bmesh2.n_nodes == 32
    assert bmesh2.total_length == pytest.approx(8.0, abs=1e-14)
    # cycle order equals the mesh's boundary dof order
    assert np.array_equal(bmesh2.boundary_dofs, np.arange(mesh2.n_interior, mesh2.n_nodes))
    # starts at (-1, -1), runs counterclockwise (positive enclosed area)
    pts = mesh2.node_coords[bmesh2.boundary_dofs]
    assert tuple(pts[0]) == (-1.0, -1.0)
    nxt = np.roll(pts, -1, axis=0)
    area = 0.5 * np.sum(pts[:, 0] * nxt[:, 1] - nxt[:, 0] * pts[:, 1])
    assert area == pytest.approx(3.0, abs=1e-12)


def test_boundary_single_cycle_n1():
    mesh = build_lshape_mesh(1)
    bmesh = extract_boundary(mesh)
    assert bmesh.n_nodes == 16
    assert len(set(bmesh.boundary_dofs.tolist())) == 16


def test_edge_lengths_uniform():
    bmesh = extract_boundary(build_lshape_mesh(3))
    assert np.allclose(bmesh.edge_lengths, 0.125, atol=1e-15)


def test_consecutive_boundary_dofs_share_edge(mesh3, bmesh3):
    pts = mesh3.node_coords[bmesh3.boundary_dofs]
    gaps = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    assert np.allclose(gaps, mesh3.cell_size, atol=1e-15)


def test_global_to_boundary_bijection(mesh3, bmesh3):
    g2b = bmesh3.global_to_boundary
    assert (g2b[: mesh3.n_interior] == -1).all()
    assert sorted(g2b[bmesh3.boundary_dofs].tolist()) == list(range(bmesh3.n_nodes))


def test_extract_boundary_rejects_disconnected():
    # two disjoint unit squares: their boundary is two cycles
    coords = np.array(
        [
            [-1.0, -1.0], [0.0, -1.0], [0.0, 0.0], [-1.0, 0.0],
            [5.0, 5.0], [6.0, 5.0], [6.0, 6.0], [5.0, 6.0],
        ]
    )
    cells = np.array([[0, 1, 2, 3], [4, 5, 6, 7]])
    mesh = QuadMesh(level=1, node_coords=coords, cells=cells, n_interior=0, n_boundary=8)
    with pytest.raises(ValueError):
        extract_boundary(mesh)
