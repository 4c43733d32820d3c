"""Uniform quadrilateral meshes of the L-shaped domain.

The domain is Omega = (-1, 1)^2 \\ [0, 1) x (-1, 0]: the unit-square
ring with the lower-right quadrant removed.  Meshes are uniform grids
of axis-aligned squares of side 2^-n.  Degrees of freedom are ordered
interior first, then boundary; the boundary dofs trace the closed
polygonal curve counterclockwise starting from the corner (-1, -1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["QuadMesh", "BoundaryMesh", "build_lshape_mesh", "extract_boundary", "point_in_domain"]


def point_in_domain(x, y):
    """True iff (x, y) lies in the open L-shaped domain.

    The removed quadrant is closed on its inner edges, so points with
    x >= 0 and y <= 0 (including the reentrant corner) are excluded.
    Accepts scalars or numpy arrays.
    """
    inside_square = (x > -1.0) & (x < 1.0) & (y > -1.0) & (y < 1.0)
    in_removed = (x >= 0.0) & (y <= 0.0)
    return inside_square & ~in_removed


@dataclass(frozen=True)
class QuadMesh:
    """Uniform quadrilateral mesh of the L-shaped domain.

    Nodes 0..n_interior-1 are interior; the remaining n_boundary nodes
    follow in counterclockwise boundary order starting at (-1, -1).
    Cells list their four corner nodes counterclockwise starting from
    the lower-left one.  All arrays are read-only; instances are safe
    to share across workers.
    """

    level: int
    node_coords: np.ndarray  # (n_nodes, 2)
    cells: np.ndarray        # (n_cells, 4), counterclockwise
    n_interior: int
    n_boundary: int
    # grid-index -> cell id lookup (-1 where the cell is removed); used
    # for point location on this structured mesh
    cell_grid: np.ndarray = field(repr=False, default=None)

    @property
    def n_nodes(self) -> int:
        return self.n_interior + self.n_boundary

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def cell_size(self) -> float:
        """Side length of every cell, 2^-level."""
        return 2.0 ** (-self.level)

    @property
    def mesh_size(self) -> float:
        """Cell diameter sqrt(2) * 2^-level."""
        return np.sqrt(2.0) * self.cell_size


@dataclass(frozen=True)
class BoundaryMesh:
    """The boundary curve as a periodic 1D piecewise-linear mesh.

    boundary_dofs[k] is the global dof of the k-th node along the
    closed cycle; edge k joins nodes k and (k+1) mod n_edges.
    """

    boundary_dofs: np.ndarray     # (N_b,) global dof ids in cycle order
    edge_lengths: np.ndarray      # (N_b,) arclength of each edge
    global_to_boundary: np.ndarray  # (n_nodes,) inverse map, -1 off the boundary

    @property
    def n_nodes(self) -> int:
        return len(self.boundary_dofs)

    @property
    def total_length(self) -> float:
        return float(self.edge_lengths.sum())


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def build_lshape_mesh(n: int) -> QuadMesh:
    """Build the level-n uniform mesh: 3 * 4^n squares of side 2^-n.

    Raises ValueError for n < 1.
    """
    if n < 1:
        raise ValueError(f"refinement level must be >= 1, got {n}")

    side = 2 ** (n + 1)   # grid cells per direction on the full square
    half = side // 2
    h = 2.0 ** (-n)

    # Nodes live on the integer grid (i, j) ~ (-1 + i*h, -1 + j*h).  A
    # grid node is kept unless it lies strictly inside the removed
    # quadrant; it is interior when it avoids the outer square boundary
    # and the two reentrant edges.
    ii, jj = np.meshgrid(np.arange(side + 1), np.arange(side + 1), indexing="ij")
    kept = ~((ii > half) & (jj < half))
    interior = (ii > 0) & (ii < side) & (jj > 0) & (jj < side) & ~((ii >= half) & (jj <= half))
    boundary = kept & ~interior

    node_id = np.full((side + 1, side + 1), -1, dtype=np.int64)
    # interior dofs in row-major (j, then i) scan order
    ji_scan = np.argwhere(interior.T)          # rows of (j, i)
    n_int = len(ji_scan)
    node_id[ji_scan[:, 1], ji_scan[:, 0]] = np.arange(n_int)

    # boundary dofs in counterclockwise cycle order from (-1, -1)
    cycle = _boundary_cycle_indices(side, half)
    node_id[cycle[:, 0], cycle[:, 1]] = n_int + np.arange(len(cycle))
    n_bnd = len(cycle)

    assert int(boundary.sum()) == n_bnd

    coords = np.empty((n_int + n_bnd, 2))
    filled = node_id >= 0
    coords[node_id[filled]] = np.column_stack(
        [-1.0 + ii[filled] * h, -1.0 + jj[filled] * h]
    )

    # cells: lower-left grid index (ci, cj); removed when fully inside
    # the deleted quadrant
    ci, cj = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    cell_kept = ~((ci >= half) & (cj < half))
    kept_ji = np.argwhere(cell_kept.T)          # scan j outer, i inner
    kc_i, kc_j = kept_ji[:, 1], kept_ji[:, 0]
    cells = np.column_stack(
        [
            node_id[kc_i, kc_j],
            node_id[kc_i + 1, kc_j],
            node_id[kc_i + 1, kc_j + 1],
            node_id[kc_i, kc_j + 1],
        ]
    )
    assert (cells >= 0).all()

    cell_grid = np.full((side, side), -1, dtype=np.int64)
    cell_grid[kc_i, kc_j] = np.arange(len(cells))

    return QuadMesh(
        level=n,
        node_coords=_freeze(coords),
        cells=_freeze(cells),
        n_interior=n_int,
        n_boundary=n_bnd,
        cell_grid=_freeze(cell_grid),
    )


def _boundary_cycle_indices(side: int, half: int) -> np.ndarray:
    """Grid indices (i, j) of the boundary nodes, counterclockwise from (0, 0).

    The six straight segments of the L-shape are concatenated, each
    omitting its final node (owned by the next segment).
    """
    seg = []
    seg.append([(i, 0) for i in range(0, half)])                 # y=-1, toward (0,-1)
    seg.append([(half, j) for j in range(0, half)])              # x=0, up to (0,0)
    seg.append([(i, half) for i in range(half, side)])           # y=0, toward (1,0)
    seg.append([(side, j) for j in range(half, side)])           # x=1, up to (1,1)
    seg.append([(i, side) for i in range(side, 0, -1)])          # y=1, toward (-1,1)
    seg.append([(0, j) for j in range(side, 0, -1)])             # x=-1, down to start
    return np.array([ij for s in seg for ij in s], dtype=np.int64)


def extract_boundary(mesh: QuadMesh) -> BoundaryMesh:
    """Trace the boundary curve of the mesh as one closed cycle.

    Boundary edges are the cell edges owned by exactly one cell; they
    are walked in the cells' counterclockwise orientation.  Raises
    ValueError when the walk does not close into a single cycle
    covering every boundary edge (malformed mesh).
    """
    cells = mesh.cells
    # directed edges of every cell, counterclockwise
    tails = cells.ravel()
    heads = cells[:, [1, 2, 3, 0]].ravel()
    lo = np.minimum(tails, heads)
    hi = np.maximum(tails, heads)
    key = lo * mesh.n_nodes + hi
    _, inverse, counts = np.unique(key, return_inverse=True, return_counts=True)
    on_boundary = counts[inverse] == 1

    succ = {int(t): int(h) for t, h in zip(tails[on_boundary], heads[on_boundary])}
    n_edges = int(on_boundary.sum())
    if len(succ) != n_edges:
        raise ValueError("boundary edges do not form a simple cycle")

    start_matches = np.flatnonzero(
        (mesh.node_coords[:, 0] == -1.0) & (mesh.node_coords[:, 1] == -1.0)
    )
    if len(start_matches) != 1:
        raise ValueError("mesh has no unique corner node at (-1, -1)")
    start = int(start_matches[0])

    cycle = [start]
    cur = succ.get(start)
    while cur is not None and cur != start and len(cycle) <= n_edges:
        cycle.append(cur)
        cur = succ.get(cur)
    if cur != start or len(cycle) != n_edges:
        raise ValueError("mesh boundary is not a single closed cycle")

    boundary_dofs = np.array(cycle, dtype=np.int64)
    nxt = np.roll(boundary_dofs, -1)
    edge_lengths = np.linalg.norm(
        mesh.node_coords[nxt] - mesh.node_coords[boundary_dofs], axis=1
    )

    global_to_boundary = np.full(mesh.n_nodes, -1, dtype=np.int64)
    global_to_boundary[boundary_dofs] = np.arange(len(boundary_dofs))

    return BoundaryMesh(
        boundary_dofs=_freeze(boundary_dofs),
        edge_lengths=_freeze(edge_lengths),
        global_to_boundary=_freeze(global_to_boundary),
    )
