"""Uniform MAC grid with periodic topology in one and two space dimensions.

Scalars live on primal cells, velocity components on the faces orthogonal to
each coordinate direction.  Cells and the faces of any one direction share the
same flat row-major lattice layout: face ``s`` of direction ``d`` is the
plus-side face of cell ``s``, so its owner cell is ``s`` itself and its
neighbor is the cell one lattice step up along ``d`` (with periodic wrap).
Every face is internal; there is no boundary face set.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

Array = np.ndarray


class Mesh:
    """Geometry and adjacency tables of a uniform periodic MAC grid.

    Attributes
    ----------
    dim : int
        Spatial dimension (1 or 2).
    extents : tuple of (float, float)
        Per-axis domain interval.
    counts : tuple of int
        Cells per axis.
    spacing : tuple of float
        Grid spacing per axis.
    cell_volume : float
        Measure of one primal cell (all cells equal).
    face_area : tuple of float
        Measure of a face orthogonal to each axis (1.0 in 1D).
    dual_volume : tuple of float
        Measure of a dual (face-centered) cell per direction; equals
        ``cell_volume`` on a uniform periodic grid.
    shift_minus, shift_plus : tuple of int arrays
        Precomputed lattice index tables: ``shift_plus[a][i]`` is the flat
        index of the lattice site one step up along axis ``a`` from site
        ``i``.  They serve cells and the face set of any direction alike.
    face_owner, face_neighbor : tuple of int arrays
        ``face_owner[d][s]`` and ``face_neighbor[d][s]`` are the two cells
        sharing face ``s`` of direction ``d``; the face normal points from
        owner to neighbor along ``+e_d``.
    """

    def __init__(self, extents, counts):
        extents = tuple((float(a), float(b)) for a, b in extents)
        counts = tuple(int(n) for n in counts)
        if len(extents) != len(counts):
            raise ConfigurationError("extents and counts must have matching length")
        dim = len(counts)
        if dim not in (1, 2):
            raise ConfigurationError(f"unsupported dimension {dim} (expected 1 or 2)")
        for (a, b), n in zip(extents, counts):
            if n < 2:
                raise ConfigurationError(f"cell count {n} too small (need >= 2 per axis)")
            if not b > a:
                raise ConfigurationError(f"degenerate extent ({a}, {b})")

        self.dim = dim
        self.extents = extents
        self.counts = counts
        self.spacing = tuple((b - a) / n for (a, b), n in zip(extents, counts))
        self.n_cells = int(np.prod(counts))
        self.cell_volume = float(np.prod(self.spacing))
        if dim == 1:
            self.face_area = (1.0,)
        else:
            dx, dy = self.spacing
            self.face_area = (dy, dx)
        # Dual cells are the two half-cells around a face: |D| = |K| on a
        # uniform periodic grid, for every direction.
        self.dual_volume = tuple(self.cell_volume for _ in range(dim))
        self.n_faces = tuple(self.n_cells for _ in range(dim))

        idx = np.arange(self.n_cells)
        if dim == 1:
            nx = counts[0]
            self.shift_plus = (((idx + 1) % nx),)
            self.shift_minus = (((idx - 1) % nx),)
        else:
            nx, ny = counts
            ix = idx % nx
            iy = idx // nx
            self.shift_plus = (
                iy * nx + (ix + 1) % nx,
                ((iy + 1) % ny) * nx + ix,
            )
            self.shift_minus = (
                iy * nx + (ix - 1) % nx,
                ((iy - 1) % ny) * nx + ix,
            )
        self.face_owner = tuple(idx for _ in range(dim))
        self.face_neighbor = tuple(self.shift_plus[d] for d in range(dim))

    @property
    def domain_volume(self):
        return float(np.prod([b - a for a, b in self.extents]))

    def cell_centers(self):
        """Coordinate arrays of the primal cell centers, one per axis."""
        return self._lattice_coords(offset=[0.5] * self.dim)

    def face_centers(self, direction):
        """Coordinate arrays of the face centers of one direction."""
        offset = [0.5] * self.dim
        offset[direction] = 1.0
        return self._lattice_coords(offset=offset)

    def _lattice_coords(self, offset):
        # a + (b-a) * k/n keeps lattice-aligned coordinates exact (jump data
        # in the benchmark cases sits exactly on cell boundaries)
        idx = np.arange(self.n_cells)
        if self.dim == 1:
            (a, b), = self.extents
            return ((a + (b - a) * ((idx + offset[0]) / self.counts[0])),)
        nx, _ = self.counts
        ix = idx % nx
        iy = idx // nx
        (ax, bx), (ay, by) = self.extents
        x = ax + (bx - ax) * ((ix + offset[0]) / self.counts[0])
        y = ay + (by - ay) * ((iy + offset[1]) / self.counts[1])
        return (x, y)

    def perimeter_ratio(self, cell=None):
        """|boundary(K)| / |K| for one cell (identical for all cells here).

        In 1D the two point-faces carry unit measure, so the ratio is 2/h.
        """
        ratio = 2.0 * sum(self.face_area) / self.cell_volume
        if cell is None:
            return ratio
        if not 0 <= int(cell) < self.n_cells:
            raise IndexError(f"cell index {cell} out of range")
        return ratio

    def validate(self, tol=1e-12):
        """Check the volume identities; raises AssertionError on failure."""
        omega = self.domain_volume
        assert abs(self.n_cells * self.cell_volume - omega) <= tol * omega
        for d in range(self.dim):
            assert abs(self.n_faces[d] * self.dual_volume[d] - omega) <= tol * omega
            # face adjacency is an involution under periodic wrap
            assert np.array_equal(self.shift_minus[d][self.shift_plus[d]], np.arange(self.n_cells))


def build_uniform_mesh(extents, counts) -> Mesh:
    """Build a uniform periodic MAC mesh; validates the type invariants."""
    mesh = Mesh(extents, counts)
    mesh.validate()
    return mesh
