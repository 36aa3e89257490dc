"""Plain-text CSV storage for CSI matrices.

Layout::

    M,K_total,carrier_hz,spacing_hz
    <comma separated active bin indices>
    <M rows of K complex entries written as re+imj>
"""
from __future__ import annotations

import numpy as np

from .signal_model import ArrayGeometry, CsiMatrix, SubcarrierGrid


def _fmt(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def format_csi(csi: CsiMatrix) -> str:
    g = csi.grid
    lines = [
        f"{csi.geometry.M},{g.total_bins},{g.carrier_hz:.17g},{g.spacing_hz:.17g}",
        ",".join(str(int(i)) for i in g.active_bins),
    ]
    lines.extend(",".join(_fmt(z) for z in row) for row in csi.data)
    return "\n".join(lines) + "\n"


def write_csi(path, csi: CsiMatrix) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csi(csi))


def read_csi_raw(path):
    """Parse a CSI file without attaching a geometry.

    Returns ``(M, grid, data)``. Raises ``ValueError`` on malformed content.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 3:
        raise ValueError("CSI file needs a header, a bin line and data rows")
    head = lines[0].split(",")
    if len(head) != 4:
        raise ValueError("header must be M,K_total,carrier_hz,spacing_hz")
    M, k_total = int(head[0]), int(head[1])
    carrier, spacing = float(head[2]), float(head[3])
    bins = [int(v) for v in lines[1].split(",")]
    grid = SubcarrierGrid(carrier, spacing, k_total, np.array(bins))
    rows = [[complex(v.replace(" ", "")) for v in ln.split(",")] for ln in lines[2:]]
    if len(rows) != M or any(len(r) != grid.K for r in rows):
        raise ValueError(f"expected {M} rows of {grid.K} entries")
    return M, grid, np.array(rows, dtype=complex)


def read_csi(path, geometry: ArrayGeometry, spectrum=None) -> CsiMatrix:
    M, grid, data = read_csi_raw(path)
    if M != geometry.M:
        raise ValueError(f"file has M={M} sensors, geometry has M={geometry.M}")
    return CsiMatrix(data, geometry, grid, spectrum)
