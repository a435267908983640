"""Matrix Market I/O and small shared matrix helpers.

Dense matrices are plain float64 numpy arrays; sparse matrices are
canonical ``scipy.sparse.csc_array`` objects (sorted row indices inside
each column, duplicates summed, no stored zeros).  Files follow the NIST
Matrix Market text format, ``coordinate real general`` for sparse data
and ``array real general`` for dense data, with 1-based indices on disk.

Values are written with 17 significant digits so a write/read round trip
reproduces every float64 exactly.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .exceptions import MatrixMarketError, ParameterError

_HEADER_PREFIX = "%%matrixmarket"


def canonicalize(a) -> sp.csc_array:
    """Copy of `a` in canonical CSC form (sorted, deduplicated, no zeros).

    Always copies: the canonicalization steps mutate their buffers, and the
    csc constructor shares them with the input.
    """
    a = sp.csc_array(a, copy=True)
    a.sum_duplicates()
    a.sort_indices()
    a.eliminate_zeros()
    return a


def read_matrix_market(path):
    """Read a Matrix Market file.

    Coordinate files become canonical CSC (duplicate entries summed);
    array files become dense float64 arrays.  Raises
    :class:`MatrixMarketError` naming the offending line on any parse
    problem.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", line=1)

    header = lines[0].strip().lower().split()
    if len(header) != 5 or header[0] != _HEADER_PREFIX or header[1] != "matrix":
        raise MatrixMarketError("expected '%%MatrixMarket matrix <format> <field> <symmetry>' header", line=1)
    fmt, field, symmetry = header[2], header[3], header[4]
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format '{fmt}'", line=1)
    if field != "real":
        raise MatrixMarketError(f"unsupported field '{field}' (only 'real')", line=1)
    if symmetry != "general":
        raise MatrixMarketError(f"unsupported symmetry '{symmetry}' (only 'general')", line=1)

    pos = 1
    while pos < len(lines) and (not lines[pos].strip() or lines[pos].lstrip().startswith("%")):
        pos += 1
    if pos >= len(lines):
        raise MatrixMarketError("missing size line", line=len(lines))

    size_fields = lines[pos].split()
    size_line = pos + 1

    if fmt == "coordinate":
        if len(size_fields) != 3:
            raise MatrixMarketError("coordinate size line needs 'rows cols nnz'", line=size_line)
        try:
            rows, cols, nnz = (int(f) for f in size_fields)
        except ValueError:
            raise MatrixMarketError("size line entries must be integers", line=size_line) from None
        if rows < 0 or cols < 0 or nnz < 0:
            raise MatrixMarketError("size entries must be nonnegative", line=size_line)
        ii = np.empty(nnz, dtype=np.int64)
        jj = np.empty(nnz, dtype=np.int64)
        vv = np.empty(nnz, dtype=np.float64)
        k = 0
        for off, text in enumerate(lines[pos + 1:], start=size_line + 1):
            if not text.strip():
                continue
            parts = text.split()
            if k >= nnz:
                raise MatrixMarketError("more entries than declared", line=off)
            if len(parts) != 3:
                raise MatrixMarketError("entry line needs 'i j value'", line=off)
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise MatrixMarketError(f"cannot parse entry '{text.strip()}'", line=off) from None
            if not (1 <= i <= rows) or not (1 <= j <= cols):
                raise MatrixMarketError(f"index ({i}, {j}) out of range for {rows}x{cols}", line=off)
            ii[k], jj[k], vv[k] = i - 1, j - 1, v
            k += 1
        if k != nnz:
            raise MatrixMarketError(f"declared {nnz} entries but found {k}", line=len(lines))
        coo = sp.coo_array((vv, (ii, jj)), shape=(rows, cols))
        return canonicalize(coo.tocsc())

    if len(size_fields) != 2:
        raise MatrixMarketError("array size line needs 'rows cols'", line=size_line)
    try:
        rows, cols = (int(f) for f in size_fields)
    except ValueError:
        raise MatrixMarketError("size line entries must be integers", line=size_line) from None
    if rows < 0 or cols < 0:
        raise MatrixMarketError("size entries must be nonnegative", line=size_line)
    total = rows * cols
    data = np.empty(total, dtype=np.float64)
    k = 0
    for off, text in enumerate(lines[pos + 1:], start=size_line + 1):
        if not text.strip():
            continue
        if k >= total:
            raise MatrixMarketError("more values than declared", line=off)
        try:
            data[k] = float(text)
        except ValueError:
            raise MatrixMarketError(f"cannot parse value '{text.strip()}'", line=off) from None
        k += 1
    if k != total:
        raise MatrixMarketError(f"declared {total} values but found {k}", line=len(lines))
    return data.reshape((rows, cols), order="F").copy()


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def format_matrix_market(mat) -> str:
    """Matrix Market text for a dense array (array format) or sparse matrix
    (coordinate format)."""
    out = []
    if sp.issparse(mat):
        a = canonicalize(mat)
        rows, cols = a.shape
        out.append("%%MatrixMarket matrix coordinate real general")
        out.append(f"{rows} {cols} {a.nnz}")
        indptr, indices, values = a.indptr, a.indices, a.data
        for j in range(cols):
            for t in range(indptr[j], indptr[j + 1]):
                out.append(f"{indices[t] + 1} {j + 1} {_fmt(values[t])}")
    else:
        a = np.asarray(mat, dtype=np.float64)
        if a.ndim != 2:
            raise ParameterError("expected a 2-D matrix")
        rows, cols = a.shape
        out.append("%%MatrixMarket matrix array real general")
        out.append(f"{rows} {cols}")
        for j in range(cols):
            for i in range(rows):
                out.append(_fmt(a[i, j]))
    return "\n".join(out) + "\n"


def write_matrix_market(mat, path) -> None:
    """Write a matrix to `path` in Matrix Market format."""
    text = format_matrix_market(mat)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def frobenius_norm(mat) -> float:
    """Square root of the sum of squared entries; 0.0 for empty matrices."""
    if sp.issparse(mat):
        data = mat.data
        return float(np.sqrt(np.sum(data * data))) if data.size else 0.0
    a = np.asarray(mat, dtype=np.float64)
    return float(np.linalg.norm(a)) if a.size else 0.0


def matmul(a, b):
    """Matrix product with dimension checking; always returns a dense array.

    Accepts dense arrays, CSC matrices, and their transposes on either side.
    """
    a_cols = a.shape[1]
    b_rows = b.shape[0]
    if a_cols != b_rows:
        raise ParameterError(f"inner dimensions disagree: {a.shape} x {b.shape}")
    out = a @ b
    if sp.issparse(out):
        out = out.toarray()
    return np.asarray(out, dtype=np.float64)
