"""
MacKay alist text format for sparse parity-check matrices.

    n m                      (columns = variable nodes, rows = check nodes)
    max_col_weight max_row_weight
    col weights (n values)
    row weights (m values)
    n lines: 1-based row indices of each column, zero-padded to max_col_weight
    m lines: 1-based column indices of each row, zero-padded to max_row_weight

The writer output is canonical (single spaces, one trailing newline per line) because the
codec digest is computed over it.
"""

from pathlib import Path

from core.exceptions import FormatError

CheckRows = tuple[tuple[int, ...], ...]


def _padded(values: list[int], width: int) -> str:
    return " ".join(str(v) for v in values + [0] * (width - len(values)))


def dumps(n_vars: int, n_checks: int, check_rows: CheckRows) -> str:
    columns: list[list[int]] = [[] for _ in range(n_vars)]
    for c, row in enumerate(check_rows):
        for v in row:
            columns[v].append(c + 1)
    rows = [[v + 1 for v in row] for row in check_rows]
    max_col = max(len(col) for col in columns)
    max_row = max(len(row) for row in rows)
    lines = [
        f"{n_vars} {n_checks}",
        f"{max_col} {max_row}",
        " ".join(str(len(col)) for col in columns),
        " ".join(str(len(row)) for row in rows),
    ]
    lines += [_padded(col, max_col) for col in columns]
    lines += [_padded(row, max_row) for row in rows]
    return "\n".join(lines) + "\n"


def loads(text: str) -> tuple[int, int, CheckRows]:
    "Parses alist text; the row section is authoritative, the column section is cross-checked."
    try:
        lines = [[int(tok) for tok in line.split()] for line in text.splitlines() if line.strip()]
    except ValueError as e:
        raise FormatError(f"Non-integer token in alist data: {e}") from e
    if len(lines) < 4 or len(lines[0]) != 2:
        raise FormatError("Truncated alist header")
    n_vars, n_checks = lines[0]
    if n_vars <= 0 or n_checks <= 0:
        raise FormatError("Invalid alist file: non-positive matrix dimensions")
    col_weights, row_weights = lines[2], lines[3]
    if len(col_weights) != n_vars or len(row_weights) != n_checks:
        raise FormatError("Mismatch between declared dimensions and weight lists")
    if len(lines) != 4 + n_vars + n_checks:
        raise FormatError(f"Expected {4 + n_vars + n_checks} alist lines, found {len(lines)}")

    edges_from_cols = set()
    for v in range(n_vars):
        for c in lines[4 + v][: col_weights[v]]:
            if not 1 <= c <= n_checks:
                raise FormatError(f"Invalid row index {c} in column {v + 1}")
            edges_from_cols.add((c - 1, v))

    rows = []
    for c in range(n_checks):
        row = [v - 1 for v in lines[4 + n_vars + c][: row_weights[c]]]
        if any(not 0 <= v < n_vars for v in row):
            raise FormatError(f"Invalid column index in row {c + 1}")
        rows.append(tuple(row))

    edges_from_rows = {(c, v) for c, row in enumerate(rows) for v in row}
    if edges_from_rows != edges_from_cols:
        raise FormatError("Column and row sections of the alist file disagree")
    return n_vars, n_checks, tuple(rows)


def read_alist(path: str | Path) -> tuple[int, int, CheckRows]:
    return loads(Path(path).read_text(encoding="utf-8"))


def write_alist(path: str | Path, n_vars: int, n_checks: int, check_rows: CheckRows):
    Path(path).write_text(dumps(n_vars, n_checks, check_rows), encoding="utf-8")
