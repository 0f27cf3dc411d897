"""Evidence-cell rule engine: given a statement, a table and the statement's
verdict, mark each cell relevant or irrelevant.

An Entailed verdict short-circuits to all-relevant.  Otherwise four rules
fire off the statement's normalized word bag, matched by exact token
equality against normalized cell tokens (a bag word matching any token of a
multi-token cell counts):

  rule 1: word in a header-row cell of column c -> all body cells of c
  rule 2: word in a first-column body cell of row r -> all cells of r
  rule 3: same word in a header cell of column c AND the first-column cell
          of body row r -> cell (r, c)
  rule 4: word in any cell -> that cell

Relevance is the union of all firings.  Unknown statements are outside
Task B and rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import textnorm
from .corpus import Label

ALL_ENTAILED = "all-entailed"


class TaskBExclusionError(ValueError):
    pass


@dataclass(frozen=True)
class EvidenceMap:
    table_id: str
    stmt_id: str
    verdicts: tuple  # grid-shaped tuple of tuple of bool

    def relevant_cells(self):
        return {(r, c) for r, row in enumerate(self.verdicts)
                for c, v in enumerate(row) if v}


@dataclass(frozen=True)
class RuleTrace:
    cells: tuple  # grid-shaped tuple of tuple of tuple-of-rule-ids


def find_evidence(statement, table, taska_label, abbrevs=None):
    """Apply the rule engine; returns (EvidenceMap, RuleTrace)."""
    if taska_label == Label.UNKNOWN:
        raise TaskBExclusionError("Task B excludes unknown statements")
    n_rows, n_cols = table.n_rows, table.n_cols
    if taska_label == Label.ENTAILED:
        verdicts = tuple(tuple(True for _ in range(n_cols)) for _ in range(n_rows))
        trace = tuple(tuple((ALL_ENTAILED,) for _ in range(n_cols)) for _ in range(n_rows))
        return (EvidenceMap(table.table_id, statement.stmt_id, verdicts),
                RuleTrace(trace))

    bag = set(textnorm.normalize(statement.text, abbrevs))
    cell_tokens = [[set(textnorm.normalize(cell.text, abbrevs)) for cell in row]
                   for row in table.grid]
    header_rows = min(table.header_rows, n_rows)
    body = range(header_rows, n_rows)
    fired = [[set() for _ in range(n_cols)] for _ in range(n_rows)]

    for word in bag:
        header_cols = {c for r in range(header_rows) for c in range(n_cols)
                       if word in cell_tokens[r][c]}
        label_rows = {r for r in body
                      if n_cols > 0 and word in cell_tokens[r][0]}
        for c in header_cols:
            for r in body:
                fired[r][c].add("1")
        for r in label_rows:
            for c in range(n_cols):
                fired[r][c].add("2")
        for r in label_rows:
            for c in header_cols:
                fired[r][c].add("3")
        for r in range(n_rows):
            for c in range(n_cols):
                if word in cell_tokens[r][c]:
                    fired[r][c].add("4")

    verdicts = tuple(tuple(bool(fired[r][c]) for c in range(n_cols))
                     for r in range(n_rows))
    trace = tuple(tuple(tuple(sorted(fired[r][c])) for c in range(n_cols))
                  for r in range(n_rows))
    return (EvidenceMap(table.table_id, statement.stmt_id, verdicts),
            RuleTrace(trace))


def rle_encode(verdicts):
    """Row-major run-length encoding; runs alternate starting with False."""
    flat = [v for row in verdicts for v in row]
    runs = []
    current = False
    count = 0
    for v in flat:
        if v == current:
            count += 1
        else:
            runs.append(count)
            current = v
            count = 1
    runs.append(count)
    return runs


def rle_decode(runs, n_rows, n_cols):
    flat = []
    current = False
    for count in runs:
        flat.extend([current] * count)
        current = not current
    if len(flat) != n_rows * n_cols:
        raise ValueError(f"run lengths sum to {len(flat)}, expected {n_rows * n_cols}")
    return tuple(tuple(flat[r * n_cols:(r + 1) * n_cols]) for r in range(n_rows))
