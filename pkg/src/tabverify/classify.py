"""Per-model classification scores: the linearized model input, a
deterministic lexical baseline, and the JSON-lines score file boundary to
external neural models.

Class order is fixed as [Entailed, Refuted, Unknown] everywhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import textnorm
from .corpus import Label
from .snapshot import row_text

CLS = "[CLS]"
SEP = "[SEP]"
SEP_CELL = "[SEP-CELL]"

CLASS_ORDER = (Label.ENTAILED, Label.REFUTED, Label.UNKNOWN)

# Multiplier applied to the overlap score for the Refuted slot when the
# statement contains a negation cue; > 1 so negated high-overlap statements
# flip toward Refuted.
NEGATION_FACTOR = 2.0


class ScoreFileError(ValueError):
    pass


class SnapshotMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class ScoreVector:
    model_name: str
    table_id: str
    stmt_id: str
    scores: tuple  # (entailed, refuted, unknown)
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.model_name:
            raise ScoreFileError("model_name must be non-empty")
        if len(self.scores) != 3:
            raise ScoreFileError(f"expected 3 scores, got {len(self.scores)}")
        if not all(math.isfinite(s) for s in self.scores):
            raise ScoreFileError(f"non-finite score in {self.scores}")


@dataclass(frozen=True)
class LinearizedInput:
    tokens: tuple


def linearize(statement, table, snap, abbrevs=None):
    """Flatten (statement, snapshot table) into one marker-delimited token
    sequence: [CLS] statement [SEP] header rows then selected body rows,
    row-major, cells separated by [SEP-CELL].

    Tokens are surface tokens (lowercased, abbreviation-expanded, unstemmed).
    """
    if snap.table_id != table.table_id or snap.stmt_id != statement.stmt_id:
        raise SnapshotMismatchError(
            f"snapshot ({snap.table_id}, {snap.stmt_id}) does not belong to "
            f"({table.table_id}, {statement.stmt_id})")
    tokens = [CLS]
    tokens.extend(textnorm.normalize(statement.text, abbrevs, stemming=False))
    tokens.append(SEP)
    header = [r for r in range(min(table.header_rows, table.n_rows))]
    cells = []
    for r in header + list(snap.row_indices):
        cells.extend(table.grid[r])
    for i, cell in enumerate(cells):
        if i:
            tokens.append(SEP_CELL)
        tokens.extend(textnorm.normalize(cell.text, abbrevs, stemming=False))
    return LinearizedInput(tuple(tokens))


def lexical_baseline(statement, table, snap, abbrevs=None,
                     n_values=(1, 2), model_name="lexical"):
    """Deterministic stand-in classifier.

    Scores (o, n, 1-o), where o is the best overlap rate over snapshot rows
    and n = o * NEGATION_FACTOR when the statement carries a negation cue
    (0 otherwise).  Scores are raw, not normalized.
    """
    stmt_tokens = textnorm.normalize(statement.text, abbrevs)
    stmt_grams = textnorm.ngram_set(stmt_tokens, n_values)
    o = 0.0
    for idx in snap.row_indices:
        grams = textnorm.ngram_set(
            textnorm.normalize(row_text(table, idx), abbrevs), n_values)
        o = max(o, textnorm.overlap_rate(stmt_grams, grams))
    negated = bool(textnorm.NEGATION_TOKENS & set(stmt_tokens))
    n = o * NEGATION_FACTOR if negated else 0.0
    return ScoreVector(model_name, table.table_id, statement.stmt_id,
                       (o, n, 1.0 - o))


def write_scores(score_vectors, path):
    """One JSON object per line; unknown fields round-trip opaquely."""
    with open(path, "w", encoding="utf-8") as fh:
        for sv in score_vectors:
            obj = dict(sv.extra)
            obj.update(model=sv.model_name, table_id=sv.table_id,
                       stmt_id=sv.stmt_id, scores=list(sv.scores))
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def read_scores(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScoreFileError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                extra = {k: v for k, v in obj.items()
                         if k not in ("model", "table_id", "stmt_id", "scores")}
                sv = ScoreVector(obj["model"], obj["table_id"], obj["stmt_id"],
                                 tuple(obj["scores"]), extra)
            except KeyError as exc:
                raise ScoreFileError(f"{path}:{lineno}: missing field {exc}") from exc
            except ScoreFileError as exc:
                raise ScoreFileError(f"{path}:{lineno}: {exc}") from exc
            out.append(sv)
    return out
