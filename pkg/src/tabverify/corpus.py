"""Canonical table/statement model, XML parsing, the line-oriented JSON
interchange format, and corpus statistics.

XML schema (one table per file):

    <document id="...">
      <table id="..." header_rows="1">
        <caption text="..."/>
        <legend text="..."/>
        <row><cell text="..."/>...</row>
        ...
        <statements>
          <statement id="..." text="..." type="entailed|refuted|unknown">
            <evidence><cell row="0" col="1"/>...</evidence>   <!-- optional,
                 one element per ground-truth version -->
          </statement>
        </statements>
      </table>
    </document>

Ragged rows are padded on the right with empty-text cells so every grid is
rectangular.  All types are immutable after construction.
"""

from __future__ import annotations

import enum
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass

INTERCHANGE_VERSION = 1


class CorpusError(Exception):
    """Base class for corpus parsing/decoding failures."""


class ParseError(CorpusError):
    """Malformed XML; carries the underlying line/column position."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(CorpusError):
    """Well-formed XML or JSON that violates the table schema."""


class DecodeError(CorpusError):
    """Interchange bytes that cannot be decoded."""


class Label(enum.Enum):
    ENTAILED = "entailed"
    REFUTED = "refuted"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, value):
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise SchemaError(f"unrecognized label: {value!r}") from None


@dataclass(frozen=True)
class Cell:
    row: int
    col: int
    text: str


@dataclass(frozen=True)
class EvidenceVersion:
    """One gold minimal set of relevant cells, as (row, col) pairs."""

    relevant_cells: frozenset


@dataclass(frozen=True)
class Statement:
    stmt_id: str
    text: str
    gold_label: Label | None = None
    gold_evidence: tuple | None = None  # tuple of EvidenceVersion


@dataclass(frozen=True)
class TableDocument:
    doc_id: str
    table_id: str
    caption: str
    legend: str
    grid: tuple  # tuple of rows; each row a tuple of Cell
    header_rows: int
    statements: tuple  # tuple of Statement

    @property
    def n_rows(self):
        return len(self.grid)

    @property
    def n_cols(self):
        return len(self.grid[0]) if self.grid else 0

    @property
    def body_row_indices(self):
        return range(min(self.header_rows, self.n_rows), self.n_rows)


def _build_grid(rows_text):
    """Pad ragged rows on the right with empty cells; returns a Cell grid."""
    width = max((len(r) for r in rows_text), default=0)
    grid = []
    for r, texts in enumerate(rows_text):
        padded = list(texts) + [""] * (width - len(texts))
        grid.append(tuple(Cell(r, c, t) for c, t in enumerate(padded)))
    return tuple(grid)


def _check_statements(grid, statements, table_id):
    seen = set()
    n_rows = len(grid)
    n_cols = len(grid[0]) if grid else 0
    for st in statements:
        if st.stmt_id in seen:
            raise SchemaError(f"duplicate statement id {st.stmt_id!r} in table {table_id!r}")
        seen.add(st.stmt_id)
        if not st.text:
            raise SchemaError(f"statement {st.stmt_id!r} has empty text")
        for version in st.gold_evidence or ():
            if not version.relevant_cells:
                raise SchemaError(f"statement {st.stmt_id!r} has an empty evidence version")
            for r, c in version.relevant_cells:
                if not (0 <= r < n_rows and 0 <= c < n_cols):
                    raise SchemaError(
                        f"statement {st.stmt_id!r} evidence cell ({r}, {c}) out of bounds"
                    )


def make_document(doc_id, table_id, caption, legend, rows_text, header_rows, statements):
    """Assemble a TableDocument, enforcing all structural invariants."""
    if not table_id:
        raise SchemaError("missing table id")
    if header_rows < 0:
        raise SchemaError("header_rows must be >= 0")
    grid = _build_grid(rows_text)
    statements = tuple(statements)
    _check_statements(grid, statements, table_id)
    return TableDocument(doc_id, table_id, caption, legend, grid, header_rows, statements)


def _elem_text(parent, tag):
    elem = parent.find(tag)
    if elem is None:
        return ""
    return elem.get("text") or (elem.text or "").strip()


def parse_xml(data):
    """Parse one XML table document into a TableDocument."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ParseError(f"malformed XML: {exc.msg}", line, column) from exc

    table = root.find("table") if root.tag == "document" else root
    if table is None or table.tag != "table":
        raise SchemaError("expected a <table> element inside <document>")
    doc_id = root.get("id", "") if root.tag == "document" else ""
    table_id = table.get("id")
    if not table_id:
        raise SchemaError("missing table id")
    header_rows = int(table.get("header_rows", "1"))

    rows_text = []
    for row in table.findall("row"):
        rows_text.append([cell.get("text") or (cell.text or "").strip()
                          for cell in row.findall("cell")])

    statements = []
    stmts_elem = table.find("statements")
    if stmts_elem is not None:
        for st in stmts_elem.findall("statement"):
            stmt_id = st.get("id")
            if not stmt_id:
                raise SchemaError(f"statement without id in table {table_id!r}")
            label = None
            if st.get("type") is not None:
                label = Label.parse(st.get("type"))
            versions = []
            for ev in st.findall("evidence"):
                cells = frozenset(
                    (int(c.get("row")), int(c.get("col"))) for c in ev.findall("cell")
                )
                versions.append(EvidenceVersion(cells))
            statements.append(Statement(
                stmt_id=stmt_id,
                text=st.get("text") or (st.text or "").strip(),
                gold_label=label,
                gold_evidence=tuple(versions) or None,
            ))

    return make_document(doc_id, table_id, _elem_text(table, "caption"),
                         _elem_text(table, "legend"), rows_text, header_rows, statements)


def _statement_to_json(st):
    return {
        "stmt_id": st.stmt_id,
        "text": st.text,
        "label": st.gold_label.value if st.gold_label else None,
        "evidence": (
            [sorted([r, c] for r, c in v.relevant_cells) for v in st.gold_evidence]
            if st.gold_evidence is not None else None
        ),
    }


def _statement_from_json(obj):
    versions = None
    if obj.get("evidence") is not None:
        versions = tuple(
            EvidenceVersion(frozenset((r, c) for r, c in v)) for v in obj["evidence"]
        )
    return Statement(
        stmt_id=obj["stmt_id"],
        text=obj["text"],
        gold_label=Label.parse(obj["label"]) if obj.get("label") else None,
        gold_evidence=versions,
    )


def to_interchange(doc):
    """Serialize one document to a single interchange JSON line (bytes)."""
    obj = {
        "format_version": INTERCHANGE_VERSION,
        "doc_id": doc.doc_id,
        "table_id": doc.table_id,
        "caption": doc.caption,
        "legend": doc.legend,
        "grid": [[cell.text for cell in row] for row in doc.grid],
        "header_rows": doc.header_rows,
        "statements": [_statement_to_json(st) for st in doc.statements],
    }
    return (json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n").encode("utf-8")


def from_interchange(data):
    """Decode one interchange line back into a TableDocument."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DecodeError(f"invalid interchange JSON: {exc}") from exc
    version = obj.get("format_version")
    if version != INTERCHANGE_VERSION:
        raise DecodeError(f"unsupported interchange version: {version!r}")
    try:
        return make_document(
            doc_id=obj["doc_id"],
            table_id=obj["table_id"],
            caption=obj["caption"],
            legend=obj["legend"],
            rows_text=obj["grid"],
            header_rows=obj["header_rows"],
            statements=[_statement_from_json(s) for s in obj["statements"]],
        )
    except KeyError as exc:
        raise DecodeError(f"interchange line missing field {exc}") from exc
    except SchemaError as exc:
        raise DecodeError(str(exc)) from exc


def read_corpus(path):
    """Read a corpus: one interchange line per table."""
    docs = []
    with open(path, "rb") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                docs.append(from_interchange(line))
            except DecodeError as exc:
                raise DecodeError(f"{path}:{lineno}: {exc}") from exc
    return docs


def write_corpus(docs, path):
    with open(path, "wb") as fh:
        for doc in docs:
            fh.write(to_interchange(doc))


def _minmaxmean(values):
    if not values:
        return 0, 0, 0.0
    return max(values), min(values), sum(values) / len(values)


@dataclass(frozen=True)
class CorpusStats:
    table_count: int
    entailed: int
    refuted: int
    unknown: int
    stmt_tokens_max: int
    stmt_tokens_min: int
    stmt_tokens_mean: float
    row_tokens_max: int
    row_tokens_min: int
    row_tokens_mean: float
    row_count_max: int
    row_count_min: int
    row_count_mean: float

    def to_json(self):
        return dict(self.__dict__)


def corpus_stats(corpus):
    """Descriptive statistics over a corpus.

    Token counts use plain whitespace splitting: statements on their text,
    tables on the per-row concatenation of cell texts.
    """
    labels = {Label.ENTAILED: 0, Label.REFUTED: 0, Label.UNKNOWN: 0}
    stmt_tokens = []
    row_tokens = []
    row_counts = []
    for doc in corpus:
        row_counts.append(doc.n_rows)
        for row in doc.grid:
            row_tokens.append(len(" ".join(cell.text for cell in row).split()))
        for st in doc.statements:
            stmt_tokens.append(len(st.text.split()))
            if st.gold_label is not None:
                labels[st.gold_label] += 1
    s_max, s_min, s_mean = _minmaxmean(stmt_tokens)
    r_max, r_min, r_mean = _minmaxmean(row_tokens)
    c_max, c_min, c_mean = _minmaxmean(row_counts)
    return CorpusStats(
        table_count=len(corpus),
        entailed=labels[Label.ENTAILED],
        refuted=labels[Label.REFUTED],
        unknown=labels[Label.UNKNOWN],
        stmt_tokens_max=s_max, stmt_tokens_min=s_min, stmt_tokens_mean=s_mean,
        row_tokens_max=r_max, row_tokens_min=r_min, row_tokens_mean=r_mean,
        row_count_max=c_max, row_count_min=c_min, row_count_mean=c_mean,
    )
