"""Training-corpus augmentation: merge external corpora and synthesize
"unknown" statements by borrowing statements from other tables.

The draw loop is a single deterministic pass in table order, seeded through
AugmentConfig; callers must not parallelize it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace

from . import textnorm
from .corpus import Label, Statement

# Draws per appended statement before the leakage guard gives up and keeps
# the least-overlapping candidate seen.
DEFAULT_MAX_REDRAWS = 10


class AugmentError(ValueError):
    pass


@dataclass(frozen=True)
class AugmentConfig:
    rng_seed: int
    unknown_ratio: float = 0.5
    # Reject donors sharing more than this fraction of their unigrams with
    # the target table; 0 disables the guard entirely.
    guard_threshold: float = 0.5
    max_redraws: int = DEFAULT_MAX_REDRAWS

    def __post_init__(self):
        if not (0 < self.unknown_ratio <= 1):
            raise AugmentError(f"unknown_ratio must be in (0, 1], got {self.unknown_ratio}")


def merge_corpora(base, external, prefix="ext"):
    """Concatenate two corpora; external table ids get a source prefix."""
    merged = list(base)
    for doc in external:
        merged.append(replace(doc, table_id=f"{prefix}:{doc.table_id}",
                              doc_id=f"{prefix}:{doc.doc_id}" if doc.doc_id else doc.doc_id))
    seen = set()
    for doc in merged:
        if doc.table_id in seen:
            raise AugmentError(f"duplicate table_id after merge: {doc.table_id!r}")
        seen.add(doc.table_id)
    return merged


def _table_unigram_bag(doc, abbrevs):
    tokens = []
    for row in doc.grid:
        for cell in row:
            tokens.extend(textnorm.normalize(cell.text, abbrevs))
    tokens.extend(textnorm.normalize(doc.caption, abbrevs))
    return set(tokens)


def _leak_fraction(stmt_unigrams, table_bag):
    if not stmt_unigrams:
        return 0.0
    return len(stmt_unigrams & table_bag) / len(stmt_unigrams)


def generate_unknown(corpus, config, abbrevs=None):
    """Append Unknown-labeled statements drawn from other tables.

    Each table with ``s`` original statements gains
    ``floor(s * unknown_ratio)`` statements sampled uniformly without
    replacement from the pooled statements of every other table.  Candidates
    leaking too many unigrams into the target table are redrawn (bounded),
    keeping the least-leaky fallback.  Returns (augmented corpus, warnings);
    a warning records any table whose quota could not be filled.
    """
    if len(corpus) < 2:
        raise AugmentError("generate_unknown requires at least 2 tables")
    rng = random.Random(config.rng_seed)
    pool = []  # (table position, Statement, statement unigram set)
    for pos, doc in enumerate(corpus):
        for st in doc.statements:
            pool.append((pos, st, set(textnorm.normalize(st.text, abbrevs))))

    out = []
    warnings = []
    for pos, doc in enumerate(corpus):
        s = len(doc.statements)
        quota = math.floor(s * config.unknown_ratio)
        if quota == 0:
            out.append(doc)
            continue
        table_bag = _table_unigram_bag(doc, abbrevs)
        existing_ids = {st.stmt_id for st in doc.statements}
        donor_count = len(pool) - s
        taken = set()  # pool indices already used for this table
        appended = []
        while len(appended) < quota and len(taken) < donor_count:
            best = None  # (leak fraction, pool index)
            chosen = None
            attempts = 0
            tries = 0
            # Same-table or already-used draws do not count toward the
            # redraw budget; the tries cap only bounds pathological streaks.
            while attempts < max(1, config.max_redraws) and tries < 1000:
                tries += 1
                idx = rng.randrange(len(pool))
                if pool[idx][0] == pos or idx in taken:
                    continue
                attempts += 1
                leak = _leak_fraction(pool[idx][2], table_bag)
                if config.guard_threshold <= 0 or leak <= config.guard_threshold:
                    chosen = idx
                    break
                if best is None or leak < best[0]:
                    best = (leak, idx)
            if chosen is None and best is None:
                # RNG never hit an eligible donor; scan deterministically.
                for idx in range(len(pool)):
                    if pool[idx][0] == pos or idx in taken:
                        continue
                    leak = _leak_fraction(pool[idx][2], table_bag)
                    if config.guard_threshold <= 0 or leak <= config.guard_threshold:
                        chosen = idx
                        break
                    if best is None or leak < best[0]:
                        best = (leak, idx)
            if chosen is None:
                chosen = best[1]
            taken.add(chosen)
            donor = pool[chosen][1]
            stmt_id = f"unk-{len(appended) + 1}"
            while stmt_id in existing_ids:
                stmt_id += "x"
            existing_ids.add(stmt_id)
            appended.append(Statement(stmt_id=stmt_id, text=donor.text,
                                      gold_label=Label.UNKNOWN, gold_evidence=None))
        if len(appended) < quota:
            warnings.append({"table_id": doc.table_id, "requested": quota,
                             "appended": len(appended)})
        out.append(replace(doc, statements=doc.statements + tuple(appended)))
    return out, warnings
