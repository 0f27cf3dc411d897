"""Deterministic text normalization: lowercasing, abbreviation expansion,
suffix stemming, tokenization and n-gram extraction.

The pipeline order is fixed: lowercase -> tokenize -> expand abbreviations
-> stem.  All functions are pure and safe for parallel use.
"""

from __future__ import annotations

import re
from importlib import resources

_TOKEN_RE = re.compile(r"[a-z0-9]+")

_VOWELS = frozenset("aeiou")

# Negation cues checked by the lexical baseline; kept here so they pass
# through the same normalization as everything else.
NEGATION_TOKENS = frozenset({"no", "not", "never", "fewer", "less"})


class AbbrevError(ValueError):
    """Raised for malformed or cyclic abbreviation tables."""


def _load_lines(name):
    text = resources.files("tabverify.data").joinpath(name).read_text("utf-8")
    for raw in text.splitlines():
        line = raw.rstrip("\n")
        if not line or line.lstrip().startswith("#"):
            continue
        yield line


def _load_stem_rules():
    rules = []
    for line in _load_lines("stem_rules.tsv"):
        suffix, repl, min_stem, flag = line.split("\t")
        rules.append((suffix, repl, int(min_stem), flag == "fixup"))
    return tuple(rules)


_STEM_RULES = _load_stem_rules()


def make_abbrev_table(pairs):
    """Build an abbreviation table from (key, full form) pairs.

    Keys must be lowercase single tokens; values are token sequences.
    A key whose expansion contains the key itself is rejected.
    """
    table = {}
    for key, full in pairs:
        if key != key.lower():
            raise AbbrevError(f"abbreviation key must be lowercase: {key!r}")
        tokens = tuple(_TOKEN_RE.findall(full.lower()))
        if not tokens:
            raise AbbrevError(f"empty expansion for {key!r}")
        if key in tokens:
            raise AbbrevError(f"abbreviation {key!r} expands to itself")
        table[key] = tokens
    return table


def load_abbrev_file(path):
    """Read an abbreviation table: one ``abbrev<TAB>full form`` per line,
    ``#`` comments and blank lines ignored."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, full = line.partition("\t")
            if not full:
                raise AbbrevError(f"expected 'abbrev<TAB>full form', got {line!r}")
            pairs.append((key.strip(), full.strip()))
    return make_abbrev_table(pairs)


def default_abbrevs():
    """The abbreviation table shipped with the package."""
    pairs = []
    for line in _load_lines("abbreviations.tsv"):
        key, _, full = line.partition("\t")
        pairs.append((key, full))
    return make_abbrev_table(pairs)


def _ends_cvc(word):
    if len(word) < 3:
        return False
    a, b, c = word[-3], word[-2], word[-1]
    return a not in _VOWELS and b in _VOWELS and c not in _VOWELS and c not in "wxy"


def _stem_once(word):
    for suffix, repl, min_stem, fixup in _STEM_RULES:
        if not word.endswith(suffix):
            continue
        stem_len = len(word) - len(suffix)
        if stem_len < min_stem:
            continue
        out = word[:stem_len] + repl
        if fixup:
            if len(out) >= 2 and out[-1] == out[-2] and out[-1] not in _VOWELS and out[-1] not in "lsz":
                out = out[:-1]
            elif _ends_cvc(out):
                out += "e"
        return out
    return word


def stem(word):
    """Suffix-strip one lowercase token using the shipped rule list.

    The rule pass repeats until the token is a fixpoint, so stemming is
    idempotent by construction (every productive rule strictly shortens).
    """
    while True:
        out = _stem_once(word)
        if out == word:
            return out
        word = out


def normalize(text, abbrevs=None, stemming=True):
    """Normalize text to a token sequence.

    Stages, in order: lowercase, tokenize on non-alphanumeric boundaries,
    expand abbreviations (single pass), stem.  ``stemming=False`` yields
    surface tokens, used for model-input linearization.
    """
    tokens = _TOKEN_RE.findall(text.lower())
    if abbrevs:
        expanded = []
        for tok in tokens:
            expanded.extend(abbrevs.get(tok, (tok,)))
        tokens = expanded
    if stemming:
        tokens = [stem(tok) for tok in tokens]
    return tokens


def ngram_set(tokens, n_values=(1, 2)):
    """All contiguous n-token windows for each n, as a set of tuples."""
    grams = set()
    for n in n_values:
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        for i in range(len(tokens) - n + 1):
            grams.add(tuple(tokens[i:i + n]))
    return grams


def overlap_rate(statement_grams, row_grams):
    """|intersection| / |statement grams|; 0 when the statement has none."""
    if not statement_grams:
        return 0.0
    return len(statement_grams & row_grams) / len(statement_grams)
