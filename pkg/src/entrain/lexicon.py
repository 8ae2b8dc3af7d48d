"""Category dictionaries and token scoring.

A dictionary file (LIWC-compatible ``.dic`` layout) declares numbered
categories in a header block delimited by ``%`` lines, then maps words to
one or more category ids. An entry written with a trailing ``*`` matches
every token it prefixes. Scoring a token sequence yields, per category,
the percentage of tokens that carry that category; because a word may
belong to several categories, the percentages can sum past 100.

The package ships a small open-license function-word dictionary covering
the nine tags ppron, ipron, article, auxverb, adverb, preps, conj,
negate, quant. It stands in for proprietary dictionaries and can be
replaced by any file in the same format.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ParseError

WILDCARD = "*"
COMMENT = "#"
HEADER_DELIM = "%"

DEFAULT_DIC_RESOURCE = "function_words.dic"
DEFAULT_CATEGORY_TAGS = frozenset(
    {"ppron", "ipron", "article", "auxverb", "adverb", "preps", "conj", "negate", "quant"}
)


@dataclass(frozen=True)
class CategoryProfile:
    """Per-category percentages (0-100) for one token sequence.

    ``percentages`` follows the lexicon's category order. An empty token
    sequence scores as all zeros with ``token_count`` 0.
    """

    percentages: tuple[float, ...]
    token_count: int


@dataclass(frozen=True)
class Lexicon:
    """Immutable word -> category dictionary.

    ``exact_entries`` maps whole words; ``stem_entries`` maps prefixes
    (stored without the ``*`` marker). Safe to share across workers.
    """

    categories: tuple[tuple[int, str], ...]
    exact_entries: Mapping[str, frozenset[int]]
    stem_entries: Mapping[str, frozenset[int]]

    @property
    def category_ids(self) -> tuple[int, ...]:
        return tuple(cid for cid, _ in self.categories)

    @property
    def category_tags(self) -> tuple[str, ...]:
        return tuple(tag for _, tag in self.categories)


def parse_lexicon(source: Iterable[str] | str, name: str | None = None) -> Lexicon:
    """Parse a dictionary file into a Lexicon.

    ``source`` is a string or an iterable of lines. Raises ParseError
    (naming the line) on a malformed header, duplicate category id or
    tag, an entry citing an undeclared category, or an empty entry.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = [line.rstrip("\n") for line in source]

    categories: list[tuple[int, str]] = []
    seen_ids: set[int] = set()
    seen_tags: set[str] = set()
    exact: dict[str, set[int]] = {}
    stems: dict[str, set[int]] = {}

    # section: 0 = before header, 1 = in header, 2 = body
    section = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT):
            continue
        if line == HEADER_DELIM:
            if section == 0:
                section = 1
            elif section == 1:
                section = 2
            else:
                raise ParseError("unexpected '%' delimiter in entry section", name, lineno)
            continue
        if section == 0:
            raise ParseError("expected '%' header delimiter before content", name, lineno)
        fields = line.split("\t")
        if section == 1:
            if len(fields) != 2:
                raise ParseError("header line must be '<id><TAB><tag>'", name, lineno)
            id_text, tag = fields[0].strip(), fields[1].strip()
            try:
                cid = int(id_text)
            except ValueError:
                raise ParseError(f"category id {id_text!r} is not an integer", name, lineno) from None
            if not tag:
                raise ParseError("empty category tag", name, lineno)
            if cid in seen_ids:
                raise ParseError(f"duplicate category id {cid}", name, lineno)
            if tag in seen_tags:
                raise ParseError(f"duplicate category tag {tag!r}", name, lineno)
            seen_ids.add(cid)
            seen_tags.add(tag)
            categories.append((cid, tag))
            continue
        # body entry
        if len(fields) < 2:
            raise ParseError("entry line must be '<word><TAB><id>[<TAB><id>...]'", name, lineno)
        entry = fields[0].strip()
        if not entry or entry == WILDCARD:
            raise ParseError("empty entry", name, lineno)
        cids: set[int] = set()
        for field in fields[1:]:
            field = field.strip()
            try:
                cid = int(field)
            except ValueError:
                raise ParseError(f"category id {field!r} is not an integer", name, lineno) from None
            if cid not in seen_ids:
                raise ParseError(f"entry references unknown category id {cid}", name, lineno)
            cids.add(cid)
        if entry.endswith(WILDCARD):
            stem = entry[:-1]
            if WILDCARD in stem:
                raise ParseError("'*' is only allowed at the end of an entry", name, lineno)
            stems.setdefault(stem, set()).update(cids)
        else:
            if WILDCARD in entry:
                raise ParseError("'*' is only allowed at the end of an entry", name, lineno)
            exact.setdefault(entry, set()).update(cids)

    if section < 2:
        raise ParseError("missing '%' header delimiters", name, len(lines))

    return Lexicon(
        categories=tuple(categories),
        exact_entries={w: frozenset(c) for w, c in exact.items()},
        stem_entries={w: frozenset(c) for w, c in stems.items()},
    )


def load_lexicon(path: str | Path) -> Lexicon:
    """Read and parse a dictionary file from disk."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        return parse_lexicon(handle, name=str(path))


def load_default_lexicon() -> Lexicon:
    """Parse the bundled open function-word dictionary."""
    text = resources.files("entrain.data").joinpath(DEFAULT_DIC_RESOURCE).read_text("utf-8")
    return parse_lexicon(text, name=DEFAULT_DIC_RESOURCE)


def categories_of(lex: Lexicon, token: str) -> frozenset[int]:
    """Category ids for one token.

    An exact entry wins outright; otherwise the longest stem entry that
    prefixes the token applies; otherwise the empty set.
    """
    hit = lex.exact_entries.get(token)
    if hit is not None:
        return hit
    for size in range(len(token), 0, -1):
        hit = lex.stem_entries.get(token[:size])
        if hit is not None:
            return hit
    return frozenset()


def score_categories(lex: Lexicon, tokens: Sequence[str]) -> CategoryProfile:
    """Score a preprocessed token sequence into a CategoryProfile.

    percentages[k] = 100 * (tokens carrying category k) / len(tokens).
    """
    total = len(tokens)
    if total == 0:
        return CategoryProfile(percentages=(0.0,) * len(lex.categories), token_count=0)
    counts = dict.fromkeys(lex.category_ids, 0)
    for token in tokens:
        for cid in categories_of(lex, token):
            counts[cid] += 1
    percentages = tuple(100.0 * counts[cid] / total for cid in lex.category_ids)
    return CategoryProfile(percentages=percentages, token_count=total)
