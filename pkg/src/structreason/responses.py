"""Parsers that turn free-text model output into structured decisions.

Models answer in prose; these parsers are total (they never raise on
arbitrary text, except the declared SQL-extraction error) and deterministic,
so a replayed response always parses to the same decision.
"""

from __future__ import annotations

import enum
import re

from .errors import SqlExtractionError

_TOKEN_SPLIT_RE = re.compile(r"[\n,]")
_ANSWER_SPLIT_RE = re.compile(r"[\n,;]")
_ENUM_PREFIX_RE = re.compile(r"^\s*(?:\d+\s*[.)]\s*|[-*•]\s*)")
_QUOTES = "\"'“”‘’"
_INDEX_LABEL_RE = re.compile(r"^(?:item|row)\s*\d+$", re.IGNORECASE)
_INDEX_KEYWORD_RE = re.compile(r"\b(?:item|row)s?\b", re.IGNORECASE)
_FENCE_RE = re.compile(r"```[a-zA-Z0-9_+-]*\s*\n?(.*?)```", re.DOTALL)
_SELECT_RE = re.compile(r"\bselect\b", re.IGNORECASE)


def parse_selection(response: str, candidates: list[str]) -> list[str]:
    """Match a selection response against a candidate list.

    Three stages, first non-empty result wins: exact token match (response
    split on newlines/commas, trimmed and case-folded), boundary-aware
    substring containment, then numeral extraction when the candidates are
    "item N"/"row N" index labels and the response mentions items or rows.
    The result preserves candidate order and contains no duplicates; an
    empty result is a valid outcome.
    """
    if not candidates:
        return []
    folded_candidates = [c.strip().casefold() for c in candidates]

    tokens = {
        t.strip().casefold() for t in _TOKEN_SPLIT_RE.split(response) if t.strip()
    }
    selected = {i for i, fc in enumerate(folded_candidates) if fc in tokens}

    if not selected:
        folded_response = response.casefold()
        for i, fc in enumerate(folded_candidates):
            if not fc:
                continue
            pattern = r"(?<![0-9A-Za-z])" + re.escape(fc) + r"(?![0-9A-Za-z])"
            if re.search(pattern, folded_response):
                selected.add(i)

    if not selected and all(_INDEX_LABEL_RE.match(c.strip()) for c in candidates):
        if _INDEX_KEYWORD_RE.search(response):
            by_number = {}
            for i, c in enumerate(candidates):
                number = int(re.search(r"\d+", c).group())
                by_number.setdefault(number, i)
            for m in re.finditer(r"\d+", response):
                number = int(m.group())
                if number in by_number:
                    selected.add(by_number[number])

    out: list[str] = []
    for i in sorted(selected):
        if candidates[i] not in out:
            out.append(candidates[i])
    return out


def parse_answer(response: str) -> list[str]:
    """Split a free-text answer into individual answer strings.

    Splits on newlines, commas, and semicolons; strips enumeration prefixes
    ("1.", "-"), surrounding quotes, and trailing periods; drops empties.
    """
    answers = []
    for part in _ANSWER_SPLIT_RE.split(response):
        part = _ENUM_PREFIX_RE.sub("", part.strip())
        part = part.strip(_QUOTES).rstrip(".").strip()
        if part:
            answers.append(part)
    return answers


def parse_sql(response: str) -> str:
    """Extract the SQL statement from a model response.

    Prefers the first code-fenced block containing a SELECT; otherwise takes
    the text from the first SELECT to the end (or to a closing fence).
    Raises SqlExtractionError when no SELECT is found anywhere.
    """
    for m in _FENCE_RE.finditer(response):
        block = m.group(1).strip()
        if _SELECT_RE.search(block):
            return block
    m = _SELECT_RE.search(response)
    if not m:
        raise SqlExtractionError("response contains no SELECT statement")
    segment = response[m.start():]
    fence = segment.find("```")
    if fence != -1:
        segment = segment[:fence]
    return segment.strip()


class Sufficiency(enum.Enum):
    SUFFICIENT = "sufficient"
    INSUFFICIENT = "insufficient"


def parse_sufficiency(response: str) -> Sufficiency:
    """Read a yes/no sufficiency verdict out of a response.

    Anything ambiguous counts as insufficient: continuing to the next hop is
    bounded by the hop limit, while stopping early is not recoverable.
    """
    folded = response.casefold()
    negative = (
        re.search(r"\bno\b", folded) is not None
        or "not sufficient" in folded
        or "insufficient" in folded
        or "need more" in folded
    )
    affirmative = re.search(r"\byes\b", folded) is not None or (
        re.search(r"\bsufficient\b", folded) is not None
        and "not sufficient" not in folded
        and "insufficient" not in folded
    )
    if affirmative and not negative:
        return Sufficiency.SUFFICIENT
    return Sufficiency.INSUFFICIENT
