"""Hangul syllable decomposition, weighted edit alignment, and the
red-highlight diff between a reference sentence and an STT hypothesis.

Alignment is at syllable granularity; substitution cost is the fraction
of differing jamo components (lead/vowel/tail), so a near-miss vowel is
cheaper than an unrelated syllable. Spaces and ASCII punctuation are
display metadata, never alignment tokens.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum

from .errors import HangulCoachError

HANGUL_BASE = 0xAC00
HANGUL_LAST = 0xD7A3
N_VOWELS = 21
N_TAILS = 28

_DISPLAY_CHARS = set(" " + string.punctuation)


class NotHangulSyllable(HangulCoachError):
    pass


class IndexOutOfRange(HangulCoachError):
    pass


class UnsupportedCharacter(HangulCoachError):
    pass


class ScriptMismatch(HangulCoachError):
    pass


@dataclass(frozen=True)
class Syllable:
    codepoint: int
    lead: int
    vowel: int
    tail: int  # 0 = no tail


def decompose(ch: str) -> Syllable:
    cp = ord(ch)
    if not HANGUL_BASE <= cp <= HANGUL_LAST:
        raise NotHangulSyllable(f"U+{cp:04X} is not a Hangul syllable")
    offset = cp - HANGUL_BASE
    return Syllable(
        codepoint=cp,
        lead=offset // (N_VOWELS * N_TAILS),
        vowel=(offset % (N_VOWELS * N_TAILS)) // N_TAILS,
        tail=offset % N_TAILS,
    )


def compose(lead: int, vowel: int, tail: int) -> str:
    if not (0 <= lead <= 18 and 0 <= vowel <= 20 and 0 <= tail <= 27):
        raise IndexOutOfRange(f"jamo indices ({lead}, {vowel}, {tail})")
    return chr(HANGUL_BASE + (lead * N_VOWELS + vowel) * N_TAILS + tail)


def jamo_distance(a: Syllable, b: Syllable) -> float:
    """Fraction of differing components among lead, vowel, tail."""
    return _jamo_thirds(a, b) / 3.0


def _jamo_thirds(a: Syllable, b: Syllable) -> int:
    return (a.lead != b.lead) + (a.vowel != b.vowel) + (a.tail != b.tail)


@dataclass(frozen=True)
class TokenizedText:
    text: str
    tokens: tuple[str, ...]  # syllable characters, in order
    prefixes: tuple[str, ...]  # display chars before each token
    suffix: str  # display chars after the last token


def tokenize(text: str) -> TokenizedText:
    """Split into syllable tokens plus the spaces/punctuation around them.

    Display characters are recorded with the syllable that follows them
    (trailing ones with the whole text), so concatenating
    prefix[i] + token[i] ... + suffix reproduces the input exactly.
    """
    tokens: list[str] = []
    prefixes: list[str] = []
    pending = ""
    for ch in text:
        if HANGUL_BASE <= ord(ch) <= HANGUL_LAST:
            tokens.append(ch)
            prefixes.append(pending)
            pending = ""
        elif ch in _DISPLAY_CHARS:
            pending += ch
        else:
            raise UnsupportedCharacter(f"{ch!r} is not Hangul, space, or punctuation")
    return TokenizedText(text, tuple(tokens), tuple(prefixes), pending)


class OpKind(Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    DELETE = "delete"
    INSERT = "insert"


@dataclass(frozen=True)
class EditOp:
    kind: OpKind
    ref_idx: int | None
    hyp_idx: int | None
    cost: float


@dataclass(frozen=True)
class AlignmentScript:
    ops: tuple[EditOp, ...]
    total_cost: float


def align(reference: str, hypothesis: str) -> AlignmentScript:
    """Minimum-cost edit script between the syllable token sequences.

    Costs: match 0, insert/delete 1, substitute = jamo_distance. The DP
    runs in integer thirds so costs and tie comparisons are exact.
    Backtrace ties prefer match, then substitute, delete, insert.
    """
    ref = [decompose(t) for t in tokenize(reference).tokens]
    hyp = [decompose(t) for t in tokenize(hypothesis).tokens]
    n, m = len(ref), len(hyp)

    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = 3 * i
    for j in range(1, m + 1):
        dist[0][j] = 3 * j
    for i in range(1, n + 1):
        row, above = dist[i], dist[i - 1]
        a = ref[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                above[j - 1] + _jamo_thirds(a, hyp[j - 1]),
                above[j] + 3,
                row[j - 1] + 3,
            )

    ops: list[EditOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0:
            thirds = _jamo_thirds(ref[i - 1], hyp[j - 1])
            if here == dist[i - 1][j - 1] + thirds:
                kind = OpKind.MATCH if thirds == 0 else OpKind.SUBSTITUTE
                ops.append(EditOp(kind, i - 1, j - 1, thirds / 3.0))
                i, j = i - 1, j - 1
                continue
        if i > 0 and here == dist[i - 1][j] + 3:
            ops.append(EditOp(OpKind.DELETE, i - 1, None, 1.0))
            i -= 1
            continue
        ops.append(EditOp(OpKind.INSERT, None, j - 1, 1.0))
        j -= 1
    ops.reverse()
    return AlignmentScript(tuple(ops), dist[n][m] / 3.0)


class Flag(Enum):
    OK = "ok"
    MISPRONOUNCED = "mispronounced"
    MISSING = "missing"
    EXTRA = "extra"


@dataclass(frozen=True)
class Span:
    text: str
    flag: Flag


@dataclass(frozen=True)
class HighlightedDiff:
    reference_spans: tuple[Span, ...]
    hypothesis_spans: tuple[Span, ...]

    def to_dict(self) -> dict:
        return {
            "reference_spans": [
                {"text": s.text, "flag": s.flag.value} for s in self.reference_spans
            ],
            "hypothesis_spans": [
                {"text": s.text, "flag": s.flag.value} for s in self.hypothesis_spans
            ],
        }


_REF_FLAGS = {
    OpKind.MATCH: Flag.OK,
    OpKind.SUBSTITUTE: Flag.MISPRONOUNCED,
    OpKind.DELETE: Flag.MISSING,
}
_HYP_FLAGS = {
    OpKind.MATCH: Flag.OK,
    OpKind.SUBSTITUTE: Flag.MISPRONOUNCED,
    OpKind.INSERT: Flag.EXTRA,
}


def highlight(
    script: AlignmentScript, reference: str, hypothesis: str
) -> HighlightedDiff:
    """Render an alignment as flagged spans over the original strings.

    Adjacent same-flag syllables merge; each syllable carries the display
    characters in front of it, so span texts concatenate back to the
    originals byte for byte.
    """
    ref_spans = _side_spans(
        tokenize(reference),
        [(op.ref_idx, _REF_FLAGS[op.kind]) for op in script.ops if op.ref_idx is not None],
    )
    hyp_spans = _side_spans(
        tokenize(hypothesis),
        [(op.hyp_idx, _HYP_FLAGS[op.kind]) for op in script.ops if op.hyp_idx is not None],
    )
    return HighlightedDiff(ref_spans, hyp_spans)


def _side_spans(
    toks: TokenizedText, flagged: list[tuple[int, Flag]]
) -> tuple[Span, ...]:
    if [idx for idx, _ in flagged] != list(range(len(toks.tokens))):
        raise ScriptMismatch("script does not cover these tokens")
    spans: list[Span] = []
    for idx, flag in flagged:
        piece = toks.prefixes[idx] + toks.tokens[idx]
        if spans and spans[-1].flag is flag:
            spans[-1] = Span(spans[-1].text + piece, flag)
        else:
            spans.append(Span(piece, flag))
    if toks.suffix:
        if spans:
            spans[-1] = Span(spans[-1].text + toks.suffix, spans[-1].flag)
        else:
            spans.append(Span(toks.suffix, Flag.OK))
    return tuple(spans)
