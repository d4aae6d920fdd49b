"""Words over the alphabet ``{1, ..., d}`` and their indexing.

A word is a tuple of letters stored in *time order*: position 0 is the letter
applied first. The usual operator-theoretic notation writes words right to
left, so the stored word ``(a1, ..., an)`` corresponds to ``an ... a1`` there,
and the reversed word of that notation is simply the stored tuple read
backwards. Appending a letter at the end of the tuple (``w + (j,)``) is the
``j alpha`` extension of the state recursion.

Words of length at most ``max_len`` are ordered by length and then
lexicographically; this order is prefix closed (every proper prefix precedes
the word), which lets the transfer engine fill its tables level by level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .errors import GuardError

Word = tuple[int, ...]

EMPTY: Word = ()
MAX_WORDS = 10**8


def word_count(d: int, max_len: int) -> int:
    """Number of words of length at most ``max_len`` over ``d`` letters."""
    if d == 1:
        return max_len + 1
    return (d ** (max_len + 1) - 1) // (d - 1)


def check_word(w: Word, d: int) -> Word:
    w = tuple(int(a) for a in w)
    for a in w:
        if not 1 <= a <= d:
            raise ValueError(f"letter {a} out of range 1..{d}")
    return w


def concat(a: Word, b: Word) -> Word:
    return tuple(a) + tuple(b)


def reverse(w: Word) -> Word:
    return tuple(reversed(w))


def word_text(w: Word) -> str:
    """``"1.2.2"`` for ``(1, 2, 2)``; ``"-"`` for the empty word."""
    return ".".join(str(a) for a in w) if w else "-"


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in ("-", ""):
        return EMPTY
    return tuple(int(a) for a in text.split("."))


def _guard(d: int, max_len: int) -> int:
    if d < 1 or max_len < 0:
        raise ValueError(f"need d >= 1 and max_len >= 0, got d={d}, max_len={max_len}")
    total = word_count(d, max_len)
    if total > MAX_WORDS:
        raise GuardError(f"{total} words of length <= {max_len} over {d} letters exceed {MAX_WORDS}")
    return total


def enumerate_words(d: int, max_len: int) -> list[Word]:
    """All words of length ``<= max_len`` in index order."""
    _guard(d, max_len)
    letters = range(1, d + 1)
    out: list[Word] = []
    for n in range(max_len + 1):
        out.extend(product(letters, repeat=n))
    return out


@dataclass(frozen=True)
class WordIndex:
    """Bijection between words of length ``<= max_len`` and ``range(total)``."""

    d: int
    max_len: int
    total: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", _guard(self.d, self.max_len))

    def offset(self, n: int) -> int:
        """Index of the first word of length ``n``."""
        return word_count(self.d, n - 1) if n > 0 else 0

    def level(self, n: int) -> range:
        return range(self.offset(n), self.offset(n) + self.d**n)

    def word_to_index(self, w: Word) -> int:
        if len(w) > self.max_len:
            raise ValueError(f"word of length {len(w)} exceeds max_len {self.max_len}")
        k = 0
        for a in w:
            if not 1 <= a <= self.d:
                raise ValueError(f"letter {a} out of range 1..{self.d}")
            k = k * self.d + (a - 1)
        return self.offset(len(w)) + k

    def index_to_word(self, i: int) -> Word:
        if not 0 <= i < self.total:
            raise IndexError(i)
        n = 0
        while i >= self.offset(n + 1):
            n += 1
        k = i - self.offset(n)
        letters = []
        for _ in range(n):
            k, r = divmod(k, self.d)
            letters.append(r + 1)
        return tuple(reversed(letters))

    def words(self) -> list[Word]:
        return enumerate_words(self.d, self.max_len)
