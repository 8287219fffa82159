"""Free words and block groups ``F_k x Z``.

A free word is a tuple of nonzero ints: ``+i`` is generator ``i`` and ``-i``
its inverse.  Words handed around the package are always freely reduced.
Generator pairs ``(index, sign)`` are accepted on input.

A block group is the fundamental group of ``S^1 x B`` for a compact surface
``B`` with boundary.  Its elements are pairs (base word, fiber exponent); the
fiber class is central, so multiplication is free multiplication on the base
and addition on the fiber.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

from .errors import DomainError, MalformedWordError

Word = tuple  # tuple[int, ...], reduced


def _letter(item) -> int:
    if isinstance(item, int):
        return item
    index, sign = item
    if sign not in (1, -1):
        raise MalformedWordError(f"exponent sign must be +1 or -1, got {sign!r}")
    return index * sign


def free_reduce(letters: Iterable, rank: Optional[int] = None) -> Word:
    """Freely reduce a raw letter sequence.

    ``letters`` may hold signed ints or ``(index, sign)`` pairs.  When
    ``rank`` is given, indices outside ``1..rank`` are rejected.
    """
    out = []
    for item in letters:
        x = _letter(item)
        if x == 0 or (rank is not None and abs(x) > rank):
            raise MalformedWordError(f"generator index {abs(x)} outside 1..{rank}")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def word_mul(u: Word, v: Word) -> Word:
    """Product of two reduced words."""
    if not u:
        return v
    if not v:
        return u
    i = 0
    n = min(len(u), len(v))
    while i < n and u[-1 - i] == -v[i]:
        i += 1
    if i == 0:
        return u + v
    return u[: len(u) - i] + v[i:]


def word_inv(u: Word) -> Word:
    return tuple(-x for x in reversed(u))


def word_pow(u: Word, k: int) -> Word:
    if k < 0:
        u, k = word_inv(u), -k
    out: Word = ()
    for _ in range(k):
        out = word_mul(out, u)
    return out


def letter_power(letter: int, k: int) -> Word:
    if k >= 0:
        return (letter,) * k
    return (-letter,) * (-k)


def power_of_letter(w: Word, letter: int) -> Optional[int]:
    """Return ``k`` if ``w == letter^k``, else None."""
    if not w:
        return 0
    first = w[0]
    if abs(first) != letter:
        return None
    for x in w:
        if x != first:
            return None
    return len(w) if first > 0 else -len(w)


def strip_trailing(w: Word, letter: int) -> tuple[Word, int]:
    """Split ``w = r * letter^k`` with ``r`` not ending in ``letter^{+-1}``."""
    n = len(w)
    if not n or abs(w[-1]) != letter:
        return w, 0
    last = w[-1]
    j = n - 1
    while j > 0 and w[j - 1] == last:
        j -= 1
    k = n - j
    return w[:j], (k if last > 0 else -k)


def cyclic_reduce(w: Word) -> Word:
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[i : j + 1]


def iter_reduced_words(rank: int, max_len: int) -> Iterator[Word]:
    """All reduced words of length ``<= max_len``, shortest first."""
    layer = [()]
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    yield ()
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nw = w + (x,)
                nxt.append(nw)
                yield nw
        layer = nxt


def count_reduced_words(rank: int, length: int) -> int:
    if length == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (length - 1)


@dataclass(frozen=True)
class SurfaceData:
    """Orientable surface of genus ``genus`` with ``boundary_count`` boundary circles.

    The free group ``pi_1`` has rank ``2*genus + boundary_count - 1``.  Indices
    ``1..2g`` are handle generators ``a1..a2g``; the remaining ones are the
    boundary generators ``c1..c(b-1)``.  The last boundary circle is the
    relation word and is not a generator.
    """

    genus: int
    boundary_count: int

    def __post_init__(self):
        if self.genus < 0 or self.boundary_count < 1:
            raise ValueError("genus must be >= 0 and boundary_count >= 1")

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - self.boundary_count

    @property
    def rank(self) -> int:
        return 2 * self.genus + self.boundary_count - 1

    def boundary_letter(self, i: int) -> int:
        """Generator index of the designated boundary generator ``c_i`` (``i < b``)."""
        if not 1 <= i < self.boundary_count:
            raise IndexError(f"boundary {i} has no designated generator")
        return 2 * self.genus + i

    def letter_name(self, x: int) -> str:
        i = abs(x)
        if not 1 <= i <= self.rank:
            raise MalformedWordError(f"generator index {i} outside 1..{self.rank}")
        if i <= 2 * self.genus:
            return f"a{i}"
        return f"c{i - 2 * self.genus}"

    @cached_property
    def _names(self) -> dict:
        return {self.letter_name(i): i for i in range(1, self.rank + 1)}

    def letter_index(self, name: str) -> int:
        try:
            return self._names[name]
        except KeyError:
            raise MalformedWordError(f"unknown generator {name!r} for {self}") from None


def boundary_word(s: SurfaceData, i: int) -> Word:
    """Word representing the ``i``-th boundary circle of ``s``.

    For ``i < b`` this is the generator ``c_i``.  The last circle is
    ``([a1,a2]...[a(2g-1),a2g] c1...c(b-1))^-1`` so that the product of the
    commutators with all boundary words is trivial.
    """
    if not 1 <= i <= s.boundary_count:
        raise IndexError(f"boundary index {i} outside 1..{s.boundary_count}")
    if i < s.boundary_count:
        return (s.boundary_letter(i),)
    rel = []
    for h in range(s.genus):
        x, y = 2 * h + 1, 2 * h + 2
        rel += [x, y, -x, -y]
    rel += [s.boundary_letter(j) for j in range(1, s.boundary_count)]
    return word_inv(free_reduce(rel))


def surface_relation(s: SurfaceData) -> Word:
    """The product of commutators and boundary words; reduces to the empty word."""
    rel = []
    for h in range(s.genus):
        x, y = 2 * h + 1, 2 * h + 2
        rel += [x, y, -x, -y]
    for i in range(1, s.boundary_count + 1):
        rel += boundary_word(s, i)
    return free_reduce(rel)


def is_conjugate_to_power(w: Word, p: Word) -> bool:
    """True iff ``w`` is conjugate to ``p^k`` for some ``k != 0`` (``w`` nontrivial)."""
    cw = cyclic_reduce(w)
    cp = cyclic_reduce(p)
    if not cw or not cp:
        return False
    for base in (cp, word_inv(cp)):
        if len(cw) % len(base):
            continue
        target = base * (len(cw) // len(base))
        doubled = cw + cw
        n = len(cw)
        if any(doubled[i : i + n] == target for i in range(n)):
            return True
    return False


def is_peripheral(s: SurfaceData, w: Word, slots: Optional[Sequence[int]] = None) -> bool:
    """Whether ``w`` is conjugate into a boundary subgroup.

    ``slots`` restricts the boundary circles considered (default: all of
    them).  The identity counts as peripheral.
    """
    if not w:
        return True
    if slots is None:
        slots = range(1, s.boundary_count + 1)
    return any(is_conjugate_to_power(w, boundary_word(s, i)) for i in slots)


class BlockElement(NamedTuple):
    """Element ``(base, fiber)`` of ``F_rank x Z``."""

    base: Word
    fiber: int
    rank: int

    def __mul__(self, other):
        return block_mul(self, other)

    def __invert__(self):
        return block_inv(self)

    @property
    def is_identity(self) -> bool:
        return not self.base and not self.fiber

    @property
    def norm(self) -> int:
        return len(self.base) + abs(self.fiber)


def block_identity(rank: int) -> BlockElement:
    return BlockElement((), 0, rank)


def block_element(s: SurfaceData, letters: Iterable = (), fiber: int = 0) -> BlockElement:
    return BlockElement(free_reduce(letters, s.rank), fiber, s.rank)


def block_mul(x: BlockElement, y: BlockElement) -> BlockElement:
    if x[2] != y[2]:
        raise DomainError(f"rank mismatch: {x[2]} vs {y[2]}")
    return tuple.__new__(BlockElement, (word_mul(x[0], y[0]), x[1] + y[1], x[2]))


def block_inv(x: BlockElement) -> BlockElement:
    return tuple.__new__(BlockElement, (word_inv(x[0]), -x[1], x[2]))


def format_block(s: SurfaceData, x: BlockElement) -> str:
    """Token form, e.g. ``c1^2 c2^-1 z^3``; the identity prints as ``1``."""
    parts = []
    w = x.base
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        k = (j - i) * (1 if w[i] > 0 else -1)
        name = s.letter_name(w[i])
        parts.append(name if k == 1 else f"{name}^{k}")
        i = j
    if x.fiber:
        parts.append("z" if x.fiber == 1 else f"z^{x.fiber}")
    return " ".join(parts) if parts else "1"


def parse_block(s: SurfaceData, text: str) -> BlockElement:
    letters = []
    fiber = 0
    for tok in text.split():
        if tok == "1":
            continue
        name, _, exp = tok.partition("^")
        try:
            k = int(exp) if exp else 1
        except ValueError:
            raise MalformedWordError(f"bad exponent in {tok!r}") from None
        if name == "z":
            fiber += k
        else:
            letters += letter_power(s.letter_index(name), k)
    return BlockElement(free_reduce(letters, s.rank), fiber, s.rank)
