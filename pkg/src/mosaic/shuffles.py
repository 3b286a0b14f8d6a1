"""(n, α)-shuffle permutations and their raise/lower/remainder algebra.

A shuffle σ ∈ Sh(n, α) is a permutation of 1..n that increases on its first α
entries and on its last n−α entries.  It is fully determined by the set of
transversal positions T(σ) = {σ(1), …, σ(α)}.  Positions are 1-based
throughout, matching the usual notation "(3 5|1 2 4)".

The same type doubles as a flat word ♭^σ̃: slots in T(σ̃) carry ♯ (kept
contravariant), all others ♭ (lowered).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .errors import IndexOutOfRange, RankCap, RankMismatch

MAX_RANK = 8

SHARP = "♯"
FLAT = "♭"
_SHARP_ALIASES = {"♯", "#", "u"}
_FLAT_ALIASES = {"♭", "b", "l"}


@dataclass(frozen=True)
class Shuffle:
    n: int
    transversal: tuple[int, ...]

    def __post_init__(self):
        t = tuple(self.transversal)
        if list(t) != sorted(set(t)) or any(p < 1 or p > self.n for p in t):
            raise ValueError(f"invalid transversal set {t} for n={self.n}")
        object.__setattr__(self, "transversal", t)

    @property
    def alpha(self) -> int:
        return len(self.transversal)

    @property
    def instantaneous(self) -> tuple[int, ...]:
        ts = set(self.transversal)
        return tuple(p for p in range(1, self.n + 1) if p not in ts)

    @property
    def image(self) -> tuple[int, ...]:
        """(σ(1), …, σ(n))."""
        return self.transversal + self.instantaneous

    def __call__(self, k: int) -> int:
        return self.image[k - 1]

    def inverse(self, p: int) -> int:
        """σ⁻¹(p)."""
        return self.image.index(p) + 1

    def is_transversal(self, p: int) -> bool:
        return p in self.transversal

    # notation
    def __str__(self) -> str:
        left = " ".join(map(str, self.transversal))
        right = " ".join(map(str, self.instantaneous))
        return f"({left}|{right})"

    def __repr__(self) -> str:
        return f"Shuffle{self}"

    def word(self) -> str:
        """Slot word such as 'SSτSτ'."""
        return "".join("τ" if p in self.transversal else "S" for p in range(1, self.n + 1))

    def flat_word(self) -> str:
        """Read as a flat word: ♯ on T(σ), ♭ elsewhere."""
        return "".join(SHARP if p in self.transversal else FLAT for p in range(1, self.n + 1))

    def sort_key(self) -> tuple:
        return (self.alpha, self.transversal)

    @classmethod
    def parse(cls, text: str) -> "Shuffle":
        """Parse "(3 5|1 2 4)"."""
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")) or body.count("|") != 1:
            raise ValueError(f"cannot parse shuffle {text!r}")
        left, right = body[1:-1].split("|")
        t = tuple(int(x) for x in left.split())
        s = tuple(int(x) for x in right.split())
        n = len(t) + len(s)
        if sorted(t + s) != list(range(1, n + 1)) or list(s) != sorted(s):
            raise ValueError(f"not a shuffle: {text!r}")
        return cls(n, t)

    @classmethod
    def from_word(cls, word: str) -> "Shuffle":
        """Build from an 'SτS' slot word or from a ♯/♭ flat word."""
        t = []
        for p, ch in enumerate(word, start=1):
            if ch in ("τ", "t") or ch in _SHARP_ALIASES:
                t.append(p)
            elif ch == "S" or ch in _FLAT_ALIASES:
                continue
            else:
                raise ValueError(f"unknown letter {ch!r} in word {word!r}")
        return cls(len(word), tuple(t))


def _check_rank(n: int) -> None:
    if n < 0:
        raise ValueError("rank must be nonnegative")
    if n > MAX_RANK:
        raise RankCap(f"rank {n} exceeds the cap {MAX_RANK}")


@lru_cache(maxsize=None)
def enumerate_shuffles(n: int, alpha: int) -> tuple[Shuffle, ...]:
    """Sh(n, α), lexicographically ordered by transversal-position set."""
    _check_rank(n)
    if not 0 <= alpha <= n:
        raise ValueError(f"need 0 <= alpha <= n, got alpha={alpha}, n={n}")
    return tuple(Shuffle(n, c) for c in combinations(range(1, n + 1), alpha))


@lru_cache(maxsize=None)
def all_shuffles(n: int) -> tuple[Shuffle, ...]:
    """All 2ⁿ shuffles in canonical order: by α, then lexicographic in T(σ)."""
    _check_rank(n)
    return tuple(s for a in range(n + 1) for s in enumerate_shuffles(n, a))


def identity_shuffle(n: int, alpha: int) -> Shuffle:
    """The shuffle with T = {1..α}."""
    return Shuffle(n, tuple(range(1, alpha + 1)))


def sharp_word(n: int) -> Shuffle:
    """♯ⁿ."""
    return identity_shuffle(n, n)


def flat_word(n: int) -> Shuffle:
    """♭ⁿ."""
    return identity_shuffle(n, 0)


def raise_shuffle(sigma: Shuffle, beta: int) -> tuple[Shuffle, int]:
    """σ^β: move σ(β) to the instantaneous side.

    Returns (σ^β, p̆) with (σ^β)_p̆ = σ; p̆ is the position of σ(β) among the
    instantaneous slots of σ^β.
    """
    if not 1 <= beta <= sigma.alpha:
        raise IndexOutOfRange(f"raise index {beta} not in 1..{sigma.alpha}")
    moved = sigma.transversal[beta - 1]
    out = Shuffle(sigma.n, tuple(p for p in sigma.transversal if p != moved))
    return out, out.instantaneous.index(moved) + 1


def lower_shuffle(sigma: Shuffle, beta: int) -> tuple[Shuffle, int]:
    """σ_β: move σ(α+β) to the transversal side.

    Returns (σ_β, p̆) with (σ_β)^p̆ = σ; p̆ is the position of σ(α+β) among the
    transversal slots of σ_β.
    """
    if not 1 <= beta <= sigma.n - sigma.alpha:
        raise IndexOutOfRange(f"lower index {beta} not in 1..{sigma.n - sigma.alpha}")
    moved = sigma.instantaneous[beta - 1]
    out = Shuffle(sigma.n, tuple(sorted(sigma.transversal + (moved,))))
    return out, out.transversal.index(moved) + 1


def convert_shuffle(sigma: Shuffle, beta: int, direction: str) -> tuple[Shuffle, int]:
    if direction == "raise":
        return raise_shuffle(sigma, beta)
    if direction == "lower":
        return lower_shuffle(sigma, beta)
    raise ValueError(f"direction must be 'raise' or 'lower', got {direction!r}")


def remainder_shuffle(sigma_t: Shuffle, sigma: Shuffle) -> Shuffle:
    """σ̌ = σ̃ \\ σ|_{1..α}.

    Drops the transversal positions of σ from σ̃ and renumbers the remaining
    n−α positions in order.  Slot β of σ̌ is ♯ exactly when the β-th
    instantaneous slot of σ is ♯ in σ̃.
    """
    if sigma_t.n != sigma.n:
        raise RankMismatch(f"ranks differ: {sigma_t.n} vs {sigma.n}")
    inst = sigma.instantaneous
    return Shuffle(len(inst), tuple(k for k, p in enumerate(inst, start=1) if p in sigma_t.transversal))


def sharp_instantaneous_slots(sigma_t: Shuffle, sigma: Shuffle) -> set[int]:
    """{β ≤ n−α : (σ̃⁻¹∘σ)(α+β) ≤ α̃}."""
    if sigma_t.n != sigma.n:
        raise RankMismatch(f"ranks differ: {sigma_t.n} vs {sigma.n}")
    a, at = sigma.alpha, sigma_t.alpha
    return {b for b in range(1, sigma.n - a + 1) if sigma_t.inverse(sigma(a + b)) <= at}
