"""Combinatorics on binary words behind the tower-breaking mechanism.

Robot identifiers are turned into bit words (every bit of the binary
representation duplicated, then ``010`` appended) that are consumed one
bit per call in a 1-based round-robin cycle.  Two co-located robots that
keep drawing bits synchronously must eventually be handed different
global directions; the oracles here certify that quantitatively:

* ``max_common_factor_len`` measures, by brute force over all alignment
  pairs, the longest factor shared by the periodic repetitions of two
  words (finite for distinct transformed identifiers, also against the
  complement of the partner word).
* ``divergence_rounds`` simulates the synchronized draws directly and
  reports the first call on which the two global directions differ.
"""
from __future__ import annotations

from .directions import Chirality, Direction, to_global


def transform_identifier(robot_id: int) -> str:
    """Duplicate every bit of binary(id) and append 010.

    id 0 uses the single-bit representation "0", so its transformed
    identifier is 00010 (length 5).
    """
    if robot_id < 0:
        raise ValueError(f"robot id must be non-negative, got {robot_id}")
    bits = format(robot_id, "b")
    return "".join(b + b for b in bits) + "010"


def transformed_length(robot_id: int) -> int:
    """Length ell of the transformed identifier: 2*|binary(id)| + 3."""
    return 2 * len(format(robot_id, "b")) + 3


def complement(word: str) -> str:
    """Bitwise flip, same length."""
    return "".join("1" if b == "0" else "0" for b in word)


def normalize_index(i: int, ell: int) -> int:
    """Reduce an arbitrary (possibly corrupt) read index into 1..ell."""
    return (i - 1) % ell + 1


def advance_index(i: int, ell: int, literal: bool = False) -> int:
    """One round-robin step of the read index over the 1-based range.

    The default realizes the round-robin intent: normalize, then
    ``i <- (i mod ell) + 1``.  ``literal=True`` applies the formula as
    literally parenthesized in the pseudo-code, ``i <- ((i+1) mod ell) + 1``,
    which skips index 1 on wraparound; it exists only for comparison runs.
    """
    if literal:
        return (i + 1) % ell + 1
    return normalize_index(i, ell) % ell + 1


def bit_at(word: str, i: int) -> str:
    """1-based bit access, matching the paper-style indexing."""
    return word[i - 1]


def max_common_factor_len(u: str, v: str, bound: int) -> int:
    """Longest common factor length of the periodic words u^w and v^w.

    Brute force over the |u| x |v| alignment lattice, each alignment
    scanned until the first mismatch or until ``bound`` characters agree.
    A return value equal to ``bound`` means "at least bound" (the scan is
    truncated there); any smaller value is exact.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if not u or not v:
        raise ValueError("words must be non-empty")
    lu, lv = len(u), len(v)
    best = 0
    for i in range(lu):
        for j in range(lv):
            length = 0
            while length < bound and u[(i + length) % lu] == v[(j + length) % lv]:
                length += 1
            if length > best:
                best = length
                if best >= bound:
                    return bound
    return best


def direction_for_bit(bit: str) -> Direction:
    """Reading 0 sends the robot left, 1 sends it right."""
    return Direction.LEFT if bit == "0" else Direction.RIGHT


def divergence_rounds(
    id_a: int,
    i_a: int,
    chir_a: Chirality,
    id_b: int,
    i_b: int,
    chir_b: Chirality,
    cap: int,
) -> int | None:
    """First synchronized draw on which two robots' global directions differ.

    Simulates both robots advancing their read indices together from the
    given starting indices (arbitrary values are normalized on first use)
    and converts each bit to a global direction through the robot's own
    chirality.  Returns the 1-based call count of the first divergence, or
    None if the two global directions agree for ``cap`` consecutive calls.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    word_a = transform_identifier(id_a)
    word_b = transform_identifier(id_b)
    ell_a, ell_b = len(word_a), len(word_b)
    ia = normalize_index(i_a, ell_a)
    ib = normalize_index(i_b, ell_b)
    for call in range(1, cap + 1):
        ia = ia % ell_a + 1
        ib = ib % ell_b + 1
        ga = to_global(direction_for_bit(bit_at(word_a, ia)), chir_a)
        gb = to_global(direction_for_bit(bit_at(word_b, ib)), chir_b)
        if ga is not gb:
            return call
    return None


def divergence_cap(id_a: int, id_b: int) -> int:
    """Safe call budget 2 * ell_a * ell_b within which divergence must occur.

    The two synchronized bit streams are jointly periodic with period
    lcm(ell_a, ell_b) <= ell_a * ell_b; agreeing (or anti-agreeing, for
    opposite chiralities) through a full joint period would make the
    agreement eternal, contradicting the finite-common-factor property.
    """
    return 2 * transformed_length(id_a) * transformed_length(id_b)
