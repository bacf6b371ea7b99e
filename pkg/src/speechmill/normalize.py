"""Text cleanup turning raw cue text into the canonical transcript alphabet.

The target alphabet is lowercase English letters, apostrophe and single
spaces. Cleanup never deletes a whole cue by itself: material the rules
cannot account for (out-of-range numbers, foreign scripts) is passed
through so the downstream character-set filter can reject the cue.
"""
from __future__ import annotations

import re

# Leading speaker label, e.g. "Speaker 1:" or "MR. SMITH:". Bounded so a
# clause that merely contains a colon is not swallowed.
_SPEAKER_LABEL = re.compile(r"^[A-Za-z][A-Za-z0-9 .']{0,30}:\s*")

# Innermost annotation pairs: content may not contain further brackets, so
# nested forms resolve innermost-first over repeated passes.
_SQUARE = re.compile(r"\[[^\[\]()]*\]")
_ROUND = re.compile(r"\([^\[\]()]*\)")
_STAR = re.compile(r"\*[^*]*\*")


def strip_nonspeech(text: str) -> str:
    """Remove text that does not correspond to spoken words.

    Drops a leading speaker label ("Speaker 1: ..."), annotations enclosed
    in [], () or ** pairs ("[laughs]", "(laughs)", "*laughs*"), and all
    punctuation (any character that is not a letter, digit, apostrophe or
    whitespace). Whitespace runs collapse to single spaces. Characters from
    unmatched annotation delimiters are dropped as punctuation; their
    content is kept.
    """
    text = text.replace("’", "'")  # typographic apostrophe -> ASCII
    text = _SPEAKER_LABEL.sub("", text, count=1)
    prev = None
    while prev != text:
        prev = text
        text = _SQUARE.sub(" ", text)
        text = _ROUND.sub(" ", text)
        text = _STAR.sub(" ", text)
    text = "".join(
        ch
        for ch in text
        if ch.isalpha() or ch.isdigit() or ch == "'" or ch.isspace()
    )
    return " ".join(text.split())


_ONES = (
    "one two three four five six seven eight nine ten eleven twelve "
    "thirteen fourteen fifteen sixteen seventeen eighteen nineteen"
).split()
_TENS = "twenty thirty forty fifty sixty seventy eighty ninety".split()


def _number_words(n: int) -> str:
    """Spelled form for 1..100: spaces, no hyphens ("twenty one")."""
    if not 1 <= n <= 100:
        raise ValueError(f"{n} outside the spellable range 1..100")
    if n == 100:
        return "one hundred"
    if n < 20:
        return _ONES[n - 1]
    tens, ones = divmod(n, 10)
    word = _TENS[tens - 2]
    return f"{word} {_ONES[ones - 1]}" if ones else word


SPELLED_NUMBERS: dict[int, str] = {n: _number_words(n) for n in range(1, 101)}


def spell_numbers(text: str) -> str:
    """Spell out standalone integer tokens in the range 1..100.

    Any other digit-bearing token ("1,500", "3rd", "007") is left unchanged
    for the character-set filter to deal with. Token boundaries are
    whitespace; the result is single-space joined.
    """
    out = []
    for token in text.split():
        if token.isascii() and token.isdigit():
            n = int(token)
            if 1 <= n <= 100 and str(n) == token:
                out.append(SPELLED_NUMBERS[n])
                continue
        out.append(token)
    return " ".join(out)


def normalize(text: str) -> str:
    """Full cleanup pipeline producing a canonical transcript.

    Lowercases, strips non-speech material, spells out in-range numbers and
    collapses whitespace. Idempotent: normalize(normalize(x)) == normalize(x).
    Output is restricted to lowercase letters, apostrophe and single spaces
    except for characters the charset filter is meant to catch (digits from
    out-of-range numbers, non-Latin letters).
    """
    # Lowercasing runs first: for a handful of code points (e.g. dotted
    # capital I) str.lower() emits combining marks, which must face the
    # character filter on the first pass for idempotence to hold.
    text = text.lower()
    text = strip_nonspeech(text)
    text = spell_numbers(text)
    return " ".join(text.split())
