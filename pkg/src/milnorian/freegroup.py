"""Words in a free group on generators 0..k-1; a letter is ``(index, sign)``."""
import string


def inverse(word):
    return [(i, -s) for i, s in reversed(word)]


def cancels(a, b):
    return a[0] == b[0] and a[1] == -b[1]


def reduce(word):
    out = []
    for letter in word:
        if out and cancels(out[-1], letter):
            out.pop()
        else:
            out.append(letter)
    return out


def is_reduced(word):
    return all(not cancels(a, b) for a, b in zip(word, word[1:]))


def is_cyclically_reduced(word):
    return bool(word) and is_reduced(word) and not cancels(word[-1], word[0])


def power(word, n):
    return list(word) * n if n >= 0 else inverse(word) * (-n)


def concat(*words):
    out = []
    for w in words:
        out.extend(w)
    return out


def is_opposite_power_pair(u, v):
    """True when u = f^a and v = f^-b for some word f and a, b > 0.

    For cyclically reduced u, v this is ``u^|v| == (v^-1)^|u|`` letter by letter.
    """
    if not u or not v:
        return False
    return power(u, len(v)) == power(inverse(v), len(u))


def random_reduced(rng, k, length, first=None, avoid_last=None, persistence=0.0):
    """Uniform-ish random reduced word; optional constraints on its ends.

    With probability ``persistence`` a letter repeats its predecessor, which
    produces long runs of powers (prefixes with large invariants).
    """
    word = []
    for pos in range(length):
        while True:
            if word and persistence > 0 and rng.random() < persistence:
                letter = word[-1]
            else:
                letter = (int(rng.integers(k)), int(rng.choice([-1, 1])))
            if pos == 0 and first is not None and cancels(letter, first):
                continue
            if word and cancels(word[-1], letter):
                continue
            if pos == length - 1 and avoid_last is not None and cancels(letter, avoid_last):
                continue
            break
        word.append(letter)
    return word


def random_cyclically_reduced(rng, k, length, persistence=0.0):
    while True:
        w = random_reduced(rng, k, length, persistence=persistence)
        if is_cyclically_reduced(w):
            return w


def to_str(word):
    """Compact spelling: generator i is the i-th lowercase letter, its inverse uppercase."""
    if not word:
        return "1"
    out = []
    for i, s in word:
        ch = string.ascii_lowercase[i]
        out.append(ch if s > 0 else ch.upper())
    return "".join(out)


def from_str(text):
    if text == "1":
        return []
    word = []
    for ch in text:
        if ch.islower():
            word.append((string.ascii_lowercase.index(ch), 1))
        else:
            word.append((string.ascii_lowercase.index(ch.lower()), -1))
    return word
