"""
Word problem and ball growth for closed orientable surface groups

    < a_1, b_1, ..., a_g, b_g | [a_1, b_1] ... [a_g, b_g] >,  g >= 2.

Letters are small integers: generator ``j`` is ``2j`` and its inverse ``2j + 1``,
so ``x ^ 1`` inverts a letter. With ``a_i = 2i`` and ``b_i = 2i + 1`` as
generator indices, ``a_i`` is letter ``4i`` and ``b_i`` letter ``4i + 2``.

Dehn's algorithm decides the word problem: free reduction plus replacing any
subword that is more than half of a cyclic conjugate of the relator (or its
inverse) by the inverse of the remaining piece. A word is reduced once no such
subword is left. Reduced words need not be geodesic and one element can have
several geodesic spellings; both are handled by closing a word under the
length-preserving "exactly half" swaps.
"""

from __future__ import annotations

_NAMES = "ab"


class SurfaceGroup:
    def __init__(self, genus):
        genus = int(genus)
        if genus < 2:
            raise ValueError("surface groups here need genus >= 2")
        self.genus = genus
        self.n_letters = 4 * genus
        self._rel_len = 4 * genus
        self._half = 2 * genus
        rel = []
        for i in range(genus):
            a, b = 4 * i, 4 * i + 2
            rel += [a, b, a ^ 1, b ^ 1]
        self.relator = tuple(rel)
        self._build_tables()

    # -- tables ------------------------------------------------------------

    def _build_tables(self):
        L, H = self._rel_len, self._half
        conj = set()
        for r in (self.relator, self.inverse(self.relator)):
            for k in range(L):
                conj.add(r[k:] + r[:k])
        longer = {}  # subword longer than half -> shorter replacement
        half = {}  # subword of exactly half -> equal-length alternatives
        follow = {}  # prefix -> letters extending it towards a relator piece
        for r in sorted(conj):
            for k in range(H, L + 1):
                piece, rest = r[:k], self.inverse(r[k:])
                if k == H:
                    half.setdefault(piece, set()).add(rest)
                else:
                    longer[piece] = rest
                follow.setdefault(piece[:-1], set()).add(piece[-1])
        self._longer = longer
        self._halfswap = {k: tuple(sorted(v)) for k, v in half.items()}
        self._follow = follow

    # -- word utilities ----------------------------------------------------

    @staticmethod
    def inverse(word):
        return tuple(x ^ 1 for x in reversed(word))

    @staticmethod
    def free_reduce(word):
        out = []
        for x in word:
            if out and out[-1] == x ^ 1:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def parse(self, text):
        """``"a1 b1 A1"`` style words; upper case is the inverse."""
        word = []
        for tok in text.split():
            name, idx = tok[0], int(tok[1:]) - 1
            if name.lower() not in _NAMES or not 0 <= idx < self.genus:
                raise ValueError(f"bad generator {tok!r}")
            letter = 4 * idx + 2 * _NAMES.index(name.lower())
            word.append(letter ^ 1 if name.isupper() else letter)
        return tuple(word)

    def format(self, word):
        out = []
        for x in word:
            gen = x >> 1
            name = _NAMES[gen % 2] + str(gen // 2 + 1)
            out.append(name.upper() if x & 1 else name)
        return " ".join(out)

    # -- Dehn's algorithm --------------------------------------------------

    def dehn_reduce(self, word):
        """Free reduction plus more-than-half relator replacements, to a fixpoint."""
        w = self.free_reduce(word)
        L, H = self._rel_len, self._half
        while True:
            hit = None
            for k in range(min(L, len(w)), H, -1):
                for i in range(len(w) - k + 1):
                    rep = self._longer.get(w[i : i + k])
                    if rep is not None:
                        hit = (i, k, rep)
                        break
                if hit:
                    break
            if hit is None:
                return w
            i, k, rep = hit
            w = self.free_reduce(w[:i] + rep + w[i + k :])

    def is_identity(self, word):
        return not self.dehn_reduce(word)

    def equal(self, u, v):
        return self.is_identity(tuple(u) + self.inverse(tuple(v)))

    def _half_swaps(self, word):
        H = self._half
        for i in range(len(word) - H + 1):
            for rep in self._halfswap.get(word[i : i + H], ()):
                yield word[:i] + rep + word[i + H :]

    def _closure(self, seeds):
        """Close equal-length words under half swaps.

        Returns ``(spellings, None)`` or ``(None, shorter)`` as soon as some
        swap exposes a shorter word for the same element.
        """
        n = len(seeds[0])
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            u = stack.pop()
            for v in self._half_swaps(u):
                r = self.dehn_reduce(v)
                if len(r) < n:
                    return None, r
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen, None

    def canonical(self, word):
        """Shortlex-least geodesic spelling of the element ``word`` represents."""
        w = self.dehn_reduce(word)
        while True:
            if not w:
                return ()
            seen, shorter = self._closure([w])
            if seen is not None:
                return min(seen)
            w = shorter

    def word_length(self, word):
        return len(self.canonical(word))

    # -- growth ------------------------------------------------------------

    def _risky(self, u):
        # letters whose append could start a cancellation or a half/long relator piece
        risky = {u[-1] ^ 1} if u else set()
        for k in range(self._half - 1, self._rel_len):
            if 0 < k <= len(u):
                nxt = self._follow.get(u[-k:])
                if nxt:
                    risky |= nxt
        return risky

    def sphere_sizes(self, m_max):
        """Number of elements of word length exactly ``m`` for ``m = 0..m_max``.

        Breadth-first over canonical spellings. Each frontier entry keeps every
        geodesic spelling of its element; appending a letter that cannot touch a
        relator piece or cancel in any of them yields a new canonical word
        directly, otherwise the extended spellings are closed under half swaps
        and the element is counted only from its shortlex-least spelling.
        """
        sizes = [1]
        frontier = [((), [()])]
        for m in range(m_max):
            last = m == m_max - 1
            nxt = []
            count = 0
            for w, spellings in frontier:
                risky = set()
                for u in spellings:
                    risky |= self._risky(u)
                for s in range(self.n_letters):
                    ws = w + (s,)
                    if s not in risky:
                        count += 1
                        if not last:
                            nxt.append((ws, [u + (s,) for u in spellings]))
                        continue
                    if w and s == w[-1] ^ 1:
                        continue
                    seen, _ = self._closure([u + (s,) for u in spellings])
                    if seen is None or min(seen) != ws:
                        continue
                    count += 1
                    if not last:
                        nxt.append((ws, sorted(seen)))
            sizes.append(count)
            frontier = nxt
        return sizes

