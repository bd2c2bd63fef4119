"""Pure-Python trek accumulation kernel (fallback for the compiled one)."""


def accumulate_pairs(left_ends, left_prods, right_ends, right_prods, weight, out):
    """Add ``weight * p * q`` to ``out[i][j]`` for every left path ``(i, p)`` and right path ``(j, q)``.

    Each (left, right) combination is one trek. Returns the number of treks visited.
    """
    n_left = len(left_ends)
    n_right = len(right_ends)
    for x in range(n_left):
        i = left_ends[x]
        wp = weight * left_prods[x]
        row = out[i]
        for y in range(n_right):
            j = right_ends[y]
            row[j] += wp * right_prods[y]
    return n_left * n_right
