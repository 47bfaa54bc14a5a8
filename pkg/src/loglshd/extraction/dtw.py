import numpy as np
import numpy.typing as npt

from loglshd.types import AlignmentPath, CharSequence


def to_char_sequence(
    text: str,
) -> CharSequence:
    """code points of a string as an integer array"""
    return np.frombuffer(text.encode('utf-32-le'), dtype='<u4').astype(np.int64)


def _as_sequence(
    seq: CharSequence | str,
) -> CharSequence:
    if isinstance(seq, str):
        return to_char_sequence(seq)
    return np.asarray(seq, dtype=np.int64)


def cost_matrix(
    a: CharSequence,
    b: CharSequence,
    band: int | None = None,
) -> npt.NDArray[np.int64]:
    """0/1 local costs, cells outside a Sakoe-Chiba band around the scaled
    diagonal being penalised with a cost no path through the band can reach"""
    cost = (a[:, np.newaxis] != b[np.newaxis, :]).astype(np.int64)
    if band is not None:
        n, m = cost.shape
        slope = (m - 1) / (n - 1) if n > 1 else 0.0
        centres = np.arange(n, dtype=np.float64)[:, np.newaxis] * slope
        outside = np.abs(np.arange(m, dtype=np.float64)[np.newaxis, :] - centres) > max(
            band, 1
        )
        cost[outside] += n + m

    return cost


def accumulated_cost(
    cost: npt.NDArray[np.int64],
) -> npt.NDArray[np.int64]:
    """accumulated cost ``D[i, j] = c[i, j] + min(D[i-1, j-1], D[i-1, j], D[i, j-1])``

    Rows are filled vectorised: with the row prefix sum ``C`` the recurrence along a
    row becomes a running minimum over ``t - C + c`` where ``t`` holds the best
    predecessor from the previous row.
    """
    n, m = cost.shape
    acc = np.empty((n, m), dtype=np.int64)
    acc[0] = np.cumsum(cost[0])
    from_above = np.empty(m, dtype=np.int64)
    for i in range(1, n):
        prev = acc[i - 1]
        from_above[0] = prev[0]
        np.minimum(prev[:-1], prev[1:], out=from_above[1:])
        prefix = np.cumsum(cost[i])
        acc[i] = prefix + np.minimum.accumulate(from_above - prefix + cost[i])

    return acc


def _traceback(
    acc: npt.NDArray[np.int64],
) -> tuple[tuple[int, int], ...]:
    i, j = acc.shape[0] - 1, acc.shape[1] - 1
    steps = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = acc[i - 1, j - 1]
            up = acc[i - 1, j]
            left = acc[i, j - 1]
            # ties: diagonal, then advance in a, then advance in b
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        steps.append((i, j))
    steps.reverse()

    return tuple(steps)


def dtw_align(
    a: CharSequence | str,
    b: CharSequence | str,
    band: int | None = None,
) -> AlignmentPath:
    """minimal-cost warping path between two non-empty sequences

    Parameters
    ----------
    a : CharSequence | str
        first sequence, strings are converted to code points
    b : CharSequence | str
        second sequence
    band : int | None, optional
        Sakoe-Chiba band width, by default None (unconstrained)

    Returns
    -------
    AlignmentPath
        steps from (0, 0) to (len(a) - 1, len(b) - 1) with their total cost
    """
    seq_a = _as_sequence(a)
    seq_b = _as_sequence(b)
    if len(seq_a) == 0 or len(seq_b) == 0:
        raise ValueError('Cannot align empty sequences')

    local = cost_matrix(seq_a, seq_b, band=band)
    acc = accumulated_cost(local)
    return AlignmentPath(steps=_traceback(acc), cost=int(acc[-1, -1]))
