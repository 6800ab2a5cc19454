"""Independent reference implementations used by the tests.

Nothing here calls library solvers or the compiled product kernels: series
are plain ``(N+1, 2J+1)`` numpy arrays and products are row-by-row
``np.convolve``.
"""
import itertools
import math

import mpmath
import numpy as np


def _supports(x):
    """Per row: ``(lo, hi)`` column range of the nonzero entries, or None."""
    out = []
    for row in x:
        nz = np.flatnonzero(row)
        out.append((nz[0], nz[-1] + 1) if nz.size else None)
    return out


def naive_mul(a, b, N, J):
    """Truncated product of two dense Fourier-Taylor arrays with band ``J``.

    Row pairs are convolved with ``np.convolve`` on their nonzero column
    ranges only.
    """
    out = np.zeros((N + 1, 2 * J + 1), dtype=complex)
    Ja = (a.shape[1] - 1) // 2
    Jb = (b.shape[1] - 1) // 2
    sa, sb = _supports(a), _supports(b)
    for n1 in range(min(N, a.shape[0] - 1) + 1):
        if sa[n1] is None:
            continue
        la, ha = sa[n1]
        for n2 in range(min(N - n1, b.shape[0] - 1) + 1):
            if sb[n2] is None:
                continue
            lb, hb = sb[n2]
            full = np.convolve(a[n1, la:ha], b[n2, lb:hb])
            k0 = (la - Ja) + (lb - Jb)  # mode of full[0]
            lo = max(-J, k0)
            hi = min(J, k0 + full.size - 1)
            if lo > hi:
                continue
            out[n1 + n2, J + lo : J + hi + 1] += full[lo - k0 : hi - k0 + 1]
    return out


def _unit(N, J):
    one = np.zeros((N + 1, 2 * J + 1), dtype=complex)
    one[0, J] = 1.0
    return one


def naive_exp(x, N, J):
    """``exp(x)`` for ``x`` vanishing at ``v = 0``."""
    out = _unit(N, J)
    term = _unit(N, J)
    for k in range(1, N + 1):
        term = naive_mul(term, x, N, J) / k
        out = out + term
    return out


def _shift_modes(x, j):
    """Multiply by ``e^{ijh}``, dropping modes that leave the band."""
    J = (x.shape[1] - 1) // 2
    out = np.zeros_like(x)
    if j >= 0:
        out[:, j:] = x[:, : x.shape[1] - j]
    else:
        out[:, : x.shape[1] + j] = x[:, -j:]
    return out


def _band(arr, J):
    """Embed an array into band ``J`` (zero padding or dropping)."""
    Js = (arr.shape[1] - 1) // 2
    out = np.zeros((arr.shape[0], 2 * J + 1), dtype=complex)
    k = min(J, Js)
    out[:, J - k : J + k + 1] = arr[:, Js - k : Js + k + 1]
    return out


def naive_compose(outer, shift, hpert, vsub, N, J, pad=None):
    """``outer(h + shift + hpert(h, v), vsub(h, v))`` with ``hpert, vsub = O(v)``.

    ``e^{ij(h + shift + hpert)} = e^{ij shift} e^{ijh} exp(i hpert)^j``.  The
    work is done in band ``J + Jo`` so that modes shifted back into ``|k| <= J``
    by ``e^{ijh}`` are kept; only the final result is cut to band ``J``.
    ``pad`` narrows the extra width when the caller knows it suffices.
    """
    Jo = (outer.shape[1] - 1) // 2
    W = J + (Jo if pad is None else pad)
    hpert = _band(hpert, W)
    vsub = _band(vsub, W)
    vpow = [_unit(N, W)]
    for _ in range(N):
        vpow.append(naive_mul(vpow[-1], vsub, N, W))
    Ep = naive_exp(1j * hpert, N, W)
    Em = naive_exp(-1j * hpert, N, W)
    out = np.zeros((N + 1, 2 * W + 1), dtype=complex)
    E = _unit(N, W)
    pos = [E]
    for _ in range(Jo):
        pos.append(naive_mul(pos[-1], Ep, N, W))
    neg = [E]
    for _ in range(Jo):
        neg.append(naive_mul(neg[-1], Em, N, W))
    for j in range(-Jo, Jo + 1):
        col = outer[: N + 1, Jo + j]
        if not col.any():
            continue
        T = sum(col[n] * vpow[n] for n in range(len(col)) if col[n] != 0)
        Ej = pos[j] if j >= 0 else neg[-j]
        out += np.exp(1j * j * shift) * _shift_modes(naive_mul(T, Ej, N, W), j)
    return _band(out, J)


def recomposition_defect(nbhd, result, N, pad=None):
    """``f o g - g o F`` component-wise, with ``F = (h + 2 omega + beta, lambda v)``.

    ``beta`` is the reported horizontal residual.  A zero vertical defect
    means ``g^{-1} o f o g`` has vertical part exactly ``lambda v``; a zero
    horizontal defect confirms ``beta`` as well.
    """
    J = nbhd.domain.fourier_band
    lam = nbhd.multiplier.value
    om = nbhd.omega
    a = np.array(nbhd.a.coeffs)
    b = np.array(nbhd.b.coeffs)
    Gh = _band(np.array(result.g.h_perturbation.coeffs), J)[: N + 1]
    Gv = _band(np.array(result.g.v_perturbation.coeffs), J)[: N + 1]
    beta = _band(np.array(result.residual.h_perturbation.coeffs), J)[: N + 1]
    assert result.residual.multiplier == lam
    v = np.zeros((N + 1, 2 * J + 1), dtype=complex)
    v[1, J] = 1.0
    gv = v + Gv
    # f o g
    a_g = naive_compose(a, 0.0, Gh, gv, N, J, pad)
    b_g = naive_compose(b, 0.0, Gh, gv, N, J, pad)
    fv = lam * (gv + naive_mul(gv, a_g, N, J))
    fh = Gh + b_g
    # g o F
    Fv = lam * v
    gF_v = Fv + naive_compose(Gv, 2 * om, beta, Fv, N, J, pad)
    gF_h = beta + naive_compose(Gh, 2 * om, beta, Fv, N, J, pad)
    return fv - gF_v, fh - gF_h


# ---------------------------------------------------------------------------
# one-variable oracles


def mp_schroeder(lam_value, terms, N, dps=40):
    """``psi`` with ``phi o psi = psi o (lambda .)`` in mpmath arithmetic.

    ``P[k][m] = [psi^k]_m`` is filled as soon as ``psi_1 .. psi_{m-k+1}`` are
    known, only for the degrees ``k`` that occur in ``terms``.
    """
    kmax = max(terms)
    with mpmath.workdps(dps):
        lam = mpmath.mpc(lam_value)
        psi = [mpmath.mpc(0)] * (N + 1)
        psi[1] = mpmath.mpc(1)
        P = [[mpmath.mpc(0)] * (N + 1) for _ in range(kmax + 1)]
        P[1][1] = mpmath.mpc(1)
        for n in range(2, N + 1):
            for k in range(2, kmax + 1):
                P[k][n] = mpmath.fsum(psi[i] * P[k - 1][n - i] for i in range(1, n - k + 2))
            rhs = mpmath.fsum(mpmath.mpc(c) * P[k][n] for k, c in terms.items())
            psi[n] = rhs / (lam**n - lam)
            P[1][n] = psi[n]
        return psi


# ---------------------------------------------------------------------------
# majorant oracles


def brute_eta(K, M):
    """eta by enumerating every multiset of parts ``1 <= m_i < m`` with sum ``<= m``."""
    eta = {1: 1}
    for m in range(2, M + 1):
        best = 1
        for p in range(1, m + 1):
            for parts in itertools.combinations_with_replacement(range(1, m), p):
                if sum(parts) > m:
                    continue
                prod = 1
                for q in parts:
                    prod *= eta[q]
                best = max(best, prod)
        eta[m] = K[m] * best
    return eta


def poly_mul(a, b, N):
    out = [0.0] * (N + 1)
    for i, x in enumerate(a[: N + 1]):
        if x == 0:
            continue
        for j, y in enumerate(b[: N + 1 - i]):
            out[i + j] += x * y
    return out


def neg_binomial(x, k, N):
    """``(1 - x)^{-k}`` as ``sum_i C(k+i-1, i) x^i`` by repeated multiplication (``x_0 = 0``)."""
    out = [0.0] * (N + 1)
    out[0] = 1.0
    power = [1.0] + [0.0] * N
    for i in range(1, N + 1):
        power = poly_mul(power, x, N)
        c = math.comb(k + i - 1, i)
        out = [o + c * p for o, p in zip(out, power)]
    return out


def vertical_replay(A, R, M, Mt, n, d):
    """Right side of the vertical majorant equation evaluated at ``A`` by naive expansion."""
    N = len(A) - 1
    s = [R * x for x in A]
    s[1] += R
    g = neg_binomial(s, d, N)
    g = [gi - d * si for gi, si in zip(g, s)]
    g[0] -= 1.0
    q = neg_binomial([x / M for x in g], n, N)
    q[0] -= 1.0
    prod = poly_mul(list(A), q, N)
    return [Mt * (gi + pi) for gi, pi in zip(g, prod)]


def full_replay(A, R, M, Mt, n, d, C0):
    N = len(A) - 1
    s = [R * x for x in A]
    s[1] += R
    G = neg_binomial(s, d, N)
    G = [gi - d * si for gi, si in zip(G, s)]
    G[0] -= 1.0
    un = neg_binomial([x / M for x in A], n, N)
    first = [u - n * x / M for u, x in zip(un, A)]
    first[0] -= 1.0
    return [Mt * (C0 * f + p) for f, p in zip(first, poly_mul(un, G, N))]
