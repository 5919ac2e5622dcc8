"""Pure numpy versions of the accumulation kernels in ``_kernels.pyx``."""
import numpy as np


def accumulate_n2(rows, row_ptr, nbr, bins, a, irho, sigma, tmat, mask1, nbins):
    out = np.zeros((len(rows), nbins))
    for r, i in enumerate(rows):
        s, e = row_ptr[i], row_ptr[i + 1]
        if s == e:
            continue
        j = nbr[s:e]
        t = tmat[sigma[i], sigma[j]] * mask1[j]
        vals = (a[s:e] * t) * irho[i]
        out[r] = np.bincount(bins[s:e], weights=vals, minlength=nbins)
    return np.cumsum(out, axis=1)


def accumulate_n3(rows, row_ptr, nbr, bins, a, irho, sigma, tmat, mask1, mask2,
                  pairsum, nbins):
    out = np.zeros((len(rows), nbins))
    for r, i in enumerate(rows):
        s, e = row_ptr[i], row_ptr[i + 1]
        m = e - s
        if m < 2:
            continue
        j = nbr[s:e]
        sj = sigma[j]
        b = bins[s:e]
        aa = a[s:e]
        if pairsum:
            tij = tmat[sigma[i], sj]
            t3 = (tij[:, None] + tij[None, :]) + tmat[np.ix_(sj, sj)]
        else:
            t3 = np.ones((m, m))
        t3 = t3 * (mask1[j][:, None] * mask2[j][None, :])
        vals = ((aa[:, None] * aa[None, :]) * t3) * irho[i]
        bb = np.maximum(b[:, None], b[None, :])
        off = ~np.eye(m, dtype=bool)
        out[r] = np.bincount(bb[off], weights=vals[off], minlength=nbins)
    return np.cumsum(out, axis=1)
