"""Click-tally kernels for the Monte Carlo engine.

Both backends consume the same uniform draws and perform the same
comparisons, so their tallies are bit-identical. Set TBSIM_DISABLE_NUMBA=1 to
force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def _disabled() -> bool:
    return os.environ.get("TBSIM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")


HAVE_NUMBA = numba is not None


def tally_numpy(
    counts, u_bg, u_pair, bg_cdf_s, bg_cdf_i, out_cdf, s_slot, i_slot, alpha_s, alpha_i,
    singles_s, singles_i, coinc,
):
    n_slots = len(singles_s)
    last_bg_s = len(bg_cdf_s) - 1
    last_bg_i = len(bg_cdf_i) - 1
    pat_s = np.minimum(np.searchsorted(bg_cdf_s, u_bg[:, 0]), last_bg_s)
    pat_i = np.minimum(np.searchsorted(bg_cdf_i, u_bg[:, 1]), last_bg_i)
    bits = np.arange(n_slots)
    click_s = ((pat_s[:, None] >> bits) & 1).astype(bool)
    click_i = ((pat_i[:, None] >> bits) & 1).astype(bool)

    if len(u_pair):
        gate = np.repeat(np.arange(len(counts)), counts)
        o = np.minimum(np.searchsorted(out_cdf, u_pair[:, 0]), len(out_cdf) - 1)
        ss = s_slot[o]
        ii = i_slot[o]
        ds = (ss >= 0) & (u_pair[:, 1] < alpha_s)
        di = (ii >= 0) & (u_pair[:, 2] < alpha_i)
        click_s[gate[ds], ss[ds]] = True
        click_i[gate[di], ii[di]] = True

    singles_s += click_s.sum(axis=0)
    singles_i += click_i.sum(axis=0)
    coinc += click_s.T.astype(np.int64) @ click_i.astype(np.int64)


def count_pairs_numpy(u, cdf):
    return np.minimum(np.searchsorted(cdf, u), len(cdf) - 1).astype(np.int64)


def _count_pairs_loop(u, cdf):
    out = np.empty(u.shape[0], dtype=np.int64)
    last = cdf.shape[0] - 1
    c0 = cdf[0]
    for g in range(u.shape[0]):
        # most gates hold no pair; skip the search for them
        if u[g] <= c0:
            out[g] = 0
        else:
            out[g] = min(np.searchsorted(cdf, u[g]), last)
    return out


def _tally_loop(
    counts, u_bg, u_pair, bg_cdf_s, bg_cdf_i, out_cdf, s_slot, i_slot, alpha_s, alpha_i,
    singles_s, singles_i, coinc,
):
    n_slots = singles_s.shape[0]
    last_bg_s = bg_cdf_s.shape[0] - 1
    last_bg_i = bg_cdf_i.shape[0] - 1
    last_out = out_cdf.shape[0] - 1
    pos = 0
    for g in range(counts.shape[0]):
        cs = min(np.searchsorted(bg_cdf_s, u_bg[g, 0]), last_bg_s)
        ci = min(np.searchsorted(bg_cdf_i, u_bg[g, 1]), last_bg_i)
        for _ in range(counts[g]):
            o = min(np.searchsorted(out_cdf, u_pair[pos, 0]), last_out)
            if s_slot[o] >= 0 and u_pair[pos, 1] < alpha_s:
                cs |= 1 << s_slot[o]
            if i_slot[o] >= 0 and u_pair[pos, 2] < alpha_i:
                ci |= 1 << i_slot[o]
            pos += 1
        if cs == 0 and ci == 0:
            continue
        for j in range(n_slots):
            if (cs >> j) & 1:
                singles_s[j] += 1
                for k in range(n_slots):
                    if (ci >> k) & 1:
                        coinc[j, k] += 1
            if (ci >> j) & 1:
                singles_i[j] += 1


if HAVE_NUMBA:
    tally_numba = numba.njit(cache=True, nogil=True)(_tally_loop)
    count_pairs_numba = numba.njit(cache=True, nogil=True)(_count_pairs_loop)
else:  # pragma: no cover
    tally_numba = count_pairs_numba = None


def select_backend(name: str | None = None) -> str:
    """Resolve ``name`` (or the environment) to 'numba' or 'numpy'."""
    if name is None:
        name = "numpy" if (_disabled() or not HAVE_NUMBA) else "numba"
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    return name


def get_kernels(name: str | None = None):
    """(count_pairs, tally) for the selected backend."""
    if select_backend(name) == "numba":
        return count_pairs_numba, tally_numba
    return count_pairs_numpy, tally_numpy
