"""Batched LSTM forward and exact reverse-mode backward with length masking.

Sequences in a batch are right-padded to a common length T. A position t of
row b is active when t < lengths[b]; at inactive positions the hidden and
cell states carry through unchanged, so the state at index T-1 is each row's
own final state and padded positions receive exactly zero gradient.
"""

from __future__ import annotations

import numpy as np


def sigmoid(a: np.ndarray) -> np.ndarray:
    """Logistic function; saturates cleanly to 0/1 for large |a|."""
    with np.errstate(over="ignore"):
        # exp overflow only happens when the result underflows to exactly 0,
        # so the saturated value is still correct.
        return 1.0 / (1.0 + np.exp(-a))


def lstm_forward(wx, wh, b, x, lengths, h0=None, c0=None):
    """Run the LSTM over a padded batch.

    Args:
        wx: (D, 4H) input weights, gates fused as input|forget|cell|output.
        wh: (H, 4H) recurrent weights.
        b: (4H,) bias.
        x: (B, T, D) padded inputs.
        lengths: (B,) active lengths, 1 <= lengths[b] <= T.
        h0, c0: optional (B, H) initial states (zeros when omitted).

    Returns:
        (h_seq, (h_final, c_final), cache) where h_seq is (B, T, H) with the
        carried state at padded positions, and cache feeds lstm_backward.
    """
    batch, steps, _ = x.shape
    hidden = wh.shape[0]
    h = np.zeros((batch, hidden)) if h0 is None else h0.copy()
    c = np.zeros((batch, hidden)) if c0 is None else c0.copy()
    h_init = h.copy()
    c_init = c.copy()

    xw = x.reshape(batch * steps, -1) @ wx
    xw = xw.reshape(batch, steps, 4 * hidden)
    xw += b

    mask = (np.arange(steps)[None, :] < np.asarray(lengths)[:, None]).astype(x.dtype)
    full_rows = bool(mask.all())

    gates = np.empty((batch, steps, 4 * hidden))
    tanh_c = np.empty((batch, steps, hidden))
    c_seq = np.empty((batch, steps, hidden))
    h_seq = np.empty((batch, steps, hidden))

    with np.errstate(over="ignore"):
        for t in range(steps):
            a = xw[:, t] + h @ wh
            # sigmoid over the input/forget block and the output block, tanh on cell
            a[:, : 2 * hidden] = 1.0 / (1.0 + np.exp(-a[:, : 2 * hidden]))
            a[:, 3 * hidden :] = 1.0 / (1.0 + np.exp(-a[:, 3 * hidden :]))
            np.tanh(a[:, 2 * hidden : 3 * hidden], out=a[:, 2 * hidden : 3 * hidden])
            gates[:, t] = a
            i = a[:, :hidden]
            f = a[:, hidden : 2 * hidden]
            g = a[:, 2 * hidden : 3 * hidden]
            o = a[:, 3 * hidden :]
            c_cand = f * c + i * g
            tc = np.tanh(c_cand)
            if full_rows:
                c = c_cand
                h = o * tc
            else:
                m = mask[:, t : t + 1]
                c = m * c_cand + (1.0 - m) * c
                h = m * (o * tc) + (1.0 - m) * h
            tanh_c[:, t] = tc
            c_seq[:, t] = c
            h_seq[:, t] = h

    cache = {
        "x": x, "wx": wx, "wh": wh, "mask": mask, "full_rows": full_rows,
        "gates": gates, "tanh_c": tanh_c,
        "c_seq": c_seq, "h_seq": h_seq, "h_init": h_init, "c_init": c_init,
    }
    return h_seq, (h, c), cache


def lstm_backward(cache, dh_seq, dh_final=None, dc_final=None):
    """Backpropagate through lstm_forward.

    dh_seq is the (B, T, H) gradient w.r.t. every stored h_seq value; it must
    be zero at padded positions. Optional dh_final/dc_final add gradient at
    the carried final state.

    Returns (dwx, dwh, db, dx, dh0, dc0).
    """
    x, wx, wh, mask = cache["x"], cache["wx"], cache["wh"], cache["mask"]
    gates, tanh_c = cache["gates"], cache["tanh_c"]
    c_seq, h_init, c_init = cache["c_seq"], cache["h_init"], cache["c_init"]
    full_rows = cache["full_rows"]
    batch, steps, hidden = dh_seq.shape

    da_seq = np.empty((batch, steps, 4 * hidden))
    dh_carry = np.zeros((batch, hidden)) if dh_final is None else dh_final.copy()
    dc_carry = np.zeros((batch, hidden)) if dc_final is None else dc_final.copy()

    for t in reversed(range(steps)):
        a = gates[:, t]
        i = a[:, :hidden]
        f = a[:, hidden : 2 * hidden]
        g = a[:, 2 * hidden : 3 * hidden]
        o = a[:, 3 * hidden :]
        tc = tanh_c[:, t]
        c_prev = c_seq[:, t - 1] if t > 0 else c_init
        dh = dh_seq[:, t] + dh_carry
        do = dh * tc
        dc = dc_carry + dh * o * (1.0 - tc * tc)
        da = da_seq[:, t]
        da[:, :hidden] = dc * g * i * (1.0 - i)
        da[:, hidden : 2 * hidden] = dc * c_prev * f * (1.0 - f)
        da[:, 2 * hidden : 3 * hidden] = dc * i * (1.0 - g * g)
        da[:, 3 * hidden :] = do * o * (1.0 - o)
        if full_rows:
            dh_carry = da @ wh.T
            dc_carry = dc * f
        else:
            m = mask[:, t : t + 1]
            da *= m
            dh_carry = da @ wh.T + (1.0 - m) * dh
            dc_carry = m * (dc * f) + (1.0 - m) * dc_carry

    h_prev = np.concatenate([h_init[:, None, :], cache["h_seq"][:, :-1]], axis=1)
    flat_da = da_seq.reshape(batch * steps, 4 * hidden)
    dwx = x.reshape(batch * steps, -1).T @ flat_da
    dwh = h_prev.reshape(batch * steps, hidden).T @ flat_da
    db = flat_da.sum(axis=0)
    dx = (flat_da @ wx.T).reshape(x.shape)
    return dwx, dwh, db, dx, dh_carry, dc_carry
