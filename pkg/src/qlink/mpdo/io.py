"""Trajectory CSV and binary checkpoints.

Checkpoint layout, all integers little-endian:

    magic   8 bytes   b"QLMPDO\\x00\\x01"
    version u32       1
    L       u32
    nbar    u32
    m_max   u32
    b_max   u32
    center  i32       0 when no orthogonality center is set
    eps_svd f64, discarded_weight f64, log_norm f64
    then per site x = 1..L:
        shape  4 x u64  (w_left, d, b, w_right)
        labels u64 count + count x i64   (right bond; count 0 on the last site)
        data   w_left*d*b*w_right complex values, each '<f8' real then '<f8' imag, C order
"""

from __future__ import annotations

import csv
import io
import struct

import numpy as np

from ..chain import QLinkChain
from .state import MpdoState

MAGIC = b"QLMPDO\x00\x01"
VERSION = 1


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def trajectory_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def save_checkpoint(state: MpdoState, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIIIIi", VERSION, state.L, state.nbar, state.m_max,
                             state.b_max, state.center or 0))
        fh.write(struct.pack("<ddd", state.eps_svd, state.discarded_weight, state.log_norm))
        for x, t in enumerate(state.tensors, start=1):
            fh.write(struct.pack("<4Q", *t.shape))
            lab = state.labels[x - 1] if x < state.L else np.zeros(0, dtype=np.int64)
            fh.write(struct.pack("<Q", len(lab)))
            fh.write(np.asarray(lab, dtype="<i8").tobytes())
            fh.write(np.ascontiguousarray(t, dtype="<c16").tobytes())


def load_checkpoint(chain: QLinkChain, path) -> MpdoState:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != MAGIC:
        raise ValueError("not a qlink checkpoint")
    off = 8
    version, L, nbar, m_max, b_max, center = struct.unpack_from("<IIIIIi", data, off)
    off += 24
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    if L != chain.L or nbar != chain.nbar:
        raise ValueError("checkpoint does not match the chain")
    eps, disc, lognorm = struct.unpack_from("<ddd", data, off)
    off += 24
    tensors, labels = [], []
    for x in range(1, L + 1):
        shape = struct.unpack_from("<4Q", data, off)
        off += 32
        (n,) = struct.unpack_from("<Q", data, off)
        off += 8
        lab = np.frombuffer(data, dtype="<i8", count=n, offset=off).astype(np.int64)
        off += 8 * n
        size = int(np.prod(shape))
        t = np.frombuffer(data, dtype="<c16", count=size, offset=off).reshape(shape)
        off += 16 * size
        tensors.append(t.astype(complex))
        if x < L:
            labels.append(lab)
    return MpdoState(chain, tensors, labels, m_max, eps, b_max, disc, lognorm, center or None)
