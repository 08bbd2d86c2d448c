"""CSV datasets, binary model files and planted-subspace synthetic data.

Model file layout (all integers little-endian)::

    magic    4 bytes   b"ISCB"
    version  uint16    1
    p-tag    uint32    1, 2, or 0 for inf
    d, C, s  uint32 x 3
    labels   C x (uint32 byte length + UTF-8 bytes)
    blocks   C*d*s float64, column-major within a block, blocks in class order
"""

import csv
import io
import math
import struct
from dataclasses import dataclass

import numpy as np

from .core import INF, ClassDataset, FeatureBank

MAGIC = b"ISCB"
VERSION = 1
_P_TAGS = {1.0: 1, 2.0: 2, INF: 0}
_P_FROM_TAG = {v: k for k, v in _P_TAGS.items()}

COEFFICIENT_MODELS = ("sparse", "flat", "gaussian")


class DataError(ValueError):
    """Malformed dataset or model file."""


# ----------------------------------------------------------------------------
# CSV

def read_csv_rows(path):
    """Read ``label,x1,...,xd`` rows; returns ``(labels, X)`` with signals as rows."""
    labels, rows = [], []
    width = None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) < 2:
                raise DataError(f"row {lineno}: expected a label and at least one value")
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise DataError(
                    f"row {lineno}: ragged row with {len(rec) - 1} values, "
                    f"expected {width - 1}")
            vals = []
            for col, f in enumerate(rec[1:], start=2):
                try:
                    vals.append(float(f))
                except ValueError:
                    raise DataError(
                        f"row {lineno}, column {col}: non-numeric field {f!r}") from None
            labels.append(rec[0].strip())
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: empty dataset")
    X = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        r, c = np.argwhere(~np.isfinite(X))[0]
        raise DataError(f"row {r + 1}, column {c + 2}: non-finite value")
    return labels, X


def dataset_from_rows(labels, X):
    order = list(dict.fromkeys(labels))
    lab = np.array(labels, dtype=object)
    return ClassDataset([X[lab == c].T for c in order], order)


def load_csv(path):
    """Load a dataset; classes are ordered by first appearance."""
    return dataset_from_rows(*read_csv_rows(path))


def save_csv(data, path):
    """Write ``data`` one signal per row; ``repr`` floats round-trip exactly."""
    with open(path, "w", newline="") as fh:
        fh.write(dataset_to_csv(data))


def dataset_to_csv(data):
    buf = io.StringIO()
    for lab, Y in zip(data.labels, data.classes):
        for col in Y.T:
            buf.write(",".join([lab] + [repr(float(v)) for v in col]) + "\n")
    return buf.getvalue()


# ----------------------------------------------------------------------------
# Model files

def save_model(bank):
    """Encode ``bank`` in the binary model format."""
    C, d, s = bank.blocks.shape
    out = [MAGIC, struct.pack("<HIIII", VERSION, _P_TAGS[bank.pnorm], d, C, s)]
    for lab in bank.labels:
        raw = lab.encode("utf-8")
        out.append(struct.pack("<I", len(raw)))
        out.append(raw)
    # column-major per block == row-major of the transposed block
    out.append(np.ascontiguousarray(bank.blocks.transpose(0, 2, 1)).astype("<f8").tobytes())
    return b"".join(out)


def load_model(buf):
    """Decode a model file, rejecting bad magic, versions, truncation and non-orthonormal blocks."""
    buf = bytes(buf)
    head = struct.calcsize("<HIIII")
    if len(buf) < 4 + head:
        raise DataError(f"model truncated: header needs {4 + head} bytes, got {len(buf)}")
    if buf[:4] != MAGIC:
        raise DataError(f"bad magic {buf[:4]!r}, expected {MAGIC!r}")
    version, ptag, d, C, s = struct.unpack_from("<HIIII", buf, 4)
    if version != VERSION:
        raise DataError(f"unsupported model version {version}, expected {VERSION}")
    if ptag not in _P_FROM_TAG:
        raise DataError(f"unknown p-tag {ptag}")
    pos = 4 + head
    labels = []
    for i in range(C):
        if len(buf) < pos + 4:
            raise DataError(f"model truncated in label {i}")
        (n,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        if len(buf) < pos + n:
            raise DataError(f"model truncated in label {i}")
        labels.append(buf[pos:pos + n].decode("utf-8"))
        pos += n
    expected = C * d * s * 8
    actual = len(buf) - pos
    if actual != expected:
        raise DataError(
            f"block section has {actual} bytes, expected {expected} "
            f"for C={C}, d={d}, s={s}")
    blocks = np.frombuffer(buf, dtype="<f8", offset=pos).reshape(C, s, d)
    blocks = blocks.transpose(0, 2, 1).astype(np.float64)
    try:
        return FeatureBank(blocks, _P_FROM_TAG[ptag], labels)
    except ValueError as exc:
        raise DataError(f"corrupt model: {exc}") from exc


def write_model(bank, path):
    with open(path, "wb") as fh:
        fh.write(save_model(bank))


def read_model(path):
    with open(path, "rb") as fh:
        return load_model(fh.read())


# ----------------------------------------------------------------------------
# Synthetic data

class SeededStream:
    """Reproducible random numbers from the Philox-4x64 counter-based generator.

    Uniforms are the top 53 bits of each 64-bit output scaled by 2**-53;
    normals use the Box-Muller transform on consecutive uniform pairs. Both
    steps are fixed here rather than delegated to library samplers whose
    algorithms may change between releases.
    """

    def __init__(self, seed):
        self._bits = np.random.Philox(int(seed) & (2**64 - 1))

    def uniform(self, n):
        raw = self._bits.random_raw(int(n))
        return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, shape):
        n = int(np.prod(shape))
        m = (n + 1) // 2
        u = self.uniform(2 * m).reshape(m, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u in (0, 1]
        t = 2.0 * np.pi * u[:, 1]
        z = np.column_stack([r * np.cos(t), r * np.sin(t)]).ravel()
        return z[:n].reshape(shape)

    def integers(self, high, n):
        return np.minimum((self.uniform(n) * high).astype(np.int64), high - 1)

    def signs(self, n):
        return np.where(self.uniform(n) < 0.5, -1.0, 1.0)


def _orthonormal_columns(A):
    Q, R = np.linalg.qr(A)
    return Q * np.where(np.diagonal(R) < 0, -1.0, 1.0)


@dataclass
class SyntheticSpec:
    classes: int
    dim: int
    per_class: int
    rank: int
    coefficient_model: str = "gaussian"
    noise_sigma: float = 0.0
    subspace_coherence: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.coefficient_model not in COEFFICIENT_MODELS:
            raise ValueError(f"coefficient_model must be one of {COEFFICIENT_MODELS}")
        if min(self.classes, self.dim, self.per_class, self.rank) < 1:
            raise ValueError("classes, dim, per_class and rank must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0.0 <= self.subspace_coherence <= 1.0:
            raise ValueError("subspace_coherence must lie in [0, 1]")
        need = self.rank * self.classes
        if self.subspace_coherence > 0:
            need += self.rank
        if need > self.dim:
            raise ValueError(
                f"cannot plant {self.classes} subspaces of rank {self.rank} "
                f"with coherence {self.subspace_coherence} in dimension {self.dim} "
                f"(needs dim >= {need})")


_MODEL_PNORM = {"sparse": INF, "flat": 1.0, "gaussian": 2.0}


def planted_bank(spec, stream=None):
    """Planted orthonormal blocks with ``|F_i^T F_j|_{2,2} = coherence`` for i != j.

    Blocks are ``sqrt(1 - c) B_i + sqrt(c) S R_i`` with mutually orthogonal
    ``B_i`` and ``S`` and random rotations ``R_i``, so
    ``F_i^T F_j = c R_i^T R_j`` is ``c`` times an orthogonal matrix.
    """
    stream = stream or SeededStream(spec.seed)
    C, d, s, c = spec.classes, spec.dim, spec.rank, spec.subspace_coherence
    n_blocks = C + (1 if c > 0 else 0)
    basis = _orthonormal_columns(stream.normal((d, s * n_blocks)))
    blocks = [basis[:, i * s:(i + 1) * s] for i in range(C)]
    if c > 0:
        shared = basis[:, C * s:]
        blocks = [math.sqrt(1.0 - c) * B + math.sqrt(c) * shared @ _orthonormal_columns(stream.normal((s, s)))
                  for B in blocks]
    return FeatureBank(np.stack(blocks), _MODEL_PNORM[spec.coefficient_model],
                       [f"c{i}" for i in range(C)])


def _coefficients(model, s, n, stream):
    if model == "sparse":
        X = np.zeros((s, n))
        X[stream.integers(s, n), np.arange(n)] = stream.signs(n)
        return X
    if model == "flat":
        return stream.signs(s * n).reshape(s, n) / math.sqrt(s)
    return stream.normal((s, n)) / math.sqrt(s)


def split_counts(n):
    """Train/test sizes for ``n`` signals: halves, the extra one to training."""
    return (n + 1) // 2, n // 2


def generate_synthetic(spec):
    """Signals ``y = F_i x + r`` from planted class subspaces.

    Coefficients ``x`` follow ``spec.coefficient_model``: ``sparse`` has one
    +-1 entry at a uniform position, ``flat`` has all entries +-1/sqrt(s),
    ``gaussian`` is standard normal divided by sqrt(s). The residual is
    ``noise_sigma`` times a standard Gaussian vector projected onto the
    orthogonal complement of ``span(F_i)``. Columns are normalised, then
    each class is split into train and test halves.

    Returns ``(train, test, planted)``.
    """
    stream = SeededStream(spec.seed)
    bank = planted_bank(spec, stream)
    train, test = [], []
    n_train, _ = split_counts(spec.per_class)
    for F in bank.blocks:
        X = _coefficients(spec.coefficient_model, spec.rank, spec.per_class, stream)
        Y = F @ X
        if spec.noise_sigma > 0:
            Z = stream.normal((spec.dim, spec.per_class))
            Y = Y + spec.noise_sigma * (Z - F @ (F.T @ Z))
        norms = np.linalg.norm(Y, axis=0)
        if np.any(norms == 0):
            raise DataError("generated a zero signal; change the seed")
        Y = Y / norms
        train.append(Y[:, :n_train])
        test.append(Y[:, n_train:])
    labels = list(bank.labels)
    test_ds = ClassDataset(test, labels) if spec.per_class > 1 else None
    return ClassDataset(train, labels), test_ds, bank
