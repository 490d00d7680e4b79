"""Reservoir connectivity ensembles, input masks, and matrix functionals.

Three connectivity laws are supported: Haar-like orthogonal matrices obtained
by Gram-Schmidt orthonormalization of a standard Gaussian draw, sparse
Gaussian matrices with a prescribed singular-value ratio, and plain dense
Gaussian matrices. After the ensemble draw the matrix is rescaled so its
spectral norm hits an exact target below 1, which guarantees a unique
input-driven state solution for the recursion in :mod:`memcap.dynamics`.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import SamplingError
from .seeding import stream_rng

_MAX_RESAMPLE = 16
_ORTHO_TOL = 1e-10
_POWER_TOL = 1e-12
_POWER_MAX_ITER = 500


# ---------------------------------------------------------------------------
# ensemble tags
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ensemble:
    """Tagged connectivity law. ``sparsity``/``conditioning`` only apply to the sparse kind."""

    kind: str  # "orthogonal" | "sparse" | "dense"
    sparsity: float | None = None
    conditioning: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("orthogonal", "sparse", "dense"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "sparse":
            if self.sparsity is None or not 0.0 < self.sparsity <= 1.0:
                raise ValueError("sparse ensemble needs sparsity in (0, 1]")
            if self.conditioning is None or not 0.0 < self.conditioning <= 1.0:
                raise ValueError("sparse ensemble needs conditioning in (0, 1]")
        elif self.sparsity is not None or self.conditioning is not None:
            raise ValueError(f"{self.kind} ensemble takes no parameters")

    @staticmethod
    def orthogonal() -> "Ensemble":
        return Ensemble("orthogonal")

    @staticmethod
    def sparse_conditioned(sparsity: float = 0.1, conditioning: float = 0.7) -> "Ensemble":
        return Ensemble("sparse", sparsity=sparsity, conditioning=conditioning)

    @staticmethod
    def dense() -> "Ensemble":
        return Ensemble("dense")

    def label(self) -> str:
        if self.kind == "sparse":
            return f"sparse:sparsity={self.sparsity:g},conditioning={self.conditioning:g}"
        return self.kind


def parse_ensemble(text: str) -> Ensemble:
    """Parse an ensemble tag such as ``orthogonal``, ``dense``, or
    ``sparse:sparsity=0.1,conditioning=0.7`` (sparse parameters optional)."""
    text = text.strip()
    if text == "orthogonal":
        return Ensemble.orthogonal()
    if text == "dense":
        return Ensemble.dense()
    if text == "sparse" or text.startswith("sparse:"):
        kwargs = {"sparsity": 0.1, "conditioning": 0.7}
        if ":" in text:
            for item in text.split(":", 1)[1].split(","):
                if not item:
                    continue
                key, _, value = item.partition("=")
                key = key.strip()
                if key not in kwargs or not value:
                    raise ValueError(f"bad sparse ensemble parameter {item!r}")
                kwargs[key] = float(value)
        return Ensemble.sparse_conditioned(**kwargs)
    raise ValueError(f"cannot parse ensemble {text!r}")


# ---------------------------------------------------------------------------
# matrix functionals
# ---------------------------------------------------------------------------

def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value, by power iteration on m^T m with an SVD fallback."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("spectral_norm expects a matrix")
    if m.size == 0:
        raise ValueError("spectral_norm of an empty matrix is undefined")
    b = m.T @ m
    n = b.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    for _ in range(_POWER_MAX_ITER):
        w = b @ v
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        lam_new = float(v @ (b @ v))
        if abs(lam_new - lam) <= _POWER_TOL * max(abs(lam_new), 1.0):
            return float(np.sqrt(max(lam_new, 0.0)))
        lam = lam_new
    # Near-degenerate top singular pair: let LAPACK settle it.
    return float(np.linalg.svd(m, compute_uv=False)[0])


def normalize_spectral(m: np.ndarray, target: float) -> np.ndarray:
    """Rescale ``m`` so its spectral norm equals ``target`` (target in (0, 1))."""
    if not 0.0 < target < 1.0:
        raise ValueError("target spectral norm must lie in (0, 1)")
    m = np.asarray(m, dtype=float)
    norm = spectral_norm(m)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero matrix to a positive spectral norm")
    return m * (target / norm)


def min_abs_entry(v: np.ndarray) -> float:
    """Smallest absolute entry of a nonempty array."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("min_abs_entry of an empty array is undefined")
    return float(np.min(np.abs(v)))


def max_abs_entry(v: np.ndarray) -> float:
    """Largest absolute entry of a nonempty array."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("max_abs_entry of an empty array is undefined")
    return float(np.max(np.abs(v)))


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def sample_dense_gaussian(n: int, seed: int) -> np.ndarray:
    """n x n matrix with i.i.d. standard Gaussian entries."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return stream_rng(seed, "matrix").standard_normal((n, n))


def sample_orthogonal(n: int, seed: int) -> np.ndarray:
    """Orthonormal matrix from Gram-Schmidt of an i.i.d. standard Gaussian draw.

    Realized as a QR factorization with the R diagonal forced positive, which
    produces the same orthonormal frame as classical column-wise Gram-Schmidt.
    Rank-deficient draws (a probability-zero event) are resampled from an
    incremented stream.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    for attempt in range(_MAX_RESAMPLE):
        g = stream_rng(seed, "matrix", attempt).standard_normal((n, n))
        q, r = np.linalg.qr(g)
        diag = np.diag(r)
        if np.any(diag == 0.0):
            continue
        q = q * np.sign(diag)
        if np.max(np.abs(q.T @ q - np.eye(n))) <= _ORTHO_TOL:
            return q
    raise SamplingError(f"no orthonormal draw after {_MAX_RESAMPLE} attempts (n={n}, seed={seed})")


def sample_sparse_gaussian(n: int, sparsity: float, seed: int, attempt: int = 0) -> np.ndarray:
    """Gaussian matrix with entries independently zeroed with probability 1 - sparsity."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < sparsity <= 1.0:
        raise ValueError("sparsity must lie in (0, 1]")
    rng = stream_rng(seed, "matrix", attempt)
    m = rng.standard_normal((n, n))
    keep = rng.random((n, n)) < sparsity
    return m * keep


def sample_sparse_conditioned(n: int, sparsity: float, conditioning: float, seed: int) -> np.ndarray:
    """Sparse Gaussian draw with singular values rescaled to a fixed min/max ratio.

    After sparsification the singular values are mapped affinely onto
    [conditioning * s_max, s_max], preserving order and singular subspaces, so
    that s_min / s_max equals ``conditioning`` exactly (up to roundoff). Note
    this recomposition densifies the matrix; the sparsity parameter controls
    the law of the pre-conditioning draw, not the zero pattern of the output.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 < conditioning <= 1.0:
        raise ValueError("conditioning must lie in (0, 1]")
    for attempt in range(_MAX_RESAMPLE):
        m = sample_sparse_gaussian(n, sparsity, seed, attempt)
        if not np.any(m):
            continue
        try:
            u, s, vt = np.linalg.svd(m)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise SamplingError(f"SVD failed on sparse draw (n={n}, seed={seed}): {exc}") from exc
        s_max, s_min = s[0], s[-1]
        if s_max <= 0.0:
            continue
        if conditioning == 1.0:
            s_new = np.full_like(s, s_max)
        elif s_max == s_min:
            # Cannot spread identical singular values; resample (measure zero).
            continue
        else:
            lo = conditioning * s_max
            s_new = lo + (s - s_min) * ((s_max - lo) / (s_max - s_min))
        return (u * s_new) @ vt
    raise SamplingError(
        f"no usable sparse draw after {_MAX_RESAMPLE} attempts (n={n}, sparsity={sparsity}, seed={seed})"
    )


def sample_input_mask(n: int, seed: int) -> np.ndarray:
    """Input mask with i.i.d. standard Gaussian entries, all nonzero.

    An exactly-zero entry (possible only under adversarial seeding) is handled
    by resampling, which preserves the law.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    for attempt in range(_MAX_RESAMPLE):
        v = stream_rng(seed, "mask", attempt).standard_normal(n)
        if np.all(v != 0.0):
            return v
    raise SamplingError(f"input mask kept drawing exact zeros (n={n}, seed={seed})")


# ---------------------------------------------------------------------------
# reservoir specification
# ---------------------------------------------------------------------------

@dataclass
class ReservoirSpec:
    """A sampled reservoir: connectivity A, input mask C, input shift, and provenance.

    ``target_spectral_norm`` records the exact norm the connectivity was scaled
    to; it is None for hand-built matrices that bypass normalization.
    """

    n: int
    connectivity: np.ndarray
    input_mask: np.ndarray
    input_shift: np.ndarray | None = None
    ensemble: Ensemble | None = None
    target_spectral_norm: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        self.connectivity = np.asarray(self.connectivity, dtype=float)
        self.input_mask = np.asarray(self.input_mask, dtype=float)
        if self.input_shift is None:
            self.input_shift = np.zeros(self.n)
        else:
            self.input_shift = np.asarray(self.input_shift, dtype=float)
        if self.n < 1:
            raise ValueError("state dimension must be at least 1")
        if self.connectivity.shape != (self.n, self.n):
            raise ValueError("connectivity must be n x n")
        if self.input_mask.shape != (self.n,):
            raise ValueError("input mask must be an n-vector")
        if self.input_shift.shape != (self.n,):
            raise ValueError("input shift must be an n-vector")
        if self.target_spectral_norm is not None and not 0.0 < self.target_spectral_norm < 1.0:
            raise ValueError("target spectral norm must lie in (0, 1)")

    @property
    def mask_floor(self) -> float:
        """Minimum absolute input mask entry."""
        return min_abs_entry(self.input_mask)

    @property
    def mask_ceil(self) -> float:
        """Maximum absolute input mask entry."""
        return max_abs_entry(self.input_mask)


def sample_reservoir(n: int, ensemble: Ensemble, target_spectral_norm: float, seed: int) -> ReservoirSpec:
    """Draw connectivity and input mask for the given ensemble and normalize.

    The ensemble structure (orthogonality, conditioning, sparsity law) is
    imposed first; the spectral rescaling to ``target_spectral_norm`` comes
    last so the final matrix hits the target exactly.
    """
    if ensemble.kind == "orthogonal":
        m = sample_orthogonal(n, seed)
    elif ensemble.kind == "sparse":
        m = sample_sparse_conditioned(n, ensemble.sparsity, ensemble.conditioning, seed)
    else:
        m = sample_dense_gaussian(n, seed)
    connectivity = normalize_spectral(m, target_spectral_norm)
    mask = sample_input_mask(n, seed)
    return ReservoirSpec(
        n=n,
        connectivity=connectivity,
        input_mask=mask,
        ensemble=ensemble,
        target_spectral_norm=target_spectral_norm,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# text serialization (audit trail for sweep reproducibility)
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def spec_to_text(spec: ReservoirSpec) -> str:
    """Self-describing text form of a reservoir, exact to the last bit."""
    out = io.StringIO()
    out.write("memcap-reservoir v1\n")
    out.write(f"n = {spec.n}\n")
    out.write(f"ensemble = {spec.ensemble.label() if spec.ensemble else 'custom'}\n")
    target = "none" if spec.target_spectral_norm is None else _fmt(spec.target_spectral_norm)
    out.write(f"target_spectral_norm = {target}\n")
    out.write(f"seed = {spec.seed}\n")
    out.write("connectivity =\n")
    for row in spec.connectivity:
        out.write(" ".join(_fmt(x) for x in row) + "\n")
    out.write("input_mask =\n")
    out.write(" ".join(_fmt(x) for x in spec.input_mask) + "\n")
    out.write("input_shift =\n")
    out.write(" ".join(_fmt(x) for x in spec.input_shift) + "\n")
    return out.getvalue()


def spec_from_text(text: str) -> ReservoirSpec:
    """Inverse of :func:`spec_to_text`."""
    lines = [line.rstrip("\n") for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != "memcap-reservoir v1":
        raise ValueError("not a memcap reservoir record")
    fields: dict[str, str] = {}
    idx = 1
    while idx < len(lines) and "=" in lines[idx] and not lines[idx].endswith("="):
        key, _, value = lines[idx].partition("=")
        fields[key.strip()] = value.strip()
        idx += 1
    n = int(fields["n"])
    ensemble = None if fields["ensemble"] == "custom" else parse_ensemble(fields["ensemble"])
    target = None if fields["target_spectral_norm"] == "none" else float(fields["target_spectral_norm"])
    seed = int(fields["seed"])

    def read_block(name: str, rows: int) -> np.ndarray:
        nonlocal idx
        if lines[idx] != f"{name} =":
            raise ValueError(f"expected block {name!r} at line {idx + 1}")
        idx += 1
        block = np.array([[float(x) for x in lines[idx + r].split()] for r in range(rows)])
        idx += rows
        return block

    connectivity = read_block("connectivity", n)
    mask = read_block("input_mask", 1)[0]
    shift = read_block("input_shift", 1)[0]
    return ReservoirSpec(
        n=n,
        connectivity=connectivity,
        input_mask=mask,
        input_shift=shift,
        ensemble=ensemble,
        target_spectral_norm=target,
        seed=seed,
    )
