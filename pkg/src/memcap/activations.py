"""Scalar nonlinearities applied componentwise to the state recursion.

The central activation is the piecewise sigmoid: exactly the identity on
(-delta, delta), exactly +-1 outside (-d, d), and a C1 monotone cubic bridge
in between. The exact-identity and exact-saturation pieces are what make the
two capacity regimes provable, so both are implemented without approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Activation:
    """Tagged activation. ``delta``/``d`` are set only for the piecewise sigmoid."""

    kind: str  # "pws" | "tanh" | "relu" | "logsig" | "identity"
    delta: float | None = None
    d: float | None = None


TANH = Activation("tanh")
RELU = Activation("relu")
LOGSIG = Activation("logsig")
IDENTITY = Activation("identity")


def piecewise_sigmoid(delta: float, d: float) -> Activation:
    """Piecewise sigmoid with linear radius ``delta`` and saturation onset ``d``.

    Admissible parameters satisfy 0 < delta < d, d >= 2 * delta, and
    d <= 3 - 2 * delta. The last bound is the exact condition under which the
    cubic Hermite bridge from (delta, delta, slope 1) to (d, 1, slope 0) is
    nondecreasing and never exceeds 1; outside it the bridge overshoots and
    the result would not be a valid bounded sigmoid.
    """
    if not (math.isfinite(delta) and math.isfinite(d)):
        raise ValueError("piecewise sigmoid parameters must be finite")
    if delta <= 0.0 or d <= 0.0:
        raise ValueError("piecewise sigmoid parameters must be positive")
    if delta >= d:
        raise ValueError("piecewise sigmoid needs delta < d")
    if d < 2.0 * delta:
        raise ValueError("piecewise sigmoid needs d >= 2 * delta")
    if d > 3.0 - 2.0 * delta:
        raise ValueError(
            "piecewise sigmoid needs d <= 3 - 2 * delta, otherwise the C1 bridge "
            "on [delta, d] overshoots 1 and loses monotonicity"
        )
    return Activation("pws", delta=float(delta), d=float(d))


def _pws_bridge(a: np.ndarray, delta: float, d: float) -> np.ndarray:
    # Cubic Hermite on [delta, d]: value delta -> 1, slope 1 -> 0. Horner form
    # of delta*h00 + h*h10 + 1*h01 with h = d - delta and t = (a - delta)/h.
    h = d - delta
    t = (a - delta) / h
    np.clip(t, 0.0, 1.0, out=t)
    c3 = 2.0 * delta + h - 2.0
    c2 = 3.0 - 3.0 * delta - 2.0 * h
    return ((c3 * t + c2) * t + h) * t + delta


def _pws_vector(v: np.ndarray, delta: float, d: float) -> np.ndarray:
    a = np.abs(v)
    outer = np.where(a >= d, 1.0, _pws_bridge(a, delta, d))
    np.copysign(outer, v, out=outer)
    # The inner branch returns v itself, bit for bit: the linear piece must be
    # indistinguishable from the linear recursion it stands in for.
    return np.where(a < delta, v, outer)


def apply_vector(act: Activation, v: np.ndarray) -> np.ndarray:
    """Componentwise application; shape preserved. NaN inputs are rejected."""
    v = np.asarray(v, dtype=float)
    if np.isnan(v).any():
        raise ValueError("activation input contains NaN")
    if act.kind == "tanh":
        return np.tanh(v)
    if act.kind == "relu":
        return np.maximum(v, 0.0)
    if act.kind == "logsig":
        return np.sign(v) * np.log1p(np.abs(v))
    if act.kind == "identity":
        return v.copy()
    if act.kind == "pws":
        return _pws_vector(v, act.delta, act.d)
    raise ValueError(f"unknown activation kind {act.kind!r}")


def apply(act: Activation, x: float) -> float:
    """Scalar application of the activation."""
    return float(apply_vector(act, np.asarray([x]))[0])


def state_kernel(act: Activation):
    """Vectorized activation callable for hot recursion loops.

    Skips the input validation of :func:`apply_vector`; the caller is
    responsible for feeding finite arrays.
    """
    if act.kind == "tanh":
        return np.tanh
    if act.kind == "relu":
        return lambda v: np.maximum(v, 0.0)
    if act.kind == "logsig":
        return lambda v: np.sign(v) * np.log1p(np.abs(v))
    if act.kind == "identity":
        return lambda v: v
    if act.kind == "pws":
        delta, d = act.delta, act.d
        return lambda v: _pws_vector(v, delta, d)
    raise ValueError(f"unknown activation kind {act.kind!r}")


def is_saturating(act: Activation) -> bool:
    """True when the activation is bounded and flattens for large inputs."""
    return act.kind in ("pws", "tanh")


def linear_radius(act: Activation) -> float | None:
    """Radius of the exactly-linear region around 0, if one exists.

    Returns ``delta`` for the piecewise sigmoid, ``inf`` for the identity, and
    None for activations with no exact linear piece (tanh, relu, logsig).
    """
    if act.kind == "pws":
        return act.delta
    if act.kind == "identity":
        return math.inf
    return None


def activation_label(act: Activation) -> str:
    """CLI/CSV tag for the activation, invertible by :func:`parse_activation`."""
    if act.kind == "pws":
        return f"pws:delta={act.delta:g},d={act.d:g}"
    return act.kind


def parse_activation(text: str) -> Activation:
    """Parse ``tanh``, ``relu``, ``logsig``, ``identity``, or ``pws:delta=0.5,d=2``."""
    text = text.strip()
    simple = {"tanh": TANH, "relu": RELU, "logsig": LOGSIG, "identity": IDENTITY}
    if text in simple:
        return simple[text]
    if text == "pws" or text.startswith("pws:"):
        kwargs = {"delta": 0.5, "d": 2.0}
        if ":" in text:
            for item in text.split(":", 1)[1].split(","):
                if not item:
                    continue
                key, _, value = item.partition("=")
                key = key.strip()
                if key not in kwargs or not value:
                    raise ValueError(f"bad piecewise sigmoid parameter {item!r}")
                kwargs[key] = float(value)
        return piecewise_sigmoid(**kwargs)
    raise ValueError(f"cannot parse activation {text!r}")
