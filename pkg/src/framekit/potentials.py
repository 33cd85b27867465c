"""Registry of convex functions ``phi: R+ -> R+`` used to build frame potentials."""
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ConvexFn:
    """A registered convex function with its (sub)derivative.

    kinds:
      ``power``  ``x**q`` with ``q >= 1``
      ``exp``    ``exp(x) - 1``
      ``pl``     ``sum_k max(x - t_k, 0)`` for knots ``t_k >= 0`` (convex, not strictly)
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind == "power":
            (q,) = self.params
            if not q >= 1:
                raise ValidationError("power potentials need q >= 1")
            object.__setattr__(self, "params", (float(q),))
        elif self.kind == "exp":
            object.__setattr__(self, "params", ())
        elif self.kind == "pl":
            knots = tuple(sorted(float(t) for t in self.params))
            if not knots or any(t < 0 for t in knots):
                raise ValidationError("piecewise-linear potentials need non-negative knots")
            object.__setattr__(self, "params", knots)
        else:
            raise ValidationError(f"unknown convex function kind {self.kind!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            return np.maximum(x, 0.0) ** self.params[0]
        if self.kind == "exp":
            return np.expm1(x)
        return sum(np.maximum(x - t, 0.0) for t in self.params)

    def derivative(self, x):
        """Right derivative (a valid subgradient on ``R+``)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            q = self.params[0]
            return q * np.maximum(x, 0.0) ** (q - 1.0) if q > 1 else np.ones_like(x)
        if self.kind == "exp":
            return np.exp(x)
        return sum((x >= t).astype(float) for t in self.params)

    @property
    def strictly_convex(self):
        return self.kind == "exp" or (self.kind == "power" and self.params[0] > 1)

    @property
    def differentiable(self):
        return self.kind in ("power", "exp")

    def spec(self):
        """Round-trippable text form, e.g. ``power:2``."""
        if self.kind == "power":
            return f"power:{self.params[0]:g}"
        if self.kind == "exp":
            return "exp"
        return "pl:" + ",".join(f"{t:g}" for t in self.params)

    def to_dict(self):
        if self.kind == "power":
            return {"kind": "power", "params": {"q": self.params[0]}}
        if self.kind == "exp":
            return {"kind": "exp", "params": {}}
        return {"kind": "pl", "params": {"knots": list(self.params)}}


def power(q=2.0):
    return ConvexFn("power", (q,))


def exponential():
    return ConvexFn("exp")


def piecewise_linear(knots):
    return ConvexFn("pl", tuple(knots))


def parse_phi(text):
    """Parse ``power:<q>``, ``exp`` or ``pl:<t1>,<t2>,...``."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    try:
        if kind == "power":
            return power(float(rest) if rest else 2.0)
        if kind == "exp" and not rest:
            return exponential()
        if kind == "pl":
            return piecewise_linear([float(t) for t in rest.split(",") if t])
    except ValueError as exc:
        raise ValidationError(f"bad potential {text!r}: {exc}") from exc
    raise ValidationError(f"bad potential {text!r}")


def phi_from_dict(d):
    """Inverse of :meth:`ConvexFn.to_dict`.

    ``params`` may also be given positionally: ``[q]`` for power, the knot
    list for pl.  A bare string is read by :func:`parse_phi`.
    """
    if isinstance(d, str):
        return parse_phi(d)
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError("potential must be an object with a 'kind' field")
    params = d.get("params") or {}
    kind = d["kind"]
    try:
        if isinstance(params, list):
            if kind == "power" and len(params) <= 1:
                return power(float(params[0]) if params else 2.0)
            if kind == "pl":
                return piecewise_linear([float(t) for t in params])
            if kind == "exp" and not params:
                return exponential()
        elif isinstance(params, dict):
            if kind == "power":
                return power(float(params.get("q", 2.0)))
            if kind == "exp":
                return exponential()
            if kind == "pl":
                return piecewise_linear([float(t) for t in params.get("knots", [])])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad potential parameters {params!r}: {exc}") from exc
    raise ValidationError(f"bad potential {kind!r} with parameters {params!r}")


REGISTRY = {
    "square": power(2.0),
    "cube": power(3.0),
    "power1.5": power(1.5),
    "exp": exponential(),
    "hinge": piecewise_linear((0.5, 1.0)),
}
