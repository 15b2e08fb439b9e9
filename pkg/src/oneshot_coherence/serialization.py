"""JSON encodings of states, ensembles and channels.

Complex numbers are two-element ``[re, im]`` arrays throughout.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .channels import IncoherentChannel
from .qstate import DensityOperator, PureEnsemble, PureState, ValidationError


def _complex(x: Any, field: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if not (isinstance(x, (list, tuple)) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        raise ValidationError(f"expected [re, im] pair, got {x!r}", field, "complex as [re, im]")
    return complex(float(x[0]), float(x[1]))


def _vector(xs: Any, field: str) -> np.ndarray:
    if not isinstance(xs, list) or not xs:
        raise ValidationError(f"{field} must be a nonempty list", field, "nonempty list")
    return np.array([_complex(x, field) for x in xs], dtype=np.complex128)


def _matrix(rows: Any, field: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ValidationError(f"{field} must be a nonempty list of rows", field, "nonempty list")
    out = [_vector(r, field) for r in rows]
    if len({r.size for r in out}) != 1:
        raise ValidationError(f"{field} rows have unequal length", field, "rectangular")
    return np.array(out)


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=np.complex128)]


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.asarray(m, dtype=np.complex128)]


def _check_dim(obj: dict, actual: int, key: str = "dim") -> None:
    if key in obj and obj[key] != actual:
        raise ValidationError(f"{key}={obj[key]!r} but data has dimension {actual}", key,
                              "dim matches data")


def _require(obj: Any, key: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError(f"missing field {key!r}", key, "required field")
    return obj[key]


def state_to_json(psi: PureState) -> dict:
    return {"dim": psi.dim, "amplitudes": encode_vector(psi.amplitudes)}


def state_from_json(obj: Any) -> PureState:
    amps = _vector(_require(obj, "amplitudes"), "amplitudes")
    _check_dim(obj, amps.size)
    return PureState(amps)


def density_to_json(rho: DensityOperator) -> dict:
    return {"dim": rho.dim, "matrix": encode_matrix(rho.matrix)}


def density_from_json(obj: Any) -> DensityOperator:
    m = _matrix(_require(obj, "matrix"), "matrix")
    _check_dim(obj, m.shape[0])
    return DensityOperator(m)


def ensemble_to_json(ensemble: PureEnsemble) -> dict:
    return {"members": [{"weight": float(w), "amplitudes": encode_vector(s.amplitudes)}
                        for w, s in ensemble]}


def ensemble_from_json(obj: Any) -> PureEnsemble:
    members = _require(obj, "members")
    if not isinstance(members, list) or not members:
        raise ValidationError("members must be a nonempty list", "members", "nonempty")
    pairs = []
    for m in members:
        w = _require(m, "weight")
        if not isinstance(w, (int, float)) or isinstance(w, bool):
            raise ValidationError(f"weight {w!r} is not a number", "weight", "real weight")
        pairs.append((float(w), PureState(_vector(_require(m, "amplitudes"), "amplitudes"))))
    return PureEnsemble.from_pairs(pairs)


def channel_to_json(channel: IncoherentChannel) -> dict:
    return {"input_dim": channel.input_dim, "output_dim": channel.output_dim,
            "kraus": [encode_matrix(k) for k in channel.kraus]}


def channel_from_json(obj: Any) -> IncoherentChannel:
    kraus = [_matrix(k, "kraus") for k in _require(obj, "kraus")]
    ch = IncoherentChannel(kraus)
    _check_dim(obj, ch.input_dim, "input_dim")
    _check_dim(obj, ch.output_dim, "output_dim")
    return ch


def load_json(path: str) -> Any:
    try:
        with open(path, "rb") as fh:
            return json.loads(fh.read().decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: {exc}", "input", "valid JSON") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}", "input", "readable file") from exc


def dumps(obj: Any) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
