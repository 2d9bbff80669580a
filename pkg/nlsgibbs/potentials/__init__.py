"""Pair interaction potentials and their bounded approximations."""

from typing import Any, Dict

from nlsgibbs.exceptions import PotentialError
from nlsgibbs.potentials.base import (
    Potential,
    fourier_coefficients,
    l1_distance,
    positive_type_check,
    value_at_zero,
)
from nlsgibbs.potentials.bounded import (
    Constant,
    FourierCoeffs,
    GridSamples,
    L1Clip,
    clip_L1,
)
from nlsgibbs.potentials.delta import DeltaApprox, ExactDelta, build_delta_approx
from nlsgibbs.potentials.profiles import get_profile
from nlsgibbs.potentials.spike import PowerSpike

__all__ = [
    "Constant",
    "DeltaApprox",
    "ExactDelta",
    "FourierCoeffs",
    "GridSamples",
    "L1Clip",
    "Potential",
    "PowerSpike",
    "build_delta_approx",
    "clip_L1",
    "fourier_coefficients",
    "get_profile",
    "l1_distance",
    "positive_type_check",
    "potential_from_dict",
    "potential_to_dict",
    "value_at_zero",
]


def potential_to_dict(w: Potential) -> Dict[str, Any]:
    """Tagged JSON-compatible description of a potential."""
    return w.to_dict()


def potential_from_dict(data: Dict[str, Any]) -> Potential:
    """
    Rebuild a potential from its tagged description.

    Raises:
        PotentialError: If the tag is unknown or the payload malformed
    """
    if not isinstance(data, dict) or "kind" not in data:
        raise PotentialError("potential description must be an object with 'kind'")
    kind = data["kind"]
    try:
        if kind == Constant.kind:
            return Constant(data["value"])
        if kind == FourierCoeffs.kind:
            return FourierCoeffs(data["coeffs"])
        if kind == GridSamples.kind:
            return GridSamples(data["values"])
        if kind == L1Clip.kind:
            return L1Clip(
                potential_from_dict(data["base"]),
                data["epsilon"],
                data.get("n_x", 4096),
            )
        if kind == ExactDelta.kind:
            return ExactDelta(data.get("sign", -1))
        if kind == DeltaApprox.kind:
            return build_delta_approx(
                get_profile(data.get("profile")), data["epsilon"], data.get("n_x")
            )
        if kind == PowerSpike.kind:
            return PowerSpike(data["amplitude"], data["exponent"])
    except (KeyError, TypeError, ValueError) as e:
        raise PotentialError(f"malformed '{kind}' potential: {e}") from e
    raise PotentialError(f"unknown potential kind '{kind}'")
