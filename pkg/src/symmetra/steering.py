"""Steering thresholds of isotropic and Werner states from alpha* and beta*."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .incompat import RobustnessReport


def steering_thresholds(rep: RobustnessReport) -> tuple[float, float]:
    """Isotropic and Werner visibility thresholds; these are alpha* and beta* verbatim."""
    return rep.alpha_star, rep.beta_star


def dichotomic_isotropic_bound(d: int) -> float:
    """Isotropic visibility above which all two-outcome measurements steer: ``1 - d^(-1/(d-1))``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return 1 - d ** (-1 / (d - 1))


def dichotomic_werner_bound(d: int) -> float:
    """Werner analogue: ``(d-1)^2 [1 - (1 - 1/d)^(1/(d-1))]``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return (d - 1) ** 2 * (1 - (1 - 1 / d) ** (1 / (d - 1)))


@dataclass(frozen=True)
class SteeringReport:
    isotropic: float
    werner: float
    dichotomic_iso: float
    dichotomic_wer: float
    beats_dichotomic_iso: bool
    beats_dichotomic_wer: bool
    status: str  # "certified" or "candidate"

    @property
    def dagger(self) -> bool:
        """Certified to steer a Werner state that no two-outcome family steers."""
        return self.beats_dichotomic_wer and self.status == "certified"

    def to_dict(self) -> dict:
        return {**asdict(self), "dagger": self.dagger}


def flag_beats_dichotomic(rep: RobustnessReport, d: int) -> SteeringReport:
    """Compare with the dichotomic bounds. Heuristic inputs only ever reach "candidate"."""
    iso, wer = steering_thresholds(rep)
    di, dw = dichotomic_isotropic_bound(d), dichotomic_werner_bound(d)
    exact = rep.alpha_bound == "exact" and rep.beta_bound == "exact" and rep.formula_certified is True
    return SteeringReport(iso, wer, di, dw, iso < di, wer < dw, "certified" if exact else "candidate")
